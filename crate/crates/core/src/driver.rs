//! The superiorized outer loop and the metrics it reports.
//!
//! Each outer step perturbs `x^k` to `y = perturb(x^k, β)`, runs one ART sweep
//! on `y`, and accepts the candidate when `φ(y) ≤ φ(x^k)` and the residual
//! strictly drops. Otherwise `β ← γβ` and the step is retried. After every
//! accepted step `β` shrinks by `γ` once more, so `Σ β_k ≤ β₀ / (1 − γ)`.
//!
//! Retries are capped: after `max_inner_attempts` rejections the loop takes an
//! unperturbed sweep instead (recorded with `beta_used = 0`), and stops if even
//! that fails to reduce the residual.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use crate::error::{check_len, invalid, Result};
use crate::feasibility::art_sweep_in_place;
use crate::image::Image;
use crate::perturbation::{tv_value, Perturber};
use crate::projector::ProjectionSystem;

/// `‖Ax − b‖₂`.
pub fn res(x: &Image, system: &ProjectionSystem) -> Result<f64> {
    system.check_image(x)?;
    let data = x.as_slice();
    let sum: f64 = system
        .rows()
        .iter()
        .zip(system.measurements())
        .map(|(row, &b)| {
            let r = b - row.dot(data);
            r * r
        })
        .sum();
    Ok(sum.sqrt())
}

/// Row-normalized distance `√Σ((b_i − ⟨a^i,x⟩)/‖a^i‖)²`, skipping empty rows.
pub fn dist_normalized(x: &Image, system: &ProjectionSystem) -> Result<f64> {
    system.check_image(x)?;
    let data = x.as_slice();
    let sum: f64 = system
        .rows()
        .iter()
        .zip(system.measurements())
        .filter(|(row, _)| row.norm_sq() > 0.0)
        .map(|(row, &b)| {
            let r = (b - row.dot(data)) / row.norm();
            r * r
        })
        .sum();
    Ok(sum.sqrt())
}

/// Root-mean-square difference `√(Σ(x − x₀)² / KL)`.
pub fn mse(x: &Image, x0: &Image) -> Result<f64> {
    x.ensure_same_grid(x0)?;
    let n = x.as_slice().len() as f64;
    Ok((x.distance(x0).powi(2) / n).sqrt())
}

/// Reporting TV, with the empty sum for single-row or single-column images.
fn reporting_tv(x: &Image) -> f64 {
    if x.rows() < 2 || x.cols() < 2 {
        0.0
    } else {
        tv_value(x).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperConfig {
    pub beta0: f64,
    pub gamma: f64,
    /// Stop once `Res(x^k) < epsilon`.
    pub epsilon: f64,
    pub max_outer: usize,
    pub max_inner_attempts: usize,
    pub perturber: Perturber,
    pub record_history: bool,
}

impl SuperConfig {
    pub const DEFAULT_MAX_INNER_ATTEMPTS: usize = 50;

    /// `β₀ = 10`, `γ = 1/2`.
    pub fn new(perturber: Perturber, epsilon: f64, max_outer: usize) -> Self {
        Self {
            beta0: 10.0,
            gamma: 0.5,
            epsilon,
            max_outer,
            max_inner_attempts: Self::DEFAULT_MAX_INNER_ATTEMPTS,
            perturber,
            record_history: true,
        }
    }

    /// Threshold relative to the measurement norm: `epsilon = rel · ‖b‖`.
    pub fn relative_epsilon(rel: f64, system: &ProjectionSystem) -> f64 {
        rel * system.measurements().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta0 > 0.0 && self.beta0.is_finite()) {
            return Err(invalid(format!("beta0 must be positive, got {}", self.beta0)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(invalid(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(invalid(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if self.max_outer == 0 || self.max_inner_attempts == 0 {
            return Err(invalid("iteration limits must be positive"));
        }
        if let Perturber::ClassicSubgradTv { epsilon } = self.perturber {
            if !(epsilon > 0.0) {
                return Err(invalid("smoothing epsilon must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub k: usize,
    /// `β` of the accepted perturbation, `0` for an unperturbed step.
    pub beta_used: f64,
    /// Perturbations tried at this step (including the accepted one).
    pub inner_attempts: usize,
    /// `Res(x^{k+1})`.
    pub res: f64,
    /// `Res(x^k)`.
    pub res_before: f64,
    /// Reporting TV of `x^{k+1}`.
    pub phi: f64,
    pub mse: Option<f64>,
    /// `‖y^k − x^k‖₂`.
    pub perturb_norm: f64,
    /// Perturber objective at `x^k` and at the accepted `y^k`.
    pub objective_x: f64,
    pub objective_y: f64,
    /// Seconds since the start of the run.
    pub elapsed: f64,
}

impl IterRecord {
    pub fn is_fallback(&self) -> bool {
        self.beta_used == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ResThreshold,
    MaxOuter,
    InnerExhaustedFallbackStall,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ResThreshold => "res-threshold",
            Self::MaxOuter => "max-outer",
            Self::InnerExhaustedFallbackStall => "inner-exhausted-fallback-stall",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub image: Image,
    pub records: Vec<IterRecord>,
    pub termination: Termination,
    pub iterations: usize,
    pub initial_res: f64,
    pub final_res: f64,
    pub elapsed: f64,
}

impl RunResult {
    /// `max_k perturb_norm / beta_used` over perturbed steps.
    pub fn subgradient_bound(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| r.beta_used > 0.0)
            .map(|r| r.perturb_norm / r.beta_used)
            .fold(0.0, f64::max)
    }

    pub fn total_perturbation(&self) -> f64 {
        self.records.iter().map(|r| r.perturb_norm).sum()
    }
}

/// Runs the superiorized iteration from `x0`.
pub fn superiorize(
    system: &ProjectionSystem,
    x0: &Image,
    config: &SuperConfig,
    ground_truth: Option<&Image>,
) -> Result<RunResult> {
    config.validate()?;
    run(system, x0, config, Some(&config.perturber), ground_truth)
}

/// Plain repeated ART sweeps under the same termination rules; records carry
/// `beta_used = 0`.
pub fn run_unperturbed(
    system: &ProjectionSystem,
    x0: &Image,
    epsilon: f64,
    max_outer: usize,
    ground_truth: Option<&Image>,
) -> Result<RunResult> {
    let config = SuperConfig::new(Perturber::ProxL2, epsilon, max_outer);
    config.validate()?;
    run(system, x0, &config, None, ground_truth)
}

fn run(
    system: &ProjectionSystem,
    x0: &Image,
    config: &SuperConfig,
    perturber: Option<&Perturber>,
    ground_truth: Option<&Image>,
) -> Result<RunResult> {
    system.check_image(x0)?;
    if let Some(truth) = ground_truth {
        x0.ensure_same_grid(truth)?;
    }
    let start = Instant::now();
    let mut x = x0.clone();
    let initial_res = res(&x, system)?;
    let mut res_x = initial_res;
    let mut beta = config.beta0;
    let mut records = Vec::new();
    let mut iterations = 0;
    let mut candidate = x.clone();

    let termination = loop {
        if res_x < config.epsilon {
            break Termination::ResThreshold;
        }
        if iterations >= config.max_outer {
            break Termination::MaxOuter;
        }

        let mut attempts = 0;
        let mut accepted = None;
        if let Some(perturber) = perturber {
            let objective_x = perturber.objective(&x)?;
            while attempts < config.max_inner_attempts {
                attempts += 1;
                let y = perturber.perturb(&x, beta)?;
                let objective_y = perturber.objective(&y)?;
                candidate.as_mut_slice().copy_from_slice(y.as_slice());
                art_sweep_in_place(candidate.as_mut_slice(), system)?;
                let res_c = res(&candidate, system)?;
                if objective_y <= objective_x && res_c < res_x {
                    accepted = Some((beta, res_c, y.distance(&x), objective_x, objective_y));
                    break;
                }
                beta *= config.gamma;
            }
        }

        let (beta_used, res_next, perturb_norm, objective_x, objective_y) = match accepted {
            Some(step) => step,
            None => {
                candidate.as_mut_slice().copy_from_slice(x.as_slice());
                art_sweep_in_place(candidate.as_mut_slice(), system)?;
                let res_c = res(&candidate, system)?;
                if !(res_c < res_x) {
                    break Termination::InnerExhaustedFallbackStall;
                }
                (0.0, res_c, 0.0, f64::NAN, f64::NAN)
            }
        };
        std::mem::swap(&mut x, &mut candidate);

        if config.record_history {
            records.push(IterRecord {
                k: iterations,
                beta_used,
                inner_attempts: attempts,
                res: res_next,
                res_before: res_x,
                phi: reporting_tv(&x),
                mse: ground_truth.map(|t| mse(&x, t)).transpose()?,
                perturb_norm,
                objective_x,
                objective_y,
                elapsed: start.elapsed().as_secs_f64(),
            });
        }
        res_x = res_next;
        beta *= config.gamma;
        iterations += 1;
    };

    Ok(RunResult {
        image: x,
        records,
        termination,
        iterations,
        initial_res,
        final_res: res_x,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

pub const HISTORY_HEADER: &str = "k,beta_used,inner_attempts,res,phi,mse,perturb_norm,elapsed_s";

/// One CSV row per outer iteration; an absent MSE is an empty field.
pub fn write_history_csv(records: &[IterRecord], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{HISTORY_HEADER}")?;
    for r in records {
        let mse = r.mse.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.k, r.beta_used, r.inner_attempts, r.res, r.phi, mse, r.perturb_norm, r.elapsed
        )?;
    }
    Ok(())
}

/// Parsed row of a history CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub k: usize,
    pub beta_used: f64,
    pub inner_attempts: usize,
    pub res: f64,
    pub phi: f64,
    pub mse: Option<f64>,
    pub perturb_norm: f64,
    pub elapsed_s: f64,
}

pub fn parse_history_csv(text: &str) -> Result<Vec<HistoryRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(HISTORY_HEADER) {
        return Err(crate::error::Error::MalformedFile("unexpected history header".into()));
    }
    let bad = |line: &str| crate::error::Error::MalformedFile(format!("bad history row '{line}'"));
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            check_len(8, f.len()).map_err(|_| bad(line))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            Ok(HistoryRow {
                k: f[0].parse().map_err(|_| bad(line))?,
                beta_used: num(f[1])?,
                inner_attempts: f[2].parse().map_err(|_| bad(line))?,
                res: num(f[3])?,
                phi: num(f[4])?,
                mse: if f[5].is_empty() { None } else { Some(num(f[5])?) },
                perturb_norm: num(f[6])?,
                elapsed_s: num(f[7])?,
            })
        })
        .collect()
}
