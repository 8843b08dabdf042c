//! Experiment harness: phantom and data generation, single-method runs and
//! side-by-side comparisons, and their CSV artifacts.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use proxsup::driver::{run_unperturbed, superiorize, write_history_csv, SuperConfig};
use proxsup::phantoms::{load_image, shepp_logan};
use proxsup::projector::{add_noise, build_system, forward_project, ParallelGeometry, ProjectionMeta};
use proxsup::{Image, ProjectionSystem, RunResult};

use crate::config::{Method, RunSettings, Threshold};
use crate::error::BenchResult;

#[derive(Debug, Clone, PartialEq)]
pub enum PhantomSource {
    SheppLogan { rows: usize, cols: usize },
    File(PathBuf),
}

impl PhantomSource {
    pub fn load(&self) -> BenchResult<Image> {
        Ok(match self {
            Self::SheppLogan { rows, cols } => shepp_logan(*rows, *cols)?,
            Self::File(path) => load_image(path)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub variance: f64,
    pub seed: u64,
}

/// A complete, reproducible comparison setup.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub phantom: PhantomSource,
    pub geometry: ParallelGeometry,
    pub noise: Option<NoiseSpec>,
    pub settings: RunSettings,
    pub methods: Vec<Method>,
}

impl ExperimentSpec {
    /// Noiseless Shepp-Logan, `views` over a half turn, TV-S against TV-PPS.
    pub fn shepp_logan(size: usize, views: usize, rays: usize, settings: RunSettings) -> Self {
        Self {
            phantom: PhantomSource::SheppLogan { rows: size, cols: size },
            geometry: ParallelGeometry::half_turn(views, rays),
            noise: None,
            settings,
            methods: vec![Method::TvS, Method::TvPps],
        }
    }
}

/// Measurement data ready for reconstruction.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub truth: Option<Image>,
    pub system: ProjectionSystem,
    pub meta: ProjectionMeta,
}

/// Forward-projects `phantom` with `geometry`, then adds noise if requested.
pub fn simulate(
    phantom: &Image,
    geometry: &ParallelGeometry,
    noise: Option<NoiseSpec>,
    settings: &RunSettings,
) -> BenchResult<Dataset> {
    let rays = geometry.rays()?;
    let system = build_system(&rays, phantom.grid(), settings.bounds)?;
    let clean = forward_project(&system, phantom)?;
    let b = match noise {
        Some(n) => add_noise(&clean, n.variance, n.seed)?,
        None => clean,
    };
    let meta = ProjectionMeta {
        m: b.len(),
        views: geometry.views,
        rays_per_view: geometry.rays_per_view,
        angle_step_deg: geometry.angle_step_deg,
        noise_variance: noise.map_or(0.0, |n| n.variance),
        seed: noise.map_or(0, |n| n.seed),
        angle_start_deg: geometry.angle_start_deg,
        offset_min: geometry.offset_min,
        offset_max: geometry.offset_max,
        grid_rows: phantom.rows(),
        grid_cols: phantom.cols(),
    };
    Ok(Dataset {
        truth: Some(phantom.clone()),
        system: system.with_measurements(b)?,
        meta,
    })
}

/// Rebuilds the system described by stored projections.
pub fn dataset_from_projections(
    b: Vec<f64>,
    meta: ProjectionMeta,
    truth: Option<Image>,
    settings: &RunSettings,
) -> BenchResult<Dataset> {
    let grid = proxsup::Grid::new(meta.grid_rows, meta.grid_cols)?;
    if let Some(t) = &truth {
        if t.grid() != grid {
            return Err(proxsup::Error::DimensionMismatch {
                expected: grid.len(),
                actual: t.grid().len(),
            }
            .into());
        }
    }
    let rays = meta.geometry().rays()?;
    let system = build_system(&rays, grid, settings.bounds)?.with_measurements(b)?;
    Ok(Dataset { truth, system, meta })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖b_ref‖` for the noiseless 200×200 Shepp-Logan at 60 views × 201 rays.
pub fn reference_measurement_norm() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| {
        let phantom = shepp_logan(200, 200).expect("valid size");
        let rays = ParallelGeometry::half_turn(60, 201).rays().expect("valid geometry");
        let system = build_system(&rays, phantom.grid(), Default::default()).expect("non-empty");
        norm(&forward_project(&system, &phantom).expect("matching grid"))
    })
}

/// Absolute residual threshold for `system`.
pub fn absolute_threshold(threshold: Threshold, system: &ProjectionSystem) -> f64 {
    match threshold {
        Threshold::Absolute(e) => e,
        Threshold::Relative(r) => r * norm(system.measurements()),
        Threshold::ReferenceScaled(e) => e * norm(system.measurements()) / reference_measurement_norm(),
    }
}

/// Reconstructs from `x⁰ = 0`.
pub fn run_method(data: &Dataset, method: Method, settings: &RunSettings) -> BenchResult<RunResult> {
    let epsilon = absolute_threshold(settings.threshold, &data.system);
    let x0 = Image::zeros(data.system.grid());
    let truth = data.truth.as_ref();
    let result = match settings.perturber(method) {
        None => run_unperturbed(&data.system, &x0, epsilon, settings.max_outer, truth)?,
        Some(perturber) => {
            let config = SuperConfig {
                beta0: settings.beta0,
                gamma: settings.gamma,
                epsilon,
                max_outer: settings.max_outer,
                max_inner_attempts: settings.max_inner,
                perturber,
                record_history: true,
            };
            superiorize(&data.system, &x0, &config, truth)?
        }
    };
    Ok(result)
}

/// One line of a comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub iterations: usize,
    pub mse: Option<f64>,
    pub res: f64,
    pub runtime_s: f64,
    pub termination: String,
}

impl SummaryRow {
    pub fn from_run(method: Method, run: &RunResult, truth: Option<&Image>) -> BenchResult<Self> {
        let mse = truth.map(|t| proxsup::driver::mse(&run.image, t)).transpose()?;
        Ok(Self {
            method,
            iterations: run.iterations,
            mse,
            res: run.final_res,
            runtime_s: run.elapsed,
            termination: run.termination.to_string(),
        })
    }

    pub fn display_line(&self) -> String {
        format!(
            "method={} iterations={} mse={} res={} runtime_s={:.3} termination={}",
            self.method.name(),
            self.iterations,
            self.mse.map_or("n/a".to_string(), |m| format!("{m:.6}")),
            self.res,
            self.runtime_s,
            self.termination
        )
    }
}

pub const SUMMARY_HEADER: &str = "method,iterations,mse,res,runtime_s,termination";

pub fn write_summary_csv(rows: &[SummaryRow], mut out: impl Write, omit_timing: bool) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.method.name(),
            r.iterations,
            r.mse.map(|v| v.to_string()).unwrap_or_default(),
            r.res,
            if omit_timing { 0.0 } else { r.runtime_s },
            r.termination
        )?;
    }
    Ok(())
}

/// One parsed line of a summary CSV; timing is dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub method: String,
    pub iterations: usize,
    pub mse: Option<f64>,
    pub res: f64,
    pub termination: String,
}

pub fn parse_summary_csv(text: &str) -> BenchResult<Vec<SummaryRecord>> {
    let bad = |l: &str| crate::error::BenchError::Io(format!("bad summary row '{l}'"));
    let mut lines = text.lines();
    if lines.next() != Some(SUMMARY_HEADER) {
        return Err(crate::error::BenchError::Io("unexpected summary header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(bad(l));
            }
            let mse = if f[2].is_empty() {
                None
            } else {
                Some(f[2].parse().map_err(|_| bad(l))?)
            };
            Ok(SummaryRecord {
                method: f[0].to_string(),
                iterations: f[1].parse().map_err(|_| bad(l))?,
                mse,
                res: f[3].parse().map_err(|_| bad(l))?,
                termination: f[5].to_string(),
            })
        })
        .collect()
}

/// History CSV with the timing column optionally zeroed for byte-stable output.
pub fn write_history(run: &RunResult, path: &Path, omit_timing: bool) -> BenchResult<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    if omit_timing {
        let mut records = run.records.clone();
        records.iter_mut().for_each(|r| r.elapsed = 0.0);
        write_history_csv(&records, &mut file)?;
    } else {
        write_history_csv(&run.records, &mut file)?;
    }
    file.flush()?;
    Ok(())
}

/// Reconstruction minus truth down one column, top to bottom.
pub fn write_profile(image: &Image, truth: &Image, column: usize, path: &Path) -> BenchResult<()> {
    if column >= image.cols() {
        return Err(crate::error::BenchError::Usage(format!(
            "profile column {column} out of range for {} columns",
            image.cols()
        )));
    }
    image.ensure_same_grid(truth)?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "row,reconstruction,truth,difference")?;
    for (i, (r, t)) in image.column(column).into_iter().zip(truth.column(column)).enumerate() {
        writeln!(out, "{i},{r},{t},{}", r - t)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub result: RunResult,
    pub summary: SummaryRow,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub dataset: Dataset,
    pub runs: Vec<MethodRun>,
}

impl Comparison {
    pub fn run_for(&self, method: Method) -> Option<&MethodRun> {
        self.runs.iter().find(|r| r.method == method)
    }

    pub fn summaries(&self) -> Vec<SummaryRow> {
        self.runs.iter().map(|r| r.summary.clone()).collect()
    }

    /// Writes `summary.csv` and `<method>_history.csv` per method.
    pub fn write(&self, dir: &Path, omit_timing: bool) -> BenchResult<()> {
        std::fs::create_dir_all(dir)?;
        let mut summary = std::io::BufWriter::new(std::fs::File::create(dir.join("summary.csv"))?);
        write_summary_csv(&self.summaries(), &mut summary, omit_timing)?;
        summary.flush()?;
        for run in &self.runs {
            write_history(
                &run.result,
                &dir.join(format!("{}_history.csv", run.method.name())),
                omit_timing,
            )?;
        }
        Ok(())
    }
}

/// Runs each of `methods` on the same dataset.
pub fn compare_on(dataset: Dataset, methods: &[Method], settings: &RunSettings) -> BenchResult<Comparison> {
    let mut runs = Vec::with_capacity(methods.len());
    for &method in methods {
        let result = run_method(&dataset, method, settings)?;
        let summary = SummaryRow::from_run(method, &result, dataset.truth.as_ref())?;
        runs.push(MethodRun {
            method,
            result,
            summary,
        });
    }
    Ok(Comparison { dataset, runs })
}

/// Simulates the data of `spec`, then runs its methods on it.
pub fn compare(spec: &ExperimentSpec) -> BenchResult<Comparison> {
    let phantom = spec.phantom.load()?;
    let dataset = simulate(&phantom, &spec.geometry, spec.noise, &spec.settings)?;
    compare_on(dataset, &spec.methods, &spec.settings)
}
