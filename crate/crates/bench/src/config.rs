//! Run settings, assembled from an optional key-value config file with
//! command-line flags layered on top.

use std::path::Path;

use serde::Deserialize;

use proxsup::perturbation::DEFAULT_SMOOTHING;
use proxsup::{BoxBounds, Perturber, TvProxParams};

use crate::error::{BenchError, BenchResult};

/// Reconstruction method selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Plain ART sweeps, no perturbation.
    Art,
    /// Classic superiorization: normalized smoothed-TV gradient steps.
    TvS,
    /// Proximal-point superiorization with the TV prox.
    TvPps,
    ProxL0,
    ProxL1,
    ProxL2,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Art => "art",
            Self::TvS => "tv-s",
            Self::TvPps => "tv-pps",
            Self::ProxL0 => "prox-l0",
            Self::ProxL1 => "prox-l1",
            Self::ProxL2 => "prox-l2",
        }
    }
}

/// Residual stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// `Res < eps`.
    Absolute(f64),
    /// `Res < rel · ‖b‖`.
    Relative(f64),
    /// `Res < eps · ‖b‖ / ‖b_ref‖`, with `b_ref` the noiseless 200×200
    /// Shepp-Logan scan at 60 views × 201 rays; rescales thresholds quoted
    /// for that protocol to other sizes.
    ReferenceScaled(f64),
}

/// Every tunable of a run; absent keys fall back to defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOptions {
    pub method: Option<Method>,
    pub beta0: Option<f64>,
    pub gamma: Option<f64>,
    pub eps: Option<f64>,
    pub rel_eps: Option<f64>,
    pub scaled_eps: Option<f64>,
    pub max_outer: Option<usize>,
    pub max_inner: Option<usize>,
    pub tau: Option<f64>,
    pub inner_iters: Option<usize>,
    pub smoothing: Option<f64>,
    pub box_lo: Option<f64>,
    pub box_hi: Option<f64>,
}

impl RunOptions {
    pub fn from_file(path: &Path) -> BenchResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| BenchError::Usage(format!("{}: {e}", path.display())))
    }

    /// Values from `self` win over `base`.
    pub fn over(self, base: RunOptions) -> RunOptions {
        RunOptions {
            method: self.method.or(base.method),
            beta0: self.beta0.or(base.beta0),
            gamma: self.gamma.or(base.gamma),
            eps: self.eps.or(base.eps),
            rel_eps: self.rel_eps.or(base.rel_eps),
            scaled_eps: self.scaled_eps.or(base.scaled_eps),
            max_outer: self.max_outer.or(base.max_outer),
            max_inner: self.max_inner.or(base.max_inner),
            tau: self.tau.or(base.tau),
            inner_iters: self.inner_iters.or(base.inner_iters),
            smoothing: self.smoothing.or(base.smoothing),
            box_lo: self.box_lo.or(base.box_lo),
            box_hi: self.box_hi.or(base.box_hi),
        }
    }

    pub fn resolve(&self) -> BenchResult<RunSettings> {
        let threshold = match (self.eps, self.rel_eps, self.scaled_eps) {
            (Some(e), None, None) => Threshold::Absolute(e),
            (None, Some(r), None) => Threshold::Relative(r),
            (None, None, Some(s)) => Threshold::ReferenceScaled(s),
            (None, None, None) => Threshold::Absolute(0.0),
            _ => return Err(BenchError::Usage("give at most one of eps, rel_eps, scaled_eps".into())),
        };
        let bounds =
            BoxBounds::new(self.box_lo.unwrap_or(0.0), self.box_hi.unwrap_or(1.1)).map_err(BenchError::from)?;
        let tv = TvProxParams::new(
            self.tau.unwrap_or(TvProxParams::DEFAULT_TAU),
            self.inner_iters.unwrap_or(TvProxParams::DEFAULT_INNER_ITERS),
        )?;
        Ok(RunSettings {
            beta0: self.beta0.unwrap_or(10.0),
            gamma: self.gamma.unwrap_or(0.5),
            threshold,
            max_outer: self.max_outer.unwrap_or(300),
            max_inner: self
                .max_inner
                .unwrap_or(proxsup::SuperConfig::DEFAULT_MAX_INNER_ATTEMPTS),
            tv,
            smoothing: self.smoothing.unwrap_or(DEFAULT_SMOOTHING),
            bounds,
        })
    }
}

/// Fully resolved settings shared by every method of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub beta0: f64,
    pub gamma: f64,
    pub threshold: Threshold,
    pub max_outer: usize,
    pub max_inner: usize,
    pub tv: TvProxParams,
    pub smoothing: f64,
    pub bounds: BoxBounds,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunOptions::default().resolve().expect("defaults are valid")
    }
}

impl RunSettings {
    pub fn perturber(&self, method: Method) -> Option<Perturber> {
        match method {
            Method::Art => None,
            Method::TvS => Some(Perturber::ClassicSubgradTv {
                epsilon: self.smoothing,
            }),
            Method::TvPps => Some(Perturber::ProxTv(self.tv)),
            Method::ProxL0 => Some(Perturber::ProxL0),
            Method::ProxL1 => Some(Perturber::ProxL1),
            Method::ProxL2 => Some(Perturber::ProxL2),
        }
    }
}
