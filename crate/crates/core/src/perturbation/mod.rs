//! Superiorization perturbations `y = perturb_φ(x, β)`.
//!
//! The proximal kinds return `argmin_y φ(y) + ‖y − x‖²/(2β)` (closed form or
//! iterative), so `φ(y) ≤ φ(x)` holds without any line search. The classic
//! kind steps a fixed distance `β` along the normalized negative smoothed-TV
//! gradient and carries no descent guarantee of its own.

mod prox;
mod tv;

pub use prox::{half_sq_l2, hard_threshold, l0_norm, l1_norm, prox_l0, prox_l1, prox_l2, soft_threshold};
pub use tv::{
    adjoint_gap, classic_subgrad_perturb, div, grad, prox_tv, prox_tv_objective, tv_isotropic, tv_smoothed,
    tv_smoothed_gradient, tv_value, DualField, TvProxParams,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::image::Image;

/// Smoothing used for the classic subgradient unless configured otherwise.
pub const DEFAULT_SMOOTHING: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturber {
    /// Hard threshold, `φ = ‖·‖₀`. Experimental (non-convex).
    ProxL0,
    /// Soft threshold, `φ = ‖·‖₁`.
    ProxL1,
    /// Shrinkage, `φ = ½‖·‖₂²`.
    ProxL2,
    /// Chambolle dual iteration, `φ = TV`.
    ProxTv(TvProxParams),
    /// Normalized smoothed-TV gradient step of length `β`.
    ClassicSubgradTv { epsilon: f64 },
}

impl Perturber {
    pub fn prox_tv_default() -> Self {
        Self::ProxTv(TvProxParams::default())
    }

    pub fn classic_default() -> Self {
        Self::ClassicSubgradTv {
            epsilon: DEFAULT_SMOOTHING,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ProxL0 => "prox-l0",
            Self::ProxL1 => "prox-l1",
            Self::ProxL2 => "prox-l2",
            Self::ProxTv(_) => "prox-tv",
            Self::ClassicSubgradTv { .. } => "classic-subgrad-tv",
        }
    }

    pub fn is_prox(&self) -> bool {
        !matches!(self, Self::ClassicSubgradTv { .. })
    }

    pub fn perturb(&self, x: &Image, beta: f64) -> Result<Image> {
        match *self {
            Self::ProxL0 => prox_l0(x, beta),
            Self::ProxL1 => prox_l1(x, beta),
            Self::ProxL2 => prox_l2(x, beta),
            Self::ProxTv(params) => prox_tv(x, beta, params),
            Self::ClassicSubgradTv { epsilon } => classic_subgrad_perturb(x, beta, epsilon),
        }
    }

    /// The objective `φ` this perturber decreases. For `prox-tv` that is the
    /// full-grid isotropic TV; the classic kind targets the reporting TV.
    pub fn objective(&self, x: &Image) -> Result<f64> {
        match self {
            Self::ProxL0 => Ok(l0_norm(x)),
            Self::ProxL1 => Ok(l1_norm(x)),
            Self::ProxL2 => Ok(half_sq_l2(x)),
            Self::ProxTv(_) => Ok(tv_isotropic(x)),
            Self::ClassicSubgradTv { .. } => tv_value(x),
        }
    }
}

impl fmt::Display for Perturber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Perturber {
    type Err = Error;

    /// Parses a kind name with default parameters.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prox-l0" => Ok(Self::ProxL0),
            "prox-l1" => Ok(Self::ProxL1),
            "prox-l2" => Ok(Self::ProxL2),
            "prox-tv" => Ok(Self::prox_tv_default()),
            "classic-subgrad-tv" => Ok(Self::classic_default()),
            other => Err(invalid(format!("unknown perturber kind '{other}'"))),
        }
    }
}

pub fn perturb(perturber: &Perturber, x: &Image, beta: f64) -> Result<Image> {
    perturber.perturb(x, beta)
}
