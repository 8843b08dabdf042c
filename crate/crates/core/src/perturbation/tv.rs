//! Total variation: the reporting functional, the forward-difference
//! gradient / divergence pair, Chambolle's dual projection for the TV prox,
//! and the smoothed-TV subgradient used by the classic perturbation.
//!
//! Component 0 of a [`DualField`] is the vertical difference
//! `x[i+1, j] − x[i, j]`, component 1 the horizontal `x[i, j+1] − x[i, j]`.
//! Both vanish on the last row / column, and `div = −gradᵀ`.

use crate::error::{invalid, Error, Result};
use crate::image::{Grid, Image};

use super::prox::check_beta;

/// Per-pixel 2-vector field on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DualField {
    grid: Grid,
    vertical: Vec<f64>,
    horizontal: Vec<f64>,
}

impl DualField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            vertical: vec![0.0; grid.len()],
            horizontal: vec![0.0; grid.len()],
        }
    }

    pub fn from_components(grid: Grid, vertical: Vec<f64>, horizontal: Vec<f64>) -> Result<Self> {
        crate::error::check_len(grid.len(), vertical.len())?;
        crate::error::check_len(grid.len(), horizontal.len())?;
        Ok(Self {
            grid,
            vertical,
            horizontal,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn vertical(&self) -> &[f64] {
        &self.vertical
    }

    pub fn horizontal(&self) -> &[f64] {
        &self.horizontal
    }

    pub fn dot(&self, other: &DualField) -> f64 {
        let v: f64 = self.vertical.iter().zip(&other.vertical).map(|(a, b)| a * b).sum();
        let h: f64 = self.horizontal.iter().zip(&other.horizontal).map(|(a, b)| a * b).sum();
        v + h
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.vertical.iter().chain(&self.horizontal).all(|&v| v == 0.0)
    }
}

fn grad_into(x: &[f64], rows: usize, cols: usize, gv: &mut [f64], gh: &mut [f64]) {
    for i in 0..rows {
        let base = i * cols;
        for j in 0..cols {
            let k = base + j;
            gv[k] = if i + 1 < rows { x[k + cols] - x[k] } else { 0.0 };
            gh[k] = if j + 1 < cols { x[k + 1] - x[k] } else { 0.0 };
        }
    }
}

fn div_into(pv: &[f64], ph: &[f64], rows: usize, cols: usize, out: &mut [f64]) {
    for i in 0..rows {
        let base = i * cols;
        for j in 0..cols {
            let k = base + j;
            let mut d = 0.0;
            if i + 1 < rows {
                d += pv[k];
            }
            if i > 0 {
                d -= pv[k - cols];
            }
            if j + 1 < cols {
                d += ph[k];
            }
            if j > 0 {
                d -= ph[k - 1];
            }
            out[k] = d;
        }
    }
}

pub fn grad(x: &Image) -> DualField {
    let grid = x.grid();
    let mut field = DualField::zeros(grid);
    grad_into(
        x.as_slice(),
        grid.rows(),
        grid.cols(),
        &mut field.vertical,
        &mut field.horizontal,
    );
    field
}

pub fn div(p: &DualField) -> Image {
    let grid = p.grid;
    let mut out = Image::zeros(grid);
    div_into(&p.vertical, &p.horizontal, grid.rows(), grid.cols(), out.as_mut_slice());
    out
}

/// Reporting TV: sum over `i < K−1, j < L−1` of the forward-difference
/// magnitude. The last row and column contribute nothing.
pub fn tv_value(x: &Image) -> Result<f64> {
    let (rows, cols) = (x.rows(), x.cols());
    if rows < 2 || cols < 2 {
        return Err(invalid(format!("TV needs at least a 2x2 image, got {rows}x{cols}")));
    }
    let d = x.as_slice();
    let mut total = 0.0;
    for i in 0..rows - 1 {
        for j in 0..cols - 1 {
            let k = i * cols + j;
            let dv = d[k + cols] - d[k];
            let dh = d[k + 1] - d[k];
            total += (dv * dv + dh * dh).sqrt();
        }
    }
    Ok(total)
}

/// Isotropic TV over the whole grid, `Σ |grad x|`. This is the functional
/// Chambolle's iteration minimizes; it differs from [`tv_value`] only by the
/// one-sided terms on the last row and column.
pub fn tv_isotropic(x: &Image) -> f64 {
    let g = grad(x);
    g.vertical.iter().zip(&g.horizontal).map(|(a, b)| a.hypot(*b)).sum()
}

/// `ψ(y) = TV(y) + ‖y − x‖² / (2β)`, with the isotropic TV.
pub fn prox_tv_objective(y: &Image, x: &Image, beta: f64) -> f64 {
    let d = y.distance(x);
    tv_isotropic(y) + d * d / (2.0 * beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvProxParams {
    tau: f64,
    inner_iters: usize,
}

impl TvProxParams {
    pub const DEFAULT_TAU: f64 = 0.12;
    pub const DEFAULT_INNER_ITERS: usize = 50;

    /// `tau` must lie strictly inside `(0, 1/8)`; `inner_iters >= 1`.
    pub fn new(tau: f64, inner_iters: usize) -> Result<Self> {
        if !(tau > 0.0 && tau < 0.125) {
            return Err(invalid(format!("tau must lie in (0, 1/8), got {tau}")));
        }
        if inner_iters == 0 {
            return Err(invalid("TV prox needs at least one inner iteration"));
        }
        Ok(Self { tau, inner_iters })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn inner_iters(&self) -> usize {
        self.inner_iters
    }
}

impl Default for TvProxParams {
    fn default() -> Self {
        Self {
            tau: Self::DEFAULT_TAU,
            inner_iters: Self::DEFAULT_INNER_ITERS,
        }
    }
}

/// Approximate TV prox by `N` steps of Chambolle's projection algorithm:
///
/// ```text
/// p ← (p + τ ∇(div p − x/β)) / (1 + τ |∇(div p − x/β)|)     from p = 0
/// y = x − β div p
/// ```
pub fn prox_tv(x: &Image, beta: f64, params: TvProxParams) -> Result<Image> {
    check_beta(beta)?;
    let grid = x.grid();
    let (rows, cols, n) = (grid.rows(), grid.cols(), grid.len());
    let xs = x.as_slice();
    let inv_beta = 1.0 / beta;
    let tau = params.tau;

    let mut pv = vec![0.0; n];
    let mut ph = vec![0.0; n];
    let mut work = vec![0.0; n];
    let mut gv = vec![0.0; n];
    let mut gh = vec![0.0; n];
    for _ in 0..params.inner_iters {
        div_into(&pv, &ph, rows, cols, &mut work);
        for (w, &xv) in work.iter_mut().zip(xs) {
            *w -= xv * inv_beta;
        }
        grad_into(&work, rows, cols, &mut gv, &mut gh);
        for k in 0..n {
            let scale = 1.0 + tau * gv[k].hypot(gh[k]);
            pv[k] = (pv[k] + tau * gv[k]) / scale;
            ph[k] = (ph[k] + tau * gh[k]) / scale;
        }
    }
    div_into(&pv, &ph, rows, cols, &mut work);
    let data = xs.iter().zip(&work).map(|(&xv, &d)| xv - beta * d).collect();
    Image::from_vec(grid, data)
}

/// Reporting TV with each term smoothed as `√(dv² + dh² + ε²)`.
pub fn tv_smoothed(x: &Image, epsilon: f64) -> Result<f64> {
    let (rows, cols) = (x.rows(), x.cols());
    if rows < 2 || cols < 2 {
        return Err(invalid(format!("TV needs at least a 2x2 image, got {rows}x{cols}")));
    }
    let d = x.as_slice();
    let eps2 = epsilon * epsilon;
    let mut total = 0.0;
    for i in 0..rows - 1 {
        for j in 0..cols - 1 {
            let k = i * cols + j;
            let dv = d[k + cols] - d[k];
            let dh = d[k + 1] - d[k];
            total += (dv * dv + dh * dh + eps2).sqrt();
        }
    }
    Ok(total)
}

/// Gradient of [`tv_smoothed`].
pub fn tv_smoothed_gradient(x: &Image, epsilon: f64) -> Result<Image> {
    let (rows, cols) = (x.rows(), x.cols());
    if rows < 2 || cols < 2 {
        return Err(invalid(format!("TV needs at least a 2x2 image, got {rows}x{cols}")));
    }
    let d = x.as_slice();
    let eps2 = epsilon * epsilon;
    let mut g = Image::zeros(x.grid());
    let gs = g.as_mut_slice();
    for i in 0..rows - 1 {
        for j in 0..cols - 1 {
            let k = i * cols + j;
            let dv = d[k + cols] - d[k];
            let dh = d[k + 1] - d[k];
            let r = (dv * dv + dh * dh + eps2).sqrt();
            let (sv, sh) = (dv / r, dh / r);
            gs[k + cols] += sv;
            gs[k + 1] += sh;
            gs[k] -= sv + sh;
        }
    }
    Ok(g)
}

/// Classic superiorization step `y = x − β u/‖u‖`, `u` the smoothed-TV
/// gradient; `y = x` when `u = 0`.
pub fn classic_subgrad_perturb(x: &Image, beta: f64, epsilon_smooth: f64) -> Result<Image> {
    check_beta(beta)?;
    if !(epsilon_smooth > 0.0) {
        return Err(invalid(format!(
            "smoothing epsilon must be positive, got {epsilon_smooth}"
        )));
    }
    let u = tv_smoothed_gradient(x, epsilon_smooth)?;
    let norm = u.norm();
    if norm == 0.0 {
        return Ok(x.clone());
    }
    let scale = beta / norm;
    let data = x
        .as_slice()
        .iter()
        .zip(u.as_slice())
        .map(|(&xv, &uv)| xv - scale * uv)
        .collect();
    Image::from_vec(x.grid(), data)
}

pub(crate) fn ensure_same(a: Grid, b: Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        })
    }
}

/// `⟨grad x, p⟩ + ⟨x, div p⟩`, zero up to rounding.
pub fn adjoint_gap(x: &Image, p: &DualField) -> Result<f64> {
    ensure_same(x.grid(), p.grid())?;
    let gx = grad(x);
    let dp = div(p);
    let xd: f64 = x.as_slice().iter().zip(dp.as_slice()).map(|(a, b)| a * b).sum();
    Ok(gx.dot(p) + xd)
}
