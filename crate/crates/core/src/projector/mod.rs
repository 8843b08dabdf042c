//! Parallel-beam acquisition: geometry, exact ray tracing through the pixel
//! grid, sparse system assembly, forward projection and measurement noise.

mod io;
mod siddon;

pub use io::{
    read_projections, read_system_matrix, sidecar_path, write_projections, write_system_matrix, ProjectionMeta,
};
pub use siddon::trace_ray;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{check_len, invalid, Error, Result};
use crate::image::{Grid, Image};

/// A line through the domain, parameterised by the angle of its direction
/// vector `(cos θ, sin θ)` and its signed offset `s` along the normal
/// `(-sin θ, cos θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub angle: f64,
    pub offset: f64,
}

impl Ray {
    pub fn new(angle: f64, offset: f64) -> Self {
        Self { angle, offset }
    }

    pub fn from_degrees(angle_deg: f64, offset: f64) -> Self {
        Self::new(angle_deg.to_radians(), offset)
    }

    #[inline]
    pub fn direction(&self) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        (c, s)
    }

    #[inline]
    pub fn normal(&self) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        (-s, c)
    }

    /// The same line traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        Self::new(self.angle + std::f64::consts::PI, -self.offset)
    }

    pub fn is_finite(&self) -> bool {
        self.angle.is_finite() && self.offset.is_finite()
    }
}

/// Parallel-beam scan description: `views` equally spaced angles, each with
/// `rays_per_view` parallel lines whose offsets span `[offset_min, offset_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelGeometry {
    pub views: usize,
    pub angle_start_deg: f64,
    pub angle_step_deg: f64,
    pub rays_per_view: usize,
    pub offset_min: f64,
    pub offset_max: f64,
}

impl ParallelGeometry {
    /// `views` angles starting at 0° in `180/views` degree increments, with
    /// rays spanning the full detector `[-1, 1]`.
    pub fn half_turn(views: usize, rays_per_view: usize) -> Self {
        Self {
            views,
            angle_start_deg: 0.0,
            angle_step_deg: 180.0 / views.max(1) as f64,
            rays_per_view,
            offset_min: -1.0,
            offset_max: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.views == 0 || self.rays_per_view == 0 {
            return Err(invalid("view and ray counts must be positive"));
        }
        if !(self.angle_step_deg > 0.0) || !self.angle_start_deg.is_finite() {
            return Err(invalid("angle step must be positive and finite"));
        }
        if !(self.offset_min <= self.offset_max) || !self.offset_max.is_finite() || !self.offset_min.is_finite() {
            return Err(invalid("offset range must be finite with min <= max"));
        }
        Ok(())
    }

    pub fn num_rays(&self) -> usize {
        self.views * self.rays_per_view
    }

    pub fn offsets(&self) -> Vec<f64> {
        if self.rays_per_view == 1 {
            return vec![0.5 * (self.offset_min + self.offset_max)];
        }
        let span = self.offset_max - self.offset_min;
        let last = (self.rays_per_view - 1) as f64;
        (0..self.rays_per_view)
            .map(|r| {
                if r + 1 == self.rays_per_view {
                    self.offset_max
                } else {
                    self.offset_min + span * r as f64 / last
                }
            })
            .collect()
    }

    pub fn angles_deg(&self) -> Vec<f64> {
        (0..self.views)
            .map(|k| self.angle_start_deg + k as f64 * self.angle_step_deg)
            .collect()
    }

    /// Rays in view-major order.
    pub fn rays(&self) -> Result<Vec<Ray>> {
        self.validate()?;
        let offsets = self.offsets();
        let mut rays = Vec::with_capacity(self.num_rays());
        for angle in self.angles_deg() {
            rays.extend(offsets.iter().map(|&s| Ray::from_degrees(angle, s)));
        }
        Ok(rays)
    }
}

pub fn make_parallel_geometry(
    num_views: usize,
    angle_start_deg: f64,
    angle_step_deg: f64,
    num_rays: usize,
    offset_min: f64,
    offset_max: f64,
) -> Result<Vec<Ray>> {
    ParallelGeometry {
        views: num_views,
        angle_start_deg,
        angle_step_deg,
        rays_per_view: num_rays,
        offset_min,
        offset_max,
    }
    .rays()
}

/// One row `a^i` of the system matrix: strictly increasing pixel indices with
/// positive intersection lengths.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRow {
    indices: Vec<usize>,
    weights: Vec<f64>,
    norm_sq: f64,
}

impl SparseRow {
    pub fn new(indices: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        check_len(indices.len(), weights.len())?;
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("row indices must be strictly increasing"));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(invalid("row weights must be positive and finite"));
        }
        Ok(Self::from_sorted(indices, weights))
    }

    pub(crate) fn from_sorted(indices: Vec<usize>, weights: Vec<f64>) -> Self {
        let norm_sq = weights.iter().map(|w| w * w).sum();
        Self {
            indices,
            weights,
            norm_sq,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    /// Total intersection length.
    pub fn length(&self) -> f64 {
        self.weights.iter().sum()
    }

    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.indices.iter().zip(&self.weights).map(|(&j, &w)| w * x[j]).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().copied()
    }
}

/// Box constraint `lo <= x_j <= hi` for every pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBounds {
    lo: f64,
    hi: f64,
}

impl BoxBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(invalid(format!("box bounds require lo <= hi, got ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

impl Default for BoxBounds {
    /// `(0, 1.1)`: room above the unit-intensity phantoms.
    fn default() -> Self {
        Self { lo: 0.0, hi: 1.1 }
    }
}

/// The full feasibility description: hyperplanes `⟨a^i, x⟩ = b_i` and a box.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSystem {
    grid: Grid,
    rows: Vec<SparseRow>,
    b: Vec<f64>,
    bounds: BoxBounds,
}

impl ProjectionSystem {
    pub fn new(grid: Grid, rows: Vec<SparseRow>, b: Vec<f64>, bounds: BoxBounds) -> Result<Self> {
        check_len(rows.len(), b.len())?;
        for row in &rows {
            if let Some(max) = row.max_index() {
                if max >= grid.len() {
                    return Err(invalid(format!(
                        "row index {max} out of range for {} pixels",
                        grid.len()
                    )));
                }
            }
        }
        Ok(Self { grid, rows, b, bounds })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    #[inline]
    pub fn measurements(&self) -> &[f64] {
        &self.b
    }

    #[inline]
    pub fn bounds(&self) -> BoxBounds {
        self.bounds
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_pixels(&self) -> usize {
        self.grid.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(SparseRow::nnz).sum()
    }

    pub fn set_measurements(&mut self, b: Vec<f64>) -> Result<()> {
        check_len(self.rows.len(), b.len())?;
        self.b = b;
        Ok(())
    }

    pub fn with_measurements(mut self, b: Vec<f64>) -> Result<Self> {
        self.set_measurements(b)?;
        Ok(self)
    }

    pub fn with_bounds(mut self, bounds: BoxBounds) -> Self {
        self.bounds = bounds;
        self
    }

    pub(crate) fn check_image(&self, x: &Image) -> Result<()> {
        if x.grid() != self.grid {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                actual: x.grid().len(),
            });
        }
        Ok(())
    }
}

/// Traces every ray; measurements start at zero.
pub fn build_system(rays: &[Ray], grid: Grid, bounds: BoxBounds) -> Result<ProjectionSystem> {
    if rays.is_empty() {
        return Err(invalid("at least one ray is required"));
    }
    let rows: Vec<SparseRow> = rays.iter().map(|r| trace_ray(r, &grid)).collect();
    let b = vec![0.0; rows.len()];
    ProjectionSystem::new(grid, rows, b, bounds)
}

/// `A x`.
pub fn forward_project(system: &ProjectionSystem, x: &Image) -> Result<Vec<f64>> {
    system.check_image(x)?;
    let data = x.as_slice();
    Ok(system.rows.iter().map(|row| row.dot(data)).collect())
}

/// Adds i.i.d. `N(0, variance)` noise, reproducible for a given seed.
pub fn add_noise(b: &[f64], variance: f64, seed: u64) -> Result<Vec<f64>> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(invalid(format!("noise variance must be >= 0, got {variance}")));
    }
    if variance == 0.0 {
        return Ok(b.to_vec());
    }
    let normal = Normal::new(0.0, variance.sqrt()).map_err(|e| invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(b.iter().map(|&v| v + normal.sample(&mut rng)).collect())
}
