//! Pixel grids over the square domain `[-1, 1]²` and row-major images on them.
//!
//! Row `i = 0` is the top of the domain (`y = 1`) and column `j = 0` the left
//! edge (`x = -1`). Flat index of pixel `(i, j)` is `i * cols + j`.

use crate::error::{check_len, invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    rows: usize,
    cols: usize,
}

impl Grid {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid(format!("grid must be non-empty, got {rows}x{cols}")));
        }
        rows.checked_mul(cols).ok_or(Error::DimensionOverflow {
            rows: rows as u64,
            cols: cols as u64,
        })?;
        Ok(Self { rows, cols })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    /// Always false; grids are validated non-empty.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Vertical pixel side.
    #[inline]
    pub fn pixel_height(&self) -> f64 {
        2.0 / self.rows as f64
    }

    /// Horizontal pixel side.
    #[inline]
    pub fn pixel_width(&self) -> f64 {
        2.0 / self.cols as f64
    }

    #[inline]
    pub fn flat_index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.rows && col < self.cols);
        row * self.cols + col
    }

    #[inline]
    pub fn unflatten(&self, index: usize) -> (usize, usize) {
        (index / self.cols, index % self.cols)
    }

    /// Domain x coordinate of the center of column `col`.
    ///
    /// Computed as `(2j+1)/L - 1` so that grids whose sizes differ by an odd
    /// factor produce bit-identical coordinates at shared centers.
    #[inline]
    pub fn center_x(&self, col: usize) -> f64 {
        (2 * col + 1) as f64 / self.cols as f64 - 1.0
    }

    /// Domain y coordinate of the center of row `row`.
    #[inline]
    pub fn center_y(&self, row: usize) -> f64 {
        1.0 - (2 * row + 1) as f64 / self.rows as f64
    }
}

/// A real-valued image on a [`Grid`], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    grid: Grid,
    data: Vec<f64>,
}

impl Image {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn filled(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            data: vec![value; grid.len()],
        }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), data.len())?;
        Ok(Self { grid, data })
    }

    /// Samples `f(x, y)` at every pixel center.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..grid.rows() {
            let y = grid.center_y(i);
            for j in 0..grid.cols() {
                data.push(f(grid.center_x(j), y));
            }
        }
        Self { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.grid.rows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.grid.cols()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[self.grid.flat_index(row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let idx = self.grid.flat_index(row, col);
        self.data[idx] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_same_grid(&self, other: &Image) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                actual: other.grid.len(),
            });
        }
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean distance to another image on the same grid.
    pub fn distance(&self, other: &Image) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Values of column `col`, top to bottom.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows()).map(|i| self.get(i, col)).collect()
    }
}

impl std::ops::Index<usize> for Image {
    type Output = f64;
    fn index(&self, index: usize) -> &f64 {
        &self.data[index]
    }
}

impl std::ops::IndexMut<usize> for Image {
    fn index_mut(&mut self, index: usize) -> &mut f64 {
        &mut self.data[index]
    }
}
