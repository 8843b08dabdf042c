//! Test phantoms built from superimposed ellipses, plus image file I/O.

mod io;

pub use io::{load_image, save_image, save_pgm};

use crate::error::{invalid, Result};
use crate::image::{Grid, Image};

/// An ellipse that adds `intensity` to every point it covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub center: (f64, f64),
    pub semi_axes: (f64, f64),
    /// Counter-clockwise rotation of the first semi-axis from the x axis.
    pub rotation_deg: f64,
    pub intensity: f64,
}

impl Ellipse {
    pub fn new(center: (f64, f64), semi_axes: (f64, f64), rotation_deg: f64, intensity: f64) -> Result<Self> {
        if !(semi_axes.0 > 0.0 && semi_axes.1 > 0.0) {
            return Err(invalid("ellipse semi-axes must be positive"));
        }
        Ok(Self {
            center,
            semi_axes,
            rotation_deg,
            intensity,
        })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        let (a, b) = self.semi_axes;
        (u * u) / (a * a) + (v * v) / (b * b) <= 1.0
    }
}

/// The ten ellipses of the original Shepp-Logan head, with unit skull
/// intensity and the low-contrast brain (`1 - 0.98 = 0.02`).
pub const SHEPP_LOGAN: [Ellipse; 10] = [
    Ellipse {
        center: (0.0, 0.0),
        semi_axes: (0.69, 0.92),
        rotation_deg: 0.0,
        intensity: 1.0,
    },
    Ellipse {
        center: (0.0, -0.0184),
        semi_axes: (0.6624, 0.874),
        rotation_deg: 0.0,
        intensity: -0.98,
    },
    Ellipse {
        center: (0.22, 0.0),
        semi_axes: (0.11, 0.31),
        rotation_deg: -18.0,
        intensity: -0.02,
    },
    Ellipse {
        center: (-0.22, 0.0),
        semi_axes: (0.16, 0.41),
        rotation_deg: 18.0,
        intensity: -0.02,
    },
    Ellipse {
        center: (0.0, 0.35),
        semi_axes: (0.21, 0.25),
        rotation_deg: 0.0,
        intensity: 0.01,
    },
    Ellipse {
        center: (0.0, 0.1),
        semi_axes: (0.046, 0.046),
        rotation_deg: 0.0,
        intensity: 0.01,
    },
    Ellipse {
        center: (0.0, -0.1),
        semi_axes: (0.046, 0.046),
        rotation_deg: 0.0,
        intensity: 0.01,
    },
    Ellipse {
        center: (-0.08, -0.605),
        semi_axes: (0.046, 0.023),
        rotation_deg: 0.0,
        intensity: 0.01,
    },
    Ellipse {
        center: (0.0, -0.606),
        semi_axes: (0.023, 0.023),
        rotation_deg: 0.0,
        intensity: 0.01,
    },
    Ellipse {
        center: (0.06, -0.605),
        semi_axes: (0.023, 0.046),
        rotation_deg: 0.0,
        intensity: 0.01,
    },
];

/// Sum of the intensities of every ellipse containing `(x, y)`.
pub fn ellipse_sum(ellipses: &[Ellipse], x: f64, y: f64) -> f64 {
    ellipses.iter().filter(|e| e.contains(x, y)).map(|e| e.intensity).sum()
}

/// Rasterizes ellipses by sampling at pixel centers.
pub fn rasterize(ellipses: &[Ellipse], grid: Grid) -> Image {
    Image::from_fn(grid, |x, y| ellipse_sum(ellipses, x, y))
}

pub fn shepp_logan(rows: usize, cols: usize) -> Result<Image> {
    if rows < 8 || cols < 8 {
        return Err(invalid(format!(
            "Shepp-Logan needs at least 8x8 pixels, got {rows}x{cols}"
        )));
    }
    Ok(rasterize(&SHEPP_LOGAN, Grid::new(rows, cols)?))
}

/// A filled disk of unit intensity, for chord-length checks.
pub fn disk(grid: Grid, radius: f64) -> Image {
    Image::from_fn(grid, |x, y| if x * x + y * y <= radius * radius { 1.0 } else { 0.0 })
}
