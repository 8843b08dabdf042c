//! Exact line/pixel intersection lengths.
//!
//! The line is clipped to `[-1, 1]²`, then cut at every pixel boundary it
//! crosses. Each resulting segment lies inside exactly one pixel, identified
//! from its midpoint; the segment length is the weight.

use super::{Ray, SparseRow};
use crate::image::Grid;

/// Segments shorter than this are boundary grazes, not pixel crossings.
const MIN_SEGMENT: f64 = 1e-13;

/// Parameter interval of the line `p + t·d` inside `[-1, 1]` along one axis.
fn slab(p: f64, d: f64) -> Option<(f64, f64)> {
    if d.abs() < 1e-15 {
        return if (-1.0..=1.0).contains(&p) {
            Some((f64::NEG_INFINITY, f64::INFINITY))
        } else {
            None
        };
    }
    let t0 = (-1.0 - p) / d;
    let t1 = (1.0 - p) / d;
    Some((t0.min(t1), t0.max(t1)))
}

pub fn trace_ray(ray: &Ray, grid: &Grid) -> SparseRow {
    if !ray.is_finite() {
        return SparseRow::empty();
    }
    let (mut dx, mut dy) = ray.direction();
    let (nx, ny) = ray.normal();
    let (px, py) = (ray.offset * nx, ray.offset * ny);
    // Both orientations of a line traverse it the same way.
    if dx < 0.0 || (dx == 0.0 && dy < 0.0) {
        dx = -dx;
        dy = -dy;
    }

    let Some((tx0, tx1)) = slab(px, dx) else {
        return SparseRow::empty();
    };
    let Some((ty0, ty1)) = slab(py, dy) else {
        return SparseRow::empty();
    };
    let t_enter = tx0.max(ty0);
    let t_exit = tx1.min(ty1);
    if !(t_exit - t_enter > MIN_SEGMENT) {
        return SparseRow::empty();
    }

    let (rows, cols) = (grid.rows(), grid.cols());
    let mut cuts = Vec::with_capacity(rows + cols + 4);
    cuts.push(t_enter);
    if dx.abs() >= 1e-15 {
        for j in 1..cols {
            let x = (2 * j) as f64 / cols as f64 - 1.0;
            let t = (x - px) / dx;
            if t > t_enter && t < t_exit {
                cuts.push(t);
            }
        }
    }
    if dy.abs() >= 1e-15 {
        for i in 1..rows {
            let y = 1.0 - (2 * i) as f64 / rows as f64;
            let t = (y - py) / dy;
            if t > t_enter && t < t_exit {
                cuts.push(t);
            }
        }
    }
    cuts.push(t_exit);
    cuts.sort_by(f64::total_cmp);

    let (pw, ph) = (grid.pixel_width(), grid.pixel_height());
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= MIN_SEGMENT {
            continue;
        }
        let t_mid = 0.5 * (w[0] + w[1]);
        let x = px + t_mid * dx;
        let y = py + t_mid * dy;
        let col = (((x + 1.0) / pw).floor().max(0.0) as usize).min(cols - 1);
        let row = (((1.0 - y) / ph).floor().max(0.0) as usize).min(rows - 1);
        entries.push((grid.flat_index(row, col), len));
    }
    entries.sort_by_key(|e| e.0);

    let mut indices: Vec<usize> = Vec::with_capacity(entries.len());
    let mut weights: Vec<f64> = Vec::with_capacity(entries.len());
    for (idx, w) in entries {
        if indices.last() == Some(&idx) {
            *weights.last_mut().unwrap() += w;
        } else {
            indices.push(idx);
            weights.push(w);
        }
    }
    SparseRow::from_sorted(indices, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Length of the line clipped to the square, by direct geometry: the
    /// chord between the two extreme intersection points with the square's
    /// edges.
    fn clipped_length(ray: &Ray) -> f64 {
        let (dx, dy) = ray.direction();
        let (nx, ny) = ray.normal();
        let (px, py) = (ray.offset * nx, ray.offset * ny);
        let mut ts = Vec::new();
        for edge in [-1.0, 1.0] {
            if dx.abs() > 1e-12 {
                let t = (edge - px) / dx;
                if (py + t * dy).abs() <= 1.0 + 1e-12 {
                    ts.push(t);
                }
            }
            if dy.abs() > 1e-12 {
                let t = (edge - py) / dy;
                if (px + t * dx).abs() <= 1.0 + 1e-12 {
                    ts.push(t);
                }
            }
        }
        if ts.len() < 2 {
            return 0.0;
        }
        let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    #[test]
    fn horizontal_ray_through_row_center() {
        let grid = Grid::new(4, 4).unwrap();
        let row = trace_ray(&Ray::new(0.0, grid.center_y(1)), &grid);
        assert_eq!(row.indices(), &[4, 5, 6, 7]);
        for &w in row.weights() {
            assert_relative_eq!(w, 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn vertical_ray_through_column_center() {
        let grid = Grid::new(5, 4).unwrap();
        // direction (0, 1); normal (-1, 0); offset -x selects column x
        let row = trace_ray(&Ray::from_degrees(90.0, -grid.center_x(2)), &grid);
        assert_eq!(row.indices(), &[2, 6, 10, 14, 18]);
        for &w in row.weights() {
            assert_relative_eq!(w, 0.4, epsilon = 1e-14);
        }
    }

    #[test]
    fn miss_is_empty() {
        let grid = Grid::new(4, 4).unwrap();
        assert!(trace_ray(&Ray::new(0.0, 2.0), &grid).is_empty());
        assert!(trace_ray(&Ray::from_degrees(37.0, -1.5), &grid).is_empty());
    }

    #[test]
    fn diagonal_of_single_pixel() {
        let grid = Grid::new(1, 1).unwrap();
        let row = trace_ray(&Ray::from_degrees(45.0, 0.0), &grid);
        assert_eq!(row.indices(), &[0]);
        assert_relative_eq!(row.weights()[0], 2.0 * 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn weights_sum_to_clipped_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grids = [
            Grid::new(7, 13).unwrap(),
            Grid::new(32, 32).unwrap(),
            Grid::new(1, 5).unwrap(),
        ];
        for n in 0..1000 {
            let grid = &grids[n % grids.len()];
            let ray = Ray::new(rng.random_range(-4.0..4.0), rng.random_range(-1.5..1.5));
            let row = trace_ray(&ray, grid);
            let expected = clipped_length(&ray);
            let got = row.length();
            if expected < 1e-10 {
                assert!(got < 1e-9, "ray {ray:?}: {got} vs {expected}");
            } else {
                assert!(
                    (got - expected).abs() <= 1e-9 * expected,
                    "ray {ray:?}: {got} vs {expected}"
                );
            }
            assert!(row.weights().iter().all(|&w| w > 0.0));
            assert!(row.indices().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn reversed_ray_gives_same_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grid = Grid::new(16, 11).unwrap();
        for _ in 0..500 {
            let ray = Ray::new(rng.random_range(0.0..std::f64::consts::PI), rng.random_range(-1.2..1.2));
            let a = trace_ray(&ray, &grid);
            let b = trace_ray(&ray.reversed(), &grid);
            assert_eq!(a.indices(), b.indices(), "{ray:?}");
            for (wa, wb) in a.weights().iter().zip(b.weights()) {
                assert!((wa - wb).abs() <= 1e-12, "{ray:?}");
            }
        }
    }

    #[test]
    fn pixel_lengths_bounded_by_pixel_diagonal() {
        let grid = Grid::new(9, 6).unwrap();
        let diag = grid.pixel_width().hypot(grid.pixel_height());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let ray = Ray::new(rng.random_range(0.0..6.3), rng.random_range(-1.0..1.0));
            for &w in trace_ray(&ray, &grid).weights() {
                assert!(w <= diag * (1.0 + 1e-12));
            }
        }
    }
}
