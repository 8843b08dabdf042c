//! Metric projections onto the hyperplanes `⟨a^i, x⟩ = b_i` and onto the box,
//! and the cyclic ART sweep `P = P_0 P_m ⋯ P_1` built from them.

use crate::error::{check_len, invalid, Result};
use crate::image::Image;
use crate::projector::{BoxBounds, ProjectionSystem, SparseRow};

/// In-place `x ← x + (b_i − ⟨a^i, x⟩)/‖a^i‖² · a^i`. Empty rows are a no-op.
#[inline]
pub fn project_hyperplane_in_place(x: &mut [f64], row: &SparseRow, b_i: f64) {
    let norm_sq = row.norm_sq();
    if row.is_empty() || norm_sq == 0.0 {
        return;
    }
    let step = (b_i - row.dot(x)) / norm_sq;
    for (j, w) in row.iter() {
        x[j] += step * w;
    }
}

pub fn project_hyperplane(x: &Image, row: &SparseRow, b_i: f64) -> Result<Image> {
    if let Some(max) = row.max_index() {
        if max >= x.grid().len() {
            return Err(invalid(format!(
                "row index {max} out of range for {} pixels",
                x.grid().len()
            )));
        }
    }
    let mut out = x.clone();
    project_hyperplane_in_place(out.as_mut_slice(), row, b_i);
    Ok(out)
}

#[inline]
pub fn project_box_in_place(x: &mut [f64], bounds: BoxBounds) {
    let (lo, hi) = (bounds.lo(), bounds.hi());
    for v in x.iter_mut() {
        *v = v.clamp(lo, hi);
    }
}

pub fn project_box(x: &Image, lo: f64, hi: f64) -> Result<Image> {
    let bounds = BoxBounds::new(lo, hi)?;
    let mut out = x.clone();
    project_box_in_place(out.as_mut_slice(), bounds);
    Ok(out)
}

/// One ART sweep over `x` in place: every row in ascending order, then the box.
pub fn art_sweep_in_place(x: &mut [f64], system: &ProjectionSystem) -> Result<()> {
    check_len(system.num_pixels(), x.len())?;
    for (row, &b_i) in system.rows().iter().zip(system.measurements()) {
        project_hyperplane_in_place(x, row, b_i);
    }
    project_box_in_place(x, system.bounds());
    Ok(())
}

pub fn art_sweep(x: &Image, system: &ProjectionSystem) -> Result<Image> {
    system.check_image(x)?;
    let mut out = x.clone();
    art_sweep_in_place(out.as_mut_slice(), system)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Grid;
    use crate::projector::BoxBounds;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_row(rng: &mut impl Rng, n: usize) -> SparseRow {
        let mut indices: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.6)).collect();
        if indices.is_empty() {
            indices.push(rng.random_range(0..n));
        }
        let weights = indices.iter().map(|_| rng.random_range(0.05..2.0)).collect();
        SparseRow::new(indices, weights).unwrap()
    }

    fn random_image(rng: &mut impl Rng, grid: Grid) -> Image {
        Image::from_fn(grid, |_, _| rng.random_range(-2.0..2.0))
    }

    #[test]
    fn coordinate_projection() {
        let grid = Grid::new(1, 2).unwrap();
        let x = Image::from_vec(grid, vec![3.0, 4.0]).unwrap();
        let row = SparseRow::new(vec![0], vec![1.0]).unwrap();
        assert_eq!(project_hyperplane(&x, &row, 0.0).unwrap().as_slice(), &[0.0, 4.0]);
    }

    #[test]
    fn fixed_point_and_empty_row() {
        let grid = Grid::new(1, 3).unwrap();
        let x = Image::from_vec(grid, vec![1.0, 2.0, 3.0]).unwrap();
        let row = SparseRow::new(vec![0, 2], vec![1.0, 1.0]).unwrap();
        assert_eq!(project_hyperplane(&x, &row, 4.0).unwrap(), x);
        assert_eq!(project_hyperplane(&x, &SparseRow::empty(), 100.0).unwrap(), x);
    }

    #[test]
    fn hyperplane_satisfied_parallel_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let grid = Grid::new(3, 4).unwrap();
        for _ in 0..200 {
            let row = random_row(&mut rng, grid.len());
            let x = random_image(&mut rng, grid);
            let b_i = rng.random_range(-5.0..5.0);
            let y = project_hyperplane(&x, &row, b_i).unwrap();
            let lhs = row.dot(y.as_slice());
            assert!((lhs - b_i).abs() <= 1e-10 * b_i.abs().max(1.0));

            // only support pixels move, along a^i
            let mut ratio = None;
            for j in 0..grid.len() {
                let d = y[j] - x[j];
                match row.indices().binary_search(&j) {
                    Err(_) => assert_eq!(d, 0.0),
                    Ok(k) => {
                        let r = d / row.weights()[k];
                        let r0 = *ratio.get_or_insert(r);
                        assert!((r - r0).abs() <= 1e-12 * r0.abs().max(1.0));
                    }
                }
            }
            let z = project_hyperplane(&y, &row, b_i).unwrap();
            assert!(z.distance(&y) <= 1e-12 * y.norm().max(1.0));
        }
    }

    #[test]
    fn box_clamp() {
        let grid = Grid::new(1, 3).unwrap();
        let x = Image::from_vec(grid, vec![-1.0, 0.5, 9.0]).unwrap();
        assert_eq!(project_box(&x, 0.0, 1.0).unwrap().as_slice(), &[0.0, 0.5, 1.0]);
        let inside = Image::from_vec(grid, vec![0.0, 0.25, 1.0]).unwrap();
        assert_eq!(project_box(&inside, 0.0, 1.0).unwrap(), inside);
        assert!(project_box(&x, 1.0, 0.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Grid::new(5, 5).unwrap();
        for _ in 0..50 {
            let x = random_image(&mut rng, g);
            let once = project_box(&x, -0.5, 0.7).unwrap();
            assert_eq!(project_box(&once, -0.5, 0.7).unwrap(), once);
        }
    }

    #[test]
    fn single_row_sweep() {
        let grid = Grid::new(1, 2).unwrap();
        let row = SparseRow::new(vec![0, 1], vec![1.0, 1.0]).unwrap();
        let sys = ProjectionSystem::new(grid, vec![row], vec![2.0], BoxBounds::new(0.0, 10.0).unwrap()).unwrap();
        let out = art_sweep(&Image::zeros(grid), &sys).unwrap();
        assert_eq!(out.as_slice(), &[1.0, 1.0]);
    }

    fn feasible_system(rng: &mut impl Rng, grid: Grid, m: usize) -> (ProjectionSystem, Image) {
        let x_star = Image::from_fn(grid, |_, _| rng.random_range(0.1..0.9));
        let mut rows: Vec<SparseRow> = (0..m).map(|_| random_row(rng, grid.len())).collect();
        rows.push(SparseRow::empty());
        let b = rows.iter().map(|r| r.dot(x_star.as_slice())).collect();
        let sys = ProjectionSystem::new(grid, rows, b, BoxBounds::new(0.0, 1.0).unwrap()).unwrap();
        (sys, x_star)
    }

    #[test]
    fn feasible_point_is_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grid = Grid::new(2, 5).unwrap();
        for _ in 0..20 {
            let (sys, x_star) = feasible_system(&mut rng, grid, 6);
            let out = art_sweep(&x_star, &sys).unwrap();
            assert!(out.distance(&x_star) <= 1e-12);
        }
    }

    #[test]
    fn sweep_lands_in_box_and_is_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid = Grid::new(2, 5).unwrap();
        let (sys, _) = feasible_system(&mut rng, grid, 15);
        for _ in 0..100 {
            let x = random_image(&mut rng, grid);
            let y = random_image(&mut rng, grid);
            let px = art_sweep(&x, &sys).unwrap();
            let py = art_sweep(&y, &sys).unwrap();
            assert!(px.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert!(px.distance(&py) <= x.distance(&y) + 1e-10);
        }
    }

    #[test]
    fn non_fixed_when_infeasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let grid = Grid::new(2, 5).unwrap();
        let (sys, x_star) = feasible_system(&mut rng, grid, 4);
        // violates a hyperplane
        let mut x = x_star.clone();
        let j = sys.rows()[0].indices()[0];
        x[j] += 0.05;
        assert!(art_sweep(&x, &sys).unwrap().distance(&x) > 1e-6);
        // violates the box
        let mut x = x_star;
        x[0] = 1.5;
        assert!(art_sweep(&x, &sys).unwrap().distance(&x) > 1e-6);
    }

    #[test]
    fn dimension_mismatch() {
        let grid = Grid::new(1, 2).unwrap();
        let sys = ProjectionSystem::new(grid, vec![], vec![], BoxBounds::default()).unwrap();
        assert!(art_sweep(&Image::zeros(Grid::new(2, 2).unwrap()), &sys).is_err());
    }
}
