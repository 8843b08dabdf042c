//! Componentwise proximal maps `argmin_y φ(y) + ‖y − x‖² / (2β)` with closed
//! forms.

use crate::error::{invalid, Result};
use crate::image::Image;

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("beta must be positive and finite, got {beta}")))
    }
}

fn map(x: &Image, f: impl Fn(f64) -> f64) -> Image {
    let data = x.as_slice().iter().map(|&v| f(v)).collect();
    Image::from_vec(x.grid(), data).expect("same grid")
}

#[inline]
pub fn hard_threshold(v: f64, beta: f64) -> f64 {
    if v.abs() > beta {
        v
    } else {
        0.0
    }
}

#[inline]
pub fn soft_threshold(v: f64, beta: f64) -> f64 {
    (v.abs() - beta).max(0.0) * v.signum()
}

/// Hard thresholding at `beta` for `φ = ‖·‖₀`.
///
/// Experimental: `‖·‖₀` is not convex, and the threshold is `beta` itself
/// rather than the exact-prox `√(2β)`. The two coincide in effect only for
/// `beta <= 2`, where the proximal descent inequality still holds.
pub fn prox_l0(x: &Image, beta: f64) -> Result<Image> {
    check_beta(beta)?;
    Ok(map(x, |v| hard_threshold(v, beta)))
}

/// Soft thresholding for `φ = ‖·‖₁`.
pub fn prox_l1(x: &Image, beta: f64) -> Result<Image> {
    check_beta(beta)?;
    Ok(map(x, |v| soft_threshold(v, beta)))
}

/// Uniform shrinkage `x / (1 + β)` for `φ = ½‖·‖₂²`.
pub fn prox_l2(x: &Image, beta: f64) -> Result<Image> {
    check_beta(beta)?;
    Ok(map(x, |v| v / (1.0 + beta)))
}

pub fn l0_norm(x: &Image) -> f64 {
    x.as_slice().iter().filter(|&&v| v != 0.0).count() as f64
}

pub fn l1_norm(x: &Image) -> f64 {
    x.as_slice().iter().map(|v| v.abs()).sum()
}

pub fn half_sq_l2(x: &Image) -> f64 {
    0.5 * x.as_slice().iter().map(|v| v * v).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Grid;
    use proptest::prelude::*;

    fn img(v: &[f64]) -> Image {
        Image::from_vec(Grid::new(1, v.len()).unwrap(), v.to_vec()).unwrap()
    }

    /// Minimizer of `phi(y) + (y - x)^2 / (2 beta)` on the grid `lo + k*step`.
    fn grid_argmin(phi: impl Fn(f64) -> f64, x: f64, beta: f64, lo: f64, hi: f64, step: f64) -> f64 {
        let n = ((hi - lo) / step).round() as i64;
        let mut best = (f64::INFINITY, lo);
        for k in 0..=n {
            let y = lo + k as f64 * step;
            let f = phi(y) + (y - x) * (y - x) / (2.0 * beta);
            if f < best.0 {
                best = (f, y);
            }
        }
        best.1
    }

    #[test]
    fn l0_examples() {
        assert_eq!(prox_l0(&img(&[0.5, 2.0]), 1.0).unwrap().as_slice(), &[0.0, 2.0]);
        assert_eq!(prox_l0(&img(&[1.0, -1.0]), 1.0).unwrap().as_slice(), &[0.0, 0.0]);
        let x = img(&[0.0, 3.0, -4.0, 0.0]);
        assert_eq!(prox_l0(&x, 2.5).unwrap(), x);
    }

    #[test]
    fn l1_examples() {
        assert_eq!(prox_l1(&img(&[5.0]), 2.0).unwrap().as_slice(), &[3.0]);
        assert_eq!(prox_l1(&img(&[-0.5]), 1.0).unwrap().as_slice(), &[0.0]);
        assert_eq!(prox_l1(&img(&[-5.0]), 2.0).unwrap().as_slice(), &[-3.0]);
    }

    #[test]
    fn l2_examples() {
        assert_eq!(prox_l2(&img(&[2.0, -4.0]), 1.0).unwrap().as_slice(), &[1.0, -2.0]);
        let x = img(&[0.3, -7.0, 12.5]);
        let y = prox_l2(&x, 1e-12).unwrap();
        for (a, b) in x.as_slice().iter().zip(y.as_slice()) {
            assert!((a - b).abs() <= 1e-10 * a.abs());
        }
    }

    #[test]
    fn non_positive_beta_rejected() {
        let x = img(&[1.0]);
        for beta in [0.0, -1.0, f64::NAN] {
            assert!(prox_l0(&x, beta).is_err());
            assert!(prox_l1(&x, beta).is_err());
            assert!(prox_l2(&x, beta).is_err());
        }
    }

    #[test]
    fn l1_and_l2_match_grid_search() {
        let step = 1e-3;
        for &beta in &[0.05, 0.7, 3.0] {
            for k in 0..40 {
                let x = -4.0 + 0.2 * k as f64 + 0.0123;
                let soft = soft_threshold(x, beta);
                let g = grid_argmin(|y| y.abs(), x, beta, -6.0, 6.0, step);
                assert!((soft - g).abs() <= 2.0 * step, "l1 x={x} beta={beta}");
                let shrink = x / (1.0 + beta);
                let g = grid_argmin(|y| 0.5 * y * y, x, beta, -6.0, 6.0, step);
                assert!((shrink - g).abs() <= 2.0 * step, "l2 x={x} beta={beta}");
            }
        }
    }

    proptest! {
        #[test]
        fn l1_displacement_bounded_by_beta(v in proptest::collection::vec(-10.0f64..10.0, 1..32), beta in 1e-3f64..5.0) {
            let x = img(&v);
            let y = prox_l1(&x, beta).unwrap();
            for (a, b) in x.as_slice().iter().zip(y.as_slice()) {
                // soft threshold moves each entry by min(|x|, β), up to rounding
                prop_assert!((a - b).abs() <= beta + 4.0 * f64::EPSILON * a.abs());
            }
        }

        #[test]
        fn closed_forms_descend(v in proptest::collection::vec(-3.0f64..3.0, 1..32), beta in 1e-3f64..2.0) {
            let x = img(&v);
            type Prox = fn(&Image, f64) -> Result<Image>;
            type Phi = fn(&Image) -> f64;
            let cases: [(Prox, Phi); 3] =
                [(prox_l0, l0_norm), (prox_l1, l1_norm), (prox_l2, half_sq_l2)];
            for (prox, phi) in cases {
                let y = prox(&x, beta).unwrap();
                let d = y.distance(&x);
                prop_assert!(phi(&y) <= phi(&x));
                prop_assert!(phi(&y) + d * d / (2.0 * beta) <= phi(&x) * (1.0 + 1e-12));
            }
        }
    }
}
