//! Small special-function helpers shared across modules.

use statrs::function::gamma::gamma;

/// Surface area of the unit sphere S^{n-1} in R^n: 2 pi^{n/2} / Gamma(n/2).
pub fn sphere_surface_area(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

/// Gamma function, re-exported so callers do not depend on statrs directly.
pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

/// Deterministic pairwise (tree) summation. The reduction order depends only
/// on the slice length, so results are reproducible across thread counts.
pub fn tree_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        len => {
            let mid = len / 2;
            tree_sum(&values[..mid]) + tree_sum(&values[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn surface_areas() {
        assert!((sphere_surface_area(3) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_surface_area(4) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((sphere_surface_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tree_sum_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((tree_sum(&xs) - naive).abs() < 1e-9);
    }
}
