//! Degree-wise spherical-harmonic projections on S^{n-1} via Gegenbauer
//! zonal kernels.
//!
//! Projections are kept as sampled functions on a quadrature grid rather
//! than coefficient lists in an explicit orthonormal basis; the Funk-Hecke
//! kernel is all the multiplier pipeline needs.

use crate::error::{BpError, Result};
use crate::quadrature::{Scheme, SphericalQuadrature};
use crate::special::{sphere_surface_area, tree_sum};
use crate::geometry::Direction;

/// Normalized Gegenbauer kernel G_m(t) = C_m^{(n-2)/2}(t) / C_m^{(n-2)/2}(1).
pub fn gegenbauer_zonal(n: usize, m: usize, t: f64) -> Result<f64> {
    if n < 3 {
        return Err(BpError::UnsupportedDimension(n));
    }
    if !(-1.0..=1.0).contains(&t) {
        return Err(BpError::Domain(format!(
            "zonal kernel argument must lie in [-1, 1], got {t}"
        )));
    }
    Ok(gegenbauer_raw(n, m, t) / gegenbauer_raw(n, m, 1.0))
}

/// Unnormalized C_m^{lambda}(t), lambda = (n-2)/2, by the three-term
/// recurrence m C_m = 2(m+lambda-1) t C_{m-1} - (m+2 lambda-2) C_{m-2}.
fn gegenbauer_raw(n: usize, m: usize, t: f64) -> f64 {
    let lambda = (n - 2) as f64 / 2.0;
    match m {
        0 => 1.0,
        1 => 2.0 * lambda * t,
        _ => {
            let mut c_prev = 1.0;
            let mut c = 2.0 * lambda * t;
            for k in 2..=m {
                let kf = k as f64;
                let next = (2.0 * (kf + lambda - 1.0) * t * c
                    - (kf + 2.0 * lambda - 2.0) * c_prev)
                    / kf;
                c_prev = c;
                c = next;
            }
            c
        }
    }
}

/// All normalized kernels G_0(t)..G_max(t) in one recurrence sweep.
pub(crate) fn gegenbauer_zonal_all(n: usize, max_degree: usize, t: f64) -> Vec<f64> {
    let lambda = (n - 2) as f64 / 2.0;
    let mut raw = Vec::with_capacity(max_degree + 1);
    let mut norm = Vec::with_capacity(max_degree + 1);
    raw.push(1.0);
    norm.push(1.0);
    if max_degree >= 1 {
        raw.push(2.0 * lambda * t);
        norm.push(2.0 * lambda);
    }
    for k in 2..=max_degree {
        let kf = k as f64;
        let a = 2.0 * (kf + lambda - 1.0) / kf;
        let b = (kf + 2.0 * lambda - 2.0) / kf;
        raw.push(a * t * raw[k - 1] - b * raw[k - 2]);
        norm.push(a * norm[k - 1] - b * norm[k - 2]);
    }
    raw.iter().zip(&norm).map(|(r, n)| r / n).collect()
}

/// Dimension of the space of degree-m spherical harmonics on S^{n-1},
/// by the closed-form binomial expression.
pub fn harmonic_dim(n: usize, m: usize) -> usize {
    match m {
        0 => 1,
        1 => n,
        _ => binom(n + m - 1, m) - binom(n + m - 3, m - 2),
    }
}

fn binom(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Self-check of the closed-form dimensions against the recurrence
/// dim(n, m) = dim(n-1, m) + dim(n, m-1); called at multiplier-table
/// construction so a formula error fails fast.
pub fn validate_harmonic_dims(n_max: usize, m_max: usize) -> Result<()> {
    for n in 3..=n_max {
        for m in 1..=m_max {
            let closed = harmonic_dim(n, m);
            let rec = harmonic_dim(n - 1, m) + harmonic_dim(n, m - 1);
            if closed != rec {
                return Err(BpError::Accuracy(format!(
                    "harmonic dimension self-check failed at n={n}, m={m}: \
                     closed form {closed} vs recurrence {rec}"
                )));
            }
        }
    }
    Ok(())
}

fn check_projection_resolution(quad: &SphericalQuadrature, m: usize) -> Result<()> {
    // Gauss nodes integrate polynomials of degree 2*resolution - 1 exactly;
    // projecting degree m needs products of degree 2m, so resolution >= m + 1.
    let needed = m + 1;
    let ok = match quad.scheme {
        Scheme::ProductGauss => quad.resolution >= needed,
        Scheme::MonteCarlo { .. } => quad.resolution >= 4,
    };
    if ok {
        Ok(())
    } else {
        Err(BpError::Accuracy(format!(
            "quadrature resolution {} insufficient for degree-{m} projection \
             (needs >= {needed})",
            quad.resolution
        )))
    }
}

/// Degree-m projection of f (sampled at the quadrature nodes), evaluated at
/// arbitrary target directions:
/// (Pi_m f)(v) = (dim_{n,m} / |S^{n-1}|) * sum_j w_j G_m(<v, w_j>) f(w_j).
pub fn degree_projection_at(
    f: &[f64],
    m: usize,
    quad: &SphericalQuadrature,
    targets: &[Direction],
) -> Result<Vec<f64>> {
    if f.len() != quad.len() {
        return Err(BpError::DimensionMismatch {
            expected: quad.len(),
            got: f.len(),
        });
    }
    check_projection_resolution(quad, m)?;
    let n = quad.dim;
    let factor = harmonic_dim(n, m) as f64 / sphere_surface_area(n);
    let mut out = Vec::with_capacity(targets.len());
    let mut terms = vec![0.0f64; quad.len()];
    for v in targets {
        for ((term, w), (&wt, &fv)) in terms
            .iter_mut()
            .zip(&quad.nodes)
            .zip(quad.weights.iter().zip(f))
        {
            let t = v.dot(w).clamp(-1.0, 1.0);
            *term = wt * gegenbauer_raw(n, m, t) * fv;
        }
        out.push(factor * tree_sum(&terms) / gegenbauer_raw(n, m, 1.0));
    }
    Ok(out)
}

/// Degree-m projection sampled back on the quadrature grid itself.
pub fn degree_projection(
    f: &[f64],
    m: usize,
    quad: &SphericalQuadrature,
) -> Result<Vec<f64>> {
    degree_projection_at(f, m, quad, &quad.nodes)
}

/// Truncated even harmonic expansion of a sampled sphere function.
#[derive(Debug, Clone)]
pub struct HarmonicExpansion {
    pub dim: usize,
    pub max_degree: usize,
    /// Projected components Pi_m f for m = 0, 2, ..., max_degree, each
    /// sampled on the quadrature grid.
    pub components: Vec<Vec<f64>>,
    /// Per-component L2 energies ||Pi_m f||^2.
    pub energies: Vec<f64>,
    /// Relative residual ||f - sum Pi_m f||^2 / ||f||^2.
    pub tail_energy: f64,
}

impl HarmonicExpansion {
    pub fn degrees(&self) -> impl Iterator<Item = usize> {
        (0..=self.max_degree).step_by(2)
    }

    /// Pointwise partial sum of the retained components.
    pub fn reconstruction(&self) -> Vec<f64> {
        let len = self.components.first().map_or(0, Vec::len);
        let mut out = vec![0.0; len];
        for comp in &self.components {
            for (o, c) in out.iter_mut().zip(comp) {
                *o += c;
            }
        }
        out
    }

    /// True when the residual exceeds a caller-configured threshold; the
    /// expansion itself stays usable (under-truncation is a warning, not an
    /// error).
    pub fn tail_flagged(&self, threshold: f64) -> bool {
        self.tail_energy > threshold
    }
}

fn l2_norm_sq(f: &[f64], quad: &SphericalQuadrature) -> f64 {
    let terms: Vec<f64> = f
        .iter()
        .zip(&quad.weights)
        .map(|(&v, &w)| w * v * v)
        .collect();
    tree_sum(&terms)
}

/// Expands an even sampled function into even-degree projections up to M.
pub fn expand(f: &[f64], max_degree: usize, quad: &SphericalQuadrature) -> Result<HarmonicExpansion> {
    if max_degree % 2 != 0 {
        return Err(BpError::Domain(format!(
            "truncation degree must be even, got {max_degree}"
        )));
    }
    if f.len() != quad.len() {
        return Err(BpError::DimensionMismatch {
            expected: quad.len(),
            got: f.len(),
        });
    }
    check_projection_resolution(quad, max_degree)?;
    let mut components = Vec::new();
    let mut energies = Vec::new();
    for m in (0..=max_degree).step_by(2) {
        let comp = degree_projection(f, m, quad)?;
        energies.push(l2_norm_sq(&comp, quad));
        components.push(comp);
    }
    let total = l2_norm_sq(f, quad);
    let captured = tree_sum(&energies);
    let tail_energy = if total > 0.0 {
        ((total - captured) / total).max(0.0)
    } else {
        0.0
    };
    Ok(HarmonicExpansion {
        dim: quad.dim,
        max_degree,
        components,
        energies,
        tail_energy,
    })
}

/// Samples a closure at the quadrature nodes.
pub fn sample_on_quadrature<F: Fn(&Direction) -> f64>(
    f: F,
    quad: &SphericalQuadrature,
) -> Vec<f64> {
    quad.nodes.iter().map(|v| f(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::build_sphere_quadrature;

    fn quad3(res: usize) -> SphericalQuadrature {
        build_sphere_quadrature(3, res, Scheme::ProductGauss).unwrap()
    }

    #[test]
    fn zonal_kernel_values() {
        for n in [3, 4, 5, 7] {
            for t in [-1.0, -0.3, 0.0, 0.7, 1.0] {
                assert_eq!(gegenbauer_zonal(n, 0, t).unwrap(), 1.0);
            }
            assert!((gegenbauer_zonal(n, 6, 1.0).unwrap() - 1.0).abs() < 1e-14);
        }
        // n=3 reduces to Legendre: P2(0) = -1/2, P4(0) = 3/8
        assert!((gegenbauer_zonal(3, 2, 0.0).unwrap() + 0.5).abs() < 1e-15);
        assert!((gegenbauer_zonal(3, 4, 0.0).unwrap() - 0.375).abs() < 1e-15);
        assert!(gegenbauer_zonal(3, 2, 1.5).is_err());
    }

    #[test]
    fn zonal_kernel_orthogonality_n5() {
        // weight (1-t^2)^{(n-3)/2} = (1-t^2) for n=5; degree-2 kernel is
        // orthogonal to degrees 0 and 4 under it.
        let (x, w) = crate::quadrature::gauss_gegenbauer(20, 1.0);
        let ip = |a: usize, b: usize| -> f64 {
            x.iter()
                .zip(&w)
                .map(|(&t, &wt)| {
                    wt * gegenbauer_zonal(5, a, t).unwrap() * gegenbauer_zonal(5, b, t).unwrap()
                })
                .sum()
        };
        assert!(ip(2, 0).abs() < 1e-14);
        assert!(ip(2, 4).abs() < 1e-14);
        assert!(ip(2, 2) > 0.0);
        // the t=0 value is pinned by the same recurrence the oracle uses
        let expect = -0.25; // C_2^{3/2}(0)/C_2^{3/2}(1) = (-3/2)/6
        assert!((gegenbauer_zonal(5, 2, 0.0).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn harmonic_dims_closed_form_and_recurrence() {
        assert_eq!(harmonic_dim(3, 0), 1);
        assert_eq!(harmonic_dim(3, 1), 3);
        assert_eq!(harmonic_dim(3, 2), 5);
        assert_eq!(harmonic_dim(3, 8), 17);
        assert_eq!(harmonic_dim(4, 2), 9);
        assert_eq!(harmonic_dim(5, 2), 14);
        validate_harmonic_dims(8, 12).unwrap();
    }

    #[test]
    fn projection_of_constant() {
        let quad = quad3(12);
        let f = vec![2.5; quad.len()];
        let p0 = degree_projection(&f, 0, &quad).unwrap();
        for v in &p0 {
            assert!((v - 2.5).abs() < 1e-10);
        }
        let p2 = degree_projection(&f, 2, &quad).unwrap();
        for v in &p2 {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn projection_of_coordinate_square() {
        // f(v) = v3^2 on S^2: mean 1/3
        let quad = quad3(12);
        let f = sample_on_quadrature(|v| v.coords()[2].powi(2), &quad);
        let p0 = degree_projection(&f, 0, &quad).unwrap();
        for v in &p0 {
            assert!((v - 1.0 / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_idempotent_and_eigenfunction() {
        let quad = quad3(12);
        let u = Direction::new(vec![0.3, -0.5, 0.81]).unwrap();
        let f = sample_on_quadrature(
            |v| gegenbauer_zonal(3, 4, v.dot(&u).clamp(-1.0, 1.0)).unwrap(),
            &quad,
        );
        let p4 = degree_projection(&f, 4, &quad).unwrap();
        let p44 = degree_projection(&p4, 4, &quad).unwrap();
        for ((a, b), c) in f.iter().zip(&p4).zip(&p44) {
            assert!((a - b).abs() < 1e-8, "eigenfunction property");
            assert!((b - c).abs() < 1e-8, "idempotence");
        }
        let p2 = degree_projection(&f, 2, &quad).unwrap();
        for v in &p2 {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn expand_constant_and_pure_zonal() {
        let quad = quad3(12);
        let f = vec![1.0; quad.len()];
        let e = expand(&f, 8, &quad).unwrap();
        assert!(e.tail_energy < 1e-12);
        assert!(e.energies[0] > 1.0);
        for en in &e.energies[1..] {
            assert!(*en < 1e-18);
        }

        let u = Direction::new(vec![0.0, 0.6, 0.8]).unwrap();
        let f = sample_on_quadrature(
            |v| gegenbauer_zonal(3, 4, v.dot(&u).clamp(-1.0, 1.0)).unwrap(),
            &quad,
        );
        let e = expand(&f, 8, &quad).unwrap();
        assert!(e.tail_energy < 1e-10);
        for (i, m) in e.degrees().enumerate() {
            if m == 4 {
                assert!(e.energies[i] > 1e-3);
            } else {
                assert!(e.energies[i] < 1e-16, "m={m}: {}", e.energies[i]);
            }
        }
    }

    #[test]
    fn expand_perturbed_ball_radial() {
        use crate::geometry::{StarBody, ZonalTerm};
        let quad = quad3(12);
        let axis = Direction::new(vec![0.0, 0.0, 1.0]).unwrap();
        let body = StarBody::perturbed_ball(
            3,
            1.0,
            vec![ZonalTerm {
                degree: 2,
                eps: 0.1,
                axis,
            }],
        )
        .unwrap();
        let f = sample_on_quadrature(|v| crate::geometry::radial_eval(&body, v).unwrap(), &quad);
        let e = expand(&f, 8, &quad).unwrap();
        assert!(e.tail_energy < 1e-10);
        assert!(e.energies[0] > 1.0 && e.energies[1] > 1e-4);
        assert!(e.energies[2] < 1e-16 && e.energies[3] < 1e-16);
        // Bessel
        let total: f64 = f
            .iter()
            .zip(&quad.weights)
            .map(|(&v, &w)| w * v * v)
            .sum();
        let captured: f64 = e.energies.iter().sum();
        assert!(captured <= total * (1.0 + 1e-8));
    }

    #[test]
    fn orthogonality_of_distinct_degrees() {
        let quad = quad3(14);
        let f = sample_on_quadrature(
            |v| 1.0 + v.coords()[0].powi(2) + 0.3 * v.coords()[1].powi(4), // even smooth
            &quad,
        );
        let g = sample_on_quadrature(|v| (v.coords()[2].powi(2) - 0.4).exp(), &quad);
        let pf2 = degree_projection(&f, 2, &quad).unwrap();
        let pg4 = degree_projection(&g, 4, &quad).unwrap();
        let ip: f64 = pf2
            .iter()
            .zip(&pg4)
            .zip(&quad.weights)
            .map(|((a, b), &w)| w * a * b)
            .sum();
        let nf: f64 = f.iter().zip(&quad.weights).map(|(&v, &w)| w * v * v).sum::<f64>().sqrt();
        let ng: f64 = g.iter().zip(&quad.weights).map(|(&v, &w)| w * v * v).sum::<f64>().sqrt();
        assert!(ip.abs() < 1e-8 * nf * ng);
    }

    #[test]
    fn resolution_guard() {
        let quad = quad3(5);
        let f = vec![1.0; quad.len()];
        assert!(matches!(
            degree_projection(&f, 8, &quad),
            Err(BpError::Accuracy(_))
        ));
    }
}
