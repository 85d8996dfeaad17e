//! Deterministic numerical integration on S^{n-1}, on great subspheres
//! S^{n-1} ∩ ξ^⊥, and on radial intervals.
//!
//! The product scheme uses Gauss–Gegenbauer nodes in t = cos θ for each polar
//! angle (the sin-power surface weight is folded into the 1-d rule, so
//! polynomials restricted to the sphere are integrated exactly) and a uniform
//! periodic rule in azimuth. The node set is antipodally symmetric by
//! construction.

use crate::error::{BpError, Result};
use crate::geometry::Direction;
use crate::special::{gamma_fn, sphere_surface_area, tree_sum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One-dimensional Gauss rule for the weight (1-t^2)^alpha on [-1, 1].
///
/// Nodes are the roots of the degree-`order` orthonormal polynomial, found by
/// bisection on a sign-change grid and polished with Newton; weights are
/// Christoffel numbers 1 / sum_j p_j(x)^2. The rule is exactly symmetric
/// about 0.
pub fn gauss_gegenbauer(order: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    // Monic three-term recurrence coefficients for (1-t^2)^alpha.
    let beta0 = std::f64::consts::PI.sqrt() * gamma_fn(alpha + 1.0) / gamma_fn(alpha + 1.5);
    let beta = |k: usize| -> f64 {
        let k = k as f64;
        k * (k + 2.0 * alpha) / ((2.0 * k + 2.0 * alpha).powi(2) - 1.0)
    };
    // Orthonormal evaluation p_0..p_order at x; returns (p_order, sum_{j<order} p_j^2).
    let eval = |x: f64| -> (f64, f64) {
        let mut pm1 = 0.0f64;
        let mut p = 1.0 / beta0.sqrt();
        let mut sum_sq = 0.0;
        for k in 0..order {
            sum_sq += p * p;
            let b_next = beta(k + 1).sqrt();
            let b_prev = if k == 0 { 0.0 } else { beta(k).sqrt() };
            let pn = (x * p - b_prev * pm1) / b_next;
            pm1 = p;
            p = pn;
        }
        (p, sum_sq)
    };

    // Bracket the `order` roots on a fine cosine-spaced grid.
    let grid_len = 8 * order + 16;
    let grid: Vec<f64> = (0..=grid_len)
        .map(|i| -(std::f64::consts::PI * i as f64 / grid_len as f64).cos())
        .collect();
    let mut roots = Vec::with_capacity(order);
    let mut prev_x = grid[0];
    let mut prev_f = eval(prev_x).0;
    for &x in &grid[1..] {
        let f = eval(x).0;
        if prev_f == 0.0 {
            roots.push(prev_x);
        } else if prev_f * f < 0.0 {
            // Bisect, then a couple of Newton-free secant steps for polish.
            let (mut a, mut b, mut fa) = (prev_x, x, prev_f);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                let fm = eval(mid).0;
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_x = x;
        prev_f = f;
    }
    assert_eq!(roots.len(), order, "failed to bracket all Gauss nodes");

    let mut weights: Vec<f64> = roots
        .iter()
        .map(|&x| {
            let (_, sum_sq) = eval(x);
            1.0 / sum_sq
        })
        .collect();

    // Enforce exact antipodal symmetry of the 1-d rule.
    for i in 0..order / 2 {
        let j = order - 1 - i;
        let x = 0.5 * (roots[i] - roots[j]);
        roots[i] = x;
        roots[j] = -x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if order % 2 == 1 {
        roots[order / 2] = 0.0;
    }
    (roots, weights)
}

/// Gauss–Legendre rule on [-1, 1] (Gegenbauer with alpha = 0).
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_gegenbauer(order, 0.0)
}

/// Quadrature scheme tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ProductGauss,
    MonteCarlo { seed: u64 },
}

/// Antipodally symmetric node/weight set on S^{n-1}.
#[derive(Debug, Clone)]
pub struct SphericalQuadrature {
    pub dim: usize,
    pub nodes: Vec<Direction>,
    pub weights: Vec<f64>,
    pub scheme: Scheme,
    pub resolution: usize,
    /// Index of the antipodal partner of each node (a fixed-point-free
    /// involution); even integrands can be folded over representative pairs.
    pub antipode: Vec<usize>,
}

impl SphericalQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Total weight, which equals the surface area of S^{n-1} up to the
    /// scheme's accuracy (exact for Monte Carlo by construction).
    pub fn total_weight(&self) -> f64 {
        tree_sum(&self.weights)
    }
}

/// Builds a sphere quadrature for the public n >= 3 contract.
pub fn build_sphere_quadrature(
    n: usize,
    resolution: usize,
    scheme: Scheme,
) -> Result<SphericalQuadrature> {
    if n < 3 {
        return Err(BpError::UnsupportedDimension(n));
    }
    if resolution < 4 {
        return Err(BpError::Domain(format!(
            "quadrature resolution must be >= 4, got {resolution}"
        )));
    }
    Ok(build_sphere_quadrature_any(n, resolution, scheme))
}

/// Internal builder that also supports dim 2 (circles), used for subspheres.
pub(crate) fn build_sphere_quadrature_any(
    n: usize,
    resolution: usize,
    scheme: Scheme,
) -> SphericalQuadrature {
    match scheme {
        Scheme::ProductGauss => build_product(n, resolution),
        Scheme::MonteCarlo { seed } => build_monte_carlo(n, resolution, seed),
    }
}

fn build_product(n: usize, resolution: usize) -> SphericalQuadrature {
    assert!(n >= 2);
    if n == 2 {
        // Uniform rule on the circle; antipodal because the count is even.
        let count = 2 * resolution;
        let w = 2.0 * std::f64::consts::PI / count as f64;
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for j in 0..count {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
            nodes.push(Direction::new_unchecked(vec![phi.cos(), phi.sin()]));
            weights.push(w);
        }
        let antipode = (0..count).map(|j| (j + resolution) % count).collect();
        return SphericalQuadrature {
            dim: 2,
            nodes,
            weights,
            scheme: Scheme::ProductGauss,
            resolution,
            antipode,
        };
    }

    // Polar angle k (0-based) carries surface weight sin^{n-2-k} θ, i.e. the
    // 1-d weight (1-t^2)^{(n-3-k)/2} in t = cos θ.
    let polar: Vec<(Vec<f64>, Vec<f64>)> = (0..n - 2)
        .map(|k| gauss_gegenbauer(resolution, (n - 2 - k) as f64 / 2.0 - 0.5))
        .collect();
    let azimuth_count = 2 * resolution;
    let azimuth_w = 2.0 * std::f64::consts::PI / azimuth_count as f64;

    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut index = vec![0usize; n - 2];
    loop {
        let mut w = azimuth_w;
        let mut sines = 1.0;
        let mut coords_head = Vec::with_capacity(n);
        for (k, idx) in index.iter().enumerate() {
            let t = polar[k].0[*idx];
            w *= polar[k].1[*idx];
            coords_head.push(sines * t);
            sines *= (1.0 - t * t).max(0.0).sqrt();
        }
        for j in 0..azimuth_count {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / azimuth_count as f64;
            let mut coords = coords_head.clone();
            coords.push(sines * phi.cos());
            coords.push(sines * phi.sin());
            nodes.push(Direction::new_unchecked(coords));
            weights.push(w);
        }
        // odometer over polar indices
        let mut k = n - 2;
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            index[k] += 1;
            if index[k] < resolution {
                break;
            }
            index[k] = 0;
            if k == 0 {
                // The polar odometer enumerates lexicographically, so the
                // antipode (every polar digit reflected, azimuth shifted by
                // half a turn) has complementary flat polar index.
                let polar_total = nodes.len() / azimuth_count;
                let antipode = (0..nodes.len())
                    .map(|flat| {
                        let p = flat / azimuth_count;
                        let j = flat % azimuth_count;
                        (polar_total - 1 - p) * azimuth_count
                            + (j + resolution) % azimuth_count
                    })
                    .collect();
                return SphericalQuadrature {
                    dim: n,
                    nodes,
                    weights,
                    scheme: Scheme::ProductGauss,
                    resolution,
                    antipode,
                };
            }
        }
    }
}

fn build_monte_carlo(n: usize, resolution: usize, seed: u64) -> SphericalQuadrature {
    let pairs = resolution.pow(3).div_ceil(2).max(2);
    let count = 2 * pairs;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area = sphere_surface_area(n);
    let w = area / count as f64;
    let mut nodes = Vec::with_capacity(count);
    for _ in 0..pairs {
        // Gaussian-normalization sampling via Box-Muller, antipodally paired.
        let mut coords = vec![0.0f64; n];
        loop {
            for c in coords.iter_mut() {
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                *c = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            }
            let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for c in coords.iter_mut() {
                    *c /= norm;
                }
                break;
            }
        }
        let anti = coords.iter().map(|c| -c).collect::<Vec<_>>();
        nodes.push(Direction::new_unchecked(coords));
        nodes.push(Direction::new_unchecked(anti));
    }
    let weights = vec![w; count];
    let antipode = (0..count).map(|i| i ^ 1).collect();
    SphericalQuadrature {
        dim: n,
        nodes,
        weights,
        scheme: Scheme::MonteCarlo { seed },
        resolution,
        antipode,
    }
}

/// Quadrature on the great subsphere S^{n-1} ∩ ξ^⊥.
///
/// The orthonormal basis of ξ^⊥ is completed deterministically by the single
/// Householder reflection mapping e_n to ξ.
#[derive(Debug, Clone)]
pub struct SubsphereQuadrature {
    pub axis: Direction,
    /// n-1 orthonormal vectors spanning ξ^⊥ (columns).
    pub basis: Vec<Vec<f64>>,
    /// Inner rule on S^{n-2} mapped into ξ^⊥; unit vectors of R^n.
    pub nodes: Vec<Direction>,
    pub weights: Vec<f64>,
    pub resolution: usize,
}

/// Householder frame: returns the n-1 images of e_1..e_{n-1} under the
/// reflection taking e_n to xi (identity when xi is e_n itself).
pub fn householder_basis(xi: &Direction) -> Vec<Vec<f64>> {
    let n = xi.dim();
    let x = xi.coords();
    // Reflect e_n onto sign-adjusted xi for stability, then fix orientation.
    let sign = if x[n - 1] >= 0.0 { 1.0 } else { -1.0 };
    let mut u: Vec<f64> = x.iter().map(|&c| sign * c).collect();
    u[n - 1] -= 1.0;
    let unorm2: f64 = u.iter().map(|c| c * c).sum();
    let mut basis = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let mut col = vec![0.0; n];
        col[i] = 1.0;
        if unorm2 > 1e-30 {
            let proj = 2.0 * u[i] / unorm2;
            for (c, uu) in col.iter_mut().zip(u.iter()) {
                *c -= proj * uu;
            }
        }
        for c in col.iter_mut() {
            *c *= sign;
        }
        basis.push(col);
    }
    basis
}

pub fn build_subsphere_quadrature(xi: &Direction, resolution: usize) -> SubsphereQuadrature {
    let n = xi.dim();
    assert!(n >= 3);
    let basis = householder_basis(xi);
    let inner = build_sphere_quadrature_any(n - 1, resolution, Scheme::ProductGauss);
    let mut nodes = Vec::with_capacity(inner.len());
    for node in &inner.nodes {
        let mut w = vec![0.0f64; n];
        for (i, b) in basis.iter().enumerate() {
            let c = node.coords()[i];
            for (wc, bc) in w.iter_mut().zip(b.iter()) {
                *wc += c * bc;
            }
        }
        nodes.push(Direction::new_unchecked(w));
    }
    SubsphereQuadrature {
        axis: xi.clone(),
        basis,
        nodes,
        weights: inner.weights,
        resolution,
    }
}

/// Gauss–Legendre rule on a radial interval, mapped affinely from [-1, 1].
#[derive(Debug, Clone)]
pub struct RadialRule {
    pub order: usize,
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
}

impl RadialRule {
    pub fn new(order: usize) -> Self {
        let (ref_nodes, ref_weights) = gauss_legendre(order);
        RadialRule {
            order,
            ref_nodes,
            ref_weights,
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, g: F) -> Result<f64> {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut terms = Vec::with_capacity(self.order);
        for (i, (&x, &w)) in self.ref_nodes.iter().zip(&self.ref_weights).enumerate() {
            let r = mid + half * x;
            let v = g(r);
            if !v.is_finite() {
                return Err(BpError::SingularIntegrand {
                    index: i,
                    coords: vec![r],
                });
            }
            terms.push(half * w * v);
        }
        Ok(tree_sum(&terms))
    }
}

fn integrate_nodes<F: Fn(&Direction) -> f64>(
    f: F,
    nodes: &[Direction],
    weights: &[f64],
) -> Result<f64> {
    let mut terms = Vec::with_capacity(nodes.len());
    for (i, (node, &w)) in nodes.iter().zip(weights).enumerate() {
        let v = f(node);
        if !v.is_finite() {
            return Err(BpError::SingularIntegrand {
                index: i,
                coords: node.coords().to_vec(),
            });
        }
        terms.push(w * v);
    }
    Ok(tree_sum(&terms))
}

/// Integrates f over S^{n-1}.
pub fn integrate_sphere<F: Fn(&Direction) -> f64>(f: F, quad: &SphericalQuadrature) -> Result<f64> {
    integrate_nodes(f, &quad.nodes, &quad.weights)
}

/// Integrates f over the subsphere S^{n-1} ∩ ξ^⊥.
pub fn integrate_subsphere<F: Fn(&Direction) -> f64>(
    f: F,
    subquad: &SubsphereQuadrature,
) -> Result<f64> {
    integrate_nodes(f, &subquad.nodes, &subquad.weights)
}
