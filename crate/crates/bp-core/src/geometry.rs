//! Star-body representations: radial evaluation, Minkowski functionals, and
//! the ray-wise decomposition of the symmetric difference K Δ L.

use crate::error::{BpError, Result};
use crate::harmonics::gegenbauer_zonal;
use crate::quadrature::{build_subsphere_quadrature, SphericalQuadrature};
use crate::special::tree_sum;
use std::fmt;
use std::sync::Arc;

/// Unit vector in R^n, n >= 3 (n >= 2 internally for subsphere nodes).
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    coords: Vec<f64>,
}

impl Direction {
    /// Normalizes and validates a direction vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(BpError::Domain(
                "direction must be a nonzero finite vector".into(),
            ));
        }
        let coords = coords.into_iter().map(|c| c / norm).collect();
        Ok(Direction { coords })
    }

    /// Trusted constructor for coordinates already unit-normalized.
    pub(crate) fn new_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(
            (coords.iter().map(|c| c * c).sum::<f64>().sqrt() - 1.0).abs() < 1e-9,
            "non-unit direction"
        );
        Direction { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn antipode(&self) -> Direction {
        Direction {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

/// Zonal perturbation term for `perturbed_ball`:
/// eps * G_degree(<v, axis>) with G the Gegenbauer kernel normalized to
/// G(1) = 1 and `degree` even.
#[derive(Debug, Clone)]
pub struct ZonalTerm {
    pub degree: usize,
    pub eps: f64,
    pub axis: Direction,
}

/// Tabulated radial values on a structured angular grid.
///
/// Polar angles theta_1..theta_{n-2} live on uniform inclusive grids over
/// [0, pi]; the azimuth lives on a uniform periodic grid over [0, 2 pi) with
/// an even point count (so the grid is closed under the antipodal map).
/// Evaluation is multilinear interpolation; grid values are reproduced
/// exactly at the nodes.
#[derive(Debug, Clone)]
pub struct TabulatedGrid {
    pub dim: usize,
    /// Points per polar angle (each >= 2), length dim-2.
    pub polar_counts: Vec<usize>,
    /// Azimuth point count (even, >= 4).
    pub azimuth_count: usize,
    /// Row-major values, polar indices first, azimuth last.
    pub values: Vec<f64>,
}

impl TabulatedGrid {
    fn strides(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.polar_counts.clone();
        dims.push(self.azimuth_count);
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len() - 1).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        strides
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(BpError::UnsupportedDimension(self.dim));
        }
        if self.polar_counts.len() != self.dim - 2 {
            return Err(BpError::InvalidScenario(format!(
                "tabulated grid needs {} polar axes, got {}",
                self.dim - 2,
                self.polar_counts.len()
            )));
        }
        if self.polar_counts.iter().any(|&c| c < 2) {
            return Err(BpError::InvalidScenario(
                "tabulated polar axes need at least 2 points".into(),
            ));
        }
        if self.azimuth_count < 4 || self.azimuth_count % 2 != 0 {
            return Err(BpError::InvalidScenario(
                "tabulated azimuth count must be even and >= 4".into(),
            ));
        }
        let expected: usize =
            self.polar_counts.iter().product::<usize>() * self.azimuth_count;
        if self.values.len() != expected {
            return Err(BpError::InvalidScenario(format!(
                "tabulated grid expects {} values, got {}",
                expected,
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(BpError::Domain(
                "tabulated radial values must be finite and positive".into(),
            ));
        }
        // Origin symmetry: the antipodal map flips each polar index and
        // shifts the azimuth by half a turn.
        let strides = self.strides();
        let max = self.values.iter().cloned().fold(0.0, f64::max);
        let mut idx = vec![0usize; self.dim - 1];
        for (flat, &v) in self.values.iter().enumerate() {
            let mut rem = flat;
            for (k, s) in strides.iter().enumerate() {
                idx[k] = rem / s;
                rem %= s;
            }
            let mut aflat = 0usize;
            for k in 0..self.dim - 2 {
                aflat += (self.polar_counts[k] - 1 - idx[k]) * strides[k];
            }
            aflat += ((idx[self.dim - 2] + self.azimuth_count / 2) % self.azimuth_count)
                * strides[self.dim - 2];
            if (v - self.values[aflat]).abs() > 1e-8 * max {
                return Err(BpError::Domain(
                    "tabulated body is not origin-symmetric".into(),
                ));
            }
        }
        Ok(())
    }

    fn eval(&self, v: &Direction) -> f64 {
        let n = self.dim;
        let x = v.coords();
        // Recover angles.
        let mut angles = Vec::with_capacity(n - 1);
        let mut sines = 1.0f64;
        for k in 0..n - 2 {
            let t = if sines > 1e-300 {
                (x[k] / sines).clamp(-1.0, 1.0)
            } else {
                1.0
            };
            angles.push(t.acos());
            sines *= (1.0 - t * t).max(0.0).sqrt();
        }
        let phi = x[n - 1].atan2(x[n - 2]).rem_euclid(2.0 * std::f64::consts::PI);
        angles.push(phi);

        // Locate the cell and barycentric fractions per axis.
        let strides = self.strides();
        let mut base = Vec::with_capacity(n - 1);
        let mut frac = Vec::with_capacity(n - 1);
        for k in 0..n - 2 {
            let count = self.polar_counts[k];
            let step = std::f64::consts::PI / (count - 1) as f64;
            let pos = (angles[k] / step).clamp(0.0, (count - 1) as f64);
            let i = (pos.floor() as usize).min(count - 2);
            base.push(i);
            frac.push(pos - i as f64);
        }
        let step = 2.0 * std::f64::consts::PI / self.azimuth_count as f64;
        let pos = angles[n - 2] / step;
        let i = (pos.floor() as usize).min(self.azimuth_count - 1);
        base.push(i);
        frac.push(pos - i as f64);

        // Multilinear interpolation over the 2^{n-1} cell corners.
        let axes = n - 1;
        let mut acc = 0.0;
        for corner in 0..(1usize << axes) {
            let mut weight = 1.0;
            let mut flat = 0usize;
            for k in 0..axes {
                let hi = (corner >> k) & 1 == 1;
                weight *= if hi { frac[k] } else { 1.0 - frac[k] };
                let mut ik = base[k] + usize::from(hi);
                if k == axes - 1 {
                    ik %= self.azimuth_count; // periodic wrap
                }
                flat += ik * strides[k];
            }
            acc += weight * self.values[flat];
        }
        acc
    }
}

/// Radial evaluation rule behind a [`StarBody`].
#[derive(Clone)]
pub enum RadialKind {
    Ball { r: f64 },
    Ellipsoid { semiaxes: Vec<f64> },
    /// lp_ball with p in [1, inf]; p = f64::INFINITY is the cube.
    LpBall { p: f64, r: f64 },
    PerturbedBall { r: f64, terms: Vec<ZonalTerm> },
    Tabulated(TabulatedGrid),
    Scaled { factor: f64, body: Box<StarBody> },
    Derived(Arc<dyn Fn(&Direction) -> f64 + Send + Sync>),
}

impl fmt::Debug for RadialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialKind::Ball { r } => write!(f, "Ball {{ r: {r} }}"),
            RadialKind::Ellipsoid { semiaxes } => {
                write!(f, "Ellipsoid {{ semiaxes: {semiaxes:?} }}")
            }
            RadialKind::LpBall { p, r } => write!(f, "LpBall {{ p: {p}, r: {r} }}"),
            RadialKind::PerturbedBall { r, terms } => {
                write!(f, "PerturbedBall {{ r: {r}, terms: {terms:?} }}")
            }
            RadialKind::Tabulated(g) => write!(f, "Tabulated({}x..)", g.values.len()),
            RadialKind::Scaled { factor, body } => {
                write!(f, "Scaled {{ factor: {factor}, body: {body:?} }}")
            }
            RadialKind::Derived(_) => write!(f, "Derived(..)"),
        }
    }
}

/// Origin-symmetric star body given by a strictly positive even radial
/// function on S^{n-1}.
#[derive(Debug, Clone)]
pub struct StarBody {
    dim: usize,
    kind: RadialKind,
}

impl StarBody {
    pub fn ball(dim: usize, r: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(BpError::Domain(format!("ball radius must be positive, got {r}")));
        }
        Ok(StarBody {
            dim,
            kind: RadialKind::Ball { r },
        })
    }

    pub fn ellipsoid(semiaxes: Vec<f64>) -> Result<Self> {
        check_dim(semiaxes.len())?;
        if semiaxes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(BpError::Domain("ellipsoid semiaxes must be positive".into()));
        }
        Ok(StarBody {
            dim: semiaxes.len(),
            kind: RadialKind::Ellipsoid { semiaxes },
        })
    }

    pub fn lp_ball(dim: usize, p: f64, r: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(p >= 1.0) {
            return Err(BpError::Domain(format!("lp_ball needs p >= 1, got {p}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(BpError::Domain(format!("lp_ball radius must be positive, got {r}")));
        }
        Ok(StarBody {
            dim,
            kind: RadialKind::LpBall { p, r },
        })
    }

    /// rho(v) = r * (1 + sum_j eps_j G_{m_j}(<v, u_j>)), even degrees only.
    /// Positivity is validated by a grid scan at construction.
    pub fn perturbed_ball(dim: usize, r: f64, terms: Vec<ZonalTerm>) -> Result<Self> {
        check_dim(dim)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(BpError::Domain(format!(
                "perturbed_ball radius must be positive, got {r}"
            )));
        }
        for t in &terms {
            if t.degree % 2 != 0 {
                return Err(BpError::Domain(format!(
                    "perturbed_ball degrees must be even, got {}",
                    t.degree
                )));
            }
            if t.axis.dim() != dim {
                return Err(BpError::DimensionMismatch {
                    expected: dim,
                    got: t.axis.dim(),
                });
            }
        }
        let body = StarBody {
            dim,
            kind: RadialKind::PerturbedBall { r, terms },
        };
        // Positivity scan on a moderately fine product grid.
        let res = match dim {
            3 => 64,
            4 => 32,
            _ => 12,
        };
        let scan = crate::quadrature::build_sphere_quadrature_any(
            dim,
            res,
            crate::quadrature::Scheme::ProductGauss,
        );
        for node in &scan.nodes {
            if body.eval_radial(node) <= 0.0 {
                return Err(BpError::Domain(
                    "perturbed_ball radial function is not strictly positive".into(),
                ));
            }
        }
        Ok(body)
    }

    pub fn tabulated(grid: TabulatedGrid) -> Result<Self> {
        grid.validate()?;
        Ok(StarBody {
            dim: grid.dim,
            kind: RadialKind::Tabulated(grid),
        })
    }

    pub fn from_fn(
        dim: usize,
        f: Arc<dyn Fn(&Direction) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        check_dim(dim)?;
        Ok(StarBody {
            dim,
            kind: RadialKind::Derived(f),
        })
    }

    /// Dilate by a positive factor.
    pub fn scaled(&self, factor: f64) -> Result<StarBody> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(BpError::Domain(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Ok(StarBody {
            dim: self.dim,
            kind: RadialKind::Scaled {
                factor,
                body: Box::new(self.clone()),
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &RadialKind {
        &self.kind
    }

    pub fn preset_tag(&self) -> &'static str {
        match &self.kind {
            RadialKind::Ball { .. } => "ball",
            RadialKind::Ellipsoid { .. } => "ellipsoid",
            RadialKind::LpBall { .. } => "lp_ball",
            RadialKind::PerturbedBall { .. } => "perturbed_ball",
            RadialKind::Tabulated(_) => "tabulated",
            RadialKind::Scaled { .. } => "derived",
            RadialKind::Derived(_) => "derived",
        }
    }

    fn eval_radial(&self, v: &Direction) -> f64 {
        match &self.kind {
            RadialKind::Ball { r } => *r,
            RadialKind::Ellipsoid { semiaxes } => {
                let s: f64 = v
                    .coords()
                    .iter()
                    .zip(semiaxes)
                    .map(|(c, a)| (c / a) * (c / a))
                    .sum();
                1.0 / s.sqrt()
            }
            RadialKind::LpBall { p, r } => {
                if p.is_infinite() {
                    let m = v.coords().iter().fold(0.0f64, |m, c| m.max(c.abs()));
                    r / m
                } else {
                    let s: f64 = v.coords().iter().map(|c| c.abs().powf(*p)).sum();
                    r / s.powf(1.0 / p)
                }
            }
            RadialKind::PerturbedBall { r, terms } => {
                let mut factor = 1.0;
                for t in terms {
                    factor += t.eps * gegenbauer_zonal_clamped(self.dim, t.degree, v.dot(&t.axis));
                }
                r * factor
            }
            RadialKind::Tabulated(grid) => grid.eval(v),
            RadialKind::Scaled { factor, body } => factor * body.eval_radial(v),
            RadialKind::Derived(f) => f(v),
        }
    }
}

fn gegenbauer_zonal_clamped(n: usize, m: usize, t: f64) -> f64 {
    gegenbauer_zonal(n, m, t.clamp(-1.0, 1.0)).expect("clamped argument is in range")
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 3 {
        Err(BpError::UnsupportedDimension(dim))
    } else {
        Ok(())
    }
}

/// Radial function rho_body(v).
pub fn radial_eval(body: &StarBody, v: &Direction) -> Result<f64> {
    if v.dim() != body.dim() {
        return Err(BpError::DimensionMismatch {
            expected: body.dim(),
            got: v.dim(),
        });
    }
    Ok(body.eval_radial(v))
}

/// Minkowski functional ||x||_K = |x| / rho_K(x/|x|).
pub fn minkowski_functional(body: &StarBody, x: &[f64]) -> Result<f64> {
    if x.len() != body.dim() {
        return Err(BpError::DimensionMismatch {
            expected: body.dim(),
            got: x.len(),
        });
    }
    let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(BpError::Domain(
            "Minkowski functional is undefined at the origin".into(),
        ));
    }
    let dir = Direction::new(x.to_vec())?;
    Ok(norm / body.eval_radial(&dir))
}

/// Region tag of a [`RaySegment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionTag {
    KMinusL,
    LMinusK,
}

/// One ray of the symmetric difference K Δ L:
/// the interval [lo, hi] = [min(rho_K, rho_L), max(rho_K, rho_L)] along v.
#[derive(Debug, Clone)]
pub struct RaySegment {
    pub direction: Direction,
    pub lo: f64,
    pub hi: f64,
    pub tag: RegionTag,
}

/// Ray-wise decomposition of K Δ L; `None` when the radial values agree
/// within the degeneracy tolerance 1e-12 * max(rho_K, rho_L).
pub fn symmetric_difference_ray(
    k: &StarBody,
    l: &StarBody,
    v: &Direction,
) -> Result<Option<RaySegment>> {
    if k.dim() != l.dim() {
        return Err(BpError::DimensionMismatch {
            expected: k.dim(),
            got: l.dim(),
        });
    }
    let rk = radial_eval(k, v)?;
    let rl = radial_eval(l, v)?;
    let tol = 1e-12 * rk.max(rl);
    if (rk - rl).abs() <= tol {
        return Ok(None);
    }
    let (lo, hi, tag) = if rk > rl {
        (rl, rk, RegionTag::KMinusL)
    } else {
        (rk, rl, RegionTag::LMinusK)
    };
    Ok(Some(RaySegment {
        direction: v.clone(),
        lo,
        hi,
        tag,
    }))
}

/// Example-3.1-style derived body: K with
/// rho_K(v)^{-1} = integral over M ∩ v^⊥ of |x|^2, i.e.
/// rho_K(v) = ( (1/(n+1)) * R(rho_M^{n+1})(v) )^{-1}.
///
/// The subsphere resolution is taken from `quad`; the constructor verifies
/// the resolution against a doubled rule at probe directions and fails with
/// an accuracy error when the relative difference exceeds 1e-6.
pub fn derived_section_body(m: &StarBody, quad: &SphericalQuadrature) -> Result<StarBody> {
    if m.dim() != quad.dim {
        return Err(BpError::DimensionMismatch {
            expected: m.dim(),
            got: quad.dim,
        });
    }
    let n = m.dim();
    let resolution = quad.resolution;
    let power = (n + 1) as i32;
    let section_moment = move |body: &StarBody, v: &Direction, res: usize| -> Result<f64> {
        let sub = build_subsphere_quadrature(v, res);
        let mut terms = Vec::with_capacity(sub.nodes.len());
        for (w, &wt) in sub.nodes.iter().zip(&sub.weights) {
            terms.push(wt * radial_eval(body, w)?.powi(power));
        }
        Ok(tree_sum(&terms) / (n + 1) as f64)
    };

    // Accuracy check: coarse vs doubled rule at probe directions.
    let mut probes = Vec::new();
    for i in 0..n {
        let mut c = vec![0.0; n];
        c[i] = 1.0;
        probes.push(Direction::new(c)?);
    }
    probes.push(Direction::new(vec![1.0; n])?);
    for v in &probes {
        let coarse = section_moment(m, v, resolution)?;
        let fine = section_moment(m, v, 2 * resolution)?;
        if ((coarse - fine) / fine).abs() > 1e-6 {
            return Err(BpError::Accuracy(format!(
                "subsphere resolution {resolution} too coarse for derived body \
                 (relative change {:.2e} on refinement)",
                ((coarse - fine) / fine).abs()
            )));
        }
    }

    let m_clone = m.clone();
    StarBody::from_fn(
        n,
        Arc::new(move |v: &Direction| {
            let val = section_moment(&m_clone, v, resolution)
                .expect("derived body evaluation failed");
            1.0 / val
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_sphere_quadrature, Scheme};
    use std::f64::consts::PI;

    fn dir(v: &[f64]) -> Direction {
        Direction::new(v.to_vec()).unwrap()
    }

    #[test]
    fn radial_eval_presets() {
        let b = StarBody::ball(3, 2.0).unwrap();
        assert_eq!(radial_eval(&b, &dir(&[0.3, -0.8, 0.1])).unwrap(), 2.0);

        let cube = StarBody::lp_ball(3, f64::INFINITY, 1.0).unwrap();
        assert!((radial_eval(&cube, &dir(&[1.0, 0.0, 0.0])).unwrap() - 1.0).abs() < 1e-15);
        let v = dir(&[1.0, 1.0, 0.0]);
        assert!((radial_eval(&cube, &v).unwrap() - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn minkowski_functional_examples() {
        let b = StarBody::ball(3, 2.0).unwrap();
        assert!((minkowski_functional(&b, &[2.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((minkowski_functional(&b, &[4.0, 0.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        let cube = StarBody::lp_ball(3, f64::INFINITY, 1.0).unwrap();
        assert!((minkowski_functional(&cube, &[0.5, 0.5, 0.5]).unwrap() - 0.5).abs() < 1e-12);
        assert!(minkowski_functional(&b, &[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn symmetric_difference_ray_cases() {
        let k = StarBody::ball(3, 2.0).unwrap();
        let l = StarBody::ball(3, 1.0).unwrap();
        let v = dir(&[0.0, 1.0, 0.0]);
        let seg = symmetric_difference_ray(&k, &l, &v).unwrap().unwrap();
        assert_eq!(seg.tag, RegionTag::KMinusL);
        assert_eq!((seg.lo, seg.hi), (1.0, 2.0));
        let seg = symmetric_difference_ray(&l, &k, &v).unwrap().unwrap();
        assert_eq!(seg.tag, RegionTag::LMinusK);
        assert!(symmetric_difference_ray(&l, &l, &v).unwrap().is_none());
    }

    #[test]
    fn evenness_of_presets() {
        let bodies = [
            StarBody::ellipsoid(vec![1.0, 0.7, 1.4]).unwrap(),
            StarBody::lp_ball(3, 4.0, 1.2).unwrap(),
            StarBody::perturbed_ball(
                3,
                1.0,
                vec![ZonalTerm {
                    degree: 2,
                    eps: 0.2,
                    axis: dir(&[0.0, 0.0, 1.0]),
                }],
            )
            .unwrap(),
        ];
        let mut state = 1u64;
        for _ in 0..1000 {
            let mut c = [0.0f64; 3];
            for x in c.iter_mut() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *x = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            }
            if c.iter().all(|x| x.abs() < 1e-6) {
                continue;
            }
            let v = dir(&c);
            for b in &bodies {
                let a = radial_eval(b, &v).unwrap();
                let bb = radial_eval(b, &v.antipode()).unwrap();
                assert_eq!(a, bb);
            }
        }
    }

    #[test]
    fn minkowski_homogeneity_and_consistency() {
        let body = StarBody::ellipsoid(vec![1.0, 0.8, 1.3]).unwrap();
        let x = [0.4, -1.1, 0.6];
        let base = minkowski_functional(&body, &x).unwrap();
        for t in [0.1, 0.5, 2.0, 10.0] {
            let xs: Vec<f64> = x.iter().map(|c| c * t).collect();
            let v = minkowski_functional(&body, &xs).unwrap();
            assert!(((v - t * base) / (t * base)).abs() < 1e-12);
        }
        // boundary point has functional 1
        let v = dir(&[0.4, -1.1, 0.6]);
        let rho = radial_eval(&body, &v).unwrap();
        let bx: Vec<f64> = v.coords().iter().map(|c| c * rho).collect();
        assert!((minkowski_functional(&body, &bx).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn perturbed_ball_positivity_guard() {
        let bad = StarBody::perturbed_ball(
            3,
            1.0,
            vec![ZonalTerm {
                degree: 2,
                eps: 3.0,
                axis: dir(&[0.0, 0.0, 1.0]),
            }],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn tabulated_reproduces_grid_and_checks_symmetry() {
        // constant grid on S^2
        let grid = TabulatedGrid {
            dim: 3,
            polar_counts: vec![5],
            azimuth_count: 8,
            values: vec![1.5; 40],
        };
        let b = StarBody::tabulated(grid).unwrap();
        assert!((radial_eval(&b, &dir(&[0.3, 0.5, -0.8])).unwrap() - 1.5).abs() < 1e-12);

        let mut values = vec![1.0; 40];
        values[3] = 2.0; // breaks evenness
        let bad = StarBody::tabulated(TabulatedGrid {
            dim: 3,
            polar_counts: vec![5],
            azimuth_count: 8,
            values,
        });
        assert!(bad.is_err());
    }

    #[test]
    fn derived_body_ball_closed_form() {
        // M = ball(1), n = 3: rho_K = ((1/4) * 2 pi)^{-1} = 2/pi
        let m = StarBody::ball(3, 1.0).unwrap();
        let quad = build_sphere_quadrature(3, 16, Scheme::ProductGauss).unwrap();
        let k = derived_section_body(&m, &quad).unwrap();
        let v = dir(&[0.2, 0.9, -0.4]);
        assert!((radial_eval(&k, &v).unwrap() - 2.0 / PI).abs() < 1e-10);
        // homogeneity: M = ball(R) gives 2/(pi R^4)
        let m = StarBody::ball(3, 1.5).unwrap();
        let k = derived_section_body(&m, &quad).unwrap();
        let expect = 2.0 / (PI * 1.5f64.powi(4));
        assert!(((radial_eval(&k, &v).unwrap() - expect) / expect).abs() < 1e-10);
    }
}
