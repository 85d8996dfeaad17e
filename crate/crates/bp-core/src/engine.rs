//! The verification pipeline: radial-power densities, the ray function h
//! and its monotone decomposition, the positive-definiteness object F, the
//! section hypothesis and volume conclusion, and report assembly.

use crate::error::{BpError, Result};
use crate::geometry::{
    minkowski_functional, radial_eval, symmetric_difference_ray, Direction, RegionTag, StarBody,
};
use crate::quadrature::{
    build_sphere_quadrature, build_subsphere_quadrature, RadialRule, Scheme, SphericalQuadrature,
};
use crate::special::tree_sum;
use crate::transforms::{pd_test, PdReport, PdSettings, PdVerdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::Arc;

/// One radial power term c * |x|^alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityTerm {
    pub coef: f64,
    pub exp: f64,
}

/// Nonnegative combination of radial powers: f(x) = sum c_i |x|^{alpha_i}.
/// Even and nonnegative by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    terms: Vec<DensityTerm>,
}

impl Density {
    pub fn new(terms: Vec<DensityTerm>) -> Result<Self> {
        for t in &terms {
            if !(t.coef >= 0.0 && t.coef.is_finite()) {
                return Err(BpError::InvalidScenario(format!(
                    "density coefficients must be finite and nonnegative, got {}",
                    t.coef
                )));
            }
            if !t.exp.is_finite() {
                return Err(BpError::InvalidScenario(format!(
                    "density exponent must be finite, got {}",
                    t.exp
                )));
            }
        }
        Ok(Density { terms })
    }

    pub fn constant(c: f64) -> Self {
        Density::new(vec![DensityTerm { coef: c, exp: 0.0 }]).expect("constant density")
    }

    pub fn power(coef: f64, exp: f64) -> Self {
        Density::new(vec![DensityTerm { coef, exp }]).expect("power density")
    }

    pub fn terms(&self) -> &[DensityTerm] {
        &self.terms
    }

    /// Radial evaluation at r = |x| > 0.
    pub fn eval_r(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| t.coef * r.powf(t.exp)).sum()
    }

    /// True iff all exponents are >= 0, so the density extends continuously
    /// to the origin.
    pub fn is_continuous(&self) -> bool {
        self.terms.iter().all(|t| t.exp >= 0.0 || t.coef == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef == 0.0)
    }

    pub fn min_exp(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.coef > 0.0)
            .map(|t| t.exp)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Density::new(
            self.terms
                .iter()
                .map(|t| DensityTerm {
                    coef: c * t.coef,
                    exp: t.exp,
                })
                .collect(),
        )
    }
}

/// The four densities of a scenario.
#[derive(Debug, Clone)]
pub struct DensitySet {
    /// mu_n density f_n.
    pub f_n: Density,
    /// mu_{n-1} density f_{n-1}.
    pub f_nm1: Density,
    /// nu_n density g_n.
    pub g_n: Density,
    /// nu_{n-1} density g_{n-1}.
    pub g_nm1: Density,
}

/// Radial profile for one half of the monotone decomposition.
#[derive(Clone)]
pub enum RadialProfile {
    PowerSum(Density),
    /// Arbitrary radial function, used by tests and the implicit h-based
    /// decompositions of the single-measure mode.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            RadialProfile::PowerSum(d) => d.eval_r(r),
            RadialProfile::Custom(f) => f(r),
        }
    }

    pub fn zero() -> Self {
        RadialProfile::PowerSum(Density::constant(0.0))
    }
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RadialProfile::PowerSum(d) => write!(f, "PowerSum({d:?})"),
            RadialProfile::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Claimed decomposition h = a + b with a radially non-decreasing and b
/// radially non-increasing; validated numerically, never searched for.
#[derive(Debug, Clone)]
pub struct MonotonePair {
    pub a: RadialProfile,
    pub b: RadialProfile,
}

/// Theorem mode. `Main` verifies the two-measure statement with an explicit
/// decomposition. The single-measure modes derive the decomposition from h
/// itself: `ZvavitchA` takes a = h (requires h radially non-decreasing) and
/// builds the PD object on the K side; `ZvavitchB` takes b = h (requires h
/// radially non-increasing) and builds it on the L side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Main,
    ZvavitchA,
    ZvavitchB,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Main => "main",
            Mode::ZvavitchA => "zvavitch_a",
            Mode::ZvavitchB => "zvavitch_b",
        }
    }
}

/// Fully resolved verification scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub n: usize,
    pub mode: Mode,
    pub k: StarBody,
    pub l: StarBody,
    pub densities: DensitySet,
    /// Explicit decomposition; required in `Main` mode, ignored otherwise.
    pub pair: Option<MonotonePair>,
    pub scheme: Scheme,
    pub resolution: usize,
    pub radial_order: usize,
    pub truncation_degree: usize,
    pub pd: PdSettings,
    /// Relative tolerance for the section-hypothesis margins.
    pub tol_hyp: f64,
    /// Relative tolerance for the volume conclusion.
    pub tol_conc: f64,
    /// Resolution of the hyperplane-normal grid the hypothesis is sampled on.
    pub hypothesis_resolution: usize,
    pub seed: u64,
}

/// One reported violation of the decomposition contract.
#[derive(Debug, Clone)]
pub struct DecompositionViolation {
    pub kind: &'static str,
    pub direction: Vec<f64>,
    pub r: f64,
    pub magnitude: f64,
}

impl std::fmt::Display for DecompositionViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} at r={:.6} along {:?} (magnitude {:.3e})",
            self.kind, self.r, self.direction, self.magnitude
        )
    }
}

/// Result of [`check_decomposition`]: violations are data, not errors.
#[derive(Debug, Clone)]
pub struct DecompositionCheck {
    pub ok: bool,
    pub violations: Vec<DecompositionViolation>,
    pub rays_checked: usize,
}

/// Full pipeline output.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    /// Sampled hyperplane normals, one per margin.
    pub hypothesis_xis: Vec<Vec<f64>>,
    /// mu_{n-1}((K\L) ∩ xi^⊥) − nu_{n-1}((L\K) ∩ xi^⊥) per normal.
    pub hypothesis_margins: Vec<f64>,
    pub min_margin: f64,
    pub hypothesis_ok: bool,
    pub decomposition_ok: bool,
    pub decomposition_violations: Vec<String>,
    pub endpoint_bound_ok: bool,
    pub pd_report: PdReport,
    /// nu_n(L\K).
    pub conclusion_lhs: f64,
    /// mu_n(K\L).
    pub conclusion_rhs: f64,
    pub conclusion_ok: bool,
    pub vacuous: bool,
    pub verdict: String,
}

const VERDICT_VERIFIED: &str = "theorem instance verified";
const VERDICT_VACUOUS: &str = "vacuous";
const VERDICT_HYPOTHESIS: &str = "hypothesis not satisfied";
const VERDICT_PD_INCONCLUSIVE: &str = "positive definiteness inconclusive";
const VERDICT_NOT_PD: &str = "not positive definite";
const VERDICT_DECOMPOSITION: &str = "decomposition invalid";
const VERDICT_VIOLATED: &str = "implication violated (investigate)";

/// Sectional measure of one region of K Δ L in the hyperplane xi^⊥:
/// ∫_{S∩xi^⊥} ∫_{segment} r^{n-2} density(r) dr dv.
pub fn section_measure(
    region: RegionTag,
    density: &Density,
    xi: &Direction,
    k: &StarBody,
    l: &StarBody,
    sub_resolution: usize,
    radial_rule: &RadialRule,
) -> Result<f64> {
    let n = k.dim();
    let sub = build_subsphere_quadrature(xi, sub_resolution);
    let power = (n - 2) as i32;
    let mut terms = Vec::with_capacity(sub.nodes.len());
    for (w, &wt) in sub.nodes.iter().zip(&sub.weights) {
        let Some(seg) = symmetric_difference_ray(k, l, w)? else {
            continue;
        };
        if seg.tag != region {
            continue;
        }
        let inner = radial_rule.integrate(seg.lo, seg.hi, |r| r.powi(power) * density.eval_r(r))?;
        terms.push(wt * inner);
    }
    Ok(tree_sum(&terms))
}

/// Full-space measure of one region of K Δ L:
/// ∫_{S^{n-1}} ∫_{segment} r^{n-1} density(r) dr dv.
pub fn region_measure(
    region: RegionTag,
    density: &Density,
    k: &StarBody,
    l: &StarBody,
    quad: &SphericalQuadrature,
    radial_rule: &RadialRule,
) -> Result<f64> {
    let n = k.dim();
    let power = (n - 1) as i32;
    let mut terms = Vec::with_capacity(quad.len());
    for (w, &wt) in quad.nodes.iter().zip(&quad.weights) {
        let Some(seg) = symmetric_difference_ray(k, l, w)? else {
            continue;
        };
        if seg.tag != region {
            continue;
        }
        let inner = radial_rule.integrate(seg.lo, seg.hi, |r| r.powi(power) * density.eval_r(r))?;
        terms.push(wt * inner);
    }
    Ok(tree_sum(&terms))
}

/// The ray function h(x) = (1/|x|) * f_{n-1}/f_n on K\L, (1/|x|) *
/// g_{n-1}/g_n on L\K; undefined elsewhere.
pub fn h_eval(x: &[f64], k: &StarBody, l: &StarBody, densities: &DensitySet) -> Result<f64> {
    let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(BpError::Domain("h is undefined at the origin".into()));
    }
    let in_k = minkowski_functional(k, x)? <= 1.0 + 1e-12;
    let in_l = minkowski_functional(l, x)? <= 1.0 + 1e-12;
    let (num, den, den_name) = match (in_k, in_l) {
        (true, false) => (&densities.f_nm1, &densities.f_n, "f_n"),
        (false, true) => (&densities.g_nm1, &densities.g_n, "g_n"),
        _ => {
            return Err(BpError::Domain(format!(
                "point {x:?} lies outside the symmetric difference"
            )));
        }
    };
    h_ratio(norm, num, den, den_name)
}

fn h_ratio(r: f64, num: &Density, den: &Density, den_name: &'static str) -> Result<f64> {
    let d = den.eval_r(r);
    if d.abs() < 1e-300 || !d.is_finite() {
        return Err(BpError::ZeroDenominator(den_name.to_string()));
    }
    Ok(num.eval_r(r) / (r * d))
}

/// h along a ray whose region tag is already known.
fn h_on_segment(r: f64, tag: RegionTag, densities: &DensitySet) -> Result<f64> {
    match tag {
        RegionTag::KMinusL => h_ratio(r, &densities.f_nm1, &densities.f_n, "f_n"),
        RegionTag::LMinusK => h_ratio(r, &densities.g_nm1, &densities.g_n, "g_n"),
    }
}

const MAX_REPORTED_VIOLATIONS: usize = 32;

/// Samples rays and radii of K Δ L and checks the decomposition contract:
/// a non-decreasing, b non-increasing, both nonnegative, and a + b = h.
pub fn check_decomposition(
    pair: &MonotonePair,
    k: &StarBody,
    l: &StarBody,
    densities: &DensitySet,
    rays: &[Direction],
    r_samples: usize,
) -> Result<DecompositionCheck> {
    let r_samples = r_samples.max(2);
    let mut violations = Vec::new();
    let mut rays_checked = 0usize;
    for v in rays {
        let Some(seg) = symmetric_difference_ray(k, l, v)? else {
            continue;
        };
        rays_checked += 1;
        let mut prev_a = f64::NEG_INFINITY;
        let mut prev_b = f64::INFINITY;
        let mut max_abs = 0.0f64;
        let mut samples = Vec::with_capacity(r_samples);
        for i in 0..r_samples {
            let r = seg.lo + (seg.hi - seg.lo) * i as f64 / (r_samples - 1) as f64;
            let a = pair.a.eval(r);
            let b = pair.b.eval(r);
            max_abs = max_abs.max(a.abs()).max(b.abs());
            samples.push((r, a, b));
        }
        let slack = 1e-10 * max_abs.max(1e-300);
        let push = |kind: &'static str, r: f64, magnitude: f64, violations: &mut Vec<_>| {
            if violations.len() < MAX_REPORTED_VIOLATIONS {
                violations.push(DecompositionViolation {
                    kind,
                    direction: v.coords().to_vec(),
                    r,
                    magnitude,
                });
            }
        };
        for &(r, a, b) in &samples {
            if a < -slack {
                push("a negative", r, -a, &mut violations);
            }
            if b < -slack {
                push("b negative", r, -b, &mut violations);
            }
            if a < prev_a - slack {
                push("a not non-decreasing", r, prev_a - a, &mut violations);
            }
            if b > prev_b + slack {
                push("b not non-increasing", r, b - prev_b, &mut violations);
            }
            prev_a = prev_a.max(a);
            prev_b = prev_b.min(b);
            let h = h_on_segment(r, seg.tag, densities)?;
            let defect = (a + b - h).abs();
            if defect > 1e-10 * h.abs().max(max_abs).max(1e-300) {
                push("a + b != h", r, defect, &mut violations);
            }
        }
    }
    Ok(DecompositionCheck {
        ok: violations.is_empty(),
        violations,
        rays_checked,
    })
}

/// Restriction to the sphere of the PD object: G(v) = (a(rho_K(v) v) +
/// b(rho_L(v) v))^{-1}, so F = E_{-1} G. Validated for positivity at the
/// probe directions.
pub fn f_on_sphere(
    pair: &MonotonePair,
    k: &StarBody,
    l: &StarBody,
    probes: &[Direction],
) -> Result<impl Fn(&Direction) -> f64 + Sync + use<>> {
    for v in probes {
        let denom = pair.a.eval(radial_eval(k, v)?) + pair.b.eval(radial_eval(l, v)?);
        if !(denom > 1e-300) || !denom.is_finite() {
            return Err(BpError::Degenerate(format!(
                "a(rho_K v) + b(rho_L v) = {denom} at v = {:?}",
                v.coords()
            )));
        }
    }
    let pair = pair.clone();
    let k = k.clone();
    let l = l.clone();
    Ok(move |v: &Direction| {
        let rk = radial_eval(&k, v).expect("radial evaluation");
        let rl = radial_eval(&l, v).expect("radial evaluation");
        1.0 / (pair.a.eval(rk) + pair.b.eval(rl))
    })
}

/// Section-hypothesis margins mu_{n-1}((K\L) ∩ xi^⊥) − nu_{n-1}((L\K) ∩
/// xi^⊥) over a normal set, with the common scale of the two sides.
pub fn verify_hypothesis(
    scenario: &Scenario,
    xis: &[Direction],
    radial_rule: &RadialRule,
) -> Result<(Vec<f64>, f64)> {
    let sub_res = scenario.resolution;
    let results: Vec<Result<(f64, f64)>> = xis
        .par_iter()
        .map(|xi| {
            let mu = section_measure(
                RegionTag::KMinusL,
                &scenario.densities.f_nm1,
                xi,
                &scenario.k,
                &scenario.l,
                sub_res,
                radial_rule,
            )?;
            let nu = section_measure(
                RegionTag::LMinusK,
                &scenario.densities.g_nm1,
                xi,
                &scenario.k,
                &scenario.l,
                sub_res,
                radial_rule,
            )?;
            Ok((mu - nu, mu.max(nu)))
        })
        .collect();
    let mut margins = Vec::with_capacity(xis.len());
    let mut scale = 0.0f64;
    for r in results {
        let (m, s) = r?;
        margins.push(m);
        scale = scale.max(s);
    }
    Ok((margins, scale))
}

/// Conclusion quantities (nu_n(L\K), mu_n(K\L)) and the comparison verdict.
pub fn verify_conclusion(
    scenario: &Scenario,
    quad: &SphericalQuadrature,
    radial_rule: &RadialRule,
) -> Result<(f64, f64, bool)> {
    let lhs = region_measure(
        RegionTag::LMinusK,
        &scenario.densities.g_n,
        &scenario.k,
        &scenario.l,
        quad,
        radial_rule,
    )?;
    let rhs = region_measure(
        RegionTag::KMinusL,
        &scenario.densities.f_n,
        &scenario.k,
        &scenario.l,
        quad,
        radial_rule,
    )?;
    let ok = lhs <= rhs + scenario.tol_conc * lhs.max(rhs).max(1e-300);
    Ok((lhs, rhs, ok))
}

/// Q(v) = ∫_{rho_L(v)}^{rho_K(v)} q(r v) dr with q the split function (f on
/// K\L, g on L\K, 0 elsewhere); signed, negative when rho_L > rho_K.
pub fn q_profile(
    k: &StarBody,
    l: &StarBody,
    f: &Density,
    g: &Density,
    v_samples: &[Direction],
    radial_rule: &RadialRule,
) -> Result<Vec<f64>> {
    if !f.is_continuous() || !g.is_continuous() {
        return Err(BpError::Continuity(
            "q_profile requires continuous densities (all exponents >= 0)".into(),
        ));
    }
    let mut out = Vec::with_capacity(v_samples.len());
    for v in v_samples {
        let rk = radial_eval(k, v)?;
        let rl = radial_eval(l, v)?;
        let q = if rk >= rl {
            radial_rule.integrate(rl, rk, |r| f.eval_r(r))?
        } else {
            -radial_rule.integrate(rk, rl, |r| g.eval_r(r))?
        };
        out.push(q);
    }
    Ok(out)
}

/// The proof's endpoint bound, asserted on random (v, r) samples: on K\L
/// rays a(rv)+b(rv) <= a(rho_K v)+b(rho_L v); on L\K rays the reverse.
pub fn endpoint_bound_check(
    pair: &MonotonePair,
    k: &StarBody,
    l: &StarBody,
    samples: usize,
    seed: u64,
) -> Result<Vec<String>> {
    let n = k.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for _ in 0..samples {
        let mut coords = vec![0.0f64; n];
        loop {
            for c in coords.iter_mut() {
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                *c = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            }
            if coords.iter().map(|c| c * c).sum::<f64>() > 1e-16 {
                break;
            }
        }
        let v = Direction::new(coords)?;
        let Some(seg) = symmetric_difference_ray(k, l, &v)? else {
            continue;
        };
        let r = rng.gen_range(seg.lo..=seg.hi);
        let lhs = pair.a.eval(r) + pair.b.eval(r);
        let rk = radial_eval(k, &v)?;
        let rl = radial_eval(l, &v)?;
        let rhs = pair.a.eval(rk) + pair.b.eval(rl);
        let slack = 1e-9 * lhs.abs().max(rhs.abs()).max(1e-300);
        let bad = match seg.tag {
            RegionTag::KMinusL => lhs > rhs + slack,
            RegionTag::LMinusK => lhs < rhs - slack,
        };
        if bad && violations.len() < MAX_REPORTED_VIOLATIONS {
            violations.push(format!(
                "endpoint bound fails at r={r:.6} along {:?}: {lhs:.6e} vs {rhs:.6e} ({:?})",
                v.coords(),
                seg.tag
            ));
        }
    }
    Ok(violations)
}

fn densities_equal(a: &Density, b: &Density) -> bool {
    a.terms() == b.terms()
}

fn validate_scenario(s: &Scenario) -> Result<()> {
    if s.n < 3 {
        return Err(BpError::UnsupportedDimension(s.n));
    }
    if s.k.dim() != s.n || s.l.dim() != s.n {
        return Err(BpError::DimensionMismatch {
            expected: s.n,
            got: if s.k.dim() != s.n { s.k.dim() } else { s.l.dim() },
        });
    }
    if s.densities.f_n.is_zero() || s.densities.g_n.is_zero() {
        return Err(BpError::InvalidScenario(
            "f_n and g_n must be nonzero (they appear as denominators of h)".into(),
        ));
    }
    if !s.densities.f_nm1.is_continuous() || !s.densities.g_nm1.is_continuous() {
        return Err(BpError::Continuity(
            "f_{n-1} and g_{n-1} must be continuous (all exponents >= 0)".into(),
        ));
    }
    match s.mode {
        Mode::Main => {
            if s.pair.is_none() {
                return Err(BpError::InvalidScenario(
                    "main mode requires an explicit decomposition (a, b)".into(),
                ));
            }
        }
        Mode::ZvavitchA | Mode::ZvavitchB => {
            if !densities_equal(&s.densities.f_n, &s.densities.g_n)
                || !densities_equal(&s.densities.f_nm1, &s.densities.g_nm1)
            {
                return Err(BpError::InvalidScenario(
                    "single-measure mode requires f_n = g_n and f_{n-1} = g_{n-1}".into(),
                ));
            }
        }
    }
    Ok(())
}

/// The decomposition actually used by the pipeline: the explicit pair in
/// `Main` mode, or (h, 0) / (0, h) in the single-measure modes.
pub fn effective_pair(s: &Scenario) -> Result<MonotonePair> {
    match s.mode {
        Mode::Main => Ok(s.pair.clone().expect("validated")),
        Mode::ZvavitchA | Mode::ZvavitchB => {
            let num = s.densities.f_nm1.clone();
            let den = s.densities.f_n.clone();
            let h = RadialProfile::Custom(Arc::new(move |r: f64| {
                num.eval_r(r) / (r * den.eval_r(r))
            }));
            Ok(match s.mode {
                Mode::ZvavitchA => MonotonePair {
                    a: h,
                    b: RadialProfile::zero(),
                },
                _ => MonotonePair {
                    a: RadialProfile::zero(),
                    b: h,
                },
            })
        }
    }
}

/// Representative half of an antipodally symmetric node set, used for the
/// hypothesis-normal grid and decomposition rays.
/// One direction per antipodal node pair of the quadrature, in node order.
pub fn representative_directions(quad: &SphericalQuadrature) -> Vec<Direction> {
    quad.antipode
        .iter()
        .enumerate()
        .filter(|&(i, &j)| i < j)
        .map(|(i, _)| quad.nodes[i].clone())
        .collect()
}

/// Runs the full pipeline and assembles the report. Any sub-operation
/// failure aborts with a diagnostic naming the stage.
pub fn run_scenario(s: &Scenario) -> Result<VerificationReport> {
    validate_scenario(s).map_err(|e| e.in_stage("validation"))?;
    let quad = build_sphere_quadrature(s.n, s.resolution, s.scheme)
        .map_err(|e| e.in_stage("quadrature"))?;
    let radial_rule = RadialRule::new(s.radial_order);

    // A degenerate-origin guard for non-locally-integrable densities: the
    // segment lower bound must stay away from 0.
    let min_exp = s
        .densities
        .f_n
        .min_exp()
        .min(s.densities.g_n.min_exp())
        .min(s.densities.f_nm1.min_exp())
        .min(s.densities.g_nm1.min_exp());
    if min_exp < 0.0 {
        for v in &quad.nodes {
            let rmin = radial_eval(&s.k, v)?.min(radial_eval(&s.l, v)?);
            if rmin < 1e-6 {
                return Err(BpError::InvalidScenario(
                    "a body degenerates toward the origin while a density has a \
                     negative exponent"
                        .into(),
                )
                .in_stage("validation"));
            }
        }
    }

    // Vacuity: no sampled ray carries any of K Δ L.
    let mut vacuous = true;
    for v in &quad.nodes {
        if symmetric_difference_ray(&s.k, &s.l, v)
            .map_err(|e| e.in_stage("validation"))?
            .is_some()
        {
            vacuous = false;
            break;
        }
    }

    let pair = effective_pair(s).map_err(|e| e.in_stage("decomposition"))?;
    let rays = representative_directions(&quad);
    let decomposition = check_decomposition(&pair, &s.k, &s.l, &s.densities, &rays, 33)
        .map_err(|e| e.in_stage("decomposition"))?;

    let endpoint_violations = endpoint_bound_check(&pair, &s.k, &s.l, 10_000, s.seed)
        .map_err(|e| e.in_stage("endpoint_bound"))?;
    let endpoint_bound_ok = endpoint_violations.is_empty();

    let g_fn = f_on_sphere(&pair, &s.k, &s.l, &quad.nodes).map_err(|e| e.in_stage("pd_test"))?;
    let pd_report = pd_test(&g_fn, s.truncation_degree, &quad, &s.pd)
        .map_err(|e| e.in_stage("pd_test"))?;

    let hyp_grid = build_sphere_quadrature(s.n, s.hypothesis_resolution, Scheme::ProductGauss)
        .map_err(|e| e.in_stage("hypothesis"))?;
    let xis = representative_directions(&hyp_grid);
    let (margins, hyp_scale) =
        verify_hypothesis(s, &xis, &radial_rule).map_err(|e| e.in_stage("hypothesis"))?;
    let min_margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    let hypothesis_ok = min_margin >= -s.tol_hyp * hyp_scale.max(1e-300);

    let (lhs, rhs, conclusion_ok) =
        verify_conclusion(s, &quad, &radial_rule).map_err(|e| e.in_stage("conclusion"))?;

    let decomposition_ok = decomposition.ok && endpoint_bound_ok;
    let verdict = if vacuous {
        VERDICT_VACUOUS
    } else if !decomposition_ok {
        VERDICT_DECOMPOSITION
    } else if pd_report.verdict == PdVerdict::NotPositiveDefinite {
        VERDICT_NOT_PD
    } else if pd_report.verdict == PdVerdict::Inconclusive {
        VERDICT_PD_INCONCLUSIVE
    } else if !hypothesis_ok {
        VERDICT_HYPOTHESIS
    } else if !conclusion_ok {
        VERDICT_VIOLATED
    } else {
        VERDICT_VERIFIED
    };

    let mut violations: Vec<String> =
        decomposition.violations.iter().map(|v| v.to_string()).collect();
    violations.extend(endpoint_violations);

    Ok(VerificationReport {
        hypothesis_xis: xis.iter().map(|x| x.coords().to_vec()).collect(),
        hypothesis_margins: margins,
        min_margin,
        hypothesis_ok,
        decomposition_ok,
        decomposition_violations: violations,
        endpoint_bound_ok,
        pd_report,
        conclusion_lhs: lhs,
        conclusion_rhs: rhs,
        conclusion_ok,
        vacuous,
        verdict: verdict.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dir(v: &[f64]) -> Direction {
        Direction::new(v.to_vec()).unwrap()
    }

    fn lebesgue_set() -> DensitySet {
        DensitySet {
            f_n: Density::constant(1.0),
            f_nm1: Density::constant(1.0),
            g_n: Density::constant(1.0),
            g_nm1: Density::constant(1.0),
        }
    }

    #[test]
    fn section_measure_analytic_cases() {
        let rule = RadialRule::new(16);
        let xi = dir(&[0.0, 0.0, 1.0]);
        let k = StarBody::ball(3, 1.0).unwrap();
        let l = StarBody::ball(3, 1.0).unwrap();
        let v = section_measure(RegionTag::KMinusL, &Density::constant(1.0), &xi, &k, &l, 16, &rule)
            .unwrap();
        assert_eq!(v, 0.0);

        let l = StarBody::ball(3, 0.5).unwrap();
        let v = section_measure(RegionTag::KMinusL, &Density::constant(1.0), &xi, &k, &l, 16, &rule)
            .unwrap();
        assert!(((v - 3.0 * PI / 4.0) / v).abs() < 1e-12, "{v}");

        let v = section_measure(
            RegionTag::KMinusL,
            &Density::power(1.0, 2.0),
            &xi,
            &k,
            &l,
            16,
            &rule,
        )
        .unwrap();
        assert!(((v - 15.0 * PI / 32.0) / v).abs() < 1e-12, "{v}");
    }

    #[test]
    fn region_measure_analytic_cases() {
        let rule = RadialRule::new(16);
        let quad = build_sphere_quadrature(3, 16, Scheme::ProductGauss).unwrap();
        let k = StarBody::ball(3, 2.0).unwrap();
        let l = StarBody::ball(3, 1.0).unwrap();
        let v = region_measure(RegionTag::KMinusL, &Density::constant(1.0), &k, &l, &quad, &rule)
            .unwrap();
        let exact = 28.0 * PI / 3.0;
        assert!(((v - exact) / exact).abs() < 1e-10, "{v}");

        let v = region_measure(
            RegionTag::KMinusL,
            &Density::power(1.0, -3.0),
            &k,
            &l,
            &quad,
            &rule,
        )
        .unwrap();
        let exact = 4.0 * PI * std::f64::consts::LN_2;
        assert!(((v - exact) / exact).abs() < 1e-10, "{v}");

        let v = region_measure(RegionTag::LMinusK, &Density::constant(1.0), &k, &l, &quad, &rule)
            .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn h_eval_examples() {
        let k = StarBody::ball(3, 3.5).unwrap();
        let l = StarBody::ball(3, 0.5).unwrap();
        // f_{n-1} = 1, f_n = |x|^n, n = 3, |x| = 2 -> 1/16
        let ds = DensitySet {
            f_n: Density::power(1.0, 3.0),
            f_nm1: Density::constant(1.0),
            g_n: Density::power(1.0, 3.0),
            g_nm1: Density::constant(1.0),
        };
        let h = h_eval(&[2.0, 0.0, 0.0], &k, &l, &ds).unwrap();
        assert!((h - 1.0 / 16.0).abs() < 1e-14);

        // f_{n-1} = |x|^2, f_n = 1, |x| = 3 -> h = 3 = |x|
        let ds = DensitySet {
            f_n: Density::constant(1.0),
            f_nm1: Density::power(1.0, 2.0),
            g_n: Density::constant(1.0),
            g_nm1: Density::power(1.0, 2.0),
        };
        let h = h_eval(&[0.0, 3.0, 0.0], &k, &l, &ds).unwrap();
        assert!((h - 3.0).abs() < 1e-13);

        // epsilon |x|^3 + |x| over |x| * |x|, eps = 0.1, |x| = 2 -> 0.7
        let ds = DensitySet {
            f_n: Density::power(1.0, 1.0),
            f_nm1: Density::new(vec![
                DensityTerm { coef: 0.1, exp: 3.0 },
                DensityTerm { coef: 1.0, exp: 1.0 },
            ])
            .unwrap(),
            g_n: Density::power(1.0, 1.0),
            g_nm1: Density::constant(1.0),
        };
        let h = h_eval(&[0.0, 0.0, 2.0], &k, &l, &ds).unwrap();
        assert!((h - 0.7).abs() < 1e-14);

        // outside K Δ L
        assert!(h_eval(&[0.1, 0.0, 0.0], &k, &l, &ds).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let k = StarBody::ball(3, 2.0).unwrap();
        let l = StarBody::ball(3, 1.0).unwrap();
        let quad = build_sphere_quadrature(3, 8, Scheme::ProductGauss).unwrap();
        let rays: Vec<Direction> = quad.nodes[..40].to_vec();

        // a = |x|, b = 0 with h = |x|
        let ds = DensitySet {
            f_n: Density::constant(1.0),
            f_nm1: Density::power(1.0, 2.0),
            g_n: Density::constant(1.0),
            g_nm1: Density::power(1.0, 2.0),
        };
        let pair = MonotonePair {
            a: RadialProfile::PowerSum(Density::power(1.0, 1.0)),
            b: RadialProfile::zero(),
        };
        let check = check_decomposition(&pair, &k, &l, &ds, &rays, 17).unwrap();
        assert!(check.ok, "{:?}", check.violations);
        assert!(check.rays_checked > 0);

        // adversarial: a decreasing but declared non-decreasing
        let bad = MonotonePair {
            a: RadialProfile::Custom(Arc::new(|r| 2.0 - r + (4.0 * r).sin() * 0.5)),
            b: RadialProfile::zero(),
        };
        let check = check_decomposition(&bad, &k, &l, &ds, &rays, 17).unwrap();
        assert!(!check.ok);
        assert!(check
            .violations
            .iter()
            .any(|v| v.kind == "a not non-decreasing"));
    }

    #[test]
    fn f_on_sphere_examples() {
        // K = L = ball(1), a = 1, b = 0 -> G = 1
        let k = StarBody::ball(3, 1.0).unwrap();
        let pair = MonotonePair {
            a: RadialProfile::PowerSum(Density::constant(1.0)),
            b: RadialProfile::zero(),
        };
        let probes = vec![dir(&[1.0, 0.0, 0.0]), dir(&[0.3, 0.4, 0.87])];
        let g = f_on_sphere(&pair, &k, &k, &probes).unwrap();
        for v in &probes {
            assert!((g(v) - 1.0).abs() < 1e-14);
        }

        // a = eps |x|, b = 1/|x| -> G = (eps rho_K + 1/rho_L)^{-1}
        let k = StarBody::ball(3, 1.1).unwrap();
        let l = StarBody::ball(3, 1.0).unwrap();
        let eps = 0.1;
        let pair = MonotonePair {
            a: RadialProfile::PowerSum(Density::power(eps, 1.0)),
            b: RadialProfile::PowerSum(Density::power(1.0, -1.0)),
        };
        let g = f_on_sphere(&pair, &k, &l, &probes).unwrap();
        let expect = 1.0 / (eps * 1.1 + 1.0);
        for v in &probes {
            assert!((g(v) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn q_profile_examples() {
        let rule = RadialRule::new(12);
        let k = StarBody::ball(3, 2.0).unwrap();
        let l = StarBody::ball(3, 1.0).unwrap();
        let vs = vec![dir(&[1.0, 0.0, 0.0]), dir(&[0.0, 0.6, 0.8])];
        let q = q_profile(&k, &l, &Density::constant(1.0), &Density::constant(1.0), &vs, &rule)
            .unwrap();
        for v in &q {
            assert!((v - 1.0).abs() < 1e-13);
        }
        // K = L -> 0
        let q = q_profile(&k, &k, &Density::constant(1.0), &Density::constant(1.0), &vs, &rule)
            .unwrap();
        for v in &q {
            assert_eq!(*v, 0.0);
        }
        // signed when L is larger
        let q = q_profile(&l, &k, &Density::constant(1.0), &Density::constant(1.0), &vs, &rule)
            .unwrap();
        for v in &q {
            assert!((v + 1.0).abs() < 1e-13);
        }
        // discontinuous density rejected
        assert!(matches!(
            q_profile(&k, &l, &Density::power(1.0, -1.0), &Density::constant(1.0), &vs, &rule),
            Err(BpError::Continuity(_))
        ));
    }

    fn base_scenario(k: StarBody, l: StarBody) -> Scenario {
        Scenario {
            n: 3,
            mode: Mode::Main,
            k,
            l,
            densities: lebesgue_set(),
            pair: Some(MonotonePair {
                b: RadialProfile::PowerSum(Density::power(1.0, -1.0)),
                a: RadialProfile::zero(),
            }),
            scheme: Scheme::ProductGauss,
            resolution: 12,
            radial_order: 16,
            truncation_degree: 8,
            pd: PdSettings::default(),
            tol_hyp: 1e-7,
            tol_conc: 1e-7,
            hypothesis_resolution: 6,
            seed: 17,
        }
    }

    #[test]
    fn run_scenario_ball_shell() {
        let s = base_scenario(
            StarBody::ball(3, 2.0).unwrap(),
            StarBody::ball(3, 1.0).unwrap(),
        );
        let report = run_scenario(&s).unwrap();
        assert_eq!(report.verdict, "theorem instance verified");
        assert!(report.hypothesis_ok && report.conclusion_ok && report.decomposition_ok);
        assert!(report.endpoint_bound_ok);
        let exact = 28.0 * PI / 3.0;
        assert!(((report.conclusion_rhs - exact) / exact).abs() < 1e-9);
        assert_eq!(report.conclusion_lhs, 0.0);
        // all margins positive: L \ K is empty
        assert!(report.min_margin > 0.0);
    }

    #[test]
    fn run_scenario_vacuous() {
        let b = StarBody::ball(3, 1.0).unwrap();
        let s = base_scenario(b.clone(), b);
        let report = run_scenario(&s).unwrap();
        assert_eq!(report.verdict, "vacuous");
        assert!(report.vacuous);
        assert_eq!(report.conclusion_lhs, 0.0);
        assert_eq!(report.conclusion_rhs, 0.0);
        assert!(report.hypothesis_margins.iter().all(|m| m.abs() < 1e-12));
    }

    #[test]
    fn run_scenario_hypothesis_failure() {
        // L strictly larger than K: sections of L \ K dominate.
        let s = base_scenario(
            StarBody::ball(3, 1.0).unwrap(),
            StarBody::ball(3, 2.0).unwrap(),
        );
        let report = run_scenario(&s).unwrap();
        assert_eq!(report.verdict, "hypothesis not satisfied");
        assert!(!report.hypothesis_ok);
        assert!(report.min_margin < 0.0);
    }

    #[test]
    fn identity_density_margins_reduce_to_section_difference() {
        let k = StarBody::ellipsoid(vec![1.0, 1.0, 1.3]).unwrap();
        let l = StarBody::ball(3, 1.05).unwrap();
        let s = base_scenario(k.clone(), l.clone());
        let rule = RadialRule::new(16);
        let xis = vec![dir(&[0.0, 0.0, 1.0]), dir(&[1.0, 0.0, 0.0]), dir(&[0.6, 0.0, 0.8])];
        let (margins, _) = verify_hypothesis(&s, &xis, &rule).unwrap();
        // whole-body section difference, same density on both sides
        for (xi, m) in xis.iter().zip(&margins) {
            let sub = build_subsphere_quadrature(xi, s.resolution);
            let mut whole = 0.0;
            for (w, &wt) in sub.nodes.iter().zip(&sub.weights) {
                let rk = radial_eval(&k, w).unwrap();
                let rl = radial_eval(&l, w).unwrap();
                whole += wt * (rk * rk - rl * rl) / 2.0;
            }
            assert!(
                (m - whole).abs() < 1e-9 * whole.abs().max(1.0),
                "{m} vs {whole}"
            );
        }
    }

    #[test]
    fn scaling_covariance() {
        let s = base_scenario(
            StarBody::ellipsoid(vec![1.2, 1.0, 1.1]).unwrap(),
            StarBody::ball(3, 0.9).unwrap(),
        );
        let mut scaled = s.clone();
        let c = 3.7;
        scaled.densities = DensitySet {
            f_n: s.densities.f_n.scaled(c).unwrap(),
            f_nm1: s.densities.f_nm1.scaled(c).unwrap(),
            g_n: s.densities.g_n.scaled(c).unwrap(),
            g_nm1: s.densities.g_nm1.scaled(c).unwrap(),
        };
        // the scaled h is c-fold; rescale the decomposition to match
        scaled.pair = Some(MonotonePair {
            a: RadialProfile::zero(),
            b: RadialProfile::PowerSum(Density::power(1.0, -1.0)),
        });
        let r1 = run_scenario(&s).unwrap();
        let r2 = run_scenario(&scaled).unwrap();
        assert_eq!(r1.hypothesis_ok, r2.hypothesis_ok);
        assert_eq!(r1.conclusion_ok, r2.conclusion_ok);
        for (a, b) in r1.hypothesis_margins.iter().zip(&r2.hypothesis_margins) {
            assert!((c * a - b).abs() < 1e-9 * b.abs().max(1e-9));
        }
        assert!((c * r1.conclusion_rhs - r2.conclusion_rhs).abs() < 1e-9 * r2.conclusion_rhs);
    }

    #[test]
    fn zvavitch_modes_lebesgue() {
        // Lebesgue measure: h = 1/|x| is non-increasing, so mode B validates
        // and mode A reports a decomposition failure.
        let mut s = base_scenario(
            StarBody::ball(3, 1.2).unwrap(),
            StarBody::ball(3, 1.0).unwrap(),
        );
        s.pair = None;
        s.mode = Mode::ZvavitchB;
        let report = run_scenario(&s).unwrap();
        assert_eq!(report.verdict, "theorem instance verified");

        s.mode = Mode::ZvavitchA;
        let report = run_scenario(&s).unwrap();
        assert_eq!(report.verdict, "decomposition invalid");
    }

    #[test]
    fn endpoint_bound_detects_violation() {
        let k = StarBody::ball(3, 2.0).unwrap();
        let l = StarBody::ball(3, 1.0).unwrap();
        let good = MonotonePair {
            a: RadialProfile::PowerSum(Density::power(1.0, 1.0)),
            b: RadialProfile::PowerSum(Density::power(0.5, -1.0)),
        };
        assert!(endpoint_bound_check(&good, &k, &l, 5000, 3).unwrap().is_empty());
        let bad = MonotonePair {
            a: RadialProfile::Custom(Arc::new(|r: f64| (3.0 * r).sin().powi(2))),
            b: RadialProfile::zero(),
        };
        assert!(!endpoint_bound_check(&bad, &k, &l, 5000, 3).unwrap().is_empty());
    }
}
