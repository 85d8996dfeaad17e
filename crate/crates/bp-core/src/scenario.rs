//! Scenario files: the `bp/1` JSON schema, default materialization, the
//! canonical serializer used for reproducible reports, and the built-in
//! scenario catalogue.

use crate::engine::{Density, DensitySet, DensityTerm, Mode, MonotonePair, RadialProfile, Scenario, VerificationReport};
use crate::error::{BpError, Result};
use crate::geometry::{derived_section_body, Direction, StarBody, TabulatedGrid, ZonalTerm};
use crate::quadrature::{build_sphere_quadrature, Scheme};
use crate::transforms::PdSettings;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Schema tag every scenario file must carry.
pub const SCHEMA: &str = "bp/1";

/// Scenario file as written on disk. Optional fields default during
/// [`resolve`]; unknown fields are rejected at parse time.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub bodies: BodiesSpec,
    pub densities: DensitiesSpec,
    /// Required in `main` mode; the single-measure modes derive their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pd: Option<PdSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis_resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodiesSpec {
    pub k: BodySpec,
    pub l: BodySpec,
}

/// Star-body description; dimensions come from the scenario's `n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        r: f64,
    },
    LpBall {
        p: PSpec,
        r: f64,
    },
    Ellipsoid {
        semiaxes: Vec<f64>,
    },
    PerturbedBall {
        r: f64,
        terms: Vec<ZonalTermSpec>,
    },
    Tabulated {
        polar_counts: Vec<usize>,
        azimuth_count: usize,
        values: Vec<f64>,
    },
    Scaled {
        factor: f64,
        body: Box<BodySpec>,
    },
    /// Body whose reciprocal radial function is the averaged section
    /// integral of `base` raised to the (n+1)-st power.
    DerivedSectionBody {
        base: Box<BodySpec>,
    },
}

/// Exponent of an Lp ball: a finite number >= 1, or the string "inf".
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PSpec {
    Num(f64),
    Name(String),
}

impl PSpec {
    fn value(&self) -> Result<f64> {
        match self {
            PSpec::Num(p) => Ok(*p),
            PSpec::Name(s) if s == "inf" => Ok(f64::INFINITY),
            PSpec::Name(s) => Err(BpError::InvalidScenario(format!(
                "lp_ball p must be a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZonalTermSpec {
    pub degree: usize,
    pub eps: f64,
    pub axis: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitiesSpec {
    pub f_n: DensitySpec,
    pub f_nm1: DensitySpec,
    pub g_n: DensitySpec,
    pub g_nm1: DensitySpec,
}

/// Radial power sum: sum_i coef_i * |x|^{exp_i}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coef: f64,
    pub exp: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionSpec {
    pub a: DensitySpec,
    pub b: DensitySpec,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_order: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_margin: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<f64>,
}

/// Parse a scenario file, rejecting unknown fields and malformed JSON with
/// a position-annotated error.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile> {
    serde_json::from_str(text)
        .map_err(|e| BpError::InvalidScenario(format!("scenario parse failed: {e}")))
}

fn default_resolution(n: usize) -> usize {
    match n {
        3 => 16,
        4 => 12,
        _ => 8,
    }
}

fn default_hypothesis_resolution(n: usize) -> usize {
    if n <= 4 {
        8
    } else {
        6
    }
}

fn density_from_spec(spec: &DensitySpec, what: &str) -> Result<Density> {
    Density::new(
        spec.terms
            .iter()
            .map(|t| DensityTerm {
                coef: t.coef,
                exp: t.exp,
            })
            .collect(),
    )
    .map_err(|e| BpError::InvalidScenario(format!("{what}: {e}")))
}

/// Materialize a body description in dimension n; `resolution` sets the
/// quadrature used by derived bodies.
pub fn body_from_spec(spec: &BodySpec, n: usize, resolution: usize) -> Result<StarBody> {
    match spec {
        BodySpec::Ball { r } => StarBody::ball(n, *r),
        BodySpec::LpBall { p, r } => StarBody::lp_ball(n, p.value()?, *r),
        BodySpec::Ellipsoid { semiaxes } => {
            if semiaxes.len() != n {
                return Err(BpError::DimensionMismatch {
                    expected: n,
                    got: semiaxes.len(),
                });
            }
            StarBody::ellipsoid(semiaxes.clone())
        }
        BodySpec::PerturbedBall { r, terms } => {
            let terms = terms
                .iter()
                .map(|t| {
                    Ok(ZonalTerm {
                        degree: t.degree,
                        eps: t.eps,
                        axis: Direction::new(t.axis.clone())?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            StarBody::perturbed_ball(n, *r, terms)
        }
        BodySpec::Tabulated {
            polar_counts,
            azimuth_count,
            values,
        } => StarBody::tabulated(TabulatedGrid {
            dim: n,
            polar_counts: polar_counts.clone(),
            azimuth_count: *azimuth_count,
            values: values.clone(),
        }),
        BodySpec::Scaled { factor, body } => {
            body_from_spec(body, n, resolution)?.scaled(*factor)
        }
        BodySpec::DerivedSectionBody { base } => {
            let base = body_from_spec(base, n, resolution)?;
            let quad = build_sphere_quadrature(n, resolution.max(12), Scheme::ProductGauss)?;
            derived_section_body(&base, &quad)
        }
    }
}

/// Fill in every defaulted field, producing the canonical resolved form and
/// the executable [`Scenario`].
pub fn resolve(file: &ScenarioFile) -> Result<(Scenario, ScenarioFile)> {
    if file.schema != SCHEMA {
        return Err(BpError::InvalidScenario(format!(
            "unsupported schema \"{}\", expected \"{SCHEMA}\"",
            file.schema
        )));
    }
    let n = file.n;
    if !(3..=5).contains(&n) {
        return Err(BpError::UnsupportedDimension(n));
    }
    let mode_str = file.mode.clone().unwrap_or_else(|| "main".to_string());
    let mode = match mode_str.as_str() {
        "main" => Mode::Main,
        "zvavitch_a" => Mode::ZvavitchA,
        "zvavitch_b" => Mode::ZvavitchB,
        other => {
            return Err(BpError::InvalidScenario(format!(
                "unknown mode \"{other}\" (expected main, zvavitch_a, or zvavitch_b)"
            )))
        }
    };

    let quad_spec = file.quadrature.clone().unwrap_or(QuadratureSpec {
        scheme: None,
        resolution: None,
        radial_order: None,
    });
    let scheme_str = quad_spec
        .scheme
        .clone()
        .unwrap_or_else(|| "product_gauss".to_string());
    let seed = file.seed.unwrap_or(0);
    let scheme = match scheme_str.as_str() {
        "product_gauss" => Scheme::ProductGauss,
        "monte_carlo" => Scheme::MonteCarlo { seed },
        other => {
            return Err(BpError::InvalidScenario(format!(
                "unknown quadrature scheme \"{other}\" (expected product_gauss or monte_carlo)"
            )))
        }
    };
    let resolution = quad_spec.resolution.unwrap_or_else(|| default_resolution(n));
    let radial_order = quad_spec.radial_order.unwrap_or(16);
    let truncation_degree = file.truncation_degree.unwrap_or(8);

    let pd_spec = file.pd.clone().unwrap_or(PdSpec {
        tol: None,
        tail_threshold: None,
        tail_margin: None,
    });
    let pd_defaults = PdSettings::default();
    let pd = PdSettings {
        tol_pd: pd_spec.tol.unwrap_or(pd_defaults.tol_pd),
        tail_threshold: pd_spec.tail_threshold.unwrap_or(pd_defaults.tail_threshold),
        tail_margin: pd_spec.tail_margin,
    };
    let tol_spec = file.tolerances.clone().unwrap_or(ToleranceSpec {
        hypothesis: None,
        conclusion: None,
    });
    let tol_hyp = tol_spec.hypothesis.unwrap_or(1e-7);
    let tol_conc = tol_spec.conclusion.unwrap_or(1e-7);
    let hypothesis_resolution = file
        .hypothesis_resolution
        .unwrap_or_else(|| default_hypothesis_resolution(n));

    let k = body_from_spec(&file.bodies.k, n, resolution)
        .map_err(|e| BpError::InvalidScenario(format!("body k: {e}")))?;
    let l = body_from_spec(&file.bodies.l, n, resolution)
        .map_err(|e| BpError::InvalidScenario(format!("body l: {e}")))?;
    let densities = DensitySet {
        f_n: density_from_spec(&file.densities.f_n, "f_n")?,
        f_nm1: density_from_spec(&file.densities.f_nm1, "f_nm1")?,
        g_n: density_from_spec(&file.densities.g_n, "g_n")?,
        g_nm1: density_from_spec(&file.densities.g_nm1, "g_nm1")?,
    };
    let pair = match (&file.decomposition, mode) {
        (Some(d), Mode::Main) => Some(MonotonePair {
            a: RadialProfile::PowerSum(density_from_spec(&d.a, "decomposition a")?),
            b: RadialProfile::PowerSum(density_from_spec(&d.b, "decomposition b")?),
        }),
        (None, Mode::Main) => {
            return Err(BpError::InvalidScenario(
                "main mode requires an explicit decomposition".into(),
            ))
        }
        // Single-measure modes derive the decomposition from h itself.
        (_, _) => None,
    };

    let scenario = Scenario {
        n,
        mode,
        k,
        l,
        densities,
        pair,
        scheme,
        resolution,
        radial_order,
        truncation_degree,
        pd: pd.clone(),
        tol_hyp,
        tol_conc,
        hypothesis_resolution,
        seed,
    };

    let resolved = ScenarioFile {
        schema: SCHEMA.to_string(),
        n,
        mode: Some(mode_str),
        bodies: file.bodies.clone(),
        densities: file.densities.clone(),
        decomposition: if mode == Mode::Main {
            file.decomposition.clone()
        } else {
            None
        },
        quadrature: Some(QuadratureSpec {
            scheme: Some(scheme_str),
            resolution: Some(resolution),
            radial_order: Some(radial_order),
        }),
        truncation_degree: Some(truncation_degree),
        pd: Some(PdSpec {
            tol: Some(pd.tol_pd),
            tail_threshold: Some(pd.tail_threshold),
            tail_margin: pd.tail_margin,
        }),
        tolerances: Some(ToleranceSpec {
            hypothesis: Some(tol_hyp),
            conclusion: Some(tol_conc),
        }),
        hypothesis_resolution: Some(hypothesis_resolution),
        seed: Some(seed),
    };
    Ok((scenario, resolved))
}

/// Canonical textual form: ordered keys, 2-space indent, every float
/// rendered with 17 significant digits so the text round-trips bit-exactly.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = num.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let v = num.as_f64().unwrap_or(f64::NAN);
                out.push_str(&format_float(v));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serialization"))
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                out.push_str(&serde_json::to_string(key).expect("key serialization"));
                out.push_str(": ");
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push('}');
        }
    }
}

fn push_indent(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// 17 significant digits: enough to reconstruct any f64 exactly.
fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return "null".to_string();
    }
    format!("{v:.16e}")
}

/// Canonical text of a (resolved) scenario file.
pub fn scenario_to_canonical_json(file: &ScenarioFile) -> Result<String> {
    let value = serde_json::to_value(file)
        .map_err(|e| BpError::InvalidScenario(format!("scenario serialization failed: {e}")))?;
    Ok(canonical_json(&value))
}

/// Full run report: resolved configuration plus every verification result.
pub fn report_to_value(resolved: &ScenarioFile, report: &VerificationReport) -> Result<Value> {
    let config = serde_json::to_value(resolved)
        .map_err(|e| BpError::InvalidScenario(format!("config serialization failed: {e}")))?;
    Ok(json!({
        "schema": "bp/1-report",
        "config": config,
        "verdict": report.verdict,
        "vacuous": report.vacuous,
        "hypothesis": {
            "ok": report.hypothesis_ok,
            "min_margin": report.min_margin,
            "xis": report.hypothesis_xis,
            "margins": report.hypothesis_margins,
        },
        "decomposition": {
            "ok": report.decomposition_ok,
            "violations": report.decomposition_violations,
        },
        "endpoint_bound_ok": report.endpoint_bound_ok,
        "positive_definiteness": {
            "verdict": report.pd_report.verdict.as_str(),
            "min_value": report.pd_report.min_value,
            "tail_energy": report.pd_report.tail_energy,
            "scale": report.pd_report.scale,
            "tail_margin": report.pd_report.tail_margin,
            "max_degree": report.pd_report.max_degree,
            "transformed_density": report.pd_report.transformed_density,
            "smoothed_density": report.pd_report.smoothed_density,
        },
        "conclusion": {
            "lhs": report.conclusion_lhs,
            "rhs": report.conclusion_rhs,
            "ok": report.conclusion_ok,
        },
    }))
}

/// Identifiers of the built-in scenarios.
pub fn builtin_ids() -> &'static [&'static str] {
    &[
        "example-3.1",
        "example-3.2",
        "example-3.3",
        "zvavitch-lebesgue",
    ]
}

fn terms(list: &[(f64, f64)]) -> DensitySpec {
    DensitySpec {
        terms: list
            .iter()
            .map(|&(coef, exp)| TermSpec { coef, exp })
            .collect(),
    }
}

/// Nested-balls scenario with mixed-power densities needing a genuine
/// two-part decomposition: h(r) = eps*r + 1/r on both sides of the
/// symmetric difference. This is "example-3.3" at eps = 0.1.
pub fn mixed_power_scenario(eps: f64) -> Result<ScenarioFile> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(BpError::InvalidScenario(format!(
            "mixed-power scenario needs eps > 0, got {eps}"
        )));
    }
    Ok(ScenarioFile {
        schema: SCHEMA.to_string(),
        n: 3,
        mode: Some("main".to_string()),
        bodies: BodiesSpec {
            k: BodySpec::Ball { r: 1.1 },
            l: BodySpec::Ball { r: 1.0 },
        },
        densities: DensitiesSpec {
            f_n: terms(&[(1.0, 1.0)]),
            f_nm1: terms(&[(eps, 3.0), (1.0, 1.0)]),
            g_n: terms(&[(1.0, 3.0)]),
            g_nm1: terms(&[(eps, 5.0), (1.0, 3.0)]),
        },
        decomposition: Some(DecompositionSpec {
            a: terms(&[(eps, 1.0)]),
            b: terms(&[(1.0, -1.0)]),
        }),
        quadrature: None,
        truncation_degree: None,
        pd: None,
        tolerances: None,
        hypothesis_resolution: None,
        seed: None,
    })
}

/// Construct a built-in scenario by identifier ("example-3.1" or the short
/// form "3.1", etc.).
pub fn builtin_scenario(id: &str) -> Result<ScenarioFile> {
    let canon = match id {
        "example-3.1" | "3.1" => "example-3.1",
        "example-3.2" | "3.2" => "example-3.2",
        "example-3.3" | "3.3" => "example-3.3",
        "zvavitch-lebesgue" | "zvavitch" => "zvavitch-lebesgue",
        other => {
            return Err(BpError::InvalidScenario(format!(
                "unknown builtin scenario \"{other}\" (known: {})",
                builtin_ids().join(", ")
            )))
        }
    };
    let file = match canon {
        // Derived body whose reciprocal radial function is a section
        // integral of an ellipsoid, against a scaled-down copy; the PD
        // object is exactly that section integral.
        "example-3.1" => ScenarioFile {
            schema: SCHEMA.to_string(),
            n: 3,
            mode: Some("main".to_string()),
            bodies: BodiesSpec {
                k: BodySpec::DerivedSectionBody {
                    base: Box::new(BodySpec::Ellipsoid {
                        semiaxes: vec![1.0, 1.0, 1.2],
                    }),
                },
                l: BodySpec::Scaled {
                    factor: 0.9,
                    body: Box::new(BodySpec::DerivedSectionBody {
                        base: Box::new(BodySpec::Ellipsoid {
                            semiaxes: vec![1.0, 1.0, 1.2],
                        }),
                    }),
                },
            },
            densities: DensitiesSpec {
                f_n: terms(&[(1.0, 0.0)]),
                f_nm1: terms(&[(1.0, 2.0)]),
                g_n: terms(&[(1.0, 0.0)]),
                g_nm1: terms(&[(1.0, 2.0)]),
            },
            decomposition: Some(DecompositionSpec {
                a: terms(&[(1.0, 1.0)]),
                b: terms(&[]),
            }),
            quadrature: None,
            truncation_degree: None,
            pd: None,
            tolerances: None,
            hypothesis_resolution: None,
            seed: None,
        },
        // Ball against a perturbed ball with uniformly smaller sections;
        // h(x) = |x|^2 is non-decreasing and the PD object is constant.
        "example-3.2" => ScenarioFile {
            schema: SCHEMA.to_string(),
            n: 3,
            mode: Some("main".to_string()),
            bodies: BodiesSpec {
                k: BodySpec::Ball { r: 1.0 },
                l: BodySpec::PerturbedBall {
                    r: 0.9,
                    terms: vec![ZonalTermSpec {
                        degree: 2,
                        eps: 0.1,
                        axis: vec![0.0, 0.0, 1.0],
                    }],
                },
            },
            densities: DensitiesSpec {
                f_n: terms(&[(1.0, -3.0)]),
                f_nm1: terms(&[(1.0, 0.0)]),
                g_n: terms(&[(1.0, -3.0)]),
                g_nm1: terms(&[(1.0, 0.0)]),
            },
            decomposition: Some(DecompositionSpec {
                a: terms(&[(1.0, 2.0)]),
                b: terms(&[]),
            }),
            quadrature: None,
            truncation_degree: None,
            pd: None,
            tolerances: None,
            hypothesis_resolution: None,
            seed: None,
        },
        "example-3.3" => mixed_power_scenario(0.1)?,
        // Single-measure mode with Lebesgue measure on both levels:
        // h(x) = 1/|x| is non-increasing, so the PD object lives on L.
        "zvavitch-lebesgue" => ScenarioFile {
            schema: SCHEMA.to_string(),
            n: 3,
            mode: Some("zvavitch_b".to_string()),
            bodies: BodiesSpec {
                k: BodySpec::Ball { r: 1.2 },
                l: BodySpec::LpBall {
                    p: PSpec::Num(4.0),
                    r: 1.0,
                },
            },
            densities: DensitiesSpec {
                f_n: terms(&[(1.0, 0.0)]),
                f_nm1: terms(&[(1.0, 0.0)]),
                g_n: terms(&[(1.0, 0.0)]),
                g_nm1: terms(&[(1.0, 0.0)]),
            },
            decomposition: None,
            quadrature: None,
            truncation_degree: None,
            pd: None,
            tolerances: None,
            hypothesis_resolution: None,
            seed: None,
        },
        _ => unreachable!(),
    };
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_scenario;

    fn minimal_json() -> String {
        r#"{
            "schema": "bp/1",
            "n": 3,
            "bodies": {
                "k": {"kind": "ball", "r": 1.2},
                "l": {"kind": "ball", "r": 1.0}
            },
            "densities": {
                "f_n": {"terms": [{"coef": 1.0, "exp": 0.0}]},
                "f_nm1": {"terms": [{"coef": 1.0, "exp": 1.0}]},
                "g_n": {"terms": [{"coef": 1.0, "exp": 0.0}]},
                "g_nm1": {"terms": [{"coef": 1.0, "exp": 1.0}]}
            },
            "decomposition": {
                "a": {"terms": [{"coef": 1.0, "exp": 0.0}]},
                "b": {"terms": []}
            }
        }"#
        .to_string()
    }

    #[test]
    fn parse_and_resolve_fills_defaults() {
        let file = parse_scenario(&minimal_json()).unwrap();
        let (scenario, resolved) = resolve(&file).unwrap();
        assert_eq!(scenario.n, 3);
        assert_eq!(scenario.mode, Mode::Main);
        assert_eq!(scenario.resolution, 16);
        assert_eq!(scenario.truncation_degree, 8);
        assert_eq!(scenario.radial_order, 16);
        assert_eq!(resolved.mode.as_deref(), Some("main"));
        assert_eq!(resolved.seed, Some(0));
        assert_eq!(
            resolved.quadrature.as_ref().unwrap().resolution,
            Some(16)
        );
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = minimal_json().replacen("\"n\": 3,", "\"n\": 3, \"extra\": 1,", 1);
        let err = parse_scenario(&bad).unwrap_err();
        assert!(matches!(err, BpError::InvalidScenario(_)));
        assert!(err.to_string().contains("extra"));
    }

    #[test]
    fn main_mode_requires_decomposition() {
        let file = parse_scenario(&minimal_json()).unwrap();
        let mut stripped = file.clone();
        stripped.decomposition = None;
        let err = resolve(&stripped).unwrap_err();
        assert!(err.to_string().contains("decomposition"));
    }

    #[test]
    fn bad_schema_and_dimension_rejected() {
        let file = parse_scenario(&minimal_json()).unwrap();
        let mut bad = file.clone();
        bad.schema = "bp/2".to_string();
        assert!(resolve(&bad).is_err());
        let mut bad = file;
        bad.n = 7;
        assert!(matches!(
            resolve(&bad).unwrap_err(),
            BpError::UnsupportedDimension(7)
        ));
    }

    #[test]
    fn canonical_form_is_idempotent() {
        let file = parse_scenario(&minimal_json()).unwrap();
        let (_, resolved) = resolve(&file).unwrap();
        let text1 = scenario_to_canonical_json(&resolved).unwrap();
        let reparsed = parse_scenario(&text1).unwrap();
        let (_, resolved2) = resolve(&reparsed).unwrap();
        let text2 = scenario_to_canonical_json(&resolved2).unwrap();
        assert_eq!(text1, text2);
    }

    #[test]
    fn canonical_floats_round_trip_exactly() {
        let values = [0.1, 1.0 / 3.0, 2.0_f64.sqrt(), 1e-300, -7.25e17];
        for &v in &values {
            let s = format_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn lp_exponent_accepts_inf_string() {
        let mut file = parse_scenario(&minimal_json()).unwrap();
        file.bodies.k = BodySpec::LpBall {
            p: PSpec::Name("inf".to_string()),
            r: 1.5,
        };
        let (scenario, _) = resolve(&file).unwrap();
        // The sup-norm ball of radius 1.5 contains the unit ball.
        let v = Direction::new(vec![1.0, 1.0, 1.0]).unwrap();
        let rho = crate::geometry::radial_eval(&scenario.k, &v).unwrap();
        assert!((rho - 1.5 * 3.0_f64.sqrt()).abs() < 1e-9, "rho = {rho}");
    }

    #[test]
    fn builtin_catalogue_resolves() {
        for id in builtin_ids() {
            let file = builtin_scenario(id).unwrap();
            let (scenario, _) = resolve(&file).unwrap();
            assert_eq!(scenario.n, 3, "{id}");
        }
        assert!(builtin_scenario("3.2").is_ok());
        assert!(builtin_scenario("nope").is_err());
    }

    #[test]
    fn builtin_ball_pair_verifies() {
        let file = builtin_scenario("example-3.3").unwrap();
        let (mut scenario, _) = resolve(&file).unwrap();
        scenario.resolution = 10;
        scenario.hypothesis_resolution = 6;
        let report = run_scenario(&scenario).unwrap();
        assert_eq!(report.verdict, "theorem instance verified");
    }

    #[test]
    fn report_serialization_contains_config_and_results() {
        let file = builtin_scenario("example-3.3").unwrap();
        let (mut scenario, resolved) = resolve(&file).unwrap();
        scenario.resolution = 10;
        scenario.hypothesis_resolution = 6;
        let report = run_scenario(&scenario).unwrap();
        let value = report_to_value(&resolved, &report).unwrap();
        let text = canonical_json(&value);
        assert!(text.contains("\"schema\": \"bp/1-report\""));
        assert!(text.contains("\"config\""));
        assert!(text.contains("\"verdict\""));
        assert!(text.contains("\"conclusion\""));
        // Canonical text parses back to the same value tree.
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["verdict"], value["verdict"]);
    }
}
