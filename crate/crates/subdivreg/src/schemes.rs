//! Built-in mask and mask-sequence catalogue: classical stationary schemes,
//! the perturbed, alternating, and convex-combination non-stationary
//! families exercised throughout the test suite, and frozen matrix fixtures
//! used as regression anchors for the joint-spectral-radius engine.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsr::MatrixSet;
use crate::lattice::DilationSpec;
use crate::symbol::{daubechies_mask, Mask, MaskSequence, Tail};

/// A documented quantity attached to a built-in scheme; regression tests pin
/// these numbers and reports surface them next to computed results.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownValue {
    pub quantity: &'static str,
    pub value: f64,
    pub note: &'static str,
}

fn kv(quantity: &'static str, value: f64, note: &'static str) -> KnownValue {
    KnownValue {
        quantity,
        value,
        note,
    }
}

/// A named scheme: dimension, dilation, level rule, and documented facts.
#[derive(Debug, Clone)]
pub struct SchemeDescriptor {
    pub name: String,
    pub dimension: usize,
    pub dilation: DilationSpec,
    pub sequence: MaskSequence,
    pub known_values: Vec<KnownValue>,
}

/// Optional parameters for [`builtin`]. Fields not read by the chosen scheme
/// are ignored; missing fields fall back to the documented defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemeParams {
    /// Order for the `daubechies` family (required there, n >= 2).
    pub n: Option<usize>,
    /// Real part of the ternary family's lambda; lambda must lie on the
    /// positive real or positive imaginary axis. Default lambda = 1.
    pub lambda_re: Option<f64>,
    /// Imaginary part of the ternary family's lambda.
    pub lambda_im: Option<f64>,
    /// Stationary catalogue name for the primary mask of a combined scheme.
    pub base: Option<String>,
    /// Stationary catalogue name for the secondary mask of a combined scheme.
    pub other: Option<String>,
    /// Which levels use the primary mask in `example3_alternating`:
    /// "even" (default) or "odd".
    pub member: Option<String>,
}

/// Every name accepted by [`builtin`].
pub fn builtin_names() -> &'static [&'static str] {
    &[
        "chaikin",
        "hat",
        "cubic_bspline",
        "quadratic_bspline",
        "fourpoint",
        "butterfly",
        "loop",
        "courant_box_spline",
        "ternary_dubuc_deslaurier_dual",
        "ternary_limit_d",
        "daubechies",
        "example1_scaled",
        "example2_convex",
        "example3_alternating",
        "example4_ternary",
        "example5_perturbed_chaikin",
        "example6_perturbed_loop",
    ]
}

/// The stationary subset of the catalogue (every name here is valid as a
/// `base`/`other` parameter of the combined schemes).
pub fn stationary_names() -> &'static [&'static str] {
    &[
        "chaikin",
        "hat",
        "cubic_bspline",
        "quadratic_bspline",
        "fourpoint",
        "butterfly",
        "loop",
        "courant_box_spline",
        "ternary_dubuc_deslaurier_dual",
        "ternary_limit_d",
    ]
}

/// Construct a catalogue scheme by name.
pub fn builtin(name: &str, params: &SchemeParams) -> Result<SchemeDescriptor> {
    if let Some((s, m, mask, known)) = stationary_entry(name) {
        return stationary_scheme(name, s, m, mask, known);
    }
    match name {
        "daubechies" => {
            let n = params.n.ok_or_else(|| {
                Error::InvalidParameter("daubechies requires the order parameter n".into())
            })?;
            let mask = daubechies_mask(n)?;
            let known = daubechies_known(n);
            stationary_scheme(&format!("daubechies({n})"), 1, 2, mask, known)
        }
        "example1_scaled" => example1_scaled(params),
        "example2_convex" => example2_convex(params),
        "example3_alternating" => example3_alternating(params),
        "example4_ternary" => example4_ternary(params),
        "example5_perturbed_chaikin" => example5_perturbed_chaikin(),
        "example6_perturbed_loop" => example6_perturbed_loop(),
        _ => Err(Error::UnknownScheme(format!(
            "unknown scheme {name:?}; available: {}",
            builtin_names().join(", ")
        ))),
    }
}

fn stationary_scheme(
    name: &str,
    s: usize,
    m: i64,
    mask: Mask,
    known_values: Vec<KnownValue>,
) -> Result<SchemeDescriptor> {
    Ok(SchemeDescriptor {
        name: name.to_string(),
        dimension: s,
        dilation: DilationSpec::isotropic(s, m)?,
        sequence: MaskSequence::stationary(mask)?,
        known_values,
    })
}

fn stationary_entry(name: &str) -> Option<(usize, i64, Mask, Vec<KnownValue>)> {
    let entry = match name {
        "chaikin" => (
            1,
            2,
            chaikin_mask(),
            vec![
                kv(
                    "restricted_radius_v1",
                    0.25,
                    "spectral radius of the transition pair on the order-1 difference subspace",
                ),
                kv("holder_exponent", 2.0, "the limit is the quadratic B-spline"),
            ],
        ),
        "hat" => (
            1,
            2,
            hat_mask(),
            vec![kv("holder_exponent", 1.0, "piecewise-linear limit")],
        ),
        "cubic_bspline" => (
            1,
            2,
            cubic_bspline_mask(),
            vec![
                kv(
                    "restricted_radius_v2",
                    0.125,
                    "spectral radius of the transition pair on the order-2 difference subspace",
                ),
                kv("holder_exponent", 3.0, "cubic B-spline limit"),
            ],
        ),
        "quadratic_bspline" => (
            1,
            2,
            chaikin_mask(),
            vec![kv(
                "holder_exponent",
                2.0,
                "corner-cutting mask, identical to chaikin",
            )],
        ),
        "fourpoint" => (
            1,
            2,
            fourpoint_mask(),
            vec![kv(
                "holder_exponent",
                2.0,
                "interpolatory 4-point scheme with weight 1/16",
            )],
        ),
        "butterfly" => (
            2,
            2,
            butterfly_mask(),
            vec![
                kv(
                    "restricted_radius_v1",
                    0.25,
                    "joint spectral radius of the transition family on the order-1 \
                     difference subspace",
                ),
                kv("holder_exponent", 2.0, "interpolatory C^1 surface scheme"),
            ],
        ),
        "loop" => (
            2,
            2,
            loop_mask(),
            vec![
                kv(
                    "restricted_radius_v1",
                    0.25,
                    "joint spectral radius of the transition family on the order-1 \
                     difference subspace",
                ),
                kv("holder_exponent", 2.0, "C^1 on regular triangulations"),
            ],
        ),
        "courant_box_spline" => (
            2,
            2,
            courant_mask(),
            vec![kv("holder_exponent", 1.0, "piecewise-linear box-spline limit")],
        ),
        "ternary_dubuc_deslaurier_dual" => (
            1,
            3,
            ternary_dd_dual_mask(),
            vec![kv(
                "sum_rule_order",
                4.0,
                "the symbol carries the factor (z^2+z+1)^4",
            )],
        ),
        "ternary_limit_d" => (
            1,
            3,
            ternary_limit_d_mask(),
            vec![kv(
                "sum_rule_order",
                5.0,
                "the symbol carries the factor (z^2+z+1)^5",
            )],
        ),
        _ => return None,
    };
    Some(entry)
}

fn daubechies_known(n: usize) -> Vec<KnownValue> {
    let table = [
        (2, 0.5500),
        (3, 1.0878),
        (4, 1.6179),
        (5, 1.9690),
        (6, 2.1891),
        (7, 2.4604),
        (8, 2.7608),
        (9, 3.0736),
        (10, 3.3614),
    ];
    table
        .iter()
        .find(|(order, _)| *order == n)
        .map(|&(_, alpha)| {
            vec![kv(
                "holder_exponent",
                alpha,
                "exact Hölder exponent of the order-n refinable function, four decimals",
            )]
        })
        .unwrap_or_default()
}

fn resolve_stationary(
    role: &str,
    requested: &Option<String>,
    default_name: &str,
) -> Result<(String, usize, i64, Mask)> {
    let name = requested.clone().unwrap_or_else(|| default_name.to_string());
    let (s, m, mask, _) = stationary_entry(&name).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "{role} must name a stationary catalogue scheme; got {name:?}, \
             available: {}",
            stationary_names().join(", ")
        ))
    })?;
    Ok((name, s, m, mask))
}

fn example1_scaled(params: &SchemeParams) -> Result<SchemeDescriptor> {
    let (base_name, s, m, mask) = resolve_stationary("base", &params.base, "chaikin")?;
    let gen_mask = mask.clone();
    let rule = move |k: usize| gen_mask.scaled(1.0 + 1.0 / k as f64).unwrap();
    let sequence = MaskSequence::new(
        Vec::new(),
        Tail::Generator {
            name: format!("example1_scaled({base_name})"),
            rule: Arc::new(rule),
        },
        vec![mask],
    )?;
    Ok(SchemeDescriptor {
        name: format!("example1_scaled({base_name})"),
        dimension: s,
        dilation: DilationSpec::isotropic(s, m)?,
        sequence,
        known_values: vec![kv(
            "mu_coefficient",
            2.0,
            "mu_k = 2/k for the default base; harmonic, hence not summable, and the \
             scheme diverges without re-normalization",
        )],
    })
}

fn example2_convex(params: &SchemeParams) -> Result<SchemeDescriptor> {
    let (a_name, s, m, a) = resolve_stationary("base", &params.base, "butterfly")?;
    let (b_name, s2, m2, b) = resolve_stationary("other", &params.other, "courant_box_spline")?;
    if s != s2 || m != m2 {
        return Err(Error::InvalidParameter(format!(
            "base {a_name:?} and other {b_name:?} disagree on dimension or dilation"
        )));
    }
    let (ga, gb) = (a.clone(), b.clone());
    let rule = move |k: usize| {
        let t = 1.0 / k as f64;
        mask_lin_comb(1.0 - t, &ga, t, &gb)
    };
    let sequence = MaskSequence::new(
        Vec::new(),
        Tail::Generator {
            name: format!("example2_convex({a_name},{b_name})"),
            rule: Arc::new(rule),
        },
        vec![a],
    )?;
    let known_values = if a_name == "butterfly" && b_name == "courant_box_spline" {
        vec![
            kv(
                "restricted_radius_v1",
                0.25,
                "the limit family is the butterfly transition family",
            ),
            kv("holder_exponent", 2.0, "C^1 limit, inherited from the limit family"),
        ]
    } else {
        Vec::new()
    };
    Ok(SchemeDescriptor {
        name: format!("example2_convex({a_name},{b_name})"),
        dimension: s,
        dilation: DilationSpec::isotropic(s, m)?,
        sequence,
        known_values,
    })
}

fn example3_alternating(params: &SchemeParams) -> Result<SchemeDescriptor> {
    let (a_name, s, m, a) = resolve_stationary("base", &params.base, "cubic_bspline")?;
    let (c_name, s2, m2, c) = resolve_stationary("other", &params.other, "fourpoint")?;
    if s != s2 || m != m2 {
        return Err(Error::InvalidParameter(format!(
            "base {a_name:?} and other {c_name:?} disagree on dimension or dilation"
        )));
    }
    let member = params.member.as_deref().unwrap_or("even");
    // Levels in the membership class use the base mask `a`, all others `c`.
    let cycle = match member {
        "even" => vec![c.clone(), a.clone()],
        "odd" => vec![a.clone(), c.clone()],
        _ => {
            return Err(Error::InvalidParameter(format!(
                "member must be \"even\" or \"odd\", got {member:?}"
            )))
        }
    };
    let sequence = MaskSequence::new(Vec::new(), Tail::Periodic(cycle), vec![a, c])?;
    let known_values = if c_name == "fourpoint" && member == "even" {
        match a_name.as_str() {
            "cubic_bspline" => vec![
                kv(
                    "fixture_joint_radius_v1",
                    0.353_857_164_6,
                    "joint spectral radius of the example3_cubic matrix fixture",
                ),
                kv(
                    "holder_lower_bound",
                    1.498_76,
                    "base-2 logarithm bound derived from the fixture radius",
                ),
            ],
            "quadratic_bspline" => vec![
                kv(
                    "fixture_joint_radius_v1",
                    0.350_451_826_5,
                    "joint spectral radius of the example3_quadratic matrix fixture",
                ),
                kv(
                    "holder_lower_bound",
                    1.512_71,
                    "base-2 logarithm bound derived from the fixture radius",
                ),
            ],
            _ => Vec::new(),
        }
    } else {
        Vec::new()
    };
    Ok(SchemeDescriptor {
        name: format!("example3_alternating({a_name},{c_name},{member})"),
        dimension: s,
        dilation: DilationSpec::isotropic(s, m)?,
        sequence,
        known_values,
    })
}

#[derive(Debug, Clone, Copy)]
enum TernaryLambda {
    Real(f64),
    Imaginary(f64),
}

impl TernaryLambda {
    fn from_params(params: &SchemeParams) -> Result<Self> {
        let re = params.lambda_re.unwrap_or(0.0);
        let im = params.lambda_im.unwrap_or(0.0);
        if re == 0.0 && im == 0.0 && params.lambda_re.is_none() && params.lambda_im.is_none() {
            return Ok(TernaryLambda::Real(1.0));
        }
        match (re, im) {
            (re, 0.0) if re > 0.0 => Ok(TernaryLambda::Real(re)),
            (0.0, im) if im > 0.0 => Ok(TernaryLambda::Imaginary(im)),
            _ => Err(Error::InvalidParameter(format!(
                "lambda = {re} + {im}i must lie on the positive real or positive \
                 imaginary axis"
            ))),
        }
    }
}

/// Blending weight w^(k) = cosh(3^-(k+1) lambda / 2); a purely imaginary
/// lambda = iy turns this into cos(3^-(k+1) y / 2). Either way w is real
/// and tends to 1.
fn ternary_w(lambda: TernaryLambda, k: usize) -> f64 {
    let t = 0.5 * 3f64.powi(-(k as i32 + 1));
    match lambda {
        TernaryLambda::Real(l) => (t * l).cosh(),
        TernaryLambda::Imaginary(y) => (t * y).cos(),
    }
}

fn ternary_level_mask(lambda: TernaryLambda, k: usize) -> Result<Mask> {
    let w = ternary_w(lambda, k);
    let coeffs = if k % 2 == 0 {
        ternary_c_coeffs(w)
    } else {
        ternary_d_coeffs(w)
    };
    let total: f64 = coeffs.iter().sum();
    if total.abs() < 1e-9 {
        return Err(Error::DegenerateMask(format!(
            "level-{k} ternary symbol has vanishing mean and cannot be normalized"
        )));
    }
    let scale = 3.0 / total;
    Mask::univariate(&coeffs.iter().map(|v| scale * v).collect::<Vec<_>>())
}

fn ternary_c_coeffs(w: f64) -> Vec<f64> {
    let w2 = w * w;
    let w3 = w2 * w;
    let w4 = w2 * w2;
    let w5 = w4 * w;
    let w6 = w4 * w2;
    let quartic = [
        1.0,
        4.0 * w2 - 2.0,
        16.0 * w4 - 16.0 * w2 + 3.0,
        4.0 * w2 - 2.0,
        1.0,
    ];
    let outer = 16.0 * w4 + 16.0 * w3 + 3.0;
    let middle =
        -64.0 * w6 - 64.0 * w5 + 32.0 * w4 + 32.0 * w3 - 12.0 * w2 - 12.0 * w - 6.0;
    let quadratic = [outer, middle, outer];
    convolve(
        &convolve(&convolve(&unit_core(2), &[1.0, 1.0]), &quartic),
        &quadratic,
    )
}

fn ternary_d_coeffs(w: f64) -> Vec<f64> {
    let w2 = w * w;
    let quartic = [1.0, 2.0 * w, 4.0 * w2 - 1.0, 2.0 * w, w];
    convolve(&convolve(&unit_core(3), &[1.0, 1.0]), &quartic)
}

fn example4_ternary(params: &SchemeParams) -> Result<SchemeDescriptor> {
    let lambda = TernaryLambda::from_params(params)?;
    // Degenerate normalization can only occur while w is still far from 1;
    // past this window w^(k) has contracted toward 1 where both symbol
    // families have mean bounded away from zero.
    for k in 1..=64 {
        ternary_level_mask(lambda, k)?;
    }
    let rule = move |k: usize| ternary_level_mask(lambda, k).unwrap();
    let name = match lambda {
        TernaryLambda::Real(l) => format!("example4_ternary(lambda={l})"),
        TernaryLambda::Imaginary(y) => format!("example4_ternary(lambda={y}i)"),
    };
    let sequence = MaskSequence::new(
        Vec::new(),
        Tail::Generator {
            name: name.clone(),
            rule: Arc::new(rule),
        },
        vec![ternary_dd_dual_mask(), ternary_limit_d_mask()],
    )?;
    Ok(SchemeDescriptor {
        name,
        dimension: 1,
        dilation: DilationSpec::isotropic(1, 3)?,
        sequence,
        known_values: vec![
            kv(
                "fixture_joint_radius_v2",
                0.049_587_25,
                "joint spectral radius of the example4 matrix fixture",
            ),
            kv(
                "holder_lower_bound",
                2.7343,
                "base-3 logarithm bound derived from the fixture radius",
            ),
        ],
    })
}

fn example5_perturbed_chaikin() -> Result<SchemeDescriptor> {
    let rule = |k: usize| {
        let t = 1.0 / k as f64;
        let q = 4f64.powi(-(k as i32));
        Mask::univariate(&[0.25 - t, 0.75 - t + q, 0.75 + t, 0.25 + t + q]).unwrap()
    };
    let sequence = MaskSequence::new(
        Vec::new(),
        Tail::Generator {
            name: "example5_perturbed_chaikin".into(),
            rule: Arc::new(rule),
        },
        vec![chaikin_mask()],
    )?;
    Ok(SchemeDescriptor {
        name: "example5_perturbed_chaikin".into(),
        dimension: 1,
        dilation: DilationSpec::isotropic(1, 2)?,
        sequence,
        known_values: vec![
            kv(
                "restricted_radius_v1",
                0.25,
                "the limit family is the chaikin transition pair",
            ),
            kv("holder_exponent", 2.0, "C^1 limit with exponent 2"),
            kv(
                "defect_decay_base",
                2.0,
                "mu_k = delta_k = 2^(1-2k) exactly at every level",
            ),
        ],
    })
}

fn example6_perturbed_loop() -> Result<SchemeDescriptor> {
    let base = loop_mask();
    let rule = move |k: usize| perturbed_loop_level(&base, k);
    let sequence = MaskSequence::new(
        Vec::new(),
        Tail::Generator {
            name: "example6_perturbed_loop".into(),
            rule: Arc::new(rule),
        },
        vec![loop_mask()],
    )?;
    Ok(SchemeDescriptor {
        name: "example6_perturbed_loop".into(),
        dimension: 2,
        dilation: DilationSpec::isotropic(2, 2)?,
        sequence,
        known_values: vec![
            kv(
                "restricted_radius_v1",
                0.25,
                "the limit family is the loop transition family",
            ),
            kv("holder_exponent", 2.0, "C^1 limit with exponent 2"),
            kv(
                "mu_scale",
                5.0,
                "mu_k = 5 * 2^-(2k+4) exactly at every level",
            ),
            kv(
                "delta_scale",
                6.0,
                "delta_k = 6 * 2^-(2k+4) exactly at every level",
            ),
        ],
    })
}

/// Level rule of the perturbed loop family. The three perturbation layers
/// are chosen so that mu_k = 5 * 2^-(2k+4) and delta_k = 6 * 2^-(2k+4)
/// hold exactly: the 1/k layer has vanishing mean, character sums, and
/// first moments; the 2^-k layer has vanishing mean and character sums but
/// first moment 6; the 4^-k layer has mean 5.
fn perturbed_loop_level(base: &Mask, k: usize) -> Mask {
    let layer_k: [[f64; 5]; 5] = [
        [0.0, 0.0, 1.0, -1.0, -1.0],
        [-1.0, -1.0, 1.0, 1.0, 0.0],
        [-1.0, 1.0, 2.0, 1.0, -1.0],
        [0.0, 1.0, 1.0, -1.0, -1.0],
        [-1.0, -1.0, 1.0, 0.0, 0.0],
    ];
    let inv_k = 1.0 / k as f64;
    let half_k = 2f64.powi(-(k as i32));
    let quarter_k = 4f64.powi(-(k as i32));
    let mut entries = Vec::with_capacity(25);
    for j in 0..5i64 {
        for i in 0..5i64 {
            let ridge = match (i, j) {
                (3, 0) => 3.0,
                (1, 0) => -3.0,
                _ => 0.0,
            };
            let speckle = match (i, j) {
                (1, 1) | (1, 2) | (1, 3) | (1, 4) | (3, 1) | (4, 3) => 1.0,
                (3, 2) => -1.0,
                _ => 0.0,
            };
            let v = 16.0 * base.coefficient(&[i, j])
                + inv_k * layer_k[j as usize][i as usize]
                + half_k * ridge
                + quarter_k * speckle;
            entries.push((vec![i, j], v / 16.0));
        }
    }
    Mask::new(2, entries).unwrap()
}

fn mask_lin_comb(ca: f64, a: &Mask, cb: f64, b: &Mask) -> Mask {
    let mut entries: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for (idx, v) in a.entries() {
        *entries.entry(idx.clone()).or_insert(0.0) += ca * v;
    }
    for (idx, v) in b.entries() {
        *entries.entry(idx.clone()).or_insert(0.0) += cb * v;
    }
    Mask::new(a.dim(), entries).unwrap()
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// (z^2 + z + 1)^pow as an ascending coefficient vector.
fn unit_core(pow: usize) -> Vec<f64> {
    let mut p = vec![1.0];
    for _ in 0..pow {
        p = convolve(&p, &[1.0, 1.0, 1.0]);
    }
    p
}

fn chaikin_mask() -> Mask {
    Mask::univariate(&[0.25, 0.75, 0.75, 0.25]).unwrap()
}

fn hat_mask() -> Mask {
    Mask::univariate(&[0.5, 1.0, 0.5]).unwrap()
}

fn cubic_bspline_mask() -> Mask {
    Mask::univariate(&[0.125, 0.5, 0.75, 0.5, 0.125]).unwrap()
}

fn fourpoint_mask() -> Mask {
    Mask::univariate(&[
        -1.0 / 16.0,
        0.0,
        9.0 / 16.0,
        1.0,
        9.0 / 16.0,
        0.0,
        -1.0 / 16.0,
    ])
    .unwrap()
}

/// Interpolatory two-direction stencil with tension weight 1/16 on the
/// three-direction grid, shifted from [-3,3]^2 onto {0,...,6}^2. Entries
/// are 16 a(alpha) at the unshifted index.
fn butterfly_mask() -> Mask {
    let entries: [(i64, i64, f64); 25] = [
        (0, 0, 16.0),
        (1, 0, 8.0),
        (-1, 0, 8.0),
        (-1, -2, 2.0),
        (1, 2, 2.0),
        (1, -2, -1.0),
        (-3, -2, -1.0),
        (3, 2, -1.0),
        (-1, 2, -1.0),
        (0, 1, 8.0),
        (0, -1, 8.0),
        (-2, -1, 2.0),
        (2, 1, 2.0),
        (-2, 1, -1.0),
        (-2, -3, -1.0),
        (2, 3, -1.0),
        (2, -1, -1.0),
        (1, 1, 8.0),
        (-1, -1, 8.0),
        (-1, 1, 2.0),
        (1, -1, 2.0),
        (1, 3, -1.0),
        (-1, -3, -1.0),
        (3, 1, -1.0),
        (-3, -1, -1.0),
    ];
    Mask::new(
        2,
        entries
            .iter()
            .map(|&(i, j, v)| (vec![i + 3, j + 3], v / 16.0)),
    )
    .unwrap()
}

/// Three-direction quartic box-spline mask, the coefficients of
/// (1/16)(1+z1)^2 (1+z2)^2 (z1+z2)^2 on {0,...,4}^2; rows[j][i] holds
/// 16 a(i, j).
fn loop_mask() -> Mask {
    let rows: [[f64; 5]; 5] = [
        [0.0, 0.0, 1.0, 2.0, 1.0],
        [0.0, 2.0, 6.0, 6.0, 2.0],
        [1.0, 6.0, 10.0, 6.0, 1.0],
        [2.0, 6.0, 6.0, 2.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
    ];
    Mask::new(
        2,
        rows.iter().enumerate().flat_map(|(j, row)| {
            row.iter()
                .enumerate()
                .map(move |(i, &v)| (vec![i as i64, j as i64], v / 16.0))
        }),
    )
    .unwrap()
}

/// Piecewise-linear box spline on the three-direction grid, the
/// coefficients of (1/2)(1+z1)(1+z2)(1+z1 z2).
fn courant_mask() -> Mask {
    let entries = [
        ((0, 0), 0.5),
        ((1, 0), 0.5),
        ((0, 1), 0.5),
        ((1, 1), 1.0),
        ((2, 1), 0.5),
        ((1, 2), 0.5),
        ((2, 2), 0.5),
    ];
    Mask::new(2, entries.iter().map(|&((i, j), v)| (vec![i, j], v))).unwrap()
}

/// Dual ternary 4-point mask: the coefficients of
/// -(1/1296)(z^2+z+1)^4 (z+1)(35 z^2 - 94 z + 35) on {0,...,11}.
fn ternary_dd_dual_mask() -> Mask {
    let p = convolve(
        &convolve(&unit_core(4), &[1.0, 1.0]),
        &[35.0, -94.0, 35.0],
    );
    Mask::univariate(&p.iter().map(|v| -v / 1296.0).collect::<Vec<_>>()).unwrap()
}

/// Ternary limit mask with symbol (1/162)(z^2+z+1)^5 (z+1) on {0,...,11}.
fn ternary_limit_d_mask() -> Mask {
    let p = convolve(&unit_core(5), &[1.0, 1.0]);
    Mask::univariate(&p.iter().map(|v| v / 162.0).collect::<Vec<_>>()).unwrap()
}

/// Names accepted by [`matrix_fixture`].
pub fn fixture_names() -> &'static [&'static str] {
    &["example3_cubic", "example3_quadratic", "example4"]
}

/// Hand-entered matrix families used as regression anchors for the
/// joint-spectral-radius engine. Entries are exact rationals evaluated in
/// one division each, so repeated constructions are bit-identical.
pub fn matrix_fixture(name: &str) -> Result<MatrixSet> {
    match name {
        "example3_cubic" => labeled_fixture(
            &["T1", "T2", "T3", "T4"],
            &[
                example3_matrix(1),
                example3_matrix(2),
                example3_matrix(3),
                example3_matrix(4),
            ],
        ),
        "example3_quadratic" => labeled_fixture(
            &["T1", "T2", "T5", "T6"],
            &[
                example3_matrix(1),
                example3_matrix(2),
                example3_matrix(5),
                example3_matrix(6),
            ],
        ),
        "example4" => {
            let coarse = [
                [
                    [35.0, 0.0, 0.0],
                    [-83.0, -83.0, -24.0],
                    [0.0, 35.0, -24.0],
                ],
                [
                    [-24.0, 35.0, 0.0],
                    [-24.0, -83.0, -83.0],
                    [0.0, 0.0, 35.0],
                ],
                [
                    [-83.0, -24.0, 35.0],
                    [35.0, -24.0, -83.0],
                    [0.0, 0.0, 0.0],
                ],
            ];
            let fine = [
                [[1.0, 0.0, 0.0], [5.0, 5.0, 3.0], [0.0, 1.0, 3.0]],
                [[3.0, 1.0, 0.0], [3.0, 5.0, 5.0], [0.0, 0.0, 0.0]],
                [[5.0, 3.0, 1.0], [1.0, 3.0, 5.0], [0.0, 0.0, 0.0]],
            ];
            let mut mats = Vec::with_capacity(6);
            for rows in &coarse {
                mats.push(matrix_3x3(rows, 1296.0));
            }
            for rows in &fine {
                mats.push(matrix_3x3(rows, 162.0));
            }
            MatrixSet::with_labels(
                mats,
                ["T1", "T2", "T3", "T4", "T5", "T6"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            )
        }
        _ => Err(Error::UnknownFixture(format!(
            "unknown fixture {name:?}; available: {}",
            fixture_names().join(", ")
        ))),
    }
}

fn labeled_fixture(labels: &[&str], mats: &[DMatrix<f64>]) -> Result<MatrixSet> {
    MatrixSet::with_labels(
        mats.to_vec(),
        labels.iter().map(|s| s.to_string()).collect(),
    )
}

fn matrix_3x3(rows: &[[f64; 3]; 3], denom: f64) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |r, c| rows[r][c] / denom)
}

fn example3_matrix(index: usize) -> DMatrix<f64> {
    let rows: [[f64; 4]; 4] = match index {
        1 => [
            [2.0, 2.0, 0.0, 0.0],
            [-1.0, 6.0, -1.0, 0.0],
            [0.0, 2.0, 2.0, 0.0],
            [0.0, -1.0, 6.0, -1.0],
        ],
        2 => [
            [-1.0, 6.0, -1.0, 0.0],
            [0.0, 2.0, 2.0, 0.0],
            [0.0, -1.0, 6.0, -1.0],
            [0.0, 0.0, 2.0, 2.0],
        ],
        3 => [
            [2.0, 0.0, 0.0, 0.0],
            [2.0, 4.0, 2.0, 0.0],
            [0.0, 0.0, 2.0, 4.0],
            [0.0, 0.0, 0.0, 0.0],
        ],
        4 => [
            [4.0, 2.0, 0.0, 0.0],
            [0.0, 2.0, 4.0, 2.0],
            [0.0, 0.0, 0.0, 2.0],
            [0.0, 0.0, 0.0, 0.0],
        ],
        5 => [
            [4.0, 0.0, 0.0, 0.0],
            [0.0, 4.0, 4.0, 0.0],
            [0.0, 0.0, 0.0, 4.0],
            [0.0, 0.0, 0.0, 0.0],
        ],
        6 => [
            [4.0, 4.0, 0.0, 0.0],
            [0.0, 0.0, 4.0, 4.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ],
        _ => unreachable!("fixture index out of range"),
    };
    DMatrix::from_fn(4, 4, |r, c| rows[r][c] / 16.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{defect_sequence, sum_rule_order, symbol_eval};
    use nalgebra::Complex;

    #[test]
    fn every_stationary_builtin_satisfies_order_one_sum_rules() {
        for name in stationary_names() {
            let d = builtin(name, &SchemeParams::default()).unwrap();
            let mask = d.sequence.level(1);
            let order = sum_rule_order(&mask, &d.dilation, 6).unwrap();
            assert!(order >= 1, "{name} has sum-rule order {order}");
        }
    }

    #[test]
    fn every_stationary_builtin_has_mean_det_m() {
        for name in stationary_names() {
            let d = builtin(name, &SchemeParams::default()).unwrap();
            let mask = d.sequence.level(1);
            let one = vec![Complex::new(1.0, 0.0); d.dimension];
            let total = symbol_eval(&mask, &one).unwrap().re;
            let det = d.dilation.det_abs() as f64;
            assert!(
                (total - det).abs() < 1e-12 * det,
                "{name} sums to {total}, expected {det}"
            );
        }
    }

    #[test]
    fn declared_limit_points_are_approached() {
        let nonstationary = [
            "example1_scaled",
            "example2_convex",
            "example3_alternating",
            "example4_ternary",
            "example5_perturbed_chaikin",
            "example6_perturbed_loop",
        ];
        for name in nonstationary {
            let d = builtin(name, &SchemeParams::default()).unwrap();
            d.sequence
                .verify_limit_points(64, 0.05)
                .unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn perturbed_chaikin_level_one_matches_the_closed_form() {
        let d = builtin("example5_perturbed_chaikin", &SchemeParams::default()).unwrap();
        let m1 = d.sequence.level(1);
        assert_eq!(m1.coefficient(&[0]), -0.75);
        assert_eq!(m1.coefficient(&[1]), 0.0);
        assert_eq!(m1.coefficient(&[2]), 1.75);
        assert_eq!(m1.coefficient(&[3]), 1.5);
        let far = d.sequence.level(40);
        assert!(far.sup_diff(&chaikin_mask()) < 0.03);
    }

    #[test]
    fn perturbed_loop_defects_match_the_closed_forms() {
        let d = builtin("example6_perturbed_loop", &SchemeParams::default()).unwrap();
        let ds = defect_sequence(&d.sequence, &d.dilation, 1, 12).unwrap();
        for k in 1..=12usize {
            let expected_mu = 5.0 * 2f64.powi(-(2 * k as i32 + 4));
            let expected_delta = 6.0 * 2f64.powi(-(2 * k as i32 + 4));
            assert!(
                (ds.mu[k - 1] - expected_mu).abs() < 1e-12,
                "mu_{k} = {} differs from {expected_mu}",
                ds.mu[k - 1]
            );
            assert!(
                (ds.delta[k - 1] - expected_delta).abs() < 1e-12,
                "delta_{k} = {} differs from {expected_delta}",
                ds.delta[k - 1]
            );
        }
    }

    #[test]
    fn perturbed_chaikin_defects_match_the_closed_forms() {
        let d = builtin("example5_perturbed_chaikin", &SchemeParams::default()).unwrap();
        let ds = defect_sequence(&d.sequence, &d.dilation, 1, 12).unwrap();
        for k in 1..=12usize {
            let expected = 2f64.powi(1 - 2 * k as i32);
            assert!((ds.mu[k - 1] - expected).abs() < 1e-12);
            assert!((ds.delta[k - 1] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn ternary_symbols_converge_to_the_declared_limits() {
        for params in [
            SchemeParams::default(),
            SchemeParams {
                lambda_im: Some(2.0),
                ..SchemeParams::default()
            },
        ] {
            let d = builtin("example4_ternary", &params).unwrap();
            let even = d.sequence.level(20);
            let odd = d.sequence.level(21);
            assert!(even.sup_diff(&ternary_dd_dual_mask()) < 1e-6);
            assert!(odd.sup_diff(&ternary_limit_d_mask()) < 1e-6);
        }
    }

    #[test]
    fn ternary_lambda_is_validated() {
        let bad = [
            SchemeParams {
                lambda_re: Some(-1.0),
                ..SchemeParams::default()
            },
            SchemeParams {
                lambda_re: Some(1.0),
                lambda_im: Some(1.0),
                ..SchemeParams::default()
            },
            SchemeParams {
                lambda_re: Some(0.0),
                lambda_im: Some(0.0),
                ..SchemeParams::default()
            },
        ];
        for params in bad {
            assert!(matches!(
                builtin("example4_ternary", &params),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn daubechies_two_sums_to_two() {
        let d = builtin(
            "daubechies",
            &SchemeParams {
                n: Some(2),
                ..SchemeParams::default()
            },
        )
        .unwrap();
        let mask = d.sequence.level(1);
        let total: f64 = mask.entries().map(|(_, v)| v).sum();
        assert!((total - 2.0).abs() < 1e-12);
        assert!(matches!(
            builtin("daubechies", &SchemeParams::default()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(matches!(
            builtin("no_such_scheme", &SchemeParams::default()),
            Err(Error::UnknownScheme(_))
        ));
        assert!(matches!(
            matrix_fixture("no_such_fixture"),
            Err(Error::UnknownFixture(_))
        ));
    }

    #[test]
    fn fixture_entries_match_their_tables() {
        let cubic = matrix_fixture("example3_cubic").unwrap();
        assert_eq!(cubic.len(), 4);
        let t1 = cubic.matrix(0);
        assert_eq!(t1[(0, 0)], 0.125);
        assert_eq!(t1[(0, 1)], 0.125);
        assert_eq!(t1[(0, 2)], 0.0);
        assert_eq!(t1[(0, 3)], 0.0);

        let quad = matrix_fixture("example3_quadratic").unwrap();
        assert_eq!(quad.labels()[2], "T5");
        let t5 = quad.matrix(2);
        assert_eq!(t5[(0, 0)], 0.25);
        assert_eq!(t5[(0, 1)], 0.0);

        let ternary = matrix_fixture("example4").unwrap();
        assert_eq!(ternary.len(), 6);
        let t4 = ternary.matrix(3);
        let expected = [[1.0, 0.0, 0.0], [5.0, 5.0, 3.0], [0.0, 1.0, 3.0]];
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(t4[(r, c)], expected[r][c] / 162.0);
            }
        }
    }

    #[test]
    fn butterfly_is_interpolatory() {
        let mask = butterfly_mask();
        assert_eq!(mask.coefficient(&[3, 3]), 1.0);
        for a1 in [-2i64, 0, 2] {
            for a2 in [-2i64, 0, 2] {
                if (a1, a2) == (0, 0) {
                    continue;
                }
                assert_eq!(
                    mask.coefficient(&[3 + a1, 3 + a2]),
                    0.0,
                    "even index ({a1},{a2})"
                );
            }
        }
    }

    #[test]
    fn alternating_scheme_cycles_and_records_both_limits() {
        let d = builtin("example3_alternating", &SchemeParams::default()).unwrap();
        assert_eq!(d.sequence.level(1), fourpoint_mask());
        assert_eq!(d.sequence.level(2), cubic_bspline_mask());
        assert_eq!(d.sequence.level(7), fourpoint_mask());
        assert_eq!(d.sequence.limit_points().len(), 2);
        let odd = builtin(
            "example3_alternating",
            &SchemeParams {
                member: Some("odd".into()),
                ..SchemeParams::default()
            },
        )
        .unwrap();
        assert_eq!(odd.sequence.level(1), cubic_bspline_mask());
    }

    #[test]
    fn convex_combination_starts_at_the_secondary_mask() {
        let d = builtin("example2_convex", &SchemeParams::default()).unwrap();
        assert_eq!(d.sequence.level(1), courant_mask());
        let far = d.sequence.level(200);
        assert!(far.sup_diff(&butterfly_mask()) < 0.01);
    }
}
