//! Masks, Laurent symbols and their derivatives at the dual points,
//! sum rules, approximate-sum-rule defect sequences, normalization,
//! and symmetric-root detection.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::lattice::{coset_representatives, monomials_up_to, DilationSpec};

/// A finitely supported mask with support inside {0, ..., N}^s.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    s: usize,
    coeffs: BTreeMap<Vec<i64>, f64>,
    support_bound: i64,
}

impl Mask {
    /// Build a mask from explicit (multi-index, coefficient) entries.
    /// Exact zeros are dropped; the support bound is the largest coordinate.
    pub fn new(s: usize, entries: impl IntoIterator<Item = (Vec<i64>, f64)>) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        let mut bound = 1i64;
        for (idx, c) in entries {
            if idx.len() != s {
                return Err(Error::SupportMismatch(format!(
                    "index {idx:?} has dimension {} but the mask is {s}-dimensional",
                    idx.len()
                )));
            }
            if idx.iter().any(|&v| v < 0) {
                return Err(Error::SupportMismatch(format!(
                    "index {idx:?} has a negative coordinate; shift the mask into the \
                     nonnegative box first"
                )));
            }
            if c == 0.0 {
                continue;
            }
            bound = bound.max(*idx.iter().max().unwrap());
            coeffs.insert(idx, c);
        }
        if coeffs.is_empty() {
            return Err(Error::DegenerateMask("all coefficients vanish".into()));
        }
        Ok(Mask {
            s,
            coeffs,
            support_bound: bound,
        })
    }

    /// Univariate mask from a coefficient slice at offsets 0, 1, ....
    pub fn univariate(values: &[f64]) -> Result<Self> {
        Mask::new(
            1,
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (vec![i as i64], v)),
        )
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    /// The bound N with support in {0, ..., N}^s.
    pub fn support_bound(&self) -> i64 {
        self.support_bound
    }

    pub fn coefficient(&self, idx: &[i64]) -> f64 {
        self.coeffs.get(idx).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<i64>, f64)> {
        self.coeffs.iter().map(|(k, &v)| (k, v))
    }

    pub fn support(&self) -> Vec<Vec<i64>> {
        self.coeffs.keys().cloned().collect()
    }

    pub fn one_norm(&self) -> f64 {
        self.coeffs.values().map(|v| v.abs()).sum()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Mask::new(
            self.s,
            self.coeffs.iter().map(|(k, &v)| (k.clone(), factor * v)),
        )
    }

    /// Sup-norm distance, counting indices present in either mask.
    pub fn sup_diff(&self, other: &Mask) -> f64 {
        let mut d: f64 = 0.0;
        for (idx, v) in &self.coeffs {
            d = d.max((v - other.coefficient(idx)).abs());
        }
        for (idx, v) in &other.coeffs {
            d = d.max((v - self.coefficient(idx)).abs());
        }
        d
    }
}

/// Evaluate the symbol a_*(z) = sum_alpha a(alpha) z^alpha.
pub fn symbol_eval(mask: &Mask, z: &[Complex<f64>]) -> Result<Complex<f64>> {
    symbol_derivative(mask, &vec![0; mask.dim()], z)
}

/// Term-wise derivative D^eta a_*(z) in the z-variables.
pub fn symbol_derivative(mask: &Mask, eta: &[usize], z: &[Complex<f64>]) -> Result<Complex<f64>> {
    if z.len() != mask.dim() || eta.len() != mask.dim() {
        return Err(Error::Shape(format!(
            "expected {}-dimensional point and multi-index",
            mask.dim()
        )));
    }
    if z.iter().any(|c| c.norm() == 0.0) {
        return Err(Error::InvalidParameter(
            "symbol evaluation requires nonzero coordinates".into(),
        ));
    }
    let mut total = Complex::new(0.0, 0.0);
    for (alpha, c) in mask.entries() {
        let mut term = Complex::new(c, 0.0);
        for i in 0..mask.dim() {
            // d^n/dz^n z^a = a (a-1) ... (a-n+1) z^{a-n}
            let a = alpha[i];
            let n = eta[i] as i64;
            let mut fall = 1.0;
            for t in 0..n {
                fall *= (a - t) as f64;
            }
            if fall == 0.0 {
                term = Complex::new(0.0, 0.0);
                break;
            }
            term *= fall * z[i].powi((a - n) as i32);
        }
        total += term;
    }
    Ok(total)
}

/// 1-norm of the term-wise differentiated coefficient sequence; the natural
/// scale against which "D^eta a_* vanishes" can be tested in floating point.
/// For eta = 0 this is the mask 1-norm.
fn derivative_scale(mask: &Mask, eta: &[usize]) -> f64 {
    mask.entries()
        .map(|(alpha, c)| {
            let mut f = c.abs();
            for i in 0..mask.dim() {
                for t in 0..eta[i] as i64 {
                    f *= (alpha[i] - t).abs().max(1) as f64;
                }
            }
            f
        })
        .sum()
}

/// Largest order ell + 1 such that a_*(1) = m^s and all derivatives
/// D^eta a_* with |eta| <= ell vanish at every nontrivial dual point.
/// Returns 0 when even order 1 fails.
pub fn sum_rule_order(mask: &Mask, d: &DilationSpec, max_ell: usize) -> Result<usize> {
    let cosets = coset_representatives(d);
    let one = vec![Complex::new(1.0, 0.0); mask.dim()];
    let at_one = symbol_eval(mask, &one)?;
    if (at_one - Complex::new(d.det_abs() as f64, 0.0)).norm() > 1e-10 * mask.one_norm() {
        return Ok(0);
    }
    for ell in 0..=max_ell {
        for eta in crate::lattice::monomials_of_degree(mask.dim(), ell) {
            let tol = 1e-10 * derivative_scale(mask, &eta);
            for z in cosets.nontrivial_dual_points() {
                if symbol_derivative(mask, &eta, z)?.norm() > tol {
                    return Ok(ell);
                }
            }
        }
    }
    Ok(max_ell + 1)
}

/// The tail rule generating mask levels beyond the explicit prefix.
#[derive(Clone)]
pub enum Tail {
    /// Stationary from some level on.
    Constant(Mask),
    /// Cycles through the list.
    Periodic(Vec<Mask>),
    /// Arbitrary level rule; must be deterministic.
    Generator {
        name: String,
        rule: Arc<dyn Fn(usize) -> Mask + Send + Sync>,
    },
}

impl fmt::Debug for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tail::Constant(_) => write!(f, "Tail::Constant"),
            Tail::Periodic(v) => write!(f, "Tail::Periodic({})", v.len()),
            Tail::Generator { name, .. } => write!(f, "Tail::Generator({name})"),
        }
    }
}

/// A level-indexed mask sequence a^{(k)}, k >= 1, with its declared set of
/// limit points.
#[derive(Debug, Clone)]
pub struct MaskSequence {
    prefix: Vec<Mask>,
    tail: Tail,
    limit_points: Vec<Mask>,
}

impl MaskSequence {
    pub fn new(prefix: Vec<Mask>, tail: Tail, limit_points: Vec<Mask>) -> Result<Self> {
        let seq = MaskSequence {
            prefix,
            tail,
            limit_points,
        };
        let s = seq.level(1).dim();
        let mut n = 1i64;
        for k in 1..=8 {
            let mk = seq.level(k);
            if mk.dim() != s {
                return Err(Error::SupportMismatch(format!(
                    "level {k} mask has dimension {} but the sequence is {s}-dimensional",
                    mk.dim()
                )));
            }
            n = n.max(mk.support_bound());
        }
        for a in &seq.limit_points {
            n = n.max(a.support_bound());
        }
        for k in 9..=16 {
            let mk = seq.level(k);
            if mk.dim() != s || mk.support_bound() > n {
                return Err(Error::SupportMismatch(format!(
                    "level {k} mask leaves the shared support box {{0,...,{n}}}^{s}"
                )));
            }
        }
        for a in &seq.limit_points {
            if a.dim() != s {
                return Err(Error::SupportMismatch(
                    "limit point dimension differs from the sequence".into(),
                ));
            }
        }
        Ok(seq)
    }

    /// Stationary scheme: one mask at every level, which is its own limit.
    pub fn stationary(mask: Mask) -> Result<Self> {
        let limits = vec![mask.clone()];
        MaskSequence::new(Vec::new(), Tail::Constant(mask), limits)
    }

    /// The mask used at refinement level k (1-based).
    pub fn level(&self, k: usize) -> Mask {
        assert!(k >= 1, "levels are 1-based");
        if k <= self.prefix.len() {
            return self.prefix[k - 1].clone();
        }
        match &self.tail {
            Tail::Constant(m) => m.clone(),
            Tail::Periodic(list) => list[(k - self.prefix.len() - 1) % list.len()].clone(),
            Tail::Generator { rule, .. } => rule(k),
        }
    }

    pub fn limit_points(&self) -> &[Mask] {
        &self.limit_points
    }

    pub fn dim(&self) -> usize {
        self.level(1).dim()
    }

    /// Largest support bound over the declared limit points and early levels.
    pub fn support_bound(&self) -> i64 {
        let mut n = (1..=8).map(|k| self.level(k).support_bound()).max().unwrap();
        for a in &self.limit_points {
            n = n.max(a.support_bound());
        }
        n
    }

    /// Check that each declared limit point is approached by the sequence
    /// within `tol` somewhere in levels window/2 ..= window.
    pub fn verify_limit_points(&self, window: usize, tol: f64) -> Result<()> {
        if self.limit_points.is_empty() {
            return Err(Error::MissingLimitPoints);
        }
        for (i, a) in self.limit_points.iter().enumerate() {
            let best = (window / 2..=window)
                .map(|k| self.level(k.max(1)).sup_diff(a))
                .fold(f64::INFINITY, f64::min);
            if best > tol {
                return Err(Error::InvalidParameter(format!(
                    "declared limit point {i} is not approached by the sequence \
                     (closest sup-distance {best:.3e} over levels {}..={window})",
                    window / 2
                )));
            }
        }
        Ok(())
    }

    /// Rescale every level by m^s / a_*^{(k)}(1), see `normalize_sequence`.
    fn rescaled(&self, d: &DilationSpec) -> Result<MaskSequence> {
        let target = d.det_abs() as f64;
        let scale = move |m: &Mask| -> Result<Mask> {
            let one = vec![Complex::new(1.0, 0.0); m.dim()];
            let v = symbol_eval(m, &one)?;
            if v.norm() < 1e-14 {
                return Err(Error::DegenerateMask(
                    "symbol vanishes at z = 1; cannot normalize".into(),
                ));
            }
            m.scaled(target / v.re)
        };
        let prefix = self
            .prefix
            .iter()
            .map(&scale)
            .collect::<Result<Vec<_>>>()?;
        let tail = match &self.tail {
            Tail::Constant(m) => Tail::Constant(scale(m)?),
            Tail::Periodic(list) => {
                Tail::Periodic(list.iter().map(&scale).collect::<Result<Vec<_>>>()?)
            }
            Tail::Generator { name, rule } => {
                let inner = rule.clone();
                let t = target;
                Tail::Generator {
                    name: format!("{name}/normalized"),
                    rule: Arc::new(move |k| {
                        let m = inner(k);
                        let one = vec![Complex::new(1.0, 0.0); m.dim()];
                        let v = symbol_eval(&m, &one).expect("level mask evaluation");
                        m.scaled(t / v.re).expect("level mask rescale")
                    }),
                }
            }
        };
        let limits = self
            .limit_points
            .iter()
            .map(&scale)
            .collect::<Result<Vec<_>>>()?;
        MaskSequence::new(prefix, tail, limits)
    }
}

/// Approximate-sum-rule defects per level: mu_k measures the failure of
/// a_*(1) = m^s, delta_k the scaled failure of derivative conditions at the
/// nontrivial dual points, and sigma_k = m^{k ell} delta_k is the series
/// whose summability the theorems need.
#[derive(Debug, Clone)]
pub struct DefectSequence {
    pub ell: usize,
    pub mu: Vec<f64>,
    pub delta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub horizon: usize,
    pub scale_m: f64,
}

/// Compute mu_k, delta_k, sigma_k for k = 1 ..= horizon, with
/// delta_k = max_{|eta| <= ell} max_{eps} |m^{-k |eta|} D^eta a_*^{(k)}(eps)|.
pub fn defect_sequence(
    seq: &MaskSequence,
    d: &DilationSpec,
    ell: usize,
    horizon: usize,
) -> Result<DefectSequence> {
    if horizon < 1 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if ell > 0 && d.isotropic_m().is_none() {
        return Err(Error::Unsupported(
            "derivative sum rules of order > 1 need an isotropic dilation M = mI".into(),
        ));
    }
    let m = d.scale_factor();
    let target = d.det_abs() as f64;
    let cosets = coset_representatives(d);
    let etas = monomials_up_to(seq.dim(), ell);
    let one = vec![Complex::new(1.0, 0.0); seq.dim()];
    let mut mu = Vec::with_capacity(horizon);
    let mut delta = Vec::with_capacity(horizon);
    let mut sigma = Vec::with_capacity(horizon);
    for k in 1..=horizon {
        let mask = seq.level(k);
        // Values below the evaluation's floating-point resolution are
        // reported as exact zeros rather than rounding noise; the resolution
        // of each derivative scales with its term-wise coefficient sizes.
        let mut mk = (symbol_eval(&mask, &one)?.re - target).abs();
        if mk < 1e-15 * mask.one_norm().max(1.0) {
            mk = 0.0;
        }
        mu.push(mk);
        let mut dk: f64 = 0.0;
        for eta in &etas {
            let order: usize = eta.iter().sum();
            let w = m.powi(-((k * order) as i32));
            let floor = 1e-15 * derivative_scale(&mask, eta).max(1.0);
            for z in cosets.nontrivial_dual_points() {
                let raw = symbol_derivative(&mask, eta, z)?.norm();
                let v = if raw < floor { 0.0 } else { w * raw };
                dk = dk.max(v);
            }
        }
        delta.push(dk);
        sigma.push(m.powi((k * ell) as i32) * dk);
    }
    Ok(DefectSequence {
        ell,
        mu,
        delta,
        sigma,
        horizon,
        scale_m: m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Satisfied => write!(f, "satisfied"),
            Verdict::Violated => write!(f, "violated"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Decay model fitted to the tail of a positive sequence.
#[derive(Debug, Clone, Copy)]
pub enum FitModel {
    /// The sequence is identically zero on the fitted window.
    Zero,
    /// v_k ~ C ratio^k.
    Geometric { ratio: f64 },
    /// v_k ~ C k^{-power}.
    Polynomial { power: f64 },
}

/// Per-series fit with the classification it implies.
#[derive(Debug, Clone, Copy)]
pub struct SeriesFit {
    pub verdict: Verdict,
    pub model: FitModel,
    pub residual: f64,
}

/// Summability verdict for a defect sequence, with the decay-rate estimates
/// the regularity theorems consume.
#[derive(Debug, Clone)]
pub struct SummabilityReport {
    pub verdict: Verdict,
    pub mu: SeriesFit,
    pub sigma: SeriesFit,
    /// Estimate of limsup_k delta_k^{1/k}; 0 for identically zero defects.
    pub limsup_delta_root: f64,
    /// Estimate of -limsup_k (log_m delta_k)/k; +infinity for zero defects.
    pub neg_log_m_delta_rate: f64,
}

pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    (slope, intercept, rss)
}

/// Defect values below this are f64 cancellation noise, not signal: the
/// character sums behind them add O(1) coefficients, so their absolute error
/// is a small multiple of machine epsilon. Fits must not see such entries.
pub(crate) const NOISE_FLOOR: f64 = 1e-12;

/// Points (k, ln v_k) used for decay fits: the above-noise entries of the
/// tail window (last half), falling back to all above-noise entries when the
/// tail has fewer than four.
fn log_points(values: &[f64]) -> Vec<(f64, f64)> {
    let positive = |from: usize| -> Vec<(f64, f64)> {
        values
            .iter()
            .enumerate()
            .skip(from)
            .filter(|(_, &v)| v > NOISE_FLOOR)
            .map(|(i, &v)| ((i + 1) as f64, v.ln()))
            .collect()
    };
    let tail = positive(values.len() / 2);
    if tail.len() >= 4 {
        tail
    } else {
        positive(0)
    }
}

/// Fit both a geometric and a polynomial decay model on the tail window and
/// classify by the better-fitting one.
fn classify_series(values: &[f64]) -> SeriesFit {
    let pts = log_points(values);
    if pts.is_empty() {
        return SeriesFit {
            verdict: Verdict::Satisfied,
            model: FitModel::Zero,
            residual: 0.0,
        };
    }
    if pts.len() < 2 {
        return SeriesFit {
            verdict: Verdict::Inconclusive,
            model: FitModel::Geometric { ratio: f64::NAN },
            residual: f64::NAN,
        };
    }
    let ks: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let logks: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (g_slope, _, g_rss) = linear_fit(&ks, &ys);
    let (p_slope, _, p_rss) = linear_fit(&logks, &ys);
    if g_rss <= p_rss {
        let ratio = g_slope.exp();
        SeriesFit {
            verdict: if ratio < 0.999 {
                Verdict::Satisfied
            } else {
                Verdict::Inconclusive
            },
            model: FitModel::Geometric { ratio },
            residual: g_rss,
        }
    } else {
        let power = -p_slope;
        SeriesFit {
            verdict: if power <= 1.05 {
                Verdict::Violated
            } else {
                Verdict::Inconclusive
            },
            model: FitModel::Polynomial { power },
            residual: p_rss,
        }
    }
}

/// Heuristic summability verdict for approximate sum rules: both
/// sum mu_k and sum m^{k ell} delta_k must look summable.
pub fn approximate_sum_rule_verdict(ds: &DefectSequence) -> SummabilityReport {
    let mu = classify_series(&ds.mu);
    let sigma = classify_series(&ds.sigma);
    let verdict = match (mu.verdict, sigma.verdict) {
        (Verdict::Violated, _) | (_, Verdict::Violated) => Verdict::Violated,
        (Verdict::Satisfied, Verdict::Satisfied) => Verdict::Satisfied,
        _ => Verdict::Inconclusive,
    };
    // Rate estimates always come from the geometric view of delta.
    let pts = log_points(&ds.delta);
    let (limsup, neg_rate) = if pts.len() < 2 {
        (0.0, f64::INFINITY)
    } else {
        let ks: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let (slope, _, _) = linear_fit(&ks, &ys);
        (slope.exp(), -slope / ds.scale_m.ln())
    };
    SummabilityReport {
        verdict,
        mu,
        sigma,
        limsup_delta_root: limsup,
        neg_log_m_delta_rate: neg_rate,
    }
}

/// Rescale all levels so that a_*^{(k)}(1) = m^s. Refused when the mu_k are
/// not summable, because then the rescaling changes the scheme; `force`
/// overrides.
pub fn normalize_sequence(
    seq: &MaskSequence,
    d: &DilationSpec,
    force: bool,
) -> Result<MaskSequence> {
    let ds = defect_sequence(seq, d, 0, 40)?;
    let report = approximate_sum_rule_verdict(&ds);
    if report.mu.verdict == Verdict::Violated && !force {
        let detail = match report.mu.model {
            FitModel::Polynomial { power } => {
                format!("mu_k decays like k^-{power:.2}")
            }
            _ => "mu_k decays too slowly".into(),
        };
        return Err(Error::NormalizationRefused(detail));
    }
    seq.rescaled(d)
}

/// All pairs {z, -z} of roots of the algebraic polynomial sum a(alpha) z^alpha
/// that both lie on the unit circle within `tol`. An empty list certifies the
/// no-symmetric-roots stability hypothesis for univariate masks.
pub fn symmetric_roots_on_circle(
    mask: &Mask,
    tol: f64,
) -> Result<Vec<(Complex<f64>, Complex<f64>)>> {
    if mask.dim() != 1 {
        return Err(Error::Unsupported(
            "symmetric-root detection is univariate only".into(),
        ));
    }
    let roots = polynomial_roots(&univariate_coeffs(mask));
    let mut pairs = Vec::new();
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let (z1, z2) = (roots[i], roots[j]);
            if (z1 + z2).norm() < tol && (z1.norm() - 1.0).abs() < tol && (z2.norm() - 1.0).abs() < tol
            {
                pairs.push((z1, z2));
            }
        }
    }
    Ok(pairs)
}

/// Dense coefficient vector c[0..=deg] with the leading zero-power part
/// stripped, so roots exclude the artificial z = 0.
fn univariate_coeffs(mask: &Mask) -> Vec<f64> {
    let lo = mask.support().iter().map(|p| p[0]).min().unwrap();
    let hi = mask.support_bound();
    (lo..=hi).map(|i| mask.coefficient(&[i])).collect()
}

/// Roots of a real polynomial via the companion matrix.
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let mut c = coeffs.to_vec();
    while let Some(&last) = c.last() {
        if last == 0.0 && c.len() > 1 {
            c.pop();
        } else {
            break;
        }
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    comp.complex_eigenvalues().iter().copied().collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// The classical Daubechies mask of order n (2n coefficients, a_*(1) = 2),
/// built by spectral factorization of the half-band polynomial. Roots are
/// taken outside the unit disk, which yields the extremal-phase filter whose
/// first coefficient for n = 2 is (1 + sqrt 3)/4.
pub fn daubechies_mask(n: usize) -> Result<Mask> {
    if !(2..=10).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "daubechies order {n} outside the supported range 2..=10"
        )));
    }
    // P(y) = sum_{k<n} C(n-1+k, k) y^k satisfies the half-band identity.
    let p: Vec<f64> = (0..n).map(|k| binomial(n - 1 + k, k)).collect();
    let dp: Vec<f64> = (1..n).map(|k| p[k] * k as f64).collect();
    let horner = |c: &[f64], z: Complex<f64>| -> Complex<f64> {
        c.iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &ci| acc * z + ci)
    };
    let mut y_roots = polynomial_roots(&p);
    for y in &mut y_roots {
        // Newton polish; eigenvalue-level accuracy is not quite enough for
        // the high-order derivative checks downstream.
        for _ in 0..2 {
            *y -= horner(&p, *y) / horner(&dp, *y);
        }
    }
    y_roots.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("finite roots")
    });
    // Each y gives the pair z, 1/z via z^2 - (2 - 4y) z + 1 = 0; keep |z| > 1.
    let mut q = vec![Complex::new(1.0, 0.0)];
    for y in y_roots {
        let b = Complex::new(2.0, 0.0) - 4.0 * y;
        let disc = (b * b - Complex::new(4.0, 0.0)).sqrt();
        let z1 = (b + disc) / 2.0;
        let z2 = (b - disc) / 2.0;
        let z = if z1.norm() > 1.0 { z1 } else { z2 };
        let mut next = vec![Complex::new(0.0, 0.0); q.len() + 1];
        for (i, &qc) in q.iter().enumerate() {
            next[i] -= qc * z;
            next[i + 1] += qc;
        }
        q = next;
    }
    let q_at_one: Complex<f64> = q.iter().sum();
    let q_real: Vec<f64> = q.iter().map(|c| (c / q_at_one).re).collect();
    // a_*(z) = 2 ((1+z)/2)^n q(z) with q(1) = 1.
    let scale = 2.0 / (2.0f64).powi(n as i32);
    let mut a = vec![0.0; n + q_real.len()];
    for i in 0..=n {
        let b = binomial(n, i) * scale;
        for (j, &qc) in q_real.iter().enumerate() {
            a[i + j] += b * qc;
        }
    }
    Mask::univariate(&a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::DilationSpec;

    fn chaikin() -> Mask {
        Mask::univariate(&[0.25, 0.75, 0.75, 0.25]).unwrap()
    }

    fn cubic_bspline() -> Mask {
        Mask::univariate(&[0.125, 0.5, 0.75, 0.5, 0.125]).unwrap()
    }

    fn fourpoint() -> Mask {
        let w = 1.0 / 16.0;
        Mask::univariate(&[-w, 0.0, 9.0 * w, 1.0, 9.0 * w, 0.0, -w]).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn symbol_values() {
        assert_eq!(symbol_eval(&chaikin(), &[c(1.0, 0.0)]).unwrap().re, 2.0);
        assert!(symbol_eval(&chaikin(), &[c(-1.0, 0.0)]).unwrap().norm() < 1e-15);
        let v = symbol_eval(&cubic_bspline(), &[c(0.0, 1.0)]).unwrap();
        assert!((v - c(-0.5, 0.0)).norm() < 1e-14);
        assert!(symbol_eval(&chaikin(), &[c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn symbol_derivatives() {
        let cubic = cubic_bspline();
        let d1 = symbol_derivative(&cubic, &[1], &[c(-1.0, 0.0)]).unwrap();
        assert!(d1.norm() < 1e-14);
        let d4 = symbol_derivative(&cubic, &[4], &[c(-1.0, 0.0)]).unwrap();
        assert!((d4.re - 3.0).abs() < 1e-12);
        let sq = Mask::univariate(&[0.0, 0.0, 1.0]).unwrap();
        let d = symbol_derivative(&sq, &[1], &[c(1.0, 0.0)]).unwrap();
        assert!((d.re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mask = fourpoint();
        let h = 1e-5;
        for z0 in [0.7, 1.0, -1.0] {
            let exact = symbol_derivative(&mask, &[1], &[c(z0, 0.0)]).unwrap();
            let fp = symbol_eval(&mask, &[c(z0 + h, 0.0)]).unwrap();
            let fm = symbol_eval(&mask, &[c(z0 - h, 0.0)]).unwrap();
            let approx = (fp - fm) / (2.0 * h);
            let scale = exact.norm().max(1.0);
            assert!((exact - approx).norm() / scale < 1e-6);
        }
    }

    #[test]
    fn sum_rule_orders() {
        let d = DilationSpec::isotropic(1, 2).unwrap();
        assert_eq!(sum_rule_order(&cubic_bspline(), &d, 8).unwrap(), 4);
        assert_eq!(sum_rule_order(&chaikin(), &d, 8).unwrap(), 3);
        assert_eq!(sum_rule_order(&fourpoint(), &d, 8).unwrap(), 4);
        let hat = Mask::univariate(&[0.5, 1.0, 0.5]).unwrap();
        assert_eq!(sum_rule_order(&hat, &d, 8).unwrap(), 2);
        let off = Mask::univariate(&[1.0, 0.5]).unwrap();
        assert_eq!(sum_rule_order(&off, &d, 8).unwrap(), 0);
    }

    fn perturbed_chaikin() -> MaskSequence {
        // Level-k mask {1/4 - 1/k, 3/4 - 1/k + 4^-k, 3/4 + 1/k, 1/4 + 1/k + 4^-k}.
        let rule = Arc::new(|k: usize| {
            let t = 1.0 / k as f64;
            let e = 0.25f64.powi(k as i32);
            Mask::univariate(&[0.25 - t, 0.75 - t + e, 0.75 + t, 0.25 + t + e]).unwrap()
        });
        MaskSequence::new(
            Vec::new(),
            Tail::Generator {
                name: "perturbed-chaikin".into(),
                rule,
            },
            vec![chaikin()],
        )
        .unwrap()
    }

    fn inflated_chaikin() -> MaskSequence {
        let rule = Arc::new(|k: usize| {
            chaikin().scaled(1.0 + 1.0 / k as f64).unwrap()
        });
        MaskSequence::new(
            Vec::new(),
            Tail::Generator {
                name: "inflated-chaikin".into(),
                rule,
            },
            vec![chaikin()],
        )
        .unwrap()
    }

    #[test]
    fn stationary_defects_vanish() {
        let d = DilationSpec::isotropic(1, 2).unwrap();
        let seq = MaskSequence::stationary(cubic_bspline()).unwrap();
        let ds = defect_sequence(&seq, &d, 2, 12).unwrap();
        assert!(ds.mu.iter().all(|&v| v == 0.0));
        assert!(ds.delta.iter().all(|&v| v < 1e-15));
        let report = approximate_sum_rule_verdict(&ds);
        assert_eq!(report.verdict, Verdict::Satisfied);
        assert_eq!(report.limsup_delta_root, 0.0);
        assert!(report.neg_log_m_delta_rate.is_infinite());
    }

    #[test]
    fn perturbed_chaikin_defects_match_closed_form() {
        let d = DilationSpec::isotropic(1, 2).unwrap();
        let seq = perturbed_chaikin();
        let ds = defect_sequence(&seq, &d, 1, 12).unwrap();
        for k in 1..=12usize {
            let expect = 2.0f64.powi(-(2 * k as i32) + 1);
            assert!((ds.mu[k - 1] - expect).abs() < 1e-12, "mu at k={k}");
            assert!((ds.delta[k - 1] - expect).abs() < 1e-12, "delta at k={k}");
            assert_eq!(ds.sigma[k - 1], 2.0f64.powi(k as i32) * ds.delta[k - 1]);
        }
        let ds40 = defect_sequence(&seq, &d, 1, 40).unwrap();
        let report = approximate_sum_rule_verdict(&ds40);
        assert_eq!(report.verdict, Verdict::Satisfied);
        assert!((report.limsup_delta_root - 0.25).abs() < 1e-3);
        assert!((report.neg_log_m_delta_rate - 2.0).abs() < 1e-2);
    }

    #[test]
    fn slow_mu_decay_is_violated() {
        let d = DilationSpec::isotropic(1, 2).unwrap();
        let ds = defect_sequence(&inflated_chaikin(), &d, 1, 40).unwrap();
        for k in 1..=12usize {
            assert!((ds.mu[k - 1] - 2.0 / k as f64).abs() < 1e-12);
            assert_eq!(ds.delta[k - 1], 0.0);
        }
        let report = approximate_sum_rule_verdict(&ds);
        assert_eq!(report.verdict, Verdict::Violated);
        assert_eq!(report.mu.verdict, Verdict::Violated);
        assert_eq!(report.sigma.verdict, Verdict::Satisfied);
    }

    #[test]
    fn normalization_rescales_and_is_idempotent() {
        let d = DilationSpec::isotropic(1, 2).unwrap();
        let seq = perturbed_chaikin();
        let old = defect_sequence(&seq, &d, 1, 10).unwrap();
        let normalized = normalize_sequence(&seq, &d, false).unwrap();
        let ds = defect_sequence(&normalized, &d, 1, 10).unwrap();
        for k in 0..10 {
            assert!(ds.mu[k] < 1e-13);
            assert!(ds.delta[k] <= old.delta[k] + 1e-15);
        }
        let twice = normalize_sequence(&normalized, &d, false).unwrap();
        for k in 1..=6 {
            assert!(normalized.level(k).sup_diff(&twice.level(k)) < 1e-14);
        }
        let stationary = MaskSequence::stationary(chaikin()).unwrap();
        let same = normalize_sequence(&stationary, &d, false).unwrap();
        assert!(same.level(3).sup_diff(&chaikin()) < 1e-15);
    }

    #[test]
    fn normalization_refuses_nonsummable_mu() {
        let d = DilationSpec::isotropic(1, 2).unwrap();
        let seq = inflated_chaikin();
        let err = normalize_sequence(&seq, &d, false);
        assert!(matches!(err, Err(Error::NormalizationRefused(_))));
        let forced = normalize_sequence(&seq, &d, true).unwrap();
        assert!(forced.level(5).sup_diff(&chaikin()) < 1e-13);
    }

    #[test]
    fn symmetric_root_pairs() {
        let pm = Mask::new(1, vec![(vec![0], -1.0), (vec![2], 1.0)]).unwrap();
        let pairs = symmetric_roots_on_circle(&pm, 1e-8).unwrap();
        assert_eq!(pairs.len(), 1);
        let (z1, z2) = pairs[0];
        assert!((z1 + z2).norm() < 1e-10);
        assert!(symmetric_roots_on_circle(&cubic_bspline(), 1e-8)
            .unwrap()
            .is_empty());
        assert!(symmetric_roots_on_circle(&daubechies_mask(2).unwrap(), 1e-8)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn daubechies_construction() {
        let d2 = daubechies_mask(2).unwrap();
        let r3 = 3.0f64.sqrt();
        let expect = [(1.0 + r3) / 4.0, (3.0 + r3) / 4.0, (3.0 - r3) / 4.0, (1.0 - r3) / 4.0];
        for (i, &e) in expect.iter().enumerate() {
            assert!((d2.coefficient(&[i as i64]) - e).abs() < 1e-12);
        }
        let d = DilationSpec::isotropic(1, 2).unwrap();
        for n in 2..=10usize {
            let mask = daubechies_mask(n).unwrap();
            let sum = symbol_eval(&mask, &[c(1.0, 0.0)]).unwrap();
            assert!((sum.re - 2.0).abs() < 1e-9, "n = {n}");
            assert_eq!(sum_rule_order(&mask, &d, 12).unwrap(), n, "n = {n}");
            // Orthonormality: sum_alpha a(alpha) a(alpha + 2 beta) = 2 delta_beta.
            for beta in -(n as i64)..=(n as i64) {
                let ip: f64 = (0..2 * n as i64)
                    .map(|al| mask.coefficient(&[al]) * mask.coefficient(&[al + 2 * beta]))
                    .sum();
                let target = if beta == 0 { 2.0 } else { 0.0 };
                assert!((ip - target).abs() < 1e-8, "n = {n}, beta = {beta}");
            }
        }
        assert!(daubechies_mask(1).is_err());
        assert!(daubechies_mask(11).is_err());
    }

    #[test]
    fn mask_validation() {
        assert!(Mask::new(1, vec![(vec![-1], 1.0)]).is_err());
        assert!(Mask::new(1, vec![(vec![0], 0.0)]).is_err());
        assert!(Mask::new(2, vec![(vec![0], 1.0)]).is_err());
    }
}
