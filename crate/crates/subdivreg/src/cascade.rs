//! Running the subdivision recursion itself: exact refinement steps from
//! delta data, dyadic samples of basic limit functions, truncated Fourier
//! products, and the empirical diagnostics built on them.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::lattice::DilationSpec;
use crate::symbol::{
    approximate_sum_rule_verdict, defect_sequence, linear_fit, Mask, MaskSequence, Verdict,
};

/// Finitely supported data c^{(k)} on the level-k grid M^{-k} Z^s. Indices
/// not present in the map are zero; each refinement step grows the support
/// by at most the mask support after dilation.
#[derive(Debug, Clone)]
pub struct RefinementData {
    pub label: String,
    pub dim: usize,
    pub level: usize,
    pub values: BTreeMap<Vec<i64>, f64>,
}

impl RefinementData {
    /// The delta sequence at the origin, level 0.
    pub fn delta(dim: usize) -> Self {
        let mut values = BTreeMap::new();
        values.insert(vec![0; dim], 1.0);
        RefinementData {
            label: "delta".into(),
            dim,
            level: 0,
            values,
        }
    }

    pub fn value(&self, idx: &[i64]) -> f64 {
        self.values.get(idx).copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.values().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Sup-norm difference on the union of both supports; only meaningful
    /// when both sides live on the same level grid.
    pub fn sup_diff(&self, other: &RefinementData) -> f64 {
        let mut d: f64 = 0.0;
        for (idx, v) in &self.values {
            d = d.max((v - other.value(idx)).abs());
        }
        for (idx, v) in &other.values {
            d = d.max((v - self.value(idx)).abs());
        }
        d
    }
}

/// One exact refinement step: (S_a c)(alpha) = sum_beta a(alpha - M beta) c(beta).
pub fn subdivide(data: &RefinementData, mask: &Mask, d: &DilationSpec) -> Result<RefinementData> {
    if mask.dim() != data.dim || d.dim() != data.dim {
        return Err(Error::Shape(format!(
            "data is {}-dimensional but mask/dilation are {}/{}-dimensional",
            data.dim,
            mask.dim(),
            d.dim()
        )));
    }
    let mut values: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for (beta, c) in &data.values {
        let shifted = d.apply(beta);
        for (gamma, a) in mask.entries() {
            let idx: Vec<i64> = gamma.iter().zip(&shifted).map(|(g, s)| g + s).collect();
            *values.entry(idx).or_insert(0.0) += a * c;
        }
    }
    Ok(RefinementData {
        label: data.label.clone(),
        dim: data.dim,
        level: data.level + 1,
        values,
    })
}

/// Samples of the basic limit function phi_{start_level} on the grid
/// M^{-levels} Z^s: applies S at levels start_level, start_level + 1, ...,
/// start_level + levels - 1 to delta data, coarsest level first.
pub fn basic_limit_samples(
    seq: &MaskSequence,
    d: &DilationSpec,
    levels: usize,
    start_level: usize,
) -> Result<RefinementData> {
    if levels < 1 || start_level < 1 {
        return Err(Error::InvalidParameter(
            "basic-limit sampling needs levels >= 1 and start_level >= 1".into(),
        ));
    }
    let mut data = RefinementData::delta(seq.dim());
    for j in 0..levels {
        data = subdivide(&data, &seq.level(start_level + j), d)?;
    }
    data.label = format!("basic-limit from level {start_level}");
    Ok(data)
}

fn mask_center(mask: &Mask) -> Vec<f64> {
    let total: f64 = mask.entries().map(|(_, v)| v).sum();
    let mut c = vec![0.0; mask.dim()];
    for (alpha, v) in mask.entries() {
        for (ci, &ai) in c.iter_mut().zip(alpha) {
            *ci += v * ai as f64;
        }
    }
    c.iter_mut().for_each(|ci| *ci /= total);
    c
}

/// The parametrization drift left after `levels` refinement steps from
/// `start_level`: samples c(gamma) approximate phi at M^{-levels} gamma plus
/// this offset, because each step recenters by the mask's center of mass.
/// Isotropic dilations only.
pub fn tail_drift(
    seq: &MaskSequence,
    d: &DilationSpec,
    start_level: usize,
    levels: usize,
) -> Result<Vec<f64>> {
    let m = d.isotropic_m().ok_or_else(|| {
        Error::Unsupported("drift accounting is implemented for isotropic dilations".into())
    })? as f64;
    let mut drift = vec![0.0; seq.dim()];
    for j in levels..levels + 64 {
        let c = mask_center(&seq.level(start_level + j));
        let w = m.powi(-(j as i32 + 1));
        for (di, ci) in drift.iter_mut().zip(&c) {
            *di += w * ci;
        }
    }
    Ok(drift)
}

/// Piecewise-linear evaluation of univariate samples placed at
/// x = m^{-level} gamma + drift, zero outside the support.
fn interpolate_1d(data: &RefinementData, m: f64, drift: f64, x: f64) -> f64 {
    let t = (x - drift) * m.powi(data.level as i32);
    let i = t.floor();
    let frac = t - i;
    let lo = data.value(&[i as i64]);
    let hi = data.value(&[i as i64 + 1]);
    lo + frac * (hi - lo)
}

fn inverse_apply(d: &DilationSpec, v: &[i64]) -> Option<Vec<i64>> {
    let s = d.dim();
    let m = DMatrix::from_fn(s, s, |i, j| d.matrix()[i][j] as f64);
    let inv = m.try_inverse()?;
    let x: Vec<i64> = (0..s)
        .map(|i| {
            let xi: f64 = (0..s).map(|j| inv[(i, j)] * v[j] as f64).sum();
            xi.round() as i64
        })
        .collect();
    if d.apply(&x) == v {
        Some(x)
    } else {
        None
    }
}

/// Sup-norm residual of the two-scale relation
/// phi_k = sum_alpha a^{(k)}(alpha) phi_{k+1}(M . - alpha), with both sides
/// sampled independently by `levels` refinement steps. Univariate sequences
/// are compared through drift-corrected linear interpolants, which removes
/// the O(m^{-levels}) parametrization offset between the two runs; in higher
/// dimensions the raw grids are matched index by index.
pub fn refinability_residual(
    seq: &MaskSequence,
    d: &DilationSpec,
    k: usize,
    levels: usize,
) -> Result<f64> {
    if k < 1 || levels < 1 {
        return Err(Error::InvalidParameter(
            "refinability check needs k >= 1 and levels >= 1".into(),
        ));
    }
    let coarse = basic_limit_samples(seq, d, levels, k)?;
    let fine = basic_limit_samples(seq, d, levels, k + 1)?;
    let mask = seq.level(k);
    if seq.dim() == 1 {
        let m = d.isotropic_m().expect("1x1 dilations are isotropic") as f64;
        let drift_c = tail_drift(seq, d, k, levels)?[0];
        let drift_f = tail_drift(seq, d, k + 1, levels)?[0];
        let scale = m.powi(-(levels as i32));
        let mut residual: f64 = 0.0;
        for (gamma, v) in &coarse.values {
            let x = scale * gamma[0] as f64 + drift_c;
            let mut rhs = 0.0;
            for (alpha, a) in mask.entries() {
                rhs += a * interpolate_1d(&fine, m, drift_f, m * x - alpha[0] as f64);
            }
            residual = residual.max((v - rhs).abs());
        }
        return Ok(residual);
    }
    // phi_{k+1}(M x - alpha) at x = M^{-L} gamma reads the fine samples at
    // index M gamma - M^L alpha.
    let mut rhs: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for (alpha, a) in mask.entries() {
        let mut ml_alpha = alpha.clone();
        for _ in 0..levels {
            ml_alpha = d.apply(&ml_alpha);
        }
        for (rho, c) in &fine.values {
            let v: Vec<i64> = rho.iter().zip(&ml_alpha).map(|(r, m)| r + m).collect();
            if let Some(gamma) = inverse_apply(d, &v) {
                *rhs.entry(gamma).or_insert(0.0) += a * c;
            }
        }
    }
    let mut residual: f64 = 0.0;
    for (gamma, v) in &coarse.values {
        residual = residual.max((v - rhs.get(gamma).copied().unwrap_or(0.0)).abs());
    }
    for (gamma, v) in &rhs {
        residual = residual.max((v - coarse.value(gamma)).abs());
    }
    Ok(residual)
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for j in 0..k {
        b = b * (n - j) as f64 / (j + 1) as f64;
    }
    b
}

fn max_difference(data: &RefinementData, order: usize) -> f64 {
    let mut best: f64 = 0.0;
    for axis in 0..data.dim {
        for (idx, _) in &data.values {
            // Anchor differences so every window touching the support is
            // covered once: start up to `order` steps below each index.
            for back in 0..=order {
                let mut base = idx.clone();
                base[axis] -= back as i64;
                let mut acc = 0.0;
                for j in 0..=order {
                    let mut p = base.clone();
                    p[axis] += j as i64;
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign * binomial(order, j) * data.value(&p);
                }
                best = best.max(acc.abs());
            }
        }
    }
    best
}

/// Empirical Hölder exponent log_m of the ratio of maximal order-r
/// differences across the two finest sample levels. Diagnostic only; the
/// regularity verdicts never read it.
pub fn empirical_holder(
    seq: &MaskSequence,
    d: &DilationSpec,
    order: usize,
    levels: usize,
) -> Result<f64> {
    let m = d.isotropic_m().ok_or_else(|| {
        Error::Unsupported("the empirical Hölder estimate needs an isotropic dilation".into())
    })? as f64;
    if levels < 2 || order < 1 {
        return Err(Error::InvalidParameter(
            "the empirical Hölder estimate needs levels >= 2 and order >= 1".into(),
        ));
    }
    let coarse = basic_limit_samples(seq, d, levels - 1, 1)?;
    let fine = subdivide(&coarse, &seq.level(levels), d)?;
    let d_prev = max_difference(&coarse, order);
    let d_last = max_difference(&fine, order);
    if d_last == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((d_prev / d_last).ln() / m.ln())
}

/// A truncated frequency-domain product Prod_{k=1}^{depth} p_k(m^{-k} omega)
/// with p_k(x) = m^{-1} a_*^{(k)}(e^{-2 pi i x}).
#[derive(Debug, Clone)]
pub struct FourierProduct {
    pub omega: f64,
    pub depth: usize,
    pub value: Complex<f64>,
    /// Cumulative products after each factor, length `depth`.
    pub partials: Vec<Complex<f64>>,
    /// Bound on the change from extending the product beyond `depth`,
    /// computed from the |p_k(m^{-k} omega) - 1| window past the truncation
    /// plus a geometric extrapolation. Infinite when the product diverges.
    pub tail_estimate: f64,
    pub diverging: bool,
    pub note: Option<String>,
}

fn fourier_factor(seq: &MaskSequence, m: f64, k: usize, omega: f64) -> Complex<f64> {
    let mask = seq.level(k);
    let x = omega / m.powi(k as i32);
    let z = Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * x);
    crate::symbol::symbol_eval(&mask, &[z]).expect("unit-modulus point is a valid symbol argument")
        / m
}

/// Truncated Fourier product of a univariate sequence. Masks are expected
/// to satisfy p_k(0) = 1, i.e. a_*^{(k)}(1) = m; when the normalization
/// defects mu_k are not summable the product diverges and the result says so
/// instead of erroring, because the partial products are the diagnosis.
pub fn fourier_product(
    seq: &MaskSequence,
    d: &DilationSpec,
    omega: f64,
    depth: usize,
) -> Result<FourierProduct> {
    if d.dim() != 1 || seq.dim() != 1 {
        return Err(Error::Unsupported(
            "Fourier products are implemented for univariate sequences".into(),
        ));
    }
    if depth < 1 {
        return Err(Error::InvalidParameter(
            "Fourier product depth must be at least 1".into(),
        ));
    }
    let m = d.isotropic_m().expect("1x1 dilations are isotropic") as f64;
    let mut partials = Vec::with_capacity(depth);
    let mut value = Complex::new(1.0, 0.0);
    for k in 1..=depth {
        value *= fourier_factor(seq, m, k, omega);
        partials.push(value);
    }
    let ds = defect_sequence(seq, d, 0, 24)?;
    let report = approximate_sum_rule_verdict(&ds);
    let diverging = report.mu.verdict == Verdict::Violated;
    let (tail_estimate, note) = if diverging {
        (
            f64::INFINITY,
            Some(
                "normalization defects mu_k are not summable; the infinite product \
                 diverges (partial products at omega = 0 grow without bound)"
                    .to_string(),
            ),
        )
    } else {
        let window: Vec<f64> = (depth + 1..=2 * depth + 8)
            .map(|k| (fourier_factor(seq, m, k, omega) - Complex::new(1.0, 0.0)).norm())
            .collect();
        let sum: f64 = window.iter().sum();
        let last = *window.last().unwrap();
        let prev = window[window.len() - 2];
        let remainder = if last == 0.0 {
            0.0
        } else {
            let q = (last / prev).min(0.9);
            last * q / (1.0 - q)
        };
        (value.norm() * ((sum + remainder).exp() - 1.0), None)
    };
    Ok(FourierProduct {
        omega,
        depth,
        value,
        partials,
        tail_estimate,
        diverging,
        note,
    })
}

/// Grid coordinates M^{-level} alpha of one sample index.
pub fn grid_point(d: &DilationSpec, level: usize, alpha: &[i64]) -> Vec<f64> {
    if let Some(m) = d.isotropic_m() {
        let scale = (m as f64).powi(level as i32);
        return alpha.iter().map(|&a| a as f64 / scale).collect();
    }
    let s = d.dim();
    let m = DMatrix::from_fn(s, s, |i, j| d.matrix()[i][j] as f64);
    let inv = m.try_inverse().expect("expanding dilations are invertible");
    let mut x: Vec<f64> = alpha.iter().map(|&a| a as f64).collect();
    for _ in 0..level {
        x = (0..s)
            .map(|i| (0..s).map(|j| inv[(i, j)] * x[j]).sum())
            .collect();
    }
    x
}

/// CSV emission: header `x0,...,x{s-1},value`, one row per grid point in
/// lexicographic index order.
pub fn write_csv<W: Write>(data: &RefinementData, d: &DilationSpec, mut w: W) -> Result<()> {
    let header: Vec<String> = (0..data.dim)
        .map(|i| format!("x{i}"))
        .chain(std::iter::once("value".to_string()))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (alpha, v) in &data.values {
        let x = grid_point(d, data.level, alpha);
        let row: Vec<String> = x
            .iter()
            .map(|c| c.to_string())
            .chain(std::iter::once(v.to_string()))
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Slope of ln(max order-r difference) against the level, over the last few
/// levels of one run; the per-level decay exponent behind `empirical_holder`.
pub fn difference_decay_slope(
    seq: &MaskSequence,
    d: &DilationSpec,
    order: usize,
    levels: usize,
) -> Result<f64> {
    if levels < 3 {
        return Err(Error::InvalidParameter(
            "difference-decay fitting needs at least 3 levels".into(),
        ));
    }
    let mut data = RefinementData::delta(seq.dim());
    let mut points = Vec::new();
    for k in 1..=levels {
        data = subdivide(&data, &seq.level(k), d)?;
        let m = max_difference(&data, order);
        if k > levels / 2 && m > 0.0 {
            points.push((k as f64, m.ln()));
        }
    }
    if points.len() < 2 {
        return Ok(f64::NEG_INFINITY);
    }
    let ks: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (slope, _, _) = linear_fit(&ks, &ys);
    Ok(slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{builtin, SchemeParams};

    fn chaikin() -> (MaskSequence, DilationSpec) {
        let d = builtin("chaikin", &SchemeParams::default()).unwrap();
        (d.sequence, d.dilation)
    }

    fn quadratic_bspline_value(x: f64) -> f64 {
        if x <= 0.0 || x >= 3.0 {
            0.0
        } else if x <= 1.0 {
            x * x / 2.0
        } else if x <= 2.0 {
            (-2.0 * x * x + 6.0 * x - 3.0) / 2.0
        } else {
            (3.0 - x) * (3.0 - x) / 2.0
        }
    }

    #[test]
    fn one_step_from_delta_reproduces_the_mask() {
        let hat = Mask::univariate(&[0.5, 1.0, 0.5]).unwrap();
        let d = DilationSpec::isotropic(1, 2).unwrap();
        let out = subdivide(&RefinementData::delta(1), &hat, &d).unwrap();
        assert_eq!(out.level, 1);
        assert_eq!(out.values.len(), 3);
        assert_eq!(out.value(&[0]), 0.5);
        assert_eq!(out.value(&[1]), 1.0);
        assert_eq!(out.value(&[2]), 0.5);
    }

    #[test]
    fn normalized_masks_reproduce_constants() {
        let (seq, d) = chaikin();
        let mut ones = BTreeMap::new();
        for i in -8..=8i64 {
            ones.insert(vec![i], 1.0);
        }
        let data = RefinementData {
            label: "ones".into(),
            dim: 1,
            level: 0,
            values: ones,
        };
        let out = subdivide(&data, &seq.level(1), &d).unwrap();
        for i in -8..=8i64 {
            assert!((out.value(&[i]) - 1.0).abs() < 1e-14, "at {i}");
        }
    }

    #[test]
    fn two_steps_match_the_double_convolution_oracle() {
        let (seq, d) = chaikin();
        let a = seq.level(1);
        let two = basic_limit_samples(&seq, &d, 2, 1).unwrap();
        for idx in -2..=12i64 {
            let mut oracle = 0.0;
            for (beta, b) in a.entries() {
                oracle += a.coefficient(&[idx - 2 * beta[0]]) * b;
            }
            assert!(
                (two.value(&[idx]) - oracle).abs() < 1e-15,
                "mismatch at {idx}"
            );
        }
    }

    #[test]
    fn chaikin_samples_match_the_quadratic_bspline_closed_form() {
        let (seq, d) = chaikin();
        let run = basic_limit_samples(&seq, &d, 10, 1).unwrap();
        // Samples sit at 2^{-10}(alpha + 3/2): the mask center is the
        // residual parametrization drift.
        let drift = tail_drift(&seq, &d, 1, 10).unwrap()[0];
        assert!((drift - 1.5 / 1024.0).abs() < 1e-15);
        let mut worst: f64 = 0.0;
        for (idx, v) in &run.values {
            let x = idx[0] as f64 / 1024.0 + drift;
            worst = worst.max((v - quadratic_bspline_value(x)).abs());
        }
        assert!(worst < 1e-3, "sup deviation {worst}");
    }

    #[test]
    fn consecutive_levels_stay_close() {
        let (seq, d) = chaikin();
        let nine = basic_limit_samples(&seq, &d, 9, 1).unwrap();
        let ten = basic_limit_samples(&seq, &d, 10, 1).unwrap();
        // Compare on the coarser grid, which embeds into the finer one.
        let mut worst: f64 = 0.0;
        for (idx, v) in &nine.values {
            worst = worst.max((v - ten.value(&[2 * idx[0]])).abs());
        }
        assert!(worst < 1e-2, "interpolant gap {worst}");
    }

    #[test]
    fn hat_samples_are_exact_piecewise_linear_values() {
        let hat = Mask::univariate(&[0.5, 1.0, 0.5]).unwrap();
        let d = DilationSpec::isotropic(1, 2).unwrap();
        let seq = MaskSequence::stationary(hat).unwrap();
        let run = basic_limit_samples(&seq, &d, 3, 1).unwrap();
        // Drift-corrected locations (alpha + 1)/8; the peak value 1 sits at
        // alpha = 7, i.e. exactly at x = 1.
        assert!((run.value(&[7]) - 1.0).abs() < 1e-15);
        for (idx, v) in &run.values {
            let x = (idx[0] as f64 + 1.0) / 8.0;
            let exact = (1.0 - (x - 1.0).abs()).max(0.0);
            assert!((v - exact).abs() < 1e-15, "at x = {x}");
        }
    }

    #[test]
    fn perturbed_chaikin_limits_approach_the_stationary_one() {
        // phi_k of the perturbed sequence tends to the Chaikin basic
        // function as k grows; the gap at fixed k is genuinely O(1/k).
        let p = builtin("example5_perturbed_chaikin", &SchemeParams::default()).unwrap();
        let (seq, d) = chaikin();
        let limit = basic_limit_samples(&seq, &d, 10, 1).unwrap();
        let gap = |start: usize| {
            basic_limit_samples(&p.sequence, &p.dilation, 10, start)
                .unwrap()
                .sup_diff(&limit)
        };
        let (g1, g4, g16) = (gap(1), gap(4), gap(16));
        assert!(g16 < g4 && g4 < g1, "gaps {g1} {g4} {g16}");
        assert!(g16 < 0.15, "gap from level 16 is {g16}");
    }

    #[test]
    fn two_scale_residual_is_small_at_eight_levels() {
        let p = builtin("example5_perturbed_chaikin", &SchemeParams::default()).unwrap();
        let r = refinability_residual(&p.sequence, &p.dilation, 1, 8).unwrap();
        assert!(r < 1e-2, "residual {r}");
        let (seq, d) = chaikin();
        let rs = refinability_residual(&seq, &d, 1, 8).unwrap();
        assert!(rs < 1e-2, "stationary residual {rs}");
    }

    #[test]
    fn fourier_product_is_one_at_omega_zero() {
        let (seq, d) = chaikin();
        let f = fourier_product(&seq, &d, 0.0, 20).unwrap();
        assert!((f.value - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert!(!f.diverging);
    }

    #[test]
    fn harmonically_inflated_partial_products_grow_linearly() {
        let e = builtin("example1_scaled", &SchemeParams::default()).unwrap();
        let f = fourier_product(&e.sequence, &e.dilation, 0.0, 12).unwrap();
        assert!(f.diverging);
        assert!(f.note.is_some());
        for (i, p) in f.partials.iter().enumerate() {
            let k = (i + 1) as f64;
            assert!(
                (p.re - (k + 1.0)).abs() < 1e-9 && p.im.abs() < 1e-12,
                "partial {} = {p}",
                i + 1
            );
        }
    }

    #[test]
    fn hat_transform_matches_the_sinc_square() {
        let hat = Mask::univariate(&[0.5, 1.0, 0.5]).unwrap();
        let d = DilationSpec::isotropic(1, 2).unwrap();
        let seq = MaskSequence::stationary(hat).unwrap();
        let at_half = fourier_product(&seq, &d, 0.5, 30).unwrap();
        let x = std::f64::consts::PI * 0.5;
        let closed = (x.sin() / x).powi(2);
        assert!((at_half.value.norm() - closed).abs() < 1e-6);
        let at_one = fourier_product(&seq, &d, 1.0, 30).unwrap();
        assert!(at_one.value.norm() < 1e-12);
    }

    #[test]
    fn doubling_the_depth_stays_within_the_tail_estimate() {
        let (seq, d) = chaikin();
        for omega in [0.3, 0.7, 1.9] {
            let short = fourier_product(&seq, &d, omega, 6).unwrap();
            let long = fourier_product(&seq, &d, omega, 12).unwrap();
            let drift = (long.value - short.value).norm();
            assert!(
                drift <= short.tail_estimate,
                "omega {omega}: drift {drift} vs tail {}",
                short.tail_estimate
            );
        }
    }

    #[test]
    fn empirical_exponent_is_near_two_for_chaikin() {
        let (seq, d) = chaikin();
        let alpha = empirical_holder(&seq, &d, 3, 10).unwrap();
        assert!((alpha - 2.0).abs() < 0.2, "alpha = {alpha}");
    }

    #[test]
    fn csv_rows_are_deterministic_and_labeled() {
        let hat = Mask::univariate(&[0.5, 1.0, 0.5]).unwrap();
        let d = DilationSpec::isotropic(1, 2).unwrap();
        let seq = MaskSequence::stationary(hat).unwrap();
        let run = basic_limit_samples(&seq, &d, 1, 1).unwrap();
        let mut buf = Vec::new();
        write_csv(&run, &d, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "x0,value\n0,0.5\n0.5,1\n1,0.5\n");
    }
}
