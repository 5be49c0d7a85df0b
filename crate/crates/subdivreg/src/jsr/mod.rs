//! Joint spectral radius of a finite family of square matrices.
//!
//! Lower bounds come from spectrum-maximizing-product search: exhaustive
//! enumeration of short words up to a product budget, deduplicated by cyclic
//! canonical form, followed by a periodic scan of `u * w^j` families built on
//! the best short words. Upper bounds come from two certifiers: an invariant
//! polytope grown from the leading eigenvectors of the candidate product, and
//! a norm-exhaustion tree that proves `jsr < theta` by driving every scaled
//! product below norm one. A Gripenberg-style branch-and-bound over scaled
//! operator norms supplies a fallback upper bound when neither certifier
//! applies.

mod simplex;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Runs `f` inside the worker pool configured by `SUBDIVREG_THREADS`, or on
/// the default rayon pool when the variable is unset. All reductions in this
/// module collect in input order, so results do not depend on the pool size.
pub(crate) fn run_in_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    let pool = POOL.get_or_init(|| {
        std::env::var("SUBDIVREG_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .map(|n| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .expect("worker pool construction cannot fail for n >= 1")
            })
    });
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

/// An ordered, labelled family of square real matrices of one common size.
#[derive(Clone, Debug)]
pub struct MatrixSet {
    matrices: Vec<DMatrix<f64>>,
    labels: Vec<String>,
}

impl MatrixSet {
    /// Wraps a family with default labels `A1, A2, ...`.
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let labels = (1..=matrices.len()).map(|i| format!("A{i}")).collect();
        Self::with_labels(matrices, labels)
    }

    pub fn with_labels(matrices: Vec<DMatrix<f64>>, labels: Vec<String>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Shape("matrix family is empty".into()));
        }
        if labels.len() != matrices.len() {
            return Err(Error::Shape(format!(
                "{} labels for {} matrices",
                labels.len(),
                matrices.len()
            )));
        }
        let n = matrices[0].nrows();
        if n == 0 {
            return Err(Error::Shape("matrices must have positive dimension".into()));
        }
        for (i, m) in matrices.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Shape(format!(
                    "matrix {} is {}x{}, expected {}x{}",
                    labels[i],
                    m.nrows(),
                    m.ncols(),
                    n,
                    n
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Shape(format!(
                    "matrix {} has non-finite entries",
                    labels[i]
                )));
            }
        }
        Ok(Self { matrices, labels })
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &DMatrix<f64> {
        &self.matrices[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Multiplies every member by `c`, keeping labels.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            matrices: self.matrices.iter().map(|m| m * c).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Product of the word read left to right in application order: letter
    /// `word[0]` acts first, so the result is `A[w_p] * ... * A[w_1]`.
    pub fn word_product(&self, word: &[usize]) -> DMatrix<f64> {
        let mut p = DMatrix::identity(self.dim(), self.dim());
        for &i in word {
            p = &self.matrices[i] * p;
        }
        p
    }

    /// Human-readable form of a word, e.g. `T1*T1*T3`.
    pub fn word_label(&self, word: &[usize]) -> String {
        word.iter()
            .map(|&i| self.labels[i].as_str())
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Spectral radius of a square matrix: the largest eigenvalue modulus.
pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "spectral radius needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "matrix has non-finite entries".into(),
        ));
    }
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    Ok(a.clone()
        .complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max))
}

/// Classification of the leading eigenvalue of a candidate product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeadingEigenvalue {
    RealPositive,
    RealNegative,
    Complex,
}

impl fmt::Display for LeadingEigenvalue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LeadingEigenvalue::RealPositive => "real-positive",
            LeadingEigenvalue::RealNegative => "real-negative",
            LeadingEigenvalue::Complex => "complex",
        };
        f.write_str(s)
    }
}

/// A spectrum-maximizing-product candidate: a word over the family and its
/// averaged spectral radius `rho(P)^(1/len)`.
#[derive(Clone, Debug)]
pub struct SmpCandidate {
    pub word: Vec<usize>,
    pub value: f64,
    pub eigenvalue: LeadingEigenvalue,
}

/// Quality of a joint-spectral-radius answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JsrStatus {
    CertifiedExact,
    Bounded,
    BudgetExhausted,
}

impl fmt::Display for JsrStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            JsrStatus::CertifiedExact => "certified-exact",
            JsrStatus::Bounded => "bounded",
            JsrStatus::BudgetExhausted => "budget-exhausted",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct WorkStats {
    pub products_evaluated: usize,
    pub polytope_vertices: usize,
    pub tree_nodes: usize,
}

#[derive(Clone, Debug)]
pub struct JsrResult {
    pub lower: f64,
    pub upper: f64,
    pub status: JsrStatus,
    pub candidate: Option<SmpCandidate>,
    pub work: WorkStats,
    pub notes: Vec<String>,
}

/// Tuning knobs for the orchestrated computation. The defaults reproduce the
/// fixture values in the test suite; `jsr` derives budgets from its scalar
/// `budget` argument instead.
#[derive(Clone, Copy, Debug)]
pub struct JsrOptions {
    /// Target width of the certified interval.
    pub gap: f64,
    /// Cap on the number of products evaluated during exhaustive word
    /// enumeration.
    pub enumeration_budget: usize,
    /// Longest word considered by exhaustive enumeration.
    pub max_word_length: usize,
    /// Largest power `j` tried by the periodic `u * w^j` scan.
    pub scan_repeats: usize,
    /// Longest total word the periodic scan may build.
    pub scan_total_length: usize,
    /// Relative slack added to the polytope before a new vertex is accepted.
    pub polytope_margin: f64,
    /// Cap on polytope image evaluations before falling back to a norm bound.
    pub polytope_max_images: usize,
    /// Cap on polytope vertices before falling back to a norm bound.
    pub polytope_max_vertices: usize,
    /// Depth of the branch-and-bound norm tree.
    pub tree_depth: usize,
    /// Node budget of the branch-and-bound norm tree.
    pub tree_node_budget: usize,
    /// Widest level the norm tree keeps alive.
    pub tree_max_breadth: usize,
    /// Node budget per norm-exhaustion certification call.
    pub theta_node_budget: usize,
    /// Depth cap per norm-exhaustion certification call.
    pub theta_depth: usize,
    /// How many rejected candidates may be replaced before giving up on the
    /// polytope certifier.
    pub reject_rounds: usize,
}

impl Default for JsrOptions {
    fn default() -> Self {
        Self {
            gap: 1e-3,
            enumeration_budget: 300_000,
            max_word_length: 30,
            scan_repeats: 16,
            scan_total_length: 40,
            polytope_margin: 1e-8,
            polytope_max_images: 30_000,
            polytope_max_vertices: 4_000,
            tree_depth: 12,
            tree_node_budget: 300_000,
            tree_max_breadth: 20_000,
            theta_node_budget: 120_000,
            theta_depth: 60,
            reject_rounds: 10,
        }
    }
}

/// Canonical form of a word: reduce to the minimal period, then take the
/// lexicographically smallest rotation. Words related by cyclic shift or
/// repetition share their averaged spectral radius, so candidates are always
/// reported in this form.
pub fn canonical_word(word: &[usize]) -> Vec<usize> {
    assert!(!word.is_empty(), "words are nonempty");
    let n = word.len();
    let mut period = n;
    for p in 1..n {
        if n % p == 0 && (0..n).all(|i| word[i] == word[i % p]) {
            period = p;
            break;
        }
    }
    let base = &word[..period];
    let mut best = base.to_vec();
    for r in 1..period {
        let rot: Vec<usize> = (0..period).map(|i| base[(i + r) % period]).collect();
        if rot < best {
            best = rot;
        }
    }
    best
}

/// Builds a candidate from a word: canonicalizes it, evaluates the averaged
/// spectral radius, and classifies the leading eigenvalue of the product.
pub fn smp_candidate(set: &MatrixSet, word: &[usize]) -> Result<SmpCandidate> {
    if word.is_empty() {
        return Err(Error::InvalidParameter("candidate word is empty".into()));
    }
    if let Some(&bad) = word.iter().find(|&&i| i >= set.len()) {
        return Err(Error::InvalidParameter(format!(
            "word letter {bad} out of range for a family of {}",
            set.len()
        )));
    }
    let word = canonical_word(word);
    let p = set.word_product(&word);
    let eigs = p.complex_eigenvalues();
    let rho = eigs.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let value = rho.powf(1.0 / word.len() as f64);
    // Among eigenvalues at the peripheral modulus prefer a real one; the
    // polytope certifier can seed from real leading eigenvectors only.
    let eig_type = if rho == 0.0 {
        LeadingEigenvalue::RealPositive
    } else {
        let mut best_rank = 3;
        for l in eigs.iter() {
            if l.norm() >= rho * (1.0 - 1e-9) {
                let rank = if l.im.abs() <= 1e-9 * rho {
                    if l.re >= 0.0 {
                        0
                    } else {
                        1
                    }
                } else {
                    2
                };
                if rank < best_rank {
                    best_rank = rank;
                }
            }
        }
        match best_rank {
            0 => LeadingEigenvalue::RealPositive,
            1 => LeadingEigenvalue::RealNegative,
            _ => LeadingEigenvalue::Complex,
        }
    };
    Ok(SmpCandidate {
        word,
        value,
        eigenvalue: eig_type,
    })
}

fn decode_word(mut idx: usize, depth: usize, n: usize) -> Vec<usize> {
    let mut w = vec![0usize; depth];
    for slot in w.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
    w
}

/// Exhaustive short-word search. Enumerates all words up to the largest depth
/// whose full level fits in `budget` products, deduplicated by cyclic
/// canonical form. Returns the best candidate, the strongest `tops` distinct
/// candidates for the periodic scan, the exhausted depth, and the number of
/// products evaluated.
pub fn enumerate_candidates(
    set: &MatrixSet,
    budget: usize,
    max_depth: usize,
) -> Result<(SmpCandidate, Vec<SmpCandidate>, usize, usize)> {
    let n = set.len();
    let mut d0 = 1usize;
    while d0 + 1 <= max_depth && (n as u128).pow(d0 as u32 + 1) <= budget as u128 {
        d0 += 1;
    }
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut words: Vec<Vec<usize>> = Vec::new();
    for depth in 1..=d0 {
        let count = (n as u128).pow(depth as u32) as usize;
        for idx in 0..count {
            let w = canonical_word(&decode_word(idx, depth, n));
            if w.len() == depth && seen.insert(w.clone()) {
                words.push(w);
            }
        }
    }
    let values: Vec<f64> = run_in_pool(|| {
        words
            .par_iter()
            .map(|w| {
                let p = set.word_product(w);
                let rho = p
                    .complex_eigenvalues()
                    .iter()
                    .map(|l| l.norm())
                    .fold(0.0, f64::max);
                rho.powf(1.0 / w.len() as f64)
            })
            .collect()
    });
    let mut order: Vec<usize> = (0..words.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .expect("averaged spectral radii are finite")
            .then_with(|| words[a].len().cmp(&words[b].len()))
            .then_with(|| words[a].cmp(&words[b]))
    });
    // Among words tied at the top value (up to rounding), prefer the
    // shortest: equal-value candidates describe the same spectral radius and
    // a shorter word gives a smaller eigenvector wheel.
    let top_value = values[order[0]];
    let mut best_idx = order[0];
    for &i in &order {
        if values[i] < top_value * (1.0 - 1e-12) {
            break;
        }
        let better = (words[i].len(), &words[i]) < (words[best_idx].len(), &words[best_idx]);
        if better {
            best_idx = i;
        }
    }
    let best = smp_candidate(set, &words[best_idx])?;
    let tops = order
        .iter()
        .take(12)
        .map(|&i| smp_candidate(set, &words[i]))
        .collect::<Result<Vec<_>>>()?;
    Ok((best, tops, d0, words.len()))
}

/// Scans periodic families `u * w^j` over the top short words, with prefixes
/// `u` of length at most two and total word length capped. This is how long
/// spectrum-maximizing products such as powers of a short near-optimal block
/// are found without enumerating their full depth.
pub fn periodic_scan(
    set: &MatrixSet,
    tops: &[SmpCandidate],
    repeats: usize,
    total_length: usize,
) -> Result<(Option<SmpCandidate>, usize)> {
    let n = set.len();
    let mut prefixes: Vec<Vec<usize>> = vec![Vec::new()];
    for i in 0..n {
        prefixes.push(vec![i]);
    }
    for i in 0..n {
        for j in 0..n {
            prefixes.push(vec![i, j]);
        }
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut products = 0usize;
    for top in tops {
        let w = &top.word;
        let block = set.word_product(w);
        let mut power = DMatrix::identity(set.dim(), set.dim());
        for j in 1..=repeats {
            power = &block * power;
            if j * w.len() > total_length {
                break;
            }
            for u in &prefixes {
                let len = j * w.len() + u.len();
                if len > total_length {
                    continue;
                }
                let mut p = power.clone();
                for &i in u {
                    p = set.matrix(i) * p;
                }
                products += 1;
                let rho = p
                    .complex_eigenvalues()
                    .iter()
                    .map(|l| l.norm())
                    .fold(0.0, f64::max);
                let value = rho.powf(1.0 / len as f64);
                if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
                    let mut word = Vec::with_capacity(len);
                    for _ in 0..j {
                        word.extend_from_slice(w);
                    }
                    word.extend_from_slice(u);
                    best = Some((value, word));
                }
            }
        }
    }
    match best {
        Some((_, word)) => Ok((Some(smp_candidate(set, &word)?), products)),
        None => Ok((None, products)),
    }
}

/// Leading eigenvector of a matrix whose spectral radius has been scaled to
/// one. Returns the real leading eigenvalue and a unit eigenvector, or None
/// when the leading eigenvalue is complex or the eigenvector cannot be
/// resolved reliably (defective leading blocks).
fn leading_eigenvector(p: &DMatrix<f64>) -> Option<(f64, DVector<f64>)> {
    let n = p.nrows();
    let eigs = p.clone().complex_eigenvalues();
    let mut lead = eigs[0];
    for l in eigs.iter() {
        if l.norm() > lead.norm() {
            lead = *l;
        }
    }
    if lead.im.abs() > 1e-9 * lead.norm().max(1e-300) {
        return None;
    }
    let lam = lead.re;
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.013 * i as f64);
    v /= v.norm();
    for attempt in 0..2 {
        let shift = lam + (1e-12 + attempt as f64 * 1e-9) * lam.abs().max(1.0);
        let lu = (p - DMatrix::<f64>::identity(n, n) * shift).lu();
        let mut ok = true;
        let mut vv = v.clone();
        for _ in 0..4 {
            match lu.solve(&vv) {
                Some(next) => {
                    let norm = next.norm();
                    if !(norm.is_finite() && norm > 0.0) {
                        ok = false;
                        break;
                    }
                    vv = next / norm;
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let residual = (p * &vv - &vv * lam).norm();
            if residual <= 1e-7 * p.norm().max(1.0) {
                let k = vv.iamax();
                if vv[k] < 0.0 {
                    vv = -vv;
                }
                return Some((lam, vv));
            }
        }
        v = DVector::from_fn(n, |i, _| (1.0 + i as f64).sin());
        v /= v.norm();
    }
    None
}

/// Minkowski functional of `w` with respect to the symmetric convex hull of
/// the vertex list: the minimal 1-norm of coefficients representing `w`.
fn minkowski_norm(verts: &[DVector<f64>], w: &DVector<f64>) -> f64 {
    simplex::min_one_norm(verts, w, 1e-10).unwrap_or(f64::INFINITY)
}

enum PolytopeOutcome {
    Certified {
        upper: f64,
        vertices: usize,
    },
    NormBound {
        upper: f64,
        vertices: usize,
    },
    Rejected {
        refined: Option<SmpCandidate>,
        vertices: usize,
    },
    NotApplicable {
        reason: String,
    },
}

/// Grows an invariant polytope for the family scaled by the candidate value.
/// Vertices start on the cyclic eigenvector wheel of the candidate product;
/// each image under the scaled family that escapes the current symmetric hull
/// by more than `margin` becomes a new vertex. An empty queue certifies the
/// candidate value as the joint spectral radius.
fn polytope_run(
    set: &MatrixSet,
    candidate: &SmpCandidate,
    margin: f64,
    max_images: usize,
    max_vertices: usize,
) -> Result<(PolytopeOutcome, usize)> {
    if candidate.value <= 0.0 {
        return Ok((
            PolytopeOutcome::NotApplicable {
                reason: "candidate has zero averaged spectral radius".into(),
            },
            0,
        ));
    }
    let word = &candidate.word;
    let len = word.len() as f64;
    let scale = candidate.value;
    let p_hat = set.word_product(word) / scale.powf(len);
    let Some((_, v0)) = leading_eigenvector(&p_hat) else {
        return Ok((
            PolytopeOutcome::NotApplicable {
                reason: format!(
                    "leading eigenvalue of candidate product is {}; no real eigenvector wheel",
                    candidate.eigenvalue
                ),
            },
            0,
        ));
    };
    let scaled: Vec<DMatrix<f64>> = set.matrices.iter().map(|m| m / scale).collect();

    let mut verts: Vec<DVector<f64>> = vec![v0.clone()];
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    let mut cur = v0;
    for &i in &word[..word.len() - 1] {
        cur = &scaled[i] * cur;
        let mut w = words.last().expect("wheel is nonempty").clone();
        w.push(i);
        verts.push(cur.clone());
        words.push(w);
    }
    let escape_scale = 1e4 * verts.iter().map(|v| v.norm()).fold(0.0, f64::max);

    let mut queue: VecDeque<usize> = (0..verts.len()).collect();
    let mut images = 0usize;

    // Sweeps every (vertex, matrix) image for the polytope operator norm,
    // which bounds the scaled family's joint spectral radius from above.
    // When the hull does not span the space yet, some images have infinite
    // Minkowski norm; fall back to the balanced family norm bound then.
    let norm_sweep = |verts: &[DVector<f64>]| -> f64 {
        let mut mx: f64 = 1.0;
        for v in verts {
            for b in &scaled {
                mx = mx.max(minkowski_norm(verts, &(b * v)));
            }
        }
        if mx.is_finite() {
            scale * mx
        } else {
            let d = balanced_scaling(set);
            set.matrices
                .iter()
                .map(|m| scaled_one_norm(m, &d))
                .fold(0.0, f64::max)
        }
    };

    while let Some(j) = queue.pop_front() {
        for (bi, b) in scaled.iter().enumerate() {
            images += 1;
            if images > max_images {
                let upper = norm_sweep(&verts);
                return Ok((
                    PolytopeOutcome::NormBound {
                        upper,
                        vertices: verts.len(),
                    },
                    images,
                ));
            }
            let w = b * &verts[j];
            let nw = minkowski_norm(&verts, &w);
            if nw <= 1.0 + margin {
                continue;
            }
            if w.norm() > escape_scale {
                let mut esc = words[j].clone();
                esc.push(bi);
                let refined = smp_candidate(set, &esc)
                    .ok()
                    .filter(|c| c.value > candidate.value * (1.0 + 1e-12));
                return Ok((
                    PolytopeOutcome::Rejected {
                        refined,
                        vertices: verts.len(),
                    },
                    images,
                ));
            }
            let mut nw_word = words[j].clone();
            nw_word.push(bi);
            verts.push(w);
            words.push(nw_word);
            queue.push_back(verts.len() - 1);
            if verts.len() > max_vertices {
                let upper = norm_sweep(&verts);
                return Ok((
                    PolytopeOutcome::NormBound {
                        upper,
                        vertices: verts.len(),
                    },
                    images,
                ));
            }
        }
    }
    Ok((
        PolytopeOutcome::Certified {
            upper: scale * (1.0 + margin),
            vertices: verts.len(),
        },
        images,
    ))
}

/// Invariant-polytope certification of a candidate, reported as a result
/// whose lower bound is the candidate value. Stabilization certifies the
/// value exactly (up to the anti-chattering margin); hitting `max_iters`
/// image evaluations downgrades to the polytope-norm upper bound.
pub fn polytope_certify(
    set: &MatrixSet,
    candidate: &SmpCandidate,
    max_iters: usize,
) -> Result<JsrResult> {
    let defaults = JsrOptions::default();
    let (outcome, images) = run_in_pool(|| {
        polytope_run(
            set,
            candidate,
            defaults.polytope_margin,
            max_iters,
            defaults.polytope_max_vertices,
        )
    })?;
    let mut work = WorkStats {
        products_evaluated: images,
        ..WorkStats::default()
    };
    let lower = candidate.value;
    let result = match outcome {
        PolytopeOutcome::Certified { upper, vertices } => {
            work.polytope_vertices = vertices;
            JsrResult {
                lower,
                upper,
                status: JsrStatus::CertifiedExact,
                candidate: Some(candidate.clone()),
                work,
                notes: vec![format!("invariant polytope stabilized at {vertices} vertices")],
            }
        }
        PolytopeOutcome::NormBound { upper, vertices } => {
            work.polytope_vertices = vertices;
            JsrResult {
                lower,
                upper: upper.max(lower),
                status: JsrStatus::Bounded,
                candidate: Some(candidate.clone()),
                work,
                notes: vec![format!(
                    "polytope budget reached at {vertices} vertices; keeping its operator-norm bound"
                )],
            }
        }
        PolytopeOutcome::Rejected { refined, vertices } => {
            work.polytope_vertices = vertices;
            let mut notes = vec![format!(
                "candidate {} rejected: images escape the polytope",
                set.word_label(&candidate.word)
            )];
            let best = match refined {
                Some(r) => {
                    notes.push(format!(
                        "escape trajectory suggests the stronger word {}",
                        set.word_label(&r.word)
                    ));
                    r
                }
                None => candidate.clone(),
            };
            JsrResult {
                lower: best.value,
                upper: f64::INFINITY,
                status: JsrStatus::BudgetExhausted,
                candidate: Some(best),
                work,
                notes,
            }
        }
        PolytopeOutcome::NotApplicable { reason } => JsrResult {
            lower,
            upper: f64::INFINITY,
            status: JsrStatus::BudgetExhausted,
            candidate: Some(candidate.clone()),
            work,
            notes: vec![format!("polytope certification skipped: {reason}")],
        },
    };
    Ok(result)
}

/// Diagonal similarity that balances the row and column weights of the
/// entrywise absolute sum of the family; used to sharpen the 1-norm bounds.
fn balanced_scaling(set: &MatrixSet) -> DVector<f64> {
    let n = set.dim();
    let mut sum = DMatrix::<f64>::zeros(n, n);
    for m in &set.matrices {
        for (s, x) in sum.iter_mut().zip(m.iter()) {
            *s += x.abs();
        }
    }
    DVector::from_fn(n, |i, _| {
        let rs: f64 = sum.row(i).iter().sum();
        let cs: f64 = sum.column(i).iter().sum();
        if rs > 0.0 && cs > 0.0 {
            (rs / cs).sqrt().clamp(1e-6, 1e6)
        } else {
            1.0
        }
    })
}

/// Induced 1-norm of `D^{-1} P D` for the balancing diagonal `d`.
fn scaled_one_norm(p: &DMatrix<f64>, d: &DVector<f64>) -> f64 {
    let mut mx: f64 = 0.0;
    for j in 0..p.ncols() {
        let mut col = 0.0;
        for i in 0..p.nrows() {
            col += p[(i, j)].abs() / d[i];
        }
        mx = mx.max(col * d[j]);
    }
    mx
}

struct TreeBounds {
    lower: f64,
    upper: f64,
    nodes: usize,
    best_word: Option<Vec<usize>>,
    budget_hit: bool,
}

/// Breadth-first branch-and-bound over products, Gripenberg style. Each node
/// carries `q(w) = min over prefixes of ||P_prefix||^(1/j)`; subtrees with
/// `q` at or below the best lower bound cannot improve the answer and are
/// pruned. At every level the surviving `q` values together with the lower
/// bound give a valid upper bound, and the final bound is the best one seen.
fn product_tree_inner(
    set: &MatrixSet,
    max_depth: usize,
    budget: usize,
    seed_lower: f64,
    max_breadth: usize,
) -> TreeBounds {
    const REL_SLACK: f64 = 1e-12;
    let n = set.len();
    let d = balanced_scaling(set);
    let mut lower = seed_lower;
    let mut best_word: Option<Vec<usize>> = None;
    let mut nodes = 0usize;
    let mut upper = f64::INFINITY;
    let mut dropped_carry: f64 = 0.0;
    let mut budget_hit = false;

    struct Node {
        word: Vec<usize>,
        prod: DMatrix<f64>,
        q: f64,
    }
    let mut level: Vec<Node> = Vec::new();

    for depth in 1..=max_depth {
        let parents = level.len().max(if depth == 1 { 1 } else { 0 });
        if depth > 1 && level.is_empty() {
            break;
        }
        if nodes + parents * n > budget {
            let frontier = level.iter().map(|nd| nd.q).fold(dropped_carry, f64::max);
            upper = upper.min(frontier.max(lower * (1.0 + REL_SLACK)));
            budget_hit = true;
            break;
        }
        let children: Vec<(Vec<usize>, DMatrix<f64>, f64, f64)> = run_in_pool(|| {
            let expand = |parent_word: &[usize], parent_prod: &DMatrix<f64>, parent_q: f64| {
                (0..n)
                    .map(|i| {
                        let prod = set.matrix(i) * parent_prod;
                        let rho = prod
                            .clone()
                            .complex_eigenvalues()
                            .iter()
                            .map(|l| l.norm())
                            .fold(0.0, f64::max);
                        let value = rho.powf(1.0 / depth as f64);
                        let q = parent_q.min(scaled_one_norm(&prod, &d).powf(1.0 / depth as f64));
                        let mut w = parent_word.to_vec();
                        w.push(i);
                        (w, prod, value, q)
                    })
                    .collect::<Vec<_>>()
            };
            if depth == 1 {
                let root = DMatrix::identity(set.dim(), set.dim());
                expand(&[], &root, f64::INFINITY)
            } else {
                level
                    .par_iter()
                    .flat_map_iter(|nd| expand(&nd.word, &nd.prod, nd.q))
                    .collect()
            }
        });
        nodes += children.len();
        for (w, _, value, _) in &children {
            if *value > lower {
                lower = *value;
                best_word = Some(w.clone());
            }
        }
        let cutoff = lower * (1.0 + REL_SLACK);
        let mut kept: Vec<Node> = children
            .into_iter()
            .filter(|(_, _, _, q)| *q > cutoff)
            .map(|(word, prod, _, q)| Node { word, prod, q })
            .collect();
        if kept.len() > max_breadth {
            kept.sort_by(|a, b| {
                b.q.partial_cmp(&a.q)
                    .expect("norm bounds are finite")
                    .then_with(|| a.word.cmp(&b.word))
            });
            for nd in &kept[max_breadth..] {
                dropped_carry = dropped_carry.max(nd.q);
            }
            kept.truncate(max_breadth);
            budget_hit = true;
        }
        let frontier = kept.iter().map(|nd| nd.q).fold(dropped_carry, f64::max);
        upper = upper.min(frontier.max(cutoff));
        level = kept;
        if level.is_empty() {
            break;
        }
    }
    if upper.is_infinite() {
        let frontier = level.iter().map(|nd| nd.q).fold(dropped_carry, f64::max);
        upper = frontier.max(lower * (1.0 + REL_SLACK));
    }
    TreeBounds {
        lower,
        upper: upper.max(lower),
        nodes,
        best_word,
        budget_hit,
    }
}

/// Depth-limited norm branch-and-bound: lower bound from averaged spectral
/// radii of explored words, upper bound from scaled 1-norms with pruning.
pub fn product_tree_bounds(set: &MatrixSet, max_depth: usize, budget: usize) -> Result<JsrResult> {
    if max_depth < 1 {
        return Err(Error::InvalidParameter(
            "product tree depth must be at least 1".into(),
        ));
    }
    let defaults = JsrOptions::default();
    let tree = run_in_pool(|| {
        product_tree_inner(set, max_depth, budget, 0.0, defaults.tree_max_breadth)
    });
    let candidate = match &tree.best_word {
        Some(w) => Some(smp_candidate(set, w)?),
        None => None,
    };
    Ok(JsrResult {
        lower: tree.lower,
        upper: tree.upper,
        status: if tree.budget_hit {
            JsrStatus::BudgetExhausted
        } else {
            JsrStatus::Bounded
        },
        candidate,
        work: WorkStats {
            tree_nodes: tree.nodes,
            ..WorkStats::default()
        },
        notes: Vec::new(),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ExhaustionReport {
    pub certified: bool,
    pub nodes: usize,
}

/// Proves `jsr(set) < theta` by exhausting the product tree of the family
/// scaled by `1/theta`: a branch closes once its product has 2-norm at most
/// 0.999, and if every branch closes within the budget the bound is
/// certified. A cheap Frobenius test short-circuits most SVDs.
pub fn exhaustion_certify(
    set: &MatrixSet,
    theta: f64,
    node_budget: usize,
    depth_cap: usize,
) -> Result<ExhaustionReport> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "exhaustion threshold must be positive and finite, got {theta}"
        )));
    }
    let scaled: Vec<DMatrix<f64>> = set.matrices.iter().map(|m| m / theta).collect();
    let mut stack: Vec<(DMatrix<f64>, usize)> =
        scaled.iter().map(|m| (m.clone(), 1usize)).collect();
    let mut nodes = 0usize;
    while let Some((p, depth)) = stack.pop() {
        nodes += 1;
        if nodes > node_budget {
            return Ok(ExhaustionReport {
                certified: false,
                nodes,
            });
        }
        if p.norm() <= 0.999 {
            continue;
        }
        let two_norm = p
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max);
        if two_norm <= 0.999 {
            continue;
        }
        if depth >= depth_cap {
            return Ok(ExhaustionReport {
                certified: false,
                nodes,
            });
        }
        for b in &scaled {
            stack.push((b * &p, depth + 1));
        }
    }
    Ok(ExhaustionReport {
        certified: true,
        nodes,
    })
}

/// Joint spectral radius with a scalar effort knob: `budget` caps the word
/// enumeration and each tree exploration.
pub fn jsr(set: &MatrixSet, target_gap: f64, budget: usize) -> Result<JsrResult> {
    let opts = JsrOptions {
        gap: target_gap,
        enumeration_budget: budget,
        tree_node_budget: budget,
        theta_node_budget: budget.div_ceil(2),
        polytope_max_images: (budget / 10).clamp(2_000, 200_000),
        ..JsrOptions::default()
    };
    jsr_with_options(set, &opts)
}

/// Full orchestration: exhaustive enumeration and periodic scan for a
/// candidate, invariant-polytope certification with rejected candidates fed
/// back into deeper scans, and a norm-tree plus theta-bisection fallback when
/// the polytope does not apply.
pub fn jsr_with_options(set: &MatrixSet, opts: &JsrOptions) -> Result<JsrResult> {
    if !(opts.gap > 0.0 && opts.gap.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target gap must be positive and finite, got {}",
            opts.gap
        )));
    }
    if set.matrices.iter().all(|m| m.iter().all(|x| *x == 0.0)) {
        return Ok(JsrResult {
            lower: 0.0,
            upper: 0.0,
            status: JsrStatus::CertifiedExact,
            candidate: None,
            work: WorkStats::default(),
            notes: vec!["all matrices are zero".into()],
        });
    }
    run_in_pool(|| jsr_orchestrate(set, opts))
}

fn jsr_orchestrate(set: &MatrixSet, opts: &JsrOptions) -> Result<JsrResult> {
    let mut work = WorkStats::default();
    let mut notes: Vec<String> = Vec::new();

    let (mut best, tops, exhausted_depth, products) =
        enumerate_candidates(set, opts.enumeration_budget, opts.max_word_length)?;
    work.products_evaluated += products;
    notes.push(format!(
        "exhaustive word search to depth {exhausted_depth} ({products} products)"
    ));
    let (scan_best, scan_products) =
        periodic_scan(set, &tops, opts.scan_repeats, opts.scan_total_length)?;
    work.products_evaluated += scan_products;
    if let Some(s) = scan_best {
        if s.value > best.value * (1.0 + 1e-12) {
            best = s;
        }
    }

    let margin = opts.polytope_margin.min(opts.gap / 10.0).max(1e-12);
    let mut certified_upper: Option<f64> = None;
    let mut norm_upper = f64::INFINITY;

    if best.value > 0.0 {
        let mut round = 0usize;
        loop {
            let (outcome, images) = polytope_run(
                set,
                &best,
                margin,
                opts.polytope_max_images,
                opts.polytope_max_vertices,
            )?;
            work.products_evaluated += images;
            match outcome {
                PolytopeOutcome::Certified { upper, vertices } => {
                    work.polytope_vertices = vertices;
                    notes.push(format!(
                        "invariant polytope stabilized at {vertices} vertices for {}",
                        set.word_label(&best.word)
                    ));
                    certified_upper = Some(upper);
                    break;
                }
                PolytopeOutcome::NormBound { upper, vertices } => {
                    work.polytope_vertices = vertices;
                    notes.push(format!(
                        "polytope budget reached at {vertices} vertices; keeping its operator-norm bound"
                    ));
                    norm_upper = norm_upper.min(upper);
                    break;
                }
                PolytopeOutcome::Rejected { refined, vertices } => {
                    work.polytope_vertices = vertices;
                    notes.push(format!(
                        "candidate {} rejected at {vertices} vertices",
                        set.word_label(&best.word)
                    ));
                    round += 1;
                    if round > opts.reject_rounds {
                        break;
                    }
                    let mut advanced = false;
                    if let Some(r) = refined {
                        if r.value > best.value * (1.0 + 1e-12) {
                            notes.push(format!(
                                "escape trajectory promotes {}",
                                set.word_label(&r.word)
                            ));
                            best = r;
                            advanced = true;
                        }
                    }
                    if !advanced {
                        let (rescan, extra) = periodic_scan(
                            set,
                            &tops,
                            opts.scan_repeats.max(40),
                            opts.scan_total_length,
                        )?;
                        work.products_evaluated += extra;
                        if let Some(r) = rescan {
                            if r.value > best.value * (1.0 + 1e-12) {
                                notes.push(format!(
                                    "deeper periodic scan promotes {}",
                                    set.word_label(&r.word)
                                ));
                                best = r;
                                advanced = true;
                            }
                        }
                    }
                    if !advanced {
                        break;
                    }
                }
                PolytopeOutcome::NotApplicable { reason } => {
                    notes.push(format!("polytope certification skipped: {reason}"));
                    break;
                }
            }
        }
    }

    let mut lower = best.value;
    let mut budget_hit = false;
    let mut upper = certified_upper.unwrap_or(f64::INFINITY).min(norm_upper);

    if upper - lower > opts.gap {
        let tree = product_tree_inner(
            set,
            opts.tree_depth,
            opts.tree_node_budget,
            lower,
            opts.tree_max_breadth,
        );
        work.tree_nodes += tree.nodes;
        budget_hit |= tree.budget_hit;
        if tree.lower > lower {
            lower = tree.lower;
            if let Some(w) = tree.best_word {
                best = smp_candidate(set, &w)?;
            }
        }
        upper = upper.min(tree.upper);

        // Bisection between the proven lower bound and the current upper
        // bound, shrinking the upper side whenever the norm-exhaustion tree
        // certifies the midpoint.
        let mut unprovable_floor = lower;
        for _ in 0..60 {
            if upper - lower <= opts.gap {
                break;
            }
            let mid = 0.5 * (unprovable_floor + upper);
            if !(mid > unprovable_floor && mid < upper) {
                break;
            }
            let report = exhaustion_certify(set, mid, opts.theta_node_budget, opts.theta_depth)?;
            work.tree_nodes += report.nodes;
            if report.certified {
                upper = mid;
            } else {
                unprovable_floor = mid;
                if upper - unprovable_floor <= (1e-9 * upper.abs()).max(1e-12) {
                    budget_hit = true;
                    break;
                }
            }
        }
        if upper - lower > opts.gap {
            notes.push(format!(
                "gap target {} not reached; certified interval width {}",
                opts.gap,
                upper - lower
            ));
        }
    }

    let upper = upper.max(lower);
    let status = if upper - lower <= opts.gap {
        JsrStatus::CertifiedExact
    } else if budget_hit {
        JsrStatus::BudgetExhausted
    } else {
        JsrStatus::Bounded
    };
    Ok(JsrResult {
        lower,
        upper,
        status,
        candidate: Some(best),
        work,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{compute_index_set, DilationSpec};
    use crate::symbol::Mask;
    use crate::transition::{build_transition, difference_subspace, restrict};

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows.len(), rows[0].len(), &rows.concat())
    }

    #[test]
    fn spectral_radius_known_values() {
        assert_eq!(spectral_radius(&DMatrix::identity(3, 3)).unwrap(), 1.0);
        let d = mat(&[&[0.5, 0.0], &[0.0, -0.75]]);
        assert!((spectral_radius(&d).unwrap() - 0.75).abs() < 1e-14);
        let nil = mat(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(spectral_radius(&nil).unwrap().abs() < 1e-12);
        let rect = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(spectral_radius(&rect), Err(Error::Shape(_))));
    }

    #[test]
    fn canonical_words_reduce_period_and_rotation() {
        assert_eq!(canonical_word(&[0, 2, 0, 2]), vec![0, 2]);
        assert_eq!(canonical_word(&[2, 0]), vec![0, 2]);
        assert_eq!(canonical_word(&[1, 1, 1]), vec![1]);
        assert_eq!(canonical_word(&[2, 0, 1]), vec![0, 1, 2]);
        assert_eq!(canonical_word(&[0, 1, 0, 2]), vec![0, 1, 0, 2]);
        assert_eq!(canonical_word(&[1, 0, 2, 0]), vec![0, 1, 0, 2]);
    }

    #[test]
    fn candidate_value_is_reproducible() {
        let set = MatrixSet::new(vec![
            mat(&[&[0.4, 0.3], &[0.0, 0.2]]),
            mat(&[&[0.1, 0.0], &[0.5, 0.3]]),
        ])
        .unwrap();
        let c = smp_candidate(&set, &[0, 1, 1]).unwrap();
        let p = set.word_product(&c.word);
        let rho = spectral_radius(&p).unwrap();
        assert!((rho.powf(1.0 / c.word.len() as f64) - c.value).abs() <= 1e-12);
    }

    #[test]
    fn singleton_diagonal_certifies_exactly() {
        let set = MatrixSet::new(vec![mat(&[&[0.5, 0.0], &[0.0, 0.25]])]).unwrap();
        let r = jsr(&set, 1e-6, 50_000).unwrap();
        assert_eq!(r.status, JsrStatus::CertifiedExact);
        assert!((r.lower - 0.5).abs() < 1e-12);
        assert!(r.upper - r.lower <= 1e-6);
        let cand = r.candidate.unwrap();
        assert_eq!(cand.word, vec![0]);
        assert_eq!(cand.eigenvalue, LeadingEigenvalue::RealPositive);
    }

    #[test]
    fn identity_family_is_exactly_one() {
        let set = MatrixSet::new(vec![DMatrix::identity(3, 3)]).unwrap();
        let r = jsr(&set, 1e-3, 10_000).unwrap();
        assert_eq!(r.status, JsrStatus::CertifiedExact);
        assert_eq!(r.lower, 1.0);
        assert!(r.upper - 1.0 <= 1e-6);
    }

    #[test]
    fn zero_family_is_zero() {
        let set = MatrixSet::new(vec![DMatrix::zeros(3, 3)]).unwrap();
        let r = jsr(&set, 1e-3, 10_000).unwrap();
        assert_eq!(r.status, JsrStatus::CertifiedExact);
        assert_eq!(r.lower, 0.0);
        assert_eq!(r.upper, 0.0);
        assert!(r.candidate.is_none());
    }

    #[test]
    fn nilpotent_pair_collapses_to_zero() {
        let set = MatrixSet::new(vec![
            mat(&[&[0.0, 1.0], &[0.0, 0.0]]),
            mat(&[&[0.0, 2.0], &[0.0, 0.0]]),
        ])
        .unwrap();
        let r = jsr(&set, 1e-3, 10_000).unwrap();
        assert_eq!(r.lower, 0.0);
        assert!(r.upper <= 1e-9);
        assert_eq!(r.status, JsrStatus::CertifiedExact);
    }

    #[test]
    fn commuting_diagonal_pair_takes_the_larger_radius() {
        let set = MatrixSet::new(vec![
            mat(&[&[0.3, 0.0], &[0.0, 0.9]]),
            mat(&[&[0.7, 0.0], &[0.0, 0.2]]),
        ])
        .unwrap();
        let r = jsr(&set, 1e-3, 50_000).unwrap();
        assert_eq!(r.status, JsrStatus::CertifiedExact);
        assert!((r.lower - 0.9).abs() < 1e-9);
        assert!(r.upper - r.lower <= 1e-3);
    }

    #[test]
    fn scaling_covariance() {
        let set = MatrixSet::new(vec![
            mat(&[&[0.3, 0.1], &[0.0, 0.2]]),
            mat(&[&[0.25, 0.0], &[0.05, 0.25]]),
        ])
        .unwrap();
        let base = jsr(&set, 1e-6, 50_000).unwrap();
        for c in [3.0, -2.0] {
            let scaled = jsr(&set.scaled(c), 1e-6 * c.abs(), 50_000).unwrap();
            assert!((scaled.lower - c.abs() * base.lower).abs() <= 1e-9 * c.abs());
            assert!((scaled.upper - c.abs() * base.upper).abs() <= 1e-6 * c.abs());
        }
    }

    #[test]
    fn similarity_keeps_bounds_overlapping() {
        let set = MatrixSet::new(vec![
            mat(&[&[0.3, 0.1], &[0.0, 0.2]]),
            mat(&[&[0.25, 0.0], &[0.05, 0.25]]),
        ])
        .unwrap();
        let s = mat(&[&[1.0, 0.3], &[-0.2, 1.1]]);
        let si = s.clone().try_inverse().unwrap();
        let conj = MatrixSet::new(set.matrices().iter().map(|m| &si * m * &s).collect()).unwrap();
        let a = jsr(&set, 1e-6, 50_000).unwrap();
        let b = jsr(&conj, 1e-6, 50_000).unwrap();
        assert!(a.lower <= b.upper + 1e-9 && b.lower <= a.upper + 1e-9);
    }

    #[test]
    fn block_triangular_family_takes_block_maximum() {
        let set = MatrixSet::new(vec![
            mat(&[&[0.5, 0.0], &[1.0, 0.25]]),
            mat(&[&[0.4, 0.0], &[-1.0, 0.3]]),
        ])
        .unwrap();
        let r = jsr(&set, 1e-3, 100_000).unwrap();
        assert!(r.lower <= 0.5 + 1e-9);
        assert!(r.upper >= 0.5 - 1e-9);
        assert!(r.upper - r.lower <= 1e-3);
    }

    #[test]
    fn explored_words_stay_below_the_upper_bound() {
        let set = MatrixSet::new(vec![
            mat(&[&[0.3, 0.1], &[0.0, 0.2]]),
            mat(&[&[0.25, 0.0], &[0.05, 0.25]]),
        ])
        .unwrap();
        let r = jsr(&set, 1e-6, 50_000).unwrap();
        for depth in 1..=6usize {
            for idx in 0..(2usize.pow(depth as u32)) {
                let w = decode_word(idx, depth, 2);
                let p = set.word_product(&w);
                let v = spectral_radius(&p).unwrap().powf(1.0 / depth as f64);
                assert!(v <= r.upper + 1e-9, "word {w:?} exceeds upper bound");
            }
        }
    }

    #[test]
    fn product_tree_bounds_are_monotone_in_depth() {
        let set = MatrixSet::new(vec![
            mat(&[&[0.3, 0.1], &[0.0, 0.2]]),
            mat(&[&[0.25, 0.0], &[0.05, 0.25]]),
        ])
        .unwrap();
        let shallow = product_tree_bounds(&set, 3, 100_000).unwrap();
        let deep = product_tree_bounds(&set, 8, 100_000).unwrap();
        assert!(deep.lower >= shallow.lower - 1e-12);
        assert!(deep.upper <= shallow.upper + 1e-12);
        assert!(shallow.lower <= shallow.upper);
        assert!(deep.lower <= deep.upper);
    }

    #[test]
    fn product_tree_singleton_matches_gelfand_at_depth_one() {
        let a = mat(&[&[0.5, 1.0], &[0.0, 0.5]]);
        let set = MatrixSet::new(vec![a.clone()]).unwrap();
        let r = product_tree_bounds(&set, 1, 100).unwrap();
        assert!((r.lower - 0.5).abs() < 1e-12);
        assert!(r.upper >= r.lower);
        let d = balanced_scaling(&set);
        assert!(r.upper <= scaled_one_norm(&a, &d) + 1e-12);
    }

    #[test]
    fn exhaustion_certifier_splits_at_the_radius() {
        let set = MatrixSet::new(vec![mat(&[&[0.5, 0.0], &[0.0, 0.5]])]).unwrap();
        assert!(
            exhaustion_certify(&set, 0.6, 10_000, 60)
                .unwrap()
                .certified
        );
        assert!(
            !exhaustion_certify(&set, 0.4, 10_000, 60)
                .unwrap()
                .certified
        );
    }

    #[test]
    fn polytope_budget_yields_a_norm_bound() {
        let set = MatrixSet::new(vec![
            mat(&[&[0.3, 0.1], &[0.0, 0.2]]),
            mat(&[&[0.25, 0.0], &[0.05, 0.25]]),
        ])
        .unwrap();
        let (best, _, _, _) = enumerate_candidates(&set, 10_000, 12).unwrap();
        let r = polytope_certify(&set, &best, 1).unwrap();
        assert_eq!(r.status, JsrStatus::Bounded);
        assert!(r.upper.is_finite());
        assert!(r.upper >= r.lower);
    }

    #[test]
    fn chaikin_difference_family_certifies_one_quarter() {
        let mask = Mask::univariate(&[0.25, 0.75, 0.75, 0.25]).unwrap();
        let d = DilationSpec::isotropic(1, 2).unwrap();
        let k = compute_index_set(&d, mask.support_bound()).unwrap();
        let fam = build_transition(&mask, &d, &k).unwrap();
        let v = difference_subspace(&k, 1, 1).unwrap();
        let restricted: Vec<DMatrix<f64>> = fam
            .matrices
            .iter()
            .map(|t| restrict(t, &v, None).matrix)
            .collect();
        let set = MatrixSet::new(restricted).unwrap();
        let r = jsr(&set, 1e-6, 100_000).unwrap();
        assert_eq!(r.status, JsrStatus::CertifiedExact);
        assert!((r.lower - 0.25).abs() <= 1e-9);
        assert!(r.upper - r.lower <= 1e-6);
        let cand = r.candidate.unwrap();
        assert_eq!(cand.word, vec![0]);
        assert_eq!(cand.eigenvalue, LeadingEigenvalue::RealPositive);
    }
}
