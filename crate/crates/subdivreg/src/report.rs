//! Rendered analysis reports: a plain serializable document model, the
//! human-readable text view with certification tags, and the JSON twin that
//! round-trips through `parse_report`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::jsr::JsrResult;
use crate::lattice::DilationSpec;
use crate::regularity::{
    analyze, restricted_family, AnalysisOptions, RegularityReport, RegularityVerdict,
};
use crate::symbol::{DefectSequence, FitModel, MaskSequence, SeriesFit, SummabilityReport};

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Joint-spectral-radius bounds with the candidate rendered as a word over
/// the family labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsrDoc {
    pub lower: f64,
    pub upper: f64,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_word: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Render one radius result against its family labels.
pub fn jsr_doc(r: &JsrResult, labels: &[String]) -> JsrDoc {
    let (word, value) = match &r.candidate {
        Some(c) => (
            Some(
                c.word
                    .iter()
                    .map(|&i| labels[i].as_str())
                    .collect::<Vec<_>>()
                    .join("*"),
            ),
            Some(c.value),
        ),
        None => (None, None),
    };
    JsrDoc {
        lower: r.lower,
        upper: r.upper,
        status: r.status.to_string(),
        candidate_word: word,
        candidate_value: value,
        notes: r.notes.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectRow {
    pub k: usize,
    pub mu: f64,
    pub delta: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummabilityDoc {
    pub verdict: String,
    pub mu_model: String,
    pub sigma_model: String,
    pub limsup_delta_root: f64,
    /// -limsup (log_m delta_k) / k; absent when the defects are numerically
    /// zero and the rate is unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceDoc {
    pub verdict: String,
    pub radius_v0: JsrDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderDoc {
    pub verdict: String,
    pub ell: usize,
    pub radius: JsrDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_term: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_term: Option<f64>,
    pub empirical_decay: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChecklistDoc {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDoc {
    pub alpha: f64,
    pub interval_lo: f64,
    pub interval_hi: f64,
    pub boundary: bool,
    pub checklist: Vec<ChecklistDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayDoc {
    pub ell: usize,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    pub scaled: Vec<f64>,
}

/// The machine-readable twin of the rendered analysis report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub scheme: String,
    pub ell: usize,
    pub headline: String,
    pub defects: Vec<DefectRow>,
    pub summability: SummabilityDoc,
    pub convergence: ConvergenceDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder: Option<HolderDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_refusal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub necessary: Option<DecayDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn fit_label(f: &SeriesFit) -> String {
    match f.model {
        FitModel::Zero => "zero".to_string(),
        FitModel::Geometric { ratio } => format!("geometric(ratio={ratio:.6})"),
        FitModel::Polynomial { power } => format!("polynomial(power={power:.3})"),
    }
}

/// Rows of the mu/delta/sigma table, one per level.
pub fn defect_rows(ds: &DefectSequence) -> Vec<DefectRow> {
    (0..ds.mu.len())
        .map(|i| DefectRow {
            k: i + 1,
            mu: ds.mu[i],
            delta: ds.delta[i],
            sigma: ds.sigma[i],
        })
        .collect()
}

/// Document form of a summability verdict.
pub fn summability_doc(r: &SummabilityReport) -> SummabilityDoc {
    SummabilityDoc {
        verdict: r.verdict.to_string(),
        mu_model: fit_label(&r.mu),
        sigma_model: fit_label(&r.sigma),
        limsup_delta_root: r.limsup_delta_root,
        decay_rate: finite(r.neg_log_m_delta_rate),
    }
}

/// Defect table plus its fitted rates: the machine form of the defects
/// command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectsDoc {
    pub scheme: String,
    pub ell: usize,
    pub horizon: usize,
    pub rows: Vec<DefectRow>,
    pub summability: SummabilityDoc,
}

fn headline(r: &RegularityReport) -> String {
    if let Some(e) = &r.exact {
        return format!("C^{}-convergent, alpha = {:.6} [certified]", r.ell, e.alpha);
    }
    if let Some(h) = &r.holder {
        if let (RegularityVerdict::Convergent { ell }, Some(a)) = (&h.verdict, h.alpha_lower) {
            let tag = if h.empirical_decay {
                "[empirical]"
            } else {
                "[certified]"
            };
            return format!("C^{ell}-convergent, alpha >= {a:.6} {tag}");
        }
    }
    match &r.convergence.verdict {
        RegularityVerdict::Convergent { .. } => "C^0-convergent [certified]".to_string(),
        RegularityVerdict::NotEstablished { reason } => format!("not-established ({reason})"),
    }
}

/// Assemble the document from an analysis result and the family labels of
/// the order-0 and order-ell restrictions.
pub fn report_doc(
    r: &RegularityReport,
    v0_labels: &[String],
    vell_labels: &[String],
) -> ReportDoc {
    ReportDoc {
        scheme: r.scheme.clone(),
        ell: r.ell,
        headline: headline(r),
        defects: defect_rows(&r.defects),
        summability: summability_doc(&r.summability),
        convergence: ConvergenceDoc {
            verdict: r.convergence.verdict.to_string(),
            radius_v0: jsr_doc(&r.convergence.radius_v0, v0_labels),
        },
        holder: r.holder.as_ref().map(|h| HolderDoc {
            verdict: h.verdict.to_string(),
            ell: h.ell,
            radius: jsr_doc(&h.radius, vell_labels),
            alpha_lower: h.alpha_lower.and_then(finite),
            radius_term: h.radius_term.and_then(finite),
            decay_term: h.decay_term.and_then(finite),
            empirical_decay: h.empirical_decay,
        }),
        exact: r.exact.as_ref().map(|e| ExactDoc {
            alpha: e.alpha,
            interval_lo: e.interval.0,
            interval_hi: e.interval.1,
            boundary: e.boundary,
            checklist: e
                .checklist
                .iter()
                .map(|c| ChecklistDoc {
                    name: c.name.to_string(),
                    passed: c.passed,
                    detail: c.detail.clone(),
                })
                .collect(),
        }),
        exact_refusal: r.exact_refusal.clone(),
        necessary: r.necessary.as_ref().map(|n| DecayDoc {
            ell: n.ell,
            verdict: n.verdict.to_string(),
            slope: finite(n.slope),
            scaled: n.scaled.clone(),
        }),
        notes: r.notes.clone(),
    }
}

/// Run the full analysis and assemble its document: the one-call entry the
/// command-line front end and the examples use.
pub fn full_report(
    name: &str,
    seq: &MaskSequence,
    d: &DilationSpec,
    ell: usize,
    opts: &AnalysisOptions,
) -> Result<ReportDoc> {
    let r = analyze(name, seq, d, ell, opts)?;
    let v0 = restricted_family(seq, d, 0)
        .map(|s| s.labels().to_vec())
        .unwrap_or_default();
    let vell = if ell == 0 {
        v0.clone()
    } else {
        restricted_family(seq, d, ell)
            .map(|s| s.labels().to_vec())
            .unwrap_or_else(|_| v0.clone())
    };
    Ok(report_doc(&r, &v0, &vell))
}

fn push_jsr(out: &mut String, indent: &str, label: &str, j: &JsrDoc) {
    out.push_str(&format!(
        "{indent}{label}: [{:.9}, {:.9}] status {} [certified]\n",
        j.lower, j.upper, j.status
    ));
    if let (Some(w), Some(v)) = (&j.candidate_word, j.candidate_value) {
        out.push_str(&format!(
            "{indent}  candidate: {w} (averaged spectral radius {v:.9})\n"
        ));
    }
    for n in &j.notes {
        out.push_str(&format!("{indent}  note: {n}\n"));
    }
}

/// One radius result as plain text, for the matrix-family commands.
pub fn render_jsr_text(name: &str, doc: &JsrDoc) -> String {
    let mut out = String::new();
    out.push_str(&format!("family: {name}\n"));
    push_jsr(&mut out, "", "radius", doc);
    out
}

/// The aligned defect table, shared by the analyze and defects renderings.
pub fn defect_table(rows: &[DefectRow], limit: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>5} {:>16} {:>16} {:>16}\n",
        "k", "mu_k", "delta_k", "m^(l k) delta_k"
    ));
    for row in rows.iter().take(limit) {
        out.push_str(&format!(
            "{:>5} {:>16.6e} {:>16.6e} {:>16.6e}\n",
            row.k, row.mu, row.delta, row.sigma
        ));
    }
    if rows.len() > limit {
        out.push_str(&format!(
            "{:>5} (and {} further levels)\n",
            "...",
            rows.len() - limit
        ));
    }
    out
}

/// Human-readable rendering; every digit group carries a [certified] or
/// [empirical] tag saying whether it comes from proved bounds or from a fit.
pub fn render_text(doc: &ReportDoc) -> String {
    let mut out = String::new();
    out.push_str(&format!("scheme: {}\n", doc.scheme));
    out.push_str(&format!("order: ell = {}\n", doc.ell));
    out.push_str(&format!("headline: {}\n\n", doc.headline));

    out.push_str(&format!(
        "approximate sum rules (order {}): {}\n",
        doc.ell + 1,
        doc.summability.verdict
    ));
    out.push_str(&format!("  mu fit:    {}\n", doc.summability.mu_model));
    out.push_str(&format!("  sigma fit: {}\n", doc.summability.sigma_model));
    out.push_str(&format!(
        "  limsup delta_k^(1/k) = {:.6} [empirical]\n",
        doc.summability.limsup_delta_root
    ));
    match doc.summability.decay_rate {
        Some(r) => out.push_str(&format!("  defect decay rate = {r:.6} [empirical]\n")),
        None => out.push_str("  defect decay rate unbounded (defects are numerically zero)\n"),
    }
    out.push('\n');
    out.push_str(&defect_table(&doc.defects, 12));
    out.push('\n');

    out.push_str(&format!("convergence: {}\n", doc.convergence.verdict));
    push_jsr(&mut out, "  ", "radius on V_0", &doc.convergence.radius_v0);
    if let Some(h) = &doc.holder {
        out.push('\n');
        out.push_str(&format!("Hölder bound at ell = {}: {}\n", h.ell, h.verdict));
        push_jsr(&mut out, "  ", &format!("radius on V_{}", h.ell), &h.radius);
        if let Some(a) = h.alpha_lower {
            let tag = if h.empirical_decay {
                "[empirical]"
            } else {
                "[certified]"
            };
            out.push_str(&format!("  alpha >= {a:.6} {tag}\n"));
            if let (Some(rt), Some(dt)) = (h.radius_term, h.decay_term) {
                out.push_str(&format!(
                    "    radius term {rt:.6} [certified], decay term {dt:.6} [empirical]\n"
                ));
            } else if let Some(rt) = h.radius_term {
                out.push_str(&format!(
                    "    radius term {rt:.6} [certified], decay term unbounded\n"
                ));
            }
        }
    }
    out.push('\n');
    match (&doc.exact, &doc.exact_refusal) {
        (Some(e), _) => {
            out.push_str(&format!(
                "exact exponent: alpha = {:.6} in [{:.6}, {:.6}] [certified]\n",
                e.alpha, e.interval_lo, e.interval_hi
            ));
            if e.boundary {
                out.push_str("  note: alpha sits at the ell + 1 window edge\n");
            }
            for c in &e.checklist {
                out.push_str(&format!(
                    "  [{}] {}: {}\n",
                    if c.passed { "ok" } else { "no" },
                    c.name,
                    c.detail
                ));
            }
        }
        (None, Some(reason)) => {
            out.push_str(&format!("exact exponent: refused; {reason}\n"));
        }
        (None, None) => {}
    }
    if let Some(n) = &doc.necessary {
        out.push('\n');
        out.push_str(&format!(
            "necessary decay at ell = {}: {}",
            n.ell, n.verdict
        ));
        match n.slope {
            Some(s) => out.push_str(&format!(" (tail slope {s:.4} [empirical])\n")),
            None => out.push_str(" (scaled defects vanish)\n"),
        }
    }
    if !doc.notes.is_empty() {
        out.push_str("\nnotes:\n");
        for n in &doc.notes {
            out.push_str(&format!("  - {n}\n"));
        }
    }
    out
}

/// Serialize the machine-readable twin.
pub fn to_json(doc: &ReportDoc) -> Result<String> {
    Ok(serde_json::to_string_pretty(doc)?)
}

/// Parse a machine-readable report back into the document model.
pub fn parse_report(text: &str) -> Result<ReportDoc> {
    Ok(serde_json::from_str(text)?)
}
