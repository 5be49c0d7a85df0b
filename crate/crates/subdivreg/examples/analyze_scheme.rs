//! Full regularity analysis of a built-in scheme: defect table, convergence
//! certificate, Hölder lower bound, the exact-exponent attempt with its
//! hypothesis checklist, and the necessary-decay check.
//!
//! Usage: cargo run --example analyze_scheme [-- <name> [ell]]

use subdivreg::regularity::AnalysisOptions;
use subdivreg::report::{full_report, render_text};
use subdivreg::schemes::{builtin, builtin_names, SchemeParams};

fn main() -> subdivreg::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args
        .next()
        .unwrap_or_else(|| "example5_perturbed_chaikin".to_string());
    let ell: usize = args
        .next()
        .map(|s| s.parse().expect("ell must be a nonnegative integer"))
        .unwrap_or(1);

    let desc = match builtin(&name, &SchemeParams::default()) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{e}");
            eprintln!("known schemes: {}", builtin_names().join(", "));
            std::process::exit(2);
        }
    };
    let doc = full_report(
        &desc.name,
        &desc.sequence,
        &desc.dilation,
        ell,
        &AnalysisOptions::default(),
    )?;
    print!("{}", render_text(&doc));
    Ok(())
}
