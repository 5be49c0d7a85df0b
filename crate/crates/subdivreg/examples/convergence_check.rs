//! Order-0 convergence certificates, and what a failure looks like: the
//! harmonically inflated scheme violates the approximate sum rules, its
//! symbol products at frequency zero grow without bound, and normalization
//! refuses to silently rescale it.
//!
//! Usage: cargo run --example convergence_check

use subdivreg::cascade::fourier_product;
use subdivreg::regularity::{convergence_check, AnalysisOptions};
use subdivreg::schemes::{builtin, SchemeParams};
use subdivreg::symbol::normalize_sequence;

fn main() -> subdivreg::Result<()> {
    let opts = AnalysisOptions::default();
    for name in ["hat", "chaikin", "fourpoint", "example1_scaled"] {
        let desc = builtin(name, &SchemeParams::default())?;
        let r = convergence_check(&desc.sequence, &desc.dilation, &opts)?;
        println!("{name}: {}", r.verdict);
        println!(
            "  radius on V_0 in [{:.6}, {:.6}] ({})",
            r.radius_v0.lower, r.radius_v0.upper, r.radius_v0.status
        );
    }

    let inflated = builtin("example1_scaled", &SchemeParams::default())?;
    let fp = fourier_product(&inflated.sequence, &inflated.dilation, 0.0, 8)?;
    println!("\nexample1_scaled symbol products at frequency 0:");
    println!(
        "  partial products {:.1}, {:.1}, ..., {:.1} (diverging: {})",
        fp.partials[0].re,
        fp.partials[1].re,
        fp.partials.last().unwrap().re,
        fp.diverging
    );
    if let Some(note) = &fp.note {
        println!("  {note}");
    }
    match normalize_sequence(&inflated.sequence, &inflated.dilation, false) {
        Ok(_) => println!("  normalization accepted (unexpected)"),
        Err(e) => println!("  normalization refused: {e}"),
    }
    Ok(())
}
