//! Defect tables: how far each level's mask sits from exact sum rules, with
//! the fitted decay rates that decide summability. A stationary scheme whose
//! mask satisfies the sum rules has an all-zero table; a genuinely
//! non-stationary scheme shows the decay that the theory requires.
//!
//! Usage: cargo run --example defect_table

use subdivreg::report::{defect_rows, defect_table, summability_doc};
use subdivreg::schemes::{builtin, SchemeParams};
use subdivreg::symbol::{approximate_sum_rule_verdict, defect_sequence};

fn main() -> subdivreg::Result<()> {
    for (name, ell) in [
        ("example5_perturbed_chaikin", 1),
        ("example6_perturbed_loop", 1),
        ("cubic_bspline", 2),
    ] {
        let desc = builtin(name, &SchemeParams::default())?;
        let ds = defect_sequence(&desc.sequence, &desc.dilation, ell, 12)?;
        let s = summability_doc(&approximate_sum_rule_verdict(&ds));
        println!("{name}, ell = {ell}:");
        print!("{}", defect_table(&defect_rows(&ds), 12));
        println!(
            "verdict: {} (mu fit {}, sigma fit {})\n",
            s.verdict, s.mu_model, s.sigma_model
        );
    }
    Ok(())
}
