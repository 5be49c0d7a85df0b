//! Joint-spectral-radius bounds for the bundled transition-matrix families:
//! certified lower and upper bounds plus the finite product attaining the
//! lower one.
//!
//! Usage: cargo run --example jsr_bounds

use std::time::Instant;

use subdivreg::jsr::{jsr_with_options, JsrOptions};
use subdivreg::report::{jsr_doc, render_jsr_text};
use subdivreg::schemes::{fixture_names, matrix_fixture};

fn main() -> subdivreg::Result<()> {
    for name in fixture_names() {
        let set = matrix_fixture(name)?;
        let start = Instant::now();
        let result = jsr_with_options(&set, &JsrOptions::default())?;
        let elapsed = start.elapsed();
        print!("{}", render_jsr_text(name, &jsr_doc(&result, set.labels())));
        let gap = (result.upper - result.lower) / result.lower;
        println!("  relative gap {gap:.2e}, {elapsed:.2?}\n");
    }
    Ok(())
}
