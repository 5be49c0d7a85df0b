//! Hölder exponents of the Daubechies scaling functions. For each order the
//! exact-exponent checklist is tried at decreasing smoothness levels until
//! its window test accepts, which also determines the integer part of the
//! exponent.
//!
//! Usage: cargo run --example daubechies_regularity [-- <max_n>]
//!
//! Orders up to 4 finish in seconds; larger ones take progressively longer
//! because the restricted families grow.

use std::time::Instant;

use subdivreg::regularity::{exact_holder, AnalysisOptions};
use subdivreg::schemes::{builtin, SchemeParams};
use subdivreg::symbol::sum_rule_order;

fn main() -> subdivreg::Result<()> {
    let max_n: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("max_n must be an integer >= 2"))
        .unwrap_or(4);
    let opts = AnalysisOptions::default();
    for n in 2..=max_n {
        let params = SchemeParams {
            n: Some(n),
            ..SchemeParams::default()
        };
        let desc = builtin("daubechies", &params)?;
        let mask = &desc.sequence.limit_points()[0];
        let order = sum_rule_order(mask, &desc.dilation, 8)?;
        let start = Instant::now();
        let mut found = None;
        for ell in (0..order).rev() {
            if let Ok(r) = exact_holder(&desc.sequence, &desc.dilation, ell, &opts) {
                found = Some((ell, r));
                break;
            }
        }
        let elapsed = start.elapsed();
        match found {
            Some((ell, r)) => println!(
                "daubechies({n}): alpha = {:.4} in [{:.4}, {:.4}], C^{ell}, {elapsed:.2?}",
                r.alpha, r.interval.0, r.interval.1
            ),
            None => println!("daubechies({n}): no window accepted, {elapsed:.2?}"),
        }
    }
    Ok(())
}
