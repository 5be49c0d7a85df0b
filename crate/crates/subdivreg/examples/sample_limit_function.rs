//! Sample a basic limit function by refining the delta sequence, write the
//! grid to CSV, and check the samples against a closed form. Level-k samples
//! approximate the limit function at the dyadic points shifted by the mask's
//! center-of-mass drift, so the comparison aligns by that drift.
//!
//! Usage: cargo run --example sample_limit_function

use subdivreg::cascade::{basic_limit_samples, tail_drift, write_csv};
use subdivreg::schemes::{builtin, SchemeParams};

/// Quadratic B-spline on [0, 3].
fn bspline2(x: f64) -> f64 {
    if x < 0.0 || x >= 3.0 {
        0.0
    } else if x < 1.0 {
        x * x / 2.0
    } else if x < 2.0 {
        (-2.0 * x * x + 6.0 * x - 3.0) / 2.0
    } else {
        (3.0 - x) * (3.0 - x) / 2.0
    }
}

fn main() -> subdivreg::Result<()> {
    let levels = 10;
    let desc = builtin("chaikin", &SchemeParams::default())?;
    let data = basic_limit_samples(&desc.sequence, &desc.dilation, levels, 1)?;

    let out = std::env::temp_dir().join("chaikin_limit.csv");
    let mut buf = Vec::new();
    write_csv(&data, &desc.dilation, &mut buf)?;
    std::fs::write(&out, &buf)?;
    println!("wrote {} samples to {}", data.values.len(), out.display());

    let step = f64::from(2u32.pow(levels as u32));
    let drift = tail_drift(&desc.sequence, &desc.dilation, 1, levels)?[0];
    let worst = data
        .values
        .iter()
        .map(|(alpha, &v)| (v - bspline2(alpha[0] as f64 / step + drift)).abs())
        .fold(0.0f64, f64::max);
    println!("sample points sit at alpha/2^{levels} + {drift:.6}");
    println!("sup deviation from the quadratic B-spline: {worst:.3e}");
    Ok(())
}
