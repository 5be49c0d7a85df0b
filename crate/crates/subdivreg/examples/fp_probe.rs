use subdivreg::regularity::restricted_family;
use subdivreg::schemes::{builtin, SchemeParams};

fn main() {
    let d = builtin("fourpoint", &SchemeParams::default()).unwrap();
    let set = restricted_family(&d.sequence, &d.dilation, 1).unwrap();
    for base_len in [2usize, 3, 5, 7] {
        for idx in 0..(1usize << base_len) {
            let word: Vec<usize> = (0..base_len).map(|b| (idx >> b) & 1).collect();
            let block = set.word_product(&word);
            let mut p = block.clone();
            for reps in 2..=(40 / base_len) {
                p = &p * &block;
                eprint!("base {base_len} idx {idx} reps {reps}: ");
                let rho = p.complex_eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max);
                eprintln!("{:.3e}", rho);
            }
        }
    }
    eprintln!("done");
}
