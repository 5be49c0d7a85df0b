//! Dense two-phase simplex used for Minkowski-functional evaluations: the
//! minimal 1-norm of a coefficient vector lambda with V lambda = w. Bland's
//! rule keeps it cycle-free; problems here are small and dense.

use nalgebra::{DMatrix, DVector};

/// Minimize sum |lambda_i| subject to V lambda = w, lambda free, by splitting
/// lambda = p - n with p, n >= 0. Returns None when the system is infeasible
/// (w outside the column span of V).
pub fn min_one_norm(v_cols: &[DVector<f64>], w: &DVector<f64>, tol: f64) -> Option<f64> {
    let d = w.len();
    let k = v_cols.len();
    if k == 0 {
        return if w.norm() <= tol { Some(0.0) } else { None };
    }
    // Variables: p_0..p_{k-1}, n_0..n_{k-1}, artificials a_0..a_{d-1}.
    let nv = 2 * k;
    let total = nv + d;
    let mut tab = DMatrix::zeros(d, total + 1);
    for (j, col) in v_cols.iter().enumerate() {
        for i in 0..d {
            tab[(i, j)] = col[i];
            tab[(i, k + j)] = -col[i];
        }
    }
    for i in 0..d {
        if w[i] < 0.0 {
            for j in 0..nv {
                tab[(i, j)] = -tab[(i, j)];
            }
            tab[(i, total)] = -w[i];
        } else {
            tab[(i, total)] = w[i];
        }
        tab[(i, nv + i)] = 1.0;
    }
    let mut basis: Vec<usize> = (nv..total).collect();

    // Phase 1: drive the artificial variables to zero.
    let phase1_cost: Vec<f64> = (0..total).map(|j| if j >= nv { 1.0 } else { 0.0 }).collect();
    let obj1 = run_simplex(&mut tab, &mut basis, &phase1_cost, tol)?;
    if obj1 > tol {
        return None;
    }
    // Pivot any artificial still in the basis out if a real column is
    // available on its row; a zero row otherwise is redundant and harmless.
    for row in 0..d {
        if basis[row] >= nv {
            if let Some(col) = (0..nv).find(|&j| tab[(row, j)].abs() > tol) {
                pivot(&mut tab, &mut basis, row, col);
            }
        }
    }

    // Phase 2: the real objective, with artificial columns frozen.
    let mut phase2_cost = vec![0.0; total];
    for c in phase2_cost.iter_mut().take(nv) {
        *c = 1.0;
    }
    for j in nv..total {
        if !basis.contains(&j) {
            for i in 0..d {
                tab[(i, j)] = 0.0;
            }
        }
    }
    let obj2 = run_simplex(&mut tab, &mut basis, &phase2_cost, tol)?;
    Some(obj2)
}

fn pivot(tab: &mut DMatrix<f64>, basis: &mut [usize], row: usize, col: usize) {
    let d = tab.nrows();
    let total = tab.ncols();
    let pv = tab[(row, col)];
    for j in 0..total {
        tab[(row, j)] /= pv;
    }
    for i in 0..d {
        if i != row {
            let f = tab[(i, col)];
            if f != 0.0 {
                for j in 0..total {
                    tab[(i, j)] -= f * tab[(row, j)];
                }
            }
        }
    }
    basis[row] = col;
}

/// Minimize cost^T x over the current tableau; returns the objective value,
/// or None if the LP is unbounded (which the callers' problems never are,
/// so it is treated as a numerical failure).
fn run_simplex(
    tab: &mut DMatrix<f64>,
    basis: &mut [usize],
    cost: &[f64],
    tol: f64,
) -> Option<f64> {
    let d = tab.nrows();
    let total = tab.ncols() - 1;
    loop {
        // Reduced costs r_j = c_j - c_B^T B^{-1} A_j via the tableau rows.
        let mut entering = None;
        for j in 0..total {
            let mut r = cost[j];
            for i in 0..d {
                r -= cost[basis[i]] * tab[(i, j)];
            }
            if r < -tol {
                entering = Some(j);
                break; // Bland: smallest index.
            }
        }
        let Some(col) = entering else {
            let mut obj = 0.0;
            for i in 0..d {
                obj += cost[basis[i]] * tab[(i, total)];
            }
            return Some(obj);
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..d {
            if tab[(i, col)] > tol {
                let ratio = tab[(i, total)] / tab[(i, col)];
                let better = ratio < best_ratio - tol
                    || ((ratio - best_ratio).abs() <= tol
                        && leave.is_some_and(|l| basis[i] < basis[l]));
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let row = leave?;
        pivot(tab, basis, row, col);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols(data: &[&[f64]]) -> Vec<DVector<f64>> {
        data.iter().map(|c| DVector::from_row_slice(c)).collect()
    }

    #[test]
    fn exact_representation() {
        // w = 0.5 c0 - 0.25 c1 is the unique representation; 1-norm 0.75.
        let v = cols(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let w = DVector::from_row_slice(&[0.5, -0.25]);
        let norm = min_one_norm(&v, &w, 1e-10).unwrap();
        assert!((norm - 0.75).abs() < 1e-9);
    }

    #[test]
    fn redundant_columns_reduce_norm() {
        // With the diagonal and the sum direction available, representing
        // (1, 1) costs only 1 through the sum column.
        let v = cols(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let w = DVector::from_row_slice(&[1.0, 1.0]);
        let norm = min_one_norm(&v, &w, 1e-10).unwrap();
        assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_target() {
        let v = cols(&[&[1.0, 0.0, 0.0]]);
        let w = DVector::from_row_slice(&[0.0, 1.0, 0.0]);
        assert!(min_one_norm(&v, &w, 1e-10).is_none());
    }

    #[test]
    fn negative_coefficients_allowed() {
        let v = cols(&[&[2.0]]);
        let w = DVector::from_row_slice(&[-1.0]);
        let norm = min_one_norm(&v, &w, 1e-10).unwrap();
        assert!((norm - 0.5).abs() < 1e-9);
    }

    #[test]
    fn zero_target_is_free() {
        let v = cols(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let w = DVector::from_row_slice(&[0.0, 0.0]);
        let norm = min_one_norm(&v, &w, 1e-10).unwrap();
        assert!(norm.abs() < 1e-9);
    }

    #[test]
    fn degenerate_columns_do_not_cycle() {
        let v = cols(&[
            &[1.0, 1.0, 0.0],
            &[1.0, 1.0, 1e-12],
            &[0.5, 0.5, 0.0],
            &[1.0, 1.0, -1e-12],
        ]);
        let w = DVector::from_row_slice(&[2.0, 2.0, 0.0]);
        let norm = min_one_norm(&v, &w, 1e-10).unwrap();
        assert!(norm <= 2.0 + 1e-9);
    }
}
