//! Transition matrices T_eps[alpha, beta] = a(eps + M alpha - beta) over the
//! index set K, difference subspaces orthogonal to polynomial samples, the
//! degree-graded transformation basis, and block decomposition of transition
//! matrices in that basis.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::{
    coset_representatives, monomial_count, monomials_up_to, DilationSpec, IndexSetK,
};
use crate::symbol::Mask;

/// One transition matrix per coset representative, over a common index set.
#[derive(Debug, Clone)]
pub struct TransitionFamily {
    pub k_set: IndexSetK,
    pub reps: Vec<Vec<i64>>,
    pub matrices: Vec<DMatrix<f64>>,
}

/// Build the family T_eps[alpha, beta] = a(eps + M alpha - beta) with rows
/// and columns running over K in its lexicographic order.
pub fn build_transition(
    mask: &Mask,
    d: &DilationSpec,
    k: &IndexSetK,
) -> Result<TransitionFamily> {
    if mask.dim() != d.dim() {
        return Err(Error::Shape(format!(
            "mask dimension {} does not match the dilation dimension {}",
            mask.dim(),
            d.dim()
        )));
    }
    if mask.support_bound() > k.support_bound() {
        return Err(Error::SupportMismatch(format!(
            "mask support bound {} exceeds the index set's bound {}",
            mask.support_bound(),
            k.support_bound()
        )));
    }
    let cosets = coset_representatives(d);
    let n = k.len();
    let points = k.points();
    let matrices = cosets
        .reps
        .iter()
        .map(|eps| {
            DMatrix::from_fn(n, n, |i, j| {
                let ma = d.apply(&points[i]);
                let idx: Vec<i64> = ma
                    .iter()
                    .zip(eps)
                    .zip(&points[j])
                    .map(|((a, e), b)| a + e - b)
                    .collect();
                mask.coefficient(&idx)
            })
        })
        .collect();
    Ok(TransitionFamily {
        k_set: k.clone(),
        reps: cosets.reps,
        matrices,
    })
}

/// Orthonormal basis of the subspace of sequences on K orthogonal to all
/// polynomial samples [alpha^eta], |eta| <= ell.
#[derive(Debug, Clone)]
pub struct DifferenceSubspace {
    pub ell: usize,
    /// |K| x dim matrix with orthonormal columns.
    pub basis: DMatrix<f64>,
}

impl DifferenceSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Polynomial sample matrix S[i, t] = alpha_i^{eta_t} with columns ordered by
/// total degree, lexicographic within a degree.
fn sample_matrix(k: &IndexSetK, s: usize, ell: usize) -> DMatrix<f64> {
    let etas = monomials_up_to(s, ell);
    let points = k.points();
    DMatrix::from_fn(k.len(), etas.len(), |i, t| {
        etas[t]
            .iter()
            .zip(&points[i])
            .map(|(&e, &a)| (a as f64).powi(e as i32))
            .product()
    })
}

/// Modified Gram-Schmidt with largest-residual pivoting. Returns the
/// orthonormal vectors and the index order in which columns were accepted.
fn mgs_pivoted(cols: &[DVector<f64>], rank_tol: f64) -> (Vec<DVector<f64>>, Vec<usize>) {
    let mut work: Vec<DVector<f64>> = cols.to_vec();
    let mut alive: Vec<usize> = (0..cols.len()).collect();
    let mut q = Vec::new();
    let mut order = Vec::new();
    while !alive.is_empty() {
        let (pos, &best) = alive
            .iter()
            .enumerate()
            .max_by(|a, b| {
                work[*a.1]
                    .norm()
                    .partial_cmp(&work[*b.1].norm())
                    .expect("finite norms")
            })
            .expect("nonempty");
        if work[best].norm() <= rank_tol {
            break;
        }
        let v = work[best].normalize();
        for &i in &alive {
            if i != best {
                let c = v.dot(&work[i]);
                work[i] -= c * &v;
            }
        }
        q.push(v);
        order.push(best);
        alive.remove(pos);
    }
    (q, order)
}

/// Orthonormal basis of the complement of span(q) in R^n, deterministic via
/// largest-residual pivoting over the standard basis.
fn orthonormal_complement(q: &[DVector<f64>], n: usize) -> Vec<DVector<f64>> {
    let mut residuals: Vec<DVector<f64>> = (0..n)
        .map(|i| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            for v in q {
                let c = v.dot(&e);
                e -= c * v;
            }
            e
        })
        .collect();
    let mut out: Vec<DVector<f64>> = Vec::new();
    while q.len() + out.len() < n {
        let best = (0..n)
            .max_by(|&a, &b| {
                residuals[a]
                    .norm()
                    .partial_cmp(&residuals[b].norm())
                    .expect("finite norms")
            })
            .expect("nonempty");
        let v = residuals[best].normalize();
        for r in residuals.iter_mut() {
            let c = v.dot(r);
            *r -= c * &v;
        }
        out.push(v);
    }
    out
}

/// Compute the difference subspace V_ell on K: all sequences orthogonal to
/// polynomial samples of total degree <= ell. Columns of the sample matrix
/// are normalized before rank detection so badly scaled supports (large K)
/// do not defeat it.
pub fn difference_subspace(k: &IndexSetK, s: usize, ell: usize) -> Result<DifferenceSubspace> {
    let sm = sample_matrix(k, s, ell);
    let t = sm.ncols();
    let n = k.len();
    if n <= t {
        return Err(Error::DegenerateSubspace {
            degree: ell,
            size: n,
        });
    }
    let cols: Vec<DVector<f64>> = (0..t)
        .map(|j| {
            let c = sm.column(j).into_owned();
            let norm = c.norm();
            c / norm
        })
        .collect();
    let (q, order) = mgs_pivoted(&cols, 1e-10);
    if order.len() < t {
        return Err(Error::DegenerateSubspace {
            degree: ell,
            size: n,
        });
    }
    let comp = orthonormal_complement(&q, n);
    let basis = DMatrix::from_columns(&comp);
    Ok(DifferenceSubspace { ell, basis })
}

/// The compression of T to a subspace, with the least-squares residual of
/// T V = V X measuring how invariant the subspace actually is.
#[derive(Debug, Clone)]
pub struct RestrictedMatrix {
    pub matrix: DMatrix<f64>,
    pub residual: f64,
    pub invariant: bool,
}

/// Restrict T to the subspace: X = V^T T V for orthonormal V, flagged
/// non-invariant when ||T V - V X|| exceeds the tolerance (default
/// 1e-9 x ||T||_1). Non-invariance is diagnostic, not an error.
pub fn restrict(t: &DMatrix<f64>, v: &DifferenceSubspace, tol: Option<f64>) -> RestrictedMatrix {
    let tv = t * &v.basis;
    let x = v.basis.transpose() * &tv;
    let residual = (&tv - &v.basis * &x).norm();
    let t_norm: f64 = (0..t.ncols())
        .map(|j| t.column(j).iter().map(|e| e.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let tol = tol.unwrap_or(1e-9 * t_norm.max(1.0));
    RestrictedMatrix {
        matrix: x,
        residual,
        invariant: residual <= tol,
    }
}

/// Change-of-basis matrix adapted to the degree grading: the first column is
/// e_1, then for each degree j = 1..=ell the minimal-norm sample-space duals
/// of the degree-j monomials, then an orthonormal basis of V_ell.
#[derive(Debug, Clone)]
pub struct TransformationBasis {
    pub matrix: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub ell: usize,
    /// dim of the polynomial part: 1 + d_2 + ... + d_{ell+1}.
    pub poly_dim: usize,
    /// Sizes d_1, ..., d_{ell+1} of the diagonal blocks.
    pub degree_sizes: Vec<usize>,
    pub scale_m: f64,
}

/// Build the transformation basis on K for an isotropic dilation. In this
/// basis, every transition matrix of a mask with sum rules of order ell + 1
/// becomes block lower triangular with diagonal blocks
/// 1, m^{-1} I, ..., m^{-ell} I, Q.
pub fn transformation_basis(
    k: &IndexSetK,
    d: &DilationSpec,
    ell: usize,
) -> Result<TransformationBasis> {
    let m = d
        .isotropic_m()
        .ok_or_else(|| Error::Unsupported("transformation basis needs M = mI".into()))?;
    let s = d.dim();
    let n = k.len();
    let subspace = difference_subspace(k, s, ell)?;
    let sm = sample_matrix(k, s, ell);
    let t = sm.ncols();
    // Orthonormalize the normalized sample columns in their given order to
    // get S~ = Q R; the minimal-norm dual of sample kappa solves S^T v = e.
    let norms: Vec<f64> = (0..t).map(|j| sm.column(j).norm()).collect();
    let mut q_cols: Vec<DVector<f64>> = Vec::with_capacity(t);
    let mut r = DMatrix::zeros(t, t);
    for j in 0..t {
        let mut v = sm.column(j).into_owned() / norms[j];
        for (i, qi) in q_cols.iter().enumerate() {
            let c = qi.dot(&v);
            r[(i, j)] = c;
            v -= c * qi;
        }
        let nv = v.norm();
        if nv <= 1e-10 {
            return Err(Error::DegenerateBasis(format!(
                "polynomial samples of degree <= {ell} are linearly dependent on K"
            )));
        }
        r[(j, j)] = nv;
        q_cols.push(v / nv);
    }
    let mut columns: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut e1 = DVector::zeros(n);
    e1[0] = 1.0;
    columns.push(e1);
    // v_eta = Q R^{-T} D^{-1} e_idx satisfies <v_eta, [alpha^kappa]> = delta.
    let q_mat = DMatrix::from_columns(&q_cols);
    let r_t = r.transpose();
    for idx in 1..t {
        let mut rhs = DVector::zeros(t);
        rhs[idx] = 1.0 / norms[idx];
        let u = r_t
            .clone()
            .solve_lower_triangular(&rhs)
            .ok_or_else(|| Error::DegenerateBasis("singular sample triangle".into()))?;
        columns.push(&q_mat * u);
    }
    for j in 0..subspace.dim() {
        columns.push(subspace.basis.column(j).into_owned());
    }
    let matrix = DMatrix::from_columns(&columns);
    let inverse = matrix
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateBasis("transformation basis is singular".into()))?;
    let degree_sizes: Vec<usize> = (0..=ell).map(|j| monomial_count(s, j)).collect();
    Ok(TransformationBasis {
        matrix,
        inverse,
        ell,
        poly_dim: t,
        degree_sizes,
        scale_m: m as f64,
    })
}

/// A transition matrix conjugated into the transformation basis.
#[derive(Debug, Clone)]
pub struct TransformedMatrix {
    /// B^{-1} T B in full.
    pub transformed: DMatrix<f64>,
    /// The trailing block acting on the difference subspace.
    pub q_block: DMatrix<f64>,
    /// Sup norm of the deviation from the exact structure: diagonal blocks
    /// away from m^{-j} I, upper entries in the polynomial part, and the
    /// whole polynomial-rows-to-difference-columns block.
    pub delta_norm: f64,
}

/// Conjugate each transition matrix by the transformation basis and split off
/// the structural deviation. For limit masks with exact sum rules of order
/// ell + 1 the deviation vanishes; for level-k masks it is bounded by a
/// constant times delta_k.
pub fn block_decompose(
    family: &TransitionFamily,
    basis: &TransformationBasis,
) -> Result<Vec<TransformedMatrix>> {
    let n = family.k_set.len();
    if basis.matrix.nrows() != n {
        return Err(Error::Shape(format!(
            "basis built on an index set of size {}, family has {n}",
            basis.matrix.nrows()
        )));
    }
    let p = basis.poly_dim;
    let mut out = Vec::with_capacity(family.matrices.len());
    for t in &family.matrices {
        let tt = &basis.inverse * t * &basis.matrix;
        let q_block = tt.view((p, p), (n - p, n - p)).into_owned();
        let mut delta: f64 = 0.0;
        // Expected diagonal: 1, m^{-1} I_{d_2}, ..., m^{-ell} I_{d_{ell+1}}.
        let mut row0 = 0;
        for (j, &dj) in basis.degree_sizes.iter().enumerate() {
            let target = basis.scale_m.powi(-(j as i32));
            for a in row0..row0 + dj {
                for b in 0..p {
                    let expect = if a == b { target } else { 0.0 };
                    if b >= row0 {
                        // Entries at or above the diagonal block must match
                        // the fixed structure; entries below are allowed.
                        delta = delta.max((tt[(a, b)] - expect).abs());
                    }
                }
            }
            row0 += dj;
        }
        for a in 0..p {
            for b in p..n {
                delta = delta.max(tt[(a, b)].abs());
            }
        }
        out.push(TransformedMatrix {
            transformed: tt,
            q_block,
            delta_norm: delta,
        });
    }
    Ok(out)
}

/// Write one matrix in the interchange format: a header line
/// `matrix <name> <rows> <cols>` followed by row-major entries, one row per
/// line, at 17 significant digits.
pub fn write_matrix(w: &mut impl Write, name: &str, m: &DMatrix<f64>) -> Result<()> {
    writeln!(w, "matrix {name} {} {}", m.nrows(), m.ncols())?;
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

/// Read every `matrix` block from the reader. Errors carry 1-based line
/// numbers.
pub fn read_matrices(r: impl BufRead) -> Result<Vec<(String, DMatrix<f64>)>> {
    let mut out = Vec::new();
    let mut lines = r.lines().enumerate();
    while let Some((ln, line)) = lines.next() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "matrix" {
            return Err(Error::Parse {
                line: ln + 1,
                message: format!("expected `matrix <name> <rows> <cols>`, got `{trimmed}`"),
            });
        }
        let name = parts[1].to_string();
        let rows: usize = parts[2].parse().map_err(|_| Error::Parse {
            line: ln + 1,
            message: format!("bad row count `{}`", parts[2]),
        })?;
        let cols: usize = parts[3].parse().map_err(|_| Error::Parse {
            line: ln + 1,
            message: format!("bad column count `{}`", parts[3]),
        })?;
        let mut data = Vec::with_capacity(rows * cols);
        for row_idx in 0..rows {
            let (ln2, row_line) = lines.next().ok_or(Error::Parse {
                line: ln + 1 + row_idx,
                message: "unexpected end of file inside matrix block".into(),
            })?;
            let row_line = row_line?;
            let entries: Vec<&str> = row_line.split_whitespace().collect();
            if entries.len() != cols {
                return Err(Error::Parse {
                    line: ln2 + 1,
                    message: format!("expected {cols} entries, got {}", entries.len()),
                });
            }
            for e in entries {
                data.push(e.parse::<f64>().map_err(|_| Error::Parse {
                    line: ln2 + 1,
                    message: format!("bad number `{e}`"),
                })?);
            }
        }
        out.push((name, DMatrix::from_row_slice(rows, cols, &data)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::compute_index_set;

    fn chaikin() -> Mask {
        Mask::univariate(&[0.25, 0.75, 0.75, 0.25]).unwrap()
    }

    fn cubic_bspline() -> Mask {
        Mask::univariate(&[0.125, 0.5, 0.75, 0.5, 0.125]).unwrap()
    }

    fn binary() -> DilationSpec {
        DilationSpec::isotropic(1, 2).unwrap()
    }

    fn chaikin_family() -> TransitionFamily {
        let d = binary();
        let k = compute_index_set(&d, 3).unwrap();
        build_transition(&chaikin(), &d, &k).unwrap()
    }

    #[test]
    fn entries_match_mask_lookup() {
        let fam = chaikin_family();
        let mask = chaikin();
        let pts = fam.k_set.points();
        for (e, t) in fam.reps.iter().zip(&fam.matrices) {
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    let idx = vec![e[0] + 2 * pts[i][0] - pts[j][0]];
                    assert_eq!(t[(i, j)], mask.coefficient(&idx));
                }
            }
        }
    }

    #[test]
    fn columns_enumerate_cosets() {
        // Each column of T_eps must contain exactly the mask values on one
        // residue class eps - beta mod 2.
        let fam = chaikin_family();
        let mask = chaikin();
        let pts = fam.k_set.points();
        for (e, t) in fam.reps.iter().zip(&fam.matrices) {
            for j in 0..pts.len() {
                let col_sum: f64 = (0..pts.len()).map(|i| t[(i, j)]).sum();
                let coset_sum: f64 = mask
                    .entries()
                    .filter(|(alpha, _)| (alpha[0] - e[0] + pts[j][0]).rem_euclid(2) == 0)
                    .map(|(_, v)| v)
                    .sum();
                assert_eq!(col_sum, coset_sum);
                assert!((col_sum - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn support_mismatch_is_an_error() {
        let d = binary();
        let k = compute_index_set(&d, 3).unwrap();
        let long = Mask::univariate(&[0.1; 7]).unwrap();
        assert!(matches!(
            build_transition(&long, &d, &k),
            Err(Error::SupportMismatch(_))
        ));
    }

    #[test]
    fn difference_subspace_dimensions() {
        let d = binary();
        let k = compute_index_set(&d, 3).unwrap();
        assert_eq!(k.len(), 7);
        let v0 = difference_subspace(&k, 1, 0).unwrap();
        assert_eq!(v0.dim(), 6);
        let v1 = difference_subspace(&k, 1, 1).unwrap();
        assert_eq!(v1.dim(), 5);
        let d2 = DilationSpec::isotropic(2, 2).unwrap();
        let k2 = compute_index_set(&d2, 4).unwrap();
        let v = difference_subspace(&k2, 2, 1).unwrap();
        assert_eq!(v.dim(), k2.len() - 3);
    }

    #[test]
    fn subspace_is_orthonormal_and_annihilates_samples() {
        let d = binary();
        let k = compute_index_set(&d, 3).unwrap();
        let v = difference_subspace(&k, 1, 1).unwrap();
        let gram = v.basis.transpose() * &v.basis;
        assert!((gram - DMatrix::identity(5, 5)).norm() < 1e-12);
        let sm = sample_matrix(&k, 1, 1);
        assert!((sm.transpose() * &v.basis).norm() < 1e-12);
    }

    #[test]
    fn too_small_index_set_is_degenerate() {
        let d = binary();
        let k = compute_index_set(&d, 1).unwrap();
        assert_eq!(k.len(), 5);
        assert!(matches!(
            difference_subspace(&k, 1, 4),
            Err(Error::DegenerateSubspace { .. })
        ));
    }

    #[test]
    fn restriction_invariance_and_residual() {
        let fam = chaikin_family();
        let k = &fam.k_set;
        for ell in [0usize, 1] {
            let v = difference_subspace(k, 1, ell).unwrap();
            for t in &fam.matrices {
                let r = restrict(t, &v, None);
                assert!(r.invariant, "ell = {ell}, residual {}", r.residual);
                assert!(r.residual < 1e-12);
            }
        }
        // A subspace with no invariance property gets flagged, not rejected.
        let skew = DifferenceSubspace {
            ell: 0,
            basis: DMatrix::from_fn(7, 2, |i, j| {
                if i == j {
                    1.0
                } else if i == 6 && j == 1 {
                    0.3
                } else {
                    0.0
                }
            }),
        };
        let r = restrict(&fam.matrices[0], &skew, None);
        assert!(!r.invariant);
    }

    #[test]
    fn transformation_basis_structure() {
        let d = binary();
        let k = compute_index_set(&d, 4).unwrap();
        let b = transformation_basis(&k, &d, 2).unwrap();
        let n = k.len();
        assert_eq!(b.poly_dim, 3);
        assert_eq!(b.degree_sizes, vec![1, 1, 1]);
        // First column is e_1, first dual row is the all-ones sample.
        for i in 0..n {
            let expect = if i == 0 { 1.0 } else { 0.0 };
            assert!((b.matrix[(i, 0)] - expect).abs() < 1e-15);
            assert!((b.inverse[(0, i)] - 1.0).abs() < 1e-10);
        }
        // Dual rows 1..p are the centered samples alpha^eta - alpha_0^eta.
        let pts = k.points();
        let a0 = pts[0][0] as f64;
        for (eta, row) in [(1, 1usize), (2, 2usize)] {
            for (i, p) in pts.iter().enumerate() {
                let expect = (p[0] as f64).powi(eta) - a0.powi(eta);
                assert!(
                    (b.inverse[(row, i)] - expect).abs() < 1e-9,
                    "row {row}, point {i}"
                );
            }
        }
        assert!(matches!(
            transformation_basis(&k, &DilationSpec::general(vec![vec![1, 1], vec![1, -1]]).unwrap(), 1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn block_decomposition_of_sum_rule_masks() {
        let d = binary();
        // Chaikin has sum rules of order 3: test at ell = 1; the cubic
        // B-spline has order 4: test at ell = 2.
        for (mask, ell) in [(chaikin(), 1usize), (cubic_bspline(), 2usize)] {
            let k = compute_index_set(&d, mask.support_bound()).unwrap();
            let fam = build_transition(&mask, &d, &k).unwrap();
            let basis = transformation_basis(&k, &d, ell).unwrap();
            let blocks = block_decompose(&fam, &basis).unwrap();
            let v = difference_subspace(&k, 1, ell).unwrap();
            for (t, tm) in fam.matrices.iter().zip(&blocks) {
                assert!(
                    tm.delta_norm < 1e-12,
                    "structural deviation {}",
                    tm.delta_norm
                );
                // Reassembly: B T~ B^{-1} = T.
                let back = &basis.matrix * &tm.transformed * &basis.inverse;
                assert!((back - t).norm() < 1e-12);
                // The Q block carries the same spectrum as the restriction
                // to the difference subspace.
                let r = restrict(t, &v, None);
                let mut s1: Vec<f64> = tm
                    .q_block
                    .complex_eigenvalues()
                    .iter()
                    .map(|c| c.norm())
                    .collect();
                let mut s2: Vec<f64> = r
                    .matrix
                    .complex_eigenvalues()
                    .iter()
                    .map(|c| c.norm())
                    .collect();
                s1.sort_by(|a, b| a.partial_cmp(b).unwrap());
                s2.sort_by(|a, b| a.partial_cmp(b).unwrap());
                // Spectral radii agree tightly; defective small eigenvalues
                // only to eigensolver resolution.
                assert!((s1.last().unwrap() - s2.last().unwrap()).abs() < 1e-12);
                for (a, b) in s1.iter().zip(&s2) {
                    assert!((a - b).abs() < 1e-6);
                }
            }
            // Dimension bookkeeping: dim V_ell + poly dim = |K|.
            assert_eq!(v.dim() + basis.poly_dim, k.len());
        }
    }

    #[test]
    fn dump_roundtrip_preserves_bits() {
        let fam = chaikin_family();
        let mut buf = Vec::new();
        write_matrix(&mut buf, "T0", &fam.matrices[0]).unwrap();
        write_matrix(&mut buf, "T1", &fam.matrices[1]).unwrap();
        let parsed = read_matrices(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].0, "T0");
        assert_eq!(parsed[0].1, fam.matrices[0]);
        assert_eq!(parsed[1].1, fam.matrices[1]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "matrix A 2 2\n1 2\n3";
        let err = read_matrices(std::io::Cursor::new(bad)).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
        let bad2 = "matrix B two 2\n";
        assert!(matches!(
            read_matrices(std::io::Cursor::new(bad2)),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
