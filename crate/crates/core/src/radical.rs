//! The Jacobson radical over GF(p).
//!
//! For a subalgebra of n x n matrices over the prime field, the radical is
//! the last space of the chain
//!
//! ```text
//! V_0 = A,   V_{k+1} = { x in V_k : a_{p^k}(x y) = 0 for all y in V_k },
//! ```
//!
//! where `a_j(z)` is the j-th coefficient of the characteristic polynomial
//! of `z` in the given faithful representation and the chain runs over all
//! k with p^k <= n. On `V_k` the condition is F_p-linear in `x`, so each
//! step is one kernel computation. Plain traces (k = 0) are not enough in
//! small characteristic: the whole regular trace form of `M_3(GF(3))`
//! vanishes, and only the higher coefficient functions separate it from its
//! radical.
//!
//! The chain always contains the radical, so the loop stops early as soon
//! as the current space is itself a nilpotent two-sided ideal.

use crate::algebra::BasedAlgebra;
use crate::fp::Fp;
use crate::matrix::{row_axpy, Echelon, FpMat, SparseRow};
use crate::{Error, Result};

/// Characteristic polynomial of a square matrix, monic, returned as
/// coefficients `[a_0, a_1, ..., a_n]` of `det(tI - M) = sum a_j t^j`
/// with `a_n = 1`.
pub fn char_poly(m: &FpMat) -> Vec<u64> {
    let n = m.rows;
    assert_eq!(n, m.cols);
    let f = m.field();
    if n == 0 {
        return vec![1];
    }
    // reduce to upper Hessenberg form by a similarity transformation
    let mut h: Vec<Vec<u64>> = (0..n).map(|i| m.row_dense(i)).collect();
    for j in 0..n.saturating_sub(2) {
        let pivot = (j + 1..n).find(|&r| h[r][j] != 0);
        let Some(r) = pivot else { continue };
        if r != j + 1 {
            h.swap(r, j + 1);
            for row in h.iter_mut() {
                row.swap(r, j + 1);
            }
        }
        let inv = f.inv(h[j + 1][j]).unwrap();
        for i in j + 2..n {
            let factor = f.mul(h[i][j], inv);
            if factor == 0 {
                continue;
            }
            // row_i -= factor * row_{j+1}
            for c in 0..n {
                let sub = f.mul(factor, h[j + 1][c]);
                h[i][c] = f.sub(h[i][c], sub);
            }
            // col_{j+1} += factor * col_i
            for row in h.iter_mut() {
                let add = f.mul(factor, row[i]);
                row[j + 1] = f.add(row[j + 1], add);
            }
        }
    }
    // char polys of leading principal Hessenberg minors, by last-column
    // expansion: p_k(t) = (t - h[k-1][k-1]) p_{k-1}
    //                     - sum_i h[i-1][k-1] (prod_{j=i..k-2} h[j+1][j]) p_{i-1}
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for k in 1..=n {
        let mut pk = poly_shift_mul(f, &polys[k - 1], h[k - 1][k - 1]);
        let mut subprod = 1u64;
        for i in (1..k).rev() {
            subprod = f.mul(subprod, h[i][i - 1]);
            if subprod == 0 {
                break;
            }
            let coeff = f.mul(h[i - 1][k - 1], subprod);
            if coeff != 0 {
                for (d, &c) in polys[i - 1].iter().enumerate() {
                    let delta = f.mul(coeff, c);
                    pk[d] = f.sub(pk[d], delta);
                }
            }
        }
        polys.push(pk);
    }
    polys.pop().unwrap()
}

/// `(t - a) * p(t)`.
fn poly_shift_mul(f: Fp, p: &[u64], a: u64) -> Vec<u64> {
    let mut out = vec![0u64; p.len() + 1];
    for (d, &c) in p.iter().enumerate() {
        out[d + 1] = f.add(out[d + 1], c);
        out[d] = f.sub(out[d], f.mul(a, c));
    }
    out
}

/// Radical of the span of faithful representation matrices `reps` (one per
/// basis element). Returns an echelon basis in basis coordinates.
pub fn radical_chain(field: Fp, reps: &[FpMat]) -> Echelon {
    let dim = reps.len();
    if dim == 0 {
        return Echelon::new(0, field);
    }
    let n = reps[0].rows;
    let p = field.modulus();
    // current space: rows of coefficient vectors over the basis
    let mut basis: Vec<SparseRow> = (0..dim).map(|i| vec![(i as u32, 1)]).collect();
    let rep_of = |row: &SparseRow| -> FpMat {
        let mut m = FpMat::zero(n, n, field);
        for &(i, v) in row {
            m = m.add(&reps[i as usize].scale(v));
        }
        m
    };
    let mut k = 0usize;
    let mut pk = 1u64; // p^k
    loop {
        if basis.is_empty() || is_nilpotent_ideal(field, reps, &basis) {
            break;
        }
        if pk > n as u64 {
            break;
        }
        let v = basis.len();
        let mats: Vec<FpMat> = basis.iter().map(|r| rep_of(r)).collect();
        let mut cond = FpMat::zero(v, v, field);
        for i in 0..v {
            for j in 0..v {
                let val = if k == 0 {
                    // a_1(xy) = -tr(xy); sign is irrelevant for the kernel
                    let mut t = 0u64;
                    for r in 0..n {
                        let row = mats[i].row_sparse(r);
                        let mut acc = 0u64;
                        for &(c, x) in &row {
                            acc = field.add(acc, field.mul(x, mats[j].get(c as usize, r)));
                        }
                        t = field.add(t, acc);
                    }
                    t
                } else {
                    let prod = mats[i].mul(&mats[j]);
                    let cp = char_poly(&prod);
                    // coefficient of t^{n - p^k}
                    let idx = n - pk as usize;
                    cp[idx]
                };
                cond.set(i, j, val);
            }
        }
        // x = sum x_i v_i with  sum_i x_i cond[i][j] = 0 for all j
        let ker = cond.transpose().kernel_basis();
        let mut next = Vec::with_capacity(ker.cols);
        for c in 0..ker.cols {
            let mut row: SparseRow = Vec::new();
            for i in 0..v {
                let coeff = ker.get(i, c);
                if coeff != 0 {
                    row = row_axpy(field, &row, &basis[i], coeff);
                }
            }
            if !row.is_empty() {
                next.push(row);
            }
        }
        basis = next;
        k += 1;
        pk *= p;
    }
    let mut ech = Echelon::new(dim, field);
    for row in basis {
        ech.insert(row);
    }
    ech
}

/// Is the span of `rows` (coefficient vectors) a nilpotent two-sided ideal
/// of the matrix span of `reps`?
fn is_nilpotent_ideal(field: Fp, reps: &[FpMat], rows: &[SparseRow]) -> bool {
    if reps.is_empty() {
        return true;
    }
    let n = reps[0].rows;
    let flat = |m: &FpMat| -> SparseRow {
        let mut out = Vec::new();
        for i in 0..m.rows {
            for (j, v) in m.row_sparse(i) {
                out.push(((i * n + j as usize) as u32, v));
            }
        }
        out
    };
    let rep_of = |row: &SparseRow| -> FpMat {
        let mut m = FpMat::zero(n, n, field);
        for &(i, v) in row {
            m = m.add(&reps[i as usize].scale(v));
        }
        m
    };
    let vmats: Vec<FpMat> = rows.iter().map(|r| rep_of(r)).collect();
    let mut vspan = Echelon::new(n * n, field);
    for m in &vmats {
        vspan.insert(flat(m));
    }
    // two-sided ideal within the algebra span
    for b in reps {
        for m in &vmats {
            if !vspan.contains(flat(&b.mul(m))) || !vspan.contains(flat(&m.mul(b))) {
                return false;
            }
        }
    }
    // nilpotency of the span
    let mut cur = vspan.clone();
    for _ in 0..n + 1 {
        if cur.rank() == 0 {
            return true;
        }
        let mut next = Echelon::new(n * n, field);
        for r in &cur.rows {
            // unflatten r
            let mut rm = FpMat::zero(n, n, field);
            for &(idx, v) in r {
                rm.set(idx as usize / n, idx as usize % n, v);
            }
            for m in &vmats {
                next.insert(flat(&rm.mul(m)));
            }
        }
        cur = next;
    }
    cur.rank() == 0
}

/// Jacobson radical of a based algebra by the generic chain on the right
/// regular representation, verified post hoc: the result is a nilpotent
/// two-sided ideal and the quotient algebra has zero radical.
pub fn jacobson_radical(alg: &BasedAlgebra) -> Result<Echelon> {
    let f = alg.field();
    let reps: Vec<FpMat> =
        (0..alg.dim()).map(|i| alg.right_regular(&vec![(i as u32, 1)])).collect();
    let rad = radical_chain(f, &reps);
    // post hoc: ideal + nilpotent
    if !is_nilpotent_ideal(f, &reps, &rad.rows) {
        return Err(Error::Verification("computed radical is not a nilpotent ideal".into()));
    }
    // post hoc: quotient has zero radical (single re-run, not recursive)
    let qs = crate::matrix::QuotientSpace::new(rad.clone());
    let qdim = qs.dim();
    if qdim > 0 {
        let mut qreps = Vec::with_capacity(qdim);
        for &amb in &qs.free {
            // right multiplication by the coset of basis element amb
            let mut m = FpMat::zero(qdim, qdim, f);
            for (r, &amb2) in qs.free.iter().enumerate() {
                let prod = alg.mul_elems(&vec![(amb2 as u32, 1)], &vec![(amb as u32, 1)]);
                let q = qs.project(prod);
                m.set_row(r, &q);
            }
            qreps.push(m);
        }
        let qrad = radical_chain(f, &qreps);
        if qrad.rank() != 0 {
            return Err(Error::Verification("quotient by computed radical is not semisimple".into()));
        }
    }
    Ok(rad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{replicate, scalar_algebra};
    use crate::presentation::{build_algebra, parse};
    use std::sync::Arc;

    fn f3() -> Fp {
        Fp::new(3).unwrap()
    }

    #[test]
    fn char_poly_basics() {
        let f = f3();
        let id = FpMat::identity(3, f);
        // det(tI - I) = (t-1)^3 = t^3 - 3t^2 + 3t - 1 = t^3 + 2 over GF(3)
        assert_eq!(char_poly(&id), vec![2, 0, 0, 1]);
        let nil = FpMat::from_dense(2, 2, f, vec![0, 1, 0, 0]);
        assert_eq!(char_poly(&nil), vec![0, 0, 1]);
        let m = FpMat::from_dense(2, 2, Fp::new(5).unwrap(), vec![1, 2, 3, 4]);
        // det(tI - M) = t^2 - 5t + (4 - 6) = t^2 + 0t + 3 over GF(5)
        assert_eq!(char_poly(&m), vec![3, 0, 1]);
    }

    #[test]
    fn char_poly_matches_cayley_hamilton() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
        let f = f3();
        for _ in 0..25 {
            let n = rng.gen_range(1..6);
            let mut m = FpMat::zero(n, n, f);
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, rng.gen_range(0..3));
                }
            }
            let cp = char_poly(&m);
            let mut acc = FpMat::zero(n, n, f);
            for (d, &c) in cp.iter().enumerate() {
                acc = acc.add(&m.pow(d as u64).scale(c));
            }
            assert!(acc.is_zero(), "Cayley-Hamilton fails for {m:?} with {cp:?}");
        }
    }

    #[test]
    fn radical_of_semisimple_is_zero() {
        // K x K: two orthogonal idempotents
        let p = parse("algebra kk over GF(3)\nvertices: 1 2").unwrap();
        let a = build_algebra(&p, 8).unwrap();
        let rad = jacobson_radical(&a).unwrap();
        assert_eq!(rad.rank(), 0);
        let k = scalar_algebra(f3());
        assert_eq!(jacobson_radical(&k).unwrap().rank(), 0);
    }

    #[test]
    fn radical_of_dual_numbers() {
        let p = parse("algebra d over GF(3)\nvertices: 1\narrows: x: 1 -> 1\nrelations: x*x")
            .unwrap();
        let a = build_algebra(&p, 8).unwrap();
        let rad = jacobson_radical(&a).unwrap();
        assert_eq!(rad.rank(), 1);
        // the span is exactly <x>
        assert!(rad.contains(vec![(a.radical()[0] as u32, 1)]));
    }

    #[test]
    fn radical_agrees_with_designated_on_quiver_algebras() {
        for src in [
            "algebra loop over GF(3)\nvertices: 1 2\narrows: a: 1 -> 1; b: 1 -> 2\nrelations: a*a",
            "algebra d4 over GF(3)\nvertices: 1 2 3 4\narrows: a: 1 -> 2; b: 2 -> 3; c: 2 -> 4\nrelations: a*b; a*c",
            "algebra a3 over GF(3)\nvertices: 1 2 3\narrows: a: 1 -> 2; b: 2 -> 3",
        ] {
            let a = build_algebra(&parse(src).unwrap(), 16).unwrap();
            let rad = jacobson_radical(&a).unwrap();
            let designated = a.radical_span();
            assert_eq!(rad.rank(), designated.rank());
            for row in &designated.rows {
                assert!(rad.contains(row.clone()));
            }
        }
    }

    #[test]
    fn radical_agrees_on_replicated_algebras() {
        let p = parse(
            "algebra loop over GF(3)\nvertices: 1 2\narrows: a: 1 -> 1; b: 1 -> 2\nrelations: a*a",
        )
        .unwrap();
        let a = Arc::new(build_algebra(&p, 16).unwrap());
        for m in 1..=2 {
            let rep = replicate(&a, m);
            let rad = jacobson_radical(&rep.alg).unwrap();
            let designated = rep.alg.radical_span();
            assert_eq!(rad.rank(), designated.rank());
            for row in &designated.rows {
                assert!(rad.contains(row.clone()));
            }
        }
    }

    #[test]
    fn matrix_algebra_over_f3_is_semisimple() {
        // M_3(GF(3)) via its regular representation: every regular trace is
        // 3 * (matrix trace) = 0, so the plain trace form is identically
        // zero and only the higher coefficient steps decide.
        let f = f3();
        let n = 3usize;
        let unit = |i: usize, j: usize| {
            let mut m = FpMat::zero(n, n, f);
            m.set(i, j, 1);
            m
        };
        // basis e_ij; right regular rep on the 9-dimensional algebra:
        // e_ab * e_ij = delta_{bi} e_aj
        let mut reps = Vec::new();
        for i in 0..n {
            for j in 0..n {
                // right multiplication by e_ij as a 9x9 matrix
                let mut r = FpMat::zero(n * n, n * n, f);
                for a in 0..n {
                    for b in 0..n {
                        if b == i {
                            r.set(a * n + b, a * n + j, 1);
                        }
                    }
                }
                reps.push(r);
                let _ = unit;
            }
        }
        let rad = radical_chain(f, &reps);
        assert_eq!(rad.rank(), 0);
    }

    #[test]
    fn field_extension_f9_has_zero_radical() {
        // GF(9) = GF(3)[x]/(x^2 + 1): regular rep of {1, x}
        let f = f3();
        let one = FpMat::identity(2, f);
        let x = FpMat::from_dense(2, 2, f, vec![0, 1, -1, 0]);
        let rad = radical_chain(f, &[one, x]);
        assert_eq!(rad.rank(), 0);
    }

    #[test]
    fn upper_triangular_2x2_radical() {
        // A2 path algebra = upper triangular 2x2 matrices: radical = <e_12>
        let p = parse("algebra a2 over GF(3)\nvertices: 1 2\narrows: a: 1 -> 2").unwrap();
        let a = build_algebra(&p, 8).unwrap();
        let rad = jacobson_radical(&a).unwrap();
        assert_eq!(rad.rank(), 1);
    }
}
