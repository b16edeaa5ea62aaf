//! Finite dimensional algebras given by a based multiplication table.
//!
//! A [`BasedAlgebra`] stores a basis, sparse structure constants, a designated
//! family of primitive orthogonal idempotents (grouped into classes) and a
//! designated basis of the Jacobson radical. Every basis element `b` is
//! bi-homogeneous: `e_src * b * e_tgt = b` for exactly one pair of idempotent
//! classes, recorded in `src`/`tgt`. This is automatic for path algebras
//! (paths have a start and an end) and is preserved by every construction in
//! this module: opposite algebra, triangular matrix algebras, replicated
//! algebras and idempotent truncations.

use crate::fp::Fp;
use crate::matrix::{row_axpy, Echelon, FpMat, SparseRow};
use crate::{Error, Result};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct BasedAlgebra {
    field: Fp,
    labels: Vec<String>,
    class_names: Vec<String>,
    /// Idempotent classes as disjoint basis-index sets; the class idempotent
    /// is the sum of the indexed basis elements.
    idem: Vec<Vec<usize>>,
    src: Vec<usize>,
    tgt: Vec<usize>,
    /// Basis indices spanning the Jacobson radical.
    radical: Vec<usize>,
    /// mult[i][j] = coordinates of b_i * b_j.
    mult: Vec<Vec<SparseRow>>,
}

impl BasedAlgebra {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        field: Fp,
        labels: Vec<String>,
        class_names: Vec<String>,
        idem: Vec<Vec<usize>>,
        src: Vec<usize>,
        tgt: Vec<usize>,
        radical: Vec<usize>,
        mult: Vec<Vec<SparseRow>>,
    ) -> Self {
        let a = BasedAlgebra { field, labels, class_names, idem, src, tgt, radical, mult };
        debug_assert!(a.verify().is_ok(), "algebra axioms violated: {:?}", a.verify().err());
        a
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn field(&self) -> Fp {
        self.field
    }

    #[inline]
    pub fn n_classes(&self) -> usize {
        self.idem.len()
    }

    #[inline]
    pub fn src(&self, i: usize) -> usize {
        self.src[i]
    }

    #[inline]
    pub fn tgt(&self, i: usize) -> usize {
        self.tgt[i]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn class_name(&self, c: usize) -> &str {
        &self.class_names[c]
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn idem_class(&self, c: usize) -> &[usize] {
        &self.idem[c]
    }

    pub fn radical(&self) -> &[usize] {
        &self.radical
    }

    pub fn is_radical_index(&self, i: usize) -> bool {
        self.radical.contains(&i)
    }

    pub fn mult_table(&self, i: usize, j: usize) -> &SparseRow {
        &self.mult[i][j]
    }

    /// The identity element: sum of all class idempotents.
    pub fn one(&self) -> SparseRow {
        let mut coords: Vec<usize> = self.idem.iter().flatten().copied().collect();
        coords.sort_unstable();
        coords.into_iter().map(|i| (i as u32, 1)).collect()
    }

    pub fn class_idempotent(&self, c: usize) -> SparseRow {
        let mut coords = self.idem[c].clone();
        coords.sort_unstable();
        coords.into_iter().map(|i| (i as u32, 1)).collect()
    }

    pub fn mul_elems(&self, x: &SparseRow, y: &SparseRow) -> SparseRow {
        let f = self.field;
        let mut acc: SparseRow = Vec::new();
        for &(i, xi) in x {
            for &(j, yj) in y {
                let prod = &self.mult[i as usize][j as usize];
                if !prod.is_empty() {
                    acc = row_axpy(f, &acc, prod, f.mul(xi, yj));
                }
            }
        }
        acc
    }

    pub fn elem_pow(&self, x: &SparseRow, e: u64) -> SparseRow {
        let mut acc = self.one();
        let mut base = x.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_elems(&acc, &base);
            }
            base = self.mul_elems(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Right regular representation of an element: row convention, so
    /// `R(x*y) = R(x) * R(y)`.
    pub fn right_regular(&self, x: &SparseRow) -> FpMat {
        let n = self.dim();
        let mut m = FpMat::zero(n, n, self.field);
        for u in 0..n {
            let unit = vec![(u as u32, 1)];
            for (k, v) in self.mul_elems(&unit, x) {
                m.set(u, k as usize, v);
            }
        }
        m
    }

    pub fn left_regular(&self, x: &SparseRow) -> FpMat {
        let n = self.dim();
        let mut m = FpMat::zero(n, n, self.field);
        for u in 0..n {
            let unit = vec![(u as u32, 1)];
            for (k, v) in self.mul_elems(x, &unit) {
                m.set(u, k as usize, v);
            }
        }
        m
    }

    /// Trace of the right regular representation, per basis element.
    pub fn regular_traces(&self) -> Vec<u64> {
        let f = self.field;
        (0..self.dim())
            .map(|b| {
                let mut t = 0u64;
                for u in 0..self.dim() {
                    if let Some(&(_, v)) = self.mult[u][b].iter().find(|&&(k, _)| k as usize == u)
                    {
                        t = f.add(t, v);
                    }
                }
                t
            })
            .collect()
    }

    /// Structural invariants: bi-homogeneity of the table, orthogonal
    /// idempotents summing to one, associativity on all basis triples,
    /// the radical span being a nilpotent two-sided ideal.
    pub fn verify(&self) -> Result<()> {
        let n = self.dim();
        if self.src.len() != n || self.tgt.len() != n || self.mult.len() != n {
            return Err(Error::Verification("table sizes".into()));
        }
        let mut seen = vec![false; n];
        for (c, set) in self.idem.iter().enumerate() {
            for &i in set {
                if seen[i] {
                    return Err(Error::Verification("idempotent classes overlap".into()));
                }
                seen[i] = true;
                if self.src[i] != c || self.tgt[i] != c {
                    return Err(Error::Verification("idempotent element grading".into()));
                }
            }
        }
        // e_c e_d = delta e_c, and one acts as identity
        for c in 0..self.n_classes() {
            let ec = self.class_idempotent(c);
            for d in 0..self.n_classes() {
                let ed = self.class_idempotent(d);
                let prod = self.mul_elems(&ec, &ed);
                let expect = if c == d { ec.clone() } else { Vec::new() };
                if prod != expect {
                    return Err(Error::Verification(format!("idempotents {c},{d} not orthogonal")));
                }
            }
        }
        let one = self.one();
        for i in 0..n {
            let unit = vec![(i as u32, 1)];
            if self.mul_elems(&one, &unit) != unit || self.mul_elems(&unit, &one) != unit {
                return Err(Error::Verification(format!("identity fails on basis {i}")));
            }
        }
        // bi-homogeneity of products
        for i in 0..n {
            for j in 0..n {
                let prod = &self.mult[i][j];
                if !prod.is_empty() && self.tgt[i] != self.src[j] {
                    return Err(Error::Verification(format!(
                        "non-composable product {i}*{j} is nonzero"
                    )));
                }
                for &(k, _) in prod {
                    let k = k as usize;
                    if self.src[k] != self.src[i] || self.tgt[k] != self.tgt[j] {
                        return Err(Error::Verification(format!(
                            "product {i}*{j} not bi-homogeneous"
                        )));
                    }
                }
            }
        }
        self.verify_associativity()?;
        // radical: two-sided ideal, nilpotent
        let rad = self.radical_span();
        for &r in &self.radical {
            let unit = vec![(r as u32, 1)];
            for b in 0..n {
                let bu = vec![(b as u32, 1)];
                for prod in [self.mul_elems(&unit, &bu), self.mul_elems(&bu, &unit)] {
                    if !prod.is_empty() && !rad.contains(prod.clone()) {
                        return Err(Error::Verification("radical not an ideal".into()));
                    }
                }
            }
        }
        if self.radical_nilpotency_index().is_none() {
            return Err(Error::Verification("designated radical not nilpotent".into()));
        }
        Ok(())
    }

    pub fn verify_associativity(&self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            let ui = vec![(i as u32, 1)];
            for j in 0..n {
                let uj = vec![(j as u32, 1)];
                let ij = self.mult[i][j].clone();
                for k in 0..n {
                    let uk = vec![(k as u32, 1)];
                    let left = self.mul_elems(&ij, &uk);
                    let right = self.mul_elems(&ui, &self.mul_elems(&uj, &uk));
                    if left != right {
                        return Err(Error::Verification(format!(
                            "associativity fails at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn radical_span(&self) -> Echelon {
        let mut ech = Echelon::new(self.dim(), self.field);
        for &r in &self.radical {
            ech.insert(vec![(r as u32, 1)]);
        }
        ech
    }

    /// Smallest `k` with `rad^k = 0`, or `None` within `2*dim` steps.
    pub fn radical_nilpotency_index(&self) -> Option<usize> {
        let dims = self.radical_power_dims();
        if dims.len() < 2 * self.dim() + 2 {
            Some(dims.len() + 1)
        } else {
            None
        }
    }

    /// Dimensions of rad^1, rad^2, ... down to the first zero power
    /// (the zero is not included).
    pub fn radical_power_dims(&self) -> Vec<usize> {
        let mut dims = Vec::new();
        let mut cur = self.radical_span();
        let limit = 2 * self.dim() + 2;
        for _ in 0..limit {
            if cur.rank() == 0 {
                return dims;
            }
            dims.push(cur.rank());
            let mut next = Echelon::new(self.dim(), self.field);
            for row in cur.rows.clone() {
                for &r in &self.radical {
                    let prod = self.mul_elems(&row, &vec![(r as u32, 1)]);
                    next.insert(prod);
                }
            }
            cur = next;
        }
        dims
    }

    /// Subspace rad^2 as an echelon in algebra coordinates.
    pub fn rad_square(&self) -> Echelon {
        let mut ech = Echelon::new(self.dim(), self.field);
        for &r in &self.radical {
            for &s in &self.radical {
                ech.insert(self.mult[r][s].clone());
            }
        }
        ech
    }

    /// Radical basis indices whose classes span rad/rad^2.
    pub fn radical_generators(&self) -> Vec<usize> {
        let mut ech = self.rad_square();
        let mut gens = Vec::new();
        for &r in &self.radical {
            if ech.insert(vec![(r as u32, 1)]) {
                gens.push(r);
            }
        }
        gens
    }

    /// A generating set of the algebra: class idempotents, radical
    /// generators, and any basis element that is neither designated radical
    /// nor part of an idempotent class (the semisimple completion of
    /// non-split endomorphism algebras).
    pub fn generators(&self) -> Vec<SparseRow> {
        let mut gens: Vec<SparseRow> =
            (0..self.n_classes()).map(|c| self.class_idempotent(c)).collect();
        for r in self.radical_generators() {
            gens.push(vec![(r as u32, 1)]);
        }
        let mut covered = vec![false; self.dim()];
        for set in &self.idem {
            for &i in set {
                covered[i] = true;
            }
        }
        for &r in &self.radical {
            covered[r] = true;
        }
        for (i, c) in covered.iter().enumerate() {
            if !c {
                gens.push(vec![(i as u32, 1)]);
            }
        }
        gens
    }

    pub fn opposite(&self) -> BasedAlgebra {
        let n = self.dim();
        let mut mult = vec![vec![Vec::new(); n]; n];
        for i in 0..n {
            for j in 0..n {
                mult[i][j] = self.mult[j][i].clone();
            }
        }
        BasedAlgebra::new(
            self.field,
            self.labels.clone(),
            self.class_names.clone(),
            self.idem.clone(),
            self.tgt.clone(),
            self.src.clone(),
            self.radical.clone(),
            mult,
        )
    }

    /// Relabels the basis along a permutation: new index `k` holds what used
    /// to be `perm[k]`. Classes are kept in order.
    pub fn permute_basis(&self, perm: &[usize]) -> BasedAlgebra {
        let n = self.dim();
        assert_eq!(perm.len(), n);
        let mut inv = vec![0usize; n];
        for (k, &old) in perm.iter().enumerate() {
            inv[old] = k;
        }
        let relabel = |row: &SparseRow| -> SparseRow {
            let mut out: SparseRow = row.iter().map(|&(k, v)| (inv[k as usize] as u32, v)).collect();
            out.sort_unstable_by_key(|e| e.0);
            out
        };
        let mut mult = vec![vec![Vec::new(); n]; n];
        for i in 0..n {
            for j in 0..n {
                mult[i][j] = relabel(&self.mult[perm[i]][perm[j]]);
            }
        }
        BasedAlgebra::new(
            self.field,
            perm.iter().map(|&o| self.labels[o].clone()).collect(),
            self.class_names.clone(),
            self.idem.iter().map(|set| set.iter().map(|&o| inv[o]).collect()).collect(),
            perm.iter().map(|&o| self.src[o]).collect(),
            perm.iter().map(|&o| self.tgt[o]).collect(),
            self.radical.iter().map(|&o| inv[o]).collect(),
            mult,
        )
    }

    /// Is `x` (supported in a corner `e_c A e_c`) invertible there? True iff
    /// `x` is nonzero modulo the radical, i.e. has a nonzero coefficient at a
    /// non-radical basis index.
    pub fn corner_unit(&self, x: &SparseRow) -> bool {
        x.iter().any(|&(i, v)| v != 0 && !self.is_radical_index(i as usize))
    }

    /// Inverse of a corner unit inside `e_c A e_c`.
    pub fn corner_inverse(&self, x: &SparseRow, c: usize) -> SparseRow {
        let corner: Vec<usize> =
            (0..self.dim()).filter(|&i| self.src[i] == c && self.tgt[i] == c).collect();
        let k = corner.len();
        let mut m = FpMat::zero(k, k, self.field);
        for (row, &i) in corner.iter().enumerate() {
            let unit = vec![(i as u32, 1)];
            let prod = self.mul_elems(&unit, x);
            for (idx, v) in prod {
                let col = corner
                    .iter()
                    .position(|&j| j == idx as usize)
                    .expect("corner closed under multiplication");
                m.set(row, col, v);
            }
        }
        // solve y * x = e_c in corner coordinates; rows of m are b_i * x, so
        // we need coefficients y with sum y_i (b_i * x) = e_c.
        let ec = self.class_idempotent(c);
        let mut target = vec![0u64; k];
        for &(i, v) in &ec {
            if let Some(pos) = corner.iter().position(|&j| j == i as usize) {
                target[pos] = v;
            }
        }
        let y = m
            .transpose()
            .solve(&target)
            .expect("dims")
            .expect("corner unit must be invertible");
        corner
            .iter()
            .enumerate()
            .filter(|&(pos, _)| y[pos] != 0)
            .map(|(pos, &i)| (i as u32, y[pos]))
            .collect()
    }

    pub fn fingerprint(&self, cutoff: usize) -> Fingerprint {
        let nc = self.n_classes();
        let mut cartan = vec![vec![0usize; nc]; nc];
        for i in 0..self.dim() {
            cartan[self.src[i]][self.tgt[i]] += 1;
        }
        // rad / rad^2 per (src, tgt) pair; rad^2 splits along the bi-grading
        let rad2 = self.rad_square();
        let mut rad2_pair = vec![vec![0usize; nc]; nc];
        for row in &rad2.rows {
            let i = row[0].0 as usize;
            rad2_pair[self.src[i]][self.tgt[i]] += 1;
        }
        let mut rad_pair = vec![vec![0usize; nc]; nc];
        for &r in &self.radical {
            rad_pair[self.src[r]][self.tgt[r]] += 1;
        }
        let mut ext_arrows = vec![vec![0usize; nc]; nc];
        for a in 0..nc {
            for b in 0..nc {
                ext_arrows[a][b] = rad_pair[a][b] - rad2_pair[a][b];
            }
        }
        let acyclic = {
            fn dfs(v: usize, adj: &[Vec<usize>], state: &mut [u8]) -> bool {
                state[v] = 1;
                for &w in &adj[v] {
                    if state[w] == 1 || (state[w] == 0 && !dfs(w, adj, state)) {
                        return false;
                    }
                }
                state[v] = 2;
                true
            }
            let adj: Vec<Vec<usize>> =
                (0..nc).map(|a| (0..nc).filter(|&b| ext_arrows[a][b] > 0).collect()).collect();
            let mut state = vec![0u8; nc];
            (0..nc).all(|v| state[v] != 0 || dfs(v, &adj, &mut state))
        };
        let mut rad_dims = self.radical_power_dims();
        rad_dims.truncate(cutoff);
        Fingerprint { dim: self.dim(), simples: nc, rad_dims, cartan, ext_arrows, acyclic }
    }
}

/// Isomorphism-screening record: dimension data plus Cartan and arrow-count
/// matrices. Two fingerprints agree when the matrices match up to a common
/// permutation of the idempotent classes.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Fingerprint {
    pub dim: usize,
    pub simples: usize,
    pub rad_dims: Vec<usize>,
    pub cartan: Vec<Vec<usize>>,
    pub ext_arrows: Vec<Vec<usize>>,
    pub acyclic: bool,
}

type ClassKey = (usize, usize, Vec<usize>, Vec<usize>, Vec<usize>);

impl Fingerprint {
    pub fn equivalent(&self, other: &Fingerprint) -> bool {
        if self.dim != other.dim
            || self.simples != other.simples
            || self.rad_dims != other.rad_dims
            || self.acyclic != other.acyclic
        {
            return false;
        }
        let n = self.simples;
        let key = |fp: &Fingerprint, i: usize| -> ClassKey {
            let mut rc: Vec<usize> = fp.cartan[i].clone();
            rc.sort_unstable();
            let mut cc: Vec<usize> = (0..n).map(|j| fp.cartan[j][i]).collect();
            cc.sort_unstable();
            let mut re: Vec<usize> = fp.ext_arrows[i].clone();
            re.sort_unstable();
            (fp.cartan[i][i], fp.ext_arrows[i][i], rc, cc, re)
        };
        let ka: Vec<_> = (0..n).map(|i| key(self, i)).collect();
        let kb: Vec<_> = (0..n).map(|i| key(other, i)).collect();
        fn bt(
            i: usize,
            n: usize,
            ka: &[ClassKey],
            kb: &[ClassKey],
            a: &Fingerprint,
            b: &Fingerprint,
            assigned: &mut Vec<usize>,
            used: &mut Vec<bool>,
        ) -> bool {
            if i == n {
                return true;
            }
            for j in 0..n {
                if used[j] || ka[i] != kb[j] {
                    continue;
                }
                let ok = (0..i).all(|k| {
                    a.cartan[i][k] == b.cartan[j][assigned[k]]
                        && a.cartan[k][i] == b.cartan[assigned[k]][j]
                        && a.ext_arrows[i][k] == b.ext_arrows[j][assigned[k]]
                        && a.ext_arrows[k][i] == b.ext_arrows[assigned[k]][j]
                });
                if ok {
                    assigned.push(j);
                    used[j] = true;
                    if bt(i + 1, n, ka, kb, a, b, assigned, used) {
                        return true;
                    }
                    used[j] = false;
                    assigned.pop();
                }
            }
            false
        }
        bt(0, n, &ka, &kb, self, other, &mut Vec::new(), &mut vec![false; n])
    }
}

/// An S-R-bimodule with explicit action matrices. Row convention on both
/// sides; the left action composes contravariantly as matrices:
/// `L(a*b) = L(b) * L(a)`.
#[derive(Clone, Debug)]
pub struct Bimodule {
    pub left: Arc<BasedAlgebra>,
    pub right: Arc<BasedAlgebra>,
    pub dim: usize,
    /// Class of the left algebra acting as identity on each basis vector.
    pub lclass: Vec<usize>,
    /// Class of the right algebra, similarly.
    pub rclass: Vec<usize>,
    /// left_action[b].get(u, v): coefficient of x_v in b . x_u
    pub left_action: Vec<FpMat>,
    /// right_action[b].get(u, v): coefficient of x_v in x_u . b
    pub right_action: Vec<FpMat>,
}

impl Bimodule {
    /// Checks that the two actions are unital and commute.
    pub fn verify(&self) -> Result<()> {
        let f = self.left.field();
        f.same(&self.right.field())?;
        let id = FpMat::identity(self.dim, f);
        let act = |mats: &[FpMat], x: &SparseRow| {
            let mut m = FpMat::zero(self.dim, self.dim, f);
            for &(i, v) in x {
                m = m.add(&mats[i as usize].scale(v));
            }
            m
        };
        if act(&self.left_action, &self.left.one()) != id
            || act(&self.right_action, &self.right.one()) != id
        {
            return Err(Error::Verification("bimodule actions not unital".into()));
        }
        for a in 0..self.left.dim() {
            for b in 0..self.right.dim() {
                let l = &self.left_action[a];
                let r = &self.right_action[b];
                if l.mul(r) != r.mul(l) {
                    return Err(Error::Verification("bimodule actions do not commute".into()));
                }
            }
        }
        Ok(())
    }
}

/// `DA = Hom_K(A, K)` as an A-bimodule: `(a.f)(x) = f(xa)`, `(f.a)(x) = f(ax)`.
pub fn dual_bimodule(a: &Arc<BasedAlgebra>) -> Bimodule {
    let n = a.dim();
    let f = a.field();
    let mut left_action = Vec::with_capacity(n);
    let mut right_action = Vec::with_capacity(n);
    for b in 0..n {
        let mut l = FpMat::zero(n, n, f);
        let mut r = FpMat::zero(n, n, f);
        for v in 0..n {
            // (b . f_k)(x_v) = f_k(x_v * b): b . f_k = sum_v c(v,b,k) f_v
            for &(k, cvb) in a.mult_table(v, b) {
                l.set(k as usize, v, f.add(l.get(k as usize, v), cvb));
            }
            // (f_k . b)(x_v) = f_k(b * x_v): f_k . b = sum_v c(b,v,k) f_v
            for &(k, cbv) in a.mult_table(b, v) {
                r.set(k as usize, v, f.add(r.get(k as usize, v), cbv));
            }
        }
        left_action.push(l);
        right_action.push(r);
    }
    // e_c . f_u = f_u iff tgt(u) = c ; f_u . e_c = f_u iff src(u) = c
    Bimodule {
        left: Arc::clone(a),
        right: Arc::clone(a),
        dim: n,
        lclass: (0..n).map(|u| a.tgt(u)).collect(),
        rclass: (0..n).map(|u| a.src(u)).collect(),
        left_action,
        right_action,
    }
}

/// Lower triangular matrix algebra `[[R, 0], [M, S]]` for an S-R-bimodule M.
/// Multiplication follows the matrix rule, with `M * M = 0`.
pub fn triangular_matrix(
    r: &Arc<BasedAlgebra>,
    s: &Arc<BasedAlgebra>,
    m: &Bimodule,
) -> Result<BasedAlgebra> {
    r.field().same(&s.field())?;
    if !Arc::ptr_eq(&m.left, s) || !Arc::ptr_eq(&m.right, r) {
        return Err(Error::Precondition(
            "triangular_matrix needs an S-R-bimodule over the given algebras".into(),
        ));
    }
    let (nr, ns, nm) = (r.dim(), s.dim(), m.dim);
    let n = nr + nm + ns;
    let rebase =
        |row: &SparseRow, off: usize| -> SparseRow { row.iter().map(|&(k, v)| (k + off as u32, v)).collect() };
    // basis layout: R (0..nr), M (nr..nr+nm), S (nr+nm..)
    let moff = nr;
    let soff = nr + nm;
    let ncr = r.n_classes();
    let mut labels: Vec<String> = (0..nr).map(|i| format!("r:{}", r.label(i))).collect();
    labels.extend((0..nm).map(|u| format!("m:{u}")));
    labels.extend((0..ns).map(|i| format!("s:{}", s.label(i))));
    let mut class_names: Vec<String> = r.class_names().iter().map(|c| format!("r:{c}")).collect();
    class_names.extend(s.class_names().iter().map(|c| format!("s:{c}")));
    let mut idem: Vec<Vec<usize>> = (0..ncr).map(|c| r.idem_class(c).to_vec()).collect();
    idem.extend((0..s.n_classes()).map(|c| {
        s.idem_class(c).iter().map(|&i| i + soff).collect::<Vec<_>>()
    }));
    let mut src: Vec<usize> = (0..nr).map(|i| r.src(i)).collect();
    src.extend((0..nm).map(|u| ncr + m.lclass[u]));
    src.extend((0..ns).map(|i| ncr + s.src(i)));
    let mut tgt: Vec<usize> = (0..nr).map(|i| r.tgt(i)).collect();
    tgt.extend((0..nm).map(|u| m.rclass[u]));
    tgt.extend((0..ns).map(|i| ncr + s.tgt(i)));
    let mut radical: Vec<usize> = r.radical().to_vec();
    radical.extend((0..nm).map(|u| u + moff));
    radical.extend(s.radical().iter().map(|&i| i + soff));

    let mut mult = vec![vec![Vec::new(); n]; n];
    for i in 0..nr {
        for j in 0..nr {
            mult[i][j] = r.mult_table(i, j).clone();
        }
    }
    for i in 0..ns {
        for j in 0..ns {
            mult[soff + i][soff + j] = rebase(s.mult_table(i, j), soff);
        }
    }
    for u in 0..nm {
        for j in 0..nr {
            let row: SparseRow = (0..nm)
                .filter_map(|v| {
                    let c = m.right_action[j].get(u, v);
                    (c != 0).then_some(((moff + v) as u32, c))
                })
                .collect();
            mult[moff + u][j] = row;
        }
        for i in 0..ns {
            let row: SparseRow = (0..nm)
                .filter_map(|v| {
                    let c = m.left_action[i].get(u, v);
                    (c != 0).then_some(((moff + v) as u32, c))
                })
                .collect();
            mult[soff + i][moff + u] = row;
        }
    }
    Ok(BasedAlgebra::new(r.field(), labels, class_names, idem, src, tgt, radical, mult))
}

/// The replicated algebra `A^(m)` together with the bookkeeping needed to
/// move between its basis and the base algebra.
#[derive(Clone, Debug)]
pub struct Replicated {
    pub alg: Arc<BasedAlgebra>,
    pub base: Arc<BasedAlgebra>,
    pub m: usize,
    /// number of diagonal slots, m + 1; slots are 1-based
    pub slots: usize,
}

impl Replicated {
    /// Class index of (slot, base class); slots are 1..=m+1.
    pub fn class_of(&self, slot: usize, base_class: usize) -> usize {
        (slot - 1) * self.base.n_classes() + base_class
    }

    pub fn slot_and_class(&self, class: usize) -> (usize, usize) {
        (class / self.base.n_classes() + 1, class % self.base.n_classes())
    }

    /// Basis index of the diagonal copy of base basis element `i` in `slot`.
    pub fn diag_index(&self, slot: usize, i: usize) -> usize {
        (slot - 1) * self.base.dim() + i
    }

    /// Basis index of the subdiagonal copy of the dual vector `f_u` at row
    /// `slot` (2..=m+1), connecting slot to slot-1.
    pub fn sub_index(&self, slot: usize, u: usize) -> usize {
        self.slots * self.base.dim() + (slot - 2) * self.base.dim() + u
    }

    pub fn as_diag(&self, idx: usize) -> Option<(usize, usize)> {
        let nd = self.slots * self.base.dim();
        (idx < nd).then(|| (idx / self.base.dim() + 1, idx % self.base.dim()))
    }

    pub fn as_sub(&self, idx: usize) -> Option<(usize, usize)> {
        let nd = self.slots * self.base.dim();
        (idx >= nd).then(|| {
            let r = idx - nd;
            (r / self.base.dim() + 2, r % self.base.dim())
        })
    }
}

/// Builds `A^(m)`: an (m+1) x (m+1) lower triangular matrix algebra with A
/// on the diagonal and the bimodule DA on the subdiagonal (DA * DA = 0).
pub fn replicate(a: &Arc<BasedAlgebra>, m: usize) -> Replicated {
    let f = a.field();
    let na = a.dim();
    let slots = m + 1;
    let nd = slots * na;
    let n = nd + m * na;
    let ncb = a.n_classes();

    let mut labels = Vec::with_capacity(n);
    for s in 1..=slots {
        for i in 0..na {
            labels.push(format!("{}@{s}", a.label(i)));
        }
    }
    for s in 2..=slots {
        for u in 0..na {
            labels.push(format!("{}*@{s}", a.label(u)));
        }
    }
    let mut class_names = Vec::with_capacity(slots * ncb);
    for s in 1..=slots {
        for c in 0..ncb {
            class_names.push(format!("{}@{s}", a.class_name(c)));
        }
    }
    let mut idem: Vec<Vec<usize>> = Vec::with_capacity(slots * ncb);
    for s in 0..slots {
        for c in 0..ncb {
            idem.push(a.idem_class(c).iter().map(|&i| s * na + i).collect());
        }
    }
    let mut src = Vec::with_capacity(n);
    let mut tgt = Vec::with_capacity(n);
    for s in 0..slots {
        for i in 0..na {
            src.push(s * ncb + a.src(i));
            tgt.push(s * ncb + a.tgt(i));
        }
    }
    // subdiagonal f_u at row s (>= 2): e_(s, tgt u) . f_u . e_(s-1, src u)
    for s in 2..=slots {
        for u in 0..na {
            src.push((s - 1) * ncb + a.tgt(u));
            tgt.push((s - 2) * ncb + a.src(u));
        }
    }
    let mut radical: Vec<usize> = Vec::new();
    for s in 0..slots {
        for &r in a.radical() {
            radical.push(s * na + r);
        }
    }
    radical.extend(nd..n);

    let sub_of = |s: usize, u: usize| nd + (s - 2) * na + u;
    let mut mult = vec![vec![Vec::new(); n]; n];
    for s in 0..slots {
        for i in 0..na {
            for j in 0..na {
                let prod = a.mult_table(i, j);
                if !prod.is_empty() {
                    mult[s * na + i][s * na + j] =
                        prod.iter().map(|&(k, v)| ((s * na + k as usize) as u32, v)).collect();
                }
            }
        }
    }
    // diag(slot s) * sub(row s): left action  b . f_u = sum_v c(v,b,u) f_v
    // sub(row s) * diag(slot s-1): right action  f_u . b = sum_v c(b,v,u) f_v
    for s in 2..=slots {
        for b in 0..na {
            for u in 0..na {
                let mut lrow: SparseRow = Vec::new();
                let mut rrow: SparseRow = Vec::new();
                for v in 0..na {
                    if let Some(&(_, c)) = a.mult_table(v, b).iter().find(|&&(k, _)| k as usize == u)
                    {
                        lrow.push((sub_of(s, v) as u32, c));
                    }
                    if let Some(&(_, c)) = a.mult_table(b, v).iter().find(|&&(k, _)| k as usize == u)
                    {
                        rrow.push((sub_of(s, v) as u32, c));
                    }
                }
                lrow.sort_unstable_by_key(|e| e.0);
                rrow.sort_unstable_by_key(|e| e.0);
                mult[(s - 1) * na + b][sub_of(s, u)] = lrow;
                mult[sub_of(s, u)][(s - 2) * na + b] = rrow;
            }
        }
    }
    let alg = BasedAlgebra::new(f, labels, class_names, idem, src, tgt, radical, mult);
    Replicated { alg: Arc::new(alg), base: Arc::clone(a), m, slots }
}

/// Corner algebra `eBe` for `e` the sum of the chosen idempotent classes.
/// Returns the truncated algebra and the map old basis index -> new index.
pub fn idempotent_truncation(
    b: &BasedAlgebra,
    classes: &[usize],
) -> Result<(BasedAlgebra, Vec<Option<usize>>)> {
    if classes.is_empty() {
        return Err(Error::Precondition("idempotent truncation needs a nonempty class set".into()));
    }
    let keep_class = |c: usize| classes.contains(&c);
    let kept: Vec<usize> =
        (0..b.dim()).filter(|&i| keep_class(b.src(i)) && keep_class(b.tgt(i))).collect();
    let mut index_map = vec![None; b.dim()];
    for (new, &old) in kept.iter().enumerate() {
        index_map[old] = Some(new);
    }
    let class_map: Vec<Option<usize>> = {
        let mut cm = vec![None; b.n_classes()];
        for (new, &old) in classes.iter().enumerate() {
            cm[old] = Some(new);
        }
        cm
    };
    let n = kept.len();
    let mut mult = vec![vec![Vec::new(); n]; n];
    for (i, &oi) in kept.iter().enumerate() {
        for (j, &oj) in kept.iter().enumerate() {
            mult[i][j] = b
                .mult_table(oi, oj)
                .iter()
                .map(|&(k, v)| {
                    let nk =
                        index_map[k as usize].expect("corner closed under multiplication");
                    (nk as u32, v)
                })
                .collect();
        }
    }
    let alg = BasedAlgebra::new(
        b.field(),
        kept.iter().map(|&i| b.label(i).to_string()).collect(),
        classes.iter().map(|&c| b.class_name(c).to_string()).collect(),
        classes
            .iter()
            .map(|&c| b.idem_class(c).iter().map(|&i| index_map[i].unwrap()).collect())
            .collect(),
        kept.iter().map(|&i| class_map[b.src(i)].unwrap()).collect(),
        kept.iter().map(|&i| class_map[b.tgt(i)].unwrap()).collect(),
        b.radical().iter().filter_map(|&r| index_map[r]).collect(),
        mult,
    );
    Ok((alg, index_map))
}

/// The one dimensional algebra K = GF(p).
pub fn scalar_algebra(f: Fp) -> BasedAlgebra {
    BasedAlgebra::new(
        f,
        vec!["e".into()],
        vec!["1".into()],
        vec![vec![0]],
        vec![0],
        vec![0],
        vec![],
        vec![vec![vec![(0, 1)]]],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation;

    fn loop_algebra() -> Arc<BasedAlgebra> {
        let p = presentation::parse(
            "algebra loop over GF(3)\nvertices: 1 2\narrows: a: 1 -> 1; b: 1 -> 2\nrelations: a*a",
        )
        .unwrap();
        Arc::new(presentation::build_algebra(&p, 64).unwrap())
    }

    #[test]
    fn scalar_is_semisimple() {
        let k = scalar_algebra(Fp::new(3).unwrap());
        assert_eq!(k.dim(), 1);
        assert!(k.verify().is_ok());
        let fp = k.fingerprint(10);
        assert_eq!(fp.simples, 1);
        assert!(fp.rad_dims.is_empty());
        assert!(fp.acyclic);
        assert_eq!(fp.cartan, vec![vec![1]]);
    }

    #[test]
    fn opposite_involution() {
        let a = loop_algebra();
        let op = a.opposite();
        assert!(op.verify().is_ok());
        let opop = op.opposite();
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                assert_eq!(a.mult_table(i, j), opop.mult_table(i, j));
            }
        }
    }

    #[test]
    fn commutative_opposite_is_same() {
        let p = presentation::parse(
            "algebra dual over GF(3)\nvertices: 1\narrows: x: 1 -> 1\nrelations: x*x",
        )
        .unwrap();
        let a = presentation::build_algebra(&p, 64).unwrap();
        let op = a.opposite();
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                assert_eq!(a.mult_table(i, j), op.mult_table(i, j));
            }
        }
    }

    #[test]
    fn dual_bimodule_actions() {
        let a = loop_algebra();
        let da = dual_bimodule(&a);
        assert_eq!(da.dim, a.dim());
        assert!(da.verify().is_ok());
    }

    #[test]
    fn replicate_dimensions_and_axioms() {
        let a = loop_algebra();
        let r1 = replicate(&a, 1);
        assert_eq!(r1.alg.dim(), 15); // 3 * 5
        assert!(r1.alg.verify().is_ok());
        let r0 = replicate(&a, 0);
        assert_eq!(r0.alg.dim(), a.dim());
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                assert_eq!(r0.alg.mult_table(i, j), a.mult_table(i, j));
            }
        }
    }

    #[test]
    fn replicate_scalar_gives_a2() {
        let k = Arc::new(scalar_algebra(Fp::new(3).unwrap()));
        let r = replicate(&k, 1);
        assert_eq!(r.alg.dim(), 3);
        assert_eq!(r.alg.n_classes(), 2);
        let a2 = presentation::parse("algebra a2 over GF(3)\nvertices: 1 2\narrows: a: 1 -> 2")
            .unwrap();
        let a2 = presentation::build_algebra(&a2, 64).unwrap();
        assert!(r.alg.fingerprint(10).equivalent(&a2.fingerprint(10)));
    }

    #[test]
    fn replicate_matches_triangular_recursion() {
        let a = loop_algebra();
        let r1 = replicate(&a, 1);
        let da = dual_bimodule(&a);
        let tri = triangular_matrix(&a, &a, &da).unwrap();
        assert_eq!(tri.dim(), r1.alg.dim());
        // canonical identification: triangular layout R + M + S versus
        // replicate layout diag slot1 + diag slot2 + sub
        let na = a.dim();
        let mut perm = Vec::new();
        perm.extend(0..na); // R = slot 1 diagonal
        perm.extend(2 * na..3 * na); // M = subdiagonal
        perm.extend(na..2 * na); // S = slot 2 diagonal
        let rep_perm = r1.alg.permute_basis(&perm);
        for i in 0..tri.dim() {
            for j in 0..tri.dim() {
                assert_eq!(rep_perm.mult_table(i, j), tri.mult_table(i, j), "at ({i},{j})");
            }
        }
    }

    #[test]
    fn truncation_roundtrip_and_shrink() {
        let a = loop_algebra();
        let r2 = replicate(&a, 2);
        let all: Vec<usize> = (0..r2.alg.n_classes()).collect();
        let (full, _) = idempotent_truncation(&r2.alg, &all).unwrap();
        assert_eq!(full.dim(), r2.alg.dim());
        // slots 1..2 of A^(2) give A^(1) with identical structure constants
        let keep: Vec<usize> = (0..2 * a.n_classes()).collect();
        let (c, _) = idempotent_truncation(&r2.alg, &keep).unwrap();
        let r1 = replicate(&a, 1);
        assert_eq!(c.dim(), r1.alg.dim());
        for i in 0..c.dim() {
            for j in 0..c.dim() {
                assert_eq!(c.mult_table(i, j), r1.alg.mult_table(i, j));
            }
        }
        assert!(idempotent_truncation(&r2.alg, &[]).is_err());
    }

    #[test]
    fn truncation_slot1_recovers_base() {
        let a = loop_algebra();
        let r2 = replicate(&a, 2);
        let keep: Vec<usize> = (0..a.n_classes()).collect();
        let (c, _) = idempotent_truncation(&r2.alg, &keep).unwrap();
        assert_eq!(c.dim(), a.dim());
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                assert_eq!(c.mult_table(i, j), a.mult_table(i, j));
            }
        }
    }

    #[test]
    fn replicate_radical_nilpotency_bound() {
        let a = loop_algebra();
        let nil_a = a.radical_nilpotency_index().unwrap();
        for m in 1..=3 {
            let r = replicate(&a, m);
            let nil = r.alg.radical_nilpotency_index().unwrap();
            assert!(nil <= (m + 1) * nil_a + m, "m={m}: {nil} > {}", (m + 1) * nil_a + m);
        }
    }

    #[test]
    fn fingerprint_permutation_invariance() {
        let a = loop_algebra();
        let fp = a.fingerprint(10);
        let perm = vec![4, 2, 0, 1, 3];
        let b = a.permute_basis(&perm);
        assert!(b.verify().is_ok());
        assert!(fp.equivalent(&b.fingerprint(10)));
    }

    #[test]
    fn loop_fingerprint_values() {
        let a = loop_algebra();
        let fp = a.fingerprint(10);
        assert_eq!(fp.dim, 5);
        assert_eq!(fp.simples, 2);
        assert!(!fp.acyclic); // the loop arrow survives in rad/rad^2
        assert_eq!(fp.ext_arrows[0][0], 1);
        assert_eq!(fp.ext_arrows[0][1], 1);
        assert_eq!(fp.ext_arrows[1][0], 0);
    }

    #[test]
    fn triangular_smallest_cases() {
        let f = Fp::new(3).unwrap();
        let k = Arc::new(scalar_algebra(f));
        let m = Bimodule {
            left: Arc::clone(&k),
            right: Arc::clone(&k),
            dim: 1,
            lclass: vec![0],
            rclass: vec![0],
            left_action: vec![FpMat::identity(1, f)],
            right_action: vec![FpMat::identity(1, f)],
        };
        let tri = triangular_matrix(&k, &k, &m).unwrap();
        assert_eq!(tri.dim(), 3);
        let a2 = presentation::parse("algebra a2 over GF(3)\nvertices: 1 2\narrows: a: 1 -> 2")
            .unwrap();
        let a2 = presentation::build_algebra(&a2, 64).unwrap();
        assert!(tri.fingerprint(5).equivalent(&a2.fingerprint(5)));

        let z = Bimodule {
            left: Arc::clone(&k),
            right: Arc::clone(&k),
            dim: 0,
            lclass: vec![],
            rclass: vec![],
            left_action: vec![FpMat::zero(0, 0, f)],
            right_action: vec![FpMat::zero(0, 0, f)],
        };
        let prod = triangular_matrix(&k, &k, &z).unwrap();
        assert_eq!(prod.dim(), 2);
        assert_eq!(prod.fingerprint(5).simples, 2);
        assert!(prod.radical().is_empty());
    }
}
