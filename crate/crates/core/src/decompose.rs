//! Krull-Schmidt decomposition, isomorphism testing, and endomorphism
//! algebras.
//!
//! A module splits along any idempotent endomorphism. Idempotents are found
//! in `End(X)/rad` and lifted through the radical by the Newton iteration
//! `e -> 3e^2 - 2e^3`. Inside the semisimple quotient the search is:
//! central idempotents from the Frobenius-fixed subalgebra of the center
//! (eigensplitting a non-scalar fixed point), then zero divisors inside a
//! single matrix block found through the commutative subalgebras F_p[a] of
//! candidate elements (a nonzero nilpotent is a linear kernel of the
//! iterated Frobenius; a proper left ideal yields an idempotent via a
//! left-module projection). Candidates are tried in a deterministic order
//! with a seeded generator as the final fallback, so runs are reproducible.

use crate::algebra::BasedAlgebra;
use crate::fp::Fp;
use crate::matrix::{row_axpy, Echelon, FpMat, QuotientSpace, SparseRow, SpanSolver};
use crate::module::{direct_sum, hom_basis, is_projective, projective, MRef, Module, ModuleMap};
use crate::radical::radical_chain;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// One indecomposable summand with a split inclusion/projection pair.
#[derive(Clone, Debug)]
pub struct Summand {
    pub module: MRef,
    pub incl: ModuleMap,
    pub proj: ModuleMap,
}

/// Flattens a module map into a single coordinate row (blocks in class
/// order, row-major inside each block).
fn flat_map(map: &ModuleMap) -> SparseRow {
    let mut out = Vec::new();
    let mut off = 0usize;
    for blk in &map.blocks {
        for i in 0..blk.rows {
            for (j, v) in blk.row_sparse(i) {
                out.push(((off + i * blk.cols + j as usize) as u32, v));
            }
        }
        off += blk.rows * blk.cols;
    }
    out
}

fn flat_len(m: &MRef, n: &MRef) -> usize {
    m.grading.iter().zip(n.grading.iter()).map(|(&a, &b)| a * b).sum()
}

/// Full matrix of a map (blocks along the grading).
fn full_matrix(map: &ModuleMap) -> FpMat {
    let f = map.src.algebra.field();
    let mut m = FpMat::zero(map.src.dim(), map.tgt.dim(), f);
    let mut ro = 0;
    let mut co = 0;
    for (c, blk) in map.blocks.iter().enumerate() {
        for i in 0..blk.rows {
            for (j, v) in blk.row_sparse(i) {
                m.set(ro + i, co + j as usize, v);
            }
        }
        ro += map.src.grading[c];
        co += map.tgt.grading[c];
    }
    m
}

fn map_from_coords(basis: &[ModuleMap], coords: &[u64]) -> ModuleMap {
    let mut acc = ModuleMap::zero(&basis[0].src, &basis[0].tgt);
    for (i, &c) in coords.iter().enumerate() {
        if c != 0 {
            acc = acc.add(&basis[i].scale(c));
        }
    }
    acc
}

fn to_row(v: &[u64]) -> SparseRow {
    v.iter().enumerate().filter(|&(_, &x)| x != 0).map(|(i, &x)| (i as u32, x)).collect()
}

/// The endomorphism ring of `x`: basis maps plus composition in basis
/// coordinates. Multiplication is function composition, `(a*b)(v) = a(b(v))`,
/// so that `End(A_A)` is isomorphic to `A` via left multiplications.
struct EndoRing {
    basis: Vec<ModuleMap>,
    solver: SpanSolver,
    field: Fp,
}

impl EndoRing {
    fn new(x: &MRef) -> Self {
        let basis = hom_basis(x, x);
        let field = x.algebra.field();
        let flats: Vec<SparseRow> = basis.iter().map(flat_map).collect();
        let solver = SpanSolver::new(flat_len(x, x), field, &flats);
        EndoRing { basis, solver, field }
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn express(&self, map: &ModuleMap) -> Vec<u64> {
        self.solver.express(flat_map(map)).expect("endomorphism lies in the hom space")
    }

    /// coords of a * b = a o b (apply b first).
    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let ma = map_from_coords(&self.basis, a);
        let mb = map_from_coords(&self.basis, b);
        self.express(&mb.then(&ma))
    }

    fn identity_coords(&self, x: &MRef) -> Vec<u64> {
        self.express(&ModuleMap::identity(x))
    }

    fn radical(&self) -> Echelon {
        let reps: Vec<FpMat> = self.basis.iter().map(full_matrix).collect();
        radical_chain(self.field, &reps)
    }
}

/// Semisimple quotient of an [`EndoRing`], multiplying through lifts.
struct SemisimpleQuot {
    qs: QuotientSpace,
}

impl SemisimpleQuot {
    fn dim(&self) -> usize {
        self.qs.dim()
    }

    fn project(&self, coords: &[u64]) -> Vec<u64> {
        self.qs.project(to_row(coords))
    }

    fn lift(&self, q: &[u64]) -> Vec<u64> {
        let row = self.qs.lift(q);
        let mut out = vec![0u64; self.qs.ech.cols];
        for (i, v) in row {
            out[i as usize] = v;
        }
        out
    }

    fn mul(&self, ring: &EndoRing, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.project(&ring.mul(&self.lift(a), &self.lift(b)))
    }

    fn pow(&self, ring: &EndoRing, a: &[u64], e: u64) -> Vec<u64> {
        let mut result: Option<Vec<u64>> = None;
        let mut base = a.to_vec();
        let mut e = e;
        assert!(e > 0);
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => self.mul(ring, &r, &base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(ring, &base, &base);
            }
        }
        result.unwrap()
    }
}

/// A nontrivial idempotent of the semisimple quotient, or `None` when the
/// quotient is a division ring.
fn find_idempotent_mod_rad(
    ring: &EndoRing,
    quot: &SemisimpleQuot,
    one_bar: &[u64],
) -> Option<Vec<u64>> {
    let f = ring.field;
    let d = quot.dim();
    if d <= 1 {
        return None;
    }
    let basis_q: Vec<Vec<u64>> = (0..d)
        .map(|i| {
            let mut v = vec![0u64; d];
            v[i] = 1;
            v
        })
        .collect();
    // center: elements commuting with every basis vector
    let mut rows: Vec<SparseRow> = Vec::new();
    let mult_tables: Vec<Vec<Vec<u64>>> = (0..d)
        .map(|i| (0..d).map(|j| quot.mul(ring, &basis_q[i], &basis_q[j])).collect())
        .collect();
    for i in 0..d {
        for out in 0..d {
            let mut row: SparseRow = Vec::new();
            for j in 0..d {
                let v = f.sub(mult_tables[j][i][out], mult_tables[i][j][out]);
                if v != 0 {
                    row.push((j as u32, v));
                }
            }
            row.sort_unstable_by_key(|e| e.0);
            if !row.is_empty() {
                rows.push(row);
            }
        }
    }
    let sys = FpMat::from_rows(d, f, rows);
    let zker = sys.kernel_basis();
    let center: Vec<Vec<u64>> =
        (0..zker.cols).map(|c| (0..d).map(|i| zker.get(i, c)).collect()).collect();

    let mut candidates: Vec<Vec<u64>> = Vec::new();
    candidates.extend(center.iter().cloned());
    candidates.extend(basis_q.iter().cloned());
    for i in 0..d.min(8) {
        for j in (i + 1)..d.min(8) {
            let mut s = basis_q[i].clone();
            for (k, sv) in s.iter_mut().enumerate() {
                *sv = f.add(*sv, basis_q[j][k]);
            }
            candidates.push(s);
            candidates.push(mult_tables[i][j].clone());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..64 {
        candidates.push((0..d).map(|_| rng.gen_range(0..f.modulus())).collect());
    }
    for a in &candidates {
        if a.iter().all(|&v| v == 0) {
            continue;
        }
        if let Some(e) = split_via_element(ring, quot, one_bar, a) {
            return Some(e);
        }
    }
    None
}

/// Tries to produce a nontrivial idempotent from `F_p[a]`.
fn split_via_element(
    ring: &EndoRing,
    quot: &SemisimpleQuot,
    one_bar: &[u64],
    a: &[u64],
) -> Option<Vec<u64>> {
    let f = ring.field;
    let d = quot.dim();
    let p = f.modulus();
    let mut powers: Vec<Vec<u64>> = vec![one_bar.to_vec()];
    let mut ech = Echelon::new(d, f);
    ech.insert(to_row(one_bar));
    let mut cur = a.to_vec();
    while ech.insert(to_row(&cur)) {
        powers.push(cur.clone());
        cur = quot.mul(ring, &cur, a);
        if powers.len() > d {
            break;
        }
    }
    let cdim = powers.len();
    if cdim <= 1 {
        return None;
    }
    let csolver = SpanSolver::new(d, f, &powers.iter().map(|v| to_row(v)).collect::<Vec<_>>());
    // Frobenius on the commutative algebra C = F_p[a]
    let mut frob = FpMat::zero(cdim, cdim, f);
    for (i, b) in powers.iter().enumerate() {
        let bp = quot.pow(ring, b, p);
        frob.set_row(i, &csolver.express(to_row(&bp))?);
    }
    let mut k = 0u64;
    let mut pk = 1u64;
    while pk < cdim as u64 {
        pk *= p;
        k += 1;
    }
    let frob_k = frob.pow(k.max(1));
    let nil = frob_k.left_kernel_rows();
    if nil.rows > 0 {
        // nonzero nilpotent in the semisimple quotient: a zero divisor
        let ncoords = nil.row_dense(0);
        let n_elt = combine(&powers, &ncoords, f, d);
        return idempotent_from_left_ideal(ring, quot, one_bar, &n_elt);
    }
    // Frobenius-fixed points: span of the F_p-rational block idempotents
    let fixed = frob.sub(&FpMat::identity(cdim, f)).left_kernel_rows();
    if fixed.rows <= 1 {
        return None; // C is a field
    }
    let one_c = csolver.express(to_row(one_bar))?;
    let mut ech1 = Echelon::new(cdim, f);
    ech1.insert(to_row(&one_c));
    let mut v_c: Option<Vec<u64>> = None;
    for i in 0..fixed.rows {
        let cand = fixed.row_dense(i);
        if ech1.insert(to_row(&cand)) {
            v_c = Some(cand);
            break;
        }
    }
    let v_elt = combine(&powers, &v_c?, f, d);
    // v^p = v, so the spectrum lies in F_p; Lagrange interpolation on the
    // spectrum recovers an eigen-idempotent
    let mut spectrum = Vec::new();
    for c in 0..p {
        let mut shifted = vec![0u64; d];
        for (j, sv) in shifted.iter_mut().enumerate() {
            *sv = f.sub(v_elt[j], f.mul(c, one_bar[j]));
        }
        let mut mulmat = FpMat::zero(cdim, cdim, f);
        for (i, b) in powers.iter().enumerate() {
            let prod = quot.mul(ring, b, &shifted);
            mulmat.set_row(i, &csolver.express(to_row(&prod))?);
        }
        if mulmat.rank() < cdim {
            spectrum.push(c);
        }
    }
    if spectrum.len() < 2 {
        return None;
    }
    let c0 = spectrum[0];
    let mut z: Option<Vec<u64>> = None;
    for &c in &spectrum[1..] {
        let denom = f.inv(f.sub(c0, c)).unwrap();
        let mut factor = vec![0u64; d];
        for (j, fv) in factor.iter_mut().enumerate() {
            *fv = f.mul(denom, f.sub(v_elt[j], f.mul(c, one_bar[j])));
        }
        z = Some(match z {
            None => factor,
            Some(zz) => quot.mul(ring, &zz, &factor),
        });
    }
    let z = z?;
    let zz = quot.mul(ring, &z, &z);
    if zz != z || z.iter().all(|&v| v == 0) || z == one_bar {
        return None;
    }
    Some(z)
}

fn combine(basis: &[Vec<u64>], coords: &[u64], f: Fp, d: usize) -> Vec<u64> {
    let mut out = vec![0u64; d];
    for (i, &c) in coords.iter().enumerate() {
        if c != 0 {
            for (j, ov) in out.iter_mut().enumerate() {
                *ov = f.add(*ov, f.mul(c, basis[i][j]));
            }
        }
    }
    let _ = d;
    out
}

/// From a nonzero non-invertible element n of the semisimple quotient: the
/// left ideal L = Ebar n is a direct left-module summand, and pi(1) for a
/// left-module projection pi onto L is a nontrivial idempotent.
fn idempotent_from_left_ideal(
    ring: &EndoRing,
    quot: &SemisimpleQuot,
    one_bar: &[u64],
    n_elt: &[u64],
) -> Option<Vec<u64>> {
    let f = ring.field;
    let d = quot.dim();
    let basis_q: Vec<Vec<u64>> = (0..d)
        .map(|i| {
            let mut v = vec![0u64; d];
            v[i] = 1;
            v
        })
        .collect();
    let mut lech = Echelon::new(d, f);
    for b in &basis_q {
        lech.insert(to_row(&quot.mul(ring, b, n_elt)));
    }
    let ldim = lech.rank();
    if ldim == 0 || ldim == d {
        return None;
    }
    // unknown pi as a d x d matrix, acting on rows: x -> x pi
    let var = |i: usize, j: usize| (i * d + j) as u32;
    let mut rows: Vec<SparseRow> = Vec::new();
    let lmul: Vec<Vec<Vec<u64>>> = (0..d)
        .map(|bi| (0..d).map(|i| quot.mul(ring, &basis_q[bi], &basis_q[i])).collect())
        .collect();
    // left-module map: pi(b e_i) = b pi(e_i) for all b, i
    for bi in 0..d {
        for i in 0..d {
            for out in 0..d {
                let mut row: SparseRow = Vec::new();
                for k in 0..d {
                    let c = lmul[bi][i][k];
                    if c != 0 {
                        row.push((var(k, out), c));
                    }
                }
                row.sort_unstable_by_key(|e| e.0);
                for j in 0..d {
                    // b * e_j evaluated at coordinate `out`
                    let c = lmul[bi][j][out];
                    if c != 0 {
                        let idx = var(i, j);
                        match row.binary_search_by_key(&idx, |e| e.0) {
                            Ok(pos) => {
                                let v = f.sub(row[pos].1, c);
                                if v == 0 {
                                    row.remove(pos);
                                } else {
                                    row[pos].1 = v;
                                }
                            }
                            Err(pos) => row.insert(pos, (idx, f.neg(c))),
                        }
                    }
                }
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }
    // pi restricted to L is the identity (affine conditions, extra column)
    for lr in lech.rows.clone() {
        for out in 0..d {
            let mut row: SparseRow = Vec::new();
            for &(i, v) in &lr {
                row.push((var(i as usize, out), v));
            }
            row.sort_unstable_by_key(|e| e.0);
            let rhs =
                lr.iter().find(|&&(i, _)| i as usize == out).map(|&(_, v)| v).unwrap_or(0);
            if rhs != 0 {
                row.push(((d * d) as u32, f.neg(rhs)));
            }
            if !row.is_empty() {
                rows.push(row);
            }
        }
    }
    // image inside L: the free-coordinate functionals of the reduced form
    // vanish on every pi(e_i)
    let lqs = QuotientSpace::new(lech.clone());
    for i in 0..d {
        for &freecol in &lqs.free {
            let mut functional = vec![0u64; d];
            functional[freecol] = 1;
            for (rowi, &piv) in lech.pivots.iter().enumerate() {
                if let Some(&(_, coef)) =
                    lech.rows[rowi].iter().find(|&&(c, _)| c as usize == freecol)
                {
                    functional[piv as usize] = f.sub(functional[piv as usize], coef);
                }
            }
            let mut row: SparseRow = Vec::new();
            for j in 0..d {
                if functional[j] != 0 {
                    row.push((var(i, j), functional[j]));
                }
            }
            row.sort_unstable_by_key(|e| e.0);
            if !row.is_empty() {
                rows.push(row);
            }
        }
    }
    let sys = FpMat::from_rows(d * d + 1, f, rows);
    let ker = sys.kernel_basis();
    for c in 0..ker.cols {
        let h = ker.get(d * d, c);
        if h == 0 {
            continue;
        }
        let scale = f.inv(h).unwrap();
        let mut pi = FpMat::zero(d, d, f);
        for i in 0..d {
            for j in 0..d {
                pi.set(i, j, f.mul(scale, ker.get(var(i, j) as usize, c)));
            }
        }
        let e = pi.apply_row(one_bar);
        if e.iter().any(|&v| v != 0) && e != one_bar {
            let ee = quot.mul(ring, &e, &e);
            if ee == e {
                return Some(e);
            }
        }
    }
    None
}

/// Newton lifting of an idempotent through the radical.
fn lift_idempotent(x: &MRef, ring: &EndoRing, coords: &[u64]) -> ModuleMap {
    let f = x.algebra.field();
    let mut t = map_from_coords(&ring.basis, coords);
    for _ in 0..64 {
        let t2 = t.then(&t);
        if t2.blocks == t.blocks {
            return t;
        }
        let t3 = t2.then(&t);
        t = t2.scale(f.reduce(3)).sub(&t3.scale(f.reduce(2)));
    }
    panic!("idempotent lifting did not converge");
}

/// Splits `x` along an idempotent endomorphism.
fn split_by_idempotent(x: &MRef, e: &ModuleMap) -> (Summand, Summand) {
    let one = ModuleMap::identity(x);
    let compl = one.sub(e);
    let (im, incl_im) = e.image();
    let (ker, incl_ker) = e.kernel();
    let proj_im_blocks: Vec<FpMat> = e
        .blocks
        .iter()
        .zip(incl_im.blocks.iter())
        .map(|(eb, ib)| ib.solve_left(eb).expect("image projection"))
        .collect();
    let proj_im = ModuleMap { src: Arc::clone(x), tgt: Arc::clone(&im), blocks: proj_im_blocks };
    let proj_ker_blocks: Vec<FpMat> = compl
        .blocks
        .iter()
        .zip(incl_ker.blocks.iter())
        .map(|(cb, kb)| kb.solve_left(cb).expect("kernel projection"))
        .collect();
    let proj_ker = ModuleMap { src: Arc::clone(x), tgt: Arc::clone(&ker), blocks: proj_ker_blocks };
    (
        Summand { module: im, incl: incl_im, proj: proj_im },
        Summand { module: ker, incl: incl_ker, proj: proj_ker },
    )
}

/// Full decomposition into indecomposable summands with split maps.
pub fn decompose(x: &MRef) -> Vec<Summand> {
    if x.is_zero() {
        return Vec::new();
    }
    let ring = EndoRing::new(x);
    if ring.dim() == 1 {
        return vec![Summand {
            module: Arc::clone(x),
            incl: ModuleMap::identity(x),
            proj: ModuleMap::identity(x),
        }];
    }
    let rad = ring.radical();
    let quot = SemisimpleQuot { qs: QuotientSpace::new(rad) };
    let one_bar = quot.project(&ring.identity_coords(x));
    let Some(ebar) = find_idempotent_mod_rad(&ring, &quot, &one_bar) else {
        return vec![Summand {
            module: Arc::clone(x),
            incl: ModuleMap::identity(x),
            proj: ModuleMap::identity(x),
        }];
    };
    let e = lift_idempotent(x, &ring, &quot.lift(&ebar));
    let (s1, s2) = split_by_idempotent(x, &e);
    let mut out = Vec::new();
    for s in [s1, s2] {
        for inner in decompose(&s.module) {
            out.push(Summand {
                module: inner.module,
                incl: inner.incl.then(&s.incl),
                proj: s.proj.then(&inner.proj),
            });
        }
    }
    out
}

/// Isomorphism test for indecomposable modules: they are isomorphic iff some
/// pairwise composition of hom bases is invertible.
pub fn iso_indec(u: &MRef, v: &MRef) -> Option<ModuleMap> {
    if u.grading != v.grading {
        return None;
    }
    if u.is_zero() {
        return Some(ModuleMap::zero(u, v));
    }
    let huv = hom_basis(u, v);
    let hvu = hom_basis(v, u);
    for a in &huv {
        for b in &hvu {
            if a.then(b).is_iso() {
                return Some(a.clone());
            }
        }
    }
    None
}

/// Exact isomorphism decision with witness, by Krull-Schmidt matching of the
/// indecomposable summands (the blockwise multiplicity comparison in
/// `End(M + N)` modulo its radical, realised through split decompositions).
pub fn is_isomorphic(m: &MRef, n: &MRef) -> Option<ModuleMap> {
    if m.grading != n.grading {
        return None;
    }
    if m.is_zero() {
        return Some(ModuleMap::zero(m, n));
    }
    let dm = decompose(m);
    let mut dn = decompose(n);
    if dm.len() != dn.len() {
        return None;
    }
    let mut witness = ModuleMap::zero(m, n);
    for sm in &dm {
        let mut matched = None;
        for (k, sn) in dn.iter().enumerate() {
            if let Some(iso) = iso_indec(&sm.module, &sn.module) {
                witness = witness.add(&sm.proj.then(&iso).then(&sn.incl));
                matched = Some(k);
                break;
            }
        }
        match matched {
            Some(k) => {
                dn.remove(k);
            }
            None => return None,
        }
    }
    debug_assert!(witness.is_iso());
    Some(witness)
}

/// Splits off the maximal projective direct summand: the projective-free
/// part plus the classes of the removed projectives.
pub fn strip_projectives(m: &MRef) -> (MRef, Vec<usize>) {
    if m.is_zero() {
        return (Arc::clone(m), Vec::new());
    }
    let dec = decompose(m);
    let mut keep: Vec<MRef> = Vec::new();
    let mut dropped = Vec::new();
    for s in dec {
        if is_projective(&s.module) {
            let tops = crate::module::top(&s.module).0;
            let c = (0..tops.grading.len()).find(|&c| tops.grading[c] > 0).unwrap();
            dropped.push(c);
        } else {
            keep.push(s.module);
        }
    }
    if keep.is_empty() {
        return (Arc::new(Module::zero(&m.algebra)), dropped);
    }
    let (sum, _, _) = direct_sum(&keep);
    (sum, dropped)
}

/// Splits off injective summands, dually.
pub fn strip_injectives(m: &MRef, op: &Arc<BasedAlgebra>) -> MRef {
    if m.is_zero() {
        return Arc::clone(m);
    }
    let dec = decompose(m);
    let keep: Vec<MRef> = dec
        .into_iter()
        .filter(|s| !crate::module::is_injective(&s.module, op))
        .map(|s| s.module)
        .collect();
    if keep.is_empty() {
        return Arc::new(Module::zero(&m.algebra));
    }
    direct_sum(&keep).0
}

/// The endomorphism algebra of `m` as a [`BasedAlgebra`], with one
/// idempotent class per indecomposable summand, a basis adapted to the
/// component decomposition, and the radical designated by the generic
/// radical algorithm.
pub struct EndAlgebra {
    pub alg: Arc<BasedAlgebra>,
    /// the module map realising each algebra basis element
    pub basis_maps: Vec<ModuleMap>,
    pub summands: Vec<Summand>,
}

pub fn end_algebra(m: &MRef) -> Result<EndAlgebra> {
    let f = m.algebra.field();
    let ring = EndoRing::new(m);
    let summands = decompose(m);
    let r = summands.len();
    let eps: Vec<ModuleMap> = summands.iter().map(|s| s.proj.then(&s.incl)).collect();
    let rad = ring.radical();
    let rad_maps: Vec<ModuleMap> = rad
        .rows
        .iter()
        .map(|row| {
            let mut v = vec![0u64; ring.dim()];
            for &(i, c) in row {
                v[i as usize] = c;
            }
            map_from_coords(&ring.basis, &v)
        })
        .collect();
    // component (s,t): eps_s o theta o eps_t = "eps_t then theta then eps_s"
    let sandwich = |s: usize, t: usize, theta: &ModuleMap| eps[t].then(theta).then(&eps[s]);
    let mut labels = Vec::new();
    let mut src = Vec::new();
    let mut tgt = Vec::new();
    let mut radical = Vec::new();
    let mut idem: Vec<Vec<usize>> = vec![Vec::new(); r];
    let mut basis_maps: Vec<ModuleMap> = Vec::new();
    for s in 0..r {
        for t in 0..r {
            let mut comp_ech = Echelon::new(flat_len(m, m), f);
            let mut comp_maps: Vec<(ModuleMap, bool)> = Vec::new();
            for rm in &rad_maps {
                let sw = sandwich(s, t, rm);
                if comp_ech.insert(flat_map(&sw)) {
                    comp_maps.push((sw, true));
                }
            }
            if s == t {
                let sw = eps[s].clone();
                if comp_ech.insert(flat_map(&sw)) {
                    comp_maps.push((sw, false));
                } else {
                    return Err(Error::Verification(
                        "summand idempotent lies in the radical".into(),
                    ));
                }
            }
            for theta in &ring.basis {
                let sw = sandwich(s, t, theta);
                if comp_ech.insert(flat_map(&sw)) {
                    comp_maps.push((sw, false));
                }
            }
            for (map, is_rad) in comp_maps {
                if s == t && !is_rad && idem[s].is_empty() {
                    idem[s] = vec![basis_maps.len()];
                }
                if is_rad {
                    radical.push(basis_maps.len());
                }
                labels.push(format!("h{s}_{t}_{}", basis_maps.len()));
                src.push(s);
                tgt.push(t);
                basis_maps.push(map);
            }
        }
    }
    if basis_maps.len() != ring.dim() {
        return Err(Error::Verification(format!(
            "component bases sum to {} but End has dimension {}",
            basis_maps.len(),
            ring.dim()
        )));
    }
    let flats: Vec<SparseRow> = basis_maps.iter().map(flat_map).collect();
    let solver = SpanSolver::new(flat_len(m, m), f, &flats);
    let n = basis_maps.len();
    let mut mult = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            if tgt[i] != src[j] {
                continue;
            }
            // x * y := x o y, i.e. apply y first
            let comp = basis_maps[j].then(&basis_maps[i]);
            let coords = solver
                .express(flat_map(&comp))
                .ok_or_else(|| Error::Verification("composition left the hom space".into()))?;
            mult[i][j] = to_row(&coords);
        }
    }
    let class_names = (0..r).map(|t| format!("u{t}")).collect();
    let alg = BasedAlgebra::new(f, labels, class_names, idem, src, tgt, radical, mult);
    Ok(EndAlgebra { alg: Arc::new(alg), basis_maps, summands })
}

/// The stable endomorphism algebra: `End(M)` modulo the ideal of maps
/// factoring through a projective module.
pub struct StableEnd {
    pub alg: Arc<BasedAlgebra>,
    pub coords_proj: QuotientSpace,
    pub end: EndAlgebra,
    /// stable basis index -> End coordinates of the canonical lift
    pub lifts: Vec<Vec<u64>>,
}

pub fn stable_end_algebra(m: &MRef) -> Result<StableEnd> {
    let end = end_algebra(m)?;
    let e = &end.alg;
    let f = e.field();
    let n = e.dim();
    let flats: Vec<SparseRow> = end.basis_maps.iter().map(flat_map).collect();
    let solver = SpanSolver::new(flat_len(m, m), f, &flats);
    let mut ideal = Echelon::new(n, f);
    for c in 0..m.algebra.n_classes() {
        let (p, _, _) = projective(&m.algebra, c);
        let p = Arc::new(p);
        let to_p = hom_basis(m, &p);
        let from_p = hom_basis(&p, m);
        for g in &to_p {
            for h in &from_p {
                let comp = g.then(h);
                let coords = solver
                    .express(flat_map(&comp))
                    .ok_or_else(|| Error::Verification("factoring map outside End".into()))?;
                ideal.insert(to_row(&coords));
            }
        }
    }
    let qs = QuotientSpace::new(ideal);
    let qdim = qs.dim();
    let lifts: Vec<Vec<u64>> = (0..qdim)
        .map(|k| {
            let mut v = vec![0u64; qdim];
            v[k] = 1;
            let row = qs.lift(&v);
            let mut out = vec![0u64; n];
            for (i, val) in row {
                out[i as usize] = val;
            }
            out
        })
        .collect();
    let mul_q = |a: &[u64], b: &[u64]| -> Vec<u64> {
        let mut acc: SparseRow = Vec::new();
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let prod = e.mult_table(i, j);
                if !prod.is_empty() {
                    acc = row_axpy(f, &acc, prod, f.mul(ai, bj));
                }
            }
        }
        qs.project(acc)
    };
    let mut class_map: Vec<Option<usize>> = vec![None; e.n_classes()];
    let mut class_names = Vec::new();
    let mut idem: Vec<Vec<usize>> = Vec::new();
    for (k, &amb) in qs.free.iter().enumerate() {
        for c in 0..e.n_classes() {
            if e.idem_class(c) == [amb] {
                class_map[c] = Some(class_names.len());
                class_names.push(e.class_name(c).to_string());
                idem.push(vec![k]);
            }
        }
    }
    let mut src = Vec::with_capacity(qdim);
    let mut tgt = Vec::with_capacity(qdim);
    for &amb in &qs.free {
        let s = class_map[e.src(amb)].ok_or_else(|| {
            Error::Verification("stable basis element attached to a killed idempotent".into())
        })?;
        let t = class_map[e.tgt(amb)].ok_or_else(|| {
            Error::Verification("stable basis element attached to a killed idempotent".into())
        })?;
        src.push(s);
        tgt.push(t);
    }
    // radical of the quotient = image of rad(End)
    let mut rad_image = Echelon::new(qdim, f);
    for &ri in e.radical() {
        let mut v = vec![0u64; n];
        v[ri] = 1;
        rad_image.insert(to_row(&qs.project(to_row(&v))));
    }
    let radical: Vec<usize> = (0..qdim)
        .filter(|&k| {
            let mut v = vec![0u64; qdim];
            v[k] = 1;
            rad_image.contains(to_row(&v))
        })
        .collect();
    if radical.len() != rad_image.rank() {
        return Err(Error::Verification(
            "stable radical is not spanned by quotient coordinates".into(),
        ));
    }
    let mut mult = vec![vec![Vec::new(); qdim]; qdim];
    for i in 0..qdim {
        for j in 0..qdim {
            mult[i][j] = to_row(&mul_q(&lifts[i], &lifts[j]));
        }
    }
    let labels = qs.free.iter().map(|&amb| format!("s:{}", e.label(amb))).collect();
    let alg = BasedAlgebra::new(f, labels, class_names, idem, src, tgt, radical, mult);
    Ok(StableEnd { alg: Arc::new(alg), coords_proj: qs, end, lifts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::replicate;
    use crate::module::{injective, regular, simple};
    use crate::presentation::{build_algebra, parse};

    fn alg(src: &str) -> Arc<BasedAlgebra> {
        Arc::new(build_algebra(&parse(src).unwrap(), 64).unwrap())
    }

    fn loop_alg() -> Arc<BasedAlgebra> {
        alg("algebra loop over GF(3)\nvertices: 1 2\narrows: a: 1 -> 1; b: 1 -> 2\nrelations: a*a")
    }

    #[test]
    fn decompose_regular_module() {
        let a = loop_alg();
        let reg = regular(&a);
        let dec = decompose(&reg.module);
        assert_eq!(dec.len(), 2);
        let mut dims: Vec<usize> = dec.iter().map(|s| s.module.dim()).collect();
        dims.sort_unstable();
        assert_eq!(dims, vec![1, 4]);
        for s in &dec {
            let idem = s.proj.then(&s.incl);
            assert_eq!(idem.then(&idem).blocks, idem.blocks);
            let id = s.incl.then(&s.proj);
            assert!(id.is_iso());
        }
    }

    #[test]
    fn decompose_multiplicity() {
        let a = alg("algebra a2 over GF(3)\nvertices: 1 2\narrows: a: 1 -> 2");
        let s2 = Arc::new(simple(&a, 1));
        let (sum, _, _) = direct_sum(&[Arc::clone(&s2), Arc::clone(&s2), Arc::clone(&s2)]);
        // S2^3 has endomorphism ring M_3(GF(3)): the regular trace form is
        // identically zero, exercising the higher radical chain steps
        let dec = decompose(&sum);
        assert_eq!(dec.len(), 3);
        for s in &dec {
            assert_eq!(s.module.dim(), 1);
        }
    }

    #[test]
    fn iso_and_witness() {
        let a = loop_alg();
        let (p1, _, _) = projective(&a, 0);
        let p1 = Arc::new(p1);
        let w = is_isomorphic(&p1, &p1).unwrap();
        assert!(w.is_iso());
        let s1 = Arc::new(simple(&a, 0));
        let s2 = Arc::new(simple(&a, 1));
        assert!(is_isomorphic(&s1, &s2).is_none());
        let (x, _, _) = direct_sum(&[Arc::clone(&p1), Arc::clone(&s1)]);
        let (y, _, _) = direct_sum(&[Arc::clone(&s1), Arc::clone(&p1)]);
        let w = is_isomorphic(&x, &y).unwrap();
        assert!(w.is_iso());
        assert!(w.verify_intertwines().is_ok());
    }

    #[test]
    fn end_of_regular_is_the_algebra() {
        let a = loop_alg();
        let reg = regular(&a);
        let e = end_algebra(&reg.module).unwrap();
        assert_eq!(e.alg.dim(), a.dim());
        assert!(e.alg.fingerprint(10).equivalent(&a.fingerprint(10)));
    }

    #[test]
    fn end_of_a_plus_da_radical_codim() {
        let a = loop_alg();
        let reg = regular(&a);
        let op = Arc::new(a.opposite());
        let da = Arc::new(regular(&op).module.dual(&a));
        let (m, _, _) = direct_sum(&[Arc::clone(&reg.module), da]);
        let e = end_algebra(&m).unwrap();
        // four pairwise non-isomorphic indecomposable summands
        assert_eq!(e.summands.len(), 4);
        assert_eq!(e.alg.dim() - e.alg.radical().len(), 4);
    }

    #[test]
    fn stable_end_of_projective_vanishes() {
        let a = loop_alg();
        let reg = regular(&a);
        let se = stable_end_algebra(&reg.module).unwrap();
        assert_eq!(se.alg.dim(), 0);
    }

    #[test]
    fn stable_end_of_da_over_loop_is_a() {
        // Hom(DA, A) = 0 for the loop fixture, so nothing factors through a
        // projective and stable End(DA) = End(DA), isomorphic to A
        let a = loop_alg();
        let op = Arc::new(a.opposite());
        let da = Arc::new(regular(&op).module.dual(&a));
        let se = stable_end_algebra(&da).unwrap();
        assert_eq!(se.alg.dim(), a.dim());
        assert!(se.alg.fingerprint(10).equivalent(&a.fingerprint(10)));
    }

    #[test]
    fn strip_projectives_works() {
        let a = loop_alg();
        let (p1, _, _) = projective(&a, 0);
        let s1 = simple(&a, 0);
        let (x, _, _) = direct_sum(&[Arc::new(p1), Arc::new(s1)]);
        let (rest, dropped) = strip_projectives(&x);
        assert_eq!(dropped, vec![0]);
        assert_eq!(rest.dim(), 1);
    }

    #[test]
    fn decompose_replicated_regular() {
        let a = loop_alg();
        let rep = replicate(&a, 1);
        let reg = regular(&rep.alg);
        let dec = decompose(&reg.module);
        assert_eq!(dec.len(), 4);
    }

    #[test]
    fn injectives_are_indecomposable() {
        let a = loop_alg();
        for c in 0..a.n_classes() {
            let (i, _) = injective(&a, c);
            let dec = decompose(&Arc::new(i));
            assert_eq!(dec.len(), 1);
        }
    }
}
