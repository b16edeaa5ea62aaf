//! Bounded complexes of projectives and the derived Nakayama machinery.
//!
//! Complexes are cohomological (differentials raise degree) and projective
//! terms are direct sums of the `e_c A`, recorded by their class lists.
//! Differentials are matrices with algebra-element entries: the entry at
//! `(s, t)` is an element of `e_{d_s} A e_{c_t}` acting by left
//! multiplication. On such complexes the Nakayama functor is exact: the same
//! entries act on `D(A e_c)` by left multiplication, so `nu` is a
//! reinterpretation of the terms.
//!
//! Minimisation cancels one invertible corner entry at a time (Gaussian
//! elimination of complexes) and keeps an explicit section, so
//! quasi-isomorphisms can be transported through it.

use crate::algebra::{BasedAlgebra, Replicated};
use crate::matrix::{Echelon, FpMat, SparseRow};
use crate::module::{
    hom_dim, inj_sum, injective_envelope, make_stalk, proj_sum, projective_cover,
    quotient_from_spaces, Ctx, InjSum, MRef, Module, ModuleMap, ProjSum,
};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::sync::Arc;

/// A matrix of algebra elements: the map `+ e_{c_t} A -> + e_{d_s} A` whose
/// (s, t) entry acts by left multiplication.
#[derive(Clone, Debug)]
pub struct AlgMat {
    pub src_classes: Vec<usize>,
    pub tgt_classes: Vec<usize>,
    /// entries[s][t] in e_{tgt_classes[s]} A e_{src_classes[t]}
    pub entries: Vec<Vec<SparseRow>>,
}

impl AlgMat {
    pub fn zero(src_classes: Vec<usize>, tgt_classes: Vec<usize>) -> AlgMat {
        let entries = vec![vec![Vec::new(); src_classes.len()]; tgt_classes.len()];
        AlgMat { src_classes, tgt_classes, entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|row| row.iter().all(|e| e.is_empty()))
    }

    /// `self` after `first`: entries of the composite map.
    pub fn after(&self, alg: &BasedAlgebra, first: &AlgMat) -> AlgMat {
        assert_eq!(self.src_classes, first.tgt_classes);
        let f = alg.field();
        let mut out = AlgMat::zero(first.src_classes.clone(), self.tgt_classes.clone());
        for u in 0..self.tgt_classes.len() {
            for t in 0..first.src_classes.len() {
                let mut acc: SparseRow = Vec::new();
                for s in 0..self.src_classes.len() {
                    let a = &self.entries[u][s];
                    let b = &first.entries[s][t];
                    if !a.is_empty() && !b.is_empty() {
                        let prod = alg.mul_elems(a, b);
                        acc = crate::matrix::row_axpy(f, &acc, &prod, 1);
                    }
                }
                out.entries[u][t] = acc;
            }
        }
        out
    }
}

/// A bounded complex of projective modules in entry form.
#[derive(Clone, Debug)]
pub struct ProjComplex {
    pub alg: Arc<BasedAlgebra>,
    pub lo: i64,
    /// classes of each term, index 0 = degree `lo`
    pub terms: Vec<Vec<usize>>,
    /// diffs[k]: terms[k] -> terms[k+1]
    pub diffs: Vec<AlgMat>,
}

impl ProjComplex {
    pub fn empty(alg: &Arc<BasedAlgebra>) -> ProjComplex {
        ProjComplex { alg: Arc::clone(alg), lo: 0, terms: Vec::new(), diffs: Vec::new() }
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.terms.len() as i64 - 1
    }

    pub fn term(&self, deg: i64) -> &[usize] {
        let idx = deg - self.lo;
        if idx < 0 || idx as usize >= self.terms.len() {
            &[]
        } else {
            &self.terms[idx as usize]
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.iter().all(|t| t.is_empty())
    }

    /// Drops empty boundary terms.
    pub fn trim(mut self) -> ProjComplex {
        while let Some(first) = self.terms.first() {
            if first.is_empty() {
                self.terms.remove(0);
                if !self.diffs.is_empty() {
                    self.diffs.remove(0);
                }
                self.lo += 1;
            } else {
                break;
            }
        }
        while let Some(last) = self.terms.last() {
            if last.is_empty() {
                self.terms.pop();
                self.diffs.pop();
            } else {
                break;
            }
        }
        if self.terms.is_empty() {
            self.lo = 0;
            self.diffs.clear();
        }
        self
    }

    pub fn verify_dd(&self) -> Result<()> {
        for k in 0..self.diffs.len().saturating_sub(1) {
            let comp = self.diffs[k + 1].after(&self.alg, &self.diffs[k]);
            if !comp.is_zero() {
                return Err(Error::Verification(format!(
                    "d o d != 0 between degrees {} and {}",
                    self.lo + k as i64,
                    self.lo + k as i64 + 2
                )));
            }
        }
        Ok(())
    }

    /// All differential entries lie in the radical (no cancellable units).
    pub fn is_minimal(&self) -> bool {
        self.diffs.iter().all(|d| {
            d.entries.iter().enumerate().all(|(s, row)| {
                row.iter().enumerate().all(|(t, e)| {
                    d.src_classes[t] != d.tgt_classes[s] || !self.alg.corner_unit(e)
                })
            })
        })
    }
}

/// Realisation of a [`ProjComplex`] as honest modules and maps.
pub struct Realized {
    pub terms: Vec<ProjSum>,
    pub diffs: Vec<ModuleMap>,
}

/// The map `e_c A -> e_d A` given by left multiplication with `x`,
/// between the standard realisations.
pub fn left_mult_map(
    alg: &Arc<BasedAlgebra>,
    x: &SparseRow,
    psrc: &ProjSum,
    t: usize,
    ptgt: &ProjSum,
    s: usize,
) -> ModuleMap {
    // compute images of the source summand's coordinates and push through
    // the inclusion of the target summand
    let f = alg.field();
    let src_part = &psrc.incls[t].src;
    let tgt_part = &ptgt.incls[s].src;
    let mut blocks = Vec::with_capacity(alg.n_classes());
    for b in 0..alg.n_classes() {
        blocks.push(FpMat::zero(src_part.grading[b], tgt_part.grading[b], f));
    }
    let tgt_layout = &ptgt.layouts[s];
    for (local, &bi) in psrc.layouts[t].iter().enumerate() {
        // x * b_i in the target projective's coordinates
        let prod = alg.mul_elems(x, &vec![(bi as u32, 1)]);
        let b = alg.tgt(bi);
        let local_in_block = local - src_part.offset(b);
        for (k, v) in prod {
            let pos = tgt_layout.iter().position(|&j| j == k as usize).expect("target layout");
            let pos_in_block = pos - tgt_part.offset(b);
            blocks[b].set(local_in_block, pos_in_block, v);
        }
    }
    let part_map =
        ModuleMap { src: Arc::clone(&psrc.incls[t].src), tgt: Arc::clone(&ptgt.incls[s].src), blocks };
    psrc.projs[t].then(&part_map).then(&ptgt.incls[s])
}

/// The map `D(A e_c) -> D(A e_d)` given by left multiplication with `x`
/// (`(x.f)(y) = f(yx)`), between injective realisations.
pub fn left_mult_dual_map(
    alg: &Arc<BasedAlgebra>,
    x: &SparseRow,
    isrc: &InjSum,
    t: usize,
    itgt: &InjSum,
    s: usize,
) -> ModuleMap {
    let f = alg.field();
    let src_part = &isrc.incls[t].src;
    let tgt_part = &itgt.incls[s].src;
    let mut blocks = Vec::with_capacity(alg.n_classes());
    for b in 0..alg.n_classes() {
        blocks.push(FpMat::zero(src_part.grading[b], tgt_part.grading[b], f));
    }
    let tgt_layout = &itgt.layouts[s];
    for (local, &u) in isrc.layouts[t].iter().enumerate() {
        // x . f_u = sum_v coeff_u(b_v x) f_v
        let b = alg.src(u);
        let local_in_block = local - src_part.offset(b);
        for (pos, &v) in tgt_layout.iter().enumerate() {
            if alg.src(v) != b {
                continue;
            }
            let prod = alg.mul_elems(&vec![(v as u32, 1)], x);
            if let Some(&(_, c)) = prod.iter().find(|&&(k, _)| k as usize == u) {
                let pos_in_block = pos - tgt_part.offset(b);
                blocks[b].set(local_in_block, pos_in_block, c);
            }
        }
    }
    let part_map =
        ModuleMap { src: Arc::clone(&isrc.incls[t].src), tgt: Arc::clone(&itgt.incls[s].src), blocks };
    isrc.projs[t].then(&part_map).then(&itgt.incls[s])
}

/// Realises an [`AlgMat`] as a module map between projective sums.
pub fn realize_alg_mat(
    alg: &Arc<BasedAlgebra>,
    m: &AlgMat,
    psrc: &ProjSum,
    ptgt: &ProjSum,
) -> ModuleMap {
    let mut total = ModuleMap::zero(&psrc.module, &ptgt.module);
    for (s, row) in m.entries.iter().enumerate() {
        for (t, x) in row.iter().enumerate() {
            if !x.is_empty() {
                total = total.add(&left_mult_map(alg, x, psrc, t, ptgt, s));
            }
        }
    }
    total
}

/// Realises an [`AlgMat`] on the injective side (the Nakayama image).
pub fn realize_alg_mat_nu(
    alg: &Arc<BasedAlgebra>,
    m: &AlgMat,
    isrc: &InjSum,
    itgt: &InjSum,
) -> ModuleMap {
    let mut total = ModuleMap::zero(&isrc.module, &itgt.module);
    for (s, row) in m.entries.iter().enumerate() {
        for (t, x) in row.iter().enumerate() {
            if !x.is_empty() {
                total = total.add(&left_mult_dual_map(alg, x, isrc, t, itgt, s));
            }
        }
    }
    total
}

/// Reads a module map between realised projective sums back into entry form.
pub fn alg_mat_from_map(
    alg: &Arc<BasedAlgebra>,
    map: &ModuleMap,
    psrc: &ProjSum,
    ptgt: &ProjSum,
) -> AlgMat {
    let mut out = AlgMat::zero(psrc.classes.clone(), ptgt.classes.clone());
    for (t, &c) in psrc.classes.iter().enumerate() {
        // image of the unit of summand t
        let mut unit = vec![0u64; psrc.incls[t].src.dim()];
        unit[psrc.units[t]] = 1;
        let img = psrc.incls[t].then(map);
        let vec = img.apply(&unit);
        // split by target summands and read off algebra elements
        for (s, _) in ptgt.classes.iter().enumerate() {
            let back = ptgt.projs[s].apply(&vec);
            let mut elem: SparseRow = Vec::new();
            for (pos, &v) in back.iter().enumerate() {
                if v != 0 {
                    elem.push((ptgt.layouts[s][pos] as u32, v));
                }
            }
            elem.sort_unstable_by_key(|e| e.0);
            debug_assert!(elem
                .iter()
                .all(|&(i, _)| alg.tgt(i as usize) == c || alg.src(i as usize) != c));
            out.entries[s][t] = elem;
        }
    }
    out
}

/// Reads a module map between injective sums back into entry form by solving
/// for the left-multiplying elements.
pub fn alg_mat_from_nu_map(
    alg: &Arc<BasedAlgebra>,
    map: &ModuleMap,
    isrc: &InjSum,
    itgt: &InjSum,
) -> AlgMat {
    let f = alg.field();
    let mut out = AlgMat::zero(isrc.classes.clone(), itgt.classes.clone());
    for (t, &c) in isrc.classes.iter().enumerate() {
        for (s, &d) in itgt.classes.iter().enumerate() {
            // corner basis of e_d A e_c
            let corner: Vec<usize> =
                (0..alg.dim()).filter(|&i| alg.src(i) == d && alg.tgt(i) == c).collect();
            if corner.is_empty() {
                continue;
            }
            // sandwich the (s, t) component back into sum coordinates so it
            // is directly comparable to the left-multiplication basis maps
            let component =
                isrc.projs[t].then(&isrc.incls[t]).then(map).then(&itgt.projs[s]).then(&itgt.incls[s]);
            let basis_maps: Vec<ModuleMap> = corner
                .iter()
                .map(|&i| left_mult_dual_map(alg, &vec![(i as u32, 1)], isrc, t, itgt, s))
                .collect();
            // flatten restricted to the summand component: use full blocks
            let flat = |mm: &ModuleMap| -> SparseRow {
                let mut outp = Vec::new();
                let mut off = 0usize;
                for blk in &mm.blocks {
                    for i in 0..blk.rows {
                        for (j, v) in blk.row_sparse(i) {
                            outp.push(((off + i * blk.cols + j as usize) as u32, v));
                        }
                    }
                    off += blk.rows * blk.cols;
                }
                outp
            };
            let cols: usize = basis_maps[0]
                .blocks
                .iter()
                .map(|b| b.rows * b.cols)
                .sum();
            let mut rows: Vec<SparseRow> = basis_maps.iter().map(|m| flat(m)).collect();
            // the basis maps might be dependent only if the corner acts
            // degenerately; solve by least fixed representation
            let mut ech = Echelon::new(cols + corner.len(), f);
            for (k, r) in rows.iter_mut().enumerate() {
                let mut aug = r.clone();
                aug.push(((cols + k) as u32, 1));
                ech.insert(aug);
            }
            let target = flat(&component);
            let residue = ech.reduce(target);
            let mut elem: SparseRow = Vec::new();
            let mut ok = true;
            for &(cidx, v) in &residue {
                if (cidx as usize) < cols {
                    ok = false;
                    break;
                }
                elem.push((corner[cidx as usize - cols] as u32, f.neg(v)));
            }
            assert!(ok, "injective-side component is not a left multiplication");
            elem.sort_unstable_by_key(|e| e.0);
            out.entries[s][t] = elem;
        }
    }
    out
}

impl ProjComplex {
    pub fn realize(&self) -> Realized {
        let terms: Vec<ProjSum> = self.terms.iter().map(|cl| proj_sum(&self.alg, cl)).collect();
        let diffs: Vec<ModuleMap> = (0..self.diffs.len())
            .map(|k| realize_alg_mat(&self.alg, &self.diffs[k], &terms[k], &terms[k + 1]))
            .collect();
        Realized { terms, diffs }
    }

    /// Realisation under the Nakayama functor (projectives become the
    /// corresponding injectives, same entries).
    pub fn realize_nu(&self) -> (Vec<InjSum>, Vec<ModuleMap>) {
        let terms: Vec<InjSum> = self.terms.iter().map(|cl| inj_sum(&self.alg, cl)).collect();
        let diffs: Vec<ModuleMap> = (0..self.diffs.len())
            .map(|k| realize_alg_mat_nu(&self.alg, &self.diffs[k], &terms[k], &terms[k + 1]))
            .collect();
        (terms, diffs)
    }

    /// Homology at a given degree.
    pub fn homology(&self, deg: i64) -> MRef {
        let r = self.realize();
        homology_of(&r.terms.iter().map(|p| Arc::clone(&p.module)).collect::<Vec<_>>(), &r.diffs, self.lo, deg, &self.alg)
    }

    pub fn is_acyclic(&self) -> bool {
        let r = self.realize();
        let n = r.terms.len();
        if n == 0 {
            return true;
        }
        let ranks: Vec<usize> = r.diffs.iter().map(|d| d.rank()).collect();
        (0..n).all(|k| {
            let din = if k == 0 { 0 } else { ranks[k - 1] };
            let dout = if k + 1 == n { 0 } else { ranks[k] };
            r.terms[k].module.dim() == din + dout
        })
    }

    /// Minimises the complex by cancelling invertible corner entries.
    /// Returns the minimal complex and a chain section `min -> self`
    /// (one entry matrix per degree of the minimal complex).
    pub fn minimize(&self) -> (ProjComplex, Vec<AlgMat>) {
        let alg = &self.alg;
        let mut terms = self.terms.clone();
        let mut diffs = self.diffs.clone();
        // section[k]: term_min[k] -> term_orig[k], maintained as composite
        let mut section: Vec<AlgMat> = terms
            .iter()
            .map(|cl| {
                let mut m = AlgMat::zero(cl.clone(), cl.clone());
                for (i, &c) in cl.iter().enumerate() {
                    m.entries[i][i] = alg.class_idempotent(c);
                }
                m
            })
            .collect();
        'outer: loop {
            for k in 0..diffs.len() {
                let d = &diffs[k];
                for s in 0..d.tgt_classes.len() {
                    for t in 0..d.src_classes.len() {
                        if d.src_classes[t] == d.tgt_classes[s] && alg.corner_unit(&d.entries[s][t])
                        {
                            cancel(alg, &mut terms, &mut diffs, &mut section, k, s, t);
                            continue 'outer;
                        }
                    }
                }
            }
            break;
        }
        let mut out = ProjComplex {
            alg: Arc::clone(alg),
            lo: self.lo,
            terms,
            diffs,
        };
        // trim empty ends, keeping the section aligned
        let mut sec = section;
        while let Some(first) = out.terms.first() {
            if first.is_empty() {
                out.terms.remove(0);
                if !out.diffs.is_empty() {
                    out.diffs.remove(0);
                }
                sec.remove(0);
                out.lo += 1;
            } else {
                break;
            }
        }
        while let Some(last) = out.terms.last() {
            if last.is_empty() {
                out.terms.pop();
                out.diffs.pop();
                sec.pop();
            } else {
                break;
            }
        }
        if out.terms.is_empty() {
            out.lo = 0;
            out.diffs.clear();
        }
        debug_assert!(out.is_minimal());
        debug_assert!(out.verify_dd().is_ok());
        (out, sec)
    }
}

/// One Gaussian cancellation at entry (s, t) of diffs[k].
fn cancel(
    alg: &Arc<BasedAlgebra>,
    terms: &mut [Vec<usize>],
    diffs: &mut [AlgMat],
    section: &mut [AlgMat],
    k: usize,
    s: usize,
    t: usize,
) {
    let c = diffs[k].src_classes[t];
    let x = diffs[k].entries[s][t].clone();
    let xinv = alg.corner_inverse(&x, c);
    let d = &diffs[k];
    let nsrc = d.src_classes.len();
    let ntgt = d.tgt_classes.len();
    // new middle differential on the remaining slots
    let mut nd = AlgMat::zero(
        d.src_classes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != t)
            .map(|(_, &c)| c)
            .collect(),
        d.tgt_classes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != s)
            .map(|(_, &c)| c)
            .collect(),
    );
    let mut si = 0;
    for s2 in 0..ntgt {
        if s2 == s {
            continue;
        }
        let mut ti = 0;
        for t2 in 0..nsrc {
            if t2 == t {
                continue;
            }
            // e' = e - delta x^{-1} gamma
            let mut e = d.entries[s2][t2].clone();
            let delta = &d.entries[s2][t];
            let gamma = &d.entries[s][t2];
            if !delta.is_empty() && !gamma.is_empty() {
                let corr = alg.mul_elems(delta, &alg.mul_elems(&xinv, gamma));
                e = crate::matrix::row_axpy(alg.field(), &e, &corr, alg.field().neg(1));
            }
            nd.entries[si][ti] = e;
            ti += 1;
        }
        si += 1;
    }
    // section at degree k: old section followed by the inclusion
    // x' -> (-phi^{-1} gamma x', x'); at k+1 the inclusion is (0, y').
    // Build the inclusion entry matrices.
    let old_src = diffs[k].src_classes.clone();
    let incl_k = {
        let kept: Vec<usize> =
            old_src.iter().enumerate().filter(|&(i, _)| i != t).map(|(_, &c)| c).collect();
        let mut m = AlgMat::zero(kept.clone(), old_src.clone());
        let mut ti = 0;
        for t2 in 0..nsrc {
            if t2 == t {
                continue;
            }
            m.entries[t2][ti] = alg.class_idempotent(kept[ti]);
            // component into the cancelled slot: -x^{-1} gamma
            let gamma = &diffs[k].entries[s][t2];
            if !gamma.is_empty() {
                let corr = alg.mul_elems(&xinv, gamma);
                m.entries[t][ti] = crate::matrix::row_axpy(
                    alg.field(),
                    &Vec::new(),
                    &corr,
                    alg.field().neg(1),
                );
            }
            ti += 1;
        }
        m
    };
    let old_tgt = diffs[k].tgt_classes.clone();
    let incl_k1 = {
        let kept: Vec<usize> =
            old_tgt.iter().enumerate().filter(|&(i, _)| i != s).map(|(_, &c)| c).collect();
        let mut m = AlgMat::zero(kept.clone(), old_tgt.clone());
        let mut si2 = 0;
        for s2 in 0..ntgt {
            if s2 == s {
                continue;
            }
            m.entries[s2][si2] = alg.class_idempotent(kept[si2]);
            si2 += 1;
        }
        m
    };
    section[k] = compose_section(alg, &incl_k, k, section);
    section[k + 1] = compose_section(alg, &incl_k1, k + 1, section);
    // adjacent differentials: drop the cancelled row/column
    if k > 0 {
        let prev = &diffs[k - 1];
        let mut np = AlgMat::zero(prev.src_classes.clone(), nd.src_classes.clone());
        let mut si2 = 0;
        for s2 in 0..prev.tgt_classes.len() {
            if s2 == t {
                continue;
            }
            np.entries[si2] = prev.entries[s2].clone();
            si2 += 1;
        }
        diffs[k - 1] = np;
    }
    if k + 1 < diffs.len() {
        let next = &diffs[k + 1];
        let mut nn = AlgMat::zero(nd.tgt_classes.clone(), next.tgt_classes.clone());
        for (u, row) in next.entries.iter().enumerate() {
            let mut ti2 = 0;
            for t2 in 0..row.len() {
                if t2 == s {
                    continue;
                }
                nn.entries[u][ti2] = row[t2].clone();
                ti2 += 1;
            }
        }
        diffs[k + 1] = nn;
    }
    terms[k] = nd.src_classes.clone();
    terms[k + 1] = nd.tgt_classes.clone();
    diffs[k] = nd;
}

fn compose_section(alg: &Arc<BasedAlgebra>, incl: &AlgMat, deg: usize, section: &[AlgMat]) -> AlgMat {
    section[deg].after(alg, incl)
}

/// Homology of a realised complex of modules at a degree.
fn homology_of(
    terms: &[MRef],
    diffs: &[ModuleMap],
    lo: i64,
    deg: i64,
    alg: &Arc<BasedAlgebra>,
) -> MRef {
    let idx = deg - lo;
    if idx < 0 || idx as usize >= terms.len() {
        return Arc::new(Module::zero(alg));
    }
    let idx = idx as usize;
    let (ker, ker_incl) = if idx < diffs.len() {
        diffs[idx].kernel()
    } else {
        let id = ModuleMap::identity(&terms[idx]);
        id.kernel();
        (Arc::clone(&terms[idx]), ModuleMap::identity(&terms[idx]))
    };
    if idx == 0 {
        return ker;
    }
    // image of the previous differential, expressed inside the kernel
    let f = alg.field();
    let prev = &diffs[idx - 1];
    let mut spaces = Vec::with_capacity(alg.n_classes());
    for c in 0..alg.n_classes() {
        let mut ech = Echelon::new(ker.grading[c], f);
        let pb = &prev.blocks[c];
        let kb = &ker_incl.blocks[c];
        // rows of pb are in the span of kb's rows (d o d = 0)
        if pb.rows > 0 && kb.rows > 0 {
            let expressed = kb.solve_left(pb).expect("image lies in the kernel");
            for i in 0..expressed.rows {
                ech.insert(expressed.row_sparse(i));
            }
        }
        spaces.push(crate::matrix::QuotientSpace::new(ech));
    }
    quotient_from_spaces(&ker, spaces).0
}

/// A bounded complex of arbitrary modules.
#[derive(Clone)]
pub struct ModComplex {
    pub alg: Arc<BasedAlgebra>,
    pub lo: i64,
    pub terms: Vec<MRef>,
    pub diffs: Vec<ModuleMap>,
}

impl ModComplex {
    pub fn stalk(alg: &Arc<BasedAlgebra>, m: MRef, deg: i64) -> ModComplex {
        ModComplex { alg: Arc::clone(alg), lo: deg, terms: vec![m], diffs: Vec::new() }
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.terms.len() as i64 - 1
    }

    pub fn trim(mut self) -> ModComplex {
        while self.terms.first().map(|t| t.is_zero()).unwrap_or(false) {
            self.terms.remove(0);
            if !self.diffs.is_empty() {
                self.diffs.remove(0);
            }
            self.lo += 1;
        }
        while self.terms.last().map(|t| t.is_zero()).unwrap_or(false) {
            self.terms.pop();
            self.diffs.pop();
        }
        if self.terms.is_empty() {
            self.lo = 0;
        }
        self
    }

    pub fn homology(&self, deg: i64) -> MRef {
        homology_of(&self.terms, &self.diffs, self.lo, deg, &self.alg)
    }
}

/// Minimal projective resolution data of a module, as a complex placed in
/// degrees `top - len + 1 ..= top` with the augmentation at `top`.
pub struct ResolvedModule {
    pub complex: ProjComplex,
    pub realized: Realized,
    /// augmentation from the realised top term onto the module
    pub augmentation: ModuleMap,
}

/// Iterated minimal covers. Fails with `BudgetExhausted` if the syzygies do
/// not vanish within `budget` steps.
pub fn min_resolution(m: &MRef, top: i64, budget: usize) -> Result<ResolvedModule> {
    let alg = &m.algebra;
    let mut sums: Vec<ProjSum> = Vec::new();
    let mut maps: Vec<ModuleMap> = Vec::new(); // P_k -> P_{k-1} (or aug for k=0)
    let (p0, aug) = projective_cover(m);
    let mut current = aug.kernel();
    sums.push(p0);
    maps.push(aug.clone());
    let mut steps = 0usize;
    while !current.0.is_zero() {
        steps += 1;
        if steps > budget {
            return Err(Error::BudgetExhausted(budget));
        }
        let (pk, cover) = projective_cover(&current.0);
        let d = cover.then(&current.1); // P_k ->> Omega -> P_{k-1}
        let next = cover.kernel();
        sums.push(pk);
        maps.push(d);
        current = next;
    }
    // assemble the complex: sums[k] sits at degree top - k
    let n = sums.len();
    let mut terms = Vec::with_capacity(n);
    let mut diffs = Vec::with_capacity(n.saturating_sub(1));
    for k in (0..n).rev() {
        terms.push(sums[k].classes.clone());
    }
    for k in (1..n).rev() {
        // differential from degree (top - k) to (top - k + 1): maps[k]
        diffs.push(alg_mat_from_map(alg, &maps[k], &sums[k], &sums[k - 1]));
    }
    let complex = ProjComplex { alg: Arc::clone(alg), lo: top - n as i64 + 1, terms, diffs };
    debug_assert!(complex.verify_dd().is_ok());
    debug_assert!(complex.is_minimal());
    let realized_terms: Vec<ProjSum> = (0..n).rev().map(|k| sums[k].clone()).collect();
    let realized_diffs: Vec<ModuleMap> = (1..n).rev().map(|k| maps[k].clone()).collect();
    Ok(ResolvedModule {
        complex,
        realized: Realized { terms: realized_terms, diffs: realized_diffs },
        augmentation: maps[0].clone(),
    })
}

/// A projective resolution of a bounded complex of modules: a projective
/// complex quasi-isomorphic to `x`, together with the chain map realising
/// the quasi-isomorphism. The result is NOT minimised; callers compose with
/// [`ProjComplex::minimize`] as needed.
pub fn resolve_complex(x: &ModComplex, budget: usize) -> Result<(ProjComplex, Realized, Vec<ModuleMap>)> {
    let x = x.clone().trim();
    let alg = Arc::clone(&x.alg);
    if x.terms.is_empty() {
        let c = ProjComplex::empty(&alg);
        return Ok((c, Realized { terms: vec![], diffs: vec![] }, vec![]));
    }
    if x.terms.len() == 1 {
        let top = x.lo;
        let res = min_resolution(&x.terms[0], top, budget)?;
        let n = res.realized.terms.len();
        let zero = Arc::new(Module::zero(&alg));
        let mut fmaps: Vec<ModuleMap> = Vec::with_capacity(n);
        for k in 0..n {
            if k + 1 == n {
                fmaps.push(res.augmentation.clone());
            } else {
                // below the augmentation degree x is zero
                fmaps.push(ModuleMap::zero(&res.realized.terms[k].module, &zero));
            }
        }
        return Ok((res.complex, res.realized, fmaps));
    }
    // split off the top degree
    let h = x.hi();
    let top_mod = Arc::clone(x.terms.last().unwrap());
    let xp = ModComplex {
        alg: Arc::clone(&alg),
        lo: x.lo,
        terms: x.terms[..x.terms.len() - 1].to_vec(),
        diffs: x.diffs[..x.diffs.len() - 1].to_vec(),
    };
    let g_top = x.diffs.last().unwrap().clone(); // X^{h-1} -> X^h
    let (pc, pr, pf) = resolve_complex(&xp, budget)?;
    let rres = min_resolution(&top_mod, h, budget)?;
    // R[1]: shift the resolution down one degree, negating differentials

    // comparison lift: ghat: P' -> R[1] with eps o ghat = g o f'
    // built downward from degree h-1
    let pn = pc.terms.len();
    let rn = rres.realized.terms.len();
    let f = alg.field();
    let mut ghat: Vec<Option<ModuleMap>> = vec![None; pn];
    for k_deg in (pc.lo..=pc.hi()).rev() {
        let pk = (k_deg - pc.lo) as usize;
        // R[1]^k_deg = R^{k_deg + 1}
        let rk_deg = k_deg + 1;
        let rk = rk_deg - rres.complex.lo;
        if rk < 0 || rk as usize >= rn {
            // target is zero there; ghat component is zero
            continue;
        }
        let rk = rk as usize;
        let target = &rres.realized.terms[rk];
        if k_deg == h - 1 {
            // eps o ghat = g o f' at the top
            let w = pf[pk].then(&g_top);
            let ghat_k = lift_through(&pc, &pr, pk, &w, &rres.augmentation, target);
            ghat[pk] = Some(ghat_k);
        } else {
            // d_R[1] o ghat_k = ghat_{k+1} o d_P'
            let v = if pk + 1 < pn {
                match &ghat[pk + 1] {
                    Some(g_next) => Some(pr.diffs[pk].then(g_next)),
                    None => None,
                }
            } else {
                None
            };
            let d_r = if rk + 1 < rn { Some(&rres.realized.diffs[rk]) } else { None };
            match (v, d_r) {
                (Some(v), Some(dr)) => {
                    // solve ghat_k with ghat_k then (-dr) = v; sign of R[1]
                    let neg_dr = dr.scale(f.neg(1));
                    let ghat_k = lift_through(&pc, &pr, pk, &v, &neg_dr, target);
                    ghat[pk] = Some(ghat_k);
                }
                (Some(v), None) => {
                    assert!(v.is_zero(), "comparison lift fell off the resolution");
                }
                (None, _) => {}
            }
        }
    }
    // cocone(ghat): terms P'^k + R^k (classes concatenated), differential
    // (u, v) -> (d_P' u, -ghat u + d_R v)
    let lo = pc.lo.min(rres.complex.lo);
    let hi = pc.hi().max(rres.complex.hi());
    let mut terms: Vec<Vec<usize>> = Vec::new();
    let mut diffs: Vec<AlgMat> = Vec::new();
    let term_p = |deg: i64| -> Vec<usize> { pc.term(deg).to_vec() };
    let term_r = |deg: i64| -> Vec<usize> { rres.complex.term(deg).to_vec() };
    for deg in lo..=hi {
        let mut cl = term_p(deg);
        cl.extend(term_r(deg));
        terms.push(cl);
    }
    for deg in lo..hi {
        let src_p = term_p(deg);
        let src_r = term_r(deg);
        let tgt_p = term_p(deg + 1);
        let tgt_r = term_r(deg + 1);
        let mut srcs = src_p.clone();
        srcs.extend(src_r.clone());
        let mut tgts = tgt_p.clone();
        tgts.extend(tgt_r.clone());
        let mut m = AlgMat::zero(srcs, tgts);
        // d_P' block
        if !src_p.is_empty() && !tgt_p.is_empty() {
            let k = (deg - pc.lo) as usize;
            if k < pc.diffs.len() {
                for (s, row) in pc.diffs[k].entries.iter().enumerate() {
                    for (t, e) in row.iter().enumerate() {
                        m.entries[s][t] = e.clone();
                    }
                }
            }
        }
        // d_R block (positive sign in the cocone formula)
        if !src_r.is_empty() && !tgt_r.is_empty() {
            let k = (deg - rres.complex.lo) as usize;
            if k < rres.complex.diffs.len() {
                for (s, row) in rres.complex.diffs[k].entries.iter().enumerate() {
                    for (t, e) in row.iter().enumerate() {
                        m.entries[tgt_p.len() + s][src_p.len() + t] = e.clone();
                    }
                }
            }
        }
        // -ghat block: P'^deg -> R[1]^deg = R^{deg+1}
        if !src_p.is_empty() && !tgt_r.is_empty() {
            let pk = (deg - pc.lo) as usize;
            if let Some(g) = ghat.get(pk).and_then(|o| o.as_ref()) {
                let rk = (deg + 1 - rres.complex.lo) as usize;
                let gm = alg_mat_from_map(&alg, g, &pr.terms[pk], &rres.realized.terms[rk]);
                for (s, row) in gm.entries.iter().enumerate() {
                    for (t, e) in row.iter().enumerate() {
                        if !e.is_empty() {
                            m.entries[tgt_p.len() + s][t] =
                                crate::matrix::row_scale(f, e, f.neg(1));
                        }
                    }
                }
            }
        }
        diffs.push(m);
    }
    let complex = ProjComplex { alg: Arc::clone(&alg), lo, terms, diffs }.trim();
    debug_assert!(complex.verify_dd().is_ok());
    let realized = complex.realize();
    // quasi-isomorphism to x: f' on the P'-part, -eps on the R-part at h
    let mut fmaps = Vec::with_capacity(realized.terms.len());
    for (k, term) in realized.terms.iter().enumerate() {
        let deg = complex.lo + k as i64;
        let xi = deg - x.lo;
        let target: MRef = if xi >= 0 && (xi as usize) < x.terms.len() {
            Arc::clone(&x.terms[xi as usize])
        } else {
            Arc::new(Module::zero(&alg))
        };
        let mut fmap = ModuleMap::zero(&term.module, &target);
        let np = term_p(deg).len();
        for (t_idx, _) in term.classes.iter().enumerate() {
            // route each summand through f' or -eps
            if t_idx < np {
                let pk = (deg - pc.lo) as usize;
                let local = &pr.terms[pk];
                // embed local summand index into the combined term
                let comp = term.projs[t_idx].clone();
                let into_local = local.incls[t_idx].clone();
                let _ = into_local;
                // f' component: local summand t_idx of P'^deg
                let fprime = &pf[pk];
                let local_proj = &local.projs[t_idx];
                let _ = local_proj;
                // map: combined -> local summand part -> X
                let part = comp.then(&local.incls[t_idx]).then(fprime);
                fmap = fmap.add(&part);
            } else if deg == h {
                let rk = (deg - rres.complex.lo) as usize;
                let local = &rres.realized.terms[rk];
                let ri = t_idx - np;
                let part = term.projs[t_idx]
                    .then(&local.incls[ri])
                    .then(&rres.augmentation)
                    .scale(f.neg(1));
                fmap = fmap.add(&part);
            }
        }
        fmaps.push(fmap);
    }
    Ok((complex, realized, fmaps))
}

/// Lifts `w : P'_k -> X` through a surjective-or-exact comparison map
/// `eps : R -> X`, using that the source is a realised projective sum:
/// choose images of the unit generators solving `y * eps = w(unit)`.
fn lift_through(
    pc: &ProjComplex,
    pr: &Realized,
    pk: usize,
    w: &ModuleMap,
    eps: &ModuleMap,
    target: &ProjSum,
) -> ModuleMap {
    let alg = &pc.alg;
    let f = alg.field();
    let psum = &pr.terms[pk];
    let mut total = ModuleMap::zero(&psum.module, &target.module);
    for t in 0..psum.classes.len() {
        let mut unit = vec![0u64; psum.incls[t].src.dim()];
        unit[psum.units[t]] = 1;
        let img = psum.incls[t].then(w).apply(&unit);
        // solve y * eps = img with y in the target module coordinates
        let c = psum.classes[t];
        // build the full eps matrix restricted per class and solve blockwise
        let mut y_full: Vec<u64> = Vec::new();
        let mut off = 0usize;
        let mut consistent = true;
        for (cls, blk) in eps.blocks.iter().enumerate() {
            let g = eps.src.grading[cls];
            let seg = &img[offset_of(&eps.tgt, cls)..offset_of(&eps.tgt, cls) + eps.tgt.grading[cls]];
            if seg.iter().all(|&v| v == 0) {
                y_full.extend(std::iter::repeat(0).take(g));
            } else {
                match blk.transpose().solve(seg).expect("shape") {
                    Some(sol) => y_full.extend(sol),
                    None => {
                        consistent = false;
                        break;
                    }
                }
            }
            off += g;
            let _ = off;
        }
        assert!(consistent, "comparison lift target not in the image");
        // y_full is the image of the unit in the target sum; extend to a map
        let gen_map = map_from_unit_image(alg, psum, t, c, &target.module, &y_full);
        total = total.add(&gen_map);
        let _ = f;
    }
    total
}

fn offset_of(m: &MRef, c: usize) -> usize {
    m.grading[..c].iter().sum()
}

/// The module map `e_c A -> N` sending the unit of summand `t` to `img`
/// (coordinates of `N`), extended by `unit * b -> img * b`.
fn map_from_unit_image(
    alg: &Arc<BasedAlgebra>,
    psum: &ProjSum,
    t: usize,
    _c: usize,
    target: &MRef,
    img: &[u64],
) -> ModuleMap {
    let f = alg.field();
    let part = &psum.incls[t].src;
    let mut blocks: Vec<FpMat> = part
        .grading
        .iter()
        .zip(target.grading.iter())
        .map(|(&a, &b)| FpMat::zero(a, b, f))
        .collect();
    for (local, &bi) in psum.layouts[t].iter().enumerate() {
        let d = alg.tgt(bi);
        let local_in_block = local - part.offset(d);
        // img * b_i in the target
        let row = target.act_elem(&vec![(bi as u32, 1)], alg.src(bi), d);
        // img restricted to block src(bi)
        let s = alg.src(bi);
        let seg = &img[offset_of(target, s)..offset_of(target, s) + target.grading[s]];
        let out = row.apply_row(seg.to_vec().as_slice());
        for (j, &v) in out.iter().enumerate() {
            if v != 0 {
                blocks[d].set(local_in_block, j, v);
            }
        }
    }
    let part_map = ModuleMap {
        src: Arc::clone(&psum.incls[t].src),
        tgt: Arc::clone(target),
        blocks,
    };
    psum.projs[t].then(&part_map)
}

/// The Nakayama power complex `Q_{i-1}`, representing `nu^i(DA) = nu^{i+1}(A)`
/// when starting from `DA`, or `nu^i(P)` when starting from one projective.
pub struct NakayamaChain {
    pub ctx: Ctx,
    /// minimised complexes Q_0, Q_1, ...
    pub complexes: Vec<ProjComplex>,
    /// quasi-isomorphisms f_i from the realised Q_i to the nu-realisation of
    /// Q_{i-1} (for i = 0: to the starting module placed at degree 0)
    pub fmaps: Vec<Vec<ModuleMap>>,
}

/// Builds Q_0 .. Q_{steps-1} starting from the injectives of the given
/// classes (Q_0 resolves `+ I_c` at degree 0).
pub fn nakayama_chain(ctx: &Ctx, start_classes: &[usize], steps: usize, budget: usize) -> Result<NakayamaChain> {
    assert!(steps >= 1);
    let alg = &ctx.alg;
    let start = inj_sum(alg, start_classes);
    let x0 = ModComplex::stalk(alg, Arc::clone(&start.module), 0);
    let (q0, _r0, f0) = resolve_complex(&x0, budget)?;
    let (q0m, sec0) = q0.minimize();
    let f0m = transport_maps(&q0, &q0m, &sec0, &f0, &x0);
    let mut complexes = vec![q0m];
    let mut fmaps = vec![f0m];
    for _ in 1..steps {
        let prev = complexes.last().unwrap();
        let (nuterms, nudiffs) = prev.realize_nu();
        let nux = ModComplex {
            alg: Arc::clone(alg),
            lo: prev.lo,
            terms: nuterms.iter().map(|t| Arc::clone(&t.module)).collect(),
            diffs: nudiffs,
        };
        let (q, _r, fq) = resolve_complex(&nux, budget)?;
        let (qm, sec) = q.minimize();
        let fm = transport_maps(&q, &qm, &sec, &fq, &nux);
        complexes.push(qm);
        fmaps.push(fm);
    }
    Ok(NakayamaChain { ctx: ctx.clone(), complexes, fmaps })
}

/// Composes quasi-isomorphism maps with the minimisation section.
fn transport_maps(
    orig: &ProjComplex,
    minimized: &ProjComplex,
    section: &[AlgMat],
    fmaps: &[ModuleMap],
    x: &ModComplex,
) -> Vec<ModuleMap> {
    let alg = &orig.alg;
    let orig_r = orig.realize();
    let min_r = minimized.realize();
    let mut out = Vec::with_capacity(min_r.terms.len());
    for k in 0..min_r.terms.len() {
        let deg = minimized.lo + k as i64;
        let oi = (deg - orig.lo) as usize;
        // section is aligned with the minimised complex after trimming
        let sec_map = realize_alg_mat(alg, &section[k], &min_r.terms[k], &orig_r.terms[oi]);
        let target_deg = deg - x.lo;
        let composed = if target_deg >= 0 && (target_deg as usize) < x.terms.len() {
            sec_map.then(&fmaps[oi])
        } else {
            let zero = Arc::new(Module::zero(alg));
            ModuleMap::zero(&min_r.terms[k].module, &zero)
        };
        out.push(composed);
    }
    out
}

/// `nu^i(A)` as a minimised complex (the paper's Q_{i-1} for the full
/// regular module).
pub fn nakayama_power(ctx: &Ctx, i: usize, budget: usize) -> Result<ProjComplex> {
    assert!(i >= 1);
    let classes: Vec<usize> = (0..ctx.alg.n_classes()).collect();
    let chain = nakayama_chain(ctx, &classes, i, budget)?;
    Ok(chain.complexes.last().unwrap().clone())
}

/// Verdict of the object-level twisted Calabi-Yau check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CyObjectVerdict {
    Yes(Vec<usize>),
    No(String),
    Undecided(String),
}

/// Checks whether `nu^l(P_c)` is the stalk `P_{sigma(c)}[m]` for every
/// indecomposable projective, with one global permutation. This is the
/// object-level necessary condition; the replicated-algebra route is the
/// authoritative test.
pub fn twisted_cy_object_check(ctx: &Ctx, l: usize, m: usize, budget: usize) -> CyObjectVerdict {
    assert!(l >= 1);
    let nc = ctx.alg.n_classes();
    let mut sigma = vec![usize::MAX; nc];
    for c in 0..nc {
        let chain = match nakayama_chain(ctx, &[c], l, budget) {
            Ok(ch) => ch,
            Err(Error::BudgetExhausted(b)) => {
                return CyObjectVerdict::Undecided(format!("budget {b} exhausted at class {c}"))
            }
            Err(e) => return CyObjectVerdict::Undecided(e.to_string()),
        };
        let q = chain.complexes.last().unwrap();
        if q.terms.len() != 1 {
            return CyObjectVerdict::No(format!(
                "nu^{l}(P_{c}) has terms in {} degrees after minimisation",
                q.terms.len()
            ));
        }
        if q.lo != -(m as i64) {
            return CyObjectVerdict::No(format!(
                "nu^{l}(P_{c}) sits in degree {} rather than -{m}",
                q.lo
            ));
        }
        match q.terms[0].as_slice() {
            [d] => sigma[c] = *d,
            other => {
                return CyObjectVerdict::No(format!(
                    "nu^{l}(P_{c}) is a stalk of {} indecomposables",
                    other.len()
                ))
            }
        }
    }
    let mut seen = vec![false; nc];
    for &d in &sigma {
        if d == usize::MAX || seen[d] {
            return CyObjectVerdict::No("stalk classes do not form a permutation".into());
        }
        seen[d] = true;
    }
    CyObjectVerdict::Yes(sigma)
}

/// Is `nu^i(A)` a direct sum of stalk complexes for each i in the range?
/// An indecomposable projective's power is a stalk complex iff its homology
/// is concentrated in a single degree (the stalk module need not be
/// projective, so the minimised complex may still be long). Negative powers
/// are computed over the opposite algebra.
pub fn serre_formal_check(
    ctx: &Ctx,
    range: std::ops::RangeInclusive<i64>,
    budget: usize,
) -> Result<Vec<(i64, bool)>> {
    let mut out = Vec::new();
    let mut pos_cache: BTreeMap<usize, bool> = BTreeMap::new();
    let op_ctx = ctx.flipped();
    let check_side = |side: &Ctx, i: usize| -> Result<bool> {
        let nc = side.alg.n_classes();
        for c in 0..nc {
            let chain = nakayama_chain(side, &[c], i, budget)?;
            let q = chain.complexes.last().unwrap();
            let mut nonzero_degrees = 0;
            for deg in q.lo..=q.hi() {
                if !q.homology(deg).is_zero() {
                    nonzero_degrees += 1;
                }
            }
            if nonzero_degrees > 1 {
                return Ok(false);
            }
        }
        Ok(true)
    };
    for i in range {
        let val = if i == 0 {
            true
        } else if i > 0 {
            let i = i as usize;
            match pos_cache.get(&i) {
                Some(&v) => v,
                None => {
                    let v = check_side(ctx, i)?;
                    pos_cache.insert(i, v);
                    v
                }
            }
        } else {
            check_side(&op_ctx, (-i) as usize)?
        };
        out.push((i, val));
    }
    Ok(out)
}

/// The paper's double-complex row over the replicated algebra, assembled in
/// entry form, together with its total complex and augmentation data.
pub struct KeySequence {
    pub rep: Replicated,
    /// total complex (all projective terms), degrees <= -1
    pub total: ProjComplex,
    /// the stalk [DA]_l at total degree 0
    pub target: MRef,
    /// augmentation from the realised degree -1 term onto [DA]_l
    pub augmentation: ModuleMap,
}

/// Assembles the resolution of `[DA]_l` over `A^(l-1)` out of the Nakayama
/// chain of A: columns `[Q_{l-1}]_1, [nu Q_{l-2}, Q_{l-2}]_1, ...,
/// [nu Q_0, Q_0]_{l-1}` and the horizontal maps induced by the chain's
/// quasi-isomorphisms, with the augmentation `(f_0)_l` onto `[DA]_l`.
pub fn build_key_sequence(ctx: &Ctx, rep: &Replicated, budget: usize) -> Result<KeySequence> {
    let l = rep.m + 1;
    assert!(l >= 2, "key sequence needs l >= 2");
    assert!(Arc::ptr_eq(&rep.base, &ctx.alg));
    let alg = &ctx.alg;
    let b = &rep.alg;
    let f = b.field();
    let classes: Vec<usize> = (0..alg.n_classes()).collect();
    let chain = nakayama_chain(ctx, &classes, l, budget)?;
    // columns, horizontal position -i holds:
    //   i = l:  [Q_{l-1}]_1           -> projectives e_(1, c) B
    //   1 <= i <= l-1: [nu Q_{i-1}, Q_{i-1}]_{l-i} -> projectives e_(l-i+1, c) B
    // vertical structure of column i: the complex Q_{i-1} (for i = l: Q_{l-1})
    struct Column {
        h: i64,
        slot: usize, // realised projective slot: e_(slot, c) B
        complex: ProjComplex,
    }
    let mut columns: Vec<Column> = Vec::new();
    for i in 1..=l {
        let q = &chain.complexes[i - 1];
        let (h, slot) = if i == l { (-(l as i64), 1) } else { (-(i as i64), l - i + 1) };
        columns.push(Column { h, slot, complex: q.clone() });
    }
    // total degrees
    let lo = columns
        .iter()
        .map(|col| col.h + col.complex.lo)
        .min()
        .unwrap();
    let hi = -1i64;
    // term classes per total degree, remembering (column, vertical degree)
    let mut term_index: BTreeMap<i64, Vec<(usize, i64, usize)>> = BTreeMap::new();
    for deg in lo..=hi {
        let mut slots = Vec::new();
        for (ci, col) in columns.iter().enumerate() {
            let v = deg - col.h;
            for (j, _) in col.complex.term(v).iter().enumerate() {
                slots.push((ci, v, j));
            }
        }
        term_index.insert(deg, slots);
    }
    let class_of = |ci: usize, v: i64, j: usize| -> usize {
        let col = &columns[ci];
        let base_class = col.complex.term(v)[j];
        rep.class_of(col.slot, base_class)
    };
    let mut terms: Vec<Vec<usize>> = Vec::new();
    for deg in lo..=hi {
        terms.push(term_index[&deg].iter().map(|&(ci, v, j)| class_of(ci, v, j)).collect());
    }
    // horizontal component entries: from column ci to column ci-1 (toward
    // [DA]_l), concentrated on the Q-part slot, built from f-maps entries
    // realise the f-maps in entry form: f_i: Q_i -> nu(Q_{i-1}) components
    // as elements of I_{c'} e_c (dual vectors)
    let mut fentries: Vec<Vec<AlgMat>> = Vec::new(); // [i][vertical index]
    for i in 1..l {
        let q = &chain.complexes[i];
        let qr = q.realize();
        let prev = &chain.complexes[i - 1];
        let (nuterms, _) = prev.realize_nu();
        let mut per_deg = Vec::new();
        for k in 0..qr.terms.len() {
            let deg = q.lo + k as i64;
            let ti = deg - prev.lo;
            if ti < 0 || ti as usize >= nuterms.len() {
                per_deg.push(AlgMat::zero(q.terms[k].clone(), Vec::new()));
                continue;
            }
            let ti = ti as usize;
            let fmap = &chain.fmaps[i][k];
            // entry (s, t): element of I_{c'_s} e_{c_t}: dual vector coords
            let psrc = &qr.terms[k];
            let itgt = &nuterms[ti];
            let mut m = AlgMat::zero(psrc.classes.clone(), itgt.classes.clone());
            for (t, &c) in psrc.classes.iter().enumerate() {
                let mut unit = vec![0u64; psrc.incls[t].src.dim()];
                unit[psrc.units[t]] = 1;
                let img = psrc.incls[t].then(fmap).apply(&unit);
                for (s, _) in itgt.classes.iter().enumerate() {
                    let back = itgt.projs[s].apply(&img);
                    let mut elem: SparseRow = Vec::new();
                    for (pos, &v) in back.iter().enumerate() {
                        if v != 0 {
                            elem.push((itgt.layouts[s][pos] as u32, v));
                        }
                    }
                    elem.sort_unstable_by_key(|e| e.0);
                    // elem: dual coordinates u with src(u) = c
                    debug_assert!(elem.iter().all(|&(u, _)| alg.src(u as usize) == c));
                    m.entries[s][t] = elem;
                }
            }
            per_deg.push(m);
        }
        fentries.push(per_deg);
    }
    // assemble differentials of the total complex
    let mut diffs: Vec<AlgMat> = Vec::new();
    for deg in lo..hi {
        let srcs = &term_index[&deg];
        let tgts = &term_index[&(deg + 1)];
        let mut m = AlgMat::zero(
            srcs.iter().map(|&(ci, v, j)| class_of(ci, v, j)).collect(),
            tgts.iter().map(|&(ci, v, j)| class_of(ci, v, j)).collect(),
        );
        for (ti, &(sci, sv, sj)) in srcs.iter().enumerate() {
            for (si, &(tci, tv, tj)) in tgts.iter().enumerate() {
                if sci == tci && tv == sv + 1 {
                    // vertical differential: diagonal copy at the column slot
                    let col = &columns[sci];
                    let k = (sv - col.complex.lo) as usize;
                    if k < col.complex.diffs.len() {
                        let e = &col.complex.diffs[k].entries[tj][sj];
                        if !e.is_empty() {
                            m.entries[si][ti] = e
                                .iter()
                                .map(|&(idx, v)| (rep.diag_index(col.slot, idx as usize) as u32, v))
                                .collect();
                        }
                    }
                } else if tci + 1 == sci && tv == sv {
                    // horizontal: from column sci (Q_{sci}) to column
                    // sci - 1, via f entries; sign (-1)^v
                    let col_s = &columns[sci];
                    let col_t = &columns[tci];
                    // column sci holds Q_{i} with i = sci (0-based index into
                    // chain); its f-map targets nu(Q_{i-1}) realised in the
                    // target column's slot
                    let i = sci; // chain index of the source column's complex
                    let fent = &fentries[i - 1][(sv - col_s.complex.lo) as usize];
                    let e = &fent.entries[tj][sj];
                    if !e.is_empty() {
                        let sign = if sv.rem_euclid(2) == 0 { 1 } else { f.neg(1) };
                        // dual vector u at row slot of the target column + 1
                        let row_slot = col_t.slot;
                        debug_assert_eq!(col_s.slot + 1, col_t.slot);
                        let mut entry: SparseRow = e
                            .iter()
                            .map(|&(u, v)| {
                                (rep.sub_index(row_slot, u as usize) as u32, f.mul(v, sign))
                            })
                            .collect();
                        entry.sort_unstable_by_key(|x| x.0);
                        m.entries[si][ti] = entry;
                    }
                }
            }
        }
        diffs.push(m);
    }
    let total = ProjComplex { alg: Arc::clone(&rep.alg), lo, terms, diffs }.trim();
    total.verify_dd()?;
    // augmentation: (f_0)_l from the Q_0-part at slot l onto [DA]_l
    let op = Arc::new(alg.opposite());
    let da = Arc::new(crate::module::regular(&op).module.dual(alg));
    let target = Arc::new(make_stalk(rep, &da, l)?);
    let total_r = total.realize();
    let top_idx = total_r.terms.len() - 1;
    let top = &total_r.terms[top_idx];
    // the top total degree (-1) consists of the column i=1 at vertical 0:
    // glued projectives e_(l, c) B; the augmentation acts on the slot-l part
    // by f_0: Q_0^0 -> DA
    let f0 = &chain.fmaps[0];
    let q0 = &chain.complexes[0];
    let q0r = q0.realize();
    let q0_top = (0 - q0.lo) as usize;
    let f0_top = &f0[q0_top];
    // build the map: for each summand of the top term, its unit lives in
    // class (l, c); the [DA]_l coordinates in slot l are DA = dual basis.
    let mut aug = ModuleMap::zero(&top.module, &target);
    let slots_at_top = &term_index[&-1i64];
    for (t_idx, &(ci, v, j)) in slots_at_top.iter().enumerate() {
        // only the i=1 column contributes at degree -1 with v = 0
        if columns[ci].h != -1 || v != 0 {
            continue;
        }
        let _ = j;
        // image of the unit under f_0 (into DA), placed in slot l of [DA]_l
        let mut unit = vec![0u64; q0r.terms[q0_top].incls[j].src.dim()];
        unit[q0r.terms[q0_top].units[j]] = 1;
        let img = q0r.terms[q0_top].incls[j].then(f0_top).apply(&unit);
        // img: coordinates of DA (dual basis of A); target stalk coordinates
        // in slot l are the same dual basis, blocks by (l, src(u))
        let c = q0r.terms[q0_top].classes[j];
        let unit_image: Vec<u64> = {
            // assemble [DA]_l coordinates: target grading blocks are
            // (slot, class); slot l block for class d = dual coords with
            // src(u) = d, in DA's block order
            let mut out = vec![0u64; target.dim()];
            // DA's coordinate u sits in DA block src(u) at its position
            let mut per_class_pos = vec![0usize; alg.n_classes()];
            let mut coord_of = vec![0usize; alg.dim()];
            for d in 0..alg.n_classes() {
                let mut pos = 0;
                for u in 0..alg.dim() {
                    if alg.src(u) == d {
                        coord_of[u] = pos;
                        pos += 1;
                    }
                }
                per_class_pos[d] = pos;
            }
            let mut da_offsets = vec![0usize; alg.n_classes()];
            for d in 1..alg.n_classes() {
                da_offsets[d] = da_offsets[d - 1] + per_class_pos[d - 1];
            }
            for (u, &vimg) in img.iter().enumerate() {
                if vimg != 0 {
                    // u-th coordinate of DA realisation = dual vector of
                    // basis index found via block layout
                    // DA built as dual of regular(op): coordinate order is
                    // op-blocks = same (src-graded); recover basis index:
                    let mut found = None;
                    'srch: for d in 0..alg.n_classes() {
                        for w in 0..alg.dim() {
                            if alg.src(w) == d && da_offsets[d] + coord_of[w] == u {
                                found = Some((d, w));
                                break 'srch;
                            }
                        }
                    }
                    let (d, w) = found.unwrap();
                    let tgt_class = rep.class_of(l, d);
                    let tgt_off: usize = target.grading[..tgt_class].iter().sum();
                    out[tgt_off + coord_of[w]] = vimg;
                }
            }
            out
        };
        let gen_map = map_from_unit_image(&rep.alg, top, t_idx, rep.class_of(l, c), &target, &unit_image);
        aug = aug.add(&gen_map);
    }
    Ok(KeySequence { rep: rep.clone(), total, target, augmentation: aug })
}

impl KeySequence {
    /// Exactness of the augmented total complex in every degree.
    pub fn is_exact(&self) -> bool {
        let r = self.total.realize();
        let n = r.terms.len();
        if n == 0 {
            return false;
        }
        let ranks: Vec<usize> = r.diffs.iter().map(|d| d.rank()).collect();
        // exact at internal degrees
        for k in 0..n - 1 {
            let din = if k == 0 { 0 } else { ranks[k - 1] };
            if r.terms[k].module.dim() != din + ranks[k] {
                return false;
            }
        }
        // top degree: kernel of augmentation = image of last differential
        let top = n - 1;
        let din = if top == 0 { 0 } else { ranks[top - 1] };
        let aug_rank = self.augmentation.rank();
        // surjective onto [DA]_l and exact at the top term
        aug_rank == self.target.dim() && r.terms[top].module.dim() == din + aug_rank && {
            // d then aug = 0
            if top == 0 {
                true
            } else {
                r.diffs[top - 1].then(&self.augmentation).is_zero()
            }
        }
    }
}

/// Ext^i(M, N) dimension via a minimal projective resolution of M.
pub fn ext_dim(m: &MRef, n: &MRef, i: usize, budget: usize) -> Result<usize> {
    if i == 0 {
        return Ok(hom_dim(m, n));
    }
    let alg = &m.algebra;
    let f = alg.field();
    // resolution prefix long enough for degree i
    let mut sums: Vec<ProjSum> = Vec::new();
    let mut mats: Vec<AlgMat> = Vec::new();
    let (p0, aug) = projective_cover(m);
    let mut current = aug.kernel();
    sums.push(p0);
    for _k in 1..=i + 1 {
        if current.0.is_zero() {
            break;
        }
        let (pk, cover) = projective_cover(&current.0);
        let d = cover.then(&current.1);
        mats.push(alg_mat_from_map(alg, &d, &pk, sums.last().unwrap()));
        let next = cover.kernel();
        sums.push(pk);
        current = next;
        if sums.len() > budget + 2 {
            return Err(Error::BudgetExhausted(budget));
        }
    }
    if sums.len() <= i {
        return Ok(0); // resolution stopped before degree i
    }
    // Hom(P_k, N) = + N e_{c}: spaces indexed by summand classes
    let hom_space_dim =
        |ps: &ProjSum| -> usize { ps.classes.iter().map(|&c| n.grading[c]).sum() };
    let induced = |mat: &AlgMat| -> FpMat {
        // Hom(P_{k-1}, N) -> Hom(P_k, N): psi -> (t -> sum_s psi_s * x[s][t])
        let rows: usize = mat.tgt_classes.iter().map(|&c| n.grading[c]).sum();
        let cols: usize = mat.src_classes.iter().map(|&c| n.grading[c]).sum();
        let mut out = FpMat::zero(rows, cols, f);
        let mut roff = 0usize;
        for (s, &ds) in mat.tgt_classes.iter().enumerate() {
            let mut coff = 0usize;
            for (t, &ct) in mat.src_classes.iter().enumerate() {
                let x = &mat.entries[s][t];
                if !x.is_empty() {
                    let blk = n.act_elem(x, ds, ct);
                    for r in 0..blk.rows {
                        for (cc, v) in blk.row_sparse(r) {
                            let cur = out.get(roff + r, coff + cc as usize);
                            out.set(roff + r, coff + cc as usize, f.add(cur, v));
                        }
                    }
                }
                coff += n.grading[ct];
            }
            roff += n.grading[ds];
        }
        out
    };
    let d_i = induced(&mats[i - 1]); // Hom(P_{i-1}, N) -> Hom(P_i, N)
    let rank_in = d_i.rank();
    let dim_i = hom_space_dim(&sums[i]);
    let rank_out = if i < mats.len() {
        induced(&mats[i]).rank()
    } else {
        0
    };
    Ok(dim_i - rank_out - rank_in)
}

/// The Auslander-Reiten translate from a minimal projective presentation:
/// `tau M = ker(nu P_1 -> nu P_0)`.
pub fn tau(ctx: &Ctx, m: &MRef) -> MRef {
    let alg = &ctx.alg;
    if m.is_zero() {
        return Arc::clone(m);
    }
    let (p0, cover) = projective_cover(m);
    let (omega, incl) = cover.kernel();
    if omega.is_zero() {
        // projective module
        return Arc::new(Module::zero(alg));
    }
    let (p1, cover1) = projective_cover(&omega);
    let d = cover1.then(&incl);
    let mat = alg_mat_from_map(alg, &d, &p1, &p0);
    let i1 = inj_sum(alg, &p1.classes);
    let i0 = inj_sum(alg, &p0.classes);
    let nud = realize_alg_mat_nu(alg, &mat, &i1, &i0);
    nud.kernel().0
}

/// `tau^- M = coker(nu^- I_0 -> nu^- I_1)` from a minimal injective
/// copresentation.
pub fn tau_inverse(ctx: &Ctx, m: &MRef) -> MRef {
    let alg = &ctx.alg;
    if m.is_zero() {
        return Arc::clone(m);
    }
    let (i0, emb) = injective_envelope(m, &ctx.op);
    let (cok, proj) = emb.cokernel();
    if cok.is_zero() {
        return Arc::new(Module::zero(alg));
    }
    let (i1, emb1) = injective_envelope(&cok, &ctx.op);
    let delta = proj.then(&emb1);
    let mat = alg_mat_from_nu_map(alg, &delta, &i0, &i1);
    let p0 = proj_sum(alg, &i0.classes);
    let p1 = proj_sum(alg, &i1.classes);
    let nd = realize_alg_mat(alg, &mat, &p0, &p1);
    nd.cokernel().0
}

/// Higher translates: `tau_n = tau o Omega^{n-1}`, `tau_n^- = tau^- o
/// Omega^{-(n-1)}`.
pub fn tau_n(ctx: &Ctx, m: &MRef, n: usize) -> MRef {
    assert!(n >= 1);
    let mut cur = Arc::clone(m);
    for _ in 0..n - 1 {
        cur = crate::module::syzygy(&cur);
        if cur.is_zero() {
            return cur;
        }
    }
    tau(ctx, &cur)
}

pub fn tau_n_inverse(ctx: &Ctx, m: &MRef, n: usize) -> MRef {
    assert!(n >= 1);
    let mut cur = Arc::clone(m);
    for _ in 0..n - 1 {
        cur = crate::module::cosyzygy(&cur, &ctx.op);
        if cur.is_zero() {
            return cur;
        }
    }
    tau_inverse(ctx, &cur)
}

/// Object-level Nakayama on explicit projective sums.
pub fn nu_of_proj(ctx: &Ctx, m: &MRef) -> MRef {
    let (_, top_proj) = crate::module::top(m);
    let mut classes = Vec::new();
    for c in 0..ctx.alg.n_classes() {
        for _ in 0..top_proj.tgt.grading[c] {
            classes.push(c);
        }
    }
    Arc::clone(&inj_sum(&ctx.alg, &classes).module)
}

/// Object-level inverse Nakayama on explicit injective sums (soc read-off).
pub fn nu_inverse_of_inj(ctx: &Ctx, m: &MRef) -> MRef {
    let (soc, _) = crate::module::socle(m);
    let mut classes = Vec::new();
    for c in 0..ctx.alg.n_classes() {
        for _ in 0..soc.grading[c] {
            classes.push(c);
        }
    }
    Arc::clone(&proj_sum(&ctx.alg, &classes).module)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{replicate, scalar_algebra};
    use crate::fp::Fp;
    use crate::module::{injective, regular, simple};
    use crate::presentation::{build_algebra, parse};

    fn ctx(src: &str) -> Ctx {
        Ctx::new(Arc::new(build_algebra(&parse(src).unwrap(), 64).unwrap()))
    }

    fn loop_ctx() -> Ctx {
        ctx("algebra loop over GF(3)\nvertices: 1 2\narrows: a: 1 -> 1; b: 1 -> 2\nrelations: a*a")
    }

    fn a3lin_ctx() -> Ctx {
        ctx("algebra a3 over GF(3)\nvertices: 1 2 3\narrows: a: 1 -> 2; b: 2 -> 3")
    }

    fn a3non_ctx() -> Ctx {
        ctx("algebra a3n over GF(3)\nvertices: 1 2 3\narrows: a: 1 -> 2; b: 3 -> 2")
    }

    #[test]
    fn min_resolution_of_simple() {
        let cx = a3lin_ctx();
        let s1 = Arc::new(simple(&cx.alg, 0));
        let res = min_resolution(&s1, 0, 10).unwrap();
        // 0 -> P2 -> P1 -> S1 -> 0
        assert_eq!(res.complex.lo, -1);
        assert_eq!(res.complex.terms, vec![vec![1], vec![0]]);
        assert!(res.complex.is_minimal());
        // homology: only at degree 0, isomorphic to S1
        assert_eq!(res.complex.homology(0).dim(), 1);
        assert_eq!(res.complex.homology(-1).dim(), 0);
    }

    #[test]
    fn resolution_budget_error() {
        let cx = loop_ctx();
        let s1 = Arc::new(simple(&cx.alg, 0));
        let e = min_resolution(&s1, 0, 5).err().expect("budget must be exhausted");
        assert!(matches!(e, Error::BudgetExhausted(5)));
    }

    #[test]
    fn minimize_cone_of_identity() {
        // complex P1 --id--> P1 minimises to zero
        let cx = a3lin_ctx();
        let alg = &cx.alg;
        let mut m = AlgMat::zero(vec![0], vec![0]);
        m.entries[0][0] = alg.class_idempotent(0);
        let c = ProjComplex {
            alg: Arc::clone(alg),
            lo: 0,
            terms: vec![vec![0], vec![0]],
            diffs: vec![m],
        };
        assert!(c.is_acyclic());
        let (min, _) = c.minimize();
        assert!(min.is_empty());
    }

    #[test]
    fn minimize_preserves_homology() {
        // non-minimal resolution: add a cancelling P2 -> P2 pair
        let cx = a3lin_ctx();
        let alg = &cx.alg;
        let s1 = Arc::new(simple(&cx.alg, 0));
        let res = min_resolution(&s1, 0, 10).unwrap();
        let mut terms = res.complex.terms.clone();
        terms[0].push(1);
        terms[1].push(1);
        let mut d = AlgMat::zero(terms[0].clone(), terms[1].clone());
        d.entries[0][0] = res.complex.diffs[0].entries[0][0].clone();
        d.entries[1][1] = alg.class_idempotent(1);
        let fat = ProjComplex { alg: Arc::clone(alg), lo: -1, terms, diffs: vec![d] };
        fat.verify_dd().unwrap();
        let (min, _) = fat.minimize();
        for deg in -2..=1 {
            assert_eq!(
                min.homology(deg).dim(),
                fat.homology(deg).dim(),
                "homology changed at {deg}"
            );
        }
        assert_eq!(min.terms, res.complex.terms);
    }

    #[test]
    fn nakayama_power_semisimple_and_selfinjective() {
        let k = Ctx::new(Arc::new(scalar_algebra(Fp::new(3).unwrap())));
        for i in 1..=3 {
            let q = nakayama_power(&k, i, 10).unwrap();
            assert_eq!(q.terms.len(), 1);
            assert_eq!(q.lo, 0);
        }
        let dual = ctx("algebra d over GF(3)\nvertices: 1\narrows: x: 1 -> 1\nrelations: x*x");
        for i in 1..=3 {
            let q = nakayama_power(&dual, i, 10).unwrap();
            assert_eq!(q.terms.len(), 1, "selfinjective powers stay stalks");
            assert_eq!(q.lo, 0);
        }
    }

    #[test]
    fn a3_linear_is_twisted_2_4() {
        let cx = a3lin_ctx();
        // nu^4(A) = A[2]: every projective lands as a stalk in degree -2
        match twisted_cy_object_check(&cx, 4, 2, 20) {
            CyObjectVerdict::Yes(sigma) => {
                let mut s = sigma.clone();
                s.sort_unstable();
                assert_eq!(s, vec![0, 1, 2]);
            }
            other => panic!("expected yes, got {other:?}"),
        }
        // and it is NOT twisted (1,2)
        match twisted_cy_object_check(&cx, 2, 1, 20) {
            CyObjectVerdict::No(_) => {}
            other => panic!("expected no, got {other:?}"),
        }
    }

    #[test]
    fn a3_nonlinear_is_twisted_1_2() {
        let cx = a3non_ctx();
        match twisted_cy_object_check(&cx, 2, 1, 20) {
            CyObjectVerdict::Yes(sigma) => {
                // the twist swaps the two outer vertices
                assert_eq!(sigma[1], 1);
            }
            other => panic!("expected yes, got {other:?}"),
        }
    }

    #[test]
    fn loop_is_twisted_1_2_objectwise() {
        let cx = loop_ctx();
        match twisted_cy_object_check(&cx, 2, 1, 20) {
            CyObjectVerdict::Yes(_) => {}
            other => panic!("expected yes, got {other:?}"),
        }
    }

    #[test]
    fn serre_formal_ranges() {
        let k = Ctx::new(Arc::new(scalar_algebra(Fp::new(3).unwrap())));
        let res = serre_formal_check(&k, -3..=3, 10).unwrap();
        assert!(res.iter().all(|&(_, v)| v));
        let a2 = ctx("algebra a2 over GF(3)\nvertices: 1 2\narrows: a: 1 -> 2");
        let res = serre_formal_check(&a2, -4..=4, 20).unwrap();
        assert!(res.iter().all(|&(_, v)| v), "A2 is Serre-formal on [-4,4]: {res:?}");
    }

    #[test]
    fn key_sequence_scalar_l2() {
        let fpf = Fp::new(3).unwrap();
        let k = Arc::new(scalar_algebra(fpf));
        let cx = Ctx::new(Arc::clone(&k));
        let rep = replicate(&k, 1);
        let ks = build_key_sequence(&cx, &rep, 10).unwrap();
        assert!(ks.is_exact());
        // minimisation has length 1: [A]_1 -> [DA,A]_1 resolving [DA]_2
        let (min, _) = ks.total.minimize();
        assert_eq!(min.terms.len(), 2);
    }

    #[test]
    fn key_sequence_loop_l2() {
        let cx = loop_ctx();
        let rep = replicate(&cx.alg, 1);
        let ks = build_key_sequence(&cx, &rep, 20).unwrap();
        assert!(ks.is_exact(), "total complex of the key sequence must be exact");
        let (min, _) = ks.total.minimize();
        // idim A^(1) = 2: the minimal resolution of [DA]_2 has length 2
        assert_eq!(min.terms.len(), 3);
    }

    #[test]
    fn ext_computations() {
        let cx = a3lin_ctx();
        let s1 = Arc::new(simple(&cx.alg, 0));
        let s2 = Arc::new(simple(&cx.alg, 1));
        let s3 = Arc::new(simple(&cx.alg, 2));
        // arrow 1 -> 2 gives Ext^1(S1, S2) = 1; S2 -> S3 likewise; and the
        // projective S3 has no higher Ext
        assert_eq!(ext_dim(&s1, &s2, 1, 10).unwrap(), 1);
        assert_eq!(ext_dim(&s2, &s1, 1, 10).unwrap(), 0);
        assert_eq!(ext_dim(&s2, &s3, 1, 10).unwrap(), 1);
        assert_eq!(ext_dim(&s3, &s1, 1, 10).unwrap(), 0);
        assert_eq!(ext_dim(&s1, &s3, 2, 10).unwrap(), 0); // gldim 1
        let reg = regular(&cx.alg);
        for i in 1..=3 {
            assert_eq!(ext_dim(&reg.module, &s1, i, 10).unwrap(), 0);
        }
    }

    #[test]
    fn tau_basics() {
        let cx = a3non_ctx();
        // tau of projectives vanishes
        let reg = regular(&cx.alg);
        assert!(tau(&cx, &reg.module).is_zero());
        // tau^- of injectives vanishes
        let (i2, _) = injective(&cx.alg, 1);
        assert!(tau_inverse(&cx, &Arc::new(i2)).is_zero());
        // over the loop fixture: tau^-(A) = DA (Serre-type duality for the
        // 1/2-Calabi-Yau case)
        let lcx = loop_ctx();
        let lreg = regular(&lcx.alg);
        let t = tau_inverse(&lcx, &lreg.module);
        let da = Arc::new(regular(&lcx.flipped().alg).module.dual(&lcx.alg));
        assert!(crate::decompose::is_isomorphic(&t, &da).is_some());
        // and tau(DA) is projective
        let tda = tau(&lcx, &da);
        assert!(crate::module::is_projective(&tda));
    }
}
