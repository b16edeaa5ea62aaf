//! The quiver-and-relations presentation language and the path-basis builder.
//!
//! Grammar (comments start with `#`, whitespace is insignificant except
//! inside identifiers):
//!
//! ```text
//! algebra <ident> over GF(<p>)
//! vertices: <ident> ( <ident> )*
//! arrows: <ident> : <ident> -> <ident> ( ; <ident> : <ident> -> <ident> )*
//! relations: <lincomb> ( ; <lincomb> )*        # section optional
//! lincomb  := <term> ( (+|-) <term> )*
//! term     := [ <int> * ] <ident> ( * <ident> )*
//! ```
//!
//! Paths compose left to right: `a*b` means "a then b". Vertex names may be
//! numeric; arrow labels must contain a letter so that they cannot collide
//! with coefficients inside relation terms.

use crate::algebra::BasedAlgebra;
use crate::fp::Fp;
use crate::matrix::{row_axpy, Echelon, SparseRow};
use crate::{Error, Result};
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub label: String,
    pub src: usize,
    pub tgt: usize,
}

/// One summand of a relation: coefficient (canonical residue) and a
/// composable arrow path, read left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: u64,
    pub path: Vec<usize>,
}

pub type Relation = Vec<Term>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuiverPresentation {
    pub name: String,
    pub p: u64,
    pub vertices: Vec<String>,
    pub arrows: Vec<Arrow>,
    pub relations: Vec<Relation>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(u64),
    Colon,
    Semi,
    Star,
    Plus,
    Minus,
    Arrow,
    LParen,
    RParen,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Lexer> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let (l0, c0) = (line, col);
        let bump = |i: &mut usize, line: &mut usize, col: &mut usize| {
            if bytes[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        if c == '#' {
            while i < bytes.len() && bytes[i] != '\n' {
                bump(&mut i, &mut line, &mut col);
            }
            continue;
        }
        if c.is_whitespace() {
            bump(&mut i, &mut line, &mut col);
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                s.push(bytes[i]);
                bump(&mut i, &mut line, &mut col);
            }
            if s.chars().all(|ch| ch.is_ascii_digit()) {
                let n = s.parse::<u64>().map_err(|_| Error::Parse {
                    line: l0,
                    col: c0,
                    msg: format!("number `{s}` out of range"),
                })?;
                toks.push((Tok::Number(n), l0, c0));
            } else {
                // digit-led identifier such as `1a`: treat as identifier
                toks.push((Tok::Ident(s), l0, c0));
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                s.push(bytes[i]);
                bump(&mut i, &mut line, &mut col);
            }
            toks.push((Tok::Ident(s), l0, c0));
            continue;
        }
        match c {
            ':' => toks.push((Tok::Colon, l0, c0)),
            ';' => toks.push((Tok::Semi, l0, c0)),
            '*' => toks.push((Tok::Star, l0, c0)),
            '+' => toks.push((Tok::Plus, l0, c0)),
            '(' => toks.push((Tok::LParen, l0, c0)),
            ')' => toks.push((Tok::RParen, l0, c0)),
            '-' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '>' {
                    toks.push((Tok::Arrow, l0, c0));
                    bump(&mut i, &mut line, &mut col);
                } else {
                    toks.push((Tok::Minus, l0, c0));
                }
            }
            _ => {
                return Err(Error::Parse {
                    line: l0,
                    col: c0,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
        bump(&mut i, &mut line, &mut col);
    }
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.1, t.2))
            .unwrap_or_else(|| self.toks.last().map(|t| (t.1, t.2 + 1)).unwrap_or((1, 1)))
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Parse { line, col, msg: msg.into() })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected keyword `{kw}`")),
        }
    }

    fn name(&mut self, what: &str) -> Result<String> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            Some(Tok::Number(n)) => {
                self.pos += 1;
                Ok(n.to_string())
            }
            _ => self.err(format!("expected {what}")),
        }
    }
}

/// Parses a presentation from DSL source text.
pub fn parse(text: &str) -> Result<QuiverPresentation> {
    let mut lx = lex(text)?;
    lx.keyword("algebra")?;
    let name = match lx.next() {
        Some(Tok::Ident(s)) => s,
        _ => return lx.err("expected algebra name"),
    };
    lx.keyword("over")?;
    lx.keyword("GF")?;
    lx.expect(Tok::LParen, "`(`")?;
    let p = match lx.next() {
        Some(Tok::Number(n)) => n,
        _ => return lx.err("expected prime modulus"),
    };
    lx.expect(Tok::RParen, "`)`")?;
    let field = Fp::new(p)?;

    lx.keyword("vertices")?;
    lx.expect(Tok::Colon, "`:` after vertices")?;
    let mut vertices = Vec::new();
    let mut vindex: HashMap<String, usize> = HashMap::new();
    loop {
        match lx.peek().cloned() {
            Some(Tok::Ident(s)) if s != "arrows" && s != "relations" => {
                lx.pos += 1;
                if vindex.insert(s.clone(), vertices.len()).is_some() {
                    return lx.err(format!("duplicate vertex `{s}`"));
                }
                vertices.push(s);
            }
            Some(Tok::Number(n)) => {
                lx.pos += 1;
                let s = n.to_string();
                if vindex.insert(s.clone(), vertices.len()).is_some() {
                    return lx.err(format!("duplicate vertex `{s}`"));
                }
                vertices.push(s);
            }
            _ => break,
        }
    }
    if vertices.is_empty() {
        return lx.err("at least one vertex required");
    }

    let mut arrows: Vec<Arrow> = Vec::new();
    let mut aindex: HashMap<String, usize> = HashMap::new();
    if matches!(lx.peek(), Some(Tok::Ident(s)) if s == "arrows") {
        lx.pos += 1;
        lx.expect(Tok::Colon, "`:` after arrows")?;
        loop {
            let label = match lx.peek().cloned() {
                Some(Tok::Ident(s)) if s != "relations" => {
                    lx.pos += 1;
                    s
                }
                Some(Tok::Number(_)) => {
                    return lx.err("arrow labels must contain a letter");
                }
                _ => break,
            };
            lx.expect(Tok::Colon, "`:` in arrow declaration")?;
            let s = lx.name("source vertex")?;
            lx.expect(Tok::Arrow, "`->`")?;
            let t = lx.name("target vertex")?;
            let Some(&si) = vindex.get(&s) else {
                return lx.err(format!("undeclared vertex `{s}`"));
            };
            let Some(&ti) = vindex.get(&t) else {
                return lx.err(format!("undeclared vertex `{t}`"));
            };
            if aindex.insert(label.clone(), arrows.len()).is_some() {
                return lx.err(format!("duplicate arrow `{label}`"));
            }
            arrows.push(Arrow { label, src: si, tgt: ti });
            if lx.peek() == Some(&Tok::Semi) {
                lx.pos += 1;
            } else {
                break;
            }
        }
    }

    let mut relations: Vec<Relation> = Vec::new();
    if matches!(lx.peek(), Some(Tok::Ident(s)) if s == "relations") {
        lx.pos += 1;
        lx.expect(Tok::Colon, "`:` after relations")?;
        loop {
            let mut rel: Relation = Vec::new();
            let mut sign_neg = false;
            loop {
                // term := [ <int> * ] <ident> ( * <ident> )*
                let mut coeff = 1u64;
                if let Some(Tok::Number(n)) = lx.peek().cloned() {
                    lx.pos += 1;
                    lx.expect(Tok::Star, "`*` after coefficient")?;
                    coeff = n % p;
                }
                let mut path = Vec::new();
                loop {
                    match lx.peek().cloned() {
                        Some(Tok::Ident(s)) => {
                            lx.pos += 1;
                            let Some(&ai) = aindex.get(&s) else {
                                if vindex.contains_key(&s) {
                                    return lx.err(format!(
                                        "vertex `{s}` used as a path factor; relations need paths of length >= 2"
                                    ));
                                }
                                return lx.err(format!("undeclared arrow `{s}`"));
                            };
                            path.push(ai);
                        }
                        _ => return lx.err("expected arrow label"),
                    }
                    if lx.peek() == Some(&Tok::Star) {
                        lx.pos += 1;
                    } else {
                        break;
                    }
                }
                if path.len() < 2 {
                    return lx.err("relation terms must be paths of length >= 2");
                }
                for w in path.windows(2) {
                    if arrows[w[0]].tgt != arrows[w[1]].src {
                        return lx.err(format!(
                            "non-composable path: `{}` ends at {} but `{}` starts at {}",
                            arrows[w[0]].label,
                            vertices[arrows[w[0]].tgt],
                            arrows[w[1]].label,
                            vertices[arrows[w[1]].src]
                        ));
                    }
                }
                let c = if sign_neg { field.neg(coeff) } else { coeff };
                if c != 0 {
                    rel.push(Term { coeff: c, path });
                }
                match lx.peek() {
                    Some(Tok::Plus) => {
                        lx.pos += 1;
                        sign_neg = false;
                    }
                    Some(Tok::Minus) => {
                        lx.pos += 1;
                        sign_neg = true;
                    }
                    _ => break,
                }
            }
            // all terms of one relation must be parallel paths
            if let Some(first) = rel.first() {
                let s0 = arrows[first.path[0]].src;
                let t0 = arrows[*first.path.last().unwrap()].tgt;
                for t in &rel[1..] {
                    let s = arrows[t.path[0]].src;
                    let e = arrows[*t.path.last().unwrap()].tgt;
                    if s != s0 || e != t0 {
                        return lx.err("terms of one relation must share source and target");
                    }
                }
                relations.push(rel);
            }
            if lx.peek() == Some(&Tok::Semi) {
                lx.pos += 1;
            } else {
                break;
            }
        }
    }
    if lx.peek().is_some() {
        return lx.err("trailing input after presentation");
    }
    Ok(QuiverPresentation { name, p, vertices, arrows, relations })
}

/// Renders a presentation back to DSL source; `parse(serialize(p)) == p`.
pub fn serialize(p: &QuiverPresentation) -> String {
    let mut out = format!("algebra {} over GF({})\n", p.name, p.p);
    out.push_str("vertices:");
    for v in &p.vertices {
        out.push(' ');
        out.push_str(v);
    }
    out.push('\n');
    if !p.arrows.is_empty() {
        out.push_str("arrows: ");
        let arrs: Vec<String> = p
            .arrows
            .iter()
            .map(|a| format!("{}: {} -> {}", a.label, p.vertices[a.src], p.vertices[a.tgt]))
            .collect();
        out.push_str(&arrs.join("; "));
        out.push('\n');
    }
    if !p.relations.is_empty() {
        out.push_str("relations: ");
        let rels: Vec<String> = p
            .relations
            .iter()
            .map(|rel| {
                rel.iter()
                    .enumerate()
                    .map(|(k, t)| {
                        let path =
                            t.path.iter().map(|&a| p.arrows[a].label.clone()).collect::<Vec<_>>();
                        let body = path.join("*");
                        let lead = if t.coeff == 1 {
                            body
                        } else {
                            format!("{}*{}", t.coeff, body)
                        };
                        if k == 0 {
                            lead
                        } else {
                            format!("+ {lead}")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        out.push_str(&rels.join("; "));
        out.push('\n');
    }
    out
}

/// One graded layer of the path-basis construction.
struct Level {
    /// Tracked spanning paths of this length (extensions of lower normal forms).
    paths: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    /// Ideal piece in `paths` coordinates.
    ideal: Echelon,
    /// Indices into `paths` that survive as basis normal forms.
    normal: Vec<usize>,
}

impl Level {
    /// Coordinates over the normal paths after full ideal reduction.
    fn reduce(&self, row: SparseRow) -> SparseRow {
        self.ideal.reduce(row)
    }
}

/// Builds the bound quiver algebra `KQ/I` with its path normal-form basis,
/// vertex idempotents and radical (all paths of length >= 1).
///
/// The construction is degreewise: relations must be length-homogeneous
/// (every term of one relation has the same path length), which makes the
/// ideal graded and the per-length echelonization complete.
pub fn build_algebra(p: &QuiverPresentation, max_path_length: usize) -> Result<BasedAlgebra> {
    let field = Fp::new(p.p)?;
    for rel in &p.relations {
        let d0 = rel[0].path.len();
        if rel.iter().any(|t| t.path.len() != d0) {
            return Err(Error::Precondition(
                "relations mixing path lengths are not supported by the degreewise builder".into(),
            ));
        }
    }
    let nv = p.vertices.len();
    let arrows = &p.arrows;

    // level 0: trivial paths; level 1: arrows (admissible ideals start in rad^2)
    let mut levels: Vec<Level> = Vec::new();
    {
        let paths: Vec<Vec<usize>> = (0..nv).map(|v| vec![usize::MAX - v]).collect();
        // encode e_v as the singleton "pseudo-path" [usize::MAX - v]
        let index = paths.iter().cloned().enumerate().map(|(i, q)| (q, i)).collect();
        levels.push(Level {
            paths,
            index,
            ideal: Echelon::new(nv, field),
            normal: (0..nv).collect(),
        });
    }
    if !arrows.is_empty() {
        let paths: Vec<Vec<usize>> = (0..arrows.len()).map(|a| vec![a]).collect();
        let index = paths.iter().cloned().enumerate().map(|(i, q)| (q, i)).collect();
        levels.push(Level {
            paths,
            index,
            ideal: Echelon::new(arrows.len(), field),
            normal: (0..arrows.len()).collect(),
        });
    }

    let path_src = |q: &[usize]| -> usize {
        if q[0] >= usize::MAX - nv {
            usize::MAX - q[0]
        } else {
            arrows[q[0]].src
        }
    };
    let path_tgt = |q: &[usize]| -> usize {
        let last = *q.last().unwrap();
        if last >= usize::MAX - nv {
            usize::MAX - last
        } else {
            arrows[last].tgt
        }
    };

    // extend a normal-coordinate vector at level d by one arrow, landing in
    // tracked-path coordinates at level d+1 (no ideal reduction)
    let extend = |levels: &[Level],
                  d: usize,
                  coords: &SparseRow,
                  a: usize,
                  next_index: &HashMap<Vec<usize>, usize>|
     -> SparseRow {
        let lvl = &levels[d];
        let mut out: SparseRow = Vec::new();
        for &(ni, c) in coords {
            let q = &lvl.paths[lvl.normal[ni as usize]];
            if path_tgt(q) != arrows[a].src {
                continue;
            }
            let mut q2 = if q[0] >= usize::MAX - nv { Vec::new() } else { q.clone() };
            q2.push(a);
            if let Some(&k) = next_index.get(&q2) {
                out = row_axpy(field, &out, &vec![(k as u32, c)], 1);
            }
            // extensions of normal paths are tracked by construction
        }
        out
    };

    // normal-coordinate unit vectors per level, then grown degree by degree
    let mut done_at: Option<usize> = None;
    for d in 2..=max_path_length {
        if levels.len() < d {
            break; // no arrows at all
        }
        let prev = d - 1;
        // spanning paths: normal paths of length d-1 extended by arrows
        let mut paths: Vec<Vec<usize>> = Vec::new();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        for &npi in &levels[prev].normal {
            let q = &levels[prev].paths[npi];
            for (a, arr) in arrows.iter().enumerate() {
                if path_tgt(q) == arr.src {
                    let mut q2 = if q[0] >= usize::MAX - nv { Vec::new() } else { q.clone() };
                    q2.push(a);
                    if !index.contains_key(&q2) {
                        index.insert(q2.clone(), paths.len());
                        paths.push(q2);
                    }
                }
            }
        }
        let mut ideal = Echelon::new(paths.len(), field);
        // (a) ideal rows of the previous level, extended by each arrow
        let prev_rows: Vec<SparseRow> = levels[prev].ideal.rows.clone();
        for row in prev_rows {
            // express over normal coords first (reduce does nothing to ideal
            // rows; instead rewrite path coords via prefix normal forms)
            for (a, _) in arrows.iter().enumerate() {
                let mut out: SparseRow = Vec::new();
                for &(pi, c) in &row {
                    let q = &levels[prev].paths[pi as usize];
                    if path_tgt(q) != arrows[a].src {
                        continue;
                    }
                    // reduce the tracked path q to normal coordinates
                    let red = levels[prev].reduce(vec![(pi, 1)]);
                    // red is supported on non-pivot (normal) columns
                    for &(pj, cj) in &red {
                        let nq = &levels[prev].paths[pj as usize];
                        let mut q2 =
                            if nq[0] >= usize::MAX - nv { Vec::new() } else { nq.clone() };
                        q2.push(a);
                        if let Some(&k) = index.get(&q2) {
                            out = row_axpy(
                                field,
                                &out,
                                &vec![(k as u32, field.mul(c, cj))],
                                1,
                            );
                        }
                    }
                }
                ideal.insert(out);
            }
        }
        // (b) relations of degree <= d, left-multiplied by normal paths
        for rel in &p.relations {
            let dr = rel[0].path.len();
            if dr > d {
                continue;
            }
            let pre = d - dr;
            if levels.len() <= pre {
                continue;
            }
            for (pos, &npi) in levels[pre].normal.iter().enumerate() {
                let q = &levels[pre].paths[npi];
                let mut total: SparseRow = Vec::new();
                for term in rel {
                    if path_tgt(q) != arrows[term.path[0]].src {
                        continue;
                    }
                    // walk the term's arrows, reducing at every intermediate level
                    let mut coords: SparseRow = vec![(pos as u32, 1)];
                    let mut lvl = pre;
                    let mut ok = true;
                    for (step, &a) in term.path.iter().enumerate() {
                        let last = step + 1 == term.path.len();
                        if last {
                            // final step lands in this level's tracked paths
                            let mut out: SparseRow = Vec::new();
                            for &(ni, c) in &coords {
                                let nq = &levels[lvl].paths[levels[lvl].normal[ni as usize]];
                                if path_tgt(nq) != arrows[a].src {
                                    continue;
                                }
                                let mut q2 = if nq[0] >= usize::MAX - nv {
                                    Vec::new()
                                } else {
                                    nq.clone()
                                };
                                q2.push(a);
                                if let Some(&k) = index.get(&q2) {
                                    out = row_axpy(field, &out, &vec![(k as u32, c)], 1);
                                }
                            }
                            coords = out;
                        } else {
                            if levels.len() <= lvl + 1 {
                                ok = false;
                                break;
                            }
                            let nidx: HashMap<Vec<usize>, usize> = levels[lvl + 1]
                                .paths
                                .iter()
                                .cloned()
                                .enumerate()
                                .map(|(i, q)| (q, i))
                                .collect();
                            let raw = extend(&levels, lvl, &coords, a, &nidx);
                            // to normal coordinates of level lvl+1
                            let red = levels[lvl + 1].reduce(raw);
                            let mut norm_coords: SparseRow = Vec::new();
                            for &(pi, c) in &red {
                                let nni = levels[lvl + 1]
                                    .normal
                                    .iter()
                                    .position(|&x| x == pi as usize)
                                    .expect("residue supported on normal paths");
                                norm_coords.push((nni as u32, c));
                            }
                            norm_coords.sort_unstable_by_key(|e| e.0);
                            coords = norm_coords;
                            lvl += 1;
                        }
                        if coords.is_empty() {
                            break;
                        }
                    }
                    if ok && !coords.is_empty() {
                        total = row_axpy(field, &total, &coords, term.coeff);
                    }
                }
                ideal.insert(total);
            }
        }
        let pivot_set: Vec<u32> = ideal.pivots.clone();
        let normal: Vec<usize> =
            (0..paths.len()).filter(|&i| pivot_set.binary_search(&(i as u32)).is_err()).collect();
        let empty = normal.is_empty();
        levels.push(Level { paths, index, ideal, normal });
        if empty {
            done_at = Some(d);
            break;
        }
    }
    if done_at.is_none() && levels.len() > 1 && !levels.last().unwrap().normal.is_empty() {
        // ran out of budget with surviving paths of maximal length
        if levels.len() - 1 >= max_path_length {
            return Err(Error::RadicalNotNilpotent(max_path_length));
        }
    }

    // assemble the global basis: vertices, then normal paths by length
    let mut basis: Vec<(usize, usize)> = Vec::new(); // (level, normal position)
    let mut global: HashMap<(usize, usize), usize> = HashMap::new();
    for (d, lvl) in levels.iter().enumerate() {
        for (pos, &pi) in lvl.normal.iter().enumerate() {
            global.insert((d, pos), basis.len());
            basis.push((d, pi));
            let _ = pi;
        }
    }
    let n = basis.len();
    let label_of = |d: usize, pi: usize| -> String {
        let q = &levels[d].paths[pi];
        if q[0] >= usize::MAX - nv {
            format!("e_{}", p.vertices[usize::MAX - q[0]])
        } else {
            q.iter().map(|&a| arrows[a].label.clone()).collect::<Vec<_>>().join("*")
        }
    };

    let mut mult = vec![vec![Vec::new(); n]; n];
    for (gi, &(di, pii)) in basis.iter().enumerate() {
        let qi = &levels[di].paths[pii];
        for (gj, &(dj, pij)) in basis.iter().enumerate() {
            let qj = &levels[dj].paths[pij];
            if path_tgt(qi) != path_src(qj) {
                continue;
            }
            if dj == 0 {
                mult[gi][gj] = vec![(gi as u32, 1)];
                continue;
            }
            if di == 0 {
                mult[gi][gj] = vec![(gj as u32, 1)];
                continue;
            }
            // walk qj's arrows starting from qi's normal coordinates
            let posi = levels[di].normal.iter().position(|&x| x == pii).unwrap();
            let mut coords: SparseRow = vec![(posi as u32, 1)];
            let mut lvl = di;
            for &a in qj.iter() {
                if levels.len() <= lvl + 1 {
                    coords = Vec::new();
                    break;
                }
                let raw = {
                    let nidx = &levels[lvl + 1].index;
                    extend(&levels, lvl, &coords, a, nidx)
                };
                let red = levels[lvl + 1].reduce(raw);
                let mut norm_coords: SparseRow = Vec::new();
                for &(pi2, c) in &red {
                    let nni = levels[lvl + 1]
                        .normal
                        .iter()
                        .position(|&x| x == pi2 as usize)
                        .expect("residue supported on normal paths");
                    norm_coords.push((nni as u32, c));
                }
                norm_coords.sort_unstable_by_key(|e| e.0);
                coords = norm_coords;
                lvl += 1;
                if coords.is_empty() {
                    break;
                }
            }
            let mut row: SparseRow = coords
                .iter()
                .map(|&(ni, c)| (global[&(lvl, ni as usize)] as u32, c))
                .collect();
            row.sort_unstable_by_key(|e| e.0);
            mult[gi][gj] = row;
        }
    }

    let labels: Vec<String> = basis.iter().map(|&(d, pi)| label_of(d, pi)).collect();
    let src: Vec<usize> = basis.iter().map(|&(d, pi)| path_src(&levels[d].paths[pi])).collect();
    let tgt: Vec<usize> = basis.iter().map(|&(d, pi)| path_tgt(&levels[d].paths[pi])).collect();
    let idem: Vec<Vec<usize>> = (0..nv).map(|v| vec![v]).collect();
    let radical: Vec<usize> = (nv..n).collect();
    Ok(BasedAlgebra::new(
        field,
        labels,
        p.vertices.clone(),
        idem,
        src,
        tgt,
        radical,
        mult,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_two_vertex_arrow() {
        let p = parse("algebra t over GF(3)\nvertices: 1 2\narrows: a: 1 -> 2").unwrap();
        assert_eq!(p.vertices.len(), 2);
        assert_eq!(p.arrows.len(), 1);
        assert!(p.relations.is_empty());
    }

    #[test]
    fn parse_d4_radical_square() {
        let src = "algebra d4rad2 over GF(3)
vertices: 1 2 3 4
arrows: a: 1 -> 2; b: 2 -> 3; c: 2 -> 4
relations: a*b; a*c";
        let p = parse(src).unwrap();
        assert_eq!(p.arrows.len(), 3);
        assert_eq!(p.relations.len(), 2);
    }

    #[test]
    fn parse_loop_example() {
        let p = parse(
            "algebra loop over GF(3)\nvertices: 1 2\narrows: a: 1 -> 1; b: 1 -> 2\nrelations: a*a",
        )
        .unwrap();
        assert_eq!(p.relations.len(), 1);
        assert_eq!(p.relations[0][0].path, vec![0, 0]);
    }

    #[test]
    fn parse_errors() {
        assert!(parse("algebra x over GF(4)\nvertices: 1").is_err()); // not prime
        assert!(parse("vertices: 1").is_err());
        let e = parse("algebra x over GF(3)\nvertices: 1\narrows: a: 1 -> 2").unwrap_err();
        assert!(e.to_string().contains("undeclared vertex"));
        let e = parse(
            "algebra x over GF(3)\nvertices: 1 2\narrows: a: 1 -> 2\nrelations: a*z",
        )
        .unwrap_err();
        assert!(e.to_string().contains("undeclared arrow"));
        let e =
            parse("algebra x over GF(3)\nvertices: 1 2\narrows: a: 1 -> 2\nrelations: a").unwrap_err();
        assert!(e.to_string().contains("length >= 2"));
        // mixed endpoints
        let e = parse(
            "algebra x over GF(3)\nvertices: 1 2 3\narrows: a: 1 -> 2; b: 2 -> 3; c: 1 -> 1\nrelations: a*b + c*a",
        )
        .unwrap_err();
        assert!(e.to_string().contains("share source and target"));
        // non-composable
        let e = parse(
            "algebra x over GF(3)\nvertices: 1 2\narrows: a: 1 -> 2; b: 1 -> 2\nrelations: a*b",
        )
        .unwrap_err();
        assert!(e.to_string().contains("non-composable"));
    }

    #[test]
    fn comments_and_whitespace() {
        let p = parse(
            "# header\nalgebra t over GF(5) # trailing\nvertices: x y # more\narrows: f: x -> y",
        )
        .unwrap();
        assert_eq!(p.p, 5);
        assert_eq!(p.arrows[0].label, "f");
    }

    #[test]
    fn build_scalar() {
        let p = parse("algebra k over GF(3)\nvertices: 1").unwrap();
        let a = build_algebra(&p, 64).unwrap();
        assert_eq!(a.dim(), 1);
        assert!(a.verify().is_ok());
    }

    #[test]
    fn build_loop_dim5() {
        let p = parse(
            "algebra loop over GF(3)\nvertices: 1 2\narrows: a: 1 -> 1; b: 1 -> 2\nrelations: a*a",
        )
        .unwrap();
        let a = build_algebra(&p, 64).unwrap();
        assert_eq!(a.dim(), 5);
        let mut labels: Vec<&str> = (0..5).map(|i| a.label(i)).collect();
        labels.sort_unstable();
        assert_eq!(labels, vec!["a", "a*b", "b", "e_1", "e_2"]);
        assert!(a.verify().is_ok());
    }

    #[test]
    fn build_d4_dim7() {
        let p = parse(
            "algebra d4 over GF(3)\nvertices: 1 2 3 4\narrows: a: 1 -> 2; b: 2 -> 3; c: 2 -> 4\nrelations: a*b; a*c",
        )
        .unwrap();
        let a = build_algebra(&p, 64).unwrap();
        assert_eq!(a.dim(), 7);
        assert!(a.verify().is_ok());
    }

    #[test]
    fn non_nilpotent_without_relations() {
        let p =
            parse("algebra free over GF(3)\nvertices: 1\narrows: a: 1 -> 1").unwrap();
        let e = build_algebra(&p, 12).unwrap_err();
        assert!(matches!(e, Error::RadicalNotNilpotent(12)));
    }

    #[test]
    fn roundtrip_serialize() {
        for src in [
            "algebra k over GF(3)\nvertices: 1",
            "algebra loop over GF(3)\nvertices: 1 2\narrows: a: 1 -> 1; b: 1 -> 2\nrelations: a*a",
            "algebra d4 over GF(3)\nvertices: 1 2 3 4\narrows: a: 1 -> 2; b: 2 -> 3; c: 2 -> 4\nrelations: a*b; a*c",
            "algebra comm over GF(3)\nvertices: 1 2 3 4\narrows: a: 1 -> 2; b: 1 -> 3; c: 2 -> 4; d: 3 -> 4\nrelations: a*c - b*d; 2*a*c + b*d",
        ] {
            let p = parse(src).unwrap();
            let round = parse(&serialize(&p)).unwrap();
            assert_eq!(p, round);
        }
    }

    #[test]
    fn commutation_relation_build() {
        // square with commutativity: dim = 4 + 4 + 1
        let p = parse(
            "algebra sq over GF(3)\nvertices: 1 2 3 4\narrows: a: 1 -> 2; b: 1 -> 3; c: 2 -> 4; d: 3 -> 4\nrelations: a*c - b*d",
        )
        .unwrap();
        let a = build_algebra(&p, 64).unwrap();
        assert_eq!(a.dim(), 9);
        assert!(a.verify().is_ok());
    }

    #[test]
    fn a5_with_relation_dim14() {
        let p = parse(
            "algebra a5rel over GF(3)\nvertices: 1 2 3 4 5\narrows: a1: 1 -> 2; a2: 2 -> 3; a3: 3 -> 4; a4: 4 -> 5\nrelations: a1*a2*a3*a4",
        )
        .unwrap();
        let a = build_algebra(&p, 64).unwrap();
        assert_eq!(a.dim(), 14);
        assert!(a.verify().is_ok());
    }

    #[test]
    fn loop_replicated_presentation_matches_engine() {
        // the quiver presentation of A^(1) for the loop fixture, with its
        // commutation relation; the engine-built replicated algebra must
        // have the same invariants
        use crate::algebra::replicate;
        use std::sync::Arc;
        let base = parse(
            "algebra loop over GF(3)\nvertices: 1 2\narrows: a: 1 -> 1; b: 1 -> 2\nrelations: a*a",
        )
        .unwrap();
        let base = Arc::new(build_algebra(&base, 64).unwrap());
        let rep = replicate(&base, 1);

        let pres = parse(
            "algebra loopdup over GF(3)
vertices: 1 2 3 4
arrows: a1: 4 -> 1; a2: 3 -> 2; a3: 3 -> 3; a4: 2 -> 4; a5: 4 -> 4
relations: a4*a1; a3*a3; a5*a5; a2*a4*a5 - a3*a2*a4",
        )
        .unwrap();
        let dup = build_algebra(&pres, 64).unwrap();
        assert_eq!(dup.dim(), 15);
        assert!(dup.fingerprint(10).equivalent(&rep.alg.fingerprint(10)));
    }
}
