//! Operadic magmas and contracted operads over the terminal set: the terminal
//! operad, law and contraction checkers, the free contracted magma on a
//! collection with its quotient by the operad laws, maps out of it, and algebras.
//!
//! Everything is bounded: projections by a shape bound on edges, and free
//! multiplication cells by a stage depth. A configuration past either bound is
//! skipped by the checkers, never counted as a failure.

use rustc_hash::FxHashMap as HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::collections::{
    edges_ok, par_set, quotient_collection, terminal_collection, top_nodes, validate_contraction, CollectionMorphism,
    Congruence, Contraction, ParTriple, Shape, TCollection,
};
use crate::error::{domain, Error, Result};
use crate::globular::{CellRef, GlobularSet, Side};
use crate::monad::{flatten, multiply_flatten, set_candidates, split, FreeSet};
use crate::pasting::{labelings_within, DecoratedTree, Pasting};
use crate::report::Report;
use crate::term::Mode;

const LABELLING_LIMIT: usize = 2_000_000;

/// `(x, τ)`: an operation and the pasting of operations plugged into it; `τ.dim` is the level.
pub type MuKey = (usize, Pasting<usize>);

#[derive(Clone, Debug)]
pub struct OperadicMagma {
    pub coll: Arc<TCollection>,
    pub eta: Vec<usize>,
    pub mu: HashMap<MuKey, usize>,
    /// When set, `μ` grafts projections and the result is looked up by shape.
    graft: Option<Vec<HashMap<Shape, usize>>>,
    pub kappa: Contraction,
    pub stage: Option<Vec<Vec<usize>>>,
    pub depth: Option<usize>,
    pub shape_bound: usize,
}

impl OperadicMagma {
    pub fn max_dim(&self) -> usize {
        self.coll.max_dim()
    }

    pub fn mode(&self) -> Mode {
        self.coll.mode
    }

    pub fn stage_of(&self, c: CellRef) -> usize {
        self.stage.as_ref().map_or(0, |s| s[c.dim][c.idx])
    }

    fn label_stage(&self, tau: &Pasting<usize>) -> usize {
        tau.labels().into_iter().map(|(h, &l)| self.stage_of(CellRef::new(h, l))).max().unwrap_or(0)
    }

    pub fn name(&self, c: CellRef) -> &str {
        self.coll.carrier.name(c)
    }

    pub fn pasting_text(&self, tau: &Pasting<usize>) -> String {
        tau.to_text(&|h, &l| self.name(CellRef::new(h, l)).to_string())
    }

    /// The projection of `(x, τ)`: the grafting of the shapes inside `τ`.
    pub fn pair_proj(&self, tau: &Pasting<usize>) -> Result<Shape> {
        flatten(&tau.map(|h, &c| self.coll.proj[h][c].clone()))
    }

    pub fn mu(&self, x: usize, tau: &Pasting<usize>) -> Option<usize> {
        if let Some(index) = &self.graft {
            if tau.shape() != self.coll.proj[tau.dim][x] {
                return None;
            }
            return index[tau.dim].get(&self.pair_proj(tau).ok()?).copied();
        }
        self.mu.get(&(x, tau.clone())).copied()
    }

    /// Whether `μ(x, τ)` lies inside the magma's bounds and so must be defined.
    pub fn expects(&self, x: usize, tau: &Pasting<usize>) -> bool {
        let Ok(y) = self.pair_proj(tau) else { return false };
        y.edges() <= self.shape_bound
            && self.depth.is_none_or(|d| 1 + self.stage_of(CellRef::new(tau.dim, x)) + self.label_stage(tau) <= d)
    }

    /// The globe on `x`: the pasting of shape `η` labelled by `x` and its boundaries.
    pub fn globe(&self, x: CellRef) -> Pasting<usize> {
        let q = &self.coll.carrier;
        Pasting::globe(x.dim, |k, side| if k == x.dim { x.idx } else { q.iterated_boundary(x, x.dim - k, side).map_or(0, |c| c.idx) })
    }

    /// `π(x)` labelled by units.
    pub fn unit_labels(&self, x: CellRef) -> Pasting<usize> {
        self.coll.proj_of(x).map(|h, _| self.eta[h])
    }

    /// `μ(τ_g, ω_g)` at every gap `g` of `τ`.
    fn mu_each(&self, tau: &Pasting<usize>, omega: &Pasting<Pasting<usize>>) -> std::result::Result<Pasting<usize>, Miss> {
        let mut out = Vec::new();
        for ((_, &t), (_, w)) in tau.labels().into_iter().zip(omega.labels()) {
            match self.mu(t, w) {
                Some(v) => out.push(v),
                None if self.expects(t, w) => return Err(Miss::Undefined(t, w.clone())),
                None => return Err(Miss::Skip),
            }
        }
        Ok(tau.with_labels(out))
    }

    fn lookup(&self, x: usize, tau: &Pasting<usize>) -> std::result::Result<usize, Miss> {
        match self.mu(x, tau) {
            Some(v) => Ok(v),
            None if self.expects(x, tau) => Err(Miss::Undefined(x, tau.clone())),
            None => Err(Miss::Skip),
        }
    }

    /// Labellings `τ` of `π(x)` by cells of stage at most `max_stage` whose product with `x`
    /// lies within the depth and shape bounds. `restrict(h, l)` filters labels.
    fn pairs_over(
        &self,
        x: CellRef,
        max_stage: Option<usize>,
        restrict: &dyn Fn(usize, usize) -> bool,
    ) -> Result<Vec<Pasting<usize>>> {
        let c = &self.coll;
        // labels past the depth give products outside the magma, so they are not enumerated
        let room = match self.depth {
            Some(d) if d < 1 + self.stage_of(x) => return Ok(Vec::new()),
            Some(d) => Some(d - 1 - self.stage_of(x)),
            None => None,
        };
        let cap = match (max_stage, room) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let cands = set_candidates(&c.carrier);
        let top = top_nodes(c);
        let cost = |h: usize, l: usize| {
            if cap.is_some_and(|m| self.stage_of(CellRef::new(h, l)) > m) || !restrict(h, l) {
                usize::MAX
            } else if h == x.dim {
                top[h][l]
            } else {
                0
            }
        };
        let mut out = Vec::new();
        for tau in labelings_within(c.proj_of(x), &cands, &cost, self.shape_bound, LABELLING_LIMIT)? {
            if self.pair_proj(&tau)?.edges() <= self.shape_bound {
                out.push(tau);
            }
        }
        Ok(out)
    }

    fn cells_to(&self, max_stage: Option<usize>) -> Vec<CellRef> {
        self.coll.cells().filter(|&c| max_stage.is_none_or(|m| self.stage_of(c) <= m)).collect()
    }
}

enum Miss {
    Undefined(usize, Pasting<usize>),
    Skip,
}

fn note_miss(m: &OperadicMagma, rep: &mut Report, miss: Miss) {
    match miss {
        Miss::Undefined(x, tau) => rep.push(
            "undefined",
            format!("μ is undefined on ({}, {}) inside the bound", m.name(CellRef::new(tau.dim, x)), m.pasting_text(&tau)),
        ),
        Miss::Skip => rep.skipped += 1,
    }
}

/// The bounded free (involutive) ω-category on one point as an operad: `μ` grafts,
/// `η` is the unit tree, `κ(y⁺, y, y⁻) = y`.
pub fn terminal_operad(max_dim: usize, bound: usize, mode: Mode) -> Result<OperadicMagma> {
    if bound < max_dim {
        return domain(format!("the unit tree of dimension {max_dim} needs a bound of at least {max_dim}"));
    }
    let coll = Arc::new(terminal_collection(max_dim, bound, mode)?);
    let index: Vec<HashMap<Shape, usize>> =
        coll.proj.iter().map(|v| v.iter().enumerate().map(|(i, y)| (y.clone(), i)).collect()).collect();
    let eta = (0..=max_dim).map(|d| index[d][&DecoratedTree::unit(d)]).collect();
    let mut kappa = Contraction::new();
    for d in 1..=max_dim {
        for t in par_set(&coll, d, bound)? {
            let k = index[d][&t.shape];
            kappa.insert(t, k);
        }
    }
    Ok(OperadicMagma { coll, eta, mu: HashMap::default(), graft: Some(index), kappa, stage: None, depth: None, shape_bound: bound })
}

/// Unit laws on every cell and associativity on every nesting, with cells of stage at
/// most `max_stage`. Kinds: `left-unit`, `right-unit`, `associativity`, `undefined`.
pub fn check_operad_laws(m: &OperadicMagma, max_stage: Option<usize>) -> Result<Report> {
    let mut rep = Report::default();
    for x in m.cells_to(max_stage) {
        let d = x.dim;
        rep.checked += 1;
        match m.lookup(m.eta[d], &m.globe(x)) {
            Ok(v) if v == x.idx => {}
            Ok(v) => rep.push("left-unit", format!("μ(η, {}) = {}", m.name(x), m.name(CellRef::new(d, v)))),
            Err(miss) => note_miss(m, &mut rep, miss),
        }
        match m.lookup(x.idx, &m.unit_labels(x)) {
            Ok(v) if v == x.idx => {}
            Ok(v) => rep.push("right-unit", format!("μ({}, η…) = {}", m.name(x), m.name(CellRef::new(d, v)))),
            Err(miss) => note_miss(m, &mut rep, miss),
        }
    }
    let mut outer: HashMap<CellRef, Vec<Pasting<usize>>> = HashMap::default();
    for x in m.cells_to(max_stage) {
        for tau in m.pairs_over(x, max_stage, &|_, _| true)? {
            let z = match m.lookup(x.idx, &tau) {
                Ok(z) => CellRef::new(x.dim, z),
                Err(miss) => {
                    note_miss(m, &mut rep, miss);
                    continue;
                }
            };
            let shapes = tau.map(|h, &c| m.coll.proj[h][c].clone());
            if !outer.contains_key(&z) {
                outer.insert(z, m.pairs_over(z, max_stage, &|_, _| true)?);
            }
            for sigma in &outer[&z] {
                rep.checked += 1;
                let lhs = match m.lookup(z.idx, sigma) {
                    Ok(v) => v,
                    Err(miss) => {
                        note_miss(m, &mut rep, miss);
                        continue;
                    }
                };
                let omega = split(&shapes, sigma)?;
                let rhs = match m.mu_each(&tau, &omega).and_then(|w| m.lookup(x.idx, &w)) {
                    Ok(v) => v,
                    Err(miss) => {
                        note_miss(m, &mut rep, miss);
                        continue;
                    }
                };
                if lhs != rhs {
                    rep.push(
                        "associativity",
                        format!(
                            "μ(μ({}, {}), {}) = {} but the regrouped product is {}",
                            m.name(x),
                            m.pasting_text(&tau),
                            m.pasting_text(sigma),
                            m.name(CellRef::new(x.dim, lhs)),
                            m.name(CellRef::new(x.dim, rhs))
                        ),
                    );
                }
            }
        }
    }
    Ok(rep)
}

/// The contraction equations, then the two compatibility diagrams: `κ(η, unit, η) = η`
/// (kind `d1`), and `μ(κ(x⁺, y, x⁻), σ) = κ(μ(x⁺, tσ), π σ, μ(x⁻, sσ))` whenever the
/// top-dimensional labels of `σ` are contraction cells (kind `d2`).
pub fn check_operadic_contraction(m: &OperadicMagma, max_stage: Option<usize>) -> Result<Report> {
    let mut rep = validate_contraction(&m.coll, &m.kappa, m.shape_bound)?;
    let kappa_image: Vec<Vec<bool>> = (0..=m.max_dim())
        .map(|d| {
            let mut v = vec![false; m.coll.count(d)];
            for (t, &k) in &m.kappa {
                if t.dim == d {
                    v[k] = true;
                }
            }
            v
        })
        .collect();
    for n in 1..=m.max_dim() {
        rep.checked += 1;
        let t = ParTriple { dim: n, plus: m.eta[n - 1], shape: DecoratedTree::unit(n), minus: m.eta[n - 1] };
        match m.kappa.get(&t) {
            Some(&k) if k == m.eta[n] => {}
            Some(&k) => rep.push("d1", format!("κ(η, unit, η) = {} at dimension {n}", m.name(CellRef::new(n, k)))),
            None => rep.push("d1", format!("κ(η, unit, η) is undefined at dimension {n}")),
        }
        let mut triples: Vec<(&ParTriple, &usize)> = m.kappa.iter().filter(|(t, _)| t.dim == n).collect();
        triples.sort();
        for (t, &k) in triples {
            let below = |i| m.stage_of(CellRef::new(n - 1, i));
            if max_stage.is_some_and(|s| below(t.plus) > s || below(t.minus) > s) {
                continue;
            }
            let kc = CellRef::new(n, k);
            let only_kappa = |h: usize, l: usize| h != n || kappa_image[n][l];
            for sigma in m.pairs_over(kc, max_stage, &only_kappa)? {
                rep.checked += 1;
                let lhs = match m.lookup(k, &sigma) {
                    Ok(v) => v,
                    Err(miss) => {
                        note_miss(m, &mut rep, miss);
                        continue;
                    }
                };
                let (st, ss) = (sigma.boundary(Side::Target)?, sigma.boundary(Side::Source)?);
                let ends = m.lookup(t.plus, &st).and_then(|p| m.lookup(t.minus, &ss).map(|q| (p, q)));
                let (plus, minus) = match ends {
                    Ok(pq) => pq,
                    Err(miss) => {
                        note_miss(m, &mut rep, miss);
                        continue;
                    }
                };
                let shape = m.pair_proj(&sigma)?;
                let t2 = ParTriple { dim: n, plus, shape, minus };
                match m.kappa.get(&t2) {
                    Some(&v) if v == lhs => {}
                    Some(&v) => rep.push(
                        "d2",
                        format!(
                            "μ(κ{}, {}) = {} but κ of the composite triple is {}",
                            crate::collections::triple_text(&m.coll, t),
                            m.pasting_text(&sigma),
                            m.name(CellRef::new(n, lhs)),
                            m.name(CellRef::new(n, v))
                        ),
                    ),
                    None if edges_ok(&t2.shape, Some(m.shape_bound)) => {
                        rep.push("d2", format!("κ is undefined on the composite of {}", crate::collections::triple_text(&m.coll, t)))
                    }
                    None => rep.skipped += 1,
                }
            }
        }
    }
    Ok(rep)
}

/// A cell of the free contracted operadic magma.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MCell {
    Gen(usize),
    Eta,
    Kappa(ParTriple),
    Mu(usize, Pasting<usize>),
}

#[derive(Clone, Debug)]
pub struct FreeMagma {
    pub source: Arc<TCollection>,
    pub magma: OperadicMagma,
    pub cells: Vec<Vec<MCell>>,
    /// The generator inclusion.
    pub xi: Vec<Vec<usize>>,
    /// Multiplication cells left out because a boundary product fell past the bounds.
    pub dropped: usize,
}

#[derive(Default)]
struct Level {
    cells: Vec<MCell>,
    names: Vec<String>,
    stage: Vec<usize>,
    proj: Vec<Shape>,
    src: Vec<usize>,
    tgt: Vec<usize>,
    index: HashMap<MCell, usize>,
}

impl Level {
    fn push(&mut self, cell: MCell, name: String, stage: usize, proj: Shape, bd: Option<(usize, usize)>) -> usize {
        let i = self.cells.len();
        self.index.insert(cell.clone(), i);
        self.cells.push(cell);
        self.names.push(name);
        self.stage.push(stage);
        self.proj.push(proj);
        if let Some((s, t)) = bd {
            self.src.push(s);
            self.tgt.push(t);
        }
        i
    }
}

fn snapshot(levels: &[Level], mode: Mode, name: &str) -> Result<TCollection> {
    let n = levels.len() - 1;
    let set = GlobularSet::from_tables(
        n,
        levels.iter().map(|l| l.names.clone()).collect(),
        levels.iter().map(|l| l.src.clone()).collect(),
        levels.iter().map(|l| l.tgt.clone()).collect(),
    )?;
    TCollection::new(name, mode, Arc::new(set), levels.iter().map(|l| l.proj.clone()).collect())
}

/// The free contracted operadic magma on `q`: generators, a unit and contraction cells
/// at stage 0, then formal products `μ(x, τ)` at stage `1 + stage(x) + max stage(τ)`, up
/// to `depth`, with projections within `shape_bound` edges. At level 0 products with the
/// unit are absorbed.
pub fn free_operadic_magma(q: &Arc<TCollection>, depth: usize, shape_bound: usize) -> Result<FreeMagma> {
    let n_max = q.max_dim();
    let mode = q.mode;
    let mut levels: Vec<Level> = Vec::new();
    let mut mu: HashMap<MuKey, usize> = HashMap::default();
    let mut kappa = Contraction::new();
    let mut xi: Vec<Vec<usize>> = Vec::new();
    let mut eta = Vec::new();
    let mut dropped = 0;
    let name = format!("M({})", q.name);
    for n in 0..=n_max {
        let mut lv = Level::default();
        let gens: Vec<usize> = (0..q.count(n))
            .map(|i| {
                let c = CellRef::new(n, i);
                let bd = (n > 0).then(|| (xi[n - 1][q.src(c)], xi[n - 1][q.tgt(c)]));
                lv.push(MCell::Gen(i), q.carrier.name(c).to_string(), 0, q.proj_of(c).clone(), bd)
            })
            .collect();
        xi.push(gens);
        let e = lv.push(MCell::Eta, format!("η{n}"), 0, DecoratedTree::unit(n), (n > 0).then(|| (eta[n - 1], eta[n - 1])));
        eta.push(e);
        if n > 0 {
            let below = snapshot(&levels, mode, &name)?;
            for t in par_set(&below, n, shape_bound)? {
                let st = levels[n - 1].stage[t.plus].max(levels[n - 1].stage[t.minus]);
                let nm = format!("κ{}", crate::collections::triple_text(&below, &t));
                let (s, tg) = (t.minus, t.plus);
                let k = lv.push(MCell::Kappa(t.clone()), nm, st, t.shape.clone(), Some((s, tg)));
                kappa.insert(t, k);
            }
        }
        levels.push(lv);
        if n == 0 {
            // formal products of two non-unit points; products with the unit are absorbed
            for s in 1..=depth {
                let lv = &levels[0];
                let count = lv.cells.len();
                let mut fresh = Vec::new();
                for x in 0..count {
                    for y in 0..count {
                        if x == e || y == e || 1 + lv.stage[x] + lv.stage[y] != s {
                            continue;
                        }
                        let tau = Pasting::globe(0, |_, _| y);
                        if !mu.contains_key(&(x, tau.clone())) {
                            fresh.push((x, tau, format!("μ({} {})", lv.names[x], lv.names[y])));
                        }
                    }
                }
                for (x, tau, nm) in fresh {
                    let i = levels[0].push(MCell::Mu(x, tau.clone()), nm, s, DecoratedTree::unit(0), None);
                    mu.insert((x, tau), i);
                }
            }
            for x in 0..levels[0].cells.len() {
                mu.insert((e, Pasting::globe(0, |_, _| x)), x);
                mu.insert((x, Pasting::globe(0, |_, _| e)), x);
            }
            continue;
        }
        for s in 1..=depth {
            let snap = snapshot(&levels, mode, &name)?;
            let cands = set_candidates(&snap.carrier);
            let top = top_nodes(&snap);
            let mut fresh = Vec::new();
            for x in 0..levels[n].cells.len() {
                let a = levels[n].stage[x];
                if a + 1 > s {
                    continue;
                }
                let cap = s - 1 - a;
                let cost = |h: usize, l: usize| {
                    if levels[h].stage[l] > cap {
                        usize::MAX
                    } else if h == n {
                        top[h][l]
                    } else {
                        0
                    }
                };
                for tau in labelings_within(&levels[n].proj[x], &cands, &cost, shape_bound, LABELLING_LIMIT)? {
                    let ls = tau.labels().into_iter().map(|(h, &l)| levels[h].stage[l]).max().unwrap_or(0);
                    if ls != cap {
                        continue;
                    }
                    let x_src = levels[n].src[x];
                    let x_tgt = levels[n].tgt[x];
                    let bd = mu.get(&(x_src, tau.boundary(Side::Source)?)).zip(mu.get(&(x_tgt, tau.boundary(Side::Target)?)));
                    let y = flatten(&tau.map(|h, &c| snap.proj[h][c].clone()))?;
                    if y.edges() > shape_bound {
                        continue;
                    }
                    let Some((&bs, &bt)) = bd else {
                        dropped += 1;
                        continue;
                    };
                    let nm = format!("μ({} {})", levels[n].names[x], tau.to_text(&|h, &l| levels[h].names[l].clone()));
                    fresh.push((x, tau, nm, y, bs, bt));
                }
            }
            for (x, tau, nm, y, bs, bt) in fresh {
                let i = levels[n].push(MCell::Mu(x, tau.clone()), nm, s, y, Some((bs, bt)));
                mu.insert((x, tau), i);
            }
        }
    }
    let coll = Arc::new(snapshot(&levels, mode, &name)?);
    let stage = Some(levels.iter().map(|l| l.stage.clone()).collect());
    let cells = levels.into_iter().map(|l| l.cells).collect();
    let magma = OperadicMagma { coll, eta, mu, graft: None, kappa, stage, depth: Some(depth), shape_bound };
    Ok(FreeMagma { source: q.clone(), magma, cells, xi, dropped })
}

/// Why two cells were identified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Reason {
    LeftUnit,
    RightUnit,
    Associativity,
    /// Related cells one level up, whose boundaries these are.
    Boundary { upper: (usize, usize) },
    Contraction,
    Multiplication,
}

#[derive(Clone, Debug, Serialize)]
pub struct Merge {
    pub dim: usize,
    pub a: usize,
    pub b: usize,
    pub reason: Reason,
}

#[derive(Clone, Debug)]
pub struct OperadCongruence {
    pub relation: Congruence,
    pub merges: Vec<Merge>,
    pub rounds: usize,
    pub with_contraction: bool,
}

/// The unit and associativity pairs of the free magma, each `(dim, a, b, reason)`.
pub fn generating_pairs(fm: &FreeMagma) -> Result<Vec<(usize, usize, usize, Reason)>> {
    let m = &fm.magma;
    let mut out = Vec::new();
    for x in m.coll.cells() {
        if let Some(v) = m.mu(m.eta[x.dim], &m.globe(x)) {
            out.push((x.dim, v, x.idx, Reason::LeftUnit));
        }
        if let Some(v) = m.mu(x.idx, &m.unit_labels(x)) {
            out.push((x.dim, v, x.idx, Reason::RightUnit));
        }
    }
    let mut by_outer: HashMap<(usize, usize), Vec<(&Pasting<usize>, usize)>> = HashMap::default();
    for ((x, tau), &z) in &m.mu {
        by_outer.entry((tau.dim, *x)).or_default().push((tau, z));
    }
    let mut keys: Vec<&MuKey> = m.mu.keys().collect();
    keys.sort();
    for key in keys {
        let (x, tau) = key;
        let z = m.mu[key];
        let Some(outer) = by_outer.get(&(tau.dim, z)) else { continue };
        let shapes = tau.map(|h, &c| m.coll.proj[h][c].clone());
        for &(sigma, v) in outer {
            let omega = split(&shapes, sigma)?;
            if let Ok(w) = m.mu_each(tau, &omega) {
                if let Some(r) = m.mu(*x, &w) {
                    out.push((tau.dim, v, r, Reason::Associativity));
                }
            }
        }
    }
    out.sort_by_key(|p| (p.0, p.1, p.2));
    Ok(out)
}

/// The smallest congruence containing the generating pairs and closed under boundaries,
/// multiplication and (unless `with_contraction` is false) the contraction.
pub fn operad_congruence(fm: &FreeMagma, with_contraction: bool) -> Result<OperadCongruence> {
    let m = &fm.magma;
    let mut rel = Congruence::diagonal(&m.coll.carrier.sizes());
    let mut merges = Vec::new();
    for (d, a, b, reason) in generating_pairs(fm)? {
        if rel.union(d, a, b) {
            merges.push(Merge { dim: d, a, b, reason });
        }
    }
    let mut entries: Vec<(&MuKey, &usize)> = m.mu.iter().collect();
    entries.sort();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut changed = false;
        for d in (1..=m.max_dim()).rev() {
            let mut first: HashMap<usize, usize> = HashMap::default();
            for i in 0..m.coll.count(d) {
                let r = rel.find(d, i);
                let j = *first.entry(r).or_insert(i);
                if j == i {
                    continue;
                }
                let (x, y) = (CellRef::new(d, i), CellRef::new(d, j));
                for (a, b) in [(m.coll.src(x), m.coll.src(y)), (m.coll.tgt(x), m.coll.tgt(y))] {
                    if rel.union(d - 1, a, b) {
                        changed = true;
                        merges.push(Merge { dim: d - 1, a, b, reason: Reason::Boundary { upper: (i, j) } });
                    }
                }
            }
        }
        if with_contraction {
            for d in 1..=m.max_dim() {
                let mut first: HashMap<(Shape, usize, usize), usize> = HashMap::default();
                for (i, cell) in fm.cells[d].iter().enumerate() {
                    let MCell::Kappa(t) = cell else { continue };
                    let sig = (t.shape.clone(), rel.find(d - 1, t.plus), rel.find(d - 1, t.minus));
                    let j = *first.entry(sig).or_insert(i);
                    if rel.union(d, i, j) {
                        changed = true;
                        merges.push(Merge { dim: d, a: i, b: j, reason: Reason::Contraction });
                    }
                }
            }
        }
        let mut first: HashMap<(usize, usize, Pasting<usize>), usize> = HashMap::default();
        for ((x, tau), &z) in &entries {
            let d = tau.dim;
            let sig = (d, rel.find(d, *x), tau.map(|h, &l| rel.find(h, l)));
            let j = *first.entry(sig).or_insert(z);
            if rel.union(d, z, j) {
                changed = true;
                merges.push(Merge { dim: d, a: z, b: j, reason: Reason::Multiplication });
            }
        }
        if !changed {
            break;
        }
    }
    Ok(OperadCongruence { relation: rel, merges, rounds, with_contraction })
}

/// Replays the merge log from the diagonal, checking each merge against its reason
/// given the merges before it. Returns the number of merges verified.
pub fn replay_merges(fm: &FreeMagma, oc: &OperadCongruence) -> Result<usize> {
    let m = &fm.magma;
    let gens: std::collections::HashSet<(usize, usize, usize)> = generating_pairs(fm)?
        .into_iter()
        .flat_map(|(d, a, b, _)| [(d, a, b), (d, b, a)])
        .collect();
    let mut rel = Congruence::diagonal(&m.coll.carrier.sizes());
    let mut sigs: HashMap<(usize, usize), Vec<&MuKey>> = HashMap::default();
    for (key, &z) in &m.mu {
        sigs.entry((key.1.dim, z)).or_default().push(key);
    }
    for (k, mg) in oc.merges.iter().enumerate() {
        let (d, a, b) = (mg.dim, mg.a, mg.b);
        let ok = match &mg.reason {
            Reason::LeftUnit | Reason::RightUnit | Reason::Associativity => gens.contains(&(d, a, b)),
            Reason::Boundary { upper: (i, j) } => {
                let (x, y) = (CellRef::new(d + 1, *i), CellRef::new(d + 1, *j));
                rel.same(d + 1, *i, *j)
                    && [(m.coll.src(x), m.coll.src(y)), (m.coll.tgt(x), m.coll.tgt(y))].contains(&(a, b))
            }
            Reason::Contraction => match (&fm.cells[d][a], &fm.cells[d][b]) {
                (MCell::Kappa(s), MCell::Kappa(t)) => {
                    s.shape == t.shape && rel.same(d - 1, s.plus, t.plus) && rel.same(d - 1, s.minus, t.minus)
                }
                _ => false,
            },
            Reason::Multiplication => {
                let ka = sigs.get(&(d, a)).cloned().unwrap_or_default();
                let kb = sigs.get(&(d, b)).cloned().unwrap_or_default();
                ka.iter().any(|(x1, t1)| {
                    kb.iter().any(|(x2, t2)| {
                        t1.shape() == t2.shape()
                            && rel.same(d, *x1, *x2)
                            && t1.labels().iter().zip(t2.labels()).all(|((h, &p), (_, &q))| rel.same(*h, p, q))
                    })
                })
            }
        };
        if !ok {
            return domain(format!("merge {k} ({:?} at dimension {d}) is not justified by the merges before it", mg.reason));
        }
        rel.union(d, a, b);
    }
    Ok(oc.merges.len())
}

#[derive(Clone, Debug)]
pub struct FreeOperad {
    pub free: FreeMagma,
    pub congruence: OperadCongruence,
    pub operad: OperadicMagma,
    pub quotient: CollectionMorphism,
    /// The generator inclusion followed by the quotient.
    pub zeta: Vec<Vec<usize>>,
    /// Contraction triples whose classes disagree (only without contraction closure).
    pub kappa_conflicts: usize,
}

/// The free contracted operad on `q`, bounded: the free magma modulo the congruence
/// generated by the operad laws.
pub fn free_contracted_operad(q: &Arc<TCollection>, depth: usize, shape_bound: usize, with_contraction: bool) -> Result<FreeOperad> {
    let free = free_operadic_magma(q, depth, shape_bound)?;
    let mut congruence = operad_congruence(&free, with_contraction)?;
    let fm = &free.magma;
    let (pcoll, quotient) = quotient_collection(&fm.coll, &mut congruence.relation)?;
    let cls = |c: CellRef| quotient.apply(c).idx;
    let eta = (0..=fm.max_dim()).map(|d| cls(CellRef::new(d, fm.eta[d]))).collect();
    let mut mu = HashMap::default();
    let mut entries: Vec<(&MuKey, &usize)> = fm.mu.iter().collect();
    entries.sort();
    for ((x, tau), &z) in entries {
        let d = tau.dim;
        let key = (cls(CellRef::new(d, *x)), tau.map(|h, &l| cls(CellRef::new(h, l))));
        let v = cls(CellRef::new(d, z));
        if let Some(&old) = mu.get(&key) {
            if old != v {
                return domain("the congruence does not respect multiplication (clause: cg-mu)");
            }
        }
        mu.insert(key, v);
    }
    let mut kappa = Contraction::new();
    let mut kappa_conflicts = 0;
    let mut triples: Vec<(&ParTriple, &usize)> = fm.kappa.iter().collect();
    triples.sort();
    for (t, &k) in triples {
        let t2 = ParTriple {
            dim: t.dim,
            plus: cls(CellRef::new(t.dim - 1, t.plus)),
            shape: t.shape.clone(),
            minus: cls(CellRef::new(t.dim - 1, t.minus)),
        };
        let v = cls(CellRef::new(t.dim, k));
        match kappa.get(&t2) {
            Some(&old) if old != v => {
                if with_contraction {
                    return domain("the congruence does not respect the contraction (clause: cg-cont)");
                }
                kappa_conflicts += 1;
            }
            Some(_) => {}
            None => {
                kappa.insert(t2, v);
            }
        }
    }
    let mut stage: Vec<Vec<usize>> = (0..=fm.max_dim()).map(|d| vec![usize::MAX; pcoll.count(d)]).collect();
    for c in fm.coll.cells() {
        let s = &mut stage[c.dim][cls(c)];
        *s = (*s).min(fm.stage_of(c));
    }
    let zeta = free.xi.iter().enumerate().map(|(d, v)| v.iter().map(|&i| cls(CellRef::new(d, i))).collect()).collect();
    let operad =
        OperadicMagma { coll: pcoll, eta, mu, graft: None, kappa, stage: Some(stage), depth: fm.depth, shape_bound };
    Ok(FreeOperad { free, congruence, operad, quotient, zeta, kappa_conflicts })
}

/// The bounded initial contracted operad: the free one on the empty collection.
pub fn initial_operad(max_dim: usize, depth: usize, shape_bound: usize, mode: Mode) -> Result<FreeOperad> {
    free_contracted_operad(&Arc::new(TCollection::empty(max_dim, mode)), depth, shape_bound, true)
}

#[derive(Clone, Debug, Serialize)]
pub struct Factorization {
    /// The induced map on cells of the free operad.
    pub map: Vec<Vec<usize>>,
    /// Classes whose members the recursive definition sends to different cells.
    pub inconsistent: usize,
    /// Generators `q` with `φ̂(ζ q) ≠ φ(q)`.
    pub generator_mismatches: usize,
    pub boundary_mismatches: usize,
    pub projection_mismatches: usize,
}

impl Factorization {
    pub fn ok(&self) -> bool {
        self.inconsistent == 0 && self.generator_mismatches == 0 && self.boundary_mismatches == 0 && self.projection_mismatches == 0
    }
}

/// The structure map out of the free operad extending `φ: Q → P`: generators by `φ`,
/// units to units, contraction cells by `κ_P`, products by `μ_P`.
pub fn universal_factorization(fo: &FreeOperad, target: &OperadicMagma, phi: &CollectionMorphism) -> Result<Factorization> {
    let fm = &fo.free.magma;
    let n = fm.max_dim();
    if target.max_dim() < n {
        return domain("target operad has fewer dimensions than the free one");
    }
    let mut on_magma: Vec<Vec<usize>> = Vec::new();
    for d in 0..=n {
        let mut row = Vec::with_capacity(fo.free.cells[d].len());
        for cell in &fo.free.cells[d] {
            let v = match cell {
                MCell::Gen(i) => phi.apply(CellRef::new(d, *i)).idx,
                MCell::Eta => target.eta[d],
                MCell::Kappa(t) => {
                    let t2 = ParTriple { dim: d, plus: on_magma[d - 1][t.plus], shape: t.shape.clone(), minus: on_magma[d - 1][t.minus] };
                    *target.kappa.get(&t2).ok_or_else(|| Error::Domain(format!("target contraction undefined at dimension {d}")))?
                }
                MCell::Mu(x, tau) => {
                    let img = |h: usize, l: usize| if h == d { row[l] } else { on_magma[h][l] };
                    let w = tau.map(|h, &l| img(h, l));
                    target.mu(img(d, *x), &w).ok_or_else(|| {
                        Error::Domain(format!("target multiplication undefined on ({}, {})", target.name(CellRef::new(d, img(d, *x))), target.pasting_text(&w)))
                    })?
                }
            };
            row.push(v);
        }
        on_magma.push(row);
    }
    let p = &fo.operad.coll;
    let mut map: Vec<Vec<usize>> = (0..=n).map(|d| vec![usize::MAX; p.count(d)]).collect();
    let mut inconsistent = 0;
    for d in 0..=n {
        for (i, &v) in on_magma[d].iter().enumerate() {
            let c = fo.quotient.apply(CellRef::new(d, i)).idx;
            if map[d][c] == usize::MAX {
                map[d][c] = v;
            } else if map[d][c] != v {
                inconsistent += 1;
            }
        }
    }
    let mut rep = Factorization { map, inconsistent, generator_mismatches: 0, boundary_mismatches: 0, projection_mismatches: 0 };
    for c in phi.dom.cells() {
        if rep.map[c.dim][fo.zeta[c.dim][c.idx]] != phi.apply(c).idx {
            rep.generator_mismatches += 1;
        }
    }
    for c in p.cells() {
        let v = CellRef::new(c.dim, rep.map[c.dim][c.idx]);
        if p.proj_of(c) != target.coll.proj_of(v) {
            rep.projection_mismatches += 1;
        }
        if c.dim > 0
            && (rep.map[c.dim - 1][p.src(c)] != target.coll.src(v) || rep.map[c.dim - 1][p.tgt(c)] != target.coll.tgt(v))
        {
            rep.boundary_mismatches += 1;
        }
    }
    Ok(rep)
}

/// Counts structure-preserving maps from the free operad to `target` that extend `φ`,
/// stopping at `limit`: globular, projection-preserving, and commuting with `η`, `κ`, `μ`.
pub fn count_structure_maps(fo: &FreeOperad, target: &OperadicMagma, phi: &CollectionMorphism, limit: usize) -> Result<usize> {
    let p = &fo.operad;
    let n = p.max_dim();
    let order: Vec<CellRef> = p.coll.cells().collect();
    let pos: HashMap<CellRef, usize> = order.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    // each equation is checked once its last cell is assigned
    enum Eq {
        Fixed(CellRef, usize),
        Mu(usize, MuKey, usize),
        Kappa(ParTriple, usize),
    }
    let mut eqs: Vec<Vec<Eq>> = (0..order.len()).map(|_| Vec::new()).collect();
    let mut add = |cells: Vec<CellRef>, e: Eq| {
        let last = cells.iter().map(|c| pos[c]).max().unwrap_or(0);
        eqs[last].push(e);
    };
    for d in 0..=n {
        add(vec![CellRef::new(d, p.eta[d])], Eq::Fixed(CellRef::new(d, p.eta[d]), target.eta[d]));
    }
    for c in phi.dom.cells() {
        let z = CellRef::new(c.dim, fo.zeta[c.dim][c.idx]);
        add(vec![z], Eq::Fixed(z, phi.apply(c).idx));
    }
    for ((x, tau), &z) in &p.mu {
        let d = tau.dim;
        let mut cells = vec![CellRef::new(d, *x), CellRef::new(d, z)];
        cells.extend(tau.labels().into_iter().map(|(h, &l)| CellRef::new(h, l)));
        add(cells, Eq::Mu(d, (*x, tau.clone()), z));
    }
    for (t, &k) in &p.kappa {
        let cells = vec![CellRef::new(t.dim - 1, t.plus), CellRef::new(t.dim - 1, t.minus), CellRef::new(t.dim, k)];
        add(cells, Eq::Kappa(t.clone(), k));
    }
    let mut asg: Vec<Vec<usize>> = (0..=n).map(|d| vec![usize::MAX; p.coll.count(d)]).collect();
    struct Search<'a> {
        order: &'a [CellRef],
        eqs: &'a [Vec<Eq>],
        p: &'a OperadicMagma,
        target: &'a OperadicMagma,
        found: usize,
        limit: usize,
    }
    fn holds(s: &Search<'_>, asg: &[Vec<usize>], e: &Eq) -> bool {
        match e {
            Eq::Fixed(c, v) => asg[c.dim][c.idx] == *v,
            Eq::Mu(d, (x, tau), z) => {
                let w = tau.map(|h, &l| asg[h][l]);
                s.target.mu(asg[*d][*x], &w) == Some(asg[*d][*z])
            }
            Eq::Kappa(t, k) => {
                let t2 = ParTriple { dim: t.dim, plus: asg[t.dim - 1][t.plus], shape: t.shape.clone(), minus: asg[t.dim - 1][t.minus] };
                s.target.kappa.get(&t2) == Some(&asg[t.dim][*k])
            }
        }
    }
    fn fits(s: &Search<'_>, k: usize, v: usize, asg: &mut [Vec<usize>]) -> bool {
        let c = s.order[k];
        let tc = &s.target.coll;
        let vc = CellRef::new(c.dim, v);
        if tc.proj_of(vc) != s.p.coll.proj_of(c) {
            return false;
        }
        if c.dim > 0 && (asg[c.dim - 1][s.p.coll.src(c)] != tc.src(vc) || asg[c.dim - 1][s.p.coll.tgt(c)] != tc.tgt(vc)) {
            return false;
        }
        asg[c.dim][c.idx] = v;
        s.eqs[k].iter().all(|e| holds(s, asg, e))
    }
    // depth-first over cells in order; `next[k]` is the next candidate to try at position k
    fn search(s: &mut Search<'_>, asg: &mut [Vec<usize>]) {
        let n = s.order.len();
        if n == 0 {
            s.found = 1;
            return;
        }
        let mut next = vec![0usize; n];
        let mut k = 0;
        loop {
            let c = s.order[k];
            let count = s.target.coll.count(c.dim);
            let mut placed = false;
            while next[k] < count {
                let v = next[k];
                next[k] += 1;
                if fits(s, k, v, asg) {
                    placed = true;
                    break;
                }
            }
            if placed && k + 1 == n {
                s.found += 1;
                if s.found >= s.limit {
                    return;
                }
                continue;
            }
            if placed {
                k += 1;
                next[k] = 0;
                continue;
            }
            asg[c.dim][c.idx] = usize::MAX;
            if k == 0 {
                return;
            }
            k -= 1;
        }
    }
    let mut s = Search { order: &order, eqs: &eqs, p, target, found: 0, limit };
    search(&mut s, &mut asg);
    Ok(s.found)
}

/// An algebra: a globular set with an action of operations on pastings of its cells.
#[derive(Clone, Debug)]
pub struct TAlgebra {
    pub name: String,
    pub carrier: Arc<GlobularSet>,
    /// `(p, ξ) ↦ x` with `ξ` a pasting of carrier cells of shape `π(p)`.
    pub act: HashMap<MuKey, usize>,
}

impl TAlgebra {
    pub fn empty(max_dim: usize) -> TAlgebra {
        TAlgebra { name: "empty".into(), carrier: Arc::new(GlobularSet::empty(max_dim)), act: HashMap::default() }
    }
}

/// The bounded free (involutive) ω-category on `base` as an algebra: an operation acts on
/// a labelled pasting by composing it, evaluated through the normalizer.
pub fn free_algebra(op: &OperadicMagma, base: &Arc<GlobularSet>, bound: usize) -> Result<TAlgebra> {
    if base.max_dim() != op.max_dim() {
        return domain("algebra carrier and operad have different dimensions");
    }
    let mode = op.mode();
    let fs = FreeSet::build(base, mode, bound, 1_000_000)?;
    let cands = set_candidates(&fs.set);
    let top: Vec<Vec<usize>> = fs
        .cells
        .iter()
        .enumerate()
        .map(|(d, v)| {
            v.iter().map(|p| p.edges() - if d == 0 { 0 } else { p.boundary(Side::Source).map_or(0, |b| b.edges()) }).collect()
        })
        .collect();
    let mut act = HashMap::default();
    for c in op.coll.cells() {
        let cost = |h: usize, l: usize| if h == c.dim { top[h][l] } else { 0 };
        for xi in labelings_within(op.coll.proj_of(c), &cands, &cost, bound, LABELLING_LIMIT)? {
            let composite = multiply_flatten(base, mode, &fs.expand(&xi))?;
            if let Some(r) = fs.find(composite.pasting()) {
                act.insert((c.idx, xi), r.idx);
            }
        }
    }
    drop(cands);
    Ok(TAlgebra { name: format!("T({})", base.max_dim()), carrier: Arc::new(fs.set), act })
}

/// The unit law `act(η, x) = x` and the associativity law
/// `act(μ(p, τ), ξ) = act(p, act(τ_g, ξ_g))`, over operation cells of stage at most `max_stage`.
pub fn check_algebra(op: &OperadicMagma, alg: &TAlgebra, max_stage: Option<usize>) -> Result<Report> {
    let mut rep = Report::default();
    let x = &alg.carrier;
    let name = |c: CellRef| x.name(c).to_string();
    let text = |p: &Pasting<usize>| p.to_text(&|h, &l| x.name(CellRef::new(h, l)).to_string());
    for d in 0..=x.max_dim().min(op.max_dim()) {
        for c in x.cells(d) {
            rep.checked += 1;
            let globe = Pasting::globe(d, |k, side| if k == d { c.idx } else { x.iterated_boundary(c, d - k, side).map_or(0, |b| b.idx) });
            match alg.act.get(&(op.eta[d], globe)) {
                Some(&v) if v == c.idx => {}
                Some(&v) => rep.push("unit", format!("η acts on {} as {}", name(c), name(CellRef::new(d, v)))),
                None => rep.push("undefined", format!("η does not act on {}", name(c))),
            }
        }
    }
    let mut by_op: HashMap<(usize, usize), Vec<(&Pasting<usize>, usize)>> = HashMap::default();
    for ((p, xi), &r) in &alg.act {
        by_op.entry((xi.dim, *p)).or_default().push((xi, r));
    }
    for v in by_op.values_mut() {
        v.sort();
    }
    for p in op.cells_to(max_stage) {
        for tau in op.pairs_over(p, max_stage, &|_, _| true)? {
            let Some(z) = op.mu(p.idx, &tau) else {
                rep.skipped += 1;
                continue;
            };
            let shapes = tau.map(|h, &c| op.coll.proj[h][c].clone());
            for &(xi, lhs) in by_op.get(&(p.dim, z)).map(|v| v.as_slice()).unwrap_or(&[]) {
                rep.checked += 1;
                let omega = split(&shapes, xi)?;
                let mut inner = Vec::new();
                for ((_, &t), (_, w)) in tau.labels().into_iter().zip(omega.labels()) {
                    match alg.act.get(&(t, w.clone())) {
                        Some(&a) => inner.push(a),
                        None => break,
                    }
                }
                if inner.len() != tau.labels().len() {
                    rep.skipped += 1;
                    continue;
                }
                let Some(&rhs) = alg.act.get(&(p.idx, tau.with_labels(inner))) else {
                    rep.skipped += 1;
                    continue;
                };
                if lhs != rhs {
                    rep.push(
                        "associativity",
                        format!(
                            "{} acting on {} gives {} but acting in stages gives {}",
                            op.name(CellRef::new(p.dim, z)),
                            text(xi),
                            name(CellRef::new(p.dim, lhs)),
                            name(CellRef::new(p.dim, rhs))
                        ),
                    );
                }
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::globular::terminal_set;

    fn t(s: &str, d: usize) -> Shape {
        DecoratedTree::parse(s, Some(d)).unwrap()
    }

    fn cell_of(m: &OperadicMagma, y: &str, d: usize) -> usize {
        m.coll.proj[d].iter().position(|p| *p == t(y, d)).unwrap()
    }

    #[test]
    fn terminal_grafting() {
        let m = terminal_operad(1, 4, Mode::Strict).unwrap();
        let (p1, p2, p3) = (cell_of(&m, "(())", 1), cell_of(&m, "(()())", 1), cell_of(&m, "(()()())", 1));
        let shape = m.coll.proj[1][p2].clone();
        let labels: Vec<usize> = shape.labels().iter().map(|(h, _)| if *h == 0 { 0 } else { usize::MAX }).collect();
        let mut it = [p1, p3].into_iter();
        let tau = shape.with_labels(labels.into_iter().map(|l| if l == usize::MAX { it.next().unwrap() } else { l }).collect());
        let z = m.mu(p2, &tau).unwrap();
        assert_eq!(m.coll.proj[1][z], t("(()()()())", 1));
        assert_eq!(m.coll.proj[1][m.eta[1]], t("(())", 1));
        for (tr, &k) in &m.kappa {
            assert_eq!(m.coll.proj[tr.dim][k], tr.shape);
        }
    }

    #[test]
    fn terminal_laws_hold() {
        for mode in [Mode::Strict, Mode::Involutive] {
            let m = terminal_operad(2, 2, mode).unwrap();
            let laws = check_operad_laws(&m, None).unwrap();
            assert!(laws.ok() && laws.checked > 50, "{:?}", laws.violations.first());
            let con = check_operadic_contraction(&m, None).unwrap();
            assert!(con.ok() && con.checked > 10, "{:?}", con.violations.first());
        }
    }

    #[test]
    fn perturbed_contraction_breaks_d2() {
        let mut m = terminal_operad(1, 4, Mode::Strict).unwrap();
        let y = t("(()())", 1);
        let key = m.kappa.keys().find(|k| k.shape == y).unwrap().clone();
        let other = cell_of(&m, "(()()())", 1);
        m.kappa.insert(key, other);
        let rep = check_operadic_contraction(&m, None).unwrap();
        assert!(rep.count("projection") == 1 && rep.count("d2") > 0, "{:?}", rep.violations);
    }

    #[test]
    fn free_magma_on_nothing() {
        let e = Arc::new(TCollection::empty(1, Mode::Involutive));
        let fm = free_operadic_magma(&e, 1, 2).unwrap();
        assert_eq!(fm.cells[0], vec![MCell::Eta]);
        let kappas = fm.cells[1].iter().filter(|c| matches!(c, MCell::Kappa(_))).count();
        assert_eq!(kappas, crate::pasting::all_trees(1, 2, true).len());
        assert!(validate_contraction(&fm.magma.coll, &fm.magma.kappa, 2).unwrap().ok());
        for c in fm.magma.coll.cells() {
            if let MCell::Kappa(tr) = &fm.cells[c.dim][c.idx] {
                assert_eq!((fm.magma.coll.src(c), fm.magma.coll.tgt(c)), (tr.minus, tr.plus));
            }
        }
        // the raw magma is not an operad
        let laws = check_operad_laws(&fm.magma, None).unwrap();
        assert!(laws.count("left-unit") > 0 && laws.count("right-unit") > 0);
    }

    #[test]
    fn mu_cells_project_by_grafting() {
        let e = Arc::new(TCollection::empty(1, Mode::Strict));
        let fm = free_operadic_magma(&e, 1, 3).unwrap();
        let m = &fm.magma;
        for ((x, tau), &z) in &m.mu {
            if tau.dim == 1 {
                assert_eq!(m.coll.proj[1][z], m.pair_proj(tau).unwrap());
                assert!(m.stage_of(CellRef::new(1, z)) <= 1);
                let _ = x;
            }
        }
    }

    #[test]
    fn initial_operad_is_an_operad() {
        let fo = initial_operad(1, 2, 2, Mode::Involutive).unwrap();
        assert_eq!(fo.operad.coll.count(0), 1);
        assert_eq!(replay_merges(&fo.free, &fo.congruence).unwrap(), fo.congruence.merges.len());
        let laws = check_operad_laws(&fo.operad, Some(1)).unwrap();
        assert!(laws.ok(), "{:?}", laws.violations.first());
        let term = terminal_operad(1, 2, Mode::Involutive).unwrap();
        let e = Arc::new(TCollection::empty(1, Mode::Involutive));
        let phi = CollectionMorphism::new(e, term.coll.clone(), vec![vec![], vec![]]).unwrap();
        let f = universal_factorization(&fo, &term, &phi).unwrap();
        assert!(f.ok(), "{f:?}");
        // the unique map is the projection
        for c in fo.operad.coll.cells() {
            assert_eq!(term.coll.proj[c.dim][f.map[c.dim][c.idx]], *fo.operad.coll.proj_of(c));
        }
    }

    #[test]
    fn free_algebra_laws_and_perturbation() {
        let op = terminal_operad(1, 3, Mode::Involutive).unwrap();
        let base = Arc::new(terminal_set(1));
        let alg = free_algebra(&op, &base, 3).unwrap();
        let rep = check_algebra(&op, &alg, None).unwrap();
        assert!(rep.ok() && rep.checked > 50, "{:?}", rep.violations.first());
        let mut bad = alg.clone();
        let path2 = cell_of(&op, "(()())", 1);
        let key = bad.act.keys().filter(|(p, _)| *p == path2).min().unwrap().clone();
        let old = bad.act[&key];
        let other = (0..bad.carrier.count(1)).find(|&i| i != old).unwrap();
        bad.act.insert(key, other);
        assert!(!check_algebra(&op, &bad, None).unwrap().ok());
        assert!(check_algebra(&op, &TAlgebra::empty(1), None).unwrap().ok());
    }
}
