//! Globular collections over the terminal set: a globular set with a
//! projection into the free (involutive) ω-category on one point, parallel
//! triples and contractions, span composition, and congruence quotients.

use std::collections::HashMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::globular::{terminal_set, CellRef, GlobularMorphism, GlobularSet, Side};
use crate::monad::{flatten, set_candidates, split, FreeSet};
use crate::pasting::{all_trees, labelings_within, DecoratedTree, Pasting};
use crate::report::Report;
use crate::term::Mode;

pub type Shape = DecoratedTree;

/// The structure of a cell of an iterated composite: atoms are cells of the
/// factors, pairs are `(p, τ)` with `τ` a pasting of cells of the right factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Atom(usize),
    Pair(Box<Elem>, Pasting<Elem>),
}

impl Elem {
    fn split(&self) -> Option<(&Elem, &Pasting<Elem>)> {
        match self {
            Elem::Pair(a, t) => Some((a, t)),
            Elem::Atom(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TCollection {
    pub name: String,
    pub mode: Mode,
    pub carrier: Arc<GlobularSet>,
    pub proj: Vec<Vec<Shape>>,
    elems: Option<Vec<Vec<Elem>>>,
    elem_index: Vec<HashMap<Elem, usize>>,
}

impl TCollection {
    pub fn new(name: &str, mode: Mode, carrier: Arc<GlobularSet>, proj: Vec<Vec<Shape>>) -> Result<TCollection> {
        let c = TCollection { name: name.to_string(), mode, carrier, proj, elems: None, elem_index: Vec::new() };
        c.validate()?;
        Ok(c)
    }

    pub fn empty(max_dim: usize, mode: Mode) -> TCollection {
        TCollection {
            name: "empty".into(),
            mode,
            carrier: Arc::new(GlobularSet::empty(max_dim)),
            proj: vec![Vec::new(); max_dim + 1],
            elems: None,
            elem_index: Vec::new(),
        }
    }

    /// Projection dimensions, decorations, and commutation with boundaries.
    pub fn validate(&self) -> Result<()> {
        let q = &self.carrier;
        if self.proj.len() != q.max_dim() + 1 {
            return domain("projection table does not match the carrier's dimensions");
        }
        for n in 0..=q.max_dim() {
            if self.proj[n].len() != q.count(n) {
                return domain(format!("projection missing for some {n}-cells"));
            }
            for (i, y) in self.proj[n].iter().enumerate() {
                let name = q.name(CellRef::new(n, i));
                if y.dim != n {
                    return domain(format!("projection of {name} has dimension {}", y.dim));
                }
                y.check_tree()?;
                if !self.mode.involutive() && y.is_decorated() {
                    return domain(format!("projection of {name} is decorated in strict mode"));
                }
                if n > 0 {
                    let c = CellRef::new(n, i);
                    if self.proj[n - 1][q.src(c)] != y.boundary(Side::Source)? {
                        return domain(format!("projection does not commute with the source of {name}"));
                    }
                    if self.proj[n - 1][q.tgt(c)] != y.boundary(Side::Target)? {
                        return domain(format!("projection does not commute with the target of {name}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn max_dim(&self) -> usize {
        self.carrier.max_dim()
    }

    pub fn count(&self, n: usize) -> usize {
        self.carrier.count(n)
    }

    pub fn proj_of(&self, c: CellRef) -> &Shape {
        &self.proj[c.dim][c.idx]
    }

    pub fn src(&self, c: CellRef) -> usize {
        self.carrier.src(c)
    }

    pub fn tgt(&self, c: CellRef) -> usize {
        self.carrier.tgt(c)
    }

    pub fn cells(&self) -> impl Iterator<Item = CellRef> + '_ {
        (0..=self.max_dim()).flat_map(|d| self.carrier.cells(d))
    }

    /// Structural form of a cell; atoms for a collection that is not a composite.
    pub fn elem(&self, c: CellRef) -> Elem {
        match &self.elems {
            Some(e) => e[c.dim][c.idx].clone(),
            None => Elem::Atom(c.idx),
        }
    }

    pub fn find_elem(&self, dim: usize, e: &Elem) -> Option<usize> {
        match (&self.elems, e) {
            (None, Elem::Atom(i)) => (*i < self.count(dim)).then_some(*i),
            (None, _) => None,
            (Some(_), _) => self.elem_index.get(dim)?.get(e).copied(),
        }
    }

    fn set_elems(&mut self, elems: Vec<Vec<Elem>>) {
        self.elem_index =
            elems.iter().map(|v| v.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect()).collect();
        self.elems = Some(elems);
    }

    /// Cells grouped by projection, per dimension.
    pub fn fibres(&self, n: usize) -> HashMap<&Shape, Vec<usize>> {
        let mut out: HashMap<&Shape, Vec<usize>> = HashMap::new();
        for (i, y) in self.proj[n].iter().enumerate() {
            out.entry(y).or_default().push(i);
        }
        out
    }
}

/// The bounded free category on one point as a collection over itself (projection the identity).
pub fn terminal_collection(max_dim: usize, max_edges: usize, mode: Mode) -> Result<TCollection> {
    let fs = FreeSet::build(&terminal_set(max_dim), mode, max_edges, 1_000_000)?;
    let proj: Vec<Vec<Shape>> = fs.cells.iter().map(|v| v.iter().map(|p| p.shape()).collect()).collect();
    // trees are unique within a dimension, so they serve as names
    let names = proj.iter().map(|v| v.iter().map(|y| y.to_string()).collect()).collect();
    let bd = |side: Side| -> Vec<Vec<usize>> {
        (0..=max_dim)
            .map(|n| {
                if n == 0 {
                    return Vec::new();
                }
                fs.set.cells(n).map(|c| if side == Side::Source { fs.set.src(c) } else { fs.set.tgt(c) }).collect()
            })
            .collect()
    };
    let set = GlobularSet::from_tables(max_dim, names, bd(Side::Source), bd(Side::Target))?;
    TCollection::new("terminal", mode, Arc::new(set), proj)
}

/// The horizontal identity on `e`: projection the unit of the monad.
pub fn identity_collection(e: Arc<GlobularSet>, mode: Mode) -> Result<TCollection> {
    let proj = (0..=e.max_dim()).map(|n| vec![DecoratedTree::unit(n); e.count(n)]).collect();
    TCollection::new("identity", mode, e, proj)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ParTriple {
    /// Dimension of the contracting cell; `plus` and `minus` are one below.
    pub dim: usize,
    pub plus: usize,
    #[serde(serialize_with = "ser_shape")]
    pub shape: Shape,
    pub minus: usize,
}

fn ser_shape<S: serde::Serializer>(y: &Shape, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&y.to_string())
}

/// Triples `(x⁺, y, x⁻)` with `x⁺ ∥ x⁻`, `π(x⁺)` the target of `y` and `π(x⁻)` its source,
/// over shapes `y` with at most `shape_bound` edges.
pub fn par_set(c: &TCollection, n: usize, shape_bound: usize) -> Result<Vec<ParTriple>> {
    if n == 0 {
        return domain("parallel triples start in dimension 1");
    }
    if n - 1 > c.max_dim() {
        return Ok(Vec::new());
    }
    let fib = c.fibres(n - 1);
    let mut out = Vec::new();
    for y in all_trees(n, shape_bound, c.mode.involutive()) {
        let (s, t) = (y.boundary(Side::Source)?, y.boundary(Side::Target)?);
        let (Some(ps), Some(ms)) = (fib.get(&t), fib.get(&s)) else { continue };
        for &plus in ps {
            for &minus in ms {
                if n == 1 || c.carrier.parallel(CellRef::new(n - 1, plus), CellRef::new(n - 1, minus))? {
                    out.push(ParTriple { dim: n, plus, shape: y.clone(), minus });
                }
            }
        }
    }
    Ok(out)
}

pub type Contraction = HashMap<ParTriple, usize>;

/// Checks `s κ = x⁻`, `t κ = x⁺` and `π κ = y` on every bounded triple.
pub fn validate_contraction(c: &TCollection, kappa: &Contraction, shape_bound: usize) -> Result<Report> {
    let mut rep = Report::default();
    for n in 1..=c.max_dim() {
        for tr in par_set(c, n, shape_bound)? {
            rep.checked += 1;
            let Some(&k) = kappa.get(&tr) else {
                rep.push("incomplete", format!("no contraction cell for {}", triple_text(c, &tr)));
                continue;
            };
            let cell = CellRef::new(n, k);
            if k >= c.count(n) {
                rep.push("range", format!("{} is sent outside the carrier", triple_text(c, &tr)));
                continue;
            }
            if c.src(cell) != tr.minus {
                rep.push("source", format!("source of κ{} is not x⁻", triple_text(c, &tr)));
            }
            if c.tgt(cell) != tr.plus {
                rep.push("target", format!("target of κ{} is not x⁺", triple_text(c, &tr)));
            }
            if c.proj_of(cell) != &tr.shape {
                rep.push("projection", format!("projection of κ{} is not y", triple_text(c, &tr)));
            }
        }
    }
    Ok(rep)
}

pub fn triple_text(c: &TCollection, t: &ParTriple) -> String {
    let name = |i| c.carrier.name(CellRef::new(t.dim - 1, i)).to_string();
    format!("({}, {}, {})", name(t.plus), t.shape, name(t.minus))
}

/// A map of collections: a globular map of carriers commuting with the projections.
#[derive(Clone, Debug)]
pub struct CollectionMorphism {
    pub dom: Arc<TCollection>,
    pub cod: Arc<TCollection>,
    pub map: GlobularMorphism,
}

impl CollectionMorphism {
    pub fn new(dom: Arc<TCollection>, cod: Arc<TCollection>, maps: Vec<Vec<usize>>) -> Result<Self> {
        let map = GlobularMorphism::new(dom.carrier.clone(), cod.carrier.clone(), maps)?;
        for c in dom.cells() {
            if dom.proj_of(c) != cod.proj_of(map.apply(c)) {
                return domain(format!("morphism does not preserve the projection of {}", dom.carrier.name(c)));
            }
        }
        Ok(CollectionMorphism { dom, cod, map })
    }

    pub fn apply(&self, c: CellRef) -> CellRef {
        self.map.apply(c)
    }
}

/// `(x⁺, y, x⁻) ↦ (φ x⁺, y, φ x⁻)`.
pub fn par_pushforward(phi: &CollectionMorphism, triples: &[ParTriple]) -> Vec<ParTriple> {
    triples
        .iter()
        .map(|t| ParTriple {
            dim: t.dim,
            plus: phi.apply(CellRef::new(t.dim - 1, t.plus)).idx,
            shape: t.shape.clone(),
            minus: phi.apply(CellRef::new(t.dim - 1, t.minus)).idx,
        })
        .collect()
}

/// Nodes at the top height of each projection. A flattened pasting has at least as
/// many edges as its top-dimensional labels contribute there, which bounds enumeration.
pub(crate) fn top_nodes(c: &TCollection) -> Vec<Vec<usize>> {
    c.proj
        .iter()
        .enumerate()
        .map(|(d, v)| v.iter().map(|y| y.edges() - if d == 0 { 0 } else { y.boundary(Side::Source).map_or(0, |b| b.edges()) }).collect())
        .collect()
}

pub(crate) fn edges_ok(y: &Shape, bound: Option<usize>) -> bool {
    bound.is_none_or(|b| y.edges() <= b)
}

/// `P1 ∘ P2`: pairs `(p, τ)` with `p ∈ P1`, `τ` a pasting of `P2`-cells of shape `π(p)`,
/// projected to the flattening of the shapes inside `τ`. With a bound, `π(p)` and the
/// pair's own projection both have at most that many edges, so the composite is bounded too.
pub fn compose_collections(p1: &TCollection, p2: &TCollection, bound: Option<usize>) -> Result<TCollection> {
    let n = p1.max_dim().min(p2.max_dim());
    if p1.mode != p2.mode {
        return domain("composing collections of different modes");
    }
    let cands = set_candidates(&p2.carrier);
    let top = top_nodes(p2);
    let mut index: Vec<HashMap<(usize, Pasting<usize>), usize>> = vec![HashMap::new(); n + 1];
    let mut proj: Vec<Vec<Shape>> = vec![Vec::new(); n + 1];
    let mut names: Vec<Vec<String>> = vec![Vec::new(); n + 1];
    let mut src: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    let mut tgt: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    let mut elems: Vec<Vec<Elem>> = vec![Vec::new(); n + 1];
    let missing = || Error::Domain("boundary of a composite cell is missing".into());
    for d in 0..=n {
        for p in 0..p1.count(d) {
            let y = &p1.proj[d][p];
            if !edges_ok(y, bound) {
                continue;
            }
            let cost = |h: usize, c: usize| if h == d { top[d][c] } else { 0 };
            let taus = labelings_within(y, &cands, &cost, bound.unwrap_or(usize::MAX), 5_000_000)?;
            let pc = CellRef::new(d, p);
            for tau in taus {
                // boundaries past the bound put the cell past it too
                let (mut si, mut ti) = (0, 0);
                if d > 0 {
                    let s = (p1.src(pc), tau.boundary(Side::Source)?);
                    let t = (p1.tgt(pc), tau.boundary(Side::Target)?);
                    match (index[d - 1].get(&s), index[d - 1].get(&t)) {
                        (Some(&a), Some(&b)) => (si, ti) = (a, b),
                        _ if bound.is_some() => continue,
                        _ => return Err(missing()),
                    }
                }
                let flat = flatten(&tau.map(|h, &c| p2.proj[h][c].clone()))?;
                if !edges_ok(&flat, bound) {
                    continue;
                }
                if d > 0 {
                    src[d].push(si);
                    tgt[d].push(ti);
                }
                names[d].push(format!(
                    "({} {})",
                    p1.carrier.name(pc),
                    tau.to_text(&|h, &c| p2.carrier.name(CellRef::new(h, c)).to_string())
                ));
                elems[d].push(Elem::Pair(Box::new(p1.elem(pc)), tau.map(|h, &c| p2.elem(CellRef::new(h, c)))));
                index[d].insert((p, tau), proj[d].len());
                proj[d].push(flat);
            }
        }
    }
    let set = GlobularSet::from_tables(n, names, src, tgt)?;
    let mut c = TCollection::new(&format!("{}∘{}", p1.name, p2.name), p1.mode, Arc::new(set), proj)?;
    c.set_elems(elems);
    Ok(c)
}

/// Where a partial map between bounded carriers sends a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Image {
    In(usize),
    /// The image exists but lies past the bound.
    Outside,
    Missing,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IsoReport {
    pub domain_size: usize,
    pub codomain_size: usize,
    pub mapped: usize,
    pub outside: usize,
    pub missing: usize,
    pub round_trip_failures: usize,
    pub projection_mismatches: usize,
    pub boundary_mismatches: usize,
}

impl IsoReport {
    pub fn ok(&self) -> bool {
        self.missing == 0
            && self.round_trip_failures == 0
            && self.projection_mismatches == 0
            && self.boundary_mismatches == 0
            && self.mapped > 0
    }

    pub fn is_total(&self) -> bool {
        self.ok() && self.outside == 0
    }
}

/// Checks that `fwd` and `bwd` are mutually inverse wherever they land inside the
/// bound, and that `fwd` preserves projections and boundaries.
fn check_partial_iso(
    dom: &TCollection,
    cod: &TCollection,
    fwd: &dyn Fn(CellRef) -> Image,
    bwd: &dyn Fn(CellRef) -> Image,
) -> IsoReport {
    let mut rep = IsoReport::default();
    let n = dom.max_dim().min(cod.max_dim());
    let mut img: Vec<Vec<Option<usize>>> = Vec::new();
    for d in 0..=n {
        let mut row = Vec::new();
        for c in dom.carrier.cells(d) {
            rep.domain_size += 1;
            let v = fwd(c);
            match v {
                Image::In(j) => {
                    rep.mapped += 1;
                    if dom.proj_of(c) != &cod.proj[d][j] {
                        rep.projection_mismatches += 1;
                    }
                    if bwd(CellRef::new(d, j)) != Image::In(c.idx) {
                        rep.round_trip_failures += 1;
                    }
                }
                Image::Outside => rep.outside += 1,
                Image::Missing => rep.missing += 1,
            }
            row.push(if let Image::In(j) = v { Some(j) } else { None });
        }
        for c in cod.carrier.cells(d) {
            rep.codomain_size += 1;
            match bwd(c) {
                Image::In(i) => {
                    if fwd(CellRef::new(d, i)) != Image::In(c.idx) {
                        rep.round_trip_failures += 1;
                    }
                }
                Image::Outside => rep.outside += 1,
                Image::Missing => rep.missing += 1,
            }
        }
        img.push(row);
    }
    for d in 1..=n {
        for (i, v) in img[d].iter().enumerate() {
            let Some(j) = *v else { continue };
            let (c, cc) = (CellRef::new(d, i), CellRef::new(d, j));
            if img[d - 1][dom.src(c)] != Some(cod.src(cc)) || img[d - 1][dom.tgt(c)] != Some(cod.tgt(cc)) {
                rep.boundary_mismatches += 1;
            }
        }
    }
    rep
}

fn found(i: Option<usize>) -> Image {
    i.map_or(Image::Missing, Image::In)
}

fn unit_coll(p: &TCollection) -> Result<TCollection> {
    identity_collection(Arc::new(terminal_set(p.max_dim())), p.mode)
}

/// `ι ∘ P → P`: the pair `(•, η(x))` goes to `x`.
pub fn left_unitor(p: &TCollection) -> Result<IsoReport> {
    let c = compose_collections(&unit_coll(p)?, p, None)?;
    let fwd = |x: CellRef| {
        let e = c.elem(x);
        let top = e.split().and_then(|(_, tau)| tau.labels().last().map(|l| l.1.clone()));
        found(top.and_then(|t| p.find_elem(x.dim, &t)))
    };
    let bwd = |x: CellRef| {
        let globe = Pasting::globe(x.dim, |k, side| match p.carrier.iterated_boundary(x, x.dim - k, side) {
            Ok(b) => p.elem(b),
            Err(_) => Elem::Atom(usize::MAX),
        });
        found(c.find_elem(x.dim, &Elem::Pair(Box::new(Elem::Atom(0)), globe)))
    };
    Ok(check_partial_iso(&c, p, &fwd, &bwd))
}

/// `P ∘ ι → P`: the pair `(x, π(x) labelled by points)` goes to `x`. Cells of `P`
/// past the bound have no preimage in the bounded composite.
pub fn right_unitor(p: &TCollection, bound: Option<usize>) -> Result<IsoReport> {
    let c = compose_collections(p, &unit_coll(p)?, bound)?;
    let fwd = |x: CellRef| found(c.elem(x).split().and_then(|(a, _)| p.find_elem(x.dim, a)));
    let bwd = |x: CellRef| {
        if !edges_ok(p.proj_of(x), bound) {
            return Image::Outside;
        }
        let e = Elem::Pair(Box::new(p.elem(x)), p.proj_of(x).map(|_, _| Elem::Atom(0)));
        found(c.find_elem(x.dim, &e))
    };
    Ok(check_partial_iso(&c, p, &fwd, &bwd))
}

/// The re-pairing `(p, ω) ↦ ((p, fst ω), μ(snd ω))` from `P1∘(P2∘P3)` to `(P1∘P2)∘P3`.
pub fn rebracket(e: &Elem) -> Option<Elem> {
    let (p, omega) = e.split()?;
    let mut ok = true;
    let fst = omega.map(|_, l| match l.split() {
        Some((a, _)) => a.clone(),
        None => {
            ok = false;
            l.clone()
        }
    });
    let snd = omega.map(|_, l| match l.split() {
        Some((_, s)) => s.clone(),
        None => {
            ok = false;
            Pasting::globe(0, |_, _| l.clone())
        }
    });
    if !ok {
        return None;
    }
    let sigma = flatten(&snd).ok()?;
    Some(Elem::Pair(Box::new(Elem::Pair(Box::new(p.clone()), fst)), sigma))
}

type ElemProj<'a> = dyn Fn(usize, &Elem) -> Option<Shape> + 'a;

/// The projection of `(a, τ)` given projections of the labels of `τ`.
fn pair_proj(tau: &Pasting<Elem>, proj: &ElemProj<'_>) -> Option<Shape> {
    let shapes = tau.try_map(|h, l| proj(h, l).ok_or_else(|| Error::Domain(String::new()))).ok()?;
    flatten(&shapes).ok()
}

/// The inverse re-pairing: `σ` is cut along `ρ` into the pieces each `P2`-cell carries.
pub fn unrebracket(e: &Elem, proj2: &ElemProj<'_>) -> Option<Elem> {
    let (inner, sigma) = e.split()?;
    let (p, rho) = inner.split()?;
    let shapes = rho.try_map(|h, l| proj2(h, l).ok_or_else(|| Error::Domain(String::new()))).ok()?;
    let pieces = split(&shapes, sigma).ok()?;
    let labels: Vec<Elem> = rho
        .labels()
        .into_iter()
        .zip(pieces.labels())
        .map(|((_, r), (_, s))| Elem::Pair(Box::new(r.clone()), s.clone()))
        .collect();
    Some(Elem::Pair(Box::new(p.clone()), rho.with_labels(labels)))
}

fn proj_lookup(c: &TCollection) -> impl Fn(usize, &Elem) -> Option<Shape> + '_ {
    move |h, e| c.find_elem(h, e).map(|i| c.proj[h][i].clone())
}

/// Checks the associator `(P1∘P2)∘P3 ≅ P1∘(P2∘P3)` at a bound, all composites bounded.
/// Cells whose counterpart has an intermediate composite past the bound are counted as outside.
pub fn associator_witness(p1: &TCollection, p2: &TCollection, p3: &TCollection, bound: Option<usize>) -> Result<IsoReport> {
    let right = compose_collections(p1, &compose_collections(p2, p3, bound)?, bound)?;
    let left = compose_collections(&compose_collections(p1, p2, bound)?, p3, bound)?;
    let (proj2, proj3) = (proj_lookup(p2), proj_lookup(p3));
    let fwd = |c: CellRef| {
        let Some(e) = rebracket(&right.elem(c)) else { return Image::Missing };
        if let Some(j) = left.find_elem(c.dim, &e) {
            return Image::In(j);
        }
        let inner = e.split().and_then(|(i, _)| i.split()).and_then(|(_, rho)| pair_proj(rho, &proj2));
        match inner {
            Some(y) if !edges_ok(&y, bound) => Image::Outside,
            _ => Image::Missing,
        }
    };
    let bwd = |c: CellRef| {
        let Some(e) = unrebracket(&left.elem(c), &proj2) else { return Image::Missing };
        if let Some(i) = right.find_elem(c.dim, &e) {
            return Image::In(i);
        }
        let Some((_, omega)) = e.split() else { return Image::Missing };
        let past = omega.labels().into_iter().any(|(_, l)| {
            l.split().and_then(|(_, s)| pair_proj(s, &proj3)).is_some_and(|y| !edges_ok(&y, bound))
        });
        if past {
            Image::Outside
        } else {
            Image::Missing
        }
    };
    Ok(check_partial_iso(&right, &left, &fwd, &bwd))
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PentagonReport {
    pub instances: usize,
    /// Both routes stayed inside the bound and were compared.
    pub checked: usize,
    pub skipped: usize,
    pub route_failures: usize,
    pub disagreements: usize,
}

impl PentagonReport {
    pub fn ok(&self) -> bool {
        self.route_failures == 0 && self.disagreements == 0 && self.checked > 0
    }
}

/// Both re-bracketings `P∘(P∘(P∘P)) → ((P∘P)∘P)∘P` agree, every composite bounded.
pub fn pentagon(p: &TCollection, bound: Option<usize>) -> Result<PentagonReport> {
    let c = |a: &TCollection, b: &TCollection| compose_collections(a, b, bound);
    let pp = c(p, p)?;
    let ppp_r = c(p, &pp)?;
    let ppp_l = c(&pp, p)?;
    let src = c(p, &ppp_r)?;
    let y1 = c(&pp, &pp)?;
    let w1 = c(p, &ppp_l)?;
    let w2 = c(&ppp_r, p)?;
    let target = c(&ppp_l, p)?;
    enum Step {
        Done(Elem),
        Outside,
        Broken,
    }
    let step = |x: Option<Elem>, into: &TCollection, d: usize| match x {
        None => Step::Broken,
        Some(e) if into.find_elem(d, &e).is_some() => Step::Done(e),
        Some(_) => Step::Outside,
    };
    let then = |s: Step, f: &dyn Fn(Elem) -> Step| match s {
        Step::Done(e) => f(e),
        other => other,
    };
    let mut rep = PentagonReport::default();
    for cell in src.cells() {
        rep.instances += 1;
        let e = src.elem(cell);
        let d = cell.dim;
        let route_a = then(step(rebracket(&e), &y1, d), &|x| step(rebracket(&x), &target, d));
        let route_b = then(step(relabel(&e, &rebracket), &w1, d), &|x| {
            then(step(rebracket(&x), &w2, d), &|y| step(first(&y, &rebracket), &target, d))
        });
        match (route_a, route_b) {
            (Step::Done(a), Step::Done(b)) => {
                rep.checked += 1;
                if a != b {
                    rep.disagreements += 1;
                }
            }
            (Step::Broken, _) | (_, Step::Broken) => rep.route_failures += 1,
            _ => rep.skipped += 1,
        }
    }
    Ok(rep)
}

/// `f ∘ 1` on a pair: acts on the first component.
fn first(e: &Elem, f: &dyn Fn(&Elem) -> Option<Elem>) -> Option<Elem> {
    let (a, s) = e.split()?;
    Some(Elem::Pair(Box::new(f(a)?), s.clone()))
}

/// `1 ∘ f` on a pair: acts on every label.
fn relabel(e: &Elem, f: &dyn Fn(&Elem) -> Option<Elem>) -> Option<Elem> {
    let (a, s) = e.split()?;
    let t = s.try_map(|_, l| f(l).ok_or_else(|| Error::Domain(String::new()))).ok()?;
    Some(Elem::Pair(Box::new(a.clone()), t))
}

/// A graded equivalence relation on a carrier, one union-find per dimension.
#[derive(Clone, Debug)]
pub struct Congruence {
    uf: Vec<UnionFind<usize>>,
    sizes: Vec<usize>,
}

impl Congruence {
    pub fn diagonal(sizes: &[usize]) -> Congruence {
        Congruence { uf: sizes.iter().map(|&n| UnionFind::new(n)).collect(), sizes: sizes.to_vec() }
    }

    pub fn union(&mut self, dim: usize, a: usize, b: usize) -> bool {
        self.uf[dim].union(a, b)
    }

    pub fn find(&mut self, dim: usize, a: usize) -> usize {
        self.uf[dim].find_mut(a)
    }

    pub fn same(&mut self, dim: usize, a: usize, b: usize) -> bool {
        self.find(dim, a) == self.find(dim, b)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Class number of every cell, classes numbered by first member.
    pub fn class_index(&mut self, dim: usize) -> (Vec<usize>, usize) {
        let mut rep_to_class = HashMap::new();
        let mut out = Vec::with_capacity(self.sizes[dim]);
        for i in 0..self.sizes[dim] {
            let r = self.find(dim, i);
            let k = rep_to_class.len();
            out.push(*rep_to_class.entry(r).or_insert(k));
        }
        (out, rep_to_class.len())
    }

    pub fn class_count(&mut self, dim: usize) -> usize {
        self.class_index(dim).1
    }

    /// Merges boundaries of related cells until the relation is globular.
    pub fn close_boundaries(&mut self, c: &TCollection) -> bool {
        let mut any = false;
        loop {
            let mut changed = false;
            for d in (1..self.sizes.len()).rev() {
                let mut first: HashMap<usize, CellRef> = HashMap::new();
                for i in 0..self.sizes[d] {
                    let r = self.find(d, i);
                    let x = CellRef::new(d, i);
                    match first.get(&r) {
                        None => {
                            first.insert(r, x);
                        }
                        Some(&y) => {
                            changed |= self.union(d - 1, c.src(x), c.src(y));
                            changed |= self.union(d - 1, c.tgt(x), c.tgt(y));
                        }
                    }
                }
            }
            if !changed {
                return any;
            }
            any = true;
        }
    }
}

/// Relates cells with equal projection.
pub fn fibre_congruence(c: &TCollection) -> Congruence {
    let mut e = Congruence::diagonal(&c.carrier.sizes());
    for d in 0..=c.max_dim() {
        for v in c.fibres(d).into_values() {
            for w in v.windows(2) {
                e.union(d, w[0], w[1]);
            }
        }
    }
    e
}

/// Checks that a congruence is globular and preserves projections.
pub fn check_collection_congruence(c: &TCollection, e: &mut Congruence) -> Result<()> {
    for d in 0..=c.max_dim() {
        let mut first: HashMap<usize, usize> = HashMap::new();
        for i in 0..c.count(d) {
            let r = e.find(d, i);
            let j = *first.entry(r).or_insert(i);
            if c.proj[d][i] != c.proj[d][j] {
                return domain(format!("congruence relates cells with different projections (clause: projection) at dimension {d}"));
            }
            if d > 0 {
                let (x, y) = (CellRef::new(d, i), CellRef::new(d, j));
                if !e.same(d - 1, c.src(x), c.src(y)) || !e.same(d - 1, c.tgt(x), c.tgt(y)) {
                    return domain(format!("congruence is not closed under boundaries (clause: c-st) at dimension {d}"));
                }
            }
        }
    }
    Ok(())
}

/// The quotient collection and the quotient map.
pub fn quotient_collection(c: &Arc<TCollection>, e: &mut Congruence) -> Result<(Arc<TCollection>, CollectionMorphism)> {
    check_collection_congruence(c, e)?;
    let n = c.max_dim();
    let mut maps = Vec::new();
    let mut names = Vec::new();
    let mut proj = Vec::new();
    let mut src = vec![Vec::new(); n + 1];
    let mut tgt = vec![Vec::new(); n + 1];
    for d in 0..=n {
        let (idx, k) = e.class_index(d);
        let mut reps = vec![usize::MAX; k];
        for (i, &cl) in idx.iter().enumerate() {
            if reps[cl] == usize::MAX {
                reps[cl] = i;
            }
        }
        names.push(reps.iter().map(|&i| format!("[{}]", c.carrier.name(CellRef::new(d, i)))).collect());
        proj.push(reps.iter().map(|&i| c.proj[d][i].clone()).collect());
        if d > 0 {
            let below: &Vec<usize> = &maps[d - 1];
            for &i in &reps {
                let x = CellRef::new(d, i);
                src[d].push(below[c.src(x)]);
                tgt[d].push(below[c.tgt(x)]);
            }
        }
        maps.push(idx);
    }
    let set = GlobularSet::from_tables(n, names, src, tgt)?;
    let q = Arc::new(TCollection::new(&format!("{}/~", c.name), c.mode, Arc::new(set), proj)?);
    let m = CollectionMorphism::new(c.clone(), q.clone(), maps)?;
    Ok((q, m))
}

/// `x ~ y` iff `φ x ~ φ y`.
pub fn induced_congruence(phi: &CollectionMorphism, e: &mut Congruence) -> Congruence {
    let dom = &phi.dom;
    let mut out = Congruence::diagonal(&dom.carrier.sizes());
    for d in 0..=dom.max_dim() {
        let mut first: HashMap<usize, usize> = HashMap::new();
        for i in 0..dom.count(d) {
            let r = e.find(d, phi.apply(CellRef::new(d, i)).idx);
            let j = *first.entry(r).or_insert(i);
            out.union(d, i, j);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::globular::theta_set;

    fn t(s: &str, d: usize) -> Shape {
        DecoratedTree::parse(s, Some(d)).unwrap()
    }

    fn theta_coll() -> TCollection {
        let q = Arc::new(theta_set());
        let proj = vec![vec![t("()", 0); 2], vec![t("(())", 1); 2], vec![t("((()))", 2)]];
        TCollection::new("theta", Mode::Involutive, q, proj).unwrap()
    }

    #[test]
    fn terminal_collection_counts() {
        let c = terminal_collection(1, 2, Mode::Strict).unwrap();
        assert_eq!(c.carrier.sizes(), vec![1, 3]);
        let c = terminal_collection(1, 2, Mode::Involutive).unwrap();
        // paths of length 0, 1, 2 with orientation bits per edge
        assert_eq!(c.carrier.sizes(), vec![1, 1 + 2 + 4]);
    }

    #[test]
    fn par_triples() {
        let c = terminal_collection(1, 2, Mode::Strict).unwrap();
        let p = par_set(&c, 1, 2).unwrap();
        assert_eq!(p.len(), 3);
        assert!(par_set(&TCollection::empty(2, Mode::Strict), 1, 2).unwrap().is_empty());
        let th = theta_coll();
        let p2 = par_set(&th, 2, 2).unwrap();
        let g = th.carrier.find("g").unwrap().idx;
        let f = th.carrier.find("f").unwrap().idx;
        assert!(p2.contains(&ParTriple { dim: 2, plus: g, shape: t("((()))", 2), minus: f }));
        assert!(par_set(&th, 0, 1).is_err());
    }

    #[test]
    fn terminal_contraction_valid_and_swap_caught() {
        let c = terminal_collection(2, 3, Mode::Involutive).unwrap();
        let mut kappa = Contraction::new();
        let mut swapped = Contraction::new();
        for n in 1..=2 {
            for tr in par_set(&c, n, 3).unwrap() {
                let k = c.proj[n].iter().position(|y| *y == tr.shape).unwrap();
                kappa.insert(tr.clone(), k);
                let mirrored = tr.shape.involute(n - 1);
                let k2 = c.proj[n].iter().position(|y| *y == mirrored).unwrap();
                swapped.insert(tr, k2);
            }
        }
        assert!(validate_contraction(&c, &kappa, 3).unwrap().ok());
        let bad = validate_contraction(&c, &swapped, 3).unwrap();
        // mirroring the top level changes the shape but never the boundary trees
        let fixed = swapped.keys().filter(|t| t.shape.involute(t.dim - 1) == t.shape).count();
        assert_eq!(bad.count("projection"), swapped.len() - fixed);
        assert_eq!(bad.count("source") + bad.count("target"), 0);
        let mut partial = kappa.clone();
        let k = partial.keys().next().unwrap().clone();
        partial.remove(&k);
        assert_eq!(validate_contraction(&c, &partial, 3).unwrap().count("incomplete"), 1);
    }

    #[test]
    fn theta_contraction_boundaries() {
        let th = theta_coll();
        let y = t("((()))", 2);
        let trips: Vec<ParTriple> = par_set(&th, 2, 2).unwrap().into_iter().filter(|tr| tr.shape == y).collect();
        assert_eq!(trips.len(), 4);
        let kappa: Contraction = trips.into_iter().map(|t| (t, 0)).collect();
        let rep = validate_contraction(&th, &kappa, 2).unwrap();
        // alpha only fits (g, y, f); the swapped triple fails twice, the loops once each
        assert_eq!((rep.count("source"), rep.count("target")), (2, 2));
        assert_eq!(rep.count("projection"), 0);
    }

    #[test]
    fn pushforward_to_terminal() {
        let th = Arc::new(theta_coll());
        let term = Arc::new(terminal_collection(2, 2, Mode::Involutive).unwrap());
        let maps = (0..=2)
            .map(|d| (0..th.count(d)).map(|i| term.proj[d].iter().position(|y| y == &th.proj[d][i]).unwrap()).collect())
            .collect();
        let phi = CollectionMorphism::new(th.clone(), term.clone(), maps).unwrap();
        let trip = par_set(&th, 2, 1).unwrap();
        for (a, b) in trip.iter().zip(par_pushforward(&phi, &trip)) {
            assert_eq!(&term.proj[1][b.plus], &th.proj[1][a.plus]);
            assert_eq!(a.shape, b.shape);
        }
        assert!(par_pushforward(&phi, &[]).is_empty());
    }

    #[test]
    fn grafting_projection() {
        let term = terminal_collection(1, 3, Mode::Strict).unwrap();
        let c = compose_collections(&term, &term, Some(4)).unwrap();
        let edges = |e: &Elem| match e {
            Elem::Atom(j) => term.proj[1][*j].edges(),
            _ => unreachable!(),
        };
        let mut seen = false;
        for i in 0..c.count(1) {
            let Elem::Pair(a, tau) = c.elem(CellRef::new(1, i)) else { unreachable!() };
            let tops: Vec<usize> = tau.labels().into_iter().filter(|(h, _)| *h == 1).map(|(_, e)| edges(e)).collect();
            assert_eq!(tops.len(), edges(&a));
            assert_eq!(c.proj[1][i].edges(), tops.iter().sum::<usize>());
            seen |= tops == vec![1, 3];
        }
        assert!(seen);
        assert!(compose_collections(&term, &term, Some(2)).unwrap().proj[1].iter().all(|y| y.edges() <= 2));
    }

    #[test]
    fn unitors_and_associator() {
        let term = terminal_collection(2, 2, Mode::Involutive).unwrap();
        let l = left_unitor(&term).unwrap();
        assert!(l.ok(), "{l:?}");
        assert!(l.is_total(), "{l:?}");
        let r = right_unitor(&term, Some(1)).unwrap();
        assert!(r.ok() && r.outside > 0, "{r:?}");
        let id = unit_coll(&term).unwrap();
        let a = associator_witness(&id, &id, &id, None).unwrap();
        assert!(a.is_total() && a.domain_size == id.carrier.total_cells());
        let small = terminal_collection(1, 2, Mode::Strict).unwrap();
        let a = associator_witness(&small, &small, &small, Some(2)).unwrap();
        assert!(a.ok(), "{a:?}");
        let p = pentagon(&small, Some(2)).unwrap();
        assert!(p.ok(), "{p:?}");
    }

    #[test]
    fn quotients() {
        let th = Arc::new(theta_coll());
        let mut diag = Congruence::diagonal(&th.carrier.sizes());
        let (q, _) = quotient_collection(&th, &mut diag).unwrap();
        assert_eq!(q.carrier.sizes(), th.carrier.sizes());
        let mut fib = fibre_congruence(&th);
        let (q, m) = quotient_collection(&th, &mut fib).unwrap();
        assert_eq!(q.carrier.sizes(), vec![1, 1, 1]);
        assert_eq!(m.apply(th.carrier.find("f").unwrap()), m.apply(th.carrier.find("g").unwrap()));
        // two loops on different points: merging them forces the points together
        let loops = GlobularSet::from_tables(
            1,
            vec![vec!["a".into(), "b".into()], vec!["f".into(), "h".into()]],
            vec![vec![], vec![0, 1]],
            vec![vec![], vec![0, 1]],
        )
        .unwrap();
        let lc = Arc::new(TCollection::new("loops", Mode::Strict, Arc::new(loops), vec![vec![t("()", 0); 2], vec![t("(())", 1); 2]]).unwrap());
        let mut bad = Congruence::diagonal(&lc.carrier.sizes());
        bad.union(1, 0, 1);
        let err = quotient_collection(&lc, &mut bad).unwrap_err();
        assert!(err.to_string().contains("c-st"));
        assert!(bad.close_boundaries(&lc));
        assert_eq!(quotient_collection(&lc, &mut bad).unwrap().0.carrier.sizes(), vec![1, 1]);
    }

    #[test]
    fn induced_kernel() {
        let th = Arc::new(theta_coll());
        let term = Arc::new(terminal_collection(2, 2, Mode::Involutive).unwrap());
        let maps = (0..=2)
            .map(|d| (0..th.count(d)).map(|i| term.proj[d].iter().position(|y| y == &th.proj[d][i]).unwrap()).collect())
            .collect();
        let phi = CollectionMorphism::new(th.clone(), term.clone(), maps).unwrap();
        let mut diag = Congruence::diagonal(&term.carrier.sizes());
        let mut k = induced_congruence(&phi, &mut diag);
        let mut fib = fibre_congruence(&th);
        for d in 0..=2 {
            for i in 0..th.count(d) {
                for j in 0..th.count(d) {
                    assert_eq!(k.same(d, i, j), fib.same(d, i, j));
                }
            }
        }
    }
}
