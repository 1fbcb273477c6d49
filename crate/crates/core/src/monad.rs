//! The free strict (involutive) globular ω-category monads on normal forms.
//!
//! A cell of `T(Q)` is a pasting labelled by cells of `Q`; a cell of `T(T(Q))`
//! is a pasting labelled by such pastings. Multiplication substitutes the
//! inner cells into the outer term and renormalizes.

use std::collections::{HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::globular::{CellRef, GlobularMorphism, GlobularSet, Side};
use crate::normalizer::{eval, eval_exact, normalize, readback, readback_cells, CanonicalForm};
use crate::pasting::{all_trees, check_labels, labelings, random_labeling, has_bit, DecoratedTree, Node, Pasting};
use crate::term::{Generators, Mode, PastingGens, Term};

/// A cell of the free (involutive) ω-category on `base`, in normal form.
#[derive(Clone, Debug)]
pub struct FreeCell {
    pub base: Arc<GlobularSet>,
    pub mode: Mode,
    pub nf: CanonicalForm,
}

impl PartialEq for FreeCell {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode && self.nf == other.nf && *self.base == *other.base
    }
}

impl FreeCell {
    pub fn from_term(base: &Arc<GlobularSet>, mode: Mode, t: &Term<CellRef>) -> Result<FreeCell> {
        let nf = normalize(t, mode, base)?;
        if nf.pasting.dim > base.max_dim() {
            return Err(Error::Resource(format!("cell of dimension {} past the truncation {}", nf.pasting.dim, base.max_dim())));
        }
        Ok(FreeCell { base: base.clone(), mode, nf })
    }

    /// Wraps a labelled pasting after checking it against the base set.
    pub fn from_pasting(base: &Arc<GlobularSet>, mode: Mode, p: Pasting<usize>) -> Result<FreeCell> {
        if p.dim > base.max_dim() {
            return Err(Error::Resource(format!("cell of dimension {} past the truncation {}", p.dim, base.max_dim())));
        }
        check_pasting(base, mode, &p)?;
        let term = readback_cells(&p);
        Ok(FreeCell { base: base.clone(), mode, nf: CanonicalForm { term, pasting: p } })
    }

    pub fn dim(&self) -> usize {
        self.nf.pasting.dim
    }

    pub fn term(&self) -> &Term<CellRef> {
        &self.nf.term
    }

    pub fn pasting(&self) -> &Pasting<usize> {
        &self.nf.pasting
    }
}

/// Checks labels and decorations of a pasting over `q`.
pub fn check_pasting(q: &GlobularSet, mode: Mode, p: &Pasting<usize>) -> Result<()> {
    if !mode.involutive() && p.is_decorated() {
        return domain("decorated pasting in strict mode");
    }
    check_labels(p, &|h| if h <= q.max_dim() { q.count(h) } else { 0 }, &|h, g| {
        let c = CellRef::new(h, g);
        (q.src(c), q.tgt(c))
    })
}

/// The candidate function for labelling shapes with cells of `q`.
pub fn set_candidates(q: &GlobularSet) -> impl Fn(usize, Option<(usize, usize)>) -> Vec<usize> + '_ {
    move |h, req| {
        if h > q.max_dim() {
            return Vec::new();
        }
        match req {
            None => (0..q.count(h)).collect(),
            Some((s, t)) => q.cells_between(h, s, t),
        }
    }
}

/// The globe on a cell of `q`.
pub fn eta_pasting(q: &GlobularSet, x: CellRef) -> Result<Pasting<usize>> {
    q.gen_pasting(&x)
}

/// The globe on a cell of `T(Q)`: its iterated boundaries label the lower gaps.
pub fn eta_free<L: Clone>(c: &Pasting<L>) -> Result<Pasting<Pasting<L>>> {
    let mut err = None;
    let g = Pasting::globe(c.dim, |k, side| {
        c.iterated_boundary(k, side).unwrap_or_else(|e| {
            err = Some(e);
            c.clone()
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(g),
    }
}

pub fn unit_embed(q: &Arc<GlobularSet>, x: CellRef, mode: Mode) -> Result<FreeCell> {
    if !q.contains(x) {
        return domain(format!("{x:?} is not a cell of the base set"));
    }
    FreeCell::from_pasting(q, mode, eta_pasting(q, x)?)
}

/// `T(φ)`: relabel generators along `φ` and renormalize.
pub fn functor_apply(phi: &GlobularMorphism, mode: Mode, c: &FreeCell) -> Result<FreeCell> {
    if *phi.domain != *c.base {
        return domain("morphism domain is not the cell's base");
    }
    let t = c.term().map_gens(&mut |g| phi.apply(*g));
    FreeCell::from_term(&phi.codomain, mode, &t)
}

/// The arity of a cell: its image in the free category on the terminal set.
pub fn shape_of(c: &FreeCell) -> Result<FreeCell> {
    let phi = GlobularMorphism::to_terminal(c.base.clone());
    functor_apply(&phi, c.mode, c)
}

/// Substitutes terms for generators.
pub fn join<G: Clone>(t: &Term<Term<G>>) -> Term<G> {
    match t {
        Term::Gen(g) => g.clone(),
        Term::Id(a) => Term::Id(Box::new(join(a))),
        Term::Comp(p, l, r) => Term::Comp(*p, Box::new(join(l)), Box::new(join(r))),
        Term::Inv(q, a) => Term::Inv(*q, Box::new(join(a))),
    }
}

/// `μ`: a staged cell whose generators are cells of `T(Q)` is flattened by
/// substituting each generator's canonical term and renormalizing.
pub fn multiply_flatten(q: &Arc<GlobularSet>, mode: Mode, outer: &Pasting<Pasting<usize>>) -> Result<FreeCell> {
    if outer.dim > q.max_dim() {
        return Err(Error::Resource(format!("flattened cell of dimension {} past the truncation {}", outer.dim, q.max_dim())));
    }
    let staged: Term<Term<CellRef>> = readback(outer, &mut |_, p: &Pasting<usize>| readback_cells(p));
    FreeCell::from_term(q, mode, &join(&staged))
}

/// Flattening by direct evaluation of the outer term on the inner pastings,
/// at any label type.
pub fn flatten<L>(outer: &Pasting<Pasting<L>>) -> Result<Pasting<L>>
where
    L: Clone + Eq + Hash + Ord + Debug,
{
    let t = readback(outer, &mut |_, p: &Pasting<L>| p.clone());
    eval_exact(&t, &PastingGens::<L>::default())
}

/// Cuts `sigma` into pieces along an outer pasting of shapes, so that flattening
/// the result gives back `sigma`. Lower gaps get the boundaries of their neighbours.
pub fn split<L: Clone + PartialEq>(shapes: &Pasting<DecoratedTree>, sigma: &Pasting<L>) -> Result<Pasting<Pasting<L>>> {
    let mut next = 0usize;
    let vars: Pasting<Pasting<usize>> = shapes.map(|_, y| {
        y.map(|_, _| {
            next += 1;
            next - 1
        })
    });
    let mut uf = UnionFind::new(next);
    let t = readback(&vars, &mut |_, p: &Pasting<usize>| p.clone());
    let flat = eval(&t, &PastingGens::<usize>::default(), &mut |a, b| {
        uf.union(*a, *b);
        true
    })?;
    if flat.shape() != sigma.shape() {
        return domain("pasting does not have the flattened shape");
    }
    let mut val: Vec<Option<L>> = vec![None; next];
    for ((_, v), (_, x)) in flat.labels().into_iter().zip(sigma.labels()) {
        let r = uf.find_mut(*v);
        match &val[r] {
            Some(y) if y != x => return domain("pasting labels disagree on a shared boundary"),
            _ => val[r] = Some(x.clone()),
        }
    }
    fn go<L: Clone>(
        n: &Node<Pasting<usize>>,
        h: usize,
        uf: &mut UnionFind<usize>,
        val: &[Option<L>],
    ) -> Result<Node<Pasting<L>>> {
        if n.children.is_empty() {
            let piece = n.gaps[0].try_map(|_, v| {
                val[uf.find_mut(*v)].clone().ok_or_else(|| Error::Domain("piece label left unassigned".into()))
            })?;
            return Ok(Node { dec: n.dec, gaps: vec![piece], children: Vec::new() });
        }
        let children = n.children.iter().map(|c| go(c, h + 1, uf, val)).collect::<Result<Vec<_>>>()?;
        // a child's gaps share their raw boundary, flipped by the child's bit at this height
        let bd = |c: &Node<Pasting<L>>, side: Side| {
            let side = if has_bit(c.dec, h) { side.flip() } else { side };
            c.gaps[0].boundary(side)
        };
        let mut gaps = Vec::with_capacity(children.len() + 1);
        for c in &children {
            gaps.push(bd(c, Side::Source)?);
        }
        gaps.push(bd(children.last().unwrap(), Side::Target)?);
        Ok(Node { dec: n.dec, gaps, children })
    }
    Ok(Pasting { dim: shapes.dim, root: go(&vars.root, 0, &mut uf, &val)? })
}

/// The decorated tree of a cell over the terminal set.
pub fn tree_encode(c: &FreeCell) -> Result<DecoratedTree> {
    if !c.base.is_terminal() {
        return domain("tree encoding needs a cell over the terminal set");
    }
    Ok(c.pasting().shape())
}

pub fn tree_decode(t: &DecoratedTree, mode: Mode) -> Result<FreeCell> {
    t.check_tree()?;
    if !mode.involutive() && t.is_decorated() {
        return domain("decorated tree in strict mode");
    }
    let base = Arc::new(crate::globular::terminal_set(t.dim));
    let term = readback(t, &mut |h, _| CellRef::new(h, 0));
    FreeCell::from_term(&base, mode, &term)
}

/// All cells of `T(Q)` whose pastings have at most `max_edges` edges, as a
/// globular set closed under boundaries.
#[derive(Clone, Debug)]
pub struct FreeSet {
    pub set: GlobularSet,
    pub cells: Vec<Vec<Pasting<usize>>>,
    index: HashMap<Pasting<usize>, usize>,
}

impl FreeSet {
    pub fn build(q: &GlobularSet, mode: Mode, max_edges: usize, limit: usize) -> Result<FreeSet> {
        let n = q.max_dim();
        let cands = set_candidates(q);
        let mut cells: Vec<Vec<Pasting<usize>>> = vec![Vec::new(); n + 1];
        let mut total = 0;
        for (d, out) in cells.iter_mut().enumerate() {
            for shape in all_trees(d, max_edges, mode.involutive()) {
                let ls = labelings(&shape, &cands, limit.saturating_sub(total) + 1)?;
                total += ls.len();
                if total > limit {
                    return Err(Error::Resource(format!("more than {limit} cells in the bounded free set")));
                }
                out.extend(ls);
            }
        }
        let index: HashMap<Pasting<usize>, usize> =
            cells.iter().flat_map(|v| v.iter().enumerate().map(|(i, p)| (p.clone(), i))).collect();
        let mut src = vec![Vec::new(); n + 1];
        let mut tgt = vec![Vec::new(); n + 1];
        for d in 1..=n {
            for p in &cells[d] {
                src[d].push(index[&p.boundary(Side::Source)?]);
                tgt[d].push(index[&p.boundary(Side::Target)?]);
            }
        }
        let names = cells
            .iter()
            .map(|v| {
                v.iter()
                    .map(|p| readback_cells(p).to_sexp(&|c: &CellRef| q.name(*c).to_string()))
                    .collect()
            })
            .collect();
        let set = GlobularSet::from_tables(n, names, src, tgt)?;
        Ok(FreeSet { set, cells, index })
    }

    pub fn find(&self, p: &Pasting<usize>) -> Option<CellRef> {
        self.index.get(p).map(|&i| CellRef::new(p.dim, i))
    }

    pub fn cell(&self, c: CellRef) -> &Pasting<usize> {
        &self.cells[c.dim][c.idx]
    }

    /// Replaces indices into this set by the pastings they name.
    pub fn expand(&self, p: &Pasting<usize>) -> Pasting<Pasting<usize>> {
        p.map(|h, &i| self.cells[h][i].clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SampleSpec {
    pub seed: u64,
    pub count: usize,
    /// Edge bound for cells of `T(Q)` used as generators.
    pub inner_edges: usize,
    /// Edge bound for the outer pastings.
    pub outer_edges: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { seed: 0, count: 200, inner_edges: 2, outer_edges: 3 }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LawReport {
    pub samples: usize,
    pub left_unit_failures: usize,
    pub right_unit_failures: usize,
    pub associativity_failures: usize,
    pub counterexamples: Vec<String>,
}

impl LawReport {
    pub fn failures(&self) -> usize {
        self.left_unit_failures + self.right_unit_failures + self.associativity_failures
    }

    fn fail(&mut self, what: &str, detail: String) {
        if self.counterexamples.len() < 10 {
            self.counterexamples.push(format!("{what}: {detail}"));
        }
    }
}

fn random_cell<R: Rng>(q: &GlobularSet, mode: Mode, max_edges: usize, rng: &mut R) -> Option<Pasting<usize>> {
    let cands = set_candidates(q);
    for _ in 0..50 {
        let d = rng.gen_range(0..=q.max_dim());
        let shapes = all_trees(d, max_edges, mode.involutive());
        let shape = &shapes[rng.gen_range(0..shapes.len())];
        if let Some(p) = random_labeling(shape, &cands, rng, 10_000) {
            return Some(p);
        }
    }
    None
}

pub type Flatten<'a> = dyn Fn(&Pasting<Pasting<usize>>) -> Result<Pasting<usize>> + 'a;

pub fn check_monad_laws(q: &Arc<GlobularSet>, mode: Mode, spec: &SampleSpec) -> Result<LawReport> {
    let mu = |o: &Pasting<Pasting<usize>>| Ok(multiply_flatten(q, mode, o)?.nf.pasting);
    check_monad_laws_with(q, mode, spec, &mu)
}

/// The law check with an injectable multiplication on `T(T(Q)) → T(Q)`.
pub fn check_monad_laws_with(q: &Arc<GlobularSet>, mode: Mode, spec: &SampleSpec, mu: &Flatten<'_>) -> Result<LawReport> {
    let mut report = LawReport::default();
    if spec.count == 0 {
        return Ok(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let p1 = FreeSet::build(q, mode, spec.inner_edges, 200_000)?;
    let p2 = FreeSet::build(&p1.set, mode, spec.inner_edges.min(2), 200_000)?;
    for _ in 0..spec.count {
        let Some(c) = random_cell(q, mode, spec.outer_edges, &mut rng) else { continue };
        let Some(w) = random_cell(&p2.set, mode, spec.outer_edges.min(2), &mut rng) else { continue };
        report.samples += 1;
        let show = |p: &Pasting<usize>| readback_cells(p).to_sexp(&|x: &CellRef| q.name(*x).to_string());

        // μ ∘ η_T = id
        match mu(&eta_free(&c)?) {
            Ok(r) if r == c => {}
            r => {
                report.left_unit_failures += 1;
                report.fail("left unit", format!("{} -> {:?}", show(&c), r.map(|p| show(&p))));
            }
        }
        // μ ∘ T(η) = id
        let teta = c.try_map(|h, &x| eta_pasting(q, CellRef::new(h, x)))?;
        match mu(&teta) {
            Ok(r) if r == c => {}
            r => {
                report.right_unit_failures += 1;
                report.fail("right unit", format!("{} -> {:?}", show(&c), r.map(|p| show(&p))));
            }
        }
        // μ ∘ T(μ) = μ ∘ μ_T
        let lhs = w
            .try_map(|h, &i| {
                let inner = p2.cell(CellRef::new(h, i));
                mu(&p1.expand(inner))
            })
            .and_then(|o| mu(&o));
        let rhs = flatten(&w.map(|h, &i| p2.cell(CellRef::new(h, i)).clone())).and_then(|o| mu(&p1.expand(&o)));
        match (lhs, rhs) {
            (Ok(a), Ok(b)) if a == b => {}
            (a, b) => {
                report.associativity_failures += 1;
                report.fail(
                    "associativity",
                    format!("{} : {:?} vs {:?}", p2.set.name(CellRef::new(w.dim, 0)), a.map(|p| show(&p)), b.map(|p| show(&p))),
                );
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Square {
    Unit,
    Mult,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PullbackReport {
    pub domain_size: usize,
    pub pullback_size: usize,
    /// Competing cones with more than one factorization.
    pub non_unique: usize,
    /// Competing cones with no factorization.
    pub unfactored: usize,
    /// Domain elements whose image is not a cone (the square does not commute).
    pub outside: usize,
    pub examples: Vec<String>,
}

impl PullbackReport {
    pub fn is_pullback(&self) -> bool {
        self.non_unique == 0 && self.unfactored == 0 && self.outside == 0
    }
}

/// Checks that `compare` maps `domain` bijectively onto `cones`: every cone
/// factors through exactly one domain element.
pub fn is_pullback<A: Debug, B: Hash + Eq + Clone + Debug>(
    domain: impl IntoIterator<Item = A>,
    compare: impl Fn(&A) -> Result<B>,
    cones: &HashSet<B>,
) -> Result<PullbackReport> {
    let mut report = PullbackReport { pullback_size: cones.len(), ..Default::default() };
    let mut hits: HashMap<B, usize> = HashMap::new();
    for a in domain {
        report.domain_size += 1;
        let b = compare(&a)?;
        if !cones.contains(&b) {
            report.outside += 1;
            if report.examples.len() < 5 {
                report.examples.push(format!("image of {a:?} is not a cone"));
            }
            continue;
        }
        *hits.entry(b).or_default() += 1;
    }
    for b in cones {
        match hits.get(b).copied().unwrap_or(0) {
            1 => {}
            0 => {
                report.unfactored += 1;
                if report.examples.len() < 5 {
                    report.examples.push(format!("cone {b:?} has no factorization"));
                }
            }
            _ => {
                report.non_unique += 1;
                if report.examples.len() < 5 {
                    report.examples.push(format!("cone {b:?} factors more than once"));
                }
            }
        }
    }
    Ok(report)
}

fn all_cells(q: &GlobularSet) -> Vec<CellRef> {
    (0..=q.max_dim()).flat_map(|d| q.cells(d)).collect()
}

fn relabel(phi: &GlobularMorphism, p: &Pasting<usize>) -> Pasting<usize> {
    p.map(|h, &x| phi.apply(CellRef::new(h, x)).idx)
}

/// Pastings over `q` of the given shape grouped by their image under `T(φ)`.
struct Fibres<'a> {
    phi: &'a GlobularMorphism,
    cache: HashMap<DecoratedTree, HashMap<Pasting<usize>, Vec<Pasting<usize>>>>,
    limit: usize,
}

impl Fibres<'_> {
    fn over(&mut self, m: &Pasting<usize>) -> Result<Vec<Pasting<usize>>> {
        let shape = m.shape();
        if !self.cache.contains_key(&shape) {
            let q = &self.phi.domain;
            let cands = set_candidates(q);
            let mut groups: HashMap<Pasting<usize>, Vec<Pasting<usize>>> = HashMap::new();
            for c in labelings(&shape, &cands, self.limit)? {
                groups.entry(relabel(self.phi, &c)).or_default().push(c);
            }
            self.cache.insert(shape.clone(), groups);
        }
        Ok(self.cache[&shape].get(m).cloned().unwrap_or_default())
    }
}

/// Whether the naturality square of `η` or `μ` at `φ` is a pull-back, over
/// pastings with at most `bound` edges at each stage.
pub fn check_cartesian(square: Square, phi: &GlobularMorphism, mode: Mode, bound: usize) -> Result<PullbackReport> {
    let (q, r) = (&phi.domain, &phi.codomain);
    let limit = 2_000_000;
    match square {
        Square::Unit => {
            let e = bound.max(q.max_dim());
            let tq = FreeSet::build(q, mode, e, limit)?;
            let mut cones = HashSet::new();
            for y in all_cells(r) {
                let ey = eta_pasting(r, y)?;
                for c in &tq.cells[y.dim] {
                    if relabel(phi, c) == ey {
                        cones.insert((y, c.clone()));
                    }
                }
            }
            is_pullback(all_cells(q), |&x| Ok((phi.apply(x), eta_pasting(q, x)?)), &cones)
        }
        Square::Mult => {
            let fq = FreeSet::build(q, mode, bound, limit)?;
            let fr = FreeSet::build(r, mode, bound, limit)?;
            let tfq = FreeSet::build(&fq.set, mode, bound, limit)?;
            let tfr = FreeSet::build(&fr.set, mode, bound, limit)?;
            let mut fib = Fibres { phi, cache: HashMap::new(), limit };
            let mut cones = HashSet::new();
            for (d, cells) in tfr.cells.iter().enumerate() {
                for (i, w) in cells.iter().enumerate() {
                    let m = flatten(&fr.expand(w))?;
                    for c in fib.over(&m)? {
                        cones.insert((CellRef::new(d, i), c));
                    }
                }
            }
            // T(φ) on the bounded free sets, as a map of indices
            let tphi = |c: CellRef| -> Result<CellRef> {
                let img = relabel(phi, fq.cell(c));
                fr.find(&img).ok_or_else(|| Error::Domain("image of a bounded cell is not bounded".into()))
            };
            let domain: Vec<CellRef> = all_cells(&tfq.set);
            is_pullback(
                domain,
                |&w| {
                    let outer = tfq.cell(w);
                    let mapped = outer.try_map(|h, &i| Ok(tphi(CellRef::new(h, i))?.idx))?;
                    let wr = tfr.find(&mapped).ok_or_else(|| Error::Domain("image of a bounded cell is not bounded".into()))?;
                    Ok((wr, flatten(&fq.expand(outer))?))
                },
                &cones,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::globular::{terminal_set, theta_set};
    use crate::term::{comp, gen, inv};

    fn path(q: &GlobularSet, n: usize) -> Term<CellRef> {
        let f = gen(q.find("pt1").unwrap());
        (1..n).fold(f.clone(), |acc, _| comp(0, f.clone(), acc))
    }

    #[test]
    fn split_inverts_flatten() {
        for mode in [Mode::Strict, Mode::Involutive] {
            let fs = FreeSet::build(&theta_set(), mode, 2, 100_000).unwrap();
            let cands = set_candidates(&fs.set);
            let mut n = 0;
            for d in 0..=2 {
                for y in all_trees(d, 2, mode.involutive()) {
                    for w in labelings(&y, &cands, 100_000).unwrap() {
                        let outer = fs.expand(&w);
                        let flat = flatten(&outer).unwrap();
                        let shapes = outer.map(|_, p| p.shape());
                        assert_eq!(split(&shapes, &flat).unwrap(), outer);
                        n += 1;
                    }
                }
            }
            assert!(n > 30, "{n}");
        }
        let y = DecoratedTree::parse("(()())", Some(1)).unwrap();
        let shapes = Pasting::globe(1, |_, _| y.clone());
        assert!(split(&shapes, &DecoratedTree::unit(1)).is_err());
    }

    #[test]
    fn unit_is_injective_and_canonical() {
        let q = Arc::new(theta_set());
        let cells = all_cells(&q);
        let embedded: Vec<FreeCell> = cells.iter().map(|&x| unit_embed(&q, x, Mode::Involutive).unwrap()).collect();
        for (i, a) in embedded.iter().enumerate() {
            assert_eq!(normalize(a.term(), Mode::Involutive, &q).unwrap(), a.nf);
            for b in &embedded[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn flatten_paths() {
        let q = Arc::new(terminal_set(1));
        let one = FreeCell::from_term(&q, Mode::Strict, &path(&q, 1)).unwrap();
        let three = FreeCell::from_term(&q, Mode::Strict, &path(&q, 3)).unwrap();
        // a path of two generators, the first of length 1, the second of length 3
        let a = Pasting::globe(1, |k, s| if k == 1 { one.pasting().clone() } else { one.pasting().iterated_boundary(0, s).unwrap() });
        let b = Pasting::globe(1, |k, s| if k == 1 { three.pasting().clone() } else { three.pasting().iterated_boundary(0, s).unwrap() });
        let outer = Pasting::compose_eq(0, &a, &b).unwrap();
        let flat = multiply_flatten(&q, Mode::Strict, &outer).unwrap();
        assert_eq!(flat.term().generator_count(), 4);
        assert_eq!(flat.pasting().root.children.len(), 4);
        assert_eq!(flatten(&outer).unwrap(), flat.nf.pasting);
    }

    #[test]
    fn shapes() {
        let q = Arc::new(theta_set());
        let alpha = FreeCell::from_term(&q, Mode::Strict, &gen(q.find("alpha").unwrap())).unwrap();
        let s = shape_of(&alpha).unwrap();
        assert_eq!(tree_encode(&s).unwrap().to_string(), "((()))");
        assert_eq!(shape_of(&s).unwrap(), s);
        assert!(tree_encode(&alpha).is_err());
        let f = FreeCell::from_term(&q, Mode::Strict, &gen(q.find("f").unwrap())).unwrap();
        assert_eq!(tree_encode(&shape_of(&f).unwrap()).unwrap().to_string(), "(())");
    }

    #[test]
    fn codec_examples() {
        let t = Arc::new(terminal_set(2));
        let pt0 = FreeCell::from_term(&t, Mode::Involutive, &gen(CellRef::new(0, 0))).unwrap();
        assert_eq!(tree_encode(&pt0).unwrap().to_string(), "()");
        let p3 = FreeCell::from_term(&t, Mode::Strict, &path(&t, 3)).unwrap();
        assert_eq!(tree_encode(&p3).unwrap().to_string(), "(()()())");
        let r = FreeCell::from_term(&t, Mode::Involutive, &inv(0, gen(CellRef::new(1, 0)))).unwrap();
        assert_eq!(tree_encode(&r).unwrap().to_string(), "(({0}))");
        for c in [pt0, r] {
            let tree = tree_encode(&c).unwrap();
            assert_eq!(tree_encode(&tree_decode(&tree, Mode::Involutive).unwrap()).unwrap(), tree);
        }
        let two = DecoratedTree::parse("((())(()))", Some(2)).unwrap();
        let c = tree_decode(&two, Mode::Strict).unwrap();
        assert_eq!(c.term().generator_count(), 2);
        assert_eq!(c.dim(), 2);
        assert!(tree_decode(&DecoratedTree::parse("(({0}))", None).unwrap(), Mode::Strict).is_err());
    }

    #[test]
    fn laws_hold_and_corruption_is_caught() {
        let q = Arc::new(terminal_set(2));
        let spec = SampleSpec { seed: 7, count: 20, ..Default::default() };
        let rep = check_monad_laws(&q, Mode::Involutive, &spec).unwrap();
        assert_eq!(rep.failures(), 0, "{:?}", rep.counterexamples);
        assert!(rep.samples > 0);
        let bad = |o: &Pasting<Pasting<usize>>| Ok(flatten(o)?.involute(0));
        let rep = check_monad_laws_with(&q, Mode::Involutive, &spec, &bad).unwrap();
        assert!(rep.failures() > 0);
        let none = check_monad_laws(&q, Mode::Strict, &SampleSpec { count: 0, ..spec }).unwrap();
        assert_eq!(none.samples, 0);
    }

    #[test]
    fn unit_square_theta_to_terminal() {
        let q = Arc::new(theta_set());
        let phi = GlobularMorphism::to_terminal(q);
        let rep = check_cartesian(Square::Unit, &phi, Mode::Involutive, 3).unwrap();
        assert!(rep.is_pullback(), "{rep:?}");
        let rep = check_cartesian(Square::Mult, &phi, Mode::Strict, 1).unwrap();
        assert!(rep.is_pullback(), "{rep:?}");
    }

    #[test]
    fn wrong_square_is_rejected() {
        let q = terminal_set(1);
        let x = CellRef::new(1, 0);
        let cones: HashSet<(CellRef, Pasting<usize>)> = [(x, eta_pasting(&q, x).unwrap())].into_iter().collect();
        // legs swapped: the comparison sends the cell to a cone that is not there
        let rep = is_pullback([x], |&c| Ok((CellRef::new(0, 0), eta_pasting(&q, c)?)), &cones).unwrap();
        assert!(!rep.is_pullback());
        let rep = is_pullback([x, x], |&c| Ok((c, eta_pasting(&q, c)?)), &cones).unwrap();
        assert_eq!(rep.non_unique, 1);
    }
}
