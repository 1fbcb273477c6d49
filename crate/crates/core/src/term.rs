//! Terms of the free self-dual reflexive globular ω-magma over a globular set.

use std::fmt::Debug;
use std::hash::Hash;
use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::globular::{CellRef, GlobularSet, Side};
use crate::pasting::Pasting;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    #[serde(alias = "inv")]
    Involutive,
}

impl Mode {
    pub fn involutive(self) -> bool {
        self == Mode::Involutive
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "strict" => Some(Mode::Strict),
            "inv" | "involutive" => Some(Mode::Involutive),
            _ => None,
        }
    }
}

/// `Comp(p, l, r)` is `l ∘_p r`: the target of `r` meets the source of `l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term<G> {
    Gen(G),
    Id(Box<Term<G>>),
    Comp(usize, Box<Term<G>>, Box<Term<G>>),
    Inv(usize, Box<Term<G>>),
}

pub fn gen<G>(g: G) -> Term<G> {
    Term::Gen(g)
}

pub fn id<G>(t: Term<G>) -> Term<G> {
    Term::Id(Box::new(t))
}

pub fn comp<G>(p: usize, l: Term<G>, r: Term<G>) -> Term<G> {
    Term::Comp(p, Box::new(l), Box::new(r))
}

pub fn inv<G>(q: usize, t: Term<G>) -> Term<G> {
    Term::Inv(q, Box::new(t))
}

pub fn ids<G>(k: usize, mut t: Term<G>) -> Term<G> {
    for _ in 0..k {
        t = id(t);
    }
    t
}

/// A source of generators: their dimensions, boundaries and evaluated pastings.
pub trait Generators {
    type Gen: Clone + Eq + Hash + Ord + Debug;
    type Label: Clone + Eq + Hash + Debug;
    fn gen_dim(&self, g: &Self::Gen) -> Result<usize>;
    fn gen_boundary(&self, g: &Self::Gen, side: Side) -> Result<Self::Gen>;
    fn gen_pasting(&self, g: &Self::Gen) -> Result<Pasting<Self::Label>>;
}

impl Generators for GlobularSet {
    type Gen = CellRef;
    type Label = usize;

    fn gen_dim(&self, g: &CellRef) -> Result<usize> {
        if !self.contains(*g) {
            return domain(format!("generator {g:?} is not a cell of the base set"));
        }
        Ok(g.dim)
    }

    fn gen_boundary(&self, g: &CellRef, side: Side) -> Result<CellRef> {
        self.boundary(*g, side)
    }

    fn gen_pasting(&self, g: &CellRef) -> Result<Pasting<usize>> {
        self.gen_dim(g)?;
        Ok(Pasting::globe(g.dim, |k, side| {
            self.iterated_boundary(*g, g.dim - k, side).expect("boundary below the cell's dimension").idx
        }))
    }
}

/// Pastings used as generators of a second stage; evaluation substitutes them.
pub struct PastingGens<L>(PhantomData<L>);

impl<L> Default for PastingGens<L> {
    fn default() -> Self {
        PastingGens(PhantomData)
    }
}

impl<L: Clone + Eq + Hash + Ord + Debug> Generators for PastingGens<L> {
    type Gen = Pasting<L>;
    type Label = L;

    fn gen_dim(&self, g: &Pasting<L>) -> Result<usize> {
        Ok(g.dim)
    }

    fn gen_boundary(&self, g: &Pasting<L>, side: Side) -> Result<Pasting<L>> {
        g.boundary(side)
    }

    fn gen_pasting(&self, g: &Pasting<L>) -> Result<Pasting<L>> {
        Ok(g.clone())
    }
}

impl<G: Clone> Term<G> {
    /// Node count with identities free: generators, compositions and involutions count one each.
    pub fn size(&self) -> usize {
        match self {
            Term::Gen(_) => 1,
            Term::Id(t) => t.size(),
            Term::Comp(_, l, r) => 1 + l.size() + r.size(),
            Term::Inv(_, t) => 1 + t.size(),
        }
    }

    /// Total constructor count, identities included.
    pub fn nodes(&self) -> usize {
        match self {
            Term::Gen(_) => 1,
            Term::Id(t) | Term::Inv(_, t) => 1 + t.nodes(),
            Term::Comp(_, l, r) => 1 + l.nodes() + r.nodes(),
        }
    }

    pub fn generator_count(&self) -> usize {
        match self {
            Term::Gen(_) => 1,
            Term::Id(t) | Term::Inv(_, t) => t.generator_count(),
            Term::Comp(_, l, r) => l.generator_count() + r.generator_count(),
        }
    }

    pub fn has_inv(&self) -> bool {
        match self {
            Term::Gen(_) => false,
            Term::Inv(..) => true,
            Term::Id(t) => t.has_inv(),
            Term::Comp(_, l, r) => l.has_inv() || r.has_inv(),
        }
    }

    pub fn map_gens<H>(&self, f: &mut impl FnMut(&G) -> H) -> Term<H> {
        match self {
            Term::Gen(g) => Term::Gen(f(g)),
            Term::Id(t) => id(t.map_gens(f)),
            Term::Comp(p, l, r) => {
                let l = l.map_gens(f);
                comp(*p, l, r.map_gens(f))
            }
            Term::Inv(q, t) => inv(*q, t.map_gens(f)),
        }
    }

    pub fn dim<S: Generators<Gen = G>>(&self, sys: &S) -> Result<usize> {
        match self {
            Term::Gen(g) => sys.gen_dim(g),
            Term::Id(t) => Ok(t.dim(sys)? + 1),
            Term::Comp(p, l, r) => {
                let (a, b) = (l.dim(sys)?, r.dim(sys)?);
                if a != b {
                    return domain(format!("composite of a {a}-cell with a {b}-cell"));
                }
                if *p >= a {
                    return domain(format!("composition index {p} not below dimension {a}"));
                }
                Ok(a)
            }
            Term::Inv(_, t) => t.dim(sys),
        }
    }

    /// Subterm at a dotted path of child indices (`""` is the root).
    pub fn at_path(&self, path: &str) -> Option<&Term<G>> {
        let mut t = self;
        for part in path.split('.').filter(|s| !s.is_empty()) {
            let k: usize = part.parse().ok()?;
            t = match (t, k) {
                (Term::Id(a), 0) | (Term::Inv(_, a), 0) | (Term::Comp(_, a, _), 0) => a,
                (Term::Comp(_, _, b), 1) => b,
                _ => return None,
            };
        }
        Some(t)
    }

    pub fn replace_at(&self, path: &[usize], new: Term<G>) -> Term<G> {
        let Some((&k, rest)) = path.split_first() else { return new };
        match self {
            Term::Id(a) => id(a.replace_at(rest, new)),
            Term::Inv(q, a) => inv(*q, a.replace_at(rest, new)),
            Term::Comp(p, a, b) if k == 0 => comp(*p, a.replace_at(rest, new), (**b).clone()),
            Term::Comp(p, a, b) => comp(*p, (**a).clone(), b.replace_at(rest, new)),
            Term::Gen(_) => self.clone(),
        }
    }

    pub fn to_sexp(&self, name: &dyn Fn(&G) -> String) -> String {
        match self {
            Term::Gen(g) => format!("(gen {})", name(g)),
            Term::Id(t) => format!("(id {})", t.to_sexp(name)),
            Term::Comp(p, l, r) => format!("(comp {p} {} {})", l.to_sexp(name), r.to_sexp(name)),
            Term::Inv(q, t) => format!("(inv {q} {})", t.to_sexp(name)),
        }
    }
}

/// `Inv(q, t)`, grounded to `t` when `q ≥ dim(t)`.
pub fn inv_grounded<S: Generators>(sys: &S, q: usize, t: Term<S::Gen>) -> Result<Term<S::Gen>> {
    Ok(if q >= t.dim(sys)? { t } else { inv(q, t) })
}

pub fn dim_of<S: Generators>(t: &Term<S::Gen>, sys: &S) -> Result<usize> {
    t.dim(sys)
}

/// Structural source or target of a term.
pub fn boundary_of_term<S: Generators>(t: &Term<S::Gen>, side: Side, sys: &S) -> Result<Term<S::Gen>> {
    let n = t.dim(sys)?;
    if n == 0 {
        return domain("a 0-dimensional term has no boundary");
    }
    Ok(match t {
        Term::Gen(g) => Term::Gen(sys.gen_boundary(g, side)?),
        Term::Id(a) => (**a).clone(),
        Term::Comp(p, l, r) => {
            if *p == n - 1 {
                match side {
                    Side::Source => boundary_of_term(r, side, sys)?,
                    Side::Target => boundary_of_term(l, side, sys)?,
                }
            } else {
                comp(*p, boundary_of_term(l, side, sys)?, boundary_of_term(r, side, sys)?)
            }
        }
        Term::Inv(q, a) => {
            if *q >= n {
                boundary_of_term(a, side, sys)?
            } else if *q == n - 1 {
                boundary_of_term(a, side.flip(), sys)?
            } else {
                inv(*q, boundary_of_term(a, side, sys)?)
            }
        }
    })
}

pub fn iterated_term_boundary<S: Generators>(t: &Term<S::Gen>, k: usize, side: Side, sys: &S) -> Result<Term<S::Gen>> {
    let mut t = t.clone();
    for _ in 0..k {
        t = boundary_of_term(&t, side, sys)?;
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermViolation {
    pub path: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TermReport {
    pub violations: Vec<TermViolation>,
}

impl TermReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks generator membership, mode, dimensions, and every composite's boundary condition.
/// Boundaries are compared semantically, by equality of normal forms.
pub fn well_formed(t: &Term<CellRef>, q: &GlobularSet, mode: Mode) -> TermReport {
    let mut report = TermReport::default();
    fn go(t: &Term<CellRef>, q: &GlobularSet, mode: Mode, path: &str, rep: &mut TermReport) -> bool {
        let child = |k: usize| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
        let bad = |msg: String, rep: &mut TermReport| {
            rep.violations.push(TermViolation { path: path.to_string(), message: msg });
            false
        };
        match t {
            Term::Gen(c) => {
                if q.contains(*c) {
                    true
                } else {
                    bad(format!("generator {c:?} is not in the base set"), rep)
                }
            }
            Term::Id(a) => {
                if !go(a, q, mode, &child(0), rep) {
                    return false;
                }
                if a.dim(q).map_or(true, |d| d >= q.max_dim()) {
                    return bad("identity exceeds the truncation level".into(), rep);
                }
                true
            }
            Term::Inv(k, a) => {
                let ok = go(a, q, mode, &child(0), rep);
                if !mode.involutive() {
                    return bad(format!("involution {k} in strict mode"), rep);
                }
                ok
            }
            Term::Comp(p, l, r) => {
                let okl = go(l, q, mode, &child(0), rep);
                let okr = go(r, q, mode, &child(1), rep);
                if !(okl && okr) {
                    return false;
                }
                let (dl, dr) = (l.dim(q).unwrap(), r.dim(q).unwrap());
                if dl != dr {
                    return bad(format!("factors have dimensions {dl} and {dr}"), rep);
                }
                if *p >= dl {
                    return bad(format!("composition index {p} not below dimension {dl}"), rep);
                }
                let tr = iterated_term_boundary(r, dl - p, Side::Target, q);
                let sl = iterated_term_boundary(l, dl - p, Side::Source, q);
                match (tr, sl) {
                    (Ok(a), Ok(b)) => match crate::normalizer::equal_terms(&a, &b, mode, q) {
                        Ok(true) => true,
                        Ok(false) => bad(format!("{p}-target of the right factor differs from the {p}-source of the left"), rep),
                        Err(e) => bad(e.to_string(), rep),
                    },
                    (Err(e), _) | (_, Err(e)) => bad(e.to_string(), rep),
                }
            }
        }
    }
    go(t, q, mode, "", &mut report);
    report
}

/// Every well-formed term of dimension `dim` with at most `max_nodes` nodes (identities free),
/// each once, ordered by size and then by construction.
pub fn enumerate_terms(q: &GlobularSet, mode: Mode, max_nodes: usize, dim: usize) -> Result<Vec<Term<CellRef>>> {
    if dim > q.max_dim() {
        return domain("dimension above the truncation level");
    }
    let u = TermUniverse::build(q, mode, max_nodes, dim, usize::MAX)?;
    Ok(u.by_dim[dim].iter().flat_map(|v| v.iter().map(|(t, _)| t.clone())).collect())
}

/// Terms with their evaluated pastings, graded by dimension and size.
pub struct TermUniverse {
    pub by_dim: Vec<Vec<Vec<(Term<CellRef>, Pasting<usize>)>>>,
}

impl TermUniverse {
    pub fn build(q: &GlobularSet, mode: Mode, max_nodes: usize, top: usize, budget: usize) -> Result<TermUniverse> {
        let mut by_dim: Vec<Vec<Vec<(Term<CellRef>, Pasting<usize>)>>> = Vec::new();
        let mut total = 0usize;
        for d in 0..=top {
            let mut level: Vec<Vec<(Term<CellRef>, Pasting<usize>)>> = vec![Vec::new(); max_nodes + 1];
            for s in 1..=max_nodes {
                let mut here = Vec::new();
                if s == 1 {
                    for c in q.cells(d) {
                        here.push((gen(c), q.gen_pasting(&c)?));
                    }
                }
                if d > 0 {
                    for (t, p) in &by_dim[d - 1][s] {
                        here.push((id(t.clone()), p.identity()));
                    }
                }
                if mode.involutive() {
                    for k in 0..d {
                        for (t, p) in &level[s - 1] {
                            here.push((inv(k, t.clone()), p.involute(k)));
                        }
                    }
                }
                for p in 0..d {
                    for sl in 1..s.saturating_sub(1) {
                        let sr = s - 1 - sl;
                        for (lt, lp) in &level[sl] {
                            for (rt, rp) in &level[sr] {
                                if let Ok(c) = Pasting::compose_eq(p, lp, rp) {
                                    here.push((comp(p, lt.clone(), rt.clone()), c));
                                }
                            }
                        }
                    }
                }
                total += here.len();
                if total > budget {
                    return Err(crate::error::Error::Resource(format!("term universe larger than {budget}")));
                }
                level[s] = here;
            }
            by_dim.push(level);
        }
        Ok(TermUniverse { by_dim })
    }

    pub fn terms(&self, dim: usize) -> impl Iterator<Item = &(Term<CellRef>, Pasting<usize>)> {
        self.by_dim[dim].iter().flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::globular::{terminal_set, theta_set};

    fn path_set() -> GlobularSet {
        // a --f--> b --g--> c, plus alpha, beta 2-cells
        GlobularSet::from_tables(
            2,
            vec![
                vec!["a".into(), "b".into(), "c".into()],
                vec!["f".into(), "g".into(), "f2".into(), "g2".into()],
                vec!["alpha".into(), "beta".into()],
            ],
            vec![vec![], vec![0, 1, 0, 1], vec![0, 1]],
            vec![vec![], vec![1, 2, 1, 2], vec![2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn dimensions() {
        let q = path_set();
        let f = gen(q.cell(1, "f").unwrap());
        let g = gen(q.cell(1, "g").unwrap());
        let a = gen(q.cell(0, "a").unwrap());
        assert_eq!(f.dim(&q).unwrap(), 1);
        assert_eq!(id(a).dim(&q).unwrap(), 1);
        assert_eq!(inv(0, comp(0, g, f)).dim(&q).unwrap(), 1);
    }

    #[test]
    fn boundaries() {
        let q = path_set();
        let c = |n: &str| gen(q.find(n).unwrap());
        assert_eq!(boundary_of_term(&inv(0, c("f")), Side::Source, &q).unwrap(), c("b"));
        assert_eq!(boundary_of_term(&id(c("a")), Side::Source, &q).unwrap(), c("a"));
        assert_eq!(boundary_of_term(&comp(0, c("g"), c("f")), Side::Source, &q).unwrap(), c("a"));
        assert!(boundary_of_term(&c("a"), Side::Source, &q).is_err());
        let t = comp(0, c("beta"), c("alpha"));
        assert_eq!(boundary_of_term(&t, Side::Target, &q).unwrap(), comp(0, c("g2"), c("f2")));
    }

    #[test]
    fn well_formedness() {
        let q = path_set();
        let c = |n: &str| gen(q.find(n).unwrap());
        assert!(well_formed(&comp(0, c("g"), c("f")), &q, Mode::Strict).is_valid());
        let bad = well_formed(&comp(0, c("f"), c("g")), &q, Mode::Strict);
        assert_eq!(bad.violations.len(), 1);
        assert_eq!(bad.violations[0].path, "");
        let strict_inv = well_formed(&comp(0, c("g"), inv(0, inv(0, c("f")))), &q, Mode::Strict);
        assert!(strict_inv.violations.iter().any(|v| v.path == "1"));
        // boundaries that only match after identity elimination
        let t = comp(0, c("beta"), comp(0, c("alpha"), id(id(c("a")))));
        assert!(well_formed(&t, &q, Mode::Strict).is_valid());
    }

    #[test]
    fn enumeration_examples() {
        let t1 = terminal_set(1);
        let strict = enumerate_terms(&t1, Mode::Strict, 1, 1).unwrap();
        assert_eq!(strict.len(), 2);
        assert!(enumerate_terms(&t1, Mode::Strict, 0, 1).unwrap().is_empty());
        let inv2 = enumerate_terms(&t1, Mode::Involutive, 2, 1).unwrap();
        assert!(inv2.contains(&inv(0, gen(CellRef::new(1, 0)))));
        let s2 = enumerate_terms(&t1, Mode::Strict, 2, 1).unwrap();
        // identities are free, so Inv(0, Id(pt0)) also has two nodes
        assert!(inv2.contains(&inv(0, id(gen(CellRef::new(0, 0))))));
        assert_eq!(inv2.len(), s2.len() + 2);
        let th = theta_set();
        let all = enumerate_terms(&th, Mode::Involutive, 3, 1).unwrap();
        let mut seen = std::collections::HashSet::new();
        for t in &all {
            assert!(seen.insert(t.clone()));
            assert!(well_formed(t, &th, Mode::Involutive).is_valid());
        }
    }
}
