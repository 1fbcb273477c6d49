//! Finite, dimension-truncated globular sets and their morphisms.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CellRef {
    pub dim: usize,
    pub idx: usize,
}

impl CellRef {
    pub fn new(dim: usize, idx: usize) -> Self {
        CellRef { dim, idx }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    Source,
    Target,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Source => Side::Target,
            Side::Target => Side::Source,
        }
    }
}

/// Unchecked cell data as it comes out of a parser.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawCell {
    pub id: String,
    pub src: Option<String>,
    pub tgt: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawGlobularSet {
    pub max_dim: usize,
    pub cells: Vec<Vec<RawCell>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Structural,
    Globularity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub dim: usize,
    pub cell: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct GlobularSet {
    max_dim: usize,
    names: Vec<Vec<String>>,
    lookup: Vec<HashMap<String, usize>>,
    src: Vec<Vec<usize>>,
    tgt: Vec<Vec<usize>>,
    between: Vec<HashMap<(usize, usize), Vec<usize>>>,
}

impl fmt::Debug for GlobularSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GlobularSet(N={}, sizes={:?})", self.max_dim, self.sizes())
    }
}

/// Checks a candidate globular set: references first, then the four globularity equations.
pub fn validate_globular(raw: &RawGlobularSet) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut lookup: Vec<HashMap<&str, usize>> = Vec::new();
    let mut resolved: Vec<Vec<Option<(usize, usize)>>> = Vec::new();
    for n in 0..=raw.max_dim {
        let cells: &[RawCell] = raw.cells.get(n).map(|v| v.as_slice()).unwrap_or(&[]);
        let mut here = HashMap::new();
        let mut res = Vec::new();
        for c in cells {
            if here.insert(c.id.as_str(), here.len()).is_some() {
                report.violations.push(Violation {
                    kind: ViolationKind::Structural,
                    dim: n,
                    cell: c.id.clone(),
                    message: "duplicate identifier".into(),
                });
            }
            if n == 0 {
                if c.src.is_some() || c.tgt.is_some() {
                    report.violations.push(Violation {
                        kind: ViolationKind::Structural,
                        dim: 0,
                        cell: c.id.clone(),
                        message: "0-cells have no boundary".into(),
                    });
                }
                res.push(None);
                continue;
            }
            let find = |r: &Option<String>| -> Option<usize> {
                r.as_deref().and_then(|name| lookup[n - 1].get(name).copied())
            };
            match (find(&c.src), find(&c.tgt)) {
                (Some(s), Some(t)) => res.push(Some((s, t))),
                _ => {
                    report.violations.push(Violation {
                        kind: ViolationKind::Structural,
                        dim: n,
                        cell: c.id.clone(),
                        message: format!(
                            "boundary reference {:?} -> {:?} does not name a {}-cell",
                            c.src,
                            c.tgt,
                            n - 1
                        ),
                    });
                    res.push(None);
                }
            }
        }
        lookup.push(here);
        resolved.push(res);
    }
    if raw.cells.len() > raw.max_dim + 1 && raw.cells[raw.max_dim + 1..].iter().any(|v| !v.is_empty()) {
        report.violations.push(Violation {
            kind: ViolationKind::Structural,
            dim: raw.max_dim + 1,
            cell: String::new(),
            message: "cells above the truncation level".into(),
        });
    }
    for n in 2..=raw.max_dim {
        for (i, c) in raw.cells.get(n).map(|v| v.as_slice()).unwrap_or(&[]).iter().enumerate() {
            let Some((s, t)) = resolved[n][i] else { continue };
            let (Some((ss, st)), Some((ts, tt))) = (resolved[n - 1][s], resolved[n - 1][t]) else {
                continue;
            };
            if ss != ts {
                report.violations.push(Violation {
                    kind: ViolationKind::Globularity,
                    dim: n,
                    cell: c.id.clone(),
                    message: "src∘src ≠ src∘tgt".into(),
                });
            }
            if st != tt {
                report.violations.push(Violation {
                    kind: ViolationKind::Globularity,
                    dim: n,
                    cell: c.id.clone(),
                    message: "tgt∘src ≠ tgt∘tgt".into(),
                });
            }
        }
    }
    report
}

impl GlobularSet {
    pub fn from_raw(raw: &RawGlobularSet) -> Result<GlobularSet> {
        let report = validate_globular(raw);
        if let Some(v) = report.violations.first() {
            return domain(format!("invalid globular set: cell {} (dim {}): {}", v.cell, v.dim, v.message));
        }
        let mut names = Vec::new();
        let mut src = Vec::new();
        let mut tgt = Vec::new();
        let mut lookup: Vec<HashMap<String, usize>> = Vec::new();
        for n in 0..=raw.max_dim {
            let cells = raw.cells.get(n).cloned().unwrap_or_default();
            let mut s = Vec::new();
            let mut t = Vec::new();
            for c in &cells {
                if n > 0 {
                    s.push(lookup[n - 1][c.src.as_ref().unwrap()]);
                    t.push(lookup[n - 1][c.tgt.as_ref().unwrap()]);
                }
            }
            lookup.push(cells.iter().enumerate().map(|(i, c)| (c.id.clone(), i)).collect());
            names.push(cells.into_iter().map(|c| c.id).collect());
            src.push(s);
            tgt.push(t);
        }
        Ok(GlobularSet::assemble(raw.max_dim, names, lookup, src, tgt))
    }

    /// Builds a set from index-based boundary tables. `src[0]` and `tgt[0]` must be empty.
    pub fn from_tables(
        max_dim: usize,
        names: Vec<Vec<String>>,
        src: Vec<Vec<usize>>,
        tgt: Vec<Vec<usize>>,
    ) -> Result<GlobularSet> {
        let mut lookup: Vec<HashMap<String, usize>> = Vec::with_capacity(max_dim + 1);
        for n in 0..=max_dim {
            let mut here = HashMap::with_capacity(names[n].len());
            for (i, id) in names[n].iter().enumerate() {
                if here.insert(id.clone(), i).is_some() {
                    return domain(format!("invalid globular set: cell {id} (dim {n}): duplicate identifier"));
                }
                if n == 0 {
                    continue;
                }
                let below = names[n - 1].len();
                let (Some(&s), Some(&t)) = (src[n].get(i), tgt[n].get(i)) else {
                    return domain(format!("invalid globular set: cell {id} (dim {n}): missing boundary"));
                };
                if s >= below || t >= below {
                    return domain(format!("invalid globular set: cell {id} (dim {n}): boundary out of range"));
                }
                if n >= 2 && (src[n - 1][s] != src[n - 1][t] || tgt[n - 1][s] != tgt[n - 1][t]) {
                    return domain(format!("invalid globular set: cell {id} (dim {n}): boundaries are not parallel"));
                }
            }
            lookup.push(here);
        }
        let src = (0..=max_dim).map(|n| if n == 0 { Vec::new() } else { src[n].clone() }).collect();
        let tgt = (0..=max_dim).map(|n| if n == 0 { Vec::new() } else { tgt[n].clone() }).collect();
        Ok(GlobularSet::assemble(max_dim, names, lookup, src, tgt))
    }

    pub fn to_raw(&self) -> RawGlobularSet {
        RawGlobularSet {
            max_dim: self.max_dim,
            cells: (0..=self.max_dim)
                .map(|n| {
                    (0..self.count(n))
                        .map(|i| RawCell {
                            id: self.names[n][i].clone(),
                            src: (n > 0).then(|| self.names[n - 1][self.src[n][i]].clone()),
                            tgt: (n > 0).then(|| self.names[n - 1][self.tgt[n][i]].clone()),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    fn assemble(
        max_dim: usize,
        names: Vec<Vec<String>>,
        lookup: Vec<HashMap<String, usize>>,
        src: Vec<Vec<usize>>,
        tgt: Vec<Vec<usize>>,
    ) -> GlobularSet {
        let between = (0..=max_dim)
            .map(|n| {
                let mut m: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
                for (i, (&a, &b)) in src[n].iter().zip(&tgt[n]).enumerate() {
                    m.entry((a, b)).or_default().push(i);
                }
                m
            })
            .collect();
        GlobularSet { max_dim, names, lookup, src, tgt, between }
    }

    pub fn empty(max_dim: usize) -> GlobularSet {
        GlobularSet::assemble(
            max_dim,
            vec![Vec::new(); max_dim + 1],
            vec![HashMap::new(); max_dim + 1],
            vec![Vec::new(); max_dim + 1],
            vec![Vec::new(); max_dim + 1],
        )
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn count(&self, dim: usize) -> usize {
        self.names.get(dim).map_or(0, |v| v.len())
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.names.iter().map(|v| v.len()).collect()
    }

    pub fn total_cells(&self) -> usize {
        self.names.iter().map(|v| v.len()).sum()
    }

    pub fn cells(&self, dim: usize) -> impl Iterator<Item = CellRef> + '_ {
        (0..self.count(dim)).map(move |idx| CellRef { dim, idx })
    }

    pub fn name(&self, c: CellRef) -> &str {
        &self.names[c.dim][c.idx]
    }

    pub fn cell(&self, dim: usize, name: &str) -> Option<CellRef> {
        self.lookup.get(dim)?.get(name).map(|&idx| CellRef { dim, idx })
    }

    /// Looks a name up in every dimension; first match wins.
    pub fn find(&self, name: &str) -> Option<CellRef> {
        (0..=self.max_dim).find_map(|d| self.cell(d, name))
    }

    pub fn contains(&self, c: CellRef) -> bool {
        c.dim <= self.max_dim && c.idx < self.count(c.dim)
    }

    pub fn src(&self, c: CellRef) -> usize {
        self.src[c.dim][c.idx]
    }

    pub fn tgt(&self, c: CellRef) -> usize {
        self.tgt[c.dim][c.idx]
    }

    pub fn boundary(&self, c: CellRef, side: Side) -> Result<CellRef> {
        if c.dim == 0 {
            return domain("0-cells have no boundary");
        }
        let idx = match side {
            Side::Source => self.src[c.dim][c.idx],
            Side::Target => self.tgt[c.dim][c.idx],
        };
        Ok(CellRef { dim: c.dim - 1, idx })
    }

    pub fn iterated_boundary(&self, x: CellRef, k: usize, side: Side) -> Result<CellRef> {
        if k > x.dim {
            return domain(format!("cannot take {k} boundaries of a {}-cell", x.dim));
        }
        let mut c = x;
        for _ in 0..k {
            c = self.boundary(c, side)?;
        }
        Ok(c)
    }

    pub fn parallel(&self, x: CellRef, y: CellRef) -> Result<bool> {
        if x.dim != y.dim {
            return domain("parallel: cells of different dimension");
        }
        Ok(x.dim == 0 || (self.src(x) == self.src(y) && self.tgt(x) == self.tgt(y)))
    }

    /// Cells of dimension `dim` with the given source and target.
    pub fn cells_between(&self, dim: usize, s: usize, t: usize) -> Vec<usize> {
        self.between[dim].get(&(s, t)).cloned().unwrap_or_default()
    }

    pub fn is_terminal(&self) -> bool {
        self.names.iter().all(|v| v.len() == 1)
    }
}

pub fn terminal_set(n: usize) -> GlobularSet {
    GlobularSet::assemble(
        n,
        (0..=n).map(|d| vec![format!("pt{d}")]).collect(),
        (0..=n).map(|d| HashMap::from([(format!("pt{d}"), 0)])).collect(),
        (0..=n).map(|d| if d == 0 { vec![] } else { vec![0] }).collect(),
        (0..=n).map(|d| if d == 0 { vec![] } else { vec![0] }).collect(),
    )
}

/// Two 0-cells a, b; two 1-cells f, g: a → b; one 2-cell alpha: f ⇒ g.
pub fn theta_set() -> GlobularSet {
    GlobularSet::from_tables(
        2,
        vec![vec!["a".into(), "b".into()], vec!["f".into(), "g".into()], vec!["alpha".into()]],
        vec![vec![], vec![0, 0], vec![0]],
        vec![vec![], vec![1, 1], vec![1]],
    )
    .expect("theta set is globular")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobularMorphism {
    pub domain: Arc<GlobularSet>,
    pub codomain: Arc<GlobularSet>,
    pub maps: Vec<Vec<usize>>,
}

impl GlobularMorphism {
    pub fn new(dom: Arc<GlobularSet>, cod: Arc<GlobularSet>, maps: Vec<Vec<usize>>) -> Result<Self> {
        if dom.max_dim != cod.max_dim {
            return domain("morphism between sets of different truncation");
        }
        for n in 0..=dom.max_dim {
            if maps.get(n).map_or(0, |m| m.len()) != dom.count(n) {
                return domain(format!("morphism not total at dimension {n}"));
            }
            for (i, &j) in maps[n].iter().enumerate() {
                if j >= cod.count(n) {
                    return domain(format!("morphism sends {} outside the codomain", dom.names[n][i]));
                }
                if n > 0
                    && (maps[n - 1][dom.src[n][i]] != cod.src[n][j]
                        || maps[n - 1][dom.tgt[n][i]] != cod.tgt[n][j])
                {
                    return domain(format!(
                        "morphism does not commute with boundaries at {}",
                        dom.names[n][i]
                    ));
                }
            }
        }
        Ok(GlobularMorphism { domain: dom, codomain: cod, maps })
    }

    pub fn identity(x: Arc<GlobularSet>) -> Self {
        let maps = (0..=x.max_dim).map(|n| (0..x.count(n)).collect()).collect();
        GlobularMorphism { domain: x.clone(), codomain: x, maps }
    }

    pub fn to_terminal(x: Arc<GlobularSet>) -> Self {
        let maps = (0..=x.max_dim).map(|n| vec![0; x.count(n)]).collect();
        let n = x.max_dim;
        GlobularMorphism { domain: x, codomain: Arc::new(terminal_set(n)), maps }
    }

    pub fn apply(&self, c: CellRef) -> CellRef {
        CellRef { dim: c.dim, idx: self.maps[c.dim][c.idx] }
    }
}

/// `f ∘ g`: first `g`, then `f`.
pub fn compose_morphisms(f: &GlobularMorphism, g: &GlobularMorphism) -> Result<GlobularMorphism> {
    if *g.codomain != *f.domain {
        return domain("compose_morphisms: codomain of g is not the domain of f");
    }
    let maps = g.maps.iter().enumerate().map(|(n, m)| m.iter().map(|&i| f.maps[n][i]).collect()).collect();
    Ok(GlobularMorphism { domain: g.domain.clone(), codomain: f.codomain.clone(), maps })
}

#[derive(Clone, Debug)]
pub struct Pullback {
    pub set: Arc<GlobularSet>,
    pub p1: GlobularMorphism,
    pub p2: GlobularMorphism,
}

/// Dimensionwise fiber product `A ×_X B`.
pub fn pullback(f: &GlobularMorphism, g: &GlobularMorphism) -> Result<Pullback> {
    if *f.codomain != *g.codomain {
        return domain("pullback: morphisms have different codomains");
    }
    let (a, b) = (&f.domain, &g.domain);
    let n_max = f.codomain.max_dim;
    let mut names = Vec::new();
    let mut pairs: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut index: Vec<HashMap<(usize, usize), usize>> = Vec::new();
    let mut src = Vec::new();
    let mut tgt = Vec::new();
    for n in 0..=n_max {
        let mut here = Vec::new();
        for i in 0..a.count(n) {
            for j in 0..b.count(n) {
                if f.maps[n][i] == g.maps[n][j] {
                    here.push((i, j));
                }
            }
        }
        let idx: HashMap<_, _> = here.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let (mut s, mut t) = (Vec::new(), Vec::new());
        if n > 0 {
            for &(i, j) in &here {
                s.push(index[n - 1][&(a.src[n][i], b.src[n][j])]);
                t.push(index[n - 1][&(a.tgt[n][i], b.tgt[n][j])]);
            }
        }
        names.push(here.iter().map(|&(i, j)| format!("({},{})", a.names[n][i], b.names[n][j])).collect());
        src.push(s);
        tgt.push(t);
        index.push(idx);
        pairs.push(here);
    }
    let set = Arc::new(GlobularSet::from_tables(n_max, names, src, tgt)?);
    let p1 = GlobularMorphism {
        domain: set.clone(),
        codomain: a.clone(),
        maps: pairs.iter().map(|v| v.iter().map(|p| p.0).collect()).collect(),
    };
    let p2 = GlobularMorphism {
        domain: set.clone(),
        codomain: b.clone(),
        maps: pairs.iter().map(|v| v.iter().map(|p| p.1).collect()).collect(),
    };
    Ok(Pullback { set, p1, p2 })
}

/// Every morphism `a → b`, by backtracking dimension by dimension.
pub fn all_morphisms(a: &Arc<GlobularSet>, b: &Arc<GlobularSet>, limit: usize) -> Result<Vec<GlobularMorphism>> {
    if a.max_dim != b.max_dim {
        return domain("all_morphisms: different truncation");
    }
    let mut out = Vec::new();
    let order: Vec<CellRef> = (0..=a.max_dim).flat_map(|n| a.cells(n)).collect();
    let mut maps: Vec<Vec<usize>> = (0..=a.max_dim).map(|n| vec![usize::MAX; a.count(n)]).collect();
    fn go(
        k: usize,
        order: &[CellRef],
        a: &GlobularSet,
        b: &GlobularSet,
        maps: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
        limit: usize,
    ) -> Result<()> {
        if k == order.len() {
            if out.len() >= limit {
                return Err(Error::Resource(format!("more than {limit} morphisms")));
            }
            out.push(maps.clone());
            return Ok(());
        }
        let c = order[k];
        for j in 0..b.count(c.dim) {
            if c.dim > 0
                && (maps[c.dim - 1][a.src(c)] != b.src[c.dim][j] || maps[c.dim - 1][a.tgt(c)] != b.tgt[c.dim][j])
            {
                continue;
            }
            maps[c.dim][c.idx] = j;
            go(k + 1, order, a, b, maps, out, limit)?;
        }
        maps[c.dim][c.idx] = usize::MAX;
        Ok(())
    }
    let mut raw = Vec::new();
    go(0, &order, a, b, &mut maps, &mut raw, limit)?;
    for m in raw {
        out.push(GlobularMorphism { domain: a.clone(), codomain: b.clone(), maps: m });
    }
    Ok(out)
}

/// A random globular set with between 1 and `max_cells` cells per dimension.
pub fn random_set<R: Rng>(rng: &mut R, max_dim: usize, max_cells: usize) -> GlobularSet {
    let mut names = Vec::new();
    let mut src = Vec::new();
    let mut tgt = Vec::new();
    for n in 0..=max_dim {
        let k = rng.gen_range(1..=max_cells);
        let (mut s, mut t) = (Vec::new(), Vec::new());
        if n > 0 {
            let below: usize = names.last().map_or(0, |v: &Vec<String>| v.len());
            for _ in 0..k {
                if n == 1 {
                    s.push(rng.gen_range(0..below));
                    t.push(rng.gen_range(0..below));
                } else {
                    // pick a parallel pair among the (n-1)-cells
                    let base = rng.gen_range(0..below);
                    let ps: &Vec<usize> = &src[n - 1];
                    let pt: &Vec<usize> = &tgt[n - 1];
                    let par: Vec<usize> = (0..below).filter(|&j| ps[j] == ps[base] && pt[j] == pt[base]).collect();
                    s.push(base);
                    t.push(par[rng.gen_range(0..par.len())]);
                }
            }
        }
        names.push((0..k).map(|i| format!("c{n}_{i}")).collect());
        src.push(s);
        tgt.push(t);
    }
    GlobularSet::from_tables(max_dim, names, src, tgt).expect("random set is globular by construction")
}

/// A random morphism `a → b`, or `None` if the backtracking search meets a dead end.
pub fn random_morphism<R: Rng>(rng: &mut R, a: &Arc<GlobularSet>, b: &Arc<GlobularSet>) -> Option<GlobularMorphism> {
    let mut maps: Vec<Vec<usize>> = Vec::new();
    for n in 0..=a.max_dim {
        let mut m = Vec::new();
        for i in 0..a.count(n) {
            let cands: Vec<usize> = if n == 0 {
                (0..b.count(0)).collect()
            } else {
                b.cells_between(n, maps[n - 1][a.src[n][i]], maps[n - 1][a.tgt[n][i]])
            };
            if cands.is_empty() {
                return None;
            }
            m.push(cands[rng.gen_range(0..cands.len())]);
        }
        maps.push(m);
    }
    Some(GlobularMorphism { domain: a.clone(), codomain: b.clone(), maps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(max_dim: usize, cells: &[&[(&str, Option<&str>, Option<&str>)]]) -> RawGlobularSet {
        RawGlobularSet {
            max_dim,
            cells: cells
                .iter()
                .map(|v| {
                    v.iter()
                        .map(|(id, s, t)| RawCell {
                            id: id.to_string(),
                            src: s.map(|x| x.to_string()),
                            tgt: t.map(|x| x.to_string()),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    #[test]
    fn terminal_and_theta_are_valid() {
        assert!(validate_globular(&terminal_set(2).to_raw()).is_valid());
        assert!(validate_globular(&theta_set().to_raw()).is_valid());
        assert_eq!(terminal_set(0).total_cells(), 1);
        assert_eq!(terminal_set(3).total_cells(), 4);
    }

    #[test]
    fn broken_target_is_a_globularity_violation() {
        let r = raw(
            2,
            &[
                &[("a", None, None), ("b", None, None), ("c", None, None)],
                &[("f", Some("a"), Some("b")), ("g", Some("a"), Some("c"))],
                &[("alpha", Some("f"), Some("g"))],
            ],
        );
        let rep = validate_globular(&r);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].kind, ViolationKind::Globularity);
        assert_eq!(rep.violations[0].cell, "alpha");
        assert!(rep.violations[0].message.contains("tgt∘src"));
    }

    #[test]
    fn dangling_reference_is_structural() {
        let r = raw(1, &[&[("a", None, None)], &[("f", Some("a"), Some("zz"))]]);
        let rep = validate_globular(&r);
        assert_eq!(rep.violations[0].kind, ViolationKind::Structural);
        let dup = raw(0, &[&[("a", None, None), ("a", None, None)]]);
        assert_eq!(validate_globular(&dup).violations[0].message, "duplicate identifier");
    }

    #[test]
    fn boundaries_of_theta() {
        let th = theta_set();
        let alpha = th.cell(2, "alpha").unwrap();
        assert_eq!(th.name(th.iterated_boundary(alpha, 2, Side::Source).unwrap()), "a");
        assert_eq!(th.name(th.iterated_boundary(alpha, 1, Side::Target).unwrap()), "g");
        assert_eq!(th.iterated_boundary(alpha, 0, Side::Target).unwrap(), alpha);
        assert!(th.iterated_boundary(alpha, 3, Side::Source).is_err());
        let (f, g) = (th.cell(1, "f").unwrap(), th.cell(1, "g").unwrap());
        assert!(th.parallel(f, g).unwrap());
        assert!(th.parallel(th.cell(0, "a").unwrap(), th.cell(0, "b").unwrap()).unwrap());
        assert!(th.parallel(f, alpha).is_err());
    }

    #[test]
    fn pullback_over_terminal() {
        let th = Arc::new(theta_set());
        let f = GlobularMorphism::to_terminal(th.clone());
        let pb = pullback(&f, &f).unwrap();
        assert_eq!(pb.set.sizes(), vec![4, 4, 1]);
        let id = GlobularMorphism::identity(f.codomain.clone());
        let pb2 = pullback(&id, &f).unwrap();
        assert_eq!(pb2.set.sizes(), th.sizes());
    }

    #[test]
    fn composition_laws() {
        let th = Arc::new(theta_set());
        let t = GlobularMorphism::to_terminal(th.clone());
        let id = GlobularMorphism::identity(th.clone());
        assert_eq!(compose_morphisms(&t, &id).unwrap(), t);
        let idt = GlobularMorphism::identity(t.codomain.clone());
        assert_eq!(compose_morphisms(&idt, &t).unwrap(), t);
        assert!(compose_morphisms(&id, &t).is_err());
        let to_term = all_morphisms(&th, &t.codomain, 10).unwrap();
        assert_eq!(to_term.len(), 1);
    }

    #[test]
    fn morphism_must_commute() {
        let th = Arc::new(theta_set());
        let bad = GlobularMorphism::new(th.clone(), th.clone(), vec![vec![1, 1], vec![0, 1], vec![0]]);
        assert!(bad.is_err());
        // swapping f and g while keeping alpha fixed is not a morphism either
        assert!(GlobularMorphism::new(th.clone(), th.clone(), vec![vec![0, 1], vec![1, 0], vec![0]]).is_err());
    }
}
