//! Brute-force bounded congruence closure of the generating pairs.
//!
//! Independent of the normalizer: the universe is grown dimension by
//! dimension, composability is decided by the oracle's own classes in lower
//! dimensions, and equalities come only from the generating pairs closed under
//! the congruence rules. Nothing here evaluates pastings.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;

use crate::error::{domain, Error, Result};
use crate::globular::{CellRef, GlobularSet};
use crate::term::{comp, gen, id, inv, Mode, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum ONode {
    Gen(u32, u32),
    Id(u32),
    Comp(u32, u32, u32),
    Inv(u32, u32),
}

struct Arena {
    nodes: Vec<ONode>,
    dims: Vec<u32>,
    sizes: Vec<u32>,
    index: HashMap<ONode, u32>,
    bd: HashMap<(u32, bool), u32>,
}

impl Arena {
    fn new() -> Self {
        Arena { nodes: Vec::new(), dims: Vec::new(), sizes: Vec::new(), index: HashMap::new(), bd: HashMap::new() }
    }

    fn intern(&mut self, n: ONode) -> u32 {
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        let (d, s) = match n {
            ONode::Gen(d, _) => (d, 1),
            ONode::Id(a) => (self.dims[a as usize] + 1, self.sizes[a as usize]),
            ONode::Comp(_, a, b) => (self.dims[a as usize], 1 + self.sizes[a as usize] + self.sizes[b as usize]),
            ONode::Inv(_, a) => (self.dims[a as usize], 1 + self.sizes[a as usize]),
        };
        let i = self.nodes.len() as u32;
        self.nodes.push(n);
        self.dims.push(d);
        self.sizes.push(s);
        self.index.insert(n, i);
        i
    }

    fn get(&self, n: ONode) -> Option<u32> {
        self.index.get(&n).copied()
    }

    /// Structural boundary; `target` selects the side.
    fn boundary(&mut self, t: u32, target: bool, q: &GlobularSet) -> u32 {
        if let Some(&b) = self.bd.get(&(t, target)) {
            return b;
        }
        let n = self.dims[t as usize];
        let out = match self.nodes[t as usize] {
            ONode::Gen(d, i) => {
                let c = CellRef::new(d as usize, i as usize);
                let j = if target { q.tgt(c) } else { q.src(c) };
                self.intern(ONode::Gen(d - 1, j as u32))
            }
            ONode::Id(a) => a,
            ONode::Comp(p, l, r) => {
                if p == n - 1 {
                    self.boundary(if target { l } else { r }, target, q)
                } else {
                    let bl = self.boundary(l, target, q);
                    let br = self.boundary(r, target, q);
                    self.intern(ONode::Comp(p, bl, br))
                }
            }
            ONode::Inv(k, a) => {
                if k == n - 1 {
                    self.boundary(a, !target, q)
                } else {
                    let b = self.boundary(a, target, q);
                    self.intern(ONode::Inv(k, b))
                }
            }
        };
        self.bd.insert((t, target), out);
        out
    }

    fn iterated(&mut self, t: u32, k: u32, target: bool, q: &GlobularSet) -> u32 {
        let mut t = t;
        for _ in 0..k {
            t = self.boundary(t, target, q);
        }
        t
    }

    fn to_term(&self, t: u32) -> Term<CellRef> {
        match self.nodes[t as usize] {
            ONode::Gen(d, i) => gen(CellRef::new(d as usize, i as usize)),
            ONode::Id(a) => id(self.to_term(a)),
            ONode::Comp(p, l, r) => comp(p as usize, self.to_term(l), self.to_term(r)),
            ONode::Inv(k, a) => inv(k as usize, self.to_term(a)),
        }
    }
}

struct Level {
    terms: Vec<u32>,
    uf: UnionFind<u32>,
}

struct State {
    arena: Arena,
    local: HashMap<u32, u32>,
    levels: Vec<Level>,
}

impl State {
    fn class(&mut self, t: u32) -> Option<(u32, u32)> {
        let &l = self.local.get(&t)?;
        let d = self.arena.dims[t as usize];
        Some((d, self.levels[d as usize].uf.find_mut(l)))
    }

    fn member(&self, n: ONode) -> Option<u32> {
        let t = self.arena.get(n)?;
        self.local.contains_key(&t).then_some(t)
    }
}

#[derive(Clone, Debug)]
pub struct OraclePartition {
    /// Per dimension, the classes, each a list of terms in universe order.
    pub classes: Vec<Vec<Vec<Term<CellRef>>>>,
    pub universe_size: usize,
    pub restarts: usize,
    /// Boundary terms that fell outside the universe while checking composability.
    pub missing_boundaries: usize,
}

impl OraclePartition {
    pub fn class_count(&self) -> usize {
        self.classes.iter().map(|v| v.len()).sum()
    }
}

/// Partition of every term with at most `max_nodes` nodes (identities free), in every
/// dimension up to the truncation level, under the bounded closure of the generating pairs.
///
/// The closure runs over terms with up to `max_nodes + slack` nodes so that chains of
/// generating pairs may pass through larger intermediate terms; only the small terms
/// are reported.
pub fn congruence_closure_oracle(
    q: &GlobularSet,
    mode: Mode,
    max_nodes: usize,
    slack: usize,
    budget: usize,
) -> Result<OraclePartition> {
    let top = q.max_dim();
    let bound = max_nodes;
    let max_nodes = max_nodes + slack;
    let mut forced: Vec<(u32, Vec<Term<CellRef>>)> = Vec::new();
    for restart in 0..8 {
        let (state, missing) = build(q, mode, max_nodes, budget, &forced)?;
        let mut state = state;
        // boundary soundness: members of one class must have boundaries in one class
        let mut extra = Vec::new();
        for d in 1..=top {
            let terms = state.levels[d].terms.clone();
            let mut rep: HashMap<u32, (u32, u32)> = HashMap::new();
            for (li, &t) in terms.iter().enumerate() {
                let c = state.levels[d].uf.find_mut(li as u32);
                let s = state.arena.boundary(t, false, q);
                let tt = state.arena.boundary(t, true, q);
                match rep.get(&c) {
                    None => {
                        rep.insert(c, (s, tt));
                    }
                    Some(&(s0, t0)) => {
                        for (a, b) in [(s0, s), (t0, tt)] {
                            match (state.class(a), state.class(b)) {
                                (Some(x), Some(y)) if x == y => {}
                                (Some(_), Some(_)) => {
                                    extra.push((d as u32 - 1, vec![state.arena.to_term(a), state.arena.to_term(b)]))
                                }
                                _ => {
                                    return domain("boundary of a universe term lies outside the universe");
                                }
                            }
                        }
                    }
                }
            }
        }
        if extra.is_empty() {
            let mut classes = Vec::new();
            let mut total = 0;
            for d in 0..=top {
                let lvl = &mut state.levels[d];
                let mut groups: Vec<Vec<Term<CellRef>>> = Vec::new();
                let mut slot: HashMap<u32, usize> = HashMap::new();
                for (li, &t) in lvl.terms.iter().enumerate() {
                    if state.arena.sizes[t as usize] as usize > bound {
                        continue;
                    }
                    total += 1;
                    let c = lvl.uf.find_mut(li as u32);
                    let k = *slot.entry(c).or_insert_with(|| {
                        groups.push(Vec::new());
                        groups.len() - 1
                    });
                    groups[k].push(state.arena.to_term(t));
                }
                classes.push(groups);
            }
            return Ok(OraclePartition { classes, universe_size: total, restarts: restart, missing_boundaries: missing });
        }
        forced.extend(extra);
    }
    Err(Error::Resource("oracle did not stabilise after 8 restarts".into()))
}

fn ids_depth(arena: &Arena, mut t: u32) -> (u32, u32) {
    let mut k = 0;
    while let ONode::Id(a) = arena.nodes[t as usize] {
        k += 1;
        t = a;
    }
    (k, t)
}

fn build(
    q: &GlobularSet,
    mode: Mode,
    max_nodes: usize,
    budget: usize,
    forced: &[(u32, Vec<Term<CellRef>>)],
) -> Result<(State, usize)> {
    let top = q.max_dim();
    let mut st = State { arena: Arena::new(), local: HashMap::new(), levels: Vec::new() };
    let mut missing = 0usize;
    let mut total = 0usize;
    for d in 0..=top {
        let du = d as u32;
        // by_size[s] lists universe terms of this dimension with s nodes
        let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); max_nodes + 1];
        let mut terms: Vec<u32> = Vec::new();
        let lower: Vec<Vec<u32>> = if d > 0 {
            let mut v = vec![Vec::new(); max_nodes + 1];
            for &t in &st.levels[d - 1].terms {
                v[st.arena.sizes[t as usize] as usize].push(t);
            }
            v
        } else {
            Vec::new()
        };
        // boundary classes in each lower dimension p, keyed by term
        let mut bclass: Vec<HashMap<u32, (Option<(u32, u32)>, Option<(u32, u32)>)>> = vec![HashMap::new(); d];
        for s in 1..=max_nodes {
            let mut here: Vec<u32> = Vec::new();
            if s == 1 {
                for c in q.cells(d) {
                    here.push(st.arena.intern(ONode::Gen(du, c.idx as u32)));
                }
            }
            if d > 0 {
                for &t in &lower[s] {
                    here.push(st.arena.intern(ONode::Id(t)));
                }
            }
            if mode.involutive() {
                for k in 0..du {
                    for &t in &by_size[s - 1] {
                        here.push(st.arena.intern(ONode::Inv(k, t)));
                    }
                }
            }
            for p in 0..d {
                for sl in 1..s.saturating_sub(1) {
                    let sr = s - 1 - sl;
                    // index left factors by the class of their p-source
                    let mut by_src: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
                    for &a in &by_size[sl] {
                        let (src, _) = bclass[p][&a];
                        match src {
                            Some(c) => by_src.entry(c).or_default().push(a),
                            None => missing += 1,
                        }
                    }
                    for &b in &by_size[sr] {
                        let (_, tgt) = bclass[p][&b];
                        let Some(c) = tgt else {
                            missing += 1;
                            continue;
                        };
                        if let Some(ls) = by_src.get(&c) {
                            for &a in ls {
                                here.push(st.arena.intern(ONode::Comp(p as u32, a, b)));
                            }
                        }
                    }
                }
            }
            for &t in &here {
                for (p, bc) in bclass.iter_mut().enumerate() {
                    let k = du - p as u32;
                    let sb = st.arena.iterated(t, k, false, q);
                    let tb = st.arena.iterated(t, k, true, q);
                    let v = (st.class(sb), st.class(tb));
                    bc.insert(t, v);
                }
            }
            total += here.len();
            if total > budget {
                return Err(Error::Resource(format!("oracle universe larger than {budget} terms")));
            }
            by_size[s] = here.clone();
            terms.extend(here);
        }
        for (i, &t) in terms.iter().enumerate() {
            st.local.insert(t, i as u32);
        }
        st.levels.push(Level { uf: UnionFind::new(terms.len()), terms: terms.clone() });
        // generating pairs
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for &t in &terms {
            match st.arena.nodes[t as usize] {
                ONode::Comp(p, a, b) => {
                    if let ONode::Comp(p2, a1, a2) = st.arena.nodes[a as usize] {
                        if p2 == p {
                            if let Some(inner) = st.member(ONode::Comp(p, a2, b)) {
                                if let Some(r) = st.member(ONode::Comp(p, a1, inner)) {
                                    pairs.push((t, r));
                                }
                            }
                        }
                    }
                    let need = du - p;
                    if ids_depth(&st.arena, a).0 >= need {
                        pairs.push((t, b));
                    }
                    if ids_depth(&st.arena, b).0 >= need {
                        pairs.push((t, a));
                    }
                    if let (ONode::Id(x), ONode::Id(y)) = (st.arena.nodes[a as usize], st.arena.nodes[b as usize]) {
                        if p + 1 < du {
                            if let Some(c) = st.member(ONode::Comp(p, x, y)) {
                                if let Some(r) = st.member(ONode::Id(c)) {
                                    pairs.push((t, r));
                                }
                            }
                        }
                    }
                    if let (ONode::Comp(k1, x, y), ONode::Comp(k2, z, w)) = (st.arena.nodes[a as usize], st.arena.nodes[b as usize]) {
                        if k1 == k2 && k1 != p {
                            let xz = st.member(ONode::Comp(p, x, z));
                            let yw = st.member(ONode::Comp(p, y, w));
                            if let (Some(xz), Some(yw)) = (xz, yw) {
                                if let Some(r) = st.member(ONode::Comp(k1, xz, yw)) {
                                    pairs.push((t, r));
                                }
                            }
                        }
                    }
                }
                ONode::Inv(k, a) => match st.arena.nodes[a as usize] {
                    ONode::Inv(k2, x) if k2 == k => pairs.push((t, x)),
                    ONode::Inv(k2, x) => {
                        if let Some(i) = st.member(ONode::Inv(k, x)) {
                            if let Some(r) = st.member(ONode::Inv(k2, i)) {
                                pairs.push((t, r));
                            }
                        }
                    }
                    ONode::Comp(p, x, y) => {
                        let (ix, iy) = (st.member(ONode::Inv(k, x)), st.member(ONode::Inv(k, y)));
                        if let (Some(ix), Some(iy)) = (ix, iy) {
                            let r = if p == k { st.member(ONode::Comp(p, iy, ix)) } else { st.member(ONode::Comp(p, ix, iy)) };
                            if let Some(r) = r {
                                pairs.push((t, r));
                            }
                        }
                    }
                    ONode::Id(x) => {
                        if k + 1 == du {
                            pairs.push((t, a));
                        } else if let Some(i) = st.member(ONode::Inv(k, x)) {
                            if let Some(r) = st.member(ONode::Id(i)) {
                                pairs.push((t, r));
                            }
                        }
                    }
                    ONode::Gen(..) => {}
                },
                _ => {}
            }
        }
        for (dd, ts) in forced {
            if *dd == du {
                let ids: Vec<Option<u32>> = ts.iter().map(|t| intern_term(&mut st.arena, t)).collect();
                if let [Some(a), Some(b)] = ids[..] {
                    if st.local.contains_key(&a) && st.local.contains_key(&b) {
                        pairs.push((a, b));
                    }
                }
            }
        }
        for (a, b) in pairs {
            let (la, lb) = (st.local[&a], st.local[&b]);
            st.levels[d].uf.union(la, lb);
        }
        // congruence closure under Id, Comp and Inv
        loop {
            let mut changed = false;
            let mut sig: HashMap<(u8, u32, (u32, u32), (u32, u32)), u32> = HashMap::new();
            for (li, &t) in terms.iter().enumerate() {
                let key = match st.arena.nodes[t as usize] {
                    ONode::Gen(..) => continue,
                    ONode::Id(a) => (0u8, 0, st.class(a).unwrap(), (0, 0)),
                    ONode::Comp(p, a, b) => (1, p, st.class(a).unwrap(), st.class(b).unwrap()),
                    ONode::Inv(k, a) => (2, k, st.class(a).unwrap(), (0, 0)),
                };
                match sig.get(&key) {
                    Some(&lj) => {
                        if st.levels[d].uf.union(li as u32, lj) {
                            changed = true;
                        }
                    }
                    None => {
                        sig.insert(key, li as u32);
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
    Ok((st, missing))
}

fn intern_term(arena: &mut Arena, t: &Term<CellRef>) -> Option<u32> {
    let n = match t {
        Term::Gen(c) => ONode::Gen(c.dim as u32, c.idx as u32),
        Term::Id(a) => ONode::Id(intern_term(arena, a)?),
        Term::Comp(p, l, r) => ONode::Comp(*p as u32, intern_term(arena, l)?, intern_term(arena, r)?),
        Term::Inv(k, a) => ONode::Inv(*k as u32, intern_term(arena, a)?),
    };
    arena.get(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::globular::terminal_set;

    #[test]
    fn double_involution_is_one_class() {
        let q = terminal_set(1);
        let part = congruence_closure_oracle(&q, Mode::Involutive, 3, 0, 1_000_000).unwrap();
        let f = gen(CellRef::new(1, 0));
        let ff = inv(0, inv(0, f.clone()));
        let cls = part.classes[1].iter().find(|c| c.contains(&f)).unwrap();
        assert!(cls.contains(&ff));
        assert!(!cls.contains(&inv(0, f)));
    }

    #[test]
    fn strict_paths_by_length() {
        let q = terminal_set(1);
        let part = congruence_closure_oracle(&q, Mode::Strict, 4, 0, 1_000_000).unwrap();
        // lengths 0..=2 are reachable within four nodes: id, f, f∘f
        assert_eq!(part.classes[1].len(), 3);
        assert_eq!(part.missing_boundaries, 0);
    }

    #[test]
    fn empty_universe() {
        let part = congruence_closure_oracle(&terminal_set(2), Mode::Strict, 0, 0, 10).unwrap();
        assert_eq!(part.class_count(), 0);
    }
}
