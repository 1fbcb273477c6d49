//! Naive closure of the operad-law pairs over a raw free magma.
//!
//! Kept apart from `operads`: associativity witnesses are found by enumerating
//! candidate inner pastings and testing them with `flatten`, never by cutting a
//! pasting apart, and classes are explicit member lists relabelled until nothing moves.

use std::collections::{BTreeSet, HashMap};

use crate::error::Result;
use crate::globular::CellRef;
use crate::monad::{flatten, set_candidates};
use crate::operads::{FreeMagma, MCell};
use crate::pasting::{labelings, Pasting};

/// Per dimension, each cell's class as the least index in it.
pub type Labels = Vec<Vec<usize>>;

/// Each cell's class representative, and the members of each class under its representative.
struct Classes {
    label: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl Classes {
    fn new(n: usize) -> Classes {
        Classes { label: (0..n).collect(), members: (0..n).map(|i| vec![i]).collect() }
    }

    fn relabel(&mut self, a: usize, b: usize) -> bool {
        let (x, y) = (self.label[a], self.label[b]);
        if x == y {
            return false;
        }
        let (keep, drop) = if self.members[x].len() >= self.members[y].len() { (x, y) } else { (y, x) };
        let moved = std::mem::take(&mut self.members[drop]);
        for &m in &moved {
            self.label[m] = keep;
        }
        self.members[keep].extend(moved);
        true
    }

    /// Labels by least member.
    fn finish(self) -> Vec<usize> {
        let mut least = vec![usize::MAX; self.label.len()];
        for (i, &l) in self.label.iter().enumerate() {
            least[l] = least[l].min(i);
        }
        self.label.iter().map(|&l| least[l]).collect()
    }
}

/// Inner pastings `ω` over `τ` whose labels are taken from those of `σ` and whose
/// flattening is `σ`.
fn witnesses(fm: &FreeMagma, tau: &Pasting<usize>, sigma: &Pasting<usize>) -> Result<Vec<Pasting<Pasting<usize>>>> {
    let m = &fm.magma;
    let used: BTreeSet<(usize, usize)> = sigma.labels().into_iter().map(|(h, &l)| (h, l)).collect();
    let all = set_candidates(&m.coll.carrier);
    let cands = move |h: usize, bd: Option<(usize, usize)>| {
        all(h, bd).into_iter().filter(|&l| used.contains(&(h, l))).collect::<Vec<_>>()
    };
    let mut per_gap = Vec::new();
    for (h, &t) in tau.labels() {
        per_gap.push(labelings(&m.coll.proj[h][t], &cands, 100_000)?);
    }
    let mut out = Vec::new();
    let mut pick = vec![0usize; per_gap.len()];
    if per_gap.iter().any(|v| v.is_empty()) {
        return Ok(out);
    }
    loop {
        let omega = tau.with_labels(pick.iter().zip(&per_gap).map(|(&i, v)| v[i].clone()).collect());
        if flatten(&omega).is_ok_and(|f| f == *sigma) {
            out.push(omega);
        }
        let mut k = 0;
        while k < pick.len() {
            pick[k] += 1;
            if pick[k] < per_gap[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
        if k == pick.len() {
            return Ok(out);
        }
    }
}

/// The classes of the smallest relation containing the unit and associativity pairs
/// that is closed under boundaries, multiplication and (optionally) the contraction.
pub fn magma_closure_oracle(fm: &FreeMagma, with_contraction: bool) -> Result<Labels> {
    let m = &fm.magma;
    let n = m.max_dim();
    let mut labels: Vec<Classes> = (0..=n).map(|d| Classes::new(m.coll.count(d))).collect();
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for c in m.coll.cells() {
        let globe = Pasting::globe(c.dim, |k, side| {
            if k == c.dim { c.idx } else { m.coll.carrier.iterated_boundary(c, c.dim - k, side).map_or(0, |b| b.idx) }
        });
        if let Some(&v) = m.mu.get(&(m.eta[c.dim], globe)) {
            pairs.push((c.dim, v, c.idx));
        }
        let units = m.coll.proj_of(c).map(|h, _| m.eta[h]);
        if let Some(&v) = m.mu.get(&(c.idx, units)) {
            pairs.push((c.dim, v, c.idx));
        }
    }
    let entries: Vec<(usize, &Pasting<usize>, usize)> = m.mu.iter().map(|((x, t), &z)| (*x, t, z)).collect();
    let mut outer: HashMap<(usize, usize), Vec<(&Pasting<usize>, usize)>> = HashMap::new();
    for &(z, sigma, v) in &entries {
        outer.entry((sigma.dim, z)).or_default().push((sigma, v));
    }
    for &(x, tau, z) in &entries {
        for &(sigma, v) in outer.get(&(tau.dim, z)).into_iter().flatten() {
            for omega in witnesses(fm, tau, sigma)? {
                let mut inner = Vec::new();
                for ((_, &t), (_, w)) in tau.labels().into_iter().zip(omega.labels()) {
                    match m.mu.get(&(t, w.clone())) {
                        Some(&r) => inner.push(r),
                        None => break,
                    }
                }
                if inner.len() < tau.labels().len() {
                    continue;
                }
                if let Some(&r) = m.mu.get(&(x, tau.with_labels(inner))) {
                    pairs.push((tau.dim, v, r));
                }
            }
        }
    }
    for (d, a, b) in pairs {
        labels[d].relabel(a, b);
    }
    loop {
        let mut changed = false;
        for d in (1..=n).rev() {
            for i in 0..m.coll.count(d) {
                let (x, y) = (CellRef::new(d, i), CellRef::new(d, labels[d].label[i]));
                changed |= labels[d - 1].relabel(m.coll.src(x), m.coll.src(y));
                changed |= labels[d - 1].relabel(m.coll.tgt(x), m.coll.tgt(y));
            }
        }
        if with_contraction {
            for d in 1..=n {
                let kappas: Vec<(usize, &crate::collections::ParTriple)> = fm.cells[d]
                    .iter()
                    .enumerate()
                    .filter_map(|(i, c)| if let MCell::Kappa(t) = c { Some((i, t)) } else { None })
                    .collect();
                // sorted by shape and boundary classes, equal neighbours are merged
                let mut keyed: Vec<(&Pasting<()>, usize, usize, usize)> =
                    kappas.iter().map(|(i, t)| (&t.shape, labels[d - 1].label[t.plus], labels[d - 1].label[t.minus], *i)).collect();
                keyed.sort();
                for w in keyed.windows(2) {
                    if w[0].0 == w[1].0 && w[0].1 == w[1].1 && w[0].2 == w[1].2 {
                        changed |= labels[d].relabel(w[0].3, w[1].3);
                    }
                }
            }
        }
        let mut seen: HashMap<(usize, usize, Pasting<usize>), usize> = HashMap::new();
        for &(x, tau, z) in &entries {
            let d = tau.dim;
            let key = (d, labels[d].label[x], tau.map(|h, &l| labels[h].label[l]));
            match seen.get(&key) {
                Some(&w) => changed |= labels[d].relabel(w, z),
                None => {
                    seen.insert(key, z);
                }
            }
        }
        if !changed {
            return Ok(labels.into_iter().map(Classes::finish).collect());
        }
    }
}
