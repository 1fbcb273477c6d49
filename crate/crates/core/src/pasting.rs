//! Labelled, decorated Batanin trees: the normal form of cells in the free
//! strict (involutive) globular ω-category.
//!
//! A node at height `k` with `m` children has `m + 1` gaps; gaps are the
//! `k`-cells of the pasting diagram and carry the labels. Every node carries a
//! decoration, a bitset of involution indices below its height. A child's
//! decoration is its parent's, possibly with the parent's height added.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::globular::Side;

pub type Dec = u16;

pub const MAX_DIM: usize = 15;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node<L> {
    pub dec: Dec,
    pub gaps: Vec<L>,
    pub children: Vec<Node<L>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pasting<L> {
    pub dim: usize,
    pub root: Node<L>,
}

/// An element of the free involutive strict ω-category on the terminal globular set.
pub type DecoratedTree = Pasting<()>;

pub fn has_bit(d: Dec, q: usize) -> bool {
    d & (1 << q) != 0
}

impl<L> Node<L> {
    fn leaf(dec: Dec, label: L) -> Self {
        Node { dec, gaps: vec![label], children: Vec::new() }
    }

    fn count(&self) -> usize {
        1 + self.children.iter().map(|c| c.count()).sum::<usize>()
    }

    fn height(&self) -> usize {
        self.children.iter().map(|c| 1 + c.height()).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> usize {
        if self.children.is_empty() {
            1
        } else {
            self.children.iter().map(|c| c.leaves()).sum()
        }
    }
}

impl<L: Clone> Pasting<L> {
    /// The globe on a single `dim`-cell: one node per level. `label(k, side)` gives the
    /// `k`-dimensional boundary on the given side; the top cell is asked for with `Side::Source`.
    pub fn globe(dim: usize, mut label: impl FnMut(usize, Side) -> L) -> Self {
        let mut node = Node::leaf(0, label(dim, Side::Source));
        for k in (0..dim).rev() {
            node = Node { dec: 0, gaps: vec![label(k, Side::Source), label(k, Side::Target)], children: vec![node] };
        }
        Pasting { dim, root: node }
    }

    /// Number of non-root nodes.
    pub fn edges(&self) -> usize {
        self.root.count() - 1
    }

    pub fn height(&self) -> usize {
        self.root.height()
    }

    pub fn leaves(&self) -> usize {
        self.root.leaves()
    }

    pub fn shape(&self) -> DecoratedTree {
        self.map(|_, _| ())
    }

    /// Relabels every gap; `f` receives the gap's height. Traversal is preorder,
    /// a node's gaps before its children.
    pub fn map<M>(&self, mut f: impl FnMut(usize, &L) -> M) -> Pasting<M> {
        fn go<L, M>(n: &Node<L>, h: usize, f: &mut impl FnMut(usize, &L) -> M) -> Node<M> {
            let gaps = n.gaps.iter().map(|l| f(h, l)).collect();
            Node { dec: n.dec, gaps, children: n.children.iter().map(|c| go(c, h + 1, f)).collect() }
        }
        Pasting { dim: self.dim, root: go(&self.root, 0, &mut f) }
    }

    pub fn try_map<M>(&self, mut f: impl FnMut(usize, &L) -> Result<M>) -> Result<Pasting<M>> {
        fn go<L, M>(n: &Node<L>, h: usize, f: &mut impl FnMut(usize, &L) -> Result<M>) -> Result<Node<M>> {
            let gaps = n.gaps.iter().map(|l| f(h, l)).collect::<Result<_>>()?;
            let children = n.children.iter().map(|c| go(c, h + 1, f)).collect::<Result<_>>()?;
            Ok(Node { dec: n.dec, gaps, children })
        }
        Ok(Pasting { dim: self.dim, root: go(&self.root, 0, &mut f)? })
    }

    /// Labels in traversal order with their heights.
    pub fn labels(&self) -> Vec<(usize, &L)> {
        fn go<'a, L>(n: &'a Node<L>, h: usize, out: &mut Vec<(usize, &'a L)>) {
            out.extend(n.gaps.iter().map(|l| (h, l)));
            for c in &n.children {
                go(c, h + 1, out);
            }
        }
        let mut out = Vec::new();
        go(&self.root, 0, &mut out);
        out
    }

    /// Rebuilds the pasting with labels taken in traversal order.
    pub fn with_labels<M>(&self, labels: Vec<M>) -> Pasting<M> {
        let mut it = labels.into_iter();
        self.map(|_, _| it.next().expect("label count matches gap count"))
    }

    pub fn boundary(&self, side: Side) -> Result<Pasting<L>> {
        if self.dim == 0 {
            return domain("a 0-dimensional pasting has no boundary");
        }
        fn go<L: Clone>(n: &Node<L>, h: usize, k: usize, side: Side) -> Node<L> {
            if h == k {
                let g = match side {
                    Side::Source => n.gaps[0].clone(),
                    Side::Target => n.gaps[n.gaps.len() - 1].clone(),
                };
                Node::leaf(n.dec, g)
            } else {
                Node { dec: n.dec, gaps: n.gaps.clone(), children: n.children.iter().map(|c| go(c, h + 1, k, side)).collect() }
            }
        }
        Ok(Pasting { dim: self.dim - 1, root: go(&self.root, 0, self.dim - 1, side) })
    }

    pub fn iterated_boundary(&self, to_dim: usize, side: Side) -> Result<Pasting<L>> {
        let mut p = self.clone();
        while p.dim > to_dim {
            p = p.boundary(side)?;
        }
        Ok(p)
    }

    pub fn identity(&self) -> Pasting<L> {
        Pasting { dim: self.dim + 1, root: self.root.clone() }
    }

    /// The involution at index `q`; grounded (the identity) when `q ≥ dim`.
    pub fn involute(&self, q: usize) -> Pasting<L> {
        if q >= self.dim {
            return self.clone();
        }
        fn go<L: Clone>(n: &Node<L>, h: usize, q: usize) -> Node<L> {
            let mut out = Node {
                dec: if h > q { n.dec ^ (1 << q) } else { n.dec },
                gaps: n.gaps.clone(),
                children: n.children.iter().map(|c| go(c, h + 1, q)).collect(),
            };
            if h == q {
                out.gaps.reverse();
                out.children.reverse();
            }
            out
        }
        Pasting { dim: self.dim, root: go(&self.root, 0, q) }
    }

    /// `left ∘_p right`, where the `p`-target of `right` must meet the `p`-source of `left`.
    /// `merge` decides (and may record) the identification of two labels that must agree.
    pub fn compose(
        p: usize,
        left: &Pasting<L>,
        right: &Pasting<L>,
        merge: &mut dyn FnMut(&L, &L) -> bool,
    ) -> Result<Pasting<L>> {
        if left.dim != right.dim {
            return domain(format!("composing cells of dimension {} and {}", left.dim, right.dim));
        }
        if p >= left.dim {
            return domain(format!("composition index {p} not below dimension {}", left.dim));
        }
        fn go<L: Clone>(
            h: usize,
            p: usize,
            l: &Node<L>,
            r: &Node<L>,
            merge: &mut dyn FnMut(&L, &L) -> bool,
        ) -> Result<Node<L>> {
            if l.dec != r.dec {
                return domain("composable cells differ in orientation below the composition level");
            }
            if h == p {
                if !merge(r.gaps.last().unwrap(), &l.gaps[0]) {
                    return domain("target of the right factor does not meet the source of the left");
                }
                let mut gaps = r.gaps.clone();
                gaps.extend(l.gaps[1..].iter().cloned());
                let mut children = r.children.clone();
                children.extend(l.children.iter().cloned());
                return Ok(Node { dec: l.dec, gaps, children });
            }
            if l.children.len() != r.children.len() {
                return domain("boundaries of the factors have different shapes");
            }
            for (a, b) in r.gaps.iter().zip(&l.gaps) {
                if !merge(a, b) {
                    return domain("boundaries of the factors have different labels");
                }
            }
            let children = l
                .children
                .iter()
                .zip(&r.children)
                .map(|(a, b)| go(h + 1, p, a, b, merge))
                .collect::<Result<_>>()?;
            Ok(Node { dec: l.dec, gaps: l.gaps.clone(), children })
        }
        Ok(Pasting { dim: left.dim, root: go(0, p, &left.root, &right.root, merge)? })
    }
}

impl<L: Clone + PartialEq> Pasting<L> {
    pub fn compose_eq(p: usize, left: &Pasting<L>, right: &Pasting<L>) -> Result<Pasting<L>> {
        Pasting::compose(p, left, right, &mut |a, b| a == b)
    }
}

impl<L> Pasting<L> {
    pub fn is_decorated(&self) -> bool {
        fn go<L>(n: &Node<L>) -> bool {
            n.dec != 0 || n.children.iter().any(go)
        }
        go(&self.root)
    }

    /// Text form `(pasting DIM NODE)` with `NODE = ({dec}? (labels...) NODE*)`.
    pub fn to_text(&self, name: &dyn Fn(usize, &L) -> String) -> String {
        fn go<L>(n: &Node<L>, h: usize, name: &dyn Fn(usize, &L) -> String, out: &mut String) {
            out.push('(');
            if n.dec != 0 {
                let idx: Vec<String> = (0..16).filter(|&q| has_bit(n.dec, q)).map(|q| q.to_string()).collect();
                out.push_str(&format!("{{{}}} ", idx.join(",")));
            }
            let labels: Vec<String> = n.gaps.iter().map(|l| name(h, l)).collect();
            out.push_str(&format!("({})", labels.join(" ")));
            for c in &n.children {
                out.push(' ');
                go(c, h + 1, name, out);
            }
            out.push(')');
        }
        let mut out = format!("(pasting {} ", self.dim);
        go(&self.root, 0, name, &mut out);
        out.push(')');
        out
    }

    /// Structural validity: gap counts, height, and decoration inheritance.
    pub fn check_tree(&self) -> Result<()> {
        fn go<L>(n: &Node<L>, h: usize, dim: usize, parent: Option<Dec>) -> Result<()> {
            if n.gaps.len() != n.children.len() + 1 {
                return domain("node gap count is not children + 1");
            }
            if h > dim {
                return domain("tree higher than its dimension");
            }
            if n.dec >> h != 0 {
                return domain(format!("decoration index not below node level {h}"));
            }
            match parent {
                None if n.dec != 0 => return domain("root carries a decoration"),
                Some(pd) if n.dec & !(1 << (h - 1)) != pd => {
                    return domain("decoration differs from the parent's below the parent level")
                }
                _ => {}
            }
            n.children.iter().try_for_each(|c| go(c, h + 1, dim, Some(n.dec)))
        }
        if self.dim > MAX_DIM {
            return domain("dimension exceeds the supported maximum");
        }
        go(&self.root, 0, self.dim, None)
    }
}

/// Raw boundary requirement `(source, target)` for the gaps of child `i` of a node,
/// given that node's gap labels and the child's decoration.
pub fn child_requirement<L: Clone>(parent_gaps: &[L], i: usize, child_dec: Dec, parent_height: usize) -> (L, L) {
    let (lo, hi) = (parent_gaps[i].clone(), parent_gaps[i + 1].clone());
    if has_bit(child_dec, parent_height) {
        (hi, lo)
    } else {
        (lo, hi)
    }
}

/// A gap slot in traversal order, for labelling enumeration.
#[derive(Clone, Debug)]
struct Slot {
    height: usize,
    req: Option<(usize, usize)>,
    flip: bool,
}

fn slots<L>(p: &Pasting<L>) -> Vec<Slot> {
    fn go<L>(n: &Node<L>, h: usize, parent: Option<(usize, usize)>, out: &mut Vec<Slot>) {
        let first = out.len();
        for _ in &n.gaps {
            out.push(Slot { height: h, req: parent, flip: h > 0 && has_bit(n.dec, h - 1) });
        }
        for (i, c) in n.children.iter().enumerate() {
            go(c, h + 1, Some((first + i, first + i + 1)), out);
        }
    }
    let mut out = Vec::new();
    go(&p.root, 0, None, &mut out);
    out
}

/// Candidate generator for labelling enumeration: `cands(dim, None)` lists 0-cells,
/// `cands(dim, Some((s, t)))` lists `dim`-cells with raw source `s` and target `t`.
pub type Candidates<'a> = dyn Fn(usize, Option<(usize, usize)>) -> Vec<usize> + 'a;

/// All labellings of `shape` by the cells offered by `cands`, in lexicographic order.
pub fn labelings<L: Clone>(shape: &Pasting<L>, cands: &Candidates<'_>, limit: usize) -> Result<Vec<Pasting<usize>>> {
    labelings_within(shape, cands, &|_, _| 0, usize::MAX, limit)
}

/// Labellings whose summed `cost(height, label)` stays within `budget`, pruned as they are built.
pub fn labelings_within<L: Clone>(
    shape: &Pasting<L>,
    cands: &Candidates<'_>,
    cost: &dyn Fn(usize, usize) -> usize,
    budget: usize,
    limit: usize,
) -> Result<Vec<Pasting<usize>>> {
    let sl = slots(shape);
    let mut vals = vec![0usize; sl.len()];
    let mut out = Vec::new();
    struct Ctx<'a, L> {
        sl: &'a [Slot],
        cands: &'a Candidates<'a>,
        cost: &'a dyn Fn(usize, usize) -> usize,
        shape: &'a Pasting<L>,
        limit: usize,
    }
    fn go<L: Clone>(k: usize, spent: usize, budget: usize, cx: &Ctx<'_, L>, vals: &mut Vec<usize>, out: &mut Vec<Pasting<usize>>) -> Result<()> {
        if k == cx.sl.len() {
            if out.len() >= cx.limit {
                return Err(Error::Resource(format!("more than {} labellings", cx.limit)));
            }
            out.push(cx.shape.with_labels(vals.clone()));
            return Ok(());
        }
        let s = &cx.sl[k];
        let req = s.req.map(|(a, b)| if s.flip { (vals[b], vals[a]) } else { (vals[a], vals[b]) });
        for c in (cx.cands)(s.height, req) {
            let spent = spent.saturating_add((cx.cost)(s.height, c));
            if spent > budget {
                continue;
            }
            vals[k] = c;
            go(k + 1, spent, budget, cx, vals, out)?;
        }
        Ok(())
    }
    let cx = Ctx { sl: &sl, cands, cost, shape, limit };
    go(0, 0, budget, &cx, &mut vals, &mut out)?;
    Ok(out)
}

/// One random labelling of `shape`, by randomized backtracking with a step budget.
pub fn random_labeling<L: Clone, R: Rng>(shape: &Pasting<L>, cands: &Candidates<'_>, rng: &mut R, budget: usize) -> Option<Pasting<usize>> {
    let sl = slots(shape);
    let mut vals = vec![0usize; sl.len()];
    let mut steps = 0usize;
    fn go<R: Rng>(
        k: usize,
        sl: &[Slot],
        vals: &mut Vec<usize>,
        cands: &Candidates<'_>,
        rng: &mut R,
        steps: &mut usize,
        budget: usize,
    ) -> bool {
        if k == sl.len() {
            return true;
        }
        *steps += 1;
        if *steps > budget {
            return false;
        }
        let s = &sl[k];
        let req = s.req.map(|(a, b)| if s.flip { (vals[b], vals[a]) } else { (vals[a], vals[b]) });
        let mut cs = cands(s.height, req);
        cs.shuffle(rng);
        for c in cs {
            vals[k] = c;
            if go(k + 1, sl, vals, cands, rng, steps, budget) {
                return true;
            }
        }
        false
    }
    go(0, &sl, &mut vals, cands, rng, &mut steps, budget).then(|| shape.with_labels(vals))
}

/// Checks that a labelling is compatible with the given raw boundary maps.
pub fn check_labels(p: &Pasting<usize>, count: &dyn Fn(usize) -> usize, bd: &dyn Fn(usize, usize) -> (usize, usize)) -> Result<()> {
    p.check_tree()?;
    fn go(
        n: &Node<usize>,
        h: usize,
        count: &dyn Fn(usize) -> usize,
        bd: &dyn Fn(usize, usize) -> (usize, usize),
    ) -> Result<()> {
        for &g in &n.gaps {
            if g >= count(h) {
                return domain(format!("label {g} is not a {h}-cell"));
            }
        }
        for (i, c) in n.children.iter().enumerate() {
            let want = child_requirement(&n.gaps, i, c.dec, h);
            for &g in &c.gaps {
                if g < count(h + 1) && bd(h + 1, g) != want {
                    return domain(format!("label {g} at height {} does not fit between its neighbours", h + 1));
                }
            }
            go(c, h + 1, count, bd)?;
        }
        Ok(())
    }
    go(&p.root, 0, count, bd)
}

/// Every plane tree with exactly `edges` non-root nodes and height at most `max_height`.
pub fn plane_trees(edges: usize, max_height: usize) -> Vec<Node<()>> {
    fn forests(n: usize, d: usize) -> Vec<Vec<Node<()>>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        if d == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for k in 1..=n {
            for sub in forests(k - 1, d - 1) {
                let t = Node { dec: 0, gaps: vec![(); sub.len() + 1], children: sub };
                for rest in forests(n - k, d) {
                    let mut f = vec![t.clone()];
                    f.extend(rest);
                    out.push(f);
                }
            }
        }
        out
    }
    forests(edges, max_height)
        .into_iter()
        .map(|f| Node { dec: 0, gaps: vec![(); f.len() + 1], children: f })
        .collect()
}

/// Every decorated tree of dimension `dim` with at most `max_edges` non-root nodes,
/// ordered by size then lexicographically. Strict mode omits decorations.
pub fn all_trees(dim: usize, max_edges: usize, involutive: bool) -> Vec<DecoratedTree> {
    all_trees_where(dim, max_edges, involutive, |_| true)
}

/// As [`all_trees`], keeping only shapes accepted by `keep` before decorating them.
pub fn all_trees_where(dim: usize, max_edges: usize, involutive: bool, keep: impl Fn(&Node<()>) -> bool) -> Vec<DecoratedTree> {
    let mut out = Vec::new();
    for e in 0..=max_edges {
        for t in plane_trees(e, dim).into_iter().filter(|t| keep(t)) {
            if !involutive {
                out.push(Pasting { dim, root: t });
                continue;
            }
            for bits in 0..(1u64 << e) {
                let mut k = 0;
                fn deco(n: &mut Node<()>, h: usize, bits: u64, k: &mut usize) {
                    for c in n.children.iter_mut() {
                        let b = (bits >> *k) & 1 == 1;
                        *k += 1;
                        c.dec = n.dec | if b { 1 << h } else { 0 };
                        deco(c, h + 1, bits, k);
                    }
                }
                let mut root = t.clone();
                deco(&mut root, 0, bits, &mut k);
                out.push(Pasting { dim, root });
            }
        }
    }
    out
}

fn write_dec(f: &mut fmt::Formatter<'_>, d: Dec) -> fmt::Result {
    if d != 0 {
        let idx: Vec<String> = (0..16).filter(|&q| has_bit(d, q)).map(|q| q.to_string()).collect();
        write!(f, "{{{}}}", idx.join(","))?;
    }
    Ok(())
}

impl fmt::Display for Pasting<()> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(n: &Node<()>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "(")?;
            write_dec(f, n.dec)?;
            for c in &n.children {
                go(c, f)?;
            }
            write!(f, ")")
        }
        go(&self.root, f)
    }
}

impl DecoratedTree {
    /// Parses the parenthesised text form, e.g. `(()({0}))`. The dimension defaults to the height.
    pub fn parse(text: &str, dim: Option<usize>) -> Result<DecoratedTree> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        fn err<T>(pos: usize, msg: &str) -> Result<T> {
            Err(Error::Parse { line: 1, col: pos + 1, msg: msg.into() })
        }
        fn node(chars: &[char], pos: &mut usize) -> Result<Node<()>> {
            if chars.get(*pos) != Some(&'(') {
                return err(*pos, "expected '('");
            }
            *pos += 1;
            let mut dec: Dec = 0;
            if chars.get(*pos) == Some(&'{') {
                *pos += 1;
                let start = *pos;
                while chars.get(*pos).is_some_and(|&c| c != '}') {
                    *pos += 1;
                }
                if chars.get(*pos) != Some(&'}') {
                    return err(*pos, "unterminated decoration");
                }
                let body: String = chars[start..*pos].iter().collect();
                *pos += 1;
                for part in body.split(',').filter(|s| !s.is_empty()) {
                    match part.parse::<usize>() {
                        Ok(q) if q < 16 => dec |= 1 << q,
                        _ => return err(start, "bad decoration index"),
                    }
                }
            }
            let mut children = Vec::new();
            while chars.get(*pos) == Some(&'(') {
                children.push(node(chars, pos)?);
            }
            if chars.get(*pos) != Some(&')') {
                return err(*pos, "expected ')'");
            }
            *pos += 1;
            Ok(Node { dec, gaps: vec![(); children.len() + 1], children })
        }
        let root = node(&chars, &mut pos)?;
        if pos != chars.len() {
            return err(pos, "trailing input after tree");
        }
        let h = root.height();
        let t = Pasting { dim: dim.unwrap_or(h), root };
        t.check_tree()?;
        Ok(t)
    }

    /// The tree of a single `dim`-cell.
    pub fn unit(dim: usize) -> DecoratedTree {
        Pasting::globe(dim, |_, _| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str, d: usize) -> DecoratedTree {
        DecoratedTree::parse(s, Some(d)).unwrap()
    }

    #[test]
    fn text_round_trip() {
        for s in ["()", "(()({0}))", "((()({1})))", "(({0}({0,1})))"] {
            let tree = DecoratedTree::parse(s, None).unwrap();
            assert_eq!(tree.to_string(), s);
        }
        assert!(DecoratedTree::parse("(()", None).is_err());
        assert!(DecoratedTree::parse("(({1}))", None).is_err());
        assert!(DecoratedTree::parse("({0})", None).is_err());
    }

    #[test]
    fn path_composition_concatenates() {
        let p1 = t("(())", 1);
        let p2 = t("(()())", 1);
        let c = Pasting::compose_eq(0, &p2, &p1).unwrap();
        assert_eq!(c.to_string(), "(()()())");
        assert_eq!(c.edges(), 3);
    }

    #[test]
    fn vertical_composition_needs_matching_boundaries() {
        let a = t("((()))", 2);
        let c = Pasting::compose_eq(1, &a, &a).unwrap();
        assert_eq!(c.to_string(), "((()()))");
        let two = t("((())(()))", 2);
        assert!(Pasting::compose_eq(1, &a, &two).is_err());
    }

    #[test]
    fn involution_mirrors_and_toggles() {
        let p = t("(()(()))", 2);
        assert_eq!(p.involute(0).to_string(), "(({0}({0}))({0}))");
        assert_eq!(p.involute(0).involute(0), p);
        assert_eq!(p.involute(1).to_string(), "(()(({1})))");
        assert_eq!(p.involute(2), p);
        assert_eq!(p.involute(0).involute(1), p.involute(1).involute(0));
    }

    #[test]
    fn boundaries() {
        let p = t("((()())())", 2);
        assert_eq!(p.boundary(Side::Source).unwrap().to_string(), "(()())");
        assert!(t("()", 0).boundary(Side::Source).is_err());
        let g = DecoratedTree::unit(3);
        assert_eq!(g.to_string(), "(((())))");
        assert_eq!(g.boundary(Side::Target).unwrap(), DecoratedTree::unit(2));
    }

    #[test]
    fn tree_census() {
        // plane trees with e edges are counted by Catalan numbers when height is unbounded
        assert_eq!(plane_trees(3, 3).len(), 5);
        assert_eq!(plane_trees(3, 1).len(), 1);
        assert_eq!(all_trees(1, 2, false).len(), 3);
        assert_eq!(all_trees(1, 2, true).len(), 1 + 2 + 4);
        for tr in all_trees(3, 4, true) {
            tr.check_tree().unwrap();
        }
    }

    #[test]
    fn labelled_globe_and_enumeration() {
        // theta: a,b ; f,g : a -> b ; alpha : f => g
        let src = |d: usize, i: usize| -> (usize, usize) {
            match d {
                1 => (0, 1),
                2 => (0, 1),
                _ => unreachable!("{i}"),
            }
        };
        let cands = move |d: usize, req: Option<(usize, usize)>| -> Vec<usize> {
            let n = [2, 2, 1][d];
            (0..n).filter(|&i| req.is_none_or(|r| src(d, i) == r)).collect()
        };
        let two = t("(())", 1);
        assert_eq!(labelings(&two, &cands, 100).unwrap().len(), 2);
        let path2 = t("(()())", 1);
        assert_eq!(labelings(&path2, &cands, 100).unwrap().len(), 0);
        let inv = t("(({0}))", 1);
        assert_eq!(labelings(&inv, &cands, 100).unwrap().len(), 2);
        let glob = t("((()))", 2);
        let ls = labelings(&glob, &cands, 100).unwrap();
        assert_eq!(ls.len(), 1);
        let count = |d: usize| [2, 2, 1][d];
        check_labels(&ls[0], &count, &src).unwrap();
        let mut rng = rand::thread_rng();
        assert!(random_labeling(&glob, &cands, &mut rng, 100).is_some());
    }
}
