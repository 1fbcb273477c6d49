use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use omegacat::collections::{par_set, terminal_collection, TCollection};
use omegacat::document::{Block, Document};
use omegacat::globular::{pullback, random_morphism, random_set, terminal_set, theta_set, CellRef, GlobularSet, Side};
use omegacat::monad::{flatten, set_candidates, split, tree_decode, tree_encode, FreeCell, FreeSet};
use omegacat::normalizer::{normalize, normalize_traced, replay_trace};
use omegacat::operads::{free_operadic_magma, operad_congruence, replay_merges, MCell};
use omegacat::pasting::{all_trees, random_labeling};
use omegacat::term::{boundary_of_term, enumerate_terms, inv, Mode, Term, TermUniverse};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Pool = Vec<Vec<Term<CellRef>>>;

fn theta() -> &'static GlobularSet {
    static Q: OnceLock<GlobularSet> = OnceLock::new();
    Q.get_or_init(theta_set)
}

fn pool() -> &'static Pool {
    static P: OnceLock<Pool> = OnceLock::new();
    P.get_or_init(|| {
        let u = TermUniverse::build(theta(), Mode::Involutive, 4, 2, 5_000_000).unwrap();
        (0..=2).map(|d| u.terms(d).map(|(t, _)| t.clone()).collect()).collect()
    })
}

fn pick(d: usize, i: usize) -> &'static Term<CellRef> {
    let v = &pool()[d];
    &v[i % v.len()]
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn nf(t: &Term<CellRef>) -> Term<CellRef> {
    normalize(t, Mode::Involutive, theta()).unwrap().term
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_sets_are_globular(seed in any::<u64>()) {
        let q = random_set(&mut rng(seed), 3, 4);
        for n in 2..=3 {
            for x in q.cells(n) {
                for side in [Side::Source, Side::Target] {
                    let via_s = q.boundary(q.boundary(x, Side::Source).unwrap(), side).unwrap();
                    let via_t = q.boundary(q.boundary(x, Side::Target).unwrap(), side).unwrap();
                    prop_assert_eq!(via_s, via_t);
                }
            }
        }
    }

    #[test]
    fn parallel_is_an_equivalence(seed in any::<u64>()) {
        let q = random_set(&mut rng(seed), 2, 4);
        for n in 0..=2 {
            let cells: Vec<CellRef> = q.cells(n).collect();
            for &a in &cells {
                prop_assert!(q.parallel(a, a).unwrap());
                for &b in &cells {
                    let ab = q.parallel(a, b).unwrap();
                    prop_assert_eq!(ab, q.parallel(b, a).unwrap());
                    for &c in &cells {
                        if ab && q.parallel(b, c).unwrap() {
                            prop_assert!(q.parallel(a, c).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pullback_square_commutes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = Arc::new(random_set(&mut r, 2, 3));
        let a = Arc::new(random_set(&mut r, 2, 3));
        let b = Arc::new(random_set(&mut r, 2, 3));
        let (Some(f), Some(g)) = (random_morphism(&mut r, &a, &x), random_morphism(&mut r, &b, &x)) else {
            return Ok(());
        };
        let pb = pullback(&f, &g).unwrap();
        for n in 0..=2 {
            for c in pb.set.cells(n) {
                prop_assert_eq!(f.apply(pb.p1.apply(c)), g.apply(pb.p2.apply(c)));
                if n > 0 {
                    for side in [Side::Source, Side::Target] {
                        let below = pb.set.boundary(c, side).unwrap();
                        prop_assert_eq!(pb.p1.apply(below), a.boundary(pb.p1.apply(c), side).unwrap());
                        prop_assert_eq!(pb.p2.apply(below), b.boundary(pb.p2.apply(c), side).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>(), d in 0usize..=2, i in any::<usize>()) {
        let set = Arc::new(random_set(&mut rng(seed), 2, 4));
        let mut doc = Document::default();
        doc.blocks.push(Block::Gset { name: "q".into(), set });
        doc.blocks.push(Block::Gset { name: "theta".into(), set: Arc::new(theta().clone()) });
        doc.blocks.push(Block::Term { name: "t".into(), over: "theta".into(), term: pick(d, i).clone() });
        let text = doc.to_text();
        prop_assert_eq!(Document::parse(&text).unwrap(), doc);
    }

    #[test]
    fn term_boundaries_drop_dimension_and_are_globular(i in any::<usize>()) {
        let q = theta();
        let t = pick(2, i);
        let s = boundary_of_term(t, Side::Source, q).unwrap();
        let u = boundary_of_term(t, Side::Target, q).unwrap();
        prop_assert_eq!(s.dim(q).unwrap(), 1);
        prop_assert_eq!(u.dim(q).unwrap(), 1);
        for side in [Side::Source, Side::Target] {
            let a = boundary_of_term(&s, side, q).unwrap();
            let b = boundary_of_term(&u, side, q).unwrap();
            prop_assert_eq!(nf(&a), nf(&b));
        }
    }

    #[test]
    fn normal_forms_are_stable(d in 0usize..=2, i in any::<usize>()) {
        let q = theta();
        let t = pick(d, i);
        let n = normalize_traced(t, Mode::Involutive, q, 100_000).unwrap();
        prop_assert_eq!(replay_trace(t, &n.trace, q).unwrap(), n.form.term.clone());
        prop_assert_eq!(nf(&n.form.term), n.form.term.clone());
        prop_assert_eq!(n.form.term.dim(q).unwrap(), d);
        if d > 0 {
            for side in [Side::Source, Side::Target] {
                let before = nf(&boundary_of_term(t, side, q).unwrap());
                let after = nf(&boundary_of_term(&n.form.term, side, q).unwrap());
                prop_assert_eq!(before, after);
            }
        }
    }

    #[test]
    fn involutions_commute_and_ground(d in 0usize..=2, i in any::<usize>(), p in 0usize..=3, k in 0usize..=3) {
        let t = pick(d, i);
        prop_assert_eq!(nf(&inv(p, inv(k, t.clone()))), nf(&inv(k, inv(p, t.clone()))));
        prop_assert_eq!(nf(&inv(p, inv(p, t.clone()))), nf(t));
        if p >= d {
            prop_assert_eq!(nf(&inv(p, t.clone())), nf(t));
        }
    }

    #[test]
    fn strict_normal_forms_have_no_involutions(i in any::<usize>(), d in 0usize..=2) {
        let q = theta();
        let t = pick(d, i);
        if !t.has_inv() {
            let n = normalize(t, Mode::Strict, q).unwrap();
            prop_assert!(!n.term.has_inv());
            prop_assert_eq!(n.term, nf(t));
        }
    }

    #[test]
    fn tree_codec_is_inverse_and_equivariant(d in 0usize..=2, i in any::<usize>(), p in 0usize..=2) {
        let base = Arc::new(terminal_set(2));
        // theta terms pushed onto the terminal set
        let t = pick(d, i).map_gens(&mut |c: &CellRef| CellRef::new(c.dim, 0));
        let c = FreeCell::from_term(&base, Mode::Involutive, &t).unwrap();
        let tree = tree_encode(&c).unwrap();
        let back = tree_decode(&tree, Mode::Involutive).unwrap();
        prop_assert_eq!(back.pasting(), c.pasting());
        let flipped = FreeCell::from_term(&base, Mode::Involutive, &inv(p, t.clone())).unwrap();
        prop_assert_eq!(tree_encode(&flipped).unwrap(), tree.involute(p));
    }

    #[test]
    fn split_inverts_flatten(seed in any::<u64>(), d in 0usize..=2) {
        let q = terminal_set(2);
        let fs = FreeSet::build(&q, Mode::Involutive, 2, 100_000).unwrap();
        let cands = set_candidates(&fs.set);
        let mut r = rng(seed);
        let shapes = all_trees(d, 2, true);
        let shape = &shapes[(seed as usize) % shapes.len()];
        let Some(outer) = random_labeling(shape, &cands, &mut r, 10_000) else { return Ok(()) };
        let omega = fs.expand(&outer);
        let sigma = flatten(&omega).unwrap();
        let inner_shapes = omega.map(|_, p| p.shape());
        prop_assert_eq!(split(&inner_shapes, &sigma).unwrap(), omega);
    }
}

#[test]
fn enumerated_terms_are_distinct_and_subterm_closed() {
    let q = terminal_set(2);
    let mut seen: HashSet<Term<CellRef>> = HashSet::new();
    let mut by_dim: Vec<HashSet<Term<CellRef>>> = Vec::new();
    for d in 0..=2 {
        let ts = enumerate_terms(&q, Mode::Involutive, 4, d).unwrap();
        let set: HashSet<_> = ts.iter().cloned().collect();
        assert_eq!(set.len(), ts.len(), "duplicates in dimension {d}");
        seen.extend(set.iter().cloned());
        by_dim.push(set);
    }
    fn subterms(t: &Term<CellRef>, out: &mut Vec<Term<CellRef>>) {
        out.push(t.clone());
        match t {
            Term::Gen(_) => {}
            Term::Id(a) | Term::Inv(_, a) => subterms(a, out),
            Term::Comp(_, a, b) => {
                subterms(a, out);
                subterms(b, out);
            }
        }
    }
    for t in &seen {
        let mut subs = Vec::new();
        subterms(t, &mut subs);
        for s in subs {
            assert!(seen.contains(&s), "subterm {s:?} of {t:?} missing");
        }
    }
}

#[test]
fn par_triples_meet_their_boundaries() {
    for mode in [Mode::Strict, Mode::Involutive] {
        let c = terminal_collection(2, 3, mode).unwrap();
        for n in 1..=2 {
            for t in par_set(&c, n, 3).unwrap() {
                let (minus, plus) = (CellRef::new(n - 1, t.minus), CellRef::new(n - 1, t.plus));
                assert_eq!(c.proj_of(minus), &t.shape.boundary(Side::Source).unwrap());
                assert_eq!(c.proj_of(plus), &t.shape.boundary(Side::Target).unwrap());
                if n > 1 {
                    assert!(c.carrier.parallel(minus, plus).unwrap());
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn free_magma_is_graded_and_its_quotient_replays(seed in any::<u64>()) {
        let mut r = rng(seed);
        let term = terminal_collection(1, 2, Mode::Involutive).unwrap();
        let qs = Arc::new(random_set(&mut r, 1, 2));
        let Some(g) = random_morphism(&mut r, &qs, &term.carrier) else { return Ok(()) };
        let proj = (0..=1).map(|d| qs.cells(d).map(|c| term.proj_of(g.apply(c)).clone()).collect()).collect();
        let q = Arc::new(TCollection::new("Q", Mode::Involutive, qs, proj).unwrap());
        let fm = free_operadic_magma(&q, 1, 2).unwrap();
        let stage = fm.magma.stage.as_ref().unwrap();
        for (d, cells) in fm.cells.iter().enumerate() {
            for (i, c) in cells.iter().enumerate() {
                if let MCell::Mu(x, tau) = c {
                    prop_assert!(stage[d][*x] < stage[d][i]);
                    for (h, &l) in tau.labels() {
                        prop_assert!(h <= d);
                        prop_assert!(stage[h][l] < stage[d][i]);
                    }
                }
            }
        }
        let oc = operad_congruence(&fm, true).unwrap();
        prop_assert_eq!(replay_merges(&fm, &oc).unwrap(), oc.merges.len());
    }
}
