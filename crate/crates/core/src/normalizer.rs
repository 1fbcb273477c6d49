//! Deciding equality in the free strict (involutive) globular ω-category.
//!
//! A term is first simplified by a traced rewrite pass (involutions pushed to
//! the generators, units and identity composites removed, composites
//! right-associated), then evaluated into a labelled decorated pasting tree.
//! The tree is the exact normal form; interchange is absorbed by it, and the
//! canonical term is read back from the tree in a fixed order.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::globular::{CellRef, GlobularSet};
use crate::pasting::{has_bit, Node, Pasting};
use crate::term::{comp, id, ids, inv, Generators, Mode, Term};

pub const DEFAULT_BUDGET: usize = 100_000;

/// Evaluates a term to its pasting. `merge` decides whether two labels that
/// must coincide at a composite do coincide.
pub fn eval<S: Generators>(
    t: &Term<S::Gen>,
    sys: &S,
    merge: &mut dyn FnMut(&S::Label, &S::Label) -> bool,
) -> Result<Pasting<S::Label>> {
    Ok(match t {
        Term::Gen(g) => sys.gen_pasting(g)?,
        Term::Id(a) => eval(a, sys, merge)?.identity(),
        Term::Comp(p, l, r) => {
            let l = eval(l, sys, merge)?;
            let r = eval(r, sys, merge)?;
            Pasting::compose(*p, &l, &r, merge)?
        }
        Term::Inv(q, a) => eval(a, sys, merge)?.involute(*q),
    })
}

pub fn eval_exact<S: Generators>(t: &Term<S::Gen>, sys: &S) -> Result<Pasting<S::Label>> {
    eval(t, sys, &mut |a, b| a == b)
}

/// The canonical term of a pasting: each node composes its children's terms
/// along its own level, right-nested, padding shallower factors with identities;
/// a leaf is its generator under the involutions of its decoration, ascending.
pub fn readback<L, G>(p: &Pasting<L>, gen: &mut dyn FnMut(usize, &L) -> G) -> Term<G> {
    fn build<L, G>(n: &Node<L>, h: usize, gen: &mut dyn FnMut(usize, &L) -> G) -> (Term<G>, usize) {
        if n.children.is_empty() {
            let mut t = Term::Gen(gen(h, &n.gaps[0]));
            for q in 0..h {
                if has_bit(n.dec, q) {
                    t = inv(q, t);
                }
            }
            return (t, h);
        }
        let subs: Vec<(Term<G>, usize)> = n.children.iter().map(|c| build(c, h + 1, gen)).collect();
        let d = subs.iter().map(|s| s.1).max().unwrap();
        let mut it = subs.into_iter().map(|(t, k)| ids(d - k, t));
        let mut acc = it.next().unwrap();
        for t in it {
            acc = comp(h, t, acc);
        }
        (acc, d)
    }
    let (t, d) = build(&p.root, 0, gen);
    ids(p.dim - d, t)
}

pub fn readback_cells(p: &Pasting<usize>) -> Term<CellRef> {
    readback(p, &mut |h, &i| CellRef::new(h, i))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalForm {
    pub term: Term<CellRef>,
    pub pasting: Pasting<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule: &'static str,
    pub path: String,
    pub before: String,
    pub after: String,
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub form: CanonicalForm,
    pub trace: Vec<TraceStep>,
}

/// A rewrite rule: a named partial function on the root of a term.
pub struct RewriteRule<G> {
    pub name: &'static str,
    pub apply: fn(&Term<G>, &dyn Fn(&Term<G>) -> usize) -> Option<Term<G>>,
}

fn id_depth<G>(t: &Term<G>) -> (usize, &Term<G>) {
    let mut k = 0;
    let mut t = t;
    while let Term::Id(a) = t {
        k += 1;
        t = a;
    }
    (k, t)
}

/// The oriented generating pairs, in the order they are tried at a redex.
pub fn rules<G: Clone>() -> Vec<RewriteRule<G>> {
    vec![
        RewriteRule {
            name: "grounding",
            apply: |t, dim| match t {
                Term::Inv(q, a) if *q >= dim(a) => Some((**a).clone()),
                _ => None,
            },
        },
        RewriteRule {
            name: "double-involution",
            apply: |t, _| match t {
                Term::Inv(q, a) => match &**a {
                    Term::Inv(r, b) if q == r => Some((**b).clone()),
                    _ => None,
                },
                _ => None,
            },
        },
        RewriteRule {
            name: "commute-involutions",
            apply: |t, _| match t {
                Term::Inv(q, a) => match &**a {
                    Term::Inv(r, b) if q < r => Some(inv(*r, inv(*q, (**b).clone()))),
                    _ => None,
                },
                _ => None,
            },
        },
        RewriteRule {
            name: "involution-identity",
            apply: |t, dim| match t {
                Term::Inv(q, a) => match &**a {
                    Term::Id(b) if *q < dim(b) => Some(id(inv(*q, (**b).clone()))),
                    Term::Id(b) => Some(id((**b).clone())),
                    _ => None,
                },
                _ => None,
            },
        },
        RewriteRule {
            name: "involution-contravariant",
            apply: |t, _| match t {
                Term::Inv(q, a) => match &**a {
                    Term::Comp(p, l, r) if p == q => Some(comp(*p, inv(*q, (**r).clone()), inv(*q, (**l).clone()))),
                    _ => None,
                },
                _ => None,
            },
        },
        RewriteRule {
            name: "involution-covariant",
            apply: |t, _| match t {
                Term::Inv(q, a) => match &**a {
                    Term::Comp(p, l, r) if p != q => Some(comp(*p, inv(*q, (**l).clone()), inv(*q, (**r).clone()))),
                    _ => None,
                },
                _ => None,
            },
        },
        RewriteRule {
            name: "unit-left",
            apply: |t, dim| match t {
                Term::Comp(p, l, r) => {
                    let (k, _) = id_depth(l);
                    (dim(l).checked_sub(*p) == Some(k)).then(|| (**r).clone())
                }
                _ => None,
            },
        },
        RewriteRule {
            name: "unit-right",
            apply: |t, dim| match t {
                Term::Comp(p, l, r) => {
                    let (k, _) = id_depth(r);
                    (dim(r).checked_sub(*p) == Some(k)).then(|| (**l).clone())
                }
                _ => None,
            },
        },
        RewriteRule {
            name: "identity-functoriality",
            apply: |t, dim| match t {
                Term::Comp(p, l, r) => match (&**l, &**r) {
                    (Term::Id(a), Term::Id(b)) if *p < dim(a) => Some(id(comp(*p, (**a).clone(), (**b).clone()))),
                    _ => None,
                },
                _ => None,
            },
        },
        RewriteRule {
            name: "associativity",
            apply: |t, _| match t {
                Term::Comp(p, l, c) => match &**l {
                    Term::Comp(q, a, b) if p == q => Some(comp(*p, (**a).clone(), comp(*p, (**b).clone(), (**c).clone()))),
                    _ => None,
                },
                _ => None,
            },
        },
    ]
}

/// Finds the innermost-leftmost redex and rewrites it once.
fn step<G: Clone>(
    t: &Term<G>,
    rules: &[RewriteRule<G>],
    dim: &dyn Fn(&Term<G>) -> usize,
    path: &mut Vec<usize>,
) -> Option<(&'static str, Vec<usize>, Term<G>, Term<G>)> {
    let children: Vec<&Term<G>> = match t {
        Term::Gen(_) => vec![],
        Term::Id(a) | Term::Inv(_, a) => vec![a],
        Term::Comp(_, l, r) => vec![l, r],
    };
    for (k, c) in children.into_iter().enumerate() {
        path.push(k);
        if let Some(hit) = step(c, rules, dim, path) {
            return Some(hit);
        }
        path.pop();
    }
    for r in rules {
        if let Some(out) = (r.apply)(t, dim) {
            return Some((r.name, path.clone(), t.clone(), out));
        }
    }
    None
}

/// Runs the rewrite pass to a fixpoint, recording every step.
pub fn rewrite<S: Generators>(
    t: &Term<S::Gen>,
    sys: &S,
    budget: usize,
    name: &dyn Fn(&S::Gen) -> String,
) -> Result<(Term<S::Gen>, Vec<TraceStep>)> {
    let rs = rules::<S::Gen>();
    let dim = |t: &Term<S::Gen>| t.dim(sys).unwrap_or(0);
    let mut cur = t.clone();
    let mut trace = Vec::new();
    loop {
        let mut path = Vec::new();
        let Some((rule, at, before, after)) = step(&cur, &rs, &dim, &mut path) else { break };
        if trace.len() >= budget {
            return Err(Error::Resource(format!(
                "rewrite budget of {budget} steps exhausted at {}",
                cur.to_sexp(name)
            )));
        }
        trace.push(TraceStep {
            rule,
            path: at.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("."),
            before: before.to_sexp(name),
            after: after.to_sexp(name),
        });
        cur = cur.replace_at(&at, after);
    }
    Ok((cur, trace))
}

fn check_mode<G: Clone>(t: &Term<G>, mode: Mode) -> Result<()> {
    if !mode.involutive() && t.has_inv() {
        return domain("involution in a strict-mode term");
    }
    Ok(())
}

pub fn normalize_traced(t: &Term<CellRef>, mode: Mode, q: &GlobularSet, budget: usize) -> Result<Normalized> {
    check_mode(t, mode)?;
    let name = |c: &CellRef| q.name(*c).to_string();
    t.dim(q)?;
    let (pre, mut trace) = rewrite(t, q, budget, &name)?;
    let pasting = eval_exact(&pre, q)?;
    let term = readback_cells(&pasting);
    if term != pre {
        trace.push(TraceStep { rule: "exchange-order", path: String::new(), before: pre.to_sexp(&name), after: term.to_sexp(&name) });
    }
    Ok(Normalized { form: CanonicalForm { term, pasting }, trace })
}

pub fn normalize(t: &Term<CellRef>, mode: Mode, q: &GlobularSet) -> Result<CanonicalForm> {
    Ok(normalize_traced(t, mode, q, DEFAULT_BUDGET)?.form)
}

/// The normal form without the rewrite pass; used where only the pasting matters.
pub fn pasting_of(t: &Term<CellRef>, mode: Mode, q: &GlobularSet) -> Result<Pasting<usize>> {
    check_mode(t, mode)?;
    eval_exact(t, q)
}

pub fn equal_terms(t1: &Term<CellRef>, t2: &Term<CellRef>, mode: Mode, q: &GlobularSet) -> Result<bool> {
    let (d1, d2) = (t1.dim(q)?, t2.dim(q)?);
    if d1 != d2 {
        return domain(format!("comparing a {d1}-cell with a {d2}-cell"));
    }
    Ok(pasting_of(t1, mode, q)? == pasting_of(t2, mode, q)?)
}

/// Checks that a trace replays from `start`: every step's redex is found at its path.
pub fn replay_trace(start: &Term<CellRef>, trace: &[TraceStep], q: &GlobularSet) -> Result<Term<CellRef>> {
    let name = |c: &CellRef| q.name(*c).to_string();
    let mut cur = start.clone();
    for s in trace {
        if s.rule == "exchange-order" {
            if cur.to_sexp(&name) != s.before {
                return domain("exchange-order step does not start from the rewritten term");
            }
            cur = readback_cells(&eval_exact(&cur, q)?);
            if cur.to_sexp(&name) != s.after {
                return domain("exchange-order step does not reach the canonical term");
            }
            continue;
        }
        let sub = cur.at_path(&s.path).ok_or_else(|| Error::Domain(format!("no subterm at {}", s.path)))?;
        if sub.to_sexp(&name) != s.before {
            return domain(format!("step {} does not match at {}", s.rule, s.path));
        }
        let rule = rules::<CellRef>().into_iter().find(|r| r.name == s.rule).ok_or_else(|| Error::Domain(s.rule.into()))?;
        let dim = |t: &Term<CellRef>| t.dim(q).unwrap_or(0);
        let after = (rule.apply)(sub, &dim).ok_or_else(|| Error::Domain(format!("{} does not apply", s.rule)))?;
        if after.to_sexp(&name) != s.after {
            return domain(format!("step {} produces a different result", s.rule));
        }
        let path: Vec<usize> = s.path.split('.').filter(|x| !x.is_empty()).map(|x| x.parse().unwrap()).collect();
        cur = cur.replace_at(&path, after);
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::globular::{terminal_set, theta_set};
    use crate::term::gen;

    #[test]
    fn identities_composed_along_their_top_boundary() {
        let q = terminal_set(2);
        let pt = gen(CellRef::new(0, 0));
        let t = comp(1, id(id(pt.clone())), id(id(pt.clone())));
        let n = normalize_traced(&t, Mode::Strict, &q, DEFAULT_BUDGET).unwrap();
        assert_eq!(n.form.term, id(id(pt)));
        assert!(well_formed_steps(&t, &n.trace, &q));
    }

    fn well_formed_steps(start: &Term<CellRef>, trace: &[TraceStep], q: &GlobularSet) -> bool {
        replay_trace(start, trace, q).is_ok()
    }

    fn grid() -> GlobularSet {
        // x --f,f1,f2--> y --g,g1,g2--> z ; alpha: f=>f1, alpha2: f1=>f2, beta: g=>g1, beta2: g1=>g2
        GlobularSet::from_tables(
            2,
            vec![
                vec!["x".into(), "y".into(), "z".into()],
                ["f", "f1", "f2", "g", "g1", "g2"].iter().map(|s| s.to_string()).collect(),
                ["alpha", "alpha2", "beta", "beta2"].iter().map(|s| s.to_string()).collect(),
            ],
            vec![vec![], vec![0, 0, 0, 1, 1, 1], vec![0, 1, 3, 4]],
            vec![vec![], vec![1, 1, 1, 2, 2, 2], vec![1, 2, 4, 5]],
        )
        .unwrap()
    }

    #[test]
    fn spec_examples() {
        let q = grid();
        let c = |n: &str| gen(q.find(n).unwrap());
        let m = Mode::Involutive;
        assert_eq!(normalize(&inv(0, inv(0, c("f"))), m, &q).unwrap().term, c("f"));
        assert_eq!(normalize(&comp(0, id(c("y")), c("f")), Mode::Strict, &q).unwrap().term, c("f"));
        assert_eq!(
            normalize(&inv(0, comp(0, c("g"), c("f"))), m, &q).unwrap().term,
            comp(0, inv(0, c("f")), inv(0, c("g")))
        );
        assert_eq!(normalize(&inv(1, c("f")), m, &q).unwrap().term, c("f"));
        assert!(normalize(&inv(0, c("f")), Mode::Strict, &q).is_err());
    }

    #[test]
    fn exchange_and_associativity() {
        let q = grid();
        let c = |n: &str| gen(q.find(n).unwrap());
        let lhs = comp(1, comp(0, c("beta2"), c("alpha2")), comp(0, c("beta"), c("alpha")));
        let rhs = comp(0, comp(1, c("beta2"), c("beta")), comp(1, c("alpha2"), c("alpha")));
        assert!(equal_terms(&lhs, &rhs, Mode::Strict, &q).unwrap());
        let th = theta_set();
        let f = gen(th.find("f").unwrap());
        assert!(!equal_terms(&f, &inv(0, f.clone()), Mode::Involutive, &th).unwrap());
        let t1 = terminal_set(1);
        let e = gen(CellRef::new(1, 0));
        let a = comp(0, comp(0, e.clone(), e.clone()), e.clone());
        let b = comp(0, e.clone(), comp(0, e.clone(), e.clone()));
        assert!(equal_terms(&a, &b, Mode::Strict, &t1).unwrap());
        assert!(equal_terms(&a, &e, Mode::Strict, &t1).is_ok_and(|x| !x));
    }

    #[test]
    fn trace_replays_and_normal_form_is_stable() {
        let q = grid();
        let c = |n: &str| gen(q.find(n).unwrap());
        let t = inv(1, inv(0, comp(1, comp(0, c("beta2"), c("alpha2")), comp(0, c("beta"), c("alpha")))));
        let n = normalize_traced(&t, Mode::Involutive, &q, DEFAULT_BUDGET).unwrap();
        assert!(!n.trace.is_empty());
        assert_eq!(replay_trace(&t, &n.trace, &q).unwrap(), n.form.term);
        let again = normalize_traced(&n.form.term, Mode::Involutive, &q, DEFAULT_BUDGET).unwrap();
        assert_eq!(again.form, n.form);
        assert!(again.trace.is_empty(), "canonical term admits no rewrite: {:?}", again.trace);
    }

    #[test]
    fn budget_is_enforced() {
        let t1 = terminal_set(1);
        let e = gen(CellRef::new(1, 0));
        let t = inv(0, inv(0, inv(0, inv(0, e))));
        assert!(matches!(normalize_traced(&t, Mode::Involutive, &t1, 1), Err(Error::Resource(_))));
    }
}
