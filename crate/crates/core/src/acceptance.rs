//! The acceptance suite, AC-1 to AC-9. Each criterion runs its check, times it,
//! and passes only with zero failures inside its runtime budget.
//!
//! The `quick` profile shrinks every size for smoke runs; `desk` uses the full sizes.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::collections::{associator_witness, left_unitor, pentagon, right_unitor, terminal_collection, CollectionMorphism, TCollection};
use crate::error::Result;
use crate::globular::{random_morphism, random_set, terminal_set, theta_set, CellRef, GlobularSet};
use crate::magma_oracle::magma_closure_oracle;
use crate::monad::{check_cartesian, check_monad_laws, tree_decode, tree_encode, FreeCell, SampleSpec, Square};
use crate::normalizer::{normalize, CanonicalForm};
use crate::operads::{
    check_operad_laws, check_operadic_contraction, count_structure_maps, free_contracted_operad, initial_operad, replay_merges,
    terminal_operad, universal_factorization,
};
use crate::oracle::congruence_closure_oracle;
use crate::pasting::{all_trees_where, Pasting};
use crate::term::{comp, id, inv, Mode, Term, TermUniverse};

const MODES: [Mode; 2] = [Mode::Strict, Mode::Involutive];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Quick,
    Desk,
}

impl Profile {
    pub fn parse(s: &str) -> Option<Profile> {
        match s {
            "quick" => Some(Profile::Quick),
            "desk" => Some(Profile::Desk),
            _ => None,
        }
    }

    fn desk(self) -> bool {
        self == Profile::Desk
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub detail: String,
}

impl Criterion {
    pub fn line(&self) -> String {
        format!(
            "{} {} ({:.1}s of {:.0}s) {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.budget_seconds,
            self.title,
            self.detail
        )
    }
}

fn timed(id: &str, title: &str, budget: f64, run: impl FnOnce() -> Result<(bool, String)>) -> Criterion {
    let t0 = Instant::now();
    let (ok, detail) = match run() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let seconds = t0.elapsed().as_secs_f64();
    Criterion {
        id: id.into(),
        title: title.into(),
        passed: ok && seconds < budget,
        seconds,
        budget_seconds: budget,
        detail: if seconds < budget { detail } else { format!("{detail}; over the time budget") },
    }
}

/// Normalizer against the congruence-closure oracle over every small term.
pub fn ac1(profile: Profile) -> Criterion {
    timed("AC-1", "normalizer agrees with the closure oracle", 120.0, || {
        let q = terminal_set(2);
        let nodes = if profile.desk() { 6 } else { 4 };
        let mut parts = Vec::new();
        let mut bad = 0;
        for mode in MODES {
            let part = congruence_closure_oracle(&q, mode, nodes, 2, 20_000_000)?;
            let mut owner: HashMap<CanonicalForm, usize> = HashMap::new();
            let mut classes = 0;
            for class in part.classes.iter().flatten() {
                classes += 1;
                let forms: Vec<CanonicalForm> = class.iter().map(|t| normalize(t, mode, &q)).collect::<Result<_>>()?;
                // split: one oracle class, several normal forms
                bad += forms.iter().filter(|f| **f != forms[0]).count();
                // merged: one normal form, several oracle classes
                if owner.insert(forms[0].clone(), classes).is_some() {
                    bad += 1;
                }
            }
            parts.push(format!("{mode:?} {} terms in {classes} classes", part.universe_size));
        }
        Ok((bad == 0, format!("{}; {bad} mismatches (terms with at most {nodes} nodes)", parts.join(", "))))
    })
}

/// Tree encoding is a bijection from oracle classes onto trees.
pub fn ac2(profile: Profile) -> Criterion {
    timed("AC-2", "tree codec is a bijection on involutive classes", 60.0, || {
        let nodes = if profile.desk() { 5 } else { 3 };
        let base = Arc::new(terminal_set(3));
        let part = congruence_closure_oracle(&base, Mode::Involutive, nodes, 2, 20_000_000)?;
        let mut images: HashSet<crate::pasting::DecoratedTree> = HashSet::new();
        let mut split = 0;
        for level in &part.classes {
            for class in level {
                let trees: Vec<_> = class
                    .iter()
                    .map(|t| FreeCell::from_term(&base, Mode::Involutive, t).and_then(|c| tree_encode(&c)))
                    .collect::<Result<_>>()?;
                split += trees.iter().filter(|t| **t != trees[0]).count();
                images.insert(trees[0].clone());
            }
        }
        let classes = part.class_count();
        let mut invalid = 0;
        for t in &images {
            if t.check_tree().is_err() || tree_decode(t, Mode::Involutive).is_err() {
                invalid += 1;
            }
        }
        // every valid tree whose canonical term is small enough is hit
        let mut expected = 0;
        let mut unhit = 0;
        // a term of size s has at most (s + 1) / 2 generators, each a leaf adding at most d edges
        let gens = nodes.div_ceil(2);
        for d in 0..=3 {
            for t in all_trees_where(d, gens * d, true, |n| n.leaves() <= gens) {
                let c = tree_decode(&t, Mode::Involutive)?;
                if c.term().size() <= nodes {
                    expected += 1;
                    if !images.contains(&t) {
                        unhit += 1;
                    }
                }
            }
        }
        let ok = split == 0 && invalid == 0 && unhit == 0 && classes == images.len();
        Ok((
            ok,
            format!(
                "{classes} classes onto {} trees, {expected} trees with small canonical terms; {split} split, {invalid} invalid, {unhit} missed",
                images.len()
            ),
        ))
    })
}

/// Monad unit and associativity laws on seeded samples.
pub fn ac3(profile: Profile, seed: u64) -> Criterion {
    timed("AC-3", "monad laws on seeded samples", 30.0, || {
        let count = if profile.desk() { 200 } else { 20 };
        let mut failures = 0;
        let mut parts = Vec::new();
        for (qn, q) in [("terminal", terminal_set(2)), ("theta", theta_set())] {
            let q = Arc::new(q);
            for mode in MODES {
                let rep = check_monad_laws(&q, mode, &SampleSpec { seed, count, ..SampleSpec::default() })?;
                failures += rep.failures() + count - rep.samples;
                parts.push(format!("{qn}/{mode:?} {}", rep.samples));
            }
        }
        Ok((failures == 0, format!("samples {}; {failures} failures", parts.join(", "))))
    })
}

/// Naturality squares of the unit and multiplication are pull-backs.
pub fn ac4(profile: Profile, seed: u64) -> Criterion {
    timed("AC-4", "unit and multiplication squares are cartesian", 60.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wanted = if profile.desk() { 20 } else { 4 };
        let (mut done, mut failures, mut cones) = (0, 0, 0);
        while done < wanted {
            let dim = rng.gen_range(1..=2);
            let a = Arc::new(random_set(&mut rng, dim, 4));
            let b = Arc::new(random_set(&mut rng, dim, 4));
            let Some(phi) = random_morphism(&mut rng, &a, &b) else { continue };
            done += 1;
            for mode in MODES {
                for sq in [Square::Unit, Square::Mult] {
                    let rep = check_cartesian(sq, &phi, mode, 2)?;
                    cones += rep.pullback_size;
                    if !rep.is_pullback() {
                        failures += 1;
                    }
                }
            }
        }
        Ok((failures == 0, format!("{done} morphisms, 4 squares each, {cones} cones; {failures} failures")))
    })
}

/// Operad laws and operadic contraction of the terminal operad.
pub fn ac5(profile: Profile) -> Criterion {
    timed("AC-5", "terminal operad laws and contraction diagrams", 30.0, || {
        let bound = if profile.desk() { 3 } else { 2 };
        let mut parts = Vec::new();
        let mut bad = 0;
        for mode in MODES {
            let m = terminal_operad(2, bound, mode)?;
            let laws = check_operad_laws(&m, None)?;
            let con = check_operadic_contraction(&m, None)?;
            bad += laws.violations.len() + con.violations.len();
            parts.push(format!("{mode:?} {} law and {} contraction instances", laws.checked, con.checked));
        }
        Ok((bad == 0, format!("N=2, bound {bound}: {}; {bad} violations", parts.join(", "))))
    })
}

/// The bounded initial operad: laws at depth one and classes equal to a naive closure.
pub fn ac6(profile: Profile) -> Criterion {
    timed("AC-6", "initial operad laws and class structure", 120.0, || {
        // involutive N=2 is far past the budget at this depth
        let runs: &[(usize, Mode)] = if profile.desk() { &[(1, Mode::Involutive), (2, Mode::Strict)] } else { &[(1, Mode::Strict)] };
        let mut ok = true;
        let mut parts = Vec::new();
        for &(n, mode) in runs {
            let fo = initial_operad(n, 2, 2, mode)?;
            let laws = check_operad_laws(&fo.operad, Some(1))?;
            let replayed = replay_merges(&fo.free, &fo.congruence)?;
            let labels = magma_closure_oracle(&fo.free, true)?;
            let mut mismatches = 0;
            for c in fo.free.magma.coll.cells() {
                // same class as the oracle's representative; with equal class counts the partitions agree
                if fo.quotient.apply(c).idx != fo.quotient.apply(CellRef::new(c.dim, labels[c.dim][c.idx])).idx {
                    mismatches += 1;
                }
            }
            let oracle_classes: usize = labels.iter().map(|v| v.iter().collect::<HashSet<_>>().len()).sum();
            let classes = fo.operad.coll.carrier.total_cells();
            ok &= laws.ok() && mismatches == 0 && oracle_classes == classes;
            parts.push(format!(
                "N={n} {mode:?}: {} raw cells, {classes} classes (oracle {oracle_classes}), {replayed} merges replayed, {} law instances, {} law violations, {mismatches} class mismatches",
                fo.free.magma.coll.carrier.total_cells(),
                laws.checked,
                laws.violations.len()
            ));
        }
        Ok((ok, format!("depth 2 bound 2; {}", parts.join("; "))))
    })
}

/// Maps out of free operads into the terminal operad: factorization and uniqueness.
pub fn ac7(profile: Profile, seed: u64) -> Criterion {
    timed("AC-7", "universal factorization through the free operad", 60.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wanted = if profile.desk() { 50 } else { 5 };
        let (mode, bound) = (Mode::Involutive, 2);
        let term = terminal_operad(1, bound, mode)?;
        let (mut done, mut failures, mut unique_fail) = (0, 0, 0);
        while done < wanted {
            let q = Arc::new(random_set(&mut rng, 1, 3));
            let Some(g) = random_morphism(&mut rng, &q, &term.coll.carrier) else { continue };
            done += 1;
            let proj = (0..=1).map(|d| q.cells(d).map(|c| term.coll.proj_of(g.apply(c)).clone()).collect()).collect();
            let qc = Arc::new(TCollection::new("Q", mode, q.clone(), proj)?);
            let phi = CollectionMorphism::new(qc.clone(), term.coll.clone(), g.maps.clone())?;
            let fo = free_contracted_operad(&qc, 1, bound, true)?;
            let f = universal_factorization(&fo, &term, &phi)?;
            if !f.ok() {
                failures += 1;
            }
            if count_structure_maps(&fo, &term, &phi, 2)? != 1 {
                unique_fail += 1;
            }
        }
        Ok((
            failures == 0 && unique_fail == 0,
            format!("{done} maps at depth 1; {failures} factorization failures, {unique_fail} non-unique"),
        ))
    })
}

fn same(a: &Term<CellRef>, b: &Term<CellRef>, q: &GlobularSet) -> Result<bool> {
    Ok(normalize(a, Mode::Involutive, q)? == normalize(b, Mode::Involutive, q)?)
}

/// The involution laws as equalities of normal forms on seeded terms.
pub fn ac8(profile: Profile, seed: u64) -> Criterion {
    timed("AC-8", "involution laws on seeded terms", 30.0, || {
        let q = theta_set();
        let wanted = if profile.desk() { 500 } else { 50 };
        let u = TermUniverse::build(&q, Mode::Involutive, 4, 2, 5_000_000)?;
        let pool: Vec<Vec<(Term<CellRef>, Pasting<usize>)>> = (0..=2).map(|d| u.terms(d).cloned().collect()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fails: HashMap<&str, usize> = HashMap::new();
        let mut checks = 0;
        for _ in 0..wanted {
            let d = rng.gen_range(0..=2);
            let (t, tp) = &pool[d][rng.gen_range(0..pool[d].len())];
            let mut law = |name: &'static str, a: Term<CellRef>, b: Term<CellRef>| -> Result<()> {
                checks += 1;
                if !same(&a, &b, &q)? {
                    *fails.entry(name).or_default() += 1;
                }
                Ok(())
            };
            for k in 0..=2 {
                law("double involution", inv(k, inv(k, t.clone())), t.clone())?;
                for j in 0..=2 {
                    law("commuting involutions", inv(k, inv(j, t.clone())), inv(j, inv(k, t.clone())))?;
                }
                if k >= d {
                    law("grounding", inv(k, t.clone()), t.clone())?;
                }
                if d < 2 {
                    let rhs = if k < d { id(inv(k, t.clone())) } else { id(t.clone()) };
                    law("identities", inv(k, id(t.clone())), rhs)?;
                }
            }
            if d > 0 {
                // a partner composable along some p
                for _ in 0..50 {
                    let (s, sp) = &pool[d][rng.gen_range(0..pool[d].len())];
                    let p = rng.gen_range(0..d);
                    if Pasting::compose_eq(p, tp, sp).is_err() {
                        continue;
                    }
                    let c = comp(p, t.clone(), s.clone());
                    law("contravariance", inv(p, c.clone()), comp(p, inv(p, s.clone()), inv(p, t.clone())))?;
                    for k in (0..d).filter(|&k| k != p) {
                        law("covariance", inv(k, c.clone()), comp(p, inv(k, t.clone()), inv(k, s.clone())))?;
                    }
                    break;
                }
            }
        }
        let bad: usize = fails.values().sum();
        let mut names: Vec<_> = fails.into_iter().map(|(k, v)| format!("{k} {v}")).collect();
        names.sort();
        let by_law = if names.is_empty() { String::new() } else { format!(" ({})", names.join(", ")) };
        Ok((bad == 0, format!("{wanted} terms over theta, {checks} equalities; {bad} failures{by_law}")))
    })
}

/// Unitors, associator and one pentagon in the bicategory of collections.
pub fn ac9(_profile: Profile) -> Criterion {
    timed("AC-9", "unitors, associator and pentagon at bound 2", 30.0, || {
        let mut parts = Vec::new();
        let mut ok = true;
        for mode in MODES {
            let p = terminal_collection(2, 2, mode)?;
            let l = left_unitor(&p)?;
            let r = right_unitor(&p, Some(2))?;
            let a = associator_witness(&p, &p, &p, Some(2))?;
            ok &= l.is_total() && r.is_total() && a.ok();
            parts.push(format!(
                "{mode:?} unitors {}+{} total, associator {} mapped {} outside",
                l.mapped, r.mapped, a.mapped, a.outside
            ));
        }
        let pent = pentagon(&terminal_collection(2, 2, Mode::Strict)?, Some(2))?;
        ok &= pent.ok();
        parts.push(format!("strict pentagon {} of {} compared, {} disagreements", pent.checked, pent.instances, pent.disagreements));
        Ok((ok, parts.join("; ")))
    })
}

pub fn run_all(profile: Profile, seed: u64) -> Vec<Criterion> {
    vec![
        ac1(profile),
        ac2(profile),
        ac3(profile, seed),
        ac4(profile, seed),
        ac5(profile),
        ac6(profile),
        ac7(profile, seed),
        ac8(profile, seed),
        ac9(profile),
    ]
}
