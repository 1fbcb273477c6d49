use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use omegacat::acceptance::{run_all, Profile};
use omegacat::collections::{compose_collections, TCollection};
use omegacat::document::{Block, Document, OperadRecipe};
use omegacat::globular::{terminal_set, CellRef, GlobularSet};
use omegacat::normalizer::{equal_terms, normalize_traced};
use omegacat::operads::{check_algebra, check_operad_laws, check_operadic_contraction, free_contracted_operad, initial_operad, FreeOperad, OperadicMagma};
use omegacat::pasting::all_trees;
use omegacat::report::Report;
use omegacat::term::{enumerate_terms, well_formed, Mode, Term};
use omegacat::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "omegacat", version, about = "Free strict and involutive globular omega-categories at bounded truncation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a document and check every block.
    Validate { file: PathBuf },
    /// Canonical form of a term.
    Normalize {
        file: PathBuf,
        /// Term block to use; defaults to the last term in the file.
        #[arg(long)]
        term: Option<String>,
        #[arg(long, default_value = "inv")]
        mode: String,
        /// Include the rewrite trace.
        #[arg(long)]
        trace: bool,
        /// Rewrite step budget.
        #[arg(long)]
        budget: Option<usize>,
        #[command(flatten)]
        base: Base,
    },
    /// Decide whether two terms are equal.
    Eq {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value = "inv")]
        mode: String,
        #[command(flatten)]
        base: Base,
    },
    /// All well-formed terms of a dimension up to a size.
    EnumerateTerms {
        /// Document holding the gset; defaults to the terminal set.
        #[arg(long)]
        gset: Option<PathBuf>,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        max_nodes: usize,
        #[arg(long, default_value = "inv")]
        mode: String,
        #[command(flatten)]
        base: Base,
    },
    /// Census of decorated trees by edge count.
    EnumeratePasting {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        max_size: usize,
        #[arg(long, default_value = "strict")]
        mode: String,
        /// Print the trees themselves.
        #[arg(long)]
        list: bool,
    },
    /// Span composite of two collections.
    Compose {
        file: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Free contracted operads and their laws.
    #[command(subcommand)]
    Operad(OperadCmd),
    /// Algebras for an operad.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Run the acceptance suite.
    Selftest {
        #[arg(long)]
        profile: Option<String>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct Base {
    /// Dimension of the default terminal gset.
    #[arg(long)]
    maxdim: Option<usize>,
}

#[derive(Args)]
struct Bounds {
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    shape_bound: Option<usize>,
}

#[derive(Subcommand)]
enum OperadCmd {
    /// Free contracted operad on a collection.
    Free {
        #[arg(long)]
        collection: PathBuf,
        /// Collection block to use; defaults to the only one.
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        bounds: Bounds,
        /// Leave the contraction clause out of the congruence.
        #[arg(long)]
        weak: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Unit and associativity laws.
    CheckLaws {
        file: PathBuf,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        max_stage: Option<usize>,
    },
    /// Contraction validity and the operadic contraction diagrams.
    CheckContraction {
        file: PathBuf,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        max_stage: Option<usize>,
    },
    /// Free contracted operad on the empty collection.
    Initial {
        #[command(flatten)]
        bounds: Bounds,
        #[command(flatten)]
        base: Base,
        #[arg(long, default_value = "inv")]
        mode: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AlgebraCmd {
    /// Unit and associativity laws of an action.
    Check {
        #[arg(long)]
        operad: PathBuf,
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        max_stage: Option<usize>,
    },
}

/// Settings below the flags: `OMEGACAT_PROFILE`, then built-in defaults.
struct Config {
    maxdim: usize,
    depth: usize,
    shape_bound: usize,
    budget: usize,
    profile: Profile,
}

impl Config {
    fn load() -> Result<Config, Failure> {
        let mut c = Config { maxdim: 3, depth: 2, shape_bound: 3, budget: 100_000, profile: Profile::Desk };
        let Ok(env) = std::env::var("OMEGACAT_PROFILE") else { return Ok(c) };
        for item in env.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bad = || Failure::usage(format!("OMEGACAT_PROFILE: cannot read {item:?}"));
            match item.split_once('=') {
                None => c.profile = Profile::parse(item).ok_or_else(bad)?,
                Some(("profile", v)) => c.profile = Profile::parse(v).ok_or_else(bad)?,
                Some((k, v)) => {
                    let v: usize = v.parse().map_err(|_| bad())?;
                    match k {
                        "maxdim" => c.maxdim = v,
                        "depth" => c.depth = v,
                        "shape-bound" | "shape_bound" => c.shape_bound = v,
                        "budget" => c.budget = v,
                        _ => return Err(bad()),
                    }
                }
            }
        }
        Ok(c)
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    fn within(mut self, path: &Path) -> Failure {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = if matches!(e, Error::Resource(_)) { 3 } else { 2 };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path, fallback: Option<Arc<GlobularSet>>) -> Result<Document, Failure> {
    Document::parse_with_default(&read(path)?, fallback).map_err(|e| Failure::from(e).within(path))
}

fn mode(s: &str) -> Result<Mode, Failure> {
    Mode::parse(s).ok_or_else(|| Failure::usage(format!("mode must be strict or inv, got {s}")))
}

fn mode_name(m: Mode) -> &'static str {
    if m.involutive() { "inv" } else { "strict" }
}

/// The named block of a kind, or the only (for terms, the last) one.
fn pick<'a>(doc: &'a Document, kind: &str, name: Option<&str>) -> Result<&'a Block, Failure> {
    if let Some(n) = name {
        return match doc.get(n) {
            Some(b) if b.kind() == kind => Ok(b),
            _ => Err(Failure::usage(format!("no {kind} named {n}"))),
        };
    }
    let all: Vec<&Block> = doc.blocks.iter().filter(|b| b.kind() == kind).collect();
    match all[..] {
        [] => Err(Failure::usage(format!("no {kind} block"))),
        [b] => Ok(b),
        _ if kind == "term" => Ok(all[all.len() - 1]),
        _ => Err(Failure::usage(format!("several {kind} blocks; choose one with --name"))),
    }
}

fn term_of(doc: &Document, name: Option<&str>) -> Result<(Arc<GlobularSet>, Term<CellRef>), Failure> {
    match pick(doc, "term", name)? {
        Block::Term { over, term, .. } => Ok((doc.gset(over)?, term.clone())),
        _ => unreachable!(),
    }
}

fn sexp(t: &Term<CellRef>, q: &GlobularSet) -> String {
    t.to_sexp(&|c: &CellRef| q.name(*c).to_string())
}

fn report_json(r: &Report) -> Value {
    json!({ "checked": r.checked, "skipped": r.skipped, "violations": r.violations })
}

fn validate(file: &Path) -> Outcome {
    let doc = load(file, None)?;
    let mut blocks = Vec::new();
    let mut violations = Vec::new();
    for b in &doc.blocks {
        blocks.push(json!({ "name": b.name(), "kind": b.kind() }));
        match b {
            Block::Term { name, over, term } => {
                let q = doc.gset(over)?;
                let r = well_formed(term, &q, Mode::Involutive);
                if !r.is_valid() {
                    for v in r.violations {
                        violations.push(json!({ "kind": "term", "detail": format!("{name} at {}: {}", if v.path.is_empty() { "root" } else { &v.path }, v.message) }));
                    }
                }
            }
            Block::Collection { name, .. } => {
                if let Err(e) = doc.collection(name) {
                    violations.push(json!({ "kind": "collection", "detail": format!("{name}: {e}") }));
                }
            }
            _ => {}
        }
    }
    let ok = violations.is_empty();
    Ok((json!({ "blocks": blocks, "violations": violations }), ok))
}

fn run(cli: Cli, cfg: &Config) -> Outcome {
    let terminal = |b: &Base| Arc::new(terminal_set(b.maxdim.unwrap_or(cfg.maxdim)));
    match cli.cmd {
        Cmd::Validate { file } => validate(&file),
        Cmd::Normalize { file, term, mode: m, trace, budget, base } => {
            let m = mode(&m)?;
            let doc = load(&file, Some(terminal(&base)))?;
            let (q, t) = term_of(&doc, term.as_deref())?;
            let n = normalize_traced(&t, m, &q, budget.unwrap_or(cfg.budget))?;
            let mut out = json!({
                "mode": mode_name(m),
                "input": sexp(&t, &q),
                "normal_form": sexp(&n.form.term, &q),
                "tree": n.form.pasting.shape().to_string(),
                "steps": n.trace.len(),
            });
            if trace {
                out["trace"] = json!(n.trace);
            }
            Ok((out, true))
        }
        Cmd::Eq { left, right, mode: m, base } => {
            let m = mode(&m)?;
            let (ql, tl) = term_of(&load(&left, Some(terminal(&base)))?, None)?;
            let (qr, tr) = term_of(&load(&right, Some(terminal(&base)))?, None)?;
            if ql != qr {
                return Err(Failure::usage("the two terms are over different gsets"));
            }
            let equal = equal_terms(&tl, &tr, m, &ql)?;
            Ok((json!({ "equal": equal }), equal))
        }
        Cmd::EnumerateTerms { gset, dim, max_nodes, mode: m, base } => {
            let m = mode(&m)?;
            let q = match gset {
                Some(p) => {
                    let doc = load(&p, None)?;
                    match pick(&doc, "gset", None)? {
                        Block::Gset { set, .. } => set.clone(),
                        _ => unreachable!(),
                    }
                }
                None => terminal(&base),
            };
            let terms: Vec<String> = enumerate_terms(&q, m, max_nodes, dim)?.iter().map(|t| sexp(t, &q)).collect();
            Ok((json!({ "dim": dim, "max_nodes": max_nodes, "mode": mode_name(m), "count": terms.len(), "terms": terms }), true))
        }
        Cmd::EnumeratePasting { dim, max_size, mode: m, list } => {
            let m = mode(&m)?;
            let trees = all_trees(dim, max_size, m.involutive());
            let census: Vec<Value> =
                (0..=max_size).map(|e| json!({ "edges": e, "count": trees.iter().filter(|t| t.edges() == e).count() })).collect();
            let mut out = json!({ "dim": dim, "max_size": max_size, "mode": mode_name(m), "total": trees.len(), "census": census });
            if list {
                out["trees"] = json!(trees.iter().map(|t| t.to_string()).collect::<Vec<_>>());
            }
            Ok((out, true))
        }
        Cmd::Compose { file, left, right, bound } => {
            let doc = load(&file, None)?;
            let (p1, p2) = (doc.collection(&left)?, doc.collection(&right)?);
            let c = compose_collections(&p1, &p2, bound)?;
            Ok((collection_json(&c), true))
        }
        Cmd::Operad(op) => operad(op, cfg),
        Cmd::Algebra(AlgebraCmd::Check { operad, algebra, max_stage }) => {
            let mut text = read(&operad)?;
            if algebra != operad {
                text.push('\n');
                text.push_str(&read(&algebra)?);
            }
            let doc = Document::parse(&text)?;
            let Block::Algebra { name, operad: op_name, .. } = pick(&doc, "algebra", None)? else { unreachable!() };
            let op = doc.operad(op_name)?;
            let alg = doc.algebra(name, &op)?;
            let stage = max_stage.or(op.depth.map(|d| d.saturating_sub(1)));
            let r = check_algebra(&op, &alg, stage)?;
            let mut out = report_json(&r);
            out["algebra"] = json!(name);
            out["operad"] = json!(op_name);
            Ok((out, r.ok()))
        }
        Cmd::Selftest { profile, seed } => {
            let profile = match profile {
                Some(p) => Profile::parse(&p).ok_or_else(|| Failure::usage(format!("profile must be quick or desk, got {p}")))?,
                None => cfg.profile,
            };
            let results = run_all(profile, seed);
            for c in &results {
                eprintln!("{}", c.line());
            }
            let violations: Vec<Value> =
                results.iter().filter(|c| !c.passed).map(|c| json!({ "kind": c.id, "detail": c.detail })).collect();
            let criteria: Vec<Value> = results
                .iter()
                .map(|c| json!({ "id": c.id, "title": c.title, "passed": c.passed, "budget_seconds": c.budget_seconds, "detail": c.detail }))
                .collect();
            let ok = violations.is_empty();
            let name = if profile == Profile::Desk { "desk" } else { "quick" };
            Ok((json!({ "profile": name, "seed": seed, "criteria": criteria, "violations": violations }), ok))
        }
    }
}

fn collection_json(c: &TCollection) -> Value {
    let cells: Vec<Value> = c
        .cells()
        .map(|x| {
            let mut v = json!({ "dim": x.dim, "name": c.carrier.name(x), "proj": c.proj_of(x).to_string() });
            if x.dim > 0 {
                v["src"] = json!(c.carrier.name(CellRef::new(x.dim - 1, c.src(x))));
                v["tgt"] = json!(c.carrier.name(CellRef::new(x.dim - 1, c.tgt(x))));
            }
            v
        })
        .collect();
    json!({ "mode": mode_name(c.mode), "sizes": c.carrier.sizes(), "cells": cells })
}

fn free_summary(fo: &FreeOperad) -> Value {
    json!({
        "magma_sizes": fo.free.magma.coll.carrier.sizes(),
        "operad_sizes": fo.operad.coll.carrier.sizes(),
        "merges": fo.congruence.merges.len(),
        "rounds": fo.congruence.rounds,
        "dropped": fo.free.dropped,
        "kappa_conflicts": fo.kappa_conflicts,
        "contraction_closure": fo.congruence.with_contraction,
    })
}

fn operad_of(file: &Path, name: Option<&str>) -> Result<(String, OperadicMagma), Failure> {
    let doc = load(file, None)?;
    let b = pick(&doc, "operad", name)?;
    Ok((b.name().to_string(), doc.operad(b.name())?))
}

fn operad(cmd: OperadCmd, cfg: &Config) -> Outcome {
    match cmd {
        OperadCmd::Free { collection, name, bounds, weak, out } => {
            let depth = bounds.depth.unwrap_or(cfg.depth);
            let shape_bound = bounds.shape_bound.unwrap_or(cfg.shape_bound);
            let mut doc = load(&collection, None)?;
            let coll = pick(&doc, "collection", name.as_deref())?.name().to_string();
            let fo = free_contracted_operad(&doc.collection(&coll)?, depth, shape_bound, !weak)?;
            let mut summary = free_summary(&fo);
            if let Some(path) = out {
                let mut oname = String::from("free");
                while doc.get(&oname).is_some() {
                    oname.push('\'');
                }
                doc.blocks.push(Block::Operad { name: oname.clone(), recipe: OperadRecipe::Free { collection: coll, depth, shape_bound, weak } });
                write(&path, &doc.to_text())?;
                summary["operad"] = json!(oname);
            }
            summary["violations"] = json!([]);
            Ok((summary, true))
        }
        OperadCmd::CheckLaws { file, name, max_stage } => {
            let (name, m) = operad_of(&file, name.as_deref())?;
            let stage = max_stage.or(m.depth.map(|d| d.saturating_sub(1)));
            let r = check_operad_laws(&m, stage)?;
            let mut out = report_json(&r);
            out["operad"] = json!(name);
            out["max_stage"] = json!(stage);
            Ok((out, r.ok()))
        }
        OperadCmd::CheckContraction { file, name, max_stage } => {
            let (name, m) = operad_of(&file, name.as_deref())?;
            let stage = max_stage.or(m.depth.map(|d| d.saturating_sub(1)));
            let r = check_operadic_contraction(&m, stage)?;
            let mut out = report_json(&r);
            out["operad"] = json!(name);
            out["max_stage"] = json!(stage);
            Ok((out, r.ok()))
        }
        OperadCmd::Initial { bounds, base, mode: m, out } => {
            let m = mode(&m)?;
            let depth = bounds.depth.unwrap_or(cfg.depth);
            let shape_bound = bounds.shape_bound.unwrap_or(cfg.shape_bound);
            let max_dim = base.maxdim.unwrap_or(cfg.maxdim);
            let fo = initial_operad(max_dim, depth, shape_bound, m)?;
            let r = check_operad_laws(&fo.operad, Some(depth.saturating_sub(1)))?;
            let mut summary = free_summary(&fo);
            summary["checked"] = json!(r.checked);
            summary["violations"] = json!(r.violations);
            if let Some(path) = out {
                let mut text = String::new();
                let _ = writeln!(
                    text,
                    "(operad initial initial :maxdim {max_dim} :depth {depth} :shape-bound {shape_bound} :mode {})",
                    mode_name(m)
                );
                write(&path, &text)?;
            }
            Ok((summary, r.ok()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = Config::load().and_then(|cfg| run(cli, &cfg));
    match result {
        Ok((value, ok)) => {
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&value).expect("reports serialize"));
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(f) => {
            eprintln!("omegacat: {}", f.message);
            let _ = writeln!(std::io::stdout(), "{}", json!({ "error": f.message, "exit": f.code }));
            ExitCode::from(f.code)
        }
    }
}
