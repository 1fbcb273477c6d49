//! The S-expression document format: named `gset`, `term`, `collection`,
//! `operad` and `algebra` blocks, with references by name to earlier blocks.
//!
//! ```text
//! (gset theta :maxdim 2 (cells 0 a b) (cells 1 (f a b) (g a b)) (cells 2 (alpha f g)))
//! (term t :over theta (comp 0 (gen f) (id (gen a))))
//! (collection c :over theta :mode inv (proj (a ()) (b ()) (f (())) (g (())) (alpha ((())))))
//! (operad p terminal :maxdim 2 :bound 3 :mode inv)
//! (operad q free :collection c :depth 2 :shape-bound 2)
//! (operad w free :collection c :depth 1 :shape-bound 2 :closure weak)
//! (algebra x :operad p free :base theta :bound 3)
//! (algebra y :operad p :over theta (act "(())" (a b f) f))
//! ```
//!
//! Operads are stored as recipes; algebras either as a recipe or as an action table
//! whose pasting labels are listed in preorder of the operation's shape.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::collections::{Shape, TCollection};
use crate::error::{Error, Result};
use crate::globular::{CellRef, GlobularSet, RawCell, RawGlobularSet};
use crate::operads::{free_algebra, free_contracted_operad, initial_operad, terminal_operad, OperadicMagma, TAlgebra};
use crate::pasting::DecoratedTree;
use crate::term::{comp, gen, id, inv, Mode, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug)]
pub enum Sexp {
    Atom(String, Pos),
    Str(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::Str(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a, _) => Some(a),
            _ => None,
        }
    }
}

fn perr<T>(pos: Pos, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line: pos.line, col: pos.col, msg: msg.into() })
}

/// Reads every top-level expression. `;` starts a comment.
pub fn read_all(text: &str) -> Result<Vec<Sexp>> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = text.chars().peekable();
    let push = |e: Sexp, stack: &mut Vec<(Vec<Sexp>, Pos)>, top: &mut Vec<Sexp>| match stack.last_mut() {
        Some((v, _)) => v.push(e),
        None => top.push(e),
    };
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        let mut step = |c: char| {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        };
        match c {
            '(' => {
                chars.next();
                step(c);
                stack.push((Vec::new(), pos));
            }
            ')' => {
                chars.next();
                step(c);
                let Some((items, start)) = stack.pop() else { return perr(pos, "unbalanced ')'") };
                push(Sexp::List(items, start), &mut stack, &mut top);
            }
            ';' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                    step('x');
                }
            }
            '"' => {
                chars.next();
                step(c);
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            step('"');
                            break;
                        }
                        Some('\\') => {
                            step('\\');
                            match chars.next() {
                                Some(e) => {
                                    step(e);
                                    s.push(e);
                                }
                                None => return perr(pos, "unterminated string"),
                            }
                        }
                        Some(e) => {
                            step(e);
                            s.push(e);
                        }
                        None => return perr(pos, "unterminated string"),
                    }
                }
                push(Sexp::Str(s, pos), &mut stack, &mut top);
            }
            c if c.is_whitespace() => {
                chars.next();
                step(c);
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';') {
                        break;
                    }
                    s.push(c);
                    chars.next();
                    step(c);
                }
                push(Sexp::Atom(s, pos), &mut stack, &mut top);
            }
        }
    }
    if let Some((_, start)) = stack.pop() {
        return perr(start, "unbalanced '(': list is never closed");
    }
    Ok(top)
}

fn quote(s: &str) -> String {
    let plain = !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';' | '\\')) && !s.starts_with(':');
    if plain {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

fn name_of(e: &Sexp) -> Result<String> {
    match e {
        Sexp::Atom(a, p) if a.starts_with(':') => perr(*p, format!("expected a name, found keyword {a}")),
        Sexp::Atom(a, _) | Sexp::Str(a, _) => Ok(a.clone()),
        Sexp::List(_, p) => perr(*p, "expected a name, found a list"),
    }
}

fn nat(e: &Sexp) -> Result<usize> {
    match e.atom().map(str::parse::<usize>) {
        Some(Ok(n)) => Ok(n),
        _ => perr(e.pos(), "expected a natural number"),
    }
}

/// A tree is written as a list whose first item may be a decoration atom `{0,1}`, or as a string.
fn tree_text(e: &Sexp) -> Result<String> {
    match e {
        Sexp::Str(s, _) => Ok(s.clone()),
        Sexp::List(items, _) => {
            let mut out = String::from("(");
            for (k, it) in items.iter().enumerate() {
                match it {
                    Sexp::Atom(a, _) if k == 0 && a.starts_with('{') => out.push_str(a),
                    Sexp::List(..) => out.push_str(&tree_text(it)?),
                    _ => return perr(it.pos(), "expected a subtree"),
                }
            }
            out.push(')');
            Ok(out)
        }
        Sexp::Atom(_, p) => perr(*p, "expected a tree"),
    }
}

fn parse_tree(e: &Sexp, dim: usize) -> Result<Shape> {
    let text = tree_text(e)?;
    DecoratedTree::parse(&text, Some(dim)).map_err(|err| match err {
        Error::Parse { msg, .. } => Error::Parse { line: e.pos().line, col: e.pos().col, msg },
        Error::Domain(msg) => Error::Parse { line: e.pos().line, col: e.pos().col, msg },
        other => other,
    })
}

/// Splits `items` into the keyword options and the positional rest.
fn options(items: &[Sexp]) -> Result<(HashMap<String, &Sexp>, Vec<&Sexp>)> {
    let mut opts = HashMap::new();
    let mut rest = Vec::new();
    let mut it = items.iter();
    while let Some(e) = it.next() {
        match e.atom() {
            Some(k) if k.starts_with(':') => {
                let Some(v) = it.next() else { return perr(e.pos(), format!("keyword {k} has no value")) };
                if opts.insert(k[1..].to_string(), v).is_some() {
                    return perr(e.pos(), format!("keyword {k} given twice"));
                }
            }
            _ => rest.push(e),
        }
    }
    Ok((opts, rest))
}

struct Opts<'a> {
    map: HashMap<String, &'a Sexp>,
    at: Pos,
}

impl<'a> Opts<'a> {
    fn take(&mut self, k: &str) -> Option<&'a Sexp> {
        self.map.remove(k)
    }

    fn need(&mut self, k: &str) -> Result<&'a Sexp> {
        let at = self.at;
        self.take(k).map_or_else(|| perr(at, format!("missing :{k}")), Ok)
    }

    fn nat(&mut self, k: &str) -> Result<usize> {
        nat(self.need(k)?)
    }

    fn name(&mut self, k: &str) -> Result<String> {
        name_of(self.need(k)?)
    }

    fn mode(&mut self) -> Result<Mode> {
        match self.take("mode") {
            None => Ok(Mode::Strict),
            Some(e) => e.atom().and_then(Mode::parse).map_or_else(|| perr(e.pos(), "mode must be strict or inv"), Ok),
        }
    }

    fn done(self) -> Result<()> {
        match self.map.keys().min() {
            Some(k) => perr(self.at, format!("unknown keyword :{k}")),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OperadRecipe {
    Terminal { max_dim: usize, bound: usize, mode: Mode },
    /// `weak` drops the contraction clause from the congruence.
    Free { collection: String, depth: usize, shape_bound: usize, weak: bool },
    Initial { max_dim: usize, depth: usize, shape_bound: usize, mode: Mode },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraRecipe {
    Free { base: String, bound: usize },
    /// `(operation, labels in preorder, result)` over the named gset.
    Table { over: String, act: Vec<(String, Vec<String>, String)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Block {
    Gset { name: String, set: Arc<GlobularSet> },
    Term { name: String, over: String, term: Term<CellRef> },
    Collection { name: String, over: String, mode: Mode, proj: Vec<Vec<Shape>> },
    Operad { name: String, recipe: OperadRecipe },
    Algebra { name: String, operad: String, recipe: AlgebraRecipe },
}

impl Block {
    pub fn name(&self) -> &str {
        match self {
            Block::Gset { name, .. }
            | Block::Term { name, .. }
            | Block::Collection { name, .. }
            | Block::Operad { name, .. }
            | Block::Algebra { name, .. } => name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Block::Gset { .. } => "gset",
            Block::Term { .. } => "term",
            Block::Collection { .. } => "collection",
            Block::Operad { .. } => "operad",
            Block::Algebra { .. } => "algebra",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub blocks: Vec<Block>,
}

fn parse_gset(name: String, rest: &[&Sexp], max_dim: usize) -> Result<Arc<GlobularSet>> {
    let mut cells: Vec<Vec<RawCell>> = vec![Vec::new(); max_dim + 1];
    let mut seen: Vec<HashMap<String, Pos>> = vec![HashMap::new(); max_dim + 1];
    let mut last_dim = 0;
    for e in rest {
        let Sexp::List(items, at) = e else { return perr(e.pos(), "expected (cells DIM ...)") };
        if items.first().and_then(Sexp::atom) != Some("cells") || items.len() < 2 {
            return perr(*at, "expected (cells DIM ...)");
        }
        let n = nat(&items[1])?;
        if n > max_dim {
            return perr(items[1].pos(), format!("dimension {n} is above :maxdim {max_dim}"));
        }
        if n < last_dim {
            return perr(*at, "cells must be listed in increasing dimension");
        }
        last_dim = n;
        for c in &items[2..] {
            let (id, src, tgt) = match (n, c) {
                (0, _) => (name_of(c)?, None, None),
                (_, Sexp::List(parts, p)) if parts.len() == 3 => {
                    let (s, t) = (name_of(&parts[1])?, name_of(&parts[2])?);
                    for (b, e) in [(&s, &parts[1]), (&t, &parts[2])] {
                        if !seen[n - 1].contains_key(b) {
                            return perr(e.pos(), format!("unknown {}-cell {b} (cells must be declared before use)", n - 1));
                        }
                    }
                    let _ = p;
                    (name_of(&parts[0])?, Some(s), Some(t))
                }
                _ => return perr(c.pos(), format!("a {n}-cell is written (id source target)")),
            };
            if seen[n].insert(id.clone(), c.pos()).is_some() {
                return perr(c.pos(), format!("duplicate cell {id}"));
            }
            cells[n].push(RawCell { id, src, tgt });
        }
    }
    let set = GlobularSet::from_raw(&RawGlobularSet { max_dim, cells })
        .map_err(|e| Error::Domain(format!("gset {name}: {e}")))?;
    Ok(Arc::new(set))
}

fn parse_term(e: &Sexp, q: &GlobularSet) -> Result<Term<CellRef>> {
    let Sexp::List(items, at) = e else { return perr(e.pos(), "expected a term") };
    let head = items.first().and_then(Sexp::atom).unwrap_or("");
    match (head, items.len()) {
        ("gen", 2) => {
            let n = name_of(&items[1])?;
            q.find(&n).map(gen).ok_or_else(|| Error::Unresolved(format!("generator {n} at {}:{}", items[1].pos().line, items[1].pos().col)))
        }
        ("id", 2) => Ok(id(parse_term(&items[1], q)?)),
        ("comp", 4) => Ok(comp(nat(&items[1])?, parse_term(&items[2], q)?, parse_term(&items[3], q)?)),
        ("inv", 3) => Ok(inv(nat(&items[1])?, parse_term(&items[2], q)?)),
        _ => perr(*at, "expected (gen c), (id T), (comp p T T) or (inv q T)"),
    }
}

impl Document {
    pub fn get(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name() == name)
    }

    pub fn gset(&self, name: &str) -> Result<Arc<GlobularSet>> {
        match self.get(name) {
            Some(Block::Gset { set, .. }) => Ok(set.clone()),
            _ => Err(Error::Unresolved(format!("gset {name}"))),
        }
    }

    fn need(&self, name: &str, kind: &str, at: Pos) -> Result<()> {
        match self.get(name) {
            Some(b) if b.kind() == kind => Ok(()),
            Some(b) => perr(at, format!("{name} is a {}, not a {kind}", b.kind())),
            None => Err(Error::Unresolved(format!("{kind} {name} at {}:{}", at.line, at.col))),
        }
    }

    pub fn parse(text: &str) -> Result<Document> {
        Document::parse_with_default(text, None)
    }

    /// As [`Document::parse`]; a bare term in a document without gsets is read over
    /// `fallback`, added as the gset `default`.
    pub fn parse_with_default(text: &str, fallback: Option<Arc<GlobularSet>>) -> Result<Document> {
        let mut doc = Document::default();
        let mut default_gset = 0;
        for e in read_all(text)? {
            let Sexp::List(items, at) = &e else { return perr(e.pos(), "expected a block") };
            let Some(head) = items.first().and_then(Sexp::atom) else { return perr(*at, "expected a block keyword") };
            // a bare term is an anonymous term over the document's only gset
            if matches!(head, "gen" | "id" | "comp" | "inv") {
                if let Some(set) = fallback.as_ref().filter(|_| !doc.blocks.iter().any(|b| b.kind() == "gset")) {
                    doc.add(Block::Gset { name: "default".into(), set: set.clone() }, *at)?;
                }
                let over = match doc.blocks.iter().filter(|b| b.kind() == "gset").map(Block::name).collect::<Vec<_>>()[..] {
                    [g] => g.to_string(),
                    _ => return perr(*at, "a bare term needs exactly one gset in the document"),
                };
                let term = parse_term(&e, &*doc.gset(&over)?)?;
                let name = format!("term{}", doc.blocks.len());
                doc.add(Block::Term { name, over, term }, *at)?;
                continue;
            }
            let mut body = &items[1..];
            let name = match body.first() {
                Some(Sexp::Atom(a, _)) if !a.starts_with(':') => {
                    body = &body[1..];
                    a.clone()
                }
                Some(Sexp::Str(a, _)) => {
                    body = &body[1..];
                    a.clone()
                }
                _ if head == "gset" => {
                    default_gset += 1;
                    if default_gset == 1 { "gset".to_string() } else { format!("gset{default_gset}") }
                }
                _ => return perr(*at, format!("{head} block needs a name")),
            };
            let (map, rest) = options(body)?;
            let mut o = Opts { map, at: *at };
            let block = match head {
                "gset" => {
                    let max_dim = o.nat("maxdim")?;
                    o.done()?;
                    let set = parse_gset(name.clone(), &rest, max_dim)?;
                    Block::Gset { name, set }
                }
                "term" => {
                    let over = o.name("over")?;
                    o.done()?;
                    doc.need(&over, "gset", *at)?;
                    let [t] = rest[..] else { return perr(*at, "a term block holds exactly one term") };
                    let term = parse_term(t, &*doc.gset(&over)?)?;
                    Block::Term { name, over, term }
                }
                "collection" => {
                    let over = o.name("over")?;
                    let mode = o.mode()?;
                    o.done()?;
                    doc.need(&over, "gset", *at)?;
                    let q = doc.gset(&over)?;
                    let mut proj: Vec<Vec<Option<Shape>>> = (0..=q.max_dim()).map(|d| vec![None; q.count(d)]).collect();
                    for r in &rest {
                        let Sexp::List(items, p) = r else { return perr(r.pos(), "expected (proj ...)") };
                        if items.first().and_then(Sexp::atom) != Some("proj") {
                            return perr(*p, "expected (proj ...)");
                        }
                        for entry in &items[1..] {
                            let Sexp::List(kv, p) = entry else { return perr(entry.pos(), "expected (cell TREE)") };
                            let [c, t] = &kv[..] else { return perr(*p, "expected (cell TREE)") };
                            let cn = name_of(c)?;
                            let Some(cell) = q.find(&cn) else {
                                return Err(Error::Unresolved(format!("cell {cn} at {}:{}", c.pos().line, c.pos().col)));
                            };
                            if proj[cell.dim][cell.idx].is_some() {
                                return perr(*p, format!("projection of {cn} given twice"));
                            }
                            proj[cell.dim][cell.idx] = Some(parse_tree(t, cell.dim)?);
                        }
                    }
                    let proj = proj
                        .into_iter()
                        .enumerate()
                        .map(|(d, v)| {
                            v.into_iter()
                                .enumerate()
                                .map(|(i, y)| y.ok_or_else(|| Error::Parse { line: at.line, col: at.col, msg: format!("no projection for {}", q.name(CellRef::new(d, i))) }))
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                    TCollection::new(&name, mode, q, proj.clone())?;
                    Block::Collection { name, over, mode, proj }
                }
                "operad" => {
                    let kind = rest.first().and_then(|e| e.atom()).unwrap_or("");
                    let recipe = match kind {
                        "terminal" => OperadRecipe::Terminal { max_dim: o.nat("maxdim")?, bound: o.nat("bound")?, mode: o.mode()? },
                        "free" => {
                            let collection = o.name("collection")?;
                            doc.need(&collection, "collection", *at)?;
                            let weak = match o.take("closure") {
                                None => false,
                                Some(e) => match e.atom() {
                                    Some("full") => false,
                                    Some("weak") => true,
                                    _ => return perr(e.pos(), "closure must be full or weak"),
                                },
                            };
                            OperadRecipe::Free { collection, depth: o.nat("depth")?, shape_bound: o.nat("shape-bound")?, weak }
                        }
                        "initial" => OperadRecipe::Initial {
                            max_dim: o.nat("maxdim")?,
                            depth: o.nat("depth")?,
                            shape_bound: o.nat("shape-bound")?,
                            mode: o.mode()?,
                        },
                        _ => return perr(*at, "operad kind must be terminal, free or initial"),
                    };
                    o.done()?;
                    if rest.len() != 1 {
                        return perr(*at, "unexpected items in operad block");
                    }
                    Block::Operad { name, recipe }
                }
                "algebra" => {
                    let operad = o.name("operad")?;
                    doc.need(&operad, "operad", *at)?;
                    let recipe = if rest.first().and_then(|e| e.atom()) == Some("free") {
                        let base = o.name("base")?;
                        doc.need(&base, "gset", *at)?;
                        if rest.len() != 1 {
                            return perr(*at, "unexpected items in algebra block");
                        }
                        AlgebraRecipe::Free { base, bound: o.nat("bound")? }
                    } else {
                        let over = o.name("over")?;
                        doc.need(&over, "gset", *at)?;
                        let q = doc.gset(&over)?;
                        let mut act = Vec::new();
                        for r in &rest {
                            let Sexp::List(items, p) = r else { return perr(r.pos(), "expected (act OP (LABELS) RESULT)") };
                            let (Some("act"), 4) = (items[0].atom(), items.len()) else {
                                return perr(*p, "expected (act OP (LABELS) RESULT)");
                            };
                            let Sexp::List(ls, _) = &items[2] else { return perr(items[2].pos(), "expected a list of labels") };
                            let mut labels = Vec::new();
                            for l in ls.iter().chain([&items[3]]) {
                                let n = name_of(l)?;
                                if q.find(&n).is_none() {
                                    return Err(Error::Unresolved(format!("cell {n} at {}:{}", l.pos().line, l.pos().col)));
                                }
                                labels.push(n);
                            }
                            let result = labels.pop().unwrap_or_default();
                            act.push((name_of(&items[1])?, labels, result));
                        }
                        AlgebraRecipe::Table { over, act }
                    };
                    o.done()?;
                    Block::Algebra { name, operad, recipe }
                }
                _ => return perr(*at, format!("unknown block {head}")),
            };
            doc.add(block, *at)?;
        }
        Ok(doc)
    }

    fn add(&mut self, block: Block, at: Pos) -> Result<()> {
        if self.get(block.name()).is_some() {
            return perr(at, format!("duplicate name {}", block.name()));
        }
        self.blocks.push(block);
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            match b {
                Block::Gset { name, set } => {
                    let _ = write!(out, "(gset {} :maxdim {}", quote(name), set.max_dim());
                    for d in 0..=set.max_dim() {
                        if set.count(d) == 0 {
                            continue;
                        }
                        let _ = write!(out, "\n  (cells {d}");
                        for c in set.cells(d) {
                            if d == 0 {
                                let _ = write!(out, " {}", quote(set.name(c)));
                            } else {
                                let (s, t) = (CellRef::new(d - 1, set.src(c)), CellRef::new(d - 1, set.tgt(c)));
                                let _ = write!(out, " ({} {} {})", quote(set.name(c)), quote(set.name(s)), quote(set.name(t)));
                            }
                        }
                        out.push(')');
                    }
                    out.push_str(")\n");
                }
                Block::Term { name, over, term } => {
                    let q = self.gset(over).expect("resolved at parse time");
                    let _ = writeln!(out, "(term {} :over {} {})", quote(name), quote(over), term.to_sexp(&|c| quote(q.name(*c))));
                }
                Block::Collection { name, over, mode, proj } => {
                    let q = self.gset(over).expect("resolved at parse time");
                    let m = if mode.involutive() { "inv" } else { "strict" };
                    let _ = write!(out, "(collection {} :over {} :mode {m}\n  (proj", quote(name), quote(over));
                    for c in (0..=q.max_dim()).flat_map(|d| q.cells(d)) {
                        let _ = write!(out, " ({} {})", quote(q.name(c)), proj[c.dim][c.idx]);
                    }
                    out.push_str("))\n");
                }
                Block::Operad { name, recipe } => {
                    let m = |mode: &Mode| if mode.involutive() { "inv" } else { "strict" };
                    let _ = match recipe {
                        OperadRecipe::Terminal { max_dim, bound, mode } => {
                            writeln!(out, "(operad {} terminal :maxdim {max_dim} :bound {bound} :mode {})", quote(name), m(mode))
                        }
                        OperadRecipe::Free { collection, depth, shape_bound, weak } => writeln!(
                            out,
                            "(operad {} free :collection {} :depth {depth} :shape-bound {shape_bound}{})",
                            quote(name),
                            quote(collection),
                            if *weak { " :closure weak" } else { "" }
                        ),
                        OperadRecipe::Initial { max_dim, depth, shape_bound, mode } => writeln!(
                            out,
                            "(operad {} initial :maxdim {max_dim} :depth {depth} :shape-bound {shape_bound} :mode {})",
                            quote(name),
                            m(mode)
                        ),
                    };
                }
                Block::Algebra { name, operad, recipe } => match recipe {
                    AlgebraRecipe::Free { base, bound } => {
                        let _ = writeln!(out, "(algebra {} :operad {} free :base {} :bound {bound})", quote(name), quote(operad), quote(base));
                    }
                    AlgebraRecipe::Table { over, act } => {
                        let _ = write!(out, "(algebra {} :operad {} :over {}", quote(name), quote(operad), quote(over));
                        for (p, ls, r) in act {
                            let ls: Vec<String> = ls.iter().map(|l| quote(l)).collect();
                            let _ = write!(out, "\n  (act {} ({}) {})", quote(p), ls.join(" "), quote(r));
                        }
                        out.push_str(")\n");
                    }
                },
            }
        }
        out
    }

    pub fn collection(&self, name: &str) -> Result<Arc<TCollection>> {
        match self.get(name) {
            Some(Block::Collection { name, over, mode, proj }) => Ok(Arc::new(TCollection::new(name, *mode, self.gset(over)?, proj.clone())?)),
            _ => Err(Error::Unresolved(format!("collection {name}"))),
        }
    }

    /// Builds the named operad from its recipe.
    pub fn operad(&self, name: &str) -> Result<OperadicMagma> {
        match self.get(name) {
            Some(Block::Operad { recipe, .. }) => match recipe {
                OperadRecipe::Terminal { max_dim, bound, mode } => terminal_operad(*max_dim, *bound, *mode),
                OperadRecipe::Free { collection, depth, shape_bound, weak } => {
                    Ok(free_contracted_operad(&self.collection(collection)?, *depth, *shape_bound, !*weak)?.operad)
                }
                OperadRecipe::Initial { max_dim, depth, shape_bound, mode } => {
                    Ok(initial_operad(*max_dim, *depth, *shape_bound, *mode)?.operad)
                }
            },
            _ => Err(Error::Unresolved(format!("operad {name}"))),
        }
    }

    /// Builds the named algebra over an already built operad.
    pub fn algebra(&self, name: &str, op: &OperadicMagma) -> Result<TAlgebra> {
        let Some(Block::Algebra { recipe, .. }) = self.get(name) else { return Err(Error::Unresolved(format!("algebra {name}"))) };
        match recipe {
            AlgebraRecipe::Free { base, bound } => free_algebra(op, &self.gset(base)?, *bound),
            AlgebraRecipe::Table { over, act } => {
                let q = self.gset(over)?;
                let mut table = rustc_hash::FxHashMap::default();
                for (p, labels, r) in act {
                    let cell = op.coll.carrier.find(p).ok_or_else(|| Error::Unresolved(format!("operation {p}")))?;
                    let shape = op.coll.proj_of(cell);
                    let slots = shape.labels();
                    if slots.len() != labels.len() {
                        return Err(Error::Domain(format!("operation {p} takes {} labels, got {}", slots.len(), labels.len())));
                    }
                    let mut ls = Vec::new();
                    for ((h, _), l) in slots.iter().zip(labels) {
                        match q.cell(*h, l) {
                            Some(c) => ls.push(c.idx),
                            None => return Err(Error::Domain(format!("label {l} is not a {h}-cell"))),
                        }
                    }
                    let xi = shape.with_labels(ls);
                    crate::monad::check_pasting(&q, op.mode(), &xi)?;
                    let res = q.cell(cell.dim, r).ok_or_else(|| Error::Domain(format!("result {r} is not a {}-cell", cell.dim)))?;
                    table.insert((cell.idx, xi), res.idx);
                }
                Ok(TAlgebra { name: name.to_string(), carrier: q, act: table })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const THETA: &str = "(gset theta :maxdim 2 (cells 0 a b) (cells 1 (f a b) (g a b)) (cells 2 (alpha f g)))";

    fn parse_err(text: &str) -> Error {
        Document::parse(text).unwrap_err()
    }

    #[test]
    fn theta_round_trip() {
        let doc = Document::parse(THETA).unwrap();
        assert_eq!(doc.blocks.len(), 1);
        assert_eq!(doc.gset("theta").unwrap().sizes(), vec![2, 2, 1]);
        let again = Document::parse(&doc.to_text()).unwrap();
        assert_eq!(again, doc);
        let bare = Document::parse("(gset :maxdim 0 (cells 0 x))").unwrap();
        assert_eq!(bare.blocks[0].name(), "gset");
    }

    #[test]
    fn all_blocks_round_trip() {
        let text = format!(
            "{THETA}\n; a comment\n(term t :over theta (inv 0 (comp 0 (gen f) (id (gen a)))))\n\
             (collection c :over theta :mode inv (proj (a ()) (b ()) (f (())) (g (())) (alpha ((({{1}}))))))\n\
             (operad p terminal :maxdim 2 :bound 3 :mode inv)\n(operad q free :collection c :depth 2 :shape-bound 2)\n(operad w free :collection c :depth 1 :shape-bound 2 :closure weak)\n\
             (algebra x :operad p free :base theta :bound 3)\n(algebra y :operad p :over theta (act \"(())\" (a b f) f))"
        );
        let doc = Document::parse(&text).unwrap();
        assert_eq!(doc.blocks.len(), 8);
        assert_eq!(Document::parse(&doc.to_text()).unwrap(), doc);
        let Some(Block::Collection { proj, .. }) = doc.get("c") else { panic!() };
        assert_eq!(proj[2][0].to_string(), "((({1})))");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_err("(gset :maxdim 1\n  (cells 0 a) (cells 1 (f a a))") {
            Error::Parse { line: 1, col: 1, .. } => {}
            e => panic!("{e:?}"),
        }
        match parse_err("(gset :maxdim 0 (cells 0 a)))") {
            Error::Parse { line: 1, col: 29, .. } => {}
            e => panic!("{e:?}"),
        }
        match parse_err("(gset :maxdim 1 (cells 0 a)\n (cells 1 (f a b)))") {
            Error::Parse { line: 2, col: 16, .. } => {}
            e => panic!("{e:?}"),
        }
        assert!(matches!(parse_err("(gset :maxdim 0 (cells 0 a a))"), Error::Parse { .. }));
        assert!(matches!(parse_err(&format!("{THETA} {THETA}")), Error::Parse { .. }));
    }

    #[test]
    fn unresolved_references() {
        assert!(matches!(parse_err("(collection c :over nowhere (proj))"), Error::Unresolved(_)));
        assert!(matches!(parse_err(&format!("{THETA} (term t :over theta (gen h))")), Error::Unresolved(_)));
        assert!(matches!(parse_err("(operad q free :collection c :depth 1 :shape-bound 1)"), Error::Unresolved(_)));
    }

    #[test]
    fn bare_terms_use_the_only_gset() {
        let doc = Document::parse(&format!("{THETA} (inv 0 (inv 0 (gen f)))")).unwrap();
        assert!(matches!(doc.blocks[1], Block::Term { .. }));
        assert!(Document::parse("(gen f)").is_err());
    }

    #[test]
    fn table_algebra_resolves() {
        let text = format!("{THETA} (operad p terminal :maxdim 2 :bound 2 :mode strict) (algebra y :operad p :over theta (act \"(())\" (a b f) f))");
        let doc = Document::parse(&text).unwrap();
        let op = doc.operad("p").unwrap();
        let alg = doc.algebra("y", &op).unwrap();
        assert_eq!(alg.act.len(), 1);
    }
}
