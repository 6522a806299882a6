//! Text formats: structures, s-expression formulas, QCSP instances and a
//! QDIMACS subset for quantified 3-CNF.
//!
//! Structure grammar (`#` starts a comment):
//!
//! ```text
//! signature E/2 P/1
//! domain 3
//! E: (0,1) (1,0)
//! P: (2)
//! ```
//!
//! Formula grammar: `(exists x f)`, `(forall (x y) f)`, `(exists2 (S 1) f)`,
//! `(forall2 (S 1) f)`, `(and f ...)`, `(or f ...)`, `(not f)`,
//! `(atom NAME (x ...))`, `(eq x y)`, `(true)`, `(false)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{FoVar, Formula, Quant, SoVar, VarId};
use crate::model_check::{Qbf3Instance, QcspInstance};
use crate::signature::{is_identifier, Signature};
use crate::structure::{FiniteStructure, Tuple};

/// 1-based position of a token in the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ParseErrorKind {
    Syntax,
    UnknownSymbol,
    ArityMismatch,
    OutOfRange,
    DuplicateDeclaration,
    UnboundVariable,
    FreeVariable,
    DuplicateVariable,
    EqualityAtom,
    ClauseTooWide,
    BadHeader,
    UnquantifiedVariable,
    ShapeMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
    pub message: String,
}

fn err<T>(line: usize, column: usize, kind: ParseErrorKind, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        span: SourceSpan { line, column },
        kind,
        message: message.into(),
    })
}

fn strip_comment(line: &str, marker: char) -> &str {
    match line.find(marker) {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Words of a line with their 1-based columns.
fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

// ---------------------------------------------------------------------------
// Structures

pub fn parse_structure(text: &str) -> Result<FiniteStructure, ParseError> {
    let mut signature: Option<Signature> = None;
    let mut size: Option<usize> = None;
    let mut relations: Vec<BTreeSet<Tuple>> = Vec::new();

    for (lno, raw) in text.lines().enumerate() {
        let line_no = lno + 1;
        let line = strip_comment(raw, '#');
        let ws = words(line);
        let Some(&(col, head)) = ws.first() else {
            continue;
        };
        if head == "signature" {
            if signature.is_some() {
                return err(line_no, col, ParseErrorKind::DuplicateDeclaration, "duplicate signature declaration");
            }
            let mut sig = Signature::empty();
            for &(c, w) in &ws[1..] {
                let Some((name, arity)) = w.split_once('/') else {
                    return err(line_no, c, ParseErrorKind::Syntax, format!("expected NAME/ARITY, got `{w}`"));
                };
                let Ok(arity) = arity.parse::<usize>() else {
                    return err(line_no, c, ParseErrorKind::Syntax, format!("bad arity in `{w}`"));
                };
                sig = match sig.with(name, arity) {
                    Ok(s) => s,
                    Err(crate::StructureError::DuplicateSymbol(_)) => {
                        return err(line_no, c, ParseErrorKind::DuplicateDeclaration, format!("symbol `{name}` declared twice"))
                    }
                    Err(e) => return err(line_no, c, ParseErrorKind::Syntax, e.to_string()),
                };
            }
            relations = vec![BTreeSet::new(); sig.len()];
            signature = Some(sig);
            continue;
        }
        let Some(sig) = &signature else {
            return err(line_no, col, ParseErrorKind::Syntax, "expected `signature` declaration first");
        };
        if head == "domain" {
            if size.is_some() {
                return err(line_no, col, ParseErrorKind::DuplicateDeclaration, "duplicate domain declaration");
            }
            match ws.get(1).map(|(c, w)| (c, w.parse::<usize>())) {
                Some((_, Ok(n))) if ws.len() == 2 => size = Some(n),
                Some((c, _)) => return err(line_no, *c, ParseErrorKind::Syntax, "expected `domain N`"),
                None => return err(line_no, col, ParseErrorKind::Syntax, "expected `domain N`"),
            }
            continue;
        }
        let Some(n) = size else {
            return err(line_no, col, ParseErrorKind::Syntax, "expected `domain N` before relations");
        };
        let Some(colon) = line.find(':') else {
            return err(line_no, col, ParseErrorKind::Syntax, "expected `NAME: (..) ...`");
        };
        let name = line[..colon].trim();
        let Some(idx) = sig.index_of(name) else {
            return err(line_no, col, ParseErrorKind::UnknownSymbol, format!("unknown symbol `{name}`"));
        };
        let arity = sig.symbols()[idx].arity;
        for (c, tuple) in parse_tuples(&line[colon + 1..], line_no, colon + 2)? {
            if tuple.len() != arity {
                return err(
                    line_no,
                    c,
                    ParseErrorKind::ArityMismatch,
                    format!("`{name}` has arity {arity}, tuple has {} entries", tuple.len()),
                );
            }
            if let Some(&e) = tuple.iter().find(|&&e| e >= n) {
                return err(line_no, c, ParseErrorKind::OutOfRange, format!("element {e} outside domain of size {n}"));
            }
            relations[idx].insert(tuple);
        }
    }
    let Some(signature) = signature else {
        return err(1, 1, ParseErrorKind::Syntax, "missing `signature` declaration");
    };
    let Some(size) = size else {
        return err(1, 1, ParseErrorKind::Syntax, "missing `domain` declaration");
    };
    Ok(FiniteStructure::from_parts(signature, size, relations).expect("validated while parsing"))
}

fn parse_tuples(s: &str, line: usize, base_col: usize) -> Result<Vec<(usize, Tuple)>, ParseError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c != '(' {
            return err(line, base_col + i, ParseErrorKind::Syntax, format!("expected `(`, found `{c}`"));
        }
        let start = i;
        let Some(close) = bytes[i..].iter().position(|&c| c == ')') else {
            return err(line, base_col + i, ParseErrorKind::Syntax, "unterminated tuple");
        };
        let inner: String = bytes[i + 1..i + close].iter().collect();
        let mut tuple = Vec::new();
        for part in inner.split(',') {
            match part.trim().parse::<usize>() {
                Ok(e) => tuple.push(e),
                Err(_) => {
                    return err(line, base_col + start, ParseErrorKind::Syntax, format!("bad element `{}`", part.trim()))
                }
            }
        }
        out.push((base_col + start, tuple));
        i += close + 1;
    }
    Ok(out)
}

/// Canonical text: relations in signature order, tuples in lexicographic order,
/// empty relations omitted.
pub fn serialize_structure(a: &FiniteStructure) -> String {
    let mut out = String::from("signature");
    for s in a.signature().symbols() {
        out.push_str(&format!(" {}/{}", s.name, s.arity));
    }
    out.push('\n');
    out.push_str(&format!("domain {}\n", a.size()));
    for (sym, rel) in a.signature().symbols().iter().zip(a.relations()) {
        if rel.is_empty() {
            continue;
        }
        let tuples: Vec<String> = rel
            .iter()
            .map(|t| {
                let parts: Vec<String> = t.iter().map(|e| e.to_string()).collect();
                format!("({})", parts.join(","))
            })
            .collect();
        out.push_str(&format!("{}: {}\n", sym.name, tuples.join(" ")));
    }
    out
}

// ---------------------------------------------------------------------------
// S-expressions

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, SourceSpan),
    List(Vec<Sexp>, SourceSpan),
}

impl Sexp {
    fn span(&self) -> SourceSpan {
        match self {
            Sexp::Atom(_, s) | Sexp::List(_, s) => *s,
        }
    }
}

fn read_sexps(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut tokens: Vec<(String, SourceSpan)> = Vec::new();
    for (lno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw, ';');
        let mut cur = String::new();
        let mut cur_col = 0;
        for (ci, c) in line.chars().enumerate() {
            let col = ci + 1;
            if c == '(' || c == ')' || c.is_whitespace() {
                if !cur.is_empty() {
                    tokens.push((std::mem::take(&mut cur), SourceSpan { line: lno + 1, column: cur_col }));
                }
                if !c.is_whitespace() {
                    tokens.push((c.to_string(), SourceSpan { line: lno + 1, column: col }));
                }
            } else {
                if cur.is_empty() {
                    cur_col = col;
                }
                cur.push(c);
            }
        }
        if !cur.is_empty() {
            tokens.push((cur, SourceSpan { line: lno + 1, column: cur_col }));
        }
    }
    let mut stack: Vec<(Vec<Sexp>, SourceSpan)> = vec![(Vec::new(), SourceSpan { line: 1, column: 1 })];
    for (tok, span) in tokens {
        match tok.as_str() {
            "(" => stack.push((Vec::new(), span)),
            ")" => {
                if stack.len() == 1 {
                    return err(span.line, span.column, ParseErrorKind::Syntax, "unbalanced `)`");
                }
                let (items, open) = stack.pop().unwrap();
                stack.last_mut().unwrap().0.push(Sexp::List(items, open));
            }
            _ => stack.last_mut().unwrap().0.push(Sexp::Atom(tok, span)),
        }
    }
    if stack.len() > 1 {
        let (_, open) = stack.pop().unwrap();
        return err(open.line, open.column, ParseErrorKind::Syntax, "unclosed `(`");
    }
    Ok(stack.pop().unwrap().0)
}

struct FormulaParser<'a> {
    sig: &'a Signature,
    fo_scope: Vec<FoVar>,
    so_scope: Vec<SoVar>,
}

fn syntax<T>(span: SourceSpan, message: impl Into<String>) -> Result<T, ParseError> {
    err(span.line, span.column, ParseErrorKind::Syntax, message)
}

impl FormulaParser<'_> {
    fn ident(&self, s: &Sexp) -> Result<String, ParseError> {
        match s {
            Sexp::Atom(a, _) if is_identifier(a) => Ok(a.clone()),
            other => syntax(other.span(), "expected an identifier"),
        }
    }

    fn lookup_fo(&self, s: &Sexp) -> Result<FoVar, ParseError> {
        let name = self.ident(s)?;
        match self.fo_scope.iter().rev().find(|v| *v.name == *name) {
            Some(v) => Ok(v.clone()),
            None => {
                let sp = s.span();
                err(sp.line, sp.column, ParseErrorKind::UnboundVariable, format!("unbound variable `{name}`"))
            }
        }
    }

    fn formula(&mut self, s: &Sexp) -> Result<Formula, ParseError> {
        let (items, span) = match s {
            Sexp::Atom(a, _) if a == "true" => return Ok(Formula::True),
            Sexp::Atom(a, _) if a == "false" => return Ok(Formula::False),
            Sexp::Atom(a, sp) => return syntax(*sp, format!("expected a formula, found `{a}`")),
            Sexp::List(items, sp) => (items, *sp),
        };
        let Some(Sexp::Atom(head, _)) = items.first() else {
            return syntax(span, "expected a keyword");
        };
        let args = &items[1..];
        let arity_err = |n: &str| syntax::<Formula>(span, format!("wrong number of operands for `{n}`"));
        match head.as_str() {
            "true" if args.is_empty() => Ok(Formula::True),
            "false" if args.is_empty() => Ok(Formula::False),
            "not" => {
                if args.len() != 1 {
                    return arity_err("not");
                }
                Ok(Formula::not(self.formula(&args[0])?))
            }
            "and" | "or" => {
                let parts = args.iter().map(|a| self.formula(a)).collect::<Result<Vec<_>, _>>()?;
                Ok(if head == "and" {
                    Formula::and_raw(parts)
                } else {
                    Formula::or_raw(parts)
                })
            }
            "exists" | "forall" => {
                if args.len() != 2 {
                    return arity_err(head);
                }
                let q = if head == "exists" { Quant::Exists } else { Quant::Forall };
                let names = match &args[0] {
                    Sexp::List(vs, sp) if vs.is_empty() => return syntax(*sp, "empty variable list"),
                    Sexp::List(vs, _) => vs.iter().map(|v| self.ident(v)).collect::<Result<Vec<_>, _>>()?,
                    a => vec![self.ident(a)?],
                };
                let vars: Vec<FoVar> = names.iter().map(|n| FoVar::fresh(n)).collect();
                let depth = self.fo_scope.len();
                self.fo_scope.extend(vars.iter().cloned());
                let body = self.formula(&args[1]);
                self.fo_scope.truncate(depth);
                Ok(Formula::fo_block(q, vars, body?))
            }
            "exists2" | "forall2" => {
                if args.len() != 2 {
                    return arity_err(head);
                }
                let q = if head == "exists2" { Quant::Exists } else { Quant::Forall };
                let (name, arity) = match &args[0] {
                    Sexp::List(b, _) if b.len() == 2 => {
                        let name = self.ident(&b[0])?;
                        let arity = match &b[1] {
                            Sexp::Atom(n, sp) => match n.parse::<usize>() {
                                Ok(a) if a >= 1 => a,
                                _ => return syntax(*sp, "SO arity must be a positive integer"),
                            },
                            other => return syntax(other.span(), "expected arity"),
                        };
                        (name, arity)
                    }
                    other => return syntax(other.span(), "expected `(NAME ARITY)`"),
                };
                let var = SoVar::fresh(&name, arity);
                self.so_scope.push(var.clone());
                let body = self.formula(&args[1]);
                self.so_scope.pop();
                Ok(Formula::so(q, var, body?))
            }
            "atom" => {
                if args.len() != 2 {
                    return arity_err("atom");
                }
                let name = self.ident(&args[0])?;
                let vars = match &args[1] {
                    Sexp::List(vs, _) => vs.iter().map(|v| self.lookup_fo(v)).collect::<Result<Vec<_>, _>>()?,
                    other => return syntax(other.span(), "expected an argument list"),
                };
                let nspan = args[0].span();
                if let Some(v) = self.so_scope.iter().rev().find(|v| *v.name == *name) {
                    if v.arity != vars.len() {
                        return err(
                            nspan.line,
                            nspan.column,
                            ParseErrorKind::ArityMismatch,
                            format!("`{name}` has arity {}, got {} arguments", v.arity, vars.len()),
                        );
                    }
                    return Ok(Formula::SoAtom { var: v.clone(), args: vars });
                }
                match self.sig.arity(&name) {
                    None => err(nspan.line, nspan.column, ParseErrorKind::UnknownSymbol, format!("unknown relation `{name}`")),
                    Some(a) if a != vars.len() => err(
                        nspan.line,
                        nspan.column,
                        ParseErrorKind::ArityMismatch,
                        format!("`{name}` has arity {a}, got {} arguments", vars.len()),
                    ),
                    Some(_) => Ok(Formula::Rel { symbol: name.into(), args: vars }),
                }
            }
            "eq" => {
                if args.len() != 2 {
                    return arity_err("eq");
                }
                Ok(Formula::Eq(self.lookup_fo(&args[0])?, self.lookup_fo(&args[1])?))
            }
            other => syntax(span, format!("unknown keyword `{other}`")),
        }
    }
}

/// Parses a sentence over `sig`. Every binder gets a fresh id.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let sexps = read_sexps(text)?;
    let [sexp] = sexps.as_slice() else {
        let span = sexps.get(1).map(Sexp::span).unwrap_or(SourceSpan { line: 1, column: 1 });
        return syntax(span, format!("expected exactly one formula, found {}", sexps.len()));
    };
    let mut p = FormulaParser {
        sig,
        fo_scope: Vec::new(),
        so_scope: Vec::new(),
    };
    p.formula(sexp)
}

/// The relation symbols a formula text uses, with arities read off their
/// first occurrence. Names bound by `exists2`/`forall2` are not symbols.
pub fn infer_signature(text: &str) -> Result<Signature, ParseError> {
    fn walk(s: &Sexp, bound: &mut Vec<String>, out: &mut Vec<(String, usize, SourceSpan)>) -> Result<(), ParseError> {
        let Sexp::List(items, _) = s else { return Ok(()) };
        match items.as_slice() {
            [Sexp::Atom(h, _), Sexp::List(b, _), body] if h == "exists2" || h == "forall2" => {
                let name = match b.first() {
                    Some(Sexp::Atom(n, _)) => n.clone(),
                    _ => String::new(),
                };
                bound.push(name);
                let r = walk(body, bound, out);
                bound.pop();
                r
            }
            [Sexp::Atom(h, _), Sexp::Atom(name, sp), Sexp::List(args, _)] if h == "atom" => {
                if bound.contains(name) {
                    return Ok(());
                }
                match out.iter().find(|(n, _, _)| n == name) {
                    Some((_, a, _)) if *a != args.len() => err(
                        sp.line,
                        sp.column,
                        ParseErrorKind::ArityMismatch,
                        format!("`{name}` used with {a} and {} arguments", args.len()),
                    ),
                    Some(_) => Ok(()),
                    None => {
                        out.push((name.clone(), args.len(), *sp));
                        Ok(())
                    }
                }
            }
            _ => items.iter().try_for_each(|i| walk(i, bound, out)),
        }
    }
    let mut found = Vec::new();
    for s in read_sexps(text)? {
        walk(&s, &mut Vec::new(), &mut found)?;
    }
    let mut sig = Signature::empty();
    for (name, arity, sp) in found {
        sig = sig.with(&name, arity).map_err(|e| ParseError {
            span: sp,
            kind: ParseErrorKind::Syntax,
            message: e.to_string(),
        })?;
    }
    Ok(sig)
}

/// Canonical s-expression text. Binder names are the surface names, suffixed
/// with `_k` where needed so that every binder prints under a distinct name
/// and no SO variable prints under a relation symbol's name.
pub fn serialize_formula(f: &Formula) -> String {
    let mut namer = Namer::new(f);
    let mut out = String::new();
    namer.write(f, &mut out);
    out
}

struct Namer {
    fo_names: HashMap<VarId, String>,
    so_names: HashMap<VarId, String>,
    fo_used: HashSet<String>,
    so_used: HashSet<String>,
}

impl Namer {
    fn new(f: &Formula) -> Self {
        let mut n = Namer {
            fo_names: HashMap::new(),
            so_names: HashMap::new(),
            fo_used: HashSet::new(),
            so_used: HashSet::new(),
        };
        for v in f.free_fo_vars() {
            n.fo_used.insert(v.name.to_string());
            n.fo_names.insert(v.id, v.name.to_string());
        }
        for s in f.relation_symbols().keys() {
            n.so_used.insert(s.clone());
        }
        for v in f.free_so_vars() {
            let name = pick(&v.name, &n.so_used);
            n.so_used.insert(name.clone());
            n.so_names.insert(v.id, name);
        }
        n
    }

    fn fo<'a>(&'a self, v: &'a FoVar) -> &'a str {
        self.fo_names.get(&v.id).map(String::as_str).unwrap_or(&v.name)
    }

    fn write_args(&self, args: &[FoVar], out: &mut String) {
        out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(self.fo(a));
        }
        out.push(')');
    }

    fn write(&mut self, f: &Formula, out: &mut String) {
        match f {
            Formula::True => out.push_str("(true)"),
            Formula::False => out.push_str("(false)"),
            Formula::Rel { symbol, args } => {
                out.push_str("(atom ");
                out.push_str(symbol);
                out.push(' ');
                self.write_args(args, out);
                out.push(')');
            }
            Formula::SoAtom { var, args } => {
                out.push_str("(atom ");
                let name = self.so_names.get(&var.id).cloned().unwrap_or_else(|| var.name.to_string());
                out.push_str(&name);
                out.push(' ');
                self.write_args(args, out);
                out.push(')');
            }
            Formula::Eq(a, b) => {
                out.push_str("(eq ");
                out.push_str(self.fo(a));
                out.push(' ');
                out.push_str(self.fo(b));
                out.push(')');
            }
            Formula::Not(g) => {
                out.push_str("(not ");
                self.write(g, out);
                out.push(')');
            }
            Formula::And(gs) | Formula::Or(gs) => {
                out.push_str(if matches!(f, Formula::And(_)) { "(and" } else { "(or" });
                for g in gs {
                    out.push(' ');
                    self.write(g, out);
                }
                out.push(')');
            }
            Formula::Fo { q, var, body } => {
                let name = pick(&var.name, &self.fo_used);
                self.fo_used.insert(name.clone());
                self.fo_names.insert(var.id, name.clone());
                out.push_str(match q {
                    Quant::Exists => "(exists ",
                    Quant::Forall => "(forall ",
                });
                out.push_str(&name);
                out.push(' ');
                self.write(body, out);
                out.push(')');
            }
            Formula::So { q, var, body } => {
                let name = pick(&var.name, &self.so_used);
                self.so_used.insert(name.clone());
                self.so_names.insert(var.id, name.clone());
                out.push_str(match q {
                    Quant::Exists => "(exists2 (",
                    Quant::Forall => "(forall2 (",
                });
                out.push_str(&name);
                out.push_str(&format!(" {}) ", var.arity));
                self.write(body, out);
                out.push(')');
            }
        }
    }
}

fn pick(base: &str, used: &HashSet<String>) -> String {
    crate::signature::fresh_name(base, |n| used.contains(n))
}

// ---------------------------------------------------------------------------
// QCSP instances

/// Parses `forall x1 ; exists y1 y2` followed by constraint atoms `R(x1,y1) ...`.
pub fn parse_qcsp(text: &str, template_sig: &Signature) -> Result<QcspInstance, ParseError> {
    let mut blocks: Option<Vec<(Quant, Vec<String>)>> = None;
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut atoms: Vec<(Arc<str>, Vec<usize>)> = Vec::new();
    for (lno, raw) in text.lines().enumerate() {
        let line_no = lno + 1;
        let line = strip_comment(raw, '#');
        if line.trim().is_empty() {
            continue;
        }
        if blocks.is_none() {
            let mut bs = Vec::new();
            let mut offset = 0;
            for seg in line.split(';') {
                let ws: Vec<(usize, &str)> = words(seg).into_iter().map(|(c, w)| (c + offset, w)).collect();
                offset += seg.len() + 1;
                let Some(&(c, q)) = ws.first() else {
                    return err(line_no, offset, ParseErrorKind::Syntax, "empty quantifier block (write `exists` with no variables)");
                };
                let q = match q {
                    "forall" => Quant::Forall,
                    "exists" => Quant::Exists,
                    other => return err(line_no, c, ParseErrorKind::Syntax, format!("expected `forall` or `exists`, found `{other}`")),
                };
                let mut vars = Vec::new();
                for &(c, v) in &ws[1..] {
                    if !is_identifier(v) {
                        return err(line_no, c, ParseErrorKind::Syntax, format!("bad variable name `{v}`"));
                    }
                    if index.contains_key(v) {
                        return err(line_no, c, ParseErrorKind::DuplicateVariable, format!("variable `{v}` occurs in two blocks"));
                    }
                    index.insert(v.to_string(), index.len());
                    vars.push(v.to_string());
                }
                bs.push((q, vars));
            }
            blocks = Some(bs);
            continue;
        }
        for (col, atom) in split_atoms(line) {
            if atom.starts_with('=') || atom.starts_with("eq(") || atom.contains('=') {
                return err(line_no, col, ParseErrorKind::EqualityAtom, "equality atoms are not supported in QCSP instances");
            }
            let Some(open) = atom.find('(') else {
                return err(line_no, col, ParseErrorKind::Syntax, format!("expected `NAME(args)`, found `{atom}`"));
            };
            if !atom.ends_with(')') {
                return err(line_no, col, ParseErrorKind::Syntax, format!("unterminated atom `{atom}`"));
            }
            let name = &atom[..open];
            let Some(arity) = template_sig.arity(name) else {
                return err(line_no, col, ParseErrorKind::UnknownSymbol, format!("unknown relation `{name}`"));
            };
            let inner = &atom[open + 1..atom.len() - 1];
            let mut args = Vec::new();
            for v in inner.split(',').map(str::trim).filter(|v| !v.is_empty()) {
                match index.get(v) {
                    Some(&i) => args.push(i),
                    None => return err(line_no, col, ParseErrorKind::UnboundVariable, format!("variable `{v}` is not quantified")),
                }
            }
            if args.len() != arity {
                return err(
                    line_no,
                    col,
                    ParseErrorKind::ArityMismatch,
                    format!("`{name}` has arity {arity}, got {} arguments", args.len()),
                );
            }
            atoms.push((name.into(), args));
        }
    }
    let Some(blocks) = blocks else {
        return err(1, 1, ParseErrorKind::Syntax, "missing quantifier prefix line");
    };
    Ok(QcspInstance::new(blocks, atoms))
}

fn split_atoms(line: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let mut depth = 0;
    for (i, c) in line.chars().enumerate() {
        if c.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                out.push((start + 1, std::mem::take(&mut cur)));
            }
            continue;
        }
        if cur.is_empty() {
            start = i;
        }
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if !c.is_whitespace() {
            cur.push(c);
        }
        if c == ')' && depth == 0 {
            out.push((start + 1, std::mem::take(&mut cur)));
        }
    }
    if !cur.is_empty() {
        out.push((start + 1, cur));
    }
    out
}

pub fn serialize_qcsp(inst: &QcspInstance) -> String {
    let blocks: Vec<String> = inst
        .blocks()
        .iter()
        .map(|(q, vs)| {
            let kw = match q {
                Quant::Forall => "forall",
                Quant::Exists => "exists",
            };
            let names: Vec<&str> = vs.iter().map(|&v| inst.var_name(v)).collect();
            if names.is_empty() {
                kw.to_string()
            } else {
                format!("{kw} {}", names.join(" "))
            }
        })
        .collect();
    let mut out = blocks.join(" ; ");
    out.push('\n');
    let atoms: Vec<String> = inst
        .atoms()
        .iter()
        .map(|(s, args)| {
            let names: Vec<&str> = args.iter().map(|&v| inst.var_name(v)).collect();
            format!("{s}({})", names.join(","))
        })
        .collect();
    if !atoms.is_empty() {
        out.push_str(&atoms.join(" "));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// QDIMACS

/// Parses the QDIMACS subset: header `p cnf V C`, quantifier lines `a ... 0` /
/// `e ... 0` (adjacent lines of the same kind are merged), then clauses of at
/// most three literals.
pub fn parse_qdimacs3(text: &str) -> Result<Qbf3Instance, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut blocks: Vec<(Quant, Vec<u32>)> = Vec::new();
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut quantified: BTreeSet<u32> = BTreeSet::new();
    let mut last_line = 1;
    for (lno, raw) in text.lines().enumerate() {
        let line_no = lno + 1;
        last_line = line_no;
        let ws = words(raw);
        let Some(&(col, head)) = ws.first() else {
            continue;
        };
        if head == "c" {
            continue;
        }
        if head == "p" {
            if header.is_some() {
                return err(line_no, col, ParseErrorKind::BadHeader, "duplicate header");
            }
            let parsed = (ws.len() == 4 && ws[1].1 == "cnf")
                .then(|| Some((ws[2].1.parse::<u32>().ok()?, ws[3].1.parse::<usize>().ok()?)))
                .flatten();
            match parsed {
                Some(h) => header = Some(h),
                None => return err(line_no, col, ParseErrorKind::BadHeader, "expected `p cnf <vars> <clauses>`"),
            }
            continue;
        }
        let Some((nvars, _)) = header else {
            return err(line_no, col, ParseErrorKind::BadHeader, "missing `p cnf` header");
        };
        let parse_nums = |ws: &[(usize, &str)]| -> Result<Vec<(usize, i32)>, ParseError> {
            let mut nums = Vec::new();
            for &(c, w) in ws {
                match w.parse::<i32>() {
                    Ok(n) => nums.push((c, n)),
                    Err(_) => return err(line_no, c, ParseErrorKind::Syntax, format!("expected an integer, found `{w}`")),
                }
            }
            match nums.pop() {
                Some((_, 0)) => {}
                _ => return err(line_no, col, ParseErrorKind::Syntax, "line must be terminated by 0"),
            }
            if let Some(&(c, _)) = nums.iter().find(|(_, n)| *n == 0) {
                return err(line_no, c, ParseErrorKind::Syntax, "0 may only terminate a line");
            }
            if let Some(&(c, n)) = nums.iter().find(|(_, n)| n.unsigned_abs() > nvars) {
                return err(line_no, c, ParseErrorKind::OutOfRange, format!("variable {} exceeds header bound {nvars}", n.abs()));
            }
            Ok(nums)
        };
        if head == "a" || head == "e" {
            if !clauses.is_empty() {
                return err(line_no, col, ParseErrorKind::Syntax, "quantifier line after clauses");
            }
            let q = if head == "a" { Quant::Forall } else { Quant::Exists };
            let nums = parse_nums(&ws[1..])?;
            let mut vars = Vec::new();
            for (c, n) in nums {
                if n < 0 {
                    return err(line_no, c, ParseErrorKind::Syntax, "negative variable in quantifier line");
                }
                let v = n as u32;
                if !quantified.insert(v) {
                    return err(line_no, c, ParseErrorKind::DuplicateVariable, format!("variable {v} quantified twice"));
                }
                vars.push(v);
            }
            match blocks.last_mut() {
                Some((lq, lv)) if *lq == q => lv.extend(vars),
                _ => blocks.push((q, vars)),
            }
            continue;
        }
        let nums = parse_nums(&ws)?;
        if nums.len() > 3 {
            return err(line_no, nums[3].0, ParseErrorKind::ClauseTooWide, format!("clause width {} exceeds 3", nums.len()));
        }
        for &(c, n) in &nums {
            if !quantified.contains(&n.unsigned_abs()) {
                return err(line_no, c, ParseErrorKind::UnquantifiedVariable, format!("variable {} is never quantified", n.abs()));
            }
        }
        clauses.push(nums.into_iter().map(|(_, n)| n).collect());
    }
    let Some((nvars, nclauses)) = header else {
        return err(last_line, 1, ParseErrorKind::BadHeader, "missing `p cnf` header");
    };
    if clauses.len() != nclauses {
        return err(
            last_line,
            1,
            ParseErrorKind::BadHeader,
            format!("header declares {nclauses} clauses, found {}", clauses.len()),
        );
    }
    Ok(Qbf3Instance::new(nvars, blocks, clauses))
}

/// Parses and checks that the quantifier prefix is `(forall exists)^n`.
pub fn parse_qdimacs3_shaped(text: &str, n: usize) -> Result<Qbf3Instance, ParseError> {
    let inst = parse_qdimacs3(text)?;
    if !inst.has_forall_exists_shape(n) {
        return err(1, 1, ParseErrorKind::ShapeMismatch, format!("prefix is not (forall exists)^{n}"));
    }
    Ok(inst)
}

pub fn serialize_qdimacs3(inst: &Qbf3Instance) -> String {
    let mut out = format!("p cnf {} {}\n", inst.num_vars(), inst.clauses().len());
    for (q, vs) in inst.blocks() {
        out.push(if *q == Quant::Forall { 'a' } else { 'e' });
        for v in vs {
            out.push_str(&format!(" {v}"));
        }
        out.push_str(" 0\n");
    }
    for c in inst.clauses() {
        for l in c {
            out.push_str(&format!("{l} "));
        }
        out.push_str("0\n");
    }
    out
}
