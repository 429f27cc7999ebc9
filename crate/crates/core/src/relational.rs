//! Facts, instances and the query expression language.
//!
//! Expressions use a prefix syntax over fact atoms:
//!
//! ```text
//! expr := true | false | ATOM
//!       | (and expr...) | (or expr...) | (not expr)
//!       | (exists REL)            some fact of relation REL
//!       | (count-ge K [REL])      at least K facts (of REL)
//!       | (above SET...)          contains every fact of some SET
//!       | (gt TERM TERM) | (lt TERM TERM) | (eq TERM TERM)
//! ATOM := REL | REL(TERM,...)     e.g. `a`, `R(1)`, `S(c)`, `R(?x)`
//! SET  := {ATOM,...}
//! TERM := integer | symbol | ?var
//! ```
//!
//! Variables (`?x`) are only meaningful after [`Expr::substitute`], which is
//! how set-valued queries test one candidate output at a time.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A constant in a fact tuple.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Const {
    Int(i64),
    Sym(String),
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Int(i) => write!(f, "{i}"),
            Const::Sym(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Const {
    fn from(i: i64) -> Self {
        Const::Int(i)
    }
}

impl From<&str> for Const {
    fn from(s: &str) -> Self {
        Const::Sym(s.to_owned())
    }
}

/// A ground fact `rel(tuple)`. Nullary facts print as the bare relation name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fact {
    pub rel: String,
    #[serde(default)]
    pub tuple: Vec<Const>,
}

impl Fact {
    pub fn new(rel: impl Into<String>, tuple: Vec<Const>) -> Self {
        Fact {
            rel: rel.into(),
            tuple,
        }
    }

    pub fn atom(name: impl Into<String>) -> Self {
        Fact::new(name, Vec::new())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let Atom { rel, terms } = parse_atom(text.trim())?;
        terms
            .into_iter()
            .map(|t| match t {
                Term::Const(c) => Ok(c),
                Term::Var(v) => Err(Error::malformed(format!(
                    "fact {text} contains variable ?{v}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(|tuple| Fact { rel, tuple })
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rel)?;
        if !self.tuple.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.tuple.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A set of facts.
pub type Instance = BTreeSet<Fact>;

/// Constants used by an instance.
pub fn active_domain<'a>(facts: impl IntoIterator<Item = &'a Fact>) -> BTreeSet<Const> {
    facts
        .into_iter()
        .flat_map(|f| f.tuple.iter().cloned())
        .collect()
}

/// `{a,R(1)}` style rendering, in the iteration order given.
pub fn format_set<'a>(facts: impl IntoIterator<Item = &'a Fact>) -> String {
    let parts: Vec<String> = facts.into_iter().map(|f| f.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Const),
    Var(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub rel: String,
    pub terms: Vec<Term>,
}

/// A Boolean query over instances.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    True,
    False,
    Atom(Atom),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Exists(String),
    CountGe(usize, Option<String>),
    Above(Vec<Vec<Atom>>),
    Cmp(CmpOp, Term, Term),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Gt,
    Lt,
    Eq,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let tokens = tokenize(text)?;
        let mut pos = 0;
        let e = parse_expr(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::malformed(format!(
                "trailing input after expression: {}",
                tokens[pos..].join(" ")
            )));
        }
        Ok(e)
    }

    /// Replaces `?var` by `value` everywhere.
    pub fn substitute(&self, var: &str, value: &Const) -> Expr {
        let term = |t: &Term| match t {
            Term::Var(v) if v == var => Term::Const(value.clone()),
            other => other.clone(),
        };
        let atom = |a: &Atom| Atom {
            rel: a.rel.clone(),
            terms: a.terms.iter().map(term).collect(),
        };
        match self {
            Expr::True | Expr::False | Expr::Exists(_) | Expr::CountGe(..) => self.clone(),
            Expr::Atom(a) => Expr::Atom(atom(a)),
            Expr::And(es) => Expr::And(es.iter().map(|e| e.substitute(var, value)).collect()),
            Expr::Or(es) => Expr::Or(es.iter().map(|e| e.substitute(var, value)).collect()),
            Expr::Not(e) => Expr::Not(Box::new(e.substitute(var, value))),
            Expr::Above(sets) => {
                Expr::Above(sets.iter().map(|s| s.iter().map(atom).collect()).collect())
            }
            Expr::Cmp(op, a, b) => Expr::Cmp(*op, term(a), term(b)),
        }
    }

    /// Ground facts named by atoms, in order of first appearance.
    pub fn ground_facts(&self) -> Vec<Fact> {
        fn walk(e: &Expr, out: &mut Vec<Fact>) {
            let mut push = |a: &Atom| {
                if let Some(f) = ground(a) {
                    if !out.contains(&f) {
                        out.push(f);
                    }
                }
            };
            match e {
                Expr::Atom(a) => push(a),
                Expr::Above(sets) => sets.iter().flatten().for_each(push),
                Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| walk(e, out)),
                Expr::Not(e) => walk(e, out),
                _ => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Evaluates on an instance. Atoms with unbound variables never match.
    pub fn eval(&self, inst: &Instance) -> bool {
        match self {
            Expr::True => true,
            Expr::False => false,
            Expr::Atom(a) => ground(a).is_some_and(|f| inst.contains(&f)),
            Expr::And(es) => es.iter().all(|e| e.eval(inst)),
            Expr::Or(es) => es.iter().any(|e| e.eval(inst)),
            Expr::Not(e) => !e.eval(inst),
            Expr::Exists(rel) => inst.iter().any(|f| &f.rel == rel),
            Expr::CountGe(k, rel) => {
                inst.iter()
                    .filter(|f| rel.as_ref().is_none_or(|r| &f.rel == r))
                    .count()
                    >= *k
            }
            Expr::Above(sets) => sets.iter().any(|set| {
                set.iter()
                    .all(|a| ground(a).is_some_and(|f| inst.contains(&f)))
            }),
            Expr::Cmp(op, a, b) => compare(*op, a, b),
        }
    }

    /// Compiles against a fixed fact universe so that instances can be bit
    /// masks over it. Facts outside the universe are treated as absent.
    pub fn compile(&self, universe: &[Fact]) -> Result<MaskExpr> {
        if universe.len() > 64 {
            return Err(Error::cap(
                "fact universe for compiled queries",
                universe.len() as u128,
                64,
            ));
        }
        let bit = |a: &Atom| -> Option<u64> {
            let f = ground(a)?;
            universe.iter().position(|u| *u == f).map(|i| 1u64 << i)
        };
        let rel_mask = |rel: Option<&String>| -> u64 {
            universe
                .iter()
                .enumerate()
                .filter(|(_, f)| rel.is_none_or(|r| &f.rel == r))
                .fold(0, |m, (i, _)| m | 1 << i)
        };
        Ok(match self {
            Expr::True => MaskExpr::Const(true),
            Expr::False => MaskExpr::Const(false),
            Expr::Atom(a) => match bit(a) {
                Some(b) => MaskExpr::All(b),
                None => MaskExpr::Const(false),
            },
            Expr::And(es) => MaskExpr::And(
                es.iter()
                    .map(|e| e.compile(universe))
                    .collect::<Result<_>>()?,
            ),
            Expr::Or(es) => MaskExpr::Or(
                es.iter()
                    .map(|e| e.compile(universe))
                    .collect::<Result<_>>()?,
            ),
            Expr::Not(e) => MaskExpr::Not(Box::new(e.compile(universe)?)),
            Expr::Exists(rel) => MaskExpr::CountGe(1, rel_mask(Some(rel))),
            Expr::CountGe(k, rel) => MaskExpr::CountGe(*k as u32, rel_mask(rel.as_ref())),
            Expr::Above(sets) => MaskExpr::Or(
                sets.iter()
                    .map(|set| {
                        set.iter()
                            .try_fold(0u64, |m, a| bit(a).map(|b| m | b))
                            .map_or(MaskExpr::Const(false), MaskExpr::All)
                    })
                    .collect(),
            ),
            Expr::Cmp(op, a, b) => MaskExpr::Const(compare(*op, a, b)),
        })
    }
}

fn ground(a: &Atom) -> Option<Fact> {
    let tuple = a
        .terms
        .iter()
        .map(|t| match t {
            Term::Const(c) => Some(c.clone()),
            Term::Var(_) => None,
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Fact::new(a.rel.clone(), tuple))
}

fn compare(op: CmpOp, a: &Term, b: &Term) -> bool {
    let (Term::Const(a), Term::Const(b)) = (a, b) else {
        return false;
    };
    match op {
        CmpOp::Gt => matches!((a, b), (Const::Int(x), Const::Int(y)) if x > y),
        CmpOp::Lt => matches!((a, b), (Const::Int(x), Const::Int(y)) if x < y),
        CmpOp::Eq => a == b,
    }
}

/// An expression compiled to bit masks over a fact universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MaskExpr {
    Const(bool),
    /// Every bit of the mask is present.
    All(u64),
    /// At least `k` bits of the mask are present.
    CountGe(u32, u64),
    And(Vec<MaskExpr>),
    Or(Vec<MaskExpr>),
    Not(Box<MaskExpr>),
}

impl MaskExpr {
    pub fn eval(&self, set: u64) -> bool {
        match self {
            MaskExpr::Const(b) => *b,
            MaskExpr::All(m) => set & m == *m,
            MaskExpr::CountGe(k, m) => (set & m).count_ones() >= *k,
            MaskExpr::And(es) => es.iter().all(|e| e.eval(set)),
            MaskExpr::Or(es) => es.iter().any(|e| e.eval(set)),
            MaskExpr::Not(e) => !e.eval(set),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' | ')' => {
                out.push(c.to_string());
                chars.next();
            }
            '{' => {
                // a set literal is one token
                let end = text[i..]
                    .find('}')
                    .ok_or_else(|| Error::malformed(format!("unclosed '{{' at byte {i}")))?;
                out.push(text[i..=i + end].to_owned());
                while chars.peek().is_some_and(|&(j, _)| j <= i + end) {
                    chars.next();
                }
            }
            _ => {
                // a word, with a parenthesised argument list if one follows
                let mut j = i;
                let mut depth = 0;
                while let Some(&(k, ch)) = chars.peek() {
                    if depth == 0 && (ch.is_whitespace() || ch == ')' || (ch == '(' && k == i)) {
                        break;
                    }
                    if ch == '(' {
                        depth += 1;
                    } else if ch == ')' {
                        depth -= 1;
                    }
                    j = k + ch.len_utf8();
                    chars.next();
                    if depth == 0 && ch == ')' {
                        break;
                    }
                }
                if depth != 0 {
                    return Err(Error::malformed(format!(
                        "unbalanced parentheses in {}",
                        &text[i..]
                    )));
                }
                out.push(text[i..j].to_owned());
            }
        }
    }
    Ok(out)
}

fn parse_term(t: &str) -> Result<Term> {
    let t = t.trim();
    if t.is_empty() {
        return Err(Error::malformed("empty term"));
    }
    if let Some(v) = t.strip_prefix('?') {
        return Ok(Term::Var(v.to_owned()));
    }
    Ok(Term::Const(match t.parse::<i64>() {
        Ok(i) => Const::Int(i),
        Err(_) => Const::Sym(t.to_owned()),
    }))
}

fn parse_atom(t: &str) -> Result<Atom> {
    let valid_name = |s: &str| {
        !s.is_empty()
            && s.chars()
                .all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '\'')
    };
    match t.find('(') {
        None if valid_name(t) => Ok(Atom {
            rel: t.to_owned(),
            terms: Vec::new(),
        }),
        Some(open) if t.ends_with(')') && valid_name(&t[..open]) => {
            let inner = &t[open + 1..t.len() - 1];
            let terms = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(parse_term).collect::<Result<_>>()?
            };
            Ok(Atom {
                rel: t[..open].to_owned(),
                terms,
            })
        }
        _ => Err(Error::malformed(format!("not a fact atom: {t}"))),
    }
}

/// Splits a set literal `{a,R(1,2)}` at top-level commas.
fn parse_set(t: &str) -> Result<Vec<Atom>> {
    let inner = &t[1..t.len() - 1];
    let mut atoms = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                atoms.push(parse_atom(inner[start..i].trim())?);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !inner[start..].trim().is_empty() {
        atoms.push(parse_atom(inner[start..].trim())?);
    }
    Ok(atoms)
}

fn parse_expr(tokens: &[String], pos: &mut usize) -> Result<Expr> {
    let Some(tok) = tokens.get(*pos) else {
        return Err(Error::malformed("unexpected end of expression"));
    };
    *pos += 1;
    match tok.as_str() {
        "true" => return Ok(Expr::True),
        "false" => return Ok(Expr::False),
        "(" => {}
        ")" => return Err(Error::malformed("unexpected ')'")),
        t if t.starts_with('{') => {
            return Err(Error::malformed(format!("set {t} outside (above ...)")))
        }
        t => return parse_atom(t).map(Expr::Atom),
    }
    let Some(head) = tokens.get(*pos) else {
        return Err(Error::malformed("unexpected end after '('"));
    };
    *pos += 1;
    let mut args: Vec<&String> = Vec::new();
    let mut subs: Vec<Expr> = Vec::new();
    let is_form = matches!(head.as_str(), "and" | "or" | "not");
    loop {
        match tokens.get(*pos).map(String::as_str) {
            None => return Err(Error::malformed(format!("unclosed ({head} ...)"))),
            Some(")") => {
                *pos += 1;
                break;
            }
            Some(_) if is_form => subs.push(parse_expr(tokens, pos)?),
            Some(_) => {
                args.push(&tokens[*pos]);
                *pos += 1;
            }
        }
    }
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::malformed(format!(
                "({head} ...) takes {n} argument(s), got {}",
                args.len()
            )))
        }
    };
    match head.as_str() {
        "and" => Ok(Expr::And(subs)),
        "or" => Ok(Expr::Or(subs)),
        "not" if subs.len() == 1 => Ok(Expr::Not(Box::new(subs.pop().expect("one")))),
        "not" => Err(Error::malformed("(not ...) takes exactly one expression")),
        "exists" => {
            arity(1)?;
            Ok(Expr::Exists(args[0].clone()))
        }
        "count-ge" => {
            if args.is_empty() || args.len() > 2 {
                return Err(Error::malformed("(count-ge K [REL])"));
            }
            let k = args[0].parse::<usize>().map_err(|_| {
                Error::malformed(format!("count-ge bound {} is not a number", args[0]))
            })?;
            Ok(Expr::CountGe(k, args.get(1).map(|s| s.to_string())))
        }
        "above" => {
            let sets = args
                .iter()
                .map(|a| {
                    if a.starts_with('{') {
                        parse_set(a)
                    } else {
                        Err(Error::malformed(format!(
                            "(above ...) expects sets like {{a,b}}, got {a}"
                        )))
                    }
                })
                .collect::<Result<_>>()?;
            Ok(Expr::Above(sets))
        }
        op @ ("gt" | "lt" | "eq") => {
            arity(2)?;
            let op = match op {
                "gt" => CmpOp::Gt,
                "lt" => CmpOp::Lt,
                _ => CmpOp::Eq,
            };
            Ok(Expr::Cmp(op, parse_term(args[0])?, parse_term(args[1])?))
        }
        other => Err(Error::malformed(format!("unknown form ({other} ...)"))),
    }
}
