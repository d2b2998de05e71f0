//! Text formats: the line-oriented CSP format, its JSON mirror, and the
//! ground-program printer.
//!
//! ```text
//! # comment
//! var x 1..3
//! var y {1,3,5}
//! neq x y
//! alldiff row1: x y z
//! allowed c (x,y) {(1,3),(3,5)}
//! direct forbidden d (x,y) {(1,1)}
//! ```
//!
//! `neq` and `alldiff` take an optional `id:` prefix; without it they get
//! the id `c<k>` where `k` is the constraint's 1-based position. A leading
//! `direct` keyword marks a constraint for direct lowering.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::asp::{GroundProgram, Rule, RuleKind};
use crate::csp::{Constraint, ConstraintKind, CspInstance, Lowering};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Punct(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let value = s
                .parse()
                .map_err(|_| syntax(line, column, format!("integer `{s}` out of range")))?;
            out.push(Token {
                tok: Tok::Int(value),
                column,
            });
            continue;
        }
        if c == '.' && chars.get(i + 1) == Some(&'.') {
            out.push(Token {
                tok: Tok::Punct(".."),
                column,
            });
            i += 2;
            continue;
        }
        let punct = match c {
            '(' => "(",
            ')' => ")",
            '{' => "{",
            '}' => "}",
            ',' => ",",
            ':' => ":",
            _ => return Err(syntax(line, column, format!("unexpected character `{c}`"))),
        };
        out.push(Token {
            tok: Tok::Punct(punct),
            column,
        });
        i += 1;
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_column: usize,
}

impl Cursor<'_> {
    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |t| t.column)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        syntax(self.line, self.column(), message)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos == self.toks.len()
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn int(&mut self) -> Result<i64> {
        match self.peek() {
            Some(Tok::Int(x)) => {
                let x = *x;
                self.pos += 1;
                Ok(x)
            }
            _ => Err(self.error("expected an integer")),
        }
    }

    fn punct(&mut self, p: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Punct(q)) if *q == p => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected `{p}`"))),
        }
    }

    fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(q)) if *q == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// `( item, item, … )` or `{ item, … }` with a possibly empty list.
    fn list<T>(&mut self, open: &str, close: &str, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        self.punct(open)?;
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(close) {
                return Ok(out);
            }
            self.punct(",")?;
        }
    }
}

/// Parses the line-oriented CSP format.
pub fn parse_csp(text: &str) -> Result<CspInstance> {
    let mut csp = CspInstance::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            toks: &toks,
            pos: 0,
            line,
            end_column: raw.chars().count() + 1,
        };
        let mut keyword = cur.ident("a declaration keyword")?;
        let mut lowering = Lowering::Native;
        if keyword == "direct" {
            lowering = Lowering::Direct;
            keyword = cur.ident("a constraint keyword")?;
        }
        match keyword.as_str() {
            "var" if lowering == Lowering::Native => {
                let name = cur.ident("a variable name")?;
                let domain: BTreeSet<i64> = if matches!(cur.peek(), Some(Tok::Punct("{"))) {
                    cur.list("{", "}", Cursor::int)?.into_iter().collect()
                } else {
                    let lo = cur.int()?;
                    cur.punct("..")?;
                    let hi = cur.int()?;
                    (lo..=hi).collect()
                };
                csp.add_variable(name, domain)?;
            }
            "neq" | "alldiff" => {
                let mut id = None;
                if matches!(cur.toks.get(cur.pos + 1).map(|t| &t.tok), Some(Tok::Punct(":"))) {
                    id = Some(cur.ident("a constraint id")?);
                    cur.punct(":")?;
                }
                let mut scope = Vec::new();
                while !cur.at_end() {
                    scope.push(cur.ident("a variable name")?);
                }
                let id = id.unwrap_or_else(|| format!("c{}", csp.constraints().len() + 1));
                let kind = if keyword == "neq" {
                    if scope.len() != 2 {
                        return Err(syntax(line, 1, "neq takes exactly two variables"));
                    }
                    ConstraintKind::NotEqual
                } else {
                    ConstraintKind::AllDifferent
                };
                push(&mut csp, id, &scope, kind, lowering)?;
            }
            "allowed" | "forbidden" => {
                let id = cur.ident("a constraint id")?;
                let scope = cur.list("(", ")", |c| c.ident("a variable name"))?;
                let tuples: BTreeSet<Vec<i64>> = cur
                    .list("{", "}", |c| c.list("(", ")", Cursor::int))?
                    .into_iter()
                    .collect();
                if let Some(t) = tuples.iter().find(|t| t.len() != scope.len()) {
                    return Err(Error::ArityMismatch {
                        id,
                        expected: scope.len(),
                        found: t.len(),
                    });
                }
                let kind = if keyword == "allowed" {
                    ConstraintKind::Allowed(tuples)
                } else {
                    ConstraintKind::Forbidden(tuples)
                };
                push(&mut csp, id, &scope, kind, lowering)?;
            }
            other => {
                return Err(syntax(line, toks[0].column, format!("unknown declaration `{other}`")));
            }
        }
        if !cur.at_end() {
            return Err(cur.error("unexpected trailing input"));
        }
    }
    Ok(csp)
}

fn push(csp: &mut CspInstance, id: String, scope: &[String], kind: ConstraintKind, lowering: Lowering) -> Result<()> {
    let ids = scope
        .iter()
        .map(|name| csp.var_id(name).ok_or_else(|| Error::UnknownVariable(name.clone())))
        .collect::<Result<Vec<_>>>()?;
    csp.push_constraint(Constraint {
        id,
        scope: ids,
        kind,
        lowering,
    })
}

fn write_tuple(out: &mut String, t: &[i64]) {
    out.push('(');
    for (i, x) in t.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{x}");
    }
    out.push(')');
}

/// Prints `csp` in the line format; [`parse_csp`] reads it back unchanged.
pub fn serialize_csp(csp: &CspInstance) -> String {
    let mut out = String::new();
    for v in csp.variables() {
        let (lo, hi) = (v.min(), v.max());
        if v.domain.len() > 1 && (hi - lo + 1) as usize == v.domain.len() {
            let _ = writeln!(out, "var {} {lo}..{hi}", v.name);
        } else {
            let values: Vec<String> = v.domain.iter().map(i64::to_string).collect();
            let _ = writeln!(out, "var {} {{{}}}", v.name, values.join(","));
        }
    }
    for (k, c) in csp.constraints().iter().enumerate() {
        if c.lowering == Lowering::Direct {
            out.push_str("direct ");
        }
        let names: Vec<&str> = c.scope.iter().map(|&v| csp.variable(v).name.as_str()).collect();
        let auto = c.id == format!("c{}", k + 1);
        match &c.kind {
            ConstraintKind::NotEqual | ConstraintKind::AllDifferent => {
                out.push_str(if c.kind == ConstraintKind::NotEqual {
                    "neq "
                } else {
                    "alldiff "
                });
                if !auto {
                    let _ = write!(out, "{}: ", c.id);
                }
                out.push_str(&names.join(" "));
            }
            ConstraintKind::Allowed(tuples) | ConstraintKind::Forbidden(tuples) => {
                let word = if matches!(c.kind, ConstraintKind::Allowed(_)) {
                    "allowed"
                } else {
                    "forbidden"
                };
                let _ = write!(out, "{word} {} ({}) {{", c.id, names.join(","));
                for (i, t) in tuples.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_tuple(&mut out, t);
                }
                out.push('}');
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct JsonVariable {
    name: String,
    domain: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum JsonKind {
    Neq,
    Alldiff,
    Allowed,
    Forbidden,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct JsonConstraint {
    id: String,
    kind: JsonKind,
    scope: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tuples: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    direct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct JsonCsp {
    variables: Vec<JsonVariable>,
    #[serde(default)]
    constraints: Vec<JsonConstraint>,
}

pub fn csp_to_json(csp: &CspInstance) -> String {
    let doc = JsonCsp {
        variables: csp
            .variables()
            .iter()
            .map(|v| JsonVariable {
                name: v.name.clone(),
                domain: v.domain.iter().copied().collect(),
            })
            .collect(),
        constraints: csp
            .constraints()
            .iter()
            .map(|c| {
                let (kind, tuples) = match &c.kind {
                    ConstraintKind::NotEqual => (JsonKind::Neq, Vec::new()),
                    ConstraintKind::AllDifferent => (JsonKind::Alldiff, Vec::new()),
                    ConstraintKind::Allowed(t) => (JsonKind::Allowed, t.iter().cloned().collect()),
                    ConstraintKind::Forbidden(t) => (JsonKind::Forbidden, t.iter().cloned().collect()),
                };
                JsonConstraint {
                    id: c.id.clone(),
                    kind,
                    scope: c.scope.iter().map(|&v| csp.variable(v).name.clone()).collect(),
                    tuples,
                    direct: c.lowering == Lowering::Direct,
                }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn parse_csp_json(text: &str) -> Result<CspInstance> {
    let doc: JsonCsp = serde_json::from_str(text).map_err(|e| syntax(e.line(), e.column(), e.to_string()))?;
    let mut csp = CspInstance::new();
    for v in doc.variables {
        csp.add_variable(v.name, v.domain)?;
    }
    for c in doc.constraints {
        if let Some(t) = c.tuples.iter().find(|t| t.len() != c.scope.len()) {
            return Err(Error::ArityMismatch {
                id: c.id,
                expected: c.scope.len(),
                found: t.len(),
            });
        }
        let tuples = || c.tuples.iter().cloned().collect();
        let kind = match c.kind {
            JsonKind::Neq => ConstraintKind::NotEqual,
            JsonKind::Alldiff => ConstraintKind::AllDifferent,
            JsonKind::Allowed => ConstraintKind::Allowed(tuples()),
            JsonKind::Forbidden => ConstraintKind::Forbidden(tuples()),
        };
        let lowering = if c.direct {
            Lowering::Direct
        } else {
            Lowering::Native
        };
        push(&mut csp, c.id.clone(), &c.scope, kind, lowering)?;
    }
    Ok(csp)
}

/// Reads either format, choosing JSON when the text starts with `{`.
pub fn read_csp(text: &str) -> Result<CspInstance> {
    if text.trim_start().starts_with('{') {
        parse_csp_json(text)
    } else {
        parse_csp(text)
    }
}

fn write_body(out: &mut String, p: &GroundProgram, rule: &Rule) {
    let lits: Vec<String> = rule
        .pos
        .iter()
        .map(|&a| p.symbol(a).to_string())
        .chain(rule.neg.iter().map(|&a| format!("not {}", p.symbol(a))))
        .collect();
    if rule.kind == RuleKind::Cardinality {
        let _ = write!(out, "{} {{{}}}", rule.bound, lits.join("; "));
    } else {
        out.push_str(&lits.join(", "));
    }
}

/// One rule per line, in program order.
pub fn emit_program(p: &GroundProgram) -> String {
    let mut out = String::new();
    for rule in p.rules() {
        let has_body = rule.kind == RuleKind::Cardinality || !rule.pos.is_empty() || !rule.neg.is_empty();
        match rule.kind {
            RuleKind::Choice => {
                let heads: Vec<String> = rule.head.iter().map(|&h| p.symbol(h).to_string()).collect();
                let _ = write!(out, "{{{}}}", heads.join("; "));
            }
            _ if rule.is_integrity() => {}
            _ => out.push_str(&p.symbol(rule.head[0]).to_string()),
        }
        if has_body {
            if rule.is_integrity() {
                out.push_str(":- ");
            } else {
                out.push_str(" :- ");
            }
            write_body(&mut out, p, rule);
        } else if rule.is_integrity() {
            out.push_str(":-");
        }
        out.push_str(".\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asp::{AtomId, Symbol};
    use crate::domain::DomainState;
    use crate::encode::{encode, reify, EncodeOptions, EncodingKind};

    fn round_trip(text: &str) {
        let csp = parse_csp(text).unwrap();
        assert_eq!(serialize_csp(&csp), text);
        assert_eq!(parse_csp(&serialize_csp(&csp)).unwrap(), csp);
        assert_eq!(parse_csp_json(&csp_to_json(&csp)).unwrap(), csp);
    }

    #[test]
    fn text_round_trips() {
        round_trip("var x 1..3\n");
        round_trip("var x 1..3\nvar y 1..3\nvar z 1..3\nalldiff x y z\n");
        round_trip("var x 1..3\nvar y 1..3\nforbidden c (x,y) {(1,1),(2,2)}\n");
        round_trip("var x {-2,0,7}\nvar y {4}\nneq pair: x y\ndirect allowed d (x,y) {(0,4)}\n");
    }

    #[test]
    fn comments_and_blank_lines() {
        let csp = parse_csp("# header\n\nvar x 1..2  # trailing\nvar y 1..2\nneq x y\n").unwrap();
        assert_eq!(csp.variables().len(), 2);
        assert_eq!(csp.constraints()[0].id, "c1");
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_csp("var x 1..3\nvar y 1 3\n") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 9)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_csp("var x 1..2\nneq x q\n"), Err(Error::UnknownVariable(_))));
        assert!(matches!(
            parse_csp("var x 1..2\nvar y 1..2\nallowed c (x,y) {(1)}\n"),
            Err(Error::ArityMismatch { found: 1, .. })
        ));
        assert!(matches!(parse_csp("var x 1..2 !\n"), Err(Error::Syntax { column: 12, .. })));
    }

    #[test]
    fn json_input_is_detected() {
        let csp = parse_csp("var x 1..2\nvar y 1..2\nneq x y\n").unwrap();
        assert_eq!(read_csp(&csp_to_json(&csp)).unwrap(), csp);
    }

    #[test]
    fn emitted_rules() {
        let csp = parse_csp("var x1 1..2\nvar x2 1..2\nalldiff c: x1 x2\n").unwrap();
        let mut p = GroundProgram::new();
        reify(&mut p, &csp.constraints()[0], true);
        let text = emit_program(&p);
        assert_eq!(
            text,
            "sat(c) :- not violate(c).\nviolate(c) :- not sat(c).\n:- violate(c).\n"
        );

        let enc = encode(&csp, &DomainState::from_csp(&csp), EncodingKind::Support, EncodeOptions::default()).unwrap();
        let text = emit_program(&enc.program);
        assert!(text.contains("violate(c) :- 2 {e(x1,1); e(x2,1)}.\n"));
        assert!(text.contains("{e(x1,1); e(x1,2)}.\n"));
        assert!(text.contains(":- not e(x1,1), not e(x1,2).\n"));

        let csp = parse_csp("var v 1..2\n").unwrap();
        let enc = encode(&csp, &DomainState::from_csp(&csp), EncodingKind::Bound(None), EncodeOptions::default()).unwrap();
        assert!(emit_program(&enc.program).starts_with("{b(v,1); b(v,2)}.\n"));
    }

    #[test]
    fn emitted_facts_and_empty_constraints() {
        let mut p = GroundProgram::new();
        let a = p.atom(Symbol::prop("a"));
        p.push(Rule::fact(a));
        p.push(Rule::integrity(vec![], vec![]));
        p.push(Rule::cardinality(AtomId::BOTTOM, 2, vec![a], vec![a]));
        assert_eq!(emit_program(&p), "a.\n:-.\n:- 2 {a; not a}.\n");
    }
}
