//! Parser for `.nptam` model files.

use std::collections::{HashMap, HashSet};

use super::doc::*;
use super::lexer::{lex, Cursor, Tok};
use crate::error::{ParseError, Pos};
use crate::model::{Rel, TIME_CLOCK};

const KEYWORDS: &[&str] = &[
    "network",
    "automaton",
    "clock",
    "int",
    "action",
    "out",
    "in",
    "location",
    "inv",
    "rate",
    "exprate",
    "initial",
    "edge",
    "on",
    "guard",
    "weight",
    "reset",
    "set",
    "goto",
    "end",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RefKind {
    Location,
    Clock,
    Int,
    ClockOrInt,
    Output,
    Input,
}

impl RefKind {
    fn label(self) -> &'static str {
        match self {
            RefKind::Location => "location",
            RefKind::Clock => "clock",
            RefKind::Int => "integer variable",
            RefKind::ClockOrInt => "clock or integer variable",
            RefKind::Output => "output action",
            RefKind::Input => "input action",
        }
    }
}

struct Pending {
    automaton: usize,
    kind: RefKind,
    name: String,
    pos: Pos,
}

struct Parser {
    cur: Cursor,
    refs: Vec<Pending>,
}

/// Parses a model document. References are resolved against the document
/// (locations, clocks and actions per automaton; integers network-wide); the
/// semantic checks of [`crate::model::validate`] are not performed here.
pub fn parse_model(text: &str) -> Result<ModelDocument, ParseError> {
    let mut p = Parser { cur: Cursor::new(lex(text)?), refs: Vec::new() };
    let doc = p.document()?;
    resolve(&doc, &p.refs)?;
    Ok(doc)
}

impl Parser {
    fn name(&mut self, wanted: &str) -> Result<(String, Pos), ParseError> {
        let (s, pos) = self.cur.ident(wanted)?;
        if is_keyword(&s) {
            return Err(ParseError::syntax(pos, format!("keyword `{s}` used as {wanted}")));
        }
        Ok((s, pos))
    }

    fn reference(&mut self, automaton: usize, kind: RefKind) -> Result<String, ParseError> {
        let (name, pos) = self.name(kind.label())?;
        self.refs.push(Pending { automaton, kind, name: name.clone(), pos });
        Ok(name)
    }

    fn document(&mut self) -> Result<ModelDocument, ParseError> {
        self.cur.skip_blank_lines();
        self.cur.expect_keyword("network")?;
        let (name, _) = self.name("network name")?;
        self.cur.end_of_line()?;
        let mut doc = ModelDocument { name, ints: Vec::new(), automata: Vec::new() };
        let mut globals: HashSet<String> = HashSet::new();
        let mut automata_names: HashSet<String> = HashSet::new();
        loop {
            self.cur.skip_blank_lines();
            if self.cur.at(&Tok::Eof) {
                break;
            }
            let pos = self.cur.pos();
            if self.cur.eat_keyword("int") {
                let d = self.int_decl(&mut globals)?;
                doc.ints.push(d);
                self.cur.end_of_line()?;
            } else if self.cur.eat_keyword("automaton") {
                let idx = doc.automata.len();
                let a = self.automaton(idx, &mut globals)?;
                if !automata_names.insert(a.name.clone()) {
                    return Err(ParseError::DuplicateIdentifier { pos, name: a.name });
                }
                doc.automata.push(a);
            } else {
                return Err(self.cur.unexpected("`int` or `automaton`"));
            }
        }
        Ok(doc)
    }

    fn int_decl(&mut self, globals: &mut HashSet<String>) -> Result<IntDecl, ParseError> {
        let (name, pos) = self.name("integer name")?;
        if name == TIME_CLOCK || !globals.insert(name.clone()) {
            return Err(ParseError::DuplicateIdentifier { pos, name });
        }
        self.cur.expect(&Tok::LBracket, "`[`")?;
        let lo = self.cur.int("lower bound")?;
        self.cur.expect(&Tok::Comma, "`,`")?;
        let hi = self.cur.int("upper bound")?;
        self.cur.expect(&Tok::RBracket, "`]`")?;
        self.cur.expect(&Tok::Assign, "`=`")?;
        let init = self.cur.int("initial value")?;
        Ok(IntDecl { name, lo, hi, init })
    }

    fn automaton(&mut self, idx: usize, globals: &mut HashSet<String>) -> Result<AutomatonDecl, ParseError> {
        let (name, _) = self.name("automaton name")?;
        self.cur.end_of_line()?;
        let mut a = AutomatonDecl { name, ..Default::default() };
        let mut local: HashSet<String> = HashSet::new();
        let mut actions: HashSet<String> = HashSet::new();
        loop {
            self.cur.skip_blank_lines();
            let pos = self.cur.pos();
            let (kw, _) = match self.cur.peek().tok.clone() {
                Tok::Ident(s) => (s, pos),
                Tok::Eof => return Err(self.cur.unexpected("`end`")),
                _ => return Err(self.cur.unexpected("automaton item")),
            };
            self.cur.next();
            match kw.as_str() {
                "end" => {
                    self.cur.end_of_line()?;
                    return Ok(a);
                }
                "clock" => loop {
                    let (c, pos) = self.name("clock name")?;
                    if c == TIME_CLOCK || !local.insert(c.clone()) || globals.contains(&c) {
                        return Err(ParseError::DuplicateIdentifier { pos, name: c });
                    }
                    a.clocks.push(c);
                    if !matches!(self.cur.peek().tok, Tok::Ident(_)) {
                        break;
                    }
                },
                "int" => {
                    let d = self.int_decl(globals)?;
                    a.ints.push(d);
                }
                "action" => {
                    let out = if self.cur.eat_keyword("out") {
                        true
                    } else if self.cur.eat_keyword("in") {
                        false
                    } else {
                        return Err(self.cur.unexpected("`out` or `in`"));
                    };
                    loop {
                        let (s, pos) = self.name("action name")?;
                        if !actions.insert(s.clone()) {
                            return Err(ParseError::DuplicateIdentifier { pos, name: s });
                        }
                        if out {
                            a.outputs.push(s);
                        } else {
                            a.inputs.push(s);
                        }
                        if !matches!(self.cur.peek().tok, Tok::Ident(_)) {
                            break;
                        }
                    }
                }
                "location" => {
                    let l = self.location(idx)?;
                    if a.locations.iter().any(|o| o.name == l.name) {
                        return Err(ParseError::DuplicateIdentifier { pos, name: l.name });
                    }
                    a.locations.push(l);
                }
                "initial" => {
                    if a.initial.is_some() {
                        return Err(ParseError::syntax(pos, "initial location given twice"));
                    }
                    a.initial = Some(self.reference(idx, RefKind::Location)?);
                }
                "edge" => {
                    let e = self.edge(idx)?;
                    a.edges.push(e);
                }
                other => {
                    return Err(ParseError::syntax(pos, format!("expected automaton item, found identifier `{other}`")))
                }
            }
            self.cur.end_of_line()?;
        }
    }

    fn location(&mut self, idx: usize) -> Result<LocationDecl, ParseError> {
        let (name, _) = self.name("location name")?;
        let mut l = LocationDecl { name, ..Default::default() };
        loop {
            if self.cur.eat_keyword("inv") {
                l.invariant.extend(self.conjunction(idx, RefKind::Clock)?);
            } else if self.cur.eat_keyword("rate") {
                loop {
                    let c = self.reference(idx, RefKind::Clock)?;
                    self.cur.expect(&Tok::Assign, "`=`")?;
                    let pos = self.cur.pos();
                    let r = self.cur.nat("rate")?;
                    let r = u32::try_from(r).map_err(|_| ParseError::syntax(pos, "rate too large"))?;
                    l.rates.push((c, r));
                    if !matches!(&self.cur.peek().tok, Tok::Ident(s) if !is_keyword(s)) {
                        break;
                    }
                }
            } else if self.cur.eat_keyword("exprate") {
                let n = self.cur.nat("rate numerator")?;
                let d = if self.cur.eat(&Tok::Slash) { self.cur.nat("rate denominator")? } else { 1 };
                l.exprate = Some((n, d));
            } else {
                return Ok(l);
            }
        }
    }

    fn conjunction(&mut self, idx: usize, kind: RefKind) -> Result<Vec<AtomDecl>, ParseError> {
        let mut atoms = vec![self.atom(idx, kind)?];
        while self.cur.eat(&Tok::AndAnd) {
            atoms.push(self.atom(idx, kind)?);
        }
        Ok(atoms)
    }

    fn atom(&mut self, idx: usize, kind: RefKind) -> Result<AtomDecl, ParseError> {
        let ident = self.reference(idx, kind)?;
        let rel = self.rel()?;
        let value = self.cur.int("integer constant")?;
        Ok(AtomDecl { ident, rel, value })
    }

    fn rel(&mut self) -> Result<Rel, ParseError> {
        let rel = match self.cur.peek().tok {
            Tok::Lt => Rel::Lt,
            Tok::Le => Rel::Le,
            Tok::Gt => Rel::Gt,
            Tok::Ge => Rel::Ge,
            Tok::EqEq => Rel::Eq,
            Tok::NotEq => Rel::Ne,
            _ => return Err(self.cur.unexpected("comparison operator")),
        };
        self.cur.next();
        Ok(rel)
    }

    fn edge(&mut self, idx: usize) -> Result<EdgeDecl, ParseError> {
        let source = self.reference(idx, RefKind::Location)?;
        self.cur.expect(&Tok::Arrow, "`->`")?;
        let target = self.reference(idx, RefKind::Location)?;
        self.cur.expect_keyword("on")?;
        let (action, apos) = self.name("action")?;
        let direction = if self.cur.eat(&Tok::Bang) {
            Direction::Output
        } else if self.cur.eat(&Tok::Question) {
            Direction::Input
        } else {
            return Err(self.cur.unexpected("`!` or `?`"));
        };
        self.refs.push(Pending {
            automaton: idx,
            kind: match direction {
                Direction::Output => RefKind::Output,
                Direction::Input => RefKind::Input,
            },
            name: action.clone(),
            pos: apos,
        });
        let guard =
            if self.cur.eat_keyword("guard") { self.conjunction(idx, RefKind::ClockOrInt)? } else { Vec::new() };
        let mut branches = Vec::new();
        if self.cur.at(&Tok::LBrace) {
            while self.cur.at(&Tok::LBrace) {
                self.cur.skip_newlines += 1;
                self.cur.next();
                let b = self.branch_items(idx);
                let close = b.and_then(|b| {
                    self.cur.expect(&Tok::RBrace, "`}`")?;
                    Ok(b)
                });
                self.cur.skip_newlines -= 1;
                branches.push(close?);
            }
        } else {
            branches.push(self.branch_items(idx)?);
        }
        Ok(EdgeDecl { source, target, action, direction, guard, branches })
    }

    fn branch_items(&mut self, idx: usize) -> Result<BranchDecl, ParseError> {
        let mut b = BranchDecl::plain();
        loop {
            if self.cur.eat_keyword("weight") {
                let pos = self.cur.pos();
                let w = self.cur.nat("weight")?;
                b.weight = u32::try_from(w).map_err(|_| ParseError::syntax(pos, "weight too large"))?;
            } else if self.cur.eat_keyword("reset") {
                loop {
                    b.resets.push(self.reference(idx, RefKind::Clock)?);
                    if !matches!(&self.cur.peek().tok, Tok::Ident(s) if !is_keyword(s)) {
                        break;
                    }
                }
            } else if self.cur.eat_keyword("set") {
                let v = self.reference(idx, RefKind::Int)?;
                self.cur.expect(&Tok::Assign, "`=`")?;
                let e = self.expr(idx)?;
                b.updates.push((v, e));
            } else if self.cur.eat_keyword("goto") {
                b.target = Some(self.reference(idx, RefKind::Location)?);
            } else {
                return Ok(b);
            }
        }
    }

    fn expr(&mut self, idx: usize) -> Result<ExprDecl, ParseError> {
        let mut lhs = self.term(idx)?;
        loop {
            if self.cur.eat(&Tok::Plus) {
                lhs = ExprDecl::Add(Box::new(lhs), Box::new(self.term(idx)?));
            } else if self.cur.eat(&Tok::Minus) {
                lhs = ExprDecl::Sub(Box::new(lhs), Box::new(self.term(idx)?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self, idx: usize) -> Result<ExprDecl, ParseError> {
        let mut lhs = self.factor(idx)?;
        while self.cur.eat(&Tok::Star) {
            lhs = ExprDecl::Mul(Box::new(lhs), Box::new(self.factor(idx)?));
        }
        Ok(lhs)
    }

    fn factor(&mut self, idx: usize) -> Result<ExprDecl, ParseError> {
        match self.cur.peek().tok.clone() {
            Tok::Minus => {
                self.cur.next();
                Ok(ExprDecl::Neg(Box::new(self.factor(idx)?)))
            }
            Tok::LParen => {
                self.cur.next();
                let e = self.expr(idx)?;
                self.cur.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Number(_) => {
                let pos = self.cur.pos();
                let v = self.cur.nat("integer")?;
                let v = i64::try_from(v).map_err(|_| ParseError::syntax(pos, "integer too large"))?;
                Ok(ExprDecl::Const(v))
            }
            Tok::Ident(_) => Ok(ExprDecl::Var(self.reference(idx, RefKind::Int)?)),
            _ => Err(self.cur.unexpected("expression")),
        }
    }
}

fn resolve(doc: &ModelDocument, refs: &[Pending]) -> Result<(), ParseError> {
    let mut ints: HashSet<&str> = doc.ints.iter().map(|d| d.name.as_str()).collect();
    for a in &doc.automata {
        ints.extend(a.ints.iter().map(|d| d.name.as_str()));
    }
    let per_automaton: Vec<_> = doc
        .automata
        .iter()
        .map(|a| {
            let locs: HashSet<&str> = a.locations.iter().map(|l| l.name.as_str()).collect();
            let clocks: HashSet<&str> = a.clocks.iter().map(String::as_str).collect();
            let outs: HashSet<&str> = a.outputs.iter().map(String::as_str).collect();
            let ins: HashSet<&str> = a.inputs.iter().map(String::as_str).collect();
            (locs, clocks, outs, ins)
        })
        .collect();
    // Every action output somewhere may be received without an explicit declaration.
    let mut all_outputs: HashMap<&str, usize> = HashMap::new();
    for (i, a) in doc.automata.iter().enumerate() {
        for o in &a.outputs {
            all_outputs.entry(o.as_str()).or_insert(i);
        }
    }
    for r in refs {
        let (locs, clocks, outs, ins) = &per_automaton[r.automaton];
        let name = r.name.as_str();
        let is_clock = name == TIME_CLOCK || clocks.contains(name);
        let ok = match r.kind {
            RefKind::Location => locs.contains(name),
            RefKind::Clock => is_clock,
            RefKind::Int => ints.contains(name),
            RefKind::ClockOrInt => is_clock || ints.contains(name),
            RefKind::Output => outs.contains(name),
            RefKind::Input => ins.contains(name) || (all_outputs.contains_key(name) && !outs.contains(name)),
        };
        if !ok {
            return Err(ParseError::UnresolvedReference { pos: r.pos, kind: r.kind.label(), name: r.name.clone() });
        }
    }
    Ok(())
}
