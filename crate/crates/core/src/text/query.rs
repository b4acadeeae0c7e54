//! Property language: `Pr[<clock><=<c>](<> | [] <phi>) [<rel> <p>]`.

use std::fmt;

use super::lexer::{lex, Cursor, Tok};
use crate::error::{ParseError, Pos};
use crate::model::{ClockId, IntId, LocId, NetworkModel, Rel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    Diamond,
    Box,
}

/// Boolean state formula over location membership, clock and integer atoms.
#[derive(Clone, Debug, PartialEq)]
pub enum StateProperty {
    True,
    False,
    At { comp: usize, loc: LocId },
    Clock { clock: ClockId, rel: Rel, bound: i64 },
    Int { var: IntId, rel: Rel, value: i64 },
    Not(Box<StateProperty>),
    And(Box<StateProperty>, Box<StateProperty>),
    Or(Box<StateProperty>, Box<StateProperty>),
}

impl StateProperty {
    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> StateProperty {
        match self {
            StateProperty::Not(p) => *p,
            p => StateProperty::Not(Box::new(p)),
        }
    }

    pub fn holds(&self, state: &crate::model::NetworkState) -> bool {
        match self {
            StateProperty::True => true,
            StateProperty::False => false,
            StateProperty::At { comp, loc } => state.locations[*comp] == *loc,
            StateProperty::Clock { clock, rel, bound } => rel.holds(state.clocks.get(*clock), *bound as f64),
            StateProperty::Int { var, rel, value } => rel.holds(state.ints[var.0], *value),
            StateProperty::Not(p) => !p.holds(state),
            StateProperty::And(a, b) => a.holds(state) && b.holds(state),
            StateProperty::Or(a, b) => a.holds(state) || b.holds(state),
        }
    }

    /// Renders the formula with names from `model`.
    pub fn display<'a>(&'a self, model: &'a NetworkModel) -> impl fmt::Display + 'a {
        PropDisplay { p: self, m: model, parent: 0 }
    }
}

struct PropDisplay<'a> {
    p: &'a StateProperty,
    m: &'a NetworkModel,
    parent: u8,
}

impl fmt::Display for PropDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |p, parent| PropDisplay { p, m: self.m, parent };
        let prec = match self.p {
            StateProperty::Or(..) => 1,
            StateProperty::And(..) => 2,
            _ => 3,
        };
        let paren = prec < self.parent;
        if paren {
            f.write_str("(")?;
        }
        match self.p {
            StateProperty::True => f.write_str("true")?,
            StateProperty::False => f.write_str("false")?,
            StateProperty::At { comp, loc } => {
                let c = &self.m.components[*comp];
                write!(f, "{}.{}", c.name, c.locations[loc.0].name)?
            }
            StateProperty::Clock { clock, rel, bound } => {
                write!(f, "{}{}{}", self.m.clocks[clock.0].name, rel.symbol(), bound)?
            }
            StateProperty::Int { var, rel, value } => {
                write!(f, "{}{}{}", self.m.ints[var.0].name, rel.symbol(), value)?
            }
            StateProperty::Not(p) => write!(f, "!{}", child(p, 3))?,
            StateProperty::And(a, b) => write!(f, "{} && {}", child(a, 2), child(b, 3))?,
            StateProperty::Or(a, b) => write!(f, "{} || {}", child(a, 1), child(b, 2))?,
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PwctlQuery {
    pub operator: Operator,
    pub observer: ClockId,
    pub bound: f64,
    pub phi: StateProperty,
    /// `(relation, p)` for hypothesis testing; `None` means estimation.
    pub comparison: Option<(Rel, f64)>,
}

impl PwctlQuery {
    pub fn display<'a>(&'a self, model: &'a NetworkModel) -> impl fmt::Display + 'a {
        QueryDisplay { q: self, m: model }
    }
}

struct QueryDisplay<'a> {
    q: &'a PwctlQuery,
    m: &'a NetworkModel,
}

impl fmt::Display for QueryDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.q.operator {
            Operator::Diamond => "<>",
            Operator::Box => "[]",
        };
        write!(
            f,
            "Pr[{}<={}]({} {})",
            self.m.clocks[self.q.observer.0].name,
            self.q.bound,
            op,
            self.q.phi.display(self.m)
        )?;
        if let Some((rel, p)) = self.q.comparison {
            write!(f, " {} {}", rel.symbol(), p)?;
        }
        Ok(())
    }
}

/// Unresolved formula as read from the text.
enum Raw {
    Const(bool),
    At(String, String, Pos),
    Cmp(String, Rel, i64, Pos),
    Not(Box<Raw>),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
}

/// Parses a query and resolves its names against `model`.
pub fn parse_query(text: &str, model: &NetworkModel) -> Result<PwctlQuery, ParseError> {
    let mut cur = Cursor::new(lex(text)?);
    cur.skip_blank_lines();
    cur.expect_keyword("Pr")?;
    cur.expect(&Tok::LBracket, "`[`")?;
    let (obs, _) = cur.ident("observer clock")?;
    cur.expect(&Tok::Le, "`<=`")?;
    let bpos = cur.pos();
    let bound = cur.real("cost bound")?;
    if !(bound.is_finite() && bound > 0.0) {
        return Err(ParseError::syntax(bpos, "cost bound must be positive"));
    }
    cur.expect(&Tok::RBracket, "`]`")?;
    cur.expect(&Tok::LParen, "`(`")?;
    cur.skip_newlines += 1;
    let operator = if cur.eat(&Tok::Diamond) {
        Operator::Diamond
    } else if cur.eat(&Tok::LBracket) {
        cur.expect(&Tok::RBracket, "`]`")?;
        Operator::Box
    } else {
        return Err(cur.unexpected("`<>` or `[]`"));
    };
    let raw = disjunction(&mut cur)?;
    cur.expect(&Tok::RParen, "`)`")?;
    cur.skip_newlines -= 1;
    let comparison = match rel(&mut cur) {
        Some(r) => {
            let p = cur.real("probability")?;
            if !(0.0..=1.0).contains(&p) {
                return Err(ParseError::ProbabilityOutOfRange(p));
            }
            Some((r, p))
        }
        None => None,
    };
    cur.skip_blank_lines();
    if !cur.at(&Tok::Eof) {
        return Err(cur.unexpected("end of query"));
    }
    let observer = model.clock_index(&obs).ok_or(ParseError::UnknownObserver(obs))?;
    Ok(PwctlQuery { operator, observer, bound, phi: resolve(raw, model)?, comparison })
}

fn rel(cur: &mut Cursor) -> Option<Rel> {
    let r = match cur.peek().tok {
        Tok::Lt => Rel::Lt,
        Tok::Le => Rel::Le,
        Tok::Gt => Rel::Gt,
        Tok::Ge => Rel::Ge,
        Tok::EqEq | Tok::Assign => Rel::Eq,
        Tok::NotEq => Rel::Ne,
        _ => return None,
    };
    cur.next();
    Some(r)
}

fn disjunction(cur: &mut Cursor) -> Result<Raw, ParseError> {
    let mut lhs = conjunction(cur)?;
    while cur.eat(&Tok::OrOr) {
        lhs = Raw::Or(Box::new(lhs), Box::new(conjunction(cur)?));
    }
    Ok(lhs)
}

fn conjunction(cur: &mut Cursor) -> Result<Raw, ParseError> {
    let mut lhs = unary(cur)?;
    while cur.eat(&Tok::AndAnd) {
        lhs = Raw::And(Box::new(lhs), Box::new(unary(cur)?));
    }
    Ok(lhs)
}

fn unary(cur: &mut Cursor) -> Result<Raw, ParseError> {
    if cur.eat(&Tok::Bang) {
        return Ok(Raw::Not(Box::new(unary(cur)?)));
    }
    if cur.eat(&Tok::LParen) {
        let p = disjunction(cur)?;
        cur.expect(&Tok::RParen, "`)`")?;
        return Ok(p);
    }
    let (name, pos) = cur.ident("state property")?;
    match name.as_str() {
        "true" => return Ok(Raw::Const(true)),
        "false" => return Ok(Raw::Const(false)),
        _ => {}
    }
    if cur.eat(&Tok::Dot) {
        let (loc, _) = cur.ident("location name")?;
        return Ok(Raw::At(name, loc, pos));
    }
    let Some(r) = rel(cur) else {
        return Err(cur.unexpected("`.` or comparison operator"));
    };
    let value = cur.int("integer constant")?;
    Ok(Raw::Cmp(name, r, value, pos))
}

fn resolve(raw: Raw, m: &NetworkModel) -> Result<StateProperty, ParseError> {
    let b = |r: Box<Raw>| resolve(*r, m).map(Box::new);
    Ok(match raw {
        Raw::Const(true) => StateProperty::True,
        Raw::Const(false) => StateProperty::False,
        Raw::At(c, l, pos) => {
            let comp = m.component_index(&c).ok_or_else(|| ParseError::UnresolvedReference {
                pos,
                kind: "automaton",
                name: c.clone(),
            })?;
            let loc = m.components[comp].location_index(&l).ok_or(ParseError::UnresolvedReference {
                pos,
                kind: "location",
                name: format!("{c}.{l}"),
            })?;
            StateProperty::At { comp, loc }
        }
        Raw::Cmp(name, rel, value, pos) => {
            if let Some(clock) = m.clock_index(&name) {
                if matches!(rel, Rel::Eq | Rel::Ne) {
                    return Err(ParseError::ClockEquality(name));
                }
                StateProperty::Clock { clock, rel, bound: value }
            } else if let Some(var) = m.int_index(&name) {
                StateProperty::Int { var, rel, value }
            } else {
                return Err(ParseError::UnresolvedReference { pos, kind: "clock or integer variable", name });
            }
        }
        Raw::Not(p) => StateProperty::Not(b(p)?),
        Raw::And(x, y) => StateProperty::And(b(x)?, b(y)?),
        Raw::Or(x, y) => StateProperty::Or(b(x)?, b(y)?),
    })
}
