//! Syntactic form of a model file. Names are kept as written; resolution to
//! indices happens in [`crate::model::validate`].

use std::fmt;

use crate::model::Rel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDocument {
    pub name: String,
    /// Network-level integer variables.
    pub ints: Vec<IntDecl>,
    pub automata: Vec<AutomatonDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntDecl {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub init: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AutomatonDecl {
    pub name: String,
    pub clocks: Vec<String>,
    pub ints: Vec<IntDecl>,
    pub outputs: Vec<String>,
    pub inputs: Vec<String>,
    pub locations: Vec<LocationDecl>,
    pub initial: Option<String>,
    pub edges: Vec<EdgeDecl>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LocationDecl {
    pub name: String,
    pub invariant: Vec<AtomDecl>,
    pub rates: Vec<(String, u32)>,
    /// Exponential delay rate as `num/den`.
    pub exprate: Option<(u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomDecl {
    pub ident: String,
    pub rel: Rel,
    pub value: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Output,
    Input,
}

impl Direction {
    pub fn symbol(self) -> char {
        match self {
            Direction::Output => '!',
            Direction::Input => '?',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeDecl {
    pub source: String,
    pub target: String,
    pub action: String,
    pub direction: Direction,
    pub guard: Vec<AtomDecl>,
    pub branches: Vec<BranchDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchDecl {
    pub weight: u32,
    pub resets: Vec<String>,
    pub updates: Vec<(String, ExprDecl)>,
    /// `None` means the edge's default target.
    pub target: Option<String>,
}

impl BranchDecl {
    pub fn plain() -> Self {
        BranchDecl { weight: 1, resets: Vec::new(), updates: Vec::new(), target: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprDecl {
    Const(i64),
    Var(String),
    Neg(Box<ExprDecl>),
    Add(Box<ExprDecl>, Box<ExprDecl>),
    Sub(Box<ExprDecl>, Box<ExprDecl>),
    Mul(Box<ExprDecl>, Box<ExprDecl>),
}

impl ExprDecl {
    fn precedence(&self) -> u8 {
        match self {
            ExprDecl::Add(..) | ExprDecl::Sub(..) => 1,
            ExprDecl::Mul(..) => 2,
            ExprDecl::Neg(_) => 3,
            ExprDecl::Const(_) | ExprDecl::Var(_) => 4,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, parent: u8, right: bool) -> fmt::Result {
        let p = self.precedence();
        if p < parent || (right && p == parent) {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for ExprDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprDecl::Const(c) if *c < 0 => write!(f, "({c})"),
            ExprDecl::Const(c) => write!(f, "{c}"),
            ExprDecl::Var(v) => f.write_str(v),
            ExprDecl::Neg(e) => {
                f.write_str("-")?;
                e.fmt_child(f, 3, false)
            }
            ExprDecl::Add(a, b) | ExprDecl::Sub(a, b) | ExprDecl::Mul(a, b) => {
                let (op, p) = match self {
                    ExprDecl::Add(..) => ('+', 1),
                    ExprDecl::Sub(..) => ('-', 1),
                    _ => ('*', 2),
                };
                a.fmt_child(f, p, false)?;
                write!(f, " {op} ")?;
                b.fmt_child(f, p, true)
            }
        }
    }
}

impl fmt::Display for AtomDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.ident, self.rel.symbol(), self.value)
    }
}

fn write_conj(f: &mut fmt::Formatter<'_>, atoms: &[AtomDecl]) -> fmt::Result {
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            f.write_str(" && ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

fn write_int(f: &mut fmt::Formatter<'_>, d: &IntDecl) -> fmt::Result {
    write!(f, "int {} [{},{}] = {}", d.name, d.lo, d.hi, d.init)
}

fn write_branch_items(f: &mut fmt::Formatter<'_>, b: &BranchDecl, braced: bool) -> fmt::Result {
    if braced {
        write!(f, " weight {}", b.weight)?;
    }
    if !b.resets.is_empty() {
        f.write_str(" reset")?;
        for r in &b.resets {
            write!(f, " {r}")?;
        }
    }
    for (v, e) in &b.updates {
        write!(f, " set {v} = {e}")?;
    }
    if let Some(t) = &b.target {
        write!(f, " goto {t}")?;
    }
    Ok(())
}

/// Canonical text form; `parse_model` reads it back to an equal document.
impl fmt::Display for ModelDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "network {}", self.name)?;
        for d in &self.ints {
            write_int(f, d)?;
            writeln!(f)?;
        }
        for a in &self.automata {
            writeln!(f)?;
            writeln!(f, "automaton {}", a.name)?;
            if !a.clocks.is_empty() {
                writeln!(f, "  clock {}", a.clocks.join(" "))?;
            }
            for d in &a.ints {
                f.write_str("  ")?;
                write_int(f, d)?;
                writeln!(f)?;
            }
            if !a.outputs.is_empty() {
                writeln!(f, "  action out {}", a.outputs.join(" "))?;
            }
            if !a.inputs.is_empty() {
                writeln!(f, "  action in {}", a.inputs.join(" "))?;
            }
            for l in &a.locations {
                write!(f, "  location {}", l.name)?;
                if !l.invariant.is_empty() {
                    f.write_str(" inv ")?;
                    write_conj(f, &l.invariant)?;
                }
                if !l.rates.is_empty() {
                    f.write_str(" rate")?;
                    for (c, r) in &l.rates {
                        write!(f, " {c}={r}")?;
                    }
                }
                if let Some((n, d)) = l.exprate {
                    write!(f, " exprate {n}/{d}")?;
                }
                writeln!(f)?;
            }
            if let Some(i) = &a.initial {
                writeln!(f, "  initial {i}")?;
            }
            for e in &a.edges {
                write!(f, "  edge {} -> {} on {}{}", e.source, e.target, e.action, e.direction.symbol())?;
                if !e.guard.is_empty() {
                    f.write_str(" guard ")?;
                    write_conj(f, &e.guard)?;
                }
                let inline = e.branches.len() == 1 && e.branches[0].weight == 1;
                if inline {
                    write_branch_items(f, &e.branches[0], false)?;
                } else {
                    for b in &e.branches {
                        f.write_str(" {")?;
                        write_branch_items(f, b, true)?;
                        f.write_str(" }")?;
                    }
                }
                writeln!(f)?;
            }
            writeln!(f, "end")?;
        }
        Ok(())
    }
}
