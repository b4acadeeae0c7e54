//! Networks of priced timed automata: clocks with per-location integer rates,
//! lower-bound edge guards, upper-bound invariants, bounded integer variables
//! and weighted branching edges.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result, ValidationError, ValidationErrors};
use crate::text::doc::{
    AtomDecl, AutomatonDecl, BranchDecl, Direction, EdgeDecl, ExprDecl, IntDecl, LocationDecl, ModelDocument,
};

/// Name of the implicit global clock (rate 1 everywhere, never reset).
pub const TIME_CLOCK: &str = "time";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ClockId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IntId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ActionId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LocId(pub usize);

/// The reserved `time` clock always has index 0.
pub const TIME: ClockId = ClockId(0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
            Rel::Eq => "==",
            Rel::Ne => "!=",
        }
    }

    pub fn holds<T: PartialOrd>(self, lhs: T, rhs: T) -> bool {
        match self {
            Rel::Lt => lhs < rhs,
            Rel::Le => lhs <= rhs,
            Rel::Gt => lhs > rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Eq => lhs == rhs,
            Rel::Ne => lhs != rhs,
        }
    }

    pub fn is_lower(self) -> bool {
        matches!(self, Rel::Gt | Rel::Ge)
    }

    pub fn is_upper(self) -> bool {
        matches!(self, Rel::Lt | Rel::Le)
    }
}

/// Clock values indexed by [`ClockId`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClockValuation(pub Vec<f64>);

impl ClockValuation {
    pub fn zero(n: usize) -> Self {
        ClockValuation(vec![0.0; n])
    }

    pub fn get(&self, c: ClockId) -> f64 {
        self.0[c.0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-clock growth rates, indexed like [`ClockValuation`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RateVector(pub Vec<u32>);

impl RateVector {
    pub fn get(&self, c: ClockId) -> u32 {
        self.0[c.0]
    }
}

/// `ν + r·d`.
pub fn advance(v: &ClockValuation, r: &RateVector, d: f64) -> ClockValuation {
    debug_assert!(d >= 0.0);
    ClockValuation(v.0.iter().zip(&r.0).map(|(x, &rate)| x + f64::from(rate) * d).collect())
}

/// `ν[Y]`: clocks in `resets` go to zero.
pub fn reset(v: &ClockValuation, resets: &[ClockId]) -> Result<ClockValuation> {
    let mut out = v.clone();
    for c in resets {
        *out.0.get_mut(c.0).ok_or(Error::UnknownClock(c.0))? = 0.0;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atom {
    Clock { clock: ClockId, rel: Rel, bound: i64 },
    Int { var: IntId, rel: Rel, value: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuardKind {
    LowerBound,
    UpperBound,
    Integer,
    Mixed,
}

/// Conjunction of atoms; the empty guard is `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Guard {
    pub atoms: Vec<Atom>,
}

impl Guard {
    pub fn kind(&self) -> GuardKind {
        let mut lower = false;
        let mut upper = false;
        for a in &self.atoms {
            if let Atom::Clock { rel, .. } = a {
                lower |= rel.is_lower();
                upper |= !rel.is_lower();
            }
        }
        match (lower, upper) {
            (false, false) => GuardKind::Integer,
            (true, false) => GuardKind::LowerBound,
            (false, true) if self.clock_atoms().all(|(_, r, _)| r.is_upper()) => GuardKind::UpperBound,
            _ => GuardKind::Mixed,
        }
    }

    pub fn clock_atoms(&self) -> impl Iterator<Item = (ClockId, Rel, i64)> + '_ {
        self.atoms.iter().filter_map(|a| match *a {
            Atom::Clock { clock, rel, bound } => Some((clock, rel, bound)),
            Atom::Int { .. } => None,
        })
    }

    pub fn int_atoms_hold(&self, ints: &[i64]) -> bool {
        self.atoms.iter().all(|a| match *a {
            Atom::Int { var, rel, value } => rel.holds(ints[var.0], value),
            Atom::Clock { .. } => true,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(i64),
    Var(IntId),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, ints: &[i64]) -> i64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => ints[v.0],
            Expr::Neg(e) => e.eval(ints).wrapping_neg(),
            Expr::Add(a, b) => a.eval(ints).wrapping_add(b.eval(ints)),
            Expr::Sub(a, b) => a.eval(ints).wrapping_sub(b.eval(ints)),
            Expr::Mul(a, b) => a.eval(ints).wrapping_mul(b.eval(ints)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub weight: u32,
    pub resets: Vec<ClockId>,
    pub updates: Vec<(IntId, Expr)>,
    pub target: LocId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: LocId,
    pub action: ActionId,
    pub direction: Direction,
    pub guard: Guard,
    pub branches: Vec<Branch>,
    /// Input self-loop added by input completion.
    pub synthesized: bool,
}

/// Positive rational rate of the exponential delay distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpRate {
    pub num: u64,
    pub den: u64,
}

impl ExpRate {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: Guard,
    /// Rates of the owning component's clocks, aligned with `Component::clocks`.
    pub rates: Vec<u32>,
    pub exp_rate: Option<ExpRate>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub locations: Vec<Location>,
    pub initial: LocId,
    pub clocks: Vec<ClockId>,
    pub outputs: BTreeSet<ActionId>,
    pub inputs: BTreeSet<ActionId>,
    pub edges: Vec<Edge>,
    /// Edge indices by source location.
    pub edges_from: Vec<Vec<usize>>,
}

impl Component {
    fn index_edges(&mut self) {
        let mut from = vec![Vec::new(); self.locations.len()];
        for (i, e) in self.edges.iter().enumerate() {
            from[e.source.0].push(i);
        }
        self.edges_from = from;
    }

    pub fn location_index(&self, name: &str) -> Option<LocId> {
        self.locations.iter().position(|l| l.name == name).map(LocId)
    }

    pub fn out_edges(&self, loc: LocId) -> impl Iterator<Item = (usize, &Edge)> + '_ {
        self.edges_from[loc.0].iter().map(|&i| (i, &self.edges[i])).filter(|(_, e)| e.direction == Direction::Output)
    }

    pub fn in_edges(&self, loc: LocId, action: ActionId) -> impl Iterator<Item = (usize, &Edge)> + '_ {
        self.edges_from[loc.0]
            .iter()
            .map(|&i| (i, &self.edges[i]))
            .filter(move |(_, e)| e.direction == Direction::Input && e.action == action)
    }

    /// Rate of one of this component's clocks in `loc`.
    pub fn rate_of(&self, loc: LocId, clock: ClockId) -> Option<u32> {
        let k = self.clocks.iter().position(|&c| c == clock)?;
        Some(self.locations[loc.0].rates[k])
    }

    /// True when the invariant of `loc` caps delays (some bounded clock grows).
    pub fn invariant_bounds_delay(&self, loc: LocId) -> bool {
        self.locations[loc.0]
            .invariant
            .clock_atoms()
            .any(|(c, _, _)| c == TIME || self.rate_of(loc, c).unwrap_or(0) > 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockDecl {
    pub name: String,
    /// `None` for the global `time` clock.
    pub owner: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntVar {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub init: i64,
    /// `None` for network-level declarations.
    pub owner: Option<usize>,
}

/// A validated, input-complete network. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkModel {
    pub name: String,
    pub clocks: Vec<ClockDecl>,
    pub ints: Vec<IntVar>,
    pub actions: Vec<String>,
    /// Component emitting each action.
    pub action_owner: Vec<usize>,
    pub components: Vec<Component>,
}

/// Location vector, clock valuation and integer valuation of the whole network.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkState {
    pub locations: Vec<LocId>,
    pub clocks: ClockValuation,
    pub ints: Vec<i64>,
}

impl NetworkModel {
    pub fn initial_state(&self) -> NetworkState {
        NetworkState {
            locations: self.components.iter().map(|c| c.initial).collect(),
            clocks: ClockValuation::zero(self.clocks.len()),
            ints: self.ints.iter().map(|v| v.init).collect(),
        }
    }

    pub fn clock_index(&self, name: &str) -> Option<ClockId> {
        self.clocks.iter().position(|c| c.name == name).map(ClockId)
    }

    pub fn int_index(&self, name: &str) -> Option<IntId> {
        self.ints.iter().position(|v| v.name == name).map(IntId)
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn action_index(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a == name).map(ActionId)
    }

    /// Rate of every clock given the current location vector.
    pub fn rates(&self, locations: &[LocId]) -> RateVector {
        let mut r = vec![1u32; self.clocks.len()];
        for (ci, comp) in self.components.iter().enumerate() {
            let loc = &comp.locations[locations[ci].0];
            for (k, c) in comp.clocks.iter().enumerate() {
                r[c.0] = loc.rates[k];
            }
        }
        RateVector(r)
    }

    pub fn location_name(&self, comp: usize, loc: LocId) -> &str {
        &self.components[comp].locations[loc.0].name
    }

    /// Every invariant of every component holds in `state` (with slack `eps`).
    pub fn invariants_hold(&self, state: &NetworkState, eps: f64) -> Vec<bool> {
        self.components
            .iter()
            .enumerate()
            .map(|(ci, comp)| {
                comp.locations[state.locations[ci].0]
                    .invariant
                    .clock_atoms()
                    .all(|(c, rel, n)| clock_atom_holds(state.clocks.get(c), rel, n, eps))
            })
            .collect()
    }

    /// Converts back to the document form, omitting synthesized input loops.
    pub fn to_document(&self) -> ModelDocument {
        let mut doc = ModelDocument {
            name: self.name.clone(),
            ints: self.ints.iter().filter(|v| v.owner.is_none()).map(int_decl).collect(),
            automata: Vec::new(),
        };
        for (ci, comp) in self.components.iter().enumerate() {
            doc.automata.push(self.component_decl(ci, comp));
        }
        doc
    }

    fn atom_decl(&self, a: &Atom) -> AtomDecl {
        match *a {
            Atom::Clock { clock, rel, bound } => {
                AtomDecl { ident: self.clocks[clock.0].name.clone(), rel, value: bound }
            }
            Atom::Int { var, rel, value } => AtomDecl { ident: self.ints[var.0].name.clone(), rel, value },
        }
    }

    fn expr_decl(&self, e: &Expr) -> ExprDecl {
        let b = |e: &Expr| Box::new(self.expr_decl(e));
        match e {
            Expr::Const(c) => ExprDecl::Const(*c),
            Expr::Var(v) => ExprDecl::Var(self.ints[v.0].name.clone()),
            Expr::Neg(x) => ExprDecl::Neg(b(x)),
            Expr::Add(x, y) => ExprDecl::Add(b(x), b(y)),
            Expr::Sub(x, y) => ExprDecl::Sub(b(x), b(y)),
            Expr::Mul(x, y) => ExprDecl::Mul(b(x), b(y)),
        }
    }

    /// Document form of a component, which may come from [`syntactic_compose`].
    pub fn component_decl(&self, ci: usize, comp: &Component) -> AutomatonDecl {
        let name_of = |a: &ActionId| self.actions[a.0].clone();
        AutomatonDecl {
            name: comp.name.clone(),
            clocks: comp.clocks.iter().map(|c| self.clocks[c.0].name.clone()).collect(),
            ints: self.ints.iter().filter(|v| v.owner == Some(ci)).map(int_decl).collect(),
            outputs: comp.outputs.iter().map(name_of).collect(),
            inputs: comp.inputs.iter().map(name_of).collect(),
            locations: comp
                .locations
                .iter()
                .map(|l| LocationDecl {
                    name: l.name.clone(),
                    invariant: l.invariant.atoms.iter().map(|a| self.atom_decl(a)).collect(),
                    rates: comp
                        .clocks
                        .iter()
                        .zip(&l.rates)
                        .filter(|(_, &r)| r != 1)
                        .map(|(c, &r)| (self.clocks[c.0].name.clone(), r))
                        .collect(),
                    exprate: l.exp_rate.map(|e| (e.num, e.den)),
                })
                .collect(),
            initial: Some(comp.locations[comp.initial.0].name.clone()),
            edges: comp
                .edges
                .iter()
                .filter(|e| !e.synthesized)
                .map(|e| {
                    let default_target = e.branches[0].target;
                    EdgeDecl {
                        source: comp.locations[e.source.0].name.clone(),
                        target: comp.locations[default_target.0].name.clone(),
                        action: self.actions[e.action.0].clone(),
                        direction: e.direction,
                        guard: e.guard.atoms.iter().map(|a| self.atom_decl(a)).collect(),
                        branches: e
                            .branches
                            .iter()
                            .map(|b| BranchDecl {
                                weight: b.weight,
                                resets: b.resets.iter().map(|c| self.clocks[c.0].name.clone()).collect(),
                                updates: b
                                    .updates
                                    .iter()
                                    .map(|(v, x)| (self.ints[v.0].name.clone(), self.expr_decl(x)))
                                    .collect(),
                                target: (b.target != default_target).then(|| comp.locations[b.target.0].name.clone()),
                            })
                            .collect(),
                    }
                })
                .collect(),
        }
    }
}

fn int_decl(v: &IntVar) -> IntDecl {
    IntDecl { name: v.name.clone(), lo: v.lo, hi: v.hi, init: v.init }
}

/// Clock atom test with absolute slack `eps` in the permissive direction.
/// `eps = 0` gives the exact semantics.
pub fn clock_atom_holds(value: f64, rel: Rel, bound: i64, eps: f64) -> bool {
    let n = bound as f64;
    let slack = eps * n.abs().max(1.0);
    match rel {
        Rel::Lt => value < n + slack,
        Rel::Le => value <= n + slack,
        Rel::Gt => value > n - slack,
        Rel::Ge => value >= n - slack,
        Rel::Eq => (value - n).abs() <= slack,
        Rel::Ne => (value - n).abs() > slack,
    }
}

/// `state ⊨ g`, exact.
pub fn eval_guard(model: &NetworkModel, g: &Guard, state: &NetworkState) -> Result<bool> {
    guard_holds(model, g, state, 0.0)
}

pub(crate) fn guard_holds(model: &NetworkModel, g: &Guard, state: &NetworkState, eps: f64) -> Result<bool> {
    for a in &g.atoms {
        let ok = match *a {
            Atom::Clock { clock, rel, bound } => {
                if clock.0 >= model.clocks.len() {
                    return Err(Error::UnknownIdentifier(format!("clock #{}", clock.0)));
                }
                clock_atom_holds(state.clocks.get(clock), rel, bound, eps)
            }
            Atom::Int { var, rel, value } => {
                let v = *state.ints.get(var.0).ok_or_else(|| Error::UnknownIdentifier(format!("int #{}", var.0)))?;
                rel.holds(v, value)
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Slack used when testing guards at a sampled emission instant.
pub const EMISSION_SLACK: f64 = 1e-9;

/// Output edges of component `comp` whose guard holds in `state`, as
/// `(action, edge index)`. Fails if one action has two enabled edges.
pub fn enabled_outputs(model: &NetworkModel, state: &NetworkState, comp: usize) -> Result<Vec<(ActionId, usize)>> {
    enabled_outputs_with(model, state, comp, 0.0)
}

pub(crate) fn enabled_outputs_with(
    model: &NetworkModel,
    state: &NetworkState,
    comp: usize,
    eps: f64,
) -> Result<Vec<(ActionId, usize)>> {
    let c = &model.components[comp];
    let mut out: Vec<(ActionId, usize)> = Vec::new();
    for (i, e) in c.out_edges(state.locations[comp]) {
        if guard_holds(model, &e.guard, state, eps)? {
            if out.iter().any(|(a, _)| *a == e.action) {
                return Err(Error::DeterminismViolation {
                    component: c.name.clone(),
                    action: model.actions[e.action.0].clone(),
                });
            }
            out.push((e.action, i));
        }
    }
    Ok(out)
}

/// Checks a document and builds the network, completing every component
/// with input self-loops for `(location, input)` pairs that have no edge.
pub fn validate(doc: &ModelDocument) -> Result<NetworkModel, ValidationErrors> {
    let mut errs = Vec::new();

    let mut clocks = vec![ClockDecl { name: TIME_CLOCK.into(), owner: None }];
    let mut comp_clock_ids: Vec<HashMap<&str, ClockId>> = Vec::new();
    for (ci, a) in doc.automata.iter().enumerate() {
        let mut local = HashMap::new();
        local.insert(TIME_CLOCK, TIME);
        for c in &a.clocks {
            if let Some(prev) = clocks.iter().find(|d| &d.name == c) {
                let first = prev.owner.map_or(TIME_CLOCK, |o| doc.automata[o].name.as_str());
                errs.push(ValidationError::ClockOverlap {
                    clock: c.clone(),
                    first: first.to_string(),
                    second: a.name.clone(),
                });
            }
            local.insert(c.as_str(), ClockId(clocks.len()));
            clocks.push(ClockDecl { name: c.clone(), owner: Some(ci) });
        }
        comp_clock_ids.push(local);
    }

    let mut ints = Vec::new();
    let mut push_int = |d: &IntDecl, owner: Option<usize>, errs: &mut Vec<ValidationError>| {
        if !(d.lo <= d.init && d.init <= d.hi) {
            errs.push(ValidationError::InvalidDeclaration {
                component: owner.map_or(doc.name.clone(), |o| doc.automata[o].name.clone()),
                detail: format!("integer `{}` initial value outside [{},{}]", d.name, d.lo, d.hi),
            });
        }
        ints.push(IntVar { name: d.name.clone(), lo: d.lo, hi: d.hi, init: d.init, owner });
    };
    for d in &doc.ints {
        push_int(d, None, &mut errs);
    }
    for (ci, a) in doc.automata.iter().enumerate() {
        for d in &a.ints {
            push_int(d, Some(ci), &mut errs);
        }
    }
    let int_ids: HashMap<&str, IntId> = ints.iter().enumerate().map(|(i, v)| (v.name.as_str(), IntId(i))).collect();

    // Output partition: every action is emitted by exactly one component.
    let mut actions: Vec<String> = Vec::new();
    let mut action_owner: Vec<usize> = Vec::new();
    for (ci, a) in doc.automata.iter().enumerate() {
        for o in &a.outputs {
            if let Some(k) = actions.iter().position(|x| x == o) {
                errs.push(ValidationError::OutputPartitionViolation {
                    action: o.clone(),
                    detail: format!("output of both `{}` and `{}`", doc.automata[action_owner[k]].name, a.name),
                });
            } else {
                actions.push(o.clone());
                action_owner.push(ci);
            }
        }
    }
    let action_ids: HashMap<&str, ActionId> =
        actions.iter().enumerate().map(|(i, a)| (a.as_str(), ActionId(i))).collect();
    for a in &doc.automata {
        for i in &a.inputs {
            if !action_ids.contains_key(i.as_str()) {
                errs.push(ValidationError::OutputPartitionViolation {
                    action: i.clone(),
                    detail: format!("input of `{}` is not an output of any automaton", a.name),
                });
            } else if a.outputs.contains(i) {
                errs.push(ValidationError::OutputPartitionViolation {
                    action: i.clone(),
                    detail: format!("`{}` declares it as both input and output", a.name),
                });
            }
        }
    }

    let mut components = Vec::new();
    for (ci, a) in doc.automata.iter().enumerate() {
        let cmap = &comp_clock_ids[ci];
        let own: Vec<ClockId> = a.clocks.iter().map(|c| cmap[c.as_str()]).collect();
        let loc_ids: HashMap<&str, LocId> =
            a.locations.iter().enumerate().map(|(i, l)| (l.name.as_str(), LocId(i))).collect();
        let violation = |place: String, detail: String| ValidationError::GuardKindViolation {
            component: a.name.clone(),
            place,
            detail,
        };
        let atom = |d: &AtomDecl| -> Option<Atom> {
            if let Some(&clock) = cmap.get(d.ident.as_str()) {
                Some(Atom::Clock { clock, rel: d.rel, bound: d.value })
            } else {
                int_ids.get(d.ident.as_str()).map(|&var| Atom::Int { var, rel: d.rel, value: d.value })
            }
        };

        let mut locations = Vec::new();
        for l in &a.locations {
            let place = format!("invariant of `{}`", l.name);
            let mut inv = Guard::default();
            for d in &l.invariant {
                match atom(d) {
                    Some(at @ Atom::Clock { rel, bound, .. }) => {
                        if !rel.is_upper() {
                            errs.push(violation(place.clone(), format!("`{d}` is not an upper bound")));
                        } else if bound < 0 {
                            errs.push(violation(place.clone(), format!("`{d}` has a negative constant")));
                        }
                        inv.atoms.push(at);
                    }
                    _ => errs.push(violation(place.clone(), format!("`{d}` is not a clock bound"))),
                }
            }
            let mut rates = vec![1u32; own.len()];
            for (c, r) in &l.rates {
                match a.clocks.iter().position(|x| x == c) {
                    Some(k) => rates[k] = *r,
                    None => errs.push(ValidationError::InvalidDeclaration {
                        component: a.name.clone(),
                        detail: format!("rate of `{c}` in `{}`: not an own clock", l.name),
                    }),
                }
            }
            let exp_rate = match l.exprate {
                Some((n, d)) if n == 0 || d == 0 => {
                    errs.push(ValidationError::InvalidDeclaration {
                        component: a.name.clone(),
                        detail: format!("exprate {n}/{d} of `{}` is not positive", l.name),
                    });
                    None
                }
                Some((num, den)) => Some(ExpRate { num, den }),
                None => None,
            };
            locations.push(Location { name: l.name.clone(), invariant: inv, rates, exp_rate });
        }

        let initial = match a.initial.as_deref().and_then(|n| loc_ids.get(n)) {
            Some(&l) => l,
            None => {
                errs.push(ValidationError::MissingInitial(a.name.clone()));
                LocId(0)
            }
        };

        let mut edges = Vec::new();
        for e in &a.edges {
            let place = format!("edge `{}` -> `{}` on `{}`", e.source, e.target, e.action);
            let Some(&action) = action_ids.get(e.action.as_str()) else {
                errs.push(ValidationError::OutputPartitionViolation {
                    action: e.action.clone(),
                    detail: format!("used by `{}` but never output", a.name),
                });
                continue;
            };
            let mut guard = Guard::default();
            for d in &e.guard {
                match atom(d) {
                    Some(at @ Atom::Clock { rel, bound, .. }) => {
                        if !rel.is_lower() {
                            errs.push(violation(place.clone(), format!("`{d}` is not a lower bound")));
                        } else if bound < 0 {
                            errs.push(violation(place.clone(), format!("`{d}` has a negative constant")));
                        }
                        guard.atoms.push(at);
                    }
                    Some(at) => guard.atoms.push(at),
                    None => errs.push(violation(place.clone(), format!("`{}` is unknown", d.ident))),
                }
            }
            if e.direction == Direction::Input && e.branches.len() != 1 {
                errs.push(ValidationError::InputBranching { component: a.name.clone(), action: e.action.clone() });
            }
            let mut branches = Vec::new();
            for b in &e.branches {
                if b.weight == 0 {
                    errs.push(ValidationError::InvalidDeclaration {
                        component: a.name.clone(),
                        detail: format!("{place}: zero branch weight"),
                    });
                }
                let mut resets = Vec::new();
                for r in &b.resets {
                    match cmap.get(r.as_str()) {
                        Some(&c) if c != TIME => resets.push(c),
                        _ => errs.push(ValidationError::InvalidDeclaration {
                            component: a.name.clone(),
                            detail: format!("{place}: cannot reset `{r}`"),
                        }),
                    }
                }
                let target = b.target.as_deref().unwrap_or(&e.target);
                branches.push(Branch {
                    weight: b.weight,
                    resets,
                    updates: b.updates.iter().map(|(v, x)| (int_ids[v.as_str()], lower_expr(x, &int_ids))).collect(),
                    target: loc_ids[target],
                });
            }
            if branches.is_empty() {
                branches.push(Branch {
                    weight: 1,
                    resets: Vec::new(),
                    updates: Vec::new(),
                    target: loc_ids[e.target.as_str()],
                });
            }
            edges.push(Edge {
                source: loc_ids[e.source.as_str()],
                action,
                direction: e.direction,
                guard,
                branches,
                synthesized: false,
            });
        }

        let outputs: BTreeSet<ActionId> = a
            .outputs
            .iter()
            .filter_map(|o| action_ids.get(o.as_str()).copied())
            .filter(|id| action_owner[id.0] == ci)
            .collect();
        let inputs: BTreeSet<ActionId> =
            (0..actions.len()).map(ActionId).filter(|id| action_owner[id.0] != ci).collect();
        for e in &edges {
            if e.direction == Direction::Output && !outputs.contains(&e.action) {
                errs.push(ValidationError::OutputPartitionViolation {
                    action: actions[e.action.0].clone(),
                    detail: format!("`{}` emits an action it does not own", a.name),
                });
            }
            if e.direction == Direction::Input && outputs.contains(&e.action) {
                errs.push(ValidationError::OutputPartitionViolation {
                    action: actions[e.action.0].clone(),
                    detail: format!("`{}` receives its own output", a.name),
                });
            }
        }

        let mut comp = Component {
            name: a.name.clone(),
            locations,
            initial,
            clocks: own,
            outputs,
            inputs,
            edges,
            edges_from: Vec::new(),
        };
        comp.index_edges();

        for (li, l) in comp.locations.iter().enumerate() {
            let loc = LocId(li);
            let has_output = comp.out_edges(loc).next().is_some();
            if has_output && l.exp_rate.is_none() && !comp.invariant_bounds_delay(loc) {
                errs.push(ValidationError::MissingExpRate { component: comp.name.clone(), location: l.name.clone() });
            }
        }

        complete_inputs(&mut comp);
        components.push(comp);
    }

    if !errs.is_empty() {
        return Err(ValidationErrors(errs));
    }
    Ok(NetworkModel { name: doc.name.clone(), clocks, ints, actions, action_owner, components })
}

fn lower_expr(e: &ExprDecl, ids: &HashMap<&str, IntId>) -> Expr {
    let b = |x: &ExprDecl| Box::new(lower_expr(x, ids));
    match e {
        ExprDecl::Const(c) => Expr::Const(*c),
        ExprDecl::Var(v) => Expr::Var(ids[v.as_str()]),
        ExprDecl::Neg(x) => Expr::Neg(b(x)),
        ExprDecl::Add(x, y) => Expr::Add(b(x), b(y)),
        ExprDecl::Sub(x, y) => Expr::Sub(b(x), b(y)),
        ExprDecl::Mul(x, y) => Expr::Mul(b(x), b(y)),
    }
}

fn complete_inputs(comp: &mut Component) {
    let mut extra = Vec::new();
    for li in 0..comp.locations.len() {
        let loc = LocId(li);
        for &a in &comp.inputs {
            if comp.in_edges(loc, a).next().is_none() {
                extra.push(Edge {
                    source: loc,
                    action: a,
                    direction: Direction::Input,
                    guard: Guard::default(),
                    branches: vec![Branch { weight: 1, resets: Vec::new(), updates: Vec::new(), target: loc }],
                    synthesized: true,
                });
            }
        }
    }
    comp.edges.extend(extra);
    comp.index_edges();
}

/// Syntactic product of two components of `model`: product locations,
/// union of clocks, per-owner rates, conjoined invariants, and one edge per
/// pair of edges that synchronize on the same action.
pub fn syntactic_compose(model: &NetworkModel, i: usize, j: usize) -> Result<Component> {
    let (c1, c2) = (&model.components[i], &model.components[j]);
    let not = |why: &str| Error::NotComposable(c1.name.clone(), c2.name.clone(), why.into());
    if i == j {
        return Err(not("a component cannot be composed with itself"));
    }
    if c1.clocks.iter().any(|c| c2.clocks.contains(c)) {
        return Err(not("clock sets overlap"));
    }
    if !c1.outputs.is_disjoint(&c2.outputs) {
        return Err(not("output sets overlap"));
    }
    let n2 = c2.locations.len();
    let pid = |l1: LocId, l2: LocId| LocId(l1.0 * n2 + l2.0);

    let mut locations = Vec::with_capacity(c1.locations.len() * n2);
    for l1 in &c1.locations {
        for l2 in &c2.locations {
            let mut inv = l1.invariant.clone();
            inv.atoms.extend(l2.invariant.atoms.iter().copied());
            let exp_rate = match (l1.exp_rate, l2.exp_rate) {
                (Some(a), Some(b)) => Some(ExpRate { num: a.num * b.den + b.num * a.den, den: a.den * b.den }),
                (a, b) => a.or(b),
            };
            locations.push(Location {
                name: format!("{}_{}", l1.name, l2.name),
                invariant: inv,
                rates: l1.rates.iter().chain(&l2.rates).copied().collect(),
                exp_rate,
            });
        }
    }

    let outputs: BTreeSet<ActionId> = c1.outputs.union(&c2.outputs).copied().collect();
    let inputs: BTreeSet<ActionId> = c1.inputs.intersection(&c2.inputs).copied().collect();

    let mut edges = Vec::new();
    for e1 in &c1.edges {
        for e2 in &c2.edges {
            if e1.action != e2.action {
                continue;
            }
            let direction = if e1.direction == Direction::Output || e2.direction == Direction::Output {
                Direction::Output
            } else {
                Direction::Input
            };
            let mut guard = e1.guard.clone();
            guard.atoms.extend(e2.guard.atoms.iter().copied());
            let mut branches = Vec::new();
            for b1 in &e1.branches {
                for b2 in &e2.branches {
                    branches.push(Branch {
                        weight: b1.weight * b2.weight,
                        resets: b1.resets.iter().chain(&b2.resets).copied().collect(),
                        updates: b1.updates.iter().chain(&b2.updates).cloned().collect(),
                        target: pid(b1.target, b2.target),
                    });
                }
            }
            edges.push(Edge {
                source: pid(e1.source, e2.source),
                action: e1.action,
                direction,
                guard,
                branches,
                synthesized: e1.synthesized && e2.synthesized,
            });
        }
    }

    let mut comp = Component {
        name: format!("{}_{}", c1.name, c2.name),
        locations,
        initial: pid(c1.initial, c2.initial),
        clocks: c1.clocks.iter().chain(&c2.clocks).copied().collect(),
        outputs,
        inputs,
        edges,
        edges_from: Vec::new(),
    };
    comp.index_edges();
    Ok(comp)
}

impl NetworkModel {
    /// Replaces components `i` and `j` by their syntactic product, placed at
    /// the lower of the two indices.
    pub fn with_composed(&self, i: usize, j: usize) -> Result<NetworkModel> {
        let product = syntactic_compose(self, i, j)?;
        let (lo, hi) = (i.min(j), i.max(j));
        let remap = |c: usize| -> usize {
            if c == i || c == j {
                lo
            } else if c > hi {
                c - 1
            } else {
                c
            }
        };
        let mut m = self.clone();
        m.components[lo] = product;
        m.components.remove(hi);
        for c in &mut m.clocks {
            c.owner = c.owner.map(remap);
        }
        for v in &mut m.ints {
            v.owner = v.owner.map(remap);
        }
        for o in &mut m.action_owner {
            *o = remap(*o);
        }
        Ok(m)
    }
}

impl fmt::Display for NetworkModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_document())
    }
}
