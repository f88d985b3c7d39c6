//! Elaboration: resolve names in a parsed workspace and build core values.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use wirecalc_core::continuous::{coordinate_names, ContinuousSystem};
use wirecalc_core::discrete::{steady_state_matrix, steady_state_measure, DiscreteSystem, TableRow, WeightedDiscreteSystem};
use wirecalc_core::expr::Expr;
use wirecalc_core::linear::LinearSystem;
use wirecalc_core::matrix::Matrix;
use wirecalc_core::plan::{Interpretation, MultiWiring, Plan, Wire};
use wirecalc_core::semiring::{NatPlus, RealPlus};
use wirecalc_core::setmat::{steady_state_sets, SetMatrix};
use wirecalc_core::tfs::{Interface, PortType, TypedFiniteSet};

use crate::ast::*;
use crate::syntax::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Discrete,
    Weighted,
    Continuous,
    Linear,
    Nat,
    Real,
}

impl Kind {
    pub fn describe(self) -> &'static str {
        match self {
            Kind::Discrete => "a discrete system",
            Kind::Weighted => "a weighted discrete system",
            Kind::Continuous => "a continuous system",
            Kind::Linear => "a linear system",
            Kind::Nat => "a nat matrix",
            Kind::Real => "a real matrix",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Composite {
    pub wiring: String,
    pub fillers: Vec<String>,
    pub kind: Kind,
}

#[derive(Debug, Clone)]
pub enum Value {
    Discrete(DiscreteSystem),
    Weighted(WeightedDiscreteSystem),
    Continuous(ContinuousSystem),
    Linear(LinearSystem),
    Nat(Matrix<NatPlus>),
    Real(Matrix<RealPlus>),
    Composite(Composite),
}

#[derive(Debug, Clone)]
pub struct Wiring {
    pub multi: MultiWiring,
    pub outer: String,
}

#[derive(Debug, Clone, Default)]
pub struct Env {
    pub types: BTreeMap<String, PortType>,
    pub boxes: BTreeMap<String, Interface>,
    pub wirings: BTreeMap<String, Wiring>,
    pub values: BTreeMap<String, Value>,
    /// Box each value lives on.
    pub value_box: BTreeMap<String, String>,
    /// Values in declaration order.
    pub order: Vec<String>,
    pub runs: Vec<RunDecl>,
}

pub type Res<T> = std::result::Result<T, String>;

fn err(e: wirecalc_core::Error) -> String {
    e.to_string()
}

/// Labels for the states of a discrete system: atoms juxtaposed, or joined
/// with `.` when juxtaposition would make two labels equal.
pub fn state_labels(d: &DiscreteSystem) -> Vec<String> {
    let plain: Vec<String> = d.states().iter().map(|e| e.to_string()).collect();
    let distinct: BTreeSet<&String> = plain.iter().collect();
    if distinct.len() == plain.len() && plain.iter().all(|l| !l.is_empty() && l != "()") {
        return plain;
    }
    d.states()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if e.atoms.is_empty() {
                format!("s{i}")
            } else {
                e.atoms.iter().map(|a| a.as_ref()).collect::<Vec<_>>().join(".")
            }
        })
        .collect()
}

pub fn find_state(d: &DiscreteSystem, label: &str) -> Res<usize> {
    state_labels(d)
        .iter()
        .position(|l| l == label)
        .or_else(|| d.state_index(label).ok())
        .ok_or_else(|| format!("unknown state `{label}`"))
}

impl Env {
    pub fn value(&self, name: &str) -> Res<&Value> {
        self.values.get(name).ok_or_else(|| format!("no system or matrix named `{name}`"))
    }

    pub fn kind(&self, name: &str) -> Res<Kind> {
        Ok(match self.value(name)? {
            Value::Discrete(_) => Kind::Discrete,
            Value::Weighted(_) => Kind::Weighted,
            Value::Continuous(_) => Kind::Continuous,
            Value::Linear(_) => Kind::Linear,
            Value::Nat(_) => Kind::Nat,
            Value::Real(_) => Kind::Real,
            Value::Composite(c) => c.kind,
        })
    }

    pub fn interface(&self, name: &str) -> Res<Interface> {
        let b = self.value_box.get(name).ok_or_else(|| format!("no system or matrix named `{name}`"))?;
        Ok(self.boxes[b].clone())
    }

    fn fold<T: Interpretation>(&self, name: &str, plan: Plan, leaf: &dyn Fn(&str, &Value) -> Res<T>) -> Res<T> {
        match self.value(name)? {
            Value::Composite(c) => {
                let items = c.fillers.iter().map(|f| self.fold(f, plan, leaf)).collect::<Res<Vec<T>>>()?;
                self.wirings[&c.wiring].multi.compose(&items, plan).map_err(err)
            }
            v => leaf(name, v),
        }
    }

    fn mismatch(&self, name: &str, want: &str) -> String {
        match self.kind(name) {
            Ok(k) => format!("`{name}` is {}, but this needs {want}", k.describe()),
            Err(e) => e,
        }
    }

    pub fn discrete(&self, name: &str, plan: Plan) -> Res<DiscreteSystem> {
        if !matches!(self.kind(name)?, Kind::Discrete) {
            return Err(self.mismatch(name, Kind::Discrete.describe()));
        }
        self.fold(name, plan, &|n, v| match v {
            Value::Discrete(d) => Ok(d.clone()),
            _ => Err(self.mismatch(n, Kind::Discrete.describe())),
        })
    }

    pub fn weighted(&self, name: &str, plan: Plan) -> Res<WeightedDiscreteSystem> {
        if !matches!(self.kind(name)?, Kind::Weighted) {
            return Err(self.mismatch(name, Kind::Weighted.describe()));
        }
        self.fold(name, plan, &|n, v| match v {
            Value::Weighted(d) => Ok(d.clone()),
            _ => Err(self.mismatch(n, Kind::Weighted.describe())),
        })
    }

    pub fn continuous(&self, name: &str, plan: Plan) -> Res<ContinuousSystem> {
        if !matches!(self.kind(name)?, Kind::Continuous) {
            return Err(self.mismatch(name, Kind::Continuous.describe()));
        }
        self.fold(name, plan, &|n, v| match v {
            Value::Continuous(d) => Ok(d.clone()),
            _ => Err(self.mismatch(n, Kind::Continuous.describe())),
        })
    }

    pub fn linear(&self, name: &str, plan: Plan) -> Res<LinearSystem> {
        if !matches!(self.kind(name)?, Kind::Linear) {
            return Err(self.mismatch(name, Kind::Linear.describe()));
        }
        self.fold(name, plan, &|n, v| match v {
            Value::Linear(d) => Ok(d.clone()),
            _ => Err(self.mismatch(n, Kind::Linear.describe())),
        })
    }

    /// Steady-state counts, composed from the parts without building the
    /// composite system. Declared nat matrices stand for themselves.
    pub fn stst(&self, name: &str, plan: Plan) -> Res<Matrix<NatPlus>> {
        if !matches!(self.kind(name)?, Kind::Discrete | Kind::Weighted | Kind::Nat) {
            return Err(self.mismatch(name, "a discrete system or nat matrix"));
        }
        self.fold(name, plan, &|n, v| match v {
            Value::Discrete(d) => steady_state_matrix(d).map_err(err),
            Value::Weighted(w) => steady_state_matrix(&w.system).map_err(err),
            Value::Nat(m) => Ok(m.clone()),
            _ => Err(self.mismatch(n, "a discrete system or nat matrix")),
        })
    }

    pub fn stst_sets(&self, name: &str, plan: Plan) -> Res<SetMatrix> {
        if !matches!(self.kind(name)?, Kind::Discrete | Kind::Weighted) {
            return Err(self.mismatch(name, Kind::Discrete.describe()));
        }
        self.fold(name, plan, &|n, v| match v {
            Value::Discrete(d) => steady_state_sets(d).map_err(err),
            Value::Weighted(w) => steady_state_sets(&w.system).map_err(err),
            _ => Err(self.mismatch(n, Kind::Discrete.describe())),
        })
    }

    pub fn stst_measure(&self, name: &str, plan: Plan) -> Res<Matrix<RealPlus>> {
        if !matches!(self.kind(name)?, Kind::Weighted | Kind::Real) {
            return Err(self.mismatch(name, "a weighted discrete system or real matrix"));
        }
        self.fold(name, plan, &|n, v| match v {
            Value::Weighted(w) => steady_state_measure(w).map_err(err),
            Value::Real(m) => Ok(m.clone()),
            _ => Err(self.mismatch(n, "a weighted discrete system or real matrix")),
        })
    }

    pub fn nat(&self, name: &str, plan: Plan) -> Res<Matrix<NatPlus>> {
        if !matches!(self.kind(name)?, Kind::Nat) {
            return Err(self.mismatch(name, Kind::Nat.describe()));
        }
        self.fold(name, plan, &|n, v| match v {
            Value::Nat(m) => Ok(m.clone()),
            _ => Err(self.mismatch(n, Kind::Nat.describe())),
        })
    }

    pub fn real(&self, name: &str, plan: Plan) -> Res<Matrix<RealPlus>> {
        if !matches!(self.kind(name)?, Kind::Real) {
            return Err(self.mismatch(name, Kind::Real.describe()));
        }
        self.fold(name, plan, &|n, v| match v {
            Value::Real(m) => Ok(m.clone()),
            _ => Err(self.mismatch(n, Kind::Real.describe())),
        })
    }
}

struct Loader {
    env: Env,
    diags: Vec<Diagnostic>,
    // Names whose declaration failed; later references to them stay quiet.
    broken: BTreeSet<String>,
}

fn d(pos: Pos, msg: impl Into<String>) -> Diagnostic {
    Diagnostic { pos, msg: msg.into() }
}

/// Placeholder for a reference to something already reported; dropped by `load`.
fn quiet(pos: Pos) -> Diagnostic {
    d(pos, "")
}

impl Loader {
    fn resolve(&self, pos: Pos, t: &TypeExpr) -> Result<PortType, Diagnostic> {
        match t {
            TypeExpr::Finite(s) => PortType::finite(s).map_err(|e| d(pos, err(e))),
            TypeExpr::Euclid(0) => Err(d(pos, "Euclidean dimension must be at least 1")),
            TypeExpr::Euclid(n) => Ok(PortType::Euclid(*n)),
            TypeExpr::Alias(a) if self.broken.contains(a) => Err(quiet(pos)),
            TypeExpr::Alias(a) => self.env.types.get(a).cloned().ok_or_else(|| d(pos, format!("unknown type `{a}`"))),
        }
    }

    fn lookup_box(&self, pos: Pos, name: &str) -> Result<Interface, Diagnostic> {
        if self.broken.contains(name) {
            return Err(quiet(pos));
        }
        self.env.boxes.get(name).cloned().ok_or_else(|| d(pos, format!("unknown box `{name}`")))
    }

    fn define(&mut self, pos: Pos, name: &str, box_name: &str, v: Value) {
        if self.env.values.contains_key(name) {
            self.diags.push(d(pos, format!("`{name}` is already defined")));
            return;
        }
        self.env.values.insert(name.to_string(), v);
        self.env.value_box.insert(name.to_string(), box_name.to_string());
        self.env.order.push(name.to_string());
    }

    fn item(&mut self, item: &Item) -> Result<(), Diagnostic> {
        match item {
            Item::Type(t) => {
                let ty = self.resolve(t.pos, &t.ty)?;
                if self.env.types.insert(t.name.clone(), ty).is_some() {
                    return Err(d(t.pos, format!("type `{}` is already defined", t.name)));
                }
            }
            Item::Box(b) => self.box_decl(b)?,
            Item::Wiring(w) => self.wiring(w)?,
            Item::Discrete(x) => {
                let iface = self.lookup_box(x.pos, &x.box_name)?;
                if !iface.is_finite() {
                    return Err(d(x.pos, format!("box `{}` has Euclidean ports; discrete systems need finite ones", x.box_name)));
                }
                let rows: Vec<TableRow> = x
                    .rows
                    .iter()
                    .map(|r| TableRow { input: r.input.clone(), state: r.state.clone(), output: r.output.clone(), next: r.next.clone() })
                    .collect();
                for r in &x.rows {
                    let ok = iface.inputs.point_from_symbols(&r.input).and(iface.outputs.point_from_symbols(&r.output));
                    if let Err(e) = ok {
                        return Err(d(r.pos, err(e)));
                    }
                    for s in [&r.state, &r.next] {
                        if !x.states.contains(s) {
                            return Err(d(r.pos, format!("unknown state `{s}`")));
                        }
                    }
                }
                let sys = DiscreteSystem::from_table(iface, &x.states, &rows).map_err(|e| d(x.pos, err(e)))?;
                self.define(x.pos, &x.name, &x.box_name, Value::Discrete(sys));
            }
            Item::Weighted(x) => {
                if self.broken.contains(&x.system) {
                    return Err(quiet(x.pos));
                }
                let base = match self.env.values.get(&x.system) {
                    Some(Value::Discrete(s)) => s.clone(),
                    Some(Value::Composite(c)) if c.kind == Kind::Discrete => {
                        self.env.discrete(&x.system, Plan::TensorThenWire).map_err(|e| d(x.pos, e))?
                    }
                    Some(_) => return Err(d(x.pos, format!("`{}` is not a discrete system", x.system))),
                    None => return Err(d(x.pos, format!("unknown system `{}`", x.system))),
                };
                let mut w = vec![1.0; base.n_states()];
                for (s, v) in &x.weights {
                    let i = find_state(&base, s).map_err(|e| d(x.pos, e))?;
                    w[i] = *v;
                }
                let weights = w.into_iter().map(RealPlus::new).collect::<Result<Vec<_>, _>>().map_err(|e| d(x.pos, err(e)))?;
                let sys = WeightedDiscreteSystem::new(base, weights).map_err(|e| d(x.pos, err(e)))?;
                let b = self.env.value_box[&x.system].clone();
                self.define(x.pos, &x.name, &b, Value::Weighted(sys));
            }
            Item::Continuous(x) => {
                let iface = self.lookup_box(x.pos, &x.box_name)?;
                let mut dyns = Vec::new();
                for s in &x.states {
                    let e = x.dots.iter().find(|e| &e.var == s).ok_or_else(|| d(x.pos, format!("no `dot {s}` equation")))?;
                    dyns.push(e.rhs.clone());
                }
                if let Some(e) = x.dots.iter().find(|e| !x.states.contains(&e.var)) {
                    return Err(d(e.pos, format!("`{}` is not a state variable", e.var)));
                }
                let outs = coordinate_names(&iface.outputs);
                let mut readout = Vec::new();
                for o in &outs {
                    let e = x.outs.iter().find(|e| &e.var == o).ok_or_else(|| d(x.pos, format!("no `out {o}` equation")))?;
                    readout.push(e.rhs.clone());
                }
                if let Some(e) = x.outs.iter().find(|e| !outs.contains(&e.var)) {
                    return Err(d(e.pos, format!("`{}` is not an output coordinate of `{}`", e.var, x.box_name)));
                }
                let sys = ContinuousSystem::new(iface, x.states.clone(), dyns, readout).map_err(|e| d(x.pos, err(e)))?;
                self.define(x.pos, &x.name, &x.box_name, Value::Continuous(sys));
            }
            Item::Linear(x) => {
                let iface = self.lookup_box(x.pos, &x.box_name)?;
                let (k, l, n) = (iface.inputs.dims(), iface.outputs.dims(), x.dim);
                let m = |rows: &[Vec<f64>], r: usize, c: usize, what: &str| -> Result<DMatrix<f64>, Diagnostic> {
                    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
                        return Err(d(x.pos, format!("`{what}` must be {r}x{c}")));
                    }
                    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
                };
                let sys = LinearSystem::new(iface, m(&x.m_in, n, k, "in")?, m(&x.m_mid, n, n, "mid")?, m(&x.m_out, l, n, "out")?)
                    .map_err(|e| d(x.pos, err(e)))?;
                self.define(x.pos, &x.name, &x.box_name, Value::Linear(sys));
            }
            Item::Matrix(x) => {
                let iface = self.lookup_box(x.pos, &x.box_name)?;
                let (r, c) = match (iface.inputs.size(), iface.outputs.size()) {
                    (Ok(r), Ok(c)) => (r, c),
                    _ => return Err(d(x.pos, "matrices need finite ports")),
                };
                if x.rows.len() != r || x.rows.iter().any(|row| row.len() != c) {
                    return Err(d(x.pos, format!("matrix on `{}` must be {r}x{c}", x.box_name)));
                }
                let bad = |s: &str| d(x.pos, format!("`{s}` is not a valid entry"));
                let v = match x.semiring {
                    SemiringTag::Nat => {
                        let data = x
                            .rows
                            .iter()
                            .map(|row| {
                                row.iter()
                                    .map(|s| if s == "inf" { Ok(NatPlus::Inf) } else { s.parse().map(NatPlus::Fin).map_err(|_| bad(s)) })
                                    .collect()
                            })
                            .collect::<Result<Vec<Vec<_>>, _>>()?;
                        Value::Nat(Matrix::from_dense(iface.inputs, iface.outputs, data).map_err(|e| d(x.pos, err(e)))?)
                    }
                    SemiringTag::Real => {
                        let data = x
                            .rows
                            .iter()
                            .map(|row| {
                                row.iter()
                                    .map(|s| {
                                        let v: f64 = if s == "inf" { f64::INFINITY } else { s.parse().map_err(|_| bad(s))? };
                                        RealPlus::new(v).map_err(|e| d(x.pos, err(e)))
                                    })
                                    .collect()
                            })
                            .collect::<Result<Vec<Vec<_>>, _>>()?;
                        Value::Real(Matrix::from_dense(iface.inputs, iface.outputs, data).map_err(|e| d(x.pos, err(e)))?)
                    }
                };
                self.define(x.pos, &x.name, &x.box_name, v);
            }
            Item::Compose(x) => {
                if self.broken.contains(&x.wiring) || x.fillers.iter().any(|f| self.broken.contains(f)) {
                    return Err(quiet(x.pos));
                }
                let w = self.env.wirings.get(&x.wiring).ok_or_else(|| d(x.pos, format!("unknown wiring `{}`", x.wiring)))?;
                let slots = w.multi.slots();
                if slots.len() != x.fillers.len() {
                    return Err(d(x.pos, format!("wiring `{}` has {} slots, got {} systems", x.wiring, slots.len(), x.fillers.len())));
                }
                let mut kinds = Vec::new();
                for (f, (slot, iface)) in x.fillers.iter().zip(slots) {
                    let k = self.env.kind(f).map_err(|e| d(x.pos, e))?;
                    let have = self.env.interface(f).map_err(|e| d(x.pos, e))?;
                    if !have.same_shape(iface) {
                        return Err(d(x.pos, format!("`{f}` does not fit slot `{slot}`: box {have}, slot needs {iface}")));
                    }
                    kinds.push(k);
                }
                let kind = kinds[0];
                if let Some(k) = kinds.iter().find(|k| **k != kind) {
                    return Err(d(x.pos, format!("cannot mix {} and {} in one composite", kind.describe(), k.describe())));
                }
                let outer = w.outer.clone();
                let c = Composite { wiring: x.wiring.clone(), fillers: x.fillers.clone(), kind };
                self.define(x.pos, &x.name, &outer, Value::Composite(c));
            }
            Item::Run(r) => self.env.runs.push(r.clone()),
        }
        Ok(())
    }

    fn box_decl(&mut self, b: &BoxDecl) -> Result<(), Diagnostic> {
        let mut ins = Vec::new();
        let mut outs = Vec::new();
        let mut bad = false;
        for p in &b.ports {
            match self.resolve(p.pos, &p.ty) {
                Ok(t) => {
                    if p.dir == Dir::In { &mut ins } else { &mut outs }.push((p.name.clone(), t));
                }
                Err(e) => {
                    self.diags.push(e);
                    bad = true;
                }
            }
        }
        if bad {
            return Ok(());
        }
        let ins = TypedFiniteSet::new(ins).map_err(|e| d(b.pos, err(e)))?;
        let outs = TypedFiniteSet::new(outs).map_err(|e| d(b.pos, err(e)))?;
        if self.env.boxes.insert(b.name.clone(), Interface::new(ins, outs)).is_some() {
            return Err(d(b.pos, format!("box `{}` is already defined", b.name)));
        }
        Ok(())
    }

    fn wiring(&mut self, w: &WiringDecl) -> Result<(), Diagnostic> {
        let outer = self.lookup_box(w.pos, &w.outer)?;
        let mut slots: Vec<(String, Interface)> = Vec::new();
        for s in &w.slots {
            if s.name == w.outer || slots.iter().any(|(n, _)| n == &s.name) {
                return Err(d(s.pos, format!("slot name `{}` is used twice", s.name)));
            }
            slots.push((s.name.clone(), self.lookup_box(s.pos, &s.box_name)?));
        }
        let mut inputs: Vec<Vec<Option<Wire>>> = slots.iter().map(|(_, b)| vec![None; b.inputs.len()]).collect();
        let mut outputs: Vec<Option<(usize, usize)>> = vec![None; outer.outputs.len()];
        // Targets whose link was rejected; no "unwired" report for them.
        let mut tried: BTreeSet<String> = BTreeSet::new();
        let n_diags = self.diags.len();
        let slot_of = |o: &str| slots.iter().position(|(n, _)| n == o);
        for l in &w.links {
            let t = &l.target;
            tried.insert(t.to_string());
            let src = &l.source;
            let source: Option<(Wire, PortType)> = if src.owner == w.outer {
                match outer.inputs.position(&src.port) {
                    Some(q) => Some((Wire::Outer(q), outer.inputs.port(q).ty.clone())),
                    None => {
                        self.diags.push(d(src.pos, format!("`{src}` is not an input port of `{}`", w.outer)));
                        None
                    }
                }
            } else if let Some(s) = slot_of(&src.owner) {
                match slots[s].1.outputs.position(&src.port) {
                    Some(k) => Some((Wire::Slot(s, k), slots[s].1.outputs.port(k).ty.clone())),
                    None => {
                        self.diags.push(d(src.pos, format!("`{src}` is not an output port of slot `{}`", src.owner)));
                        None
                    }
                }
            } else {
                self.diags.push(d(src.pos, format!("unknown slot `{}` in `{src}`", src.owner)));
                None
            };
            let target: Option<(Result<(usize, usize), usize>, PortType)> = if t.owner == w.outer {
                match outer.outputs.position(&t.port) {
                    Some(q) => Some((Err(q), outer.outputs.port(q).ty.clone())),
                    None => {
                        self.diags.push(d(t.pos, format!("`{t}` is not an output port of `{}`", w.outer)));
                        None
                    }
                }
            } else if let Some(s) = slot_of(&t.owner) {
                match slots[s].1.inputs.position(&t.port) {
                    Some(p) => Some((Ok((s, p)), slots[s].1.inputs.port(p).ty.clone())),
                    None => {
                        self.diags.push(d(t.pos, format!("`{t}` is not an input port of slot `{}`", t.owner)));
                        None
                    }
                }
            } else {
                self.diags.push(d(t.pos, format!("unknown slot `{}` in `{t}`", t.owner)));
                None
            };
            let (Some((wire, st)), Some((tgt, tt))) = (source, target) else { continue };
            if st != tt {
                self.diags.push(d(l.pos, format!("`{t}` has type {tt} but `{src}` has type {st}")));
                continue;
            }
            match tgt {
                Ok((s, p)) => {
                    if inputs[s][p].replace(wire).is_some() {
                        self.diags.push(d(l.pos, format!("`{t}` is wired twice")));
                    }
                }
                Err(q) => match wire {
                    Wire::Slot(s, k) => {
                        if outputs[q].replace((s, k)).is_some() {
                            self.diags.push(d(l.pos, format!("`{t}` is wired twice")));
                        }
                    }
                    Wire::Outer(_) => {
                        self.diags.push(d(l.pos, format!("`{t}` cannot be fed directly from an outer input")));
                    }
                },
            }
        }
        for (s, (name, b)) in slots.iter().enumerate() {
            for (p, port) in b.inputs.ports().iter().enumerate() {
                let label = format!("{name}.{}", port.name);
                if inputs[s][p].is_none() && !tried.contains(&label) {
                    self.diags.push(d(w.pos, format!("input `{label}` is not wired")));
                }
            }
        }
        for (q, port) in outer.outputs.ports().iter().enumerate() {
            let label = format!("{}.{}", w.outer, port.name);
            if outputs[q].is_none() && !tried.contains(&label) {
                self.diags.push(d(w.pos, format!("output `{label}` is not wired")));
            }
        }
        if self.diags.len() > n_diags {
            return Ok(());
        }
        let inputs = inputs.into_iter().map(|v| v.into_iter().map(Option::unwrap).collect()).collect();
        let outputs = outputs.into_iter().map(Option::unwrap).collect();
        let multi = MultiWiring::new(slots, outer, inputs, outputs).map_err(|e| d(w.pos, err(e)))?;
        if self.env.wirings.insert(w.name.clone(), Wiring { multi, outer: w.outer.clone() }).is_some() {
            return Err(d(w.pos, format!("wiring `{}` is already defined", w.name)));
        }
        Ok(())
    }
}

/// Elaborate a workspace, reporting every problem found.
pub fn load(ws: &Workspace) -> Result<Env, Vec<Diagnostic>> {
    let mut l = Loader { env: Env::default(), diags: Vec::new(), broken: BTreeSet::new() };
    for item in &ws.items {
        let before = l.diags.len();
        if let Err(e) = l.item(item) {
            l.diags.push(e);
        }
        let name = item.name();
        let e = &l.env;
        let defined = e.types.contains_key(name)
            || e.boxes.contains_key(name)
            || e.wirings.contains_key(name)
            || e.values.contains_key(name);
        if l.diags.len() > before && !defined {
            l.broken.insert(name.to_string());
        }
    }
    l.diags.retain(|d| !d.msg.is_empty());
    if l.diags.is_empty() && l.broken.is_empty() {
        Ok(l.env)
    } else {
        l.diags.sort_by_key(|d| (d.pos.line, d.pos.col));
        Err(l.diags)
    }
}

// ------------------------------------------------- values back to syntax

fn type_expr(t: &PortType) -> TypeExpr {
    match t {
        PortType::Finite(s) => TypeExpr::Finite(s.clone()),
        PortType::Euclid(n) => TypeExpr::Euclid(*n),
    }
}

pub fn box_decl(name: &str, iface: &Interface) -> BoxDecl {
    let mut ports = Vec::new();
    for (dir, set) in [(Dir::In, &iface.inputs), (Dir::Out, &iface.outputs)] {
        for p in set.ports() {
            ports.push(PortDecl { pos: Pos::default(), dir, name: p.name.clone(), ty: type_expr(&p.ty) });
        }
    }
    BoxDecl { pos: Pos::default(), name: name.into(), ports }
}

pub fn discrete_decl(name: &str, box_name: &str, f: &DiscreteSystem) -> Res<DiscreteDecl> {
    let iface = f.interface();
    let labels = state_labels(f);
    let syms = |set: &TypedFiniteSet, i: usize| -> Res<Vec<String>> {
        let p = wirecalc_core::tfs::unflatten(set, i).map_err(err)?;
        set.symbols_of(&p).map_err(err)
    };
    let mut rows = Vec::new();
    for s in 0..f.n_states() {
        for a in 0..iface.inputs.size().map_err(err)? {
            rows.push(Row {
                pos: Pos::default(),
                input: syms(&iface.inputs, a)?,
                state: labels[s].clone(),
                output: syms(&iface.outputs, f.readout(s))?,
                next: labels[f.update(a, s)].clone(),
            });
        }
    }
    Ok(DiscreteDecl { pos: Pos::default(), name: name.into(), box_name: box_name.into(), states: labels, rows })
}

/// Input variables are renamed to the port coordinate names, moving any
/// state variable out of the way.
pub fn continuous_decl(name: &str, box_name: &str, f: &ContinuousSystem) -> ContinuousDecl {
    let coords = coordinate_names(&f.interface().inputs);
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (v, c) in f.input_vars().iter().zip(&coords) {
        map.insert(v.clone(), c.clone());
    }
    let mut taken: BTreeSet<String> = coords.iter().cloned().collect();
    let mut states = Vec::new();
    for v in f.state_vars() {
        let mut n = v.clone();
        let mut i = 2;
        while taken.contains(&n) {
            n = format!("{v}_{i}");
            i += 1;
        }
        taken.insert(n.clone());
        map.insert(v.clone(), n.clone());
        states.push(n);
    }
    let eq = |var: &str, e: &Expr| Equation { pos: Pos::default(), var: var.into(), rhs: e.rename(&map) };
    let dots = states.iter().zip(f.dynamics()).map(|(v, e)| eq(v, e)).collect();
    let outs = coordinate_names(&f.interface().outputs).iter().zip(f.readout()).map(|(v, e)| eq(v, e)).collect();
    ContinuousDecl { pos: Pos::default(), name: name.into(), box_name: box_name.into(), states, dots, outs }
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().cloned().collect()).collect()
}

pub fn linear_decl(name: &str, box_name: &str, l: &LinearSystem) -> LinearDecl {
    LinearDecl {
        pos: Pos::default(),
        name: name.into(),
        box_name: box_name.into(),
        dim: l.state_dim(),
        m_in: rows_of(&l.m_in),
        m_mid: rows_of(&l.m_mid),
        m_out: rows_of(&l.m_out),
    }
}

pub fn nat_decl(name: &str, box_name: &str, m: &Matrix<NatPlus>) -> MatrixDecl {
    let rows = m.to_dense().iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
    MatrixDecl { pos: Pos::default(), name: name.into(), box_name: box_name.into(), semiring: SemiringTag::Nat, rows }
}

pub fn real_decl(name: &str, box_name: &str, m: &Matrix<RealPlus>) -> MatrixDecl {
    let rows = m
        .to_dense()
        .iter()
        .map(|r| r.iter().map(|v| if v.value().is_infinite() { "inf".into() } else { format!("{:?}", v.value()) }).collect())
        .collect();
    MatrixDecl { pos: Pos::default(), name: name.into(), box_name: box_name.into(), semiring: SemiringTag::Real, rows }
}

pub fn weighted_decl(name: &str, system: &str, w: &WeightedDiscreteSystem) -> WeightedDecl {
    let labels = state_labels(&w.system);
    let weights =
        labels.into_iter().zip(&w.weights).filter(|(_, v)| v.value() != 1.0).map(|(l, v)| (l, v.value())).collect();
    WeightedDecl { pos: Pos::default(), name: name.into(), system: system.into(), weights }
}
