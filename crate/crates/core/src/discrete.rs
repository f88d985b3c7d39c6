//! Discrete open dynamical systems (Moore machines) on Finite boxes.

use crate::error::{Error, Result};
use crate::instrument;
use crate::matrix::Matrix;
use crate::semiring::{Element, NatPlus, RealPlus, Semiring};
use crate::tfs::{Interface, Point};
use crate::wiring::WiringDiagram;

/// States `S`, readout `S -> B` and update `A × S -> S`, all as dense tables
/// over flat indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    iface: Interface,
    states: Vec<Element>,
    readout: Vec<usize>,
    // indexed by a * |S| + s
    update: Vec<usize>,
    components: usize,
}

/// One row of a transition table, given by symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub input: Vec<String>,
    pub state: String,
    pub output: Vec<String>,
    pub next: String,
}

impl DiscreteSystem {
    pub fn new(iface: Interface, states: Vec<Element>, readout: Vec<usize>, update: Vec<usize>) -> Result<Self> {
        if !iface.is_finite() {
            return Err(Error::WrongInterpretation("discrete systems need Finite ports".into()));
        }
        let n = states.len();
        let na = iface.inputs.size()?;
        let nb = iface.outputs.size()?;
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(Error::InvalidSystem(format!("repeated state `{s}`")));
            }
        }
        if readout.len() != n || readout.iter().any(|&b| b >= nb) {
            return Err(Error::InvalidSystem("readout table is not a total map into outputs".into()));
        }
        if update.len() != na * n || update.iter().any(|&t| t >= n) {
            return Err(Error::InvalidSystem("update table is not a total map into states".into()));
        }
        Ok(Self { iface, states, readout, update, components: 1 })
    }

    pub fn from_fns(
        iface: Interface,
        states: Vec<Element>,
        readout: impl Fn(usize) -> usize,
        update: impl Fn(usize, usize) -> usize,
    ) -> Result<Self> {
        let n = states.len();
        let na = iface.inputs.size()?;
        let rdt = (0..n).map(readout).collect();
        let upd = (0..na).flat_map(|a| (0..n).map(move |s| (a, s))).map(|(a, s)| update(a, s)).collect();
        Self::new(iface, states, rdt, upd)
    }

    /// Build from `Input | State | Readout | Next` rows. Every (input, state)
    /// pair must appear exactly once and each state must have one readout.
    pub fn from_table(iface: Interface, states: &[String], rows: &[TableRow]) -> Result<Self> {
        let n = states.len();
        let na = iface.inputs.size()?;
        let idx = |s: &str| states.iter().position(|x| x == s).ok_or_else(|| Error::UnknownState(s.into()));
        let mut readout: Vec<Option<usize>> = vec![None; n];
        let mut update: Vec<Option<usize>> = vec![None; na * n];
        for r in rows {
            let a = crate::tfs::flat_index(&iface.inputs, &iface.inputs.point_from_symbols(&r.input)?)?;
            let b = crate::tfs::flat_index(&iface.outputs, &iface.outputs.point_from_symbols(&r.output)?)?;
            let s = idx(&r.state)?;
            let t = idx(&r.next)?;
            match readout[s] {
                Some(prev) if prev != b => {
                    return Err(Error::InvalidSystem(format!(
                        "state `{}` has two readouts: {} and {}",
                        r.state,
                        iface.outputs.label(prev),
                        iface.outputs.label(b)
                    )))
                }
                _ => readout[s] = Some(b),
            }
            if update[a * n + s].replace(t).is_some() {
                return Err(Error::InvalidSystem(format!(
                    "input {} and state `{}` listed twice",
                    iface.inputs.label(a),
                    r.state
                )));
            }
        }
        let readout = readout
            .into_iter()
            .enumerate()
            .map(|(s, b)| b.ok_or_else(|| Error::InvalidSystem(format!("state `{}` has no readout", states[s]))))
            .collect::<Result<Vec<_>>>()?;
        let update = update
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                t.ok_or_else(|| {
                    Error::InvalidSystem(format!(
                        "no transition for input {} in state `{}`",
                        iface.inputs.label(i / n),
                        states[i % n]
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let labels = states.iter().map(|s| Element::atom(s)).collect();
        Self::new(iface, labels, readout, update)
    }

    /// The one-state system on the closed box.
    pub fn unit() -> Self {
        Self {
            iface: Interface::closed(),
            states: vec![Element::unit()],
            readout: vec![0],
            update: vec![0],
            components: 1,
        }
    }

    pub fn interface(&self) -> &Interface {
        &self.iface
    }

    pub fn states(&self) -> &[Element] {
        &self.states
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// How many primitive systems were put in parallel to build this one.
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn readout(&self, s: usize) -> usize {
        self.readout[s]
    }

    pub fn update(&self, a: usize, s: usize) -> usize {
        self.update[a * self.states.len() + s]
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|e| e.to_string() == label || e.tuple_string() == label)
            .ok_or_else(|| Error::UnknownState(label.into()))
    }

    pub fn readout_table(&self) -> &[usize] {
        &self.readout
    }

    pub fn update_table(&self) -> &[usize] {
        &self.update
    }

    /// Same labels and tables on equally shaped boxes.
    pub fn same_behaviour(&self, other: &Self) -> bool {
        self.iface.same_shape(&other.iface)
            && self.states == other.states
            && self.readout == other.readout
            && self.update == other.update
    }

    fn note_scan(&self) {
        if self.components > 1 {
            instrument::record_composite_states(self.states.len() as u64);
        }
    }
}

/// Product system; states are pairs, first component most significant.
pub fn ds_parallel(f1: &DiscreteSystem, f2: &DiscreteSystem) -> Result<DiscreteSystem> {
    let iface = f1.iface.sum(&f2.iface)?;
    let (n1, n2) = (f1.n_states(), f2.n_states());
    let a2 = f2.iface.inputs.size()?;
    let b2 = f2.iface.outputs.size()?;
    let na = iface.inputs.size()?;
    let n = n1.checked_mul(n2).ok_or(Error::SizeCapExceeded { size: u128::MAX, cap: usize::MAX as u128 })?;
    instrument::record_composite_states(n as u64);
    let mut states = Vec::with_capacity(n);
    let mut readout = Vec::with_capacity(n);
    for s1 in 0..n1 {
        for s2 in 0..n2 {
            states.push(f1.states[s1].pair(&f2.states[s2]));
            readout.push(f1.readout(s1) * b2 + f2.readout(s2));
        }
    }
    let mut update = Vec::with_capacity(na * n);
    for a in 0..na {
        let (x1, x2) = (a / a2, a % a2);
        for s1 in 0..n1 {
            for s2 in 0..n2 {
                update.push(f1.update(x1, s1) * n2 + f2.update(x2, s2));
            }
        }
    }
    Ok(DiscreteSystem { iface, states, readout, update, components: f1.components + f2.components })
}

/// Wire a system: readout through `out_eval`, inputs through `in_eval` using
/// the system's own readout for fed-back wires.
pub fn ds_apply(w: &WiringDiagram, f: &DiscreteSystem) -> Result<DiscreteSystem> {
    if !w.inner().same_shape(&f.iface) {
        return Err(Error::BoxMismatch(format!("system on {} but diagram expects {}", f.iface, w.inner())));
    }
    if !w.outer().is_finite() {
        return Err(Error::WrongInterpretation("discrete systems need Finite ports".into()));
    }
    f.note_scan();
    let ev = w.flat_evaluator()?;
    let n = f.n_states();
    let ny = ev.y_size;
    let ydigits: Vec<Vec<usize>> = (0..ny).map(|y| ev.y_digits(y)).collect();
    let mut readout = Vec::with_capacity(n);
    let mut update = vec![0; ny * n];
    for s in 0..n {
        let xd = ev.x_digits(f.readout(s));
        readout.push(ev.out_eval_digits(&xd));
        for (y, yd) in ydigits.iter().enumerate() {
            update[y * n + s] = f.update(ev.in_eval_digits(yd, &xd), s);
        }
    }
    Ok(DiscreteSystem {
        iface: w.outer().clone(),
        states: f.states.clone(),
        readout,
        update,
        components: f.components,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitializedDiscreteSystem {
    pub system: DiscreteSystem,
    pub initial: usize,
}

impl InitializedDiscreteSystem {
    pub fn new(system: DiscreteSystem, initial: &str) -> Result<Self> {
        let initial = system.state_index(initial)?;
        Ok(Self { system, initial })
    }
}

/// State and output streams for an input stream. Both have one more entry
/// than the inputs.
pub fn run_stream(f: &InitializedDiscreteSystem, inputs: &[Point]) -> Result<(Vec<usize>, Vec<usize>)> {
    let sys = &f.system;
    let mut s = f.initial;
    let mut states = vec![s];
    let mut outs = vec![sys.readout(s)];
    for a in inputs {
        let ai = crate::tfs::flat_index(&sys.iface.inputs, a)?;
        s = sys.update(ai, s);
        states.push(s);
        outs.push(sys.readout(s));
    }
    Ok((states, outs))
}

/// Entry (a, b) counts states s with readout b and update(a, s) = s.
pub fn steady_state_matrix(f: &DiscreteSystem) -> Result<Matrix<NatPlus>> {
    f.note_scan();
    let mut m = Matrix::zeros(f.iface.inputs.clone(), f.iface.outputs.clone())?;
    let na = f.iface.inputs.size()?;
    for a in 0..na {
        for s in 0..f.n_states() {
            if f.update(a, s) == s {
                m.add_at(a, f.readout(s), &NatPlus::Fin(1))?;
            }
        }
    }
    Ok(m)
}

/// A discrete system with a non-negative weight on every state.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDiscreteSystem {
    pub system: DiscreteSystem,
    pub weights: Vec<RealPlus>,
}

impl WeightedDiscreteSystem {
    pub fn new(system: DiscreteSystem, weights: Vec<RealPlus>) -> Result<Self> {
        if weights.len() != system.n_states() {
            return Err(Error::InvalidSystem(format!(
                "{} weights for {} states",
                weights.len(),
                system.n_states()
            )));
        }
        Ok(Self { system, weights })
    }

    pub fn uniform(system: DiscreteSystem) -> Self {
        let weights = vec![RealPlus::one(); system.n_states()];
        Self { system, weights }
    }
}

/// Product weights on the product system.
pub fn wds_parallel(f1: &WeightedDiscreteSystem, f2: &WeightedDiscreteSystem) -> Result<WeightedDiscreteSystem> {
    let system = ds_parallel(&f1.system, &f2.system)?;
    let mut weights = Vec::with_capacity(system.n_states());
    for w1 in &f1.weights {
        for w2 in &f2.weights {
            weights.push(w1.mul(w2)?);
        }
    }
    Ok(WeightedDiscreteSystem { system, weights })
}

pub fn wds_apply(w: &WiringDiagram, f: &WeightedDiscreteSystem) -> Result<WeightedDiscreteSystem> {
    Ok(WeightedDiscreteSystem { system: ds_apply(w, &f.system)?, weights: f.weights.clone() })
}

/// Entry (a, b) is the total weight of the (a, b)-steady states.
pub fn steady_state_measure(f: &WeightedDiscreteSystem) -> Result<Matrix<RealPlus>> {
    let sys = &f.system;
    sys.note_scan();
    let mut m = Matrix::zeros(sys.iface.inputs.clone(), sys.iface.outputs.clone())?;
    for a in 0..sys.iface.inputs.size()? {
        for s in 0..sys.n_states() {
            if sys.update(a, s) == s {
                m.add_at(a, sys.readout(s), &f.weights[s])?;
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tfs::{PortType, TypedFiniteSet};

    fn one(name: &str, syms: &[&str]) -> TypedFiniteSet {
        TypedFiniteSet::new(vec![(name.into(), PortType::finite(syms).unwrap())]).unwrap()
    }

    fn row(i: &str, s: &str, o: &str, t: &str) -> TableRow {
        TableRow { input: vec![i.into()], state: s.into(), output: vec![o.into()], next: t.into() }
    }

    fn machine() -> DiscreteSystem {
        let iface = Interface::new(one("a", &["T", "F"]), one("b", &["Red", "Blue", "Green"]));
        let states: Vec<String> = ["1", "2", "3", "4"].iter().map(|s| s.to_string()).collect();
        let rows = vec![
            row("T", "1", "Blue", "2"),
            row("F", "1", "Blue", "1"),
            row("T", "2", "Red", "2"),
            row("F", "2", "Red", "3"),
            row("T", "3", "Green", "4"),
            row("F", "3", "Green", "4"),
            row("T", "4", "Blue", "1"),
            row("F", "4", "Blue", "4"),
        ];
        DiscreteSystem::from_table(iface, &states, &rows).unwrap()
    }

    #[test]
    fn table_rejects_missing_and_conflicting_rows() {
        let iface = Interface::new(one("a", &["T", "F"]), one("b", &["x", "y"]));
        let states = vec!["s".to_string()];
        let r = DiscreteSystem::from_table(iface.clone(), &states, &[row("T", "s", "x", "s")]);
        assert!(matches!(r, Err(Error::InvalidSystem(_))));
        let r = DiscreteSystem::from_table(iface, &states, &[row("T", "s", "x", "s"), row("F", "s", "y", "s")]);
        assert!(matches!(r, Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn empty_stream() {
        let f = InitializedDiscreteSystem::new(machine(), "3").unwrap();
        let (s, o) = run_stream(&f, &[]).unwrap();
        assert_eq!(s, vec![2]);
        assert_eq!(o, vec![2]);
    }

    #[test]
    fn fixed_everywhere() {
        let iface = Interface::new(one("a", &["x", "y"]), one("b", &["u", "v"]));
        let states = (0..3).map(|i| Element::atom(&i.to_string())).collect();
        let f = DiscreteSystem::from_fns(iface, states, |_| 1, |_, s| s).unwrap();
        let m = steady_state_matrix(&f).unwrap();
        for a in 0..2 {
            assert_eq!(m.get(a, 0), NatPlus::Fin(0));
            assert_eq!(m.get(a, 1), NatPlus::Fin(3));
        }
    }

    #[test]
    fn parallel_with_unit() {
        let f = machine();
        let g = ds_parallel(&f, &DiscreteSystem::unit()).unwrap();
        assert!(g.same_behaviour(&f));
        assert_eq!(g.n_states(), 4);
        assert_eq!(g.states()[0].to_string(), "1");
    }

    #[test]
    fn weights_zero_and_one() {
        let f = machine();
        let ones = steady_state_measure(&WeightedDiscreteSystem::uniform(f.clone())).unwrap();
        let counts = steady_state_matrix(&f).unwrap();
        assert_eq!(ones, counts.map(|v| match v {
            NatPlus::Fin(x) => RealPlus::new(*x as f64).unwrap(),
            NatPlus::Inf => RealPlus::INF,
        }));
        let zeros = WeightedDiscreteSystem::new(f, vec![RealPlus::zero(); 4]).unwrap();
        assert_eq!(steady_state_measure(&zeros).unwrap().nnz(), 0);
    }

    #[test]
    fn steady_state_stays_put() {
        let f = machine();
        let m = steady_state_matrix(&f).unwrap();
        for (&(a, _), _) in m.entries() {
            for s in 0..f.n_states() {
                if f.update(a, s) == s {
                    let init = InitializedDiscreteSystem { system: f.clone(), initial: s };
                    let inputs = vec![crate::tfs::unflatten(&f.interface().inputs, a).unwrap(); 20];
                    let (states, _) = run_stream(&init, &inputs).unwrap();
                    assert!(states.iter().all(|&x| x == s));
                }
            }
        }
    }
}
