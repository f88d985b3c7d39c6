//! Matrices of steady-state sets, and set matrices carrying a linear system
//! for every element.

use std::collections::BTreeMap;

use crate::discrete::DiscreteSystem;
use crate::error::{Error, Result};
use crate::instrument;
use crate::linear::{ls_apply, ls_parallel, LinearSystem};
use crate::matrix::{apply, apply_with, kronecker, Matrix, DEFAULT_CAP};
use crate::semiring::{Element, NatPlus, StateSet};
use crate::tfs::Interface;
use crate::wiring::WiringDiagram;

pub type SetMatrix = Matrix<StateSet>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnionMode {
    /// Plain union; overlapping summands are an error.
    Flat,
    /// Each summand's elements are tagged with the inner output index k.
    Tagged,
}

pub fn smat_parallel(m1: &SetMatrix, m2: &SetMatrix) -> Result<SetMatrix> {
    kronecker(m1, m2)
}

pub fn smat_apply(w: &WiringDiagram, m: &SetMatrix, mode: UnionMode) -> Result<SetMatrix> {
    match mode {
        UnionMode::Flat => apply(w, m),
        UnionMode::Tagged => {
            apply_with(w, m, DEFAULT_CAP, |k, v| v.iter().map(|e| e.tagged(k)).collect())
        }
    }
}

/// Entry-wise cardinality.
pub fn smat_count(m: &SetMatrix) -> Matrix<NatPlus> {
    m.map(|s| NatPlus::Fin(s.len() as u64))
}

/// Keep only the innermost tag of every element. Two tagged application
/// chains describing the same composite agree after this.
pub fn innermost_tags(m: &SetMatrix) -> SetMatrix {
    m.map(|s| {
        s.iter()
            .map(|e| Element { tag: e.tag.last().map(|&t| vec![t]).unwrap_or_default(), atoms: e.atoms.clone() })
            .collect()
    })
}

/// Entry (a, b) is the set of states with readout b fixed by input a.
pub fn steady_state_sets(f: &DiscreteSystem) -> Result<SetMatrix> {
    if f.components() > 1 {
        instrument::record_composite_states(f.n_states() as u64);
    }
    let iface = f.interface();
    let mut m = SetMatrix::zeros(iface.inputs.clone(), iface.outputs.clone())?;
    for a in 0..iface.inputs.size()? {
        for s in 0..f.n_states() {
            if f.update(a, s) == s {
                m.add_at(a, f.readout(s), &StateSet::singleton(f.states()[s].clone()))?;
            }
        }
    }
    Ok(m)
}

/// A set matrix on a Finite box together with a linear system, on an
/// equally structured Euclid box, for every element of every entry.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    base: SetMatrix,
    payload_iface: Interface,
    payload: BTreeMap<(usize, usize, Element), LinearSystem>,
}

impl QMatrix {
    pub fn new(
        base: SetMatrix,
        payload_iface: Interface,
        payload: BTreeMap<(usize, usize, Element), LinearSystem>,
    ) -> Result<Self> {
        let count: usize = base.entries().map(|(_, s)| s.len()).sum();
        if count != payload.len() {
            return Err(Error::InvalidSystem(format!(
                "{} payloads for {} elements",
                payload.len(),
                count
            )));
        }
        for (&(i, j), s) in base.entries() {
            for e in s.iter() {
                let l = payload
                    .get(&(i, j, e.clone()))
                    .ok_or_else(|| Error::InvalidSystem(format!("no payload for {e} at ({i},{j})")))?;
                if !l.interface().same_shape(&payload_iface) {
                    return Err(Error::BoxMismatch(format!("payload of {e} lives on {}", l.interface())));
                }
            }
        }
        Ok(Self { base, payload_iface, payload })
    }

    pub fn base(&self) -> &SetMatrix {
        &self.base
    }

    pub fn payload_interface(&self) -> &Interface {
        &self.payload_iface
    }

    pub fn payload(&self, i: usize, j: usize, e: &Element) -> Option<&LinearSystem> {
        self.payload.get(&(i, j, e.clone()))
    }

    pub fn payloads(&self) -> impl Iterator<Item = (&(usize, usize, Element), &LinearSystem)> {
        self.payload.iter()
    }
}

pub fn qmat_parallel(q1: &QMatrix, q2: &QMatrix) -> Result<QMatrix> {
    let base = smat_parallel(&q1.base, &q2.base)?;
    let (r2, c2) = (q2.base.nrows(), q2.base.ncols());
    let mut payload = BTreeMap::new();
    for ((i1, j1, e1), l1) in &q1.payload {
        for ((i2, j2, e2), l2) in &q2.payload {
            payload.insert((i1 * r2 + i2, j1 * c2 + j2, e1.pair(e2)), ls_parallel(l1, l2)?);
        }
    }
    QMatrix::new(base, q1.payload_iface.sum(&q2.payload_iface)?, payload)
}

/// Apply `w` to the base and its Euclid twin `w_payload` (same tables) to
/// every payload.
pub fn qmat_apply(w: &WiringDiagram, w_payload: &WiringDiagram, q: &QMatrix) -> Result<QMatrix> {
    if w.in_map() != w_payload.in_map() || w.out_map() != w_payload.out_map() {
        return Err(Error::BoxMismatch("payload diagram does not have the same tables".into()));
    }
    if !w_payload.inner().same_shape(&q.payload_iface) {
        return Err(Error::BoxMismatch(format!(
            "payloads live on {} but diagram expects {}",
            q.payload_iface,
            w_payload.inner()
        )));
    }
    let base = smat_apply(w, &q.base, UnionMode::Flat)?;
    let ev = w.flat_evaluator()?;
    let mut payload = BTreeMap::new();
    for ((row, k, e), l) in &q.payload {
        let xd = ev.x_digits(*k);
        let j = ev.out_eval_digits(&xd);
        for i in 0..ev.y_size {
            if ev.in_eval_digits(&ev.y_digits(i), &xd) == *row {
                payload.insert((i, j, e.clone()), ls_apply(w_payload, l)?);
            }
        }
    }
    QMatrix::new(base, w_payload.outer().clone(), payload)
}
