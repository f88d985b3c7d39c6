//! Diagrams with several named inner boxes, and two ways to evaluate them:
//! put everything in parallel and wire once, or fold the slots in one at a
//! time keeping only the wires that are still needed.

use crate::continuous::{cs_apply, cs_parallel, ContinuousSystem};
use crate::discrete::{ds_apply, ds_parallel, wds_apply, wds_parallel, DiscreteSystem, WeightedDiscreteSystem};
use crate::error::{Error, Result};
use crate::linear::{ls_apply, ls_parallel, LinearSystem};
use crate::matrix::{apply, kronecker, Matrix};
use crate::semiring::Semiring;
use crate::tfs::{Interface, PortType, TypedFiniteSet};
use crate::wiring::{Source, Violation, WiringDiagram};

/// Anything boxes can be filled with.
pub trait Interpretation: Sized + Clone {
    fn interface(&self) -> Interface;
    fn parallel(&self, other: &Self) -> Result<Self>;
    fn wire(&self, w: &WiringDiagram) -> Result<Self>;
}

impl Interpretation for DiscreteSystem {
    fn interface(&self) -> Interface {
        DiscreteSystem::interface(self).clone()
    }
    fn parallel(&self, other: &Self) -> Result<Self> {
        ds_parallel(self, other)
    }
    fn wire(&self, w: &WiringDiagram) -> Result<Self> {
        ds_apply(w, self)
    }
}

impl Interpretation for WeightedDiscreteSystem {
    fn interface(&self) -> Interface {
        self.system.interface().clone()
    }
    fn parallel(&self, other: &Self) -> Result<Self> {
        wds_parallel(self, other)
    }
    fn wire(&self, w: &WiringDiagram) -> Result<Self> {
        wds_apply(w, self)
    }
}

impl<R: Semiring> Interpretation for Matrix<R> {
    fn interface(&self) -> Interface {
        Matrix::interface(self)
    }
    fn parallel(&self, other: &Self) -> Result<Self> {
        kronecker(self, other)
    }
    fn wire(&self, w: &WiringDiagram) -> Result<Self> {
        apply(w, self)
    }
}

impl Interpretation for ContinuousSystem {
    fn interface(&self) -> Interface {
        ContinuousSystem::interface(self).clone()
    }
    fn parallel(&self, other: &Self) -> Result<Self> {
        cs_parallel(self, other)
    }
    fn wire(&self, w: &WiringDiagram) -> Result<Self> {
        cs_apply(w, self)
    }
}

impl Interpretation for LinearSystem {
    fn interface(&self) -> Interface {
        LinearSystem::interface(self).clone()
    }
    fn parallel(&self, other: &Self) -> Result<Self> {
        ls_parallel(self, other)
    }
    fn wire(&self, w: &WiringDiagram) -> Result<Self> {
        ls_apply(w, self)
    }
}

/// Source of a wire in a multi-slot diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Wire {
    /// Input port of the outer box.
    Outer(usize),
    /// Output port `.1` of slot `.0`.
    Slot(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plan {
    TensorThenWire,
    SerialChain,
}

impl std::str::FromStr for Plan {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tensor-then-wire" | "tensor" => Ok(Plan::TensorThenWire),
            "serial-chain" | "serial" => Ok(Plan::SerialChain),
            _ => Err(format!("unknown plan `{s}` (expected tensor-then-wire or serial-chain)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiWiring {
    slots: Vec<(String, Interface)>,
    outer: Interface,
    inputs: Vec<Vec<Wire>>,
    outputs: Vec<(usize, usize)>,
}

impl MultiWiring {
    /// `inputs[s][p]` feeds input `p` of slot `s`; `outputs[q]` is the slot
    /// output exposed as outer output `q`.
    pub fn new(
        slots: Vec<(String, Interface)>,
        outer: Interface,
        inputs: Vec<Vec<Wire>>,
        outputs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let mw = Self { slots, outer, inputs, outputs };
        let v = mw.violations();
        if !v.is_empty() {
            return Err(Error::InvalidWiring(v));
        }
        Ok(mw)
    }

    fn source_type(&self, w: Wire) -> Option<(String, &PortType)> {
        match w {
            Wire::Outer(q) if q < self.outer.inputs.len() => {
                let p = self.outer.inputs.port(q);
                Some((p.name.clone(), &p.ty))
            }
            Wire::Slot(s, k) if s < self.slots.len() && k < self.slots[s].1.outputs.len() => {
                let p = self.slots[s].1.outputs.port(k);
                Some((format!("{}.{}", self.slots[s].0, p.name), &p.ty))
            }
            _ => None,
        }
    }

    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        for (i, (name, _)) in self.slots.iter().enumerate() {
            if self.slots[..i].iter().any(|(n, _)| n == name) {
                v.push(Violation { port: name.clone(), source: String::new(), detail: "duplicate slot name".into() });
            }
        }
        if self.inputs.len() != self.slots.len() {
            v.push(Violation { port: "<slots>".into(), source: String::new(), detail: "one input table per slot".into() });
            return v;
        }
        for (s, (name, iface)) in self.slots.iter().enumerate() {
            if self.inputs[s].len() != iface.inputs.len() {
                v.push(Violation {
                    port: name.clone(),
                    source: String::new(),
                    detail: format!("{} wires for {} input ports", self.inputs[s].len(), iface.inputs.len()),
                });
                continue;
            }
            for (p, &w) in self.inputs[s].iter().enumerate() {
                let port = iface.inputs.port(p);
                match self.source_type(w) {
                    None => v.push(Violation {
                        port: format!("{name}.{}", port.name),
                        source: format!("{w:?}"),
                        detail: "source port does not exist".into(),
                    }),
                    Some((src, ty)) if *ty != port.ty => v.push(Violation {
                        port: format!("{name}.{}", port.name),
                        source: src,
                        detail: format!("type {} fed by {}", port.ty, ty),
                    }),
                    _ => {}
                }
            }
        }
        if self.outputs.len() != self.outer.outputs.len() {
            v.push(Violation { port: "<outer outputs>".into(), source: String::new(), detail: "one wire per outer output".into() });
            return v;
        }
        for (q, &(s, k)) in self.outputs.iter().enumerate() {
            let port = self.outer.outputs.port(q);
            match self.source_type(Wire::Slot(s, k)) {
                None => v.push(Violation {
                    port: port.name.clone(),
                    source: format!("slot {s} output {k}"),
                    detail: "source port does not exist".into(),
                }),
                Some((src, ty)) if *ty != port.ty => v.push(Violation {
                    port: port.name.clone(),
                    source: src,
                    detail: format!("type {} fed by {}", port.ty, ty),
                }),
                _ => {}
            }
        }
        v
    }

    pub fn slots(&self) -> &[(String, Interface)] {
        &self.slots
    }

    pub fn outer(&self) -> &Interface {
        &self.outer
    }

    pub fn inputs(&self) -> &[Vec<Wire>] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[(usize, usize)] {
        &self.outputs
    }

    /// One inner box: the slots side by side, ports named `slot.port`.
    pub fn normalize(&self) -> Result<WiringDiagram> {
        let mut ins = Vec::new();
        let mut outs = Vec::new();
        let mut out_off = Vec::new();
        for (name, iface) in &self.slots {
            out_off.push(outs.len());
            for p in iface.inputs.ports() {
                ins.push((format!("{name}.{}", p.name), p.ty.clone()));
            }
            for p in iface.outputs.ports() {
                outs.push((format!("{name}.{}", p.name), p.ty.clone()));
            }
        }
        let inner = Interface::new(TypedFiniteSet::new(ins)?, TypedFiniteSet::new(outs)?);
        let in_map = self
            .inputs
            .iter()
            .flatten()
            .map(|w| match *w {
                Wire::Outer(q) => Source::Outer(q),
                Wire::Slot(s, k) => Source::Inner(out_off[s] + k),
            })
            .collect();
        let out_map = self.outputs.iter().map(|&(s, k)| out_off[s] + k).collect();
        WiringDiagram::new(inner, self.outer.clone(), in_map, out_map)
    }

    fn check_items<T: Interpretation>(&self, items: &[T]) -> Result<()> {
        if items.len() != self.slots.len() || items.is_empty() {
            return Err(Error::BoxMismatch(format!("{} fillers for {} slots", items.len(), self.slots.len())));
        }
        for ((name, iface), it) in self.slots.iter().zip(items) {
            if !iface.same_shape(&it.interface()) {
                return Err(Error::BoxMismatch(format!("filler of slot `{name}` has box {}", it.interface())));
            }
        }
        Ok(())
    }

    pub fn compose<T: Interpretation>(&self, items: &[T], plan: Plan) -> Result<T> {
        self.check_items(items)?;
        match plan {
            Plan::TensorThenWire => {
                let mut acc = items[0].clone();
                for it in &items[1..] {
                    acc = acc.parallel(it)?;
                }
                acc.wire(&self.normalize()?)
            }
            Plan::SerialChain => self.serial(items),
        }
    }

    fn wire_type(&self, w: Wire) -> (String, PortType) {
        let (n, t) = self.source_type(w).expect("validated");
        let name = match w {
            Wire::Outer(_) => format!("in:{n}"),
            Wire::Slot(..) => n,
        };
        (name, t.clone())
    }

    // Inner ports of an intermediate step may share a source, so they are
    // named by position.
    fn serial<T: Interpretation>(&self, items: &[T]) -> Result<T> {
        let last = self.slots.len() - 1;
        let mut cur: Option<T> = None;
        let mut cur_in: Vec<Wire> = Vec::new();
        let mut cur_out: Vec<(usize, usize)> = Vec::new();
        for (n, item) in items.iter().enumerate() {
            let combined = match &cur {
                Some(c) => c.parallel(item)?,
                None => item.clone(),
            };
            let mut inner_in: Vec<Wire> = cur_in.clone();
            inner_in.extend(self.inputs[n].iter().cloned());
            let mut inner_out = cur_out.clone();
            inner_out.extend((0..self.slots[n].1.outputs.len()).map(|k| (n, k)));

            let needed = |key: (usize, usize)| {
                self.outputs.contains(&key)
                    || self.inputs[n + 1..].iter().flatten().any(|w| *w == Wire::Slot(key.0, key.1))
            };
            let (new_out, out_map): (Vec<(usize, usize)>, Vec<usize>) = if n == last {
                (self.outputs.clone(), self.outputs.iter().map(|k| inner_out.iter().position(|x| x == k).unwrap()).collect())
            } else {
                inner_out.iter().enumerate().filter(|(_, k)| needed(**k)).map(|(i, k)| (*k, i)).unzip()
            };
            let mut new_in: Vec<Wire> =
                if n == last { (0..self.outer.inputs.len()).map(Wire::Outer).collect() } else { Vec::new() };
            let mut in_map = Vec::with_capacity(inner_in.len());
            for w in &inner_in {
                match *w {
                    Wire::Slot(j, k) if j <= n => {
                        in_map.push(Source::Inner(inner_out.iter().position(|x| *x == (j, k)).expect("kept")));
                    }
                    _ => {
                        let q = match new_in.iter().position(|x| x == w) {
                            Some(q) => q,
                            None => {
                                new_in.push(*w);
                                new_in.len() - 1
                            }
                        };
                        in_map.push(Source::Outer(q));
                    }
                }
            }
            let tfs = |keys: Vec<(String, PortType)>| TypedFiniteSet::new(keys);
            let inner_iface = Interface::new(
                tfs(inner_in.iter().enumerate().map(|(i, w)| numbered(i, self.wire_type(*w))).collect())?,
                tfs(inner_out.iter().enumerate().map(|(i, &(s, k))| numbered(i, self.wire_type(Wire::Slot(s, k)))).collect())?,
            );
            let outer_iface = if n == last {
                self.outer.clone()
            } else {
                Interface::new(
                    tfs(new_in.iter().map(|w| self.wire_type(*w)).collect())?,
                    tfs(new_out.iter().map(|&(s, k)| self.wire_type(Wire::Slot(s, k))).collect())?,
                )
            };
            let w = WiringDiagram::new(inner_iface, outer_iface, in_map, out_map)?;
            cur = Some(combined.wire(&w)?);
            cur_in = new_in;
            cur_out = new_out;
        }
        Ok(cur.expect("at least one slot"))
    }
}

fn numbered(i: usize, (name, ty): (String, PortType)) -> (String, PortType) {
    (format!("{i}:{name}"), ty)
}
