//! Seeded generators for boxes, diagrams and systems, used by the
//! compositionality checker and the property tests.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::continuous::{coordinate_names, ContinuousSystem};
use crate::discrete::DiscreteSystem;
use crate::error::Result;
use crate::expr;
use crate::linear::LinearSystem;
use crate::matrix::Matrix;
use crate::semiring::{Element, NatPlus};
use crate::tfs::{Interface, PortType, TypedFiniteSet};
use crate::wiring::{Source, WiringDiagram};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Alphabets `{s0 .. s(k-1)}` with k in 1..=3.
pub fn finite_type<R: Rng>(rng: &mut R) -> PortType {
    let k = rng.gen_range(1..=3);
    let syms: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
    PortType::finite(&syms).expect("nonempty")
}

pub fn euclid_type<R: Rng>(rng: &mut R) -> PortType {
    PortType::Euclid(rng.gen_range(1..=2))
}

fn tfs_of(prefix: &str, types: Vec<PortType>) -> TypedFiniteSet {
    TypedFiniteSet::new(types.into_iter().enumerate().map(|(i, t)| (format!("{prefix}{i}"), t)).collect())
        .expect("distinct names")
}

pub fn interface<R: Rng>(rng: &mut R, euclid: bool, max_ports: usize) -> Interface {
    let gen = |rng: &mut R| if euclid { euclid_type(rng) } else { finite_type(rng) };
    let ni = rng.gen_range(0..=max_ports);
    let no = rng.gen_range(0..=max_ports);
    let ins = (0..ni).map(|_| gen(rng)).collect();
    let outs = (0..no).map(|_| gen(rng)).collect();
    Interface::new(tfs_of("i", ins), tfs_of("o", outs))
}

/// A diagram with the given inner box and a freshly drawn outer box. Each
/// inner input picks a type-compatible source among outer inputs and inner
/// outputs; outer inputs are added when nothing fits.
pub fn diagram<R: Rng>(rng: &mut R, inner: &Interface, max_outer_outputs: usize) -> Result<WiringDiagram> {
    let mut outer_in: Vec<PortType> = Vec::new();
    for p in inner.inputs.ports() {
        if rng.gen_bool(0.5) {
            outer_in.push(p.ty.clone());
        }
    }
    let mut in_map = Vec::new();
    for p in inner.inputs.ports() {
        let mut cands: Vec<Source> = Vec::new();
        cands.extend(outer_in.iter().enumerate().filter(|(_, t)| **t == p.ty).map(|(q, _)| Source::Outer(q)));
        cands.extend(
            inner.outputs.ports().iter().enumerate().filter(|(_, o)| o.ty == p.ty).map(|(k, _)| Source::Inner(k)),
        );
        let s = match cands.choose(rng) {
            Some(s) => *s,
            None => {
                outer_in.push(p.ty.clone());
                Source::Outer(outer_in.len() - 1)
            }
        };
        in_map.push(s);
    }
    let mut out_map = Vec::new();
    if !inner.outputs.is_empty() {
        for _ in 0..rng.gen_range(0..=max_outer_outputs) {
            out_map.push(rng.gen_range(0..inner.outputs.len()));
        }
    }
    let outer_out = out_map.iter().map(|&k| inner.outputs.port(k).ty.clone()).collect();
    let outer = Interface::new(tfs_of("y", outer_in), tfs_of("z", outer_out));
    WiringDiagram::new(inner.clone(), outer, in_map, out_map)
}

pub fn discrete<R: Rng>(rng: &mut R, iface: &Interface, n_states: usize) -> Result<DiscreteSystem> {
    let nb = iface.outputs.size()?;
    let na = iface.inputs.size()?;
    let states = (0..n_states).map(|i| Element::atom(&format!("q{i}"))).collect();
    let readout = (0..n_states).map(|_| rng.gen_range(0..nb)).collect();
    let update = (0..na * n_states).map(|_| rng.gen_range(0..n_states)).collect();
    DiscreteSystem::new(iface.clone(), states, readout, update)
}

/// Sparse matrix with small counts.
pub fn nat_matrix<R: Rng>(rng: &mut R, iface: &Interface) -> Result<Matrix<NatPlus>> {
    let mut m = Matrix::zeros(iface.inputs.clone(), iface.outputs.clone())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if rng.gen_bool(0.4) {
                m.set(i, j, NatPlus::Fin(rng.gen_range(1..4)));
            }
        }
    }
    Ok(m)
}

fn small_int<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(-3i32..=3) as f64
}

/// Affine dynamics and linear readout with small integer coefficients.
pub fn affine_continuous<R: Rng>(rng: &mut R, iface: &Interface, state_dim: usize) -> Result<ContinuousSystem> {
    let ins = coordinate_names(&iface.inputs);
    let states: Vec<String> = (0..state_dim).map(|i| format!("x{i}")).collect();
    let combo = |rng: &mut R, vars: &[String], constant: bool| {
        let mut e = if constant { expr::num(small_int(rng)) } else { expr::num(0.0) };
        for v in vars {
            let c = small_int(rng);
            if c != 0.0 {
                e = e + expr::num(c) * expr::var(v);
            }
        }
        e.simplify()
    };
    let all: Vec<String> = ins.iter().chain(&states).cloned().collect();
    let dynamics = (0..state_dim).map(|_| combo(rng, &all, true)).collect();
    let readout = (0..iface.outputs.dims()).map(|_| combo(rng, &states, false)).collect();
    ContinuousSystem::new(iface.clone(), states, dynamics, readout)
}

pub fn linear<R: Rng>(rng: &mut R, iface: &Interface, state_dim: usize) -> Result<LinearSystem> {
    let (k, l) = (iface.inputs.dims(), iface.outputs.dims());
    let mut m = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| small_int(rng));
    let m_in = m(state_dim, k);
    let m_mid = m(state_dim, state_dim);
    let m_out = m(l, state_dim);
    LinearSystem::new(iface.clone(), m_in, m_mid, m_out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagrams_are_valid_and_seeded() {
        for seed in 0..50 {
            let mut r = rng(seed);
            let x = interface(&mut r, seed % 2 == 0, 3);
            let w = diagram(&mut r, &x, 3).unwrap();
            let mut r2 = rng(seed);
            let x2 = interface(&mut r2, seed % 2 == 0, 3);
            assert_eq!(w, diagram(&mut r2, &x2, 3).unwrap());
        }
    }
}
