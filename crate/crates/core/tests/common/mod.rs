#![allow(dead_code)]

use wirecalc_core::discrete::{DiscreteSystem, TableRow};
use wirecalc_core::matrix::Matrix;
use wirecalc_core::plan::{MultiWiring, Wire};
use wirecalc_core::semiring::{NatPlus, StateSet};
use wirecalc_core::tfs::{Interface, PortType, TypedFiniteSet};

pub fn ports(names: &[&str], syms: &[&str]) -> TypedFiniteSet {
    TypedFiniteSet::new(names.iter().map(|n| (n.to_string(), PortType::finite(syms).unwrap())).collect()).unwrap()
}

pub fn tf(names: &[&str]) -> TypedFiniteSet {
    ports(names, &["T", "F"])
}

pub fn nat(rows: &[&[u64]]) -> Vec<Vec<NatPlus>> {
    rows.iter().map(|r| r.iter().map(|&x| NatPlus::Fin(x)).collect()).collect()
}

pub fn nat_matrix(rows: TypedFiniteSet, cols: TypedFiniteSet, data: &[&[u64]]) -> Matrix<NatPlus> {
    Matrix::from_dense(rows, cols, nat(data)).unwrap()
}

pub fn counts(m: &Matrix<NatPlus>) -> Vec<Vec<u64>> {
    m.to_dense()
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| match x {
                    NatPlus::Fin(v) => *v,
                    NatPlus::Inf => u64::MAX,
                })
                .collect()
        })
        .collect()
}

pub fn labels(s: &StateSet) -> Vec<String> {
    let mut v = s.labels();
    v.sort();
    v
}

fn table(iface: Interface, states: &[&str], rows: &[(&str, &str, &str, &str)]) -> DiscreteSystem {
    let split = |s: &str| s.split(',').map(str::to_string).collect::<Vec<_>>();
    let rows: Vec<TableRow> = rows
        .iter()
        .map(|(i, s, o, n)| TableRow { input: split(i), state: s.to_string(), output: split(o), next: n.to_string() })
        .collect();
    let states: Vec<String> = states.iter().map(|s| s.to_string()).collect();
    DiscreteSystem::from_table(iface, &states, &rows).unwrap()
}

pub fn colours() -> TypedFiniteSet {
    ports(&["colour"], &["Red", "Blue", "Green"])
}

pub fn my_state_machine() -> DiscreteSystem {
    table(
        Interface::new(tf(&["a"]), colours()),
        &["1", "2", "3", "4"],
        &[
            ("T", "1", "Blue", "2"),
            ("F", "1", "Blue", "1"),
            ("T", "2", "Red", "2"),
            ("F", "2", "Red", "3"),
            ("T", "3", "Green", "4"),
            ("F", "3", "Green", "4"),
            ("T", "4", "Blue", "1"),
            ("F", "4", "Blue", "4"),
        ],
    )
}

pub fn second_box() -> DiscreteSystem {
    table(
        Interface::new(colours(), ports(&["dir"], &["Up", "Down"])),
        &["p", "q", "r"],
        &[
            ("Red", "p", "Up", "p"),
            ("Blue", "p", "Up", "p"),
            ("Green", "p", "Up", "q"),
            ("Red", "q", "Down", "p"),
            ("Blue", "q", "Down", "r"),
            ("Green", "q", "Down", "q"),
            ("Red", "r", "Up", "q"),
            ("Blue", "r", "Up", "r"),
            ("Green", "r", "Up", "p"),
        ],
    )
}

pub fn chain_w() -> DiscreteSystem {
    table(
        Interface::new(tf(&["in1", "in2"]), tf(&["out"])),
        &["a", "b"],
        &[
            ("T,T", "a", "T", "a"),
            ("T,F", "a", "T", "a"),
            ("F,F", "a", "T", "b"),
            ("F,T", "a", "T", "b"),
            ("T,T", "b", "F", "b"),
            ("F,T", "b", "F", "b"),
            ("F,F", "b", "F", "a"),
            ("T,F", "b", "F", "a"),
        ],
    )
}

pub fn chain_x() -> DiscreteSystem {
    table(
        Interface::new(tf(&["in"]), tf(&["out"])),
        &["1", "2", "3"],
        &[
            ("T", "1", "T", "1"),
            ("F", "1", "T", "2"),
            ("T", "2", "F", "2"),
            ("F", "2", "F", "3"),
            ("T", "3", "F", "1"),
            ("F", "3", "F", "3"),
        ],
    )
}

pub fn chain_y() -> DiscreteSystem {
    table(
        Interface::new(tf(&["in"]), tf(&["out1", "out2"])),
        &["p", "q", "r", "s"],
        &[
            ("T", "p", "T,T", "p"),
            ("F", "p", "T,T", "p"),
            ("T", "q", "T,F", "q"),
            ("F", "q", "T,F", "p"),
            ("T", "r", "F,T", "q"),
            ("F", "r", "F,T", "r"),
            ("T", "s", "F,F", "p"),
            ("F", "s", "F,F", "r"),
        ],
    )
}

/// x boxes chained `n` times on a box with one input and one output.
pub fn x_chain(n: usize) -> MultiWiring {
    let x = chain_x().interface().clone();
    let slots = (1..=n).map(|i| (format!("x{i}"), x.clone())).collect();
    let inputs = (0..n).map(|i| vec![if i == 0 { Wire::Outer(0) } else { Wire::Slot(i - 1, 0) }]).collect();
    MultiWiring::new(slots, Interface::new(tf(&["in"]), tf(&["out"])), inputs, vec![(n - 1, 0)]).unwrap()
}

/// w, then six x boxes, then y; y's second output feeds back into w.
pub fn extended_chain() -> (MultiWiring, Vec<DiscreteSystem>) {
    let mut slots = vec![("w".to_string(), chain_w().interface().clone())];
    let mut systems = vec![chain_w()];
    let mut inputs = vec![vec![Wire::Outer(0), Wire::Slot(7, 1)]];
    for i in 1..=6 {
        slots.push((format!("x{i}"), chain_x().interface().clone()));
        systems.push(chain_x());
        inputs.push(vec![Wire::Slot(i - 1, 0)]);
    }
    slots.push(("y".to_string(), chain_y().interface().clone()));
    systems.push(chain_y());
    inputs.push(vec![Wire::Slot(6, 0)]);
    let outer = Interface::new(tf(&["in"]), tf(&["out"]));
    (MultiWiring::new(slots, outer, inputs, vec![(7, 0)]).unwrap(), systems)
}

/// Six boxes on four outer inputs and four outer outputs.
///   N1 <- (N1, in1); N2 <- (in2); N3 <- (in3, in4, N5); N4 <- (N1, N2);
///   N5 <- (N2, N3); N6 <- (N2, N3, N6); outputs N4, N5, N6, N6.
pub fn figure_one() -> MultiWiring {
    let bx = |n: usize| Interface::new(tf(&["u1", "u2", "u3"][..n]), tf(&["v"]));
    let arity = [2, 1, 3, 2, 2, 3];
    let slots = arity.iter().enumerate().map(|(i, &n)| (format!("N{}", i + 1), bx(n))).collect();
    let s = |i: usize| Wire::Slot(i - 1, 0);
    let o = |i: usize| Wire::Outer(i - 1);
    let inputs = vec![
        vec![s(1), o(1)],
        vec![o(2)],
        vec![o(3), o(4), s(5)],
        vec![s(1), s(2)],
        vec![s(2), s(3)],
        vec![s(2), s(3), s(6)],
    ];
    let outer = Interface::new(tf(&["in1", "in2", "in3", "in4"]), tf(&["out1", "out2", "out3", "out4"]));
    MultiWiring::new(slots, outer, inputs, vec![(3, 0), (4, 0), (5, 0), (5, 0)]).unwrap()
}

use rand::Rng;
use wirecalc_core::continuous::{coordinate_names, ContinuousSystem};
use wirecalc_core::expr::{self, Expr, Func};

/// Random smooth expression over `vars`: sums, products, squares and bounded
/// transcendental calls.
pub fn random_expr<R: Rng>(rng: &mut R, vars: &[String], depth: u32) -> Expr {
    let leaf = |rng: &mut R| {
        if vars.is_empty() || rng.gen_bool(0.3) {
            expr::num(rng.gen_range(-20i32..=20) as f64 / 10.0)
        } else {
            expr::var(&vars[rng.gen_range(0..vars.len())])
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..8) {
        0 | 1 => random_expr(rng, vars, depth - 1) + random_expr(rng, vars, depth - 1),
        2 => random_expr(rng, vars, depth - 1) - random_expr(rng, vars, depth - 1),
        3 => random_expr(rng, vars, depth - 1) * random_expr(rng, vars, depth - 1),
        4 => random_expr(rng, vars, depth - 1).pow(2),
        5 => Expr::call(Func::Sin, random_expr(rng, vars, depth - 1)),
        6 => Expr::call(Func::Tanh, random_expr(rng, vars, depth - 1)),
        _ => Expr::call(Func::Exp, Expr::call(Func::Cos, random_expr(rng, vars, depth - 1))),
    }
}

/// Nonlinear continuous system with random smooth dynamics and readout.
pub fn random_continuous<R: Rng>(rng: &mut R, iface: &Interface, state_dim: usize) -> ContinuousSystem {
    let ins = coordinate_names(&iface.inputs);
    let states: Vec<String> = (0..state_dim).map(|i| format!("x{i}")).collect();
    let all: Vec<String> = ins.iter().chain(&states).cloned().collect();
    let dynamics = (0..state_dim).map(|_| random_expr(rng, &all, 3)).collect();
    let readout = (0..iface.outputs.dims()).map(|_| random_expr(rng, &states, 2)).collect();
    ContinuousSystem::new(iface.clone(), states, dynamics, readout).unwrap()
}
