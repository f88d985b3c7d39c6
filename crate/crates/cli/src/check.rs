//! `check-compositional`: evaluate every composite both ways and compare.
//!
//! Discrete composites are built under both plans, then their steady-state
//! matrices are compared with those composed from the parts. Continuous and
//! linear composites are compared between plans numerically.

use rand::Rng;
use wirecalc_core::discrete::{steady_state_matrix, steady_state_measure};
use wirecalc_core::matrix::Matrix;
use wirecalc_core::plan::Plan;
use wirecalc_core::random;
use wirecalc_core::semiring::Semiring;
use wirecalc_core::setmat::steady_state_sets;
use wirecalc_core::tfs::{Interface, PortType, TypedFiniteSet};

use crate::ast::*;
use crate::commands::Outcome;
use crate::load::{self, Env, Kind, Res, Value};
use crate::render::{Cell, Format};
use crate::syntax::{parse_workspace, print_workspace};

pub const WEIGHT_TOL: f64 = 1e-9;
pub const LINEAR_TOL: f64 = 1e-9;
pub const CONTINUOUS_TOL: f64 = 1e-12;
const SAMPLES: usize = 50;

const PLANS: [Plan; 2] = [Plan::TensorThenWire, Plan::SerialChain];

fn same_cells<R: Semiring + Cell>(a: &Matrix<R>, b: &Matrix<R>) -> bool {
    a.nrows() == b.nrows()
        && a.ncols() == b.ncols()
        && a.to_dense().iter().flatten().zip(b.to_dense().iter().flatten()).all(|(x, y)| x.cell() == y.cell())
}

fn close(a: &Matrix<wirecalc_core::semiring::RealPlus>, b: &Matrix<wirecalc_core::semiring::RealPlus>, tol: f64) -> bool {
    a.to_dense().iter().flatten().zip(b.to_dense().iter().flatten()).all(|(x, y)| {
        let (x, y) = (x.value(), y.value());
        x == y || (x - y).abs() <= tol * 1f64.max(x.abs())
    })
}

/// Check one composite; the string describes what was compared.
pub fn check_composite(env: &Env, name: &str, seed: u64) -> Res<Result<String, String>> {
    let kind = env.kind(name)?;
    let fail = |what: &str| Ok(Err(format!("{what} differ")));
    match kind {
        Kind::Discrete => {
            let [t, s] = PLANS.map(|p| env.discrete(name, p));
            let (t, s) = (t?, s?);
            if !t.same_behaviour(&s) {
                return fail("composite systems from the two plans");
            }
            let direct = steady_state_matrix(&t).map_err(|e| e.to_string())?;
            let direct_sets = steady_state_sets(&t).map_err(|e| e.to_string())?;
            for p in PLANS {
                if !same_cells(&direct, &env.stst(name, p)?) {
                    return fail("steady-state counts");
                }
                if !same_cells(&direct_sets, &env.stst_sets(name, p)?) {
                    return fail("steady-state sets");
                }
            }
            Ok(Ok(format!("discrete, {} states", t.n_states())))
        }
        Kind::Weighted => {
            let t = env.weighted(name, Plan::TensorThenWire)?;
            let s = env.weighted(name, Plan::SerialChain)?;
            if !t.system.same_behaviour(&s.system) || t.weights != s.weights {
                return fail("weighted composites from the two plans");
            }
            let direct = steady_state_measure(&t).map_err(|e| e.to_string())?;
            for p in PLANS {
                if !close(&direct, &env.stst_measure(name, p)?, WEIGHT_TOL) {
                    return fail("steady-state measures");
                }
            }
            Ok(Ok(format!("weighted, {} states", t.system.n_states())))
        }
        Kind::Nat => {
            if !same_cells(&env.nat(name, Plan::TensorThenWire)?, &env.nat(name, Plan::SerialChain)?) {
                return fail("nat matrices");
            }
            Ok(Ok("nat matrix".into()))
        }
        Kind::Real => {
            if !close(&env.real(name, Plan::TensorThenWire)?, &env.real(name, Plan::SerialChain)?, WEIGHT_TOL) {
                return fail("real matrices");
            }
            Ok(Ok("real matrix".into()))
        }
        Kind::Linear => {
            let t = env.linear(name, Plan::TensorThenWire)?;
            let s = env.linear(name, Plan::SerialChain)?;
            let d = t.max_abs_diff(&s);
            if d > LINEAR_TOL {
                return Ok(Err(format!("linear composites differ by {d:e}")));
            }
            Ok(Ok(format!("linear, state dimension {}", t.state_dim())))
        }
        Kind::Continuous => {
            let t = env.continuous(name, Plan::TensorThenWire)?;
            let s = env.continuous(name, Plan::SerialChain)?;
            let mut rng = random::rng(seed);
            let (k, n) = (t.input_vars().len(), t.state_dim());
            if s.input_vars().len() != k || s.state_dim() != n {
                return fail("continuous composite shapes");
            }
            let near = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(a, b)| (a - b).abs() <= CONTINUOUS_TOL * 1f64.max(a.abs()));
            for _ in 0..SAMPLES {
                let a: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let e = |r: wirecalc_core::Result<Vec<f64>>| r.map_err(|e| e.to_string());
                if !near(&e(t.dynamics_at(&a, &x))?, &e(s.dynamics_at(&a, &x))?) || !near(&e(t.readout_at(&x))?, &e(s.readout_at(&x))?) {
                    return fail("continuous composites at a sample point");
                }
            }
            Ok(Ok(format!("continuous, {SAMPLES} sample points")))
        }
    }
}

/// Check every composite in a loaded workspace.
pub fn check_env(env: &Env, format: Format) -> Outcome {
    let mut out = Outcome::default();
    let mut any = false;
    for (i, name) in env.order.iter().enumerate() {
        if !matches!(env.values[name], Value::Composite(_)) {
            continue;
        }
        any = true;
        match check_composite(env, name, i as u64) {
            Ok(Ok(what)) => {
                if format == Format::Text {
                    out.stdout.push_str(&format!("{name}: ok ({what})\n"));
                } else {
                    out.stdout.push_str(&format!("{name} ok\n"));
                }
            }
            Ok(Err(why)) => {
                out.stdout.push_str(&format!("{name}: MISMATCH {why}\n"));
                out.code = 1;
            }
            Err(e) => {
                out.stderr.push_str(&format!("error: {name}: {e}\n"));
                out.code = 1;
            }
        }
    }
    if !any && format == Format::Text {
        out.stdout.push_str("no composites to check\n");
    }
    out
}

fn box_from(name: &str, iface: &Interface) -> Item {
    Item::Box(load::box_decl(name, iface))
}

/// Random slot boxes, a wiring `wname` onto a fresh outer box, and the slot
/// interfaces.
fn random_wiring<R: Rng>(rng: &mut R, prefix: &str, euclid: bool, items: &mut Vec<Item>) -> Vec<Interface> {
    let n = rng.gen_range(1..=3);
    let ifaces: Vec<Interface> = (0..n).map(|_| random::interface(rng, euclid, 2)).collect();
    for (i, b) in ifaces.iter().enumerate() {
        items.push(box_from(&format!("{prefix}{i}"), b));
    }
    let slot_outputs: Vec<(String, String, PortType)> = ifaces
        .iter()
        .enumerate()
        .flat_map(|(i, b)| b.outputs.ports().iter().map(move |p| (format!("s{i}"), p.name.clone(), p.ty.clone())))
        .collect();
    let mut outer_in: Vec<PortType> = Vec::new();
    let mut links = Vec::new();
    let pr = |owner: &str, port: &str| PortRef { pos: Pos::default(), owner: owner.into(), port: port.into() };
    let outer = format!("{prefix}out");
    for (i, b) in ifaces.iter().enumerate() {
        for p in b.inputs.ports() {
            let fits: Vec<&(String, String, PortType)> = slot_outputs.iter().filter(|o| o.2 == p.ty).collect();
            let source = if fits.is_empty() || rng.gen_bool(0.3) {
                let reuse: Vec<usize> = (0..outer_in.len()).filter(|&q| outer_in[q] == p.ty).collect();
                let q = if !reuse.is_empty() && rng.gen_bool(0.5) {
                    reuse[rng.gen_range(0..reuse.len())]
                } else {
                    outer_in.push(p.ty.clone());
                    outer_in.len() - 1
                };
                pr(&outer, &format!("y{q}"))
            } else {
                let o = fits[rng.gen_range(0..fits.len())];
                pr(&o.0, &o.1)
            };
            links.push(Link { pos: Pos::default(), target: pr(&format!("s{i}"), &p.name), source });
        }
    }
    let n_out = if slot_outputs.is_empty() { 0 } else { rng.gen_range(0..=2) };
    let mut outer_out = Vec::new();
    for j in 0..n_out {
        let o = &slot_outputs[rng.gen_range(0..slot_outputs.len())];
        outer_out.push((format!("z{j}"), o.2.clone()));
        links.push(Link { pos: Pos::default(), target: pr(&outer, &format!("z{j}")), source: pr(&o.0, &o.1) });
    }
    let ins = TypedFiniteSet::new(outer_in.into_iter().enumerate().map(|(q, t)| (format!("y{q}"), t)).collect()).expect("distinct");
    let outs = TypedFiniteSet::new(outer_out).expect("distinct");
    items.push(box_from(&outer, &Interface::new(ins, outs)));
    let slots = (0..n).map(|i| Slot { pos: Pos::default(), name: format!("s{i}"), box_name: format!("{prefix}{i}") }).collect();
    items.push(Item::Wiring(WiringDecl { pos: Pos::default(), name: format!("{prefix}wiring"), slots, outer, links }));
    ifaces
}

fn compose_item(name: &str, wiring: &str, fillers: Vec<String>) -> Item {
    Item::Compose(ComposeDecl { pos: Pos::default(), name: name.into(), wiring: wiring.into(), fillers })
}

/// A seeded workspace with one finite and one Euclidean wiring, filled with
/// discrete, weighted, matrix, continuous and linear systems.
pub fn random_workspace(seed: u64) -> Workspace {
    let mut rng = random::rng(seed);
    let mut items = Vec::new();
    let fin = random_wiring(&mut rng, "B", false, &mut items);
    let (mut ds, mut ms, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    for (i, b) in fin.iter().enumerate() {
        let n = rng.gen_range(1..=3);
        let d = random::discrete(&mut rng, b, n).expect("random discrete");
        items.push(Item::Discrete(load::discrete_decl(&format!("d{i}"), &format!("B{i}"), &d).expect("finite")));
        let m = random::nat_matrix(&mut rng, b).expect("random matrix");
        items.push(Item::Matrix(load::nat_decl(&format!("m{i}"), &format!("B{i}"), &m)));
        let mut weights = Vec::new();
        for s in 0..n {
            if rng.gen_bool(0.5) {
                weights.push((format!("q{s}"), rng.gen_range(0..8) as f64 / 4.0));
            }
        }
        items.push(Item::Weighted(WeightedDecl { pos: Pos::default(), name: format!("w{i}"), system: format!("d{i}"), weights }));
        ds.push(format!("d{i}"));
        ms.push(format!("m{i}"));
        ws.push(format!("w{i}"));
    }
    items.push(compose_item("zd", "Bwiring", ds));
    items.push(compose_item("zm", "Bwiring", ms));
    items.push(compose_item("zw", "Bwiring", ws));
    let euc = random_wiring(&mut rng, "E", true, &mut items);
    let (mut cs, mut ls) = (Vec::new(), Vec::new());
    for (i, b) in euc.iter().enumerate() {
        let n = rng.gen_range(1..=2);
        let c = random::affine_continuous(&mut rng, b, n).expect("random continuous");
        items.push(Item::Continuous(load::continuous_decl(&format!("c{i}"), &format!("E{i}"), &c)));
        let l = random::linear(&mut rng, b, n).expect("random linear");
        items.push(Item::Linear(load::linear_decl(&format!("l{i}"), &format!("E{i}"), &l)));
        cs.push(format!("c{i}"));
        ls.push(format!("l{i}"));
    }
    items.push(compose_item("zc", "Ewiring", cs));
    items.push(compose_item("zl", "Ewiring", ls));
    Workspace { items }
}

/// Generate, print, reparse and check `count` workspaces from `seed` on.
pub fn random_workspaces(seed: u64, count: usize, format: Format) -> Outcome {
    let mut out = Outcome::default();
    for k in 0..count as u64 {
        let s = seed + k;
        let text = print_workspace(&random_workspace(s));
        let origin = format!("<seed {s}>");
        let reparsed = parse_workspace(&text).map(|ws| (print_workspace(&ws) == text, ws));
        let env = match reparsed {
            Ok((true, ws)) => load::load(&ws).map_err(|ds| ds.iter().map(|d| format!("{origin}:{d}\n")).collect::<String>()),
            Ok((false, _)) => Err(format!("{origin}: printing is not stable\n")),
            Err(ds) => Err(ds.iter().map(|d| format!("{origin}:{d}\n")).collect()),
        };
        match env {
            Ok(env) => {
                let r = check_env(&env, format);
                if r.code == 0 {
                    out.stdout.push_str(&format!("seed {s}: ok\n"));
                } else {
                    out.stdout.push_str(&format!("seed {s}: FAILED\n"));
                }
                if format == Format::Text || r.code != 0 {
                    for line in r.stdout.lines() {
                        out.stdout.push_str(&format!("  {line}\n"));
                    }
                }
                out.stderr.push_str(&r.stderr);
                out.code = out.code.max(r.code);
            }
            Err(e) => {
                out.stdout.push_str(&format!("seed {s}: FAILED\n"));
                out.stderr.push_str(&e);
                out.code = 1;
            }
        }
    }
    out
}
