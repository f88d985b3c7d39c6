//! End-to-end acceptance checks. Runs without the libtest harness and prints
//! one PASS/FAIL line per criterion; exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;

use common::*;
use wirecalc_core::continuous::{
    cs_apply, cs_parallel, euler, steady_states, Discretized, RealSystem, SolveMode, SteadyStates, VectorField, Wired,
};
use wirecalc_core::discrete::{
    ds_apply, ds_parallel, run_stream, steady_state_matrix, steady_state_measure, wds_apply, wds_parallel,
    DiscreteSystem, InitializedDiscreteSystem, WeightedDiscreteSystem,
};
use wirecalc_core::expr::{parse, poly_equal};
use wirecalc_core::instrument;
use wirecalc_core::linear::{classify_stability, linearize_at, ls_apply, ls_parallel, LinearSystem, Stability};
use wirecalc_core::matrix::{apply, kronecker, multiply, partial_trace, Matrix};
use wirecalc_core::plan::{MultiWiring, Plan};
use wirecalc_core::random;
use wirecalc_core::semiring::{NatPlus, RealPlus};
use wirecalc_core::setmat::{smat_apply, smat_count, steady_state_sets, SetMatrix, UnionMode};
use wirecalc_core::tfs::{Interface, Point, TypedFiniteSet};
use wirecalc_core::wiring::{serial_diagram, Source, WiringDiagram};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// Pinned tolerances.
const WEIGHTED_TOL: f64 = 1e-9;
const LINEAR_TOL: f64 = 1e-9;
const CONTINUOUS_TOL: f64 = 1e-12;
const EULER_RESIDUAL: f64 = 1e-12;
const SERIAL_BLOCK_TOL: f64 = 1e-12;
const JACOBIAN_REL: f64 = 1e-4;
const FD_STEP: f64 = 1e-5;
const EXTENDED_BUDGET: Duration = Duration::from_secs(5);
const INSTANCES: u64 = 200;

fn sized(name: &str, n: usize) -> TypedFiniteSet {
    let syms: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let syms: Vec<&str> = syms.iter().map(|s| s.as_str()).collect();
    ports(&[name], &syms)
}

fn two(a: (&str, usize), b: (&str, usize)) -> TypedFiniteSet {
    let t1 = sized(a.0, a.1);
    let t2 = sized(b.0, b.1);
    TypedFiniteSet::new(
        t1.ports().iter().chain(t2.ports()).map(|p| (p.name.clone(), p.ty.clone())).collect(),
    )
    .unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

// ---------------------------------------------------------------- 1

fn matrix_goldens() -> Outcome {
    let a2 = || sized("a", 2);
    let m1 = nat_matrix(a2(), sized("b", 2), &[&[1, 2], &[3, 0]]);
    let m2 = nat_matrix(sized("b", 2), sized("c", 3), &[&[2, 2, 0], &[3, 1, 1]]);
    let p = multiply(&m1, &m2).map_err(|e| e.to_string())?;
    ensure!(counts(&p) == vec![vec![8, 4, 2], vec![6, 6, 0]], "multiply gave {:?}", counts(&p));

    let k2 = nat_matrix(sized("c", 3), sized("d", 2), &[&[2, 2], &[3, 1], &[1, 0]]);
    let k = kronecker(&m1, &k2).map_err(|e| e.to_string())?;
    let want: Vec<Vec<u64>> =
        vec![vec![2, 2, 4, 4], vec![3, 1, 6, 2], vec![1, 0, 2, 0], vec![6, 6, 0, 0], vec![9, 3, 0, 0], vec![3, 0, 0, 0]];
    ensure!(counts(&k) == want, "kronecker gave {:?}", counts(&k));

    let s1 = nat_matrix(a2(), sized("b", 3), &[&[1, 2, 4], &[3, 1, 1]]);
    let outer = Interface::new(a2(), two(("b1", 3), ("b2", 3)));
    let w = WiringDiagram::new(s1.interface(), outer, vec![Source::Outer(0)], vec![0, 0]).map_err(|e| e.to_string())?;
    let n1 = apply(&w, &s1).map_err(|e| e.to_string())?;
    ensure!(
        counts(&n1) == vec![vec![1, 0, 0, 0, 2, 0, 0, 0, 4], vec![3, 0, 0, 0, 1, 0, 0, 0, 1]],
        "split after gave {:?}",
        counts(&n1)
    );

    let s2 = nat_matrix(two(("a1", 2), ("a2", 2)), sized("b", 3), &[&[1, 2, 1], &[3, 0, 1], &[2, 1, 2], &[0, 1, 4]]);
    let outer = Interface::new(a2(), sized("b", 3));
    let w = WiringDiagram::new(s2.interface(), outer, vec![Source::Outer(0), Source::Outer(0)], vec![0])
        .map_err(|e| e.to_string())?;
    let n2 = apply(&w, &s2).map_err(|e| e.to_string())?;
    ensure!(counts(&n2) == vec![vec![1, 2, 1], vec![0, 1, 4]], "split before gave {:?}", counts(&n2));

    let t = nat_matrix(
        two(("a", 2), ("c", 2)),
        two(("b", 3), ("c", 2)),
        &[&[1, 2, 4, 1, 0, 3], &[3, 1, 1, 2, 1, 0], &[1, 2, 1, 0, 3, 2], &[0, 1, 2, 3, 4, 2]],
    );
    let tr = partial_trace(&t, &[(1, 1)]).map_err(|e| e.to_string())?;
    ensure!(counts(&tr) == vec![vec![2, 6, 0], vec![2, 4, 5]], "trace gave {:?}", counts(&tr));
    Ok("multiply, kronecker, both splits and trace exact".into())
}

// ---------------------------------------------------------------- 2

fn series_pair() -> MultiWiring {
    let f = my_state_machine().interface().clone();
    let g = second_box().interface().clone();
    MultiWiring::new(
        vec![("f".into(), f.clone()), ("g".into(), g.clone())],
        Interface::new(f.inputs.clone(), g.outputs.clone()),
        vec![vec![wirecalc_core::plan::Wire::Outer(0)], vec![wirecalc_core::plan::Wire::Slot(0, 0)]],
        vec![(1, 0)],
    )
    .unwrap()
}

/// Steady states found by checking every state against every input.
fn brute_force_counts(f: &DiscreteSystem) -> Vec<Vec<u64>> {
    let na = f.interface().inputs.size().unwrap();
    let nb = f.interface().outputs.size().unwrap();
    let mut out = vec![vec![0u64; nb]; na];
    for a in 0..na {
        for s in 0..f.n_states() {
            if f.update(a, s) == s {
                out[a][f.readout(s)] += 1;
            }
        }
    }
    out
}

fn discrete_goldens() -> Outcome {
    let f = my_state_machine();
    let g = second_box();
    let sf = steady_state_matrix(&f).map_err(|e| e.to_string())?;
    let sg = steady_state_matrix(&g).map_err(|e| e.to_string())?;
    ensure!(counts(&sf) == vec![vec![1, 0, 0], vec![0, 2, 0]], "Stst(f) = {:?}", counts(&sf));
    ensure!(counts(&sg) == vec![vec![1, 0], vec![2, 0], vec![0, 1]], "Stst(g) = {:?}", counts(&sg));
    let prod = multiply(&sf, &sg).map_err(|e| e.to_string())?;
    ensure!(counts(&prod) == vec![vec![1, 0], vec![4, 0]], "product = {:?}", counts(&prod));
    let mw = series_pair();
    let composed = mw.compose(&[f, g], Plan::TensorThenWire).map_err(|e| e.to_string())?;
    ensure!(composed.n_states() == 12, "{} composite states", composed.n_states());
    let brute = brute_force_counts(&composed);
    let total: u64 = brute.iter().flatten().sum();
    ensure!(total == 5, "{total} steady states by enumeration");
    ensure!(brute == counts(&prod), "enumeration classifies as {brute:?}");
    Ok("Stst goldens, product [[1,0],[4,0]], 5 of 12 states by enumeration".into())
}

// ---------------------------------------------------------------- 3

fn stream_golden() -> Outcome {
    let f = my_state_machine();
    let init = InitializedDiscreteSystem::new(f.clone(), "1").map_err(|e| e.to_string())?;
    let inputs: Vec<Point> = ["T", "T", "F", "T", "F"]
        .iter()
        .map(|s| f.interface().inputs.point_from_symbols(&[s]).unwrap())
        .collect();
    let (states, outs) = run_stream(&init, &inputs).map_err(|e| e.to_string())?;
    let states: Vec<String> = states.iter().map(|&s| f.states()[s].to_string()).collect();
    let outs: Vec<String> = outs.iter().map(|&b| f.interface().outputs.label(b)).collect();
    ensure!(states == ["1", "2", "2", "3", "4", "4"], "states {states:?}");
    ensure!(outs == ["Blue", "Red", "Red", "Green", "Blue", "Blue"], "outputs {outs:?}");
    Ok("states 1,2,2,3,4,4 with outputs Blue,Red,Red,Green,Blue,Blue".into())
}

// ---------------------------------------------------------------- 4

fn sets_of(systems: &[DiscreteSystem]) -> Vec<SetMatrix> {
    systems.iter().map(|s| steady_state_sets(s).unwrap()).collect()
}

fn extended_example() -> Outcome {
    let start = Instant::now();
    let x6 = x_chain(6).compose(&sets_of(&vec![chain_x(); 6]), Plan::SerialChain).map_err(|e| e.to_string())?;
    let tf_cell = labels(&x6.get(0, 1));
    ensure!(
        tf_cell == ["111112", "111123", "111233", "112333", "123333", "233333"],
        "x^6 (T,F) = {tf_cell:?}"
    );

    let (mw, systems) = extended_chain();
    let sets = sets_of(&systems);
    let expected: [[Vec<&str>; 2]; 2] = [
        [
            vec![
                "a111111p", "a111111q", "a111112p", "a111123p", "a111233p", "a112333p", "a123333p", "a233333p",
                "b333333p",
            ],
            vec!["a111112r", "a111123r", "a111233r", "a112333r", "a123333r", "a233333r", "b333333r"],
        ],
        [vec!["b333333p"], vec!["b333333r"]],
    ];
    for plan in [Plan::SerialChain, Plan::TensorThenWire] {
        let z = mw.compose(&sets, plan).map_err(|e| e.to_string())?;
        for a in 0..2 {
            for b in 0..2 {
                let got = labels(&z.get(a, b));
                ensure!(got == expected[a][b], "{plan:?}: Stst(z)[{a}][{b}] = {got:?}");
            }
        }
    }

    let composite = mw.compose(&systems, Plan::TensorThenWire).map_err(|e| e.to_string())?;
    ensure!(composite.n_states() == 5832, "{} composite states", composite.n_states());
    let mut brute: [[Vec<String>; 2]; 2] = Default::default();
    for a in 0..2 {
        for s in 0..composite.n_states() {
            if composite.update(a, s) == s {
                brute[a][composite.readout(s)].push(composite.states()[s].to_string());
            }
        }
    }
    for a in 0..2 {
        for b in 0..2 {
            brute[a][b].sort();
            ensure!(brute[a][b] == expected[a][b], "enumeration ({a},{b}) = {:?}", brute[a][b]);
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < EXTENDED_BUDGET, "took {elapsed:?}");
    Ok(format!("cells of sizes 9,7,1,1 under both plans, 5832 states enumerated, {elapsed:.2?}"))
}

// ---------------------------------------------------------------- 5

fn random_finite_system<R: Rng>(rng: &mut R) -> DiscreteSystem {
    let x1 = random::interface(rng, false, 2);
    let f1 = { let n = rng.gen_range(1..=3); random::discrete(rng, &x1, n) }.unwrap();
    if rng.gen_bool(0.5) {
        let x2 = random::interface(rng, false, 1);
        let f2 = { let n = rng.gen_range(1..=3); random::discrete(rng, &x2, n) }.unwrap();
        ds_parallel(&f1, &f2).unwrap()
    } else {
        f1
    }
}

fn random_weights<R: Rng>(rng: &mut R, f: &DiscreteSystem) -> WeightedDiscreteSystem {
    let w = (0..f.n_states()).map(|_| RealPlus::new(rng.gen_range(0.0..2.0)).unwrap()).collect();
    WeightedDiscreteSystem::new(f.clone(), w).unwrap()
}

fn matrices_close(a: &Matrix<RealPlus>, b: &Matrix<RealPlus>, tol: f64) -> bool {
    a.nrows() == b.nrows()
        && a.ncols() == b.ncols()
        && a.to_dense().iter().flatten().zip(b.to_dense().iter().flatten()).all(|(x, y)| (x.value() - y.value()).abs() <= tol)
}

fn sample(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn compositionality() -> Outcome {
    let mut checks = 0u64;
    let mut points = 0u64;
    for seed in 0..INSTANCES {
        let rng = &mut random::rng(seed);
        let f = random_finite_system(rng);
        let phi = random::diagram(rng, f.interface(), 2).unwrap();
        let psi = random::diagram(rng, phi.outer(), 2).unwrap();
        let g = random_finite_system(rng);
        let chi = random::diagram(rng, g.interface(), 2).unwrap();
        let wired = ds_apply(&phi, &f).unwrap();

        // discrete systems: functor and monoidal laws
        let lhs = ds_apply(&psi.compose(&phi).unwrap(), &f).unwrap();
        ensure!(lhs.same_behaviour(&ds_apply(&psi, &wired).unwrap()), "seed {seed}: DS functoriality");
        let par = ds_apply(&phi.sum(&chi).unwrap(), &ds_parallel(&f, &g).unwrap()).unwrap();
        let par2 = ds_parallel(&wired, &ds_apply(&chi, &g).unwrap()).unwrap();
        ensure!(par.update_table() == par2.update_table() && par.readout_table() == par2.readout_table(), "seed {seed}: DS monoidal");

        // steady-state counts
        let m = steady_state_matrix(&f).unwrap();
        ensure!(steady_state_matrix(&wired).unwrap().to_dense() == apply(&phi, &m).unwrap().to_dense(), "seed {seed}: Stst counts");
        let mg = steady_state_matrix(&g).unwrap();
        ensure!(
            steady_state_matrix(&ds_parallel(&f, &g).unwrap()).unwrap().to_dense() == kronecker(&m, &mg).unwrap().to_dense(),
            "seed {seed}: Stst of parallel"
        );

        // semiring matrices: functor and monoidal laws
        let r = random::nat_matrix(rng, f.interface()).unwrap();
        let rg = random::nat_matrix(rng, g.interface()).unwrap();
        ensure!(
            apply(&psi.compose(&phi).unwrap(), &r).unwrap().to_dense() == apply(&psi, &apply(&phi, &r).unwrap()).unwrap().to_dense(),
            "seed {seed}: Mat functoriality"
        );
        ensure!(
            apply(&phi.sum(&chi).unwrap(), &kronecker(&r, &rg).unwrap()).unwrap().to_dense()
                == kronecker(&apply(&phi, &r).unwrap(), &apply(&chi, &rg).unwrap()).unwrap().to_dense(),
            "seed {seed}: Mat monoidal"
        );

        // steady-state sets
        let sf = steady_state_sets(&f).unwrap();
        ensure!(
            steady_state_sets(&wired).unwrap().to_dense() == smat_apply(&phi, &sf, UnionMode::Flat).unwrap().to_dense(),
            "seed {seed}: Stst sets"
        );
        ensure!(
            smat_count(&smat_apply(&phi, &sf, UnionMode::Tagged).unwrap()).to_dense() == apply(&phi, &m).unwrap().to_dense(),
            "seed {seed}: tagged sets count"
        );

        // weighted steady states
        let wf = random_weights(rng, &f);
        let lhs = steady_state_measure(&wds_apply(&phi, &wf).unwrap()).unwrap();
        let rhs = apply(&phi, &steady_state_measure(&wf).unwrap()).unwrap();
        ensure!(matrices_close(&lhs, &rhs, WEIGHTED_TOL), "seed {seed}: weighted Stst");
        let wg = random_weights(rng, &g);
        let lhs = steady_state_measure(&wds_parallel(&wf, &wg).unwrap()).unwrap();
        let rhs = kronecker(&steady_state_measure(&wf).unwrap(), &steady_state_measure(&wg).unwrap()).unwrap();
        ensure!(matrices_close(&lhs, &rhs, WEIGHTED_TOL), "seed {seed}: weighted parallel");

        // linear systems
        let xe = random::interface(rng, true, 2);
        let pe = random::diagram(rng, &xe, 2).unwrap();
        let qe = random::diagram(rng, pe.outer(), 2).unwrap();
        let ye = random::interface(rng, true, 2);
        let re = random::diagram(rng, &ye, 2).unwrap();
        let l = { let n = rng.gen_range(1..=3); random::linear(rng, &xe, n) }.unwrap();
        let l2 = { let n = rng.gen_range(1..=2); random::linear(rng, &ye, n) }.unwrap();
        let d = ls_apply(&qe.compose(&pe).unwrap(), &l).unwrap().max_abs_diff(&ls_apply(&qe, &ls_apply(&pe, &l).unwrap()).unwrap());
        ensure!(d <= LINEAR_TOL, "seed {seed}: linear functoriality off by {d}");
        let d = ls_apply(&pe.sum(&re).unwrap(), &ls_parallel(&l, &l2).unwrap())
            .unwrap()
            .max_abs_diff(&ls_parallel(&ls_apply(&pe, &l).unwrap(), &ls_apply(&re, &l2).unwrap()).unwrap());
        ensure!(d <= LINEAR_TOL, "seed {seed}: linear monoidal off by {d}");

        // continuous systems: symbolic wiring against pointwise wiring, and
        // linearization commuting with wiring
        let c = { let n = rng.gen_range(1..=3); random_continuous(rng, &xe, n) };
        let c2 = random_continuous(rng, &ye, 1);
        let cw = cs_apply(&pe, &c).unwrap();
        let cqp = cs_apply(&qe.compose(&pe).unwrap(), &c).unwrap();
        let cqq = cs_apply(&qe, &cw).unwrap();
        let sem = Wired::new(pe.clone(), VectorField(c.clone())).unwrap();
        let cpar = cs_apply(&pe.sum(&re).unwrap(), &cs_parallel(&c, &c2).unwrap()).unwrap();
        let sem_par =
            wirecalc_core::continuous::Parallel::new(sem_clone(&pe, &c), Wired::new(re.clone(), VectorField(c2.clone())).unwrap()).unwrap();
        for _ in 0..2 {
            let y = sample(rng, pe.outer().inputs.dims());
            let s = sample(rng, c.state_dim());
            let a = cw.dynamics_at(&y, &s).unwrap();
            let b = sem.update(&y, &s).unwrap();
            ensure!(a.iter().zip(&b).all(|(u, v)| rel_close(*u, *v, CONTINUOUS_TOL)), "seed {seed}: CS wiring {a:?} vs {b:?}");
            let ra = cw.readout_at(&s).unwrap();
            let rb = sem.readout(&s).unwrap();
            ensure!(ra.iter().zip(&rb).all(|(u, v)| rel_close(*u, *v, CONTINUOUS_TOL)), "seed {seed}: CS readout");
            let z = sample(rng, qe.outer().inputs.dims());
            let a = cqp.dynamics_at(&z, &s).unwrap();
            let b = cqq.dynamics_at(&z, &s).unwrap();
            ensure!(a.iter().zip(&b).all(|(u, v)| rel_close(*u, *v, CONTINUOUS_TOL)), "seed {seed}: CS functoriality");
            let yy: Vec<f64> = y.iter().cloned().chain(sample(rng, re.outer().inputs.dims())).collect();
            let ss: Vec<f64> = s.iter().cloned().chain(sample(rng, 1)).collect();
            let a = cpar.dynamics_at(&yy, &ss).unwrap();
            let b = sem_par.update(&yy, &ss).unwrap();
            ensure!(a.iter().zip(&b).all(|(u, v)| rel_close(*u, *v, CONTINUOUS_TOL)), "seed {seed}: CS monoidal");
            points += 1;

            let x = pe.in_eval(&Point::Euclid(y.clone()), &Point::Euclid(c.readout_at(&s).unwrap())).unwrap();
            let outer_lin = linearize_at(&cw, &Point::Euclid(y.clone()), &s).unwrap();
            let inner_lin = ls_apply(&pe, &linearize_at(&c, &x, &s).unwrap()).unwrap();
            let d = outer_lin.max_abs_diff(&inner_lin);
            ensure!(d <= LINEAR_TOL * 1f64.max(inner_lin.block().amax()), "seed {seed}: linearization off by {d}");
        }
        checks += 1;
    }
    Ok(format!("{checks} seeded instances per interpretation, {points} continuous sample points per law"))
}

fn sem_clone(w: &WiringDiagram, c: &wirecalc_core::continuous::ContinuousSystem) -> Wired<VectorField> {
    Wired::new(w.clone(), VectorField(c.clone())).unwrap()
}

// ---------------------------------------------------------------- 6

fn euler_compositionality() -> Outcome {
    let mut roots = 0;
    for seed in 0..INSTANCES {
        let rng = &mut random::rng(1000 + seed);
        let x = random::interface(rng, true, 2);
        let w = random::diagram(rng, &x, 2).unwrap();
        let f = { let n = rng.gen_range(1..=3); random::affine_continuous(rng, &x, n) }.unwrap();
        for eps in [0.1, 1.0] {
            let inner_first = Wired::new(w.clone(), Discretized::new(VectorField(f.clone()), eps).unwrap()).unwrap();
            let wire_first = Discretized::new(Wired::new(w.clone(), VectorField(f.clone())).unwrap(), eps).unwrap();
            for _ in 0..3 {
                let y = sample(rng, w.outer().inputs.dims());
                let s = sample(rng, f.state_dim());
                ensure!(
                    inner_first.update(&y, &s).unwrap() == wire_first.update(&y, &s).unwrap(),
                    "seed {seed}: update differs"
                );
                ensure!(inner_first.readout(&s).unwrap() == wire_first.readout(&s).unwrap(), "seed {seed}: readout differs");
            }
        }
        let g = cs_apply(&w, &f).unwrap();
        let y = Point::Euclid(sample(rng, w.outer().inputs.dims()));
        if let SteadyStates::Affine(Some(sol)) = steady_states(&g, &y, &SolveMode::ExactAffine).unwrap() {
            if !sol.basis.is_empty() {
                continue;
            }
            let s = &sol.particular;
            let field = g.dynamics_at(y.real_coords().unwrap(), s).unwrap();
            let fres = field.iter().fold(0f64, |m, v| m.max(v.abs()));
            ensure!(fres < EULER_RESIDUAL, "seed {seed}: field residual {fres}");
            for eps in [0.1, 1.0] {
                let e = euler(&g, eps).unwrap();
                let next = e.update(y.real_coords().unwrap(), s).unwrap();
                let res = next.iter().zip(s).fold(0f64, |m, (a, b)| m.max((a - b).abs()));
                ensure!(res < EULER_RESIDUAL, "seed {seed}: Euler residual {res} at eps {eps}");
            }
            roots += 1;
        }
    }
    ensure!(roots >= 50, "only {roots} isolated affine roots exercised");
    Ok(format!("{INSTANCES} instances bit-identical at eps 0.1 and 1.0, {roots} affine roots are Euler fixed points"))
}

// ---------------------------------------------------------------- 7

fn linear_stability_golden() -> Outcome {
    let inner = Interface::new(
        TypedFiniteSet::euclid(&[("b1", 1), ("a", 1)]).unwrap(),
        TypedFiniteSet::euclid(&[("b2", 1)]).unwrap(),
    );
    let outer = Interface::new(TypedFiniteSet::euclid(&[("a", 1)]).unwrap(), TypedFiniteSet::euclid(&[("b", 1)]).unwrap());
    let phi = WiringDiagram::new(inner.clone(), outer.clone(), vec![Source::Inner(0), Source::Outer(0)], vec![0])
        .map_err(|e| e.to_string())?;
    let dphi = phi.derivative().map_err(|e| e.to_string())?;
    ensure!(dphi.phi_in_d == DMatrix::from_row_slice(2, 1, &[0.0, 1.0]), "Φ_in = {}", dphi.phi_in_d);
    ensure!(dphi.phi_mid_d == DMatrix::from_row_slice(2, 1, &[1.0, 0.0]), "Φ_mid = {}", dphi.phi_mid_d);
    ensure!(dphi.phi_out_d == DMatrix::from_element(1, 1, 1.0), "Φ_out = {}", dphi.phi_out_d);

    let d = LinearSystem::new(
        inner.clone(),
        DMatrix::from_row_slice(1, 2, &[-3.0, 1.0]),
        DMatrix::from_element(1, 1, 2.0),
        DMatrix::from_element(1, 1, 1.0),
    )
    .map_err(|e| e.to_string())?;
    let e = ls_apply(&phi, &d).map_err(|e| e.to_string())?;
    ensure!(e.m_in == DMatrix::from_element(1, 1, 1.0), "E_in = {}", e.m_in);
    ensure!(e.m_mid == DMatrix::from_element(1, 1, -1.0), "E_mid = {}", e.m_mid);
    ensure!(e.m_out == DMatrix::from_element(1, 1, 1.0), "E_out = {}", e.m_out);
    let tol = wirecalc_core::linear::DEFAULT_STABILITY_TOL;
    ensure!(classify_stability(&d, tol).unwrap() == Stability::Unstable, "inner not unstable");
    ensure!(classify_stability(&e, tol).unwrap() == Stability::Stable, "composed not stable");

    let c = wirecalc_core::continuous::ContinuousSystem::new(
        inner,
        vec!["x".into()],
        vec![parse("-3*b1 + a + 2*x").unwrap()],
        vec![parse("x").unwrap()],
    )
    .map_err(|e| e.to_string())?;
    let composed = cs_apply(&phi, &c).map_err(|e| e.to_string())?;
    ensure!(
        poly_equal(&composed.dynamics()[0], &parse("-x + a").unwrap(), 0.0),
        "composed dynamics {}",
        composed.dynamics()[0]
    );
    let lin = linearize_at(&c, &Point::Euclid(vec![0.0, 0.0]), &[0.0]).map_err(|e| e.to_string())?;
    ensure!(lin == d, "linearization of the nonlinear-free system differs from D");
    Ok("E = ([1],[-1],[1]), inner unstable, composed stable, dx/dt = -x + a".into())
}

// ---------------------------------------------------------------- 8

fn serial_linear_law() -> Outcome {
    for seed in 0..INSTANCES {
        let rng = &mut random::rng(2000 + seed);
        let k = rng.gen_range(1..=3);
        let l = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        let (n1, n2) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let x1 = Interface::new(TypedFiniteSet::euclid(&[("u", k)]).unwrap(), TypedFiniteSet::euclid(&[("v", l)]).unwrap());
        let x2 = Interface::new(TypedFiniteSet::euclid(&[("v", l)]).unwrap(), TypedFiniteSet::euclid(&[("z", m)]).unwrap());
        let mut real = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.gen_range(-2.0..2.0));
        let l1 = LinearSystem::new(x1.clone(), real(n1, k), real(n1, n1), real(l, n1)).unwrap();
        let l2 = LinearSystem::new(x2.clone(), real(n2, l), real(n2, n2), real(m, n2)).unwrap();
        let w = serial_diagram(&x1, &x2).unwrap();
        let got = ls_apply(&w, &ls_parallel(&l1, &l2).unwrap()).unwrap();

        let mut mid = DMatrix::zeros(n1 + n2, n1 + n2);
        mid.view_mut((0, 0), (n1, n1)).copy_from(&l1.m_mid);
        mid.view_mut((n1, n1), (n2, n2)).copy_from(&l2.m_mid);
        mid.view_mut((n1, 0), (n2, n1)).copy_from(&(&l2.m_in * &l1.m_out));
        let mut inp = DMatrix::zeros(n1 + n2, k);
        inp.view_mut((0, 0), (n1, k)).copy_from(&l1.m_in);
        let mut out = DMatrix::zeros(m, n1 + n2);
        out.view_mut((0, n1), (m, n2)).copy_from(&l2.m_out);
        let want = LinearSystem::new(w.outer().clone(), inp, mid, out).unwrap();
        let d = got.max_abs_diff(&want);
        ensure!(d <= SERIAL_BLOCK_TOL, "seed {seed}: off by {d}");
    }
    Ok(format!("{INSTANCES} random pairs match the block form, lower-left M2_in M1_out"))
}

// ---------------------------------------------------------------- 9

fn jacobian_oracle() -> Outcome {
    let mut worst = 0f64;
    let mut entries = 0;
    for seed in 0..100u64 {
        let rng = &mut random::rng(3000 + seed);
        let xe = random::interface(rng, true, 2);
        let c = { let n = rng.gen_range(1..=3); random_continuous(rng, &xe, n) };
        let names: Vec<String> = c.input_vars().iter().chain(c.state_vars()).cloned().collect();
        let at = sample(rng, names.len());
        for e in c.dynamics() {
            for (j, v) in names.iter().enumerate() {
                let d = e.diff(v).eval_with(&names, &at).map_err(|e| e.to_string())?;
                let mut hi = at.clone();
                let mut lo = at.clone();
                hi[j] += FD_STEP;
                lo[j] -= FD_STEP;
                let fd = (e.eval_with(&names, &hi).unwrap() - e.eval_with(&names, &lo).unwrap()) / (2.0 * FD_STEP);
                let rel = (d - fd).abs() / 1f64.max(d.abs()).max(fd.abs());
                worst = worst.max(rel);
                ensure!(rel < JACOBIAN_REL, "seed {seed}: d/d{v} of {e} is {d}, finite difference {fd}");
                entries += 1;
            }
        }
    }
    Ok(format!("100 systems, {entries} Jacobian entries, worst relative error {worst:.1e}"))
}

// ---------------------------------------------------------------- 10

fn exponential_savings() -> Outcome {
    let mw = figure_one();
    let mut total = 0u64;
    let mut brute_total = 0u64;
    for seed in 0..10u64 {
        let rng = &mut random::rng(4000 + seed);
        let systems: Vec<DiscreteSystem> =
            mw.slots().iter().map(|(_, iface)| random::discrete(rng, iface, 3).unwrap()).collect();

        instrument::reset();
        let ((tensor, serial), matrix_count) = instrument::counting(|| {
            let ms: Vec<Matrix<NatPlus>> = systems.iter().map(|s| steady_state_matrix(s).unwrap()).collect();
            (mw.compose(&ms, Plan::TensorThenWire).unwrap(), mw.compose(&ms, Plan::SerialChain).unwrap())
        });
        ensure!(matrix_count == 0, "seed {seed}: matrix mode enumerated {matrix_count} composite states");
        ensure!(tensor.nrows() == 16 && tensor.ncols() == 16, "{}x{} matrix", tensor.nrows(), tensor.ncols());
        ensure!(tensor.to_dense() == serial.to_dense(), "seed {seed}: plans disagree");

        let (brute, brute_count) = instrument::counting(|| {
            let composite = mw.compose(&systems, Plan::TensorThenWire).unwrap();
            assert_eq!(composite.n_states(), 729);
            brute_force_counts(&composite)
        });
        ensure!(brute_count >= 729, "seed {seed}: brute-force mode not instrumented");
        ensure!(counts(&tensor) == brute, "seed {seed}: matrix mode disagrees with brute force");
        total += brute.iter().flatten().sum::<u64>();
        brute_total += brute_count;
    }
    ensure!(total > 0, "every sampled composite has an empty steady-state matrix");
    Ok(format!(
        "10 seeded fillings, 16x16 matrices with {total} steady states in all, 0 composite states in matrix mode, {brute_total} by brute force"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("matrix calculus goldens", matrix_goldens),
        ("discrete steady-state goldens", discrete_goldens),
        ("stream processor golden", stream_golden),
        ("extended chain end to end", extended_example),
        ("compositionality suite", compositionality),
        ("Euler compositionality and fixed points", euler_compositionality),
        ("linear stability golden", linear_stability_golden),
        ("serial linear block law", serial_linear_law),
        ("Jacobian against finite differences", jacobian_oracle),
        ("exponential savings", exponential_savings),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
