//! Continuous open dynamical systems given by expressions: a parameterized
//! vector field on R^n and a readout, plus Euler discretization and steady
//! state search.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};

use crate::dense::solve_affine;
use crate::error::{Error, Result};
use crate::expr::{num, var, Expr};
use crate::tfs::{Interface, Point, TypedFiniteSet};
use crate::wiring::{Source, WiringDiagram};

/// Coordinate variable names for a Euclid port set: the port name for a
/// 1-dimensional port, `name_1 .. name_d` otherwise.
pub fn coordinate_names(t: &TypedFiniteSet) -> Vec<String> {
    let mut out = Vec::new();
    for p in t.ports() {
        let d = p.ty.width();
        if d == 1 {
            out.push(p.name.clone());
        } else {
            out.extend((1..=d).map(|i| format!("{}_{i}", p.name)));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSystem {
    iface: Interface,
    input_vars: Vec<String>,
    state_vars: Vec<String>,
    dynamics: Vec<Expr>,
    readout: Vec<Expr>,
}

impl ContinuousSystem {
    /// Input variables are named after the input ports.
    pub fn new(iface: Interface, state_vars: Vec<String>, dynamics: Vec<Expr>, readout: Vec<Expr>) -> Result<Self> {
        let input_vars = coordinate_names(&iface.inputs);
        Self::with_vars(iface, input_vars, state_vars, dynamics, readout)
    }

    pub fn with_vars(
        iface: Interface,
        input_vars: Vec<String>,
        state_vars: Vec<String>,
        dynamics: Vec<Expr>,
        readout: Vec<Expr>,
    ) -> Result<Self> {
        if !iface.is_euclid() {
            return Err(Error::WrongInterpretation("continuous systems need Euclid ports".into()));
        }
        if input_vars.len() != iface.inputs.dims() {
            return Err(Error::InvalidSystem(format!(
                "{} input variables for {} input dimensions",
                input_vars.len(),
                iface.inputs.dims()
            )));
        }
        if dynamics.len() != state_vars.len() {
            return Err(Error::InvalidSystem(format!(
                "{} dynamics components for {} state variables",
                dynamics.len(),
                state_vars.len()
            )));
        }
        if readout.len() != iface.outputs.dims() {
            return Err(Error::InvalidSystem(format!(
                "{} readout components for {} output dimensions",
                readout.len(),
                iface.outputs.dims()
            )));
        }
        let mut seen = BTreeSet::new();
        for v in input_vars.iter().chain(&state_vars) {
            if !seen.insert(v.clone()) {
                return Err(Error::InvalidSystem(format!("variable `{v}` declared twice")));
            }
        }
        for (i, e) in dynamics.iter().enumerate() {
            if let Some(v) = e.free_vars().into_iter().find(|v| !seen.contains(v)) {
                return Err(Error::InvalidSystem(format!("dynamics of `{}` uses unknown `{v}`", state_vars[i])));
            }
        }
        for e in &readout {
            if let Some(v) = e.free_vars().into_iter().find(|v| !state_vars.contains(v)) {
                return Err(Error::InvalidSystem(format!("readout may only use state variables, found `{v}`")));
            }
        }
        Ok(Self { iface, input_vars, state_vars, dynamics, readout })
    }

    pub fn interface(&self) -> &Interface {
        &self.iface
    }

    pub fn input_vars(&self) -> &[String] {
        &self.input_vars
    }

    pub fn state_vars(&self) -> &[String] {
        &self.state_vars
    }

    pub fn state_dim(&self) -> usize {
        self.state_vars.len()
    }

    pub fn dynamics(&self) -> &[Expr] {
        &self.dynamics
    }

    pub fn readout(&self) -> &[Expr] {
        &self.readout
    }

    fn env<'a>(&'a self, a: &'a [f64], s: &'a [f64]) -> impl Fn(&str) -> Option<f64> + 'a {
        move |n: &str| {
            if let Some(i) = self.state_vars.iter().position(|v| v == n) {
                return Some(s[i]);
            }
            self.input_vars.iter().position(|v| v == n).map(|i| a[i])
        }
    }

    fn check_dims(&self, a: &[f64], s: &[f64]) -> Result<()> {
        if a.len() != self.input_vars.len() || s.len() != self.state_vars.len() {
            return Err(Error::InvalidPoint(format!(
                "expected {} inputs and {} states, got {} and {}",
                self.input_vars.len(),
                self.state_vars.len(),
                a.len(),
                s.len()
            )));
        }
        Ok(())
    }

    pub fn dynamics_at(&self, a: &[f64], s: &[f64]) -> Result<Vec<f64>> {
        self.check_dims(a, s)?;
        let env = self.env(a, s);
        self.dynamics.iter().map(|e| e.eval(&env)).collect()
    }

    pub fn readout_at(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.check_dims(&vec![0.0; self.input_vars.len()], s)?;
        let env = self.env(&[], s);
        self.readout.iter().map(|e| e.eval(&env)).collect()
    }

    /// Jacobian of the dynamics with respect to the named variables.
    pub fn jacobian_exprs(&self, wrt: &[String]) -> Vec<Vec<Expr>> {
        self.dynamics.iter().map(|e| wrt.iter().map(|v| e.diff(v)).collect()).collect()
    }

    pub fn is_affine(&self) -> bool {
        self.dynamics.iter().all(|e| e.is_affine_in(&self.state_vars))
    }
}

fn fresh(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (2..).map(|i| format!("{base}_{i}")).find(|n| !taken.contains(n)).unwrap()
}

/// State space is the product; variables of `f2` are renamed on collision.
pub fn cs_parallel(f1: &ContinuousSystem, f2: &ContinuousSystem) -> Result<ContinuousSystem> {
    let iface = f1.iface.sum(&f2.iface)?;
    let mut taken: BTreeSet<String> = f1.input_vars.iter().chain(&f1.state_vars).cloned().collect();
    let mut ren = BTreeMap::new();
    for v in f2.input_vars.iter().chain(&f2.state_vars) {
        let n = fresh(v, &taken);
        taken.insert(n.clone());
        ren.insert(v.clone(), n);
    }
    let mut input_vars = f1.input_vars.clone();
    input_vars.extend(f2.input_vars.iter().map(|v| ren[v].clone()));
    let mut state_vars = f1.state_vars.clone();
    state_vars.extend(f2.state_vars.iter().map(|v| ren[v].clone()));
    let mut dynamics = f1.dynamics.clone();
    dynamics.extend(f2.dynamics.iter().map(|e| e.rename(&ren)));
    let mut readout = f1.readout.clone();
    readout.extend(f2.readout.iter().map(|e| e.rename(&ren)));
    ContinuousSystem::with_vars(iface, input_vars, state_vars, dynamics, readout)
}

/// Wire a continuous system by substituting, for every inner input
/// coordinate, either an outer input variable or the readout expression of
/// the inner output feeding it.
pub fn cs_apply(w: &WiringDiagram, f: &ContinuousSystem) -> Result<ContinuousSystem> {
    if !w.inner().is_euclid() || !w.outer().is_euclid() {
        return Err(Error::WrongInterpretation("continuous systems need Euclid ports".into()));
    }
    if !w.inner().same_shape(&f.iface) {
        return Err(Error::BoxMismatch(format!("system on {} but diagram expects {}", f.iface, w.inner())));
    }
    let outer = w.outer().clone();
    let mut taken: BTreeSet<String> = f.state_vars.iter().cloned().collect();
    let mut input_vars = Vec::new();
    for n in coordinate_names(&outer.inputs) {
        let v = fresh(&n, &taken);
        taken.insert(v.clone());
        input_vars.push(v);
    }
    let xi = w.inner().inputs.offsets();
    let xo = w.inner().outputs.offsets();
    let yi = outer.inputs.offsets();
    let mut sub: BTreeMap<String, Expr> = BTreeMap::new();
    for (p, src) in w.in_map().iter().enumerate() {
        for t in 0..w.inner().inputs.port(p).ty.width() {
            let e = match *src {
                Source::Outer(q) => var(&input_vars[yi[q] + t]),
                Source::Inner(k) => f.readout[xo[k] + t].clone(),
            };
            sub.insert(f.input_vars[xi[p] + t].clone(), e);
        }
    }
    let dynamics = f.dynamics.iter().map(|e| e.subst(&|n: &str| sub.get(n).cloned()).simplify()).collect();
    let mut readout = Vec::new();
    for &k in w.out_map() {
        for t in 0..w.inner().outputs.port(k).ty.width() {
            readout.push(f.readout[xo[k] + t].clone());
        }
    }
    ContinuousSystem::with_vars(outer, input_vars, f.state_vars.clone(), dynamics, readout)
}

/// A system with real vector states driven by a function, not a table.
pub trait RealSystem {
    fn interface(&self) -> &Interface;
    fn state_dim(&self) -> usize;
    fn readout(&self, s: &[f64]) -> Result<Vec<f64>>;
    fn update(&self, a: &[f64], s: &[f64]) -> Result<Vec<f64>>;
}

/// Euler discretization: update s + eps·f(a, s), same readout.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerSystem {
    pub source: ContinuousSystem,
    pub epsilon: f64,
}

pub fn euler(f: &ContinuousSystem, eps: f64) -> Result<EulerSystem> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidEpsilon(eps));
    }
    Ok(EulerSystem { source: f.clone(), epsilon: eps })
}

impl RealSystem for EulerSystem {
    fn interface(&self) -> &Interface {
        &self.source.iface
    }

    fn state_dim(&self) -> usize {
        self.source.state_dim()
    }

    fn readout(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.source.readout_at(s)
    }

    fn update(&self, a: &[f64], s: &[f64]) -> Result<Vec<f64>> {
        let d = self.source.dynamics_at(a, s)?;
        Ok(s.iter().zip(d).map(|(x, v)| x + self.epsilon * v).collect())
    }
}

/// The vector field itself: `update` returns f(a, s) rather than a next state.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField(pub ContinuousSystem);

impl RealSystem for VectorField {
    fn interface(&self) -> &Interface {
        &self.0.iface
    }

    fn state_dim(&self) -> usize {
        self.0.state_dim()
    }

    fn readout(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.0.readout_at(s)
    }

    fn update(&self, a: &[f64], s: &[f64]) -> Result<Vec<f64>> {
        self.0.dynamics_at(a, s)
    }
}

/// Euler step over any function-backed vector field.
pub struct Discretized<S> {
    pub field: S,
    pub epsilon: f64,
}

impl<S: RealSystem> Discretized<S> {
    pub fn new(field: S, epsilon: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(Self { field, epsilon })
    }
}

impl<S: RealSystem> RealSystem for Discretized<S> {
    fn interface(&self) -> &Interface {
        self.field.interface()
    }

    fn state_dim(&self) -> usize {
        self.field.state_dim()
    }

    fn readout(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.field.readout(s)
    }

    fn update(&self, a: &[f64], s: &[f64]) -> Result<Vec<f64>> {
        let d = self.field.update(a, s)?;
        Ok(s.iter().zip(d).map(|(x, v)| x + self.epsilon * v).collect())
    }
}

/// Wiring applied to a function-backed system.
pub struct Wired<S> {
    pub diagram: WiringDiagram,
    pub inner: S,
}

impl<S: RealSystem> Wired<S> {
    pub fn new(diagram: WiringDiagram, inner: S) -> Result<Self> {
        if !diagram.inner().same_shape(inner.interface()) {
            return Err(Error::BoxMismatch("wired system does not fit the diagram".into()));
        }
        Ok(Self { diagram, inner })
    }
}

impl<S: RealSystem> RealSystem for Wired<S> {
    fn interface(&self) -> &Interface {
        self.diagram.outer()
    }

    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }

    fn readout(&self, s: &[f64]) -> Result<Vec<f64>> {
        let x = Point::Euclid(self.inner.readout(s)?);
        Ok(self.diagram.out_eval(&x)?.real_coords()?.to_vec())
    }

    fn update(&self, y: &[f64], s: &[f64]) -> Result<Vec<f64>> {
        let x = Point::Euclid(self.inner.readout(s)?);
        let a = self.diagram.in_eval(&Point::Euclid(y.to_vec()), &x)?;
        self.inner.update(a.real_coords()?, s)
    }
}

/// Two function-backed systems side by side.
pub struct Parallel<A, B> {
    iface: Interface,
    pub left: A,
    pub right: B,
}

impl<A: RealSystem, B: RealSystem> Parallel<A, B> {
    pub fn new(left: A, right: B) -> Result<Self> {
        let iface = left.interface().sum(right.interface())?;
        Ok(Self { iface, left, right })
    }
}

impl<A: RealSystem, B: RealSystem> RealSystem for Parallel<A, B> {
    fn interface(&self) -> &Interface {
        &self.iface
    }

    fn state_dim(&self) -> usize {
        self.left.state_dim() + self.right.state_dim()
    }

    fn readout(&self, s: &[f64]) -> Result<Vec<f64>> {
        let n = self.left.state_dim();
        let mut out = self.left.readout(&s[..n])?;
        out.extend(self.right.readout(&s[n..])?);
        Ok(out)
    }

    fn update(&self, a: &[f64], s: &[f64]) -> Result<Vec<f64>> {
        let n = self.left.state_dim();
        let k = self.left.interface().inputs.dims();
        let mut out = self.left.update(&a[..k], &s[..n])?;
        out.extend(self.right.update(&a[k..], &s[n..])?);
        Ok(out)
    }
}

// ----------------------------------------------------------- steady states

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    pub points_per_dim: usize,
    pub lo: f64,
    pub hi: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub dedup_radius: f64,
    pub jobs: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { points_per_dim: 5, lo: -10.0, hi: 10.0, max_iter: 100, tol: 1e-10, dedup_radius: 1e-6, jobs: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveMode {
    ExactAffine,
    Newton(NewtonConfig),
}

/// Affine solution set `particular + Σ t_i basis_i`, with the readout
/// written in the parameters `t1, t2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSolution {
    pub particular: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub params: Vec<String>,
    pub readout: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub state: Vec<f64>,
    pub readout: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartFailure {
    pub start: Vec<f64>,
    pub reason: String,
}

/// Roots found by multi-start Newton. Possibly incomplete.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub roots: Vec<Root>,
    pub failures: Vec<StartFailure>,
    pub heuristic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SteadyStates {
    /// `None` when the affine equations have no solution.
    Affine(Option<AffineSolution>),
    Newton(NewtonReport),
}

/// Coefficient matrix and constant of affine expressions in `vars`, evaluated
/// with the other variables bound by `env`.
fn affine_parts<F: Fn(&str) -> Option<f64>>(
    exprs: &[Expr],
    vars: &[String],
    env: &F,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let zero_env = |n: &str| if vars.iter().any(|v| v == n) { Some(0.0) } else { env(n) };
    let mut a = DMatrix::zeros(exprs.len(), vars.len());
    let mut c = DVector::zeros(exprs.len());
    for (i, e) in exprs.iter().enumerate() {
        if !e.is_affine_in(vars) {
            return Err(Error::NotAffine(e.to_string()));
        }
        c[i] = e.eval(&zero_env)?;
        for (j, v) in vars.iter().enumerate() {
            a[(i, j)] = e.diff(v).eval(&zero_env)?;
        }
    }
    Ok((a, c))
}

fn affine_solution(f: &ContinuousSystem, sol: Option<(DVector<f64>, Vec<DVector<f64>>)>) -> Option<AffineSolution> {
    let (p, basis) = sol?;
    let params: Vec<String> = (1..=basis.len()).map(|i| format!("t{i}")).collect();
    let coords: Vec<Expr> = (0..f.state_dim())
        .map(|j| {
            let mut e = num(p[j]);
            for (b, t) in basis.iter().zip(&params) {
                e = e + num(b[j]) * var(t);
            }
            e.simplify()
        })
        .collect();
    let readout = f
        .readout
        .iter()
        .map(|r| r.subst(&|n: &str| f.state_vars.iter().position(|v| v == n).map(|j| coords[j].clone())).simplify())
        .collect();
    Some(AffineSolution {
        particular: p.iter().cloned().collect(),
        basis: basis.iter().map(|b| b.iter().cloned().collect()).collect(),
        params,
        readout,
    })
}

/// States s with f(a, s) = 0.
pub fn steady_states(f: &ContinuousSystem, a: &Point, mode: &SolveMode) -> Result<SteadyStates> {
    f.iface.inputs.check_point(a)?;
    let a = a.real_coords()?;
    match mode {
        SolveMode::ExactAffine => {
            let env = f.env(a, &[]);
            let input_env = |n: &str| if f.state_vars.iter().any(|v| v == n) { None } else { env(n) };
            let (m, c) = affine_parts(&f.dynamics, &f.state_vars, &input_env)?;
            Ok(SteadyStates::Affine(affine_solution(f, solve_affine(&m, &(-c)))))
        }
        SolveMode::Newton(cfg) => Ok(SteadyStates::Newton(newton(f, a, cfg)?)),
    }
}

/// Steady states at input `a` whose readout equals `b`. Affine mode stacks
/// the readout equations onto the dynamics; Newton mode filters roots.
pub fn steady_states_with_output(f: &ContinuousSystem, a: &Point, b: &[f64], mode: &SolveMode) -> Result<SteadyStates> {
    if b.len() != f.readout.len() {
        return Err(Error::InvalidPoint(format!("expected {} output coordinates", f.readout.len())));
    }
    match mode {
        SolveMode::ExactAffine => {
            f.iface.inputs.check_point(a)?;
            let av = a.real_coords()?;
            let env = f.env(av, &[]);
            let input_env = |n: &str| if f.state_vars.iter().any(|v| v == n) { None } else { env(n) };
            let (m1, c1) = affine_parts(&f.dynamics, &f.state_vars, &input_env)?;
            let (m2, c2) = affine_parts(&f.readout, &f.state_vars, &input_env)?;
            let n = f.state_dim();
            let mut m = DMatrix::zeros(m1.nrows() + m2.nrows(), n);
            m.view_mut((0, 0), (m1.nrows(), n)).copy_from(&m1);
            m.view_mut((m1.nrows(), 0), (m2.nrows(), n)).copy_from(&m2);
            let mut rhs = DVector::zeros(m.nrows());
            for i in 0..c1.len() {
                rhs[i] = -c1[i];
            }
            for i in 0..c2.len() {
                rhs[c1.len() + i] = b[i] - c2[i];
            }
            Ok(SteadyStates::Affine(affine_solution(f, solve_affine(&m, &rhs))))
        }
        SolveMode::Newton(_) => match steady_states(f, a, mode)? {
            SteadyStates::Newton(mut rep) => {
                rep.roots.retain(|r| r.readout.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9));
                Ok(SteadyStates::Newton(rep))
            }
            other => Ok(other),
        },
    }
}

fn grid(n: usize, cfg: &NewtonConfig) -> Vec<Vec<f64>> {
    let k = cfg.points_per_dim.max(1);
    let step = if k == 1 { 0.0 } else { (cfg.hi - cfg.lo) / (k - 1) as f64 };
    let coord = |i: usize| if k == 1 { 0.5 * (cfg.lo + cfg.hi) } else { cfg.lo + step * i as f64 };
    let total = k.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut p = vec![0.0; n];
            for slot in p.iter_mut().rev() {
                *slot = coord(idx % k);
                idx /= k;
            }
            p
        })
        .collect()
}

fn newton_from(
    f: &ContinuousSystem,
    jac: &[Vec<Expr>],
    a: &[f64],
    start: &[f64],
    cfg: &NewtonConfig,
) -> std::result::Result<(Vec<f64>, f64), String> {
    let n = start.len();
    let mut s = start.to_vec();
    for _ in 0..=cfg.max_iter {
        let fx = f.dynamics_at(a, &s).map_err(|e| e.to_string())?;
        let norm = fx.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < cfg.tol {
            return Ok((s, norm));
        }
        let mut j = DMatrix::zeros(n, n);
        {
            let env = f.env(a, &s);
            for r in 0..n {
                for c in 0..n {
                    j[(r, c)] = jac[r][c].eval(&env).map_err(|e| e.to_string())?;
                }
            }
        }
        let step = j
            .lu()
            .solve(&DVector::from_vec(fx.iter().map(|v| -v).collect()))
            .ok_or_else(|| "singular Jacobian".to_string())?;
        for (x, d) in s.iter_mut().zip(step.iter()) {
            *x += d;
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err("diverged".into());
        }
    }
    Err(format!("no convergence in {} iterations", cfg.max_iter))
}

fn newton(f: &ContinuousSystem, a: &[f64], cfg: &NewtonConfig) -> Result<NewtonReport> {
    let n = f.state_dim();
    let jac = f.jacobian_exprs(&f.state_vars);
    let starts = grid(n, cfg);
    let run = |chunk: &[Vec<f64>]| -> Vec<(Vec<f64>, std::result::Result<(Vec<f64>, f64), String>)> {
        chunk.iter().map(|s| (s.clone(), newton_from(f, &jac, a, s, cfg))).collect()
    };
    let results: Vec<_> = if cfg.jobs > 1 && starts.len() > 1 {
        let size = starts.len().div_ceil(cfg.jobs);
        std::thread::scope(|sc| {
            let handles: Vec<_> = starts.chunks(size).map(|c| sc.spawn(move || run(c))).collect();
            handles.into_iter().flat_map(|h| h.join().expect("newton worker panicked")).collect()
        })
    } else {
        run(&starts)
    };
    let mut roots: Vec<Root> = Vec::new();
    let mut failures = Vec::new();
    for (start, r) in results {
        match r {
            Ok((s, residual)) => {
                let dup = roots.iter().any(|q| {
                    q.state.iter().zip(&s).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt() <= cfg.dedup_radius
                });
                if !dup {
                    let readout = f.readout_at(&s)?;
                    roots.push(Root { state: s, readout, residual });
                }
            }
            Err(reason) => failures.push(StartFailure { start, reason }),
        }
    }
    roots.sort_by(|x, y| x.state.partial_cmp(&y.state).unwrap_or(std::cmp::Ordering::Equal));
    Ok(NewtonReport { roots, failures, heuristic: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn inner_box() -> Interface {
        Interface::new(
            TypedFiniteSet::euclid(&[("b1", 1), ("a", 1)]).unwrap(),
            TypedFiniteSet::euclid(&[("b2", 1)]).unwrap(),
        )
    }

    fn example() -> ContinuousSystem {
        ContinuousSystem::new(inner_box(), vec!["x".into()], vec![parse("2*x - 3*b1 + a").unwrap()], vec![var("x")])
            .unwrap()
    }

    fn feedback() -> WiringDiagram {
        let outer = Interface::new(
            TypedFiniteSet::euclid(&[("a", 1)]).unwrap(),
            TypedFiniteSet::euclid(&[("b", 1)]).unwrap(),
        );
        WiringDiagram::new(inner_box(), outer, vec![Source::Inner(0), Source::Outer(0)], vec![0]).unwrap()
    }

    #[test]
    fn feedback_gives_negative_x_plus_a() {
        let g = cs_apply(&feedback(), &example()).unwrap();
        assert!(crate::expr::poly_equal(&g.dynamics()[0], &parse("-x + a").unwrap(), 1e-12));
        assert_eq!(g.readout()[0], var("x"));
        assert_eq!(g.input_vars(), &["a".to_string()]);
    }

    #[test]
    fn identity_wiring_keeps_system() {
        let f = example();
        let g = cs_apply(&WiringDiagram::identity(f.interface()), &f).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn unique_root() {
        let f = example();
        for (b1, a) in [(1.0, 1.0), (2.0, -3.0), (0.5, 0.25)] {
            match steady_states(&f, &Point::Euclid(vec![b1, a]), &SolveMode::ExactAffine).unwrap() {
                SteadyStates::Affine(Some(sol)) => {
                    assert!(sol.basis.is_empty());
                    assert!((sol.particular[0] - (3.0 * b1 - a) / 2.0).abs() < 1e-12);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn zero_field_every_state() {
        let iface = Interface::new(TypedFiniteSet::empty(), TypedFiniteSet::euclid(&[("y", 1)]).unwrap());
        let f = ContinuousSystem::new(iface, vec!["x".into(), "z".into()], vec![num(0.0), num(0.0)], vec![var("x")])
            .unwrap();
        match steady_states(&f, &Point::Euclid(vec![]), &SolveMode::ExactAffine).unwrap() {
            SteadyStates::Affine(Some(sol)) => {
                assert_eq!(sol.basis.len(), 2);
                assert_eq!(sol.readout[0], var("t1"));
            }
            other => panic!("{other:?}"),
        }
        let e = euler(&f, 0.3).unwrap();
        assert_eq!(e.update(&[], &[1.5, -2.0]).unwrap(), vec![1.5, -2.0]);
    }

    #[test]
    fn newton_finds_both_roots() {
        let iface = Interface::new(TypedFiniteSet::empty(), TypedFiniteSet::empty());
        let f = ContinuousSystem::new(iface, vec!["x".into()], vec![parse("x^2 - 1").unwrap()], vec![]).unwrap();
        let cfg = NewtonConfig { lo: -3.0, hi: 3.0, ..Default::default() };
        match steady_states(&f, &Point::Euclid(vec![]), &SolveMode::Newton(cfg)).unwrap() {
            SteadyStates::Newton(rep) => {
                assert!(rep.heuristic);
                assert_eq!(rep.roots.len(), 2);
                assert!((rep.roots[0].state[0] + 1.0).abs() < 1e-9);
                assert!((rep.roots[1].state[0] - 1.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            steady_states(&f, &Point::Euclid(vec![]), &SolveMode::ExactAffine),
            Err(Error::NotAffine(_))
        ));
    }

    #[test]
    fn newton_parallel_matches_serial() {
        let iface = Interface::new(TypedFiniteSet::empty(), TypedFiniteSet::empty());
        let f = ContinuousSystem::new(
            iface,
            vec!["x".into(), "y".into()],
            vec![parse("x^2 - 1").unwrap(), parse("y - x").unwrap()],
            vec![],
        )
        .unwrap();
        let one = newton(&f, &[], &NewtonConfig::default()).unwrap();
        let many = newton(&f, &[], &NewtonConfig { jobs: 4, ..Default::default() }).unwrap();
        assert_eq!(one.roots, many.roots);
    }

    #[test]
    fn euler_example_and_bad_eps() {
        let iface = Interface::new(TypedFiniteSet::euclid(&[("a", 1)]).unwrap(), TypedFiniteSet::empty());
        let f = ContinuousSystem::new(iface, vec!["x".into()], vec![parse("-x + a").unwrap()], vec![]).unwrap();
        let e = euler(&f, 0.5).unwrap();
        assert_eq!(e.update(&[0.0], &[2.0]).unwrap(), vec![1.0]);
        assert_eq!(euler(&f, 0.0), Err(Error::InvalidEpsilon(0.0)));
        assert!(euler(&f, -1.0).is_err());
    }

    #[test]
    fn readout_must_use_states_only() {
        let r = ContinuousSystem::new(inner_box(), vec!["x".into()], vec![var("x")], vec![var("a")]);
        assert!(matches!(r, Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn output_filter_affine() {
        let f = example();
        let r = steady_states_with_output(&f, &Point::Euclid(vec![1.0, 1.0]), &[1.0], &SolveMode::ExactAffine).unwrap();
        assert!(matches!(r, SteadyStates::Affine(Some(_))));
        let r = steady_states_with_output(&f, &Point::Euclid(vec![1.0, 1.0]), &[2.0], &SolveMode::ExactAffine).unwrap();
        assert_eq!(r, SteadyStates::Affine(None));
    }
}
