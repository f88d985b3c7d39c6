//! Linear open systems `ẋ = M_in a + M_mid x`, `b = M_out x`, their wiring
//! through diagram derivatives, linearization of continuous systems, and
//! stability verdicts.

use nalgebra::DMatrix;

use crate::continuous::{steady_states, ContinuousSystem, SolveMode, SteadyStates};
use crate::dense::{eigenvalues, Complex};
use crate::error::{Error, Result};
use crate::tfs::{Interface, Point};
use crate::wiring::WiringDiagram;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    iface: Interface,
    pub m_in: DMatrix<f64>,
    pub m_mid: DMatrix<f64>,
    pub m_out: DMatrix<f64>,
}

impl LinearSystem {
    pub fn new(iface: Interface, m_in: DMatrix<f64>, m_mid: DMatrix<f64>, m_out: DMatrix<f64>) -> Result<Self> {
        if !iface.is_euclid() {
            return Err(Error::WrongInterpretation("linear systems need Euclid ports".into()));
        }
        let n = m_mid.nrows();
        let (k, l) = (iface.inputs.dims(), iface.outputs.dims());
        if m_mid.ncols() != n || m_in.shape() != (n, k) || m_out.shape() != (l, n) {
            return Err(Error::InvalidSystem(format!(
                "matrix shapes in {:?}, mid {:?}, out {:?} do not fit {} inputs, {} outputs",
                m_in.shape(),
                m_mid.shape(),
                m_out.shape(),
                k,
                l
            )));
        }
        Ok(Self { iface, m_in, m_mid, m_out })
    }

    pub fn interface(&self) -> &Interface {
        &self.iface
    }

    pub fn state_dim(&self) -> usize {
        self.m_mid.nrows()
    }

    /// The block matrix `[[M_mid, M_in], [M_out, 0]]`.
    pub fn block(&self) -> DMatrix<f64> {
        let (n, k, l) = (self.state_dim(), self.m_in.ncols(), self.m_out.nrows());
        let mut b = DMatrix::zeros(n + l, n + k);
        b.view_mut((0, 0), (n, n)).copy_from(&self.m_mid);
        b.view_mut((0, n), (n, k)).copy_from(&self.m_in);
        b.view_mut((n, 0), (l, n)).copy_from(&self.m_out);
        b
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.m_in.shape() != other.m_in.shape()
            || self.m_mid.shape() != other.m_mid.shape()
            || self.m_out.shape() != other.m_out.shape()
        {
            return f64::INFINITY;
        }
        let d = |a: &DMatrix<f64>, b: &DMatrix<f64>| (a - b).amax();
        d(&self.m_in, &other.m_in).max(d(&self.m_mid, &other.m_mid)).max(d(&self.m_out, &other.m_out))
    }
}

fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut(a.shape(), b.shape()).copy_from(b);
    m
}

/// Block-diagonal direct sum of every component.
pub fn ls_parallel(l1: &LinearSystem, l2: &LinearSystem) -> Result<LinearSystem> {
    LinearSystem::new(
        l1.iface.sum(&l2.iface)?,
        direct_sum(&l1.m_in, &l2.m_in),
        direct_sum(&l1.m_mid, &l2.m_mid),
        direct_sum(&l1.m_out, &l2.m_out),
    )
}

/// N_in = M_in Φ_in, N_mid = M_mid + M_in Φ_mid M_out, N_out = Φ_out M_out.
pub fn ls_apply(w: &WiringDiagram, l: &LinearSystem) -> Result<LinearSystem> {
    if !w.inner().same_shape(&l.iface) {
        return Err(Error::BoxMismatch(format!("system on {} but diagram expects {}", l.iface, w.inner())));
    }
    let d = w.derivative()?;
    LinearSystem::new(
        w.outer().clone(),
        &l.m_in * &d.phi_in_d,
        &l.m_mid + &l.m_in * &d.phi_mid_d * &l.m_out,
        &d.phi_out_d * &l.m_out,
    )
}

/// Jacobians of dynamics (in inputs and state) and readout at (a, s0).
pub fn linearize_at(f: &ContinuousSystem, a: &Point, s0: &[f64]) -> Result<LinearSystem> {
    f.interface().inputs.check_point(a)?;
    let av = a.real_coords()?;
    if s0.len() != f.state_dim() {
        return Err(Error::InvalidPoint(format!("expected {} state coordinates", f.state_dim())));
    }
    let names: Vec<String> = f.input_vars().iter().chain(f.state_vars()).cloned().collect();
    let values: Vec<f64> = av.iter().chain(s0).cloned().collect();
    let eval_block = |exprs: &[crate::expr::Expr], wrt: &[String]| -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(exprs.len(), wrt.len());
        for (i, e) in exprs.iter().enumerate() {
            for (j, v) in wrt.iter().enumerate() {
                m[(i, j)] = e.diff(v).eval_with(&names, &values)?;
            }
        }
        Ok(m)
    };
    LinearSystem::new(
        f.interface().clone(),
        eval_block(f.dynamics(), f.input_vars())?,
        eval_block(f.dynamics(), f.state_vars())?,
        eval_block(f.readout(), f.state_vars())?,
    )
}

/// A steady state with its linearization.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedState {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    pub state: Vec<f64>,
    pub system: LinearSystem,
    pub heuristic: bool,
}

/// Linearize at every steady state found for each input. Affine solution
/// sets with free directions are sampled at `p + t v` for t in {-1, 0, 1}.
pub fn stst_linearization(f: &ContinuousSystem, inputs: &[Point], mode: &SolveMode) -> Result<Vec<LinearizedState>> {
    let mut out = Vec::new();
    for a in inputs {
        let (states, heuristic) = match steady_states(f, a, mode)? {
            SteadyStates::Affine(None) => (vec![], false),
            SteadyStates::Affine(Some(sol)) => {
                let mut pts = vec![sol.particular.clone()];
                for b in &sol.basis {
                    for t in [-1.0, 1.0] {
                        pts.push(sol.particular.iter().zip(b).map(|(p, v)| p + t * v).collect());
                    }
                }
                (pts, false)
            }
            SteadyStates::Newton(rep) => (rep.roots.into_iter().map(|r| r.state).collect(), true),
        };
        for s in states {
            out.push(LinearizedState {
                input: a.real_coords()?.to_vec(),
                output: f.readout_at(&s)?,
                system: linearize_at(f, a, &s)?,
                state: s,
                heuristic,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        })
    }
}

pub const DEFAULT_STABILITY_TOL: f64 = 1e-9;

pub fn stability_from_eigenvalues(eig: &[Complex], tol: f64) -> Stability {
    if eig.iter().any(|e| e.0 > tol) {
        Stability::Unstable
    } else if eig.iter().all(|e| e.0 < -tol) {
        Stability::Stable
    } else {
        Stability::Marginal
    }
}

/// Verdict from the real parts of the eigenvalues of `M_mid`.
pub fn classify_stability(l: &LinearSystem, tol: f64) -> Result<Stability> {
    Ok(stability_from_eigenvalues(&eigenvalues(&l.m_mid)?, tol))
}
