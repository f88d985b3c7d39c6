//! Wiring diagrams between boxes.
//!
//! A diagram from inner box X to outer box Y says, for every input port of X,
//! whether it is fed by an input of Y or by an output of X, and for every
//! output port of Y, which output of X it exposes.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tfs::{
    decode, encode, join_points, reindex, tfs_sum, Interface, Point, PortType, TypedFiniteSet,
    TypedFunction,
};

/// Where an inner input port reads from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    /// An input port of the outer box.
    Outer(usize),
    /// An output port of the inner box.
    Inner(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub port: String,
    pub source: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` <- `{}`: {}", self.port, self.source, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WiringDiagram {
    inner: Interface,
    outer: Interface,
    in_map: Vec<Source>,
    out_map: Vec<usize>,
    phi_in: TypedFunction,
    phi_out: TypedFunction,
}

/// Check the port tables, returning every violation found.
pub fn validate(
    inner: &Interface,
    outer: &Interface,
    in_map: &[Source],
    out_map: &[usize],
) -> Vec<Violation> {
    let mut v = Vec::new();
    if in_map.len() != inner.inputs.len() {
        v.push(Violation {
            port: "<inner inputs>".into(),
            source: "<table>".into(),
            detail: format!("{} entries for {} ports", in_map.len(), inner.inputs.len()),
        });
    }
    if out_map.len() != outer.outputs.len() {
        v.push(Violation {
            port: "<outer outputs>".into(),
            source: "<table>".into(),
            detail: format!("{} entries for {} ports", out_map.len(), outer.outputs.len()),
        });
    }
    for (p, src) in in_map.iter().enumerate().take(inner.inputs.len()) {
        let port = &inner.inputs.port(p);
        let (name, ty) = match *src {
            Source::Outer(q) if q < outer.inputs.len() => {
                (outer.inputs.port(q).name.clone(), &outer.inputs.port(q).ty)
            }
            Source::Inner(k) if k < inner.outputs.len() => {
                (inner.outputs.port(k).name.clone(), &inner.outputs.port(k).ty)
            }
            _ => {
                v.push(Violation {
                    port: port.name.clone(),
                    source: format!("{src:?}"),
                    detail: "source port does not exist".into(),
                });
                continue;
            }
        };
        if *ty != port.ty {
            v.push(Violation {
                port: port.name.clone(),
                source: name,
                detail: format!("type {} fed by {}", port.ty, ty),
            });
        }
    }
    for (q, &k) in out_map.iter().enumerate().take(outer.outputs.len()) {
        let port = outer.outputs.port(q);
        if k >= inner.outputs.len() {
            v.push(Violation {
                port: port.name.clone(),
                source: format!("Inner({k})"),
                detail: "source port does not exist".into(),
            });
            continue;
        }
        let src = inner.outputs.port(k);
        if src.ty != port.ty {
            v.push(Violation {
                port: port.name.clone(),
                source: src.name.clone(),
                detail: format!("type {} fed by {}", port.ty, src.ty),
            });
        }
    }
    v
}

impl WiringDiagram {
    pub fn new(
        inner: Interface,
        outer: Interface,
        in_map: Vec<Source>,
        out_map: Vec<usize>,
    ) -> Result<Self> {
        let v = validate(&inner, &outer, &in_map, &out_map);
        if !v.is_empty() {
            return Err(Error::InvalidWiring(v));
        }
        let target = tfs_sum(&outer.inputs, &inner.outputs)?;
        let ny = outer.inputs.len();
        let flat: Vec<usize> = in_map
            .iter()
            .map(|s| match *s {
                Source::Outer(q) => q,
                Source::Inner(k) => ny + k,
            })
            .collect();
        let phi_in = TypedFunction::new(inner.inputs.clone(), target, flat)?;
        let phi_out = TypedFunction::new(outer.outputs.clone(), inner.outputs.clone(), out_map.clone())?;
        Ok(Self { inner, outer, in_map, out_map, phi_in, phi_out })
    }

    pub fn identity(x: &Interface) -> Self {
        let in_map = (0..x.inputs.len()).map(Source::Outer).collect();
        let out_map = (0..x.outputs.len()).collect();
        Self::new(x.clone(), x.clone(), in_map, out_map).expect("identity is well typed")
    }

    pub fn inner(&self) -> &Interface {
        &self.inner
    }

    pub fn outer(&self) -> &Interface {
        &self.outer
    }

    pub fn in_map(&self) -> &[Source] {
        &self.in_map
    }

    pub fn out_map(&self) -> &[usize] {
        &self.out_map
    }

    /// φ_in as a typed function into `Y_in + X_out`.
    pub fn phi_in(&self) -> &TypedFunction {
        &self.phi_in
    }

    pub fn phi_out(&self) -> &TypedFunction {
        &self.phi_out
    }

    /// `self ∘ phi`: first `phi` (X → Y), then `self` (Y → Z).
    pub fn compose(&self, phi: &WiringDiagram) -> Result<WiringDiagram> {
        let psi = self;
        if !phi.outer.same_shape(&psi.inner) {
            return Err(Error::BoxMismatch(format!(
                "outer box {} of the first diagram differs from inner box {} of the second",
                phi.outer, psi.inner
            )));
        }
        let in_map = phi
            .in_map
            .iter()
            .map(|s| match *s {
                Source::Inner(k) => Source::Inner(k),
                Source::Outer(q) => match psi.in_map[q] {
                    Source::Outer(r) => Source::Outer(r),
                    Source::Inner(m) => Source::Inner(phi.out_map[m]),
                },
            })
            .collect();
        let out_map = psi.out_map.iter().map(|&r| phi.out_map[r]).collect();
        WiringDiagram::new(phi.inner.clone(), psi.outer.clone(), in_map, out_map)
    }

    /// Monoidal sum of two diagrams, side by side.
    pub fn sum(&self, other: &WiringDiagram) -> Result<WiringDiagram> {
        let inner = self.inner.sum(&other.inner)?;
        let outer = self.outer.sum(&other.outer)?;
        let ny = self.outer.inputs.len();
        let nx = self.inner.outputs.len();
        let mut in_map = self.in_map.clone();
        in_map.extend(other.in_map.iter().map(|s| match *s {
            Source::Outer(q) => Source::Outer(q + ny),
            Source::Inner(k) => Source::Inner(k + nx),
        }));
        let mut out_map = self.out_map.clone();
        out_map.extend(other.out_map.iter().map(|&k| k + nx));
        WiringDiagram::new(inner, outer, in_map, out_map)
    }

    /// Same tables on new boxes, e.g. an Euclid twin of a Finite diagram.
    pub fn retype(&self, inner: Interface, outer: Interface) -> Result<WiringDiagram> {
        WiringDiagram::new(inner, outer, self.in_map.clone(), self.out_map.clone())
    }

    /// Input point of X from an outer input y and an inner output x.
    pub fn in_eval(&self, y: &Point, x: &Point) -> Result<Point> {
        self.outer.inputs.check_point(y)?;
        self.inner.outputs.check_point(x)?;
        reindex(&self.phi_in, &join_points(y, x)?)
    }

    /// Output point of Y exposed by an inner output x.
    pub fn out_eval(&self, x: &Point) -> Result<Point> {
        reindex(&self.phi_out, x)
    }

    /// Flat-index version of [`in_eval`](Self::in_eval) for Finite diagrams.
    pub fn in_eval_flat(&self, y: usize, x: usize) -> usize {
        let yd = decode(&self.outer.inputs.radices(), y);
        let xd = decode(&self.inner.outputs.radices(), x);
        let digits: Vec<usize> = self
            .in_map
            .iter()
            .map(|s| match *s {
                Source::Outer(q) => yd[q],
                Source::Inner(k) => xd[k],
            })
            .collect();
        encode(&self.inner.inputs.radices(), &digits)
    }

    pub fn out_eval_flat(&self, x: &usize) -> usize {
        let xd = decode(&self.inner.outputs.radices(), *x);
        let digits: Vec<usize> = self.out_map.iter().map(|&k| xd[k]).collect();
        encode(&self.outer.outputs.radices(), &digits)
    }

    /// Precomputed flat evaluator, cheaper than repeated `in_eval_flat`.
    pub fn flat_evaluator(&self) -> Result<FlatEval> {
        FlatEval::new(self)
    }

    /// The 0/1 matrices Φ_in, Φ_mid, Φ_out of an all-Euclid diagram.
    pub fn derivative(&self) -> Result<WiringDerivative> {
        if !(self.inner.is_euclid() && self.outer.is_euclid()) {
            return Err(Error::NotDifferentiable);
        }
        let xi = &self.inner.inputs;
        let xo = &self.inner.outputs;
        let yi = &self.outer.inputs;
        let yo = &self.outer.outputs;
        let (oxi, oxo, oyi, oyo) = (xi.offsets(), xo.offsets(), yi.offsets(), yo.offsets());
        let mut d_in = DMatrix::zeros(xi.dims(), yi.dims());
        let mut d_mid = DMatrix::zeros(xi.dims(), xo.dims());
        let mut d_out = DMatrix::zeros(yo.dims(), xo.dims());
        for (p, s) in self.in_map.iter().enumerate() {
            let d = xi.port(p).ty.width();
            for t in 0..d {
                match *s {
                    Source::Outer(q) => d_in[(oxi[p] + t, oyi[q] + t)] = 1.0,
                    Source::Inner(k) => d_mid[(oxi[p] + t, oxo[k] + t)] = 1.0,
                }
            }
        }
        for (q, &k) in self.out_map.iter().enumerate() {
            for t in 0..yo.port(q).ty.width() {
                d_out[(oyo[q] + t, oxo[k] + t)] = 1.0;
            }
        }
        Ok(WiringDerivative { phi_in_d: d_in, phi_mid_d: d_mid, phi_out_d: d_out })
    }

    /// Pointwise equality of `in_eval` and `out_eval`. Finite diagrams are
    /// compared exhaustively up to 10^4 points, otherwise at `samples` random points.
    pub fn extensionally_equal<R: Rng>(&self, other: &Self, samples: usize, rng: &mut R) -> bool {
        if !self.inner.same_shape(&other.inner) || !self.outer.same_shape(&other.outer) {
            return false;
        }
        if self.inner.is_finite() && self.outer.is_finite() {
            let ny = self.outer.inputs.size().unwrap_or(usize::MAX);
            let nx = self.inner.outputs.size().unwrap_or(usize::MAX);
            let exhaustive = ny.saturating_mul(nx) <= 10_000;
            let pairs: Vec<(usize, usize)> = if exhaustive {
                (0..ny).flat_map(|y| (0..nx).map(move |x| (y, x))).collect()
            } else {
                (0..samples).map(|_| (rng.gen_range(0..ny), rng.gen_range(0..nx))).collect()
            };
            pairs.into_iter().all(|(y, x)| {
                self.in_eval_flat(y, x) == other.in_eval_flat(y, x)
                    && self.out_eval_flat(&x) == other.out_eval_flat(&x)
            })
        } else {
            (0..samples).all(|_| {
                let y = random_real_point(&self.outer.inputs, rng);
                let x = random_real_point(&self.inner.outputs, rng);
                self.in_eval(&y, &x).ok() == other.in_eval(&y, &x).ok()
                    && self.out_eval(&x).ok() == other.out_eval(&x).ok()
            })
        }
    }
}

fn random_real_point<R: Rng>(t: &TypedFiniteSet, rng: &mut R) -> Point {
    Point::Euclid((0..t.dims()).map(|_| rng.gen_range(-10.0..10.0)).collect())
}

impl fmt::Display for WiringDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inner {}", self.inner)?;
        writeln!(f, "outer {}", self.outer)?;
        for (p, s) in self.in_map.iter().enumerate() {
            let src = match *s {
                Source::Outer(q) => format!("outer.{}", self.outer.inputs.port(q).name),
                Source::Inner(k) => format!("inner.{}", self.inner.outputs.port(k).name),
            };
            writeln!(f, "  inner.{} <- {}", self.inner.inputs.port(p).name, src)?;
        }
        for (q, &k) in self.out_map.iter().enumerate() {
            writeln!(
                f,
                "  outer.{} <- inner.{}",
                self.outer.outputs.port(q).name,
                self.inner.outputs.port(k).name
            )?;
        }
        Ok(())
    }
}

/// Flat-index evaluator with precomputed strides.
#[derive(Debug, Clone)]
pub struct FlatEval {
    y_radices: Vec<usize>,
    x_radices: Vec<usize>,
    // per inner input port: (from outer?, source index, stride in X_in)
    in_terms: Vec<(bool, usize, usize)>,
    // per outer output port: (source index, stride in Y_out)
    out_terms: Vec<(usize, usize)>,
    pub y_size: usize,
    pub x_size: usize,
}

fn strides(radices: &[usize]) -> Vec<usize> {
    let mut s = vec![1; radices.len()];
    for i in (0..radices.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * radices[i + 1];
    }
    s
}

impl FlatEval {
    pub fn new(w: &WiringDiagram) -> Result<Self> {
        let xi = strides(&w.inner.inputs.radices());
        let yo = strides(&w.outer.outputs.radices());
        let in_terms = w
            .in_map
            .iter()
            .enumerate()
            .map(|(p, s)| match *s {
                Source::Outer(q) => (true, q, xi[p]),
                Source::Inner(k) => (false, k, xi[p]),
            })
            .collect();
        let out_terms = w.out_map.iter().enumerate().map(|(q, &k)| (k, yo[q])).collect();
        Ok(Self {
            y_radices: w.outer.inputs.radices(),
            x_radices: w.inner.outputs.radices(),
            in_terms,
            out_terms,
            y_size: w.outer.inputs.size()?,
            x_size: w.inner.outputs.size()?,
        })
    }

    pub fn x_digits(&self, x: usize) -> Vec<usize> {
        decode(&self.x_radices, x)
    }

    pub fn y_digits(&self, y: usize) -> Vec<usize> {
        decode(&self.y_radices, y)
    }

    pub fn in_eval_digits(&self, yd: &[usize], xd: &[usize]) -> usize {
        self.in_terms
            .iter()
            .map(|&(outer, i, s)| if outer { yd[i] * s } else { xd[i] * s })
            .sum()
    }

    pub fn out_eval_digits(&self, xd: &[usize]) -> usize {
        self.out_terms.iter().map(|&(k, s)| xd[k] * s).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WiringDerivative {
    pub phi_in_d: DMatrix<f64>,
    pub phi_mid_d: DMatrix<f64>,
    pub phi_out_d: DMatrix<f64>,
}

impl WiringDerivative {
    /// Derivative of `psi ∘ phi` from the derivatives of `phi` (self) and `psi`.
    pub fn chain(&self, psi: &WiringDerivative) -> WiringDerivative {
        let (p, s) = (self, psi);
        WiringDerivative {
            phi_in_d: &p.phi_in_d * &s.phi_in_d,
            phi_mid_d: &p.phi_mid_d + &p.phi_in_d * &s.phi_mid_d * &p.phi_out_d,
            phi_out_d: &s.phi_out_d * &p.phi_out_d,
        }
    }
}

/// Diagram putting `x1` then `x2` in series. `x1`'s outputs must match `x2`'s inputs.
pub fn serial_diagram(x1: &Interface, x2: &Interface) -> Result<WiringDiagram> {
    if !x1.outputs.same_shape(&x2.inputs) {
        return Err(Error::BoxMismatch("serial: outputs of the first box differ from inputs of the second".into()));
    }
    let inner = x1.sum(x2)?;
    let outer = Interface::new(x1.inputs.clone(), x2.outputs.clone());
    let n1 = x1.inputs.len();
    let mut in_map: Vec<Source> = (0..n1).map(Source::Outer).collect();
    in_map.extend((0..x2.inputs.len()).map(Source::Inner));
    let out_map = (0..x2.outputs.len()).map(|k| x1.outputs.len() + k).collect();
    WiringDiagram::new(inner, outer, in_map, out_map)
}

/// Diagram feeding output port `c` of `x` back into input port `r` for every
/// pair `(r, c)`; the remaining ports stay exposed in order.
pub fn feedback_diagram(x: &Interface, pairs: &[(usize, usize)]) -> Result<WiringDiagram> {
    for &(r, c) in pairs {
        if r >= x.inputs.len() || c >= x.outputs.len() {
            return Err(Error::TraceTypeMismatch(format!("port pair ({r},{c}) out of range")));
        }
        if x.inputs.port(r).ty != x.outputs.port(c).ty {
            return Err(Error::TraceTypeMismatch(format!(
                "`{}`: {} vs `{}`: {}",
                x.inputs.port(r).name,
                x.inputs.port(r).ty,
                x.outputs.port(c).name,
                x.outputs.port(c).ty
            )));
        }
    }
    let keep_in: Vec<usize> = (0..x.inputs.len()).filter(|r| !pairs.iter().any(|p| p.0 == *r)).collect();
    let keep_out: Vec<usize> = (0..x.outputs.len()).filter(|c| !pairs.iter().any(|p| p.1 == *c)).collect();
    let sub = |t: &TypedFiniteSet, keep: &[usize]| -> Result<TypedFiniteSet> {
        TypedFiniteSet::new(keep.iter().map(|&i| (t.port(i).name.clone(), t.port(i).ty.clone())).collect())
    };
    let outer = Interface::new(sub(&x.inputs, &keep_in)?, sub(&x.outputs, &keep_out)?);
    let in_map = (0..x.inputs.len())
        .map(|r| match pairs.iter().find(|p| p.0 == r) {
            Some(&(_, c)) => Source::Inner(c),
            None => Source::Outer(keep_in.iter().position(|&k| k == r).unwrap()),
        })
        .collect();
    WiringDiagram::new(x.clone(), outer, in_map, keep_out)
}

/// Typed finite set with one port per type, named `p0, p1, ...`.
pub fn anonymous(types: &[PortType]) -> TypedFiniteSet {
    TypedFiniteSet::new(types.iter().enumerate().map(|(i, t)| (format!("p{i}"), t.clone())).collect())
        .expect("distinct names, caller supplies one kind")
}
