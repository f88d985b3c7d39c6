//! Typed finite sets, boxes and points of their dependent products.
//!
//! A port is typed either by a finite alphabet or by a Euclidean dimension.
//! Points of an all-Finite set have a canonical flat index: mixed radix with
//! port 0 most significant.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PortType {
    Finite(Vec<String>),
    Euclid(usize),
}

impl PortType {
    pub fn finite<S: AsRef<str>>(symbols: &[S]) -> Result<Self> {
        let syms: Vec<String> = symbols.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, s) in syms.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidPortType("empty symbol".into()));
            }
            if syms[..i].contains(s) {
                return Err(Error::InvalidPortType(format!("repeated symbol `{s}`")));
            }
        }
        Ok(PortType::Finite(syms))
    }

    pub fn kind(&self) -> Kind {
        match self {
            PortType::Finite(_) => Kind::Finite,
            PortType::Euclid(_) => Kind::Euclid,
        }
    }

    /// Alphabet size for Finite ports, dimension for Euclid ports.
    pub fn width(&self) -> usize {
        match self {
            PortType::Finite(a) => a.len(),
            PortType::Euclid(d) => *d,
        }
    }

    pub fn symbols(&self) -> Option<&[String]> {
        match self {
            PortType::Finite(a) => Some(a),
            PortType::Euclid(_) => None,
        }
    }
}

impl fmt::Display for PortType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortType::Finite(a) => write!(f, "{{{}}}", a.join(",")),
            PortType::Euclid(d) => write!(f, "R {d}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Finite,
    Euclid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub name: String,
    pub ty: PortType,
}

/// Ordered list of named, typed ports.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TypedFiniteSet {
    ports: Vec<Port>,
}

impl TypedFiniteSet {
    pub fn empty() -> Self {
        Self { ports: Vec::new() }
    }

    pub fn new(ports: Vec<(String, PortType)>) -> Result<Self> {
        let mut out: Vec<Port> = Vec::with_capacity(ports.len());
        for (name, ty) in ports {
            if out.iter().any(|p| p.name == name) {
                return Err(Error::DuplicatePort(name));
            }
            if let Some(first) = out.first() {
                if first.ty.kind() != ty.kind() {
                    return Err(Error::MixedKinds);
                }
            }
            if let PortType::Finite(a) = &ty {
                PortType::finite(a)?;
            }
            out.push(Port { name, ty });
        }
        Ok(Self { ports: out })
    }

    /// Convenience: all ports Finite.
    pub fn finite<S: AsRef<str>>(ports: &[(&str, &[S])]) -> Result<Self> {
        let mut v = Vec::new();
        for (n, a) in ports {
            v.push((n.to_string(), PortType::finite(a)?));
        }
        Self::new(v)
    }

    /// Convenience: all ports Euclid.
    pub fn euclid(ports: &[(&str, usize)]) -> Result<Self> {
        Self::new(ports.iter().map(|(n, d)| (n.to_string(), PortType::Euclid(*d))).collect())
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn len(&self) -> usize {
        self.ports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty()
    }

    pub fn port(&self, i: usize) -> &Port {
        &self.ports[i]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.ports.iter().position(|p| p.name == name)
    }

    /// `None` for the empty set, which belongs to both kinds.
    pub fn kind(&self) -> Option<Kind> {
        self.ports.first().map(|p| p.ty.kind())
    }

    pub fn is_finite(&self) -> bool {
        self.kind() != Some(Kind::Euclid)
    }

    pub fn is_euclid(&self) -> bool {
        self.kind() != Some(Kind::Finite)
    }

    /// Same port types in the same order; names ignored.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.ports.len() == other.ports.len()
            && self.ports.iter().zip(&other.ports).all(|(a, b)| a.ty == b.ty)
    }

    /// Number of points of the dependent product.
    pub fn size(&self) -> Result<usize> {
        let mut n: usize = 1;
        for p in &self.ports {
            match &p.ty {
                PortType::Finite(a) => {
                    n = n.checked_mul(a.len()).ok_or(Error::SizeCapExceeded {
                        size: u128::MAX,
                        cap: usize::MAX as u128,
                    })?
                }
                PortType::Euclid(_) => return Err(Error::NotEnumerable),
            }
        }
        Ok(n)
    }

    /// Total number of real coordinates (Euclid) or ports (Finite).
    pub fn dims(&self) -> usize {
        self.ports
            .iter()
            .map(|p| match p.ty {
                PortType::Finite(_) => 1,
                PortType::Euclid(d) => d,
            })
            .sum()
    }

    /// Offset of each port's first coordinate.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.ports.len());
        let mut acc = 0;
        for p in &self.ports {
            off.push(acc);
            acc += match p.ty {
                PortType::Finite(_) => 1,
                PortType::Euclid(d) => d,
            };
        }
        off
    }

    pub fn radices(&self) -> Vec<usize> {
        self.ports.iter().map(|p| p.ty.width()).collect()
    }

    pub fn check_point(&self, pt: &Point) -> Result<()> {
        match pt {
            Point::Finite(c) => {
                if !self.is_finite() {
                    return Err(Error::InvalidPoint("finite point on Euclid ports".into()));
                }
                if c.len() != self.ports.len() {
                    return Err(Error::InvalidPoint(format!(
                        "arity {} but {} ports",
                        c.len(),
                        self.ports.len()
                    )));
                }
                for (i, (&x, p)) in c.iter().zip(&self.ports).enumerate() {
                    if x >= p.ty.width() {
                        return Err(Error::InvalidPoint(format!(
                            "coordinate {i} = {x} outside alphabet of `{}`",
                            p.name
                        )));
                    }
                }
                Ok(())
            }
            Point::Euclid(c) => {
                if !self.is_euclid() {
                    return Err(Error::InvalidPoint("real point on Finite ports".into()));
                }
                if c.len() != self.dims() {
                    return Err(Error::InvalidPoint(format!(
                        "{} reals but {} dims",
                        c.len(),
                        self.dims()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Parse a point given as one symbol per port.
    pub fn point_from_symbols<S: AsRef<str>>(&self, syms: &[S]) -> Result<Point> {
        if syms.len() != self.ports.len() {
            return Err(Error::InvalidPoint(format!(
                "expected {} symbols, got {}",
                self.ports.len(),
                syms.len()
            )));
        }
        let mut c = Vec::with_capacity(syms.len());
        for (s, p) in syms.iter().zip(&self.ports) {
            let a = p.ty.symbols().ok_or(Error::NotEnumerable)?;
            let i = a.iter().position(|x| x == s.as_ref()).ok_or_else(|| {
                Error::InvalidPoint(format!("`{}` not in alphabet of `{}`", s.as_ref(), p.name))
            })?;
            c.push(i);
        }
        Ok(Point::Finite(c))
    }

    pub fn symbols_of(&self, pt: &Point) -> Result<Vec<String>> {
        self.check_point(pt)?;
        match pt {
            Point::Finite(c) => Ok(c
                .iter()
                .zip(&self.ports)
                .map(|(&i, p)| p.ty.symbols().unwrap()[i].clone())
                .collect()),
            Point::Euclid(_) => Err(Error::NotEnumerable),
        }
    }

    /// Human label of a flat index, e.g. `T` or `(T,F)`.
    pub fn label(&self, idx: usize) -> String {
        match unflatten(self, idx).and_then(|p| self.symbols_of(&p)) {
            Ok(s) if s.len() == 1 => s[0].clone(),
            Ok(s) => format!("({})", s.join(",")),
            Err(_) => format!("#{idx}"),
        }
    }

    /// Enumerate all points in flat-index order.
    pub fn points(&self) -> Result<impl Iterator<Item = Point> + '_> {
        let n = self.size()?;
        Ok((0..n).map(move |i| unflatten(self, i).expect("in range")))
    }
}

impl fmt::Display for TypedFiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, p) in self.ports.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {}", p.name, p.ty)?;
        }
        write!(f, ">")
    }
}

/// Element of a dependent product.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Finite(Vec<usize>),
    Euclid(Vec<f64>),
}

impl Point {
    pub fn finite_coords(&self) -> Result<&[usize]> {
        match self {
            Point::Finite(c) => Ok(c),
            Point::Euclid(c) if c.is_empty() => Ok(&[]),
            Point::Euclid(_) => Err(Error::NotEnumerable),
        }
    }

    pub fn real_coords(&self) -> Result<&[f64]> {
        match self {
            Point::Euclid(c) => Ok(c),
            Point::Finite(c) if c.is_empty() => Ok(&[]),
            Point::Finite(_) => Err(Error::WrongInterpretation("expected a real point".into())),
        }
    }
}

pub fn flat_index(tfs: &TypedFiniteSet, pt: &Point) -> Result<usize> {
    if !tfs.is_finite() {
        return Err(Error::NotEnumerable);
    }
    tfs.check_point(pt)?;
    let c = pt.finite_coords()?;
    Ok(encode(&tfs.radices(), c))
}

pub fn unflatten(tfs: &TypedFiniteSet, idx: usize) -> Result<Point> {
    let size = tfs.size()?;
    if idx >= size {
        return Err(Error::IndexOutOfRange { index: idx, size });
    }
    Ok(Point::Finite(decode(&tfs.radices(), idx)))
}

/// Mixed-radix encode, first digit most significant.
pub fn encode(radices: &[usize], digits: &[usize]) -> usize {
    digits.iter().zip(radices).fold(0, |acc, (&d, &r)| acc * r + d)
}

pub fn decode(radices: &[usize], mut idx: usize) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (o, &r) in out.iter_mut().zip(radices).rev() {
        *o = idx % r;
        idx /= r;
    }
    out
}

/// A type-respecting map of ports.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedFunction {
    source: TypedFiniteSet,
    target: TypedFiniteSet,
    map: Vec<usize>,
}

impl TypedFunction {
    pub fn new(source: TypedFiniteSet, target: TypedFiniteSet, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.len() {
            return Err(Error::TypeMismatch(format!(
                "map has {} entries for {} source ports",
                map.len(),
                source.len()
            )));
        }
        for (p, &q) in map.iter().enumerate() {
            if q >= target.len() {
                return Err(Error::TypeMismatch(format!("port {p} maps to missing target {q}")));
            }
            if source.port(p).ty != target.port(q).ty {
                return Err(Error::TypeMismatch(format!(
                    "`{}`: {} vs `{}`: {}",
                    source.port(p).name,
                    source.port(p).ty,
                    target.port(q).name,
                    target.port(q).ty
                )));
            }
        }
        Ok(Self { source, target, map })
    }

    pub fn identity(t: &TypedFiniteSet) -> Self {
        Self { source: t.clone(), target: t.clone(), map: (0..t.len()).collect() }
    }

    pub fn source(&self) -> &TypedFiniteSet {
        &self.source
    }

    pub fn target(&self) -> &TypedFiniteSet {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &TypedFunction) -> Result<TypedFunction> {
        if !self.target.same_shape(&other.source) {
            return Err(Error::TypeMismatch("composing non-matching typed functions".into()));
        }
        Ok(TypedFunction {
            source: self.source.clone(),
            target: other.target.clone(),
            map: self.map.iter().map(|&q| other.map[q]).collect(),
        })
    }
}

/// Pull a point on the target back to the source: coordinate p is the target
/// coordinate at γ(p).
pub fn reindex(gamma: &TypedFunction, pt: &Point) -> Result<Point> {
    gamma.target.check_point(pt)?;
    match pt {
        Point::Finite(c) => Ok(Point::Finite(gamma.map.iter().map(|&q| c[q]).collect())),
        Point::Euclid(c) => {
            let off = gamma.target.offsets();
            let mut out = Vec::with_capacity(gamma.source.dims());
            for &q in &gamma.map {
                let d = gamma.target.port(q).ty.width();
                out.extend_from_slice(&c[off[q]..off[q] + d]);
            }
            Ok(Point::Euclid(out))
        }
    }
}

/// Concatenation `p1` then `p2`. Names are kept when distinct, otherwise every
/// port is prefixed with `l.` or `r.`.
pub fn tfs_sum(p1: &TypedFiniteSet, p2: &TypedFiniteSet) -> Result<TypedFiniteSet> {
    if let (Some(a), Some(b)) = (p1.kind(), p2.kind()) {
        if a != b {
            return Err(Error::MixedKinds);
        }
    }
    let clash = p1.ports.iter().any(|p| p2.position(&p.name).is_some());
    let mut ports = Vec::with_capacity(p1.len() + p2.len());
    for p in &p1.ports {
        let name = if clash { format!("l.{}", p.name) } else { p.name.clone() };
        ports.push(Port { name, ty: p.ty.clone() });
    }
    for p in &p2.ports {
        let name = if clash { format!("r.{}", p.name) } else { p.name.clone() };
        ports.push(Port { name, ty: p.ty.clone() });
    }
    Ok(TypedFiniteSet { ports })
}

/// Point of `p1 + p2` from a pair of points.
pub fn join_points(a: &Point, b: &Point) -> Result<Point> {
    match (a, b) {
        (Point::Euclid(x), Point::Euclid(y)) => Ok(Point::Euclid([x.as_slice(), y].concat())),
        (Point::Finite(x), Point::Finite(y)) => Ok(Point::Finite([x.as_slice(), y].concat())),
        (Point::Finite(x), Point::Euclid(y)) if x.is_empty() => Ok(Point::Euclid(y.clone())),
        (Point::Euclid(x), Point::Finite(y)) if x.is_empty() => Ok(Point::Finite(y.clone())),
        _ => Err(Error::MixedKinds),
    }
}

/// A box: inputs and outputs. Empty on both sides is the closed box.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Interface {
    pub inputs: TypedFiniteSet,
    pub outputs: TypedFiniteSet,
}

impl Interface {
    pub fn new(inputs: TypedFiniteSet, outputs: TypedFiniteSet) -> Self {
        Self { inputs, outputs }
    }

    pub fn closed() -> Self {
        Self::default()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.inputs.same_shape(&other.inputs) && self.outputs.same_shape(&other.outputs)
    }

    pub fn is_finite(&self) -> bool {
        self.inputs.is_finite() && self.outputs.is_finite()
    }

    pub fn is_euclid(&self) -> bool {
        self.inputs.is_euclid() && self.outputs.is_euclid()
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            inputs: tfs_sum(&self.inputs, &other.inputs)?,
            outputs: tfs_sum(&self.outputs, &other.outputs)?,
        })
    }
}

impl fmt::Display for Interface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.inputs, self.outputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bools(n: usize) -> TypedFiniteSet {
        let v: Vec<(String, PortType)> = (0..n)
            .map(|i| (format!("p{i}"), PortType::finite(&["T", "F"]).unwrap()))
            .collect();
        TypedFiniteSet::new(v).unwrap()
    }

    #[test]
    fn flat_index_examples() {
        let t = bools(1);
        assert_eq!(flat_index(&t, &Point::Finite(vec![0])).unwrap(), 0);
        let tt = bools(2);
        assert_eq!(flat_index(&tt, &Point::Finite(vec![1, 0])).unwrap(), 2);
        let rgb = TypedFiniteSet::finite(&[("c", &["Red", "Green", "Blue"][..])]).unwrap();
        let p = rgb.point_from_symbols(&["Blue"]).unwrap();
        assert_eq!(flat_index(&rgb, &p).unwrap(), 2);
    }

    #[test]
    fn unflatten_examples() {
        assert_eq!(unflatten(&bools(2), 3).unwrap(), Point::Finite(vec![1, 1]));
        let four = TypedFiniteSet::finite(&[("s", &["1", "2", "3", "4"][..])]).unwrap();
        let p = unflatten(&four, 1).unwrap();
        assert_eq!(four.symbols_of(&p).unwrap(), vec!["2"]);
        assert!(matches!(unflatten(&four, 4), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn euclid_not_enumerable() {
        let e = TypedFiniteSet::euclid(&[("x", 2)]).unwrap();
        assert_eq!(flat_index(&e, &Point::Euclid(vec![0.0, 1.0])), Err(Error::NotEnumerable));
    }

    #[test]
    fn invalid_points_rejected() {
        let t = bools(2);
        assert!(matches!(flat_index(&t, &Point::Finite(vec![0])), Err(Error::InvalidPoint(_))));
        assert!(matches!(flat_index(&t, &Point::Finite(vec![0, 2])), Err(Error::InvalidPoint(_))));
    }

    #[test]
    fn mixed_kinds_rejected() {
        let r = TypedFiniteSet::new(vec![
            ("a".into(), PortType::Euclid(1)),
            ("b".into(), PortType::finite(&["x"]).unwrap()),
        ]);
        assert_eq!(r, Err(Error::MixedKinds));
        assert!(PortType::finite(&["a", "a"]).is_err());
        assert!(PortType::finite(&[""]).is_err());
    }

    #[test]
    fn reindex_identity_and_diagonal() {
        let t = bools(1);
        let id = TypedFunction::identity(&t);
        assert_eq!(reindex(&id, &Point::Finite(vec![0])).unwrap(), Point::Finite(vec![0]));
        let diag = TypedFunction::new(bools(2), bools(1), vec![0, 0]).unwrap();
        assert_eq!(reindex(&diag, &Point::Finite(vec![1])).unwrap(), Point::Finite(vec![1, 1]));
    }

    #[test]
    fn reindex_euclid_blocks() {
        let src = TypedFiniteSet::euclid(&[("u", 2), ("v", 1)]).unwrap();
        let tgt = TypedFiniteSet::euclid(&[("a", 1), ("b", 2)]).unwrap();
        let g = TypedFunction::new(src, tgt, vec![1, 0]).unwrap();
        let out = reindex(&g, &Point::Euclid(vec![7.0, 8.0, 9.0])).unwrap();
        assert_eq!(out, Point::Euclid(vec![8.0, 9.0, 7.0]));
    }

    #[test]
    fn typed_function_rejects_type_change() {
        let a = TypedFiniteSet::finite(&[("a", &["x", "y"][..])]).unwrap();
        let b = TypedFiniteSet::finite(&[("b", &["x", "z"][..])]).unwrap();
        assert!(matches!(TypedFunction::new(a, b, vec![0]), Err(Error::TypeMismatch(_))));
    }

    #[test]
    fn sum_unit_and_size() {
        let e = TypedFiniteSet::empty();
        let t = bools(1);
        assert_eq!(tfs_sum(&e, &t).unwrap(), t);
        let a1 = TypedFiniteSet::finite(&[("a", &["1", "2", "3"][..])]).unwrap();
        let a2 = TypedFiniteSet::finite(&[("b", &["x", "y"][..])]).unwrap();
        assert_eq!(tfs_sum(&a1, &a2).unwrap().size().unwrap(), 6);
    }

    #[test]
    fn sum_renames_on_clash() {
        let s = tfs_sum(&bools(1), &bools(1)).unwrap();
        assert_eq!(s.port(0).name, "l.p0");
        assert_eq!(s.port(1).name, "r.p0");
    }

    #[test]
    fn box_split_recomposes() {
        // X with inputs <A1,A2> and outputs <B1,B2,B3>, split two ways
        let ty = |n: &str| PortType::finite(&[format!("{n}0"), format!("{n}1")]).unwrap();
        let tfs = |names: &[&str]| {
            TypedFiniteSet::new(names.iter().map(|n| (n.to_string(), ty(n))).collect()).unwrap()
        };
        let x = Interface::new(tfs(&["A1", "A2"]), tfs(&["B1", "B2", "B3"]));
        let x1 = Interface::new(tfs(&["A1"]), tfs(&["B1", "B2"]));
        let x2 = Interface::new(tfs(&["A2"]), tfs(&["B3"]));
        assert_eq!(x1.sum(&x2).unwrap(), x);
    }
}
