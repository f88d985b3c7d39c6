//! Complete semirings: counts with infinity, non-negative reals with infinity,
//! and finite sets of state labels under disjoint union and product.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub trait Semiring: Clone + PartialEq + fmt::Debug + fmt::Display {
    /// Short tag used in serialized matrices.
    const TAG: &'static str;
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn is_zero(&self) -> bool;
    fn is_infinite(&self) -> bool;
}

/// Natural numbers with an absorbing infinity. Finite overflow is an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NatPlus {
    Fin(u64),
    Inf,
}

impl From<u64> for NatPlus {
    fn from(v: u64) -> Self {
        NatPlus::Fin(v)
    }
}

impl fmt::Display for NatPlus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatPlus::Fin(v) => write!(f, "{v}"),
            NatPlus::Inf => write!(f, "inf"),
        }
    }
}

impl Semiring for NatPlus {
    const TAG: &'static str = "nat";

    fn zero() -> Self {
        NatPlus::Fin(0)
    }

    fn one() -> Self {
        NatPlus::Fin(1)
    }

    fn add(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (NatPlus::Fin(a), NatPlus::Fin(b)) => {
                a.checked_add(*b).map(NatPlus::Fin).ok_or(Error::ArithmeticOverflow("nat add"))
            }
            _ => Ok(NatPlus::Inf),
        }
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (NatPlus::Fin(0), _) | (_, NatPlus::Fin(0)) => Ok(NatPlus::Fin(0)),
            (NatPlus::Fin(a), NatPlus::Fin(b)) => {
                a.checked_mul(*b).map(NatPlus::Fin).ok_or(Error::ArithmeticOverflow("nat mul"))
            }
            _ => Ok(NatPlus::Inf),
        }
    }

    fn is_zero(&self) -> bool {
        *self == NatPlus::Fin(0)
    }

    fn is_infinite(&self) -> bool {
        *self == NatPlus::Inf
    }
}

/// Non-negative reals with +inf, where 0·inf = 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RealPlus(f64);

impl RealPlus {
    pub const INF: RealPlus = RealPlus(f64::INFINITY);

    pub fn new(v: f64) -> Result<Self> {
        if v.is_nan() || v < 0.0 {
            return Err(Error::NegativeValue(v));
        }
        Ok(RealPlus(if v == 0.0 { 0.0 } else { v }))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl fmt::Display for RealPlus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Semiring for RealPlus {
    const TAG: &'static str = "real";

    fn zero() -> Self {
        RealPlus(0.0)
    }

    fn one() -> Self {
        RealPlus(1.0)
    }

    fn add(&self, other: &Self) -> Result<Self> {
        Ok(RealPlus(self.0 + other.0))
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        if self.0 == 0.0 || other.0 == 0.0 {
            return Ok(RealPlus(0.0));
        }
        Ok(RealPlus(self.0 * other.0))
    }

    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }

    fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }
}

/// A state label: a flat tuple of atoms, plus provenance tags added by tagged
/// wiring application.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    pub tag: Vec<usize>,
    pub atoms: Vec<Arc<str>>,
}

impl Element {
    pub fn atom(s: &str) -> Self {
        Element { tag: Vec::new(), atoms: vec![Arc::from(s)] }
    }

    pub fn unit() -> Self {
        Element { tag: Vec::new(), atoms: Vec::new() }
    }

    pub fn from_atoms<S: AsRef<str>>(atoms: &[S]) -> Self {
        Element { tag: Vec::new(), atoms: atoms.iter().map(|a| Arc::from(a.as_ref())).collect() }
    }

    /// Pair, flattened left to right.
    pub fn pair(&self, other: &Element) -> Element {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let mut tag = self.tag.clone();
        tag.extend(other.tag.iter().cloned());
        Element { tag, atoms }
    }

    pub fn tagged(&self, k: usize) -> Element {
        let mut tag = Vec::with_capacity(self.tag.len() + 1);
        tag.push(k);
        tag.extend(self.tag.iter().cloned());
        Element { tag, atoms: self.atoms.clone() }
    }

    /// Tuple form such as `(2,p)`; single atoms print bare.
    pub fn tuple_string(&self) -> String {
        if self.atoms.len() == 1 {
            self.atoms[0].to_string()
        } else {
            format!("({})", self.atoms.iter().map(|a| a.as_ref()).collect::<Vec<_>>().join(","))
        }
    }
}

impl fmt::Display for Element {
    /// Atoms juxtaposed, e.g. `a111111p`; tags print as `k:` prefixes.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tag {
            write!(f, "{t}:")?;
        }
        if self.atoms.is_empty() {
            return write!(f, "()");
        }
        for a in &self.atoms {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Finite set of elements. Addition is disjoint union and fails on overlap;
/// multiplication is the cartesian product.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StateSet(pub BTreeSet<Element>);

impl StateSet {
    pub fn singleton(e: Element) -> Self {
        StateSet(std::iter::once(e).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Element> {
        self.0.iter()
    }

    pub fn insert(&mut self, e: Element) -> Result<()> {
        let label = e.to_string();
        if !self.0.insert(e) {
            return Err(Error::DisjointnessViolation(label));
        }
        Ok(())
    }

    pub fn contains_str(&self, s: &str) -> bool {
        self.0.iter().any(|e| e.to_string() == s)
    }

    pub fn labels(&self) -> Vec<String> {
        self.0.iter().map(|e| e.to_string()).collect()
    }
}

impl FromIterator<Element> for StateSet {
    fn from_iter<I: IntoIterator<Item = Element>>(it: I) -> Self {
        StateSet(it.into_iter().collect())
    }
}

impl fmt::Display for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "{{}}");
        }
        write!(f, "{{{}}}", self.labels().join(","))
    }
}

impl Semiring for StateSet {
    const TAG: &'static str = "set";

    fn zero() -> Self {
        StateSet::default()
    }

    fn one() -> Self {
        StateSet::singleton(Element::unit())
    }

    fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for e in &other.0 {
            out.insert(e.clone())?;
        }
        Ok(out)
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = BTreeSet::new();
        for a in &self.0 {
            for b in &other.0 {
                out.insert(a.pair(b));
            }
        }
        Ok(StateSet(out))
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn is_infinite(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nats() -> Vec<NatPlus> {
        vec![NatPlus::Fin(0), NatPlus::Fin(1), NatPlus::Fin(2), NatPlus::Fin(7), NatPlus::Inf]
    }

    fn reals() -> Vec<RealPlus> {
        [0.0, 0.5, 1.0, 3.0, f64::INFINITY].iter().map(|&v| RealPlus::new(v).unwrap()).collect()
    }

    fn axioms<R: Semiring>(xs: &[R]) {
        for a in xs {
            assert_eq!(a.add(&R::zero()).unwrap(), *a);
            assert_eq!(a.mul(&R::one()).unwrap(), *a);
            assert!(a.mul(&R::zero()).unwrap().is_zero());
            assert!(R::zero().mul(a).unwrap().is_zero());
            for b in xs {
                assert_eq!(a.add(b).unwrap(), b.add(a).unwrap());
                assert_eq!(a.mul(b).unwrap(), b.mul(a).unwrap());
                if b.is_infinite() {
                    assert!(a.add(b).unwrap().is_infinite());
                    assert_eq!(a.mul(b).unwrap().is_infinite(), !a.is_zero());
                }
                for c in xs {
                    assert_eq!(a.add(b).unwrap().add(c).unwrap(), a.add(&b.add(c).unwrap()).unwrap());
                    assert_eq!(a.mul(b).unwrap().mul(c).unwrap(), a.mul(&b.mul(c).unwrap()).unwrap());
                    assert_eq!(
                        a.mul(&b.add(c).unwrap()).unwrap(),
                        a.mul(b).unwrap().add(&a.mul(c).unwrap()).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn nat_axioms() {
        axioms(&nats());
    }

    #[test]
    fn real_axioms() {
        axioms(&reals());
    }

    #[test]
    fn zero_times_inf_is_zero() {
        assert_eq!(RealPlus::new(0.0).unwrap().mul(&RealPlus::INF).unwrap(), RealPlus::zero());
        assert_eq!(NatPlus::Fin(0).mul(&NatPlus::Inf).unwrap(), NatPlus::Fin(0));
    }

    #[test]
    fn nat_overflow_is_error() {
        let big = NatPlus::Fin(u64::MAX);
        assert_eq!(big.add(&NatPlus::Fin(1)), Err(Error::ArithmeticOverflow("nat add")));
        assert_eq!(big.mul(&NatPlus::Fin(2)), Err(Error::ArithmeticOverflow("nat mul")));
    }

    #[test]
    fn negative_real_rejected() {
        assert!(RealPlus::new(-1.0).is_err());
        assert!(RealPlus::new(f64::NAN).is_err());
    }

    #[test]
    fn set_product_and_union() {
        let a: StateSet = [Element::atom("1"), Element::atom("4")].into_iter().collect();
        let b: StateSet = [Element::atom("p"), Element::atom("r")].into_iter().collect();
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.labels(), vec!["1p", "1r", "4p", "4r"]);
        assert!(matches!(a.add(&a), Err(Error::DisjointnessViolation(_))));
        assert_eq!(a.mul(&StateSet::one()).unwrap(), a);
    }

    #[test]
    fn element_display() {
        let e = Element::atom("2").pair(&Element::atom("p"));
        assert_eq!(e.to_string(), "2p");
        assert_eq!(e.tuple_string(), "(2,p)");
        assert_eq!(e.tagged(3).to_string(), "3:2p");
    }
}
