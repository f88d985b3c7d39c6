//! Syntax tree of a workspace file.

use wirecalc_core::expr::Expr;

/// Source position (1-based). Positions never take part in equality, so a
/// reparsed workspace compares equal to the original.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Workspace {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Type(TypeDecl),
    Box(BoxDecl),
    Wiring(WiringDecl),
    Discrete(DiscreteDecl),
    Weighted(WeightedDecl),
    Continuous(ContinuousDecl),
    Linear(LinearDecl),
    Matrix(MatrixDecl),
    Compose(ComposeDecl),
    Run(RunDecl),
}

impl Item {
    pub fn name(&self) -> &str {
        match self {
            Item::Type(d) => &d.name,
            Item::Box(d) => &d.name,
            Item::Wiring(d) => &d.name,
            Item::Discrete(d) => &d.name,
            Item::Weighted(d) => &d.name,
            Item::Continuous(d) => &d.name,
            Item::Linear(d) => &d.name,
            Item::Matrix(d) => &d.name,
            Item::Compose(d) => &d.name,
            Item::Run(d) => &d.command,
        }
    }

    pub fn pos(&self) -> Pos {
        match self {
            Item::Type(d) => d.pos,
            Item::Box(d) => d.pos,
            Item::Wiring(d) => d.pos,
            Item::Discrete(d) => d.pos,
            Item::Weighted(d) => d.pos,
            Item::Continuous(d) => d.pos,
            Item::Linear(d) => d.pos,
            Item::Matrix(d) => d.pos,
            Item::Compose(d) => d.pos,
            Item::Run(d) => d.pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypeExpr {
    Finite(Vec<String>),
    Euclid(usize),
    Alias(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeDecl {
    pub pos: Pos,
    pub name: String,
    pub ty: TypeExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortDecl {
    pub pos: Pos,
    pub dir: Dir,
    pub name: String,
    pub ty: TypeExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxDecl {
    pub pos: Pos,
    pub name: String,
    pub ports: Vec<PortDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub pos: Pos,
    pub name: String,
    pub box_name: String,
}

/// `owner.port`; the owner is a slot or the outer box.
#[derive(Debug, Clone, PartialEq)]
pub struct PortRef {
    pub pos: Pos,
    pub owner: String,
    pub port: String,
}

impl std::fmt::Display for PortRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.owner, self.port)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub pos: Pos,
    pub target: PortRef,
    pub source: PortRef,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WiringDecl {
    pub pos: Pos,
    pub name: String,
    pub slots: Vec<Slot>,
    pub outer: String,
    pub links: Vec<Link>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub pos: Pos,
    pub input: Vec<String>,
    pub state: String,
    pub output: Vec<String>,
    pub next: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDecl {
    pub pos: Pos,
    pub name: String,
    pub box_name: String,
    pub states: Vec<String>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDecl {
    pub pos: Pos,
    pub name: String,
    pub system: String,
    pub weights: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub pos: Pos,
    pub var: String,
    pub rhs: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousDecl {
    pub pos: Pos,
    pub name: String,
    pub box_name: String,
    pub states: Vec<String>,
    pub dots: Vec<Equation>,
    pub outs: Vec<Equation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearDecl {
    pub pos: Pos,
    pub name: String,
    pub box_name: String,
    pub dim: usize,
    pub m_in: Vec<Vec<f64>>,
    pub m_mid: Vec<Vec<f64>>,
    pub m_out: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiringTag {
    Nat,
    Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixDecl {
    pub pos: Pos,
    pub name: String,
    pub box_name: String,
    pub semiring: SemiringTag,
    /// Entries as written: integers, reals or `inf`.
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComposeDecl {
    pub pos: Pos,
    pub name: String,
    pub wiring: String,
    pub fillers: Vec<String>,
}

/// A stored command line, e.g. `run stst z --plan serial-chain`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunDecl {
    pub pos: Pos,
    pub command: String,
    pub args: Vec<String>,
}
