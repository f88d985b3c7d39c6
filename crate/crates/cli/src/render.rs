//! Text and machine renderings of matrices and vectors.

use wirecalc_core::matrix::Matrix;
use wirecalc_core::semiring::{NatPlus, RealPlus, Semiring, StateSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

/// Shortest form that parses back to the same double.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:?}")
    }
}

pub fn vector(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}

pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for NatPlus {
    fn cell(&self) -> String {
        self.to_string()
    }
}

impl Cell for RealPlus {
    fn cell(&self) -> String {
        if self.value().is_infinite() {
            "inf".into()
        } else {
            num(self.value())
        }
    }
}

impl Cell for StateSet {
    fn cell(&self) -> String {
        let mut l = self.labels();
        l.sort();
        format!("{{{}}}", l.join(","))
    }
}

fn labels<R: Semiring>(m: &Matrix<R>) -> (Vec<String>, Vec<String>) {
    let rows = (0..m.nrows()).map(|i| m.rows().label(i)).collect();
    let cols = (0..m.ncols()).map(|j| m.cols().label(j)).collect();
    (rows, cols)
}

/// Aligned table with the row header "Is fixed by:" and column header "Outputs:".
pub fn matrix_text<R: Semiring + Cell>(title: &str, m: &Matrix<R>) -> String {
    let (rows, cols) = labels(m);
    let dense = m.to_dense();
    let mut grid: Vec<Vec<String>> = vec![std::iter::once("Is fixed by:".to_string()).chain(cols).collect()];
    for (i, r) in dense.iter().enumerate() {
        grid.push(std::iter::once(rows[i].clone()).chain(r.iter().map(Cell::cell)).collect());
    }
    let ncol = grid[0].len();
    let widths: Vec<usize> =
        (0..ncol).map(|j| grid.iter().map(|row| row[j].chars().count()).max().unwrap_or(0)).collect();
    let mut out = format!("{title}\n");
    out.push_str(&format!("{:w$}  Outputs:\n", "", w = widths[0]));
    for row in &grid {
        let cells: Vec<String> = row.iter().enumerate().map(|(j, c)| format!("{c:w$}", w = widths[j])).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// `matrix TAG R C`, then row and column labels, then one `i j value` line per
/// nonzero entry in row-major order.
pub fn matrix_machine<R: Semiring + Cell>(m: &Matrix<R>) -> String {
    let (rows, cols) = labels(m);
    let mut out = format!("matrix {} {} {}\n", R::TAG, m.nrows(), m.ncols());
    out.push_str(&format!("rows {}\n", rows.join(" ")));
    out.push_str(&format!("cols {}\n", cols.join(" ")));
    for (i, r) in m.to_dense().iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            if !v.is_zero() {
                out.push_str(&format!("{i} {j} {}\n", v.cell()));
            }
        }
    }
    out
}

pub fn matrix<R: Semiring + Cell>(format: Format, title: &str, m: &Matrix<R>) -> String {
    match format {
        Format::Text => matrix_text(title, m),
        Format::Machine => matrix_machine(m),
    }
}

pub fn real_rows(name: &str, m: &nalgebra::DMatrix<f64>) -> String {
    let rows: Vec<String> = (0..m.nrows()).map(|i| format!("[{}]", m.row(i).iter().map(|v| num(*v)).collect::<Vec<_>>().join(", "))).collect();
    format!("{name} = [{}]\n", rows.join(", "))
}
