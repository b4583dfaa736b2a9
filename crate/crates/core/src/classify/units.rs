//! Evaluation on matrix units and the multigraph attached to a unit tuple.
//!
//! A product of matrix units `e_{k1 l1} ... e_{km lm}` is nonzero exactly
//! when consecutive indices chain, i.e. when the edges `k_i -> l_i` are
//! traversed as a walk. Which walks exist is read off from the directed
//! degrees of the multigraph.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::field::{FieldSpec, Scalar};
use crate::freealg::{FreePoly, PolyError};
use crate::matalg::Mat2;

/// Default cap on the number of unit tuples, `4^10`.
pub const DEFAULT_UNIT_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("{needed} unit tuples exceed the budget of {limit}")]
    TooManyTuples { needed: u128, limit: u64 },
    #[error("cannot parse matrix unit `{0}`; expected e.g. `e12`")]
    Parse(String),
    #[error("matrix unit index out of range 1..={n}")]
    IndexRange { n: usize },
    #[error("{got} units given for a polynomial in {expected} variables")]
    Arity { got: usize, expected: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `e_{row,col}`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatrixUnit {
    pub row: usize,
    pub col: usize,
}

impl MatrixUnit {
    pub fn new(row: usize, col: usize) -> Self {
        MatrixUnit { row, col }
    }

    pub fn to_mat2(self, field: FieldSpec) -> Mat2 {
        Mat2::unit(field, self.row, self.col)
    }
}

impl fmt::Display for MatrixUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.row < 10 && self.col < 10 {
            write!(f, "e{}{}", self.row, self.col)
        } else {
            write!(f, "e_{}_{}", self.row, self.col)
        }
    }
}

impl FromStr for MatrixUnit {
    type Err = UnitError;

    /// Accepts `e12`, or `e_10_3` when an index has several digits.
    fn from_str(s: &str) -> Result<Self, UnitError> {
        let bad = || UnitError::Parse(s.to_string());
        let body = s.trim().strip_prefix('e').ok_or_else(bad)?;
        let (r, c) = if let Some(rest) = body.strip_prefix('_') {
            rest.split_once('_').ok_or_else(bad)?
        } else if body.len() == 2 && body.is_ascii() {
            body.split_at(1)
        } else {
            return Err(bad());
        };
        let row: usize = r.parse().map_err(|_| bad())?;
        let col: usize = c.parse().map_err(|_| bad())?;
        if row == 0 || col == 0 {
            return Err(bad());
        }
        Ok(MatrixUnit { row, col })
    }
}

impl Serialize for MatrixUnit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct UnitTuple {
    pub n: usize,
    pub units: Vec<MatrixUnit>,
}

impl UnitTuple {
    pub fn new(n: usize, units: Vec<MatrixUnit>) -> Result<Self, UnitError> {
        if units.iter().any(|u| u.row > n || u.col > n) {
            return Err(UnitError::IndexRange { n });
        }
        Ok(UnitTuple { n, units })
    }

    /// Comma-separated units, e.g. `e12,e21`.
    pub fn parse(text: &str, n: usize) -> Result<Self, UnitError> {
        let units = text.split(',').map(str::parse).collect::<Result<Vec<_>, _>>()?;
        Self::new(n, units)
    }

    /// The `k`-th tuple of `m` units in canonical order: the first variable
    /// is the most significant digit, and units are ordered `e11, e12, ...`.
    pub fn from_index(n: usize, m: usize, mut k: u128) -> Self {
        let base = (n * n) as u128;
        let mut units = vec![MatrixUnit::new(1, 1); m];
        for slot in units.iter_mut().rev() {
            let u = (k % base) as usize;
            k /= base;
            *slot = MatrixUnit::new(u / n + 1, u % n + 1);
        }
        UnitTuple { n, units }
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn to_mat2s(&self, field: FieldSpec) -> Vec<Mat2> {
        assert_eq!(self.n, 2, "2x2 units only");
        self.units.iter().map(|u| u.to_mat2(field)).collect()
    }

    pub fn graph(&self) -> UnitGraph {
        UnitGraph::new(self)
    }
}

impl fmt::Display for UnitTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.units.iter().map(|u| u.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Directed multigraph with one edge `row -> col` per unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub out_degree: Vec<usize>,
    pub in_degree: Vec<usize>,
}

impl UnitGraph {
    pub fn new(t: &UnitTuple) -> Self {
        let mut out_degree = vec![0; t.n];
        let mut in_degree = vec![0; t.n];
        let edges: Vec<(usize, usize)> = t.units.iter().map(|u| (u.row, u.col)).collect();
        for &(a, b) in &edges {
            out_degree[a - 1] += 1;
            in_degree[b - 1] += 1;
        }
        UnitGraph { n: t.n, edges, out_degree, in_degree }
    }

    pub fn total_degree(&self, v: usize) -> usize {
        self.out_degree[v - 1] + self.in_degree[v - 1]
    }

    /// True when all edges lie in one weakly connected component.
    pub fn edges_connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a - 1), find(&mut parent, b - 1));
            parent[ra] = rb;
        }
        let mut roots = self.edges.iter().map(|&(a, _)| find(&mut parent, a - 1));
        match roots.next() {
            None => true,
            Some(r) => roots.all(|x| x == r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind")]
pub enum EulerVerdict {
    NoPathOrCircuit,
    /// Every walk through all edges starts at `from` and ends at `to`.
    PathClass {
        from: usize,
        to: usize,
    },
    CircuitClass,
}

impl fmt::Display for EulerVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EulerVerdict::NoPathOrCircuit => write!(f, "NoPathOrCircuit"),
            EulerVerdict::PathClass { from, to } => write!(f, "PathClass({from},{to})"),
            EulerVerdict::CircuitClass => write!(f, "CircuitClass"),
        }
    }
}

/// Predicts the shape of any product of the units in some order.
///
/// Uses directed degrees: a circuit needs every vertex balanced, a path
/// needs one vertex with one surplus outgoing edge (the start) and one with
/// one surplus incoming edge (the end). Both need the edges connected.
pub fn euler_predict(t: &UnitTuple) -> EulerVerdict {
    let g = t.graph();
    if !g.edges_connected() {
        return EulerVerdict::NoPathOrCircuit;
    }
    let mut start = None;
    let mut end = None;
    for v in 1..=g.n {
        let (o, i) = (g.out_degree[v - 1] as i64, g.in_degree[v - 1] as i64);
        match o - i {
            0 => {}
            1 if start.is_none() => start = Some(v),
            -1 if end.is_none() => end = Some(v),
            _ => return EulerVerdict::NoPathOrCircuit,
        }
    }
    match (start, end) {
        (None, None) => EulerVerdict::CircuitClass,
        (Some(from), Some(to)) => EulerVerdict::PathClass { from, to },
        _ => EulerVerdict::NoPathOrCircuit,
    }
}

/// Dense `n x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatN {
    n: usize,
    field: FieldSpec,
    entries: Vec<Scalar>,
}

impl MatN {
    pub fn zero(n: usize, field: FieldSpec) -> Self {
        MatN { n, field, entries: vec![field.zero(); n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[(i - 1) * self.n + (j - 1)]
    }

    fn add_at(&mut self, i: usize, j: usize, c: &Scalar) {
        let k = (i - 1) * self.n + (j - 1);
        self.entries[k] = &self.entries[k] + c;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        self.nonzero_positions().all(|(i, j)| i == j)
    }

    pub fn nonzero_positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        self.entries.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(k, _)| (k / n + 1, k % n + 1))
    }

    pub fn to_mat2(&self) -> Option<Mat2> {
        if self.n != 2 {
            return None;
        }
        let e: [Scalar; 4] = self.entries.clone().try_into().ok()?;
        Mat2::new(self.field, e).ok()
    }
}

impl fmt::Display for MatN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .chunks(self.n)
            .map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

impl Serialize for MatN {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Value of `p` at a tuple of units, computed word by word: each word
/// contributes its coefficient at `(first row, last column)` when its
/// letters chain and nothing otherwise.
pub fn evaluate_on_units(p: &FreePoly, t: &UnitTuple) -> Result<MatN, UnitError> {
    if t.len() != p.nvars() {
        return Err(UnitError::Arity { got: t.len(), expected: p.nvars() });
    }
    let mut out = MatN::zero(t.n, p.field());
    for (word, c) in p.terms() {
        let letters = word.letters();
        let Some(&first) = letters.first() else {
            for i in 1..=t.n {
                out.add_at(i, i, c);
            }
            continue;
        };
        let start = t.units[first - 1].row;
        let mut at = t.units[first - 1].col;
        let chained = letters[1..].iter().all(|&l| {
            let u = t.units[l - 1];
            let ok = u.row == at;
            at = u.col;
            ok
        });
        if chained {
            out.add_at(start, at, c);
        }
    }
    Ok(out)
}

/// Every `n^(2m)` unit tuple with its value, in canonical order.
pub fn unit_evaluations(p: &FreePoly, n: usize, budget: u64) -> Result<Vec<(UnitTuple, MatN)>, UnitError> {
    let m = p.nvars();
    let count = ((n * n) as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if count > budget as u128 {
        return Err(UnitError::TooManyTuples { needed: count, limit: budget });
    }
    let out = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let t = UnitTuple::from_index(n, m, k as u128);
            let v = evaluate_on_units(p, &t).expect("arity matches");
            (t, v)
        })
        .collect();
    Ok(out)
}

/// Whether the value of multilinear `p` at `t` has the predicted shape.
pub fn check_euler(p: &FreePoly, t: &UnitTuple) -> Result<bool, UnitError> {
    if !p.is_multilinear() {
        return Err(PolyError::NotMultilinear.into());
    }
    let v = evaluate_on_units(p, t)?;
    Ok(match euler_predict(t) {
        EulerVerdict::NoPathOrCircuit => v.is_zero(),
        EulerVerdict::PathClass { from, to } => v.nonzero_positions().all(|pos| pos == (from, to)),
        EulerVerdict::CircuitClass => v.is_diagonal(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::{capelli_poly, standard_poly};
    use crate::matalg::evaluate;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn p(text: &str, m: usize) -> FreePoly {
        FreePoly::parse(text, m, q()).unwrap()
    }

    fn t(text: &str) -> UnitTuple {
        UnitTuple::parse(text, 2).unwrap()
    }

    fn m2(text: &str) -> Mat2 {
        Mat2::parse(text, q()).unwrap()
    }

    #[test]
    fn commutator_on_units() {
        let c = p("[x1,x2]", 2);
        assert_eq!(evaluate_on_units(&c, &t("e12,e21")).unwrap().to_mat2(), Some(m2("1,0;0,-1")));
        assert!(evaluate_on_units(&c, &t("e11,e22")).unwrap().is_zero());
        assert!(evaluate_on_units(&p("x1*x2 + x2*x1", 2), &t("e12,e12")).unwrap().is_zero());
    }

    #[test]
    fn unit_evaluation_matches_matrix_product() {
        for f in [standard_poly(3, q()), p("[x1,x2]*x3 - 2*x3*x1*x2", 3)] {
            for (tuple, v) in unit_evaluations(&f, 2, 1 << 20).unwrap() {
                let direct = evaluate(&f, &tuple.to_mat2s(q()));
                assert_eq!(v.to_mat2().unwrap(), direct, "{tuple}");
            }
        }
    }

    #[test]
    fn canonical_order() {
        let evals = unit_evaluations(&p("x1*x2", 2), 2, 16).unwrap();
        let order: Vec<String> = evals.iter().take(5).map(|(t, _)| t.to_string()).collect();
        assert_eq!(order, ["e11,e11", "e11,e12", "e11,e21", "e11,e22", "e12,e11"]);
        assert!(matches!(
            unit_evaluations(&p("x1*x2", 2), 2, 15),
            Err(UnitError::TooManyTuples { needed: 16, limit: 15 })
        ));
    }

    #[test]
    fn euler_examples() {
        assert_eq!(euler_predict(&t("e12,e21")), EulerVerdict::CircuitClass);
        assert_eq!(euler_predict(&t("e11,e12")), EulerVerdict::PathClass { from: 1, to: 2 });
        assert_eq!(euler_predict(&t("e12,e12")), EulerVerdict::NoPathOrCircuit);
        let sym = p("x1*x2 + x2*x1", 2);
        assert_eq!(evaluate_on_units(&sym, &t("e12,e21")).unwrap().to_mat2(), Some(m2("1,0;0,1")));
        assert_eq!(evaluate_on_units(&sym, &t("e11,e12")).unwrap().to_mat2(), Some(m2("0,1;0,0")));
        for u in ["e12,e21", "e11,e12", "e12,e12"] {
            assert!(check_euler(&sym, &t(u)).unwrap());
        }
    }

    #[test]
    fn disconnected_graphs_have_no_walk() {
        let t3 = UnitTuple::parse("e11,e22,e33", 3).unwrap();
        assert_eq!(euler_predict(&t3), EulerVerdict::NoPathOrCircuit);
        let t3 = UnitTuple::parse("e12,e23,e31", 3).unwrap();
        assert_eq!(euler_predict(&t3), EulerVerdict::CircuitClass);
    }

    #[test]
    fn euler_holds_for_capelli_on_three_by_three_units() {
        // oracle: brute-force all 9^3 tuples for a 3-variable multilinear polynomial
        let f = standard_poly(3, q());
        for (tuple, v) in unit_evaluations(&f, 3, 1 << 20).unwrap() {
            let verdict = euler_predict(&tuple);
            if !v.is_zero() {
                assert_ne!(verdict, EulerVerdict::NoPathOrCircuit, "{tuple}");
            }
            assert!(check_euler(&f, &tuple).unwrap());
        }
        let c = capelli_poly(2, q());
        for (tuple, _) in unit_evaluations(&c, 2, 1 << 20).unwrap() {
            assert!(check_euler(&c, &tuple).unwrap());
        }
    }

    #[test]
    fn non_multilinear_is_rejected() {
        assert!(check_euler(&p("x1*x1", 1), &t("e11")).is_err());
    }

    #[test]
    fn unit_parsing() {
        assert_eq!("e21".parse::<MatrixUnit>().unwrap(), MatrixUnit::new(2, 1));
        assert_eq!("e_10_3".parse::<MatrixUnit>().unwrap(), MatrixUnit::new(10, 3));
        assert!("f12".parse::<MatrixUnit>().is_err());
        assert!("e02".parse::<MatrixUnit>().is_err());
        assert!(UnitTuple::parse("e13", 2).is_err());
    }
}
