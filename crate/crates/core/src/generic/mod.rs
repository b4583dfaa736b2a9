//! Sparse commutative polynomials and evaluation on generic 2x2 matrices.
//!
//! The variable `x_i` becomes the matrix of indeterminates
//! `u_{4(i-1)}, ..., u_{4(i-1)+3}` (row-major), so a polynomial is a PI of
//! `M_2` exactly when all four entries of its generic evaluation vanish.

mod probe;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldSpec, Scalar};
use crate::freealg::FreePoly;

pub use probe::{probabilistic_probe, ProbeConfig, ProbeError, ProbeReport};

/// Default cap on stored monomials in symbolic mode.
pub const DEFAULT_TERM_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("symbolic expansion needs about {needed} terms, budget is {limit}; use probabilistic mode")]
pub struct BudgetExceeded {
    pub needed: usize,
    pub limit: usize,
}

/// Term-count limit shared by one symbolic computation; `peak` records the
/// largest intermediate size seen.
#[derive(Debug, Clone)]
pub struct TermBudget {
    pub limit: usize,
    pub peak: usize,
}

impl TermBudget {
    pub fn new(limit: usize) -> Self {
        TermBudget { limit, peak: 0 }
    }

    fn charge(&mut self, needed: usize) -> Result<(), BudgetExceeded> {
        if needed > self.limit {
            return Err(BudgetExceeded { needed, limit: self.limit });
        }
        self.peak = self.peak.max(needed);
        Ok(())
    }
}

impl Default for TermBudget {
    fn default() -> Self {
        Self::new(DEFAULT_TERM_BUDGET)
    }
}

/// Exponent vector, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Box<[u8]>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n].into_boxed_slice())
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0.iter().zip(other.0.iter()).map(|(a, b)| a.checked_add(*b).expect("exponent overflow")).collect(),
        )
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for Monomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// A sparse commutative polynomial in `n` indeterminates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComPoly {
    n: usize,
    field: FieldSpec,
    terms: BTreeMap<Monomial, Scalar>,
}

impl ComPoly {
    pub fn zero(n: usize, field: FieldSpec) -> Self {
        ComPoly { n, field, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Scalar) -> Self {
        let mut p = Self::zero(n, c.field());
        p.add_term(Monomial::one(n), c);
        p
    }

    /// The indeterminate `u_k` (0-based).
    pub fn indeterminate(n: usize, field: FieldSpec, k: usize) -> Self {
        let mut e = vec![0u8; n];
        e[k] = 1;
        let mut p = Self::zero(n, field);
        p.add_term(Monomial(e.into_boxed_slice()), field.one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(e) => {
                *e = &*e + &c;
                if e.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn num_indeterminates(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Greatest monomial in graded-lex order with its coefficient.
    pub fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn add(&self, other: &ComPoly) -> ComPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &ComPoly) -> ComPoly {
        self.add(&other.scale(&-self.field.one()))
    }

    pub fn scale(&self, c: &Scalar) -> ComPoly {
        let mut out = Self::zero(self.n, self.field);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * c);
        }
        out
    }

    pub fn mul(&self, other: &ComPoly, budget: &mut TermBudget) -> Result<ComPoly, BudgetExceeded> {
        budget.charge(self.len().saturating_mul(other.len()))?;
        let mut acc: HashMap<Monomial, Scalar> = HashMap::with_capacity(self.len() * other.len());
        for (m1, a) in &self.terms {
            for (m2, b) in &other.terms {
                let m = m1.mul(m2);
                let c = a * b;
                match acc.get_mut(&m) {
                    Some(e) => *e = &*e + &c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Ok(ComPoly { n: self.n, field: self.field, terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() })
    }

    /// Value at a point (one scalar per indeterminate).
    pub fn evaluate(&self, point: &[Scalar]) -> Scalar {
        assert_eq!(point.len(), self.n);
        let mut total = self.field.zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (x, &e) in point.iter().zip(m.0.iter()) {
                if e > 0 {
                    v = &v * &x.pow(e as u64);
                }
            }
            total = &total + &v;
        }
        total
    }
}

impl fmt::Display for ComPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*u{i}")?,
                    e => write!(f, "*u{i}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

/// A 2x2 matrix with [`ComPoly`] entries, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericMat {
    entries: [ComPoly; 4],
}

impl GenericMat {
    pub fn identity(n: usize, field: FieldSpec) -> Self {
        let one = ComPoly::constant(n, field.one());
        let zero = ComPoly::zero(n, field);
        GenericMat { entries: [one.clone(), zero.clone(), zero, one] }
    }

    pub fn zero(n: usize, field: FieldSpec) -> Self {
        let zero = ComPoly::zero(n, field);
        GenericMat { entries: [zero.clone(), zero.clone(), zero.clone(), zero] }
    }

    /// The generic matrix of variable `i` (1-based) among `m`.
    pub fn variable(m: usize, field: FieldSpec, i: usize) -> Self {
        let n = 4 * m;
        let base = 4 * (i - 1);
        GenericMat { entries: std::array::from_fn(|k| ComPoly::indeterminate(n, field, base + k)) }
    }

    pub fn entries(&self) -> &[ComPoly; 4] {
        &self.entries
    }

    /// Entry `(i, j)`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> &ComPoly {
        &self.entries[(i - 1) * 2 + (j - 1)]
    }

    pub fn stored_terms(&self) -> usize {
        self.entries.iter().map(ComPoly::len).sum()
    }

    pub fn mul(&self, o: &GenericMat, budget: &mut TermBudget) -> Result<GenericMat, BudgetExceeded> {
        let [a, b, c, d] = &self.entries;
        let [p, q, r, s] = &o.entries;
        let mut prod = |x: &ComPoly, y: &ComPoly, z: &ComPoly, w: &ComPoly| -> Result<ComPoly, BudgetExceeded> {
            Ok(x.mul(y, budget)?.add(&z.mul(w, budget)?))
        };
        Ok(GenericMat { entries: [prod(a, p, b, r)?, prod(a, q, b, s)?, prod(c, p, d, r)?, prod(c, q, d, s)?] })
    }

    fn add_scaled(&mut self, c: &Scalar, o: &GenericMat) {
        for (x, y) in self.entries.iter_mut().zip(&o.entries) {
            *x = x.add(&y.scale(c));
        }
    }

    pub fn trace(&self) -> ComPoly {
        self.entries[0].add(&self.entries[3])
    }

    pub fn det(&self, budget: &mut TermBudget) -> Result<ComPoly, BudgetExceeded> {
        let [a, b, c, d] = &self.entries;
        Ok(a.mul(d, budget)?.sub(&b.mul(c, budget)?))
    }

    pub fn is_identically_zero(&self) -> bool {
        self.entries.iter().all(ComPoly::is_zero)
    }

    pub fn is_central(&self) -> bool {
        self.entries[1].is_zero() && self.entries[2].is_zero() && self.entries[0] == self.entries[3]
    }

    pub fn is_trace_zero(&self) -> bool {
        self.trace().is_zero()
    }

    /// Specializes every indeterminate.
    pub fn evaluate(&self, point: &[Scalar]) -> [Scalar; 4] {
        std::array::from_fn(|k| self.entries[k].evaluate(point))
    }
}

/// Upper bound on the stored terms of the generic evaluation: a word of
/// length `L` contributes at most `2^(L-1)` monomials to each entry.
pub fn expansion_estimate(p: &FreePoly) -> usize {
    p.terms()
        .map(|(w, _)| match w.len() {
            0 => 2,
            l if l > 40 => usize::MAX / 8,
            l => 4usize << (l - 1),
        })
        .fold(0usize, usize::saturating_add)
}

/// Substitutes generic matrices for the variables of `p` and expands.
pub fn generic_eval(p: &FreePoly, budget: &mut TermBudget) -> Result<GenericMat, BudgetExceeded> {
    budget.charge(expansion_estimate(p))?;
    let m = p.nvars();
    let field = p.field();
    let vars: Vec<GenericMat> = (1..=m).map(|i| GenericMat::variable(m, field, i)).collect();
    let mut total = GenericMat::zero(4 * m, field);
    let mut inner = budget.clone();
    let limit = budget.limit;
    let mut peak_stored = 0;
    p.evaluate_with(
        GenericMat::identity(4 * m, field),
        &vars,
        |a, b| a.mul(b, &mut inner),
        |c, v| {
            total.add_scaled(c, v);
            let stored = total.stored_terms();
            if stored > limit {
                return Err(BudgetExceeded { needed: stored, limit });
            }
            peak_stored = peak_stored.max(stored);
            Ok(())
        },
    )?;
    budget.peak = budget.peak.max(inner.peak).max(peak_stored);
    Ok(total)
}

/// Outcome of testing `tau = c * delta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Proportionality {
    Proportional {
        factor: Scalar,
        /// Set when `delta` is the zero polynomial.
        degenerate: bool,
    },
    NotProportional {
        /// Monomials certifying the failure.
        witnesses: Vec<Monomial>,
        degenerate: bool,
    },
}

pub fn proportionality(tau: &ComPoly, delta: &ComPoly) -> Proportionality {
    let zero = delta.field.zero();
    if delta.is_zero() {
        return if tau.is_zero() {
            Proportionality::Proportional { factor: zero, degenerate: true }
        } else {
            let lead = tau.leading().map(|(m, _)| m.clone()).into_iter().collect();
            Proportionality::NotProportional { witnesses: lead, degenerate: true }
        };
    }
    let Some((mt, ct)) = tau.leading() else {
        return Proportionality::Proportional { factor: zero, degenerate: false };
    };
    let (md, cd) = delta.leading().expect("nonzero");
    if mt != md {
        return Proportionality::NotProportional { witnesses: vec![mt.clone(), md.clone()], degenerate: false };
    }
    let c = ct.checked_div(cd).expect("nonzero leading coefficient");
    let rest = tau.sub(&delta.scale(&c));
    match rest.leading() {
        None => Proportionality::Proportional { factor: c, degenerate: false },
        Some((m, _)) => Proportionality::NotProportional { witnesses: vec![m.clone()], degenerate: false },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::standard_poly;
    use crate::matalg::{all_matrices, Mat2};

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn p(text: &str, m: usize) -> FreePoly {
        FreePoly::parse(text, m, q()).unwrap()
    }

    fn eval(f: &FreePoly) -> GenericMat {
        generic_eval(f, &mut TermBudget::default()).unwrap()
    }

    #[test]
    fn single_variable_is_generic() {
        let g = eval(&p("x1", 1));
        for (k, e) in g.entries().iter().enumerate() {
            assert_eq!(e, &ComPoly::indeterminate(4, q(), k));
        }
    }

    #[test]
    fn commutator_trace_vanishes() {
        let g = eval(&p("[x1,x2]", 2));
        assert!(g.is_trace_zero());
        assert!(!g.is_identically_zero());
    }

    #[test]
    fn s4_is_an_identity() {
        assert!(eval(&standard_poly(4, q())).is_identically_zero());
        assert!(!eval(&standard_poly(3, q())).is_identically_zero());
    }

    #[test]
    fn central_and_trace_zero_powers() {
        let sq = eval(&p("[x1,x2]^2", 2));
        assert!(sq.is_central());
        let cube = eval(&p("[x1,x2]^3", 2));
        assert!(cube.is_trace_zero());
        assert!(!cube.is_central());
    }

    #[test]
    fn proportionality_cases() {
        let mut b = TermBudget::default();
        let x = eval(&p("x1", 1));
        let tr = x.trace();
        let tr2 = tr.mul(&tr, &mut b).unwrap();
        let det = x.det(&mut b).unwrap();
        // oracle: tr^2 contains u0^2, det has no squares at all
        assert!(det.terms().all(|(m, _)| m.exponents().iter().all(|&e| e <= 1)));
        assert!(tr2.terms().any(|(m, _)| m.exponents()[0] == 2));
        assert!(matches!(proportionality(&tr2, &det), Proportionality::NotProportional { .. }));

        let c = eval(&p("[x1,x2]", 2));
        let det = c.det(&mut b).unwrap();
        assert_eq!(
            proportionality(&c.trace(), &det),
            Proportionality::Proportional { factor: q().zero(), degenerate: false }
        );
        assert_eq!(
            proportionality(&det.scale(&q().from_i64(2)), &det),
            Proportionality::Proportional { factor: q().from_i64(2), degenerate: false }
        );
        let zero = ComPoly::zero(8, q());
        assert!(matches!(proportionality(&det, &zero), Proportionality::NotProportional { degenerate: true, .. }));
        assert!(matches!(proportionality(&zero, &zero), Proportionality::Proportional { degenerate: true, .. }));
    }

    #[test]
    fn budget_refuses_large_expansion() {
        let f = p("[(x1*x2)^2,(x3*x4)^2]^2 + [(x1*x2)^2,(x3*x4)^2]*[x1*x3,x2*x4]^2", 4);
        let err = generic_eval(&f, &mut TermBudget::default()).unwrap_err();
        assert_eq!(err.limit, DEFAULT_TERM_BUDGET);
        assert!(generic_eval(&p("[x1,x2]^3", 2), &mut TermBudget::new(50)).is_err());
    }

    #[test]
    fn ring_homomorphism_on_samples() {
        let mut b = TermBudget::default();
        let f = p("x1*x2 - 2*x2", 2);
        let g = p("x2*x1 + x1", 2);
        let prod = eval(&f.checked_mul(&g).unwrap());
        assert_eq!(prod, eval(&f).mul(&eval(&g), &mut b).unwrap());
        let mut sum = eval(&f);
        sum.add_scaled(&q().one(), &eval(&g));
        assert_eq!(eval(&f.checked_add(&g).unwrap()), sum);
    }

    #[test]
    fn specialization_matches_direct_evaluation_over_f2() {
        let f2 = FieldSpec::prime(2).unwrap();
        let polys = ["x1*x2 + x2*x1*x1", "[x1,x2]*x1 + x2", "x1^3 + x1*x2"];
        let all = all_matrices(f2);
        for text in polys {
            let f = FreePoly::parse(text, 2, f2).unwrap();
            let g = generic_eval(&f, &mut TermBudget::default()).unwrap();
            for a in &all {
                for b in &all {
                    let point: Vec<Scalar> = a.entries().iter().chain(b.entries().iter()).cloned().collect();
                    let spec = g.evaluate(&point);
                    let direct = crate::matalg::evaluate(&f, &[a.clone(), b.clone()]);
                    assert_eq!(&spec, direct.entries(), "{text} at {a} {b}");
                }
            }
        }
    }

    #[test]
    fn multilinear_entries_are_linear_per_block() {
        let f = standard_poly(3, q());
        let g = eval(&f);
        for e in g.entries() {
            for (m, _) in e.terms() {
                for block in m.exponents().chunks(4) {
                    assert!(block.iter().map(|&x| x as u32).sum::<u32>() <= 1);
                }
            }
        }
    }

    #[test]
    fn trace_of_commutators_vanishes() {
        let corpus = ["x1", "x1*x2", "x2^2 + x1", "[x1,x2]*x1"];
        for a in corpus {
            for b in corpus {
                let c = p(a, 2).commutator(&p(b, 2)).unwrap();
                assert!(eval(&c).is_trace_zero(), "[{a}, {b}]");
            }
        }
        let _ = Mat2::zero(q());
    }
}
