//! Weighted degrees, semi-homogeneity and the decomposition into weighted
//! homogeneous parts.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{FreePoly, Word};
use crate::field::{FieldSpec, Scalar};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct WeightVector(pub Vec<i64>);

impl WeightVector {
    pub fn ones(m: usize) -> Self {
        WeightVector(vec![1; m])
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&w| w > 0)
    }

    pub fn weighted_degree(&self, w: &Word) -> i64 {
        w.letters().iter().map(|&i| self.0[i - 1]).sum()
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Two monomials with different weighted degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotSemiHomogeneous {
    pub first: (Word, i64),
    pub second: (Word, i64),
}

/// Returns the common weighted degree, or the first offending pair.
pub fn semi_homogeneous_check(p: &FreePoly, w: &WeightVector) -> Result<i64, NotSemiHomogeneous> {
    assert_eq!(w.0.len(), p.nvars(), "one weight per variable");
    let mut words = p.terms().map(|(word, _)| word);
    let Some(first) = words.next() else { return Ok(0) };
    let d = w.weighted_degree(first);
    for word in words {
        let e = w.weighted_degree(word);
        if e != d {
            return Err(NotSemiHomogeneous { first: (first.clone(), d), second: (word.clone(), e) });
        }
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightSolutions {
    /// Integer basis of all weight vectors making `p` semi-homogeneous.
    pub basis: Vec<WeightVector>,
    /// A solution with every weight positive, when one was found.
    pub positive: Option<WeightVector>,
}

/// Solves for the weights under which all monomials share a weighted degree.
///
/// The solution space is the rational nullspace of the multidegree
/// differences; each basis vector is scaled to coprime integers. A positive
/// solution is searched among small integer combinations of the basis.
pub fn infer_weights(p: &FreePoly) -> WeightSolutions {
    let m = p.nvars();
    let q = FieldSpec::rationals();
    let degrees: Vec<Vec<usize>> = p.terms().map(|(w, _)| w.multidegree(m)).collect();
    let rows: Vec<Vec<Scalar>> = degrees
        .iter()
        .skip(1)
        .map(|d| d.iter().zip(&degrees[0]).map(|(&a, &b)| q.from_i64(a as i64 - b as i64)).collect())
        .collect();
    let basis: Vec<WeightVector> =
        linalg::nullspace(&rows, m, &q.zero()).iter().map(|v| integer_representative(v)).collect();

    let ones = WeightVector::ones(m);
    let satisfies = |w: &WeightVector| semi_homogeneous_check(p, w).is_ok();
    let positive = if m > 0 && satisfies(&ones) { Some(ones) } else { search_positive(&basis) };
    WeightSolutions { basis, positive }
}

fn integer_representative(v: &[Scalar]) -> WeightVector {
    let rs: Vec<_> = v.iter().map(|s| s.as_rational().expect("rational").clone()).collect();
    let lcm = rs.iter().fold(num_bigint::BigInt::from(1), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<_> = rs.iter().map(|r| (r * &lcm).to_integer()).collect();
    let g = ints.iter().fold(num_bigint::BigInt::zero(), |acc, x| acc.gcd(x));
    let g = if g.is_zero() { num_bigint::BigInt::from(1) } else { g };
    let mut out: Vec<i64> = ints.iter().map(|x| (x / &g).to_i64().expect("small weights")).collect();
    // first nonzero entry positive
    if out.iter().find(|&&x| x != 0).is_some_and(|x| x.is_negative()) {
        out.iter_mut().for_each(|x| *x = -*x);
    }
    WeightVector(out)
}

fn search_positive(basis: &[WeightVector]) -> Option<WeightVector> {
    if basis.is_empty() || basis.len() > 5 {
        return basis.iter().find(|b| b.is_positive()).cloned();
    }
    let m = basis[0].0.len();
    let range: Vec<i64> = vec![1, 2, 3, -1, -2, -3, 0];
    let mut coeffs = vec![0usize; basis.len()];
    loop {
        let mut v = vec![0i64; m];
        for (b, &k) in basis.iter().zip(&coeffs) {
            for (x, y) in v.iter_mut().zip(&b.0) {
                *x += range[k] * y;
            }
        }
        if v.iter().all(|&x| x > 0) {
            let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x));
            return Some(WeightVector(v.into_iter().map(|x| x / g).collect()));
        }
        // odometer
        let mut i = 0;
        loop {
            if i == coeffs.len() {
                return None;
            }
            coeffs[i] += 1;
            if coeffs[i] < range.len() {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

/// Splits `p` by weighted degree, ascending.
pub fn weighted_parts(p: &FreePoly, w: &WeightVector) -> Vec<(i64, FreePoly)> {
    let mut parts: BTreeMap<i64, FreePoly> = BTreeMap::new();
    for (word, c) in p.terms() {
        parts
            .entry(w.weighted_degree(word))
            .or_insert_with(|| FreePoly::zero(p.nvars(), p.field()))
            .add_term(word.clone(), c.clone());
    }
    parts.into_iter().collect()
}
