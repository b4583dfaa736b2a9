//! Exhaustive ground truth over small finite fields.
//!
//! `enumerate_image` evaluates a polynomial on every tuple of matrices over
//! `F_q` and refuses when that is out of budget; it never samples. For
//! multilinear polynomials an equivalent, much smaller computation is used:
//! the value at `(a_1, ..., a_m)` is the contraction of the matrix-unit
//! evaluation tensor with the coordinate vectors of the `a_i`, and scaling
//! any `a_i` only scales the value.

mod small;
mod trace;

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classify::{
    classify_multilinear, span_dimension, unit_evaluations, ClassifyError, ClassifyOptions, SpanTag, Verdict,
};
use crate::field::{is_prime, FieldSpec};
use crate::freealg::{FreePoly, PolyError};
use crate::matalg::{Mat2, Witness};
use small::{Fq, Program, Tables, M};

pub use trace::{alternating_trace_trials, verify_alternating_trace, AlternatingTraceReport, TraceCheck, TraceTrial};

/// Default cap on enumerated tuples.
pub const DEFAULT_TUPLE_BUDGET: u64 = 100_000_000;
const MAX_Q: u64 = 1 << 15;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("field size {0} is not a prime")]
    NotPrime(u64),
    #[error("field size {0} is too large for exhaustive enumeration")]
    FieldTooLarge(u64),
    #[error("exhaustive enumeration needs {needed} evaluations, budget is {limit}")]
    Budget { needed: u128, limit: u64 },
    #[error("matrix is not over F_{0}")]
    WrongField(u64),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EnumerationPath {
    Naive,
    Multilinear,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImageReport {
    pub q: u64,
    pub vars: usize,
    /// Size of the tuple space `q^(4m)`.
    pub tuples: u128,
    pub path: EnumerationPath,
    /// Polynomial evaluations (naive) or tensor contractions (multilinear).
    pub work: u64,
    pub image_size: usize,
    /// The image, sorted row-major lexicographically by entries.
    #[serde(skip)]
    pub image: Vec<Mat2>,
    pub class_counts: BTreeMap<String, usize>,
    pub contains_zero: bool,
    pub conjugation_invariant: bool,
    /// Closed under multiplication by nonzero scalars.
    pub cone_closed: bool,
    pub span_tag: Option<SpanTag>,
    pub span_dimension: usize,
}

impl ImageReport {
    /// One `a,b;c,d` matrix per line.
    pub fn dump(&self) -> String {
        self.image.iter().map(|m| format!("{m}\n")).collect()
    }
}

fn small_field(q: u64) -> Result<Fq, OracleError> {
    if !is_prime(q) {
        return Err(OracleError::NotPrime(q));
    }
    if q >= MAX_Q {
        return Err(OracleError::FieldTooLarge(q));
    }
    Ok(Fq::new(q))
}

/// Exhaustive image; takes the multilinear path when it applies.
pub fn enumerate_image(p: &FreePoly, q: u64, tuple_budget: u64) -> Result<ImageReport, OracleError> {
    if p.is_multilinear() && p.nvars() > 0 {
        enumerate_multilinear(p, q, tuple_budget)
    } else {
        enumerate_naive(p, q, tuple_budget)
    }
}

fn tuple_count(q: u64, m: usize) -> u128 {
    (q as u128).checked_pow(4 * m as u32).unwrap_or(u128::MAX)
}

/// Evaluates on all `q^(4m)` tuples.
pub fn enumerate_naive(p: &FreePoly, q: u64, tuple_budget: u64) -> Result<ImageReport, OracleError> {
    let fq = small_field(q)?;
    let f = p.reduce_to(fq.spec())?;
    let m = f.nvars();
    let tuples = tuple_count(q, m);
    if tuples > tuple_budget as u128 {
        return Err(OracleError::Budget { needed: tuples, limit: tuple_budget });
    }
    let prog = Program::new(&f, fq);
    let n = fq.count();
    let seen = if m == 0 {
        let mut s = vec![false; n];
        s[fq.encode(&prog.evaluate(&[], &mut Vec::new()))] = true;
        s
    } else {
        let rest = n.pow(m as u32 - 1);
        let tables = Tables::new(fq);
        (0..n)
            .into_par_iter()
            .fold(
                || vec![false; n],
                |mut acc, first| {
                    let mut stack = Vec::new();
                    if let Some(t) = &tables {
                        let mut codes = vec![0u16; m];
                        codes[0] = first as u16;
                        let mut stack16 = Vec::new();
                        for _ in 0..rest {
                            acc[prog.evaluate_codes(t, &codes, &mut stack16) as usize] = true;
                            // odometer over the remaining arguments
                            for slot in codes[1..].iter_mut().rev() {
                                *slot += 1;
                                if (*slot as usize) < n {
                                    break;
                                }
                                *slot = 0;
                            }
                        }
                        return acc;
                    }
                    let mut args: Vec<M> = vec![fq.decode(0); m];
                    args[0] = fq.decode(first);
                    for k in 0..rest {
                        let mut r = k;
                        for slot in args[1..].iter_mut().rev() {
                            *slot = fq.decode(r % n);
                            r /= n;
                        }
                        acc[fq.encode(&prog.evaluate(&args, &mut stack))] = true;
                    }
                    acc
                },
            )
            .reduce(|| vec![false; n], merge)
    };
    Ok(report(fq, m, tuples, EnumerationPath::Naive, tuples as u64, &seen))
}

fn merge(mut a: Vec<bool>, b: Vec<bool>) -> Vec<bool> {
    for (x, y) in a.iter_mut().zip(b) {
        *x |= y;
    }
    a
}

/// Nonzero vectors of `F_q^4` with first nonzero coordinate 1.
fn projective_points(fq: Fq) -> Vec<M> {
    (1..fq.count()).map(|k| fq.decode(k)).filter(|v| v.iter().find(|&&x| x != 0) == Some(&1)).collect()
}

/// Contracts the leading axis of `t` (length `4 * rest`) with `a`, then
/// rescales so the first nonzero entry is 1; `None` for the zero tensor.
fn contract(fq: Fq, t: &[u32], a: &M) -> Option<Vec<u32>> {
    let rest = t.len() / 4;
    let mut out = vec![0u32; rest];
    for (j, &c) in a.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(&t[j * rest..(j + 1) * rest]) {
            *o = fq.add(*o, fq.mul(c, x));
        }
    }
    let lead = *out.iter().find(|&&x| x != 0)?;
    let inv = fq.inv(lead);
    out.iter_mut().for_each(|x| *x = fq.mul(*x, inv));
    Some(out)
}

/// Reduced row echelon form of the rows of a `4 x 4` block, zero rows dropped.
fn row_space(fq: Fq, rows: &[u32]) -> Vec<M> {
    let mut basis: Vec<M> = Vec::new();
    for r in rows.chunks(4) {
        let mut v: M = [r[0], r[1], r[2], r[3]];
        for b in &basis {
            let piv = b.iter().position(|&x| x != 0).expect("nonzero row");
            if v[piv] != 0 {
                let c = v[piv];
                for k in 0..4 {
                    v[k] = fq.add(v[k], fq.neg(fq.mul(c, b[k])));
                }
            }
        }
        let Some(piv) = v.iter().position(|&x| x != 0) else { continue };
        let inv = fq.inv(v[piv]);
        v.iter_mut().for_each(|x| *x = fq.mul(*x, inv));
        for b in basis.iter_mut() {
            if b[piv] != 0 {
                let c = b[piv];
                for k in 0..4 {
                    b[k] = fq.add(b[k], fq.neg(fq.mul(c, v[k])));
                }
            }
        }
        basis.push(v);
    }
    basis.sort_by_key(|b| b.iter().position(|&x| x != 0));
    basis
}

/// Multilinear enumeration by tensor contraction.
///
/// After fixing all but the last argument up to scale, the values form the
/// column space of a linear map in the last argument, so the image is the
/// union of the distinct subspaces obtained that way.
pub fn enumerate_multilinear(p: &FreePoly, q: u64, tuple_budget: u64) -> Result<ImageReport, OracleError> {
    if !p.is_multilinear() || p.nvars() == 0 {
        return Err(PolyError::NotMultilinear.into());
    }
    let fq = small_field(q)?;
    let f = p.reduce_to(fq.spec())?;
    let m = f.nvars();
    let points = projective_points(fq);
    let needed = (points.len() as u128).checked_pow(m as u32 - 1).unwrap_or(u128::MAX);
    if needed > tuple_budget as u128 {
        return Err(OracleError::Budget { needed, limit: tuple_budget });
    }
    let units = unit_evaluations(&f, 2, u64::MAX).map_err(ClassifyError::from)?;
    let mut level: Vec<Vec<u32>> = vec![units
        .iter()
        .flat_map(|(_, v)| {
            let e = v.to_mat2().expect("2x2");
            fq.entries_of(&e).expect("reduced")
        })
        .collect()];
    let mut work = 0u64;
    for _ in 1..m {
        work += (level.len() * points.len()) as u64;
        let next: HashSet<Vec<u32>> =
            level.par_iter().flat_map_iter(|t| points.iter().filter_map(|a| contract(fq, t, a))).collect();
        let mut next: Vec<Vec<u32>> = next.into_iter().collect();
        next.sort();
        level = next;
    }
    let spaces: HashSet<Vec<M>> = level.par_iter().map(|t| row_space(fq, t)).collect();
    let mut seen = vec![false; fq.count()];
    seen[0] = true;
    let q32 = fq.q;
    for basis in &spaces {
        let d = basis.len() as u32;
        for k in 0..q32.pow(d) {
            let mut v = [0u32; 4];
            let mut r = k;
            for b in basis {
                let c = r % q32;
                r /= q32;
                for i in 0..4 {
                    v[i] = fq.add(v[i], fq.mul(c, b[i]));
                }
            }
            seen[fq.encode(&v)] = true;
        }
    }
    Ok(report(fq, m, tuple_count(q, m), EnumerationPath::Multilinear, work, &seen))
}

fn report(fq: Fq, m: usize, tuples: u128, path: EnumerationPath, work: u64, seen: &[bool]) -> ImageReport {
    let codes: Vec<usize> = (0..seen.len()).filter(|&k| seen[k]).collect();
    let image: Vec<Mat2> = codes.iter().map(|&k| fq.to_mat2(&fq.decode(k))).collect();
    let mut class_counts = BTreeMap::new();
    for v in &image {
        *class_counts.entry(v.cone_class().tag().to_string()).or_insert(0) += 1;
    }
    let (span_tag, span_dimension) = match span_dimension(fq.spec(), &image) {
        Ok(s) => (Some(s.tag), s.dimension),
        Err(e) => (None, e.dimension),
    };
    ImageReport {
        q: fq.q as u64,
        vars: m,
        tuples,
        path,
        work,
        image_size: image.len(),
        contains_zero: seen[0],
        conjugation_invariant: conjugation_closed(fq, seen),
        cone_closed: scaling_closed(fq, seen),
        class_counts,
        image,
        span_tag,
        span_dimension,
    }
}

fn conjugators(fq: Fq) -> Vec<M> {
    if fq.q <= 7 {
        fq.general_linear()
    } else {
        fq.gl_generators()
    }
}

/// Invariance under every conjugator; over larger fields, invariance
/// under generators suffices because conjugation is injective on a finite set.
fn conjugation_closed(fq: Fq, seen: &[bool]) -> bool {
    conjugators(fq).par_iter().all(|g| {
        let gi = fq.mat_inv(g).expect("invertible");
        (0..seen.len()).filter(|&k| seen[k]).all(|k| seen[fq.encode(&fq.mat_mul(&fq.mat_mul(g, &fq.decode(k)), &gi))])
    })
}

fn scaling_closed(fq: Fq, seen: &[bool]) -> bool {
    (0..seen.len()).filter(|&k| seen[k]).all(|k| (2..fq.q).all(|c| seen[fq.encode(&fq.scale(c, &fq.decode(k)))]))
}

/// `0 in S` and `g S g^-1 = S` for all invertible `g` over `F_q`.
pub fn chuang_property_check(set: &[Mat2], q: u64) -> Result<bool, OracleError> {
    let fq = small_field(q)?;
    let mut seen = vec![false; fq.count()];
    for a in set {
        let v = fq.entries_of(a).ok_or(OracleError::WrongField(q))?;
        seen[fq.encode(&v)] = true;
    }
    Ok(seen[0] && conjugation_closed(fq, &seen))
}

/// Agreement between the enumerated image and the multilinear classifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub q: u64,
    pub enumerated_tag: Option<SpanTag>,
    pub enumerated_dimension: usize,
    pub enumerated_basis: Vec<Mat2>,
    pub classifier_verdict: Verdict,
    pub classifier_tag: Option<SpanTag>,
    pub classifier_witnesses: Vec<Witness>,
    /// The classifier says `SL2` or `Full`, so `e12` must be a value.
    pub e12_required: bool,
    pub e12_present: bool,
    pub agree: bool,
}

pub fn cross_check(p: &FreePoly, q: u64, tuple_budget: u64) -> Result<CrossCheck, OracleError> {
    let report = enumerate_image(p, q, tuple_budget)?;
    let field = FieldSpec::prime(q).expect("checked prime");
    let enumerated = span_dimension(field, &report.image);
    let class = classify_multilinear(p, q, &ClassifyOptions::default())?;
    let classifier_tag = class.span.as_ref().map(|s| s.tag);
    let e12 = Mat2::unit(field, 1, 2);
    let e12_required = matches!(class.verdict, Verdict::SL2 | Verdict::Full);
    let e12_present = report.image.contains(&e12);
    let (enumerated_tag, enumerated_dimension, enumerated_basis) = match enumerated {
        Ok(s) => (Some(s.tag), s.dimension, s.basis),
        Err(e) => (None, e.dimension, e.basis),
    };
    let classifier_tag = if class.verdict == Verdict::Zero { Some(SpanTag::Zero) } else { classifier_tag };
    let agree = enumerated_tag.is_some() && enumerated_tag == classifier_tag && (!e12_required || e12_present);
    Ok(CrossCheck {
        q,
        enumerated_tag,
        enumerated_dimension,
        enumerated_basis,
        classifier_verdict: class.verdict,
        classifier_tag,
        classifier_witnesses: class.witnesses,
        e12_required,
        e12_present,
        agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::standard_poly;
    use crate::matalg::{all_matrices, evaluate};

    fn poly(text: &str, m: usize, q: u64) -> FreePoly {
        FreePoly::parse(text, m, FieldSpec::prime(q).unwrap()).unwrap()
    }

    #[test]
    fn commutator_over_f2_is_sl2() {
        let r = enumerate_image(&poly("[x1,x2]", 2, 2), 2, DEFAULT_TUPLE_BUDGET).unwrap();
        assert_eq!(r.image_size, 8);
        assert!(r.image.iter().all(|m| m.trace().is_zero()));
        assert_eq!(r.span_tag, Some(SpanTag::Sl2));
        assert!(r.conjugation_invariant && r.contains_zero && r.cone_closed);
    }

    #[test]
    fn s4_over_f2_is_zero() {
        let f2 = FieldSpec::prime(2).unwrap();
        let r = enumerate_naive(&standard_poly(4, f2), 2, DEFAULT_TUPLE_BUDGET).unwrap();
        assert_eq!(r.tuples, 65536);
        assert_eq!(r.image, vec![Mat2::zero(f2)]);
    }

    #[test]
    fn identity_over_f3_is_everything() {
        let r = enumerate_image(&poly("x1", 1, 3), 3, DEFAULT_TUPLE_BUDGET).unwrap();
        assert_eq!(r.image_size, 81);
        assert_eq!(r.class_counts.values().sum::<usize>(), 81);
    }

    #[test]
    fn naive_and_multilinear_paths_agree() {
        for (text, m) in [("[x1,x2]", 2), ("x1*x2", 2), ("x1*x2*x3 - x3*x2*x1", 3), ("x1*x2 + x2*x1", 2)] {
            for q in [2, 3] {
                if m == 3 && q == 3 {
                    continue;
                }
                let f = poly(text, m, q);
                let a = enumerate_naive(&f, q, DEFAULT_TUPLE_BUDGET).unwrap();
                let b = enumerate_multilinear(&f, q, DEFAULT_TUPLE_BUDGET).unwrap();
                assert_eq!(a.image, b.image, "{text} over F_{q}");
                assert_eq!(a.class_counts, b.class_counts);
            }
        }
        let f = poly("[x1,x2]", 2, 5);
        assert_eq!(
            enumerate_naive(&f, 5, DEFAULT_TUPLE_BUDGET).unwrap().image,
            enumerate_multilinear(&f, 5, DEFAULT_TUPLE_BUDGET).unwrap().image
        );
    }

    #[test]
    fn naive_path_matches_direct_evaluation() {
        // oracle: evaluate on every pair with the exact matrix type
        let f3 = FieldSpec::prime(3).unwrap();
        let f = poly("x1*x1*x2 + 2*x2*x1", 2, 3);
        let all = all_matrices(f3);
        let mut direct: Vec<Mat2> =
            all.iter().flat_map(|a| all.iter().map(|b| evaluate(&f, &[a.clone(), b.clone()]))).collect();
        direct.sort_by_key(|m| Fq::new(3).encode(&Fq::new(3).entries_of(m).unwrap()));
        direct.dedup();
        assert_eq!(enumerate_naive(&f, 3, DEFAULT_TUPLE_BUDGET).unwrap().image, direct);
    }

    #[test]
    fn budget_refusal() {
        let f = poly("x1*x2*x3", 3, 3);
        assert!(matches!(enumerate_naive(&f, 3, 1000), Err(OracleError::Budget { .. })));
        assert!(matches!(enumerate_image(&f, 4, 1000), Err(OracleError::NotPrime(4))));
    }

    #[test]
    fn chuang_examples() {
        let f2 = FieldSpec::prime(2).unwrap();
        let r = enumerate_image(&poly("[x1,x2]", 2, 2), 2, DEFAULT_TUPLE_BUDGET).unwrap();
        assert!(chuang_property_check(&r.image, 2).unwrap());
        let e12 = Mat2::unit(f2, 1, 2);
        assert!(!chuang_property_check(std::slice::from_ref(&e12), 2).unwrap());
        assert!(!chuang_property_check(&[Mat2::zero(f2), e12], 2).unwrap());
    }

    #[test]
    fn generators_suffice_for_larger_fields() {
        let f11 = FieldSpec::prime(11).unwrap();
        let e12 = Mat2::unit(f11, 1, 2);
        assert!(!chuang_property_check(&[Mat2::zero(f11), e12], 11).unwrap());
        let scalars: Vec<Mat2> = (0..11).map(|c| Mat2::scalar(f11.from_i64(c))).collect();
        assert!(chuang_property_check(&scalars, 11).unwrap());
    }

    #[test]
    fn cross_check_examples() {
        let c = cross_check(&poly("[x1,x2]", 2, 3), 3, DEFAULT_TUPLE_BUDGET).unwrap();
        assert!(c.agree && c.e12_present);
        assert_eq!((c.enumerated_tag, c.enumerated_dimension), (Some(SpanTag::Sl2), 3));
        let f2 = FieldSpec::prime(2).unwrap();
        let c = cross_check(&standard_poly(4, f2), 2, DEFAULT_TUPLE_BUDGET).unwrap();
        assert!(c.agree);
        assert_eq!(c.classifier_verdict, Verdict::Zero);
        let lin = FreePoly::parse("[x1,x2]^2", 2, FieldSpec::rationals()).unwrap().multilinearize().unwrap();
        let c = cross_check(&lin, 5, DEFAULT_TUPLE_BUDGET).unwrap();
        assert!(c.agree);
        assert_eq!(c.classifier_verdict, Verdict::Scalars);
    }
}
