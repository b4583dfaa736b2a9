//! Numerical check of the alternating trace identity for the Capelli
//! polynomial `c_4`, which alternates in four arguments from the
//! 4-dimensional space `M_2`:
//!
//! `sum_k f(a_1, ..., T a_k, ..., a_4; r) = c(T) f(a; r)`.
//!
//! Multilinear algebra gives `c(T)` as the trace of `X -> T X` on `M_2`,
//! which is `2 tr(T)`; the check reports the observed factor and whether it
//! also equals `tr(T)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldError, FieldSpec, Scalar};
use crate::freealg::capelli_poly;
use crate::matalg::{evaluate, Mat2};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("f(a; r) = 0; resample")]
    Degenerate,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceCheck {
    pub base: Mat2,
    pub sum: Mat2,
    /// `c` with `sum = c * base`, when the two are proportional.
    pub factor: Option<Scalar>,
    pub two_trace: Scalar,
    /// The factor equals `2 tr(T)`.
    pub holds: bool,
    /// The factor equals `tr(T)`.
    pub trace_factor_holds: bool,
}

pub fn verify_alternating_trace(t: &Mat2, a: &[Mat2; 4], r: &[Mat2; 3]) -> Result<TraceCheck, TraceError> {
    let field = t.field();
    let f = capelli_poly(4, field);
    let args = |a: &[Mat2]| -> Vec<Mat2> { a.iter().chain(r.iter()).cloned().collect() };
    let base = evaluate(&f, &args(a));
    let Some(k) = base.entries().iter().position(|x| !x.is_zero()) else {
        return Err(TraceError::Degenerate);
    };
    let mut sum = Mat2::zero(field);
    for i in 0..4 {
        let mut b = a.to_vec();
        b[i] = t * &a[i];
        sum = &sum + &evaluate(&f, &args(&b));
    }
    let c = sum.entries()[k].checked_div(&base.entries()[k])?;
    let factor = (base.scale(&c) == sum).then_some(c);
    let tr = t.trace();
    let two_trace = &tr + &tr;
    Ok(TraceCheck {
        holds: factor.as_ref() == Some(&two_trace),
        trace_factor_holds: factor.as_ref() == Some(&tr),
        base,
        sum,
        factor,
        two_trace,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceTrial {
    pub t: Mat2,
    pub factor: Option<Scalar>,
    pub two_trace: Scalar,
    pub holds: bool,
    /// `factor(T + T') = factor(T) + factor(T')` on the same sample.
    pub linear: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlternatingTraceReport {
    pub prime: u64,
    pub seed: u64,
    pub trials: usize,
    /// Samples discarded because `f(a; r) = 0`.
    pub resampled: usize,
    pub all_hold: bool,
    pub linear_in_t: bool,
    /// Trials where the factor also equals `tr(T)`.
    pub trace_factor_matches: usize,
    pub note: String,
    pub records: Vec<TraceTrial>,
}

/// Seeded trials over `F_p` with uniform `T`, `a`, `r`.
pub fn alternating_trace_trials(prime: u64, trials: usize, seed: u64) -> Result<AlternatingTraceReport, TraceError> {
    let field = FieldSpec::prime(prime)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let e = std::array::from_fn(|_| field.from_i64(rng.gen_range(0..prime) as i64));
        Mat2::new(field, e).expect("same field")
    };
    let mut records = Vec::with_capacity(trials);
    let mut resampled = 0;
    let mut trace_factor_matches = 0;
    while records.len() < trials {
        let t1 = draw();
        let t2 = draw();
        let a: [Mat2; 4] = std::array::from_fn(|_| draw());
        let r: [Mat2; 3] = std::array::from_fn(|_| draw());
        let c1 = match verify_alternating_trace(&t1, &a, &r) {
            Ok(c) => c,
            Err(TraceError::Degenerate) => {
                resampled += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let c2 = verify_alternating_trace(&t2, &a, &r)?;
        let c12 = verify_alternating_trace(&(&t1 + &t2), &a, &r)?;
        let linear = match (&c1.factor, &c2.factor, &c12.factor) {
            (Some(x), Some(y), Some(z)) => &(x + y) == z,
            _ => false,
        };
        trace_factor_matches += usize::from(c1.trace_factor_holds);
        records.push(TraceTrial { t: t1, factor: c1.factor, two_trace: c1.two_trace, holds: c1.holds, linear });
    }
    Ok(AlternatingTraceReport {
        prime,
        seed,
        trials,
        resampled,
        all_hold: records.iter().all(|r| r.holds),
        linear_in_t: records.iter().all(|r| r.linear),
        trace_factor_matches,
        note: "observed factor is 2*tr(T), the trace of X -> T*X on M_2; a factor of tr(T) would match only when tr(T) = 0"
            .into(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f101() -> FieldSpec {
        FieldSpec::prime(101).unwrap()
    }

    fn sample(seed: u64) -> ([Mat2; 4], [Mat2; 3]) {
        let f = f101();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || Mat2::new(f, std::array::from_fn(|_| f.from_i64(rng.gen_range(0..101)))).unwrap();
        (std::array::from_fn(|_| draw()), std::array::from_fn(|_| draw()))
    }

    #[test]
    fn identity_and_zero() {
        let (a, r) = sample(1);
        let c = verify_alternating_trace(&Mat2::identity(f101()), &a, &r).unwrap();
        assert_eq!(c.factor, Some(f101().from_i64(4)));
        assert!(c.holds && !c.trace_factor_holds);
        let c = verify_alternating_trace(&Mat2::zero(f101()), &a, &r).unwrap();
        assert_eq!(c.factor, Some(f101().zero()));
        assert!(c.holds && c.trace_factor_holds);
    }

    #[test]
    fn degenerate_samples_are_flagged() {
        let f = f101();
        let e11 = Mat2::unit(f, 1, 1);
        let a = [e11.clone(), e11.clone(), e11.clone(), e11.clone()];
        let r = [e11.clone(), e11.clone(), e11];
        assert_eq!(verify_alternating_trace(&Mat2::identity(f), &a, &r), Err(TraceError::Degenerate));
    }

    #[test]
    fn seeded_trials() {
        let rep = alternating_trace_trials(101, 20, 7).unwrap();
        assert!(rep.all_hold && rep.linear_in_t);
        assert_eq!(rep.records.len(), 20);
        assert_eq!(rep, alternating_trace_trials(101, 20, 7).unwrap());
    }
}
