//! Bounded search for a tuple whose value satisfies a predicate.
//!
//! Candidates come in a fixed order: matrix-unit tuples, then tuples with
//! entries in `{0, 1, -1}`, then seeded random tuples (uniform over `F_p`,
//! or small integers over the rationals).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classify::units::UnitTuple;
use crate::field::{FieldSpec, Scalar};
use crate::freealg::FreePoly;
use crate::matalg::{evaluate, Mat2};

/// Default number of evaluations a single search may spend.
pub const DEFAULT_SEARCH_BUDGET: usize = 10_000;

const CHUNK: usize = 512;
const RATIONAL_RANGE: i64 = 5;

struct Candidates {
    field: FieldSpec,
    m: usize,
    units_total: u128,
    small_values: Vec<Scalar>,
    small_total: u128,
    index: u128,
    rng: ChaCha8Rng,
}

impl Candidates {
    fn new(field: FieldSpec, m: usize, seed: u64) -> Self {
        let mut small_values: Vec<Scalar> = Vec::new();
        for k in [0, 1, -1] {
            let s = field.from_i64(k);
            if !small_values.contains(&s) {
                small_values.push(s);
            }
        }
        let pow = |b: usize, e: usize| (b as u128).checked_pow(e as u32).unwrap_or(u128::MAX);
        Candidates {
            field,
            m,
            units_total: pow(4, m),
            small_total: pow(small_values.len(), 4 * m),
            small_values,
            index: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Whether the random phase can add anything: over `F_2` and `F_3` the
    /// small-entry phase already covers every tuple.
    fn random_phase_useful(&self) -> bool {
        self.field.size().is_none_or(|q| q as usize > self.small_values.len())
    }

    fn next(&mut self) -> Option<Vec<Mat2>> {
        let k = self.index;
        self.index = self.index.saturating_add(1);
        if k < self.units_total {
            return Some(UnitTuple::from_index(2, self.m, k).to_mat2s(self.field));
        }
        let k = k - self.units_total;
        if k < self.small_total {
            let base = self.small_values.len() as u128;
            let mut digits = vec![0usize; 4 * self.m];
            let mut r = k;
            for d in digits.iter_mut().rev() {
                *d = (r % base) as usize;
                r /= base;
            }
            let out = digits
                .chunks(4)
                .map(|c| {
                    let e: [Scalar; 4] = std::array::from_fn(|i| self.small_values[c[i]].clone());
                    Mat2::new(self.field, e).expect("same field")
                })
                .collect();
            return Some(out);
        }
        if !self.random_phase_useful() {
            return None;
        }
        let field = self.field;
        let p = field.characteristic();
        let draw = |rng: &mut ChaCha8Rng| {
            if p == 0 {
                field.from_i64(rng.gen_range(-RATIONAL_RANGE..=RATIONAL_RANGE))
            } else {
                field.from_i64(rng.gen_range(0..p) as i64)
            }
        };
        Some(
            (0..self.m)
                .map(|_| {
                    let e: [Scalar; 4] = std::array::from_fn(|_| draw(&mut self.rng));
                    Mat2::new(field, e).expect("same field")
                })
                .collect(),
        )
    }
}

/// Integer image of a rational polynomial: coefficients times the common
/// denominator. Values at integer tuples are computed in `i128`, falling
/// back to exact arithmetic on overflow.
struct IntegerForm {
    words: Vec<(Vec<usize>, i128)>,
}

type IMat = [i128; 4];

impl IntegerForm {
    fn new(p: &FreePoly) -> Option<Self> {
        if p.field().characteristic() != 0 {
            return None;
        }
        let rs: Vec<_> = p.terms().map(|(_, c)| c.as_rational().expect("rational").clone()).collect();
        let lcm = rs.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let words = p
            .terms()
            .zip(&rs)
            .map(|((w, _), r)| Some((w.letters().to_vec(), (r * &lcm).to_integer().to_i128()?)))
            .collect::<Option<Vec<_>>>()?;
        Some(IntegerForm { words })
    }

    fn mul(a: &IMat, b: &IMat) -> Option<IMat> {
        let dot = |x: i128, y: i128, z: i128, w: i128| x.checked_mul(y)?.checked_add(z.checked_mul(w)?);
        Some([
            dot(a[0], b[0], a[1], b[2])?,
            dot(a[0], b[1], a[1], b[3])?,
            dot(a[2], b[0], a[3], b[2])?,
            dot(a[2], b[1], a[3], b[3])?,
        ])
    }

    fn evaluate(&self, args: &[Mat2]) -> Option<Mat2> {
        let field = args.first()?.field();
        let ints: Vec<IMat> = args
            .iter()
            .map(|m| {
                let e = m.entries();
                let x = |k: usize| e[k].to_i64().map(i128::from);
                Some([x(0)?, x(1)?, x(2)?, x(3)?])
            })
            .collect::<Option<_>>()?;
        let mut total: IMat = [0; 4];
        for (w, c) in &self.words {
            let mut acc: IMat = [1, 0, 0, 1];
            for &l in w {
                acc = Self::mul(&acc, &ints[l - 1])?;
            }
            for k in 0..4 {
                total[k] = total[k].checked_add(acc[k].checked_mul(*c)?)?;
            }
        }
        let e = total.map(|x| field.from_ratio(&BigInt::from(x), &BigInt::one()).expect("integer"));
        Mat2::new(field, e).ok()
    }
}

pub(crate) struct SearchOutcome {
    pub found: Option<(Vec<Mat2>, Mat2)>,
    pub evaluations: usize,
}

/// Evaluates candidates in parallel chunks and scans the values in order,
/// so the first accepted tuple does not depend on scheduling.
///
/// Over the rationals `accept` sees values up to a fixed nonzero factor;
/// callers must only test scale-invariant properties and recompute exact
/// values for witnesses.
pub(crate) fn search(
    p: &FreePoly,
    budget: usize,
    seed: u64,
    mut accept: impl FnMut(&[Mat2], &Mat2) -> bool,
) -> SearchOutcome {
    let mut gen = Candidates::new(p.field(), p.nvars(), seed);
    let fast = IntegerForm::new(p);
    let eval = |args: &Vec<Mat2>| fast.as_ref().and_then(|f| f.evaluate(args)).unwrap_or_else(|| evaluate(p, args));
    let mut evaluations = 0;
    while evaluations < budget {
        let take = CHUNK.min(budget - evaluations);
        let batch: Vec<Vec<Mat2>> = std::iter::from_fn(|| gen.next()).take(take).collect();
        if batch.is_empty() {
            break;
        }
        let values: Vec<Mat2> = batch.par_iter().map(eval).collect();
        let done = batch.len() < take;
        for (args, v) in batch.into_iter().zip(values) {
            evaluations += 1;
            if accept(&args, &v) {
                return SearchOutcome { found: Some((args, v)), evaluations };
            }
        }
        if done {
            break;
        }
    }
    SearchOutcome { found: None, evaluations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    #[test]
    fn units_come_first() {
        let f = FreePoly::parse("[x1,x2]", 2, q()).unwrap();
        let out = search(&f, 100, 0, |_, v| v.is_nilpotent() && !v.is_zero());
        let (args, v) = out.found.unwrap();
        assert_eq!(args, vec![Mat2::unit(q(), 1, 1), Mat2::unit(q(), 1, 2)]);
        assert_eq!(v, Mat2::unit(q(), 1, 2));
        assert_eq!(out.evaluations, 2);
    }

    #[test]
    fn small_fields_are_exhausted() {
        let f2 = FieldSpec::prime(2).unwrap();
        let f = FreePoly::parse("x1", 1, f2).unwrap();
        let out = search(&f, 1_000, 0, |_, _| false);
        assert_eq!(out.evaluations, 4 + 16);
    }

    #[test]
    fn integer_fast_path_matches_exact_values_up_to_scale() {
        let f = FreePoly::parse("1/2*x1*x2 - 2/3*x2*x1*x1", 2, q()).unwrap();
        let form = IntegerForm::new(&f).unwrap();
        let args = vec![Mat2::from_i64(q(), [[1, -2], [3, 0]]), Mat2::from_i64(q(), [[0, 5], [-1, 4]])];
        let six = q().from_i64(6);
        assert_eq!(form.evaluate(&args).unwrap(), evaluate(&f, &args).scale(&six));
        let big = vec![Mat2::from_i64(q(), [[i64::MAX, 0], [0, 1]]); 2];
        assert!(form.evaluate(&big).is_none());
    }

    #[test]
    fn budget_is_respected() {
        let f = FreePoly::parse("[x1,x2]^3", 2, q()).unwrap();
        let out = search(&f, 700, 1, |_, v| v.is_nilpotent() && !v.is_zero());
        assert!(out.found.is_none());
        assert_eq!(out.evaluations, 700);
    }
}
