//! The invariant `disc f = 2 tr f` for `f = [x,y] + [x,y]^2`.
//!
//! With `c = [x,y]` trace zero, `c^2 = -det(c) I`, so `f` has eigenvalues
//! `mu^2 + mu` and `mu^2 - mu` where `mu^2 = -det(c)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldError, FieldSpec};
use crate::matalg::Mat2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NondenseReport {
    pub samples: usize,
    pub holds: bool,
    /// Pairs where the identity failed.
    pub failures: Vec<(Mat2, Mat2)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("the invariant needs a characteristic other than 2")]
pub struct CharacteristicTwo;

pub fn nondense_value(a: &Mat2, b: &Mat2) -> Mat2 {
    let c = &(a * b) - &(b * a);
    &c + &(&c * &c)
}

pub fn nondense_invariant_check(samples: &[(Mat2, Mat2)]) -> Result<NondenseReport, CharacteristicTwo> {
    if samples.first().is_some_and(|(a, _)| a.field().characteristic() == 2) {
        return Err(CharacteristicTwo);
    }
    let two = samples.first().map(|(a, _)| a.field().from_i64(2));
    let failures: Vec<(Mat2, Mat2)> = samples
        .iter()
        .filter(|(a, b)| {
            let f = nondense_value(a, b);
            f.disc() != &f.trace() * two.as_ref().expect("nonempty")
        })
        .cloned()
        .collect();
    Ok(NondenseReport { samples: samples.len(), holds: failures.is_empty(), failures })
}

/// Seeded pairs with entries uniform over `F_p`.
pub fn sample_pairs_prime(p: u64, count: usize, seed: u64) -> Result<Vec<(Mat2, Mat2)>, FieldError> {
    let field = FieldSpec::prime(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let e = std::array::from_fn(|_| field.from_i64(rng.gen_range(0..p) as i64));
        Mat2::new(field, e).expect("same field")
    };
    Ok((0..count).map(|_| (draw(), draw())).collect())
}

/// Seeded rational pairs with integer entries in `[-bound, bound]`.
pub fn sample_pairs_rational(bound: i64, count: usize, seed: u64) -> Vec<(Mat2, Mat2)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (integer_matrix(&mut rng, bound), integer_matrix(&mut rng, bound))).collect()
}

fn integer_matrix(rng: &mut ChaCha8Rng, bound: i64) -> Mat2 {
    let q = FieldSpec::rationals();
    let e = std::array::from_fn(|_| q.from_i64(rng.gen_range(-bound..=bound)));
    Mat2::new(q, e).expect("same field")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_pair() {
        let q = FieldSpec::rationals();
        let (a, b) = (Mat2::unit(q, 1, 1), Mat2::unit(q, 1, 2));
        assert_eq!(nondense_value(&a, &b), Mat2::unit(q, 1, 2));
        assert!(nondense_invariant_check(&[(a, b)]).unwrap().holds);
    }

    #[test]
    fn random_pairs() {
        let r = nondense_invariant_check(&sample_pairs_prime(101, 100, 7).unwrap()).unwrap();
        assert!(r.holds && r.samples == 100);
        let r = nondense_invariant_check(&sample_pairs_rational(3, 100, 7)).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn a_different_polynomial_breaks_it() {
        // oracle: [x,y] + x^2 does not satisfy the invariant on (e11, e12)
        let q = FieldSpec::rationals();
        let (a, b) = (Mat2::unit(q, 1, 1), Mat2::unit(q, 1, 2));
        let c = &(&a * &b) - &(&b * &a);
        let g = &c + &(&a * &a);
        assert_ne!(g.disc(), &g.trace() * &q.from_i64(2));
    }

    #[test]
    fn characteristic_two_is_refused() {
        let pairs = sample_pairs_prime(2, 3, 0).unwrap();
        assert!(nondense_invariant_check(&pairs).is_err());
    }
}
