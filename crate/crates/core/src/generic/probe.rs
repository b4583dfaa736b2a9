//! Randomized evaluation over a large prime field, standing in for symbolic
//! expansion when it exceeds the term budget.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldSpec, Scalar};
use crate::freealg::{FreePoly, PolyError};
use crate::matalg::{evaluate, Mat2, PiValue, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbeError {
    #[error("probe prime {prime} must exceed twice the degree {degree}")]
    PrimeTooSmall { prime: u64, degree: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeConfig {
    /// Tuples with entries uniform over `F_prime`.
    pub trials: usize,
    /// Additional tuples with entries drawn from `{0, 1, -1}`; these hit the
    /// thin subvarieties (scalar, nilpotent values) that uniform samples miss.
    pub structured_trials: usize,
    pub prime: u64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { trials: 200, structured_trials: 200, prime: 2_147_483_647, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    pub prime: u64,
    pub seed: u64,
    pub trials: usize,
    pub structured_trials: usize,
    pub all_zero: bool,
    pub all_central: bool,
    pub all_trace_zero: bool,
    /// Distinct values of `tr^2/det - 2` (including `inf`) among samples
    /// where it is defined.
    pub distinct_pi_values: usize,
    pub pi_constant: bool,
    pub class_counts: BTreeMap<String, usize>,
    pub witnesses: Vec<Witness>,
    /// Per-trial chance that a nonzero entry vanishes at a uniform sample,
    /// bounded by `deg(p) * 4m / prime`.
    pub zero_test_error_bound: String,
}

/// Evaluates `p` at seeded random matrix tuples over `F_prime`.
pub fn probabilistic_probe(p: &FreePoly, config: &ProbeConfig) -> Result<ProbeReport, ProbeError> {
    if config.trials == 0 {
        return Err(ProbeError::NoTrials);
    }
    let degree = p.degree();
    if (config.prime as u128) <= 2 * degree as u128 {
        return Err(ProbeError::PrimeTooSmall { prime: config.prime, degree });
    }
    let field = FieldSpec::prime(config.prime)?;
    let f = p.reduce_to(field)?;
    let m = p.nvars();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut tuples: Vec<Vec<Mat2>> = Vec::with_capacity(config.trials + config.structured_trials);
    for _ in 0..config.trials {
        tuples.push((0..m).map(|_| uniform_matrix(&mut rng, field)).collect());
    }
    for _ in 0..config.structured_trials {
        tuples.push((0..m).map(|_| small_matrix(&mut rng, field)).collect());
    }
    let values: Vec<Mat2> = tuples.par_iter().map(|args| evaluate(&f, args)).collect();

    let mut class_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut witnesses = Vec::new();
    let mut pis: BTreeSet<PiValue> = BTreeSet::new();
    let mut pi_witness: Option<(PiValue, usize)> = None;
    let (mut all_zero, mut all_central, mut all_trace_zero) = (true, true, true);
    for (k, (args, v)) in tuples.iter().zip(&values).enumerate() {
        all_zero &= v.is_zero();
        all_central &= v.is_scalar();
        all_trace_zero &= v.trace().is_zero();
        let class = v.cone_class();
        let tag = class.tag().to_string();
        let count = class_counts.entry(tag.clone()).or_insert(0);
        if *count == 0 {
            witnesses.push(Witness { label: tag, inputs: args.clone(), value: v.clone() });
        }
        *count += 1;
        let pi = v.pi_invariant();
        if pi != PiValue::Undefined {
            match &pi_witness {
                None => pi_witness = Some((pi.clone(), k)),
                Some((first, j)) if *first != pi && *j != usize::MAX => {
                    witnesses.push(Witness {
                        label: format!("pi={first}"),
                        inputs: tuples[*j].clone(),
                        value: values[*j].clone(),
                    });
                    witnesses.push(Witness { label: format!("pi={pi}"), inputs: args.clone(), value: v.clone() });
                    pi_witness = Some((first.clone(), usize::MAX));
                }
                _ => {}
            }
            pis.insert(pi);
        }
    }

    Ok(ProbeReport {
        prime: config.prime,
        seed: config.seed,
        trials: config.trials,
        structured_trials: config.structured_trials,
        all_zero,
        all_central,
        all_trace_zero,
        distinct_pi_values: pis.len(),
        pi_constant: pis.len() <= 1,
        class_counts,
        witnesses,
        zero_test_error_bound: format!("{}/{}", degree * 4 * m, config.prime),
    })
}

pub(crate) fn uniform_matrix(rng: &mut impl Rng, field: FieldSpec) -> Mat2 {
    let p = field.characteristic();
    let e: [Scalar; 4] = std::array::from_fn(|_| field.from_i64(rng.gen_range(0..p) as i64));
    Mat2::new(field, e).expect("same field")
}

pub(crate) fn small_matrix(rng: &mut impl Rng, field: FieldSpec) -> Mat2 {
    let e: [Scalar; 4] = std::array::from_fn(|_| field.from_i64(rng.gen_range(-1..=1)));
    Mat2::new(field, e).expect("same field")
}
