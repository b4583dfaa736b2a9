//! Image classification for polynomials evaluated on 2x2 matrices.
//!
//! Multilinear polynomials are classified exactly from the span of their
//! values on matrix units. Semi-homogeneous polynomials go through a ladder
//! of tests on the generic evaluation (or on random samples when the
//! expansion is too large). Other polynomials are judged by the top
//! weighted-homogeneous part.

mod nondense;
mod search;
mod span;
mod units;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldError, FieldSpec};
use crate::freealg::weights::{infer_weights, semi_homogeneous_check, weighted_parts, WeightVector};
use crate::freealg::{FreePoly, PolyError};
use crate::generic::{
    generic_eval, probabilistic_probe, proportionality, BudgetExceeded, ProbeConfig, ProbeError, ProbeReport,
    Proportionality, TermBudget, DEFAULT_TERM_BUDGET,
};
use crate::matalg::{evaluate, Mat2, PiValue, Witness};

pub use nondense::{
    nondense_invariant_check, nondense_value, sample_pairs_prime, sample_pairs_rational, CharacteristicTwo,
    NondenseReport,
};
pub use search::DEFAULT_SEARCH_BUDGET;
pub use span::{span_dimension, NonCanonicalSpan, SpanInfo, SpanTag};
pub use units::{
    check_euler, euler_predict, evaluate_on_units, unit_evaluations, EulerVerdict, MatN, MatrixUnit, UnitError,
    UnitGraph, UnitTuple, DEFAULT_UNIT_BUDGET,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("polynomial has a nonzero constant term")]
    ConstantTerm,
    #[error("not semi-homogeneous for weights {weights}: {first} has degree {first_degree}, {second} has degree {second_degree}")]
    NotSemiHomogeneous { weights: WeightVector, first: String, first_degree: i64, second: String, second_degree: i64 },
    #[error("weight vector {weights} has {got} entries, expected {expected}")]
    WeightLength { weights: WeightVector, got: usize, expected: usize },
    #[error("weights must be positive, got {0}")]
    WeightsNotPositive(WeightVector),
    #[error(transparent)]
    Units(#[from] UnitError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error(transparent)]
    Probe(#[from] ProbeError),
}

/// Requested evaluation strategy for the semi-homogeneous ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Symbolic, falling back to probabilistic when over budget.
    #[default]
    Auto,
    Symbolic,
    Probabilistic,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Mode::Auto),
            "symbolic" => Ok(Mode::Symbolic),
            "probabilistic" => Ok(Mode::Probabilistic),
            _ => Err(format!("unknown mode `{s}`; expected auto, symbolic or probabilistic")),
        }
    }
}

/// How a verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Evidence {
    /// Exact span of matrix-unit values.
    Span,
    Symbolic,
    Probabilistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Zero,
    Scalars,
    KHat,
    SL2,
    Full,
    Dense,
    TraceZeroUndetermined,
    TopPartInconclusive,
    Anomaly,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifyOptions {
    pub mode: Mode,
    pub seed: u64,
    /// Stored-term cap for symbolic expansion.
    pub term_budget: usize,
    /// Evaluations per witness search.
    pub search_budget: usize,
    /// Cap on matrix-unit tuples for the multilinear classifier.
    pub unit_budget: u64,
    /// Probe sizes and prime for characteristic 0; the seed is taken from
    /// `seed` and the prime is the characteristic when it is positive.
    pub probe: ProbeConfig,
    /// Extra weight vectors to try before the inferred ones.
    pub weights: Vec<WeightVector>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            mode: Mode::Auto,
            seed: 0,
            term_budget: DEFAULT_TERM_BUDGET,
            search_budget: DEFAULT_SEARCH_BUDGET,
            unit_budget: DEFAULT_UNIT_BUDGET,
            probe: ProbeConfig::default(),
            weights: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BudgetUse {
    pub unit_tuples: u64,
    pub search_evaluations: usize,
    pub peak_terms: usize,
    pub probe_samples: usize,
}

impl BudgetUse {
    fn absorb(&mut self, o: &BudgetUse) {
        self.unit_tuples += o.unit_tuples;
        self.search_evaluations += o.search_evaluations;
        self.peak_terms = self.peak_terms.max(o.peak_terms);
        self.probe_samples += o.probe_samples;
    }
}

/// Verdict on the top weighted part for one weight vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopPart {
    pub weights: WeightVector,
    pub degree: i64,
    pub polynomial: String,
    pub verdict: Verdict,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImageClass {
    pub verdict: Verdict,
    pub note: Option<String>,
    pub characteristic: u64,
    pub assumptions: Vec<String>,
    pub witnesses: Vec<Witness>,
    pub mode: Evidence,
    pub seed: Option<u64>,
    pub budget_consumed: BudgetUse,
    pub diagnostics: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<SpanInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub top_parts: Vec<TopPart>,
}

impl ImageClass {
    fn new(verdict: Verdict, characteristic: u64, mode: Evidence) -> Self {
        ImageClass {
            verdict,
            note: None,
            characteristic,
            assumptions: Vec::new(),
            witnesses: Vec::new(),
            mode,
            seed: None,
            budget_consumed: BudgetUse::default(),
            diagnostics: Vec::new(),
            weights: None,
            span: None,
            probe: None,
            top_parts: Vec::new(),
        }
    }
}

pub fn field_of_characteristic(c: u64) -> Result<FieldSpec, FieldError> {
    if c == 0 {
        Ok(FieldSpec::rationals())
    } else {
        FieldSpec::prime(c)
    }
}

/// Reduces coefficients into the prime field of characteristic `c`.
fn prepare(p: &FreePoly, c: u64) -> Result<FreePoly, ClassifyError> {
    let f = p.reduce_to(field_of_characteristic(c)?)?;
    if f.has_constant_term() {
        return Err(ClassifyError::ConstantTerm);
    }
    Ok(f)
}

fn check_weights(w: &WeightVector, m: usize) -> Result<(), ClassifyError> {
    if w.0.len() != m {
        return Err(ClassifyError::WeightLength { weights: w.clone(), got: w.0.len(), expected: m });
    }
    if !w.is_positive() {
        return Err(ClassifyError::WeightsNotPositive(w.clone()));
    }
    Ok(())
}

fn closure_assumption(c: u64) -> String {
    format!("values over the quadratic closure of a field of characteristic {c}")
}

fn witness(label: impl Into<String>, inputs: Vec<Mat2>, value: Mat2) -> Witness {
    Witness { label: label.into(), inputs, value }
}

/// Exact classification of a multilinear polynomial from its values on
/// matrix units.
pub fn classify_multilinear(
    p: &FreePoly,
    characteristic: u64,
    opts: &ClassifyOptions,
) -> Result<ImageClass, ClassifyError> {
    if !p.is_multilinear() {
        return Err(PolyError::NotMultilinear.into());
    }
    let f = prepare(p, characteristic)?;
    let mut out = ImageClass::new(Verdict::Zero, characteristic, Evidence::Span);
    out.assumptions.push(closure_assumption(characteristic));
    if f.is_zero() {
        out.diagnostics.push(format!("every coefficient vanishes in characteristic {characteristic}"));
        return Ok(out);
    }
    let evals = unit_evaluations(&f, 2, opts.unit_budget)?;
    out.budget_consumed.unit_tuples = evals.len() as u64;
    let values: Vec<Mat2> = evals.iter().map(|(_, v)| v.to_mat2().expect("2x2")).collect();
    let inputs = |k: usize| evals[k].0.to_mat2s(f.field());

    let span = match span_dimension(f.field(), &values) {
        Ok(s) => s,
        Err(e) => {
            out.verdict = Verdict::Anomaly;
            out.diagnostics.push(e.to_string());
            return Ok(out);
        }
    };
    out.verdict = match span.tag {
        SpanTag::Zero => Verdict::Zero,
        SpanTag::Scalars => Verdict::Scalars,
        SpanTag::Sl2 => Verdict::SL2,
        SpanTag::Full => Verdict::Full,
    };
    if let Some(k) = values.iter().position(|v| !v.is_zero()) {
        out.witnesses.push(witness("nonzero value", inputs(k), values[k].clone()));
    }
    if matches!(span.tag, SpanTag::Sl2 | SpanTag::Full) {
        if let Some(k) = values.iter().position(|v| !v.is_scalar()) {
            out.witnesses.push(witness("non-scalar value", inputs(k), values[k].clone()));
        }
        if let Some(k) = values.iter().position(|v| v.is_nilpotent() && !v.is_zero()) {
            out.witnesses.push(witness("nilpotent value", inputs(k), values[k].clone()));
        }
    }
    if span.tag == SpanTag::Full {
        if let Some(k) = values.iter().position(|v| !v.trace().is_zero()) {
            out.witnesses.push(witness("nonzero trace", inputs(k), values[k].clone()));
        }
    }
    out.span = Some(span);
    Ok(out)
}

/// Decision ladder for a polynomial that is homogeneous for the weights `w`.
pub fn classify_semihomogeneous(
    p: &FreePoly,
    w: &WeightVector,
    characteristic: u64,
    opts: &ClassifyOptions,
) -> Result<ImageClass, ClassifyError> {
    let f = prepare(p, characteristic)?;
    check_weights(w, f.nvars())?;
    let degree = semi_homogeneous_check(&f, w).map_err(|e| ClassifyError::NotSemiHomogeneous {
        weights: w.clone(),
        first: e.first.0.to_string(),
        first_degree: e.first.1,
        second: e.second.0.to_string(),
        second_degree: e.second.1,
    })?;
    let mut out = match opts.mode {
        Mode::Probabilistic => probabilistic_ladder(&f, characteristic, opts)?,
        Mode::Symbolic => symbolic_ladder(&f, characteristic, opts)?,
        Mode::Auto => match symbolic_ladder(&f, characteristic, opts) {
            Ok(out) => out,
            Err(e) => {
                let mut out = probabilistic_ladder(&f, characteristic, opts)?;
                out.diagnostics.insert(0, format!("symbolic mode abandoned: {e}"));
                out
            }
        },
    };
    out.assumptions.push(closure_assumption(characteristic));
    if out.verdict == Verdict::Dense {
        out.assumptions.push(format!("field closed under {degree}-th roots"));
    }
    out.weights = Some(w.clone());
    Ok(out)
}

fn symbolic_ladder(f: &FreePoly, c: u64, opts: &ClassifyOptions) -> Result<ImageClass, BudgetExceeded> {
    let mut budget = TermBudget::new(opts.term_budget);
    let g = generic_eval(f, &mut budget)?;
    let mut out = ImageClass::new(Verdict::Zero, c, Evidence::Symbolic);
    out.seed = Some(opts.seed);
    if g.is_identically_zero() {
        out.budget_consumed.peak_terms = budget.peak;
        return Ok(out);
    }
    if g.is_central() {
        out.verdict = Verdict::Scalars;
        find_nonzero(f, opts, &mut out);
    } else if g.is_trace_zero() {
        trace_zero_step(f, opts, None, &mut out);
    } else {
        let tau = g.trace();
        let tau2 = tau.mul(&tau, &mut budget)?;
        let delta = g.det(&mut budget)?;
        match proportionality(&tau2, &delta) {
            Proportionality::NotProportional { .. } => {
                out.verdict = Verdict::Dense;
                find_distinct_pi(f, opts, &mut out);
            }
            Proportionality::Proportional { factor, .. } => {
                out.verdict = Verdict::Anomaly;
                out.diagnostics.push(format!("tr^2 = {factor} * det identically on generic matrices"));
                find_nonzero(f, opts, &mut out);
            }
        }
    }
    out.budget_consumed.peak_terms = budget.peak;
    Ok(out)
}

fn probabilistic_ladder(f: &FreePoly, c: u64, opts: &ClassifyOptions) -> Result<ImageClass, ClassifyError> {
    let prime = if c == 0 { opts.probe.prime } else { c };
    let cfg = ProbeConfig { prime, seed: opts.seed, ..opts.probe };
    let report = probabilistic_probe(f, &cfg)?;
    let mut out = ImageClass::new(Verdict::Zero, c, Evidence::Probabilistic);
    out.seed = Some(opts.seed);
    out.budget_consumed.probe_samples = report.trials + report.structured_trials;
    out.assumptions.push(format!(
        "sampled over F_{prime}; a nonzero polynomial entry vanishes at a uniform sample with probability at most {}",
        report.zero_test_error_bound
    ));
    let tagged = |tag: &str| report.witnesses.iter().find(|w| w.label == tag).cloned();
    let first_nonzero = || report.witnesses.iter().find(|w| !w.value.is_zero()).cloned();
    if report.all_zero {
        out.verdict = Verdict::Zero;
    } else if report.all_central {
        out.verdict = Verdict::Scalars;
        out.witnesses.extend(tagged("Scalar"));
    } else if report.all_trace_zero {
        trace_zero_step(f, opts, first_nonzero(), &mut out);
    } else if !report.pi_constant {
        out.verdict = Verdict::Dense;
        out.witnesses.extend(report.witnesses.iter().filter(|w| w.label.starts_with("pi=")).cloned());
    } else {
        out.verdict = Verdict::Anomaly;
        out.diagnostics.push("every sample with defined tr^2/det shares one value".into());
        out.witnesses.extend(first_nonzero());
    }
    out.probe = Some(report);
    Ok(out)
}

/// Trace-zero, non-central values: a nilpotent value shows the image is
/// `sl_2`; without one the image may be the non-nilpotent trace-zero set.
fn trace_zero_step(f: &FreePoly, opts: &ClassifyOptions, fallback: Option<Witness>, out: &mut ImageClass) {
    let mut nonzero: Option<Vec<Mat2>> = None;
    let res = search::search(f, opts.search_budget, opts.seed, |args, v| {
        if nonzero.is_none() && !v.is_zero() {
            nonzero = Some(args.to_vec());
        }
        v.is_nilpotent() && !v.is_zero()
    });
    out.budget_consumed.search_evaluations += res.evaluations;
    match res.found {
        Some((args, _)) => {
            out.verdict = Verdict::SL2;
            out.witnesses.push(exact_witness(f, "nilpotent value", args));
        }
        None => {
            out.verdict = Verdict::TraceZeroUndetermined;
            out.note = Some(format!("KHat candidate: no nilpotent value among {} evaluations", res.evaluations));
            match nonzero {
                Some(args) => out.witnesses.push(exact_witness(f, "nonzero value", args)),
                None => out.witnesses.extend(fallback),
            }
        }
    }
}

fn exact_witness(f: &FreePoly, label: impl Into<String>, inputs: Vec<Mat2>) -> Witness {
    let value = evaluate(f, &inputs);
    witness(label, inputs, value)
}

fn find_nonzero(f: &FreePoly, opts: &ClassifyOptions, out: &mut ImageClass) {
    let res = search::search(f, opts.search_budget, opts.seed, |_, v| !v.is_zero());
    out.budget_consumed.search_evaluations += res.evaluations;
    match res.found {
        Some((args, _)) => out.witnesses.push(exact_witness(f, "nonzero value", args)),
        None => out.diagnostics.push("no nonzero value found within the search budget".into()),
    }
}

/// Two values with different `tr^2/det - 2`.
fn find_distinct_pi(f: &FreePoly, opts: &ClassifyOptions, out: &mut ImageClass) {
    let mut first: Option<(Vec<Mat2>, PiValue)> = None;
    let res = search::search(f, opts.search_budget, opts.seed, |args, v| {
        let pi = v.pi_invariant();
        if pi == PiValue::Undefined {
            return false;
        }
        match &first {
            None => {
                first = Some((args.to_vec(), pi));
                false
            }
            Some((_, p0)) => *p0 != pi,
        }
    });
    out.budget_consumed.search_evaluations += res.evaluations;
    let mut push = |args: Vec<Mat2>| {
        let w = exact_witness(f, "", args);
        let label = format!("pi={}", w.value.pi_invariant());
        out.witnesses.push(Witness { label, ..w });
    };
    match (first, res.found) {
        (Some((a0, _)), Some((a1, _))) => {
            push(a0);
            push(a1);
        }
        (first, _) => {
            if let Some((a0, _)) = first {
                push(a0);
            }
            out.diagnostics.push("no pair of values with distinct tr^2/det found within the search budget".into());
        }
    }
}

/// Drops variables that do not occur; returns the compacted polynomial and
/// the kept original indices.
fn compact(p: &FreePoly) -> (FreePoly, Vec<usize>) {
    let used = p.used_variables();
    if used.len() == p.nvars() {
        return (p.clone(), used);
    }
    let mut perm = vec![1; p.nvars()];
    for (k, &i) in used.iter().enumerate() {
        perm[i - 1] = k + 1;
    }
    let f = p.rename(&perm).with_nvars(used.len()).expect("indices compacted");
    (f, used)
}

/// Routes to the multilinear or semi-homogeneous classifier, or judges the
/// top weighted part.
pub fn classify_general(
    p: &FreePoly,
    characteristic: u64,
    opts: &ClassifyOptions,
) -> Result<ImageClass, ClassifyError> {
    for w in &opts.weights {
        check_weights(w, p.nvars())?;
    }
    let reduced = prepare(p, characteristic)?;
    if reduced.is_zero() {
        let mut out = ImageClass::new(Verdict::Zero, characteristic, Evidence::Span);
        out.assumptions.push(closure_assumption(characteristic));
        out.diagnostics.push(format!("polynomial is zero in characteristic {characteristic}"));
        return Ok(out);
    }
    let (f, kept) = compact(p);
    let restrict = |w: &WeightVector| WeightVector(kept.iter().map(|&i| w.0[i - 1]).collect());
    let note_dropped = |out: &mut ImageClass| {
        if kept.len() < p.nvars() {
            out.diagnostics.push(format!("variables not occurring were dropped; kept x{kept:?}"));
        }
    };
    if f.is_multilinear() {
        let mut out = classify_multilinear(&f, characteristic, opts)?;
        note_dropped(&mut out);
        return Ok(out);
    }

    let reduced = prepare(&f, characteristic)?;
    let mut candidates: Vec<WeightVector> = opts.weights.iter().map(restrict).collect();
    candidates.extend(infer_weights(&reduced).positive);
    candidates.push(WeightVector::ones(f.nvars()));
    for w in &candidates {
        if semi_homogeneous_check(&reduced, w).is_ok() {
            let mut out = classify_semihomogeneous(&f, w, characteristic, opts)?;
            note_dropped(&mut out);
            return Ok(out);
        }
    }

    let mut tops: Vec<WeightVector> = opts.weights.iter().map(restrict).collect();
    let ones = WeightVector::ones(f.nvars());
    if !tops.contains(&ones) {
        tops.push(ones);
    }
    let mut out = ImageClass::new(Verdict::TopPartInconclusive, characteristic, Evidence::Symbolic);
    out.seed = Some(opts.seed);
    let mut dense_top: Option<ImageClass> = None;
    for w in &tops {
        let (degree, top) = weighted_parts(&reduced, w).pop().expect("nonzero polynomial");
        let (h, h_kept) = compact(&top);
        let verdict = if h.is_multilinear() {
            classify_multilinear(&h, characteristic, opts)?
        } else {
            let hw = WeightVector(h_kept.iter().map(|&i| w.0[i - 1]).collect());
            classify_semihomogeneous(&h, &hw, characteristic, opts)?
        };
        out.budget_consumed.absorb(&verdict.budget_consumed);
        out.top_parts.push(TopPart {
            weights: w.clone(),
            degree,
            polynomial: top.to_string(),
            verdict: verdict.verdict,
            note: verdict.note.clone(),
        });
        if dense_top.is_none() && matches!(verdict.verdict, Verdict::Dense | Verdict::Full) {
            dense_top = Some(verdict);
        }
    }
    out.assumptions.push(closure_assumption(characteristic));
    if let Some(top) = dense_top {
        out.verdict = Verdict::Dense;
        out.mode = top.mode;
        out.note = Some("top weighted part has a dense image".into());
        for a in top.assumptions {
            if !out.assumptions.contains(&a) {
                out.assumptions.push(a);
            }
        }
    } else {
        out.note = Some("no weight vector gives a top part with dense image".into());
    }
    find_nonzero(&reduced, opts, &mut out);
    note_dropped(&mut out);
    Ok(out)
}
