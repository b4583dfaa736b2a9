//! Built-in example polynomials with their expected classifier output.

use serde::Serialize;

use crate::classify::{
    classify_general, nondense_invariant_check, sample_pairs_prime, sample_pairs_rational, ClassifyError,
    ClassifyOptions, ImageClass, Mode, Verdict,
};
use crate::field::FieldSpec;
use crate::freealg::FreePoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extra {
    None,
    /// Note must start with "KHat candidate".
    KHatCandidate,
    /// No KTilde sample; scalar and nilpotent samples present; at least 200 samples.
    ProbeAvoidsKTilde,
    /// `disc = 2 tr` on seeded samples over `F_101` and over the rationals.
    NondenseInvariant,
}

#[derive(Debug, Clone, Copy)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub poly: &'static str,
    pub vars: usize,
    /// Classify the full multilinearization instead of `poly`.
    pub linearize: bool,
    pub characteristic: u64,
    pub mode: Mode,
    pub expected: Verdict,
    /// The image as a set, where it is known.
    pub known_image: &'static str,
    pub extra: Extra,
}

pub const CONE_IV: &str = "[(x1*x2)^2,(x3*x4)^2]^2 + [(x1*x2)^2,(x3*x4)^2]*[x1*x3,x2*x4]^2";
pub const NONDENSE: &str = "[x1,x2] + [x1,x2]^2";

pub const CORPUS: &[CorpusEntry] = &[
    CorpusEntry {
        name: "commutator",
        poly: "[x1,x2]",
        vars: 2,
        linearize: false,
        characteristic: 0,
        mode: Mode::Auto,
        expected: Verdict::SL2,
        known_image: "sl2",
        extra: Extra::None,
    },
    CorpusEntry {
        name: "s4",
        poly: "s4",
        vars: 4,
        linearize: false,
        characteristic: 0,
        mode: Mode::Auto,
        expected: Verdict::Zero,
        known_image: "{0}",
        extra: Extra::None,
    },
    CorpusEntry {
        name: "identity",
        poly: "x1",
        vars: 1,
        linearize: false,
        characteristic: 0,
        mode: Mode::Auto,
        expected: Verdict::Full,
        known_image: "M2",
        extra: Extra::None,
    },
    CorpusEntry {
        name: "linearized-square",
        poly: "[x1,x2]^2",
        vars: 2,
        linearize: true,
        characteristic: 0,
        mode: Mode::Auto,
        expected: Verdict::Scalars,
        known_image: "scalars",
        extra: Extra::None,
    },
    CorpusEntry {
        name: "central-square",
        poly: "[x1,x2]^2",
        vars: 2,
        linearize: false,
        characteristic: 0,
        mode: Mode::Auto,
        expected: Verdict::Scalars,
        known_image: "scalars",
        extra: Extra::None,
    },
    CorpusEntry {
        name: "coneex2-i",
        poly: "[x1,x2]^2*x1",
        vars: 2,
        linearize: false,
        characteristic: 0,
        mode: Mode::Auto,
        expected: Verdict::Dense,
        known_image: "every non-scalar matrix",
        extra: Extra::None,
    },
    CorpusEntry {
        name: "coneex2-iii",
        poly: "[x1,x2]^3",
        vars: 2,
        linearize: false,
        characteristic: 0,
        mode: Mode::Auto,
        expected: Verdict::TraceZeroUndetermined,
        known_image: "KHat: non-nilpotent trace-zero matrices",
        extra: Extra::KHatCandidate,
    },
    CorpusEntry {
        name: "coneex2-iv",
        poly: CONE_IV,
        vars: 4,
        linearize: false,
        characteristic: 0,
        mode: Mode::Probabilistic,
        expected: Verdict::Dense,
        known_image: "M2 minus KTilde",
        extra: Extra::ProbeAvoidsKTilde,
    },
    CorpusEntry {
        name: "nondense",
        poly: NONDENSE,
        vars: 2,
        linearize: false,
        characteristic: 0,
        mode: Mode::Auto,
        expected: Verdict::TopPartInconclusive,
        known_image: "matrices with eigenvalues c^2+c and c^2-c",
        extra: Extra::NondenseInvariant,
    },
    CorpusEntry {
        name: "linear-plus-square",
        poly: "x1 + x1^2",
        vars: 1,
        linearize: false,
        characteristic: 0,
        mode: Mode::Auto,
        expected: Verdict::Dense,
        known_image: "dense",
        extra: Extra::None,
    },
];

impl CorpusEntry {
    pub fn polynomial(&self) -> FreePoly {
        let q = FieldSpec::rationals();
        let f = crate::freealg::builtin(self.poly, q)
            .unwrap_or_else(|| FreePoly::parse(self.poly, self.vars, q).expect("corpus polynomial parses"));
        if self.linearize {
            f.multilinearize().expect("homogeneous")
        } else {
            f
        }
    }

    pub fn options(&self, seed: u64) -> ClassifyOptions {
        ClassifyOptions { mode: self.mode, seed, ..Default::default() }
    }
}

pub fn find(name: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.name == name)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusResult {
    pub name: String,
    pub polynomial: String,
    pub vars: usize,
    pub expected: Verdict,
    pub observed: Verdict,
    pub known_image: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub result: ImageClass,
}

pub fn run_entry(e: &CorpusEntry, seed: u64) -> Result<CorpusResult, ClassifyError> {
    let f = e.polynomial();
    let result = classify_general(&f, e.characteristic, &e.options(seed))?;
    let mut checks = vec![Check {
        name: "verdict".into(),
        pass: result.verdict == e.expected,
        detail: format!("expected {}, observed {}", e.expected, result.verdict),
    }];
    match e.extra {
        Extra::None => {}
        Extra::KHatCandidate => {
            let note = result.note.clone().unwrap_or_default();
            checks.push(Check {
                name: "khat-candidate-note".into(),
                pass: note.starts_with("KHat candidate"),
                detail: note,
            });
        }
        Extra::ProbeAvoidsKTilde => {
            let (pass, detail) = match &result.probe {
                Some(r) => {
                    let count = |k: &str| r.class_counts.get(k).copied().unwrap_or(0);
                    let total = r.trials + r.structured_trials;
                    (
                        count("KTilde") == 0 && count("Scalar") > 0 && count("Nilpotent") > 0 && total >= 200,
                        format!(
                            "{total} samples: KTilde {}, Scalar {}, Nilpotent {}",
                            count("KTilde"),
                            count("Scalar"),
                            count("Nilpotent")
                        ),
                    )
                }
                None => (false, "no probe report".into()),
            };
            checks.push(Check { name: "probe-avoids-ktilde".into(), pass, detail });
        }
        Extra::NondenseInvariant => {
            let fp = sample_pairs_prime(101, 100, seed).expect("101 is prime");
            let fq = sample_pairs_rational(3, 100, seed);
            let a = nondense_invariant_check(&fp).expect("odd characteristic");
            let b = nondense_invariant_check(&fq).expect("characteristic 0");
            checks.push(Check {
                name: "disc-equals-twice-trace".into(),
                pass: a.holds && b.holds,
                detail: format!(
                    "F_101: {}/{} hold; rationals in [-3,3]: {}/{} hold",
                    a.samples - a.failures.len(),
                    a.samples,
                    b.samples - b.failures.len(),
                    b.samples
                ),
            });
        }
    }
    Ok(CorpusResult {
        name: e.name.into(),
        polynomial: f.to_string(),
        vars: f.nvars(),
        expected: e.expected,
        observed: result.verdict,
        known_image: e.known_image.into(),
        pass: checks.iter().all(|c| c.pass),
        checks,
        result,
    })
}

pub fn run_corpus(seed: u64) -> Result<Vec<CorpusResult>, ClassifyError> {
    CORPUS.iter().map(|e| run_entry(e, seed)).collect()
}
