//! Non-commutative polynomials in the free algebra `K<x1, ..., xm>`.

mod parse;
pub mod weights;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::field::{FieldError, FieldSpec, Scalar};

pub use parse::ParseError;
pub use weights::{
    infer_weights, semi_homogeneous_check, weighted_parts, NotSemiHomogeneous, WeightSolutions, WeightVector,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("polynomial is not completely homogeneous")]
    NotHomogeneous,
    #[error("polynomial is not multilinear")]
    NotMultilinear,
    #[error("variable counts differ ({0} vs {1})")]
    VariableCount(usize, usize),
    #[error("expected {expected} substitutions, got {got}")]
    SubstitutionArity { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A monomial: 1-based variable indices, read left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Per-variable occurrence counts `(d_1, ..., d_m)`.
    pub fn multidegree(&self, nvars: usize) -> Vec<usize> {
        let mut d = vec![0; nvars];
        for &i in &self.0 {
            d[i - 1] += 1;
        }
        d
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "x{i}")?;
        }
        Ok(())
    }
}

/// A polynomial in `nvars` non-commuting variables.
///
/// Zero coefficients are never stored; iteration follows the word order
/// (shorter words first, then lexicographic).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreePoly {
    nvars: usize,
    field: FieldSpec,
    terms: BTreeMap<Word, Scalar>,
}

impl FreePoly {
    pub fn zero(nvars: usize, field: FieldSpec) -> Self {
        FreePoly { nvars, field, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        let field = c.field();
        Self::zero(nvars, field).with_term(Word::empty(), c)
    }

    /// The variable `x_i` (1-based).
    pub fn var(nvars: usize, field: FieldSpec, i: usize) -> Self {
        assert!(i >= 1 && i <= nvars, "variable x{i} outside 1..={nvars}");
        Self::zero(nvars, field).with_term(Word(vec![i]), field.one())
    }

    pub fn from_terms(nvars: usize, field: FieldSpec, terms: impl IntoIterator<Item = (Word, Scalar)>) -> Self {
        let mut p = Self::zero(nvars, field);
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    fn with_term(mut self, w: Word, c: Scalar) -> Self {
        self.add_term(w, c);
        self
    }

    pub fn add_term(&mut self, w: Word, c: Scalar) {
        debug_assert!(w.0.iter().all(|&i| i >= 1 && i <= self.nvars));
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(e) => {
                *e = &*e + &c;
                if e.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, w: &Word) -> Option<&Scalar> {
        self.terms.get(w)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree (length of the longest word); 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> Option<&Scalar> {
        self.terms.get(&Word::empty())
    }

    pub fn has_constant_term(&self) -> bool {
        self.constant_term().is_some()
    }

    /// Variables that actually occur.
    pub fn used_variables(&self) -> Vec<usize> {
        let mut seen = vec![false; self.nvars];
        for w in self.terms.keys() {
            for &i in &w.0 {
                seen[i - 1] = true;
            }
        }
        (1..=self.nvars).filter(|&i| seen[i - 1]).collect()
    }

    /// Same polynomial viewed in a larger variable set.
    pub fn with_nvars(&self, nvars: usize) -> Result<Self, PolyError> {
        if self.used_variables().last().is_some_and(|&i| i > nvars) {
            return Err(PolyError::VariableCount(self.nvars, nvars));
        }
        Ok(FreePoly { nvars, ..self.clone() })
    }

    /// True iff every word is a permutation of `1..=m`.
    pub fn is_multilinear(&self) -> bool {
        !self.is_zero()
            && self.terms.keys().all(|w| w.len() == self.nvars && w.multidegree(self.nvars).iter().all(|&d| d == 1))
    }

    /// The common multidegree when all words share one.
    pub fn homogeneous_multidegree(&self) -> Option<Vec<usize>> {
        let mut words = self.terms.keys();
        let first = words.next()?.multidegree(self.nvars);
        words.all(|w| w.multidegree(self.nvars) == first).then_some(first)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::from_terms(self.nvars, self.field, self.terms.iter().map(|(w, a)| (w.clone(), a * c)))
    }

    pub fn checked_add(&self, other: &FreePoly) -> Result<Self, PolyError> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &FreePoly) -> Result<Self, PolyError> {
        self.compatible(other)?;
        let mut out = Self::zero(self.nvars, self.field);
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                out.add_term(u.concat(v), a * b);
            }
        }
        Ok(out)
    }

    fn compatible(&self, other: &FreePoly) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::VariableCount(self.nvars, other.nvars));
        }
        if self.field != other.field {
            return Err(FieldError::MixedFields(self.field, other.field).into());
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-self.field.one())
    }

    pub fn sub(&self, other: &FreePoly) -> Result<Self, PolyError> {
        self.checked_add(&other.neg())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.nvars, self.field.one());
        for _ in 0..k {
            acc = acc.checked_mul(self).expect("same shape");
        }
        acc
    }

    /// `[a, b] = ab - ba`.
    pub fn commutator(&self, other: &FreePoly) -> Result<Self, PolyError> {
        self.checked_mul(other)?.sub(&other.checked_mul(self)?)
    }

    /// Replace `x_i` by `images[i-1]`; the result lives in the variable set of
    /// the images.
    pub fn substitute(&self, images: &[FreePoly]) -> Result<Self, PolyError> {
        if images.len() != self.nvars {
            return Err(PolyError::SubstitutionArity { expected: self.nvars, got: images.len() });
        }
        let (nvars, field) = match images.first() {
            Some(q) => (q.nvars, q.field),
            None => (0, self.field),
        };
        let mut out = Self::zero(nvars, field);
        for (w, c) in &self.terms {
            let mut prod = Self::constant(nvars, c.embed(&field)?);
            for &i in &w.0 {
                prod = prod.checked_mul(&images[i - 1])?;
            }
            out = out.checked_add(&prod)?;
        }
        Ok(out)
    }

    /// Maps coefficients into `field` (reduction of rationals modulo `p`).
    pub fn reduce_to(&self, field: FieldSpec) -> Result<Self, PolyError> {
        let mut out = Self::zero(self.nvars, field);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.embed(&field)?);
        }
        Ok(out)
    }

    /// Renames variables: `x_i` becomes `x_{perm[i-1]}`.
    pub fn rename(&self, perm: &[usize]) -> Self {
        Self::from_terms(
            self.nvars,
            self.field,
            self.terms.iter().map(|(w, c)| (Word(w.0.iter().map(|&i| perm[i - 1]).collect()), c.clone())),
        )
    }

    /// Full multilinearization.
    ///
    /// Each variable `x_i` of degree `d_i` is split into `d_i` copies: the
    /// first keeps index `i`, the others get fresh indices after `m`, assigned
    /// in variable order. Every word is replaced by the sum over all ways to
    /// distribute the copies over its occurrences. Variables of degree zero
    /// are dropped and the remaining indices compacted.
    pub fn multilinearize(&self) -> Result<Self, PolyError> {
        let degrees = self.homogeneous_multidegree().ok_or(PolyError::NotHomogeneous)?;
        let mut copies: Vec<Vec<usize>> = Vec::with_capacity(self.nvars);
        let mut next = self.nvars + 1;
        for (i, &d) in degrees.iter().enumerate() {
            let mut c = Vec::with_capacity(d);
            if d > 0 {
                c.push(i + 1);
                for _ in 1..d {
                    c.push(next);
                    next += 1;
                }
            }
            copies.push(c);
        }
        // compact away variables that never occur
        let mut used: Vec<usize> = copies.iter().flatten().copied().collect();
        used.sort_unstable();
        let mut relabel = vec![0; next];
        for (k, &v) in used.iter().enumerate() {
            relabel[v] = k + 1;
        }
        let nvars = used.len();

        let mut out = Self::zero(nvars, self.field);
        for (w, c) in &self.terms {
            // positions of each variable inside the word
            let mut positions: Vec<Vec<usize>> = vec![Vec::new(); self.nvars];
            for (pos, &i) in w.0.iter().enumerate() {
                positions[i - 1].push(pos);
            }
            let mut letters = vec![0usize; w.len()];
            distribute(&positions, &copies, 0, &mut letters, &mut |letters| {
                let word = Word(letters.iter().map(|&v| relabel[v]).collect());
                out.add_term(word, c.clone());
            });
        }
        Ok(out)
    }

    /// Evaluates the polynomial in an arbitrary associative algebra.
    ///
    /// Words are visited in lexicographic order so that the product of a
    /// shared prefix is computed once.
    pub fn evaluate_with<T, E>(
        &self,
        one: T,
        vars: &[T],
        mut mul: impl FnMut(&T, &T) -> Result<T, E>,
        mut accumulate: impl FnMut(&Scalar, &T) -> Result<(), E>,
    ) -> Result<(), E> {
        assert_eq!(vars.len(), self.nvars, "one value per variable");
        let mut words: Vec<(&Word, &Scalar)> = self.terms.iter().collect();
        words.sort_by(|a, b| a.0 .0.cmp(&b.0 .0));
        let mut stack: Vec<T> = vec![one];
        let mut prev: &[usize] = &[];
        for (w, c) in words {
            let lcp = prev.iter().zip(&w.0).take_while(|(a, b)| a == b).count();
            stack.truncate(lcp + 1);
            for &i in &w.0[lcp..] {
                let next = mul(stack.last().unwrap(), &vars[i - 1])?;
                stack.push(next);
            }
            accumulate(c, stack.last().unwrap())?;
            prev = &w.0;
        }
        Ok(())
    }
}

fn distribute(
    positions: &[Vec<usize>],
    copies: &[Vec<usize>],
    var: usize,
    letters: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if var == positions.len() {
        emit(letters);
        return;
    }
    let mut perm = copies[var].clone();
    permutations(&mut perm, 0, &mut |perm| {
        for (&pos, &v) in positions[var].iter().zip(perm) {
            letters[pos] = v;
        }
        distribute(positions, copies, var + 1, letters, emit);
    });
}

fn permutations(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, f);
        items.swap(k, i);
    }
}

/// All permutations of `0..k` paired with their signs, in lexicographic order.
fn signed_permutations(k: usize) -> Vec<(Vec<usize>, bool)> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    let mut used = vec![false; k];
    fn rec(k: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<(Vec<usize>, bool)>) {
        if cur.len() == k {
            let inversions =
                (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).filter(|&(i, j)| cur[i] > cur[j]).count();
            out.push((cur.clone(), inversions % 2 == 0));
            return;
        }
        for v in 0..k {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(k, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    rec(k, &mut current, &mut used, &mut out);
    out
}

/// The standard polynomial `s_k = sum sgn(s) x_s(1) ... x_s(k)`.
pub fn standard_poly(k: usize, field: FieldSpec) -> FreePoly {
    assert!(k >= 1);
    let one = field.one();
    FreePoly::from_terms(
        k,
        field,
        signed_permutations(k).into_iter().map(|(perm, even)| {
            let w = Word(perm.iter().map(|&i| i + 1).collect());
            (w, if even { one.clone() } else { -&one })
        }),
    )
}

/// The Capelli polynomial `c_t = sum sgn(s) x_s(1) y_1 x_s(2) ... y_{t-1} x_s(t)`.
///
/// The alternating letters are `x1..xt`; the separators `y_j` are `x_{t+j}`.
pub fn capelli_poly(t: usize, field: FieldSpec) -> FreePoly {
    assert!(t >= 1);
    let one = field.one();
    FreePoly::from_terms(
        2 * t - 1,
        field,
        signed_permutations(t).into_iter().map(|(perm, even)| {
            let mut w = Vec::with_capacity(2 * t - 1);
            for (j, &i) in perm.iter().enumerate() {
                if j > 0 {
                    w.push(t + j);
                }
                w.push(i + 1);
            }
            (Word(w), if even { one.clone() } else { -&one })
        }),
    )
}

/// Named polynomials understood by the command line: `s<k>` and `c<t>`.
pub fn builtin(name: &str, field: FieldSpec) -> Option<FreePoly> {
    let (kind, n) = name.split_at(1.min(name.len()));
    let n: usize = n.parse().ok().filter(|&n| (1..=8).contains(&n))?;
    match kind {
        "s" => Some(standard_poly(n, field)),
        "c" => Some(capelli_poly(n, field)),
        _ => None,
    }
}

impl fmt::Display for FreePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let (neg, mag) = if c.is_negative() { (true, -c) } else { (false, c.clone()) };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if w.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "{mag}*{w}")?;
            }
        }
        Ok(())
    }
}
