//! 2x2 matrices over a small prime field, packed as integers.
//!
//! A matrix `a,b;c,d` has code `((a q + b) q + c) q + d`, so codes follow
//! the row-major lexicographic order of entries.

use crate::field::{FieldSpec, Scalar};
use crate::freealg::FreePoly;
use crate::matalg::Mat2;

pub(crate) type M = [u32; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Fq {
    pub q: u32,
}

impl Fq {
    pub fn new(q: u64) -> Self {
        assert!((2..1 << 15).contains(&q), "small prime");
        Fq { q: q as u32 }
    }

    pub fn spec(self) -> FieldSpec {
        FieldSpec::prime(self.q as u64).expect("prime")
    }

    pub fn count(self) -> usize {
        (self.q as usize).pow(4)
    }

    pub fn add(self, a: u32, b: u32) -> u32 {
        (a + b) % self.q
    }

    pub fn mul(self, a: u32, b: u32) -> u32 {
        a * b % self.q
    }

    pub fn neg(self, a: u32) -> u32 {
        (self.q - a) % self.q
    }

    pub fn inv(self, a: u32) -> u32 {
        debug_assert!(a != 0);
        let mut r = 1u32;
        let (mut base, mut e) = (a, self.q - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        r
    }

    pub fn mat_mul(self, a: &M, b: &M) -> M {
        let q = self.q;
        [
            (a[0] * b[0] + a[1] * b[2]) % q,
            (a[0] * b[1] + a[1] * b[3]) % q,
            (a[2] * b[0] + a[3] * b[2]) % q,
            (a[2] * b[1] + a[3] * b[3]) % q,
        ]
    }

    pub fn det(self, a: &M) -> u32 {
        (a[0] * a[3] + self.neg(a[1] * a[2] % self.q)) % self.q
    }

    pub fn mat_inv(self, a: &M) -> Option<M> {
        let d = self.det(a);
        if d == 0 {
            return None;
        }
        let i = self.inv(d);
        Some([self.mul(a[3], i), self.mul(self.neg(a[1]), i), self.mul(self.neg(a[2]), i), self.mul(a[0], i)])
    }

    pub fn scale(self, c: u32, a: &M) -> M {
        a.map(|x| self.mul(c, x))
    }

    pub fn encode(self, a: &M) -> usize {
        let q = self.q as usize;
        ((a[0] as usize * q + a[1] as usize) * q + a[2] as usize) * q + a[3] as usize
    }

    pub fn decode(self, mut k: usize) -> M {
        let q = self.q as usize;
        let mut out = [0u32; 4];
        for slot in out.iter_mut().rev() {
            *slot = (k % q) as u32;
            k /= q;
        }
        out
    }

    pub fn to_mat2(self, a: &M) -> Mat2 {
        let f = self.spec();
        Mat2::new(f, a.map(|x| f.from_i64(x as i64))).expect("same field")
    }

    pub fn entries_of(self, a: &Mat2) -> Option<M> {
        let e = a.entries();
        let r = |k: usize| e[k].residue().map(|v| v as u32);
        (a.field() == self.spec()).then_some(())?;
        Some([r(0)?, r(1)?, r(2)?, r(3)?])
    }

    /// Every invertible matrix, in code order.
    pub fn general_linear(self) -> Vec<M> {
        (0..self.count()).map(|k| self.decode(k)).filter(|a| self.det(a) != 0).collect()
    }

    /// Generators of `GL_2(F_q)`: two elementary transvections and
    /// `diag(g, 1)` for a generator `g` of the multiplicative group.
    pub fn gl_generators(self) -> Vec<M> {
        let g = (1..self.q).find(|&g| self.multiplicative_order(g) == self.q - 1).expect("cyclic group");
        vec![[1, 1, 0, 1], [1, 0, 1, 1], [g, 0, 0, 1]]
    }

    fn multiplicative_order(self, g: u32) -> u32 {
        let mut x = g;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }
}

/// Polynomial compiled for repeated evaluation over `F_q`: words sorted so
/// that consecutive words share prefixes, with the shared length stored.
pub(crate) struct Program {
    fq: Fq,
    steps: Vec<(usize, Vec<usize>, u32)>,
}

impl Program {
    pub fn new(p: &FreePoly, fq: Fq) -> Self {
        let mut words: Vec<(Vec<usize>, u32)> = p
            .terms()
            .map(|(w, c)| (w.letters().iter().map(|&i| i - 1).collect(), residue(c)))
            .filter(|(_, c)| *c != 0)
            .collect();
        words.sort();
        let mut steps = Vec::with_capacity(words.len());
        let mut prev: &[usize] = &[];
        for (w, c) in &words {
            let lcp = prev.iter().zip(w).take_while(|(a, b)| a == b).count();
            steps.push((lcp, w[lcp..].to_vec(), *c));
            prev = w;
        }
        Program { fq, steps }
    }

    pub fn evaluate(&self, args: &[M], stack: &mut Vec<M>) -> M {
        let fq = self.fq;
        stack.clear();
        stack.push([1, 0, 0, 1]);
        let mut total = [0u32; 4];
        for (lcp, tail, c) in &self.steps {
            stack.truncate(lcp + 1);
            for &i in tail {
                let next = fq.mat_mul(stack.last().expect("nonempty"), &args[i]);
                stack.push(next);
            }
            let v = stack.last().expect("nonempty");
            for k in 0..4 {
                total[k] = fq.add(total[k], fq.mul(*c, v[k]));
            }
        }
        total
    }
}

/// Cayley tables on matrix codes, for fields small enough that the
/// multiplication table fits comfortably in cache.
pub(crate) struct Tables {
    n: usize,
    mul: Vec<u16>,
    add: Vec<u16>,
}

impl Tables {
    pub const MAX_Q: u32 = 5;

    pub fn new(fq: Fq) -> Option<Self> {
        if fq.q > Self::MAX_Q {
            return None;
        }
        let n = fq.count();
        let all: Vec<M> = (0..n).map(|k| fq.decode(k)).collect();
        let mut mul = vec![0u16; n * n];
        let mut add = vec![0u16; n * n];
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                mul[i * n + j] = fq.encode(&fq.mat_mul(a, b)) as u16;
                add[i * n + j] = fq.encode(&[0, 1, 2, 3].map(|k| fq.add(a[k], b[k]))) as u16;
            }
        }
        Some(Tables { n, mul, add })
    }
}

impl Program {
    /// Evaluation on matrix codes; coefficients enter as scalar matrices.
    pub fn evaluate_codes(&self, t: &Tables, args: &[u16], stack: &mut Vec<u16>) -> u16 {
        let n = t.n;
        let identity = self.fq.encode(&[1, 0, 0, 1]) as u16;
        stack.clear();
        stack.push(identity);
        let mut total = 0u16;
        for (lcp, tail, c) in &self.steps {
            stack.truncate(lcp + 1);
            for &i in tail {
                let top = *stack.last().expect("nonempty") as usize;
                stack.push(t.mul[top * n + args[i] as usize]);
            }
            let v = *stack.last().expect("nonempty") as usize;
            let scaled = self.fq.encode(&[*c, 0, 0, *c]);
            total = t.add[total as usize * n + t.mul[scaled * n + v] as usize];
        }
        total
    }
}

fn residue(c: &Scalar) -> u32 {
    c.residue().expect("prime field coefficient") as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matalg::{all_matrices, evaluate};

    #[test]
    fn codes_follow_all_matrices_order() {
        let fq = Fq::new(3);
        let all = all_matrices(fq.spec());
        for (k, m) in all.iter().enumerate() {
            assert_eq!(fq.encode(&fq.entries_of(m).unwrap()), k);
            assert_eq!(&fq.to_mat2(&fq.decode(k)), m);
        }
    }

    #[test]
    fn group_sizes() {
        // |GL_2(F_q)| = (q^2 - 1)(q^2 - q)
        for q in [2u32, 3, 5, 7] {
            let n = Fq::new(q as u64).general_linear().len() as u32;
            assert_eq!(n, (q * q - 1) * (q * q - q));
        }
        let fq = Fq::new(7);
        for a in fq.general_linear() {
            assert_eq!(fq.mat_mul(&a, &fq.mat_inv(&a).unwrap()), [1, 0, 0, 1]);
        }
        assert_eq!(fq.gl_generators()[2], [3, 0, 0, 1]);
    }

    #[test]
    fn tables_match_arithmetic() {
        let fq = Fq::new(3);
        let t = Tables::new(fq).unwrap();
        let f = FreePoly::parse("2*x1*x2*x1 + x2^3 - x1", 2, fq.spec()).unwrap();
        let prog = Program::new(&f, fq);
        let (mut s1, mut s2) = (Vec::new(), Vec::new());
        for k in 0..fq.count() * fq.count() {
            let (a, b) = (k / fq.count(), k % fq.count());
            let direct = prog.evaluate(&[fq.decode(a), fq.decode(b)], &mut s1);
            assert_eq!(prog.evaluate_codes(&t, &[a as u16, b as u16], &mut s2) as usize, fq.encode(&direct));
        }
        assert!(Tables::new(Fq::new(7)).is_none());
    }

    #[test]
    fn program_matches_exact_evaluation() {
        let fq = Fq::new(5);
        let f = FreePoly::parse("[x1,x2]^2*x1 - 3*x2*x1*x2", 2, fq.spec()).unwrap();
        let prog = Program::new(&f, fq);
        let mut stack = Vec::new();
        for k in (0..fq.count() * fq.count()).step_by(97) {
            let args = [fq.decode(k / fq.count()), fq.decode(k % fq.count())];
            let exact = evaluate(&f, &[fq.to_mat2(&args[0]), fq.to_mat2(&args[1])]);
            assert_eq!(fq.to_mat2(&prog.evaluate(&args, &mut stack)), exact);
        }
    }
}
