//! Row reduction over an exact field.

use crate::field::Scalar;

/// Incrementally built row-reduced basis of a subspace of `K^n`.
#[derive(Debug, Clone)]
pub struct SpanBasis {
    dim: usize,
    /// Reduced rows with their pivot column; each pivot entry is 1 and the
    /// pivot column is zero in every other stored row.
    rows: Vec<(usize, Vec<Scalar>)>,
}

impl SpanBasis {
    pub fn new(dim: usize) -> Self {
        SpanBasis { dim, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut v = v.to_vec();
        for (pivot, row) in &self.rows {
            if !v[*pivot].is_zero() {
                let c = v[*pivot].clone();
                for (x, r) in v.iter_mut().zip(row) {
                    *x = &*x - &(&c * r);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(Scalar::is_zero)
    }

    /// Adds `v`; returns true when it was independent of the current span.
    pub fn insert(&mut self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut r = self.reduce(v);
        let Some(pivot) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = r[pivot].inv().expect("nonzero pivot");
        for x in r.iter_mut() {
            *x = &*x * &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if !row[pivot].is_zero() {
                let c = row[pivot].clone();
                for (x, y) in row.iter_mut().zip(&r) {
                    *x = &*x - &(&c * y);
                }
            }
        }
        self.rows.push((pivot, r));
        self.rows.sort_by_key(|(p, _)| *p);
        true
    }

    /// Reduced row echelon form, sorted by pivot.
    pub fn rows(&self) -> impl Iterator<Item = &[Scalar]> {
        self.rows.iter().map(|(_, r)| r.as_slice())
    }
}

pub fn rank(vectors: &[Vec<Scalar>]) -> usize {
    let Some(first) = vectors.first() else { return 0 };
    let mut b = SpanBasis::new(first.len());
    for v in vectors {
        b.insert(v);
    }
    b.rank()
}

/// Basis of `{ w : A w = 0 }` for the matrix with the given rows and `ncols`
/// columns, one vector per free column.
pub fn nullspace(rows: &[Vec<Scalar>], ncols: usize, zero: &Scalar) -> Vec<Vec<Scalar>> {
    let mut b = SpanBasis::new(ncols);
    for r in rows {
        b.insert(r);
    }
    let pivots: Vec<usize> = b.rows.iter().map(|(p, _)| *p).collect();
    let one = zero.field().one();
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![zero.clone(); ncols];
            v[free] = one.clone();
            for (p, row) in &b.rows {
                v[*p] = -&row[free];
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn vecq(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| FieldSpec::rationals().from_i64(x)).collect()
    }

    #[test]
    fn rank_and_membership() {
        let vs = vec![vecq(&[1, 2, 3]), vecq(&[2, 4, 6]), vecq(&[0, 1, 1])];
        assert_eq!(rank(&vs), 2);
        let mut b = SpanBasis::new(3);
        for v in &vs {
            b.insert(v);
        }
        assert!(b.contains(&vecq(&[1, 3, 4])));
        assert!(!b.contains(&vecq(&[0, 0, 1])));
    }

    #[test]
    fn nullspace_of_single_equation() {
        let zero = FieldSpec::rationals().zero();
        let ns = nullspace(&[vecq(&[1, 1])], 2, &zero);
        assert_eq!(ns, vec![vecq(&[-1, 1])]);
        let ns = nullspace(&[], 2, &zero);
        assert_eq!(ns.len(), 2);
    }

    #[test]
    fn rank_over_f2() {
        let f2 = FieldSpec::prime(2).unwrap();
        let v = |a: &[i64]| a.iter().map(|&x| f2.from_i64(x)).collect::<Vec<_>>();
        assert_eq!(rank(&[v(&[1, 1, 0]), v(&[0, 1, 1]), v(&[1, 0, 1])]), 2);
    }
}
