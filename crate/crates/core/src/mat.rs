//! Dense symmetric matrices and LDL^T factorizations, generic over [`Scalar`].
//!
//! Two factorization variants back the definiteness tests used throughout:
//!
//! * [`ldlt_unpivoted`] requires every pivot to be strictly positive and is
//!   the decision procedure for positive definiteness (and, applied to `-M`,
//!   for strict negative definiteness).
//! * [`ldlt_psd_pivoted`] pivots on the largest remaining diagonal entry and
//!   decides positive *semi*definiteness: a zero pivot is legal only when the
//!   whole remaining Schur complement vanishes.
//!
//! Over `Rat` these are exact decision procedures; over [`crate::Mpf`] or
//! `f64` they are the usual numerical tests.

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SymMat<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMat<T> {
    pub fn zeros(dim: usize) -> Self {
        SymMat {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    /// Build from an entry function; `f` is evaluated on `i <= j` and
    /// mirrored, so the result is symmetric by construction.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = SymMat::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.set_sym(i, j, v);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "ragged rows");
            data.extend(row);
        }
        SymMat { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.dim + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.dim + i] = v.clone();
        self.data[i * self.dim + j] = v;
    }

    /// Add `v` into entry `(i, j)` and, when off-diagonal, into `(j, i)`.
    pub fn accumulate_sym(&mut self, i: usize, j: usize, v: &T) {
        self.data[i * self.dim + j] += v;
        if i != j {
            self.data[j * self.dim + i] += v;
        }
    }

    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                if self.get(i, j) != self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }

    pub fn neg(&self) -> Self {
        SymMat {
            dim: self.dim,
            data: self.data.iter().map(|v| -v.clone()).collect(),
        }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> T {
        let mut t = T::zero();
        for i in 0..self.dim {
            t += self.get(i, i);
        }
        t
    }
}

/// `P A P^T = L D L^T` with unit lower-triangular `L`; `perm[k]` is the
/// original index pivoted at step `k`. Columns at and beyond `rank` were never
/// eliminated (their `diag` entry is zero).
#[derive(Clone, Debug)]
pub struct LdltFactors<T> {
    pub dim: usize,
    pub perm: Vec<usize>,
    pub unit_lower: Vec<Vec<T>>,
    pub diag: Vec<T>,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PivotFailure<T> {
    /// Index in the original matrix at which the pivot was not positive.
    pub index: usize,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PsdWitness<T> {
    /// A diagonal pivot came out negative.
    NegativePivot { index: usize, value: T },
    /// The largest remaining diagonal entry was zero but the Schur complement
    /// row at `index` still had nonzero entries.
    ZeroPivotRow { index: usize, row: Vec<T> },
}

pub enum PsdResult<T> {
    Psd { factors: LdltFactors<T> },
    NotPsd { witness: PsdWitness<T> },
}

/// Strict LDL^T without pivoting: succeeds iff the matrix is positive
/// definite, failing at the first nonpositive pivot.
pub fn ldlt_unpivoted<T: Scalar>(m: &SymMat<T>) -> Result<LdltFactors<T>, PivotFailure<T>> {
    let dim = m.dim();
    let mut a = m.clone();
    let mut lower = vec![vec![T::zero(); dim]; dim];
    let mut diag = vec![T::zero(); dim];
    for k in 0..dim {
        let piv = a.get(k, k).clone();
        if !piv.is_pos() {
            return Err(PivotFailure {
                index: k,
                value: piv,
            });
        }
        diag[k] = piv.clone();
        lower[k][k] = T::one();
        for i in k + 1..dim {
            let mut l = a.get(i, k).clone();
            l /= &piv;
            lower[i][k] = l;
        }
        for i in k + 1..dim {
            for j in k + 1..=i {
                let mut upd = lower[i][k].clone();
                upd *= &piv;
                upd *= &lower[j][k];
                let mut v = a.get(i, j).clone();
                v -= &upd;
                a.set_sym(i, j, v);
            }
        }
    }
    Ok(LdltFactors {
        dim,
        perm: (0..dim).collect(),
        unit_lower: lower,
        diag,
        rank: dim,
    })
}

/// LDL^T with symmetric pivoting on the largest remaining diagonal entry:
/// decides positive semidefiniteness exactly over an exact scalar.
pub fn ldlt_psd_pivoted<T: Scalar>(m: &SymMat<T>) -> PsdResult<T> {
    let dim = m.dim();
    let mut a = m.clone();
    // track[i] = original index currently sitting at row/column i
    let mut track: Vec<usize> = (0..dim).collect();
    let mut lower = vec![vec![T::zero(); dim]; dim];
    let mut diag = vec![T::zero(); dim];
    let mut rank = dim;

    for k in 0..dim {
        let mut best = k;
        for i in k + 1..dim {
            if a.get(i, i) > a.get(best, best) {
                best = i;
            }
        }
        if best != k {
            swap_sym(&mut a, k, best);
            track.swap(k, best);
            lower.swap(k, best);
        }
        let piv = a.get(k, k).clone();
        if piv.is_neg() {
            return PsdResult::NotPsd {
                witness: PsdWitness::NegativePivot {
                    index: track[k],
                    value: piv,
                },
            };
        }
        if piv.is_zero() {
            // Maximal diagonal entry of the Schur complement is zero: the
            // whole remaining block must vanish for the matrix to be PSD.
            for i in k..dim {
                if (k..dim).any(|j| !a.get(i, j).is_zero()) {
                    return PsdResult::NotPsd {
                        witness: PsdWitness::ZeroPivotRow {
                            index: track[i],
                            row: (k..dim).map(|j| a.get(i, j).clone()).collect(),
                        },
                    };
                }
            }
            rank = k;
            break;
        }
        diag[k] = piv.clone();
        lower[k][k] = T::one();
        for i in k + 1..dim {
            let mut l = a.get(i, k).clone();
            l /= &piv;
            lower[i][k] = l;
        }
        for i in k + 1..dim {
            for j in k + 1..=i {
                let mut upd = lower[i][k].clone();
                upd *= &piv;
                upd *= &lower[j][k];
                let mut v = a.get(i, j).clone();
                v -= &upd;
                a.set_sym(i, j, v);
            }
        }
    }
    for k in rank..dim {
        lower[k][k] = T::one();
    }
    PsdResult::Psd {
        factors: LdltFactors {
            dim,
            perm: track,
            unit_lower: lower,
            diag,
            rank,
        },
    }
}

fn swap_sym<T: Scalar>(a: &mut SymMat<T>, p: usize, q: usize) {
    let dim = a.dim();
    for j in 0..dim {
        a.data.swap(p * dim + j, q * dim + j);
    }
    for i in 0..dim {
        a.data.swap(i * dim + p, i * dim + q);
    }
}

impl<T: Scalar> SymMat<T> {
    fn set_entry(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
    }
}

impl<T: Scalar> LdltFactors<T> {
    /// Solve `A x = b` for the factored matrix. Requires full rank.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(self.rank, self.dim, "solve needs a full-rank factorization");
        let n = self.dim;
        // z = P b
        let mut z: Vec<T> = (0..n).map(|k| b[self.perm[k]].clone()).collect();
        // L w = z (unit diagonal)
        for i in 0..n {
            for k in 0..i {
                let mut t = self.unit_lower[i][k].clone();
                t *= &z[k];
                z[i] -= &t;
            }
        }
        // D u = w
        for (i, zi) in z.iter_mut().enumerate() {
            *zi /= &self.diag[i];
        }
        // L^T v = u
        for i in (0..n).rev() {
            for k in i + 1..n {
                let mut t = self.unit_lower[k][i].clone();
                t *= &z[k];
                z[i] -= &t;
            }
        }
        // x = P^T v
        let mut x = vec![T::zero(); n];
        for k in 0..n {
            x[self.perm[k]] = z[k].clone();
        }
        x
    }

    /// Inverse of the factored matrix (full rank only).
    pub fn inverse(&self) -> SymMat<T> {
        let n = self.dim;
        let mut inv = SymMat::zeros(n);
        for j in 0..n {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            let col = self.solve(&e);
            for (i, v) in col.into_iter().enumerate() {
                inv.set_entry(i, j, v);
            }
        }
        inv
    }

    /// Reassemble `P^T (L D L^T) P`; equals the input matrix exactly when the
    /// scalar is exact.
    pub fn recompose(&self) -> SymMat<T> {
        let n = self.dim;
        let mut out = SymMat::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = T::zero();
                for k in 0..self.rank.min(j + 1) {
                    if self.diag[k].is_zero() {
                        continue;
                    }
                    let mut t = self.unit_lower[i][k].clone();
                    t *= &self.diag[k];
                    t *= &self.unit_lower[j][k];
                    acc += &t;
                }
                out.set_sym(self.perm[i], self.perm[j], acc);
            }
        }
        out
    }

    pub fn min_diag(&self) -> Option<&T> {
        self.diag[..self.rank]
            .iter()
            .min_by(|a, b| a.partial_cmp(b).expect("ordered scalar"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    fn rmat(rows: &[&[i64]]) -> SymMat<Rat> {
        SymMat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rat(v, 1)).collect())
                .collect(),
        )
    }

    #[test]
    fn identity_is_pd_and_psd() {
        let m = rmat(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert!(ldlt_unpivoted(&m).is_ok());
        assert!(matches!(ldlt_psd_pivoted(&m), PsdResult::Psd { .. }));
    }

    #[test]
    fn indefinite_two_by_two_rejected_with_negative_pivot() {
        // det = 1*1 - 2*2 = -3
        let m = rmat(&[&[1, 2], &[2, 1]]);
        match ldlt_psd_pivoted(&m) {
            PsdResult::NotPsd {
                witness: PsdWitness::NegativePivot { value, .. },
            } => assert_eq!(value, rat(-3, 1)),
            _ => panic!("expected negative pivot"),
        }
        assert!(ldlt_unpivoted(&m).is_err());
    }

    #[test]
    fn rank_one_gram_matrix_is_psd() {
        // Gram matrix of (x + y)^2: zero pivot with zero remainder
        let m = rmat(&[&[1, 1], &[1, 1]]);
        match ldlt_psd_pivoted(&m) {
            PsdResult::Psd { factors } => assert_eq!(factors.rank, 1),
            _ => panic!("expected PSD"),
        }
    }

    #[test]
    fn zero_pivot_with_dirty_row_rejected() {
        // PSD fails: diag zero at index 2 but coupled to index 0
        let m = rmat(&[&[1, 0, 1], &[0, 1, 0], &[1, 0, 0]]);
        match ldlt_psd_pivoted(&m) {
            PsdResult::NotPsd {
                witness: PsdWitness::ZeroPivotRow { .. },
            } => {}
            PsdResult::NotPsd {
                witness: PsdWitness::NegativePivot { .. },
            } => {} // elimination may surface it as a negative pivot instead
            _ => panic!("expected rejection"),
        }
    }

    #[test]
    fn solve_against_known_system() {
        let m = rmat(&[&[4, 2], &[2, 3]]);
        let f = ldlt_unpivoted(&m).unwrap();
        let x = f.solve(&[rat(1, 1), rat(2, 1)]);
        assert_eq!(x, vec![rat(-1, 8), rat(3, 4)]);
        let inv = f.inverse();
        // A * A^-1 = I, spot entry
        let mut acc = Rat::new(BigInt::from(0), BigInt::from(1));
        for k in 0..2 {
            acc += m.get(0, k) * inv.get(k, 0);
        }
        assert_eq!(acc, rat(1, 1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn recompose_reproduces_input(seed in prop::collection::vec(-6i64..6, 1..21)) {
            // Build a random symmetric rational matrix from the seed values.
            let dim = (seed.len() as f64).sqrt().floor() as usize;
            let dim = dim.clamp(1, 4);
            let mut m = SymMat::zeros(dim);
            let mut it = seed.iter().cycle();
            for i in 0..dim {
                for j in i..dim {
                    let n = *it.next().unwrap();
                    let d = 1 + (*it.next().unwrap()).unsigned_abs() as i64;
                    m.set_sym(i, j, rat(n, d));
                }
            }
            match ldlt_psd_pivoted(&m) {
                PsdResult::Psd { factors } => prop_assert_eq!(factors.recompose(), m.clone()),
                PsdResult::NotPsd { .. } => {}
            }
            // Make it PD by diagonal dominance, then the strict variant must
            // succeed and also recompose exactly.
            let mut dd = m.clone();
            for i in 0..dim {
                let bump: Rat = (0..dim).map(|j| dd.get(i, j).abs_val()).sum();
                let v = dd.get(i, i).clone() + bump + rat(1, 1);
                dd.set_sym(i, i, v);
            }
            let f = ldlt_unpivoted(&dd).unwrap();
            prop_assert_eq!(f.recompose(), dd);
        }
    }
}
