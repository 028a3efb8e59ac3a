//! General band matrices and their LU factorization with partial pivoting,
//! stored column-major in the usual LAPACK band layout.

use super::Vector;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    /// Zero `n × n` matrix with `kl` sub- and `ku` superdiagonals. Extra
    /// `kl` rows are reserved for fill-in during factorization.
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            data: vec![0.0; ldab * n],
        }
    }

    /// Builds a band matrix from `(row, col, value)` triplets, summing
    /// duplicates; the bandwidths are taken from the triplets.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut kl = 0;
        let mut ku = 0;
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({i}, {j}) outside {n}x{n}"
                )));
            }
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let mut m = Self::zeros(n, kl, ku);
        for &(i, j, v) in triplets {
            m.add(i, j, v);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.kl + self.ku + i - j
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            i <= j + self.kl && j <= i + self.ku,
            "entry ({i}, {j}) outside the band"
        );
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i > j + self.kl || j > i + self.ku {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn mul_vec(&self, x: &Vector) -> Vector {
        let mut y = Vector::zeros(self.n);
        for j in 0..self.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.data[self.idx(i, j)] * xj;
            }
        }
        y
    }
}

/// `P A = L U` of a band matrix; `U` has `kl + ku` superdiagonals.
#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
    ipiv: Vec<usize>,
    original: BandMatrix,
}

impl BandLu {
    pub fn new(a: &BandMatrix) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        let kv = a.kl + a.ku;
        let ldab = a.ldab;
        let mut ab = a.data.clone();
        let mut ipiv = vec![0; n];
        let mut ju = 0usize;
        let at = |i: usize, j: usize| j * ldab + kv + i - j;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = ab[at(j, j)].abs();
            for i in 1..=km {
                let v = ab[at(j + i, j)].abs();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularQp);
            }
            ju = ju.max((j + a.ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    ab.swap(at(j, c), at(j + jp, c));
                }
            }
            let pivot = ab[at(j, j)];
            for i in 1..=km {
                ab[at(j + i, j)] /= pivot;
            }
            for c in j + 1..=ju {
                let ujc = ab[at(j, c)];
                if ujc == 0.0 {
                    continue;
                }
                for i in 1..=km {
                    let l = ab[at(j + i, j)];
                    ab[at(j + i, c)] -= l * ujc;
                }
            }
        }
        Ok(Self {
            lu: BandMatrix {
                data: ab,
                ..a.clone()
            },
            ipiv,
            original: a.clone(),
        })
    }

    fn solve_raw(&self, b: &Vector) -> Vector {
        let n = self.lu.n;
        let kl = self.lu.kl;
        let kv = self.lu.kl + self.lu.ku;
        let ldab = self.lu.ldab;
        let ab = &self.lu.data;
        let at = |i: usize, j: usize| j * ldab + kv + i - j;
        let mut x = b.clone();
        for j in 0..n {
            let l = self.ipiv[j];
            if l != j {
                x.swap_rows(l, j);
            }
            let xj = x[j];
            for i in 1..=kl.min(n - 1 - j) {
                x[j + i] -= ab[at(j + i, j)] * xj;
            }
        }
        for j in (0..n).rev() {
            x[j] /= ab[at(j, j)];
            let xj = x[j];
            for i in j.saturating_sub(kv)..j {
                x[i] -= ab[at(i, j)] * xj;
            }
        }
        x
    }

    /// Solves `A x = b` with one step of iterative refinement.
    pub fn solve(&self, b: &Vector) -> Vector {
        let mut x = self.solve_raw(b);
        let r = b - self.original.mul_vec(&x);
        x += self.solve_raw(&r);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Lu, Matrix};

    #[test]
    fn matches_dense_solve_with_pivoting() {
        let n = 9;
        let mut triplets = Vec::new();
        let mut dense = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(2)..(i + 2).min(n) {
                // small diagonal forces row exchanges
                let v = if i == j {
                    1e-3 * (i as f64 + 1.0)
                } else {
                    1.0 + 0.1 * (i * 3 + j) as f64
                };
                triplets.push((i, j, v));
                dense[(i, j)] = v;
            }
        }
        let band = BandMatrix::from_triplets(n, &triplets).unwrap();
        assert_eq!(band.bandwidths(), (2, 1));
        let b = Vector::from_fn(n, |i, _| (i as f64).sin());
        let x = BandLu::new(&band).unwrap().solve(&b);
        let y = Lu::new(&dense).unwrap().solve(&b).unwrap();
        assert!((x - y).amax() < 1e-12);
    }

    #[test]
    fn singular_band_is_rejected() {
        let band = BandMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        assert!(matches!(BandLu::new(&band), Err(Error::SingularQp)));
    }
}
