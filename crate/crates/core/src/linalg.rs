//! Dense complex matrices, LU solves and condition numbers.

use crate::error::{HnaError, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const PIVOT_FLOOR: f64 = 1e-300;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl DenseComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(HnaError::Dimension {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(DenseComplexMatrix { rows, cols, data })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseComplexMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Order of a square matrix.
    pub fn order(&self) -> usize {
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        DenseComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(HnaError::Dimension {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn matmul(&self, other: &DenseComplexMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(HnaError::Dimension {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                let orow = other.row(l);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

/// `sqrt(sum |x_i|^2)`.
pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `PA = LU` with unit lower-triangular `L` stored below the diagonal of `lu`.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    lu: DenseComplexMatrix,
    perm: Vec<usize>,
}

impl LuFactorization {
    /// Partial-pivoted factorization; fails on a pivot of modulus below `1e-300`.
    pub fn new(a: &DenseComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(HnaError::Dimension {
                expected: a.rows,
                got: a.cols,
            });
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for c in 0..n {
            let (p, best) = (c..n)
                .map(|r| (r, lu.get(r, c).norm()))
                .fold((c, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(best >= PIVOT_FLOOR) {
                return Err(HnaError::Singular(c));
            }
            if p != c {
                perm.swap(p, c);
                for j in 0..n {
                    lu.data.swap(p * n + j, c * n + j);
                }
            }
            let pivot = lu.get(c, c);
            let (top, rest) = lu.data.split_at_mut((c + 1) * n);
            let prow = &top[c * n..];
            for r in 0..(n - c - 1) {
                let row = &mut rest[r * n..(r + 1) * n];
                let f = row[c] / pivot;
                row[c] = f;
                if f != ZERO {
                    for j in (c + 1)..n {
                        row[j] -= f * prow[j];
                    }
                }
            }
        }
        Ok(LuFactorization { lu, perm })
    }

    pub fn order(&self) -> usize {
        self.lu.rows
    }

    /// Row permutation: row `i` of `PA` is row `perm[i]` of `A`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn lower(&self) -> DenseComplexMatrix {
        let n = self.order();
        DenseComplexMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.lu.get(i, j),
            std::cmp::Ordering::Equal => Complex64::new(1.0, 0.0),
            std::cmp::Ordering::Less => ZERO,
        })
    }

    pub fn upper(&self) -> DenseComplexMatrix {
        let n = self.order();
        DenseComplexMatrix::from_fn(n, n, |i, j| if i <= j { self.lu.get(i, j) } else { ZERO })
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.order();
        if b.len() != n {
            return Err(HnaError::Dimension { expected: n, got: b.len() });
        }
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: Complex64 = row[..i].iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: Complex64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }
}

/// Solves `A v = b` by partial-pivoted LU.
pub fn lu_solve(a: &DenseComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if b.len() != a.rows {
        return Err(HnaError::Dimension {
            expected: a.rows,
            got: b.len(),
        });
    }
    LuFactorization::new(a)?.solve(b)
}

/// `||A v - b|| / ||b||`.
pub fn relative_residual(a: &DenseComplexMatrix, v: &[Complex64], b: &[Complex64]) -> Result<f64> {
    let av = a.matvec(v)?;
    let r: Vec<Complex64> = av.iter().zip(b).map(|(x, y)| x - y).collect();
    Ok(norm2(&r) / norm2(b))
}

/// Singular values in decreasing order.
pub fn singular_values(a: &DenseComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// 2-norm condition number `sigma_max / sigma_min`, `+inf` for singular matrices.
pub fn condition_number(a: &DenseComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(HnaError::Dimension {
            expected: a.rows,
            got: a.cols,
        });
    }
    if a.rows == 0 {
        return Ok(1.0);
    }
    let s = singular_values(a);
    let (max, min) = (s[0], *s.last().unwrap());
    if !(min > 0.0) || !(max / min).is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> DenseComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseComplexMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn identity_solve() {
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 0.0)];
        let v = lu_solve(&DenseComplexMatrix::identity(3), &b).unwrap();
        assert_eq!(v, b);
    }

    #[test]
    fn diagonal_solve() {
        let mut a = DenseComplexMatrix::zeros(2, 2);
        a.set(0, 0, c(2.0, 0.0));
        a.set(1, 1, c(1.0, 1.0));
        let v = lu_solve(&a, &[c(2.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!((v[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((v[1] - c(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn manufactured_solution() {
        let mut a = random_matrix(50, 3);
        for i in 0..50 {
            let d = a.get(i, i) + c(10.0, 0.0);
            a.set(i, i, d);
        }
        let ones = vec![c(1.0, 0.0); 50];
        let b = a.matvec(&ones).unwrap();
        let v = lu_solve(&a, &b).unwrap();
        assert!(v.iter().all(|x| (x - c(1.0, 0.0)).norm() < 1e-12));
        assert!(relative_residual(&a, &v, &b).unwrap() < 1e-14);
    }

    #[test]
    fn backward_stability() {
        let a = random_matrix(100, 11);
        let f = LuFactorization::new(&a).unwrap();
        let pa = DenseComplexMatrix::from_fn(100, 100, |i, j| a.get(f.permutation()[i], j));
        let prod = f.lower().matmul(&f.upper()).unwrap();
        let diff = DenseComplexMatrix::from_fn(100, 100, |i, j| pa.get(i, j) - prod.get(i, j));
        assert!(diff.frobenius_norm() / a.frobenius_norm() < 1e-13);
    }

    #[test]
    fn singular_reported() {
        let a = DenseComplexMatrix::from_fn(3, 3, |i, _| c(i as f64, 0.0));
        assert!(matches!(lu_solve(&a, &[c(1.0, 0.0); 3]), Err(HnaError::Singular(_))));
        assert_eq!(condition_number(&DenseComplexMatrix::zeros(2, 2)).unwrap(), f64::INFINITY);
        assert!(lu_solve(&DenseComplexMatrix::identity(2), &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn condition_examples() {
        assert!((condition_number(&DenseComplexMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-14);
        let mut d = DenseComplexMatrix::zeros(2, 2);
        d.set(0, 0, c(2.0, 0.0));
        d.set(1, 1, c(1.0, 0.0));
        assert!((condition_number(&d).unwrap() - 2.0).abs() < 1e-14);
        // 2-norm condition number of the 6x6 Hilbert matrix, 50-digit SVD
        let h = DenseComplexMatrix::from_fn(6, 6, |i, j| c(1.0 / (i + j + 1) as f64, 0.0));
        let kappa = condition_number(&h).unwrap();
        assert!((kappa / 14951058.640131217 - 1.0).abs() < 1e-6, "{kappa}");
    }

    #[test]
    fn condition_scale_invariant() {
        let a = random_matrix(20, 5);
        let k1 = condition_number(&a).unwrap();
        let k2 = condition_number(&a.scale(c(-3.5, 1e3))).unwrap();
        assert!((k1 / k2 - 1.0).abs() < 1e-10);
    }
}
