//! Small dense real/complex matrices and the real-augmentation bridge.
//!
//! Everything here is sized for the tracker: state dimension 5, measurement
//! dimension up to a few hundred. Storage is row-major.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the 1-norm condition estimate accepted by [`Matrix::invert`].
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// Element type of a [`Matrix`]: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + std::ops::Div<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RealMat = Matrix<f64>;
pub type ComplexMat = Matrix<Complex64>;
pub type RealVec = Vec<f64>;
pub type ComplexVec = Vec<Complex64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Builds a matrix from row-major data; `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "from_vec",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    op: "from_rows",
                    left: (n_rows, n_cols),
                    right: (1, row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    /// Column vector.
    pub fn column(v: &[T]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Result<T> {
        if row >= self.rows || col >= self.cols {
            return Err(self.out_of_range(row, col));
        }
        Ok(self.data[row * self.cols + col])
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) -> Result<()> {
        if row >= self.rows || col >= self.cols {
            return Err(self.out_of_range(row, col));
        }
        self.data[row * self.cols + col] = value;
        Ok(())
    }

    fn out_of_range(&self, row: usize, col: usize) -> Error {
        Error::IndexOutOfRange {
            row,
            col,
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        out
    }

    pub fn mat_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "mat_mul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == T::zero() {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    fn zip_with(&self, rhs: &Self, op: &'static str, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.modulus()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|a| a.modulus().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Inverse with the default condition cap.
    pub fn invert(&self) -> Result<Self> {
        self.invert_with_cap(DEFAULT_CONDITION_CAP)
    }

    /// Gauss-Jordan elimination with partial pivoting. The returned error
    /// carries the 1-norm condition number `‖A‖₁‖A⁻¹‖₁` (infinite when a zero
    /// pivot is met).
    pub fn invert_with_cap(&self, condition_cap: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                op: "invert",
                left: self.shape(),
                right: self.shape(),
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&i, &j| a[(i, col)].modulus().total_cmp(&a[(j, col)].modulus()))
                .unwrap_or(col);
            let pivot = a[(pivot_row, col)];
            if pivot.modulus() == 0.0 || !pivot.modulus().is_finite() {
                return Err(Error::IllConditioned {
                    condition: f64::INFINITY,
                });
            }
            if pivot_row != col {
                a.swap_rows(pivot_row, col);
                inv.swap_rows(pivot_row, col);
            }
            let inv_pivot = T::one() / pivot;
            for c in 0..n {
                a[(col, c)] = a[(col, c)] * inv_pivot;
                inv[(col, c)] = inv[(col, c)] * inv_pivot;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor == T::zero() {
                    continue;
                }
                for c in 0..n {
                    a[(r, c)] = a[(r, c)] - factor * a[(col, c)];
                    inv[(r, c)] = inv[(r, c)] - factor * inv[(col, c)];
                }
            }
        }
        let condition = self.norm_1() * inv.norm_1();
        if !condition.is_finite() || condition > condition_cap {
            return Err(Error::IllConditioned { condition });
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl RealMat {
    /// Returns `(A + Aᵀ)/2`.
    pub fn symmetrize(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                op: "symmetrize",
                left: self.shape(),
                right: self.shape(),
            });
        }
        let n = self.rows;
        let mut out = self.clone();
        for r in 0..n {
            for c in (r + 1)..n {
                let avg = 0.5 * (self[(r, c)] + self[(c, r)]);
                out[(r, c)] = avg;
                out[(c, r)] = avg;
            }
        }
        Ok(out)
    }

    /// `max|A − Aᵀ| ≤ rel_tol · max|A|`.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.max_abs();
        let n = self.rows;
        (0..n).all(|r| (0..n).all(|c| (self[(r, c)] - self[(c, r)]).abs() <= rel_tol * scale))
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Lower Cholesky factor, or `None` if a non-positive pivot appears.
    pub fn cholesky(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut diag = self[(j, j)];
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if !(diag > 0.0) {
                return None;
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Some(l)
    }

    /// True when the smallest eigenvalue is at least `-floor`, checked by
    /// factoring `A + (floor + tiny)·I`. The matrix is symmetrized first.
    pub fn is_psd_with_floor(&self, floor: f64) -> bool {
        let Ok(sym) = self.symmetrize() else {
            return false;
        };
        let shift = floor.max(0.0) + f64::EPSILON * sym.max_abs().max(f64::MIN_POSITIVE);
        let mut shifted = sym;
        for i in 0..shifted.rows {
            shifted[(i, i)] += shift;
        }
        shifted.cholesky().is_some()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        &mut self.data[r * self.cols + c]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

/// Interleaved real augmentation: `[Re z₁, Im z₁, Re z₂, Im z₂, …]`.
pub fn real_augment_vec(z: &[Complex64]) -> RealVec {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

/// Inverse of [`real_augment_vec`]; the input length must be even.
pub fn complex_from_augmented(x: &[f64]) -> Result<ComplexVec> {
    if !x.len().is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "augmented vector has odd length {}",
            x.len()
        )));
    }
    Ok(x.chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect())
}

/// `aᴴ b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm2(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_product_is_noop() {
        let a = RealMat::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![4.0, 5.0, 6.0],
            vec![7.0, 8.0, 10.0],
        ])
        .unwrap();
        assert_eq!(RealMat::identity(3).mat_mul(&a).unwrap(), a);
    }

    #[test]
    fn permutation_swaps_entries() {
        let p = ComplexMat::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]])
            .unwrap();
        let v = ComplexMat::column(&[c(1.0, 2.0), c(-3.0, 0.5)]);
        let out = p.mat_mul(&v).unwrap();
        assert_eq!(out.as_slice(), &[c(-3.0, 0.5), c(1.0, 2.0)]);
    }

    #[test]
    fn mismatch_names_both_shapes() {
        let a = RealMat::zeros(2, 3);
        let b = RealMat::zeros(2, 3);
        let err = a.mat_mul(&b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(2, 3)"), "{msg}");
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                left: (2, 3),
                right: (2, 3),
                ..
            }
        ));
    }

    #[test]
    fn out_of_range_access_is_an_error() {
        let a = RealMat::zeros(2, 2);
        assert!(matches!(a.get(2, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(a.get(1, 1).is_ok());
    }

    #[test]
    fn diagonal_inverse() {
        let a = RealMat::from_diag(&[2.0, 4.0]);
        assert_eq!(a.invert().unwrap(), RealMat::from_diag(&[0.5, 0.25]));
        assert_eq!(RealMat::identity(5).invert().unwrap(), RealMat::identity(5));
    }

    #[test]
    fn singular_matrix_reports_condition() {
        let a = RealMat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        match a.invert() {
            Err(Error::IllConditioned { condition }) => assert!(condition > 1e12),
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
        let near = RealMat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]]).unwrap();
        assert!(matches!(near.invert(), Err(Error::IllConditioned { .. })));
    }

    fn lcg_matrix(n: usize, seed: u64) -> RealMat {
        let mut s = seed;
        let data = (0..n * n)
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        RealMat::from_vec(n, n, data).unwrap()
    }

    #[test]
    fn spd_inverse_residual() {
        let b = lcg_matrix(6, 7);
        let spd = b
            .mat_mul(&b.transpose())
            .unwrap()
            .add(&RealMat::identity(6))
            .unwrap();
        let inv = spd.invert().unwrap();
        let residual = spd
            .mat_mul(&inv)
            .unwrap()
            .sub(&RealMat::identity(6))
            .unwrap();
        assert!(residual.max_abs() <= 1e-9, "{}", residual.max_abs());
        let back = inv.invert().unwrap();
        let err = back.sub(&spd).unwrap().max_abs() / spd.max_abs();
        assert!(err <= 1e-8);
    }

    #[test]
    fn complex_inverse_residual() {
        let re = lcg_matrix(4, 1);
        let im = lcg_matrix(4, 2);
        let data = re
            .as_slice()
            .iter()
            .zip(im.as_slice())
            .map(|(&r, &i)| c(r, i))
            .collect();
        let a = ComplexMat::from_vec(4, 4, data)
            .unwrap()
            .add(&ComplexMat::identity(4).scale(c(2.0, 0.0)))
            .unwrap();
        let inv = a.invert().unwrap();
        let residual = a
            .mat_mul(&inv)
            .unwrap()
            .sub(&ComplexMat::identity(4))
            .unwrap();
        assert!(residual.max_abs() <= 1e-12);
    }

    #[test]
    fn augmentation_layout() {
        assert_eq!(real_augment_vec(&[c(1.0, 2.0)]), vec![1.0, 2.0]);
        assert_eq!(
            real_augment_vec(&[c(0.0, 1.0), c(0.0, -1.0)]),
            vec![0.0, 1.0, 0.0, -1.0]
        );
        assert!(complex_from_augmented(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn symmetrize_examples() {
        let a = RealMat::from_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let s = a.symmetrize().unwrap();
        assert_eq!(
            s,
            RealMat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
        );
        let sym = RealMat::from_rows(&[vec![3.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        assert_eq!(sym.symmetrize().unwrap(), sym);
    }

    #[test]
    fn psd_floor() {
        assert!(RealMat::from_diag(&[1.0, 0.0, 2.0]).is_psd_with_floor(0.0));
        assert!(!RealMat::from_diag(&[1.0, -1e-3]).is_psd_with_floor(1e-6));
        assert!(RealMat::from_diag(&[1.0, -1e-9]).is_psd_with_floor(1e-6));
    }

    fn complex_matrix(n: usize, m: usize) -> impl Strategy<Value = ComplexMat> {
        prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), n * m).prop_map(move |v| {
            ComplexMat::from_vec(n, m, v.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn hermitian_of_product((a, b) in (complex_matrix(4, 4), complex_matrix(4, 4))) {
            let lhs = a.mat_mul(&b).unwrap().hermitian();
            let rhs = b.hermitian().mat_mul(&a.hermitian()).unwrap();
            // Elementwise oracle on (AB)ᴴ built from explicit sums.
            for i in 0..4 {
                for j in 0..4 {
                    let mut direct = c(0.0, 0.0);
                    for k in 0..4 {
                        direct += a[(j, k)] * b[(k, i)];
                    }
                    let direct = direct.conj();
                    let scale = direct.norm().max(1.0);
                    prop_assert!((lhs[(i, j)] - direct).norm() <= 1e-12 * scale);
                    prop_assert!((rhs[(i, j)] - direct).norm() <= 1e-12 * scale);
                }
            }
        }

        #[test]
        fn hermitian_is_involution(a in complex_matrix(3, 5)) {
            prop_assert_eq!(a.hermitian().hermitian(), a);
        }

        #[test]
        fn augmentation_round_trip_and_norm(v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..32)) {
            let z: Vec<Complex64> = v.into_iter().map(|(r, i)| c(r, i)).collect();
            let aug = real_augment_vec(&z);
            prop_assert_eq!(aug.len(), 2 * z.len());
            prop_assert_eq!(complex_from_augmented(&aug).unwrap(), z.clone());
            let n_aug = aug.iter().map(|x| x * x).sum::<f64>().sqrt();
            let n_z = norm2(&z);
            prop_assert!((n_aug - n_z).abs() <= 1e-12 * n_z.max(1e-300));
        }

        #[test]
        fn symmetrized_passes_flag(v in prop::collection::vec(-1e3f64..1e3, 16)) {
            let a = RealMat::from_vec(4, 4, v).unwrap();
            prop_assert!(a.symmetrize().unwrap().is_symmetric(1e-12));
        }
    }
}
