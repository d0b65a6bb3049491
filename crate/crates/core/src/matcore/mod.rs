//! Dense complex linear algebra for small operators.
//!
//! Everything here is sized for desk-scale experiments: matrices are dense,
//! row-major and capped at [`MAX_DIM`] rows and columns. Fractional powers go
//! through the Hermitian eigendecomposition in [`eigen`].

mod eigen;

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

pub use eigen::EigenDecomposition;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 64;

/// Numerical tolerances shared by the quantum modules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceConfig {
    /// Max-norm of `M - M^dag` accepted (and symmetrized away) for Hermitian input.
    pub herm: f64,
    /// Most negative eigenvalue accepted for a PSD operator.
    pub psd: f64,
    /// Relative eigenvalue cutoff: eigenvalues `<= support * lambda_max` are outside the support.
    pub support: f64,
    /// Absolute tolerance for probability comparisons.
    pub prob: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            psd: 1e-10,
            support: 1e-10,
            prob: 1e-9,
        }
    }
}

impl ToleranceConfig {
    /// All tolerances must be nonnegative and strictly below `1e-3`.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("herm", self.herm),
            ("psd", self.psd),
            ("support", self.support),
            ("prob", self.prob),
        ] {
            if !(0.0..1e-3).contains(&v) {
                return Err(Error::Document(format!("tolerance {name} = {v} outside [0, 1e-3)")));
            }
        }
        Ok(())
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: fmt::Debug> fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = &self[(i, j)];
                write!(f, "({:?}, {:?}) ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T> std::ops::Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::DimensionMismatch(format!("empty matrix {rows}x{cols}")));
    }
    if rows > MAX_DIM {
        return Err(Error::DimensionTooLarge(rows));
    }
    if cols > MAX_DIM {
        return Err(Error::DimensionTooLarge(cols));
    }
    Ok(())
}

impl<T: Real> ComplexMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        check_dims(rows, cols)?;
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(k / cols, k % cols));
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from a closure; dimensions are trusted (internal use and tests).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[T]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| Complex::new(x, T::zero())))
            .collect();
        Self::new(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Complex::zero())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, dim, |i, j| if i == j { Complex::one() } else { Complex::zero() })
    }

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(values[i], T::zero())
            } else {
                Complex::zero()
            }
        })
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[Complex<T>], v: &[Complex<T>]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Max-norm of `self - other`; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        if self.rows != other.rows || self.cols != other.cols {
            return T::infinity();
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()))
    }

    pub fn frobenius_distance(&self, other: &Self) -> T {
        (self - other).frobenius_norm()
    }

    /// Max-norm of `M - M^dag`.
    pub fn hermiticity_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = Complex::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc = acc + self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self * other)
    }

    /// Restrict to a subspace: `V^dag M V` for an isometry `V` (columns span the subspace).
    pub fn compress(&self, isometry: &Self) -> Self {
        &(&isometry.adjoint() * self) * isometry
    }

    /// Undo [`compress`](Self::compress): `V M V^dag`.
    pub fn expand(&self, isometry: &Self) -> Self {
        &(isometry * self) * &isometry.adjoint()
    }

    pub fn map_entries<U: Real>(&self, f: impl Fn(Complex<T>) -> Complex<U>) -> ComplexMatrix<U> {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in mul");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] = out.data[i * rhs.cols + j] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Which factor of a bipartite space an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Kronecker product; the joint index of `(i_a, i_b)` is `i_a * d_b + i_b`.
pub fn tensor_product<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (br, bc) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * br, a.cols * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

fn check_bipartite<T: Real>(m: &ComplexMatrix<T>, (da, db): (usize, usize)) -> Result<()> {
    if !m.is_square() || m.rows != da * db {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not on a {da}x{db} bipartite space",
            m.rows, m.cols
        )));
    }
    Ok(())
}

/// Partial trace over `traced`, returning the operator on the other factor.
pub fn partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    dims: (usize, usize),
    traced: Subsystem,
) -> Result<ComplexMatrix<T>> {
    check_bipartite(m, dims)?;
    let (da, db) = dims;
    Ok(match traced {
        Subsystem::B => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).fold(Complex::zero(), |acc, k| acc + m[(i * db + k, j * db + k)])
        }),
        Subsystem::A => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).fold(Complex::zero(), |acc, k| acc + m[(k * db + i, k * db + j)])
        }),
    })
}

/// Transpose of the named factor in the computational basis.
pub fn partial_transpose<T: Real>(
    m: &ComplexMatrix<T>,
    dims: (usize, usize),
    transposed: Subsystem,
) -> Result<ComplexMatrix<T>> {
    check_bipartite(m, dims)?;
    let (_, db) = dims;
    Ok(ComplexMatrix::from_fn(m.rows, m.cols, |r, c| {
        let (ia, ib) = (r / db, r % db);
        let (ja, jb) = (c / db, c % db);
        match transposed {
            Subsystem::A => m[(ja * db + ib, ia * db + jb)],
            Subsystem::B => m[(ia * db + jb, ja * db + ib)],
        }
    }))
}

/// Reorder a bipartite operator from `A (x) B` to `B (x) A`.
pub fn swap_factors<T: Real>(m: &ComplexMatrix<T>, dims: (usize, usize)) -> Result<ComplexMatrix<T>> {
    check_bipartite(m, dims)?;
    let (da, db) = dims;
    Ok(ComplexMatrix::from_fn(m.rows, m.cols, |r, c| {
        let (ib, ia) = (r / da, r % da);
        let (jb, ja) = (c / da, c % da);
        m[(ia * db + ib, ja * db + jb)]
    }))
}

/// Square Hermitian matrix, optionally certified positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    /// Accepts `m` if its Hermiticity defect is within `tol.herm`, then
    /// symmetrizes it to `(M + M^dag) / 2`.
    pub fn new(m: ComplexMatrix<T>, tol: &ToleranceConfig) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian operator must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        let defect = m.hermiticity_defect().as_f64();
        if defect > tol.herm {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::symmetrized(&m))
    }

    /// Like [`new`](Self::new) but additionally requires `lambda_min >= -tol.psd`.
    pub fn new_psd(m: ComplexMatrix<T>, tol: &ToleranceConfig) -> Result<Self> {
        let h = Self::new(m, tol)?;
        let min = h.min_eigenvalue().as_f64();
        if min < -tol.psd {
            return Err(Error::NotPsd(min));
        }
        Ok(h)
    }

    pub(crate) fn symmetrized(m: &ComplexMatrix<T>) -> Self {
        let half = T::from_f64_lossy(0.5);
        let matrix = ComplexMatrix::from_fn(m.rows, m.cols, |i, j| (m[(i, j)] + m[(j, i)].conj()) * half);
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn diag(values: &[T]) -> Self {
        Self {
            matrix: ComplexMatrix::diag(values),
        }
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &[Complex<T>]) -> Self {
        Self::symmetrized(&ComplexMatrix::outer(psi, psi))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            matrix: self.matrix.scale(s),
        }
    }

    pub fn eig(&self) -> EigenDecomposition<T> {
        eigen::jacobi(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eig().values.last().copied().unwrap_or_else(T::zero)
    }

    /// Congruence `A H A^dag`, which preserves Hermiticity.
    pub fn congruence(&self, a: &ComplexMatrix<T>) -> Self {
        Self::symmetrized(&(&(a * &self.matrix) * &a.adjoint()))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sum<'a>(dim: usize, ops: impl IntoIterator<Item = &'a Self>) -> Self
    where
        T: 'a,
    {
        ops.into_iter().fold(
            Self {
                matrix: ComplexMatrix::zeros(dim, dim),
            },
            |acc, h| acc.add(h),
        )
    }

    /// Expectation `Tr(self * other)` as a real number.
    pub fn expectation(&self, other: &Self) -> T {
        self.matrix.trace_product(&other.matrix).re
    }

    /// Orthonormal basis of the support (eigenvalues above the relative cutoff),
    /// as the columns of a `dim x rank` isometry. Full-rank operators get the identity.
    pub fn support_isometry(&self, tol: &ToleranceConfig) -> ComplexMatrix<T> {
        let eig = self.eig();
        let cut = support_cutoff(&eig.values, tol);
        let keep: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > cut).collect();
        if keep.len() == self.dim() {
            // full rank: keep the computational basis
            return ComplexMatrix::identity(self.dim());
        }
        ComplexMatrix::from_fn(self.dim(), keep.len(), |i, j| eig.vectors[(i, keep[j])])
    }

    pub fn rank(&self, tol: &ToleranceConfig) -> usize {
        let eig = self.eig();
        let cut = support_cutoff(&eig.values, tol);
        eig.values.iter().filter(|&&v| v > cut).count()
    }
}

fn support_cutoff<T: Real>(values: &[T], tol: &ToleranceConfig) -> T {
    let top = values.first().copied().unwrap_or_else(T::zero).max(T::zero());
    T::from_f64_lossy(tol.support) * top
}

/// Eigendecomposition with eigenvalues in descending order.
pub fn eig_hermitian<T: Real>(h: &HermitianOperator<T>) -> EigenDecomposition<T> {
    h.eig()
}

fn spectral_map<T: Real>(eig: &EigenDecomposition<T>, f: impl Fn(T) -> T) -> HermitianOperator<T> {
    let n = eig.values.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (k, &v) in eig.values.iter().enumerate() {
        let fv = f(v);
        if fv == T::zero() {
            continue;
        }
        for i in 0..n {
            let vi = eig.vectors[(i, k)] * fv;
            for j in 0..n {
                m[(i, j)] = m[(i, j)] + vi * eig.vectors[(j, k)].conj();
            }
        }
    }
    HermitianOperator::symmetrized(&m)
}

/// Principal square root of a PSD operator.
pub fn sqrt_psd<T: Real>(h: &HermitianOperator<T>, tol: &ToleranceConfig) -> Result<HermitianOperator<T>> {
    let eig = h.eig();
    if let Some(&min) = eig.values.last() {
        if min.as_f64() < -tol.psd {
            return Err(Error::NotPsd(min.as_f64()));
        }
    }
    let cut = support_cutoff(&eig.values, tol);
    Ok(spectral_map(&eig, |v| if v > cut { v.sqrt() } else { T::zero() }))
}

/// `h^{-1/2}` on the support of `h`, zero on its kernel.
pub fn pinv_sqrt_psd<T: Real>(h: &HermitianOperator<T>, tol: &ToleranceConfig) -> HermitianOperator<T> {
    let eig = h.eig();
    let cut = support_cutoff(&eig.values, tol);
    spectral_map(&eig, |v| if v > cut { v.sqrt().recip() } else { T::zero() })
}

/// Projector onto the support of `h`.
pub fn support_projector<T: Real>(h: &HermitianOperator<T>, tol: &ToleranceConfig) -> HermitianOperator<T> {
    let eig = h.eig();
    let cut = support_cutoff(&eig.values, tol);
    spectral_map(&eig, |v| if v > cut { T::one() } else { T::zero() })
}

/// Rank-one projector onto `cos(theta/2)|0> + sin(theta/2)|1>`.
pub fn projector_from_angle<T: Real>(theta: T) -> HermitianOperator<T> {
    let half = theta / (T::one() + T::one());
    let (s, c) = half.sin_cos();
    let cc = Complex::new(c * c, T::zero());
    let ss = Complex::new(s * s, T::zero());
    let cs = Complex::new(c * s, T::zero());
    HermitianOperator {
        matrix: ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => cc,
            (1, 1) => ss,
            _ => cs,
        }),
    }
}
