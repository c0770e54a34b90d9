//! Dense complex linear algebra over BLAS/LAPACK.
//!
//! [`CMatrix`] is a column-major `Vec<Complex64>` buffer sized for direct
//! hand-off to Fortran-convention routines: products go through `zgemm` and
//! Hermitian eigendecompositions through `zheevd` (the divide-and-conquer
//! driver, which is several times faster than the QR driver at the register
//! sizes used for exact references here).
//!
//! The module also hosts the dense realisations of Pauli objects used by
//! oracle tests and exact-reference calculations, plus a scaling-and-squaring
//! Taylor exponential that is deliberately independent of the
//! eigendecomposition route so the two can cross-check each other.
//!
//! Qubit convention throughout the crate: qubit `q` is bit `q` of the basis
//! index (qubit 0 is the least significant bit). Consequently
//! [`kron`]`(a, b)` places `b` on the low-order qubits.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

/// Largest register for which dense `2^n × 2^n` matrices may be built.
/// At 14 qubits one matrix is already 4 GiB; beyond that dense methods are
/// refused rather than left to the out-of-memory killer.
pub const DENSE_QUBIT_LIMIT: usize = 14;

/// Dense complex matrix, column-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CMatrix {
            n_rows,
            n_cols,
            data: vec![Complex64::new(0.0, 0.0); n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(
        n_rows: usize,
        n_cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut m = CMatrix::zeros(n_rows, n_cols);
        for c in 0..n_cols {
            for r in 0..n_rows {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        debug_assert!(r < self.n_rows && c < self.n_cols);
        self.data[r + c * self.n_rows]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        debug_assert!(r < self.n_rows && c < self.n_cols);
        self.data[r + c * self.n_rows] = v;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: Complex64) {
        debug_assert!(r < self.n_rows && c < self.n_cols);
        self.data[r + c * self.n_rows] += v;
    }

    /// Raw column-major buffer.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// One column as a contiguous slice.
    pub fn column(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.n_rows..(c + 1) * self.n_rows]
    }

    /// One column as a mutable contiguous slice, for in-place kernels that
    /// treat each column as a state vector.
    pub fn column_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c * self.n_rows..(c + 1) * self.n_rows]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.n_cols, self.n_rows);
        for c in 0..self.n_cols {
            for r in 0..self.n_rows {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, k: Complex64) -> CMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= k;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.n_rows.min(self.n_cols);
        (0..n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        debug_assert_eq!(self.n_rows, other.n_rows);
        debug_assert_eq!(self.n_cols, other.n_cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_same_shape(&self, other: &CMatrix) -> Result<()> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::InvalidArgument(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        Ok(())
    }

    /// Matrix product via `zgemm`.
    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::InvalidArgument(format!(
                "product shape mismatch: {}x{} · {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut out = CMatrix::zeros(self.n_rows, other.n_cols);
        let (m, n, k) = (
            self.n_rows as i32,
            other.n_cols as i32,
            self.n_cols as i32,
        );
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        // Complex64 is repr(C) { re: f64, im: f64 }, layout-identical to the
        // [f64; 2] CBLAS expects.
        unsafe {
            cblas_sys::cblas_zgemm(
                cblas_sys::CBLAS_LAYOUT::CblasColMajor,
                cblas_sys::CBLAS_TRANSPOSE::CblasNoTrans,
                cblas_sys::CBLAS_TRANSPOSE::CblasNoTrans,
                m,
                n,
                k,
                &one as *const Complex64 as *const _,
                self.data.as_ptr() as *const _,
                m,
                other.data.as_ptr() as *const _,
                k,
                &zero as *const Complex64 as *const _,
                out.data.as_mut_ptr() as *mut _,
                m,
            );
        }
        Ok(out)
    }

    /// Matrix–vector product.
    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.n_cols != v.len() {
            return Err(Error::InvalidArgument(format!(
                "matrix-vector shape mismatch: {}x{} · {}",
                self.n_rows,
                self.n_cols,
                v.len()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_rows];
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        unsafe {
            cblas_sys::cblas_zgemv(
                cblas_sys::CBLAS_LAYOUT::CblasColMajor,
                cblas_sys::CBLAS_TRANSPOSE::CblasNoTrans,
                self.n_rows as i32,
                self.n_cols as i32,
                &one as *const Complex64 as *const _,
                self.data.as_ptr() as *const _,
                self.n_rows as i32,
                v.as_ptr() as *const _,
                1,
                &zero as *const Complex64 as *const _,
                out.as_mut_ptr() as *mut _,
                1,
            );
        }
        Ok(out)
    }

    /// `self^k` by binary exponentiation (square matrices only).
    pub fn pow(&self, mut k: u64) -> Result<CMatrix> {
        if self.n_rows != self.n_cols {
            return Err(Error::InvalidArgument(
                "matrix power requires a square matrix".into(),
            ));
        }
        let mut result = CMatrix::identity(self.n_rows);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.matmul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.matmul(&base)?;
            }
        }
        Ok(result)
    }

    /// Eigendecomposition of a Hermitian matrix via `zheevd`.
    ///
    /// Returns eigenvalues in ascending order and the unitary of column
    /// eigenvectors. The input is checked for Hermiticity to `1e-10` on the
    /// largest asymmetry, since a silently non-Hermitian input would produce
    /// garbage rather than an error.
    pub fn eigh(&self) -> Result<(Vec<f64>, CMatrix)> {
        if self.n_rows != self.n_cols {
            return Err(Error::InvalidArgument(
                "eigendecomposition requires a square matrix".into(),
            ));
        }
        let n = self.n_rows;
        if n == 0 {
            return Ok((Vec::new(), CMatrix::zeros(0, 0)));
        }
        let mut max_asym: f64 = 0.0;
        for c in 0..n {
            for r in 0..=c {
                let asym = (self.get(r, c) - self.get(c, r).conj()).norm();
                max_asym = max_asym.max(asym);
            }
        }
        if max_asym > 1e-10 {
            return Err(Error::Linalg(format!(
                "matrix is not Hermitian (max asymmetry {max_asym:.3e})"
            )));
        }

        let mut a = self.data.clone();
        let mut w = vec![0.0f64; n];
        let n_i = n as i32;
        let jobz = b'V' as std::os::raw::c_char;
        let uplo = b'L' as std::os::raw::c_char;
        let mut info = 0i32;

        // Workspace query: lwork = lrwork = liwork = -1 returns optimal
        // sizes in the first element of each buffer.
        let mut work_q = [Complex64::new(0.0, 0.0)];
        let mut rwork_q = [0.0f64];
        let mut iwork_q = [0i32];
        let minus_one = -1i32;
        unsafe {
            lapack_sys::zheevd_(
                &jobz,
                &uplo,
                &n_i,
                a.as_mut_ptr() as *mut _,
                &n_i,
                w.as_mut_ptr(),
                work_q.as_mut_ptr() as *mut _,
                &minus_one,
                rwork_q.as_mut_ptr(),
                &minus_one,
                iwork_q.as_mut_ptr(),
                &minus_one,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Linalg(format!(
                "eigensolver workspace query failed (info = {info})"
            )));
        }
        let lwork = work_q[0].re as i32;
        let lrwork = rwork_q[0] as i32;
        let liwork = iwork_q[0];
        let mut work = vec![Complex64::new(0.0, 0.0); lwork.max(1) as usize];
        let mut rwork = vec![0.0f64; lrwork.max(1) as usize];
        let mut iwork = vec![0i32; liwork.max(1) as usize];
        unsafe {
            lapack_sys::zheevd_(
                &jobz,
                &uplo,
                &n_i,
                a.as_mut_ptr() as *mut _,
                &n_i,
                w.as_mut_ptr(),
                work.as_mut_ptr() as *mut _,
                &lwork,
                rwork.as_mut_ptr(),
                &lrwork,
                iwork.as_mut_ptr(),
                &liwork,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Linalg(format!(
                "eigensolver failed to converge (info = {info})"
            )));
        }
        Ok((
            w,
            CMatrix {
                n_rows: n,
                n_cols: n,
                data: a,
            },
        ))
    }

    /// `exp(scalar · H)` for Hermitian `H` via eigendecomposition:
    /// `V · diag(exp(scalar · λ)) · V†`.
    pub fn expm_hermitian(&self, scalar: Complex64) -> Result<CMatrix> {
        let (w, v) = self.eigh()?;
        let n = self.n_rows;
        // Scale columns of V by exp(scalar·λ), then multiply by V†.
        let mut scaled = v.clone();
        for (c, &lambda) in w.iter().enumerate() {
            let f = (scalar * lambda).exp();
            for r in 0..n {
                let val = scaled.get(r, c) * f;
                scaled.set(r, c, val);
            }
        }
        scaled.matmul(&v.dagger())
    }

    /// Largest singular value. For Hermitian input this equals the largest
    /// absolute eigenvalue; in general it is `sqrt(λ_max(A†A))`.
    pub fn spectral_norm(&self) -> Result<f64> {
        let gram = self.dagger().matmul(self)?;
        let (w, _) = gram.eigh()?;
        let lam = w.last().copied().unwrap_or(0.0).max(0.0);
        Ok(lam.sqrt())
    }
}

/// Kronecker product; `b` occupies the low-order indices
/// (`out[ia·db + ib, ja·db + jb] = a[ia, ja] · b[ib, jb]`).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = (a.n_rows(), a.n_cols());
    let (br, bc) = (b.n_rows(), b.n_cols());
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for ja in 0..ac {
        for ia in 0..ar {
            let f = a.get(ia, ja);
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for jb in 0..bc {
                for ib in 0..br {
                    out.set(ia * br + ib, ja * bc + jb, f * b.get(ib, jb));
                }
            }
        }
    }
    out
}

/// Taylor exponential with scaling and squaring.
///
/// Independent of [`CMatrix::expm_hermitian`] (no eigendecomposition), so
/// the two serve as mutual cross-checks; works for any square matrix.
pub fn expm_series(a: &CMatrix) -> Result<CMatrix> {
    if a.n_rows != a.n_cols {
        return Err(Error::InvalidArgument(
            "matrix exponential requires a square matrix".into(),
        ));
    }
    let n = a.n_rows;
    let norm = a.frobenius_norm();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale(Complex64::new(0.5f64.powi(s as i32), 0.0));

    let mut result = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    const MAX_TERMS: usize = 64;
    for k in 1..=MAX_TERMS {
        term = term.matmul(&scaled)?.scale(Complex64::new(1.0 / k as f64, 0.0));
        result = result.add(&term)?;
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = result.matmul(&result)?;
    }
    Ok(result)
}

fn check_dense_limit(n_qubits: usize) -> Result<usize> {
    if n_qubits > DENSE_QUBIT_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "dense matrix construction requested for {n_qubits} qubits; \
             the dense-method limit is {DENSE_QUBIT_LIMIT} qubits"
        )));
    }
    Ok(1usize << n_qubits)
}

/// Dense matrix of a single Pauli string on an `n_qubits` register.
///
/// Column `j` holds one nonzero: the string maps `|j⟩` to
/// `i^{#Y} (−1)^{popcount(j ∧ z)} |j ⊕ x⟩`.
pub fn dense_pauli_string(n_qubits: usize, s: &PauliString) -> Result<CMatrix> {
    let dim = check_dense_limit(n_qubits)?;
    if s.min_qubits() > n_qubits {
        return Err(Error::InvalidArgument(format!(
            "string {s} does not fit in {n_qubits} qubits"
        )));
    }
    let x = s.x_mask();
    let z = s.z_mask();
    let y_count = (x & z).count_ones();
    let base_phase = Complex64::i().powu(y_count);
    let mut m = CMatrix::zeros(dim, dim);
    for j in 0..dim as u64 {
        let sign = if ((j & z).count_ones()) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        m.set((j ^ x) as usize, j as usize, base_phase * sign);
    }
    Ok(m)
}

/// Dense matrix of a real-coefficient Pauli sum.
pub fn dense_pauli_sum(n_qubits: usize, sum: &PauliSum) -> Result<CMatrix> {
    let terms: Vec<(PauliString, Complex64)> = sum
        .terms()
        .iter()
        .map(|&(s, c)| (s, Complex64::new(c, 0.0)))
        .collect();
    dense_pauli_terms(n_qubits, &terms)
}

/// Dense matrix of a complex-coefficient Pauli term list (as produced by
/// symbolic products and commutators).
pub fn dense_pauli_terms(
    n_qubits: usize,
    terms: &[(PauliString, Complex64)],
) -> Result<CMatrix> {
    let dim = check_dense_limit(n_qubits)?;
    let mut m = CMatrix::zeros(dim, dim);
    for &(s, c) in terms {
        if s.min_qubits() > n_qubits {
            return Err(Error::InvalidArgument(format!(
                "string {s} does not fit in {n_qubits} qubits"
            )));
        }
        let x = s.x_mask();
        let z = s.z_mask();
        let base_phase = Complex64::i().powu((x & z).count_ones()) * c;
        for j in 0..dim as u64 {
            let sign = if ((j & z).count_ones()) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            m.add_at((j ^ x) as usize, j as usize, base_phase * sign);
        }
    }
    Ok(m)
}
