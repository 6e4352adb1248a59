//! Third-order tensor storage and the t-product algebra.
//!
//! A [`Tensor3`] is a real m × n × p array. Fixing the third index gives a
//! frontal slice (an m × n matrix), fixing the second gives a lateral slice
//! (an m × 1 × p block, the natural "sample" shape), and fixing the first two
//! gives a tube of length p. The t-product multiplies tensors through the
//! block-circulant matrix built from frontal slices, which the DFT along the
//! third mode turns into p independent matrix products — so every operation
//! here works slice by slice in the Fourier domain.
//!
//! DFT convention: the forward transform is unnormalized and the inverse
//! carries the 1/p factor, matching MATLAB's `fft`/`ifft`. For real input the
//! Fourier slices are conjugate even: slice 1 is real and slice i pairs with
//! slice p − i + 2.

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::linalg::{cholesky, CMat, RMat};

pub type C64 = Complex64;

/// Default relative tolerance for residual checks.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("frontal slices are not square ({m}x{n})")]
    NotSquare { m: usize, n: usize },
    #[error("conjugate symmetry violated at frontal slice {slice} (residual {residual:.3e}, tol {tol:.3e})")]
    ConjugateSymmetryViolation {
        slice: usize,
        residual: f64,
        tol: f64,
    },
    #[error("non-finite value at ({i}, {j}, {k})")]
    NonFinite { i: usize, j: usize, k: usize },
}

/// Real third-order tensor. Values are stored frontal-slice-major and
/// column-major within each slice: (i, j, k) lives at k·m·n + j·m + i.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    m: usize,
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(m: usize, n: usize, p: usize) -> Self {
        assert!(
            m > 0 && n > 0 && p > 0,
            "tensor dimensions must be positive"
        );
        Self {
            m,
            n,
            p,
            data: vec![0.0; m * n * p],
        }
    }

    /// Build from values laid out in storage order. Rejects non-finite entries.
    pub fn from_vec(m: usize, n: usize, p: usize, data: Vec<f64>) -> Result<Self, TensorError> {
        assert!(
            m > 0 && n > 0 && p > 0,
            "tensor dimensions must be positive"
        );
        assert_eq!(data.len(), m * n * p, "storage length mismatch");
        for (t, v) in data.iter().enumerate() {
            if !v.is_finite() {
                let i = t % m;
                let j = (t / m) % n;
                let k = t / (m * n);
                return Err(TensorError::NonFinite { i, j, k });
            }
        }
        Ok(Self { m, n, p, data })
    }

    pub fn from_fn(
        m: usize,
        n: usize,
        p: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut t = Self::zeros(m, n, p);
        for k in 0..p {
            for j in 0..n {
                for i in 0..m {
                    t.set(i, j, k, f(i, j, k));
                }
            }
        }
        t
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.m, self.n, self.p)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.m && j < self.n && k < self.p);
        k * self.m * self.n + j * self.m + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let t = self.idx(i, j, k);
        self.data[t] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// The m × n matrix at third index `k`.
    pub fn frontal_slice(&self, k: usize) -> RMat {
        RMat::from_fn(self.m, self.n, |r, c| self.get(r, c, k))
    }

    /// The m × p matrix holding sample `j` (its lateral slice).
    pub fn lateral_slice(&self, j: usize) -> RMat {
        RMat::from_fn(self.m, self.p, |r, k| self.get(r, j, k))
    }

    /// Samples as columns: column j is the lateral slice of sample j,
    /// flattened k-major to length m·p.
    pub fn lateral_columns(&self) -> CMat {
        CMat::from_fn(self.m * self.p, self.n, |r, j| {
            let k = r / self.m;
            let i = r % self.m;
            C64::new(self.get(i, j, k), 0.0)
        })
    }

    pub fn tube(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.p).map(|k| self.get(i, j, k)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn from_frontal_slices(slices: &[RMat]) -> Self {
        assert!(!slices.is_empty());
        let (m, n) = (slices[0].rows(), slices[0].cols());
        Tensor3::from_fn(m, n, slices.len(), |i, j, k| slices[k].get(i, j))
    }
}

/// Complex third-order tensor, same layout as [`Tensor3`]. The origin flag
/// records that the values came from the forward DFT of a real tensor, in
/// which case the frontal slices are conjugate even.
#[derive(Debug, Clone, PartialEq)]
pub struct CTensor3 {
    m: usize,
    n: usize,
    p: usize,
    data: Vec<C64>,
    fourier_origin: bool,
}

impl CTensor3 {
    pub fn zeros(m: usize, n: usize, p: usize) -> Self {
        assert!(m > 0 && n > 0 && p > 0);
        Self {
            m,
            n,
            p,
            data: vec![C64::new(0.0, 0.0); m * n * p],
            fourier_origin: false,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.m, self.n, self.p)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn fourier_origin(&self) -> bool {
        self.fourier_origin
    }

    pub fn set_fourier_origin(&mut self, v: bool) {
        self.fourier_origin = v;
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.m && j < self.n && k < self.p);
        k * self.m * self.n + j * self.m + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.data[self.idx(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: C64) {
        let t = self.idx(i, j, k);
        self.data[t] = v;
    }

    pub fn frontal_slice(&self, k: usize) -> CMat {
        CMat::from_fn(self.m, self.n, |r, c| self.get(r, c, k))
    }

    pub fn set_frontal_slice(&mut self, k: usize, s: &CMat) {
        assert_eq!((s.rows(), s.cols()), (self.m, self.n));
        for c in 0..self.n {
            for r in 0..self.m {
                self.set(r, c, k, s.get(r, c));
            }
        }
    }

    /// Columns of frontal slice `k` as an m × n complex matrix (identity view,
    /// provided for symmetry with `Tensor3::lateral_columns`).
    pub fn from_frontal_slices(slices: &[CMat], fourier_origin: bool) -> Self {
        assert!(!slices.is_empty());
        let (m, n) = (slices[0].rows(), slices[0].cols());
        let mut t = CTensor3::zeros(m, n, slices.len());
        for (k, s) in slices.iter().enumerate() {
            assert_eq!(
                (s.rows(), s.cols()),
                (m, n),
                "inconsistent slice dimensions"
            );
            t.set_frontal_slice(k, s);
        }
        t.fourier_origin = fourier_origin;
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Length-p tube of complex scalars, the scalars of the t-product algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct Tube {
    values: Vec<C64>,
}

impl Tube {
    pub fn new(values: Vec<C64>) -> Self {
        assert!(!values.is_empty());
        assert!(values.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn get(&self, k: usize) -> C64 {
        self.values[k]
    }

    /// Sum of entry magnitudes; for a real nonnegative eigentube this is the
    /// eigenvalue sum that appears in the trace formulas.
    pub fn one_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum()
    }
}

/// Number of Fourier slices that determine the rest by conjugate symmetry:
/// ⌈(p+1)/2⌉, so slices `half..p` mirror slices `1..=p-half`.
pub fn half_slice_count(p: usize) -> usize {
    p / 2 + 1
}

/// True for slices that are their own conjugate mirror (slice 1, and slice
/// p/2 + 1 when p is even); those must be real for a real inverse transform.
pub fn is_self_mirror(k: usize, p: usize) -> bool {
    k == 0 || (p.is_multiple_of(2) && k == p / 2)
}

/// Forward DFT along the third mode (unnormalized, MATLAB `fft` convention).
pub fn fft3(x: &Tensor3) -> CTensor3 {
    let (m, n, p) = x.dims();
    let mut out = CTensor3::zeros(m, n, p);
    if p == 1 {
        for t in 0..m * n {
            out.data[t] = C64::new(x.data[t], 0.0);
        }
        out.fourier_origin = true;
        return out;
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(p);
    // Gather tubes contiguously, one batched FFT call, scatter back.
    let mut buf = vec![C64::new(0.0, 0.0); m * n * p];
    for j in 0..n {
        for i in 0..m {
            let base = (j * m + i) * p;
            for k in 0..p {
                buf[base + k] = C64::new(x.get(i, j, k), 0.0);
            }
        }
    }
    fft.process(&mut buf);
    for j in 0..n {
        for i in 0..m {
            let base = (j * m + i) * p;
            for k in 0..p {
                out.set(i, j, k, buf[base + k]);
            }
        }
    }
    out.fourier_origin = true;
    out
}

fn conjugate_symmetry_check(xh: &CTensor3, tol: f64) -> Result<(), TensorError> {
    let p = xh.p();
    let scale = xh.max_abs().max(1.0);
    for k in 0..half_slice_count(p) {
        let residual = if is_self_mirror(k, p) {
            let s = xh.frontal_slice(k);
            s.max_abs_imag()
        } else {
            let a = xh.frontal_slice(k);
            let b = xh.frontal_slice(p - k);
            a.conj().sub(&b).max_abs()
        };
        if residual > tol * scale {
            return Err(TensorError::ConjugateSymmetryViolation {
                slice: k + 1,
                residual,
                tol: tol * scale,
            });
        }
    }
    Ok(())
}

/// Inverse DFT along the third mode (scaled by 1/p, MATLAB `ifft` convention).
///
/// The frontal slices must be conjugate even within [`DEFAULT_TOL`] relative,
/// otherwise the inverse would not be real and the caller has assembled the
/// Fourier slices inconsistently.
pub fn ifft3(xh: &CTensor3) -> Result<Tensor3, TensorError> {
    ifft3_with_residue(xh).map(|(t, _)| t)
}

/// Like [`ifft3`] but also reports the largest imaginary residue (relative to
/// the largest output magnitude) that was discarded.
pub fn ifft3_with_residue(xh: &CTensor3) -> Result<(Tensor3, f64), TensorError> {
    conjugate_symmetry_check(xh, DEFAULT_TOL)?;
    let (m, n, p) = xh.dims();
    let mut buf = vec![C64::new(0.0, 0.0); m * n * p];
    for j in 0..n {
        for i in 0..m {
            let base = (j * m + i) * p;
            for k in 0..p {
                buf[base + k] = xh.get(i, j, k);
            }
        }
    }
    if p > 1 {
        let mut planner = FftPlanner::new();
        let ifft = planner.plan_fft_inverse(p);
        ifft.process(&mut buf);
    }
    let scale = 1.0 / p as f64;
    let mut out = Tensor3::zeros(m, n, p);
    let mut max_re: f64 = 0.0;
    let mut max_im: f64 = 0.0;
    for j in 0..n {
        for i in 0..m {
            let base = (j * m + i) * p;
            for k in 0..p {
                let z = buf[base + k] * scale;
                max_re = max_re.max(z.re.abs());
                max_im = max_im.max(z.im.abs());
                out.set(i, j, k, z.re);
            }
        }
    }
    Ok((out, max_im / max_re.max(1.0)))
}

/// Block-circulant matrix of the frontal slices: block (r, c) is slice
/// 1 + ((r − c) mod p), an mp × np real matrix.
pub fn bcirc(a: &Tensor3) -> RMat {
    let (m, n, p) = a.dims();
    RMat::from_fn(m * p, n * p, |r, c| {
        let br = r / m;
        let bc = c / n;
        let k = (br + p - bc) % p;
        a.get(r % m, c % n, k)
    })
}

/// t-product: face-wise products of the Fourier slices, transformed back.
pub fn tprod(a: &Tensor3, b: &Tensor3) -> Result<Tensor3, TensorError> {
    tprod_with_residue(a, b).map(|(t, _)| t)
}

pub fn tprod_with_residue(a: &Tensor3, b: &Tensor3) -> Result<(Tensor3, f64), TensorError> {
    let (m, l, pa) = a.dims();
    let (lb, n, pb) = b.dims();
    if l != lb || pa != pb {
        return Err(TensorError::DimensionMismatch {
            context: format!("t-product of {m}x{l}x{pa} with {lb}x{n}x{pb}"),
        });
    }
    let ah = fft3(a);
    let bh = fft3(b);
    let mut ch = CTensor3::zeros(m, n, pa);
    // The product spectrum inherits conjugate symmetry, so only the leading
    // slices need computing; the rest are mirrored.
    let half = half_slice_count(pa);
    for k in 0..half {
        let prod = ah.frontal_slice(k).mul(&bh.frontal_slice(k));
        ch.set_frontal_slice(k, &prod);
    }
    for k in half..pa {
        let src = ch.frontal_slice(pa - k).conj();
        ch.set_frontal_slice(k, &src);
    }
    ch.fourier_origin = true;
    ifft3_with_residue(&ch)
}

/// t-transpose: transpose each frontal slice and reverse the order of slices
/// 2..p. In the Fourier domain this is the slice-wise conjugate transpose.
pub fn ttranspose(a: &Tensor3) -> Tensor3 {
    let (m, n, p) = a.dims();
    Tensor3::from_fn(n, m, p, |i, j, k| {
        let src = if k == 0 { 0 } else { p - k };
        a.get(j, i, src)
    })
}

/// Identity tensor: first frontal slice I_m, all other slices zero.
pub fn identity(m: usize, p: usize) -> Tensor3 {
    let mut t = Tensor3::zeros(m, m, p);
    for i in 0..m {
        t.set(i, i, 0, 1.0);
    }
    t
}

pub fn frob_inner(a: &Tensor3, b: &Tensor3) -> Result<f64, TensorError> {
    if a.dims() != b.dims() {
        return Err(TensorError::DimensionMismatch {
            context: format!("inner product of {:?} with {:?}", a.dims(), b.dims()),
        });
    }
    Ok(a.data.iter().zip(b.data.iter()).map(|(x, y)| x * y).sum())
}

pub fn frob_norm(a: &Tensor3) -> f64 {
    a.data.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Frontal trace: the average of the traces of the Fourier slices.
pub fn trace_f(a: &Tensor3) -> Result<f64, TensorError> {
    let (m, n, p) = a.dims();
    if m != n {
        return Err(TensorError::NotSquare { m, n });
    }
    let ah = fft3(a);
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..p {
        for i in 0..m {
            sum += ah.get(i, i, k);
        }
    }
    let val = sum / p as f64;
    debug_assert!(val.im.abs() <= DEFAULT_TOL * val.re.abs().max(1.0));
    Ok(val.re)
}

/// f-symmetry test: every Fourier slice is Hermitian within `tol` relative.
///
/// For a real tensor the t-transpose maps to the slice-wise conjugate
/// transpose, so Gram tensors X * Xᵀ have Hermitian (not real-symmetric)
/// Fourier slices; "symmetric" is therefore tested as Hermitian.
pub fn check_f_symmetric(a: &Tensor3, tol: f64) -> Result<bool, TensorError> {
    let (m, n, p) = a.dims();
    if m != n {
        return Err(TensorError::NotSquare { m, n });
    }
    let ah = fft3(a);
    for k in 0..half_slice_count(p) {
        let s = ah.frontal_slice(k);
        if s.hermitian_residual() > tol * s.frob_norm().max(1e-300) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// f-positive-semidefiniteness: f-symmetric and every Fourier slice has
/// minimum eigenvalue ≥ −tol (relative), probed by a shifted Cholesky.
pub fn check_f_psd(a: &Tensor3, tol: f64) -> Result<bool, TensorError> {
    if !check_f_symmetric(a, tol)? {
        return Ok(false);
    }
    let ah = fft3(a);
    let p = a.p();
    for k in 0..half_slice_count(p) {
        let s = ah.frontal_slice(k).hermitize();
        let shift = tol * s.frob_norm().max(1.0);
        let shifted = s.add(&CMat::identity(s.rows()).scale(C64::new(shift, 0.0)));
        if cholesky(&shifted, 0.0).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}
