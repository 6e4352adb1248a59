//! Small dense matrix kit used by the per-slice solvers.
//!
//! Everything here is column-major and sized for the frontal slices the rest
//! of the crate works with; no attempt is made at blocking or SIMD.

use num_complex::Complex64;

pub type C64 = Complex64;

/// Dense complex matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r + c * self.rows]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r + c * self.rows] = v;
    }

    pub fn col(&self, c: usize) -> &[C64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [C64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            for k in 0..self.cols {
                let s = rhs.get(k, j);
                if s == C64::new(0.0, 0.0) {
                    continue;
                }
                let a = self.col(k);
                let o = out.col_mut(j);
                for r in 0..a.len() {
                    o[r] += a[r] * s;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn conj(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |r, c| self.get(r, c).conj())
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat::from_fn(self.rows, self.cols, |r, c| self.get(r, c) - rhs.get(r, c))
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat::from_fn(self.rows, self.cols, |r, c| self.get(r, c) + rhs.get(r, c))
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat::from_fn(self.rows, self.cols, |r, c| self.get(r, c) * s)
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// ‖A − Aᴴ‖_F, zero iff the matrix is exactly Hermitian.
    pub fn hermitian_residual(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut s = 0.0;
        for c in 0..self.cols {
            for r in 0..self.rows {
                let d = self.get(r, c) - self.get(c, r).conj();
                s += d.norm_sqr();
            }
        }
        s.sqrt()
    }

    /// (A + Aᴴ)/2.
    pub fn hermitize(&self) -> CMat {
        assert_eq!(self.rows, self.cols);
        CMat::from_fn(self.rows, self.cols, |r, c| {
            (self.get(r, c) + self.get(c, r).conj()) * 0.5
        })
    }

    pub fn zero_imag(&mut self) {
        for z in &mut self.data {
            z.im = 0.0;
        }
    }

    pub fn real_part(&self) -> RMat {
        RMat::from_fn(self.rows, self.cols, |r, c| self.get(r, c).re)
    }
}

/// Dense real matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r + c * self.rows]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r + c * self.rows] = v;
    }

    pub fn to_cmat(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |r, c| C64::new(self.get(r, c), 0.0))
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Lower Cholesky factor of a Hermitian positive-definite matrix.
///
/// Fails (returns `None`) when a pivot drops to `min_pivot` or below, which
/// doubles as the positive-definiteness test used across the crate.
pub fn cholesky(a: &CMat, min_pivot: f64) -> Option<CMat> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j).re;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        if !(d.is_finite()) || d <= min_pivot {
            return None;
        }
        let djj = d.sqrt();
        l.set(j, j, C64::new(djj, 0.0));
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k).conj();
            }
            l.set(i, j, s / djj);
        }
    }
    Some(l)
}

/// Solve L X = B for lower-triangular L.
pub fn solve_lower(l: &CMat, b: &CMat) -> CMat {
    let n = l.rows;
    assert_eq!(n, b.rows);
    let mut x = b.clone();
    for c in 0..b.cols {
        for i in 0..n {
            let mut s = x.get(i, c);
            for k in 0..i {
                s -= l.get(i, k) * x.get(k, c);
            }
            x.set(i, c, s / l.get(i, i));
        }
    }
    x
}

/// Solve Lᴴ X = B for lower-triangular L (so the system matrix is upper-triangular).
pub fn solve_lower_adjoint(l: &CMat, b: &CMat) -> CMat {
    let n = l.rows;
    assert_eq!(n, b.rows);
    let mut x = b.clone();
    for c in 0..b.cols {
        for i in (0..n).rev() {
            let mut s = x.get(i, c);
            for k in (i + 1)..n {
                s -= l.get(k, i).conj() * x.get(k, c);
            }
            x.set(i, c, s / l.get(i, i).conj());
        }
    }
    x
}

/// Extend a set of orthonormal columns to a full orthonormal basis of C^dim.
///
/// The given columns are re-orthonormalized first (modified Gram-Schmidt), then
/// the basis is completed greedily from canonical vectors, always taking the
/// candidate with the largest residual so the choice is deterministic.
pub fn complete_orthonormal(given: &[Vec<C64>], dim: usize) -> CMat {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for col in given {
        assert_eq!(col.len(), dim);
        let mut v = col.clone();
        project_out(&mut v, &basis);
        let n = vec_norm(&v);
        if n > 1e-12 {
            for z in &mut v {
                *z /= n;
            }
            basis.push(v);
        }
        if basis.len() == dim {
            break;
        }
    }
    while basis.len() < dim {
        let mut best: Option<(f64, usize, Vec<C64>)> = None;
        for cand in 0..dim {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[cand] = C64::new(1.0, 0.0);
            project_out(&mut v, &basis);
            let n = vec_norm(&v);
            if best.as_ref().is_none_or(|(bn, _, _)| n > *bn) {
                best = Some((n, cand, v));
            }
        }
        let (n, _, mut v) = best.expect("dim > 0");
        assert!(n > 1e-12, "cannot complete orthonormal basis");
        for z in &mut v {
            *z /= n;
        }
        basis.push(v);
    }
    let mut out = CMat::zeros(dim, dim);
    for (c, v) in basis.iter().enumerate() {
        out.col_mut(c).copy_from_slice(v);
    }
    out
}

fn project_out(v: &mut [C64], basis: &[Vec<C64>]) {
    // Two MGS passes keep the completion orthonormal to working precision.
    for _ in 0..2 {
        for b in basis {
            let mut dot = C64::new(0.0, 0.0);
            for (x, y) in b.iter().zip(v.iter()) {
                dot += x.conj() * *y;
            }
            for (x, y) in b.iter().zip(v.iter_mut()) {
                *y -= *x * dot;
            }
        }
    }
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// In-place modified Gram-Schmidt on the columns of a (tall) matrix.
pub fn mgs_orthonormalize(m: &mut CMat) {
    let cols = m.cols;
    for c in 0..cols {
        for prev in 0..c {
            let mut dot = C64::new(0.0, 0.0);
            for r in 0..m.rows {
                dot += m.get(r, prev).conj() * m.get(r, c);
            }
            for r in 0..m.rows {
                let v = m.get(r, c) - m.get(r, prev) * dot;
                m.set(r, c, v);
            }
        }
        let n = vec_norm(m.col(c));
        assert!(n > 1e-14, "rank-deficient columns in mgs_orthonormalize");
        for r in 0..m.rows {
            let v = m.get(r, c) / n;
            m.set(r, c, v);
        }
    }
}
