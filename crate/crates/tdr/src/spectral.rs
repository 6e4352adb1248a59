//! Per-Fourier-slice eigensolvers and the tensor spectral operations built on
//! them: t-SVD, eigentubes, and the frontal-trace optimization solvers.
//!
//! All slice problems are Hermitian and solved by a cyclic Jacobi sweep, which
//! is unconditionally convergent and needs no external dependencies. Only the
//! leading ⌈(p+1)/2⌉ Fourier slices are solved; the remaining slices are
//! conjugate mirrors, which halves the eigen work and, together with a
//! deterministic eigenvector phase, guarantees that the assembled tensors
//! invert to real data.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{cholesky, complete_orthonormal, solve_lower, solve_lower_adjoint, CMat};
use crate::tensor::{
    fft3, half_slice_count, ifft3_with_residue, is_self_mirror, CTensor3, Tensor3, TensorError,
    Tube, DEFAULT_TOL,
};

pub type C64 = Complex64;

/// Hard cap on Jacobi sweeps; convergence is quadratic so this is generous.
const MAX_SWEEPS: usize = 100;
/// Off-diagonal threshold relative to ‖A‖_F.
const OFF_DIAG_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix is not Hermitian (residual {residual:.3e}, tol {tol:.3e})")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("constraint matrix is not positive definite")]
    BNotPositiveDefinite,
    #[error("tensor is not f-symmetric at Fourier slice {slice}")]
    NotFSymmetric { slice: usize },
    #[error("target dimension {d} out of range 1..={max}")]
    DOutOfRange { d: usize, max: usize },
    #[error("tensor is not f-diagonalizable by the Hermitian path (Fourier slice {slice})")]
    NotFDiagonalizable { slice: usize },
    #[error("self-conjugate Fourier slice {slice} is not real (residual {residual:.3e})")]
    FirstSliceNotReal { slice: usize, residual: f64 },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Eigentube j: the j-th eigenvalue of every Fourier slice, ordered within
/// each slice by nonincreasing magnitude.
#[derive(Debug, Clone)]
pub struct Eigentube {
    pub index: usize,
    pub values: Tube,
}

/// t-SVD factors: A = U * S * Vᵀ with f-orthogonal U, V and f-diagonal S.
#[derive(Debug, Clone)]
pub struct TSVDFactors {
    pub u: Tensor3,
    pub s: Tensor3,
    pub v: Tensor3,
}

/// Result of a frontal-trace optimization: the mapping tensor, the optimal
/// objective, and the selected eigenvalues of every Fourier slice.
#[derive(Debug, Clone)]
pub struct TraceOptResult {
    pub v: Tensor3,
    pub objective: f64,
    pub per_slice_eigs: Vec<Vec<f64>>,
    /// Largest relative imaginary residue discarded when transforming the
    /// mapping tensor back to the real domain.
    pub imag_residue: f64,
}

/// Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi.
///
/// Returns eigenvalues in ascending order with orthonormal eigenvectors as
/// columns. The phase of each eigenvector is fixed so its largest-magnitude
/// component is real positive, making repeated runs (and conjugate-mirrored
/// slices) bitwise reproducible.
pub fn hermitian_eig(a: &CMat) -> Result<(Vec<f64>, CMat), SpectralError> {
    assert_eq!(a.rows(), a.cols(), "hermitian_eig requires a square matrix");
    let n = a.rows();
    let norm = a.frob_norm();
    if norm == 0.0 {
        return Ok((vec![0.0; n], CMat::identity(n)));
    }
    let herm_tol = 1e-8 * norm;
    let residual = a.hermitian_residual();
    if residual > herm_tol {
        return Err(SpectralError::NotHermitian {
            residual,
            tol: herm_tol,
        });
    }

    let mut w = a.hermitize();
    let mut v = CMat::identity(n);
    let threshold = OFF_DIAG_TOL * norm;
    let skip = threshold / (n.max(2) as f64);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for q in 0..n {
            for r in 0..n {
                if r != q {
                    off += w.get(r, q).norm_sqr();
                }
            }
        }
        if off.sqrt() <= threshold {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let beta = w.get(p, q);
                let absb = beta.norm();
                if absb <= skip {
                    continue;
                }
                let phase = beta / absb;
                let alpha = w.get(p, p).re;
                let gamma = w.get(q, q).re;
                let theta = (gamma - alpha) / (2.0 * absb);
                // Small-magnitude root of t² − 2θt − 1 = 0 keeps the
                // rotation angle below 45°, which cyclic Jacobi needs.
                let t = if theta >= 0.0 {
                    -1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase * s; // s·e^{iφ}
                let spc = phase.conj() * s; // s·e^{−iφ}

                // A <- A·J (columns p and q).
                for r in 0..n {
                    let ap = w.get(r, p);
                    let aq = w.get(r, q);
                    w.set(r, p, ap * c + aq * spc);
                    w.set(r, q, aq * c - ap * sp);
                }
                // A <- Jᴴ·A (rows p and q).
                for r in 0..n {
                    let pr = w.get(p, r);
                    let qr = w.get(q, r);
                    w.set(p, r, pr * c + qr * sp);
                    w.set(q, r, qr * c - pr * spc);
                }
                // V <- V·J.
                for r in 0..n {
                    let vp = v.get(r, p);
                    let vq = v.get(r, q);
                    v.set(r, p, vp * c + vq * spc);
                    v.set(r, q, vq * c - vp * sp);
                }
            }
        }
    }
    if !converged {
        return Err(SpectralError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| w.get(i, i).re).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    let eigvals: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col: Vec<C64> = v.col(src).to_vec();
        vecs.col_mut(dst).copy_from_slice(&col);
    }
    fix_phases(&mut vecs);
    Ok((eigvals, vecs))
}

/// Rotate each column so its largest-magnitude entry is real positive.
pub fn fix_phases(v: &mut CMat) {
    for c in 0..v.cols() {
        let col = v.col(c);
        let mut best = 0usize;
        let mut best_mag = 0.0;
        for (r, z) in col.iter().enumerate() {
            let m = z.norm();
            if m > best_mag + 1e-300 {
                best_mag = m;
                best = r;
            }
        }
        if best_mag > 0.0 {
            let z = col[best];
            let factor = z.conj() / best_mag;
            for r in 0..v.rows() {
                let nv = v.get(r, c) * factor;
                v.set(r, c, nv);
            }
        }
    }
}

/// Generalized Hermitian eigenproblem A v = λ B v with B positive definite,
/// reduced to a standard problem by the Cholesky factorization B = L Lᴴ.
/// Eigenvalues ascend; eigenvectors satisfy Vᴴ B V = I.
pub fn generalized_hermitian_eig(a: &CMat, b: &CMat) -> Result<(Vec<f64>, CMat), SpectralError> {
    assert_eq!(a.rows(), a.cols());
    assert_eq!(b.rows(), b.cols());
    assert_eq!(a.rows(), b.rows());
    let bnorm = b.frob_norm();
    let herm_tol = 1e-8 * bnorm.max(1e-300);
    if b.hermitian_residual() > herm_tol {
        return Err(SpectralError::NotHermitian {
            residual: b.hermitian_residual(),
            tol: herm_tol,
        });
    }
    let l = cholesky(&b.hermitize(), 1e-12 * bnorm).ok_or(SpectralError::BNotPositiveDefinite)?;
    // C = L⁻¹ A L⁻ᴴ.
    let x = solve_lower(&l, a);
    let c = solve_lower(&l, &x.adjoint()).adjoint().hermitize();
    let (eigvals, w) = hermitian_eig(&c)?;
    let mut v = solve_lower_adjoint(&l, &w);
    fix_phases(&mut v);
    Ok((eigvals, v))
}

/// Hermitian psd square root via the eigendecomposition, clamping negative
/// roundoff eigenvalues to zero.
pub fn hermitian_sqrt(a: &CMat) -> Result<CMat, SpectralError> {
    let (eigvals, v) = hermitian_eig(a)?;
    let n = a.rows();
    let mut scaled = CMat::zeros(n, n);
    for c in 0..n {
        let s = eigvals[c].max(0.0).sqrt();
        for r in 0..n {
            scaled.set(r, c, v.get(r, c) * s);
        }
    }
    Ok(scaled.mul(&v.adjoint()).hermitize())
}

/// Assemble a full conjugate-even Fourier tensor from the leading
/// ⌈(p+1)/2⌉ frontal slices. Slice 1 (and slice p/2 + 1 for even p) must be
/// real within tolerance; their imaginary residue is zeroed so the inverse
/// transform of the result is real.
pub fn conjugate_completion(slices: &[CMat], p: usize) -> Result<CTensor3, SpectralError> {
    let half = half_slice_count(p);
    assert_eq!(
        slices.len(),
        half,
        "expected {half} leading Fourier slices for p = {p}"
    );
    let mut full: Vec<CMat> = Vec::with_capacity(p);
    for (k, s) in slices.iter().enumerate() {
        let mut s = s.clone();
        if is_self_mirror(k, p) {
            let scale = s.frob_norm().max(1.0);
            let residual = s.max_abs_imag();
            if residual > DEFAULT_TOL * scale {
                return Err(SpectralError::FirstSliceNotReal {
                    slice: k + 1,
                    residual,
                });
            }
            s.zero_imag();
        }
        full.push(s);
    }
    for k in half..p {
        let mirrored = full[p - k].conj();
        full.push(mirrored);
    }
    Ok(CTensor3::from_frontal_slices(&full, true))
}

/// t-SVD: per-slice singular value decompositions in the Fourier domain,
/// conjugate-mirrored and transformed back. S is f-diagonal with nonnegative
/// per-slice nonincreasing diagonals.
pub fn tsvd(a: &Tensor3) -> Result<TSVDFactors, SpectralError> {
    let (m, n, p) = a.dims();
    let ah = fft3(a);
    let half = half_slice_count(p);
    let solved: Vec<(CMat, Vec<f64>, CMat)> = (0..half)
        .into_par_iter()
        .map(|k| slice_svd(&ah.frontal_slice(k)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut u_slices = Vec::with_capacity(half);
    let mut s_slices = Vec::with_capacity(half);
    let mut v_slices = Vec::with_capacity(half);
    for (u, sig, v) in solved {
        let mut s = CMat::zeros(m, n);
        for (i, &val) in sig.iter().enumerate() {
            s.set(i, i, C64::new(val, 0.0));
        }
        u_slices.push(u);
        s_slices.push(s);
        v_slices.push(v);
    }
    let u = ifft3_with_residue(&conjugate_completion(&u_slices, p)?)?.0;
    let s = ifft3_with_residue(&conjugate_completion(&s_slices, p)?)?.0;
    let v = ifft3_with_residue(&conjugate_completion(&v_slices, p)?)?.0;
    Ok(TSVDFactors { u, s, v })
}

/// Full SVD of one complex slice through the Gram-matrix eigenproblem on the
/// smaller side. Returns (U m×m, σ descending, V n×n).
fn slice_svd(a: &CMat) -> Result<(CMat, Vec<f64>, CMat), SpectralError> {
    let (m, n) = (a.rows(), a.cols());
    let r = m.min(n);
    let (mut eigvals, vecs, gram_on_left) = if m <= n {
        let g = a.mul(&a.adjoint()).hermitize();
        let (e, v) = hermitian_eig(&g)?;
        (e, v, true)
    } else {
        let g = a.adjoint().mul(a).hermitize();
        let (e, v) = hermitian_eig(&g)?;
        (e, v, false)
    };
    // Ascending eigenvalues of the Gram matrix -> descending singular values.
    eigvals.reverse();
    let dim = eigvals.len();
    let mut primary = CMat::zeros(dim, dim);
    for c in 0..dim {
        let src: Vec<C64> = vecs.col(dim - 1 - c).to_vec();
        primary.col_mut(c).copy_from_slice(&src);
    }
    let sigma: Vec<f64> = eigvals.iter().take(r).map(|l| l.max(0.0).sqrt()).collect();
    let cutoff = sigma.first().copied().unwrap_or(0.0) * 1e-10;

    // Derive the other factor column by column, then complete it to a basis.
    let other_dim = if gram_on_left { n } else { m };
    let mut derived: Vec<Vec<C64>> = Vec::new();
    for (j, &s) in sigma.iter().enumerate() {
        if s <= cutoff {
            break;
        }
        let col: Vec<C64> = primary.col(j).to_vec();
        let mut out = vec![C64::new(0.0, 0.0); other_dim];
        if gram_on_left {
            // v_j = Aᴴ u_j / σ_j
            for c in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for rr in 0..m {
                    acc += a.get(rr, c).conj() * col[rr];
                }
                out[c] = acc / s;
            }
        } else {
            // u_j = A v_j / σ_j
            for rr in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..n {
                    acc += a.get(rr, c) * col[c];
                }
                out[rr] = acc / s;
            }
        }
        derived.push(out);
    }
    let secondary = complete_orthonormal(&derived, other_dim);
    if gram_on_left {
        Ok((primary, sigma, secondary))
    } else {
        Ok((secondary, sigma, primary))
    }
}

fn hermitian_fourier_slices(
    ah: &CTensor3,
    half: usize,
    not_symmetric: impl Fn(usize) -> SpectralError,
) -> Result<Vec<CMat>, SpectralError> {
    let mut out = Vec::with_capacity(half);
    for k in 0..half {
        let s = ah.frontal_slice(k);
        if s.hermitian_residual() > DEFAULT_TOL * s.frob_norm().max(1e-300) {
            return Err(not_symmetric(k + 1));
        }
        out.push(s.hermitize());
    }
    Ok(out)
}

/// Eigentubes of a square tensor whose Fourier slices are Hermitian:
/// eigentube j holds the j-th eigenvalue of each slice under the
/// magnitude-nonincreasing ordering.
pub fn eigentubes(a: &Tensor3) -> Result<Vec<Eigentube>, SpectralError> {
    let (m, n, p) = a.dims();
    if m != n {
        return Err(SpectralError::Tensor(TensorError::NotSquare { m, n }));
    }
    let ah = fft3(a);
    let half = half_slice_count(p);
    let slices = hermitian_fourier_slices(&ah, half, |slice| SpectralError::NotFDiagonalizable {
        slice,
    })?;
    let per_slice: Vec<Vec<f64>> = slices
        .par_iter()
        .map(|s| {
            let (mut e, _) = hermitian_eig(s)?;
            e.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(a.total_cmp(b)));
            Ok(e)
        })
        .collect::<Result<Vec<_>, SpectralError>>()?;
    let full: Vec<&Vec<f64>> = (0..p)
        .map(|k| {
            if k < half {
                &per_slice[k]
            } else {
                &per_slice[p - k]
            }
        })
        .collect();
    Ok((0..m)
        .map(|j| Eigentube {
            index: j,
            values: Tube::new((0..p).map(|k| C64::new(full[k][j], 0.0)).collect()),
        })
        .collect())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Sense {
    Max,
    Min,
}

/// Maximize Trace_f(Vᵀ * A * V) over Vᵀ * V = I with V of width d: per slice,
/// the eigenvectors of the d largest eigenvalues.
pub fn trace_opt_max(a: &Tensor3, d: usize) -> Result<TraceOptResult, SpectralError> {
    trace_opt(a, d, Sense::Max)
}

/// Minimize Trace_f(Vᵀ * A * V) over Vᵀ * V = I: the d smallest eigenvalues.
pub fn trace_opt_min(a: &Tensor3, d: usize) -> Result<TraceOptResult, SpectralError> {
    trace_opt(a, d, Sense::Min)
}

fn trace_opt(a: &Tensor3, d: usize, sense: Sense) -> Result<TraceOptResult, SpectralError> {
    let (m, n, p) = a.dims();
    if m != n {
        return Err(SpectralError::Tensor(TensorError::NotSquare { m, n }));
    }
    if d < 1 || d > m {
        return Err(SpectralError::DOutOfRange { d, max: m });
    }
    let ah = fft3(a);
    let half = half_slice_count(p);
    let slices =
        hermitian_fourier_slices(&ah, half, |slice| SpectralError::NotFSymmetric { slice })?;
    let solved: Vec<(Vec<f64>, CMat)> = slices
        .par_iter()
        .map(|s| {
            let (e, v) = hermitian_eig(s)?;
            Ok(select_eigpairs(&e, &v, d, sense))
        })
        .collect::<Result<Vec<_>, SpectralError>>()?;
    assemble_trace_result(solved, p)
}

/// Maximize Trace_f(Vᵀ * A * V) over Vᵀ * B * V = I: per slice, the top-d
/// generalized eigenpairs of (Â_i, B̂_i).
pub fn trace_opt_gen_max(
    a: &Tensor3,
    b: &Tensor3,
    d: usize,
) -> Result<TraceOptResult, SpectralError> {
    trace_opt_gen(a, b, d, Sense::Max)
}

/// The minimizing counterpart: the d smallest generalized eigenvalues.
pub fn trace_opt_gen_min(
    a: &Tensor3,
    b: &Tensor3,
    d: usize,
) -> Result<TraceOptResult, SpectralError> {
    trace_opt_gen(a, b, d, Sense::Min)
}

fn trace_opt_gen(
    a: &Tensor3,
    b: &Tensor3,
    d: usize,
    sense: Sense,
) -> Result<TraceOptResult, SpectralError> {
    let (m, n, p) = a.dims();
    if m != n {
        return Err(SpectralError::Tensor(TensorError::NotSquare { m, n }));
    }
    if b.dims() != a.dims() {
        return Err(SpectralError::Tensor(TensorError::DimensionMismatch {
            context: format!("trace_opt_gen pair {:?} vs {:?}", a.dims(), b.dims()),
        }));
    }
    if d < 1 || d > m {
        return Err(SpectralError::DOutOfRange { d, max: m });
    }
    let ah = fft3(a);
    let bh = fft3(b);
    let half = half_slice_count(p);
    let a_slices =
        hermitian_fourier_slices(&ah, half, |slice| SpectralError::NotFSymmetric { slice })?;
    let b_slices =
        hermitian_fourier_slices(&bh, half, |slice| SpectralError::NotFSymmetric { slice })?;
    let solved: Vec<(Vec<f64>, CMat)> = a_slices
        .par_iter()
        .zip(b_slices.par_iter())
        .map(|(sa, sb)| {
            let (e, v) = generalized_hermitian_eig(sa, sb)?;
            Ok(select_eigpairs(&e, &v, d, sense))
        })
        .collect::<Result<Vec<_>, SpectralError>>()?;
    assemble_trace_result(solved, p)
}

fn select_eigpairs(eigvals: &[f64], vecs: &CMat, d: usize, sense: Sense) -> (Vec<f64>, CMat) {
    let n = eigvals.len();
    let indices: Vec<usize> = match sense {
        // Largest first, so column j corresponds to the j-th largest.
        Sense::Max => (0..d).map(|j| n - 1 - j).collect(),
        Sense::Min => (0..d).collect(),
    };
    let selected: Vec<f64> = indices.iter().map(|&i| eigvals[i]).collect();
    let mut v = CMat::zeros(vecs.rows(), d);
    for (c, &i) in indices.iter().enumerate() {
        let col: Vec<C64> = vecs.col(i).to_vec();
        v.col_mut(c).copy_from_slice(&col);
    }
    (selected, v)
}

fn assemble_trace_result(
    solved: Vec<(Vec<f64>, CMat)>,
    p: usize,
) -> Result<TraceOptResult, SpectralError> {
    let half = solved.len();
    let mut objective = 0.0;
    let mut per_slice_eigs: Vec<Vec<f64>> = vec![Vec::new(); p];
    let mut v_slices = Vec::with_capacity(half);
    for (k, (eigs, v)) in solved.into_iter().enumerate() {
        let weight = if is_self_mirror(k, p) { 1.0 } else { 2.0 };
        objective += weight * eigs.iter().sum::<f64>();
        per_slice_eigs[k] = eigs.clone();
        if k > 0 && !is_self_mirror(k, p) {
            per_slice_eigs[p - k] = eigs;
        }
        v_slices.push(v);
    }
    objective /= p as f64;
    let (v, imag_residue) = ifft3_with_residue(&conjugate_completion(&v_slices, p)?)?;
    Ok(TraceOptResult {
        v,
        objective,
        per_slice_eigs,
        imag_residue,
    })
}
