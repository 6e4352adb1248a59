//! The six dimensionality-reduction methods assembled from the tensor, graph,
//! and spectral layers: MPCA, MONPP, the kernel variants MKPCA and MKONPP,
//! MLLE, and MLE.
//!
//! Every method decouples per Fourier slice. The linear methods (MPCA, MONPP)
//! return an explicit f-orthonormal mapping tensor V with Y = Vᵀ * X; the
//! kernel and manifold methods are transductive and return only the embedding,
//! assembled from per-slice eigenvector rows, conjugate-mirrored, and
//! transformed back to the real domain.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{self, DegreeMode, GraphError, WeightGraph};
use crate::linalg::{CMat, C64};
use crate::spectral::{
    self, conjugate_completion, generalized_hermitian_eig, hermitian_eig, hermitian_sqrt,
    SpectralError,
};
use crate::tensor::{
    fft3, half_slice_count, ifft3_with_residue, is_self_mirror, tprod, tprod_with_residue,
    ttranspose, Tensor3, TensorError,
};

#[derive(Debug, Error)]
pub enum MethodError {
    #[error("target dimension {d} out of range 1..={max}")]
    DOutOfRange { d: usize, max: usize },
    #[error("centered Gram matrix is numerically zero (identical samples?)")]
    DegenerateGram,
    #[error("neighborhood graph is disconnected at Fourier slice {slice} (increase k or sigma)")]
    DisconnectedGraph { slice: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mpca,
    Monpp,
    Mkpca,
    Mkonpp,
    Mlle,
    Mle,
}

impl Method {
    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "mpca" => Some(Method::Mpca),
            "monpp" => Some(Method::Monpp),
            "mkpca" => Some(Method::Mkpca),
            "mkonpp" => Some(Method::Mkonpp),
            "mlle" => Some(Method::Mlle),
            "mle" => Some(Method::Mle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// σ = sqrt(median pairwise squared distance / 2).
    Median,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// exp(−d²/2σ²) with σ from the bandwidth setting.
    Gaussian,
    /// exp(−d²/c).
    Rbf { c: f64 },
    /// Plain inner product (real part for complex slices).
    Linear,
}

/// Which reconstruction weights MONPP and MLLE use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightsChoice {
    Lle,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GramMode {
    /// One Gram from kernel evaluations on the centered lateral slices,
    /// replicated across Fourier slices.
    Shared,
    /// Kernel applied to the columns of each Fourier slice independently.
    PerSlice,
}

/// Where neighborhood weights are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightDomain {
    /// Independently on each Fourier slice of the data (default).
    Fourier,
    /// Once on the original lateral slices, reused for every Fourier slice.
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionConfig {
    pub method: Method,
    pub dim: usize,
    pub neighbors: usize,
    pub bandwidth: Bandwidth,
    pub kernel: KernelKind,
    pub weights: WeightsChoice,
    pub degree_mode: DegreeMode,
    pub gram_mode: GramMode,
    pub weight_domain: WeightDomain,
    pub lle_reg: f64,
    /// Scale kernel-PCA rows by 1/sqrt(λ); off by default (raw eigenvector
    /// rows).
    pub kpca_unit_scale: bool,
    /// Reserved for the evaluation harness; the methods themselves draw no
    /// random numbers.
    pub seed: u64,
}

impl ReductionConfig {
    pub fn new(method: Method, dim: usize) -> Self {
        Self {
            method,
            dim,
            neighbors: 5,
            bandwidth: Bandwidth::Median,
            kernel: KernelKind::Gaussian,
            weights: WeightsChoice::Lle,
            degree_mode: DegreeMode::RowSum,
            gram_mode: GramMode::Shared,
            weight_domain: WeightDomain::Fourier,
            lle_reg: 1e-3,
            kpca_unit_scale: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// Optimal frontal-trace value of the method's objective.
    pub objective: f64,
    /// Selected eigenvalues of every Fourier slice.
    pub per_slice_spectra: Vec<Vec<f64>>,
    /// Largest relative imaginary residue discarded when transforming the
    /// embedding back to the real domain.
    pub embed_imag_residue: f64,
    /// Wall time of the reduction, stamped by [`reduce`].
    pub reduce_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ReductionOutput {
    /// Embedding, d × n × p: column j holds the reduced sample j.
    pub y: Tensor3,
    /// Mapping tensor for the linear methods (Y = Vᵀ * X), absent for the
    /// transductive kernel and manifold methods.
    pub v: Option<Tensor3>,
    pub diagnostics: Diagnostics,
}

/// Per-slice centered Gram matrices Ḡ_i = H G_i H.
#[derive(Debug, Clone)]
pub struct GramStack {
    slices: Vec<CMat>,
}

impl GramStack {
    pub fn slice_count(&self) -> usize {
        self.slices.len()
    }

    pub fn slice(&self, i: usize) -> &CMat {
        &self.slices[i]
    }

    pub fn is_degenerate(&self) -> bool {
        let n = self.slices[0].rows() as f64;
        self.slices.iter().all(|s| s.frob_norm() <= 1e-10 * n)
    }
}

/// Dispatch on the configured method and stamp the wall time.
pub fn reduce(x: &Tensor3, cfg: &ReductionConfig) -> Result<ReductionOutput, MethodError> {
    let start = std::time::Instant::now();
    let mut out = match cfg.method {
        Method::Mpca => mpca(x, cfg)?,
        Method::Monpp => monpp(x, cfg)?,
        Method::Mkpca => mkpca(x, cfg)?,
        Method::Mkonpp => mkonpp(x, cfg)?,
        Method::Mlle => mlle(x, cfg)?,
        Method::Mle => mle(x, cfg)?,
    };
    out.diagnostics.reduce_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Subtract the mean lateral slice from every sample. Returns the centered
/// tensor and the mean as an m × 1 × p tensor.
pub fn center_data(x: &Tensor3) -> (Tensor3, Tensor3) {
    let (m, n, p) = x.dims();
    let mut mean = Tensor3::zeros(m, 1, p);
    for k in 0..p {
        for i in 0..m {
            let mut s = 0.0;
            for j in 0..n {
                s += x.get(i, j, k);
            }
            mean.set(i, 0, k, s / n as f64);
        }
    }
    let centered = Tensor3::from_fn(m, n, p, |i, j, k| x.get(i, j, k) - mean.get(i, 0, k));
    (centered, mean)
}

fn resolve_sigma(x: &Tensor3, cfg: &ReductionConfig) -> Result<f64, MethodError> {
    match cfg.bandwidth {
        Bandwidth::Median => Ok(graph::median_bandwidth(x)?),
        Bandwidth::Fixed(s) => {
            if s <= 0.0 {
                return Err(MethodError::Graph(GraphError::SigmaNonPositive {
                    sigma: s,
                }));
            }
            Ok(s)
        }
    }
}

/// Column matrices the neighborhood machinery runs on: the leading Fourier
/// slices, or a single original-domain matrix shared by every slice.
fn domain_slices(x: &Tensor3, cfg: &ReductionConfig) -> Vec<CMat> {
    match cfg.weight_domain {
        WeightDomain::Fourier => {
            let xh = fft3(x);
            (0..half_slice_count(x.p()))
                .map(|k| xh.frontal_slice(k))
                .collect()
        }
        WeightDomain::Original => vec![x.lateral_columns()],
    }
}

/// Index into a domain-slice collection for Fourier slice `k`.
fn dslice(idx: usize, len: usize) -> usize {
    if len == 1 {
        0
    } else {
        idx
    }
}

fn reconstruction_weights(x: &Tensor3, cfg: &ReductionConfig) -> Result<WeightGraph, MethodError> {
    let slices = domain_slices(x, cfg);
    let wg = match cfg.weights {
        WeightsChoice::Lle => WeightGraph::lle(&slices, cfg.neighbors, cfg.lle_reg)?,
        WeightsChoice::Gaussian => {
            let sigma = resolve_sigma(x, cfg)?;
            WeightGraph::gaussian(&slices, cfg.neighbors, sigma, true)?
        }
    };
    Ok(wg)
}

/// Q = (I − W)ᴴ (I − W) for one weight slice.
fn neighborhood_gram(w: &CMat) -> CMat {
    let n = w.rows();
    let iw = CMat::identity(n).sub(w);
    iw.adjoint().mul(&iw).hermitize()
}

/// Assemble a d × n × p embedding from per-slice coefficient rows.
fn assemble_embedding(rows: &[CMat], p: usize) -> Result<(Tensor3, f64), MethodError> {
    let ct = conjugate_completion(rows, p)?;
    Ok(ifft3_with_residue(&ct)?)
}

fn mirror_spectra(half: Vec<Vec<f64>>, p: usize) -> Vec<Vec<f64>> {
    (0..p)
        .map(|k| {
            if k < half.len() {
                half[k].clone()
            } else {
                half[p - k].clone()
            }
        })
        .collect()
}

fn weighted_objective(half: &[Vec<f64>], p: usize) -> f64 {
    let mut s = 0.0;
    for (k, vals) in half.iter().enumerate() {
        let w = if is_self_mirror(k, p) { 1.0 } else { 2.0 };
        s += w * vals.iter().sum::<f64>();
    }
    s / p as f64
}

/// Rows `lo..lo+d` of the ascending eigenvector set, as a d × n matrix.
fn eigvec_rows(vecs: &CMat, lo: usize, d: usize) -> CMat {
    let n = vecs.rows();
    CMat::from_fn(d, n, |r, c| vecs.get(c, lo + r))
}

/// MPCA: maximize the frontal-trace variance of the projected centered data.
/// The covariance tensor X̄ * X̄ᵀ is f-symmetric positive semidefinite and its
/// top-d eigenvectors per Fourier slice form the mapping tensor.
pub fn mpca(x: &Tensor3, cfg: &ReductionConfig) -> Result<ReductionOutput, MethodError> {
    let (m, _, _) = x.dims();
    if cfg.dim < 1 || cfg.dim > m {
        return Err(MethodError::DOutOfRange { d: cfg.dim, max: m });
    }
    let (xbar, _) = center_data(x);
    let cov = tprod(&xbar, &ttranspose(&xbar))?;
    let r = spectral::trace_opt_max(&cov, cfg.dim)?;
    let (y, residue) = tprod_with_residue(&ttranspose(&r.v), &xbar)?;
    Ok(ReductionOutput {
        y,
        v: Some(r.v),
        diagnostics: Diagnostics {
            objective: r.objective,
            per_slice_spectra: r.per_slice_eigs,
            embed_imag_residue: residue.max(r.imag_residue),
            reduce_seconds: 0.0,
        },
    })
}

/// MONPP: minimize the reconstruction-error trace of the projected data under
/// neighborhood weights, via the d smallest eigenpairs of
/// M̂_i = X̂_i (I − Ŵ_i)ᴴ (I − Ŵ_i) X̂_iᴴ.
pub fn monpp(x: &Tensor3, cfg: &ReductionConfig) -> Result<ReductionOutput, MethodError> {
    let (m, _, p) = x.dims();
    if cfg.dim < 1 || cfg.dim > m {
        return Err(MethodError::DOutOfRange { d: cfg.dim, max: m });
    }
    let wg = reconstruction_weights(x, cfg)?;
    let xh = fft3(x);
    let half = half_slice_count(p);
    let mut m_slices = Vec::with_capacity(half);
    for k in 0..half {
        let xs = xh.frontal_slice(k);
        let q = neighborhood_gram(wg.slice(dslice(k, wg.slice_count())));
        m_slices.push(xs.mul(&q).mul(&xs.adjoint()).hermitize());
    }
    let m_tensor = crate::tensor::ifft3(&conjugate_completion(&m_slices, p)?)?;
    let r = spectral::trace_opt_min(&m_tensor, cfg.dim)?;
    let (y, residue) = tprod_with_residue(&ttranspose(&r.v), x)?;
    Ok(ReductionOutput {
        y,
        v: Some(r.v),
        diagnostics: Diagnostics {
            objective: r.objective,
            per_slice_spectra: r.per_slice_eigs,
            embed_imag_residue: residue.max(r.imag_residue),
            reduce_seconds: 0.0,
        },
    })
}

/// Raw (uncentered) kernel Gram matrix of a set of columns.
pub fn kernel_gram(cols: &CMat, kernel: KernelKind, sigma: f64) -> CMat {
    let n = cols.cols();
    match kernel {
        KernelKind::Gaussian | KernelKind::Rbf { .. } => {
            let denom = match kernel {
                KernelKind::Gaussian => 2.0 * sigma * sigma,
                KernelKind::Rbf { c } => c,
                KernelKind::Linear => unreachable!(),
            };
            let d = graph::pairwise_sqdist(cols);
            CMat::from_fn(n, n, |l, q| C64::new((-d.get(l, q) / denom).exp(), 0.0))
        }
        KernelKind::Linear => CMat::from_fn(n, n, |l, q| {
            let a = cols.col(l);
            let b = cols.col(q);
            let mut s = C64::new(0.0, 0.0);
            for r in 0..a.len() {
                s += a[r].conj() * b[r];
            }
            C64::new(s.re, 0.0)
        }),
    }
}

/// Double centering H G H with H = I − (1/n)·11ᵀ.
fn center_gram(g: &CMat) -> CMat {
    let n = g.rows();
    let mut row_mean = vec![0.0; n];
    let mut total = 0.0;
    for l in 0..n {
        let mut s = 0.0;
        for q in 0..n {
            s += g.get(l, q).re;
        }
        row_mean[l] = s / n as f64;
        total += s;
    }
    total /= (n * n) as f64;
    CMat::from_fn(n, n, |l, q| {
        C64::new(g.get(l, q).re - row_mean[l] - row_mean[q] + total, 0.0)
    })
}

/// Centered Gram matrices for the kernel methods. Shared mode evaluates the
/// kernel on centered lateral slices and replicates one matrix across the p
/// slices; per-slice mode evaluates on each Fourier slice's columns.
pub fn build_gram(xbar: &Tensor3, cfg: &ReductionConfig) -> Result<GramStack, MethodError> {
    let sigma = match cfg.kernel {
        KernelKind::Gaussian => resolve_sigma(xbar, cfg)?,
        KernelKind::Rbf { c } => {
            if c <= 0.0 {
                return Err(MethodError::Graph(GraphError::SigmaNonPositive {
                    sigma: c,
                }));
            }
            1.0
        }
        KernelKind::Linear => 1.0,
    };
    let p = xbar.p();
    let slices = match cfg.gram_mode {
        GramMode::Shared => {
            let g = center_gram(&kernel_gram(&xbar.lateral_columns(), cfg.kernel, sigma));
            vec![g; p]
        }
        GramMode::PerSlice => {
            let xh = fft3(xbar);
            (0..p)
                .map(|k| center_gram(&kernel_gram(&xh.frontal_slice(k), cfg.kernel, sigma)))
                .collect()
        }
    };
    Ok(GramStack { slices })
}

/// MKPCA: kernel PCA per Fourier slice. The top-d eigenvectors of the
/// centered Gram matrix become the rows of the embedding slice, which is
/// conjugate-completed and inverse-transformed.
pub fn mkpca(x: &Tensor3, cfg: &ReductionConfig) -> Result<ReductionOutput, MethodError> {
    let (_, n, p) = x.dims();
    if cfg.dim < 1 || cfg.dim + 1 > n {
        return Err(MethodError::DOutOfRange {
            d: cfg.dim,
            max: n.saturating_sub(1),
        });
    }
    let (xbar, _) = center_data(x);
    let gram = build_gram(&xbar, cfg)?;
    if gram.is_degenerate() {
        return Err(MethodError::DegenerateGram);
    }
    let half = half_slice_count(p);
    let d = cfg.dim;
    let mut rows = Vec::with_capacity(half);
    let mut spectra = Vec::with_capacity(half);
    for k in 0..half {
        let (eig, vecs) = hermitian_eig(gram.slice(k))?;
        let lo = n - d;
        let mut slice_rows = CMat::from_fn(d, n, |r, c| vecs.get(c, n - 1 - r));
        if cfg.kpca_unit_scale {
            for r in 0..d {
                let lam = eig[n - 1 - r];
                if lam > 1e-12 * eig[n - 1].abs().max(1e-300) {
                    let s = 1.0 / lam.sqrt();
                    for c in 0..n {
                        let v = slice_rows.get(r, c) * s;
                        slice_rows.set(r, c, v);
                    }
                }
            }
        }
        rows.push(slice_rows);
        spectra.push(eig[lo..].iter().rev().copied().collect::<Vec<f64>>());
    }
    let (y, residue) = assemble_embedding(&rows, p)?;
    let objective = weighted_objective(&spectra, p);
    Ok(ReductionOutput {
        y,
        v: None,
        diagnostics: Diagnostics {
            objective,
            per_slice_spectra: mirror_spectra(spectra, p),
            embed_imag_residue: residue,
            reduce_seconds: 0.0,
        },
    })
}

/// MKONPP: kernel ONPP in the sample space. The nonsymmetric problem
/// Ḡ Q̂ v = λ v is solved through the Hermitian form Q̂^½ Ḡ Q̂^½, which has the
/// same nonzero spectrum; the d smallest eigenvectors form the rows.
pub fn mkonpp(x: &Tensor3, cfg: &ReductionConfig) -> Result<ReductionOutput, MethodError> {
    mkonpp_impl(x, cfg, None)
}

fn mkonpp_impl(
    x: &Tensor3,
    cfg: &ReductionConfig,
    weight_override: Option<&[CMat]>,
) -> Result<ReductionOutput, MethodError> {
    let (_, n, p) = x.dims();
    if cfg.dim < 1 || cfg.dim + 1 > n {
        return Err(MethodError::DOutOfRange {
            d: cfg.dim,
            max: n.saturating_sub(1),
        });
    }
    let (xbar, _) = center_data(x);
    let gram = build_gram(&xbar, cfg)?;
    if gram.is_degenerate() {
        return Err(MethodError::DegenerateGram);
    }
    let weights = match weight_override {
        Some(w) => w.to_vec(),
        None => {
            let sigma = resolve_sigma(x, cfg)?;
            let slices = domain_slices(x, cfg);
            let wg = WeightGraph::gaussian(&slices, cfg.neighbors, sigma, true)?;
            (0..wg.slice_count()).map(|i| wg.slice(i).clone()).collect()
        }
    };
    let half = half_slice_count(p);
    let d = cfg.dim;
    let mut rows = Vec::with_capacity(half);
    let mut spectra = Vec::with_capacity(half);
    for k in 0..half {
        let q = neighborhood_gram(&weights[dslice(k, weights.len())]);
        let qh = hermitian_sqrt(&q)?;
        let s = qh.mul(gram.slice(k)).mul(&qh).hermitize();
        let (eig, vecs) = hermitian_eig(&s)?;
        rows.push(eigvec_rows(&vecs, 0, d));
        spectra.push(eig[..d].to_vec());
    }
    let (y, residue) = assemble_embedding(&rows, p)?;
    let objective = weighted_objective(&spectra, p);
    Ok(ReductionOutput {
        y,
        v: None,
        diagnostics: Diagnostics {
            objective,
            per_slice_spectra: mirror_spectra(spectra, p),
            embed_imag_residue: residue,
            reduce_seconds: 0.0,
        },
    })
}

/// MLLE: locally linear embedding per Fourier slice. The embedding rows are
/// the eigenvectors 2..d+1 (ascending) of N̂_i = (I − Ŵ_i)ᴴ (I − Ŵ_i); the
/// smallest eigenpair (the constant direction) is discarded.
pub fn mlle(x: &Tensor3, cfg: &ReductionConfig) -> Result<ReductionOutput, MethodError> {
    let (_, n, p) = x.dims();
    if cfg.dim < 1 || cfg.dim + 1 > n {
        return Err(MethodError::DOutOfRange {
            d: cfg.dim,
            max: n.saturating_sub(1),
        });
    }
    let wg = reconstruction_weights(x, cfg)?;
    let half = half_slice_count(p);
    let d = cfg.dim;
    let mut rows = Vec::with_capacity(half);
    let mut spectra = Vec::with_capacity(half);
    for k in 0..half {
        let nmat = neighborhood_gram(wg.slice(dslice(k, wg.slice_count())));
        let (eig, vecs) = hermitian_eig(&nmat)?;
        rows.push(eigvec_rows(&vecs, 1, d));
        spectra.push(eig[1..=d].to_vec());
    }
    let (y, residue) = assemble_embedding(&rows, p)?;
    let objective = weighted_objective(&spectra, p);
    Ok(ReductionOutput {
        y,
        v: None,
        diagnostics: Diagnostics {
            objective,
            per_slice_spectra: mirror_spectra(spectra, p),
            embed_imag_residue: residue,
            reduce_seconds: 0.0,
        },
    })
}

/// MLE: Laplacian eigenmaps per Fourier slice. Gaussian affinities give
/// L̂ = D̂ − Ŵ; the generalized eigenvectors 2..d+1 of (L̂, D̂) form the rows
/// and the zero eigenpair (constant direction) is discarded.
pub fn mle(x: &Tensor3, cfg: &ReductionConfig) -> Result<ReductionOutput, MethodError> {
    let (_, n, p) = x.dims();
    if cfg.dim < 1 || cfg.dim + 1 > n {
        return Err(MethodError::DOutOfRange {
            d: cfg.dim,
            max: n.saturating_sub(1),
        });
    }
    let sigma = resolve_sigma(x, cfg)?;
    let slices = domain_slices(x, cfg);
    let wg = WeightGraph::gaussian(&slices, cfg.neighbors, sigma, false)?;
    let lp = graph::laplacian(&wg, cfg.degree_mode)?;
    let half = half_slice_count(p);
    let d = cfg.dim;
    let mut rows = Vec::with_capacity(half);
    let mut spectra = Vec::with_capacity(half);
    for k in 0..half {
        let idx = dslice(k, lp.laplacians.len());
        let l = &lp.laplacians[idx];
        let deg = &lp.degrees[idx];
        let dmat = CMat::from_fn(n, n, |r, c| {
            if r == c {
                C64::new(deg[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let (eig, vecs) = generalized_hermitian_eig(l, &dmat)?;
        // With row-sum degrees the Laplacian kernel contains the constant
        // vector; a second (near-)zero eigenvalue means the graph has more
        // than one component. The unit-degree mode has no zero-eigenvalue
        // theory, so the check only applies to row sums.
        if cfg.degree_mode == DegreeMode::RowSum {
            let zero_tol = 1e-8 * eig[n - 1].abs().max(1e-300);
            if n > 1 && eig[1] < zero_tol {
                return Err(MethodError::DisconnectedGraph { slice: k + 1 });
            }
        }
        rows.push(eigvec_rows(&vecs, 1, d));
        spectra.push(eig[1..=d].to_vec());
    }
    let (y, residue) = assemble_embedding(&rows, p)?;
    let objective = weighted_objective(&spectra, p);
    Ok(ReductionOutput {
        y,
        v: None,
        diagnostics: Diagnostics {
            objective,
            per_slice_spectra: mirror_spectra(spectra, p),
            embed_imag_residue: residue,
            reduce_seconds: 0.0,
        },
    })
}
