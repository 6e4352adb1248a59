#![allow(clippy::needless_range_loop)]
//! Dimensionality reduction for third-order tensors built on the t-product.
//!
//! Data tensors are m × n × p arrays whose lateral slices are the samples.
//! The t-product turns third-order tensors into an algebra that behaves like
//! matrix algebra per Fourier slice, and every reduction method here — MPCA,
//! MONPP, the kernel variants MKPCA and MKONPP, MLLE, and MLE — decouples into
//! p independent matrix eigenproblems under that transform.
//!
//! The layers, bottom up:
//!
//! * [`tensor`] — tensor storage, the mode-3 DFT, and the t-product algebra;
//! * [`spectral`] — per-slice Hermitian and generalized eigensolvers, t-SVD,
//!   eigentubes, and the frontal-trace optimization solvers;
//! * [`graph`] — kNN graphs, Gaussian affinities, locally-linear
//!   reconstruction weights, and Laplacians;
//! * [`methods`] — the six reduction methods;
//! * [`pipeline`] — dataset I/O, synthetic data, KNN classification under
//!   stratified cross-validation, and the experiment harness the `tdr` CLI
//!   drives.

pub mod graph;
pub mod linalg;
pub mod methods;
pub mod pipeline;
pub mod spectral;
pub mod tensor;

pub use methods::{Method, ReductionConfig, ReductionOutput};
pub use pipeline::{CVReport, LabeledDataset};
pub use tensor::{CTensor3, Tensor3, DEFAULT_TOL};

/// Cap rayon's worker count from the `TDR_THREADS` environment variable.
/// A missing or unparsable value leaves the default pool; calling this after
/// the pool already started is a no-op.
pub fn configure_thread_pool_from_env() {
    if let Ok(v) = std::env::var("TDR_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

// Keeps the book's code fences compiling and running under `cargo test --doc`.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }
    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(TProduct, "../../../book/src/t_product.md");
    chapter!(Spectra, "../../../book/src/spectra.md");
    chapter!(TraceOptimization, "../../../book/src/trace_optimization.md");
    chapter!(LinearMethods, "../../../book/src/linear_methods.md");
    chapter!(KernelMethods, "../../../book/src/kernel_methods.md");
    chapter!(ManifoldMethods, "../../../book/src/manifold_methods.md");
    chapter!(Evaluation, "../../../book/src/evaluation.md");
}
