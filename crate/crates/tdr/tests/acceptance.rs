//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tdr::graph::{laplacian, WeightGraph};
use tdr::linalg::{mgs_orthonormalize, CMat, C64};
use tdr::methods::{self, Method, ReductionConfig, ReductionOutput};
use tdr::pipeline::{run_experiment, synth_blobs, synth_rings};
use tdr::spectral::{hermitian_eig, trace_opt_gen_max, trace_opt_max, trace_opt_min, tsvd};
use tdr::tensor::{
    bcirc, fft3, frob_norm, half_slice_count, identity, is_self_mirror, tprod, trace_f, ttranspose,
    Tensor3,
};

fn check(name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {name}: {verdict} ({detail})");
    assert!(pass, "acceptance criterion '{name}' failed: {detail}");
}

fn random_tensor(m: usize, n: usize, p: usize, rng: &mut ChaCha8Rng) -> Tensor3 {
    Tensor3::from_fn(m, n, p, |_, _, _| rng.random_range(-1.0..1.0))
}

fn max_entry_diff(a: &Tensor3, b: &Tensor3) -> f64 {
    a.values()
        .iter()
        .zip(b.values().iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Criterion: t-product vs. the block-circulant/MatVec oracle, DFT block
/// diagonalization, and the frontal-trace identities on ≥ 50 random triples.
#[test]
fn algebra_oracle_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_prod: f64 = 0.0;
    let mut worst_diag: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    for _ in 0..50 {
        let m = rng.random_range(1..=5);
        let l = rng.random_range(1..=5);
        let n = rng.random_range(1..=5);
        let p = rng.random_range(1..=5);
        let a = random_tensor(m, l, p, &mut rng);
        let b = random_tensor(l, n, p, &mut rng);

        // t-product against Bcirc(a) · MatVec(b).
        let c = tprod(&a, &b).unwrap();
        let ba = bcirc(&a);
        for k in 0..p {
            for j in 0..n {
                for i in 0..m {
                    let mut s = 0.0;
                    for kb in 0..p {
                        for t in 0..l {
                            s += ba.get(k * m + i, kb * l + t) * b.get(t, j, kb);
                        }
                    }
                    worst_prod = worst_prod.max((s - c.get(i, j, k)).abs());
                }
            }
        }

        // (F_p ⊗ I_m) Bcirc(a) (F_pᴴ ⊗ I_l) = Bdiag(fft3(a)).
        let left = kron_dft(p, m, false);
        let right = kron_dft(p, l, true);
        let d = left.mul(&ba.to_cmat()).mul(&right);
        let ah = fft3(&a);
        for br in 0..p {
            for bc in 0..p {
                for i in 0..m {
                    for j in 0..l {
                        let got = d.get(br * m + i, bc * l + j);
                        let want = if br == bc {
                            ah.get(i, j, br)
                        } else {
                            C64::new(0.0, 0.0)
                        };
                        worst_diag = worst_diag.max((got - want).norm());
                    }
                }
            }
        }

        // Trace_f(Aᵀ * A) = ‖A‖² and Trace_f(Aᵀ * B) = <A, B>.
        let a2 = random_tensor(m, n, p, &mut rng);
        let b2 = random_tensor(m, n, p, &mut rng);
        let t1 = trace_f(&tprod(&ttranspose(&a2), &a2).unwrap()).unwrap();
        let t2 = trace_f(&tprod(&ttranspose(&a2), &b2).unwrap()).unwrap();
        let inner: f64 = a2
            .values()
            .iter()
            .zip(b2.values().iter())
            .map(|(x, y)| x * y)
            .sum();
        worst_trace = worst_trace.max((t1 - frob_norm(&a2).powi(2)).abs());
        worst_trace = worst_trace.max((t2 - inner).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        "algebra-oracle-suite",
        worst_prod < 1e-10 && worst_diag < 1e-10 && worst_trace < 1e-10 && secs < 10.0,
        &format!(
            "tprod residual {worst_prod:.2e}, bdiag residual {worst_diag:.2e}, trace residual {worst_trace:.2e}, {secs:.2}s"
        ),
    );
}

fn kron_dft(p: usize, m: usize, adjoint: bool) -> CMat {
    let s = 1.0 / (p as f64).sqrt();
    CMat::from_fn(p * m, p * m, |r, c| {
        let (br, ir) = (r / m, r % m);
        let (bc, ic) = (c / m, c % m);
        if ir != ic {
            return C64::new(0.0, 0.0);
        }
        let sign = if adjoint { 1.0 } else { -1.0 };
        let ang = sign * 2.0 * std::f64::consts::PI * (br * bc) as f64 / p as f64;
        C64::new(ang.cos(), ang.sin()) * s
    })
}

/// Random real f-orthonormal slices (per-slice Gram-Schmidt, self-mirror
/// slices kept real), used as feasible points of the trace problems.
fn random_f_orthonormal(m: usize, d: usize, p: usize, rng: &mut ChaCha8Rng) -> Vec<CMat> {
    let half = half_slice_count(p);
    (0..half)
        .map(|k| {
            let real_only = is_self_mirror(k, p);
            let mut g = CMat::from_fn(m, d, |_, _| {
                let re = rng.random_range(-1.0..1.0);
                let im = if real_only {
                    0.0
                } else {
                    rng.random_range(-1.0..1.0)
                };
                C64::new(re, im)
            });
            mgs_orthonormalize(&mut g);
            g
        })
        .collect()
}

fn fourier_objective(ah: &tdr::CTensor3, slices: &[CMat], d: usize, p: usize) -> f64 {
    let mut obj = 0.0;
    for (k, vs) in slices.iter().enumerate() {
        let w = if is_self_mirror(k, p) { 1.0 } else { 2.0 };
        let t = vs.adjoint().mul(&ah.frontal_slice(k)).mul(vs);
        obj += w * (0..d).map(|i| t.get(i, i).re).sum::<f64>();
    }
    obj / p as f64
}

/// Criterion: the trace solvers beat 500 random feasible points and agree
/// with the independent per-slice eigenvalue-sum formulas.
#[test]
fn trace_optimization_optimality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7_777);
    let mut worst_gap: f64 = 0.0; // how far any feasible point beats the solver
    let mut worst_formula: f64 = 0.0;
    for trial in 0..20 {
        let m = rng.random_range(2..=5);
        let p = rng.random_range(1..=4);
        let d = rng.random_range(1..=3.min(m));
        let x = random_tensor(m, m + 2, p, &mut rng);
        let a = tprod(&x, &ttranspose(&x)).unwrap();
        let rmax = trace_opt_max(&a, d).unwrap();
        let rmin = trace_opt_min(&a, d).unwrap();
        let ah = fft3(&a);
        for _ in 0..500 {
            let v = random_f_orthonormal(m, d, p, &mut rng);
            let obj = fourier_objective(&ah, &v, d, p);
            worst_gap = worst_gap.max(obj - rmax.objective);
            worst_gap = worst_gap.max(rmin.objective - obj);
        }
        // Independent eigenvalue sums per slice (all p slices solved afresh).
        let mut top = 0.0;
        let mut bottom = 0.0;
        for k in 0..p {
            let (eig, _) = hermitian_eig(&ah.frontal_slice(k).hermitize()).unwrap();
            top += eig[m - d..].iter().sum::<f64>();
            bottom += eig[..d].iter().sum::<f64>();
        }
        worst_formula = worst_formula.max((top / p as f64 - rmax.objective).abs());
        worst_formula = worst_formula.max((bottom / p as f64 - rmin.objective).abs());

        // Generalized pair on a subset of trials.
        if trial % 2 == 0 {
            let y = random_tensor(m, m + 2, p, &mut rng);
            let mut b = tprod(&y, &ttranspose(&y)).unwrap();
            for i in 0..m {
                b.set(i, i, 0, b.get(i, i, 0) + 0.5);
            }
            let bh = fft3(&b);
            let rgen = trace_opt_gen_max(&a, &b, d).unwrap();
            let mut gen_sum = 0.0;
            for k in 0..p {
                let (eig, _) = tdr::spectral::generalized_hermitian_eig(
                    &ah.frontal_slice(k).hermitize(),
                    &bh.frontal_slice(k).hermitize(),
                )
                .unwrap();
                gen_sum += eig[m - d..].iter().sum::<f64>();
            }
            worst_formula = worst_formula.max((gen_sum / p as f64 - rgen.objective).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        "trace-optimization-optimality",
        worst_gap < 1e-8 && worst_formula < 1e-8 && secs < 30.0,
        &format!(
            "feasible-point gap {worst_gap:.2e}, formula residual {worst_formula:.2e}, {secs:.2}s"
        ),
    );
}

fn constraint_residual(out: &ReductionOutput, x: &Tensor3, cfg: &ReductionConfig) -> f64 {
    let (_, n, p) = x.dims();
    let d = cfg.dim;
    match cfg.method {
        Method::Mpca | Method::Monpp => {
            let v = out.v.as_ref().expect("linear methods return V");
            let vtv = tprod(&ttranspose(v), v).unwrap();
            max_entry_diff(&vtv, &identity(d, p))
        }
        Method::Mkpca | Method::Mkonpp | Method::Mlle => {
            // Ŷ_i Ŷ_iᴴ = I_d on every Fourier slice.
            let yh = fft3(&out.y);
            let mut worst: f64 = 0.0;
            for k in 0..p {
                let ys = yh.frontal_slice(k);
                let res = ys.mul(&ys.adjoint()).sub(&CMat::identity(d)).frob_norm();
                worst = worst.max(res);
            }
            worst
        }
        Method::Mle => {
            // Ẑ_i D̂_i Ẑ_iᴴ = I_d, with the degrees rebuilt deterministically.
            let sigma = tdr::graph::median_bandwidth(x).unwrap();
            let xh = fft3(x);
            let half = half_slice_count(p);
            let slices: Vec<CMat> = (0..half).map(|k| xh.frontal_slice(k)).collect();
            let wg = WeightGraph::gaussian(&slices, cfg.neighbors, sigma, false).unwrap();
            let lp = laplacian(&wg, cfg.degree_mode).unwrap();
            let zh = fft3(&out.y);
            let mut worst: f64 = 0.0;
            for k in 0..p {
                let idx = if k < half { k } else { p - k };
                let deg = &lp.degrees[idx];
                let dmat = CMat::from_fn(n, n, |r, c| {
                    if r == c {
                        C64::new(deg[r], 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                let zs = zh.frontal_slice(k);
                let res = zs
                    .mul(&dmat)
                    .mul(&zs.adjoint())
                    .sub(&CMat::identity(d))
                    .frob_norm();
                worst = worst.max(res);
            }
            worst
        }
    }
}

/// Criterion: every method returns a real embedding satisfying its
/// orthogonality or D-orthogonality constraint.
#[test]
fn reality_and_constraints() {
    let mut rng = ChaCha8Rng::seed_from_u64(31_415);
    let x = random_tensor(5, 14, 3, &mut rng);
    let mut worst_imag: f64 = 0.0;
    let mut worst_constraint: f64 = 0.0;
    for method in [
        Method::Mpca,
        Method::Monpp,
        Method::Mkpca,
        Method::Mkonpp,
        Method::Mlle,
        Method::Mle,
    ] {
        let mut cfg = ReductionConfig::new(method, 2);
        cfg.neighbors = 4;
        let out = methods::reduce(&x, &cfg).unwrap_or_else(|e| panic!("{method:?}: {e}"));
        worst_imag = worst_imag.max(out.diagnostics.embed_imag_residue);
        worst_constraint = worst_constraint.max(constraint_residual(&out, &x, &cfg));
    }
    check(
        "reality-and-constraints",
        worst_imag < 1e-10 && worst_constraint < 1e-8,
        &format!("imag residue {worst_imag:.2e}, constraint residual {worst_constraint:.2e}"),
    );
}

/// Criterion: t-SVD reconstructs and its singular tubes match per-slice SVDs.
#[test]
fn tsvd_reconstruction_and_singular_tubes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11_311);
    let mut worst_rec: f64 = 0.0;
    let mut worst_sv: f64 = 0.0;
    for _ in 0..20 {
        let m = rng.random_range(2..=5);
        let n = rng.random_range(2..=5);
        let p = rng.random_range(1..=4);
        let a = random_tensor(m, n, p, &mut rng);
        let f = tsvd(&a).unwrap();
        let rec = tprod(&tprod(&f.u, &f.s).unwrap(), &ttranspose(&f.v)).unwrap();
        worst_rec = worst_rec.max(max_entry_diff(&a, &rec) / frob_norm(&a).max(1e-300));
        // Oracle: singular values of each Fourier slice via the Gram spectrum.
        let ah = fft3(&a);
        let sh = fft3(&f.s);
        for k in 0..p {
            let s = ah.frontal_slice(k);
            let gram = s.adjoint().mul(&s).hermitize();
            let (eig, _) = hermitian_eig(&gram).unwrap();
            let mut sv: Vec<f64> = eig.iter().map(|l| l.max(0.0).sqrt()).collect();
            sv.reverse();
            for (i, &want) in sv.iter().take(m.min(n)).enumerate() {
                worst_sv = worst_sv.max((sh.get(i, i, k).re - want).abs());
            }
        }
    }
    check(
        "tsvd",
        worst_rec < 1e-8 && worst_sv < 1e-8,
        &format!("reconstruction residual {worst_rec:.2e}, singular-tube residual {worst_sv:.2e}"),
    );
}

/// Criterion: MLLE reconstructs a noiseless planar manifold and MLE separates
/// two blobs with a 1-D embedding.
#[test]
fn manifold_sanity() {
    // Noiseless 2-D plane in 5-D, n = 60, k = 6, p = 1.
    let mut rng = ChaCha8Rng::seed_from_u64(60_601);
    let basis: Vec<[f64; 5]> = (0..2)
        .map(|_| {
            let mut v = [0.0; 5];
            for e in v.iter_mut() {
                *e = rng.random_range(-1.0..1.0);
            }
            v
        })
        .collect();
    let params: Vec<(f64, f64)> = (0..60)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let x = Tensor3::from_fn(5, 60, 1, |i, j, _| {
        params[j].0 * basis[0][i] + params[j].1 * basis[1][i]
    });
    let mut cfg = ReductionConfig::new(Method::Mlle, 2);
    cfg.neighbors = 6;
    cfg.lle_reg = 1e-12;
    let out = methods::mlle(&x, &cfg).unwrap();
    let mlle_objective = out.diagnostics.objective;

    // Two separated blobs, n = 60, connected graph, d = 1, 1-NN.
    let blobs = synth_blobs(2, 30, 5, 2, 0.15, 404);
    let mut mcfg = ReductionConfig::new(Method::Mle, 1);
    mcfg.neighbors = 35;
    let report = run_experiment(&blobs, &mcfg, 5, 1, 404).unwrap();
    check(
        "manifold-sanity",
        mlle_objective < 1e-6 && report.mean_accuracy >= 95.0,
        &format!(
            "MLLE planar objective {mlle_objective:.2e}, MLE 1-NN accuracy {:.1}%",
            report.mean_accuracy
        ),
    );
}

/// Criterion: on the ring data the Gaussian-kernel MKPCA embedding keeps the
/// classes KNN-separable while the linear MPCA embedding does not.
#[test]
fn kernel_nonlinearity() {
    let ds = synth_rings(100, 0.05, 2, 40);
    let kernel_cfg = ReductionConfig::new(Method::Mkpca, 2);
    let linear_cfg = ReductionConfig::new(Method::Mpca, 2);
    let kernel = run_experiment(&ds, &kernel_cfg, 5, 3, 40).unwrap();
    let linear = run_experiment(&ds, &linear_cfg, 5, 3, 40).unwrap();
    check(
        "kernel-nonlinearity",
        kernel.mean_accuracy >= 90.0 && linear.mean_accuracy <= 70.0,
        &format!(
            "MKPCA {:.1}% (need >= 90), MPCA {:.1}% (need <= 70)",
            kernel.mean_accuracy, linear.mean_accuracy
        ),
    );
}

/// Criterion: the full protocol on separable blobs is perfect, deterministic,
/// and fast.
#[test]
fn end_to_end_protocol() {
    let start = Instant::now();
    let ds = synth_blobs(4, 50, 20, 2, 0.1, 777);
    let cfg = ReductionConfig::new(Method::Mpca, 5);
    let r1 = run_experiment(&ds, &cfg, 5, 3, 777).unwrap();
    let r2 = run_experiment(&ds, &cfg, 5, 3, 777).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let deterministic = r1.fold_accuracies == r2.fold_accuracies
        && r1.mean_accuracy == r2.mean_accuracy
        && r1.config == r2.config;
    check(
        "end-to-end-protocol",
        r1.mean_accuracy == 100.0 && deterministic && secs < 5.0,
        &format!(
            "mean accuracy {:.1}%, deterministic {deterministic}, {secs:.2}s",
            r1.mean_accuracy
        ),
    );
}

/// Benchmark-scale accuracy tables need external datasets and third-party
/// classifiers, so the property suites above stand in for them; this test
/// keeps their qualitative trend: accuracy nondecreasing in the target
/// dimension on the blob data (2-point tolerance).
#[test]
fn accuracy_trend_in_dimension() {
    let ds = synth_blobs(4, 50, 20, 2, 0.35, 909);
    let mut accs = Vec::new();
    for d in [2usize, 4, 6] {
        let cfg = ReductionConfig::new(Method::Mpca, d);
        let r = run_experiment(&ds, &cfg, 5, 3, 909).unwrap();
        accs.push(r.mean_accuracy);
    }
    let nondecreasing = accs.windows(2).all(|w| w[1] >= w[0] - 2.0);
    check(
        "accuracy-trend-in-dimension",
        nondecreasing,
        &format!("MPCA accuracies at d = 2,4,6: {accs:?}"),
    );
}
