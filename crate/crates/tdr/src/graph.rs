//! Neighborhood graphs and weight tensors: kNN search on slice columns,
//! Gaussian affinities, locally-linear reconstruction weights, degree and
//! Laplacian matrices, and the median bandwidth heuristic.
//!
//! Weight construction is applied independently to each given slice (the
//! Fourier slices of the data in the default pipeline), so distances are
//! modulus distances and LLE weights may come out complex; the Gaussian kinds
//! are always real.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{cholesky, solve_lower, solve_lower_adjoint, CMat, RMat};
use crate::tensor::Tensor3;

pub type C64 = Complex64;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("k = {k} out of range 1..={max} for {n} samples")]
    KOutOfRange { k: usize, max: usize, n: usize },
    #[error("sigma must be positive, got {sigma}")]
    SigmaNonPositive { sigma: f64 },
    #[error("singular local Gram system at sample {sample} (duplicate neighbors with no regularization?)")]
    SingularLocalGram { sample: usize },
    #[error("operation requires {expected:?} weights, got {found:?}")]
    WrongWeightKind {
        expected: WeightKind,
        found: WeightKind,
    },
    #[error("all samples are identical (median pairwise distance is zero)")]
    AllSamplesIdentical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightKind {
    /// Gaussian weights on kNN edges, rows normalized to sum 1.
    GaussianNormalized,
    /// Locally-linear reconstruction weights, rows sum to 1.
    LleReconstruction,
    /// Symmetric Gaussian affinities with zero diagonal (for Laplacians).
    GaussianAffinity,
}

/// How degree matrices are built from an affinity matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DegreeMode {
    /// D = diag(W·1); the standard graph Laplacian with L·1 = 0.
    RowSum,
    /// Unit degrees from the literal self-affinity exp(0) = 1, so D = I.
    /// Kept behind a flag for comparison runs.
    PaperDiagonal,
}

/// Per-slice weight matrices plus the neighbor lists that generated them.
#[derive(Debug, Clone)]
pub struct WeightGraph {
    n: usize,
    k: usize,
    kind: WeightKind,
    slices: Vec<CMat>,
    neighbors: Vec<Vec<Vec<usize>>>,
}

impl WeightGraph {
    /// Gaussian weights built independently on each slice of columns.
    /// With `normalize` the rows are scaled to sum 1 (reconstruction kind);
    /// without it the matrix is symmetrized by w <- max(w, wᵀ) and the
    /// diagonal zeroed (affinity kind).
    pub fn gaussian(
        slices: &[CMat],
        k: usize,
        sigma: f64,
        normalize: bool,
    ) -> Result<Self, GraphError> {
        assert!(!slices.is_empty());
        if sigma <= 0.0 {
            return Err(GraphError::SigmaNonPositive { sigma });
        }
        let n = slices[0].cols();
        let mut mats = Vec::with_capacity(slices.len());
        let mut nbrs = Vec::with_capacity(slices.len());
        for cols in slices {
            let (w, nb) = gaussian_slice(cols, k, sigma, normalize)?;
            mats.push(w);
            nbrs.push(nb);
        }
        let kind = if normalize {
            WeightKind::GaussianNormalized
        } else {
            WeightKind::GaussianAffinity
        };
        Ok(Self {
            n,
            k,
            kind,
            slices: mats,
            neighbors: nbrs,
        })
    }

    /// Locally-linear reconstruction weights on each slice of columns.
    pub fn lle(slices: &[CMat], k: usize, reg: f64) -> Result<Self, GraphError> {
        assert!(!slices.is_empty());
        let n = slices[0].cols();
        let mut mats = Vec::with_capacity(slices.len());
        let mut nbrs = Vec::with_capacity(slices.len());
        for cols in slices {
            let (w, nb) = lle_slice(cols, k, reg)?;
            mats.push(w);
            nbrs.push(nb);
        }
        Ok(Self {
            n,
            k,
            kind: WeightKind::LleReconstruction,
            slices: mats,
            neighbors: nbrs,
        })
    }

    /// Wrap externally built affinity matrices (symmetric, zero diagonal).
    pub fn from_affinity(slices: Vec<CMat>, neighbors: Vec<Vec<Vec<usize>>>, k: usize) -> Self {
        assert!(!slices.is_empty());
        let n = slices[0].cols();
        Self {
            n,
            k,
            kind: WeightKind::GaussianAffinity,
            slices,
            neighbors,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn slice_count(&self) -> usize {
        self.slices.len()
    }

    pub fn slice(&self, i: usize) -> &CMat {
        &self.slices[i]
    }

    pub fn neighbors(&self, i: usize) -> &[Vec<usize>] {
        &self.neighbors[i]
    }
}

/// Per-slice degree diagonals and Laplacians L = D − W.
#[derive(Debug, Clone)]
pub struct LaplacianPair {
    pub degrees: Vec<Vec<f64>>,
    pub laplacians: Vec<CMat>,
}

/// Squared modulus-Frobenius distances between the columns of a matrix.
pub fn pairwise_sqdist(cols: &CMat) -> RMat {
    let n = cols.cols();
    let mut d = RMat::zeros(n, n);
    for l in 0..n {
        for q in (l + 1)..n {
            let mut s = 0.0;
            let a = cols.col(l);
            let b = cols.col(q);
            for r in 0..a.len() {
                s += (a[r] - b[r]).norm_sqr();
            }
            d.set(l, q, s);
            d.set(q, l, s);
        }
    }
    d
}

/// k nearest neighbors of every sample, self excluded, distance ties broken
/// by the lower index.
pub fn knn_graph(dist: &RMat, k: usize) -> Result<Vec<Vec<usize>>, GraphError> {
    let n = dist.rows();
    if k < 1 || k > n.saturating_sub(1) {
        return Err(GraphError::KOutOfRange {
            k,
            max: n.saturating_sub(1),
            n,
        });
    }
    let mut out = Vec::with_capacity(n);
    for l in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&q| q != l).collect();
        order.sort_by(|&a, &b| dist.get(l, a).total_cmp(&dist.get(l, b)).then(a.cmp(&b)));
        order.truncate(k);
        out.push(order);
    }
    Ok(out)
}

/// Gaussian weights on the kNN edges of one slice; see [`WeightGraph::gaussian`].
pub fn gaussian_weights(
    cols: &CMat,
    k: usize,
    sigma: f64,
    normalize: bool,
) -> Result<WeightGraph, GraphError> {
    WeightGraph::gaussian(std::slice::from_ref(cols), k, sigma, normalize)
}

/// LLE reconstruction weights of one slice; see [`WeightGraph::lle`].
pub fn lle_weights(cols: &CMat, k: usize, reg: f64) -> Result<WeightGraph, GraphError> {
    WeightGraph::lle(std::slice::from_ref(cols), k, reg)
}

fn gaussian_slice(
    cols: &CMat,
    k: usize,
    sigma: f64,
    normalize: bool,
) -> Result<(CMat, Vec<Vec<usize>>), GraphError> {
    let n = cols.cols();
    let dist = pairwise_sqdist(cols);
    let nb = knn_graph(&dist, k)?;
    let mut w = CMat::zeros(n, n);
    let denom = 2.0 * sigma * sigma;
    for l in 0..n {
        for &q in &nb[l] {
            w.set(l, q, C64::new((-dist.get(l, q) / denom).exp(), 0.0));
        }
    }
    if normalize {
        for l in 0..n {
            let mut s = 0.0;
            for q in 0..n {
                s += w.get(l, q).re;
            }
            // Raw weights are exp(-d²/2σ²) > 0 on at least k edges.
            for q in 0..n {
                let v = w.get(l, q).re / s;
                w.set(l, q, C64::new(v, 0.0));
            }
        }
        Ok((w, nb))
    } else {
        // Symmetrize over the neighborhood union; no self-weights.
        let mut sym = CMat::zeros(n, n);
        for l in 0..n {
            for q in 0..n {
                if l != q {
                    let v = w.get(l, q).re.max(w.get(q, l).re);
                    sym.set(l, q, C64::new(v, 0.0));
                }
            }
        }
        let union: Vec<Vec<usize>> = (0..n)
            .map(|l| (0..n).filter(|&q| sym.get(l, q).re != 0.0).collect())
            .collect();
        Ok((sym, union))
    }
}

fn lle_slice(cols: &CMat, k: usize, reg: f64) -> Result<(CMat, Vec<Vec<usize>>), GraphError> {
    let n = cols.cols();
    let dist = pairwise_sqdist(cols);
    let nb = knn_graph(&dist, k)?;
    let mut w = CMat::zeros(n, n);
    for l in 0..n {
        let xl = cols.col(l);
        // Local Gram of the centered neighbor differences.
        let mut c = CMat::zeros(k, k);
        for a in 0..k {
            let xa = cols.col(nb[l][a]);
            for b in a..k {
                let xb = cols.col(nb[l][b]);
                let mut s = C64::new(0.0, 0.0);
                for r in 0..xl.len() {
                    s += (xl[r] - xa[r]).conj() * (xl[r] - xb[r]);
                }
                c.set(a, b, s);
                c.set(b, a, s.conj());
            }
        }
        let mut trace = 0.0;
        for a in 0..k {
            trace += c.get(a, a).re;
        }
        let shift = reg * trace;
        for a in 0..k {
            let v = c.get(a, a) + shift;
            c.set(a, a, v);
        }
        let l_factor = cholesky(&c, 0.0).ok_or(GraphError::SingularLocalGram { sample: l })?;
        let ones = CMat::from_fn(k, 1, |_, _| C64::new(1.0, 0.0));
        let y = solve_lower(&l_factor, &ones);
        let sol = solve_lower_adjoint(&l_factor, &y);
        let mut sum = C64::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        for a in 0..k {
            sum += sol.get(a, 0);
            abs_sum += sol.get(a, 0).norm();
        }
        if sum.norm() <= 1e-12 * abs_sum.max(1e-300) {
            return Err(GraphError::SingularLocalGram { sample: l });
        }
        for a in 0..k {
            w.set(l, nb[l][a], sol.get(a, 0) / sum);
        }
    }
    Ok((w, nb))
}

/// Degree and Laplacian matrices of an affinity graph.
pub fn laplacian(w: &WeightGraph, mode: DegreeMode) -> Result<LaplacianPair, GraphError> {
    if w.kind() != WeightKind::GaussianAffinity {
        return Err(GraphError::WrongWeightKind {
            expected: WeightKind::GaussianAffinity,
            found: w.kind(),
        });
    }
    let n = w.n();
    let mut degrees = Vec::with_capacity(w.slice_count());
    let mut laplacians = Vec::with_capacity(w.slice_count());
    for s in 0..w.slice_count() {
        let ws = w.slice(s);
        let deg: Vec<f64> = match mode {
            DegreeMode::RowSum => (0..n)
                .map(|l| (0..n).map(|q| ws.get(l, q).re).sum())
                .collect(),
            DegreeMode::PaperDiagonal => vec![1.0; n],
        };
        let mut l = ws.scale(C64::new(-1.0, 0.0));
        for (i, &d) in deg.iter().enumerate() {
            let v = l.get(i, i) + d;
            l.set(i, i, v);
        }
        degrees.push(deg);
        laplacians.push(l);
    }
    Ok(LaplacianPair {
        degrees,
        laplacians,
    })
}

/// Bandwidth heuristic: σ = sqrt(median of pairwise squared distances / 2),
/// with the samples taken as lateral slices of the tensor.
pub fn median_bandwidth(x: &Tensor3) -> Result<f64, GraphError> {
    let n = x.n();
    assert!(n >= 2, "median bandwidth needs at least two samples");
    let cols = x.lateral_columns();
    let dist = pairwise_sqdist(&cols);
    let mut vals = Vec::with_capacity(n * (n - 1) / 2);
    for l in 0..n {
        for q in (l + 1)..n {
            vals.push(dist.get(l, q));
        }
    }
    vals.sort_by(f64::total_cmp);
    let mid = vals.len() / 2;
    let median = if vals.len() % 2 == 1 {
        vals[mid]
    } else {
        0.5 * (vals[mid - 1] + vals[mid])
    };
    if median <= 0.0 {
        return Err(GraphError::AllSamplesIdentical);
    }
    Ok((median / 2.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real_cols(vals: &[&[f64]]) -> CMat {
        // vals[j] is column j.
        let n = vals.len();
        let m = vals[0].len();
        CMat::from_fn(m, n, |r, cc| c(vals[cc][r], 0.0))
    }

    #[test]
    fn pairwise_sqdist_cases() {
        let cols = real_cols(&[&[1.0, 2.0], &[1.0, 2.0]]);
        let d = pairwise_sqdist(&cols);
        assert_eq!(d.get(0, 1), 0.0);
        let e = real_cols(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(pairwise_sqdist(&e).get(0, 1), 2.0);
        // Random complex slice against a direct loop.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cols = CMat::from_fn(3, 5, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let d = pairwise_sqdist(&cols);
        for l in 0..5 {
            assert_eq!(d.get(l, l), 0.0);
            for q in 0..5 {
                let mut s = 0.0;
                for r in 0..3 {
                    s += (cols.get(r, l) - cols.get(r, q)).norm_sqr();
                }
                assert!((d.get(l, q) - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn knn_tie_breaks_by_index() {
        // Three collinear points: the middle one is equidistant from both
        // ends, so its single neighbor is the lower index.
        let cols = real_cols(&[&[0.0], &[1.0], &[2.0]]);
        let nb = knn_graph(&pairwise_sqdist(&cols), 1).unwrap();
        assert_eq!(nb[1], vec![0]);
        let all = knn_graph(&pairwise_sqdist(&cols), 2).unwrap();
        for (l, list) in all.iter().enumerate() {
            assert_eq!(list.len(), 2);
            assert!(!list.contains(&l));
        }
        assert!(matches!(
            knn_graph(&pairwise_sqdist(&cols), 3),
            Err(GraphError::KOutOfRange { .. })
        ));
    }

    #[test]
    fn knn_matches_exhaustive_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cols = CMat::from_fn(2, 10, |_, _| c(rng.random_range(-1.0..1.0), 0.0));
        let d = pairwise_sqdist(&cols);
        let nb = knn_graph(&d, 3).unwrap();
        for l in 0..10 {
            let mut pairs: Vec<(f64, usize)> = (0..10)
                .filter(|&q| q != l)
                .map(|q| (d.get(l, q), q))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let expect: Vec<usize> = pairs.iter().take(3).map(|p| p.1).collect();
            assert_eq!(nb[l], expect);
        }
    }

    #[test]
    fn gaussian_weight_values() {
        // Coincident neighbor -> raw weight exp(0) = 1.
        let cols = real_cols(&[&[0.0], &[0.0], &[5.0]]);
        let g = gaussian_weights(&cols, 1, 1.0, false).unwrap();
        assert!((g.slice(0).get(0, 1).re - 1.0).abs() < 1e-15);
        // Single neighbor, normalized -> weight exactly 1 (the far point's
        // neighbor is index 0 by the tie rule).
        let gn = gaussian_weights(&cols, 1, 1.0, true).unwrap();
        assert!((gn.slice(0).get(2, 0).re - 1.0).abs() < 1e-15);
        // Four points on a line, k = 2, sigma = 1, against the loop oracle.
        let line = real_cols(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        let w = gaussian_weights(&line, 2, 1.0, true).unwrap();
        let raw = |d2: f64| (-d2 / 2.0).exp();
        // Point 0 neighbors {1, 2} with distances² {1, 4}.
        let z = raw(1.0) + raw(4.0);
        assert!((w.slice(0).get(0, 1).re - raw(1.0) / z).abs() < 1e-12);
        assert!((w.slice(0).get(0, 2).re - raw(4.0) / z).abs() < 1e-12);
        assert_eq!(w.slice(0).get(0, 3).re, 0.0);
        assert!(matches!(
            gaussian_weights(&line, 2, 0.0, true),
            Err(GraphError::SigmaNonPositive { .. })
        ));
    }

    #[test]
    fn gaussian_affinity_is_symmetric_zero_diag() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cols = CMat::from_fn(2, 8, |_, _| c(rng.random_range(-1.0..1.0), 0.0));
        let g = gaussian_weights(&cols, 3, 0.7, false).unwrap();
        let w = g.slice(0);
        for l in 0..8 {
            assert_eq!(w.get(l, l).re, 0.0);
            for q in 0..8 {
                assert_eq!(w.get(l, q).re, w.get(q, l).re);
                assert!(w.get(l, q).re >= 0.0 && w.get(l, q).re <= 1.0);
            }
        }
    }

    #[test]
    fn lle_weights_midpoint_and_k1() {
        // A point midway between its two neighbors on a line: weights (1/2, 1/2).
        let cols = real_cols(&[&[0.0], &[1.0], &[2.0]]);
        let w = lle_weights(&cols, 2, 1e-3).unwrap();
        assert!((w.slice(0).get(1, 0).re - 0.5).abs() < 1e-10);
        assert!((w.slice(0).get(1, 2).re - 0.5).abs() < 1e-10);
        // k = 1: the sum constraint forces weight 1.
        let w1 = lle_weights(&cols, 1, 1e-3).unwrap();
        assert!((w1.slice(0).get(0, 1).re - 1.0).abs() < 1e-12);
    }

    /// Dense real solve by Gaussian elimination with partial pivoting,
    /// test-local so the KKT oracle stays independent of the library path.
    fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for row in (col + 1)..n {
                let f = a[row][col] / a[col][col];
                for cc in col..n {
                    a[row][cc] -= f * a[col][cc];
                }
                b[row] -= f * b[col];
            }
        }
        for col in (0..n).rev() {
            b[col] /= a[col][col];
            for row in 0..col {
                b[row] -= a[row][col] * b[col];
            }
        }
    }

    #[test]
    fn lle_weights_match_kkt_oracle() {
        // Random 2-D point cloud, k = 3; compare against the KKT system of the
        // regularized constrained least-squares problem.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pts: Vec<[f64; 2]> = (0..8)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let cols = CMat::from_fn(2, 8, |r, cc| c(pts[cc][r], 0.0));
        let reg = 1e-3;
        let k = 3;
        let w = lle_weights(&cols, k, reg).unwrap();
        let nb = w.neighbors(0).to_vec();
        for l in 0..8 {
            // Build the regularized local Gram.
            let mut cmat = vec![vec![0.0; k]; k];
            for a in 0..k {
                for b in 0..k {
                    let mut s = 0.0;
                    for r in 0..2 {
                        s += (pts[l][r] - pts[nb[l][a]][r]) * (pts[l][r] - pts[nb[l][b]][r]);
                    }
                    cmat[a][b] = s;
                }
            }
            let trace: f64 = (0..k).map(|a| cmat[a][a]).sum();
            for a in 0..k {
                cmat[a][a] += reg * trace;
            }
            // KKT saddle system [2C 1; 1ᵀ 0][w; μ] = [0; 1].
            let mut kkt = vec![vec![0.0; k + 1]; k + 1];
            let mut rhs = vec![0.0; k + 1];
            for a in 0..k {
                for b in 0..k {
                    kkt[a][b] = 2.0 * cmat[a][b];
                }
                kkt[a][k] = 1.0;
                kkt[k][a] = 1.0;
            }
            rhs[k] = 1.0;
            solve_dense(&mut kkt, &mut rhs);
            // Residual of the reconstruction agrees between the two routes.
            let recon = |wts: &[f64]| -> f64 {
                let mut s = 0.0;
                for r in 0..2 {
                    let mut v = pts[l][r];
                    for a in 0..k {
                        v -= wts[a] * pts[nb[l][a]][r];
                    }
                    s += v * v;
                }
                s.sqrt()
            };
            let lib_w: Vec<f64> = (0..k).map(|a| w.slice(0).get(l, nb[l][a]).re).collect();
            let oracle_w: Vec<f64> = rhs[..k].to_vec();
            assert!((recon(&lib_w) - recon(&oracle_w)).abs() < 1e-8);
            for a in 0..k {
                assert!((lib_w[a] - oracle_w[a]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn lle_duplicate_neighbors_without_reg_is_singular() {
        let cols = real_cols(&[&[0.0, 0.0], &[1.0, 1.0], &[1.0, 1.0], &[5.0, 5.0]]);
        match lle_weights(&cols, 2, 0.0) {
            Err(GraphError::SingularLocalGram { .. }) => {}
            other => panic!("expected singular Gram, got {other:?}"),
        }
    }

    #[test]
    fn laplacian_two_node_and_complete_graph() {
        // Two nodes joined by weight w.
        let wv = 0.6;
        let aff = CMat::from_fn(2, 2, |r, cc| if r != cc { c(wv, 0.0) } else { c(0.0, 0.0) });
        let g = WeightGraph::from_affinity(vec![aff], vec![vec![vec![1], vec![0]]], 1);
        let lp = laplacian(&g, DegreeMode::RowSum).unwrap();
        let l = &lp.laplacians[0];
        assert!((l.get(0, 0).re - wv).abs() < 1e-15);
        assert!((l.get(0, 1).re + wv).abs() < 1e-15);
        let (e, _) = crate::spectral::hermitian_eig(l).unwrap();
        assert!(e[0].abs() < 1e-12 && (e[1] - 2.0 * wv).abs() < 1e-12);
        // Complete graph with unit weights on 3 nodes: eigenvalues (0, 3, 3).
        let aff3 = CMat::from_fn(
            3,
            3,
            |r, cc| if r != cc { c(1.0, 0.0) } else { c(0.0, 0.0) },
        );
        let g3 = WeightGraph::from_affinity(
            vec![aff3],
            vec![vec![vec![1, 2], vec![0, 2], vec![0, 1]]],
            2,
        );
        let lp3 = laplacian(&g3, DegreeMode::RowSum).unwrap();
        let (e3, _) = crate::spectral::hermitian_eig(&lp3.laplacians[0]).unwrap();
        assert!(e3[0].abs() < 1e-12);
        assert!((e3[1] - 3.0).abs() < 1e-12 && (e3[2] - 3.0).abs() < 1e-12);
        // Paper-literal degrees are the unit self-weights.
        let lp_paper = laplacian(&g3, DegreeMode::PaperDiagonal).unwrap();
        assert!(lp_paper.degrees[0].iter().all(|d| (d - 1.0).abs() < 1e-15));
    }

    #[test]
    fn laplacian_requires_affinity_kind() {
        let cols = real_cols(&[&[0.0], &[1.0], &[2.0]]);
        let w = gaussian_weights(&cols, 1, 1.0, true).unwrap();
        assert!(matches!(
            laplacian(&w, DegreeMode::RowSum),
            Err(GraphError::WrongWeightKind { .. })
        ));
    }

    #[test]
    fn median_bandwidth_cases() {
        // Two samples at distance 2 -> sigma = sqrt(4/2) = sqrt(2).
        let x = Tensor3::from_vec(1, 2, 1, vec![0.0, 2.0]).unwrap();
        assert!((median_bandwidth(&x).unwrap() - 2.0f64.sqrt()).abs() < 1e-14);
        // All pairwise squared distances equal c -> sigma = sqrt(c/2).
        // Simplex in R^3: distances² all 2.
        let mut s = Tensor3::zeros(3, 3, 1);
        for j in 0..3 {
            s.set(j, j, 0, 1.0);
        }
        assert!((median_bandwidth(&s).unwrap() - 1.0).abs() < 1e-14);
        // Identical samples.
        let z = Tensor3::zeros(2, 3, 1);
        assert!(matches!(
            median_bandwidth(&z),
            Err(GraphError::AllSamplesIdentical)
        ));
        // Random set against a sort oracle.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x = Tensor3::from_fn(3, 10, 2, |_, _, _| rng.random_range(-1.0..1.0));
        let d = pairwise_sqdist(&x.lateral_columns());
        let mut vals = Vec::new();
        for l in 0..10 {
            for q in (l + 1)..10 {
                vals.push(d.get(l, q));
            }
        }
        vals.sort_by(f64::total_cmp);
        let med = if vals.len() % 2 == 1 {
            vals[vals.len() / 2]
        } else {
            0.5 * (vals[vals.len() / 2 - 1] + vals[vals.len() / 2])
        };
        assert!((median_bandwidth(&x).unwrap() - (med / 2.0).sqrt()).abs() < 1e-12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn row_stochastic_kinds_sum_to_one(seed in 0u64..500, k in 1usize..5, lle in proptest::bool::ANY) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n = 8;
                let cols = CMat::from_fn(3, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                let g = if lle {
                    WeightGraph::lle(&[cols], k, 1e-3).unwrap()
                } else {
                    WeightGraph::gaussian(&[cols], k, 1.0, true).unwrap()
                };
                for l in 0..n {
                    let mut s = C64::new(0.0, 0.0);
                    for q in 0..n {
                        s += g.slice(0).get(l, q);
                    }
                    prop_assert!((s - C64::new(1.0, 0.0)).norm() < 1e-10);
                }
            }

            #[test]
            fn lle_weights_are_constrained_minimizers(seed in 0u64..200) {
                // Random sum-preserving perturbations never reduce the residual.
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n = 7;
                let k = 3;
                let pts: Vec<[f64; 3]> = (0..n).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
                let cols = CMat::from_fn(3, n, |r, cc| C64::new(pts[cc][r], 0.0));
                let reg = 1e-6;
                let g = WeightGraph::lle(&[cols], k, reg).unwrap();
                let nb = g.neighbors(0);
                let objective = |l: usize, wts: &[f64]| -> f64 {
                    // Regularized objective: wᵀ(C + reg·tr(C)·I)w.
                    let mut c = vec![vec![0.0; k]; k];
                    for a in 0..k {
                        for b in 0..k {
                            let mut s = 0.0;
                            for r in 0..3 {
                                s += (pts[l][r] - pts[nb[l][a]][r]) * (pts[l][r] - pts[nb[l][b]][r]);
                            }
                            c[a][b] = s;
                        }
                    }
                    let tr: f64 = (0..k).map(|a| c[a][a]).sum();
                    let mut v = 0.0;
                    for a in 0..k {
                        for b in 0..k {
                            v += wts[a] * c[a][b] * wts[b];
                        }
                        v += reg * tr * wts[a] * wts[a];
                    }
                    v
                };
                for l in 0..n {
                    let base: Vec<f64> = (0..k).map(|a| g.slice(0).get(l, nb[l][a]).re).collect();
                    let v0 = objective(l, &base);
                    for _ in 0..20 {
                        let mut pert = base.clone();
                        // Zero-sum perturbation keeps the constraint.
                        let a = rng.random_range(0..k);
                        let mut b = rng.random_range(0..k);
                        if a == b { b = (b + 1) % k; }
                        let eps = rng.random_range(-0.1..0.1);
                        pert[a] += eps;
                        pert[b] -= eps;
                        prop_assert!(objective(l, &pert) >= v0 - 1e-8);
                    }
                }
            }

            #[test]
            fn rowsum_laplacian_is_psd_with_constant_kernel(seed in 0u64..500, k in 1usize..4) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n = 7;
                let cols = CMat::from_fn(2, n, |_, _| C64::new(rng.random_range(-1.0..1.0), 0.0));
                let g = WeightGraph::gaussian(&[cols], k, 0.8, false).unwrap();
                let lp = laplacian(&g, DegreeMode::RowSum).unwrap();
                let l = &lp.laplacians[0];
                // L · 1 = 0.
                for r in 0..n {
                    let mut s = 0.0;
                    for q in 0..n {
                        s += l.get(r, q).re;
                    }
                    prop_assert!(s.abs() < 1e-10);
                }
                let (e, _) = crate::spectral::hermitian_eig(l).unwrap();
                prop_assert!(e[0] > -1e-10);
            }

            #[test]
            fn knn_is_permutation_equivariant(seed in 0u64..500) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n = 9;
                let cols = CMat::from_fn(2, n, |_, _| C64::new(rng.random_range(-1.0..1.0), 0.0));
                let nb = knn_graph(&pairwise_sqdist(&cols), 3).unwrap();
                // Rotate sample order by one.
                let perm: Vec<usize> = (0..n).map(|j| (j + 1) % n).collect();
                let pcols = CMat::from_fn(2, n, |r, cc| cols.get(r, perm[cc]));
                let pnb = knn_graph(&pairwise_sqdist(&pcols), 3).unwrap();
                let inv: Vec<usize> = { let mut v = vec![0; n]; for (i, &p) in perm.iter().enumerate() { v[p] = i; } v };
                for j in 0..n {
                    let mut expect: Vec<usize> = nb[perm[j]].iter().map(|&q| inv[q]).collect();
                    let mut got = pnb[j].clone();
                    expect.sort_unstable();
                    got.sort_unstable();
                    prop_assert_eq!(expect, got);
                }
            }
        }
    }
}
