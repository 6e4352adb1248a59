use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tdr::graph::{DegreeMode, GraphError};
use tdr::methods::{
    Bandwidth, GramMode, KernelKind, Method, MethodError, ReductionConfig, WeightDomain,
    WeightsChoice,
};
use tdr::pipeline::{self, PipelineError};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Parser)]
#[command(
    name = "tdr",
    version,
    about = "t-product dimensionality reduction for third-order tensors"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reduce a tensor and write the embedding.
    Reduce(ReduceArgs),
    /// Reduce, then cross-validate a KNN classifier on the embedding.
    Eval(EvalArgs),
    /// Generate synthetic datasets.
    Synth {
        #[command(subcommand)]
        what: SynthCmd,
    },
}

#[derive(Args)]
struct MethodOpts {
    /// mpca | monpp | mkpca | mkonpp | mlle | mle
    #[arg(long)]
    method: String,
    /// Target dimension d.
    #[arg(long)]
    dim: usize,
    /// Neighbors per sample for the graph-based methods.
    #[arg(long, default_value_t = 5)]
    neighbors: usize,
    /// Bandwidth: a positive number, or "median" for the pairwise heuristic.
    #[arg(long, default_value = "median")]
    sigma: String,
    /// gaussian | rbf | linear
    #[arg(long, default_value = "gaussian")]
    kernel: String,
    /// RBF kernel parameter c.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Degree matrix mode for MLE: rowsum | paper
    #[arg(long, default_value = "rowsum")]
    degree: String,
    /// Gram construction: shared | per-slice
    #[arg(long, default_value = "shared")]
    gram: String,
    /// Reconstruction weights for MONPP/MLLE: lle | gaussian
    #[arg(long, default_value = "lle")]
    weights: String,
    /// Where neighborhood weights are built: fourier | original
    #[arg(long = "weight-domain", default_value = "fourier")]
    weight_domain: String,
    /// Regularization for the LLE local Gram systems.
    #[arg(long = "lle-reg", default_value_t = 1e-3)]
    lle_reg: f64,
    /// Scale kernel-PCA rows by 1/sqrt(lambda).
    #[arg(long = "kpca-unit-scale", default_value_t = false)]
    kpca_unit_scale: bool,
}

impl MethodOpts {
    fn to_config(&self, seed: u64) -> Result<ReductionConfig, String> {
        let method = Method::parse(&self.method)
            .ok_or_else(|| format!("unknown method '{}'", self.method))?;
        if self.dim < 1 {
            return Err("--dim must be at least 1".into());
        }
        let bandwidth = if self.sigma.eq_ignore_ascii_case("median") {
            Bandwidth::Median
        } else {
            let s: f64 = self
                .sigma
                .parse()
                .map_err(|_| format!("bad --sigma '{}'", self.sigma))?;
            if s <= 0.0 {
                return Err("--sigma must be positive".into());
            }
            Bandwidth::Fixed(s)
        };
        let kernel = match self.kernel.as_str() {
            "gaussian" => KernelKind::Gaussian,
            "rbf" => {
                if self.c <= 0.0 {
                    return Err("--c must be positive for the rbf kernel".into());
                }
                KernelKind::Rbf { c: self.c }
            }
            "linear" => KernelKind::Linear,
            other => return Err(format!("unknown kernel '{other}'")),
        };
        let degree_mode = match self.degree.as_str() {
            "rowsum" => DegreeMode::RowSum,
            "paper" => DegreeMode::PaperDiagonal,
            other => return Err(format!("unknown degree mode '{other}'")),
        };
        let gram_mode = match self.gram.as_str() {
            "shared" => GramMode::Shared,
            "per-slice" => GramMode::PerSlice,
            other => return Err(format!("unknown gram mode '{other}'")),
        };
        let weights = match self.weights.as_str() {
            "lle" => WeightsChoice::Lle,
            "gaussian" => WeightsChoice::Gaussian,
            other => return Err(format!("unknown weights kind '{other}'")),
        };
        let weight_domain = match self.weight_domain.as_str() {
            "fourier" => WeightDomain::Fourier,
            "original" => WeightDomain::Original,
            other => return Err(format!("unknown weight domain '{other}'")),
        };
        if self.lle_reg < 0.0 {
            return Err("--lle-reg must be nonnegative".into());
        }
        let mut cfg = ReductionConfig::new(method, self.dim);
        cfg.neighbors = self.neighbors;
        cfg.bandwidth = bandwidth;
        cfg.kernel = kernel;
        cfg.degree_mode = degree_mode;
        cfg.gram_mode = gram_mode;
        cfg.weights = weights;
        cfg.weight_domain = weight_domain;
        cfg.lle_reg = self.lle_reg;
        cfg.kpca_unit_scale = self.kpca_unit_scale;
        cfg.seed = seed;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    method: MethodOpts,
    /// Input tensor (T3F1).
    #[arg(long)]
    input: PathBuf,
    /// Output embedding tensor (T3F1).
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    method: MethodOpts,
    /// Input tensor (T3F1).
    #[arg(long)]
    input: PathBuf,
    /// Labels file, one integer per line.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long = "knn-k", default_value_t = 5)]
    knn_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SynthCmd {
    /// Gaussian class clusters around random centers.
    Blobs {
        #[arg(long)]
        classes: usize,
        #[arg(long = "per-class")]
        per_class: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0.1)]
        spread: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Two concentric rings with nuisance coordinates.
    Rings {
        #[arg(long = "n-per-ring")]
        n_per_ring: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
}

fn main() -> ExitCode {
    tdr::configure_thread_pool_from_env();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tdr: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn from_method(e: &MethodError) -> Self {
        let code = match e {
            MethodError::DOutOfRange { .. } => EXIT_USAGE,
            MethodError::Graph(GraphError::KOutOfRange { .. })
            | MethodError::Graph(GraphError::SigmaNonPositive { .. }) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::BadMagic
            | PipelineError::TruncatedFile { .. }
            | PipelineError::TrailingData { .. }
            | PipelineError::BadHeader { .. }
            | PipelineError::LabelCountMismatch { .. }
            | PipelineError::LabelParse { .. }
            | PipelineError::ClassTooSmall { .. }
            | PipelineError::TooFewClasses
            | PipelineError::EmptyTrainSet
            | PipelineError::Io(_)
            | PipelineError::Tensor(_) => EXIT_DATA,
            PipelineError::BadFoldCount { .. } | PipelineError::KnnKOutOfRange { .. } => EXIT_USAGE,
            PipelineError::Method(m) => return CliError::from_method(m),
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<MethodError> for CliError {
    fn from(e: MethodError) -> Self {
        CliError::from_method(&e)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Reduce(args) => {
            let cfg = args.method.to_config(0).map_err(CliError::usage)?;
            let x = pipeline::load_tensor(&args.input)?;
            let out = tdr::methods::reduce(&x, &cfg)?;
            pipeline::save_tensor(&out.y, &args.output)?;
            eprintln!(
                "reduced {:?} -> {:?} (objective {:.6e}, {:.3}s)",
                x.dims(),
                out.y.dims(),
                out.diagnostics.objective,
                out.diagnostics.reduce_seconds
            );
            Ok(())
        }
        Cmd::Eval(args) => {
            let cfg = args.method.to_config(args.seed).map_err(CliError::usage)?;
            let ds = pipeline::load_dataset(&args.input, &args.labels)?;
            let report = pipeline::run_experiment(&ds, &cfg, args.folds, args.knn_k, args.seed)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| CliError {
                code: EXIT_NUMERIC,
                message: e.to_string(),
            })?;
            println!("{json}");
            if let Some(path) = args.report {
                std::fs::write(&path, &json).map_err(|e| CliError::from(PipelineError::Io(e)))?;
            }
            Ok(())
        }
        Cmd::Synth { what } => {
            let (ds, output, labels) = match what {
                SynthCmd::Blobs {
                    classes,
                    per_class,
                    m,
                    p,
                    spread,
                    seed,
                    output,
                    labels,
                } => {
                    if classes < 1 || per_class < 1 || m < 1 || p < 1 {
                        return Err(CliError::usage("blob dimensions must be positive"));
                    }
                    if spread < 0.0 {
                        return Err(CliError::usage("--spread must be nonnegative"));
                    }
                    (
                        pipeline::synth_blobs(classes, per_class, m, p, spread, seed),
                        output,
                        labels,
                    )
                }
                SynthCmd::Rings {
                    n_per_ring,
                    noise,
                    p,
                    seed,
                    output,
                    labels,
                } => {
                    if n_per_ring < 1 || p < 1 {
                        return Err(CliError::usage("ring dimensions must be positive"));
                    }
                    if noise < 0.0 {
                        return Err(CliError::usage("--noise must be nonnegative"));
                    }
                    (
                        pipeline::synth_rings(n_per_ring, noise, p, seed),
                        output,
                        labels,
                    )
                }
            };
            pipeline::save_tensor(&ds.x, &output)?;
            pipeline::save_labels(&ds.labels, &labels)?;
            eprintln!(
                "wrote {} ({:?}) and {} labels",
                output.display(),
                ds.x.dims(),
                ds.labels.len()
            );
            Ok(())
        }
    }
}
