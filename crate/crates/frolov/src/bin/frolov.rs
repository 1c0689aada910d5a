//! Command-line front end: build and validate matrices, dump node sets,
//! run single estimates, convergence studies, and the statistical checks.

use clap::{Args, Parser, Subcommand};
use frolov::corpus;
use frolov::harness::{self, StudyConfig, StudyMode};
use frolov::lattice::{self, SupportBox, DEFAULT_CANDIDATE_CAP};
use frolov::matrix::{default_validation_radius, Construction, FrolovMatrix};
use frolov::rule::{self, QuadratureSpec};
use frolov::spectral::{self, SeriesTruncation};
use frolov::transform::PsiTable;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "frolov", version, about = "Lattice cubature over the unit cube")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Dimension of the integration domain.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Generator construction: frolov-poly or chebyshev.
    #[arg(long, default_value = "frolov-poly")]
    construction: String,
    /// Master seed for every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output file (reports append .csv/.json as needed); stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Load the generator matrix from a cache file instead of rebuilding.
    #[arg(long)]
    matrix_cache: Option<PathBuf>,
}

impl Common {
    fn construction(&self) -> frolov::Result<Construction> {
        Construction::from_str(&self.construction)
    }

    fn matrix(&self) -> frolov::Result<FrolovMatrix> {
        match &self.matrix_cache {
            Some(path) => FrolovMatrix::load_cache(path),
            None => FrolovMatrix::from_construction(self.construction()?, self.dim),
        }
    }

    fn emit(&self, text: &str) -> frolov::Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }

    fn run_in_pool<T: Send>(&self, job: impl FnOnce() -> T + Send) -> T {
        if self.threads == 0 {
            job()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(self.threads)
                .build()
                .expect("thread pool")
                .install(job)
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a generator matrix, validate it, and write the JSON cache.
    Matrix {
        #[command(flatten)]
        common: Common,
        /// Exhaustive search radius for the product condition.
        #[arg(long)]
        radius: Option<i64>,
        /// Random boxes for the point-count condition.
        #[arg(long, default_value_t = 64)]
        box_trials: u32,
    },
    /// Dump the node set of one rule realization as CSV.
    Nodes {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16.0)]
        n: f64,
        /// Dilation entries (repeat per axis; defaults to ones).
        #[arg(long, value_delimiter = ',')]
        dilation: Vec<f64>,
        /// Shift entries (repeat per axis; defaults to zeros).
        #[arg(long, value_delimiter = ',')]
        shift: Vec<f64>,
    },
    /// One quadrature estimate, printed as JSON.
    Integrate {
        #[command(flatten)]
        common: Common,
        /// Corpus function name (tent, poly-bump:r=K, smooth-bump, boundary-poly).
        #[arg(long, default_value = "tent")]
        function: String,
        #[arg(long, default_value_t = 256.0)]
        n: f64,
        /// deterministic | dilated | dilated-shifted
        #[arg(long, default_value = "deterministic")]
        mode: String,
        /// Use the change-of-variables rule.
        #[arg(long)]
        transformed: bool,
    },
    /// Convergence study over a dyadic grid; writes CSV + JSON reports.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "tent")]
        function: String,
        #[arg(long, default_value = "deterministic")]
        mode: String,
        #[arg(long)]
        transformed: bool,
        /// Grid runs over n = 2^min_exp .. 2^max_exp.
        #[arg(long, default_value_t = 4)]
        min_exp: u32,
        #[arg(long, default_value_t = 12)]
        max_exp: u32,
        #[arg(long, default_value_t = 100)]
        trials: u32,
    },
    /// Statistical unbiasedness check of the dilated+shifted rule.
    Unbiased {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "tent")]
        function: String,
        #[arg(long, default_value_t = 256.0)]
        n: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: u32,
        #[arg(long)]
        transformed: bool,
    },
    /// Shift-variance identity check against the lattice series.
    Variance {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "tent")]
        function: String,
        #[arg(long, default_value_t = 16.0)]
        n: f64,
        #[arg(long, default_value_t = 100_000)]
        shifts: u32,
        #[arg(long, default_value_t = 2000)]
        series_radius: i64,
    },
    /// Fourier-side diagnostics: series values, tails, weight samples.
    Diagnose {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "tent")]
        function: String,
        #[arg(long, default_value_t = 16.0)]
        n: f64,
        /// Series radius; chosen from the tail target when omitted.
        #[arg(long)]
        radius: Option<i64>,
        /// Tail-bound target for automatic radius selection.
        #[arg(long, default_value_t = 1e-6)]
        tail_target: f64,
    },
}

fn parse_mode(mode: &str) -> frolov::Result<StudyMode> {
    match mode {
        "deterministic" => Ok(StudyMode::Deterministic),
        "dilated" => Ok(StudyMode::Dilated),
        "dilated-shifted" => Ok(StudyMode::DilatedShifted),
        other => Err(frolov::Error::BadCache(format!(
            "unknown mode '{other}' (expected deterministic, dilated, dilated-shifted)"
        ))),
    }
}

#[derive(Serialize)]
struct IntegrateOutput {
    function: String,
    dimension: usize,
    construction: String,
    mode: String,
    seed: u64,
    value: f64,
    error_vs_exact: f64,
    node_count: u64,
    spec: QuadratureSpec,
}

#[derive(Serialize)]
struct DiagnoseOutput {
    function: String,
    dimension: usize,
    n: f64,
    dilation: Vec<f64>,
    shift: Vec<f64>,
    error_series: SeriesBlock,
    variance_series: SeriesBlock,
    weight_samples: Vec<WeightSample>,
}

#[derive(Serialize)]
struct SeriesBlock {
    real: f64,
    imag: f64,
    tail_bound: f64,
    radius: i64,
    terms_visited: u64,
}

#[derive(Serialize)]
struct WeightSample {
    point: Vec<f64>,
    mixed_r1: f64,
    mixed_r2: f64,
    isotropic_s2: f64,
    in_cross_complement: bool,
}

fn run(cli: Cli) -> frolov::Result<()> {
    match cli.command {
        Command::Matrix {
            common,
            radius,
            box_trials,
        } => {
            let mut matrix = common.matrix()?;
            let radius = radius.unwrap_or_else(|| default_validation_radius(common.dim));
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            let report = matrix.validate(radius, box_trials, &mut rng);
            eprintln!(
                "dim {} construction {}: |det| = {:.6}, min product = {:.12}, max excess = {:.3e}, valid = {}",
                matrix.dim(),
                common.construction,
                matrix.det_abs(),
                report.min_product,
                report.max_excess,
                report.is_valid()
            );
            match &common.out {
                Some(path) => {
                    matrix.save_cache(path)?;
                    eprintln!("cache written to {}", path.display());
                }
                None => {
                    let tmp = std::env::temp_dir().join("frolov-matrix.json");
                    matrix.save_cache(&tmp)?;
                    print!("{}", std::fs::read_to_string(&tmp)?);
                    std::fs::remove_file(&tmp).ok();
                }
            }
            Ok(())
        }
        Command::Nodes {
            common,
            n,
            dilation,
            shift,
        } => {
            let matrix = common.matrix()?;
            let d = matrix.dim();
            let dilation = if dilation.is_empty() { vec![1.0; d] } else { dilation };
            let shift = if shift.is_empty() { vec![0.0; d] } else { shift };
            let s = matrix.scale(n, &dilation)?;
            let nodes = lattice::enumerate(&s, &shift, &SupportBox::unit_cube(d), DEFAULT_CANDIDATE_CAP)?;
            let mut csv = String::new();
            for j in 1..=d {
                let _ = write!(csv, "m_{j},");
            }
            for j in 1..=d {
                let _ = write!(csv, "x_{j}{}", if j == d { "\n" } else { "," });
            }
            for (m, x) in nodes.iter() {
                for v in m {
                    let _ = write!(csv, "{v},");
                }
                for (j, v) in x.iter().enumerate() {
                    let _ = write!(csv, "{v:e}{}", if j == d - 1 { "\n" } else { "," });
                }
            }
            common.emit(&csv)
        }
        Command::Integrate {
            common,
            function,
            n,
            mode,
            transformed,
        } => {
            let matrix = common.matrix()?;
            let f = corpus::by_name(&function, common.dim)?;
            let psi = PsiTable::new();
            let mut rng = rule::trial_rng(common.seed, 0);
            let est = match parse_mode(&mode)? {
                StudyMode::Deterministic => {
                    let spec = QuadratureSpec {
                        n,
                        dilation: vec![1.0; common.dim],
                        shift: vec![0.0; common.dim],
                        transformed,
                    };
                    rule::estimate(&matrix, &spec, &psi, &f)?
                }
                StudyMode::Dilated => rule::randomized_estimate(
                    &matrix,
                    n,
                    &f,
                    &mut rng,
                    &rule::RandomizedMode::DilationOnly {
                        shift: vec![0.0; common.dim],
                    },
                    transformed,
                    &psi,
                )?,
                StudyMode::DilatedShifted => rule::randomized_estimate(
                    &matrix,
                    n,
                    &f,
                    &mut rng,
                    &rule::RandomizedMode::DilationShift,
                    transformed,
                    &psi,
                )?,
            };
            let output = IntegrateOutput {
                function: f.name.clone(),
                dimension: common.dim,
                construction: common.construction.clone(),
                mode,
                seed: common.seed,
                value: est.value,
                error_vs_exact: est.value - f.exact_integral,
                node_count: est.node_count,
                spec: est.spec,
            };
            common.emit(&format!("{}\n", serde_json::to_string_pretty(&output)?))
        }
        Command::Converge {
            common,
            function,
            mode,
            transformed,
            min_exp,
            max_exp,
            trials,
        } => {
            let matrix = common.matrix()?;
            let f = corpus::by_name(&function, common.dim)?;
            let psi = PsiTable::new();
            let config = StudyConfig {
                function,
                dim: common.dim,
                construction: common.construction()?,
                n_grid: StudyConfig::dyadic_grid(min_exp, max_exp),
                mode: parse_mode(&mode)?,
                transformed,
                trials,
                master_seed: common.seed,
                u_grid_per_axis: StudyConfig::default_u_grid(common.dim),
            };
            let report = common.run_in_pool(|| {
                if config.mode == StudyMode::Deterministic {
                    harness::run_deterministic_study(&matrix, &f, &psi, &config)
                } else {
                    harness::run_randomized_study(&matrix, &f, &psi, &config)
                }
            })?;
            eprintln!("study finished in {:?}", report.wall_clock);
            if let Some(slope) = &report.slope {
                eprintln!("primary slope {:+.4} (residual {:.3})", slope.slope, slope.residual);
            }
            match &common.out {
                Some(path) => {
                    let csv_path = path.with_extension("csv");
                    let json_path = path.with_extension("json");
                    std::fs::write(&csv_path, report.to_csv())?;
                    std::fs::write(&json_path, report.to_json()?)?;
                    eprintln!("reports written to {} and {}", csv_path.display(), json_path.display());
                }
                None => {
                    print!("{}", report.to_csv());
                }
            }
            Ok(())
        }
        Command::Unbiased {
            common,
            function,
            n,
            trials,
            transformed,
        } => {
            let matrix = common.matrix()?;
            let f = corpus::by_name(&function, common.dim)?;
            let psi = PsiTable::new();
            let report = common.run_in_pool(|| {
                harness::run_unbiasedness_test(&matrix, &f, &psi, n, trials, common.seed, transformed)
            })?;
            common.emit(&format!("{}\n", serde_json::to_string_pretty(&report)?))
        }
        Command::Variance {
            common,
            function,
            n,
            shifts,
            series_radius,
        } => {
            let matrix = common.matrix()?;
            let f = corpus::by_name(&function, common.dim)?;
            let report = common.run_in_pool(|| {
                harness::run_variance_identity_test(&matrix, &f, n, shifts, common.seed, series_radius)
            })?;
            common.emit(&format!("{}\n", serde_json::to_string_pretty(&report)?))
        }
        Command::Diagnose {
            common,
            function,
            n,
            radius,
            tail_target,
        } => {
            let matrix = common.matrix()?;
            let d = matrix.dim();
            let f = corpus::by_name(&function, d)?;
            let ft = f.fourier()?;
            let mut rng = rule::trial_rng(common.seed, 0);
            let dilation = rule::sample_dilation(d, &mut rng);
            let shift = rule::sample_shift(d, &mut rng);
            let s = matrix.scale(n, &dilation)?;
            let trunc = match radius {
                Some(r) => SeriesTruncation::with_radius(&s, &ft.decay, r)?,
                None => SeriesTruncation::for_target(&s, &ft.decay, tail_target, 1 << 22)?,
            };
            let err = spectral::error_series(&s, &shift, ft, &trunc)?;
            let var_trunc =
                SeriesTruncation::with_radius_squared(&s, &ft.decay, trunc.radius.min(4096))?;
            let var = spectral::variance_series(&s, ft, &var_trunc)?;
            let samples = (1..=5i64)
                .map(|k| {
                    let mut index = vec![1i64; d];
                    index[0] = k;
                    let point = s.image(&index);
                    WeightSample {
                        mixed_r1: spectral::mixed_weight(&point, 1),
                        mixed_r2: spectral::mixed_weight(&point, 2),
                        isotropic_s2: spectral::isotropic_weight(&point, 2),
                        in_cross_complement: spectral::in_cross_complement(&point, n),
                        point,
                    }
                })
                .collect();
            let output = DiagnoseOutput {
                function: f.name.clone(),
                dimension: d,
                n,
                dilation,
                shift,
                error_series: SeriesBlock {
                    real: err.real,
                    imag: err.imag,
                    tail_bound: err.tail_bound,
                    radius: err.radius,
                    terms_visited: err.terms_visited,
                },
                variance_series: SeriesBlock {
                    real: var.real,
                    imag: var.imag,
                    tail_bound: var.tail_bound,
                    radius: var.radius,
                    terms_visited: var.terms_visited,
                },
                weight_samples: samples,
            };
            common.emit(&format!("{}\n", serde_json::to_string_pretty(&output)?))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::FAILURE
        }
    }
}
