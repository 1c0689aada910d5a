//! Convergence studies, statistical error estimation, slope fitting, and
//! report persistence.
//!
//! Studies are reproducible by construction: trial (n_index, t) draws from
//! stream `n_index * trials + t` of the master-seeded generator, and report
//! assembly is index-ordered, so identical configurations produce
//! byte-identical reports for any thread count. Wall-clock time is kept out
//! of the serialized artifacts for the same reason.

use crate::corpus::TestFunction;
use crate::error::{Error, Result};
use crate::matrix::{Construction, FrolovMatrix};
use crate::rule::{self, QuadratureSpec};
use crate::spectral::{self, SeriesTruncation};
use crate::transform::PsiTable;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::time::Duration;

/// How a study randomizes the rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyMode {
    /// Unit dilation, zero shift, plus a dilation-grid sweep for the
    /// worst-case error.
    Deterministic,
    /// Random dilation, fixed zero shift.
    Dilated,
    /// Independent random dilation and shift (the unbiased rule).
    DilatedShifted,
}

impl StudyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StudyMode::Deterministic => "deterministic",
            StudyMode::Dilated => "dilated",
            StudyMode::DilatedShifted => "dilated-shifted",
        }
    }
}

/// Full description of one convergence study.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StudyConfig {
    pub function: String,
    pub dim: usize,
    pub construction: Construction,
    /// Strictly increasing grid of scale parameters.
    pub n_grid: Vec<f64>,
    pub mode: StudyMode,
    pub transformed: bool,
    /// Random trials per grid point (randomized modes).
    pub trials: u32,
    pub master_seed: u64,
    /// Dilation-grid points per axis for the worst-case sweep
    /// (deterministic mode).
    pub u_grid_per_axis: usize,
}

impl StudyConfig {
    /// Dyadic grid 2^lo..2^hi.
    pub fn dyadic_grid(lo: u32, hi: u32) -> Vec<f64> {
        (lo..=hi).map(|k| 2f64.powi(k as i32)).collect()
    }

    /// The default dilation-grid density: 16 points per axis through d = 2,
    /// 6 per axis beyond (about 16^min(d,2) points in total).
    pub fn default_u_grid(dim: usize) -> usize {
        if dim <= 2 {
            16
        } else {
            6
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadCache("n grid must be strictly increasing".into()));
        }
        if self.trials < 1 {
            return Err(Error::BadCache("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-n statistics of a study.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: f64,
    pub mean_err: f64,
    pub rms_err: f64,
    pub max_err: f64,
    pub mean_nodes: f64,
    /// 1.96 * standard error of the absolute error (0 for deterministic
    /// sweeps).
    pub ci_half: f64,
}

/// Ordinary least squares of log error on log n.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square residual of the fit.
    pub residual: f64,
    /// Rows dropped because their error was not positive.
    pub excluded: usize,
}

/// Two-regressor fit log err = intercept + power log n + log_power log log n.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CorrectedSlopeFit {
    pub power: f64,
    pub log_power: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// A finished study: rows, fitted slopes, provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    /// Slope of the study's primary error metric: max error for
    /// deterministic sweeps, RMS error for randomized ones.
    pub slope: Option<SlopeFit>,
    pub slope_mean: Option<SlopeFit>,
    pub slope_rms: Option<SlopeFit>,
    pub slope_max: Option<SlopeFit>,
    pub corrected: Option<CorrectedSlopeFit>,
    /// All errors vanished (an exact rule); slopes are meaningless.
    pub degenerate: bool,
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl ConvergenceReport {
    /// The CSV block: `n, mean_err, rms_err, max_err, mean_nodes, ci_half`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,mean_err,rms_err,max_err,mean_nodes,ci_half\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e},{},{:e}",
                row.n, row.mean_err, row.rms_err, row.max_err, row.mean_nodes, row.ci_half
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// OLS of ln(error) on ln(n). Rows with nonpositive error are excluded;
/// fewer than 4 usable rows is an error.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|&(n, e)| (n.ln(), e.ln()))
        .collect();
    let excluded = points.len() - usable.len();
    if usable.len() < 4 {
        return Err(Error::SlopeFit(usable.len()));
    }
    let count = usable.len() as f64;
    let mean_x = usable.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = usable.iter().map(|p| p.1).sum::<f64>() / count;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &usable {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = (usable
        .iter()
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum::<f64>()
        / count)
        .sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        residual,
        excluded,
    })
}

/// Least squares with regressors 1, ln n, ln ln n; separates a power law
/// from a logarithmic factor on grids where both are in play.
pub fn fit_slope_corrected(points: &[(f64, f64)]) -> Result<CorrectedSlopeFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, e)| *e > 0.0 && n.ln() > 1.0)
        .map(|&(n, e)| (n.ln(), e.ln()))
        .collect();
    if usable.len() < 4 {
        return Err(Error::SlopeFit(usable.len()));
    }
    // normal equations for the 3-parameter fit
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (x, y) in &usable {
        let row = [1.0, *x, x.ln()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    let a = nalgebra::Matrix3::from_fn(|i, j| ata[i][j]);
    let b = nalgebra::Vector3::from_row_slice(&atb);
    let solution = a
        .lu()
        .solve(&b)
        .ok_or(Error::SlopeFit(usable.len()))?;
    let residual = (usable
        .iter()
        .map(|(x, y)| {
            let r = y - solution[0] - solution[1] * x - solution[2] * x.ln();
            r * r
        })
        .sum::<f64>()
        / usable.len() as f64)
        .sqrt();
    Ok(CorrectedSlopeFit {
        power: solution[1],
        log_power: solution[2],
        intercept: solution[0],
        residual,
    })
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

struct Sample {
    error: f64,
    nodes: u64,
}

fn summarize(n: f64, samples: &[Sample], with_ci: bool) -> StudyRow {
    let count = samples.len() as f64;
    let mean_err = samples.iter().map(|s| s.error).sum::<f64>() / count;
    let rms_err = (samples.iter().map(|s| s.error * s.error).sum::<f64>() / count).sqrt();
    let max_err = samples.iter().map(|s| s.error).fold(0.0f64, f64::max);
    let mean_nodes = samples.iter().map(|s| s.nodes as f64).sum::<f64>() / count;
    let ci_half = if with_ci && samples.len() > 1 {
        let var = samples
            .iter()
            .map(|s| (s.error - mean_err) * (s.error - mean_err))
            .sum::<f64>()
            / (count - 1.0);
        1.96 * (var / count).sqrt()
    } else {
        0.0
    };
    StudyRow {
        n,
        mean_err,
        rms_err,
        max_err,
        mean_nodes,
        ci_half,
    }
}

fn assemble_report(
    config: StudyConfig,
    rows: Vec<StudyRow>,
    primary_is_max: bool,
    started: std::time::Instant,
) -> ConvergenceReport {
    let degenerate = rows.iter().all(|r| r.max_err == 0.0);
    let pts = |pick: fn(&StudyRow) -> f64| -> Vec<(f64, f64)> {
        rows.iter().map(|r| (r.n, pick(r))).collect()
    };
    let slope_mean = fit_slope(&pts(|r| r.mean_err)).ok();
    let slope_rms = fit_slope(&pts(|r| r.rms_err)).ok();
    let slope_max = fit_slope(&pts(|r| r.max_err)).ok();
    let corrected = if primary_is_max {
        fit_slope_corrected(&pts(|r| r.max_err)).ok()
    } else {
        fit_slope_corrected(&pts(|r| r.rms_err)).ok()
    };
    let slope = if primary_is_max { slope_max } else { slope_rms };
    ConvergenceReport {
        config,
        rows,
        slope,
        slope_mean,
        slope_rms,
        slope_max,
        corrected,
        degenerate,
        wall_clock: started.elapsed(),
    }
}

/// Deterministic-rule study: for each n, the error of the plain rule plus a
/// dilation-grid sweep approximating the worst case over dilations. The grid
/// includes the unit corner, so the plain rule is one of the sweep points;
/// the sweep is a lower bound on the true sup and is reported as such.
pub fn run_deterministic_study(
    matrix: &FrolovMatrix,
    f: &TestFunction,
    psi: &PsiTable,
    config: &StudyConfig,
) -> Result<ConvergenceReport> {
    config.validate()?;
    let started = std::time::Instant::now();
    let d = matrix.dim();
    let cap = 2f64.powf(1.0 / d as f64);
    let axis = linspace(1.0, cap, config.u_grid_per_axis.max(1));
    // every dilation-grid point of the sweep
    let mut grid_points: Vec<Vec<f64>> = Vec::new();
    let mut u_index = vec![0usize; d];
    loop {
        grid_points.push(u_index.iter().map(|&i| axis[i]).collect());
        let mut axis_idx = d;
        while axis_idx > 0 {
            u_index[axis_idx - 1] += 1;
            if u_index[axis_idx - 1] < axis.len() {
                break;
            }
            u_index[axis_idx - 1] = 0;
            axis_idx -= 1;
        }
        if axis_idx == 0 {
            break;
        }
    }
    // the (n, dilation) jobs run in parallel; assembly stays index-ordered,
    // so the report does not depend on the thread count
    let jobs: Vec<(usize, usize)> = (0..config.n_grid.len())
        .flat_map(|ni| (0..grid_points.len()).map(move |ui| (ni, ui)))
        .collect();
    let samples = jobs
        .par_iter()
        .map(|&(ni, ui)| {
            let spec = QuadratureSpec {
                n: config.n_grid[ni],
                dilation: grid_points[ui].clone(),
                shift: vec![0.0; d],
                transformed: config.transformed,
            };
            let est = rule::estimate(matrix, &spec, psi, f)?;
            Ok(Sample {
                error: (est.value - f.exact_integral).abs(),
                nodes: est.node_count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = config
        .n_grid
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let chunk = &samples[ni * grid_points.len()..(ni + 1) * grid_points.len()];
            summarize(n, chunk, false)
        })
        .collect();
    Ok(assemble_report(config.clone(), rows, true, started))
}

/// Randomized-rule study: per n, `trials` independent realizations on derived
/// streams; both the mean absolute error and the RMS error are reported and
/// fitted. RMS figures only stabilize from ~100 trials per grid point.
pub fn run_randomized_study(
    matrix: &FrolovMatrix,
    f: &TestFunction,
    psi: &PsiTable,
    config: &StudyConfig,
) -> Result<ConvergenceReport> {
    config.validate()?;
    let started = std::time::Instant::now();
    let d = matrix.dim();
    let mode = match config.mode {
        StudyMode::Dilated => rule::RandomizedMode::DilationOnly {
            shift: vec![0.0; d],
        },
        StudyMode::DilatedShifted => rule::RandomizedMode::DilationShift,
        StudyMode::Deterministic => {
            return run_deterministic_study(matrix, f, psi, config);
        }
    };
    // every (n, trial) pair is one job on its own derived stream; jobs run in
    // parallel and assembly stays index-ordered, so the report does not
    // depend on the thread count
    let trials = config.trials as u64;
    let total = config.n_grid.len() as u64 * trials;
    let samples = (0..total)
        .into_par_iter()
        .map(|stream| {
            let n = config.n_grid[(stream / trials) as usize];
            let mut rng = rule::trial_rng(config.master_seed, stream);
            let est = rule::randomized_estimate(
                matrix,
                n,
                f,
                &mut rng,
                &mode,
                config.transformed,
                psi,
            )?;
            Ok(Sample {
                error: (est.value - f.exact_integral).abs(),
                nodes: est.node_count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = config
        .n_grid
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let chunk = &samples[ni * config.trials as usize..(ni + 1) * config.trials as usize];
            summarize(n, chunk, true)
        })
        .collect();
    Ok(assemble_report(config.clone(), rows, false, started))
}

/// Unbiasedness z-test of the dilated+shifted rule.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct UnbiasednessReport {
    pub mean_error: f64,
    pub std: f64,
    pub trials: u32,
    /// |mean error| sqrt(M) / std; <= 4 passes.
    pub z_score: f64,
    pub degenerate: bool,
    pub pass: bool,
}

pub fn run_unbiasedness_test(
    matrix: &FrolovMatrix,
    f: &TestFunction,
    psi: &PsiTable,
    n: f64,
    trials: u32,
    master_seed: u64,
    transformed: bool,
) -> Result<UnbiasednessReport> {
    let mode = rule::RandomizedMode::DilationShift;
    let mut sum = crate::accum::Accumulator::new();
    let mut sum_sq = crate::accum::Accumulator::new();
    for t in 0..trials {
        let mut rng = rule::trial_rng(master_seed, t as u64);
        let est = rule::randomized_estimate(matrix, n, f, &mut rng, &mode, transformed, psi)?;
        let err = est.value - f.exact_integral;
        sum.add(err);
        sum_sq.add(err * err);
    }
    let count = trials as f64;
    let mean_error = sum.value() / count;
    let variance = (sum_sq.value() / count - mean_error * mean_error).max(0.0);
    let std = variance.sqrt();
    let degenerate = std == 0.0;
    let z_score = if degenerate {
        0.0
    } else {
        mean_error.abs() * count.sqrt() / std
    };
    Ok(UnbiasednessReport {
        mean_error,
        std,
        trials,
        z_score,
        degenerate,
        pass: !degenerate && z_score <= 4.0,
    })
}

/// Monte Carlo shift variance against the lattice series.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VarianceReport {
    pub mc_variance: f64,
    pub series_value: f64,
    pub series_tail: f64,
    pub shifts: u32,
    /// |mc - series| relative to the series value.
    pub relative_gap: f64,
    pub pass: bool,
}

/// Compare the empirical variance of the shifted rule (fixed unit dilation)
/// with the squared-transform series; passes when the gap is within 5%
/// relative plus the series tail bound.
pub fn run_variance_identity_test(
    matrix: &FrolovMatrix,
    f: &TestFunction,
    n: f64,
    shifts: u32,
    master_seed: u64,
    series_radius: i64,
) -> Result<VarianceReport> {
    let d = matrix.dim();
    let ft = f.fourier()?;
    let s = matrix.scale(n, &vec![1.0; d])?;
    let trunc = SeriesTruncation::with_radius_squared(&s, &ft.decay, series_radius)?;
    let series = spectral::variance_series(&s, ft, &trunc)?;

    let mut sum_sq = crate::accum::Accumulator::new();
    for t in 0..shifts {
        let mut rng = rule::trial_rng(master_seed, t as u64);
        let shift = rule::sample_shift(d, &mut rng);
        let spec = QuadratureSpec {
            n,
            dilation: vec![1.0; d],
            shift,
            transformed: false,
        };
        let est = rule::q_value(matrix, &spec, f)?;
        let err = est.value - f.exact_integral;
        sum_sq.add(err * err);
    }
    // E|Q - I|^2 rather than the centered variance: the rule is unbiased over
    // shifts, and this is the quantity the series represents
    let mc_variance = sum_sq.value() / shifts as f64;
    let gap = (mc_variance - series.real).abs();
    let pass = gap <= 0.05 * series.real.abs() + series.tail_bound + 1e-15;
    Ok(VarianceReport {
        mc_variance,
        series_value: series.real,
        series_tail: series.tail_bound,
        shifts,
        relative_gap: gap / series.real.abs().max(1e-300),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn fit_slope_exact_power_law() {
        let points: Vec<(f64, f64)> = (4..=14)
            .map(|k| {
                let n = 2f64.powi(k);
                (n, n.powf(-1.5))
            })
            .collect();
        let fit = fit_slope(&points).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12, "slope {}", fit.slope);
        assert!(fit.residual < 1e-12);
        assert_eq!(fit.excluded, 0);
    }

    #[test]
    fn fit_slope_log_contaminated() {
        // error = n^-1 (log n)^{1/2} on 2^4..2^14: the plain fitted slope is
        // -0.9128 (the log factor flattens it); the corrected fit recovers
        // the clean power -1 and the exponent 1/2 on the log term
        let points: Vec<(f64, f64)> = (4..=14)
            .map(|k| {
                let n = 2f64.powi(k);
                (n, n.powf(-1.0) * n.ln().sqrt())
            })
            .collect();
        let fit = fit_slope(&points).unwrap();
        assert!(
            (fit.slope + 0.9128).abs() < 0.01,
            "plain slope {}",
            fit.slope
        );
        let corrected = fit_slope_corrected(&points).unwrap();
        assert!((corrected.power + 1.0).abs() < 0.02, "power {}", corrected.power);
        assert!((corrected.log_power - 0.5).abs() < 0.02);
        assert!(corrected.residual < 1e-10);
    }

    #[test]
    fn fit_slope_constant_rows() {
        let points: Vec<(f64, f64)> = (4..=10).map(|k| (2f64.powi(k), 0.37)).collect();
        let fit = fit_slope(&points).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn fit_slope_excludes_nonpositive() {
        let mut points: Vec<(f64, f64)> = (4..=9)
            .map(|k| {
                let n = 2f64.powi(k);
                (n, n.powf(-2.0))
            })
            .collect();
        points.push((2f64.powi(10), 0.0));
        let fit = fit_slope(&points).unwrap();
        assert_eq!(fit.excluded, 1);
        assert!((fit.slope + 2.0).abs() < 1e-12);
        let too_few = vec![(16.0, 0.0), (32.0, 0.0), (64.0, 1e-3), (128.0, 1e-4), (256.0, 0.0)];
        assert!(matches!(fit_slope(&too_few), Err(Error::SlopeFit(2))));
    }

    #[test]
    fn degenerate_study_flagged() {
        // the d=1 lattice at integer scales integrates the tent exactly for
        // zero shift and unit dilation (nodes align with the kink)
        let roots = crate::polynomial::chebyshev_roots(1).unwrap();
        let matrix = FrolovMatrix::build(&roots).unwrap();
        let f = corpus::tent(1);
        let psi = PsiTable::new();
        let config = StudyConfig {
            function: "tent".into(),
            dim: 1,
            construction: Construction::Chebyshev,
            n_grid: StudyConfig::dyadic_grid(2, 6),
            mode: StudyMode::Deterministic,
            transformed: false,
            trials: 1,
            master_seed: 0,
            u_grid_per_axis: 1,
        };
        let report = run_deterministic_study(&matrix, &f, &psi, &config).unwrap();
        assert!(report.degenerate);
        assert!(report.slope.is_none());
    }

    #[test]
    fn reproducible_byte_identical_reports() {
        let matrix = FrolovMatrix::from_construction(Construction::FrolovPoly, 2).unwrap();
        let f = corpus::tent(2);
        let psi = PsiTable::new();
        let config = StudyConfig {
            function: "tent".into(),
            dim: 2,
            construction: Construction::FrolovPoly,
            n_grid: StudyConfig::dyadic_grid(4, 8),
            mode: StudyMode::DilatedShifted,
            transformed: false,
            trials: 20,
            master_seed: 7,
            u_grid_per_axis: 0,
        };
        let a = run_randomized_study(&matrix, &f, &psi, &config).unwrap();
        let b = run_randomized_study(&matrix, &f, &psi, &config).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn node_counts_within_cost_statement() {
        let matrix = FrolovMatrix::from_construction(Construction::FrolovPoly, 2).unwrap();
        let f = corpus::tent(2);
        let psi = PsiTable::new();
        let config = StudyConfig {
            function: "tent".into(),
            dim: 2,
            construction: Construction::FrolovPoly,
            n_grid: StudyConfig::dyadic_grid(4, 10),
            mode: StudyMode::DilatedShifted,
            transformed: false,
            trials: 30,
            master_seed: 3,
            u_grid_per_axis: 0,
        };
        let report = run_randomized_study(&matrix, &f, &psi, &config).unwrap();
        let factor = 2.0 * (matrix.col_norm1() + 1.0).powi(2);
        for row in &report.rows {
            assert!(
                row.mean_nodes <= factor * row.n,
                "n={}: {} nodes",
                row.n,
                row.mean_nodes
            );
        }
    }

    #[test]
    fn worst_case_scaling_bounded() {
        // max_error(n) * n^r (log n)^{-(d-1)/2} should stay within a constant
        // band; operационally: bounded by 10x its median over the grid
        let matrix = FrolovMatrix::from_construction(Construction::FrolovPoly, 2).unwrap();
        let f = corpus::tent(2);
        let psi = PsiTable::new();
        let config = StudyConfig {
            function: "tent".into(),
            dim: 2,
            construction: Construction::FrolovPoly,
            n_grid: StudyConfig::dyadic_grid(4, 11),
            mode: StudyMode::Deterministic,
            transformed: false,
            trials: 1,
            master_seed: 0,
            u_grid_per_axis: 6,
        };
        let report = run_deterministic_study(&matrix, &f, &psi, &config).unwrap();
        let mut scaled: Vec<f64> = report
            .rows
            .iter()
            .map(|r| r.max_err * r.n / r.n.ln().sqrt())
            .collect();
        scaled.sort_by(f64::total_cmp);
        let median = scaled[scaled.len() / 2];
        assert!(
            scaled.last().unwrap() <= &(10.0 * median),
            "scaled errors {scaled:?}"
        );
    }

    #[test]
    fn dilation_only_rms_within_worst_case_rate() {
        // with a fixed zero shift, the dilation-averaged RMS error must decay
        // at least as fast as the mixed-order worst case allows
        let matrix = FrolovMatrix::from_construction(Construction::FrolovPoly, 2).unwrap();
        let f = corpus::tent(2);
        let psi = PsiTable::new();
        let config = StudyConfig {
            function: "tent".into(),
            dim: 2,
            construction: Construction::FrolovPoly,
            n_grid: StudyConfig::dyadic_grid(4, 12),
            mode: StudyMode::Dilated,
            transformed: false,
            trials: 100,
            master_seed: 17,
            u_grid_per_axis: 0,
        };
        let report = run_randomized_study(&matrix, &f, &psi, &config).unwrap();
        let slope = report.slope_rms.unwrap().slope;
        assert!(slope <= -1.35, "RMS slope {slope}");
    }

    #[test]
    fn smooth_bump_beats_polynomial_rates() {
        // an infinitely smooth integrand satisfies every mixed order, so the
        // randomized rule should decay faster than any fixed low-order target
        let roots = crate::polynomial::chebyshev_roots(1).unwrap();
        let matrix = FrolovMatrix::build(&roots).unwrap();
        let f = corpus::smooth_bump(1);
        let psi = PsiTable::new();
        let config = StudyConfig {
            function: "smooth-bump".into(),
            dim: 1,
            construction: Construction::Chebyshev,
            n_grid: StudyConfig::dyadic_grid(4, 12),
            mode: StudyMode::DilatedShifted,
            transformed: false,
            trials: 100,
            master_seed: 5,
            u_grid_per_axis: 0,
        };
        let report = run_randomized_study(&matrix, &f, &psi, &config).unwrap();
        let slope = report.slope_rms.unwrap().slope;
        assert!(slope <= -2.4, "RMS slope {slope}");
    }

    #[test]
    fn unbiasedness_small_run() {
        let matrix = FrolovMatrix::from_construction(Construction::FrolovPoly, 2).unwrap();
        let f = corpus::tent(2);
        let psi = PsiTable::new();
        let report =
            run_unbiasedness_test(&matrix, &f, &psi, 64.0, 400, 11, false).unwrap();
        assert!(!report.degenerate);
        assert!(report.pass, "z = {}", report.z_score);
    }

    #[test]
    fn unbiasedness_flags_degenerate() {
        let matrix = FrolovMatrix::from_construction(Construction::FrolovPoly, 2).unwrap();
        let zero = TestFunction::custom(
            "zero",
            2,
            crate::lattice::SupportBox::unit_cube(2),
            0.0,
            Default::default(),
            |_| 0.0,
        );
        let psi = PsiTable::new();
        let report = run_unbiasedness_test(&matrix, &zero, &psi, 64.0, 50, 1, false).unwrap();
        assert!(report.degenerate);
        assert!(!report.pass);
    }

    #[test]
    fn variance_identity_small_run() {
        let roots = crate::polynomial::chebyshev_roots(1).unwrap();
        let matrix = FrolovMatrix::build(&roots).unwrap();
        let f = corpus::tent(1);
        // u = 1, S = [11]: off the transform zeros, so the variance is positive
        let report = run_variance_identity_test(&matrix, &f, 11.0, 20_000, 5, 4000).unwrap();
        assert!(report.series_value > 0.0);
        assert!(report.pass, "gap {}", report.relative_gap);
    }
}
