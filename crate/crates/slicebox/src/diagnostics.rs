//! Statistics over draw sequences: moments, histograms, evaluation-cost
//! summaries, mode occupancy, autocorrelation/ESS, and Kolmogorov-Smirnov
//! goodness-of-fit against reference CDFs.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Gamma, Normal};
use thiserror::Error;

use crate::samplers::DrawRecord;
use crate::targets::{Builtin, LogDensity};

/// Asymptotic two-sided KS critical coefficient at alpha = 0.01; the test
/// passes when the statistic is below `c / sqrt(n)`.
pub const KS_CRIT_ALPHA_01: f64 = 1.628;

/// Draws kept for KS testing: every `KS_THIN`-th sample, because the test
/// assumes independence and raw chain draws are autocorrelated.
pub const KS_THIN: usize = 10;

/// Fixed quadrature grid for the quartic target's reference CDF.
pub const QUARTIC_GRID: GridSpec = GridSpec {
    lo: -3.0,
    hi: 7.0,
    step: 1e-3,
};

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("no records to summarize")]
    EmptyInput,
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("samples must be sorted ascending (violated at index {index})")]
    Unsorted { index: usize },
    #[error("reference integration failed: {0}")]
    Integration(String),
    #[error("bad argument: {0}")]
    BadArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

/// A reference distribution function usable both forward (KS tests) and
/// inverse (oracle sampling in the self-tests).
#[derive(Debug, Clone)]
pub enum ReferenceCdf {
    Gauss { mean: f64, sd: f64 },
    Gamma { shape: f64, rate: f64 },
    /// Weighted normal components (weight, mean, sd); weights sum to one.
    GaussMixture { components: Vec<(f64, f64, f64)> },
    /// Normalized cumulative trapezoid table over a fixed grid.
    Empirical { xs: Vec<f64>, cum: Vec<f64> },
}

impl ReferenceCdf {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            ReferenceCdf::Gauss { mean, sd } => {
                Normal::new(*mean, *sd).expect("validated").cdf(x)
            }
            ReferenceCdf::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    Gamma::new(*shape, *rate).expect("validated").cdf(x)
                }
            }
            ReferenceCdf::GaussMixture { components } => components
                .iter()
                .map(|(w, m, s)| w * Normal::new(*m, *s).expect("validated").cdf(x))
                .sum(),
            ReferenceCdf::Empirical { xs, cum } => {
                if x <= xs[0] {
                    return 0.0;
                }
                if x >= *xs.last().unwrap() {
                    return 1.0;
                }
                let i = xs.partition_point(|&v| v <= x);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let (c0, c1) = (cum[i - 1], cum[i]);
                c0 + (c1 - c0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Inverse CDF; `q` strictly inside (0, 1).
    pub fn quantile(&self, q: f64) -> f64 {
        debug_assert!(q > 0.0 && q < 1.0);
        match self {
            ReferenceCdf::Gauss { mean, sd } => {
                Normal::new(*mean, *sd).expect("validated").inverse_cdf(q)
            }
            ReferenceCdf::Gamma { shape, rate } => {
                Gamma::new(*shape, *rate).expect("validated").inverse_cdf(q)
            }
            ReferenceCdf::GaussMixture { components } => {
                // Bisect the monotone mixture CDF.
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (_, m, s) in components {
                    lo = lo.min(m - 12.0 * s);
                    hi = hi.max(m + 12.0 * s);
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < q {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
            ReferenceCdf::Empirical { xs, cum } => {
                let i = cum.partition_point(|&c| c < q).max(1);
                let (c0, c1) = (cum[i - 1], cum[i]);
                let (x0, x1) = (xs[i - 1], xs[i]);
                if c1 > c0 {
                    x0 + (x1 - x0) * (q - c0) / (c1 - c0)
                } else {
                    x0
                }
            }
        }
    }
}

/// Reference CDF for a target: closed forms for the analytic builtins,
/// normalized trapezoid quadrature of exp(log f) over the grid otherwise.
pub fn reference_cdf(
    target: &mut LogDensity,
    grid: &GridSpec,
) -> Result<ReferenceCdf, DiagnosticsError> {
    match target.as_builtin() {
        Some(Builtin::Gauss500) => Ok(ReferenceCdf::Gauss {
            mean: 500.0,
            sd: 5.0f64.sqrt(),
        }),
        Some(Builtin::Gauss1000) => Ok(ReferenceCdf::Gauss {
            mean: 1000.0,
            sd: 50.0f64.sqrt(),
        }),
        Some(Builtin::Gamma51) => Ok(ReferenceCdf::Gamma {
            shape: 5.0,
            rate: 1.0,
        }),
        Some(Builtin::Gmm) => Ok(ReferenceCdf::GaussMixture {
            components: vec![(0.8, 0.0, 1.0), (0.2, 10.0, 1.0)],
        }),
        _ => quadrature_cdf(target, grid),
    }
}

fn quadrature_cdf(
    target: &mut LogDensity,
    grid: &GridSpec,
) -> Result<ReferenceCdf, DiagnosticsError> {
    if !grid.lo.is_finite() || !grid.hi.is_finite() || grid.lo >= grid.hi || grid.step <= 0.0 {
        return Err(DiagnosticsError::BadArgument(format!(
            "grid [{}, {}] step {} is not usable",
            grid.lo, grid.hi, grid.step
        )));
    }
    let n = ((grid.hi - grid.lo) / grid.step).ceil() as usize;
    let mut xs = Vec::with_capacity(n + 1);
    let mut cum = Vec::with_capacity(n + 1);
    let density = |target: &mut LogDensity, x: f64| -> Result<f64, DiagnosticsError> {
        let v = target
            .log_eval(x)
            .map_err(|e| DiagnosticsError::Integration(e.to_string()))?
            .exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DiagnosticsError::Integration(format!(
                "density is not finite at x = {x}"
            )))
        }
    };
    let mut prev = density(target, grid.lo)?;
    let mut acc = 0.0;
    xs.push(grid.lo);
    cum.push(0.0);
    for i in 1..=n {
        let x = (grid.lo + i as f64 * grid.step).min(grid.hi);
        let cur = density(target, x)?;
        acc += 0.5 * (prev + cur) * (x - xs[xs.len() - 1]);
        xs.push(x);
        cum.push(acc);
        prev = cur;
    }
    if !acc.is_finite() || acc <= 1e-12 {
        return Err(DiagnosticsError::Integration(format!(
            "total mass {acc} over grid [{}, {}]",
            grid.lo, grid.hi
        )));
    }
    for c in &mut cum {
        *c /= acc;
    }
    Ok(ReferenceCdf::Empirical { xs, cum })
}

/// Two-sided KS statistic of sorted samples against a reference CDF.
pub fn ks_statistic(
    sorted: &[f64],
    cdf: impl Fn(f64) -> f64,
) -> Result<f64, DiagnosticsError> {
    if sorted.len() < 10 {
        return Err(DiagnosticsError::TooFewSamples {
            got: sorted.len(),
            min: 10,
        });
    }
    if let Some(i) = sorted.windows(2).position(|w| w[0] > w[1]) {
        return Err(DiagnosticsError::Unsorted { index: i + 1 });
    }
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs());
        d = d.max((f - i as f64 / n).abs());
    }
    Ok(d)
}

pub fn ks_critical_value(n: usize) -> f64 {
    KS_CRIT_ALPHA_01 / (n as f64).sqrt()
}

/// ESS and integrated autocorrelation time of a scalar series.
///
/// The autocorrelation sum is truncated by Geyer's initial positive sequence
/// rule: consecutive pairs rho(2m) + rho(2m+1) enter the sum while positive.
/// A zero-variance series yields act = n, ess = 1 by convention.
pub fn ess(samples: &[f64]) -> Result<(f64, f64), DiagnosticsError> {
    if samples.len() < 100 {
        return Err(DiagnosticsError::TooFewSamples {
            got: samples.len(),
            min: 100,
        });
    }
    Ok(ess_unchecked(samples))
}

fn ess_unchecked(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let c0 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    if c0 == 0.0 || n < 2 {
        return (1.0, nf);
    }
    let rho = |k: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..n - k {
            acc += (samples[i] - mean) * (samples[i + k] - mean);
        }
        acc / nf / c0
    };
    // act = -1 + 2 * sum of positive Geyer pairs (the m = 0 pair is
    // 1 + rho(1), so an iid series lands at act ~ 1).
    let mut act = -1.0;
    let mut m = 0;
    loop {
        let k = 2 * m;
        if k + 1 >= n {
            break;
        }
        let pair = rho(k) + rho(k + 1);
        if pair <= 0.0 {
            break;
        }
        act += 2.0 * pair;
        m += 1;
    }
    let act = act.clamp(1.0, nf);
    let ess = (nf / act).clamp(1.0, nf);
    (ess, act)
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub bins: usize,
    /// Mode-occupancy threshold: report the fraction of draws with
    /// x > threshold.
    pub threshold: Option<f64>,
    /// Reference CDF for a KS test on thinned draws.
    pub reference: Option<ReferenceCdf>,
    pub ks_thin: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            bins: 50,
            threshold: None,
            reference: None,
            ks_thin: KS_THIN,
        }
    }
}

/// Aggregate statistics of a draw sequence. Serializes to JSON with these
/// exact field names.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub mean_evals: f64,
    pub mean_shrinks: f64,
    pub max_iter_hits: u64,
    pub histogram: Vec<(f64, f64, u64)>,
    pub ess: f64,
    pub act: f64,
    pub ks_stat: Option<f64>,
    pub ks_pass: Option<bool>,
    pub ks_thin: Option<u64>,
    pub mode_occupancy: Option<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("RunReport serialization cannot fail")
    }
}

impl std::fmt::Display for RunReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:<16} {}", "n", self.n)?;
        writeln!(f, "{:<16} {}", "mean", self.mean)?;
        writeln!(f, "{:<16} {}", "variance", self.variance)?;
        writeln!(f, "{:<16} {}", "min", self.min)?;
        writeln!(f, "{:<16} {}", "max", self.max)?;
        writeln!(f, "{:<16} {}", "mean_evals", self.mean_evals)?;
        writeln!(f, "{:<16} {}", "mean_shrinks", self.mean_shrinks)?;
        writeln!(f, "{:<16} {}", "max_iter_hits", self.max_iter_hits)?;
        writeln!(f, "{:<16} {:.1}", "ess", self.ess)?;
        writeln!(f, "{:<16} {:.3}", "act", self.act)?;
        if let (Some(stat), Some(pass)) = (self.ks_stat, self.ks_pass) {
            writeln!(
                f,
                "{:<16} {:.6} ({}, thin={})",
                "ks_stat",
                stat,
                if pass { "pass" } else { "FAIL" },
                self.ks_thin.unwrap_or(1),
            )?;
        }
        if let Some(occ) = self.mode_occupancy {
            writeln!(f, "{:<16} {:.4}", "mode_occupancy", occ)?;
        }
        Ok(())
    }
}

/// Summarize a draw sequence.
pub fn summarize(
    records: &[DrawRecord],
    opts: &ReportOptions,
) -> Result<RunReport, DiagnosticsError> {
    if records.is_empty() {
        return Err(DiagnosticsError::EmptyInput);
    }
    if opts.bins == 0 {
        return Err(DiagnosticsError::BadArgument("bins must be positive".into()));
    }
    if opts.ks_thin == 0 {
        return Err(DiagnosticsError::BadArgument("ks_thin must be positive".into()));
    }
    let n = records.len();
    let nf = n as f64;
    let xs: Vec<f64> = records.iter().map(|r| r.x).collect();
    let mean = xs.iter().sum::<f64>() / nf;
    let variance = if n > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean_evals = records.iter().map(|r| r.n_evals as f64).sum::<f64>() / nf;
    let mean_shrinks = records.iter().map(|r| r.n_shrinks as f64).sum::<f64>() / nf;
    let max_iter_hits = records.iter().filter(|r| r.capped).count() as u64;

    let histogram = build_histogram(&xs, min, max, opts.bins);
    let (ess, act) = ess_unchecked(&xs);

    let (ks_stat, ks_pass, ks_thin) = match &opts.reference {
        Some(reference) => {
            let mut thinned: Vec<f64> = xs.iter().cloned().step_by(opts.ks_thin).collect();
            thinned.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let stat = ks_statistic(&thinned, |x| reference.cdf(x))?;
            let pass = stat < ks_critical_value(thinned.len());
            (Some(stat), Some(pass), Some(opts.ks_thin as u64))
        }
        None => (None, None, None),
    };

    let mode_occupancy = opts
        .threshold
        .map(|thr| xs.iter().filter(|&&x| x > thr).count() as f64 / nf);

    Ok(RunReport {
        n: n as u64,
        mean,
        variance,
        min,
        max,
        mean_evals,
        mean_shrinks,
        max_iter_hits,
        histogram,
        ess,
        act,
        ks_stat,
        ks_pass,
        ks_thin,
        mode_occupancy,
    })
}

fn build_histogram(xs: &[f64], min: f64, max: f64, bins: usize) -> Vec<(f64, f64, u64)> {
    if min == max {
        // Degenerate spread: one bin carrying everything.
        return vec![(min, max, xs.len() as u64)];
    }
    let width = (max - min) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in xs {
        let i = (((x - min) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let left = min + i as f64 * width;
            let right = if i + 1 == bins { max } else { min + (i + 1) as f64 * width };
            (left, right, c)
        })
        .collect()
}
