//! The four univariate slice samplers.
//!
//! `slice_bounded` runs the shrinkage loop directly on a fixed interval.
//! `slice_unbounded` and `slice_positive` run the same loop on p ∈ (0,1)
//! after a change of variables, comparing Jacobian-corrected log-densities
//! log f(expand(p)) + log(dx/dp); the correction makes sampling p equivalent
//! to sampling x. `stepping_out` is the classical locally-adaptive baseline.
//!
//! All level comparisons are strict and in log space, so a candidate with
//! f = 0 (log f = -inf) is always rejected. A candidate p equal to the
//! current point's p (a floating-point collision) returns the current x
//! unchanged as a valid repeated draw, since shrinking there could not make
//! progress.

use crate::rng::{RngError, RngStream};
use crate::targets::{LogDensity, Support, TargetError};
use crate::transforms::{Transform, TransformError};
use thiserror::Error;

pub const DEFAULT_MAX_ITER: u32 = 1000;
pub const DEFAULT_MAX_STEPOUT: u64 = 1_000_000;
pub const DEFAULT_WIDTH: f64 = 1.0;
pub use crate::transforms::DEFAULT_SCALE as DEFAULT_A_SCALE;

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Shrinkage on a fixed interval; never expands past the given bounds.
    Bounded { lower: f64, upper: f64 },
    /// Sigmoid reparameterization of the whole real line, scale `a_scale`.
    Unbounded { a_scale: f64 },
    /// Ratio reparameterization of the positive reals.
    Positive,
    /// Stepping-out with the given initial interval width.
    SteppingOut { width: f64 },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Bounded { .. } => "bounded",
            Method::Unbounded { .. } => "unbounded",
            Method::Positive => "positive",
            Method::SteppingOut { .. } => "stepout",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub method: Method,
    /// Cap on shrinkage iterations per draw; on hitting it the previous x is
    /// returned and the record is flagged instead of writing to stderr.
    pub max_iter: u32,
    /// Cap on stepping-out expansions per side.
    pub max_stepout: u64,
}

impl SamplerConfig {
    fn new(method: Method) -> Self {
        Self {
            method,
            max_iter: DEFAULT_MAX_ITER,
            max_stepout: DEFAULT_MAX_STEPOUT,
        }
    }

    pub fn unbounded(a_scale: f64) -> Result<Self, SamplerError> {
        if !(a_scale > 0.0 && a_scale.is_finite()) {
            return Err(SamplerError::Config(format!(
                "a_scale must be positive and finite, got {a_scale}"
            )));
        }
        Ok(Self::new(Method::Unbounded { a_scale }))
    }

    pub fn positive() -> Self {
        Self::new(Method::Positive)
    }

    pub fn bounded(lower: f64, upper: f64) -> Result<Self, SamplerError> {
        if !lower.is_finite() || !upper.is_finite() || lower >= upper {
            return Err(SamplerError::Config(format!(
                "bounds must satisfy lower < upper with both finite, got [{lower}, {upper}]"
            )));
        }
        Ok(Self::new(Method::Bounded { lower, upper }))
    }

    pub fn stepping_out(width: f64) -> Result<Self, SamplerError> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(SamplerError::Config(format!(
                "width must be positive and finite, got {width}"
            )));
        }
        Ok(Self::new(Method::SteppingOut { width }))
    }

    pub fn with_max_iter(mut self, max_iter: u32) -> Self {
        self.max_iter = max_iter.max(1);
        self
    }

    pub fn with_max_stepout(mut self, max_stepout: u64) -> Self {
        self.max_stepout = max_stepout.max(1);
        self
    }
}

/// Current position of one chain, plus its private random stream and the
/// cached log-density of the current point (so each shrinkage iteration
/// costs exactly one target evaluation).
#[derive(Debug, Clone)]
pub struct ChainState {
    pub x: f64,
    pub t: u64,
    rng: RngStream,
    cached_log_f: Option<f64>,
}

impl ChainState {
    pub fn new(x0: f64, rng: RngStream) -> Self {
        Self {
            x: x0,
            t: 0,
            rng,
            cached_log_f: None,
        }
    }
}

/// One draw: the sample, the target evaluations it cost, and the shrinkage
/// iterations it took. `capped` flags draws that hit `max_iter` or the
/// stepping-out expansion cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawRecord {
    pub x: f64,
    pub n_evals: u32,
    pub n_shrinks: u32,
    pub capped: bool,
}

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid sampler configuration: {0}")]
    Config(String),
    #[error("chain state x = {0} must be finite and inside the target support")]
    BadState(f64),
    #[error("log f(x) = {value} at the current point x = {x}; the slice level is undefined")]
    NonFiniteDensity { x: f64, value: f64 },
    #[error(
        "x = {x} is beyond the reparameterization's floating-point resolution; \
         rescale x or raise the scale constant"
    )]
    OutOfRange { x: f64 },
    #[error(transparent)]
    Target(#[from] TargetError),
    #[error(transparent)]
    Rng(#[from] RngError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("draw {t} failed: {source}")]
    AtDraw {
        t: u64,
        #[source]
        source: Box<SamplerError>,
    },
}

/// log f at the chain's current point, evaluated at most once per chain
/// lifetime: accepted candidates refresh the cache for free.
fn current_log_f(
    state: &mut ChainState,
    target: &mut LogDensity,
    n_evals: &mut u32,
) -> Result<f64, SamplerError> {
    if let Some(v) = state.cached_log_f {
        return Ok(v);
    }
    if !target.support().contains(state.x) {
        return Err(SamplerError::BadState(state.x));
    }
    let v = target.log_eval(state.x)?;
    *n_evals += 1;
    if !v.is_finite() {
        return Err(SamplerError::NonFiniteDensity { x: state.x, value: v });
    }
    state.cached_log_f = Some(v);
    Ok(v)
}

/// Shrinkage on the unit interval after a change of variables; shared by the
/// unbounded and positive samplers.
fn draw_reparameterized(
    state: &mut ChainState,
    target: &mut LogDensity,
    transform: &Transform,
    cfg: &SamplerConfig,
) -> Result<DrawRecord, SamplerError> {
    let r = transform.shrink(state.x).map_err(|e| match e {
        TransformError::NonFinite(x) | TransformError::NonPositive(x) => SamplerError::BadState(x),
        other => SamplerError::Transform(other),
    })?;
    let log_jac_r = transform
        .log_jacobian(r)
        .map_err(|_| SamplerError::OutOfRange { x: state.x })?;

    let mut n_evals = 0u32;
    let log_f = current_log_f(state, target, &mut n_evals)?;
    let level = log_f + log_jac_r + state.rng.log_uniform01();

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut n_shrinks = 0u32;
    while n_shrinks < cfg.max_iter {
        n_shrinks += 1;
        let cand = state.rng.uniform(lo, hi)?;
        // Candidates past the guard band have no representable x; treat them
        // as lying below every slice level.
        if let (Ok(x_cand), Ok(log_jac)) = (transform.expand(cand), transform.log_jacobian(cand)) {
            let log_f_cand = target.log_eval(x_cand)?;
            n_evals += 1;
            if log_f_cand + log_jac > level {
                state.x = x_cand;
                state.cached_log_f = Some(log_f_cand);
                state.t += 1;
                return Ok(DrawRecord {
                    x: x_cand,
                    n_evals,
                    n_shrinks,
                    capped: false,
                });
            }
        }
        if cand > r {
            hi = cand;
        } else if cand < r {
            lo = cand;
        } else {
            // Exact collision with the current point: shrinking here could
            // not make progress, so repeat the current draw.
            state.t += 1;
            return Ok(DrawRecord {
                x: state.x,
                n_evals,
                n_shrinks,
                capped: false,
            });
        }
        debug_assert!(
            lo < r && r < hi,
            "p-interval ({lo}, {hi}) no longer strictly brackets r = {r}"
        );
    }
    state.t += 1;
    Ok(DrawRecord {
        x: state.x,
        n_evals,
        n_shrinks: cfg.max_iter,
        capped: true,
    })
}

/// Shrinkage over a fixed interval [lower, upper], never expanded.
pub fn slice_bounded(
    state: &mut ChainState,
    target: &mut LogDensity,
    cfg: &SamplerConfig,
) -> Result<DrawRecord, SamplerError> {
    let Method::Bounded { lower, upper } = cfg.method else {
        return Err(SamplerError::Config(format!(
            "slice_bounded called with a {} configuration",
            cfg.method.name()
        )));
    };
    if !target.support().contains(lower) || !target.support().contains(upper) {
        return Err(SamplerError::Config(format!(
            "bounds [{lower}, {upper}] leave the target support"
        )));
    }
    if !(lower <= state.x && state.x <= upper) {
        return Err(SamplerError::BadState(state.x));
    }

    let mut n_evals = 0u32;
    let log_f = current_log_f(state, target, &mut n_evals)?;
    let level = log_f + state.rng.log_uniform01();

    let (mut lo, mut hi) = (lower, upper);
    let mut n_shrinks = 0u32;
    while n_shrinks < cfg.max_iter {
        n_shrinks += 1;
        let cand = state.rng.uniform(lo, hi)?;
        let log_f_cand = target.log_eval(cand)?;
        n_evals += 1;
        if log_f_cand > level {
            state.x = cand;
            state.cached_log_f = Some(log_f_cand);
            state.t += 1;
            return Ok(DrawRecord {
                x: cand,
                n_evals,
                n_shrinks,
                capped: false,
            });
        }
        if cand < state.x {
            lo = cand;
        } else {
            hi = cand;
        }
        debug_assert!(
            lo <= state.x && state.x <= hi && lo < hi,
            "interval ({lo}, {hi}) no longer brackets x = {}",
            state.x
        );
    }
    state.t += 1;
    Ok(DrawRecord {
        x: state.x,
        n_evals,
        n_shrinks: cfg.max_iter,
        capped: true,
    })
}

/// Slice sampling of a real-line target through the scaled sigmoid map.
pub fn slice_unbounded(
    state: &mut ChainState,
    target: &mut LogDensity,
    cfg: &SamplerConfig,
) -> Result<DrawRecord, SamplerError> {
    let Method::Unbounded { a_scale } = cfg.method else {
        return Err(SamplerError::Config(format!(
            "slice_unbounded called with a {} configuration",
            cfg.method.name()
        )));
    };
    if target.support() != Support::RealLine {
        return Err(SamplerError::Config(
            "the unbounded sampler requires a real-line target".into(),
        ));
    }
    let transform = Transform::scaled_sigmoid(a_scale)?;
    draw_reparameterized(state, target, &transform, cfg)
}

/// Slice sampling of a positive target through the ratio map.
pub fn slice_positive(
    state: &mut ChainState,
    target: &mut LogDensity,
    cfg: &SamplerConfig,
) -> Result<DrawRecord, SamplerError> {
    if cfg.method != Method::Positive {
        return Err(SamplerError::Config(format!(
            "slice_positive called with a {} configuration",
            cfg.method.name()
        )));
    };
    if target.support() != Support::PositiveReals {
        return Err(SamplerError::Config(
            "the positive sampler requires a positive-support target".into(),
        ));
    }
    if state.x.is_nan() || state.x <= 0.0 {
        return Err(SamplerError::BadState(state.x));
    }
    draw_reparameterized(state, target, &Transform::positive_ratio(), cfg)
}

/// Neal's stepping-out procedure with shrinkage.
pub fn stepping_out(
    state: &mut ChainState,
    target: &mut LogDensity,
    cfg: &SamplerConfig,
) -> Result<DrawRecord, SamplerError> {
    let Method::SteppingOut { width } = cfg.method else {
        return Err(SamplerError::Config(format!(
            "stepping_out called with a {} configuration",
            cfg.method.name()
        )));
    };
    if target.support() != Support::RealLine {
        return Err(SamplerError::Config(
            "the stepping-out sampler requires a real-line target".into(),
        ));
    }
    if !state.x.is_finite() {
        return Err(SamplerError::BadState(state.x));
    }

    let mut n_evals = 0u32;
    let log_f = current_log_f(state, target, &mut n_evals)?;
    let level = log_f + state.rng.log_uniform01();

    // Place the initial interval uniformly around x, then expand each end
    // while the density there is still above the level.
    let mut lo = state.x - width * state.rng.unit();
    let mut hi = lo + width;
    let mut capped = false;
    let mut expansions = 0u64;
    while target.log_eval(lo)? > level {
        n_evals += 1;
        lo -= width;
        expansions += 1;
        if expansions >= cfg.max_stepout {
            capped = true;
            break;
        }
    }
    if !capped {
        n_evals += 1; // the terminating evaluation of the left loop
    }
    expansions = 0;
    let mut right_capped = false;
    while target.log_eval(hi)? > level {
        n_evals += 1;
        hi += width;
        expansions += 1;
        if expansions >= cfg.max_stepout {
            right_capped = true;
            break;
        }
    }
    if !right_capped {
        n_evals += 1;
    }
    capped = capped || right_capped;

    let mut n_shrinks = 0u32;
    while n_shrinks < cfg.max_iter {
        n_shrinks += 1;
        let cand = state.rng.uniform(lo, hi)?;
        let log_f_cand = target.log_eval(cand)?;
        n_evals += 1;
        if log_f_cand > level {
            state.x = cand;
            state.cached_log_f = Some(log_f_cand);
            state.t += 1;
            return Ok(DrawRecord {
                x: cand,
                n_evals,
                n_shrinks,
                capped,
            });
        }
        if cand < state.x {
            lo = cand;
        } else {
            hi = cand;
        }
    }
    state.t += 1;
    Ok(DrawRecord {
        x: state.x,
        n_evals,
        n_shrinks: cfg.max_iter,
        capped: true,
    })
}

/// One draw with whichever method the configuration selects.
pub fn draw(
    state: &mut ChainState,
    target: &mut LogDensity,
    cfg: &SamplerConfig,
) -> Result<DrawRecord, SamplerError> {
    match cfg.method {
        Method::Bounded { .. } => slice_bounded(state, target, cfg),
        Method::Unbounded { .. } => slice_unbounded(state, target, cfg),
        Method::Positive => slice_positive(state, target, cfg),
        Method::SteppingOut { .. } => stepping_out(state, target, cfg),
    }
}

/// Run a chain for `burn_in + n` draws and return the last `n` records.
/// Deterministic given the stream's seed.
pub fn run_chain(
    target: &mut LogDensity,
    cfg: &SamplerConfig,
    x0: f64,
    n: usize,
    burn_in: usize,
    rng: RngStream,
) -> Result<Vec<DrawRecord>, SamplerError> {
    if n == 0 {
        return Err(SamplerError::Config("n must be positive".into()));
    }
    let mut state = ChainState::new(x0, rng);
    let mut records = Vec::with_capacity(n);
    for t in 1..=(burn_in + n) {
        let rec = draw(&mut state, target, cfg).map_err(|e| SamplerError::AtDraw {
            t: t as u64,
            source: Box::new(e),
        })?;
        if t > burn_in {
            records.push(rec);
        }
    }
    Ok(records)
}
