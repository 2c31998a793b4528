//! Unnormalized log-densities: the built-in benchmark targets plus arbitrary
//! user densities parsed from expression text.
//!
//! Samplers consume log f(x), never f(x) itself; built-in targets are written
//! directly in log space and expression targets are evaluated through the
//! structural log rewrite in [`expr`], so sharply peaked densities stay
//! finite over their whole support.

pub mod expr;

use serde::Serialize;
use thiserror::Error;

pub use expr::{parse_density, EvalError, ExprAst, ParseError, ParseErrorKind};

use expr::{gauss_logpdf, log_sum_exp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Support {
    RealLine,
    PositiveReals,
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match self {
            Support::RealLine => x.is_finite(),
            Support::PositiveReals => x.is_finite() && x > 0.0,
        }
    }
}

/// The benchmark targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// f(x) = exp(-x (x-1) (x-2) (x-3.5)), a two-bump quartic well.
    Quartic,
    /// f(x) = exp(-(x-500)^2 / 10), a narrow Gaussian far from the origin.
    Gauss500,
    /// f(x) = exp(-(x-1000)^2 / 100), an even more distant Gaussian.
    Gauss1000,
    /// f(x) = x^4 e^{-x}, i.e. Gamma(5, 1), on x > 0.
    Gamma51,
    /// 0.8 N(x | 0, 1) + 0.2 N(x | 10, 1), a well-separated mixture.
    Gmm,
}

impl Builtin {
    pub const ALL: [Builtin; 5] = [
        Builtin::Quartic,
        Builtin::Gauss500,
        Builtin::Gauss1000,
        Builtin::Gamma51,
        Builtin::Gmm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Quartic => "quartic",
            Builtin::Gauss500 => "gauss500",
            Builtin::Gauss1000 => "gauss1000",
            Builtin::Gamma51 => "gamma51",
            Builtin::Gmm => "gmm",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.iter().copied().find(|b| b.name() == name)
    }

    fn support(&self) -> Support {
        match self {
            Builtin::Gamma51 => Support::PositiveReals,
            _ => Support::RealLine,
        }
    }

    fn log_f(&self, x: f64) -> f64 {
        match self {
            Builtin::Quartic => -x * (x - 1.0) * (x - 2.0) * (x - 3.5),
            Builtin::Gauss500 => -(x - 500.0) * (x - 500.0) / 10.0,
            Builtin::Gauss1000 => -(x - 1000.0) * (x - 1000.0) / 100.0,
            Builtin::Gamma51 => 4.0 * x.ln() - x,
            Builtin::Gmm => log_sum_exp(
                [
                    0.8f64.ln() + gauss_logpdf(x, 0.0, 1.0),
                    0.2f64.ln() + gauss_logpdf(x, 10.0, 1.0),
                ]
                .into_iter(),
            ),
        }
    }
}

fn available_names() -> String {
    Builtin::ALL
        .iter()
        .map(|b| b.name())
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TargetError {
    #[error("unknown target `{name}`; available: {available}")]
    UnknownBuiltin { name: String, available: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("x = {x} is outside the target's support ({support:?})")]
    OutsideSupport { x: f64, support: Support },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone)]
enum Source {
    Builtin(Builtin),
    Expression(ExprAst),
}

/// An evaluatable unnormalized log-density with an evaluation counter.
///
/// Evaluation needs `&mut self` for the counter; run parallel chains on
/// separate clones and merge counts afterwards.
#[derive(Debug, Clone)]
pub struct LogDensity {
    source: Source,
    support: Support,
    eval_count: u64,
}

impl LogDensity {
    /// Look up a benchmark target by name.
    pub fn builtin(name: &str) -> Result<Self, TargetError> {
        let b = Builtin::from_name(name).ok_or_else(|| TargetError::UnknownBuiltin {
            name: name.into(),
            available: available_names(),
        })?;
        Ok(Self {
            source: Source::Builtin(b),
            support: b.support(),
            eval_count: 0,
        })
    }

    /// Parse density text into a target over the given support.
    pub fn from_expression(text: &str, support: Support) -> Result<Self, TargetError> {
        Ok(Self::from_ast(parse_density(text)?, support))
    }

    pub fn from_ast(ast: ExprAst, support: Support) -> Self {
        Self {
            source: Source::Expression(ast),
            support,
            eval_count: 0,
        }
    }

    /// Restrict the support to x > 0. This truncates the density; slice
    /// samplers do not care about the lost mass.
    pub fn restrict_positive(mut self) -> Self {
        self.support = Support::PositiveReals;
        self
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    pub fn reset_eval_count(&mut self) {
        self.eval_count = 0;
    }

    /// The builtin behind this target, if any.
    pub fn as_builtin(&self) -> Option<Builtin> {
        match self.source {
            Source::Builtin(b) => Some(b),
            Source::Expression(_) => None,
        }
    }

    /// Short label for reports: the builtin name or the printed expression.
    pub fn label(&self) -> String {
        match &self.source {
            Source::Builtin(b) => b.name().into(),
            Source::Expression(ast) => ast.to_string(),
        }
    }

    /// log f(x). Returns a finite value or -inf (where f vanishes); never
    /// NaN. Each successful entry past the support check counts as one
    /// evaluation.
    pub fn log_eval(&mut self, x: f64) -> Result<f64, TargetError> {
        if !self.support.contains(x) {
            return Err(TargetError::OutsideSupport {
                x,
                support: self.support,
            });
        }
        self.eval_count += 1;
        let v = match &self.source {
            Source::Builtin(b) => b.log_f(x),
            Source::Expression(ast) => ast.log_of(x)?,
        };
        if v.is_nan() || v == f64::INFINITY {
            return Err(TargetError::Eval(EvalError {
                x,
                subexpr: self.label(),
            }));
        }
        Ok(v)
    }
}
