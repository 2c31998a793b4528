//! Test-support utilities shared between the crate's own tests and the
//! workspace acceptance suite. Not part of the public API.

use crate::rng::RngStream;
use crate::targets::ExprAst;

/// Random expression tree of at most `depth` levels, over constants in a
/// range that keeps values printable and comparable.
pub fn random_ast(rng: &mut RngStream, depth: usize) -> ExprAst {
    if depth == 0 {
        return if rng.unit() < 0.4 {
            ExprAst::Var
        } else {
            ExprAst::Const(round3(rng.uniform(-5.0, 5.0).unwrap()))
        };
    }
    let sub = |rng: &mut RngStream| Box::new(random_ast(rng, depth - 1));
    match (rng.unit() * 12.0) as u32 {
        0 => ExprAst::Add(sub(rng), sub(rng)),
        1 => ExprAst::Sub(sub(rng), sub(rng)),
        2 => ExprAst::Mul(sub(rng), sub(rng)),
        3 => ExprAst::Div(sub(rng), sub(rng)),
        4 => ExprAst::Neg(sub(rng)),
        5 => {
            let k = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0][(rng.unit() * 7.0) as usize];
            ExprAst::Pow(sub(rng), k)
        }
        6 => ExprAst::Exp(sub(rng)),
        7 => ExprAst::Log(sub(rng)),
        8 => ExprAst::Abs(sub(rng)),
        9 => ExprAst::GaussLogPdf {
            arg: sub(rng),
            mean: round3(rng.uniform(-3.0, 3.0).unwrap()),
            sd: round3(rng.uniform(0.5, 2.0).unwrap()),
        },
        10 => ExprAst::Mixture(vec![
            (round3(rng.uniform(0.1, 1.0).unwrap()), random_ast(rng, depth - 1)),
            (round3(rng.uniform(0.1, 1.0).unwrap()), random_ast(rng, depth - 1)),
        ]),
        _ => random_ast(rng, depth - 1),
    }
}

/// Linear-space evaluations agree at `x`: both NaN, both infinite with the
/// same sign, or within 1e-12 relative error.
pub fn eval_agrees(a: &ExprAst, b: &ExprAst, x: f64) -> bool {
    let va = a.eval(x);
    let vb = b.eval(x);
    if va.is_nan() && vb.is_nan() {
        return true;
    }
    if va.is_infinite() || vb.is_infinite() {
        return va == vb;
    }
    (va - vb).abs() <= 1e-12 * va.abs().max(vb.abs()).max(1.0)
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}
