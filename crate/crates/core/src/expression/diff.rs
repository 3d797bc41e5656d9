//! Central finite differences.
//!
//! First derivatives use the two-point central stencil with
//! `h = ε^(1/3)·max(1, |c|)`, where `c` is the perturbed coordinate. Second
//! derivatives use fourth-order stencils (Richardson combination of the
//! `h` and `2h` central stencils) with `h = ε^(1/6)·max(1, |c|)`; quadratics
//! are then differentiated to round-off. Third derivatives, only needed for
//! `dR/dx` along an extremal, nest a fourth-order first derivative around a
//! fourth-order mixed second derivative with `h = ε^(1/7)·max(1, |c|)`.

use super::{EvalError, Expr, Point, Variable};

fn step(power: f64, coord: f64) -> f64 {
    let h = f64::EPSILON.powf(power) * coord.abs().max(1.0);
    // make c ± h exactly representable
    (coord + h) - coord
}

fn first_step(coord: f64) -> f64 {
    step(1.0 / 3.0, coord)
}

pub(crate) fn second_step(coord: f64) -> f64 {
    step(1.0 / 6.0, coord)
}

pub(crate) fn third_step(coord: f64) -> f64 {
    step(1.0 / 7.0, coord)
}

/// First or second partial derivative of `expr` with respect to the listed
/// variables (`[v]` or `[u, v]`).
pub fn partial(expr: &Expr, wrt: &[Variable], at: Point) -> Result<f64, EvalError> {
    partial_of(|p| expr.evaluate(p), wrt, at)
}

/// [`partial`] for an arbitrary scalar function of a [`Point`].
pub fn partial_of<F>(f: F, wrt: &[Variable], at: Point) -> Result<f64, EvalError>
where
    F: Fn(Point) -> Result<f64, EvalError>,
{
    match *wrt {
        [v] => {
            let h = first_step(at.get(v));
            directional_first(&f, at, Point::unit(v), h)
        }
        [u, v] => {
            let hu = second_step(at.get(u));
            let hv = second_step(at.get(v));
            directional_mixed(&f, at, Point::unit(u), hu, Point::unit(v), hv)
        }
        _ => Err(EvalError::DerivativeOrder(wrt.len())),
    }
}

/// `(f(p + h·d) − f(p − h·d)) / 2h`.
pub fn directional_first<F>(f: &F, at: Point, dir: Point, h: f64) -> Result<f64, EvalError>
where
    F: Fn(Point) -> Result<f64, EvalError>,
{
    let fp = f(at.shifted(dir, h))?;
    let fm = f(at.shifted(dir, -h))?;
    Ok((fp - fm) / (2.0 * h))
}

/// Fourth-order first derivative along `dir`.
fn directional_first4<F>(f: &F, at: Point, dir: Point, h: f64) -> Result<f64, EvalError>
where
    F: Fn(Point) -> Result<f64, EvalError>,
{
    let f1 = f(at.shifted(dir, h))? - f(at.shifted(dir, -h))?;
    let f2 = f(at.shifted(dir, 2.0 * h))? - f(at.shifted(dir, -2.0 * h))?;
    Ok((8.0 * f1 - f2) / (12.0 * h))
}

/// Fourth-order second derivative along `d1` then `d2`.
pub fn directional_mixed<F>(
    f: &F,
    at: Point,
    d1: Point,
    h1: f64,
    d2: Point,
    h2: f64,
) -> Result<f64, EvalError>
where
    F: Fn(Point) -> Result<f64, EvalError>,
{
    if d1 == d2 && h1 == h2 {
        let f0 = f(at)?;
        let s1 = f(at.shifted(d1, h1))? + f(at.shifted(d1, -h1))?;
        let s2 = f(at.shifted(d1, 2.0 * h1))? + f(at.shifted(d1, -2.0 * h1))?;
        return Ok((16.0 * s1 - s2 - 30.0 * f0) / (12.0 * h1 * h1));
    }
    let four_point = |s: f64| -> Result<f64, EvalError> {
        let (a, b) = (s * h1, s * h2);
        let pp = f(at.shifted(d1, a).shifted(d2, b))?;
        let pm = f(at.shifted(d1, a).shifted(d2, -b))?;
        let mp = f(at.shifted(d1, -a).shifted(d2, b))?;
        let mm = f(at.shifted(d1, -a).shifted(d2, -b))?;
        Ok(((pp + mm) - (pm + mp)) / (4.0 * a * b))
    };
    let near = four_point(1.0)?;
    let far = four_point(2.0)?;
    Ok((4.0 * near - far) / 3.0)
}

/// Derivative along `dir` (step `t`) of the mixed second partial `∂²f/∂u∂v`.
pub fn directional_third_mixed<F>(
    f: &F,
    at: Point,
    dir: Point,
    t: f64,
    u: Variable,
    v: Variable,
) -> Result<f64, EvalError>
where
    F: Fn(Point) -> Result<f64, EvalError>,
{
    let inner = |p: Point| {
        let hu = third_step(p.get(u));
        let hv = third_step(p.get(v));
        directional_mixed(f, p, Point::unit(u), hu, Point::unit(v), hv)
    };
    directional_first4(&inner, at, dir, t)
}
