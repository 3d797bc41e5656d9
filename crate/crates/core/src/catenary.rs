//! Hanging-chain reference problems.
//!
//! The chain hangs over `[a, b]` with its apex at the free left end, so the
//! extremal is `y = ω cosh ζ − λ` with `ζ = (x − a)/ω`. Every quantity of the
//! second variation has a closed form in `ζ`.

use crate::expression::{parse, Params};
use crate::problem::{
    BoundaryRegime, CoefficientField, Coefficients, Extremal, ExtremalProblem, Interval,
    RegimeKind, VariationalProblem,
};
use crate::{Error, Result};

/// Positive root of `ζ tanh ζ = 1`.
pub const ZETA_STAR: f64 = 1.199_678_640_257_734;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Root of `ζ tanh ζ = 1` by bisection.
pub fn zeta_star() -> f64 {
    bisect(|z| z * z.tanh() - 1.0, 0.5, 2.0)
}

/// Bisects a sign change of `f` on `[lo, hi]` down to adjacent doubles.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-15 * (lo.abs() + hi.abs()) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
        if x1 >= x2 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn span(a: f64, b: f64) -> Result<f64> {
    Ok(Interval::new(a, b)?.len())
}

/// All `ω > 0` with `ω cosh((b − a)/ω) = y_b`, ascending. At tangency the
/// double root is listed twice.
pub fn solve_omega_fixed_height(a: f64, b: f64, y_b: f64) -> Result<Vec<f64>> {
    let len = span(a, b)?;
    if !(y_b > 0.0 && y_b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "y_b = {y_b} must be positive"
        )));
    }
    let g = |w: f64| w * (len / w).cosh();
    let w_min = golden_min(g, len / 50.0, 50.0 * len);
    let g_min = g(w_min);
    if (y_b - g_min).abs() <= 1e-12 * g_min {
        return Ok(vec![w_min, w_min]);
    }
    if y_b < g_min {
        return Ok(Vec::new());
    }
    let h = |w: f64| g(w) - y_b;
    let mut lo = len / 50.0;
    while h(lo) < 0.0 {
        lo *= 0.5;
    }
    let mut hi = 50.0 * len;
    while h(hi) < 0.0 {
        hi *= 2.0;
    }
    Ok(vec![bisect(h, lo, w_min), bisect(h, w_min, hi)])
}

/// The `ω > 0` with `ω sinh((b − a)/ω) = ℓ`.
pub fn solve_omega_fixed_length(a: f64, b: f64, ell: f64) -> Result<f64> {
    let len = span(a, b)?;
    if !ell.is_finite() || ell <= len {
        return Err(Error::InfeasibleLength { ell, span: len });
    }
    let h = |w: f64| w * (len / w).sinh() - ell;
    let mut lo = len;
    while h(lo) <= 0.0 {
        lo *= 0.5;
    }
    let mut hi = len;
    while h(hi) >= 0.0 {
        hi *= 2.0;
    }
    Ok(bisect(h, lo, hi))
}

/// Closed-form values at `ζ`; `u` and `v` use `u(a) = −1`, `v(a) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForms {
    pub y: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub t: f64,
    pub gyp: f64,
    pub u: f64,
    pub v: f64,
}

/// Closed forms for scale `ω` and multiplier `λ` at `ζ`.
pub fn closed_forms(omega: f64, lambda: f64, zeta: f64) -> ClosedForms {
    let (ch, sh) = (zeta.cosh(), zeta.sinh());
    let sech2 = 1.0 / (ch * ch);
    let u = zeta * sh - ch;
    ClosedForms {
        y: omega * ch - lambda,
        p: omega * sech2,
        q: -sech2 / omega,
        r: zeta.tanh(),
        t: -sech2 / omega,
        gyp: zeta.tanh(),
        u,
        v: 1.0 + u,
    }
}

/// `Δ = m v − n u` for the constrained problem, in `ζ`.
pub fn delta_closed_form(zeta: f64) -> f64 {
    zeta * zeta.cosh() - zeta.sinh()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    FixedHeight {
        y_b: f64,
    },
    /// `y_b` only shifts the multiplier.
    FixedLength {
        ell: f64,
        y_b: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Low,
    High,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatenaryProblem {
    pub a: f64,
    pub b: f64,
    pub variant: Variant,
    pub omega: f64,
    /// Zero for the fixed-height problem.
    pub lambda: f64,
}

impl CatenaryProblem {
    pub fn fixed_height(a: f64, b: f64, y_b: f64, branch: Branch) -> Result<Self> {
        let roots = solve_omega_fixed_height(a, b, y_b)?;
        let omega = match (branch, roots.as_slice()) {
            (Branch::Low, [lo, _]) => *lo,
            (Branch::High, [_, hi]) => *hi,
            _ => {
                return Err(Error::InvalidProblem(format!(
                    "no hanging chain with apex at a = {a} reaches y_b = {y_b} at b = {b}"
                )))
            }
        };
        Ok(Self {
            a,
            b,
            variant: Variant::FixedHeight { y_b },
            omega,
            lambda: 0.0,
        })
    }

    pub fn fixed_length(a: f64, b: f64, ell: f64, y_b: f64) -> Result<Self> {
        let omega = solve_omega_fixed_length(a, b, ell)?;
        Ok(Self::constrained(a, b, omega, ell, y_b))
    }

    fn constrained(a: f64, b: f64, omega: f64, ell: f64, y_b: f64) -> Self {
        Self {
            a,
            b,
            variant: Variant::FixedLength { ell, y_b },
            omega,
            lambda: omega * ((b - a) / omega).cosh() - y_b,
        }
    }

    /// Fixed-height problem whose data is generated by `ω`.
    pub fn fixed_height_from_omega(a: f64, b: f64, omega: f64) -> Result<Self> {
        let len = check_omega(a, b, omega)?;
        Ok(Self {
            a,
            b,
            variant: Variant::FixedHeight {
                y_b: omega * (len / omega).cosh(),
            },
            omega,
            lambda: 0.0,
        })
    }

    /// Fixed-length problem whose length is generated by `ω`.
    pub fn fixed_length_from_omega(a: f64, b: f64, omega: f64, y_b: f64) -> Result<Self> {
        let len = check_omega(a, b, omega)?;
        Ok(Self::constrained(
            a,
            b,
            omega,
            omega * (len / omega).sinh(),
            y_b,
        ))
    }

    pub fn is_constrained(&self) -> bool {
        matches!(self.variant, Variant::FixedLength { .. })
    }

    pub fn zeta(&self, x: f64) -> f64 {
        (x - self.a) / self.omega
    }

    pub fn at(&self, x: f64) -> ClosedForms {
        closed_forms(self.omega, self.lambda, self.zeta(x))
    }

    /// Height at the fixed right end.
    pub fn y_b(&self) -> f64 {
        match self.variant {
            Variant::FixedHeight { y_b } | Variant::FixedLength { y_b, .. } => y_b,
        }
    }

    /// The same problem stated through integrands, for the generic pipeline:
    /// `F = y √(1 + y′²)`, `G = √(1 + y′²)`.
    pub fn to_extremal_problem(&self) -> Result<ExtremalProblem> {
        let mut params = Params::new();
        params.insert("omega".into(), self.omega);
        params.insert("lambda".into(), self.lambda);
        params.insert("a".into(), self.a);
        let interval = Interval::new(self.a, self.b)?;
        let mut problem = VariationalProblem::new(
            parse("y*sqrt(1+yp^2)", &params)?,
            interval,
            BoundaryRegime::mixed_left_free(self.y_b()),
        );
        if let Variant::FixedLength { ell, .. } = self.variant {
            problem = problem.with_constraint(parse("sqrt(1+yp^2)", &params)?, ell, self.lambda);
        }
        let extremal = Extremal::new(parse("omega*cosh((x-a)/omega)-lambda", &params)?)?;
        Ok(ExtremalProblem::new(problem, extremal))
    }
}

fn check_omega(a: f64, b: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "omega = {omega} must be positive"
        )));
    }
    span(a, b)
}

impl CoefficientField for CatenaryProblem {
    fn interval(&self) -> Interval {
        Interval::new(self.a, self.b).expect("validated on construction")
    }

    fn regime(&self) -> RegimeKind {
        RegimeKind::MixedLeftFree
    }

    fn is_isoperimetric(&self) -> bool {
        self.is_constrained()
    }

    fn coefficients_at(&self, x: f64) -> Result<Coefficients> {
        let c = self.at(x);
        let iso = self.is_constrained();
        Ok(Coefficients {
            p: c.p,
            q: c.q,
            r: c.r,
            t: if iso { c.t } else { 0.0 },
            gyp: if iso { c.gyp } else { 0.0 },
        })
    }

    fn mixed_u0(&self) -> f64 {
        -1.0
    }
}
