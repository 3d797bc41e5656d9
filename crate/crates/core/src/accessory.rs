//! Jacobi accessory equations.
//!
//! The self-adjoint equations `−(P u′)′ + Q u = 0` and `−(P v′)′ + Q v = T`
//! are integrated as the first-order system
//!
//! ```text
//! u′ = zu / P     zu′ = Q u
//! v′ = zv / P     zv′ = Q v − T
//! m′ = u T        n′ = v T
//! ```
//!
//! with `zu = P u′`, `zv = P v′`, so `P` is never differentiated. `m` and `n`
//! are the moments `∫_a^x uT` and `∫_a^x vT` that enter `Δ = m v − n u`.

use crate::conjugate::SampledFunction;
use crate::ode::{integrate_on_grid, Tolerance};
use crate::problem::{CoefficientField, Coefficients, Interval, RegimeKind};
use crate::{Error, Result};

/// Relative local tolerance of the accessory integration.
pub const RTOL: f64 = 1e-10;
/// Absolute local tolerance of the accessory integration.
pub const ATOL: f64 = 1e-12;
/// Minimum number of output intervals.
pub const MIN_OUTPUT: usize = 1000;

/// Initial state at `x = a`. `zu0 = P(a) u′(a)`, `zv0 = P(a) v′(a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions {
    pub u0: f64,
    pub zu0: f64,
    pub v0: f64,
    pub zv0: f64,
}

impl InitialConditions {
    /// `u(a) = 0, u′(a) = 1` and `v(a) = v′(a) = 0`.
    pub fn dirichlet(p_at_a: f64) -> Self {
        Self {
            u0: 0.0,
            zu0: p_at_a,
            v0: 0.0,
            zv0: 0.0,
        }
    }

    /// `u(a) = u0, u′(a) = 0` and `v(a) = v′(a) = 0`.
    pub fn mixed(u0: f64) -> Self {
        Self {
            u0,
            zu0: 0.0,
            v0: 0.0,
            zv0: 0.0,
        }
    }

    /// Regime defaults for an oriented field.
    pub fn for_field(field: &dyn CoefficientField) -> Result<Self> {
        Ok(match field.regime() {
            RegimeKind::Dirichlet => {
                let p = field.coefficients_at(field.interval().a())?.p;
                Self::dirichlet(p)
            }
            _ => Self::mixed(field.mixed_u0()),
        })
    }

    /// Applies user overrides of `u(a)` and `v(a)`. Dirichlet problems need
    /// `u(a) = v(a) = 0`, so only zero overrides are accepted there.
    pub fn with_overrides(
        mut self,
        regime: RegimeKind,
        u0: Option<f64>,
        v0: Option<f64>,
    ) -> Result<Self> {
        if regime == RegimeKind::Dirichlet {
            if u0.is_some_and(|u| u != 0.0) || v0.is_some_and(|v| v != 0.0) {
                return Err(Error::InvalidInitialConditions(
                    "fixed-end problems require u(a) = 0 and v(a) = 0".into(),
                ));
            }
            return Ok(self);
        }
        if let Some(u) = u0 {
            self.u0 = u;
        }
        if let Some(v) = v0 {
            self.v0 = v;
        }
        self.ensure_nontrivial()?;
        Ok(self)
    }

    pub fn ensure_nontrivial(&self) -> Result<()> {
        if self.u0 == 0.0 && self.zu0 == 0.0 {
            return Err(Error::InvalidInitialConditions(
                "u(a) and u'(a) both vanish; u would be identically zero".into(),
            ));
        }
        Ok(())
    }

    pub fn scaled(self, c: f64) -> Self {
        Self {
            u0: c * self.u0,
            zu0: c * self.zu0,
            ..self
        }
    }
}

/// One row of the accessory trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub u: f64,
    pub zu: f64,
    pub v: f64,
    pub zv: f64,
    pub m: f64,
    pub n: f64,
    pub coeffs: Coefficients,
}

impl Sample {
    pub fn uprime(&self) -> f64 {
        self.zu / self.coeffs.p
    }

    pub fn vprime(&self) -> f64 {
        self.zv / self.coeffs.p
    }

    /// `Δ = m v − n u`.
    pub fn delta(&self) -> f64 {
        self.m * self.v - self.n * self.u
    }

    /// `Δ′ = m v′ − n u′` (the `uTv` terms cancel).
    pub fn delta_prime(&self) -> f64 {
        self.m * self.vprime() - self.n * self.uprime()
    }

    fn state(&self) -> [f64; 6] {
        [self.u, self.zu, self.v, self.zv, self.m, self.n]
    }

    fn derivative(&self) -> [f64; 6] {
        rhs(&self.coeffs, &self.state())
    }
}

fn rhs(c: &Coefficients, s: &[f64; 6]) -> [f64; 6] {
    let [u, zu, v, zv, _, _] = *s;
    [zu / c.p, c.q * u, zv / c.p, c.q * v - c.t, u * c.t, v * c.t]
}

/// Dense samples of `(u, Pu′, v, Pv′, m, n)` on a uniform grid over `[a, b]`.
#[derive(Debug, Clone)]
pub struct AccessoryTrajectory {
    samples: Vec<Sample>,
    isoperimetric: bool,
    ics: InitialConditions,
}

impl AccessoryTrajectory {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn is_isoperimetric(&self) -> bool {
        self.isoperimetric
    }

    pub fn initial_conditions(&self) -> InitialConditions {
        self.ics
    }

    pub fn interval(&self) -> Interval {
        let a = self.samples[0].x;
        let b = self.samples[self.samples.len() - 1].x;
        Interval::new(a, b).expect("trajectory spans a < b")
    }

    /// Spacing of the output grid.
    pub fn grid_step(&self) -> f64 {
        self.interval().len() / (self.samples.len() - 1) as f64
    }

    /// State `[u, zu, v, zv, m, n]` at `x`, by cubic Hermite interpolation
    /// between neighbouring samples.
    pub fn state_at(&self, x: f64) -> [f64; 6] {
        let i = self.bracket(x);
        let (s0, s1) = (&self.samples[i], &self.samples[i + 1]);
        let (y0, y1) = (s0.state(), s1.state());
        let (d0, d1) = (s0.derivative(), s1.derivative());
        let mut out = [0.0; 6];
        for k in 0..6 {
            out[k] = hermite(s0.x, s1.x, y0[k], y1[k], d0[k], d1[k], x);
        }
        out
    }

    fn bracket(&self, x: f64) -> usize {
        let n = self.samples.len();
        self.samples
            .partition_point(|s| s.x <= x)
            .saturating_sub(1)
            .min(n - 2)
    }

    /// `u` with derivative data, for zero finding.
    pub fn u_function(&self) -> SampledFunction {
        SampledFunction::with_derivative(
            self.samples.iter().map(|s| s.x).collect(),
            self.samples.iter().map(|s| s.u).collect(),
            self.samples.iter().map(Sample::uprime).collect(),
        )
    }

    /// `Δ` with derivative data, for zero finding.
    pub fn delta_function(&self) -> SampledFunction {
        SampledFunction::with_derivative(
            self.samples.iter().map(|s| s.x).collect(),
            self.samples.iter().map(Sample::delta).collect(),
            self.samples.iter().map(Sample::delta_prime).collect(),
        )
    }

    #[cfg(test)]
    pub(crate) fn samples_mut(&mut self) -> &mut [Sample] {
        &mut self.samples
    }
}

pub(crate) fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// Integrates the accessory system over the field's interval with at least
/// `max(n_out, 1000)` output intervals.
pub fn integrate(
    field: &dyn CoefficientField,
    ics: InitialConditions,
    n_out: usize,
) -> Result<AccessoryTrajectory> {
    ics.ensure_nontrivial()?;
    let isoperimetric = field.is_isoperimetric();
    let ics = if isoperimetric {
        ics
    } else {
        InitialConditions {
            v0: 0.0,
            zv0: 0.0,
            ..ics
        }
    };
    let grid = field.interval().grid(n_out.max(MIN_OUTPUT));
    let coeffs = |x: f64| -> Result<Coefficients> {
        let c = field.coefficients_at(x)?;
        if c.p == 0.0 {
            return Err(Error::SingularCoefficient {
                name: "P",
                x,
                value: c.p,
            });
        }
        Ok(c)
    };
    let states = integrate_on_grid(
        |x, s: &[f64; 6]| Ok(rhs(&coeffs(x)?, s)),
        &grid,
        [ics.u0, ics.zu0, ics.v0, ics.zv0, 0.0, 0.0],
        Tolerance {
            rtol: RTOL,
            atol: ATOL,
        },
    )?;
    let samples = grid
        .iter()
        .zip(&states)
        .map(|(&x, s)| {
            Ok(Sample {
                x,
                u: s[0],
                zu: s[1],
                v: s[2],
                zv: s[3],
                m: s[4],
                n: s[5],
                coeffs: coeffs(x)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AccessoryTrajectory {
        samples,
        isoperimetric,
        ics,
    })
}

/// `(x_i, Δ_i)` with `Δ = m v − n u`.
pub fn delta_series(traj: &AccessoryTrajectory) -> Vec<(f64, f64)> {
    traj.samples.iter().map(|s| (s.x, s.delta())).collect()
}

/// Largest violation of `P(u′v − uv′) = m + P(a)(u′v − uv′)(a)` along the
/// trajectory. The constant vanishes for `u′(a) = v′(a) = 0`.
pub fn wronskian_residual(traj: &AccessoryTrajectory) -> f64 {
    let ics = traj.ics;
    let c = ics.zu0 * ics.v0 - ics.u0 * ics.zv0;
    traj.samples
        .iter()
        .map(|s| ((s.zu * s.v - s.u * s.zv) - s.m - c).abs())
        .fold(0.0, f64::max)
}

/// A scalar function with derivative access.
pub trait SolutionFn {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
}

/// Adapts a pair of closures (value, derivative).
pub struct FnSolution<F, D>(pub F, pub D);

impl<F: Fn(f64) -> f64, D: Fn(f64) -> f64> SolutionFn for FnSolution<F, D> {
    fn value(&self, x: f64) -> f64 {
        (self.0)(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        (self.1)(x)
    }
}

/// `offset + c1 θ1 + c2 θ2`, where `offset` is an optional particular
/// solution with unit weight.
pub struct Combination<'a> {
    offset: Option<&'a dyn SolutionFn>,
    terms: [(f64, &'a dyn SolutionFn); 2],
}

impl Combination<'_> {
    pub fn coefficients(&self) -> [f64; 2] {
        [self.terms[0].0, self.terms[1].0]
    }
}

impl SolutionFn for Combination<'_> {
    fn value(&self, x: f64) -> f64 {
        self.offset.map_or(0.0, |f| f.value(x))
            + self.terms.iter().map(|(c, f)| c * f.value(x)).sum::<f64>()
    }

    fn derivative(&self, x: f64) -> f64 {
        self.offset.map_or(0.0, |f| f.derivative(x))
            + self
                .terms
                .iter()
                .map(|(c, f)| c * f.derivative(x))
                .sum::<f64>()
    }
}

/// Builds `u` and `v` with `u′(a) = v′(a) = 0` from two independent
/// homogeneous solutions `θ1, θ2` and a particular solution `θ0` of
/// `L(θ0) = T`:
///
/// ```text
/// u = θ2′(a) θ1 − θ1′(a) θ2
/// v = θ0 + C1 θ1 + C2 θ2,   C1 θ1′(a) + C2 θ2′(a) + θ0′(a) = 0
/// ```
///
/// The free direction in `(C1, C2)` only adds a multiple of `u` to `v`, which
/// leaves `Δ` unchanged; we take `C2 = 0` when `θ1′(a) ≠ 0`, else `C1 = 0`.
pub fn construct_from_basis<'a>(
    theta0: &'a dyn SolutionFn,
    theta1: &'a dyn SolutionFn,
    theta2: &'a dyn SolutionFn,
    a: f64,
) -> Result<(Combination<'a>, Combination<'a>)> {
    let d1 = theta1.derivative(a);
    let d2 = theta2.derivative(a);
    let d0 = theta0.derivative(a);
    if d1 == 0.0 && d2 == 0.0 {
        return Err(Error::DegenerateBasis(
            "theta1'(a) = theta2'(a) = 0: the basis is dependent and u vanishes identically".into(),
        ));
    }
    let u = Combination {
        offset: None,
        terms: [(d2, theta1), (-d1, theta2)],
    };
    let (c1, c2) = if d1 != 0.0 {
        (-d0 / d1, 0.0)
    } else {
        (0.0, -d0 / d2)
    };
    let v = Combination {
        offset: Some(theta0),
        terms: [(c1, theta1), (c2, theta2)],
    };
    Ok((u, v))
}
