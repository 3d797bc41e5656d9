//! Conjugate-point search and the overall verdict.

use crate::accessory::{self, hermite, AccessoryTrajectory, InitialConditions};
use crate::problem::{
    check_preconditions, CoefficientField, Oriented, PreconditionReport, RegimeKind, Tolerances,
};
use crate::{Error, Result};

/// Relative floor below which a sample counts as zero.
pub const ZERO_FLOOR: f64 = 1e-9;
/// Relative width at which bisection stops.
pub const BISECTION_TOL: f64 = 1e-10;
/// Relative distance from `b` within which a zero is taken to sit at `b`.
pub const AT_B_TOL: f64 = 1e-7;

/// Ordered samples of a scalar function, optionally with derivatives for
/// cubic Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    x: Vec<f64>,
    f: Vec<f64>,
    df: Option<Vec<f64>>,
}

impl SampledFunction {
    /// Piecewise-linear interpolation between samples.
    pub fn new(x: Vec<f64>, f: Vec<f64>) -> Self {
        assert_eq!(x.len(), f.len());
        assert!(x.len() >= 2, "need at least two samples");
        Self { x, f, df: None }
    }

    pub fn with_derivative(x: Vec<f64>, f: Vec<f64>, df: Vec<f64>) -> Self {
        assert_eq!(df.len(), f.len());
        Self {
            df: Some(df),
            ..Self::new(x, f)
        }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    /// Interpolated value on segment `i` (between samples `i` and `i + 1`).
    fn on_segment(&self, i: usize, x: f64) -> f64 {
        let (x0, x1, y0, y1) = (self.x[i], self.x[i + 1], self.f[i], self.f[i + 1]);
        match &self.df {
            Some(d) => hermite(x0, x1, y0, y1, d[i], d[i + 1], x),
            None => y0 + (y1 - y0) * (x - x0) / (x1 - x0),
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let i = self
            .x
            .partition_point(|&s| s <= x)
            .saturating_sub(1)
            .min(self.x.len() - 2);
        self.on_segment(i, x)
    }

    pub fn floor(&self) -> f64 {
        ZERO_FLOOR * self.f.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    fn bisect(&self, i: usize) -> f64 {
        let span = self.x[self.x.len() - 1] - self.x[0];
        let (mut lo, mut hi) = (self.x[i], self.x[i + 1]);
        let mut f_lo = self.f[i];
        while hi - lo > BISECTION_TOL * span {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = self.on_segment(i, mid);
            if f_mid == 0.0 {
                return mid;
            }
            if (f_mid > 0.0) == (f_lo > 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// First zero of `f` strictly beyond `exclude_below`.
///
/// Sign changes between samples are refined by bisection on the
/// interpolant. A sample whose magnitude is below `1e-9 · max|f|` is also
/// reported when it is a local minimum of `|f|` (a touching zero) or the
/// last sample. The sample at or below `exclude_below` only brackets a sign
/// change when it is itself above that floor.
pub fn first_zero(f: &SampledFunction, exclude_below: f64) -> Option<f64> {
    let n = f.x.len();
    let floor = f.floor();
    if floor == 0.0 {
        return None;
    }
    let mag = |i: usize| f.f[i].abs();
    let mut start =
        f.x.partition_point(|&s| s <= exclude_below)
            .saturating_sub(1);
    if f.x[start] <= exclude_below && mag(start) <= floor {
        start += 1;
    }
    for i in start..n.saturating_sub(1) {
        let (fa, fb) = (f.f[i], f.f[i + 1]);
        if fa * fb < 0.0 {
            let root = f.bisect(i);
            if root > exclude_below {
                return Some(root);
            }
        }
        let j = i + 1;
        if mag(j) <= floor && f.x[j] > exclude_below {
            if j == n - 1 {
                return Some(f.x[j]);
            }
            let crosses_next = f.f[j] * f.f[j + 1] < 0.0;
            if !crosses_next && mag(j) <= mag(i) && mag(j) <= mag(j + 1) {
                return Some(f.x[j]);
            }
        }
    }
    None
}

/// `Δ‴(a, a)` and whether it vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleDerivative {
    pub value: f64,
    /// `u(a) = 0` or `T(a) = 0`: the cubic model of `Δ` near `a` is void.
    pub degenerate: bool,
}

/// `Δ‴(a, a) = −2 u(a) T(a)² / P(a)` for an oriented isoperimetric field.
pub fn delta_triple_derivative(
    field: &dyn CoefficientField,
    ics: InitialConditions,
) -> Result<TripleDerivative> {
    if !field.is_isoperimetric() {
        return Err(Error::InvalidArgument(
            "the third derivative of Delta is only defined for isoperimetric problems".into(),
        ));
    }
    let c = field.coefficients_at(field.interval().a())?;
    if c.p <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "P(a) = {} must be positive",
            c.p
        )));
    }
    let value = -2.0 * ics.u0 * c.t * c.t / c.p;
    Ok(TripleDerivative {
        value,
        degenerate: value == 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    U,
    Delta,
}

impl TestFunction {
    pub fn name(self) -> &'static str {
        match self {
            TestFunction::U => "u",
            TestFunction::Delta => "Delta",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateResult {
    pub found: bool,
    /// First zero, in the coordinates of the original problem.
    pub location: Option<f64>,
    pub test_function: TestFunction,
    /// Half-width of the excluded neighbourhood of the analysed left end.
    pub near_a_window: f64,
    pub triple_derivative_at_a: Option<TripleDerivative>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    PositiveDefinite,
    Indefinite,
    DegenerateAtB,
    PreconditionFailed,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::PositiveDefinite => "PositiveDefinite",
            Classification::Indefinite => "Indefinite",
            Classification::DegenerateAtB => "DegenerateAtB",
            Classification::PreconditionFailed => "PreconditionFailed",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub classification: Classification,
    pub preconditions: PreconditionReport,
    /// Absent when the analysis stopped at the preconditions.
    pub conjugate: Option<ConjugateResult>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictOptions {
    /// Number of grid intervals for preconditions and output.
    pub grid: usize,
    /// Multiplies every precondition tolerance.
    pub tol_scale: f64,
    pub u0: Option<f64>,
    pub v0: Option<f64>,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self {
            grid: 1000,
            tol_scale: 1.0,
            u0: None,
            v0: None,
        }
    }
}

/// Initial conditions for an oriented field under the given overrides.
pub fn initial_conditions(
    field: &dyn CoefficientField,
    opts: &VerdictOptions,
) -> Result<InitialConditions> {
    InitialConditions::for_field(field)?.with_overrides(field.regime(), opts.u0, opts.v0)
}

/// Half-width of the neighbourhood of `a` where `Δ` is indistinguishable
/// from its structural zero.
fn near_a_window(
    field: &dyn CoefficientField,
    traj: &AccessoryTrajectory,
    triple: TripleDerivative,
) -> Result<(f64, Option<String>)> {
    let min = 2.0 * traj.grid_step();
    let target = 10.0 * accessory::ATOL;
    if !triple.degenerate {
        let s = (6.0 * target / triple.value.abs()).cbrt();
        return Ok((min.max(s), None));
    }
    let c = field.coefficients_at(field.interval().a())?;
    let ics = traj.initial_conditions();
    if field.regime() == RegimeKind::Dirichlet && c.t != 0.0 && ics.zu0 != 0.0 {
        // with u(a) = 0 the leading term is −u′(a) T(a)² s⁴ / (12 P(a))
        let coeff = (ics.zu0 / c.p).abs() * c.t * c.t / (12.0 * c.p);
        return Ok((min.max((target / coeff).powf(0.25)), None));
    }
    Ok((
        min,
        Some("Delta'''(a) vanishes; behaviour of Delta near a is inconclusive".into()),
    ))
}

/// Runs the preconditions and, if they hold, the conjugate-point test.
pub fn verdict(field: &dyn CoefficientField, opts: &VerdictOptions) -> Result<Verdict> {
    let oriented = Oriented::new(field);
    let tol = Tolerances::default().scaled(opts.tol_scale);
    let preconditions = check_preconditions(&oriented, opts.grid, tol)?;
    let mut notes = preconditions.notes.clone();
    if oriented.is_reflected() {
        notes.push("free right end: analysed on the reflected interval".into());
    }
    if !preconditions.all_ok() {
        return Ok(Verdict {
            classification: Classification::PreconditionFailed,
            preconditions,
            conjugate: None,
            notes,
        });
    }
    let ics = initial_conditions(&oriented, opts)?;
    let failed = |e: Error, preconditions: PreconditionReport, mut notes: Vec<String>| {
        notes.push(format!("accessory integration failed: {e}"));
        Verdict {
            classification: Classification::PreconditionFailed,
            preconditions,
            conjugate: None,
            notes,
        }
    };
    let traj = match accessory::integrate(&oriented, ics, opts.grid) {
        Ok(t) => t,
        Err(e) => return Ok(failed(e, preconditions, notes)),
    };

    let iv = oriented.interval();
    let (test, samples, window, triple) = if oriented.is_isoperimetric() {
        let triple = delta_triple_derivative(&oriented, ics)?;
        let (w, note) = near_a_window(&oriented, &traj, triple)?;
        notes.extend(note);
        (TestFunction::Delta, traj.delta_function(), w, Some(triple))
    } else {
        (TestFunction::U, traj.u_function(), 0.0, None)
    };
    let zero = first_zero(&samples, iv.a() + window);
    let values = samples.values();
    let at_b = match zero {
        Some(z) => iv.b() - z <= AT_B_TOL * iv.len(),
        None => false,
    } || values[values.len() - 1].abs() <= samples.floor();

    let classification = match zero {
        _ if at_b => Classification::DegenerateAtB,
        Some(_) => Classification::Indefinite,
        None => Classification::PositiveDefinite,
    };
    let zero = match (zero, at_b) {
        (None, true) => Some(iv.b()),
        (z, _) => z,
    };
    if let Some(z) = zero {
        notes.push(format!(
            "first zero of {} at x = {:.10}",
            test.name(),
            oriented.to_original(z)
        ));
    }
    Ok(Verdict {
        classification,
        preconditions,
        conjugate: Some(ConjugateResult {
            found: zero.is_some(),
            location: zero.map(|z| oriented.to_original(z)),
            test_function: test,
            near_a_window: window,
            triple_derivative_at_a: triple,
        }),
        notes,
    })
}
