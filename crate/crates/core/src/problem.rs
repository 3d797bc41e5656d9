//! Variational problems, extremals and the coefficient fields of the second
//! variation along an extremal.
//!
//! For an integrand `H = F + λG` (just `F` without a constraint) the second
//! variation is governed by
//!
//! ```text
//! P = H_{y′y′},   R = H_{yy′},   Q = H_{yy} − dR/dx,
//! T = G_y − d/dx G_{y′}
//! ```
//!
//! evaluated at `(x, y(x), y′(x))`. Everything downstream (accessory
//! equations, conjugate-point search, discrete oracle) only sees these
//! coefficients through [`CoefficientField`], so closed-form reference
//! problems and user-supplied expressions travel the same path.

use crate::expression::{
    directional_mixed, directional_third_mixed, partial, partial_of, second_step, third_step,
    EvalError, Expr, Point, Variable,
};
use crate::{Error, Result};

/// Which ends carry a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeKind {
    /// `y(a) = A`, `y(b) = B`.
    Dirichlet,
    /// `y′(a) = 0` (free), `y(b) = B`.
    MixedLeftFree,
    /// `y(a) = A`, `y′(b) = 0` (free). Analysed by reflecting `x ↦ a + b − x`.
    MixedRightFree,
}

impl RegimeKind {
    pub fn name(self) -> &'static str {
        match self {
            RegimeKind::Dirichlet => "dirichlet",
            RegimeKind::MixedLeftFree => "mixed-left-free",
            RegimeKind::MixedRightFree => "mixed-right-free",
        }
    }

    pub fn is_mixed(self) -> bool {
        !matches!(self, RegimeKind::Dirichlet)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRegime {
    pub kind: RegimeKind,
    /// `A`, ignored when the left end is free.
    pub left: f64,
    /// `B`, ignored when the right end is free.
    pub right: f64,
}

impl BoundaryRegime {
    pub fn dirichlet(left: f64, right: f64) -> Self {
        Self {
            kind: RegimeKind::Dirichlet,
            left,
            right,
        }
    }

    pub fn mixed_left_free(right: f64) -> Self {
        Self {
            kind: RegimeKind::MixedLeftFree,
            left: f64::NAN,
            right,
        }
    }

    pub fn mixed_right_free(left: f64) -> Self {
        Self {
            kind: RegimeKind::MixedRightFree,
            left,
            right: f64::NAN,
        }
    }
}

/// Closed interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidProblem(format!(
                "interval requires finite a < b, got [{a}, {b}]"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// `n + 1` equally spaced abscissae, endpoints exact.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let h = self.len() / n as f64;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.b
                } else {
                    self.a + i as f64 * h
                }
            })
            .collect()
    }
}

/// Integral constraint `∫ G dx = ℓ` with its multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct Isoperimetric {
    pub constraint: Expr,
    pub length: f64,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalProblem {
    pub integrand: Expr,
    pub interval: Interval,
    pub regime: BoundaryRegime,
    pub isoperimetric: Option<Isoperimetric>,
}

impl VariationalProblem {
    pub fn new(integrand: Expr, interval: Interval, regime: BoundaryRegime) -> Self {
        Self {
            integrand,
            interval,
            regime,
            isoperimetric: None,
        }
    }

    pub fn with_constraint(mut self, constraint: Expr, length: f64, multiplier: f64) -> Self {
        self.isoperimetric = Some(Isoperimetric {
            constraint,
            length,
            multiplier,
        });
        self
    }

    /// `H = F + λG`, or `F` without a constraint.
    pub fn effective_integrand(&self, at: Point) -> Result<f64, EvalError> {
        let f = self.integrand.evaluate(at)?;
        match &self.isoperimetric {
            Some(iso) => Ok(f + iso.multiplier * iso.constraint.evaluate(at)?),
            None => Ok(f),
        }
    }
}

/// The candidate curve `y(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremal {
    y: Expr,
}

impl Extremal {
    pub fn new(y: Expr) -> Result<Self> {
        if y.depends_on(Variable::Y) || y.depends_on(Variable::Yp) {
            return Err(Error::InvalidProblem(
                "extremal must be an expression in x only".into(),
            ));
        }
        Ok(Self { y })
    }

    pub fn expr(&self) -> &Expr {
        &self.y
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self.y.eval(x, 0.0, 0.0)?)
    }

    pub fn slope(&self, x: f64) -> Result<f64> {
        Ok(partial(&self.y, &[Variable::X], Point::new(x, 0.0, 0.0))?)
    }

    pub fn curvature(&self, x: f64) -> Result<f64> {
        Ok(partial(
            &self.y,
            &[Variable::X, Variable::X],
            Point::new(x, 0.0, 0.0),
        )?)
    }
}

/// Second-variation coefficients at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coefficients {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// Zero for problems without a constraint.
    pub t: f64,
    /// `∂G/∂y′`; zero for problems without a constraint.
    pub gyp: f64,
}

impl Coefficients {
    fn check(self, x: f64) -> Result<Self> {
        for (name, value) in [
            ("P", self.p),
            ("Q", self.q),
            ("R", self.r),
            ("T", self.t),
            ("Gyp", self.gyp),
        ] {
            if !value.is_finite() {
                return Err(Error::SingularCoefficient { name, x, value });
            }
        }
        Ok(self)
    }
}

/// Source of `P, Q, R, T, ∂G/∂y′` along an extremal.
pub trait CoefficientField: Sync {
    fn interval(&self) -> Interval;

    fn regime(&self) -> RegimeKind;

    fn is_isoperimetric(&self) -> bool;

    fn coefficients_at(&self, x: f64) -> Result<Coefficients>;

    /// `u(a)` used for mixed initial conditions. Any nonzero value gives the
    /// same zero set.
    fn mixed_u0(&self) -> f64 {
        1.0
    }

    /// Extra warnings about the extremal itself (boundary residuals,
    /// Euler–Lagrange consistency). `grid` is in the field's own coordinates.
    fn diagnostics(&self, _grid: &[f64]) -> Vec<String> {
        Vec::new()
    }
}

/// A [`VariationalProblem`] together with its extremal.
#[derive(Debug, Clone)]
pub struct ExtremalProblem {
    pub problem: VariationalProblem,
    pub extremal: Extremal,
}

/// Relative threshold above which the Euler–Lagrange `y″` disagreement is
/// reported.
const EULER_LAGRANGE_WARN: f64 = 1e-4;
const BOUNDARY_WARN: f64 = 1e-6;

impl ExtremalProblem {
    pub fn new(problem: VariationalProblem, extremal: Extremal) -> Self {
        Self { problem, extremal }
    }

    fn point(&self, x: f64) -> Result<(Point, f64)> {
        let y = self.extremal.value(x)?;
        let yp = self.extremal.slope(x)?;
        let ypp = self.extremal.curvature(x)?;
        Ok((Point::new(x, y, yp), ypp))
    }

    /// `y″` implied by the Euler–Lagrange equation `d/dx H_{y′} = H_y`.
    pub fn euler_lagrange_curvature(&self, x: f64) -> Result<f64> {
        let (at, _) = self.point(x)?;
        let h = |p: Point| self.problem.effective_integrand(p);
        let hy = partial_of(h, &[Variable::Y], at)?;
        let hpx = partial_of(h, &[Variable::Yp, Variable::X], at)?;
        let hpy = partial_of(h, &[Variable::Yp, Variable::Y], at)?;
        let hpp = partial_of(h, &[Variable::Yp, Variable::Yp], at)?;
        Ok((hy - hpx - hpy * at.yp) / hpp)
    }
}

impl CoefficientField for ExtremalProblem {
    fn interval(&self) -> Interval {
        self.problem.interval
    }

    fn regime(&self) -> RegimeKind {
        self.problem.regime.kind
    }

    fn is_isoperimetric(&self) -> bool {
        self.problem.isoperimetric.is_some()
    }

    fn coefficients_at(&self, x: f64) -> Result<Coefficients> {
        let (at, ypp) = self.point(x)?;
        let along = Point::new(1.0, at.yp, ypp);
        let h = |p: Point| self.problem.effective_integrand(p);

        let p = partial_of(h, &[Variable::Yp, Variable::Yp], at)?;
        let r = partial_of(h, &[Variable::Y, Variable::Yp], at)?;
        let hyy = partial_of(h, &[Variable::Y, Variable::Y], at)?;
        // dR/dx = R_x + R_y y′ + R_{y′} y″
        let dr = directional_third_mixed(&h, at, along, third_step(x), Variable::Y, Variable::Yp)?;

        let (t, gyp) = match &self.problem.isoperimetric {
            None => (0.0, 0.0),
            Some(iso) => {
                let g = |p: Point| iso.constraint.evaluate(p);
                let gy = partial_of(g, &[Variable::Y], at)?;
                let gyp = partial_of(g, &[Variable::Yp], at)?;
                let dgyp = directional_mixed(
                    &g,
                    at,
                    along,
                    second_step(x),
                    Point::unit(Variable::Yp),
                    second_step(at.yp),
                )?;
                (gy - dgyp, gyp)
            }
        };

        Coefficients {
            p,
            q: hyy - dr,
            r,
            t,
            gyp,
        }
        .check(x)
    }

    fn diagnostics(&self, grid: &[f64]) -> Vec<String> {
        let mut notes = Vec::new();
        let iv = self.problem.interval;
        let regime = self.problem.regime;
        let mut residual = |what: &str, got: Result<f64>, want: f64| match got {
            Ok(v) if (v - want).abs() > BOUNDARY_WARN * want.abs().max(1.0) => notes.push(format!(
                "boundary residual: {what} = {v:.6e}, expected {want:.6e}"
            )),
            Ok(_) => {}
            Err(e) => notes.push(format!("boundary check failed for {what}: {e}")),
        };
        match regime.kind {
            RegimeKind::Dirichlet => {
                residual("y(a)", self.extremal.value(iv.a()), regime.left);
                residual("y(b)", self.extremal.value(iv.b()), regime.right);
            }
            RegimeKind::MixedLeftFree => {
                residual("y'(a)", self.extremal.slope(iv.a()), 0.0);
                residual("y(b)", self.extremal.value(iv.b()), regime.right);
            }
            RegimeKind::MixedRightFree => {
                residual("y(a)", self.extremal.value(iv.a()), regime.left);
                residual("y'(b)", self.extremal.slope(iv.b()), 0.0);
            }
        }

        let mut worst: Option<(f64, f64)> = None;
        for &x in grid {
            let (Ok(el), Ok(direct)) =
                (self.euler_lagrange_curvature(x), self.extremal.curvature(x))
            else {
                continue;
            };
            let rel = (el - direct).abs() / direct.abs().max(1.0);
            if rel.is_finite() && worst.is_none_or(|(w, _)| rel > w) {
                worst = Some((rel, x));
            }
        }
        if let Some((rel, x)) = worst {
            if rel > EULER_LAGRANGE_WARN {
                notes.push(format!(
                    "y'' from the extremal differs from the Euler-Lagrange value by {rel:.3e} (relative) at x = {x:.6}; y may not be an extremal"
                ));
            }
        }
        notes
    }
}

type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Coefficients given directly as functions of `x`.
pub struct DirectField {
    interval: Interval,
    regime: RegimeKind,
    p: ScalarFn,
    q: ScalarFn,
    r: ScalarFn,
    constraint: Option<(ScalarFn, ScalarFn)>,
    mixed_u0: f64,
}

impl DirectField {
    pub fn new(
        interval: Interval,
        regime: RegimeKind,
        p: impl Fn(f64) -> f64 + Send + Sync + 'static,
        q: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            interval,
            regime,
            p: Box::new(p),
            q: Box::new(q),
            r: Box::new(|_| 0.0),
            constraint: None,
            mixed_u0: 1.0,
        }
    }

    pub fn with_r(mut self, r: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.r = Box::new(r);
        self
    }

    /// Makes the problem isoperimetric with the given `T` and `∂G/∂y′`.
    pub fn with_constraint(
        mut self,
        t: impl Fn(f64) -> f64 + Send + Sync + 'static,
        gyp: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.constraint = Some((Box::new(t), Box::new(gyp)));
        self
    }

    pub fn with_mixed_u0(mut self, u0: f64) -> Self {
        self.mixed_u0 = u0;
        self
    }
}

impl std::fmt::Debug for DirectField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectField")
            .field("interval", &self.interval)
            .field("regime", &self.regime)
            .field("isoperimetric", &self.constraint.is_some())
            .finish()
    }
}

impl CoefficientField for DirectField {
    fn interval(&self) -> Interval {
        self.interval
    }

    fn regime(&self) -> RegimeKind {
        self.regime
    }

    fn is_isoperimetric(&self) -> bool {
        self.constraint.is_some()
    }

    fn coefficients_at(&self, x: f64) -> Result<Coefficients> {
        let (t, gyp) = match &self.constraint {
            Some((t, gyp)) => (t(x), gyp(x)),
            None => (0.0, 0.0),
        };
        Coefficients {
            p: (self.p)(x),
            q: (self.q)(x),
            r: (self.r)(x),
            t,
            gyp,
        }
        .check(x)
    }

    fn mixed_u0(&self) -> f64 {
        self.mixed_u0
    }
}

/// A field seen in the orientation the theorems are stated for: fixed right
/// end, and (for mixed problems) free left end. Right-free problems are
/// reflected through `x ↦ a + b − x`; under that map `P, Q, T` are simply
/// transported while `R` and `∂G/∂y′` change sign.
#[derive(Clone, Copy)]
pub enum Oriented<'a> {
    Forward(&'a dyn CoefficientField),
    Reflected(&'a dyn CoefficientField),
}

impl<'a> Oriented<'a> {
    pub fn new(field: &'a dyn CoefficientField) -> Self {
        match field.regime() {
            RegimeKind::MixedRightFree => Oriented::Reflected(field),
            _ => Oriented::Forward(field),
        }
    }

    pub fn is_reflected(&self) -> bool {
        matches!(self, Oriented::Reflected(_))
    }

    pub fn inner(&self) -> &'a dyn CoefficientField {
        match *self {
            Oriented::Forward(f) | Oriented::Reflected(f) => f,
        }
    }

    /// Maps an abscissa of the analysed orientation back to the original
    /// problem (the map is an involution).
    pub fn to_original(&self, s: f64) -> f64 {
        match self {
            Oriented::Forward(_) => s,
            Oriented::Reflected(f) => {
                let iv = f.interval();
                iv.a() + iv.b() - s
            }
        }
    }
}

impl CoefficientField for Oriented<'_> {
    fn interval(&self) -> Interval {
        self.inner().interval()
    }

    fn regime(&self) -> RegimeKind {
        match self {
            Oriented::Forward(f) => f.regime(),
            Oriented::Reflected(_) => RegimeKind::MixedLeftFree,
        }
    }

    fn is_isoperimetric(&self) -> bool {
        self.inner().is_isoperimetric()
    }

    fn coefficients_at(&self, x: f64) -> Result<Coefficients> {
        match self {
            Oriented::Forward(f) => f.coefficients_at(x),
            Oriented::Reflected(f) => {
                let c = f.coefficients_at(self.to_original(x))?;
                Ok(Coefficients {
                    r: -c.r,
                    gyp: -c.gyp,
                    ..c
                })
            }
        }
    }

    fn mixed_u0(&self) -> f64 {
        self.inner().mixed_u0()
    }

    fn diagnostics(&self, grid: &[f64]) -> Vec<String> {
        let original: Vec<f64> = grid.iter().map(|&s| self.to_original(s)).collect();
        self.inner().diagnostics(&original)
    }
}

/// Thresholds for the precondition flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Strict positivity margin for `min P`.
    pub p: f64,
    /// Absolute bound for `R(a) = 0` and `∂G/∂y′(a) = 0`.
    pub r: f64,
    /// Margin for `min |T|`.
    pub t: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            p: 1e-10,
            r: 1e-8,
            t: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn scaled(self, s: f64) -> Self {
        Self {
            p: self.p * s,
            r: self.r * s,
            t: self.t * s,
        }
    }
}

/// Outcome of the precondition checks. A failing flag is a result, not an
/// error.
#[derive(Debug, Clone, PartialEq)]
pub struct PreconditionReport {
    pub grid: Vec<f64>,
    pub min_p: f64,
    pub legendre_ok: bool,
    pub r_at_a: f64,
    /// Only mixed problems require `R(a) = 0`.
    pub r_enforced: bool,
    pub r_ok: bool,
    pub gyp_at_a: Option<f64>,
    pub gyp_ok: bool,
    pub min_abs_t: Option<f64>,
    /// Pointwise `T ≠ 0` on the grid.
    pub t_nonzero_ok: bool,
    /// The weaker `T ≢ 0`.
    pub t_not_identically_zero: bool,
    pub tolerances: Tolerances,
    pub notes: Vec<String>,
}

impl PreconditionReport {
    pub fn all_ok(&self) -> bool {
        self.legendre_ok && self.r_ok && self.gyp_ok && self.t_nonzero_ok
    }
}

/// Evaluates the coefficients on `n_grid + 1` uniform points and sets the
/// precondition flags. `field` should already be oriented (see [`Oriented`]).
pub fn check_preconditions(
    field: &dyn CoefficientField,
    n_grid: usize,
    tol: Tolerances,
) -> Result<PreconditionReport> {
    if n_grid < 16 {
        return Err(Error::InvalidArgument(format!(
            "precondition grid needs at least 16 intervals, got {n_grid}"
        )));
    }
    let grid = field.interval().grid(n_grid);
    let coeffs = grid
        .iter()
        .map(|&x| field.coefficients_at(x))
        .collect::<Result<Vec<_>>>()?;

    let regime = field.regime();
    let iso = field.is_isoperimetric();
    let mixed = regime.is_mixed();

    let min_p = coeffs.iter().map(|c| c.p).fold(f64::INFINITY, f64::min);
    let legendre_ok = min_p > tol.p;
    let r_at_a = coeffs[0].r;
    let r_ok = !mixed || r_at_a.abs() <= tol.r;

    let gyp_at_a = iso.then_some(coeffs[0].gyp);
    let gyp_ok = !(iso && mixed) || coeffs[0].gyp.abs() <= tol.r;

    let min_abs_t = iso.then(|| {
        coeffs
            .iter()
            .map(|c| c.t.abs())
            .fold(f64::INFINITY, f64::min)
    });
    let max_abs_t = coeffs.iter().map(|c| c.t.abs()).fold(0.0, f64::max);
    let t_nonzero_ok = min_abs_t.is_none_or(|m| m > tol.t);
    let t_not_identically_zero = !iso || max_abs_t > tol.t;

    let mut notes = field.diagnostics(&grid);
    if !legendre_ok {
        notes.push(format!(
            "strengthened Legendre condition fails: min P = {min_p:.6e}"
        ));
    }
    if !r_ok {
        notes.push(format!(
            "R(a) = {r_at_a:.6e} is not zero at the free end; boundary term R h^2 does not vanish"
        ));
    }
    if !gyp_ok {
        notes.push(format!(
            "dG/dy'(a) = {:.6e} is not zero at the free end",
            coeffs[0].gyp
        ));
    }
    if iso && !t_nonzero_ok {
        let which = if t_not_identically_zero {
            "T vanishes somewhere on [a, b] (pointwise T != 0 fails; the weaker T not identically 0 holds)"
        } else {
            "T vanishes identically on [a, b] (both T != 0 and T not identically 0 fail)"
        };
        notes.push(which.to_string());
    }

    Ok(PreconditionReport {
        grid,
        min_p,
        legendre_ok,
        r_at_a,
        r_enforced: mixed,
        r_ok,
        gyp_at_a,
        gyp_ok,
        min_abs_t,
        t_nonzero_ok,
        t_not_identically_zero,
        tolerances: tol,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expression::{parse, Params};

    fn expr(src: &str, params: &Params) -> Expr {
        parse(src, params).unwrap()
    }

    fn catenary(omega: f64) -> ExtremalProblem {
        let mut params = Params::new();
        params.insert("omega".into(), omega);
        let problem = VariationalProblem::new(
            expr("y*sqrt(1+yp^2)", &params),
            Interval::new(0.0, 1.0).unwrap(),
            BoundaryRegime::mixed_left_free(omega * (1.0 / omega).cosh()),
        );
        let extremal = Extremal::new(expr("omega*cosh(x/omega)", &params)).unwrap();
        ExtremalProblem::new(problem, extremal)
    }

    #[test]
    fn catenary_coefficients_at_apex() {
        let c = catenary(1.0).coefficients_at(0.0).unwrap();
        assert!((c.p - 1.0).abs() < 1e-8, "{c:?}");
        assert!((c.q + 1.0).abs() < 1e-6, "{c:?}");
        assert!(c.r.abs() < 1e-9, "{c:?}");
        for omega in [0.3, 0.7, 2.5] {
            let c = catenary(omega).coefficients_at(0.0).unwrap();
            assert!(c.r.abs() < 1e-9);
            assert!((c.p - omega).abs() < 1e-7 * omega.max(1.0));
        }
    }

    #[test]
    fn catenary_coefficients_match_closed_form_along_curve() {
        let omega = 0.8;
        let field = catenary(omega);
        for x in [0.1, 0.4, 0.9] {
            let z: f64 = x / omega;
            let c = field.coefficients_at(x).unwrap();
            let ch2 = z.cosh().powi(2);
            assert!((c.p - omega / ch2).abs() < 1e-7, "P at {x}");
            assert!(
                (c.q + 1.0 / (omega * ch2)).abs() < 1e-6,
                "Q at {x}: {}",
                c.q
            );
            assert!((c.r - z.tanh()).abs() < 1e-8, "R at {x}");
        }
    }

    #[test]
    fn isoperimetric_catenary_t_and_gyp() {
        let omega: f64 = 1.0;
        let mut params = Params::new();
        params.insert("omega".into(), omega);
        let lambda = omega * (1.0 / omega).cosh();
        let problem = VariationalProblem::new(
            expr("y*sqrt(1+yp^2)", &params),
            Interval::new(0.0, 1.0).unwrap(),
            BoundaryRegime::mixed_left_free(0.0),
        )
        .with_constraint(
            expr("sqrt(1+yp^2)", &params),
            (1.0 / omega).sinh() * omega,
            lambda,
        );
        let extremal =
            Extremal::new(expr("omega*cosh(x/omega) - omega*cosh(1/omega)", &params)).unwrap();
        let field = ExtremalProblem::new(problem, extremal);
        let c = field.coefficients_at(0.0).unwrap();
        assert!((c.t + 1.0).abs() < 1e-6, "{c:?}");
        assert!(c.gyp.abs() < 1e-9, "{c:?}");
        assert!((c.p - 1.0).abs() < 1e-7, "{c:?}");
        let c = field.coefficients_at(0.6).unwrap();
        assert!((c.t + 1.0 / 0.6f64.cosh().powi(2)).abs() < 1e-6);
    }

    #[test]
    fn chain_rule_q_matches_difference_of_r_along_curve() {
        let field = catenary(0.9);
        let h = 1e-4;
        for x in [0.2, 0.5, 0.8] {
            let c = field.coefficients_at(x).unwrap();
            let hyy = 0.0; // F = y sqrt(1+yp^2) is linear in y
            let rp = field.coefficients_at(x + h).unwrap().r;
            let rm = field.coefficients_at(x - h).unwrap().r;
            let dr = (rp - rm) / (2.0 * h);
            let q_direct = hyy - dr;
            assert!(
                (c.q - q_direct).abs() <= 1e-5 * c.q.abs(),
                "{} vs {}",
                c.q,
                q_direct
            );
        }
    }

    #[test]
    fn separable_integrand_has_vanishing_r() {
        let params = Params::new();
        let problem = VariationalProblem::new(
            expr("yp^2 + y^2", &params),
            Interval::new(0.0, 1.0).unwrap(),
            BoundaryRegime::mixed_left_free(1.0),
        );
        let field = ExtremalProblem::new(
            problem,
            Extremal::new(expr("cosh(x)/cosh(1)", &params)).unwrap(),
        );
        for x in [0.0, 0.3, 1.0] {
            let c = field.coefficients_at(x).unwrap();
            assert!(c.r.abs() < 1e-9);
            assert!((c.p - 2.0).abs() < 1e-8);
            assert!((c.q - 2.0).abs() < 1e-6);
        }
        let report = check_preconditions(&field, 32, Tolerances::default()).unwrap();
        assert!(report.all_ok(), "{report:?}");
        assert!(report.notes.is_empty(), "{:?}", report.notes);
    }

    #[test]
    fn coefficients_are_deterministic_and_regime_independent() {
        let mut a = catenary(1.3);
        let c1 = a.coefficients_at(0.37).unwrap();
        let c2 = a.coefficients_at(0.37).unwrap();
        assert_eq!(c1, c2);
        a.problem.regime = BoundaryRegime::dirichlet(1.3, 2.0);
        assert_eq!(a.coefficients_at(0.37).unwrap(), c1);
    }

    #[test]
    fn preconditions_pass_for_stable_catenary() {
        let report = check_preconditions(&catenary(1.6966759), 64, Tolerances::default()).unwrap();
        assert!(report.all_ok(), "{report:?}");
        assert_eq!(report.grid.len(), 65);
        let omega: f64 = 1.6966759;
        let want = omega / (1.0 / omega).cosh().powi(2);
        assert!((report.min_p - want).abs() < 1e-7);
        assert!(report.r_at_a.abs() < 1e-9);
    }

    #[test]
    fn negative_omega_fails_legendre() {
        let mut params = Params::new();
        params.insert("omega".into(), -1.0);
        let problem = VariationalProblem::new(
            expr("y*sqrt(1+yp^2)", &params),
            Interval::new(0.0, 1.0).unwrap(),
            BoundaryRegime::mixed_left_free(-(1.0f64.cosh())),
        );
        let field = ExtremalProblem::new(
            problem,
            Extremal::new(expr("omega*cosh(x/omega)", &params)).unwrap(),
        );
        let report = check_preconditions(&field, 32, Tolerances::default()).unwrap();
        assert!(!report.legendre_ok);
        assert!(!report.all_ok());
    }

    #[test]
    fn free_end_r_violation_is_flagged_only_for_mixed() {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let mixed =
            DirectField::new(iv, RegimeKind::MixedLeftFree, |_| 1.0, |_| 0.0).with_r(|x| 0.5 + x);
        let report = check_preconditions(&mixed, 16, Tolerances::default()).unwrap();
        assert!(!report.r_ok);
        let dirichlet =
            DirectField::new(iv, RegimeKind::Dirichlet, |_| 1.0, |_| 0.0).with_r(|x| 0.5 + x);
        let report = check_preconditions(&dirichlet, 16, Tolerances::default()).unwrap();
        assert!(report.r_ok && !report.r_enforced);
    }

    #[test]
    fn vanishing_t_reports_which_form_failed() {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let field = DirectField::new(iv, RegimeKind::Dirichlet, |_| 1.0, |_| 0.0)
            .with_constraint(|x| x - 0.5, |_| 0.0);
        let report = check_preconditions(&field, 16, Tolerances::default()).unwrap();
        assert!(!report.t_nonzero_ok);
        assert!(report.t_not_identically_zero);
        assert!(report.notes.iter().any(|n| n.contains("pointwise")));
    }

    #[test]
    fn small_grid_rejected() {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let field = DirectField::new(iv, RegimeKind::Dirichlet, |_| 1.0, |_| 0.0);
        assert!(check_preconditions(&field, 8, Tolerances::default()).is_err());
    }

    #[test]
    fn reflection_transports_coefficients() {
        let iv = Interval::new(1.0, 3.0).unwrap();
        let field = DirectField::new(iv, RegimeKind::MixedRightFree, |x| 1.0 + x, |x| x * x)
            .with_r(|x| x - 3.0)
            .with_constraint(|x| 2.0 * x, |x| 3.0 - x);
        let o = Oriented::new(&field);
        assert!(o.is_reflected());
        assert_eq!(o.regime(), RegimeKind::MixedLeftFree);
        let c = o.coefficients_at(1.5).unwrap();
        // 1.5 ↦ 2.5
        assert_eq!(c.p, 3.5);
        assert_eq!(c.q, 6.25);
        assert_eq!(c.r, 0.5);
        assert_eq!(c.t, 5.0);
        assert_eq!(c.gyp, -0.5);
        assert!((o.to_original(o.to_original(1.7)) - 1.7).abs() < 1e-15);
    }

    #[test]
    fn boundary_and_euler_lagrange_diagnostics() {
        let mut field = catenary(1.0);
        // wrong B and a curve that is not an extremal
        field.problem.regime = BoundaryRegime::mixed_left_free(5.0);
        field.extremal = Extremal::new(expr("1 + x^2", &Params::new())).unwrap();
        let notes = field.diagnostics(&field.problem.interval.grid(16));
        assert!(notes.iter().any(|n| n.contains("y(b)")), "{notes:?}");
        assert!(
            notes.iter().any(|n| n.contains("Euler-Lagrange")),
            "{notes:?}"
        );

        let good = catenary(1.0);
        assert!(good.diagnostics(&good.problem.interval.grid(16)).is_empty());
    }

    #[test]
    fn extremal_must_not_depend_on_y() {
        assert!(Extremal::new(expr("x*y", &Params::new())).is_err());
        assert!(Interval::new(1.0, 1.0).is_err());
    }
}
