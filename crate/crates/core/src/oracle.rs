//! Finite-element check of the sign of the second variation.
//!
//! The quadratic form `∫(P h′² + Q h²)` is discretized with piecewise-linear
//! hat functions on a uniform grid. Its minimal Rayleigh quotient against the
//! `L²` norm, optionally restricted to `∫ h T = 0`, is an independent
//! definiteness signal to compare with the conjugate-point verdict.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::conjugate::Classification;
use crate::problem::{CoefficientField, Oriented, RegimeKind};
use crate::{Error, Result};

/// Largest reduced dimension handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 512;

const GAUSS: f64 = 0.577_350_269_189_625_8;

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl Tridiagonal {
    fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    fn add_element(&mut self, i: usize, local: [[f64; 2]; 2]) {
        self.diag[i] += local[0][0];
        self.diag[i + 1] += local[1][1];
        self.off[i] += local[0][1];
    }

    fn restrict(&self, keep: std::ops::Range<usize>) -> Self {
        let off_end = keep.end.saturating_sub(1).max(keep.start);
        Self {
            diag: self.diag[keep.clone()].to_vec(),
            off: self.off[keep.start..off_end].to_vec(),
        }
    }

    /// `sa·A + sb·B`.
    pub fn combine(&self, sa: f64, other: &Self, sb: f64) -> Self {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| sa * a + sb * b).collect();
        Self {
            diag: mix(&self.diag, &other.diag),
            off: mix(&self.off, &other.off),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &o) in self.off.iter().enumerate() {
            m[(i, i + 1)] = o;
            m[(i + 1, i)] = o;
        }
        m
    }

    pub fn quadratic(&self, h: &[f64]) -> f64 {
        let mut s: f64 = self.diag.iter().zip(h).map(|(d, x)| d * x * x).sum();
        for (i, o) in self.off.iter().enumerate() {
            s += 2.0 * o * h[i] * h[i + 1];
        }
        s
    }
}

/// The assembled form, reduced to the nodes not fixed by the boundary
/// conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteForm {
    /// All nodes, in the analysed orientation.
    pub grid: Vec<f64>,
    /// Indices into `grid` of the retained nodes.
    pub free: std::ops::Range<usize>,
    /// `∫ P φ_i′ φ_j′`.
    pub k: Tridiagonal,
    /// `∫ Q φ_i φ_j`, plus `−R(a)` on the free left node.
    pub mq: Tridiagonal,
    /// `∫ φ_i φ_j`.
    pub m: Tridiagonal,
    /// `∫ φ_j T`, for isoperimetric problems.
    pub t: Option<Vec<f64>>,
    pub regime: RegimeKind,
}

impl DiscreteForm {
    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    /// `K + Mq`.
    pub fn operator(&self) -> Tridiagonal {
        self.k.combine(1.0, &self.mq, 1.0)
    }
}

/// Assembles the form on `n_elements` uniform elements. Right-free problems
/// are assembled on their reflection.
pub fn assemble(field: &dyn CoefficientField, n_elements: usize) -> Result<DiscreteForm> {
    if n_elements < 8 {
        return Err(Error::InvalidArgument(format!(
            "the oracle needs at least 8 elements, got {n_elements}"
        )));
    }
    let field = Oriented::new(field);
    let grid = field.interval().grid(n_elements);
    let nodes = grid.len();
    let iso = field.is_isoperimetric();
    let mut k = Tridiagonal::zeros(nodes);
    let mut mq = Tridiagonal::zeros(nodes);
    let mut m = Tridiagonal::zeros(nodes);
    let mut t = vec![0.0; nodes];

    for e in 0..n_elements {
        let (x0, x1) = (grid[e], grid[e + 1]);
        let h = x1 - x0;
        let mid = 0.5 * (x0 + x1);
        let mut kp = 0.0;
        let mut q = [[0.0; 2]; 2];
        let mut te = [0.0; 2];
        for xi in [-GAUSS, GAUSS] {
            let x = mid + 0.5 * h * xi;
            let w = 0.5 * h;
            let c = field.coefficients_at(x)?;
            let phi = [(x1 - x) / h, (x - x0) / h];
            kp += w * c.p / (h * h);
            for i in 0..2 {
                te[i] += w * c.t * phi[i];
                for j in 0..2 {
                    q[i][j] += w * c.q * phi[i] * phi[j];
                }
            }
        }
        k.add_element(e, [[kp, -kp], [-kp, kp]]);
        mq.add_element(e, q);
        m.add_element(e, [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]]);
        t[e] += te[0];
        t[e + 1] += te[1];
    }

    let regime = field.regime();
    let free = match regime {
        RegimeKind::Dirichlet => 1..nodes - 1,
        _ => {
            // boundary term R h² at the free end
            let r = field.coefficients_at(grid[0])?.r;
            mq.diag[0] -= r;
            0..nodes - 1
        }
    };
    Ok(DiscreteForm {
        k: k.restrict(free.clone()),
        mq: mq.restrict(free.clone()),
        m: m.restrict(free.clone()),
        t: iso.then(|| t[free.clone()].to_vec()),
        free,
        grid,
        regime,
    })
}

/// Minimal generalized Rayleigh quotient `hᵀ(K + Mq)h / hᵀMh`, over
/// `tᵀh = 0` when `constrained`.
pub fn min_quotient(form: &DiscreteForm, constrained: bool) -> Result<f64> {
    let a = form.operator();
    let t = if constrained {
        let t = form.t.as_deref().ok_or_else(|| {
            Error::InvalidArgument(
                "constrained quotient requested for a problem without a constraint".into(),
            )
        })?;
        if t.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidArgument("constraint vector vanishes".into()));
        }
        Some(t)
    } else {
        None
    };
    if form.dim() <= DENSE_LIMIT {
        dense_min(&a, &form.m, t)
    } else {
        bisection_min(&a, &form.m, t)
    }
}

fn dense_min(a: &Tridiagonal, m: &Tridiagonal, t: Option<&[f64]>) -> Result<f64> {
    let (mut a, mut m) = (a.to_dense(), m.to_dense());
    if let Some(t) = t {
        let z = null_space_basis(t);
        a = z.transpose() * &a * &z;
        m = z.transpose() * &m * &z;
    }
    let n = a.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty admissible space".into()));
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("norm matrix is not positive definite".into()))?;
    let l = chol.l();
    let y = l.solve_lower_triangular(&a).ok_or(Error::NonConvergence {
        residual: f64::INFINITY,
    })?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::NonConvergence {
            residual: f64::INFINITY,
        })?;
    let c = 0.5 * (&c + c.transpose());
    let eig =
        SymmetricEigen::try_new(c.clone(), f64::EPSILON, 10_000).ok_or(Error::NonConvergence {
            residual: f64::INFINITY,
        })?;
    let (i, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty");
    let v = eig.eigenvectors.column(i);
    let residual = (&c * v - v * lambda).norm();
    if residual.is_nan() || residual > 1e-6 * c.norm().max(1.0) {
        return Err(Error::NonConvergence { residual });
    }
    Ok(lambda)
}

/// Orthonormal basis of `{h : tᵀh = 0}` from a Householder reflector.
fn null_space_basis(t: &[f64]) -> DMatrix<f64> {
    let n = t.len();
    let mut v = DVector::from_column_slice(t);
    let norm = v.norm();
    v[0] += norm.copysign(t[0]);
    let vv = v.dot(&v);
    let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
    h.columns(1, n - 1).into_owned()
}

/// Number of eigenvalues of `(A, M)` below `sigma`, restricted to
/// `tᵀh = 0` if `t` is given.
fn count_below(a: &Tridiagonal, m: &Tridiagonal, t: Option<&[f64]>, sigma: f64) -> usize {
    let n = a.dim();
    let diag: Vec<f64> = (0..n).map(|i| a.diag[i] - sigma * m.diag[i]).collect();
    let off: Vec<f64> = (0..n - 1).map(|i| a.off[i] - sigma * m.off[i]).collect();
    let tiny = f64::EPSILON
        * diag
            .iter()
            .map(|d| d.abs())
            .fold(f64::MIN_POSITIVE, f64::max);
    // LDLᵀ pivots
    let mut d = vec![0.0; n];
    for i in 0..n {
        let mut p = diag[i];
        if i > 0 {
            p -= off[i - 1] * off[i - 1] / d[i - 1];
        }
        if p.abs() < tiny {
            p = -tiny;
        }
        d[i] = p;
    }
    let negative = d.iter().filter(|&&p| p < 0.0).count();
    let Some(t) = t else {
        return negative;
    };
    // g = tᵀ S⁻¹ t through the same factorization
    let mut y = t.to_vec();
    for i in 1..n {
        y[i] -= off[i - 1] / d[i - 1] * y[i - 1];
    }
    let g: f64 = y.iter().zip(&d).map(|(yi, di)| yi * yi / di).sum();
    (negative + usize::from(g > 0.0)).saturating_sub(1)
}

fn bisection_min(a: &Tridiagonal, m: &Tridiagonal, t: Option<&[f64]>) -> Result<f64> {
    let count = |s: f64| count_below(a, m, t, s);
    let mut lo = -1.0;
    while count(lo) > 0 {
        lo *= 2.0;
        if !lo.is_finite() {
            return Err(Error::NonConvergence {
                residual: f64::INFINITY,
            });
        }
    }
    let mut hi = 1.0;
    while count(hi) == 0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NonConvergence {
                residual: f64::INFINITY,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-13 * hi.abs().max(lo.abs()) {
            break;
        }
        if count(mid) > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Half-width of the band around zero in which the discrete quotient is
/// treated as inconclusive.
pub fn agreement_tolerance(n_elements: usize) -> f64 {
    10.0 / (n_elements as f64).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    Disagree,
    /// The quotient is too close to zero, or there is no verdict to compare.
    Unresolved,
}

impl Agreement {
    pub fn name(self) -> &'static str {
        match self {
            Agreement::Agree => "agree",
            Agreement::Disagree => "disagree",
            Agreement::Unresolved => "unresolved",
        }
    }
}

/// Compares a verdict with the sign of the discrete quotient.
pub fn agreement(classification: Classification, quotient: f64, n_elements: usize) -> Agreement {
    let tol = agreement_tolerance(n_elements);
    let sign = if quotient > tol {
        1
    } else if quotient < -tol {
        -1
    } else {
        0
    };
    match (classification, sign) {
        (Classification::DegenerateAtB, 0) => Agreement::Agree,
        (Classification::DegenerateAtB, _) => Agreement::Disagree,
        (Classification::PreconditionFailed, _) | (_, 0) => Agreement::Unresolved,
        (Classification::PositiveDefinite, 1) | (Classification::Indefinite, -1) => {
            Agreement::Agree
        }
        _ => Agreement::Disagree,
    }
}

/// `δ²J` of an explicit variation and related quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondVariation {
    /// `R h²|_a^b + ∫(P h′² + Q h²)`.
    pub value: f64,
    /// `∫ h²`.
    pub norm: f64,
    /// `∫ h T`, for isoperimetric problems.
    pub constraint: Option<f64>,
    pub warnings: Vec<String>,
}

/// Evaluates `δ²J[h]` for `h` sampled at increasing abscissae `x` covering
/// `[a, b]`, with `h` linear between samples and trapezoidal coefficients.
pub fn second_variation_of(
    field: &dyn CoefficientField,
    x: &[f64],
    h: &[f64],
) -> Result<SecondVariation> {
    if x.len() != h.len() || x.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two samples of h with matching abscissae".into(),
        ));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "abscissae must be strictly increasing".into(),
        ));
    }
    let coeffs = x
        .iter()
        .map(|&s| field.coefficients_at(s))
        .collect::<Result<Vec<_>>>()?;
    let mut value = 0.0;
    let mut norm = 0.0;
    let mut constraint = 0.0;
    for i in 0..x.len() - 1 {
        let dx = x[i + 1] - x[i];
        let dh = (h[i + 1] - h[i]) / dx;
        let (c0, c1) = (&coeffs[i], &coeffs[i + 1]);
        value +=
            0.5 * dx * ((c0.p + c1.p) * dh * dh + c0.q * h[i] * h[i] + c1.q * h[i + 1] * h[i + 1]);
        norm += 0.5 * dx * (h[i] * h[i] + h[i + 1] * h[i + 1]);
        constraint += 0.5 * dx * (c0.t * h[i] + c1.t * h[i + 1]);
    }
    let last = x.len() - 1;
    value += coeffs[last].r * h[last] * h[last] - coeffs[0].r * h[0] * h[0];

    let mut warnings = Vec::new();
    let iv = field.interval();
    if (x[0] - iv.a()).abs() > 1e-12 * iv.len() || (x[last] - iv.b()).abs() > 1e-12 * iv.len() {
        warnings.push("samples do not span [a, b]".to_string());
    }
    let scale = h.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let bc_tol = 1e-8 * scale.max(f64::MIN_POSITIVE);
    let (fix_a, fix_b) = match field.regime() {
        RegimeKind::Dirichlet => (true, true),
        RegimeKind::MixedLeftFree => (false, true),
        RegimeKind::MixedRightFree => (true, false),
    };
    if fix_a && h[0].abs() > bc_tol {
        warnings.push(format!(
            "h(a) = {:.3e} violates the boundary condition",
            h[0]
        ));
    }
    if fix_b && h[last].abs() > bc_tol {
        warnings.push(format!(
            "h(b) = {:.3e} violates the boundary condition",
            h[last]
        ));
    }
    if !fix_a && coeffs[0].r.abs() > 1e-8 && h[0] != 0.0 {
        warnings.push(format!(
            "R(a) = {:.3e}: the boundary term does not vanish",
            coeffs[0].r
        ));
    }
    if !fix_b && coeffs[last].r.abs() > 1e-8 && h[last] != 0.0 {
        warnings.push(format!(
            "R(b) = {:.3e}: the boundary term does not vanish",
            coeffs[last].r
        ));
    }
    Ok(SecondVariation {
        value,
        norm,
        constraint: field.is_isoperimetric().then_some(constraint),
        warnings,
    })
}
