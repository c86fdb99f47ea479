//! Time stepping for the fractional relaxation equation
//! `D^α y(x) + D y(x) = F(x)`, `y(0) = y_0`, on `[0, X]`.
//!
//! With a stencil written as `(λ_0 y_m - Σ_{k≥1} λ_k y_{m-k}) / h^α` the
//! solution is advanced by
//! `u_m = (h^α F_m + Σ_{k=1}^m λ_k u_{m-k}) / (λ_0 + D h^α)`.
//! Tail weights depend on `m`, so the stencil is rebuilt at every step from
//! one incrementally extended [`WeightBuilder`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::caputo::{exact_caputo_cos2pix, exact_caputo_exp, exact_caputo_power, RealFn};
use crate::error::{Error, Result};
use crate::schemes::{check_alpha, normalized_lambda_into, AlphaConstants, SchemeId, WeightBuilder};
use crate::specfun::gamma_unchecked;
use crate::sum::Neumaier;

/// Right-hand side `F`; fallible because closed forms may reject arguments.
pub type ForcingFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// A run is flagged diverged once `max |u_m|` exceeds this multiple of the
/// solution scale `max(1, |y_0|, max |y(x_m)|)`, or any `u_m` is not finite.
pub const DIVERGENCE_FACTOR: f64 = 1e4;

/// Tolerance on `exact(0) = y_0`.
const INITIAL_VALUE_TOL: f64 = 1e-12;

/// Relative tolerance on `n h = X`.
const GRID_TOL: f64 = 1e-12;

#[derive(Clone)]
pub struct RelaxationProblem {
    name: String,
    alpha: f64,
    d: f64,
    forcing: ForcingFn,
    y0: f64,
    exact: Option<RealFn>,
    dy0: Option<f64>,
    d2y0: Option<f64>,
    x_end: f64,
}

impl fmt::Debug for RelaxationProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RelaxationProblem")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("d", &self.d)
            .field("y0", &self.y0)
            .field("exact", &self.exact.is_some())
            .field("dy0", &self.dy0)
            .field("d2y0", &self.d2y0)
            .field("x_end", &self.x_end)
            .finish()
    }
}

impl RelaxationProblem {
    pub fn new(name: impl Into<String>, alpha: f64, d: f64, forcing: ForcingFn, y0: f64, x_end: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !d.is_finite() {
            return Err(Error::Domain {
                what: "relaxation coefficient D",
                value: d,
                domain: "finite reals",
            });
        }
        if !y0.is_finite() {
            return Err(Error::Domain {
                what: "initial value",
                value: y0,
                domain: "finite reals",
            });
        }
        if !(x_end > 0.0 && x_end.is_finite()) {
            return Err(Error::Domain {
                what: "interval end X",
                value: x_end,
                domain: "(0, inf)",
            });
        }
        Ok(Self {
            name: name.into(),
            alpha,
            d,
            forcing,
            y0,
            exact: None,
            dy0: None,
            d2y0: None,
            x_end,
        })
    }

    /// Attaches the exact solution; it must satisfy `exact(0) = y_0`.
    pub fn with_exact(mut self, exact: RealFn) -> Result<Self> {
        let e0 = exact(0.0);
        if !((e0 - self.y0).abs() <= INITIAL_VALUE_TOL * self.y0.abs().max(1.0)) {
            return Err(Error::Invalid(format!(
                "exact solution gives y(0) = {e0:?} but the initial value is {:?}",
                self.y0
            )));
        }
        self.exact = Some(exact);
        Ok(self)
    }

    /// Attaches `y'(0)` and `y''(0)` for the Taylor start.
    pub fn with_derivatives(mut self, dy0: f64, d2y0: f64) -> Self {
        self.dy0 = Some(dy0);
        self.d2y0 = Some(d2y0);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    pub fn dy0(&self) -> Option<f64> {
        self.dy0
    }

    pub fn d2y0(&self) -> Option<f64> {
        self.d2y0
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn forcing(&self, x: f64) -> Result<f64> {
        (self.forcing)(x)
    }

    pub fn exact(&self, x: f64) -> Option<f64> {
        self.exact.as_ref().map(|f| f(x))
    }

    /// Number of steps `n` with `n h = X`.
    pub fn steps_for(&self, h: f64) -> Result<usize> {
        steps_for(h, self.x_end)
    }
}

/// `n = X / h` when it is an integer up to a relative `1e-12`.
pub fn steps_for(h: f64, x_end: f64) -> Result<usize> {
    let bad = || Error::InvalidGrid { h, end: x_end };
    if !(h > 0.0 && h.is_finite()) {
        return Err(bad());
    }
    let r = x_end / h;
    let n = r.round();
    if n < 1.0 || (n * h - x_end).abs() > GRID_TOL * x_end {
        return Err(bad());
    }
    Ok(n as usize)
}

/// A problem with a known solution `y`: `F = D^α y + D y`.
fn manufactured(
    name: String,
    alpha: f64,
    d: f64,
    y: RealFn,
    caputo: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    (dy0, d2y0): (f64, f64),
) -> Result<RelaxationProblem> {
    let yf = y.clone();
    let forcing: ForcingFn = Arc::new(move |x| Ok(caputo(x)? + d * yf(x)));
    Ok(RelaxationProblem::new(name, alpha, d, forcing, y(0.0), 1.0)?
        .with_exact(y)?
        .with_derivatives(dy0, d2y0))
}

/// `y = 1 + x + x² + x³ + x⁴`, `D = 1`.
pub fn equation_one(alpha: f64) -> Result<RelaxationProblem> {
    check_alpha(alpha)?;
    let y: RealFn = Arc::new(|x: f64| 1.0 + x * (1.0 + x * (1.0 + x * (1.0 + x))));
    let caputo = move |x: f64| {
        let mut acc = Neumaier::new();
        for p in 1..=4 {
            acc.add(exact_caputo_power(p as f64, alpha, x)?);
        }
        Ok(acc.value())
    };
    manufactured("eq1".into(), alpha, 1.0, y, caputo, (1.0, 2.0))
}

/// `y = e^x`, `D = 1`.
pub fn equation_two(alpha: f64) -> Result<RelaxationProblem> {
    relaxation_example(alpha, 1.0).map(|p| RelaxationProblem {
        name: "eq2".into(),
        ..p
    })
}

/// `y = cos 2πx`, `D = 1`.
pub fn equation_three(alpha: f64) -> Result<RelaxationProblem> {
    check_alpha(alpha)?;
    let w = 2.0 * std::f64::consts::PI;
    let y: RealFn = Arc::new(move |x: f64| (w * x).cos());
    let caputo = move |x: f64| exact_caputo_cos2pix(alpha, x);
    manufactured("eq3".into(), alpha, 1.0, y, caputo, (0.0, -w * w))
}

/// `y = e^x` with an adjustable coefficient `D`.
pub fn relaxation_example(alpha: f64, d: f64) -> Result<RelaxationProblem> {
    check_alpha(alpha)?;
    let y: RealFn = Arc::new(f64::exp);
    let caputo = move |x: f64| exact_caputo_exp(alpha, x);
    manufactured(format!("relax:{d:?}"), alpha, d, y, caputo, (1.0, 1.0))
}

/// Names accepted by [`equation`].
pub const EQUATION_NAMES: [&str; 4] = ["eq1", "eq2", "eq3", "relax:D"];

/// Looks up `eq1`, `eq2`, `eq3` or `relax:D` (for example `relax:-7`).
pub fn equation(name: &str, alpha: f64) -> Result<RelaxationProblem> {
    let key = name.trim().to_ascii_lowercase();
    match key.as_str() {
        "eq1" | "i" => equation_one(alpha),
        "eq2" | "ii" => equation_two(alpha),
        "eq3" | "iii" => equation_three(alpha),
        _ => {
            let d = key
                .strip_prefix("relax:")
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|d| d.is_finite())
                .ok_or_else(|| Error::UnknownName {
                    kind: "equation",
                    name: name.to_string(),
                    options: EQUATION_NAMES.join(", "),
                })?;
            relaxation_example(alpha, d)
        }
    }
}

/// The three `D = 1` test equations followed by the `e^x` example with
/// coefficient `d`.
pub fn equation_catalog(alpha: f64, d: f64) -> Result<Vec<RelaxationProblem>> {
    Ok(vec![
        equation_one(alpha)?,
        equation_two(alpha)?,
        equation_three(alpha)?,
        relaxation_example(alpha, d)?,
    ])
}

/// How `u_1` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StartMode {
    /// One implicit L1 step, `O(h²)`.
    L1Start,
    /// `y_0 + y'(0) h + y''(0) h²/2`, `O(h³)`.
    TaylorStart,
}

impl StartMode {
    /// Taylor start for the order 3-α scheme, L1 start otherwise.
    pub fn default_for(scheme: SchemeId) -> Self {
        match scheme {
            SchemeId::Right3mAlpha => StartMode::TaylorStart,
            _ => StartMode::L1Start,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StartMode::L1Start => "l1",
            StartMode::TaylorStart => "taylor",
        }
    }
}

impl fmt::Display for StartMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StartMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" | "l1start" => Ok(StartMode::L1Start),
            "taylor" | "taylorstart" => Ok(StartMode::TaylorStart),
            _ => Err(Error::UnknownName {
                kind: "start mode",
                name: s.to_string(),
                options: "l1, taylor".into(),
            }),
        }
    }
}

/// Approximation of `y(h)`.
pub fn first_step(problem: &RelaxationProblem, h: f64, mode: StartMode) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain {
            what: "step h",
            value: h,
            domain: "(0, inf)",
        });
    }
    match mode {
        StartMode::L1Start => {
            let g = gamma_unchecked(2.0 - problem.alpha) * h.powf(problem.alpha);
            let den = 1.0 + g * problem.d;
            if den == 0.0 || !den.is_finite() {
                return Err(Error::SingularDenominator(den));
            }
            Ok((problem.y0 + g * problem.forcing(h)?) / den)
        }
        StartMode::TaylorStart => match (problem.dy0, problem.d2y0) {
            (Some(d1), Some(d2)) => Ok(problem.y0 + h * (d1 + 0.5 * h * d2)),
            _ => Err(Error::MissingMetadata),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub scheme: SchemeId,
    pub start: StartMode,
    pub alpha: f64,
    pub d: f64,
    pub h: f64,
    /// `u_0..u_n`.
    pub u: Vec<f64>,
    /// `y(x_m)` when the exact solution is known.
    pub exact: Option<Vec<f64>>,
    /// `max_m |u_m - y(x_m)|`.
    pub max_error: Option<f64>,
    pub max_abs_u: f64,
    pub diverged: bool,
}

impl SolveResult {
    pub fn n(&self) -> usize {
        self.u.len() - 1
    }

    pub fn x(&self, m: usize) -> f64 {
        m as f64 * self.h
    }
}

/// Runs the recurrence for `n ≥ 2` steps of size `X / n`.
pub fn solve(problem: &RelaxationProblem, scheme: SchemeId, n: usize, start: StartMode) -> Result<SolveResult> {
    if n < 2 {
        return Err(Error::Invalid(format!("the solver needs n >= 2 steps, got {n}")));
    }
    let a = problem.alpha;
    let h = problem.x_end / n as f64;
    let ha = h.powf(a);
    let consts = AlphaConstants::new(a)?;
    let mut builder = WeightBuilder::with_constants(scheme, consts);
    let norm = consts.norm(scheme.family());

    let mut u = Vec::with_capacity(n + 1);
    u.push(problem.y0);
    u.push(first_step(problem, h, start)?);

    let mut w = Vec::with_capacity(n + 1);
    let mut lambda = Vec::with_capacity(n + 1);
    for m in 2..=n {
        builder.build_into(m, &mut w);
        normalized_lambda_into(&w, norm, &mut lambda);
        let den = lambda[0] + problem.d * ha;
        if den == 0.0 || !den.is_finite() {
            return Err(Error::SingularDenominator(den));
        }
        let mut acc = Neumaier::new();
        acc.add(ha * problem.forcing(m as f64 * h)?);
        for k in 1..=m {
            acc.add(lambda[k] * u[m - k]);
        }
        u.push(acc.value() / den);
    }

    let exact: Option<Vec<f64>> = problem
        .exact
        .as_ref()
        .map(|f| (0..=n).map(|m| f(m as f64 * h)).collect());
    let max_error = exact
        .as_ref()
        .map(|e| u.iter().zip(e).fold(0.0_f64, |acc, (ui, ei)| acc.max((ui - ei).abs())));
    let max_abs_u = u.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let scale = exact
        .as_ref()
        .map_or(0.0, |e| e.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())))
        .max(problem.y0.abs())
        .max(1.0);
    let diverged = u.iter().any(|v| !v.is_finite()) || max_abs_u > DIVERGENCE_FACTOR * scale;

    Ok(SolveResult {
        scheme,
        start,
        alpha: a,
        d: problem.d,
        h,
        u,
        exact,
        max_error,
        max_abs_u,
        diverged,
    })
}

/// [`solve`] on the grid of step `h`.
pub fn solve_with_step(problem: &RelaxationProblem, scheme: SchemeId, h: f64, start: StartMode) -> Result<SolveResult> {
    solve(problem, scheme, problem.steps_for(h)?, start)
}

/// Residual of the discrete equation at step `m ≥ 2`, recomputed with a
/// freshly built stencil:
/// `(λ_0 + D h^α) u_m - Σ_{k=1}^m λ_k u_{m-k} - h^α F_m`.
pub fn recurrence_residual(problem: &RelaxationProblem, result: &SolveResult, m: usize) -> Result<f64> {
    if m < 2 || m > result.n() {
        return Err(Error::Invalid(format!("residual index {m} outside 2..={}", result.n())));
    }
    let wv = crate::schemes::build_weights(result.scheme, problem.alpha, m)?;
    let lambda = crate::schemes::normalized_lambda(&wv);
    let h = result.h;
    let ha = h.powf(problem.alpha);
    let mut acc = Neumaier::new();
    acc.add((lambda[0] + problem.d * ha) * result.u[m]);
    for (k, l) in lambda.iter().enumerate().skip(1) {
        acc.add(-l * result.u[m - k]);
    }
    acc.add(-ha * problem.forcing(m as f64 * h)?);
    Ok(acc.value())
}

/// Convergence theory that covers a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StabilityVerdict {
    /// `D ≥ 0` with positive weights.
    GuaranteedConvergent,
    /// `-L/X^α < D < 0`, positive weights and `|D| h^α < λ_0 / 2`.
    ConditionallyConvergent,
    OutsideTheory,
}

/// Positivity of all weights and the constant `L = min_m m^α λ_m^{(m)}`
/// over the stencils used by an `n`-step run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityConstants {
    pub positive_weights: bool,
    pub l: f64,
    pub lambda0: f64,
}

pub fn stability_constants(scheme: SchemeId, alpha: f64, n: usize) -> Result<StabilityConstants> {
    if n < 2 {
        return Err(Error::Invalid(format!("stability needs n >= 2, got {n}")));
    }
    let consts = AlphaConstants::new(alpha)?;
    let norm = consts.norm(scheme.family());
    let mut builder = WeightBuilder::with_constants(scheme, consts);
    let (mut w, mut lambda) = (Vec::new(), Vec::new());
    let mut positive = true;
    let mut l = f64::INFINITY;
    let mut lambda0 = f64::NAN;
    for m in 2..=n {
        builder.build_into(m, &mut w);
        normalized_lambda_into(&w, norm, &mut lambda);
        lambda0 = lambda[0];
        positive &= lambda.iter().all(|&v| v > 0.0);
        l = l.min((m as f64).powf(alpha) * lambda[m]);
    }
    Ok(StabilityConstants {
        positive_weights: positive,
        l,
        lambda0,
    })
}

/// Advisory classification of an `n`-step run; never blocks [`solve`].
pub fn stability_check(problem: &RelaxationProblem, scheme: SchemeId, n: usize) -> Result<StabilityVerdict> {
    let c = stability_constants(scheme, problem.alpha, n)?;
    let d = problem.d;
    if !c.positive_weights || c.l <= 0.0 {
        return Ok(StabilityVerdict::OutsideTheory);
    }
    if d >= 0.0 {
        return Ok(StabilityVerdict::GuaranteedConvergent);
    }
    let ha = (problem.x_end / n as f64).powf(problem.alpha);
    let bound = -c.l / problem.x_end.powf(problem.alpha);
    if d > bound && -d * ha < 0.5 * c.lambda0 {
        Ok(StabilityVerdict::ConditionallyConvergent)
    } else {
        Ok(StabilityVerdict::OutsideTheory)
    }
}
