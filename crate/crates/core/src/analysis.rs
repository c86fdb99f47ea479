//! Convergence ladders, order estimates and comparison against the
//! published reference tables bundled in `data/golden.toml`.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caputo::{apply_stencil, fourth_order_eval_with, test_function, TestFunction, QUADRATURE_MIN_TOL};
use crate::error::{Error, Result};
use crate::relaxation::{equation, solve, steps_for, RelaxationProblem, StartMode};
use crate::schemes::{AlphaConstants, SchemeId, WeightBuilder};

/// Orders are suppressed when either error is at or below this multiple of
/// the solution scale: the errors are then rounding noise.
pub const ORDER_FLOOR: f64 = 1e-14;

/// [`ORDER_FLOOR`] for pointwise approximations, which carry no
/// accumulated recurrence rounding.
pub const APPROX_ORDER_FLOOR: f64 = 1e-16;

/// Diverged cells match when computed and expected agree within this factor.
pub const DIVERGED_FACTOR: f64 = 100.0;

const RELATIVE_TOL: f64 = 0.02;
const RELATIVE_TOL_TWO_DIGITS: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    /// `None` when the run failed.
    pub error: Option<f64>,
    /// `log2(error(2h) / error(h))`; absent on the first row.
    pub order: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub diverged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl ConvergenceRow {
    fn from_result(h: f64, r: Result<(f64, bool)>) -> Self {
        match r {
            Ok((error, diverged)) => Self {
                h,
                error: Some(error),
                order: None,
                diverged,
                failure: None,
            },
            Err(e) => Self {
                h,
                error: None,
                order: None,
                diverged: false,
                failure: Some(e.to_string()),
            },
        }
    }
}

/// Fills `order` for consecutive rows whose `h` halves.
fn fill_orders(rows: &mut [ConvergenceRow], floor: f64) {
    for i in 1..rows.len() {
        let (coarse, fine) = (rows[i - 1].error, rows[i].error);
        rows[i].order = match (coarse, fine) {
            (Some(c), Some(f)) if c > floor && f > floor && c.is_finite() && f.is_finite() => {
                Some((c / f).log2() / (rows[i - 1].h / rows[i].h).log2())
            }
            _ => None,
        };
    }
}

fn ladder_steps(h0: f64, levels: usize) -> Result<Vec<f64>> {
    if levels < 2 {
        return Err(Error::Invalid(format!(
            "a ladder needs at least 2 levels, got {levels}"
        )));
    }
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(Error::Domain {
            what: "initial step h0",
            value: h0,
            domain: "(0, inf)",
        });
    }
    Ok((0..levels).map(|j| h0 / f64::powi(2.0, j as i32)).collect())
}

/// Maximum errors of `solve` at `h0, h0/2, ..., h0/2^(levels-1)`.
///
/// Rungs run in parallel; a failing rung is reported in its row and the
/// ladder continues.
pub fn convergence_ladder(
    problem: &RelaxationProblem,
    scheme: SchemeId,
    start: StartMode,
    h0: f64,
    levels: usize,
) -> Result<Vec<ConvergenceRow>> {
    if !problem.has_exact() {
        return Err(Error::Invalid(format!(
            "problem '{}' has no exact solution",
            problem.name()
        )));
    }
    let hs = ladder_steps(h0, levels)?;
    let ns = hs.iter().map(|&h| problem.steps_for(h)).collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ConvergenceRow> = hs
        .par_iter()
        .zip(ns.par_iter())
        .map(|(&h, &n)| {
            let r = solve(problem, scheme, n, start).map(|s| (s.max_error.unwrap_or(f64::NAN), s.diverged));
            ConvergenceRow::from_result(h, r)
        })
        .collect();
    let scale = problem.y0().abs().max(1.0);
    fill_orders(&mut rows, ORDER_FLOOR * scale);
    Ok(rows)
}

/// Approximation of `D^α y(x)` used by [`approximation_ladder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Approximation {
    /// The fourth-order right-sum formula with derivative corrections.
    FourthOrder,
    Stencil(SchemeId),
}

/// Errors of `method` for `D^α f(x)` at `h0, h0/2, ...`, measured against
/// the closed form or, failing that, adaptive quadrature at the tightest
/// supported tolerance.
pub fn approximation_ladder(
    f: &TestFunction,
    alpha: f64,
    x: f64,
    h0: f64,
    levels: usize,
    method: Approximation,
) -> Result<Vec<ConvergenceRow>> {
    let consts = AlphaConstants::new(alpha)?;
    let reference = f.reference_caputo(alpha, x, QUADRATURE_MIN_TOL)?;
    let hs = ladder_steps(h0, levels)?;
    let ns = hs.iter().map(|&h| steps_for(h, x)).collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ConvergenceRow> = hs
        .par_iter()
        .zip(ns.par_iter())
        .map(|(&h, &n)| {
            let approx = match method {
                Approximation::FourthOrder => fourth_order_eval_with(&consts, f, x, n),
                Approximation::Stencil(s) => WeightBuilder::with_constants(s, consts)
                    .build(n)
                    .and_then(|wv| apply_stencil(&wv, &f.sample(x, n)?)),
            };
            ConvergenceRow::from_result(h, approx.map(|v| ((v - reference).abs(), false)))
        })
        .collect();
    fill_orders(&mut rows, APPROX_ORDER_FLOOR * reference.abs().max(1.0));
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    /// Relaxation-equation solves, one scheme and equation per column.
    Solve,
    /// Fourth-order formula at a fixed point, one function per column.
    FourthOrder,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenColumn {
    pub label: String,
    pub alpha: f64,
    #[serde(default)]
    pub equation: Option<String>,
    #[serde(default)]
    pub scheme: Option<String>,
    #[serde(default)]
    pub start: Option<String>,
    #[serde(default)]
    pub function: Option<String>,
    #[serde(default)]
    pub x: Option<f64>,
    /// Printed errors, verbatim.
    pub errors: Vec<String>,
    pub orders: Vec<f64>,
    #[serde(default)]
    pub diverged: bool,
    #[serde(default)]
    pub informational_errors: Vec<usize>,
    #[serde(default)]
    pub informational_orders: Vec<usize>,
    /// Failures in this column are reported but do not fail the table.
    #[serde(default)]
    pub optional: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenTable {
    pub id: u32,
    pub kind: TableKind,
    pub order_tolerance: f64,
    pub h: Vec<f64>,
    #[serde(default)]
    pub scale_by_abs_gamma_neg_alpha: bool,
    #[serde(rename = "column")]
    pub columns: Vec<GoldenColumn>,
}

#[derive(Deserialize)]
struct GoldenFile {
    table: Vec<GoldenTable>,
}

const GOLDEN_TOML: &str = include_str!("../data/golden.toml");

impl GoldenTable {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Invalid(format!("golden table {}: {msg}", self.id)));
        if self.h.len() < 2 {
            return bad("needs at least two rows".into());
        }
        for w in self.h.windows(2) {
            if (w[0] / w[1] - 2.0).abs() > 1e-12 {
                return bad(format!("steps {} and {} do not halve", w[0], w[1]));
            }
        }
        for c in &self.columns {
            if c.errors.len() != self.h.len() || c.orders.len() != self.h.len() {
                return bad(format!("column '{}' has the wrong number of rows", c.label));
            }
            for e in &c.errors {
                if e.parse::<f64>().is_err() {
                    return bad(format!("column '{}' has unreadable error '{e}'", c.label));
                }
            }
            let ok = match self.kind {
                TableKind::Solve => c.equation.is_some() && c.scheme.is_some(),
                TableKind::FourthOrder => c.function.is_some() && c.x.is_some(),
            };
            if !ok {
                return bad(format!("column '{}' lacks its run parameters", c.label));
            }
        }
        Ok(())
    }

    /// Step of the unprinted rung that gives the first printed row an order.
    pub fn coarse_step(&self) -> f64 {
        2.0 * self.h[0]
    }

    /// Runs the ladder for column `index`, including the coarse rung.
    pub fn compute_column(&self, index: usize) -> Result<Vec<ConvergenceRow>> {
        let c = self
            .columns
            .get(index)
            .ok_or_else(|| Error::Invalid(format!("golden table {} has no column {index}", self.id)))?;
        let levels = self.h.len() + 1;
        match self.kind {
            TableKind::Solve => {
                let problem = equation(c.equation.as_deref().unwrap_or_default(), c.alpha)?;
                let scheme: SchemeId = c.scheme.as_deref().unwrap_or_default().parse()?;
                let start = match &c.start {
                    Some(s) => s.parse()?,
                    None => StartMode::default_for(scheme),
                };
                convergence_ladder(&problem, scheme, start, self.coarse_step(), levels)
            }
            TableKind::FourthOrder => {
                let f = test_function(c.function.as_deref().unwrap_or_default())?;
                let x = c.x.unwrap_or_default();
                approximation_ladder(&f, c.alpha, x, self.coarse_step(), levels, Approximation::FourthOrder)
            }
        }
    }

    /// Computes every column, in parallel.
    pub fn compute(&self) -> Result<Vec<Vec<ConvergenceRow>>> {
        (0..self.columns.len())
            .into_par_iter()
            .map(|i| self.compute_column(i))
            .collect()
    }
}

/// All bundled reference tables, parsed once.
pub fn golden_tables() -> Result<&'static [GoldenTable]> {
    static TABLES: OnceLock<std::result::Result<Vec<GoldenTable>, String>> = OnceLock::new();
    let parsed = TABLES.get_or_init(|| {
        let file: GoldenFile = toml::from_str(GOLDEN_TOML).map_err(|e| e.to_string())?;
        for t in &file.table {
            t.validate().map_err(|e| e.to_string())?;
        }
        Ok(file.table)
    });
    parsed
        .as_deref()
        .map_err(|e| Error::Invalid(format!("golden data: {e}")))
}

pub fn golden_table(id: u32) -> Result<&'static GoldenTable> {
    let tables = golden_tables()?;
    tables.iter().find(|t| t.id == id).ok_or_else(|| Error::UnknownName {
        kind: "table",
        name: id.to_string(),
        options: tables.iter().map(|t| t.id.to_string()).collect::<Vec<_>>().join(", "),
    })
}

/// Significant digits of a printed decimal such as `0.0004290` or `4.3e-6`.
pub fn significant_digits(printed: &str) -> usize {
    let mantissa = printed.trim().split(['e', 'E']).next().unwrap_or("");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    digits.trim_start_matches('0').len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Error,
    Order,
}

/// How `deviation` relates to `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceRule {
    /// `|computed - expected| / |expected|`.
    Relative,
    /// `|computed - expected|`.
    Absolute,
    /// `max(computed/expected, expected/computed)`.
    Factor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Pass,
    Fail,
    /// Reported without affecting the verdict.
    Informational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellComparison {
    pub column: String,
    pub row: usize,
    pub h: f64,
    pub quantity: Quantity,
    pub expected: f64,
    pub computed: Option<f64>,
    pub rule: ToleranceRule,
    pub tolerance: f64,
    pub deviation: f64,
    pub status: CellStatus,
}

impl CellComparison {
    /// `deviation / tolerance` on a scale where 1 is the pass boundary.
    pub fn severity(&self) -> f64 {
        match self.rule {
            ToleranceRule::Factor => self.deviation.ln() / self.tolerance.ln(),
            _ => self.deviation / self.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub table: u32,
    pub cells: Vec<CellComparison>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.status != CellStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellComparison> {
        self.cells.iter().filter(|c| c.status == CellStatus::Fail)
    }

    /// The `k` checked cells closest to (or furthest past) their tolerance.
    pub fn worst(&self, k: usize) -> Vec<&CellComparison> {
        let mut v: Vec<_> = self
            .cells
            .iter()
            .filter(|c| c.status != CellStatus::Informational)
            .collect();
        v.sort_by(|a, b| b.severity().total_cmp(&a.severity()));
        v.truncate(k);
        v
    }
}

fn deviation(rule: ToleranceRule, computed: f64, expected: f64) -> f64 {
    match rule {
        ToleranceRule::Relative => (computed - expected).abs() / expected.abs(),
        ToleranceRule::Absolute => (computed - expected).abs(),
        ToleranceRule::Factor => {
            let r = (computed / expected).abs();
            r.max(1.0 / r)
        }
    }
}

/// Compares computed ladders (one per column, matched to the reference rows
/// by step size) against `table`.
pub fn compare_golden(table: &GoldenTable, columns: &[Vec<ConvergenceRow>]) -> Result<ComparisonReport> {
    if columns.len() != table.columns.len() {
        return Err(Error::LadderMismatch(format!(
            "table {} has {} columns, got {} ladders",
            table.id,
            table.columns.len(),
            columns.len()
        )));
    }
    let mut cells = Vec::new();
    for (col, rows) in table.columns.iter().zip(columns) {
        let factor = if table.scale_by_abs_gamma_neg_alpha {
            AlphaConstants::new(col.alpha)?.gamma_ma.abs()
        } else {
            1.0
        };
        for (i, &h) in table.h.iter().enumerate() {
            let row = rows
                .iter()
                .find(|r| (r.h - h).abs() <= 1e-9 * h)
                .ok_or_else(|| Error::LadderMismatch(format!("column '{}' has no row at h = {h}", col.label)))?;

            let printed = &col.errors[i];
            let expected = printed.parse::<f64>().map_err(|e| Error::Invalid(e.to_string()))?;
            let (rule, tol) = if col.diverged {
                (ToleranceRule::Factor, DIVERGED_FACTOR)
            } else if significant_digits(printed) <= 2 {
                (ToleranceRule::Relative, RELATIVE_TOL_TWO_DIGITS)
            } else {
                (ToleranceRule::Relative, RELATIVE_TOL)
            };
            let computed = row.error.map(|e| e * factor);
            let mut ok = computed.is_some_and(|c| deviation(rule, c, expected) <= tol);
            if col.diverged {
                ok &= row.diverged;
            }
            cells.push(cell(
                col,
                i,
                h,
                Quantity::Error,
                expected,
                computed,
                rule,
                tol,
                ok,
                &col.informational_errors,
            ));

            let expected = col.orders[i];
            let tol = table.order_tolerance;
            let ok = row
                .order
                .is_some_and(|o| deviation(ToleranceRule::Absolute, o, expected) <= tol);
            let mut c = cell(
                col,
                i,
                h,
                Quantity::Order,
                expected,
                row.order,
                ToleranceRule::Absolute,
                tol,
                ok,
                &col.informational_orders,
            );
            if col.diverged {
                c.status = CellStatus::Informational;
            }
            cells.push(c);
        }
    }
    Ok(ComparisonReport { table: table.id, cells })
}

#[allow(clippy::too_many_arguments)]
fn cell(
    col: &GoldenColumn,
    row: usize,
    h: f64,
    quantity: Quantity,
    expected: f64,
    computed: Option<f64>,
    rule: ToleranceRule,
    tolerance: f64,
    ok: bool,
    informational: &[usize],
) -> CellComparison {
    let status = if informational.contains(&row) || (col.optional && !ok) {
        CellStatus::Informational
    } else if ok {
        CellStatus::Pass
    } else {
        CellStatus::Fail
    };
    CellComparison {
        column: col.label.clone(),
        row,
        h,
        quantity,
        expected,
        computed,
        rule,
        tolerance,
        deviation: computed.map_or(f64::INFINITY, |c| deviation(rule, c, expected)),
        status,
    }
}

/// Recomputes reference table `id` and compares it.
pub fn run_golden(id: u32) -> Result<ComparisonReport> {
    let table = golden_table(id)?;
    let columns = table.compute()?;
    compare_golden(table, &columns)
}
