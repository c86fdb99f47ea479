//! Weight stencils for the Caputo derivative.
//!
//! Every scheme approximates `y^(α)(x_n)` by `Σ_k w_k y_{n-k} / (C h^α)`.
//! The corrected schemes are assembled from one of three base families
//! plus head and tail correction stencils:
//!
//! * L1: weights built from `(k±1)^(1-α)` differences, `C = Γ(2-α)`.
//! * midpoint (`Mid*`): central-difference weights `(k+1)^(-α) - (k-1)^(-α)`,
//!   `C = 2Γ(1-α)`.
//! * right sum (`Right*`): weights `k^(-1-α)`, `C = Γ(-α) < 0`.
//!
//! Head corrections cancel the `ζ(α) y'(x)` and `ζ(α-1) y''(x)` terms of the
//! endpoint expansion with backward differences on `y_n, y_{n-1}, y_{n-2}`.
//! Tail corrections cancel the `y'(0)` (and `y''(0)`) residual with forward
//! differences on `y_0, y_1, y_2`, scaled by the harmonic deficits `W_n`,
//! `K_1` and `K_2`. Contributions landing on the same index are summed, so
//! the small-`n` stencils come out of the same construction.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{gamma_unchecked, hurwitz_tail, shifted_zeta_tail, zeta_unchecked, BERNOULLI_EVEN, EM_CUTOFF};
use crate::sum::Neumaier;

/// The ten weight schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SchemeId {
    /// Classical L1, order 2-α.
    L1,
    /// L1 with a second-difference head correction, order 2.
    L1Second,
    /// Uncorrected midpoint sum, order 1-α.
    MidLow,
    /// Midpoint sum with the `y'(x)` head correction; order 2-α only when `y'(0) = 0`.
    MidRaw,
    /// Midpoint sum with head and `W_n` tail corrections, order 2-α.
    Mid2mAlpha,
    /// Midpoint sum with second-difference head and `W_n` tail, order 2.
    Mid2,
    /// Uncorrected right sum, order 1-α.
    RightLow,
    /// Right sum with the `y'(x)` head correction; order 2-α only when `y'(0) = 0`.
    RightRaw,
    /// Right sum with head and `K_1` tail corrections, order 2-α.
    Right2mAlpha,
    /// Right sum with three-point head and `K_1`/`K_2` tail corrections, order 3-α.
    Right3mAlpha,
}

/// Construction family of a scheme; fixes the base weights and `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    L1,
    Midpoint,
    RightSum,
}

impl SchemeId {
    pub const ALL: [SchemeId; 10] = [
        SchemeId::L1,
        SchemeId::L1Second,
        SchemeId::MidLow,
        SchemeId::MidRaw,
        SchemeId::Mid2mAlpha,
        SchemeId::Mid2,
        SchemeId::RightLow,
        SchemeId::RightRaw,
        SchemeId::Right2mAlpha,
        SchemeId::Right3mAlpha,
    ];

    pub fn family(self) -> Family {
        use SchemeId::*;
        match self {
            L1 | L1Second => Family::L1,
            MidLow | MidRaw | Mid2mAlpha | Mid2 => Family::Midpoint,
            RightLow | RightRaw | Right2mAlpha | Right3mAlpha => Family::RightSum,
        }
    }

    /// Order of accuracy on smooth data. `MidRaw` and `RightRaw` reach it
    /// only when `y'(0) = 0`.
    pub fn nominal_order(self, alpha: f64) -> f64 {
        use SchemeId::*;
        match self {
            MidLow | RightLow => 1.0 - alpha,
            L1 | MidRaw | Mid2mAlpha | RightRaw | Right2mAlpha => 2.0 - alpha,
            L1Second | Mid2 => 2.0,
            Right3mAlpha => 3.0 - alpha,
        }
    }

    /// Command-line spelling.
    pub fn name(self) -> &'static str {
        use SchemeId::*;
        match self {
            L1 => "l1",
            L1Second => "l1second",
            MidLow => "midlow",
            MidRaw => "midraw",
            Mid2mAlpha => "mid2malpha",
            Mid2 => "mid2",
            RightLow => "rightlow",
            RightRaw => "rightraw",
            Right2mAlpha => "right2malpha",
            Right3mAlpha => "right3malpha",
        }
    }

    /// `NS[k]` labels used for the numerical solutions in the literature.
    pub fn ns_label(self) -> Option<&'static str> {
        use SchemeId::*;
        match self {
            L1 => Some("NS[1]"),
            Mid2mAlpha => Some("NS[9]"),
            Mid2 => Some("NS[10]"),
            Right2mAlpha => Some("NS[12]"),
            Right3mAlpha => Some("NS[13]"),
            MidLow => Some("NS[20]"),
            RightLow => Some("NS[34]"),
            _ => None,
        }
    }

    fn valid_names() -> String {
        let mut names: Vec<&str> = SchemeId::ALL.iter().map(|s| s.name()).collect();
        names.extend([
            "NS[1]", "NS[9]", "NS[10]", "NS[12]", "NS[13]", "NS[20]", "NS[34]", "NS[40]", "NS[45]",
        ]);
        names.join(", ")
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use SchemeId::*;
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        let id = match key.as_str() {
            "l1" | "ns[1]" | "ns1" => L1,
            "l1second" | "l12" => L1Second,
            "midlow" | "ns[20]" | "ns20" => MidLow,
            "midraw" => MidRaw,
            "mid2malpha" | "ns[9]" | "ns9" => Mid2mAlpha,
            "mid2" | "ns[10]" | "ns10" => Mid2,
            "rightlow" | "ns[34]" | "ns34" => RightLow,
            "rightraw" => RightRaw,
            "right2malpha" | "ns[12]" | "ns12" | "ns[40]" | "ns40" => Right2mAlpha,
            "right3malpha" | "ns[13]" | "ns13" | "ns[45]" | "ns45" => Right3mAlpha,
            _ => {
                return Err(Error::UnknownName {
                    kind: "scheme",
                    name: s.to_string(),
                    options: SchemeId::valid_names(),
                })
            }
        };
        Ok(id)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "alpha",
            value: alpha,
            domain: "(0, 1)",
        })
    }
}

/// Zeta and gamma values that depend only on α.
///
/// Computed once per α and handed to every weight builder so no special
/// function is evaluated inside a stencil or time-stepping loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaConstants {
    pub alpha: f64,
    /// ζ(α)
    pub zeta: f64,
    /// ζ(α-1)
    pub zeta_m1: f64,
    /// ζ(α-2)
    pub zeta_m2: f64,
    /// ζ(α-3)
    pub zeta_m3: f64,
    /// ζ(1+α)
    pub zeta_p1: f64,
    /// Γ(1-α)
    pub gamma_1ma: f64,
    /// Γ(2-α)
    pub gamma_2ma: f64,
    /// Γ(-α)
    pub gamma_ma: f64,
}

impl AlphaConstants {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            zeta: zeta_unchecked(alpha),
            zeta_m1: zeta_unchecked(alpha - 1.0),
            zeta_m2: zeta_unchecked(alpha - 2.0),
            zeta_m3: zeta_unchecked(alpha - 3.0),
            zeta_p1: shifted_zeta_tail(alpha, 1),
            gamma_1ma: gamma_unchecked(1.0 - alpha),
            gamma_2ma: gamma_unchecked(2.0 - alpha),
            gamma_ma: gamma_unchecked(-alpha),
        })
    }

    /// Normalization constant `C` of a family.
    pub fn norm(&self, family: Family) -> f64 {
        match family {
            Family::L1 => self.gamma_2ma,
            Family::Midpoint => 2.0 * self.gamma_1ma,
            Family::RightSum => self.gamma_ma,
        }
    }
}

/// `S_n[β] = Σ_{k=1}^{n-1} k^(-β) - ζ(β)`, kept as a running accumulator so
/// that moving from `n` to `n+1` costs one power.
///
/// For `β > 1` terms are evaluated as `k^(-(β-1))/k` against the same
/// shifted zeta, so `S_n[1+α]` never sees the rounded exponent `1+α`.
#[derive(Debug, Clone)]
pub struct HarmonicDeficit {
    /// Exponent handed to `powf`; `β - 1` when `shifted`.
    base: f64,
    shifted: bool,
    n: usize,
    zeta: f64,
    partial: Neumaier,
}

impl HarmonicDeficit {
    /// Accumulator positioned at `n = 2`.
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha == 1.0 {
            return Err(Error::ZetaPole);
        }
        if !(alpha > -1.0 && alpha < 2.0) {
            return Err(Error::Domain {
                what: "harmonic deficit exponent",
                value: alpha,
                domain: "(-1, 2) without 1",
            });
        }
        if alpha > 1.0 {
            // β - 1 is exact for β in [1, 2]
            let base = alpha - 1.0;
            Ok(Self::shifted(base, shifted_zeta_tail(base, 1)))
        } else {
            Ok(Self::plain(alpha, zeta_unchecked(alpha)))
        }
    }

    /// `S_n[1+α]` given `α > 0` and `ζ(1+α)`.
    pub(crate) fn shifted(alpha: f64, zeta_p1: f64) -> Self {
        Self::start(alpha, true, zeta_p1)
    }

    pub(crate) fn plain(beta: f64, zeta: f64) -> Self {
        Self::start(beta, false, zeta)
    }

    fn start(base: f64, shifted: bool, zeta: f64) -> Self {
        let mut partial = Neumaier::new();
        partial.add(1.0);
        Self {
            base,
            shifted,
            n: 2,
            zeta,
            partial,
        }
    }

    /// The exponent `β`.
    pub fn beta(&self) -> f64 {
        if self.shifted {
            self.base + 1.0
        } else {
            self.base
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self) -> f64 {
        let mut acc = self.partial;
        acc.add(-self.zeta);
        acc.value()
    }

    /// Advance from `n` to `n + 1`.
    pub fn extend(&mut self) {
        let k = self.n as f64;
        let term = k.powf(-self.base);
        self.partial.add(if self.shifted { term / k } else { term });
        self.n += 1;
    }

    pub fn advance_to(&mut self, n: usize) {
        while self.n < n {
            self.extend();
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("stencils need n >= 2, got {n}")))
    }
}

/// `S_n[β]` for β in (-1, 2) without 1.
///
/// Small `n` use the partial sum minus `ζ(β)`; from `n = 24` on the value is
/// `-ζ(β, n)` summed at `n`, which keeps full relative precision when
/// `|S_n| ≪ |ζ(β)|`.
pub fn harmonic_deficit(beta: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    let mut s = HarmonicDeficit::new(beta)?;
    if n >= EM_CUTOFF {
        return Ok(-hurwitz_tail(s.base, s.shifted, n));
    }
    s.advance_to(n);
    Ok(s.value())
}

/// `S_n[1+α]` for α in (0, 1), evaluated from α itself.
pub(crate) fn harmonic_deficit_shifted(alpha: f64, n: usize) -> f64 {
    if n >= EM_CUTOFF {
        return -hurwitz_tail(alpha, true, n);
    }
    let mut s = HarmonicDeficit::shifted(alpha, shifted_zeta_tail(alpha, 1));
    s.advance_to(n);
    s.value()
}

/// `W_n`, `K_1` and `K_2` for one `(α, n)`.
///
/// * `w = S_n[α] - n^(1-α)/(1-α)`: the `y'(0)` residual of the head-corrected
///   midpoint sum, up to the factor `2h`.
/// * `k1 = n S_n[1+α] - S_n[α] + n^(1-α)/(α(1-α))`: coefficient of
///   `y'(0) h^(1-α)` in the right-sum expansion.
/// * `k2 = (n²/2) S_n[1+α] - n S_n[α] + S_n[α-1]/2 + n^(2-α)/(α(α-1)(α-2))`:
///   coefficient of `y''(0) h^(2-α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCoefficients {
    pub w: f64,
    pub k1: f64,
    pub k2: f64,
}

/// From this `n` on the tail coefficients come from their Euler–Maclaurin
/// series; the direct formulas lose `~n³ ε` to cancellation.
pub const ASYMPTOTIC_FROM: usize = 16;

impl TailCoefficients {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        check_alpha(alpha)?;
        check_n(n)?;
        if n >= ASYMPTOTIC_FROM {
            return Ok(Self::asymptotic(alpha, n));
        }
        Ok(Self::direct(
            harmonic_deficit_shifted(alpha, n),
            harmonic_deficit(alpha, n)?,
            harmonic_deficit(alpha - 1.0, n)?,
            alpha,
            n,
        ))
    }

    /// Straight evaluation of the defining formulas.
    pub fn direct(s_ap1: f64, s_a: f64, s_am1: f64, alpha: f64, n: usize) -> Self {
        let nf = n as f64;
        let a = alpha;
        Self {
            w: s_a - nf.powf(1.0 - a) / (1.0 - a),
            k1: nf * s_ap1 - s_a + nf.powf(1.0 - a) / (a * (1.0 - a)),
            k2: 0.5 * nf * nf * s_ap1 - nf * s_a + 0.5 * s_am1 + nf.powf(2.0 - a) / (a * (a - 1.0) * (a - 2.0)),
        }
    }

    /// `S_n[β] = -ζ(β, n)` expanded at `n`; the growing terms cancel
    /// analytically, leaving (with `r = 2j - 1`, `(x)_r` rising)
    /// `K_1 = -Σ B_2j/(2j)! r (1+α)_{r-1} n^(1-α-2j)`,
    /// `K_2 = -½ Σ B_2j/(2j)! r(r-1) (1+α)_{r-2} n^(2-α-2j)`,
    /// `W = -n^(-α)/2 - Σ B_2j/(2j)! (α)_r n^(1-α-2j)`.
    pub fn asymptotic(alpha: f64, n: usize) -> Self {
        let a = alpha;
        let nf = n as f64;
        let inv_n2 = 1.0 / (nf * nf);
        let base = nf.powf(-a);
        let (mut w, mut k1, mut k2) = (Neumaier::new(), Neumaier::new(), Neumaier::new());
        w.add(-0.5 * base);
        // n^(1-α-2j) for j = 1
        let mut power = base / nf;
        let mut fact = 2.0;
        for (i, b2j) in BERNOULLI_EVEN.iter().enumerate() {
            let r = 2 * i + 1;
            if i > 0 {
                fact *= (r * (r + 1)) as f64;
                power *= inv_n2;
            }
            let c = b2j / fact;
            w.add(-c * rising(a, r) * power);
            k1.add(-c * r as f64 * rising(a + 1.0, r - 1) * power);
            if r >= 2 {
                k2.add(-0.5 * c * (r * (r - 1)) as f64 * rising(a + 1.0, r - 2) * power * nf);
            }
        }
        Self {
            w: w.value(),
            k1: k1.value(),
            k2: k2.value(),
        }
    }
}

fn rising(x: f64, r: usize) -> f64 {
    (0..r).map(|i| x + i as f64).product()
}

/// `K_1` for α in (0, 1), `n ≥ 2`.
pub fn k1_coefficient(alpha: f64, n: usize) -> Result<f64> {
    Ok(TailCoefficients::new(alpha, n)?.k1)
}

/// `K_2` for α in (0, 1), `n ≥ 2`.
pub fn k2_coefficient(alpha: f64, n: usize) -> Result<f64> {
    Ok(TailCoefficients::new(alpha, n)?.k2)
}

/// `W_n[α]` for α in (0, 1), `n ≥ 2`.
pub fn midpoint_deficit(alpha: f64, n: usize) -> Result<f64> {
    Ok(TailCoefficients::new(alpha, n)?.w)
}

/// Stencil `w_0..w_n` of one scheme for one `(α, n)`.
///
/// Weights are stored in the raw convention (before division by `C`), so the
/// approximation is `Σ w_k y_{n-k} / (norm h^α)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    scheme: SchemeId,
    alpha: f64,
    n: usize,
    weights: Vec<f64>,
    norm: f64,
}

impl WeightVector {
    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn sum(&self) -> f64 {
        crate::sum::sum(self.weights.iter().copied())
    }

    pub fn max_abs(&self) -> f64 {
        self.weights.iter().fold(0.0, |m, w| m.max(w.abs()))
    }
}

/// Builds stencils of one scheme for growing `n`.
///
/// Power tables and harmonic deficits are extended incrementally, so a
/// sequence of builds for `n = 2, 3, ..., N` costs `O(N²)` in total with no
/// special-function evaluations after construction.
#[derive(Debug, Clone)]
pub struct WeightBuilder {
    scheme: SchemeId,
    consts: AlphaConstants,
    /// `pow[k] = k^(exponent)` for the base family; index 0 is unused.
    pow: Vec<f64>,
    /// `S_m` values indexed by `m` for exponents α+1, α, α-1.
    s_ap1: Vec<f64>,
    s_a: Vec<f64>,
    s_am1: Vec<f64>,
    acc_ap1: HarmonicDeficit,
    acc_a: HarmonicDeficit,
    acc_am1: HarmonicDeficit,
}

impl WeightBuilder {
    pub fn new(scheme: SchemeId, alpha: f64) -> Result<Self> {
        Ok(Self::with_constants(scheme, AlphaConstants::new(alpha)?))
    }

    pub fn with_constants(scheme: SchemeId, consts: AlphaConstants) -> Self {
        let a = consts.alpha;
        Self {
            scheme,
            consts,
            pow: vec![0.0],
            s_ap1: vec![f64::NAN; 2],
            s_a: vec![f64::NAN; 2],
            s_am1: vec![f64::NAN; 2],
            acc_ap1: HarmonicDeficit::shifted(a, consts.zeta_p1),
            acc_a: HarmonicDeficit::plain(a, consts.zeta),
            acc_am1: HarmonicDeficit::plain(a - 1.0, consts.zeta_m1),
        }
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn constants(&self) -> &AlphaConstants {
        &self.consts
    }

    fn power(&self, k: f64) -> f64 {
        let a = self.consts.alpha;
        match self.scheme.family() {
            Family::L1 => k.powf(1.0 - a),
            Family::Midpoint => k.powf(-a),
            Family::RightSum => k.powf(-a) / k,
        }
    }

    fn ensure(&mut self, n: usize) {
        while self.pow.len() <= n + 1 {
            let k = self.pow.len() as f64;
            let p = self.power(k);
            self.pow.push(p);
        }
        while self.s_a.len() <= n {
            let m = self.s_a.len();
            self.acc_ap1.advance_to(m);
            self.acc_a.advance_to(m);
            self.acc_am1.advance_to(m);
            self.s_ap1.push(self.acc_ap1.value());
            self.s_a.push(self.acc_a.value());
            self.s_am1.push(self.acc_am1.value());
        }
    }

    /// `(S_n[α+1], S_n[α], S_n[α-1])`.
    pub fn deficits(&mut self, n: usize) -> (f64, f64, f64) {
        self.ensure(n);
        (self.s_ap1[n], self.s_a[n], self.s_am1[n])
    }

    pub fn build(&mut self, n: usize) -> Result<WeightVector> {
        check_n(n)?;
        let mut w = Vec::new();
        self.build_into(n, &mut w);
        Ok(WeightVector {
            scheme: self.scheme,
            alpha: self.consts.alpha,
            n,
            weights: w,
            norm: self.consts.norm(self.scheme.family()),
        })
    }

    /// Writes the raw weights for `n ≥ 2` into `w` (resized to `n + 1`).
    pub fn build_into(&mut self, n: usize, w: &mut Vec<f64>) {
        debug_assert!(n >= 2);
        self.ensure(n);
        w.clear();
        w.resize(n + 1, 0.0);
        let c = self.consts;
        let a = c.alpha;
        use SchemeId::*;

        match self.scheme.family() {
            Family::L1 => {
                let p = &self.pow;
                let pw = |k: usize| if k == 0 { 0.0 } else { p[k] };
                w[0] = 1.0;
                for (k, wk) in w.iter_mut().enumerate().take(n).skip(1) {
                    *wk = pw(k + 1) - 2.0 * pw(k) + pw(k - 1);
                }
                w[n] = pw(n - 1) - pw(n);
            }
            Family::Midpoint => {
                // (1/2) Σ_{k=1}^{n-1} (y_{n-k+1} - y_{n-k-1}) / k^α, collected by sample
                for (j, wj) in w.iter_mut().enumerate() {
                    let fwd = if j + 2 <= n { self.pow[j + 1] } else { 0.0 };
                    let bwd = if j >= 2 { self.pow[j - 1] } else { 0.0 };
                    *wj = fwd - bwd;
                }
            }
            Family::RightSum => {
                w[0] = -c.zeta_p1;
                w[1..n].copy_from_slice(&self.pow[1..n]);
                w[n] = -self.s_ap1[n];
            }
        }

        // Head: raw sum = C h^α D + a1·h y'(x) + a2·h² y''(x) + ...
        let (a1, a2) = match self.scheme.family() {
            Family::L1 => (0.0, c.zeta_m1),
            Family::Midpoint => (2.0 * c.zeta, -2.0 * c.zeta_m1),
            Family::RightSum => (-c.zeta, 0.5 * c.zeta_m1),
        };
        match self.scheme {
            L1 | MidLow | RightLow => {}
            L1Second => second_difference_head(w, a2),
            MidRaw | Mid2mAlpha | RightRaw | Right2mAlpha => two_point_head(w, a1),
            Mid2 => {
                two_point_head(w, a1);
                second_difference_head(w, a2 + 0.5 * a1);
            }
            Right3mAlpha => {
                // h y'_n = (3/2)y_n - 2y_{n-1} + (1/2)y_{n-2} + O(h³)
                w[0] -= 1.5 * a1;
                w[1] += 2.0 * a1;
                w[2] -= 0.5 * a1;
                second_difference_head(w, a2);
            }
        }

        // Tail: residual b1·h y'(0) + b2·h² y''(0)
        if !matches!(self.scheme, Mid2mAlpha | Mid2 | Right2mAlpha | Right3mAlpha) {
            return;
        }
        let tail = if n >= ASYMPTOTIC_FROM {
            TailCoefficients::asymptotic(a, n)
        } else {
            TailCoefficients::direct(self.s_ap1[n], self.s_a[n], self.s_am1[n], a, n)
        };
        match self.scheme {
            Mid2mAlpha | Mid2 => {
                let b1 = 2.0 * tail.w;
                w[n - 1] -= b1;
                w[n] += b1;
            }
            Right2mAlpha => {
                w[n - 1] -= tail.k1;
                w[n] += tail.k1;
            }
            Right3mAlpha => {
                let (b1, b2) = (tail.k1, tail.k2);
                // h y'_0 = -(3/2)y_0 + 2y_1 - (1/2)y_2,  h² y''_0 = y_0 - 2y_1 + y_2
                w[n] += 1.5 * b1 - b2;
                w[n - 1] += -2.0 * b1 + 2.0 * b2;
                w[n - 2] += 0.5 * b1 - b2;
            }
            _ => {}
        }
    }
}

/// Removes `a1 (y_n - y_{n-1})`.
fn two_point_head(w: &mut [f64], a1: f64) {
    w[0] -= a1;
    w[1] += a1;
}

/// Removes `a2 (y_n - 2y_{n-1} + y_{n-2})`.
fn second_difference_head(w: &mut [f64], a2: f64) {
    w[0] -= a2;
    w[1] += 2.0 * a2;
    w[2] -= a2;
}

/// Stencil of `scheme` for `(α, n)`; `n ≥ 2`, `α` in (0, 1).
pub fn build_weights(scheme: SchemeId, alpha: f64, n: usize) -> Result<WeightVector> {
    check_n(n)?;
    WeightBuilder::new(scheme, alpha)?.build(n)
}

/// Closed-form last three weights `(δ_{n-2}, δ_{n-1}, δ_n)` of the order
/// 3-α right-sum scheme, written out in terms of `S_n` without `K_1`/`K_2`.
/// Valid for `n ≥ 6`, where the head and tail stencils do not overlap.
pub fn right3_tail_closed_form(consts: &AlphaConstants, n: usize) -> Result<[f64; 3]> {
    if n < 6 {
        return Err(Error::Invalid(format!("closed-form tail needs n >= 6, got {n}")));
    }
    let a = consts.alpha;
    let nf = n as f64;
    let s_ap1 = harmonic_deficit_shifted(a, n);
    let (s_a, s_am1) = (harmonic_deficit(a, n)?, harmonic_deficit(a - 1.0, n)?);
    let n1ma = nf.powf(1.0 - a);
    let d_nm2 = (nf - 2.0).powf(-a) / (nf - 2.0)
        - 0.5
            * (nf * (nf - 1.0) * s_ap1 - (2.0 * nf - 1.0) * s_a
                + s_am1
                + (a + 2.0 * nf - 2.0) * n1ma / ((a - 2.0) * (a - 1.0) * a));
    let d_nm1 = (nf - 1.0).powf(-a) / (nf - 1.0) + nf * (nf - 2.0) * s_ap1 - 2.0 * (nf - 1.0) * s_a
        + s_am1
        + 2.0 * (a + nf - 2.0) * n1ma / (a * (1.0 - a) * (2.0 - a));
    let d_n = -0.5
        * ((nf - 1.0) * (nf - 2.0) * s_ap1 - (2.0 * nf - 3.0) * s_a
            + s_am1
            + (3.0 * a + 2.0 * nf - 6.0) * n1ma / (a * (1.0 - a) * (2.0 - a)));
    Ok([d_nm2, d_nm1, d_n])
}

/// Solver-facing weights: `λ_0 = w_0 / C`, `λ_k = -w_k / C`, so the scheme
/// reads `(λ_0 y_n - Σ_{k≥1} λ_k y_{n-k}) / h^α`.
pub fn normalized_lambda(wv: &WeightVector) -> Vec<f64> {
    let mut out = Vec::with_capacity(wv.weights.len());
    normalized_lambda_into(&wv.weights, wv.norm, &mut out);
    out
}

pub(crate) fn normalized_lambda_into(w: &[f64], norm: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend(
        w.iter()
            .enumerate()
            .map(|(k, wk)| if k == 0 { wk / norm } else { -wk / norm }),
    );
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

/// Outcome of [`validate_weights`]: one entry per property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub scheme: SchemeId,
    pub alpha: f64,
    pub n: usize,
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn violations(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn all_passed(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn status(&self, name: &str) -> Option<CheckStatus> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.status)
    }
}

pub const SUM_TO_ZERO: &str = "sum_to_zero";
pub const SIGN_PATTERN: &str = "sign_pattern";
pub const ALTERNATING_HEAD: &str = "alternating_head";
pub const TAIL_BOUND_N_MINUS_1: &str = "tail_bound_n_minus_1";
pub const TAIL_BOUNDS_N: &str = "tail_bounds_n";

/// Checks the proven weight properties that apply to the scheme.
///
/// Signs are taken after orienting by the sign of `C`, so the right-sum
/// family (with `C = Γ(-α) < 0`) is judged like the others.
///
/// * sum-to-zero (every scheme): `|Σ w_k| ≤ 1e-10 max|w_k|`
/// * sign pattern (L1, Mid2mAlpha, Right2mAlpha):
///   `w_0 > 0`, `w_1 < w_2 < ... < w_{n-1} < 0`, `w_n < 0`
/// * alternating head (L1Second, Mid2, Right3mAlpha): `w_0 > 0, w_1 < 0, w_2 > 0`,
///   checked once `n` is large enough that no tail correction reaches index 2
/// * Mid2mAlpha tail bounds: `w_{n-1} < -11α/(6n^(1+α))` and
///   `-2/(n-1)^α < w_n < -2/n^α`
pub fn validate_weights(wv: &WeightVector) -> PropertyReport {
    use SchemeId::*;
    let n = wv.n;
    let a = wv.alpha;
    let orient = wv.norm.signum();
    let v: Vec<f64> = wv.weights.iter().map(|w| orient * w).collect();
    let mut checks = Vec::new();

    let total = wv.sum();
    let scale = wv.max_abs();
    checks.push(PropertyCheck {
        name: SUM_TO_ZERO,
        status: if total.abs() <= 1e-10 * scale {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        detail: format!("sum = {total:e}, max|w| = {scale:e}"),
    });

    let sign_pattern = matches!(wv.scheme, L1 | Mid2mAlpha | Right2mAlpha);
    checks.push(if sign_pattern {
        let mut bad = Vec::new();
        if !(v[0] > 0.0) {
            bad.push("w_0 <= 0".to_string());
        }
        for k in 1..n - 1 {
            if !(v[k] < v[k + 1]) {
                bad.push(format!("w_{k} >= w_{}", k + 1));
            }
        }
        if !(v[n - 1] < 0.0) {
            bad.push(format!("w_{} >= 0", n - 1));
        }
        if !(v[n] < 0.0) {
            bad.push(format!("w_{n} >= 0"));
        }
        PropertyCheck {
            name: SIGN_PATTERN,
            status: if bad.is_empty() {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: bad.join("; "),
        }
    } else {
        not_applicable(SIGN_PATTERN)
    });

    let head_free_from = match wv.scheme {
        L1Second => Some(3),
        Mid2 => Some(4),
        Right3mAlpha => Some(5),
        _ => None,
    };
    checks.push(match head_free_from {
        Some(min_n) if n >= min_n => {
            let ok = v[0] > 0.0 && v[1] < 0.0 && v[2] > 0.0;
            PropertyCheck {
                name: ALTERNATING_HEAD,
                status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                detail: format!("w_0 = {:e}, w_1 = {:e}, w_2 = {:e}", v[0], v[1], v[2]),
            }
        }
        _ => not_applicable(ALTERNATING_HEAD),
    });

    if wv.scheme == Mid2mAlpha {
        let nf = n as f64;
        let bound = -11.0 * a / (6.0 * nf.powf(1.0 + a));
        let w1 = wv.weights[n - 1];
        checks.push(PropertyCheck {
            name: TAIL_BOUND_N_MINUS_1,
            status: if w1 < bound {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: format!("w_(n-1) = {w1:e}, bound = {bound:e}"),
        });
        let lo = -2.0 / (nf - 1.0).powf(a);
        let hi = -2.0 / nf.powf(a);
        let wn = wv.weights[n];
        checks.push(PropertyCheck {
            name: TAIL_BOUNDS_N,
            status: if lo < wn && wn < hi {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: format!("w_n = {wn:e} in ({lo:e}, {hi:e})"),
        });
    } else {
        checks.push(not_applicable(TAIL_BOUND_N_MINUS_1));
        checks.push(not_applicable(TAIL_BOUNDS_N));
    }

    PropertyReport {
        scheme: wv.scheme,
        alpha: a,
        n,
        checks,
    }
}

fn not_applicable(name: &'static str) -> PropertyCheck {
    PropertyCheck {
        name,
        status: CheckStatus::NotApplicable,
        detail: String::new(),
    }
}

/// Leading `y''(x) h^(2-α)` error coefficients of the three order-(2-α)
/// schemes, signed so that `approximation - exact ≈ c · y''(x) h^(2-α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionCoefficients {
    pub alpha: f64,
    /// L1: `ζ(α-1)/Γ(2-α)`
    pub c1: f64,
    /// Head-corrected midpoint sum: `(ζ(α) - 2ζ(α-1))/(2Γ(1-α))`
    pub c9: f64,
    /// Head-corrected right sum: `(ζ(α-1) - ζ(α))/(2Γ(-α))`
    pub c12: f64,
}

impl ExpansionCoefficients {
    /// `(|c1|, |c9|, |c12|)`; all three coefficients are negative on (0, 1).
    pub fn magnitudes(&self) -> (f64, f64, f64) {
        (self.c1.abs(), self.c9.abs(), self.c12.abs())
    }
}

pub fn expansion_coefficients(alpha: f64) -> Result<ExpansionCoefficients> {
    let c = AlphaConstants::new(alpha)?;
    Ok(ExpansionCoefficients {
        alpha,
        c1: c.zeta_m1 / c.gamma_2ma,
        c9: (c.zeta - 2.0 * c.zeta_m1) / (2.0 * c.gamma_1ma),
        c12: (c.zeta_m1 - c.zeta) / (2.0 * c.gamma_ma),
    })
}
