//! Special functions on the real line (and the complex plane for E_{1,β}).
//!
//! * [`gamma`]: Lanczos approximation with reflection for `x < 0.5`.
//! * [`zeta`]: Riemann zeta on `(-4, 2)`. Positive arguments use Borwein's
//!   accelerated alternating (Dirichlet eta) series; non-positive arguments
//!   go through the functional equation.
//! * [`zeta_derivative`]: derivatives of zeta for `s > 1` by direct
//!   summation with an Euler–Maclaurin tail.
//! * [`mittag_leffler_1`]: E_{1,β}(z) = Σ z^k / Γ(k + β) by its power series.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_R: f64 = 10.900511;

const LANCZOS_DK: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];

const TWO_SQRT_E_OVER_PI: f64 = 1.860_382_734_205_265_7;

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |s, (i, &dk)| s + dk / (x + i as f64 - 1.0))
}

/// Γ(x) for real `x`, rejecting the poles `0, -1, -2, ...`.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain {
            what: "gamma",
            value: x,
            domain: "finite reals",
        });
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::GammaPole(x));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx); sin is evaluated on the reduced argument
        // so that it stays accurate for large negative x.
        PI / (sin_pi(x) * gamma_unchecked(1.0 - x))
    } else if x == x.floor() && x <= 171.0 {
        factorial(x as usize - 1)
    } else if x < 40.0 {
        // Γ(x) = (x-1)(x-2)...(r) Γ(r) with r in [0.5, 1.5)
        let mut r = x;
        let mut prod = 1.0;
        while r >= 1.5 {
            r -= 1.0;
            prod *= r;
        }
        prod * lanczos(r)
    } else {
        lanczos(x)
    }
}

fn lanczos(x: f64) -> f64 {
    lanczos_sum(x) * TWO_SQRT_E_OVER_PI * ((x - 0.5 + LANCZOS_R) / std::f64::consts::E).powf(x - 0.5)
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// sin(πx) with exact zeros at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor();
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r < 0.5 {
        (PI * r).sin()
    } else if r < 1.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

/// Number of terms in Borwein's eta acceleration; the truncation error is
/// below 3 / (3 + √8)^n relative to η.
const BORWEIN_TERMS: usize = 60;

/// η(s) = Σ (-1)^(k-1) / k^s for s > 0 (Borwein, algorithm 2).
fn eta_borwein(s: f64) -> f64 {
    let n = BORWEIN_TERMS;
    // d_k = n Σ_{i=0}^{k} (n+i-1)! 4^i / ((n-i)! (2i)!)
    let mut d = Vec::with_capacity(n + 1);
    let mut term = 1.0;
    let mut acc = term;
    d.push(acc);
    for i in 0..n {
        let fi = i as f64;
        let nf = n as f64;
        term *= 4.0 * (nf + fi) * (nf - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
        acc += term;
        d.push(acc);
    }
    let dn = d[n];
    let mut sum = crate::sum::Neumaier::new();
    for (k, dk) in d.iter().take(n).enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum.add(sign * (dk - dn) / ((k + 1) as f64).powf(s));
    }
    -sum.value() / dn
}

/// ζ(s) for s > 0, s ≠ 1, through ζ(s) = η(s) / (1 - 2^(1-s)).
fn zeta_positive(s: f64) -> f64 {
    // 1 - 2^(1-s) = -expm1((1-s) ln 2), accurate next to the pole
    let denom = -((1.0 - s) * LN_2).exp_m1();
    eta_borwein(s) / denom
}

/// Riemann zeta on `(-4, 2)`, excluding the pole at `s = 1`.
pub fn zeta(s: f64) -> Result<f64> {
    if s == 1.0 {
        return Err(Error::ZetaPole);
    }
    if !(s > -4.0 && s < 2.0) {
        return Err(Error::Domain {
            what: "zeta",
            value: s,
            domain: "(-4, 2)",
        });
    }
    Ok(zeta_unchecked(s))
}

/// Zeta for any real `s ≠ 1` the algorithms support; callers validate.
pub(crate) fn zeta_unchecked(s: f64) -> f64 {
    if s > 0.0 {
        zeta_positive(s)
    } else if s == 0.0 {
        -0.5
    } else {
        // ζ(s) = 2^s π^(s-1) sin(πs/2) Γ(1-s) ζ(1-s)
        2f64.powf(s) * PI.powf(s - 1.0) * sin_pi(s / 2.0) * gamma_unchecked(1.0 - s) * zeta_positive(1.0 - s)
    }
}

/// Even-index Bernoulli numbers B_2 .. B_16.
pub(crate) const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Cut-off of the direct sums in the Euler–Maclaurin evaluations.
pub(crate) const EM_CUTOFF: usize = 24;

/// Hurwitz tail `Σ_{k≥n} k^(-s)` (analytically continued for `s < 1`), with
/// `s = base` or, when `shifted`, `s = 1 + base` and terms `k^(-base)/k`.
///
/// The shifted form works from `base` itself: `1 + α` is not representable
/// for most `α`, and next to the pole the rounding is amplified by
/// `ζ'(1+α) ≈ -1/α²`. Terms below `max(n, 24)` are summed directly and the
/// remainder is the Euler–Maclaurin integral, half term and Bernoulli terms.
pub(crate) fn hurwitz_tail(base: f64, shifted: bool, n: usize) -> f64 {
    let big = n.max(EM_CUTOFF);
    let s = if shifted { 1.0 + base } else { base };
    let term = |kf: f64| {
        let p = kf.powf(-base);
        if shifted {
            p / kf
        } else {
            p
        }
    };
    let mut acc = crate::sum::Neumaier::new();
    for k in n..big {
        acc.add(term(k as f64));
    }
    let nf = big as f64;
    let first = term(nf);
    // ∫_N^∞ x^(-s) dx = N^(1-s)/(s-1)
    acc.add(if shifted {
        first * nf / base
    } else {
        first * nf / (base - 1.0)
    });
    acc.add(0.5 * first);
    // B_2j/(2j)! (s)_{2j-1} N^(1-s-2j)
    let mut rising = s;
    let mut fact = 2.0;
    let mut power = first / nf;
    for (i, b2j) in BERNOULLI_EVEN.iter().enumerate() {
        if i > 0 {
            let j2 = (2 * i) as f64;
            rising *= (s + j2 - 1.0) * (s + j2);
            fact *= (j2 + 1.0) * (j2 + 2.0);
            power /= nf * nf;
        }
        acc.add(b2j / fact * rising * power);
    }
    acc.value()
}

/// `Σ_{k≥n} k^(-1-α)` for `α > 0`, `n ≥ 1`.
pub(crate) fn shifted_zeta_tail(alpha: f64, n: usize) -> f64 {
    hurwitz_tail(alpha, true, n)
}

/// m-th derivative of ζ at `s > 1`:
/// ζ^(m)(s) = Σ_{k≥1} (-ln k)^m / k^s.
///
/// Terms `k < N` are summed directly; the tail is the Euler–Maclaurin
/// integral plus half the first tail term plus Bernoulli corrections.
pub fn zeta_derivative(s: f64, order: usize) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::Domain {
            what: "zeta_derivative",
            value: s,
            domain: "(1, inf)",
        });
    }
    let m = order;
    let n = EM_CUTOFF;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };

    let mut acc = crate::sum::Neumaier::new();
    for k in 2..n {
        let kf = k as f64;
        acc.add(kf.ln().powi(m as i32) * kf.powf(-s));
    }
    if m == 0 {
        acc.add(1.0);
    }

    let nf = n as f64;
    let ln_n = nf.ln();
    // ∫_N^∞ (ln x)^m x^(-s) dx = N^(1-s) Σ_{j=0}^{m} m!/j! (ln N)^j / (s-1)^(m-j+1)
    let mut integral = 0.0;
    for j in 0..=m {
        let coeff = factorial(m) / factorial(j);
        integral += coeff * ln_n.powi(j as i32) / (s - 1.0).powi((m - j + 1) as i32);
    }
    acc.add(integral * nf.powf(1.0 - s));

    // f(x) = (ln x)^m x^(-s); f^(r)(x) = x^(-s-r) Σ_j c_j (ln x)^j with
    // c'_j = (j+1) c_{j+1} - (s+r) c_j.
    let mut coeffs = vec![0.0; m + 1];
    coeffs[m] = 1.0;
    let eval = |c: &[f64], r: usize| -> f64 {
        let poly: f64 = c.iter().enumerate().map(|(j, cj)| cj * ln_n.powi(j as i32)).sum();
        poly * nf.powf(-s - r as f64)
    };
    acc.add(0.5 * eval(&coeffs, 0));
    let mut r = 0usize;
    let mut fact = 1.0;
    for (i, b2i) in BERNOULLI_EVEN.iter().enumerate() {
        let target = 2 * i + 1;
        while r < target {
            let next: Vec<f64> = (0..=m)
                .map(|j| {
                    let up = if j < m { (j + 1) as f64 * coeffs[j + 1] } else { 0.0 };
                    up - (s + r as f64) * coeffs[j]
                })
                .collect();
            coeffs = next;
            r += 1;
        }
        fact *= ((2 * i + 1) * (2 * i + 2)) as f64;
        acc.add(-b2i / fact * eval(&coeffs, r));
    }
    Ok(sign * acc.value())
}

/// Default term cap of [`mittag_leffler_1`].
pub const MITTAG_LEFFLER_MAX_TERMS: usize = 500;

/// E_{1,β}(z) = Σ_{k≥0} z^k / Γ(k+β) for β > 0 and |z| ≤ 50.
pub fn mittag_leffler_1(beta: f64, z: Complex64) -> Result<Complex64> {
    mittag_leffler_1_capped(beta, z, MITTAG_LEFFLER_MAX_TERMS)
}

/// [`mittag_leffler_1`] with an explicit term cap.
pub fn mittag_leffler_1_capped(beta: f64, z: Complex64, max_terms: usize) -> Result<Complex64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain {
            what: "mittag_leffler_1 beta",
            value: beta,
            domain: "(0, inf)",
        });
    }
    if !z.re.is_finite() || !z.im.is_finite() || z.norm() > 50.0 {
        return Err(Error::Domain {
            what: "mittag_leffler_1 |z|",
            value: z.norm(),
            domain: "[0, 50]",
        });
    }
    // term_k = z^k / Γ(k+β); term_{k+1} = term_k · z / (k+β)
    let mut term = Complex64::new(1.0 / gamma_unchecked(beta), 0.0);
    let mut sum = term;
    let mut running = sum.norm();
    for k in 0..max_terms {
        term = term * z / (k as f64 + beta);
        sum += term;
        running = running.max(sum.norm());
        if term.norm() < 1e-18 * running {
            return Ok(sum);
        }
        if term.norm() == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence { terms: max_terms })
}
