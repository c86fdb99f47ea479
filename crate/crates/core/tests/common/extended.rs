//! Extended-precision evaluation of the closed-form tail weights of the
//! order 3-α right-sum scheme, used as an oracle free of the f64
//! cancellation in the closed form.

use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode};

const P: usize = 160;
const RM: RoundingMode = RoundingMode::ToEven;

/// Direct terms are summed up to this index before the Euler-Maclaurin tail.
const EM_START: usize = 40;

/// `B_2j` as `(numerator, denominator)`, `j = 1..=15`.
const BERNOULLI: [(f64, f64); 15] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
    (8553103.0, 6.0),
    (-23749461029.0, 870.0),
    (8615841276005.0, 14322.0),
];

#[derive(Clone, Debug)]
pub struct X(BigFloat);

impl X {
    /// Exact for every finite `f64`.
    pub fn from(v: f64) -> Self {
        X(BigFloat::from_f64(v, P))
    }

    /// `self^e` for `self > 0`, as `exp(e ln self)` with guard bits;
    /// `BigFloat::pow` does not terminate when the power is exactly
    /// representable (16^0.25).
    pub fn powf(&self, e: &X, cc: &mut Consts) -> X {
        let w = P + 64;
        let l = self.0.ln(w, RM, cc).mul(&e.0, w, RM);
        let mut r = l.exp(w, RM, cc);
        r.set_precision(P, RM).expect("rounding to working precision");
        X(r)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_string().parse().expect("decimal rendering parses")
    }
}

impl Add for X {
    type Output = X;
    fn add(self, o: X) -> X {
        X(self.0.add(&o.0, P, RM))
    }
}

impl Sub for X {
    type Output = X;
    fn sub(self, o: X) -> X {
        X(self.0.sub(&o.0, P, RM))
    }
}

impl Mul for X {
    type Output = X;
    fn mul(self, o: X) -> X {
        X(self.0.mul(&o.0, P, RM))
    }
}

impl Div for X {
    type Output = X;
    fn div(self, o: X) -> X {
        X(self.0.div(&o.0, P, RM))
    }
}

impl Neg for X {
    type Output = X;
    fn neg(self) -> X {
        X(self.0.neg())
    }
}

fn int(k: usize) -> X {
    X::from(k as f64)
}

/// `S_n[s] = -Σ_{k≥n} k^(-s)` (analytically continued), `s ≠ 1`.
pub fn deficit(s: &X, n: usize, cc: &mut Consts) -> X {
    let big = n.max(EM_START);
    let mut tail = X::from(0.0);
    for k in n..big {
        tail = tail + int(k).powf(&-s.clone(), cc);
    }
    let nf = int(big);
    let first = nf.powf(&-s.clone(), cc);
    let one = X::from(1.0);
    tail = tail + first.clone() * nf.clone() / (s.clone() - one.clone());
    tail = tail + first.clone() / X::from(2.0);
    // B_2j/(2j)! (s)_{2j-1} N^(1-s-2j)
    let mut rising = s.clone();
    let mut fact = X::from(2.0);
    let mut power = first / nf.clone();
    let n2 = nf.clone() * nf;
    for (j, (num, den)) in BERNOULLI.iter().enumerate() {
        if j > 0 {
            let m = X::from((2 * j) as f64);
            rising = rising * (s.clone() + m.clone() - one.clone()) * (s.clone() + m.clone());
            fact = fact * (m.clone() + one.clone()) * (m + X::from(2.0));
            power = power / n2.clone();
        }
        tail = tail + X::from(*num) / X::from(*den) / fact.clone() * rising.clone() * power.clone();
    }
    -tail
}

/// `(δ_{n-2}, δ_{n-1}, δ_n)` from the closed form, for `n ≥ 6`, with α
/// taken as its exact binary value.
pub fn right3_tail(alpha: f64, n: usize) -> [f64; 3] {
    thread_local! {
        static CONSTS: std::cell::RefCell<Consts> = std::cell::RefCell::new(Consts::new().expect("constant cache"));
    }
    CONSTS.with(|c| right3_tail_with(alpha, n, &mut c.borrow_mut()))
}

fn right3_tail_with(alpha: f64, n: usize, cc: &mut Consts) -> [f64; 3] {
    let a = X::from(alpha);
    let one = X::from(1.0);
    let two = X::from(2.0);
    let nf = int(n);
    let s_ap1 = deficit(&(a.clone() + one.clone()), n, cc);
    let s_a = deficit(&a, n, cc);
    let s_am1 = deficit(&(a.clone() - one.clone()), n, cc);
    let n1ma = nf.powf(&(one.clone() - a.clone()), cc);
    let inv_pow = |k: usize, cc: &mut Consts| int(k).powf(&-(a.clone() + one.clone()), cc);
    // α(1-α)(2-α) and (α-2)(α-1)α
    let den = a.clone() * (one.clone() - a.clone()) * (two.clone() - a.clone());
    let den_neg = (a.clone() - two.clone()) * (a.clone() - one.clone()) * a.clone();

    let d_nm2 = inv_pow(n - 2, cc)
        - (nf.clone() * int(n - 1) * s_ap1.clone() - int(2 * n - 1) * s_a.clone()
            + s_am1.clone()
            + (a.clone() + int(2 * n - 2)) * n1ma.clone() / den_neg)
            / two.clone();
    let d_nm1 = inv_pow(n - 1, cc) + nf.clone() * int(n - 2) * s_ap1.clone() - two.clone() * int(n - 1) * s_a.clone()
        + s_am1.clone()
        + two.clone() * (a.clone() + int(n - 2)) * n1ma.clone() / den.clone();
    let d_n = -(int(n - 1) * int(n - 2) * s_ap1 - int(2 * n - 3) * s_a
        + s_am1
        + (X::from(3.0) * a + int(2 * n) - X::from(6.0)) * n1ma / den)
        / two;
    [d_nm2.to_f64(), d_nm1.to_f64(), d_n.to_f64()]
}
