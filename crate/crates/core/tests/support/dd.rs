//! Double-double arithmetic (about 106 bits) and the runtime-bound formulas
//! evaluated in it, as an independent reference for the library's `f64` code.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn min(self, other: Dd) -> Dd {
        if (self - other).hi <= 0.0 {
            self
        } else {
            other
        }
    }

    pub fn powi(self, k: u32) -> Dd {
        (0..k).fold(Dd::ONE, |acc, _| acc * self)
    }

    pub fn exp(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ONE;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Dd::new(k)).ldexp(-10);
        // expm1 of the reduced argument, squared as (1 + s)^2 - 1 = 2s + s^2
        let mut term = r;
        let mut s = r;
        for i in 2..30 {
            term = term * r / Dd::new(i as f64);
            s = s + term;
            if term.hi.abs() < 1e-40 {
                break;
            }
        }
        for _ in 0..10 {
            s = s.ldexp(1) + s * s;
        }
        let sum = s + Dd::ONE;
        sum.ldexp(k as i32)
    }

    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of non-positive value");
        let mut y = Dd::new(self.hi.ln());
        for _ in 0..3 {
            y = y + self * (-y).exp() - Dd::ONE;
        }
        y
    }

    pub fn ceil(self) -> f64 {
        let c = self.hi.ceil();
        if c == self.hi {
            if self.lo > 0.0 {
                c + 1.0
            } else {
                c
            }
        } else {
            c
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Reference values of one bound evaluation.
#[derive(Debug, Clone, Copy)]
pub struct OracleBound {
    pub a: f64,
    pub eps: f64,
    pub c: f64,
    pub lambda_min_raw: f64,
    pub lambda_min: f64,
    pub bound: f64,
}

struct Constants {
    a: Dd,
    eps: Dd,
    c: Dd,
}

fn constants(delta: f64, gamma0: f64) -> Constants {
    let d = Dd::new(delta);
    let a = d * d * Dd::new(gamma0) / (Dd::new(2.0) * (Dd::ONE + d));
    let eps = (d / Dd::new(2.0)).min(Dd::new(0.5));
    let c = eps.powi(4) / Dd::new(24.0);
    Constants { a, eps, c }
}

fn population_term(m: usize, lambda: usize, c: Dd) -> Dd {
    let l = Dd::new(lambda as f64);
    Dd::new(m as f64) * l * (Dd::ONE + (Dd::ONE + c * l).ln())
}

fn sum_inverse(values: &[f64]) -> Dd {
    values
        .iter()
        .fold(Dd::ZERO, |acc, &v| acc + Dd::ONE / Dd::new(v))
}

fn floor_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// General bound from upgrade probabilities `z`.
pub fn general(m: usize, lambda: usize, z: &[f64], delta: f64, gamma0: f64) -> OracleBound {
    let Constants { a, eps, c } = constants(delta, gamma0);
    let two = Dd::new(2.0);
    let arg = Dd::new(16.0 * m as f64) / (a * c * eps * Dd::new(floor_of(z)));
    let raw = two / a * arg.ln();
    let bound = two / (c * eps) * (population_term(m, lambda, c) + sum_inverse(z));
    OracleBound {
        a: a.to_f64(),
        eps: eps.to_f64(),
        c: c.to_f64(),
        lambda_min_raw: raw.to_f64(),
        lambda_min: raw.ceil().max(1.0),
        bound: bound.to_f64(),
    }
}

/// GA bound from mutation probabilities `s` and the no-change probability `p0`.
pub fn ga(m: usize, lambda: usize, s: &[f64], p0: f64, delta: f64, gamma0: f64) -> OracleBound {
    let Constants { a, eps: psi, c } = constants(delta, gamma0);
    let two = Dd::new(2.0);
    let dg = Dd::new(delta) * Dd::new(gamma0);
    let arg = Dd::new(32.0 * m as f64) * Dd::new(p0) / (dg * dg * c * Dd::new(floor_of(s)) * psi);
    let raw = two / a * arg.ln();
    let weight = Dd::new(p0) / ((Dd::ONE + Dd::new(delta)) * Dd::new(gamma0));
    let bound = two / (c * psi) * (population_term(m, lambda, c) + weight * sum_inverse(s));
    OracleBound {
        a: a.to_f64(),
        eps: psi.to_f64(),
        c: c.to_f64(),
        lambda_min_raw: raw.to_f64(),
        lambda_min: raw.ceil().max(1.0),
        bound: bound.to_f64(),
    }
}
