//! Exact arithmetic for graph edge weights.
//!
//! Every edge weight reachable from unit-weight pair sources through balanced
//! beamsplitters lies in the ring Z[sqrt(2)] scaled by a power of two:
//! w = (a + b sqrt(2)) / 2^k. Closing over that form keeps the rescaling
//! parameter C and all edge signs exact, so structural assertions (common
//! magnitudes, powers of 1/sqrt(2), W^2 = I) are integer comparisons rather
//! than floating-point ones.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub(crate) const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Exact value (a + b sqrt(2)) / 2^k, kept in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExactWeight {
    a: i64,
    b: i64,
    k: u32,
}

impl ExactWeight {
    pub const ZERO: ExactWeight = ExactWeight { a: 0, b: 0, k: 0 };
    pub const ONE: ExactWeight = ExactWeight { a: 1, b: 0, k: 0 };

    pub fn integer(n: i64) -> Self {
        ExactWeight { a: n, b: 0, k: 0 }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.a == 0 && self.b == 0 {
            self.k = 0;
            return self;
        }
        while self.k > 0 && self.a % 2 == 0 && self.b % 2 == 0 {
            self.a /= 2;
            self.b /= 2;
            self.k -= 1;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn value(&self) -> f64 {
        (self.a as f64 + self.b as f64 * SQRT2) / f64::powi(2.0, self.k as i32)
    }

    /// Division by sqrt(2): (a + b sqrt(2))/2^k -> (2b + a sqrt(2))/2^(k+1).
    pub fn div_sqrt2(&self) -> Self {
        ExactWeight { a: 2 * self.b, b: self.a, k: self.k + 1 }.normalized()
    }

    /// Exact halving.
    pub fn half(&self) -> Self {
        ExactWeight { a: self.a, b: self.b, k: self.k + 1 }.normalized()
    }

    /// If |w| equals (1/sqrt(2))^m for an integer m, return m.
    ///
    /// Both pure-integer and pure-sqrt(2) numerators qualify; mixed forms
    /// like 1 + sqrt(2) never do.
    pub fn half_exponent(&self) -> Option<i32> {
        fn log2_abs(x: i64) -> Option<i32> {
            let m = x.unsigned_abs();
            if m.is_power_of_two() {
                Some(m.trailing_zeros() as i32)
            } else {
                None
            }
        }
        if self.is_zero() {
            return None;
        }
        if self.b == 0 {
            // |w| = 2^(j - k) = (1/sqrt2)^(2k - 2j)
            log2_abs(self.a).map(|j| 2 * self.k as i32 - 2 * j)
        } else if self.a == 0 {
            // |w| = 2^j sqrt2 / 2^k = (1/sqrt2)^(2k - 2j - 1)
            log2_abs(self.b).map(|j| 2 * self.k as i32 - 2 * j - 1)
        } else {
            None
        }
    }

    /// Exact magnitude comparison.
    pub fn same_magnitude(&self, other: &ExactWeight) -> bool {
        let s = self.normalized();
        let o = other.normalized();
        (s.a == o.a && s.b == o.b && s.k == o.k)
            || (s.a == -o.a && s.b == -o.b && s.k == o.k)
    }

    pub fn signum(&self) -> i32 {
        let v = self.value();
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    }

    pub fn abs(&self) -> Self {
        if self.value() < 0.0 {
            -*self
        } else {
            *self
        }
    }

    /// (1/sqrt(2))^m for m >= 0.
    pub fn inv_sqrt2_pow(m: u32) -> Self {
        let mut w = ExactWeight::ONE;
        for _ in 0..m {
            w = w.div_sqrt2();
        }
        w
    }
}

impl Add for ExactWeight {
    type Output = ExactWeight;
    fn add(self, rhs: ExactWeight) -> ExactWeight {
        let k = self.k.max(rhs.k);
        let sl = 1_i64 << (k - self.k);
        let sr = 1_i64 << (k - rhs.k);
        ExactWeight { a: self.a * sl + rhs.a * sr, b: self.b * sl + rhs.b * sr, k }.normalized()
    }
}

impl Sub for ExactWeight {
    type Output = ExactWeight;
    fn sub(self, rhs: ExactWeight) -> ExactWeight {
        self + (-rhs)
    }
}

impl Neg for ExactWeight {
    type Output = ExactWeight;
    fn neg(self) -> ExactWeight {
        ExactWeight { a: -self.a, b: -self.b, k: self.k }
    }
}

impl Mul for ExactWeight {
    type Output = ExactWeight;
    fn mul(self, rhs: ExactWeight) -> ExactWeight {
        ExactWeight {
            a: self.a * rhs.a + 2 * self.b * rhs.b,
            b: self.a * rhs.b + self.b * rhs.a,
            k: self.k + rhs.k,
        }
        .normalized()
    }
}

impl fmt::Debug for ExactWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {} sqrt2)/2^{} = {}", self.a, self.b, self.k, self.value())
    }
}

impl fmt::Display for ExactWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn div_sqrt2_squares_to_half() {
        let w = ExactWeight::ONE.div_sqrt2();
        assert!((w.value() - 1.0 / SQRT2).abs() < 1e-15);
        let h = w.div_sqrt2();
        assert_eq!(h, ExactWeight::ONE.half());
        assert_eq!(h.value(), 0.5);
    }

    #[test]
    fn half_exponents() {
        assert_eq!(ExactWeight::ONE.half_exponent(), Some(0));
        assert_eq!(ExactWeight::ONE.div_sqrt2().half_exponent(), Some(1));
        assert_eq!(ExactWeight::inv_sqrt2_pow(5).half_exponent(), Some(5));
        assert_eq!(ExactWeight::integer(2).half_exponent(), Some(-2));
        let mixed = ExactWeight::ONE + ExactWeight::ONE.div_sqrt2();
        assert_eq!(mixed.half_exponent(), None);
    }

    #[test]
    fn ring_arithmetic() {
        let x = ExactWeight::inv_sqrt2_pow(3);
        let y = ExactWeight::inv_sqrt2_pow(3);
        assert_eq!(x * y, ExactWeight::inv_sqrt2_pow(6));
        assert_eq!(x - y, ExactWeight::ZERO);
        let s = x + y;
        assert_eq!(s.half_exponent(), Some(1));
        assert!((s.value() - SQRT2 / 2.0 * 1.0).abs() < 1e-15);
    }

    #[test]
    fn addition_normalizes() {
        let w = ExactWeight::inv_sqrt2_pow(2) + ExactWeight::inv_sqrt2_pow(2);
        assert_eq!(w, ExactWeight::ONE);
    }
}
