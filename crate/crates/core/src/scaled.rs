use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex number stored as `value * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledComplex {
    pub value: Complex64,
    pub log_scale: f64,
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex {
        value: Complex64::new(0.0, 0.0),
        log_scale: 0.0,
    };

    pub fn new(value: Complex64, log_scale: f64) -> Self {
        Self { value, log_scale }
    }

    pub fn from_complex(value: Complex64) -> Self {
        Self::new(value, 0.0)
    }

    /// Moves the magnitude of `value` into `log_scale` so that `|value|` is 1
    /// (or the value is exactly zero).
    pub fn normalized(self) -> Self {
        let n = self.value.norm();
        if n == 0.0 || !n.is_finite() {
            return self;
        }
        Self::new(self.value / n, self.log_scale + n.ln())
    }

    pub fn is_zero(&self) -> bool {
        self.value == Complex64::new(0.0, 0.0)
    }

    /// Natural log of the modulus; `-inf` for zero.
    pub fn ln_norm(&self) -> f64 {
        self.value.norm().ln() + self.log_scale
    }

    pub fn arg(&self) -> f64 {
        self.value.arg()
    }

    /// Converts to a plain complex number (may overflow to infinity).
    pub fn to_complex(self) -> Complex64 {
        self.value * self.log_scale.exp()
    }

    /// Value expressed relative to `exp(reference)`.
    pub fn relative_to(self, reference: f64) -> Complex64 {
        if self.is_zero() {
            return self.value;
        }
        self.value * (self.log_scale - reference).exp()
    }

    pub fn recip(self) -> Self {
        Self::new(self.value.inv(), -self.log_scale)
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(value: Complex64) -> Self {
        Self::from_complex(value)
    }
}

impl Mul for ScaledComplex {
    type Output = ScaledComplex;

    fn mul(self, rhs: Self) -> Self {
        Self::new(self.value * rhs.value, self.log_scale + rhs.log_scale).normalized()
    }
}

impl Mul<Complex64> for ScaledComplex {
    type Output = ScaledComplex;

    fn mul(self, rhs: Complex64) -> Self {
        Self::new(self.value * rhs, self.log_scale).normalized()
    }
}

impl Add for ScaledComplex {
    type Output = ScaledComplex;

    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let reference = self.log_scale.max(rhs.log_scale);
        Self::new(
            self.relative_to(reference) + rhs.relative_to(reference),
            reference,
        )
        .normalized()
    }
}

impl Neg for ScaledComplex {
    type Output = ScaledComplex;

    fn neg(self) -> Self {
        Self::new(-self.value, self.log_scale)
    }
}

impl Sub for ScaledComplex {
    type Output = ScaledComplex;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}
