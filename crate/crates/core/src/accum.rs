//! Summation kernels: compensated (Neumaier) sums, double-double
//! accumulation, and an exact fixed-point representation for von Mangoldt
//! prefix sums.
//!
//! All deterministic-parallel reductions in this crate sum per-block
//! partials in a fixed block order, so results are independent of thread
//! count.

use num_complex::Complex64;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}

/// Complex Neumaier accumulator (componentwise compensation).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Double-double value (`hi + lo` with `|lo| <= ulp(hi)/2`), enough head
/// room that the fast and brute Goldbach sums agree to the last f64 bit.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl DoubleDouble {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn add_f64(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        let lo = self.lo + e;
        let (hi, lo2) = two_sum(s, lo);
        self.hi = hi;
        self.lo = lo2;
    }

    #[inline]
    pub fn add(&mut self, other: DoubleDouble) {
        self.add_f64(other.hi);
        self.add_f64(other.lo);
    }

    /// Accumulates the exact product `a * b`.
    #[inline]
    pub fn add_prod(&mut self, a: f64, b: f64) {
        let (p, e) = two_prod(a, b);
        self.add_f64(p);
        self.add_f64(e);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Scale used for the exact fixed-point Lambda accumulation: every
/// von Mangoldt value log p lies in [log 2, 64), so `x * 2^53` is an
/// integer for every representable Lambda value and i128 prefix sums are
/// exact up to sieve limits far beyond practical memory.
pub const LAMBDA_UNIT_SCALE: f64 = 9007199254740992.0; // 2^53

/// Exact integer representation of a Lambda value in units of 2^-53.
#[inline]
pub fn lambda_units(x: f64) -> i128 {
    debug_assert!(x >= 0.0 && x < 64.0);
    (x * LAMBDA_UNIT_SCALE) as i128
}

/// f64 view of a 2^-53 fixed-point count (one correctly rounded f64
/// conversion followed by an exact power-of-two scale).
#[inline]
pub fn units_to_f64(units: i128) -> f64 {
    (units as f64) / LAMBDA_UNIT_SCALE
}

/// Exact double-double view of a 2^-53 fixed-point count.
#[inline]
pub fn units_to_dd(units: i128) -> DoubleDouble {
    let hi = units as f64;
    let rem = units - hi as i128;
    let mut dd = DoubleDouble::from_f64(hi / LAMBDA_UNIT_SCALE);
    dd.add_f64(rem as f64 / LAMBDA_UNIT_SCALE);
    dd
}
