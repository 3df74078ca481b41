//! Outward-rounded interval arithmetic over arbitrary-precision floats.
//!
//! `Scalar` is the atom of every rigorous quantity in this crate: a closed
//! interval `[lo, hi]` of MPFR floats. All operations round the lower
//! endpoint down and the upper endpoint up, so the result always contains
//! the exact real result applied to any members of the operand intervals.
//! Precision is carried per value; binary operations work at the larger of
//! the two operand precisions.

use crate::error::{Error, Result};
use rug::float::{Constant, Round};
use rug::Float;

#[derive(Clone, Debug)]
pub struct Scalar {
    lo: Float,
    hi: Float,
}

fn bin_round(
    a: &Float,
    b: &Float,
    prec: u32,
    rnd: Round,
    op: impl FnOnce(&Float, &Float) -> Float,
) -> Float {
    let mut out = op(a, b);
    out.set_prec_round(prec, rnd);
    out
}

fn add_r(a: &Float, b: &Float, prec: u32, rnd: Round) -> Float {
    Float::with_val_round(prec, a + b, rnd).0
}
fn sub_r(a: &Float, b: &Float, prec: u32, rnd: Round) -> Float {
    Float::with_val_round(prec, a - b, rnd).0
}
fn mul_r(a: &Float, b: &Float, prec: u32, rnd: Round) -> Float {
    Float::with_val_round(prec, a * b, rnd).0
}
fn div_r(a: &Float, b: &Float, prec: u32, rnd: Round) -> Float {
    Float::with_val_round(prec, a / b, rnd).0
}

impl Scalar {
    pub fn new(lo: Float, hi: Float) -> Self {
        debug_assert!(lo.is_finite() && hi.is_finite(), "non-finite endpoint");
        debug_assert!(lo <= hi, "inverted interval [{}, {}]", lo, hi);
        Scalar { lo, hi }
    }

    pub fn point(x: Float) -> Self {
        let hi = x.clone();
        Scalar { lo: x, hi }
    }

    pub fn zero(prec: u32) -> Self {
        Scalar::point(Float::with_val(prec, 0))
    }

    pub fn one(prec: u32) -> Self {
        Scalar::point(Float::with_val(prec, 1))
    }

    pub fn from_i(v: i64, prec: u32) -> Self {
        // integers up to 2^53 are exact even at low precision; round outward
        // anyway so huge v stays safe
        let lo = Float::with_val_round(prec, v, Round::Down).0;
        let hi = Float::with_val_round(prec, v, Round::Up).0;
        Scalar { lo, hi }
    }

    pub fn from_u(v: u64, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, v, Round::Down).0;
        let hi = Float::with_val_round(prec, v, Round::Up).0;
        Scalar { lo, hi }
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        Scalar::point(Float::with_val(prec.max(53), v))
    }

    /// Outward enclosure of the rational num/den.
    pub fn from_ratio(num: i64, den: i64, prec: u32) -> Self {
        assert!(den != 0);
        let n = Float::with_val(prec.max(64), num);
        let d = Float::with_val(prec.max(64), den);
        let mut lo = div_r(&n, &d, prec, Round::Down);
        let mut hi = div_r(&n, &d, prec, Round::Up);
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        Scalar { lo, hi }
    }

    /// Outward enclosure of a decimal literal.
    pub fn from_dec_str(s: &str, prec: u32) -> Result<Self> {
        let parsed = Float::parse(s).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        let lo = Float::with_val_round(prec, parsed, Round::Down).0;
        let parsed = Float::parse(s).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        let hi = Float::with_val_round(prec, parsed, Round::Up).0;
        Ok(Scalar { lo, hi })
    }

    pub fn pi(prec: u32) -> Self {
        Scalar {
            lo: Float::with_val_round(prec, Constant::Pi, Round::Down).0,
            hi: Float::with_val_round(prec, Constant::Pi, Round::Up).0,
        }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        let mut lo = self.lo.clone();
        lo.set_prec_round(prec, Round::Down);
        let mut hi = self.hi.clone();
        hi.set_prec_round(prec, Round::Up);
        Scalar { lo, hi }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn mid(&self) -> Float {
        let p = self.prec();
        let mut m = add_r(&self.lo, &self.hi, p, Round::Nearest);
        m /= 2u32;
        m
    }

    /// Upper bound for hi - lo.
    pub fn width_upper(&self) -> Float {
        sub_r(&self.hi, &self.lo, self.prec(), Round::Up)
    }

    /// Upper bound for sup |x| over the interval. Exact (abs and max are
    /// exact on floats).
    pub fn mag_upper(&self) -> Float {
        let a = self.lo.clone().abs();
        let b = self.hi.clone().abs();
        if a > b {
            a
        } else {
            b
        }
    }

    /// Lower bound for inf |x| over the interval.
    pub fn mig_lower(&self) -> Float {
        if self.contains_zero() {
            Float::with_val(self.prec(), 0)
        } else {
            let a = self.lo.clone().abs();
            let b = self.hi.clone().abs();
            if a < b {
                a
            } else {
                b
            }
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn contains_f(&self, x: &Float) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains(&self, other: &Scalar) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_subset_of(&self, other: &Scalar) -> bool {
        other.contains(self)
    }

    pub fn is_strictly_pos(&self) -> bool {
        self.lo > 0
    }

    pub fn is_strictly_neg(&self) -> bool {
        self.hi < 0
    }

    pub fn hull(&self, other: &Scalar) -> Scalar {
        let lo = if self.lo <= other.lo {
            self.lo.clone()
        } else {
            other.lo.clone()
        };
        let hi = if self.hi >= other.hi {
            self.hi.clone()
        } else {
            other.hi.clone()
        };
        Scalar { lo, hi }
    }

    pub fn try_intersect(&self, other: &Scalar) -> Option<Scalar> {
        let lo = if self.lo >= other.lo {
            self.lo.clone()
        } else {
            other.lo.clone()
        };
        let hi = if self.hi <= other.hi {
            self.hi.clone()
        } else {
            other.hi.clone()
        };
        if lo <= hi {
            Some(Scalar { lo, hi })
        } else {
            None
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        let p = self.prec().max(other.prec());
        Scalar {
            lo: add_r(&self.lo, &other.lo, p, Round::Down),
            hi: add_r(&self.hi, &other.hi, p, Round::Up),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        let p = self.prec().max(other.prec());
        Scalar {
            lo: sub_r(&self.lo, &other.hi, p, Round::Down),
            hi: sub_r(&self.hi, &other.lo, p, Round::Up),
        }
    }

    pub fn neg(&self) -> Scalar {
        Scalar {
            lo: Float::with_val(self.hi.prec(), -&self.hi),
            hi: Float::with_val(self.lo.prec(), -&self.lo),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        let p = self.prec().max(other.prec());
        let (a, b) = (self, other);
        let d = Round::Down;
        let u = Round::Up;
        let (lo, hi) = if a.lo >= 0 {
            if b.lo >= 0 {
                (mul_r(&a.lo, &b.lo, p, d), mul_r(&a.hi, &b.hi, p, u))
            } else if b.hi <= 0 {
                (mul_r(&a.hi, &b.lo, p, d), mul_r(&a.lo, &b.hi, p, u))
            } else {
                (mul_r(&a.hi, &b.lo, p, d), mul_r(&a.hi, &b.hi, p, u))
            }
        } else if a.hi <= 0 {
            if b.lo >= 0 {
                (mul_r(&a.lo, &b.hi, p, d), mul_r(&a.hi, &b.lo, p, u))
            } else if b.hi <= 0 {
                (mul_r(&a.hi, &b.hi, p, d), mul_r(&a.lo, &b.lo, p, u))
            } else {
                (mul_r(&a.lo, &b.hi, p, d), mul_r(&a.lo, &b.lo, p, u))
            }
        } else if b.lo >= 0 {
            (mul_r(&a.lo, &b.hi, p, d), mul_r(&a.hi, &b.hi, p, u))
        } else if b.hi <= 0 {
            (mul_r(&a.hi, &b.lo, p, d), mul_r(&a.lo, &b.lo, p, u))
        } else {
            let lo1 = mul_r(&a.lo, &b.hi, p, d);
            let lo2 = mul_r(&a.hi, &b.lo, p, d);
            let hi1 = mul_r(&a.lo, &b.lo, p, u);
            let hi2 = mul_r(&a.hi, &b.hi, p, u);
            (lo1.min(&lo2), hi1.max(&hi2))
        };
        Scalar { lo, hi }
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        if other.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        if other.hi < 0 {
            return self.neg().checked_div(&other.neg());
        }
        // other.lo > 0
        let p = self.prec().max(other.prec());
        let d = Round::Down;
        let u = Round::Up;
        let (lo, hi) = if self.lo >= 0 {
            (
                div_r(&self.lo, &other.hi, p, d),
                div_r(&self.hi, &other.lo, p, u),
            )
        } else if self.hi <= 0 {
            (
                div_r(&self.lo, &other.lo, p, d),
                div_r(&self.hi, &other.hi, p, u),
            )
        } else {
            (
                div_r(&self.lo, &other.lo, p, d),
                div_r(&self.hi, &other.lo, p, u),
            )
        };
        Ok(Scalar { lo, hi })
    }

    pub fn recip(&self) -> Result<Scalar> {
        Scalar::one(self.prec()).checked_div(self)
    }

    /// Exact range of x^2 (tighter than self * self for intervals
    /// straddling zero).
    pub fn square(&self) -> Scalar {
        let p = self.prec();
        let mag = self.mag_upper();
        let mig = self.mig_lower();
        Scalar {
            lo: mul_r(&mig, &mig, p, Round::Down),
            hi: mul_r(&mag, &mag, p, Round::Up),
        }
    }

    pub fn pow_u(&self, n: u32) -> Scalar {
        match n {
            0 => Scalar::one(self.prec()),
            1 => self.clone(),
            _ => {
                let mut result: Option<Scalar> = None;
                let mut base = self.clone();
                let mut k = n;
                loop {
                    if k & 1 == 1 {
                        result = Some(match result {
                            None => base.clone(),
                            Some(r) => r.mul(&base),
                        });
                    }
                    k >>= 1;
                    if k == 0 {
                        break;
                    }
                    base = base.square();
                }
                result.unwrap()
            }
        }
    }

    pub fn sqrt(&self) -> Result<Scalar> {
        if self.lo < 0 {
            return Err(Error::SqrtNegative);
        }
        let p = self.prec();
        Ok(Scalar {
            lo: Float::with_val_round(p, self.lo.sqrt_ref(), Round::Down).0,
            hi: Float::with_val_round(p, self.hi.sqrt_ref(), Round::Up).0,
        })
    }

    /// sqrt after clamping the lower endpoint to zero. Valid when the exact
    /// argument is known to be nonnegative and only rounding pushed the
    /// enclosure below zero.
    pub fn sqrt_clamped(&self) -> Scalar {
        let p = self.prec();
        let lo = if self.lo < 0 {
            Float::with_val(p, 0)
        } else {
            self.lo.clone()
        };
        let hi = if self.hi < 0 {
            Float::with_val(p, 0)
        } else {
            self.hi.clone()
        };
        Scalar { lo, hi }.sqrt().expect("clamped sqrt")
    }

    pub fn abs(&self) -> Scalar {
        Scalar {
            lo: self.mig_lower(),
            hi: self.mag_upper(),
        }
    }

    pub fn ln(&self) -> Result<Scalar> {
        if self.lo <= 0 {
            return Err(Error::InvalidParam("ln of nonpositive interval".into()));
        }
        let p = self.prec();
        Ok(Scalar {
            lo: Float::with_val_round(p, self.lo.ln_ref(), Round::Down).0,
            hi: Float::with_val_round(p, self.hi.ln_ref(), Round::Up).0,
        })
    }

    /// Pointwise max(x, y) over the two intervals.
    pub fn max_iv(&self, other: &Scalar) -> Scalar {
        let lo = if self.lo >= other.lo {
            self.lo.clone()
        } else {
            other.lo.clone()
        };
        let hi = if self.hi >= other.hi {
            self.hi.clone()
        } else {
            other.hi.clone()
        };
        Scalar { lo, hi }
    }

    pub fn min_iv(&self, other: &Scalar) -> Scalar {
        let lo = if self.lo <= other.lo {
            self.lo.clone()
        } else {
            other.lo.clone()
        };
        let hi = if self.hi <= other.hi {
            self.hi.clone()
        } else {
            other.hi.clone()
        };
        Scalar { lo, hi }
    }

    /// self + [-r, r] for r >= 0.
    pub fn inflate(&self, r: &Float) -> Scalar {
        debug_assert!(*r >= 0);
        let p = self.prec().max(r.prec());
        Scalar {
            lo: sub_r(&self.lo, r, p, Round::Down),
            hi: add_r(&self.hi, r, p, Round::Up),
        }
    }

    /// Exact multiplication by 2^e.
    pub fn mul_2exp(&self, e: i32) -> Scalar {
        let lo = self.lo.clone() << e;
        let hi = self.hi.clone() << e;
        Scalar { lo, hi }
    }

    pub fn mul_f(&self, x: &Float) -> Scalar {
        self.mul(&Scalar::point(x.clone()))
    }

    pub fn to_f64_mid(&self) -> f64 {
        self.mid().to_f64()
    }

    fn cos_point(x: &Float, p: u32) -> Scalar {
        Scalar {
            lo: Float::with_val_round(p, x.cos_ref(), Round::Down).0,
            hi: Float::with_val_round(p, x.cos_ref(), Round::Up).0,
        }
    }

    /// Rigorous enclosure of cos over the interval.
    pub fn cos(&self) -> Scalar {
        let p = self.prec();
        let pi = Scalar::pi(p);
        let full = Scalar::from_i(-1, p).hull(&Scalar::from_i(1, p));
        // width >= 2*pi: the whole range is attained
        let two_pi_lo = add_r(&pi.lo, &pi.lo, p, Round::Down);
        if self.width_upper() >= two_pi_lo {
            return full;
        }
        let t = match self.checked_div(&pi) {
            Ok(t) => t,
            Err(_) => return full,
        };
        let t_lo = t.lo.to_f64();
        let t_hi = t.hi.to_f64();
        if !t_lo.is_finite() || !t_hi.is_finite() || t_lo.abs() > 1e15 || t_hi.abs() > 1e15 {
            return full;
        }
        let k_min = t_lo.floor() as i64 - 1;
        let k_max = t_hi.ceil() as i64 + 1;
        let mut out = Scalar::cos_point(&self.lo, p).hull(&Scalar::cos_point(&self.hi, p));
        for k in k_min..=k_max {
            let crit = pi.mul(&Scalar::from_i(k, p));
            if crit.try_intersect(self).is_some() {
                let v = if k.rem_euclid(2) == 0 { 1 } else { -1 };
                out = out.hull(&Scalar::from_i(v, p));
            }
        }
        out.try_intersect(&full).unwrap_or(full)
    }

    /// Rigorous enclosure of sin over the interval.
    pub fn sin(&self) -> Scalar {
        // sin(x) = cos(x - pi/2)
        let p = self.prec();
        let half_pi = Scalar::pi(p).mul_2exp(-1);
        self.sub(&half_pi).cos()
    }
}

impl std::fmt::Display for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:.6e}, {:.6e}]", self.lo.to_f64(), self.hi.to_f64())
    }
}

macro_rules! impl_scalar_op {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl std::ops::$trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar::$imp(self, rhs)
            }
        }
    };
}
impl_scalar_op!(Add, add, add);
impl_scalar_op!(Sub, sub, sub);
impl_scalar_op!(Mul, mul, mul);

impl std::ops::Div<&Scalar> for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        self.checked_div(rhs)
            .expect("division by an interval containing zero")
    }
}

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

/// Rectangular enclosure of a complex value.
#[derive(Clone, Debug)]
pub struct ComplexBox {
    pub re: Scalar,
    pub im: Scalar,
}

impl ComplexBox {
    pub fn new(re: Scalar, im: Scalar) -> Self {
        ComplexBox { re, im }
    }

    pub fn from_real(re: Scalar) -> Self {
        let p = re.prec();
        ComplexBox {
            re,
            im: Scalar::zero(p),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn add(&self, other: &ComplexBox) -> ComplexBox {
        ComplexBox {
            re: self.re.add(&other.re),
            im: self.im.add(&other.im),
        }
    }

    pub fn sub(&self, other: &ComplexBox) -> ComplexBox {
        ComplexBox {
            re: self.re.sub(&other.re),
            im: self.im.sub(&other.im),
        }
    }

    pub fn mul(&self, other: &ComplexBox) -> ComplexBox {
        let rr = self.re.mul(&other.re);
        let ii = self.im.mul(&other.im);
        let ri = self.re.mul(&other.im);
        let ir = self.im.mul(&other.re);
        ComplexBox {
            re: rr.sub(&ii),
            im: ri.add(&ir),
        }
    }

    pub fn neg(&self) -> ComplexBox {
        ComplexBox {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> ComplexBox {
        ComplexBox {
            re: self.re.mul(s),
            im: self.im.mul(s),
        }
    }

    pub fn add_real(&self, s: &Scalar) -> ComplexBox {
        ComplexBox {
            re: self.re.add(s),
            im: self.im.clone(),
        }
    }

    /// Upper bound for sup |w| over the box.
    pub fn mag_upper(&self) -> Float {
        let p = self.prec();
        let a = self.re.mag_upper();
        let b = self.im.mag_upper();
        let mut s = mul_r(&a, &a, p, Round::Up);
        s.add_assign_round(mul_r(&b, &b, p, Round::Up), Round::Up);
        Float::with_val_round(p, s.sqrt_ref(), Round::Up).0
    }

    /// Lower bound for inf |w| over the box.
    pub fn mag_lower(&self) -> Float {
        let p = self.prec();
        let a = self.re.mig_lower();
        let b = self.im.mig_lower();
        let mut s = mul_r(&a, &a, p, Round::Down);
        s.add_assign_round(mul_r(&b, &b, p, Round::Down), Round::Down);
        Float::with_val_round(p, s.sqrt_ref(), Round::Down).0
    }

    /// Enclosure of |w| over the box.
    pub fn abs_iv(&self) -> Scalar {
        Scalar::new(self.mag_lower(), self.mag_upper())
    }

    /// self + square box of half-width r (encloses adding any complex number
    /// of modulus <= r).
    pub fn inflate(&self, r: &Float) -> ComplexBox {
        ComplexBox {
            re: self.re.inflate(r),
            im: self.im.inflate(r),
        }
    }
}

use rug::ops::AddAssignRound;

// keep bin_round used (handy in debugging sessions)
#[allow(dead_code)]
fn _unused(a: &Float, b: &Float) -> Float {
    bin_round(a, b, 53, Round::Nearest, |x, y| {
        Float::with_val(53, x + y)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;
    use crate::testutil::SplitMix64;

    fn s(lo: f64, hi: f64) -> Scalar {
        Scalar::new(Float::with_val(128, lo), Float::with_val(128, hi))
    }

    #[test]
    fn add_exact_integers() {
        let r = s(1.0, 2.0).add(&s(3.0, 4.0));
        assert_eq!(r.lo().to_f64(), 4.0);
        assert_eq!(r.hi().to_f64(), 6.0);
    }

    #[test]
    fn mul_symmetric_unit() {
        let r = s(-1.0, 1.0).mul(&s(-1.0, 1.0));
        assert_eq!(r.lo().to_f64(), -1.0);
        assert_eq!(r.hi().to_f64(), 1.0);
    }

    #[test]
    fn div_third_tight() {
        let one = Scalar::one(128);
        let three = Scalar::from_i(3, 128);
        let r = one.checked_div(&three).unwrap();
        // reference at 512 bits
        let reference = Float::with_val(512, 1) / Float::with_val(512, 3);
        assert!(*r.lo() <= reference && reference <= *r.hi());
        // width <= 2 ulp at 128 bits
        let ulp = Float::with_val(128, Float::u_exp(1, -128 - 1));
        let two_ulp = Float::with_val(128, 2 * ulp);
        assert!(r.width_upper() <= two_ulp);
    }

    #[test]
    fn div_by_zero_interval_errors() {
        let r = s(1.0, 1.0).checked_div(&s(-1.0, 1.0));
        assert!(matches!(r, Err(Error::DivisionByZero)));
    }

    #[test]
    fn mag_upper_examples() {
        assert_eq!(s(-3.0, 2.0).mag_upper().to_f64(), 3.0);
        let b = ComplexBox::new(s(0.0, 0.0), s(-1.0, 1.0));
        let m = b.mag_upper();
        assert!(m >= 1.0);
        assert!(m.to_f64() <= 1.0 + 1e-30);
        let third = Scalar::one(128).checked_div(&Scalar::from_i(3, 128)).unwrap();
        assert!(third.mag_upper().to_f64() >= 0.333333333333);
    }

    #[test]
    fn cos_basic_ranges() {
        let p = Scalar::pi(128);
        // cos over [0, pi] = [-1, 1]
        let full = Scalar::new(Float::with_val(128, 0), p.hi().clone()).cos();
        assert!(full.lo().to_f64() <= -1.0 + 1e-30);
        assert!(full.hi().to_f64() >= 1.0 - 1e-30);
        // cos(0) = 1
        let one = Scalar::zero(128).cos();
        assert!(one.contains_f(&Float::with_val(128, 1)));
        assert!(one.width_upper().to_f64() < 1e-35);
        // cos(pi/2) contains 0
        let z = p.mul_2exp(-1).cos();
        assert!(z.contains_zero());
        // sin(pi/2) contains 1
        let o = p.mul_2exp(-1).sin();
        assert!(o.contains_f(&Float::with_val(128, 1)));
    }

    fn rand_iv(rng: &mut SplitMix64) -> Scalar {
        let a = rng.f64_in(-10.0, 10.0);
        let w = rng.f64_in(0.0, 2.0);
        Scalar::new(Float::with_val(128, a), Float::with_val(128, a + w))
    }

    #[test]
    fn containment_random_points() {
        // exact f64 operations on midpoints must land inside the interval op
        let mut rng = SplitMix64::new(0x5eed);
        for _ in 0..10_000 {
            let a = rng.f64_in(-8.0, 8.0);
            let b = rng.f64_in(-8.0, 8.0);
            let ia = Scalar::from_f64(a, 128);
            let ib = Scalar::from_f64(b, 128);
            let exact_mul = Float::with_val(256, a) * Float::with_val(256, b);
            assert!(ia.mul(&ib).contains_f(&Float::with_val(256, &exact_mul)));
            let exact_add = Float::with_val(256, a) + Float::with_val(256, b);
            assert!(ia.add(&ib).contains_f(&Float::with_val(256, &exact_add)));
            if b != 0.0 {
                let exact_div = Float::with_val(256, a) / Float::with_val(256, b);
                let d = ia.checked_div(&ib).unwrap();
                assert!(d.contains_f(&Float::with_val(256, exact_div)));
            }
        }
    }

    #[test]
    fn inclusion_monotonicity() {
        let mut rng = SplitMix64::new(0xabcd);
        for _ in 0..10_000 {
            let a = rand_iv(&mut rng);
            let b = rand_iv(&mut rng);
            let a_wide = a.inflate(&Float::with_val(128, 0.5));
            let b_wide = b.inflate(&Float::with_val(128, 0.25));
            assert!(a_wide.mul(&b_wide).contains(&a.mul(&b)));
            assert!(a_wide.add(&b_wide).contains(&a.add(&b)));
            assert!(a_wide.sub(&b_wide).contains(&a.sub(&b)));
        }
    }

    #[test]
    fn precision_scaling_never_widens() {
        let mut rng = SplitMix64::new(0x777);
        for _ in 0..1_000 {
            let a = rng.f64_in(-4.0, 4.0);
            let b = rng.f64_in(-4.0, 4.0);
            if b == 0.0 {
                continue;
            }
            let lo_prec = Scalar::from_f64(a, 64)
                .checked_div(&Scalar::from_f64(b, 64))
                .unwrap();
            let hi_prec = Scalar::from_f64(a, 128)
                .checked_div(&Scalar::from_f64(b, 128))
                .unwrap();
            assert!(lo_prec.contains(&hi_prec));
        }
    }

    #[test]
    fn sqrt_and_square() {
        let x = s(-2.0, 3.0);
        let sq = x.square();
        assert_eq!(sq.lo().to_f64(), 0.0);
        assert_eq!(sq.hi().to_f64(), 9.0);
        let r = s(4.0, 9.0).sqrt().unwrap();
        assert!(r.contains_f(&Float::with_val(128, 2)));
        assert!(r.contains_f(&Float::with_val(128, 3)));
        assert!(s(-1.0, 1.0).sqrt().is_err());
    }

    #[test]
    fn pow_contains_exact() {
        let x = Scalar::from_ratio(3, 2, 128);
        let p5 = x.pow_u(5);
        let exact = Float::with_val(256, 1.5).pow(5); // 7.59375 exact
        assert!(p5.contains_f(&Float::with_val(256, exact)));
    }
}

