//! Exact arithmetic in the quadratic field Q(φ), φ = (1 + √5)/2.
//!
//! Every length, volume and frequency in the crate is a [`Scalar`]. Purely
//! rational quantities are the special case with a zero φ-part, so rules with
//! rational geometry never see the irrational component.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An element `rat + phi·φ` of Q(φ), with φ² = φ + 1.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Scalar {
    rat: BigRational,
    phi: BigRational,
}

impl Scalar {
    pub fn new(rat: BigRational, phi: BigRational) -> Self {
        Scalar { rat, phi }
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar {
            rat: r,
            phi: BigRational::zero(),
        }
    }

    pub fn from_int<T: Into<BigInt>>(n: T) -> Self {
        Scalar::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn ratio<A: Into<BigInt>, B: Into<BigInt>>(num: A, den: B) -> Self {
        Scalar::from_rational(BigRational::new(num.into(), den.into()))
    }

    /// The golden mean φ itself.
    pub fn phi() -> Self {
        Scalar {
            rat: BigRational::zero(),
            phi: BigRational::one(),
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rat
    }

    pub fn phi_part(&self) -> &BigRational {
        &self.phi
    }

    pub fn is_rational(&self) -> bool {
        self.phi.is_zero()
    }

    /// The rational value, if the φ-part vanishes.
    pub fn to_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.rat)
    }

    /// Galois conjugate: φ ↦ 1 − φ.
    pub fn conjugate(&self) -> Self {
        Scalar {
            rat: &self.rat + &self.phi,
            phi: -&self.phi,
        }
    }

    /// Field norm `x · conj(x)`, always rational.
    pub fn norm(&self) -> BigRational {
        // (p + qφ)(p + q − qφ) = p² + pq − q²
        &self.rat * &self.rat + &self.rat * &self.phi - &self.phi * &self.phi
    }

    pub fn recip(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "division by zero in Q(phi)");
        let c = self.conjugate();
        Scalar {
            rat: c.rat / &n,
            phi: c.phi / n,
        }
    }

    pub fn signum(&self) -> Ordering {
        // x = (A + B√5)/2 with A = 2p + q, B = q.
        let a = BigRational::from_integer(2.into()) * &self.rat + &self.phi;
        let b = &self.phi;
        let sa = a.cmp(&BigRational::zero());
        let sb = b.cmp(&BigRational::zero());
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            (Ordering::Greater, Ordering::Less) => {
                (&a * &a).cmp(&(BigRational::from_integer(5.into()) * b * b))
            }
            (Ordering::Less, Ordering::Greater) => {
                (BigRational::from_integer(5.into()) * b * b).cmp(&(&a * &a))
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Exact `floor(self · 2^shift)`.
    pub fn floor_scaled(&self, shift: u32) -> BigInt {
        let scale = BigInt::one() << shift;
        let p = &self.rat * BigRational::from_integer(scale.clone());
        let q = &self.phi * BigRational::from_integer(scale);
        let x = Scalar { rat: p, phi: q };
        x.floor()
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.rat.floor().to_integer();
        }
        // x = (2a + b + b√5) / (2d) over a common denominator d.
        let d = self.rat.denom().lcm(self.phi.denom());
        let a = self.rat.numer() * (&d / self.rat.denom());
        let b = self.phi.numer() * (&d / self.phi.denom());
        let root = {
            let s = (BigInt::from(5) * &b * &b).sqrt();
            if b.sign() == Sign::Minus {
                -s - 1
            } else {
                s
            }
        };
        let approx = (BigInt::from(2) * &a + &b + root).div_floor(&(BigInt::from(2) * &d));
        let mut m = approx;
        while Scalar::from_int(m.clone()) > *self {
            m -= 1;
        }
        while Scalar::from_int(&m + 1) <= *self {
            m += 1;
        }
        m
    }

    /// Fractional part in `[0, 1)`, exact.
    pub fn fract(&self) -> Scalar {
        self - &Scalar::from_int(self.floor())
    }

    /// Float readout accurate to about 2⁻⁶⁰ absolute error, free of
    /// cancellation between the two components.
    pub fn to_f64(&self) -> f64 {
        if let Some(r) = self.to_rational() {
            return ratio_to_f64(r);
        }
        let whole = self.floor();
        let frac = (self - &Scalar::from_int(whole.clone())).floor_scaled(64);
        whole.to_f64().unwrap_or(f64::NAN) + frac.to_f64().unwrap_or(f64::NAN) / 2f64.powi(64)
    }
}

/// Natural logarithm of a positive big integer, without overflow.
pub fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    let shift = bits.saturating_sub(60);
    let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of a positive rational; `-inf` for zero.
pub fn ln_rational(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator or denominator outside f64 range: shift both down
        let n = r.numer();
        let d = r.denom();
        let shift = n.bits().max(d.bits()).saturating_sub(1000);
        let n = n >> shift;
        let d = d >> shift;
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    })
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar {
            rat: BigRational::zero(),
            phi: BigRational::zero(),
        }
    }
    fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.phi.is_zero()
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::from_int(1)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.is_rational() && other.is_rational() {
            return self.rat.cmp(&other.rat);
        }
        (self - other).signum()
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::from_rational(r)
    }
}

impl From<BigInt> for Scalar {
    fn from(n: BigInt) -> Self {
        Scalar::from_int(n)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        Scalar {
            rat: &self.rat + &o.rat,
            phi: &self.phi + &o.phi,
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        Scalar {
            rat: &self.rat - &o.rat,
            phi: &self.phi - &o.phi,
        }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        if self.is_rational() && o.is_rational() {
            return Scalar::from_rational(&self.rat * &o.rat);
        }
        // (p + qφ)(r + sφ) = pr + qs + (ps + qr + qs)φ
        let qs = &self.phi * &o.phi;
        Scalar {
            rat: &self.rat * &o.rat + &qs,
            phi: &self.rat * &o.phi + &self.phi * &o.rat + qs,
        }
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, o: &Scalar) -> Scalar {
        if o.is_rational() {
            assert!(!o.rat.is_zero(), "division by zero in Q(phi)");
            return Scalar {
                rat: &self.rat / &o.rat,
                phi: &self.phi / &o.rat,
            };
        }
        self * &o.recip()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            rat: -self.rat,
            phi: -self.phi,
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            rat: -&self.rat,
            phi: -&self.phi,
        }
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        self.rat += &o.rat;
        self.phi += &o.phi;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, o: &Scalar) {
        self.rat -= &o.rat;
        self.phi -= &o.phi;
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

/// Canonical rational printing: `p` for integers, `p/q` otherwise.
pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    /// `p/q`, `r/s phi`, or `p/q+r/s phi`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phi.is_zero() {
            return write!(f, "{}", fmt_rational(&self.rat));
        }
        let phi_term = if self.phi.is_one() {
            "phi".to_string()
        } else {
            format!("{}phi", fmt_rational(&self.phi))
        };
        if self.rat.is_zero() {
            write!(f, "{phi_term}")
        } else if self.phi.is_negative() {
            let mag = if (-&self.phi).is_one() {
                "phi".to_string()
            } else {
                format!("{}phi", fmt_rational(&-&self.phi))
            };
            write!(f, "{}-{}", fmt_rational(&self.rat), mag)
        } else {
            write!(f, "{}+{}", fmt_rational(&self.rat), phi_term)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, r: i64) -> Scalar {
        Scalar::new(
            BigRational::from_integer(p.into()),
            BigRational::from_integer(r.into()),
        )
    }

    #[test]
    fn phi_squared_is_phi_plus_one() {
        let phi = Scalar::phi();
        assert_eq!(&phi * &phi, q(1, 1));
    }

    #[test]
    fn reciprocal_of_phi() {
        // 1/φ = φ − 1
        assert_eq!(Scalar::phi().recip(), q(-1, 1));
        let x = q(3, -7);
        assert_eq!(&x * &x.recip(), Scalar::one());
    }

    #[test]
    fn sign_and_order() {
        // φ − 1.618 > 0, φ − 1.6181 < 0
        assert!(Scalar::phi() > Scalar::ratio(1618, 1000));
        assert!(Scalar::phi() < Scalar::ratio(16181, 10000));
        // 2φ − 1 = √5 > 0, while 1 − φ < 0
        assert!(q(-1, 2).is_positive());
        assert!(q(1, -1).is_negative());
        assert_eq!(q(0, 0).signum(), Ordering::Equal);
    }

    #[test]
    fn floor_is_exact_near_integers() {
        // φ^20 = F19 + F20 φ = 4181 + 6765φ ≈ 15126.99993
        let x = q(4181, 6765);
        assert_eq!(x.floor(), BigInt::from(15126));
        assert_eq!((-x).floor(), BigInt::from(-15127));
        assert_eq!(Scalar::ratio(-7, 2).floor(), BigInt::from(-4));
    }

    #[test]
    fn float_readout_avoids_cancellation() {
        // φ^-30 = conj(φ^30) = F31 − F30 φ... computed as F29 ... use ψ^30 = (1−φ)^30
        let psi = q(1, -1);
        let mut x = Scalar::one();
        for _ in 0..30 {
            x = &x * &psi;
        }
        let expected = ((1.0 - 5f64.sqrt()) / 2.0).powi(30);
        assert!((x.to_f64() - expected).abs() < 1e-15);
    }

    #[test]
    fn display_forms() {
        assert_eq!(Scalar::ratio(3, 6).to_string(), "1/2");
        assert_eq!(q(0, 1).to_string(), "phi");
        assert_eq!(q(2, 3).to_string(), "2+3phi");
        assert_eq!(q(2, -1).to_string(), "2-phi");
    }
}
