//! Exact scalars: rationals with a machine-word fast path, and Gaussian
//! rationals `re + im·i` built on top of them.

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An exact rational number.
///
/// Small values stay in a reduced `i64` pair; anything that overflows is
/// promoted to a [`BigRational`]. The representation is canonical: a value
/// that fits the small form is never stored big.
#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Clone)]
enum Repr {
    Small(i64, i64),
    Big(BigRational),
}

impl Rational {
    pub const ZERO: Rational = Rational(Repr::Small(0, 1));
    pub const ONE: Rational = Rational(Repr::Small(1, 1));

    pub fn from_int(n: i64) -> Self {
        Rational(Repr::Small(n, 1))
    }

    /// `num/den`, panicking on a zero denominator.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    fn from_i128(mut n: i128, mut d: i128) -> Self {
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = n.gcd(&d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        if n == 0 {
            return Self::ZERO;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(BigRational::new_raw(BigInt::from(n), BigInt::from(d)))),
        }
    }

    fn from_big(r: BigRational) -> Self {
        if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
            return Rational(Repr::Small(n, d));
        }
        Rational(Repr::Big(r))
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn numer_denom(&self) -> (BigInt, BigInt) {
        match &self.0 {
            Repr::Small(n, d) => (BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (b.numer().clone(), b.denom().clone()),
        }
    }

    pub fn recip(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => {
                assert!(*n != 0, "division by zero");
                Self::from_i128(*d as i128, *n as i128)
            }
            Repr::Big(b) => Self::from_big(b.recip()),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}
impl Eq for Rational {}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => ((*a as i128) * (*d as i128)).cmp(&((*c as i128) * (*b as i128))),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl core::hash::Hash for Rational {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        let (n, d) = self.numer_denom();
        n.hash(state);
        d.hash(state);
    }
}

impl<'a> Add<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                if b == d {
                    Rational::from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                    Rational::from_i128(a * d + c * b, b * d)
                }
            }
            _ => Rational::from_big(self.to_big() + rhs.to_big()),
        }
    }
}

impl<'a> Sub<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        self + &(-rhs.clone())
    }
}

impl<'a> Mul<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                Rational::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Rational::from_big(self.to_big() * rhs.to_big()),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match self.0 {
            Repr::Small(n, d) => match n.checked_neg() {
                Some(m) => Rational(Repr::Small(m, d)),
                None => Rational::from_i128(-(n as i128), d as i128),
            },
            Repr::Big(b) => Rational::from_big(-b),
        }
    }
}

macro_rules! forward_owned {
    ($ty:ty, $tr:ident, $m:ident) => {
        impl $tr for $ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a $ty> for $ty {
            type Output = $ty;
            fn $m(self, rhs: &'a $ty) -> $ty {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Rational, Add, add);
forward_owned!(Rational, Sub, sub);
forward_owned!(Rational, Mul, mul);

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        self * &rhs.recip()
    }
}
forward_owned!(Rational, Div, div);

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{}", n),
            Repr::Small(n, d) => write!(f, "{}/{}", n, d),
            Repr::Big(b) if b.denom().is_one() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Error returned when a scalar literal cannot be parsed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseScalarError(pub String);

impl fmt::Display for ParseScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scalar literal `{}`", self.0)
    }
}

impl FromStr for Rational {
    type Err = ParseScalarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseScalarError(s.to_string());
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n = BigInt::from_str(n).map_err(|_| err())?;
        let d = BigInt::from_str(d).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(Rational::from_big(BigRational::new(n, d)))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

/// A Gaussian rational `re + im·i`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GScalar {
    pub re: Rational,
    pub im: Rational,
}

impl GScalar {
    pub const ZERO: GScalar = GScalar { re: Rational::ZERO, im: Rational::ZERO };
    pub const ONE: GScalar = GScalar { re: Rational::ONE, im: Rational::ZERO };

    pub fn new(re: Rational, im: Rational) -> Self {
        GScalar { re, im }
    }

    pub fn real(re: Rational) -> Self {
        GScalar { re, im: Rational::ZERO }
    }

    pub fn int(n: i64) -> Self {
        GScalar::real(Rational::from_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        GScalar::real(Rational::new(n, d))
    }

    pub fn i() -> Self {
        GScalar { re: Rational::ZERO, im: Rational::ONE }
    }

    pub fn zero() -> Self {
        GScalar::ZERO
    }

    pub fn one() -> Self {
        GScalar::ONE
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GScalar { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `|z|²`, always real.
    pub fn norm_sqr(&self) -> Rational {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        assert!(!n.is_zero(), "division by zero");
        let r = n.recip();
        GScalar { re: &self.re * &r, im: -(&self.im * &r) }
    }

    /// True for the fourth roots of unity `1, -1, i, -i`.
    pub fn is_fourth_root_of_unity(&self) -> bool {
        let one = Rational::ONE;
        let m_one = -Rational::ONE;
        (self.im.is_zero() && (self.re == one || self.re == m_one))
            || (self.re.is_zero() && (self.im == one || self.im == m_one))
    }
}

impl From<Rational> for GScalar {
    fn from(r: Rational) -> Self {
        GScalar::real(r)
    }
}

impl From<i64> for GScalar {
    fn from(n: i64) -> Self {
        GScalar::int(n)
    }
}

impl<'a> Add<&'a GScalar> for &'a GScalar {
    type Output = GScalar;
    fn add(self, rhs: &GScalar) -> GScalar {
        GScalar { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl<'a> Sub<&'a GScalar> for &'a GScalar {
    type Output = GScalar;
    fn sub(self, rhs: &GScalar) -> GScalar {
        GScalar { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl<'a> Mul<&'a GScalar> for &'a GScalar {
    type Output = GScalar;
    fn mul(self, rhs: &GScalar) -> GScalar {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GScalar::real(&self.re * &rhs.re);
        }
        GScalar { re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im), im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re) }
    }
}

impl<'a> Div<&'a GScalar> for &'a GScalar {
    type Output = GScalar;
    fn div(self, rhs: &GScalar) -> GScalar {
        if rhs.im.is_zero() {
            let r = rhs.re.recip();
            return GScalar { re: &self.re * &r, im: &self.im * &r };
        }
        self * &rhs.inv()
    }
}

forward_owned!(GScalar, Add, add);
forward_owned!(GScalar, Sub, sub);
forward_owned!(GScalar, Mul, mul);
forward_owned!(GScalar, Div, div);

impl Neg for GScalar {
    type Output = GScalar;
    fn neg(self) -> GScalar {
        GScalar { re: -self.re, im: -self.im }
    }
}

impl Neg for &GScalar {
    type Output = GScalar;
    fn neg(self) -> GScalar {
        -self.clone()
    }
}

impl AddAssign<&GScalar> for GScalar {
    fn add_assign(&mut self, rhs: &GScalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&GScalar> for GScalar {
    fn sub_assign(&mut self, rhs: &GScalar) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&GScalar> for GScalar {
    fn mul_assign(&mut self, rhs: &GScalar) {
        *self = &*self * rhs;
    }
}

impl fmt::Display for GScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn imag(f: &mut fmt::Formatter<'_>, im: &Rational, lead: bool) -> fmt::Result {
            let neg = im.is_negative();
            let mag = im.abs();
            let sign = match (neg, lead) {
                (true, _) => "-",
                (false, true) => "",
                (false, false) => "+",
            };
            if mag.is_one() {
                write!(f, "{}i", sign)
            } else {
                write!(f, "{}{}i", sign, mag)
            }
        }
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => imag(f, &self.im, true),
            (false, false) => {
                write!(f, "{}", self.re)?;
                imag(f, &self.im, false)
            }
        }
    }
}

impl fmt::Debug for GScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for GScalar {
    type Err = ParseScalarError;

    /// Accepts `p/q`, `p/qi`, `i`, `-i`, and `a+bi` / `a-bi` forms.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseScalarError(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(err());
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(GScalar::real(t.parse().map_err(|_| err())?));
        };
        // split off the imaginary coefficient at the last sign not at position 0
        let split = body.char_indices().filter(|&(k, c)| k > 0 && (c == '+' || c == '-')).map(|(k, _)| k).next_back();
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im = match im {
            "" | "+" => Rational::ONE,
            "-" => -Rational::ONE,
            other => other.trim_start_matches('+').parse().map_err(|_| err())?,
        };
        let re = if re.is_empty() { Rational::ZERO } else { re.parse().map_err(|_| err())? };
        Ok(GScalar { re, im })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    #[test]
    fn small_overflow_promotes_and_demotes() {
        let big = Rational::from_int(i64::MAX);
        let sq = &big * &big;
        assert!(matches!(sq.0, Repr::Big(_)));
        let back = &sq / &big;
        assert_eq!(back, big);
        assert!(matches!(back.0, Repr::Small(..)));
    }

    #[test]
    fn field_axioms_on_samples() {
        let a: GScalar = "1/2+3i".parse().unwrap();
        let b: GScalar = "-2/3-i".parse().unwrap();
        assert_eq!(&(&a * &b) / &b, a);
        assert_eq!(&(&a + &b) - &b, a);
        assert_eq!(a.conj().conj(), a);
        assert_eq!(&a * &a.inv(), GScalar::one());
        assert_eq!(GScalar::i() * GScalar::i(), GScalar::int(-1));
    }

    #[test]
    fn display_round_trips() {
        for s in ["0", "1/2", "-i", "i", "3/4i", "1-i", "-1/2+5/3i"] {
            let x: GScalar = s.parse().unwrap();
            assert_eq!(format!("{}", x), s);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!("1/0".parse::<GScalar>().is_err());
        assert!("abc".parse::<GScalar>().is_err());
        assert!("".parse::<GScalar>().is_err());
    }
}
