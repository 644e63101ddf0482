//! Arbitrary-precision reals with a per-run decimal precision context.
//!
//! `BigReal` wraps [`astro_float::BigFloat`]. Every value carries its own bit
//! precision; binary operations widen to the larger operand. `Ctx` converts a
//! requested count of significant decimal digits into bits (plus guard bits)
//! and provides constants and parsing at that precision.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

use crate::error::{GeonetError, Result};

const RM: RoundingMode = RoundingMode::ToEven;

/// Guard bits added on top of the decimal-digit request.
const GUARD_BITS: usize = 64;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Precision context: significant decimal digits requested for a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ctx {
    digits: u32,
    prec: usize,
}

impl Ctx {
    pub fn new(digits: u32) -> Ctx {
        let digits = digits.clamp(2, 20_000);
        // ceil(digits * log2(10)) + guard
        let prec = (digits as usize * 3322).div_ceil(1000) + GUARD_BITS;
        Ctx { digits, prec }
    }

    pub fn digits(self) -> u32 {
        self.digits
    }

    pub fn prec_bits(self) -> usize {
        self.prec
    }

    /// A context with `extra` more decimal digits of working precision.
    pub fn plus_digits(self, extra: u32) -> Ctx {
        Ctx::new(self.digits + extra)
    }

    pub fn zero(self) -> BigReal {
        BigReal(BigFloat::new(self.prec))
    }

    pub fn one(self) -> BigReal {
        self.int(1)
    }

    pub fn int(self, i: i64) -> BigReal {
        BigReal(BigFloat::from_i64(i, self.prec))
    }

    pub fn ratio(self, n: i64, d: i64) -> BigReal {
        let num = BigFloat::from_i64(n, self.prec);
        let den = BigFloat::from_i64(d, self.prec);
        BigReal(num.div(&den, self.prec, RM))
    }

    pub fn from_f64(self, f: f64) -> BigReal {
        BigReal(BigFloat::from_f64(f, self.prec))
    }

    pub fn pi(self) -> BigReal {
        BigReal(with_consts(|cc| cc.pi(self.prec, RM)))
    }

    pub fn two_pi(self) -> BigReal {
        &self.int(2) * &self.pi()
    }

    /// `pi * n / d`.
    pub fn pi_frac(self, n: i64, d: i64) -> BigReal {
        &(&self.pi() * &self.int(n)) / &self.int(d)
    }

    /// `10^k`, exact for the magnitudes used as tolerances.
    pub fn pow10(self, k: i32) -> BigReal {
        let ten = BigFloat::from_i64(10, self.prec);
        let p = ten.powi(k.unsigned_abs() as usize, self.prec, RM);
        if k < 0 {
            BigReal(p.reciprocal(self.prec, RM))
        } else {
            BigReal(p)
        }
    }

    /// Default balance tolerance: 1e-(digits/2), relative to unit scale.
    pub fn default_tolerance(self) -> BigReal {
        self.pow10(-((self.digits / 2) as i32))
    }

    /// Collinearity / dispatch-guard tolerance: 1e-(digits/3).
    pub fn guard_tolerance(self) -> BigReal {
        self.pow10(-((self.digits / 3) as i32))
    }

    /// Parse a decimal string (plain or scientific notation).
    pub fn parse(self, s: &str) -> Result<BigReal> {
        let t = s.trim();
        if t.is_empty() {
            return Err(GeonetError::NumberParse(s.to_string()));
        }
        let v = with_consts(|cc| BigFloat::parse(t, Radix::Dec, self.prec, RM, cc));
        if v.is_nan() {
            return Err(GeonetError::NumberParse(s.to_string()));
        }
        Ok(BigReal(v))
    }

    /// Parse "p/q" or a plain decimal (used for `--alpha0 88/21`).
    pub fn parse_ratio(self, s: &str) -> Result<BigReal> {
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n
                    .trim()
                    .parse()
                    .map_err(|_| GeonetError::NumberParse(s.to_string()))?;
                let d: i64 = d
                    .trim()
                    .parse()
                    .map_err(|_| GeonetError::NumberParse(s.to_string()))?;
                if d == 0 {
                    return Err(GeonetError::NumberParse(s.to_string()));
                }
                Ok(self.ratio(n, d))
            }
            None => self.parse(s),
        }
    }
}

/// Arbitrary-precision real number.
#[derive(Clone)]
pub struct BigReal(BigFloat);

impl BigReal {
    fn prec(&self) -> usize {
        match self.0.precision() {
            // exact zeros report precision 0; ops reject p = 0
            Some(p) if p > 0 => p,
            _ => GUARD_BITS,
        }
    }

    fn join(&self, other: &BigReal) -> usize {
        self.prec().max(other.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive() && !self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn abs(&self) -> BigReal {
        BigReal(self.0.abs())
    }

    pub fn neg(&self) -> BigReal {
        BigReal(BigFloat::neg(&self.0))
    }

    pub fn recip(&self) -> BigReal {
        BigReal(self.0.reciprocal(self.prec(), RM))
    }

    pub fn sqrt(&self) -> BigReal {
        BigReal(self.0.sqrt(self.prec(), RM))
    }

    pub fn powi(&self, n: usize) -> BigReal {
        BigReal(self.0.powi(n, self.prec(), RM))
    }

    pub fn sin(&self) -> BigReal {
        BigReal(with_consts(|cc| self.0.sin(self.prec(), RM, cc)))
    }

    pub fn cos(&self) -> BigReal {
        BigReal(with_consts(|cc| self.0.cos(self.prec(), RM, cc)))
    }

    pub fn tan(&self) -> BigReal {
        BigReal(with_consts(|cc| self.0.tan(self.prec(), RM, cc)))
    }

    pub fn asin(&self) -> BigReal {
        BigReal(with_consts(|cc| self.0.asin(self.prec(), RM, cc)))
    }

    pub fn acos(&self) -> BigReal {
        BigReal(with_consts(|cc| self.0.acos(self.prec(), RM, cc)))
    }

    pub fn atan(&self) -> BigReal {
        BigReal(with_consts(|cc| self.0.atan(self.prec(), RM, cc)))
    }

    pub fn ln(&self) -> BigReal {
        BigReal(with_consts(|cc| self.0.ln(self.prec(), RM, cc)))
    }

    pub fn log10(&self) -> BigReal {
        BigReal(with_consts(|cc| self.0.log10(self.prec(), RM, cc)))
    }

    pub fn exp(&self) -> BigReal {
        BigReal(with_consts(|cc| self.0.exp(self.prec(), RM, cc)))
    }

    /// Clamp into `[lo, hi]`; used to keep inverse-trig arguments in domain.
    pub fn clamp(&self, lo: &BigReal, hi: &BigReal) -> BigReal {
        BigReal(self.0.clamp(&lo.0, &hi.0))
    }

    /// Four-quadrant arctangent of `y/x` in `(-pi, pi]`.
    pub fn atan2(y: &BigReal, x: &BigReal) -> BigReal {
        let p = y.join(x);
        let ctx = ctx_for_bits(p);
        let pi = ctx.pi();
        if x.is_zero() && y.is_zero() {
            return ctx.zero();
        }
        if x.is_zero() {
            let half = &pi / &ctx.int(2);
            return if y.is_negative() { half.neg() } else { half };
        }
        let base = (y / x).atan();
        if x.is_positive() {
            base
        } else if y.is_negative() {
            &base - &pi
        } else {
            &base + &pi
        }
    }

    pub fn hypot(x: &BigReal, y: &BigReal) -> BigReal {
        (&(x * x) + &(y * y)).sqrt()
    }

    pub fn min(&self, other: &BigReal) -> BigReal {
        BigReal(self.0.min(&other.0))
    }

    pub fn max(&self, other: &BigReal) -> BigReal {
        BigReal(self.0.max(&other.0))
    }

    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.is_negative() {
            -1
        } else {
            1
        }
    }

    /// Euclidean remainder into `[0, m)`.
    pub fn rem_euclid(&self, m: &BigReal) -> BigReal {
        let r = BigReal(self.0.rem(&m.0));
        if r.is_negative() {
            &r + m
        } else {
            r
        }
    }

    /// Round a copy to `digits` significant decimal digits of precision.
    pub fn with_digits(&self, digits: u32) -> BigReal {
        let ctx = Ctx::new(digits);
        let mut v = self.0.clone();
        v.set_precision(ctx.prec_bits(), RM).expect("set precision");
        BigReal(v)
    }

    /// Nearest `f64` (approximate; used for prefilters and rendering only).
    pub fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        match self.0.as_raw_parts() {
            None => f64::NAN,
            Some((words, _, sign, e, _)) => {
                if words.is_empty() {
                    return 0.0;
                }
                let k = words.len();
                let top = words[k - 1] as f64;
                let next = if k >= 2 { words[k - 2] as f64 } else { 0.0 };
                let m = top / 2f64.powi(64) + next / 2f64.powi(128);
                let v = m * 2f64.powf(e as f64);
                if sign == Sign::Neg {
                    -v
                } else {
                    v
                }
            }
        }
    }

    /// Decimal string at the value's own precision (scientific notation).
    pub fn to_dec_string(&self) -> String {
        with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "nan".to_string())
    }

    /// Decimal string rounded to at most `digits` significant digits.
    pub fn to_dec_string_digits(&self, digits: u32) -> String {
        round_dec_string(&self.to_dec_string(), digits as usize)
    }
}

fn ctx_for_bits(bits: usize) -> Ctx {
    // inverse of the digits->bits map, conservative
    let digits = ((bits.saturating_sub(GUARD_BITS)) * 1000 / 3322).max(2);
    Ctx::new(digits as u32)
}

/// Round a decimal string of the form `[-]d.ddddde[+-]k` (or plain digits)
/// to `digits` significant digits.
fn round_dec_string(s: &str, digits: usize) -> String {
    if digits == 0 {
        return s.to_string();
    }
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (s, 0),
    };
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    let mut ds: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes())
        .filter(|b| b.is_ascii_digit())
        .map(|b| b - b'0')
        .collect();
    // decimal exponent of the first digit
    let mut e10 = exp + int_part.len() as i64 - 1;
    // strip leading zeros, adjusting the exponent
    while ds.len() > 1 && ds[0] == 0 {
        ds.remove(0);
        e10 -= 1;
    }
    if ds.iter().all(|&d| d == 0) {
        return "0".to_string();
    }
    if ds.len() > digits {
        let roundup = ds[digits] >= 5;
        ds.truncate(digits);
        if roundup {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    e10 += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
    }
    while ds.len() > 1 && *ds.last().unwrap() == 0 {
        ds.pop();
    }
    let sign = if neg { "-" } else { "" };
    let digits_str: String = ds.iter().map(|d| (d + b'0') as char).collect();
    if ds.len() == 1 {
        format!("{sign}{digits_str}e{e10:+}")
    } else {
        format!("{sign}{}.{}e{e10:+}", &digits_str[..1], &digits_str[1..])
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dec_string_digits(24))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dec_string())
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|s| s.cmp(&0))
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl std::ops::$trait<&BigReal> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                let p = self.join(rhs);
                BigReal(self.0.$inner(&rhs.0, p, RM))
            }
        }
        impl std::ops::$trait<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                (&self).$method(&rhs)
            }
        }
        impl std::ops::$trait<&BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                (&self).$method(rhs)
            }
        }
        impl std::ops::$trait<BigReal> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                self.$method(&rhs)
            }
        }
    };
}

impl_binop!(Add, add, add);
impl_binop!(Sub, sub, sub);
impl_binop!(Mul, mul, mul);
impl_binop!(Div, div, div);

impl std::ops::Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(BigFloat::neg(&self.0))
    }
}

impl std::ops::Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(BigFloat::neg(&self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_format_round_trip() {
        let ctx = Ctx::new(50);
        let x = ctx.parse("-1.2345678901234567890123456789012345678901e-7").unwrap();
        let s = x.to_dec_string();
        let y = ctx.parse(&s).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn pythagorean_identity() {
        let ctx = Ctx::new(60);
        let t = ctx.ratio(7, 13);
        let r = &(&t.sin() * &t.sin()) + &(&t.cos() * &t.cos());
        let err = (&r - &ctx.one()).abs();
        assert!(err < ctx.pow10(-58), "err = {err}");
    }

    #[test]
    fn atan2_quadrants() {
        let ctx = Ctx::new(40);
        for (y, x) in [(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0), (0.5, 0.0), (-0.5, 0.0)] {
            let a = BigReal::atan2(&ctx.from_f64(y), &ctx.from_f64(x));
            let expect = y.atan2(x);
            assert!(
                (a.to_f64() - expect).abs() < 1e-14,
                "atan2({y},{x}) = {} want {expect}",
                a.to_f64()
            );
        }
    }

    #[test]
    fn to_f64_matches() {
        let ctx = Ctx::new(50);
        for v in [0.0, 1.0, -2.5, 1e-30, 3.7436732684499216, -1.0566e62] {
            let b = ctx.from_f64(v);
            let back = b.to_f64();
            if v == 0.0 {
                assert_eq!(back, 0.0);
            } else {
                assert!(((back - v) / v).abs() < 1e-14, "{v} -> {back}");
            }
        }
    }

    #[test]
    fn dec_string_rounding() {
        let ctx = Ctx::new(50);
        let x = ctx.parse("1.23456789e-3").unwrap();
        assert_eq!(x.to_dec_string_digits(4), "1.235e-3");
        let y = ctx.parse("9.999e5").unwrap();
        assert_eq!(y.to_dec_string_digits(2), "1e+6");
        assert_eq!(ctx.zero().to_dec_string_digits(5), "0");
        let z = ctx.parse("-42").unwrap();
        assert_eq!(z.to_dec_string_digits(6), "-4.2e+1");
    }

    #[test]
    fn tolerance_scales_with_digits() {
        let ctx = Ctx::new(50);
        let tol = ctx.default_tolerance();
        assert!(tol == ctx.pow10(-25));
        assert!(ctx.guard_tolerance() == ctx.pow10(-16));
    }

    #[test]
    fn rem_euclid_wraps_negative() {
        let ctx = Ctx::new(40);
        let m = ctx.two_pi();
        let x = ctx.from_f64(-1.0);
        let r = x.rem_euclid(&m);
        assert!(!r.is_negative() && r < m);
        assert!((r.to_f64() - (std::f64::consts::TAU - 1.0)).abs() < 1e-12);
    }
}
