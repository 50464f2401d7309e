//! Numeric tower: exact rationals, exact complex rationals, and
//! configurable-precision real/complex floats, plus the cancellation-safe
//! summation used everywhere else.
//!
//! The distribution weights grow like 10^40 while summing to unity, so every
//! weighted sum is a cancellation minefield. The policy is: stay in exact
//! rational arithmetic whenever the inputs allow it, and otherwise work with
//! binary floats carrying `ceil(log10 sum|eta_m|) + GUARD_DIGITS` decimal
//! digits, which leaves at least `GUARD_DIGITS - 10` correct digits in any
//! distribution-weighted sum of unit-bounded terms.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, RoundingMode, Sign as BfSign};
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar. Canonical form (reduced, positive denominator) is
/// maintained by every arithmetic operation.
pub type Rat = BigRational;

/// Exact complex rational scalar.
pub type CRat = Complex<Rat>;

/// Guard digits added on top of the dynamic-range estimate of a weight sum.
pub const GUARD_DIGITS: u32 = 30;

use std::f64::consts::LOG2_10;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Binary working precision derived from a decimal digit count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prec {
    bits: usize,
}

impl Prec {
    pub fn from_digits(digits: u32) -> Self {
        let bits = (digits as f64 * LOG2_10).ceil() as usize + 64;
        Prec { bits }
    }

    pub fn bits(self) -> usize {
        self.bits
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

// ---------------------------------------------------------------------------
// Precision context
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

/// Numeric policy: exact rational arithmetic, or floating arithmetic with a
/// fixed number of decimal digits of working precision.
///
/// Exact mode is the default whenever the problem data are (complex)
/// rationals. Float mode is opt-in; it reruns the same computations in binary
/// floats at the requested precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionCtx {
    mode: Mode,
    digits: u32,
}

impl PrecisionCtx {
    pub const MIN_DIGITS: u32 = 16;

    pub fn exact() -> Self {
        PrecisionCtx {
            mode: Mode::Exact,
            digits: Self::MIN_DIGITS,
        }
    }

    /// Exact mode with a raised floor for transcendental working precision;
    /// rational results are unaffected (they are exact either way).
    pub fn exact_with_floor(digits: u32) -> Self {
        PrecisionCtx {
            mode: Mode::Exact,
            digits: digits.max(Self::MIN_DIGITS),
        }
    }

    pub fn float(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::InvalidParameter(format!(
                "float precision must carry at least {} digits, got {digits}",
                Self::MIN_DIGITS
            )));
        }
        Ok(PrecisionCtx {
            mode: Mode::Float,
            digits,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_exact(&self) -> bool {
        self.mode == Mode::Exact
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Decimal digits actually used for transcendental evaluation against a
    /// stated requirement. Exact mode auto-raises to the requirement; Float
    /// mode refuses to run below it rather than return garbage.
    pub fn working_digits(&self, required: u32) -> Result<u32> {
        match self.mode {
            Mode::Exact => Ok(required.max(self.digits)),
            Mode::Float => {
                if self.digits < required {
                    Err(Error::PrecisionInsufficient {
                        required,
                        got: self.digits,
                    })
                } else {
                    Ok(self.digits)
                }
            }
        }
    }
}

/// Digit policy for a weight set with absolute sum bounded by `abs_sum_bound`:
/// enough digits to absorb the dynamic range, plus the fixed guard.
pub fn digits_for_abs_sum(abs_sum_bound: &Rat) -> u32 {
    let magnitude = if *abs_sum_bound <= Rat::one() {
        0
    } else {
        ceil_log10(abs_sum_bound).max(0)
    };
    magnitude as u32 + GUARD_DIGITS
}

// ---------------------------------------------------------------------------
// Rational helpers
// ---------------------------------------------------------------------------

pub fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn crat_re(re: Rat) -> CRat {
    Complex::new(re, Rat::zero())
}

pub fn crat(re: Rat, im: Rat) -> CRat {
    Complex::new(re, im)
}

/// Non-negative integer power of a rational.
pub fn rat_powu(base: &Rat, n: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..n {
        acc *= base;
    }
    acc
}

/// Non-negative integer power of a complex rational.
pub fn crat_powu(base: &CRat, n: u32) -> CRat {
    let mut acc = crat_re(Rat::one());
    for _ in 0..n {
        acc = &acc * base;
    }
    acc
}

/// |z|^2 as an exact rational.
pub fn crat_norm_sqr(z: &CRat) -> Rat {
    &z.re * &z.re + &z.im * &z.im
}

/// Exact square root of a rational that is a perfect square in Q, if any.
pub fn rat_sqrt_exact(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

/// Smallest k with r <= 10^k, for r > 0.
pub fn ceil_log10(r: &Rat) -> i64 {
    assert!(r.is_positive(), "ceil_log10 requires a positive argument");
    let est = (r.numer().bits() as i64 - r.denom().bits() as i64) as f64 / LOG2_10;
    let mut k = est.floor() as i64 - 2;
    while !rat_le_pow10(r, k) {
        k += 1;
    }
    k
}

/// Largest e with 10^e <= r, for r > 0.
pub fn floor_log10(r: &Rat) -> i64 {
    let k = ceil_log10(r);
    if pow10(k) == *r {
        k
    } else {
        k - 1
    }
}

fn pow10(k: i64) -> Rat {
    let p = BigInt::from(10u8).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        Rat::from_integer(p)
    } else {
        Rat::new(BigInt::one(), p)
    }
}

fn rat_le_pow10(r: &Rat, k: i64) -> bool {
    // r <= 10^k  <=>  num * 10^{-k} <= den (k < 0) or num <= den * 10^k
    let p = BigInt::from(10u8).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        r.numer() <= &(r.denom() * p)
    } else {
        &(r.numer() * p) <= r.denom()
    }
}

// ---------------------------------------------------------------------------
// Decimal serialization
// ---------------------------------------------------------------------------

/// Render an exact rational as a decimal string with `sig` significant
/// digits, round-half-even, in the form `-d.ddd...e<exp>`. Deterministic:
/// trailing zeros are kept so equal precision means equal byte length.
pub fn dec_string(r: &Rat, sig: u32) -> String {
    assert!(sig >= 1);
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    let mut e = floor_log10(&a);
    // scaled in [10^{sig-1}, 10^{sig})
    let scaled = &a * pow10(sig as i64 - 1 - e);
    let mut n = round_half_even(&scaled);
    let top = BigInt::from(10u8).pow(sig);
    if n == top {
        n = BigInt::from(10u8).pow(sig - 1);
        e += 1;
    }
    let digits = n.to_string();
    debug_assert_eq!(digits.len(), sig as usize);
    let mut out = String::with_capacity(sig as usize + 8);
    if neg {
        out.push('-');
    }
    out.push_str(&digits[..1]);
    if sig > 1 {
        out.push('.');
        out.push_str(&digits[1..]);
    }
    out.push('e');
    out.push_str(&e.to_string());
    out
}

/// Parse a number written as a decimal (`-15.5`, `2.5e-3`, `120`) or a
/// fraction (`31/2`) into the exact rational it denotes.
pub fn rat_from_str(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse number '{s}'"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = num.trim().parse::<BigInt>().map_err(|_| bad())?;
        let d = den.trim().parse::<BigInt>().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::InvalidParameter(format!("zero denominator in '{s}'")));
        }
        return Ok(Rat::new(n, d));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if frac_part.contains(['+', '-']) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "+" || digits == "-" {
        return Err(bad());
    }
    let n = digits.parse::<BigInt>().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i64;
    Ok(Rat::from_integer(n) * pow10(scale))
}

fn round_half_even(r: &Rat) -> BigInt {
    let fl = r.floor().to_integer();
    let frac = r - Rat::from_integer(fl.clone());
    let half = rat(1, 2);
    let round_up = frac > half || (frac == half && !(&fl % 2i32).is_zero());
    if round_up {
        fl + 1
    } else {
        fl
    }
}

// ---------------------------------------------------------------------------
// BigFloat bridging
// ---------------------------------------------------------------------------

/// Exact conversion of a big integer into a float (precision grows to fit).
pub fn bf_from_bigint(n: &BigInt) -> BigFloat {
    let (sign, digits) = n.to_u64_digits();
    if digits.is_empty() {
        return BigFloat::from_i8(0, 64);
    }
    let p = digits.len() * 64 + 64;
    let shift = BigFloat::from_u8(2, p).powi(64, p, RM);
    let mut acc = BigFloat::from_i8(0, p);
    for w in digits.iter().rev() {
        acc = acc.mul(&shift, p, RM).add(&BigFloat::from_u64(*w, p), p, RM);
    }
    if sign == num_bigint::Sign::Minus {
        acc = acc.neg();
    }
    acc
}

/// Rational to float with a single rounding at precision `p`.
pub fn bf_from_rat(r: &Rat, p: Prec) -> BigFloat {
    let num = bf_from_bigint(r.numer());
    let den = bf_from_bigint(r.denom());
    num.div(&den, p.bits(), RM)
}

/// Exact value of a finite float as a rational.
pub fn bf_to_rat(x: &BigFloat) -> Option<Rat> {
    if x.is_inf() || x.is_nan() {
        return None;
    }
    if x.is_zero() {
        return Some(Rat::zero());
    }
    let (words, _len, sign, exp, _inexact) = x.as_raw_parts()?;
    let mut m = BigInt::zero();
    for w in words.iter().rev() {
        m = (m << 64) + BigInt::from(*w);
    }
    if sign == BfSign::Neg {
        m = -m;
    }
    let shift = exp as i64 - (words.len() * 64) as i64;
    Some(if shift >= 0 {
        Rat::from_integer(m << shift as usize)
    } else {
        Rat::new(m, BigInt::one() << (-shift) as usize)
    })
}

/// Decimal rendering of a finite float (its exact rational value).
pub fn dec_string_bf(x: &BigFloat, sig: u32) -> String {
    match bf_to_rat(x) {
        Some(r) => dec_string(&r, sig),
        None => "nan".to_string(),
    }
}

pub fn bf_f64(x: &BigFloat) -> f64 {
    // astro-float rounds on conversion; saturates rather than trapping
    bf_to_rat(x).map(|r| r.to_f64().unwrap_or(f64::NAN)).unwrap_or(f64::NAN)
}

pub fn bf_exp(x: &BigFloat, p: Prec) -> BigFloat {
    with_consts(|cc| x.exp(p.bits(), RM, cc))
}

pub fn bf_sin_cos(x: &BigFloat, p: Prec) -> (BigFloat, BigFloat) {
    with_consts(|cc| (x.sin(p.bits(), RM, cc), x.cos(p.bits(), RM, cc)))
}

pub fn bf_sqrt(x: &BigFloat, p: Prec) -> BigFloat {
    x.sqrt(p.bits(), RM)
}

pub fn bf_pi(p: Prec) -> BigFloat {
    with_consts(|cc| cc.pi(p.bits(), RM))
}

pub fn bf_add(a: &BigFloat, b: &BigFloat, p: Prec) -> BigFloat {
    a.add(b, p.bits(), RM)
}

pub fn bf_sub(a: &BigFloat, b: &BigFloat, p: Prec) -> BigFloat {
    a.sub(b, p.bits(), RM)
}

pub fn bf_mul(a: &BigFloat, b: &BigFloat, p: Prec) -> BigFloat {
    a.mul(b, p.bits(), RM)
}

pub fn bf_div(a: &BigFloat, b: &BigFloat, p: Prec) -> BigFloat {
    a.div(b, p.bits(), RM)
}

/// Exponent such that |x| < 2^e, or None for zero.
fn bf_exponent(x: &BigFloat) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    x.as_raw_parts().map(|(_, _, _, e, _)| e as i64)
}

// ---------------------------------------------------------------------------
// Complex floats
// ---------------------------------------------------------------------------

/// Complex number over arbitrary-precision binary floats. Operations carry an
/// explicit working precision; nothing here hides a rounding decision.
#[derive(Clone, Debug)]
pub struct BigComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl BigComplex {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        BigComplex { re, im }
    }

    pub fn zero() -> Self {
        BigComplex {
            re: BigFloat::from_i8(0, 64),
            im: BigFloat::from_i8(0, 64),
        }
    }

    pub fn one(p: Prec) -> Self {
        BigComplex {
            re: BigFloat::from_i8(1, p.bits()),
            im: BigFloat::from_i8(0, 64),
        }
    }

    pub fn from_f64s(re: f64, im: f64, p: Prec) -> Self {
        BigComplex {
            re: BigFloat::from_f64(re, p.bits()),
            im: BigFloat::from_f64(im, p.bits()),
        }
    }

    pub fn from_crat(z: &CRat, p: Prec) -> Self {
        BigComplex {
            re: bf_from_rat(&z.re, p),
            im: bf_from_rat(&z.im, p),
        }
    }

    pub fn is_finite(&self) -> bool {
        !(self.re.is_inf() || self.re.is_nan() || self.im.is_inf() || self.im.is_nan())
    }

    pub fn add(&self, o: &Self, p: Prec) -> Self {
        BigComplex {
            re: bf_add(&self.re, &o.re, p),
            im: bf_add(&self.im, &o.im, p),
        }
    }

    pub fn sub(&self, o: &Self, p: Prec) -> Self {
        BigComplex {
            re: bf_sub(&self.re, &o.re, p),
            im: bf_sub(&self.im, &o.im, p),
        }
    }

    pub fn mul(&self, o: &Self, p: Prec) -> Self {
        let b = p.bits();
        BigComplex {
            re: self.re.mul(&o.re, b, RM).sub(&self.im.mul(&o.im, b, RM), b, RM),
            im: self.re.mul(&o.im, b, RM).add(&self.im.mul(&o.re, b, RM), b, RM),
        }
    }

    pub fn div(&self, o: &Self, p: Prec) -> Self {
        let d = o.norm_sqr(p);
        let num = self.mul(&o.conj(), p);
        BigComplex {
            re: bf_div(&num.re, &d, p),
            im: bf_div(&num.im, &d, p),
        }
    }

    pub fn scale(&self, s: &BigFloat, p: Prec) -> Self {
        BigComplex {
            re: bf_mul(&self.re, s, p),
            im: bf_mul(&self.im, s, p),
        }
    }

    pub fn neg(&self) -> Self {
        BigComplex {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn conj(&self) -> Self {
        BigComplex {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn norm_sqr(&self, p: Prec) -> BigFloat {
        let b = p.bits();
        self.re.mul(&self.re, b, RM).add(&self.im.mul(&self.im, b, RM), b, RM)
    }

    pub fn abs(&self, p: Prec) -> BigFloat {
        bf_sqrt(&self.norm_sqr(p), p)
    }

    /// exp(z) = e^re (cos im, sin im)
    pub fn exp(&self, p: Prec) -> Self {
        let r = bf_exp(&self.re, p);
        let (s, c) = bf_sin_cos(&self.im, p);
        BigComplex {
            re: bf_mul(&r, &c, p),
            im: bf_mul(&r, &s, p),
        }
    }

    /// (cos theta, sin theta) for a real angle.
    pub fn from_angle(theta: &BigFloat, p: Prec) -> Self {
        let (s, c) = bf_sin_cos(theta, p);
        BigComplex { re: c, im: s }
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(bf_f64(&self.re), bf_f64(&self.im))
    }

    pub fn dec_strings(&self, sig: u32) -> (String, String) {
        (dec_string_bf(&self.re, sig), dec_string_bf(&self.im, sig))
    }
}

// ---------------------------------------------------------------------------
// Value types spanning both modes
// ---------------------------------------------------------------------------

/// A complex result that is either exact or floating at a known precision.
#[derive(Clone, Debug)]
pub enum CxVal {
    Exact(CRat),
    Float(BigComplex),
}

impl CxVal {
    pub fn is_exact(&self) -> bool {
        matches!(self, CxVal::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&CRat> {
        match self {
            CxVal::Exact(z) => Some(z),
            CxVal::Float(_) => None,
        }
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        match self {
            CxVal::Exact(z) => num_complex::Complex64::new(
                z.re.to_f64().unwrap_or(f64::NAN),
                z.im.to_f64().unwrap_or(f64::NAN),
            ),
            CxVal::Float(z) => z.to_c64(),
        }
    }

    pub fn dec_strings(&self, sig: u32) -> (String, String) {
        match self {
            CxVal::Exact(z) => (dec_string(&z.re, sig), dec_string(&z.im, sig)),
            CxVal::Float(z) => z.dec_strings(sig),
        }
    }

    pub fn to_big(&self, p: Prec) -> BigComplex {
        match self {
            CxVal::Exact(z) => BigComplex::from_crat(z, p),
            CxVal::Float(z) => z.clone(),
        }
    }
}

/// A real result that is either exact or floating at a known precision.
#[derive(Clone, Debug)]
pub enum ReVal {
    Exact(Rat),
    Float(BigFloat),
}

impl ReVal {
    pub fn is_exact(&self) -> bool {
        matches!(self, ReVal::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            ReVal::Exact(r) => Some(r),
            ReVal::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ReVal::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            ReVal::Float(x) => bf_f64(x),
        }
    }

    pub fn dec_string(&self, sig: u32) -> String {
        match self {
            ReVal::Exact(r) => dec_string(r, sig),
            ReVal::Float(x) => dec_string_bf(x, sig),
        }
    }

    pub fn to_big(&self, p: Prec) -> BigFloat {
        match self {
            ReVal::Exact(r) => bf_from_rat(r, p),
            ReVal::Float(x) => x.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// Cancellation-safe summation
// ---------------------------------------------------------------------------

/// Exact sum; the error bound of exact summation is zero.
pub fn sum_exact(terms: &[CRat]) -> CRat {
    let mut acc = crat_re(Rat::zero());
    for t in terms {
        acc = &acc + t;
    }
    acc
}

/// Neumaier-compensated sum of complex floats at `digits` decimal digits of
/// working precision. Returns the sum and a rigorous (not tight) bound on the
/// accumulated rounding error: terms x ulp(max partial magnitude).
///
/// Exponent overflow is detected and reported, never returned as a silent
/// infinity.
pub fn sum_compensated(terms: &[BigComplex], digits: u32) -> Result<(BigComplex, BigFloat)> {
    if terms.is_empty() {
        return Err(Error::InvalidParameter("empty term list in summation".into()));
    }
    let p = Prec::from_digits(digits);
    let b = p.bits();
    let mut s_re = BigFloat::from_i8(0, b);
    let mut s_im = BigFloat::from_i8(0, b);
    let mut c_re = BigFloat::from_i8(0, b);
    let mut c_im = BigFloat::from_i8(0, b);
    let mut max_exp: Option<i64> = None;
    for t in terms {
        if !t.is_finite() {
            return Err(Error::ExponentOverflow { op: "sum term" });
        }
        neumaier_step(&mut s_re, &mut c_re, &t.re, b);
        neumaier_step(&mut s_im, &mut c_im, &t.im, b);
        if s_re.is_inf() || s_im.is_inf() {
            return Err(Error::ExponentOverflow { op: "compensated sum" });
        }
        for e in [bf_exponent(&s_re), bf_exponent(&s_im), bf_exponent(&t.re), bf_exponent(&t.im)]
            .into_iter()
            .flatten()
        {
            max_exp = Some(max_exp.map_or(e, |m: i64| m.max(e)));
        }
    }
    let value = BigComplex {
        re: bf_add(&s_re, &c_re, p),
        im: bf_add(&s_im, &c_im, p),
    };
    let bound = match max_exp {
        None => BigFloat::from_i8(0, 64),
        Some(e) => {
            // ulp at magnitude 2^e and mantissa of b bits is 2^{e - b + 1}
            let exp2 = e - b as i64 + 1;
            let mut u = BigFloat::from_u8(1, 64);
            u.set_exponent(u.exponent().unwrap_or(1) + exp2 as astro_float::Exponent);
            bf_mul(&BigFloat::from_u64(terms.len() as u64, 64), &u, p)
        }
    };
    Ok((value, bound))
}

fn neumaier_step(s: &mut BigFloat, c: &mut BigFloat, x: &BigFloat, b: usize) {
    let t = s.add(x, b, RM);
    let corr = if abs_ge(s, x) {
        s.sub(&t, b, RM).add(x, b, RM)
    } else {
        x.sub(&t, b, RM).add(s, b, RM)
    };
    *c = c.add(&corr, b, RM);
    *s = t;
}

fn abs_ge(a: &BigFloat, b: &BigFloat) -> bool {
    a.abs().cmp(&b.abs()).map(|o| o >= 0).unwrap_or(true)
}
