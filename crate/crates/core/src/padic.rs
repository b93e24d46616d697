//! Fixed absolute-precision arithmetic in the p-adic integers.
//!
//! A [`PAdicInt`] is a residue modulo `p^K` together with the prime `p` and
//! the precision `K`. Every operation is exact modulo `p^K`; mixing two
//! precisions truncates to the smaller one.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PAdicError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("cannot combine a {0}-adic and a {1}-adic integer")]
    PrimeMismatch(u64, u64),
    #[error("{0} is not a unit")]
    NotAUnit(String),
    #[error("square root needs an even valuation, got {0}")]
    OddValuation(u32),
    #[error("unit part is not a quadratic residue mod {0}")]
    NonResidue(u64),
    #[error("square roots in Z_2 are not supported")]
    TwoAdicSqrt,
    #[error("square root of a value that vanishes at working precision")]
    SqrtOfZero,
    #[error("branch hint {hint} does not square to the unit part mod {p}")]
    BadBranchHint { hint: u64, p: u64 },
    #[error("seed is not a root mod p")]
    NotARoot,
    #[error("derivative vanishes mod p at the seed")]
    DerivativeVanishes,
    #[error("Hensel criterion fails: v(f) = {val_f}, v(f') = {val_df}")]
    HenselCriterion { val_f: Valuation, val_df: Valuation },
    #[error("Newton iteration did not converge")]
    NoConvergence,
    #[error("requested precision {needed} exceeds available {available}")]
    InsufficientPrecision { needed: u32, available: u32 },
    #[error("invalid digit string {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, PAdicError>;

/// p-adic valuation of a fixed-precision value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u32),
    /// The residue is zero, so the true valuation is at least the precision.
    AtLeastPrecision,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeastPrecision => None,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Valuation::Finite(0)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::AtLeastPrecision) => Ordering::Less,
            (Valuation::AtLeastPrecision, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::AtLeastPrecision, Valuation::AtLeastPrecision) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeastPrecision => f.write_str(">=K"),
        }
    }
}

/// An exponent `e` standing for the radius (or absolute value) `p^{-e}`.
///
/// Stored as an exact fraction in lowest terms; radii are only ever compared
/// through their exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RadiusExp(BigRational);

impl RadiusExp {
    pub fn new(numer: i64, denom: i64) -> Self {
        RadiusExp(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_ratio(r: BigRational) -> Self {
        RadiusExp(r)
    }

    pub fn integer(e: u32) -> Self {
        RadiusExp(BigRational::from_integer(e.into()))
    }

    pub fn exponent(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// `p^(-a/b)` in plain text.
    pub fn render(&self, p: u64) -> String {
        if self.0.is_integer() {
            format!("{p}^(-{})", self.0.numer())
        } else {
            format!("{p}^(-{}/{})", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Display for RadiusExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Deterministic primality test by trial division; primes here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) fn pow_p(p: u64, k: u32) -> BigUint {
    BigUint::from(p).pow(k)
}

/// Valuation of `x` as an element of `Z/p^cap`.
pub(crate) fn valuation_of(x: &BigUint, p: u64, cap: u32) -> Valuation {
    if x.is_zero() {
        return Valuation::AtLeastPrecision;
    }
    let pb = BigUint::from(p);
    let mut v = 0u32;
    let mut y = x.clone();
    while v < cap {
        let (q, r) = y.div_rem(&pb);
        if !r.is_zero() {
            return Valuation::Finite(v);
        }
        y = q;
        v += 1;
    }
    Valuation::AtLeastPrecision
}

pub(crate) fn reduce_signed(n: &BigInt, modulus: &BigUint) -> BigUint {
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    n.mod_floor(&m)
        .to_biguint()
        .expect("mod_floor with a positive modulus is non-negative")
}

fn mod_pow_u64(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u128;
    let m = p as u128;
    let mut b = (base % p) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

/// Square root of `a` modulo an odd prime `p` (Tonelli-Shanks).
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if mod_pow_u64(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2u64;
    while mod_pow_u64(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mulmod = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let mut m = s;
    let mut c = mod_pow_u64(z, q, p);
    let mut t = mod_pow_u64(a, q, p);
    let mut r = mod_pow_u64(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0u32;
        let mut tt = t;
        while tt != 1 {
            tt = mulmod(tt, tt);
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = mulmod(b, b);
        }
        m = i;
        c = mulmod(b, b);
        t = mulmod(t, c);
        r = mulmod(r, b);
    }
    Some(r)
}

/// Multiplicative order of `a` in `F_p^*`, or `None` when `a ≡ 0`.
pub fn multiplicative_order(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return None;
    }
    let mut x = a;
    let mut n = 1u64;
    while x != 1 {
        x = ((x as u128 * a as u128) % p as u128) as u64;
        n += 1;
    }
    Some(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// A p-adic integer known modulo `p^precision`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PAdicInt {
    p: u64,
    precision: u32,
    residue: BigUint,
}

impl PAdicInt {
    fn check_params(p: u64, precision: u32) -> Result<()> {
        if !is_prime(p) {
            return Err(PAdicError::NotPrime(p));
        }
        if precision == 0 {
            return Err(PAdicError::ZeroPrecision);
        }
        Ok(())
    }

    pub fn from_integer(n: &BigInt, p: u64, precision: u32) -> Result<Self> {
        Self::check_params(p, precision)?;
        let residue = reduce_signed(n, &pow_p(p, precision));
        Ok(PAdicInt {
            p,
            precision,
            residue,
        })
    }

    pub fn from_i64(n: i64, p: u64, precision: u32) -> Result<Self> {
        Self::from_integer(&BigInt::from(n), p, precision)
    }

    pub fn from_residue(residue: BigUint, p: u64, precision: u32) -> Result<Self> {
        Self::check_params(p, precision)?;
        let residue = residue % pow_p(p, precision);
        Ok(PAdicInt {
            p,
            precision,
            residue,
        })
    }

    /// Caller guarantees `p` prime, `precision >= 1` and `residue < p^precision`.
    pub(crate) fn from_parts(p: u64, precision: u32, residue: BigUint) -> Self {
        debug_assert!(precision >= 1);
        debug_assert!(residue < pow_p(p, precision));
        PAdicInt {
            p,
            precision,
            residue,
        }
    }

    pub fn zero(p: u64, precision: u32) -> Result<Self> {
        Self::from_residue(BigUint::zero(), p, precision)
    }

    pub fn one(p: u64, precision: u32) -> Result<Self> {
        Self::from_residue(BigUint::one(), p, precision)
    }

    /// Parses a little-endian base-p digit string `d0.d1d2...`.
    ///
    /// For `p <= 36` digits after the point are single characters `0-9a-z`;
    /// for larger primes every digit is a decimal number and all digits are
    /// separated by `.`. The number of digits is the precision.
    pub fn from_digits(s: &str, p: u64) -> Result<Self> {
        Self::check_params(p, 1)?;
        let bad = || PAdicError::Parse(s.to_string());
        let s = s.trim();
        if s.is_empty() {
            return Err(bad());
        }
        let mut digits: Vec<u64> = Vec::new();
        if p <= 36 {
            let (head, tail) = match s.split_once('.') {
                Some((h, t)) => (h, Some(t)),
                None => (s, None),
            };
            digits.push(parse_digit_token(head, p).ok_or_else(bad)?);
            if let Some(tail) = tail {
                if tail.is_empty() {
                    return Err(bad());
                }
                for ch in tail.chars() {
                    let d = ch.to_digit(36).ok_or_else(bad)? as u64;
                    if d >= p {
                        return Err(bad());
                    }
                    digits.push(d);
                }
            }
        } else {
            for tok in s.split('.') {
                digits.push(parse_digit_token(tok, p).ok_or_else(bad)?);
            }
        }
        let precision = u32::try_from(digits.len()).map_err(|_| bad())?;
        let pb = BigUint::from(p);
        let residue = digits
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * &pb + BigUint::from(d));
        Ok(PAdicInt {
            p,
            precision,
            residue,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn modulus(&self) -> BigUint {
        pow_p(self.p, self.precision)
    }

    /// Base-p digits, least significant first, exactly `precision` of them.
    pub fn digits(&self) -> Vec<u64> {
        let pb = BigUint::from(self.p);
        let mut out = Vec::with_capacity(self.precision as usize);
        let mut x = self.residue.clone();
        for _ in 0..self.precision {
            let (q, r) = x.div_rem(&pb);
            out.push(r.to_u64().expect("digit below p"));
            x = q;
        }
        out
    }

    pub fn to_digit_string(&self) -> String {
        let digits = self.digits();
        if self.p <= 36 {
            let ch = |d: &u64| std::char::from_digit(*d as u32, 36).expect("digit below 36");
            let mut s = ch(&digits[0]).to_string();
            if digits.len() > 1 {
                s.push('.');
                s.extend(digits[1..].iter().map(ch));
            }
            s
        } else {
            digits
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }

    /// Reduction to a lower precision.
    pub fn truncate(&self, precision: u32) -> Result<Self> {
        if precision == 0 {
            return Err(PAdicError::ZeroPrecision);
        }
        if precision > self.precision {
            return Err(PAdicError::InsufficientPrecision {
                needed: precision,
                available: self.precision,
            });
        }
        Ok(PAdicInt {
            p: self.p,
            precision,
            residue: &self.residue % pow_p(self.p, precision),
        })
    }

    /// Canonical residue modulo `p^k` for `k <= precision`.
    pub fn residue_mod(&self, k: u32) -> BigUint {
        &self.residue % pow_p(self.p, k.min(self.precision))
    }

    pub fn residue_mod_p(&self) -> u64 {
        (&self.residue % self.p).to_u64().expect("below p")
    }

    /// Representative in `(-p^K/2, p^K/2]`.
    pub fn to_symmetric(&self) -> BigInt {
        let m = self.modulus();
        let r = BigInt::from(self.residue.clone());
        if &self.residue * 2u32 > m {
            r - BigInt::from(m)
        } else {
            r
        }
    }

    pub fn valuation(&self) -> Valuation {
        valuation_of(&self.residue, self.p, self.precision)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation().is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    fn same_prime(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            Err(PAdicError::PrimeMismatch(self.p, other.p))
        } else {
            Ok(())
        }
    }

    fn combine(&self, other: &Self, f: impl Fn(BigInt, BigInt) -> BigInt) -> Result<Self> {
        self.same_prime(other)?;
        let precision = self.precision.min(other.precision);
        let m = pow_p(self.p, precision);
        let a = BigInt::from(&self.residue % &m);
        let b = BigInt::from(&other.residue % &m);
        Ok(PAdicInt {
            p: self.p,
            precision,
            residue: reduce_signed(&f(a, b), &m),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a * b)
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus();
        let residue = if self.residue.is_zero() {
            BigUint::zero()
        } else {
            m - &self.residue
        };
        PAdicInt {
            p: self.p,
            precision: self.precision,
            residue,
        }
    }

    /// Adds a signed integer constant at this value's precision.
    pub fn add_integer(&self, n: i64) -> Self {
        let m = self.modulus();
        let r = BigInt::from(self.residue.clone()) + n;
        PAdicInt {
            p: self.p,
            precision: self.precision,
            residue: reduce_signed(&r, &m),
        }
    }

    pub fn mul_integer(&self, n: i64) -> Self {
        let m = self.modulus();
        let r = BigInt::from(self.residue.clone()) * n;
        PAdicInt {
            p: self.p,
            precision: self.precision,
            residue: reduce_signed(&r, &m),
        }
    }

    pub fn pow(&self, exp: &BigUint) -> Self {
        PAdicInt {
            p: self.p,
            precision: self.precision,
            residue: self.residue.modpow(exp, &self.modulus()),
        }
    }

    pub fn pow_u64(&self, exp: u64) -> Self {
        self.pow(&BigUint::from(exp))
    }

    pub fn invert_unit(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(PAdicError::NotAUnit(self.to_string()));
        }
        let m = BigInt::from(self.modulus());
        let a = BigInt::from(self.residue.clone());
        let g = a.extended_gcd(&m);
        debug_assert!(g.gcd.is_one());
        Ok(PAdicInt {
            p: self.p,
            precision: self.precision,
            residue: reduce_signed(&g.x, &self.modulus()),
        })
    }

    /// Divides by `p^v`, losing `v` digits of precision. Requires `p^v | self`.
    pub fn shift_down(&self, v: u32) -> Result<Self> {
        if v >= self.precision {
            return Err(PAdicError::InsufficientPrecision {
                needed: v + 1,
                available: self.precision,
            });
        }
        let pv = pow_p(self.p, v);
        let (q, r) = self.residue.div_rem(&pv);
        debug_assert!(r.is_zero(), "shift_down of a non-multiple of p^v");
        let _ = r;
        Ok(PAdicInt {
            p: self.p,
            precision: self.precision - v,
            residue: q,
        })
    }

    /// Square root with valuation-aware precision loss.
    ///
    /// If `self = p^{2v} u` with `u` a unit, the root `p^v w` is returned at
    /// precision `K - v`. `branch_hint` fixes `w mod p`; without a hint the
    /// root with the smaller canonical residue is returned.
    pub fn sqrt(&self, branch_hint: Option<u64>) -> Result<Self> {
        let p = self.p;
        if p == 2 {
            return Err(PAdicError::TwoAdicSqrt);
        }
        let val = match self.valuation() {
            Valuation::Finite(v) => v,
            Valuation::AtLeastPrecision => return Err(PAdicError::SqrtOfZero),
        };
        if val % 2 == 1 {
            return Err(PAdicError::OddValuation(val));
        }
        let half = val / 2;
        let unit = self.shift_down(val)?;
        let u0 = unit.residue_mod_p();
        let t = sqrt_mod_prime(u0, p).ok_or(PAdicError::NonResidue(p))?;
        let seed = match branch_hint {
            Some(h) => {
                let h = h % p;
                if (h as u128 * h as u128 % p as u128) as u64 != u0 {
                    return Err(PAdicError::BadBranchHint { hint: h, p });
                }
                h
            }
            None => t,
        };
        let unit_prec = unit.precision;
        let poly = IntPoly::new(vec![
            -BigInt::from(unit.residue.clone()),
            BigInt::zero(),
            BigInt::one(),
        ]);
        let w = hensel_lift(&poly, &BigUint::from(seed), p, unit_prec)?;
        let out_prec = self.precision - half;
        let scale = pow_p(p, half);
        let m = pow_p(p, out_prec);
        let r1 = (&w.residue * &scale) % &m;
        let root = PAdicInt::from_parts(p, out_prec, r1);
        if branch_hint.is_some() {
            return Ok(root);
        }
        let other = root.neg();
        Ok(if other.residue < root.residue {
            other
        } else {
            root
        })
    }
}

fn parse_digit_token(tok: &str, p: u64) -> Option<u64> {
    let d = if p <= 36 {
        let mut chars = tok.chars();
        let c = chars.next()?;
        if chars.next().is_some() {
            return None;
        }
        c.to_digit(36)? as u64
    } else {
        tok.parse::<u64>().ok()?
    };
    (d < p).then_some(d)
}

impl fmt::Display for PAdicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.residue, self.p, self.precision)
    }
}

impl fmt::Debug for PAdicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PAdicInt({self})")
    }
}

pub fn arith(x: &PAdicInt, y: &PAdicInt, op: ArithOp) -> Result<PAdicInt> {
    match op {
        ArithOp::Add => x.checked_add(y),
        ArithOp::Sub => x.checked_sub(y),
        ArithOp::Mul => x.checked_mul(y),
    }
}

/// Anything that can report its value and derivative at an integer point,
/// reduced modulo a given modulus. Both must be exact mod `modulus`.
pub trait DifferentiableMap {
    fn eval_with_derivative(&self, x: &BigUint, modulus: &BigUint) -> (BigUint, BigUint);
}

/// A polynomial with integer coefficients, constant term first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        IntPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

impl DifferentiableMap for IntPoly {
    fn eval_with_derivative(&self, x: &BigUint, modulus: &BigUint) -> (BigUint, BigUint) {
        let m = BigInt::from(modulus.clone());
        let x = BigInt::from(x.clone());
        let mut val = BigInt::zero();
        let mut der = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            der = (der * &x + &val).mod_floor(&m);
            val = (val * &x + c).mod_floor(&m);
        }
        (
            val.to_biguint().expect("non-negative"),
            der.to_biguint().expect("non-negative"),
        )
    }
}

/// Valuations observed at the point where the Hensel criterion was checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HenselCertificate {
    pub val_f: Valuation,
    pub val_df: u32,
}

/// Lifts a seed satisfying `v(f(x0)) > 2 v(f'(x0))` to the unique nearby
/// root, returned modulo `p^k`.
pub fn hensel_refine<F: DifferentiableMap + ?Sized>(
    f: &F,
    x0: &BigUint,
    p: u64,
    k: u32,
) -> Result<(PAdicInt, HenselCertificate)> {
    if !is_prime(p) {
        return Err(PAdicError::NotPrime(p));
    }
    if k == 0 {
        return Err(PAdicError::ZeroPrecision);
    }
    let probe_prec = 2 * k + 1;
    let probe_mod = pow_p(p, probe_prec);
    let (fx, dfx) = f.eval_with_derivative(&(x0 % &probe_mod), &probe_mod);
    let val_f = valuation_of(&fx, p, probe_prec);
    let val_df = valuation_of(&dfx, p, probe_prec);
    let e = match val_df {
        Valuation::Finite(e) if e < k => e,
        _ => return Err(PAdicError::HenselCriterion { val_f, val_df }),
    };
    let criterion = match val_f {
        Valuation::Finite(vf) => vf > 2 * e,
        Valuation::AtLeastPrecision => true,
    };
    if !criterion {
        return Err(PAdicError::HenselCriterion { val_f, val_df });
    }
    let cert = HenselCertificate { val_f, val_df: e };

    // f and f' are evaluated mod p^work; dividing by p^e leaves the Newton
    // step exact mod p^(work - e) = p^(k + e + 1).
    let work = k + 2 * e + 1;
    let work_mod = pow_p(p, work);
    let step_mod = pow_p(p, work - e);
    let pe = pow_p(p, e);
    let mut x = x0 % &step_mod;
    for _ in 0..256 {
        let (fx, dfx) = f.eval_with_derivative(&x, &work_mod);
        match valuation_of(&fx, p, work) {
            Valuation::AtLeastPrecision => {}
            Valuation::Finite(v) if v >= k + e => {}
            Valuation::Finite(_) => {
                let num = BigInt::from(&fx / &pe);
                let den = BigInt::from(&dfx / &pe);
                let sm = BigInt::from(step_mod.clone());
                let inv = den.extended_gcd(&sm).x;
                let xi = BigInt::from(x.clone()) - num * inv;
                x = reduce_signed(&xi, &step_mod);
                continue;
            }
        }
        let root = PAdicInt::from_parts(p, k, x % pow_p(p, k));
        return Ok((root, cert));
    }
    Err(PAdicError::NoConvergence)
}

/// Hensel lift of a simple root `r0` mod p to a root mod `p^k`.
pub fn hensel_lift<F: DifferentiableMap + ?Sized>(
    f: &F,
    r0: &BigUint,
    p: u64,
    k: u32,
) -> Result<PAdicInt> {
    if !is_prime(p) {
        return Err(PAdicError::NotPrime(p));
    }
    let pm = BigUint::from(p);
    let (f0, df0) = f.eval_with_derivative(&(r0 % &pm), &pm);
    if !f0.is_zero() {
        return Err(PAdicError::NotARoot);
    }
    if df0.is_zero() {
        return Err(PAdicError::DerivativeVanishes);
    }
    hensel_refine(f, &(r0 % &pm), p, k).map(|(r, _)| r)
}

/// Signed-integer absolute value helper for callers that build polynomials.
pub fn abs_big(n: &BigInt) -> BigUint {
    n.abs().to_biguint().expect("absolute value is non-negative")
}
