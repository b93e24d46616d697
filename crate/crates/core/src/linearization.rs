//! Fixed points, multipliers and the linearization-radius bound, plus the
//! mechanical checks for parameters near `c = -2` in `Z_3`.
//!
//! Radii are kept as exponents: `R(s) = p^{-1/(p^{s-1}(p-1))}` has exponent
//! `p / (p^s (p-1))`, and every comparison is between exact rationals.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::orbit::{level_profile, LevelProfile, OrbitError, OrbitType};
use crate::padic::{
    multiplicative_order, pow_p, sqrt_mod_prime, valuation_of, PAdicError, PAdicInt, RadiusExp,
    Valuation,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinError {
    #[error(transparent)]
    PAdic(#[from] PAdicError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("no fixed point in Z_p: {0}")]
    NoFixedPoint(PAdicError),
    #[error("multiplier must be a unit")]
    NotUnit,
    #[error("multiplier is a root of unity at working precision")]
    RootOfUnity,
    #[error("|1 - lambda^m| = p^-{w} lies below R(0); no s >= 0 applies")]
    OutOfRange { w: u32 },
    #[error("|gamma0 - lambda^m| is not determined by the ultrametric rule")]
    IndeterminateGamma0(Box<LinearizationParams>),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("near -2 check failed for k={}, l={}: {}", .0.k, .0.l, .0.failures.join("; "))]
    C2Violation(Box<C2Report>),
    #[error("zero translation constant at distance {n}")]
    ZeroTranslation { n: u32 },
}

pub type Result<T> = std::result::Result<T, LinError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPoints {
    pub x_plus: PAdicInt,
    pub x_minus: PAdicInt,
}

/// Roots of `z^2 - z + c`, as `(1 ± sqrt(1 - 4c)) / 2`.
///
/// `x_plus` uses the square root whose unit part is the smaller square root
/// mod p; near `c = -2` in `Z_3` that is the root `≡ 2 mod 9`.
pub fn fixed_points(c: &PAdicInt) -> Result<FixedPoints> {
    let p = c.p();
    if p == 2 {
        return Err(LinError::NoFixedPoint(PAdicError::TwoAdicSqrt));
    }
    let disc = c.mul_integer(-4).add_integer(1);
    let hint = match disc.valuation() {
        Valuation::Finite(v) if v % 2 == 0 => {
            let u = disc.shift_down(v)?.residue_mod_p();
            sqrt_mod_prime(u, p).map(|t| t.min(p - t))
        }
        _ => None,
    };
    let s = disc.sqrt(hint).map_err(LinError::NoFixedPoint)?;
    let half = PAdicInt::from_i64(2, p, s.precision())?.invert_unit()?;
    let one = PAdicInt::one(p, s.precision())?;
    Ok(FixedPoints {
        x_plus: one.checked_add(&s)?.checked_mul(&half)?,
        x_minus: one.checked_sub(&s)?.checked_mul(&half)?,
    })
}

/// Exponent of `R(s)`.
pub fn r_exponent(p: u64, s: u32) -> BigRational {
    let p_big = BigInt::from(p);
    BigRational::new(p_big.clone(), p_big.pow(s) * BigInt::from(p - 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Gamma0Case {
    /// `s = 0`, so `gamma0 = 1`.
    Trivial,
    /// Exponent of `|gamma0 - lambda^m|` fixed by the ultrametric rule.
    Ultrametric { exponent: String },
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearizationParams {
    pub lambda: PAdicInt,
    pub m: u64,
    /// `|1 - lambda^m| = p^{-w}`.
    pub w: u32,
    pub s: u32,
    pub t: u32,
    pub gamma0_case: Gamma0Case,
}

impl LinearizationParams {
    pub fn to_json(&self) -> Value {
        json!({
            "lambda": self.lambda.to_digit_string(),
            "m": self.m,
            "w": self.w,
            "s": self.s,
            "t": self.t,
            "gamma0": self.gamma0_case,
        })
    }
}

/// Least `s >= 0` with `R(s) <= p^{-e} < R(s+1)`, i.e. `e(R(s)) >= e > e(R(s+1))`.
fn bracket(p: u64, e: &BigRational) -> Option<u32> {
    if &r_exponent(p, 0) < e {
        return None;
    }
    let mut s = 0;
    while &r_exponent(p, s + 1) >= e {
        s += 1;
    }
    Some(s)
}

/// Lower bound `r~(lambda)` on the linearization radius, as an exponent.
pub fn radius_lower_bound(lambda: &PAdicInt) -> Result<(RadiusExp, LinearizationParams)> {
    let p = lambda.p();
    if !lambda.is_unit() {
        return Err(LinError::NotUnit);
    }
    let m = multiplicative_order(lambda.residue_mod_p(), p).expect("unit has an order");
    let gap = PAdicInt::one(p, lambda.precision())?.checked_sub(&lambda.pow_u64(m))?;
    let w = match gap.valuation() {
        Valuation::Finite(w) => w,
        Valuation::AtLeastPrecision => return Err(LinError::RootOfUnity),
    };
    let w_rat = BigRational::from_integer(w.into());
    let s = bracket(p, &w_rat).ok_or(LinError::OutOfRange { w })?;

    let (e_gamma, gamma0_case) = if s == 0 {
        (w_rat.clone(), Gamma0Case::Trivial)
    } else {
        // |gamma0 - 1| = R(s) for a primitive p^s-th root of unity.
        let e_one = r_exponent(p, s);
        if e_one == w_rat {
            let params = LinearizationParams {
                lambda: lambda.clone(),
                m,
                w,
                s,
                t: 0,
                gamma0_case: Gamma0Case::Indeterminate,
            };
            return Err(LinError::IndeterminateGamma0(Box::new(params)));
        }
        let e = e_one.min(w_rat.clone());
        let case = Gamma0Case::Ultrametric {
            exponent: e.to_string(),
        };
        (e, case)
    };
    let t = bracket(p, &e_gamma).ok_or(LinError::OutOfRange { w })?;

    let mr = BigRational::from_integer(m.into());
    let pr = BigRational::from_integer(p.into());
    let p_pow = |k: i64| pr.pow(k as i32);
    let s_i = s as i64;
    let t_i = t as i64;
    let exponent = r_exponent(p, s + 1) / &mr
        + BigRational::from_integer((s_i - t_i).into()) / (&mr * p_pow(s_i))
        + BigRational::from_integer(((s as u64) * (p - 1)).into()) * &w_rat / (&mr * &pr)
        + &e_gamma * p_pow(t_i - s_i) / &mr;
    let params = LinearizationParams {
        lambda: lambda.clone(),
        m,
        w,
        s,
        t,
        gamma0_case,
    };
    Ok((RadiusExp::from_ratio(exponent), params))
}

/// Outcome of checking one parameter `c = -2 + l 3^k + ...` in `Z_3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct C2Report {
    pub k: u32,
    pub l: u64,
    pub c: PAdicInt,
    pub fixed_point: Option<PAdicInt>,
    /// Valuation of `f_c^2(0) - x`.
    pub distance_val: Option<Valuation>,
    pub radius: Option<RadiusExp>,
    pub profile: LevelProfile,
    /// Whether the type is `(2,1)` at every level `j <= k`.
    pub pre_levels_ok: bool,
    /// `(i, passed)`: type `(2, 3^i)` mod `3^{k+i}`.
    pub verdicts: Vec<(u32, bool)>,
    pub failures: Vec<String>,
}

impl C2Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn in_disk(&self) -> bool {
        match (&self.distance_val, &self.radius) {
            (Some(Valuation::AtLeastPrecision), Some(_)) => true,
            (Some(Valuation::Finite(d)), Some(r)) => RadiusExp::integer(*d) > *r,
            _ => false,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "l": self.l,
            "c": self.c.to_digit_string(),
            "fixed_point": self.fixed_point.as_ref().map(|x| x.to_digit_string()),
            "distance_val": self.distance_val.map(|v| v.to_string()),
            "radius_exponent": self.radius.as_ref().map(|r| r.to_string()),
            "in_disk": self.in_disk(),
            "profile": self.profile.to_json(),
            "pre_levels_ok": self.pre_levels_ok,
            "verdicts": self.verdicts.iter().map(|(i, ok)| json!({"i": i, "pass": ok})).collect::<Vec<_>>(),
            "passed": self.passed(),
            "failures": self.failures,
        })
    }
}

/// `c = -2 + l 3^k + 3^{k+1} T` with `T` drawn from `tail_seed` (zero if absent).
pub fn c2_parameter(k: u32, l: u64, tail_seed: Option<u64>, precision: u32) -> Result<PAdicInt> {
    let tail = match tail_seed {
        None => BigUint::zero(),
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let digits = precision.saturating_sub(k + 1);
            (0..digits).fold(BigUint::zero(), |acc, _| acc * 3u32 + rng.gen_range(0u32..3))
        }
    };
    let n = BigInt::from(-2) + BigInt::from(l) * BigInt::from(pow_p(3, k))
        + BigInt::from(pow_p(3, k + 1) * tail);
    Ok(PAdicInt::from_integer(&n, 3, precision)?)
}

/// Checks the in-disk estimate and the orbit types `(2,1)` then `(2,3^i)`.
pub fn verify_c2(
    k: u32,
    l: u64,
    tail_seed: Option<u64>,
    i_max: u32,
    precision: u32,
) -> Result<C2Report> {
    if k < 2 {
        return Err(LinError::Precondition(format!("k = {k} must be at least 2")));
    }
    if !(1..=2).contains(&l) {
        return Err(LinError::Precondition(format!("l = {l} must be 1 or 2")));
    }
    if precision < k + i_max + 2 {
        return Err(LinError::Precondition(format!(
            "precision {precision} below k + i_max + 2 = {}",
            k + i_max + 2
        )));
    }
    let c = c2_parameter(k, l, tail_seed, precision)?;
    let mut failures = Vec::new();

    let (fixed_point, distance_val, radius) = match fixed_points(&c) {
        Ok(fp) => {
            let x = fp.x_plus;
            let f2 = c.checked_mul(&c)?.checked_add(&c)?;
            let dist = f2.checked_sub(&x)?.valuation();
            let lambda = x.mul_integer(2);
            let radius = match radius_lower_bound(&lambda) {
                Ok((r, _)) => Some(r),
                Err(e) => {
                    failures.push(format!("radius bound unavailable: {e}"));
                    None
                }
            };
            (Some(x), Some(dist), radius)
        }
        Err(e) => {
            failures.push(format!("fixed point: {e}"));
            (None, None, None)
        }
    };
    if let (Some(d), Some(r)) = (distance_val, &radius) {
        let inside = match d {
            Valuation::AtLeastPrecision => true,
            Valuation::Finite(d) => d >= 2 && RadiusExp::integer(d) > *r,
        };
        if !inside {
            failures.push(format!(
                "f_c^2(0) at distance 3^-{d} from x, outside radius 3^-{r}"
            ));
        }
    }

    let profile = level_profile(&c, k + i_max)?;
    let pre_levels_ok = (1..=k).all(|j| profile.at(j) == Some(OrbitType::new(2, 1)));
    if !pre_levels_ok {
        failures.push(format!("type is not (2,1) at every level up to {k}"));
    }
    let verdicts: Vec<(u32, bool)> = (1..=i_max)
        .map(|i| {
            let expect = OrbitType::new(2, 3u64.pow(i));
            (i, profile.at(k + i) == Some(expect))
        })
        .collect();
    for (i, ok) in &verdicts {
        if !ok {
            failures.push(format!(
                "type mod 3^{} is {:?}, expected (2,{})",
                k + i,
                profile.at(k + i),
                3u64.pow(*i)
            ));
        }
    }

    let report = C2Report {
        k,
        l,
        c,
        fixed_point,
        distance_val,
        radius,
        profile,
        pre_levels_ok,
        verdicts,
        failures,
    };
    if report.passed() {
        Ok(report)
    } else {
        Err(LinError::C2Violation(Box::new(report)))
    }
}

fn require_four_mod_nine(lambda: &PAdicInt) -> Result<()> {
    if lambda.p() != 3 {
        return Err(LinError::Precondition(format!(
            "lambda must be 3-adic, got p = {}",
            lambda.p()
        )));
    }
    if lambda.precision() < 2 || lambda.residue_mod(2) != BigUint::from(4u32) {
        return Err(LinError::Precondition("lambda must be ≡ 4 mod 9".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Lemma54Row {
    pub n: u32,
    /// `lambda^{3^{n-1}} ≡ 1 mod 3^n`
    pub claim1: bool,
    /// `lambda^{3^{n-1}} ≢ 1 mod 3^{n+1}`
    pub claim2: bool,
}

pub fn lemma54_claims(lambda: &PAdicInt, n_max: u32) -> Result<Vec<Lemma54Row>> {
    require_four_mod_nine(lambda)?;
    if lambda.precision() < n_max + 2 {
        return Err(PAdicError::InsufficientPrecision {
            needed: n_max + 2,
            available: lambda.precision(),
        }
        .into());
    }
    let mut rows = Vec::with_capacity(n_max as usize);
    let mut mu = lambda.clone();
    for n in 1..=n_max {
        let gap = mu.add_integer(-1);
        let v = gap.valuation();
        rows.push(Lemma54Row {
            n,
            claim1: v >= Valuation::Finite(n),
            claim2: v < Valuation::Finite(n + 1),
        });
        mu = mu.pow_u64(3);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CascadeStep {
    pub n: u32,
    /// Level of the vertex `D(v, 3^{-(j+n)})`, where `j = v(v)`.
    pub level: u32,
    pub constant: u64,
}

/// Translation constants of `z -> lambda^{3^{n-1}} z` rescaled at the vertex
/// of `v` that sits `n` levels below the branch of 0.
pub fn translation_cascade(lambda: &PAdicInt, v: &PAdicInt, n_max: u32) -> Result<Vec<CascadeStep>> {
    require_four_mod_nine(lambda)?;
    if v.p() != 3 {
        return Err(LinError::Precondition("v must be 3-adic".into()));
    }
    let j = match v.valuation() {
        Valuation::Finite(j) => j,
        Valuation::AtLeastPrecision => {
            return Err(LinError::Precondition("v vanishes at working precision".into()))
        }
    };
    let needed = j + n_max + 1;
    let available = lambda.precision().min(v.precision());
    if available < needed {
        return Err(PAdicError::InsufficientPrecision { needed, available }.into());
    }
    let work = pow_p(3, needed);
    let lam = lambda.residue_mod(needed);
    let vv = v.residue_mod(needed);
    let mut mu = lam.clone();
    let mut steps = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let level = j + n;
        let pl = pow_p(3, level);
        // (lambda^N v - v) / 3^level mod 3
        let moved = (&mu * &vv) % &work;
        let diff = (moved + &work - &vv) % &work;
        let exact = valuation_of(&diff, 3, needed) >= Valuation::Finite(level);
        let constant = if exact {
            ((diff / &pl) % 3u32).to_u64().expect("below 3")
        } else {
            0
        };
        if constant == 0 {
            return Err(LinError::ZeroTranslation { n });
        }
        steps.push(CascadeStep {
            n,
            level,
            constant,
        });
        mu = mu.modpow(&BigUint::from(3u32), &work);
    }
    Ok(steps)
}

/// `|1 - lambda| = 3^{-1}` for the multiplier at `x_plus`.
pub fn multiplier_gap(c: &PAdicInt) -> Result<Valuation> {
    let x = fixed_points(c)?.x_plus;
    let lambda = x.mul_integer(2);
    Ok(lambda.add_integer(-1).valuation())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pa(n: i64, p: u64, k: u32) -> PAdicInt {
        PAdicInt::from_i64(n, p, k).unwrap()
    }

    #[test]
    fn fixed_point_examples() {
        let fp = fixed_points(&pa(-2, 3, 10)).unwrap();
        assert_eq!(fp.x_plus.to_symmetric(), 2.into());
        assert_eq!(fp.x_minus.to_symmetric(), (-1).into());
        let fp = fixed_points(&pa(0, 5, 6)).unwrap();
        assert_eq!(fp.x_plus, pa(1, 5, 6));
        assert_eq!(fp.x_minus, pa(0, 5, 6));
    }

    #[test]
    fn fixed_point_solves_equation() {
        for c in [-2 + 27, -2 + 2 * 27, -2 + 81, 6, -6] {
            let c = pa(c, 3, 12);
            let fp = fixed_points(&c).unwrap();
            for x in [fp.x_plus, fp.x_minus] {
                let lhs = x.checked_mul(&x).unwrap().checked_add(&c).unwrap();
                assert_eq!(lhs, x);
            }
        }
    }

    #[test]
    fn c_equal_seven_has_no_three_adic_fixed_point() {
        assert!(matches!(
            fixed_points(&pa(7, 3, 10)),
            Err(LinError::NoFixedPoint(PAdicError::OddValuation(3)))
        ));
    }

    #[test]
    fn radius_examples() {
        let (r, prm) = radius_lower_bound(&pa(4, 3, 10)).unwrap();
        assert_eq!(r, RadiusExp::new(3, 2));
        assert_eq!((prm.m, prm.s, prm.t), (1, 0, 0));
        let (r, _) = radius_lower_bound(&pa(13, 3, 10)).unwrap();
        assert_eq!(r, RadiusExp::new(3, 2));
        let (r, prm) = radius_lower_bound(&pa(4, 5, 10)).unwrap();
        assert_eq!(prm.m, 2);
        assert_eq!((prm.s, prm.t), (0, 0));
        assert_eq!(r, RadiusExp::new(5, 8));
    }

    #[test]
    fn radius_errors() {
        assert_eq!(radius_lower_bound(&pa(3, 3, 6)).unwrap_err(), LinError::NotUnit);
        assert_eq!(radius_lower_bound(&pa(1, 3, 6)).unwrap_err(), LinError::RootOfUnity);
        assert_eq!(
            radius_lower_bound(&pa(10, 3, 6)).unwrap_err(),
            LinError::OutOfRange { w: 2 }
        );
    }

    #[test]
    fn r_exponents() {
        use num_traits::One;
        assert_eq!(r_exponent(3, 0), BigRational::new(3.into(), 2.into()));
        assert_eq!(r_exponent(3, 1), BigRational::new(1.into(), 2.into()));
        assert_eq!(r_exponent(5, 2), BigRational::new(1.into(), 20.into()));
        assert!(r_exponent(3, 1) < BigRational::one());
    }

    #[test]
    fn two_adic_equal_valuations_are_indeterminate() {
        // |1 - 3| = 1/2 at p = 2 gives s = 1, and |gamma0 - 1| = R(1) = 1/2 too.
        let Err(LinError::IndeterminateGamma0(prm)) = radius_lower_bound(&pa(3, 2, 10)) else {
            panic!("expected an indeterminate gamma0");
        };
        assert_eq!((prm.m, prm.w, prm.s), (1, 1, 1));
    }

    #[test]
    fn c2_k3_passes() {
        let rep = verify_c2(3, 2, None, 4, 12).unwrap();
        assert_eq!(rep.distance_val, Some(Valuation::Finite(2)));
        assert!(rep.in_disk());
    }

    #[test]
    fn c2_k2_orbit_types_hold_but_disk_check_fails() {
        let err = verify_c2(2, 1, None, 5, 12).unwrap_err();
        let LinError::C2Violation(rep) = err else {
            panic!("unexpected error");
        };
        assert!(rep.pre_levels_ok);
        assert!(rep.verdicts.iter().all(|(_, ok)| *ok));
        assert_eq!(rep.fixed_point, None);
    }

    #[test]
    fn c2_preconditions() {
        assert!(matches!(verify_c2(1, 1, None, 2, 10), Err(LinError::Precondition(_))));
        assert!(matches!(verify_c2(2, 3, None, 2, 10), Err(LinError::Precondition(_))));
        assert!(matches!(verify_c2(2, 1, None, 9, 10), Err(LinError::Precondition(_))));
    }

    #[test]
    fn lemma54_examples() {
        let rows = lemma54_claims(&pa(4, 3, 14), 10).unwrap();
        assert!(rows.iter().all(|r| r.claim1 && r.claim2));
        let rows = lemma54_claims(&pa(22, 3, 12), 8).unwrap();
        assert!(rows.iter().all(|r| r.claim1 && r.claim2));
        assert!(matches!(
            lemma54_claims(&pa(1, 3, 12), 8),
            Err(LinError::Precondition(_))
        ));
        assert!(matches!(
            lemma54_claims(&pa(4, 3, 5), 8),
            Err(LinError::PAdic(PAdicError::InsufficientPrecision { .. }))
        ));
    }

    #[test]
    fn cascade_examples() {
        let s = translation_cascade(&pa(13, 3, 12), &pa(3, 3, 12), 1).unwrap();
        assert_eq!(s[0].constant, 1);
        let s = translation_cascade(&pa(13, 3, 12), &pa(18, 3, 12), 2).unwrap();
        assert_eq!(s[1].constant, 488 % 3);
        assert_eq!(s[1].level, 4);
    }

    #[test]
    fn multiplier_gap_near_minus_two() {
        for k in 3..6 {
            let c = c2_parameter(k, 1, Some(k as u64), 14).unwrap();
            assert_eq!(multiplier_gap(&c).unwrap(), Valuation::Finite(1));
        }
    }
}
