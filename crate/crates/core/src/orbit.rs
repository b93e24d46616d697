//! Critical orbits of `f_c(z) = z^2 + c` modulo `p^k`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::padic::{multiplicative_order, pow_p, valuation_of, PAdicError, PAdicInt, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrbitError {
    #[error(transparent)]
    PAdic(#[from] PAdicError),
    #[error("level must be at least 1")]
    ZeroLevel,
    #[error("level {level} exceeds the precision {precision} of c")]
    LevelExceedsPrecision { level: u32, precision: u32 },
    #[error("classification needs a window of at least 3 levels, got {0}")]
    WindowTooSmall(u32),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("{v} is not fixed by f^{n} mod {p}^{k}")]
    NotFixed { v: BigUint, n: u64, p: u64, k: u32 },
    #[error("{0} lies in the critical residue class")]
    CriticalResidue(BigUint),
    #[error("local map at {0} is not of degree one")]
    Degenerate(BigUint),
    #[error("isometry check needs unit inputs")]
    NonUnit,
    #[error("isometry check needs an odd prime")]
    EvenPrime,
}

pub type Result<T> = std::result::Result<T, OrbitError>;

/// Tail length `m` and cycle length `n` of the critical orbit at one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OrbitType {
    pub m: u64,
    pub n: u64,
}

impl OrbitType {
    pub fn new(m: u64, n: u64) -> Self {
        OrbitType { m, n }
    }

    pub fn is_periodic(&self) -> bool {
        self.m == 0
    }
}

impl fmt::Display for OrbitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

pub(crate) fn residue_json(r: &BigUint) -> Value {
    match r.to_u64() {
        Some(x) => json!(x),
        None => json!(r.to_string()),
    }
}

/// The critical orbit mod `p^k`, from 0 up to and including the first repeat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitRecord {
    pub p: u64,
    pub k: u32,
    pub c: PAdicInt,
    pub sequence: Vec<BigUint>,
    pub orbit_type: OrbitType,
}

impl OrbitRecord {
    pub fn cycle(&self) -> &[BigUint] {
        let m = self.orbit_type.m as usize;
        &self.sequence[m..m + self.orbit_type.n as usize]
    }

    pub fn tail(&self) -> &[BigUint] {
        &self.sequence[..self.orbit_type.m as usize]
    }

    /// `0 → 1 → 2 → 2`
    pub fn arrow_chain(&self) -> String {
        self.sequence
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(" → ")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "k": self.k,
            "c": self.c.to_digit_string(),
            "sequence": self.sequence.iter().map(residue_json).collect::<Vec<_>>(),
            "m": self.orbit_type.m,
            "n": self.orbit_type.n,
        })
    }
}

fn check_level(c: &PAdicInt, k: u32) -> Result<()> {
    if k == 0 {
        return Err(OrbitError::ZeroLevel);
    }
    if k > c.precision() {
        return Err(OrbitError::LevelExceedsPrecision {
            level: k,
            precision: c.precision(),
        });
    }
    Ok(())
}

/// Iterates from 0, recording first occurrences, until a value repeats.
pub fn orbit_mod(c: &PAdicInt, k: u32) -> Result<OrbitRecord> {
    check_level(c, k)?;
    let modulus = pow_p(c.p(), k);
    let cr = c.residue_mod(k);
    let mut seen: HashMap<BigUint, usize> = HashMap::new();
    let mut sequence = Vec::new();
    let mut z = BigUint::zero();
    loop {
        if let Some(&first) = seen.get(&z) {
            let n = sequence.len() - first;
            sequence.push(z);
            return Ok(OrbitRecord {
                p: c.p(),
                k,
                c: c.truncate(k)?,
                sequence,
                orbit_type: OrbitType::new(first as u64, n as u64),
            });
        }
        seen.insert(z.clone(), sequence.len());
        let next = (&z * &z + &cr) % &modulus;
        sequence.push(z);
        z = next;
    }
}

/// Brent's cycle finder; returns `(mu, lambda)`.
fn brent<T: Clone + PartialEq>(start: T, step: impl Fn(&T) -> T) -> (u64, u64) {
    let mut power = 1u64;
    let mut lam = 1u64;
    let mut tortoise = start.clone();
    let mut hare = step(&start);
    while tortoise != hare {
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        hare = step(&hare);
        lam += 1;
    }
    let mut tortoise = start.clone();
    let mut hare = start;
    for _ in 0..lam {
        hare = step(&hare);
    }
    let mut mu = 0u64;
    while tortoise != hare {
        tortoise = step(&tortoise);
        hare = step(&hare);
        mu += 1;
    }
    (mu, lam)
}

/// Orbit type of the critical point at level `k` without storing the orbit.
pub(crate) fn orbit_type_at(c: &BigUint, p: u64, k: u32) -> OrbitType {
    let modulus = pow_p(p, k);
    let (mu, lam) = match modulus.to_u64() {
        // z^2 + c stays below 2^64 when the modulus is below 2^32.
        Some(m) if m < 1 << 32 => {
            let cm = (c % &modulus).to_u64().expect("below modulus");
            brent(0u64, |&z| (z * z + cm) % m)
        }
        Some(m) => {
            let cm = (c % &modulus).to_u64().expect("below modulus") as u128;
            let m = m as u128;
            brent(0u128, |&z| (z * z + cm) % m)
        }
        None => {
            let cm = c % &modulus;
            brent(BigUint::zero(), |z| (z * z + &cm) % &modulus)
        }
    };
    OrbitType::new(mu, lam)
}

/// `f_c^i(0) mod modulus`.
pub(crate) fn critical_iterate(c: &BigUint, i: u64, modulus: &BigUint) -> BigUint {
    let mut z = BigUint::zero();
    for _ in 0..i {
        z = (&z * &z + c) % modulus;
    }
    z
}

/// Orbit types at levels `1..=k_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelProfile {
    pub c: PAdicInt,
    pub levels: Vec<(u32, OrbitType)>,
}

impl LevelProfile {
    pub fn p(&self) -> u64 {
        self.c.p()
    }

    pub fn k_max(&self) -> u32 {
        self.levels.last().map(|l| l.0).unwrap_or(0)
    }

    pub fn types(&self) -> Vec<OrbitType> {
        self.levels.iter().map(|l| l.1).collect()
    }

    pub fn at(&self, k: u32) -> Option<OrbitType> {
        self.levels.iter().find(|l| l.0 == k).map(|l| l.1)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p(),
            "c": self.c.to_digit_string(),
            "levels": self.levels.iter().map(|(k, t)| json!({"k": k, "m": t.m, "n": t.n})).collect::<Vec<_>>(),
        })
    }
}

fn check_profile_step(prev: OrbitType, next: OrbitType, k: u32) -> Result<()> {
    if next.m < prev.m {
        return Err(OrbitError::Inconsistent(format!(
            "tail shrank from {} to {} at level {}",
            prev.m,
            next.m,
            k + 1
        )));
    }
    if !next.n.is_multiple_of(prev.n) {
        return Err(OrbitError::Inconsistent(format!(
            "cycle length {} does not divide {} at level {}",
            prev.n,
            next.n,
            k + 1
        )));
    }
    Ok(())
}

pub fn level_profile(c: &PAdicInt, k_max: u32) -> Result<LevelProfile> {
    check_level(c, k_max)?;
    let cr = c.residue();
    let mut levels: Vec<(u32, OrbitType)> = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let t = orbit_type_at(cr, c.p(), k);
        if let Some(&(_, prev)) = levels.last() {
            check_profile_step(prev, t, k - 1)?;
        }
        levels.push((k, t));
    }
    Ok(LevelProfile {
        c: c.truncate(k_max)?,
        levels,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    PeriodicExact { n: u64 },
    PreperiodicFinite { m: u64, n: u64, resolved_at: u32 },
    /// Cycle length fixed, tails observed per level.
    InfiniteTailGrowth { n: u64, tails: Vec<u64> },
    /// Tail fixed, cycle lengths observed per level.
    InfiniteCycleGrowth { m: u64, cycles: Vec<u64> },
}

impl Verdict {
    pub fn is_finite(&self) -> bool {
        matches!(
            self,
            Verdict::PeriodicExact { .. } | Verdict::PreperiodicFinite { .. }
        )
    }

    pub fn finite_type(&self) -> Option<OrbitType> {
        match self {
            Verdict::PeriodicExact { n } => Some(OrbitType::new(0, *n)),
            Verdict::PreperiodicFinite { m, n, .. } => Some(OrbitType::new(*m, *n)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    Certified,
    Provisional,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub verdict: Verdict,
    pub certainty: Certainty,
    pub k_max: u32,
    pub profile: LevelProfile,
}

impl Classification {
    pub fn resolved_at(&self) -> Option<u32> {
        match &self.verdict {
            Verdict::PeriodicExact { .. } => Some(resolution_level(&self.profile.types())),
            Verdict::PreperiodicFinite { resolved_at, .. } => Some(*resolved_at),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(&self.verdict).expect("verdict serializes");
        let obj = v.as_object_mut().expect("tagged enum is an object");
        obj.insert("certainty".into(), json!(self.certainty));
        obj.insert("k_max".into(), json!(self.k_max));
        obj.insert("profile".into(), self.profile.to_json());
        v
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassifyOptions {
    /// Evidence window; defaults to 8 levels past the first cycle change,
    /// capped by the precision of `c`.
    pub k_max: Option<u32>,
    /// Set when `c` carries a Hensel certificate for its relation.
    pub hensel_certified: bool,
}

/// Least level from which the type stays equal to the last observed type.
fn resolution_level(types: &[OrbitType]) -> u32 {
    let last = *types.last().expect("non-empty profile");
    let mut r = types.len();
    while r > 1 && types[r - 2] == last {
        r -= 1;
    }
    r as u32
}

fn default_window(c: &PAdicInt) -> u32 {
    let cap = c.precision();
    let cr = c.residue();
    let mut prev = orbit_type_at(cr, c.p(), 1);
    for k in 2..=cap {
        let t = orbit_type_at(cr, c.p(), k);
        if t.n != prev.n {
            return (k + 7).min(cap);
        }
        prev = t;
    }
    cap
}

/// `f^{m+n}(0) ≡ f^m(0)` at the full precision of `c`.
fn relation_holds(c: &PAdicInt, t: OrbitType) -> bool {
    let modulus = c.modulus();
    let a = critical_iterate(c.residue(), t.m, &modulus);
    let mut b = a.clone();
    for _ in 0..t.n {
        b = (&b * &b + c.residue()) % &modulus;
    }
    a == b
}

pub fn classify(c: &PAdicInt, opts: ClassifyOptions) -> Result<Classification> {
    let k_max = match opts.k_max {
        Some(k) => k,
        None => default_window(c),
    };
    if k_max < 3 {
        return Err(OrbitError::WindowTooSmall(k_max));
    }
    let profile = level_profile(c, k_max)?;
    let types = profile.types();
    let first = types[0];
    let last = *types.last().expect("non-empty");
    let tail_steps = types.windows(2).filter(|w| w[1].m > w[0].m).count();
    let cycle_steps = types.windows(2).filter(|w| w[1].n > w[0].n).count();
    let resolved_at = resolution_level(&types);
    let stable_levels = k_max - resolved_at;

    let finite = |certainty_ok: bool| -> Classification {
        let certified = opts.hensel_certified
            || (certainty_ok
                && k_max == c.precision()
                && stable_levels >= 3
                && relation_holds(c, last));
        let verdict = if last.m == 0 {
            Verdict::PeriodicExact { n: last.n }
        } else {
            Verdict::PreperiodicFinite {
                m: last.m,
                n: last.n,
                resolved_at,
            }
        };
        Classification {
            verdict,
            certainty: if certified {
                Certainty::Certified
            } else {
                Certainty::Provisional
            },
            k_max,
            profile: profile.clone(),
        }
    };

    if c.p() == 2 {
        if stable_levels >= 1 || opts.hensel_certified {
            // Tails can grow for p = 2, so stability alone never certifies.
            return Ok(finite(false));
        }
        return Err(OrbitError::Inconclusive(format!(
            "type {last} only appeared at the last level {k_max}"
        )));
    }

    if tail_steps == 0 {
        if cycle_steps >= 2 {
            return Ok(Classification {
                verdict: Verdict::InfiniteCycleGrowth {
                    m: first.m,
                    cycles: types.iter().map(|t| t.n).collect(),
                },
                certainty: Certainty::Certified,
                k_max,
                profile,
            });
        }
        if stable_levels == 0 && cycle_steps == 1 {
            return Err(OrbitError::Inconclusive(format!(
                "cycle length changed at the last level {k_max}"
            )));
        }
        return Ok(finite(true));
    }

    if first.m > 0 {
        return Err(OrbitError::Inconsistent(format!(
            "tail grew from {} although 0 is strictly preperiodic mod {}",
            first.m,
            c.p()
        )));
    }
    if cycle_steps > 0 {
        return Err(OrbitError::Inconsistent(
            "tail and cycle length both changed".into(),
        ));
    }
    if tail_steps >= 2 {
        return Ok(Classification {
            verdict: Verdict::InfiniteTailGrowth {
                n: first.n,
                tails: types.iter().map(|t| t.m).collect(),
            },
            certainty: Certainty::Certified,
            k_max,
            profile,
        });
    }
    Err(OrbitError::Inconclusive(format!(
        "tail grew once within {k_max} levels"
    )))
}

/// Multiplicative order of the cycle multiplier mod p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierOrder {
    Finite(u64),
    /// The multiplier vanishes mod p (superattracting cycle).
    Infinity,
}

/// Derivative of `f^n` along the cycle of `record`, at the record's level.
pub fn cycle_multiplier(c: &PAdicInt, record: &OrbitRecord) -> Result<(PAdicInt, MultiplierOrder)> {
    let p = c.p();
    let k = record.k;
    let modulus = pow_p(p, k);
    let mut prod = BigUint::from(1u32) % &modulus;
    for z in record.cycle() {
        prod = (prod * z * 2u32) % &modulus;
    }
    let multiplier = PAdicInt::from_residue(prod, p, k)?;
    let order = match multiplicative_order(multiplier.residue_mod_p(), p) {
        Some(r) => MultiplierOrder::Finite(r),
        None => MultiplierOrder::Infinity,
    };
    Ok((multiplier, order))
}

/// Reduction mod p of `g(z) = (f^n(v + p^k z) - v) / p^k`, as `a z + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LocalAffineMap {
    pub a: u64,
    pub b: u64,
}

pub fn local_affine_map(c: &PAdicInt, v: &BigUint, n_iter: u64, k: u32) -> Result<LocalAffineMap> {
    check_level(c, k + 1)?;
    let p = c.p();
    let pk = pow_p(p, k);
    let v = v % &pk;
    if (&v % p).is_zero() {
        return Err(OrbitError::CriticalResidue(v));
    }
    let work = pow_p(p, k + 1);
    let cr = c.residue_mod(k + 1);
    let iterate = |z0: &BigUint| {
        let mut z = z0 % &work;
        for _ in 0..n_iter {
            z = (&z * &z + &cr) % &work;
        }
        z
    };
    let g0_full = iterate(&v);
    if &g0_full % &pk != v {
        return Err(OrbitError::NotFixed { v, n: n_iter, p, k });
    }
    let rescale = |w: BigUint| -> u64 {
        let diff = (w + &work - &v) % &work;
        ((diff / &pk) % p).to_u64().expect("below p")
    };
    let b = rescale(g0_full);
    let g1 = rescale(iterate(&(&v + &pk)));
    let a = (g1 + p - b) % p;
    if a == 0 {
        return Err(OrbitError::Degenerate(v));
    }
    Ok(LocalAffineMap { a, b })
}

/// Whether `f_c` preserves the distance between two units.
pub fn isometry_check(c: &PAdicInt, a1: &PAdicInt, a2: &PAdicInt) -> Result<bool> {
    if c.p() == 2 {
        return Err(OrbitError::EvenPrime);
    }
    if !a1.is_unit() || !a2.is_unit() {
        return Err(OrbitError::NonUnit);
    }
    let f = |a: &PAdicInt| a.checked_mul(a).and_then(|s| s.checked_add(c));
    let d_in = a2.checked_sub(a1)?;
    let d_out = f(a2)?.checked_sub(&f(a1)?)?;
    // Compare at the common precision so that both valuations are capped alike.
    let k = d_in.precision().min(d_out.precision());
    let vi = valuation_of(&d_in.residue_mod(k), c.p(), k);
    let vo = valuation_of(&d_out.residue_mod(k), c.p(), k);
    Ok(vi == vo || (vi == Valuation::AtLeastPrecision && vo == Valuation::AtLeastPrecision))
}
