//! Enumeration of post-critically finite parameters in `Z_p` for odd `p`.
//!
//! Every PCF parameter solves a critical relation `f^{m+N}(0) = f^m(0)` for
//! one of finitely many candidate types. Roots are found by lifting digits
//! until the Hensel criterion holds, then refined by Newton's method.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::orbit::{orbit_type_at, OrbitType};
use crate::padic::{
    hensel_refine, is_prime, pow_p, valuation_of, DifferentiableMap, HenselCertificate,
    PAdicError, PAdicInt, Valuation,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PcfError {
    #[error(transparent)]
    PAdic(#[from] PAdicError),
    #[error("PCF enumeration over Z_2 is not supported")]
    EvenPrime,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("digit-lifting frontier for {relation} reached {size} residues at level {level} (cap {cap})")]
    FrontierExplosion {
        relation: CriticalRelation,
        level: u32,
        size: usize,
        cap: usize,
    },
}

pub type Result<T> = std::result::Result<T, PcfError>;

fn check_odd_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(PcfError::NotPrime(p));
    }
    if p == 2 {
        return Err(PcfError::EvenPrime);
    }
    Ok(())
}

/// A mod-p orbit type `(m, n1)` together with a cycle multiplication `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OrbitTypeCandidate {
    pub m: u64,
    pub n1: u64,
    pub r: u64,
}

impl OrbitTypeCandidate {
    pub fn implied_type(&self) -> OrbitType {
        OrbitType::new(self.m, self.r * self.n1)
    }

    pub fn relation(&self) -> CriticalRelation {
        CriticalRelation::new(self.m, self.r * self.n1)
    }
}

pub(crate) fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// Admissible cycle multiplications: divisors of `p - 1`, plus 3 when `p = 3`.
pub fn multiplication_factors(p: u64) -> Vec<u64> {
    let mut rs = divisors(p - 1);
    if p == 3 {
        rs.push(3);
    }
    rs
}

/// Candidate types built from the orbit types realised mod p.
pub fn candidate_types(p: u64) -> Result<Vec<OrbitTypeCandidate>> {
    check_odd_prime(p)?;
    let realised: BTreeSet<OrbitType> = (0..p)
        .map(|c| orbit_type_at(&BigUint::from(c), p, 1))
        .collect();
    let mut out = BTreeSet::new();
    for t in realised {
        if t.m == 0 {
            out.insert(OrbitTypeCandidate { m: 0, n1: t.n, r: 1 });
        } else {
            for r in multiplication_factors(p) {
                out.insert(OrbitTypeCandidate { m: t.m, n1: t.n, r });
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// `G(c) = f_c^{m+N}(0) - f_c^m(0)`, evaluated by iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CriticalRelation {
    pub m: u64,
    pub n: u64,
}

impl CriticalRelation {
    pub fn new(m: u64, n: u64) -> Self {
        CriticalRelation { m, n }
    }

    /// Default certification precision `4 (m + N) + 8`.
    pub fn default_precision(&self) -> u32 {
        (4 * (self.m + self.n) + 8) as u32
    }

    /// `(G(c), G'(c)) mod modulus`, with `z'_{i+1} = 2 z_i z'_i + 1`.
    pub fn eval(&self, c: &BigUint, modulus: &BigUint) -> (BigUint, BigUint) {
        let c = c % modulus;
        let mut z = BigUint::zero();
        let mut dz = BigUint::zero();
        let mut at_m = (BigUint::zero(), BigUint::zero());
        for i in 0..=(self.m + self.n) {
            if i == self.m {
                at_m = (z.clone(), dz.clone());
            }
            if i == self.m + self.n {
                break;
            }
            let nz = (&z * &z + &c) % modulus;
            dz = (&z * &dz * 2u32 + 1u32) % modulus;
            z = nz;
        }
        let g = (z + modulus - &at_m.0) % modulus;
        let dg = (dz + modulus - &at_m.1) % modulus;
        (g, dg)
    }
}

impl fmt::Display for CriticalRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "relation ({},{})", self.m, self.n)
    }
}

impl DifferentiableMap for CriticalRelation {
    fn eval_with_derivative(&self, x: &BigUint, modulus: &BigUint) -> (BigUint, BigUint) {
        self.eval(x, modulus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub frontier_cap: usize,
    /// For relations with `m >= 1`, skip residue classes mod p in which the
    /// critical point is periodic. No strictly preperiodic parameter lives
    /// there, and the periodic centers are multiple roots of `G` whose
    /// digit-lifting frontier grows without bound.
    pub skip_periodic_classes: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            frontier_cap: 10_000,
            skip_periodic_classes: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootCandidate {
    pub c: PAdicInt,
    /// `None` for residues that solve `G ≡ 0 mod p^K` without ever meeting
    /// the Hensel criterion.
    pub certificate: Option<HenselCertificate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSearch {
    pub roots: Vec<RootCandidate>,
    pub max_frontier: usize,
}

pub fn find_roots(relation: CriticalRelation, p: u64, k_target: u32) -> Result<Vec<RootCandidate>> {
    find_roots_with(relation, p, k_target, &SearchOptions::default()).map(|s| s.roots)
}

pub fn find_roots_with(
    relation: CriticalRelation,
    p: u64,
    k_target: u32,
    opts: &SearchOptions,
) -> Result<RootSearch> {
    check_odd_prime(p)?;
    if k_target == 0 {
        return Err(PAdicError::ZeroPrecision.into());
    }
    let pm = BigUint::from(p);
    let target_mod = pow_p(p, k_target);
    let mut frontier: Vec<BigUint> = (0..p)
        .map(BigUint::from)
        .filter(|c| relation.eval(c, &pm).0.is_zero())
        .filter(|c| {
            !(opts.skip_periodic_classes && relation.m > 0 && orbit_type_at(c, p, 1).m == 0)
        })
        .collect();
    let mut certified: Vec<RootCandidate> = Vec::new();
    let mut max_frontier = frontier.len();
    let mut level = 1u32;
    while !frontier.is_empty() {
        let mut survivors = Vec::new();
        for c in frontier {
            let (g, dg) = relation.eval(&c, &target_mod);
            let vg = valuation_of(&g, p, k_target);
            let vd = valuation_of(&dg, p, k_target);
            let hensel = match (vg, vd) {
                (_, Valuation::AtLeastPrecision) => false,
                (Valuation::AtLeastPrecision, Valuation::Finite(e)) => e < k_target,
                (Valuation::Finite(a), Valuation::Finite(e)) => a > 2 * e && e < k_target,
            };
            if hensel {
                let (root, cert) = hensel_refine(&relation, &c, p, k_target)?;
                certified.push(RootCandidate {
                    c: root,
                    certificate: Some(cert),
                });
            } else {
                survivors.push(c);
            }
        }
        if level >= k_target {
            for c in survivors {
                certified.push(RootCandidate {
                    c: PAdicInt::from_residue(c, p, k_target)?,
                    certificate: None,
                });
            }
            break;
        }
        let step = pow_p(p, level);
        let next_mod = pow_p(p, level + 1);
        let mut next = Vec::new();
        for c in &survivors {
            for d in 0..p {
                let cand = c + &step * d;
                if relation.eval(&cand, &next_mod).0.is_zero() {
                    next.push(cand);
                }
            }
        }
        level += 1;
        if next.len() > opts.frontier_cap {
            return Err(PcfError::FrontierExplosion {
                relation,
                level,
                size: next.len(),
                cap: opts.frontier_cap,
            });
        }
        max_frontier = max_frontier.max(next.len());
        frontier = next;
    }
    let mut seen = BTreeSet::new();
    certified.retain(|r| seen.insert(r.c.residue().clone()));
    certified.sort_by(|a, b| a.c.residue().cmp(b.c.residue()));
    Ok(RootSearch {
        roots: certified,
        max_frontier,
    })
}

/// True iff the orbit type of `c` at its full precision is exactly `claimed`.
pub fn exactness_filter(c: &PAdicInt, claimed: OrbitType) -> bool {
    orbit_type_at(c.residue(), c.p(), c.precision()) == claimed
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PcfKind {
    HyperbolicCenter,
    StrictlyPreperiodic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcfParameter {
    pub c: PAdicInt,
    pub orbit_type: OrbitType,
    pub kind: PcfKind,
    pub resolved_at: u32,
    pub certificate: HenselCertificate,
}

impl PcfParameter {
    pub fn to_json(&self) -> Value {
        json!({
            "c": self.c.to_digit_string(),
            "p": self.c.p(),
            "orbit_type": [self.orbit_type.m, self.orbit_type.n],
            "kind": self.kind,
            "resolved_at": self.resolved_at,
            "certified": true,
        })
    }

    /// Residue of `c` mod `p^k` as a machine integer, when it fits.
    pub fn residue_u64(&self, k: u32) -> Option<u64> {
        self.c.residue_mod(k).to_u64()
    }
}

/// A root that solved a relation but whose exact type is smaller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedRoot {
    pub c: PAdicInt,
    pub claimed: OrbitType,
    pub actual: OrbitType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcfReport {
    pub parameters: Vec<PcfParameter>,
    pub dropped: Vec<DroppedRoot>,
    pub uncertified: Vec<(CriticalRelation, PAdicInt)>,
    pub max_frontier: usize,
}

fn first_stable_level(c: &PAdicInt, t: OrbitType) -> u32 {
    let mut r = c.precision();
    while r > 1 && orbit_type_at(c.residue(), c.p(), r - 1) == t {
        r -= 1;
    }
    r
}

pub fn enumerate_pcf(p: u64, precision: Option<u32>) -> Result<Vec<PcfParameter>> {
    enumerate_pcf_detailed(p, precision).map(|r| r.parameters)
}

/// Enumeration with the dropped and uncertified roots kept for inspection.
pub fn enumerate_pcf_detailed(p: u64, precision: Option<u32>) -> Result<PcfReport> {
    let candidates = candidate_types(p)?;
    let per_candidate: Vec<Result<(OrbitTypeCandidate, RootSearch)>> = candidates
        .par_iter()
        .map(|cand| {
            let rel = cand.relation();
            let k = rel.default_precision().max(precision.unwrap_or(0));
            find_roots_with(rel, p, k, &SearchOptions::default()).map(|s| (*cand, s))
        })
        .collect();

    let mut parameters: Vec<PcfParameter> = Vec::new();
    let mut dropped = Vec::new();
    let mut uncertified = Vec::new();
    let mut max_frontier = 0;
    for item in per_candidate {
        let (cand, search) = item?;
        max_frontier = max_frontier.max(search.max_frontier);
        let claimed = cand.implied_type();
        for root in search.roots {
            let Some(cert) = root.certificate else {
                uncertified.push((cand.relation(), root.c));
                continue;
            };
            if !exactness_filter(&root.c, claimed) {
                let actual = orbit_type_at(root.c.residue(), p, root.c.precision());
                dropped.push(DroppedRoot {
                    c: root.c,
                    claimed,
                    actual,
                });
                continue;
            }
            let kind = if claimed.m == 0 {
                PcfKind::HyperbolicCenter
            } else {
                PcfKind::StrictlyPreperiodic
            };
            parameters.push(PcfParameter {
                resolved_at: first_stable_level(&root.c, claimed),
                c: root.c,
                orbit_type: claimed,
                kind,
                certificate: cert,
            });
        }
    }

    // Candidates searched at different precisions can return the same
    // parameter; compare at the coarsest precision in play.
    let k_min = parameters
        .iter()
        .map(|x| x.c.precision())
        .min()
        .unwrap_or(1);
    parameters.sort_by(|a, b| {
        (a.kind, a.orbit_type, a.c.residue_mod(k_min))
            .cmp(&(b.kind, b.orbit_type, b.c.residue_mod(k_min)))
    });
    let mut seen = BTreeSet::new();
    parameters.retain(|x| seen.insert(x.c.residue_mod(k_min)));

    Ok(PcfReport {
        parameters,
        dropped,
        uncertified,
        max_frontier,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountBounds {
    pub q_bound: BigUint,
    pub hyperbolic_bound: u64,
}

impl CountBounds {
    pub fn to_json(&self) -> Value {
        json!({
            "q_bound": crate::orbit::residue_json(&self.q_bound),
            "hyperbolic_bound": self.hyperbolic_bound,
        })
    }
}

/// `Q_p < sum 2^{m + r n}` over all triples with `m + n <= p`, and `(p-1)/2`.
pub fn count_bounds(p: u64) -> Result<CountBounds> {
    check_odd_prime(p)?;
    let mut q = BigUint::zero();
    for m in 0..p {
        for n in 1..=(p - m) {
            for r in multiplication_factors(p) {
                q += BigUint::from(1u32) << (m + r * n) as usize;
            }
        }
    }
    Ok(CountBounds {
        q_bound: q,
        hyperbolic_bound: (p - 1) / 2,
    })
}
