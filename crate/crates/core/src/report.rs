//! Report assembly: parameter-space atlas, figure bundles and the
//! verification suites behind the `verify` command.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::linearization::{
    lemma54_claims, translation_cascade, verify_c2, C2Report, LinError,
};
use crate::orbit::{
    classify, cycle_multiplier, isometry_check, level_profile, orbit_mod, orbit_type_at,
    residue_json, ClassifyOptions, MultiplierOrder, OrbitError, OrbitType, Verdict,
};
use crate::padic::{is_prime, pow_p, PAdicError, PAdicInt};
use crate::pcf::{count_bounds, enumerate_pcf, multiplication_factors, PcfError, PcfKind, PcfParameter};
use crate::tree::{critical_orbit_tree, default_depth, shape_check, OrbitTree, TreeError, TreeShapeReport};

pub const SCHEMA: &str = "padic-orbits/1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error(transparent)]
    PAdic(#[from] PAdicError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Pcf(#[from] PcfError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Lin(#[from] LinError),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
}

pub type Result<T> = std::result::Result<T, ReportError>;

/// Wraps a body in the versioned top-level object.
pub fn envelope(kind: &str, body: Value) -> Value {
    let mut out = json!({ "schema": SCHEMA, "kind": kind });
    if let (Some(o), Value::Object(b)) = (out.as_object_mut(), body) {
        o.extend(b);
    }
    out
}

/// `0 → 1 → 2 → 2  (2,1)`
pub fn orbit_line(c: &PAdicInt, k: u32) -> Result<String> {
    let r = orbit_mod(c, k)?;
    Ok(format!("{}  {}", r.arrow_chain(), r.orbit_type))
}

/// Parameters known to be PCF over `Z_2`: 0, -1 and -2.
pub fn known_two_adic_pcf() -> [i64; 3] {
    [0, -1, -2]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtlasNode {
    pub residue: BigUint,
    pub level: u32,
    pub orbit_type: OrbitType,
    /// Truncation of a certified (or, for p = 2, known) PCF parameter.
    pub pcf: bool,
    pub children: Vec<AtlasNode>,
}

impl AtlasNode {
    fn to_json(&self) -> Value {
        json!({
            "residue": residue_json(&self.residue),
            "level": self.level,
            "orbit_type": [self.orbit_type.m, self.orbit_type.n],
            "pcf": self.pcf,
            "children": self.children.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn walk<'a>(&'a self, out: &mut Vec<&'a AtlasNode>) {
        out.push(self);
        for c in &self.children {
            c.walk(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atlas {
    pub p: u64,
    pub depth: u32,
    pub roots: Vec<AtlasNode>,
}

impl Atlas {
    pub fn nodes(&self) -> Vec<&AtlasNode> {
        let mut out = Vec::new();
        for r in &self.roots {
            r.walk(&mut out);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        envelope(
            "atlas",
            json!({
                "p": self.p,
                "depth": self.depth,
                "nodes": self.roots.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            }),
        )
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        writeln!(out, "digraph atlas {{").unwrap();
        writeln!(out, "  graph [p={}, depth={}];", self.p, self.depth).unwrap();
        writeln!(out, "  root [label=\"Z_{}\"];", self.p).unwrap();
        let mut nodes = self.nodes();
        nodes.sort_by(|a, b| (a.level, &a.residue).cmp(&(b.level, &b.residue)));
        let id = |n: &AtlasNode| format!("a{}_{}", n.level, n.residue);
        for n in &nodes {
            let style = if n.pcf { ", style=filled, fillcolor=gray" } else { "" };
            writeln!(
                out,
                "  {} [label=\"{} mod {}^{}\\n{}\"{}];",
                id(n),
                n.residue,
                self.p,
                n.level,
                n.orbit_type,
                style
            )
            .unwrap();
        }
        for n in &nodes {
            if n.level == 1 {
                writeln!(out, "  root -> {};", id(n)).unwrap();
            }
            for c in &n.children {
                writeln!(out, "  {} -> {};", id(n), id(c)).unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

fn pcf_residues(p: u64, depth: u32) -> Result<BTreeSet<BigUint>> {
    let modulus = pow_p(p, depth);
    if p == 2 {
        return Ok(known_two_adic_pcf()
            .iter()
            .map(|&c| PAdicInt::from_i64(c, 2, depth).map(|x| x.residue().clone()))
            .collect::<std::result::Result<_, _>>()?);
    }
    let precision = default_enum_precision(depth);
    Ok(enumerate_pcf(p, precision)?
        .into_iter()
        .map(|x| x.c.residue() % &modulus)
        .collect())
}

fn default_enum_precision(depth: u32) -> Option<u32> {
    // Enumeration precision already exceeds any practical atlas depth.
    if depth > 16 {
        Some(depth)
    } else {
        None
    }
}

fn atlas_node(
    residue: BigUint,
    level: u32,
    p: u64,
    depth: u32,
    pcf: &BTreeSet<BigUint>,
) -> AtlasNode {
    let orbit_type = orbit_type_at(&residue, p, level);
    let flagged = pcf.iter().any(|r| r % pow_p(p, level) == residue);
    let children = if level < depth {
        let step = pow_p(p, level);
        (0..p)
            .map(|d| atlas_node(&residue + &step * d, level + 1, p, depth, pcf))
            .collect()
    } else {
        Vec::new()
    };
    AtlasNode {
        residue,
        level,
        orbit_type,
        pcf: flagged,
        children,
    }
}

/// Breadth of all residues mod `p^j` for `j <= depth`, each with its type.
pub fn atlas(p: u64, depth: u32) -> Result<Atlas> {
    if !is_prime(p) {
        return Err(ReportError::NotPrime(p));
    }
    if depth == 0 {
        return Err(ReportError::ZeroDepth);
    }
    let pcf = pcf_residues(p, depth)?;
    let roots = (0..p)
        .into_par_iter()
        .map(|a| atlas_node(BigUint::from(a), 1, p, depth, &pcf))
        .collect();
    Ok(Atlas { p, depth, roots })
}

#[derive(Debug, Clone)]
pub struct FigureEntry {
    pub parameter: PcfParameter,
    pub tree: OrbitTree,
    pub tree_mod_p: OrbitTree,
    pub shape: TreeShapeReport,
}

impl FigureEntry {
    pub fn file_stem(&self) -> String {
        let t = self.parameter.orbit_type;
        format!(
            "p{}_m{}_n{}_c{}",
            self.tree.p,
            t.m,
            t.n,
            self.parameter.c.residue_mod(self.tree.depth)
        )
    }
}

#[derive(Debug, Clone)]
pub struct FigureBundle {
    pub p: u64,
    /// Completeness is only claimed for p in {3, 5, 7}.
    pub provisional: bool,
    pub entries: Vec<FigureEntry>,
}

impl FigureBundle {
    pub fn index_json(&self) -> Value {
        envelope(
            "figures",
            json!({
                "p": self.p,
                "provisional": self.provisional,
                "trees": self.entries.iter().map(|e| json!({
                    "file": format!("{}.dot", e.file_stem()),
                    "orbit_type": [e.parameter.orbit_type.m, e.parameter.orbit_type.n],
                    "kind": e.parameter.kind,
                    "resolved_at": e.parameter.resolved_at,
                    "residue": residue_json(&e.parameter.c.residue_mod(e.tree.depth)),
                    "depth": e.tree.depth,
                    "shape": e.shape.to_json(),
                })).collect::<Vec<_>>(),
            }),
        )
    }
}

pub fn tree_for_parameter(x: &PcfParameter, depth: Option<u32>) -> Result<FigureEntry> {
    let depth = depth.unwrap_or_else(|| default_depth(x.resolved_at));
    let tree = critical_orbit_tree(&x.c, depth)?;
    let tree_mod_p = critical_orbit_tree(&x.c, 1)?;
    let verdict = if x.kind == PcfKind::HyperbolicCenter {
        Verdict::PeriodicExact { n: x.orbit_type.n }
    } else {
        Verdict::PreperiodicFinite {
            m: x.orbit_type.m,
            n: x.orbit_type.n,
            resolved_at: x.resolved_at,
        }
    };
    let shape = shape_check(&tree, &tree_mod_p, &verdict)?;
    Ok(FigureEntry {
        parameter: x.clone(),
        tree,
        tree_mod_p,
        shape,
    })
}

pub fn figures(p: u64) -> Result<FigureBundle> {
    let entries = enumerate_pcf(p, None)?
        .iter()
        .map(|x| tree_for_parameter(x, None))
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureBundle {
        p,
        provisional: ![3, 5, 7].contains(&p),
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    C2,
    Lemma54,
    Pezda,
    Tail,
    Counts,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::C2 => "c2",
            Suite::Lemma54 => "lemma54",
            Suite::Pezda => "pezda",
            Suite::Tail => "tail",
            Suite::Counts => "counts",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c2" => Ok(Suite::C2),
            "lemma54" => Ok(Suite::Lemma54),
            "pezda" => Ok(Suite::Pezda),
            "tail" => Ok(Suite::Tail),
            "counts" => Ok(Suite::Counts),
            other => Err(ReportError::UnknownSuite(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyConfig {
    pub primes: Vec<u64>,
    pub ks: (u32, u32),
    /// Levels `k + 1 ..= k + i_max` are checked in the c2 suite.
    pub i_max: u32,
    /// Random cases per prime (tail, pezda, lemma54) or tail seeds per (k, l) for c2.
    pub samples: usize,
    pub seed: u64,
    pub k_max: u32,
    pub n_max: u32,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            primes: vec![3, 5, 7],
            ks: (2, 5),
            i_max: 6,
            samples: 20,
            seed: 0,
            k_max: 8,
            n_max: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub suite: Suite,
    pub cases: Vec<CaseResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CaseResult> {
        self.cases.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> Value {
        envelope(
            "verify",
            json!({
                "suite": self.suite.name(),
                "passed": self.passed(),
                "total": self.cases.len(),
                "failed": self.failures().len(),
                "cases": self.cases.iter().map(|c| json!({
                    "name": c.name,
                    "passed": c.passed,
                    "detail": c.detail,
                })).collect::<Vec<_>>(),
            }),
        )
    }

    /// One summary line per case.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{mark}  {}", c.name).unwrap();
        }
        writeln!(
            out,
            "{}: {}/{} passed",
            self.suite.name(),
            self.cases.len() - self.failures().len(),
            self.cases.len()
        )
        .unwrap();
        out
    }
}

fn case_seed(seed: u64, salt: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt
}

fn random_residue(rng: &mut ChaCha8Rng, p: u64, k: u32) -> BigUint {
    (0..k).fold(BigUint::zero(), |acc, _| acc * p + rng.gen_range(0..p))
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<VerifyReport> {
    for &p in &cfg.primes {
        if !is_prime(p) {
            return Err(ReportError::NotPrime(p));
        }
    }
    let cases = match suite {
        Suite::C2 => suite_c2(cfg)?,
        Suite::Lemma54 => suite_lemma54(cfg)?,
        Suite::Pezda => suite_pezda(cfg)?,
        Suite::Tail => suite_tail(cfg)?,
        Suite::Counts => suite_counts(cfg)?,
    };
    Ok(VerifyReport { suite, cases })
}

fn c2_case(k: u32, l: u64, seed: Option<u64>, i_max: u32) -> Result<CaseResult> {
    let precision = k + i_max + 2;
    let name = match seed {
        Some(s) => format!("k={k} l={l} seed={s}"),
        None => format!("k={k} l={l}"),
    };
    let report: C2Report = match verify_c2(k, l, seed, i_max, precision) {
        Ok(r) => r,
        Err(LinError::C2Violation(r)) => *r,
        Err(e) => return Err(e.into()),
    };
    Ok(CaseResult {
        name,
        passed: report.passed(),
        detail: report.to_json(),
    })
}

fn suite_c2(cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
    let mut jobs = Vec::new();
    for k in cfg.ks.0..=cfg.ks.1 {
        for l in 1..=2u64 {
            jobs.push((k, l, None));
            for s in 0..cfg.samples as u64 {
                jobs.push((k, l, Some(case_seed(cfg.seed, (k as u64) << 40 | l << 32 | s))));
            }
        }
    }
    jobs.par_iter()
        .map(|&(k, l, seed)| c2_case(k, l, seed, cfg.i_max))
        .collect()
}

fn suite_lemma54(cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
    let n_max = cfg.n_max;
    let precision = n_max + 8;
    let mut rng = ChaCha8Rng::seed_from_u64(case_seed(cfg.seed, 54));
    let mut cases = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        // lambda = 4 + 9 * (1 or 2) + 27 * T, so lambda ≡ 4 mod 9 but not mod 27.
        let mid = rng.gen_range(1..3u32);
        let tail = random_residue(&mut rng, 3, precision - 3);
        let lam_res = (BigUint::from(4u32) + BigUint::from(9 * mid) + tail * 27u32)
            % pow_p(3, precision);
        let lambda = PAdicInt::from_residue(lam_res, 3, precision)?;
        let j = rng.gen_range(0..4u32);
        let unit = rng.gen_range(1..3u32) + 3 * rng.gen_range(0..3u32);
        let v = PAdicInt::from_residue(BigUint::from(unit) * pow_p(3, j), 3, precision)?;
        let rows = lemma54_claims(&lambda, n_max)?;
        let claims_ok = rows.iter().all(|r| r.claim1 && r.claim2);
        let cascade_n = n_max.min(precision - j - 1);
        let cascade = translation_cascade(&lambda, &v, cascade_n);
        let cascade_ok = cascade
            .as_ref()
            .map(|s| s.iter().all(|x| x.constant == 1 || x.constant == 2))
            .unwrap_or(false);
        cases.push(CaseResult {
            name: format!("lambda={} v={}", lambda.residue(), v.residue()),
            passed: claims_ok && cascade_ok,
            detail: json!({
                "claims": rows,
                "cascade": match &cascade {
                    Ok(s) => json!(s),
                    Err(e) => json!({"error": e.to_string()}),
                },
            }),
        });
    }
    Ok(cases)
}

/// Cycle-length ratios between consecutive levels must be admissible, and
/// certified finite orbits multiply their cycle at most once.
fn suite_pezda(cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
    let mut cases = Vec::new();
    for &p in &cfg.primes {
        if p == 2 {
            continue;
        }
        let allowed: BTreeSet<u64> = multiplication_factors(p).into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(case_seed(cfg.seed, p));
        let samples: Vec<BigUint> = (0..cfg.samples)
            .map(|_| random_residue(&mut rng, p, cfg.k_max))
            .collect();
        let bad: Vec<Value> = samples
            .par_iter()
            .filter_map(|c| {
                let t: Vec<OrbitType> = (1..=cfg.k_max).map(|k| orbit_type_at(c, p, k)).collect();
                // Each step multiplies n by 1, by p, or (at most once) by r.
                let ratios: Option<Vec<u64>> = t
                    .windows(2)
                    .map(|w| (w[1].n % w[0].n == 0).then(|| w[1].n / w[0].n))
                    .collect();
                let ok = ratios.is_some_and(|rs| {
                    let r_steps: Vec<u64> = rs.into_iter().filter(|&x| x != 1 && x != p).collect();
                    r_steps.len() <= 1 && r_steps.iter().all(|x| allowed.contains(x))
                });
                (!ok).then(|| json!({"c": c.to_string(), "types": t}))
            })
            .collect();
        cases.push(CaseResult {
            name: format!("p={p} cycle grows by p or once by r ({} samples)", cfg.samples),
            passed: bad.is_empty(),
            detail: json!({ "violations": bad }),
        });

        let params = enumerate_pcf(p, None)?;
        let mut bad = Vec::new();
        for x in &params {
            let prof = level_profile(&x.c, x.c.precision())?;
            let types = prof.types();
            let mults = types.windows(2).filter(|w| w[1].n != w[0].n).count();
            let n1 = types[0].n;
            let r = x.orbit_type.n / n1;
            let record = orbit_mod(&x.c, 1)?;
            let (_, order) = cycle_multiplier(&x.c, &record)?;
            // n / n1 must be 1, the multiplier order r, or r p^e.
            let ms_ok = match order {
                MultiplierOrder::Infinity => r == 1,
                MultiplierOrder::Finite(ord) => {
                    let mut q = r;
                    if q != 1 {
                        if q % ord != 0 {
                            false
                        } else {
                            q /= ord;
                            while q % p == 0 {
                                q /= p;
                            }
                            q == 1
                        }
                    } else {
                        true
                    }
                }
            };
            if mults > 1 || !allowed.contains(&r) || !ms_ok {
                bad.push(json!({
                    "c": x.c.to_digit_string(),
                    "types": types,
                    "multiplier_order": order,
                }));
            }
        }
        cases.push(CaseResult {
            name: format!("p={p} PCF cycles multiply at most once"),
            passed: bad.is_empty(),
            detail: json!({ "parameters": params.len(), "violations": bad }),
        });
    }
    Ok(cases)
}

/// Tails never shrink, cycle lengths divide, and for odd p a strictly
/// preperiodic tail mod p stays fixed.
fn suite_tail(cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
    let mut cases = Vec::new();
    for &p in &cfg.primes {
        let mut rng = ChaCha8Rng::seed_from_u64(case_seed(cfg.seed, 1000 + p));
        let samples: Vec<BigUint> = (0..cfg.samples)
            .map(|_| random_residue(&mut rng, p, cfg.k_max))
            .collect();
        let bad: Vec<Value> = samples
            .par_iter()
            .filter_map(|c| {
                let t: Vec<OrbitType> = (1..=cfg.k_max).map(|k| orbit_type_at(c, p, k)).collect();
                let mono = t.windows(2).all(|w| w[1].m >= w[0].m && w[1].n % w[0].n == 0);
                let fixed_tail = p == 2 || t[0].m == 0 || t.iter().all(|x| x.m == t[0].m);
                (!(mono && fixed_tail)).then(|| json!({"c": c.to_string(), "types": t}))
            })
            .collect();
        cases.push(CaseResult {
            name: format!("p={p} tail monotone and fixed ({} samples, k<={})", cfg.samples, cfg.k_max),
            passed: bad.is_empty(),
            detail: json!({ "violations": bad }),
        });
    }
    Ok(cases)
}

/// Expected PCF count for the primes whose tables are known.
pub fn expected_pcf_count(p: u64) -> Option<usize> {
    match p {
        3 => Some(4),
        5 => Some(7),
        7 => Some(10),
        _ => None,
    }
}

fn suite_counts(cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
    let mut cases = Vec::new();
    for &p in &cfg.primes {
        if p == 2 {
            continue;
        }
        let params = enumerate_pcf(p, None)?;
        let bounds = count_bounds(p)?;
        let centers: Vec<&PcfParameter> = params
            .iter()
            .filter(|x| x.kind == PcfKind::HyperbolicCenter && !x.c.is_zero())
            .collect();
        let qr_ok = centers.iter().all(|x| {
            let minus_c = (p - x.c.residue_mod_p()) % p;
            (1..p).any(|y| y * y % p == minus_c)
        });
        let count_ok = expected_pcf_count(p).is_none_or(|e| e == params.len());
        let q_ok = BigUint::from(params.len()) < bounds.q_bound;
        let hyp_ok = centers.len() as u64 <= bounds.hyperbolic_bound;
        cases.push(CaseResult {
            name: format!("p={p} count {}", params.len()),
            passed: count_ok && q_ok && hyp_ok && qr_ok,
            detail: json!({
                "count": params.len(),
                "expected": expected_pcf_count(p),
                "bounds": bounds.to_json(),
                "nonzero_hyperbolic_centers": centers.len(),
                "centers_quadratic_residue": qr_ok,
                "types": params.iter().map(|x| [x.orbit_type.m, x.orbit_type.n]).collect::<Vec<_>>(),
            }),
        });
    }
    Ok(cases)
}

/// Sampled unit pairs in a common residue disk, checked for isometry.
pub fn isometry_sweep(p: u64, samples: usize, precision: u32, seed: u64) -> Result<Vec<(BigUint, BigUint, BigUint)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(case_seed(seed, 77 + p));
    let mut failures = Vec::new();
    for _ in 0..samples {
        let c = random_residue(&mut rng, p, precision);
        let mut a1 = random_residue(&mut rng, p, precision);
        if (&a1 % p).is_zero() {
            a1 += 1u32;
        }
        let a2 = (&a1 + random_residue(&mut rng, p, precision - 1) * p) % pow_p(p, precision);
        let pc = PAdicInt::from_residue(c.clone(), p, precision)?;
        let x1 = PAdicInt::from_residue(a1.clone(), p, precision)?;
        let x2 = PAdicInt::from_residue(a2.clone(), p, precision)?;
        if !isometry_check(&pc, &x1, &x2)? {
            failures.push((c, a1, a2));
        }
    }
    Ok(failures)
}

/// Classification wrapped for the CLI, with inconclusive windows reported
/// as a verdict instead of an error.
pub fn classify_json(c: &PAdicInt, opts: ClassifyOptions) -> Result<Value> {
    match classify(c, opts) {
        Ok(cl) => {
            let mut body = cl.to_json();
            if let Some(r) = cl.resolved_at() {
                body["resolved_at"] = json!(r);
            }
            Ok(envelope("classification", body))
        }
        Err(OrbitError::Inconclusive(reason)) => Ok(envelope(
            "classification",
            json!({ "verdict": "inconclusive", "reason": reason }),
        )),
        Err(e) => Err(e.into()),
    }
}
