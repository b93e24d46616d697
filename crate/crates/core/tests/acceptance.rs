//! Acceptance criteria 1-9, one test and one printed line per criterion.
//!
//! Run with `cargo test -p padic-orbits --test acceptance -- --nocapture
//! --test-threads 1` to see the lines in order.

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use padic_orbits::report::{figures, isometry_sweep, run_suite, Suite, VerifyConfig};
use padic_orbits::{
    c2_parameter, enumerate_pcf, fixed_points, level_profile, lemma54_claims,
    radius_lower_bound, translation_cascade, OrbitType, PAdicInt, PcfKind, PcfParameter,
    RadiusExp, Valuation,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, name: &str, outcome: Result<String, String>) {
    match outcome {
        Ok(detail) => println!("acceptance {n} PASS  {name}: {detail}"),
        Err(why) => {
            println!("acceptance {n} FAIL  {name}: {why}");
            panic!("acceptance {n} failed: {why}");
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(budget: Duration, took: Duration, what: &str) -> Result<(), String> {
    ensure(took < budget, || format!("{what} took {took:.2?}, budget {budget:?}"))
}

/// Orbit of 0 under `z^2 + c mod m`, up to and including the first repeat.
fn oracle_orbit(c: u64, m: u64) -> (Vec<u64>, (u64, u64)) {
    let mut seen = HashMap::new();
    let mut seq = Vec::new();
    let mut z = 0u64;
    loop {
        if let Some(&i) = seen.get(&z) {
            let n = seq.len() - i;
            seq.push(z);
            return (seq, (i as u64, n as u64));
        }
        seen.insert(z, seq.len());
        seq.push(z);
        z = ((z as u128 * z as u128 + c as u128) % m as u128) as u64;
    }
}

/// Tail and cycle length by Floyd's tortoise and hare.
fn oracle_type(c: u64, m: u64) -> (u64, u64) {
    let f = |z: u64| ((z as u128 * z as u128 + c as u128) % m as u128) as u64;
    let (mut slow, mut fast) = (f(0), f(f(0)));
    while slow != fast {
        slow = f(slow);
        fast = f(f(fast));
    }
    let mut mu = 0;
    slow = 0;
    while slow != fast {
        slow = f(slow);
        fast = f(fast);
        mu += 1;
    }
    let mut lam = 1;
    fast = f(slow);
    while slow != fast {
        fast = f(fast);
        lam += 1;
    }
    (mu, lam)
}

fn with_type(ps: &[PcfParameter], m: u64, n: u64) -> Vec<&PcfParameter> {
    ps.iter().filter(|x| x.orbit_type == OrbitType::new(m, n)).collect()
}

#[test]
fn criterion_1_pcf_counts() {
    let outcome = (|| {
        let mut parts = Vec::new();
        for (p, want) in [(3u64, 4usize), (5, 7), (7, 10)] {
            let t = Instant::now();
            let ps = enumerate_pcf(p, None).map_err(|e| e.to_string())?;
            within(Duration::from_secs(10), t.elapsed(), &format!("p={p}"))?;
            ensure(ps.len() == want, || format!("p={p}: {} parameters, expected {want}", ps.len()))?;
            parts.push(format!("p={p}: {}", ps.len()));
        }
        Ok(parts.join(", "))
    })();
    report(1, "PCF counts", outcome);
}

#[test]
fn criterion_2_orbit_tables() {
    let outcome = (|| {
        let cases: [(u64, (u64, u64), u32, Vec<u64>); 6] = [
            (3, (2, 3), 2, vec![0, 1, 2, 5, 8, 2]),
            (5, (2, 8), 3, vec![0, 107, 56, 118, 31, 68, 106, 93, 6, 18, 56]),
            (5, (2, 2), 2, vec![0, 18, 17, 7, 17]),
            (7, (3, 6), 2, vec![0, 8, 23, 47, 12, 5, 33, 19, 26, 47]),
            (7, (3, 4), 2, vec![0, 11, 34, 40, 43, 47, 15, 40]),
            (7, (2, 3), 2, vec![0, 26, 16, 37, 23, 16]),
        ];
        let mut tables = HashMap::new();
        for (p, (m, n), k, want) in cases.iter() {
            let ps = tables
                .entry(*p)
                .or_insert_with(|| enumerate_pcf(*p, None).unwrap());
            let modulus = p.pow(*k);
            let hit = with_type(ps, *m, *n).into_iter().any(|x| {
                let c = x.residue_u64(*k).unwrap();
                let lib = padic_orbits::orbit_mod(&x.c, *k).unwrap();
                let lib_seq: Vec<u64> = lib.sequence.iter().map(|z| z.to_u64().unwrap()).collect();
                oracle_orbit(c, modulus).0 == *want && lib_seq == *want
            });
            ensure(hit, || format!("p={p} ({m},{n}) mod {p}^{k} sequence not reproduced"))?;
        }
        Ok(format!("{} displayed sequences reproduced exactly", cases.len()))
    })();
    report(2, "orbit tables", outcome);
}

/// The parameters exercised by criteria 3 and 4.
fn near_minus_two_family() -> Vec<(u32, u64, u64, PAdicInt)> {
    let mut out = Vec::new();
    for k in 2..=5u32 {
        for l in 1..=2u64 {
            for seed in 0..20u64 {
                let s = 1000 * k as u64 + 100 * l + seed;
                out.push((k, l, s, c2_parameter(k, l, Some(s), k + 8).unwrap()));
            }
        }
    }
    out
}

#[test]
fn criterion_3_near_minus_two_orbit_types() {
    let outcome = (|| {
        let t = Instant::now();
        let family = near_minus_two_family();
        let mut failures = Vec::new();
        for (k, l, seed, c) in &family {
            let prof = level_profile(c, k + 6).map_err(|e| e.to_string())?;
            let cr = c.residue().to_u64().unwrap();
            for j in 1..=k + 6 {
                let want = if j <= *k { (2, 1) } else { (2, 3u64.pow(j - k)) };
                let lib = prof.at(j).map(|t| (t.m, t.n));
                let direct = oracle_type(cr % 3u64.pow(j), 3u64.pow(j));
                if lib != Some(want) || direct != want {
                    failures.push(format!("k={k} l={l} seed={seed} j={j}: {lib:?}"));
                }
            }
        }
        within(Duration::from_secs(30), t.elapsed(), "grid")?;
        ensure(failures.is_empty(), || failures.join("; "))?;
        Ok(format!("{} parameters, levels 1..k+6, zero failures", family.len()))
    })();
    report(3, "near -2 orbit types", outcome);
}

#[test]
fn criterion_4_linearization_radius() {
    let outcome = (|| {
        let (r, _) = radius_lower_bound(&PAdicInt::from_i64(4, 3, 20).unwrap())
            .map_err(|e| e.to_string())?;
        ensure(r == RadiusExp::new(3, 2), || format!("radius exponent {r}, expected 3/2"))?;
        let mut outside = BTreeSet::new();
        let mut checked = 0;
        for (k, l, seed, c) in near_minus_two_family() {
            checked += 1;
            let d = match fixed_points(&c) {
                Ok(fp) => {
                    let y = c.checked_mul(&c).unwrap().checked_add(&c).unwrap();
                    y.checked_sub(&fp.x_plus).unwrap().valuation()
                }
                Err(_) => {
                    outside.insert((k, l, seed, "no fixed point in Z_3".to_string()));
                    continue;
                }
            };
            if !(d == Valuation::AtLeastPrecision || d >= Valuation::Finite(2)) {
                outside.insert((k, l, seed, format!("v(f_c^2(0) - x) = {d}")));
            }
        }
        let ks: BTreeSet<u32> = outside.iter().map(|x| x.0).collect();
        ensure(outside.is_empty(), || {
            format!(
                "radius 3/2 exact, but the in-disk check fails for {} of {checked} parameters (k in {ks:?}); first: {:?}",
                outside.len(),
                outside.iter().next().unwrap()
            )
        })?;
        Ok(format!("radius 3^(-3/2); in-disk holds for all {checked} parameters"))
    })();
    report(4, "linearization radius", outcome);
}

#[test]
fn criterion_5_multiplier_powers() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = 16u32;
        let modulus = 3u64.pow(k);
        let mut failures = Vec::new();
        for _ in 0..50 {
            let lam = loop {
                let x = 4 + 9 * rng.gen_range(0..modulus / 9);
                if x % 27 != 4 {
                    break x;
                }
            };
            let lambda = PAdicInt::from_residue(BigUint::from(lam), 3, k).unwrap();
            let rows = lemma54_claims(&lambda, 10).map_err(|e| e.to_string())?;
            if !rows.iter().all(|r| r.claim1 && r.claim2) || rows.len() != 10 {
                failures.push(format!("lambda={lam}: claims {rows:?}"));
            }
            let j = rng.gen_range(0..3u32);
            let v = rng.gen_range(1..3u64) * 3u64.pow(j);
            let vv = PAdicInt::from_residue(BigUint::from(v), 3, k).unwrap();
            match translation_cascade(&lambda, &vv, 10) {
                Ok(steps) if steps.iter().all(|s| s.constant == 1 || s.constant == 2) => {}
                other => failures.push(format!("lambda={lam} v={v}: {other:?}")),
            }
        }
        ensure(failures.is_empty(), || failures.join("; "))?;
        Ok("50 lambdas, n <= 10, claims hold and constants in {1,2}".to_string())
    })();
    report(5, "multiplier powers and cascade", outcome);
}

#[test]
fn criterion_6_tree_shapes() {
    let outcome = (|| {
        let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
        let mut trees = 0;
        for p in [3u64, 5, 7] {
            let bundle = figures(p).map_err(|e| e.to_string())?;
            for e in &bundle.entries {
                trees += 1;
                let t = e.parameter.orbit_type;
                let c = e.parameter.residue_u64(1).unwrap();
                let n1 = oracle_type(c, p).1;
                ensure(e.shape.gauss_degree as u64 == t.m + n1, || {
                    format!("p={p} {t}: Gauss degree {}, expected {}", e.shape.gauss_degree, t.m + n1)
                })?;
                ensure(e.shape.extra_branch_count <= 1, || format!("p={p} {t}: extra branches"))?;
                let path = golden.join(format!("p{p}/{}.dot", e.file_stem()));
                let want = std::fs::read_to_string(&path)
                    .map_err(|err| format!("{}: {err}", path.display()))?;
                ensure(e.tree.to_dot() == want, || format!("{} differs", path.display()))?;
                let expect_levels = match (p, t.m, t.n) {
                    (3, 2, 3) => Some(vec![1]),
                    (5, 2, 8) => Some(vec![2]),
                    _ => None,
                };
                if let Some(levels) = expect_levels {
                    ensure(e.shape.branching_levels == levels, || {
                        format!("p={p} {t}: branching levels {:?}", e.shape.branching_levels)
                    })?;
                }
            }
        }
        ensure(trees == 21, || format!("{trees} trees, expected 4 + 7 + 10"))?;
        Ok(format!("{trees} trees match golden DOT files and shape rules"))
    })();
    report(6, "tree shapes", outcome);
}

#[test]
fn criterion_7_property_suites() {
    let outcome = (|| {
        let t = Instant::now();
        let cfg = VerifyConfig {
            primes: vec![3, 5, 7],
            samples: 500,
            seed: 7,
            k_max: 8,
            ..VerifyConfig::default()
        };
        let mut lines = Vec::new();
        for suite in [Suite::Tail, Suite::Pezda, Suite::Counts] {
            let r = run_suite(suite, &cfg).map_err(|e| e.to_string())?;
            let bad: Vec<String> = r.failures().iter().map(|c| c.name.clone()).collect();
            ensure(bad.is_empty(), || format!("{}: {}", suite.name(), bad.join(", ")))?;
            lines.push(format!("{} {}/{}", suite.name(), r.cases.len(), r.cases.len()));
        }
        for p in [3u64, 5, 7] {
            let bad = isometry_sweep(p, 500, 8, 7).map_err(|e| e.to_string())?;
            ensure(bad.is_empty(), || format!("isometry p={p}: {:?}", bad.first()))?;
            // Hyperbolic centers other than 0: at most (p-1)/2, -c a square mod p.
            let ps = enumerate_pcf(p, None).map_err(|e| e.to_string())?;
            let centers: Vec<_> = ps
                .iter()
                .filter(|x| x.kind == PcfKind::HyperbolicCenter && !x.c.is_zero())
                .collect();
            ensure(centers.len() as u64 <= (p - 1) / 2, || format!("p={p}: {} centers", centers.len()))?;
            for x in centers {
                let minus_c = (p - x.c.residue_mod_p()) % p;
                ensure((1..p).any(|y| y * y % p == minus_c), || format!("p={p}: -c not a square"))?;
            }
        }
        lines.push("isometry 1500/1500".into());
        within(Duration::from_secs(60), t.elapsed(), "property suites")?;
        Ok(lines.join(", "))
    })();
    report(7, "property suites", outcome);
}

/// Residues mod `p^(depth+margin)` whose orbit type is the same at every
/// level from `depth` to `depth + margin`.
fn stable_lifts(p: u64, depth: u32, margin: u32) -> Vec<u64> {
    let mut frontier: Vec<(u64, (u64, u64))> = (0..p.pow(depth))
        .map(|c| (c, oracle_type(c, p.pow(depth))))
        .collect();
    for level in depth + 1..=depth + margin {
        let m = p.pow(level);
        let step = p.pow(level - 1);
        frontier = frontier
            .into_iter()
            .flat_map(|(c, t)| (0..p).map(move |d| (c + d * step, t)))
            .filter(|&(c, t)| oracle_type(c, m) == t)
            .collect();
    }
    frontier.into_iter().map(|(c, _)| c).collect()
}

#[test]
fn criterion_8_brute_force_equivalence() {
    let outcome = (|| {
        let depth = 6;
        let mut parts = Vec::new();
        for p in [3u64, 5] {
            let pcf: BTreeSet<u64> = enumerate_pcf(p, None)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|x| x.residue_u64(depth).unwrap())
                .collect();
            // Stable from level depth-1 to depth: a superset of the parameters.
            let loose: BTreeSet<u64> = stable_lifts(p, depth - 1, 1).into_iter().collect();
            ensure(pcf.is_subset(&loose), || format!("p={p}: margin-0 scan misses a parameter"))?;
            // Stable through depth-1 further levels, truncated back: exact. A
            // class at distance p^-j from a superattracting center keeps its
            // type up to level 2j, and j <= depth-1 inside a class mod p^depth.
            let m = p.pow(depth);
            let scan: BTreeSet<u64> =
                stable_lifts(p, depth, depth - 1).into_iter().map(|c| c % m).collect();
            ensure(scan == pcf, || {
                let missed: Vec<_> = pcf.difference(&scan).collect();
                let spurious: Vec<_> = scan.difference(&pcf).collect();
                format!("p={p}: missed {missed:?}, spurious {spurious:?}")
            })?;
            parts.push(format!("p={p}: {} residues mod {p}^{depth}", scan.len()));
        }
        Ok(parts.join(", "))
    })();
    report(8, "brute-force equivalence", outcome);
}

#[test]
fn criterion_9_two_adic_smoke() {
    let outcome = (|| {
        let c = PAdicInt::from_i64(-2, 2, 8).unwrap();
        let prof = level_profile(&c, 4).map_err(|e| e.to_string())?;
        let got: Vec<(u64, u64)> = prof.types().iter().map(|t| (t.m, t.n)).collect();
        let want = vec![(0, 1), (1, 1), (2, 1), (2, 1)];
        let direct: Vec<(u64, u64)> = (1..=4).map(|k| oracle_type(254 % 2u64.pow(k), 2u64.pow(k))).collect();
        ensure(got == want && direct == want, || format!("types {got:?}"))?;
        Ok("(0,1), (1,1), (2,1), (2,1)".to_string())
    })();
    report(9, "p=2 smoke test", outcome);
}
