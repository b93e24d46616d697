//! Atlas sweeps and report serialization.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use padic_orbits::report::{atlas, figures, run_suite, Suite, VerifyConfig, SCHEMA};
use padic_orbits::{enumerate_pcf, AtlasNode};

fn oracle_type(c: u64, m: u64) -> (u64, u64) {
    let mut seen = HashMap::new();
    let mut z = 0u64;
    let mut i = 0u64;
    loop {
        if let Some(&j) = seen.get(&z) {
            return (j, i - j);
        }
        seen.insert(z, i);
        z = (z * z + c) % m;
        i += 1;
    }
}

fn check_path(node: &AtlasNode, p: u64, path: &mut Vec<(u64, u64)>) {
    let r = node.residue.to_u64().unwrap();
    let m = p.pow(node.level);
    assert!(r < m);
    let t = oracle_type(r, m);
    assert_eq!((node.orbit_type.m, node.orbit_type.n), t, "p={p} {r} mod {m}");
    if let Some(&(pm, pn)) = path.last() {
        assert!(t.0 >= pm);
        assert_eq!(t.1 % pn, 0);
        if p != 2 && path[0].0 > 0 {
            assert_eq!(t.0, path[0].0);
        }
    }
    path.push(t);
    if !node.children.is_empty() {
        assert_eq!(node.children.len() as u64, p);
    }
    for ch in &node.children {
        assert_eq!(ch.level, node.level + 1);
        assert_eq!(ch.residue.to_u64().unwrap() % m, r);
        check_path(ch, p, path);
    }
    path.pop();
}

#[test]
fn atlas_labels_match_direct_iteration() {
    for (p, depth) in [(2u64, 3u32), (3, 3), (5, 3), (7, 3)] {
        let a = atlas(p, depth).unwrap();
        assert_eq!(a.roots.len() as u64, p);
        let total: u64 = (1..=depth).map(|j| p.pow(j)).sum();
        assert_eq!(a.nodes().len() as u64, total);
        for r in &a.roots {
            check_path(r, p, &mut Vec::new());
        }
    }
}

#[test]
fn atlas_flags_pcf_truncations() {
    for p in [3u64, 5, 7] {
        let depth = 3;
        let a = atlas(p, depth).unwrap();
        let params = enumerate_pcf(p, None).unwrap();
        for n in a.nodes() {
            let m = p.pow(n.level);
            let r = n.residue.to_u64().unwrap();
            let expect = params.iter().any(|x| x.residue_u64(n.level).unwrap() % m == r);
            assert_eq!(n.pcf, expect, "p={p} {r} mod {m}");
        }
    }
}

#[test]
fn atlas_dot_is_well_formed() {
    let dot = atlas(3, 2).unwrap().to_dot();
    assert!(dot.starts_with("digraph atlas {\n"));
    assert!(dot.ends_with("}\n"));
    // 12 nodes plus the root, 12 edges.
    assert_eq!(dot.matches(" -> ").count(), 12);
    assert_eq!(dot.matches("[label=").count(), 13);
}

#[test]
fn reports_are_deterministic() {
    let a = serde_json::to_string(&atlas(5, 2).unwrap().to_json()).unwrap();
    let b = serde_json::to_string(&atlas(5, 2).unwrap().to_json()).unwrap();
    assert_eq!(a, b);
    let cfg = VerifyConfig {
        samples: 5,
        seed: 9,
        ..VerifyConfig::default()
    };
    for suite in [Suite::Tail, Suite::C2, Suite::Lemma54] {
        let x = serde_json::to_string(&run_suite(suite, &cfg).unwrap().to_json()).unwrap();
        let y = serde_json::to_string(&run_suite(suite, &cfg).unwrap().to_json()).unwrap();
        assert_eq!(x, y);
    }
    let f1 = serde_json::to_string(&figures(5).unwrap().index_json()).unwrap();
    let f2 = serde_json::to_string(&figures(5).unwrap().index_json()).unwrap();
    assert_eq!(f1, f2);
}

#[test]
fn every_report_carries_the_schema() {
    let a = atlas(3, 1).unwrap().to_json();
    assert_eq!(a["schema"], SCHEMA);
    let f = figures(3).unwrap().index_json();
    assert_eq!(f["schema"], SCHEMA);
    assert_eq!(f["trees"].as_array().unwrap().len(), 4);
    let v = run_suite(Suite::Counts, &VerifyConfig::default()).unwrap().to_json();
    assert_eq!(v["schema"], SCHEMA);
    assert_eq!(v["passed"], true);
}

#[test]
fn provisional_banner_outside_the_tabulated_primes() {
    assert!(!figures(7).unwrap().provisional);
    assert!(figures(11).unwrap().provisional);
}
