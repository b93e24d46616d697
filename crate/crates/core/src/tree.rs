//! Critical orbit trees inside the disk tree of `Z_p`.
//!
//! Vertices are closed disks `D(a, p^-l)`; the Gauss point `D(0, 1)` is the
//! root. Trees are stored compressed: only the root, the orbit endpoints and
//! their pairwise joins are kept, with unary chains folded into edge lengths.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::orbit::{orbit_mod, residue_json, OrbitError, OrbitType, Verdict};
use crate::padic::{pow_p, PAdicError, PAdicInt, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error(transparent)]
    PAdic(#[from] PAdicError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("vertices over {0} and {1} cannot be compared")]
    PrimeMismatch(u64, u64),
    #[error("shape check needs a finite classification")]
    NotFinite,
    #[error("shape violation: {0}")]
    ShapeViolation(String),
}

pub type Result<T> = std::result::Result<T, TreeError>;

/// The disk `D(center, p^-level)`. Ordered by level, then center.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiskVertex {
    pub level: u32,
    pub center: BigUint,
    pub p: u64,
}

impl DiskVertex {
    pub fn new(center: &BigUint, level: u32, p: u64) -> Self {
        DiskVertex {
            level,
            center: center % pow_p(p, level),
            p,
        }
    }

    pub fn gauss(p: u64) -> Self {
        DiskVertex {
            level: 0,
            center: BigUint::zero(),
            p,
        }
    }

    pub fn contains(&self, other: &DiskVertex) -> bool {
        other.level >= self.level && &other.center % pow_p(self.p, self.level) == self.center
    }

    /// `a mod p^l`
    pub fn label(&self) -> String {
        format!("{} mod {}^{}", self.center, self.p, self.level)
    }
}

/// Level of the smallest disk containing both vertices.
fn join_level(a: &DiskVertex, b: &DiskVertex) -> u32 {
    let top = a.level.min(b.level);
    let mut l = 0;
    while l < top {
        let m = pow_p(a.p, l + 1);
        if &a.center % &m != &b.center % &m {
            break;
        }
        l += 1;
    }
    l
}

/// Smallest disk containing `a` and `b`, capped at their common precision.
pub fn disk_join(a: &PAdicInt, b: &PAdicInt) -> Result<DiskVertex> {
    let diff = a.checked_sub(b).map_err(|_| TreeError::PrimeMismatch(a.p(), b.p()))?;
    let level = match diff.valuation() {
        Valuation::Finite(v) => v,
        Valuation::AtLeastPrecision => diff.precision(),
    };
    Ok(DiskVertex::new(a.residue(), level, a.p()))
}

/// Path distance through the join.
pub fn path_metric(v1: &DiskVertex, v2: &DiskVertex) -> Result<u64> {
    if v1.p != v2.p {
        return Err(TreeError::PrimeMismatch(v1.p, v2.p));
    }
    let j = join_level(v1, v2);
    Ok((v1.level - j) as u64 + (v2.level - j) as u64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEdge {
    pub parent: DiskVertex,
    pub child: DiskVertex,
    pub length: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitTree {
    pub p: u64,
    pub depth: u32,
    pub c: PAdicInt,
    /// Orbit type mod `p^depth`.
    pub orbit_type: OrbitType,
    /// Sorted by level, then center; the root comes first.
    pub vertices: Vec<DiskVertex>,
    pub edges: Vec<TreeEdge>,
    /// Orbit index `j` and the endpoint disk of `f^j(0)`.
    pub endpoint_labels: Vec<(usize, DiskVertex)>,
    /// `j -> j + 1`, with the last orbit point sent back into the cycle.
    pub induced_map: Vec<(usize, usize)>,
}

impl OrbitTree {
    pub fn root(&self) -> &DiskVertex {
        &self.vertices[0]
    }

    pub fn children(&self, v: &DiskVertex) -> Vec<&DiskVertex> {
        self.edges
            .iter()
            .filter(|e| &e.parent == v)
            .map(|e| &e.child)
            .collect()
    }

    pub fn parent(&self, v: &DiskVertex) -> Option<&DiskVertex> {
        self.edges.iter().find(|e| &e.child == v).map(|e| &e.parent)
    }

    pub fn gauss_degree(&self) -> usize {
        self.children(self.root()).len()
    }

    /// Non-root vertices with at least two children.
    pub fn branch_vertices(&self) -> Vec<&DiskVertex> {
        self.vertices[1..]
            .iter()
            .filter(|v| self.children(v).len() >= 2)
            .collect()
    }

    fn vertex_id(&self, v: &DiskVertex) -> usize {
        self.vertices
            .iter()
            .position(|w| w == v)
            .expect("edge endpoints are vertices")
    }

    fn orbit_indices(&self, v: &DiskVertex) -> Vec<usize> {
        self.endpoint_labels
            .iter()
            .filter(|(_, w)| w == v)
            .map(|(j, _)| *j)
            .collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        writeln!(out, "digraph orbit_tree {{").unwrap();
        writeln!(
            out,
            "  graph [p={}, depth={}, c=\"{}\", orbit_type=\"{}\"];",
            self.p,
            self.depth,
            self.c.to_digit_string(),
            self.orbit_type
        )
        .unwrap();
        for (i, v) in self.vertices.iter().enumerate() {
            let orbit = self.orbit_indices(v);
            if orbit.is_empty() {
                writeln!(out, "  n{i} [label=\"{}\"];", v.label()).unwrap();
            } else {
                let js: Vec<String> = orbit.iter().map(|j| j.to_string()).collect();
                writeln!(
                    out,
                    "  n{i} [label=\"{}\", orbit=\"{}\"];",
                    v.label(),
                    js.join(",")
                )
                .unwrap();
            }
        }
        for e in &self.edges {
            writeln!(
                out,
                "  n{} -> n{} [length={}];",
                self.vertex_id(&e.parent),
                self.vertex_id(&e.child),
                e.length
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "depth": self.depth,
            "c": self.c.to_digit_string(),
            "orbit_type": [self.orbit_type.m, self.orbit_type.n],
            "vertices": self.vertices.iter().enumerate().map(|(i, v)| json!({
                "id": format!("n{i}"),
                "center": residue_json(&v.center),
                "level": v.level,
                "label": v.label(),
                "orbit": self.orbit_indices(v),
            })).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| json!({
                "from": format!("n{}", self.vertex_id(&e.parent)),
                "to": format!("n{}", self.vertex_id(&e.child)),
                "length": e.length,
            })).collect::<Vec<_>>(),
            "induced_map": self.induced_map.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
        })
    }
}

/// Convex hull of the critical orbit mod `p^depth`, rooted at the Gauss point.
pub fn critical_orbit_tree(c: &PAdicInt, depth: u32) -> Result<OrbitTree> {
    let record = orbit_mod(c, depth)?;
    let p = c.p();
    let OrbitType { m, n } = record.orbit_type;
    let count = (m + n) as usize;
    let ends: Vec<DiskVertex> = record.sequence[..count]
        .iter()
        .map(|z| DiskVertex::new(z, depth, p))
        .collect();

    let mut set: BTreeSet<DiskVertex> = BTreeSet::new();
    set.insert(DiskVertex::gauss(p));
    for (i, a) in ends.iter().enumerate() {
        set.insert(a.clone());
        for b in &ends[i + 1..] {
            set.insert(DiskVertex::new(&a.center, join_level(a, b), p));
        }
    }
    let vertices: Vec<DiskVertex> = set.into_iter().collect();

    let mut edges = Vec::new();
    for v in &vertices[1..] {
        let parent = vertices
            .iter()
            .filter(|w| w.level < v.level && w.contains(v))
            .max_by_key(|w| w.level)
            .expect("the root contains every disk");
        edges.push(TreeEdge {
            parent: parent.clone(),
            child: v.clone(),
            length: v.level - parent.level,
        });
    }
    edges.sort_by(|a, b| (&a.parent, &a.child).cmp(&(&b.parent, &b.child)));

    let endpoint_labels = ends.iter().cloned().enumerate().collect();
    let induced_map = (0..count)
        .map(|j| (j, if j + 1 == count { m as usize } else { j + 1 }))
        .collect();
    Ok(OrbitTree {
        p,
        depth,
        c: record.c.clone(),
        orbit_type: record.orbit_type,
        vertices,
        edges,
        endpoint_labels,
        induced_map,
    })
}

/// Depth at which a finite orbit shows all of its structure.
pub fn default_depth(resolved_at: u32) -> u32 {
    resolved_at + 2
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeShapeReport {
    pub gauss_degree: usize,
    pub branching_levels: Vec<u32>,
    pub matches_mod_p: bool,
    pub extra_branch_count: usize,
    /// Children per branching vertex, keyed by vertex.
    pub splits: BTreeMap<DiskVertex, usize>,
}

impl TreeShapeReport {
    pub fn to_json(&self) -> Value {
        json!({
            "gauss_degree": self.gauss_degree,
            "branching_levels": self.branching_levels,
            "matches_mod_p": self.matches_mod_p,
            "extra_branch_count": self.extra_branch_count,
            "splits": self.splits.iter().map(|(v, k)| json!({"vertex": v.label(), "children": k})).collect::<Vec<_>>(),
        })
    }
}

/// Compares a tree with its mod-p tree. For odd `p` the result must have the
/// shape forced by the finite orbit type; for `p = 2` it is only descriptive.
pub fn shape_check(
    tree: &OrbitTree,
    tree_mod_p: &OrbitTree,
    verdict: &Verdict,
) -> Result<TreeShapeReport> {
    let finite = verdict.finite_type().ok_or(TreeError::NotFinite)?;
    let branch = tree.branch_vertices();
    let levels: BTreeSet<u32> = branch.iter().map(|v| v.level).collect();
    let splits: BTreeMap<DiskVertex, usize> = branch
        .iter()
        .map(|v| ((*v).clone(), tree.children(v).len()))
        .collect();
    // A mod-p tree has depth 1, so every non-root branching is extra.
    let report = TreeShapeReport {
        gauss_degree: tree.gauss_degree(),
        branching_levels: levels.iter().copied().collect(),
        matches_mod_p: levels.is_empty() && tree.gauss_degree() == tree_mod_p.gauss_degree(),
        extra_branch_count: levels.len(),
        splits,
    };
    if tree.p == 2 {
        return Ok(report);
    }

    let violation = |msg: String| Err(TreeError::ShapeViolation(msg));
    let OrbitType { m, n: n1 } = tree_mod_p.orbit_type;
    if finite.m == 0 {
        if report.gauss_degree as u64 != finite.n {
            return violation(format!(
                "periodic orbit of length {} but Gauss degree {}",
                finite.n, report.gauss_degree
            ));
        }
        if report.extra_branch_count != 0 {
            return violation("periodic orbit tree branches below the Gauss point".into());
        }
        return Ok(report);
    }
    if m != finite.m {
        return violation(format!("tail {} mod p but {} over Z_p", m, finite.m));
    }
    if report.gauss_degree as u64 != m + n1 {
        return violation(format!(
            "Gauss degree {} differs from m + n1 = {}",
            report.gauss_degree,
            m + n1
        ));
    }
    match report.extra_branch_count {
        0 if finite.n == n1 => Ok(report),
        1 if finite.n % n1 == 0 && finite.n > n1 => {
            let r = (finite.n / n1) as usize;
            if report.splits.len() as u64 != n1 {
                return violation(format!(
                    "{} vertices branch, expected the {n1} cycle vertices",
                    report.splits.len()
                ));
            }
            if let Some((v, k)) = report.splits.iter().find(|(_, k)| **k != r) {
                return violation(format!("{} splits into {k}, expected {r}", v.label()));
            }
            Ok(report)
        }
        e => violation(format!(
            "{e} branching levels for cycle growth {n1} -> {}",
            finite.n
        )),
    }
}
