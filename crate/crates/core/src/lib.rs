//! Critical-orbit dynamics of `z^2 + c` over the p-adic integers, computed
//! exactly at fixed precision.

pub mod orbit;
pub mod linearization;
pub mod padic;
pub mod pcf;
pub mod report;
pub mod tree;

pub use orbit::{
    classify, cycle_multiplier, isometry_check, level_profile, local_affine_map, orbit_mod,
    Certainty, Classification, ClassifyOptions, LevelProfile, LocalAffineMap, MultiplierOrder,
    OrbitError, OrbitRecord, OrbitType, Verdict,
};
pub use padic::{
    arith, hensel_lift, hensel_refine, is_prime, ArithOp, DifferentiableMap, HenselCertificate,
    IntPoly, PAdicError, PAdicInt, RadiusExp, Valuation,
};
pub use pcf::{
    candidate_types, count_bounds, enumerate_pcf, enumerate_pcf_detailed, exactness_filter,
    find_roots, find_roots_with, CountBounds, CriticalRelation, OrbitTypeCandidate, PcfError,
    PcfKind, PcfParameter, PcfReport, RootCandidate, SearchOptions,
};
pub use tree::{
    critical_orbit_tree, default_depth, disk_join, path_metric, shape_check, DiskVertex,
    OrbitTree, TreeEdge, TreeError, TreeShapeReport,
};
pub use linearization::{
    c2_parameter, fixed_points, lemma54_claims, radius_lower_bound, translation_cascade,
    verify_c2, C2Report, CascadeStep, FixedPoints, Gamma0Case, LinError, Lemma54Row,
    LinearizationParams,
};
pub use report::{
    atlas, figures, orbit_line, run_suite, Atlas, AtlasNode, CaseResult, FigureBundle,
    FigureEntry, ReportError, Suite, VerifyConfig, VerifyReport, SCHEMA,
};
