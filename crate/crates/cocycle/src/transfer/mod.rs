//! Piecewise interval maps, their transfer operators on a cell partition,
//! and finite-depth certificates for families of maps driven by an
//! environment.
//!
//! - [`map`]: branch formulas, validated piecewise maps, branch inverses.
//! - [`ulam`]: cell partitions and the projection of a map's transfer
//!   operator onto piecewise-constant densities (a column-stochastic
//!   matrix), plus the duality residual check.
//! - [`family`]: environment-indexed map families, their matrix cocycles,
//!   and the map-family file grammar.
//! - [`fibered`]: cylinder enumeration along backward orbits with
//!   distortion, image-measure, and small-set mass certificates.

pub mod family;
pub mod fibered;
pub mod map;
pub mod ulam;

pub use family::{parse_map_family, ulam_cocycle, RandomMapFamily};
pub use fibered::{fibered_report, DepthStats, DistortionReport, FiberedOptions, SmallSetCheck};
pub use map::{Branch, BranchFormula, PiecewiseMap};
pub use ulam::{pf_duality_check, ulam_matrix, Partition, UlamOptions};
