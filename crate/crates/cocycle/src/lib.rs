#![forbid(unsafe_code)]
//! Markov operator cocycles over driven environments: build them, pull
//! densities back along the environment's past, average, and audit whether
//! the averages certify a random invariant density.
//!
//! # What lives where
//!
//! * [`driving`] — the environment: an invertible shift on labeled points,
//!   either a finite cycle or a sampled coin-flip path with O(1) random
//!   access to any coordinate.
//! * [`markov`] — column-stochastic matrices in mass coordinates, cocycles
//!   of them indexed by environment labels, and by-fiber density families.
//! * [`cesaro`] — running-average estimators with explicit settling
//!   certificates, plus averaged fixed-point and averaged-projector
//!   computations.
//! * [`pullback`] — allocation-free streaming of the deep-composition
//!   terms `G(l_1) G(l_2) ... G(l_n) f` that feed every average here.
//! * [`invariant`] — the heart of the crate: Cesàro pullback limits,
//!   set-mass limit families, uniform-integrability profiles, and the
//!   seven-condition equivalence audit with pass / fail / inconclusive
//!   verdicts and a cross-construction contradiction check.
//! * [`lift`] — the product-space view: one big block matrix whose fixed
//!   densities correspond to invariant families, with support sweeps and
//!   averaged-projector certificates, plus the product-cell discretization
//!   of a skew product for cross-checking.
//! * [`met`] — averaged-iterate identities for norm-contraction cocycles:
//!   telescoping bounds, average/operator commutation, and least-squares
//!   gauge splits of a seed against its averaged limit.
//! * [`transfer`] — piecewise interval maps, their cell-partition
//!   discretization into stochastic matrices, and distortion / small-set
//!   certificates for map families.
//! * [`config`], [`runner`], [`report`], [`io`] — the experiment surface:
//!   a sectioned key=value config grammar, five named harnesses, and
//!   byte-stable CSV artifacts.
//!
//! # A two-minute tour
//!
//! ```
//! use cocycle::{Density, DrivingSystem, MarkovCocycle, MarkovMatrix};
//! use cocycle::{verify_equivalences, VerifyOptions};
//!
//! // Two stochastic matrices alternating along a 2-cycle.
//! let g0 = MarkovMatrix::from_rows(&[&[0.5, 0.3], &[0.5, 0.7]]).unwrap();
//! let g1 = MarkovMatrix::from_rows(&[&[0.9, 0.2], &[0.1, 0.8]]).unwrap();
//! let c = MarkovCocycle::new(vec![g0, g1], DrivingSystem::cycle(2).unwrap()).unwrap();
//!
//! // Audit all seven equivalent characterizations of "this cocycle has a
//! // random invariant density".
//! let report = verify_equivalences(&c, &VerifyOptions::new(1e-10)).unwrap();
//! assert!(report.all_pass());
//! assert!(!report.contradiction);
//! ```
//!
//! The `examples/` directory walks each capability end to end, and the
//! `cocycle` binary runs the same harnesses from a config file.
//!
//! # Verdict discipline
//!
//! Numerical evidence is labeled honestly everywhere: a condition is
//! `fail` only when a *certified* computation violates an identity loudly
//! (beyond 100x the working tolerance); running out of budget yields
//! `inconclusive`, never `fail`. Certified outcomes that disagree with
//! each other raise an explicit contradiction flag rather than silently
//! averaging away.

// Float validation uses the negated form `!(x > 0.0)` on purpose: unlike
// `x <= 0.0`, it also rejects NaN, which must fail every gate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cesaro;
pub mod config;
pub mod density;
pub mod driving;
pub mod error;
pub mod invariant;
pub mod io;
pub mod lift;
pub mod linalg;
pub mod markov;
pub mod met;
pub mod pullback;
pub mod report;
pub mod runner;
pub mod transfer;

#[cfg(test)]
mod testutil;

pub use cesaro::{
    averaged_fixed_point, averaged_projector, CesaroEstimator, CesaroMode, CesaroOutcome,
    ScalarCesaro,
};
pub use config::{CocycleSpec, DrivingSpec, ExperimentConfig, Harness};
pub use density::{Density, Weights};
pub use driving::{DrivingSystem, Point};
pub use error::{Error, Result};
pub use invariant::{
    assess_ladder, banach_surrogate, cesaro_pullback, default_deltas, default_seed_pack,
    level_set_check, limit_measure_family, precompactness_diagnostics, pullback_sequence,
    verify_equivalences, ConditionId, ConditionOutcome, DiagnosticsOptions, DiagnosticsStream,
    EquivalenceReport, LadderAssessment, LadderEntry, PullbackTrace, TraceDiagnostics,
    UIAccumulator, UIProfile, Verdict, VerifyOptions,
};
pub use lift::{
    adjoint_support_sweep, build_lift, fiberwise_apply, iota, iota_inv, lift_commutation_residual,
    lift_consistency_report, mean_ergodic_certificate, skew_product_ulam, skew_ulam_equivalence,
    FlatIndex, LiftMatrix, LiftReport, MeanErgodicCertificate, SupportSweep,
};
pub use linalg::NormKind;
pub use markov::{equivariance_residual, MarkovCocycle, MarkovMatrix, RandomDensity};
pub use met::{
    cesaro_iterate, coboundary_fit, global_norm, met_verify, CoboundaryFit, MetOptions,
    MetReport, NormedCocycle,
};
pub use pullback::{pullback_partial, PullbackStream, SeedTable};
pub use runner::{run_experiment, ExitStatus, RunOutcome};
pub use transfer::family::{parse_map_family, ulam_cocycle, RandomMapFamily};
pub use transfer::fibered::{fibered_report, DistortionReport, FiberedOptions};
pub use transfer::map::{Branch, BranchFormula, PiecewiseMap};
pub use transfer::ulam::{ulam_matrix, Partition, UlamOptions};
