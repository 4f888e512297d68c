//! Experiment runner: build the configured cocycle, execute the requested
//! harness, write report files, and map the results onto the exit-code
//! contract.
//!
//! Exit codes: `0` — every check passed; `1` — configuration or file
//! errors (the runner returns `Err`, the binary prints the diagnostic);
//! `2` — a certified failure or a contradiction between certified
//! outcomes; `3` — no failure, but at least one check stayed inconclusive
//! within its budget.
//!
//! Artifacts are plain CSV files plus one `summary.txt` per run, all
//! byte-stable for a fixed config and seed. The schemas live on the
//! formatting functions in the report module.

use crate::config::{CocycleSpec, ExperimentConfig, Harness};
use crate::density::Density;
use crate::driving::{DrivingSystem, Point};
use crate::error::{Error, Result};
use crate::invariant::{
    assess_ladder, default_deltas, precompactness_diagnostics, pullback_sequence,
    verify_equivalences, DiagnosticsOptions, DiagnosticsStream, LadderEntry, Verdict,
    VerifyOptions, VIOLATION_FACTOR,
};
use crate::lift::{lift_consistency_report, skew_ulam_equivalence, LiftReport};
use crate::markov::MarkovCocycle;
use crate::met::{coboundary_fit, met_verify, MetOptions, MetReport, NormedCocycle};
use crate::pullback::{PullbackStream, SeedTable};
use crate::report;
use crate::transfer::family::{parse_map_family, ulam_cocycle, RandomMapFamily};
use crate::transfer::fibered::fibered_report;
use crate::transfer::ulam::Partition;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

/// Concentration pin for resolution-ladder verdicts: a profile that stays
/// nondecreasing across rungs and ends at or above this much mass on the
/// smallest probed fraction fails the precompactness conditions. The value
/// is a regression pin recorded from the reference oracle run of the
/// bundled intermittent-map ladder.
pub const LADDER_CONCENTRATION_THRESHOLD: f64 = 0.5;

/// Process exit status, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    /// Every check passed.
    AllPass,
    /// At least one check exhausted its budget without a verdict; nothing
    /// failed.
    Inconclusive,
    /// A certified failure or a contradiction.
    Failure,
}

impl ExitStatus {
    /// The process exit code for this status.
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::AllPass => 0,
            ExitStatus::Failure => 2,
            ExitStatus::Inconclusive => 3,
        }
    }

    /// Status token used in summaries.
    pub fn token(self) -> &'static str {
        match self {
            ExitStatus::AllPass => "all-pass",
            ExitStatus::Failure => "fail",
            ExitStatus::Inconclusive => "inconclusive",
        }
    }

    fn join(self, other: ExitStatus) -> ExitStatus {
        self.max(other)
    }
}

/// Everything a run produced: the exit status, the files written (sorted),
/// and the human-readable summary text.
#[derive(Debug)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Files accumulated during a run, written together at the end so a
/// failing harness leaves no partial artifact set behind.
struct Artifacts {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Artifacts {
    fn new(dir: PathBuf) -> Artifacts {
        Artifacts {
            dir,
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: impl Into<String>, content: String) {
        self.files.push((name.into(), content));
    }

    fn write_all(&mut self) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&self.dir)?;
        self.files.sort_by(|a, b| a.0.cmp(&b.0));
        let mut paths = Vec::with_capacity(self.files.len());
        for (name, content) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, content)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// The generators a run works with: explicit matrices, or a map family
/// discretized at each configured resolution.
enum Source {
    Matrices(MarkovCocycle),
    Maps {
        family: RandomMapFamily,
        resolutions: Vec<usize>,
        ulam: crate::transfer::ulam::UlamOptions,
    },
}

impl Source {
    /// The cocycle at the coarsest configured resolution.
    fn primary_cocycle(&self) -> Result<MarkovCocycle> {
        match self {
            Source::Matrices(c) => Ok(c.clone()),
            Source::Maps {
                family,
                resolutions,
                ulam,
            } => {
                let partition = Partition::new(resolutions[0])?;
                ulam_cocycle(family, &partition, ulam)
            }
        }
    }
}

fn load_source(cfg: &ExperimentConfig, driving: &DrivingSystem) -> Result<Source> {
    match &cfg.cocycle {
        CocycleSpec::Matrices { path } => {
            let text = std::fs::read_to_string(path)?;
            let matrices = crate::io::read_matrix_table(&text)?;
            Ok(Source::Matrices(MarkovCocycle::new(
                matrices,
                driving.clone(),
            )?))
        }
        CocycleSpec::Maps {
            path,
            resolutions,
            ulam,
        } => {
            let text = std::fs::read_to_string(path)?;
            let maps = parse_map_family(&text)?;
            let family = RandomMapFamily::new(maps, driving.clone())?;
            Ok(Source::Maps {
                family,
                resolutions: resolutions.clone(),
                ulam: *ulam,
            })
        }
    }
}

/// Fibers to audit: the configured list, every point of a finite cycle, or
/// the origin fiber on a sampled path.
fn audit_fibers(cfg: &ExperimentConfig, driving: &DrivingSystem) -> Vec<Point> {
    if let Some(f) = &cfg.fibers {
        return f.clone();
    }
    match driving.points() {
        Some(points) => points,
        None => vec![0],
    }
}

/// Probe seeds for the audit: the canonical corner/ramp pack, topped up
/// with seeded random densities when more are requested.
fn probe_seeds(d: usize, count: usize, seed: u64) -> Result<Vec<Density>> {
    let mut seeds = crate::invariant::default_seed_pack(d)?;
    seeds.truncate(count.max(1));
    if count > seeds.len() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while seeds.len() < count {
            seeds.push(Density::random(d, &mut rng)?);
        }
    }
    Ok(seeds)
}

/// Run the configured experiment and write its artifacts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let driving = cfg.driving.build()?;
    let source = load_source(cfg, &driving)?;
    let out_dir = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("reports"));
    let mut artifacts = Artifacts::new(out_dir);

    let (status, summary) = match cfg.harness {
        Harness::TheoremA => run_theorem_a(cfg, &driving, &source, &mut artifacts)?,
        Harness::Lift => run_lift(cfg, &source, &mut artifacts)?,
        Harness::Skew => run_skew(cfg, &source, &mut artifacts)?,
        Harness::Met => run_met(cfg, &source, &mut artifacts)?,
        Harness::FiberedReport => run_fibered(cfg, &driving, &source, &mut artifacts)?,
    };

    artifacts.add("summary.txt", summary.clone());
    let files = artifacts.write_all()?;
    Ok(RunOutcome {
        status,
        files,
        summary,
    })
}

/// Per-fiber pullback traces and their diagnostics; returns the worst
/// (largest) headline profile value over the audited fibers ready for a
/// ladder entry.
///
/// Cyclic driving streams the terms, so the memory stays `O(dim)` at any
/// horizon; path driving (where streaming is unavailable) records the
/// trace, which is fine at the modest horizons such runs use.
fn trace_diagnostics_entry(
    c: &MarkovCocycle,
    fibers: &[Point],
    horizon: usize,
    resolution: usize,
    prefix: &str,
    artifacts: &mut Artifacts,
) -> Result<LadderEntry> {
    let weights = crate::density::Weights::uniform(c.dim())?;
    let seed = Density::uniform(weights.clone());
    let opts = DiagnosticsOptions::default();
    let generators: Vec<DMatrix<f64>> = c
        .generators()
        .iter()
        .map(|g| g.as_matrix().clone())
        .collect();
    let seeds = SeedTable::Fixed(seed.masses().clone());
    let mut entry = LadderEntry {
        resolution,
        phi: 0.0,
        lp_sup: 0.0,
        envelope_mass: 0.0,
    };
    for &w in fibers {
        let diag = match PullbackStream::new(&generators, c.driving(), w, &seeds) {
            Ok(mut stream) => {
                let mut diag = DiagnosticsStream::new(c.dim(), &opts)?;
                let mut csv = report::TraceCsv::new();
                diag.absorb(&seed);
                csv.push(&seed);
                for _ in 0..horizon {
                    let term =
                        Density::renormalized(stream.next_term().clone(), weights.clone())?;
                    diag.absorb(&term);
                    csv.push(&term);
                }
                artifacts.add(format!("{prefix}trace_fiber{w}.csv"), csv.finish());
                diag.finish()?
            }
            Err(_) => {
                let trace = pullback_sequence(c, w, &seed, horizon)?;
                artifacts.add(
                    format!("{prefix}trace_fiber{w}.csv"),
                    report::trace_csv(&trace),
                );
                precompactness_diagnostics(&trace, &opts)?
            }
        };
        artifacts.add(
            format!("{prefix}ui_fiber{w}.csv"),
            report::ui_profile_csv(&diag.ui),
        );
        artifacts.add(
            format!("{prefix}diagnostics_fiber{w}.csv"),
            report::diagnostics_csv(&diag),
        );
        entry.phi = entry.phi.max(diag.ui.min_delta_phi());
        entry.lp_sup = entry.lp_sup.max(diag.lp_sup);
        entry.envelope_mass = entry.envelope_mass.max(diag.envelope_mass);
    }
    Ok(entry)
}

fn run_theorem_a(
    cfg: &ExperimentConfig,
    driving: &DrivingSystem,
    source: &Source,
    artifacts: &mut Artifacts,
) -> Result<(ExitStatus, String)> {
    let fibers = audit_fibers(cfg, driving);

    // The full seven-condition audit runs on the primary cocycle (the
    // coarsest rung of a ladder); finer rungs contribute diagnostics that
    // feed the cross-resolution verdict below.
    let c = source.primary_cocycle()?;
    let mut opts = VerifyOptions::new(cfg.tol);
    opts.max_steps = cfg.max_steps;
    opts.horizon = cfg.horizon;
    opts.fibers = Some(fibers.clone());
    opts.seeds = probe_seeds(c.dim(), cfg.seeds_count, cfg.seed)?;
    let report = verify_equivalences(&c, &opts)?;
    artifacts.add("conditions.csv", report::conditions_csv(&report));
    artifacts.add("consistency.csv", report::consistency_csv(&report));

    let mut summary = report::equivalence_summary(&report);
    let mut status = match report::report_status(&report) {
        "fail" => ExitStatus::Failure,
        "all-pass" => ExitStatus::AllPass,
        _ => ExitStatus::Inconclusive,
    };

    match source {
        Source::Matrices(c) => {
            trace_diagnostics_entry(c, &fibers, cfg.horizon, c.dim(), "", artifacts)?;
        }
        Source::Maps {
            family,
            resolutions,
            ulam,
        } => {
            let mut entries = Vec::with_capacity(resolutions.len());
            for &d in resolutions {
                let partition = Partition::new(d)?;
                let rung = ulam_cocycle(family, &partition, ulam)?;
                let prefix = if resolutions.len() > 1 {
                    format!("d{d}_")
                } else {
                    String::new()
                };
                entries.push(trace_diagnostics_entry(
                    &rung,
                    &fibers,
                    cfg.horizon,
                    d,
                    &prefix,
                    artifacts,
                )?);
            }
            if entries.len() > 1 {
                artifacts.add("ladder_uniformity.csv", report::ladder_csv(&entries));
                let assessment = assess_ladder(
                    &entries,
                    default_deltas()[0],
                    LADDER_CONCENTRATION_THRESHOLD,
                )?;
                summary.push_str(&report::ladder_summary(&assessment));
                status = status.join(match assessment.verdict {
                    Verdict::Pass => ExitStatus::AllPass,
                    Verdict::Fail => ExitStatus::Failure,
                    Verdict::Inconclusive { .. } => ExitStatus::Inconclusive,
                });
                summary.push_str(&format!("combined status: {}\n", status.token()));
            }
        }
    }

    Ok((status, summary))
}

/// Three-way verdict for a product-space consistency report.
fn lift_status(r: &LiftReport, tol: f64) -> ExitStatus {
    let loud = VIOLATION_FACTOR * tol;
    let converged = r.fixed_residual <= tol;
    let sweep_bad = !r.support_sweep.trivial
        && r.support_sweep.stalled
        && r.support_sweep.min_final <= 1.0 - loud;
    if (converged && r.equivariance > loud) || sweep_bad {
        return ExitStatus::Failure;
    }
    let sweep_ok = r.support_sweep.trivial || r.support_sweep.reached_one;
    let ergodic_ok = r.mean_ergodic.converged && !r.mean_ergodic.skipped;
    if converged
        && r.equivariance <= loud
        && r.fiber_mass_deviation <= loud
        && ergodic_ok
        && sweep_ok
    {
        ExitStatus::AllPass
    } else {
        ExitStatus::Inconclusive
    }
}

fn run_lift(
    cfg: &ExperimentConfig,
    source: &Source,
    artifacts: &mut Artifacts,
) -> Result<(ExitStatus, String)> {
    let c = source.primary_cocycle()?;
    let report = lift_consistency_report(&c, cfg.tol, cfg.max_steps)?;
    let status = lift_status(&report, cfg.tol);
    artifacts.add("lift.csv", report::lift_csv(&report));
    artifacts.add("lift_fixed_point.csv", report::lift_fixed_point_csv(&report));
    let summary = report::lift_summary(&report, status.token());
    Ok((status, summary))
}

fn run_skew(
    cfg: &ExperimentConfig,
    source: &Source,
    artifacts: &mut Artifacts,
) -> Result<(ExitStatus, String)> {
    let Source::Maps {
        family,
        resolutions,
        ulam,
    } = source
    else {
        return Err(Error::Unsupported(
            "the skew harness needs a map family".into(),
        ));
    };
    let mut rows = Vec::with_capacity(resolutions.len());
    for &d in resolutions {
        let partition = Partition::new(d)?;
        let deviation = skew_ulam_equivalence(family, &partition, ulam)?;
        rows.push((d, deviation));
    }
    // The two assemblies are algebraically identical, so any deviation
    // beyond tolerance is a definite failure; there is no budget to
    // exhaust.
    let status = if rows.iter().all(|&(_, dev)| dev <= cfg.tol) {
        ExitStatus::AllPass
    } else {
        ExitStatus::Failure
    };
    artifacts.add("skew.csv", report::skew_csv(&rows));
    let summary = report::skew_summary(&rows, cfg.tol, status.token());
    Ok((status, summary))
}

/// Three-way verdict for the averaged-iterate report.
fn met_status(r: &MetReport, fit: &crate::met::CoboundaryFit, eps: &[f64], tol: f64) -> ExitStatus {
    let loud = VIOLATION_FACTOR * tol;
    if !r.telescope_bound_ok
        || r.telescoping_identity > loud
        || r.commutation > loud
        || (r.limits_converged && r.equivariance > loud)
        || (r.limits_converged && eps.iter().any(|&e| fit.remainder_norm >= e))
    {
        return ExitStatus::Failure;
    }
    if r.limits_converged && r.equivariance <= loud {
        ExitStatus::AllPass
    } else {
        ExitStatus::Inconclusive
    }
}

fn run_met(
    cfg: &ExperimentConfig,
    source: &Source,
    artifacts: &mut Artifacts,
) -> Result<(ExitStatus, String)> {
    let markov = source.primary_cocycle()?;
    let c = NormedCocycle::new(
        markov
            .generators()
            .iter()
            .map(|g| g.as_matrix().clone())
            .collect(),
        markov.driving().clone(),
        cfg.met_norm,
    )?;
    let d = c.dim();
    // Deterministic probe seed: the normalized ramp exercises every cell
    // with distinct weights.
    let ramp = DVector::from_fn(d, |i, _| (i + 1) as f64 * 2.0 / (d * (d + 1)) as f64);
    let seeds = SeedTable::Fixed(ramp.clone());
    let mut opts = MetOptions::new(cfg.tol);
    opts.max_steps = cfg.max_steps;
    opts.span = cfg.met_span;
    let report = met_verify(&c, &seeds, &opts)?;
    let f: Vec<DVector<f64>> = (0..report.fiber_limits.len())
        .map(|_| ramp.clone())
        .collect();
    let fit = coboundary_fit(&c, &f, &report.fiber_limits)?;
    let status = met_status(&report, &fit, &cfg.met_epsilons, cfg.tol);
    artifacts.add("met_fibers.csv", report::met_fibers_csv(&report));
    artifacts.add("met_identities.csv", report::met_identities_csv(&report));
    artifacts.add("coboundary.csv", report::coboundary_csv(&fit, &cfg.met_epsilons));
    let summary = report::met_summary(&report, Some(&fit), &cfg.met_epsilons, status.token());
    Ok((status, summary))
}

fn run_fibered(
    cfg: &ExperimentConfig,
    driving: &DrivingSystem,
    source: &Source,
    artifacts: &mut Artifacts,
) -> Result<(ExitStatus, String)> {
    let Source::Maps {
        family,
        resolutions,
        ulam,
    } = source
    else {
        return Err(Error::Unsupported(
            "the fibered-report harness needs a map family".into(),
        ));
    };
    let fibers = audit_fibers(cfg, driving);
    let base = fibers[0];
    let report = fibered_report(family, base, &cfg.fibered)?;
    let certified = report.partition_invertible
        && report.generator_proxy_pass
        && report.distortion_pass
        && report.image_floor_pass
        && report.small_set_checks.iter().all(|s| s.pass);
    let mut status = if certified {
        ExitStatus::AllPass
    } else {
        ExitStatus::Failure
    };
    artifacts.add("fibered_depths.csv", report::fibered_depths_csv(&report));
    artifacts.add(
        "fibered_small_sets.csv",
        report::fibered_small_sets_csv(&report),
    );
    let mut summary = report::fibered_summary(&report, status.token());

    // With a resolution ladder configured, also measure mass concentration
    // across rungs; a family whose distortion certificate fails is
    // expected to concentrate, and the ladder verdict records it.
    if resolutions.len() > 1 {
        let mut entries = Vec::with_capacity(resolutions.len());
        for &d in resolutions {
            let partition = Partition::new(d)?;
            let rung = ulam_cocycle(family, &partition, ulam)?;
            entries.push(trace_diagnostics_entry(
                &rung,
                &fibers,
                cfg.horizon,
                d,
                &format!("d{d}_"),
                artifacts,
            )?);
        }
        artifacts.add("ladder_uniformity.csv", report::ladder_csv(&entries));
        let assessment = assess_ladder(
            &entries,
            default_deltas()[0],
            LADDER_CONCENTRATION_THRESHOLD,
        )?;
        summary.push_str(&report::ladder_summary(&assessment));
        status = status.join(match assessment.verdict {
            Verdict::Pass => ExitStatus::AllPass,
            Verdict::Fail => ExitStatus::Failure,
            Verdict::Inconclusive { .. } => ExitStatus::Inconclusive,
        });
        summary.push_str(&format!("combined status: {}\n", status.token()));
    }

    Ok((status, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use std::path::Path;

    const PERIOD2_MATRICES: &str = "\
dim,2
label,0
0.5,0.3
0.5,0.7
label,1
0.9,0.2
0.1,0.8
";

    const AFFINE_MAPS: &str = "\
0: affine [0,1/2) 2 0; affine [1/2,1) 2 -1
1: affine [0,1/3) 3 0; affine [1/3,2/3) 3 -1; affine [2/3,1) 3 -2
";

    fn write_workspace(files: &[(&str, &str)]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for (name, content) in files {
            std::fs::write(dir.path().join(name), content).unwrap();
        }
        dir
    }

    fn run_from(dir: &Path, cfg_text: &str) -> Result<RunOutcome> {
        let cfg = ExperimentConfig::parse(cfg_text, dir)?;
        run_experiment(&cfg)
    }

    #[test]
    fn theorem_a_on_the_two_phase_chain_passes() {
        let dir = write_workspace(&[("period2.matrices", PERIOD2_MATRICES)]);
        let out = dir.path().join("reports");
        let cfg = format!(
            "[driving]\nkind = cycle\nn = 2\n\n[cocycle]\nmatrices = period2.matrices\n\n[run]\nharness = theorem-a\ntol = 1e-10\nout = {}\n",
            out.display()
        );
        let outcome = run_from(dir.path(), &cfg).unwrap();
        assert_eq!(outcome.status, ExitStatus::AllPass);
        assert_eq!(outcome.status.code(), 0);
        assert!(outcome.summary.contains("status: all-pass"));
        let names: Vec<String> = outcome
            .files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        for expected in [
            "conditions.csv",
            "consistency.csv",
            "summary.txt",
            "trace_fiber0.csv",
            "trace_fiber1.csv",
            "ui_fiber0.csv",
            "diagnostics_fiber1.csv",
        ] {
            assert!(names.contains(&expected.to_string()), "missing {expected}");
        }
        // Byte-stability: a rerun writes identical artifacts.
        let before: Vec<String> = outcome
            .files
            .iter()
            .map(|p| std::fs::read_to_string(p).unwrap())
            .collect();
        let outcome2 = run_from(dir.path(), &cfg).unwrap();
        let after: Vec<String> = outcome2
            .files
            .iter()
            .map(|p| std::fs::read_to_string(p).unwrap())
            .collect();
        assert_eq!(before, after);
    }

    #[test]
    fn lift_and_met_harnesses_pass_on_the_two_phase_chain() {
        let dir = write_workspace(&[("period2.matrices", PERIOD2_MATRICES)]);
        let out = dir.path().join("lift_reports");
        let cfg = format!(
            "[driving]\nkind = cycle\nn = 2\n\n[cocycle]\nmatrices = period2.matrices\n\n[run]\nharness = lift\ntol = 1e-10\nout = {}\n",
            out.display()
        );
        let outcome = run_from(dir.path(), &cfg).unwrap();
        assert_eq!(outcome.status, ExitStatus::AllPass, "{}", outcome.summary);
        assert!(out.join("lift.csv").exists());
        assert!(out.join("lift_fixed_point.csv").exists());

        let out = dir.path().join("met_reports");
        let cfg = format!(
            "[driving]\nkind = cycle\nn = 2\n\n[cocycle]\nmatrices = period2.matrices\n\n[run]\nharness = met\ntol = 1e-10\nout = {}\n\n[met]\nepsilons = 1e-2,1e-4\n",
            out.display()
        );
        let outcome = run_from(dir.path(), &cfg).unwrap();
        assert_eq!(outcome.status, ExitStatus::AllPass, "{}", outcome.summary);
        let identities = std::fs::read_to_string(out.join("met_identities.csv")).unwrap();
        assert!(identities.contains("telescope_bound_ok,true"));
    }

    #[test]
    fn skew_harness_matches_block_assembly_exactly() {
        let dir = write_workspace(&[("pair.maps", AFFINE_MAPS)]);
        let out = dir.path().join("reports");
        let cfg = format!(
            "[driving]\nkind = cycle\nn = 2\n\n[cocycle]\nmaps = pair.maps\nladder = 4,6,12\n\n[run]\nharness = skew\ntol = 1e-12\nout = {}\n",
            out.display()
        );
        let outcome = run_from(dir.path(), &cfg).unwrap();
        assert_eq!(outcome.status, ExitStatus::AllPass, "{}", outcome.summary);
        let csv = std::fs::read_to_string(out.join("skew.csv")).unwrap();
        assert_eq!(csv, "resolution,max_deviation\n4,0\n6,0\n12,0\n");
    }

    #[test]
    fn fibered_harness_certifies_the_affine_pair() {
        let dir = write_workspace(&[("pair.maps", AFFINE_MAPS)]);
        let out = dir.path().join("reports");
        let cfg = format!(
            "[driving]\nkind = cycle\nn = 2\n\n[cocycle]\nmaps = pair.maps\nresolution = 16\n\n[run]\nharness = fibered-report\nout = {}\n\n[fibered]\ndepth = 4\nepsilons = 0.1,0.01\n",
            out.display()
        );
        let outcome = run_from(dir.path(), &cfg).unwrap();
        assert_eq!(outcome.status, ExitStatus::AllPass, "{}", outcome.summary);
        let depths = std::fs::read_to_string(out.join("fibered_depths.csv")).unwrap();
        assert_eq!(depths.lines().count(), 1 + 4, "header plus one row per depth");
    }

    #[test]
    fn bernoulli_theorem_a_is_inconclusive_not_failed() {
        let dir = write_workspace(&[("period2.matrices", PERIOD2_MATRICES)]);
        let out = dir.path().join("reports");
        let cfg = format!(
            "[driving]\nkind = bernoulli\nprobs = 0.5,0.5\nseed = 11\n\n[cocycle]\nmatrices = period2.matrices\n\n[run]\nharness = theorem-a\ntol = 1e-8\nhorizon = 64\nout = {}\n",
            out.display()
        );
        let outcome = run_from(dir.path(), &cfg).unwrap();
        assert_eq!(outcome.status, ExitStatus::Inconclusive, "{}", outcome.summary);
        assert_eq!(outcome.status.code(), 3);
        assert!(!outcome.summary.contains("CONTRADICTION"));
    }

    #[test]
    fn missing_matrix_file_is_an_io_error() {
        let dir = write_workspace(&[]);
        let cfg = "[driving]\nkind = cycle\nn = 2\n\n[cocycle]\nmatrices = absent.matrices\n\n[run]\nharness = theorem-a\n";
        match run_from(dir.path(), cfg) {
            Err(Error::Io(_)) => {}
            other => panic!("expected an io error, got {other:?}"),
        }
    }

    #[test]
    fn exit_statuses_join_by_severity() {
        use ExitStatus::*;
        assert_eq!(AllPass.join(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.join(Failure), Failure);
        assert_eq!(Failure.join(AllPass), Failure);
        assert_eq!(AllPass.code(), 0);
        assert_eq!(Failure.code(), 2);
        assert_eq!(Inconclusive.code(), 3);
    }
}
