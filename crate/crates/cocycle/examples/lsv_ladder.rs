//! The negative control: an intermittent interval map with a neutral fixed
//! point, where deep pullback iterates concentrate their mass onto a
//! vanishing fraction of the space. Each discretized operator traps mass in
//! the cells touching the neutral point (the escape rate there is slower
//! than any sampling can resolve, so those cells are exactly absorbing),
//! and the trapped fraction of the space shrinks as the resolution grows:
//! one cell in 64, six cells in 1024. The uniform-integrability profile
//! phi_d(1/64) therefore climbs to 1 at every rung and stays at 1 across
//! the ladder — the signature of a family with no uniformly integrable
//! envelope, judged by the ladder verdict. The finite-depth distortion
//! certificate fails on the same family for the same underlying reason:
//! inverse-branch derivative ratios blow up near the neutral point.

use cocycle::runner::LADDER_CONCENTRATION_THRESHOLD;
use cocycle::{
    assess_ladder, default_deltas, fibered_report, ulam_matrix, Density, DiagnosticsOptions,
    DiagnosticsStream, DrivingSystem, FiberedOptions, LadderEntry, Partition, PiecewiseMap,
    PullbackStream, RandomMapFamily, SeedTable, UlamOptions, Verdict, Weights,
};

const HORIZON: usize = 20_000;

fn main() -> cocycle::Result<()> {
    let family = RandomMapFamily::constant(PiecewiseMap::lsv(1.5)?);
    let opts = UlamOptions::default();
    let diag_opts = DiagnosticsOptions::default();
    let delta = default_deltas()[0];
    let driving = DrivingSystem::cycle(1)?;

    // One rung per resolution: discretize, stream the pullback of the
    // uniform density to depth HORIZON, and read the profile at the
    // smallest probed fraction. Streaming keeps the memory at O(d).
    let mut entries = Vec::new();
    for d in [64usize, 256, 1024] {
        let partition = Partition::new(d)?;
        let m = ulam_matrix(family.map(0)?, &partition, &opts)?;
        let absorbing = (0..d).filter(|&i| m.as_matrix()[(i, i)] == 1.0).count();
        println!(
            "d = {d:>4}: {absorbing} absorbing cell(s) at the neutral fixed point \
             ({:.2}% of the space)",
            100.0 * absorbing as f64 / d as f64
        );

        let weights = Weights::uniform(d)?;
        let seed = Density::uniform(weights.clone());
        let gens = vec![m.as_matrix().clone()];
        let mut stream =
            PullbackStream::new(&gens, &driving, 0, &SeedTable::Fixed(seed.masses().clone()))?;
        let mut diag = DiagnosticsStream::new(d, &diag_opts)?;
        diag.absorb(&seed);
        for depth in 1..=HORIZON {
            let term = Density::renormalized(stream.next_term().clone(), weights.clone())?;
            diag.absorb(&term);
            if depth == HORIZON / 8 || depth % (HORIZON / 4) == 0 {
                let phi = diag.snapshot().ui.min_delta_phi();
                println!(
                    "  depth {depth:>6}: phi({delta:.6}) = {phi:.6}   (1 - phi = {:.3e})",
                    1.0 - phi
                );
            }
        }
        let diag = diag.finish()?;
        entries.push(LadderEntry {
            resolution: d,
            phi: diag.ui.min_delta_phi(),
            lp_sup: diag.lp_sup,
            envelope_mass: diag.envelope_mass,
        });
    }

    println!("\nladder at delta = {delta:.6}:");
    for e in &entries {
        println!(
            "  d = {:>4}: phi = {:.6}, lp_sup = {:.3}, envelope mass = {:.3}",
            e.resolution, e.phi, e.lp_sup, e.envelope_mass
        );
    }
    // The strong-norm bound also degrades with resolution — concentration
    // onto ever-narrower cells has no Lp-bounded envelope for p > 1.
    assert!(entries.windows(2).all(|w| w[1].lp_sup > w[0].lp_sup));

    let assessment = assess_ladder(&entries, delta, LADDER_CONCENTRATION_THRESHOLD)?;
    println!(
        "ladder verdict: {:?} (nondecreasing: {}, final phi {:.6} vs threshold {})",
        assessment.verdict, assessment.nondecreasing, assessment.final_phi, assessment.threshold
    );
    assert!(
        assessment.nondecreasing,
        "saturated profiles must not decay with resolution"
    );
    assert!(assessment.final_phi >= LADDER_CONCENTRATION_THRESHOLD);
    assert!(matches!(assessment.verdict, Verdict::Fail));

    // The map-level certificate fails on distortion (inverse-derivative
    // ratios near the neutral point), independently of any discretization.
    let report = fibered_report(&family, 0, &FiberedOptions::default())?;
    println!(
        "\ndistortion certificate: max ratio {:.3} over depths 1..={}, cap {}, pass: {}",
        report.max_distortion,
        report.options.depth,
        report.options.distortion_cap,
        report.distortion_pass
    );
    assert!(!report.distortion_pass);

    Ok(())
}
