//! Finite-depth certificates for a family of piecewise monotone maps
//! composed along a backward orbit of the driving system.
//!
//! For a base point `w` and depth `p`, the composition acting *into* the
//! fiber over `w` applies the map at `s^{-p} w` first:
//!
//! ```text
//!   T(p, w) = T_{s^{-1} w} ∘ .. ∘ T_{s^{-p} w}.
//! ```
//!
//! A depth-`p` cylinder is a maximal interval on which every step of that
//! composition stays inside one branch; on each cylinder `T(p, w)` is
//! monotone with an inverse `V` defined on the cylinder's image. This
//! module enumerates the cylinders depth by depth and certifies, at the
//! configured depths:
//!
//! - *partition*: all maps share one finite branch partition (the common
//!   refinement of their branch domains), and each refinement cell lies
//!   inside a single branch of every map;
//! - *generator proxy*: cylinder diameters at the deepest level fall below
//!   a threshold, evidence that cylinders separate points;
//! - *bounded distortion*: `sup |V'| / inf |V'|` over each cylinder image
//!   stays below a cap, uniformly over the tested depths;
//! - *image floor*: every cylinder's image keeps measure above a floor;
//! - *small sets*: for `δ(ε) = ε · c / C` (image floor `c`, distortion cap
//!   `C` as measured), every enumerated set of measure below `δ` keeps all
//!   its backward preimages below measure `ε`. Preimage measures are exact
//!   interval computations: the branch inverse `V` is evaluated at the
//!   endpoints of the set clipped to each cylinder image.

use crate::driving::Point;
use crate::error::{Error, Result};
use crate::transfer::family::RandomMapFamily;
use crate::transfer::map::PiecewiseMap;

/// Slivers thinner than this arise from touching endpoints rounding apart
/// and are pruned during enumeration.
const SLIVER_TOL: f64 = 1e-14;

/// Matching tolerance when merging branch endpoints into the common
/// refinement.
const BREAKPOINT_TOL: f64 = 1e-12;

/// Options for [`fibered_report`].
#[derive(Debug, Clone)]
pub struct FiberedOptions {
    /// Deepest cylinder level to enumerate.
    pub depth: usize,
    /// Cap on the total number of cylinders enumerated across all depths.
    pub cylinder_cap: usize,
    /// Midpoint samples of `|V'|` per cylinder image for the distortion
    /// ratio.
    pub distortion_samples: usize,
    /// Bound the per-depth distortion must stay below.
    pub distortion_cap: f64,
    /// Bound the deepest cylinder diameter must stay below.
    pub diameter_threshold: f64,
    /// Floor the cylinder image measures must stay above.
    pub image_floor: f64,
    /// Small-set mass levels to certify.
    pub epsilons: Vec<f64>,
}

impl Default for FiberedOptions {
    fn default() -> Self {
        FiberedOptions {
            depth: 6,
            cylinder_cap: 1_000_000,
            distortion_samples: 24,
            distortion_cap: 4.0,
            diameter_threshold: 0.1,
            image_floor: 1e-3,
            epsilons: vec![0.1, 0.01],
        }
    }
}

/// Per-depth cylinder statistics.
#[derive(Debug, Clone)]
pub struct DepthStats {
    pub depth: usize,
    pub cylinder_count: usize,
    /// Max over cylinders of the sampled `sup |V'| / inf |V'|`.
    pub distortion: f64,
    /// Min over cylinders of the image measure.
    pub min_image_measure: f64,
    /// Max over cylinders of the cylinder diameter.
    pub max_diameter: f64,
    /// Cylinders whose sampled `sup |V'|` exceeds
    /// `distortion · m(cyl) / m(image)`, which the distortion bound forbids.
    pub inverse_bound_violations: usize,
}

/// Result of one small-set certificate.
#[derive(Debug, Clone)]
pub struct SmallSetCheck {
    pub epsilon: f64,
    /// `ε · c / C` for the measured image floor `c` and distortion `C`.
    pub delta: f64,
    /// Enumerated cylinders of measure below `delta` that were tested as
    /// small sets.
    pub sets_tested: usize,
    /// Largest backward-preimage measure seen over all tested sets and
    /// depths.
    pub worst_pullback_mass: f64,
    pub pass: bool,
}

/// The full finite-depth certificate for one base point.
#[derive(Debug, Clone)]
pub struct DistortionReport {
    pub base: Point,
    pub options: FiberedOptions,
    pub per_depth: Vec<DepthStats>,
    /// Cells of the common refinement of all branch partitions.
    pub common_partition_size: usize,
    /// Whether every refinement cell sits inside one branch of every map.
    pub partition_invertible: bool,
    /// Max distortion over the tested depths.
    pub max_distortion: f64,
    /// Min image measure over the tested depths.
    pub min_image_measure: f64,
    pub generator_proxy_pass: bool,
    pub distortion_pass: bool,
    pub image_floor_pass: bool,
    pub small_set_checks: Vec<SmallSetCheck>,
    pub cylinders_enumerated: usize,
}

/// One enumerated cylinder: the branch itinerary along the chain, the image
/// interval, the cylinder interval, and sampled inverse-derivative bounds.
#[derive(Debug, Clone)]
struct CylinderRecord {
    branches: Vec<usize>,
    image: (f64, f64),
    cyl: (f64, f64),
    sup_v: f64,
    inf_v: f64,
}

impl CylinderRecord {
    fn measure(&self) -> f64 {
        self.cyl.1 - self.cyl.0
    }

    fn image_measure(&self) -> f64 {
        self.image.1 - self.image.0
    }
}

/// Invert the chain at `y`: returns the preimage point and `|V'(y)|`.
/// `chain[0]` is the map applied first (the deepest), so inversion walks
/// the chain backwards.
fn invert_chain(chain: &[&PiecewiseMap], branches: &[usize], y: f64) -> (f64, f64) {
    debug_assert_eq!(chain.len(), branches.len());
    let mut z = y;
    let mut forward_deriv = 1.0;
    for level in (0..chain.len()).rev() {
        let b = &chain[level].branches()[branches[level]];
        z = b.invert(z);
        forward_deriv *= b.derivative(z).abs();
    }
    (z, 1.0 / forward_deriv)
}

/// Sampling density plus the cylinder budget spent against its cap; one
/// budget covers every depth of an enumeration.
struct EnumerationBudget {
    samples: usize,
    spent: usize,
    cap: usize,
}

fn dfs(
    chain: &[&PiecewiseMap],
    level: usize,
    image: (f64, f64),
    branches: &mut Vec<usize>,
    out: &mut Vec<CylinderRecord>,
    budget: &mut EnumerationBudget,
) -> Result<()> {
    if level == chain.len() {
        budget.spent += 1;
        if budget.spent > budget.cap {
            return Err(Error::CylinderBudget(budget.spent, budget.cap));
        }
        let (ilo, ihi) = image;
        let (x0, _) = invert_chain(chain, branches, ilo);
        let (x1, _) = invert_chain(chain, branches, ihi);
        let cyl = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
        let mut sup_v = f64::NEG_INFINITY;
        let mut inf_v = f64::INFINITY;
        let w = (ihi - ilo) / budget.samples as f64;
        for s in 0..budget.samples {
            let y = ilo + (s as f64 + 0.5) * w;
            let (_, vp) = invert_chain(chain, branches, y);
            sup_v = sup_v.max(vp);
            inf_v = inf_v.min(vp);
        }
        out.push(CylinderRecord {
            branches: branches.clone(),
            image,
            cyl,
            sup_v,
            inf_v,
        });
        return Ok(());
    }
    for (bi, branch) in chain[level].branches().iter().enumerate() {
        let lo = image.0.max(branch.lo);
        let hi = image.1.min(branch.hi);
        if hi - lo <= SLIVER_TOL {
            continue;
        }
        let y0 = branch.eval(lo);
        let y1 = branch.eval(hi);
        let next = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
        // the map sends [0,1) into itself; clip the roundoff overshoot
        let next = (next.0.max(0.0), next.1.min(1.0));
        branches.push(bi);
        dfs(chain, level + 1, next, branches, out, budget)?;
        branches.pop();
    }
    Ok(())
}

/// The maps of the chain for depth `p` at `base`, in application order
/// (deepest first).
fn chain_maps(
    family: &RandomMapFamily,
    base: Point,
    depth: usize,
) -> Result<Vec<&PiecewiseMap>> {
    let labels = family.driving().past_labels(base, depth)?;
    labels
        .iter()
        .rev()
        .map(|&l| family.map(l))
        .collect::<Result<Vec<_>>>()
}

/// Common refinement of all branch partitions: `(cell count, invertible)`.
fn common_refinement(family: &RandomMapFamily) -> (usize, bool) {
    let mut points: Vec<f64> = vec![0.0, 1.0];
    for map in family.maps() {
        for b in map.branches() {
            points.push(b.lo);
            points.push(b.hi);
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite endpoints"));
    points.dedup_by(|a, b| (*a - *b).abs() <= BREAKPOINT_TOL);
    let cells = points.len() - 1;
    let mut invertible = true;
    for cell in points.windows(2) {
        let mid = 0.5 * (cell[0] + cell[1]);
        for map in family.maps() {
            let inside_one_branch = map.branches().iter().any(|b| {
                b.lo <= cell[0] + BREAKPOINT_TOL && cell[1] <= b.hi + BREAKPOINT_TOL && b.lo <= mid
            });
            if !inside_one_branch {
                invertible = false;
            }
        }
    }
    (cells, invertible)
}

/// Enumerate cylinders and assemble the certificate for the fiber over
/// `base`.
pub fn fibered_report(
    family: &RandomMapFamily,
    base: Point,
    opts: &FiberedOptions,
) -> Result<DistortionReport> {
    if opts.depth == 0 {
        return Err(Error::InvalidArgument("certificate depth must be >= 1".into()));
    }
    if opts.distortion_samples < 2 {
        return Err(Error::InvalidArgument(
            "distortion needs at least 2 samples".into(),
        ));
    }
    if opts.epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument(
            "small-set levels must be positive".into(),
        ));
    }
    family.driving().label(base)?;

    let mut budget = EnumerationBudget {
        samples: opts.distortion_samples,
        spent: 0,
        cap: opts.cylinder_cap,
    };
    let mut chains: Vec<Vec<&PiecewiseMap>> = Vec::with_capacity(opts.depth);
    let mut leaves: Vec<Vec<CylinderRecord>> = Vec::with_capacity(opts.depth);
    let mut per_depth = Vec::with_capacity(opts.depth);

    for p in 1..=opts.depth {
        let chain = chain_maps(family, base, p)?;
        let mut records = Vec::new();
        let mut branches = Vec::with_capacity(p);
        dfs(&chain, 0, (0.0, 1.0), &mut branches, &mut records, &mut budget)?;
        if records.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no cylinders of depth {p}; the branch domains do not cover the interval"
            )));
        }

        let mut distortion = 0.0_f64;
        let mut min_image = f64::INFINITY;
        let mut max_diameter = 0.0_f64;
        for r in &records {
            distortion = distortion.max(r.sup_v / r.inf_v);
            min_image = min_image.min(r.image_measure());
            max_diameter = max_diameter.max(r.measure());
        }
        // the distortion bound forces sup |V'| <= C * m(cyl) / m(image) on
        // every cylinder (the mean of |V'| over the image is exactly
        // m(cyl) / m(image)); count sampled violations
        let violations = records
            .iter()
            .filter(|r| {
                r.sup_v > distortion * (r.measure() / r.image_measure()) * (1.0 + 1e-9) + 1e-15
            })
            .count();

        per_depth.push(DepthStats {
            depth: p,
            cylinder_count: records.len(),
            distortion,
            min_image_measure: min_image,
            max_diameter,
            inverse_bound_violations: violations,
        });
        chains.push(chain);
        leaves.push(records);
    }

    let max_distortion = per_depth.iter().map(|s| s.distortion).fold(0.0, f64::max);
    let min_image_measure = per_depth
        .iter()
        .map(|s| s.min_image_measure)
        .fold(f64::INFINITY, f64::min);
    let (common_partition_size, partition_invertible) = common_refinement(family);

    let small_set_checks = opts
        .epsilons
        .iter()
        .map(|&eps| small_set_check(eps, max_distortion, min_image_measure, &chains, &leaves))
        .collect();

    let deepest = per_depth.last().expect("depth >= 1");
    Ok(DistortionReport {
        base,
        options: opts.clone(),
        common_partition_size,
        partition_invertible,
        max_distortion,
        min_image_measure,
        generator_proxy_pass: deepest.max_diameter < opts.diameter_threshold,
        distortion_pass: max_distortion <= opts.distortion_cap,
        image_floor_pass: min_image_measure >= opts.image_floor,
        small_set_checks,
        cylinders_enumerated: budget,
        per_depth,
    })
}

/// Exact backward-preimage measure of the interval `set` at every recorded
/// depth, maximized over the sets smaller than `δ(ε)`.
fn small_set_check(
    epsilon: f64,
    distortion: f64,
    image_floor: f64,
    chains: &[Vec<&PiecewiseMap>],
    leaves: &[Vec<CylinderRecord>],
) -> SmallSetCheck {
    let delta = epsilon * image_floor / distortion;
    let mut sets_tested = 0usize;
    let mut worst = 0.0_f64;
    let mut pass = true;
    for depth_records in leaves {
        for set in depth_records {
            if set.measure() >= delta || set.measure() <= 0.0 {
                continue;
            }
            sets_tested += 1;
            for (chain, records) in chains.iter().zip(leaves) {
                let mut mass = 0.0;
                for r in records {
                    let lo = set.cyl.0.max(r.image.0);
                    let hi = set.cyl.1.min(r.image.1);
                    if hi - lo <= 0.0 {
                        continue;
                    }
                    let (x0, _) = invert_chain(chain, &r.branches, lo);
                    let (x1, _) = invert_chain(chain, &r.branches, hi);
                    mass += (x1 - x0).abs();
                }
                worst = worst.max(mass);
                if mass >= epsilon {
                    pass = false;
                }
            }
        }
    }
    SmallSetCheck {
        epsilon,
        delta,
        sets_tested,
        worst_pullback_mass: worst,
        pass,
    }
}
