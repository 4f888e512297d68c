//! Line-oriented sectioned `key = value` experiment configuration.
//!
//! The grammar is deliberately small and diff-friendly:
//!
//! ```text
//! # Comments run from `#` to the end of the line. Blank lines are skipped.
//!
//! [driving]
//! kind = cycle            # `cycle` or `bernoulli`
//! n = 2                   # cycle length (cycle only)
//! probs = 1/2,1/2         # label probabilities (bernoulli only)
//! seed = 7                # path seed (bernoulli only)
//!
//! [cocycle]
//! matrices = period2.matrices   # matrix-table file (see the io module), or:
//! maps = lsv.maps               # map-family file
//! resolution = 64               # Ulam cells (maps, single resolution)
//! ladder = 64,256,1024          # Ulam cells per rung (maps, strictly increasing)
//! subsamples = 64               # midpoint samples per (cell, branch) piece
//!
//! [run]
//! harness = theorem-a     # theorem-a | lift | skew | met | fibered-report
//! tol = 1e-9              # default 1e-9 for matrices, 1e-6 for map families
//! max-steps = 100000
//! horizon = 256
//! fibers = 0,1            # base points to audit (default: every cycle point)
//! seeds-count = 3
//! seed = 42               # master RNG seed (--seed overrides)
//! out = reports           # output directory (--out overrides)
//!
//! [fibered]               # fibered-report harness knobs
//! depth = 6
//! cylinder-cap = 1000000
//! distortion-samples = 24
//! distortion-cap = 4.0
//! diameter-threshold = 0.1
//! image-floor = 1e-3
//! epsilons = 0.1,0.01
//!
//! [met]                   # met harness knobs
//! norm = abs-sum          # abs-sum | euclidean | max
//! epsilons = 1e-2,1e-4
//! span = 64
//! ```
//!
//! Every numeric field accepts decimals or `a/b` fractions. Unknown sections
//! and keys are errors, reported with the 1-based line and column of the
//! offending token. Relative paths are resolved against the directory of the
//! config file.

use crate::driving::{DrivingSystem, Point};
use crate::error::{Error, Result};
use crate::io::parse_number;
use crate::linalg::NormKind;
use crate::transfer::fibered::FiberedOptions;
use crate::transfer::ulam::UlamOptions;
use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

/// Which experiment the runner executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Harness {
    /// Full seven-condition equivalence audit of the configured cocycle.
    TheoremA,
    /// Product-space consistency report: fixed point, support sweep, mean
    /// ergodicity.
    Lift,
    /// Product-cell discretization of the skew product vs the block
    /// assembly of per-fiber matrices.
    Skew,
    /// Averaged-iterate identities for norm-contraction cocycles.
    Met,
    /// Distortion and small-set certificates for a map family.
    FiberedReport,
}

impl Harness {
    /// All harness tokens, in documentation order.
    pub const ALL: [Harness; 5] = [
        Harness::TheoremA,
        Harness::Lift,
        Harness::Skew,
        Harness::Met,
        Harness::FiberedReport,
    ];

    /// The config token naming this harness.
    pub fn token(self) -> &'static str {
        match self {
            Harness::TheoremA => "theorem-a",
            Harness::Lift => "lift",
            Harness::Skew => "skew",
            Harness::Met => "met",
            Harness::FiberedReport => "fibered-report",
        }
    }

    fn from_token(s: &str) -> Option<Harness> {
        Harness::ALL.into_iter().find(|h| h.token() == s)
    }
}

impl fmt::Display for Harness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// How the driving system is built.
#[derive(Debug, Clone, PartialEq)]
pub enum DrivingSpec {
    Cycle { n: usize },
    Bernoulli { probs: Vec<f64>, seed: u64 },
}

impl DrivingSpec {
    /// Instantiates the driving system (validating probabilities).
    pub fn build(&self) -> Result<DrivingSystem> {
        match self {
            DrivingSpec::Cycle { n } => DrivingSystem::cycle(*n),
            DrivingSpec::Bernoulli { probs, seed } => {
                DrivingSystem::bernoulli(probs.clone(), *seed)
            }
        }
    }

    /// Number of labels a generator table must provide.
    pub fn alphabet_size(&self) -> usize {
        match self {
            DrivingSpec::Cycle { n } => *n,
            DrivingSpec::Bernoulli { probs, .. } => probs.len(),
        }
    }
}

/// Where the generators come from.
#[derive(Debug, Clone, PartialEq)]
pub enum CocycleSpec {
    /// Explicit column-stochastic matrices from a matrix-table file.
    Matrices { path: PathBuf },
    /// Interval maps from a map-family file, discretized at one or more
    /// resolutions.
    Maps {
        path: PathBuf,
        /// Ulam resolutions to run, ascending. A single-resolution run is a
        /// one-rung ladder.
        resolutions: Vec<usize>,
        ulam: UlamOptions,
    },
}

/// Fully parsed and validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub driving: DrivingSpec,
    pub cocycle: CocycleSpec,
    pub harness: Harness,
    /// Convergence tolerance for estimators and identity checks.
    pub tol: f64,
    /// Step budget for Cesàro estimators and fixed-point polishing.
    pub max_steps: usize,
    /// Depth budget for pullback traces and diagnostics.
    pub horizon: usize,
    /// Base points to audit; `None` means every point of a finite cycle
    /// (or point 0 on a sampled path).
    pub fibers: Option<Vec<Point>>,
    /// How many seed densities each audit draws.
    pub seeds_count: usize,
    /// Master RNG seed; every random choice in a run flows from it.
    pub seed: u64,
    /// Output directory for report files.
    pub out: Option<PathBuf>,
    /// Knobs for the fibered-report harness.
    pub fibered: FiberedOptions,
    /// Norm for the met harness.
    pub met_norm: NormKind,
    /// Remainder levels the met coboundary fit must beat.
    pub met_epsilons: Vec<f64>,
    /// Telescoping spans to check in the met harness.
    pub met_span: usize,
}

const DRIVING_KEYS: &[&str] = &["kind", "n", "probs", "seed"];
const COCYCLE_KEYS: &[&str] = &["matrices", "maps", "resolution", "ladder", "subsamples"];
const RUN_KEYS: &[&str] = &[
    "harness",
    "tol",
    "max-steps",
    "horizon",
    "fibers",
    "seeds-count",
    "seed",
    "out",
];
const FIBERED_KEYS: &[&str] = &[
    "depth",
    "cylinder-cap",
    "distortion-samples",
    "distortion-cap",
    "diameter-threshold",
    "image-floor",
    "epsilons",
];
const MET_KEYS: &[&str] = &["norm", "epsilons", "span"];
const SECTIONS: &[&str] = &["driving", "cocycle", "run", "fibered", "met"];

fn config_err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Config {
        line,
        col,
        msg: msg.into(),
    }
}

/// One `key = value` assignment with source coordinates for diagnostics.
#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    key_col: usize,
    value_col: usize,
    key: String,
    value: String,
}

impl Entry {
    fn err_key(&self, msg: impl Into<String>) -> Error {
        config_err(self.line, self.key_col, msg)
    }

    fn err_value(&self, msg: impl Into<String>) -> Error {
        config_err(self.line, self.value_col, msg)
    }
}

/// Raw sectioned assignments, before semantic interpretation.
#[derive(Debug, Default)]
struct RawConfig {
    driving: Vec<Entry>,
    cocycle: Vec<Entry>,
    run: Vec<Entry>,
    fibered: Vec<Entry>,
    met: Vec<Entry>,
}

fn split_sections(text: &str) -> Result<RawConfig> {
    let mut raw = RawConfig::default();
    let mut current: Option<(&str, usize)> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let start_col = content.find(trimmed.chars().next().unwrap().to_string().as_str())
            .map_or(1, |p| p + 1);
        if let Some(name) = trimmed.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return Err(config_err(line_no, start_col, "section header is missing `]`"));
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(config_err(
                    line_no,
                    start_col,
                    format!("unknown section `[{name}]`; expected one of [driving], [cocycle], [run], [fibered], [met]"),
                ));
            }
            current = Some((
                match name {
                    "driving" => "driving",
                    "cocycle" => "cocycle",
                    "run" => "run",
                    "fibered" => "fibered",
                    _ => "met",
                },
                line_no,
            ));
            continue;
        }
        let Some(eq_pos) = content.find('=') else {
            return Err(config_err(
                line_no,
                start_col,
                format!("expected `key = value` or a `[section]` header, found `{trimmed}`"),
            ));
        };
        let key = content[..eq_pos].trim();
        if key.is_empty() {
            return Err(config_err(line_no, start_col, "assignment is missing its key"));
        }
        let key_col = content.find(key).map_or(1, |p| p + 1);
        let value = content[eq_pos + 1..].trim();
        let value_col = if value.is_empty() {
            eq_pos + 2
        } else {
            eq_pos + 1 + content[eq_pos + 1..].find(value).map_or(1, |p| p + 1)
        };
        if value.is_empty() {
            return Err(config_err(line_no, value_col, format!("key `{key}` has an empty value")));
        }
        let Some((section, _)) = current else {
            return Err(config_err(
                line_no,
                key_col,
                format!("assignment `{key}` appears before any `[section]` header"),
            ));
        };
        let entry = Entry {
            line: line_no,
            key_col,
            value_col,
            key: key.to_string(),
            value: value.to_string(),
        };
        match section {
            "driving" => raw.driving.push(entry),
            "cocycle" => raw.cocycle.push(entry),
            "run" => raw.run.push(entry),
            "fibered" => raw.fibered.push(entry),
            _ => raw.met.push(entry),
        }
    }
    Ok(raw)
}

/// Checks keys against the section's vocabulary and rejects duplicates.
fn vet_keys(section: &str, entries: &[Entry], allowed: &[&str]) -> Result<()> {
    let mut seen = HashSet::new();
    for e in entries {
        if !allowed.contains(&e.key.as_str()) {
            return Err(e.err_key(format!(
                "unknown key `{}` in [{section}]; expected one of {}",
                e.key,
                allowed.join(", ")
            )));
        }
        if !seen.insert(e.key.as_str()) {
            return Err(e.err_key(format!("duplicate key `{}` in [{section}]", e.key)));
        }
    }
    Ok(())
}

fn find<'a>(entries: &'a [Entry], key: &str) -> Option<&'a Entry> {
    entries.iter().find(|e| e.key == key)
}

fn parse_usize(e: &Entry) -> Result<usize> {
    e.value
        .parse()
        .map_err(|_| e.err_value(format!("`{}` is not a nonnegative integer", e.value)))
}

fn parse_u64(e: &Entry) -> Result<u64> {
    e.value
        .parse()
        .map_err(|_| e.err_value(format!("`{}` is not a nonnegative integer", e.value)))
}

fn parse_f64(e: &Entry) -> Result<f64> {
    parse_number(&e.value).ok_or_else(|| e.err_value(format!("`{}` is not a number", e.value)))
}

fn parse_f64_list(e: &Entry) -> Result<Vec<f64>> {
    e.value
        .split(',')
        .map(|s| {
            parse_number(s).ok_or_else(|| e.err_value(format!("`{}` is not a number", s.trim())))
        })
        .collect()
}

fn parse_usize_list(e: &Entry) -> Result<Vec<usize>> {
    e.value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| e.err_value(format!("`{}` is not a nonnegative integer", s.trim())))
        })
        .collect()
}

fn parse_i64_list(e: &Entry) -> Result<Vec<i64>> {
    e.value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| e.err_value(format!("`{}` is not an integer", s.trim())))
        })
        .collect()
}

fn build_driving(entries: &[Entry], header_line: usize) -> Result<DrivingSpec> {
    let kind = find(entries, "kind")
        .ok_or_else(|| config_err(header_line, 1, "[driving] needs `kind = cycle` or `kind = bernoulli`"))?;
    match kind.value.as_str() {
        "cycle" => {
            let n_entry = find(entries, "n")
                .ok_or_else(|| kind.err_key("`kind = cycle` needs `n = <length>`"))?;
            let n = parse_usize(n_entry)?;
            if n == 0 {
                return Err(n_entry.err_value("cycle length must be at least 1"));
            }
            for stray in ["probs", "seed"] {
                if let Some(e) = find(entries, stray) {
                    return Err(e.err_key(format!("`{stray}` only applies to `kind = bernoulli`")));
                }
            }
            Ok(DrivingSpec::Cycle { n })
        }
        "bernoulli" => {
            let probs_entry = find(entries, "probs")
                .ok_or_else(|| kind.err_key("`kind = bernoulli` needs `probs = p0,p1,…`"))?;
            let probs = parse_f64_list(probs_entry)?;
            let seed = match find(entries, "seed") {
                Some(e) => parse_u64(e)?,
                None => 0,
            };
            if let Some(e) = find(entries, "n") {
                return Err(e.err_key("`n` only applies to `kind = cycle`"));
            }
            // Validate eagerly so the error carries config coordinates.
            DrivingSystem::bernoulli(probs.clone(), seed)
                .map_err(|err| probs_entry.err_value(err.to_string()))?;
            Ok(DrivingSpec::Bernoulli { probs, seed })
        }
        other => Err(kind.err_value(format!(
            "unknown driving kind `{other}`; expected `cycle` or `bernoulli`"
        ))),
    }
}

fn build_cocycle(entries: &[Entry], header_line: usize, base_dir: &Path) -> Result<CocycleSpec> {
    let matrices = find(entries, "matrices");
    let maps = find(entries, "maps");
    match (matrices, maps) {
        (Some(m), Some(_)) => Err(m.err_key("give `matrices` or `maps`, not both")),
        (None, None) => Err(config_err(
            header_line,
            1,
            "[cocycle] needs `matrices = <file>` or `maps = <file>`",
        )),
        (Some(m), None) => {
            for stray in ["resolution", "ladder", "subsamples"] {
                if let Some(e) = find(entries, stray) {
                    return Err(e.err_key(format!("`{stray}` only applies to map families")));
                }
            }
            Ok(CocycleSpec::Matrices {
                path: base_dir.join(&m.value),
            })
        }
        (None, Some(map_entry)) => {
            let resolution = find(entries, "resolution");
            let ladder = find(entries, "ladder");
            let resolutions = match (resolution, ladder) {
                (Some(r), Some(_)) => {
                    return Err(r.err_key("give `resolution` or `ladder`, not both"))
                }
                (Some(r), None) => {
                    let d = parse_usize(r)?;
                    if d == 0 {
                        return Err(r.err_value("resolution must be at least 1"));
                    }
                    vec![d]
                }
                (None, Some(l)) => {
                    let rungs = parse_usize_list(l)?;
                    if rungs.is_empty() || rungs[0] == 0 {
                        return Err(l.err_value("ladder needs positive resolutions"));
                    }
                    if rungs.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(l.err_value("ladder resolutions must be strictly increasing"));
                    }
                    rungs
                }
                (None, None) => {
                    return Err(map_entry.err_key(
                        "map families need `resolution = <cells>` or `ladder = <cells,…>`",
                    ))
                }
            };
            let subsamples = match find(entries, "subsamples") {
                Some(e) => {
                    let s = parse_usize(e)?;
                    if s == 0 {
                        return Err(e.err_value("subsamples must be at least 1"));
                    }
                    s
                }
                None => UlamOptions::default().subsamples,
            };
            Ok(CocycleSpec::Maps {
                path: base_dir.join(&map_entry.value),
                resolutions,
                ulam: UlamOptions { subsamples },
            })
        }
    }
}

fn build_fibered(entries: &[Entry]) -> Result<FiberedOptions> {
    let mut opts = FiberedOptions::default();
    if let Some(e) = find(entries, "depth") {
        opts.depth = parse_usize(e)?;
        if opts.depth == 0 {
            return Err(e.err_value("depth must be at least 1"));
        }
    }
    if let Some(e) = find(entries, "cylinder-cap") {
        opts.cylinder_cap = parse_usize(e)?;
    }
    if let Some(e) = find(entries, "distortion-samples") {
        opts.distortion_samples = parse_usize(e)?;
        if opts.distortion_samples < 2 {
            return Err(e.err_value("distortion-samples must be at least 2"));
        }
    }
    if let Some(e) = find(entries, "distortion-cap") {
        opts.distortion_cap = parse_f64(e)?;
        if !(opts.distortion_cap >= 1.0) {
            return Err(e.err_value("distortion-cap must be at least 1"));
        }
    }
    if let Some(e) = find(entries, "diameter-threshold") {
        opts.diameter_threshold = parse_f64(e)?;
        if !(opts.diameter_threshold > 0.0) {
            return Err(e.err_value("diameter-threshold must be positive"));
        }
    }
    if let Some(e) = find(entries, "image-floor") {
        opts.image_floor = parse_f64(e)?;
        if !(opts.image_floor > 0.0) {
            return Err(e.err_value("image-floor must be positive"));
        }
    }
    if let Some(e) = find(entries, "epsilons") {
        opts.epsilons = parse_f64_list(e)?;
        if opts.epsilons.iter().any(|&x| !(x > 0.0)) {
            return Err(e.err_value("epsilons must be positive"));
        }
    }
    Ok(opts)
}

impl ExperimentConfig {
    /// Parses config text. Relative file paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw = split_sections(text)?;
        vet_keys("driving", &raw.driving, DRIVING_KEYS)?;
        vet_keys("cocycle", &raw.cocycle, COCYCLE_KEYS)?;
        vet_keys("run", &raw.run, RUN_KEYS)?;
        vet_keys("fibered", &raw.fibered, FIBERED_KEYS)?;
        vet_keys("met", &raw.met, MET_KEYS)?;

        if raw.driving.is_empty() {
            return Err(config_err(1, 1, "config needs a [driving] section"));
        }
        if raw.cocycle.is_empty() {
            return Err(config_err(1, 1, "config needs a [cocycle] section"));
        }
        let driving = build_driving(&raw.driving, raw.driving[0].line)?;
        let cocycle = build_cocycle(&raw.cocycle, raw.cocycle[0].line, base_dir)?;

        let harness_entry = find(&raw.run, "harness").ok_or_else(|| {
            config_err(
                1,
                1,
                "config needs `[run]` with `harness = theorem-a | lift | skew | met | fibered-report`",
            )
        })?;
        let harness = Harness::from_token(&harness_entry.value).ok_or_else(|| {
            harness_entry.err_value(format!(
                "unknown harness `{}`; expected theorem-a, lift, skew, met, or fibered-report",
                harness_entry.value
            ))
        })?;

        match (&cocycle, harness) {
            (CocycleSpec::Matrices { .. }, Harness::Skew | Harness::FiberedReport) => {
                return Err(harness_entry.err_value(format!(
                    "the {harness} harness needs a map family (`maps = <file>`)",
                )));
            }
            _ => {}
        }
        if matches!(driving, DrivingSpec::Bernoulli { .. })
            && matches!(harness, Harness::Lift | Harness::Skew | Harness::Met)
        {
            return Err(harness_entry.err_value(format!(
                "the {harness} harness needs `kind = cycle` driving (product-space assembly is finite only there)",
            )));
        }

        let tol = match find(&raw.run, "tol") {
            Some(e) => {
                let t = parse_f64(e)?;
                if !(t > 0.0) {
                    return Err(e.err_value("tol must be positive"));
                }
                t
            }
            None => match cocycle {
                CocycleSpec::Matrices { .. } => 1e-9,
                CocycleSpec::Maps { .. } => 1e-6,
            },
        };
        let max_steps = match find(&raw.run, "max-steps") {
            Some(e) => {
                let s = parse_usize(e)?;
                if s == 0 {
                    return Err(e.err_value("max-steps must be at least 1"));
                }
                s
            }
            None => 100_000,
        };
        let horizon = match find(&raw.run, "horizon") {
            Some(e) => {
                let h = parse_usize(e)?;
                if h == 0 {
                    return Err(e.err_value("horizon must be at least 1"));
                }
                h
            }
            None => 256,
        };
        let fibers = match find(&raw.run, "fibers") {
            Some(e) => {
                let f = parse_i64_list(e)?;
                if f.is_empty() {
                    return Err(e.err_value("fibers list is empty"));
                }
                Some(f)
            }
            None => None,
        };
        let seeds_count = match find(&raw.run, "seeds-count") {
            Some(e) => {
                let s = parse_usize(e)?;
                if s == 0 {
                    return Err(e.err_value("seeds-count must be at least 1"));
                }
                s
            }
            None => 3,
        };
        let seed = match find(&raw.run, "seed") {
            Some(e) => parse_u64(e)?,
            None => 0,
        };
        let out = find(&raw.run, "out").map(|e| base_dir.join(&e.value));

        let fibered = build_fibered(&raw.fibered)?;

        let met_norm = match find(&raw.met, "norm") {
            Some(e) => match e.value.as_str() {
                "abs-sum" => NormKind::AbsoluteSum,
                "euclidean" => NormKind::Euclidean,
                "max" => NormKind::Max,
                other => {
                    return Err(e.err_value(format!(
                        "unknown norm `{other}`; expected abs-sum, euclidean, or max"
                    )))
                }
            },
            None => NormKind::AbsoluteSum,
        };
        let met_epsilons = match find(&raw.met, "epsilons") {
            Some(e) => {
                let eps = parse_f64_list(e)?;
                if eps.iter().any(|&x| !(x > 0.0)) {
                    return Err(e.err_value("epsilons must be positive"));
                }
                eps
            }
            None => vec![1e-2, 1e-4],
        };
        let met_span = match find(&raw.met, "span") {
            Some(e) => {
                let s = parse_usize(e)?;
                if s == 0 {
                    return Err(e.err_value("span must be at least 1"));
                }
                s
            }
            None => 64,
        };

        Ok(ExperimentConfig {
            driving,
            cocycle,
            harness,
            tol,
            max_steps,
            horizon,
            fibers,
            seeds_count,
            seed,
            out,
            fibered,
            met_norm,
            met_epsilons,
            met_span,
        })
    }

    /// Reads and parses a config file; relative paths inside it resolve
    /// against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        ExperimentConfig::parse(&text, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "\
[driving]
kind = cycle
n = 2

[cocycle]
matrices = period2.matrices

[run]
harness = theorem-a
tol = 1e-9
seed = 42
";

    #[test]
    fn parses_a_basic_cycle_config() {
        let cfg = ExperimentConfig::parse(BASIC, Path::new("/tmp/cfgdir")).unwrap();
        assert_eq!(cfg.driving, DrivingSpec::Cycle { n: 2 });
        assert_eq!(
            cfg.cocycle,
            CocycleSpec::Matrices {
                path: PathBuf::from("/tmp/cfgdir/period2.matrices")
            }
        );
        assert_eq!(cfg.harness, Harness::TheoremA);
        assert_eq!(cfg.tol, 1e-9);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.max_steps, 100_000);
        assert_eq!(cfg.horizon, 256);
        assert_eq!(cfg.seeds_count, 3);
        assert!(cfg.fibers.is_none());
        assert!(cfg.out.is_none());
    }

    #[test]
    fn parses_maps_with_ladder_and_knobs() {
        let text = "\
[driving]
kind = cycle
n = 1

[cocycle]
maps = lsv.maps
ladder = 64,256,1024
subsamples = 32

[run]
harness = fibered-report
fibers = 0
out = reports

[fibered]
depth = 4
epsilons = 0.1,1/100
";
        let cfg = ExperimentConfig::parse(text, Path::new("base")).unwrap();
        match &cfg.cocycle {
            CocycleSpec::Maps {
                path,
                resolutions,
                ulam,
            } => {
                assert_eq!(path, &PathBuf::from("base/lsv.maps"));
                assert_eq!(resolutions, &[64, 256, 1024]);
                assert_eq!(ulam.subsamples, 32);
            }
            other => panic!("expected maps, got {other:?}"),
        }
        assert_eq!(cfg.harness, Harness::FiberedReport);
        assert_eq!(cfg.tol, 1e-6, "map families default to the Ulam tolerance");
        assert_eq!(cfg.fibers, Some(vec![0]));
        assert_eq!(cfg.out, Some(PathBuf::from("base/reports")));
        assert_eq!(cfg.fibered.depth, 4);
        assert_eq!(cfg.fibered.epsilons, vec![0.1, 0.01]);
        assert_eq!(cfg.fibered.cylinder_cap, FiberedOptions::default().cylinder_cap);
    }

    #[test]
    fn parses_bernoulli_driving_and_met_knobs() {
        let text = "\
[driving]
kind = bernoulli
probs = 1/3,2/3
seed = 9

[cocycle]
matrices = pair.matrices

[run]
harness = theorem-a

[met]
norm = euclidean
epsilons = 1e-2
span = 16
";
        let cfg = ExperimentConfig::parse(text, Path::new(".")).unwrap();
        match &cfg.driving {
            DrivingSpec::Bernoulli { probs, seed } => {
                assert_eq!(probs.len(), 2);
                assert!((probs[0] - 1.0 / 3.0).abs() < 1e-15);
                assert_eq!(*seed, 9);
            }
            other => panic!("expected bernoulli, got {other:?}"),
        }
        assert_eq!(cfg.met_norm, NormKind::Euclidean);
        assert_eq!(cfg.met_epsilons, vec![1e-2]);
        assert_eq!(cfg.met_span, 16);
        cfg.driving.build().unwrap();
    }

    fn expect_config_err(text: &str) -> (usize, usize, String) {
        match ExperimentConfig::parse(text, Path::new(".")) {
            Err(Error::Config { line, col, msg }) => (line, col, msg),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_section_and_key_report_coordinates() {
        let (line, col, msg) = expect_config_err("[driving]\nkind = cycle\nn = 2\n\n[bogus]\n");
        assert_eq!((line, col), (5, 1));
        assert!(msg.contains("[bogus]"), "{msg}");

        let (line, col, msg) = expect_config_err(
            "[driving]\nkind = cycle\nn = 2\nwobble = 3\n\n[cocycle]\nmatrices = m\n\n[run]\nharness = lift\n",
        );
        assert_eq!((line, col), (4, 1));
        assert!(msg.contains("wobble"), "{msg}");

        // Indented keys report the column where the key starts.
        let (line, col, _) = expect_config_err(
            "[driving]\n  wobble = 3\n",
        );
        assert_eq!((line, col), (2, 3));
    }

    #[test]
    fn value_errors_point_at_the_value() {
        let (line, col, msg) = expect_config_err(
            "[driving]\nkind = cycle\nn = two\n\n[cocycle]\nmatrices = m\n\n[run]\nharness = lift\n",
        );
        assert_eq!(line, 3);
        assert_eq!(col, 5, "column of `two` in `n = two`");
        assert!(msg.contains("two"), "{msg}");

        let (line, _, msg) = expect_config_err(
            "[driving]\nkind = cycle\nn = 2\n\n[cocycle]\nmatrices = m\n\n[run]\nharness = warp\n",
        );
        assert_eq!(line, 9);
        assert!(msg.contains("warp"), "{msg}");
    }

    #[test]
    fn semantic_mistakes_are_rejected() {
        // matrices and maps together
        expect_config_err(
            "[driving]\nkind = cycle\nn = 2\n\n[cocycle]\nmatrices = m\nmaps = f\n\n[run]\nharness = lift\n",
        );
        // decreasing ladder
        expect_config_err(
            "[driving]\nkind = cycle\nn = 1\n\n[cocycle]\nmaps = f\nladder = 64,64\n\n[run]\nharness = fibered-report\n",
        );
        // skew harness without maps
        let (_, _, msg) = expect_config_err(
            "[driving]\nkind = cycle\nn = 2\n\n[cocycle]\nmatrices = m\n\n[run]\nharness = skew\n",
        );
        assert!(msg.contains("map family"), "{msg}");
        // lift harness on a sampled path
        let (_, _, msg) = expect_config_err(
            "[driving]\nkind = bernoulli\nprobs = 0.5,0.5\n\n[cocycle]\nmatrices = m\n\n[run]\nharness = lift\n",
        );
        assert!(msg.contains("cycle"), "{msg}");
        // probabilities that do not sum to one
        let (line, _, msg) = expect_config_err(
            "[driving]\nkind = bernoulli\nprobs = 0.5,0.4\n\n[cocycle]\nmatrices = m\n\n[run]\nharness = theorem-a\n",
        );
        assert_eq!(line, 3);
        assert!(msg.contains("sum to 1"), "{msg}");
        // duplicate key
        let (line, _, msg) = expect_config_err(
            "[driving]\nkind = cycle\nn = 2\nn = 3\n\n[cocycle]\nmatrices = m\n\n[run]\nharness = lift\n",
        );
        assert_eq!(line, 4);
        assert!(msg.contains("duplicate"), "{msg}");
    }

    #[test]
    fn harness_tokens_are_stable() {
        let tokens: Vec<&str> = Harness::ALL.iter().map(|h| h.token()).collect();
        assert_eq!(tokens, ["theorem-a", "lift", "skew", "met", "fibered-report"]);
        for h in Harness::ALL {
            assert_eq!(Harness::from_token(h.token()), Some(h));
            assert_eq!(format!("{h}"), h.token());
        }
    }
}
