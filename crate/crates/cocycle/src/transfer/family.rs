//! Environment-indexed families of interval maps and their matrix cocycles.
//!
//! A [`RandomMapFamily`] pairs one [`PiecewiseMap`] per environment label
//! with a [`DrivingSystem`]; projecting every map onto a common partition
//! with [`ulam_cocycle`] yields the matrix cocycle the rest of the crate
//! consumes.
//!
//! Families can be read from a text file, one map per line:
//!
//! ```text
//! # label: branch; branch; ...
//! 0: affine [0,1/2) 2 0; affine [1/2,1) 2 -1
//! 1: affine [0,1/3) 3 0; affine [1/3,2/3) 3 -1; affine [2/3,1) 3 -2
//! 2: lsv [0,1/2) 1.5; affine [1/2,1) 2 -1
//! ```
//!
//! Each branch is `affine [LO,HI) SLOPE INTERCEPT` or `lsv [LO,HI) GAMMA`;
//! numbers may be decimals or fractions `a/b`. Labels must count up from 0
//! in file order. `#` starts a comment, blank lines are skipped.

use crate::driving::{DrivingSystem, Point};
use crate::error::{Error, Result};
use crate::io::parse_number;
use crate::markov::MarkovCocycle;
use crate::transfer::map::{Branch, BranchFormula, PiecewiseMap};
use crate::transfer::ulam::{ulam_matrix, Partition, UlamOptions};

/// One interval map per environment label, over a driving system.
#[derive(Debug, Clone)]
pub struct RandomMapFamily {
    maps: Vec<PiecewiseMap>,
    driving: DrivingSystem,
}

impl RandomMapFamily {
    /// Validate that the map table covers the driving system's alphabet.
    pub fn new(maps: Vec<PiecewiseMap>, driving: DrivingSystem) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidArgument("no maps".into()));
        }
        if maps.len() != driving.alphabet_size() {
            return Err(Error::DimensionMismatch(format!(
                "driving system needs {} maps, table has {}",
                driving.alphabet_size(),
                maps.len()
            )));
        }
        Ok(RandomMapFamily { maps, driving })
    }

    /// A single map driven by the trivial 1-cycle.
    pub fn constant(map: PiecewiseMap) -> Self {
        RandomMapFamily {
            maps: vec![map],
            driving: DrivingSystem::FiniteCycle { n: 1 },
        }
    }

    pub fn maps(&self) -> &[PiecewiseMap] {
        &self.maps
    }

    pub fn driving(&self) -> &DrivingSystem {
        &self.driving
    }

    pub fn map(&self, label: usize) -> Result<&PiecewiseMap> {
        self.maps
            .get(label)
            .ok_or_else(|| Error::OutOfRange(format!("map label {label}")))
    }

    /// The map acting at base point `w`.
    pub fn map_at(&self, w: Point) -> Result<&PiecewiseMap> {
        self.map(self.driving.label(w)?)
    }
}

/// Project every map of the family onto one partition, producing the matrix
/// cocycle of the family at that resolution.
pub fn ulam_cocycle(
    family: &RandomMapFamily,
    partition: &Partition,
    opts: &UlamOptions,
) -> Result<MarkovCocycle> {
    let table = family
        .maps()
        .iter()
        .map(|map| ulam_matrix(map, partition, opts))
        .collect::<Result<Vec<_>>>()?;
    MarkovCocycle::new(table, family.driving().clone())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::FileFormat {
        line,
        msg: msg.into(),
    }
}

fn parse_branch(token: &str, line: usize) -> Result<Branch> {
    let mut parts = token.split_whitespace();
    let kind = parts
        .next()
        .ok_or_else(|| parse_err(line, "empty branch"))?;
    let interval = parts
        .next()
        .ok_or_else(|| parse_err(line, "branch is missing its [LO,HI) interval"))?;
    let inner = interval
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| parse_err(line, format!("interval `{interval}` is not of form [LO,HI)")))?;
    let (lo_s, hi_s) = inner
        .split_once(',')
        .ok_or_else(|| parse_err(line, format!("interval `{interval}` needs two endpoints")))?;
    let lo = parse_number(lo_s)
        .ok_or_else(|| parse_err(line, format!("bad interval endpoint `{lo_s}`")))?;
    let hi = parse_number(hi_s)
        .ok_or_else(|| parse_err(line, format!("bad interval endpoint `{hi_s}`")))?;

    let mut number = |name: &str| -> Result<f64> {
        let s = parts
            .next()
            .ok_or_else(|| parse_err(line, format!("{kind} branch is missing {name}")))?;
        parse_number(s).ok_or_else(|| parse_err(line, format!("bad {name} `{s}`")))
    };
    let formula = match kind {
        "affine" => {
            let slope = number("its slope")?;
            let intercept = number("its intercept")?;
            BranchFormula::Affine { slope, intercept }
        }
        "lsv" => {
            let gamma = number("its exponent")?;
            BranchFormula::LsvLeft { gamma }
        }
        other => {
            return Err(parse_err(
                line,
                format!("unknown branch kind `{other}` (expected affine or lsv)"),
            ))
        }
    };
    if let Some(extra) = parts.next() {
        return Err(parse_err(
            line,
            format!("unexpected trailing token `{extra}`"),
        ));
    }
    Branch::new(lo, hi, formula).map_err(|e| parse_err(line, e.to_string()))
}

/// Parse a map-family file (see the module docs for the grammar). Returns
/// the maps in label order.
pub fn parse_map_family(text: &str) -> Result<Vec<PiecewiseMap>> {
    let mut maps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (label_s, rest) = content
            .split_once(':')
            .ok_or_else(|| parse_err(line, "expected `LABEL: branch; branch; ...`"))?;
        let label: usize = label_s
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad label `{}`", label_s.trim())))?;
        if label != maps.len() {
            return Err(parse_err(
                line,
                format!("labels must count up from 0; expected {}, got {label}", maps.len()),
            ));
        }
        let branches = rest
            .split(';')
            .map(|tok| parse_branch(tok, line))
            .collect::<Result<Vec<_>>>()?;
        let map = PiecewiseMap::new(branches).map_err(|e| parse_err(line, e.to_string()))?;
        maps.push(map);
    }
    if maps.is_empty() {
        return Err(parse_err(1, "file defines no maps"));
    }
    Ok(maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::entrywise_max_distance;

    #[test]
    fn parses_the_doubling_tripling_pair() {
        let text = "\
# two full-branch affine maps
0: affine [0,1/2) 2 0; affine [1/2,1) 2 -1

1: affine [0,1/3) 3 0; affine [1/3,2/3) 3 -1; affine [2/3,1) 3 -2
";
        let maps = parse_map_family(text).unwrap();
        assert_eq!(maps.len(), 2);
        assert_eq!(maps[0], PiecewiseMap::doubling());
        assert_eq!(maps[1], PiecewiseMap::tripling());
    }

    #[test]
    fn decimals_and_fractions_agree() {
        let frac = parse_map_family("0: affine [0,1/2) 2 0; affine [1/2,1) 2 -1").unwrap();
        let dec = parse_map_family("0: affine [0,0.5) 2 0; affine [0.5,1) 2 -1").unwrap();
        assert_eq!(frac, dec);
    }

    #[test]
    fn parses_the_intermittent_map() {
        let maps = parse_map_family("0: lsv [0,1/2) 1.5; affine [1/2,1) 2 -1").unwrap();
        assert_eq!(maps[0], PiecewiseMap::lsv(1.5).unwrap());
    }

    #[test]
    fn reports_the_offending_line() {
        let text = "0: affine [0,1) 1 0\n1: affine [0,1) 1 zero\n";
        match parse_map_family(text) {
            Err(Error::FileFormat { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_structure() {
        assert!(matches!(
            parse_map_family("affine [0,1) 1 0"),
            Err(Error::FileFormat { .. })
        ));
        assert!(matches!(
            parse_map_family("1: affine [0,1) 1 0"),
            Err(Error::FileFormat { .. })
        ));
        assert!(matches!(
            parse_map_family("0: spline [0,1) 1 0"),
            Err(Error::FileFormat { .. })
        ));
        assert!(matches!(
            parse_map_family("0: affine (0,1) 1 0"),
            Err(Error::FileFormat { .. })
        ));
        assert!(matches!(
            parse_map_family("0: affine [0,1) 1 0 7"),
            Err(Error::FileFormat { .. })
        ));
        assert!(parse_map_family("\n# only comments\n").is_err());
        // structurally fine but an invalid map: branches leave a gap
        assert!(matches!(
            parse_map_family("0: affine [0,1/2) 1 0"),
            Err(Error::FileFormat { .. })
        ));
    }

    #[test]
    fn family_table_must_match_the_alphabet() {
        let maps = vec![PiecewiseMap::doubling()];
        let driving = DrivingSystem::cycle(2).unwrap();
        assert!(RandomMapFamily::new(maps, driving).is_err());
    }

    #[test]
    fn family_cocycle_projects_each_map() {
        let family = RandomMapFamily::new(
            vec![PiecewiseMap::doubling(), PiecewiseMap::tripling()],
            DrivingSystem::cycle(2).unwrap(),
        )
        .unwrap();
        let part = Partition::new(6).unwrap();
        let opts = UlamOptions::default();
        let c = ulam_cocycle(&family, &part, &opts).unwrap();
        assert_eq!(c.dim(), 6);
        for label in 0..2 {
            let direct = ulam_matrix(family.map(label).unwrap(), &part, &opts).unwrap();
            let dev = entrywise_max_distance(
                c.generator(label).unwrap().as_matrix(),
                direct.as_matrix(),
            );
            assert_eq!(dev, 0.0, "generator {label}");
        }
        assert_eq!(family.map_at(1).unwrap(), &PiecewiseMap::tripling());
    }
}
