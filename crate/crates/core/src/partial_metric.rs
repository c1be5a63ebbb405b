//! Partial metrics on subsets of the real line.
//!
//! A partial metric `ρ` relaxes a metric by allowing a positive self-distance
//! `ρ(x, x)`. Convergence notions measure how far `x_k` sits from a candidate
//! limit `x` through the deviation `|ρ(x_k, x) − ρ(x, x)|`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack allowed on every axiom inequality.
pub const AXIOM_TOLERANCE: f64 = 1e-12;

/// Sample sets up to this size are checked over every ordered triple.
const EXHAUSTIVE_LIMIT: usize = 100;

/// Random triples drawn per sample point when the set is too large for
/// exhaustive checking.
const TRIPLES_PER_SAMPLE: usize = 10;

/// A partial metric on a stated real domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartialMetricSpec {
    /// `ρ(x, y) = max{x, y}` on the nonnegative reals.
    Max,
    /// `ρ(x, y) = −min{x, y}` on the nonpositive reals.
    NegMin,
    /// `ρ(x, y) = |x − y|` on all reals.
    Usual,
    /// A finite lookup table over a finite point set.
    Custom { table: CustomTable },
}

impl PartialMetricSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PartialMetricSpec::Max => "max",
            PartialMetricSpec::NegMin => "neg_min",
            PartialMetricSpec::Usual => "usual",
            PartialMetricSpec::Custom { .. } => "custom",
        }
    }

    /// Human-readable description of the domain.
    pub fn domain(&self) -> &'static str {
        match self {
            PartialMetricSpec::Max => "x >= 0",
            PartialMetricSpec::NegMin => "x <= 0",
            PartialMetricSpec::Usual => "x finite",
            PartialMetricSpec::Custom { .. } => "x in the table's point set",
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match self {
            PartialMetricSpec::Max => x >= 0.0,
            PartialMetricSpec::NegMin => x <= 0.0,
            PartialMetricSpec::Usual => true,
            PartialMetricSpec::Custom { table } => table.index_of(x).is_some(),
        }
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                metric: self.name(),
                value: x,
                domain: self.domain(),
            })
        }
    }

    /// Evaluates `ρ(x, y)`.
    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    // Callers guarantee both points are in the domain.
    fn eval_unchecked(&self, x: f64, y: f64) -> f64 {
        match self {
            PartialMetricSpec::Max => x.max(y),
            // + 0.0 turns -0.0 into 0.0
            PartialMetricSpec::NegMin => -x.min(y) + 0.0,
            PartialMetricSpec::Usual => (x - y).abs(),
            PartialMetricSpec::Custom { table } => {
                let i = table.index_of(x).expect("checked domain");
                let j = table.index_of(y).expect("checked domain");
                table.rho(i, j)
            }
        }
    }

    /// `|ρ(x_k, x) − ρ(x, x)|`.
    pub fn deviation(&self, xk: f64, x: f64) -> Result<f64> {
        self.check(xk)?;
        self.check(x)?;
        if xk == x {
            return Ok(0.0);
        }
        Ok((self.eval_unchecked(xk, x) - self.eval_unchecked(x, x)).abs())
    }

    /// Deterministic sample of domain points for axiom checks.
    ///
    /// Half of the points are small integers so that ties (`x = y`,
    /// `ρ(x, y) = ρ(y, y)`) are exercised; the rest are spread continuously.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let PartialMetricSpec::Custom { table } = self {
            let pts = table.points();
            return (0..count)
                .map(|_| pts[rng.gen_range(0..pts.len())])
                .collect();
        }
        let sign = match self {
            PartialMetricSpec::NegMin => -1.0,
            _ => 1.0,
        };
        (0..count)
            .map(|i| {
                let magnitude = if i % 2 == 0 {
                    f64::from(rng.gen_range(0u32..=10))
                } else {
                    rng.gen_range(0.0..100.0)
                };
                match self {
                    PartialMetricSpec::Usual if rng.gen_bool(0.5) => -magnitude,
                    _ => sign * magnitude + 0.0,
                }
            })
            .collect()
    }
}

impl fmt::Display for PartialMetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Symmetric lookup table `ρ(x, y)` over a finite set of real points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64, f64)>", into = "Vec<(f64, f64, f64)>")]
pub struct CustomTable {
    points: Vec<f64>,
    // row-major, points.len() squared
    rho: Vec<f64>,
}

impl CustomTable {
    /// Builds a table from `(x, y, ρ)` entries, applying symmetric closure.
    ///
    /// Fails when an entry and its mirror disagree, or when some pair of
    /// points has no value after closure.
    pub fn from_entries(entries: &[(f64, f64, f64)]) -> Result<Self> {
        let mut map: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        let key = |a: f64, b: f64| (a.to_bits(), b.to_bits());
        for &(x, y, r) in entries {
            if !(x.is_finite() && y.is_finite() && r.is_finite()) {
                return Err(Error::Load(format!("non-finite entry ({x}, {y}, {r})")));
            }
            // normalize -0.0
            let (x, y) = (x + 0.0, y + 0.0);
            for k in [key(x, y), key(y, x)] {
                match map.get(&k) {
                    Some(&prev) if prev != r => {
                        return Err(Error::Load(format!(
                            "conflicting values for ({x}, {y}): {prev} and {r}"
                        )));
                    }
                    _ => {
                        map.insert(k, r);
                    }
                }
            }
        }
        let mut points: Vec<f64> = map.keys().map(|&(a, _)| f64::from_bits(a)).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        if points.is_empty() {
            return Err(Error::Load("table has no entries".into()));
        }
        let n = points.len();
        let mut rho = vec![0.0; n * n];
        for (i, &x) in points.iter().enumerate() {
            for (j, &y) in points.iter().enumerate() {
                rho[i * n + j] = *map
                    .get(&key(x, y))
                    .ok_or_else(|| Error::Load(format!("missing value for pair ({x}, {y})")))?;
            }
        }
        Ok(CustomTable { points, rho })
    }

    /// Loads a CSV file with header `x,y,rho`.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = csv::Reader::from_path(path)
            .map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(reader)
    }

    pub fn from_csv_reader<R: std::io::Read>(mut reader: csv::Reader<R>) -> Result<Self> {
        let headers = reader
            .headers()
            .map_err(|e| Error::Load(e.to_string()))?
            .iter()
            .map(str::trim)
            .collect::<Vec<_>>();
        if headers != ["x", "y", "rho"] {
            return Err(Error::Load(format!(
                "expected header x,y,rho, found {}",
                headers.join(",")
            )));
        }
        let mut entries = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Load(e.to_string()))?;
            let field = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .unwrap_or("")
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Load(format!("row {}: column {i}: {e}", line + 2)))
            };
            entries.push((field(0)?, field(1)?, field(2)?));
        }
        Self::from_entries(&entries)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    fn index_of(&self, x: f64) -> Option<usize> {
        let x = x + 0.0;
        self.points.binary_search_by(|p| p.total_cmp(&x)).ok()
    }

    fn rho(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.points.len() + j]
    }
}

impl TryFrom<Vec<(f64, f64, f64)>> for CustomTable {
    type Error = Error;

    fn try_from(entries: Vec<(f64, f64, f64)>) -> Result<Self> {
        CustomTable::from_entries(&entries)
    }
}

impl From<CustomTable> for Vec<(f64, f64, f64)> {
    fn from(table: CustomTable) -> Self {
        let n = table.points.len();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push((table.points[i], table.points[j], table.rho(i, j)));
            }
        }
        out
    }
}

/// The four partial metric axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// `0 ≤ ρ(x, x) ≤ ρ(x, y)`.
    SmallSelfDistance,
    /// `ρ(x, x) = ρ(x, y) = ρ(y, y) ⇒ x = y`.
    Separation,
    /// `ρ(x, y) = ρ(y, x)`.
    Symmetry,
    /// `ρ(x, z) ≤ ρ(x, y) + ρ(y, z) − ρ(y, y)`.
    Triangle,
}

impl Axiom {
    pub const ALL: [Axiom; 4] = [
        Axiom::SmallSelfDistance,
        Axiom::Separation,
        Axiom::Symmetry,
        Axiom::Triangle,
    ];
}

/// Points at which an axiom failed. Pair axioms leave `z` empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub z: Option<f64>,
}

impl Witness {
    /// Re-evaluates the axiom at the witness points.
    pub fn violates(&self, spec: &PartialMetricSpec, axiom: Axiom) -> Result<bool> {
        let Witness { x, y, z } = *self;
        Ok(match axiom {
            Axiom::Triangle => {
                let z = z.ok_or_else(|| {
                    Error::InvalidParameter("triangle witness needs three points".into())
                })?;
                violates_triangle(spec, x, y, z)?
            }
            _ => violates_pair(spec, axiom, x, y)?,
        })
    }
}

fn violates_pair(spec: &PartialMetricSpec, axiom: Axiom, x: f64, y: f64) -> Result<bool> {
    let xx = spec.evaluate(x, x)?;
    let xy = spec.evaluate(x, y)?;
    let yx = spec.evaluate(y, x)?;
    let yy = spec.evaluate(y, y)?;
    Ok(match axiom {
        Axiom::SmallSelfDistance => xx < -AXIOM_TOLERANCE || xx > xy + AXIOM_TOLERANCE,
        // exact: a tolerance would flag distinct points that are merely close
        Axiom::Separation => x != y && xx == xy && xy == yy,
        Axiom::Symmetry => (xy - yx).abs() > AXIOM_TOLERANCE,
        Axiom::Triangle => unreachable!("triangle is a triple axiom"),
    })
}

fn violates_triangle(spec: &PartialMetricSpec, x: f64, y: f64, z: f64) -> Result<bool> {
    let xz = spec.evaluate(x, z)?;
    let xy = spec.evaluate(x, y)?;
    let yz = spec.evaluate(y, z)?;
    let yy = spec.evaluate(y, y)?;
    Ok(xz > xy + yz - yy + AXIOM_TOLERANCE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomStatus {
    pub axiom: Axiom,
    pub passed: bool,
    pub witness: Option<Witness>,
}

/// Outcome of [`verify_axioms`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub metric: String,
    pub statuses: Vec<AxiomStatus>,
    /// Ordered pairs checked for the pair axioms.
    pub pairs_tested: usize,
    /// Triples checked for the triangle axiom.
    pub triples_tested: usize,
    pub exhaustive: bool,
    /// Samples dropped because they were outside the domain.
    pub rejected_samples: usize,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.statuses.iter().all(|s| s.passed)
    }

    pub fn status(&self, axiom: Axiom) -> &AxiomStatus {
        self.statuses
            .iter()
            .find(|s| s.axiom == axiom)
            .expect("report covers every axiom")
    }
}

/// Checks the four axioms over the given sample points.
///
/// Sets of at most 100 points are checked over every ordered pair and
/// triple. Larger sets use every consecutive pair plus `10 · len` random
/// triples drawn with `seed`. Points outside the domain are dropped and
/// counted in the report.
pub fn verify_axioms(spec: &PartialMetricSpec, samples: &[f64], seed: u64) -> AxiomReport {
    let points: Vec<f64> = samples
        .iter()
        .copied()
        .filter(|&x| spec.contains(x))
        .collect();
    let rejected_samples = samples.len() - points.len();
    let mut first: [Option<Witness>; 4] = [None; 4];
    let mut record = |axiom: Axiom, w: Witness| {
        let slot = &mut first[axiom as usize];
        if slot.is_none() {
            *slot = Some(w);
        }
    };

    let mut pair = |x: f64, y: f64| {
        for axiom in [Axiom::SmallSelfDistance, Axiom::Separation, Axiom::Symmetry] {
            if violates_pair(spec, axiom, x, y).unwrap_or(true) {
                record(axiom, Witness { x, y, z: None });
            }
        }
    };

    let n = points.len();
    let exhaustive = n <= EXHAUSTIVE_LIMIT;
    let (mut pairs_tested, mut triples_tested) = (0, 0);
    let mut triples: Vec<(f64, f64, f64)> = Vec::new();
    if exhaustive {
        for &x in &points {
            for &y in &points {
                pair(x, y);
                pairs_tested += 1;
                for &z in &points {
                    triples.push((x, y, z));
                }
            }
        }
    } else {
        for w in points.windows(2) {
            pair(w[0], w[1]);
            pair(w[1], w[0]);
            pairs_tested += 2;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..TRIPLES_PER_SAMPLE * n {
            let x = points[rng.gen_range(0..n)];
            let y = points[rng.gen_range(0..n)];
            let z = points[rng.gen_range(0..n)];
            pair(x, y);
            pairs_tested += 1;
            triples.push((x, y, z));
        }
    }
    for (x, y, z) in triples {
        triples_tested += 1;
        if violates_triangle(spec, x, y, z).unwrap_or(true) {
            record(Axiom::Triangle, Witness { x, y, z: Some(z) });
        }
    }

    let statuses = Axiom::ALL
        .iter()
        .map(|&axiom| AxiomStatus {
            axiom,
            passed: first[axiom as usize].is_none(),
            witness: first[axiom as usize],
        })
        .collect();
    AxiomReport {
        metric: spec.name().to_string(),
        statuses,
        pairs_tested,
        triples_tested,
        exhaustive,
        rejected_samples,
    }
}

/// Exhaustive check of a custom table over its own point set.
pub fn verify_table(table: &CustomTable) -> AxiomReport {
    let spec = PartialMetricSpec::Custom {
        table: table.clone(),
    };
    verify_axioms(&spec, table.points(), 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corrupted() -> CustomTable {
        // ρ(a,a) = 1 exceeds ρ(a,b) = 0.5
        CustomTable::from_entries(&[(1.0, 1.0, 1.0), (1.0, 2.0, 0.5), (2.0, 2.0, 0.0)]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(PartialMetricSpec::Max.evaluate(2.0, 3.0).unwrap(), 3.0);
        assert_eq!(PartialMetricSpec::NegMin.evaluate(-2.0, -5.0).unwrap(), 5.0);
        assert_eq!(PartialMetricSpec::Usual.evaluate(2.0, 5.0).unwrap(), 3.0);
    }

    #[test]
    fn deviation_examples() {
        assert_eq!(PartialMetricSpec::Max.deviation(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(PartialMetricSpec::Max.deviation(0.0, 0.0).unwrap(), 0.0);
        // |−min(−7, 0) − (−min(0, 0))| = |7 − 0|
        let hand = ((-f64::min(-7.0, 0.0)) - (-f64::min(0.0, 0.0))).abs();
        assert_eq!(
            PartialMetricSpec::NegMin.deviation(-7.0, 0.0).unwrap(),
            hand
        );
        assert_eq!(hand, 7.0);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            PartialMetricSpec::Max.evaluate(-1.0, 0.0),
            Err(Error::Domain { metric: "max", .. })
        ));
        assert!(PartialMetricSpec::NegMin.deviation(3.0, 0.0).is_err());
        assert!(PartialMetricSpec::Usual.evaluate(f64::NAN, 0.0).is_err());
        assert!(PartialMetricSpec::Custom { table: corrupted() }
            .evaluate(3.0, 1.0)
            .is_err());
    }

    #[test]
    fn neg_min_self_distance_is_positive_zero() {
        let r = PartialMetricSpec::NegMin.evaluate(0.0, 0.0).unwrap();
        assert!(r.is_sign_positive());
    }

    #[test]
    fn builtins_pass_over_seeded_samples() {
        for spec in [
            PartialMetricSpec::Max,
            PartialMetricSpec::NegMin,
            PartialMetricSpec::Usual,
        ] {
            let samples = spec.sample_points(10_000, 7);
            let report = verify_axioms(&spec, &samples, 7);
            assert!(report.all_passed(), "{spec}: {report:?}");
            assert_eq!(report.triples_tested, 100_000);
            assert_eq!(report.rejected_samples, 0);
        }
    }

    #[test]
    fn corrupted_table_fails_small_self_distance() {
        let table = corrupted();
        let report = verify_table(&table);
        assert!(report.exhaustive);
        let status = report.status(Axiom::SmallSelfDistance);
        assert!(!status.passed);
        let w = status.witness.unwrap();
        assert_eq!((w.x, w.y), (1.0, 2.0));
        let spec = PartialMetricSpec::Custom { table };
        assert!(w.violates(&spec, Axiom::SmallSelfDistance).unwrap());
        assert!(report.status(Axiom::Symmetry).passed);
    }

    #[test]
    fn separation_failure_is_detected_on_tables() {
        // every value equal: ρ(a,a) = ρ(a,b) = ρ(b,b) with a ≠ b
        let table = CustomTable::from_entries(&[(0.0, 0.0, 1.0), (0.0, 1.0, 1.0), (1.0, 1.0, 1.0)])
            .unwrap();
        let report = verify_table(&table);
        assert!(!report.status(Axiom::Separation).passed);
        assert!(report.status(Axiom::SmallSelfDistance).passed);
    }

    #[test]
    fn triangle_failure_is_detected_on_tables() {
        let table = CustomTable::from_entries(&[
            (0.0, 0.0, 0.0),
            (1.0, 1.0, 0.0),
            (2.0, 2.0, 0.0),
            (0.0, 1.0, 1.0),
            (1.0, 2.0, 1.0),
            (0.0, 2.0, 5.0),
        ])
        .unwrap();
        let report = verify_table(&table);
        let status = report.status(Axiom::Triangle);
        assert!(!status.passed);
        let spec = PartialMetricSpec::Custom { table };
        assert!(status
            .witness
            .unwrap()
            .violates(&spec, Axiom::Triangle)
            .unwrap());
    }

    #[test]
    fn table_load_rejects_conflicts_and_gaps() {
        let conflict = CustomTable::from_entries(&[(0.0, 1.0, 1.0), (1.0, 0.0, 2.0)]);
        assert!(matches!(conflict, Err(Error::Load(_))));
        let gap = CustomTable::from_entries(&[(0.0, 1.0, 1.0), (0.0, 0.0, 0.0)]);
        assert!(matches!(gap, Err(Error::Load(_))));
    }

    #[test]
    fn table_csv_applies_symmetric_closure() {
        let data = "x,y,rho\n1,1,1\n1,2,0.5\n2,2,0\n";
        let table =
            CustomTable::from_csv_reader(csv::Reader::from_reader(data.as_bytes())).unwrap();
        let spec = PartialMetricSpec::Custom { table };
        assert_eq!(spec.evaluate(2.0, 1.0).unwrap(), 0.5);
        let bad = "a,b,c\n1,1,1\n";
        assert!(CustomTable::from_csv_reader(csv::Reader::from_reader(bad.as_bytes())).is_err());
    }

    #[test]
    fn table_serde_roundtrip() {
        let spec = PartialMetricSpec::Custom { table: corrupted() };
        let json = serde_json::to_string(&spec).unwrap();
        let back: PartialMetricSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
