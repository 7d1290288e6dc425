//! Sample ingestion and the rank-based empirical copula transform.
//!
//! A [`Dataset`] is a T x n table of finite reals, one column per variable.
//! [`pseudo_observations`] maps each column to its normalized ranks
//! `rank / T`, producing an empirical copula sample on (0, 1]^n. Every
//! estimator downstream consumes those pseudo-observations, which is what
//! makes the whole toolkit invariant to monotone transformations of the
//! margins.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// How exact ties are resolved when ranking a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieMode {
    /// Tied values share the average of their ranks. Deterministic.
    Average,
    /// Values get a seeded uniform jitter before ranking, so ties break
    /// into a random permutation. Required when discrete columns would
    /// otherwise collapse k-NN distances to zero.
    Random,
}

/// Tie-resolution policy for the rank transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiePolicy {
    pub mode: TieMode,
    /// Jitter amplitude relative to the column range; zero under `Average`.
    pub jitter_scale: f64,
    pub seed: u64,
}

impl TiePolicy {
    pub fn average() -> Self {
        TiePolicy {
            mode: TieMode::Average,
            jitter_scale: 0.0,
            seed: 0,
        }
    }

    pub fn random(seed: u64) -> Self {
        TiePolicy {
            mode: TieMode::Random,
            jitter_scale: 1e-10,
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

impl Default for TiePolicy {
    fn default() -> Self {
        TiePolicy::average()
    }
}

/// A named table of observations: T rows, n variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Dataset {
    /// Builds a dataset, validating shape, finiteness and name uniqueness.
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyInput("dataset has no columns".into()));
        }
        if names.len() != columns.len() {
            return Err(Error::InvalidData(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let t = columns[0].len();
        if t < 2 {
            return Err(Error::InvalidData(format!(
                "need at least 2 observations, got {t}"
            )));
        }
        for (i, col) in columns.iter().enumerate() {
            if col.len() != t {
                return Err(Error::InvalidData(format!(
                    "column {} has {} rows, expected {}",
                    i + 1,
                    col.len(),
                    t
                )));
            }
            if let Some(r) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "non-finite value at row {}, column {}",
                    r + 1,
                    i + 1
                )));
            }
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::InvalidData("column names are not unique".into()));
        }
        Ok(Dataset { names, columns })
    }

    /// Builds a dataset with default names `v1..vn`.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let names = (1..=columns.len()).map(|i| format!("v{i}")).collect();
        Dataset::new(names, columns)
    }

    /// Single unnamed column.
    pub fn from_column(column: Vec<f64>) -> Result<Self> {
        Dataset::from_columns(vec![column])
    }

    pub fn t(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn row(&self, t: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[t]).collect()
    }

    /// New dataset holding the given columns, in the given order.
    pub fn select(&self, cols: &[usize]) -> Result<Dataset> {
        for &c in cols {
            if c >= self.n() {
                return Err(Error::Dimension(format!(
                    "column index {} out of range (n = {})",
                    c,
                    self.n()
                )));
            }
        }
        Dataset::new(
            cols.iter().map(|&c| self.names[c].clone()).collect(),
            cols.iter().map(|&c| self.columns[c].clone()).collect(),
        )
    }

    /// New dataset restricted to rows `range.start..range.end`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Dataset> {
        if start >= end || end > self.t() {
            return Err(Error::InvalidData(format!(
                "invalid row range {start}..{end} for {} rows",
                self.t()
            )));
        }
        Dataset::new(
            self.names.clone(),
            self.columns.iter().map(|c| c[start..end].to_vec()).collect(),
        )
    }

    /// Stacks the rows of `other` under `self` (column-wise concat).
    pub fn vstack(&self, other: &Dataset) -> Result<Dataset> {
        if self.n() != other.n() {
            return Err(Error::Dimension(format!(
                "cannot stack {}-column dataset onto {}-column dataset",
                other.n(),
                self.n()
            )));
        }
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| {
                let mut c = a.clone();
                c.extend_from_slice(b);
                c
            })
            .collect();
        Dataset::new(self.names.clone(), columns)
    }

    /// Column index by name, or by 1-based position if `key` is an integer.
    pub fn resolve_column(&self, key: &str) -> Result<usize> {
        if let Some(i) = self.names.iter().position(|n| n == key) {
            return Ok(i);
        }
        if let Ok(i) = key.parse::<usize>() {
            if i >= 1 && i <= self.n() {
                return Ok(i - 1);
            }
        }
        Err(Error::Dimension(format!("no column named {key:?}")))
    }
}

/// Options for delimited-text ingestion.
#[derive(Debug, Clone, Copy)]
pub struct CsvOptions {
    pub has_header: bool,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            has_header: true,
            delimiter: b',',
        }
    }
}

/// Reads a rectangular numeric CSV (RFC-4180 subset, '.' decimal point).
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    load_delimited(
        path,
        CsvOptions {
            has_header,
            ..Default::default()
        },
    )
}

/// Reads a delimited numeric table; `opts.delimiter` selects CSV vs TSV.
pub fn load_delimited(path: impl AsRef<Path>, opts: CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .delimiter(opts.delimiter)
        .flexible(true)
        .from_reader(file);

    let names: Option<Vec<String>> = if opts.has_header {
        let headers = reader
            .headers()
            .map_err(|e| Error::InvalidData(format!("bad header: {e}")))?;
        Some(headers.iter().map(|h| h.trim().to_string()).collect())
    } else {
        None
    };

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut row = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| Error::InvalidData(format!("bad record: {e}")))?;
        row += 1;
        if row == 1 && columns.is_empty() {
            columns = vec![Vec::new(); record.len()];
        }
        if record.len() != columns.len() {
            return Err(Error::Shape {
                row,
                expected: columns.len(),
                found: record.len(),
            });
        }
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                row,
                col: col + 1,
                value: field.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    col: col + 1,
                    value: field.to_string(),
                });
            }
            columns[col].push(value);
        }
    }
    if row == 0 || columns.is_empty() {
        return Err(Error::EmptyInput(path.display().to_string()));
    }
    match names {
        Some(names) => Dataset::new(names, columns),
        None => Dataset::from_columns(columns),
    }
}

/// Rank-transformed sample on (0, 1]^n: entry (t, i) is rank/T of row t in
/// column i under the chosen tie policy.
#[derive(Debug, Clone)]
pub struct PseudoObservations {
    columns: Vec<Vec<f64>>,
    tie_policy: TiePolicy,
    /// Columns that were constant under the average policy (degenerate
    /// margins); the caller decides whether that is fatal.
    degenerate: Vec<usize>,
}

impl PseudoObservations {
    pub fn t(&self) -> usize {
        self.columns[0].len()
    }

    pub fn dims(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie_policy
    }

    pub fn degenerate_columns(&self) -> &[usize] {
        &self.degenerate
    }

    pub fn row(&self, t: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[t]).collect()
    }

    /// Wraps pre-ranked columns; used by estimators that build label
    /// columns directly in rank space.
    pub(crate) fn from_ranked(columns: Vec<Vec<f64>>, tie_policy: TiePolicy) -> Self {
        PseudoObservations {
            columns,
            tie_policy,
            degenerate: Vec::new(),
        }
    }
}

/// Average ranks divided by T. Returns the ranked column and whether the
/// column was entirely constant.
pub(crate) fn rank_column(values: &[f64]) -> (Vec<f64>, bool) {
    let t = values.len();
    let mut idx: Vec<usize> = (0..t).collect();
    idx.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut po = vec![0.0; t];
    let mut i = 0;
    while i < t {
        let mut j = i;
        while j + 1 < t && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        // tied block occupies 1-based positions i+1 ..= j+1
        let avg = (i + j + 2) as f64 / 2.0;
        for &r in &idx[i..=j] {
            po[r] = avg / t as f64;
        }
        i = j + 1;
    }
    let constant = values[idx[0]] == values[idx[t - 1]];
    (po, constant)
}

/// Rank transform of every column of `d` under the tie policy `tp`.
///
/// Deterministic given `(d, tp)`: the random tie policy draws one jitter
/// stream per column from `tp.seed`.
pub fn pseudo_observations(d: &Dataset, tp: &TiePolicy) -> Result<PseudoObservations> {
    if d.t() < 2 {
        return Err(Error::InvalidData("need at least 2 observations".into()));
    }
    let mut columns = Vec::with_capacity(d.n());
    let mut degenerate = Vec::new();
    for (i, col) in d.columns().iter().enumerate() {
        let (po, constant) = match tp.mode {
            TieMode::Average => rank_column(col),
            TieMode::Random => {
                let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let range = if hi > lo { hi - lo } else { 1.0 };
                let scale = tp.jitter_scale * range;
                let mut rng = stream_rng(tp.seed, i as u64);
                let jittered: Vec<f64> = col
                    .iter()
                    .map(|v| v + rng.random::<f64>() * scale)
                    .collect();
                let (po, _) = rank_column(&jittered);
                (po, false)
            }
        };
        if constant {
            degenerate.push(i);
        }
        columns.push(po);
    }
    Ok(PseudoObservations {
        columns,
        tie_policy: *tp,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(cols: Vec<Vec<f64>>) -> Dataset {
        Dataset::from_columns(cols).unwrap()
    }

    #[test]
    fn ranks_simple_column() {
        let p = pseudo_observations(&ds(vec![vec![3.0, 1.0, 2.0]]), &TiePolicy::average()).unwrap();
        assert_eq!(p.column(0), &[1.0, 1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn average_ties_share_rank() {
        let p = pseudo_observations(&ds(vec![vec![5.0, 5.0]]), &TiePolicy::average()).unwrap();
        assert_eq!(p.column(0), &[0.75, 0.75]);
        assert_eq!(p.degenerate_columns(), &[0]);
    }

    #[test]
    fn strictly_increasing_column_is_identity_ranks() {
        let t = 17;
        let col: Vec<f64> = (0..t).map(|i| i as f64).collect();
        let p = pseudo_observations(&ds(vec![col]), &TiePolicy::average()).unwrap();
        for (i, v) in p.column(0).iter().enumerate() {
            assert_eq!(*v, (i + 1) as f64 / t as f64);
        }
    }

    #[test]
    fn monotone_transform_leaves_ranks_unchanged() {
        let col = vec![0.3, -1.2, 2.5, 0.9, -0.4, 1.7];
        let base =
            pseudo_observations(&ds(vec![col.clone()]), &TiePolicy::average()).unwrap();
        for f in [|x: f64| x.exp(), |x: f64| x.powi(3)] {
            let mapped: Vec<f64> = col.iter().map(|&x| f(x)).collect();
            let p = pseudo_observations(&ds(vec![mapped]), &TiePolicy::average()).unwrap();
            assert_eq!(p.column(0), base.column(0));
        }
    }

    #[test]
    fn row_permutation_equivariance() {
        let col = vec![0.3, -1.2, 2.5, 0.9];
        let perm = [2usize, 0, 3, 1];
        let permuted: Vec<f64> = perm.iter().map(|&i| col[i]).collect();
        let a = pseudo_observations(&ds(vec![col]), &TiePolicy::average()).unwrap();
        let b = pseudo_observations(&ds(vec![permuted]), &TiePolicy::average()).unwrap();
        for (t, &src) in perm.iter().enumerate() {
            assert_eq!(b.column(0)[t], a.column(0)[src]);
        }
    }

    #[test]
    fn ranking_is_idempotent_without_ties() {
        let col = vec![0.3, -1.2, 2.5, 0.9, -0.4];
        let once = pseudo_observations(&ds(vec![col]), &TiePolicy::average()).unwrap();
        let twice = pseudo_observations(
            &ds(vec![once.column(0).to_vec()]),
            &TiePolicy::average(),
        )
        .unwrap();
        assert_eq!(once.column(0), twice.column(0));
    }

    #[test]
    fn random_ties_are_seeded_and_deterministic() {
        let col = vec![1.0, 1.0, 1.0, 2.0, 2.0];
        let tp = TiePolicy::random(9);
        let a = pseudo_observations(&ds(vec![col.clone()]), &tp).unwrap();
        let b = pseudo_observations(&ds(vec![col.clone()]), &tp).unwrap();
        assert_eq!(a.column(0), b.column(0));
        // all ranks distinct after jitter
        let mut v = a.column(0).to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        assert_eq!(v.len(), col.len());
        // jitter never flips the order of distinct values
        for (i, &x) in col.iter().enumerate() {
            for (j, &y) in col.iter().enumerate() {
                if x < y {
                    assert!(a.column(0)[i] < a.column(0)[j]);
                }
            }
        }
    }

    #[test]
    fn rejects_non_finite_and_short_input() {
        assert!(Dataset::from_columns(vec![vec![1.0, f64::NAN]]).is_err());
        assert!(Dataset::from_columns(vec![vec![1.0]]).is_err());
        assert!(Dataset::new(
            vec!["a".into(), "a".into()],
            vec![vec![1.0, 2.0], vec![3.0, 4.0]]
        )
        .is_err());
    }

    #[test]
    fn loads_csv_with_and_without_header() {
        let dir = std::env::temp_dir();
        let p1 = dir.join("centropy_test_noheader.csv");
        std::fs::write(&p1, "1,2\n3,4\n5,6\n").unwrap();
        let d = load_csv(&p1, false).unwrap();
        assert_eq!((d.t(), d.n()), (3, 2));
        assert_eq!(d.names(), &["v1".to_string(), "v2".to_string()]);

        let p2 = dir.join("centropy_test_header.csv");
        std::fs::write(&p2, "a,b\n1,2\n3,4\n").unwrap();
        let d = load_csv(&p2, true).unwrap();
        assert_eq!(d.names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn csv_errors_carry_positions() {
        let dir = std::env::temp_dir();
        let p = dir.join("centropy_test_badcell.csv");
        std::fs::write(&p, "1,2\n3,x\n").unwrap();
        match load_csv(&p, false) {
            Err(Error::Parse { row, col, .. }) => assert_eq!((row, col), (2, 2)),
            other => panic!("expected parse error, got {other:?}"),
        }

        let p = dir.join("centropy_test_ragged.csv");
        std::fs::write(&p, "1,2\n3\n").unwrap();
        match load_csv(&p, false) {
            Err(Error::Shape { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected shape error, got {other:?}"),
        }

        let p = dir.join("centropy_test_empty.csv");
        std::fs::write(&p, "").unwrap();
        assert!(matches!(load_csv(&p, false), Err(Error::EmptyInput(_))));
    }
}
