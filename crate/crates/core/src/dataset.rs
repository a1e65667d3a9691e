//! Labelled feature matrices and their CSV representation.
//!
//! CSV layout: a header `y,x1,...,xp`, the integer class label first, one
//! observation per line. Floats are written with 17 significant digits so a
//! write/read cycle reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::quantile::SortedSample;

/// `n x p` feature matrix (row-major) with class labels in `0..g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    n: usize,
    p: usize,
    num_classes: usize,
}

impl Dataset {
    /// Builds a dataset, inferring `g` as the largest label plus one.
    ///
    /// Every class in `0..g` must occur, `g >= 2`, and all entries must be finite.
    pub fn new(features: Vec<f64>, p: usize, labels: Vec<usize>) -> Result<Self> {
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        Self::with_classes(features, p, labels, num_classes)
    }

    /// Like [`Dataset::new`] with an explicit class count.
    pub fn with_classes(
        features: Vec<f64>,
        p: usize,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        let n = labels.len();
        if p == 0 {
            return Err(Error::invalid("dataset needs at least one variable"));
        }
        if features.len() != n * p {
            return Err(Error::invalid(format!(
                "feature buffer has {} entries, expected {n} x {p}",
                features.len()
            )));
        }
        if num_classes < 2 {
            return Err(Error::invalid("dataset needs at least two classes"));
        }
        if n < num_classes {
            return Err(Error::invalid(format!(
                "{n} observations cannot cover {num_classes} classes"
            )));
        }
        let mut counts = vec![0usize; num_classes];
        for &l in &labels {
            if l >= num_classes {
                return Err(Error::invalid(format!(
                    "label {l} outside 0..{num_classes}"
                )));
            }
            counts[l] += 1;
        }
        if let Some(k) = counts.iter().position(|&c| c == 0) {
            return Err(Error::invalid(format!("class {k} has no observations")));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at row {}, column {}",
                i / p,
                i % p
            )));
        }
        Ok(Dataset {
            features,
            labels,
            n,
            p,
            num_classes,
        })
    }

    /// Builds a dataset from rows.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::invalid("rows have unequal lengths"));
        }
        Self::new(rows.concat(), p, labels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.p)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Values of column `j` restricted to class `k`, in row order.
    pub fn class_column(&self, k: usize, j: usize) -> Vec<f64> {
        self.rows()
            .zip(&self.labels)
            .filter(|(_, &l)| l == k)
            .map(|(r, _)| r[j])
            .collect()
    }

    /// Sorted per-class columns, indexed `[class][variable]`.
    pub fn sorted_class_columns(&self) -> Vec<Vec<SortedSample>> {
        (0..self.num_classes)
            .map(|k| {
                (0..self.p)
                    .map(|j| {
                        SortedSample::new(self.class_column(k, j))
                            .expect("every class is non-empty and finite")
                    })
                    .collect()
            })
            .collect()
    }

    /// Copy of the rows at `indices`, keeping the class count.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(indices.len() * self.p);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset::with_classes(features, self.p, labels, self.num_classes)
    }

    /// Applies `f(column, value)` to every entry.
    pub fn map_columns(&self, f: impl Fn(usize, f64) -> f64) -> Dataset {
        let p = self.p;
        let features = self
            .features
            .iter()
            .enumerate()
            .map(|(i, &v)| f(i % p, v))
            .collect();
        Dataset {
            features,
            ..self.clone()
        }
    }

    /// Same features with new labels (used for label permutations and shuffles).
    pub fn relabel(&self, labels: Vec<usize>) -> Result<Dataset> {
        Dataset::new(self.features.clone(), self.p, labels)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        read_csv_from(file, &path.display().to_string())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_csv_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        write!(w, "y")?;
        for j in 1..=self.p {
            write!(w, ",x{j}")?;
        }
        writeln!(w)?;
        for (row, label) in self.rows().zip(&self.labels) {
            write!(w, "{label}")?;
            for &v in row {
                write!(w, ",{}", fmt_f64(v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses dataset CSV from any reader; `source` names it in error messages.
pub fn read_csv_from(reader: impl std::io::Read, source: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |line: u64, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.get(0) != Some("y") {
        return Err(parse_err(1, "first header field must be `y`".into()));
    }
    let p = headers.len() - 1;
    if p == 0 {
        return Err(parse_err(1, "no feature columns".into()));
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |pos| pos.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |pos| pos.line());
        if record.len() != p + 1 {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", p + 1, record.len()),
            ));
        }
        let label: usize = record[0]
            .parse()
            .map_err(|_| parse_err(line, format!("bad class label `{}`", &record[0])))?;
        labels.push(label);
        for (j, field) in record.iter().skip(1).enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                parse_err(line, format!("bad value `{field}` in column x{}", j + 1))
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    line,
                    format!("non-finite value in column x{}", j + 1),
                ));
            }
            features.push(v);
        }
    }
    Dataset::new(features, p, labels).map_err(|e| parse_err(0, e.to_string()))
}
