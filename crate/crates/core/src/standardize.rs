//! Column scaling estimated on training data and applied to both splits.

use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::quantile::{QuantileLevel, SortedSample};

#[derive(Debug, Clone, PartialEq, Default)]
pub enum StandardizationMode {
    #[default]
    None,
    /// Unit pooled within-class variance.
    PooledWithinVar,
    Range,
    Iqr,
    /// One shared standard deviation per group of columns; `groups[j]` is the
    /// group id of column `j`.
    GroupMap(Vec<usize>),
}

impl fmt::Display for StandardizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StandardizationMode::None => write!(f, "none"),
            StandardizationMode::PooledWithinVar => write!(f, "pooled"),
            StandardizationMode::Range => write!(f, "range"),
            StandardizationMode::Iqr => write!(f, "iqr"),
            StandardizationMode::GroupMap(groups) => {
                let ids: Vec<String> = groups.iter().map(usize::to_string).collect();
                write!(f, "groups:{}", ids.join(","))
            }
        }
    }
}

impl FromStr for StandardizationMode {
    type Err = Error;

    /// Parses `none`, `pooled`, `range`, `iqr`, or `groups:<id>,<id>,...`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(StandardizationMode::None),
            "pooled" | "pooled_within_var" => Ok(StandardizationMode::PooledWithinVar),
            "range" => Ok(StandardizationMode::Range),
            "iqr" => Ok(StandardizationMode::Iqr),
            other => {
                let list = other.strip_prefix("groups:").ok_or_else(|| {
                    Error::config(format!(
                        "unknown standardization `{other}` (expected none, pooled, range, iqr or groups:...)"
                    ))
                })?;
                parse_group_list(list).map(StandardizationMode::GroupMap)
            }
        }
    }
}

/// Parses a comma- or whitespace-separated list of group ids.
pub fn parse_group_list(text: &str) -> Result<Vec<usize>> {
    let groups = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::config(format!("bad group id `{t}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if groups.is_empty() {
        return Err(Error::config("group map is empty"));
    }
    Ok(groups)
}

/// Per-column scales estimated from `train` under `mode`.
///
/// A zero scale is replaced by 1 with a warning.
pub fn compute_scales(train: &Dataset, mode: &StandardizationMode) -> Result<Vec<f64>> {
    let p = train.p();
    let raw: Vec<f64> = match mode {
        StandardizationMode::None => return Ok(vec![1.0; p]),
        StandardizationMode::PooledWithinVar => {
            (0..p).map(|j| pooled_within_sd(train, j)).collect()
        }
        StandardizationMode::Range => (0..p)
            .map(|j| {
                let col = train.column(j);
                let (lo, hi) = col
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                hi - lo
            })
            .collect(),
        StandardizationMode::Iqr => (0..p)
            .map(|j| {
                let s = SortedSample::new(train.column(j)).expect("dataset columns are finite");
                s.quantile(QuantileLevel::new(0.75).unwrap())
                    - s.quantile(QuantileLevel::new(0.25).unwrap())
            })
            .collect(),
        StandardizationMode::GroupMap(groups) => group_scales(train, groups)?,
    };
    Ok(raw
        .into_iter()
        .enumerate()
        .map(|(j, s)| {
            if s > 0.0 && s.is_finite() {
                s
            } else {
                warn!(
                    "column {} has zero spread under {mode} standardization; using scale 1",
                    j + 1
                );
                1.0
            }
        })
        .collect())
}

/// `sqrt(sum_k SS_k / (n - g))`, the pooled within-class standard deviation.
fn pooled_within_sd(data: &Dataset, j: usize) -> f64 {
    let g = data.num_classes();
    let mut ss = 0.0;
    for k in 0..g {
        let col = data.class_column(k, j);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        ss += col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    }
    let dof = data.n().saturating_sub(g);
    if dof == 0 {
        return 0.0;
    }
    (ss / dof as f64).sqrt()
}

/// One standard deviation per group: squared deviations of each column from
/// its own mean, pooled over the group's columns with `n - 1` degrees of
/// freedom per column.
fn group_scales(data: &Dataset, groups: &[usize]) -> Result<Vec<f64>> {
    if groups.len() != data.p() {
        return Err(Error::config(format!(
            "group map lists {} columns, data has {}",
            groups.len(),
            data.p()
        )));
    }
    let num_groups = groups.iter().max().map_or(0, |m| m + 1);
    let mut ss = vec![0.0; num_groups];
    let mut dof = vec![0usize; num_groups];
    for (j, &grp) in groups.iter().enumerate() {
        let col = data.column(j);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        ss[grp] += col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        dof[grp] += col.len().saturating_sub(1);
    }
    let sd: Vec<f64> = ss
        .iter()
        .zip(&dof)
        .map(|(&s, &d)| if d == 0 { 0.0 } else { (s / d as f64).sqrt() })
        .collect();
    Ok(groups.iter().map(|&grp| sd[grp]).collect())
}

/// Divides every column `j` by `scales[j]`.
pub fn apply_scales(data: &Dataset, scales: &[f64]) -> Result<Dataset> {
    if scales.len() != data.p() {
        return Err(Error::invalid(format!(
            "{} scales for {} variables",
            scales.len(),
            data.p()
        )));
    }
    Ok(data.map_columns(|j, v| v / scales[j]))
}

/// Scales estimated on `train`, applied to both `train` and `test`.
pub fn standardize(
    train: &Dataset,
    test: &Dataset,
    mode: &StandardizationMode,
) -> Result<(Dataset, Dataset, Vec<f64>)> {
    let scales = compute_scales(train, mode)?;
    Ok((
        apply_scales(train, &scales)?,
        apply_scales(test, &scales)?,
        scales,
    ))
}
