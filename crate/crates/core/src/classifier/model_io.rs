//! Plain-text model files.
//!
//! ```text
//! # quantcls model
//! version = 1
//! g = 2
//! p = 3
//! theta_star = 2.0000000000000000e-2
//! skew_mode = galton
//! standardization = pooled
//! [flips]
//! 1,-1,1
//! [scales]
//! <p comma-separated floats>
//! [quantiles]
//! <g lines of p comma-separated floats>
//! [curve]
//! <one `theta,psi_n` line per grid level>
//! ```
//!
//! Floats carry 17 significant digits, so reading a written model gives back
//! the same bits.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::dataset::fmt_f64;
use crate::error::{Error, Result};
use crate::quantile::QuantileLevel;
use crate::skewness::{SignVector, SkewnessMode};
use crate::standardize::StandardizationMode;

use super::{AccuracyCurve, QuantileModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| fmt_f64(v))
        .collect::<Vec<_>>()
        .join(",")
}

impl QuantileModel {
    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        let p = self.p();
        writeln!(w, "# quantcls model")?;
        writeln!(w, "version = {MODEL_FORMAT_VERSION}")?;
        writeln!(w, "g = {}", self.num_classes)?;
        writeln!(w, "p = {p}")?;
        writeln!(w, "theta_star = {}", fmt_f64(self.theta_star.value()))?;
        writeln!(w, "skew_mode = {}", self.skew_mode)?;
        writeln!(w, "standardization = {}", self.standardization)?;
        writeln!(w, "[flips]")?;
        let flips: Vec<String> = self.flips.as_slice().iter().map(i8::to_string).collect();
        writeln!(w, "{}", flips.join(","))?;
        writeln!(w, "[scales]")?;
        writeln!(w, "{}", join_floats(&self.scales))?;
        writeln!(w, "[quantiles]")?;
        for row in self.quantiles.chunks_exact(p) {
            writeln!(w, "{}", join_floats(row))?;
        }
        writeln!(w, "[curve]")?;
        for (t, psi) in self.curve.thetas.iter().zip(&self.curve.psi_n) {
            writeln!(w, "{},{}", fmt_f64(*t), fmt_f64(*psi))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("model text is ASCII")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<QuantileModel> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses model text; `source` names the input in error messages.
    pub fn parse(text: &str, source: &str) -> Result<QuantileModel> {
        let err = |line: usize, message: String| Error::Parse {
            path: source.to_string(),
            line: line as u64,
            message,
        };
        let mut header: HashMap<String, (usize, String)> = HashMap::new();
        let mut sections: HashMap<String, Vec<(usize, String)>> = HashMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if sections.contains_key(name) {
                    return Err(err(lineno, format!("duplicate section [{name}]")));
                }
                sections.insert(name.to_string(), Vec::new());
                current = Some(name.to_string());
                continue;
            }
            match &current {
                Some(name) => sections
                    .get_mut(name)
                    .unwrap()
                    .push((lineno, line.to_string())),
                None => {
                    let (k, v) = line.split_once('=').ok_or_else(|| {
                        err(lineno, format!("expected `key = value`, found `{line}`"))
                    })?;
                    header.insert(k.trim().to_string(), (lineno, v.trim().to_string()));
                }
            }
        }
        let get = |key: &str| {
            header
                .get(key)
                .ok_or_else(|| err(0, format!("missing header key `{key}`")))
        };
        let parse_usize = |key: &str| -> Result<usize> {
            let (line, v) = get(key)?;
            v.parse()
                .map_err(|_| err(*line, format!("bad value for `{key}`: `{v}`")))
        };
        let version = parse_usize("version")?;
        if version != MODEL_FORMAT_VERSION as usize {
            return Err(err(
                get("version")?.0,
                format!("unsupported model version {version}"),
            ));
        }
        let g = parse_usize("g")?;
        let p = parse_usize("p")?;
        if g < 2 || p == 0 {
            return Err(err(0, format!("invalid model shape g={g}, p={p}")));
        }
        let (theta_line, theta_text) = get("theta_star")?;
        let theta_star = theta_text
            .parse::<f64>()
            .ok()
            .and_then(|t| QuantileLevel::new(t).ok())
            .ok_or_else(|| err(*theta_line, format!("bad theta_star `{theta_text}`")))?;
        let (skew_line, skew_text) = get("skew_mode")?;
        let skew_mode: SkewnessMode = skew_text
            .parse()
            .map_err(|e: Error| err(*skew_line, e.to_string()))?;
        let (std_line, std_text) = get("standardization")?;
        let standardization: StandardizationMode = std_text
            .parse()
            .map_err(|e: Error| err(*std_line, e.to_string()))?;

        let section = |name: &str| {
            sections
                .get(name)
                .ok_or_else(|| err(0, format!("missing section [{name}]")))
        };
        let floats = |line: usize, text: &str, expect: usize| -> Result<Vec<f64>> {
            let values = text
                .split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| err(line, format!("bad number `{}`", f.trim())))
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != expect {
                return Err(err(
                    line,
                    format!("expected {expect} values, found {}", values.len()),
                ));
            }
            Ok(values)
        };
        let single = |name: &str| -> Result<(usize, String)> {
            let rows = section(name)?;
            match rows.as_slice() {
                [one] => Ok(one.clone()),
                _ => Err(err(
                    0,
                    format!("section [{name}] must hold exactly one line"),
                )),
            }
        };

        let (fl, ft) = single("flips")?;
        let flips = ft
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<i8>()
                    .map_err(|_| err(fl, format!("bad flip `{f}`")))
            })
            .collect::<Result<Vec<i8>>>()?;
        if flips.len() != p {
            return Err(err(
                fl,
                format!("expected {p} flips, found {}", flips.len()),
            ));
        }
        let flips = SignVector::new(flips).map_err(|e| err(fl, e.to_string()))?;

        let (sl, st) = single("scales")?;
        let scales = floats(sl, &st, p)?;
        if scales.iter().any(|&s| s <= 0.0) {
            return Err(err(sl, "scales must be positive".into()));
        }

        let qrows = section("quantiles")?;
        if qrows.len() != g {
            return Err(err(
                0,
                format!("expected {g} quantile rows, found {}", qrows.len()),
            ));
        }
        let mut quantiles = Vec::with_capacity(g * p);
        for (line, text) in qrows {
            quantiles.extend(floats(*line, text, p)?);
        }

        let mut thetas = Vec::new();
        let mut psi_n = Vec::new();
        for (line, text) in section("curve")? {
            let pair = floats(*line, text, 2)?;
            thetas.push(pair[0]);
            psi_n.push(pair[1]);
        }
        let curve = AccuracyCurve::new(thetas, psi_n).map_err(|e| err(0, e.to_string()))?;

        Ok(QuantileModel {
            theta_star,
            quantiles,
            flips,
            scales,
            curve,
            num_classes: g,
            skew_mode,
            standardization,
        })
    }
}
