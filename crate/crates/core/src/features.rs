//! Node feature matrices, observation masks and their CSV formats.

use std::path::Path;

use ndarray::Array2;
use rand::Rng;

use crate::error::{GdnError, Result};

/// Dense features with a mask of defined cells. Undefined cells (e.g. unrated
/// items in a rating matrix) hold 0.0 and never enter a train or test split.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: Array2<f64>,
    pub defined: Array2<bool>,
}

impl FeatureMatrix {
    pub fn dense(values: Array2<f64>) -> Self {
        let defined = Array2::from_elem(values.dim(), true);
        FeatureMatrix { values, defined }
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_defined(&self) -> usize {
        self.defined.iter().filter(|&&d| d).count()
    }
}

/// Ground truth plus a disjoint train/test split of its defined entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedFeatures {
    pub x: Array2<f64>,
    pub train_mask: Array2<bool>,
    pub test_mask: Array2<bool>,
    pub missing_rate: f64,
}

impl MaskedFeatures {
    /// Model input: observed entries kept, everything else zero.
    pub fn observed_input(&self) -> Array2<f64> {
        let mut out = self.x.clone();
        out.zip_mut_with(&self.train_mask, |v, &m| {
            if !m {
                *v = 0.0
            }
        });
        out
    }

    /// Fully observed features: every entry is a training entry and the test
    /// mask is empty. Used for reconstruction-only runs.
    pub fn fully_observed(x: Array2<f64>) -> Self {
        let train_mask = Array2::from_elem(x.dim(), true);
        let test_mask = Array2::from_elem(x.dim(), false);
        MaskedFeatures {
            x,
            train_mask,
            test_mask,
            missing_rate: 0.0,
        }
    }

    pub fn n_train(&self) -> usize {
        self.train_mask.iter().filter(|&&m| m).count()
    }

    pub fn n_test(&self) -> usize {
        self.test_mask.iter().filter(|&&m| m).count()
    }
}

/// Assigns each defined entry to the test split independently with
/// probability `missing_rate`, in row-major order (one draw per defined entry).
pub fn generate_mask<R: Rng + ?Sized>(
    features: &FeatureMatrix,
    missing_rate: f64,
    rng: &mut R,
) -> Result<MaskedFeatures> {
    if !(missing_rate > 0.0 && missing_rate < 1.0) {
        return Err(GdnError::InvalidArgument(format!(
            "missing rate must lie in (0, 1), got {missing_rate}"
        )));
    }
    let mut train_mask = Array2::from_elem(features.values.dim(), false);
    let mut test_mask = train_mask.clone();
    for (&defined, (tr, te)) in features
        .defined
        .iter()
        .zip(train_mask.iter_mut().zip(test_mask.iter_mut()))
    {
        if !defined {
            continue;
        }
        if rng.random::<f64>() < missing_rate {
            *te = true;
        } else {
            *tr = true;
        }
    }
    let masked = MaskedFeatures {
        x: features.values.clone(),
        train_mask,
        test_mask,
        missing_rate,
    };
    if masked.n_train() == 0 || masked.n_test() == 0 {
        return Err(GdnError::InvalidArgument(format!(
            "missing rate {missing_rate} left an empty train or test split"
        )));
    }
    Ok(masked)
}

/// Uses an explicit held-out mask (`true` = test entry) instead of a random draw.
pub fn apply_explicit_mask(features: &FeatureMatrix, held_out: &Array2<bool>) -> Result<MaskedFeatures> {
    if held_out.dim() != features.values.dim() {
        return Err(GdnError::shape("mask", features.values.dim(), held_out.dim()));
    }
    let mut train_mask = features.defined.clone();
    let mut test_mask = features.defined.clone();
    train_mask.zip_mut_with(held_out, |t, &h| *t = *t && !h);
    test_mask.zip_mut_with(held_out, |t, &h| *t = *t && h);
    let n_test = test_mask.iter().filter(|&&m| m).count();
    let masked = MaskedFeatures {
        x: features.values.clone(),
        train_mask,
        test_mask,
        missing_rate: n_test as f64 / features.n_defined().max(1) as f64,
    };
    if masked.n_train() == 0 || n_test == 0 {
        return Err(GdnError::EmptyMask);
    }
    Ok(masked)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| GdnError::io(path, e))
}

/// Parses comma-separated rows of reals; `nan` (any case) marks undefined
/// cells. A first line containing non-numeric tokens is taken as a header.
pub fn parse_feature_csv(text: &str) -> Result<FeatureMatrix> {
    let rows = parse_rows(text, |tok| {
        if tok.eq_ignore_ascii_case("nan") {
            Some(None)
        } else {
            tok.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some)
        }
    })?;
    let (n, d) = (rows.len(), rows[0].len());
    let mut values = Array2::zeros((n, d));
    let mut defined = Array2::from_elem((n, d), false);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, cell) in row.into_iter().enumerate() {
            if let Some(v) = cell {
                values[[i, j]] = v;
                defined[[i, j]] = true;
            }
        }
    }
    Ok(FeatureMatrix { values, defined })
}

pub fn load_feature_csv(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    parse_feature_csv(&read(path.as_ref())?)
}

/// Parses a 0/1 CSV of held-out entries (`1` = test entry).
pub fn parse_mask_csv(text: &str) -> Result<Array2<bool>> {
    let rows = parse_rows(text, |tok| match tok {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    })?;
    let (n, d) = (rows.len(), rows[0].len());
    Ok(Array2::from_shape_vec((n, d), rows.into_iter().flatten().collect()).expect("rectangular"))
}

pub fn load_mask_csv(path: impl AsRef<Path>) -> Result<Array2<bool>> {
    parse_mask_csv(&read(path.as_ref())?)
}

fn parse_rows<T, F>(text: &str, cell: F) -> Result<Vec<Vec<T>>>
where
    F: Fn(&str) -> Option<T>,
{
    let mut rows: Vec<Vec<T>> = Vec::new();
    let mut width = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: Option<Vec<T>> = line.split(',').map(|t| cell(t.trim())).collect();
        let row = match parsed {
            Some(r) => r,
            None if rows.is_empty() && idx == 0 => continue, // header
            None => {
                return Err(GdnError::Parse {
                    line: idx + 1,
                    message: "unparseable cell".into(),
                })
            }
        };
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(GdnError::Parse {
                    line: idx + 1,
                    message: format!("expected {w} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(GdnError::Parse {
            line: 0,
            message: "no data rows".into(),
        });
    }
    Ok(rows)
}

/// Writes features in the format read by [`parse_feature_csv`] (no header).
pub fn write_feature_csv(features: &FeatureMatrix) -> String {
    let mut out = String::new();
    for (vals, defs) in features.values.rows().into_iter().zip(features.defined.rows()) {
        let cells: Vec<String> = vals
            .iter()
            .zip(defs.iter())
            .map(|(v, &d)| if d { format!("{v}") } else { "nan".to_string() })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
