//! Seeded synthetic datasets with their ground truth attached.
//!
//! Every generator is a pure function of its arguments. Draw order from the
//! [`SeededRng`] stream is part of the format and is documented on each
//! generator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, orthonormalize_columns, Matrix};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Regression,
    Classification,
    Spiked,
}

impl DatasetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetKind::Regression => "regression",
            DatasetKind::Classification => "classification",
            DatasetKind::Spiked => "spiked",
        }
    }
}

/// Arguments a dataset was generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub kind: DatasetKind,
    pub n: usize,
    pub t: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_w: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
}

/// Parameters the data was planted from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    /// Planted principal basis, one array per basis vector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl GroundTruth {
    pub fn basis_matrix(&self) -> Option<Matrix<f64>> {
        self.basis
            .as_ref()
            .and_then(|cols| Matrix::from_columns(cols).ok())
    }
}

/// Features `X` (`n × T`, one column per sample), optional labels and the
/// planted truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub x: Matrix<f64>,
    pub y: Option<Vec<f64>>,
    pub truth: Option<GroundTruth>,
}

/// On-disk layout: `x` is an array of `T` samples of `n` numbers each.
#[derive(Debug, Serialize, Deserialize)]
struct DatasetFile {
    meta: DatasetMeta,
    x: Vec<Vec<f64>>,
    y: Option<Vec<f64>>,
    truth: Option<GroundTruth>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.ncols() == 0
    }

    /// Whether every label is exactly `±1`.
    pub fn has_sign_labels(&self) -> bool {
        self.y
            .as_ref()
            .is_some_and(|y| y.iter().all(|&v| v == 1.0 || v == -1.0))
    }

    /// Re-runs the generator recorded in `meta`.
    pub fn regenerate(meta: &DatasetMeta) -> Result<Self> {
        let missing = |what: &str| Error::Dataset(format!("metadata lacks {what}"));
        match meta.kind {
            DatasetKind::Regression => gen_regression(
                meta.n,
                meta.t,
                meta.noise.ok_or_else(|| missing("noise"))?,
                meta.seed,
                meta.positive_w.unwrap_or(false),
            ),
            DatasetKind::Classification => gen_classification(
                meta.n,
                meta.t,
                meta.margin.ok_or_else(|| missing("margin"))?,
                meta.seed,
            ),
            DatasetKind::Spiked => gen_spiked(
                meta.n,
                meta.t,
                meta.m.ok_or_else(|| missing("m"))?,
                meta.gap.ok_or_else(|| missing("gap"))?,
                meta.seed,
            ),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = DatasetFile {
            meta: self.meta.clone(),
            x: self.x.columns().map(<[f64]>::to_vec).collect(),
            y: self.y.clone(),
            truth: self.truth.clone(),
        };
        crate::json::to_json_string(&file).map_err(|e| Error::Dataset(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: DatasetFile =
            serde_json::from_str(s).map_err(|e| Error::Dataset(format!("malformed dataset: {e}")))?;
        let x = if file.x.is_empty() {
            Matrix::zeros(file.meta.n, 0)
        } else {
            Matrix::from_columns(&file.x)
                .map_err(|e| Error::Dataset(format!("ragged samples: {e}")))?
        };
        let ds = Dataset {
            meta: file.meta,
            x,
            y: file.y,
            truth: file.truth,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.nrows() != self.meta.n || self.x.ncols() != self.meta.t {
            return Err(Error::Dataset(format!(
                "features are {}x{} but metadata says n={}, T={}",
                self.x.nrows(),
                self.x.ncols(),
                self.meta.n,
                self.meta.t
            )));
        }
        if let Some(y) = &self.y {
            if y.len() != self.meta.t {
                return Err(Error::Dataset(format!(
                    "{} labels for {} samples",
                    y.len(),
                    self.meta.t
                )));
            }
        }
        if self.meta.kind == DatasetKind::Classification && !self.has_sign_labels() {
            return Err(Error::Dataset(
                "classification labels must all be -1 or +1".into(),
            ));
        }
        if !self.x.is_finite() {
            return Err(Error::Dataset("non-finite feature value".into()));
        }
        Ok(())
    }
}

fn check_shape(n: usize, t: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", 0.0, "must be >= 1"));
    }
    if t == 0 {
        return Err(Error::param("t", 0.0, "must be >= 1"));
    }
    Ok(())
}

fn normal_columns(rng: &mut SeededRng, n: usize, t: usize) -> Matrix<f64> {
    let data = rng.normal_vec(n * t);
    Matrix::from_col_major(n, t, data).expect("n*t entries")
}

/// Linear regression data `y_t = w*ᵀx_t + noise·ε_t`.
///
/// Draw order: `w*` (n normals; `|·| + 0.1` when `positive_w`), then `X`
/// column by column, then one noise normal per sample.
pub fn gen_regression(n: usize, t: usize, noise: f64, seed: u64, positive_w: bool) -> Result<Dataset> {
    check_shape(n, t)?;
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::param("noise", noise, "must be >= 0"));
    }
    let mut rng = SeededRng::new(seed);
    let mut w = rng.normal_vec(n);
    if positive_w {
        w.iter_mut().for_each(|v| *v = v.abs() + 0.1);
    }
    let x = normal_columns(&mut rng, n, t);
    let y = x
        .columns()
        .map(|xt| dot(&w, xt) + noise * rng.normal())
        .collect();
    Ok(Dataset {
        meta: DatasetMeta {
            kind: DatasetKind::Regression,
            n,
            t,
            seed,
            noise: Some(noise),
            positive_w: Some(positive_w),
            margin: None,
            m: None,
            gap: None,
        },
        x,
        y: Some(y),
        truth: Some(GroundTruth {
            w: Some(w),
            ..Default::default()
        }),
    })
}

/// Linearly separable data with `y_t w*ᵀx_t ≥ margin` for a unit `w*`.
///
/// Labels alternate `+1, −1, …`. Draw order: `w*` (n normals, normalized),
/// then per sample `n` normals. Each sample keeps its component orthogonal
/// to `w*` and has its `w*` component replaced by `y_t (margin + |s_t|)`,
/// where `s_t` is the drawn component.
pub fn gen_classification(n: usize, t: usize, margin: f64, seed: u64) -> Result<Dataset> {
    check_shape(n, t)?;
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::param("margin", margin, "must be > 0"));
    }
    let mut rng = SeededRng::new(seed);
    let mut w = rng.normal_vec(n);
    let nw = norm2(&w);
    w.iter_mut().for_each(|v| *v /= nw);

    let mut cols = Vec::with_capacity(t);
    let mut labels = Vec::with_capacity(t);
    for i in 0..t {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        let mut x = rng.normal_vec(n);
        let s = dot(&w, &x);
        axpy(y * (margin + s.abs()) - s, &w, &mut x);
        // Rounding can leave the margin short by an ulp; push outward.
        let mut achieved = y * dot(&w, &x);
        while achieved < margin {
            axpy(y * (margin - achieved).max(margin * 1e-15), &w, &mut x);
            achieved = y * dot(&w, &x);
        }
        cols.push(x);
        labels.push(y);
    }
    Ok(Dataset {
        meta: DatasetMeta {
            kind: DatasetKind::Classification,
            n,
            t,
            seed,
            noise: None,
            positive_w: None,
            margin: Some(margin),
            m: None,
            gap: None,
        },
        x: Matrix::from_columns(&cols)?,
        y: Some(labels),
        truth: Some(GroundTruth {
            w: Some(w),
            margin: Some(margin),
            ..Default::default()
        }),
    })
}

/// Unlabeled data whose covariance is `I + (gap − 1) B Bᵀ` for a random
/// orthonormal `n × m` basis `B`: eigenvalue `gap` on span(B), 1 elsewhere.
///
/// Draw order: `n·m` normals for `B` (column by column, then Gram-Schmidt),
/// then `X = A G` with `A = I + (√gap − 1) B Bᵀ` and `G` drawn column by
/// column.
pub fn gen_spiked(n: usize, t: usize, m: usize, gap: f64, seed: u64) -> Result<Dataset> {
    check_shape(n, t)?;
    if m == 0 || m >= n {
        return Err(Error::param("m", m as f64, "must satisfy 1 <= m < n"));
    }
    if !(gap > 1.0 && gap.is_finite()) {
        return Err(Error::param("gap", gap, "must be > 1"));
    }
    let mut rng = SeededRng::new(seed);
    let raw = normal_columns(&mut rng, n, m);
    let basis = orthonormalize_columns(&raw, 1e-10);
    if basis.ncols() != m {
        return Err(Error::Dataset("random basis was rank deficient".into()));
    }
    let boost = gap.sqrt() - 1.0;
    let g = normal_columns(&mut rng, n, t);
    let mut x = g.clone();
    for j in 0..t {
        let gj = g.col(j);
        let xj = x.col_mut(j);
        for b in basis.columns() {
            axpy(boost * dot(b, gj), b, xj);
        }
    }
    Ok(Dataset {
        meta: DatasetMeta {
            kind: DatasetKind::Spiked,
            n,
            t,
            seed,
            noise: None,
            positive_w: None,
            margin: None,
            m: Some(m),
            gap: Some(gap),
        },
        x,
        y: None,
        truth: Some(GroundTruth {
            basis: Some(basis.columns().map(<[f64]>::to_vec).collect()),
            ..Default::default()
        }),
    })
}
