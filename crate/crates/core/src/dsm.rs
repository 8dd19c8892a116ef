//! Word-context matrix, standardization, SVD / Fisher LDA reduction and
//! type-level word vectors.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::clip::Clip;
use crate::encoder::ClipEncoder;
use crate::error::{Error, Result};
use crate::verb::Verb;

pub const DEFAULT_DIMS: usize = 10;
pub const MODEL_FORMAT_VERSION: u32 = 1;
/// Columns whose training std falls below this standardize to zero.
pub const MIN_STD: f64 = 1e-12;

/// One row per token-level instance, labeled with its verb.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WordContextMatrix {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Verb>,
}

impl WordContextMatrix {
    pub fn push(&mut self, row: Vec<f64>, label: Verb) -> Result<()> {
        if let Some(first) = self.rows.first() {
            if first.len() != row.len() {
                return Err(Error::Dimension(format!("row has {} columns, matrix has {}", row.len(), first.len())));
            }
        }
        self.rows.push(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), self.cols(), |i, j| self.rows[i][j])
    }
}

/// Rows in input order; unlabeled clips are rejected.
pub fn build_matrix(clips: &[Clip], encoder: &dyn ClipEncoder) -> Result<WordContextMatrix> {
    if clips.is_empty() {
        return Err(Error::Empty("labeled clips"));
    }
    let mut m = WordContextMatrix::default();
    for (i, c) in clips.iter().enumerate() {
        let label = c.label.ok_or_else(|| Error::InvalidArgument(format!("clip {i} has no label")))?;
        m.push(encoder.encode(c)?, label)?;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population std; columns below `MIN_STD` map to zero.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Standardizer> {
        if rows.len() < 2 {
            return Err(Error::InvalidArgument(format!("standardizing needs at least 2 rows, got {}", rows.len())));
        }
        let n = rows.len() as f64;
        let d = rows[0].len();
        let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let std = (0..d).map(|j| (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt()).collect();
        Ok(Standardizer { mean, std })
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mean.len() {
            return Err(Error::Dimension(format!("row has {} columns, standardizer {}", row.len(), self.mean.len())));
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| if *s < MIN_STD { 0.0 } else { (x - m) / s })
            .collect())
    }
}

pub fn standardize(m: &WordContextMatrix) -> Result<(Vec<Vec<f64>>, Standardizer)> {
    let params = Standardizer::fit(&m.rows)?;
    let z = m.rows.iter().map(|r| params.apply(r)).collect::<Result<Vec<_>>>()?;
    Ok((z, params))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Svd,
    Lda,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svd" => Ok(Method::Svd),
            "lda" => Ok(Method::Lda),
            _ => Err(Error::InvalidArgument(format!("unknown reduction {s:?} (expected svd or lda)"))),
        }
    }
}

/// Affine projection `(z - center) · basis` to `k` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub center: Vec<f64>,
    /// `k` unit vectors, each of the input dimension.
    pub basis: Vec<Vec<f64>>,
    /// Singular values (SVD) or eigenvalues (LDA), all of them, descending.
    pub spectrum: Vec<f64>,
}

impl Projection {
    pub fn dims(&self) -> usize {
        self.basis.len()
    }

    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.center.len() {
            return Err(Error::Dimension(format!("vector has {} entries, projection {}", z.len(), self.center.len())));
        }
        Ok(self
            .basis
            .iter()
            .map(|b| b.iter().zip(z.iter().zip(&self.center)).map(|(w, (x, c))| w * (x - c)).sum())
            .collect())
    }

    pub fn project_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.project(r)).collect()
    }
}

fn column_means(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() as f64;
    (0..rows[0].len()).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect()
}

/// Unit length, largest-magnitude component positive (first on ties).
fn canonical_direction(v: DVector<f64>) -> Vec<f64> {
    let v = v.normalize();
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    let s = if v[best] < 0.0 { -1.0 } else { 1.0 };
    v.iter().map(|x| s * x).collect()
}

/// Descending by value, ties by index.
fn order_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

fn check_rows(rows: &[Vec<f64>]) -> Result<usize> {
    let d = rows.first().map(Vec::len).ok_or(Error::Empty("matrix"))?;
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Dimension("ragged matrix".into()));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    Ok(d)
}

/// Centered truncated SVD: the top `k` right singular vectors.
pub fn reduce_svd(rows: &[Vec<f64>], k: usize) -> Result<Projection> {
    let d = check_rows(rows)?;
    let n = rows.len();
    if k == 0 || k > n.min(d) {
        return Err(Error::InvalidArgument(format!("svd needs 1 <= k <= min(rows, cols) = {}, got {k}", n.min(d))));
    }
    let center = column_means(rows);
    let x = DMatrix::from_fn(n, d, |i, j| rows[i][j] - center[j]);
    let svd = x.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Dimension("svd did not produce right singular vectors".into()))?;
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let order = order_desc(&sv);
    let basis = order[..k].iter().map(|&i| canonical_direction(v_t.row(i).transpose())).collect();
    Ok(Projection { center, basis, spectrum: order.iter().map(|&i| sv[i]).collect() })
}

/// Fisher LDA with shrinkage `Sw + γI`, `γ = 1e-6 · trace(Sw) / d`.
///
/// Solved as a symmetric problem: with `Sw + γI = L Lᵀ`, the eigenvectors
/// `v` of `L⁻¹ Sb L⁻ᵀ` give discriminant directions `L⁻ᵀ v`.
pub fn reduce_lda(rows: &[Vec<f64>], labels: &[Verb], k: usize) -> Result<Projection> {
    let d = check_rows(rows)?;
    if labels.len() != rows.len() {
        return Err(Error::Dimension(format!("{} labels for {} rows", labels.len(), rows.len())));
    }
    let mut classes: BTreeMap<Verb, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        classes.entry(*l).or_default().push(i);
    }
    let c = classes.len();
    if c < 2 {
        return Err(Error::InvalidArgument("lda needs at least two classes".into()));
    }
    if k == 0 || k >= c {
        return Err(Error::InvalidArgument(format!(
            "lda with {c} classes supports at most {} dimensions, got {k}",
            c - 1
        )));
    }
    let center = column_means(rows);
    let mu = DVector::from_column_slice(&center);
    let mut sw = DMatrix::<f64>::zeros(d, d);
    let mut sb = DMatrix::<f64>::zeros(d, d);
    for idx in classes.values() {
        let members: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        let mc = DVector::from_vec(column_means(&members));
        for r in &members {
            let dev = DVector::from_column_slice(r) - &mc;
            sw.ger(1.0, &dev, &dev, 1.0);
        }
        let db = &mc - &mu;
        sb.ger(members.len() as f64, &db, &db, 1.0);
    }
    let gamma = (1e-6 * sw.trace() / d as f64).max(f64::MIN_POSITIVE);
    for i in 0..d {
        sw[(i, i)] += gamma;
    }
    let chol = sw
        .cholesky()
        .ok_or_else(|| Error::Dimension("regularized within-class scatter is not positive definite".into()))?;
    let l = chol.l();
    let l_inv =
        l.clone().try_inverse().ok_or_else(|| Error::Dimension("within-class Cholesky factor is singular".into()))?;
    let m = &l_inv * sb * l_inv.transpose();
    let sym = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let order = order_desc(&values);
    let l_inv_t = l_inv.transpose();
    let basis = order[..k].iter().map(|&i| canonical_direction(&l_inv_t * eig.eigenvectors.column(i))).collect();
    Ok(Projection { center, basis, spectrum: order.iter().map(|&i| values[i]).collect() })
}

/// Componentwise mean of the instance vectors of each verb.
pub fn word_vectors(instances: &[Vec<f64>], labels: &[Verb]) -> Result<BTreeMap<Verb, Vec<f64>>> {
    if instances.len() != labels.len() {
        return Err(Error::Dimension(format!("{} labels for {} instances", labels.len(), instances.len())));
    }
    let mut sums: BTreeMap<Verb, (Vec<f64>, usize)> = BTreeMap::new();
    for (v, l) in instances.iter().zip(labels) {
        let e = sums.entry(*l).or_insert_with(|| (vec![0.0; v.len()], 0));
        if e.0.len() != v.len() {
            return Err(Error::Dimension("instance vectors differ in length".into()));
        }
        e.0.iter_mut().zip(v).for_each(|(s, x)| *s += x);
        e.1 += 1;
    }
    Ok(sums.into_iter().map(|(l, (s, n))| (l, s.into_iter().map(|x| x / n as f64).collect())).collect())
}

/// A fitted model: everything needed to map a clip's features to the
/// reduced space and compare it with the verbs seen in training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedModel {
    pub format_version: u32,
    pub method: Method,
    pub encoder: String,
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer,
    pub projection: Projection,
    /// Verbs with a type vector, in lexicographic order.
    pub verbs: Vec<Verb>,
    pub type_vectors: BTreeMap<Verb, Vec<f64>>,
    pub instances: usize,
    pub train_subjects: Vec<String>,
    pub heldout_subjects: Vec<String>,
}

impl ReducedModel {
    pub fn fit(
        matrix: &WordContextMatrix,
        method: Method,
        dims: usize,
        encoder: &dyn ClipEncoder,
    ) -> Result<ReducedModel> {
        if matrix.is_empty() {
            return Err(Error::Empty("word-context matrix"));
        }
        let (z, standardizer) = standardize(matrix)?;
        let projection = match method {
            Method::Svd => reduce_svd(&z, dims)?,
            Method::Lda => reduce_lda(&z, &matrix.labels, dims)?,
        };
        let instances = projection.project_all(&z)?;
        let type_vectors = word_vectors(&instances, &matrix.labels)?;
        Ok(ReducedModel {
            format_version: MODEL_FORMAT_VERSION,
            method,
            encoder: encoder.name().to_string(),
            feature_names: encoder.feature_names(),
            standardizer,
            projection,
            verbs: type_vectors.keys().copied().collect(),
            type_vectors,
            instances: matrix.len(),
            train_subjects: Vec::new(),
            heldout_subjects: Vec::new(),
        })
    }

    pub fn dims(&self) -> usize {
        self.projection.dims()
    }

    /// Standardize then project one raw feature vector.
    pub fn embed(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.projection.project(&self.standardizer.apply(features)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<ReducedModel> {
        let m: ReducedModel = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ReducedModel> {
        ReducedModel::from_json_str(&std::fs::read_to_string(path)?)
    }
}
