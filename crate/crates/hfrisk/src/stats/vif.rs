//! Iterative variance-inflation-factor elimination.
//!
//! VIF_j = 1/(1 − R²_j), with R²_j from the least-squares regression of
//! feature j on all other surviving continuous features (with intercept).
//! One feature is removed per round — the largest VIF above the threshold —
//! and the factors are recomputed, the standard iterative scheme. Exact
//! collinearity (R² = 1) counts as infinite VIF. Columns are standardized
//! internally, which makes the factors invariant under affine rescaling of
//! any feature.

use serde::{Deserialize, Serialize};

use crate::cohort::{Cohort, FeatureKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VifEntry {
    pub feature: String,
    /// VIF at removal time for removed features, final-round VIF otherwise.
    #[serde(with = "crate::serde_f64")]
    pub vif: f64,
    pub removed: bool,
    pub removal_round: Option<usize>,
}

/// Removed features first in removal order, then survivors in schema order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VifReport {
    pub threshold: f64,
    pub entries: Vec<VifEntry>,
}

impl VifReport {
    pub fn removed_features(&self) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| e.removed)
            .map(|e| e.feature.clone())
            .collect()
    }

    pub fn surviving_features(&self) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| !e.removed)
            .map(|e| e.feature.clone())
            .collect()
    }

    pub fn max_surviving_vif(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| !e.removed)
            .map(|e| e.vif)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Iterative VIF filter over the continuous features of `cohort`.
///
/// Requires at least two continuous features and no missing cells among
/// them (run after imputation).
pub fn vif_filter(cohort: &Cohort, threshold: f64) -> Result<VifReport> {
    if !(threshold > 0.0) {
        return Err(Error::Parameter(format!("vif threshold {threshold} must be > 0")));
    }
    let continuous: Vec<usize> = cohort
        .schema()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.kind == FeatureKind::Continuous)
        .map(|(j, _)| j)
        .collect();
    if continuous.len() < 2 {
        return Err(Error::NotApplicable(format!(
            "VIF needs >= 2 continuous features, found {}",
            continuous.len()
        )));
    }
    let n = cohort.n_rows();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(continuous.len());
    for &j in &continuous {
        let mut col = Vec::with_capacity(n);
        for i in 0..n {
            match cohort.value(i, j) {
                Some(v) => col.push(v),
                None => {
                    return Err(Error::Data(format!(
                        "missing cell in '{}' at row {i}; impute before VIF filtering",
                        cohort.schema().get(j).name
                    )))
                }
            }
        }
        columns.push(standardize(&col));
    }
    let names: Vec<String> = continuous
        .iter()
        .map(|&j| cohort.schema().get(j).name.clone())
        .collect();

    let mut surviving: Vec<usize> = (0..columns.len()).collect();
    let mut removed: Vec<(usize, f64, usize)> = Vec::new(); // (col index, vif, round)
    let mut final_vifs: Vec<f64> = vec![1.0; columns.len()];
    let mut round = 0usize;
    loop {
        round += 1;
        let vifs: Vec<f64> = surviving
            .iter()
            .map(|&j| vif_of(&columns, &surviving, j))
            .collect();
        for (pos, &j) in surviving.iter().enumerate() {
            final_vifs[j] = vifs[pos];
        }
        // Largest VIF wins; ties go to the earliest schema position.
        let mut worst: Option<(usize, f64)> = None;
        for (pos, &v) in vifs.iter().enumerate() {
            let better = match worst {
                None => true,
                Some((_, best)) => v > best,
            };
            if better {
                worst = Some((pos, v));
            }
        }
        match worst {
            Some((pos, v)) if v > threshold && surviving.len() > 1 => {
                let j = surviving.remove(pos);
                removed.push((j, v, round));
            }
            _ => break,
        }
    }

    let mut entries: Vec<VifEntry> = removed
        .into_iter()
        .map(|(j, vif, removal_round)| VifEntry {
            feature: names[j].clone(),
            vif,
            removed: true,
            removal_round: Some(removal_round),
        })
        .collect();
    for &j in &surviving {
        entries.push(VifEntry {
            feature: names[j].clone(),
            vif: final_vifs[j],
            removed: false,
            removal_round: None,
        });
    }
    Ok(VifReport { threshold, entries })
}

fn standardize(col: &[f64]) -> Vec<f64> {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std > 0.0 {
        col.iter().map(|x| (x - mean) / std).collect()
    } else {
        vec![0.0; col.len()]
    }
}

fn vif_of(columns: &[Vec<f64>], surviving: &[usize], target: usize) -> f64 {
    let predictors: Vec<&[f64]> = surviving
        .iter()
        .filter(|&&j| j != target)
        .map(|&j| columns[j].as_slice())
        .collect();
    let r2 = regression_r2(&predictors, &columns[target]);
    if r2 >= 1.0 - 1e-12 {
        f64::INFINITY
    } else {
        (1.0 / (1.0 - r2)).max(1.0)
    }
}

/// R² of least squares with intercept, solved by Householder QR.
fn regression_r2(predictors: &[&[f64]], y: &[f64]) -> f64 {
    let n = y.len();
    let k = predictors.len() + 1; // intercept column first
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    if sst == 0.0 {
        return 0.0;
    }
    // Column-major design matrix.
    let mut a = vec![0.0_f64; n * k];
    for i in 0..n {
        a[i] = 1.0;
    }
    for (c, col) in predictors.iter().enumerate() {
        a[(c + 1) * n..(c + 2) * n].copy_from_slice(col);
    }
    let mut rhs = y.to_vec();

    // Householder triangularization of A, applied to rhs as we go.
    let steps = k.min(n);
    for col in 0..steps {
        let mut norm2 = 0.0;
        for i in col..n {
            let v = a[col * n + i];
            norm2 += v * v;
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let head = a[col * n + col];
        let alpha = if head >= 0.0 { -norm } else { norm };
        // Householder vector v = x - alpha*e1, stored temporarily.
        let mut v = vec![0.0; n - col];
        v[0] = head - alpha;
        for i in (col + 1)..n {
            v[i - col] = a[col * n + i];
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            continue;
        }
        for target_col in col..k {
            let base = target_col * n;
            let mut dot = 0.0;
            for i in col..n {
                dot += v[i - col] * a[base + i];
            }
            let scale = 2.0 * dot / vtv;
            for i in col..n {
                a[base + i] -= scale * v[i - col];
            }
        }
        let mut dot = 0.0;
        for i in col..n {
            dot += v[i - col] * rhs[i];
        }
        let scale = 2.0 * dot / vtv;
        for i in col..n {
            rhs[i] -= scale * v[i - col];
        }
    }
    // Residual sum of squares is the norm of the rhs tail beyond the
    // triangular block (guarding rank-deficient columns is unnecessary for
    // R²: a zero pivot simply leaves its energy in the tail).
    let ssr: f64 = rhs[steps..].iter().map(|v| v * v).sum();
    (1.0 - ssr / sst).clamp(0.0, 1.0)
}
