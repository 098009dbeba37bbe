use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClassifierKind {
    SvmRbf,
    SvmLinear,
    Knn { k: usize },
    Lda,
}

impl ClassifierKind {
    pub const KNN_FINE: usize = 5;
    pub const KNN_MEDIUM: usize = 11;
    pub const KNN_COARSE: usize = 101;
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "svm-rbf" => ClassifierKind::SvmRbf,
            "svm-linear" => ClassifierKind::SvmLinear,
            "lda" => ClassifierKind::Lda,
            "knn" | "knn-fine" => ClassifierKind::Knn { k: Self::KNN_FINE },
            "knn-medium" => ClassifierKind::Knn { k: Self::KNN_MEDIUM },
            "knn-coarse" => ClassifierKind::Knn { k: Self::KNN_COARSE },
            other => match other.strip_prefix("knn-").and_then(|k| k.parse().ok()) {
                Some(k) if k > 0 => ClassifierKind::Knn { k },
                _ => return Err(Error::Parameter(format!("unknown classifier '{other}'"))),
            },
        })
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierKind::SvmRbf => write!(f, "svm-rbf"),
            ClassifierKind::SvmLinear => write!(f, "svm-linear"),
            ClassifierKind::Lda => write!(f, "lda"),
            ClassifierKind::Knn { k } => write!(f, "knn-{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    /// Box constraint.
    pub c: f64,
    /// RBF width; `None` means 1 / feature count.
    pub gamma: Option<f64>,
    /// Maximal KKT violation accepted at convergence.
    pub tol: f64,
    pub max_iter: usize,
    pub lda_ridge: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self { c: 1.0, gamma: None, tol: 1e-3, max_iter: 10_000_000, lda_ridge: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SvmKernel {
    Rbf { gamma: f64 },
    Linear,
}

impl SvmKernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            SvmKernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            SvmKernel::Rbf { gamma } => (-gamma * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    Svm {
        kernel: SvmKernel,
        support: Vec<Vec<f64>>,
        /// Dual coefficients of the support vectors, all in (0, C].
        alphas: Vec<f64>,
        /// Labels of the support vectors as +1 / -1.
        signs: Vec<f64>,
        bias: f64,
        c: f64,
        dim: usize,
    },
    Knn {
        x: Vec<Vec<f64>>,
        y: Vec<bool>,
        k: usize,
    },
    Lda {
        means: [DVector<f64>; 2],
        inv_cov: DMatrix<f64>,
        priors: [f64; 2],
        weights: DVector<f64>,
        bias: f64,
    },
}

impl ClassifierModel {
    pub fn dim(&self) -> usize {
        match self {
            ClassifierModel::Svm { dim, .. } => *dim,
            ClassifierModel::Knn { x, .. } => x[0].len(),
            ClassifierModel::Lda { weights, .. } => weights.len(),
        }
    }

    /// Real-valued score; positive favours the positive class.
    pub fn decision(&self, v: &[f64]) -> f64 {
        match self {
            ClassifierModel::Svm { kernel, support, alphas, signs, bias, .. } => {
                support.iter().zip(alphas).zip(signs).map(|((s, a), y)| a * y * kernel.eval(s, v)).sum::<f64>() + bias
            }
            ClassifierModel::Knn { x, y, k } => {
                let mut d: Vec<(f64, usize)> = x
                    .iter()
                    .enumerate()
                    .map(|(i, r)| (r.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), i))
                    .collect();
                d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let k = (*k).min(d.len());
                d[..k].iter().filter(|(_, i)| y[*i]).count() as f64 / k as f64
            }
            ClassifierModel::Lda { weights, bias, .. } => weights.iter().zip(v).map(|(w, x)| w * x).sum::<f64>() + bias,
        }
    }

    fn label_of(&self, score: f64) -> bool {
        match self {
            ClassifierModel::Knn { .. } => score > 0.5,
            _ => score > 0.0,
        }
    }
}

fn check_training(x: &[Vec<f64>], y: &[bool]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::Parameter(format!("{} rows but {} labels", x.len(), y.len())));
    }
    let pos = y.iter().filter(|&&l| l).count();
    if pos < 2 || y.len() - pos < 2 {
        return Err(Error::Precondition("training needs two classes with >= 2 rows each".into()));
    }
    let dim = x[0].len();
    if dim == 0 || x.iter().any(|r| r.len() != dim) {
        return Err(Error::Parameter("rows must share a nonzero feature dimension".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input("features must be finite".into()));
    }
    Ok(dim)
}

pub fn train_classifier(kind: ClassifierKind, x: &[Vec<f64>], y: &[bool], params: &ClassifierParams) -> Result<ClassifierModel> {
    let dim = check_training(x, y)?;
    match kind {
        ClassifierKind::SvmRbf | ClassifierKind::SvmLinear => {
            if !(params.c > 0.0 && params.tol > 0.0) {
                return Err(Error::Parameter("C and tolerance must be > 0".into()));
            }
            let kernel = if kind == ClassifierKind::SvmLinear {
                SvmKernel::Linear
            } else {
                let gamma = params.gamma.unwrap_or(1.0 / dim as f64);
                if !(gamma > 0.0) {
                    return Err(Error::Parameter("gamma must be > 0".into()));
                }
                SvmKernel::Rbf { gamma }
            };
            Ok(train_svm(kernel, x, y, params, dim))
        }
        ClassifierKind::Knn { k } => {
            if k == 0 {
                return Err(Error::Parameter("K must be >= 1".into()));
            }
            if k > x.len() {
                log::warn!("K = {k} exceeds {} training rows; using all rows", x.len());
            }
            Ok(ClassifierModel::Knn { x: x.to_vec(), y: y.to_vec(), k })
        }
        ClassifierKind::Lda => train_lda(x, y, params.lda_ridge, dim),
    }
}

/// Sequential minimal optimization of the soft-margin dual, using
/// second-order working set selection.
fn train_svm(kernel: SvmKernel, x: &[Vec<f64>], y: &[bool], params: &ClassifierParams, dim: usize) -> ClassifierModel {
    let n = x.len();
    let c = params.c;
    let ys: Vec<f64> = y.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&x[i], &x[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let kk = |i: usize, j: usize| k[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let up = |a: f64, s: f64| (s > 0.0 && a < c) || (s < 0.0 && a > 0.0);
    let low = |a: f64, s: f64| (s > 0.0 && a > 0.0) || (s < 0.0 && a < c);

    let mut iter = 0;
    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], ys[t]) && -ys[t] * grad[t] > gmax {
                gmax = -ys[t] * grad[t];
                i = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        if i != usize::MAX {
            for t in 0..n {
                if !low(alpha[t], ys[t]) {
                    continue;
                }
                let yg = ys[t] * grad[t];
                gmax2 = gmax2.max(yg);
                let b = gmax + yg;
                if b > 0.0 {
                    let a = (kk(i, i) + kk(t, t) - 2.0 * kk(i, t)).max(1e-12);
                    let obj = -b * b / a;
                    if obj < best {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        if j == usize::MAX || gmax + gmax2 < params.tol {
            break;
        }
        iter += 1;
        if iter > params.max_iter {
            log::warn!("SMO stopped after {} iterations without reaching tolerance", params.max_iter);
            break;
        }

        let (ai, aj) = (alpha[i], alpha[j]);
        let quad = (kk(i, i) + kk(j, j) - 2.0 * kk(i, j)).max(1e-12);
        let (mut ni, mut nj);
        if ys[i] != ys[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ni = ai + delta;
            nj = aj + delta;
            if diff > 0.0 {
                if nj < 0.0 {
                    nj = 0.0;
                    ni = diff;
                }
            } else if ni < 0.0 {
                ni = 0.0;
                nj = -diff;
            }
            if diff > 0.0 {
                if ni > c {
                    ni = c;
                    nj = c - diff;
                }
            } else if nj > c {
                nj = c;
                ni = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ni = ai - delta;
            nj = aj + delta;
            if sum > c {
                if ni > c {
                    ni = c;
                    nj = sum - c;
                }
            } else if nj < 0.0 {
                nj = 0.0;
                ni = sum;
            }
            if sum > c {
                if nj > c {
                    nj = c;
                    ni = sum - c;
                }
            } else if ni < 0.0 {
                ni = 0.0;
                nj = sum;
            }
        }
        alpha[i] = ni;
        alpha[j] = nj;
        let (di, dj) = (ni - ai, nj - aj);
        for t in 0..n {
            grad[t] += ys[t] * (ys[i] * kk(t, i) * di + ys[j] * kk(t, j) * dj);
        }
    }

    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = ys[t] * grad[t];
        if alpha[t] >= c {
            if ys[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if ys[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            sum_free += yg;
            n_free += 1;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };

    let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    ClassifierModel::Svm {
        kernel,
        support: sv.iter().map(|&t| x[t].clone()).collect(),
        alphas: sv.iter().map(|&t| alpha[t]).collect(),
        signs: sv.iter().map(|&t| ys[t]).collect(),
        bias: -rho,
        c,
        dim,
    }
}

fn train_lda(x: &[Vec<f64>], y: &[bool], ridge: f64, dim: usize) -> Result<ClassifierModel> {
    let mut means = [DVector::zeros(dim), DVector::zeros(dim)];
    let mut counts = [0usize; 2];
    for (r, &l) in x.iter().zip(y) {
        let c = l as usize;
        means[c] += DVector::from_column_slice(r);
        counts[c] += 1;
    }
    for c in 0..2 {
        means[c] /= counts[c] as f64;
    }
    let mut cov = DMatrix::zeros(dim, dim);
    for (r, &l) in x.iter().zip(y) {
        let d = DVector::from_column_slice(r) - &means[l as usize];
        cov += &d * d.transpose();
    }
    cov /= (x.len() - 2) as f64;
    for i in 0..dim {
        cov[(i, i)] += ridge;
    }
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::Training("pooled covariance is singular after regularization".into()))?;
    let inv_cov = chol.inverse();
    let priors = [counts[0] as f64 / x.len() as f64, counts[1] as f64 / x.len() as f64];
    let weights = &inv_cov * (&means[1] - &means[0]);
    let bias = -0.5 * weights.dot(&(&means[1] + &means[0])) + (priors[1] / priors[0]).ln();
    Ok(ClassifierModel::Lda { means, inv_cov, priors, weights, bias })
}

/// Labels (true = positive class) and decision scores.
pub fn predict(model: &ClassifierModel, x: &[Vec<f64>]) -> Result<(Vec<bool>, Vec<f64>)> {
    let dim = model.dim();
    if let Some(r) = x.iter().find(|r| r.len() != dim) {
        return Err(Error::Parameter(format!("expected {dim} features, got {}", r.len())));
    }
    let scores: Vec<f64> = x.iter().map(|r| model.decision(r)).collect();
    Ok((scores.iter().map(|&s| model.label_of(s)).collect(), scores))
}
