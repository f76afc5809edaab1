//! Wasserstein-2 distortion.
//!
//! Closed forms for Gaussians, an exact empirical estimator (sorted matching
//! in one dimension, min-cost assignment otherwise), a sliced estimator for
//! large samples, and the worst-case distortion of the quantization
//! mechanisms.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::assignment::min_cost_assignment;
use crate::error::{Error, Result};
use crate::mechanisms::MechanismId;
use crate::model::{
    Dataset, Gaussian2DParams, GaussianDiagParams, GaussianGeneralParams, MechanismConfig,
    ParamKind, QuantizationMode, SecretSpec,
};
use crate::rng::stream_rng;

/// Largest sample count accepted by [`w2_empirical_exact`].
pub const EXACT_CAP: usize = 512;

/// Full W2 (not halved) between diagonal Gaussians.
pub fn w2_gaussian_diag(a: &GaussianDiagParams, b: &GaussianDiagParams) -> Result<f64> {
    if a.means().len() != b.means().len() {
        return Err(Error::DimensionMismatch {
            expected: a.means().len(),
            got: b.means().len(),
        });
    }
    let sq = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
    Ok((sq(a.means(), b.means()) + sq(a.stds(), b.stds())).sqrt())
}

/// W2 between two-dimensional Gaussians.
///
/// Uses `W2^2 = |dmu|^2 + (a-a')^2 + (b-b')^2 + 2 D sin^2(da) / (aa' + bb' + t)`
/// with `D = (l1-l2)(l1'-l2')` and `t = sqrt((aa'+bb')^2 - D sin^2(da))`, which
/// avoids the cancellation of the textbook trace form and is exactly zero for
/// identical or isotropic inputs.
pub fn w2_gaussian_2d(x: &Gaussian2DParams, y: &Gaussian2DParams) -> f64 {
    let dmu = (x.mu1() - y.mu1()).powi(2) + (x.mu2() - y.mu2()).powi(2);
    let (a, b, a2, b2) = (x.a(), x.b(), y.a(), y.b());
    let sin2 = (x.alpha() - y.alpha()).sin().powi(2);
    let cross = (x.lambda1() - x.lambda2()) * (y.lambda1() - y.lambda2()) * sin2;
    let aligned = a * a2 + b * b2;
    let t = (aligned * aligned - cross).max(0.0).sqrt();
    let rot = if cross == 0.0 {
        0.0
    } else {
        2.0 * cross / (aligned + t)
    };
    (dmu + (a - a2).powi(2) + (b - b2).powi(2) + rot)
        .max(0.0)
        .sqrt()
}

/// W2 between general Gaussians via `tr(A + B - 2 (A^1/2 B A^1/2)^1/2)`.
pub fn w2_gaussian_general(x: &GaussianGeneralParams, y: &GaussianGeneralParams) -> Result<f64> {
    let k = x.means().len();
    if y.means().len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: y.means().len(),
        });
    }
    let dmu: f64 = x
        .means()
        .iter()
        .zip(y.means())
        .map(|(p, q)| (p - q) * (p - q))
        .sum();
    let r = x.rotation();
    let sqrt_a = r
        * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(x.eig_sqrt()))
        * r.transpose();
    let b = y.covariance();
    let m = &sqrt_a * b * &sqrt_a;
    let m = (&m + m.transpose()) * 0.5;
    let cross: f64 = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    let tr: f64 = x.eig_sqrt().iter().chain(y.eig_sqrt()).map(|v| v * v).sum();
    Ok((dmu + tr - 2.0 * cross).max(0.0).sqrt())
}

fn check_pair(x: &Dataset, y: &Dataset) -> Result<()> {
    if x.n_samples() != y.n_samples() {
        return Err(Error::SampleCountMismatch {
            left: x.n_samples(),
            right: y.n_samples(),
        });
    }
    if x.n_columns() != y.n_columns() {
        return Err(Error::DimensionMismatch {
            expected: x.n_columns(),
            got: y.n_columns(),
        });
    }
    Ok(())
}

/// Mean squared cost of the sorted matching between two 1-D samples.
fn sorted_sq_cost(mut xs: Vec<f64>, mut ys: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    xs.iter()
        .zip(&ys)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / xs.len() as f64
}

fn assignment_sq_cost(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let m = x.nrows();
    let mut cost = vec![0.0; m * m];
    for (i, xi) in x.rows().into_iter().enumerate() {
        for (j, yj) in y.rows().into_iter().enumerate() {
            cost[i * m + j] = xi.iter().zip(yj).map(|(a, b)| (a - b) * (a - b)).sum();
        }
    }
    let assign = min_cost_assignment(&cost, m);
    assign
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * m + j])
        .sum::<f64>()
        / m as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactSolver {
    /// Sorted matching for one column, assignment otherwise.
    Auto,
    /// Always solve the assignment problem.
    Assignment,
}

/// Exact empirical W2 between equal-size samples, `m <= EXACT_CAP`.
pub fn w2_empirical_exact(x: &Dataset, y: &Dataset) -> Result<f64> {
    w2_empirical_exact_with(x, y, ExactSolver::Auto)
}

pub fn w2_empirical_exact_with(x: &Dataset, y: &Dataset, solver: ExactSolver) -> Result<f64> {
    check_pair(x, y)?;
    if x.n_samples() > EXACT_CAP {
        return Err(Error::OracleCapExceeded {
            cap: EXACT_CAP,
            got: x.n_samples(),
        });
    }
    Ok(exact_sq(x.samples(), y.samples(), solver).sqrt())
}

fn exact_sq(x: &Array2<f64>, y: &Array2<f64>, solver: ExactSolver) -> f64 {
    if x.ncols() == 1 && solver == ExactSolver::Auto {
        sorted_sq_cost(x.column(0).to_vec(), y.column(0).to_vec())
    } else {
        assignment_sq_cost(x, y)
    }
}

fn project(data: &Array2<f64>, dir: &Array1<f64>) -> Vec<f64> {
    data.dot(dir).to_vec()
}

/// Root-mean-square of 1-D W2 over random unit projections. Projection `p`
/// draws its direction from stream `p` of `seed`. One-column inputs need no
/// projection and return the exact value.
pub fn w2_empirical_sliced(
    x: &Dataset,
    y: &Dataset,
    n_projections: usize,
    seed: u64,
) -> Result<f64> {
    check_pair(x, y)?;
    if n_projections == 0 {
        return Err(Error::InvalidParams(
            "n_projections must be at least 1".into(),
        ));
    }
    let t = x.n_columns();
    if t == 1 {
        return Ok(sorted_sq_cost(x.column(0).to_vec(), y.column(0).to_vec()).sqrt());
    }
    let total: f64 = (0..n_projections)
        .map(|p| {
            let mut rng = stream_rng(seed, p as u64);
            let mut dir: Array1<f64> = (0..t)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let norm = dir.dot(&dir).sqrt();
            dir /= norm;
            sorted_sq_cost(project(x.samples(), &dir), project(y.samples(), &dir))
        })
        .sum();
    Ok((total / n_projections as f64).sqrt())
}

fn column_means(a: &Array2<f64>) -> Array1<f64> {
    a.mean_axis(Axis(0)).expect("non-empty")
}

fn subsample_rows(m: usize, cap: usize, seed: u64) -> Vec<usize> {
    if m <= cap {
        return (0..m).collect();
    }
    let mut rng = stream_rng(seed, 0);
    let mut rows = sample_indices(&mut rng, m, cap).into_vec();
    rows.sort_unstable();
    rows
}

/// Exact W2 on a seeded row subsample of at most `cap` rows (same rows taken
/// from both datasets).
pub fn w2_empirical_subsample(x: &Dataset, y: &Dataset, cap: usize, seed: u64) -> Result<f64> {
    check_pair(x, y)?;
    let cap = cap.clamp(1, EXACT_CAP);
    let rows = subsample_rows(x.n_samples(), cap, seed);
    let xs = x.samples().select(Axis(0), &rows);
    let ys = y.samples().select(Axis(0), &rows);
    Ok(exact_sq(&xs, &ys, ExactSolver::Auto).sqrt())
}

/// Mean-split estimator: `W2^2 = |mean(x) - mean(y)|^2 + W2^2(x - mean(x), y - mean(y))`,
/// with the mean term computed on the full data and the centred term solved
/// exactly on a seeded subsample of at most `cap` rows.
pub fn w2_empirical_mean_split(x: &Dataset, y: &Dataset, cap: usize, seed: u64) -> Result<f64> {
    check_pair(x, y)?;
    let mx = column_means(x.samples());
    let my = column_means(y.samples());
    let dmu = (&mx - &my).mapv(|v| v * v).sum();
    let cap = cap.clamp(1, EXACT_CAP);
    let rows = subsample_rows(x.n_samples(), cap, seed);
    let xs = x.samples().select(Axis(0), &rows) - &mx;
    let ys = y.samples().select(Axis(0), &rows) - &my;
    Ok((dmu + exact_sq(&xs, &ys, ExactSolver::Auto)).sqrt())
}

/// Worst-case distortion of a quantization mechanism.
///
/// Random offset: `sqrt(sum s_i^2)`. Midpoint: `0.5 sqrt(sum_{mean secrets} s^2
/// + [any std secret] sum_j s_{a_j}^2)`.
pub fn mechanism_distortion(
    mech: MechanismId,
    cfg: &MechanismConfig,
    spec: &SecretSpec,
) -> Result<f64> {
    cfg.validate_for(spec.len())?;
    match mech {
        MechanismId::Alg1 | MechanismId::Dataset => {
            if cfg.mode != QuantizationMode::RandomOffset {
                return Err(Error::InvalidConfig("random-offset config required".into()));
            }
            Ok(cfg
                .secrets
                .iter()
                .map(|q| q.length * q.length)
                .sum::<f64>()
                .sqrt())
        }
        MechanismId::Alg2 | MechanismId::Alg3 => {
            if cfg.mode != QuantizationMode::Midpoint {
                return Err(Error::InvalidConfig("midpoint config required".into()));
            }
            let means: f64 = spec
                .targets()
                .iter()
                .zip(&cfg.secrets)
                .filter(|(t, _)| t.kind == ParamKind::Mean)
                .map(|(_, q)| q.length * q.length)
                .sum();
            let eig: f64 = if spec.has_std_secret() {
                if cfg.eig_sqrt.is_empty() {
                    return Err(Error::InvalidConfig("eigenvalue quantizers missing".into()));
                }
                cfg.eig_sqrt.iter().map(|q| q.length * q.length).sum()
            } else {
                0.0
            };
            Ok(0.5 * (means + eig).sqrt())
        }
        other => Err(Error::Unsupported(format!(
            "{other} has no closed-form distortion"
        ))),
    }
}

/// 1-D W2 between two columns (sorted matching), for callers holding views.
pub fn w2_1d(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::SampleCountMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(sorted_sq_cost(x.to_vec(), y.to_vec()).sqrt())
}
