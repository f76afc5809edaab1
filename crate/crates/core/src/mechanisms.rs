//! Release mechanisms.
//!
//! Quantization mechanisms snap each secret statistic into a bin of a fixed
//! grid: the random-offset mechanism for diagonal Gaussians releases a
//! uniform point inside the bin, the midpoint mechanisms for rotated
//! Gaussians release the bin centre. The dataset mode applies the
//! random-offset rule to estimated parameters and then moves every sample
//! with an affine map so the released data carries the released statistics.
//!
//! Three noise baselines operate on datasets directly: additive Gaussian
//! noise, additive Laplace noise and a Laplace-perturbed histogram resampler.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    column_mean_std, estimate_params, BaselineConfig, Dataset, Family, Gaussian2DParams,
    GaussianDiagParams, GaussianGeneralParams, MechanismConfig, ParamEstimate, ParamKind,
    QuantizationMode, Quantizer, SecretSource, SecretSpec,
};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismId {
    Alg1,
    Alg2,
    Alg3,
    Dataset,
    Ap,
    Distp,
    DpHist,
}

impl MechanismId {
    pub const ALL: [MechanismId; 7] = [
        MechanismId::Alg1,
        MechanismId::Alg2,
        MechanismId::Alg3,
        MechanismId::Dataset,
        MechanismId::Ap,
        MechanismId::Distp,
        MechanismId::DpHist,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MechanismId::Alg1 => "alg1",
            MechanismId::Alg2 => "alg2",
            MechanismId::Alg3 => "alg3",
            MechanismId::Dataset => "dataset",
            MechanismId::Ap => "ap",
            MechanismId::Distp => "distp",
            MechanismId::DpHist => "dp-hist",
        }
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MechanismId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Unsupported(format!("unknown mechanism {s:?}")))
    }
}

/// Result of one mechanism run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReleaseOutcome<P> {
    pub params: P,
    pub dataset: Option<Dataset>,
    pub seed: Option<u64>,
    pub mechanism: MechanismId,
    pub config: MechanismConfig,
}

/// Moves `value` to `bin_left + offset`, where `offset` is in `[0, length)`.
///
/// The result is guaranteed to stay in the bin of `value` even when rounding
/// of `bin_left + offset` would push it onto the next edge.
pub fn quantize_random_offset(value: f64, q: &Quantizer, offset: f64) -> f64 {
    let bin = q.bin_index(value);
    let mut out = q.anchor + bin * q.length + offset;
    while q.bin_index(out) > bin {
        out = out.next_down();
    }
    while q.bin_index(out) < bin {
        out = out.next_up();
    }
    out
}

pub fn quantize_midpoint(value: f64, q: &Quantizer) -> f64 {
    q.midpoint(value)
}

fn require_mode(cfg: &MechanismConfig, mode: QuantizationMode) -> Result<()> {
    if cfg.mode != mode {
        return Err(Error::InvalidConfig(format!(
            "mechanism requires {mode:?} quantization, config has {:?}",
            cfg.mode
        )));
    }
    Ok(())
}

fn check_anchor(index: usize, value: f64, q: &Quantizer) -> Result<()> {
    if value < q.anchor {
        return Err(Error::BelowAnchor {
            index,
            value,
            anchor: q.anchor,
        });
    }
    Ok(())
}

/// Random-offset quantization of secret values. Secret `i` draws its offset
/// from stream `i` of `seed`.
pub fn alg1_release_values(
    values: &[f64],
    spec: &SecretSpec,
    cfg: &MechanismConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    require_mode(cfg, QuantizationMode::RandomOffset)?;
    cfg.validate_for(spec.len())?;
    if values.len() != spec.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.len(),
            got: values.len(),
        });
    }
    let mut out = Vec::with_capacity(values.len());
    for (i, ((&g, q), t)) in values
        .iter()
        .zip(&cfg.secrets)
        .zip(spec.targets())
        .enumerate()
    {
        check_anchor(i, g, q)?;
        let offset = stream_rng(seed, i as u64).random::<f64>() * q.length;
        let released = quantize_random_offset(g, q, offset);
        if t.kind == ParamKind::Std && released <= 0.0 {
            return Err(Error::NonPositiveStd {
                index: i,
                value: released,
            });
        }
        out.push(released);
    }
    Ok(out)
}

pub fn release_alg1(
    params: &GaussianDiagParams,
    spec: &SecretSpec,
    cfg: &MechanismConfig,
    seed: u64,
) -> Result<ReleaseOutcome<GaussianDiagParams>> {
    let values = crate::model::secret_values(params, spec)?;
    let released = alg1_release_values(&values, spec, cfg, seed)?;
    let mut means = params.means().to_vec();
    let mut stds = params.stds().to_vec();
    for (t, v) in spec.targets().iter().zip(released) {
        match t.kind {
            ParamKind::Mean => means[t.dim] = v,
            ParamKind::Std => stds[t.dim] = v,
        }
    }
    Ok(ReleaseOutcome {
        params: GaussianDiagParams::new(means, stds)?,
        dataset: None,
        seed: Some(seed),
        mechanism: MechanismId::Alg1,
        config: cfg.clone(),
    })
}

/// Midpoint-quantizes the mean secrets and, when any standard deviation is
/// secret, every `sqrt(eigenvalue)`. Entries of `cfg.secrets` that belong to
/// standard-deviation secrets are not used; `cfg.eig_sqrt` applies instead.
fn midpoint_release(
    means: &[f64],
    eig_sqrt: &[f64],
    spec: &SecretSpec,
    cfg: &MechanismConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    require_mode(cfg, QuantizationMode::Midpoint)?;
    cfg.validate_for(spec.len())?;
    spec.check_dim(means.len())?;
    let mut new_means = means.to_vec();
    for (i, (t, q)) in spec.targets().iter().zip(&cfg.secrets).enumerate() {
        if t.kind == ParamKind::Mean {
            check_anchor(i, means[t.dim], q)?;
            new_means[t.dim] = quantize_midpoint(means[t.dim], q);
        }
    }
    let mut new_eig = eig_sqrt.to_vec();
    if spec.has_std_secret() {
        if cfg.eig_sqrt.len() != eig_sqrt.len() {
            return Err(Error::InvalidConfig(format!(
                "a standard deviation is secret: need {} eigenvalue quantizers, got {}",
                eig_sqrt.len(),
                cfg.eig_sqrt.len()
            )));
        }
        let base = spec.len();
        for (j, (a, q)) in eig_sqrt.iter().zip(&cfg.eig_sqrt).enumerate() {
            check_anchor(base + j, *a, q)?;
            let a_new = quantize_midpoint(*a, q);
            if a_new <= 0.0 {
                return Err(Error::NonPositiveStd {
                    index: base + j,
                    value: a_new,
                });
            }
            new_eig[j] = a_new;
        }
    }
    Ok((new_means, new_eig))
}

pub fn release_alg2(
    params: &Gaussian2DParams,
    spec: &SecretSpec,
    cfg: &MechanismConfig,
) -> Result<ReleaseOutcome<Gaussian2DParams>> {
    let (means, eig) = midpoint_release(
        &[params.mu1(), params.mu2()],
        &[params.a(), params.b()],
        spec,
        cfg,
    )?;
    let (l1, l2) = if spec.has_std_secret() {
        (eig[0] * eig[0], eig[1] * eig[1])
    } else {
        (params.lambda1(), params.lambda2())
    };
    let released = Gaussian2DParams::new(means[0], means[1], l1, l2, params.alpha())?;
    Ok(ReleaseOutcome {
        params: released,
        dataset: None,
        seed: None,
        mechanism: MechanismId::Alg2,
        config: cfg.clone(),
    })
}

pub fn release_alg3(
    params: &GaussianGeneralParams,
    spec: &SecretSpec,
    cfg: &MechanismConfig,
) -> Result<ReleaseOutcome<GaussianGeneralParams>> {
    let (means, eig) = midpoint_release(params.means(), params.eig_sqrt(), spec, cfg)?;
    Ok(ReleaseOutcome {
        params: GaussianGeneralParams::new(means, eig, params.rotation().clone())?,
        dataset: None,
        seed: None,
        mechanism: MechanismId::Alg3,
        config: cfg.clone(),
    })
}

/// Dataset mode: estimate, quantize with random offsets, then map every
/// touched column through `x -> (sd_r / sd_hat) (x - mu_hat) + mu_r`.
pub fn release_dataset(
    data: &Dataset,
    spec: &SecretSpec,
    cfg: &MechanismConfig,
    seed: u64,
) -> Result<ReleaseOutcome<ParamEstimate>> {
    spec.check_dim(data.n_columns())?;
    let est = estimate_params(data, Family::DiagGaussian);
    for t in spec.targets() {
        if t.kind == ParamKind::Std && est.degenerate[t.dim] {
            return Err(Error::DegenerateColumn { column: t.dim });
        }
    }
    let values: Vec<f64> = spec.targets().iter().map(|&t| est.param(t)).collect();
    let released = alg1_release_values(&values, spec, cfg, seed)?;

    let mut out = est.clone();
    let mut touched = vec![false; data.n_columns()];
    for (t, v) in spec.targets().iter().zip(&released) {
        touched[t.dim] = true;
        match t.kind {
            ParamKind::Mean => out.means[t.dim] = *v,
            ParamKind::Std => out.stds[t.dim] = *v,
        }
    }
    let mut samples = data.samples().clone();
    for (j, mut col) in samples.axis_iter_mut(Axis(1)).enumerate() {
        if !touched[j] {
            continue;
        }
        let (mu_hat, sd_hat) = (est.means[j], est.stds[j]);
        let (mu_r, sd_r) = (out.means[j], out.stds[j]);
        if sd_r == sd_hat {
            let shift = mu_r - mu_hat;
            col.mapv_inplace(|x| x + shift);
        } else {
            let scale = sd_r / sd_hat;
            col.mapv_inplace(|x| scale * (x - mu_hat) + mu_r);
        }
    }
    let dataset = Dataset::new(samples, data.labels().to_vec())?;
    out.degenerate = out.stds.iter().map(|&s| s == 0.0).collect();
    Ok(ReleaseOutcome {
        params: out,
        dataset: Some(dataset),
        seed: Some(seed),
        mechanism: MechanismId::Dataset,
        config: cfg.clone(),
    })
}

fn check_scale(name: &str, v: f64, allow_zero: bool) -> Result<()> {
    let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
    if !ok {
        return Err(Error::InvalidConfig(format!(
            "{name} = {v} is not a valid scale"
        )));
    }
    Ok(())
}

/// Zero-mean Laplace draw by inverse CDF.
pub(crate) fn sample_laplace<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let mut u = rng.random::<f64>();
    while u == 0.0 {
        u = rng.random::<f64>();
    }
    let u = u - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

fn perturb_columns<F>(data: &Dataset, seed: u64, mut noise: F) -> Result<Dataset>
where
    F: FnMut(&mut crate::rng::StreamRng) -> f64,
{
    let mut samples = data.samples().clone();
    for (j, mut col) in samples.axis_iter_mut(Axis(1)).enumerate() {
        let mut rng = stream_rng(seed, j as u64);
        col.iter_mut().for_each(|x| *x += noise(&mut rng));
    }
    Dataset::new(samples, data.labels().to_vec())
}

fn dataset_outcome(
    dataset: Dataset,
    seed: u64,
    mechanism: MechanismId,
    baseline: BaselineConfig,
) -> ReleaseOutcome<ParamEstimate> {
    ReleaseOutcome {
        params: estimate_params(&dataset, Family::DiagGaussian),
        dataset: Some(dataset),
        seed: Some(seed),
        mechanism,
        config: MechanismConfig::baseline(baseline),
    }
}

/// Adds independent `N(0, noise_sd^2)` noise to every entry. Column `j` uses
/// stream `j`.
pub fn release_ap_gaussian(
    data: &Dataset,
    noise_sd: f64,
    seed: u64,
) -> Result<ReleaseOutcome<ParamEstimate>> {
    check_scale("noise_sd", noise_sd, false)?;
    let normal = Normal::new(0.0, noise_sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let released = perturb_columns(data, seed, |rng| normal.sample(rng))?;
    Ok(dataset_outcome(
        released,
        seed,
        MechanismId::Ap,
        BaselineConfig::ApGaussian { noise_sd },
    ))
}

/// Adds independent `Laplace(0, noise_scale)` noise to every entry.
pub fn release_distp_laplace(
    data: &Dataset,
    noise_scale: f64,
    seed: u64,
) -> Result<ReleaseOutcome<ParamEstimate>> {
    check_scale("noise_scale", noise_scale, false)?;
    let released = perturb_columns(data, seed, |rng| sample_laplace(rng, noise_scale))?;
    Ok(dataset_outcome(
        released,
        seed,
        MechanismId::Distp,
        BaselineConfig::DistpLaplace { noise_scale },
    ))
}

/// One column's histogram on `[lo, hi]` with bins of width `width`; the last
/// bin is clipped at `hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    pub counts: Vec<f64>,
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_edges(&self, k: usize) -> (f64, f64) {
        let left = self.lo + k as f64 * self.width;
        let right = (left + self.width).min(self.hi);
        (left, right)
    }

    pub fn bin_of(&self, x: f64) -> usize {
        let k = ((x - self.lo) / self.width).floor();
        (k.max(0.0) as usize).min(self.counts.len() - 1)
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

/// Histogram of a column with Laplace noise added to each count and negative
/// counts clipped to zero. `noise_scale = 0` gives the exact histogram.
pub fn noisy_histogram<R: Rng + ?Sized>(
    column: &[f64],
    bin_width: f64,
    noise_scale: f64,
    rng: &mut R,
) -> Result<Histogram> {
    check_scale("bin_width", bin_width, false)?;
    check_scale("noise_scale", noise_scale, true)?;
    if column.is_empty() {
        return Err(Error::InvalidDataset("empty column".into()));
    }
    let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n_bins = (((hi - lo) / bin_width).ceil() as usize).max(1);
    let mut hist = Histogram {
        lo,
        hi,
        width: bin_width,
        counts: vec![0.0; n_bins],
    };
    for &x in column {
        let k = hist.bin_of(x);
        hist.counts[k] += 1.0;
    }
    for c in hist.counts.iter_mut() {
        *c = (*c + sample_laplace(rng, noise_scale)).max(0.0);
    }
    Ok(hist)
}

/// Per-column DP-histogram baseline: noisy histogram, then `m` fresh samples
/// drawn bin-proportionally and uniformly inside each bin.
pub fn release_dp_histogram(
    data: &Dataset,
    bin_width: f64,
    noise_scale: f64,
    seed: u64,
) -> Result<ReleaseOutcome<ParamEstimate>> {
    let m = data.n_samples();
    let mut samples = Array2::zeros((m, data.n_columns()));
    for (j, mut out) in samples.axis_iter_mut(Axis(1)).enumerate() {
        let mut rng = stream_rng(seed, j as u64);
        let col: Vec<f64> = data.column(j).to_vec();
        let hist = noisy_histogram(&col, bin_width, noise_scale, &mut rng)?;
        let pick =
            WeightedIndex::new(&hist.counts).map_err(|_| Error::EmptyHistogram { column: j })?;
        for x in out.iter_mut() {
            let (left, right) = hist.bin_edges(pick.sample(&mut rng));
            *x = left + rng.random::<f64>() * (right - left);
        }
    }
    let released = Dataset::new(samples, data.labels().to_vec())?;
    Ok(dataset_outcome(
        released,
        seed,
        MechanismId::DpHist,
        BaselineConfig::DpHistogram {
            bin_width,
            noise_scale,
        },
    ))
}

/// Runs the baseline described by `cfg` on a dataset.
pub fn release_baseline(
    data: &Dataset,
    baseline: &BaselineConfig,
    seed: u64,
) -> Result<ReleaseOutcome<ParamEstimate>> {
    match *baseline {
        BaselineConfig::ApGaussian { noise_sd } => release_ap_gaussian(data, noise_sd, seed),
        BaselineConfig::DistpLaplace { noise_scale } => {
            release_distp_laplace(data, noise_scale, seed)
        }
        BaselineConfig::DpHistogram {
            bin_width,
            noise_scale,
        } => release_dp_histogram(data, bin_width, noise_scale, seed),
    }
}

/// Sample mean and population standard deviation of one column.
pub fn column_stats(data: &Dataset, j: usize) -> (f64, f64) {
    column_mean_std(data.column(j))
}
