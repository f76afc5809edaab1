//! Privacy-distortion sweeps over mechanism hyperparameters.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sumstat_privacy::bounds::{lower_bound_union, surrogate_bound_line, BoundMetric, GammaValue};
use sumstat_privacy::distortion::{
    w2_empirical_mean_split, w2_empirical_sliced, w2_empirical_subsample, EXACT_CAP,
};
use sumstat_privacy::mechanisms::{release_baseline, release_dataset, MechanismId};
use sumstat_privacy::privacy::{analytic_privacy_alg1, surrogate_from_values, Metric};
use sumstat_privacy::rng::stream_rng;
use sumstat_privacy::{
    estimate_params, secret_values, BaselineConfig, Dataset, Family, GroupPartition, LpSpec,
    MechanismConfig, NormOrder, SecretSpec,
};

use crate::error::{CliError, Result};
use crate::synth::{generate_synthetic, Profile, DEFAULT_SECRET_MEANS};

/// Name written in `distortion_estimator`.
pub const PRIMARY_ESTIMATOR: &str = "mean-split";

/// One mechanism realization. For `alg1`/`dataset` the hyperparameter is the
/// multiplier `h` with interval lengths `s_i = h * eps_i`; for `ap` the noise
/// sd, for `distp` the Laplace scale, for `dp-hist` the bin width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRecord {
    pub grid_index: usize,
    pub mechanism: String,
    pub hyperparameter: f64,
    pub repeat: usize,
    pub seed: u64,
    pub distortion: f64,
    pub distortion_estimator: String,
    pub distortion_exact_subsample: f64,
    pub distortion_sliced: f64,
    pub privacy_union: f64,
    pub privacy_inter: f64,
    pub privacy_group: f64,
    pub privacy_l1: f64,
    pub privacy_linf: f64,
    pub analytic_union: Option<f64>,
    pub bound_union: Option<f64>,
    pub coef_union: f64,
    pub coef_inter: f64,
    pub coef_group: f64,
    pub coef_l1: f64,
    pub coef_linf: f64,
}

/// Hyperparameter grid for one mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismGrid {
    pub mechanism: MechanismId,
    pub values: Vec<f64>,
    /// Laplace scale on histogram counts (`dp-hist` only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_scale: Option<f64>,
}

impl MechanismGrid {
    pub fn new(mechanism: MechanismId, values: Vec<f64>) -> Self {
        Self {
            mechanism,
            values,
            noise_scale: None,
        }
    }
}

pub fn default_grids() -> Vec<MechanismGrid> {
    vec![
        MechanismGrid::new(MechanismId::Alg1, vec![2.5, 3.0, 4.0, 6.0, 8.0, 12.0]),
        MechanismGrid::new(MechanismId::Ap, vec![1.0, 2.0, 5.0, 10.0, 20.0]),
        MechanismGrid::new(MechanismId::Distp, vec![1.0, 2.0, 5.0, 10.0, 20.0]),
        MechanismGrid {
            mechanism: MechanismId::DpHist,
            values: vec![1.0, 2.0, 5.0, 10.0, 20.0],
            noise_scale: Some(1.0),
        },
    ]
}

/// Sweep settings. Every field has a default, so an empty file is valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    pub repeats: usize,
    /// Rows and columns of the synthetic table (ignored with an input file).
    pub m: usize,
    pub t: usize,
    pub secret_means: Vec<f64>,
    /// Secrets are the means of columns `0..tolerances.len()`.
    pub tolerances: Vec<f64>,
    pub groups: Vec<Vec<usize>>,
    /// Quantization anchors, zeros when empty.
    pub anchors: Vec<f64>,
    pub subsample_cap: usize,
    pub projections: usize,
    pub mechanisms: Vec<MechanismGrid>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            repeats: 1,
            m: 2000,
            t: 5,
            secret_means: DEFAULT_SECRET_MEANS.to_vec(),
            tolerances: vec![1.0, 4.0, 3.0],
            groups: vec![vec![0, 1], vec![2]],
            anchors: Vec::new(),
            subsample_cap: EXACT_CAP,
            projections: 32,
            mechanisms: default_grids(),
        }
    }
}

impl SweepConfig {
    pub fn spec(&self) -> Result<SecretSpec> {
        let dims: Vec<usize> = (0..self.tolerances.len()).collect();
        Ok(SecretSpec::means(&dims, self.tolerances.clone())?)
    }

    pub fn partition(&self) -> Result<GroupPartition> {
        Ok(GroupPartition::new(self.groups.clone())?)
    }

    pub fn synthetic_data(&self) -> Result<Dataset> {
        generate_synthetic(
            Profile::WwtLike,
            self.m,
            self.t,
            &self.secret_means,
            self.seed,
        )
    }

    /// Runs the sweep on `data`, or on the synthetic table when `None`.
    pub fn run(&self, data: Option<&Dataset>) -> Result<Vec<TradeoffRecord>> {
        let owned;
        let data = match data {
            Some(d) => d,
            None => {
                owned = self.synthetic_data()?;
                &owned
            }
        };
        run_sweep(
            data,
            &self.spec()?,
            &self.partition()?,
            &self.mechanisms,
            &self.options(),
        )
    }

    pub fn options(&self) -> SweepOptions {
        SweepOptions {
            repeats: self.repeats,
            seed: self.seed,
            anchors: self.anchors.clone(),
            subsample_cap: self.subsample_cap,
            projections: self.projections,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub repeats: usize,
    pub seed: u64,
    pub anchors: Vec<f64>,
    pub subsample_cap: usize,
    pub projections: usize,
}

/// Seed of grid point `index`, independent of scheduling.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    stream_rng(seed, index as u64).random()
}

struct Lines {
    union: f64,
    inter: f64,
    group: f64,
    l1: f64,
    linf: f64,
}

struct Metrics {
    union: Metric,
    inter: Metric,
    group: Metric,
    l1: Metric,
    linf: Metric,
}

/// One record per (mechanism, hyperparameter, repeat), in grid order. Points
/// run in parallel.
pub fn run_sweep(
    data: &Dataset,
    spec: &SecretSpec,
    partition: &GroupPartition,
    grids: &[MechanismGrid],
    opts: &SweepOptions,
) -> Result<Vec<TradeoffRecord>> {
    let points: Vec<(&MechanismGrid, f64, usize)> = grids
        .iter()
        .flat_map(|g| {
            g.values
                .iter()
                .flat_map(move |&v| (0..opts.repeats).map(move |r| (g, v, r)))
        })
        .collect();
    if points.is_empty() {
        return Ok(Vec::new());
    }
    spec.check_dim(data.n_columns())?;
    partition.check_within(spec.len())?;
    let eps = spec.tolerances();
    let anchors = if opts.anchors.is_empty() {
        vec![0.0; spec.len()]
    } else {
        opts.anchors.clone()
    };
    let l1 = LpSpec::matched(NormOrder::Finite(1.0), eps)?;
    let linf = LpSpec::matched(NormOrder::Infinity, eps)?;
    let line = |m: BoundMetric| surrogate_bound_line(&m, eps).map(|l| l.coefficient);
    let lines = Lines {
        union: line(BoundMetric::Union)?,
        inter: line(BoundMetric::Intersection)?,
        group: line(BoundMetric::Group {
            partition: partition.clone(),
        })?,
        l1: line(BoundMetric::Lp { spec: l1 })?,
        linf: line(BoundMetric::Lp { spec: linf })?,
    };
    let metrics = Metrics {
        union: Metric::Union,
        inter: Metric::Intersection,
        group: Metric::Group {
            partition: partition.clone(),
        },
        l1: Metric::Lp { spec: l1 },
        linf: Metric::Lp { spec: linf },
    };
    let original = secret_values(&estimate_params(data, Family::DiagGaussian), spec)?;

    points
        .par_iter()
        .enumerate()
        .map(|(index, &(grid, value, repeat))| {
            let seed = point_seed(opts.seed, index);
            run_point(
                data, spec, &original, &anchors, grid, value, seed, opts, &metrics, &lines,
            )
            .map(|mut r| {
                r.grid_index = index;
                r.repeat = repeat;
                r
            })
            .map_err(|source| CliError::GridPoint {
                mechanism: grid.mechanism.to_string(),
                value,
                repeat,
                source,
            })
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn run_point(
    data: &Dataset,
    spec: &SecretSpec,
    original: &[f64],
    anchors: &[f64],
    grid: &MechanismGrid,
    value: f64,
    seed: u64,
    opts: &SweepOptions,
    metrics: &Metrics,
    lines: &Lines,
) -> sumstat_privacy::Result<TradeoffRecord> {
    let eps = spec.tolerances();
    let mut quant_cfg = None;
    let outcome = match grid.mechanism {
        MechanismId::Alg1 | MechanismId::Dataset => {
            let lengths: Vec<f64> = eps.iter().map(|e| value * e).collect();
            let cfg = MechanismConfig::random_offset(&lengths, anchors)?;
            let out = release_dataset(data, spec, &cfg, seed)?;
            quant_cfg = Some(cfg);
            out
        }
        MechanismId::Ap => {
            release_baseline(data, &BaselineConfig::ApGaussian { noise_sd: value }, seed)?
        }
        MechanismId::Distp => release_baseline(
            data,
            &BaselineConfig::DistpLaplace { noise_scale: value },
            seed,
        )?,
        MechanismId::DpHist => release_baseline(
            data,
            &BaselineConfig::DpHistogram {
                bin_width: value,
                noise_scale: grid.noise_scale.unwrap_or(1.0),
            },
            seed,
        )?,
        other => {
            return Err(sumstat_privacy::Error::Unsupported(format!(
                "{other} does not release datasets"
            )))
        }
    };
    let released_data = outcome
        .dataset
        .as_ref()
        .expect("dataset mechanisms return data");
    let released = secret_values(&outcome.params, spec)?;
    let cap = opts.subsample_cap.min(EXACT_CAP);
    let distortion = w2_empirical_mean_split(data, released_data, cap, seed)?;
    let exact = w2_empirical_subsample(data, released_data, cap, seed)?;
    let sliced = w2_empirical_sliced(data, released_data, opts.projections.max(1), seed)?;
    let surrogate = |m: &Metric| surrogate_from_values(original, &released, eps, m);

    let (analytic_union, bound_union) = match &quant_cfg {
        Some(cfg) => match analytic_privacy_alg1(spec, cfg, &metrics.union) {
            Ok(rep) => {
                let bound = if rep.value < 1.0 {
                    Some(lower_bound_union(
                        rep.value,
                        eps,
                        GammaValue::gaussian(spec.len()),
                    )?)
                } else {
                    None
                };
                (Some(rep.value), bound)
            }
            Err(sumstat_privacy::Error::ToleranceExceedsInterval { .. }) => (None, None),
            Err(e) => return Err(e),
        },
        None => (None, None),
    };

    Ok(TradeoffRecord {
        grid_index: 0,
        mechanism: grid.mechanism.to_string(),
        hyperparameter: value,
        repeat: 0,
        seed,
        distortion,
        distortion_estimator: PRIMARY_ESTIMATOR.to_string(),
        distortion_exact_subsample: exact,
        distortion_sliced: sliced,
        privacy_union: surrogate(&metrics.union)?,
        privacy_inter: surrogate(&metrics.inter)?,
        privacy_group: surrogate(&metrics.group)?,
        privacy_l1: surrogate(&metrics.l1)?,
        privacy_linf: surrogate(&metrics.linf)?,
        analytic_union,
        bound_union,
        coef_union: lines.union,
        coef_inter: lines.inter,
        coef_group: lines.group,
        coef_l1: lines.l1,
        coef_linf: lines.linf,
    })
}
