//! Privacy metrics.
//!
//! * analytic: closed forms for the random-offset mechanism under uniform
//!   independent priors;
//! * surrogate: negated tolerance-normalised error of the released secrets,
//!   computed from two datasets without any prior;
//! * Monte-Carlo: sample secrets from the prior, run the mechanism and count
//!   attacker successes, with either the posterior-bin attacker or the
//!   family of release-agnostic grid attackers.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::quantize_random_offset;
use crate::model::{
    estimate_params, secret_values, Dataset, Family, GroupPartition, LpSpec, MechanismConfig,
    PriorSpec, QuantizationMode, Quantizer, SecretSpec,
};
use crate::rng::stream_rng;

/// Trials per Monte-Carlo batch; batch `k` uses stream `k` of the seed.
pub const MC_BATCH: usize = 1000;

/// Largest grid-attacker family evaluated by the Monte-Carlo estimator.
pub const GRID_FAMILY_CAP: usize = 4096;

pub const DEFAULT_TRIALS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Metric {
    Union,
    #[serde(alias = "inter")]
    Intersection,
    Group {
        partition: GroupPartition,
    },
    Lp {
        spec: LpSpec,
    },
}

impl Metric {
    pub fn kind(&self) -> MetricKind {
        match self {
            Metric::Union => MetricKind::Union,
            Metric::Intersection => MetricKind::Intersection,
            Metric::Group { .. } => MetricKind::Group,
            Metric::Lp { .. } => MetricKind::Lp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Union,
    Intersection,
    Group,
    Lp,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Union => "union",
            MetricKind::Intersection => "inter",
            MetricKind::Group => "group",
            MetricKind::Lp => "lp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    Surrogate,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attacker {
    PosteriorBin,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub metric: MetricKind,
    pub value: f64,
    pub method: Method,
    /// Normal-approximation 95% half-width, Monte-Carlo only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    /// `true` when `value` is an upper bound rather than the exact privacy.
    pub upper_bound: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attacker: Option<Attacker>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl PrivacyReport {
    fn plain(metric: MetricKind, value: f64, method: Method) -> Self {
        Self {
            metric,
            value,
            method,
            half_width: None,
            upper_bound: false,
            attacker: None,
            n_trials: None,
            seed: None,
        }
    }

    /// Standard error recovered from the 95% half-width.
    pub fn std_error(&self) -> Option<f64> {
        self.half_width.map(|h| h / 1.96)
    }
}

/// Closed-form privacy of the random-offset mechanism under uniform priors.
///
/// With `r_i = 2 eps_i / s_i`: union `1 - prod(1 - r_i)`, intersection
/// `prod r_i`, group `1 - prod_b (1 - prod_{i in b} r_i)`. For lp norms the
/// upper bound `1 - prod(1 - 2 eps_p / (d^{1/p} s_i))` is returned.
pub fn analytic_privacy_alg1(
    spec: &SecretSpec,
    cfg: &MechanismConfig,
    metric: &Metric,
) -> Result<PrivacyReport> {
    if cfg.mode != QuantizationMode::RandomOffset {
        return Err(Error::InvalidConfig(
            "analytic formulas need a random-offset config".into(),
        ));
    }
    cfg.validate_for(spec.len())?;
    let d = spec.len();
    let ratio = |i: usize, eps: f64| -> Result<f64> {
        let s = cfg.secrets[i].length;
        if 2.0 * eps > s {
            return Err(Error::ToleranceExceedsInterval {
                index: i,
                eps,
                length: s,
            });
        }
        Ok(2.0 * eps / s)
    };
    let r: Vec<f64> = spec
        .tolerances()
        .iter()
        .enumerate()
        .map(|(i, &e)| ratio(i, e))
        .collect::<Result<_>>()?;
    let mut report = match metric {
        Metric::Union => PrivacyReport::plain(
            MetricKind::Union,
            1.0 - r.iter().map(|x| 1.0 - x).product::<f64>(),
            Method::Analytic,
        ),
        Metric::Intersection => PrivacyReport::plain(
            MetricKind::Intersection,
            r.iter().product(),
            Method::Analytic,
        ),
        Metric::Group { partition } => {
            partition.check_covers(d)?;
            let miss: f64 = partition
                .groups()
                .iter()
                .map(|g| 1.0 - g.iter().map(|&i| r[i]).product::<f64>())
                .product();
            PrivacyReport::plain(MetricKind::Group, 1.0 - miss, Method::Analytic)
        }
        Metric::Lp { spec: lp } => {
            let eps_i = lp.eps_p / (d as f64).powf(lp.p.inverse());
            let rp: Vec<f64> = (0..d).map(|i| ratio(i, eps_i)).collect::<Result<_>>()?;
            let mut rep = PrivacyReport::plain(
                MetricKind::Lp,
                1.0 - rp.iter().map(|x| 1.0 - x).product::<f64>(),
                Method::Analytic,
            );
            rep.upper_bound = true;
            rep
        }
    };
    report.value = report.value.clamp(0.0, 1.0);
    Ok(report)
}

/// Per-secret terms `-|g_i - g'_i| / eps_i`.
pub fn surrogate_terms(original: &[f64], released: &[f64], eps: &[f64]) -> Vec<f64> {
    original
        .iter()
        .zip(released)
        .zip(eps)
        .map(|((g, h), e)| -(g - h).abs() / e)
        .collect()
}

/// Surrogate privacy from secret values.
pub fn surrogate_from_values(
    original: &[f64],
    released: &[f64],
    eps: &[f64],
    metric: &Metric,
) -> Result<f64> {
    let d = original.len();
    if released.len() != d || eps.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: released.len().min(eps.len()),
        });
    }
    let terms = surrogate_terms(original, released, eps);
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::NEG_INFINITY, f64::max);
    let min = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);
    let value = match metric {
        Metric::Union => max(&mut terms.iter().copied()),
        Metric::Intersection => min(&mut terms.iter().copied()),
        Metric::Group { partition } => {
            partition.check_within(d)?;
            max(&mut partition
                .groups()
                .iter()
                .map(|g| min(&mut g.iter().map(|&i| terms[i]))))
        }
        Metric::Lp { spec } => {
            let diff: Vec<f64> = original.iter().zip(released).map(|(a, b)| a - b).collect();
            -spec.p.norm(&diff) / spec.eps_p
        }
    };
    // -0.0 prints oddly in tables.
    Ok(if value == 0.0 { 0.0 } else { value })
}

/// Surrogate privacy between an original and a released dataset, using the
/// empirical secrets of each.
pub fn surrogate_privacy(
    x: &Dataset,
    y: &Dataset,
    spec: &SecretSpec,
    metric: &Metric,
) -> Result<PrivacyReport> {
    spec.check_dim(x.n_columns())?;
    spec.check_dim(y.n_columns())?;
    let gx = secret_values(&estimate_params(x, Family::DiagGaussian), spec)?;
    let gy = secret_values(&estimate_params(y, Family::DiagGaussian), spec)?;
    let value = surrogate_from_values(&gx, &gy, spec.tolerances(), metric)?;
    Ok(PrivacyReport::plain(
        metric.kind(),
        value,
        Method::Surrogate,
    ))
}

/// Prior support from a dataset: each secret's empirical range over
/// per-column statistics widened by one tolerance on each side. For a mean
/// secret the range is the column's min/max; for a standard deviation it is
/// `(0, max - min]` with the lower end kept positive.
pub fn empirical_prior(data: &Dataset, spec: &SecretSpec) -> Result<PriorSpec> {
    spec.check_dim(data.n_columns())?;
    let intervals = spec
        .targets()
        .iter()
        .zip(spec.tolerances())
        .map(|(t, &e)| {
            let col = data.column(t.dim);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            match t.kind {
                crate::model::ParamKind::Mean => (lo - e, hi + e),
                crate::model::ParamKind::Std => {
                    (e.min((hi - lo) / 2.0).max(f64::MIN_POSITIVE), hi - lo + e)
                }
            }
        })
        .collect();
    PriorSpec::new(intervals, spec)
}

/// Release-agnostic attackers guessing segment midpoints of a
/// `2 eps`-segmentation of the prior support.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFamily {
    /// Segment midpoints per secret.
    pub midpoints: Vec<Vec<f64>>,
    lo: Vec<f64>,
    eps: Vec<f64>,
}

impl GridFamily {
    pub fn sizes(&self) -> Vec<usize> {
        self.midpoints.iter().map(Vec::len).collect()
    }

    /// Number of attackers, the product of the per-secret segment counts
    /// (saturating).
    pub fn len(&self) -> usize {
        self.midpoints
            .iter()
            .fold(1usize, |acc, m| acc.saturating_mul(m.len()))
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Guess vector of the attacker with flat index `v` (mixed radix, first
    /// secret fastest).
    pub fn attacker(&self, mut v: usize) -> Vec<f64> {
        self.midpoints
            .iter()
            .map(|m| {
                let g = m[v % m.len()];
                v /= m.len();
                g
            })
            .collect()
    }

    /// Index of the segment containing `value` for secret `i`.
    fn segment(&self, i: usize, value: f64) -> usize {
        let k = ((value - self.lo[i]) / (2.0 * self.eps[i])).floor();
        (k.max(0.0) as usize).min(self.midpoints[i].len() - 1)
    }
}

pub fn grid_attackers(support: &PriorSpec, spec: &SecretSpec) -> Result<GridFamily> {
    if support.len() != spec.len() {
        return Err(Error::InvalidPrior(format!(
            "{} intervals for {} secrets",
            support.len(),
            spec.len()
        )));
    }
    let mut midpoints = Vec::with_capacity(spec.len());
    for (&(lo, hi), &e) in support.intervals().iter().zip(spec.tolerances()) {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidPrior(
                "grid attackers need bounded support".into(),
            ));
        }
        let n = (((hi - lo) / (2.0 * e)).ceil() as usize).max(1);
        if n > GRID_FAMILY_CAP {
            return Err(Error::Unsupported(format!(
                "grid of {n} segments for one secret"
            )));
        }
        midpoints.push((0..n).map(|v| lo + (v as f64 + 0.5) * 2.0 * e).collect());
    }
    Ok(GridFamily {
        midpoints,
        lo: support.intervals().iter().map(|iv| iv.0).collect(),
        eps: spec.tolerances().to_vec(),
    })
}

/// Mechanism acting on secret values for Monte-Carlo runs.
#[derive(Debug, Clone, PartialEq)]
pub enum McMechanism {
    /// Random offset within the bin.
    Alg1(MechanismConfig),
    /// Deterministic bin midpoint, applied to each secret value.
    Midpoint(MechanismConfig),
}

impl McMechanism {
    fn config(&self) -> &MechanismConfig {
        match self {
            McMechanism::Alg1(c) | McMechanism::Midpoint(c) => c,
        }
    }

    fn validate(&self, spec: &SecretSpec) -> Result<()> {
        let cfg = self.config();
        cfg.validate_for(spec.len())?;
        match self {
            McMechanism::Alg1(_) if cfg.mode != QuantizationMode::RandomOffset => Err(
                Error::InvalidConfig("Alg1 needs a random-offset config".into()),
            ),
            McMechanism::Midpoint(_) if cfg.mode != QuantizationMode::Midpoint => Err(
                Error::InvalidConfig("midpoint mechanism needs a midpoint config".into()),
            ),
            McMechanism::Midpoint(_) if spec.has_std_secret() => Err(Error::Unsupported(
                "Monte-Carlo midpoint release supports mean secrets only".into(),
            )),
            _ => Ok(()),
        }
    }

    fn release<R: Rng + ?Sized>(&self, g: &[f64], out: &mut [f64], rng: &mut R) -> Result<()> {
        let cfg = self.config();
        for (i, (&v, q)) in g.iter().zip(&cfg.secrets).enumerate() {
            if v < q.anchor {
                return Err(Error::BelowAnchor {
                    index: i,
                    value: v,
                    anchor: q.anchor,
                });
            }
            out[i] = match self {
                McMechanism::Alg1(_) => {
                    quantize_random_offset(v, q, rng.random::<f64>() * q.length)
                }
                McMechanism::Midpoint(_) => q.midpoint(v),
            };
        }
        Ok(())
    }
}

/// Posterior-optimal guess under a uniform prior: a point of the bin
/// (intersected with the support) at least `eps` from both ends, as close to
/// the release as possible.
fn posterior_bin_guess(released: f64, q: &Quantizer, prior: (f64, f64), eps: f64) -> f64 {
    let (lo, hi) = posterior_interval(released, q, prior);
    if lo + eps <= hi - eps {
        released.clamp(lo + eps, hi - eps)
    } else {
        0.5 * (lo + hi)
    }
}

fn posterior_interval(released: f64, q: &Quantizer, prior: (f64, f64)) -> (f64, f64) {
    let left = q.bin_left(released);
    (left.max(prior.0), (left + q.length).min(prior.1))
}

struct EventChecker<'a> {
    metrics: &'a [Metric],
    eps: &'a [f64],
}

impl EventChecker<'_> {
    fn success(&self, metric: &Metric, guess: &[f64], truth: &[f64]) -> bool {
        let hit = |i: usize| (guess[i] - truth[i]).abs() <= self.eps[i];
        match metric {
            Metric::Union => (0..truth.len()).any(hit),
            Metric::Intersection => (0..truth.len()).all(hit),
            Metric::Group { partition } => {
                partition.groups().iter().any(|g| g.iter().all(|&i| hit(i)))
            }
            Metric::Lp { spec } => {
                let diff: Vec<f64> = guess.iter().zip(truth).map(|(a, b)| a - b).collect();
                spec.p.norm(&diff) <= spec.eps_p
            }
        }
    }
}

fn check_metrics(metrics: &[Metric], d: usize) -> Result<()> {
    for m in metrics {
        if let Metric::Group { partition } = m {
            partition.check_within(d)?;
        }
    }
    Ok(())
}

fn sample_prior<R: Rng + ?Sized>(prior: &PriorSpec, out: &mut [f64], rng: &mut R) {
    for (x, &(lo, hi)) in out.iter_mut().zip(prior.intervals()) {
        *x = lo + rng.random::<f64>() * (hi - lo);
    }
}

fn batches(n_trials: usize) -> Vec<(u64, usize)> {
    let n_batches = n_trials.div_ceil(MC_BATCH);
    (0..n_batches)
        .map(|b| (b as u64, MC_BATCH.min(n_trials - b * MC_BATCH)))
        .collect()
}

fn mc_report(
    metric: &Metric,
    successes: u64,
    n: usize,
    attacker: Attacker,
    seed: u64,
) -> PrivacyReport {
    let p = successes as f64 / n as f64;
    PrivacyReport {
        metric: metric.kind(),
        value: p,
        method: Method::MonteCarlo,
        half_width: Some(1.96 * (p * (1.0 - p) / n as f64).sqrt()),
        upper_bound: false,
        attacker: Some(attacker),
        n_trials: Some(n),
        seed: Some(seed),
    }
}

/// Monte-Carlo privacy for several metrics evaluated on the same trials, so
/// event containment between metrics holds trial by trial.
///
/// The grid attacker's value is the best empirical success rate over the
/// family members (each member estimated on every trial).
pub fn monte_carlo_privacy(
    mech: &McMechanism,
    prior: &PriorSpec,
    spec: &SecretSpec,
    metrics: &[Metric],
    attacker: Attacker,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<PrivacyReport>> {
    if n_trials < MC_BATCH {
        return Err(Error::InvalidParams(format!(
            "n_trials must be at least {MC_BATCH}"
        )));
    }
    mech.validate(spec)?;
    if prior.len() != spec.len() {
        return Err(Error::InvalidPrior(format!(
            "{} intervals for {} secrets",
            prior.len(),
            spec.len()
        )));
    }
    check_metrics(metrics, spec.len())?;
    match attacker {
        Attacker::PosteriorBin => {
            if !matches!(mech, McMechanism::Alg1(_)) {
                return Err(Error::Unsupported(
                    "the posterior-bin attacker is only optimal for the random-offset mechanism"
                        .into(),
                ));
            }
            mc_posterior_bin(mech, prior, spec, metrics, n_trials, seed)
        }
        Attacker::Grid => mc_grid(mech, prior, spec, metrics, n_trials, seed),
    }
}

fn mc_posterior_bin(
    mech: &McMechanism,
    prior: &PriorSpec,
    spec: &SecretSpec,
    metrics: &[Metric],
    n_trials: usize,
    seed: u64,
) -> Result<Vec<PrivacyReport>> {
    let d = spec.len();
    let eps = spec.tolerances();
    let cfg = mech.config();
    let checker = EventChecker { metrics, eps };
    let counts: Vec<Vec<u64>> = batches(n_trials)
        .into_par_iter()
        .map(|(b, n)| -> Result<Vec<u64>> {
            let mut rng = stream_rng(seed, b);
            let mut counts = vec![0u64; metrics.len()];
            let (mut g, mut r, mut guess) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
            for _ in 0..n {
                sample_prior(prior, &mut g, &mut rng);
                mech.release(&g, &mut r, &mut rng)?;
                for i in 0..d {
                    guess[i] =
                        posterior_bin_guess(r[i], &cfg.secrets[i], prior.intervals()[i], eps[i]);
                }
                for (c, m) in counts.iter_mut().zip(checker.metrics) {
                    *c += checker.success(m, &guess, &g) as u64;
                }
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;
    Ok(metrics
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let s = counts.iter().map(|c| c[k]).sum();
            mc_report(m, s, n_trials, Attacker::PosteriorBin, seed)
        })
        .collect())
}

fn mc_grid(
    mech: &McMechanism,
    prior: &PriorSpec,
    spec: &SecretSpec,
    metrics: &[Metric],
    n_trials: usize,
    seed: u64,
) -> Result<Vec<PrivacyReport>> {
    let family = grid_attackers(prior, spec)?;
    let size = family.len();
    if size > GRID_FAMILY_CAP {
        return Err(Error::Unsupported(format!(
            "grid family of {size} attackers exceeds the cap of {GRID_FAMILY_CAP}"
        )));
    }
    let d = spec.len();
    let eps = spec.tolerances();
    let sizes = family.sizes();
    let lp_metrics: Vec<&Metric> = metrics
        .iter()
        .filter(|m| matches!(m, Metric::Lp { .. }))
        .collect();
    let checker = EventChecker { metrics, eps };

    // Per batch: histogram of hit tuples plus direct lp counts per member.
    let parts: Vec<(Vec<u64>, Vec<Vec<u64>>)> = batches(n_trials)
        .into_par_iter()
        .map(|(b, n)| -> Result<(Vec<u64>, Vec<Vec<u64>>)> {
            let mut rng = stream_rng(seed, b);
            let mut tuples = vec![0u64; size];
            let mut lp_counts = vec![vec![0u64; size]; lp_metrics.len()];
            let (mut g, mut r) = (vec![0.0; d], vec![0.0; d]);
            for _ in 0..n {
                sample_prior(prior, &mut g, &mut rng);
                // Grid attackers ignore the release; it is still drawn so the
                // random stream matches the posterior-bin runs.
                mech.release(&g, &mut r, &mut rng)?;
                let mut idx = 0usize;
                let mut radix = 1usize;
                for i in 0..d {
                    idx += family.segment(i, g[i]) * radix;
                    radix *= sizes[i];
                }
                tuples[idx] += 1;
                for (counts, m) in lp_counts.iter_mut().zip(&lp_metrics) {
                    count_lp_members(&family, m, &checker, &g, counts);
                }
            }
            Ok((tuples, lp_counts))
        })
        .collect::<Result<_>>()?;

    let mut tuples = vec![0u64; size];
    let mut lp_counts = vec![vec![0u64; size]; lp_metrics.len()];
    for (t, l) in parts {
        tuples.iter_mut().zip(t).for_each(|(a, b)| *a += b);
        for (acc, part) in lp_counts.iter_mut().zip(l) {
            acc.iter_mut().zip(part).for_each(|(a, b)| *a += b);
        }
    }

    let digits: Vec<Vec<usize>> = (0..size)
        .map(|mut v| {
            sizes
                .iter()
                .map(|&n| {
                    let x = v % n;
                    v /= n;
                    x
                })
                .collect()
        })
        .collect();
    let occupied: Vec<usize> = (0..size).filter(|&h| tuples[h] > 0).collect();

    let mut lp_iter = lp_counts.into_iter();
    let mut reports = Vec::with_capacity(metrics.len());
    for m in metrics {
        let best = if let Metric::Lp { .. } = m {
            lp_iter
                .next()
                .expect("one count vector per lp metric")
                .into_iter()
                .max()
                .unwrap_or(0)
        } else {
            (0..size)
                .into_par_iter()
                .map(|v| {
                    let dv = &digits[v];
                    occupied
                        .iter()
                        .filter(|&&h| {
                            let dh = &digits[h];
                            let hit = |i: usize| dv[i] == dh[i];
                            match m {
                                Metric::Union => (0..d).any(hit),
                                Metric::Intersection => (0..d).all(hit),
                                Metric::Group { partition } => {
                                    partition.groups().iter().any(|g| g.iter().all(|&i| hit(i)))
                                }
                                Metric::Lp { .. } => unreachable!(),
                            }
                        })
                        .map(|&h| tuples[h])
                        .sum::<u64>()
                })
                .max()
                .unwrap_or(0)
        };
        reports.push(mc_report(m, best, n_trials, Attacker::Grid, seed));
    }
    Ok(reports)
}

/// Adds one to every grid member whose guess is within `eps_p` of `g` in the
/// lp norm. Only members inside the per-coordinate window `|mid - g_i| <= eps_p`
/// can succeed, so the scan is restricted to that box.
fn count_lp_members(
    family: &GridFamily,
    metric: &Metric,
    checker: &EventChecker<'_>,
    g: &[f64],
    counts: &mut [u64],
) {
    let Metric::Lp { spec } = metric else { return };
    let d = g.len();
    let mut ranges = Vec::with_capacity(d);
    for (i, mids) in family.midpoints.iter().enumerate() {
        let lo = mids.partition_point(|&m| m < g[i] - spec.eps_p);
        let hi = mids.partition_point(|&m| m <= g[i] + spec.eps_p);
        if lo >= hi {
            return;
        }
        ranges.push((lo, hi));
    }
    let mut cur: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    let mut guess = vec![0.0; d];
    loop {
        let mut idx = 0usize;
        let mut radix = 1usize;
        for i in 0..d {
            guess[i] = family.midpoints[i][cur[i]];
            idx += cur[i] * radix;
            radix *= family.midpoints[i].len();
        }
        if checker.success(metric, &guess, g) {
            counts[idx] += 1;
        }
        let mut i = 0;
        loop {
            if i == d {
                return;
            }
            cur[i] += 1;
            if cur[i] < ranges[i].1 {
                break;
            }
            cur[i] = ranges[i].0;
            i += 1;
        }
    }
}

/// Single secret guessed `n_guesses` times: the guesses are the grid
/// midpoints nearest the centre of the posterior bin. Success means any guess
/// is within the tolerance.
pub fn multi_shot_privacy(
    cfg: &MechanismConfig,
    prior: &PriorSpec,
    spec: &SecretSpec,
    n_guesses: usize,
    n_trials: usize,
    seed: u64,
) -> Result<PrivacyReport> {
    if spec.len() != 1 {
        return Err(Error::InvalidSecretSpec(
            "multi-shot attacks take exactly one secret".into(),
        ));
    }
    if n_guesses == 0 {
        return Err(Error::InvalidParams(
            "at least one guess is required".into(),
        ));
    }
    if n_trials < MC_BATCH {
        return Err(Error::InvalidParams(format!(
            "n_trials must be at least {MC_BATCH}"
        )));
    }
    let mech = McMechanism::Alg1(cfg.clone());
    mech.validate(spec)?;
    let family = grid_attackers(prior, spec)?;
    let mids = &family.midpoints[0];
    let k = if n_guesses > mids.len() {
        log::warn!(
            "{n_guesses} guesses exceed the {} grid midpoints; using {}",
            mids.len(),
            mids.len()
        );
        mids.len()
    } else {
        n_guesses
    };
    let eps = spec.tolerances()[0];
    let q = cfg.secrets[0];
    let support = prior.intervals()[0];
    let total: u64 = batches(n_trials)
        .into_par_iter()
        .map(|(b, n)| -> Result<u64> {
            let mut rng = stream_rng(seed, b);
            let (mut g, mut r) = ([0.0], [0.0]);
            let mut hits = 0u64;
            for _ in 0..n {
                sample_prior(prior, &mut g, &mut rng);
                mech.release(&g, &mut r, &mut rng)?;
                let (lo, hi) = posterior_interval(r[0], &q, support);
                let centre = 0.5 * (lo + hi);
                let guesses = nearest_midpoints(mids, centre, k);
                hits += guesses.iter().any(|m| (m - g[0]).abs() <= eps) as u64;
            }
            Ok(hits)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let mut report = mc_report(&Metric::Union, total, n_trials, Attacker::Grid, seed);
    report.n_trials = Some(n_trials);
    Ok(report)
}

/// The `k` sorted midpoints closest to `x`, ties going to the lower one.
fn nearest_midpoints(mids: &[f64], x: f64, k: usize) -> &[f64] {
    let mut right = mids.partition_point(|&m| m < x);
    let mut left = right;
    while right - left < k {
        let take_left = if left == 0 {
            false
        } else if right == mids.len() {
            true
        } else {
            x - mids[left - 1] <= mids[right] - x
        };
        if take_left {
            left -= 1;
        } else {
            right += 1;
        }
    }
    &mids[left..right]
}
