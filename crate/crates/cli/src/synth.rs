//! Synthetic stand-in for a web-traffic table.

use std::str::FromStr;

use rand::Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use sumstat_privacy::rng::stream_rng;
use sumstat_privacy::{Dataset, Error};

use crate::error::{CliError, Result};

/// Means of the three secret columns in the default profile.
pub const DEFAULT_SECRET_MEANS: [f64; 3] = [15.0, 68.0, 54.0];
/// Mean and standard deviation of the non-secret columns.
pub const BACKGROUND_MEAN: f64 = 40.0;
pub const BACKGROUND_SD: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Independent Gaussian columns. Secret column `j` has mean `means[j]`
    /// and sd `0.2 |mean| + 1`; the rest use [`BACKGROUND_MEAN`] and
    /// [`BACKGROUND_SD`].
    WwtLike,
}

impl FromStr for Profile {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wwt-like" => Ok(Profile::WwtLike),
            other => Err(CliError::Config(format!("unknown profile {other:?}"))),
        }
    }
}

pub fn column_sd(mean: f64) -> f64 {
    0.2 * mean.abs() + 1.0
}

/// `m` rows by `t` columns; column `j` is drawn from stream `j` of `seed`.
pub fn generate_synthetic(
    profile: Profile,
    m: usize,
    t: usize,
    secret_means: &[f64],
    seed: u64,
) -> Result<Dataset> {
    let Profile::WwtLike = profile;
    if m < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 rows, got {m}")).into());
    }
    if t == 0 || secret_means.len() > t {
        return Err(CliError::Config(format!(
            "{} secret means do not fit in {t} columns",
            secret_means.len()
        )));
    }
    let columns: Vec<Vec<f64>> = (0..t)
        .into_par_iter()
        .map(|j| {
            let (mu, sd) = match secret_means.get(j) {
                Some(&mu) => (mu, column_sd(mu)),
                None => (BACKGROUND_MEAN, BACKGROUND_SD),
            };
            let dist = Normal::new(mu, sd).expect("finite sd");
            stream_rng(seed, j as u64)
                .sample_iter(dist)
                .take(m)
                .collect()
        })
        .collect();
    Ok(Dataset::from_columns(&columns)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sumstat_privacy::{estimate_params, Family};

    #[test]
    fn default_means_recovered() {
        let m = 10_000;
        let data = generate_synthetic(Profile::WwtLike, m, 5, &DEFAULT_SECRET_MEANS, 3).unwrap();
        let est = estimate_params(&data, Family::DiagGaussian);
        for (j, &mu) in DEFAULT_SECRET_MEANS.iter().enumerate() {
            let se = column_sd(mu) / (m as f64).sqrt();
            assert!(
                (est.means[j] - mu).abs() < 5.0 * se,
                "column {j}: {}",
                est.means[j]
            );
            // sd of the sample sd is about sd / sqrt(2m)
            let se_sd = column_sd(mu) / (2.0 * m as f64).sqrt();
            assert!((est.stds[j] - column_sd(mu)).abs() < 5.0 * se_sd);
        }
        let se = BACKGROUND_SD / (m as f64).sqrt();
        assert!((est.means[4] - BACKGROUND_MEAN).abs() < 5.0 * se);
    }

    #[test]
    fn seeded() {
        let a = generate_synthetic(Profile::WwtLike, 50, 4, &[1.0], 9).unwrap();
        let b = generate_synthetic(Profile::WwtLike, 50, 4, &[1.0], 9).unwrap();
        let c = generate_synthetic(Profile::WwtLike, 50, 4, &[1.0], 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(generate_synthetic(Profile::WwtLike, 1, 3, &[], 0).is_err());
        assert!(generate_synthetic(Profile::WwtLike, 10, 2, &[1.0, 2.0, 3.0], 0).is_err());
        assert!("other".parse::<Profile>().is_err());
    }
}
