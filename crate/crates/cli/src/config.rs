//! Config files. TOML when the extension is `.toml`, JSON otherwise.
//!
//! Secrets file:
//!
//! ```toml
//! means = [0, 1, 2]            # or: targets = [{ kind = "mean", dim = 0 }, ...]
//! tolerances = [1.0, 4.0, 3.0]
//! groups = [[0, 1], [2]]       # optional, indices into the secret list
//! prior = [[0.0, 30.0], [0.0, 72.0], [0.0, 54.0]]  # optional
//!
//! [lp]                         # optional
//! p = "inf"                    # or a number
//! eps_p = 4.0                  # optional, defaults to the p-norm of the tolerances
//! ```
//!
//! Mechanism file:
//!
//! ```toml
//! mode = "random-offset"       # or "midpoint"
//! lengths = [6.0, 24.0, 18.0]  # one per secret
//! anchors = [0.0, 0.0, 0.0]    # optional, zeros by default
//! eig_lengths = [1.0, 1.0]     # midpoint mode with a std secret
//! eig_anchors = [0.0, 0.0]
//!
//! [baseline]                   # baselines only
//! kind = "dp-histogram"        # "ap-gaussian" | "distp-laplace" | "dp-histogram"
//! bin_width = 2.0
//! noise_scale = 1.0
//! ```

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sumstat_privacy::{
    BaselineConfig, GroupPartition, LpSpec, MechanismConfig, NormOrder, PriorSpec,
    QuantizationMode, SecretSpec, SecretTarget,
};

use crate::error::{CliError, Result};

/// Reads `path` as TOML or JSON depending on its extension.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let is_toml = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let parsed = if is_toml {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|message| CliError::Parse {
        path: path.to_path_buf(),
        message,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormValue {
    Number(f64),
    Text(String),
}

impl NormValue {
    pub fn order(&self) -> Result<NormOrder> {
        let text = match self {
            NormValue::Number(p) => p.to_string(),
            NormValue::Text(s) => s.clone(),
        };
        Ok(text.parse()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpFile {
    pub p: NormValue,
    #[serde(default)]
    pub eps_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecretsFile {
    #[serde(default)]
    pub targets: Vec<SecretTarget>,
    #[serde(default)]
    pub means: Vec<usize>,
    pub tolerances: Vec<f64>,
    #[serde(default)]
    pub groups: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub lp: Option<LpFile>,
    #[serde(default)]
    pub prior: Option<Vec<(f64, f64)>>,
}

impl SecretsFile {
    pub fn spec(&self) -> Result<SecretSpec> {
        if !self.targets.is_empty() && !self.means.is_empty() {
            return Err(CliError::Config(
                "give either `targets` or `means`, not both".into(),
            ));
        }
        let targets = if self.targets.is_empty() {
            self.means.iter().copied().map(SecretTarget::mean).collect()
        } else {
            self.targets.clone()
        };
        Ok(SecretSpec::new(targets, self.tolerances.clone())?)
    }

    /// Groups from the file, or one group per secret.
    pub fn partition(&self) -> Result<GroupPartition> {
        match &self.groups {
            Some(g) => Ok(GroupPartition::new(g.clone())?),
            None => Ok(GroupPartition::singletons(self.tolerances.len())),
        }
    }

    /// lp settings from the file, or `p = 2` with a matched tolerance.
    pub fn lp(&self) -> Result<LpSpec> {
        match &self.lp {
            Some(f) => lp_spec(f.p.order()?, f.eps_p, &self.tolerances),
            None => lp_spec(NormOrder::Finite(2.0), None, &self.tolerances),
        }
    }

    pub fn prior(&self, spec: &SecretSpec) -> Result<Option<PriorSpec>> {
        self.prior
            .clone()
            .map(|iv| PriorSpec::new(iv, spec))
            .transpose()
            .map_err(Into::into)
    }
}

pub fn lp_spec(p: NormOrder, eps_p: Option<f64>, eps: &[f64]) -> Result<LpSpec> {
    Ok(match eps_p {
        Some(e) => LpSpec::new(p, e)?,
        None => LpSpec::matched(p, eps)?,
    })
}

fn default_mode() -> QuantizationMode {
    QuantizationMode::RandomOffset
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismFile {
    #[serde(default = "default_mode")]
    pub mode: QuantizationMode,
    #[serde(default)]
    pub lengths: Vec<f64>,
    #[serde(default)]
    pub anchors: Vec<f64>,
    #[serde(default)]
    pub eig_lengths: Vec<f64>,
    #[serde(default)]
    pub eig_anchors: Vec<f64>,
    #[serde(default)]
    pub baseline: Option<BaselineConfig>,
}

impl MechanismFile {
    pub fn config(&self) -> Result<MechanismConfig> {
        if self.lengths.is_empty() {
            return match self.baseline {
                Some(b) => Ok(MechanismConfig::baseline(b)),
                None => Err(CliError::Config(
                    "no `lengths` and no `[baseline]` section".into(),
                )),
            };
        }
        let anchors = zeros_if_empty(&self.anchors, self.lengths.len());
        let mut cfg = match self.mode {
            QuantizationMode::RandomOffset => {
                MechanismConfig::random_offset(&self.lengths, &anchors)?
            }
            QuantizationMode::Midpoint => {
                let eig_anchors = zeros_if_empty(&self.eig_anchors, self.eig_lengths.len());
                MechanismConfig::midpoint(&self.lengths, &anchors, &self.eig_lengths, &eig_anchors)?
            }
        };
        cfg.baseline = self.baseline;
        Ok(cfg)
    }
}

fn zeros_if_empty(v: &[f64], n: usize) -> Vec<f64> {
    if v.is_empty() {
        vec![0.0; n]
    } else {
        v.to_vec()
    }
}

/// `"1,4,3"` -> `[1.0, 4.0, 3.0]`.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad list item {p:?} in {s:?}")))
        })
        .collect()
}

/// `"0,1;2"` -> `[[0, 1], [2]]`.
pub fn parse_groups(s: &str) -> Result<GroupPartition> {
    let groups = s
        .split(';')
        .map(parse_list::<usize>)
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupPartition::new(groups)?)
}

/// `"0:30,10:72"` -> `[(0, 30), (10, 72)]`.
pub fn parse_intervals(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("interval {part:?} is not lo:hi")))?;
            let num = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("bad number {x:?}")))
            };
            Ok((num(lo)?, num(hi)?))
        })
        .collect()
}
