//! Domain types shared by every other module: parametric Gaussian families,
//! secret specifications, priors, datasets and mechanism configuration.
//!
//! All types validate their invariants on construction and are immutable
//! afterwards, so they can be shared freely across threads.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that a rotation matrix is orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Mean,
    Std,
}

/// One secret statistic: the mean or standard deviation of a given dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SecretTarget {
    pub kind: ParamKind,
    pub dim: usize,
}

impl SecretTarget {
    pub fn mean(dim: usize) -> Self {
        Self {
            kind: ParamKind::Mean,
            dim,
        }
    }

    pub fn std(dim: usize) -> Self {
        Self {
            kind: ParamKind::Std,
            dim,
        }
    }
}

impl fmt::Display for SecretTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ParamKind::Mean => write!(f, "mean[{}]", self.dim),
            ParamKind::Std => write!(f, "std[{}]", self.dim),
        }
    }
}

/// Anything exposing per-dimension means and standard deviations.
pub trait SecretSource {
    fn dim(&self) -> usize;
    fn param(&self, target: SecretTarget) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDiag", into = "RawDiag")]
pub struct GaussianDiagParams {
    means: Vec<f64>,
    stds: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDiag {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl TryFrom<RawDiag> for GaussianDiagParams {
    type Error = Error;
    fn try_from(raw: RawDiag) -> Result<Self> {
        Self::new(raw.means, raw.stds)
    }
}

impl From<GaussianDiagParams> for RawDiag {
    fn from(p: GaussianDiagParams) -> Self {
        RawDiag {
            means: p.means,
            stds: p.stds,
        }
    }
}

impl GaussianDiagParams {
    pub fn new(means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InvalidParams(
                "at least one dimension is required".into(),
            ));
        }
        if means.len() != stds.len() {
            return Err(Error::DimensionMismatch {
                expected: means.len(),
                got: stds.len(),
            });
        }
        if let Some(j) = means.iter().position(|m| !m.is_finite()) {
            return Err(Error::InvalidParams(format!("mean[{j}] is not finite")));
        }
        if let Some(j) = stds.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParams(format!(
                "std[{j}] = {} must be positive",
                stds[j]
            )));
        }
        Ok(Self { means, stds })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    /// Returns a copy with one parameter replaced, re-validating the result.
    pub fn with_param(&self, target: SecretTarget, value: f64) -> Result<Self> {
        if target.dim >= self.means.len() {
            return Err(Error::TargetOutOfRange {
                target,
                dim: self.means.len(),
            });
        }
        let mut means = self.means.clone();
        let mut stds = self.stds.clone();
        match target.kind {
            ParamKind::Mean => means[target.dim] = value,
            ParamKind::Std => stds[target.dim] = value,
        }
        Self::new(means, stds)
    }
}

impl SecretSource for GaussianDiagParams {
    fn dim(&self) -> usize {
        self.means.len()
    }

    fn param(&self, target: SecretTarget) -> f64 {
        match target.kind {
            ParamKind::Mean => self.means[target.dim],
            ParamKind::Std => self.stds[target.dim],
        }
    }
}

/// Two-dimensional Gaussian parametrised by means, covariance eigenvalues and
/// the rotation angle of the eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTwoD", into = "RawTwoD")]
pub struct Gaussian2DParams {
    mu1: f64,
    mu2: f64,
    lambda1: f64,
    lambda2: f64,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct RawTwoD {
    mu1: f64,
    mu2: f64,
    lambda1: f64,
    lambda2: f64,
    alpha: f64,
}

impl TryFrom<RawTwoD> for Gaussian2DParams {
    type Error = Error;
    fn try_from(r: RawTwoD) -> Result<Self> {
        Self::new(r.mu1, r.mu2, r.lambda1, r.lambda2, r.alpha)
    }
}

impl From<Gaussian2DParams> for RawTwoD {
    fn from(p: Gaussian2DParams) -> Self {
        RawTwoD {
            mu1: p.mu1,
            mu2: p.mu2,
            lambda1: p.lambda1,
            lambda2: p.lambda2,
            alpha: p.alpha,
        }
    }
}

impl Gaussian2DParams {
    pub fn new(mu1: f64, mu2: f64, lambda1: f64, lambda2: f64, alpha: f64) -> Result<Self> {
        if !(mu1.is_finite() && mu2.is_finite()) {
            return Err(Error::InvalidParams("means must be finite".into()));
        }
        if !(lambda1.is_finite() && lambda1 > 0.0 && lambda2.is_finite() && lambda2 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "eigenvalues must be positive (got {lambda1}, {lambda2})"
            )));
        }
        if !(0.0..std::f64::consts::PI).contains(&alpha) {
            return Err(Error::InvalidParams(format!(
                "alpha = {alpha} must lie in [0, pi)"
            )));
        }
        Ok(Self {
            mu1,
            mu2,
            lambda1,
            lambda2,
            alpha,
        })
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }
    pub fn mu2(&self) -> f64 {
        self.mu2
    }
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `sqrt(lambda1)`.
    pub fn a(&self) -> f64 {
        self.lambda1.sqrt()
    }

    /// `sqrt(lambda2)`.
    pub fn b(&self) -> f64 {
        self.lambda2.sqrt()
    }

    pub fn sigma1(&self) -> f64 {
        let (s, c) = self.alpha.sin_cos();
        (self.lambda1 * c * c + self.lambda2 * s * s).sqrt()
    }

    pub fn sigma2(&self) -> f64 {
        let (s, c) = self.alpha.sin_cos();
        (self.lambda1 * s * s + self.lambda2 * c * c).sqrt()
    }

    /// The same distribution expressed with an explicit rotation matrix.
    pub fn to_general(&self) -> GaussianGeneralParams {
        let (s, c) = self.alpha.sin_cos();
        GaussianGeneralParams {
            means: vec![self.mu1, self.mu2],
            eig_sqrt: vec![self.a(), self.b()],
            rotation: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
        }
    }
}

impl SecretSource for Gaussian2DParams {
    fn dim(&self) -> usize {
        2
    }

    fn param(&self, target: SecretTarget) -> f64 {
        match (target.kind, target.dim) {
            (ParamKind::Mean, 0) => self.mu1,
            (ParamKind::Mean, _) => self.mu2,
            (ParamKind::Std, 0) => self.sigma1(),
            (ParamKind::Std, _) => self.sigma2(),
        }
    }
}

/// k-dimensional Gaussian with covariance `R diag(a^2) R^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianGeneralParams {
    means: Vec<f64>,
    eig_sqrt: Vec<f64>,
    rotation: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawGeneral {
    means: Vec<f64>,
    eig_sqrt: Vec<f64>,
    /// Row-major k x k.
    rotation: Vec<Vec<f64>>,
}

impl Serialize for GaussianGeneralParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let k = self.means.len();
        let rotation = (0..k)
            .map(|i| (0..k).map(|j| self.rotation[(i, j)]).collect())
            .collect();
        RawGeneral {
            means: self.means.clone(),
            eig_sqrt: self.eig_sqrt.clone(),
            rotation,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaussianGeneralParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawGeneral::deserialize(d)?;
        let k = raw.rotation.len();
        if raw.rotation.iter().any(|r| r.len() != k) {
            return Err(serde::de::Error::custom("rotation must be square"));
        }
        let flat: Vec<f64> = raw.rotation.into_iter().flatten().collect();
        let rot = DMatrix::from_row_slice(k, k, &flat);
        Self::new(raw.means, raw.eig_sqrt, rot).map_err(serde::de::Error::custom)
    }
}

impl GaussianGeneralParams {
    pub fn new(means: Vec<f64>, eig_sqrt: Vec<f64>, rotation: DMatrix<f64>) -> Result<Self> {
        let k = means.len();
        if k == 0 {
            return Err(Error::InvalidParams(
                "at least one dimension is required".into(),
            ));
        }
        if eig_sqrt.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: eig_sqrt.len(),
            });
        }
        if rotation.nrows() != k || rotation.ncols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: rotation.nrows(),
            });
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParams("means must be finite".into()));
        }
        if let Some(j) = eig_sqrt.iter().position(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidParams(format!(
                "eig_sqrt[{j}] must be positive"
            )));
        }
        let gram = rotation.transpose() * &rotation;
        let off = (gram - DMatrix::<f64>::identity(k, k)).abs().max();
        if off > ORTHONORMAL_TOL {
            return Err(Error::InvalidParams(format!(
                "rotation is not orthonormal (max deviation {off:e})"
            )));
        }
        Ok(Self {
            means,
            eig_sqrt,
            rotation,
        })
    }

    /// Axis-aligned parameters: identity rotation, `eig_sqrt = stds`.
    pub fn axis_aligned(diag: &GaussianDiagParams) -> Self {
        let k = diag.means().len();
        Self {
            means: diag.means().to_vec(),
            eig_sqrt: diag.stds().to_vec(),
            rotation: DMatrix::identity(k, k),
        }
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn eig_sqrt(&self) -> &[f64] {
        &self.eig_sqrt
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let k = self.means.len();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            k,
            self.eig_sqrt.iter().map(|a| a * a),
        ));
        &self.rotation * d * self.rotation.transpose()
    }

    /// Marginal standard deviation of dimension `j`.
    pub fn sigma(&self, j: usize) -> f64 {
        (0..self.means.len())
            .map(|i| {
                let r = self.rotation[(j, i)];
                r * r * self.eig_sqrt[i] * self.eig_sqrt[i]
            })
            .sum::<f64>()
            .sqrt()
    }
}

impl SecretSource for GaussianGeneralParams {
    fn dim(&self) -> usize {
        self.means.len()
    }

    fn param(&self, target: SecretTarget) -> f64 {
        match target.kind {
            ParamKind::Mean => self.means[target.dim],
            ParamKind::Std => self.sigma(target.dim),
        }
    }
}

/// Which statistics are secret and the tolerance range of each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSecretSpec", into = "RawSecretSpec")]
pub struct SecretSpec {
    targets: Vec<SecretTarget>,
    tolerances: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSecretSpec {
    targets: Vec<SecretTarget>,
    tolerances: Vec<f64>,
}

impl TryFrom<RawSecretSpec> for SecretSpec {
    type Error = Error;
    fn try_from(r: RawSecretSpec) -> Result<Self> {
        Self::new(r.targets, r.tolerances)
    }
}

impl From<SecretSpec> for RawSecretSpec {
    fn from(s: SecretSpec) -> Self {
        RawSecretSpec {
            targets: s.targets,
            tolerances: s.tolerances,
        }
    }
}

impl SecretSpec {
    pub fn new(targets: Vec<SecretTarget>, tolerances: Vec<f64>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidSecretSpec(
                "at least one secret is required".into(),
            ));
        }
        if targets.len() != tolerances.len() {
            return Err(Error::InvalidSecretSpec(format!(
                "{} targets but {} tolerances",
                targets.len(),
                tolerances.len()
            )));
        }
        let mut seen = std::collections::HashSet::with_capacity(targets.len());
        if let Some(t) = targets.iter().find(|t| !seen.insert(**t)) {
            return Err(Error::InvalidSecretSpec(format!("duplicate target {t}")));
        }
        if let Some(i) = tolerances.iter().position(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::InvalidSecretSpec(format!(
                "tolerance {i} = {} must be positive",
                tolerances[i]
            )));
        }
        Ok(Self {
            targets,
            tolerances,
        })
    }

    /// Secrets are the means of the given dimensions.
    pub fn means(dims: &[usize], tolerances: Vec<f64>) -> Result<Self> {
        Self::new(
            dims.iter().copied().map(SecretTarget::mean).collect(),
            tolerances,
        )
    }

    pub fn targets(&self) -> &[SecretTarget] {
        &self.targets
    }

    pub fn tolerances(&self) -> &[f64] {
        &self.tolerances
    }

    /// Number of secrets `d`.
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn has_std_secret(&self) -> bool {
        self.targets.iter().any(|t| t.kind == ParamKind::Std)
    }

    /// Checks every target against a distribution of dimension `k`.
    pub fn check_dim(&self, k: usize) -> Result<()> {
        match self.targets.iter().find(|t| t.dim >= k) {
            Some(&target) => Err(Error::TargetOutOfRange { target, dim: k }),
            None => Ok(()),
        }
    }
}

/// Projects the distribution parameters onto the secrets, in spec order.
pub fn secret_values<P: SecretSource + ?Sized>(params: &P, spec: &SecretSpec) -> Result<Vec<f64>> {
    spec.check_dim(params.dim())?;
    Ok(spec.targets().iter().map(|&t| params.param(t)).collect())
}

/// Disjoint groups of secret indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct GroupPartition {
    groups: Vec<Vec<usize>>,
}

impl TryFrom<Vec<Vec<usize>>> for GroupPartition {
    type Error = Error;
    fn try_from(g: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(g)
    }
}

impl From<GroupPartition> for Vec<Vec<usize>> {
    fn from(p: GroupPartition) -> Self {
        p.groups
    }
}

impl GroupPartition {
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidPartition(
                "at least one group is required".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for g in &groups {
            if g.is_empty() {
                return Err(Error::InvalidPartition("groups must be non-empty".into()));
            }
            for &i in g {
                if !seen.insert(i) {
                    return Err(Error::InvalidPartition(format!("index {i} appears twice")));
                }
            }
        }
        Ok(Self { groups })
    }

    /// Every secret in its own group (`beta = d`).
    pub fn singletons(d: usize) -> Self {
        Self {
            groups: (0..d).map(|i| vec![i]).collect(),
        }
    }

    /// All secrets in one group (`beta = 1`).
    pub fn single(d: usize) -> Self {
        Self {
            groups: vec![(0..d).collect()],
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Number of groups.
    pub fn beta(&self) -> usize {
        self.groups.len()
    }

    pub fn check_within(&self, d: usize) -> Result<()> {
        match self.groups.iter().flatten().find(|&&i| i >= d) {
            Some(i) => Err(Error::InvalidPartition(format!(
                "index {i} out of range for d={d}"
            ))),
            None => Ok(()),
        }
    }

    /// Errors unless the groups cover exactly `0..d`.
    pub fn check_covers(&self, d: usize) -> Result<()> {
        self.check_within(d)?;
        let n: usize = self.groups.iter().map(Vec::len).sum();
        if n != d {
            return Err(Error::InvalidPartition(format!(
                "groups cover {n} of {d} secrets"
            )));
        }
        Ok(())
    }

    /// Applies a permutation `new_index = perm[old_index]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            groups: self
                .groups
                .iter()
                .map(|g| g.iter().map(|&i| perm[i]).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormOrder {
    Finite(f64),
    Infinity,
}

impl NormOrder {
    /// `1/p`, with `1/inf = 0`.
    pub fn inverse(&self) -> f64 {
        match *self {
            NormOrder::Finite(p) => 1.0 / p,
            NormOrder::Infinity => 0.0,
        }
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        match *self {
            NormOrder::Finite(p) => v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
            NormOrder::Infinity => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

impl fmt::Display for NormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormOrder::Finite(p) => write!(f, "{p}"),
            NormOrder::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for NormOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(NormOrder::Infinity);
        }
        match s.parse::<f64>() {
            Ok(p) if p.is_infinite() && p > 0.0 => Ok(NormOrder::Infinity),
            Ok(p) if p.is_finite() && p > 0.0 => Ok(NormOrder::Finite(p)),
            _ => Err(Error::InvalidParams(format!("invalid norm order {s:?}"))),
        }
    }
}

/// Norm order and tolerance for lp-norm privacy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpSpec {
    pub p: NormOrder,
    pub eps_p: f64,
}

impl LpSpec {
    pub fn new(p: NormOrder, eps_p: f64) -> Result<Self> {
        if let NormOrder::Finite(p) = p {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "norm order {p} must be positive"
                )));
            }
        }
        if !(eps_p.is_finite() && eps_p > 0.0) {
            return Err(Error::InvalidParams(format!(
                "eps_p = {eps_p} must be positive"
            )));
        }
        Ok(Self { p, eps_p })
    }

    /// Tolerance matched to per-secret tolerances: `eps_p = ||eps||_p`.
    pub fn matched(p: NormOrder, eps: &[f64]) -> Result<Self> {
        Self::new(p, p.norm(eps))
    }
}

/// Independent uniform prior over each secret.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    intervals: Vec<(f64, f64)>,
}

impl PriorSpec {
    pub fn new(intervals: Vec<(f64, f64)>, spec: &SecretSpec) -> Result<Self> {
        if intervals.len() != spec.len() {
            return Err(Error::InvalidPrior(format!(
                "{} intervals for {} secrets",
                intervals.len(),
                spec.len()
            )));
        }
        for (i, (&(lo, hi), t)) in intervals.iter().zip(spec.targets()).enumerate() {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::InvalidPrior(format!("interval {i} is unbounded")));
            }
            if hi <= lo {
                return Err(Error::InvalidPrior(format!(
                    "interval {i} = [{lo}, {hi}] is empty"
                )));
            }
            if t.kind == ParamKind::Std && lo <= 0.0 {
                return Err(Error::InvalidPrior(format!(
                    "interval {i} for {t} must have a positive lower end"
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub has_header: bool,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: true,
            delimiter: b',',
        }
    }
}

/// `m x t` sample matrix, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Array2<f64>,
    labels: Vec<String>,
}

impl Dataset {
    pub fn new(samples: Array2<f64>, labels: Vec<String>) -> Result<Self> {
        let (m, t) = samples.dim();
        if m < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 samples, got {m}"
            )));
        }
        if t < 1 {
            return Err(Error::InvalidDataset("need at least one column".into()));
        }
        if labels.len() != t {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {t} columns",
                labels.len()
            )));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDataset("entries must be finite".into()));
        }
        Ok(Self { samples, labels })
    }

    /// Dataset with default labels `x0, x1, ...`.
    pub fn from_array(samples: Array2<f64>) -> Result<Self> {
        let labels = (0..samples.ncols()).map(|j| format!("x{j}")).collect();
        Self::new(samples, labels)
    }

    /// Builds a dataset from columns of equal length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let t = columns.len();
        let m = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != m) {
            return Err(Error::InvalidDataset(
                "columns have different lengths".into(),
            ));
        }
        let samples = Array2::from_shape_fn((m, t), |(i, j)| columns[j][i]);
        Self::from_array(samples)
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.samples
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_columns(&self) -> usize {
        self.samples.ncols()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.samples.column(j)
    }

    pub fn into_parts(self) -> (Array2<f64>, Vec<String>) {
        (self.samples, self.labels)
    }

    /// Rows at the given indices, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Self::new(self.samples.select(Axis(0), rows), self.labels.clone())
    }

    pub fn from_csv_reader<R: Read>(reader: R, opts: CsvOptions) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(opts.has_header)
            .delimiter(opts.delimiter)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let header: Option<Vec<String>> = if opts.has_header {
            Some(rdr.headers()?.iter().map(str::to_string).collect())
        } else {
            None
        };
        let mut data = Vec::new();
        let mut width = None;
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let w = *width.get_or_insert(rec.len());
            if rec.len() != w {
                return Err(Error::InvalidDataset(format!(
                    "row {row} has {} fields, expected {w}",
                    rec.len()
                )));
            }
            for field in rec.iter() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::InvalidDataset(format!("row {row}: cannot parse {field:?} as a number"))
                })?;
                data.push(v);
            }
        }
        let t = width.unwrap_or(0);
        let m = data.len().checked_div(t).unwrap_or(0);
        let samples = Array2::from_shape_vec((m, t), data)
            .map_err(|e| Error::InvalidDataset(e.to_string()))?;
        match header {
            Some(h) if h.len() == t => Self::new(samples, h),
            Some(h) => Err(Error::InvalidDataset(format!(
                "{} header fields for {t} columns",
                h.len()
            ))),
            None => Self::from_array(samples),
        }
    }

    pub fn from_csv_path(path: impl AsRef<Path>, opts: CsvOptions) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Csv(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(std::io::BufReader::new(file), opts)
    }

    /// Writes a header row followed by the samples; values round-trip exactly.
    pub fn write_csv<W: Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(writer);
        w.write_record(&self.labels)?;
        for row in self.samples.rows() {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Per-column empirical mean and population (1/m) standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// `true` where the column has zero variance.
    pub degenerate: Vec<bool>,
}

impl ParamEstimate {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }

    pub fn into_params(self) -> Result<GaussianDiagParams> {
        if let Some(column) = self.degenerate.iter().position(|&d| d) {
            return Err(Error::DegenerateColumn { column });
        }
        GaussianDiagParams::new(self.means, self.stds)
    }
}

impl SecretSource for ParamEstimate {
    fn dim(&self) -> usize {
        self.means.len()
    }

    fn param(&self, target: SecretTarget) -> f64 {
        match target.kind {
            ParamKind::Mean => self.means[target.dim],
            ParamKind::Std => self.stds[target.dim],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    DiagGaussian,
}

pub(crate) fn column_mean_std(col: ArrayView1<'_, f64>) -> (f64, f64) {
    let m = col.len() as f64;
    let mean = col.sum() / m;
    let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / m;
    (mean, var.sqrt())
}

pub fn estimate_params(data: &Dataset, family: Family) -> ParamEstimate {
    match family {
        Family::DiagGaussian => {
            let t = data.n_columns();
            let mut means = Vec::with_capacity(t);
            let mut stds = Vec::with_capacity(t);
            for col in data.samples().columns() {
                let (mu, sd) = column_mean_std(col);
                means.push(mu);
                stds.push(sd);
            }
            let degenerate = stds.iter().map(|&s| s == 0.0).collect();
            ParamEstimate {
                means,
                stds,
                degenerate,
            }
        }
    }
}

/// Quantization bin: `[anchor + n*length, anchor + (n+1)*length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub anchor: f64,
    pub length: f64,
}

impl Quantizer {
    pub fn new(anchor: f64, length: f64) -> Result<Self> {
        if !anchor.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "anchor {anchor} is not finite"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "interval length {length} must be positive"
            )));
        }
        Ok(Self { anchor, length })
    }

    pub fn bin_index(&self, value: f64) -> f64 {
        ((value - self.anchor) / self.length).floor()
    }

    pub fn bin_left(&self, value: f64) -> f64 {
        self.anchor + self.bin_index(value) * self.length
    }

    pub fn midpoint(&self, value: f64) -> f64 {
        self.anchor + (self.bin_index(value) + 0.5) * self.length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantizationMode {
    /// Uniform draw inside the secret's bin.
    RandomOffset,
    /// Deterministic bin midpoint.
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaselineConfig {
    ApGaussian { noise_sd: f64 },
    DistpLaplace { noise_scale: f64 },
    DpHistogram { bin_width: f64, noise_scale: f64 },
}

/// Quantization parameters: one quantizer per secret (in spec order), plus
/// per-dimension quantizers for `sqrt(eigenvalue)` used by the midpoint
/// mechanisms when a standard deviation is secret.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub mode: QuantizationMode,
    pub secrets: Vec<Quantizer>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eig_sqrt: Vec<Quantizer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineConfig>,
}

impl MechanismConfig {
    pub fn random_offset(lengths: &[f64], anchors: &[f64]) -> Result<Self> {
        Ok(Self {
            mode: QuantizationMode::RandomOffset,
            secrets: zip_quantizers(lengths, anchors)?,
            eig_sqrt: Vec::new(),
            baseline: None,
        })
    }

    pub fn midpoint(
        lengths: &[f64],
        anchors: &[f64],
        eig_lengths: &[f64],
        eig_anchors: &[f64],
    ) -> Result<Self> {
        Ok(Self {
            mode: QuantizationMode::Midpoint,
            secrets: zip_quantizers(lengths, anchors)?,
            eig_sqrt: zip_quantizers(eig_lengths, eig_anchors)?,
            baseline: None,
        })
    }

    pub fn baseline(baseline: BaselineConfig) -> Self {
        Self {
            mode: QuantizationMode::RandomOffset,
            secrets: Vec::new(),
            eig_sqrt: Vec::new(),
            baseline: Some(baseline),
        }
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.secrets.iter().map(|q| q.length).collect()
    }

    /// Re-checks quantizers after deserialization and their count against `d`.
    pub fn validate_for(&self, d: usize) -> Result<()> {
        for q in self.secrets.iter().chain(&self.eig_sqrt) {
            Quantizer::new(q.anchor, q.length)?;
        }
        if self.secrets.len() != d {
            return Err(Error::InvalidConfig(format!(
                "{} quantizers for {d} secrets",
                self.secrets.len()
            )));
        }
        Ok(())
    }
}

fn zip_quantizers(lengths: &[f64], anchors: &[f64]) -> Result<Vec<Quantizer>> {
    if lengths.len() != anchors.len() {
        return Err(Error::InvalidConfig(format!(
            "{} lengths but {} anchors",
            lengths.len(),
            anchors.len()
        )));
    }
    lengths
        .iter()
        .zip(anchors)
        .map(|(&s, &a)| Quantizer::new(a, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn secret_values_projects_in_spec_order() {
        let p = GaussianDiagParams::new(vec![15.0, 68.0, 54.0], vec![1.0; 3]).unwrap();
        let spec = SecretSpec::means(&[0, 1, 2], vec![1.0, 4.0, 3.0]).unwrap();
        assert_eq!(secret_values(&p, &spec).unwrap(), vec![15.0, 68.0, 54.0]);

        let p = GaussianDiagParams::new(vec![0.0], vec![2.0]).unwrap();
        let spec = SecretSpec::new(vec![SecretTarget::std(0)], vec![0.1]).unwrap();
        assert_eq!(secret_values(&p, &spec).unwrap(), vec![2.0]);
    }

    #[test]
    fn isotropic_2d_std_is_independent_of_angle() {
        let p = Gaussian2DParams::new(0.0, 0.0, 1.0, 1.0, 0.7).unwrap();
        let spec = SecretSpec::new(vec![SecretTarget::std(0)], vec![0.1]).unwrap();
        assert!((secret_values(&p, &spec).unwrap()[0] - 1.0).abs() < 1e-15);
        for k in 0..50 {
            let alpha = k as f64 * 0.0628;
            let p = Gaussian2DParams::new(1.0, 2.0, 2.5, 2.5, alpha).unwrap();
            assert!((p.sigma1() - 2.5f64.sqrt()).abs() < 1e-14);
            assert!((p.sigma2() - 2.5f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn out_of_range_target_names_the_target() {
        let p = GaussianDiagParams::new(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let spec = SecretSpec::new(
            vec![SecretTarget::mean(0), SecretTarget::std(5)],
            vec![1.0, 1.0],
        )
        .unwrap();
        let err = secret_values(&p, &spec).unwrap_err();
        assert_eq!(
            err,
            Error::TargetOutOfRange {
                target: SecretTarget::std(5),
                dim: 2
            }
        );
        assert!(err.to_string().contains("std[5]"));
    }

    #[test]
    fn secret_spec_rejects_duplicates_and_bad_tolerances() {
        assert!(SecretSpec::means(&[0, 0], vec![1.0, 1.0]).is_err());
        assert!(SecretSpec::means(&[0], vec![0.0]).is_err());
        assert!(SecretSpec::means(&[], vec![]).is_err());
        assert!(SecretSpec::means(&[0, 1], vec![1.0]).is_err());
    }

    #[test]
    fn estimate_uses_population_std() {
        let d = Dataset::from_columns(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let e = estimate_params(&d, Family::DiagGaussian);
        assert!((e.means[0] - 2.0).abs() < 1e-15);
        assert!((e.stds[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((e.stds[0] - 0.81650).abs() < 1e-5);
        assert!(!e.is_degenerate());
    }

    #[test]
    fn estimate_flags_constant_columns() {
        let d = Dataset::from_columns(&[vec![5.0, 5.0, 5.0]]).unwrap();
        let e = estimate_params(&d, Family::DiagGaussian);
        assert_eq!(e.means, vec![5.0]);
        assert_eq!(e.stds, vec![0.0]);
        assert_eq!(e.degenerate, vec![true]);
        assert_eq!(
            e.into_params().unwrap_err(),
            Error::DegenerateColumn { column: 0 }
        );

        let d = Dataset::new(
            array![[0.0, 10.0], [2.0, 10.0]],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let e = estimate_params(&d, Family::DiagGaussian);
        assert_eq!(e.means, vec![1.0, 10.0]);
        assert_eq!(e.stds, vec![1.0, 0.0]);
        assert_eq!(e.degenerate, vec![false, true]);
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(GaussianDiagParams::new(vec![0.0], vec![0.0]).is_err());
        assert!(GaussianDiagParams::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Gaussian2DParams::new(0.0, 0.0, 1.0, 1.0, std::f64::consts::PI).is_err());
        assert!(Gaussian2DParams::new(0.0, 0.0, 0.0, 1.0, 0.1).is_err());
        let skew = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(GaussianGeneralParams::new(vec![0.0; 2], vec![1.0; 2], skew).is_err());
        assert!(GroupPartition::new(vec![vec![0, 1], vec![1]]).is_err());
        assert!(GroupPartition::new(vec![vec![]]).is_err());
        let spec = SecretSpec::new(vec![SecretTarget::std(0)], vec![0.1]).unwrap();
        assert!(PriorSpec::new(vec![(0.0, 1.0)], &spec).is_err());
        assert!(PriorSpec::new(vec![(0.5, 0.5)], &spec).is_err());
        assert!(Dataset::from_columns(&[vec![1.0]]).is_err());
        assert!(Dataset::from_columns(&[vec![1.0, f64::NAN]]).is_err());
    }

    #[test]
    fn general_params_match_2d_marginals() {
        let p = Gaussian2DParams::new(1.0, -2.0, 3.0, 0.5, 0.4).unwrap();
        let g = p.to_general();
        assert!((g.sigma(0) - p.sigma1()).abs() < 1e-14);
        assert!((g.sigma(1) - p.sigma2()).abs() < 1e-14);
        let cov = g.covariance();
        assert!((cov[(0, 0)].sqrt() - p.sigma1()).abs() < 1e-14);
    }

    #[test]
    fn csv_round_trip_with_and_without_header() {
        let d = Dataset::new(
            array![[0.1, 2.0], [1e-17, -3.5]],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf, b',').unwrap();
        let back = Dataset::from_csv_reader(buf.as_slice(), CsvOptions::default()).unwrap();
        assert_eq!(back, d);

        let text = "1;2\n3;4\n";
        let d = Dataset::from_csv_reader(
            text.as_bytes(),
            CsvOptions {
                has_header: false,
                delimiter: b';',
            },
        )
        .unwrap();
        assert_eq!(d.samples(), &array![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(d.labels(), &["x0".to_string(), "x1".to_string()]);

        let bad = "a,b\n1,x\n2,3\n";
        assert!(Dataset::from_csv_reader(bad.as_bytes(), CsvOptions::default()).is_err());
    }

    #[test]
    fn norm_order_parses() {
        assert_eq!("inf".parse::<NormOrder>().unwrap(), NormOrder::Infinity);
        assert_eq!("2".parse::<NormOrder>().unwrap(), NormOrder::Finite(2.0));
        assert!("-1".parse::<NormOrder>().is_err());
        let lp = LpSpec::matched(NormOrder::Finite(1.0), &[1.0, 4.0, 3.0]).unwrap();
        assert_eq!(lp.eps_p, 8.0);
        let lp = LpSpec::matched(NormOrder::Infinity, &[1.0, 4.0, 3.0]).unwrap();
        assert_eq!(lp.eps_p, 4.0);
    }
}
