//! Lower bounds on the distortion needed to reach a privacy budget, the
//! surrogate bound lines used when plotting datasets, and the adaptive
//! composition bound.
//!
//! Every lower bound is strict (`distortion > bound`). Bounds take a budget
//! `T` in `(0, 1)`, per-secret tolerances `eps`, and the conversion constant
//! `gamma` relating halved distributional distance to secret separation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GroupPartition, LpSpec, NormOrder};

/// Relative window within which a value is treated as an integer before
/// taking its ceiling. Closed-form budgets such as `T = 19/27` land on exact
/// integers whose floating-point images may sit one ulp above.
pub const CEIL_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaProvenance {
    GaussianClosedForm,
    UserSupplied,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaValue {
    pub value: f64,
    pub provenance: GammaProvenance,
}

impl GammaValue {
    /// `sqrt(d) / 2`, valid for Gaussian families under every metric.
    pub fn gaussian(d: usize) -> Self {
        Self {
            value: (d as f64).sqrt() / 2.0,
            provenance: GammaProvenance::GaussianClosedForm,
        }
    }

    pub fn user(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "gamma = {value} must be non-negative"
            )));
        }
        Ok(Self {
            value,
            provenance: GammaProvenance::UserSupplied,
        })
    }
}

/// Ceiling that first snaps values within `CEIL_SNAP` (relative) of an
/// integer onto that integer.
pub fn tolerant_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= CEIL_SNAP * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

fn check_budget(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::BudgetOutOfRange(t));
    }
    Ok(())
}

fn check_eps(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::InvalidParams(
            "at least one tolerance is required".into(),
        ));
    }
    if let Some(e) = eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::InvalidParams(format!(
            "tolerance {e} must be positive"
        )));
    }
    Ok(())
}

fn geometric_mean(eps: &[f64]) -> f64 {
    (eps.iter().map(|e| e.ln()).sum::<f64>() / eps.len() as f64).exp()
}

fn arithmetic_mean(eps: &[f64]) -> f64 {
    eps.iter().sum::<f64>() / eps.len() as f64
}

/// `2 gamma ceil(1 / (1 - (1-T)^{1/d}) - 1) (prod eps)^{1/d}`.
pub fn lower_bound_union(t: f64, eps: &[f64], gamma: GammaValue) -> Result<f64> {
    check_budget(t)?;
    check_eps(eps)?;
    let d = eps.len() as f64;
    let keep = (1.0 - t).powf(1.0 / d);
    let n = tolerant_ceil(1.0 / (1.0 - keep) - 1.0);
    Ok(2.0 * gamma.value * n * geometric_mean(eps))
}

/// Tighter intermediate form
/// `2 gamma ceil((1-T)^{1/d} ceil(1 / (1 - (1-T)^{1/d}))) (prod eps)^{1/d}`.
pub fn lower_bound_union_proof_form(t: f64, eps: &[f64], gamma: GammaValue) -> Result<f64> {
    check_budget(t)?;
    check_eps(eps)?;
    let d = eps.len() as f64;
    let keep = (1.0 - t).powf(1.0 / d);
    let n = tolerant_ceil(keep * tolerant_ceil(1.0 / (1.0 - keep)));
    Ok(2.0 * gamma.value * n * geometric_mean(eps))
}

/// `2 gamma (ceil(1/T)^{1/d} (prod eps)^{1/d} - mean(eps))`.
pub fn lower_bound_inter(t: f64, eps: &[f64], gamma: GammaValue) -> Result<f64> {
    check_budget(t)?;
    check_eps(eps)?;
    let d = eps.len() as f64;
    let n = tolerant_ceil(1.0 / t);
    Ok(2.0 * gamma.value * (n.powf(1.0 / d) * geometric_mean(eps) - arithmetic_mean(eps)))
}

/// `2 gamma (ceil((1 - (1-T)^{1/beta})^{-beta})^{1/d} (prod eps)^{1/d} - mean(eps))`
/// for `beta` groups. Equals the intersection bound when `beta = 1`.
pub fn lower_bound_group(
    t: f64,
    eps: &[f64],
    partition: &GroupPartition,
    gamma: GammaValue,
) -> Result<f64> {
    check_budget(t)?;
    check_eps(eps)?;
    partition.check_covers(eps.len())?;
    let d = eps.len() as f64;
    let beta = partition.beta() as f64;
    let per_group = 1.0 - (1.0 - t).powf(1.0 / beta);
    let n = tolerant_ceil(per_group.powf(-beta));
    Ok(2.0 * gamma.value * (n.powf(1.0 / d) * geometric_mean(eps) - arithmetic_mean(eps)))
}

/// `2 gamma (ceil(1/T)^{1/d} - 1) eps_p / d^{1/p}`.
pub fn lower_bound_lp(t: f64, lp: &LpSpec, d: usize, gamma: GammaValue) -> Result<f64> {
    check_budget(t)?;
    if d == 0 {
        return Err(Error::InvalidParams("d must be at least 1".into()));
    }
    let df = d as f64;
    let n = tolerant_ceil(1.0 / t);
    Ok(2.0 * gamma.value * (n.powf(1.0 / df) - 1.0) * lp.eps_p / df.powf(lp.p.inverse()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundMetric {
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

/// Coefficient `c` of the surrogate bound line `distortion >= -c * privacy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateLine {
    pub coefficient: f64,
    /// `false` for the three-secret cases derived explicitly; `true` for
    /// the same argument carried over to other `d` or norm orders.
    pub generalized: bool,
}

/// Union `sqrt(sum eps^2)`, intersection `min eps`, group
/// `sqrt(sum_b min_{i in b} eps_i^2)`, lp `eps_p d^{min(0, 1/2 - 1/p)}`.
pub fn surrogate_bound_line(metric: &BoundMetric, eps: &[f64]) -> Result<SurrogateLine> {
    check_eps(eps)?;
    let d = eps.len();
    let coefficient = match metric {
        BoundMetric::Union => eps.iter().map(|e| e * e).sum::<f64>().sqrt(),
        BoundMetric::Intersection => eps.iter().copied().fold(f64::INFINITY, f64::min),
        BoundMetric::Group { partition } => {
            partition.check_within(d)?;
            partition
                .groups()
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|&i| eps[i] * eps[i])
                        .fold(f64::INFINITY, f64::min)
                })
                .sum::<f64>()
                .sqrt()
        }
        BoundMetric::Lp { spec } => {
            let expo = (0.5 - spec.p.inverse()).min(0.0);
            spec.eps_p * (d as f64).powf(expo)
        }
    };
    let explicit = d == 3
        && match metric {
            BoundMetric::Lp { spec } => {
                matches!(spec.p, NormOrder::Infinity) || spec.p == NormOrder::Finite(1.0)
            }
            _ => true,
        };
    Ok(SurrogateLine {
        coefficient,
        generalized: !explicit,
    })
}

/// Privacy of `m` adaptively composed mechanisms: `min(1, a prod(Pi_i / b))`
/// where `a` and `b` are the largest and smallest prior probabilities.
pub fn composition_bound(privacies: &[f64], a: f64, b: f64) -> Result<f64> {
    if a.is_nan() || a >= 1.0 {
        return Err(Error::InvalidParams(format!(
            "prior sup a = {a} must be below 1"
        )));
    }
    if b.is_nan() || b <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "prior inf b = {b} must be positive"
        )));
    }
    if b > a {
        return Err(Error::InvalidParams(format!(
            "prior inf b = {b} exceeds sup a = {a}"
        )));
    }
    if privacies.is_empty() {
        return Err(Error::InvalidParams(
            "at least one mechanism is required".into(),
        ));
    }
    if let Some(p) = privacies.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(Error::InvalidParams(format!(
            "privacy {p} must lie in (0, 1]"
        )));
    }
    let rest: f64 = privacies[1..].iter().map(|p| p / b).product();
    Ok(((a / b) * privacies[0] * rest).min(1.0))
}

/// Ratio constant `2 c_eps c2 / (c1 (1 - 2 c2))` bounding the random-offset
/// mechanism's distortion over the optimum, with `x_i = eps_i / s_i`,
/// `c1 = min x`, `c2 = max x` and `c_eps = rms(eps) / geomean(eps)`.
pub fn alg1_optimality_constant(eps: &[f64], lengths: &[f64]) -> Result<f64> {
    check_eps(eps)?;
    if lengths.len() != eps.len() {
        return Err(Error::DimensionMismatch {
            expected: eps.len(),
            got: lengths.len(),
        });
    }
    let x: Vec<f64> = eps.iter().zip(lengths).map(|(e, s)| e / s).collect();
    let c1 = x.iter().copied().fold(f64::INFINITY, f64::min);
    let c2 = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if c2.is_nan() || 2.0 * c2 >= 1.0 {
        return Err(Error::InvalidParams(
            "the constant needs 2 eps_i < s_i for every secret".into(),
        ));
    }
    let rms = (eps.iter().map(|e| e * e).sum::<f64>() / eps.len() as f64).sqrt();
    let c_eps = rms / geometric_mean(eps);
    Ok(2.0 * c_eps * c2 / (c1 * (1.0 - 2.0 * c2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::mechanism_distortion;
    use crate::mechanisms::MechanismId;
    use crate::model::{MechanismConfig, SecretSpec};
    use crate::privacy::{analytic_privacy_alg1, Metric};
    use proptest::prelude::*;

    const T_MAIN: f64 = 19.0 / 27.0;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn union_examples() {
        let g3 = GammaValue::gaussian(3);
        let b = lower_bound_union(T_MAIN, &[1.0, 4.0, 3.0], g3).unwrap();
        let oracle = 2.0 * (3f64.sqrt() / 2.0) * 2.0 * 12f64.cbrt();
        assert!(rel_close(b, oracle, 1e-12));
        assert!((b - 7.9309).abs() < 1e-4);
        let b = lower_bound_union(T_MAIN, &[1.0; 3], g3).unwrap();
        assert!(rel_close(b, 2.0 * 3f64.sqrt(), 1e-12));
        assert_eq!(
            lower_bound_union(0.5, &[1.0], GammaValue::gaussian(1)).unwrap(),
            1.0
        );
        assert!(matches!(
            lower_bound_union(1.0, &[1.0], g3),
            Err(Error::BudgetOutOfRange(_))
        ));
        assert!(lower_bound_union(0.0, &[1.0], g3).is_err());
    }

    #[test]
    fn alg1_is_three_times_the_union_bound_at_one_sixth() {
        let spec = SecretSpec::means(&[0, 1, 2], vec![1.0; 3]).unwrap();
        let cfg = MechanismConfig::random_offset(&[6.0; 3], &[0.0; 3]).unwrap();
        let dist = mechanism_distortion(MechanismId::Alg1, &cfg, &spec).unwrap();
        assert!(rel_close(dist, 6.0 * 3f64.sqrt(), 1e-15));
        let t = analytic_privacy_alg1(&spec, &cfg, &Metric::Union)
            .unwrap()
            .value;
        let bound = lower_bound_union(t, &[1.0; 3], GammaValue::gaussian(3)).unwrap();
        assert!(rel_close(dist / bound, 3.0, 1e-9), "{}", dist / bound);
        let c = alg1_optimality_constant(&[1.0; 3], &[6.0; 3]).unwrap();
        assert!(rel_close(c, 3.0, 1e-12));
    }

    #[test]
    fn proof_form_is_never_weaker() {
        for k in 1..200 {
            let t = k as f64 / 200.0;
            for d in 1..5 {
                let eps = vec![1.0; d];
                let g = GammaValue::gaussian(d);
                let stated = lower_bound_union(t, &eps, g).unwrap();
                let proof = lower_bound_union_proof_form(t, &eps, g).unwrap();
                assert!(proof >= stated - 1e-12, "T={t} d={d}: {proof} < {stated}");
            }
        }
        let g = GammaValue::gaussian(3);
        assert_eq!(
            lower_bound_union_proof_form(T_MAIN, &[1.0; 3], g).unwrap(),
            lower_bound_union(T_MAIN, &[1.0; 3], g).unwrap()
        );
    }

    #[test]
    fn inter_examples() {
        let g2 = GammaValue::gaussian(2);
        assert!(rel_close(
            lower_bound_inter(0.25, &[1.0, 1.0], g2).unwrap(),
            2f64.sqrt(),
            1e-12
        ));
        assert_eq!(
            lower_bound_inter(0.5, &[1.0], GammaValue::gaussian(1)).unwrap(),
            1.0
        );
        let b = lower_bound_inter(0.2, &[1.0, 4.0], g2).unwrap();
        assert!(rel_close(
            b,
            2.0 * g2.value * (5f64.sqrt() * 2.0 - 2.5),
            1e-12
        ));
    }

    #[test]
    fn group_examples() {
        let g2 = GammaValue::gaussian(2);
        let b = lower_bound_group(0.75, &[1.0, 1.0], &GroupPartition::singletons(2), g2).unwrap();
        assert!(rel_close(b, 2f64.sqrt(), 1e-12));
        let g3 = GammaValue::gaussian(3);
        let b = lower_bound_group(T_MAIN, &[1.0; 3], &GroupPartition::singletons(3), g3).unwrap();
        assert!(b <= 2.0 * 3f64.sqrt() + 1e-12);
        for k in 1..100 {
            let t = k as f64 / 100.0;
            let eps = [0.7, 2.0, 3.5];
            let one = lower_bound_group(t, &eps, &GroupPartition::single(3), g3).unwrap();
            assert_eq!(one, lower_bound_inter(t, &eps, g3).unwrap());
        }
        let partial = GroupPartition::new(vec![vec![0]]).unwrap();
        assert!(lower_bound_group(0.5, &[1.0, 1.0], &partial, g2).is_err());
    }

    #[test]
    fn lp_examples() {
        let g2 = GammaValue::gaussian(2);
        let lp = LpSpec::new(NormOrder::Finite(2.0), 2f64.sqrt()).unwrap();
        assert!(rel_close(
            lower_bound_lp(0.25, &lp, 2, g2).unwrap(),
            2f64.sqrt(),
            1e-12
        ));
        let inf = LpSpec::new(NormOrder::Infinity, 3.0).unwrap();
        let b = lower_bound_lp(0.25, &inf, 2, g2).unwrap();
        assert!(rel_close(b, 2.0 * g2.value * 3.0, 1e-12));
        assert_eq!(lower_bound_lp(1.0 - 1e-12, &lp, 2, g2).unwrap(), 0.0);
        assert!(lower_bound_lp(0.999, &lp, 2, g2).unwrap() > 0.0);
    }

    #[test]
    fn linf_can_exceed_union_for_unequal_tolerances() {
        // With eps = (0.5, 5) the lp bound at p = inf uses max eps while the
        // union bound uses the geometric mean, so the ordering flips.
        let eps = [0.5, 5.0];
        let g = GammaValue::gaussian(2);
        let lp = LpSpec::matched(NormOrder::Infinity, &eps).unwrap();
        let linf = lower_bound_lp(0.9, &lp, 2, g).unwrap();
        let union = lower_bound_union(0.9, &eps, g).unwrap();
        assert!(linf > union, "{linf} vs {union}");
    }

    #[test]
    fn surrogate_lines() {
        let eps = [1.0, 4.0, 3.0];
        let u = surrogate_bound_line(&BoundMetric::Union, &eps).unwrap();
        assert!(rel_close(u.coefficient, 26f64.sqrt(), 1e-15));
        assert!(!u.generalized);
        assert!((u.coefficient * 0.3 - 1.52971).abs() < 1e-5);
        assert_eq!(
            surrogate_bound_line(&BoundMetric::Intersection, &eps)
                .unwrap()
                .coefficient,
            1.0
        );
        let part = GroupPartition::new(vec![vec![0, 1], vec![2]]).unwrap();
        let g = surrogate_bound_line(&BoundMetric::Group { partition: part }, &eps).unwrap();
        assert!(rel_close(g.coefficient, 10f64.sqrt(), 1e-15));
        let l1 = LpSpec::new(NormOrder::Finite(1.0), 8.0).unwrap();
        let c = surrogate_bound_line(&BoundMetric::Lp { spec: l1 }, &eps).unwrap();
        assert!(rel_close(c.coefficient, 8.0 / 3f64.sqrt(), 1e-15));
        let li = LpSpec::new(NormOrder::Infinity, 4.0).unwrap();
        assert_eq!(
            surrogate_bound_line(&BoundMetric::Lp { spec: li }, &eps)
                .unwrap()
                .coefficient,
            4.0
        );
        assert!(
            surrogate_bound_line(&BoundMetric::Union, &[1.0, 1.0])
                .unwrap()
                .generalized
        );
    }

    #[test]
    fn composition_examples() {
        assert_eq!(composition_bound(&[0.5], 0.5, 0.5).unwrap(), 0.5);
        let third = 1.0 / 3.0;
        assert!((composition_bound(&[0.4, 0.4], third, third).unwrap() - 0.48).abs() < 1e-15);
        assert_eq!(composition_bound(&[0.9, 0.9], 0.5, 0.1).unwrap(), 1.0);
        assert!(composition_bound(&[0.5], 1.0, 0.5).is_err());
        assert!(composition_bound(&[0.5], 0.5, 0.0).is_err());
        assert!(composition_bound(&[0.5], 0.2, 0.5).is_err());
    }

    #[test]
    fn tolerant_ceil_snaps_near_integers() {
        assert_eq!(tolerant_ceil(2.0 + 1e-12), 2.0);
        assert_eq!(tolerant_ceil(2.0 - 1e-12), 2.0);
        assert_eq!(tolerant_ceil(2.001), 3.0);
        assert_eq!(tolerant_ceil(0.3), 1.0);
    }

    fn eps_strategy() -> impl Strategy<Value = Vec<f64>> {
        (1usize..=4).prop_flat_map(|d| proptest::collection::vec(0.5f64..5.0, d))
    }

    proptest! {
        #[test]
        fn bounds_nonincreasing_in_budget(eps in eps_strategy(), t1 in 0.01f64..0.99, t2 in 0.01f64..0.99) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let d = eps.len();
            let g = GammaValue::gaussian(d);
            let part = GroupPartition::new(vec![(0..d).step_by(2).collect(), (1..d).step_by(2).collect()].into_iter().filter(|v: &Vec<usize>| !v.is_empty()).collect()).unwrap();
            prop_assert!(lower_bound_union(hi, &eps, g).unwrap() <= lower_bound_union(lo, &eps, g).unwrap() + 1e-12);
            prop_assert!(lower_bound_inter(hi, &eps, g).unwrap() <= lower_bound_inter(lo, &eps, g).unwrap() + 1e-12);
            prop_assert!(lower_bound_group(hi, &eps, &part, g).unwrap() <= lower_bound_group(lo, &eps, &part, g).unwrap() + 1e-12);
            for p in [NormOrder::Finite(1.0), NormOrder::Finite(2.0), NormOrder::Infinity] {
                let lp = LpSpec::matched(p, &eps).unwrap();
                prop_assert!(lower_bound_lp(hi, &lp, d, g).unwrap() <= lower_bound_lp(lo, &lp, d, g).unwrap() + 1e-12);
            }
        }

        #[test]
        fn union_and_lp_nondecreasing_in_eps(eps in eps_strategy(), t in 0.05f64..0.95, bump in 0.0f64..2.0, which in 0usize..4) {
            let d = eps.len();
            let g = GammaValue::gaussian(d);
            let mut more = eps.clone();
            more[which % d] += bump;
            prop_assert!(lower_bound_union(t, &more, g).unwrap() >= lower_bound_union(t, &eps, g).unwrap() - 1e-12);
            for p in [NormOrder::Finite(1.0), NormOrder::Finite(2.0), NormOrder::Infinity] {
                let a = lower_bound_lp(t, &LpSpec::matched(p, &eps).unwrap(), d, g).unwrap();
                let b = lower_bound_lp(t, &LpSpec::matched(p, &more).unwrap(), d, g).unwrap();
                prop_assert!(b >= a - 1e-12);
            }
        }

        #[test]
        fn inter_below_lp_for_matched_tolerances(eps in eps_strategy(), t in 0.05f64..0.95) {
            let d = eps.len();
            let g = GammaValue::gaussian(d);
            let inter = lower_bound_inter(t, &eps, g).unwrap();
            for p in [NormOrder::Finite(1.0), NormOrder::Finite(2.0), NormOrder::Infinity] {
                let lp = lower_bound_lp(t, &LpSpec::matched(p, &eps).unwrap(), d, g).unwrap();
                prop_assert!(inter <= lp + 1e-12);
            }
        }

        #[test]
        fn group_singletons_below_union(eps in eps_strategy(), t in 0.05f64..0.95) {
            let d = eps.len();
            let g = GammaValue::gaussian(d);
            let group = lower_bound_group(t, &eps, &GroupPartition::singletons(d), g).unwrap();
            prop_assert!(group <= lower_bound_union(t, &eps, g).unwrap() + 1e-12);
        }

        #[test]
        fn norm_order_comparison(eps_val in 0.5f64..5.0, d in 1usize..5, t in 0.05f64..0.95, slack in 1.0f64..2.0) {
            // alpha = inf >= tau = 1 with eps_1 / eps_inf >= d^{1 - 0}.
            let g = GammaValue::gaussian(d);
            let hi = LpSpec::new(NormOrder::Infinity, eps_val).unwrap();
            let lo = LpSpec::new(NormOrder::Finite(1.0), eps_val * (d as f64) * slack).unwrap();
            prop_assert!(lower_bound_lp(t, &hi, d, g).unwrap() <= lower_bound_lp(t, &lo, d, g).unwrap() + 1e-12);
            let two = LpSpec::new(NormOrder::Finite(2.0), eps_val * (d as f64).sqrt() * slack).unwrap();
            prop_assert!(lower_bound_lp(t, &hi, d, g).unwrap() <= lower_bound_lp(t, &two, d, g).unwrap() + 1e-12);
        }

        #[test]
        fn alg1_distortion_exceeds_every_bound(
            eps in eps_strategy(),
            ratios in proptest::collection::vec(2.0f64..20.0, 4),
        ) {
            let d = eps.len();
            let lengths: Vec<f64> = eps.iter().zip(&ratios).map(|(e, r)| e * r).collect();
            let spec = SecretSpec::means(&(0..d).collect::<Vec<_>>(), eps.clone()).unwrap();
            let cfg = MechanismConfig::random_offset(&lengths, &vec![0.0; d]).unwrap();
            let dist = mechanism_distortion(MechanismId::Alg1, &cfg, &spec).unwrap();
            let g = GammaValue::gaussian(d);
            let part = GroupPartition::singletons(d);
            let privacy = |m: &Metric| analytic_privacy_alg1(&spec, &cfg, m).unwrap().value;
            let t = privacy(&Metric::Union);
            if t < 1.0 {
                prop_assert!(dist > lower_bound_union(t, &eps, g).unwrap() - 1e-12);
            }
            let t = privacy(&Metric::Intersection);
            if t < 1.0 {
                prop_assert!(dist > lower_bound_inter(t, &eps, g).unwrap() - 1e-12);
            }
            let t = privacy(&Metric::Group { partition: part.clone() });
            if t < 1.0 {
                prop_assert!(dist > lower_bound_group(t, &eps, &part, g).unwrap() - 1e-12);
            }
            for p in [NormOrder::Finite(1.0), NormOrder::Finite(2.0), NormOrder::Infinity] {
                let lp = LpSpec::matched(p, &eps).unwrap();
                if let Ok(r) = analytic_privacy_alg1(&spec, &cfg, &Metric::Lp { spec: lp }) {
                    if r.value < 1.0 {
                        prop_assert!(dist > lower_bound_lp(r.value, &lp, d, g).unwrap() - 1e-12);
                    }
                }
            }
        }
    }
}
