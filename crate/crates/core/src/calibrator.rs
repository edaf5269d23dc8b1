//! Closed-form (ε, δ) under adversarial uncertainty, and ε bounds from the
//! false-positive / false-negative rates of a distinguishing test.
//!
//! The default threat model assumes the attacker knows none of the records;
//! the relaxed model lets the attacker know a fraction `gamma` of them exactly,
//! so only the uncompromised records contribute masking variance.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{summarize, Bounds, MomentSummary, Sensitivity};

/// Leading constant of the Berry-Esseen style term in the default-model δ.
pub const BERRY_ESSEEN_CONST: f64 = 1.12;

/// Absolute slack when testing a tradeoff inequality at its boundary.
pub const FEASIBILITY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Theorem1,
    Theorem2,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    /// May be `f64::INFINITY` for empirical estimates of a perfect attack.
    pub epsilon: f64,
    pub delta: f64,
    pub provenance: Provenance,
}

impl PrivacyParams {
    /// δ ≥ 1 makes the guarantee hold for every mechanism.
    pub fn is_vacuous(&self) -> bool {
        self.delta >= 1.0
    }
}

/// Number of compromised records `⌊γ·n⌋`. The small nudge keeps products such
/// as `0.29 * 100` from rounding down a whole record.
pub fn compromised_count(n: usize, gamma: f64) -> usize {
    ((gamma * n as f64) + 1e-9).floor() as usize
}

pub fn uncompromised_count(n: usize, gamma: f64) -> usize {
    n.saturating_sub(compromised_count(n, gamma))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::usage(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    Ok(())
}

/// ε = √(Δ² ln n / (n σ̄²)) where σ̄² is the per-record average variance.
pub fn epsilon_theorem1(delta_f: Sensitivity, n: usize, sigma2_bar: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2 records, got {n}")));
    }
    check_variance(sigma2_bar)?;
    let nf = n as f64;
    Ok(delta_f.delta_f * (nf.ln() / (nf * sigma2_bar)).sqrt())
}

pub fn delta_theorem1(epsilon: f64, n: usize, sigma2_bar: f64, sum_abs3: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2 records, got {n}")));
    }
    check_variance(sigma2_bar)?;
    check_nonneg("epsilon", epsilon)?;
    check_nonneg("sum_abs3", sum_abs3)?;
    let nf = n as f64;
    let total_var = nf * sigma2_bar;
    Ok(BERRY_ESSEEN_CONST * sum_abs3 / total_var.powf(1.5) * (1.0 + epsilon.exp())
        + 4.0 / (5.0 * nf.sqrt()))
}

/// ε = √(Δ² ln((1−γ)n) / σ_Γ²), with σ_Γ² the total variance of the
/// uncompromised records.
pub fn epsilon_theorem2(
    delta_f: Sensitivity,
    n: usize,
    gamma: f64,
    sigma2_gamma: f64,
) -> Result<f64> {
    let u = uncompromised(n, gamma)?;
    check_variance(sigma2_gamma)?;
    Ok(delta_f.delta_f * ((u as f64).ln() / sigma2_gamma).sqrt())
}

/// c(ε) = 2(1 + e^ε)(2/π)^{1/4}.
pub fn c_epsilon(epsilon: f64) -> f64 {
    2.0 * (1.0 + epsilon.exp()) * (2.0 / PI).powf(0.25)
}

/// Relaxed-model δ. The sensitivity stands in for `D` and the variance in the
/// fourth-moment term is the uncompromised total variance σ_Γ².
pub fn delta_theorem2(
    epsilon: f64,
    n: usize,
    gamma: f64,
    delta_f: Sensitivity,
    sigma2_gamma: f64,
    m3: f64,
    m4: f64,
) -> Result<f64> {
    let u = uncompromised(n, gamma)?;
    check_variance(sigma2_gamma)?;
    check_nonneg("epsilon", epsilon)?;
    check_nonneg("M3", m3)?;
    check_nonneg("M4", m4)?;
    let d = delta_f.delta_f;
    let third = d * d / sigma2_gamma.powf(1.5) * m3;
    let fourth = d.powf(1.5) * 26f64.sqrt() / (sigma2_gamma * PI.sqrt()) * m4.sqrt();
    Ok(c_epsilon(epsilon) * (third + fourth).sqrt() + 4.0 / (5.0 * (u as f64).sqrt()))
}

fn uncompromised(n: usize, gamma: f64) -> Result<usize> {
    check_gamma(gamma)?;
    let u = uncompromised_count(n, gamma);
    if u < 2 {
        return Err(Error::TooFewUncompromised { uncompromised: u });
    }
    Ok(u)
}

fn check_variance(v: f64) -> Result<()> {
    if v == 0.0 {
        return Err(Error::Degenerate {
            column: "<unnamed>".into(),
        });
    }
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::domain(format!("variance must be positive, got {v}")));
    }
    Ok(())
}

fn check_nonneg(what: &str, v: f64) -> Result<()> {
    if v.is_nan() || v < 0.0 {
        return Err(Error::domain(format!("{what} must be >= 0, got {v}")));
    }
    Ok(())
}

/// Everything the closed forms need for one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreatModel {
    pub gamma: f64,
    pub n: usize,
    pub delta_f: Sensitivity,
    /// Moments of the uncompromised records (all records when `gamma == 0`).
    pub moments: MomentSummary,
}

impl ThreatModel {
    /// Default model when `gamma == 0`, relaxed model otherwise.
    pub fn calibrate(&self) -> Result<PrivacyParams> {
        check_gamma(self.gamma)?;
        let m = &self.moments;
        if self.gamma == 0.0 {
            let eps = epsilon_theorem1(self.delta_f, self.n, m.var)?;
            let delta = delta_theorem1(eps, self.n, m.var, m.sum_abs3)?;
            Ok(PrivacyParams {
                epsilon: eps,
                delta,
                provenance: Provenance::Theorem1,
            })
        } else {
            let u = uncompromised(self.n, self.gamma)?;
            let sigma2_gamma = u as f64 * m.var;
            let m3 = u as f64 * m.abs3;
            let m4 = u as f64 * m.cen4;
            let eps = epsilon_theorem2(self.delta_f, self.n, self.gamma, sigma2_gamma)?;
            let delta =
                delta_theorem2(eps, self.n, self.gamma, self.delta_f, sigma2_gamma, m3, m4)?;
            Ok(PrivacyParams {
                epsilon: eps,
                delta,
                provenance: Provenance::Theorem2,
            })
        }
    }
}

/// Closed-form calibration of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnCalibration {
    pub n: usize,
    pub compromised: usize,
    pub sensitivity: Sensitivity,
    /// Moments of the uncompromised records.
    pub moments: MomentSummary,
    pub params: PrivacyParams,
}

/// Calibrates the sum over `values`. Record 0 is the audited target; with
/// `gamma > 0` the attacker knows records `1..=⌊γn⌋`, and the remaining ones
/// (target included) supply the moments. Zero variance is reported before
/// missing bounds so constant columns always surface as degenerate.
pub fn calibrate_column(values: &[f64], bounds: Option<Bounds>, gamma: f64) -> Result<ColumnCalibration> {
    check_gamma(gamma)?;
    let n = values.len();
    let k = compromised_count(n, gamma).min(n.saturating_sub(1));
    let subset: Vec<f64> = values
        .iter()
        .take(1)
        .chain(values.iter().skip(k + 1))
        .copied()
        .collect();
    let moments = summarize(&subset)?;
    if moments.var == 0.0 {
        return Err(Error::Degenerate {
            column: "<unnamed>".into(),
        });
    }
    let bounds = bounds.ok_or_else(|| Error::usage("calibration requires declared bounds"))?;
    let sensitivity = Sensitivity::new(bounds.width())?;
    let params = ThreatModel {
        gamma,
        n,
        delta_f: sensitivity,
        moments,
    }
    .calibrate()?;
    Ok(ColumnCalibration {
        n,
        compromised: k,
        sensitivity,
        moments,
        params,
    })
}

/// Attack error rates together with the δ they are read at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionRates {
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    pub delta: f64,
}

impl ConfusionRates {
    pub fn new(fp: f64, fn_: f64, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fp) || !(0.0..=1.0).contains(&fn_) {
            return Err(Error::domain(format!(
                "rates must lie in [0, 1], got fp={fp} fn={fn_}"
            )));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::domain(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(Self { fp, fn_, delta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonStatus {
    Finite,
    /// Both bounds were negative; the attack did no better than chance at this δ.
    Clamped,
    /// A zero error rate against a positive numerator.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonEstimate {
    pub epsilon: f64,
    pub status: EpsilonStatus,
}

/// ln((1 − δ − a) / b), with `-inf` when the numerator is not positive and
/// `+inf` when only the denominator vanishes.
fn log_bound(a: f64, b: f64, delta: f64) -> f64 {
    let num = 1.0 - delta - a;
    if num <= 0.0 {
        f64::NEG_INFINITY
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        (num / b).ln()
    }
}

/// Largest ε the observed error rates force, the max of the two log-ratio
/// bounds.
pub fn epsilon_from_rates(rates: &ConfusionRates) -> EpsilonEstimate {
    if rates.fp == 0.0 && rates.fn_ == 0.0 {
        return EpsilonEstimate {
            epsilon: f64::INFINITY,
            status: EpsilonStatus::Unbounded,
        };
    }
    let a = log_bound(rates.fp, rates.fn_, rates.delta);
    let b = log_bound(rates.fn_, rates.fp, rates.delta);
    let eps = a.max(b);
    if eps == f64::INFINITY {
        EpsilonEstimate {
            epsilon: eps,
            status: EpsilonStatus::Unbounded,
        }
    } else if eps < 0.0 {
        EpsilonEstimate {
            epsilon: 0.0,
            status: EpsilonStatus::Clamped,
        }
    } else {
        EpsilonEstimate {
            epsilon: eps,
            status: EpsilonStatus::Finite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    Feasible,
    ViolatesEq2,
    ViolatesEq3,
    ViolatesBoth,
}

/// Whether the rates are achievable by a test against an (ε, δ)-DP mechanism,
/// i.e. `fp + e^ε·fn ≥ 1 − δ` ("eq2") and `fn + e^ε·fp ≥ 1 − δ` ("eq3").
/// A violated inequality means the rates witness more privacy loss than ε.
pub fn check_dp_feasible(rates: &ConfusionRates, epsilon: f64) -> Feasibility {
    let target = 1.0 - rates.delta - FEASIBILITY_TOL;
    let e = epsilon.exp();
    let eq2 = rates.fp + e * rates.fn_ >= target;
    let eq3 = rates.fn_ + e * rates.fp >= target;
    match (eq2, eq3) {
        (true, true) => Feasibility::Feasible,
        (false, true) => Feasibility::ViolatesEq2,
        (true, false) => Feasibility::ViolatesEq3,
        (false, false) => Feasibility::ViolatesBoth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sens(d: f64) -> Sensitivity {
        Sensitivity::new(d).unwrap()
    }

    // Reference values below were evaluated at 40 significant digits with mpmath.
    const EPS_UNIT_VAR: f64 = 0.030_348_542_587_702_93;
    const EPS_UNIFORM: f64 = 0.105_130_435_395_138_64;
    const DELTA1_UNIFORM: f64 = 0.038_711_315_315_494_62;
    const EPS2_GAMMA019: f64 = 0.033_332_628_401_176_67;
    const DELTA2_UNIFORM: f64 = 0.864_501_623_238_532_5;
    const C_ZERO: f64 = 3.572_975_366_952_009_3;

    #[test]
    fn theorem1_epsilon_reference_values() {
        let e = epsilon_theorem1(sens(1.0), 10_000, 1.0).unwrap();
        assert!((e - EPS_UNIT_VAR).abs() < 1e-15);
        let e = epsilon_theorem1(sens(1.0), 10_000, 1.0 / 12.0).unwrap();
        assert!((e - EPS_UNIFORM).abs() < 1e-15);
        let e2 = epsilon_theorem1(sens(2.0), 10_000, 1.0).unwrap();
        assert_eq!(e2, 2.0 * epsilon_theorem1(sens(1.0), 10_000, 1.0).unwrap());
    }

    #[test]
    fn theorem1_epsilon_errors() {
        assert!(matches!(
            epsilon_theorem1(sens(1.0), 100, 0.0),
            Err(Error::Degenerate { .. })
        ));
        assert!(matches!(
            epsilon_theorem1(sens(1.0), 1, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn theorem1_delta_reference_values() {
        let eps = epsilon_theorem1(sens(1.0), 10_000, 1.0 / 12.0).unwrap();
        let d = delta_theorem1(eps, 10_000, 1.0 / 12.0, 312.5).unwrap();
        assert!((d - DELTA1_UNIFORM).abs() < 1e-12);
        assert!((delta_theorem1(0.0, 10_000, 1.0, 0.0).unwrap() - 0.008).abs() < 1e-15);
        for eps in [0.0, 0.3, 4.0] {
            assert!((delta_theorem1(eps, 25, 2.0, 0.0).unwrap() - 0.16).abs() < 1e-15);
        }
    }

    #[test]
    fn theorem2_reference_values() {
        let e = epsilon_theorem2(sens(1.0), 10_000, 0.19, 8100.0).unwrap();
        assert!((e - EPS2_GAMMA019).abs() < 1e-15);
        let e3 = epsilon_theorem2(sens(3.0), 10_000, 0.19, 8100.0).unwrap();
        assert!((e3 / e - 3.0).abs() < 1e-15);

        let eps = epsilon_theorem1(sens(1.0), 10_000, 1.0 / 12.0).unwrap();
        let d = delta_theorem2(eps, 10_000, 0.0, sens(1.0), 10_000.0 / 12.0, 312.5, 125.0)
            .unwrap();
        assert!((d - DELTA2_UNIFORM).abs() < 1e-12);
        let d0 = delta_theorem2(eps, 10_000, 0.0, sens(1.0), 833.0, 0.0, 0.0).unwrap();
        assert!((d0 - 0.008).abs() < 1e-15);
        assert!((c_epsilon(0.0) - C_ZERO).abs() < 1e-14);
    }

    #[test]
    fn theorem2_errors() {
        assert!(matches!(
            epsilon_theorem2(sens(1.0), 10, 0.0, 0.0),
            Err(Error::Degenerate { .. })
        ));
        assert!(matches!(
            epsilon_theorem2(sens(1.0), 10, 0.9, 1.0),
            Err(Error::TooFewUncompromised { uncompromised: 1 })
        ));
        assert!(matches!(
            epsilon_theorem2(sens(1.0), 10, 1.0, 1.0),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn compromised_count_rounds_down() {
        assert_eq!(compromised_count(10_000, 0.19), 1900);
        assert_eq!(compromised_count(100, 0.29), 29);
        assert_eq!(compromised_count(7, 0.5), 3);
        assert_eq!(uncompromised_count(7, 0.5), 4);
    }

    #[test]
    fn rates_examples() {
        let r = ConfusionRates::new(0.05, 0.05, 0.01).unwrap();
        let e = epsilon_from_rates(&r);
        assert_eq!(e.status, EpsilonStatus::Finite);
        assert!((e.epsilon - (0.94f64 / 0.05).ln()).abs() < 1e-15);
        assert!((e.epsilon - 2.933_856_869_835_903_5).abs() < 1e-12);

        let r = ConfusionRates::new(0.25, 0.25, 0.5).unwrap();
        let e = epsilon_from_rates(&r);
        assert_eq!((e.epsilon, e.status), (0.0, EpsilonStatus::Finite));

        let r = ConfusionRates::new(0.5, 0.5, 0.2).unwrap();
        let e = epsilon_from_rates(&r);
        assert_eq!((e.epsilon, e.status), (0.0, EpsilonStatus::Clamped));
    }

    #[test]
    fn rates_zero_cases() {
        let r = ConfusionRates::new(0.0, 0.0, 0.1).unwrap();
        assert_eq!(epsilon_from_rates(&r).status, EpsilonStatus::Unbounded);
        let r = ConfusionRates::new(0.2, 0.0, 0.1).unwrap();
        let e = epsilon_from_rates(&r);
        assert_eq!(e.status, EpsilonStatus::Unbounded);
        assert!(e.epsilon.is_infinite());
        // numerator not positive: no information from that side
        let r = ConfusionRates::new(0.95, 0.0, 0.1).unwrap();
        assert_eq!(epsilon_from_rates(&r).status, EpsilonStatus::Clamped);
    }

    #[test]
    fn rates_validation() {
        assert!(ConfusionRates::new(1.1, 0.0, 0.0).is_err());
        assert!(ConfusionRates::new(0.1, 0.1, 1.0).is_err());
        assert!(ConfusionRates::new(0.1, -0.1, 0.0).is_err());
    }

    #[test]
    fn feasibility_examples() {
        // 0.3 + e^0.5 * 0.3 = 0.79462 < 0.9: these rates beat every
        // (0.5, 0.1)-DP mechanism on both sides.
        let r = ConfusionRates::new(0.3, 0.3, 0.1).unwrap();
        assert_eq!(check_dp_feasible(&r, 0.5), Feasibility::ViolatesBoth);
        assert!((0.3 + 0.5f64.exp() * 0.3 - 0.794_616_381_210_038_4).abs() < 1e-12);

        // 0.6 + 0.6 = 1.2 >= 1: worse than chance is always achievable.
        let r = ConfusionRates::new(0.6, 0.6, 0.0).unwrap();
        assert_eq!(check_dp_feasible(&r, 0.0), Feasibility::Feasible);

        // zero rates are a perfect attack, impossible at any finite ε.
        let r = ConfusionRates::new(0.0, 0.0, 0.2).unwrap();
        assert_eq!(check_dp_feasible(&r, 3.0), Feasibility::ViolatesBoth);

        let r = ConfusionRates::new(0.1, 0.5, 0.0).unwrap();
        assert_eq!(check_dp_feasible(&r, 0.0), Feasibility::ViolatesBoth);
        assert_eq!(check_dp_feasible(&r, 1.0), Feasibility::ViolatesEq3);
    }

    #[test]
    fn calibrate_dispatches_on_gamma() {
        let m = crate::stats::summarize(&(0..100).map(|i| i as f64 / 99.0).collect::<Vec<_>>())
            .unwrap();
        let t = ThreatModel {
            gamma: 0.0,
            n: 100,
            delta_f: sens(1.0),
            moments: m,
        };
        let p = t.calibrate().unwrap();
        assert_eq!(p.provenance, Provenance::Theorem1);
        let p2 = ThreatModel { gamma: 0.2, ..t }.calibrate().unwrap();
        assert_eq!(p2.provenance, Provenance::Theorem2);
        assert!(p2.epsilon > p.epsilon);
    }

    #[test]
    fn calibrate_column_matches_closed_form() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let c = calibrate_column(&v, Some(Bounds::new(0.0, 1.0).unwrap()), 0.0).unwrap();
        let s = summarize(&v).unwrap();
        assert_eq!(c.params.epsilon, epsilon_theorem1(sens(1.0), 1000, s.var).unwrap());
        assert_eq!(c.compromised, 0);

        let c2 = calibrate_column(&v, Some(Bounds::new(0.0, 1.0).unwrap()), 0.5).unwrap();
        assert_eq!(c2.compromised, 500);
        assert_eq!(c2.moments.n, 500);
        assert_eq!(c2.params.provenance, Provenance::Theorem2);

        assert!(matches!(
            calibrate_column(&[0.3; 10], None, 0.0),
            Err(Error::Degenerate { .. })
        ));
        assert!(matches!(calibrate_column(&v, None, 0.0), Err(Error::Usage(_))));
    }

    proptest! {
        #[test]
        fn reduction_at_gamma_zero(d in 0.01f64..10.0, n in 3usize..100_000, v in 1e-4f64..100.0) {
            let e1 = epsilon_theorem1(sens(d), n, v).unwrap();
            let e2 = epsilon_theorem2(sens(d), n, 0.0, n as f64 * v).unwrap();
            prop_assert!(((e1 - e2) / e1).abs() <= 1e-12);
        }

        #[test]
        fn epsilon1_linear_in_sensitivity(d in 0.01f64..10.0, k in 0.1f64..10.0, n in 2usize..10_000, v in 1e-3f64..10.0) {
            let a = epsilon_theorem1(sens(d), n, v).unwrap();
            let b = epsilon_theorem1(sens(k * d), n, v).unwrap();
            prop_assert!((b - k * a).abs() <= 1e-12 * b.abs().max(1.0));
        }

        #[test]
        fn epsilon1_decreasing(n in 3usize..100_000, v in 1e-3f64..10.0) {
            let a = epsilon_theorem1(sens(1.0), n, v).unwrap();
            prop_assert!(epsilon_theorem1(sens(1.0), n + 1, v).unwrap() < a);
            prop_assert!(epsilon_theorem1(sens(1.0), n, v * 1.01).unwrap() < a);
        }

        #[test]
        fn epsilon2_nondecreasing_in_gamma(n in 20usize..50_000, g1 in 0.0f64..0.8, dg in 0.0f64..0.1, v in 1e-2f64..10.0) {
            let g2 = (g1 + dg).min(0.85);
            let u1 = uncompromised_count(n, g1);
            let u2 = uncompromised_count(n, g2);
            prop_assume!(u2 as f64 > std::f64::consts::E);
            let e1 = epsilon_theorem2(sens(1.0), n, g1, u1 as f64 * v).unwrap();
            let e2 = epsilon_theorem2(sens(1.0), n, g2, u2 as f64 * v).unwrap();
            prop_assert!(e2 >= e1);
        }

        #[test]
        fn rates_symmetric(fp in 0.0f64..=1.0, fnr in 0.0f64..=1.0, d in 0.0f64..0.99) {
            let a = epsilon_from_rates(&ConfusionRates::new(fp, fnr, d).unwrap());
            let b = epsilon_from_rates(&ConfusionRates::new(fnr, fp, d).unwrap());
            prop_assert_eq!(a.epsilon.to_bits(), b.epsilon.to_bits());
            prop_assert_eq!(a.status, b.status);
        }

        #[test]
        fn rates_feasibility_consistent(fp in 0.001f64..0.5, fnr in 0.001f64..0.5, t in 0.0f64..0.95) {
            // δ below 1 − fp − fn keeps the estimate strictly positive.
            let d = t * (1.0 - fp - fnr);
            let r = ConfusionRates::new(fp, fnr, d).unwrap();
            let e = epsilon_from_rates(&r);
            prop_assume!(e.status == EpsilonStatus::Finite);
            prop_assert_eq!(check_dp_feasible(&r, e.epsilon), Feasibility::Feasible);
            prop_assert_ne!(check_dp_feasible(&r, e.epsilon - 1e-9 - 1e-9 * e.epsilon), Feasibility::Feasible);
        }

        #[test]
        fn deltas_increase_with_moments(s in 0.0f64..100.0, ds in 1e-3f64..10.0, eps in 0.0f64..2.0) {
            let n = 1000;
            let floor1 = 4.0 / (5.0 * (n as f64).sqrt());
            let a = delta_theorem1(eps, n, 0.5, s).unwrap();
            let b = delta_theorem1(eps, n, 0.5, s + ds).unwrap();
            prop_assert!(b > a && a >= floor1);

            let sg = 400.0;
            let a = delta_theorem2(eps, n, 0.2, sens(1.0), sg, s, s).unwrap();
            let b3 = delta_theorem2(eps, n, 0.2, sens(1.0), sg, s + ds, s).unwrap();
            let b4 = delta_theorem2(eps, n, 0.2, sens(1.0), sg, s, s + ds).unwrap();
            let floor2 = 4.0 / (5.0 * 800f64.sqrt());
            prop_assert!(b3 > a && b4 > a && a >= floor2);
        }
    }
}
