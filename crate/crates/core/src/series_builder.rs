//! Builds the counterexample series `a_m = (-1)^m F(m)` from a gap set `Λ′`,
//! where `F` has its zeros on `S = complement(Λ′)`, and checks the
//! hypotheses of the sign-change gap theorem on the result.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::entire_products::{ProductSpec, MAX_DETECTED_PERIOD, TRUNCATION_RATIO};
use crate::error::{Error, Result};
use crate::lattice_sets::{IndexSet, Measurability};
use crate::sign_analysis::{regularity_profile, sign_change_set, RealSequence};
use crate::singularity_probe::radius_estimate;

/// Default tolerance of the regularity check `| |a_m|^{1/m} - 1 |`.
pub const REGULARITY_TOLERANCE: f64 = 0.05;

/// Default tolerance of the radius-of-convergence check.
pub const RADIUS_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub lambda_prime: IndexSet,
    pub n: u64,
    /// Density of `Λ′` over the top half of its horizon.
    pub delta_prime: f64,
    pub measurability: Measurability,
    pub truncation: u64,
    /// `"periodic"` (exact tail) or `"density"`.
    pub tail_mode: String,
    pub coefficients: RealSequence,
    pub sign_changes: IndexSet,
    pub regularity_m_min: u64,
    pub regularity_deviation: f64,
    pub predicted_clear_arc_halfangle: f64,
    pub checks: BTreeMap<String, bool>,
}

/// `(n(h) - n(h/2)) / (h/2)`; the plain ratio for tiny horizons.
fn top_half_density(set: &IndexSet) -> f64 {
    let h = set.horizon();
    if h < 2 {
        return set.len() as f64 / (h + 1) as f64;
    }
    let half = h / 2;
    let upper = set.len() - set.elements().partition_point(|&t| t <= half);
    upper as f64 / (h - half) as f64
}

/// Coefficients `a_0..a_N` of the series whose support is `Λ′ ∩ [0, N]`.
pub fn build_series(lambda_prime: &IndexSet, n: u64) -> Result<ConstructionReport> {
    let h = lambda_prime.horizon();
    if n > h {
        return Err(Error::HorizonExceeded {
            requested: n as f64,
            horizon: h,
        });
    }
    let delta_prime = top_half_density(lambda_prime);
    let zeros = lambda_prime.complement();
    let required = TRUNCATION_RATIO * n as f64;
    let spec = match zeros.minimal_period(MAX_DETECTED_PERIOD) {
        Some(pattern) => {
            let t = (TRUNCATION_RATIO as u64 * n).max(TRUNCATION_RATIO as u64);
            if t > h {
                return Err(Error::TruncationInsufficient { truncation: h, required });
            }
            ProductSpec::with_periodic_tail(zeros, pattern, t)?
        }
        None => {
            if (h as f64) < required {
                return Err(Error::TruncationInsufficient { truncation: h, required });
            }
            ProductSpec::new(zeros, 1.0 - delta_prime, h)?
        }
    };
    let tail_mode = match spec.tail() {
        crate::entire_products::TailModel::Periodic(_) => "periodic",
        crate::entire_products::TailModel::Density { .. } => "density",
    };
    let mut values = spec.eval_at_integers(n)?;
    for (m, v) in values.iter_mut().enumerate() {
        let m = m as u64;
        if m >= 1 && !lambda_prime.contains(m) {
            *v = 0.0;
        } else if m % 2 == 1 {
            *v = -*v;
        }
    }
    values[0] = 1.0;
    let coefficients = RealSequence::new(values)?;
    let sign_changes = sign_change_set(&coefficients);
    let m_min = (n / 2).max(1);
    let regularity = regularity_profile(&coefficients, m_min)?;

    let support = coefficients.support();
    let expected: Vec<u64> = std::iter::once(0)
        .chain(lambda_prime.elements().iter().copied().filter(|&m| (1..=n).contains(&m)))
        .collect();
    let mut checks = BTreeMap::new();
    checks.insert("a0_is_one".to_string(), coefficients.values()[0] == 1.0);
    checks.insert("support_exact".to_string(), support.elements() == expected.as_slice());
    checks.insert(
        "sign_changes_in_support".to_string(),
        sign_changes.elements().iter().all(|&m| support.contains(m)),
    );
    Ok(ConstructionReport {
        lambda_prime: lambda_prime.clone(),
        n,
        delta_prime,
        measurability: lambda_prime.measurability(),
        truncation: spec.truncation(),
        tail_mode: tail_mode.to_string(),
        coefficients,
        sign_changes,
        regularity_m_min: m_min,
        regularity_deviation: regularity.max_deviation,
        predicted_clear_arc_halfangle: PI * delta_prime,
        checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisTolerances {
    pub regularity: f64,
    pub radius: f64,
}

impl Default for HypothesisTolerances {
    fn default() -> Self {
        Self {
            regularity: REGULARITY_TOLERANCE,
            radius: RADIUS_TOLERANCE,
        }
    }
}

pub const CHECK_SIGN_CHANGES: &str = "i_sign_changes_in_lambda";
pub const CHECK_REGULARITY: &str = "ii_regularity";
pub const CHECK_RADIUS: &str = "iii_radius_one";
pub const CHECK_DENSITY: &str = "iv_density_exceeds_delta";

pub fn verify_theorem1_hypotheses(
    report: &ConstructionReport,
    lambda: &IndexSet,
    delta: f64,
) -> BTreeMap<String, Verdict> {
    verify_theorem1_hypotheses_with(report, lambda, delta, &HypothesisTolerances::default())
}

/// Verdicts for (i) sign changes ⊆ Λ, (ii) regularity, (iii) radius 1 and
/// (iv) `Δ′ > Δ`; (iv) is inconclusive when the density of `Λ′` has not
/// settled, (iii) when there are too few support points.
pub fn verify_theorem1_hypotheses_with(
    report: &ConstructionReport,
    lambda: &IndexSet,
    delta: f64,
    tol: &HypothesisTolerances,
) -> BTreeMap<String, Verdict> {
    let mut out = BTreeMap::new();
    out.insert(
        CHECK_SIGN_CHANGES.to_string(),
        Verdict::from_bool(report.sign_changes.elements().iter().all(|&m| lambda.contains(m))),
    );
    out.insert(
        CHECK_REGULARITY.to_string(),
        Verdict::from_bool(report.regularity_deviation <= tol.regularity),
    );
    let radius = match radius_estimate(&report.coefficients) {
        Ok(r) => Verdict::from_bool((r - 1.0).abs() <= tol.radius),
        Err(_) => Verdict::Inconclusive,
    };
    out.insert(CHECK_RADIUS.to_string(), radius);
    let density = if !report.measurability.converged {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool(report.delta_prime > delta)
    };
    out.insert(CHECK_DENSITY.to_string(), density);
    out
}
