//! Bounds on the moments of the generalization error and the single-draw
//! bounds derived from them.
//!
//! Every bound returns a [`BoundReport`] carrying the value together with
//! each side condition and whether it holds. A failed side condition never
//! turns into an error: the value is still reported, with `valid = false`.
//!
//! Two validity policies are supported. [`ValidityMode::Strict`] applies
//! the integer and strict-inequality requirements on the moment order
//! (`mq > 2`, `mq ∈ ℤ⁺`, `β > 2`, `β ∈ ℤ⁺`) verbatim.
//! [`ValidityMode::Relaxed`] accepts `mq ≥ 2` and non-integer `β > 2`; the
//! underlying subgaussian moment inequality holds for every real order of
//! at least two, which is what the relaxed policy relies on.
//!
//! Notation: `σ` is the subgaussian parameter of the loss, `n` the sample
//! size, `m` the moment order, `t > 1` the information order and
//! `q = t/(t−1)` its Hölder conjugate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::information::{chi_square_information, power_information, JointDistribution};
use crate::numerics::{exp_inv_e, exp_inv_e_half, is_positive_integer, CompensatedSum};
use crate::risk::{empirical_risk, LearningModel};

/// Tolerance for the "is an integer" side conditions.
pub const INTEGER_TOLERANCE: f64 = 1e-9;

/// The information-side threshold quoted for the chi-square vs mutual
/// information comparison of second-moment bounds.
pub const CHI2_VS_MI_STATED_THRESHOLD: f64 = 94.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Expected function of the risks under the joint vs product law.
    Thm1,
    /// m-th moment via power information.
    Thm2,
    /// m-th moment via chi-square information.
    Cor1,
    /// Expected generalization error via power information.
    Cor2,
    /// m-th moment via the maximal density ratio.
    Eq9,
    /// Second moment via mutual information.
    Thm3,
    /// Single-draw bound via power information.
    Thm4,
    /// Single-draw bound via Rényi divergence.
    Eq12,
    /// Single-draw bound via chi-square information.
    Cor3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidityMode {
    Strict,
    #[default]
    Relaxed,
}

/// Which validity policies a condition belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionScope {
    Both,
    StrictOnly,
    RelaxedOnly,
}

impl ConditionScope {
    fn applies(self, mode: ValidityMode) -> bool {
        matches!(
            (self, mode),
            (ConditionScope::Both, _)
                | (ConditionScope::StrictOnly, ValidityMode::Strict)
                | (ConditionScope::RelaxedOnly, ValidityMode::Relaxed)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub satisfied: bool,
    pub scope: ConditionScope,
}

impl Condition {
    fn new(name: &str, satisfied: bool, scope: ConditionScope) -> Self {
        Self {
            name: name.to_owned(),
            satisfied,
            scope,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub n: usize,
    pub sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub info_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

/// A bound value with its side conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub value: f64,
    pub theorem: Theorem,
    pub parameters: BoundParameters,
    pub conditions: Vec<Condition>,
    /// Policy `valid` was evaluated under.
    pub mode: ValidityMode,
    /// All conditions applicable under `mode` hold.
    pub valid: bool,
    pub valid_strict: bool,
    pub valid_relaxed: bool,
}

impl BoundReport {
    fn new(
        theorem: Theorem,
        value: f64,
        parameters: BoundParameters,
        conditions: Vec<Condition>,
        mode: ValidityMode,
    ) -> Self {
        let valid_in = |mode: ValidityMode| {
            conditions
                .iter()
                .filter(|c| c.scope.applies(mode))
                .all(|c| c.satisfied)
        };
        let valid_strict = valid_in(ValidityMode::Strict);
        let valid_relaxed = valid_in(ValidityMode::Relaxed);
        Self {
            value,
            theorem,
            parameters,
            valid: match mode {
                ValidityMode::Strict => valid_strict,
                ValidityMode::Relaxed => valid_relaxed,
            },
            conditions,
            mode,
            valid_strict,
            valid_relaxed,
        }
    }

    pub fn valid_in(&self, mode: ValidityMode) -> bool {
        match mode {
            ValidityMode::Strict => self.valid_strict,
            ValidityMode::Relaxed => self.valid_relaxed,
        }
    }

    fn relabel(mut self, theorem: Theorem) -> Self {
        self.theorem = theorem;
        self
    }
}

fn check_sigma_n(sigma: f64, n: usize) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    Ok(())
}

fn check_order(t: f64) -> Result<()> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t must be > 1, got {t}")));
    }
    Ok(())
}

fn check_info(info: f64) -> Result<()> {
    if !(info >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "information value must be >= 0, got {info}"
        )));
    }
    Ok(())
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("moment order m must be >= 1".into()));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must be in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Hölder conjugate `t/(t−1)`.
pub fn conjugate(t: f64) -> f64 {
    t / (t - 1.0)
}

/// `σ^m (k/n)^{m/2} e^{m/e}`, the subgaussian moment factor with
/// `k = mq`.
fn moment_factor(sigma: f64, n: usize, m: u32, mq: f64) -> f64 {
    let m_f = m as f64;
    sigma.powi(m as i32) * (mq / n as f64).powf(m_f / 2.0) * exp_inv_e().powi(m as i32)
}

/// Side conditions on the moment order `k = mq` used by the moment bounds.
fn moment_order_conditions(t: f64, q: f64, mq: f64) -> Vec<Condition> {
    vec![
        Condition::new("t>1", t > 1.0, ConditionScope::Both),
        Condition::new("q>1", q > 1.0, ConditionScope::Both),
        Condition::new("mq>2", mq > 2.0, ConditionScope::StrictOnly),
        Condition::new(
            "mq integer",
            is_positive_integer(mq, INTEGER_TOLERANCE),
            ConditionScope::StrictOnly,
        ),
        Condition::new("mq>=2", mq >= 2.0 - INTEGER_TOLERANCE, ConditionScope::RelaxedOnly),
    ]
}

/// m-th moment bound via power information of order `t`:
/// `σ^m (mq/n)^{m/2} e^{m/e} (I_P^(t) + 1)^{1/t}`.
pub fn moment_bound_power(
    sigma: f64,
    n: usize,
    m: u32,
    t: f64,
    info_pt: f64,
    mode: ValidityMode,
) -> Result<BoundReport> {
    check_sigma_n(sigma, n)?;
    check_m(m)?;
    check_order(t)?;
    check_info(info_pt)?;
    let q = conjugate(t);
    let mq = m as f64 * q;
    let value = moment_factor(sigma, n, m, mq) * (info_pt + 1.0).powf(1.0 / t);
    Ok(BoundReport::new(
        Theorem::Thm2,
        value,
        BoundParameters {
            m: Some(m),
            t: Some(t),
            q: Some(q),
            n,
            sigma,
            info_value: Some(info_pt),
            ..Default::default()
        },
        moment_order_conditions(t, q, mq),
        mode,
    ))
}

/// m-th moment bound via chi-square information:
/// `σ^m (2m/n)^{m/2} e^{m/e} √(I_χ² + 1)`. Identical to
/// [`moment_bound_power`] at `t = 2`.
pub fn moment_bound_chi2(
    sigma: f64,
    n: usize,
    m: u32,
    info_chi2: f64,
    mode: ValidityMode,
) -> Result<BoundReport> {
    Ok(moment_bound_power(sigma, n, m, 2.0, info_chi2, mode)?.relabel(Theorem::Cor1))
}

/// Expected generalization error bound for an integer `q ≥ 2`:
/// `σ √(q/n) e^{1/e} (I_P^(t) + 1)^{1/t}` with `t = q/(q−1)`.
pub fn expected_gen_bound(
    sigma: f64,
    n: usize,
    q: u32,
    info_pt: f64,
    mode: ValidityMode,
) -> Result<BoundReport> {
    check_sigma_n(sigma, n)?;
    check_info(info_pt)?;
    if q < 2 {
        return Err(Error::InvalidParameter(format!("q must be an integer >= 2, got {q}")));
    }
    let q_f = q as f64;
    let t = conjugate(q_f);
    let value = sigma * (q_f / n as f64).sqrt() * exp_inv_e() * (info_pt + 1.0).powf(1.0 / t);
    Ok(BoundReport::new(
        Theorem::Cor2,
        value,
        BoundParameters {
            m: Some(1),
            t: Some(t),
            q: Some(q_f),
            n,
            sigma,
            info_value: Some(info_pt),
            ..Default::default()
        },
        vec![Condition::new("q>=2 integer", true, ConditionScope::Both)],
        mode,
    ))
}

/// m-th moment bound via the maximal density ratio `R`:
/// `σ^m (2m/n)^{m/2} e^{m/e} R`.
pub fn moment_bound_ratio(
    sigma: f64,
    n: usize,
    m: u32,
    r: f64,
    mode: ValidityMode,
) -> Result<BoundReport> {
    check_sigma_n(sigma, n)?;
    check_m(m)?;
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("R must be >= 1, got {r}")));
    }
    let mq = 2.0 * m as f64;
    let value = moment_factor(sigma, n, m, mq) * r;
    let mut conditions = moment_order_conditions(2.0, 2.0, mq);
    conditions.push(Condition::new("R>=1", true, ConditionScope::Both));
    Ok(BoundReport::new(
        Theorem::Eq9,
        value,
        BoundParameters {
            m: Some(m),
            t: Some(2.0),
            q: Some(2.0),
            n,
            sigma,
            r: Some(r),
            ..Default::default()
        },
        conditions,
        mode,
    ))
}

/// Coefficients of the mutual-information second-moment bound
/// `(σ²/n)(slope·I + offset)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiBoundConstants {
    pub slope: f64,
    pub offset: f64,
}

impl Default for MiBoundConstants {
    fn default() -> Self {
        Self {
            slope: 16.0,
            offset: 9.0,
        }
    }
}

/// Second-moment bound via mutual information: `(σ²/n)(16 I + 9)`.
pub fn second_moment_bound_mi(sigma: f64, n: usize, mi: f64) -> Result<BoundReport> {
    second_moment_bound_mi_with(sigma, n, mi, MiBoundConstants::default())
}

/// [`second_moment_bound_mi`] with explicit coefficients.
pub fn second_moment_bound_mi_with(
    sigma: f64,
    n: usize,
    mi: f64,
    constants: MiBoundConstants,
) -> Result<BoundReport> {
    check_sigma_n(sigma, n)?;
    check_info(mi)?;
    let value = sigma * sigma * (constants.slope * mi + constants.offset) / n as f64;
    Ok(BoundReport::new(
        Theorem::Thm3,
        value,
        BoundParameters {
            m: Some(2),
            n,
            sigma,
            info_value: Some(mi),
            ..Default::default()
        },
        vec![Condition::new("I>=0", true, ConditionScope::Both)],
        ValidityMode::default(),
    ))
}

fn beta_conditions(beta: f64) -> Vec<Condition> {
    vec![
        Condition::new("beta>2", beta > 2.0, ConditionScope::Both),
        Condition::new(
            "beta integer",
            is_positive_integer(beta, INTEGER_TOLERANCE),
            ConditionScope::StrictOnly,
        ),
    ]
}

/// Single-draw bound via power information: with probability at least
/// `1 − δ`,
/// `|gen| ≤ e^{1/e+1/2} √(2tσ²/(n(t−1))) √(ln((I_P^(t)+1)^{1/t}) + ln(1/δ))`.
///
/// The optimised moment order enters through
/// `β = ln((I_P^(t)+1)/δ^t)/(t−1)`.
pub fn highprob_bound_power(
    sigma: f64,
    n: usize,
    t: f64,
    delta: f64,
    info_pt: f64,
    mode: ValidityMode,
) -> Result<BoundReport> {
    check_sigma_n(sigma, n)?;
    check_order(t)?;
    check_delta(delta)?;
    check_info(info_pt)?;
    let log_info = info_pt.ln_1p();
    let log_inv_delta = -delta.ln();
    let beta = (log_info + t * log_inv_delta) / (t - 1.0);
    let scale = (2.0 * t * sigma * sigma / (n as f64 * (t - 1.0))).sqrt();
    let value = exp_inv_e_half() * scale * (log_info / t + log_inv_delta).sqrt();
    Ok(BoundReport::new(
        Theorem::Thm4,
        value,
        BoundParameters {
            t: Some(t),
            q: Some(conjugate(t)),
            n,
            sigma,
            delta: Some(delta),
            info_value: Some(info_pt),
            beta: Some(beta),
            ..Default::default()
        },
        beta_conditions(beta),
        mode,
    ))
}

/// Single-draw bound via Rényi divergence of order `alpha > 1`:
/// `|gen| ≤ e^{1/e+1/2} √(2σ²(D_α + ln(1/δ))/n)`.
pub fn highprob_bound_renyi(
    sigma: f64,
    n: usize,
    alpha: f64,
    delta: f64,
    d_alpha: f64,
    mode: ValidityMode,
) -> Result<BoundReport> {
    check_sigma_n(sigma, n)?;
    check_order(alpha)?;
    check_delta(delta)?;
    check_info(d_alpha)?;
    let log_inv_delta = -delta.ln();
    let beta = alpha / (alpha - 1.0) * log_inv_delta + d_alpha;
    let value =
        exp_inv_e_half() * (2.0 * sigma * sigma * (d_alpha + log_inv_delta) / n as f64).sqrt();
    Ok(BoundReport::new(
        Theorem::Eq12,
        value,
        BoundParameters {
            alpha: Some(alpha),
            n,
            sigma,
            delta: Some(delta),
            info_value: Some(d_alpha),
            beta: Some(beta),
            ..Default::default()
        },
        beta_conditions(beta),
        mode,
    ))
}

/// Single-draw bound via chi-square information:
/// `|gen| ≤ e^{1/e+1/2} 2σ √((ln √(I_χ²+1) + ln(1/δ))/n)`.
/// Identical to [`highprob_bound_power`] at `t = 2`.
pub fn highprob_bound_chi2(
    sigma: f64,
    n: usize,
    delta: f64,
    info_chi2: f64,
    mode: ValidityMode,
) -> Result<BoundReport> {
    Ok(highprob_bound_power(sigma, n, 2.0, delta, info_chi2, mode)?.relabel(Theorem::Cor3))
}

/// Outcome of comparing the power-information and chi-square moment bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerVsChi2 {
    /// `(2(t−1)/t)^{m t (t−1)/(t−2)} − 1`.
    pub threshold: f64,
    pub base: f64,
    pub exponent: f64,
    /// `I_P^(t) ≥ threshold`: the chi-square bound is then the tighter one.
    pub holds: bool,
    /// `m t/(t−1)` is a positive integer.
    pub order_integer: bool,
}

/// Sufficient condition for the chi-square moment bound to be tighter
/// than the power-information bound of order `t > 2`.
pub fn compare_power_vs_chi2(m: u32, t: f64, info_pt: f64) -> Result<PowerVsChi2> {
    check_m(m)?;
    if !(t > 2.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t must be > 2, got {t}")));
    }
    let base = 2.0 * (t - 1.0) / t;
    let exponent = m as f64 * t * (t - 1.0) / (t - 2.0);
    let threshold = base.powf(exponent) - 1.0;
    Ok(PowerVsChi2 {
        threshold,
        base,
        exponent,
        holds: info_pt >= threshold,
        order_integer: is_positive_integer(m as f64 * t / (t - 1.0), INTEGER_TOLERANCE),
    })
}

/// Outcome of comparing the chi-square and mutual-information second
/// moment bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2VsMi {
    /// `16 ln(I_χ²+1) + 9 ≤ 4 e^{2/e} √(I_χ²+1)` at the given value.
    pub holds: bool,
    /// Smallest `I_χ²` past which the inequality always holds, by bisection.
    pub crossover: f64,
    /// The threshold as commonly stated (94).
    pub stated_threshold: f64,
    /// `4 e^{2/e} √95 − 16 ln 95 − 9`; negative means the inequality
    /// fails at the stated threshold.
    pub margin_at_stated_threshold: f64,
    pub stated_threshold_sufficient: bool,
}

/// `4 e^{2/e} √(x+1) − 16 ln(x+1) − 9`.
pub fn chi2_vs_mi_margin(x: f64) -> f64 {
    4.0 * exp_inv_e().powi(2) * (x + 1.0).sqrt() - 16.0 * x.ln_1p() - 9.0
}

/// Root of [`chi2_vs_mi_margin`] on its increasing branch.
///
/// The margin decreases up to `x + 1 = (16 / (2 e^{2/e}))²` and increases
/// afterwards, and is negative at the turning point, so the root past it
/// is unique.
pub fn chi2_vs_mi_crossover() -> f64 {
    let turning = (8.0 / exp_inv_e().powi(2)).powi(2) - 1.0;
    let mut lo = turning;
    let mut hi = turning.max(1.0) * 2.0;
    while chi2_vs_mi_margin(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_vs_mi_margin(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    hi
}

pub fn compare_chi2_vs_mi(info_chi2: f64) -> Result<Chi2VsMi> {
    check_info(info_chi2)?;
    let margin94 = chi2_vs_mi_margin(CHI2_VS_MI_STATED_THRESHOLD);
    Ok(Chi2VsMi {
        holds: chi2_vs_mi_margin(info_chi2) >= 0.0,
        crossover: chi2_vs_mi_crossover(),
        stated_threshold: CHI2_VS_MI_STATED_THRESHOLD,
        margin_at_stated_threshold: margin94,
        stated_threshold_sufficient: margin94 >= 0.0,
    })
}

/// Both sides of the change-of-measure inequality
/// `|E_{P_{W,S}} F| ≤ (E_{P_W⊗P_S} |F|^q)^{1/q} (I_P^(t)+1)^{1/t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Check {
    pub lhs: f64,
    pub rhs: f64,
    pub t: f64,
    pub info_pt: f64,
}

impl Theorem1Check {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// Evaluates both sides of the change-of-measure inequality for
/// `F(L_P(W), L_E(W, S))` on an enumerated joint of `model`.
///
/// `joint` must have been built from `model`'s data and kernel.
pub fn verify_theorem1<F>(
    model: &LearningModel,
    joint: &JointDistribution,
    f: F,
    t: f64,
) -> Result<Theorem1Check>
where
    F: Fn(f64, f64) -> f64,
{
    check_order(t)?;
    let layout = joint
        .layout()
        .ok_or_else(|| Error::InvalidJoint("joint carries no training-set layout".into()))?;
    if layout.n != model.n {
        return Err(Error::InvalidJoint(format!(
            "joint built for n = {}, model has n = {}",
            layout.n, model.n
        )));
    }
    let q = conjugate(t);
    let lp: Vec<f64> = joint
        .w_atoms()
        .iter()
        .map(|&w| model.population_risk(w))
        .collect::<Result<_>>()?;

    let mut lhs = CompensatedSum::new();
    let mut product = CompensatedSum::new();
    for s in 0..joint.s_count() {
        let ps = joint.p_s()[s];
        if ps == 0.0 {
            continue;
        }
        let sample = layout.values(s);
        for &(w, c) in joint.conditional(s) {
            let w = w as usize;
            let le = empirical_risk(&model.loss, joint.w_atoms()[w], &sample)?;
            lhs.add(ps * c * f(lp[w], le));
        }
        for (w, (&wv, &pw)) in joint.w_atoms().iter().zip(joint.p_w()).enumerate() {
            let le = empirical_risk(&model.loss, wv, &sample)?;
            product.add(ps * pw * f(lp[w], le).abs().powf(q));
        }
    }
    let info_pt = power_information(joint, t)?.value;
    Ok(Theorem1Check {
        lhs: lhs.value().abs(),
        rhs: product.value().max(0.0).powf(1.0 / q) * (info_pt + 1.0).powf(1.0 / t),
        t,
        info_pt,
    })
}

/// `(√(I_χ²+1), (I_P^(t)+1)^{1/(2(t−1))})`; the first never exceeds the
/// second for `t > 2`.
pub fn chi2_power_chain(joint: &JointDistribution, t: f64) -> Result<(f64, f64)> {
    if !(t > 2.0) {
        return Err(Error::InvalidParameter(format!("t must be > 2, got {t}")));
    }
    let chi2 = chi_square_information(joint).value;
    let pt = power_information(joint, t)?.value;
    Ok(((chi2 + 1.0).sqrt(), (pt + 1.0).powf(1.0 / (2.0 * (t - 1.0)))))
}

/// `(I(W;S), ln(I_χ²+1))`; the first never exceeds the second.
pub fn mi_chi2_chain(joint: &JointDistribution) -> (f64, f64) {
    let mi = crate::information::mutual_information(joint).value;
    let chi2 = chi_square_information(joint).value;
    (mi, chi2.ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: f64 = std::f64::consts::E;

    #[test]
    fn power_bound_desk_values() {
        let r = moment_bound_power(1.0, 4, 1, 2.0, 0.0, ValidityMode::Strict).unwrap();
        assert!((r.value - (0.5f64).sqrt() * (1.0 / E).exp()).abs() < 1e-14);
        assert!((r.value - 1.02153).abs() < 1e-5);
        assert!(!r.valid_strict);
        assert!(r.valid_relaxed);
        assert!(!r.valid);

        let r = moment_bound_power(2.0 / 9.0, 10, 2, 2.0, 1.0, ValidityMode::Strict).unwrap();
        let expected = (2.0f64 / 9.0).powi(2) * 0.4 * (2.0 / E).exp() * 2f64.sqrt();
        assert!((r.value - expected).abs() < 1e-15);
        assert!((r.value - 0.05830).abs() < 1e-5);
        assert!(r.valid);
    }

    #[test]
    fn power_bound_scaling_in_sigma() {
        for m in 1..=4 {
            let a = moment_bound_power(0.3, 7, m, 3.0, 2.5, ValidityMode::Relaxed).unwrap();
            let b = moment_bound_power(0.6, 7, m, 3.0, 2.5, ValidityMode::Relaxed).unwrap();
            assert!((b.value / a.value - 2f64.powi(m as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn power_bound_errors() {
        assert!(moment_bound_power(0.0, 4, 1, 2.0, 0.0, ValidityMode::Strict).is_err());
        assert!(moment_bound_power(1.0, 0, 1, 2.0, 0.0, ValidityMode::Strict).is_err());
        assert!(moment_bound_power(1.0, 4, 1, 1.0, 0.0, ValidityMode::Strict).is_err());
        assert!(moment_bound_power(1.0, 4, 1, 2.0, -1.0, ValidityMode::Strict).is_err());
    }

    #[test]
    fn conjugate_recorded() {
        let r = moment_bound_power(1.0, 3, 2, 3.0, 0.5, ValidityMode::Strict).unwrap();
        let p = &r.parameters;
        assert!((p.q.unwrap() - p.t.unwrap() / (p.t.unwrap() - 1.0)).abs() < 1e-12);
        // mq = 3: integer and > 2
        assert!(r.valid_strict);
    }

    #[test]
    fn chi2_bound_values() {
        let r = moment_bound_chi2(1.0, 4, 2, 0.0, ValidityMode::Strict).unwrap();
        assert!((r.value - (2.0 / E).exp()).abs() < 1e-14);
        assert_eq!(r.theorem, Theorem::Cor1);
        let r = moment_bound_chi2(2.0 / 9.0, 10, 1, 1.0, ValidityMode::Relaxed).unwrap();
        let expected = 2.0 / 9.0 * 0.2f64.sqrt() * (1.0 / E).exp() * 2f64.sqrt();
        assert!((r.value - expected).abs() < 1e-15);
        assert!((r.value - 0.2030).abs() < 1e-4);
    }

    #[test]
    fn expected_gen_values() {
        let r = expected_gen_bound(1.0, 100, 2, 0.0, ValidityMode::Strict).unwrap();
        assert!((r.value - 0.02f64.sqrt() * (1.0 / E).exp()).abs() < 1e-15);
        assert!((r.value - 0.20431).abs() < 1e-5);
        assert!(r.valid);
        assert!(expected_gen_bound(1.0, 100, 1, 0.0, ValidityMode::Strict).is_err());
    }

    #[test]
    fn ratio_bound_reduces_to_chi2_at_one() {
        let a = moment_bound_ratio(0.7, 5, 3, 1.0, ValidityMode::Relaxed).unwrap();
        let b = moment_bound_chi2(0.7, 5, 3, 0.0, ValidityMode::Relaxed).unwrap();
        assert!((a.value - b.value).abs() < 1e-15);
        assert!(moment_bound_ratio(0.7, 5, 3, 0.5, ValidityMode::Relaxed).is_err());
    }

    #[test]
    fn ratio_bound_slope() {
        for m in 1..=4u32 {
            let a = moment_bound_ratio(0.5, 10, m, 3.0, ValidityMode::Relaxed).unwrap().value;
            let b = moment_bound_ratio(0.5, 1000, m, 3.0, ValidityMode::Relaxed).unwrap().value;
            let slope = (b.ln() - a.ln()) / (1000f64.ln() - 10f64.ln());
            assert!((slope + m as f64 / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mi_bound_values() {
        assert_eq!(second_moment_bound_mi(1.0, 9, 0.0).unwrap().value, 1.0);
        let r = second_moment_bound_mi(1.0, 100, 2f64.ln()).unwrap();
        assert!((r.value - (16.0 * 2f64.ln() + 9.0) / 100.0).abs() < 1e-15);
        assert!((r.value - 0.20090).abs() < 1e-5);
        let a = second_moment_bound_mi(0.5, 20, 1.0).unwrap().value;
        let b = second_moment_bound_mi(0.5, 20, 2.0).unwrap().value;
        assert!((b - a - 16.0 * 0.25 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn highprob_power_example() {
        let info = 8f64.exp() - 1.0;
        let r = highprob_bound_power(1.0, 100, 2.0, (-1f64).exp(), info, ValidityMode::Strict)
            .unwrap();
        assert!((r.parameters.beta.unwrap() - 10.0).abs() < 1e-12);
        assert!(r.valid_strict);
        let expected = (1.0 / E + 0.5).exp() * 2.0 * 0.05f64.sqrt();
        assert!((r.value - expected).abs() < 1e-14);
        // desk value, constant rounded to 2.38196
        assert!((r.value - 1.06524).abs() < 1e-4);
    }

    #[test]
    fn highprob_power_zero_info() {
        let (t, delta, sigma, n) = (3.0, 0.05, 0.4, 30);
        let r = highprob_bound_power(sigma, n, t, delta, 0.0, ValidityMode::Relaxed).unwrap();
        let expected = (1.0 / E + 0.5).exp()
            * (2.0 * t * sigma * sigma * (1.0 / delta).ln() / (n as f64 * (t - 1.0))).sqrt();
        assert!((r.value - expected).abs() < 1e-14);
    }

    #[test]
    fn highprob_delta_domain() {
        for d in [0.0, 1.0, -0.1, 1.5] {
            assert!(highprob_bound_power(1.0, 10, 2.0, d, 0.0, ValidityMode::Relaxed).is_err());
        }
    }

    #[test]
    fn renyi_example() {
        let r =
            highprob_bound_renyi(1.0, 8, 2.0, (-2f64).exp(), 0.0, ValidityMode::Relaxed).unwrap();
        assert!((r.value - (1.0 / E + 0.5).exp() * 0.5f64.sqrt()).abs() < 1e-14);
        assert!((r.value - 1.68430).abs() < 1e-4);
    }

    #[test]
    fn chi2_highprob_matches_power() {
        let info = 8f64.exp() - 1.0;
        let a = highprob_bound_chi2(1.0, 100, (-1f64).exp(), info, ValidityMode::Strict).unwrap();
        assert!((a.value - 1.06524).abs() < 1e-4);
        assert_eq!(a.theorem, Theorem::Cor3);
        let small = highprob_bound_chi2(1.0, 100, 1.0 - 1e-12, 0.0, ValidityMode::Relaxed).unwrap();
        assert!(small.value < 1e-5);
    }

    #[test]
    fn power_vs_chi2_threshold_value() {
        let c = compare_power_vs_chi2(2, 3.0, 40.0).unwrap();
        assert!((c.base - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.exponent, 12.0);
        assert!((c.threshold - ((4.0f64 / 3.0).powi(12) - 1.0)).abs() < 1e-12);
        assert!((c.threshold - 30.57).abs() < 0.01);
        assert!(c.holds);
        assert!(c.order_integer);
        assert!(!compare_power_vs_chi2(2, 3.0, 30.0).unwrap().holds);
        assert!(compare_power_vs_chi2(2, 2.0, 1.0).is_err());
        for t in [2.01, 2.5, 3.0, 10.0, 100.0] {
            assert!(compare_power_vs_chi2(1, t, 0.0).unwrap().threshold > 0.0);
        }
    }

    #[test]
    fn chi2_vs_mi_crossover_location() {
        let c = compare_chi2_vs_mi(1e6).unwrap();
        assert!(c.holds);
        assert!(c.crossover > 90.0 && c.crossover < 100.0);
        assert!(chi2_vs_mi_margin(c.crossover).abs() < 1e-9);
        assert_eq!(c.stated_threshold, 94.0);
        assert!(c.margin_at_stated_threshold < 0.0);
        assert!(c.margin_at_stated_threshold > -0.01 * 81.0);
        assert!(!compare_chi2_vs_mi(0.0).unwrap().holds);
    }
}
