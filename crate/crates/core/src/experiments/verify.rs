//! Executable checks of every bound and information inequality on a
//! battery of enumerated models.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::battery::{generate_battery, BatteryConfig, BatteryModel};
use crate::bounds::{
    chi2_power_chain, compare_power_vs_chi2, expected_gen_bound, highprob_bound_chi2,
    highprob_bound_power, highprob_bound_renyi, mi_chi2_chain, moment_bound_chi2,
    moment_bound_power, moment_bound_ratio, second_moment_bound_mi_with, verify_theorem1,
    BoundReport, MiBoundConstants, ValidityMode,
};
use crate::distributions::DEFAULT_ENUMERATION_CAP;
use crate::error::{Error, Result};
use crate::information::{
    build_joint, chi_square_information, max_density_ratio, mutual_information,
    power_information, JointDistribution, DEFAULT_W_ROUND_DIGITS,
};
use crate::risk::{exact_exceedance_mass, gen_moments_exact, gen_moments_mc, LearningModel};

/// Absolute slack for moment and coverage checks.
pub const SOUNDNESS_TOL: f64 = 1e-9;
/// Absolute slack for the information chains.
pub const CHAIN_TOL: f64 = 1e-12;
/// Relative slack for the specialization identities.
pub const IDENTITY_TOL: f64 = 1e-12;

const ORDERS: [u32; 4] = [1, 2, 3, 4];
/// Orders `t` of power information tried in the moment bounds. Together
/// with m = 1..4 they give strict-valid and relaxed-only parameter sets.
const POWER_ORDERS: [f64; 5] = [1.5, 2.0, 3.0, 4.0, 5.0];

fn default_deltas() -> Vec<f64> {
    vec![0.1, 0.05, 0.01]
}

/// Options of [`run_verification_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOptions {
    #[serde(default)]
    pub battery: BatteryConfig,
    /// Which side conditions gate a bound before it is checked.
    #[serde(default)]
    pub mode: ValidityMode,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    /// Coefficients of the mutual-information bound under test.
    #[serde(default)]
    pub mi_constants: MiBoundConstants,
    /// When set, also compare Monte Carlo moments with this many draws
    /// against the exact ones at 4 standard errors.
    #[serde(default)]
    pub mc_replicates: Option<u64>,
    #[serde(default)]
    pub mc_seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

/// One violated inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub model: String,
    pub parameters: String,
    pub lhs: f64,
    pub rhs: f64,
}

/// Counts for one family of checks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub evaluated: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub models: usize,
    pub mode: ValidityMode,
    pub checks: BTreeMap<String, CheckSummary>,
    pub violations: Vec<Violation>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn summary(&self, check: &str) -> CheckSummary {
        self.checks.get(check).cloned().unwrap_or_default()
    }
}

struct Recorder<'a> {
    model: &'a str,
    checks: &'a mut BTreeMap<String, CheckSummary>,
    violations: &'a mut Vec<Violation>,
}

impl Recorder<'_> {
    /// Records `lhs <= rhs + tol`.
    fn le(&mut self, check: &str, parameters: impl FnOnce() -> String, lhs: f64, rhs: f64, tol: f64) {
        let entry = self.checks.entry(check.to_string()).or_default();
        entry.evaluated += 1;
        let ok = lhs <= rhs + tol;
        if !ok {
            entry.violations += 1;
            self.violations.push(Violation {
                check: check.to_string(),
                model: self.model.to_string(),
                parameters: parameters(),
                lhs,
                rhs,
            });
        }
    }

    /// Records `|a − b| <= tol·max(1, |a|, |b|)`.
    fn close(&mut self, check: &str, parameters: impl FnOnce() -> String, a: f64, b: f64, tol: f64) {
        let scale = 1f64.max(a.abs()).max(b.abs());
        self.le(check, parameters, (a - b).abs(), tol * scale, 0.0);
    }
}

/// Information measures of one joint, computed once.
struct JointInfo {
    chi2: f64,
    mi: f64,
    ratio: f64,
    power: Vec<(f64, f64)>,
}

impl JointInfo {
    fn new(joint: &JointDistribution) -> Result<Self> {
        let mut orders: Vec<f64> = POWER_ORDERS.to_vec();
        orders.extend([2.0, 3.0, 4.0]);
        orders.sort_by(f64::total_cmp);
        orders.dedup();
        let power = orders
            .into_iter()
            .map(|t| Ok((t, power_information(joint, t)?.value)))
            .collect::<Result<_>>()?;
        Ok(Self {
            chi2: chi_square_information(joint).value,
            mi: mutual_information(joint).value,
            ratio: max_density_ratio(joint),
            power,
        })
    }

    fn power(&self, t: f64) -> f64 {
        self.power
            .iter()
            .find(|(o, _)| *o == t)
            .map(|(_, v)| *v)
            .expect("order precomputed")
    }
}

/// Runs every check on every battery model.
pub fn run_verification_suite(options: &VerifyOptions) -> Result<VerificationReport> {
    let battery = generate_battery(&options.battery)?;
    verify_models(&battery, options)
}

/// Runs every check on the given models.
pub fn verify_models(models: &[BatteryModel], options: &VerifyOptions) -> Result<VerificationReport> {
    if models.is_empty() {
        return Err(Error::NoModels);
    }
    for &d in &options.deltas {
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must be in (0, 1), got {d}")));
        }
    }
    let mut checks = BTreeMap::new();
    let mut violations = Vec::new();
    for (i, entry) in models.iter().enumerate() {
        let model = LearningModel::from_spec(&entry.spec)?;
        let joint = build_joint(
            entry.spec.data.as_discrete().ok_or_else(|| {
                Error::InvalidParameter(format!("battery model {} has non-discrete data", entry.label))
            })?,
            model.n,
            &entry.spec.kernel,
            DEFAULT_W_ROUND_DIGITS,
            DEFAULT_ENUMERATION_CAP,
        )?;
        let mut rec = Recorder {
            model: &entry.label,
            checks: &mut checks,
            violations: &mut violations,
        };
        check_model(&mut rec, &model, &joint, options, i as u64)?;
    }
    let passed = violations.is_empty();
    Ok(VerificationReport {
        models: models.len(),
        mode: options.mode,
        checks,
        violations,
        passed,
    })
}

fn check_model(
    rec: &mut Recorder<'_>,
    model: &LearningModel,
    joint: &JointDistribution,
    options: &VerifyOptions,
    index: u64,
) -> Result<()> {
    let info = JointInfo::new(joint)?;
    let sigma = model.sigma();
    let n = model.n;
    let mode = options.mode;

    // change of measure
    for m in ORDERS {
        for t in [2.0, 3.0] {
            let c = verify_theorem1(model, joint, |x, y| (x - y).powi(m as i32), t)?;
            rec.le("theorem1", || format!("m={m} t={t}"), c.lhs, c.rhs, SOUNDNESS_TOL);
        }
    }

    // moment bounds
    let exact = gen_moments_exact(model, &ORDERS, DEFAULT_ENUMERATION_CAP)?;
    for est in &exact {
        let m = est.order;
        let moment = est.value.abs();
        let mut check = |name: &str, r: BoundReport, detail: String| {
            if r.valid_in(mode) {
                rec.le(name, || detail, moment, r.value, SOUNDNESS_TOL);
            }
        };
        for t in POWER_ORDERS {
            let r = moment_bound_power(sigma, n, m, t, info.power(t), mode)?;
            check("moment_power", r, format!("m={m} t={t} I_P={}", info.power(t)));
        }
        let r = moment_bound_chi2(sigma, n, m, info.chi2, mode)?;
        check("moment_chi2", r, format!("m={m} I_chi2={}", info.chi2));
        let r = moment_bound_ratio(sigma, n, m, info.ratio, mode)?;
        check("moment_ratio", r, format!("m={m} R={}", info.ratio));
        if m == 1 {
            for q in [2u32, 3] {
                let t = q as f64 / (q as f64 - 1.0);
                let r = expected_gen_bound(sigma, n, q, info.power(t), mode)?;
                check("expected_gen", r, format!("q={q}"));
            }
        }
        if m == 2 {
            let r = second_moment_bound_mi_with(sigma, n, info.mi, options.mi_constants)?;
            rec.le(
                "second_moment_mi",
                || format!("I={} constants={:?}", info.mi, options.mi_constants),
                est.value,
                r.value,
                SOUNDNESS_TOL,
            );
        }
    }

    // information chains
    for t in [3.0, 4.0] {
        let (lhs, rhs) = chi2_power_chain(joint, t)?;
        rec.le("chain_chi2_power", || format!("t={t}"), lhs, rhs, CHAIN_TOL);
    }
    let (mi, log_chi) = mi_chi2_chain(joint);
    rec.le("chain_mi_chi2", || "".into(), mi, log_chi, CHAIN_TOL);
    for (t, pt) in &info.power {
        let cap = info.ratio.powf(*t) - 1.0;
        rec.le(
            "power_vs_ratio",
            || format!("t={t} R={}", info.ratio),
            *pt,
            cap,
            CHAIN_TOL * cap.abs().max(1.0),
        );
    }

    // single-draw bounds
    for &delta in &options.deltas {
        let mut reports = vec![highprob_bound_chi2(sigma, n, delta, info.chi2, mode)?];
        for t in [3.0, 4.0] {
            reports.push(highprob_bound_power(sigma, n, t, delta, info.power(t), mode)?);
            let d_alpha = info.power(t).ln_1p() / (t - 1.0);
            reports.push(highprob_bound_renyi(sigma, n, t, delta, d_alpha, mode)?);
        }
        for r in reports {
            if r.valid_in(mode) {
                let mass = exact_exceedance_mass(model, r.value, DEFAULT_ENUMERATION_CAP)?;
                rec.le(
                    "highprob_coverage",
                    || format!("{:?} delta={delta} bound={}", r.theorem, r.value),
                    mass,
                    delta,
                    SOUNDNESS_TOL,
                );
            }
        }
    }

    // ordering of chi-square and power moment bounds
    for m in ORDERS {
        for t in [3.0, 4.0] {
            let cmp = compare_power_vs_chi2(m, t, info.power(t))?;
            if cmp.holds {
                let chi = moment_bound_chi2(sigma, n, m, info.chi2, mode)?.value;
                let pow = moment_bound_power(sigma, n, m, t, info.power(t), mode)?.value;
                rec.le(
                    "power_vs_chi2_ordering",
                    || format!("m={m} t={t} threshold={}", cmp.threshold),
                    chi,
                    pow,
                    IDENTITY_TOL * pow,
                );
            }
        }
    }

    check_identities(rec, sigma, n, &info, mode)?;

    if let Some(reps) = options.mc_replicates {
        let seed = options.mc_seed.wrapping_add(index.wrapping_mul(reps));
        let mc = gen_moments_mc(model, &ORDERS, reps, seed)?;
        for (e, s) in exact.iter().zip(&mc) {
            let m = e.order;
            rec.le(
                "mc_vs_exact",
                || format!("m={m} stderr={} replicates={reps}", s.stderr),
                (s.value - e.value).abs(),
                4.0 * s.stderr,
                CHAIN_TOL,
            );
        }
    }
    Ok(())
}

fn check_identities(
    rec: &mut Recorder<'_>,
    sigma: f64,
    n: usize,
    info: &JointInfo,
    mode: ValidityMode,
) -> Result<()> {
    for m in ORDERS {
        let a = moment_bound_chi2(sigma, n, m, info.chi2, mode)?.value;
        let b = moment_bound_power(sigma, n, m, 2.0, info.chi2, mode)?.value;
        rec.close("identity_cor1", || format!("m={m}"), a, b, IDENTITY_TOL);
    }
    for q in [2u32, 3] {
        let t = q as f64 / (q as f64 - 1.0);
        let a = expected_gen_bound(sigma, n, q, info.power(t), mode)?.value;
        let b = moment_bound_power(sigma, n, 1, t, info.power(t), mode)?.value;
        rec.close("identity_cor2", || format!("q={q}"), a, b, IDENTITY_TOL);
    }
    for delta in [0.1, 0.01] {
        let a = highprob_bound_chi2(sigma, n, delta, info.chi2, mode)?.value;
        let b = highprob_bound_power(sigma, n, 2.0, delta, info.chi2, mode)?.value;
        rec.close("identity_cor3", || format!("delta={delta}"), a, b, IDENTITY_TOL);
    }
    // monotonicity in the information argument and in n
    for m in ORDERS {
        let lo = moment_bound_chi2(sigma, n, m, info.chi2, mode)?.value;
        let hi = moment_bound_chi2(sigma, n, m, info.chi2 * 1.5 + 0.1, mode)?.value;
        rec.le("monotone_info", || format!("m={m}"), lo, hi, 0.0);
        let more = moment_bound_chi2(sigma, n + 1, m, info.chi2, mode)?.value;
        rec.le("monotone_n", || format!("m={m}"), more, lo, 0.0);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(random: usize) -> VerifyOptions {
        VerifyOptions {
            battery: BatteryConfig {
                random_models: random,
                max_n: 3,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn empty_battery() {
        let mut o = small(0);
        o.battery.include_fixed = false;
        let err = run_verification_suite(&o).unwrap_err();
        assert_eq!(err.to_string(), "no models");
    }

    #[test]
    fn small_battery_passes() {
        let report = run_verification_suite(&small(10)).unwrap();
        assert!(report.passed, "{:?}", report.violations);
        assert!(report.summary("theorem1").evaluated > 0);
        assert!(report.summary("highprob_coverage").evaluated > 0);
    }

    #[test]
    fn mutated_constant_is_caught() {
        let mut o = small(0);
        o.mi_constants = MiBoundConstants {
            slope: 16.0,
            offset: 0.9,
        };
        let report = run_verification_suite(&o).unwrap();
        assert!(!report.passed);
        assert!(report.violations.iter().all(|v| v.check == "second_moment_mi"));
    }
}
