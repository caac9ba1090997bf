//! KL, Rényi, power and chi-square divergences between finite laws.
//!
//! All logarithms are natural. Terms where both laws put zero mass
//! contribute nothing; mass of `p` where `q` has none is an error.

use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;

/// Likelihood ratios above this are raised to powers in log space.
const LOG_SPACE_RATIO: f64 = 1e15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    Kl,
    Renyi,
    Power,
    ChiSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    pub value: f64,
    pub kind: DivergenceKind,
    /// α for Rényi, t for power, 2 for chi-square.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
}

/// Pairs up the masses of `p` and `q` over the union of their atoms.
fn align(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<Vec<(f64, f64)>> {
    let (pa, pp) = (p.atoms(), p.probs());
    let (qa, qp) = (q.atoms(), q.probs());
    let mut out = Vec::with_capacity(pa.len().max(qa.len()));
    let (mut i, mut j) = (0, 0);
    while i < pa.len() || j < qa.len() {
        let ord = match (pa.get(i), qa.get(j)) {
            (Some(a), Some(b)) => a.total_cmp(b),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        match ord {
            std::cmp::Ordering::Less => {
                if pp[i] > 0.0 {
                    return Err(Error::NotAbsolutelyContinuous {
                        atom: pa[i],
                        p_mass: pp[i],
                    });
                }
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((0.0, qp[j]));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                if pp[i] > 0.0 && qp[j] == 0.0 {
                    return Err(Error::NotAbsolutelyContinuous {
                        atom: pa[i],
                        p_mass: pp[i],
                    });
                }
                out.push((pp[i], qp[j]));
                i += 1;
                j += 1;
            }
        }
    }
    Ok(out)
}

fn check_slices(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch(format!(
            "p has {} atoms, q has {}",
            p.len(),
            q.len()
        )));
    }
    if p.is_empty() {
        return Err(Error::EmptyInput);
    }
    for (i, (&a, &b)) in p.iter().zip(q).enumerate() {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite("probability vector"));
        }
        if a < 0.0 || b < 0.0 {
            return Err(Error::NegativeProbability {
                index: i,
                value: a.min(b),
            });
        }
        if a > 0.0 && b == 0.0 {
            return Err(Error::NotAbsolutelyContinuous {
                atom: i as f64,
                p_mass: a,
            });
        }
    }
    Ok(())
}

fn kl_terms(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut acc = CompensatedSum::new();
    for (p, q) in pairs {
        if p == 0.0 {
            continue;
        }
        let r = p / q;
        let log_ratio = if r.is_finite() && r > 0.0 {
            r.ln()
        } else {
            p.ln() - q.ln()
        };
        acc.add(p * log_ratio);
    }
    acc.value().max(0.0)
}

/// `q·(p/q)^t`, switching to log space for extreme ratios.
#[inline]
pub(crate) fn weighted_ratio_power(p: f64, q: f64, t: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    let r = p / q;
    if r > LOG_SPACE_RATIO || !r.is_finite() {
        (t * p.ln() - (t - 1.0) * q.ln()).exp()
    } else {
        q * r.powf(t)
    }
}

fn power_terms(pairs: impl Iterator<Item = (f64, f64)>, t: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for (p, q) in pairs {
        if q == 0.0 {
            continue;
        }
        if p == q {
            continue;
        }
        acc.add(weighted_ratio_power(p, q, t) - q);
    }
    acc.value().max(0.0)
}

/// `ln Σ q (p/q)^α` by log-sum-exp, for when the power divergence overflows.
fn log_power_moment(pairs: &[(f64, f64)], alpha: f64) -> f64 {
    let logs: Vec<f64> = pairs
        .iter()
        .filter(|(p, q)| *p > 0.0 && *q > 0.0)
        .map(|(p, q)| alpha * p.ln() - (alpha - 1.0) * q.ln())
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    max + s.ln()
}

fn check_power_order(t: f64) -> Result<()> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "power divergence order must be > 1, got {t}"
        )));
    }
    Ok(())
}

fn renyi_from_pairs(pairs: &[(f64, f64)], alpha: f64) -> f64 {
    if alpha == 1.0 {
        return kl_terms(pairs.iter().copied());
    }
    let power = power_terms(pairs.iter().copied(), alpha);
    let v = if power.is_finite() {
        power.ln_1p() / (alpha - 1.0)
    } else {
        log_power_moment(pairs, alpha) / (alpha - 1.0)
    };
    v.max(0.0)
}

/// `D_KL(p ‖ q) = Σ p ln(p/q)` in nats.
pub fn kl_divergence(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<DivergenceValue> {
    let pairs = align(p, q)?;
    Ok(DivergenceValue {
        value: kl_terms(pairs.into_iter()),
        kind: DivergenceKind::Kl,
        order: None,
    })
}

/// `D_P^(t)(p ‖ q) = Σ ((p/q)^t − 1) q` for `t > 1`.
pub fn power_divergence(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    t: f64,
) -> Result<DivergenceValue> {
    check_power_order(t)?;
    let pairs = align(p, q)?;
    Ok(DivergenceValue {
        value: power_terms(pairs.into_iter(), t),
        kind: DivergenceKind::Power,
        order: Some(t),
    })
}

/// Chi-square divergence; the power divergence of order 2.
pub fn chi_square_divergence(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<DivergenceValue> {
    let v = power_divergence(p, q, 2.0)?;
    Ok(DivergenceValue {
        kind: DivergenceKind::ChiSquare,
        ..v
    })
}

/// Rényi divergence of order `alpha ≥ 1`; order 1 is KL.
pub fn renyi_divergence(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    alpha: f64,
) -> Result<DivergenceValue> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Rényi order must be >= 1, got {alpha}"
        )));
    }
    let pairs = align(p, q)?;
    Ok(DivergenceValue {
        value: renyi_from_pairs(&pairs, alpha),
        kind: DivergenceKind::Renyi,
        order: Some(alpha),
    })
}

/// Dispatches on `kind`. `order` is required for Rényi and power.
pub fn divergence(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    kind: DivergenceKind,
    order: Option<f64>,
) -> Result<DivergenceValue> {
    let need = |what: &str| {
        order.ok_or_else(|| Error::InvalidParameter(format!("{what} divergence needs an order")))
    };
    match kind {
        DivergenceKind::Kl => kl_divergence(p, q),
        DivergenceKind::ChiSquare => chi_square_divergence(p, q),
        DivergenceKind::Power => power_divergence(p, q, need("power")?),
        DivergenceKind::Renyi => renyi_divergence(p, q, need("Rényi")?),
    }
}

/// Probability-vector forms on an implicit common support.
pub mod vectors {
    use super::*;

    pub fn kl(p: &[f64], q: &[f64]) -> Result<f64> {
        check_slices(p, q)?;
        Ok(kl_terms(p.iter().copied().zip(q.iter().copied())))
    }

    pub fn power(p: &[f64], q: &[f64], t: f64) -> Result<f64> {
        check_power_order(t)?;
        check_slices(p, q)?;
        Ok(power_terms(p.iter().copied().zip(q.iter().copied()), t))
    }

    pub fn chi_square(p: &[f64], q: &[f64]) -> Result<f64> {
        power(p, q, 2.0)
    }

    pub fn renyi(p: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Rényi order must be >= 1, got {alpha}"
            )));
        }
        check_slices(p, q)?;
        let pairs: Vec<_> = p.iter().copied().zip(q.iter().copied()).collect();
        Ok(renyi_from_pairs(&pairs, alpha))
    }
}
