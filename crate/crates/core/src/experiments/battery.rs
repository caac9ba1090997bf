//! Enumerable models used to exercise the bounds.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{make_discrete, seeded_rng, DataLaw, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::information::KernelSpec;
use crate::risk::{LossKind, LossSpec, ModelSpec};

fn default_random_models() -> usize {
    100
}
fn default_min_k() -> usize {
    2
}
fn default_max_k() -> usize {
    4
}
fn default_max_n() -> usize {
    6
}
fn default_seed() -> u64 {
    7
}
fn default_true() -> bool {
    true
}

/// How the battery is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    #[serde(default = "default_random_models")]
    pub random_models: usize,
    #[serde(default = "default_min_k")]
    pub min_k: usize,
    #[serde(default = "default_max_k")]
    pub max_k: usize,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Prepend the hand-picked edge models.
    #[serde(default = "default_true")]
    pub include_fixed: bool,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

/// One labelled battery entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryModel {
    pub label: String,
    pub spec: ModelSpec,
}

fn discrete(atoms: &[f64], probs: &[f64]) -> DataLaw {
    DataLaw::Discrete(make_discrete(atoms, probs).expect("valid fixed model"))
}

fn truncated(c: f64) -> LossSpec {
    LossSpec::new(LossKind::TruncatedSquare { c }).expect("c > 0")
}

/// Hand-picked models covering independence, deterministic learners and
/// a loss whose generalization error has variance exactly `σ²/n`.
pub fn fixed_models() -> Vec<BatteryModel> {
    let coin = discrete(&[0.0, 1.0], &[0.5, 0.5]);
    let three = discrete(&[-1.0, 0.0, 2.0], &[0.2, 0.5, 0.3]);
    let entry = |label: &str, data: &DataLaw, n, kernel, loss| BatteryModel {
        label: label.to_string(),
        spec: ModelSpec {
            data: data.clone(),
            n,
            kernel,
            loss,
        },
    };
    let mut out = Vec::new();
    for n in [1, 2, 4] {
        // 0/1 loss with variance B²/4: E[gen²] = σ²/n
        out.push(entry(
            &format!("fixed:coin-constant n={n}"),
            &coin,
            n,
            KernelSpec::Constant { w: 0.0 },
            truncated(1.0),
        ));
    }
    out.push(entry(
        "fixed:point-mass",
        &discrete(&[0.25], &[1.0]),
        3,
        KernelSpec::SampleMean,
        truncated(1.0),
    ));
    for n in [1, 3, 5] {
        out.push(entry(
            &format!("fixed:coin-mean n={n}"),
            &coin,
            n,
            KernelSpec::SampleMean,
            truncated(2.0 / 3.0),
        ));
    }
    out.push(entry(
        "fixed:three-noisy",
        &three,
        3,
        KernelSpec::NoisySampleMean {
            noise: make_discrete(&[-0.5, 0.0, 0.5], &[0.25, 0.5, 0.25]).expect("valid"),
        },
        LossSpec::new(LossKind::ClippedAbsolute { c: 1.5 }).expect("c > 0"),
    ));
    out.push(entry(
        "fixed:three-gibbs",
        &three,
        4,
        KernelSpec::Gibbs {
            grid: vec![-1.0, -0.5, 0.0, 0.5, 1.0, 1.5],
            inverse_temperature: 2.0,
            c: 1.0,
        },
        truncated(1.0),
    ));
    out
}

fn random_distribution<R: Rng>(rng: &mut R, k: usize) -> DiscreteDistribution {
    let mut atoms: Vec<f64> = Vec::with_capacity(k);
    while atoms.len() < k {
        let a = (rng.random_range(-1.5..1.5) * 1000.0f64).round() / 1000.0;
        if !atoms.contains(&a) {
            atoms.push(a);
        }
    }
    let probs: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    make_discrete(&atoms, &probs).expect("positive weights on distinct atoms")
}

fn random_kernel<R: Rng>(rng: &mut R) -> KernelSpec {
    match rng.random_range(0..4u32) {
        0 => KernelSpec::Constant {
            w: rng.random_range(-1.0..1.0),
        },
        1 => KernelSpec::SampleMean,
        2 => {
            let k = rng.random_range(2..=3usize);
            KernelSpec::NoisySampleMean {
                noise: random_distribution(rng, k),
            }
        }
        _ => {
            let k = rng.random_range(3..=6usize);
            let grid: Vec<f64> = (0..k).map(|i| -1.5 + 3.0 * i as f64 / (k - 1) as f64).collect();
            KernelSpec::Gibbs {
                grid,
                inverse_temperature: rng.random_range(0.2..4.0),
                c: rng.random_range(0.5..2.0),
            }
        }
    }
}

fn kernel_name(k: &KernelSpec) -> &'static str {
    match k {
        KernelSpec::Constant { .. } => "constant",
        KernelSpec::SampleMean => "mean",
        KernelSpec::NoisySampleMean { .. } => "noisy-mean",
        KernelSpec::Gibbs { .. } => "gibbs",
    }
}

/// Random discrete models; entry `i` depends only on `seed + i`.
pub fn random_models(config: &BatteryConfig) -> Result<Vec<BatteryModel>> {
    if config.min_k < 1 || config.min_k > config.max_k {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= min_k <= max_k, got {}..{}",
            config.min_k, config.max_k
        )));
    }
    if config.max_n < 1 {
        return Err(Error::InvalidParameter("max_n must be >= 1".into()));
    }
    Ok((0..config.random_models)
        .map(|i| {
            let mut rng = seeded_rng(config.seed.wrapping_add(i as u64));
            let k = rng.random_range(config.min_k..=config.max_k);
            let n = rng.random_range(1..=config.max_n);
            let data = random_distribution(&mut rng, k);
            let kernel = random_kernel(&mut rng);
            let c = rng.random_range(0.5..2.0);
            let loss = if rng.random_bool(0.75) {
                LossSpec::new(LossKind::TruncatedSquare { c })
            } else {
                LossSpec::new(LossKind::ClippedAbsolute { c })
            }
            .expect("c > 0");
            BatteryModel {
                label: format!("random#{i} K={k} n={n} kernel={}", kernel_name(&kernel)),
                spec: ModelSpec {
                    data: DataLaw::Discrete(data),
                    n,
                    kernel,
                    loss,
                },
            }
        })
        .collect())
}

/// Fixed models (if enabled) followed by the random ones.
pub fn generate_battery(config: &BatteryConfig) -> Result<Vec<BatteryModel>> {
    let mut out = if config.include_fixed {
        fixed_models()
    } else {
        Vec::new()
    };
    out.extend(random_models(config)?);
    Ok(out)
}
