//! Losses, population and empirical risk, and moments of the
//! generalization error by exact enumeration or Monte Carlo.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distributions::{
    enumerate_training_sets, normal_cdf, normal_pdf, seeded_rng, DataLaw, DiscreteDistribution,
    GaussianSpec, DEFAULT_ENUMERATION_CAP,
};
use crate::error::{Error, Result};
use crate::information::{KernelSpec, LearningKernel};
use crate::numerics::{compensated_sum, CompensatedSum};

/// Shape of a bounded loss `ℓ(w, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossKind {
    /// `min((w − z)², c²)`.
    TruncatedSquare { c: f64 },
    /// `min(|w − z|, c)`.
    ClippedAbsolute { c: f64 },
    /// The same value everywhere.
    Constant { value: f64 },
}

/// A loss bounded in `[0, B]`, which makes it `B/2`-subgaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LossKind", into = "LossKind")]
pub struct LossSpec {
    kind: LossKind,
    upper_bound: f64,
}

impl TryFrom<LossKind> for LossSpec {
    type Error = Error;

    fn try_from(kind: LossKind) -> Result<Self> {
        LossSpec::new(kind)
    }
}

impl From<LossSpec> for LossKind {
    fn from(l: LossSpec) -> Self {
        l.kind
    }
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
            }
        };
        let upper_bound = match kind {
            LossKind::TruncatedSquare { c } => {
                positive("c", c)?;
                c * c
            }
            LossKind::ClippedAbsolute { c } => {
                positive("c", c)?;
                c
            }
            LossKind::Constant { value } => {
                positive("constant loss", value)?;
                value
            }
        };
        Ok(Self { kind, upper_bound })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    /// `B`, the supremum of the loss.
    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    /// Subgaussian parameter `B/2`.
    pub fn sigma(&self) -> f64 {
        self.upper_bound / 2.0
    }

    #[inline]
    pub fn evaluate(&self, w: f64, z: f64) -> f64 {
        match self.kind {
            LossKind::TruncatedSquare { c } => {
                let d = w - z;
                (d * d).min(c * c)
            }
            LossKind::ClippedAbsolute { c } => (w - z).abs().min(c),
            LossKind::Constant { value } => value,
        }
    }
}

/// `min((w − z)², c²)`.
pub fn truncated_square_loss(c: f64) -> Result<LossSpec> {
    LossSpec::new(LossKind::TruncatedSquare { c })
}

/// `L_P(w)`: expected loss of `w` under the data law.
pub fn population_risk(loss: &LossSpec, data: &DataLaw, w: f64) -> Result<f64> {
    match data {
        DataLaw::Discrete(d) => Ok(discrete_population_risk(loss, d, w)),
        DataLaw::Gaussian(g) => match loss.kind() {
            LossKind::TruncatedSquare { c } => Ok(gaussian_truncated_square_risk(g, c, w)),
            LossKind::Constant { value } => Ok(value),
            LossKind::ClippedAbsolute { .. } => Err(Error::NoExactEvaluator(
                "clipped absolute loss under Gaussian data".into(),
            )),
        },
    }
}

fn discrete_population_risk(loss: &LossSpec, d: &DiscreteDistribution, w: f64) -> f64 {
    compensated_sum(d.iter().map(|(z, p)| p * loss.evaluate(w, z)))
}

/// Closed form of `E[min((w − Z)², c²)]` for `Z ~ N(μ, s²)`.
///
/// With `X = Z − w ~ N(d, s²)` and standardised limits `a, b` of
/// `[−c, c]`, the truncated second moment is
/// `d²·M + 2ds(φ(a) − φ(b)) + s²(M + aφ(a) − bφ(b))` where `M` is the
/// interval mass; the tails contribute `c²(1 − M)`.
pub fn gaussian_truncated_square_risk(g: &GaussianSpec, c: f64, w: f64) -> f64 {
    let s = g.std_dev();
    let d = g.mean() - w;
    let a = (-c - d) / s;
    let b = (c - d) / s;
    let (pa, pb) = (normal_pdf(a), normal_pdf(b));
    // upper-tail form keeps the mass accurate far from the mean
    let mass = if a >= 0.0 {
        normal_cdf(-a) - normal_cdf(-b)
    } else if b <= 0.0 {
        normal_cdf(b) - normal_cdf(a)
    } else {
        1.0 - (normal_cdf(a) + normal_cdf(-b))
    };
    let tail = if a < 0.0 && b > 0.0 {
        normal_cdf(a) + normal_cdf(-b)
    } else {
        1.0 - mass
    };
    let inner = d * d * mass + 2.0 * d * s * (pa - pb) + s * s * (mass + a * pa - b * pb);
    inner.max(0.0) + c * c * tail
}

/// `L_E(w, s)`: average loss over the training set.
pub fn empirical_risk(loss: &LossSpec, w: f64, sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(mean_loss(loss, w, sample))
}

#[inline]
fn mean_loss(loss: &LossSpec, w: f64, sample: &[f64]) -> f64 {
    sample.iter().map(|&z| loss.evaluate(w, z)).sum::<f64>() / sample.len() as f64
}

/// Serialisable description of a [`LearningModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub data: DataLaw,
    pub n: usize,
    pub kernel: KernelSpec,
    pub loss: LossSpec,
}

/// Data law, sample size, learning kernel and loss: one experiment instance.
#[derive(Clone)]
pub struct LearningModel {
    pub data: DataLaw,
    pub n: usize,
    pub kernel: Arc<dyn LearningKernel>,
    pub loss: LossSpec,
}

impl std::fmt::Debug for LearningModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LearningModel")
            .field("data", &self.data)
            .field("n", &self.n)
            .field("loss", &self.loss)
            .finish_non_exhaustive()
    }
}

impl LearningModel {
    pub fn new(
        data: impl Into<DataLaw>,
        n: usize,
        kernel: Arc<dyn LearningKernel>,
        loss: LossSpec,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        Ok(Self {
            data: data.into(),
            n,
            kernel,
            loss,
        })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        Self::new(
            spec.data.clone(),
            spec.n,
            Arc::new(spec.kernel.clone()),
            spec.loss,
        )
    }

    pub fn sigma(&self) -> f64 {
        self.loss.sigma()
    }

    pub fn population_risk(&self, w: f64) -> Result<f64> {
        population_risk(&self.loss, &self.data, w)
    }

    /// `gen = L_P(w) − L_E(w, s)`.
    pub fn gen_value(&self, w: f64, sample: &[f64]) -> Result<f64> {
        Ok(self.population_risk(w)? - empirical_risk(&self.loss, w, sample)?)
    }

    fn discrete_data(&self) -> Result<&DiscreteDistribution> {
        self.data.as_discrete().ok_or_else(|| {
            Error::NoExactEvaluator("exact enumeration needs discrete data".into())
        })
    }
}

/// `gen = L_P(w) − L_E(w, s)` for a model.
pub fn gen_value(model: &LearningModel, w: f64, sample: &[f64]) -> Result<f64> {
    model.gen_value(w, sample)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub order: u32,
    pub value: f64,
    pub method: MomentMethod,
    /// Standard error; zero for exact values.
    pub stderr: f64,
    pub samples: u64,
    /// Set when the standard error could not be estimated (one replicate).
    pub stderr_unavailable: bool,
}

fn check_orders(orders: &[u32]) -> Result<()> {
    if orders.is_empty() {
        return Err(Error::EmptyInput);
    }
    if orders.contains(&0) {
        return Err(Error::InvalidParameter("moment order must be >= 1".into()));
    }
    Ok(())
}

/// Visits every `(P(s)·P(w|s), gen)` pair of an enumerable discrete model.
pub fn for_each_gen_exact<F: FnMut(f64, f64)>(
    model: &LearningModel,
    cap: u64,
    mut f: F,
) -> Result<()> {
    let d = model.discrete_data()?;
    let sets = enumerate_training_sets(d, model.n, cap)?;
    let mut values = vec![0.0; model.n];
    let mut result = Ok(());
    sets.for_each_ref(|idx, prob| {
        if result.is_err() || prob == 0.0 {
            return;
        }
        for (v, &i) in values.iter_mut().zip(idx) {
            *v = d.atoms()[i];
        }
        let mut visit = |w: f64, mass: f64| -> Result<()> {
            let lp = discrete_population_risk(&model.loss, d, w);
            f(mass, lp - mean_loss(&model.loss, w, &values));
            Ok(())
        };
        result = match model.kernel.deterministic(&values) {
            Some(w) => visit(w, prob),
            None => model.kernel.hypothesis_law(&values).and_then(|law| {
                law.iter()
                    .filter(|(_, c)| *c > 0.0)
                    .try_for_each(|(w, c)| visit(w, prob * c))
            }),
        };
    });
    result
}

/// Exact `E[gen^m]` for several orders in one enumeration pass.
pub fn gen_moments_exact(model: &LearningModel, orders: &[u32], cap: u64) -> Result<Vec<MomentEstimate>> {
    check_orders(orders)?;
    let mut acc = vec![CompensatedSum::new(); orders.len()];
    let mut count = 0u64;
    for_each_gen_exact(model, cap, |mass, g| {
        count += 1;
        for (a, &m) in acc.iter_mut().zip(orders) {
            a.add(mass * g.powi(m as i32));
        }
    })?;
    Ok(orders
        .iter()
        .zip(acc)
        .map(|(&order, a)| MomentEstimate {
            order,
            value: a.value(),
            method: MomentMethod::Exact,
            stderr: 0.0,
            samples: count,
            stderr_unavailable: false,
        })
        .collect())
}

/// Exact `E[gen^m]` under the joint law, by enumeration.
pub fn gen_moment_exact(model: &LearningModel, m: u32) -> Result<MomentEstimate> {
    Ok(gen_moments_exact(model, &[m], DEFAULT_ENUMERATION_CAP)?[0])
}

/// Exact `P(|gen| > level)` under the joint law.
pub fn exact_exceedance_mass(model: &LearningModel, level: f64, cap: u64) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for_each_gen_exact(model, cap, |mass, g| {
        if g.abs() > level {
            acc.add(mass);
        }
    })?;
    Ok(acc.value())
}

/// Draws `replicates` values of gen; replicate `r` uses seed `seed + r`.
pub fn gen_samples_mc(model: &LearningModel, replicates: u64, seed: u64) -> Result<Vec<f64>> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("replicates must be >= 1".into()));
    }
    // fail early on unsupported (data, loss) pairs
    model.population_risk(0.0)?;
    let sampler = model.data.sampler();
    let mut sample = vec![0.0; model.n];
    let mut out = Vec::with_capacity(replicates as usize);
    for r in 0..replicates {
        let mut rng = seeded_rng(seed.wrapping_add(r));
        sampler.fill(&mut rng, &mut sample);
        let w = model.kernel.draw(&sample, &mut rng)?;
        out.push(model.population_risk(w)? - mean_loss(&model.loss, w, &sample));
    }
    Ok(out)
}

/// Sample moments of `gens` with standard errors.
pub fn moments_from_samples(gens: &[f64], orders: &[u32]) -> Result<Vec<MomentEstimate>> {
    check_orders(orders)?;
    if gens.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = gens.len() as f64;
    Ok(orders
        .iter()
        .map(|&order| {
            let mean = compensated_sum(gens.iter().map(|g| g.powi(order as i32))) / n;
            let (stderr, unavailable) = if gens.len() < 2 {
                (0.0, true)
            } else {
                let ss = compensated_sum(gens.iter().map(|g| {
                    let d = g.powi(order as i32) - mean;
                    d * d
                }));
                ((ss / (n - 1.0)).sqrt() / n.sqrt(), false)
            };
            MomentEstimate {
                order,
                value: mean,
                method: MomentMethod::MonteCarlo,
                stderr,
                samples: gens.len() as u64,
                stderr_unavailable: unavailable,
            }
        })
        .collect())
}

/// Monte Carlo `E[gen^m]` for several orders from one set of draws.
pub fn gen_moments_mc(
    model: &LearningModel,
    orders: &[u32],
    replicates: u64,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    check_orders(orders)?;
    let gens = gen_samples_mc(model, replicates, seed)?;
    moments_from_samples(&gens, orders)
}

/// Monte Carlo `E[gen^m]`.
pub fn gen_moment_mc(model: &LearningModel, m: u32, replicates: u64, seed: u64) -> Result<MomentEstimate> {
    Ok(gen_moments_mc(model, &[m], replicates, seed)?[0])
}

/// Empirical `(1 − δ)`-quantile of `values` (order statistic
/// `⌈(1 − δ)N⌉`, clamped to the sample).
pub fn upper_quantile(values: &mut [f64], delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta must be in (0, 1], got {delta}")));
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let rank = ((1.0 - delta) * n as f64).ceil() as usize;
    Ok(values[rank.clamp(1, n) - 1])
}

/// Empirical `(1 − δ)`-quantile of `|gen|` over `replicates` draws.
pub fn gen_quantile_mc(model: &LearningModel, delta: f64, replicates: u64, seed: u64) -> Result<f64> {
    let mut abs: Vec<f64> = gen_samples_mc(model, replicates, seed)?
        .into_iter()
        .map(f64::abs)
        .collect();
    upper_quantile(&mut abs, delta)
}

/// `σ^k k^{k/2} e^{k/e}`: bound on `E|X|^k` for a σ-subgaussian `X`,
/// in the `(E|X|^k)^{1/k} ≤ σ e^{1/e} √k` form.
pub fn subgaussian_abs_moment_bound(sigma: f64, k: u32) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be >= 2, got {k}")));
    }
    let k = k as f64;
    Ok(sigma.powf(k) * k.powf(k / 2.0) * (k / std::f64::consts::E).exp())
}
