//! Data distributions: finite discrete laws, Gaussians, quantisation and
//! i.i.d. product spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, round_to_digits};

/// Decimal digits atoms are rounded to before duplicates are merged.
pub const ATOM_ROUND_DIGITS: i32 = 12;

/// Default cap on the number of enumerated training-set tuples.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Default half-width of the quantisation window, in standard deviations.
pub const DEFAULT_RANGE_SIGMAS: f64 = 4.0;

/// A probability law on finitely many real atoms.
///
/// Atoms are strictly increasing and probabilities sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDiscrete")]
pub struct DiscreteDistribution {
    atoms: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscrete {
    atoms: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawDiscrete> for DiscreteDistribution {
    type Error = Error;

    fn try_from(raw: RawDiscrete) -> Result<Self> {
        make_discrete(&raw.atoms, &raw.probs)
    }
}

/// Builds a canonical discrete distribution.
///
/// Atoms are rounded to [`ATOM_ROUND_DIGITS`] decimals, sorted, and
/// duplicates merged; probabilities are renormalised.
pub fn make_discrete(atoms: &[f64], probs: &[f64]) -> Result<DiscreteDistribution> {
    if atoms.is_empty() || probs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if atoms.len() != probs.len() {
        return Err(Error::LengthMismatch {
            what: "atoms and probs",
            left: atoms.len(),
            right: probs.len(),
        });
    }
    if atoms.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite("atoms"));
    }
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite("probs"));
        }
        if value < 0.0 {
            return Err(Error::NegativeProbability { index, value });
        }
    }
    let total = compensated_sum(probs.iter().copied());
    if total <= 0.0 {
        return Err(Error::ZeroMass);
    }

    let mut pairs: Vec<(f64, f64)> = atoms
        .iter()
        .zip(probs)
        .map(|(&a, &p)| (round_to_digits(a, ATOM_ROUND_DIGITS), p))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut out_atoms: Vec<f64> = Vec::with_capacity(pairs.len());
    let mut out_probs: Vec<f64> = Vec::with_capacity(pairs.len());
    for (a, p) in pairs {
        match out_atoms.last() {
            Some(&last) if last == a => *out_probs.last_mut().unwrap() += p,
            _ => {
                out_atoms.push(a);
                out_probs.push(p);
            }
        }
    }
    for p in &mut out_probs {
        *p /= total;
    }
    Ok(DiscreteDistribution {
        atoms: out_atoms,
        probs: out_probs,
    })
}

impl DiscreteDistribution {
    /// Unit mass at `atom`.
    pub fn point(atom: f64) -> Result<Self> {
        make_discrete(&[atom], &[1.0])
    }

    pub fn uniform(atoms: &[f64]) -> Result<Self> {
        make_discrete(atoms, &vec![1.0; atoms.len()])
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of atoms (K).
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.iter().map(|(a, p)| a * p))
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        compensated_sum(
            self.probs
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.ln()),
        )
    }

    /// Index of the atom equal to `value`, if any.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        let v = round_to_digits(value, ATOM_ROUND_DIGITS);
        self.atoms.binary_search_by(|a| a.total_cmp(&v)).ok()
    }

    /// Inverse-CDF sampler over the atoms.
    pub fn sampler(&self) -> DiscreteSampler<'_> {
        let mut acc = 0.0;
        let cumulative = self
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        DiscreteSampler {
            dist: self,
            cumulative,
        }
    }
}

/// Draws atoms from a [`DiscreteDistribution`] by inverse CDF.
#[derive(Debug, Clone)]
pub struct DiscreteSampler<'a> {
    dist: &'a DiscreteDistribution,
    cumulative: Vec<f64>,
}

impl DiscreteSampler<'_> {
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u: f64 = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.atoms[self.sample_index(rng)]
    }
}

/// Gaussian data law `N(mean, variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGaussian")]
pub struct GaussianSpec {
    mean: f64,
    variance: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGaussian {
    mean: f64,
    variance: f64,
}

impl TryFrom<RawGaussian> for GaussianSpec {
    type Error = Error;

    fn try_from(raw: RawGaussian) -> Result<Self> {
        GaussianSpec::new(raw.mean, raw.variance)
    }
}

impl GaussianSpec {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() {
            return Err(Error::NonFinite("gaussian parameters"));
        }
        if variance <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gaussian variance must be > 0, got {variance}"
            )));
        }
        Ok(Self { mean, variance })
    }

    pub fn standard() -> Self {
        Self {
            mean: 0.0,
            variance: 1.0,
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        normal_cdf((x - self.mean) / self.std_dev())
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Quantises a Gaussian onto `bins` equal-width cells spanning
/// `mean ± range_sigmas·σ`. Atoms sit at cell midpoints and carry the
/// renormalised Gaussian mass of their cell.
pub fn quantize_gaussian(
    g: &GaussianSpec,
    bins: usize,
    range_sigmas: f64,
) -> Result<DiscreteDistribution> {
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "quantisation needs at least 2 bins, got {bins}"
        )));
    }
    if !(range_sigmas > 0.0) || !range_sigmas.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "range_sigmas must be > 0, got {range_sigmas}"
        )));
    }
    let sd = g.std_dev();
    let width = 2.0 * range_sigmas / bins as f64;
    // Work in standard units so the masses are exactly mirror-symmetric.
    let edge = |i: usize| -range_sigmas + width * i as f64;
    let mut atoms = Vec::with_capacity(bins);
    let mut probs = Vec::with_capacity(bins);
    for i in 0..bins {
        let (lo, hi) = (edge(i), edge(i + 1));
        let mid = 0.5 * (lo + hi);
        atoms.push(g.mean() + sd * mid);
        probs.push(standard_interval_mass(lo, hi));
    }
    make_discrete(&atoms, &probs)
}

/// `Φ(hi) − Φ(lo)`, evaluated on the side of zero that avoids
/// cancellation. Mirror-image intervals get identical operations.
fn standard_interval_mass(lo: f64, hi: f64) -> f64 {
    if lo >= 0.0 {
        normal_cdf(-lo) - normal_cdf(-hi)
    } else if hi <= 0.0 {
        normal_cdf(hi) - normal_cdf(lo)
    } else {
        1.0 - (normal_cdf(lo) + normal_cdf(-hi))
    }
}

/// One ordered training set drawn from the product law.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSetRealization {
    /// Atom indices, one per example.
    pub indices: Vec<usize>,
    /// Product probability of the tuple.
    pub prob: f64,
}

/// Number of ordered tuples `K^n`, checked against `cap`.
pub fn enumeration_size(k: usize, n: usize, cap: u64) -> Result<u64> {
    let count = u32::try_from(n)
        .ok()
        .and_then(|e| (k as u128).checked_pow(e));
    match count {
        Some(c) if c <= cap as u128 => Ok(c as u64),
        Some(c) => Err(Error::EnumerationTooLarge {
            k,
            n,
            count: c.to_string(),
            cap,
        }),
        None => Err(Error::EnumerationTooLarge {
            k,
            n,
            count: "overflow".into(),
            cap,
        }),
    }
}

/// Enumerates every ordered tuple of `n` atoms in lexicographic order
/// (first example varies slowest).
pub fn enumerate_training_sets(
    d: &DiscreteDistribution,
    n: usize,
    cap: u64,
) -> Result<TrainingSets<'_>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let total = enumeration_size(d.len(), n, cap)?;
    Ok(TrainingSets {
        dist: d,
        current: vec![0; n],
        remaining: total,
    })
}

/// Iterator returned by [`enumerate_training_sets`].
#[derive(Debug, Clone)]
pub struct TrainingSets<'a> {
    dist: &'a DiscreteDistribution,
    current: Vec<usize>,
    remaining: u64,
}

impl TrainingSets<'_> {
    /// Total number of tuples still to be produced.
    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    /// Visits every remaining tuple without allocating per item.
    pub fn for_each_ref<F: FnMut(&[usize], f64)>(mut self, mut f: F) {
        let probs = self.dist.probs();
        while self.remaining > 0 {
            let prob = self.current.iter().map(|&i| probs[i]).product();
            f(&self.current, prob);
            self.advance();
        }
    }

    fn advance(&mut self) {
        self.remaining -= 1;
        if self.remaining == 0 {
            return;
        }
        let k = self.dist.len();
        for slot in self.current.iter_mut().rev() {
            *slot += 1;
            if *slot < k {
                return;
            }
            *slot = 0;
        }
    }
}

impl Iterator for TrainingSets<'_> {
    type Item = TrainingSetRealization;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        let probs = self.dist.probs();
        let item = TrainingSetRealization {
            indices: self.current.clone(),
            prob: self.current.iter().map(|&i| probs[i]).product(),
        };
        self.advance();
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (r, Some(r))
    }
}

/// Either kind of data law a model can draw from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataLaw {
    Discrete(DiscreteDistribution),
    Gaussian(GaussianSpec),
}

impl From<DiscreteDistribution> for DataLaw {
    fn from(d: DiscreteDistribution) -> Self {
        DataLaw::Discrete(d)
    }
}

impl From<GaussianSpec> for DataLaw {
    fn from(g: GaussianSpec) -> Self {
        DataLaw::Gaussian(g)
    }
}

impl DataLaw {
    pub fn as_discrete(&self) -> Option<&DiscreteDistribution> {
        match self {
            DataLaw::Discrete(d) => Some(d),
            DataLaw::Gaussian(_) => None,
        }
    }

    /// A reusable sampler for this law.
    pub fn sampler(&self) -> DataSampler<'_> {
        match self {
            DataLaw::Discrete(d) => DataSampler::Discrete(d.sampler()),
            DataLaw::Gaussian(g) => DataSampler::Gaussian(*g),
        }
    }
}

/// Sampler over a [`DataLaw`].
#[derive(Debug, Clone)]
pub enum DataSampler<'a> {
    Discrete(DiscreteSampler<'a>),
    Gaussian(GaussianSpec),
}

impl DataSampler<'_> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DataSampler::Discrete(s) => s.sample(rng),
            DataSampler::Gaussian(g) => {
                let z: f64 = rng.sample(StandardNormal);
                g.mean() + g.std_dev() * z
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for x in out {
            *x = self.sample(rng);
        }
    }
}

/// Deterministic RNG for a given seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws `n` i.i.d. values from `law`; identical seeds give identical output.
pub fn sample_iid(law: &DataLaw, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let mut rng = seeded_rng(seed);
    let sampler = law.sampler();
    let mut out = vec![0.0; n];
    sampler.fill(&mut rng, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_discrete_renormalises() {
        let d = make_discrete(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(d.atoms(), &[0.0, 1.0]);
        assert_eq!(d.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn make_discrete_sorts() {
        let d = make_discrete(&[2.0, 1.0], &[0.25, 0.75]).unwrap();
        assert_eq!(d.atoms(), &[1.0, 2.0]);
        assert_eq!(d.probs(), &[0.75, 0.25]);
    }

    #[test]
    fn make_discrete_merges_duplicates() {
        let d = make_discrete(&[0.0, 0.0, 1.0], &[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(d.atoms(), &[0.0, 1.0]);
        assert!((d.probs()[0] - 0.5).abs() < 1e-15);
        assert!((d.probs()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn make_discrete_merges_float_noise() {
        let d = make_discrete(&[0.1 + 0.2, 0.3], &[1.0, 1.0]).unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn make_discrete_errors() {
        assert!(matches!(make_discrete(&[], &[]), Err(Error::EmptyInput)));
        assert!(matches!(
            make_discrete(&[0.0, 1.0], &[0.0, 0.0]),
            Err(Error::ZeroMass)
        ));
        assert!(matches!(
            make_discrete(&[0.0, 1.0], &[0.5, -0.1]),
            Err(Error::NegativeProbability { index: 1, .. })
        ));
        assert!(matches!(
            make_discrete(&[0.0, 1.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn json_shape() {
        let d = make_discrete(&[1.0, 0.0], &[1.0, 3.0]).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"atoms":[0.0,1.0],"probs":[0.75,0.25]}"#);
        let back: DiscreteDistribution = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        let bad = serde_json::from_str::<DiscreteDistribution>(r#"{"atoms":[0],"probs":[-1]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn gaussian_rejects_nonpositive_variance() {
        assert!(GaussianSpec::new(0.0, 0.0).is_err());
        assert!(GaussianSpec::new(0.0, -1.0).is_err());
    }

    #[test]
    fn quantize_two_bins() {
        let d = quantize_gaussian(&GaussianSpec::standard(), 2, 4.0).unwrap();
        assert_eq!(d.atoms(), &[-2.0, 2.0]);
        assert_eq!(d.probs(), &[0.5, 0.5]);
        let shifted = quantize_gaussian(&GaussianSpec::new(5.0, 1.0).unwrap(), 2, 4.0).unwrap();
        assert_eq!(shifted.atoms(), &[3.0, 7.0]);
        assert_eq!(shifted.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn quantize_errors() {
        let g = GaussianSpec::standard();
        assert!(quantize_gaussian(&g, 1, 4.0).is_err());
        assert!(quantize_gaussian(&g, 4, 0.0).is_err());
        assert!(quantize_gaussian(&g, 4, -1.0).is_err());
    }

    #[test]
    fn quantize_even_bins_symmetric() {
        for k in [2, 4, 6, 8, 10, 50] {
            let d = quantize_gaussian(&GaussianSpec::new(0.3, 2.0).unwrap(), k, 4.0).unwrap();
            let p = d.probs();
            for i in 0..k {
                assert!((p[i] - p[k - 1 - i]).abs() < 1e-12, "k={k} i={i}");
            }
        }
    }

    #[test]
    fn quantized_mean_converges() {
        let g = GaussianSpec::new(1.5, 0.7).unwrap();
        let d = quantize_gaussian(&g, 401, 6.0).unwrap();
        assert!((d.mean() - 1.5).abs() < 1e-3);
    }

    #[test]
    fn enumeration_small_cases() {
        let d = DiscreteDistribution::uniform(&[0.0, 1.0]).unwrap();
        let all: Vec<_> = enumerate_training_sets(&d, 1, 100).unwrap().collect();
        assert_eq!(all.len(), 2);
        assert!((all.iter().map(|r| r.prob).sum::<f64>() - 1.0).abs() < 1e-12);

        let all: Vec<_> = enumerate_training_sets(&d, 3, 100).unwrap().collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|r| r.prob == 0.125));
        assert_eq!(all[0].indices, vec![0, 0, 0]);
        assert_eq!(all[1].indices, vec![0, 0, 1]);
        assert_eq!(all[7].indices, vec![1, 1, 1]);
    }

    #[test]
    fn enumeration_cap_error_names_count() {
        let d = DiscreteDistribution::uniform(&[0.0, 1.0, 2.0]).unwrap();
        let err = enumerate_training_sets(&d, 5, 100).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("enumeration too large"), "{msg}");
        assert!(msg.contains("243"), "{msg}");
    }

    #[test]
    fn for_each_ref_matches_iterator() {
        let d = make_discrete(&[0.0, 1.0, 3.0], &[0.2, 0.3, 0.5]).unwrap();
        let items: Vec<_> = enumerate_training_sets(&d, 3, 1000).unwrap().collect();
        let mut seen = Vec::new();
        enumerate_training_sets(&d, 3, 1000)
            .unwrap()
            .for_each_ref(|idx, p| seen.push((idx.to_vec(), p)));
        assert_eq!(items.len(), seen.len());
        for (a, b) in items.iter().zip(&seen) {
            assert_eq!(a.indices, b.0);
            assert_eq!(a.prob, b.1);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let law = DataLaw::Gaussian(GaussianSpec::standard());
        assert_eq!(sample_iid(&law, 50, 9).unwrap(), sample_iid(&law, 50, 9).unwrap());
        assert_ne!(sample_iid(&law, 50, 9).unwrap(), sample_iid(&law, 50, 10).unwrap());
    }

    #[test]
    fn discrete_sampling_frequency() {
        let law = DataLaw::Discrete(DiscreteDistribution::uniform(&[0.0, 1.0]).unwrap());
        let xs = sample_iid(&law, 1_000_000, 42).unwrap();
        let freq = xs.iter().filter(|&&x| x == 1.0).count() as f64 / xs.len() as f64;
        assert!((freq - 0.5).abs() < 0.002, "{freq}");
    }

    #[test]
    fn gaussian_sampling_mean() {
        let law = DataLaw::Gaussian(GaussianSpec::standard());
        let xs = sample_iid(&law, 1_000_000, 42).unwrap();
        let mean = compensated_sum(xs.iter().copied()) / xs.len() as f64;
        assert!(mean.abs() < 0.005, "{mean}");
    }

    #[test]
    fn zero_probability_atom_never_sampled() {
        let d = make_discrete(&[0.0, 1.0, 2.0], &[0.5, 0.0, 0.5]).unwrap();
        let s = d.sampler();
        let mut rng = seeded_rng(3);
        for _ in 0..10_000 {
            assert_ne!(s.sample_index(&mut rng), 1);
        }
    }
}
