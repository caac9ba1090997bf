//! Exact joint law of hypothesis and training set, and the information
//! measures computed from it.
//!
//! The joint is built by enumerating every ordered training set of a
//! discrete data law and pushing it through a learning kernel. Storage is
//! sparse: for each training set we keep only the hypothesis atoms the
//! kernel assigns positive mass to.

use std::collections::HashMap;
use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::distributions::{enumeration_size, make_discrete, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::numerics::{round_to_digits, CompensatedSum};

/// Default decimal digits hypothesis values are rounded to before grouping.
pub const DEFAULT_W_ROUND_DIGITS: i32 = 10;

/// A Markov kernel from training sets to hypotheses, `P_{W|S}`.
pub trait LearningKernel: Send + Sync {
    /// Law of the hypothesis given the training-set values.
    fn hypothesis_law(&self, sample: &[f64]) -> Result<DiscreteDistribution>;

    /// The hypothesis when the kernel is deterministic for this sample.
    fn deterministic(&self, _sample: &[f64]) -> Option<f64> {
        None
    }

    /// Draws one hypothesis for `sample`.
    fn draw(&self, sample: &[f64], rng: &mut dyn RngCore) -> Result<f64> {
        if let Some(w) = self.deterministic(sample) {
            return Ok(w);
        }
        let law = self.hypothesis_law(sample)?;
        Ok(law.sampler().sample(rng))
    }
}

impl<K: LearningKernel + ?Sized> LearningKernel for &K {
    fn hypothesis_law(&self, sample: &[f64]) -> Result<DiscreteDistribution> {
        (**self).hypothesis_law(sample)
    }
    fn deterministic(&self, sample: &[f64]) -> Option<f64> {
        (**self).deterministic(sample)
    }
    fn draw(&self, sample: &[f64], rng: &mut dyn RngCore) -> Result<f64> {
        (**self).draw(sample, rng)
    }
}

impl<K: LearningKernel + ?Sized> LearningKernel for Box<K> {
    fn hypothesis_law(&self, sample: &[f64]) -> Result<DiscreteDistribution> {
        (**self).hypothesis_law(sample)
    }
    fn deterministic(&self, sample: &[f64]) -> Option<f64> {
        (**self).deterministic(sample)
    }
    fn draw(&self, sample: &[f64], rng: &mut dyn RngCore) -> Result<f64> {
        (**self).draw(sample, rng)
    }
}

/// Wraps a closure as a kernel.
pub struct FnKernel<F>(pub F);

impl<F> LearningKernel for FnKernel<F>
where
    F: Fn(&[f64]) -> Result<DiscreteDistribution> + Send + Sync,
{
    fn hypothesis_law(&self, sample: &[f64]) -> Result<DiscreteDistribution> {
        (self.0)(sample)
    }
}

impl<F> fmt::Debug for FnKernel<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnKernel")
    }
}

/// Built-in kernels, serialisable for model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// Ignores the data.
    Constant { w: f64 },
    /// Empirical risk minimiser for squared loss: the sample average.
    SampleMean,
    /// Sample average plus independent discrete noise.
    NoisySampleMean { noise: DiscreteDistribution },
    /// Gibbs posterior on a finite grid: `P(w|s) ∝ exp(−γ·n·L_E(w,s))`
    /// with truncated squared loss at level `c`.
    Gibbs {
        grid: Vec<f64>,
        inverse_temperature: f64,
        c: f64,
    },
}

fn sample_mean(sample: &[f64]) -> f64 {
    sample.iter().sum::<f64>() / sample.len() as f64
}

impl LearningKernel for KernelSpec {
    fn hypothesis_law(&self, sample: &[f64]) -> Result<DiscreteDistribution> {
        match self {
            KernelSpec::Constant { w } => DiscreteDistribution::point(*w),
            KernelSpec::SampleMean => DiscreteDistribution::point(sample_mean(sample)),
            KernelSpec::NoisySampleMean { noise } => {
                let m = sample_mean(sample);
                let atoms: Vec<f64> = noise.atoms().iter().map(|e| m + e).collect();
                make_discrete(&atoms, noise.probs())
            }
            KernelSpec::Gibbs {
                grid,
                inverse_temperature,
                c,
            } => {
                if grid.is_empty() {
                    return Err(Error::InvalidKernelOutput("empty Gibbs grid".into()));
                }
                let n = sample.len() as f64;
                let c2 = c * c;
                let energies: Vec<f64> = grid
                    .iter()
                    .map(|&w| {
                        let total: f64 = sample.iter().map(|&z| ((w - z) * (w - z)).min(c2)).sum();
                        inverse_temperature * n * (total / n)
                    })
                    .collect();
                let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
                let weights: Vec<f64> = energies.iter().map(|e| (min - e).exp()).collect();
                make_discrete(grid, &weights)
            }
        }
    }

    fn deterministic(&self, sample: &[f64]) -> Option<f64> {
        match self {
            KernelSpec::Constant { w } => Some(*w),
            KernelSpec::SampleMean => Some(sample_mean(sample)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InformationKind {
    Mi,
    PowerInfo,
    ChiSquareInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationValue {
    pub value: f64,
    pub kind: InformationKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
}

/// How training-set indices map back to data values.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleLayout {
    pub data: DiscreteDistribution,
    pub n: usize,
}

impl SampleLayout {
    /// Atom indices of the `s`-th training set (first example slowest).
    pub fn decode(&self, mut s: usize, out: &mut [usize]) {
        let k = self.data.len();
        for slot in out.iter_mut().rev() {
            *slot = s % k;
            s /= k;
        }
    }

    pub fn values(&self, s: usize) -> Vec<f64> {
        let mut idx = vec![0; self.n];
        self.decode(s, &mut idx);
        idx.iter().map(|&i| self.data.atoms()[i]).collect()
    }
}

/// Exact joint law `P_{W,S}` with cached marginals.
///
/// For every training set `s` the cells `offsets[s]..offsets[s+1]` hold
/// `(w index, P(w|s))` for the hypotheses with positive conditional mass.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    w_atoms: Vec<f64>,
    p_w: Vec<f64>,
    p_s: Vec<f64>,
    offsets: Vec<usize>,
    cells: Vec<(u32, f64)>,
    layout: Option<SampleLayout>,
}

/// Dense JSON form: rows are hypotheses, columns training sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointJson {
    pub w_atoms: Vec<f64>,
    pub s_count: usize,
    pub mass: Vec<Vec<f64>>,
}

/// Builds the exact joint by enumerating all `K^n` training sets.
pub fn build_joint<K: LearningKernel + ?Sized>(
    d: &DiscreteDistribution,
    n: usize,
    kernel: &K,
    w_round_digits: i32,
    cap: u64,
) -> Result<JointDistribution> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let s_count = enumeration_size(d.len(), n, cap)? as usize;
    let layout = SampleLayout {
        data: d.clone(),
        n,
    };

    let mut key_to_idx: HashMap<u64, u32> = HashMap::new();
    let mut raw_atoms: Vec<f64> = Vec::new();
    let mut p_s = Vec::with_capacity(s_count);
    let mut offsets = Vec::with_capacity(s_count + 1);
    let mut cells: Vec<(u32, f64)> = Vec::with_capacity(s_count);
    offsets.push(0);

    let mut intern = |w: f64| -> Result<u32> {
        if !w.is_finite() {
            return Err(Error::InvalidKernelOutput(format!("non-finite hypothesis {w}")));
        }
        let key = round_to_digits(w, w_round_digits);
        let next = raw_atoms.len() as u32;
        let idx = *key_to_idx.entry(key.to_bits()).or_insert(next);
        if idx == next {
            raw_atoms.push(key);
        }
        Ok(idx)
    };

    let mut idx = vec![0usize; n];
    let mut values = vec![0.0; n];
    let atoms = d.atoms();
    let probs = d.probs();
    let mut total = CompensatedSum::new();
    for s in 0..s_count {
        layout.decode(s, &mut idx);
        let mut prob = 1.0;
        for (v, &i) in values.iter_mut().zip(&idx) {
            *v = atoms[i];
            prob *= probs[i];
        }
        p_s.push(prob);
        total.add(prob);
        if prob > 0.0 {
            if let Some(w) = kernel.deterministic(&values) {
                cells.push((intern(w)?, 1.0));
            } else {
                let law = kernel.hypothesis_law(&values)?;
                let mut row: Vec<(u32, f64)> = Vec::with_capacity(law.len());
                for (w, c) in law.iter() {
                    if c > 0.0 {
                        let wi = intern(w)?;
                        match row.iter_mut().find(|(i, _)| *i == wi) {
                            Some(cell) => cell.1 += c,
                            None => row.push((wi, c)),
                        }
                    }
                }
                cells.extend(row);
            }
        }
        offsets.push(cells.len());
    }
    let total = total.value();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidJoint(format!("training-set mass sums to {total}")));
    }

    // canonical ascending atom order
    let mut order: Vec<u32> = (0..raw_atoms.len() as u32).collect();
    order.sort_by(|&a, &b| raw_atoms[a as usize].total_cmp(&raw_atoms[b as usize]));
    let mut remap = vec![0u32; raw_atoms.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old as usize] = new as u32;
    }
    let w_atoms: Vec<f64> = order.iter().map(|&o| raw_atoms[o as usize]).collect();
    for cell in &mut cells {
        cell.0 = remap[cell.0 as usize];
    }

    JointDistribution::from_parts(w_atoms, p_s, offsets, cells, Some(layout))
}

impl JointDistribution {
    fn from_parts(
        w_atoms: Vec<f64>,
        p_s: Vec<f64>,
        offsets: Vec<usize>,
        cells: Vec<(u32, f64)>,
        layout: Option<SampleLayout>,
    ) -> Result<Self> {
        let mut acc: Vec<CompensatedSum> = vec![CompensatedSum::new(); w_atoms.len()];
        for (s, &ps) in p_s.iter().enumerate() {
            for &(w, c) in &cells[offsets[s]..offsets[s + 1]] {
                acc[w as usize].add(ps * c);
            }
        }
        let p_w: Vec<f64> = acc.iter().map(|a| a.value()).collect();
        let mut joint = Self {
            w_atoms,
            p_w,
            p_s,
            offsets,
            cells,
            layout,
        };
        joint.drop_empty_atoms();
        Ok(joint)
    }

    /// Removes hypothesis atoms that carry no mass.
    fn drop_empty_atoms(&mut self) {
        if self.p_w.iter().all(|&p| p > 0.0) {
            return;
        }
        let mut remap = vec![u32::MAX; self.w_atoms.len()];
        let mut atoms = Vec::new();
        let mut p_w = Vec::new();
        for (i, (&a, &p)) in self.w_atoms.iter().zip(&self.p_w).enumerate() {
            if p > 0.0 {
                remap[i] = atoms.len() as u32;
                atoms.push(a);
                p_w.push(p);
            }
        }
        for cell in &mut self.cells {
            cell.0 = remap[cell.0 as usize];
        }
        self.w_atoms = atoms;
        self.p_w = p_w;
    }

    /// Builds a joint from a dense mass matrix (rows = hypotheses).
    pub fn from_json(j: JointJson) -> Result<Self> {
        if j.mass.len() != j.w_atoms.len() {
            return Err(Error::LengthMismatch {
                what: "mass rows and w_atoms",
                left: j.mass.len(),
                right: j.w_atoms.len(),
            });
        }
        if j.w_atoms.is_empty() || j.s_count == 0 {
            return Err(Error::EmptyInput);
        }
        for row in &j.mass {
            if row.len() != j.s_count {
                return Err(Error::LengthMismatch {
                    what: "mass row and s_count",
                    left: row.len(),
                    right: j.s_count,
                });
            }
            for &m in row {
                if !m.is_finite() {
                    return Err(Error::NonFinite("joint mass"));
                }
                if m < 0.0 {
                    return Err(Error::InvalidJoint(format!("negative mass {m}")));
                }
            }
        }
        // sort rows by atom value so the representation is canonical
        let mut order: Vec<usize> = (0..j.w_atoms.len()).collect();
        order.sort_by(|&a, &b| j.w_atoms[a].total_cmp(&j.w_atoms[b]));
        for win in order.windows(2) {
            if j.w_atoms[win[0]] == j.w_atoms[win[1]] {
                return Err(Error::InvalidJoint(format!(
                    "duplicate hypothesis atom {}",
                    j.w_atoms[win[0]]
                )));
            }
        }
        let w_atoms: Vec<f64> = order.iter().map(|&o| j.w_atoms[o]).collect();

        let mut p_s = Vec::with_capacity(j.s_count);
        let mut offsets = vec![0];
        let mut cells = Vec::new();
        let mut total = CompensatedSum::new();
        for s in 0..j.s_count {
            let col = order.iter().map(|&o| j.mass[o][s]);
            let ps: f64 = col.clone().collect::<CompensatedSum>().value();
            total.add(ps);
            p_s.push(ps);
            if ps > 0.0 {
                for (wi, m) in col.enumerate() {
                    if m > 0.0 {
                        cells.push((wi as u32, m / ps));
                    }
                }
            }
            offsets.push(cells.len());
        }
        let total = total.value();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidJoint(format!("joint mass sums to {total}")));
        }
        Self::from_parts(w_atoms, p_s, offsets, cells, None)
    }

    /// Dense JSON form. Size is `#w × s_count`.
    pub fn to_json(&self) -> JointJson {
        let mut mass = vec![vec![0.0; self.p_s.len()]; self.w_atoms.len()];
        for (s, w, m) in self.iter_cells() {
            mass[w][s] = m;
        }
        JointJson {
            w_atoms: self.w_atoms.clone(),
            s_count: self.p_s.len(),
            mass,
        }
    }

    pub fn w_atoms(&self) -> &[f64] {
        &self.w_atoms
    }

    /// Marginal `P_W`, aligned with [`Self::w_atoms`].
    pub fn p_w(&self) -> &[f64] {
        &self.p_w
    }

    /// Marginal `P_S` over all enumerated training sets.
    pub fn p_s(&self) -> &[f64] {
        &self.p_s
    }

    pub fn s_count(&self) -> usize {
        self.p_s.len()
    }

    pub fn layout(&self) -> Option<&SampleLayout> {
        self.layout.as_ref()
    }

    /// Conditional cells `(w index, P(w|s))` of training set `s`.
    pub fn conditional(&self, s: usize) -> &[(u32, f64)] {
        &self.cells[self.offsets[s]..self.offsets[s + 1]]
    }

    /// Iterates `(s, w, P(w, s))` over the cells with positive mass.
    pub fn iter_cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.p_s.len()).flat_map(move |s| {
            let ps = self.p_s[s];
            self.conditional(s)
                .iter()
                .map(move |&(w, c)| (s, w as usize, ps * c))
        })
    }

    /// Iterates `(s, w, P_S(s), P(w|s) / P_W(w))` over positive cells.
    fn iter_ratios(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.p_s.len()).flat_map(move |s| {
            let ps = self.p_s[s];
            self.conditional(s).iter().map(move |&(w, c)| {
                let pw = self.p_w[w as usize];
                (ps, pw, c / pw)
            })
        })
    }

    pub fn entropy_w(&self) -> f64 {
        entropy(&self.p_w)
    }

    pub fn entropy_s(&self) -> f64 {
        entropy(&self.p_s)
    }

    /// Total joint mass.
    pub fn total_mass(&self) -> f64 {
        self.iter_cells().map(|(_, _, m)| m).collect::<CompensatedSum>().value()
    }
}

fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.ln())
        .collect::<CompensatedSum>()
        .value()
}

impl Serialize for JointDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for JointDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = JointJson::deserialize(deserializer)?;
        JointDistribution::from_json(raw).map_err(serde::de::Error::custom)
    }
}

/// `I(W;S) = D_KL(P_{W,S} ‖ P_W ⊗ P_S)` in nats.
pub fn mutual_information(j: &JointDistribution) -> InformationValue {
    let mut acc = CompensatedSum::new();
    for (ps, pw, r) in j.iter_ratios() {
        acc.add(ps * pw * r * r.ln());
    }
    InformationValue {
        value: acc.value().max(0.0),
        kind: InformationKind::Mi,
        order: None,
    }
}

/// `I_P^(t)(W;S)`, the power divergence of order `t > 1` between the
/// joint and the product of its marginals.
pub fn power_information(j: &JointDistribution, t: f64) -> Result<InformationValue> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "power information order must be > 1, got {t}"
        )));
    }
    // Σ_{cells} P_W P_S (r^t − 1) − Σ_{empty cells} P_W P_S, and the empty
    // cells carry 1 − Σ_{cells} P_W P_S of product mass.
    let mut acc = CompensatedSum::new();
    acc.add(-1.0);
    for (ps, pw, r) in j.iter_ratios() {
        acc.add(ps * pw * r.powf(t));
    }
    Ok(InformationValue {
        value: acc.value().max(0.0),
        kind: InformationKind::PowerInfo,
        order: Some(t),
    })
}

/// `I_χ²(W;S)`, the power information of order 2.
pub fn chi_square_information(j: &JointDistribution) -> InformationValue {
    let v = power_information(j, 2.0).expect("order 2 is valid");
    InformationValue {
        kind: InformationKind::ChiSquareInfo,
        ..v
    }
}

/// `R = max P(w|s) / P_W(w)` over cells with `P_S(s) > 0`.
pub fn max_density_ratio(j: &JointDistribution) -> f64 {
    j.iter_ratios()
        .filter(|(ps, _, _)| *ps > 0.0)
        .map(|(_, _, r)| r)
        .fold(1.0, f64::max)
}

/// Plug-in mutual information of paired discrete labels, in nats.
///
/// This is a finite-sample estimate and is biased upwards; the exact
/// functionals above are the reference whenever enumeration is feasible.
pub fn plugin_mutual_information(pairs: &[(u64, u64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = pairs.len() as f64;
    let mut joint: HashMap<(u64, u64), usize> = HashMap::new();
    let mut left: HashMap<u64, usize> = HashMap::new();
    let mut right: HashMap<u64, usize> = HashMap::new();
    for &(a, b) in pairs {
        *joint.entry((a, b)).or_default() += 1;
        *left.entry(a).or_default() += 1;
        *right.entry(b).or_default() += 1;
    }
    let mut keys: Vec<_> = joint.into_iter().collect();
    keys.sort_unstable();
    let mut acc = CompensatedSum::new();
    for ((a, b), c) in keys {
        let pab = c as f64 / n;
        let pa = left[&a] as f64 / n;
        let pb = right[&b] as f64 / n;
        acc.add(pab * (pab / (pa * pb)).ln());
    }
    Ok(acc.value().max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DEFAULT_ENUMERATION_CAP;

    fn fair_bit() -> DiscreteDistribution {
        DiscreteDistribution::uniform(&[0.0, 1.0]).unwrap()
    }

    fn joint(d: &DiscreteDistribution, n: usize, k: &KernelSpec) -> JointDistribution {
        build_joint(d, n, k, DEFAULT_W_ROUND_DIGITS, DEFAULT_ENUMERATION_CAP).unwrap()
    }

    #[test]
    fn constant_kernel_is_independent() {
        let j = joint(&fair_bit(), 3, &KernelSpec::Constant { w: 0.3 });
        assert_eq!(mutual_information(&j).value, 0.0);
        assert!(chi_square_information(&j).value < 1e-15);
        assert!(power_information(&j, 3.0).unwrap().value < 1e-15);
        assert_eq!(max_density_ratio(&j), 1.0);
    }

    #[test]
    fn identity_kernel_on_fair_bit() {
        let j = joint(&fair_bit(), 1, &KernelSpec::SampleMean);
        assert_eq!(j.w_atoms(), &[0.0, 1.0]);
        assert!((mutual_information(&j).value - 2f64.ln()).abs() < 1e-15);
        assert!((chi_square_information(&j).value - 1.0).abs() < 1e-15);
        assert!((power_information(&j, 2.0).unwrap().value - 1.0).abs() < 1e-15);
        assert_eq!(max_density_ratio(&j), 2.0);
    }

    #[test]
    fn sample_mean_marginal() {
        let j = joint(&fair_bit(), 2, &KernelSpec::SampleMean);
        assert_eq!(j.w_atoms(), &[0.0, 0.5, 1.0]);
        assert_eq!(j.p_w(), &[0.25, 0.5, 0.25]);
        assert_eq!(j.s_count(), 4);
    }

    #[test]
    fn grouping_absorbs_float_noise() {
        // 0.1 + 0.2 and 0.3 differ in floating point but not after rounding
        let d = DiscreteDistribution::uniform(&[0.1, 0.2, 0.3]).unwrap();
        let j = joint(&d, 3, &KernelSpec::SampleMean);
        // sums of three values from {1,2,3} take 7 values
        assert_eq!(j.w_atoms().len(), 7);
    }

    #[test]
    fn injective_kernel_mi_is_entropy_of_s() {
        let d = make_discrete(&[0.0, 1.0, 5.0], &[0.2, 0.3, 0.5]).unwrap();
        // mean of two values from {0,1,5} with weights that keep it injective
        let k = FnKernel(|s: &[f64]| DiscreteDistribution::point(s[0] + 10.0 * s[1]));
        let j = build_joint(&d, 2, &k, 10, 1000).unwrap();
        assert!((mutual_information(&j).value - j.entropy_s()).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let j = joint(&fair_bit(), 2, &KernelSpec::SampleMean);
        let s = serde_json::to_string(&j).unwrap();
        assert!(s.starts_with(r#"{"w_atoms":[0.0,0.5,1.0],"s_count":4,"mass":[[0.25,0.0"#));
        let back: JointDistribution = serde_json::from_str(&s).unwrap();
        assert_eq!(back.p_w(), j.p_w());
        assert_eq!(
            mutual_information(&back).value,
            mutual_information(&j).value
        );
    }

    #[test]
    fn json_rejects_bad_mass() {
        let bad = r#"{"w_atoms":[0,1],"s_count":2,"mass":[[0.5,0.1],[0.1,0.1]]}"#;
        assert!(serde_json::from_str::<JointDistribution>(bad).is_err());
        let ragged = r#"{"w_atoms":[0,1],"s_count":2,"mass":[[0.5],[0.5,0.0]]}"#;
        assert!(serde_json::from_str::<JointDistribution>(ragged).is_err());
    }

    #[test]
    fn noisy_kernel_is_between_extremes() {
        let noise = make_discrete(&[-0.5, 0.5], &[0.5, 0.5]).unwrap();
        let j = joint(&fair_bit(), 1, &KernelSpec::NoisySampleMean { noise });
        let mi = mutual_information(&j).value;
        assert!(mi > 0.0 && mi < 2f64.ln());
        assert!((j.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_mass_data_atoms_are_skipped() {
        let d = make_discrete(&[0.0, 1.0, 2.0], &[0.5, 0.0, 0.5]).unwrap();
        let j = joint(&d, 2, &KernelSpec::SampleMean);
        // means of {0,2}: 0, 1, 2
        assert_eq!(j.w_atoms(), &[0.0, 1.0, 2.0]);
        assert_eq!(j.s_count(), 9);
    }

    #[test]
    fn gibbs_kernel_is_valid() {
        let k = KernelSpec::Gibbs {
            grid: vec![-1.0, 0.0, 1.0],
            inverse_temperature: 2.0,
            c: 3.0,
        };
        let law = k.hypothesis_law(&[1.0, 1.0]).unwrap();
        assert_eq!(law.len(), 3);
        assert!(law.probs()[2] > law.probs()[1] && law.probs()[1] > law.probs()[0]);
    }

    #[test]
    fn cap_is_enforced() {
        let d = DiscreteDistribution::uniform(&[0.0, 1.0, 2.0]).unwrap();
        let err = build_joint(&d, 6, &KernelSpec::SampleMean, 10, 100).unwrap_err();
        assert!(matches!(err, Error::EnumerationTooLarge { .. }));
    }

    #[test]
    fn plugin_estimate_close_on_large_sample() {
        let pairs: Vec<(u64, u64)> = (0..10_000u64).map(|i| (i % 2, i % 2)).collect();
        let mi = plugin_mutual_information(&pairs).unwrap();
        assert!((mi - 2f64.ln()).abs() < 1e-12);
    }
}
