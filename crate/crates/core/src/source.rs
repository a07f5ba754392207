//! Joint source model: a dense joint pmf over the node observations
//! `(U_0, U_1, ..., U_M)`, entropy quantities in bits, and seeded i.i.d.
//! block sampling.
//!
//! Variable 0 is the sink's side information; an alphabet size of 1 encodes
//! "no side information". All logarithms are base 2, with the convention
//! `0 * log 0 = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Tolerance for accepting a user-supplied pmf as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SourceError {
    #[error("probability entry {value} at flat index {index} is negative")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("tensor has {got} entries but alphabet sizes require {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("every alphabet size must be at least 1")]
    EmptyAlphabet,
    #[error("variable index {index} appears in both (or twice in one) variable set")]
    OverlappingSets { index: usize },
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    #[error("block length must be at least 1")]
    EmptyBlock,
    #[error("snapshot sequences have unequal lengths")]
    RaggedBlock,
}

/// Joint distribution of the `M + 1` node observations over finite alphabets.
///
/// Stored as a dense row-major tensor; entries are renormalized exactly once
/// validation passes, so downstream arithmetic can assume a unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    alphabet_sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(alphabet_sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self, SourceError> {
        if alphabet_sizes.is_empty() || alphabet_sizes.iter().any(|&s| s == 0) {
            return Err(SourceError::EmptyAlphabet);
        }
        let expected: usize = alphabet_sizes.iter().product();
        if probs.len() != expected {
            return Err(SourceError::ShapeMismatch {
                expected,
                got: probs.len(),
            });
        }
        for (index, &value) in probs.iter().enumerate() {
            if value < 0.0 || !value.is_finite() {
                return Err(SourceError::NegativeProbability { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(SourceError::NotNormalized { sum });
        }
        let probs = probs.iter().map(|p| p / sum).collect();
        Ok(Self {
            alphabet_sizes,
            probs,
        })
    }

    /// Doubly symmetric binary source with crossover `q` and trivial side
    /// information at the sink: alphabets `[1, 2, 2]`, uniform marginals,
    /// `P(U_1 != U_2) = q`.
    pub fn dsbs(crossover: f64) -> Result<Self, SourceError> {
        if !(0.0..=1.0).contains(&crossover) || !crossover.is_finite() {
            return Err(SourceError::NegativeProbability {
                index: 0,
                value: crossover,
            });
        }
        let agree = (1.0 - crossover) / 2.0;
        let differ = crossover / 2.0;
        Self::new(vec![1, 2, 2], vec![agree, differ, differ, agree])
    }

    /// Number of variables, i.e. `M + 1`.
    pub fn num_vars(&self) -> usize {
        self.alphabet_sizes.len()
    }

    /// Number of source nodes `M` (everything except the sink variable).
    pub fn num_sources(&self) -> usize {
        self.alphabet_sizes.len() - 1
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.alphabet_sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of one joint outcome, indexed per variable.
    pub fn prob(&self, outcome: &[usize]) -> f64 {
        assert_eq!(outcome.len(), self.alphabet_sizes.len());
        self.probs[self.flat_index(outcome)]
    }

    fn flat_index(&self, outcome: &[usize]) -> usize {
        let mut idx = 0;
        for (k, &symbol) in outcome.iter().enumerate() {
            debug_assert!(symbol < self.alphabet_sizes[k]);
            idx = idx * self.alphabet_sizes[k] + symbol;
        }
        idx
    }

    fn check_vars(&self, vars: &[usize], seen: &mut [bool]) -> Result<(), SourceError> {
        for &v in vars {
            if v >= self.num_vars() {
                return Err(SourceError::IndexOutOfRange {
                    index: v,
                    num_vars: self.num_vars(),
                });
            }
            if seen[v] {
                return Err(SourceError::OverlappingSets { index: v });
            }
            seen[v] = true;
        }
        Ok(())
    }

    /// Marginal probabilities of a variable subset, keyed by the subset's
    /// own row-major index (in the order the variables are listed).
    fn marginal(&self, vars: &[usize]) -> Vec<f64> {
        let size: usize = vars.iter().map(|&v| self.alphabet_sizes[v]).product();
        let mut out = vec![0.0; size.max(1)];
        let mut outcome = vec![0usize; self.num_vars()];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            self.unflatten(flat, &mut outcome);
            let mut key = 0usize;
            for &v in vars {
                key = key * self.alphabet_sizes[v] + outcome[v];
            }
            out[key] += p;
        }
        out
    }

    fn unflatten(&self, mut flat: usize, outcome: &mut [usize]) {
        for k in (0..self.alphabet_sizes.len()).rev() {
            outcome[k] = flat % self.alphabet_sizes[k];
            flat /= self.alphabet_sizes[k];
        }
    }

    /// Joint entropy `H(U_S)` in bits.
    pub fn entropy(&self, vars: &[usize]) -> Result<f64, SourceError> {
        let mut seen = vec![false; self.num_vars()];
        self.check_vars(vars, &mut seen)?;
        if vars.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_bits(&self.marginal(vars)))
    }

    /// Conditional entropy `H(U_S | U_T)` in bits; `s` and `t` must be
    /// disjoint.
    pub fn conditional_entropy(&self, s: &[usize], t: &[usize]) -> Result<f64, SourceError> {
        let mut seen = vec![false; self.num_vars()];
        self.check_vars(s, &mut seen)?;
        self.check_vars(t, &mut seen)?;
        if s.is_empty() {
            return Ok(0.0);
        }
        let mut union = s.to_vec();
        union.extend_from_slice(t);
        let h_union = entropy_bits(&self.marginal(&union));
        let h_t = if t.is_empty() {
            0.0
        } else {
            entropy_bits(&self.marginal(t))
        };
        Ok((h_union - h_t).max(0.0))
    }

    /// Mutual information `I(U_S; U_T)` in bits; `s` and `t` must be
    /// disjoint. May be a hair below zero from rounding (>= -1e-12).
    pub fn mutual_information(&self, s: &[usize], t: &[usize]) -> Result<f64, SourceError> {
        let mut seen = vec![false; self.num_vars()];
        self.check_vars(s, &mut seen)?;
        self.check_vars(t, &mut seen)?;
        if s.is_empty() || t.is_empty() {
            return Ok(0.0);
        }
        let h_s = entropy_bits(&self.marginal(s));
        let h_t = entropy_bits(&self.marginal(t));
        let mut union = s.to_vec();
        union.extend_from_slice(t);
        let h_union = entropy_bits(&self.marginal(&union));
        Ok(h_s + h_t - h_union)
    }

    /// Draws `n` i.i.d. joint outcomes; deterministic given `seed`.
    pub fn sample_block(&self, n: usize, seed: u64) -> Result<SnapshotBlock, SourceError> {
        if n == 0 {
            return Err(SourceError::EmptyBlock);
        }
        let mut cumulative = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for &p in &self.probs {
            acc += p;
            cumulative.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut samples = vec![Vec::with_capacity(n); self.num_vars()];
        let mut outcome = vec![0usize; self.num_vars()];
        for _ in 0..n {
            let u: f64 = rng.gen();
            let flat = cumulative
                .partition_point(|&c| c <= u)
                .min(self.probs.len() - 1);
            self.unflatten(flat, &mut outcome);
            for (node, &symbol) in outcome.iter().enumerate() {
                samples[node].push(symbol);
            }
        }
        SnapshotBlock::new(samples)
    }
}

/// One block of snapshots: a length-`n` symbol sequence per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotBlock {
    samples: Vec<Vec<usize>>,
}

impl SnapshotBlock {
    pub fn new(samples: Vec<Vec<usize>>) -> Result<Self, SourceError> {
        let n = samples.first().map(|s| s.len()).unwrap_or(0);
        if n == 0 {
            return Err(SourceError::EmptyBlock);
        }
        if samples.iter().any(|s| s.len() != n) {
            return Err(SourceError::RaggedBlock);
        }
        Ok(Self { samples })
    }

    pub fn num_nodes(&self) -> usize {
        self.samples.len()
    }

    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Symbol sequence observed at one node.
    pub fn node(&self, i: usize) -> &[usize] {
        &self.samples[i]
    }
}

/// Shannon entropy of a (sub)distribution in bits, with `0 log 0 = 0`.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Binary entropy function `h2(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// Inverse of [`binary_entropy`] on `[0, 1/2]`, by bisection.
pub fn binary_entropy_inverse(h: f64) -> f64 {
    assert!((0.0..=1.0).contains(&h), "entropy must lie in [0, 1]");
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn independent_fair_bits() -> JointPmf {
        JointPmf::new(vec![1, 2, 2], vec![0.25; 4]).unwrap()
    }

    /// Direct-summation oracle: H(S | T) computed straight off the raw
    /// tensor, independent of the marginalization code path.
    fn cond_entropy_oracle(sizes: &[usize], probs: &[f64], s: &[usize], t: &[usize]) -> f64 {
        let mut h_union = std::collections::HashMap::new();
        let mut h_t = std::collections::HashMap::new();
        for (flat, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut outcome = vec![0usize; sizes.len()];
            let mut rem = flat;
            for k in (0..sizes.len()).rev() {
                outcome[k] = rem % sizes[k];
                rem /= sizes[k];
            }
            let key_union: Vec<usize> = s.iter().chain(t.iter()).map(|&v| outcome[v]).collect();
            let key_t: Vec<usize> = t.iter().map(|&v| outcome[v]).collect();
            *h_union.entry(key_union).or_insert(0.0) += p;
            *h_t.entry(key_t).or_insert(0.0) += p;
        }
        let ent = |m: &std::collections::HashMap<Vec<usize>, f64>| {
            -m.values().map(|&p| p * p.log2()).sum::<f64>()
        };
        ent(&h_union) - ent(&h_t)
    }

    #[test]
    fn uniform_pmf_is_valid() {
        let pmf = independent_fair_bits();
        assert_eq!(pmf.num_sources(), 2);
        assert_eq!(pmf.alphabet_sizes(), &[1, 2, 2]);
    }

    #[test]
    fn unnormalized_pmf_rejected() {
        let err = JointPmf::new(vec![1, 2, 2], vec![0.25, 0.25, 0.25, 0.15]).unwrap_err();
        assert!(matches!(err, SourceError::NotNormalized { .. }));
    }

    #[test]
    fn negative_entry_rejected() {
        let err = JointPmf::new(vec![1, 2, 2], vec![0.5, 0.5, 0.5, -0.5]).unwrap_err();
        assert!(matches!(err, SourceError::NegativeProbability { .. }));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let err = JointPmf::new(vec![1, 2, 2], vec![0.5, 0.5]).unwrap_err();
        assert!(matches!(
            err,
            SourceError::ShapeMismatch {
                expected: 4,
                got: 2
            }
        ));
    }

    #[test]
    fn dsbs_entries_sum_to_one() {
        let pmf = JointPmf::dsbs(0.11).unwrap();
        assert_abs_diff_eq!(pmf.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pmf.prob(&[0, 0, 0]), 0.445, epsilon = 1e-12);
        assert_abs_diff_eq!(pmf.prob(&[0, 0, 1]), 0.055, epsilon = 1e-12);
    }

    #[test]
    fn independent_bits_conditional_entropy_is_one() {
        let pmf = independent_fair_bits();
        assert_abs_diff_eq!(
            pmf.conditional_entropy(&[1], &[2]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn empty_set_has_zero_conditional_entropy() {
        let pmf = JointPmf::dsbs(0.3).unwrap();
        assert_eq!(pmf.conditional_entropy(&[], &[1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn dsbs_conditional_entropy_matches_direct_summation() {
        let pmf = JointPmf::dsbs(0.11).unwrap();
        let oracle = cond_entropy_oracle(&[1, 2, 2], pmf.probs(), &[1], &[2]);
        let h = pmf.conditional_entropy(&[1], &[2]).unwrap();
        assert_abs_diff_eq!(h, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(h, 0.49992, epsilon = 1e-4);
    }

    #[test]
    fn overlapping_sets_rejected() {
        let pmf = JointPmf::dsbs(0.11).unwrap();
        let err = pmf.conditional_entropy(&[1], &[1]).unwrap_err();
        assert!(matches!(err, SourceError::OverlappingSets { index: 1 }));
        let err = pmf.mutual_information(&[3], &[1]).unwrap_err();
        assert!(matches!(err, SourceError::IndexOutOfRange { index: 3, .. }));
    }

    #[test]
    fn independent_variables_have_zero_mi() {
        let pmf = independent_fair_bits();
        let mi = pmf.mutual_information(&[1], &[2]).unwrap();
        assert!(mi.abs() < 1e-12);
    }

    #[test]
    fn identical_variables_have_full_mi() {
        let pmf = JointPmf::dsbs(0.0).unwrap();
        assert_abs_diff_eq!(pmf.mutual_information(&[1], &[2]).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dsbs_mi_matches_binary_entropy_oracle() {
        let pmf = JointPmf::dsbs(0.11).unwrap();
        let expected = 1.0 - binary_entropy(0.11);
        let mi = pmf.mutual_information(&[1], &[2]).unwrap();
        assert_abs_diff_eq!(mi, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(mi, 0.50008, epsilon = 1e-4);
        // symmetry
        assert_abs_diff_eq!(
            mi,
            pmf.mutual_information(&[2], &[1]).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn point_mass_samples_are_constant() {
        let pmf = JointPmf::new(vec![1, 2, 2], vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let block = pmf.sample_block(64, 5).unwrap();
        assert!(block.node(1).iter().all(|&s| s == 1));
        assert!(block.node(2).iter().all(|&s| s == 1));
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let pmf = JointPmf::dsbs(0.11).unwrap();
        let a = pmf.sample_block(100, 42).unwrap();
        let b = pmf.sample_block(100, 42).unwrap();
        assert_eq!(a, b);
        let c = pmf.sample_block(100, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn dsbs_empirical_disagreement_rate() {
        let pmf = JointPmf::dsbs(0.11).unwrap();
        let n = 10_000;
        let block = pmf.sample_block(n, 7).unwrap();
        let disagreements = block
            .node(1)
            .iter()
            .zip(block.node(2))
            .filter(|(a, b)| a != b)
            .count();
        let rate = disagreements as f64 / n as f64;
        assert!((rate - 0.11).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn empirical_entropy_tracks_analytic_entropy() {
        let cases = vec![
            JointPmf::dsbs(0.11).unwrap(),
            JointPmf::new(vec![1, 2, 3], vec![0.3, 0.1, 0.05, 0.25, 0.2, 0.1]).unwrap(),
        ];
        for (i, pmf) in cases.iter().enumerate() {
            let n = 100_000;
            let block = pmf.sample_block(n, 1000 + i as u64).unwrap();
            let sources: Vec<usize> = (1..pmf.num_vars()).collect();
            let mut counts = std::collections::HashMap::new();
            for t in 0..n {
                let key: Vec<usize> = sources.iter().map(|&v| block.node(v)[t]).collect();
                *counts.entry(key).or_insert(0usize) += 1;
            }
            let emp: Vec<f64> = counts.values().map(|&c| c as f64 / n as f64).collect();
            let analytic = pmf.entropy(&sources).unwrap();
            assert!(
                (entropy_bits(&emp) - analytic).abs() < 0.02,
                "empirical {} vs analytic {}",
                entropy_bits(&emp),
                analytic
            );
        }
    }

    prop_compose! {
        fn arb_pmf()(sizes in prop::sample::select(vec![
            vec![1usize, 2, 2],
            vec![1, 2, 3],
            vec![2, 2, 2],
            vec![1, 3, 2, 2],
        ]))(weights in prop::collection::vec(0.01f64..1.0, sizes.iter().product::<usize>()),
            sizes in Just(sizes)) -> JointPmf {
            let sum: f64 = weights.iter().sum();
            let probs: Vec<f64> = weights.iter().map(|w| w / sum).collect();
            JointPmf::new(sizes, probs).unwrap()
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn chain_rule_holds(pmf in arb_pmf(), mask in 0usize..64) {
            let m = pmf.num_vars();
            let s: Vec<usize> = (0..m).filter(|k| mask & (1 << k) != 0).collect();
            let t: Vec<usize> = (0..m).filter(|k| mask & (1 << k) == 0).collect();
            let mut union = s.clone();
            union.extend_from_slice(&t);
            let lhs = pmf.entropy(&union).unwrap();
            let rhs = pmf.entropy(&t).unwrap() + pmf.conditional_entropy(&s, &t).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10, "H(S∪T)={lhs} H(T)+H(S|T)={rhs}");
        }

        #[test]
        fn conditioning_never_increases_entropy(pmf in arb_pmf()) {
            let m = pmf.num_vars();
            // S = {last var}, T grows one variable at a time.
            let s = vec![m - 1];
            let mut t: Vec<usize> = Vec::new();
            let mut prev = pmf.conditional_entropy(&s, &t).unwrap();
            for v in 0..m - 1 {
                t.push(v);
                let next = pmf.conditional_entropy(&s, &t).unwrap();
                prop_assert!(next <= prev + 1e-10, "H(S|T) grew from {prev} to {next}");
                prev = next;
            }
        }

        #[test]
        fn mutual_information_nonnegative_and_symmetric(pmf in arb_pmf()) {
            let m = pmf.num_vars();
            let s = vec![0];
            let t: Vec<usize> = (1..m).collect();
            let a = pmf.mutual_information(&s, &t).unwrap();
            let b = pmf.mutual_information(&t, &s).unwrap();
            prop_assert!(a >= -1e-12);
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
