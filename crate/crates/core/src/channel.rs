//! Per-edge channel models: discrete memoryless channels with
//! Blahut-Arimoto capacity, orthogonal-access Gaussian links, the
//! independent-channel mutual-information bound, and seeded symbol
//! transmission.

use crate::source::{entropy_bits, JointPmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default Blahut-Arimoto stopping tolerance (bits).
pub const BA_DEFAULT_TOL: f64 = 1e-9;
/// Default Blahut-Arimoto iteration cap.
pub const BA_DEFAULT_MAX_ITERS: usize = 100_000;
/// Largest joint (input x output) state space `lemma1_gap` will enumerate.
pub const LEMMA1_STATE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Error)]
pub enum ChannelError {
    #[error("transition matrix must be non-empty with equal-length rows")]
    MalformedTransition,
    #[error("transition row {row} sums to {sum}, expected 1")]
    RowNotNormalized { row: usize, sum: f64 },
    #[error("transition entry ({row},{col}) = {value} is negative")]
    NegativeTransition { row: usize, col: usize, value: f64 },
    #[error("capacity iteration did not converge (best lower bound {capacity} bits)")]
    NoConvergence { capacity: f64, input_pmf: Vec<f64> },
    #[error("time fraction tau must be positive (got {0})")]
    NonPositiveTau(f64),
    #[error("time fraction tau must not exceed 1 (got {0})")]
    TauExceedsOne(f64),
    #[error("noise variance must be positive (got {0})")]
    NonPositiveNoise(f64),
    #[error("power must be nonnegative and finite (got {0})")]
    NegativePower(f64),
    #[error("joint input has {got} variables, expected one per link ({expected})")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("joint (input, output) state space of {0} entries exceeds the enumeration limit")]
    StateSpaceTooLarge(usize),
    #[error("input symbol {symbol} out of range for alphabet of size {input_size}")]
    SymbolOutOfRange { symbol: usize, input_size: usize },
    #[error("link endpoints ({from},{to}) invalid for {n_nodes} nodes")]
    BadEndpoints {
        from: usize,
        to: usize,
        n_nodes: usize,
    },
    #[error("link capacity must be nonnegative and finite (got {0})")]
    BadCapacity(f64),
}

/// A discrete memoryless channel given by its transition matrix
/// `transition[x][y] = P(y | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DmcSpec {
    transition: Vec<Vec<f64>>,
}

impl DmcSpec {
    pub fn new(transition: Vec<Vec<f64>>) -> Result<Self, ChannelError> {
        if transition.is_empty() || transition[0].is_empty() {
            return Err(ChannelError::MalformedTransition);
        }
        let cols = transition[0].len();
        for (row, r) in transition.iter().enumerate() {
            if r.len() != cols {
                return Err(ChannelError::MalformedTransition);
            }
            for (col, &value) in r.iter().enumerate() {
                if value < 0.0 || !value.is_finite() {
                    return Err(ChannelError::NegativeTransition { row, col, value });
                }
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(ChannelError::RowNotNormalized { row, sum });
            }
        }
        let transition = transition
            .into_iter()
            .map(|r| {
                let sum: f64 = r.iter().sum();
                r.into_iter().map(|p| p / sum).collect()
            })
            .collect();
        Ok(Self { transition })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self, ChannelError> {
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel with erasure probability `e`; output symbol 1
    /// is the erasure.
    pub fn bec(e: f64) -> Result<Self, ChannelError> {
        Self::new(vec![vec![1.0 - e, e, 0.0], vec![0.0, e, 1.0 - e]])
    }

    /// Noiseless channel on a `k`-ary alphabet.
    pub fn identity(k: usize) -> Result<Self, ChannelError> {
        let rows = (0..k)
            .map(|x| (0..k).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(rows)
    }

    pub fn input_size(&self) -> usize {
        self.transition.len()
    }

    pub fn output_size(&self) -> usize {
        self.transition[0].len()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.transition[x]
    }

    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.transition[x][y]
    }
}

/// Result of a converged Blahut-Arimoto run.
#[derive(Debug, Clone)]
pub struct BaResult {
    /// Capacity estimate in bits per channel use (final lower bound).
    pub capacity: f64,
    /// Input distribution achieving the reported capacity within tolerance.
    pub input_pmf: Vec<f64>,
    pub iterations: usize,
    /// Lower-bound trace, one entry per iteration; non-decreasing.
    pub lower_bounds: Vec<f64>,
}

/// Channel capacity `max_p I(X;Y)` via Blahut-Arimoto.
///
/// Stops once the upper and lower capacity bounds are within `tol`; the
/// reported capacity is then within `tol` of the true value.
pub fn blahut_arimoto(
    dmc: &DmcSpec,
    tol: f64,
    max_iters: usize,
) -> Result<BaResult, ChannelError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let nx = dmc.input_size();
    let ny = dmc.output_size();
    let mut input = vec![1.0 / nx as f64; nx];
    let mut divergence = vec![0.0; nx];
    let mut output = vec![0.0; ny];
    let mut lower_bounds = Vec::new();
    let mut best = (f64::NEG_INFINITY, input.clone());

    for iteration in 1..=max_iters {
        for y in 0..ny {
            output[y] = (0..nx).map(|x| input[x] * dmc.prob(y, x)).sum();
        }
        for x in 0..nx {
            divergence[x] = (0..ny)
                .filter(|&y| dmc.prob(y, x) > 0.0)
                .map(|y| {
                    let p = dmc.prob(y, x);
                    p * (p / output[y]).log2()
                })
                .sum();
        }
        let lower: f64 = (0..nx).map(|x| input[x] * divergence[x]).sum();
        let upper = divergence.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        lower_bounds.push(lower);
        if lower > best.0 {
            best = (lower, input.clone());
        }
        if upper - lower < tol {
            return Ok(BaResult {
                capacity: lower.max(0.0),
                input_pmf: input,
                iterations: iteration,
                lower_bounds,
            });
        }
        let mut norm = 0.0;
        for x in 0..nx {
            input[x] *= 2f64.powf(divergence[x]);
            norm += input[x];
        }
        for v in input.iter_mut() {
            *v /= norm;
        }
    }
    Err(ChannelError::NoConvergence {
        capacity: best.0.max(0.0),
        input_pmf: best.1,
    })
}

/// Capacity in bits per use with the default tolerance and iteration cap.
pub fn capacity(dmc: &DmcSpec) -> Result<f64, ChannelError> {
    blahut_arimoto(dmc, BA_DEFAULT_TOL, BA_DEFAULT_MAX_ITERS).map(|r| r.capacity)
}

/// A single-user Gaussian link under orthogonal (e.g. TDMA) access:
/// a `tau` fraction of channel uses at power `power` over noise `noise_var`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLink {
    pub tau: f64,
    pub power: f64,
    pub noise_var: f64,
}

/// Capacity of an orthogonal-access Gaussian link in bits per use:
/// `tau/2 * log2(1 + P / (sigma^2 tau))`.
pub fn gaussian_capacity(link: &GaussianLink) -> Result<f64, ChannelError> {
    if link.tau <= 0.0 || !link.tau.is_finite() {
        return Err(ChannelError::NonPositiveTau(link.tau));
    }
    if link.tau > 1.0 {
        return Err(ChannelError::TauExceedsOne(link.tau));
    }
    if link.noise_var <= 0.0 || !link.noise_var.is_finite() {
        return Err(ChannelError::NonPositiveNoise(link.noise_var));
    }
    if link.power < 0.0 || !link.power.is_finite() {
        return Err(ChannelError::NegativePower(link.power));
    }
    Ok(link.tau * 0.5 * (1.0 + link.power / (link.noise_var * link.tau)).log2())
}

/// Both sides of the independent-channel bound
/// `I(X_1..X_k; Y_1..Y_k) <= sum_k I(X_k; Y_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Gap {
    pub joint_mi: f64,
    pub sum_link_mi: f64,
}

impl Lemma1Gap {
    pub fn gap(&self) -> f64 {
        self.sum_link_mi - self.joint_mi
    }
}

/// Evaluates both sides of the bound exactly by summation over the joint
/// `(x, y)` space. `joint_input` is a joint distribution with one variable
/// per link, in link order.
pub fn lemma1_gap(links: &[DmcSpec], joint_input: &JointPmf) -> Result<Lemma1Gap, ChannelError> {
    let k = links.len();
    if joint_input.num_vars() != k {
        return Err(ChannelError::DimensionMismatch {
            expected: k,
            got: joint_input.num_vars(),
        });
    }
    for (i, link) in links.iter().enumerate() {
        if joint_input.alphabet_sizes()[i] != link.input_size() {
            return Err(ChannelError::DimensionMismatch {
                expected: link.input_size(),
                got: joint_input.alphabet_sizes()[i],
            });
        }
    }
    let x_space: usize = links.iter().map(|l| l.input_size()).product();
    let y_space: usize = links.iter().map(|l| l.output_size()).product();
    match x_space.checked_mul(y_space) {
        Some(total) if total <= LEMMA1_STATE_LIMIT => {}
        _ => {
            return Err(ChannelError::StateSpaceTooLarge(
                x_space.saturating_mul(y_space),
            ))
        }
    }

    let unflatten = |mut flat: usize, sizes: &[usize], out: &mut [usize]| {
        for i in (0..sizes.len()).rev() {
            out[i] = flat % sizes[i];
            flat /= sizes[i];
        }
    };
    let x_sizes: Vec<usize> = links.iter().map(|l| l.input_size()).collect();
    let y_sizes: Vec<usize> = links.iter().map(|l| l.output_size()).collect();
    let mut xs = vec![0usize; k];
    let mut ys = vec![0usize; k];

    // Output marginal p(y), then the joint mutual information.
    let mut p_y = vec![0.0; y_space];
    for fx in 0..x_space {
        unflatten(fx, &x_sizes, &mut xs);
        let px = joint_input.probs()[fx];
        if px == 0.0 {
            continue;
        }
        for (fy, p_y_entry) in p_y.iter_mut().enumerate() {
            unflatten(fy, &y_sizes, &mut ys);
            let mut cond = 1.0;
            for i in 0..k {
                cond *= links[i].prob(ys[i], xs[i]);
            }
            *p_y_entry += px * cond;
        }
    }
    let mut joint_mi = 0.0;
    for fx in 0..x_space {
        unflatten(fx, &x_sizes, &mut xs);
        let px = joint_input.probs()[fx];
        if px == 0.0 {
            continue;
        }
        for fy in 0..y_space {
            unflatten(fy, &y_sizes, &mut ys);
            let mut cond = 1.0;
            for i in 0..k {
                cond *= links[i].prob(ys[i], xs[i]);
            }
            if cond == 0.0 {
                continue;
            }
            let pxy = px * cond;
            joint_mi += pxy * (cond / p_y[fy]).log2();
        }
    }

    // Per-link mutual information under the input marginals.
    let mut sum_link_mi = 0.0;
    for (i, link) in links.iter().enumerate() {
        let marginal = marginal_of(joint_input, i);
        sum_link_mi += single_link_mi(link, &marginal);
    }

    Ok(Lemma1Gap {
        joint_mi,
        sum_link_mi,
    })
}

fn marginal_of(pmf: &JointPmf, var: usize) -> Vec<f64> {
    let sizes = pmf.alphabet_sizes();
    let mut out = vec![0.0; sizes[var]];
    let mut outcome = vec![0usize; sizes.len()];
    for (flat, &p) in pmf.probs().iter().enumerate() {
        let mut rem = flat;
        for k in (0..sizes.len()).rev() {
            outcome[k] = rem % sizes[k];
            rem /= sizes[k];
        }
        out[outcome[var]] += p;
    }
    out
}

fn single_link_mi(link: &DmcSpec, input: &[f64]) -> f64 {
    let ny = link.output_size();
    let mut w = vec![0.0; ny];
    for (x, &px) in input.iter().enumerate() {
        for (y, w_entry) in w.iter_mut().enumerate() {
            *w_entry += px * link.prob(y, x);
        }
    }
    let h_y = entropy_bits(&w);
    let h_y_given_x: f64 = input
        .iter()
        .enumerate()
        .map(|(x, &px)| px * entropy_bits(link.row(x)))
        .sum();
    h_y - h_y_given_x
}

/// Applies the channel law i.i.d. per symbol; deterministic given `seed`.
pub fn transmit(dmc: &DmcSpec, inputs: &[usize], seed: u64) -> Result<Vec<usize>, ChannelError> {
    for &symbol in inputs {
        if symbol >= dmc.input_size() {
            return Err(ChannelError::SymbolOutOfRange {
                symbol,
                input_size: dmc.input_size(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outputs = Vec::with_capacity(inputs.len());
    for &x in inputs {
        let u: f64 = rng.gen();
        let row = dmc.row(x);
        let mut acc = 0.0;
        let mut chosen = row.len() - 1;
        for (y, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                chosen = y;
                break;
            }
        }
        outputs.push(chosen);
    }
    Ok(outputs)
}

/// How one directed link is specified.
#[derive(Debug, Clone)]
pub enum LinkKind {
    /// Ideal bit pipe with the given capacity in bits per use.
    Capacity(f64),
    /// Discrete memoryless channel; capacity resolved by Blahut-Arimoto.
    Dmc(DmcSpec),
    /// Orthogonal-access Gaussian link; capacity from the closed form.
    Gaussian(GaussianLink),
}

/// The network: a complete directed graph on `n_nodes` nodes where absent
/// links have capacity zero. Node 0 is the sink.
#[derive(Debug, Clone)]
pub struct LinkSet {
    n_nodes: usize,
    kinds: Vec<Option<LinkKind>>,
    capacities: Vec<f64>,
}

impl LinkSet {
    pub fn new(n_nodes: usize) -> Self {
        Self {
            n_nodes,
            kinds: vec![None; n_nodes * n_nodes],
            capacities: vec![0.0; n_nodes * n_nodes],
        }
    }

    pub fn with_links(
        n_nodes: usize,
        entries: Vec<(usize, usize, LinkKind)>,
    ) -> Result<Self, ChannelError> {
        let mut set = Self::new(n_nodes);
        for (from, to, kind) in entries {
            set.set(from, to, kind)?;
        }
        Ok(set)
    }

    /// Star network: node i has an ideal link to the sink of capacity
    /// `capacities[i-1]` and no cooperation links.
    pub fn star(capacities: &[f64]) -> Result<Self, ChannelError> {
        let mut set = Self::new(capacities.len() + 1);
        for (i, &c) in capacities.iter().enumerate() {
            set.set(i + 1, 0, LinkKind::Capacity(c))?;
        }
        Ok(set)
    }

    /// Installs a link, resolving its capacity eagerly.
    pub fn set(&mut self, from: usize, to: usize, kind: LinkKind) -> Result<(), ChannelError> {
        if from == to || from >= self.n_nodes || to >= self.n_nodes {
            return Err(ChannelError::BadEndpoints {
                from,
                to,
                n_nodes: self.n_nodes,
            });
        }
        let cap = match &kind {
            LinkKind::Capacity(c) => {
                if *c < 0.0 || !c.is_finite() {
                    return Err(ChannelError::BadCapacity(*c));
                }
                *c
            }
            LinkKind::Dmc(dmc) => capacity(dmc)?,
            LinkKind::Gaussian(g) => gaussian_capacity(g)?,
        };
        let idx = from * self.n_nodes + to;
        self.kinds[idx] = Some(kind);
        self.capacities[idx] = cap;
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Capacity of the directed link `(from, to)`; 0 for absent links.
    pub fn capacity(&self, from: usize, to: usize) -> f64 {
        self.capacities[from * self.n_nodes + to]
    }

    pub fn kind(&self, from: usize, to: usize) -> Option<&LinkKind> {
        self.kinds[from * self.n_nodes + to].as_ref()
    }

    /// Directed edges with positive capacity, in (from, to) order.
    pub fn positive_edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for from in 0..self.n_nodes {
            for to in 0..self.n_nodes {
                let c = self.capacity(from, to);
                if from != to && c > 0.0 {
                    out.push((from, to, c));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::binary_entropy;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bsc_capacity_extremes() {
        let c0 = capacity(&DmcSpec::bsc(0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(c0, 1.0, epsilon = 1e-9);
        let c_half = capacity(&DmcSpec::bsc(0.5).unwrap()).unwrap();
        assert_abs_diff_eq!(c_half, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn bsc_capacity_matches_closed_form() {
        let c = capacity(&DmcSpec::bsc(0.11).unwrap()).unwrap();
        assert_abs_diff_eq!(c, 1.0 - binary_entropy(0.11), epsilon = 1e-9);
        assert_abs_diff_eq!(c, 0.50008, epsilon = 1e-5);
    }

    #[test]
    fn bec_capacity_matches_closed_form() {
        for e in [0.0, 0.25, 0.5, 0.9] {
            let c = capacity(&DmcSpec::bec(e).unwrap()).unwrap();
            assert_abs_diff_eq!(c, 1.0 - e, epsilon = 1e-5);
        }
    }

    #[test]
    fn ba_lower_bounds_are_non_decreasing() {
        // Asymmetric channel so the iteration actually moves.
        let dmc = DmcSpec::new(vec![
            vec![0.7, 0.2, 0.1],
            vec![0.1, 0.8, 0.1],
            vec![0.25, 0.25, 0.5],
        ])
        .unwrap();
        let result = blahut_arimoto(&dmc, 1e-10, 100_000).unwrap();
        for pair in result.lower_bounds.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-12, "lower bound decreased: {pair:?}");
        }
        // The reported input pmf achieves the reported capacity.
        let achieved = single_link_mi(&dmc, &result.input_pmf);
        assert_abs_diff_eq!(achieved, result.capacity, epsilon = 1e-8);
    }

    #[test]
    fn ba_no_convergence_reports_best_pair() {
        let dmc = DmcSpec::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.8, 0.1]]).unwrap();
        let err = blahut_arimoto(&dmc, 1e-12, 2).unwrap_err();
        match err {
            ChannelError::NoConvergence {
                capacity,
                input_pmf,
            } => {
                assert!(capacity > 0.0);
                assert_eq!(input_pmf.len(), 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn gaussian_capacity_cases() {
        let zero_power = GaussianLink {
            tau: 0.7,
            power: 0.0,
            noise_var: 1.0,
        };
        assert_eq!(gaussian_capacity(&zero_power).unwrap(), 0.0);

        let unit = GaussianLink {
            tau: 1.0,
            power: 1.0,
            noise_var: 1.0,
        };
        assert_abs_diff_eq!(gaussian_capacity(&unit).unwrap(), 0.5, epsilon = 1e-12);

        let half = GaussianLink {
            tau: 0.5,
            power: 1.0,
            noise_var: 1.0,
        };
        let expected = 0.25 * 3f64.log2();
        assert_abs_diff_eq!(gaussian_capacity(&half).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(gaussian_capacity(&half).unwrap(), 0.39624, epsilon = 1e-5);
    }

    #[test]
    fn gaussian_capacity_monotone_in_power_and_noise() {
        let mut prev = 0.0;
        for k in 1..=20 {
            let c = gaussian_capacity(&GaussianLink {
                tau: 0.5,
                power: k as f64 * 0.3,
                noise_var: 1.0,
            })
            .unwrap();
            assert!(c > prev);
            prev = c;
        }
        let mut prev = f64::INFINITY;
        for k in 1..=20 {
            let c = gaussian_capacity(&GaussianLink {
                tau: 0.5,
                power: 1.0,
                noise_var: k as f64 * 0.3,
            })
            .unwrap();
            assert!(c < prev);
            prev = c;
        }
    }

    #[test]
    fn gaussian_capacity_rejects_bad_parameters() {
        assert!(matches!(
            gaussian_capacity(&GaussianLink {
                tau: 0.0,
                power: 1.0,
                noise_var: 1.0
            }),
            Err(ChannelError::NonPositiveTau(_))
        ));
        assert!(matches!(
            gaussian_capacity(&GaussianLink {
                tau: 0.5,
                power: 1.0,
                noise_var: 0.0
            }),
            Err(ChannelError::NonPositiveNoise(_))
        ));
    }

    #[test]
    fn lemma1_equality_for_independent_inputs() {
        let links = vec![DmcSpec::bsc(0.11).unwrap(), DmcSpec::bsc(0.2).unwrap()];
        let joint = JointPmf::new(vec![2, 2], vec![0.25; 4]).unwrap();
        let gap = lemma1_gap(&links, &joint).unwrap();
        assert_abs_diff_eq!(gap.joint_mi, gap.sum_link_mi, epsilon = 1e-9);
    }

    #[test]
    fn lemma1_strict_for_correlated_inputs() {
        let links = vec![DmcSpec::bsc(0.11).unwrap(), DmcSpec::bsc(0.11).unwrap()];
        // X1 = X2, uniform.
        let joint = JointPmf::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let gap = lemma1_gap(&links, &joint).unwrap();
        assert!(
            gap.joint_mi < gap.sum_link_mi - 1e-6,
            "joint {} vs sum {}",
            gap.joint_mi,
            gap.sum_link_mi
        );
    }

    #[test]
    fn lemma1_single_link_is_exact() {
        let links = vec![DmcSpec::bsc(0.3).unwrap()];
        let joint = JointPmf::new(vec![2], vec![0.6, 0.4]).unwrap();
        let gap = lemma1_gap(&links, &joint).unwrap();
        assert_abs_diff_eq!(gap.joint_mi, gap.sum_link_mi, epsilon = 1e-12);
    }

    #[test]
    fn lemma1_rejects_mismatched_dimensions() {
        let links = vec![DmcSpec::bsc(0.1).unwrap()];
        let joint = JointPmf::new(vec![3], vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(
            lemma1_gap(&links, &joint),
            Err(ChannelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transmit_identity_and_flip() {
        let id = DmcSpec::identity(3).unwrap();
        let input = vec![0, 1, 2, 1, 0];
        assert_eq!(transmit(&id, &input, 9).unwrap(), input);

        let flip = DmcSpec::bsc(1.0).unwrap();
        let bits = vec![0, 1, 1, 0];
        assert_eq!(transmit(&flip, &bits, 9).unwrap(), vec![1, 0, 0, 1]);
    }

    #[test]
    fn transmit_flip_fraction_near_crossover() {
        let bsc = DmcSpec::bsc(0.11).unwrap();
        let input = vec![0usize; 10_000];
        let output = transmit(&bsc, &input, 17).unwrap();
        let flips = output.iter().filter(|&&y| y == 1).count();
        let rate = flips as f64 / input.len() as f64;
        assert!((rate - 0.11).abs() < 0.01, "flip rate {rate}");
    }

    #[test]
    fn transmit_rejects_out_of_range_symbols() {
        let bsc = DmcSpec::bsc(0.1).unwrap();
        assert!(matches!(
            transmit(&bsc, &[0, 2], 1),
            Err(ChannelError::SymbolOutOfRange { symbol: 2, .. })
        ));
    }

    #[test]
    fn link_set_resolves_capacities() {
        let mut links = LinkSet::new(3);
        links.set(1, 0, LinkKind::Capacity(0.8)).unwrap();
        links
            .set(2, 0, LinkKind::Dmc(DmcSpec::bsc(0.11).unwrap()))
            .unwrap();
        links
            .set(
                1,
                2,
                LinkKind::Gaussian(GaussianLink {
                    tau: 1.0,
                    power: 1.0,
                    noise_var: 1.0,
                }),
            )
            .unwrap();
        assert_abs_diff_eq!(links.capacity(1, 0), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(
            links.capacity(2, 0),
            1.0 - binary_entropy(0.11),
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(links.capacity(1, 2), 0.5, epsilon = 1e-12);
        assert_eq!(links.capacity(0, 1), 0.0);
        assert!(links.set(1, 1, LinkKind::Capacity(1.0)).is_err());
        assert!(links.set(1, 0, LinkKind::Capacity(-1.0)).is_err());
    }
}
