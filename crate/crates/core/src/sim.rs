//! Monte-Carlo simulation of the complete coding strategy: random-binning
//! encoders at each node, bin-index transport along a routing schedule
//! through the pipelined network, and joint maximum-likelihood decoding at
//! the sink.

use crate::admissibility::{slepian_wolf_member, RateVector};
use crate::channel::{transmit, ChannelError, DmcSpec, LinkKind, LinkSet};
use crate::flow::RoutingSchedule;
use crate::source::{JointPmf, SourceError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Encoding window: each source block participates exactly once.
pub const K_WINDOW: usize = 1;
/// Relaying window: each received block is forwarded exactly once.
pub const T_WINDOW: usize = 1;

/// Largest per-node sequence space the decoder will enumerate into bins.
pub const PER_NODE_ENUM_LIMIT: u64 = 1 << 22;
/// Largest number of bin-consistent candidate tuples scanned per decode.
pub const DECODE_SCAN_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Error)]
pub enum SimError {
    #[error("schedule does not match the code configuration: {0}")]
    ScheduleMismatch(String),
    #[error("scan budget exceeded: needed {needed}, budget {budget}")]
    ScanBudgetExceeded { needed: u64, budget: u64 },
    #[error("node {node} asks for {bits} bin bits but its alphabet carries only {max_bits:.3} bits per block")]
    BinsExceedAlphabet {
        node: usize,
        bits: u32,
        max_bits: f64,
    },
    #[error("rate vector lies inside the achievable region (worst margin {margin}); nothing to probe")]
    ProbeInsideRegion { margin: f64 },
    #[error("decoder input mismatch: {0}")]
    DecoderInput(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Admissibility(#[from] crate::admissibility::AdmissibilityError),
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Hashes a symbol sequence to a bin index in `{0, ..., 2^bits - 1}`.
/// Deterministic given `(binning_seed, node)`; uniform over bins in
/// distribution.
pub fn sw_encode(block: &[usize], bits: u32, node: usize, binning_seed: u64) -> u64 {
    debug_assert!(bits <= 63);
    let golden = 0x9e3779b97f4a7c15u64;
    let mut state = mix64(binning_seed ^ mix64((node as u64).wrapping_add(golden)));
    for &symbol in block {
        state = mix64(state ^ (symbol as u64).wrapping_add(golden));
    }
    if bits == 0 {
        0
    } else {
        state & ((1u64 << bits) - 1)
    }
}

/// Code parameters: block length, rate allocation, binning seed, and the
/// decode delay (at least the schedule's hop count). The sliding windows
/// are pinned at [`K_WINDOW`] = [`T_WINDOW`] = 1.
#[derive(Debug, Clone)]
pub struct CodeConfig {
    pub n: usize,
    pub rates: RateVector,
    pub binning_seed: u64,
    pub w_delay: usize,
}

impl CodeConfig {
    /// Configuration matched to a schedule, with the decode delay set to
    /// the length of the forwarding order.
    pub fn for_schedule(schedule: &RoutingSchedule, rates: RateVector, binning_seed: u64) -> Self {
        Self {
            n: schedule.n,
            rates,
            binning_seed,
            w_delay: schedule.topo_order.len(),
        }
    }

    /// Bin bits for a source node: `ceil(n * R_i)`.
    pub fn bits_for(&self, node: usize) -> u32 {
        (self.n as f64 * self.rates.rate_of_node(node)).ceil() as u32
    }
}

/// Joint maximum-likelihood decoder over bin-consistent tuples, with
/// per-node bin preimage lists precomputed.
pub struct SwDecoder {
    n: usize,
    sizes: Vec<usize>,
    bits: Vec<u32>,
    /// bins[i][b] = packed sequences of source node i+1 hashing to bin b,
    /// ascending (lexicographic, symbols packed most-significant-first).
    bins: Vec<Vec<Vec<u64>>>,
    /// ln p(u_0, ..., u_M), flat row-major; -inf marks zero probability.
    log_probs: Vec<f64>,
}

impl SwDecoder {
    pub fn new(
        source: &JointPmf,
        n: usize,
        bits: &[u32],
        binning_seed: u64,
    ) -> Result<Self, SimError> {
        let m = source.num_sources();
        if bits.len() != m {
            return Err(SimError::DecoderInput(format!(
                "{} bit widths for {} sources",
                bits.len(),
                m
            )));
        }
        let sizes = source.alphabet_sizes().to_vec();
        for (idx, &b) in bits.iter().enumerate() {
            let node = idx + 1;
            let max_bits = n as f64 * (sizes[node] as f64).log2();
            if b as f64 > max_bits + 1e-9 || b > 63 {
                return Err(SimError::BinsExceedAlphabet {
                    node,
                    bits: b,
                    max_bits,
                });
            }
        }
        let mut bins = Vec::with_capacity(m);
        let mut symbols = vec![0usize; n];
        for (idx, &b) in bits.iter().enumerate() {
            let node = idx + 1;
            let size = sizes[node] as u64;
            let space = size
                .checked_pow(n as u32)
                .filter(|&s| s <= PER_NODE_ENUM_LIMIT)
                .ok_or(SimError::ScanBudgetExceeded {
                    needed: u64::MAX,
                    budget: PER_NODE_ENUM_LIMIT,
                })?;
            let mut node_bins = vec![Vec::new(); 1usize << b];
            for packed in 0..space {
                unpack_sequence(packed, size, &mut symbols);
                let bin = sw_encode(&symbols, b, node, binning_seed);
                node_bins[bin as usize].push(packed);
            }
            bins.push(node_bins);
        }
        let log_probs = source
            .probs()
            .iter()
            .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
            .collect();
        Ok(Self {
            n,
            sizes,
            bits: bits.to_vec(),
            bins,
            log_probs,
        })
    }

    pub fn bits(&self) -> &[u32] {
        &self.bits
    }

    /// Most probable source tuple consistent with the bin indices and the
    /// sink's side information; ties broken toward the lexicographically
    /// smallest tuple. Returns one block per source node.
    pub fn decode(
        &self,
        bin_indices: &[u64],
        side_info: &[usize],
    ) -> Result<Vec<Vec<usize>>, SimError> {
        let m = self.bins.len();
        if bin_indices.len() != m {
            return Err(SimError::DecoderInput(format!(
                "{} bin indices for {} sources",
                bin_indices.len(),
                m
            )));
        }
        if side_info.len() != self.n {
            return Err(SimError::DecoderInput(format!(
                "side information of length {} for block length {}",
                side_info.len(),
                self.n
            )));
        }
        for &s in side_info {
            if s >= self.sizes[0] {
                return Err(SimError::DecoderInput(format!(
                    "side-information symbol {s} outside alphabet of size {}",
                    self.sizes[0]
                )));
            }
        }
        let mut candidates = Vec::with_capacity(m);
        for (idx, &bin) in bin_indices.iter().enumerate() {
            let node_bins = &self.bins[idx];
            let list = node_bins
                .get(bin as usize)
                .filter(|l| !l.is_empty())
                .ok_or_else(|| {
                    SimError::DecoderInput(format!(
                        "bin {bin} of node {} is empty or out of range",
                        idx + 1
                    ))
                })?;
            candidates.push(list.as_slice());
        }
        let total: u64 = candidates
            .iter()
            .map(|l| l.len() as u64)
            .try_fold(1u64, |acc, len| acc.checked_mul(len))
            .unwrap_or(u64::MAX);
        if total > DECODE_SCAN_BUDGET {
            return Err(SimError::ScanBudgetExceeded {
                needed: total,
                budget: DECODE_SCAN_BUDGET,
            });
        }

        let mut scratch = vec![vec![0usize; self.n]; m];
        let mut best_score = f64::NEG_INFINITY;
        let mut best: Vec<u64> = Vec::new();
        let mut stack_choice = vec![0usize; m];
        // Depth-first product in lexicographic order; strict improvement
        // keeps the first (lexicographically smallest) maximizer.
        let mut level = 0usize;
        loop {
            if stack_choice[level] == candidates[level].len() {
                if level == 0 {
                    break;
                }
                stack_choice[level] = 0;
                level -= 1;
                stack_choice[level] += 1;
                continue;
            }
            let packed = candidates[level][stack_choice[level]];
            unpack_sequence(packed, self.sizes[level + 1] as u64, &mut scratch[level]);
            if level + 1 < m {
                level += 1;
                continue;
            }
            let score = self.score(side_info, &scratch);
            if score > best_score {
                best_score = score;
                best = (0..m).map(|i| candidates[i][stack_choice[i]]).collect();
            }
            stack_choice[level] += 1;
        }
        if best.is_empty() {
            return Err(SimError::Internal("no decodable candidate tuple".into()));
        }
        Ok(best
            .iter()
            .enumerate()
            .map(|(i, &packed)| {
                let mut symbols = vec![0usize; self.n];
                unpack_sequence(packed, self.sizes[i + 1] as u64, &mut symbols);
                symbols
            })
            .collect())
    }

    fn score(&self, side_info: &[usize], tuple: &[Vec<usize>]) -> f64 {
        let mut score = 0.0;
        for t in 0..self.n {
            let mut flat = side_info[t];
            for (i, seq) in tuple.iter().enumerate() {
                flat = flat * self.sizes[i + 1] + seq[t];
            }
            score += self.log_probs[flat];
            if score == f64::NEG_INFINITY {
                return score;
            }
        }
        score
    }
}

fn unpack_sequence(mut packed: u64, alphabet: u64, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = (packed % alphabet) as usize;
        packed /= alphabet;
    }
}

/// One-shot encode/decode round trip helper: bins each node's block and
/// decodes the tuple back with fresh preimage lists.
pub fn sw_decode(
    source: &JointPmf,
    bits: &[u32],
    binning_seed: u64,
    bin_indices: &[u64],
    side_info: &[usize],
) -> Result<Vec<Vec<usize>>, SimError> {
    let decoder = SwDecoder::new(source, side_info.len(), bits, binning_seed)?;
    decoder.decode(bin_indices, side_info)
}

/// How link noise is modeled during transport.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    /// Links are ideal bit pipes at capacity (the coding-theorem
    /// abstraction); the default and the only mode used by acceptance runs.
    Ideal,
    /// Demonstration mode: bits cross DMC links under a repetition code
    /// with majority-style ML per bit. `reps` should be odd.
    NoisyRepetition { reps: usize },
}

/// Per-edge payload of one block's transport.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePayload {
    pub round: usize,
    pub from: usize,
    pub to: usize,
    pub bits: Vec<u8>,
}

/// Everything one block did on its way through the pipeline.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub block_index: usize,
    pub payloads: Vec<EdgePayload>,
    pub side_info: Vec<usize>,
    pub truth: Vec<Vec<usize>>,
    pub estimate: Vec<Vec<usize>>,
    pub error: bool,
}

/// Deterministic bit transport along a schedule. Built once, then reused
/// for every block: the sink's received stream is mapped back to
/// per-origin bit vectors through the inverse of the partition tables.
pub struct Transport {
    schedule: RoutingSchedule,
    /// For each origin node, the positions of its bits in the sink stream,
    /// listed in bit order.
    origin_positions: Vec<Vec<usize>>,
}

impl Transport {
    pub fn new(schedule: &RoutingSchedule) -> Result<Self, SimError> {
        let n_nodes = schedule.plans.len();
        // Tag every bit with (origin, index) and push it through the
        // partition tables once.
        let tags = route_streams(schedule, |node| {
            (0..schedule.bits_per_block[node])
                .map(|b| (node, b as usize))
                .collect()
        });
        let mut origin_positions = vec![Vec::new(); n_nodes];
        for node in 0..n_nodes {
            let expected = schedule.bits_per_block[node] as usize;
            let mut positions = vec![usize::MAX; expected];
            for (pos, &(origin, bit)) in tags.iter().enumerate() {
                if origin == node {
                    if bit >= expected || positions[bit] != usize::MAX {
                        return Err(SimError::Internal(format!(
                            "bit {bit} of node {node} is not uniquely delivered"
                        )));
                    }
                    positions[bit] = pos;
                }
            }
            if positions.iter().any(|&p| p == usize::MAX) {
                return Err(SimError::Internal(format!(
                    "some bits of node {node} never reach the sink"
                )));
            }
            origin_positions[node] = positions;
        }
        Ok(Self {
            schedule: schedule.clone(),
            origin_positions,
        })
    }

    pub fn schedule(&self) -> &RoutingSchedule {
        &self.schedule
    }

    /// Ships per-node local bit vectors to the sink over ideal pipes.
    /// Returns the recovered per-origin bits and the edge payloads
    /// (rounds offset by `base_round`).
    pub fn deliver(
        &self,
        locals: &[Vec<u8>],
        base_round: usize,
    ) -> Result<(Vec<Vec<u8>>, Vec<EdgePayload>), SimError> {
        self.deliver_with(locals, base_round, |_, _, bits| bits.to_vec())
    }

    /// Like [`Transport::deliver`] but applies a per-edge transformation
    /// to each payload (used for the noisy demonstration mode).
    pub fn deliver_with(
        &self,
        locals: &[Vec<u8>],
        base_round: usize,
        mut edge_effect: impl FnMut(usize, usize, &[u8]) -> Vec<u8>,
    ) -> Result<(Vec<Vec<u8>>, Vec<EdgePayload>), SimError> {
        let schedule = &self.schedule;
        let n_nodes = schedule.plans.len();
        for node in 0..n_nodes {
            if locals[node].len() != schedule.bits_per_block[node] as usize {
                return Err(SimError::ScheduleMismatch(format!(
                    "node {node} supplies {} bits, schedule expects {}",
                    locals[node].len(),
                    schedule.bits_per_block[node]
                )));
            }
        }
        let mut payloads = Vec::new();
        let mut received: Vec<Vec<Option<Vec<u8>>>> = vec![vec![None; n_nodes]; n_nodes];
        let mut sink_stream = Vec::new();
        for (stage, &node) in schedule.topo_order.iter().enumerate() {
            let plan = &schedule.plans[node];
            let mut stream = Vec::new();
            for &(src, bits) in &plan.inbound {
                let segment = received[node][src].take().ok_or_else(|| {
                    SimError::Internal(format!("segment {src}->{node} missing"))
                })?;
                debug_assert_eq!(segment.len(), bits as usize);
                stream.extend_from_slice(&segment);
            }
            stream.extend_from_slice(&locals[node]);
            if node == 0 {
                sink_stream = stream;
                continue;
            }
            let mut offset = 0usize;
            for &(dst, bits) in &plan.outbound {
                let segment = &stream[offset..offset + bits as usize];
                offset += bits as usize;
                let delivered = edge_effect(node, dst, segment);
                debug_assert_eq!(delivered.len(), segment.len());
                payloads.push(EdgePayload {
                    round: base_round + stage,
                    from: node,
                    to: dst,
                    bits: delivered.clone(),
                });
                received[dst][node] = Some(delivered);
            }
            if offset != stream.len() {
                return Err(SimError::Internal(format!(
                    "node {node} left {} bits unrouted",
                    stream.len() - offset
                )));
            }
        }
        let mut per_origin = Vec::with_capacity(n_nodes);
        for node in 0..n_nodes {
            let bits = self.origin_positions[node]
                .iter()
                .map(|&pos| sink_stream[pos])
                .collect();
            per_origin.push(bits);
        }
        Ok((per_origin, payloads))
    }
}

/// Pushes per-node item streams through the partition tables and returns
/// the sink's received stream. Panics only on malformed schedules, which
/// [`crate::flow::flow_to_schedule`] never produces.
fn route_streams<T: Copy>(
    schedule: &RoutingSchedule,
    locals: impl Fn(usize) -> Vec<T>,
) -> Vec<T> {
    let n_nodes = schedule.plans.len();
    let mut received: Vec<Vec<Option<Vec<T>>>> = vec![vec![None; n_nodes]; n_nodes];
    for &node in &schedule.topo_order {
        let plan = &schedule.plans[node];
        let mut stream: Vec<T> = Vec::new();
        for &(src, _) in &plan.inbound {
            stream.extend(received[node][src].take().expect("segment routed in topo order"));
        }
        stream.extend(locals(node));
        if node == 0 {
            return stream;
        }
        let mut offset = 0usize;
        for &(dst, bits) in &plan.outbound {
            received[dst][node] = Some(stream[offset..offset + bits as usize].to_vec());
            offset += bits as usize;
        }
    }
    Vec::new()
}

/// Result of a pipeline simulation campaign.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub transcripts: Vec<Transcript>,
    pub trials: usize,
    pub errors: usize,
    pub pe: f64,
}

fn bin_to_bits(bin: u64, bits: u32) -> Vec<u8> {
    (0..bits).map(|k| ((bin >> k) & 1) as u8).collect()
}

fn bits_to_bin(bits: &[u8]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (k, &b)| acc | ((b as u64) << k))
}

/// Simulates `l_blocks` pipelined blocks end to end: encode, split and
/// forward along the schedule, reassemble and jointly decode at the sink
/// after the configured delay. `P_e` is the fraction of blocks whose
/// reconstruction differs anywhere from the truth.
pub fn run_pipeline(
    links: &LinkSet,
    source: &JointPmf,
    schedule: &RoutingSchedule,
    config: &CodeConfig,
    l_blocks: usize,
    master_seed: u64,
    mode: ChannelMode,
) -> Result<PipelineResult, SimError> {
    let n_nodes = source.num_vars();
    if schedule.plans.len() != n_nodes || links.n_nodes() != n_nodes {
        return Err(SimError::ScheduleMismatch(format!(
            "schedule/links cover {} / {} nodes, source has {}",
            schedule.plans.len(),
            links.n_nodes(),
            n_nodes
        )));
    }
    if schedule.n != config.n {
        return Err(SimError::ScheduleMismatch(format!(
            "schedule block length {} != config block length {}",
            schedule.n, config.n
        )));
    }
    if config.rates.len() != source.num_sources() {
        return Err(SimError::ScheduleMismatch(format!(
            "{} rates for {} sources",
            config.rates.len(),
            source.num_sources()
        )));
    }
    for node in 1..n_nodes {
        let expected = config.bits_for(node) as u64;
        if schedule.bits_per_block[node] != expected {
            return Err(SimError::ScheduleMismatch(format!(
                "node {node} schedules {} bits, rates require {expected}",
                schedule.bits_per_block[node]
            )));
        }
    }
    if config.w_delay < schedule.max_hops {
        return Err(SimError::ScheduleMismatch(format!(
            "decode delay {} below the schedule's {} hops",
            config.w_delay, schedule.max_hops
        )));
    }
    for plan in &schedule.plans {
        for &(dst, bits) in &plan.outbound {
            let budget = (config.n as f64 * links.capacity(plan.node, dst) + 1e-9).floor() as u64;
            if bits > budget {
                return Err(SimError::ScheduleMismatch(format!(
                    "edge ({},{dst}) ships {bits} bits over its budget {budget}",
                    plan.node
                )));
            }
            if let ChannelMode::NoisyRepetition { reps } = mode {
                if reps == 0 {
                    return Err(SimError::ScheduleMismatch(
                        "repetition count must be positive".into(),
                    ));
                }
                match links.kind(plan.node, dst) {
                    Some(LinkKind::Dmc(dmc)) if dmc.input_size() >= 2 => {}
                    _ => {
                        return Err(SimError::ScheduleMismatch(format!(
                            "noisy mode needs a binary-input DMC on edge ({},{dst})",
                            plan.node
                        )))
                    }
                }
            }
        }
    }

    let bits: Vec<u32> = (1..n_nodes).map(|node| config.bits_for(node)).collect();
    let decoder = SwDecoder::new(source, config.n, &bits, config.binning_seed)?;
    let transport = Transport::new(schedule)?;

    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    let mut errors = 0usize;
    let mut transcripts = Vec::with_capacity(l_blocks);
    for block_index in 0..l_blocks {
        let block_seed: u64 = rng.gen();
        let noise_seed: u64 = rng.gen();
        let block = source.sample_block(config.n, block_seed)?;
        let mut locals: Vec<Vec<u8>> = Vec::with_capacity(n_nodes);
        locals.push(Vec::new());
        for node in 1..n_nodes {
            let bin = sw_encode(block.node(node), bits[node - 1], node, config.binning_seed);
            locals.push(bin_to_bits(bin, bits[node - 1]));
        }

        let (delivered, payloads) = match mode {
            ChannelMode::Ideal => transport.deliver(&locals, block_index)?,
            ChannelMode::NoisyRepetition { reps } => {
                let mut edge_counter = 0u64;
                let mut failure: Option<SimError> = None;
                let result = transport.deliver_with(&locals, block_index, |from, to, seg| {
                    edge_counter += 1;
                    let seed = mix64(noise_seed ^ mix64(edge_counter));
                    match links.kind(from, to) {
                        Some(LinkKind::Dmc(dmc)) => {
                            match repetition_ship(dmc, seg, reps, seed) {
                                Ok(out) => out,
                                Err(e) => {
                                    failure = Some(e.into());
                                    seg.to_vec()
                                }
                            }
                        }
                        _ => seg.to_vec(),
                    }
                })?;
                if let Some(e) = failure {
                    return Err(e);
                }
                result
            }
        };

        let bin_indices: Vec<u64> = (1..n_nodes).map(|node| bits_to_bin(&delivered[node])).collect();
        let estimate = decoder.decode(&bin_indices, block.node(0))?;
        let truth: Vec<Vec<usize>> = (1..n_nodes).map(|node| block.node(node).to_vec()).collect();
        let error = estimate != truth;
        if error {
            errors += 1;
        }
        transcripts.push(Transcript {
            block_index,
            payloads,
            side_info: block.node(0).to_vec(),
            truth,
            estimate,
            error,
        });
    }
    Ok(PipelineResult {
        trials: l_blocks,
        errors,
        pe: errors as f64 / l_blocks.max(1) as f64,
        transcripts,
    })
}

/// Sends each bit `reps` times over the DMC and decides it back by
/// per-bit maximum likelihood.
fn repetition_ship(
    dmc: &DmcSpec,
    bits: &[u8],
    reps: usize,
    seed: u64,
) -> Result<Vec<u8>, ChannelError> {
    let mut symbols = Vec::with_capacity(bits.len() * reps);
    for &b in bits {
        for _ in 0..reps {
            symbols.push(b as usize);
        }
    }
    let outputs = transmit(dmc, &symbols, seed)?;
    let mut decoded = Vec::with_capacity(bits.len());
    for chunk in outputs.chunks(reps) {
        let mut ll0 = 0.0f64;
        let mut ll1 = 0.0f64;
        for &y in chunk {
            ll0 += dmc.prob(y, 0).max(1e-300).ln();
            ll1 += dmc.prob(y, 1).max(1e-300).ln();
        }
        decoded.push(if ll1 > ll0 { 1 } else { 0 });
    }
    Ok(decoded)
}

/// One point of an error-probability curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbePoint {
    pub n: usize,
    pub trials: usize,
    pub errors: usize,
    pub pe: f64,
}

/// Probes the converse direction: for a rate vector strictly outside the
/// achievable region (margin at least 0.1 bits on some subset), runs the
/// joint ML decoder at each block length and reports the error curve.
///
/// Bin widths are `floor(n * r_i)` so the operating point never rounds
/// back inside the region.
pub fn converse_probe(
    source: &JointPmf,
    rates: &RateVector,
    n_list: &[usize],
    trials: usize,
    master_seed: u64,
) -> Result<Vec<ProbePoint>, SimError> {
    let membership = slepian_wolf_member(source, rates)?;
    if membership.member || membership.worst_margin > -0.1 + 1e-12 {
        return Err(SimError::ProbeInsideRegion {
            margin: membership.worst_margin,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let bits: Vec<u32> = (1..=source.num_sources())
            .map(|node| (n as f64 * rates.rate_of_node(node)).floor() as u32)
            .collect();
        let binning_seed: u64 = rng.gen();
        let decoder = SwDecoder::new(source, n, &bits, binning_seed)?;
        let mut errors = 0usize;
        for _ in 0..trials {
            let block_seed: u64 = rng.gen();
            let block = source.sample_block(n, block_seed)?;
            let bins: Vec<u64> = (1..=source.num_sources())
                .map(|node| sw_encode(block.node(node), bits[node - 1], node, binning_seed))
                .collect();
            let estimate = decoder.decode(&bins, block.node(0))?;
            let truth: Vec<Vec<usize>> = (1..=source.num_sources())
                .map(|node| block.node(node).to_vec())
                .collect();
            if estimate != truth {
                errors += 1;
            }
        }
        points.push(ProbePoint {
            n,
            trials,
            errors,
            pe: errors as f64 / trials.max(1) as f64,
        });
    }
    Ok(points)
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(errors: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054f64;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LinkKind;
    use crate::flow::{feasible_flow, flow_to_schedule, FlowOutcome};

    fn rv(rates: &[f64]) -> RateVector {
        RateVector::new(rates.to_vec()).unwrap()
    }

    #[test]
    fn zero_bits_is_a_single_bin() {
        assert_eq!(sw_encode(&[0, 1, 0, 1], 0, 1, 7), 0);
        assert_eq!(sw_encode(&[1, 1, 1, 1], 0, 1, 7), 0);
    }

    #[test]
    fn encoding_is_deterministic_and_seed_sensitive() {
        let seq = vec![0, 1, 1, 0, 1];
        assert_eq!(sw_encode(&seq, 8, 2, 11), sw_encode(&seq, 8, 2, 11));
        assert_ne!(sw_encode(&seq, 32, 2, 11), sw_encode(&seq, 32, 2, 12));
        assert_ne!(sw_encode(&seq, 32, 1, 11), sw_encode(&seq, 32, 2, 11));
    }

    #[test]
    fn bin_histogram_is_uniform() {
        // Chi-squared test over 16 bins at the 99% level (15 dof -> 30.58).
        let bits = 4u32;
        let trials = 10_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = vec![0usize; 1 << bits];
        for _ in 0..trials {
            let seq: Vec<usize> = (0..16).map(|_| rng.gen_range(0..2usize)).collect();
            counts[sw_encode(&seq, bits, 1, 99) as usize] += 1;
        }
        let expected = trials as f64 / (1 << bits) as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 30.58, "chi-squared statistic {chi2}");
    }

    #[test]
    fn injective_binning_recovers_exactly() {
        let source = JointPmf::dsbs(0.11).unwrap();
        let n = 10usize;
        let bits = vec![n as u32, n as u32];
        let decoder = SwDecoder::new(&source, n, &bits, 5).unwrap();
        for seed in 0..50 {
            let block = source.sample_block(n, seed).unwrap();
            let bins: Vec<u64> = (1..=2)
                .map(|node| sw_encode(block.node(node), bits[node - 1], node, 5))
                .collect();
            let estimate = decoder.decode(&bins, block.node(0)).unwrap();
            assert_eq!(estimate[0], block.node(1));
            assert_eq!(estimate[1], block.node(2));
        }
    }

    #[test]
    fn point_mass_decodes_with_zero_bits() {
        let source = JointPmf::new(vec![1, 2, 2], vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let estimate = sw_decode(&source, &[0, 0], 3, &[0, 0], &[0; 6]).unwrap();
        assert_eq!(estimate[0], vec![1; 6]);
        assert_eq!(estimate[1], vec![1; 6]);
    }

    #[test]
    fn oversized_bins_are_rejected() {
        let source = JointPmf::dsbs(0.11).unwrap();
        let err = SwDecoder::new(&source, 4, &[5, 4], 1).unwrap_err();
        assert!(matches!(err, SimError::BinsExceedAlphabet { node: 1, .. }));
    }

    /// Collision-counting oracle for the DSBS block error probability
    /// under random binning and joint ML decoding (Poissonized; biased a
    /// couple of percent high from tie-rank averaging).
    fn dsbs_pe_oracle(n: usize, b1: u32, b2: u32, q: f64) -> f64 {
        let choose = |n: usize, k: usize| -> f64 {
            let mut v = 1.0f64;
            for i in 0..k {
                v = v * (n - i) as f64 / (i + 1) as f64;
            }
            v
        };
        let mut total = 0.0;
        for d in 0..=n {
            let pd = choose(n, d) * q.powi(d as i32) * (1.0 - q).powi((n - d) as i32);
            let strict: f64 = (0..d).map(|k| choose(n, k)).sum();
            let tie = choose(n, d) - 1.0;
            let lam1 = (strict + 0.5 * tie) * 2f64.powi(-(b1 as i32));
            let lam2 = (strict + 0.5 * tie) * 2f64.powi(-(b2 as i32));
            let pairs_strict: f64 = (0..d).map(|k| 2f64.powi(n as i32) * choose(n, k)).sum();
            let pairs_tie = 2f64.powi(n as i32) * choose(n, d) - 2.0 * tie - 1.0;
            let lam12 = (pairs_strict - 2.0 * strict + 0.5 * pairs_tie)
                * 2f64.powi(-((b1 + b2) as i32));
            total += pd * (1.0 - (-(lam1 + lam2 + lam12)).exp());
        }
        total
    }

    #[test]
    fn boundary_rate_error_probability_matches_oracle() {
        // Rates (0.75, 0.75) sit on the sum-rate boundary of DSBS(0.11);
        // the ML error floor stays near 0.31 at desk-scale n.
        let source = JointPmf::dsbs(0.11).unwrap();
        let n = 12usize;
        let bits = vec![9u32, 9u32];
        let decoder = SwDecoder::new(&source, n, &bits, 21).unwrap();
        let trials = 2000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut errors = 0usize;
        for _ in 0..trials {
            let block = source.sample_block(n, rng.gen()).unwrap();
            let bins: Vec<u64> = (1..=2)
                .map(|node| sw_encode(block.node(node), bits[node - 1], node, 21))
                .collect();
            let estimate = decoder.decode(&bins, block.node(0)).unwrap();
            if estimate[0] != block.node(1) || estimate[1] != block.node(2) {
                errors += 1;
            }
        }
        let pe = errors as f64 / trials as f64;
        let oracle = dsbs_pe_oracle(n, 9, 9, 0.11);
        assert!(
            (pe - oracle).abs() < 0.07,
            "measured {pe}, oracle {oracle}"
        );
    }

    fn star_schedule(n: usize, rates: &[f64]) -> (LinkSet, RoutingSchedule) {
        let links = LinkSet::star(&[0.8, 0.8]).unwrap();
        let flow = match feasible_flow(&links, &rv(rates)).unwrap() {
            FlowOutcome::Feasible(f) => f,
            _ => unreachable!(),
        };
        let schedule = flow_to_schedule(&flow, &links, n).unwrap();
        (links, schedule)
    }

    #[test]
    fn injective_pipeline_never_errs() {
        let source = JointPmf::dsbs(0.11).unwrap();
        let (links, schedule) = star_schedule(8, &[0.8, 0.8]);
        // ceil(8 * 0.8) = 7 bins... injective needs n bits: use rate 1.0
        let links2 = LinkSet::star(&[1.0, 1.0]).unwrap();
        let flow = match feasible_flow(&links2, &rv(&[1.0, 1.0])).unwrap() {
            FlowOutcome::Feasible(f) => f,
            _ => unreachable!(),
        };
        let schedule2 = flow_to_schedule(&flow, &links2, 8).unwrap();
        let config = CodeConfig::for_schedule(&schedule2, rv(&[1.0, 1.0]), 13);
        let result =
            run_pipeline(&links2, &source, &schedule2, &config, 200, 5, ChannelMode::Ideal)
                .unwrap();
        assert_eq!(result.errors, 0);
        drop((links, schedule));
    }

    #[test]
    fn relay_pipeline_with_injective_binning_is_lossless() {
        let links = LinkSet::with_links(
            3,
            vec![
                (1, 0, LinkKind::Capacity(1.5)),
                (2, 0, LinkKind::Capacity(0.5)),
                (2, 1, LinkKind::Capacity(0.5)),
            ],
        )
        .unwrap();
        let source = JointPmf::dsbs(0.11).unwrap();
        let rates = rv(&[1.0, 1.0]);
        let flow = match feasible_flow(&links, &rates).unwrap() {
            FlowOutcome::Feasible(f) => f,
            _ => unreachable!(),
        };
        let n = 10usize;
        let schedule = flow_to_schedule(&flow, &links, n).unwrap();
        let config = CodeConfig::for_schedule(&schedule, rates, 3);
        let result =
            run_pipeline(&links, &source, &schedule, &config, 100, 17, ChannelMode::Ideal)
                .unwrap();
        assert_eq!(result.errors, 0);
        // Bits traverse two hops: v2 ships half its bits through v1.
        let t = &result.transcripts[0];
        let from2to1 = t
            .payloads
            .iter()
            .find(|p| p.from == 2 && p.to == 1)
            .expect("relay leg present");
        assert_eq!(from2to1.bits.len(), 5);
        let from1to0 = t.payloads.iter().find(|p| p.from == 1 && p.to == 0).unwrap();
        assert_eq!(from1to0.bits.len(), 15);
        assert!(from1to0.round > from2to1.round);
    }

    #[test]
    fn pipeline_is_bit_exactly_reproducible() {
        let source = JointPmf::dsbs(0.11).unwrap();
        let (links, schedule) = star_schedule(8, &[0.75, 0.75]);
        let config = CodeConfig::for_schedule(&schedule, rv(&[0.75, 0.75]), 41);
        let a = run_pipeline(&links, &source, &schedule, &config, 50, 11, ChannelMode::Ideal)
            .unwrap();
        let b = run_pipeline(&links, &source, &schedule, &config, 50, 11, ChannelMode::Ideal)
            .unwrap();
        assert_eq!(a.errors, b.errors);
        for (ta, tb) in a.transcripts.iter().zip(&b.transcripts) {
            assert_eq!(ta.payloads, tb.payloads);
            assert_eq!(ta.estimate, tb.estimate);
        }
    }

    #[test]
    fn noisy_mode_with_clean_channel_is_lossless() {
        let mut links = LinkSet::new(3);
        links
            .set(1, 0, LinkKind::Dmc(DmcSpec::bsc(0.0).unwrap()))
            .unwrap();
        links
            .set(2, 0, LinkKind::Dmc(DmcSpec::bsc(0.0).unwrap()))
            .unwrap();
        let source = JointPmf::dsbs(0.11).unwrap();
        let rates = rv(&[1.0, 1.0]);
        let flow = match feasible_flow(&links, &rates).unwrap() {
            FlowOutcome::Feasible(f) => f,
            _ => unreachable!(),
        };
        let schedule = flow_to_schedule(&flow, &links, 8).unwrap();
        let config = CodeConfig::for_schedule(&schedule, rates, 2);
        let result = run_pipeline(
            &links,
            &source,
            &schedule,
            &config,
            50,
            23,
            ChannelMode::NoisyRepetition { reps: 1 },
        )
        .unwrap();
        assert_eq!(result.errors, 0);
    }

    #[test]
    fn converse_probe_requires_an_outside_rate() {
        let source = JointPmf::dsbs(0.11).unwrap();
        let err = converse_probe(&source, &rv(&[0.8, 0.8]), &[8], 10, 1).unwrap_err();
        assert!(matches!(err, SimError::ProbeInsideRegion { .. }));
    }

    #[test]
    fn zero_rates_force_blind_guessing() {
        let source = JointPmf::dsbs(0.11).unwrap();
        let points = converse_probe(&source, &rv(&[0.0, 0.0]), &[8], 200, 9).unwrap();
        // The decoder must guess the a-priori most likely block; an error
        // probability of 1 - 0.445^8 ~ 0.998 follows.
        assert!(points[0].pe > 0.95, "pe = {}", points[0].pe);
    }

    #[test]
    fn wilson_interval_brackets_the_estimate() {
        let (lo, hi) = wilson_interval(50, 1000);
        assert!(lo < 0.05 && 0.05 < hi);
        assert!(hi - lo < 0.03);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }
}
