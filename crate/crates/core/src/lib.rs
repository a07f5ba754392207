//! Correlated sources over a network of independent point-to-point
//! channels, delivered to a single sink: cut-condition admissibility,
//! Slepian-Wolf rate regions, channel capacities, min-cost routing, and a
//! Monte-Carlo simulation of the full binning-plus-routing coding pipeline.

pub mod admissibility;
pub mod channel;
pub mod flow;
mod lp;
pub mod problem;
pub mod sim;
pub mod source;

pub use admissibility::{
    ces_region_member, correlated_code_rate_loss, noncooperative_admissible,
    reachback_admissible, reachback_admissible_with_margin, slepian_wolf_member,
    three_node_polytope, AdmissibilityError, AdmissibilityReport, CesMembership, CutCertificate,
    RateLoss, RateVector, SwMembership, ThreeNodePolytope, Verdict,
};
pub use channel::{
    blahut_arimoto, capacity, gaussian_capacity, lemma1_gap, transmit, BaResult, ChannelError,
    DmcSpec, GaussianLink, Lemma1Gap, LinkKind, LinkSet,
};
pub use flow::{
    feasible_flow, flow_to_schedule, min_cost_route, tree_route, EdgeCosts, FlowAssignment,
    FlowError, FlowOutcome, MinCutWitness, RouteSolution, RoutingSchedule, TreeRoute,
    TreeRouteReport,
};
pub use sim::{
    converse_probe, run_pipeline, sw_decode, sw_encode, wilson_interval, ChannelMode, CodeConfig,
    PipelineResult, ProbePoint, SimError, SwDecoder, Transcript,
};
pub use source::{
    binary_entropy, binary_entropy_inverse, entropy_bits, JointPmf, SnapshotBlock, SourceError,
};
