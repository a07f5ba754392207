//! Cut-condition admissibility: decides whether the joint source can be
//! delivered reliably over a given link set, tests rate vectors against the
//! Slepian-Wolf region, computes the two-source rate polytope, and evaluates
//! the correlated-code region with its rate losses.

use crate::channel::{DmcSpec, LinkSet};
use crate::source::{JointPmf, SourceError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exhaustive cut enumeration is exponential in the source count.
pub const MAX_SOURCES: usize = 20;

#[derive(Debug, Clone, Error)]
pub enum AdmissibilityError {
    #[error("link set has {links} nodes but the source has {source} variables")]
    NodeCountMismatch { links: usize, source: usize },
    #[error("rate vector has {rates} entries but the source has {sources} source nodes")]
    DimensionMismatch { rates: usize, sources: usize },
    #[error("{0} source nodes exceed the cut-enumeration limit of {MAX_SOURCES}")]
    TooManySources(usize),
    #[error("operation requires exactly {expected} source variables, got {got}")]
    WrongSourceArity { expected: usize, got: usize },
    #[error("joint state space of {0} entries is too large to enumerate")]
    StateSpaceTooLarge(usize),
    #[error("rate must be nonnegative and finite (got {0})")]
    BadRate(f64),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error("channel error: {0}")]
    Channel(#[from] crate::channel::ChannelError),
}

/// Bits-per-source-symbol allocation to the encoders at nodes `1..=M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self, AdmissibilityError> {
        for &r in &rates {
            if r < 0.0 || !r.is_finite() {
                return Err(AdmissibilityError::BadRate(r));
            }
        }
        Ok(Self(rates))
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Rate of source node `i` (1-based node index).
    pub fn rate_of_node(&self, node: usize) -> f64 {
        self.0[node - 1]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// One cut condition: the node set `S` (sink excluded), the conditional
/// entropy it must carry, the capacity crossing it, and the slack between
/// the two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutCertificate {
    #[serde(rename = "S")]
    pub cut: Vec<usize>,
    pub required: f64,
    pub available: f64,
    pub slack: f64,
    /// Set when the cut sits exactly on the boundary (zero slack).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Admissible,
    Inadmissible,
}

/// Full admissibility report: verdict plus every cut, worst slack first.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub verdict: Verdict,
    pub certificates: Vec<CutCertificate>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.verdict == Verdict::Admissible
    }

    /// The tightest cut (smallest slack).
    pub fn worst(&self) -> &CutCertificate {
        &self.certificates[0]
    }
}

fn subset_nodes(mask: usize, m: usize) -> Vec<usize> {
    (1..=m).filter(|i| mask & (1 << (i - 1)) != 0).collect()
}

/// Decides reliable-communication feasibility: admissible iff every cut
/// `S` (sink on the far side) has strictly positive slack. Strictness is
/// controlled by `eps_strict`; boundary cuts are reported inadmissible.
pub fn reachback_admissible_with_margin(
    links: &LinkSet,
    source: &JointPmf,
    eps_strict: f64,
) -> Result<AdmissibilityReport, AdmissibilityError> {
    if links.n_nodes() != source.num_vars() {
        return Err(AdmissibilityError::NodeCountMismatch {
            links: links.n_nodes(),
            source: source.num_vars(),
        });
    }
    let m = source.num_sources();
    if m > MAX_SOURCES {
        return Err(AdmissibilityError::TooManySources(m));
    }
    let mut certificates = Vec::with_capacity((1usize << m) - 1);
    for mask in 1..(1usize << m) {
        let cut = subset_nodes(mask, m);
        let complement: Vec<usize> = (0..=m).filter(|&v| v == 0 || mask & (1 << (v - 1)) == 0).collect();
        let required = source.conditional_entropy(&cut, &complement)?;
        let available: f64 = cut
            .iter()
            .flat_map(|&i| complement.iter().map(move |&j| links.capacity(i, j)))
            .sum();
        let slack = available - required;
        certificates.push(CutCertificate {
            cut,
            required,
            available,
            slack,
            boundary: slack.abs() <= 1e-12,
        });
    }
    certificates.sort_by(|a, b| {
        a.slack
            .partial_cmp(&b.slack)
            .unwrap()
            .then_with(|| a.cut.cmp(&b.cut))
    });
    let verdict = if certificates.iter().all(|c| c.slack > eps_strict) {
        Verdict::Admissible
    } else {
        Verdict::Inadmissible
    };
    Ok(AdmissibilityReport {
        verdict,
        certificates,
    })
}

/// [`reachback_admissible_with_margin`] with the default strictness of 0.
pub fn reachback_admissible(
    links: &LinkSet,
    source: &JointPmf,
) -> Result<AdmissibilityReport, AdmissibilityError> {
    reachback_admissible_with_margin(links, source, 0.0)
}

/// Star-topology specialization: node i talks only to the sink at capacity
/// `capacities[i-1]`.
pub fn noncooperative_admissible(
    capacities: &[f64],
    source: &JointPmf,
) -> Result<AdmissibilityReport, AdmissibilityError> {
    let links = LinkSet::star(capacities)?;
    reachback_admissible(&links, source)
}

/// Slepian-Wolf membership result: the worst subset is the one with the
/// smallest margin `sum of rates - H(U_S | U_{S^c})` (negative = violated).
#[derive(Debug, Clone, PartialEq)]
pub struct SwMembership {
    pub member: bool,
    pub worst_subset: Vec<usize>,
    pub worst_margin: f64,
}

/// Tests a rate vector against the Slepian-Wolf region of the source, with
/// the sink's side information conditioned automatically.
pub fn slepian_wolf_member(
    source: &JointPmf,
    rates: &RateVector,
) -> Result<SwMembership, AdmissibilityError> {
    let m = source.num_sources();
    if rates.len() != m {
        return Err(AdmissibilityError::DimensionMismatch {
            rates: rates.len(),
            sources: m,
        });
    }
    if m > MAX_SOURCES {
        return Err(AdmissibilityError::TooManySources(m));
    }
    let mut worst_margin = f64::INFINITY;
    let mut worst_subset = Vec::new();
    for mask in 1..(1usize << m) {
        let subset = subset_nodes(mask, m);
        let complement: Vec<usize> =
            (0..=m).filter(|&v| v == 0 || mask & (1 << (v - 1)) == 0).collect();
        let required = source.conditional_entropy(&subset, &complement)?;
        let provided: f64 = subset.iter().map(|&i| rates.rate_of_node(i)).sum();
        let margin = provided - required;
        if margin < worst_margin {
            worst_margin = margin;
            worst_subset = subset;
        }
    }
    Ok(SwMembership {
        member: worst_margin > 0.0,
        worst_subset,
        worst_margin,
    })
}

/// A half-plane constraint `a*R1 + b*R2 (cmp) rhs` in the two-source rate
/// plane. Lower constraints are strict (`>`), upper ones closed (`<=`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub rhs: f64,
    /// True for the strict lower (entropy) sides, false for the capacity caps.
    pub lower: bool,
}

impl HalfPlane {
    fn satisfied(&self, r1: f64, r2: f64, tol: f64) -> bool {
        let v = self.a * r1 + self.b * r2;
        if self.lower {
            v >= self.rhs - tol
        } else {
            v <= self.rhs + tol
        }
    }
}

/// The two-source admissible-rate polytope: three entropy half-planes and
/// three capacity half-planes.
#[derive(Debug, Clone, Serialize)]
pub struct ThreeNodePolytope {
    pub half_planes: Vec<HalfPlane>,
    pub nonempty: bool,
    /// Vertices of the closure, deduplicated and sorted.
    pub vertices: Vec<(f64, f64)>,
}

impl ThreeNodePolytope {
    /// Membership in the region (strict on the entropy sides).
    pub fn contains(&self, r1: f64, r2: f64) -> bool {
        self.half_planes.iter().all(|h| {
            let v = h.a * r1 + h.b * r2;
            if h.lower {
                v > h.rhs
            } else {
                v <= h.rhs
            }
        })
    }
}

/// Rate polytope for the two-source network with cooperation links, as the
/// intersection of the Slepian-Wolf half-planes with the capacity caps.
pub fn three_node_polytope(
    source: &JointPmf,
    c10: f64,
    c12: f64,
    c20: f64,
    c21: f64,
) -> Result<ThreeNodePolytope, AdmissibilityError> {
    if source.num_sources() != 2 {
        return Err(AdmissibilityError::WrongSourceArity {
            expected: 2,
            got: source.num_sources(),
        });
    }
    let h1 = source.conditional_entropy(&[1], &[2, 0])?;
    let h2 = source.conditional_entropy(&[2], &[1, 0])?;
    let h12 = source.conditional_entropy(&[1, 2], &[0])?;
    let half_planes = vec![
        HalfPlane { a: 1.0, b: 0.0, rhs: h1, lower: true },
        HalfPlane { a: 0.0, b: 1.0, rhs: h2, lower: true },
        HalfPlane { a: 1.0, b: 1.0, rhs: h12, lower: true },
        HalfPlane { a: 1.0, b: 0.0, rhs: c10 + c12, lower: false },
        HalfPlane { a: 0.0, b: 1.0, rhs: c20 + c21, lower: false },
        HalfPlane { a: 1.0, b: 1.0, rhs: c10 + c20, lower: false },
    ];
    let nonempty = h1 < c10 + c12 && h2 < c20 + c21 && h12 < c10 + c20;

    const TOL: f64 = 1e-9;
    let mut vertices: Vec<(f64, f64)> = Vec::new();
    for i in 0..half_planes.len() {
        for j in i + 1..half_planes.len() {
            let (p, q) = (&half_planes[i], &half_planes[j]);
            let det = p.a * q.b - p.b * q.a;
            if det.abs() < 1e-12 {
                continue;
            }
            let r1 = (p.rhs * q.b - p.b * q.rhs) / det;
            let r2 = (p.a * q.rhs - p.rhs * q.a) / det;
            if half_planes.iter().all(|h| h.satisfied(r1, r2, TOL))
                && !vertices
                    .iter()
                    .any(|&(x, y)| (x - r1).abs() < TOL && (y - r2).abs() < TOL)
            {
                vertices.push((r1, r2));
            }
        }
    }
    vertices.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ThreeNodePolytope {
        half_planes,
        nonempty,
        vertices,
    })
}

/// Rate losses of a correlated code over two independent channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateLoss {
    /// Sum-rate loss from dependent channel outputs: `I(Y1; Y2)`.
    pub delta0: f64,
    /// `I(Y1; U2)`.
    pub delta1: f64,
    /// `I(Y2; U1)`.
    pub delta2: f64,
}

/// Builds the joint distribution of the chain
/// `p(u1,u2) p(x1|u1) p(x2|u2) p(y1|x1) p(y2|x2)` over all six variables.
///
/// `source` is a joint pmf over the encoder inputs only (no sink variable).
fn correlated_code_joint(
    source: &JointPmf,
    encoders: &[&DmcSpec],
    channels: &[&DmcSpec],
) -> Result<JointPmf, AdmissibilityError> {
    let m = source.num_vars();
    for (i, enc) in encoders.iter().enumerate() {
        if enc.input_size() != source.alphabet_sizes()[i] {
            return Err(AdmissibilityError::WrongSourceArity {
                expected: enc.input_size(),
                got: source.alphabet_sizes()[i],
            });
        }
        if channels[i].input_size() != enc.output_size() {
            return Err(AdmissibilityError::WrongSourceArity {
                expected: channels[i].input_size(),
                got: enc.output_size(),
            });
        }
    }
    let mut sizes: Vec<usize> = source.alphabet_sizes().to_vec();
    sizes.extend(encoders.iter().map(|e| e.output_size()));
    sizes.extend(channels.iter().map(|c| c.output_size()));
    let total: usize = sizes.iter().product();
    if total > 10_000_000 {
        return Err(AdmissibilityError::StateSpaceTooLarge(total));
    }

    let mut probs = vec![0.0; total];
    let mut outcome = vec![0usize; 3 * m];
    for (flat, p) in probs.iter_mut().enumerate() {
        let mut rem = flat;
        for k in (0..sizes.len()).rev() {
            outcome[k] = rem % sizes[k];
            rem /= sizes[k];
        }
        let us = &outcome[0..m];
        let xs = &outcome[m..2 * m];
        let ys = &outcome[2 * m..3 * m];
        let mut value = source.prob(us);
        for i in 0..m {
            value *= encoders[i].prob(xs[i], us[i]);
            value *= channels[i].prob(ys[i], xs[i]);
        }
        *p = value;
    }
    Ok(JointPmf::new(sizes, probs)?)
}

/// Rate losses `(delta0, delta1, delta2)` for a two-encoder correlated code
/// with per-source encoders `p(x_i | u_i)` over independent channels.
pub fn correlated_code_rate_loss(
    source: &JointPmf,
    enc1: &DmcSpec,
    enc2: &DmcSpec,
    ch1: &DmcSpec,
    ch2: &DmcSpec,
) -> Result<RateLoss, AdmissibilityError> {
    if source.num_vars() != 2 {
        return Err(AdmissibilityError::WrongSourceArity {
            expected: 2,
            got: source.num_vars(),
        });
    }
    let joint = correlated_code_joint(source, &[enc1, enc2], &[ch1, ch2])?;
    // Variable order: (u1, u2, x1, x2, y1, y2).
    Ok(RateLoss {
        delta0: joint.mutual_information(&[4], &[5])?,
        delta1: joint.mutual_information(&[4], &[1])?,
        delta2: joint.mutual_information(&[5], &[0])?,
    })
}

/// Correlated-code region membership result.
#[derive(Debug, Clone, PartialEq)]
pub struct CesMembership {
    pub member: bool,
    pub worst_subset: Vec<usize>,
    /// Smallest `RHS - H(U_S|U_{S^c})` over the subsets (negative = violated).
    pub worst_margin: f64,
}

/// Membership in the correlated-code achievable region: for every nonempty
/// encoder subset `S`, `H(U_S|U_{S^c}) < I(X_S; Y_S | U_{S^c})`, evaluated
/// exactly under the supplied code distribution.
///
/// `source` is a joint pmf over the `M` encoder inputs only.
pub fn ces_region_member(
    source: &JointPmf,
    encoders: &[DmcSpec],
    channels: &[DmcSpec],
) -> Result<CesMembership, AdmissibilityError> {
    let m = source.num_vars();
    if encoders.len() != m || channels.len() != m {
        return Err(AdmissibilityError::DimensionMismatch {
            rates: encoders.len().min(channels.len()),
            sources: m,
        });
    }
    if m > 10 {
        return Err(AdmissibilityError::TooManySources(m));
    }
    let enc_refs: Vec<&DmcSpec> = encoders.iter().collect();
    let ch_refs: Vec<&DmcSpec> = channels.iter().collect();
    let joint = correlated_code_joint(source, &enc_refs, &ch_refs)?;

    let mut worst_margin = f64::INFINITY;
    let mut worst_subset = Vec::new();
    for mask in 1..(1usize << m) {
        let s: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let s_comp: Vec<usize> = (0..m).filter(|i| mask & (1 << i) == 0).collect();
        let u_s: Vec<usize> = s.clone();
        let u_comp: Vec<usize> = s_comp.clone();
        let x_s: Vec<usize> = s.iter().map(|&i| m + i).collect();
        let y_s: Vec<usize> = s.iter().map(|&i| 2 * m + i).collect();

        let lhs = joint.conditional_entropy(&u_s, &u_comp)?;
        // I(X_S; Y_S | U_{S^c}) = H(Y_S | U_{S^c}) - H(Y_S | X_S, U_{S^c})
        let h_y_given_u = joint.conditional_entropy(&y_s, &u_comp)?;
        let mut cond = x_s.clone();
        cond.extend_from_slice(&u_comp);
        let h_y_given_xu = joint.conditional_entropy(&y_s, &cond)?;
        let rhs = h_y_given_u - h_y_given_xu;

        let margin = rhs - lhs;
        if margin < worst_margin {
            worst_margin = margin;
            worst_subset = s.iter().map(|&i| i + 1).collect();
        }
    }
    Ok(CesMembership {
        member: worst_margin > 0.0,
        worst_subset,
        worst_margin,
    })
}
