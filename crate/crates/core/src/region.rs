//! Rate regions as explicit half-plane systems in `(R1, R2)`.
//!
//! Resolvability regions are lower-bound systems (`≥`), secrecy regions are
//! upper-bound systems (`≤`). `R1, R2 ≥ 0` is implicit in every region and
//! enforced by [`RegionSpec::contains`]; it is not listed as a constraint, so
//! a negative `R2` threshold stays visible (and vacuous) in the system.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    full_joint, induced_output, matches_target, wiretap_full_joint, CribbingScenario, InputLaw, MacChannel,
    TargetOutput, WiretapMac, TARGET_TOL,
};
use crate::prob::{mutual_information, JointTable};
use crate::sampling::{derive_seed, random_aux_law, random_joint_law, rng_from};

/// Strict inequalities (`H(X1|U) > I(U,X1;Z)`) are tested as margin > this.
pub const STRICT_MARGIN: f64 = 1e-9;

/// A rate pair in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

impl RatePoint {
    pub fn new(r1: f64, r2: f64) -> Self {
        Self { r1, r2 }
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Ge,
    Le,
}

/// `a1·R1 + a2·R2 (≥|≤) b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub sense: Sense,
    pub label: &'static str,
}

impl Constraint {
    fn new(a1: f64, a2: f64, sense: Sense, b: f64, label: &'static str) -> Self {
        Self {
            a1,
            a2,
            b,
            sense,
            label,
        }
    }

    /// Signed distance to violation; nonnegative iff satisfied.
    pub fn margin(&self, pt: RatePoint) -> f64 {
        let lhs = self.a1 * pt.r1 + self.a2 * pt.r2;
        match self.sense {
            Sense::Ge => lhs - self.b,
            Sense::Le => self.b - lhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Resolvability,
    Secrecy,
}

/// The rate region of one input law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub scenario: CribbingScenario,
    pub constraints: Vec<Constraint>,
    /// Whether the law satisfies the side condition of the inner bound.
    pub feasible: bool,
    /// Whether membership is gated by `feasible` (strictly-causal inner bound).
    pub requires_feasibility: bool,
    /// `H(X1|U) − I(U,X1;Z)` when the side condition exists.
    pub feasibility_margin: Option<f64>,
}

impl RegionSpec {
    fn plain(kind: RegionKind, scenario: CribbingScenario, constraints: Vec<Constraint>) -> Self {
        Self {
            kind,
            scenario,
            constraints,
            feasible: true,
            requires_feasibility: false,
            feasibility_margin: None,
        }
    }

    /// The same system without the feasibility gate (strictly-causal outer
    /// bound).
    pub fn as_outer_bound(&self) -> RegionSpec {
        RegionSpec {
            feasible: true,
            requires_feasibility: false,
            ..self.clone()
        }
    }

    fn gated_out(&self) -> bool {
        self.requires_feasibility && !self.feasible
    }

    /// Smallest constraint margin, including `R1, R2 ≥ 0`; `-inf` when the
    /// feasibility gate is closed.
    pub fn margin(&self, pt: RatePoint) -> f64 {
        if self.gated_out() {
            return f64::NEG_INFINITY;
        }
        self.constraints
            .iter()
            .map(|c| c.margin(pt))
            .fold(pt.r1.min(pt.r2), f64::min)
    }

    pub fn contains(&self, pt: RatePoint, slack: f64) -> bool {
        debug_assert!(slack >= 0.0);
        self.margin(pt) >= -slack
    }

    pub fn threshold(&self, label: &str) -> Option<f64> {
        self.constraints.iter().find(|c| c.label == label).map(|c| c.b)
    }

    /// Largest threshold difference to a structurally identical system, or
    /// `None` when the systems differ in shape.
    pub fn max_threshold_diff(&self, other: &RegionSpec) -> Option<f64> {
        if self.constraints.len() != other.constraints.len() {
            return None;
        }
        let mut worst = 0.0f64;
        for (a, b) in self.constraints.iter().zip(&other.constraints) {
            if a.label != b.label || a.sense != b.sense || a.a1 != b.a1 || a.a2 != b.a2 {
                return None;
            }
            worst = worst.max((a.b - b.b).abs());
        }
        Some(worst)
    }

    /// Corner points of the region (finite vertices of the polygon cut out
    /// by the constraints and the axes), sorted by `R1`.
    pub fn vertices(&self) -> Vec<RatePoint> {
        if self.gated_out() {
            return Vec::new();
        }
        let mut lines: Vec<(f64, f64, f64)> = self.constraints.iter().map(|c| (c.a1, c.a2, c.b)).collect();
        lines.push((1.0, 0.0, 0.0));
        lines.push((0.0, 1.0, 0.0));
        let mut out: Vec<RatePoint> = Vec::new();
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, a2, b) = lines[i];
                let (c1, c2, d) = lines[j];
                let det = a1 * c2 - a2 * c1;
                if det.abs() < 1e-15 {
                    continue;
                }
                let pt = RatePoint::new(clean((b * c2 - a2 * d) / det), clean((a1 * d - b * c1) / det));
                if self.contains(pt, 1e-9)
                    && !out
                        .iter()
                        .any(|q| (q.r1 - pt.r1).abs() < 1e-12 && (q.r2 - pt.r2).abs() < 1e-12)
                {
                    out.push(pt);
                }
            }
        }
        out.sort_by(|a, b| a.r1.total_cmp(&b.r1).then(a.r2.total_cmp(&b.r2)));
        out
    }

    /// Pareto-optimal vertices: minimal for resolvability, maximal for
    /// secrecy.
    pub fn frontier(&self) -> Vec<RatePoint> {
        let tagged: Vec<(RatePoint, usize)> = self.vertices().into_iter().map(|p| (p, 0)).collect();
        pareto(tagged, self.kind).into_iter().map(|(p, _)| p).collect()
    }
}

fn clean(x: f64) -> f64 {
    if x.abs() < 1e-13 {
        0.0
    } else {
        x
    }
}

/// Pareto filter over tagged points; ties keep the smallest tag.
fn pareto(mut pts: Vec<(RatePoint, usize)>, kind: RegionKind) -> Vec<(RatePoint, usize)> {
    const TIE: f64 = 1e-12;
    match kind {
        RegionKind::Resolvability => {
            pts.sort_by(|a, b| {
                a.0.r1
                    .total_cmp(&b.0.r1)
                    .then(a.0.r2.total_cmp(&b.0.r2))
                    .then(a.1.cmp(&b.1))
            });
            let mut best = f64::INFINITY;
            let mut out = Vec::new();
            for p in pts {
                if p.0.r2 < best - TIE {
                    best = p.0.r2;
                    out.push(p);
                }
            }
            out
        }
        RegionKind::Secrecy => {
            pts.sort_by(|a, b| {
                b.0.r1
                    .total_cmp(&a.0.r1)
                    .then(b.0.r2.total_cmp(&a.0.r2))
                    .then(a.1.cmp(&b.1))
            });
            let mut best = f64::NEG_INFINITY;
            let mut out = Vec::new();
            for p in pts {
                if p.0.r2 > best + TIE {
                    best = p.0.r2;
                    out.push(p);
                }
            }
            out.reverse();
            out
        }
    }
}

/// Information quantities between the inputs (and `U`, when present) and
/// one output axis. Without an auxiliary axis `U` is taken as constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelTerms {
    pub h_x1: f64,
    pub h_x1_given_u: f64,
    pub i_x1: f64,
    pub i_x2: f64,
    pub i_x1x2: f64,
    pub i_u: f64,
    pub i_ux1: f64,
    pub i_ux2: f64,
    pub i_x1_given_u: f64,
    pub i_x2_given_u: f64,
    pub i_x1x2_given_u: f64,
    pub i_x2_given_x1: f64,
    pub i_x2_given_ux1: f64,
}

impl ChannelTerms {
    pub fn from_joint(joint: &JointTable, out: &str) -> Result<Self> {
        let mi = |a: &[&str], c: &[&str]| mutual_information(joint, a, &[out], c);
        let h_x1 = joint.entropy_of(&["X1"])?;
        let i_x1 = mi(&["X1"], &[])?;
        let i_x2 = mi(&["X2"], &[])?;
        let i_x1x2 = mi(&["X1", "X2"], &[])?;
        let i_x2_given_x1 = mi(&["X2"], &["X1"])?;
        if joint.axis("U").is_err() {
            return Ok(Self {
                h_x1,
                h_x1_given_u: h_x1,
                i_x1,
                i_x2,
                i_x1x2,
                i_u: 0.0,
                i_ux1: i_x1,
                i_ux2: i_x2,
                i_x1_given_u: i_x1,
                i_x2_given_u: i_x2,
                i_x1x2_given_u: i_x1x2,
                i_x2_given_x1,
                i_x2_given_ux1: i_x2_given_x1,
            });
        }
        Ok(Self {
            h_x1,
            h_x1_given_u: joint.conditional_entropy(&["X1"], &["U"])?,
            i_x1,
            i_x2,
            i_x1x2,
            i_u: mi(&["U"], &[])?,
            i_ux1: mi(&["U", "X1"], &[])?,
            i_ux2: mi(&["U", "X2"], &[])?,
            i_x1_given_u: mi(&["X1"], &["U"])?,
            i_x2_given_u: mi(&["X2"], &["U"])?,
            i_x1x2_given_u: mi(&["X1", "X2"], &["U"])?,
            i_x2_given_x1,
            i_x2_given_ux1: mi(&["X2"], &["U", "X1"])?,
        })
    }

    /// `H(X1|U) − I(U,X1;out)`.
    pub fn strict_causal_margin(&self) -> f64 {
        self.h_x1_given_u - self.i_ux1
    }
}

/// Terms of a wiretap law: `y` for the legitimate receiver, `z` for the
/// eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecrecyTerms {
    pub y: ChannelTerms,
    pub z: ChannelTerms,
}

impl SecrecyTerms {
    pub fn compute(wmac: &WiretapMac, law: &InputLaw) -> Result<Self> {
        let joint = wiretap_full_joint(wmac, law)?;
        Ok(Self {
            y: ChannelTerms::from_joint(&joint, "Y")?,
            z: ChannelTerms::from_joint(&joint, "Z")?,
        })
    }
}

fn check_variant(law: &InputLaw, scenario: CribbingScenario) -> Result<()> {
    let ok = law.is_joint() != scenario.needs_aux();
    if ok {
        return Ok(());
    }
    let want = if scenario.needs_aux() {
        "an auxiliary (WithAux) law"
    } else {
        "a Joint law"
    };
    Err(Error::LawVariant {
        scenario: scenario.name().into(),
        reason: format!("requires {want}"),
    })
}

/// Resolvability threshold system of one law. For the strictly-causal
/// scenario this is the inner bound (gated by `H(X1|U) > I(U,X1;Z)`); use
/// [`RegionSpec::as_outer_bound`] for the outer bound.
pub fn resolvability_thresholds(mac: &MacChannel, law: &InputLaw, scenario: CribbingScenario) -> Result<RegionSpec> {
    check_variant(law, scenario)?;
    let t = ChannelTerms::from_joint(&full_joint(mac, law)?, "Z")?;
    Ok(resolvability_from_terms(&t, scenario))
}

pub fn resolvability_from_terms(t: &ChannelTerms, scenario: CribbingScenario) -> RegionSpec {
    use CribbingScenario::*;
    use Sense::Ge;
    let kind = RegionKind::Resolvability;
    match scenario {
        NonCooperating => RegionSpec::plain(
            kind,
            scenario,
            vec![
                Constraint::new(1.0, 0.0, Ge, t.i_x1_given_u, "R1"),
                Constraint::new(0.0, 1.0, Ge, t.i_x2_given_u, "R2"),
                Constraint::new(1.0, 1.0, Ge, t.i_x1x2_given_u, "R1+R2"),
            ],
        ),
        DegradedMessageSets => RegionSpec::plain(
            kind,
            scenario,
            vec![
                Constraint::new(1.0, 0.0, Ge, t.i_x1, "R1"),
                Constraint::new(1.0, 1.0, Ge, t.i_x1x2, "R1+R2"),
            ],
        ),
        NonCausal | Causal => RegionSpec::plain(
            kind,
            scenario,
            vec![
                Constraint::new(1.0, 0.0, Ge, t.i_x1, "R1"),
                Constraint::new(0.0, 1.0, Ge, t.i_x1x2 - t.h_x1, "R2"),
                Constraint::new(1.0, 1.0, Ge, t.i_x1x2, "R1+R2"),
            ],
        ),
        StrictlyCausal => {
            let margin = t.strict_causal_margin();
            RegionSpec {
                kind,
                scenario,
                constraints: vec![
                    Constraint::new(1.0, 0.0, Ge, t.i_ux1, "R1"),
                    Constraint::new(0.0, 1.0, Ge, t.i_x1x2 - t.h_x1_given_u, "R2"),
                    Constraint::new(1.0, 1.0, Ge, t.i_x1x2, "R1+R2"),
                ],
                feasible: margin > STRICT_MARGIN,
                requires_feasibility: true,
                feasibility_margin: Some(margin),
            }
        }
    }
}

/// Achievable strong-secrecy region of one law.
pub fn secrecy_region(wmac: &WiretapMac, law: &InputLaw, scenario: CribbingScenario) -> Result<RegionSpec> {
    if scenario == CribbingScenario::NonCooperating {
        return Err(Error::LawVariant {
            scenario: scenario.name().into(),
            reason: "no secrecy region is defined for non-cooperating encoders".into(),
        });
    }
    check_variant(law, scenario)?;
    Ok(secrecy_from_terms(&SecrecyTerms::compute(wmac, law)?, scenario))
}

pub fn secrecy_from_terms(t: &SecrecyTerms, scenario: CribbingScenario) -> RegionSpec {
    use CribbingScenario::*;
    use Sense::Le;
    let kind = RegionKind::Secrecy;
    let sum_y = t.y.i_x1x2 - t.z.i_x1x2;
    let constraints = match scenario {
        DegradedMessageSets | NonCooperating => vec![
            Constraint::new(0.0, 1.0, Le, t.y.i_x2_given_x1, "R2"),
            Constraint::new(1.0, 1.0, Le, sum_y, "R1+R2"),
        ],
        NonCausal | Causal => vec![
            Constraint::new(1.0, 0.0, Le, t.z.h_x1 - t.z.i_x1, "R1"),
            Constraint::new(0.0, 1.0, Le, t.y.i_x2_given_x1, "R2"),
            Constraint::new(1.0, 1.0, Le, sum_y, "R1+R2"),
        ],
        StrictlyCausal => vec![
            Constraint::new(1.0, 0.0, Le, t.z.h_x1_given_u - t.z.i_ux1, "R1"),
            Constraint::new(0.0, 1.0, Le, t.y.i_x2_given_ux1, "R2"),
            Constraint::new(
                1.0,
                1.0,
                Le,
                t.z.h_x1_given_u + t.y.i_x2_given_ux1 - t.z.i_x1x2,
                "R1+R2 (decodability)",
            ),
            Constraint::new(1.0, 1.0, Le, sum_y, "R1+R2"),
        ],
    };
    RegionSpec::plain(kind, scenario, constraints)
}

// ---------------------------------------------------------------------------
// Union over input laws

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QMode {
    /// `Q_Z` is whatever each law induces.
    InducedQ,
    /// Only laws matching the target output contribute.
    TargetQ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistributionSearchConfig {
    pub mode: QMode,
    /// Simplex grid divisions per unit mass.
    pub resolution: usize,
    /// Random laws drawn on top of the grid.
    pub samples: usize,
    /// Largest `|U|` drawn for auxiliary laws; `None` means `|X1|·|X2|`.
    pub u_cardinality_cap: Option<usize>,
    pub target_tol: f64,
    pub seed: u64,
}

impl Default for DistributionSearchConfig {
    fn default() -> Self {
        Self {
            mode: QMode::TargetQ,
            resolution: 20,
            samples: 200,
            u_cardinality_cap: None,
            target_tol: TARGET_TOL,
            seed: 0,
        }
    }
}

impl DistributionSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::Config("grid resolution must be at least 2".into()));
        }
        if self.samples < 1 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        if self.u_cardinality_cap == Some(0) {
            return Err(Error::Config("|U| cap must be at least 1".into()));
        }
        if !(self.target_tol >= 0.0) {
            return Err(Error::Config("target tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Problem instance for the union search.
#[derive(Debug, Clone, Copy)]
pub enum Instance<'a> {
    Mac(&'a MacChannel),
    Wiretap(&'a WiretapMac),
}

impl Instance<'_> {
    fn sizes(&self) -> (usize, usize) {
        match self {
            Instance::Mac(m) => (m.x1_size, m.x2_size),
            Instance::Wiretap(w) => (w.x1_size, w.x2_size),
        }
    }

    fn kind(&self) -> RegionKind {
        match self {
            Instance::Mac(_) => RegionKind::Resolvability,
            Instance::Wiretap(_) => RegionKind::Secrecy,
        }
    }

    /// Channel whose output is matched against the target.
    fn target_channel(&self) -> MacChannel {
        match self {
            Instance::Mac(m) => (*m).clone(),
            Instance::Wiretap(w) => w.eavesdropper(),
        }
    }

    fn region(&self, law: &InputLaw, scenario: CribbingScenario) -> Result<RegionSpec> {
        match self {
            Instance::Mac(m) => resolvability_thresholds(m, law, scenario),
            Instance::Wiretap(w) => secrecy_region(w, law, scenario),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawRegion {
    pub law_id: String,
    pub law: InputLaw,
    pub region: RegionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub r1: f64,
    pub r2: f64,
    pub law_id: String,
}

impl FrontierPoint {
    pub fn point(&self) -> RatePoint {
        RatePoint::new(self.r1, self.r2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnionEstimate {
    pub kind: RegionKind,
    pub scenario: CribbingScenario,
    pub mode: QMode,
    pub u_cardinality_cap: usize,
    pub candidates: usize,
    pub regions: Vec<LawRegion>,
    pub frontier: Vec<FrontierPoint>,
}

impl UnionEstimate {
    /// Whether some region of the union contains `pt`.
    pub fn contains(&self, pt: RatePoint, slack: f64) -> bool {
        self.regions.iter().any(|r| r.region.contains(pt, slack))
    }
}

/// Laws cap for the grid, to keep desk-scale sweeps desk-scale.
const GRID_GUARD: usize = 4_000_000;

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// All points of the simplex over `cells` symbols with masses in
/// `{0, 1/k, .., 1}`, in lexicographic order of the counts.
pub fn simplex_grid(cells: usize, k: usize) -> Result<Vec<Vec<f64>>> {
    let count = binomial(k + cells - 1, cells - 1);
    if count > GRID_GUARD {
        return Err(Error::GuardExceeded(format!(
            "simplex grid with {cells} cells at resolution {k} has {count} points (limit {GRID_GUARD})"
        )));
    }
    let mut out = Vec::with_capacity(count);
    let mut counts = vec![0usize; cells];
    fn rec(pos: usize, left: usize, k: usize, counts: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            out.push(counts.iter().map(|c| *c as f64 / k as f64).collect());
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(pos + 1, left - c, k, counts, out);
        }
    }
    rec(0, k, k, &mut counts, &mut out);
    Ok(out)
}

fn candidate_laws(
    x1: usize,
    x2: usize,
    scenario: CribbingScenario,
    cfg: &DistributionSearchConfig,
    cap: usize,
) -> Result<Vec<(String, InputLaw)>> {
    let mut laws = Vec::new();
    let k = cfg.resolution;
    if scenario.needs_aux() {
        // Grid over product laws (|U| = 1); richer auxiliaries come from the
        // random draws.
        let g1 = simplex_grid(x1, k)?;
        let g2 = simplex_grid(x2, k)?;
        if g1.len().saturating_mul(g2.len()) > GRID_GUARD {
            return Err(Error::GuardExceeded("product-law grid too large".into()));
        }
        for a in &g1 {
            for b in &g2 {
                let pa = crate::prob::ProbVector::from_weights(a.clone())?;
                let pb = crate::prob::ProbVector::from_weights(b.clone())?;
                laws.push((format!("grid-{}", laws.len()), InputLaw::trivial_aux(&pa, &pb)));
            }
        }
    } else {
        for (i, p) in simplex_grid(x1 * x2, k)?.into_iter().enumerate() {
            let w = crate::prob::ProbVector::from_weights(p)?;
            laws.push((format!("grid-{i}"), InputLaw::joint(x1, x2, w.into_vec())?));
        }
    }
    let draws: Vec<(String, InputLaw)> = (0..cfg.samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng_from(derive_seed(cfg.seed, j as u64));
            let law = if scenario.needs_aux() {
                random_aux_law(&mut rng, 1 + j % cap, x1, x2)
            } else {
                random_joint_law(&mut rng, x1, x2)
            };
            (format!("rand-{j}"), law)
        })
        .collect();
    laws.extend(draws);
    Ok(laws)
}

/// Union of per-law regions over a grid of laws plus seeded random draws,
/// with its Pareto frontier. Deterministic for a fixed config.
pub fn union_region_estimate(
    instance: Instance<'_>,
    scenario: CribbingScenario,
    target: Option<&TargetOutput>,
    cfg: &DistributionSearchConfig,
) -> Result<UnionEstimate> {
    cfg.validate()?;
    let (x1, x2) = instance.sizes();
    let cap = cfg.u_cardinality_cap.unwrap_or(x1 * x2);
    let target = match (cfg.mode, target) {
        (QMode::TargetQ, None) => {
            return Err(Error::Config("target-Q mode needs a target output".into()));
        }
        (QMode::TargetQ, Some(t)) => Some(t),
        (QMode::InducedQ, _) => None,
    };
    let channel = instance.target_channel();
    let laws = candidate_laws(x1, x2, scenario, cfg, cap)?;
    let candidates = laws.len();
    let evaluated: Vec<Option<LawRegion>> = laws
        .into_par_iter()
        .map(|(law_id, law)| -> Result<Option<LawRegion>> {
            if let Some(t) = target {
                if !matches_target(&channel, &law, t, cfg.target_tol)? {
                    return Ok(None);
                }
            }
            let region = instance.region(&law, scenario)?;
            Ok(Some(LawRegion { law_id, law, region }))
        })
        .collect::<Result<Vec<_>>>()?;
    let regions: Vec<LawRegion> = evaluated.into_iter().flatten().collect();
    if regions.is_empty() {
        return Err(Error::NoFeasibleLaw { tol: cfg.target_tol });
    }
    let tagged: Vec<(RatePoint, usize)> = regions
        .par_iter()
        .enumerate()
        .map(|(i, r)| r.region.frontier().into_iter().map(move |p| (p, i)).collect::<Vec<_>>())
        .flatten()
        .collect();
    let frontier = pareto(tagged, instance.kind())
        .into_iter()
        .map(|(p, i)| FrontierPoint {
            r1: p.r1,
            r2: p.r2,
            law_id: regions[i].law_id.clone(),
        })
        .collect();
    Ok(UnionEstimate {
        kind: instance.kind(),
        scenario,
        mode: cfg.mode,
        u_cardinality_cap: cap,
        candidates,
        regions,
        frontier,
    })
}

/// Whether every point of `old` is weakly dominated by some point of `new`
/// (in the direction that makes a region larger).
pub fn frontier_dominated(old: &[FrontierPoint], new: &[FrontierPoint], kind: RegionKind, tol: f64) -> bool {
    old.iter().all(|o| {
        new.iter().any(|n| match kind {
            RegionKind::Resolvability => n.r1 <= o.r1 + tol && n.r2 <= o.r2 + tol,
            RegionKind::Secrecy => n.r1 >= o.r1 - tol && n.r2 >= o.r2 - tol,
        })
    })
}

// ---------------------------------------------------------------------------
// Convexity

/// Mixture law used by the convexity argument: for Joint laws with a common
/// output law, mixing the posteriors `P_{X1X2|Z}` at fixed `Q_Z` is the same
/// as mixing the input laws; for auxiliary laws it is time sharing with
/// `U' = (U, Q)`.
pub fn mixture_law(law_a: &InputLaw, law_b: &InputLaw, lambda: f64) -> Result<InputLaw> {
    match (law_a, law_b) {
        (InputLaw::Joint { p: a }, InputLaw::Joint { p: b }) => InputLaw::from_joint_table(a.mix(b, lambda)?),
        (
            InputLaw::WithAux {
                p_u: ua,
                p_x1_given_u: a1,
                p_x2_given_u: a2,
                ..
            },
            InputLaw::WithAux {
                p_u: ub,
                p_x1_given_u: b1,
                p_x2_given_u: b2,
                ..
            },
        ) => {
            let p_u: Vec<f64> = ua
                .as_slice()
                .iter()
                .map(|p| lambda * p)
                .chain(ub.as_slice().iter().map(|p| (1.0 - lambda) * p))
                .collect();
            let stack = |a: &crate::prob::Kernel, b: &crate::prob::Kernel| {
                crate::prob::Kernel::new(a.rows().iter().chain(b.rows()).cloned().collect())
            };
            InputLaw::with_aux(crate::prob::ProbVector::new(p_u)?, stack(a1, b1)?, stack(a2, b2)?)
        }
        _ => Err(Error::LawVariant {
            scenario: "mixture".into(),
            reason: "both laws must have the same variant".into(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityRow {
    pub label: &'static str,
    pub mixture: f64,
    pub combination: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityCarry {
    pub margin_a: f64,
    pub margin_b: f64,
    pub margin_mixture: f64,
    /// Both endpoints feasible ⇒ mixture feasible.
    pub survives: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub scenario: CribbingScenario,
    pub lambda: f64,
    pub q_deviation: f64,
    pub rows: Vec<ConvexityRow>,
    pub feasibility: Option<FeasibilityCarry>,
    pub holds: bool,
}

/// Checks that every threshold of the mixture law is at most the
/// λ-combination of the endpoint thresholds (tolerance `1e-9`).
pub fn convexity_check(
    mac: &MacChannel,
    scenario: CribbingScenario,
    law_a: &InputLaw,
    law_b: &InputLaw,
    lambda: f64,
) -> Result<ConvexityReport> {
    const TOL: f64 = 1e-9;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Config(format!("lambda {lambda} outside [0,1]")));
    }
    let qa = induced_output(mac, law_a)?;
    let qb = induced_output(mac, law_b)?;
    let q_deviation = qa.max_abs_diff(&qb);
    if q_deviation > TOL {
        return Err(Error::TargetMismatch { deviation: q_deviation });
    }
    let ra = resolvability_thresholds(mac, law_a, scenario)?;
    let rb = resolvability_thresholds(mac, law_b, scenario)?;
    let mix = mixture_law(law_a, law_b, lambda)?;
    let rm = resolvability_thresholds(mac, &mix, scenario)?;
    let rows: Vec<ConvexityRow> = rm
        .constraints
        .iter()
        .zip(&ra.constraints)
        .zip(&rb.constraints)
        .map(|((m, a), b)| {
            let combination = lambda * a.b + (1.0 - lambda) * b.b;
            ConvexityRow {
                label: m.label,
                mixture: m.b,
                combination,
                holds: m.b <= combination + TOL,
            }
        })
        .collect();
    let feasibility = match (ra.feasibility_margin, rb.feasibility_margin, rm.feasibility_margin) {
        (Some(a), Some(b), Some(m)) => Some(FeasibilityCarry {
            margin_a: a,
            margin_b: b,
            margin_mixture: m,
            survives: !(ra.feasible && rb.feasible) || rm.feasible,
        }),
        _ => None,
    };
    let holds = rows.iter().all(|r| r.holds) && feasibility.as_ref().is_none_or(|f| f.survives);
    Ok(ConvexityReport {
        scenario,
        lambda,
        q_deviation,
        rows,
        feasibility,
        holds,
    })
}

// ---------------------------------------------------------------------------
// Pre-elimination systems and the Fourier–Motzkin cross-check

/// One strict inequality `rate·(R1,R2) + aux·A (<|>) bound` of a
/// pre-elimination system. `Sense::Le` stands for `<`, `Sense::Ge` for `>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxInequality {
    pub label: &'static str,
    pub rate: [f64; 2],
    pub aux: [f64; 3],
    pub sense: Sense,
    pub bound: f64,
}

impl AuxInequality {
    fn new(label: &'static str, rate: [f64; 2], aux: [f64; 3], sense: Sense, bound: f64) -> Self {
        Self {
            label,
            rate,
            aux,
            sense,
            bound,
        }
    }

    pub fn margin(&self, pt: RatePoint, aux: [f64; 3]) -> f64 {
        let lhs =
            self.rate[0] * pt.r1 + self.rate[1] * pt.r2 + self.aux.iter().zip(aux).map(|(c, a)| c * a).sum::<f64>();
        match self.sense {
            Sense::Le => self.bound - lhs,
            Sense::Ge => lhs - self.bound,
        }
    }
}

/// Error-probability and resolvability constraints on secret rates plus
/// auxiliary (dither) rates, before the auxiliaries are eliminated.
///
/// Auxiliaries are `[R1', R2', -]` for the dither systems and
/// `[ρ1', ρ1'', ρ2]` for the strictly-causal system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreEliminationSystem {
    pub scenario: CribbingScenario,
    pub aux_dim: usize,
    pub inequalities: Vec<AuxInequality>,
}

impl PreEliminationSystem {
    pub fn from_terms(t: &SecrecyTerms, scenario: CribbingScenario) -> Result<Self> {
        use CribbingScenario::*;
        use Sense::{Ge, Le};
        let (y, z) = (&t.y, &t.z);
        let dither = |extra: bool| {
            let mut v = vec![
                AuxInequality::new("R2+R2' < I(X2;Y|X1)", [0.0, 1.0], [0.0, 1.0, 0.0], Le, y.i_x2_given_x1),
                AuxInequality::new("R1+R1'+R2+R2' < I(X1X2;Y)", [1.0, 1.0], [1.0, 1.0, 0.0], Le, y.i_x1x2),
                AuxInequality::new("R1' > I(X1;Z)", [0.0, 0.0], [1.0, 0.0, 0.0], Ge, z.i_x1),
                AuxInequality::new("R1'+R2' > I(X1X2;Z)", [0.0, 0.0], [1.0, 1.0, 0.0], Ge, z.i_x1x2),
            ];
            if extra {
                v.insert(
                    0,
                    AuxInequality::new("R1+R1' < H(X1)", [1.0, 0.0], [1.0, 0.0, 0.0], Le, z.h_x1),
                );
                v.push(AuxInequality::new(
                    "R2' > I(X1X2;Z)-H(X1)",
                    [0.0, 0.0],
                    [0.0, 1.0, 0.0],
                    Ge,
                    z.i_x1x2 - z.h_x1,
                ));
            }
            v
        };
        let (aux_dim, inequalities) = match scenario {
            DegradedMessageSets => (2, dither(false)),
            NonCausal | Causal => (2, dither(true)),
            StrictlyCausal => (
                3,
                vec![
                    AuxInequality::new("R1+ρ1'+ρ1'' < H(X1|U)", [1.0, 0.0], [1.0, 1.0, 0.0], Le, z.h_x1_given_u),
                    AuxInequality::new(
                        "R2+ρ2 < I(X2;Y|X1,U)",
                        [0.0, 1.0],
                        [0.0, 0.0, 1.0],
                        Le,
                        y.i_x2_given_ux1,
                    ),
                    AuxInequality::new(
                        "R1+R2+ρ1'+ρ1''+ρ2 < I(X1X2;Y)",
                        [1.0, 1.0],
                        [1.0, 1.0, 1.0],
                        Le,
                        y.i_x1x2,
                    ),
                    AuxInequality::new("ρ1'' > I(U;Z)", [0.0, 0.0], [0.0, 1.0, 0.0], Ge, z.i_u),
                    AuxInequality::new("ρ1'+ρ1'' > I(U,X1;Z)", [0.0, 0.0], [1.0, 1.0, 0.0], Ge, z.i_ux1),
                    AuxInequality::new("ρ1'+ρ1''+ρ2 > I(X1X2;Z)", [0.0, 0.0], [1.0, 1.0, 1.0], Ge, z.i_x1x2),
                    AuxInequality::new("ρ1''+ρ2 > I(U,X2;Z)", [0.0, 0.0], [0.0, 1.0, 1.0], Ge, z.i_ux2),
                ],
            ),
            NonCooperating => {
                return Err(Error::LawVariant {
                    scenario: scenario.name().into(),
                    reason: "no secrecy construction for non-cooperating encoders".into(),
                })
            }
        };
        Ok(Self {
            scenario,
            aux_dim,
            inequalities,
        })
    }

    pub fn build(wmac: &WiretapMac, law: &InputLaw, scenario: CribbingScenario) -> Result<Self> {
        if scenario != CribbingScenario::NonCooperating {
            check_variant(law, scenario)?;
        }
        Self::from_terms(&SecrecyTerms::compute(wmac, law)?, scenario)
    }

    /// Smallest margin over all inequalities and nonnegativity of rates and
    /// auxiliaries (strictly satisfied iff positive, apart from the
    /// nonnegativity part which only needs `≥ 0`).
    pub fn margin(&self, pt: RatePoint, aux: [f64; 3]) -> f64 {
        self.inequalities
            .iter()
            .map(|q| q.margin(pt, aux))
            .fold(f64::INFINITY, f64::min)
    }

    fn nonnegative(&self, pt: RatePoint, aux: [f64; 3]) -> bool {
        pt.r1 >= 0.0 && pt.r2 >= 0.0 && aux[..self.aux_dim].iter().all(|a| *a >= 0.0)
    }

    /// Every inequality holds strictly and all rates are nonnegative.
    pub fn satisfied_strictly(&self, pt: RatePoint, aux: [f64; 3]) -> bool {
        self.nonnegative(pt, aux) && self.margin(pt, aux) > 0.0
    }

    /// Every inequality holds up to `slack`.
    pub fn satisfied_within(&self, pt: RatePoint, aux: [f64; 3], slack: f64) -> bool {
        self.nonnegative(pt, aux) && self.margin(pt, aux) >= -slack
    }

    /// Exhaustive search for an auxiliary point on the grid `{0, h, 2h, ..}`
    /// up to `max`, satisfying every inequality within `slack`. The last
    /// auxiliary coordinate is solved as an interval, the others enumerated.
    pub fn grid_witness(&self, pt: RatePoint, step: f64, max: f64, slack: f64) -> Option<[f64; 3]> {
        let top = (max / step).ceil() as usize;
        let last = self.aux_dim - 1;
        let mut aux = [0.0; 3];
        let outer = top + 1;
        let outer_count = outer.pow(last as u32);
        for code in 0..outer_count {
            let mut c = code;
            for a in aux.iter_mut().take(last) {
                *a = (c % outer) as f64 * step;
                c /= outer;
            }
            let (mut lo, mut hi) = (0.0f64, top as f64 * step);
            let mut ok = true;
            for q in &self.inequalities {
                let coef = q.aux[last];
                let mut probe = aux;
                probe[last] = 0.0;
                let m0 = q.margin(pt, probe);
                if coef == 0.0 {
                    if m0 < -slack {
                        ok = false;
                        break;
                    }
                    continue;
                }
                // margin(a) = m0 + coef·a for Ge, m0 − coef·a for Le.
                match q.sense {
                    Sense::Ge => lo = lo.max((-slack - m0) / coef),
                    Sense::Le => hi = hi.min((m0 + slack) / coef),
                }
            }
            if !ok || pt.r1 < 0.0 || pt.r2 < 0.0 {
                continue;
            }
            let j = (lo / step - 1e-9).ceil().max(0.0);
            let a = j * step;
            if a <= hi + 1e-12 && j as usize <= top {
                aux[last] = a;
                if self.satisfied_within(pt, aux, slack + 1e-12) {
                    return Some(aux);
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FmeMismatch {
    pub r1: f64,
    pub r2: f64,
    pub member: bool,
    pub witness: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FmeReport {
    pub scenario: CribbingScenario,
    pub grid_step: f64,
    pub aux_step: f64,
    pub points: usize,
    pub members: usize,
    pub mismatches: Vec<FmeMismatch>,
    pub holds: bool,
}

/// Checks on a rate grid that membership in the eliminated secrecy region
/// agrees with existence of auxiliary rates solving the pre-elimination
/// system:
///
/// - member (no slack) ⇒ a grid witness exists with every inequality relaxed
///   by one auxiliary step;
/// - such a witness exists ⇒ member with slack two auxiliary steps (each
///   region constraint is a sum of at most two relaxed inequalities).
pub fn fme_cross_check(
    wmac: &WiretapMac,
    law: &InputLaw,
    scenario: CribbingScenario,
    grid_step: f64,
    aux_step: f64,
) -> Result<FmeReport> {
    if !matches!(
        scenario,
        CribbingScenario::DegradedMessageSets | CribbingScenario::NonCausal | CribbingScenario::Causal
    ) {
        return Err(Error::LawVariant {
            scenario: scenario.name().into(),
            reason: "the eliminated region is cross-checked only for the dither constructions".into(),
        });
    }
    if !(grid_step > 0.0 && aux_step > 0.0) {
        return Err(Error::Config("grid steps must be positive".into()));
    }
    let terms = SecrecyTerms::compute(wmac, law)?;
    let region = secrecy_region(wmac, law, scenario)?;
    let system = PreEliminationSystem::from_terms(&terms, scenario)?;
    let reach = terms.y.i_x1x2.max(terms.z.h_x1).max(terms.z.i_x1x2);
    let rate_top = ((reach + 2.0 * grid_step) / grid_step).ceil() as usize;
    let aux_max = reach + terms.z.i_x1x2 + 2.0 * aux_step;
    let grid: Vec<RatePoint> = (0..=rate_top)
        .flat_map(|i| (0..=rate_top).map(move |j| RatePoint::new(i as f64 * grid_step, j as f64 * grid_step)))
        .collect();
    let results: Vec<(RatePoint, bool, bool, bool)> = grid
        .par_iter()
        .map(|&pt| {
            let member = region.contains(pt, 1e-12);
            let witness = system.grid_witness(pt, aux_step, aux_max, aux_step).is_some();
            let loose_member = region.contains(pt, 2.0 * aux_step);
            (pt, member, witness, loose_member)
        })
        .collect();
    let mismatches: Vec<FmeMismatch> = results
        .iter()
        .filter(|(_, m, w, lm)| (*m && !*w) || (*w && !*lm))
        .map(|(p, m, w, _)| FmeMismatch {
            r1: p.r1,
            r2: p.r2,
            member: *m,
            witness: *w,
        })
        .collect();
    Ok(FmeReport {
        scenario,
        grid_step,
        aux_step,
        points: results.len(),
        members: results.iter().filter(|r| r.1).count(),
        holds: mismatches.is_empty(),
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ProbVector;
    use approx::assert_abs_diff_eq;

    fn h2(p: f64) -> f64 {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }

    #[test]
    fn xor_degraded_thresholds() {
        let r = resolvability_thresholds(
            &MacChannel::xor(),
            &InputLaw::uniform(2, 2),
            CribbingScenario::DegradedMessageSets,
        )
        .unwrap();
        assert_abs_diff_eq!(r.threshold("R1").unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.threshold("R1+R2").unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn and_degraded_thresholds_match_closed_form() {
        let r = resolvability_thresholds(
            &MacChannel::and(),
            &InputLaw::uniform(2, 2),
            CribbingScenario::DegradedMessageSets,
        )
        .unwrap();
        // I(X1;Z) = H(Z) − H(Z|X1) = h(1/4) − (1/2)·h(1/2); I(X1X2;Z) = H(Z).
        assert_abs_diff_eq!(r.threshold("R1").unwrap(), h2(0.25) - 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.threshold("R1+R2").unwrap(), h2(0.25), epsilon = 1e-12);
        assert_abs_diff_eq!(h2(0.25) - 0.5, 0.3112781245, epsilon = 1e-10);
    }

    #[test]
    fn causal_equals_noncausal() {
        let mac = MacChannel::and();
        let law = InputLaw::joint(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let a = resolvability_thresholds(&mac, &law, CribbingScenario::Causal).unwrap();
        let b = resolvability_thresholds(&mac, &law, CribbingScenario::NonCausal).unwrap();
        assert_eq!(a.max_threshold_diff(&b), Some(0.0));
    }

    #[test]
    fn variant_errors() {
        let mac = MacChannel::xor();
        let joint = InputLaw::uniform(2, 2);
        let aux = InputLaw::trivial_aux(&ProbVector::uniform(2), &ProbVector::uniform(2));
        assert!(matches!(
            resolvability_thresholds(&mac, &joint, CribbingScenario::StrictlyCausal),
            Err(Error::LawVariant { .. })
        ));
        assert!(matches!(
            resolvability_thresholds(&mac, &aux, CribbingScenario::NonCausal),
            Err(Error::LawVariant { .. })
        ));
    }

    #[test]
    fn strictly_causal_trivial_u_reduces_to_product_form() {
        let mac = MacChannel::and();
        let p1 = ProbVector::new(vec![0.4, 0.6]).unwrap();
        let p2 = ProbVector::new(vec![0.7, 0.3]).unwrap();
        let sc =
            resolvability_thresholds(&mac, &InputLaw::trivial_aux(&p1, &p2), CribbingScenario::StrictlyCausal).unwrap();
        let nc = resolvability_thresholds(&mac, &InputLaw::product(&p1, &p2), CribbingScenario::NonCausal).unwrap();
        assert!(sc.feasible);
        assert!(sc.max_threshold_diff(&nc).unwrap() < 1e-12);
    }

    #[test]
    fn strictly_causal_infeasible_when_z_reveals_x1() {
        let mac = MacChannel::deterministic(2, 2, 2, |a, _| a).unwrap();
        let law = InputLaw::trivial_aux(&ProbVector::uniform(2), &ProbVector::uniform(2));
        let sc = resolvability_thresholds(&mac, &law, CribbingScenario::StrictlyCausal).unwrap();
        assert!(!sc.feasible);
        assert!(!sc.contains(RatePoint::new(5.0, 5.0), 0.0));
        assert!(sc.as_outer_bound().contains(RatePoint::new(5.0, 5.0), 0.0));
    }

    #[test]
    fn contains_boundary_cases() {
        let r = resolvability_thresholds(
            &MacChannel::xor(),
            &InputLaw::uniform(2, 2),
            CribbingScenario::DegradedMessageSets,
        )
        .unwrap();
        assert!(r.contains(RatePoint::new(0.0, 1.0), 1e-9));
        assert!(!r.contains(RatePoint::new(0.0, 0.9), 1e-9));
        assert!(r.contains(RatePoint::new(0.0, 1.0 - 1e-12), 1e-9));
    }

    #[test]
    fn secrecy_examples() {
        let y = MacChannel::xor();
        let z_const = MacChannel::constant(2, 2, &ProbVector::new(vec![0.3, 0.7]).unwrap());
        let w = WiretapMac::from_marginals(&y, &z_const).unwrap();
        let law = InputLaw::uniform(2, 2);
        let r = secrecy_region(&w, &law, CribbingScenario::DegradedMessageSets).unwrap();
        assert_abs_diff_eq!(r.threshold("R2").unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.threshold("R1+R2").unwrap(), 1.0, epsilon = 1e-12);

        let same = WiretapMac::from_marginals(&y, &y).unwrap();
        let r = secrecy_region(&same, &law, CribbingScenario::DegradedMessageSets).unwrap();
        assert_abs_diff_eq!(r.threshold("R1+R2").unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(r.vertices(), vec![RatePoint::new(0.0, 0.0)]);

        let a = secrecy_region(&w, &law, CribbingScenario::NonCausal).unwrap();
        let b = secrecy_region(&w, &law, CribbingScenario::Causal).unwrap();
        assert_eq!(a.max_threshold_diff(&b), Some(0.0));
    }

    #[test]
    fn strictly_causal_secrecy_collapses_when_eve_sees_x1() {
        let y = MacChannel::xor();
        let eve = MacChannel::deterministic(2, 2, 2, |a, _| a).unwrap();
        let w = WiretapMac::from_marginals(&y, &eve).unwrap();
        let law = InputLaw::trivial_aux(&ProbVector::uniform(2), &ProbVector::uniform(2));
        let r = secrecy_region(&w, &law, CribbingScenario::StrictlyCausal).unwrap();
        assert!(r.threshold("R1").unwrap() <= 1e-12);
        assert!(r.vertices().iter().all(|v| v.r1.abs() < 1e-12));
    }

    #[test]
    fn xor_frontier_has_unit_sum_corner() {
        let r = resolvability_thresholds(
            &MacChannel::xor(),
            &InputLaw::uniform(2, 2),
            CribbingScenario::DegradedMessageSets,
        )
        .unwrap();
        let f = r.frontier();
        assert_eq!(f, vec![RatePoint::new(0.0, 1.0), RatePoint::new(1.0, 0.0)]);
    }

    #[test]
    fn simplex_grid_counts() {
        assert_eq!(simplex_grid(2, 4).unwrap().len(), 5);
        assert_eq!(simplex_grid(4, 10).unwrap().len(), 286);
        assert!(simplex_grid(4, 100_000).is_err());
    }

    #[test]
    fn union_on_input_independent_channel_reaches_origin() {
        let q = ProbVector::new(vec![0.3, 0.7]).unwrap();
        let mac = MacChannel::constant(2, 2, &q);
        let cfg = DistributionSearchConfig {
            resolution: 4,
            samples: 5,
            ..Default::default()
        };
        let est = union_region_estimate(
            Instance::Mac(&mac),
            CribbingScenario::DegradedMessageSets,
            Some(&TargetOutput { q_z: q }),
            &cfg,
        )
        .unwrap();
        assert_eq!(est.regions.len(), est.candidates);
        assert_eq!(est.frontier.len(), 1);
        assert_eq!(est.frontier[0].point(), RatePoint::new(0.0, 0.0));
    }

    #[test]
    fn union_unreachable_target_fails() {
        let mac = MacChannel::constant(2, 2, &ProbVector::new(vec![0.3, 0.7]).unwrap());
        let cfg = DistributionSearchConfig {
            resolution: 4,
            samples: 5,
            ..Default::default()
        };
        let t = TargetOutput {
            q_z: ProbVector::point_mass(2, 0),
        };
        assert!(matches!(
            union_region_estimate(
                Instance::Mac(&mac),
                CribbingScenario::DegradedMessageSets,
                Some(&t),
                &cfg
            ),
            Err(Error::NoFeasibleLaw { .. })
        ));
    }

    #[test]
    fn convexity_trivial_cases() {
        let mac = MacChannel::and();
        let law = InputLaw::joint(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let rep = convexity_check(&mac, CribbingScenario::NonCausal, &law, &law, 0.3).unwrap();
        assert!(rep.holds);
        for row in &rep.rows {
            assert_abs_diff_eq!(row.mixture, row.combination, epsilon = 1e-12);
        }
        let other = InputLaw::uniform(2, 2);
        assert!(matches!(
            convexity_check(&mac, CribbingScenario::NonCausal, &law, &other, 0.5),
            Err(Error::TargetMismatch { .. })
        ));
    }

    #[test]
    fn time_sharing_mixture_is_exact_at_the_ends() {
        let mac = MacChannel::and();
        let a = InputLaw::trivial_aux(
            &ProbVector::new(vec![0.5, 0.5]).unwrap(),
            &ProbVector::new(vec![0.5, 0.5]).unwrap(),
        );
        for lambda in [0.0, 1.0] {
            let rep = convexity_check(&mac, CribbingScenario::StrictlyCausal, &a, &a, lambda).unwrap();
            assert!(rep.holds);
            for row in &rep.rows {
                assert_abs_diff_eq!(row.mixture, row.combination, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fme_on_constant_eavesdropper() {
        let z = MacChannel::constant(2, 2, &ProbVector::new(vec![0.5, 0.5]).unwrap());
        let w = WiretapMac::from_marginals(&MacChannel::and(), &z).unwrap();
        let rep = fme_cross_check(
            &w,
            &InputLaw::uniform(2, 2),
            CribbingScenario::DegradedMessageSets,
            0.1,
            0.02,
        )
        .unwrap();
        assert!(rep.holds, "{:?}", rep.mismatches);
        assert!(rep.members > 0);
    }
}
