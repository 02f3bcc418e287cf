//! Channels, input laws and cribbing scenarios.
//!
//! Pair index convention: the input pair `(x1, x2)` is row `x1 * x2_size + x2`
//! of a channel kernel (x1 outer). For the wiretap channel the output pair
//! `(y, z)` is column `y * z_size + z`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{JointTable, Kernel, ProbVector};

/// Default tolerance for target-Q matching.
pub const TARGET_TOL: f64 = 1e-9;

/// Cribbing MAC `W_{Z|X1X2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacChannel {
    pub x1_size: usize,
    pub x2_size: usize,
    pub z_size: usize,
    #[serde(serialize_with = "ser_kernel")]
    pub w: Kernel,
}

fn ser_kernel<S: serde::Serializer>(k: &Kernel, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<&[f64]> = k.rows().iter().map(|r| r.as_slice()).collect();
    rows.serialize(s)
}

#[derive(Deserialize)]
struct RawMac {
    x1_size: usize,
    x2_size: usize,
    z_size: usize,
    w: Vec<Vec<f64>>,
}

impl<'de> Deserialize<'de> for MacChannel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMac::deserialize(d)?;
        let w = Kernel::from_rows(raw.w).map_err(serde::de::Error::custom)?;
        MacChannel::new(raw.x1_size, raw.x2_size, raw.z_size, w).map_err(serde::de::Error::custom)
    }
}

impl MacChannel {
    pub fn new(x1_size: usize, x2_size: usize, z_size: usize, w: Kernel) -> Result<Self> {
        if w.input_size() != x1_size * x2_size {
            return Err(Error::DimensionMismatch(format!(
                "channel has {} rows, expected x1_size*x2_size = {}",
                w.input_size(),
                x1_size * x2_size
            )));
        }
        if w.output_size() != z_size {
            return Err(Error::DimensionMismatch(format!(
                "channel rows have {} outputs, expected z_size = {z_size}",
                w.output_size()
            )));
        }
        Ok(Self {
            x1_size,
            x2_size,
            z_size,
            w,
        })
    }

    /// Deterministic channel `z = f(x1, x2)`.
    pub fn deterministic(
        x1_size: usize,
        x2_size: usize,
        z_size: usize,
        f: impl Fn(usize, usize) -> usize,
    ) -> Result<Self> {
        let mut rows = Vec::with_capacity(x1_size * x2_size);
        for x1 in 0..x1_size {
            for x2 in 0..x2_size {
                let z = f(x1, x2);
                if z >= z_size {
                    return Err(Error::DimensionMismatch(format!("f({x1},{x2}) = {z} outside Z")));
                }
                rows.push(ProbVector::point_mass(z_size, z));
            }
        }
        Self::new(x1_size, x2_size, z_size, Kernel::new(rows)?)
    }

    /// Binary XOR MAC, `Z = X1 ⊕ X2`.
    pub fn xor() -> Self {
        Self::deterministic(2, 2, 2, |a, b| a ^ b).expect("xor channel")
    }

    /// Binary AND MAC, `Z = X1 ∧ X2`.
    pub fn and() -> Self {
        Self::deterministic(2, 2, 2, |a, b| a & b).expect("and channel")
    }

    /// Channel that ignores its inputs and emits `q`.
    pub fn constant(x1_size: usize, x2_size: usize, q: &ProbVector) -> Self {
        let rows = vec![q.clone(); x1_size * x2_size];
        Self::new(
            x1_size,
            x2_size,
            q.len(),
            Kernel::new(rows).expect("rows share q's alphabet"),
        )
        .expect("consistent sizes")
    }

    pub fn pair_index(&self, x1: usize, x2: usize) -> usize {
        x1 * self.x2_size + x2
    }

    pub fn row(&self, x1: usize, x2: usize) -> &ProbVector {
        self.w.row(self.pair_index(x1, x2))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Wiretap MAC `W_{YZ|X1X2}`; `Y` is the legitimate receiver, `Z` the
/// eavesdropper.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WiretapMac {
    pub x1_size: usize,
    pub x2_size: usize,
    pub y_size: usize,
    pub z_size: usize,
    #[serde(serialize_with = "ser_kernel")]
    pub wyz: Kernel,
}

#[derive(Deserialize)]
struct RawWiretap {
    x1_size: usize,
    x2_size: usize,
    y_size: usize,
    z_size: usize,
    wyz: Vec<Vec<f64>>,
}

impl<'de> Deserialize<'de> for WiretapMac {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawWiretap::deserialize(d)?;
        let wyz = Kernel::from_rows(raw.wyz).map_err(serde::de::Error::custom)?;
        WiretapMac::new(raw.x1_size, raw.x2_size, raw.y_size, raw.z_size, wyz).map_err(serde::de::Error::custom)
    }
}

impl WiretapMac {
    pub fn new(x1_size: usize, x2_size: usize, y_size: usize, z_size: usize, wyz: Kernel) -> Result<Self> {
        if wyz.input_size() != x1_size * x2_size || wyz.output_size() != y_size * z_size {
            return Err(Error::DimensionMismatch(format!(
                "wiretap kernel is {}x{}, expected {}x{}",
                wyz.input_size(),
                wyz.output_size(),
                x1_size * x2_size,
                y_size * z_size
            )));
        }
        Ok(Self {
            x1_size,
            x2_size,
            y_size,
            z_size,
            wyz,
        })
    }

    /// Wiretap channel whose outputs are conditionally independent given the
    /// inputs: `W(y,z|x) = W_Y(y|x) W_Z(z|x)`.
    pub fn from_marginals(legit: &MacChannel, eve: &MacChannel) -> Result<Self> {
        if legit.x1_size != eve.x1_size || legit.x2_size != eve.x2_size {
            return Err(Error::DimensionMismatch("receivers disagree on input alphabets".into()));
        }
        let rows = legit
            .w
            .rows()
            .iter()
            .zip(eve.w.rows())
            .map(|(ry, rz)| {
                let v = ry
                    .as_slice()
                    .iter()
                    .flat_map(|a| rz.as_slice().iter().map(move |b| a * b))
                    .collect();
                ProbVector::new(v)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            legit.x1_size,
            legit.x2_size,
            legit.z_size,
            eve.z_size,
            Kernel::new(rows)?,
        )
    }

    fn marginal_channel(&self, keep_y: bool) -> MacChannel {
        let out = if keep_y { self.y_size } else { self.z_size };
        let rows = self
            .wyz
            .rows()
            .iter()
            .map(|r| {
                let mut v = vec![0.0; out];
                for y in 0..self.y_size {
                    for z in 0..self.z_size {
                        v[if keep_y { y } else { z }] += r.get(y * self.z_size + z);
                    }
                }
                ProbVector::new(v).expect("marginal of a valid row")
            })
            .collect();
        MacChannel::new(self.x1_size, self.x2_size, out, Kernel::new(rows).expect("rows")).expect("sizes")
    }

    /// `W_{Y|X1X2}`.
    pub fn legitimate(&self) -> MacChannel {
        self.marginal_channel(true)
    }

    /// `W_{Z|X1X2}`.
    pub fn eavesdropper(&self) -> MacChannel {
        self.marginal_channel(false)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Encoder input law: either an arbitrary joint `P_{X1X2}` or the
/// auxiliary factorization `P_U P_{X1|U} P_{X2|U}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InputLaw {
    Joint {
        p: JointTable,
    },
    WithAux {
        u_size: usize,
        p_u: ProbVector,
        p_x1_given_u: Kernel,
        p_x2_given_u: Kernel,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawLaw {
    Joint {
        joint: Vec<Vec<f64>>,
    },
    WithAux {
        u: Vec<f64>,
        x1_given_u: Vec<Vec<f64>>,
        x2_given_u: Vec<Vec<f64>>,
    },
}

impl<'de> Deserialize<'de> for InputLaw {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let law = match RawLaw::deserialize(d)? {
            RawLaw::Joint { joint } => {
                let x1 = joint.len();
                let x2 = joint.first().map_or(0, Vec::len);
                if joint.iter().any(|r| r.len() != x2) {
                    return Err(serde::de::Error::custom("ragged joint law"));
                }
                InputLaw::joint(x1, x2, joint.into_iter().flatten().collect())
            }
            RawLaw::WithAux {
                u,
                x1_given_u,
                x2_given_u,
            } => (|| {
                InputLaw::with_aux(
                    ProbVector::new(u)?,
                    Kernel::from_rows(x1_given_u)?,
                    Kernel::from_rows(x2_given_u)?,
                )
            })(),
        };
        law.map_err(serde::de::Error::custom)
    }
}

impl InputLaw {
    /// Joint law from a row-major `x1_size × x2_size` table.
    pub fn joint(x1_size: usize, x2_size: usize, probs: Vec<f64>) -> Result<Self> {
        Ok(InputLaw::Joint {
            p: JointTable::new(vec!["X1", "X2"], vec![x1_size, x2_size], probs)?,
        })
    }

    pub fn from_joint_table(p: JointTable) -> Result<Self> {
        if p.labels() != ["X1", "X2"] {
            return Err(Error::Axis(format!(
                "input law axes must be [X1, X2], got {:?}",
                p.labels()
            )));
        }
        Ok(InputLaw::Joint { p })
    }

    /// Independent inputs `P_{X1} P_{X2}` as a Joint law.
    pub fn product(p1: &ProbVector, p2: &ProbVector) -> Self {
        let probs = p1
            .as_slice()
            .iter()
            .flat_map(|a| p2.as_slice().iter().map(move |b| a * b))
            .collect();
        Self::joint(p1.len(), p2.len(), probs).expect("product of valid laws")
    }

    pub fn uniform(x1_size: usize, x2_size: usize) -> Self {
        Self::product(&ProbVector::uniform(x1_size), &ProbVector::uniform(x2_size))
    }

    pub fn with_aux(p_u: ProbVector, p_x1_given_u: Kernel, p_x2_given_u: Kernel) -> Result<Self> {
        let u_size = p_u.len();
        if p_x1_given_u.input_size() != u_size || p_x2_given_u.input_size() != u_size {
            return Err(Error::DimensionMismatch(format!(
                "|U| = {u_size} but conditional laws have {} and {} rows",
                p_x1_given_u.input_size(),
                p_x2_given_u.input_size()
            )));
        }
        Ok(InputLaw::WithAux {
            u_size,
            p_u,
            p_x1_given_u,
            p_x2_given_u,
        })
    }

    /// Independent inputs with a trivial auxiliary (`|U| = 1`).
    pub fn trivial_aux(p1: &ProbVector, p2: &ProbVector) -> Self {
        Self::with_aux(
            ProbVector::uniform(1),
            Kernel::new(vec![p1.clone()]).expect("one row"),
            Kernel::new(vec![p2.clone()]).expect("one row"),
        )
        .expect("sizes agree")
    }

    pub fn is_joint(&self) -> bool {
        matches!(self, InputLaw::Joint { .. })
    }

    pub fn x1_size(&self) -> usize {
        match self {
            InputLaw::Joint { p } => p.shape()[0],
            InputLaw::WithAux { p_x1_given_u, .. } => p_x1_given_u.output_size(),
        }
    }

    pub fn x2_size(&self) -> usize {
        match self {
            InputLaw::Joint { p } => p.shape()[1],
            InputLaw::WithAux { p_x2_given_u, .. } => p_x2_given_u.output_size(),
        }
    }

    /// Table over `U × X1 × X2` (WithAux only).
    pub fn aux_table(&self) -> Option<JointTable> {
        let InputLaw::WithAux {
            u_size,
            p_u,
            p_x1_given_u,
            p_x2_given_u,
        } = self
        else {
            return None;
        };
        let (a, b) = (p_x1_given_u.output_size(), p_x2_given_u.output_size());
        let mut probs = Vec::with_capacity(u_size * a * b);
        for u in 0..*u_size {
            for x1 in 0..a {
                for x2 in 0..b {
                    probs.push(p_u.get(u) * p_x1_given_u.prob(u, x1) * p_x2_given_u.prob(u, x2));
                }
            }
        }
        Some(JointTable::new(vec!["U", "X1", "X2"], vec![*u_size, a, b], probs).expect("factorized law is valid"))
    }

    /// `P_{X1X2}` with any auxiliary marginalized out.
    pub fn x_joint(&self) -> JointTable {
        match self {
            InputLaw::Joint { p } => p.clone(),
            InputLaw::WithAux { .. } => self
                .aux_table()
                .expect("WithAux")
                .marginal(&["X1", "X2"])
                .expect("axes exist"),
        }
    }

    /// Drops the auxiliary, returning the Joint law with the same `P_{X1X2}`.
    pub fn to_joint(&self) -> InputLaw {
        InputLaw::Joint { p: self.x_joint() }
    }

    pub fn p_x1(&self) -> ProbVector {
        self.x_joint().marginal_vector(&["X1"]).expect("X1 axis")
    }

    pub fn p_x2(&self) -> ProbVector {
        self.x_joint().marginal_vector(&["X2"]).expect("X2 axis")
    }
}

/// Encoder classes, in order of increasing cooperation apart from
/// `DegradedMessageSets` (encoder 1's message is known to both).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CribbingScenario {
    NonCooperating,
    DegradedMessageSets,
    NonCausal,
    StrictlyCausal,
    Causal,
}

impl CribbingScenario {
    pub const ALL: [CribbingScenario; 5] = [
        CribbingScenario::NonCooperating,
        CribbingScenario::DegradedMessageSets,
        CribbingScenario::NonCausal,
        CribbingScenario::StrictlyCausal,
        CribbingScenario::Causal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CribbingScenario::NonCooperating => "non-cooperating",
            CribbingScenario::DegradedMessageSets => "degraded-message-sets",
            CribbingScenario::NonCausal => "non-causal",
            CribbingScenario::StrictlyCausal => "strictly-causal",
            CribbingScenario::Causal => "causal",
        }
    }

    /// Whether the region formulas take the auxiliary-variable form.
    pub fn needs_aux(self) -> bool {
        matches!(
            self,
            CribbingScenario::NonCooperating | CribbingScenario::StrictlyCausal
        )
    }
}

impl fmt::Display for CribbingScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CribbingScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        CribbingScenario::ALL
            .into_iter()
            .find(|c| c.name() == key || (key == "degraded" && *c == CribbingScenario::DegradedMessageSets))
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }
}

/// The output statistics `Q_Z` to be approximated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetOutput {
    pub q_z: ProbVector,
}

fn check_sizes(mac: &MacChannel, law: &InputLaw) -> Result<()> {
    if law.x1_size() != mac.x1_size || law.x2_size() != mac.x2_size {
        return Err(Error::DimensionMismatch(format!(
            "law over {}x{} inputs, channel expects {}x{}",
            law.x1_size(),
            law.x2_size(),
            mac.x1_size,
            mac.x2_size
        )));
    }
    Ok(())
}

/// `Q_Z(z) = Σ P(x1,x2) W(z|x1,x2)`.
pub fn induced_output(mac: &MacChannel, law: &InputLaw) -> Result<ProbVector> {
    check_sizes(mac, law)?;
    mac.w.push_forward(&law.x_joint().to_prob_vector())
}

fn joint_with_outputs(law: &InputLaw, kernel: &Kernel, out_labels: &[&str], out_shape: &[usize]) -> JointTable {
    let (base, mut labels, mut shape) = match law.aux_table() {
        Some(t) => (t, vec!["U", "X1", "X2"], vec![]),
        None => (law.x_joint(), vec!["X1", "X2"], vec![]),
    };
    shape.extend_from_slice(base.shape());
    labels.extend_from_slice(out_labels);
    shape.extend_from_slice(out_shape);
    let pairs = law.x1_size() * law.x2_size();
    let out = kernel.output_size();
    let mut probs = Vec::with_capacity(base.probs().len() * out);
    for (i, &p) in base.probs().iter().enumerate() {
        let row = kernel.row(i % pairs);
        probs.extend(row.as_slice().iter().map(|w| p * w));
    }
    JointTable::new(labels, shape, probs).expect("joint of valid law and kernel")
}

/// Exact joint over `(U,) X1, X2, Z`.
pub fn full_joint(mac: &MacChannel, law: &InputLaw) -> Result<JointTable> {
    check_sizes(mac, law)?;
    Ok(joint_with_outputs(law, &mac.w, &["Z"], &[mac.z_size]))
}

/// Exact joint over `(U,) X1, X2, Y, Z`.
pub fn wiretap_full_joint(wmac: &WiretapMac, law: &InputLaw) -> Result<JointTable> {
    if law.x1_size() != wmac.x1_size || law.x2_size() != wmac.x2_size {
        return Err(Error::DimensionMismatch(
            "law and wiretap channel disagree on inputs".into(),
        ));
    }
    Ok(joint_with_outputs(
        law,
        &wmac.wyz,
        &["Y", "Z"],
        &[wmac.y_size, wmac.z_size],
    ))
}

/// `max_z |Q_Z(z) − target(z)| ≤ tol` (boundary accepted).
pub fn matches_target(mac: &MacChannel, law: &InputLaw, target: &TargetOutput, tol: f64) -> Result<bool> {
    let q = induced_output(mac, law)?;
    if q.len() != target.q_z.len() {
        return Err(Error::DimensionMismatch(format!(
            "target over {} symbols, channel output has {}",
            target.q_z.len(),
            q.len()
        )));
    }
    Ok(q.max_abs_diff(&target.q_z) <= tol)
}
