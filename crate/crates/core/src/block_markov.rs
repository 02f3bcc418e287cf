//! Strictly-causal block-Markov machinery and the Shannon-strategy reduction
//! for causal cribbing.
//!
//! A chain runs `B` blocks of `r` channel uses. Each block uses four
//! codebooks: a cloud `u(m0)`, Encoder 1's satellites `x1(m0, m1', m1'')`
//! and Encoder 2's satellites `x2(m0, m2)`. Part of `m1''` is recycled into
//! the next block's indices, so the two encoders coordinate through `m0`
//! without the output revealing it.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{full_joint, induced_output, InputLaw, MacChannel};
use crate::prob::{
    block_chain_terms, entropy, is_jointly_typical, kl_divergence, mutual_information, variational_distance,
    JointTable, Kernel, ProbVector, TypicalityParams,
};
use crate::region::{resolvability_from_terms, ChannelTerms, RatePoint, RegionSpec, STRICT_MARGIN};
use crate::resolvability::{check_message_guard, conditional_output, GUARD_BITS, MESSAGE_GUARD};
use crate::sampling::{derive_seed, rng_from, stream_seed};
use crate::CribbingScenario;

/// Largest exact chain table (entries).
pub const TABLE_GUARD: usize = 1 << 24;

/// Rate split of the strictly-causal construction (bits per channel use).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoAllocation {
    pub rho0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationCheck {
    pub label: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// Positive when the strict inequality holds.
    pub margin: f64,
}

impl RhoAllocation {
    /// Decodability, the four resolvability targets and the recycling
    /// condition, evaluated against the law's terms.
    pub fn checks(&self, t: &ChannelTerms) -> Vec<AllocationCheck> {
        let lt = |label, lhs: f64, rhs: f64| AllocationCheck {
            label,
            lhs,
            rhs,
            margin: rhs - lhs,
        };
        let gt = |label, lhs: f64, rhs: f64| AllocationCheck {
            label,
            lhs,
            rhs,
            margin: lhs - rhs,
        };
        vec![
            lt("rho1+rho2 < H(X1|U)", self.rho1 + self.rho2, t.h_x1_given_u),
            gt("rho0 > I(U;Z)", self.rho0, t.i_u),
            gt("rho0+rho1 > I(U,X1;Z)", self.rho0 + self.rho1, t.i_ux1),
            gt(
                "rho0+rho1+rho3 > I(X1,X2;Z)",
                self.rho0 + self.rho1 + self.rho3,
                t.i_x1x2,
            ),
            gt("rho0+rho3 > I(U,X2;Z)", self.rho0 + self.rho3, t.i_ux2),
            gt("rho2 > rho0", self.rho2, self.rho0),
        ]
    }

    pub fn validate_shape(&self) -> Result<()> {
        let rates = [self.rho0, self.rho1, self.rho2, self.rho3];
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::Config(format!(
                "rho rates must be finite and non-negative: {rates:?}"
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} not in [0,1]", self.gamma)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon {} must be positive", self.epsilon)));
        }
        Ok(())
    }

    /// Shape checks plus every strict inequality of [`Self::checks`].
    pub fn validate(&self, t: &ChannelTerms) -> Result<()> {
        self.validate_shape()?;
        if let Some(c) = self.checks(t).into_iter().find(|c| c.margin <= 0.0) {
            return Err(Error::InfeasibleLaw(format!(
                "allocation violates {}: {} vs {}",
                c.label, c.lhs, c.rhs
            )));
        }
        Ok(())
    }
}

/// The default split at slack `epsilon`. `joint` is a table over
/// `U × X1 × X2 × Z` (or `X1 × X2 × Z`, read as `|U| = 1`).
pub fn default_allocation(joint: &JointTable, epsilon: f64) -> Result<RhoAllocation> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!("epsilon {epsilon} must be positive")));
    }
    let t = ChannelTerms::from_joint(joint, "Z")?;
    let margin = t.strict_causal_margin();
    if margin <= STRICT_MARGIN || margin <= 3.0 * epsilon {
        return Err(Error::InfeasibleLaw(format!(
            "H(X1|U) − I(U,X1;Z) = {margin:.6} must exceed max(1e-9, 3ε = {})",
            3.0 * epsilon
        )));
    }
    // U is a function-free auxiliary: U − (X1,X2) − Z, so I(U,X1,X2;Z) = I(X1,X2;Z).
    if joint.axis("U").is_ok() {
        let with_u = mutual_information(joint, &["U", "X1", "X2"], &["Z"], &[])?;
        if (with_u - t.i_x1x2).abs() > 1e-9 {
            return Err(Error::InfeasibleLaw(format!(
                "I(U,X1,X2;Z) = {with_u} differs from I(X1,X2;Z) = {}",
                t.i_x1x2
            )));
        }
    }
    let alloc = RhoAllocation {
        rho0: t.i_u + epsilon,
        rho1: t.i_x1_given_u + epsilon,
        rho2: t.h_x1_given_u - t.i_x1_given_u - 2.0 * epsilon,
        rho3: t.i_x2_given_ux1 + epsilon,
        gamma: 0.5,
        epsilon,
    };
    alloc.validate(&t)?;
    Ok(alloc)
}

/// Rates of new randomness once the recycled part of `m1''` is discounted.
pub fn effective_rates(alloc: &RhoAllocation) -> RatePoint {
    let g = alloc.gamma;
    RatePoint::new(
        alloc.rho1 + (1.0 - g) * alloc.rho2 + g * alloc.rho0,
        alloc.rho3 - (1.0 - g) * (alloc.rho2 - alloc.rho0),
    )
}

/// How Encoder 2 learns `m1''` of the previous block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    /// Encoder 2 uses the true `m1''` (the idealized law `P̄`).
    #[default]
    Ideal,
    /// Encoder 2 decodes the cribbed `x1` word by strong typicality.
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub r: usize,
    pub blocks: usize,
    pub alloc: RhoAllocation,
    pub law: InputLaw,
    pub seed: u64,
    #[serde(default)]
    pub coupling: Coupling,
    pub typicality_epsilon: f64,
}

/// Index-space sizes `⌈2^{rρ}⌉` of the four codebooks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexSizes {
    pub n0: usize,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

fn count(r: usize, rho: f64) -> usize {
    let bits = r as f64 * rho;
    let nearest = bits.round();
    if (bits - nearest).abs() < 1e-9 {
        return 2f64.powf(nearest) as usize;
    }
    2f64.powf(bits).ceil() as usize
}

fn floor_count(bits: f64) -> usize {
    (2f64.powf(bits) + 1e-9).floor().max(1.0) as usize
}

impl BlockConfig {
    pub fn sizes(&self) -> IndexSizes {
        let a = &self.alloc;
        IndexSizes {
            n0: count(self.r, a.rho0),
            n1: count(self.r, a.rho1),
            n2: count(self.r, a.rho2),
            n3: count(self.r, a.rho3),
        }
    }

    pub fn validate(&self, mac: &MacChannel) -> Result<()> {
        if self.r == 0 || self.blocks == 0 {
            return Err(Error::Config("r and B must be at least 1".into()));
        }
        self.alloc.validate_shape()?;
        TypicalityParams::new(self.typicality_epsilon, self.r)?;
        let InputLaw::WithAux { .. } = &self.law else {
            return Err(Error::LawVariant {
                scenario: CribbingScenario::StrictlyCausal.name().into(),
                reason: "block-Markov codebooks need a WithAux law".into(),
            });
        };
        if self.law.x1_size() != mac.x1_size || self.law.x2_size() != mac.x2_size {
            return Err(Error::DimensionMismatch(
                "law and channel input alphabets differ".into(),
            ));
        }
        let bits = (self.r * self.blocks) as f64 * (mac.z_size as f64).log2();
        if bits > GUARD_BITS {
            return Err(Error::GuardExceeded(format!(
                "r·B·log2|Z| = {bits:.1} exceeds {GUARD_BITS}"
            )));
        }
        let s = self.sizes();
        check_message_guard(s.n0.saturating_mul(s.n1).saturating_mul(s.n2))?;
        check_message_guard(s.n0.saturating_mul(s.n3))?;
        Ok(())
    }
}

/// Codebooks of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCodebook {
    pub u_words: Vec<Vec<usize>>,
    /// `[m0][m1'][m1'']`.
    pub x1_words: Vec<Vec<Vec<Vec<usize>>>>,
    /// `[m0][m2]`.
    pub x2_words: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCodebooks {
    pub sizes: IndexSizes,
    pub blocks: Vec<BlockCodebook>,
}

fn sampler(p: &ProbVector) -> WeightedIndex<f64> {
    WeightedIndex::new(p.as_slice().iter().copied()).expect("valid probability vector")
}

fn draw<R: Rng + ?Sized>(rng: &mut R, given: &[usize], d: &[WeightedIndex<f64>]) -> Vec<usize> {
    given.iter().map(|&g| d[g].sample(rng)).collect()
}

/// Fresh codebooks for every block; block `b` draws from seeds derived from
/// `(seed, b)`.
pub fn build_block_codebooks(cfg: &BlockConfig, mac: &MacChannel) -> Result<BlockCodebooks> {
    cfg.validate(mac)?;
    let InputLaw::WithAux {
        p_u,
        p_x1_given_u,
        p_x2_given_u,
        ..
    } = &cfg.law
    else {
        unreachable!("validated above")
    };
    let sizes = cfg.sizes();
    let du = sampler(p_u);
    let d1: Vec<_> = p_x1_given_u.rows().iter().map(sampler).collect();
    let d2: Vec<_> = p_x2_given_u.rows().iter().map(sampler).collect();
    let blocks = (0..cfg.blocks)
        .map(|b| {
            let block_seed = derive_seed(cfg.seed, b as u64);
            let mut ru = rng_from(stream_seed(block_seed, "u"));
            let mut r1 = rng_from(stream_seed(block_seed, "x1"));
            let mut r2 = rng_from(stream_seed(block_seed, "x2"));
            let u_words: Vec<Vec<usize>> = (0..sizes.n0)
                .map(|_| (0..cfg.r).map(|_| du.sample(&mut ru)).collect())
                .collect();
            let x1_words = u_words
                .iter()
                .map(|u| {
                    (0..sizes.n1)
                        .map(|_| (0..sizes.n2).map(|_| draw(&mut r1, u, &d1)).collect())
                        .collect()
                })
                .collect();
            let x2_words = u_words
                .iter()
                .map(|u| (0..sizes.n3).map(|_| draw(&mut r2, u, &d2)).collect())
                .collect();
            BlockCodebook {
                u_words,
                x1_words,
                x2_words,
            }
        })
        .collect();
    Ok(BlockCodebooks { sizes, blocks })
}

/// Mixed-radix split of `m1''` into the next block's `m0` and the digits
/// recycled into `m1'` and `m2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecyclingMap {
    pub n0: usize,
    /// Values recycled into `m1'` (`⌊2^{rγ(ρ2−ρ0)}⌋`, at most `n1`).
    pub c1: usize,
    /// Values recycled into `m2` (`⌊2^{r(1−γ)(ρ2−ρ0)}⌋`, at most `n3`).
    pub c2: usize,
    pub fresh1: usize,
    pub fresh2: usize,
    /// `log2 n2 − log2 n0 − log2 c1 − log2 c2`: bits of `m1''` left unused
    /// (negative when the fields wrap).
    pub residue_bits: f64,
    pub recycled_bits: f64,
}

impl RecyclingMap {
    pub fn new(cfg: &BlockConfig) -> Self {
        let s = cfg.sizes();
        let a = &cfg.alloc;
        let spare = cfg.r as f64 * (a.rho2 - a.rho0).max(0.0);
        let c1 = floor_count(a.gamma * spare).min(s.n1);
        let c2 = floor_count((1.0 - a.gamma) * spare).min(s.n3);
        let log = |x: usize| (x as f64).log2();
        Self {
            n0: s.n0,
            c1,
            c2,
            fresh1: s.n1.div_ceil(c1),
            fresh2: s.n3.div_ceil(c2),
            residue_bits: log(s.n2) - log(s.n0) - log(c1) - log(c2),
            recycled_bits: log(c1) + log(c2),
        }
    }

    /// `(m0 of the next block, digit for m1', digit for m2)`.
    pub fn split(&self, m1pp: usize) -> (usize, usize, usize) {
        let rest = m1pp / self.n0;
        (m1pp % self.n0, rest % self.c1, (rest / self.c1) % self.c2)
    }
}

/// Encoder 2's cribbing decoder for one block: the unique `m1''` whose word
/// (in the book of its own `m0` estimate) equals the observed `x1` word and
/// is jointly typical with the cloud word; `None` declares an error.
struct CribDecoder {
    table: Vec<HashMap<Vec<usize>, Option<usize>>>,
}

impl CribDecoder {
    fn new(book: &BlockCodebook, ux1: &JointTable, params: &TypicalityParams) -> Result<Self> {
        let mut table = Vec::with_capacity(book.u_words.len());
        for (m0, u) in book.u_words.iter().enumerate() {
            let mut cands: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
            for row in &book.x1_words[m0] {
                for (m1pp, w) in row.iter().enumerate() {
                    cands.entry(w.clone()).or_default().push(m1pp);
                }
            }
            let mut map = HashMap::new();
            for (w, list) in cands {
                let typical = is_jointly_typical(&[u, &w], ux1, params)?;
                map.insert(w, (typical && list.len() == 1).then(|| list[0]));
            }
            table.push(map);
        }
        Ok(Self { table })
    }

    fn decode(&self, m0_hat: usize, word: &[usize]) -> Option<usize> {
        self.table[m0_hat].get(word).copied().flatten()
    }
}

/// Per-block distribution of `(m1'', m̂1'', z-block)` given the previous
/// block's `(m1'', m̂1'')`, flattened as `(m1''·n2 + m̂1'')·|Z|^r + z`.
fn block_kernel(
    cfg: &BlockConfig,
    mac: &MacChannel,
    book: &BlockCodebook,
    rec: &RecyclingMap,
    decoder: Option<&CribDecoder>,
    prev: Option<(usize, usize)>,
) -> (Vec<f64>, f64) {
    let s = cfg.sizes();
    let zr = mac.z_size.pow(cfg.r as u32);
    let mut out = vec![0.0; s.n2 * s.n2 * zr];
    let mut failures = 0.0;
    // Block 1: m0 from shared randomness, everything else fresh.
    let starts: Vec<(f64, usize, usize, usize, usize, usize, usize)> = match prev {
        None => (0..s.n0).map(|m0| (1.0 / s.n0 as f64, m0, m0, 0, 1, 0, 1)).collect(),
        Some((a, a_hat)) => {
            let (m0, d1, _) = rec.split(a);
            let (m0_hat, _, d2) = rec.split(a_hat);
            vec![(1.0, m0, m0_hat, d1, rec.c1, d2, rec.c2)]
        }
    };
    for (w0, m0, m0_hat, d1, c1, d2, c2) in starts {
        let f1 = s.n1.div_ceil(c1);
        let f2 = s.n3.div_ceil(c2);
        let w = w0 / (f1 * s.n2 * f2) as f64;
        for k1 in 0..f1 {
            let m1p = (d1 + c1 * k1) % s.n1;
            for m1pp in 0..s.n2 {
                let x1 = &book.x1_words[m0][m1p][m1pp];
                let est = match decoder {
                    None => m1pp,
                    Some(dec) => match dec.decode(m0_hat, x1) {
                        Some(e) => e,
                        None => {
                            failures += w * f2 as f64;
                            0
                        }
                    },
                };
                for k2 in 0..f2 {
                    let m2 = (d2 + c2 * k2) % s.n3;
                    let x2 = &book.x2_words[m0_hat][m2];
                    let base = (m1pp * s.n2 + est) * zr;
                    for (z, p) in conditional_output(mac, x1, x2).into_iter().enumerate() {
                        out[base + z] += w * p;
                    }
                }
            }
        }
    }
    (out, failures)
}

/// Exact law of one chain run, axes `Mpp{b}`, `Mhat{b}`, `Z{b}` per block
/// (1-based), plus the probability that the cribbing decoder declared an
/// error in each block.
fn exact_chain(
    cfg: &BlockConfig,
    mac: &MacChannel,
    books: &BlockCodebooks,
    coupling: Coupling,
) -> Result<(JointTable, Vec<f64>)> {
    let s = books.sizes;
    let zr = mac.z_size.pow(cfg.r as u32);
    let per_block = s.n2 * s.n2 * zr;
    let total = (per_block as f64).powi(cfg.blocks as i32);
    if total > TABLE_GUARD as f64 {
        return Err(Error::GuardExceeded(format!(
            "exact chain table would hold {total:e} entries (limit {TABLE_GUARD})"
        )));
    }
    let rec = RecyclingMap::new(cfg);
    let ux1 = cfg.law.aux_table().expect("validated WithAux").marginal(&["U", "X1"])?;
    let params = TypicalityParams::new(cfg.typicality_epsilon, cfg.r)?;
    let decoders: Vec<Option<CribDecoder>> = books
        .blocks
        .iter()
        .map(|b| match coupling {
            Coupling::Ideal => Ok(None),
            Coupling::Estimated => CribDecoder::new(b, &ux1, &params).map(Some),
        })
        .collect::<Result<_>>()?;

    let (mut probs, f0) = block_kernel(cfg, mac, &books.blocks[0], &rec, decoders[0].as_ref(), None);
    let mut failures = vec![f0];
    for b in 1..cfg.blocks {
        let book = &books.blocks[b];
        let dec = decoders[b].as_ref();
        let kernels: Vec<(Vec<f64>, f64)> = (0..s.n2 * s.n2)
            .into_par_iter()
            .map(|st| block_kernel(cfg, mac, book, &rec, dec, Some((st / s.n2, st % s.n2))))
            .collect();
        let mut next = vec![0.0; probs.len() * per_block];
        let mut fail = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let st = (i % per_block) / zr;
            let (k, f) = &kernels[st];
            fail += p * f;
            let dst = &mut next[i * per_block..(i + 1) * per_block];
            dst.iter_mut().zip(k).for_each(|(d, kv)| *d = p * kv);
        }
        failures.push(fail);
        probs = next;
    }
    let mut labels = Vec::new();
    let mut shape = Vec::new();
    for b in 1..=cfg.blocks {
        labels.extend([format!("Mpp{b}"), format!("Mhat{b}"), format!("Z{b}")]);
        shape.extend([s.n2, s.n2, zr]);
    }
    let sum: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= sum);
    Ok((JointTable::new(labels, shape, probs)?, failures))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovRow {
    pub block: usize,
    /// `I(Z_b; Z_{b+1..B})`.
    pub lhs: f64,
    /// `I(Z_b; M1''_b, M̂1''_b)`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingRow {
    pub block: usize,
    /// `V(P_{Z_b M1''_b}, P̄_{Z_b M1''_b})`.
    pub distance: f64,
    /// `2·P(M1''_{b−1} ≠ M̂1''_{b−1})`.
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub r: usize,
    pub blocks: usize,
    pub seed: u64,
    pub coupling: Coupling,
    pub alloc: RhoAllocation,
    pub sizes: IndexSizes,
    pub recycling: RecyclingMap,
    pub effective: RatePoint,
    pub total_kl: f64,
    pub per_block_kl: Vec<f64>,
    pub cross_mi: Vec<f64>,
    pub chain_residual: f64,
    pub markov: Vec<MarkovRow>,
    /// `D(P_{Z_b M1''_b} ‖ Q^{⊗r} P_{M1''_b})` per block.
    pub secrecy_terms: Vec<f64>,
    /// `P(M1''_b ≠ M̂1''_b)` per block.
    pub p_error: Vec<f64>,
    /// Probability that the decoder declared an error (empty or ambiguous
    /// list) per block.
    pub decoder_failure: Vec<f64>,
    /// `Σ_b secrecy term + Σ_{b<B} H(M̂1''_b | M1''_b)`; bounds `total_kl`.
    pub chain_bound: f64,
    /// Same with the conditional entropies replaced by Fano's bound.
    pub fano_bound: f64,
    /// Present for the estimated coupling.
    pub coupling_gap: Option<Vec<CouplingRow>>,
    #[serde(skip)]
    pub joint: JointTable,
}

fn binary_entropy(p: f64) -> f64 {
    entropy(&ProbVector::new(vec![p.clamp(0.0, 1.0), 1.0 - p.clamp(0.0, 1.0)]).expect("two-point law"))
}

fn block_secrecy_term(joint: &JointTable, b: usize, q_block: &ProbVector) -> Result<f64> {
    let mz = joint.marginal_vector(&[&format!("Mpp{b}"), &format!("Z{b}")])?;
    let m = joint.marginal_vector(&[&format!("Mpp{b}")])?;
    let product: Vec<f64> = m
        .as_slice()
        .iter()
        .flat_map(|pm| q_block.as_slice().iter().map(move |qz| pm * qz))
        .collect();
    kl_divergence(&mz, &ProbVector::new(product)?)
}

fn error_prob(joint: &JointTable, b: usize) -> Result<f64> {
    let t = joint.marginal(&[&format!("Mpp{b}"), &format!("Mhat{b}")])?;
    let n = t.shape()[0];
    Ok((0..n)
        .flat_map(|a| (0..n).filter(move |&e| e != a).map(move |e| (a, e)))
        .map(|(a, e)| t.get(&[a, e]))
        .sum())
}

fn analyze(
    cfg: &BlockConfig,
    mac: &MacChannel,
    books: &BlockCodebooks,
    joint: JointTable,
    failures: Vec<f64>,
    coupling: Coupling,
) -> Result<ChainReport> {
    let q = induced_output(mac, &cfg.law)?;
    let q_block = q.power(cfg.r);
    let z_labels: Vec<String> = (1..=cfg.blocks).map(|b| format!("Z{b}")).collect();
    let z_refs: Vec<&str> = z_labels.iter().map(String::as_str).collect();
    let pz = joint.marginal_vector(&z_refs)?;
    let chain = block_chain_terms(&pz, &q, cfg.r, cfg.blocks)?;
    let mut markov = Vec::new();
    let mut secrecy_terms = Vec::new();
    let mut p_error = Vec::new();
    let mut h_cond = 0.0;
    let mut fano = 0.0;
    for b in 1..=cfg.blocks {
        secrecy_terms.push(block_secrecy_term(&joint, b, &q_block)?);
        let pe = error_prob(&joint, b)?;
        p_error.push(pe);
        if b < cfg.blocks {
            let (mpp, mhat) = (format!("Mpp{b}"), format!("Mhat{b}"));
            let rhs = mutual_information(&joint, &[&z_labels[b - 1]], &[&mpp, &mhat], &[])?;
            markov.push(MarkovRow {
                block: b,
                lhs: chain.cross_mi[b - 1],
                rhs,
            });
            h_cond += joint.conditional_entropy(&[&mhat], &[&mpp])?;
            fano += binary_entropy(pe) + pe * ((books.sizes.n2.max(2) - 1) as f64).log2();
        }
    }
    let base: f64 = secrecy_terms.iter().sum();
    Ok(ChainReport {
        r: cfg.r,
        blocks: cfg.blocks,
        seed: cfg.seed,
        coupling,
        alloc: cfg.alloc,
        sizes: books.sizes,
        recycling: RecyclingMap::new(cfg),
        effective: effective_rates(&cfg.alloc),
        total_kl: chain.total_kl,
        chain_residual: chain.residual(),
        per_block_kl: chain.per_block_kl,
        cross_mi: chain.cross_mi,
        markov,
        secrecy_terms,
        p_error,
        decoder_failure: failures,
        chain_bound: base + h_cond,
        fano_bound: base + fano,
        coupling_gap: None,
        joint,
    })
}

/// Exact chained law and its diagnostics. With the estimated coupling the
/// idealized run is computed as well and the per-block coupling gap is
/// reported.
pub fn simulate_chain(cfg: &BlockConfig, mac: &MacChannel) -> Result<ChainReport> {
    let books = build_block_codebooks(cfg, mac)?;
    let (joint, fail) = exact_chain(cfg, mac, &books, cfg.coupling)?;
    let mut report = analyze(cfg, mac, &books, joint, fail, cfg.coupling)?;
    if cfg.coupling == Coupling::Estimated {
        let (ideal, _) = exact_chain(cfg, mac, &books, Coupling::Ideal)?;
        let mut rows = Vec::new();
        for b in 2..=cfg.blocks {
            let keep = [format!("Mpp{b}"), format!("Z{b}")];
            let keep: Vec<&str> = keep.iter().map(String::as_str).collect();
            let p = report.joint.marginal_vector(&keep)?;
            let pbar = ideal.marginal_vector(&keep)?;
            rows.push(CouplingRow {
                block: b,
                distance: variational_distance(&p, &pbar),
                bound: 2.0 * report.p_error[b - 2],
            });
        }
        report.coupling_gap = Some(rows);
    }
    Ok(report)
}

/// Independent chain replicas (codebooks re-drawn with seeds derived from
/// `cfg.seed`), computed in parallel; order follows the replica index.
pub fn chain_replicas(cfg: &BlockConfig, mac: &MacChannel, replicas: usize) -> Result<Vec<ChainReport>> {
    (0..replicas)
        .into_par_iter()
        .map(|k| {
            let c = BlockConfig {
                seed: derive_seed(cfg.seed, k as u64),
                ..cfg.clone()
            };
            simulate_chain(&c, mac)
        })
        .collect()
}

/// Indices used by one block of a sampled trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockMessages {
    pub m0: usize,
    pub m0_hat: usize,
    pub m1p: usize,
    pub m1pp: usize,
    pub m1pp_hat: usize,
    pub m2: usize,
    pub decoder_failed: bool,
}

/// Monte Carlo summary for chains too large for exact analysis. Every field
/// is a sample estimate.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryEstimate {
    pub estimate: bool,
    pub trajectories: usize,
    pub shared_seed: u64,
    /// Empirical `P(M1''_b ≠ M̂1''_b)`.
    pub p_error: Vec<f64>,
    /// Variational distance between the pooled per-letter output type of
    /// block `b` and `Q_Z`.
    pub letter_distance: Vec<f64>,
}

fn sample_trajectory(
    cfg: &BlockConfig,
    mac: &MacChannel,
    books: &BlockCodebooks,
    rec: &RecyclingMap,
    decoders: &[CribDecoder],
    shared_m0: usize,
    seed: u64,
) -> (Vec<BlockMessages>, Vec<Vec<usize>>) {
    let s = books.sizes;
    let mut rng = rng_from(seed);
    let channel: Vec<WeightedIndex<f64>> = mac.w.rows().iter().map(sampler).collect();
    let mut msgs = Vec::with_capacity(cfg.blocks);
    let mut outputs = Vec::with_capacity(cfg.blocks);
    let mut state = (shared_m0, shared_m0, 0, 1, 0, 1);
    for (b, book) in books.blocks.iter().enumerate() {
        let (m0, m0_hat, d1, c1, d2, c2) = state;
        let m1p = (d1 + c1 * rng.random_range(0..s.n1.div_ceil(c1))) % s.n1;
        let m1pp = rng.random_range(0..s.n2);
        let m2 = (d2 + c2 * rng.random_range(0..s.n3.div_ceil(c2))) % s.n3;
        let x1 = &book.x1_words[m0][m1p][m1pp];
        let x2 = &book.x2_words[m0_hat][m2];
        let z: Vec<usize> = x1
            .iter()
            .zip(x2)
            .map(|(&a, &c)| channel[mac.pair_index(a, c)].sample(&mut rng))
            .collect();
        let (m1pp_hat, failed) = match cfg.coupling {
            Coupling::Ideal => (m1pp, false),
            Coupling::Estimated => match decoders[b].decode(m0_hat, x1) {
                Some(e) => (e, false),
                None => (0, true),
            },
        };
        msgs.push(BlockMessages {
            m0,
            m0_hat,
            m1p,
            m1pp,
            m1pp_hat,
            m2,
            decoder_failed: failed,
        });
        outputs.push(z);
        let (n0, nd1, _) = rec.split(m1pp);
        let (n0_hat, _, nd2) = rec.split(m1pp_hat);
        state = (n0, n0_hat, nd1, rec.c1, nd2, rec.c2);
    }
    (msgs, outputs)
}

/// Samples `trajectories` independent chain runs over one codebook draw.
/// The block-1 cloud index comes from the shared-randomness stream.
pub fn sample_chain(cfg: &BlockConfig, mac: &MacChannel, trajectories: usize) -> Result<TrajectoryEstimate> {
    if trajectories == 0 {
        return Err(Error::Config("at least one trajectory is required".into()));
    }
    let books = build_block_codebooks(cfg, mac)?;
    let rec = RecyclingMap::new(cfg);
    let ux1 = cfg.law.aux_table().expect("validated WithAux").marginal(&["U", "X1"])?;
    let params = TypicalityParams::new(cfg.typicality_epsilon, cfg.r)?;
    let decoders: Vec<CribDecoder> = match cfg.coupling {
        Coupling::Ideal => Vec::new(),
        Coupling::Estimated => books
            .blocks
            .iter()
            .map(|b| CribDecoder::new(b, &ux1, &params))
            .collect::<Result<_>>()?,
    };
    let shared_seed = stream_seed(cfg.seed, "shared");
    let traj_seed = stream_seed(cfg.seed, "trajectory");
    let runs: Vec<_> = (0..trajectories)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(traj_seed, k as u64);
            let m0 = rng_from(derive_seed(shared_seed, k as u64)).random_range(0..books.sizes.n0);
            sample_trajectory(cfg, mac, &books, &rec, &decoders, m0, seed)
        })
        .collect();
    let q = induced_output(mac, &cfg.law)?;
    let mut p_error = Vec::new();
    let mut letter_distance = Vec::new();
    for b in 0..cfg.blocks {
        let errs = runs.iter().filter(|(m, _)| m[b].m1pp != m[b].m1pp_hat).count();
        p_error.push(errs as f64 / trajectories as f64);
        let mut counts = vec![0.0; mac.z_size];
        runs.iter().flat_map(|(_, z)| &z[b]).for_each(|&s| counts[s] += 1.0);
        letter_distance.push(variational_distance(&ProbVector::from_weights(counts)?, &q));
    }
    Ok(TrajectoryEstimate {
        estimate: true,
        trajectories,
        shared_seed,
        p_error,
        letter_distance,
    })
}

/// Image `t(x1)` of strategy index `t` (little-endian digits in base `|X2|`).
pub fn strategy_image(t: usize, x1: usize, x2_size: usize) -> usize {
    (t / x2_size.pow(x1 as u32)) % x2_size
}

fn strategy_count(x1_size: usize, x2_size: usize) -> Result<usize> {
    x2_size
        .checked_pow(x1_size as u32)
        .filter(|&c| c <= MESSAGE_GUARD)
        .ok_or_else(|| Error::GuardExceeded(format!("|X2|^|X1| = {x2_size}^{x1_size} strategies")))
}

/// Product decomposition `P(x1)P(t)` of a joint law over `X1 × X2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShannonStrategies {
    pub x1_size: usize,
    pub x2_size: usize,
    pub p_x1: ProbVector,
    pub p_t: ProbVector,
    /// `table[t][x1] = t(x1)`.
    pub table: Vec<Vec<usize>>,
}

impl ShannonStrategies {
    /// Decomposition with the strategy domain restricted to the support of
    /// `P(x1)`: symbols of zero mass always map to `0` (they are never sent).
    pub fn on_support(pstar: &JointTable) -> Result<Self> {
        Self::build(pstar, true)
    }

    fn build(pstar: &JointTable, restrict: bool) -> Result<Self> {
        if pstar.labels() != ["X1", "X2"] {
            return Err(Error::Axis(format!("expected axes [X1, X2], got {:?}", pstar.labels())));
        }
        let (a, b) = (pstar.shape()[0], pstar.shape()[1]);
        let p_x1 = pstar.marginal_vector(&["X1"])?;
        if let Some(x) = (0..a).find(|&x| p_x1.get(x) == 0.0) {
            if !restrict {
                return Err(Error::ZeroMarginal { symbol: x });
            }
        }
        let count = strategy_count(a, b)?;
        let table: Vec<Vec<usize>> = (0..count)
            .map(|t| (0..a).map(|x| strategy_image(t, x, b)).collect())
            .collect();
        let probs = table
            .iter()
            .map(|img| {
                (0..a)
                    .map(|x| {
                        let px = p_x1.get(x);
                        if px == 0.0 {
                            f64::from(u8::from(img[x] == 0))
                        } else {
                            pstar.get(&[x, img[x]]) / px
                        }
                    })
                    .product()
            })
            .collect();
        Ok(Self {
            x1_size: a,
            x2_size: b,
            p_x1,
            p_t: ProbVector::from_weights(probs)?,
            table,
        })
    }

    /// Channel `W⁺(z | x1, t) = W(z | x1, t(x1))` over inputs `X1 × T`.
    pub fn strategy_channel(&self, mac: &MacChannel) -> Result<MacChannel> {
        let rows = (0..self.x1_size)
            .flat_map(|x| self.table.iter().map(move |img| mac.row(x, img[x]).clone()))
            .collect();
        MacChannel::new(self.x1_size, self.table.len(), mac.z_size, Kernel::new(rows)?)
    }

    pub fn reconstruct(&self) -> JointTable {
        reconstruct_with(&self.p_x1, &self.p_t, &self.table, self.x2_size)
    }
}

fn reconstruct_with(p_x1: &ProbVector, p_t: &ProbVector, table: &[Vec<usize>], x2_size: usize) -> JointTable {
    let a = p_x1.len();
    let mut probs = vec![0.0; a * x2_size];
    for (t, img) in table.iter().enumerate() {
        for x in 0..a {
            probs[x * x2_size + img[x]] += p_x1.get(x) * p_t.get(t);
        }
    }
    JointTable::new(vec!["X1", "X2"], vec![a, x2_size], probs).expect("product of valid laws")
}

/// `(P(x1), P(t))` with `P(t) = Π_{x1} P*(x1, t(x1)) / P(x1)`. Requires full
/// support of `P(x1)`.
pub fn shannon_strategy_decompose(pstar: &JointTable) -> Result<(ProbVector, ProbVector)> {
    let s = ShannonStrategies::build(pstar, false)?;
    Ok((s.p_x1, s.p_t))
}

/// `P*(x1, x2) = P(x1) Σ_{t: t(x1) = x2} P(t)`.
pub fn reconstruct(p_x1: &ProbVector, p_t: &ProbVector, x2_size: usize) -> Result<JointTable> {
    let count = strategy_count(p_x1.len(), x2_size)?;
    if p_t.len() != count {
        return Err(Error::DimensionMismatch(format!(
            "{} strategy probabilities for {count} strategies",
            p_t.len()
        )));
    }
    let table: Vec<Vec<usize>> = (0..count)
        .map(|t| (0..p_x1.len()).map(|x| strategy_image(t, x, x2_size)).collect())
        .collect();
    Ok(reconstruct_with(p_x1, p_t, &table, x2_size))
}

#[derive(Debug, Clone)]
pub struct StrategyRegion {
    pub region: RegionSpec,
    /// `H(X1|Z) = 0`: the strict inner-bound condition fails and the
    /// extremal scheme is the one that applies.
    pub extremal: bool,
    pub h_x1_given_z: f64,
}

/// Causal region through the strategy channel: the strictly-causal formulas
/// applied to `W⁺` with the product law `P(x1)P(t)` and a constant
/// auxiliary.
pub fn causal_region_via_strategy(mac: &MacChannel, law: &InputLaw) -> Result<StrategyRegion> {
    if !law.is_joint() {
        return Err(Error::LawVariant {
            scenario: CribbingScenario::Causal.name().into(),
            reason: "requires a Joint law".into(),
        });
    }
    let strategies = ShannonStrategies::on_support(&law.x_joint())?;
    let plus = strategies.strategy_channel(mac)?;
    let product = InputLaw::product(&strategies.p_x1, &strategies.p_t);
    let t = ChannelTerms::from_joint(&full_joint(&plus, &product)?, "Z")?;
    let margin = t.strict_causal_margin();
    let mut region = resolvability_from_terms(&t, CribbingScenario::StrictlyCausal).as_outer_bound();
    region.scenario = CribbingScenario::Causal;
    Ok(StrategyRegion {
        region,
        extremal: margin <= STRICT_MARGIN,
        h_x1_given_z: margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::resolvability_thresholds;
    use crate::sampling::{random_joint_law, random_mac};

    fn xor_cfg(r: usize, blocks: usize, coupling: Coupling) -> (BlockConfig, MacChannel) {
        let mac = MacChannel::xor();
        let law = InputLaw::trivial_aux(&ProbVector::uniform(2), &ProbVector::uniform(2));
        let alloc = default_allocation(&full_joint(&mac, &law).unwrap(), 0.1).unwrap();
        let cfg = BlockConfig {
            r,
            blocks,
            alloc,
            law,
            seed: 5,
            coupling,
            typicality_epsilon: 0.5,
        };
        (cfg, mac)
    }

    #[test]
    fn xor_default_allocation() {
        let (cfg, _) = xor_cfg(2, 2, Coupling::Ideal);
        let a = cfg.alloc;
        assert!((a.rho0 - 0.1).abs() < 1e-12);
        assert!((a.rho1 - 0.1).abs() < 1e-12);
        assert!((a.rho2 - 0.8).abs() < 1e-12);
        assert!((a.rho3 - 1.1).abs() < 1e-12);
    }

    #[test]
    fn noiseless_crib_is_infeasible() {
        let mac = MacChannel::deterministic(2, 2, 2, |x1, _| x1).unwrap();
        let law = InputLaw::trivial_aux(&ProbVector::uniform(2), &ProbVector::uniform(2));
        let err = default_allocation(&full_joint(&mac, &law).unwrap(), 0.01).unwrap_err();
        assert!(matches!(err, Error::InfeasibleLaw(_)));
    }

    #[test]
    fn effective_rate_sum_ignores_gamma() {
        let (cfg, _) = xor_cfg(2, 2, Coupling::Ideal);
        let a = cfg.alloc;
        let sums: Vec<f64> = [0.0, 0.3, 1.0]
            .iter()
            .map(|&gamma| effective_rates(&RhoAllocation { gamma, ..a }).sum())
            .collect();
        assert!(sums.iter().all(|s| (s - sums[0]).abs() < 1e-12));
    }

    #[test]
    fn chain_identities_hold() {
        for coupling in [Coupling::Ideal, Coupling::Estimated] {
            let (cfg, mac) = xor_cfg(2, 2, coupling);
            let rep = simulate_chain(&cfg, &mac).unwrap();
            assert!(rep.chain_residual.abs() < 1e-9);
            for m in &rep.markov {
                assert!(m.lhs <= m.rhs + 1e-9, "{m:?}");
            }
            assert!(rep.total_kl <= rep.chain_bound + 1e-9);
            if let Some(rows) = &rep.coupling_gap {
                for row in rows {
                    assert!(row.distance <= row.bound + 1e-9, "{row:?}");
                }
            }
        }
    }

    #[test]
    fn constant_channel_chain_is_exact() {
        let (mut cfg, _) = xor_cfg(2, 2, Coupling::Estimated);
        let mac = MacChannel::constant(2, 2, &ProbVector::new(vec![0.3, 0.7]).unwrap());
        cfg.alloc.rho0 = 0.5;
        let rep = simulate_chain(&cfg, &mac).unwrap();
        assert!(rep.total_kl.abs() < 1e-12);
        assert!(rep.per_block_kl.iter().chain(&rep.cross_mi).all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn sampled_chain_is_flagged() {
        let (cfg, mac) = xor_cfg(4, 3, Coupling::Estimated);
        let est = sample_chain(&cfg, &mac, 50).unwrap();
        assert!(est.estimate);
        assert_eq!(est.p_error.len(), 3);
    }

    #[test]
    fn strategy_round_trip() {
        let mut rng = rng_from(3);
        for _ in 0..100 {
            let law = random_joint_law(&mut rng, 2, 2);
            let (p1, pt) = shannon_strategy_decompose(&law.x_joint()).unwrap();
            let back = reconstruct(&p1, &pt, 2).unwrap();
            let err = back
                .probs()
                .iter()
                .zip(law.x_joint().probs())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-12);
        }
    }

    #[test]
    fn identity_coupling_is_one_strategy() {
        let law = InputLaw::joint(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let (_, pt) = shannon_strategy_decompose(&law.x_joint()).unwrap();
        // t = 2 maps 0 → 0 and 1 → 1.
        assert_eq!(pt.as_slice(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn zero_marginal_is_reported() {
        let law = InputLaw::joint(2, 2, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(
            shannon_strategy_decompose(&law.x_joint()),
            Err(Error::ZeroMarginal { symbol: 1 })
        ));
        assert!(ShannonStrategies::on_support(&law.x_joint()).is_ok());
    }

    #[test]
    fn strategy_region_matches_noncausal() {
        let mut rng = rng_from(9);
        for _ in 0..30 {
            let mac = random_mac(&mut rng, 2, 2, 2);
            let law = random_joint_law(&mut rng, 2, 2);
            let via = causal_region_via_strategy(&mac, &law).unwrap();
            let direct = resolvability_thresholds(&mac, &law, CribbingScenario::NonCausal).unwrap();
            assert!(via.region.max_threshold_diff(&direct).unwrap() < 1e-12);
        }
        let pair = MacChannel::deterministic(2, 2, 4, |a, b| 2 * a + b).unwrap();
        let via = causal_region_via_strategy(&pair, &InputLaw::uniform(2, 2)).unwrap();
        assert!(via.extremal);
    }
}
