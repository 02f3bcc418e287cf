//! Wiretap codes for the cribbing MAC: secret messages plus uniform dither
//! indices, typicality decoding at the legitimate receiver, and exact
//! leakage `I(M1, M2; Z^n)` at the eavesdropper.
//!
//! Single-block scenarios reuse the resolvability codebooks with the
//! (message, dither) pair folded into one index. The strictly-causal code is
//! block-Markov: the cloud of block `b+1` is the full satellite tuple
//! `(m1, m1', m1'')` of block `b`, decoded backward by the receiver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{induced_output, wiretap_full_joint, CribbingScenario, InputLaw, MacChannel, WiretapMac};
use crate::prob::{is_jointly_typical, kl_divergence, JointTable, ProbVector, TypicalityParams};
use crate::region::{secrecy_region, PreEliminationSystem, RatePoint, SecrecyTerms};
use crate::resolvability::{
    check_message_guard, check_sequence_guard, conditional_output, leakage_and_bound, message_count,
    sample_codebook_with_counts, Codebook, CodebookConfig,
};
use crate::sampling::{derive_seed, rng_from, stream_seed};

/// Largest `(candidates × |Y|^n)` product a decision table may enumerate.
pub const DECISION_GUARD: usize = 1 << 24;

/// Dither (local randomness) rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dither {
    /// `(R1', R2')` of the single-block codes.
    Layered { r1p: f64, r2p: f64 },
    /// `(ρ1', ρ1'', ρ2)` of the block-Markov code.
    StrictlyCausal { rho1p: f64, rho1pp: f64, rho2: f64 },
}

impl Dither {
    /// Dither rates as `(Encoder 1 total, Encoder 2)`.
    pub fn totals(&self) -> (f64, f64) {
        match *self {
            Dither::Layered { r1p, r2p } => (r1p, r2p),
            Dither::StrictlyCausal { rho1p, rho1pp, rho2 } => (rho1p + rho1pp, rho2),
        }
    }

    fn rates(&self) -> Vec<f64> {
        match *self {
            Dither::Layered { r1p, r2p } => vec![r1p, r2p],
            Dither::StrictlyCausal { rho1p, rho1pp, rho2 } => vec![rho1p, rho1pp, rho2],
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecrecyCodeConfig {
    pub scenario: CribbingScenario,
    /// Block length (per-block length `r` for the strictly-causal code).
    pub n: usize,
    #[serde(default = "one")]
    pub blocks: usize,
    pub r1: f64,
    pub r2: f64,
    pub dither: Dither,
    pub law: InputLaw,
    pub seed: u64,
    pub typicality_epsilon: f64,
}

/// Index-set sizes `⌈2^{nR}⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexCounts {
    pub m1: usize,
    /// Encoder 1 dither sets (`[R1']` or `[ρ1', ρ1'']`).
    pub d1: [usize; 2],
    pub m2: usize,
    pub d2: usize,
}

impl IndexCounts {
    pub fn x1_tuples(&self) -> usize {
        self.m1 * self.d1[0] * self.d1[1]
    }

    pub fn x2_tuples(&self) -> usize {
        self.m2 * self.d2
    }

    /// Secret message of an Encoder 1 tuple index.
    pub fn secret1(&self, tuple: usize) -> usize {
        tuple / (self.d1[0] * self.d1[1])
    }

    pub fn secret2(&self, tuple: usize) -> usize {
        tuple / self.d2
    }
}

impl SecrecyCodeConfig {
    pub fn counts(&self) -> IndexCounts {
        let c = |rate| message_count(self.n, rate);
        let d1 = match self.dither {
            Dither::Layered { r1p, .. } => [c(r1p), 1],
            Dither::StrictlyCausal { rho1p, rho1pp, .. } => [c(rho1p), c(rho1pp)],
        };
        IndexCounts {
            m1: c(self.r1),
            d1,
            m2: c(self.r2),
            d2: c(self.dither.totals().1),
        }
    }

    pub fn validate(&self, wmac: &WiretapMac) -> Result<()> {
        let scenario = self.scenario;
        if scenario == CribbingScenario::NonCooperating {
            return Err(Error::LawVariant {
                scenario: scenario.name().into(),
                reason: "no secrecy code for non-cooperating encoders".into(),
            });
        }
        if self.n == 0 || self.blocks == 0 {
            return Err(Error::Config("n and blocks must be at least 1".into()));
        }
        let mut rates = vec![self.r1, self.r2];
        rates.extend(self.dither.rates());
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::Config("rates must be finite and nonnegative".into()));
        }
        TypicalityParams::new(self.typicality_epsilon, self.n)?;
        if self.law.x1_size() != wmac.x1_size || self.law.x2_size() != wmac.x2_size {
            return Err(Error::DimensionMismatch(
                "law and channel disagree on input alphabets".into(),
            ));
        }
        let strict = scenario == CribbingScenario::StrictlyCausal;
        let variant_ok = match self.dither {
            Dither::Layered { .. } => !strict,
            Dither::StrictlyCausal { .. } => strict,
        };
        if !variant_ok {
            return Err(Error::Config(format!(
                "dither rates do not match the {} code",
                scenario.name()
            )));
        }
        if strict == self.law.is_joint() {
            return Err(Error::LawVariant {
                scenario: scenario.name().into(),
                reason: if strict {
                    "requires a WithAux law"
                } else {
                    "requires a Joint law"
                }
                .into(),
            });
        }
        if !strict && self.blocks != 1 {
            return Err(Error::Config(
                "only the strictly-causal code uses several blocks".into(),
            ));
        }
        let length = self.n * self.blocks;
        check_sequence_guard(length, wmac.z_size)?;
        check_sequence_guard(self.n, wmac.y_size)?;
        let c = self.counts();
        let y_seqs = wmac.y_size.pow(self.n as u32);
        if strict {
            let k1 = c.x1_tuples();
            check_message_guard(k1.saturating_mul(k1))?;
            check_message_guard(k1.saturating_mul(c.x2_tuples()))?;
            let secrets = (c.m1 * c.m2).saturating_pow(self.blocks as u32);
            let table = secrets
                .saturating_mul(wmac.z_size.pow(length as u32))
                .saturating_mul(k1);
            if table > DECISION_GUARD {
                return Err(Error::GuardExceeded(format!("leakage table of {table} entries")));
            }
            guard_decisions(k1.saturating_mul(c.x2_tuples()).saturating_mul(y_seqs))
        } else {
            let tuples = c.x1_tuples().saturating_mul(c.x2_tuples());
            check_message_guard(tuples)?;
            guard_decisions(tuples.saturating_mul(y_seqs))
        }
    }
}

fn guard_decisions(work: usize) -> Result<()> {
    if work > DECISION_GUARD {
        return Err(Error::GuardExceeded(format!(
            "decoder table needs {work} typicality tests (limit {DECISION_GUARD})"
        )));
    }
    Ok(())
}

/// One block of the strictly-causal code.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudBlock {
    /// Cloud words indexed by the `(m0, m0', m0'')` tuple.
    pub u: Vec<Vec<usize>>,
    /// `x1[cloud][(m1, m1', m1'')]`.
    pub x1: Vec<Vec<Vec<usize>>>,
    /// `x2[cloud][(m2, m2')]`.
    pub x2: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SecrecyCodebook {
    /// Single-block code; index `m·D + d` folds message and dither.
    Layered { counts: IndexCounts, book: Codebook },
    BlockMarkov {
        counts: IndexCounts,
        blocks: Vec<CloudBlock>,
    },
}

pub fn build_secrecy_codebook(cfg: &SecrecyCodeConfig, wmac: &WiretapMac) -> Result<SecrecyCodebook> {
    cfg.validate(wmac)?;
    let counts = cfg.counts();
    if cfg.scenario != CribbingScenario::StrictlyCausal {
        let base = CodebookConfig {
            scenario: cfg.scenario,
            n: cfg.n,
            r1: 0.0,
            r2: 0.0,
            law: cfg.law.clone(),
            seed: cfg.seed,
        };
        let book = sample_codebook_with_counts(&base, &wmac.eavesdropper(), counts.x1_tuples(), counts.x2_tuples())?;
        return Ok(SecrecyCodebook::Layered { counts, book });
    }
    let InputLaw::WithAux {
        p_u,
        p_x1_given_u,
        p_x2_given_u,
        ..
    } = &cfg.law
    else {
        unreachable!("validated above")
    };
    use rand::distr::{weighted::WeightedIndex, Distribution};
    let w = |p: &ProbVector| WeightedIndex::new(p.as_slice().iter().copied()).expect("valid law");
    let du = w(p_u);
    let d1: Vec<_> = p_x1_given_u.rows().iter().map(w).collect();
    let d2: Vec<_> = p_x2_given_u.rows().iter().map(w).collect();
    let (k1, k2) = (counts.x1_tuples(), counts.x2_tuples());
    let blocks = (0..cfg.blocks)
        .map(|b| {
            let seed = derive_seed(cfg.seed, b as u64);
            let mut ru = rng_from(stream_seed(seed, "u"));
            let mut r1 = rng_from(stream_seed(seed, "x1"));
            let mut r2 = rng_from(stream_seed(seed, "x2"));
            let u: Vec<Vec<usize>> = (0..k1)
                .map(|_| (0..cfg.n).map(|_| du.sample(&mut ru)).collect())
                .collect();
            let sat = |rng: &mut _, d: &[WeightedIndex<f64>], count: usize| -> Vec<Vec<Vec<usize>>> {
                u.iter()
                    .map(|uw| {
                        (0..count)
                            .map(|_| uw.iter().map(|&s| d[s].sample(rng)).collect())
                            .collect()
                    })
                    .collect()
            };
            let x1 = sat(&mut r1, &d1, k1);
            let x2 = sat(&mut r2, &d2, k2);
            CloudBlock { u, x1, x2 }
        })
        .collect();
    Ok(SecrecyCodebook::BlockMarkov { counts, blocks })
}

/// Realized indices of one block of a sampled strictly-causal run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockIndices {
    /// `(m0, m0', m0'')` as one tuple index.
    pub cloud: usize,
    /// `(m1, m1', m1'')` as one tuple index.
    pub satellite: usize,
    /// `(m2, m2')` as one tuple index.
    pub x2: usize,
}

/// Samples the index trajectory of one strictly-causal run: the block-1
/// cloud comes from the shared-randomness stream, every later cloud is the
/// previous satellite tuple.
pub fn sample_chain_indices(cfg: &SecrecyCodeConfig, counts: &IndexCounts, run: u64) -> Vec<BlockIndices> {
    use rand::Rng;
    let mut rng = rng_from(derive_seed(stream_seed(cfg.seed, "messages"), run));
    let mut cloud = rng_from(derive_seed(stream_seed(cfg.seed, "shared"), run)).random_range(0..counts.x1_tuples());
    (0..cfg.blocks)
        .map(|_| {
            let satellite = rng.random_range(0..counts.x1_tuples());
            let x2 = rng.random_range(0..counts.x2_tuples());
            let out = BlockIndices { cloud, satellite, x2 };
            cloud = satellite;
            out
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecrecyReport {
    pub scenario: CribbingScenario,
    pub n: usize,
    pub blocks: usize,
    pub r1: f64,
    pub r2: f64,
    pub dither: Dither,
    pub seed: u64,
    pub counts: IndexCounts,
    /// Receiver error probability (secret messages wrong or no unique
    /// candidate). Strictly-causal: under the idealized cribbing coupling.
    pub p_error: f64,
    /// `I(M1, M2; Z^n)`; strictly-causal: under the idealized coupling.
    pub leakage_bits: f64,
    /// `E_M[D(P_{Z^n|M} ‖ Q^{⊗n})]`.
    pub resolvability_bound_bits: f64,
    pub message_entropy_bits: f64,
    pub bound_holds: bool,
    /// Strictly-causal: probability that Encoder 2 mis-decodes the cribbed
    /// tuple in some block whose estimate is used.
    pub crib_error: Option<f64>,
    /// Strictly-causal: `2 log2(1/μ) · 2 P(crib error)`, the gap between the
    /// actual and idealized leakage.
    pub coupling_correction_bits: Option<f64>,
}

fn seq_digits(mut index: usize, size: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % size;
        index /= size;
    }
    out
}

/// For every output sequence, the unique candidate whose words are jointly
/// typical with it (axes of `joint` in the order of the candidate words,
/// output last), or `None`.
fn unique_decisions(
    candidates: &[Vec<&[usize]>],
    joint: &JointTable,
    params: &TypicalityParams,
    y_size: usize,
) -> Result<Vec<Option<usize>>> {
    let seqs = y_size.pow(params.n as u32);
    (0..seqs)
        .into_par_iter()
        .map(|yi| {
            let y = seq_digits(yi, y_size, params.n);
            let mut found = None;
            for (c, words) in candidates.iter().enumerate() {
                let mut all: Vec<&[usize]> = words.clone();
                all.push(&y);
                if is_jointly_typical(&all, joint, params)? {
                    if found.is_some() {
                        return Ok(None);
                    }
                    found = Some(c);
                }
            }
            Ok(found)
        })
        .collect()
}

/// Exact simulation of a secrecy code.
pub fn simulate_secrecy(cfg: &SecrecyCodeConfig, wmac: &WiretapMac) -> Result<SecrecyReport> {
    match build_secrecy_codebook(cfg, wmac)? {
        SecrecyCodebook::Layered { counts, book } => simulate_layered(cfg, wmac, counts, &book),
        SecrecyCodebook::BlockMarkov { counts, blocks } => simulate_block_markov(cfg, wmac, counts, &blocks),
    }
}

fn report(
    cfg: &SecrecyCodeConfig,
    counts: IndexCounts,
    p_error: f64,
    leakage: f64,
    bound: f64,
    crib: Option<(f64, f64)>,
) -> SecrecyReport {
    let message_entropy_bits = cfg.blocks as f64 * ((counts.m1 * counts.m2) as f64).log2();
    SecrecyReport {
        scenario: cfg.scenario,
        n: cfg.n,
        blocks: cfg.blocks,
        r1: cfg.r1,
        r2: cfg.r2,
        dither: cfg.dither,
        seed: cfg.seed,
        counts,
        p_error,
        leakage_bits: leakage,
        resolvability_bound_bits: bound,
        message_entropy_bits,
        bound_holds: leakage <= bound + 1e-9,
        crib_error: crib.map(|c| c.0),
        coupling_correction_bits: crib.map(|c| c.1),
    }
}

fn simulate_layered(
    cfg: &SecrecyCodeConfig,
    wmac: &WiretapMac,
    counts: IndexCounts,
    book: &Codebook,
) -> Result<SecrecyReport> {
    let (legit, eve) = (wmac.legitimate(), wmac.eavesdropper());
    let (k1, k2) = (counts.x1_tuples(), counts.x2_tuples());
    let words: Vec<(Vec<usize>, Vec<usize>)> = (0..k1 * k2)
        .map(|t| {
            let (i1, i2) = (t / k2, t % k2);
            (book.x1_words[i1].clone(), book.x2_word(i1, i2))
        })
        .collect();

    // Leakage: average the eavesdropper's law over dithers per secret pair.
    let zn = eve.z_size.pow(cfg.n as u32);
    let mut per_secret = vec![vec![0.0; zn]; counts.m1 * counts.m2];
    let dithers = (k1 * k2 / (counts.m1 * counts.m2)) as f64;
    for (t, (x1, x2)) in words.iter().enumerate() {
        let s = counts.secret1(t / k2) * counts.m2 + counts.secret2(t % k2);
        for (acc, p) in per_secret[s].iter_mut().zip(conditional_output(&eve, x1, x2)) {
            *acc += p / dithers;
        }
    }
    let q = induced_output(&eve, &cfg.law)?;
    let (leakage, bound) = leakage_and_bound(&per_secret, &q.power(cfg.n))?;

    // Receiver: unique jointly typical (x1, x2) candidate.
    let joint = crate::model::full_joint(&legit, &cfg.law)?;
    let params = TypicalityParams::new(cfg.typicality_epsilon, cfg.n)?;
    let cands: Vec<Vec<&[usize]>> = words.iter().map(|(a, b)| vec![a.as_slice(), b.as_slice()]).collect();
    let decisions = unique_decisions(&cands, &joint, &params, legit.z_size)?;
    let secret = |t: usize| (counts.secret1(t / k2), counts.secret2(t % k2));
    let p_error: f64 = words
        .par_iter()
        .enumerate()
        .map(|(t, (x1, x2))| {
            conditional_output(&legit, x1, x2)
                .iter()
                .zip(&decisions)
                .filter(|(_, d)| d.map(secret) != Some(secret(t)))
                .map(|(p, _)| p)
                .sum::<f64>()
        })
        .sum::<f64>()
        / (k1 * k2) as f64;
    Ok(report(cfg, counts, p_error.min(1.0), leakage, bound, None))
}

fn simulate_block_markov(
    cfg: &SecrecyCodeConfig,
    wmac: &WiretapMac,
    counts: IndexCounts,
    blocks: &[CloudBlock],
) -> Result<SecrecyReport> {
    let (legit, eve) = (wmac.legitimate(), wmac.eavesdropper());
    let (k1, k2) = (counts.x1_tuples(), counts.x2_tuples());
    let secrets = counts.m1 * counts.m2;
    let zr = eve.z_size.pow(cfg.n as u32);

    // Idealized coupling: forward pass over (secret history, z history, cloud).
    let mut table = vec![1.0 / k1 as f64; k1];
    let mut hist = 1usize;
    for block in blocks {
        let mut next = vec![0.0; hist * secrets * zr * k1];
        let w = 1.0 / (k1 * k2) as f64;
        let outs: Vec<Vec<Vec<f64>>> = (0..k1)
            .into_par_iter()
            .map(|prev| {
                (0..k1 * k2)
                    .map(|c| conditional_output(&eve, &block.x1[prev][c / k2], &block.x2[prev][c % k2]))
                    .collect()
            })
            .collect();
        for h in 0..hist {
            for prev in 0..k1 {
                let p = table[h * k1 + prev];
                if p == 0.0 {
                    continue;
                }
                for (c, out) in outs[prev].iter().enumerate() {
                    let (cur, s2) = (c / k2, c % k2);
                    let s = counts.secret1(cur) * counts.m2 + counts.secret2(s2);
                    for (z, pz) in out.iter().enumerate() {
                        let h2 = (h * secrets + s) * zr + z;
                        next[h2 * k1 + cur] += p * w * pz;
                    }
                }
            }
        }
        table = next;
        hist *= secrets * zr;
    }
    // Marginalize the last cloud; axes alternate S{b}, Z{b}.
    let flat: Vec<f64> = table.chunks(k1).map(|c| c.iter().sum()).collect();
    let mut labels = Vec::new();
    let mut shape = Vec::new();
    for b in 1..=cfg.blocks {
        labels.extend([format!("S{b}"), format!("Z{b}")]);
        shape.extend([secrets, zr]);
    }
    let joint = JointTable::new(labels.clone(), shape, flat)?;
    let s_axes: Vec<&str> = labels.iter().step_by(2).map(String::as_str).collect();
    let z_axes: Vec<&str> = labels.iter().skip(1).step_by(2).map(String::as_str).collect();
    let leakage = crate::prob::mutual_information(&joint, &s_axes, &z_axes, &[])?;
    let q = induced_output(&eve, &cfg.law)?;
    let q_n = q.power(cfg.n * cfg.blocks);
    let output_kl = kl_divergence(&joint.marginal_vector(&z_axes)?, &q_n)?;
    let bound = leakage + output_kl;

    let aux = cfg.law.aux_table().expect("validated WithAux");
    let params = TypicalityParams::new(cfg.typicality_epsilon, cfg.n)?;
    let crib = crib_error(blocks, &aux.marginal(&["U", "X1"])?, &params, k1)?;
    let mu = q.as_slice().iter().copied().filter(|&x| x > 0.0).fold(1.0, f64::min);
    let correction = 2.0 * (cfg.n * cfg.blocks) as f64 * (1.0 / mu).log2() * 2.0 * crib;

    let yjoint = wiretap_full_joint(wmac, &cfg.law)?.marginal(&["U", "X1", "X2", "Y"])?;
    let p_error = backward_error(blocks, &legit, &yjoint, &params, k1, k2)?;
    Ok(report(cfg, counts, p_error, leakage, bound, Some((crib, correction))))
}

/// `P(Encoder 2 mis-decodes the satellite tuple in some block b < B)` with
/// the true cloud (until the first error both couplings agree).
fn crib_error(blocks: &[CloudBlock], ux1: &JointTable, params: &TypicalityParams, k1: usize) -> Result<f64> {
    let mut alive = vec![1.0 / k1 as f64; k1];
    for block in &blocks[..blocks.len() - 1] {
        let ok: Vec<Vec<bool>> = (0..k1)
            .into_par_iter()
            .map(|prev| {
                (0..k1)
                    .map(|cur| {
                        let w = &block.x1[prev][cur];
                        let unique = block.x1[prev].iter().filter(|c| *c == w).count() == 1;
                        Ok(unique && is_jointly_typical(&[&block.u[prev], w], ux1, params)?)
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<_>>()?;
        let mut next = vec![0.0; k1];
        for prev in 0..k1 {
            for cur in 0..k1 {
                if ok[prev][cur] {
                    next[cur] += alive[prev] / k1 as f64;
                }
            }
        }
        alive = next;
    }
    Ok((1.0 - alive.iter().sum::<f64>()).clamp(0.0, 1.0))
}

/// Backward decoding error with the idealized cribbing coupling. The block-1
/// cloud and the last block's tuples are shared; block `b` is decoded with
/// the satellite tuple recovered from block `b+1`. Any wrong tuple counts.
fn backward_error(
    blocks: &[CloudBlock],
    legit: &MacChannel,
    joint: &JointTable,
    params: &TypicalityParams,
    k1: usize,
    k2: usize,
) -> Result<f64> {
    let b_count = blocks.len();
    if b_count == 1 {
        return Ok(0.0);
    }
    let y_size = legit.z_size;
    // correct[b][(prev, cur, s)] = P(unique typical candidate is the truth).
    let correct_for = |b: usize| -> Result<Vec<f64>> {
        let block = &blocks[b];
        let words = |prev: usize, cur: usize, s: usize| -> Vec<&[usize]> {
            vec![&block.u[prev], &block.x1[prev][cur], &block.x2[prev][s]]
        };
        let mut out = vec![0.0; k1 * k1 * k2];
        if b == b_count - 1 {
            // Known (cur, s); search the cloud.
            for cur in 0..k1 {
                for s in 0..k2 {
                    let cands: Vec<_> = (0..k1).map(|p| words(p, cur, s)).collect();
                    let dec = unique_decisions(&cands, joint, params, y_size)?;
                    for prev in 0..k1 {
                        out[(prev * k1 + cur) * k2 + s] = hit(legit, &cands[prev], &dec, prev);
                    }
                }
            }
        } else if b == 0 {
            // Known (prev, cur); search Encoder 2's tuple.
            for prev in 0..k1 {
                for cur in 0..k1 {
                    let cands: Vec<_> = (0..k2).map(|s| words(prev, cur, s)).collect();
                    let dec = unique_decisions(&cands, joint, params, y_size)?;
                    for s in 0..k2 {
                        out[(prev * k1 + cur) * k2 + s] = hit(legit, &cands[s], &dec, s);
                    }
                }
            }
        } else {
            // Known cur; search (cloud, Encoder 2's tuple).
            for cur in 0..k1 {
                let cands: Vec<_> = (0..k1 * k2).map(|c| words(c / k2, cur, c % k2)).collect();
                let dec = unique_decisions(&cands, joint, params, y_size)?;
                for c in 0..k1 * k2 {
                    out[((c / k2) * k1 + cur) * k2 + c % k2] = hit(legit, &cands[c], &dec, c);
                }
            }
        }
        Ok(out)
    };
    let mut f = vec![1.0 / k1 as f64; k1];
    for b in 0..b_count {
        let c = correct_for(b)?;
        let mut next = vec![0.0; k1];
        for prev in 0..k1 {
            for cur in 0..k1 {
                let avg: f64 = (0..k2).map(|s| c[(prev * k1 + cur) * k2 + s]).sum::<f64>() / k2 as f64;
                next[cur] += f[prev] * avg / k1 as f64;
            }
        }
        f = next;
    }
    Ok((1.0 - f.iter().sum::<f64>()).clamp(0.0, 1.0))
}

fn hit(legit: &MacChannel, words: &[&[usize]], dec: &[Option<usize>], truth: usize) -> f64 {
    conditional_output(legit, words[1], words[2])
        .iter()
        .zip(dec)
        .filter(|(_, d)| **d == Some(truth))
        .map(|(p, _)| p)
        .sum()
}

/// Explicit auxiliary rates for a secret rate pair: `[R1', R2', 0]`, or
/// `[ρ1', ρ1'', ρ2]` for the strictly-causal system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub aux: [f64; 3],
    /// Smallest margin of the pre-elimination system at the witness.
    pub margin: f64,
}

/// Auxiliary rates satisfying every pre-elimination inequality strictly
/// when `pt` lies strictly inside the achievable region; `None` otherwise.
pub fn secrecy_witness(
    wmac: &WiretapMac,
    law: &InputLaw,
    scenario: CribbingScenario,
    pt: RatePoint,
) -> Result<Option<Witness>> {
    let region = secrecy_region(wmac, law, scenario)?;
    let delta = region.margin(pt);
    if !(delta > 0.0) {
        return Ok(None);
    }
    let t = SecrecyTerms::compute(wmac, law)?;
    let system = PreEliminationSystem::from_terms(&t, scenario)?;
    let eta = delta / 4.0;
    let z = &t.z;
    let iz = z.i_x1x2;
    let aux = match scenario {
        CribbingScenario::DegradedMessageSets => [iz + eta, eta, 0.0],
        CribbingScenario::NonCausal | CribbingScenario::Causal => {
            let total = iz + 2.0 * eta;
            let r1p = (total - eta).min(z.h_x1 - pt.r1 - eta);
            [r1p, total - r1p, 0.0]
        }
        CribbingScenario::StrictlyCausal => {
            let total = iz + 2.0 * eta;
            let cooperative = (z.h_x1_given_u - pt.r1 - eta).min(total);
            let rho2 = total - cooperative;
            let rho1pp = z.i_u.max(z.i_ux2 - rho2) + eta;
            [cooperative - rho1pp, rho1pp, rho2]
        }
        CribbingScenario::NonCooperating => unreachable!("rejected by secrecy_region"),
    };
    let margin = system.margin(pt, aux);
    Ok(system.satisfied_strictly(pt, aux).then_some(Witness { aux, margin }))
}

/// One of the two strictly-causal corner assignments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerAssignment {
    pub rho1p: f64,
    pub rho1pp: f64,
    pub rho2: f64,
    pub r1: f64,
    pub r2: f64,
}

impl CornerAssignment {
    pub fn point(&self) -> RatePoint {
        RatePoint::new(self.r1, self.r2)
    }

    /// Auxiliaries in the order of the pre-elimination system.
    pub fn aux(&self) -> [f64; 3] {
        [self.rho1p, self.rho1pp, self.rho2]
    }
}

/// The two corner assignments of the strictly-causal code at slack `eps`,
/// for whichever side of `H(X1|U) ≶ I(U,X1;Y)` the law falls on. The flag
/// is `true` when `H(X1|U) > I(U,X1;Y)`.
pub fn corner_assignments(t: &SecrecyTerms, eps: f64) -> ([CornerAssignment; 2], bool) {
    let (y, z) = (&t.y, &t.z);
    let above = z.h_x1_given_u > y.i_ux1;
    let first_r2 = if above {
        y.i_x1x2 - z.i_x2_given_ux1 - z.h_x1_given_u - eps
    } else {
        y.i_x2_given_ux1 - z.i_x2_given_ux1 - eps
    };
    let second_r1 = if above {
        y.i_x1x2 - y.i_x2_given_ux1 - z.i_x1x2 - 2.0 * eps
    } else {
        z.h_x1_given_u - z.i_x1x2 - 2.0 * eps
    };
    (
        [
            CornerAssignment {
                rho1pp: z.i_u + eps,
                rho1p: z.i_x1_given_u + eps,
                rho2: z.i_x2_given_ux1 + eps,
                r1: z.h_x1_given_u - z.i_ux1 - 2.0 * eps,
                r2: first_r2,
            },
            CornerAssignment {
                rho1pp: z.i_ux2 + eps,
                rho1p: z.i_x1x2 - z.i_ux2 + eps,
                rho2: eps,
                r1: second_r1,
                r2: y.i_x2_given_ux1 - eps,
            },
        ],
        above,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MacChannel;
    use crate::sampling::{random_aux_law, random_wiretap};

    fn degraded_cfg(n: usize, rates: (f64, f64, f64, f64)) -> SecrecyCodeConfig {
        SecrecyCodeConfig {
            scenario: CribbingScenario::DegradedMessageSets,
            n,
            blocks: 1,
            r1: rates.0,
            r2: rates.1,
            dither: Dither::Layered {
                r1p: rates.2,
                r2p: rates.3,
            },
            law: InputLaw::uniform(2, 2),
            seed: 3,
            typicality_epsilon: 1.0,
        }
    }

    #[test]
    fn constant_eavesdropper_learns_nothing() {
        let legit = MacChannel::xor();
        let eve = MacChannel::constant(2, 2, &ProbVector::new(vec![0.4, 0.6]).unwrap());
        let wmac = WiretapMac::from_marginals(&legit, &eve).unwrap();
        let rep = simulate_secrecy(&degraded_cfg(3, (0.34, 0.34, 0.0, 0.0)), &wmac).unwrap();
        assert!(rep.leakage_bits.abs() < 1e-12);
        assert!(rep.bound_holds);
    }

    #[test]
    fn eavesdropper_equal_to_receiver_sees_everything() {
        // Z = (X1, X2), so distinct codeword pairs give disjoint outputs.
        let both = MacChannel::deterministic(2, 2, 4, |a, b| 2 * a + b).unwrap();
        let wmac = WiretapMac::from_marginals(&both, &both).unwrap();
        let third = 1.0 / 3.0;
        let mut cfg = degraded_cfg(3, (third, third, 0.0, 0.0));
        cfg.seed = 0;
        let book = build_secrecy_codebook(&cfg, &wmac).unwrap();
        let SecrecyCodebook::Layered { book, .. } = &book else {
            panic!()
        };
        let mut pairs: Vec<_> = (0..4)
            .map(|t| (book.x1_words[t / 2].clone(), book.x2_word(t / 2, t % 2)))
            .collect();
        pairs.sort();
        pairs.dedup();
        let rep = simulate_secrecy(&cfg, &wmac).unwrap();
        assert_eq!(rep.counts.m1 * rep.counts.m2, 4);
        if pairs.len() == 4 {
            assert!((rep.leakage_bits - rep.message_entropy_bits).abs() < 1e-9);
        }
        assert!(rep.bound_holds);
    }

    #[test]
    fn leakage_bound_on_random_instances() {
        let mut rng = rng_from(21);
        for k in 0..10 {
            let wmac = random_wiretap(&mut rng, 2, 2, 2, 2);
            let mut cfg = degraded_cfg(3, (0.34, 0.34, 0.34, 0.34));
            cfg.seed = k;
            let rep = simulate_secrecy(&cfg, &wmac).unwrap();
            assert!(rep.bound_holds, "{rep:?}");
            assert!((0.0..=1.0).contains(&rep.p_error));
        }
    }

    #[test]
    fn strictly_causal_chain_links_clouds() {
        let mut rng = rng_from(5);
        let wmac = random_wiretap(&mut rng, 2, 2, 2, 2);
        let cfg = SecrecyCodeConfig {
            scenario: CribbingScenario::StrictlyCausal,
            n: 2,
            blocks: 2,
            r1: 0.0,
            r2: 0.5,
            dither: Dither::StrictlyCausal {
                rho1p: 0.5,
                rho1pp: 0.5,
                rho2: 0.0,
            },
            law: random_aux_law(&mut rng, 2, 2, 2),
            seed: 1,
            typicality_epsilon: 1.0,
        };
        let rep = simulate_secrecy(&cfg, &wmac).unwrap();
        assert!(rep.bound_holds, "{rep:?}");
        assert!(rep.crib_error.is_some());
        let idx = sample_chain_indices(&cfg, &cfg.counts(), 0);
        assert_eq!(idx[1].cloud, idx[0].satellite);
    }

    #[test]
    fn witnesses_are_sound() {
        let mut rng = rng_from(8);
        for _ in 0..40 {
            let wmac = random_wiretap(&mut rng, 2, 2, 2, 2);
            let law = random_aux_law(&mut rng, 2, 2, 2);
            for scenario in [
                CribbingScenario::DegradedMessageSets,
                CribbingScenario::NonCausal,
                CribbingScenario::StrictlyCausal,
            ] {
                let law = if scenario == CribbingScenario::StrictlyCausal {
                    law.clone()
                } else {
                    law.to_joint()
                };
                let region = secrecy_region(&wmac, &law, scenario).unwrap();
                for v in region.vertices() {
                    let pt = RatePoint::new(0.9 * v.r1 + 1e-3, 0.9 * v.r2 + 1e-3);
                    let system = PreEliminationSystem::build(&wmac, &law, scenario).unwrap();
                    if let Some(w) = secrecy_witness(&wmac, &law, scenario, pt).unwrap() {
                        assert!(system.satisfied_strictly(pt, w.aux));
                    } else {
                        assert!(region.margin(pt) <= 0.0);
                    }
                }
            }
        }
    }
}
