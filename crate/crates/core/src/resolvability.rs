//! Single-block random codes for output-statistics approximation, with the
//! induced n-letter output law computed exactly by enumeration.
//!
//! Message sets have `⌈2^{nR}⌉` elements. Sequences over `Z^n` are indexed
//! big-endian (first symbol most significant), matching
//! [`ProbVector::power`].

use std::collections::BTreeMap;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CribbingScenario, InputLaw, MacChannel, TargetOutput};
use crate::prob::{kl_divergence, stable_sum, JointTable, ProbVector};
use crate::sampling::{derive_seed, rng_from, splitmix64, stream_seed};

/// Exact analysis is limited to `n·log2|Z| ≤ 26`.
pub const GUARD_BITS: f64 = 26.0;
/// Exact analysis enumerates at most this many (message, dither) tuples.
pub const MESSAGE_GUARD: usize = 1 << 20;

/// `⌈2^{nR}⌉`, at least 1.
pub fn message_count(n: usize, rate: f64) -> usize {
    let exponent = n as f64 * rate;
    let raw = exponent.exp2();
    // Exact powers of two stay exact; tiny float excess is not rounded up.
    let rounded = raw.round();
    let count = if (raw - rounded).abs() <= 1e-9 * raw.max(1.0) {
        rounded
    } else {
        raw.ceil()
    };
    count.max(1.0) as usize
}

/// Rejects `|Z|^n > 2^26`.
pub fn check_sequence_guard(n: usize, z_size: usize) -> Result<()> {
    let bits = n as f64 * (z_size as f64).log2();
    if bits > GUARD_BITS + 1e-12 {
        return Err(Error::GuardExceeded(format!(
            "|Z|^n = {z_size}^{n} exceeds 2^{GUARD_BITS}; exact enumeration refused"
        )));
    }
    Ok(())
}

pub fn check_message_guard(count: usize) -> Result<()> {
    if count > MESSAGE_GUARD {
        return Err(Error::GuardExceeded(format!(
            "{count} message tuples exceed the enumeration limit {MESSAGE_GUARD}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookConfig {
    pub scenario: CribbingScenario,
    pub n: usize,
    pub r1: f64,
    pub r2: f64,
    pub law: InputLaw,
    pub seed: u64,
}

impl CodebookConfig {
    pub fn message_counts(&self) -> (usize, usize) {
        (message_count(self.n, self.r1), message_count(self.n, self.r2))
    }

    /// Rates actually realized by the rounded message counts.
    pub fn realized_rates(&self) -> (f64, f64) {
        let (a, b) = self.message_counts();
        ((a as f64).log2() / self.n as f64, (b as f64).log2() / self.n as f64)
    }

    pub fn validate(&self, mac: &MacChannel) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("block length n must be at least 1".into()));
        }
        if !(self.r1 >= 0.0 && self.r2 >= 0.0 && self.r1.is_finite() && self.r2.is_finite()) {
            return Err(Error::Config("rates must be finite and nonnegative".into()));
        }
        if self.law.x1_size() != mac.x1_size || self.law.x2_size() != mac.x2_size {
            return Err(Error::DimensionMismatch(
                "law and channel disagree on input alphabets".into(),
            ));
        }
        match self.scenario {
            CribbingScenario::StrictlyCausal => {
                return Err(Error::LawVariant {
                    scenario: self.scenario.name().into(),
                    reason: "strictly-causal codes are block-Markov; use the block_markov module".into(),
                })
            }
            CribbingScenario::NonCooperating if self.law.is_joint() => {
                return Err(Error::LawVariant {
                    scenario: self.scenario.name().into(),
                    reason: "requires an auxiliary (WithAux) law".into(),
                })
            }
            s if s != CribbingScenario::NonCooperating && !self.law.is_joint() => {
                return Err(Error::LawVariant {
                    scenario: s.name().into(),
                    reason: "requires a Joint law".into(),
                })
            }
            _ => {}
        }
        check_sequence_guard(self.n, mac.z_size)?;
        let (a, b) = self.message_counts();
        check_message_guard(a.saturating_mul(b))
    }
}

/// How encoder 2's codewords are indexed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum X2Book {
    /// `x2(m1, m2)`: encoder 2 knows encoder 1's message.
    PerMessage(Vec<Vec<Vec<usize>>>),
    /// `x2(x1-word, m2)`: sub-codebooks keyed by the realized x1 word, so
    /// messages with colliding x1 words share them.
    PerWord(BTreeMap<Vec<usize>, Vec<Vec<usize>>>),
    /// `t(m2)` strategy words; the transmitted symbol is `t_i(x1_i)`.
    Strategies {
        words: Vec<Vec<usize>>,
        /// Strategy index → symbol sent for each `x1`.
        table: Vec<Vec<usize>>,
    },
    /// `x2(m2)`, drawn independently of encoder 1.
    Independent(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Codebook {
    pub scenario: CribbingScenario,
    pub n: usize,
    pub m1_count: usize,
    pub m2_count: usize,
    /// Shared time-sharing word (non-cooperating encoders only).
    pub u_word: Option<Vec<usize>>,
    pub x1_words: Vec<Vec<usize>>,
    pub x2: X2Book,
}

impl Codebook {
    /// The word sent by encoder 2 for the message pair.
    pub fn x2_word(&self, m1: usize, m2: usize) -> Vec<usize> {
        match &self.x2 {
            X2Book::PerMessage(t) => t[m1][m2].clone(),
            X2Book::PerWord(map) => map[&self.x1_words[m1]][m2].clone(),
            X2Book::Strategies { words, table } => words[m2]
                .iter()
                .zip(&self.x1_words[m1])
                .map(|(t, x1)| table[*t][*x1])
                .collect(),
            X2Book::Independent(w) => w[m2].clone(),
        }
    }
}

/// Hash of a word, used to key per-word sub-codebooks.
pub fn word_key(word: &[usize]) -> u64 {
    word.iter()
        .fold(0x243F_6A88_85A3_08D3, |acc, &s| splitmix64(acc ^ (s as u64 + 1)))
}

fn sampler(p: &ProbVector) -> WeightedIndex<f64> {
    WeightedIndex::new(p.as_slice().iter().copied()).expect("valid probability vector")
}

/// Per-symbol sampler of `X2` given `X1` from a joint table over (X1, X2).
/// Rows with zero `P(x1)` are never used and fall back to uniform.
fn conditional_samplers(joint: &JointTable) -> Vec<WeightedIndex<f64>> {
    let (a, b) = (joint.shape()[0], joint.shape()[1]);
    (0..a)
        .map(|x1| {
            let row: Vec<f64> = (0..b).map(|x2| joint.get(&[x1, x2])).collect();
            if row.iter().sum::<f64>() > 0.0 {
                WeightedIndex::new(row).expect("positive row")
            } else {
                WeightedIndex::new(vec![1.0; b]).expect("uniform")
            }
        })
        .collect()
}

fn draw_word<R: Rng + ?Sized>(rng: &mut R, n: usize, d: &WeightedIndex<f64>) -> Vec<usize> {
    (0..n).map(|_| d.sample(rng)).collect()
}

fn draw_conditional<R: Rng + ?Sized>(rng: &mut R, given: &[usize], d: &[WeightedIndex<f64>]) -> Vec<usize> {
    given.iter().map(|&g| d[g].sample(rng)).collect()
}

/// Draws the random codebook of the configured scenario. Each component uses
/// its own seed stream derived from `cfg.seed`.
pub fn sample_codebook(cfg: &CodebookConfig, mac: &MacChannel) -> Result<Codebook> {
    cfg.validate(mac)?;
    let (m1_count, m2_count) = cfg.message_counts();
    draw_codebook(cfg, m1_count, m2_count)
}

/// Like [`sample_codebook`] but with explicit index-set sizes; the rates of
/// `cfg` are ignored. Used by layered (message × dither) codes.
pub fn sample_codebook_with_counts(
    cfg: &CodebookConfig,
    mac: &MacChannel,
    m1_count: usize,
    m2_count: usize,
) -> Result<Codebook> {
    CodebookConfig {
        r1: 0.0,
        r2: 0.0,
        ..cfg.clone()
    }
    .validate(mac)?;
    if m1_count == 0 || m2_count == 0 {
        return Err(Error::Config("index sets must be nonempty".into()));
    }
    check_message_guard(m1_count.saturating_mul(m2_count))?;
    draw_codebook(cfg, m1_count, m2_count)
}

fn draw_codebook(cfg: &CodebookConfig, m1_count: usize, m2_count: usize) -> Result<Codebook> {
    let n = cfg.n;
    let mut rng1 = rng_from(stream_seed(cfg.seed, "x1"));
    let x2_stream = stream_seed(cfg.seed, "x2");
    let mut rng2 = rng_from(x2_stream);
    let scenario = cfg.scenario;

    if let InputLaw::WithAux {
        p_u,
        p_x1_given_u,
        p_x2_given_u,
        ..
    } = &cfg.law
    {
        let mut rng_u = rng_from(stream_seed(cfg.seed, "u"));
        let u_word = draw_word(&mut rng_u, n, &sampler(p_u));
        let d1: Vec<_> = p_x1_given_u.rows().iter().map(sampler).collect();
        let d2: Vec<_> = p_x2_given_u.rows().iter().map(sampler).collect();
        let x1_words = (0..m1_count)
            .map(|_| draw_conditional(&mut rng1, &u_word, &d1))
            .collect();
        let x2_words = (0..m2_count)
            .map(|_| draw_conditional(&mut rng2, &u_word, &d2))
            .collect();
        return Ok(Codebook {
            scenario,
            n,
            m1_count,
            m2_count,
            u_word: Some(u_word),
            x1_words,
            x2: X2Book::Independent(x2_words),
        });
    }

    let joint = cfg.law.x_joint();
    let p_x1 = cfg.law.p_x1();
    let x2: X2Book;
    let x1_words: Vec<Vec<usize>>;
    match scenario {
        CribbingScenario::Causal => {
            let (p1, pt, table) = strategy_law(&joint)?;
            let d1 = sampler(&p1);
            x1_words = (0..m1_count).map(|_| draw_word(&mut rng1, n, &d1)).collect();
            let dt = sampler(&pt);
            let words = (0..m2_count).map(|_| draw_word(&mut rng2, n, &dt)).collect();
            x2 = X2Book::Strategies { words, table };
        }
        CribbingScenario::DegradedMessageSets => {
            let d1 = sampler(&p_x1);
            let d2 = conditional_samplers(&joint);
            x1_words = (0..m1_count).map(|_| draw_word(&mut rng1, n, &d1)).collect();
            let table = x1_words
                .iter()
                .map(|w| (0..m2_count).map(|_| draw_conditional(&mut rng2, w, &d2)).collect())
                .collect();
            x2 = X2Book::PerMessage(table);
        }
        CribbingScenario::NonCausal => {
            let d1 = sampler(&p_x1);
            let d2 = conditional_samplers(&joint);
            x1_words = (0..m1_count).map(|_| draw_word(&mut rng1, n, &d1)).collect();
            let mut map = BTreeMap::new();
            for w in &x1_words {
                map.entry(w.clone()).or_insert_with(|| {
                    let mut r = rng_from(derive_seed(x2_stream, word_key(w)));
                    (0..m2_count).map(|_| draw_conditional(&mut r, w, &d2)).collect()
                });
            }
            x2 = X2Book::PerWord(map);
        }
        CribbingScenario::NonCooperating | CribbingScenario::StrictlyCausal => unreachable!("validated above"),
    }
    Ok(Codebook {
        scenario,
        n,
        m1_count,
        m2_count,
        u_word: None,
        x1_words,
        x2,
    })
}

/// Strategy decomposition restricted to the support of `P(x1)`: symbols of
/// zero mass get an arbitrary fixed image (they are never sent).
fn strategy_law(joint: &JointTable) -> Result<(ProbVector, ProbVector, Vec<Vec<usize>>)> {
    let dec = crate::block_markov::ShannonStrategies::on_support(joint)?;
    Ok((dec.p_x1.clone(), dec.p_t.clone(), dec.table.clone()))
}

/// Exact law of `Z^n` given input words: `Π_i W(z_i | x1_i, x2_i)`.
pub fn conditional_output(mac: &MacChannel, x1: &[usize], x2: &[usize]) -> Vec<f64> {
    let mut out = vec![1.0];
    for (a, b) in x1.iter().zip(x2) {
        let row = mac.row(*a, *b).as_slice();
        let mut next = Vec::with_capacity(out.len() * row.len());
        for p in &out {
            next.extend(row.iter().map(|w| p * w));
        }
        out = next;
    }
    out
}

fn add_scaled(acc: &mut [f64], v: &[f64], scale: f64) {
    acc.iter_mut().zip(v).for_each(|(a, b)| *a += scale * b);
}

/// Message-conditional output laws, one per `(m1, m2)` in row-major order.
pub fn message_outputs(cb: &Codebook, mac: &MacChannel) -> Result<Vec<Vec<f64>>> {
    check_sequence_guard(cb.n, mac.z_size)?;
    check_message_guard(cb.m1_count * cb.m2_count)?;
    Ok((0..cb.m1_count * cb.m2_count)
        .into_par_iter()
        .map(|m| {
            let (m1, m2) = (m / cb.m2_count, m % cb.m2_count);
            conditional_output(mac, &cb.x1_words[m1], &cb.x2_word(m1, m2))
        })
        .collect())
}

/// Exact `P_{Z^n}` under uniform messages.
pub fn induced_n_letter_output(cb: &Codebook, mac: &MacChannel) -> Result<ProbVector> {
    let per_message = message_outputs(cb, mac)?;
    let size = mac.z_size.pow(cb.n as u32);
    let w = 1.0 / per_message.len() as f64;
    let mut acc = vec![0.0; size];
    for v in &per_message {
        add_scaled(&mut acc, v, w);
    }
    ProbVector::from_weights(acc)
}

/// Target must be positive wherever the channel can put mass.
pub fn check_target_support(mac: &MacChannel, target: &TargetOutput) -> Result<()> {
    if target.q_z.len() != mac.z_size {
        return Err(Error::DimensionMismatch(
            "target alphabet differs from channel output".into(),
        ));
    }
    for z in 0..mac.z_size {
        let reach: f64 = mac.w.rows().iter().map(|r| r.get(z)).sum();
        if reach > 0.0 && target.q_z.get(z) <= 0.0 {
            return Err(Error::AbsoluteContinuityViolation { symbol: z, p: reach });
        }
    }
    Ok(())
}

/// `D(P_{Z^n} ‖ Q_Z^{⊗n})` in bits.
pub fn resolvability_kl(cb: &Codebook, mac: &MacChannel, target: &TargetOutput) -> Result<f64> {
    check_target_support(mac, target)?;
    let p = induced_n_letter_output(cb, mac)?;
    kl_divergence(&p, &target.q_z.power(cb.n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub scenario: CribbingScenario,
    pub n: usize,
    pub r1: f64,
    pub r2: f64,
    pub realized_r1: f64,
    pub realized_r2: f64,
    pub seed: u64,
    pub trials: usize,
    pub kl_bits: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

/// Mean and standard error (sample standard deviation over `√T`).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let t = xs.len() as f64;
    let mean = stable_sum(xs.iter().copied()) / t;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = stable_sum(xs.iter().map(|x| (x - mean).powi(2))) / (t - 1.0);
    (mean, (var / t).sqrt())
}

/// Monte Carlo over independent codebooks; trial `k` uses seed
/// `derive_seed(cfg.seed, k)`.
pub fn mc_expected_kl(
    cfg: &CodebookConfig,
    mac: &MacChannel,
    target: &TargetOutput,
    trials: usize,
) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    cfg.validate(mac)?;
    check_target_support(mac, target)?;
    let kl_bits = (0..trials)
        .into_par_iter()
        .map(|k| {
            let trial_cfg = CodebookConfig {
                seed: derive_seed(cfg.seed, k as u64),
                ..cfg.clone()
            };
            let cb = sample_codebook(&trial_cfg, mac)?;
            resolvability_kl(&cb, mac, target)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_stderr(&kl_bits);
    let (realized_r1, realized_r2) = cfg.realized_rates();
    Ok(SimReport {
        scenario: cfg.scenario,
        n: cfg.n,
        r1: cfg.r1,
        r2: cfg.r2,
        realized_r1,
        realized_r2,
        seed: cfg.seed,
        trials,
        kl_bits,
        mean,
        stderr,
    })
}

/// `I(M; Z^n)` and `E_M[D(P_{Z^n|M} ‖ Q^{⊗n})]` for uniform `M` over a list
/// of message-conditional output laws.
pub fn leakage_and_bound(per_message: &[Vec<f64>], q_n: &ProbVector) -> Result<(f64, f64)> {
    let w = 1.0 / per_message.len() as f64;
    let mut p_z = vec![0.0; q_n.len()];
    for v in per_message {
        add_scaled(&mut p_z, v, w);
    }
    let p_z = ProbVector::from_weights(p_z)?;
    let mut leak = Vec::with_capacity(per_message.len());
    let mut bound = Vec::with_capacity(per_message.len());
    for v in per_message {
        let pm = ProbVector::from_weights(v.clone())?;
        leak.push(w * kl_divergence(&pm, &p_z)?);
        bound.push(w * kl_divergence(&pm, q_n)?);
    }
    Ok((stable_sum(leak).max(0.0), stable_sum(bound).max(0.0)))
}

/// Exact `I(M1, M2; Z^n)` with uniform messages.
pub fn exact_leakage(cb: &Codebook, mac: &MacChannel) -> Result<f64> {
    let per_message = message_outputs(cb, mac)?;
    let q = ProbVector::uniform(mac.z_size).power(cb.n);
    Ok(leakage_and_bound(&per_message, &q)?.0)
}

/// `E_M[D(P_{Z^n|M} ‖ Q^{⊗n})]`, the upper bound on [`exact_leakage`].
pub fn leakage_bound(cb: &Codebook, mac: &MacChannel, target: &TargetOutput) -> Result<f64> {
    check_target_support(mac, target)?;
    let per_message = message_outputs(cb, mac)?;
    Ok(leakage_and_bound(&per_message, &target.q_z.power(cb.n))?.1)
}
