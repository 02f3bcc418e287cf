//! Exact finite-alphabet probability and information measures.
//!
//! All logarithms are base 2. Conventions: `0 log 0 = 0`; a term `p log(p/0)`
//! with `p > 0` is an [`Error::AbsoluteContinuityViolation`], never `+inf`.
//! Validation happens once, at construction, with tolerance [`PROB_TOL`];
//! nothing in this module renormalizes silently.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum - 1|` when validating a probability vector.
pub const PROB_TOL: f64 = 1e-12;

/// Negative mutual information down to `-MI_SLACK` is clamped to zero.
pub const MI_SLACK: f64 = 1e-12;

/// Compensated (Neumaier) summation.
pub fn stable_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn validate_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty alphabet".into()));
    }
    if let Some((i, &p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "entry {i} = {p} is negative or not finite"
        )));
    }
    let total = stable_sum(probs.iter().copied());
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidDistribution(format!("entries sum to {total:.17}, not 1")));
    }
    Ok(())
}

/// A probability mass function over `{0, .., len-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbVector {
    probs: Vec<f64>,
}

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_probs(&probs)?;
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights. This is an explicit request, not a
    /// silent repair.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total = stable_sum(weights.iter().copied());
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform distribution over an empty alphabet");
        Self {
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn point_mass(size: usize, at: usize) -> Self {
        assert!(at < size, "point mass outside alphabet");
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn get(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    /// Smallest strictly positive mass.
    pub fn min_positive(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .filter(|p| *p > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// The i.i.d. product `self^{⊗n}`; sequence index is big-endian in the
    /// symbols (first symbol most significant).
    pub fn power(&self, n: usize) -> ProbVector {
        let mut out = vec![1.0];
        for _ in 0..n {
            out = out.iter().flat_map(|a| self.probs.iter().map(move |b| a * b)).collect();
        }
        ProbVector { probs: out }
    }

    /// Max-abs distance to another vector on the same alphabet.
    pub fn max_abs_diff(&self, other: &ProbVector) -> f64 {
        assert_eq!(self.len(), other.len(), "alphabet sizes differ");
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl<'de> Deserialize<'de> for ProbVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(d)?;
        ProbVector::new(probs).map_err(serde::de::Error::custom)
    }
}

/// A conditional law: one [`ProbVector`] per conditioning symbol, all over
/// the same output alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Kernel {
    rows: Vec<ProbVector>,
}

impl Kernel {
    pub fn new(rows: Vec<ProbVector>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidDistribution("kernel has no rows".into()));
        };
        let out = first.len();
        if let Some(i) = rows.iter().position(|r| r.len() != out) {
            return Err(Error::DimensionMismatch(format!(
                "kernel row {i} has {} outputs, expected {out}",
                rows[i].len()
            )));
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| ProbVector::new(r).map_err(|e| Error::InvalidDistribution(format!("kernel row {i}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn row(&self, input: usize) -> &ProbVector {
        &self.rows[input]
    }

    pub fn rows(&self) -> &[ProbVector] {
        &self.rows
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.rows[input].get(output)
    }

    /// Output distribution for an input distribution.
    pub fn push_forward(&self, input: &ProbVector) -> Result<ProbVector> {
        if input.len() != self.input_size() {
            return Err(Error::DimensionMismatch(format!(
                "input law over {} symbols, kernel has {} rows",
                input.len(),
                self.input_size()
            )));
        }
        let mut out = vec![0.0; self.output_size()];
        for (p, row) in input.as_slice().iter().zip(&self.rows) {
            for (o, w) in out.iter_mut().zip(row.as_slice()) {
                *o += p * w;
            }
        }
        ProbVector::new(out)
    }
}

/// Dense joint distribution over a product of labelled finite alphabets,
/// stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointTable {
    labels: Vec<String>,
    shape: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new<S: Into<String>>(labels: Vec<S>, shape: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != shape.len() {
            return Err(Error::Axis(format!("{} labels for {} axes", labels.len(), shape.len())));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Axis(format!("duplicate axis label {l:?}")));
            }
        }
        if shape.contains(&0) {
            return Err(Error::Axis("zero-sized axis".into()));
        }
        let size: usize = shape.iter().product();
        if size != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "shape {shape:?} holds {size} cells, got {}",
                probs.len()
            )));
        }
        validate_probs(&probs)?;
        Ok(Self { labels, shape, probs })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn axis(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Axis(format!("unknown axis {label:?} (have {:?})", self.labels)))
    }

    pub fn axis_size(&self, label: &str) -> Result<usize> {
        Ok(self.shape[self.axis(label)?])
    }

    fn strides(shape: &[usize]) -> Vec<usize> {
        let mut strides = vec![1; shape.len()];
        for i in (0..shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * shape[i + 1];
        }
        strides
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let strides = Self::strides(&self.shape);
        let flat: usize = index.iter().zip(&strides).map(|(i, s)| i * s).sum();
        self.probs[flat]
    }

    /// Marginal on the named axes, in the order given.
    pub fn marginal(&self, keep: &[&str]) -> Result<JointTable> {
        let axes = keep.iter().map(|l| self.axis(l)).collect::<Result<Vec<_>>>()?;
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].contains(a) {
                return Err(Error::Axis(format!("axis {:?} listed twice", keep[i])));
            }
        }
        let probs = self.marginal_flat(&axes);
        let shape = axes.iter().map(|a| self.shape[*a]).collect();
        let labels = axes.iter().map(|a| self.labels[*a].clone()).collect();
        Ok(JointTable { labels, shape, probs })
    }

    /// Marginal as a flat vector over the mixed-radix index of `axes`.
    fn marginal_flat(&self, axes: &[usize]) -> Vec<f64> {
        let out_shape: Vec<usize> = axes.iter().map(|a| self.shape[*a]).collect();
        let out_strides = Self::strides(&out_shape);
        let size: usize = out_shape.iter().product();
        let mut out = vec![0.0; size];
        let mut idx = vec![0usize; self.shape.len()];
        for &p in &self.probs {
            if p != 0.0 {
                let flat: usize = axes.iter().zip(&out_strides).map(|(a, s)| idx[*a] * s).sum();
                out[flat] += p;
            }
            for d in (0..idx.len()).rev() {
                idx[d] += 1;
                if idx[d] < self.shape[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        out
    }

    /// Flattens the whole table into a [`ProbVector`] (row-major).
    pub fn to_prob_vector(&self) -> ProbVector {
        ProbVector {
            probs: self.probs.clone(),
        }
    }

    /// Marginal on the named axes as a [`ProbVector`] over their joint index.
    pub fn marginal_vector(&self, keep: &[&str]) -> Result<ProbVector> {
        Ok(self.marginal(keep)?.to_prob_vector())
    }

    /// Joint entropy of the named axes (empty set gives 0).
    pub fn entropy_of(&self, axes: &[&str]) -> Result<f64> {
        if axes.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy(&self.marginal_vector(axes)?))
    }

    /// `H(A | C)`.
    pub fn conditional_entropy(&self, a: &[&str], c: &[&str]) -> Result<f64> {
        check_disjoint(self, &[a, c])?;
        let joint: Vec<&str> = a.iter().chain(c).copied().collect();
        Ok((self.entropy_of(&joint)? - self.entropy_of(c)?).max(0.0))
    }

    /// Probability-weighted mixture `λ·self + (1-λ)·other` on identical axes.
    pub fn mix(&self, other: &JointTable, lambda: f64) -> Result<JointTable> {
        if self.labels != other.labels || self.shape != other.shape {
            return Err(Error::DimensionMismatch("mixing tables with different axes".into()));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        JointTable::new(self.labels.clone(), self.shape.clone(), probs)
    }
}

fn check_disjoint(joint: &JointTable, sets: &[&[&str]]) -> Result<()> {
    let mut seen: Vec<usize> = Vec::new();
    for set in sets {
        for l in *set {
            let a = joint.axis(l)?;
            if seen.contains(&a) {
                return Err(Error::Axis(format!("axis {l:?} appears in more than one set")));
            }
            seen.push(a);
        }
    }
    Ok(())
}

/// `H(p) = -Σ p log₂ p`.
pub fn entropy(p: &ProbVector) -> f64 {
    -p.as_slice()
        .iter()
        .filter(|x| **x > 0.0)
        .map(|x| x * x.log2())
        .sum::<f64>()
}

/// `D(p‖q)` in bits.
pub fn kl_divergence(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "KL between alphabets of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    let mut terms = Vec::with_capacity(p.len());
    for (symbol, (&a, &b)) in p.as_slice().iter().zip(q.as_slice()).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::AbsoluteContinuityViolation { symbol, p: a });
            }
            terms.push(a * (a / b).log2());
        }
    }
    Ok(stable_sum(terms).max(0.0))
}

/// `V(p, q) = Σ |p - q|`, in `[0, 2]`.
///
/// Panics if the alphabets differ.
pub fn variational_distance(p: &ProbVector, q: &ProbVector) -> f64 {
    assert_eq!(p.len(), q.len(), "variational distance across alphabets");
    stable_sum(p.as_slice().iter().zip(q.as_slice()).map(|(a, b)| (a - b).abs()))
}

/// `I(A; B | C)` from exact marginals of `joint`. `c` may be empty.
pub fn mutual_information(joint: &JointTable, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Axis("mutual information needs nonempty A and B".into()));
    }
    check_disjoint(joint, &[a, b, c])?;
    let order: Vec<&str> = a.iter().chain(b).chain(c).copied().collect();
    let m = joint.marginal(&order)?;
    let size = |set: &[&str]| -> usize { set.iter().map(|l| joint.axis_size(l).unwrap()).product() };
    let (na, nb, nc) = (size(a), size(b), size(c));
    let p = m.probs();
    let at = |i: usize, j: usize, k: usize| p[(i * nb + j) * nc + k];

    let mut p_ac = vec![0.0; na * nc];
    let mut p_bc = vec![0.0; nb * nc];
    let mut p_c = vec![0.0; nc];
    for i in 0..na {
        for j in 0..nb {
            for k in 0..nc {
                let v = at(i, j, k);
                p_ac[i * nc + k] += v;
                p_bc[j * nc + k] += v;
                p_c[k] += v;
            }
        }
    }
    let mut terms = Vec::new();
    for i in 0..na {
        for j in 0..nb {
            for k in 0..nc {
                let v = at(i, j, k);
                if v > 0.0 {
                    terms.push(v * ((v * p_c[k]) / (p_ac[i * nc + k] * p_bc[j * nc + k])).log2());
                }
            }
        }
    }
    let mi = stable_sum(terms);
    if mi < -MI_SLACK {
        return Err(Error::NegativeInformation(mi));
    }
    Ok(mi.max(0.0))
}

/// Returns `(V(p,q), log₂(1/μ)·V(p,q))` where `μ` is the smallest positive
/// mass of `q`. The second value upper-bounds `D(p‖q)`.
pub fn divergence_bound(p: &ProbVector, q: &ProbVector) -> Result<(f64, f64)> {
    let d = kl_divergence(p, q)?;
    let v = variational_distance(p, q);
    let mu = q.min_positive();
    let bound = (1.0 / mu).log2() * v;
    debug_assert!(
        d <= bound + 1e-12,
        "divergence {d} exceeds the log(1/mu)·V bound {bound}"
    );
    Ok((v, bound))
}

/// Parameters of ε-strong typicality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalityParams {
    pub epsilon: f64,
    pub n: usize,
}

impl TypicalityParams {
    pub fn new(epsilon: f64, n: usize) -> Result<Self> {
        // ε ≥ 1 is allowed: at desk-scale lengths it is the only way a
        // sequence can miss a positive-probability cell and stay typical.
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "typicality epsilon {epsilon} must be positive and finite"
            )));
        }
        if n == 0 {
            return Err(Error::Config("typicality length n must be at least 1".into()));
        }
        Ok(Self { epsilon, n })
    }
}

fn typical_counts(counts: &[usize], p: &[f64], n: usize, epsilon: f64) -> bool {
    counts
        .iter()
        .zip(p)
        .all(|(&c, &pa)| (c as f64 / n as f64 - pa).abs() <= epsilon * pa)
}

/// `|N(a|xⁿ)/n − p(a)| ≤ ε·p(a)` for every symbol `a`.
pub fn is_strongly_typical(seq: &[usize], p: &ProbVector, params: &TypicalityParams) -> Result<bool> {
    if seq.len() != params.n {
        return Err(Error::LengthMismatch {
            expected: params.n,
            got: seq.len(),
        });
    }
    let mut counts = vec![0usize; p.len()];
    for &s in seq {
        if s >= p.len() {
            return Err(Error::DimensionMismatch(format!(
                "symbol {s} outside alphabet of size {}",
                p.len()
            )));
        }
        counts[s] += 1;
    }
    Ok(typical_counts(&counts, p.as_slice(), params.n, params.epsilon))
}

/// Joint strong typicality of aligned sequences, one per axis of `joint`
/// (in axis order).
pub fn is_jointly_typical(seqs: &[&[usize]], joint: &JointTable, params: &TypicalityParams) -> Result<bool> {
    if seqs.len() != joint.shape().len() {
        return Err(Error::Axis(format!(
            "{} sequences for a table with {} axes",
            seqs.len(),
            joint.shape().len()
        )));
    }
    if let Some(s) = seqs.iter().find(|s| s.len() != params.n) {
        return Err(Error::LengthMismatch {
            expected: params.n,
            got: s.len(),
        });
    }
    let strides = JointTable::strides(joint.shape());
    let mut counts = vec![0usize; joint.probs().len()];
    for i in 0..params.n {
        let mut flat = 0;
        for (axis, s) in seqs.iter().enumerate() {
            if s[i] >= joint.shape()[axis] {
                return Err(Error::DimensionMismatch(format!(
                    "symbol {} outside axis {axis} of size {}",
                    s[i],
                    joint.shape()[axis]
                )));
            }
            flat += s[i] * strides[axis];
        }
        counts[flat] += 1;
    }
    Ok(typical_counts(&counts, joint.probs(), params.n, params.epsilon))
}

/// Terms of the block chain rule
/// `D(P‖Q^{⊗rB}) = Σ_b D(P_{Z_b}‖Q^{⊗r}) + Σ_b I(Z_b; Z_{b+1..B})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockChainTerms {
    pub total_kl: f64,
    pub per_block_kl: Vec<f64>,
    pub cross_mi: Vec<f64>,
}

impl BlockChainTerms {
    /// `total − Σ per-block − Σ cross`; zero up to rounding.
    pub fn residual(&self) -> f64 {
        self.total_kl - self.per_block_kl.iter().sum::<f64>() - self.cross_mi.iter().sum::<f64>()
    }
}

/// Splits a law on `Z^{rB}` (big-endian sequence index) into `B` blocks of
/// `r` symbols and computes both sides of the block chain rule against the
/// product reference `q^{⊗rB}`.
pub fn block_chain_terms(p: &ProbVector, q: &ProbVector, r: usize, blocks: usize) -> Result<BlockChainTerms> {
    let block_size = q.len().pow(r as u32);
    let expected = block_size.pow(blocks as u32);
    if p.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "law over {} sequences, expected |Z|^(rB) = {expected}",
            p.len()
        )));
    }
    let labels: Vec<String> = (0..blocks).map(|b| format!("Z{b}")).collect();
    let table = JointTable::new(labels.clone(), vec![block_size; blocks], p.as_slice().to_vec())?;
    let total_kl = kl_divergence(p, &q.power(r * blocks))?;
    let q_block = q.power(r);
    let mut per_block_kl = Vec::with_capacity(blocks);
    let mut cross_mi = Vec::with_capacity(blocks);
    for b in 0..blocks {
        per_block_kl.push(kl_divergence(&table.marginal_vector(&[&labels[b]])?, &q_block)?);
        let rest: Vec<&str> = labels[b + 1..].iter().map(String::as_str).collect();
        cross_mi.push(if rest.is_empty() {
            0.0
        } else {
            mutual_information(&table, &[&labels[b]], &rest, &[])?
        });
    }
    Ok(BlockChainTerms {
        total_kl,
        per_block_kl,
        cross_mi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&ProbVector::uniform(2)), 1.0, epsilon = 1e-12);
        assert_eq!(entropy(&ProbVector::point_mass(3, 1)), 0.0);
        // -(3/4)log2(3/4) - (1/4)log2(1/4) = 2 - (3/4)log2(3)
        let h = 2.0 - 0.75 * 3f64.log2();
        assert_abs_diff_eq!(entropy(&pv(&[0.75, 0.25])), h, epsilon = 1e-12);
        assert_abs_diff_eq!(h, 0.8112781245, epsilon = 1e-10);
    }

    #[test]
    fn kl_examples() {
        let p = pv(&[0.5, 0.5]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        // 0.5 log2(2) + 0.5 log2(2/3) = 1 - 0.5 log2 3
        let d = kl_divergence(&p, &pv(&[0.25, 0.75])).unwrap();
        assert_abs_diff_eq!(d, 1.0 - 0.5 * 3f64.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(d, 0.2075187496, epsilon = 1e-10);
        assert!(matches!(
            kl_divergence(&p, &pv(&[1.0, 0.0])),
            Err(Error::AbsoluteContinuityViolation { symbol: 1, .. })
        ));
    }

    #[test]
    fn variational_examples() {
        let p = pv(&[0.5, 0.5]);
        assert_eq!(variational_distance(&p, &p), 0.0);
        assert_eq!(
            variational_distance(&ProbVector::point_mass(2, 0), &ProbVector::point_mass(2, 1)),
            2.0
        );
        assert_abs_diff_eq!(variational_distance(&p, &pv(&[0.25, 0.75])), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn construction_rejects_bad_vectors() {
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![1.5, -0.5]).is_err());
        assert!(ProbVector::new(vec![]).is_err());
        assert!(ProbVector::new(vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(ProbVector::new(vec![0.5, 0.5 + 1e-11]).is_err());
    }

    fn xor_triple() -> JointTable {
        let mut probs = vec![0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                probs[(a * 2 + b) * 2 + (a ^ b)] = 0.25;
            }
        }
        JointTable::new(vec!["A", "B", "C"], vec![2, 2, 2], probs).unwrap()
    }

    #[test]
    fn mutual_information_examples() {
        let indep = JointTable::new(vec!["A", "B"], vec![2, 2], vec![0.25; 4]).unwrap();
        assert_eq!(mutual_information(&indep, &["A"], &["B"], &[]).unwrap(), 0.0);
        let equal = JointTable::new(vec!["A", "B"], vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(
            mutual_information(&equal, &["A"], &["B"], &[]).unwrap(),
            1.0,
            epsilon = 1e-12
        );

        let t = xor_triple();
        assert_abs_diff_eq!(
            mutual_information(&t, &["A"], &["C"], &[]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            mutual_information(&t, &["A", "B"], &["C"], &[]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            mutual_information(&t, &["A"], &["C"], &["B"]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn mutual_information_axis_errors() {
        let t = xor_triple();
        assert!(matches!(
            mutual_information(&t, &["A"], &["D"], &[]),
            Err(Error::Axis(_))
        ));
        assert!(matches!(
            mutual_information(&t, &["A"], &["A"], &[]),
            Err(Error::Axis(_))
        ));
        assert!(matches!(
            mutual_information(&t, &["A"], &["B"], &["B"]),
            Err(Error::Axis(_))
        ));
    }

    #[test]
    fn divergence_bound_examples() {
        let p = pv(&[0.5, 0.5]);
        assert_eq!(divergence_bound(&p, &p).unwrap(), (0.0, 0.0));
        let q = pv(&[0.25, 0.75]);
        let (v, bound) = divergence_bound(&p, &q).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(bound, 1.0, epsilon = 1e-15);
        assert!(kl_divergence(&p, &q).unwrap() <= bound);
    }

    #[test]
    fn typicality_examples() {
        let params = TypicalityParams::new(0.1, 4).unwrap();
        assert!(is_strongly_typical(&[1, 1, 1, 1], &ProbVector::point_mass(2, 1), &params).unwrap());
        assert!(is_strongly_typical(&[0, 1, 1, 0], &ProbVector::uniform(2), &params).unwrap());
        assert!(!is_strongly_typical(&[0, 0, 0, 1], &ProbVector::uniform(2), &params).unwrap());
        assert!(matches!(
            is_strongly_typical(&[0, 1], &ProbVector::uniform(2), &params),
            Err(Error::LengthMismatch { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn joint_typicality_matches_flattened_single_sequence() {
        let t = xor_triple();
        let params = TypicalityParams::new(0.5, 4).unwrap();
        let a = [0, 0, 1, 1];
        let b = [0, 1, 0, 1];
        let c = [0, 1, 1, 0];
        assert!(is_jointly_typical(&[&a, &b, &c], &t, &params).unwrap());
        let bad_c = [0, 0, 1, 0];
        assert!(!is_jointly_typical(&[&a, &b, &bad_c], &t, &params).unwrap());
    }

    #[test]
    fn marginal_reorders_axes() {
        let t = JointTable::new(vec!["A", "B"], vec![2, 3], vec![0.1, 0.2, 0.0, 0.3, 0.1, 0.3]).unwrap();
        let m = t.marginal(&["B", "A"]).unwrap();
        assert_eq!(m.shape(), &[3, 2]);
        assert_abs_diff_eq!(m.get(&[1, 0]), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(&[2, 1]), 0.3, epsilon = 1e-15);
        let b = t.marginal_vector(&["B"]).unwrap();
        assert_abs_diff_eq!(b.get(0), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn power_is_product() {
        let q = pv(&[0.25, 0.75]);
        let q2 = q.power(2);
        assert_eq!(q2.len(), 4);
        assert_abs_diff_eq!(q2.get(1), 0.25 * 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(q2.get(3), 0.75 * 0.75, epsilon = 1e-15);
    }

    #[test]
    fn block_chain_terms_on_product_law_have_no_cross_terms() {
        let q = pv(&[0.3, 0.7]);
        let p = pv(&[0.6, 0.4]).power(4);
        let terms = block_chain_terms(&p, &q, 2, 2).unwrap();
        assert!(terms.cross_mi.iter().all(|m| m.abs() < 1e-12));
        assert_abs_diff_eq!(terms.residual(), 0.0, epsilon = 1e-12);
    }
}
