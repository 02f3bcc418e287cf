//! Entropy, divergence, the divergence–distance sandwich, and the block
//! chain decomposition of an output divergence.

use cribmac::prob::{block_chain_terms, divergence_bound, entropy, kl_divergence, variational_distance, ProbVector};
use cribmac::sampling::{random_prob_vector, rng_from};

fn main() -> cribmac::Result<()> {
    let fair = ProbVector::uniform(2);
    let skew = ProbVector::new(vec![0.75, 0.25])?;
    println!(
        "H(fair) = {:.6} bits, H(skew) = {:.6} bits",
        entropy(&fair),
        entropy(&skew)
    );
    println!(
        "D(skew‖fair) = {:.6}, V = {:.6}",
        kl_divergence(&skew, &fair)?,
        variational_distance(&skew, &fair)
    );
    let (v, upper) = divergence_bound(&skew, &fair)?;
    let pinsker = v * v / (2.0 * std::f64::consts::LN_2);
    println!("sandwich: {pinsker:.6} ≤ D ≤ {upper:.6}");

    // A random law on two blocks of two binary letters against i.i.d. fair bits.
    let mut rng = rng_from(1);
    let p = random_prob_vector(&mut rng, 16);
    let t = block_chain_terms(&p, &fair, 2, 2)?;
    println!(
        "D(P‖Q⊗4) = {:.6} = Σ per-block {:?} + Σ cross {:?} (residual {:.1e})",
        t.total_kl,
        t.per_block_kl,
        t.cross_mi,
        t.residual()
    );
    Ok(())
}
