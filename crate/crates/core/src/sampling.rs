//! Seed derivation and random instances (laws, channels, same-output pairs).
//!
//! Every random object in the crate is drawn from a [`ChaCha8Rng`] seeded via
//! [`derive_seed`], so results never depend on scheduling or ambient entropy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{induced_output, InputLaw, MacChannel, WiretapMac};
use crate::prob::{Kernel, ProbVector};

/// One round of the splitmix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Child seed for component `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Child seed keyed by a stream name, so independent components of one run
/// never share randomness.
pub fn stream_seed(seed: u64, stream: &str) -> u64 {
    stream
        .bytes()
        .fold(splitmix64(seed), |acc, b| splitmix64(acc ^ u64::from(b)))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from the probability simplex (flat Dirichlet via normalized
/// exponentials).
pub fn random_prob_vector<R: Rng + ?Sized>(rng: &mut R, size: usize) -> ProbVector {
    let w: Vec<f64> = (0..size).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    ProbVector::from_weights(w).expect("exponential weights are positive")
}

pub fn random_kernel<R: Rng + ?Sized>(rng: &mut R, inputs: usize, outputs: usize) -> Kernel {
    Kernel::new((0..inputs).map(|_| random_prob_vector(rng, outputs)).collect()).expect("uniform rows")
}

pub fn random_mac<R: Rng + ?Sized>(rng: &mut R, x1: usize, x2: usize, z: usize) -> MacChannel {
    MacChannel::new(x1, x2, z, random_kernel(rng, x1 * x2, z)).expect("consistent sizes")
}

pub fn random_wiretap<R: Rng + ?Sized>(rng: &mut R, x1: usize, x2: usize, y: usize, z: usize) -> WiretapMac {
    WiretapMac::new(x1, x2, y, z, random_kernel(rng, x1 * x2, y * z)).expect("consistent sizes")
}

pub fn random_joint_law<R: Rng + ?Sized>(rng: &mut R, x1: usize, x2: usize) -> InputLaw {
    InputLaw::joint(x1, x2, random_prob_vector(rng, x1 * x2).into_vec()).expect("valid joint")
}

pub fn random_aux_law<R: Rng + ?Sized>(rng: &mut R, u: usize, x1: usize, x2: usize) -> InputLaw {
    InputLaw::with_aux(
        random_prob_vector(rng, u),
        random_kernel(rng, u, x1),
        random_kernel(rng, u, x2),
    )
    .expect("consistent sizes")
}

/// A Joint law different from `law` (generically) that induces the same
/// output statistics through `mac`.
///
/// Moves along a random direction in the null space of the linear map
/// `P ↦ (Σ P, P·W)`; if that space is trivial the law is returned unchanged.
pub fn same_output_joint_partner<R: Rng + ?Sized>(rng: &mut R, mac: &MacChannel, law: &InputLaw) -> Result<InputLaw> {
    let p = law.x_joint().probs().to_vec();
    let k = p.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut constraints = vec![vec![1.0; k]];
    for z in 0..mac.z_size {
        constraints.push((0..k).map(|x| mac.w.prob(x, z)).collect());
    }
    for mut c in constraints {
        for e in &basis {
            let dot: f64 = c.iter().zip(e).map(|(a, b)| a * b).sum();
            c.iter_mut().zip(e).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = c.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-10 {
            basis.push(c.into_iter().map(|a| a / norm).collect());
        }
    }
    let mut d: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    for e in &basis {
        let dot: f64 = d.iter().zip(e).map(|(a, b)| a * b).sum();
        d.iter_mut().zip(e).for_each(|(a, b)| *a -= dot * b);
    }
    let t_max = p
        .iter()
        .zip(&d)
        .filter(|(_, di)| **di < -1e-15)
        .map(|(pi, di)| pi / -di)
        .fold(f64::INFINITY, f64::min);
    if !t_max.is_finite() || d.iter().all(|x| x.abs() < 1e-12) {
        return Ok(law.to_joint());
    }
    let t = t_max * rng.random_range(0.1..0.9);
    let q: Vec<f64> = p.iter().zip(&d).map(|(pi, di)| (pi + t * di).max(0.0)).collect();
    InputLaw::joint(law.x1_size(), law.x2_size(), ProbVector::from_weights(q)?.into_vec())
}

/// A WithAux law with `u_size` random components (plus at most one borrowed
/// from `law`) whose output matches `law`'s. Binary `Z` only.
pub fn same_output_aux_partner<R: Rng + ?Sized>(
    rng: &mut R,
    mac: &MacChannel,
    law: &InputLaw,
    u_size: usize,
) -> Result<InputLaw> {
    if mac.z_size != 2 {
        return Err(Error::DimensionMismatch(
            "same-output auxiliary partners are only generated for binary Z".into(),
        ));
    }
    let InputLaw::WithAux {
        p_x1_given_u,
        p_x2_given_u,
        ..
    } = law
    else {
        return Err(Error::LawVariant {
            scenario: "same-output auxiliary partner".into(),
            reason: "reference law must carry an auxiliary".into(),
        });
    };
    let target = induced_output(mac, law)?.get(0);
    let q0 = |a: &ProbVector, b: &ProbVector| -> f64 {
        let prod = InputLaw::product(a, b);
        induced_output(mac, &prod).expect("sizes").get(0)
    };
    let mut rows1: Vec<ProbVector> = Vec::new();
    let mut rows2: Vec<ProbVector> = Vec::new();
    let mut levels: Vec<f64> = Vec::new();
    for _ in 0..u_size.max(1) {
        let a = random_prob_vector(rng, mac.x1_size);
        let b = random_prob_vector(rng, mac.x2_size);
        levels.push(q0(&a, &b));
        rows1.push(a);
        rows2.push(b);
    }
    // The reference law's components straddle its own output level, so one
    // of them can always close the gap.
    let has_above = levels.iter().any(|l| *l >= target);
    let has_below = levels.iter().any(|l| *l <= target);
    if !(has_above && has_below) {
        let want_above = !has_above;
        let donor = (0..p_x1_given_u.input_size())
            .map(|u| (u, q0(p_x1_given_u.row(u), p_x2_given_u.row(u))))
            .filter(|(_, l)| if want_above { *l >= target } else { *l <= target })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("components of a law straddle its output level");
        rows1.push(p_x1_given_u.row(donor.0).clone());
        rows2.push(p_x2_given_u.row(donor.0).clone());
        levels.push(donor.1);
    }
    let mut w: Vec<f64> = random_prob_vector(rng, levels.len()).into_vec();
    let mean: f64 = w.iter().zip(&levels).map(|(a, b)| a * b).sum();
    let pick = |above: bool| -> usize {
        let cmp = |a: &(usize, &f64), b: &(usize, &f64)| a.1.total_cmp(b.1);
        let it = levels.iter().enumerate();
        if above {
            it.max_by(cmp).unwrap().0
        } else {
            it.min_by(cmp).unwrap().0
        }
    };
    let anchor = pick(mean < target);
    let gap = mean - levels[anchor];
    if gap.abs() > 1e-15 {
        let alpha = (target - levels[anchor]) / gap;
        w.iter_mut().for_each(|x| *x *= alpha);
        w[anchor] += 1.0 - alpha;
    }
    InputLaw::with_aux(ProbVector::from_weights(w)?, Kernel::new(rows1)?, Kernel::new(rows2)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_and_repeat() {
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        assert_ne!(derive_seed(7, 3), derive_seed(7, 4));
        assert_ne!(derive_seed(7, 3), derive_seed(8, 3));
        assert_ne!(stream_seed(1, "a"), stream_seed(1, "b"));
    }

    #[test]
    fn joint_partner_keeps_output() {
        let mut rng = rng_from(11);
        for _ in 0..50 {
            let mac = random_mac(&mut rng, 2, 2, 2);
            let a = random_joint_law(&mut rng, 2, 2);
            let b = same_output_joint_partner(&mut rng, &mac, &a).unwrap();
            let qa = induced_output(&mac, &a).unwrap();
            let qb = induced_output(&mac, &b).unwrap();
            assert!(qa.max_abs_diff(&qb) < 1e-12);
        }
    }

    #[test]
    fn aux_partner_keeps_output() {
        let mut rng = rng_from(12);
        for _ in 0..50 {
            let mac = random_mac(&mut rng, 2, 2, 2);
            let a = random_aux_law(&mut rng, 2, 2, 2);
            let b = same_output_aux_partner(&mut rng, &mac, &a, 2).unwrap();
            let qa = induced_output(&mac, &a).unwrap();
            let qb = induced_output(&mac, &b).unwrap();
            assert!(qa.max_abs_diff(&qb) < 1e-12, "{qa:?} vs {qb:?}");
        }
    }
}
