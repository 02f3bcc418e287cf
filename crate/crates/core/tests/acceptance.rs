//! Acceptance criteria 1–10. Every test prints one verdict line (to the raw
//! stderr handle, so it shows even under captured output) and then asserts.
//! Oracles here are computed independently of the library's formulas.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use cribmac::block_markov::{
    causal_region_via_strategy, default_allocation, effective_rates, reconstruct, shannon_strategy_decompose,
    simulate_chain, BlockConfig, Coupling,
};
use cribmac::model::{full_joint, induced_output, CribbingScenario, InputLaw, MacChannel, TargetOutput, WiretapMac};
use cribmac::prob::{block_chain_terms, entropy, kl_divergence, JointTable, ProbVector};
use cribmac::region::{convexity_check, fme_cross_check, resolvability_thresholds};
use cribmac::resolvability::{exact_leakage, leakage_bound, mc_expected_kl, sample_codebook, CodebookConfig};
use cribmac::sampling::{
    random_aux_law, random_joint_law, random_mac, random_prob_vector, rng_from, same_output_aux_partner,
    same_output_joint_partner,
};
use rand::Rng;

fn verdict(id: u32, pass: bool, detail: &str, started: Instant) {
    let line = format!(
        "criterion {id:>2}: {} — {detail} ({:.2}s)\n",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

// Direct oracle for D(P_{Z^{rB}} ‖ Q^{⊗rB}) split by blocks: per-block
// divergences of the block marginals plus I(Z_b; Z_{b+1..B}), all computed
// by explicit index arithmetic.
fn chain_oracle(p: &[f64], q: &[f64], r: usize, blocks: usize) -> (f64, f64) {
    let z = q.len();
    let blk = z.pow(r as u32);
    let q_seq = |mut idx: usize, len: usize| {
        let mut prod = 1.0;
        for _ in 0..len {
            prod *= q[idx % z];
            idx /= z;
        }
        prod
    };
    let total: f64 = p
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| v * (v / q_seq(i, r * blocks)).log2())
        .sum();
    let mut parts = 0.0;
    for b in 0..blocks {
        // Split each sequence index into (this block, later blocks); block 0
        // is the most significant digit group.
        let later = blk.pow((blocks - 1 - b) as u32);
        let mut joint = vec![0.0; blk * later];
        for (i, v) in p.iter().enumerate() {
            let tail = i % (blk * later);
            joint[tail] += v;
        }
        let mut pb = vec![0.0; blk];
        let mut pl = vec![0.0; later];
        for (i, v) in joint.iter().enumerate() {
            pb[i / later] += v;
            pl[i % later] += v;
        }
        let d: f64 = pb
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(i, v)| v * (v / q_seq(i, r)).log2())
            .sum();
        let mi: f64 = joint
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(i, v)| v * (v / (pb[i / later] * pl[i % later])).log2())
            .sum();
        parts += d + mi;
    }
    (total, parts)
}

#[test]
fn criterion_01_information_measures() {
    let t0 = Instant::now();
    let h = entropy(&ProbVector::uniform(2));
    let mut rng = rng_from(101);
    let p = random_prob_vector(&mut rng, 5);
    let self_kl = kl_divergence(&p, &p).unwrap();
    let q = ProbVector::new(vec![0.5, 0.5]).unwrap();
    let mut worst: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for _ in 0..50 {
        // Joint law over (Z1^2, Z2^2), |Z| = 2: 16 sequences.
        let p = random_prob_vector(&mut rng, 16);
        let t = block_chain_terms(&p, &q, 2, 2).unwrap();
        worst = worst.max(t.residual().abs());
        let (total, parts) = chain_oracle(p.as_slice(), q.as_slice(), 2, 2);
        worst_oracle = worst_oracle.max((total - t.total_kl).abs()).max((total - parts).abs());
    }
    let pass = (h - 1.0).abs() <= 1e-12 && self_kl.abs() <= 1e-12 && worst <= 1e-9 && worst_oracle <= 1e-9;
    verdict(
        1,
        pass,
        &format!("H(1/2)={h}, D(p‖p)={self_kl:e}, chain residual {worst:.1e}, oracle gap {worst_oracle:.1e}"),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_02_threshold_correctness() {
    let t0 = Instant::now();
    let law = InputLaw::uniform(2, 2);
    let xor = resolvability_thresholds(&MacChannel::xor(), &law, CribbingScenario::DegradedMessageSets).unwrap();
    let and = resolvability_thresholds(&MacChannel::and(), &law, CribbingScenario::DegradedMessageSets).unwrap();
    // Z = X1 ∧ X2 with uniform inputs: H(Z) = h(1/4), H(Z|X1) = 1/2.
    let and_oracle = (h2(0.25) - 0.5, h2(0.25));
    let errs = [
        (xor.threshold("R1").unwrap() - 0.0).abs(),
        (xor.threshold("R1+R2").unwrap() - 1.0).abs(),
        (and.threshold("R1").unwrap() - and_oracle.0).abs(),
        (and.threshold("R1+R2").unwrap() - and_oracle.1).abs(),
        (and_oracle.0 - 0.3112781245).abs(),
        (and_oracle.1 - 0.8112781245).abs(),
    ];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    let pass = worst <= 1e-9;
    verdict(
        2,
        pass,
        &format!(
            "AND thresholds ({:.10}, {:.10}), max error {worst:.1e}",
            and.threshold("R1").unwrap(),
            and.threshold("R1+R2").unwrap()
        ),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_03_causal_equals_noncausal() {
    let t0 = Instant::now();
    let mut rng = rng_from(303);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mac = random_mac(&mut rng, 2, 2, 2);
        let law = random_joint_law(&mut rng, 2, 2);
        let c = resolvability_thresholds(&mac, &law, CribbingScenario::Causal).unwrap();
        let nc = resolvability_thresholds(&mac, &law, CribbingScenario::NonCausal).unwrap();
        let s = causal_region_via_strategy(&mac, &law).unwrap();
        worst = worst
            .max(c.max_threshold_diff(&nc).unwrap())
            .max(s.region.max_threshold_diff(&nc).unwrap());
    }
    let pass = worst <= 1e-12;
    verdict(3, pass, &format!("100 channels, max threshold gap {worst:.1e}"), t0);
    assert!(pass);
}

#[test]
fn criterion_04_convexity() {
    let t0 = Instant::now();
    let mut rng = rng_from(404);
    let mut checks = 0;
    let mut failures = 0;
    for scenario in [
        CribbingScenario::DegradedMessageSets,
        CribbingScenario::NonCausal,
        CribbingScenario::StrictlyCausal,
    ] {
        for _ in 0..50 {
            let mac = random_mac(&mut rng, 2, 2, 2);
            let (a, b) = if scenario == CribbingScenario::StrictlyCausal {
                let a = random_aux_law(&mut rng, 2, 2, 2);
                let b = same_output_aux_partner(&mut rng, &mac, &a, 2).unwrap();
                (a, b)
            } else {
                let a = random_joint_law(&mut rng, 2, 2);
                let b = same_output_joint_partner(&mut rng, &mac, &a).unwrap();
                (a, b)
            };
            for lambda in [0.25, 0.5, 0.75] {
                let rep = convexity_check(&mac, scenario, &a, &b, lambda).unwrap();
                checks += rep.rows.len();
                failures += rep.rows.iter().filter(|r| r.mixture > r.combination + 1e-9).count();
            }
        }
    }
    let pass = failures == 0;
    verdict(
        4,
        pass,
        &format!("{checks} threshold comparisons, {failures} violations"),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_05_resolvability_decay() {
    let t0 = Instant::now();
    let mac = MacChannel::xor();
    let law = InputLaw::uniform(2, 2);
    let target = TargetOutput {
        q_z: induced_output(&mac, &law).unwrap(),
    };
    let ns = [2, 4, 6, 8];
    let run = |r1: f64, r2: f64, seed: u64| -> Vec<f64> {
        ns.iter()
            .map(|&n| {
                let cfg = CodebookConfig {
                    scenario: CribbingScenario::DegradedMessageSets,
                    n,
                    r1,
                    r2,
                    law: law.clone(),
                    seed: seed + n as u64,
                };
                mc_expected_kl(&cfg, &mac, &target, 200).unwrap().mean
            })
            .collect()
    };
    let above = run(0.3, 1.0, 5000);
    let below = run(0.0, 0.7, 6000);
    let decreasing = above.windows(2).all(|w| w[1] < w[0]);
    let quartered = above[3] < above[0] / 4.0;
    let control = below.iter().zip(ns).all(|(m, n)| *m >= 0.2 * n as f64);
    let pass = decreasing && quartered && control;
    verdict(
        5,
        pass,
        &format!(
            "means {above:.4?} (decreasing: {decreasing}, n=2/n=8 ratio {:.2} vs required 4: {quartered}); \
             control {below:.4?} ≥ 0.2n: {control}",
            above[0] / above[3]
        ),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_06_leakage_bound() {
    let t0 = Instant::now();
    let mut rng = rng_from(606);
    let mut worst = f64::NEG_INFINITY;
    let scenarios = [
        CribbingScenario::NonCooperating,
        CribbingScenario::DegradedMessageSets,
        CribbingScenario::NonCausal,
    ];
    for k in 0..50 {
        let mac = random_mac(&mut rng, 2, 2, 2);
        let scenario = scenarios[k % scenarios.len()];
        let law = if scenario == CribbingScenario::NonCooperating {
            InputLaw::trivial_aux(&random_prob_vector(&mut rng, 2), &random_prob_vector(&mut rng, 2))
        } else {
            random_joint_law(&mut rng, 2, 2)
        };
        let cfg = CodebookConfig {
            scenario,
            n: rng.random_range(1..=3),
            r1: rng.random_range(0.2..1.0),
            r2: rng.random_range(0.2..1.0),
            law: law.clone(),
            seed: rng.random(),
        };
        let cb = sample_codebook(&cfg, &mac).unwrap();
        let target = TargetOutput {
            q_z: induced_output(&mac, &law).unwrap(),
        };
        let leak = exact_leakage(&cb, &mac).unwrap();
        let bound = leakage_bound(&cb, &mac, &target).unwrap();
        worst = worst.max(leak - bound);
    }
    let pass = worst <= 1e-9;
    verdict(
        6,
        pass,
        &format!("50 codebooks, max(leakage − bound) = {worst:.3e}"),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_07_strategy_round_trip() {
    let t0 = Instant::now();
    let mut rng = rng_from(707);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_prob_vector(&mut rng, 4);
        let joint = JointTable::new(vec!["X1", "X2"], vec![2, 2], p.as_slice().to_vec()).unwrap();
        let (p_x1, p_t) = shannon_strategy_decompose(&joint).unwrap();
        let back = reconstruct(&p_x1, &p_t, 2).unwrap();
        let err = back
            .probs()
            .iter()
            .zip(p.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    let pass = worst <= 1e-12;
    verdict(
        7,
        pass,
        &format!("100 joints, max reconstruction error {worst:.1e}"),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_08_block_markov_chain() {
    let t0 = Instant::now();
    let mac = MacChannel::xor();
    let law = InputLaw::trivial_aux(&ProbVector::uniform(2), &ProbVector::uniform(2));
    let alloc = default_allocation(&full_joint(&mac, &law).unwrap(), 0.1).unwrap();
    let mut residual: f64 = 0.0;
    let mut markov_slack = f64::NEG_INFINITY;
    for coupling in [Coupling::Ideal, Coupling::Estimated] {
        let cfg = BlockConfig {
            r: 2,
            blocks: 2,
            alloc,
            law: law.clone(),
            seed: 808,
            coupling,
            typicality_epsilon: 1.5,
        };
        let rep = simulate_chain(&cfg, &mac).unwrap();
        residual = residual.max(rep.chain_residual.abs());
        for m in &rep.markov {
            markov_slack = markov_slack.max(m.lhs - m.rhs);
        }
    }
    // γ = 0 keeps all of m1'' fresh for Encoder 1; γ = 1 hands all of it to
    // the recycled cooperative index.
    let (r0, r1, r2, r3) = (alloc.rho0, alloc.rho1, alloc.rho2, alloc.rho3);
    let g0 = effective_rates(&cribmac::block_markov::RhoAllocation { gamma: 0.0, ..alloc });
    let g1 = effective_rates(&cribmac::block_markov::RhoAllocation { gamma: 1.0, ..alloc });
    let corners = g0.r1 == r1 + r2 && g0.r2 == r3 - (r2 - r0) && g1.r1 == r1 + r0 && g1.r2 == r3;
    let pass = residual <= 1e-9 && markov_slack <= 1e-9 && corners;
    verdict(
        8,
        pass,
        &format!("chain residual {residual:.1e}, max Markov slack {markov_slack:.1e}, corners exact: {corners}"),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_09_fourier_motzkin() {
    let t0 = Instant::now();
    // Legitimate receiver sees X1 ⊕ X2; the eavesdropper sees it through a
    // BSC(0.3), so the degraded region is a nontrivial triangle.
    let legit = MacChannel::xor();
    let eve = MacChannel::new(
        2,
        2,
        2,
        cribmac::Kernel::from_rows(vec![vec![0.7, 0.3], vec![0.3, 0.7], vec![0.3, 0.7], vec![0.7, 0.3]]).unwrap(),
    )
    .unwrap();
    let wmac = WiretapMac::from_marginals(&legit, &eve).unwrap();
    let law = InputLaw::uniform(2, 2);
    let rep = fme_cross_check(&wmac, &law, CribbingScenario::DegradedMessageSets, 0.05, 0.01).unwrap();
    let pass = rep.holds && rep.mismatches.is_empty() && rep.members > 0;
    verdict(
        9,
        pass,
        &format!(
            "{} grid points, {} members, {} mismatches",
            rep.points,
            rep.members,
            rep.mismatches.len()
        ),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_10_cli_determinism() {
    let t0 = Instant::now();
    let bin = env!("CARGO_BIN_EXE_cribmac");
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let runs = [
        ("region", "region_xor_degraded.json"),
        ("region", "region_and_noncausal.json"),
        ("simulate", "simulate_xor_degraded.json"),
        ("secrecy", "secrecy_wiretap_degraded.json"),
        ("chain", "chain_xor.json"),
    ];
    let tmp = tempfile::tempdir().unwrap();
    let mut files = 0;
    let mut differing = Vec::new();
    for (cmd, cfg) in runs {
        let mut outs = Vec::new();
        for k in 0..2 {
            let out = tmp.path().join(format!("{cfg}-{k}"));
            let status = Command::new(bin)
                .args([cmd, "--config"])
                .arg(configs.join(cfg))
                .arg("--out")
                .arg(&out)
                .output()
                .unwrap();
            assert!(
                status.status.success(),
                "{cmd} {cfg}: {}",
                String::from_utf8_lossy(&status.stderr)
            );
            let mut names: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
            names.sort();
            outs.push(
                names
                    .iter()
                    .map(|p| (p.file_name().unwrap().to_owned(), std::fs::read(p).unwrap()))
                    .collect::<Vec<_>>(),
            );
        }
        files += outs[0].len();
        if outs[0] != outs[1] {
            differing.push(cfg);
        }
    }
    let pass = differing.is_empty() && t0.elapsed().as_secs() < 60;
    verdict(
        10,
        pass,
        &format!("{files} files over {} runs, differing: {differing:?}", runs.len()),
        t0,
    );
    assert!(pass);
}
