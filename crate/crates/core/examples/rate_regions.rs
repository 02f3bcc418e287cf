//! Per-law resolvability thresholds for every cribbing scenario, and the
//! union region over laws matching a target output.

use cribmac::model::{CribbingScenario, InputLaw, MacChannel, TargetOutput};
use cribmac::prob::ProbVector;
use cribmac::region::{resolvability_thresholds, union_region_estimate, DistributionSearchConfig, Instance};

fn main() -> cribmac::Result<()> {
    let mac = MacChannel::and();
    let law = InputLaw::uniform(2, 2);
    for scenario in [
        CribbingScenario::DegradedMessageSets,
        CribbingScenario::NonCausal,
        CribbingScenario::Causal,
    ] {
        let region = resolvability_thresholds(&mac, &law, scenario)?;
        println!("{scenario}:");
        for c in &region.constraints {
            println!("  {:>4}·R1 + {:>4}·R2 ≥ {:.10}  ({})", c.a1, c.a2, c.b, c.label);
        }
    }

    let aux = InputLaw::trivial_aux(&ProbVector::uniform(2), &ProbVector::uniform(2));
    let sc = resolvability_thresholds(&mac, &aux, CribbingScenario::StrictlyCausal)?;
    println!("strictly-causal (|U| = 1) vertices: {:?}", sc.vertices());

    let target = TargetOutput {
        q_z: ProbVector::new(vec![0.75, 0.25])?,
    };
    let cfg = DistributionSearchConfig {
        resolution: 12,
        samples: 100,
        seed: 3,
        ..Default::default()
    };
    let est = union_region_estimate(Instance::Mac(&mac), CribbingScenario::NonCausal, Some(&target), &cfg)?;
    println!(
        "non-causal union over {} matching laws (of {} candidates):",
        est.regions.len(),
        est.candidates
    );
    for p in &est.frontier {
        println!("  ({:.4}, {:.4})  {}", p.r1, p.r2, p.law_id);
    }
    Ok(())
}
