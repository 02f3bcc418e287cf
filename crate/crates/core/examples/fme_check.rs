//! Cross-check of the eliminated secrecy region against the system with
//! explicit dither rates, on a grid of rate pairs.

use cribmac::model::{CribbingScenario, InputLaw, WiretapMac};
use cribmac::region::fme_cross_check;

fn main() -> cribmac::Result<()> {
    let wmac = WiretapMac::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/wiretap_xor_bsc.json"))?;
    let law = InputLaw::uniform(2, 2);
    for scenario in [CribbingScenario::DegradedMessageSets, CribbingScenario::NonCausal] {
        let rep = fme_cross_check(&wmac, &law, scenario, 0.05, 0.01)?;
        println!(
            "{scenario}: {} grid points, {} members, {} mismatches, holds = {}",
            rep.points,
            rep.members,
            rep.mismatches.len(),
            rep.holds
        );
    }
    Ok(())
}
