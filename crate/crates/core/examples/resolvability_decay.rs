//! Expected output divergence of random degraded-message-set codes on the
//! XOR MAC, above and below the sum-rate threshold.

use cribmac::model::{induced_output, CribbingScenario, InputLaw, MacChannel, TargetOutput};
use cribmac::resolvability::{mc_expected_kl, CodebookConfig};

fn main() -> cribmac::Result<()> {
    let mac = MacChannel::xor();
    let law = InputLaw::uniform(2, 2);
    let target = TargetOutput {
        q_z: induced_output(&mac, &law)?,
    };
    for (r1, r2) in [(0.3, 1.0), (0.0, 0.7)] {
        println!("rates ({r1}, {r2}):");
        for n in [2, 4, 6, 8] {
            let cfg = CodebookConfig {
                scenario: CribbingScenario::DegradedMessageSets,
                n,
                r1,
                r2,
                law: law.clone(),
                seed: 42 + n as u64,
            };
            let rep = mc_expected_kl(&cfg, &mac, &target, 100)?;
            println!("  n = {n}: E[D] = {:.4} ± {:.4} bits", rep.mean, rep.stderr);
        }
    }
    Ok(())
}
