//! A degraded-message-set wiretap code: exact leakage, its resolvability
//! bound, and the receiver's error probability.

use cribmac::model::{CribbingScenario, InputLaw, MacChannel, WiretapMac};
use cribmac::region::{secrecy_region, RatePoint};
use cribmac::secrecy::{secrecy_witness, simulate_secrecy, Dither, SecrecyCodeConfig};

fn main() -> cribmac::Result<()> {
    let legit = MacChannel::deterministic(2, 2, 4, |a, b| 2 * a + b)?;
    let eve = MacChannel::new(
        2,
        2,
        2,
        cribmac::Kernel::from_rows(vec![vec![0.9, 0.1], vec![0.1, 0.9], vec![0.1, 0.9], vec![0.9, 0.1]])?,
    )?;
    let wmac = WiretapMac::from_marginals(&legit, &eve)?;
    let law = InputLaw::uniform(2, 2);
    let scenario = CribbingScenario::DegradedMessageSets;

    let region = secrecy_region(&wmac, &law, scenario)?;
    let pt = RatePoint::new(1.0 / 3.0, 1.0 / 3.0);
    println!("margin of {pt:?}: {:.4}", region.margin(pt));
    println!("witness: {:?}", secrecy_witness(&wmac, &law, scenario, pt)?);

    for n in [3, 6] {
        let cfg = SecrecyCodeConfig {
            scenario,
            n,
            blocks: 1,
            r1: pt.r1,
            r2: pt.r2,
            dither: Dither::Layered {
                r1p: 2.0 / 3.0,
                r2p: 0.0,
            },
            law: law.clone(),
            seed: 5,
            typicality_epsilon: 4.0,
        };
        let rep = simulate_secrecy(&cfg, &wmac)?;
        println!(
            "n = {n}: I(M;Z^n) = {:.4} ≤ {:.4}, P_e = {:.4}",
            rep.leakage_bits, rep.resolvability_bound_bits, rep.p_error
        );
    }
    Ok(())
}
