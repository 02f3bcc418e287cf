//! Causal cribbing through Shannon strategies: decompose a joint input law,
//! rebuild it, and compare the strategy-channel region with the non-causal
//! one.

use cribmac::block_markov::{causal_region_via_strategy, reconstruct, shannon_strategy_decompose, ShannonStrategies};
use cribmac::model::{CribbingScenario, InputLaw, MacChannel};
use cribmac::region::resolvability_thresholds;

fn main() -> cribmac::Result<()> {
    let law = InputLaw::joint(2, 2, vec![0.4, 0.1, 0.2, 0.3])?;
    let pstar = law.x_joint();
    let (p_x1, p_t) = shannon_strategy_decompose(&pstar)?;
    println!("P(x1) = {:?}\nP(t)  = {:?}", p_x1.as_slice(), p_t.as_slice());
    let back = reconstruct(&p_x1, &p_t, 2)?;
    println!("rebuilt joint {:?}", back.probs());

    let strat = ShannonStrategies::on_support(&pstar)?;
    println!("strategy tables {:?}", strat.table);

    let mac = MacChannel::and();
    let via = causal_region_via_strategy(&mac, &law)?;
    let direct = resolvability_thresholds(&mac, &law, CribbingScenario::NonCausal)?;
    println!("max threshold gap: {:?}", via.region.max_threshold_diff(&direct));
    println!("H(X1|Z) = {:.6}, extremal = {}", via.h_x1_given_z, via.extremal);
    Ok(())
}
