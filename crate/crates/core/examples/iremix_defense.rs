//! Every key now carries a proof of knowledge of its secret. Forged entries
//! get the whole batch rejected; only someone who knows the target's secret
//! key can still inject.

use crex::attack::ForgeryStrategy;
use crex::group::{GroupParams, GroupPreset};
use crex::rng::RngFactory;
use crex::trials::{iremix_trial, proven_input, random_forgery_accepted};

fn main() {
    let params = GroupParams::preset(GroupPreset::Test16);
    let mut rng = RngFactory::new(5).fork("example/iremix");

    for strategy in [
        ForgeryStrategy::RandomTranscript,
        ForgeryStrategy::ProofOfShiftOnly,
        ForgeryStrategy::ReplayTargetProof,
        ForgeryStrategy::KnownSecret(params.scalar_u64(0)),
    ] {
        let t = iremix_trial(&params, 8, 2, &strategy, &mut rng).expect("trial");
        let what = if t.blocked { format!("blocked ({})", t.error.unwrap_or_default()) } else { "linked".into() };
        println!("{:<20} {what}", t.strategy);
    }

    // in a group of order 11 a random transcript passes about once in 11 tries
    let micro = GroupParams::preset(GroupPreset::Micro11);
    let (_, input) = proven_input(&micro, 3, &mut rng);
    let n = 10_000;
    let accepted = (0..n).filter(|_| random_forgery_accepted(&micro, &input, &mut rng)).count();
    println!("micro11: {accepted}/{n} random forgeries accepted ({:.4}, 1/11 = {:.4})", accepted as f64 / n as f64, 1.0 / 11.0);
}
