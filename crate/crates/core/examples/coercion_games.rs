//! A coercer gets a party's real secret key during marking and checks the
//! story it is told against the board.

use crex::coercion::{candidate_game, examiner_game, GameOutcome};
use crex::config::RunConfig;

fn show(role: &str, g: &GameOutcome) {
    println!("{role} {}", g.party);
    for ((name, real), (_, fake)) in g.real.checks.iter().zip(&g.fake.checks) {
        println!("  {name:<26} real {real:<5} fabricated {fake}");
    }
    println!("  verdicts: real {:?}, fabricated {:?}", g.real.verdict, g.fake.verdict);
}

fn main() {
    let cfg = RunConfig { n: 6, m: 3, k: 3, d: 2, seed: 11, ..RunConfig::default() };
    let g = candidate_game(&cfg).expect("candidate game");
    show("candidate", &g);
    if let crex::coercion::ClaimSummary::Test { pairs } = &g.fake_evidence.claim {
        println!("  fabricated test: {pairs:?}");
    }
    show("examiner", &examiner_game(&cfg).expect("examiner game"));
}
