//! Control experiment: the same candidate game on a board that lists every
//! answered test next to its pseudonym. The revealed key now pins down the
//! real test and the fabricated one is caught.

use crex::coercion::published_answers_game;
use crex::config::RunConfig;

fn main() {
    let mut caught = 0;
    for seed in 0..20 {
        let cfg = RunConfig { n: 4, seed, ..RunConfig::default() };
        let g = published_answers_game(&cfg).expect("game");
        if seed == 0 {
            println!("real: {:?}", g.real.checks);
            println!("fake: {:?} ({})", g.fake.checks, g.fake.reason.as_deref().unwrap_or(""));
        }
        caught += usize::from(g.real.is_consistent() && !g.fake.is_consistent());
    }
    println!("fabricated test caught in {caught}/20 games");
}
