//! Linking every key to its pseudonym, in one poisoned session or one
//! session per target, and how the operation count grows with n.

use crex::attack::LinkageMode;
use crex::group::{GroupParams, GroupPreset};
use crex::rng::RngFactory;
use crex::trials::{linkage_trial, mode_name};

fn main() {
    let params = GroupParams::preset(GroupPreset::Test64);
    let factory = RngFactory::new(1);
    for mode in [LinkageMode::SingleSession, LinkageMode::PerTarget] {
        println!("{}", mode_name(mode));
        let mut prev: Option<u64> = None;
        for n in [8, 16, 32, 64] {
            let mut rng = factory.fork_indexed(mode_name(mode), n);
            let t = linkage_trial(&params, n, 2, mode, &mut rng).expect("linkage");
            let ratio = prev.map(|p| format!("{:.2}", t.group_ops as f64 / p as f64)).unwrap_or_else(|| "-".into());
            println!(
                "  n={n:>2}  links {}/{n}  ops {:>5}  x{ratio}  sessions {}",
                t.links_correct, t.group_ops, t.sessions
            );
            prev = Some(t.group_ops);
        }
    }
}
