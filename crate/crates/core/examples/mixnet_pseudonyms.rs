//! Five parties register keys, a three-server chain turns them into
//! pseudonyms, and each party finds its own with nothing but its secret key.

use crex::group::{GroupParams, GroupPreset};
use crex::mixnet::{find_own_pseudonym, random_chain, reveal_exponents, run_chain, verify_revealed_chain, MixInput};
use crex::rng::RngFactory;
use crex::trials::distinct_keys;

fn main() {
    let params = GroupParams::preset(GroupPreset::Test16);
    let mut rng = RngFactory::new(7).fork("example/mixnet");
    let keys = distinct_keys(&params, 5, &mut rng);
    let pks: Vec<_> = keys.iter().map(|k| k.pk.clone()).collect();

    let servers = random_chain(&params, 3, pks.len(), &mut rng);
    let out = run_chain(&params, &servers, &MixInput::plain(b"example", &pks)).expect("mix");

    println!("final generator h = {}", out.h().value());
    for (i, k) in keys.iter().enumerate() {
        let j = find_own_pseudonym(&params, &k.sk, &out).expect("own pseudonym");
        println!("party {i}: pk {:>5} -> pseudonym #{j} = {}", k.pk.value(), out.pseudonyms()[j].value());
    }

    // after the exam the servers publish their exponents
    let exps = reveal_exponents(&servers);
    println!("chain verifies against revealed exponents: {}", verify_revealed_chain(&params, &pks, &out, &exps));
}
