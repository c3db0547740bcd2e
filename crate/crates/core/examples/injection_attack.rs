//! The party forwarding the key list appends `L[i]·g^s` and learns which
//! pseudonym belongs to `L[i]`, with no server secrets.

use crex::attack::{targeted_attack, AdversaryView};
use crex::group::{GroupParams, GroupPreset};
use crex::mixnet::{random_chain, reveal_exponents, run_chain, MixInput};
use crex::rng::RngFactory;
use crex::trials::distinct_keys;

fn main() {
    let params = GroupParams::preset(GroupPreset::Test16);
    let mut rng = RngFactory::new(3).fork("example/attack");
    let list: Vec<_> = distinct_keys(&params, 10, &mut rng).into_iter().map(|k| k.pk).collect();
    let target = 4;

    let servers = random_chain(&params, 2, list.len() + 1, &mut rng);
    let outcome = targeted_attack(
        &params,
        &list,
        target,
        AdversaryView::Insider,
        |batch| run_chain(&params, &servers, &MixInput::plain(b"example", batch)),
        &mut rng,
        8,
    )
    .expect("attack");

    println!("target L[{target}] = {}", list[target].value());
    println!("attempts: {}, group ops: {}", outcome.attempts.len(), outcome.group_ops);
    println!("claimed pseudonym #{} = {}", outcome.pseudonym_index, outcome.pseudonym().value());

    let r_bar = params.scalar_product(&reveal_exponents(&servers));
    let truth = params.exp(&list[target], &r_bar);
    println!("matches L[{target}]^r: {}", &truth == outcome.pseudonym());
}
