//! Seeded single-instance experiments over the mixnet and the attack, each
//! checked against the mix servers' exponents.

use rand::{Rng, RngCore};
use serde::Serialize;

use crate::attack::{
    attack_iremix, forge_injection, forge_random_proof, full_linkage, targeted_attack, AdversaryView, CountingGroup,
    ForgeryStrategy, LinkageMode,
};
use crate::error::AttackError;
use crate::group::{GroupElement, GroupParams};
use crate::mixnet::{
    deanonymize, find_own_pseudonym, iremix_validate, prove_entry, random_chain, reveal_exponents, run_chain,
    MixEntry, MixInput,
};
use crate::schnorr::{keygen, KeyPair};

pub const SESSION_ID: &[u8] = b"trial/candidates";

/// Fresh key pairs with pairwise distinct public keys.
pub fn distinct_keys<R: RngCore + ?Sized>(params: &GroupParams, n: usize, rng: &mut R) -> Vec<KeyPair> {
    let mut keys: Vec<KeyPair> = Vec::with_capacity(n);
    while keys.len() < n {
        let kp = keygen(params, rng);
        if !keys.iter().any(|k| k.pk == kp.pk) {
            keys.push(kp);
        }
    }
    keys
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetedTrial {
    pub n: usize,
    pub servers: usize,
    pub target: usize,
    pub external: bool,
    pub found: usize,
    pub truth: usize,
    pub success: bool,
    pub attempts: usize,
    pub group_ops: u64,
}

/// One targeted deanonymization against a fresh plain chain.
pub fn targeted_trial<R: RngCore + ?Sized>(
    params: &GroupParams,
    n: usize,
    servers: usize,
    view: AdversaryView,
    rng: &mut R,
) -> Result<TargetedTrial, AttackError> {
    let keys: Vec<GroupElement> = distinct_keys(params, n, rng).into_iter().map(|k| k.pk).collect();
    let target = rng.gen_range(0..n);
    let chain = random_chain(params, servers, n + 1, rng);
    let outcome = targeted_attack(
        params,
        &keys,
        target,
        view,
        |b| run_chain(params, &chain, &MixInput::plain(SESSION_ID, b)),
        rng,
        16,
    )?;
    let r_bar = params.scalar_product(&reveal_exponents(&chain));
    let truth = deanonymize(params, &keys, &outcome.output, &r_bar)?[target];
    Ok(TargetedTrial {
        n,
        servers,
        target,
        external: view == AdversaryView::External,
        found: outcome.pseudonym_index,
        truth,
        success: truth == outcome.pseudonym_index,
        attempts: outcome.attempts.len(),
        group_ops: outcome.group_ops,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkageTrial {
    pub n: usize,
    pub mode: &'static str,
    pub links_correct: usize,
    pub success: bool,
    pub group_ops: u64,
    pub total_group_ops: u64,
    pub sessions: usize,
}

pub fn mode_name(mode: LinkageMode) -> &'static str {
    match mode {
        LinkageMode::SingleSession => "single-session",
        LinkageMode::PerTarget => "per-target",
    }
}

/// Links all `n` keys and counts how many links match the ground truth.
pub fn linkage_trial<R: RngCore + ?Sized>(
    params: &GroupParams,
    n: usize,
    servers: usize,
    mode: LinkageMode,
    rng: &mut R,
) -> Result<LinkageTrial, AttackError> {
    let keys: Vec<GroupElement> = distinct_keys(params, n, rng).into_iter().map(|k| k.pk).collect();
    let batch = match mode {
        LinkageMode::SingleSession => 2 * n,
        LinkageMode::PerTarget => n + 1,
    };
    let chain = random_chain(params, servers, batch, rng);
    let result = full_linkage(
        params,
        &keys,
        mode,
        |b| run_chain(params, &chain, &MixInput::plain(SESSION_ID, b)),
        rng,
        16,
    )?;
    let r_bar = params.scalar_product(&reveal_exponents(&chain));
    let links_correct = keys
        .iter()
        .zip(&result.pseudonyms)
        .filter(|(pk, nym)| &params.exp(pk, &r_bar) == *nym)
        .count();
    Ok(LinkageTrial {
        n,
        mode: mode_name(mode),
        links_correct,
        success: links_correct == n,
        group_ops: result.group_ops,
        total_group_ops: result.total_group_ops,
        sessions: result.sessions,
    })
}

/// Honest registration batch with ownership proofs.
pub fn proven_input<R: RngCore + ?Sized>(params: &GroupParams, n: usize, rng: &mut R) -> (Vec<KeyPair>, MixInput) {
    let keys = distinct_keys(params, n, rng);
    let entries = keys
        .iter()
        .map(|k| prove_entry(params, k, SESSION_ID, rng).expect("g is not the identity"))
        .collect();
    (keys, MixInput { session_id: SESSION_ID.to_vec(), entries })
}

pub fn strategy_name(strategy: &ForgeryStrategy) -> &'static str {
    match strategy {
        ForgeryStrategy::RandomTranscript => "random-transcript",
        ForgeryStrategy::ProofOfShiftOnly => "proof-of-shift-only",
        ForgeryStrategy::ReplayTargetProof => "replay-target-proof",
        ForgeryStrategy::KnownSecret(_) => "known-secret",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IremixTrial {
    pub n: usize,
    pub strategy: &'static str,
    pub blocked: bool,
    pub error: Option<String>,
}

/// One injection attempt against the validated mixnet. `known_secret`
/// hands the adversary the target's key, which validation cannot stop.
pub fn iremix_trial<R: RngCore + ?Sized>(
    params: &GroupParams,
    n: usize,
    servers: usize,
    strategy: &ForgeryStrategy,
    rng: &mut R,
) -> Result<IremixTrial, AttackError> {
    let (keys, input) = proven_input(params, n, rng);
    let target = rng.gen_range(0..n);
    let strategy = match strategy {
        ForgeryStrategy::KnownSecret(_) => ForgeryStrategy::KnownSecret(keys[target].sk.clone()),
        s => s.clone(),
    };
    let chain = random_chain(params, servers, n + 1, rng);
    let outcome = attack_iremix(params, &input, &chain, target, &strategy, rng)?;
    Ok(IremixTrial {
        n,
        strategy: strategy_name(&strategy),
        blocked: outcome.is_blocked(),
        error: match outcome {
            crate::attack::IremixOutcome::Blocked(e) => Some(e.to_string()),
            crate::attack::IremixOutcome::Linked(_) => None,
        },
    })
}

/// Whether validation accepts a batch with one injected key carrying a
/// uniformly random proof transcript.
pub fn random_forgery_accepted<R: RngCore + ?Sized>(params: &GroupParams, input: &MixInput, rng: &mut R) -> bool {
    let list = input.keys();
    let group = CountingGroup::new(params);
    let target = rng.gen_range(0..list.len());
    let plan = forge_injection(&group, &list, target, rng).expect("target in range");
    let mut poisoned = input.clone();
    poisoned.entries.push(MixEntry { pk: plan.injected, proof: Some(forge_random_proof(params, rng)) });
    iremix_validate(params, &poisoned).is_ok()
}

#[derive(Debug, Clone, Serialize)]
pub struct MixnetTrial {
    pub n: usize,
    pub servers: usize,
    /// Output equals `{pk_i^r_bar}` as a multiset.
    pub multiset_ok: bool,
    /// Every owner finds exactly its own position, and positions are distinct.
    pub owners_ok: bool,
    pub chain_verifies: bool,
}

pub fn mixnet_trial<R: RngCore + ?Sized>(
    params: &GroupParams,
    keys: &[KeyPair],
    servers: usize,
    rng: &mut R,
) -> Result<MixnetTrial, AttackError> {
    let n = keys.len();
    let pks: Vec<GroupElement> = keys.iter().map(|k| k.pk.clone()).collect();
    let chain = random_chain(params, servers, n, rng);
    let out = run_chain(params, &chain, &MixInput::plain(SESSION_ID, &pks))?;
    let exponents = reveal_exponents(&chain);
    let r_bar = params.scalar_product(&exponents);
    let mut expected: Vec<GroupElement> = pks.iter().map(|pk| params.exp(pk, &r_bar)).collect();
    let mut got = out.pseudonyms().to_vec();
    expected.sort();
    got.sort();
    let mut seen = vec![false; n];
    let mut owners_ok = true;
    for k in keys {
        match find_own_pseudonym(params, &k.sk, &out) {
            Ok(j) if !seen[j] && out.pseudonyms()[j] == params.exp(&k.pk, &r_bar) => seen[j] = true,
            _ => owners_ok = false,
        }
    }
    Ok(MixnetTrial {
        n,
        servers,
        multiset_ok: expected == got,
        owners_ok,
        chain_verifies: crate::mixnet::verify_revealed_chain(params, &pks, &out, &exponents),
    })
}
