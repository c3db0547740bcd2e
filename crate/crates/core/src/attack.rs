//! Injection attack against the plain exponentiation mixnet.
//!
//! The party that forwards the key list `L` to the mixnet appends
//! `L[i]·g^s` for a secret `s`. Because exponentiation is multiplicative,
//! the mix turns it into `(L[i]·g^s)^r = L[i]^r · (g^r)^s`, and `g^r` is
//! published. Searching the output for a pair `(x, x·(g^r)^s)` reveals
//! `x = L[i]^r`, the target's pseudonym. Repeating for every element links
//! the whole list in `O(n^2)` group operations.
//!
//! With injection-resistant validation the forged entry needs a proof of
//! knowledge of `log_g(L[i]·g^s)`, which the adversary cannot produce
//! without the target's secret key, so the batch is rejected.

use std::cell::Cell;
use std::collections::HashMap;

use rand::RngCore;

use crate::error::{AttackError, MixnetError};
use crate::group::{GroupElement, GroupParams, Scalar};
use crate::mixnet::{proof_context, run_iremix, MixEntry, MixInput, MixOutput, MixServer};
use crate::schnorr::{dlog_prove, DlogProof};

/// Counts modular exponentiations and multiplications made by the adversary.
#[derive(Debug)]
pub struct CountingGroup<'a> {
    params: &'a GroupParams,
    ops: Cell<u64>,
}

impl<'a> CountingGroup<'a> {
    pub fn new(params: &'a GroupParams) -> Self {
        CountingGroup { params, ops: Cell::new(0) }
    }

    pub fn params(&self) -> &'a GroupParams {
        self.params
    }

    pub fn ops(&self) -> u64 {
        self.ops.get()
    }

    fn tick(&self) {
        self.ops.set(self.ops.get() + 1);
    }

    pub fn exp(&self, base: &GroupElement, e: &Scalar) -> GroupElement {
        self.tick();
        self.params.exp(base, e)
    }

    pub fn exp_g(&self, e: &Scalar) -> GroupElement {
        self.tick();
        self.params.exp_g(e)
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.tick();
        self.params.mul(a, b)
    }
}

/// The adversary's private state for one injected element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectionPlan {
    pub target_index: usize,
    s: Scalar,
    pub injected: GroupElement,
}

impl InjectionPlan {
    /// Builds `known[target]·g^s` for a chosen `s`.
    pub fn with_secret(
        group: &CountingGroup<'_>,
        known: &[GroupElement],
        target: usize,
        s: Scalar,
    ) -> Result<Self, AttackError> {
        let base = known
            .get(target)
            .ok_or(AttackError::TargetOutOfRange { index: target, len: known.len() })?;
        let injected = group.mul(base, &group.exp_g(&s));
        Ok(InjectionPlan { target_index: target, s, injected })
    }

    pub fn secret(&self) -> &Scalar {
        &self.s
    }

    /// `s = 0`, or an injected value that collides with a known key, voids
    /// the search relation.
    pub fn is_degenerate(&self, known: &[GroupElement]) -> bool {
        self.s.is_zero() || known.contains(&self.injected)
    }
}

/// Draws `s` until the injected element is non-degenerate. `known` is the
/// whole list for an insider, or a single member for an external attacker.
pub fn forge_injection<R: RngCore + ?Sized>(
    group: &CountingGroup<'_>,
    known: &[GroupElement],
    target: usize,
    rng: &mut R,
) -> Result<InjectionPlan, AttackError> {
    loop {
        let s = group.params().random_nonzero_scalar(rng);
        let plan = InjectionPlan::with_secret(group, known, target, s)?;
        if !plan.is_degenerate(known) {
            return Ok(plan);
        }
    }
}

/// All output positions `j` such that `L'[j]·(g^r)^s` is also in `L'`.
fn candidates(
    group: &CountingGroup<'_>,
    output: &[GroupElement],
    index: &HashMap<&GroupElement, usize>,
    shift: &GroupElement,
) -> Vec<usize> {
    output
        .iter()
        .enumerate()
        .filter(|(_, x)| index.contains_key(&group.mul(x, shift)))
        .map(|(j, _)| j)
        .collect()
}

fn index_of(output: &[GroupElement]) -> HashMap<&GroupElement, usize> {
    output.iter().enumerate().map(|(j, x)| (x, j)).collect()
}

/// Finds the target's pseudonym in the mix output. `g_r` is the published
/// final generator.
pub fn locate_target(
    group: &CountingGroup<'_>,
    output: &[GroupElement],
    g_r: &GroupElement,
    plan: &InjectionPlan,
) -> Result<usize, AttackError> {
    let shift = group.exp(g_r, &plan.s);
    let found = candidates(group, output, &index_of(output), &shift);
    match found.as_slice() {
        [] => Err(AttackError::NotFound),
        [j] => Ok(*j),
        _ => Err(AttackError::Ambiguous(found)),
    }
}

/// One attempt of a targeted attack, kept for the report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttemptRecord {
    pub injected: GroupElement,
    pub g_r: GroupElement,
    pub result: Result<usize, AttackError>,
    pub group_ops: u64,
}

#[derive(Debug, Clone)]
pub struct TargetedOutcome {
    pub target_index: usize,
    /// Position of the target's pseudonym in `output`.
    pub pseudonym_index: usize,
    pub output: MixOutput,
    pub attempts: Vec<AttemptRecord>,
    pub group_ops: u64,
}

impl TargetedOutcome {
    pub fn pseudonym(&self) -> &GroupElement {
        &self.output.pseudonyms()[self.pseudonym_index]
    }
}

/// Which list the adversary holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryView {
    /// The party forwarding `L` to the mixnet.
    Insider,
    /// Knows only the target element.
    External,
}

/// Injects, mixes through `oracle`, and searches. An ambiguous or empty
/// search is retried with a fresh `s` and a fresh mix session.
pub fn targeted_attack<R, F>(
    params: &GroupParams,
    list: &[GroupElement],
    target: usize,
    view: AdversaryView,
    mut oracle: F,
    rng: &mut R,
    max_attempts: usize,
) -> Result<TargetedOutcome, AttackError>
where
    R: RngCore + ?Sized,
    F: FnMut(&[GroupElement]) -> Result<MixOutput, MixnetError>,
{
    if target >= list.len() {
        return Err(AttackError::TargetOutOfRange { index: target, len: list.len() });
    }
    let group = CountingGroup::new(params);
    let mut attempts = Vec::new();
    for _ in 0..max_attempts {
        let before = group.ops();
        let plan = match view {
            AdversaryView::Insider => forge_injection(&group, list, target, rng)?,
            AdversaryView::External => {
                let mut plan = forge_injection(&group, &list[target..=target], 0, rng)?;
                plan.target_index = target;
                plan
            }
        };
        let mut batch = list.to_vec();
        batch.push(plan.injected.clone());
        let output = oracle(&batch)?;
        let result = locate_target(&group, output.pseudonyms(), output.h(), &plan);
        attempts.push(AttemptRecord {
            injected: plan.injected.clone(),
            g_r: output.h().clone(),
            result: result.clone(),
            group_ops: group.ops() - before,
        });
        if let Ok(j) = result {
            return Ok(TargetedOutcome {
                target_index: target,
                pseudonym_index: j,
                output,
                attempts,
                group_ops: group.ops(),
            });
        }
    }
    Err(AttackError::RetriesExhausted(max_attempts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkageMode {
    /// All `n` injections in one mix session of size `2n`.
    SingleSession,
    /// One session per target, each of size `n + 1`.
    PerTarget,
}

#[derive(Debug, Clone)]
pub struct LinkageResult {
    pub mode: LinkageMode,
    /// `links[i]` is the output position of `L[i]`'s pseudonym.
    pub links: Vec<usize>,
    /// `pseudonyms[i]` is the pseudonym value linked to `L[i]`.
    pub pseudonyms: Vec<GroupElement>,
    /// Group operations of the successful attempt(s).
    pub group_ops: u64,
    /// Including discarded attempts.
    pub total_group_ops: u64,
    pub attempts: usize,
    pub sessions: usize,
}

/// Links every element of `list` to its pseudonym.
pub fn full_linkage<R, F>(
    params: &GroupParams,
    list: &[GroupElement],
    mode: LinkageMode,
    mut oracle: F,
    rng: &mut R,
    max_attempts: usize,
) -> Result<LinkageResult, AttackError>
where
    R: RngCore + ?Sized,
    F: FnMut(&[GroupElement]) -> Result<MixOutput, MixnetError>,
{
    match mode {
        LinkageMode::SingleSession => single_session_linkage(params, list, &mut oracle, rng, max_attempts),
        LinkageMode::PerTarget => {
            let mut links = Vec::with_capacity(list.len());
            let mut pseudonyms = Vec::with_capacity(list.len());
            let (mut ops, mut total, mut attempts) = (0, 0, 0);
            for target in 0..list.len() {
                let outcome = targeted_attack(
                    params,
                    list,
                    target,
                    AdversaryView::Insider,
                    &mut oracle,
                    rng,
                    max_attempts,
                )?;
                links.push(outcome.pseudonym_index);
                pseudonyms.push(outcome.pseudonym().clone());
                attempts += outcome.attempts.len();
                total += outcome.group_ops;
                ops += outcome.attempts.last().map_or(0, |a| a.group_ops);
            }
            Ok(LinkageResult {
                mode,
                links,
                pseudonyms,
                group_ops: ops,
                total_group_ops: total,
                attempts,
                sessions: attempts,
            })
        }
    }
}

fn single_session_linkage<R, F>(
    params: &GroupParams,
    list: &[GroupElement],
    oracle: &mut F,
    rng: &mut R,
    max_attempts: usize,
) -> Result<LinkageResult, AttackError>
where
    R: RngCore + ?Sized,
    F: FnMut(&[GroupElement]) -> Result<MixOutput, MixnetError>,
{
    let mut total = 0;
    'attempt: for attempt in 1..=max_attempts {
        let group = CountingGroup::new(params);
        let mut plans: Vec<InjectionPlan> = Vec::with_capacity(list.len());
        let mut batch = list.to_vec();
        for target in 0..list.len() {
            let plan = loop {
                let plan = forge_injection(&group, list, target, rng)?;
                if !batch.contains(&plan.injected) {
                    break plan;
                }
            };
            batch.push(plan.injected.clone());
            plans.push(plan);
        }
        let output = oracle(&batch)?;
        let outputs = output.pseudonyms();
        let index = index_of(outputs);
        let mut links = Vec::with_capacity(list.len());
        for plan in &plans {
            let shift = group.exp(output.h(), &plan.s);
            let found = candidates(&group, outputs, &index, &shift);
            if found.len() != 1 {
                total += group.ops();
                continue 'attempt;
            }
            links.push(found[0]);
        }
        total += group.ops();
        return Ok(LinkageResult {
            mode: LinkageMode::SingleSession,
            pseudonyms: links.iter().map(|&j| outputs[j].clone()).collect(),
            links,
            group_ops: group.ops(),
            total_group_ops: total,
            attempts: attempt,
            sessions: attempt,
        });
    }
    Err(AttackError::RetriesExhausted(max_attempts))
}

/// How the adversary tries to get the injected key past the proof check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForgeryStrategy {
    /// Random commitment and response.
    RandomTranscript,
    /// A valid proof of knowledge of `s` for `g^s`, attached to `L[i]·g^s`.
    ProofOfShiftOnly,
    /// The target's own proof copied onto the injected key.
    ReplayTargetProof,
    /// The adversary knows the target's secret key, so `sk + s` is a real
    /// witness. Validation cannot stop this.
    KnownSecret(Scalar),
}

#[derive(Debug, Clone)]
pub enum IremixOutcome {
    Blocked(MixnetError),
    /// Only reachable with [`ForgeryStrategy::KnownSecret`].
    Linked(TargetedOutcome),
}

impl IremixOutcome {
    pub fn is_blocked(&self) -> bool {
        matches!(self, IremixOutcome::Blocked(_))
    }
}

/// A uniformly random (commitment, response) pair.
pub fn forge_random_proof<R: RngCore + ?Sized>(params: &GroupParams, rng: &mut R) -> DlogProof {
    DlogProof {
        commitment: params.exp_g(&params.random_scalar(rng)),
        response: params.random_scalar(rng),
    }
}

/// Runs the injection against the validated mixnet.
pub fn attack_iremix<R: RngCore + ?Sized>(
    params: &GroupParams,
    input: &MixInput,
    servers: &[MixServer],
    target: usize,
    strategy: &ForgeryStrategy,
    rng: &mut R,
) -> Result<IremixOutcome, AttackError> {
    let list = input.keys();
    let group = CountingGroup::new(params);
    let plan = forge_injection(&group, &list, target, rng)?;
    let ctx = proof_context(&input.session_id);
    let g = params.generator();
    let proof = match strategy {
        ForgeryStrategy::RandomTranscript => forge_random_proof(params, rng),
        ForgeryStrategy::ProofOfShiftOnly => dlog_prove(params, &plan.s, &g, &ctx, rng).expect("g is not the identity"),
        ForgeryStrategy::ReplayTargetProof => input.entries[target]
            .proof
            .clone()
            .unwrap_or_else(|| forge_random_proof(params, rng)),
        ForgeryStrategy::KnownSecret(sk) => {
            let witness = params.scalar_add(sk, &plan.s);
            dlog_prove(params, &witness, &g, &ctx, rng).expect("g is not the identity")
        }
    };
    let mut poisoned = input.clone();
    poisoned.entries.push(MixEntry { pk: plan.injected.clone(), proof: Some(proof) });
    let output = match run_iremix(params, servers, &poisoned) {
        Ok(output) => output,
        Err(e) => return Ok(IremixOutcome::Blocked(e)),
    };
    let result = locate_target(&group, output.pseudonyms(), output.h(), &plan);
    let attempt = AttemptRecord {
        injected: plan.injected.clone(),
        g_r: output.h().clone(),
        result: result.clone(),
        group_ops: group.ops(),
    };
    let j = result?;
    Ok(IremixOutcome::Linked(TargetedOutcome {
        target_index: target,
        pseudonym_index: j,
        output,
        attempts: vec![attempt],
        group_ops: group.ops(),
    }))
}
