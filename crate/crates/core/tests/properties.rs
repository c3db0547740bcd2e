use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crex::coercion::candidate_game;
use crex::config::RunConfig;
use crex::elgamal::{decrypt, encrypt};
use crex::error::MixnetError;
use crex::group::{GroupParams, GroupPreset};
use crex::mixnet::{find_own_pseudonym, iremix_validate, run_chain, run_iremix, random_chain, reveal_exponents, MixInput};
use crex::protocol::matrix::{Grid, PermutationSet, QaPair};
use crex::protocol::transcript::ExamTranscript;
use crex::protocol::verify::verify_transcript;
use crex::protocol::{Faults, RubricId, Simulation};
use crex::schnorr::{dlog_verify, keygen, schnorr_sign, schnorr_verify, DlogProof};
use crex::trials::{distinct_keys, proven_input};

fn test16() -> GroupParams {
    GroupParams::preset(GroupPreset::Test16)
}

/// (n, m, k, d) with n ≤ 8, k ≤ 4, d ≤ m ≤ 4 and d ≤ n.
fn exam_shape() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (1usize..=8, 2usize..=4, 1usize..=4).prop_flat_map(|(n, k, m)| {
        (Just(n), Just(m), Just(k), 1usize..=m.min(n))
    })
}

fn grid(k: usize, n: usize, cells: Vec<u16>) -> Grid<QaPair> {
    let rows = (0..k)
        .map(|i| {
            (0..n)
                .map(|j| QaPair {
                    question: format!("q{i}").into_bytes(),
                    answer: cells[i * n + j].to_be_bytes().to_vec(),
                })
                .collect()
        })
        .collect();
    Grid::from_rows(rows).unwrap()
}

fn grid_strategy() -> impl Strategy<Value = (Grid<QaPair>, u64)> {
    (1usize..=5, 1usize..=9)
        .prop_flat_map(|(k, n)| (Just(k), Just(n), prop::collection::vec(0u16..6, k * n), any::<u64>()))
        .prop_map(|(k, n, cells, seed)| (grid(k, n, cells), seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn registered_marks_follow_the_rubric(
        (n, m, k, d) in exam_shape(),
        seed in any::<u64>(),
        length_rubric in any::<bool>(),
    ) {
        let rubric = if length_rubric { RubricId::Length } else { RubricId::Digest };
        let cfg = RunConfig { n, m, k, d, seed, rubric, ..RunConfig::default() };
        let run = Simulation::run(&cfg, Faults::none()).unwrap();

        // rebuild T from each candidate's own answers at its pseudonym position
        let mut columns = vec![Vec::new(); n];
        for c in &run.candidates {
            columns[c.pseudonym_index.unwrap()] = c.pairs.clone();
        }
        let t = Grid::from_columns(&columns).unwrap();
        let shuffled = run.permutations.apply(&t);
        let marks_on_shuffled = Grid::from_rows(
            shuffled.rows().iter().map(|r| r.iter().map(|p| rubric.mark_pair(p)).collect()).collect(),
        ).unwrap();
        prop_assert_eq!(&run.mark_matrices.shuffled, &marks_on_shuffled);
        let back = run.permutations.unapply(&marks_on_shuffled);

        for (j, c) in run.candidates.iter().enumerate() {
            let pos = c.pseudonym_index.unwrap();
            for (i, pair) in c.pairs.iter().enumerate() {
                let direct = rubric.mark(&pair.question, &pair.answer);
                prop_assert_eq!(&run.registered_marks[j][i], &direct);
                prop_assert_eq!(back.cell(i, pos), &direct);
            }
        }
        prop_assert!(run.all_candidates_verified());
    }

    #[test]
    fn shuffle_preserves_row_multisets((t, seed) in grid_strategy()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let perms = PermutationSet::random(t.k(), t.n(), &mut rng);
        let shuffled = perms.apply(&t);
        for i in 0..t.k() {
            let mut a = t.row(i).to_vec();
            let mut b = shuffled.row(i).to_vec();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
            for c in 0..t.n() {
                prop_assert_eq!(shuffled.cell(i, c), t.cell(i, perms.source(i, c)));
            }
        }
        prop_assert_eq!(perms.unapply(&shuffled), t.clone());
        prop_assert_eq!(perms.inverse().apply(&shuffled), t);
    }

    #[test]
    fn every_owner_finds_exactly_one_pseudonym(n in 1usize..=20, servers in 1usize..=4, seed in any::<u64>()) {
        let params = test16();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let keys = distinct_keys(&params, n, &mut rng);
        let pks: Vec<_> = keys.iter().map(|k| k.pk.clone()).collect();
        let chain = random_chain(&params, servers, n, &mut rng);
        let out = run_chain(&params, &chain, &MixInput::plain(b"prop", &pks)).unwrap();
        let exps = reveal_exponents(&chain);

        // generators chain from g
        let mut gen = params.generator();
        for (r, published) in exps.iter().zip(&out.per_server_generators) {
            gen = params.exp(&gen, r);
            prop_assert_eq!(&gen, published);
        }
        prop_assert_eq!(&gen, out.h());

        let mut seen = vec![false; n];
        for k in &keys {
            let mine = params.exp(out.h(), &k.sk);
            let hits: Vec<usize> = (0..n).filter(|&j| out.pseudonyms()[j] == mine).collect();
            prop_assert_eq!(hits.len(), 1);
            let j = find_own_pseudonym(&params, &k.sk, &out).unwrap();
            prop_assert!(!seen[j]);
            seen[j] = true;
        }
    }

    #[test]
    fn one_bad_proof_rejects_the_whole_batch(
        n in 1usize..=8,
        bad in any::<prop::sample::Index>(),
        seed in any::<u64>(),
    ) {
        let params = test16();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (_, mut input) = proven_input(&params, n, &mut rng);
        prop_assert!(iremix_validate(&params, &input).is_ok());
        let i = bad.index(n);
        let proof = input.entries[i].proof.clone().unwrap();
        let q_minus_one = params.scalar_sub(&params.scalar_u64(0), &params.scalar_u64(1));
        input.entries[i].proof = Some(DlogProof {
            commitment: proof.commitment,
            response: params.scalar_add(&proof.response, &q_minus_one),
        });
        let chain = random_chain(&params, 2, n, &mut rng);
        prop_assert_eq!(run_iremix(&params, &chain, &input).err(), Some(MixnetError::ValidationFailure(i)));
    }

    #[test]
    fn injection_identity(t in any::<u64>(), s in any::<u64>(), r in any::<u64>()) {
        let params = GroupParams::preset(GroupPreset::Test64);
        let (t, s, r) = (params.scalar_u64(t), params.scalar_u64(s), params.scalar_u64(r));
        let lhs = params.mul(&params.exp_g(&params.scalar_mul(&r, &s)), &params.exp_g(&params.scalar_mul(&t, &r)));
        let rhs = params.exp(&params.mul(&params.exp_g(&t), &params.exp_g(&s)), &r);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn signatures_and_encryption_round_trip(seed in any::<u64>(), msg in prop::collection::vec(any::<u8>(), 0..64)) {
        let params = test16();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let kp = keygen(&params, &mut rng);
        let gen = params.exp_g(&params.random_nonzero_scalar(&mut rng));
        let pk = params.exp(&gen, &kp.sk);
        let sig = schnorr_sign(&params, &kp.sk, &gen, &msg, &mut rng).unwrap();
        prop_assert!(schnorr_verify(&params, &pk, &gen, &msg, &sig));
        let ct = encrypt(&params, &pk, &gen, &msg, &mut rng);
        prop_assert_eq!(decrypt(&params, &kp.sk, &gen, &ct).unwrap(), msg);
        let other = keygen(&params, &mut rng);
        if other.sk != kp.sk {
            prop_assert!(decrypt(&params, &other.sk, &gen, &ct).is_err());
        }
        let proof = crex::schnorr::dlog_prove(&params, &kp.sk, &gen, b"ctx", &mut rng).unwrap();
        prop_assert!(dlog_verify(&params, &pk, &gen, b"ctx", &proof));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn verification_replays_identically(seed in any::<u64>()) {
        let cfg = RunConfig { n: 3, m: 2, k: 2, d: 2, seed, ..RunConfig::default() };
        let run = Simulation::run(&cfg, Faults::none()).unwrap();
        let first = verify_transcript(&run.transcript);
        let reparsed = ExamTranscript::from_jsonl(&run.transcript.to_jsonl()).unwrap();
        prop_assert_eq!(&reparsed, &run.transcript);
        let second = verify_transcript(&reparsed);
        prop_assert_eq!(first.checks, second.checks);
    }

    #[test]
    fn fabricated_tests_look_real((n, m, k, d) in exam_shape(), seed in any::<u64>()) {
        prop_assume!(n >= 2);
        let cfg = RunConfig { n, m, k, d, seed, ..RunConfig::default() };
        let game = candidate_game(&cfg).unwrap();
        prop_assert!(game.fake.is_consistent());
        prop_assert_eq!(game.real.vector(), game.fake.vector());
    }
}
