//! Write a transcript, read it back, verify it, then flip one signature bit
//! and verify again.

use crex::config::RunConfig;
use crex::protocol::transcript::{ExamTranscript, Record};
use crex::protocol::verify::verify_transcript;
use crex::protocol::{Faults, Simulation};

fn main() {
    let cfg = RunConfig { seed: 42, ..RunConfig::default() };
    let run = Simulation::run(&cfg, Faults::none()).expect("exam");
    let path = std::env::temp_dir().join("crex-example-transcript.jsonl");
    run.transcript.write(&path).expect("write");

    let t = ExamTranscript::read(&path).expect("read");
    let verdict = verify_transcript(&t);
    println!("{}: {}/{} checks pass", path.display(), verdict.passed_count(), verdict.checks.len());

    let mut tampered = t.clone();
    for rec in &mut tampered.records {
        if let Record::Board { entry, .. } = rec {
            if entry.kind == "assignment" {
                let sig = entry.signature.as_mut().unwrap();
                let last = sig.len() - 1;
                sig[last] ^= 1;
            }
        }
    }
    let verdict = verify_transcript(&tampered);
    println!("after flipping one bit: failed {:?}", verdict.failed());
}
