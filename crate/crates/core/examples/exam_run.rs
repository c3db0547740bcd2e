//! A full honest exam: five candidates, two examiners, three questions,
//! two partitions. Prints the board and each candidate's marks.

use crex::config::RunConfig;
use crex::protocol::{Faults, Simulation};

fn main() {
    let cfg = RunConfig::default();
    let run = Simulation::run(&cfg, Faults::none()).expect("exam");

    println!("bulletin board");
    for e in run.board.entries() {
        let signed = if e.signature.is_some() { "signed" } else { "" };
        println!("  #{:<2} {:<14} {:<6} {:<22} {signed}", e.seq, e.phase.name(), e.author, e.kind);
    }

    println!("marks");
    for (c, marks) in run.candidates.iter().zip(&run.registered_marks) {
        let marks: Vec<String> = marks.iter().map(|m| String::from_utf8_lossy(m).into_owned()).collect();
        println!("  candidate {} (pseudonym #{}): {}", c.index, c.pseudonym_index.unwrap(), marks.join(" "));
    }
    println!("every candidate verified: {}", run.all_candidates_verified());
}
