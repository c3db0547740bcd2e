//! Command-line front end. Every subcommand prints JSON lines to stdout and
//! returns a process exit code.
//!
//! Exit codes: 0 success, 1 a check or game failed, 2 bad configuration,
//! 3 unreadable input file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::attack::{AdversaryView, ForgeryStrategy, LinkageMode};
use crate::coercion::{candidate_game_from_transcript, examiner_game_from_transcript, GameOutcome};
use crate::config::RunConfig;
use crate::group::{GroupParams, GroupPreset};
use crate::protocol::board::Phase;
use crate::protocol::simulation::{Faults, Simulation};
use crate::protocol::transcript::ExamTranscript;
use crate::protocol::verify::verify_transcript;
use crate::rng::RngFactory;
use crate::trials::{distinct_keys, iremix_trial, linkage_trial, mixnet_trial, targeted_trial};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "crex", version, about = "Coercion-resistant e-exam simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run or verify a full exam.
    #[command(subcommand)]
    Exam(ExamCommand),
    /// Injection attack experiments.
    #[command(subcommand)]
    Attack(AttackCommand),
    /// Coercion games replayed from a recorded exam.
    #[command(subcommand)]
    Coerce(CoerceCommand),
    #[command(subcommand)]
    Mixnet(MixnetCommand),
}

#[derive(Debug, Args)]
pub struct GroupSeed {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "test16")]
    pub group: GroupPreset,
}

#[derive(Debug, Subcommand)]
pub enum ExamCommand {
    /// Runs all five phases and writes the transcript.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        group: Option<GroupPreset>,
        #[arg(long, default_value = "transcript.jsonl")]
        out: PathBuf,
        /// Directory a relative `--out` is resolved against.
        #[arg(long, env = "CREX_OUT_DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Replays every check on a transcript.
    Verify {
        #[arg(long)]
        transcript: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    SingleSession,
    PerTarget,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum AttackCommand {
    /// Deanonymizes one element of a plain mix batch.
    Demo {
        #[command(flatten)]
        common: GroupSeed,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        servers: usize,
        /// The adversary knows only the target element.
        #[arg(long)]
        external: bool,
    },
    /// Links every element and reports the operation counts per size.
    FullLinkage {
        #[command(flatten)]
        common: GroupSeed,
        #[arg(long, value_delimiter = ',', default_value = "16,32")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        servers: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
    },
    /// Tries the injection against the validated mixnet.
    Iremix {
        #[command(flatten)]
        common: GroupSeed,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        servers: usize,
        /// Attempts per forgery strategy.
        #[arg(long, default_value_t = 10)]
        attempts: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CoerceCommand {
    Candidate {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    Examiner {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Label the examiner claims to have marked.
        #[arg(long)]
        decoy: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum MixnetCommand {
    /// Mixes a batch and checks every pseudonym against the revealed exponents.
    Demo {
        #[command(flatten)]
        common: GroupSeed,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        servers: usize,
    },
}

/// Lines of a report plus the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub lines: Vec<Value>,
    pub code: i32,
}

impl Report {
    fn new() -> Self {
        Report { lines: Vec::new(), code: EXIT_OK }
    }

    fn push(&mut self, report: &str, record: &str, body: impl Serialize) {
        let mut line = json!({ "report": report, "record": record });
        if let Value::Object(fields) = serde_json::to_value(body).expect("report bodies serialize") {
            line.as_object_mut().expect("object").extend(fields);
        }
        self.lines.push(line);
    }

    fn error(mut self, report: &str, code: i32, body: Value) -> Self {
        self.push(report, "error", body);
        self.code = code;
        self
    }

    pub fn to_jsonl(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

/// Parses `args` (including the program name), runs, prints the report and
/// returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let report = execute(cli.command);
    print!("{}", report.to_jsonl());
    report.code
}

pub fn execute(command: Command) -> Report {
    match command {
        Command::Exam(ExamCommand::Run { config, seed, group, out, out_dir }) => {
            let path = match out_dir {
                Some(dir) if out.is_relative() => dir.join(out),
                _ => out,
            };
            exam_run(config.as_deref(), seed, group, &path)
        }
        Command::Exam(ExamCommand::Verify { transcript }) => exam_verify(&transcript),
        Command::Attack(AttackCommand::Demo { common, n, servers, external }) => {
            attack_demo(&common, n, servers, external)
        }
        Command::Attack(AttackCommand::FullLinkage { common, sizes, servers, mode }) => {
            attack_full_linkage(&common, &sizes, servers, mode)
        }
        Command::Attack(AttackCommand::Iremix { common, n, servers, attempts }) => {
            attack_iremix(&common, n, servers, attempts)
        }
        Command::Coerce(CoerceCommand::Candidate { transcript, index }) => {
            coerce(&transcript, "candidate", |t| candidate_game_from_transcript(t, index))
        }
        Command::Coerce(CoerceCommand::Examiner { transcript, index, decoy }) => {
            coerce(&transcript, "examiner", |t| examiner_game_from_transcript(t, index, decoy))
        }
        Command::Mixnet(MixnetCommand::Demo { common, n, servers }) => mixnet_demo(&common, n, servers),
    }
}

pub fn exam_run(config: Option<&Path>, seed: Option<u64>, group: Option<GroupPreset>, out: &Path) -> Report {
    const NAME: &str = "exam-run";
    let report = Report::new();
    let mut cfg = match config.map(RunConfig::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => return report.error(NAME, EXIT_CONFIG, json!({ "phase": "config", "message": e.to_string() })),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(group) = group {
        cfg.group = group;
    }
    if let Err(e) = cfg.validate() {
        return report.error(NAME, EXIT_CONFIG, json!({ "phase": "config", "message": e.to_string() }));
    }
    let mut sim = match Simulation::new(&cfg, Faults::none()) {
        Ok(sim) => sim,
        Err(e) => return report.error(NAME, EXIT_CONFIG, json!({ "phase": "config", "message": e.to_string() })),
    };
    for phase in Phase::ALL {
        if let Err(e) = sim.run_through(phase) {
            let written = sim.transcript().write(out).is_ok();
            return report.error(
                NAME,
                EXIT_FAILED,
                json!({ "phase": phase.name(), "message": e.to_string(), "partial_transcript": written }),
            );
        }
    }
    let run = sim.finish();
    if let Err(e) = run.transcript.write(out) {
        return report.error(NAME, EXIT_INPUT, json!({ "phase": "output", "message": e.to_string() }));
    }
    let verdict = verify_transcript(&run.transcript);
    let all_pass = verdict.all_pass() && run.all_candidates_verified() && run.rejections.is_empty();
    let mut report = report;
    report.push(
        NAME,
        "summary",
        json!({
            "seed": cfg.seed,
            "group": cfg.group.name(),
            "n": cfg.n, "m": cfg.m, "k": cfg.k, "d": cfg.d,
            "mix_servers": cfg.mix_servers,
            "rubric": cfg.rubric.name(),
            "transcript": out.display().to_string(),
            "transcript_sha256": hex::encode(Sha256::digest(run.transcript.to_jsonl().as_bytes())),
            "board_entries": run.board.len(),
            "candidates_verified": run.candidate_verdicts.iter().filter(|v| v.all_pass()).count(),
            "rejections": run.rejections.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "checks_passed": verdict.passed_count(),
            "failed_checks": verdict.failed(),
            "all_pass": all_pass,
        }),
    );
    report.code = if all_pass { EXIT_OK } else { EXIT_FAILED };
    report
}

fn read_transcript(report: &str, path: &Path) -> Result<ExamTranscript, Report> {
    ExamTranscript::read(path).map_err(|e| {
        Report::new().error(report, EXIT_INPUT, json!({ "offset": e.offset, "message": e.reason }))
    })
}

pub fn exam_verify(path: &Path) -> Report {
    const NAME: &str = "exam-verify";
    let t = match read_transcript(NAME, path) {
        Ok(t) => t,
        Err(r) => return r,
    };
    let verdict = verify_transcript(&t);
    let mut report = Report::new();
    for check in &verdict.checks {
        report.push(NAME, "check", check);
    }
    report.push(
        NAME,
        "verdict",
        json!({
            "passed": verdict.passed_count(),
            "failed": verdict.failed(),
            "all_pass": verdict.all_pass(),
        }),
    );
    report.code = if verdict.all_pass() { EXIT_OK } else { EXIT_FAILED };
    report
}

pub fn attack_demo(common: &GroupSeed, n: usize, servers: usize, external: bool) -> Report {
    const NAME: &str = "attack-demo";
    if n == 0 || servers == 0 {
        return Report::new().error(NAME, EXIT_CONFIG, json!({ "message": "n and servers must be positive" }));
    }
    let params = GroupParams::preset(common.group);
    let mut rng = RngFactory::new(common.seed).fork("attack/demo");
    let view = if external { AdversaryView::External } else { AdversaryView::Insider };
    let mut report = Report::new();
    match targeted_trial(&params, n, servers, view, &mut rng) {
        Ok(trial) => {
            report.push(NAME, "trial", json!({ "group": common.group.name(), "seed": common.seed, "trial": trial }));
            if !trial.success {
                report.code = EXIT_FAILED;
            }
            report
        }
        Err(e) => report.error(NAME, EXIT_FAILED, json!({ "message": e.to_string() })),
    }
}

fn modes(mode: ModeArg) -> Vec<LinkageMode> {
    match mode {
        ModeArg::SingleSession => vec![LinkageMode::SingleSession],
        ModeArg::PerTarget => vec![LinkageMode::PerTarget],
        ModeArg::Both => vec![LinkageMode::SingleSession, LinkageMode::PerTarget],
    }
}

pub fn attack_full_linkage(common: &GroupSeed, sizes: &[usize], servers: usize, mode: ModeArg) -> Report {
    const NAME: &str = "attack-full-linkage";
    if sizes.is_empty() || sizes.contains(&0) || servers == 0 {
        return Report::new().error(NAME, EXIT_CONFIG, json!({ "message": "sizes and servers must be positive" }));
    }
    let params = GroupParams::preset(common.group);
    let factory = RngFactory::new(common.seed);
    let mut report = Report::new();
    for mode in modes(mode) {
        let mut previous: Option<(usize, u64)> = None;
        for &n in sizes {
            let mut rng = factory.fork_indexed(&format!("attack/linkage/{}", crate::trials::mode_name(mode)), n);
            let trial = match linkage_trial(&params, n, servers, mode, &mut rng) {
                Ok(t) => t,
                Err(e) => return report.error(NAME, EXIT_FAILED, json!({ "n": n, "message": e.to_string() })),
            };
            if !trial.success {
                report.code = EXIT_FAILED;
            }
            report.push(NAME, "trial", json!({ "group": common.group.name(), "seed": common.seed, "trial": trial }));
            if let Some((prev_n, prev_ops)) = previous {
                report.push(
                    NAME,
                    "ratio",
                    json!({
                        "mode": trial.mode,
                        "from": prev_n,
                        "to": n,
                        "ratio": trial.group_ops as f64 / prev_ops as f64,
                    }),
                );
            }
            previous = Some((n, trial.group_ops));
        }
    }
    report
}

pub fn attack_iremix(common: &GroupSeed, n: usize, servers: usize, attempts: usize) -> Report {
    const NAME: &str = "attack-iremix";
    if n == 0 || servers == 0 {
        return Report::new().error(NAME, EXIT_CONFIG, json!({ "message": "n and servers must be positive" }));
    }
    let params = GroupParams::preset(common.group);
    let mut rng = RngFactory::new(common.seed).fork("attack/iremix");
    let mut report = Report::new();
    let mut blocked = 0;
    let strategies =
        [ForgeryStrategy::RandomTranscript, ForgeryStrategy::ProofOfShiftOnly, ForgeryStrategy::ReplayTargetProof];
    for strategy in &strategies {
        for _ in 0..attempts {
            match iremix_trial(&params, n, servers, strategy, &mut rng) {
                Ok(trial) => {
                    blocked += usize::from(trial.blocked);
                    report.push(NAME, "trial", &trial);
                }
                Err(e) => return report.error(NAME, EXIT_FAILED, json!({ "message": e.to_string() })),
            }
        }
    }
    let total = attempts * strategies.len();
    report.push(
        NAME,
        "summary",
        json!({
            "group": common.group.name(),
            "seed": common.seed,
            "attempts": total,
            "blocked": blocked,
            "outcome": if blocked == total { "blocked" } else { "linked" },
        }),
    );
    if blocked != total {
        report.code = EXIT_FAILED;
    }
    report
}

fn coerce<F>(path: &Path, role: &str, game: F) -> Report
where
    F: FnOnce(&ExamTranscript) -> Result<GameOutcome, crate::coercion::TranscriptGameError>,
{
    let name = format!("coerce-{role}");
    let t = match read_transcript(&name, path) {
        Ok(t) => t,
        Err(r) => return r,
    };
    match game(&t) {
        Ok(outcome) => {
            let mut report = Report::new();
            let ok = outcome.fake.is_consistent();
            report.push(
                &name,
                "game",
                json!({
                    "role": role,
                    "indistinguishable": outcome.indistinguishable(),
                    "outcome": outcome,
                }),
            );
            report.code = if ok { EXIT_OK } else { EXIT_FAILED };
            report
        }
        Err(e) => Report::new().error(&name, EXIT_CONFIG, json!({ "message": e.to_string() })),
    }
}

pub fn mixnet_demo(common: &GroupSeed, n: usize, servers: usize) -> Report {
    const NAME: &str = "mixnet-demo";
    if n == 0 || servers == 0 {
        return Report::new().error(NAME, EXIT_CONFIG, json!({ "message": "n and servers must be positive" }));
    }
    let params = GroupParams::preset(common.group);
    let mut rng = RngFactory::new(common.seed).fork("mixnet/demo");
    let keys = distinct_keys(&params, n, &mut rng);
    let mut report = Report::new();
    match mixnet_trial(&params, &keys, servers, &mut rng) {
        Ok(trial) => {
            if !(trial.multiset_ok && trial.owners_ok && trial.chain_verifies) {
                report.code = EXIT_FAILED;
            }
            report.push(NAME, "trial", json!({ "group": common.group.name(), "seed": common.seed, "trial": trial }));
            report
        }
        Err(e) => report.error(NAME, EXIT_FAILED, json!({ "message": e.to_string() })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Report {
        let cli = Cli::try_parse_from(std::iter::once("crex").chain(args.iter().copied())).unwrap();
        execute(cli.command)
    }

    #[test]
    fn attack_demo_succeeds() {
        let r = run(&["attack", "demo", "--n", "10"]);
        assert_eq!(r.code, EXIT_OK);
        assert_eq!(r.lines[0]["trial"]["success"], true);
    }

    #[test]
    fn iremix_reports_blocked() {
        let r = run(&["attack", "iremix", "--n", "4", "--attempts", "2"]);
        assert_eq!(r.code, EXIT_OK);
        assert_eq!(r.lines.last().unwrap()["outcome"], "blocked");
    }

    #[test]
    fn group_flag_is_parsed() {
        let r = run(&["mixnet", "demo", "--group", "test64", "--n", "3"]);
        assert_eq!(r.lines[0]["group"], "test64");
        assert!(Cli::try_parse_from(["crex", "mixnet", "demo", "--group", "nope"]).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run(&["attack", "full-linkage", "--sizes", "4,8", "--seed", "3"]);
        let b = run(&["attack", "full-linkage", "--sizes", "4,8", "--seed", "3"]);
        assert_eq!(a, b);
        assert_eq!(a.lines.len(), 6);
    }
}
