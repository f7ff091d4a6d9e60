//! Command-line front end. Exit status: 0 on success, 1 when a self-test
//! check or an experiment fails at run time, 2 for usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rbe_core::protocols::Protocol;
use rbe_core::rbe::KeySpace;
use rbe_core::weakmeas::WeakStrength;

use crate::experiments::{
    epsilon_grid, run_entangle, run_game, run_sweep, run_tree, sample_transcript, Attack, EntangleSpec, GameSpec,
};
use crate::record::{emit_json, emit_metric_csv, emit_sweep_csv, MetricRow, ResultRecord, SweepRow};
use crate::runner::Runner;
use crate::selftest::run_selftest;
use crate::transcript_io::write_transcript;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "rbe-lab",
    version,
    about = "Seeded experiments for random-basis encryption and weak-measurement attacks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the exact algebraic identities and exit nonzero on any failure.
    Selftest,
    /// Play the key-bit guessing game at one coupling strength.
    Qkd(QkdArgs),
    /// Play the game over an evenly spaced grid of coupling strengths.
    Sweep(SweepArgs),
    /// Entanglement locking, theft, EPR sharing and magic-square experiments.
    Entangle(EntangleArgs),
    /// Exact attack trees at one coupling strength.
    Tree(TreeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Bb84,
    Bb84Informed,
    Dl04,
    RbeQkd,
}

impl From<ProtocolArg> for Protocol {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Bb84 => Protocol::Bb84,
            ProtocolArg::Bb84Informed => Protocol::Bb84Informed,
            ProtocolArg::Dl04 => Protocol::Dl04,
            ProtocolArg::RbeQkd => Protocol::RbeQkd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackArg {
    None,
    Wm,
    InterceptResend,
}

impl From<AttackArg> for Attack {
    fn from(a: AttackArg) -> Self {
        match a {
            AttackArg::None => Attack::None,
            AttackArg::Wm => Attack::Wm,
            AttackArg::InterceptResend => Attack::InterceptResend,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KeySpaceArg {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Master seed; a fresh one is drawn and echoed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file. Defaults to stdout, or to a file named after the command
    /// and seed inside the output directory when one is set.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, env = "RBE_LAB_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores. Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Record wall-clock time (makes output differ between runs).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct KeySpaceArgs {
    #[arg(long, value_enum, default_value = "discrete")]
    pub key_space: KeySpaceArg,
    /// Grid size N of the discrete key space.
    #[arg(long, default_value_t = KeySpace::DEFAULT_DISCRETE_N)]
    pub key_n: u32,
}

impl KeySpaceArgs {
    fn key_space(&self) -> Result<KeySpace, UsageError> {
        match self.key_space {
            KeySpaceArg::Continuous => Ok(KeySpace::Continuous),
            KeySpaceArg::Discrete => KeySpace::discrete(self.key_n).map_err(usage),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GameArgs {
    #[arg(long, value_enum)]
    pub protocol: ProtocolArg,
    #[arg(long, value_enum, default_value = "wm")]
    pub attack: AttackArg,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Target key length per run.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[command(flatten)]
    pub keys: KeySpaceArgs,
    #[arg(long, default_value_t = 0.5)]
    pub check_fraction: f64,
    /// DL04: Alice checks in Bob's announced basis instead of a random one.
    #[arg(long)]
    pub informed_check: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct QkdArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Coupling strength in [0, 1]; ignored without a weak-measurement attack.
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Also write the transcript of one run as JSON lines.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, default_value_t = 0.0)]
    pub eps_from: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eps_to: f64,
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EntangleArgs {
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[command(flatten)]
    pub keys: KeySpaceArgs,
    /// Key and guess grid for the RBE theft experiment.
    #[arg(long, default_value_t = 16)]
    pub theft_grid: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TreeArgs {
    #[arg(long)]
    pub epsilon: f64,
    /// Discrete grid size for the RBE tree.
    #[arg(long, default_value_t = KeySpace::DEFAULT_DISCRETE_N)]
    pub key_n: u32,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, env = "RBE_LAB_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
}

/// An invalid flag value or combination.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: impl std::fmt::Display) -> UsageError {
    UsageError(e.to_string())
}

fn fresh_seed() -> u64 {
    use std::collections::hash_map::RandomState;
    use std::hash::BuildHasher;
    let nanos = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_nanos());
    RandomState::new().hash_one((nanos, std::process::id()))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = fresh_seed();
        eprintln!("seed: {s}");
        s
    })
}

fn runner(threads: Option<usize>) -> anyhow::Result<Runner> {
    match threads {
        Some(0) => Err(UsageError("--threads must be at least 1".into()).into()),
        Some(t) => Runner::with_threads(t),
        None => Runner::available(),
    }
}

fn destination(output: &Option<PathBuf>, dir: &Option<PathBuf>, stem: &str, format: Format) -> Option<PathBuf> {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    output.clone().or_else(|| dir.as_ref().map(|d| d.join(format!("{stem}.{ext}"))))
}

fn write_out(bytes: &[u8], path: Option<PathBuf>) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn game_spec(g: &GameArgs, epsilon: f64, seed: u64) -> Result<GameSpec, UsageError> {
    if g.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if g.attack == AttackArg::Wm {
        WeakStrength::new(epsilon).map_err(usage)?;
    }
    let protocol: Protocol = g.protocol.into();
    if g.informed_check && protocol != Protocol::Dl04 {
        return Err(usage("--informed-check only applies to dl04"));
    }
    let spec = GameSpec {
        n: g.n,
        key_space: g.keys.key_space()?,
        check_fraction: g.check_fraction,
        informed_check: g.informed_check,
        timing: g.out.timing,
        ..GameSpec::new(
            protocol,
            g.attack.into(),
            if g.attack == AttackArg::Wm { epsilon } else { 0.0 },
            g.trials,
            seed,
        )
    };
    spec.config().validate().map_err(usage)?;
    Ok(spec)
}

/// Records in the requested format.
pub fn render_records(records: &[ResultRecord], format: Format) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => emit_sweep_csv(&records.iter().map(SweepRow::from).collect::<Vec<_>>(), &mut buf)?,
        Format::Json => emit_json(records, &mut buf)?,
    }
    Ok(buf)
}

pub fn render_metrics(rows: &[MetricRow], format: Format) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => emit_metric_csv(rows, &mut buf)?,
        Format::Json => emit_json(rows, &mut buf)?,
    }
    Ok(buf)
}

fn qkd(a: QkdArgs) -> anyhow::Result<i32> {
    let seed = resolve_seed(a.game.out.seed);
    let spec = game_spec(&a.game, a.epsilon, seed)?;
    let runner = runner(a.game.out.threads)?;
    if let Some(path) = &a.transcript {
        let (t, eve) = sample_transcript(&spec)?;
        let mut buf = Vec::new();
        write_transcript(&t, seed, &eve, &mut buf)?;
        write_out(&buf, Some(path.clone()))?;
    }
    let record = run_game(&spec, &runner)?;
    let out = &a.game.out;
    let stem = format!("qkd-{}-{seed}", record.spec.protocol.name());
    write_out(&render_records(&[record], out.format)?, destination(&out.output, &out.output_dir, &stem, out.format))?;
    Ok(EXIT_OK)
}

fn sweep(a: SweepArgs) -> anyhow::Result<i32> {
    if a.game.attack != AttackArg::Wm {
        return Err(usage("sweep varies the coupling strength and needs --attack wm").into());
    }
    let grid = epsilon_grid(a.eps_from, a.eps_to, a.steps).map_err(usage)?;
    let seed = resolve_seed(a.game.out.seed);
    let spec = game_spec(&a.game, grid[0], seed)?;
    let runner = runner(a.game.out.threads)?;
    let records = run_sweep(&spec, &grid, &runner)?;
    let out = &a.game.out;
    let stem = format!("sweep-{}-{seed}", spec.protocol.name());
    write_out(&render_records(&records, out.format)?, destination(&out.output, &out.output_dir, &stem, out.format))?;
    Ok(EXIT_OK)
}

fn entangle(a: EntangleArgs) -> anyhow::Result<i32> {
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1").into());
    }
    if a.theft_grid == 0 || a.theft_grid > 32 {
        return Err(usage("--theft-grid must lie in 1..=32 so the exhaustive oracle stays enumerable").into());
    }
    let seed = resolve_seed(a.out.seed);
    let spec =
        EntangleSpec { key_space: a.keys.key_space()?, theft_grid: a.theft_grid, ..EntangleSpec::new(a.trials, seed) };
    let runner = runner(a.out.threads)?;
    let rows = run_entangle(&spec, &runner)?;
    let out = &a.out;
    write_out(
        &render_metrics(&rows, out.format)?,
        destination(&out.output, &out.output_dir, &format!("entangle-{seed}"), out.format),
    )?;
    Ok(EXIT_OK)
}

fn tree(a: TreeArgs) -> anyhow::Result<i32> {
    WeakStrength::new(a.epsilon).map_err(usage)?;
    KeySpace::discrete(a.key_n).map_err(usage)?;
    let rows = run_tree(a.epsilon, a.key_n)?;
    write_out(
        &render_metrics(&rows, a.format)?,
        destination(&a.output, &a.output_dir, &format!("tree-{}", a.epsilon), a.format),
    )?;
    Ok(EXIT_OK)
}

fn selftest() -> i32 {
    let checks = run_selftest();
    let mut failed = 0;
    for c in &checks {
        println!("{} {} ({})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Selftest => Ok(selftest()),
        Command::Qkd(a) => qkd(a),
        Command::Sweep(a) => sweep(a),
        Command::Entangle(a) => entangle(a),
        Command::Tree(a) => tree(a),
    }
}

/// Parses `args`, runs the command and returns the exit status.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_FAILURE
        }
    }
}
