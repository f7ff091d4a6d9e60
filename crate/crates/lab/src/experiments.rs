//! Experiments behind the `qkd`, `sweep`, `entangle` and `tree` commands.

use std::time::Instant;

use rand::Rng;

use anyhow::{ensure, Context};
use rbe_core::entangle::{
    locked_resource_utility, magic_square_classical_bound, magic_square_play, qotp_ensemble_average,
    rbe_ensemble_average, secure_epr_sharing, theft_recovery_experiment, FourQubitResource, Interception, ResourceLock,
    TheftScheme,
};
use rbe_core::protocols::{
    analytic_curves, dl04_attack_tree, fig8_tree, intercept_resend, key_bit_guessing_game, no_eve, rbe_attack_tree,
    run_protocol, wm_attack_bb84, wm_attack_dl04, wm_attack_rbe, EveKind, EveStrategy, GameResult, Protocol,
    ProtocolConfig, Transcript,
};
use rbe_core::rbe::KeySpace;
use rbe_core::stats::{binomial_stderr, ratio};
use rbe_core::stream::{batch_rng, domain, Counts, TrialRunner};
use rbe_core::DensityMatrix;

use crate::record::{MetricRow, ResultRecord, SpecEcho, TOOL_VERSION};

/// Attack family as named on the command line; the concrete strategy depends
/// on the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attack {
    None,
    Wm,
    InterceptResend,
}

impl Attack {
    pub fn strategy(self, protocol: Protocol, epsilon: f64) -> anyhow::Result<EveStrategy> {
        Ok(match (self, protocol) {
            (Attack::None, _) => no_eve(),
            (Attack::InterceptResend, _) => intercept_resend(),
            (Attack::Wm, Protocol::Bb84 | Protocol::Bb84Informed) => wm_attack_bb84(epsilon)?,
            (Attack::Wm, Protocol::Dl04) => wm_attack_dl04(epsilon)?,
            (Attack::Wm, Protocol::RbeQkd) => wm_attack_rbe(epsilon)?,
        })
    }
}

/// Parameters of one key-bit guessing game run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameSpec {
    pub protocol: Protocol,
    pub attack: Attack,
    pub epsilon: f64,
    pub trials: u64,
    pub n: usize,
    pub seed: u64,
    pub key_space: KeySpace,
    pub check_fraction: f64,
    pub informed_check: bool,
    pub timing: bool,
}

impl GameSpec {
    pub fn new(protocol: Protocol, attack: Attack, epsilon: f64, trials: u64, seed: u64) -> Self {
        GameSpec {
            protocol,
            attack,
            epsilon,
            trials,
            n: 1,
            seed,
            key_space: KeySpace::default(),
            check_fraction: 0.5,
            informed_check: false,
            timing: false,
        }
    }

    pub fn config(&self) -> ProtocolConfig {
        let mut cfg = ProtocolConfig::new(self.protocol, self.n);
        cfg.key_space = self.key_space;
        cfg.check_fraction = self.check_fraction;
        cfg.informed_check = self.informed_check;
        cfg
    }

    pub fn strategy(&self) -> anyhow::Result<EveStrategy> {
        self.attack.strategy(self.protocol, self.epsilon)
    }
}

/// Closed-form reference curve, exact enumeration value and detection
/// reference for a spec. The DL04 headline metric is the sender-bit match.
fn references(spec: &GameSpec, eve: &EveStrategy) -> anyhow::Result<(Option<f64>, Option<f64>, Option<f64>)> {
    let eps = eve.epsilon.epsilon();
    Ok(match (eve.kind, spec.protocol) {
        (EveKind::None, _) => (None, None, Some(0.0)),
        (EveKind::WmBb84, _) => {
            let c = analytic_curves(eps)?;
            (Some(c.bb84_success), Some(fig8_tree(eps)?.eve_correct_mass()), Some(c.bb84_detect))
        }
        (EveKind::WmDl04, _) => {
            let c = analytic_curves(eps)?;
            (Some(c.dl04_success), Some(dl04_attack_tree(eps)?.sender_match), Some(c.dl04_detect))
        }
        (EveKind::WmRbe, _) => {
            let n = match spec.key_space {
                KeySpace::Discrete { n } => n,
                KeySpace::Continuous => KeySpace::DEFAULT_DISCRETE_N,
            };
            (Some(0.5), Some(rbe_attack_tree(eps, n)?.strict_win), None)
        }
        (EveKind::InterceptResend, Protocol::Bb84 | Protocol::Bb84Informed) => (None, None, Some(0.25)),
        (EveKind::InterceptResend, _) => (None, None, None),
    })
}

pub fn run_game<T: TrialRunner>(spec: &GameSpec, runner: &T) -> anyhow::Result<ResultRecord> {
    ensure!(spec.trials >= 1, "trials must be at least 1");
    let eve = spec.strategy()?;
    let cfg = spec.config();
    let start = Instant::now();
    let game = key_bit_guessing_game(&cfg, &eve, spec.trials, spec.seed, runner)?;
    let elapsed = start.elapsed();
    let (success_analytic, success_exact, detection_analytic) = references(spec, &eve)?;
    Ok(record_from(
        spec,
        &eve,
        game,
        success_analytic,
        success_exact,
        detection_analytic,
        spec.timing.then_some(elapsed.as_secs_f64() * 1e3),
    ))
}

fn record_from(
    spec: &GameSpec,
    eve: &EveStrategy,
    game: GameResult,
    success_analytic: Option<f64>,
    success_exact: Option<f64>,
    detection_analytic: Option<f64>,
    wall_clock_ms: Option<f64>,
) -> ResultRecord {
    let (success, success_stderr) = if spec.protocol == Protocol::Dl04 {
        (game.sender_match_rate, game.sender_match_stderr)
    } else {
        (game.conditional_success, game.standard_error)
    };
    ResultRecord {
        spec: SpecEcho {
            command: "qkd".into(),
            protocol: spec.protocol,
            attack: eve.kind,
            epsilon: eve.epsilon.epsilon(),
            trials: spec.trials,
            n: spec.n,
            seed: spec.seed,
            key_space: spec.key_space,
            check_fraction: spec.check_fraction,
            informed_check: spec.informed_check,
        },
        success,
        success_stderr,
        success_trials: game.counts.eve_outputs,
        success_analytic,
        success_exact,
        advantage: (success - 0.5).abs(),
        detection: game.detection_rate,
        detection_stderr: game.detection_stderr,
        detection_trials: game.counts.target_compared,
        detection_analytic,
        key_rate: game.usable_fraction,
        game,
        wall_clock_ms,
        tool_version: TOOL_VERSION.into(),
    }
}

/// `steps` evenly spaced values from `from` to `to` inclusive, snapped to 12
/// decimals so `0.1..1.0` in 10 steps yields `0.3` rather than `0.30000000000000004`.
pub fn epsilon_grid(from: f64, to: f64, steps: usize) -> anyhow::Result<Vec<f64>> {
    ensure!(steps >= 1, "steps must be at least 1");
    ensure!((0.0..=1.0).contains(&from) && (0.0..=1.0).contains(&to), "epsilon range must lie in [0, 1]");
    ensure!(from <= to, "eps-from must not exceed eps-to");
    if steps == 1 {
        return Ok(vec![from]);
    }
    let m = (steps - 1) as f64;
    Ok((0..steps).map(|i| (((from * (m - i as f64) + to * i as f64) / m) * 1e12).round() / 1e12).collect())
}

/// One record per grid point, all under the master seed so any row can be
/// replayed alone with `qkd`.
pub fn run_sweep<T: TrialRunner>(base: &GameSpec, grid: &[f64], runner: &T) -> anyhow::Result<Vec<ResultRecord>> {
    grid.iter()
        .map(|&epsilon| {
            let mut r = run_game(&GameSpec { epsilon, ..*base }, runner)?;
            r.spec.command = "sweep".into();
            Ok(r)
        })
        .collect()
}

/// Runs a single protocol instance for the transcript file.
pub fn sample_transcript(spec: &GameSpec) -> anyhow::Result<(Transcript, EveStrategy)> {
    let eve = spec.strategy()?;
    let mut rng = batch_rng(spec.seed, domain::TRANSCRIPT, 0);
    let t = run_protocol(&spec.config(), &eve, &mut rng).context("running protocol for transcript")?;
    Ok((t, eve))
}

/// Parameters of the entanglement experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangleSpec {
    pub trials: u64,
    pub seed: u64,
    pub key_space: KeySpace,
    /// Grid size for the exhaustive RBE theft oracle (lock keys and guesses).
    pub theft_grid: u32,
    /// Fidelity with `Φ+` counted as a recovered pair.
    pub theft_threshold: f64,
}

impl EntangleSpec {
    pub fn new(trials: u64, seed: u64) -> Self {
        EntangleSpec { trials, seed, key_space: KeySpace::default(), theft_grid: 16, theft_threshold: 1.0 - 1e-9 }
    }
}

/// Commonly quoted QOTP theft rate, kept for comparison. Exhaustive enumeration gives 1/4.
pub const QOTP_THEFT_QUOTED: f64 = 1.0 / 16.0;

fn gap_from_mixed(rho: &DensityMatrix) -> anyhow::Result<f64> {
    Ok(rho.trace_distance(&DensityMatrix::maximally_mixed(rho.num_qubits())?)?)
}

pub fn run_entangle<T: TrialRunner>(spec: &EntangleSpec, runner: &T) -> anyhow::Result<Vec<MetricRow>> {
    ensure!(spec.trials >= 1, "trials must be at least 1");
    spec.key_space.validate()?;
    let (trials, seed) = (spec.trials, spec.seed);
    let average_n = match spec.key_space {
        KeySpace::Discrete { n } => n,
        KeySpace::Continuous => KeySpace::DEFAULT_DISCRETE_N,
    };
    let mut rows = vec![
        MetricRow::exact("qotp_average_gap", gap_from_mixed(&qotp_ensemble_average()?)?, Some(0.0)),
        MetricRow::exact("rbe_average_gap", gap_from_mixed(&rbe_ensemble_average(average_n)?)?, Some(0.0)),
    ];

    let qotp = theft_recovery_experiment(TheftScheme::Qotp, spec.theft_threshold, trials, seed, runner)?;
    rows.push(MetricRow::sampled("qotp_theft_rate", qotp.rate, qotp.stderr, qotp.trials, qotp.exact, seed));
    rows.push(MetricRow::exact("qotp_theft_rate_quoted", QOTP_THEFT_QUOTED, None));
    let grid = KeySpace::discrete(spec.theft_grid)?;
    let rbe = theft_recovery_experiment(
        TheftScheme::Rbe { key_space: grid, guess_grid: spec.theft_grid },
        spec.theft_threshold,
        trials,
        seed,
        runner,
    )?;
    rows.push(MetricRow::sampled("rbe_theft_rate", rbe.rate, rbe.stderr, rbe.trials, rbe.exact, seed));

    let mut rng = batch_rng(seed, domain::EPR_SHARING, 0);
    for (name, interception) in [
        ("bob", Interception::None),
        ("eve_without_key", Interception::WithoutKey),
        ("eve_key_leaked", Interception::KeyLeaked),
    ] {
        let r = secure_epr_sharing(interception, &spec.key_space, &mut rng)?;
        let expected = if interception == Interception::WithoutKey { None } else { Some(1.0) };
        rows.push(MetricRow::exact(format!("epr_fidelity_{name}"), r.fidelity, expected));
        rows.push(MetricRow::exact(format!("epr_average_fidelity_{name}"), r.average_fidelity, expected));
        rows.push(MetricRow::exact(format!("epr_joint_gap_{name}"), r.joint_gap, None));
        rows.push(MetricRow::exact(format!("epr_holder_gap_{name}"), r.holder_gap, Some(0.0)));
    }

    let resource = FourQubitResource::new();
    let wins: Counts<1> = runner.run(seed, domain::MAGIC_SQUARE ^ 1, trials, |rng, t: &mut Counts<1>| {
        let (i, j) = (rng.random_range(1..=3), rng.random_range(1..=3));
        t.0[0] += u64::from(magic_square_play(&resource, i, j, rng).expect("valid inputs").win);
    });
    let rate = ratio(wins.0[0], trials);
    rows.push(MetricRow::sampled(
        "magic_square_quantum_win_rate",
        rate,
        binomial_stderr(rate, trials),
        trials,
        Some(1.0),
        seed,
    ));
    let classical = magic_square_classical_bound();
    rows.push(MetricRow::exact("magic_square_classical_max", classical.max_win_probability, Some(8.0 / 9.0)));

    for (name, lock) in [
        ("qotp", ResourceLock::QotpUnknownKeys),
        ("rbe", ResourceLock::RbeUnknownKeys),
        ("rbe_keys_known", ResourceLock::RbeKnownKeys),
    ] {
        let u = locked_resource_utility(lock, &spec.key_space, trials, seed, runner)?;
        rows.push(MetricRow::sampled(
            format!("locked_utility_{name}"),
            u.win_rate,
            u.stderr,
            u.plays,
            Some(u.exact),
            seed,
        ));
    }
    Ok(rows)
}

/// Exact trees at one coupling strength, flattened to metric rows.
pub fn run_tree(epsilon: f64, key_space_n: u32) -> anyhow::Result<Vec<MetricRow>> {
    let curves = analytic_curves(epsilon)?;
    let bb84 = fig8_tree(epsilon)?;
    let mut rows: Vec<MetricRow> = bb84
        .leaves
        .iter()
        .map(|l| MetricRow::exact(format!("bb84_leaf_a{}_b{}_y{}_x{}", l.a, l.b, l.y, l.x), l.probability, None))
        .collect();
    rows.push(MetricRow::exact("bb84_total_mass", bb84.total_mass(), Some(1.0)));
    rows.push(MetricRow::exact("bb84_eve_correct_mass", bb84.eve_correct_mass(), Some(curves.bb84_success)));
    rows.push(MetricRow::exact("bb84_bob_error_mass", bb84.bob_error_mass(), Some(curves.bb84_detect)));
    let dl04 = dl04_attack_tree(epsilon)?;
    rows.push(MetricRow::exact("dl04_sender_match", dl04.sender_match, Some(curves.dl04_success)));
    rows.push(MetricRow::exact("dl04_strict_win", dl04.strict_win, None));
    rows.push(MetricRow::exact("dl04_bob_error", dl04.bob_error, Some(curves.dl04_detect)));
    let rbe = rbe_attack_tree(epsilon, key_space_n)?;
    rows.push(MetricRow::exact("rbe_sender_match", rbe.sender_match, Some(0.5)));
    rows.push(MetricRow::exact("rbe_strict_win", rbe.strict_win, Some(0.5)));
    rows.push(MetricRow::exact("rbe_bob_error", rbe.bob_error, None));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rbe_core::stream::Sequential;

    #[test]
    fn grid_endpoints_and_spacing() {
        let g = epsilon_grid(0.1, 1.0, 10).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[2], 0.3);
        assert_eq!((g[0], g[9]), (0.1, 1.0));
        assert_eq!(epsilon_grid(0.4, 0.4, 1).unwrap(), vec![0.4]);
        assert!(epsilon_grid(0.5, 0.1, 3).is_err());
        assert!(epsilon_grid(0.0, 1.5, 3).is_err());
        assert!(epsilon_grid(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn dl04_record_carries_both_references() {
        let r = run_game(&GameSpec::new(Protocol::Dl04, Attack::Wm, 1.0, 2000, 1), &Sequential).unwrap();
        assert_eq!(r.success_analytic, Some(0.875));
        assert!((r.success_exact.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.success, r.game.sender_match_rate);
        assert_eq!(r.wall_clock_ms, None);
    }

    #[test]
    fn honest_runs_have_no_success_reference() {
        let r = run_game(&GameSpec::new(Protocol::Bb84, Attack::None, 0.0, 500, 1), &Sequential).unwrap();
        assert!(r.success.is_nan());
        assert_eq!(r.detection_analytic, Some(0.0));
        assert_eq!(r.game.counts.eve_outputs, 0);
    }

    #[test]
    fn sweep_rows_replay_as_single_runs() {
        let base = GameSpec::new(Protocol::Bb84Informed, Attack::Wm, 0.0, 3000, 8);
        let rows = run_sweep(&base, &[0.2, 0.6], &Sequential).unwrap();
        let single = run_game(&GameSpec { epsilon: 0.6, ..base }, &Sequential).unwrap();
        assert_eq!(rows[1].game, single.game);
    }

    #[test]
    fn tree_rows_sum_to_one() {
        let rows = run_tree(0.5, 16).unwrap();
        let leaves: f64 = rows.iter().filter(|r| r.metric.starts_with("bb84_leaf")).map(|r| r.value).sum();
        assert!((leaves - 1.0).abs() < 1e-12);
        let correct = rows.iter().find(|r| r.metric == "bb84_eve_correct_mass").unwrap();
        assert!((correct.value - correct.analytic.unwrap()).abs() < 1e-12);
    }
}
