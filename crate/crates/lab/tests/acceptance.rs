//! Acceptance suite. Prints one PASS/FAIL line per criterion (split into
//! lettered parts where a criterion has independent halves) and exits with a
//! failure status if any line fails. All seeds and tolerances are fixed here.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use rbe_core::entangle::{
    magic_square_classical_bound, magic_square_play, qotp_ensemble_average, rbe_ensemble_average,
    theft_recovery_experiment, FourQubitResource, TheftScheme,
};
use rbe_core::protocols::{
    analytic_curves, dl04_attack_tree, fig8_tree, key_bit_guessing_game, no_eve, rbe_attack_tree, run_bb84,
    run_bb84_informed, run_rbe_qkd, wm_attack_bb84, wm_attack_dl04, wm_attack_rbe, GameResult, Protocol,
    ProtocolConfig,
};
use rbe_core::rbe::{
    dec, decrypt_state, density_gap, enc, eval_cn_not, eval_cnot, eval_d, eval_not, gen, hadamard_probe, lemma1_scan,
    zero_outcome_closed_form, zero_outcome_direct, KeySpace, PhaseSign, RbeKey,
};
use rbe_core::stats::binomial_stderr;
use rbe_core::stream::{batch_rng, Counts, TrialRunner};
use rbe_core::{DensityMatrix, OrthonormalBasis, C64};
use rbe_lab::cli::{render_metrics, render_records, Format};
use rbe_lab::experiments::{run_entangle, run_game, run_sweep, Attack, EntangleSpec, GameSpec, QOTP_THEFT_QUOTED};
use rbe_lab::{Parallel, Runner};

/// Exact identities.
const EXACT_TOL: f64 = 1e-12;
/// Key-averaged density matrices over a 4096-point grid.
const AVERAGE_TOL: f64 = 1e-9;
/// Statistical agreement, in standard errors.
const SIGMAS: f64 = 3.0;
/// Trials per game so that Eve outputs on at least 10^6 of them (she outputs
/// on about half).
const GAME_TRIALS: u64 = 2_020_000;
const CONDITIONED_MIN: u64 = 1_000_000;
const THREADS: usize = 4;

struct Line {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn line(id: &'static str, name: &'static str, pass: bool, detail: String) -> Line {
    Line { id, name, pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() < EXACT_TOL
}

fn within(observed: f64, expected: f64, stderr: f64) -> bool {
    (observed - expected).abs() <= SIGMAS * stderr
}

fn grid_keys() -> Vec<RbeKey> {
    (0..100)
        .flat_map(|i| [PhaseSign::Plus, PhaseSign::Minus].map(|p| RbeKey::new(TAU * f64::from(i) / 100.0, p).unwrap()))
        .collect()
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let mut rng = batch_rng(101, 0, 0);
    let mut worst = 0.0f64;
    let mut wrong = 0;
    for _ in 0..10_000 {
        let bit: u8 = rng.random_range(0..2);
        let key = gen(&KeySpace::Continuous, &mut rng).unwrap();
        let c = enc(bit, &key);
        let d = decrypt_state(&c, &key);
        let b = usize::from(bit);
        worst = worst.max(d.amplitude(1 - b).norm()).max(1.0 - d.amplitude(b).norm());
        wrong += usize::from(dec(&c, &key, &mut rng) != bit);
    }
    let took = start.elapsed();
    let pass = worst < EXACT_TOL && wrong == 0 && took < Duration::from_secs(1);
    line(
        "1",
        "perfect correctness",
        pass,
        format!("10^4 pairs, max amplitude error {worst:.2e}, {wrong} wrong, {}", secs(took)),
    )
}

fn criterion_2(runner: &impl TrialRunner) -> Line {
    let start = Instant::now();
    let mut rng = batch_rng(102, 0, 0);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let [t, p, t0, p0]: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..TAU));
        worst = worst.max((zero_outcome_closed_form(t, p, t0, p0) - zero_outcome_direct(t, p, t0, p0).unwrap()).abs());
    }
    let mut max_z = 0.0f64;
    let mut all_within = true;
    for i in 0..10u32 {
        let adv = OrthonormalBasis::from_angles(0.37 + 0.61 * f64::from(i), 1.3 * f64::from(i) - 2.0).unwrap();
        let scan = lemma1_scan(&adv, &KeySpace::Continuous, 1_000_000, 1020 + u64::from(i), runner).unwrap();
        let se = binomial_stderr(0.5, scan.trials);
        for p in [scan.p0_given_enc0(), scan.p0_given_enc1()] {
            all_within &= within(p, 0.5, se);
            max_z = max_z.max((p - 0.5).abs() / se);
        }
    }
    let took = start.elapsed();
    let pass = worst < EXACT_TOL && all_within && took < Duration::from_secs(30);
    line(
        "2",
        "outcome probability closed form and key-averaged statistics",
        pass,
        format!("max formula deviation {worst:.2e}; 10 bases x 10^6 trials, max |z| {max_z:.2}; {}", secs(took)),
    )
}

fn criterion_3() -> Line {
    let gaps: Vec<(u32, f64)> =
        [3, 64, 4096].iter().map(|&n| (n, density_gap(&KeySpace::discrete(n).unwrap(), 0).unwrap())).collect();
    let single = density_gap(&KeySpace::discrete(1).unwrap(), 0).unwrap();
    let pass = gaps.iter().all(|&(_, g)| g < EXACT_TOL) && (single - 1.0).abs() < EXACT_TOL;
    let listed: Vec<String> = gaps.iter().map(|(n, g)| format!("N={n}: {g:.1e}")).collect();
    line(
        "3",
        "averaged ciphertexts are indistinguishable",
        pass,
        format!("{}; N=1 control: {single}", listed.join(", ")),
    )
}

/// `X ψ_b = s_b e^{iφ} ψ_{1-b}` with `s_0 = 1`, `s_1 = -1`.
fn flipped(b: u8, key: &RbeKey, j: usize) -> C64 {
    let sign = if b == 0 { 1.0 } else { -1.0 };
    enc(1 - b, key).qubit().amplitude(j) * key.phase().unit() * sign
}

fn criterion_4() -> Line {
    let keys = grid_keys();
    let mut failures = 0usize;
    for k in &keys {
        for b in 0..2u8 {
            let c = enc(b, k);
            let not = eval_not(&c);
            failures += (0..2).filter(|&j| !close(not.qubit().amplitude(j), flipped(b, k, j))).count();

            let d = eval_d(&c).unwrap();
            failures += (0..4)
                .filter(|&j| {
                    let want = if j < 2 { c.qubit().amplitude(j) } else { flipped(b, k, j - 2) };
                    !close(d.amplitude(j), want * FRAC_1_SQRT_2)
                })
                .count();

            for ctrl in 0..2u8 {
                let out = eval_cnot(ctrl, &c).unwrap();
                failures += (0..2)
                    .filter(|&j| {
                        let want = if ctrl == 1 { flipped(b, k, j) } else { c.qubit().amplitude(j) };
                        let idx = usize::from(ctrl) * 2 + j;
                        !close(out.amplitude(idx), want)
                            || !close(out.amplitude((1 - usize::from(ctrl)) * 2 + j), C64::new(0.0, 0.0))
                    })
                    .count();
            }

            for n in 1..=4usize {
                for pattern in 0..(1usize << n) {
                    let controls: Vec<u8> = (0..n).map(|i| ((pattern >> (n - 1 - i)) & 1) as u8).collect();
                    let fire = pattern == (1 << n) - 1;
                    let out = eval_cn_not(&controls, &c).unwrap();
                    for j in 0..2 {
                        let want = if fire { flipped(b, k, j) } else { c.qubit().amplitude(j) };
                        failures += usize::from(!close(out.amplitude(pattern * 2 + j), want));
                    }
                    let norm_elsewhere: f64 =
                        (0..out.dim()).filter(|&i| i / 2 != pattern).map(|i| out.amplitude(i).norm_sqr()).sum();
                    failures += usize::from(norm_elsewhere > EXACT_TOL);
                }
            }
        }
    }
    let probe = keys.iter().map(|k| (hadamard_probe(k) - k.theta().cos().powi(2) / 2.0).abs()).fold(0.0, f64::max);
    let pass = failures == 0 && probe < EXACT_TOL;
    line(
        "4",
        "homomorphic NOT, D, CNOT and C^n NOT; Hadamard probe",
        pass,
        format!("{} keys, {failures} amplitude mismatches; probe deviation {probe:.2e}", keys.len()),
    )
}

fn game(protocol: Protocol, eve: rbe_core::protocols::EveStrategy, seed: u64, runner: &impl TrialRunner) -> GameResult {
    key_bit_guessing_game(&ProtocolConfig::new(protocol, 1), &eve, GAME_TRIALS, seed, runner).unwrap()
}

fn criterion_5(runner: &impl TrialRunner) -> Line {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let e = f64::from(i) / 999.0;
        let t = fig8_tree(e).unwrap();
        worst = worst.max((t.eve_correct_mass() - (0.5 + e / 8.0)).abs()).max((t.bob_error_mass() - e / 4.0).abs());
    }
    let mut pass = worst < EXACT_TOL;
    let mut parts = vec![format!("tree deviation {worst:.2e}")];
    for (k, eps) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let r = game(Protocol::Bb84Informed, wm_attack_bb84(eps).unwrap(), 105 + k as u64, runner);
        let n = r.counts.eve_outputs;
        let ok_win = within(r.conditional_success, 0.5 + eps / 8.0, binomial_stderr(0.5 + eps / 8.0, n));
        let ok_err = within(r.bob_error_rate, eps / 4.0, binomial_stderr(eps / 4.0, n));
        pass &= n >= CONDITIONED_MIN && ok_win && ok_err;
        parts.push(format!(
            "eps {eps}: win {:.5} vs {:.5}, bob error {:.5} vs {:.5}, n={n}",
            r.conditional_success,
            0.5 + eps / 8.0,
            r.bob_error_rate,
            eps / 4.0
        ));
    }
    let took = start.elapsed();
    pass &= took < Duration::from_secs(120);
    parts.push(secs(took));
    line("5", "BB84 weak-measurement tree", pass, parts.join("; "))
}

fn criterion_6(runner: &impl TrialRunner) -> [Line; 2] {
    let (mut pass_a, mut pass_b) = (true, true);
    let (mut parts_a, mut parts_b) = (Vec::new(), Vec::new());
    for (k, eps) in [0.25, 0.5, 1.0].into_iter().enumerate() {
        let r = game(Protocol::Dl04, wm_attack_dl04(eps).unwrap(), 106 + k as u64, runner);
        let reference = analytic_curves(eps).unwrap().dl04_success;
        let exact = dl04_attack_tree(eps).unwrap().sender_match;
        let n = r.counts.eve_outputs;
        let se = binomial_stderr(reference, n);
        pass_a &= n >= CONDITIONED_MIN && within(r.sender_match_rate, reference, se);
        if eps == 1.0 {
            pass_a &= (reference - 0.875).abs() < EXACT_TOL && r.sender_match_rate == 0.875;
        }
        parts_a.push(format!(
            "eps {eps}: observed {:.5}, formula {reference:.5} ({:+.1} sigma), exact enumeration {exact:.5}",
            r.sender_match_rate,
            (r.sender_match_rate - reference) / se.max(f64::MIN_POSITIVE)
        ));
        let m = r.counts.target_compared;
        pass_b &= within(r.detection_rate, eps / 4.0, binomial_stderr(eps / 4.0, m));
        parts_b.push(format!("eps {eps}: {:.5} vs {:.5} over {m}", r.detection_rate, eps / 4.0));
    }
    [
        line("6a", "DL04 attack success matches the reference closed form", pass_a, parts_a.join("; ")),
        line("6b", "DL04 first-leg detection", pass_b, parts_b.join("; ")),
    ]
}

fn criterion_7(runner: &impl TrialRunner) -> [Line; 2] {
    let cfg = ProtocolConfig::new(Protocol::RbeQkd, 8);
    let honest: Counts<3> = runner.run(1070, 0, 10_000, |rng, t: &mut Counts<3>| {
        let tr = run_rbe_qkd(&cfg, &no_eve(), rng).unwrap();
        t.0[0] += u64::from(tr.alice_key == tr.bob_key && tr.key_len() == 8 && !tr.aborted);
        t.0[1] += tr.mismatches() as u64;
        t.0[2] += 1;
    });
    let pass_a = honest.0[0] == 10_000 && honest.0[1] == 0;
    let a = line(
        "7a",
        "RBE-QKD honest runs agree",
        pass_a,
        format!("{} of {} runs with identical 8-bit keys, {} mismatches", honest.0[0], honest.0[2], honest.0[1]),
    );

    let mut pass_b = true;
    let mut parts = Vec::new();
    for (k, eps) in [0.25, 0.5, 1.0].into_iter().enumerate() {
        let r = game(Protocol::RbeQkd, wm_attack_rbe(eps).unwrap(), 107 + k as u64, runner);
        let se = binomial_stderr(0.5, r.counts.eve_outputs);
        let exact = rbe_attack_tree(eps, KeySpace::DEFAULT_DISCRETE_N).unwrap();
        pass_b &= r.counts.eve_outputs >= CONDITIONED_MIN && r.advantage.abs() < SIGMAS * se;
        parts.push(format!(
            "eps {eps}: success {:.5}, advantage {:.5} ({:.1} sigma), exact win {:.5}, exact sender match {:.5}",
            r.conditional_success,
            r.advantage,
            r.advantage / se,
            exact.strict_win,
            exact.sender_match
        ));
    }
    [a, line("7b", "RBE-QKD resists the two-leg weak-measurement attack", pass_b, parts.join("; "))]
}

fn criterion_8() -> Line {
    let mut rng = batch_rng(108, 0, 0);
    let (mut rounds_i, mut usable_i) = (0u64, 0u64);
    let cfg = ProtocolConfig::new(Protocol::Bb84Informed, 1000);
    while rounds_i < 100_000 {
        let t = run_bb84_informed(&cfg, &no_eve(), &mut rng).unwrap();
        rounds_i += t.rounds.len() as u64;
        usable_i += t.usable_rounds() as u64;
    }
    let (mut rounds_g, mut usable_g) = (0u64, 0u64);
    let cfg = ProtocolConfig::new(Protocol::Bb84, 1000);
    while rounds_g < 100_000 {
        let t = run_bb84(&cfg, &no_eve(), &mut rng).unwrap();
        rounds_g += t.rounds.len() as u64;
        usable_g += t.usable_rounds() as u64;
    }
    let informed = usable_i as f64 / rounds_i as f64;
    let guessing = usable_g as f64 / rounds_g as f64;
    let pass = informed == 1.0 && within(guessing, 0.5, binomial_stderr(0.5, rounds_g));
    line(
        "8",
        "informed-basis BB84 keeps every round",
        pass,
        format!("informed {informed} over {rounds_i}, guessing {guessing:.5} over {rounds_g}"),
    )
}

fn criterion_9() -> Line {
    let resource = FourQubitResource::new();
    let mut rng = batch_rng(109, 0, 0);
    let mut streak = 0u64;
    for play in 0..90_000usize {
        let (i, j) = (play % 9 / 3 + 1, play % 3 + 1);
        if !magic_square_play(&resource, i, j, &mut rng).unwrap().win {
            break;
        }
        streak += 1;
    }
    let start = Instant::now();
    let bound = magic_square_classical_bound();
    let took = start.elapsed();
    let pass = streak == 90_000
        && bound.strategy_pairs == 4096
        && bound.inputs == 9
        && bound.best_wins == 8
        && bound.max_win_probability == 8.0 / 9.0
        && took < Duration::from_secs(1);
    line(
        "9",
        "magic square",
        pass,
        format!(
            "{streak} consecutive quantum wins; classical best {}/9 over {} strategy pairs in {}",
            bound.best_wins,
            bound.strategy_pairs,
            secs(took)
        ),
    )
}

fn criterion_10(runner: &impl TrialRunner) -> Line {
    let mixed = DensityMatrix::maximally_mixed(2).unwrap();
    let qotp = qotp_ensemble_average().unwrap().max_abs_diff(&mixed);
    let rbe = rbe_ensemble_average(4096).unwrap().max_abs_diff(&mixed);
    let q = theft_recovery_experiment(TheftScheme::Qotp, 1.0 - 1e-9, 200_000, 1100, runner).unwrap();
    let grid = KeySpace::discrete(16).unwrap();
    let r = theft_recovery_experiment(
        TheftScheme::Rbe { key_space: grid, guess_grid: 16 },
        1.0 - 1e-9,
        200_000,
        1101,
        runner,
    )
    .unwrap();
    let (qe, re) = (q.exact.unwrap(), r.exact.unwrap());
    let pass = qotp < EXACT_TOL
        && rbe < AVERAGE_TOL
        && within(q.rate, qe, binomial_stderr(qe, q.trials))
        && within(r.rate, re, binomial_stderr(re, r.trials));
    line(
        "10",
        "entanglement locking",
        pass,
        format!(
            "QOTP average off by {qotp:.1e}, RBE average off by {rbe:.1e}; QOTP theft {:.5} vs oracle {qe} (quoted {QOTP_THEFT_QUOTED}); RBE theft {:.5} vs oracle {re:.5}",
            q.rate, r.rate
        ),
    )
}

/// Emitted bytes of a representative slice of the experiments above.
fn emitted(runner: &impl TrialRunner) -> Vec<u8> {
    let mut out = Vec::new();
    let bb84 = GameSpec::new(Protocol::Bb84Informed, Attack::Wm, 0.5, 100_000, 111);
    let dl04 = GameSpec::new(Protocol::Dl04, Attack::Wm, 0.0, 50_000, 112);
    let rbe = GameSpec::new(Protocol::RbeQkd, Attack::Wm, 0.5, 50_000, 113);
    let mut records = vec![run_game(&bb84, runner).unwrap(), run_game(&rbe, runner).unwrap()];
    records.extend(run_sweep(&dl04, &[0.25, 0.5, 1.0], runner).unwrap());
    for format in [Format::Csv, Format::Json] {
        out.extend(render_records(&records, format).unwrap());
    }
    let rows = run_entangle(&EntangleSpec::new(20_000, 114), runner).unwrap();
    for format in [Format::Csv, Format::Json] {
        out.extend(render_metrics(&rows, format).unwrap());
    }
    let scan = lemma1_scan(&OrthonormalBasis::hadamard(), &KeySpace::Continuous, 100_000, 115, runner).unwrap();
    out.extend(format!("{} {} {}\n", scan.trials, scan.zeros_given_enc0, scan.zeros_given_enc1).into_bytes());
    out
}

fn criterion_11() -> Line {
    let reference = emitted(&Runner::Sequential);
    let mut matches = Vec::new();
    for threads in [1, 2, 3, 8] {
        let runner = Runner::with_threads(threads).unwrap();
        matches.push((threads, emitted(&runner) == reference));
    }
    let pass = matches.iter().all(|&(_, m)| m);
    let listed: Vec<String> =
        matches.iter().map(|(t, m)| format!("{t} threads: {}", if *m { "identical" } else { "DIFFERENT" })).collect();
    line(
        "11",
        "byte-identical output at any parallelism",
        pass,
        format!("{} bytes; {}", reference.len(), listed.join(", ")),
    )
}

fn main() -> ExitCode {
    let runner = Parallel::new(THREADS).expect("thread pool");
    let start = Instant::now();
    let mut lines = vec![criterion_1(), criterion_2(&runner), criterion_3(), criterion_4(), criterion_5(&runner)];
    lines.extend(criterion_6(&runner));
    lines.extend(criterion_7(&runner));
    lines.extend([criterion_8(), criterion_9(), criterion_10(&runner), criterion_11()]);
    println!();
    for l in &lines {
        println!("{} {:>3}  {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.name, l.detail);
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!("\n{} of {} acceptance lines passed in {}", lines.len() - failed, lines.len(), secs(start.elapsed()));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
