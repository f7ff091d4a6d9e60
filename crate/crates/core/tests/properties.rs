use std::f64::consts::TAU;

use proptest::prelude::*;
use rbe_core::entangle::{qotp_lock, qotp_unlock, rbe_lock, rbe_unlock, EprPair, QotpKey};
use rbe_core::protocols::{
    intercept_resend, no_eve, run_protocol, wm_attack_bb84, wm_attack_dl04, wm_attack_rbe, Protocol, ProtocolConfig,
};
use rbe_core::rbe::{dec, enc, eval_cn_not, eval_d, eval_not, KeySpace, PhaseSign, RbeKey};
use rbe_core::stream::batch_rng;
use rbe_core::weakmeas::{w_epsilon, weak_branches, WeakStrength};
use rbe_core::{OrthonormalBasis, StateVector, Unitary, C64};

const TOL: f64 = 1e-12;

fn key() -> impl Strategy<Value = RbeKey> {
    (0.0..=TAU, any::<bool>())
        .prop_map(|(t, p)| RbeKey::new(t, if p { PhaseSign::Plus } else { PhaseSign::Minus }).unwrap())
}

fn state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("nonzero", |v| {
        StateVector::normalized(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).ok()
    })
}

fn single_qubit_unitary() -> impl Strategy<Value = Unitary> {
    (0.0..TAU, 0.0..TAU, 0.0..TAU)
        .prop_map(|(t, p, g)| OrthonormalBasis::from_angles(t, p).unwrap().to_unitary().with_phase(g))
}

proptest! {
    #[test]
    fn basis_is_orthonormal(theta in -10.0f64..10.0, phi in -10.0f64..10.0) {
        let g = OrthonormalBasis::from_angles(theta, phi).unwrap().gram();
        prop_assert!((g[0][0] - 1.0).norm() < TOL && (g[1][1] - 1.0).norm() < TOL);
        prop_assert!(g[0][1].norm() < TOL && g[1][0].norm() < TOL);
    }

    #[test]
    fn gates_preserve_norm(s in state(3), u in single_qubit_unitary(), q in 0usize..3, c in 0usize..3, t in 0usize..3) {
        let out = s.apply(&u, &[q]).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < TOL);
        if c != t {
            let out = out.apply(&Unitary::cnot(), &[c, t]).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn products_stay_unitary(a in single_qubit_unitary(), b in single_qubit_unitary()) {
        let k = a.kron(&b).mul(&Unitary::cnot()).unwrap().mul(&Unitary::d_gate()).unwrap();
        prop_assert!(k.unitarity_deviation() < 1e-10);
    }

    #[test]
    fn distributions_sum_to_one(s in state(2), t0 in 0.0..TAU, p0 in 0.0..TAU, t1 in 0.0..TAU, p1 in 0.0..TAU) {
        let bases = [OrthonormalBasis::from_angles(t0, p0).unwrap(), OrthonormalBasis::from_angles(t1, p1).unwrap()];
        let d = s.outcome_distribution(&bases).unwrap();
        prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < TOL);
        prop_assert!(d.iter().all(|&p| p >= -TOL));
    }

    #[test]
    fn tensor_is_normalized(a in state(1), b in state(2)) {
        prop_assert!((a.tensor(&b).unwrap().norm_sqr() - 1.0).abs() < TOL);
    }

    #[test]
    fn decryption_is_perfect(k in key(), bit in 0u8..2, seed in any::<u64>()) {
        let c = enc(bit, &k);
        let plain = rbe_core::rbe::decrypt_state(&c, &k);
        prop_assert!((plain.amplitude(usize::from(bit)).norm() - 1.0).abs() < TOL);
        prop_assert_eq!(dec(&c, &k, &mut batch_rng(seed, 0, 0)), bit);
    }

    #[test]
    fn not_is_homomorphic(k in key(), bit in 0u8..2, seed in any::<u64>()) {
        let flipped = eval_not(&enc(bit, &k));
        prop_assert!(flipped.qubit().equal_up_to_global_phase(enc(1 - bit, &k).qubit(), TOL));
        prop_assert_eq!(dec(&flipped, &k, &mut batch_rng(seed, 0, 0)), 1 - bit);
    }

    #[test]
    fn cn_not_control_law(k in key(), bit in 0u8..2, pattern in prop::collection::vec(0u8..2, 0..=4)) {
        let out = eval_cn_not(&pattern, &enc(bit, &k)).unwrap();
        let flip = pattern.iter().all(|&c| c == 1);
        let target = if flip { 1 - bit } else { bit };
        let want = StateVector::from_bits(&pattern).unwrap().tensor(enc(target, &k).qubit()).unwrap();
        prop_assert!(out.equal_up_to_global_phase(&want, TOL));
    }

    #[test]
    fn d_gate_balances_the_ciphertext_wire(k in key(), bit in 0u8..2) {
        let out = eval_d(&enc(bit, &k)).unwrap();
        let d = out.outcome_distribution(&[OrthonormalBasis::computational(), k.basis()]).unwrap();
        prop_assert!((d[0] + d[2] - 0.5).abs() < TOL && (d[1] + d[3] - 0.5).abs() < TOL);
    }

    #[test]
    fn w_epsilon_is_unitary(eps in 0.0f64..=1.0) {
        prop_assert!(w_epsilon(WeakStrength::new(eps).unwrap()).unitarity_deviation() < 1e-10);
    }

    #[test]
    fn weak_measurement_is_transparent_on_classical_states(eps in 0.0f64..=1.0, bit in 0u8..2) {
        let s = StateVector::from_bits(&[bit]).unwrap();
        let branches = weak_branches(&s, 0, WeakStrength::new(eps).unwrap()).unwrap();
        prop_assert!((branches.iter().map(|b| b.probability).sum::<f64>() - 1.0).abs() < TOL);
        for b in branches {
            prop_assert!(b.post_state.equal_up_to_global_phase(&s, TOL));
        }
    }

    #[test]
    fn zero_strength_is_identity(s in state(2), q in 0usize..2) {
        let b = weak_branches(&s, q, WeakStrength::new(0.0).unwrap()).unwrap();
        prop_assert_eq!(b.len(), 1);
        prop_assert_eq!(b[0].ancilla_bit, 0);
        prop_assert!(b[0].post_state.equal_up_to_global_phase(&s, TOL));
    }

    #[test]
    fn lock_round_trips(ka in key(), kb in key(), q in (0u8..2, 0u8..2, 0u8..2, 0u8..2)) {
        let pair = EprPair::new();
        let back = rbe_unlock(&rbe_lock(&pair, &ka, &kb), &ka, &kb);
        prop_assert!((back.fidelity_with_phi_plus() - 1.0).abs() < TOL);
        let (a, b) = (QotpKey { x: q.0, z: q.1 }, QotpKey { x: q.2, z: q.3 });
        prop_assert!((qotp_unlock(&qotp_lock(&pair, &a, &b), &a, &b).fidelity_with_phi_plus() - 1.0).abs() < TOL);
    }
}

fn protocol() -> impl Strategy<Value = Protocol> {
    prop_oneof![Just(Protocol::Bb84), Just(Protocol::Bb84Informed), Just(Protocol::Dl04), Just(Protocol::RbeQkd)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn honest_runs_agree_and_respect_causality(p in protocol(), n in 1usize..8, informed in any::<bool>(), seed in any::<u64>()) {
        let mut cfg = ProtocolConfig::new(p, n);
        cfg.informed_check = informed;
        cfg.key_space = KeySpace::Discrete { n: 64 };
        let t = run_protocol(&cfg, &no_eve(), &mut batch_rng(seed, 0, 0)).unwrap();
        prop_assert!(!t.aborted);
        prop_assert_eq!(t.mismatches(), 0);
        prop_assert_eq!(&t.alice_key, &t.bob_key);
        prop_assert!(t.check_causality().is_ok());
    }

    #[test]
    fn eve_outputs_only_when_nobody_aborts(p in protocol(), n in 1usize..4, eps in 0.0f64..=1.0, which in 0usize..4, seed in any::<u64>()) {
        let eve = match which {
            0 => wm_attack_bb84(eps).unwrap(),
            1 => wm_attack_dl04(eps).unwrap(),
            2 => wm_attack_rbe(eps).unwrap(),
            _ => intercept_resend(),
        };
        let cfg = ProtocolConfig::new(p, n);
        let t = run_protocol(&cfg, &eve, &mut batch_rng(seed, 0, 0)).unwrap();
        prop_assert!(t.check_causality().is_ok());
        let rec = t.eve.as_ref().unwrap();
        prop_assert!(rec.target < t.rounds.len());
        if let Some((e, i)) = rec.output {
            prop_assert!(!t.aborted);
            prop_assert!(e <= 1 && i < t.key_len());
        }
    }
}

#[test]
fn disturbance_grows_with_strength() {
    let plus = OrthonormalBasis::hadamard().state(0);
    let mut last = f64::INFINITY;
    for k in 0..=100 {
        let eps = k as f64 / 100.0;
        let f: f64 = weak_branches(&plus, 0, WeakStrength::new(eps).unwrap())
            .unwrap()
            .iter()
            .map(|b| b.probability * plus.fidelity(&b.post_state).unwrap())
            .sum();
        assert!(f <= last + 1e-12, "eps {eps}: {f} > {last}");
        last = f;
    }
}
