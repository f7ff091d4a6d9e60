//! Exact-identity checks run by `rbe-lab selftest`. Nothing here samples; each
//! check is a deterministic comparison against a closed form.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use rbe_core::protocols::fig8_tree;
use rbe_core::qcore::equal_up_to_global_phase;
use rbe_core::rbe::{
    cnot_no_go_witness, decrypt_state, density_gap, enc, eval_cn_not, eval_cnot, eval_d, eval_not, hadamard_probe,
    zero_outcome_closed_form, zero_outcome_direct, KeySpace, NoGoCase, PhaseSign, RbeKey,
};
use rbe_core::{StateVector, Unitary, AMPLITUDE_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest deviation seen, or a short note.
    pub detail: String,
}

fn grid_keys() -> Vec<RbeKey> {
    let mut keys = Vec::new();
    for i in 0..100 {
        for phase in [PhaseSign::Plus, PhaseSign::Minus] {
            keys.push(RbeKey::new(TAU * f64::from(i) / 100.0, phase).expect("in range"));
        }
    }
    keys
}

fn same(a: &StateVector, b: &StateVector) -> bool {
    equal_up_to_global_phase(a, b, AMPLITUDE_TOL)
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn decryption() -> Check {
    let mut worst = 0.0f64;
    for k in grid_keys() {
        for b in 0..2u8 {
            let d = decrypt_state(&enc(b, &k), &k);
            worst = worst.max(1.0 - d.amplitude(usize::from(b)).norm());
        }
    }
    check("decryption recovers the plaintext basis state", worst < AMPLITUDE_TOL, format!("max deviation {worst:.3e}"))
}

fn homomorphic_not() -> Check {
    let ok = grid_keys().iter().all(|k| (0..2u8).all(|b| same(eval_not(&enc(b, k)).qubit(), enc(1 - b, k).qubit())));
    check("NOT maps Enc(b) to Enc(1-b)", ok, "100-point grid, both phases".into())
}

fn d_gate() -> Check {
    // D (|0> psi_b) = (|0> psi_b + s_b e^{i phi} |1> psi_{1-b}) / sqrt 2 with s_0 = 1, s_1 = -1
    let mut worst = 0.0f64;
    for k in grid_keys() {
        for b in 0..2u8 {
            let out = eval_d(&enc(b, &k)).expect("two qubits");
            let (lo, hi) = (enc(b, &k).into_state(), enc(1 - b, &k).into_state());
            let sign = if b == 0 { 1.0 } else { -1.0 };
            for j in 0..4 {
                let want = if j < 2 { lo.amplitude(j) } else { hi.amplitude(j - 2) * k.phase().unit() * sign };
                worst = worst.max((out.amplitude(j) - want * FRAC_1_SQRT_2).norm());
            }
        }
    }
    check("D gate splits the ciphertext wire evenly", worst < AMPLITUDE_TOL, format!("max deviation {worst:.3e}"))
}

fn controlled_nots() -> Check {
    let mut ok = grid_keys().iter().all(|k| {
        (0..2u8).all(|c| {
            (0..2u8).all(|b| {
                let out = eval_cnot(c, &enc(b, k)).expect("two qubits");
                let want = StateVector::from_bits(&[c]).expect("bit").tensor(enc(b ^ c, k).qubit()).expect("small");
                same(&out, &want)
            })
        })
    });
    for n in 1..=4usize {
        for pattern in 0..(1u32 << n) {
            let controls: Vec<u8> = (0..n).map(|i| ((pattern >> (n - 1 - i)) & 1) as u8).collect();
            let fire = controls.iter().all(|&c| c == 1);
            for k in grid_keys().iter().step_by(7) {
                for b in 0..2u8 {
                    let out = eval_cn_not(&controls, &enc(b, k)).expect("at most five qubits");
                    let target = enc(if fire { 1 - b } else { b }, k);
                    let want = StateVector::from_bits(&controls).expect("bits").tensor(target.qubit()).expect("small");
                    ok &= same(&out, &want);
                }
            }
        }
    }
    check("controlled NOTs act on the ciphertext as on the plaintext", ok, "up to 4 controls, all patterns".into())
}

fn hadamard_non_homomorphic() -> Check {
    let worst =
        grid_keys().iter().map(|k| (hadamard_probe(k) - k.theta().cos().powi(2) / 2.0).abs()).fold(0.0, f64::max);
    check(
        "Hadamard on a ciphertext keeps psi_0 with probability cos^2(theta)/2",
        worst < AMPLITUDE_TOL,
        format!("max deviation {worst:.3e}"),
    )
}

fn no_go() -> Check {
    let report = cnot_no_go_witness(&Unitary::cnot()).expect("two-qubit gate");
    let ok = report.violates_case(NoGoCase::ThetaZero) || report.violates_case(NoGoCase::ThetaPi);
    check(
        "plain CNOT cannot serve as an encrypted CNOT",
        ok,
        format!("{} constraints violated", report.violated().count()),
    )
}

fn outcome_probability() -> Check {
    let mut worst = 0.0f64;
    for i in 0..40 {
        for j in 0..40 {
            let (t, t0) = (TAU * f64::from(i) / 40.0, PI * f64::from(j) / 40.0);
            for (phi, phi0) in [(PI / 2.0, 0.3), (-PI / 2.0, 2.1), (1.0, -1.0)] {
                let d = zero_outcome_direct(t, phi, t0, phi0).expect("finite angles");
                worst = worst.max((d - zero_outcome_closed_form(t, phi, t0, phi0)).abs());
            }
        }
    }
    check(
        "outcome probability closed form matches the inner product",
        worst < AMPLITUDE_TOL,
        format!("max deviation {worst:.3e}"),
    )
}

fn averaged_ciphertexts() -> Check {
    let mut ok = true;
    let mut detail = String::new();
    for n in [3, 64, 4096] {
        let gap = density_gap(&KeySpace::discrete(n).expect("n >= 1"), 0).expect("discrete");
        ok &= gap < AMPLITUDE_TOL;
        detail.push_str(&format!("N={n}: {gap:.1e}; "));
    }
    let single = density_gap(&KeySpace::discrete(1).expect("n >= 1"), 0).expect("discrete");
    ok &= (single - 1.0).abs() < AMPLITUDE_TOL;
    detail.push_str(&format!("N=1: {single}"));
    check("key-averaged encryptions of 0 and 1 coincide", ok, detail)
}

fn bb84_tree() -> Check {
    let mut worst = 0.0f64;
    for i in 0..=1000 {
        let e = f64::from(i) / 1000.0;
        let t = fig8_tree(e).expect("in range");
        worst = worst.max((t.eve_correct_mass() - (0.5 + e / 8.0)).abs()).max((t.bob_error_mass() - e / 4.0).abs());
        worst = worst.max((t.total_mass() - 1.0).abs());
    }
    check("BB84 attack tree masses", worst < AMPLITUDE_TOL, format!("max deviation {worst:.3e}"))
}

pub fn run_selftest() -> Vec<Check> {
    vec![
        decryption(),
        homomorphic_not(),
        d_gate(),
        controlled_nots(),
        hadamard_non_homomorphic(),
        no_go(),
        outcome_probability(),
        averaged_ciphertexts(),
        bb84_tree(),
    ]
}
