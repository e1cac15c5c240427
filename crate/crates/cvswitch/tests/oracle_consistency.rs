//! Cross-checks between the phase-space displacement algebra and the
//! truncated number-basis oracle: the two paths share no code beyond the
//! displacement parameters, so agreement here validates the composition
//! phase, the interference probabilities, and the heterodyne density model
//! against brute-force matrix quantum mechanics.

use cvswitch::fock_oracle::{
    apply_controlled_word, coherent_amplitudes, control_outcome_probs, displacement_matrix,
    ControlProbeState,
};
use cvswitch::rng::stream;
use cvswitch::schemes::{ion_trap_plus_probability, ion_trap_word, ProblemInstance};
use cvswitch::weyl::{normalize, switch_word, Displacement, DisplacementWord};
use num_complex::Complex64 as C64;
use rand::Rng;

const TAU: f64 = std::f64::consts::TAU;

fn wrap_angle(d: f64) -> f64 {
    d - TAU * (d / TAU).round()
}

fn overlap(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(&a, &b)| a.conj() * b).sum()
}

fn random_axis_word<R: Rng>(rng: &mut R, max_len: usize, max_mag: f64) -> DisplacementWord {
    let len = rng.random_range(1..=max_len);
    let factors: Vec<Displacement> = (0..len)
        .map(|_| {
            let mag = rng.random_range(-max_mag..=max_mag);
            if rng.random() {
                Displacement::position(mag)
            } else {
                Displacement::momentum(mag)
            }
        })
        .collect();
    DisplacementWord::from(factors)
}

/// Matrix-exponential evolution of the vacuum through an arbitrary word
/// reduces to a single coherent state times the word's accumulated phase.
#[test]
fn words_reduce_to_a_single_displacement_and_phase() {
    let dim = 64;
    let mut rng = stream(0x0AC1E, &[1]);
    for case in 0..25 {
        let word = random_axis_word(&mut rng, 6, 0.7);
        let form = normalize(&word);

        let mut state = vec![C64::new(0.0, 0.0); dim];
        state[0] = C64::new(1.0, 0.0);
        for factor in word.factors.iter().rev() {
            state = displacement_matrix(factor.alpha, dim).unwrap().apply(&state);
        }

        let reference = coherent_amplitudes(form.total_alpha, dim);
        let overlap = overlap(&reference, &state);
        let fidelity = overlap.norm_sqr();
        assert!(
            fidelity >= 1.0 - 1e-8,
            "case {case}: fidelity {fidelity} for word of {} factors",
            word.factors.len()
        );
        let phase_error = wrap_angle(overlap.arg() - form.phase);
        assert!(
            phase_error.abs() < 1e-6,
            "case {case}: phase off by {phase_error}"
        );
    }
}

/// Interference probabilities of order-superposed words computed by dense
/// matrix action match `(1 ± cos((Σx)(Σp)))/2`, and the high-level
/// probability helper agrees with the oracle on the same instances.
#[test]
fn switch_interference_matches_the_phase_space_prediction() {
    let dim = 64;
    let mut rng = stream(0x0AC1E, &[2]);
    for case in 0..40 {
        let n = rng.random_range(1..=3usize);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect();
        let ps: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect();
        let word = switch_word(&xs, &ps);

        let evolved = apply_controlled_word(&ControlProbeState::plus_vacuum(dim), &word).unwrap();
        let (p_plus, p_minus) = control_outcome_probs(&evolved);

        let phase: f64 = xs.iter().sum::<f64>() * ps.iter().sum::<f64>();
        let expected = (1.0 + phase.cos()) / 2.0;
        assert!(
            (p_plus - expected).abs() < 1e-8,
            "case {case}: p(+) = {p_plus} vs {expected}"
        );
        assert!((p_plus + p_minus - 1.0).abs() < 1e-10, "case {case}: not normalized");

        let inst = ProblemInstance::from_lists(xs, ps).unwrap();
        let analytic = cvswitch::schemes::switch_plus_probability(&inst);
        assert!(
            (p_plus - analytic).abs() < 1e-8,
            "case {case}: oracle {p_plus} vs analytic {analytic}"
        );
    }
}

/// The out-and-back echo word doubles the interference phase; the oracle
/// reproduces both the doubled-phase probability and its analytic helper.
#[test]
fn echo_interference_doubles_the_phase() {
    let dim = 64;
    let mut rng = stream(0x0AC1E, &[3]);
    for case in 0..25 {
        let n = rng.random_range(1..=3usize);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect();
        let ps: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect();
        let word = ion_trap_word(&xs, &ps);

        let evolved = apply_controlled_word(&ControlProbeState::plus_vacuum(dim), &word).unwrap();
        let (p_plus, _) = control_outcome_probs(&evolved);

        let phase: f64 = 2.0 * xs.iter().sum::<f64>() * ps.iter().sum::<f64>();
        let expected = (1.0 + phase.cos()) / 2.0;
        assert!(
            (p_plus - expected).abs() < 1e-8,
            "case {case}: echo p(+) = {p_plus} vs {expected}"
        );

        let inst = ProblemInstance::from_lists(xs, ps).unwrap();
        let analytic = ion_trap_plus_probability(&inst);
        assert!((p_plus - analytic).abs() < 1e-8);
    }
}

/// Squared overlaps with coherent projectors reproduce the Gaussian
/// heterodyne density `|⟨β|γ⟩|²/π = e^{−|β−γ|²}/π` around the evolved
/// amplitude.
#[test]
fn heterodyne_density_is_the_expected_gaussian() {
    let dim = 64;
    let word = DisplacementWord::from(vec![
        Displacement::momentum(-0.4),
        Displacement::position(0.6),
    ]);
    let form = normalize(&word);

    let mut state = vec![C64::new(0.0, 0.0); dim];
    state[0] = C64::new(1.0, 0.0);
    for factor in word.factors.iter().rev() {
        state = displacement_matrix(factor.alpha, dim).unwrap().apply(&state);
    }

    for dr in [-1.5f64, -0.5, 0.5, 1.5] {
        for di in [-1.5f64, -0.5, 0.5, 1.5] {
            let beta = form.total_alpha + C64::new(dr, di);
            let projector = coherent_amplitudes(beta, dim);
            let density = overlap(&projector, &state).norm_sqr() / std::f64::consts::PI;
            let expected = (-(dr * dr + di * di)).exp() / std::f64::consts::PI;
            assert!(
                (density - expected).abs() < 1e-8,
                "offset ({dr}, {di}): {density} vs {expected}"
            );
        }
    }
}
