use std::f64::consts::PI;

use blockade::cavity::{build_jc, build_kerr, polariton_eigenbasis, PolaritonLevel};
use blockade::dynamics::{scattering_blockade_levels, scattering_linear};
use blockade::gates::{equivalence_up_to_phase, hadamard, phase_gate, pauli_x};
use blockade::ladder::{build_ladder, comb_state, LadderConfig};
use blockade::observables::{poisson_reference, total_variation, Distribution};
use blockade::tensor::{kron, partial_trace, Operator, StateVector, TensorSpace};
use blockade::C64;
use proptest::prelude::*;

fn amps(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
}

fn state(label: &str, v: &[(f64, f64)]) -> Option<StateVector> {
    let a: Vec<C64> = v.iter().map(|&(r, i)| C64::new(r, i)).collect();
    if a.iter().map(|z| z.norm_sqr()).sum::<f64>() < 1e-6 {
        return None;
    }
    StateVector::normalized(TensorSpace::single(label, a.len()).unwrap(), a.into()).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_of_product_recovers_factors(x in amps(3), y in amps(4)) {
        let (Some(a), Some(b)) = (state("a", &x), state("b", &y)) else { return Ok(()) };
        let rho = a.kron(&b).unwrap().projector();
        let ra = partial_trace(&rho, &["a"]).unwrap();
        let rb = partial_trace(&rho, &["b"]).unwrap();
        prop_assert!(ra.max_abs_diff(&a.projector()).unwrap() < 1e-12);
        prop_assert!(rb.max_abs_diff(&b.projector()).unwrap() < 1e-12);
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kron_of_unitaries_is_unitary(t in -3.0f64..3.0, s in -3.0f64..3.0) {
        let relabel = |op: Operator, label: &str| Operator::new(TensorSpace::single(label, 2).unwrap(), op.matrix().clone()).unwrap();
        let u = kron(&phase_gate(t), &relabel(hadamard(), "q")).unwrap();
        prop_assert!(u.unitarity_error() < 1e-12);
        let v = kron(&relabel(pauli_x(), "q"), &phase_gate(s)).unwrap();
        prop_assert!(v.unitarity_error() < 1e-12);
    }

    #[test]
    fn blockade_scattering_is_unitary(mag in 0.0f64..4.0, theta in -PI..PI, upper in 1usize..4) {
        let model = build_kerr(0.02, 5).unwrap();
        let ladder = LadderConfig::centered(11).unwrap();
        let space = ladder.space().concat(model.space()).unwrap();
        let up = PolaritonLevel::Fock(upper);
        let s = scattering_blockade_levels(C64::from_polar(mag, theta), &model, PolaritonLevel::Fock(upper - 1), up, &space).unwrap();
        prop_assert!(s.unitarity_error() <= 1e-12);
    }

    #[test]
    fn linear_scattering_is_unitary(re in -1.5f64..1.5, im in -1.5f64..1.5) {
        let model = build_kerr(0.0, 8).unwrap();
        let ladder = LadderConfig::centered(9).unwrap();
        let s = scattering_linear(C64::new(re, im), &ladder, &model).unwrap();
        prop_assert!(s.unitarity_error() <= 1e-12);
    }

    #[test]
    fn equivalence_ignores_global_phase(theta in -PI..PI, t in -3.0f64..3.0) {
        let u = phase_gate(t);
        let v = u.scale(C64::from_polar(1.0, theta));
        let eq = equivalence_up_to_phase(&v, &u).unwrap();
        prop_assert!(eq.equivalent);
        prop_assert!(eq.deviation < 1e-12);
    }

    #[test]
    fn comb_states_are_ladder_eigenvectors(m in 0usize..16) {
        let cfg = LadderConfig::centered(16).unwrap();
        let phi = 2.0 * PI * m as f64 / 16.0;
        let psi = comb_state(phi, &cfg).unwrap();
        let out = build_ladder(&cfg).unwrap().apply(&psi).unwrap();
        let overlap = psi.inner(&out).unwrap();
        prop_assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distributions_renormalize(raw in prop::collection::vec(0.0f64..1.0, 1..12)) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-6);
        let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let labels = (0..probs.len()).map(|k| k.to_string()).collect();
        let d = Distribution::new(labels, probs).unwrap();
        prop_assert!((d.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(total_variation(&d, &d) == 0.0);
    }

    #[test]
    fn poisson_reference_sums_to_one(mean in 0.0f64..4.0) {
        let p = poisson_reference(mean, 40).unwrap();
        prop_assert!((p.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jc_polariton_basis_is_unitary(kappa in 0.001f64..0.1, n in 2usize..8) {
        let model = build_jc(kappa, n).unwrap();
        let basis = polariton_eigenbasis(&model);
        prop_assert!(basis.unitary().unitarity_error() < 1e-12);
    }
}
