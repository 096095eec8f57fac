use std::f64::consts::PI;

use blockade::cavity::{build_jc, build_kerr, polariton_eigenbasis, PolaritonLevel};
use blockade::dynamics::{
    coupling_operator, evolve_lindblad, initial_state, nonlinear_hamiltonian, scattering_linear, IntegratorConfig,
    MasterEquation, SystemConfig,
};
use blockade::ladder::LadderConfig;
use blockade::observables::{eels_spectrum, poisson_reference, polariton_statistics, state_fidelity, total_variation, Distribution};
use blockade::tensor::{embed_multi, kron, DensityMatrix, Operator, StateVector};
use blockade::C64;

fn photon_distribution(stats: &Distribution, n_cut: usize) -> Distribution {
    let probs = (0..=n_cut).map(|n| stats.get(&n.to_string())).collect();
    Distribution::new((0..=n_cut).map(|n| n.to_string()).collect(), probs).unwrap()
}

#[test]
fn linear_cavity_propagation_matches_closed_form_and_poisson() {
    let model = build_kerr(0.0, 20).unwrap();
    let ladder = LadderConfig::centered(65).unwrap();
    let g = C64::new(1.0, 0.0);
    let cfg = SystemConfig::new(model, ladder, g, 50.0, 0.0, 0.0).unwrap();
    let vac = polariton_eigenbasis(&cfg.model).vector(PolaritonLevel::Fock(0)).unwrap();
    let rho0 = initial_state(&cfg, &vac).unwrap();
    let ev = evolve_lindblad(&rho0, &cfg, &IntegratorConfig::default()).unwrap();

    let psi0 = StateVector::basis(&ladder.space(), ladder.center).unwrap().kron(&vac).unwrap();
    let ideal = scattering_linear(g, &ladder, &cfg.model).unwrap().apply(&psi0).unwrap();
    assert!(state_fidelity(&ev.rho, &ideal).unwrap() >= 1.0 - 1e-6);

    let stats = polariton_statistics(&ev.rho, &polariton_eigenbasis(&cfg.model)).unwrap();
    let poisson = poisson_reference(1.0, 20).unwrap();
    assert!(total_variation(&photon_distribution(&stats, 20), &poisson) <= 1e-3);

    // every photon costs the electron one quantum
    let eels = eels_spectrum(&ev.rho, &ladder).unwrap();
    for n in 0..6 {
        assert!((eels.get(&(-(n as i64)).to_string()) - poisson.get(&n.to_string())).abs() < 1e-6);
    }
}

#[test]
fn zero_coupling_leaves_populations_unchanged() {
    let model = build_jc(0.03, 4).unwrap();
    let ladder = LadderConfig::centered(9).unwrap();
    let cfg = SystemConfig::new(model, ladder, C64::new(0.0, 0.0), 80.0, 0.01, 0.0).unwrap();
    let basis = polariton_eigenbasis(&cfg.model);
    let up = basis.vector(PolaritonLevel::Upper(1)).unwrap();
    let lo = basis.vector(PolaritonLevel::Lower(2)).unwrap();
    let cav = StateVector::normalized(cfg.model.space().clone(), up.amplitudes() * 0.6 + lo.amplitudes() * C64::new(0.0, 0.8)).unwrap();
    let rho0 = initial_state(&cfg, &cav).unwrap();
    let ev = evolve_lindblad(&rho0, &cfg, &IntegratorConfig::default()).unwrap();
    let stats = polariton_statistics(&ev.rho, &basis).unwrap();
    assert!((stats.get("1+") - 0.36).abs() < 1e-10);
    assert!((stats.get("2-") - 0.64).abs() < 1e-10);
    assert!((eels_spectrum(&ev.rho, &ladder).unwrap().get("0") - 1.0).abs() < 1e-12);
}

/// Propagating in the polariton basis (all operators conjugated by U) and
/// rotating back must reproduce the bare-basis result.
#[test]
fn polariton_basis_propagation_is_equivalent() {
    let model = build_jc(0.05, 4).unwrap();
    let ladder = LadderConfig::centered(13).unwrap();
    let cfg = SystemConfig::new(model, ladder, C64::new(0.9, 0.3), 100.0, 0.05, 1e-3).unwrap();
    let u = polariton_eigenbasis(&cfg.model).unitary().clone();
    let w = embed_multi(&u, &cfg.space()).unwrap();
    let wd = w.adjoint();
    let rotate = |op: &Operator| &(&wd * op) * &w;

    let h = nonlinear_hamiltonian(&cfg).unwrap();
    let b = coupling_operator(&cfg).unwrap();
    let jump = kron(&Operator::identity(&ladder.space()), cfg.model.a()).unwrap();
    let amp = C64::new(0.0, 1.0) * cfg.g_q / cfg.t;
    let bare = MasterEquation::from_operators(&h, &b, &jump, cfg.gamma, amp, cfg.delta).unwrap();
    let rotated = MasterEquation::from_operators(&rotate(&h), &rotate(&b), &rotate(&jump), cfg.gamma, amp, cfg.delta).unwrap();

    let ground = polariton_eigenbasis(&cfg.model).vector(PolaritonLevel::Ground).unwrap();
    let rho0 = initial_state(&cfg, &ground).unwrap();
    let rho0_rot = DensityMatrix::new(cfg.space().clone(), rotate(&Operator::new(cfg.space(), rho0.matrix().clone()).unwrap()).into_matrix()).unwrap();

    let out = bare.propagate(&rho0, cfg.t, 6000).unwrap();
    let out_rot = rotated.propagate(&rho0_rot, cfg.t, 6000).unwrap();
    let back = &(&w * &Operator::new(cfg.space(), out_rot.matrix().clone()).unwrap()) * &wd;
    let diff = Operator::new(cfg.space(), out.matrix().clone()).unwrap().max_abs_diff(&back).unwrap();
    assert!(diff < 1e-10, "{diff}");
}

#[test]
fn evolution_respects_integrator_bounds() {
    let model = build_kerr(0.05, 5).unwrap();
    let ladder = LadderConfig::centered(17).unwrap();
    let cfg = SystemConfig::new(model, ladder, C64::new(PI / 2.0, 0.0), 200.0, 0.0, 1e-4).unwrap();
    let vac = polariton_eigenbasis(&cfg.model).vector(PolaritonLevel::Fock(0)).unwrap();
    let ev = evolve_lindblad(&initial_state(&cfg, &vac).unwrap(), &cfg, &IntegratorConfig::default()).unwrap();
    let d = &ev.diagnostics;
    assert!(d.trace_drift <= 1e-8);
    assert!(d.min_eigenvalue >= -1e-8);
    assert!(d.cutoff_population <= 1e-6);
    assert!(d.halving_change.unwrap() <= 1e-6);
}
