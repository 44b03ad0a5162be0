//! End-to-end checks of solved models: DC limits, drive duality, linearity,
//! passivity, model agreement at low frequency, and the postprocess chain.

use num_complex::Complex64;

use foilfem::mesh::SymmetryMode;
use foilfem::oracle;
use foilfem::postprocess::{self, ImpedancePoint};
use foilfem::presets::{cartesian_example, CartesianExampleParams, FoilWindingModel};
use foilfem::solver::{solve_frequency, sweep, Drive, ModelKind};

const TAU: f64 = std::f64::consts::TAU;

/// Small Cartesian model (coarse mesh) shared across tests.
fn small_cartesian() -> FoilWindingModel {
    cartesian_example(&CartesianExampleParams {
        target_h: 1.0e-3,
        ..Default::default()
    })
    .unwrap()
}

fn solve(model: &FoilWindingModel, f: f64, kind: ModelKind) -> foilfem::solver::Solution {
    solve_frequency(
        &model.system,
        TAU * f,
        Drive::Current(Complex64::ONE),
        kind,
    )
    .unwrap()
}

#[test]
fn dc_impedance_matches_series_resistance_oracle() {
    let model = small_cartesian();
    let sol = solve(&model, 0.0, ModelKind::Capacitive);
    let z = sol.impedance().unwrap();
    let want = oracle::dc_resistance(&model.winding, &model.symmetry, 60e6);
    assert!((z.re - want).abs() / want < 1e-10, "Z = {z}, want {want}");
    assert!(z.im.abs() < 1e-12 * want);
}

#[test]
fn dc_voltage_profile_constant_per_turn_drop() {
    let model = small_cartesian();
    let sol = solve(&model, 0.0, ModelKind::Capacitive);
    let r_dc = oracle::dc_resistance(&model.winding, &model.symmetry, 60e6);
    let per_turn = r_dc / model.winding.turns() as f64; // 13.2 mV at 1 A
    let samples = postprocess::default_sample_points(&model.basis, 100);
    let phi = postprocess::voltage_profile(&model.basis, &sol, &samples).unwrap();
    for v in &phi {
        assert!(
            (v.re - per_turn).abs() / per_turn < 0.01,
            "Φ = {v}, want {per_turn}"
        );
        assert!(v.im.abs() < 1e-12 * per_turn);
    }
}

#[test]
fn dc_currents_are_purely_conductive() {
    let model = small_cartesian();
    let sol = solve(&model, 0.0, ModelKind::Capacitive);
    let ctx = model.post_context();
    let grev = postprocess::greville_points(&model.basis);
    let profiles = postprocess::current_profiles(&ctx, &sol, &grev).unwrap();
    for (c, k) in profiles.conductive.iter().zip(&profiles.capacitive) {
        assert!((c - Complex64::ONE).norm() < 5e-3, "I_cond = {c}");
        assert_eq!(*k, Complex64::ZERO);
    }
}

#[test]
fn standard_model_current_profile_uniform() {
    // with the capacitive blocks off, the current condition forces
    // I_cond(α) = I up to discretization error at every sample
    let model = small_cartesian();
    let sol = solve(&model, 50.0, ModelKind::Standard);
    let ctx = model.post_context();
    let grev = postprocess::greville_points(&model.basis);
    let icond = postprocess::conductive_current_profile(&ctx, &sol, &grev).unwrap();
    let icap = postprocess::capacitive_current_profile(&ctx, &sol, &grev).unwrap();
    for (c, k) in icond.iter().zip(&icap) {
        assert!((c - Complex64::ONE).norm() < 5e-3, "I_cond = {c}");
        assert_eq!(*k, Complex64::ZERO);
    }
}

#[test]
fn drive_duality_voltage_reproduces_current() {
    let model = small_cartesian();
    for f in [0.0, 50.0, 5e3] {
        let s_current = solve(&model, f, ModelKind::Capacitive);
        let u = s_current.terminal_voltage;
        let s_voltage = solve_frequency(
            &model.system,
            TAU * f,
            Drive::Voltage(u),
            ModelKind::Capacitive,
        )
        .unwrap();
        assert!(
            (s_voltage.terminal_current - Complex64::ONE).norm() < 1e-10,
            "f = {f}: I = {}",
            s_voltage.terminal_current
        );
    }
}

#[test]
fn linearity_in_the_drive() {
    let model = small_cartesian();
    let f = 120.0;
    let s1 = solve(&model, f, ModelKind::Capacitive);
    let s2 = solve_frequency(
        &model.system,
        TAU * f,
        Drive::Current(Complex64::new(2.0, 0.0)),
        ModelKind::Capacitive,
    )
    .unwrap();
    let rel = (s2.terminal_voltage - s1.terminal_voltage * 2.0).norm()
        / s1.terminal_voltage.norm();
    assert!(rel < 1e-12, "U(2I) ≠ 2U(I): rel = {rel}");
    // impedance invariant under drive scaling
    let z1 = s1.impedance().unwrap();
    let z2 = s2.impedance().unwrap();
    assert!((z1 - z2).norm() / z1.norm() < 1e-12);
}

#[test]
fn passivity_over_the_band() {
    let model = small_cartesian();
    for k in 0..16 {
        let f = 10f64.powf(-1.0 + 7.0 * k as f64 / 15.0);
        for kind in [ModelKind::Standard, ModelKind::Capacitive] {
            let s = solve(&model, f, kind);
            let p = (s.terminal_voltage * s.terminal_current.conj()).re;
            assert!(p >= 0.0, "f = {f}, {kind:?}: Re(U conj I) = {p}");
        }
    }
}

#[test]
fn models_agree_in_lowest_decade() {
    let model = small_cartesian();
    let freqs: Vec<f64> = (0..5).map(|k| 0.01 * 10f64.powf(k as f64 / 4.0)).collect();
    let drive = Drive::Current(Complex64::ONE);
    let std = sweep(&model.system, &freqs, drive, ModelKind::Standard).unwrap();
    let cap = sweep(&model.system, &freqs, drive, ModelKind::Capacitive).unwrap();
    for ((f, zs), (_, zc)) in std.impedances().iter().zip(cap.impedances().iter()) {
        let rel = (zs.norm() - zc.norm()).abs() / zs.norm();
        assert!(rel < 1e-6, "f = {f}: rel = {rel}");
    }
}

#[test]
fn winding_equation_residual_small_across_band() {
    let model = small_cartesian();
    for f in [0.01, 1.0, 100.0, 1e4, 1e6] {
        for kind in [ModelKind::Standard, ModelKind::Capacitive] {
            let s = solve(&model, f, kind);
            let r = foilfem::solver::winding_equation_residual(&model.system, &s);
            assert!(r < 1e-10, "f = {f} {kind:?}: residual {r}");
        }
    }
}

#[test]
fn kirchhoff_projection_matches_assembled_equation() {
    let model = small_cartesian();
    let ctx = model.post_context();
    for f in [0.0, 10.0, 1e3, 1e5] {
        let s = solve(&model, f, ModelKind::Capacitive);
        let r = postprocess::kirchhoff_projection_residual(&ctx, &s, &model.system.turn_weights);
        assert!(r < 1e-10, "f = {f}: projection residual {r}");
    }
}

#[test]
fn flux_contours_encircle_the_winding_at_low_frequency() {
    let model = small_cartesian();
    let sol = solve(&model, 10.0, ModelKind::Capacitive);
    let re_field: Vec<f64> = sol.field.iter().map(|c| c.re).collect();
    let contours = postprocess::flux_contours(&model.mesh, &re_field, 8);
    assert!(!contours.is_empty());
    for c in &contours {
        assert!(c.closed, "contour at level {} is not closed", c.level);
    }
}

#[test]
fn impedance_point_phase_convention() {
    let model = small_cartesian();
    // resistive at very low f, inductive higher up
    let z_low = solve(&model, 0.01, ModelKind::Capacitive).impedance().unwrap();
    let z_ind = solve(&model, 5e3, ModelKind::Capacitive).impedance().unwrap();
    let p_low = ImpedancePoint { f_hz: 0.01, z: z_low }.phase_deg();
    let p_ind = ImpedancePoint { f_hz: 5e3, z: z_ind }.phase_deg();
    assert!(p_low.abs() < 1.0, "DC-ish phase {p_low}");
    assert!(p_ind > 80.0 && p_ind <= 90.0, "inductive phase {p_ind}");
}

#[test]
fn axisymmetric_model_round_trips_through_msh() {
    // write the generated pot mesh, read it back, assemble on both,
    // identical impedance
    let p = foilfem::presets::PotInductorParams {
        target_h: 2.5e-3,
        ..Default::default()
    };
    let model = foilfem::presets::pot_inductor(&p).unwrap();
    let text = foilfem::mesh::write_msh(&model.mesh);
    let back = foilfem::mesh::read_msh(&text, &foilfem::mesh::MshTagMap::default()).unwrap();
    let rebuilt = FoilWindingModel::build(
        back,
        SymmetryMode::Axisymmetric,
        model.winding,
        model.materials,
        1000.0,
        7,
    )
    .unwrap();
    let f = 50.0;
    let z0 = solve(&model, f, ModelKind::Capacitive).impedance().unwrap();
    let z1 = solve(&rebuilt, f, ModelKind::Capacitive).impedance().unwrap();
    assert!(
        (z0 - z1).norm() / z0.norm() < 1e-12,
        "MSH round trip changed impedance: {z0} vs {z1}"
    );
}

#[test]
fn sweep_records_failures_without_aborting() {
    // a deliberately broken system: singular at every frequency
    let sys = foilfem::assembly::AssembledSystem {
        stiffness: foilfem::sparse::CsrMatrix::zeros(1, 1),
        mass: foilfem::sparse::CsrMatrix::zeros(1, 1),
        coupling: foilfem::sparse::CsrMatrix::zeros(1, 1),
        conductance: foilfem::sparse::CsrMatrix::zeros(1, 1),
        cap_grad: foilfem::sparse::CsrMatrix::zeros(1, 1),
        cap_mass: foilfem::sparse::CsrMatrix::zeros(1, 1),
        turn_weights: vec![1.0],
        source: vec![0.0],
        dirichlet: vec![],
        symmetry: SymmetryMode::Cartesian2D { length: 1.0 },
    };
    let r = sweep(
        &sys,
        &[1.0, 10.0],
        Drive::Current(Complex64::ONE),
        ModelKind::Standard,
    )
    .unwrap();
    assert_eq!(r.points.len(), 2);
    assert_eq!(r.failures(), 2);
    assert!(r.impedances().is_empty());
}
