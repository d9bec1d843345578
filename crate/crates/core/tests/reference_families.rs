//! Reference families, converted at 2.62464 nm⁻²/eV.

use double_layer::bound::{build_chi_problem, find_roots, verify_ladder};
use double_layer::squeeze::{
    analyze_resonance, log_grid, snap_to_resonance, sweep_ladder, Coefficient, Scenario, SqueezeFamily, SweepConfig,
};
use double_layer::xfer::scattering_wavefunction;
use double_layer::{convert_energy, UnitSystem, Wavenumber};

fn ev(x: f64) -> f64 {
    convert_energy(x, UnitSystem::default())
}

fn double_well() -> SqueezeFamily {
    let f = SqueezeFamily::new(2.0, 2.0, 2.0, ev(-0.3), 2.1, ev(-0.5), 12.0, 20.0).unwrap();
    snap_to_resonance(&f, Coefficient::D1, 0.1).unwrap()
}

fn barrier_well() -> SqueezeFamily {
    let f = SqueezeFamily::new(2.0, 2.0, 2.0, ev(0.5), 1.0, ev(-0.5), 0.6, 2.0).unwrap();
    snap_to_resonance(&f, Coefficient::D2, 0.05).unwrap()
}

#[test]
fn double_well_structure_at_unit_scale() {
    let f = double_well();
    assert!((f.d1 - 2.1).abs() < 0.05);
    let spec = f.realize(1.0).unwrap();
    let problem = build_chi_problem(&spec).unwrap();
    assert!((problem.rho - 13.7).abs() < 0.1);
    let ladder = find_roots(&problem);
    assert!(verify_ladder(&spec, &ladder).unwrap().ok());
    assert_eq!(ladder.len(), 6);
}

#[test]
fn double_well_shallowest_level_survives() {
    let f = double_well();
    let sweep = sweep_ladder(&f, &log_grid(1.0, 1e-5, 4).unwrap(), &SweepConfig::default()).unwrap();
    let d = &sweep.diagnostics;
    assert_eq!(d.scenario, Scenario::ShallowestSurvives);
    assert!(d.final_gap.unwrap() < 0.02, "{d:?}");
    let second = sweep.level_from_bottom(1);
    // ε = 1e-3 is the 13th grid point.
    assert!(second[12].unwrap() > 10.0 * second[0].unwrap());
}

#[test]
fn barrier_well_levels_and_jump() {
    let f = barrier_well();
    let expected = [(1.0, 0.320), (0.1, 0.773), (0.01, 0.864)];
    for (eps, kappa) in expected {
        let spec = f.realize(eps).unwrap();
        let ladder = find_roots(&build_chi_problem(&spec).unwrap());
        let k1 = ladder.levels[0];
        assert!((k1 - kappa).abs() < 0.02 * kappa, "eps={eps}: {k1}");
    }
    let an = analyze_resonance(&f, 1e-9).unwrap();
    let theta = an.theta.unwrap();
    assert!((theta - 2.23).abs() < 0.01 * 2.23);
    let spec = f.realize(0.01).unwrap();
    let w = scattering_wavefunction(&spec, Wavenumber::Real(1.04986f64.sqrt())).unwrap();
    let jump = (w.eval(spec.extent()) / w.eval(0.0)).re;
    assert!((jump - theta).abs() < 0.02 * theta, "{jump}");
}
