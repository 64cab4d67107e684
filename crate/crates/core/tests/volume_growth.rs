use std::f64::consts::PI;

use slowvol::fit::Classification;
use slowvol::flow_models::{hamiltonian, FlowConfig, HamiltonianModel};
use slowvol::volume_growth::{
    doubling_times, evolve_and_measure, geometric_times, initial_fiber_disc, initial_fiber_sphere,
    integral_growth_check, mesh_volume, reduction_gap, slow_vol_fit, Cells, ReductionSettings,
    RefineSettings, VolumeSeries,
};

fn settings(threshold: f64) -> RefineSettings {
    RefineSettings {
        certify: false,
        ..RefineSettings::new(threshold, 400_000)
    }
}

fn flat_circle(times: &[f64], threshold: f64, weights: Option<[f64; 6]>) -> VolumeSeries {
    let m = HamiltonianModel::flat_identity(2);
    let mut mesh = initial_fiber_sphere(&m, &[0.25, 0.5], 64).unwrap();
    let s = RefineSettings {
        metric_weights: weights,
        ..settings(threshold)
    };
    evolve_and_measure(&m, &mut mesh, times, &FlowConfig::exact(), &s).unwrap()
}

fn flat_disc(times: &[f64], threshold: f64, weights: Option<[f64; 6]>) -> VolumeSeries {
    let m = HamiltonianModel::flat_identity(2);
    let mut mesh = initial_fiber_disc(&m, &[0.0, 0.0], 128, 4, 0.05).unwrap();
    let s = RefineSettings {
        metric_weights: weights,
        ..settings(threshold)
    };
    evolve_and_measure(&m, &mut mesh, times, &FlowConfig::exact(), &s).unwrap()
}

#[test]
fn initial_fiber_spheres_lie_on_sigma() {
    let flat = HamiltonianModel::flat_identity(2);
    let mesh = initial_fiber_sphere(&flat, &[0.1, 0.2], 4096).unwrap();
    assert!((mesh_volume(&flat, &mesh, &None) - 2.0 * PI).abs() < 1e-6);

    for m in [
        HamiltonianModel::randers([0.4, 0.0]).unwrap(),
        HamiltonianModel::Nil3,
        HamiltonianModel::Sol3,
    ] {
        let q = vec![0.3; m.chart_dim()];
        let resolution = if m.manifold_dim() == 2 { 64 } else { 3 };
        let mesh = initial_fiber_sphere(&m, &q, resolution).unwrap();
        for x in &mesh.initial {
            assert!((hamiltonian(&m, x).unwrap() - 1.0).abs() < 1e-12, "{m}");
            assert_eq!(x.q(), q.as_slice());
        }
    }
}

#[test]
fn flat_disc_area_closed_form() {
    let eps = 0.05;
    let s = flat_disc(&doubling_times(4), 0.3, None);
    for (t, a) in s.times.iter().zip(&s.volumes) {
        let exact = (1.0 - eps * eps) * PI * (1.0 + 4.0 * t * t);
        assert!((a - exact).abs() / exact < 1e-3, "t = {t}: {a} vs {exact}");
    }
}

#[test]
fn flat_disc_and_sphere_exponents() {
    let times = geometric_times(1.0, 16.0, 9);
    let disc = slow_vol_fit(&flat_disc(&times, 0.3, None), 0.5).unwrap();
    assert!((disc.exponent - 2.0).abs() <= 0.05, "{}", disc.exponent);
    let circle = slow_vol_fit(&flat_circle(&doubling_times(7), 0.1, None), 0.5).unwrap();
    assert!((circle.exponent - 1.0).abs() <= 0.05, "{}", circle.exponent);
}

#[test]
fn refinement_converges_on_flat_and_round_models() {
    let times = doubling_times(6);
    let coarse = flat_circle(&times, 0.2, None);
    let fine = flat_circle(&times, 0.1, None);
    for (a, b) in coarse.volumes.iter().zip(&fine.volumes) {
        assert!((a - b).abs() / b <= 0.01, "{a} vs {b}");
    }

    let sphere = HamiltonianModel::RoundSphere2;
    let run = |threshold: f64| {
        let mut mesh = initial_fiber_disc(&sphere, &[0.0, 0.0, 1.0], 64, 4, 0.05).unwrap();
        let times = geometric_times(0.5, 8.0, 6);
        evolve_and_measure(
            &sphere,
            &mut mesh,
            &times,
            &FlowConfig::exact(),
            &settings(threshold),
        )
        .unwrap()
    };
    let (coarse, fine) = (run(0.2), run(0.1));
    for (a, b) in coarse.volumes.iter().zip(&fine.volumes) {
        assert!((a - b).abs() / b <= 0.01, "{a} vs {b}");
    }

    let m = HamiltonianModel::flat_identity(2);
    let mut mesh = initial_fiber_sphere(&m, &[0.0, 0.0], 64).unwrap();
    let certified = evolve_and_measure(
        &m,
        &mut mesh,
        &times,
        &FlowConfig::exact(),
        &RefineSettings::new(0.2, 400_000),
    )
    .unwrap();
    assert!(certified.resolution_certificate <= 0.01);
}

#[test]
fn refinement_only_inserts_parameter_midpoints() {
    let m = HamiltonianModel::Nil3;
    let mut mesh = initial_fiber_sphere(&m, &[0.0; 3], 2).unwrap();
    let before = mesh.parameter_samples.clone();
    evolve_and_measure(
        &m,
        &mut mesh,
        &[1.0, 2.0, 4.0],
        &FlowConfig::exact(),
        &settings(0.5),
    )
    .unwrap();
    assert_eq!(&mesh.parameter_samples[..before.len()], before.as_slice());
    assert_eq!(
        mesh.refinement_log.len(),
        mesh.vertex_count() - before.len()
    );
    for ins in &mesh.refinement_log {
        let (a, b) = ins.parent;
        let p = &mesh.parameter_samples;
        let mid = p[a as usize].midpoint(&p[b as usize]);
        assert_eq!(p[ins.vertex as usize], mid);
    }
    let Cells::Triangles(faces) = &mesh.connectivity else {
        panic!("sphere mesh of a 3-manifold")
    };
    // A closed triangulated sphere has V - E + F = 2.
    let edges = mesh.connectivity.edges().len();
    assert_eq!(
        mesh.vertex_count() as i64 - edges as i64 + faces.len() as i64,
        2
    );
}

#[test]
fn exponent_is_robust_to_chart_metric_weights() {
    let times = geometric_times(1.0, 10.0, 9);
    let exponent = |s: VolumeSeries| slow_vol_fit(&s, 0.5).unwrap().exponent;
    let plain_circle = exponent(flat_circle(&times, 0.2, None));
    let plain_disc = exponent(flat_disc(&times, 0.4, None));
    for w in [
        [0.5, 2.0, 1.0, 1.0, 1.0, 1.0],
        [2.0, 2.0, 0.5, 0.7, 1.0, 1.0],
        [1.3, 0.6, 1.9, 0.5, 1.0, 1.0],
    ] {
        let c = exponent(flat_circle(&times, 0.2, Some(w)));
        let d = exponent(flat_disc(&times, 0.4, Some(w)));
        assert!(
            (c - plain_circle).abs() <= 0.05,
            "{w:?}: {c} vs {plain_circle}"
        );
        assert!((d - plain_disc).abs() <= 0.05, "{w:?}: {d} vs {plain_disc}");
    }
}

#[test]
fn round_sphere_bounded_and_reduction() {
    let m = HamiltonianModel::RoundSphere2;
    let q = [0.0, 0.0, 1.0];
    let mut mesh = initial_fiber_sphere(&m, &q, 64).unwrap();
    let initial = mesh_volume(&m, &mesh, &None);
    // Mixed grid: period multiples and generic times.
    let times: Vec<f64> = (1..=12).map(|k| 0.5 * PI * k as f64).collect();
    let s =
        evolve_and_measure(&m, &mut mesh, &times, &FlowConfig::exact(), &settings(0.05)).unwrap();
    for (t, v) in s.times.iter().zip(&s.volumes) {
        if (t / PI).fract().abs() < 1e-9 {
            assert!(*v <= 1.01 * initial, "t = {t}");
        }
    }

    let refine = settings(0.15);
    let gap = reduction_gap(
        &m,
        &q,
        &geometric_times(1.0, 10.0, 9),
        &FlowConfig::exact(),
        &ReductionSettings {
            sphere: refine,
            disc: refine,
            resolution: 64,
            radial_layers: 4,
            inner_radius: 0.05,
            window_fraction: 0.5,
        },
    )
    .unwrap();
    assert!(
        gap.disc_exponent <= 1.1 && gap.sphere_exponent <= 0.1,
        "{gap:?}"
    );
    assert!(gap.satisfies_bound(0.1));
}

#[test]
fn integral_lemma_examples() {
    let r = geometric_times(1.0, 256.0, 2049);
    let constant: Vec<(f64, f64)> = r.iter().map(|&x| (x, 1.0)).collect();
    let (i, f) = integral_growth_check(&constant).unwrap();
    assert!((i - 1.0).abs() <= 0.05 && f.abs() <= 0.05);

    let wobbly: Vec<(f64, f64)> = r
        .iter()
        .map(|&x| (x, x * x * (2.0 + x.ln().sin())))
        .collect();
    let (i, _) = integral_growth_check(&wobbly).unwrap();
    assert!(i <= 3.05, "{i}");
}

#[test]
fn sol_is_not_reported_polynomial() {
    let m = HamiltonianModel::Sol3;
    let mut mesh = initial_fiber_sphere(&m, &[0.0; 3], 2).unwrap();
    let config = FlowConfig::with_integrator(slowvol::flow_models::Integrator::Rk4, 1e-2);
    match evolve_and_measure(
        &m,
        &mut mesh,
        &geometric_times(0.5, 30.0, 24),
        &config,
        &settings(1.0),
    ) {
        Err(slowvol::volume_growth::VolumeError::BudgetExceeded { time, .. }) => {
            assert!(time < 30.0)
        }
        Ok(s) => assert_eq!(
            slow_vol_fit(&s, 0.5).unwrap().classification,
            Classification::Exponential
        ),
        Err(e) => panic!("{e}"),
    }
}
