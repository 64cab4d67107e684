use std::f64::consts::PI;

use proptest::prelude::*;

use slowvol::flow_models::{
    conjugation_residual, dilation, euler_residual, flow, gradient_mismatch, hamiltonian,
    parse_model, sample_starshaped, trajectory, FlowConfig, HamiltonianModel, Integrator,
    PhasePoint,
};

fn models() -> Vec<HamiltonianModel> {
    vec![
        HamiltonianModel::flat_identity(2),
        HamiltonianModel::flat_identity(3),
        parse_model("flat:2,1/2;1/2,1").unwrap(),
        HamiltonianModel::RoundSphere2,
        HamiltonianModel::Nil3,
        HamiltonianModel::Sol3,
        HamiltonianModel::randers([0.3, -0.4]).unwrap(),
        sample_starshaped(),
    ]
}

fn close(a: &PhasePoint, b: &PhasePoint, tol: f64) -> bool {
    a.coords()
        .iter()
        .zip(b.coords())
        .all(|(x, y)| (x - y).abs() <= tol)
}

fn point(model: &HamiltonianModel, q: &[f64], p: &[f64]) -> PhasePoint {
    let d = model.chart_dim();
    PhasePoint::new(&q[..d], &p[..d])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hamiltonian_is_homogeneous_of_degree_two(
        which in 0usize..8,
        q in proptest::array::uniform3(-1.0f64..1.0),
        p in proptest::array::uniform3(-2.0f64..2.0),
        r in 0.05f64..20.0,
    ) {
        prop_assume!(p.iter().map(|v| v * v).sum::<f64>() > 1e-4);
        let model = &models()[which];
        let x = point(model, &q, &p);
        let h = hamiltonian(model, &x).unwrap();
        let hr = hamiltonian(model, &dilation(&x, r)).unwrap();
        prop_assert!((hr - r * r * h).abs() <= 1e-10 * (1.0 + h.abs()) * r * r);
        prop_assert!(h > 0.0);
    }
}

#[test]
fn hamiltonian_examples() {
    let flat = HamiltonianModel::flat_identity(2);
    assert_eq!(
        hamiltonian(&flat, &PhasePoint::new(&[0.1, 0.9], &[3.0, 4.0])).unwrap(),
        25.0
    );
    let (x, px, py, pz) = (0.7, -0.3, 1.1, 0.4);
    let h = hamiltonian(
        &HamiltonianModel::Nil3,
        &PhasePoint::new(&[x, 2.0, -1.0], &[px, py, pz]),
    )
    .unwrap();
    assert!((h - (px * px + (py + x * pz).powi(2) + pz * pz)).abs() < 1e-14);
    for m in models() {
        let x = point(&m, &[0.0, 0.0, 1.0], &[0.6, -0.8, 0.0]);
        let h = hamiltonian(&m, &x).unwrap();
        assert!(
            (hamiltonian(&m, &dilation(&x, 2.0)).unwrap() - 4.0 * h).abs() < 1e-12 * h,
            "{m}"
        );
    }
}

#[test]
fn dilation_examples() {
    let x = PhasePoint::new(&[0.3, 0.7], &[1.0, 2.0]);
    assert_eq!(dilation(&x, 2.0), PhasePoint::new(&[0.3, 0.7], &[2.0, 4.0]));
    assert!(close(&dilation(&dilation(&x, 3.7), 1.0 / 3.7), &x, 1e-15));
}

#[test]
fn flat_and_sphere_flow_examples() {
    let flat = HamiltonianModel::flat_identity(2);
    let x = PhasePoint::new(&[0.0, 0.0], &[1.0, 0.0]);
    for config in [FlowConfig::exact(), FlowConfig::default()] {
        let y = flow(&flat, &x, 0.25, &config).unwrap();
        assert!(close(&y, &PhasePoint::new(&[0.5, 0.0], &[1.0, 0.0]), 1e-12));
    }
    let sphere = HamiltonianModel::RoundSphere2;
    let s = PhasePoint::new(&[0.0, 0.6, 0.8], &[1.0, 0.0, 0.0]);
    assert!(close(
        &flow(&sphere, &s, PI, &FlowConfig::exact()).unwrap(),
        &s,
        1e-12
    ));
    let numeric = flow(
        &sphere,
        &s,
        PI,
        &FlowConfig::with_integrator(Integrator::Rk4, 1e-3),
    )
    .unwrap();
    assert!(close(&numeric, &s, 1e-8));
}

#[test]
fn flow_composes() {
    let cases: Vec<(HamiltonianModel, FlowConfig)> = vec![
        (HamiltonianModel::Nil3, FlowConfig::exact()),
        (HamiltonianModel::Nil3, FlowConfig::default()),
        (HamiltonianModel::Sol3, FlowConfig::default()),
        (
            HamiltonianModel::randers([0.2, 0.1]).unwrap(),
            FlowConfig::default(),
        ),
        (
            sample_starshaped(),
            FlowConfig::with_integrator(Integrator::Rk4, 1e-3),
        ),
    ];
    for (m, config) in cases {
        let x = point(&m, &[0.1, 0.2, 0.3], &[0.5, -0.4, 0.3]);
        let split = flow(&m, &flow(&m, &x, 0.5, &config).unwrap(), 0.25, &config).unwrap();
        let whole = flow(&m, &x, 0.75, &config).unwrap();
        assert!(
            close(&split, &whole, 10.0 * config.newton_tolerance),
            "{m} {config:?}"
        );
    }
}

#[test]
fn energy_is_conserved_along_trajectories() {
    let times: Vec<f64> = (1..=20).map(|k| 0.25 * k as f64).collect();
    for m in models() {
        let config = if m.has_closed_form() {
            FlowConfig::exact()
        } else {
            FlowConfig::default()
        };
        let x = match m {
            HamiltonianModel::RoundSphere2 => point(&m, &[0.0, 0.0, 1.0], &[0.6, 0.0, 0.0]),
            _ => point(&m, &[0.2, 0.4, 0.1], &[0.6, -0.5, 0.3]),
        };
        let h0 = hamiltonian(&m, &x).unwrap();
        for (t, y) in trajectory(&m, &x, &times, &config).unwrap() {
            let drift = (hamiltonian(&m, &y).unwrap() - h0).abs();
            assert!(
                drift <= config.energy_drift_cap * t,
                "{m}: drift {drift} at t = {t}"
            );
        }
    }
}

#[test]
fn unit_covectors_move_at_speed_two_on_flat_torus() {
    let flat = HamiltonianModel::flat_identity(2);
    for angle in [0.0, 0.4, 1.3, 2.9] {
        let x = PhasePoint::new(&[0.3, 0.3], &[f64::cos(angle), f64::sin(angle)]);
        let t = 0.05;
        let y = flow(&flat, &x, t, &FlowConfig::exact()).unwrap();
        let dq: f64 = flat.chart_difference(&y, &x)[..2]
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        assert!((dq - 2.0 * t).abs() < 1e-14);
    }
}

#[test]
fn reversibility() {
    for m in [
        HamiltonianModel::flat_identity(2),
        HamiltonianModel::Nil3,
        HamiltonianModel::RoundSphere2,
    ] {
        assert!(m.is_reversible());
        let x = point(&m, &[0.3, 0.1, 0.2], &[0.4, -1.2, 0.7]);
        let minus = point(&m, &[0.3, 0.1, 0.2], &[-0.4, 1.2, -0.7]);
        assert_eq!(
            hamiltonian(&m, &x).unwrap(),
            hamiltonian(&m, &minus).unwrap()
        );
    }
    let randers = HamiltonianModel::randers([0.3, 0.0]).unwrap();
    assert!(!randers.is_reversible());
    let x = PhasePoint::new(&[0.0, 0.0], &[1.0, 0.0]);
    let minus = PhasePoint::new(&[0.0, 0.0], &[-1.0, 0.0]);
    assert_ne!(
        hamiltonian(&randers, &x).unwrap(),
        hamiltonian(&randers, &minus).unwrap()
    );
}

#[test]
fn conjugation_residual_examples() {
    let flat = HamiltonianModel::flat_identity(3);
    let x = PhasePoint::new(&[0.1, 0.2, 0.3], &[0.3, -0.2, 0.9]);
    assert!(conjugation_residual(&flat, &x, 2.5, 0.3, &FlowConfig::exact()).unwrap() < 1e-14);
    let nil = PhasePoint::new(&[0.1, 0.2, 0.3], &[0.6, 0.0, 0.8]);
    for integrator in [Integrator::ImplicitMidpoint, Integrator::Rk4] {
        let config = FlowConfig::with_integrator(integrator, 1e-2);
        assert_eq!(
            conjugation_residual(&HamiltonianModel::Nil3, &nil, 1.0, 1.0, &config).unwrap(),
            0.0
        );
    }
}

#[test]
fn euler_identity_and_gradients() {
    let flat = HamiltonianModel::flat_identity(2);
    assert_eq!(
        euler_residual(&flat, &PhasePoint::new(&[0.2, 0.1], &[0.7, -1.3])).unwrap(),
        0.0
    );
    let nil = PhasePoint::new(&[1.0, 0.0, 0.0], &[1.0, 1.0, 1.0]);
    assert!(euler_residual(&HamiltonianModel::Nil3, &nil).unwrap().abs() <= 1e-10);
    assert!(gradient_mismatch(&HamiltonianModel::Nil3, &nil, 1e-5).unwrap() <= 1e-6);
    let randers = HamiltonianModel::randers([0.3, -0.4]).unwrap();
    for k in 0..16 {
        let a = k as f64 * PI / 8.0 + 0.1;
        let x = PhasePoint::new(&[0.5, 0.25], &[1.7 * a.cos(), 1.7 * a.sin()]);
        assert!(euler_residual(&randers, &x).unwrap().abs() <= 1e-10);
        assert!(gradient_mismatch(&randers, &x, 1e-5).unwrap() <= 1e-6);
    }
}
