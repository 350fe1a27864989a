use std::f64::consts::PI;

use approx::assert_relative_eq;

use weyl_alf::chart::probe::ProbeSchedule;
use weyl_alf::chart::{DerivativeEngine, LeeSpec, MetricSpec, ModelSpace, ScalarSpec};
use weyl_alf::mass::{
    change_remainder_probe, conformal_change_prediction, conformal_mass, conformal_mass_unchecked, polarization,
    richardson_sequence, riemannian_mass_q, riemannian_mass_unchecked, MassQuery,
};
use weyl_alf::quadrature::QuadratureSpec;
use weyl_alf::util::geometric_radii;
use weyl_alf::weyl::WeylStructure;
use weyl_alf::Error;

fn radii() -> Vec<f64> {
    geometric_radii(50.0, 1600.0, 6)
}

fn trivial(m: usize) -> ModelSpace {
    ModelSpace::trivial(m, 1.0, 2.0 * PI).unwrap()
}

fn de() -> DerivativeEngine {
    DerivativeEngine::dual()
}

#[test]
fn kaluza_mass_closed_form() {
    // Q = 2μ(m−1)(m−2)/m at every radius
    for (m, mu) in [(3, 0.7), (4, 0.5)] {
        let ws = WeylStructure::new(trivial(m), MetricSpec::KaluzaPerturbation { mu }, LeeSpec::Zero).unwrap();
        let mut z = vec![0.0; m];
        z[m - 1] = 1.0;
        let rep = riemannian_mass_q(&MassQuery::new(ws, z, radii()), &de()).unwrap();
        let want = 2.0 * mu * (m as f64 - 1.0) * (m as f64 - 2.0) / m as f64;
        for v in &rep.q_flux {
            assert_relative_eq!(*v, want, max_relative = 1e-10);
        }
        assert!(rep.converged);
        assert_relative_eq!(rep.mass, want, max_relative = 1e-10);
    }
}

#[test]
fn radial_lee_form_correction() {
    // θ = μ r^{1−m} dr shifts the mass by μ(1 − 2m)/m
    let mu = 0.3;
    let ws = WeylStructure::new(trivial(3), MetricSpec::FlatProduct, LeeSpec::Radial { mu }).unwrap();
    let rep = conformal_mass(&MassQuery::new(ws, vec![0.0, 1.0, 0.0], radii()), &de()).unwrap();
    assert_relative_eq!(rep.correction, mu * -5.0 / 3.0, max_relative = 1e-10);
    assert!(rep.q_mass.abs() < 1e-12);
}

#[test]
fn taub_nut_mass() {
    let model = ModelSpace::hopf(1.0, 4.0).unwrap();
    let mu = model.fiber_length / (8.0 * PI);
    let ws = WeylStructure::new(model, MetricSpec::HopfModel { mu }, LeeSpec::Zero).unwrap();
    let z = vec![0.6, 0.0, -0.8];
    let rep = riemannian_mass_q(&MassQuery::new(ws, z, radii()), &de()).unwrap();
    assert!(rep.converged);
    assert_relative_eq!(rep.mass, mu, max_relative = 1e-7);
}

#[test]
fn conformal_change_of_flat_space() {
    // f = 1 + μ r^{2−m}: ΔQ = μ(2−m)(1−2m)/(2m)
    let mu = 0.4;
    let f = ScalarSpec::one_plus_decaying(mu, 3);
    let model = trivial(3);
    let pred = conformal_change_prediction(&model, &f, &[1.0, 0.0, 0.0], &radii(), &QuadratureSpec::default(), &de()).unwrap();
    assert_relative_eq!(pred.predicted, 1.0 / 3.0, max_relative = 1e-8);
    let ws = WeylStructure::new(model, MetricSpec::conformal(f, MetricSpec::FlatProduct), LeeSpec::Zero).unwrap();
    let rep = riemannian_mass_q(&MassQuery::new(ws, vec![1.0, 0.0, 0.0], radii()), &de()).unwrap();
    assert_relative_eq!(rep.mass, 1.0 / 3.0, max_relative = 1e-6);
}

#[test]
fn polarization_reproduces_quadratic_form() {
    let base = MetricSpec::KaluzaPerturbation { mu: 0.8 };
    let metric = MetricSpec::conformal(ScalarSpec::random_adapted(31, 3, 0.6), base);
    let ws = WeylStructure::new(trivial(3), metric, LeeSpec::Radial { mu: 0.2 }).unwrap();
    let q = MassQuery::new(ws, vec![0.0; 3], radii());
    let pol = polarization(&q, true, &de()).unwrap();
    assert!(pol.converged);
    for z in [[0.3, -1.1, 0.4], [1.0, 1.0, -2.0]] {
        let direct = conformal_mass_unchecked(&q.with_z(z.to_vec()), &de()).unwrap().mass;
        let mut quad = 0.0;
        for b in 0..3 {
            for c in 0..3 {
                quad += z[b] * pol.matrix[b * 3 + c] * z[c];
            }
        }
        assert_relative_eq!(direct, quad, max_relative = 1e-8);
    }
    let trace: f64 = (0..3).map(|b| pol.matrix[b * 4]).sum();
    assert_relative_eq!(pol.eigenvalues.iter().sum::<f64>(), trace, max_relative = 1e-12);
}

#[test]
fn remainder_decays_at_declared_rate() {
    let model = trivial(3);
    let f = ScalarSpec::random_adapted(3, 3, 0.5);
    let fam = MetricSpec::KaluzaPerturbation { mu: 0.6 };
    let e = change_remainder_probe(&model, &fam, &f, &[0.0, 1.0, 0.0], &de(), &ProbeSchedule::default()).unwrap();
    assert!(e.pass, "slope {}", e.slope);
    assert!(e.slope <= -2.8);
}

#[test]
fn decay_gate_refuses_slow_data() {
    let slow = MetricSpec::conformal(ScalarSpec::InverseLog { offset: 1.0, mu: 1.0 }, MetricSpec::FlatProduct);
    let ws = WeylStructure::new(trivial(3), slow, LeeSpec::Zero).unwrap();
    let q = MassQuery::new(ws, vec![1.0, 0.0, 0.0], radii());
    assert!(matches!(riemannian_mass_q(&q, &de()), Err(Error::DecayProbe { .. })));
    let ws = WeylStructure::new(
        trivial(3),
        MetricSpec::FlatProduct,
        LeeSpec::Constant {
            components: vec![0.1, 0.0, 0.0, 0.0],
        },
    )
    .unwrap();
    let q = MassQuery::new(ws, vec![1.0, 0.0, 0.0], radii());
    assert!(riemannian_mass_q(&q, &de()).is_ok());
    assert!(matches!(conformal_mass(&q, &de()), Err(Error::Config(_))));
}

#[test]
fn conformal_change_requires_adapted_factor() {
    let bad = ScalarSpec::InverseLog { offset: 1.0, mu: 1.0 };
    let e = conformal_change_prediction(&trivial(3), &bad, &[1.0, 0.0, 0.0], &radii(), &QuadratureSpec::default(), &de())
        .unwrap_err();
    assert!(matches!(e, Error::DecayProbe { .. }));
}

#[test]
fn query_validation() {
    let ws = WeylStructure::new(trivial(3), MetricSpec::FlatProduct, LeeSpec::Zero).unwrap();
    let q = |z: Vec<f64>, r: Vec<f64>| riemannian_mass_unchecked(&MassQuery::new(ws.clone(), z, r), &de());
    assert!(matches!(q(vec![1.0, 0.0], radii()), Err(Error::DimensionMismatch { .. }) | Err(Error::Config(_))));
    assert!(matches!(q(vec![1.0, 0.0, 0.0], vec![10.0, 5.0]), Err(Error::Config(_))));
    assert!(matches!(q(vec![1.0, 0.0, 0.0], vec![0.5, 5.0]), Err(Error::Domain(_))));
}

#[test]
fn csv_table() {
    let ws = WeylStructure::new(trivial(3), MetricSpec::KaluzaPerturbation { mu: 1.0 }, LeeSpec::Zero).unwrap();
    let rep = riemannian_mass_unchecked(&MassQuery::new(ws, vec![1.0, 0.0, 0.0], radii()), &de()).unwrap();
    let csv = rep.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# weyl-alf mass table schema v1"));
    assert_eq!(lines.next(), Some("radius,Q_flux,conf_correction,extrapolated"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn richardson_removes_leading_tail() {
    let r = [10.0, 20.0, 40.0];
    let v: Vec<f64> = r.iter().map(|x| 2.0 + 3.0 / x).collect();
    let e = richardson_sequence(&r, &v, 1.0);
    assert!(e[0].is_nan());
    assert_relative_eq!(e[2], 2.0, epsilon = 1e-13);
}
