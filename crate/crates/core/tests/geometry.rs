use std::f64::consts::PI;

use approx::assert_relative_eq;

use weyl_alf::chart::{
    christoffel, eval_metric, lc_riemann, DerivativeEngine, FormSpec, LeeSpec, MetricSpec, ModelSpace, ScalarSpec,
};
use weyl_alf::jet::seed;
use weyl_alf::quadrature::{gauss_legendre, trapezoid};
use weyl_alf::weyl::WeylStructure;
use weyl_alf::Error;

fn hopf() -> ModelSpace {
    ModelSpace::hopf(1.0, 4.0).unwrap()
}

fn trivial() -> ModelSpace {
    ModelSpace::trivial(3, 1.0, 2.0 * PI).unwrap()
}

fn curved_points() -> Vec<[f64; 4]> {
    vec![[1.7, -0.4, 0.9, 0.3], [-2.2, 1.1, 0.5, 2.0], [0.8, 2.5, -1.3, 1.1]]
}

fn rand_metric() -> MetricSpec {
    MetricSpec::RandomTrig {
        seed: 17,
        amplitude: 0.3,
        fiber: false,
    }
}

#[test]
fn hopf_flux_is_minus_fiber_length() {
    // total curvature through a sphere, from the curl of the connection jets
    let model = hopf();
    let r = 2.5;
    let polar = gauss_legendre(24, -1.0, 1.0).unwrap();
    let azi = trapezoid(48, 2.0 * PI).unwrap();
    let mut flux = 0.0;
    for (u, wu) in polar.nodes.iter().zip(&polar.weights) {
        let s = (1.0 - u * u).sqrt();
        for (phi, wp) in azi.nodes.iter().zip(&azi.weights) {
            let x = [r * s * phi.cos(), r * s * phi.sin(), r * u, 0.0];
            if model.check_point(&x).is_err() {
                continue;
            }
            let a = model.connection(&seed(&x));
            let curl = |i: usize, j: usize| a[j].partial(i).value() - a[i].partial(j).value();
            let fn_ = curl(1, 2) * x[0] + curl(2, 0) * x[1] + curl(0, 1) * x[2];
            flux += wu * wp * fn_ * r;
        }
    }
    assert_relative_eq!(flux, -model.fiber_length, max_relative = 1e-6);
}

#[test]
fn round_sphere_has_unit_curvature() {
    let model = trivial();
    let de = DerivativeEngine::dual();
    for p in [[1.5, 0.3, 0.2, 0.1], [0.4, -1.6, 3.0, 0.0]] {
        let r = lc_riemann(&model, &MetricSpec::SphereProduct, &p, &de).unwrap();
        let g = eval_metric(&model, &MetricSpec::SphereProduct, &p).unwrap();
        let n = 4;
        let rd = r.data();
        let ric = |b: usize, c: usize| (0..n).map(|a| rd[((a * n + a) * n + b) * n + c]).sum::<f64>();
        let mut scal = 0.0;
        for b in 0..n {
            for c in 0..n {
                scal += g.inv(b, c) * ric(b, c);
            }
        }
        assert_relative_eq!(scal, 2.0, epsilon = 1e-10);
        assert_relative_eq!(ric(0, 0), g.g(0, 0), epsilon = 1e-10);
        assert!(ric(2, 2).abs() < 1e-12);
    }
}

#[test]
fn first_bianchi_and_antisymmetry() {
    let de = DerivativeEngine::dual();
    for (model, fam) in [
        (hopf(), MetricSpec::HopfModel { mu: 0.3 }),
        (hopf(), rand_metric()),
        (trivial(), MetricSpec::conformal(ScalarSpec::random_adapted(4, 3, 0.5), rand_metric())),
    ] {
        for p in curved_points() {
            let r = lc_riemann(&model, &fam, &p, &de).unwrap();
            let rd = r.data();
            let n = 4;
            let at = |d: usize, a: usize, b: usize, c: usize| rd[((d * n + a) * n + b) * n + c];
            let mut worst: f64 = 0.0;
            for d in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        worst = worst.max((at(d, a, b, b) + at(d, b, a, b)).abs());
                        for c in 0..n {
                            worst = worst.max((at(d, a, b, c) + at(d, b, c, a) + at(d, c, a, b)).abs());
                            worst = worst.max((at(d, a, b, c) + at(d, b, a, c)).abs());
                        }
                    }
                }
            }
            assert!(worst < 1e-11, "{} {worst}", fam.name());
        }
    }
}

#[test]
fn finite_differences_track_dual_numbers() {
    let model = hopf();
    let fam = MetricSpec::conformal(ScalarSpec::one_plus_decaying(0.5, 3), rand_metric());
    for p in curved_points() {
        let a = christoffel(&model, &fam, &p, &DerivativeEngine::dual()).unwrap();
        let b = christoffel(&model, &fam, &p, &DerivativeEngine::finite_difference()).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
        let a = lc_riemann(&model, &fam, &p, &DerivativeEngine::dual()).unwrap();
        let b = lc_riemann(&model, &fam, &p, &DerivativeEngine::finite_difference()).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-5, "{x} vs {y}");
        }
    }
}

#[test]
fn christoffel_antisymmetric_part_is_structure_constant() {
    let model = hopf();
    let de = DerivativeEngine::dual();
    let p = [1.2, 0.7, -0.5, 0.2];
    let gam = christoffel(&model, &rand_metric(), &p, &de).unwrap();
    let fr = model.frame(&seed(&p));
    let n = 4;
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                let anti = gam.data()[(c * n + a) * n + b] - gam.data()[(c * n + b) * n + a];
                assert!((anti - fr.c(a, b, c).value()).abs() < 1e-12);
            }
        }
    }
}

fn weyl_hopf() -> WeylStructure {
    WeylStructure::new(
        hopf(),
        rand_metric(),
        LeeSpec::RandomTrig {
            seed: 5,
            amplitude: 1.0,
            fiber: false,
        },
    )
    .unwrap()
}

#[test]
fn weyl_connection_is_conformal_metric() {
    // D g = −2θ ⊗ g
    let ws = weyl_hopf();
    let de = DerivativeEngine::dual();
    let n = 4;
    for p in curved_points() {
        let wp = ws.at(&p, &de).unwrap();
        let w = wp.weyl_coefficients();
        let w = w.data();
        let theta = wp.lee();
        let g = wp.metric();
        let dg: Vec<Vec<f64>> = wp.g_jets().iter().map(|j| wp.frame().derive(j).iter().map(|v| v.value()).collect()).collect();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut v = dg[b * n + c][a];
                    for d in 0..n {
                        v -= w[(d * n + a) * n + b] * g.g(d, c) + w[(d * n + a) * n + c] * g.g(b, d);
                    }
                    let want = -2.0 * theta.data()[a] * g.g(b, c);
                    assert!((v - want).abs() < 1e-12, "{v} vs {want}");
                }
            }
        }
    }
}

#[test]
fn gauge_change_preserves_connection() {
    let ws = weyl_hopf();
    let de = DerivativeEngine::dual();
    let f = ScalarSpec::random_adapted(9, 3, 0.7);
    let changed = ws.gauge_change(&f).unwrap();
    let back = changed.gauge_change(&f.reciprocal()).unwrap();
    assert_ne!(ws.gauge(), changed.gauge());
    for p in curved_points() {
        let a = ws.at(&p, &de).unwrap();
        let b = changed.at(&p, &de).unwrap();
        let c = back.at(&p, &de).unwrap();
        for (x, y) in a.weyl_coefficients().data().iter().zip(b.weyl_coefficients().data()) {
            assert!((x - y).abs() < 1e-12);
        }
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(a.metric().g(i, j), c.metric().g(i, j), epsilon = 1e-13);
                let fv = f.value_at(&ws.model, &p);
                assert_relative_eq!(b.metric().g(i, j), fv * a.metric().g(i, j), epsilon = 1e-13);
            }
        }
        for (x, y) in a.lee().data().iter().zip(c.lee().data()) {
            assert!((x - y).abs() < 1e-13);
        }
        // curvature is a property of the connection alone
        let (ra, rb) = (a.curvature(), b.curvature());
        for (x, y) in ra.rd.data().iter().zip(rb.rd.data()) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn flat_codifferential_matches_divergence() {
    // α = r² dx¹ on flat space: δα = −∂₁(r²) = −2x₁
    let ws = WeylStructure::new(trivial(), MetricSpec::FlatProduct, LeeSpec::Zero).unwrap();
    let spec = FormSpec::Basis {
        indices: vec![0],
        factor: ScalarSpec::RadialPower {
            offset: 0.0,
            mu: 1.0,
            power: 2.0,
        },
    };
    let p = [1.3, -0.8, 2.0, 0.5];
    let wp = ws.at(&p, &DerivativeEngine::dual()).unwrap();
    let a = wp.form(&spec, 0.0).unwrap();
    let d = wp.delta(&a).unwrap();
    assert_relative_eq!(d.form.data()[0].value(), -2.0 * p[0], epsilon = 1e-13);
    // Δ(r² dx¹) = −(Σ ∂ᵢ² r²) dx¹ = −2m dx¹
    let lap = wp.laplacian(&a).unwrap();
    assert_relative_eq!(lap.form.data()[0].value(), -6.0, epsilon = 1e-12);
}

#[test]
fn ricci_of_levi_civita_structure_is_riemannian() {
    let ws = WeylStructure::new(hopf(), rand_metric(), LeeSpec::Zero).unwrap();
    let de = DerivativeEngine::dual();
    for p in curved_points() {
        let bundle = ws.at(&p, &de).unwrap().curvature();
        let r = lc_riemann(&ws.model, &ws.metric, &p, &de).unwrap();
        let n = 4;
        for b in 0..n {
            for c in 0..n {
                let tr: f64 = (0..n).map(|a| r.data()[((a * n + a) * n + b) * n + c]).sum();
                assert!((bundle.ric.data()[b * n + c] - tr).abs() < 1e-11);
                assert!((bundle.ric.data()[b * n + c] - bundle.ric.data()[c * n + b]).abs() < 1e-11);
                assert!(bundle.fd.data()[b * n + c].abs() < 1e-14);
            }
        }
    }
}

#[test]
fn ricci_antisymmetric_parts() {
    let ws = weyl_hopf();
    let de = DerivativeEngine::dual();
    let n = 4;
    for p in curved_points() {
        let b = ws.at(&p, &de).unwrap().curvature();
        let (ric, loc, f) = (b.ric.data(), b.ric_local.data(), b.fd.data());
        let mut fmax: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                fmax = fmax.max(f[i * n + j].abs());
                let anti = ric[i * n + j] - ric[j * n + i];
                assert!((anti + n as f64 * f[i * n + j]).abs() < 1e-11);
                let anti = loc[i * n + j] - loc[j * n + i];
                assert!((anti + 2.0 * f[i * n + j]).abs() < 1e-11);
                let sym = (ric[i * n + j] + ric[j * n + i]) - (loc[i * n + j] + loc[j * n + i]);
                assert!(sym.abs() < 1e-11);
            }
        }
        assert!(fmax > 1e-3, "test needs a non-closed Lee form");
    }
}

#[test]
fn seam_and_ball_are_domain_errors() {
    let ws = weyl_hopf();
    let de = DerivativeEngine::dual();
    assert!(matches!(ws.at(&[0.0, 0.0, -2.0, 0.0], &de), Err(Error::Domain(_))));
    assert!(matches!(ws.at(&[0.3, 0.0, 0.0, 0.0], &de), Err(Error::Domain(_))));
    assert!(matches!(ws.at(&[2.0, 0.0, 0.0], &de), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn gauge_mismatch_is_refused() {
    let ws = weyl_hopf();
    let other = ws.gauge_change(&ScalarSpec::one_plus_decaying(0.3, 3)).unwrap();
    let de = DerivativeEngine::dual();
    let p = [1.7, -0.4, 0.9, 0.3];
    let a = ws.at(&p, &de).unwrap();
    let b = other.at(&p, &de).unwrap();
    let alpha = a.form(&FormSpec::basis(vec![0]), 1.0).unwrap();
    assert!(matches!(b.d(&alpha), Err(Error::GaugeMismatch { .. })));
}
