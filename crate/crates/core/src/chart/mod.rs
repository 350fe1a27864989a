//! Model spaces, field families, derivative engine and decay probes.

pub mod engine;
pub mod fields;
pub mod geometry;
pub mod model;
pub mod probe;

pub use engine::{DerivMode, DerivativeEngine};
pub use fields::{FormSpec, LeeSpec, MetricSpec, ScalarSpec, VectorSpec};
pub use model::{Fibration, Frame, ModelSpace};
pub use probe::{decay_probe, DecayEstimate};

use crate::error::Result;
use crate::jet::{seed, Jet};
use crate::tensor::{PointMetric, Tensor};

/// The metric at a point as a checked `PointMetric` in the frame `(dx, η)`.
pub fn eval_metric(model: &ModelSpace, fam: &MetricSpec, p: &[f64]) -> Result<PointMetric<f64>> {
    model.check_point(p)?;
    let x: Vec<Jet> = p.iter().map(|&v| Jet::constant(v)).collect();
    let g: Vec<f64> = fam.eval(model, &x).iter().map(|j| j.value()).collect();
    PointMetric::new(model.dim(), g)
}

/// The metric in the coordinate basis `(dx, dt)`, using `η = dt + A_i dx^i`.
pub fn eval_metric_coordinates(model: &ModelSpace, fam: &MetricSpec, p: &[f64]) -> Result<Vec<f64>> {
    let g = eval_metric(model, fam, p)?;
    let n = model.dim();
    let m = model.m;
    let a = model.connection_values(p);
    // coframe matrix E: e^a = E^a_μ dy^μ
    let mut e = vec![0.0; n * n];
    for i in 0..n {
        e[i * n + i] = 1.0;
    }
    for i in 0..m {
        e[m * n + i] = a[i];
    }
    let mut out = vec![0.0; n * n];
    for mu in 0..n {
        for nu in 0..n {
            let mut v = 0.0;
            for a1 in 0..n {
                for b1 in 0..n {
                    v += e[a1 * n + mu] * g.g(a1, b1) * e[b1 * n + nu];
                }
            }
            out[mu * n + nu] = v;
        }
    }
    Ok(out)
}

/// Point jets of metric, inverse and frame.
pub(crate) struct MetricJets {
    pub frame: Frame,
    pub g: Vec<Jet>,
    pub g_inv: Vec<Jet>,
}

pub(crate) fn metric_jets(
    model: &ModelSpace,
    fam: &MetricSpec,
    p: &[f64],
    de: &DerivativeEngine,
) -> Result<MetricJets> {
    model.check_point(p)?;
    let n = model.dim();
    let frame = model.frame(&seed(p));
    let g = de.jets(|x| fam.eval(model, x), p, model.m);
    PointMetric::new(n, geometry::values(&g))?;
    let (g_inv, _) = geometry::inverse(n, &g)?;
    Ok(MetricJets { frame, g, g_inv })
}

/// Levi-Civita coefficients `Γ^c_ab` of the family at `p`, as a (1,2) tensor.
///
/// In the anholonomic Hopf frame `Γ^c_ab − Γ^c_ba = C_ab^c` rather than zero.
pub fn christoffel(
    model: &ModelSpace,
    fam: &MetricSpec,
    p: &[f64],
    de: &DerivativeEngine,
) -> Result<Tensor<f64>> {
    let mj = metric_jets(model, fam, p, de)?;
    let gamma = geometry::levi_civita(&mj.frame, &mj.g, &mj.g_inv);
    Tensor::from_vec(model.dim(), 1, 2, geometry::values(&gamma))
}

/// Riemann tensor `R^d_abc` of the family at `p`, as a (1,3) tensor.
pub fn lc_riemann(
    model: &ModelSpace,
    fam: &MetricSpec,
    p: &[f64],
    de: &DerivativeEngine,
) -> Result<Tensor<f64>> {
    let mj = metric_jets(model, fam, p, de)?;
    let gamma = geometry::levi_civita(&mj.frame, &mj.g, &mj.g_inv);
    let r = geometry::curvature(&mj.frame, &gamma);
    Tensor::from_vec(model.dim(), 1, 3, geometry::values(&r))
}
