//! Surface-flux masses of ALF metrics and of Weyl structures.
//!
//! All fluxes go through the hypersurfaces `{|x| = r}` (sphere times fiber)
//! with the outward `h`-normal `x/r` and area element `r^{m-1} dΩ dt`, and are
//! normalized by `ω L` with `ω = vol(S^{m-1})`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::chart::geometry::{covariant_derivative, levi_civita};
use crate::chart::probe::{factor_probes, lee_decay_probes, metric_decay_probes, ProbeSchedule};
use crate::chart::{decay_probe, DecayEstimate, DerivativeEngine, MetricSpec, ModelSpace, ScalarSpec};
use crate::error::{Error, Result};
use crate::jet::{seed, Jet};
use crate::quadrature::{integrate, sphere_volume, surface_nodes, QuadratureSpec};
use crate::util::float_or_inf;
use crate::weyl::WeylStructure;

/// Slope allowance of the conformal-change remainder probe.
pub const REMAINDER_TOLERANCE: f64 = 0.3;

/// The three pieces of `q_{g,h}(Z)`, as frame components of 1-forms:
/// `q = divergence − trace − norm`.
#[derive(Clone, Debug, PartialEq)]
pub struct QTerms {
    /// `Σ_b (∇^h_{X_b} g)(X_b, Z) α̃_Z`, the sum running over the whole frame
    pub divergence: Vec<f64>,
    /// `½ Z(tr_h g) α̃_Z`
    pub trace: Vec<f64>,
    /// `½ d(g(Z, Z))`
    pub norm: Vec<f64>,
}

impl QTerms {
    pub fn total(&self) -> Vec<f64> {
        self.divergence
            .iter()
            .zip(&self.trace)
            .zip(&self.norm)
            .map(|((a, b), c)| a - b - c)
            .collect()
    }
}

fn extend_z(z: &[f64], n: usize) -> Vec<f64> {
    let mut out = z.to_vec();
    out.resize(n, 0.0);
    out
}

fn check_z(model: &ModelSpace, z: &[f64]) -> Result<()> {
    if z.len() != model.m {
        return Err(Error::DimensionMismatch {
            expected: model.m,
            got: z.len(),
        });
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("Z must have finite coefficients".into()));
    }
    Ok(())
}

/// `q_{g,h}(Z)` at `p`, split into its three terms. `z` holds the coefficients
/// of `Z` over the horizontal frame `X_1..X_m`.
pub fn q_terms(model: &ModelSpace, fam: &MetricSpec, z: &[f64], p: &[f64], de: &DerivativeEngine) -> Result<QTerms> {
    check_z(model, z)?;
    model.check_point(p)?;
    let n = model.dim();
    let zz = extend_z(z, n);
    let frame = model.frame(&seed(p));
    let g = de.jets(|x| fam.eval(model, x), p, model.m);
    let mut h = vec![Jet::constant(0.0); n * n];
    for i in 0..n {
        h[i * n + i] = Jet::constant(1.0);
    }
    let gamma_h = levi_civita(&frame, &h, &h);
    let dg = covariant_derivative(&frame, &gamma_h, &g, 2, None);
    let mut div = 0.0;
    for b in 0..n {
        for c in 0..n {
            div += dg[(b * n + b) * n + c].value() * zz[c];
        }
    }
    let trace = (0..n).fold(Jet::constant(0.0), |acc, c| acc + g[c * n + c]);
    let dtrace = frame.derive(&trace);
    let ztrace: f64 = (0..n).map(|a| dtrace[a].value() * zz[a]).sum();
    let mut gzz = Jet::constant(0.0);
    for a in 0..n {
        for b in 0..n {
            if zz[a] != 0.0 && zz[b] != 0.0 {
                gzz += g[a * n + b] * (zz[a] * zz[b]);
            }
        }
    }
    let dgzz = frame.derive(&gzz);
    Ok(QTerms {
        divergence: zz.iter().map(|v| v * div).collect(),
        trace: zz.iter().map(|v| 0.5 * v * ztrace).collect(),
        norm: dgzz.iter().map(|v| 0.5 * v.value()).collect(),
    })
}

/// `q_{g,h}(Z)` at `p` (frame components).
pub fn q_flux_form(model: &ModelSpace, fam: &MetricSpec, z: &[f64], p: &[f64], de: &DerivativeEngine) -> Result<Vec<f64>> {
    Ok(q_terms(model, fam, z, p, de)?.total())
}

/// `(1 − m) ⟨β, α̃_Z⟩_h α̃_Z − |α̃_Z|²_h β` for a 1-form `β`.
pub fn correction_form(m: usize, z: &[f64], beta: &[f64]) -> Vec<f64> {
    let n = beta.len();
    let zz = extend_z(z, n);
    let pair: f64 = beta.iter().zip(&zz).map(|(a, b)| a * b).sum();
    let norm: f64 = zz.iter().map(|v| v * v).sum();
    (0..n)
        .map(|a| (1.0 - m as f64) * pair * zz[a] - norm * beta[a])
        .collect()
}

fn normal_component(form: &[f64], p: &[f64], m: usize) -> f64 {
    let r = p[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
    (0..m).map(|i| form[i] * p[i] / r).sum()
}

/// `(1/(ωL)) ∫_{|x|=r} β(ν) dA_h` for a 1-form field given pointwise.
pub fn normalized_flux(
    model: &ModelSpace,
    r: f64,
    quad: &QuadratureSpec,
    fiber_invariant: bool,
    form: impl Fn(&[f64]) -> Result<Vec<f64>> + Sync,
) -> Result<f64> {
    if !(r > model.radius) {
        return Err(Error::Domain(format!("flux radius {r} must exceed {}", model.radius)));
    }
    let m = model.m;
    let nodes = surface_nodes(m, r, model.fiber_length, quad, fiber_invariant)?;
    let total = integrate(&nodes, |p| Ok(normal_component(&form(p)?, p, m)))?;
    Ok(total / (sphere_volume(m) * model.fiber_length))
}

/// One Richardson step for `F(r) = F_∞ + c r^{-order}` on each consecutive pair.
pub fn richardson_sequence(radii: &[f64], values: &[f64], order: f64) -> Vec<f64> {
    let mut out = vec![f64::NAN; values.len()];
    for j in 1..values.len() {
        let s = (radii[j] / radii[j - 1]).powf(order);
        out[j] = (s * values[j] - values[j - 1]) / (s - 1.0);
    }
    out
}

/// A mass computation: Weyl structure, horizontal field and radius schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassQuery {
    pub structure: WeylStructure,
    /// Coefficients of `Z` over `X_1..X_m`.
    pub z: Vec<f64>,
    pub radii: Vec<f64>,
    pub quadrature: QuadratureSpec,
    /// Convergence threshold on the last two extrapolated values.
    pub tol_conv: f64,
}

impl MassQuery {
    pub fn new(structure: WeylStructure, z: Vec<f64>, radii: Vec<f64>) -> Self {
        MassQuery {
            structure,
            z,
            radii,
            quadrature: QuadratureSpec::default(),
            tol_conv: 1e-6,
        }
    }

    pub fn with_z(&self, z: Vec<f64>) -> Self {
        MassQuery { z, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let model = &self.structure.model;
        check_z(model, &self.z)?;
        self.quadrature.validate()?;
        if self.radii.is_empty() {
            return Err(Error::Config("mass needs at least one radius".into()));
        }
        if self.radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("mass radii must increase".into()));
        }
        if !(self.radii[0] > model.radius) {
            return Err(Error::Domain(format!(
                "mass radii must exceed the removed ball radius {}",
                model.radius
            )));
        }
        if !(self.tol_conv > 0.0) {
            return Err(Error::Config("tol_conv must be positive".into()));
        }
        Ok(())
    }

    fn order(&self) -> f64 {
        self.structure.model.m as f64 - 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub z: Vec<f64>,
    pub radii: Vec<f64>,
    /// Normalized flux of `q_{g,h}(Z)` at each radius.
    pub q_flux: Vec<f64>,
    /// Normalized flux of the Lee-form correction at each radius (zeros for `Q_g`).
    pub conf_correction: Vec<f64>,
    /// Richardson estimate of the total from each radius and its predecessor.
    pub extrapolated: Vec<f64>,
    #[serde(with = "float_or_inf")]
    pub q_mass: f64,
    #[serde(with = "float_or_inf")]
    pub correction: f64,
    /// `q_mass + correction`
    #[serde(with = "float_or_inf")]
    pub mass: f64,
    pub converged: bool,
    pub tol_conv: f64,
    pub richardson_order: f64,
    /// `vol(S^{m-1})`
    pub omega: f64,
    pub fiber_length: f64,
    /// Log-log slope of successive differences of the raw total.
    #[serde(with = "float_or_inf")]
    pub cauchy_slope: f64,
}

impl MassReport {
    fn build(q: &MassQuery, q_flux: Vec<f64>, conf: Vec<f64>) -> Self {
        let order = q.order();
        let total: Vec<f64> = q_flux.iter().zip(&conf).map(|(a, b)| a + b).collect();
        let extrapolated = richardson_sequence(&q.radii, &total, order);
        let last = |v: &[f64]| -> f64 {
            if v.len() == 1 {
                v[0]
            } else {
                *richardson_sequence(&q.radii, v, order).last().unwrap()
            }
        };
        let q_mass = last(&q_flux);
        let correction = last(&conf);
        let k = extrapolated.len();
        let converged = k >= 3 && (extrapolated[k - 1] - extrapolated[k - 2]).abs() < q.tol_conv;
        let cauchy_slope = if total.len() >= 3 {
            let diffs: Vec<f64> = total.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            slope(&q.radii[1..], &diffs)
        } else {
            f64::NAN
        };
        MassReport {
            z: q.z.clone(),
            radii: q.radii.clone(),
            q_flux,
            conf_correction: conf,
            extrapolated,
            q_mass,
            correction,
            mass: q_mass + correction,
            converged,
            tol_conv: q.tol_conv,
            richardson_order: order,
            omega: sphere_volume(q.structure.model.m),
            fiber_length: q.structure.model.fiber_length,
            cauchy_slope,
        }
    }

    /// CSV table with a versioned schema comment.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# weyl-alf mass table schema v1\nradius,Q_flux,conf_correction,extrapolated\n");
        for j in 0..self.radii.len() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                self.radii[j], self.q_flux[j], self.conf_correction[j], self.extrapolated[j]
            ));
        }
        s
    }
}

fn slope(radii: &[f64], values: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > crate::chart::probe::ZERO_FLOOR)
        .map(|(&r, &v)| (r.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

/// Check the ALF probes of the metric and, for the conformal mass, of `θ_g`.
pub fn decay_gate(ws: &WeylStructure, with_lee: bool, de: &DerivativeEngine, schedule: &ProbeSchedule) -> Result<Vec<DecayEstimate>> {
    let mut out = Vec::new();
    for e in metric_decay_probes(&ws.model, &ws.metric, de, schedule)? {
        out.push(e.into_result()?);
    }
    if with_lee {
        for e in lee_decay_probes(&ws.model, &ws.lee, de, schedule)? {
            out.push(e.into_result()?);
        }
    }
    Ok(out)
}

fn q_sequence(q: &MassQuery, de: &DerivativeEngine) -> Result<Vec<f64>> {
    let ws = &q.structure;
    let model = &ws.model;
    let inv = ws.metric.fiber_invariant(model);
    q.radii
        .iter()
        .map(|&r| normalized_flux(model, r, &q.quadrature, inv, |p| q_flux_form(model, &ws.metric, &q.z, p, de)))
        .collect()
}

fn correction_sequence(q: &MassQuery, de: &DerivativeEngine) -> Result<Vec<f64>> {
    let ws = &q.structure;
    let model = &ws.model;
    let inv = ws.lee.fiber_invariant(model);
    q.radii
        .iter()
        .map(|&r| {
            normalized_flux(model, r, &q.quadrature, inv, |p| {
                let theta: Vec<f64> = de.jets(|x| ws.lee.eval(model, x), p, model.m).iter().map(|j| j.value()).collect();
                Ok(correction_form(model.m, &q.z, &theta))
            })
        })
        .collect()
}

/// `Q_g(Z)` without the decay gate.
pub fn riemannian_mass_unchecked(q: &MassQuery, de: &DerivativeEngine) -> Result<MassReport> {
    q.validate()?;
    let flux = q_sequence(q, de)?;
    let zeros = vec![0.0; flux.len()];
    Ok(MassReport::build(q, flux, zeros))
}

/// `m^D_h(g)(Z)` without the decay gate.
pub fn conformal_mass_unchecked(q: &MassQuery, de: &DerivativeEngine) -> Result<MassReport> {
    q.validate()?;
    let flux = q_sequence(q, de)?;
    let corr = correction_sequence(q, de)?;
    Ok(MassReport::build(q, flux, corr))
}

/// The ALF mass `Q_g(Z)`; refuses metrics that fail the ALF probes.
pub fn riemannian_mass_q(q: &MassQuery, de: &DerivativeEngine) -> Result<MassReport> {
    decay_gate(&q.structure, false, de, &ProbeSchedule::default())?;
    riemannian_mass_unchecked(q, de)
}

/// The conformal mass `m^D_h(g)(Z)`; refuses data that fail the metric or Lee-form probes.
pub fn conformal_mass(q: &MassQuery, de: &DerivativeEngine) -> Result<MassReport> {
    decay_gate(&q.structure, true, de, &ProbeSchedule::default())?;
    conformal_mass_unchecked(q, de)
}

/// Membership of `f` in the adapted class, by the three decay probes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptedCheck {
    pub pass: bool,
    pub probes: Vec<DecayEstimate>,
}

pub fn adapted_metric_check(model: &ModelSpace, f: &ScalarSpec, de: &DerivativeEngine, schedule: &ProbeSchedule) -> Result<AdaptedCheck> {
    f.validate(model)?;
    let probes = factor_probes(model, f, de, schedule)?;
    Ok(AdaptedCheck {
        pass: probes.iter().all(|p| p.pass),
        probes,
    })
}

fn require_adapted(model: &ModelSpace, f: &ScalarSpec, de: &DerivativeEngine) -> Result<()> {
    for e in adapted_metric_check(model, f, de, &ProbeSchedule::default())?.probes {
        e.into_result()?;
    }
    Ok(())
}

/// Predicted `Q_{fg}(Z) − Q_g(Z)`, per radius and extrapolated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangePrediction {
    pub radii: Vec<f64>,
    pub per_radius: Vec<f64>,
    #[serde(with = "float_or_inf")]
    pub predicted: f64,
}

/// `(1/(2ωL)) lim ∫ ∗_h((1 − m)⟨df, α̃_Z⟩ α̃_Z − |α̃_Z|² df)`; `f` must be adapted.
pub fn conformal_change_prediction(
    model: &ModelSpace,
    f: &ScalarSpec,
    z: &[f64],
    radii: &[f64],
    quad: &QuadratureSpec,
    de: &DerivativeEngine,
) -> Result<ChangePrediction> {
    check_z(model, z)?;
    require_adapted(model, f, de)?;
    let inv = f.fiber_invariant();
    let per_radius = radii
        .iter()
        .map(|&r| {
            normalized_flux(model, r, quad, inv, |p| {
                let df = scalar_differential(model, f, p, de);
                Ok(correction_form(model.m, z, &df).iter().map(|v| 0.5 * v).collect())
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let predicted = if per_radius.len() == 1 {
        per_radius[0]
    } else {
        *richardson_sequence(radii, &per_radius, model.m as f64 - 2.0).last().unwrap()
    };
    Ok(ChangePrediction {
        radii: radii.to_vec(),
        per_radius,
        predicted,
    })
}

/// Frame components of `df`.
fn scalar_differential(model: &ModelSpace, f: &ScalarSpec, p: &[f64], de: &DerivativeEngine) -> Vec<f64> {
    let j = de.jets(|x| vec![f.eval(model, x).0], p, model.m)[0];
    let frame = model.frame(&seed(p));
    frame.derive(&j).iter().map(|v| v.value()).collect()
}

/// Gauge-invariance audit of the conformal mass under `g → f g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceAudit {
    pub z: Vec<f64>,
    pub mass_g: f64,
    pub mass_fg: f64,
    pub difference: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// `Q_{fg} − Q_g`, recomputed directly
    pub delta_q_direct: f64,
    /// `Q_{fg} − Q_g` from the conformal-change law
    pub delta_q_predicted: f64,
    /// change of the Lee-form correction
    pub delta_correction: f64,
}

/// `|m^D(fg) − m^D(g)| / max(|m^D(g)|, 1e-8)` against `tolerance`.
pub fn invariance_audit(q: &MassQuery, f: &ScalarSpec, tolerance: f64, de: &DerivativeEngine) -> Result<InvarianceAudit> {
    let model = &q.structure.model;
    require_adapted(model, f, de)?;
    let base = conformal_mass_unchecked(q, de)?;
    let changed = MassQuery {
        structure: q.structure.gauge_change(f)?,
        ..q.clone()
    };
    let other = conformal_mass_unchecked(&changed, de)?;
    let predicted = conformal_change_prediction(model, f, &q.z, &q.radii, &q.quadrature, de)?;
    let difference = other.mass - base.mass;
    let relative = difference.abs() / base.mass.abs().max(1e-8);
    Ok(InvarianceAudit {
        z: q.z.clone(),
        mass_g: base.mass,
        mass_fg: other.mass,
        difference,
        relative,
        tolerance,
        pass: relative < tolerance,
        delta_q_direct: other.q_mass - base.q_mass,
        delta_q_predicted: predicted.predicted,
        delta_correction: other.correction - base.correction,
    })
}

/// Pointwise remainder `q_{fg}(Z)(ν) − q_g(Z)(ν) − ½[(1−m) df(Z) ⟨Z,ν⟩ − |Z|² df(ν)]`,
/// whose decay is probed against `3 − 2m`.
pub fn change_remainder_probe(
    model: &ModelSpace,
    fam: &MetricSpec,
    f: &ScalarSpec,
    z: &[f64],
    de: &DerivativeEngine,
    schedule: &ProbeSchedule,
) -> Result<DecayEstimate> {
    let m = model.m;
    let scaled = MetricSpec::conformal(f.clone(), fam.clone());
    let declared = 3.0 - 2.0 * m as f64;
    let mut est = decay_probe("conformal change remainder", declared, &schedule.radii, |r| {
        schedule.max_over(model, r, |p| {
            let a = q_flux_form(model, &scaled, z, p, de)?;
            let b = q_flux_form(model, fam, z, p, de)?;
            let df = scalar_differential(model, f, p, de);
            let c = correction_form(m, z, &df);
            let rem: Vec<f64> = (0..a.len()).map(|i| a[i] - b[i] - 0.5 * c[i]).collect();
            Ok(normal_component(&rem, p, m).abs())
        })
    })?;
    est.tolerance = REMAINDER_TOLERANCE;
    est.pass = est.slope <= declared + REMAINDER_TOLERANCE;
    Ok(est)
}

/// The quadratic form on `span{X_1..X_m}` by polarization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polarization {
    /// Row-major `m × m` symmetric matrix.
    pub matrix: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub converged: bool,
    pub reports: Vec<MassReport>,
}

/// `M_bb = Q(X_b)` and `M_bc = ½(Q(X_b + X_c) − Q(X_b) − Q(X_c))`.
pub fn polarization(q: &MassQuery, conformal: bool, de: &DerivativeEngine) -> Result<Polarization> {
    let m = q.structure.model.m;
    let eval = |z: Vec<f64>| -> Result<MassReport> {
        let qq = q.with_z(z);
        if conformal {
            conformal_mass_unchecked(&qq, de)
        } else {
            riemannian_mass_unchecked(&qq, de)
        }
    };
    let unit = |b: usize| -> Vec<f64> {
        let mut z = vec![0.0; m];
        z[b] = 1.0;
        z
    };
    let mut reports = Vec::new();
    let mut diag = vec![0.0; m];
    for (b, d) in diag.iter_mut().enumerate() {
        let rep = eval(unit(b))?;
        *d = rep.mass;
        reports.push(rep);
    }
    let mut matrix = vec![0.0; m * m];
    for b in 0..m {
        matrix[b * m + b] = diag[b];
        for c in b + 1..m {
            let mut z = unit(b);
            z[c] = 1.0;
            let rep = eval(z)?;
            let v = 0.5 * (rep.mass - diag[b] - diag[c]);
            matrix[b * m + c] = v;
            matrix[c * m + b] = v;
            reports.push(rep);
        }
    }
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(m, m, &matrix));
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.total_cmp(b));
    Ok(Polarization {
        matrix,
        eigenvalues,
        converged: reports.iter().all(|r| r.converged),
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::LeeSpec;

    fn kaluza(mu: f64) -> WeylStructure {
        WeylStructure::new(
            ModelSpace::trivial(3, 1.0, 2.0).unwrap(),
            MetricSpec::KaluzaPerturbation { mu },
            LeeSpec::Zero,
        )
        .unwrap()
    }

    #[test]
    fn kaluza_q_form_by_hand() {
        // q = (1 − m/2) Z(φ) Z^♭ − ½|Z|² dφ with φ = 2μ/r
        let mu = 0.7;
        let ws = kaluza(mu);
        let p = [1.3, -2.1, 0.6, 0.4];
        let z = [1.0, 0.0, 0.0];
        let q = q_flux_form(&ws.model, &ws.metric, &z, &p, &DerivativeEngine::dual()).unwrap();
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let dphi: Vec<f64> = (0..3).map(|i| -2.0 * mu * p[i] / r.powi(3)).collect();
        let expect = [-0.5 * dphi[0] - 0.5 * dphi[0], -0.5 * dphi[1], -0.5 * dphi[2], 0.0];
        for a in 0..4 {
            assert!((q[a] - expect[a]).abs() < 1e-15, "{a}: {} vs {}", q[a], expect[a]);
        }
    }

    #[test]
    fn kaluza_mass_is_exact_at_every_radius() {
        let mu = 0.5;
        let q = MassQuery::new(kaluza(mu), vec![0.0, 1.0, 0.0], vec![5.0, 10.0, 20.0]);
        let rep = riemannian_mass_q(&q, &DerivativeEngine::dual()).unwrap();
        for v in &rep.q_flux {
            assert!((v - 4.0 * mu / 3.0).abs() < 1e-12);
        }
        assert!(rep.converged);
    }

    #[test]
    fn richardson_removes_leading_term() {
        let radii = [10.0, 20.0, 40.0];
        let vals: Vec<f64> = radii.iter().map(|r| 2.0 + 3.0 / r).collect();
        let e = richardson_sequence(&radii, &vals, 1.0);
        assert!(e[0].is_nan());
        assert!((e[2] - 2.0).abs() < 1e-14);
    }
}
