//! Log-log decay probes for fields on the model chart.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::chart::engine::DerivativeEngine;
use crate::chart::fields::{LeeSpec, MetricSpec, ScalarSpec};
use crate::chart::geometry::{covariant_derivative, levi_civita};
use crate::chart::model::{Fibration, ModelSpace};
use crate::error::{Error, Result};
use crate::jet::{seed, Jet};
use crate::util::float_or_inf;

/// Allowed excess of the measured slope over the declared exponent.
pub const SLOPE_TOLERANCE: f64 = 0.2;

/// Norms below this are treated as exact zeros.
pub const ZERO_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub probe: String,
    #[serde(with = "float_or_inf")]
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual of the log-log fit.
    pub band: f64,
    pub declared: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub radii: Vec<f64>,
    pub norms: Vec<f64>,
}

impl DecayEstimate {
    pub fn into_result(self) -> Result<Self> {
        if self.pass {
            Ok(self)
        } else {
            Err(Error::DecayProbe {
                probe: self.probe,
                measured: self.slope,
                declared: self.declared,
            })
        }
    }
}

/// Fit `log ‖field‖ = slope · log r + intercept` over the sampled radii.
pub fn decay_probe(
    name: &str,
    declared: f64,
    radii: &[f64],
    norm_at: impl Fn(f64) -> Result<f64>,
) -> Result<DecayEstimate> {
    if radii.len() < 4 {
        return Err(Error::Config(format!(
            "decay probe `{name}` needs at least 4 radii, got {}",
            radii.len()
        )));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(format!("decay probe `{name}`: radii must increase")));
    }
    let norms = radii.iter().map(|&r| norm_at(r)).collect::<Result<Vec<f64>>>()?;
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(&norms)
        .filter(|(_, &v)| v > ZERO_FLOOR)
        .map(|(&r, &v)| (r.ln(), v.ln()))
        .collect();
    let tail_zero = norms.last().is_some_and(|&v| v <= ZERO_FLOOR);
    let (slope, intercept, band) = if pts.len() < 2 || tail_zero {
        (f64::NEG_INFINITY, 0.0, 0.0)
    } else {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let band = pts
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).abs())
            .fold(0.0, f64::max);
        (slope, intercept, band)
    };
    Ok(DecayEstimate {
        probe: name.to_string(),
        slope,
        intercept,
        band,
        declared,
        tolerance: SLOPE_TOLERANCE,
        pass: slope <= declared + SLOPE_TOLERANCE,
        radii: radii.to_vec(),
        norms,
    })
}

/// Deterministic sample of unit directions in `ℝ^m`, avoiding the Hopf seam.
pub fn sphere_directions(model: &ModelSpace, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let m = model.m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        let v: Vec<f64> = v.iter().map(|a| a / norm).collect();
        if model.fibration == Fibration::Hopf && v[2] < -0.9 {
            continue;
        }
        out.push(v);
    }
    out
}

/// Probe configuration: radii and direction sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSchedule {
    pub radii: Vec<f64>,
    pub directions: usize,
    pub seed: u64,
}

impl Default for ProbeSchedule {
    fn default() -> Self {
        ProbeSchedule {
            radii: crate::util::geometric_radii(10.0, 320.0, 6),
            directions: 12,
            seed: 7,
        }
    }
}

impl ProbeSchedule {
    pub(crate) fn points(&self, model: &ModelSpace, r: f64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0xf1be);
        sphere_directions(model, self.directions, self.seed)
            .into_iter()
            .map(|d| {
                let mut p: Vec<f64> = d.iter().map(|v| v * r).collect();
                p.push(rng.random_range(0.0..model.fiber_length));
                p
            })
            .collect()
    }

    /// Maximum of `f` over the direction sample at radius `r`.
    pub(crate) fn max_over(&self, model: &ModelSpace, r: f64, f: impl Fn(&[f64]) -> Result<f64>) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in self.points(model, r) {
            worst = worst.max(f(&p)?);
        }
        Ok(worst)
    }
}

fn max_abs(v: &[Jet]) -> f64 {
    v.iter().map(|j| j.value().abs()).fold(0.0, f64::max)
}

fn identity_jets(n: usize) -> Vec<Jet> {
    let mut h = vec![Jet::constant(0.0); n * n];
    for i in 0..n {
        h[i * n + i] = Jet::constant(1.0);
    }
    h
}

/// The three ALF probes `g − h`, `∇^h g`, `∇^{h,2} g`.
pub fn metric_decay_probes(
    model: &ModelSpace,
    fam: &MetricSpec,
    de: &DerivativeEngine,
    schedule: &ProbeSchedule,
) -> Result<Vec<DecayEstimate>> {
    let m = model.m as f64;
    let declared = fam.declared_decay(model.m).ok_or_else(|| {
        Error::Config(format!("family `{}` declares no ALF decay", fam.name()))
    })?;
    let n = model.dim();
    let sample = |p: &[f64]| -> Result<[f64; 3]> {
        model.check_point(p)?;
        let g = de.jets(|x| fam.eval(model, x), p, model.m);
        let frame = model.frame(&seed(p));
        let h = identity_jets(n);
        let gamma_h = levi_civita(&frame, &h, &h);
        let diff: Vec<Jet> = g.iter().zip(&h).map(|(a, b)| *a - *b).collect();
        let dg = covariant_derivative(&frame, &gamma_h, &g, 2, None);
        let ddg = covariant_derivative(&frame, &gamma_h, &dg, 3, None);
        Ok([max_abs(&diff), max_abs(&dg), max_abs(&ddg)])
    };
    let names = ["g-h", "nabla_h g", "nabla_h^2 g"];
    let _ = m;
    let mut out = Vec::new();
    for (slot, name) in names.iter().enumerate() {
        out.push(decay_probe(
            &format!("{}:{}", fam.name(), name),
            declared[slot],
            &schedule.radii,
            |r| schedule.max_over(model, r, |p| Ok(sample(p)?[slot])),
        )?);
    }
    Ok(out)
}

/// Frame components of `dθ`: `e_a θ_b − e_b θ_a − C_ab^c θ_c`.
pub(crate) fn exterior_derivative_1form(frame: &crate::chart::Frame, theta: &[Jet]) -> Vec<Jet> {
    let n = frame.dim();
    let d: Vec<Vec<Jet>> = theta.iter().map(|t| frame.derive(t)).collect();
    let mut f = vec![Jet::constant(0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            let mut v = d[b][a] - d[a][b];
            if !frame.is_holonomic() {
                for c in 0..n {
                    v -= frame.c(a, b, c) * theta[c];
                }
            }
            f[a * n + b] = v;
        }
    }
    f
}

/// Lee-form probes `θ` and `dθ` against `1−m` and `2−m`.
pub fn lee_decay_probes(
    model: &ModelSpace,
    lee: &LeeSpec,
    de: &DerivativeEngine,
    schedule: &ProbeSchedule,
) -> Result<Vec<DecayEstimate>> {
    let declared = lee.declared_decay(model.m).ok_or_else(|| {
        Error::Config(format!("lee form `{}` declares no ALF decay", lee.name()))
    })?;
    let sample = |p: &[f64]| -> Result<[f64; 2]> {
        model.check_point(p)?;
        let theta = de.jets(|x| lee.eval(model, x), p, model.m);
        let frame = model.frame(&seed(p));
        let f = exterior_derivative_1form(&frame, &theta);
        Ok([max_abs(&theta), max_abs(&f)])
    };
    let mut out = Vec::new();
    for (slot, name) in ["theta", "d theta"].iter().enumerate() {
        out.push(decay_probe(
            &format!("{}:{}", lee.name(), name),
            declared[slot],
            &schedule.radii,
            |r| schedule.max_over(model, r, |p| Ok(sample(p)?[slot])),
        )?);
    }
    Ok(out)
}

/// Decay of the model curvature `dη`, declared `1−m`.
pub fn model_curvature_probe(model: &ModelSpace, schedule: &ProbeSchedule) -> Result<DecayEstimate> {
    decay_probe(
        "d eta",
        1.0 - model.m as f64,
        &schedule.radii,
        |r| {
            schedule.max_over(model, r, |p| {
                let x: Vec<Jet> = p.iter().map(|&v| Jet::constant(v)).collect();
                Ok(max_abs(&model.base_curvature(&x)))
            })
        },
    )
}

/// Membership probes for the adapted class: `f − 1`, `∂f`, `∂∂f` against `2−m`, `1−m`, `−m`.
pub fn factor_probes(
    model: &ModelSpace,
    f: &ScalarSpec,
    de: &DerivativeEngine,
    schedule: &ProbeSchedule,
) -> Result<Vec<DecayEstimate>> {
    let m = model.m as f64;
    let n = model.dim();
    let sample = |p: &[f64]| -> Result<[f64; 3]> {
        let j = de.jets(|x| vec![f.eval(model, x).0], p, model.m)[0];
        if !(j.value() > 0.0) {
            return Err(Error::NotAdapted(format!("factor is not positive at {p:?}")));
        }
        let grad = j.grad().iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut hess: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                hess = hess.max(j.hess(a, b).abs());
            }
        }
        Ok([(j.value() - 1.0).abs(), grad, hess])
    };
    let declared = [2.0 - m, 1.0 - m, -m];
    let mut out = Vec::new();
    for (slot, name) in ["f-1", "df", "ddf"].iter().enumerate() {
        out.push(decay_probe(name, declared[slot], &schedule.radii, |r| {
            schedule.max_over(model, r, |p| Ok(sample(p)?[slot]))
        })?);
    }
    Ok(out)
}
