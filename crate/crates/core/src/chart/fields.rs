//! Analytic field families on the model chart.
//!
//! Every evaluator takes the coordinates as jets and returns frame
//! components as jets, so the same code serves exact forward-mode
//! differentiation and finite differences (constant-jet inputs).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::model::{Fibration, ModelSpace};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::tensor::combinations;

fn zero() -> Jet {
    Jet::constant(0.0)
}

fn radius(x: &[Jet], m: usize) -> Jet {
    x[..m]
        .iter()
        .fold(zero(), |acc, &v| acc + v * v)
        .sqrt()
}

/// `cos(k·x/r + ν t + φ)` together with its coordinate gradient.
fn angular_cos(x: &[Jet], m: usize, r: Jet, k: &[f64], nu: f64, phase: f64) -> (Jet, Vec<Jet>) {
    let kx = (0..m).fold(zero(), |acc, i| acc + x[i] * k[i]);
    let rinv = r.recip();
    let mut w = kx * rinv + phase;
    if nu != 0.0 {
        w += x[m] * nu;
    }
    let (c, s) = (w.cos(), w.sin());
    let rinv3 = rinv * rinv * rinv;
    let mut grad = Vec::with_capacity(m + 1);
    for i in 0..m {
        let dw = rinv * k[i] - kx * x[i] * rinv3;
        grad.push(-(s * dw));
    }
    grad.push(-(s * nu));
    (c, grad)
}

/// Smooth bump `exp(1 − 1/(1 − s²))` on `r ∈ (inner, outer)`, with its radial derivative.
fn bump(r: Jet, inner: f64, outer: f64) -> Option<(Jet, Jet)> {
    let mid = 0.5 * (inner + outer);
    let half = 0.5 * (outer - inner);
    let s = (r - mid) * (1.0 / half);
    if s.value().abs() >= 1.0 {
        return None;
    }
    let one_minus = -(s * s) + 1.0;
    let b = (-(one_minus.recip()) + 1.0).exp();
    let db = b * s * (one_minus * one_minus).recip() * (-2.0 / half);
    Some((b, db))
}

/// A scalar function on the chart with a hand-derived coordinate gradient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarSpec {
    Constant { value: f64 },
    /// `offset + mu r^power`
    RadialPower { offset: f64, mu: f64, power: f64 },
    /// `offset + mu / ln r`
    InverseLog { offset: f64, mu: f64 },
    /// `mu` times a smooth bump supported in `inner < r < outer`
    Bump { mu: f64, inner: f64, outer: f64 },
    /// `amp r^power cos(k·x/r + phase)`
    AngularWave {
        amp: f64,
        power: f64,
        k: Vec<f64>,
        phase: f64,
    },
    /// `amp cos(k·y + phase)` over all coordinates `y = (x, t)`
    CoordinateWave { amp: f64, k: Vec<f64>, phase: f64 },
    Sum { terms: Vec<ScalarSpec> },
    Product { factors: Vec<ScalarSpec> },
    Reciprocal { inner: Box<ScalarSpec> },
}

impl ScalarSpec {
    pub fn constant(value: f64) -> Self {
        ScalarSpec::Constant { value }
    }

    /// `1 + mu r^{2-m}`, the basic member of the adapted class.
    pub fn one_plus_decaying(mu: f64, m: usize) -> Self {
        ScalarSpec::RadialPower {
            offset: 1.0,
            mu,
            power: 2.0 - m as f64,
        }
    }

    /// A random positive member of the adapted class: `1 + a r^{2-m}` plus angular waves.
    pub fn random_adapted(seed: u64, m: usize, scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
        let mut terms = vec![ScalarSpec::RadialPower {
            offset: 1.0,
            mu: scale * rng.random_range(0.2..1.0),
            power: 2.0 - m as f64,
        }];
        for _ in 0..2 {
            terms.push(ScalarSpec::AngularWave {
                amp: scale * rng.random_range(-0.4..0.4),
                power: 2.0 - m as f64,
                k: (0..m).map(|_| rng.random_range(-2.0..2.0)).collect(),
                phase: rng.random_range(0.0..2.0 * PI),
            });
        }
        ScalarSpec::Sum { terms }
    }

    pub fn reciprocal(&self) -> Self {
        ScalarSpec::Reciprocal {
            inner: Box::new(self.clone()),
        }
    }

    pub fn validate(&self, model: &ModelSpace) -> Result<()> {
        let n = model.dim();
        match self {
            ScalarSpec::AngularWave { k, .. } if k.len() != model.m => Err(Error::Config(
                format!("angular wave needs {} wave numbers, got {}", model.m, k.len()),
            )),
            ScalarSpec::CoordinateWave { k, .. } if k.len() != n => Err(Error::Config(format!(
                "coordinate wave needs {n} wave numbers, got {}",
                k.len()
            ))),
            ScalarSpec::Bump { inner, outer, .. } if !(inner < outer) => {
                Err(Error::Config("bump needs inner < outer".into()))
            }
            ScalarSpec::Sum { terms } => terms.iter().try_for_each(|t| t.validate(model)),
            ScalarSpec::Product { factors } => factors.iter().try_for_each(|t| t.validate(model)),
            ScalarSpec::Reciprocal { inner } => inner.validate(model),
            _ => Ok(()),
        }
    }

    /// Value and coordinate gradient `(∂_1 f, …, ∂_m f, ∂_t f)`.
    pub fn eval(&self, model: &ModelSpace, x: &[Jet]) -> (Jet, Vec<Jet>) {
        let m = model.m;
        let n = model.dim();
        match self {
            ScalarSpec::Constant { value } => (Jet::constant(*value), vec![zero(); n]),
            ScalarSpec::RadialPower { offset, mu, power } => {
                let r = radius(x, m);
                let rp2 = r.powf(power - 2.0);
                let v = rp2 * r * r * *mu + *offset;
                let mut g: Vec<Jet> = (0..m).map(|i| rp2 * x[i] * (mu * power)).collect();
                g.push(zero());
                (v, g)
            }
            ScalarSpec::InverseLog { offset, mu } => {
                let r = radius(x, m);
                let lr = r.ln();
                let v = lr.recip() * *mu + *offset;
                let c = (lr * lr * r * r).recip() * (-mu);
                let mut g: Vec<Jet> = (0..m).map(|i| c * x[i]).collect();
                g.push(zero());
                (v, g)
            }
            ScalarSpec::Bump { mu, inner, outer } => {
                let r = radius(x, m);
                match bump(r, *inner, *outer) {
                    None => (zero(), vec![zero(); n]),
                    Some((b, db)) => {
                        let c = db * r.recip() * *mu;
                        let mut g: Vec<Jet> = (0..m).map(|i| c * x[i]).collect();
                        g.push(zero());
                        (b * *mu, g)
                    }
                }
            }
            ScalarSpec::AngularWave { amp, power, k, phase } => {
                let r = radius(x, m);
                let (c, dc) = angular_cos(x, m, r, k, 0.0, *phase);
                let rp2 = r.powf(power - 2.0);
                let rp = rp2 * r * r;
                let mut g: Vec<Jet> = (0..m)
                    .map(|i| (rp2 * x[i] * c * *power + rp * dc[i]) * *amp)
                    .collect();
                g.push(zero());
                (rp * c * *amp, g)
            }
            ScalarSpec::CoordinateWave { amp, k, phase } => {
                let w = (0..n).fold(Jet::constant(*phase), |acc, i| acc + x[i] * k[i]);
                let s = w.sin();
                let g = (0..n).map(|i| s * (-amp * k[i])).collect();
                (w.cos() * *amp, g)
            }
            ScalarSpec::Sum { terms } => {
                let mut v = zero();
                let mut g = vec![zero(); n];
                for t in terms {
                    let (tv, tg) = t.eval(model, x);
                    v += tv;
                    for (a, b) in g.iter_mut().zip(tg) {
                        *a += b;
                    }
                }
                (v, g)
            }
            ScalarSpec::Product { factors } => {
                let mut v = Jet::constant(1.0);
                let mut g = vec![zero(); n];
                for t in factors {
                    let (tv, tg) = t.eval(model, x);
                    for (a, b) in g.iter_mut().zip(tg) {
                        *a = *a * tv + v * b;
                    }
                    v *= tv;
                }
                (v, g)
            }
            ScalarSpec::Reciprocal { inner } => {
                let (v, g) = inner.eval(model, x);
                let inv = v.recip();
                let c = -(inv * inv);
                (inv, g.into_iter().map(|d| d * c).collect())
            }
        }
    }

    pub fn value_at(&self, model: &ModelSpace, p: &[f64]) -> f64 {
        let x: Vec<Jet> = p.iter().map(|&v| Jet::constant(v)).collect();
        self.eval(model, &x).0.value()
    }

    /// Whether the function is independent of the fiber coordinate.
    pub fn fiber_invariant(&self) -> bool {
        match self {
            ScalarSpec::CoordinateWave { k, .. } => k.last().is_none_or(|&v| v == 0.0),
            ScalarSpec::Sum { terms } => terms.iter().all(|t| t.fiber_invariant()),
            ScalarSpec::Product { factors } => factors.iter().all(|t| t.fiber_invariant()),
            ScalarSpec::Reciprocal { inner } => inner.fiber_invariant(),
            _ => true,
        }
    }
}

/// Convert a coordinate covector `b_i dx^i + b_t dt` to frame components.
fn coordinate_to_frame(model: &ModelSpace, x: &[Jet], b: Vec<Jet>) -> Vec<Jet> {
    if model.is_holonomic() {
        return b;
    }
    let a = model.connection(x);
    let m = model.m;
    let mut out = b;
    let bt = out[m];
    for i in 0..m {
        out[i] -= bt * a[i];
    }
    out
}

#[derive(Clone, Debug)]
struct Wave {
    amp: f64,
    k: Vec<f64>,
    nu: f64,
    phase: f64,
}

fn random_wave(rng: &mut ChaCha8Rng, m: usize, amp: f64, nu: f64) -> Wave {
    Wave {
        amp: amp * rng.random_range(-1.0..1.0),
        k: (0..m).map(|_| rng.random_range(-2.0..2.0)).collect(),
        nu,
        phase: rng.random_range(0.0..2.0 * PI),
    }
}

fn eval_wave(w: &Wave, x: &[Jet], m: usize, r: Jet) -> Jet {
    angular_cos(x, m, r, &w.k, w.nu, w.phase).0 * w.amp
}

/// Metric families, given by their components in the frame `(dx, η)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MetricSpec {
    /// `h` itself.
    FlatProduct,
    /// `(1 + 2 mu r^{2-m}) dx² + η²`.
    KaluzaPerturbation { mu: f64 },
    /// `V dx² + V^{-1} η²` with `V = 1 + 2 mu r^{2-m}`; Ricci-flat on the
    /// Hopf chart when `mu = L/(8π)`.
    HopfModel { mu: f64 },
    /// `factor · base`.
    Conformal {
        factor: ScalarSpec,
        base: Box<MetricSpec>,
    },
    /// `h` plus seeded angular waves decaying like `r^{2-m}`; with `fiber`,
    /// an extra fiber-dependent term decaying like `r^{-m}` (trivial fibration only).
    RandomTrig {
        seed: u64,
        amplitude: f64,
        #[serde(default)]
        fiber: bool,
    },
    /// Round unit `S²` in stereographic coordinates `(x_1, x_2)` times a flat
    /// factor; a curvature sanity chart, not ALF.
    SphereProduct,
}

impl MetricSpec {
    pub fn conformal(factor: ScalarSpec, base: MetricSpec) -> Self {
        MetricSpec::Conformal {
            factor,
            base: Box::new(base),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricSpec::FlatProduct => "flat_product",
            MetricSpec::KaluzaPerturbation { .. } => "kaluza_perturbation",
            MetricSpec::HopfModel { .. } => "hopf_model",
            MetricSpec::Conformal { .. } => "conformal",
            MetricSpec::RandomTrig { .. } => "random_trig",
            MetricSpec::SphereProduct => "sphere_product",
        }
    }

    pub fn validate(&self, model: &ModelSpace) -> Result<()> {
        match self {
            MetricSpec::RandomTrig { amplitude, .. } if !(amplitude.abs() < 0.5) => Err(
                Error::Config(format!("random_trig amplitude {amplitude} must be below 0.5")),
            ),
            MetricSpec::HopfModel { mu } | MetricSpec::KaluzaPerturbation { mu }
                if *mu < 0.0 && 2.0 * mu.abs() >= model.radius.powf(model.m as f64 - 2.0) =>
            {
                Err(Error::Config(format!(
                    "mu = {mu} makes the metric degenerate outside r = {}",
                    model.radius
                )))
            }
            MetricSpec::Conformal { factor, base } => {
                factor.validate(model)?;
                base.validate(model)
            }
            _ => Ok(()),
        }
    }

    /// Declared decay exponents for `g − h`, `∇^h g`, `∇^{h,2} g`; `None` for non-ALF charts.
    pub fn declared_decay(&self, m: usize) -> Option<[f64; 3]> {
        match self {
            MetricSpec::SphereProduct => None,
            MetricSpec::Conformal { base, .. } => base.declared_decay(m),
            _ => {
                let m = m as f64;
                Some([2.0 - m, 1.0 - m, -m])
            }
        }
    }

    /// Row-major frame components `g_ab`.
    pub fn eval(&self, model: &ModelSpace, x: &[Jet]) -> Vec<Jet> {
        let m = model.m;
        let n = model.dim();
        let mut g = vec![zero(); n * n];
        let diag = |g: &mut Vec<Jet>, base: Jet, fiber: Jet| {
            for i in 0..m {
                g[i * n + i] = base;
            }
            g[m * n + m] = fiber;
        };
        match self {
            MetricSpec::FlatProduct => diag(&mut g, Jet::constant(1.0), Jet::constant(1.0)),
            MetricSpec::KaluzaPerturbation { mu } => {
                let r = radius(x, m);
                let v = r.powf(2.0 - m as f64) * (2.0 * mu) + 1.0;
                diag(&mut g, v, Jet::constant(1.0));
            }
            MetricSpec::HopfModel { mu } => {
                let r = radius(x, m);
                let v = r.powf(2.0 - m as f64) * (2.0 * mu) + 1.0;
                diag(&mut g, v, v.recip());
            }
            MetricSpec::Conformal { factor, base } => {
                let (f, _) = factor.eval(model, x);
                g = base.eval(model, x).into_iter().map(|c| c * f).collect();
            }
            MetricSpec::RandomTrig {
                seed,
                amplitude,
                fiber,
            } => {
                let r = radius(x, m);
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let entry = amplitude / (2.0 * n as f64);
                let nu = 2.0 * PI / model.fiber_length;
                let lead = r.powf(2.0 - m as f64);
                let tail = r.powf(-(m as f64));
                for a in 0..n {
                    for b in a..n {
                        let w1 = random_wave(&mut rng, m, entry, 0.0);
                        let w2 = random_wave(&mut rng, m, entry, nu);
                        let mut v = lead * eval_wave(&w1, x, m, r);
                        if *fiber && model.fibration == Fibration::Trivial {
                            v += tail * eval_wave(&w2, x, m, r);
                        }
                        if a == b {
                            v = v + 1.0;
                        }
                        g[a * n + b] = v;
                        g[b * n + a] = v;
                    }
                }
            }
            MetricSpec::SphereProduct => {
                let q = x[0] * x[0] + x[1] * x[1] + 1.0;
                let conf = (q * q).recip() * 4.0;
                for i in 0..n {
                    g[i * n + i] = if i < 2 { conf } else { Jet::constant(1.0) };
                }
            }
        }
        g
    }

    pub fn fiber_invariant(&self, model: &ModelSpace) -> bool {
        match self {
            MetricSpec::RandomTrig { fiber, .. } => {
                !*fiber || model.fibration == Fibration::Hopf
            }
            MetricSpec::Conformal { factor, base } => {
                factor.fiber_invariant() && base.fiber_invariant(model)
            }
            _ => true,
        }
    }
}

/// Lee-form fields, as frame components of `θ_g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeeSpec {
    Zero,
    /// `mu r^{1-m} dr`
    Radial { mu: f64 },
    /// Constant frame components.
    Constant { components: Vec<f64> },
    /// `coeff · x_source dx^target` (0-based indices).
    Linear {
        coeff: f64,
        source: usize,
        target: usize,
    },
    /// `dφ`
    Exact { potential: ScalarSpec },
    /// `mu β(r) dr` with `β` a smooth bump on `inner < r < outer`.
    Bump { mu: f64, inner: f64, outer: f64 },
    /// Seeded angular waves decaying like `r^{1-m}`; `fiber` as for metrics.
    RandomTrig {
        seed: u64,
        amplitude: f64,
        #[serde(default)]
        fiber: bool,
    },
    Sum { terms: Vec<LeeSpec> },
    /// `θ − df/(2f)`: the Lee form of the same Weyl structure in the gauge `f g`.
    GaugeShifted {
        base: Box<LeeSpec>,
        factor: ScalarSpec,
    },
}

impl LeeSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LeeSpec::Zero => "zero",
            LeeSpec::Radial { .. } => "radial",
            LeeSpec::Constant { .. } => "constant",
            LeeSpec::Linear { .. } => "linear",
            LeeSpec::Exact { .. } => "exact",
            LeeSpec::Bump { .. } => "bump",
            LeeSpec::RandomTrig { .. } => "random_trig",
            LeeSpec::Sum { .. } => "sum",
            LeeSpec::GaugeShifted { .. } => "gauge_shifted",
        }
    }

    pub fn validate(&self, model: &ModelSpace) -> Result<()> {
        let n = model.dim();
        match self {
            LeeSpec::Constant { components } if components.len() != n => Err(Error::Config(
                format!("constant lee form needs {n} components, got {}", components.len()),
            )),
            LeeSpec::Linear { source, target, .. } if *source >= n || *target >= n => Err(
                Error::Config(format!("linear lee form indices must be below {n}")),
            ),
            LeeSpec::Bump { inner, outer, .. } if !(inner < outer) => {
                Err(Error::Config("bump needs inner < outer".into()))
            }
            LeeSpec::Exact { potential } => potential.validate(model),
            LeeSpec::Sum { terms } => terms.iter().try_for_each(|t| t.validate(model)),
            LeeSpec::GaugeShifted { base, factor } => {
                factor.validate(model)?;
                base.validate(model)
            }
            _ => Ok(()),
        }
    }

    /// Declared decay exponents for `θ` and `dθ`; `None` when no ALF decay is claimed.
    pub fn declared_decay(&self, m: usize) -> Option<[f64; 2]> {
        let ok = Some([1.0 - m as f64, 2.0 - m as f64]);
        match self {
            LeeSpec::Zero
            | LeeSpec::Radial { .. }
            | LeeSpec::Bump { .. }
            | LeeSpec::RandomTrig { .. } => ok,
            LeeSpec::Constant { components } if components.iter().all(|&c| c == 0.0) => ok,
            LeeSpec::Constant { .. } | LeeSpec::Linear { .. } | LeeSpec::Exact { .. } => None,
            LeeSpec::Sum { terms } => {
                if terms.iter().all(|t| t.declared_decay(m).is_some()) {
                    ok
                } else {
                    None
                }
            }
            LeeSpec::GaugeShifted { base, .. } => base.declared_decay(m),
        }
    }

    pub fn eval(&self, model: &ModelSpace, x: &[Jet]) -> Vec<Jet> {
        let m = model.m;
        let n = model.dim();
        match self {
            LeeSpec::Zero => vec![zero(); n],
            LeeSpec::Radial { mu } => {
                let r = radius(x, m);
                let c = r.powf(-(m as f64)) * *mu;
                let mut t: Vec<Jet> = (0..m).map(|i| c * x[i]).collect();
                t.push(zero());
                t
            }
            LeeSpec::Constant { components } => {
                components.iter().map(|&c| Jet::constant(c)).collect()
            }
            LeeSpec::Linear {
                coeff,
                source,
                target,
            } => {
                let mut t = vec![zero(); n];
                t[*target] = x[*source] * *coeff;
                t
            }
            LeeSpec::Exact { potential } => {
                let (_, g) = potential.eval(model, x);
                coordinate_to_frame(model, x, g)
            }
            LeeSpec::Bump { mu, inner, outer } => {
                let r = radius(x, m);
                match bump(r, *inner, *outer) {
                    None => vec![zero(); n],
                    Some((b, _)) => {
                        let c = b * r.recip() * *mu;
                        let mut t: Vec<Jet> = (0..m).map(|i| c * x[i]).collect();
                        t.push(zero());
                        t
                    }
                }
            }
            LeeSpec::RandomTrig {
                seed,
                amplitude,
                fiber,
            } => {
                let r = radius(x, m);
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x1ee));
                let nu = 2.0 * PI / model.fiber_length;
                let lead = r.powf(1.0 - m as f64);
                let tail = r.powf(-(m as f64));
                (0..n)
                    .map(|_| {
                        let w1 = random_wave(&mut rng, m, *amplitude, 0.0);
                        let w2 = random_wave(&mut rng, m, *amplitude, nu);
                        let mut v = lead * eval_wave(&w1, x, m, r);
                        if *fiber && model.fibration == Fibration::Trivial {
                            v += tail * eval_wave(&w2, x, m, r);
                        }
                        v
                    })
                    .collect()
            }
            LeeSpec::Sum { terms } => {
                let mut t = vec![zero(); n];
                for term in terms {
                    for (a, b) in t.iter_mut().zip(term.eval(model, x)) {
                        *a += b;
                    }
                }
                t
            }
            LeeSpec::GaugeShifted { base, factor } => {
                let (f, df) = factor.eval(model, x);
                let df = coordinate_to_frame(model, x, df);
                let half_inv = f.recip() * 0.5;
                base.eval(model, x)
                    .into_iter()
                    .zip(df)
                    .map(|(t, d)| t - d * half_inv)
                    .collect()
            }
        }
    }

    pub fn fiber_invariant(&self, model: &ModelSpace) -> bool {
        match self {
            LeeSpec::RandomTrig { fiber, .. } => !*fiber || model.fibration == Fibration::Hopf,
            LeeSpec::Linear { source, .. } => *source != model.m,
            LeeSpec::Exact { potential } => potential.fiber_invariant(),
            LeeSpec::Sum { terms } => terms.iter().all(|t| t.fiber_invariant(model)),
            LeeSpec::GaugeShifted { base, factor } => {
                factor.fiber_invariant() && base.fiber_invariant(model)
            }
            _ => true,
        }
    }
}

/// Test p-form fields (frame components), used to drive the operator identities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormSpec {
    /// `factor · e^{i_1} ∧ … ∧ e^{i_p}` for increasing indices.
    Basis {
        indices: Vec<usize>,
        factor: ScalarSpec,
    },
    /// Seeded coordinate waves in every independent component.
    RandomTrig {
        seed: u64,
        degree: usize,
        amplitude: f64,
        fiber: bool,
    },
    /// A random form multiplied by a bump supported in `inner < r < outer`.
    Compact {
        seed: u64,
        degree: usize,
        inner: f64,
        outer: f64,
    },
}

impl FormSpec {
    pub fn basis(indices: Vec<usize>) -> Self {
        FormSpec::Basis {
            indices,
            factor: ScalarSpec::constant(1.0),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            FormSpec::Basis { indices, .. } => indices.len(),
            FormSpec::RandomTrig { degree, .. } | FormSpec::Compact { degree, .. } => *degree,
        }
    }

    /// Full antisymmetric component array of length `n^p`.
    pub fn eval(&self, model: &ModelSpace, x: &[Jet]) -> Vec<Jet> {
        let n = model.dim();
        let p = self.degree();
        let mut independent: Vec<(Vec<usize>, Jet)> = Vec::new();
        match self {
            FormSpec::Basis { indices, factor } => {
                let (f, _) = factor.eval(model, x);
                independent.push((indices.clone(), f));
            }
            FormSpec::RandomTrig {
                seed,
                degree,
                amplitude,
                fiber,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(7));
                let nu = 2.0 * PI / model.fiber_length;
                for idx in combinations(n, *degree) {
                    let mut v = zero();
                    for _ in 0..2 {
                        let amp = amplitude * rng.random_range(-1.0..1.0);
                        let k: Vec<f64> = (0..n).map(|_| rng.random_range(-1.2..1.2)).collect();
                        let phase = rng.random_range(0.0..2.0 * PI);
                        let mode = if *fiber { rng.random_range(-1i32..=1) as f64 } else { 0.0 };
                        let mut w = Jet::constant(phase);
                        for i in 0..model.m {
                            w += x[i] * k[i];
                        }
                        if mode != 0.0 {
                            w += x[model.m] * (mode * nu);
                        }
                        v += w.cos() * amp;
                    }
                    independent.push((idx, v));
                }
            }
            FormSpec::Compact {
                seed,
                degree,
                inner,
                outer,
            } => {
                let r = radius(x, model.m);
                if let Some((b, _)) = bump(r, *inner, *outer) {
                    let inner_form = FormSpec::RandomTrig {
                        seed: *seed,
                        degree: *degree,
                        amplitude: 1.0,
                        fiber: false,
                    };
                    return inner_form.eval(model, x).into_iter().map(|c| c * b).collect();
                }
                return vec![zero(); n.pow(p as u32)];
            }
        }
        expand_antisymmetric(n, p, &independent)
    }
}

/// Fill all permutations of each increasing multi-index with the signed value.
pub fn expand_antisymmetric(n: usize, p: usize, independent: &[(Vec<usize>, Jet)]) -> Vec<Jet> {
    let mut out = vec![zero(); n.pow(p as u32)];
    for (idx, v) in independent {
        for (perm, sign) in crate::tensor::permutations(p) {
            let pidx: Vec<usize> = perm.iter().map(|&k| idx[k]).collect();
            let off = crate::tensor::ravel(&pidx, n);
            out[off] = if sign > 0 { *v } else { -*v };
        }
    }
    out
}

/// Test vector fields (frame components).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VectorSpec {
    Basis { index: usize },
    RandomTrig { seed: u64, amplitude: f64 },
}

impl VectorSpec {
    pub fn eval(&self, model: &ModelSpace, x: &[Jet]) -> Vec<Jet> {
        let n = model.dim();
        match self {
            VectorSpec::Basis { index } => {
                let mut v = vec![zero(); n];
                v[*index] = Jet::constant(1.0);
                v
            }
            VectorSpec::RandomTrig { seed, amplitude } => FormSpec::RandomTrig {
                seed: *seed,
                degree: 1,
                amplitude: *amplitude,
                fiber: true,
            }
            .eval(model, x),
        }
    }
}
