//! Weyl structures `D = ∇^g + θ_g` and their operators at a point.
//!
//! A weighted p-form of weight k is stored through its components in the
//! gauge `g`. On such components the connection acts by
//! `(D_a ω)_I = e_a ω_I + k θ_a ω_I − Σ_s W^d_{a i_s} ω_{…d…}` where
//! `W^c_ab = Γ^c_ab + θ_a δ^c_b + θ_b δ^c_a − g_ab θ^c` are the coefficients of
//! `D` on vectors.

use serde::{Deserialize, Serialize};

use crate::chart::geometry::{self, covariant_derivative, curvature, levi_civita, weyl_coefficients};
use crate::chart::probe::exterior_derivative_1form;
use crate::chart::{DerivativeEngine, FormSpec, Frame, LeeSpec, MetricSpec, ModelSpace, ScalarSpec, VectorSpec};
use crate::error::{Error, Result};
use crate::jet::{seed, Jet};
use crate::tensor::{unravel, GaugeId, PointMetric, Tensor, WeightedForm};
use crate::util::fnv1a;

fn zero() -> Jet {
    Jet::constant(0.0)
}

/// A gauge metric and the Lee form of `D` relative to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylStructure {
    pub model: ModelSpace,
    pub metric: MetricSpec,
    pub lee: LeeSpec,
}

impl WeylStructure {
    pub fn new(model: ModelSpace, metric: MetricSpec, lee: LeeSpec) -> Result<Self> {
        model.validate()?;
        metric.validate(&model)?;
        lee.validate(&model)?;
        Ok(WeylStructure { model, metric, lee })
    }

    /// Identifier of the gauge metric, stable across runs.
    pub fn gauge(&self) -> GaugeId {
        let bytes = serde_json::to_vec(&(&self.model, &self.metric)).expect("spec serializes");
        GaugeId(fnv1a(&bytes))
    }

    /// The same Weyl structure seen from the gauge `f g`: `θ_{fg} = θ_g − df/(2f)`.
    pub fn gauge_change(&self, f: &ScalarSpec) -> Result<Self> {
        f.validate(&self.model)?;
        Ok(WeylStructure {
            model: self.model.clone(),
            metric: MetricSpec::conformal(f.clone(), self.metric.clone()),
            lee: LeeSpec::GaugeShifted {
                base: Box::new(self.lee.clone()),
                factor: f.clone(),
            },
        })
    }

    /// The Weyl structure `D + θ'` in the same gauge.
    pub fn shifted(&self, extra: LeeSpec) -> Self {
        WeylStructure {
            model: self.model.clone(),
            metric: self.metric.clone(),
            lee: LeeSpec::Sum {
                terms: vec![self.lee.clone(), extra],
            },
        }
    }

    /// Levi-Civita connection of the gauge metric, as a Weyl structure.
    pub fn levi_civita(&self) -> Self {
        WeylStructure {
            model: self.model.clone(),
            metric: self.metric.clone(),
            lee: LeeSpec::Zero,
        }
    }

    pub fn fiber_invariant(&self) -> bool {
        self.metric.fiber_invariant(&self.model) && self.lee.fiber_invariant(&self.model)
    }

    pub fn at(&self, p: &[f64], de: &DerivativeEngine) -> Result<WeylPoint<'_>> {
        let model = &self.model;
        model.check_point(p)?;
        let n = model.dim();
        let frame = model.frame(&seed(p));
        let g = de.jets(|x| self.metric.eval(model, x), p, model.m);
        let metric = PointMetric::new(n, geometry::values(&g))?;
        let (g_inv, _) = geometry::inverse(n, &g)?;
        let theta = de.jets(|x| self.lee.eval(model, x), p, model.m);
        let gamma = levi_civita(&frame, &g, &g_inv);
        let w = weyl_coefficients(n, &gamma, &g, &g_inv, &theta);
        Ok(WeylPoint {
            structure: self,
            p: p.to_vec(),
            engine: *de,
            gauge: self.gauge(),
            frame,
            metric,
            g,
            g_inv,
            theta,
            gamma,
            w,
        })
    }
}

/// Curvatures of `D` at a point, in the gauge frame.
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    /// `R^d_abc`
    pub rd: Tensor<f64>,
    /// `R − F ⊗ Id`
    pub rd_antisym: Tensor<f64>,
    pub fd: Tensor<f64>,
    /// `Ric(X, Y) = tr(Z ↦ R_{Z,X} Y)`
    pub ric: Tensor<f64>,
    /// `Ric(X, Y) = g(Σ R^a_{X,e_i} e_i, Y)` over a `g`-orthonormal frame
    pub ric_local: Tensor<f64>,
    /// `g^{bc} Ric_bc`, the weight −2 density in this gauge
    pub scal: f64,
}

/// Everything `D` needs at one point: metric, Lee form and connection jets.
pub struct WeylPoint<'a> {
    pub structure: &'a WeylStructure,
    pub p: Vec<f64>,
    pub engine: DerivativeEngine,
    gauge: GaugeId,
    frame: Frame,
    metric: PointMetric<f64>,
    g: Vec<Jet>,
    g_inv: Vec<Jet>,
    theta: Vec<Jet>,
    gamma: Vec<Jet>,
    w: Vec<Jet>,
}

impl<'a> WeylPoint<'a> {
    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn gauge(&self) -> GaugeId {
        self.gauge
    }

    pub fn metric(&self) -> &PointMetric<f64> {
        &self.metric
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn g_jets(&self) -> &[Jet] {
        &self.g
    }

    pub fn g_inv_jets(&self) -> &[Jet] {
        &self.g_inv
    }

    pub fn lee_jets(&self) -> &[Jet] {
        &self.theta
    }

    pub fn lee(&self) -> Tensor<f64> {
        Tensor::covector(geometry::values(&self.theta))
    }

    pub fn levi_civita_coefficients(&self) -> Tensor<f64> {
        Tensor::from_vec(self.dim(), 1, 2, geometry::values(&self.gamma)).expect("shape")
    }

    pub fn weyl_coefficients(&self) -> Tensor<f64> {
        Tensor::from_vec(self.dim(), 1, 2, geometry::values(&self.w)).expect("shape")
    }

    /// Jets of an arbitrary field at this point, using the point's engine.
    pub fn field(&self, f: impl Fn(&[Jet]) -> Vec<Jet>) -> Vec<Jet> {
        self.engine.jets(f, &self.p, self.structure.model.m)
    }

    pub fn form(&self, spec: &FormSpec, weight: f64) -> Result<WeightedForm<Jet>> {
        let model = &self.structure.model;
        let n = self.dim();
        let p = spec.degree();
        if p > n {
            return Err(Error::Degree(format!("degree {p} exceeds dimension {n}")));
        }
        let comps = self.field(|x| spec.eval(model, x));
        WeightedForm::new(Tensor::from_vec(n, 0, p, comps)?, weight, self.gauge)
    }

    pub fn vector(&self, spec: &VectorSpec) -> Vec<Jet> {
        let model = &self.structure.model;
        self.field(|x| spec.eval(model, x))
    }

    fn check(&self, w: &WeightedForm<Jet>) -> Result<()> {
        if w.gauge != self.gauge {
            return Err(Error::GaugeMismatch {
                left: w.gauge.to_string(),
                right: self.gauge.to_string(),
            });
        }
        if w.form.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.form.dim(),
            });
        }
        Ok(())
    }

    fn raise(&self, v: &[Jet]) -> Vec<Jet> {
        let n = self.dim();
        (0..n)
            .map(|c| (0..n).fold(zero(), |acc, d| acc + self.g_inv[c * n + d] * v[d]))
            .collect()
    }

    /// `Dω` as a weight-k covariant tensor of rank p+1, derivative slot first.
    pub fn covariant(&self, w: &WeightedForm<Jet>) -> Result<Tensor<Jet>> {
        self.check(w)?;
        let rank = w.form.rank();
        let d = covariant_derivative(&self.frame, &self.w, w.form.data(), rank, Some((&self.theta, w.weight)));
        Tensor::from_vec(self.dim(), 0, rank + 1, d)
    }

    /// `∇^g ω` (no Lee-form terms).
    pub fn levi_civita_covariant(&self, w: &WeightedForm<Jet>) -> Result<Tensor<Jet>> {
        self.check(w)?;
        let rank = w.form.rank();
        let d = covariant_derivative(&self.frame, &self.gamma, w.form.data(), rank, None);
        Tensor::from_vec(self.dim(), 0, rank + 1, d)
    }

    /// `D_X ω` for a vector `X` given by frame components.
    pub fn derivative_along(&self, w: &WeightedForm<Jet>, x: &[f64]) -> Result<WeightedForm<Jet>> {
        let dw = self.covariant(w)?;
        Ok(WeightedForm {
            form: contract_first(&dw, x),
            weight: w.weight,
            gauge: w.gauge,
        })
    }

    /// `d^D ω = Σ e^a ∧ D_{e_a} ω`.
    pub fn d(&self, w: &WeightedForm<Jet>) -> Result<WeightedForm<Jet>> {
        let p = w.degree();
        let n = self.dim();
        let dw = self.covariant(w)?;
        let mut out = Tensor::zeros(n, 0, p + 1);
        if p < n {
            let size = n.pow(p as u32);
            let mut idx = vec![0usize; p + 1];
            for off in 0..out.data().len() {
                unravel(off, n, &mut idx);
                if crate::tensor::permutation_sign(&idx) == 0 {
                    continue;
                }
                let mut v = zero();
                for j in 0..=p {
                    let rest: Vec<usize> = idx.iter().enumerate().filter(|&(s, _)| s != j).map(|(_, &i)| i).collect();
                    let term = dw.data()[idx[j] * size + crate::tensor::ravel(&rest, n)];
                    if j % 2 == 0 {
                        v += term;
                    } else {
                        v -= term;
                    }
                }
                out.data_mut()[off] = v;
            }
        }
        Ok(WeightedForm {
            form: out,
            weight: w.weight,
            gauge: w.gauge,
        })
    }

    /// `δ^D ω = −g^{ab} e_a ⨼ D_{e_b} ω`, of weight `k − 2`; zero on functions.
    pub fn delta(&self, w: &WeightedForm<Jet>) -> Result<WeightedForm<Jet>> {
        self.check(w)?;
        let p = w.degree();
        let n = self.dim();
        if p == 0 {
            return Ok(WeightedForm {
                form: Tensor::scalar(n, zero()),
                weight: w.weight - 2.0,
                gauge: w.gauge,
            });
        }
        let dw = self.covariant(w)?;
        let size = n.pow(p as u32);
        let inner = n.pow((p - 1) as u32);
        let mut out = Tensor::zeros(n, 0, p - 1);
        for off in 0..inner {
            let mut v = zero();
            for a in 0..n {
                for b in 0..n {
                    let gab = self.g_inv[a * n + b];
                    v -= gab * dw.data()[b * size + a * inner + off];
                }
            }
            out.data_mut()[off] = v;
        }
        Ok(WeightedForm {
            form: out,
            weight: w.weight - 2.0,
            gauge: w.gauge,
        })
    }

    /// `Δ^D ω = −g^{ab} (D D ω)_{ab…}`, of weight `k − 2`.
    pub fn laplacian(&self, w: &WeightedForm<Jet>) -> Result<WeightedForm<Jet>> {
        let p = w.degree();
        let n = self.dim();
        let dw = self.covariant(w)?;
        let ddw = covariant_derivative(&self.frame, &self.w, dw.data(), p + 1, Some((&self.theta, w.weight)));
        let size = n.pow(p as u32);
        let mut out = Tensor::zeros(n, 0, p);
        for off in 0..size {
            let mut v = zero();
            for a in 0..n {
                for b in 0..n {
                    v -= self.g_inv[a * n + b] * ddw[(a * n + b) * size + off];
                }
            }
            out.data_mut()[off] = v;
        }
        Ok(WeightedForm {
            form: out,
            weight: w.weight - 2.0,
            gauge: w.gauge,
        })
    }

    /// `𝒟^D α = δ^D α + d^D α` as its (0-form, 2-form) parts.
    pub fn dirac(&self, alpha: &WeightedForm<Jet>) -> Result<(WeightedForm<Jet>, WeightedForm<Jet>)> {
        if alpha.degree() != 1 {
            return Err(Error::Degree("the Dirac split is defined on 1-forms".into()));
        }
        Ok((self.delta(alpha)?, self.d(alpha)?))
    }

    /// `F^D = dθ_g` (order-1 jets).
    pub fn faraday(&self) -> Tensor<Jet> {
        let f = exterior_derivative_1form(&self.frame, &self.theta);
        Tensor::from_vec(self.dim(), 0, 2, f).expect("shape")
    }

    /// `D_Y X` for vector fields with frame components `x` and `y`.
    pub fn connect_vec(&self, x: &[Jet], y: &[Jet]) -> Vec<Jet> {
        let n = self.dim();
        let dx: Vec<Vec<Jet>> = x.iter().map(|c| self.frame.derive(c)).collect();
        (0..n)
            .map(|c| {
                let mut v = zero();
                for a in 0..n {
                    let mut inner = dx[c][a];
                    for b in 0..n {
                        inner += self.w[(c * n + a) * n + b] * x[b];
                    }
                    v += y[a] * inner;
                }
                v
            })
            .collect()
    }

    /// `R^d_abc` jets of `D` (order 0).
    pub fn curvature_jets(&self) -> Vec<Jet> {
        curvature(&self.frame, &self.w)
    }

    pub fn curvature(&self) -> CurvatureBundle {
        let n = self.dim();
        let r = geometry::values(&self.curvature_jets());
        let f = self.faraday().values();
        let g = &self.metric;
        let ri = |d: usize, a: usize, b: usize, c: usize| ((d * n + a) * n + b) * n + c;
        let mut anti = r.clone();
        for a in 0..n {
            for b in 0..n {
                let fab = f.data()[a * n + b];
                for c in 0..n {
                    anti[ri(c, a, b, c)] -= fab;
                }
            }
        }
        let mut ric = vec![0.0; n * n];
        let mut ric_local = vec![0.0; n * n];
        for b in 0..n {
            for c in 0..n {
                ric[b * n + c] = (0..n).map(|a| r[ri(a, a, b, c)]).sum();
                let mut v = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let gij = g.inv(i, j);
                        for d in 0..n {
                            v += gij * anti[ri(d, b, i, j)] * g.g(d, c);
                        }
                    }
                }
                ric_local[b * n + c] = v;
            }
        }
        let mut scal = 0.0;
        for b in 0..n {
            for c in 0..n {
                scal += g.inv(b, c) * ric[b * n + c];
            }
        }
        CurvatureBundle {
            rd: Tensor::from_vec(n, 1, 3, r).unwrap(),
            rd_antisym: Tensor::from_vec(n, 1, 3, anti).unwrap(),
            fd: f,
            ric: Tensor::from_vec(n, 0, 2, ric).unwrap(),
            ric_local: Tensor::from_vec(n, 0, 2, ric_local).unwrap(),
            scal,
        }
    }

    /// `g^{..}` contraction of two covariant tensors of the same rank.
    pub fn tensor_inner(&self, a: &[Jet], b: &[Jet], rank: usize) -> Jet {
        let n = self.dim();
        let mut cur = b.to_vec();
        let mut idx = vec![0usize; rank];
        for slot in 0..rank {
            let mut next = vec![zero(); cur.len()];
            for (off, out) in next.iter_mut().enumerate() {
                unravel(off, n, &mut idx);
                let i = idx[slot];
                let mut acc = zero();
                for j in 0..n {
                    idx[slot] = j;
                    acc += self.g_inv[i * n + j] * cur[crate::tensor::ravel(&idx, n)];
                }
                *out = acc;
            }
            cur = next;
        }
        a.iter().zip(&cur).fold(zero(), |acc, (&x, &y)| acc + x * y)
    }

    /// Conformal inner product of weighted forms of equal degree (in this gauge).
    pub fn form_inner(&self, a: &WeightedForm<Jet>, b: &WeightedForm<Jet>) -> Result<Jet> {
        self.check(a)?;
        self.check(b)?;
        if a.degree() != b.degree() {
            return Err(Error::Degree(format!(
                "inner product of a {}-form with a {}-form",
                a.degree(),
                b.degree()
            )));
        }
        let p = a.degree();
        let fact: f64 = (1..=p).map(|k| k as f64).product();
        Ok(self.tensor_inner(a.form.data(), b.form.data(), p).scale(1.0 / fact))
    }

    /// `α^♯` components.
    pub fn sharp(&self, alpha: &WeightedForm<Jet>) -> Vec<Jet> {
        self.raise(alpha.form.data())
    }
}

/// Contract the first slot of a tensor with a constant vector.
fn contract_first(t: &Tensor<Jet>, x: &[f64]) -> Tensor<Jet> {
    let n = t.dim();
    let rank = t.rank() - 1;
    let size = n.pow(rank as u32);
    let mut out = Tensor::zeros(n, 0, rank);
    for off in 0..size {
        let mut v = zero();
        for (a, &xa) in x.iter().enumerate() {
            if xa != 0.0 {
                v += t.data()[a * size + off] * xa;
            }
        }
        out.data_mut()[off] = v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ModelSpace;

    fn flat(lee: LeeSpec) -> WeylStructure {
        WeylStructure::new(ModelSpace::trivial(3, 1.0, 2.0).unwrap(), MetricSpec::FlatProduct, lee).unwrap()
    }

    #[test]
    fn constant_lee_form_on_flat_frame() {
        // θ = a dx¹: D_{∂2} ∂1 = θ(∂2)∂1 + θ(∂1)∂2 − g(∂1,∂2)θ♯ = a ∂2
        let a = 0.7;
        let ws = flat(LeeSpec::Constant { components: vec![a, 0.0, 0.0, 0.0] });
        let wp = ws.at(&[2.0, 0.3, -0.4, 0.1], &DerivativeEngine::dual()).unwrap();
        let x = vec![Jet::constant(1.0), zero(), zero(), zero()];
        let y = vec![zero(), Jet::constant(1.0), zero(), zero()];
        let v = geometry::values(&wp.connect_vec(&x, &y));
        assert_eq!(v, vec![0.0, a, 0.0, 0.0]);
    }

    #[test]
    fn linear_lee_faraday() {
        // θ = x₂ dx¹ → F_12 = ∂_1 θ_2 − ∂_2 θ_1 = −1
        let ws = flat(LeeSpec::Linear { coeff: 1.0, source: 1, target: 0 });
        let wp = ws.at(&[2.0, 0.3, -0.4, 0.1], &DerivativeEngine::dual()).unwrap();
        let f = wp.faraday().values();
        assert_eq!(f.get(&[0, 1]), -1.0);
        assert_eq!(f.get(&[1, 0]), 1.0);
        assert_eq!(f.max_abs(), 1.0);
    }

    #[test]
    fn flat_curvature_vanishes() {
        let ws = flat(LeeSpec::Zero);
        let wp = ws.at(&[1.5, 0.3, -0.4, 0.1], &DerivativeEngine::dual()).unwrap();
        let c = wp.curvature();
        assert_eq!(c.rd.max_abs(), 0.0);
        assert_eq!(c.scal, 0.0);
    }

    #[test]
    fn gauge_mismatch_is_refused() {
        let ws = flat(LeeSpec::Zero);
        let other = ws.gauge_change(&ScalarSpec::one_plus_decaying(1.0, 3)).unwrap();
        let de = DerivativeEngine::dual();
        let p = [1.5, 0.3, -0.4, 0.1];
        let a = ws.at(&p, &de).unwrap();
        let b = other.at(&p, &de).unwrap();
        let w = b.form(&FormSpec::basis(vec![0]), 1.0).unwrap();
        assert!(matches!(a.d(&w), Err(Error::GaugeMismatch { .. })));
    }

    #[test]
    fn laplacian_of_sine_form() {
        // Δ(sin x₂ dx¹) = sin x₂ dx¹ on the flat product
        let ws = flat(LeeSpec::Zero);
        let p = [1.5, 0.8, -0.4, 0.1];
        let wp = ws.at(&p, &DerivativeEngine::dual()).unwrap();
        let spec = FormSpec::Basis {
            indices: vec![0],
            factor: ScalarSpec::CoordinateWave { amp: 1.0, k: vec![0.0, 1.0, 0.0, 0.0], phase: -std::f64::consts::FRAC_PI_2 },
        };
        let a = wp.form(&spec, 0.0).unwrap();
        let lap = wp.laplacian(&a).unwrap().form.values();
        assert!((lap.data()[0] - p[1].sin()).abs() < 1e-14);
        assert!(lap.data()[1..].iter().all(|v| v.abs() < 1e-14));
        assert_eq!(wp.laplacian(&a).unwrap().weight, -2.0);
    }
}
