//! Tensor-product quadrature on spheres, fibers and annuli.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use gauss_quad::GaussJacobi;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::pairwise_sum;

/// Nodes and weights of a one-dimensional rule.
#[derive(Clone, Debug)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre rule with `n` nodes on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Rule1d> {
    let degree = NonZeroUsize::new(n).ok_or_else(|| Error::Config("quadrature needs at least one node".into()))?;
    let rule = GaussLegendre::new(degree);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let (nodes, weights) = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .unzip();
    Ok(Rule1d { nodes, weights })
}

/// Periodic trapezoid rule with `n` nodes on `[0, length)`.
pub fn trapezoid(n: usize, length: f64) -> Result<Rule1d> {
    if n == 0 {
        return Err(Error::Config("quadrature needs at least one node".into()));
    }
    let h = length / n as f64;
    Ok(Rule1d {
        nodes: (0..n).map(|k| k as f64 * h).collect(),
        weights: vec![h; n],
    })
}

/// `vol(S^{m-1})`.
pub fn sphere_volume(m: usize) -> f64 {
    match m {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 2.0) * sphere_volume(m - 2),
    }
}

/// Product rule on `S^{m-1}` in hyperspherical angles.
///
/// The polar angles use Gauss-Legendre in the angle with the `sin^k` Jacobian
/// folded into the weights; the azimuth uses `2·polar` trapezoid nodes. The
/// first polar angle is measured from the last axis, so the Hopf seam
/// (`x_3 → −r`) sits at the end of that angle's range and is never a node.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(m: usize, polar: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config("sphere rule needs m >= 2".into()));
        }
        let degree = NonZeroUsize::new(polar).ok_or_else(|| Error::Config("quadrature needs at least one node".into()))?;
        let phi = trapezoid(2 * polar, 2.0 * PI)?;
        let mut points = vec![Vec::new()];
        let mut weights = vec![1.0];
        let mut grids: Vec<Vec<f64>> = vec![Vec::new()];
        for level in 0..m - 1 {
            let rule = if level == m - 2 {
                phi.clone()
            } else {
                // sin^k φ dφ = (1 − u²)^{(k−1)/2} du with u = cos φ
                let e = 0.5 * (m as f64 - 3.0 - level as f64);
                let e = e.try_into().map_err(|_| Error::Config("bad Jacobi exponent".into()))?;
                let jac = GaussJacobi::new(degree, e, e);
                let (nodes, weights) = jac.as_node_weight_pairs().iter().map(|&(u, w)| (u.acos(), w)).unzip();
                Rule1d { nodes, weights }
            };
            let mut next_g = Vec::new();
            let mut next_w = Vec::new();
            for (g, w) in grids.iter().zip(&weights) {
                for (&a, &wa) in rule.nodes.iter().zip(&rule.weights) {
                    let mut ng = g.clone();
                    ng.push(a);
                    next_g.push(ng);
                    next_w.push(w * wa);
                }
            }
            grids = next_g;
            weights = next_w;
        }
        points.clear();
        for angles in &grids {
            let mut x = vec![0.0; m];
            let mut s = 1.0;
            for (level, &a) in angles.iter().enumerate() {
                if level == m - 2 {
                    x[1] = s * a.cos();
                    x[0] = s * a.sin();
                } else {
                    x[m - 1 - level] = s * a.cos();
                    s *= a.sin();
                }
            }
            points.push(x);
        }
        Ok(SphereRule { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Node counts for surface and annulus integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per polar angle (azimuth gets twice as many).
    pub polar: usize,
    /// Trapezoid nodes along the fiber; one node is used for fiber-invariant data.
    pub fiber: usize,
    /// Gauss-Legendre nodes in the radius (annulus integrals only).
    pub radial: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            polar: 16,
            fiber: 16,
            radial: 16,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.polar == 0 || self.fiber == 0 || self.radial == 0 {
            return Err(Error::Config("quadrature node counts must be positive".into()));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        QuadratureSpec {
            polar: self.polar * 2,
            fiber: self.fiber * 2,
            radial: self.radial * 2,
        }
    }
}

/// Points `(r·ω, t)` with weights `r^{m-1} dΩ dt` on the hypersurface `{|x| = r}`.
pub fn surface_nodes(
    m: usize,
    r: f64,
    fiber_length: f64,
    spec: &QuadratureSpec,
    fiber_invariant: bool,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let sphere = SphereRule::new(m, spec.polar)?;
    let fiber = trapezoid(if fiber_invariant { 1 } else { spec.fiber }, fiber_length)?;
    let area = r.powi(m as i32 - 1);
    let mut out = Vec::with_capacity(sphere.len() * fiber.nodes.len());
    for (w, ws) in sphere.points.iter().zip(&sphere.weights) {
        for (&t, &wt) in fiber.nodes.iter().zip(&fiber.weights) {
            let mut p: Vec<f64> = w.iter().map(|v| v * r).collect();
            p.push(t);
            out.push((p, ws * wt * area));
        }
    }
    Ok(out)
}

/// Points with weights `r^{m-1} dr dΩ dt` on the annulus `r1 ≤ |x| ≤ r2`.
pub fn annulus_nodes(
    m: usize,
    r1: f64,
    r2: f64,
    fiber_length: f64,
    spec: &QuadratureSpec,
    fiber_invariant: bool,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let radial = gauss_legendre(spec.radial, r1, r2)?;
    let mut out = Vec::new();
    for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
        for (p, w) in surface_nodes(m, r, fiber_length, spec, fiber_invariant)? {
            out.push((p, w * wr));
        }
    }
    Ok(out)
}

/// `Σ w_i f(p_i)` with a fixed pairwise summation order.
pub fn integrate(nodes: &[(Vec<f64>, f64)], f: impl Fn(&[f64]) -> Result<f64> + Sync) -> Result<f64> {
    use rayon::prelude::*;
    let terms: Vec<f64> = nodes
        .par_iter()
        .map(|(p, w)| f(p).map(|v| v * w))
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&terms))
}

/// Vector-valued version of [`integrate`].
pub fn integrate_vec(
    nodes: &[(Vec<f64>, f64)],
    len: usize,
    f: impl Fn(&[f64]) -> Result<Vec<f64>> + Sync,
) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let terms: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|(p, w)| f(p).map(|v| v.into_iter().map(|x| x * w).collect()))
        .collect::<Result<_>>()?;
    Ok((0..len)
        .map(|k| pairwise_sum(&terms.iter().map(|t| t[k]).collect::<Vec<_>>()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(4) - 2.0 * PI * PI).abs() < 1e-14);
        assert!((sphere_volume(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn sphere_rule_integrates_polynomials() {
        for m in 3..=5 {
            let rule = SphereRule::new(m, 10).unwrap();
            let area: f64 = rule.weights.iter().sum();
            assert!((area - sphere_volume(m)).abs() < 1e-12, "m={m}");
            for (p, _) in rule.points.iter().zip(&rule.weights) {
                let norm: f64 = p.iter().map(|v| v * v).sum();
                assert!((norm - 1.0).abs() < 1e-14);
            }
            // ∫ x_k² = ω/m for every axis
            for k in 0..m {
                let s: f64 = rule.points.iter().zip(&rule.weights).map(|(p, w)| p[k] * p[k] * w).sum();
                assert!((s - sphere_volume(m) / m as f64).abs() < 1e-12, "m={m} k={k} {s} {}", sphere_volume(m) / m as f64);
            }
            // ∫ x_0^2 x_{m-1}^2 = ω/(m(m+2))
            let s: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| p[0] * p[0] * p[m - 1] * p[m - 1] * w)
                .sum();
            assert!((s - sphere_volume(m) / (m * (m + 2)) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn annulus_volume() {
        let spec = QuadratureSpec { polar: 6, fiber: 3, radial: 4 };
        let nodes = annulus_nodes(3, 1.0, 2.0, 2.0, &spec, false).unwrap();
        let v = integrate(&nodes, |_| Ok(1.0)).unwrap();
        let exact = 4.0 * PI / 3.0 * 7.0 * 2.0;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_exact_degree() {
        let r = gauss_legendre(4, 0.0, 2.0).unwrap();
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| x.powi(7) * w).sum();
        assert!((s - 256.0 / 8.0).abs() < 1e-11);
    }
}
