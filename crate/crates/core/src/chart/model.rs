//! Circle-fibered model spaces over `ℝ^m ∖ B_R`.
//!
//! Points are `(x_1, …, x_m, t)` with `t ∈ [0, L)`. The working frame is
//! `e_i = ∂_i − A_i ∂_t`, `T = ∂_t`, dual to the `h`-orthonormal coframe
//! `(dx_1, …, dx_m, η)` with `η = dt + A`. Its only nonzero brackets are
//! `[e_i, e_j] = −F_ij T` where `F = dA`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fibration {
    Trivial,
    Hopf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub m: usize,
    pub radius: f64,
    pub fiber_length: f64,
    pub fibration: Fibration,
}

/// Minimum of `(r + x_3)/r` accepted on the Hopf chart (distance from the seam).
pub const HOPF_SEAM_MARGIN: f64 = 1e-6;

impl ModelSpace {
    pub fn trivial(m: usize, radius: f64, fiber_length: f64) -> Result<Self> {
        let s = ModelSpace {
            m,
            radius,
            fiber_length,
            fibration: Fibration::Trivial,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn hopf(radius: f64, fiber_length: f64) -> Result<Self> {
        let s = ModelSpace {
            m: 3,
            radius,
            fiber_length,
            fibration: Fibration::Hopf,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 3 || self.m + 1 > MAX_DIM {
            return Err(Error::Config(format!(
                "base dimension m = {} outside 3..={}",
                self.m,
                MAX_DIM - 1
            )));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Config(format!("excised radius {} must be > 0", self.radius)));
        }
        if !(self.fiber_length > 0.0 && self.fiber_length.is_finite()) {
            return Err(Error::Config(format!(
                "fiber length {} must be > 0",
                self.fiber_length
            )));
        }
        if self.fibration == Fibration::Hopf && self.m != 3 {
            return Err(Error::Config("the Hopf fibration needs m = 3".into()));
        }
        Ok(())
    }

    /// Total dimension `n = m + 1`.
    pub fn dim(&self) -> usize {
        self.m + 1
    }

    pub fn is_holonomic(&self) -> bool {
        self.fibration == Fibration::Trivial
    }

    pub fn base_radius(&self, p: &[f64]) -> f64 {
        p[..self.m].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        let r = self.base_radius(p);
        if r <= self.radius {
            return Err(Error::Domain(format!(
                "r = {r} is inside the excised ball of radius {}",
                self.radius
            )));
        }
        if self.fibration == Fibration::Hopf && (r + p[2]) / r < HOPF_SEAM_MARGIN {
            return Err(Error::Domain(format!(
                "point {p:?} lies on the chart seam of the Hopf fibration"
            )));
        }
        Ok(())
    }

    /// Monopole charge `c` with `F_ij = c ε_ijk x_k / r³` on the Hopf chart.
    pub fn hopf_charge(&self) -> f64 {
        -self.fiber_length / (4.0 * PI)
    }

    /// Components `A_i` of the connection form `η = dt + A_i dx^i`.
    pub fn connection(&self, x: &[Jet]) -> Vec<Jet> {
        match self.fibration {
            Fibration::Trivial => vec![Jet::constant(0.0); self.m],
            Fibration::Hopf => {
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                let c = self.hopf_charge();
                let s = (r * (r + x[2])).recip();
                vec![x[1] * s * (-c), x[0] * s * c, Jet::constant(0.0)]
            }
        }
    }

    /// `F_ij = ∂_i A_j − ∂_j A_i` in closed form, row-major `m × m`.
    pub fn base_curvature(&self, x: &[Jet]) -> Vec<Jet> {
        let m = self.m;
        let mut f = vec![Jet::constant(0.0); m * m];
        if self.fibration == Fibration::Hopf {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            let s = r2.powf(-1.5) * self.hopf_charge();
            for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                let v = x[k] * s;
                f[i * m + j] = v;
                f[j * m + i] = -v;
            }
        }
        f
    }

    /// Frame data at a point given as seeded coordinate jets.
    pub fn frame(&self, x: &[Jet]) -> Frame {
        let n = self.dim();
        let mut c = vec![Jet::constant(0.0); n * n * n];
        let holonomic = self.is_holonomic();
        if !holonomic {
            let f = self.base_curvature(x);
            for i in 0..self.m {
                for j in 0..self.m {
                    c[(i * n + j) * n + self.m] = -f[i * self.m + j];
                }
            }
        }
        Frame {
            n,
            m: self.m,
            a: self.connection(x),
            c,
            holonomic,
        }
    }

    /// Coordinate components `(b_1..b_m, b_t)` of a frame covector.
    pub fn covector_to_coordinates(&self, frame_comps: &[f64], p: &[f64]) -> Vec<f64> {
        let a = self.connection_values(p);
        let m = self.m;
        let mut out = frame_comps.to_vec();
        for i in 0..m {
            out[i] += frame_comps[m] * a[i];
        }
        out
    }

    pub fn connection_values(&self, p: &[f64]) -> Vec<f64> {
        let x: Vec<Jet> = p.iter().map(|&v| Jet::constant(v)).collect();
        self.connection(&x).iter().map(|j| j.value()).collect()
    }
}

/// Frame geometry at one point: connection components and structure constants.
#[derive(Clone, Debug)]
pub struct Frame {
    n: usize,
    m: usize,
    a: Vec<Jet>,
    c: Vec<Jet>,
    holonomic: bool,
}

impl Frame {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_holonomic(&self) -> bool {
        self.holonomic
    }

    /// `C_ab^c` with `[e_a, e_b] = C_ab^c e_c`.
    pub fn c(&self, a: usize, b: usize, c: usize) -> Jet {
        self.c[(a * self.n + b) * self.n + c]
    }

    pub fn structure(&self) -> &[Jet] {
        &self.c
    }

    /// `e_a φ` for every frame direction; lowers the jet order by one.
    pub fn derive(&self, phi: &Jet) -> Vec<Jet> {
        let m = self.m;
        let dt = phi.partial(m);
        let mut out = Vec::with_capacity(self.n);
        for i in 0..m {
            let d = phi.partial(i);
            out.push(if self.holonomic { d } else { d - self.a[i] * dt });
        }
        out.push(dt);
        out
    }

    /// `e_a φ` for a single direction.
    pub fn derive_along(&self, a: usize, phi: &Jet) -> Jet {
        let m = self.m;
        if a == m || self.holonomic {
            phi.partial(a)
        } else {
            phi.partial(a) - self.a[a] * phi.partial(m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::seed;

    #[test]
    fn rejects_points_in_ball_and_on_seam() {
        let s = ModelSpace::trivial(3, 1.0, 2.0).unwrap();
        assert!(matches!(s.check_point(&[0.5, 0.0, 0.0, 0.0]), Err(Error::Domain(_))));
        assert!(s.check_point(&[2.0, 0.0, 0.0, 0.3]).is_ok());
        let h = ModelSpace::hopf(1.0, 2.0).unwrap();
        assert!(matches!(h.check_point(&[0.0, 0.0, -3.0, 0.0]), Err(Error::Domain(_))));
        assert!(ModelSpace::trivial(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn hopf_curvature_is_curl_of_connection() {
        let s = ModelSpace::hopf(0.5, 3.0).unwrap();
        for p in [[1.0, 0.4, 0.3, 0.0], [-0.7, 1.3, -0.5, 1.0], [2.0, -1.0, 1.5, 0.2]] {
            let x = seed(&p);
            let a = s.connection(&x);
            let f = s.base_curvature(&x);
            for i in 0..3 {
                for j in 0..3 {
                    let curl = a[j].partial(i).value() - a[i].partial(j).value();
                    assert!((curl - f[i * 3 + j].value()).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn hopf_frame_brackets() {
        // [e_1, e_2] = −F_12 T; check on the function t via coordinates
        let s = ModelSpace::hopf(0.5, 2.0).unwrap();
        let p = [0.8, -0.3, 0.6, 0.1];
        let fr = s.frame(&seed(&p));
        let f = s.base_curvature(&seed(&p));
        assert!((fr.c(0, 1, 3).value() + f[1].value()).abs() < 1e-15);
        assert!(fr.c(0, 1, 2).value().abs() == 0.0);
    }
}
