//! Derivative engine: exact jets or finite-difference jets of a field.

use serde::{Deserialize, Serialize};

use crate::jet::{seed, Jet, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivMode {
    Dual,
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEngine {
    pub mode: DerivMode,
    /// First-derivative step is `max(rel_step · r, min_step)`.
    pub rel_step: f64,
    pub min_step: f64,
    /// Second derivatives use a step this many times larger.
    pub hessian_factor: f64,
    /// Number of step halvings combined by Richardson extrapolation.
    pub richardson_levels: usize,
}

impl Default for DerivativeEngine {
    fn default() -> Self {
        DerivativeEngine::dual()
    }
}

impl DerivativeEngine {
    pub fn dual() -> Self {
        DerivativeEngine {
            mode: DerivMode::Dual,
            rel_step: 1e-4,
            min_step: 1e-5,
            hessian_factor: 10.0,
            richardson_levels: 2,
        }
    }

    pub fn finite_difference() -> Self {
        DerivativeEngine {
            mode: DerivMode::FiniteDifference,
            ..DerivativeEngine::dual()
        }
    }

    pub fn with_mode(mode: DerivMode) -> Self {
        DerivativeEngine {
            mode,
            ..DerivativeEngine::dual()
        }
    }

    /// Base step at a point whose base coordinates are the first `m` entries.
    pub fn step(&self, p: &[f64], m: usize) -> f64 {
        let r = p[..m.min(p.len())].iter().map(|v| v * v).sum::<f64>().sqrt();
        (self.rel_step * r).max(self.min_step)
    }

    /// Second-order jets of every output component of `f` at `p`.
    pub fn jets<F>(&self, f: F, p: &[f64], m: usize) -> Vec<Jet>
    where
        F: Fn(&[Jet]) -> Vec<Jet>,
    {
        match self.mode {
            DerivMode::Dual => f(&seed(p)),
            DerivMode::FiniteDifference => self.fd_jets(&f, p, m),
        }
    }

    fn fd_jets<F>(&self, f: &F, p: &[f64], m: usize) -> Vec<Jet>
    where
        F: Fn(&[Jet]) -> Vec<Jet>,
    {
        let n = p.len();
        assert!(n <= MAX_DIM);
        let eval = |q: &[f64]| -> Vec<f64> {
            let x: Vec<Jet> = q.iter().map(|&v| Jet::constant(v)).collect();
            f(&x).iter().map(|j| j.value()).collect()
        };
        let f0 = eval(p);
        let k = f0.len();
        let h0 = self.step(p, m);
        let big = h0 * self.hessian_factor;
        let levels = self.richardson_levels.max(1);

        let shifted = |moves: &[(usize, f64)]| {
            let mut q = p.to_vec();
            for &(i, d) in moves {
                q[i] += d;
            }
            eval(&q)
        };

        let mut grad = vec![vec![0.0; n]; k];
        let mut hess = vec![vec![0.0; n * n]; k];
        for i in 0..n {
            let est: Vec<Vec<f64>> = (0..levels)
                .map(|l| {
                    let h = h0 / f64::powi(2.0, l as i32);
                    let a = shifted(&[(i, h)]);
                    let b = shifted(&[(i, -h)]);
                    (0..k).map(|c| (a[c] - b[c]) / (2.0 * h)).collect()
                })
                .collect();
            let g = richardson(&est);
            for c in 0..k {
                grad[c][i] = g[c];
            }
            for j in i..n {
                let est: Vec<Vec<f64>> = (0..levels)
                    .map(|l| {
                        let h = big / f64::powi(2.0, l as i32);
                        if i == j {
                            let a = shifted(&[(i, h)]);
                            let b = shifted(&[(i, -h)]);
                            (0..k).map(|c| (a[c] - 2.0 * f0[c] + b[c]) / (h * h)).collect()
                        } else {
                            let pp = shifted(&[(i, h), (j, h)]);
                            let pm = shifted(&[(i, h), (j, -h)]);
                            let mp = shifted(&[(i, -h), (j, h)]);
                            let mm = shifted(&[(i, -h), (j, -h)]);
                            (0..k)
                                .map(|c| (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * h * h))
                                .collect()
                        }
                    })
                    .collect();
                let hv = richardson(&est);
                for c in 0..k {
                    hess[c][i * n + j] = hv[c];
                    hess[c][j * n + i] = hv[c];
                }
            }
        }
        (0..k)
            .map(|c| Jet::from_parts(f0[c], &grad[c], &hess[c]))
            .collect()
    }
}

/// Richardson extrapolation of central-difference estimates at halving steps
/// (error expansion in even powers of the step).
fn richardson(est: &[Vec<f64>]) -> Vec<f64> {
    let mut table: Vec<Vec<f64>> = est.to_vec();
    let levels = table.len();
    for l in 1..levels {
        let factor = f64::powi(4.0, l as i32);
        for j in (l..levels).rev() {
            let next: Vec<f64> = table[j]
                .iter()
                .zip(&table[j - 1])
                .map(|(a, b)| a + (a - b) / (factor - 1.0))
                .collect();
            table[j] = next;
        }
    }
    table.pop().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(x: &[Jet]) -> Vec<Jet> {
        vec![
            x[0] * x[0] * x[1] * 3.0 - x[2] * x[2] * x[2] + x[0] * x[3] * 2.0 + 1.5,
            x[1] * x[1] * x[1] * 0.5 + x[0] * x[1] * x[2],
        ]
    }

    #[test]
    fn fd_is_exact_on_cubics() {
        let p = [1.3, -0.7, 2.1, 0.4];
        let dual = DerivativeEngine::dual().jets(cubic, &p, 3);
        let fd = DerivativeEngine::finite_difference().jets(cubic, &p, 3);
        for (a, b) in dual.iter().zip(&fd) {
            for i in 0..4 {
                assert!((a.grad()[i] - b.grad()[i]).abs() < 1e-9);
                for j in 0..4 {
                    assert!((a.hess(i, j) - b.hess(i, j)).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn dual_matches_closed_form() {
        // f = x0^2 x1 at (2, 3, ...): ∂0 = 12, ∂0∂0 = 6
        let f = |x: &[Jet]| vec![x[0] * x[0] * x[1]];
        let j = DerivativeEngine::dual().jets(f, &[2.0, 3.0, 0.0, 0.0], 3);
        assert!((j[0].grad()[0] - 12.0).abs() < 1e-13);
        assert!((j[0].hess(0, 0) - 6.0).abs() < 1e-13);
    }

    #[test]
    fn fd_on_smooth_field() {
        let f = |x: &[Jet]| vec![(x[0] * x[1]).sin() * x[2].exp() + x[3].cos()];
        let p = [0.7, 1.1, -0.3, 0.9];
        let a = DerivativeEngine::dual().jets(f, &p, 3);
        let b = DerivativeEngine::finite_difference().jets(f, &p, 3);
        for i in 0..4 {
            assert!((a[0].grad()[i] - b[0].grad()[i]).abs() < 1e-9);
            for k in 0..4 {
                assert!((a[0].hess(i, k) - b[0].hess(i, k)).abs() < 1e-7);
            }
        }
    }
}
