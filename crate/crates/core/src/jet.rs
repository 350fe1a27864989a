//! Second-order truncated Taylor jets.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to the chart coordinates. Arithmetic propagates all three exactly
//! (forward-mode automatic differentiation). Each jet also tracks how many
//! derivative orders it still holds: seeded coordinates and analytic
//! expressions are order 2, [`Jet::partial`] lowers the order by one. This
//! lets differential operators be composed pointwise: an operator that
//! differentiates its input once returns order-1 jets, which can be
//! differentiated once more.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Largest supported number of chart coordinates (m + 1 with m <= 5).
pub const MAX_DIM: usize = 6;

#[derive(Clone, Copy, PartialEq)]
pub struct Jet {
    order: u8,
    n: u8,
    value: f64,
    grad: [f64; MAX_DIM],
    hess: [f64; MAX_DIM * MAX_DIM],
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n as usize;
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("value", &self.value)
            .field("grad", &&self.grad[..n])
            .finish()
    }
}

impl Default for Jet {
    fn default() -> Self {
        Jet::constant(0.0)
    }
}

#[inline]
fn hidx(i: usize, j: usize) -> usize {
    i * MAX_DIM + j
}

impl Jet {
    /// A constant: all derivatives vanish exactly.
    pub fn constant(value: f64) -> Self {
        Jet {
            order: 2,
            n: 0,
            value,
            grad: [0.0; MAX_DIM],
            hess: [0.0; MAX_DIM * MAX_DIM],
        }
    }

    /// The coordinate function `x_index` evaluated at `value` in an `n`-dimensional chart.
    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        assert!(n <= MAX_DIM && index < n, "jet dimension out of range");
        let mut j = Jet::constant(value);
        j.n = n as u8;
        j.grad[index] = 1.0;
        j
    }

    /// Assemble a jet from known value, gradient and (symmetric) Hessian.
    pub fn from_parts(value: f64, grad: &[f64], hess: &[f64]) -> Self {
        let n = grad.len();
        assert!(n <= MAX_DIM && hess.len() == n * n);
        let mut j = Jet::constant(value);
        j.n = n as u8;
        j.grad[..n].copy_from_slice(grad);
        for a in 0..n {
            for b in 0..n {
                j.hess[hidx(a, b)] = hess[a * n + b];
            }
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad[..self.n as usize]
    }

    /// Entry of the Hessian; zero beyond the jet's dimension.
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[hidx(i, j)]
    }

    /// Derivative along the coordinate `index`, one order lower.
    ///
    /// Panics when the jet carries no derivative information (order 0);
    /// that is an operator-composition bug, not a data error.
    pub fn partial(&self, index: usize) -> Jet {
        assert!(
            self.order > 0,
            "differentiating an order-0 jet: operator composition exceeds two derivatives"
        );
        let n = self.n as usize;
        let mut out = Jet::constant(if index < n { self.grad[index] } else { 0.0 });
        out.order = self.order - 1;
        out.n = self.n;
        if out.order > 0 && index < n {
            for j in 0..n {
                out.grad[j] = self.hess[hidx(index, j)];
            }
        }
        out
    }

    /// Drop derivative information down to `order`.
    pub fn truncate(mut self, order: u8) -> Jet {
        if order < self.order {
            self.order = order;
            let n = self.n as usize;
            if order < 2 {
                for a in 0..n {
                    for b in 0..n {
                        self.hess[hidx(a, b)] = 0.0;
                    }
                }
            }
            if order < 1 {
                self.grad[..n].fill(0.0);
            }
        }
        self
    }

    /// Apply a scalar function given its value and first two derivatives at `self.value`.
    #[inline]
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        let n = self.n as usize;
        let mut out = *self;
        out.value = f0;
        if self.order >= 2 {
            for a in 0..n {
                for b in 0..n {
                    out.hess[hidx(a, b)] =
                        f1 * self.hess[hidx(a, b)] + f2 * self.grad[a] * self.grad[b];
                }
            }
        }
        if self.order >= 1 {
            for a in 0..n {
                out.grad[a] = f1 * self.grad[a];
            }
        }
        out
    }

    pub fn scale(mut self, c: f64) -> Jet {
        let n = self.n as usize;
        self.value *= c;
        for g in &mut self.grad[..n] {
            *g *= c;
        }
        if self.order >= 2 {
            for a in 0..n {
                for b in 0..n {
                    self.hess[hidx(a, b)] *= c;
                }
            }
        }
        self
    }

    pub fn recip(&self) -> Jet {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn powf(&self, p: f64) -> Jet {
        let v = self.value;
        self.chain(
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
        )
    }

    pub fn powi(&self, p: i32) -> Jet {
        let v = self.value;
        let pf = p as f64;
        self.chain(
            v.powi(p),
            pf * v.powi(p - 1),
            pf * (pf - 1.0) * v.powi(p - 2),
        )
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn square(&self) -> Jet {
        *self * *self
    }

    fn combine_meta(a: &Jet, b: &Jet) -> (u8, u8) {
        (a.order.min(b.order), a.n.max(b.n))
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, rhs: Jet) -> Jet {
        let (order, n) = Jet::combine_meta(&self, &rhs);
        let nu = n as usize;
        let mut out = self.truncate(order);
        out.n = n;
        out.value += rhs.value;
        if order >= 1 {
            for a in 0..nu {
                out.grad[a] += rhs.grad[a];
            }
        }
        if order >= 2 {
            for a in 0..nu {
                for b in 0..nu {
                    out.hess[hidx(a, b)] += rhs.hess[hidx(a, b)];
                }
            }
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, rhs: Jet) -> Jet {
        let (order, n) = Jet::combine_meta(&self, &rhs);
        let nu = n as usize;
        let mut out = Jet::constant(self.value * rhs.value);
        out.order = order;
        out.n = n;
        if order >= 1 {
            for a in 0..nu {
                out.grad[a] = self.value * rhs.grad[a] + rhs.value * self.grad[a];
            }
        }
        if order >= 2 {
            for a in 0..nu {
                for b in 0..nu {
                    out.hess[hidx(a, b)] = self.value * rhs.hess[hidx(a, b)]
                        + rhs.value * self.hess[hidx(a, b)]
                        + self.grad[a] * rhs.grad[b]
                        + rhs.grad[a] * self.grad[b];
                }
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.value -= rhs;
        self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

/// Seed the coordinates of a point as order-2 jets.
pub fn seed(point: &[f64]) -> Vec<Jet> {
    let n = point.len();
    point
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(v, i, n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn product_rule_second_order() {
        // f = x^2 y at (2, 3): grad = (2xy, x^2) = (12, 4), hess = [[2y, 2x],[2x, 0]]
        let x = seed(&[2.0, 3.0]);
        let f = x[0] * x[0] * x[1];
        assert_abs_diff_eq!(f.value(), 12.0);
        assert_abs_diff_eq!(f.grad()[0], 12.0);
        assert_abs_diff_eq!(f.grad()[1], 4.0);
        assert_abs_diff_eq!(f.hess(0, 0), 6.0);
        assert_abs_diff_eq!(f.hess(0, 1), 4.0);
        assert_abs_diff_eq!(f.hess(1, 0), 4.0);
        assert_abs_diff_eq!(f.hess(1, 1), 0.0);
    }

    #[test]
    fn chain_rule_against_closed_form() {
        // f = sin(x) exp(y) / sqrt(x^2 + y^2)
        let p = [0.7, -0.4];
        let x = seed(&p);
        let f = x[0].sin() * x[1].exp() / (x[0] * x[0] + x[1] * x[1]).sqrt();
        let h = 1e-5;
        let eval = |a: f64, b: f64| a.sin() * b.exp() / (a * a + b * b).sqrt();
        let fx = (eval(p[0] + h, p[1]) - eval(p[0] - h, p[1])) / (2.0 * h);
        let fxy = (eval(p[0] + h, p[1] + h) - eval(p[0] + h, p[1] - h) - eval(p[0] - h, p[1] + h)
            + eval(p[0] - h, p[1] - h))
            / (4.0 * h * h);
        assert_abs_diff_eq!(f.grad()[0], fx, epsilon = 1e-8);
        assert_abs_diff_eq!(f.hess(0, 1), fxy, epsilon = 1e-5);
    }

    #[test]
    fn partial_lowers_order() {
        let x = seed(&[1.5, 2.0]);
        let f = x[0].powi(3) * x[1];
        let fx = f.partial(0);
        assert_eq!(fx.order(), 1);
        assert_abs_diff_eq!(fx.value(), 3.0 * 1.5 * 1.5 * 2.0);
        let fxx = fx.partial(0);
        assert_eq!(fxx.order(), 0);
        assert_abs_diff_eq!(fxx.value(), 6.0 * 1.5 * 2.0);
        let mixed = fx.partial(1);
        assert_abs_diff_eq!(mixed.value(), 3.0 * 1.5 * 1.5);
    }

    #[test]
    #[should_panic(expected = "order-0")]
    fn third_derivative_is_refused() {
        let x = seed(&[1.0]);
        let _ = x[0].partial(0).partial(0).partial(0);
    }

    #[test]
    fn order_is_min_of_operands() {
        let x = seed(&[1.0, 2.0]);
        let a = x[0].partial(0);
        let b = x[1] * x[1];
        assert_eq!((a * b).order(), 1);
        assert_eq!((a + b).order(), 1);
        assert_eq!((b * Jet::constant(2.0)).order(), 2);
    }
}
