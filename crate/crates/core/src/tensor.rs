//! Pointwise multilinear algebra in a fixed frame.
//!
//! Components are stored densely in row-major order, contravariant indices
//! first. Differential forms are fully antisymmetric covariant tensors and
//! use the determinant convention for the wedge product:
//! `(a ∧ b)(X_1..X_{p+q})` is the signed sum over (p, q)-shuffles with no
//! `1/(p! q!)` prefactor, so `dx^1 ∧ dx^2 (∂_1, ∂_2) = 1`. The induced inner
//! product on p-forms is `⟨a, b⟩ = (1/p!) a_I b^I`, which makes
//! `a ∧ ∗b = ⟨a, b⟩ vol` hold exactly.

use std::fmt;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Component type for tensors: plain reals or jets.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_f64(v: f64) -> Self;
    fn re(&self) -> f64;
    fn scale(self, c: f64) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

impl Scalar for Jet {
    fn zero() -> Self {
        Jet::constant(0.0)
    }
    fn from_f64(v: f64) -> Self {
        Jet::constant(v)
    }
    fn re(&self) -> f64 {
        self.value()
    }
    fn scale(self, c: f64) -> Self {
        Jet::scale(self, c)
    }
    fn sqrt(self) -> Self {
        Jet::sqrt(&self)
    }
    fn powf(self, p: f64) -> Self {
        Jet::powf(&self, p)
    }
}

/// Dense tensor of valence (contra, co) over a `dim`-dimensional frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    dim: usize,
    contra: usize,
    co: usize,
    data: Vec<T>,
}

/// Decompose a flat offset into a multi-index.
pub fn unravel(mut offset: usize, dim: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = offset % dim;
        offset /= dim;
    }
}

pub fn ravel(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Sign of the permutation sorting `idx`; zero when an entry repeats.
pub fn permutation_sign(idx: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..idx.len() {
        for j in (i + 1)..idx.len() {
            if idx[i] == idx[j] {
                return 0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn factorial(p: usize) -> f64 {
    (1..=p).map(|k| k as f64).product()
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(dim: usize, contra: usize, co: usize) -> Self {
        Tensor {
            dim,
            contra,
            co,
            data: vec![T::zero(); dim.pow((contra + co) as u32)],
        }
    }

    pub fn from_vec(dim: usize, contra: usize, co: usize, data: Vec<T>) -> Result<Self> {
        let expected = dim.pow((contra + co) as u32);
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(Tensor {
            dim,
            contra,
            co,
            data,
        })
    }

    pub fn scalar(dim: usize, v: T) -> Self {
        Tensor {
            dim,
            contra: 0,
            co: 0,
            data: vec![v],
        }
    }

    pub fn covector(comps: Vec<T>) -> Self {
        Tensor {
            dim: comps.len(),
            contra: 0,
            co: 1,
            data: comps,
        }
    }

    pub fn vector(comps: Vec<T>) -> Self {
        Tensor {
            dim: comps.len(),
            contra: 1,
            co: 0,
            data: comps,
        }
    }

    /// The coframe element `e^i` as a 1-form.
    pub fn basis_covector(dim: usize, i: usize) -> Self {
        let mut t = Tensor::zeros(dim, 0, 1);
        t.data[i] = T::from_f64(1.0);
        t
    }

    pub fn basis_vector(dim: usize, i: usize) -> Self {
        let mut t = Tensor::zeros(dim, 1, 0);
        t.data[i] = T::from_f64(1.0);
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn valence(&self) -> (usize, usize) {
        (self.contra, self.co)
    }

    pub fn rank(&self) -> usize {
        self.contra + self.co
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, idx: &[usize]) -> T {
        debug_assert_eq!(idx.len(), self.rank());
        self.data[ravel(idx, self.dim)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let o = ravel(idx, self.dim);
        self.data[o] = v;
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Tensor<U> {
        Tensor {
            dim: self.dim,
            contra: self.contra,
            co: self.co,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Real parts of every component.
    pub fn values(&self) -> Tensor<f64> {
        self.map(|x| x.re())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn mul_scalar(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.contra != other.contra || self.co != other.co {
            return Err(Error::Contract(format!(
                "shape mismatch: ({}, {}, {}) vs ({}, {}, {})",
                self.dim, self.contra, self.co, other.dim, other.contra, other.co
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = *a + *b;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(-1.0))
    }

    /// Largest componentwise absolute difference of the real parts.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "tensor shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.re() - b.re()).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.re().abs()).fold(0.0, f64::max)
    }

    /// Degree of a form; errors on anything with contravariant slots.
    pub fn form_degree(&self) -> Result<usize> {
        if self.contra != 0 {
            return Err(Error::Degree(format!(
                "expected a form, got valence ({}, {})",
                self.contra, self.co
            )));
        }
        Ok(self.co)
    }

    /// Maximum violation of full antisymmetry under adjacent transpositions.
    pub fn antisymmetry_defect(&self) -> f64 {
        let r = self.rank();
        if r < 2 {
            return 0.0;
        }
        let mut idx = vec![0usize; r];
        let mut worst: f64 = 0.0;
        for off in 0..self.data.len() {
            unravel(off, self.dim, &mut idx);
            for s in 0..r - 1 {
                idx.swap(s, s + 1);
                let other = self.data[ravel(&idx, self.dim)];
                idx.swap(s, s + 1);
                worst = worst.max((self.data[off].re() + other.re()).abs());
            }
        }
        worst
    }

    /// Project onto the antisymmetric part (average over all index permutations).
    pub fn antisymmetrize(&self) -> Self {
        let r = self.rank();
        if r < 2 {
            return self.clone();
        }
        let perms = permutations(r);
        let norm = 1.0 / perms.len() as f64;
        let mut out = Tensor::zeros(self.dim, self.contra, self.co);
        let mut idx = vec![0usize; r];
        let mut pidx = vec![0usize; r];
        for off in 0..self.data.len() {
            unravel(off, self.dim, &mut idx);
            let mut acc = T::zero();
            for (perm, sign) in &perms {
                for (k, &p) in perm.iter().enumerate() {
                    pidx[k] = idx[p];
                }
                acc = acc + self.data[ravel(&pidx, self.dim)].scale(*sign as f64);
            }
            out.data[off] = acc.scale(norm);
        }
        out
    }
}

/// All permutations of `0..r` with their signs.
pub fn permutations(r: usize) -> Vec<(Vec<usize>, i32)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i32)>) {
        let r = used.len();
        if cur.len() == r {
            out.push((cur.clone(), permutation_sign(cur)));
            return;
        }
        for i in 0..r {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; r], &mut out);
    out
}

/// Increasing `k`-subsets of `0..n`.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// A metric at one point in the working frame.
#[derive(Clone, Debug)]
pub struct PointMetric<T> {
    dim: usize,
    g: Vec<T>,
    g_inv: Vec<T>,
    det: T,
    orientation: i8,
}

impl<T: Scalar> PointMetric<T> {
    /// Build from a row-major `dim × dim` component matrix.
    pub fn new(dim: usize, g: Vec<T>) -> Result<Self> {
        if g.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: g.len(),
            });
        }
        let scale = g.iter().map(|x| x.re().abs()).fold(0.0, f64::max).max(1.0);
        for i in 0..dim {
            for j in 0..i {
                if (g[i * dim + j].re() - g[j * dim + i].re()).abs() > 1e-12 * scale {
                    return Err(Error::SingularMetric(format!(
                        "not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let (g_inv, det) = invert(dim, &g)?;
        if !(det.re() > 0.0) {
            return Err(Error::SingularMetric(format!(
                "determinant {} is not positive",
                det.re()
            )));
        }
        Ok(PointMetric {
            dim,
            g,
            g_inv,
            det,
            orientation: 1,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut g = vec![T::zero(); dim * dim];
        for i in 0..dim {
            g[i * dim + i] = T::from_f64(1.0);
        }
        PointMetric {
            dim,
            g: g.clone(),
            g_inv: g,
            det: T::from_f64(1.0),
            orientation: 1,
        }
    }

    pub fn diagonal(diag: &[T]) -> Result<Self> {
        let dim = diag.len();
        let mut g = vec![T::zero(); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            g[i * dim + i] = d;
        }
        PointMetric::new(dim, g)
    }

    pub fn with_orientation(mut self, orientation: i8) -> Self {
        self.orientation = if orientation < 0 { -1 } else { 1 };
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn g(&self, i: usize, j: usize) -> T {
        self.g[i * self.dim + j]
    }

    pub fn inv(&self, i: usize, j: usize) -> T {
        self.g_inv[i * self.dim + j]
    }

    pub fn components(&self) -> &[T] {
        &self.g
    }

    pub fn inverse_components(&self) -> &[T] {
        &self.g_inv
    }

    pub fn det(&self) -> T {
        self.det
    }

    pub fn sqrt_det(&self) -> T {
        self.det.sqrt()
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    /// Real-valued copy.
    pub fn values(&self) -> PointMetric<f64> {
        PointMetric {
            dim: self.dim,
            g: self.g.iter().map(|x| x.re()).collect(),
            g_inv: self.g_inv.iter().map(|x| x.re()).collect(),
            det: self.det.re(),
            orientation: self.orientation,
        }
    }

    fn check_dim(&self, t: &Tensor<T>) -> Result<()> {
        if t.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: t.dim(),
            });
        }
        Ok(())
    }

    /// Raise every index of a covariant tensor (the result keeps the
    /// covariant storage layout but holds `T^{i1..ip}`).
    pub fn raise_all(&self, t: &Tensor<T>) -> Tensor<T> {
        let n = self.dim;
        let r = t.rank();
        let mut cur = t.clone();
        let mut idx = vec![0usize; r];
        for slot in 0..r {
            let mut next = Tensor::zeros(n, t.contra, t.co);
            for off in 0..next.data.len() {
                unravel(off, n, &mut idx);
                let i = idx[slot];
                let mut acc = T::zero();
                for j in 0..n {
                    idx[slot] = j;
                    acc = acc + self.inv(i, j) * cur.data[ravel(&idx, n)];
                }
                next.data[off] = acc;
            }
            cur = next;
        }
        cur
    }
}

/// Gauss–Jordan inverse with partial pivoting; returns (inverse, determinant).
pub fn invert<T: Scalar>(n: usize, m: &[T]) -> Result<(Vec<T>, T)> {
    let mut a = m.to_vec();
    let mut inv = vec![T::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = T::from_f64(1.0);
    }
    let mut det = T::from_f64(1.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| {
                a[x * n + col]
                    .re()
                    .abs()
                    .total_cmp(&a[y * n + col].re().abs())
            })
            .unwrap();
        let pv = a[pivot * n + col];
        if pv.re().abs() < 1e-300 || !pv.re().is_finite() {
            return Err(Error::SingularMetric("matrix is singular".into()));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        det = det * pv;
        let pinv = T::from_f64(1.0) / pv;
        for k in 0..n {
            a[col * n + k] = a[col * n + k] * pinv;
            inv[col * n + k] = inv[col * n + k] * pinv;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row * n + col];
            for k in 0..n {
                a[row * n + k] = a[row * n + k] - factor * a[col * n + k];
                inv[row * n + k] = inv[row * n + k] - factor * inv[col * n + k];
            }
        }
    }
    Ok((inv, det))
}

/// `♯`: covector to vector.
pub fn sharp<T: Scalar>(alpha: &Tensor<T>, g: &PointMetric<T>) -> Result<Tensor<T>> {
    if alpha.valence() != (0, 1) {
        return Err(Error::Contract("sharp expects a covector".into()));
    }
    g.check_dim(alpha)?;
    let n = g.dim();
    let comps = (0..n)
        .map(|i| {
            (0..n).fold(T::zero(), |acc, j| acc + g.inv(i, j) * alpha.data()[j])
        })
        .collect();
    Ok(Tensor::vector(comps))
}

/// `♭`: vector to covector.
pub fn flat<T: Scalar>(v: &Tensor<T>, g: &PointMetric<T>) -> Result<Tensor<T>> {
    if v.valence() != (1, 0) {
        return Err(Error::Contract("flat expects a vector".into()));
    }
    g.check_dim(v)?;
    let n = g.dim();
    let comps = (0..n)
        .map(|i| (0..n).fold(T::zero(), |acc, j| acc + g.g(i, j) * v.data()[j]))
        .collect();
    Ok(Tensor::covector(comps))
}

/// Wedge product of plain forms (determinant convention).
pub fn wedge_forms<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let p = a.form_degree()?;
    let q = b.form_degree()?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let n = a.dim();
    if p + q > n {
        return Ok(Tensor::zeros(n, 0, p + q));
    }
    let shuffles: Vec<(Vec<usize>, Vec<usize>, f64)> = combinations(p + q, p)
        .into_iter()
        .map(|s| {
            let rest: Vec<usize> = (0..p + q).filter(|i| !s.contains(i)).collect();
            let mut perm = s.clone();
            perm.extend(&rest);
            let sign = permutation_sign(&perm) as f64;
            (s, rest, sign)
        })
        .collect();
    let mut out = Tensor::zeros(n, 0, p + q);
    let mut idx = vec![0usize; p + q];
    let mut ia = vec![0usize; p];
    let mut ib = vec![0usize; q];
    for off in 0..out.data.len() {
        unravel(off, n, &mut idx);
        if permutation_sign(&idx) == 0 {
            continue;
        }
        let mut acc = T::zero();
        for (s, rest, sign) in &shuffles {
            for (k, &pos) in s.iter().enumerate() {
                ia[k] = idx[pos];
            }
            for (k, &pos) in rest.iter().enumerate() {
                ib[k] = idx[pos];
            }
            acc = acc + (a.data[ravel(&ia, n)] * b.data[ravel(&ib, n)]).scale(*sign);
        }
        out.data[off] = acc;
    }
    Ok(out)
}

/// Interior product `X ⨼ w` of a vector with a plain form.
pub fn interior_forms<T: Scalar>(x: &Tensor<T>, w: &Tensor<T>) -> Result<Tensor<T>> {
    if x.valence() != (1, 0) {
        return Err(Error::Contract("interior product expects a vector".into()));
    }
    let p = w.form_degree()?;
    if p == 0 {
        return Err(Error::Degree("interior product of a 0-form".into()));
    }
    if x.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            got: x.dim(),
        });
    }
    let n = w.dim();
    let block = n.pow((p - 1) as u32);
    let mut out = Tensor::zeros(n, 0, p - 1);
    for (off, slot) in out.data.iter_mut().enumerate() {
        let mut acc = T::zero();
        for j in 0..n {
            acc = acc + x.data[j] * w.data[j * block + off];
        }
        *slot = acc;
    }
    Ok(out)
}

/// Hodge star of a plain p-form.
pub fn hodge_star<T: Scalar>(w: &Tensor<T>, g: &PointMetric<T>) -> Result<Tensor<T>> {
    let p = w.form_degree()?;
    g.check_dim(w)?;
    let n = g.dim();
    if p > n {
        return Err(Error::Degree(format!("degree {p} exceeds dimension {n}")));
    }
    let raised = g.raise_all(w);
    let pref = g.sqrt_det().scale(g.orientation() as f64);
    let mut out = Tensor::zeros(n, 0, n - p);
    let mut jdx = vec![0usize; n - p];
    for off in 0..out.data.len() {
        unravel(off, n, &mut jdx);
        if permutation_sign(&jdx) == 0 {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|i| !jdx.contains(i)).collect();
        let mut full = comp.clone();
        full.extend(&jdx);
        let sign = permutation_sign(&full) as f64;
        out.data[off] = (raised.data[ravel(&comp, n)] * pref).scale(sign);
    }
    Ok(out)
}

/// The metric volume form `√det g e^1 ∧ … ∧ e^n` (times orientation).
pub fn volume_form<T: Scalar>(g: &PointMetric<T>) -> Tensor<T> {
    hodge_star(&Tensor::scalar(g.dim(), T::from_f64(1.0)), g).expect("0-form star")
}

/// Inner product of two plain forms of the same degree.
pub fn form_inner_forms<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>, g: &PointMetric<T>) -> Result<T> {
    let p = a.form_degree()?;
    let q = b.form_degree()?;
    if p != q {
        return Err(Error::Degree(format!(
            "inner product of a {p}-form with a {q}-form"
        )));
    }
    g.check_dim(a)?;
    g.check_dim(b)?;
    let raised = g.raise_all(b);
    let acc = a
        .data
        .iter()
        .zip(&raised.data)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    Ok(acc.scale(1.0 / factorial(p)))
}

/// Identifies the metric used to trivialize the density bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaugeId(pub u64);

impl fmt::Display for GaugeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gauge#{:016x}", self.0)
    }
}

/// A p-form of conformal weight k, with components in a fixed gauge.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedForm<T> {
    pub form: Tensor<T>,
    pub weight: f64,
    pub gauge: GaugeId,
}

impl<T: Scalar> WeightedForm<T> {
    pub fn new(form: Tensor<T>, weight: f64, gauge: GaugeId) -> Result<Self> {
        let p = form.form_degree()?;
        if p > form.dim() {
            return Err(Error::Degree(format!(
                "degree {p} exceeds dimension {}",
                form.dim()
            )));
        }
        Ok(WeightedForm {
            form,
            weight,
            gauge,
        })
    }

    pub fn degree(&self) -> usize {
        self.form.rank()
    }

    fn same_gauge(&self, other: &Self) -> Result<()> {
        if self.gauge != other.gauge {
            return Err(Error::GaugeMismatch {
                left: self.gauge.to_string(),
                right: other.gauge.to_string(),
            });
        }
        Ok(())
    }

    /// Components of the same section in the gauge `f·g`: multiplied by `f^{k/2}`.
    pub fn regauge(&self, factor: T, new_gauge: GaugeId) -> Self {
        WeightedForm {
            form: self.form.mul_scalar(factor.powf(self.weight / 2.0)),
            weight: self.weight,
            gauge: new_gauge,
        }
    }

    pub fn values(&self) -> WeightedForm<f64> {
        WeightedForm {
            form: self.form.values(),
            weight: self.weight,
            gauge: self.gauge,
        }
    }
}

/// Wedge product of weighted forms; weights add.
pub fn wedge<T: Scalar>(a: &WeightedForm<T>, b: &WeightedForm<T>) -> Result<WeightedForm<T>> {
    a.same_gauge(b)?;
    Ok(WeightedForm {
        form: wedge_forms(&a.form, &b.form)?,
        weight: a.weight + b.weight,
        gauge: a.gauge,
    })
}

/// Interior product with a vector; the weight is unchanged.
pub fn interior<T: Scalar>(x: &Tensor<T>, w: &WeightedForm<T>) -> Result<WeightedForm<T>> {
    Ok(WeightedForm {
        form: interior_forms(x, &w.form)?,
        weight: w.weight,
        gauge: w.gauge,
    })
}

/// Conformal inner product evaluated in the common gauge.
pub fn form_inner<T: Scalar>(
    a: &WeightedForm<T>,
    b: &WeightedForm<T>,
    g: &PointMetric<T>,
) -> Result<T> {
    a.same_gauge(b)?;
    form_inner_forms(&a.form, &b.form, g)
}
