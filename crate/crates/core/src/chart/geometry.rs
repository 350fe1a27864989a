//! Connection and curvature calculus in a (possibly anholonomic) frame.
//!
//! Connection coefficients are stored as `Γ^c_ab` at offset `(c·n + a)·n + b`
//! with `∇_{e_a} e_b = Γ^c_ab e_c`; curvature as `R^d_abc` at
//! `((d·n + a)·n + b)·n + c` with `R(e_a, e_b) e_c = R^d_abc e_d`.

use crate::chart::model::Frame;
use crate::error::Result;
use crate::jet::Jet;
use crate::tensor::{invert, ravel, unravel};

fn zero() -> Jet {
    Jet::constant(0.0)
}

/// Inverse and determinant of a row-major jet matrix.
pub fn inverse(n: usize, g: &[Jet]) -> Result<(Vec<Jet>, Jet)> {
    invert(n, g)
}

/// Levi-Civita coefficients from the Koszul formula in the frame.
pub fn levi_civita(frame: &Frame, g: &[Jet], g_inv: &[Jet]) -> Vec<Jet> {
    let n = frame.dim();
    // dg[a][b*n+d] = e_a g_bd
    let mut dg = vec![vec![zero(); n * n]; n];
    for b in 0..n {
        for d in b..n {
            let e = frame.derive(&g[b * n + d]);
            for a in 0..n {
                dg[a][b * n + d] = e[a];
                dg[a][d * n + b] = e[a];
            }
        }
    }
    // lowered Γ_abd = g(∇_a e_b, e_d)
    let mut low = vec![zero(); n * n * n];
    let holo = frame.is_holonomic();
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                let mut v = dg[a][b * n + d] + dg[b][a * n + d] - dg[d][a * n + b];
                if !holo {
                    for f in 0..n {
                        v += frame.c(a, b, f) * g[f * n + d]
                            - frame.c(a, d, f) * g[f * n + b]
                            - frame.c(b, d, f) * g[f * n + a];
                    }
                }
                low[(a * n + b) * n + d] = v * 0.5;
            }
        }
    }
    let mut gamma = vec![zero(); n * n * n];
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut v = zero();
                for d in 0..n {
                    v += g_inv[c * n + d] * low[(a * n + b) * n + d];
                }
                gamma[(c * n + a) * n + b] = v;
            }
        }
    }
    gamma
}

/// Curvature of a frame connection.
pub fn curvature(frame: &Frame, conn: &[Jet]) -> Vec<Jet> {
    let n = frame.dim();
    let idx = |c: usize, a: usize, b: usize| (c * n + a) * n + b;
    // de[e][idx] = e_e Γ
    let derivs: Vec<Vec<Jet>> = conn.iter().map(|c| frame.derive(c)).collect();
    let holo = frame.is_holonomic();
    let mut r = vec![zero(); n * n * n * n];
    for d in 0..n {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut v = derivs[idx(d, b, c)][a] - derivs[idx(d, a, c)][b];
                    for f in 0..n {
                        v += conn[idx(f, b, c)] * conn[idx(d, a, f)]
                            - conn[idx(f, a, c)] * conn[idx(d, b, f)];
                        if !holo {
                            v -= frame.c(a, b, f) * conn[idx(d, f, c)];
                        }
                    }
                    r[((d * n + a) * n + b) * n + c] = v;
                }
            }
        }
    }
    r
}

/// Covariant derivative of a covariant tensor with components `comps` (rank `rank`).
///
/// `(D_a T)_I = e_a T_I + k θ_a T_I − Σ_s Γ^d_{a i_s} T_{…d…}`; the weight term is
/// present when `weight` is given. Output layout: derivative index first.
pub fn covariant_derivative(
    frame: &Frame,
    conn: &[Jet],
    comps: &[Jet],
    rank: usize,
    weight: Option<(&[Jet], f64)>,
) -> Vec<Jet> {
    let n = frame.dim();
    let size = n.pow(rank as u32);
    debug_assert_eq!(comps.len(), size);
    let derivs: Vec<Vec<Jet>> = comps.iter().map(|c| frame.derive(c)).collect();
    let mut out = vec![zero(); n * size];
    let mut idx = vec![0usize; rank];
    for a in 0..n {
        for off in 0..size {
            unravel(off, n, &mut idx);
            let mut v = derivs[off][a];
            if let Some((theta, k)) = weight {
                if k != 0.0 {
                    v += theta[a] * comps[off] * k;
                }
            }
            for s in 0..rank {
                let keep = idx[s];
                for d in 0..n {
                    idx[s] = d;
                    v -= conn[(d * n + a) * n + keep] * comps[ravel(&idx, n)];
                }
                idx[s] = keep;
            }
            out[a * size + off] = v;
        }
    }
    out
}

/// Weyl connection coefficients `W^c_ab = Γ^c_ab + θ_a δ^c_b + θ_b δ^c_a − g_ab θ^c`.
pub fn weyl_coefficients(n: usize, gamma: &[Jet], g: &[Jet], g_inv: &[Jet], theta: &[Jet]) -> Vec<Jet> {
    let theta_up: Vec<Jet> = (0..n)
        .map(|c| (0..n).fold(zero(), |acc, d| acc + g_inv[c * n + d] * theta[d]))
        .collect();
    let mut w = gamma.to_vec();
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                let o = (c * n + a) * n + b;
                let mut v = w[o] - g[a * n + b] * theta_up[c];
                if c == b {
                    v += theta[a];
                }
                if c == a {
                    v += theta[b];
                }
                w[o] = v;
            }
        }
    }
    w
}

pub fn values(v: &[Jet]) -> Vec<f64> {
    v.iter().map(|j| j.value()).collect()
}
