//! One-dimensional quadrature helpers.
//!
//! All radial integrals in this crate are transformed by `r = 1 - 2^{-t}`,
//! which turns the dyadic shells `1 - 2^{-k} <= r < 1 - 2^{-k-1}` into unit
//! intervals in `t`.  Smooth integrands are handled per unit block with a
//! Gauss–Legendre rule plus one bisection-based error estimate; tails are
//! summed block by block with a geometric stopping bound.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Newton iteration on P_n from Chebyshev-like initial guesses.
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_deriv(n, x);
                dp = d;
                let dx = -p / d;
                x += dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| (mid + half * x, w * half))
            .collect()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 24-point rule; accurate to machine precision for the smooth unit
/// blocks produced by the dyadic substitution.
pub fn gl24() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(24))
}

/// Shared 12-point rule for per-shell norm blocks.
pub fn gl12() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(12))
}

/// Shared 8-point rule; the norm integrands are smooth on unit dyadic
/// blocks, where eight points already reach ~1e-10 relative error.
pub fn gl8() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(8))
}

/// Adaptive integral of `f` over `[a, b]`: bisects until the 24-point value
/// is stable.  Returns the value and an error estimate.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> (f64, f64) {
        let whole = gl24().integrate(a, b, f);
        let mid = 0.5 * (a + b);
        let split = gl24().integrate(a, mid, f) + gl24().integrate(mid, b, f);
        let err = (whole - split).abs();
        // Relative floor: once the split rule agrees to ~13 digits there is
        // nothing left to gain in f64.
        if err <= tol + 1e-13 * split.abs() || depth >= 14 {
            return (split, err);
        }
        let (l, el) = rec(f, a, mid, 0.5 * tol, depth + 1);
        let (r, er) = rec(f, mid, b, 0.5 * tol, depth + 1);
        (l + r, el + er)
    }
    rec(f, a, b, tol, 0)
}

/// Outcome of a tail integral that is allowed to diverge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailOutcome {
    Converged(f64),
    Diverging,
}

/// Integrates `g(t)` over `[t0, ∞)` block by block on unit intervals.
///
/// Stops once a geometric bound on the remaining tail drops below
/// `rel_tol` times the accumulated value.  Reports `Diverging` when the
/// blocks fail to decay over a long stretch, which is how non-integrable
/// weights and divergent supremum integrands surface.
pub fn tail_blocks(g: &dyn Fn(f64) -> f64, t0: f64, rel_tol: f64) -> Result<TailOutcome> {
    const MAX_BLOCKS: usize = 2000;
    let mut acc = 0.0f64;
    let mut prev_block = f64::INFINITY;
    let mut non_decaying = 0usize;
    for j in 0..MAX_BLOCKS {
        let a = t0 + j as f64;
        let (block, _err) = adaptive(g, a, a + 1.0, 1e-16 * (1.0 + acc.abs()));
        acc += block;
        if block <= 0.0 {
            // Weight vanished identically past this radius.
            if j >= 2 {
                return Ok(TailOutcome::Converged(acc));
            }
            prev_block = block;
            continue;
        }
        let ratio = block / prev_block;
        if ratio >= 0.999 && j > 0 {
            non_decaying += 1;
            if non_decaying >= 40 {
                return Ok(TailOutcome::Diverging);
            }
        } else {
            non_decaying = 0;
        }
        // Geometric tail bound with a safety factor.
        if j > 0 && ratio < 0.95 {
            let tail = 3.0 * block * ratio / (1.0 - ratio);
            if tail <= rel_tol * acc.max(f64::MIN_POSITIVE) {
                return Ok(TailOutcome::Converged(acc));
            }
        }
        prev_block = block;
    }
    Err(Error::QuadratureNonConvergence(format!(
        "tail integral from t = {t0} still moving after {MAX_BLOCKS} dyadic blocks"
    )))
}

/// Integrates `g(t)` over the finite range `[t0, t1]` using unit blocks
/// aligned with the dyadic grid.
pub fn finite_blocks(g: &dyn Fn(f64) -> f64, t0: f64, t1: f64) -> f64 {
    let mut acc = 0.0f64;
    let mut a = t0;
    while a < t1 {
        let b = (a.floor() + 1.0).min(t1);
        let (block, _) = adaptive(g, a, b, 1e-16 * (1.0 + acc.abs()));
        acc += block;
        a = b;
    }
    acc
}

/// Dyadic coordinate of a radius: `t` with `r = 1 - 2^{-t}`.
pub fn dyadic_t(r: f64) -> f64 {
    -(1.0 - r).log2()
}

/// Radius at dyadic coordinate `t`.
pub fn radius_at(t: f64) -> f64 {
    1.0 - (-t).exp2()
}
