//! Inner functions on the unit disc and their derivatives.
//!
//! Four variants are supported: finite Blaschke products, infinite Blaschke
//! products over a zero sequence with a certified truncation policy, the
//! one-atom singular inner function, and Möbius (Frostman) shifts of any of
//! these.  Every evaluation returns a value together with an error bound;
//! the public entry points refuse to return a value they cannot certify at
//! the requested tolerance.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::zeros;

/// Evaluation is refused for |z| above this; all radial integrals in the
/// crate stop strictly before the circle.
pub const MAX_MODULUS: f64 = 1.0 - 9.094947017729282e-13; // 1 - 2^{-40}

const EPS: f64 = f64::EPSILON;

/// Switch from the logarithmic-derivative form to the product-rule form when
/// a Blaschke factor is this close (pseudo-hyperbolically) to the point.
const NEAR_ZERO_RHO: f64 = 1e-6;

/// A value with a certified absolute error bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvalResult {
    pub value: Complex64,
    pub error_bound: f64,
    pub terms_used: usize,
}

impl EvalResult {
    fn exact_ish(value: Complex64, error_bound: f64) -> Self {
        EvalResult {
            value,
            error_bound,
            terms_used: 1,
        }
    }
}

/// Zero sequences for Blaschke products: an explicit list or a named
/// generator whose moduli are non-decreasing and whose Blaschke tail admits a
/// closed-form bound.
#[derive(Debug, Clone)]
pub enum ZeroSource {
    Explicit(Vec<Complex64>),
    Generated(ZeroGenerator),
}

#[derive(Debug, Clone)]
pub enum ZeroGenerator {
    /// `z_n = 1 - 2^{-n}`, n >= 1.
    Exponential,
    /// `z_n = 1 - n^{-c}` on the positive axis; needs `c > 1`.
    PolynomialDecay { c: f64 },
    /// Zeros of the Frostman shift `S_a` of the atomic singular function,
    /// ordered by increasing modulus.
    AtomicFrostman { a: Complex64 },
}

#[derive(Debug, Clone)]
pub struct ZeroSequence {
    source: ZeroSource,
}

impl ZeroSequence {
    pub fn explicit(zeros: Vec<Complex64>) -> Result<Self> {
        for z in &zeros {
            if z.norm() >= 1.0 {
                return Err(Error::invalid("zeros", format!("|{z}| >= 1")));
            }
        }
        Ok(ZeroSequence {
            source: ZeroSource::Explicit(zeros),
        })
    }

    pub fn generated(gen: ZeroGenerator) -> Result<Self> {
        if let ZeroGenerator::PolynomialDecay { c } = gen {
            if !(c > 1.0) {
                return Err(Error::invalid(
                    "c",
                    format!("polynomial_decay needs c > 1 for a Blaschke sequence, got {c}"),
                ));
            }
        }
        if let ZeroGenerator::AtomicFrostman { a } = gen {
            if a == Complex64::new(0.0, 0.0) {
                return Err(Error::ExceptionalParameter {
                    function: "atomic singular inner function".into(),
                });
            }
            if a.norm() >= 1.0 {
                return Err(Error::invalid("a", "need |a| < 1"));
            }
        }
        Ok(ZeroSequence {
            source: ZeroSource::Generated(gen),
        })
    }

    pub fn known_len(&self) -> Option<usize> {
        match &self.source {
            ZeroSource::Explicit(v) => Some(v.len()),
            ZeroSource::Generated(_) => None,
        }
    }

    /// The `i`-th zero (ordered by non-decreasing modulus for generators).
    pub fn zero(&self, i: usize) -> Option<Complex64> {
        match &self.source {
            ZeroSource::Explicit(v) => v.get(i).copied(),
            ZeroSource::Generated(g) => Some(g.zero(i)),
        }
    }

    pub fn take(&self, n: usize) -> Vec<Complex64> {
        (0..n).filter_map(|i| self.zero(i)).collect()
    }

    /// Partial Blaschke sum `Σ_{i<n} (1 - |z_i|)`.
    pub fn blaschke_sum(&self, n: usize) -> f64 {
        crate::exec::map_sum(n.min(self.known_len().unwrap_or(n)), &|i| {
            1.0 - self.zero(i).map(|z| z.norm()).unwrap_or(1.0)
        })
    }

    /// Closed-form bound on the omitted tail `Σ_{i>=n} (1 - |z_i|)`.
    pub fn tail_bound(&self, n: usize) -> Option<f64> {
        match &self.source {
            ZeroSource::Explicit(v) => {
                if n >= v.len() {
                    Some(0.0)
                } else {
                    None
                }
            }
            ZeroSource::Generated(g) => Some(g.tail_bound(n)),
        }
    }
}

impl ZeroGenerator {
    fn zero(&self, i: usize) -> Complex64 {
        match self {
            ZeroGenerator::Exponential => {
                Complex64::new(1.0 - 0.5f64.powi(i as i32 + 1), 0.0)
            }
            ZeroGenerator::PolynomialDecay { c } => {
                Complex64::new(1.0 - ((i + 1) as f64).powf(-c), 0.0)
            }
            ZeroGenerator::AtomicFrostman { a } => {
                zeros::atomic_frostman_zero_by_rank(*a, 2.0, i)
            }
        }
    }

    fn tail_bound(&self, n: usize) -> f64 {
        match self {
            ZeroGenerator::Exponential => 0.5f64.powi(n as i32),
            ZeroGenerator::PolynomialDecay { c } => {
                ((n.max(1)) as f64).powf(1.0 - c) / (c - 1.0)
            }
            ZeroGenerator::AtomicFrostman { a } => {
                zeros::atomic_frostman_tail_bound(*a, 2.0, n)
            }
        }
    }
}

/// An inner function.
#[derive(Debug, Clone)]
pub enum InnerFunction {
    FiniteBlaschke {
        zeros: Vec<Complex64>,
        rotation: f64,
    },
    InfiniteBlaschke {
        zeros: ZeroSequence,
        rotation: f64,
        max_terms: usize,
    },
    /// `exp(-m (1+z) / (2 (1-z)))`: a single singular atom at z = 1 of mass
    /// `m`; mass 2 is the classical `exp((z+1)/(z-1))`.
    AtomicSingular { mass: f64 },
    Frostman {
        base: Box<InnerFunction>,
        a: Complex64,
    },
}

impl InnerFunction {
    pub fn finite_blaschke(zeros: Vec<Complex64>, rotation: f64) -> Result<Self> {
        for z in &zeros {
            if z.norm() >= 1.0 {
                return Err(Error::invalid("zeros", format!("|{z}| >= 1")));
            }
        }
        Ok(InnerFunction::FiniteBlaschke { zeros, rotation })
    }

    pub fn infinite_blaschke(zeros: ZeroSequence, rotation: f64) -> Self {
        InnerFunction::InfiniteBlaschke {
            zeros,
            rotation,
            max_terms: 10_000_000,
        }
    }

    pub fn atomic_singular(mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::invalid("mass", format!("need mass > 0, got {mass}")));
        }
        Ok(InnerFunction::AtomicSingular { mass })
    }

    /// The classical atomic singular inner function `exp((z+1)/(z-1))`.
    pub fn atomic() -> Self {
        InnerFunction::AtomicSingular { mass: 2.0 }
    }

    pub fn frostman(self, a: Complex64) -> Result<Self> {
        if a.norm() >= 1.0 {
            return Err(Error::invalid("a", format!("need |a| < 1, got |a| = {}", a.norm())));
        }
        Ok(InnerFunction::Frostman {
            base: Box::new(self),
            a,
        })
    }

    pub fn label(&self) -> String {
        match self {
            InnerFunction::FiniteBlaschke { zeros, .. } => {
                format!("blaschke[{}]", zeros.len())
            }
            InnerFunction::InfiniteBlaschke { .. } => "blaschke[inf]".to_string(),
            InnerFunction::AtomicSingular { mass } => format!("atomic(mass={mass})"),
            InnerFunction::Frostman { base, a } => {
                format!("frostman({}, a={a})", base.label())
            }
        }
    }

    /// Evaluates `Θ(z)` with `|returned - Θ(z)| <= tol`.
    pub fn eval(&self, z: Complex64, tol: f64) -> Result<EvalResult> {
        let res = self.eval_raw(z, tol)?;
        if res.error_bound > tol {
            return Err(Error::CannotCertify {
                what: self.label(),
                tol,
                detail: format!("achievable bound {:.3e}", res.error_bound),
            });
        }
        Ok(res)
    }

    /// Evaluates `Θ'(z)` with `|returned - Θ'(z)| <= tol`.
    pub fn eval_derivative(&self, z: Complex64, tol: f64) -> Result<EvalResult> {
        let res = self.eval_derivative_raw(z, tol)?;
        if res.error_bound > tol {
            return Err(Error::CannotCertify {
                what: format!("{}'", self.label()),
                tol,
                detail: format!("achievable bound {:.3e}", res.error_bound),
            });
        }
        Ok(res)
    }

    /// Evaluates `Θ''(z)` analytically (no numerical differentiation).
    pub fn eval_second_derivative(&self, z: Complex64, tol: f64) -> Result<EvalResult> {
        check_modulus(z)?;
        let res = self.second_raw(z, tol)?;
        if res.error_bound > tol {
            return Err(Error::CannotCertify {
                what: format!("{}''", self.label()),
                tol,
                detail: format!("achievable bound {:.3e}", res.error_bound),
            });
        }
        Ok(res)
    }

    /// Best-effort evaluation: the returned bound may exceed `tol` only for
    /// rounding-limited cases; truncations always honor `tol`.
    pub(crate) fn eval_raw(&self, z: Complex64, tol: f64) -> Result<EvalResult> {
        check_modulus(z)?;
        if !(tol > 0.0) {
            return Err(Error::invalid("tol", "need tol > 0"));
        }
        match self {
            InnerFunction::FiniteBlaschke { zeros, rotation } => {
                let mut value = rotation_factor(*rotation);
                for w in zeros {
                    value *= blaschke_factor(*w, z);
                }
                Ok(EvalResult {
                    value,
                    error_bound: value.norm() * 6.0 * EPS * (zeros.len() as f64 + 1.0),
                    terms_used: zeros.len(),
                })
            }
            InnerFunction::InfiniteBlaschke {
                zeros: seq,
                rotation,
                max_terms,
            } => {
                let one_minus_r = 1.0 - z.norm();
                // Each omitted factor differs from 1 by at most
                // 2(1-|z_n|)/(1-|z|); the tail multiplies the partial product
                // by at most exp(2 T(N)/(1-|z|)).
                let n = truncation_terms(seq, *max_terms, 0.5 * tol * one_minus_r, || {
                    format!("{} value", self.label())
                })?;
                let mut value = rotation_factor(*rotation);
                for i in 0..n {
                    value *= blaschke_factor(seq.zero(i).expect("within truncation"), z);
                }
                let tail = seq.tail_bound(n).unwrap_or(0.0);
                let rel = (2.0 * tail / one_minus_r).exp_m1();
                Ok(EvalResult {
                    value,
                    error_bound: value.norm() * (rel + 6.0 * EPS * (n as f64 + 1.0)),
                    terms_used: n,
                })
            }
            InnerFunction::AtomicSingular { mass } => {
                let w = atomic_exponent(*mass, z);
                let value = w.exp();
                Ok(EvalResult::exact_ish(
                    value,
                    value.norm() * (w.norm() * 3.0 * EPS + 2.0 * EPS),
                ))
            }
            InnerFunction::Frostman { base, a } => {
                let inner_tol = tol * (1.0 - a.norm()).powi(2) / 3.0;
                let b = base.eval_raw(z, inner_tol)?;
                let denom = Complex64::new(1.0, 0.0) - a.conj() * b.value;
                let value = (b.value - *a) / denom;
                // |dΘ_a/dw| = (1-|a|^2)/|1-ā w|^2, inflated to absorb the
                // uncertainty of w itself.
                let safe = (denom.norm() - a.norm() * b.error_bound).max(1e-300);
                let amp = (1.0 - a.norm_sqr()) / (safe * safe);
                Ok(EvalResult {
                    value,
                    error_bound: b.error_bound * amp + 8.0 * EPS * (1.0 + value.norm()),
                    terms_used: b.terms_used,
                })
            }
        }
    }

    pub(crate) fn eval_derivative_raw(&self, z: Complex64, tol: f64) -> Result<EvalResult> {
        check_modulus(z)?;
        if !(tol > 0.0) {
            return Err(Error::invalid("tol", "need tol > 0"));
        }
        match self {
            InnerFunction::FiniteBlaschke { zeros, rotation } => {
                let mut res = blaschke_derivative(zeros, z);
                res.value *= rotation_factor(*rotation);
                Ok(res)
            }
            InnerFunction::InfiniteBlaschke {
                zeros: seq,
                rotation,
                max_terms,
            } => {
                let one_minus_r = 1.0 - z.norm();
                // The derivative tail needs an extra 1/(1-|z|): omitted
                // factors contribute |b_n'| <= 2(1-|z_n|)/(1-|z|)^2 directly
                // and perturb the kept product as in `eval_raw`.
                let mut n = truncation_terms(
                    seq,
                    *max_terms,
                    0.125 * tol * one_minus_r * one_minus_r,
                    || format!("{} derivative", self.label()),
                )?;
                loop {
                    let zs = seq.take(n);
                    let mut res = blaschke_derivative(&zs, z);
                    res.value *= rotation_factor(*rotation);
                    let tail = seq.tail_bound(n).unwrap_or(0.0);
                    let rel = (2.0 * tail / one_minus_r).exp_m1();
                    let tail_deriv = 2.0 * tail / (one_minus_r * one_minus_r);
                    let bound = res.error_bound
                        + res.value.norm() * rel
                        + (1.0 + rel) * tail_deriv;
                    if bound <= tol || seq.tail_bound(n) == Some(0.0) || n >= *max_terms {
                        res.error_bound = bound;
                        res.terms_used = n;
                        return Ok(res);
                    }
                    n = (n * 2).min(*max_terms);
                }
            }
            InnerFunction::AtomicSingular { mass } => {
                let w = atomic_exponent(*mass, z);
                let one_minus_z = Complex64::new(1.0, 0.0) - z;
                let deriv = w.exp() * (-mass) / (one_minus_z * one_minus_z);
                Ok(EvalResult::exact_ish(
                    deriv,
                    deriv.norm() * (w.norm() * 3.0 * EPS + 8.0 * EPS),
                ))
            }
            InnerFunction::Frostman { base, a } => {
                // Θ_a' = Θ' (1-|a|^2)/(1 - ā Θ)^2, used exactly.
                let scale = (1.0 - a.norm()).powi(2);
                let b = base.eval_raw(z, tol * scale / 6.0)?;
                let d = base.eval_derivative_raw(z, tol * scale / 6.0)?;
                let denom = Complex64::new(1.0, 0.0) - a.conj() * b.value;
                let value = d.value * (1.0 - a.norm_sqr()) / (denom * denom);
                let safe = (denom.norm() - a.norm() * b.error_bound).max(1e-300);
                let amp = (1.0 - a.norm_sqr()) / (safe * safe);
                let chain = value.norm() * 2.0 * a.norm() * b.error_bound / safe;
                Ok(EvalResult {
                    value,
                    error_bound: d.error_bound * amp + chain + 8.0 * EPS * (1.0 + value.norm()),
                    terms_used: b.terms_used + d.terms_used,
                })
            }
        }
    }

    fn second_raw(&self, z: Complex64, tol: f64) -> Result<EvalResult> {
        match self {
            InnerFunction::FiniteBlaschke { zeros, rotation } => {
                let mut res = blaschke_second_derivative(zeros, z);
                res.value *= rotation_factor(*rotation);
                Ok(res)
            }
            InnerFunction::InfiniteBlaschke {
                zeros: seq,
                rotation,
                max_terms,
            } => {
                let one_minus_r = 1.0 - z.norm();
                let n = truncation_terms(
                    seq,
                    *max_terms,
                    0.03 * tol * one_minus_r.powi(3),
                    || format!("{} second derivative", self.label()),
                )?;
                let zs = seq.take(n);
                let mut res = blaschke_second_derivative(&zs, z);
                res.value *= rotation_factor(*rotation);
                let tail = seq.tail_bound(n).unwrap_or(0.0);
                // Crude but certified: dropping the tail perturbs B, B', B''
                // by at most 2T/(1-r)^{1..3} in the product expansion.
                let t3 = 2.0 * tail / one_minus_r.powi(3);
                res.error_bound += (1.0 + res.value.norm()) * 6.0 * t3;
                res.terms_used = n;
                Ok(res)
            }
            InnerFunction::AtomicSingular { mass } => {
                let w = atomic_exponent(*mass, z);
                let one_minus_z = Complex64::new(1.0, 0.0) - z;
                let g1 = -mass / (one_minus_z * one_minus_z);
                let g2 = g1 * 2.0 / one_minus_z;
                let value = w.exp() * (g1 * g1 + g2);
                Ok(EvalResult::exact_ish(
                    value,
                    value.norm() * (w.norm() * 3.0 * EPS + 16.0 * EPS),
                ))
            }
            InnerFunction::Frostman { base, a } => {
                let scale = (1.0 - a.norm()).powi(3);
                let b = base.eval_raw(z, tol * scale / 12.0)?;
                let d1 = base.eval_derivative_raw(z, tol * scale / 12.0)?;
                let d2 = base.second_raw(z, tol * scale / 12.0)?;
                let denom = Complex64::new(1.0, 0.0) - a.conj() * b.value;
                let fac = 1.0 - a.norm_sqr();
                let value = fac
                    * (d2.value / (denom * denom)
                        + 2.0 * a.conj() * d1.value * d1.value / (denom * denom * denom));
                let safe = (denom.norm() - a.norm() * b.error_bound).max(1e-300);
                let amp = fac / (safe * safe) * (1.0 + 2.0 / safe);
                let prop = (d2.error_bound + 2.0 * d1.value.norm() * d1.error_bound
                    + (b.error_bound) * (1.0 + value.norm()) * 3.0 / safe)
                    * amp;
                Ok(EvalResult {
                    value,
                    error_bound: prop + 16.0 * EPS * (1.0 + value.norm()),
                    terms_used: b.terms_used + d1.terms_used + d2.terms_used,
                })
            }
        }
    }
}

/// Applies the Frostman shift `Θ_a = (Θ - a)/(1 - ā Θ)`.
pub fn frostman_shift(theta: InnerFunction, a: Complex64) -> Result<InnerFunction> {
    theta.frostman(a)
}

fn check_modulus(z: Complex64) -> Result<()> {
    let m = z.norm();
    if m > MAX_MODULUS {
        return Err(Error::TooCloseToBoundary { modulus: m });
    }
    Ok(())
}

fn rotation_factor(rotation: f64) -> Complex64 {
    if rotation == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, rotation)
    }
}

/// One Blaschke factor `(|w|/w)(w - z)/(1 - w̄ z)`; the factor for a zero at
/// the origin is `z` itself.
pub fn blaschke_factor(w: Complex64, z: Complex64) -> Complex64 {
    if w == Complex64::new(0.0, 0.0) {
        return z;
    }
    let unit = w / w.norm();
    (w - z) / (Complex64::new(1.0, 0.0) - w.conj() * z) / unit
}

/// d/dz of a Blaschke factor: `(|w|/w)(|w|^2 - 1)/(1 - w̄ z)^2`.
fn blaschke_factor_derivative(w: Complex64, z: Complex64) -> Complex64 {
    if w == Complex64::new(0.0, 0.0) {
        return Complex64::new(1.0, 0.0);
    }
    let unit = w / w.norm();
    let denom = Complex64::new(1.0, 0.0) - w.conj() * z;
    (w.norm_sqr() - 1.0) / (denom * denom) / unit
}

fn blaschke_factor_second(w: Complex64, z: Complex64) -> Complex64 {
    if w == Complex64::new(0.0, 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let unit = w / w.norm();
    let denom = Complex64::new(1.0, 0.0) - w.conj() * z;
    (w.norm_sqr() - 1.0) * 2.0 * w.conj() / (denom * denom * denom) / unit
}

/// Logarithmic derivative of one factor, valid away from the zero.
fn factor_log_derivative(w: Complex64, z: Complex64) -> Complex64 {
    if w == Complex64::new(0.0, 0.0) {
        return 1.0 / z;
    }
    let denom = (Complex64::new(1.0, 0.0) - w.conj() * z) * (w - z);
    (w.norm_sqr() - 1.0) / denom
}

/// d/dz of the logarithmic derivative of one factor.
fn factor_log_derivative_prime(w: Complex64, z: Complex64) -> Complex64 {
    let (num, denom) = if w == Complex64::new(0.0, 0.0) {
        (Complex64::new(-1.0, 0.0), z * z)
    } else {
        let d = (Complex64::new(1.0, 0.0) - w.conj() * z) * (w - z);
        let n = (w.norm_sqr() - 1.0)
            * (w.conj() * (w - z) + (Complex64::new(1.0, 0.0) - w.conj() * z));
        (n, d * d)
    };
    num / denom
}

/// Derivative of a finite Blaschke product (without the rotation factor).
///
/// Uses `B' = B · Σ L_n` away from the zeros and the product-rule form with
/// prefix/suffix products when `z` is pseudo-hyperbolically within
/// [`NEAR_ZERO_RHO`] of a zero.
fn blaschke_derivative(zeros: &[Complex64], z: Complex64) -> EvalResult {
    if zeros.is_empty() {
        return EvalResult::exact_ish(Complex64::new(0.0, 0.0), 0.0);
    }
    let near = zeros
        .iter()
        .any(|w| pseudo_hyperbolic(z, *w) < NEAR_ZERO_RHO);
    if near {
        let (value, scale) = product_rule_derivative(zeros, z);
        return EvalResult {
            value,
            error_bound: scale * 8.0 * EPS * (zeros.len() as f64 + 1.0),
            terms_used: zeros.len(),
        };
    }
    let mut product = Complex64::new(1.0, 0.0);
    let mut logsum = Complex64::new(0.0, 0.0);
    let mut logscale = 0.0;
    for w in zeros {
        product *= blaschke_factor(*w, z);
        let l = factor_log_derivative(*w, z);
        logsum += l;
        logscale += l.norm();
    }
    let value = product * logsum;
    EvalResult {
        value,
        error_bound: product.norm() * logscale * 8.0 * EPS * (zeros.len() as f64 + 1.0),
        terms_used: zeros.len(),
    }
}

/// `Σ_n b_n' Π_{k≠n} b_k` via prefix/suffix products; returns the value and
/// a magnitude scale for the rounding bound.
fn product_rule_derivative(zeros: &[Complex64], z: Complex64) -> (Complex64, f64) {
    let n = zeros.len();
    let factors: Vec<Complex64> = zeros.iter().map(|w| blaschke_factor(*w, z)).collect();
    let mut prefix = vec![Complex64::new(1.0, 0.0); n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] * factors[i];
    }
    let mut suffix = vec![Complex64::new(1.0, 0.0); n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] * factors[i];
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for i in 0..n {
        let term = blaschke_factor_derivative(zeros[i], z) * prefix[i] * suffix[i + 1];
        acc += term;
        scale += term.norm();
    }
    (acc, scale.max(acc.norm()))
}

/// Second derivative of a finite Blaschke product (without rotation).
fn blaschke_second_derivative(zeros: &[Complex64], z: Complex64) -> EvalResult {
    if zeros.is_empty() {
        return EvalResult::exact_ish(Complex64::new(0.0, 0.0), 0.0);
    }
    let near = zeros
        .iter()
        .any(|w| pseudo_hyperbolic(z, *w) < NEAR_ZERO_RHO);
    if near {
        // B'' = Σ_n [ b_n'' Π_{k≠n} b_k + b_n' Σ_{k≠n} b_k' Π_{j≠n,k} b_j ]
        let n = zeros.len();
        let factors: Vec<Complex64> = zeros.iter().map(|w| blaschke_factor(*w, z)).collect();
        let d1: Vec<Complex64> = zeros
            .iter()
            .map(|w| blaschke_factor_derivative(*w, z))
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for i in 0..n {
            let rest: Complex64 = (0..n)
                .filter(|&k| k != i)
                .map(|k| factors[k])
                .product();
            let mut cross = Complex64::new(0.0, 0.0);
            for k in 0..n {
                if k == i {
                    continue;
                }
                let rest2: Complex64 = (0..n)
                    .filter(|&j| j != i && j != k)
                    .map(|j| factors[j])
                    .product();
                cross += d1[k] * rest2;
            }
            let term = blaschke_factor_second(zeros[i], z) * rest + d1[i] * cross;
            acc += term;
            scale += term.norm();
        }
        return EvalResult {
            value: acc,
            error_bound: scale.max(acc.norm()) * 16.0 * EPS * (n as f64 + 1.0).powi(2),
            terms_used: n,
        };
    }
    let mut product = Complex64::new(1.0, 0.0);
    let mut logsum = Complex64::new(0.0, 0.0);
    let mut logsum_prime = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for w in zeros {
        product *= blaschke_factor(*w, z);
        let l = factor_log_derivative(*w, z);
        logsum += l;
        logsum_prime += factor_log_derivative_prime(*w, z);
        scale += l.norm() * l.norm() + l.norm();
    }
    let value = product * (logsum * logsum + logsum_prime);
    EvalResult {
        value,
        error_bound: product.norm() * (scale + logsum.norm_sqr())
            * 16.0
            * EPS
            * (zeros.len() as f64 + 1.0),
        terms_used: zeros.len(),
    }
}

/// Picks the number of kept factors so the closed-form tail bound is at most
/// `target`.
fn truncation_terms(
    seq: &ZeroSequence,
    max_terms: usize,
    target: f64,
    what: impl Fn() -> String,
) -> Result<usize> {
    if let Some(len) = seq.known_len() {
        return Ok(len);
    }
    let mut n = 64usize;
    loop {
        match seq.tail_bound(n) {
            Some(t) if t <= target => return Ok(n),
            Some(_) => {
                if n >= max_terms {
                    return Err(Error::CannotCertify {
                        what: what(),
                        tol: target,
                        detail: format!("tail bound still {e:?} after {n} terms", e = seq.tail_bound(n)),
                    });
                }
                n *= 2;
            }
            None => {
                return Err(Error::CannotCertify {
                    what: what(),
                    tol: target,
                    detail: "no tail bound available and generator exhausted".into(),
                })
            }
        }
    }
}

fn atomic_exponent(mass: f64, z: Complex64) -> Complex64 {
    -mass * (Complex64::new(1.0, 0.0) + z) / ((Complex64::new(1.0, 0.0) - z) * 2.0)
}

/// Pseudo-hyperbolic distance `|z - w| / |1 - w̄ z|`.
pub fn pseudo_hyperbolic(z: Complex64, w: Complex64) -> f64 {
    if z == w {
        return 0.0;
    }
    ((z - w) / (Complex64::new(1.0, 0.0) - w.conj() * z)).norm()
}

/// Residual of the exact identity
/// `|(1 - āz)/(z - a)|^2 = (1-|z|^2)(1-|a|^2)/|z-a|^2 + 1`,
/// relative to the size of its left side.
pub fn pseudo_hyperbolic_identity_residual(z: Complex64, a: Complex64) -> f64 {
    let lhs = ((Complex64::new(1.0, 0.0) - a.conj() * z) / (z - a)).norm_sqr();
    let rhs = (1.0 - z.norm_sqr()) * (1.0 - a.norm_sqr()) / (z - a).norm_sqr() + 1.0;
    (lhs - rhs).abs() / lhs.max(1.0)
}

/// Separation diagnostics over the first `depth` zeros: the minimum pairwise
/// pseudo-hyperbolic distance, and the minimum over `n` of the truncated
/// uniform-separation product `Π_{k≠n} ρ(z_k, z_n)`.  Both are upper bounds
/// for the true infima.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeparationReport {
    pub separated_delta: f64,
    pub uniformly_separated_inf: f64,
    pub depth: usize,
}

pub fn separation_report(seq: &ZeroSequence, depth: usize) -> Result<SeparationReport> {
    if depth < 2 {
        return Err(Error::invalid("depth", "need at least two zeros"));
    }
    let zs = seq.take(depth);
    if zs.len() < 2 {
        return Err(Error::invalid(
            "depth",
            format!("sequence has only {} zeros", zs.len()),
        ));
    }
    separation_of_slice(&zs)
}

pub fn separation_of_slice(zs: &[Complex64]) -> Result<SeparationReport> {
    if zs.len() < 2 {
        return Err(Error::invalid("depth", "need at least two zeros"));
    }
    let n = zs.len();
    let per_n: Vec<(f64, f64)> = crate::exec::map_collect(n, |i| {
        let mut min_rho = f64::INFINITY;
        let mut log_prod = 0.0f64;
        for k in 0..n {
            if k == i {
                continue;
            }
            let rho = pseudo_hyperbolic(zs[k], zs[i]);
            min_rho = min_rho.min(rho);
            log_prod += rho.max(1e-300).ln();
        }
        (min_rho, log_prod)
    });
    let separated_delta = per_n.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let min_log = per_n.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(SeparationReport {
        separated_delta,
        uniformly_separated_inf: min_log.exp(),
        depth: n,
    })
}

/// Largest observed value of `|Θ'(z)|(1-|z|^2) - (1-|Θ(z)|^2)` over seeded
/// random samples; non-positive up to evaluation error for any self-map of
/// the disc.
pub fn schwarz_pick_check(theta: &InnerFunction, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_max = 1.0 - 0.5f64.powi(16);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let r = r_max * rng.gen::<f64>().sqrt();
        let th = rng.gen::<f64>() * std::f64::consts::TAU;
        let z = Complex64::from_polar(r, th);
        let v = theta.eval(z, 1e-9)?;
        let d = theta.eval_derivative(z, 1e-7 * (1.0 + 2.0 / (1.0 - r)))?;
        let lhs = d.value.norm() * (1.0 - z.norm_sqr());
        let rhs = 1.0 - v.value.norm_sqr();
        worst = worst.max(lhs - rhs);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_zero_at_origin_is_identity_map() {
        let b = InnerFunction::finite_blaschke(vec![c(0.0, 0.0)], 0.0).unwrap();
        let v = b.eval(c(0.3, 0.0), 1e-12).unwrap();
        assert_abs_diff_eq!(v.value.re, 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(v.value.im, 0.0, epsilon = 1e-14);
        let d = b.eval_derivative(c(0.5, 0.0), 1e-12).unwrap();
        assert_abs_diff_eq!(d.value.re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn atomic_value_at_origin() {
        let s = InnerFunction::atomic();
        let v = s.eval(c(0.0, 0.0), 1e-13).unwrap();
        assert_abs_diff_eq!(v.value.re, (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.value.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn atomic_derivative_at_origin_and_fd_cross_check() {
        let s = InnerFunction::atomic();
        let d = s.eval_derivative(c(0.0, 0.0), 1e-12).unwrap();
        assert_abs_diff_eq!(d.value.re, -2.0 * (-1.0f64).exp(), epsilon = 1e-13);
        // central finite difference at h = 1e-6
        let h = 1e-6;
        let fp = s.eval(c(h, 0.0), 1e-13).unwrap().value;
        let fm = s.eval(c(-h, 0.0), 1e-13).unwrap().value;
        let fd = (fp - fm) / (2.0 * h);
        assert!((fd - d.value).norm() < 1e-6);
    }

    #[test]
    fn atomic_second_derivative_closed_form() {
        let s = InnerFunction::atomic();
        for z in [c(0.1, 0.2), c(-0.4, 0.3), c(0.7, 0.0)] {
            let d2 = s.eval_second_derivative(z, 1e-10).unwrap().value;
            let sv = s.eval(z, 1e-13).unwrap().value;
            let zm1 = z - c(1.0, 0.0);
            let expect = sv * (4.0 / zm1.powi(4) + 4.0 / zm1.powi(3));
            assert!((d2 - expect).norm() <= 1e-10 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn infinite_product_matches_long_product_oracle() {
        // zeros 1 - 2^{-n}: at z = 0 the product is Π (1 - 2^{-n}).
        let seq = ZeroSequence::generated(ZeroGenerator::Exponential).unwrap();
        let b = InnerFunction::infinite_blaschke(seq, 0.0);
        let v = b.eval(c(0.0, 0.0), 1e-8).unwrap();
        let mut oracle = 1.0f64;
        for n in 1..=1_000_000u32 {
            oracle *= 1.0 - 0.5f64.powi(n.min(1074) as i32);
        }
        assert_abs_diff_eq!(v.value.re, oracle, epsilon = 1e-8);
        assert!(v.error_bound <= 1e-8);
    }

    #[test]
    fn truncation_certificate_tightens() {
        let seq = ZeroSequence::generated(ZeroGenerator::Exponential).unwrap();
        let b = InnerFunction::infinite_blaschke(seq, 0.0);
        let z = c(0.55, -0.2);
        let tol = 1e-7;
        let v1 = b.eval(z, tol).unwrap().value;
        let v2 = b.eval(z, tol / 10.0).unwrap().value;
        assert!((v1 - v2).norm() <= tol);
    }

    #[test]
    fn frostman_with_zero_parameter_is_identity() {
        let s = InnerFunction::atomic();
        let sh = s.clone().frostman(c(0.0, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let r = 0.95 * rng.gen::<f64>().sqrt();
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            let z = Complex64::from_polar(r, th);
            let a = s.eval(z, 1e-12).unwrap().value;
            let b = sh.eval(z, 1e-12).unwrap().value;
            assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn frostman_at_function_value_gives_zero() {
        // S(0) = e^{-1}, so the shift by a = e^{-1} vanishes at the origin.
        let a = c((-1.0f64).exp(), 0.0);
        let sh = InnerFunction::atomic().frostman(a).unwrap();
        let v = sh.eval(c(0.0, 0.0), 1e-12).unwrap();
        assert!(v.value.norm() <= 1e-13);
    }

    #[test]
    fn frostman_stays_inside_disc() {
        let sh = InnerFunction::atomic().frostman(c(0.3, 0.2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let r = 0.999 * rng.gen::<f64>().sqrt();
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            let z = Complex64::from_polar(r, th);
            let v = sh.eval(z, 1e-10).unwrap();
            assert!(v.value.norm() < 1.0 + v.error_bound);
        }
    }

    #[test]
    fn frostman_derivative_identity_is_exact() {
        let s = InnerFunction::atomic();
        let a = c(0.5, 0.0);
        let sh = s.clone().frostman(a).unwrap();
        let z = c(0.2, 0.0);
        let lhs = sh.eval_derivative(z, 1e-12).unwrap().value;
        let sv = s.eval(z, 1e-14).unwrap().value;
        let sd = s.eval_derivative(z, 1e-13).unwrap().value;
        let denom = c(1.0, 0.0) - a.conj() * sv;
        let rhs = sd * (1.0 - a.norm_sqr()) / (denom * denom);
        assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn frostman_derivative_comparability_window() {
        let s = InnerFunction::atomic();
        let a = c(0.35, -0.25);
        let sh = s.clone().frostman(a).unwrap();
        let lo = (1.0 - a.norm_sqr()) / (1.0 + a.norm()).powi(2);
        let hi = (1.0 - a.norm_sqr()) / (1.0 - a.norm()).powi(2);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let r = 0.98 * rng.gen::<f64>().sqrt();
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            let z = Complex64::from_polar(r, th);
            let ratio = sh.eval_derivative(z, 1e-9).unwrap().value.norm()
                / s.eval_derivative(z, 1e-9).unwrap().value.norm();
            assert!(ratio >= lo - 1e-9 && ratio <= hi + 1e-9, "ratio {ratio}");
        }
    }

    #[test]
    fn pseudo_hyperbolic_basics() {
        assert_abs_diff_eq!(
            pseudo_hyperbolic(c(0.0, 0.0), c(0.7, 0.0)),
            0.7,
            epsilon = 1e-15
        );
        let expect = (0.5f64 * 0.5 + 0.25).sqrt() / (1.0f64 + 0.0625).sqrt();
        assert_abs_diff_eq!(
            pseudo_hyperbolic(c(0.5, 0.0), c(0.0, 0.5)),
            expect,
            epsilon = 1e-15
        );
    }

    #[test]
    fn pseudo_hyperbolic_identity_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let z = Complex64::from_polar(0.99 * rng.gen::<f64>().sqrt(), rng.gen::<f64>() * 6.28);
            let a = Complex64::from_polar(0.99 * rng.gen::<f64>().sqrt(), rng.gen::<f64>() * 6.28);
            if (z - a).norm() < 1e-6 {
                continue;
            }
            worst = worst.max(pseudo_hyperbolic_identity_residual(z, a));
        }
        assert!(worst <= 1e-12, "worst residual {worst}");
    }

    #[test]
    fn separation_of_two_points() {
        let seq = ZeroSequence::explicit(vec![c(0.0, 0.0), c(0.9, 0.0)]).unwrap();
        let rep = separation_report(&seq, 2).unwrap();
        assert_abs_diff_eq!(rep.separated_delta, 0.9, epsilon = 1e-15);
    }

    #[test]
    fn exponential_zeros_are_uniformly_separated() {
        let seq = ZeroSequence::generated(ZeroGenerator::Exponential).unwrap();
        let rep = separation_report(&seq, 20).unwrap();
        // adjacent moduli 1-2^{-n}, 1-2^{-n-1} are at distance 1/(3 - 2^{-n})
        assert!(rep.separated_delta >= 1.0 / 3.0);
        assert!(rep.uniformly_separated_inf > 0.0);
    }

    #[test]
    fn schwarz_pick_equality_for_rotation() {
        let b = InnerFunction::finite_blaschke(vec![c(0.0, 0.0)], 0.0).unwrap();
        let worst = schwarz_pick_check(&b, 500, 42).unwrap();
        assert!(worst.abs() <= 1e-12);
    }

    #[test]
    fn schwarz_pick_for_atomic_and_shift() {
        let s = InnerFunction::atomic();
        assert!(schwarz_pick_check(&s, 2000, 1).unwrap() <= 1e-8);
        let sh = s.frostman(c(0.4, 0.0)).unwrap();
        assert!(schwarz_pick_check(&sh, 2000, 2).unwrap() <= 1e-8);
    }

    #[test]
    fn boundary_guard_refuses() {
        let s = InnerFunction::atomic();
        let res = s.eval(c(1.0 - 1e-14, 0.0), 1e-6);
        assert!(matches!(res, Err(Error::TooCloseToBoundary { .. })));
    }

    #[test]
    fn polynomial_generator_requires_convergent_sum() {
        assert!(ZeroSequence::generated(ZeroGenerator::PolynomialDecay { c: 0.9 }).is_err());
        let seq = ZeroSequence::generated(ZeroGenerator::PolynomialDecay { c: 2.0 }).unwrap();
        assert!(seq.tail_bound(100).unwrap() < 0.011);
    }
}
