//! Circle means, truncated norms and the dyadic characterization sums.
//!
//! Everything here reports a [`TruncatedValue`]: the integral or sum cut at a
//! dyadic depth together with its per-shell blocks.  No limit claims are made
//! at this layer; deciding convergence from the blocks is the `verify`
//! module's job, so divergent instances are first-class outputs rather than
//! errors.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{LN_2, TAU};

use crate::error::{Error, Result};
use crate::exec;
use crate::inner::InnerFunction;
use crate::quad;
use crate::weights::{tail_integral, RadialWeight};
use crate::zeros::{annulus_index, dyadic_radius, DiscAverage, DyadicProfile};

/// Relative tolerance for the circle means embedded in norm integrals.
const CIRCLE_TOL: f64 = 1e-7;

/// Cap on radial truncation depth.
pub const MAX_DEPTH: usize = 20;

/// Mixed-norm parameters: inner exponent `p`, outer exponent `q`, weight.
#[derive(Debug, Clone)]
pub struct MixedNormParams {
    pub p: f64,
    pub q: f64,
    pub weight: RadialWeight,
}

impl MixedNormParams {
    pub fn new(p: f64, q: f64, weight: RadialWeight) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() || !(q > 0.0) || !q.is_finite() {
            return Err(Error::invalid(
                "p,q",
                format!("need finite p, q > 0, got ({p}, {q})"),
            ));
        }
        Ok(MixedNormParams { p, q, weight })
    }
}

/// Radial kernel of the mixed-norm integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormKernel {
    /// `ω(r) dr`
    Density,
    /// `ω̂(r)/(1-r) dr`, the equivalent tail kernel.
    TailQuotient,
}

/// A truncated non-negative integral or sum with its per-shell blocks.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct TruncatedValue {
    /// Number of dyadic blocks.
    pub depth: usize,
    /// Total over all blocks (fixed-tree sum of `blocks`).
    pub value: f64,
    pub blocks: Vec<f64>,
}

impl TruncatedValue {
    pub fn from_blocks(blocks: Vec<f64>) -> Self {
        TruncatedValue {
            depth: blocks.len(),
            value: exec::pairwise_sum(&blocks),
            blocks,
        }
    }

    /// Partial sum over the first `k` blocks.
    pub fn partial(&self, k: usize) -> f64 {
        exec::pairwise_sum(&self.blocks[..k.min(self.blocks.len())])
    }

    /// CSV rows `(m, value)` of the partial sums, for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,value\n");
        for k in 1..=self.blocks.len() {
            out.push_str(&format!("{},{}\n", k, self.partial(k)));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Integrands
// ---------------------------------------------------------------------------

/// A function on the disc that circle means can consume.  `magnitude` must
/// return a certified absolute error bound along with `|f(z)|`.
pub trait DiscFunction: Sync {
    fn magnitude(&self, z: Complex64) -> Result<(f64, f64)>;

    /// Complex value for analytic integrands (fractional derivative pipeline).
    fn value(&self, _z: Complex64) -> Result<(Complex64, f64)> {
        Err(Error::Unsupported(
            "this integrand only exposes magnitudes".into(),
        ))
    }
}

/// Magnitude of the mass-`m` atomic singular function without complex exp:
/// `Re((1+z)/(1-z)) = (1-|z|^2)/|1-z|^2`, so
/// `|S_m(z)| = exp(-m (1-|z|^2) / (2 |1-z|^2))`.
#[inline]
fn atomic_magnitude_parts(mass: f64, z: Complex64) -> (f64, f64, f64) {
    let d_sq = (1.0 - z.re) * (1.0 - z.re) + z.im * z.im;
    let mag = (-mass * (1.0 - z.norm_sqr()) / (2.0 * d_sq)).exp();
    // |w| <= m/|1-z| bounds the phase for the rounding estimate
    let w_bound = mass / d_sq.sqrt();
    (mag, d_sq, w_bound)
}

/// `Θ(z)` as an integrand.
pub struct FnOf<'a>(pub &'a InnerFunction);

impl DiscFunction for FnOf<'_> {
    fn magnitude(&self, z: Complex64) -> Result<(f64, f64)> {
        if let InnerFunction::AtomicSingular { mass } = self.0 {
            let (mag, _, w_bound) = atomic_magnitude_parts(*mass, z);
            return Ok((mag, mag * (w_bound * 3.0 + 2.0) * f64::EPSILON));
        }
        let r = self.0.eval(z, 1e-11)?;
        Ok((r.value.norm(), r.error_bound))
    }
    fn value(&self, z: Complex64) -> Result<(Complex64, f64)> {
        let r = self.0.eval(z, 1e-11)?;
        Ok((r.value, r.error_bound))
    }
}

/// `Θ'(z)` as an integrand; the evaluation tolerance scales with the
/// Schwarz–Pick bound `2/(1-|z|)` so the certified error stays relatively
/// small.
pub struct DerivOf<'a>(pub &'a InnerFunction);

impl DiscFunction for DerivOf<'_> {
    fn magnitude(&self, z: Complex64) -> Result<(f64, f64)> {
        if let InnerFunction::AtomicSingular { mass } = self.0 {
            // |S_m'(z)| = m |S_m(z)| / |1-z|^2
            let (s, d_sq, w_bound) = atomic_magnitude_parts(*mass, z);
            let mag = mass * s / d_sq;
            return Ok((mag, mag * (w_bound * 3.0 + 8.0) * f64::EPSILON));
        }
        let tol = 1e-9 * (1.0 + 2.0 / (1.0 - z.norm()));
        let r = self.0.eval_derivative(z, tol)?;
        Ok((r.value.norm(), r.error_bound))
    }
    fn value(&self, z: Complex64) -> Result<(Complex64, f64)> {
        let tol = 1e-9 * (1.0 + 2.0 / (1.0 - z.norm()));
        let r = self.0.eval_derivative(z, tol)?;
        Ok((r.value, r.error_bound))
    }
}

/// `Θ''(z)` as an integrand.
pub struct SecondDerivOf<'a>(pub &'a InnerFunction);

impl DiscFunction for SecondDerivOf<'_> {
    fn magnitude(&self, z: Complex64) -> Result<(f64, f64)> {
        let s = 1.0 - z.norm();
        let tol = 1e-9 * (1.0 + 8.0 / (s * s));
        let r = self.0.eval_second_derivative(z, tol)?;
        Ok((r.value.norm(), r.error_bound))
    }
    fn value(&self, z: Complex64) -> Result<(Complex64, f64)> {
        let s = 1.0 - z.norm();
        let tol = 1e-9 * (1.0 + 8.0 / (s * s));
        let r = self.0.eval_second_derivative(z, tol)?;
        Ok((r.value, r.error_bound))
    }
}

/// `(1 - |Θ(z)|)/(1 - |z|)`, the Schwarz–Pick quotient (magnitude only).
pub struct SchwarzQuotient<'a>(pub &'a InnerFunction);

impl DiscFunction for SchwarzQuotient<'_> {
    fn magnitude(&self, z: Complex64) -> Result<(f64, f64)> {
        let denom = 1.0 - z.norm();
        if let InnerFunction::AtomicSingular { mass } = self.0 {
            let (mag, _, w_bound) = atomic_magnitude_parts(*mass, z);
            let bound = mag * (w_bound * 3.0 + 2.0) * f64::EPSILON;
            return Ok(((1.0 - mag) / denom, bound / denom));
        }
        let r = self.0.eval(z, 1e-11)?;
        Ok(((1.0 - r.value.norm()) / denom, r.error_bound / denom))
    }
}

/// Plain analytic closure (assumed accurate to rounding).
pub struct Analytic<F>(pub F);

impl<F> DiscFunction for Analytic<F>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    fn magnitude(&self, z: Complex64) -> Result<(f64, f64)> {
        let v = (self.0)(z);
        Ok((v.norm(), 4.0 * f64::EPSILON * (1.0 + v.norm())))
    }
    fn value(&self, z: Complex64) -> Result<(Complex64, f64)> {
        let v = (self.0)(z);
        Ok((v, 4.0 * f64::EPSILON * (1.0 + v.norm())))
    }
}

// ---------------------------------------------------------------------------
// Circle means
// ---------------------------------------------------------------------------

fn angular_budget(r: f64) -> usize {
    (64.0 / (1.0 - r)).ceil().max(256.0) as usize
}

/// `m^p` with fast paths for the exponents the suites actually use.
#[inline]
fn pow_fast(m: f64, p: f64) -> f64 {
    if p == 1.0 {
        m
    } else if p == 2.0 {
        m * m
    } else if p == 0.5 {
        m.sqrt()
    } else if p == 1.5 {
        m * m.sqrt()
    } else if p == 0.75 {
        (m * m.sqrt()).sqrt()
    } else if p == 3.0 {
        m * m * m
    } else {
        m.powf(p)
    }
}

/// `M_p(r, f)`: the `p`-mean of `|f|` on the circle of radius `r`.
///
/// Trapezoidal rule on a uniform angular grid with `max(256, 64/(1-r))`
/// nodes, doubled until two successive resolutions agree to `tol`
/// relatively (the first comparison is against the half grid, so the stated
/// budget is paid once when it already suffices; at most six doublings).
pub fn circle_mean(f: &dyn DiscFunction, r: f64, p: f64, tol: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::invalid("r", format!("need r in [0,1), got {r}")));
    }
    if !(p > 0.0) {
        return Err(Error::invalid("p", "need p > 0"));
    }
    let budget = angular_budget(r);
    let mut n = (budget / 2).max(128);
    let mut prev: Option<f64> = None;
    for _ in 0..=7 {
        let (sum, err_sum) = exec::try_map_sum2(n, &|j| {
            let theta = TAU * (j as f64 + 0.5) / n as f64;
            let (mag, bound) = f.magnitude(Complex64::from_polar(r, theta))?;
            let v = pow_fast(mag, p);
            // first-order error propagation; exact difference only when the
            // bound is not small against the magnitude
            let e = if bound < 0.05 * mag {
                p * bound * v / mag
            } else {
                pow_fast(mag + bound, p) - v
            };
            Ok((v, e))
        })?;
        let mean = sum / n as f64;
        let m = mean.powf(1.0 / p);
        let point_err = err_sum / n as f64;
        if point_err > 0.3 * tol * mean + 1e-12 {
            return Err(Error::CannotCertify {
                what: "circle mean integrand".into(),
                tol,
                detail: format!(
                    "accumulated evaluation error {point_err:.3e} vs mean {mean:.3e}"
                ),
            });
        }
        if let Some(pm) = prev {
            if n >= budget && (m - pm).abs() <= tol * m.abs().max(1e-300) {
                return Ok(m);
            }
        }
        prev = Some(m);
        n *= 2;
    }
    Err(Error::CircleMeanNonConvergence {
        previous: prev.unwrap_or(f64::NAN),
        current: f64::NAN,
    })
}

// ---------------------------------------------------------------------------
// Truncated norms
// ---------------------------------------------------------------------------

fn check_depth(m: usize) -> Result<()> {
    if m == 0 || m > MAX_DEPTH {
        return Err(Error::invalid(
            "m",
            format!("need 1 <= m <= {MAX_DEPTH}, got {m}"),
        ));
    }
    Ok(())
}

/// Truncated mixed norm `∫_0^{1-2^{-m}} M_p^q(r, f) k(r) dr` with the kernel
/// `k` either the density `ω` or the tail quotient `ω̂/(1-r)`.
///
/// Blocks are the contributions of the dyadic shells
/// `r ∈ [1-2^{-k}, 1-2^{-k-1})`.
pub fn mixed_norm_truncated(
    f: &dyn DiscFunction,
    params: &MixedNormParams,
    m: usize,
    kernel: NormKernel,
) -> Result<TruncatedValue> {
    check_depth(m)?;
    let gl = quad::gl8();
    let blocks = exec::try_map_collect(m, |k| {
        let mut acc = 0.0;
        for (x, w) in gl.mapped(k as f64, k as f64 + 1.0) {
            let r = quad::radius_at(x);
            let mp = circle_mean(f, r, params.p, CIRCLE_TOL)?;
            let kernel_val = match kernel {
                NormKernel::Density => params.weight.density(r),
                NormKernel::TailQuotient => tail_integral(&params.weight, r)? / (1.0 - r),
            };
            acc += w * mp.powf(params.q) * kernel_val * LN_2 * (-x).exp2();
        }
        Ok(acc.max(0.0))
    })?;
    Ok(TruncatedValue::from_blocks(blocks))
}

/// Running maximum of `M_p(r_k, f)` over the dyadic grid up to depth `m`.
pub fn hardy_norm_truncated(f: &dyn DiscFunction, p: f64, m: usize) -> Result<f64> {
    check_depth(m)?;
    let means = dyadic_means(f, p, m)?;
    Ok(means.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// Increments of `M_p^p` along the dyadic grid, as classification blocks:
/// block `k` is `M_p^p(r_{k+1}) - M_p^p(r_k)`, clipped at zero.  For
/// analytic `f` the means are non-decreasing in `r`, so up to quadrature
/// noise nothing is lost by the clip, and the blocks sum to
/// `M_p^p(r_m) - M_p^p(0)`.
pub fn hardy_increment_blocks(
    f: &dyn DiscFunction,
    p: f64,
    m: usize,
) -> Result<TruncatedValue> {
    check_depth(m)?;
    let means = dyadic_means(f, p, m)?;
    let blocks = (0..m)
        .map(|k| (means[k + 1].powf(p) - means[k].powf(p)).max(0.0))
        .collect();
    Ok(TruncatedValue::from_blocks(blocks))
}

fn dyadic_means(f: &dyn DiscFunction, p: f64, m: usize) -> Result<Vec<f64>> {
    exec::try_map_collect(m + 1, |k| circle_mean(f, dyadic_radius(k), p, CIRCLE_TOL))
}

/// Truncated level-set integral
/// `∫_{|Θ| < C, |z| <= 1-2^{-m}} ω̂(z)/(1-|z|)^{p+1} dA(z)` with per-shell
/// blocks.
pub fn level_set_integral(
    theta: &InnerFunction,
    c_level: f64,
    p: f64,
    weight: &RadialWeight,
    m: usize,
) -> Result<TruncatedValue> {
    check_depth(m)?;
    if !(0.0 < c_level && c_level < 1.0) {
        return Err(Error::invalid("C", "need 0 < C < 1"));
    }
    let gl = quad::gl8();
    let blocks = exec::try_map_collect(m, |k| {
        let mut acc = 0.0;
        for (x, w) in gl.mapped(k as f64, k as f64 + 1.0) {
            let r = quad::radius_at(x);
            let mu = level_measure(theta, r, c_level)?;
            if mu > 0.0 {
                let g = tail_integral(weight, r)? / (1.0 - r).powf(p + 1.0);
                acc += w * g * mu * r * LN_2 * (-x).exp2();
            }
        }
        Ok(acc.max(0.0))
    })?;
    Ok(TruncatedValue::from_blocks(blocks))
}

/// Angular measure of `{θ : |Θ(r e^{iθ})| < C}`.
fn level_measure(theta: &InnerFunction, r: f64, c_level: f64) -> Result<f64> {
    let n = angular_budget(r);
    let f = FnOf(theta);
    let count = exec::try_map_sum(n, &|j| {
        let th = TAU * (j as f64 + 0.5) / n as f64;
        let (mag, _) = f.magnitude(Complex64::from_polar(r, th))?;
        Ok(if mag < c_level { 1.0 } else { 0.0 })
    })?;
    Ok(TAU * count / n as f64)
}

// ---------------------------------------------------------------------------
// Dyadic characterization sums
// ---------------------------------------------------------------------------

/// `Σ_{n<=max_n} ω̂(r_n)/(1-r_n)^{q-q/p} · ∫_{D_δ} υ_n(a)^{q/p} dA(a)` from
/// precomputed disc averages; block `n` is the `n`-th summand.
pub fn averaged_dyadic_sum(
    averages: &[DiscAverage],
    params: &MixedNormParams,
    max_n: usize,
) -> Result<TruncatedValue> {
    let expo = params.q / params.p;
    let mut blocks = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let avg = averages
            .iter()
            .find(|a| a.n == n)
            .ok_or(Error::MissingDiscAverage { n })?;
        if (avg.exponent - expo).abs() > 1e-12 {
            return Err(Error::invalid(
                "averages",
                format!(
                    "disc average at n = {n} has exponent {}, need q/p = {expo}",
                    avg.exponent
                ),
            ));
        }
        let r_n = dyadic_radius(n);
        let w = tail_integral(&params.weight, r_n)? / (1.0 - r_n).powf(params.q - expo);
        blocks.push(w * avg.value);
    }
    Ok(TruncatedValue::from_blocks(blocks))
}

/// `Σ_{n<=max_n} ω̂(r_n) υ_n(a)^{q/p} / (1-r_n)^{q-q/p}` for one dyadic
/// profile.
pub fn single_point_sum(
    profile: &DyadicProfile,
    params: &MixedNormParams,
    max_n: usize,
) -> Result<TruncatedValue> {
    if max_n > profile.max_n {
        return Err(Error::IncompleteZeroList {
            certified: dyadic_radius(profile.max_n + 1),
            needed: dyadic_radius(max_n + 1),
        });
    }
    let expo = params.q / params.p;
    let mut blocks = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let r_n = dyadic_radius(n);
        let w = tail_integral(&params.weight, r_n)? / (1.0 - r_n).powf(params.q - expo);
        blocks.push(w * (profile.count(n) as f64).powf(expo));
    }
    Ok(TruncatedValue::from_blocks(blocks))
}

/// `Σ_n ω̂(z_n)/(1-|z_n|)^{p-1}` over a zero list, grouped into dyadic
/// shells.  With `max_n = None` every zero contributes (finite lists); with
/// `Some(n)` zeros beyond annulus `n` are ignored so only certified-complete
/// shells enter the blocks.
pub fn weighted_zero_sum(
    zeros: &[Complex64],
    p: f64,
    weight: &RadialWeight,
    max_n: Option<usize>,
) -> Result<TruncatedValue> {
    shell_sum(zeros, max_n, |z| {
        let u = 1.0 - z.norm();
        Ok(tail_integral(weight, z.norm())? / u.powf(p - 1.0))
    })
}

/// `Σ_n (1-|z_n|)^alpha` over a zero list, grouped into dyadic shells.
pub fn moduli_power_sum(
    zeros: &[Complex64],
    alpha: f64,
    max_n: Option<usize>,
) -> Result<TruncatedValue> {
    shell_sum(zeros, max_n, |z| Ok((1.0 - z.norm()).powf(alpha)))
}

fn shell_sum(
    zeros: &[Complex64],
    max_n: Option<usize>,
    term: impl Fn(Complex64) -> Result<f64>,
) -> Result<TruncatedValue> {
    let top = match max_n {
        Some(n) => n,
        None => zeros.iter().map(|z| annulus_index(*z)).max().unwrap_or(0),
    };
    let mut blocks = vec![0.0f64; top + 1];
    for z in zeros {
        let n = annulus_index(*z);
        if n <= top {
            blocks[n] += term(*z)?;
        }
    }
    Ok(TruncatedValue::from_blocks(blocks))
}

// ---------------------------------------------------------------------------
// Fractional derivative and Besov norms
// ---------------------------------------------------------------------------

/// Samples of `D^α f` on the circle `|z| = r` at uniform angles.
#[derive(Debug, Clone)]
pub struct FractionalSamples {
    pub values: Vec<Complex64>,
    pub radius: f64,
    pub order: f64,
    /// FFT length that met the aliasing target.
    pub fft_size: usize,
    pub est_error: f64,
}

/// Computes `D^α f(r e^{iθ_j})`, `θ_j = 2πj/n_out`, by sampling `f` on the
/// circle of radius `ρ = min(0.999, (1+r)/2)`, reading Taylor coefficients
/// off an FFT, applying the `(n+1)^α (r/ρ)^n` multiplier and transforming
/// back.  The FFT length doubles until the output stabilizes to `tol`.
pub fn fractional_derivative_circle(
    f: &dyn DiscFunction,
    order: f64,
    r: f64,
    n_out: usize,
    tol: f64,
) -> Result<FractionalSamples> {
    if !(order > 0.0) {
        return Err(Error::invalid("order", "need order > 0"));
    }
    if !n_out.is_power_of_two() {
        return Err(Error::invalid("n_out", "need a power of two"));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::invalid("r", "need r in [0,1)"));
    }
    let rho = 0.999f64.min(0.5 * (1.0 + r));
    let mut m_fft = n_out.max(1024);
    let mut prev: Option<Vec<Complex64>> = None;
    while m_fft <= 1 << 20 {
        let coeffs = taylor_by_fft(f, rho, m_fft)?;
        let mut spectrum = vec![Complex64::new(0.0, 0.0); n_out];
        let ratio = r / rho;
        let mut pow = 1.0f64;
        for (n, c) in coeffs.iter().enumerate() {
            // c ≈ a_n ρ^n; the multiplier moves everything to |z| = r.
            spectrum[n % n_out] += c * ((n + 1) as f64).powf(order) * pow;
            pow *= ratio;
            if pow < 1e-320 {
                break;
            }
        }
        inverse_fft(&mut spectrum);
        let scale = spectrum.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if let Some(p) = &prev {
            let diff = spectrum
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if diff <= tol * (1.0 + scale) {
                return Ok(FractionalSamples {
                    values: spectrum,
                    radius: r,
                    order,
                    fft_size: m_fft,
                    est_error: diff,
                });
            }
        }
        prev = Some(spectrum);
        m_fft *= 2;
    }
    Err(Error::CannotCertify {
        what: format!("fractional derivative of order {order} at r = {r}"),
        tol,
        detail: "aliasing not controlled at FFT length 2^20".into(),
    })
}

/// Taylor coefficients scaled by `ρ^n`: entry `n` approximates `a_n ρ^n`.
pub fn taylor_by_fft(f: &dyn DiscFunction, rho: f64, m_fft: usize) -> Result<Vec<Complex64>> {
    let samples = exec::try_map_collect(m_fft, |j| {
        let th = TAU * j as f64 / m_fft as f64;
        f.value(Complex64::from_polar(rho, th)).map(|(v, _)| v)
    })?;
    let mut buf = samples;
    forward_fft(&mut buf);
    let scale = 1.0 / m_fft as f64;
    for v in &mut buf {
        *v *= scale;
    }
    Ok(buf)
}

fn forward_fft(buf: &mut [Complex64]) {
    let mut planner = rustfft::FftPlanner::<f64>::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

fn inverse_fft(buf: &mut [Complex64]) {
    let mut planner = rustfft::FftPlanner::<f64>::new();
    planner.plan_fft_inverse(buf.len()).process(buf);
}

/// Taylor coefficients of the mass-`m` atomic singular inner function from
/// the three-term recurrence induced by `(1-z)^2 S' = -m S`.
pub fn atomic_taylor_coefficients(mass: f64, len: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(len);
    if len == 0 {
        return c;
    }
    c.push((-0.5 * mass).exp());
    if len == 1 {
        return c;
    }
    c.push(-mass * c[0]);
    for n in 1..len - 1 {
        let nf = n as f64;
        let next = ((2.0 * nf - mass) * c[n] - (nf - 1.0) * c[n - 1]) / (nf + 1.0);
        c.push(next);
    }
    c
}

/// Truncated Besov norm
/// `∫_0^{1-2^{-m}} M_p^q(r, D^{1+α} f)(1-r)^{q-1} dr` with per-shell blocks.
///
/// For `p = 2` the circle means reduce to coefficient sums (Parseval), which
/// keeps deep truncations affordable: coefficients come from the atomic
/// recurrence when available and from one global FFT otherwise.  Other `p`
/// run the per-radius FFT pipeline and are limited to `m <= 14`.
pub fn besov_norm_truncated(
    theta: &InnerFunction,
    p: f64,
    q: f64,
    alpha: f64,
    m: usize,
) -> Result<TruncatedValue> {
    check_depth(m)?;
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "need alpha > 0"));
    }
    if !(q > 0.0) {
        return Err(Error::invalid("q", "need q > 0"));
    }
    if (p - 2.0).abs() < 1e-12 {
        return besov_by_coefficients(theta, q, alpha, m);
    }
    if m > 14 {
        return Err(Error::invalid(
            "m",
            "besov for p != 2 runs the per-radius FFT pipeline; use m <= 14",
        ));
    }
    let gl = quad::gl8();
    let f = FnOf(theta);
    let blocks = exec::try_map_collect(m, |k| {
        let mut acc = 0.0;
        for (x, w) in gl.mapped(k as f64, k as f64 + 1.0) {
            let r = quad::radius_at(x);
            let mp = fractional_mean(&f, 1.0 + alpha, r, p)?;
            acc += w * mp.powf(q) * (1.0 - r).powf(q - 1.0) * LN_2 * (-x).exp2();
        }
        Ok(acc.max(0.0))
    })?;
    Ok(TruncatedValue::from_blocks(blocks))
}

/// `M_p(r, D^{order} f)` from the FFT samples, doubling the angular
/// resolution until the mean stabilizes.
pub fn fractional_mean(f: &dyn DiscFunction, order: f64, r: f64, p: f64) -> Result<f64> {
    let mut n_out = angular_budget(r).next_power_of_two();
    let mut prev: Option<f64> = None;
    for _ in 0..=6 {
        let samples = fractional_derivative_circle(f, order, r, n_out, 1e-8)?;
        let sum = exec::map_sum(n_out, &|j| samples.values[j].norm().powf(p));
        let mean = (sum / n_out as f64).powf(1.0 / p);
        if let Some(pm) = prev {
            if (mean - pm).abs() <= CIRCLE_TOL * mean.max(1e-300) {
                return Ok(mean);
            }
        }
        prev = Some(mean);
        n_out *= 2;
    }
    Err(Error::CircleMeanNonConvergence {
        previous: prev.unwrap_or(f64::NAN),
        current: f64::NAN,
    })
}

fn besov_by_coefficients(
    theta: &InnerFunction,
    q: f64,
    alpha: f64,
    m: usize,
) -> Result<TruncatedValue> {
    // Terms r^{2n} are dead once 2n(1-r) passes ~45 plus polynomial slack.
    let n_cut = 40usize << m;
    let coeff_sq: Vec<f64> = match theta {
        InnerFunction::AtomicSingular { mass } => atomic_taylor_coefficients(*mass, n_cut)
            .into_iter()
            .map(|c| c * c)
            .collect(),
        _ => {
            if m > 14 {
                return Err(Error::invalid(
                    "m",
                    "global FFT coefficients are limited to m <= 14 for this function",
                ));
            }
            let rho = 1.0 - 0.5f64.powi(m as i32 + 2);
            let m_fft = (n_cut.next_power_of_two() * 4).clamp(4096, 1 << 22);
            let coeffs = taylor_by_fft(&FnOf(theta), rho, m_fft)?;
            let mut inv = 1.0f64;
            let inv_rho = 1.0 / rho;
            coeffs
                .iter()
                .take(n_cut.min(m_fft))
                .map(|c| {
                    let a = c.norm() * inv;
                    inv *= inv_rho;
                    a * a
                })
                .collect()
        }
    };
    let weighted: Vec<f64> = coeff_sq
        .iter()
        .enumerate()
        .map(|(n, c)| ((n + 1) as f64).powf(2.0 * (1.0 + alpha)) * c)
        .collect();
    let gl = quad::gl8();
    let blocks = exec::try_map_collect(m, |k| {
        let mut acc = 0.0;
        for (x, w) in gl.mapped(k as f64, k as f64 + 1.0) {
            let r = quad::radius_at(x);
            let m2 = parseval_mean_sq(&weighted, r);
            acc += w * m2.powf(0.5 * q) * (1.0 - r).powf(q - 1.0) * LN_2 * (-x).exp2();
        }
        Ok(acc.max(0.0))
    })?;
    Ok(TruncatedValue::from_blocks(blocks))
}

/// `Σ c_n r^{2n}` with early exit once the geometric envelope is dead.
fn parseval_mean_sq(weighted: &[f64], r: f64) -> f64 {
    let q = r * r;
    let horizon = ((60.0 / (1.0 - r)) as usize).clamp(16, weighted.len());
    let mut acc = 0.0;
    let mut pow = 1.0f64;
    for &c in weighted.iter().take(horizon) {
        acc += c * pow;
        pow *= q;
        if pow < 1e-320 {
            break;
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Boundary-angle sums
// ---------------------------------------------------------------------------

/// `∫_0^{2π} (Σ_{z_n ∈ Γ_η(e^{iθ})} 1/(1-|z_n|))^p dθ`, where `Γ_η(e^{iθ})`
/// is the Stolz angle `{|z - e^{iθ}| <= η (1-|z|)}`.
///
/// A zero is visible from an arc of boundary angles whose width shrinks like
/// `1-|z_n|`, so the integrand is a step function with very narrow spikes; a
/// fixed angular grid misses them entirely once the zeros are deep.  The
/// integral is instead computed exactly by sweeping the arc endpoints.
pub fn stolz_sum(zeros: &[Complex64], eta: f64, p: f64) -> Result<f64> {
    if !(eta > 1.0) {
        return Err(Error::invalid("eta", "need eta > 1"));
    }
    // membership arcs: |z - e^{iθ}|^2 <= η^2 (1-|z|)^2 is
    // cos(θ - arg z) >= (1 + |z|^2 - η^2 (1-|z|)^2) / (2|z|)
    #[derive(Clone, Copy)]
    struct Event {
        theta: f64,
        delta: f64,
    }
    let mut events: Vec<Event> = Vec::with_capacity(2 * zeros.len());
    let mut everywhere = 0.0f64; // zeros visible from the whole circle
    for z in zeros {
        let r = z.norm();
        let value = 1.0 / (1.0 - r);
        let cos_w = if r < 1e-12 {
            -1.0
        } else {
            (1.0 + r * r - eta * eta * (1.0 - r) * (1.0 - r)) / (2.0 * r)
        };
        if cos_w <= -1.0 {
            everywhere += value;
            continue;
        }
        if cos_w >= 1.0 {
            continue;
        }
        let w = cos_w.acos();
        let center = z.arg();
        let (lo, hi) = (center - w, center + w);
        // unwrap to [0, 2π), splitting arcs that cross the cut
        let lo_m = lo.rem_euclid(TAU);
        let hi_m = hi.rem_euclid(TAU);
        if lo_m <= hi_m {
            events.push(Event { theta: lo_m, delta: value });
            events.push(Event { theta: hi_m, delta: -value });
        } else {
            events.push(Event { theta: 0.0, delta: value });
            events.push(Event { theta: hi_m, delta: -value });
            events.push(Event { theta: lo_m, delta: value });
            events.push(Event { theta: TAU, delta: -value });
        }
    }
    events.sort_by(|a, b| a.theta.partial_cmp(&b.theta).unwrap());
    let mut total = 0.0f64;
    let mut active = everywhere;
    let mut cursor = 0.0f64;
    for ev in &events {
        if ev.theta > cursor && active > 0.0 {
            total += (ev.theta - cursor) * active.powf(p);
        }
        cursor = cursor.max(ev.theta);
        active = (active + ev.delta).max(0.0);
    }
    if cursor < TAU && active > 0.0 {
        total += (TAU - cursor) * active.powf(p);
    }
    Ok(total)
}

/// Boundary quadrature of
/// `(1/2π) ∫_0^{2π} (Σ_n (1-|z_n|^2)/|z_n - e^{iθ}|^2)^p dθ`, which equals
/// `‖B'‖_{H^p}^p` for the Blaschke product with zeros `{z_n}`.
pub fn hp_blaschke_identity_rhs(zeros: &[Complex64], p: f64) -> Result<f64> {
    let mut n = 4096usize;
    let mut prev: Option<f64> = None;
    for _ in 0..=6 {
        let sum = exec::map_sum(n, &|j| {
            let th = TAU * (j as f64 + 0.5) / n as f64;
            let e = Complex64::from_polar(1.0, th);
            let inner: f64 = zeros
                .iter()
                .map(|z| (1.0 - z.norm_sqr()) / (z - e).norm_sqr())
                .sum();
            inner.powf(p)
        });
        let mean = sum / n as f64;
        if let Some(pm) = prev {
            if (mean - pm).abs() <= 1e-8 * mean.abs().max(1e-300) {
                return Ok(mean);
            }
        }
        prev = Some(mean);
        n *= 2;
    }
    Err(Error::CircleMeanNonConvergence {
        previous: prev.unwrap_or(f64::NAN),
        current: f64::NAN,
    })
}
