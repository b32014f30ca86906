//! Convergence verdicts and cross-checking suites.
//!
//! A [`TruncatedValue`] carries per-shell blocks; [`classify`] fits the decay
//! of the deepest blocks and calls the underlying series convergent,
//! divergent or inconclusive.  The suite runners compute two (or more)
//! independent pipelines for the same membership question — truncated norm
//! vs. zero-count sum vs. level-set integral — and report whether the
//! verdicts coincide and whether the cross-pipeline ratios stay inside a
//! bounded window.  Asymptotic comparisons are always checked as
//! bounded-ratio stability, never as specific constants.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inner::InnerFunction;
use crate::norms::{
    self, averaged_dyadic_sum, besov_norm_truncated, hardy_increment_blocks, level_set_integral,
    mixed_norm_truncated, moduli_power_sum, single_point_sum, weighted_zero_sum, DerivOf,
    MixedNormParams, NormKernel, SecondDerivOf, TruncatedValue,
};
use crate::weights::{
    classify_weight, shift_weight, Membership, RadialWeight, WeightClassReport,
};
use crate::zeros::{
    atomic_zeros_to_radius, disc_average_profile, dyadic_radius, find_zeros_numeric,
    frostman_profile, FrostmanZeroSource,
};

/// Number of blocks entering the least-squares decay fit.
pub const FIT_BLOCKS: usize = 6;
/// A fitted log2 block slope at or below this is convergent...
pub const SLOPE_CONVERGENT_MAX: f64 = -0.2;
/// ...and at or above this (with non-shrinking blocks) is divergent.
pub const SLOPE_DIVERGENT_MIN: f64 = -0.05;
/// Maximum rms log2 residual for a convergent call.
pub const RESIDUAL_MAX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

impl Verdict {
    pub fn conclusive(self) -> bool {
        self != Verdict::Inconclusive
    }
}

/// Verdict with the fitted block-decay diagnostics behind it.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceVerdict {
    pub verdict: Verdict,
    /// Least-squares slope of log2(block) per block index (log2 of the
    /// typical block ratio); `-inf` when the tail blocks vanish.
    pub fitted_slope: f64,
    /// First and last block index used by the fit, in original (ungrouped)
    /// block units.
    pub depths_used: [usize; 2],
    /// rms residual of the fit in log2 units.
    pub residual: f64,
    /// Number of consecutive blocks summed per fit point.
    pub group: usize,
}

impl ConvergenceVerdict {
    fn inconclusive(reason_depths: [usize; 2], group: usize) -> Self {
        ConvergenceVerdict {
            verdict: Verdict::Inconclusive,
            fitted_slope: f64::NAN,
            depths_used: reason_depths,
            residual: f64::NAN,
            group,
        }
    }
}

/// Classifies a truncated series from its per-shell blocks.
///
/// The last [`FIT_BLOCKS`] blocks are fitted by least squares in log2;
/// geometric decay steeper than 2^[`SLOPE_CONVERGENT_MAX`] per block (with a
/// clean fit) is convergent, flat or growing blocks are divergent, and the
/// band in between — where slow logarithmic divergence hides — is
/// inconclusive rather than guessed.
pub fn classify(tv: &TruncatedValue) -> ConvergenceVerdict {
    classify_grouped(tv, 1)
}

/// [`classify`] after summing blocks in consecutive groups of `group`.
///
/// Grouping rescales a shallow per-shell slope into the classifier's
/// decision range; a trailing incomplete group is discarded.
pub fn classify_grouped(tv: &TruncatedValue, group: usize) -> ConvergenceVerdict {
    assert!(group >= 1);
    let grouped: Vec<f64> = tv
        .blocks
        .chunks_exact(group)
        .map(|c| c.iter().sum())
        .collect();
    if grouped.len() < FIT_BLOCKS {
        return ConvergenceVerdict::inconclusive([0, tv.blocks.len().saturating_sub(1)], group);
    }
    let start = grouped.len() - FIT_BLOCKS;
    let window = &grouped[start..];
    let depths = [start * group, grouped.len() * group - 1];

    let positive = window.iter().filter(|b| **b > 0.0).count();
    if positive == 0 {
        // Nothing left in the tail: the series has terminated.
        return ConvergenceVerdict {
            verdict: Verdict::Convergent,
            fitted_slope: f64::NEG_INFINITY,
            depths_used: depths,
            residual: 0.0,
            group,
        };
    }
    if positive < FIT_BLOCKS {
        // Mixed zero and nonzero blocks: convergent if the tail has gone
        // quiet, otherwise unresolved.
        let trailing_zero = window.iter().rev().take_while(|b| **b <= 0.0).count();
        if trailing_zero >= 3 {
            return ConvergenceVerdict {
                verdict: Verdict::Convergent,
                fitted_slope: f64::NEG_INFINITY,
                depths_used: depths,
                residual: 0.0,
                group,
            };
        }
        return ConvergenceVerdict::inconclusive(depths, group);
    }

    let logs: Vec<f64> = window.iter().map(|b| b.log2()).collect();
    let n = logs.len() as f64;
    let xbar = (logs.len() - 1) as f64 / 2.0;
    let ybar = logs.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (i, y) in logs.iter().enumerate() {
        let dx = i as f64 - xbar;
        sxx += dx * dx;
        sxy += dx * (y - ybar);
    }
    let slope = sxy / sxx;
    let residual = (logs
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let fit = ybar + slope * (i as f64 - xbar);
            (y - fit) * (y - fit)
        })
        .sum::<f64>()
        / n)
        .sqrt();

    let per_block_slope = slope / group as f64 * group as f64; // slope per fit point
    let verdict = if per_block_slope <= SLOPE_CONVERGENT_MAX && residual <= RESIDUAL_MAX {
        Verdict::Convergent
    } else if per_block_slope >= SLOPE_DIVERGENT_MIN && window[FIT_BLOCKS - 1] >= window[0] {
        Verdict::Divergent
    } else {
        Verdict::Inconclusive
    };
    ConvergenceVerdict {
        verdict,
        fitted_slope: slope,
        depths_used: depths,
        residual,
        group,
    }
}

// ---------------------------------------------------------------------------
// Ratio reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatioPair {
    pub m: usize,
    pub left: f64,
    pub right: f64,
    pub ratio: f64,
}

/// Two-sided comparison of truncated quantities across depths.
#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub pairs: Vec<RatioPair>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub window: [f64; 2],
    pub window_ok: bool,
}

impl RatioReport {
    pub fn new(pairs: Vec<RatioPair>, window: [f64; 2]) -> Self {
        let ratio_min = pairs.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
        let ratio_max = pairs
            .iter()
            .map(|p| p.ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        let window_ok = ratio_min >= window[0] && ratio_max <= window[1];
        RatioReport {
            pairs,
            ratio_min,
            ratio_max,
            window,
            window_ok,
        }
    }

    /// Multiplicative drift of the ratio over the depth range.
    pub fn drift(&self) -> f64 {
        self.ratio_max / self.ratio_min
    }
}

// ---------------------------------------------------------------------------
// Settings and hypothesis stamps
// ---------------------------------------------------------------------------

/// Depth and grid parameters shared by the suites.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifySettings {
    /// Radial truncation depth for norm-side integrals.
    pub m_norm: usize,
    /// Dyadic depth for zero-count and zero-sum sides.
    pub max_n: usize,
    /// Disc-average grid (equal-area rings x angles).
    pub nodes_r: usize,
    pub nodes_theta: usize,
    /// Acceptance window for cross-pipeline ratios.
    pub window: [f64; 2],
    pub seed: u64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            m_norm: 14,
            max_n: 20,
            nodes_r: 24,
            nodes_theta: 48,
            window: [1.0 / 50.0, 50.0],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hypothesis {
    Satisfied,
    Violated,
    Unverified,
}

/// Result of checking a suite's weight hypotheses against the empirical
/// classification; suites run either way and stamp the report.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisStamp {
    pub status: Hypothesis,
    pub detail: String,
}

const EXPONENT_MARGIN: f64 = 0.02;

fn strictly_less(x: f64, bound: f64) -> Option<bool> {
    if x < bound - EXPONENT_MARGIN {
        Some(true)
    } else if x > bound + EXPONENT_MARGIN {
        Some(false)
    } else {
        None
    }
}

/// Checks the two-sided doubling hypotheses for the averaged-sum and
/// single-point suites: for `p <= 1` the upper exponent must stay below
/// `2q - q/p`; for `p > 1` it must stay below `q` while the lower exponent
/// exceeds `q - q/p`.
pub fn mixed_norm_hypothesis(p: f64, q: f64, report: &WeightClassReport) -> HypothesisStamp {
    if report.in_dhat.verdict != Membership::Member
        || report.in_dcheck.verdict != Membership::Member
    {
        let status = if report.in_dhat.verdict == Membership::NotMember
            || report.in_dcheck.verdict == Membership::NotMember
        {
            Hypothesis::Violated
        } else {
            Hypothesis::Unverified
        };
        return HypothesisStamp {
            status,
            detail: "weight not certified two-sided doubling".into(),
        };
    }
    let (alpha, beta) = (report.alpha_hat, report.beta_hat);
    let checks: Vec<Option<bool>> = if p <= 1.0 {
        vec![strictly_less(beta, 2.0 * q - q / p)]
    } else {
        vec![
            strictly_less(beta, q),
            strictly_less(-(q - q / p), -alpha), // alpha > q - q/p
        ]
    };
    let status = if checks.iter().any(|c| *c == Some(false)) {
        Hypothesis::Violated
    } else if checks.iter().all(|c| *c == Some(true)) {
        Hypothesis::Satisfied
    } else {
        Hypothesis::Unverified
    };
    HypothesisStamp {
        status,
        detail: format!(
            "alpha_hat = {alpha:.4}, beta_hat = {beta:.4} against (p, q) = ({p}, {q})"
        ),
    }
}

fn weight_report(weight: &RadialWeight) -> Result<WeightClassReport> {
    classify_weight(weight, &[], 16)
}

fn zero_source(theta: &InnerFunction) -> FrostmanZeroSource<'_> {
    match theta {
        InnerFunction::AtomicSingular { mass } => FrostmanZeroSource::AtomicExact { mass: *mass },
        _ => FrostmanZeroSource::Numeric {
            theta,
            tol: 1e-9,
        },
    }
}

/// Zeros of `Θ_a` complete up to the dyadic radius `r_{max_n+1}`.
fn shifted_zeros(theta: &InnerFunction, a: Complex64, max_n: usize) -> Result<Vec<Complex64>> {
    let r_cover = dyadic_radius(max_n + 1);
    match theta {
        InnerFunction::AtomicSingular { mass } => atomic_zeros_to_radius(a, *mass, r_cover),
        _ => Ok(find_zeros_numeric(theta, a, r_cover, 1e-9)?.zeros_complex()),
    }
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

/// Averaged dyadic sum vs. truncated mixed norm of the derivative, compared
/// as a ratio across depths (suite `theorem1b`).
#[derive(Debug, Clone, Serialize)]
pub struct AveragedSumReport {
    pub hypothesis: HypothesisStamp,
    pub ratio: RatioReport,
    pub verdict_norm: ConvergenceVerdict,
    pub verdict_sum: ConvergenceVerdict,
    pub agree: Option<bool>,
}

pub fn theorem1b_suite(
    theta: &InnerFunction,
    p: f64,
    q: f64,
    weight: &RadialWeight,
    delta: f64,
    m_lo: usize,
    m_hi: usize,
    settings: &VerifySettings,
) -> Result<AveragedSumReport> {
    if m_lo < 1 || m_lo > m_hi {
        return Err(Error::invalid("m_range", "need 1 <= m_lo <= m_hi"));
    }
    let params = MixedNormParams::new(p, q, weight.clone())?;
    let hypothesis = mixed_norm_hypothesis(p, q, &weight_report(weight)?);
    let norm = mixed_norm_truncated(&DerivOf(theta), &params, m_hi, NormKernel::Density)?;
    let averages = disc_average_profile(
        &zero_source(theta),
        delta,
        q / p,
        m_hi,
        settings.nodes_r,
        settings.nodes_theta,
    )?;
    let sum = averaged_dyadic_sum(&averages, &params, m_hi)?;
    let pairs = (m_lo..=m_hi)
        .map(|m| {
            let left = norm.partial(m);
            let right = sum.partial(m + 1);
            RatioPair {
                m,
                left,
                right,
                ratio: left / right,
            }
        })
        .collect();
    let ratio = RatioReport::new(pairs, settings.window);
    let verdict_norm = classify(&norm);
    let verdict_sum = classify(&sum);
    let agree = match (verdict_norm.verdict.conclusive(), verdict_sum.verdict.conclusive()) {
        (true, true) => Some(verdict_norm.verdict == verdict_sum.verdict),
        _ => None,
    };
    Ok(AveragedSumReport {
        hypothesis,
        ratio,
        verdict_norm,
        verdict_sum,
        agree,
    })
}

/// Single-parameter dyadic sum vs. truncated mixed norm (suite `theorem1`).
#[derive(Debug, Clone, Serialize)]
pub struct PointSumReport {
    pub hypothesis: HypothesisStamp,
    pub verdict_sum: ConvergenceVerdict,
    pub verdict_norm: ConvergenceVerdict,
    pub agree: Option<bool>,
    pub sum: TruncatedValue,
    pub norm: TruncatedValue,
}

pub fn theorem1_suite(
    theta: &InnerFunction,
    p: f64,
    q: f64,
    weight: &RadialWeight,
    a: Complex64,
    settings: &VerifySettings,
) -> Result<PointSumReport> {
    if q > p {
        return Err(Error::invalid("q", format!("suite needs q <= p, got q = {q} > p = {p}")));
    }
    let params = MixedNormParams::new(p, q, weight.clone())?;
    let hypothesis = mixed_norm_hypothesis(p, q, &weight_report(weight)?);
    let profile = frostman_profile(&zero_source(theta), a, settings.max_n)?;
    let sum = single_point_sum(&profile, &params, settings.max_n)?;
    let norm = mixed_norm_truncated(&DerivOf(theta), &params, settings.m_norm, NormKernel::Density)?;
    let verdict_sum = classify(&sum);
    let verdict_norm = classify(&norm);
    let agree = match (verdict_sum.verdict.conclusive(), verdict_norm.verdict.conclusive()) {
        (true, true) => Some(verdict_sum.verdict == verdict_norm.verdict),
        _ => None,
    };
    Ok(PointSumReport {
        hypothesis,
        verdict_sum,
        verdict_norm,
        agree,
        sum,
        norm,
    })
}

/// Bergman norm vs. weighted zero sum vs. level-set integral (suite
/// `theorem3`).
#[derive(Debug, Clone, Serialize)]
pub struct BergmanReport {
    pub hypothesis: HypothesisStamp,
    pub verdict_norm: ConvergenceVerdict,
    pub verdict_zero_sum: ConvergenceVerdict,
    pub verdict_level_set: ConvergenceVerdict,
    pub coherent: Option<bool>,
}

pub fn theorem3_suite(
    theta: &InnerFunction,
    p: f64,
    weight: &RadialWeight,
    a: Complex64,
    c_level: f64,
    settings: &VerifySettings,
) -> Result<BergmanReport> {
    let params = MixedNormParams::new(p, p, weight.clone())?;
    let hypothesis = mixed_norm_hypothesis(p, p, &weight_report(weight)?);
    let norm = mixed_norm_truncated(&DerivOf(theta), &params, settings.m_norm, NormKernel::Density)?;
    let zeros = shifted_zeros(theta, a, settings.max_n)?;
    let zsum = weighted_zero_sum(&zeros, p, weight, Some(settings.max_n))?;
    let level = level_set_integral(theta, c_level, p, weight, settings.m_norm)?;
    let verdict_norm = classify(&norm);
    let verdict_zero_sum = classify(&zsum);
    let verdict_level_set = classify(&level);
    let coherent = coherence(&[
        verdict_norm.verdict,
        verdict_zero_sum.verdict,
        verdict_level_set.verdict,
    ]);
    Ok(BergmanReport {
        hypothesis,
        verdict_norm,
        verdict_zero_sum,
        verdict_level_set,
        coherent,
    })
}

/// Agreement of conclusive verdicts: `None` when fewer than two are
/// conclusive.
fn coherence(verdicts: &[Verdict]) -> Option<bool> {
    let conclusive: Vec<Verdict> = verdicts.iter().copied().filter(|v| v.conclusive()).collect();
    if conclusive.len() < 2 {
        return None;
    }
    Some(conclusive.windows(2).all(|w| w[0] == w[1]))
}

/// Hardy membership of `Θ'` against the Bergman scale, the moduli power sum
/// and the unweighted level-set integral (suite `corollary-hp`).
#[derive(Debug, Clone, Serialize)]
pub struct HardyChainReport {
    pub verdict_hardy: ConvergenceVerdict,
    pub verdict_bergman: Vec<(f64, ConvergenceVerdict)>,
    pub verdict_zero_sum: ConvergenceVerdict,
    pub verdict_level_set: ConvergenceVerdict,
    pub coherent: Option<bool>,
}

pub fn corollary_hp_suite(
    theta: &InnerFunction,
    p: f64,
    a: Complex64,
    alpha_list: &[f64],
    settings: &VerifySettings,
) -> Result<HardyChainReport> {
    if !(0.5 < p && p < 1.0) {
        return Err(Error::invalid("p", format!("suite needs 1/2 < p < 1, got {p}")));
    }
    let verdict_hardy = classify(&hardy_increment_blocks(
        &DerivOf(theta),
        p,
        settings.m_norm,
    )?);
    let mut verdict_bergman = Vec::new();
    for &alpha in alpha_list {
        let w = RadialWeight::power(alpha)?;
        let params = MixedNormParams::new(p + alpha + 1.0, p + alpha + 1.0, w)?;
        let tv = mixed_norm_truncated(&DerivOf(theta), &params, settings.m_norm, NormKernel::Density)?;
        verdict_bergman.push((alpha, classify(&tv)));
    }
    let zeros = shifted_zeros(theta, a, settings.max_n)?;
    let verdict_zero_sum = classify(&moduli_power_sum(&zeros, 1.0 - p, Some(settings.max_n))?);
    // ∫_{|Θ|<C} dA/(1-|z|)^{p+1} equals the weighted level-set integral at
    // exponent p+1 with ω ≡ 1 (whose tail is 1-r).
    let verdict_level_set = classify(&level_set_integral(
        theta,
        0.5,
        p + 1.0,
        &RadialWeight::one(),
        settings.m_norm,
    )?);
    let mut all = vec![
        verdict_hardy.verdict,
        verdict_zero_sum.verdict,
        verdict_level_set.verdict,
    ];
    all.extend(verdict_bergman.iter().map(|(_, v)| v.verdict));
    let coherent = coherence(&all);
    Ok(HardyChainReport {
        verdict_hardy,
        verdict_bergman,
        verdict_zero_sum,
        verdict_level_set,
        coherent,
    })
}

/// Besov norm vs. the averaged dyadic sum with kernel
/// `(1-r_n)^{q/p - αq}` (suite `besov`).
///
/// Both sides are classified on octave-grouped blocks (three shells per fit
/// point): near the Besov threshold the per-shell slope is too shallow for
/// the classifier's decision band, and grouping rescales it without touching
/// the convergence class.
#[derive(Debug, Clone, Serialize)]
pub struct BesovReport {
    pub verdict_norm: ConvergenceVerdict,
    pub verdict_sum: ConvergenceVerdict,
    pub agree: Option<bool>,
    pub norm: TruncatedValue,
    pub sum: TruncatedValue,
}

/// Besov depths: the norm side needs 18 shells for six octave groups; the
/// sum side is cheap and runs deeper.
const BESOV_M_NORM: usize = 18;
const BESOV_MAX_N: usize = 24;
const BESOV_GROUP: usize = 3;

pub fn besov_suite(
    theta: &InnerFunction,
    p: f64,
    q: f64,
    alpha: f64,
    delta: f64,
    settings: &VerifySettings,
) -> Result<BesovReport> {
    let lo = (1.0 / p - 1.0).max(0.0);
    let hi = 1.0 / p;
    if !(lo < alpha && alpha < hi) {
        return Err(Error::invalid(
            "alpha",
            format!("suite needs max(0, 1/p - 1) < alpha < 1/p, got {alpha} outside ({lo}, {hi})"),
        ));
    }
    let m_norm = if (p - 2.0).abs() < 1e-12 {
        BESOV_M_NORM
    } else {
        settings.m_norm.min(12)
    };
    let norm = besov_norm_truncated(theta, p, q, alpha, m_norm)?;
    let averages = disc_average_profile(
        &zero_source(theta),
        delta,
        q / p,
        BESOV_MAX_N,
        settings.nodes_r,
        settings.nodes_theta,
    )?;
    let expo = q / p - alpha * q;
    let blocks: Vec<f64> = (0..=BESOV_MAX_N)
        .map(|n| (1.0 - dyadic_radius(n)).powf(expo) * averages[n].value)
        .collect();
    let sum = TruncatedValue::from_blocks(blocks);
    let verdict_norm = classify_grouped(&norm, BESOV_GROUP);
    let verdict_sum = classify_grouped(&sum, BESOV_GROUP);
    let agree = match (verdict_norm.verdict.conclusive(), verdict_sum.verdict.conclusive()) {
        (true, true) => Some(verdict_norm.verdict == verdict_sum.verdict),
        _ => None,
    };
    Ok(BesovReport {
        verdict_norm,
        verdict_sum,
        agree,
        norm,
        sum,
    })
}

/// Second derivative in the Bergman space `A^p_{(1-r)^{p-1}}` vs. `Θ'` in
/// the Hardy space `H^p` (suite `remark1`).
#[derive(Debug, Clone, Serialize)]
pub struct SecondDerivReport {
    pub verdict_second_deriv: ConvergenceVerdict,
    pub verdict_hardy: ConvergenceVerdict,
    pub agree: Option<bool>,
}

pub fn remark1_suite(
    theta: &InnerFunction,
    p: f64,
    settings: &VerifySettings,
) -> Result<SecondDerivReport> {
    if !(p > 0.5) {
        return Err(Error::invalid("p", format!("suite needs p > 1/2, got {p}")));
    }
    let w = RadialWeight::power(p - 1.0)?;
    let params = MixedNormParams::new(p, p, w)?;
    let second = mixed_norm_truncated(
        &SecondDerivOf(theta),
        &params,
        settings.m_norm,
        NormKernel::Density,
    )?;
    let hardy = hardy_increment_blocks(&DerivOf(theta), p, settings.m_norm)?;
    let verdict_second_deriv = classify(&second);
    let verdict_hardy = classify(&hardy);
    let agree = match (
        verdict_second_deriv.verdict.conclusive(),
        verdict_hardy.verdict.conclusive(),
    ) {
        (true, true) => Some(verdict_second_deriv.verdict == verdict_hardy.verdict),
        _ => None,
    };
    Ok(SecondDerivReport {
        verdict_second_deriv,
        verdict_hardy,
        agree,
    })
}

/// Ratio stability of `‖Θ'‖^q_{A^{p,q}_ω}` against
/// `‖Θ'‖^{q+x}_{A^{p+xp/q, q+x}_{ω_x}}` across truncation depths.
pub fn shift_equivalence_report(
    theta: &InnerFunction,
    p: f64,
    q: f64,
    x: f64,
    weight: &RadialWeight,
    m_lo: usize,
    m_hi: usize,
    window: [f64; 2],
) -> Result<RatioReport> {
    if !(x > 0.0) {
        return Err(Error::invalid("x", "need x > 0"));
    }
    let left_params = MixedNormParams::new(p, q, weight.clone())?;
    let shifted = shift_weight(weight, x)?;
    let right_params =
        MixedNormParams::new(p + x * p / q, q + x, shifted.weight.clone())?;
    let left = mixed_norm_truncated(&DerivOf(theta), &left_params, m_hi, NormKernel::Density)?;
    let right = mixed_norm_truncated(&DerivOf(theta), &right_params, m_hi, NormKernel::Density)?;
    let pairs = (m_lo..=m_hi)
        .map(|m| {
            let l = left.partial(m);
            let r = right.partial(m);
            RatioPair {
                m,
                left: l,
                right: r,
                ratio: l / r,
            }
        })
        .collect();
    Ok(RatioReport::new(pairs, window))
}

/// Pairwise ratio stability of the three equivalent norm computations: the
/// derivative against the density kernel, the Schwarz–Pick quotient against
/// the density kernel, and the derivative against the tail kernel.
pub fn kernel_equivalence_reports(
    theta: &InnerFunction,
    p: f64,
    q: f64,
    weight: &RadialWeight,
    m_lo: usize,
    m_hi: usize,
    window: [f64; 2],
) -> Result<Vec<RatioReport>> {
    let params = MixedNormParams::new(p, q, weight.clone())?;
    let deriv_density =
        mixed_norm_truncated(&DerivOf(theta), &params, m_hi, NormKernel::Density)?;
    let quot_density = mixed_norm_truncated(
        &norms::SchwarzQuotient(theta),
        &params,
        m_hi,
        NormKernel::Density,
    )?;
    let deriv_tail =
        mixed_norm_truncated(&DerivOf(theta), &params, m_hi, NormKernel::TailQuotient)?;
    let report = |a: &TruncatedValue, b: &TruncatedValue| {
        let pairs = (m_lo..=m_hi)
            .map(|m| {
                let l = a.partial(m);
                let r = b.partial(m);
                RatioPair {
                    m,
                    left: l,
                    right: r,
                    ratio: l / r,
                }
            })
            .collect();
        RatioReport::new(pairs, window)
    };
    Ok(vec![
        report(&deriv_density, &quot_density),
        report(&deriv_density, &deriv_tail),
    ])
}
