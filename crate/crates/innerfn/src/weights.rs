//! Radial weights on the unit disc and their doubling-class diagnostics.
//!
//! A radial weight `ω` is a non-negative integrable density on `[0, 1)`;
//! everything downstream consumes it through its tail
//! `ω̂(r) = ∫_r^1 ω(s) ds`.  This module computes tails (closed form where a
//! family provides one, dyadic-block quadrature otherwise), tests membership
//! in the upper/lower doubling classes and their `p`-indexed refinements, and
//! estimates the extremal power exponents of `ω̂`.
//!
//! Membership verdicts are empirical: the defining ratio or supremum is
//! evaluated on the dyadic grid `r_m = 1 - 2^{-m}` and declared bounded only
//! when the running extremum has stopped moving between the deepest grid
//! levels.  A ratio that keeps growing geometrically is declared unbounded;
//! anything else is reported inconclusive rather than guessed.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{self, TailOutcome};

type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Named weight families; `Custom` weights come from the registry only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum WeightFamily {
    /// `ω(r) = (1-r)^alpha`, `alpha > -1`.
    Power { alpha: f64 },
    /// `ω(r) = (1-r)^alpha (log(e/(1-r)))^beta`.
    PowerLog { alpha: f64, beta: f64 },
    /// `ω(r) = exp(-1/(1-r))`.
    Exponential,
    Custom { name: String },
}

/// A radial weight: density evaluator, optional closed-form tail, family tag.
#[derive(Clone)]
pub struct RadialWeight {
    family: WeightFamily,
    label: String,
    density: DensityFn,
    tail: Option<DensityFn>,
}

impl fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RadialWeight({})", self.label)
    }
}

impl RadialWeight {
    /// `(1-r)^alpha` with its exact tail `(1-r)^{alpha+1}/(alpha+1)`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::invalid(
                "alpha",
                format!("power weight needs alpha > -1, got {alpha}"),
            ));
        }
        Ok(RadialWeight {
            family: WeightFamily::Power { alpha },
            label: format!("(1-r)^{alpha}"),
            density: Arc::new(move |r| (1.0 - r).powf(alpha)),
            tail: Some(Arc::new(move |r| {
                (1.0 - r).powf(alpha + 1.0) / (alpha + 1.0)
            })),
        })
    }

    /// The constant weight `ω ≡ 1`.
    pub fn one() -> Self {
        Self::power(0.0).expect("alpha = 0 is valid")
    }

    /// `(1-r)^alpha (log(e/(1-r)))^beta`.  The tail is closed form for
    /// `beta = 1` and numeric otherwise.
    pub fn power_log(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::invalid(
                "alpha",
                format!("power-log weight needs alpha > -1, got alpha = {alpha}, beta = {beta}"),
            ));
        }
        let density: DensityFn = Arc::new(move |r: f64| {
            let u = 1.0 - r;
            u.powf(alpha) * (1.0 - u.ln()).powf(beta)
        });
        // ∫_0^u s^a (1 - ln s) ds = u^{a+1}/(a+1) · (1 - ln u + 1/(a+1))
        let tail: Option<DensityFn> = if beta == 1.0 {
            Some(Arc::new(move |r: f64| {
                let u = 1.0 - r;
                u.powf(alpha + 1.0) / (alpha + 1.0) * (1.0 - u.ln() + 1.0 / (alpha + 1.0))
            }))
        } else {
            None
        };
        Ok(RadialWeight {
            family: WeightFamily::PowerLog { alpha, beta },
            label: format!("(1-r)^{alpha}·log^{beta}(e/(1-r))"),
            density,
            tail,
        })
    }

    /// `exp(-1/(1-r))`: integrable but with a tail that decays faster than
    /// any power, the standard example outside the upper doubling class.
    pub fn exponential() -> Self {
        RadialWeight {
            family: WeightFamily::Exponential,
            label: "exp(-1/(1-r))".to_string(),
            density: Arc::new(|r| (-1.0 / (1.0 - r)).exp()),
            tail: None,
        }
    }

    /// Custom weight built from closures; reachable from configs only through
    /// the [`registry`].
    pub fn custom(
        name: impl Into<String>,
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        tail: Option<DensityFn>,
    ) -> Self {
        let name = name.into();
        RadialWeight {
            family: WeightFamily::Custom { name: name.clone() },
            label: name,
            density: Arc::new(density),
            tail,
        }
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Density `ω(r)` for `r` in `[0, 1)`.
    pub fn density(&self, r: f64) -> f64 {
        (self.density)(r)
    }

    pub fn has_closed_tail(&self) -> bool {
        self.tail.is_some()
    }

    /// Checks the closed-form tail against quadrature on a dyadic test grid.
    pub fn validate_tail(&self) -> Result<()> {
        let Some(tail) = &self.tail else {
            return Ok(());
        };
        for m in 0..=12 {
            let r = 1.0 - 0.5f64.powi(m);
            let closed = tail(r);
            let numeric = numeric_tail(self, r)?;
            if (closed - numeric).abs() > 1e-9 * (1.0 + closed.abs()) {
                return Err(Error::invalid(
                    "tail_closed_form",
                    format!(
                        "weight `{}` closed tail {closed} vs quadrature {numeric} at r = {r}",
                        self.label
                    ),
                ));
            }
        }
        Ok(())
    }
}

fn numeric_tail(weight: &RadialWeight, r: f64) -> Result<f64> {
    let g = |t: f64| {
        let u = (-t).exp2(); // 1 - s
        weight.density(1.0 - u) * std::f64::consts::LN_2 * u
    };
    match quad::tail_blocks(&g, quad::dyadic_t(r), 1e-10)? {
        TailOutcome::Converged(v) => Ok(v),
        TailOutcome::Diverging => Err(Error::NonIntegrableWeight {
            name: weight.label.clone(),
            detail: format!("tail integral from r = {r} keeps growing"),
        }),
    }
}

/// Tail integral `ω̂(r) = ∫_r^1 ω(s) ds`.
///
/// Uses the closed form when the family provides one, otherwise adaptive
/// quadrature on the dyadic substitution grid at relative tolerance 1e-10.
pub fn tail_integral(weight: &RadialWeight, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::invalid("r", format!("need r in [0,1), got {r}")));
    }
    if let Some(tail) = &weight.tail {
        return Ok(tail(r).max(0.0));
    }
    numeric_tail(weight, r)
}

/// A weight multiplied by `(1-r)^x`.
#[derive(Debug, Clone)]
pub struct ShiftedWeight {
    pub base: RadialWeight,
    pub x: f64,
    /// The shifted weight itself, usable everywhere a `RadialWeight` is.
    pub weight: RadialWeight,
}

/// Multiplies `ω` by `(1-r)^x`, keeping closed-form tails for power families.
pub fn shift_weight(weight: &RadialWeight, x: f64) -> Result<ShiftedWeight> {
    let shifted = match weight.family {
        WeightFamily::Power { alpha } => RadialWeight::power(alpha + x).map_err(|_| {
            Error::NonIntegrableWeight {
                name: weight.label.clone(),
                detail: format!("shift x = {x} drives the exponent to {} <= -1", alpha + x),
            }
        })?,
        WeightFamily::PowerLog { alpha, beta } => {
            RadialWeight::power_log(alpha + x, beta).map_err(|_| Error::NonIntegrableWeight {
                name: weight.label.clone(),
                detail: format!("shift x = {x} drives the exponent to {} <= -1", alpha + x),
            })?
        }
        _ => {
            let base = weight.clone();
            let density = move |r: f64| base.density(r) * (1.0 - r).powf(x);
            let shifted = RadialWeight::custom(
                format!("{}·(1-r)^{x}", weight.label),
                density,
                None,
            );
            // Integrability check up front so downstream quadrature cannot
            // silently chase a divergent tail.
            tail_integral(&shifted, 0.0)?;
            shifted
        }
    };
    Ok(ShiftedWeight {
        base: weight.clone(),
        x,
        weight: shifted,
    })
}

/// Three-valued empirical membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Membership {
    Member,
    NotMember,
    Inconclusive,
}

impl Membership {
    pub fn is_member(self) -> bool {
        self == Membership::Member
    }
}

/// One membership test: verdict, certified constant on the grid, and the
/// running extremum per depth (for reports).
#[derive(Debug, Clone, Serialize)]
pub struct MembershipCheck {
    pub verdict: Membership,
    /// Extremal ratio/supremum over the grid (certifies the defining
    /// inequality at every grid point when `verdict` is `Member`).
    pub constant: f64,
    pub history: Vec<f64>,
}

/// Per-`p` refinements of the doubling classes.
#[derive(Debug, Clone, Serialize)]
pub struct PClassEntry {
    pub p: f64,
    pub upper: MembershipCheck,
    pub lower: MembershipCheck,
}

/// Classification report for one weight.
#[derive(Debug, Clone, Serialize)]
pub struct WeightClassReport {
    pub weight: String,
    pub in_dhat: MembershipCheck,
    pub in_dcheck: MembershipCheck,
    pub k_doubling: f64,
    /// Least observed local exponent of `ω̂` over the deepest grid pairs.
    pub alpha_hat: f64,
    /// Largest observed local exponent.
    pub beta_hat: f64,
    pub per_p: Vec<PClassEntry>,
    pub grid: Vec<f64>,
}

/// Options for [`classify_weight_with`].
#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Dyadic grid depth; at least 8.
    pub grid_depth: usize,
    /// `K` in the lower doubling test; any value > 1.
    pub k_doubling: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            grid_depth: 16,
            k_doubling: 2.0,
        }
    }
}

// Stabilization thresholds for the empirical membership rule.
const STABLE_REL_CHANGE: f64 = 0.05;
const GROWTH_PER_STEP: f64 = 1.25;
const LOWER_MARGIN: f64 = 1.01;
const SLOPE_TREND_MIN: f64 = 0.9;

/// Classifies `ω` with the default grid depth 16 and `K = 2`.
pub fn classify_weight(
    weight: &RadialWeight,
    p_list: &[f64],
    grid_depth: usize,
) -> Result<WeightClassReport> {
    classify_weight_with(
        weight,
        p_list,
        ClassifyOptions {
            grid_depth,
            ..ClassifyOptions::default()
        },
    )
}

pub fn classify_weight_with(
    weight: &RadialWeight,
    p_list: &[f64],
    opts: ClassifyOptions,
) -> Result<WeightClassReport> {
    if opts.grid_depth < 8 {
        return Err(Error::invalid(
            "grid_depth",
            format!("need grid_depth >= 8, got {}", opts.grid_depth),
        ));
    }
    if !(opts.k_doubling > 1.0) {
        return Err(Error::invalid(
            "k_doubling",
            format!("need K > 1, got {}", opts.k_doubling),
        ));
    }
    let depth = opts.grid_depth;
    let grid: Vec<f64> = (0..=depth).map(|m| 1.0 - 0.5f64.powi(m as i32)).collect();

    // Total mass must be finite before anything else makes sense.
    tail_integral(weight, 0.0)?;

    // ω̂ at grid points; underflowed tails are unusable, not zero.
    let tails: Vec<Option<f64>> = grid
        .iter()
        .map(|&r| tail_integral(weight, r).ok().filter(|v| *v > 1e-300))
        .collect();

    let upper_ratios: Vec<Option<f64>> = (0..depth)
        .map(|m| {
            let mid = 0.5 * (1.0 + grid[m]);
            let denom = tail_integral(weight, mid).ok().filter(|v| *v > 1e-300)?;
            Some(tails[m]? / denom)
        })
        .collect();
    let in_dhat = judge_upper(&upper_ratios);

    let lower_ratios: Vec<Option<f64>> = (0..depth)
        .map(|m| {
            let s = 1.0 - (1.0 - grid[m]) / opts.k_doubling;
            let denom = tail_integral(weight, s).ok().filter(|v| *v > 1e-300)?;
            Some(tails[m]? / denom)
        })
        .collect();

    // Local exponents of ω̂ over adjacent dyadic pairs; the asymptotic fit
    // uses the five deepest pairs only so bulk behaviour cannot contaminate
    // the estimate.
    let local_slopes: Vec<Option<f64>> = (0..depth)
        .map(|m| Some((tails[m]? / tails[m + 1]?).log2()))
        .collect();
    let deep: Vec<f64> = local_slopes
        .iter()
        .skip(depth.saturating_sub(5))
        .filter_map(|s| *s)
        .collect();
    let (alpha_hat, beta_hat) = if deep.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (
            deep.iter().cloned().fold(f64::INFINITY, f64::min),
            deep.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let in_dcheck = judge_lower(&lower_ratios, &local_slopes);

    let mut per_p = Vec::new();
    for &p in p_list {
        per_p.push(PClassEntry {
            p,
            upper: judge_upper(&p_sup_values(weight, &grid, &tails, p, true)?),
            lower: judge_lower_sup(&p_sup_values(weight, &grid, &tails, p, false)?),
        });
    }

    Ok(WeightClassReport {
        weight: weight.label.clone(),
        in_dhat,
        in_dcheck,
        k_doubling: opts.k_doubling,
        alpha_hat,
        beta_hat,
        per_p,
        grid,
    })
}

/// Supremum integrand of the `p`-indexed classes at each grid point:
/// `(1-r)^p / ω̂(r) · ∫ ω(s)/(1-s)^p ds` over `[0, r]` (upper) or `[r, 1)`
/// (lower).  A divergent inner integral is reported as `None` after the
/// divergence has been established, which the judges read as an unbounded
/// supremum.
fn p_sup_values(
    weight: &RadialWeight,
    grid: &[f64],
    tails: &[Option<f64>],
    p: f64,
    upper: bool,
) -> Result<Vec<Option<f64>>> {
    let ln2 = std::f64::consts::LN_2;
    let mut out = Vec::with_capacity(grid.len() - 1);
    for (m, &r) in grid.iter().enumerate().take(grid.len() - 1) {
        let Some(tail) = tails[m] else {
            out.push(None);
            continue;
        };
        let g = |t: f64| {
            let u = (-t).exp2();
            weight.density(1.0 - u) * u.powf(-p) * ln2 * u
        };
        let integral = if upper {
            if m == 0 {
                Some(0.0)
            } else {
                Some(quad::finite_blocks(&g, 0.0, quad::dyadic_t(r)))
            }
        } else {
            match quad::tail_blocks(&g, quad::dyadic_t(r), 1e-9)? {
                TailOutcome::Converged(v) => Some(v),
                TailOutcome::Diverging => None,
            }
        };
        out.push(integral.map(|i| (1.0 - r).powf(p) / tail * i));
    }
    Ok(out)
}

/// Verdict for a supremum-type test (upper doubling, `p`-classes): bounded
/// when the running sup has stabilized, unbounded when the per-depth values
/// keep growing geometrically.
fn judge_upper(values: &[Option<f64>]) -> MembershipCheck {
    let (history, usable) = running_extremum(values, f64::max);
    let verdict = if usable < 6 {
        Membership::Inconclusive
    } else if stabilized(&history) {
        Membership::Member
    } else if grows_geometrically(values) {
        Membership::NotMember
    } else {
        Membership::Inconclusive
    };
    MembershipCheck {
        verdict,
        constant: history.last().copied().unwrap_or(f64::NAN),
        history,
    }
}

/// Verdict for the lower doubling ratio: the running infimum must stabilize
/// strictly above 1, and the local tail exponents must not be draining to
/// zero (which is how `ω̂` decaying slower than any power shows up).
fn judge_lower(values: &[Option<f64>], local_slopes: &[Option<f64>]) -> MembershipCheck {
    let (history, usable) = running_extremum(values, f64::min);
    let inf = history.last().copied().unwrap_or(f64::NAN);
    let slopes: Vec<f64> = local_slopes.iter().filter_map(|s| *s).collect();
    let trend_ok = if slopes.len() >= 6 {
        let win = &slopes[slopes.len() - 5..];
        win[4] >= SLOPE_TREND_MIN * win[0] && win.iter().all(|s| *s > 0.02)
    } else {
        false
    };
    let verdict = if usable < 6 {
        Membership::Inconclusive
    } else if stabilized(&history) && inf > LOWER_MARGIN && trend_ok {
        Membership::Member
    } else if inf <= LOWER_MARGIN {
        Membership::NotMember
    } else {
        Membership::Inconclusive
    };
    MembershipCheck {
        verdict,
        constant: inf,
        history,
    }
}

/// Verdict for the lower `p`-class supremum, where a divergent inner
/// integral (a `None` after the first depths) settles the question.
fn judge_lower_sup(values: &[Option<f64>]) -> MembershipCheck {
    if values.iter().skip(1).any(|v| v.is_none()) {
        let (history, _) = running_extremum(values, f64::max);
        return MembershipCheck {
            verdict: Membership::NotMember,
            constant: f64::INFINITY,
            history,
        };
    }
    judge_upper(values)
}

/// Running extremum over the usable depths only; an underflowed or failed
/// depth contributes no history entry, so a frozen extremum cannot be
/// mistaken for a stabilized one.
fn running_extremum(
    values: &[Option<f64>],
    pick: fn(f64, f64) -> f64,
) -> (Vec<f64>, usize) {
    let mut history = Vec::new();
    let mut acc: Option<f64> = None;
    for v in values.iter().flatten() {
        acc = Some(match acc {
            Some(a) => pick(a, *v),
            None => *v,
        });
        history.push(acc.unwrap());
    }
    let usable = history.len();
    (history, usable)
}

fn stabilized(history: &[f64]) -> bool {
    if history.len() < 3 {
        return false;
    }
    let last = history[history.len() - 1];
    let earlier = history[history.len() - 3];
    if !last.is_finite() || earlier == 0.0 {
        return false;
    }
    ((last - earlier) / earlier).abs() < STABLE_REL_CHANGE
}

fn grows_geometrically(values: &[Option<f64>]) -> bool {
    let vals: Vec<f64> = values.iter().filter_map(|v| *v).collect();
    if vals.len() < 6 {
        return false;
    }
    let win = &vals[vals.len() - 6..];
    win.windows(2).all(|w| w[1] >= GROWTH_PER_STEP * w[0])
}

/// Named custom weights reachable from configuration files.
pub fn registry(name: &str) -> Option<RadialWeight> {
    match name {
        // ω̂(r) = 1/log(e/(1-r)): decays slower than any power, so it sits
        // outside the lower doubling class.
        "slow_tail" => Some(RadialWeight::custom(
            "slow_tail",
            |r: f64| {
                let u = 1.0 - r;
                let l = 1.0 - u.ln();
                1.0 / (u * l * l)
            },
            Some(Arc::new(|r: f64| 1.0 / (1.0 - (1.0 - r).ln()))),
        )),
        _ => None,
    }
}
