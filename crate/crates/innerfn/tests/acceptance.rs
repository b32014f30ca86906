//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines;
//! every tolerance is pinned in code next to the assertion it gates.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use innerfn::inner::{
    pseudo_hyperbolic_identity_residual, schwarz_pick_check, InnerFunction,
};
use innerfn::norms::{
    hardy_norm_truncated, hp_blaschke_identity_rhs, mixed_norm_truncated, moduli_power_sum,
    DerivOf, MixedNormParams, NormKernel,
};
use innerfn::verify::{
    besov_suite, classify, corollary_hp_suite, shift_equivalence_report, theorem1_suite,
    theorem1b_suite, theorem3_suite, Verdict, VerifySettings,
};
use innerfn::weights::{classify_weight, Membership, RadialWeight};
use innerfn::zeros::{
    annulus_index, atomic_frostman_zeros, atomic_one_minus_sq, atomic_zeros_to_radius,
    dyadic_counts, dyadic_radius, find_zeros_numeric,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn e_inv() -> Complex64 {
    c((-1.0f64).exp(), 0.0)
}

/// Runs a criterion body and prints its pass/fail line.
fn criterion<F: FnOnce() + std::panic::UnwindSafe>(number: u32, name: &str, body: F) {
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(body);
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(()) => println!("criterion {number:02} {name}: PASS ({elapsed:.1}s)"),
        Err(e) => {
            println!("criterion {number:02} {name}: FAIL ({elapsed:.1}s)");
            std::panic::resume_unwind(e);
        }
    }
}

#[test]
fn criterion_01_exact_zeros() {
    criterion(1, "exact zeros of the shifted atomic function", || {
        let start = Instant::now();
        let s = InnerFunction::atomic();
        for a in [e_inv(), c(0.3, 0.2), c(-0.5, 0.0)] {
            let zs = atomic_frostman_zeros(a, 200).unwrap();
            assert_eq!(zs.len(), 401);
            for iz in &zs {
                let v = s.eval(iz.z(), 1e-11).unwrap();
                assert!(
                    (v.value - a).norm() <= 1e-10,
                    "|S(z_n) - a| = {:.3e} at n = {}",
                    (v.value - a).norm(),
                    iz.index
                );
                let exact = atomic_one_minus_sq(a, 2.0, iz.index);
                let got = 1.0 - iz.z().norm_sqr();
                assert!(
                    (got - exact).abs() <= 1e-12,
                    "modulus identity residual {:.3e} at n = {}",
                    (got - exact).abs(),
                    iz.index
                );
            }
        }
        assert!(start.elapsed().as_secs_f64() < 5.0, "runtime budget exceeded");
    });
}

#[test]
fn criterion_02_moduli_law() {
    criterion(2, "moduli law (1-|z_n|) n^2 within a factor 2", || {
        for a in [e_inv(), c(0.3, 0.2), c(-0.5, 0.0)] {
            let zs = atomic_frostman_zeros(a, 200).unwrap();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for iz in &zs {
                let n = iz.index.unsigned_abs() as f64;
                if (10.0..=200.0).contains(&n) {
                    let v = (1.0 - iz.z().norm()) * n * n;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            assert!(hi / lo <= 2.0, "window [{lo}, {hi}] for a = {a}");
        }
    });
}

#[test]
fn criterion_03_convergence_threshold() {
    criterion(3, "power-sum threshold at exponent 1/2", || {
        let start = Instant::now();
        let zs: Vec<Complex64> = atomic_frostman_zeros(e_inv(), 50_000)
            .unwrap()
            .iter()
            .map(|iz| iz.z())
            .collect();
        assert!(zs.len() >= 100_000);
        // classify only over annuli whose zero lists are complete
        let complete_to = annulus_index(zs[zs.len() - 1]) - 1;
        for (alpha, expect) in [
            (0.75, Verdict::Convergent),
            (0.5, Verdict::Divergent),
            (0.25, Verdict::Divergent),
        ] {
            let tv = moduli_power_sum(&zs, alpha, Some(complete_to)).unwrap();
            let v = classify(&tv);
            assert_eq!(
                v.verdict, expect,
                "alpha = {alpha}: got {:?} (slope {:.3})",
                v.verdict, v.fitted_slope
            );
        }
        assert!(start.elapsed().as_secs_f64() < 30.0, "runtime budget exceeded");
    });
}

#[test]
fn criterion_04_bergman_threshold_grid() {
    criterion(4, "Bergman membership grid against alpha > p - 3/2", || {
        let start = Instant::now();
        let s = InnerFunction::atomic();
        let d = DerivOf(&s);
        for p in [0.75, 1.0, 1.5, 2.0] {
            for alpha in [-0.75, -0.5, 0.0, 0.5, 1.0] {
                let w = RadialWeight::power(alpha).unwrap();
                let params = MixedNormParams::new(p, p, w).unwrap();
                let tv = mixed_norm_truncated(&d, &params, 14, NormKernel::Density).unwrap();
                let v = classify(&tv);
                let threshold = p - 1.5;
                let expect = if alpha > threshold {
                    Verdict::Convergent
                } else {
                    Verdict::Divergent
                };
                let distance = (alpha - threshold).abs();
                if distance >= 0.25 {
                    assert_eq!(
                        v.verdict, expect,
                        "(p, alpha) = ({p}, {alpha}): got {:?} (slope {:.3})",
                        v.verdict, v.fitted_slope
                    );
                } else {
                    // near the threshold inconclusive is acceptable,
                    // misclassification is not
                    assert!(
                        v.verdict == expect || v.verdict == Verdict::Inconclusive,
                        "(p, alpha) = ({p}, {alpha}): misclassified as {:?}",
                        v.verdict
                    );
                }
            }
        }
        assert!(start.elapsed().as_secs_f64() < 600.0, "runtime budget exceeded");
    });
}

#[test]
fn criterion_05_point_sum_agreement() {
    criterion(5, "single-parameter sum verdict matches norm verdict", || {
        let s = InnerFunction::atomic();
        let settings = VerifySettings::default();
        let mut conclusive_pairs = 0;
        for (p, q) in [(1.0, 1.0), (2.0, 2.0), (2.0, 1.0)] {
            for alpha in [0.0, 0.25] {
                let w = RadialWeight::power(alpha).unwrap();
                let rep = theorem1_suite(&s, p, q, &w, e_inv(), &settings).unwrap();
                if let Some(agree) = rep.agree {
                    conclusive_pairs += 1;
                    assert!(
                        agree,
                        "(p, q, alpha) = ({p}, {q}, {alpha}): sum {:?} vs norm {:?}",
                        rep.verdict_sum.verdict, rep.verdict_norm.verdict
                    );
                }
            }
        }
        assert!(
            conclusive_pairs >= 4,
            "only {conclusive_pairs} conclusive pairs out of 6"
        );
    });
}

#[test]
fn criterion_06_averaged_sum_ratio_stability() {
    criterion(6, "averaged-sum vs norm ratio stability", || {
        let s = InnerFunction::atomic();
        let settings = VerifySettings::default();
        let rep =
            theorem1b_suite(&s, 1.0, 1.0, &RadialWeight::one(), 0.5, 8, 14, &settings).unwrap();
        assert!(
            rep.ratio.window_ok,
            "ratio window [{:.4}, {:.4}] escapes [1/50, 50]",
            rep.ratio.ratio_min,
            rep.ratio.ratio_max
        );
        assert!(
            rep.ratio.drift() <= 10.0,
            "ratio drift {:.3} exceeds 10",
            rep.ratio.drift()
        );
    });
}

#[test]
fn criterion_07_bergman_suite_coherence() {
    criterion(7, "norm, zero-sum and level-set verdicts coincide", || {
        let s = InnerFunction::atomic();
        let b1 = InnerFunction::finite_blaschke(vec![c(0.5, 0.0)], 0.0).unwrap();
        let b2 = InnerFunction::finite_blaschke(vec![c(0.5, 0.0), c(-0.5, 0.0)], 0.0).unwrap();
        let settings = VerifySettings::default();
        let instances: Vec<(&InnerFunction, f64, f64, Option<Verdict>)> = vec![
            (&s, 0.75, 0.0, Some(Verdict::Convergent)),
            (&s, 2.0, 0.0, Some(Verdict::Divergent)),
            (&s, 1.0, 0.25, Some(Verdict::Convergent)),
            (&s, 2.0, 0.25, Some(Verdict::Divergent)),
            (&b1, 0.75, 0.0, Some(Verdict::Convergent)),
            (&b2, 2.0, 0.0, Some(Verdict::Convergent)),
        ];
        for (theta, p, alpha, expect) in instances {
            let w = RadialWeight::power(alpha).unwrap();
            let a = if matches!(theta, InnerFunction::AtomicSingular { .. }) {
                e_inv()
            } else {
                c(0.1, 0.2)
            };
            let rep = theorem3_suite(theta, p, &w, a, 0.5, &settings).unwrap();
            assert_ne!(
                rep.coherent,
                Some(false),
                "(p, alpha) = ({p}, {alpha}) on {}: verdicts diverge: {:?} {:?} {:?}",
                theta.label(),
                rep.verdict_norm.verdict,
                rep.verdict_zero_sum.verdict,
                rep.verdict_level_set.verdict
            );
            if let Some(expected) = expect {
                for v in [
                    rep.verdict_norm.verdict,
                    rep.verdict_zero_sum.verdict,
                    rep.verdict_level_set.verdict,
                ] {
                    assert!(
                        v == expected || v == Verdict::Inconclusive,
                        "(p, alpha) = ({p}, {alpha}) on {}: got {:?}, expected {:?}",
                        theta.label(),
                        v,
                        expected
                    );
                }
            }
            assert_eq!(rep.coherent, Some(true), "no conclusive agreement for p = {p}");
        }
    });
}

#[test]
fn criterion_08_hardy_chain() {
    criterion(8, "Hardy chain divergent for the atomic function", || {
        let s = InnerFunction::atomic();
        let settings = VerifySettings::default();
        for p in [0.6, 0.75, 0.9] {
            let rep = corollary_hp_suite(&s, p, e_inv(), &[0.0, 1.0], &settings).unwrap();
            let mut verdicts = vec![
                ("hardy", rep.verdict_hardy.verdict),
                ("zero-sum", rep.verdict_zero_sum.verdict),
                ("level-set", rep.verdict_level_set.verdict),
            ];
            for (alpha, v) in &rep.verdict_bergman {
                verdicts.push(("bergman", v.verdict));
                assert_eq!(
                    v.verdict,
                    Verdict::Divergent,
                    "bergman alpha = {alpha} at p = {p}"
                );
            }
            for (name, v) in verdicts {
                assert_eq!(v, Verdict::Divergent, "{name} at p = {p}");
            }
        }
        // finite Blaschke product: every condition convergent
        let b = InnerFunction::finite_blaschke(vec![c(0.3, 0.0), c(-0.6, 0.0)], 0.0).unwrap();
        let rep = corollary_hp_suite(&b, 0.75, c(0.1, 0.1), &[0.0, 1.0], &settings).unwrap();
        assert_eq!(rep.verdict_hardy.verdict, Verdict::Convergent);
        assert_eq!(rep.verdict_zero_sum.verdict, Verdict::Convergent);
        assert_eq!(rep.verdict_level_set.verdict, Verdict::Convergent);
        for (_, v) in &rep.verdict_bergman {
            assert_eq!(v.verdict, Verdict::Convergent);
        }
    });
}

#[test]
fn criterion_09_shift_equivalence() {
    criterion(9, "shifted-weight norm equivalence drift", || {
        let s = InnerFunction::atomic();
        let rep = shift_equivalence_report(
            &s,
            1.0,
            1.0,
            1.0,
            &RadialWeight::one(),
            10,
            16,
            [1.0 / 50.0, 50.0],
        )
        .unwrap();
        assert!(
            rep.drift() <= 1.25,
            "ratio drift {:.4} exceeds 25% (window [{:.4}, {:.4}])",
            rep.drift(),
            rep.ratio_min,
            rep.ratio_max
        );
    });
}

#[test]
fn criterion_10_besov_threshold() {
    criterion(10, "Besov membership at alpha = 0.2 and 0.3", || {
        let s = InnerFunction::atomic();
        let settings = VerifySettings::default();
        let rep = besov_suite(&s, 2.0, 2.0, 0.2, 0.5, &settings).unwrap();
        assert_eq!(
            rep.verdict_norm.verdict,
            Verdict::Convergent,
            "norm side at alpha = 0.2 (slope {:.3})",
            rep.verdict_norm.fitted_slope
        );
        assert_eq!(rep.verdict_sum.verdict, Verdict::Convergent, "sum side at alpha = 0.2");
        assert_eq!(rep.agree, Some(true));
        let rep = besov_suite(&s, 2.0, 2.0, 0.3, 0.5, &settings).unwrap();
        assert_eq!(
            rep.verdict_norm.verdict,
            Verdict::Divergent,
            "norm side at alpha = 0.3 (slope {:.3})",
            rep.verdict_norm.fitted_slope
        );
        assert_eq!(rep.verdict_sum.verdict, Verdict::Divergent, "sum side at alpha = 0.3");
        assert_eq!(rep.agree, Some(true));
    });
}

#[test]
fn criterion_11_exact_identities() {
    criterion(11, "pointwise identities and the Schwarz-Pick bound", || {
        let s = InnerFunction::atomic();
        // Frostman derivative identity at 10^4 points
        let a = c(0.5, 0.0);
        let sh = s.clone().frostman(a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..10_000 {
            let z = Complex64::from_polar(
                0.99 * rng.gen::<f64>().sqrt(),
                rng.gen::<f64>() * std::f64::consts::TAU,
            );
            let lhs = sh.eval_derivative(z, 1e-6).unwrap().value.norm();
            let sv = s.eval(z, 1e-13).unwrap().value;
            let sd = s.eval_derivative(z, 1e-8).unwrap().value;
            let denom = (c(1.0, 0.0) - a.conj() * sv).norm();
            let residual = (lhs * denom * denom - sd.norm() * (1.0 - a.norm_sqr())).abs();
            let scale = 1.0 + sd.norm();
            assert!(residual <= 1e-12 * scale, "residual {residual:.3e} at z = {z}");
        }
        // pseudo-hyperbolic identity at 10^4 pairs
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        let mut checked = 0;
        while checked < 10_000 {
            let z = Complex64::from_polar(
                0.99 * rng.gen::<f64>().sqrt(),
                rng.gen::<f64>() * std::f64::consts::TAU,
            );
            let w = Complex64::from_polar(
                0.99 * rng.gen::<f64>().sqrt(),
                rng.gen::<f64>() * std::f64::consts::TAU,
            );
            if (z - w).norm() < 1e-6 {
                continue;
            }
            checked += 1;
            let res = pseudo_hyperbolic_identity_residual(z, w);
            assert!(res <= 1e-12, "identity residual {res:.3e}");
        }
        // Schwarz-Pick sweeps
        let b1 = InnerFunction::finite_blaschke(vec![c(0.5, 0.0), c(0.0, -0.3)], 0.0).unwrap();
        let b2 =
            InnerFunction::finite_blaschke(vec![c(0.0, 0.0), c(0.7, 0.0), c(-0.2, 0.5)], 0.3)
                .unwrap();
        for (theta, seed) in [
            (&s, 111u64),
            (&s.clone().frostman(c(0.4, 0.0)).unwrap(), 112),
            (&b1, 113),
            (&b2, 114),
        ] {
            let worst = schwarz_pick_check(theta, 10_000, seed).unwrap();
            assert!(worst <= 1e-8, "violation {worst:.3e} for {}", theta.label());
        }
    });
}

#[test]
fn criterion_12_zero_finder_cross_validation() {
    criterion(12, "argument-principle finder against exact zeros", || {
        let s = InnerFunction::atomic();
        let a = e_inv();
        let r_max = dyadic_radius(10);
        let report = find_zeros_numeric(&s, a, r_max, 1e-10).unwrap();
        let exact = atomic_zeros_to_radius(a, 2.0, r_max).unwrap();
        assert_eq!(report.zeros.len(), exact.len(), "zero count");
        assert_eq!(report.total_winding as usize, exact.len(), "winding total");
        for got in report.zeros_complex() {
            let nearest = exact
                .iter()
                .map(|w| (got - w).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= 1e-8, "zero {got} off by {nearest:.3e}");
        }
        // identical per-annulus counts
        let got_counts = dyadic_counts(&report.zeros_complex(), r_max, 9).unwrap();
        let exact_counts = dyadic_counts(&exact, r_max, 9).unwrap();
        assert_eq!(got_counts.counts, exact_counts.counts);
    });
}

#[test]
fn criterion_13_hp_blaschke_identity() {
    criterion(13, "boundary identity for derivative Hardy norms", || {
        let cases: Vec<(Vec<Complex64>, f64)> = vec![
            (vec![c(0.0, 0.0)], 1.0),
            (vec![c(0.5, 0.0)], 1.0),
            (vec![c(0.5, 0.0), c(-0.5, 0.0)], 0.75),
            (vec![c(0.4, 0.0), c(0.0, 0.3), c(-0.2, -0.1)], 0.75),
        ];
        for (zeros, p) in cases {
            let rhs = hp_blaschke_identity_rhs(&zeros, p).unwrap();
            let b = InnerFunction::finite_blaschke(zeros.clone(), 0.0).unwrap();
            let h = hardy_norm_truncated(&DerivOf(&b), p, 14).unwrap();
            let lhs = h.powf(p);
            assert!(
                (lhs - rhs).abs() <= 0.02 * rhs,
                "{} zeros at p = {p}: {lhs} vs {rhs}",
                zeros.len()
            );
        }
    });
}

#[test]
fn criterion_14_weight_classifier() {
    criterion(14, "doubling classifier on the named weights", || {
        for alpha in [-0.5, 0.0, 1.0, 2.0] {
            let w = RadialWeight::power(alpha).unwrap();
            let rep = classify_weight(&w, &[], 16).unwrap();
            assert_eq!(rep.in_dhat.verdict, Membership::Member, "power({alpha}) upper");
            assert_eq!(rep.in_dcheck.verdict, Membership::Member, "power({alpha}) lower");
            assert!(
                (rep.alpha_hat - (alpha + 1.0)).abs() <= 0.05,
                "alpha_hat {} for power({alpha})",
                rep.alpha_hat
            );
            assert!(
                (rep.beta_hat - (alpha + 1.0)).abs() <= 0.05,
                "beta_hat {} for power({alpha})",
                rep.beta_hat
            );
        }
        let wl = RadialWeight::power_log(1.0, 1.0).unwrap();
        let rep = classify_weight(&wl, &[], 16).unwrap();
        assert_eq!(rep.in_dhat.verdict, Membership::Member);
        assert_eq!(rep.in_dcheck.verdict, Membership::Member);
        let we = RadialWeight::exponential();
        let rep = classify_weight(&we, &[], 16).unwrap();
        assert_eq!(rep.in_dhat.verdict, Membership::NotMember);
    });
}

#[test]
fn criterion_15_determinism() {
    criterion(15, "byte-identical reports on re-run", || {
        let b = InnerFunction::finite_blaschke(vec![c(0.5, 0.0)], 0.0).unwrap();
        let settings = VerifySettings {
            m_norm: 8,
            max_n: 8,
            ..VerifySettings::default()
        };
        let w = RadialWeight::one();
        let run = || {
            let rep = theorem3_suite(&b, 0.75, &w, c(0.1, 0.2), 0.5, &settings).unwrap();
            serde_json::to_string(&rep).unwrap()
        };
        let first = run();
        let second = run();
        assert_eq!(first.as_bytes(), second.as_bytes());
    });
}
