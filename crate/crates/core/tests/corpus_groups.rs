mod common;

use common::{c, corpus, CORPUS};
use schottky_zeta::freegroup::enumerate_classes;
use schottky_zeta::zetaprod::{self, MultiplierSpectrum, TruncationPolicy};
use schottky_zeta::{Point, SchottkyGroup};

#[test]
fn corpus_circles_are_valid() {
    for name in CORPUS {
        let g = corpus(name);
        let set = g.circles().unwrap_or_else(|| panic!("{name}: {:?}", g.circle_error()));
        assert!(set.is_valid(), "{name}: {set:?}");
        assert!(set.margin > 0.0);
    }
}

#[test]
fn real_corpus_groups_have_real_spectra() {
    for name in ["genus1_q0.1.json", "genus2_real.json", "genus3_real.json"] {
        let g = corpus(name);
        assert!(g.is_real());
        let max_len = if g.genus() == 3 { 5 } else { 6 };
        for cls in enumerate_classes(g.genus(), max_len) {
            let q = g.class_multiplier(&cls).unwrap();
            assert!(q.im.abs() < 1e-14 && q.re > 0.0 && q.re < 1.0, "{name} {cls}: {q}");
        }
    }
}

#[test]
fn normalization_preserves_the_spectrum() {
    for name in ["genus2_complex.json", "genus2_real.json"] {
        let g = corpus(name);
        let (n, _) = g.normalize().unwrap();
        assert!(n.is_normalized());
        for cls in enumerate_classes(2, 6) {
            let a = g.class_multiplier(&cls).unwrap();
            let b = n.class_multiplier(&cls).unwrap();
            assert!((a - b).norm() < 1e-10, "{name} {cls}");
        }
    }
}

#[test]
fn class_multipliers_decay_geometrically() {
    for name in ["genus2_complex.json", "genus2_real.json", "genus3_real.json"] {
        let g = corpus(name);
        let spec = MultiplierSpectrum::compute(&g, 6, 1).unwrap();
        let maxima: Vec<f64> = (1..=6)
            .map(|l| spec.of_length(l).iter().map(|q| q.norm()).fold(0.0, f64::max))
            .collect();
        // per-letter rate stays below the largest generator multiplier's root
        let first = maxima[0];
        for (l, m) in maxima.iter().enumerate().skip(1) {
            assert!(*m < maxima[l - 1], "{name}: no decay at length {}", l + 1);
            assert!(m.powf(1.0 / (l + 1) as f64) < first.sqrt(), "{name}");
        }
    }
}

#[test]
fn products_stable_in_truncation() {
    let g = corpus("genus2_complex.json");
    let a = zetaprod::zograf_f1(&g, &TruncationPolicy::with_len(10)).unwrap();
    let b = zetaprod::zograf_f1(&g, &TruncationPolicy::with_len(12)).unwrap();
    assert!((a.value - b.value).norm() < 1e-10);
    assert!(b.converged);
    assert!(b.tail_estimate < a.tail_estimate);
    for name in ["genus2_complex.json", "genus2_real.json"] {
        let g = corpus(name);
        let a = zetaprod::ruelle(&g, 2.0, &TruncationPolicy::with_len(10)).unwrap();
        let b = zetaprod::ruelle(&g, 2.0, &TruncationPolicy::with_len(12)).unwrap();
        assert!((a.value - b.value).norm() < 1e-10, "{name}");
    }
}

#[test]
fn slow_truncation_is_reported() {
    // the real corpus group has comparatively large class multipliers, so
    // F(1) at L = 12 is still moving in the ninth digit
    let g = corpus("genus2_real.json");
    let v = zetaprod::zograf_f1(&g, &TruncationPolicy::with_len(12)).unwrap();
    assert!(!v.converged);
    assert!(v.warnings.iter().any(|w| w.contains("not converged")));
    let loose = TruncationPolicy {
        tolerance: 1e-7,
        ..TruncationPolicy::with_len(12)
    };
    assert!(zetaprod::zograf_f1(&g, &loose).unwrap().converged);
}

#[test]
fn truncation_differences_shrink() {
    let g = corpus("genus2_complex.json");
    let vals: Vec<_> = (2..=10)
        .step_by(2)
        .map(|l| zetaprod::zograf_f1(&g, &TruncationPolicy::with_len(l)).unwrap().value)
        .collect();
    let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    for d in diffs.windows(2) {
        assert!(d[1] < d[0], "{diffs:?}");
    }
}

#[test]
fn products_invariant_under_normalization() {
    let g = corpus("genus2_complex.json");
    let (n, _) = g.normalize().unwrap();
    let p = TruncationPolicy::with_len(10);
    let a = zetaprod::zograf_f1(&g, &p).unwrap().value;
    let b = zetaprod::zograf_f1(&n, &p).unwrap().value;
    assert!((a - b).norm() < 1e-10);
    let a = zetaprod::ruelle(&g, 2.5, &p).unwrap().value;
    let b = zetaprod::ruelle(&n, 2.5, &p).unwrap().value;
    assert!((a - b).norm() < 1e-10);
}

#[test]
fn modified_ruelle_term_by_term() {
    // second implementation: direct products over an explicit class list
    let g = corpus("genus2_real.json");
    let p = TruncationPolicy::with_len(10);
    for k in [2u32, 3] {
        let ours = zetaprod::modified_ruelle(&g, k, &p).unwrap().value;
        let mut r = 1.0f64;
        for cls in enumerate_classes(2, 10) {
            let q = g.class_multiplier(&cls).unwrap().norm();
            r /= 1.0 - q.powi(k as i32);
        }
        let (q1, q2) = (0.04f64, 0.06f64);
        let oracle = r * (1.0 - q1.powi(k as i32)).powi(2) * (1.0 - q2.powi(k as i32)) / (1.0 - q2.powi(k as i32 - 1));
        assert!((ours - oracle).norm() < 1e-10, "k={k}: {ours} vs {oracle}");
    }
}

#[test]
fn degeneration_of_mt_product() {
    // q_2 -> 0 leaves prod_{m>=1} (1 - q_1^m)^2 times (1 - q_2^{k-1}) -> 1
    let q1: f64 = 0.04;
    let mut target = 1.0;
    for m in 1..80 {
        target *= (1.0 - q1.powi(m)).powi(2);
    }
    for k in [2u32, 3] {
        let g = SchottkyGroup::from_fixed_points(&[
            (Point::finite(0.0, 0.0), Point::Infinity, c(q1, 0.0)),
            (Point::finite(1.0, 0.0), Point::finite(3.0, 0.0), c(1e-7, 0.0)),
        ])
        .unwrap();
        let v = zetaprod::mt_fk(&g, k, &TruncationPolicy::with_len(8)).unwrap().value;
        assert!((v - target).norm() < 1e-5, "k={k}: {v} vs {target}");
    }
}
