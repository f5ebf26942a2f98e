use std::f64::consts::PI;

use dirac_scatter::hc_bands::{classify_pole, solve_bands_hc, HcProvenance, UnperturbedCase};
use dirac_scatter::roots::tau_root;
use dirac_scatter::tri_bands::{solve_bands_tri, TriProvenance};
use dirac_scatter::{free_eigenvalues, Greens, LatticeConfig, Momentum, RotationMatrices, Vec2};
use proptest::prelude::*;
use std::sync::OnceLock;

const KK: f64 = 16.0 * PI * PI / 9.0;

fn setup() -> &'static (LatticeConfig<f64>, Greens<f64>) {
    static S: OnceLock<(LatticeConfig<f64>, Greens<f64>)> = OnceLock::new();
    S.get_or_init(|| {
        let c = LatticeConfig::new(1.0).unwrap();
        let g = Greens::new(&c).unwrap();
        (c, g)
    })
}

fn free_expanded(c: &LatticeConfig<f64>, k: &Momentum<f64>, n: usize) -> Vec<f64> {
    let lv = free_eigenvalues(c, k, 4000.0).unwrap();
    lv.iter()
        .flat_map(|l| std::iter::repeat_n(l.value, l.mu()))
        .take(n)
        .collect()
}

/// First grid cell of `n` uniform points on `[lo, hi]` where `f - alpha` changes sign upward.
fn dense_scan(
    f: impl Fn(f64) -> f64,
    alpha: f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> Option<(f64, f64)> {
    let h = (hi - lo) / (n - 1) as f64;
    let mut prev = f(lo) - alpha;
    for i in 1..n {
        let x = lo + h * i as f64;
        let cur = f(x) - alpha;
        if prev < 0.0 && cur >= 0.0 {
            return Some((x - h, x));
        }
        prev = cur;
    }
    None
}

#[test]
fn free_spectrum_at_infinite_strength() {
    let (c, g) = setup();
    let k = c.momentum(Vec2::new(0.9, -0.3));
    let free = free_expanded(c, &k, 8);
    assert_eq!(
        solve_bands_tri(g, &k, f64::INFINITY, 8).unwrap().expanded(),
        free
    );
    let hc = solve_bands_hc(g, &k, f64::INFINITY, 8).unwrap();
    assert_eq!(hc.lowest(8), free);
    assert!(hc
        .eigenvalues
        .iter()
        .all(|e| e.provenance == HcProvenance::Free));
}

#[test]
fn triangular_double_level_at_dirac_point() {
    let (c, g) = setup();
    let k = c.momentum(c.dirac);
    for alpha in [-1.0, 0.0, 1.0, 3.7] {
        let b = solve_bands_tri(g, &k, alpha, 3).unwrap();
        let e = b.band(2).unwrap();
        assert!((e.value - KK).abs() < 1e-12);
        assert_eq!(
            (e.multiplicity, e.provenance),
            (2, TriProvenance::Unperturbed)
        );
        assert_eq!(b.band(3).unwrap().value, e.value);
    }
}

#[test]
fn triangular_lowest_root_matches_dense_scan() {
    let (c, g) = setup();
    let k = c.momentum(c.dirac);
    let nu1 = solve_bands_tri(g, &k, 0.0, 1).unwrap().expanded()[0];
    let kern = g.kernel(&k, None, KK + 1.0);
    let (lo, hi) = dense_scan(|l| kern.diag(l), 0.0, -40.0, KK - 1e-6, 10_000).unwrap();
    assert!(nu1 >= lo && nu1 <= hi, "{nu1} not in [{lo}, {hi}]");
    assert!((nu1 - 5.862_932_862_769_747).abs() < 1e-8);
}

#[test]
fn honeycomb_gamma_branch_roots_below_zero() {
    let (_, g) = setup();
    let gm = Momentum::gamma();
    let kern = g.kernel(&gm, Some(g.cfg().x0), 5.0);
    let fm = |l: f64| kern.diag(l) - kern.off(l).norm();
    let fp = |l: f64| kern.diag(l) + kern.off(l).norm();

    // alpha = -0.5 sits below the minus-branch limit at 0, so both branches have a negative root,
    // the plus root first since g - |g(x0)| <= g + |g(x0)|.
    let b = solve_bands_hc(g, &gm, -0.5, 3).unwrap();
    let minus = b
        .eigenvalues
        .iter()
        .find(|e| e.provenance == HcProvenance::BranchMinus)
        .unwrap()
        .value;
    let plus = b
        .eigenvalues
        .iter()
        .find(|e| e.provenance == HcProvenance::BranchPlus)
        .unwrap()
        .value;
    assert!(plus < minus && minus < 0.0);
    for (f, root) in [(&fm as &dyn Fn(f64) -> f64, minus), (&fp, plus)] {
        let (lo, hi) = dense_scan(f, -0.5, -600.0, -1e-6, 100_000).unwrap();
        assert!(root >= lo && root <= hi);
    }
    // At alpha = -1 the roots lie so deep that g(x0) underflows and they merge into a double.
    let b = solve_bands_hc(g, &gm, -1.0, 3).unwrap();
    let e = &b.eigenvalues[0];
    assert!(e.value < -1e5 && e.multiplicity == 2 && e.provenance == HcProvenance::BothBranches);

    // alpha = 0 lies above that limit (about -0.196): only the plus branch has a negative root.
    let b = solve_bands_hc(g, &gm, 0.0, 3).unwrap();
    let below: Vec<_> = b.eigenvalues.iter().filter(|e| e.value < 0.0).collect();
    assert_eq!(below.len(), 1);
    assert_eq!(below[0].provenance, HcProvenance::BranchPlus);
    assert!(dense_scan(fm, 0.0, -60.0, -1e-6, 10_000).is_none());
    let (lo, hi) = dense_scan(fp, 0.0, -60.0, -1e-6, 10_000).unwrap();
    assert!(below[0].value >= lo && below[0].value <= hi);
}

#[test]
fn honeycomb_dirac_pattern_and_coincidence() {
    let (c, g) = setup();
    let k = c.momentum(c.dirac);
    for alpha in [-1.0, 0.0, 1.0] {
        let hc = solve_bands_hc(g, &k, alpha, 5).unwrap();
        let v = hc.lowest(5);
        assert!((v[0] - v[1]).abs() < 1e-8 && (v[3] - v[4]).abs() < 1e-8);
        assert!((v[2] - KK).abs() < 1e-8);
        assert!(hc.band(3).unwrap().multiplicity == 1);
        let tri = solve_bands_tri(g, &k, alpha, 8).unwrap();
        let tp: Vec<f64> = tri
            .eigenvalues
            .iter()
            .filter(|e| e.provenance == TriProvenance::Perturbed)
            .map(|e| e.value)
            .collect();
        let hp: Vec<f64> = hc
            .eigenvalues
            .iter()
            .filter(|e| e.provenance == HcProvenance::BothBranches)
            .map(|e| e.value)
            .collect();
        assert!(hc
            .eigenvalues
            .iter()
            .filter(|e| e.provenance == HcProvenance::BothBranches)
            .all(|e| e.multiplicity == 2));
        for (h, t) in hp.iter().zip(&tp) {
            assert!((h - t).abs() < 1e-8);
        }
    }
}

#[test]
fn alpha_towards_infinity_approaches_dirac_level_from_below() {
    let (c, g) = setup();
    let k = c.momentum(c.dirac);
    let mut prev = f64::NEG_INFINITY;
    for alpha in [1.0, 10.0, 100.0] {
        let v = solve_bands_hc(g, &k, alpha, 2).unwrap().lowest(2);
        assert!(v[0] == v[1] && v[0] > prev && v[0] < KK);
        prev = v[0];
    }
    assert!(KK - prev < 0.5);
}

#[test]
fn strongly_attractive_scatterer_saturates() {
    let (_, g) = setup();
    let v = solve_bands_tri(g, &Momentum::gamma(), -100.0, 2)
        .unwrap()
        .expanded();
    assert_eq!(v[0], f64::NEG_INFINITY);
    assert!(v[1] >= 0.0);
}

#[test]
fn higher_degeneracy_at_dirac_point() {
    let (c, g) = setup();
    let k = c.momentum(c.dirac);
    let lv = free_eigenvalues(c, &k, 2000.0).unwrap();
    let six = lv
        .iter()
        .position(|l| l.mu() == 6)
        .expect("a six-fold level");
    let jmax: usize = lv[..=six].iter().map(|l| l.mu()).sum();
    let b = solve_bands_tri(g, &k, 0.0, jmax).unwrap();
    let e = b
        .eigenvalues
        .iter()
        .find(|e| (e.value - lv[six].value).abs() < 1e-9)
        .unwrap();
    assert_eq!(
        (e.multiplicity, e.provenance),
        (5, TriProvenance::Unperturbed)
    );
}

#[test]
fn case3_boundary_keeps_eigenvalue_count() {
    let (c, g) = setup();
    let k = c.momentum(Vec2::new(0.3 * c.dual_norm(), 0.0));
    let lv = free_eigenvalues(c, &k, 400.0).unwrap();
    let i = lv.iter().position(|l| l.mu() == 2).unwrap();
    let pd = g.pole_data(&k, lv[i].value).unwrap();
    assert!(pd.aligned());
    let cap = 0.5 * (lv[i].value + lv[i + 1].value);
    let count = |alpha: f64| {
        let b = solve_bands_hc(g, &k, alpha, 16).unwrap();
        assert!(b.eigenvalues.last().unwrap().value > cap);
        b.eigenvalues
            .iter()
            .filter(|e| e.value <= cap)
            .map(|e| e.multiplicity)
            .sum::<usize>()
    };
    let cl = pd.left_limit_minus;
    let n = count(cl);
    assert_eq!(count(cl - 1e-3), n);
    assert_eq!(count(cl + 1e-3), n);
    let at = solve_bands_hc(g, &k, cl, 16).unwrap();
    let e = at
        .eigenvalues
        .iter()
        .find(|e| e.value == lv[i].value)
        .unwrap();
    assert_eq!(
        (e.multiplicity, e.provenance),
        (2, HcProvenance::UnperturbedCase3)
    );
    assert_eq!(classify_pole(&pd, cl + 1e-3), (UnperturbedCase::Case2, 1));
}

/// The computed value sits where `F - alpha` changes sign within a few root tolerances.
fn brackets(f: impl Fn(f64) -> f64, alpha: f64, v: f64) -> bool {
    let d = 4.0 * tau_root(v);
    f(v - d) <= alpha && f(v + d) >= alpha
}

fn momentum(s: f64, t: f64) -> Momentum<f64> {
    let (c, _) = setup();
    c.momentum(c.k1 * s + c.k2 * t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn triangular_interlacing(s in -0.5f64..0.5, t in -0.5f64..0.5, alpha in -3.0f64..6.0) {
        let (c, g) = setup();
        let k = momentum(s, t);
        let b = solve_bands_tri(g, &k, alpha, 8).unwrap();
        let v = b.expanded();
        let free = free_expanded(c, &k, v.len());
        for j in 0..8 {
            prop_assert!(v[j] <= free[j]);
            if j >= 1 {
                prop_assert!(free[j - 1] <= v[j]);
            }
        }
        let kern = g.kernel(&k, None, free[7] + 1.0);
        for e in &b.eigenvalues {
            match e.provenance {
                TriProvenance::Perturbed => {
                    prop_assert_eq!(e.multiplicity, 1);
                    prop_assert!(brackets(|l| kern.diag(l), alpha, e.value));
                }
                _ => prop_assert!(free.contains(&e.value)),
            }
        }
    }

    #[test]
    fn honeycomb_sandwich_bound(s in -0.5f64..0.5, t in -0.5f64..0.5, alpha in -3.0f64..6.0) {
        let (c, g) = setup();
        let k = momentum(s, t);
        let b = solve_bands_hc(g, &k, alpha, 8).unwrap();
        let v = b.lowest(8);
        let free = free_expanded(c, &k, 8);
        for j in 0..8 {
            prop_assert!(v[j] <= free[j] + 1e-12);
            if j >= 2 {
                prop_assert!(free[j - 2] <= v[j] + 1e-12);
            }
        }
        let kern = g.kernel(&k, Some(c.x0), free[7] + 1.0);
        for e in &b.eigenvalues {
            let sign = match e.provenance {
                HcProvenance::BranchMinus => -1.0,
                HcProvenance::BranchPlus => 1.0,
                _ => continue,
            };
            prop_assert!(brackets(|l| kern.diag(l) + sign * kern.off(l).norm(), alpha, e.value));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn branch_ordering_on_lowest_gap(s in -0.5f64..0.5, t in -0.5f64..0.5, alpha in -2.0f64..2.0) {
        let (_, g) = setup();
        let k = momentum(s, t);
        let b = solve_bands_hc(g, &k, alpha, 2).unwrap();
        let first = g.kernel(&k, None, 10.0).levels()[0].value;
        let find = |p| b.eigenvalues.iter().find(|e| e.provenance == p && e.value < first).map(|e| e.value);
        if let (Some(m), Some(p)) = (find(HcProvenance::BranchMinus), find(HcProvenance::BranchPlus)) {
            prop_assert!(p <= m);
        }
    }

    #[test]
    fn rotation_and_inversion_symmetry(s in -0.5f64..0.5, t in -0.5f64..0.5, alpha in -1.0f64..3.0) {
        let (c, g) = setup();
        let k = momentum(s, t);
        let r = RotationMatrices::default();
        let ks = [k, c.momentum(r.apply(k.k())), c.momentum(-k.k())];
        let tri: Vec<Vec<f64>> = ks.iter().map(|q| solve_bands_tri(g, q, alpha, 6).unwrap().lowest(6)).collect();
        let hc: Vec<Vec<f64>> = ks.iter().map(|q| solve_bands_hc(g, q, alpha, 6).unwrap().lowest(6)).collect();
        for set in [&tri, &hc] {
            for other in &set[1..] {
                for (a, b) in set[0].iter().zip(other) {
                    prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{} vs {}", a, b);
                }
            }
        }
    }
}

#[test]
fn bands_increase_with_alpha_at_special_points() {
    let (c, g) = setup();
    for kv in [c.gamma(), c.dirac, c.m_point()] {
        let k = c.momentum(kv);
        for alpha in [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5] {
            let lo = solve_bands_tri(g, &k, alpha, 6).unwrap();
            let hi = solve_bands_tri(g, &k, alpha + 0.5, 6).unwrap();
            for j in 1..=6 {
                let (a, b) = (lo.band(j).unwrap(), hi.band(j).unwrap());
                if a.provenance == TriProvenance::Perturbed
                    && b.provenance == TriProvenance::Perturbed
                {
                    assert!(b.value > a.value);
                } else {
                    assert!(b.value >= a.value);
                }
            }
        }
    }
}
