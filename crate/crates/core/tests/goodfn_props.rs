use std::collections::HashSet;

use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsdyn_core::goodfn::*;
use qsdyn_core::groups::catalogue;
use qsdyn_core::linalg::rational;

fn poly(coeffs: &[i64]) -> GoodCandidate {
    let cs: Vec<BigRational> = coeffs.iter().map(|&c| rational(c, 1)).collect();
    GoodCandidate::polynomial("p", interval(-1.0, 1.0).unwrap(), cs).unwrap()
}

fn nonconstant() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-4i64..=4, 4).prop_filter("nonconstant", |c| c[1..].iter().any(|&x| x != 0))
}

/// Haar density on `SL2(R)` in the entries `(a, b, c)` is `1 / |a|`; compose
/// with a finite-difference Jacobian of the chart.
fn oracle_density(chart: &Chart, x: &[f64]) -> f64 {
    let abc = |x: &[f64]| {
        let g = chart.theta_real(x).unwrap();
        [g[(0, 0)], g[(0, 1)], g[(1, 0)]]
    };
    let h = 1e-6;
    let mut j = [[0.0; 3]; 3];
    for k in 0..3 {
        let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
        xp[k] += h;
        xm[k] -= h;
        let (p, m) = (abc(&xp), abc(&xm));
        for r in 0..3 {
            j[r][k] = (p[r] - m[r]) / (2.0 * h);
        }
    }
    let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    det.abs() / abc(x)[0].abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fitted_constants_are_monotone(c in nonconstant(), bump in 1.0f64..4.0, shrink in 0.2f64..1.0) {
        let f = poly(&c);
        let grid = default_eps_grid(3);
        // Polynomials without a root nearby have empty sublevel sets on the fitting window.
        let fit = match fit_good(&f, &grid) {
            Err(qsdyn_core::Error::DegenerateFit(_)) => return Ok(()),
            r => r.unwrap(),
        };
        let base = GoodConstants::new(fit.c, fit.alpha).unwrap();
        let v = verify_good(&f, base, &grid, FIT_POINTS).unwrap();
        prop_assert!(v.pass);
        let bigger = GoodConstants::new(fit.c * bump, fit.alpha).unwrap();
        prop_assert!(verify_good(&f, bigger, &grid, FIT_POINTS).unwrap().pass);
        let flatter = GoodConstants::new(fit.c, fit.alpha * shrink).unwrap();
        prop_assert!(verify_good(&f, flatter, &grid, FIT_POINTS).unwrap().pass);
    }

    #[test]
    fn sup_of_good_functions_is_good(a in nonconstant(), b in nonconstant()) {
        let (f, g) = (poly(&a), poly(&b));
        let grid = default_eps_grid(3);
        let n = 20_000;
        // Every nonzero cubic is (C, 1/3)-good; take the larger needed C.
        let need = |h: &GoodCandidate| {
            sublevel_table(h, &grid, n).unwrap().iter().flat_map(|r| {
                grid.iter().enumerate().map(move |(i, e)| r.ratios[i] / e.powf(1.0 / 3.0)).collect::<Vec<_>>()
            }).fold(0.0, f64::max)
        };
        let consts = GoodConstants::new(need(&f).max(need(&g)) * (1.0 + 1e-9), 1.0 / 3.0).unwrap();
        prop_assert!(verify_good(&f, consts, &grid, n).unwrap().pass);
        prop_assert!(verify_good(&g, consts, &grid, n).unwrap().pass);
        let s = f.sup_with(&g).unwrap();
        prop_assert!(verify_good(&s, consts, &grid, n).unwrap().pass);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn real_interval_cover(seed in any::<u64>(), n in 1usize..300, r_lo in 0.001f64..0.2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>()]).collect();
        let radii: Vec<f64> = (0..n).map(|_| rng.gen_range(r_lo..r_lo * 5.0)).collect();
        let cover = besicovich_cover(&CoverSample::Real(pts.clone()), |i| radii[i]).unwrap();
        prop_assert_eq!(cover.covered, n);
        prop_assert!(cover.multiplicity <= 2);
        // Independent random stabs never beat the certificate.
        for _ in 0..200 {
            let x = rng.gen_range(-1.0..2.0);
            let k = cover.balls.iter().filter(|b| (pts[b.center][0] - x).abs() <= b.radius).count();
            prop_assert!(k <= cover.multiplicity);
        }
    }

    #[test]
    fn planar_cover_is_complete(seed in any::<u64>(), n in 1usize..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let radii: Vec<f64> = (0..n).map(|_| rng.gen_range(0.02..0.3)).collect();
        let cover = besicovich_cover(&CoverSample::Real(pts), |i| radii[i]).unwrap();
        prop_assert_eq!(cover.covered, n);
        prop_assert!(cover.multiplicity >= 1 && cover.multiplicity <= 19);
    }

    #[test]
    fn ultrametric_cover_has_multiplicity_one(seed in any::<u64>(), n in 1usize..200, p in prop::sample::select(vec![2u64, 3, 5])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<BigRational> = (0..n).map(|_| rational(rng.gen_range(-500..500), rng.gen_range(1..9))).collect();
        let radii: Vec<f64> = (0..n).map(|_| rng.gen_range(0.001..50.0)).collect();
        let cover = besicovich_cover(&CoverSample::Padic { p, points }, |i| radii[i]).unwrap();
        prop_assert_eq!(cover.covered, n);
        prop_assert_eq!(cover.multiplicity, 1);
    }

    #[test]
    fn exp_chart_density_matches_haar(r in 0.05f64..0.8, seed in any::<u64>()) {
        let chart = chart_with_density(&catalogue("sl2R.full").unwrap(), r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-r..r) / 3f64.sqrt()).collect();
            let (d, o) = (chart.density(&x), oracle_density(&chart, &x));
            prop_assert!((d - o).abs() < 1e-6 * o.max(1.0), "{d} vs {o}");
            prop_assert!(d <= chart.c_m && d >= 1.0 / chart.c_m);
        }
    }
}

/// Histogram of the pushforward of uniform chart measure against Haar mass of
/// each bin, with Haar evaluated by the finite-difference oracle.
#[test]
fn chart_density_sandwich() {
    let r = 0.6;
    let chart = chart_with_density(&catalogue("sl2R.full").unwrap(), r).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bins = 6usize;
    let mut hits = vec![0usize; bins * bins];
    let mut haar = vec![0.0; bins * bins];
    let mut drawn = 0;
    while drawn < 60_000 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-r..r)).collect();
        if x.iter().map(|t| t * t).sum::<f64>() > r * r {
            continue;
        }
        drawn += 1;
        let g = chart.theta_real(&x).unwrap();
        let cell = |v: f64| ((((v + 0.7) / 1.4) * bins as f64).floor() as usize).min(bins - 1);
        let k = cell(g[(0, 1)]) * bins + cell(g[(1, 0)]);
        hits[k] += 1;
        haar[k] += oracle_density(&chart, &x);
    }
    let mut checked = 0;
    for k in 0..bins * bins {
        if hits[k] >= 100 {
            let ratio = hits[k] as f64 / haar[k];
            assert!(ratio <= chart.c_m && ratio >= 1.0 / chart.c_m, "bin {k}: {ratio} vs c_m {}", chart.c_m);
            checked += 1;
        }
    }
    assert!(checked >= 10);
}

#[test]
fn angle_chart_is_arc_length() {
    let chart = chart_with_density(&catalogue("sl2R.rotation").unwrap(), std::f64::consts::PI).unwrap();
    for k in -50..50 {
        let t = k as f64 * 0.06;
        let g = chart.theta_real(&[t]).unwrap();
        // The basis element (0 1; -1 0) turns clockwise.
        assert!((g[(0, 1)].atan2(g[(0, 0)]) - t).abs() < 1e-12);
        assert_eq!(chart.density(&[t]), 1.0);
    }
}

#[test]
fn digit_chart_counts_cosets() {
    for (id, p, depth) in [("sl2Q2.compact", 2u64, 3u32), ("sl2Q3.compact", 3, 2), ("sl2Q5.compact", 5, 1)] {
        let chart = chart_with_density(&catalogue(id).unwrap(), 1.0).unwrap();
        let m = p.pow(depth);
        let mut seen = HashSet::new();
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    if let Some(g) = chart.theta_digits([a, b, c], depth) {
                        assert_eq!((g[0] * g[3] % m + m - g[1] * g[2] % m) % m, 1 % m);
                        assert!(seen.insert(g), "{id}: repeated image");
                    }
                }
            }
        }
        // |SL2(Z/p^k)| = p^(3k) (1 - p^-2).
        let order = (m * m * m) as f64 * (1.0 - 1.0 / (p * p) as f64);
        assert_eq!(seen.len() as f64, order, "{id}");
        assert_eq!(chart.c_m, 1.0);
    }
}
