use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsdyn_core::dynamics::*;
use qsdyn_core::groups::{catalogue, centralizer_algebra, exp_real, GroupElement, GroupTag};
use qsdyn_core::linalg::Matrix;
use qsdyn_core::qs_arith::Place;

fn a(t: f64) -> GroupElement {
    GroupElement::sl2(t.exp(), 0.0, 0.0, (-t).exp()).unwrap()
}

/// `n_x a_y k_(theta/2)` rebuilt from reduced coordinates.
fn iwasawa(c: [f64; 3]) -> [[f64; 2]; 2] {
    let [x, y, t] = c;
    let s = y.sqrt();
    let (sn, cs) = (t / 2.0).sin_cos();
    [[s * cs + x / s * sn, -s * sn + x / s * cs], [sn / s, cs / s]]
}

fn random_sl2(rng: &mut ChaCha8Rng) -> [[f64; 2]; 2] {
    let (x, ly, t) = (rng.gen_range(-20.0..20.0), rng.gen_range(-8.0..8.0f64), rng.gen_range(0.0..2.0 * PI));
    iwasawa([x, ly.exp(), t])
}

fn random_gamma(rng: &mut ChaCha8Rng) -> Matrix<f64> {
    let mut m = [[1i64, 0], [0, 1]];
    for _ in 0..rng.gen_range(1..6) {
        let k = rng.gen_range(-3i64..=3);
        m = [[m[0][0] + k * m[1][0], m[0][1] + k * m[1][1]], m[1]];
        m = [[-m[1][0], -m[1][1]], m[0]];
    }
    Matrix::from_rows(m.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect())
}

#[test]
fn reduction_lands_in_the_domain_and_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10_000 {
        let m = random_sl2(&mut rng);
        let r = reduce_matrix(m).unwrap();
        assert!(r.x.abs() <= 0.5 + 1e-9 && r.x * r.x + r.y * r.y >= 1.0 - 1e-9, "{r:?}");
        let again = reduce_matrix(iwasawa(r.coords())).unwrap();
        assert_eq!(again.gamma, [1, 0, 0, 1]);
        assert!((again.x - r.x).abs() < 1e-9 && (again.y - r.y).abs() < 1e-9 * r.y);
        // gamma m . i is the reduced point.
        let [g0, g1, g2, g3] = r.gamma.map(|v| v as f64);
        let gm = [[g0 * m[0][0] + g1 * m[1][0], g0 * m[0][1] + g1 * m[1][1]], [g2 * m[0][0] + g3 * m[1][0], g2 * m[0][1] + g3 * m[1][1]]];
        let q = gm[1][0].powi(2) + gm[1][1].powi(2);
        assert!((1.0 / q - r.y).abs() < 1e-6 * r.y);
    }
}

#[test]
fn mass_is_preserved() {
    for (id, r, n) in [("sl2R.rotation", 1.0, 100_000), ("sl2R.full", 0.4, 30_000), ("sl2Q3.compact", 1.0, 30_000)] {
        let omega = OmegaWindow::ball(catalogue(id).unwrap(), r).unwrap();
        let s = sample_window(&omega, n, 3).unwrap();
        let total = |w: &[f64]| w.iter().fold((0.0f64, 0.0f64), |(s, c), &v| {
            let y = v - c;
            let t = s + y;
            (t, (t - s) - y)
        }).0;
        assert!((total(&s.weights) - 1.0).abs() < 1e-12);
        let g = GroupElement::identity(omega.space.tag, &omega.space.places());
        let mu = translate_and_project(&s, &g, &omega.space).unwrap();
        assert_eq!(mu.weights, s.weights);
        assert!((total(&mu.weights) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn weak_distance_is_a_pseudometric() {
    let dict = TestFunctionDict::standard();
    let omega = OmegaWindow::ball(catalogue("sl2R.rotation").unwrap(), PI).unwrap();
    let mus: Vec<EmpiricalMeasure> = (0..4)
        .map(|k| {
            let s = sample_window(&omega, 5_000, k).unwrap();
            translate_and_project(&s, &a(0.4 * k as f64), &omega.space).unwrap()
        })
        .collect();
    for x in &mus {
        assert_eq!(weak_distance(x, x, &dict).unwrap(), 0.0);
        for y in &mus {
            let d = weak_distance(x, y, &dict).unwrap();
            assert_eq!(d, weak_distance(y, x, &dict).unwrap());
            for z in &mus {
                let (e, f) = (weak_distance(x, z, &dict).unwrap(), weak_distance(z, y, &dict).unwrap());
                assert!(d <= e + f + 1e-12);
            }
        }
    }
}

#[test]
fn independent_haar_samples_are_close() {
    let omega = OmegaWindow::ball(catalogue("sl2R.rotation").unwrap(), PI).unwrap();
    let e = GroupElement::identity(GroupTag::SL2, &[Place::Real]);
    let spec = LimitFormulaSpec { g_inf: e.clone(), n_inf: e, l: catalogue("sl2R.full").unwrap(), omega };
    let dict = TestFunctionDict::standard();
    let (p, q) = (
        reference_limit_measure(&spec, &dict, 100_000, 1).unwrap(),
        reference_limit_measure(&spec, &dict, 100_000, 2).unwrap(),
    );
    let r = compare(&p, &q, &dict).unwrap();
    assert!(r.distance <= 0.02 && r.distance <= r.err3, "{r:?}");
}

#[test]
fn haar_reference_matches_closed_forms() {
    let dict = TestFunctionDict::standard();
    let pts = haar_fundamental_sample(200_000, 8).unwrap();
    let w = vec![1.0 / pts.len() as f64; pts.len()];
    let mu = EmpiricalMeasure::new(1, pts, w, 8).unwrap();
    let mc = integrate(&mu, &dict).unwrap();
    let exact = haar_integrals(&dict);
    for k in 0..dict.fns.len() {
        // Truncation at Y_CAP moves each integral by at most 2 * 3 / (pi Y_CAP).
        let slack = mc.err3[k] + 6.0 / (PI * Y_CAP);
        assert!((mc.values[k] - exact.values[k]).abs() <= slack, "{}", dict.fns[k].name);
    }
}

#[test]
fn full_reference_is_invariant_under_the_sampled_group() {
    let omega = OmegaWindow::ball(catalogue("sl2R.rotation").unwrap(), 0.5).unwrap();
    let e = GroupElement::identity(GroupTag::SL2, &[Place::Real]);
    let dict = TestFunctionDict::standard();
    let g = a(0.7).mul(&GroupElement::sl2(1.0, 0.4, 0.0, 1.0).unwrap());
    let base = LimitFormulaSpec { g_inf: g.clone(), n_inf: e, l: catalogue("sl2R.full").unwrap(), omega };
    let p = reference_limit_measure(&base, &dict, 60_000, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3 {
        let u = random_sl2(&mut rng);
        let u = GroupElement::sl2(u[0][0], u[0][1], u[1][0], u[1][1]).unwrap();
        let moved = LimitFormulaSpec { g_inf: g.mul(&u), ..base.clone() };
        let q = reference_limit_measure(&moved, &dict, 60_000, 6).unwrap();
        let r = compare(&p, &q, &dict).unwrap();
        assert!(r.distance <= r.err3, "{r:?}");
    }
}

/// Translators in the centralizer of `H` converging to `z`: the translates
/// converge to `z mu_Omega`.
#[test]
fn trivial_dynamics_in_the_centralizer() {
    let h = catalogue("sl2R.rotation").unwrap();
    let z = centralizer_algebra(&h).basis_at(0)[0].map(|q| num_traits::ToPrimitive::to_f64(q).unwrap());
    let zt = |t: f64| GroupElement::real(GroupTag::SL2, exp_real(&z.scale(&t))).unwrap();
    let omega = OmegaWindow::ball(h.clone(), 0.6).unwrap();
    let dict = TestFunctionDict::standard();
    let limit = LimitFormulaSpec {
        g_inf: zt(0.9),
        n_inf: GroupElement::identity(GroupTag::SL2, &[Place::Real]),
        l: catalogue("sl2R.trivial").unwrap(),
        omega: omega.clone(),
    };
    let reference = reference_limit_measure(&limit, &dict, 50_000, 1).unwrap();
    let mut last = f64::INFINITY;
    for (k, t) in [0.5, 0.8, 0.9 - 1e-3].iter().enumerate() {
        let s = sample_window(&omega, 50_000, 10 + k as u64).unwrap();
        let mu = translate_and_project(&s, &zt(*t), &omega.space).unwrap();
        let r = compare(&integrate(&mu, &dict).unwrap(), &reference, &dict).unwrap();
        if k == 2 {
            assert!(r.distance <= r.err3, "{r:?}");
            assert!(r.distance < last);
        }
        last = r.distance;
    }
}

#[test]
fn experiments_do_not_depend_on_the_worker_count() {
    let omega = OmegaWindow::ball(catalogue("sl2R.rotation").unwrap(), PI).unwrap();
    let e = GroupElement::identity(GroupTag::SL2, &[Place::Real]);
    let spec = ExperimentSpec {
        name: "det".into(),
        omega,
        translators: vec![(1.0, a(1.0)), (2.0, a(2.0))],
        expectation: Expectation::Limit { l: catalogue("sl2R.full").unwrap(), g_inf: e.clone(), n_inf: e },
        samples: 9_000,
        reference_samples: 9_000,
        seed: 3,
        checks: vec![DistanceCheck { dict: TestFunctionDict::standard(), tolerance: 1.0, every_step: false, monotone: false }],
        systole_thresholds: vec![0.5],
        strong_check: true,
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| convergence_experiment(&spec).unwrap())
    };
    assert_eq!(run(1), run(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    /// Right multiplication of the sample representatives by `SL2(Z)` does
    /// not move any projected point.
    #[test]
    fn projection_is_right_gamma_invariant(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = random_gamma(&mut rng);
        let omega = OmegaWindow::ball(catalogue("sl2R.full").unwrap(), 0.5).unwrap();
        let s = sample_window(&omega, 300, seed).unwrap();
        let mut moved = s.clone();
        for e in &mut moved.elements {
            e.real = e.real.mul(&gamma);
        }
        let g = a(rng.gen_range(-2.0..2.0));
        let (p, q) = (translate_and_project(&s, &g, &omega.space).unwrap(), translate_and_project(&moved, &g, &omega.space).unwrap());
        for i in 0..p.len() {
            let (u, v) = (p.point(i)[0], q.point(i)[0]);
            prop_assert!((u[0] - v[0]).abs() < 1e-7 && (u[1] - v[1]).abs() < 1e-7 * u[1]);
            let d = (u[2] - v[2]).rem_euclid(2.0 * PI);
            prop_assert!(d.min(2.0 * PI - d) < 1e-7);
        }
    }
}
