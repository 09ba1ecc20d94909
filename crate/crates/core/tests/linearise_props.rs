use proptest::prelude::*;

use qsdyn_core::groups::{catalogue, exp_real, lie_from_coords, GroupElement, GroupTag};
use qsdyn_core::linalg::Matrix;
use qsdyn_core::linearise::*;
use qsdyn_core::LieAlgElem;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn random_group(tag: GroupTag, c: &[f64]) -> Matrix<f64> {
    exp_real(&lie_from_coords(tag, &c[..tag.lie_dim()]))
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let s = norm(a).max(norm(b)).max(1.0);
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * s)
}

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.8f64..0.8, 8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eta_is_equivariant(x in coords(), y in coords(), which in 0usize..4) {
        let id = ["sl2R.unipotent", "sl2R.borel", "sl2xsl2.diag_rotation", "sl3R.heisenberg"][which];
        let l = catalogue(id).unwrap();
        let b = build_bundle(&l, l.tag).unwrap();
        let (g, h) = (random_group(l.tag, &x), random_group(l.tag, &y));
        prop_assert!(close(&b.eta(&g.mul(&h)), &b.rep(&g).mul_vec(&b.eta(&h)), 1e-9));
        prop_assert!(b.rep(&g.mul(&h)).approx_eq(&b.rep(&g).mul(&b.rep(&h)), 1e-9 * b.rep(&g).frobenius() * b.rep(&h).frobenius()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn normalizer_fixes_the_line(x in coords()) {
        for id in ["sl2R.unipotent", "sl2R.torus", "sl2xsl2.first_factor", "sl3R.torus", "sl3R.heisenberg"] {
            let l = catalogue(id).unwrap();
            let b = build_bundle(&l, l.tag).unwrap();
            let basis = b.normalizer_lie().coords_at(0).to_vec();
            let mut c = vec![0.0; l.tag.lie_dim()];
            for (row, s) in basis.iter().zip(&x) {
                for (ci, q) in c.iter_mut().zip(row) {
                    *ci += s * qsdyn_core::Field::from_rational_like(&0.0, q);
                }
            }
            let v = b.eta(&exp_real(&lie_from_coords(l.tag, &c)));
            let p = b.p_l_real();
            let along: f64 = v.iter().zip(p).map(|(a, q)| a * q).sum::<f64>() / norm(p).powi(2);
            let off: Vec<f64> = v.iter().zip(p).map(|(a, q)| a - along * q).collect();
            prop_assert!(norm(&off) <= 1e-9 * norm(&v), "{}", id);
        }
    }

    #[test]
    fn x_is_right_normalizer_invariant(t in -2.0f64..2.0, s in -2.0f64..2.0, u in -2.0f64..2.0) {
        let l = catalogue("sl2R.unipotent").unwrap();
        let b = build_bundle(&l, GroupTag::SL2).unwrap();
        let e = LieAlgElem::real(GroupTag::SL2, Matrix::from_rows(vec![vec![0.0, 1.0], vec![0.0, 0.0]])).unwrap();
        let g = GroupElement::sl2(t.exp(), u, 0.0, (-t).exp()).unwrap();
        // n in the Borel subgroup normalizing the unipotent line.
        let n = GroupElement::sl2(s.exp(), s * u, 0.0, (-s).exp()).unwrap();
        let (inside, _) = x_membership(&b, std::slice::from_ref(&e), &g, &[]).unwrap();
        prop_assert!(inside);
        prop_assert!(x_membership(&b, &[e], &g.mul(&n), &[]).unwrap().0);
    }

    #[test]
    fn chi_is_upper_semicontinuous(x in coords(), r in 0.5f64..4.0, dirs in prop::collection::vec(coords(), 100)) {
        let l = catalogue("sl2R.unipotent").unwrap();
        let b = build_bundle(&l, GroupTag::SL2).unwrap();
        let g = random_group(GroupTag::SL2, &x);
        let ge = GroupElement::real(GroupTag::SL2, g.clone()).unwrap();
        let center = [0.0; 3];
        let base = chi_count(&b, &center, r, false, &ge, 10_000, DEFAULT_ORBIT_BUDGET).unwrap();
        prop_assert!(base.exact);
        // Only when no orbit point sits within 1% of the boundary sphere.
        let inner = chi_count(&b, &center, r * 0.99, false, &ge, 10_000, DEFAULT_ORBIT_BUDGET).unwrap();
        let outer = chi_count(&b, &center, r * 1.01, false, &ge, 10_000, DEFAULT_ORBIT_BUDGET).unwrap();
        prop_assume!(inner.count == outer.count);
        for (k, d) in dirs.iter().enumerate() {
            let delta = 1e-3 / (1.0 + k as f64);
            let gp = g.mul(&random_group(GroupTag::SL2, &d.iter().map(|c| c * delta).collect::<Vec<_>>()));
            let near = chi_count(&b, &center, r, false, &GroupElement::real(GroupTag::SL2, gp).unwrap(), 10_000, DEFAULT_ORBIT_BUDGET).unwrap();
            prop_assert!(near.count <= base.count);
        }
    }

    #[test]
    fn psi_inside_phi(
        consts in prop::collection::vec(0.1f64..5.0, 6),
        eps in 0.001f64..1.0,
        alpha in 0.05f64..1.0,
        vs in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 50),
    ) {
        let b = build_bundle(&catalogue("sl2R.unipotent").unwrap(), GroupTag::SL2).unwrap();
        let p = NeighborhoodParams { d0_radius: consts[0], eps, c: consts[1], alpha, c_d: consts[2], c_m: consts[3], n_x: consts[4], lambda_b: consts[5] };
        let t = build_neighborhoods(&p, &b.lambda_map(), b.a_l()).unwrap();
        prop_assert!(t.m_good >= 2.0);
        for v in &vs {
            for scale in [1e-3, 1e-2, 0.1, 1.0, 10.0] {
                let w: Vec<f64> = v.iter().map(|x| x * scale * t.r).collect();
                prop_assert!(!t.in_psi(&w) || t.in_phi(&w));
            }
        }
    }

    #[test]
    fn focusing_ignores_bounded_prefactors(x in coords(), ts in prop::collection::vec(0.0f64..5.0, 2..8)) {
        let bmat = random_group(GroupTag::SL2, &x);
        let bel = GroupElement::real(GroupTag::SL2, bmat.clone()).unwrap();
        let seq: Vec<GroupElement> = ts.iter().map(|t| GroupElement::sl2(t.exp(), 0.0, 0.0, (-t).exp()).unwrap()).collect();
        let moved: Vec<GroupElement> = seq.iter().map(|g| bel.mul(g)).collect();
        let ad_b = qsdyn_core::groups::ad_matrix(GroupTag::SL2, &bmat).unwrap();
        let ad_bi = qsdyn_core::groups::ad_matrix(GroupTag::SL2, &bmat.inverse().unwrap()).unwrap();
        let k = ad_b.spectral_norm().max(ad_bi.spectral_norm()) * 1.0001;
        for id in ["sl2R.rotation", "sl2R.torus", "sl2R.unipotent"] {
            let h = catalogue(id).unwrap();
            let r0 = focusing_class_test(&h, &seq, DEFAULT_FOCUS_FACTOR).unwrap();
            let r1 = focusing_class_test(&h, &moved, DEFAULT_FOCUS_FACTOR).unwrap();
            for (a, c) in r0.curve.iter().zip(&r1.curve) {
                prop_assert!(*c <= k * a && *a <= k * c);
            }
            // Away from the threshold the class cannot change.
            let top = r0.curve.iter().cloned().fold(0.0, f64::max) / r0.baseline;
            if top * k < DEFAULT_FOCUS_FACTOR || top / k > DEFAULT_FOCUS_FACTOR {
                prop_assert_eq!(r0.class, r1.class);
            }
        }
    }
}

#[test]
fn dichotomy_scenarios() {
    let b = build_bundle(&catalogue("sl2R.unipotent").unwrap(), GroupTag::SL2).unwrap();
    let p = NeighborhoodParams { d0_radius: 1.0, eps: 0.01, c: 1.0, alpha: 1.0, c_d: 3.0, c_m: 2.0, n_x: 2.0, lambda_b: 2.0 };
    let t = build_neighborhoods(&p, &b.lambda_map(), b.a_l()).unwrap();
    let rot = |a: f64| GroupElement::sl2(a.cos(), -a.sin(), a.sin(), a.cos()).unwrap();
    let window: Vec<(GroupElement, f64)> = (0..=200).map(|k| (rot(-0.01 + 1e-4 * k as f64), 1.0)).collect();
    let circle: Vec<(GroupElement, f64)> = (0..720).map(|k| (rot(std::f64::consts::TAU * k as f64 / 720.0), 1.0)).collect();
    let contract = GroupElement::sl2((-3f64).exp(), 0.0, 0.0, 3f64.exp()).unwrap();
    let expand = GroupElement::sl2(3f64.exp(), 0.0, 0.0, (-3f64).exp()).unwrap();
    assert_eq!(
        dichotomy_check(&b, &contract, &window, &t, 0.01, 5000, DEFAULT_ORBIT_BUDGET).unwrap(),
        Dichotomy::Alternative1 { gamma: [1, 0, 0, 1] }
    );
    assert!(matches!(
        dichotomy_check(&b, &expand, &circle, &t, 0.01, 5000, DEFAULT_ORBIT_BUDGET).unwrap(),
        Dichotomy::Alternative2 { .. }
    ));
    assert!(matches!(
        dichotomy_check(&b, &contract, &window, &t, 0.01, 3, DEFAULT_ORBIT_BUDGET).unwrap(),
        Dichotomy::Inconclusive { .. }
    ));
}
