//! Cross-module properties on random inputs.

use std::f64::consts::PI;

use favard_core::fourier::{phi_tilde, product_split, riesz_factor, RieszProduct, TrigProduct};
use favard_core::geometry::{cells, cells_by_words, GenerationCap, SimilaritySystem};
use favard_core::projection::{favard, multiplicity, project, sup_multiplicity, support};
use favard_core::quadrature::Midpoint;
use favard_core::tiling::max_cofactor;
use favard_core::Complex64;
use proptest::prelude::*;

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

#[test]
fn recursion_and_word_enumeration_agree() {
    let cap = GenerationCap::default();
    for system in [SimilaritySystem::gasket(), SimilaritySystem::four_corner()] {
        for n in 0..=5 {
            let a = sorted(cells(&system, n, cap).unwrap().centers().to_vec());
            let b = sorted(cells_by_words(&system, n, cap).unwrap().centers().to_vec());
            assert_eq!(a, b, "n = {n}");
        }
    }
}

#[test]
fn generations_nest() {
    let cap = GenerationCap::default();
    let g = SimilaritySystem::gasket();
    for n in 0..5 {
        let coarse = cells(&g, n, cap).unwrap();
        let fine = cells(&g, n + 1, cap).unwrap();
        for &z in fine.centers() {
            let ok = coarse
                .centers()
                .iter()
                .any(|&c| (z - c).norm() + fine.radius() <= coarse.radius() + 1e-15);
            assert!(ok, "n = {n}, z = {z}");
        }
    }
}

#[test]
fn favard_nonincreasing_for_four_corner() {
    let sys = SimilaritySystem::four_corner();
    let values: Vec<f64> = (0..=5)
        .map(|n| favard(&sys, n, 64, &Midpoint, GenerationCap::default()).unwrap().value)
        .collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{values:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_support_and_norms(n in 0u32..=6, theta in 0.0..PI) {
        let cloud = cells(&SimilaritySystem::gasket(), n, GenerationCap::default()).unwrap();
        let f = multiplicity(&cloud, theta);
        let mass = f.integral();
        prop_assert!((mass - 2.0).abs() <= 1e-9 * 2.0);
        let len = support(&f).length();
        let (a, b) = f.hull().unwrap();
        prop_assert!(len <= b - a + 1e-12);
        prop_assert!(len >= mass * mass / f.l2_squared() - 1e-9);
        prop_assert!(f.max_value() as usize <= cloud.len());
    }

    #[test]
    fn multiplicity_counts_covering_discs(n in 0u32..=4, theta in 0.0..PI, u in 0.0f64..1.0) {
        let cloud = cells(&SimilaritySystem::gasket(), n, GenerationCap::default()).unwrap();
        let f = multiplicity(&cloud, theta);
        let (a, b) = f.hull().unwrap();
        let s = a + (b - a) * u;
        let r = cloud.radius();
        let near_edge = cloud.centers().iter().any(|&z| ((project(z, theta) - s).abs() - r).abs() < 1e-9);
        prop_assume!(!near_edge);
        let brute = cloud.centers().iter().filter(|&&z| (project(z, theta) - s).abs() < r).count();
        prop_assert_eq!(f.eval(s) as usize, brute);
    }

    #[test]
    fn sup_dominates_generations(max_n in 0u32..=4, theta in 0.0..PI, u in -1.0f64..1.0) {
        let g = SimilaritySystem::gasket();
        let sup = sup_multiplicity(&g, max_n, theta, GenerationCap::default()).unwrap();
        for n in 0..=max_n {
            let f = multiplicity(&cells(&g, n, GenerationCap::default()).unwrap(), theta);
            prop_assert!(sup.eval(u) >= f.eval(u));
        }
    }

    #[test]
    fn split_identity(t in 0.0f64..1.0, x in -1e3f64..1e3, m in 1u32..=3, ell in 1u32..=3) {
        let n = m + ell + 3;
        let s = product_split(t, n, m, ell, x).unwrap();
        let full = TrigProduct::full(t, n).eval_real(x);
        prop_assert!((s.p1 * s.p2 - full).norm() <= 1e-12);
        prop_assert!((s.p1_sharp * s.p1_flat - s.p1).norm() <= 1e-12);
    }

    #[test]
    fn riesz_ranges(x in -1e4f64..1e4, ell in 1u32..=6) {
        let r = riesz_factor(x);
        prop_assert!((5.0 / 9.0 - 1e-15..=1.0 + 1e-15).contains(&r));
        let prod = RieszProduct::new(1, ell).unwrap();
        let v = prod.eval(x);
        prop_assert!(v <= 1.0 + 1e-12 && v >= (5.0f64 / 9.0).powi(ell as i32) - 1e-12);
        prop_assert!((prod.eval(x + prod.period()) - v).abs() <= 1e-9);
    }

    #[test]
    fn cofactor_floor_near_the_cube_root_zero(m in 1u32..=8, dx in -0.1f64..0.1, dy in -0.1f64..0.1) {
        let z0 = Complex64::new(4.0 * PI / 3.0, 0.0);
        prop_assert!(phi_tilde(Complex64::new(0.5, 0.0), z0).norm() < 1e-12);
        let c = max_cofactor(0.5, m, z0 + Complex64::new(dx, dy));
        prop_assert!(c.value >= 3f64.powi(-(m as i32)));
    }
}
