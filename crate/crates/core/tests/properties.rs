use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polywave::analysis::eoc;
use polywave::geometry::Point;
use polywave::mesh::{generate, validate, MeshFamily};
use polywave::quadrature::polygon_rule;
use polywave::space::{fortin_interpolate_cell, ElementOps, ElementOptions, VectorField};
use polywave::testing::{random_star_polygon, single_cell_mesh, PolyField};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eoc_is_invariant_under_scaling(c in 1e-3f64..1e3, s in 1e-2f64..1e2, rate in 0.5f64..6.0) {
        let h: [f64; 4] = [0.25, 0.125, 0.0625, 0.03125];
        let e: Vec<f64> = h.iter().map(|x| c * x.powf(rate) * (1.0 + 0.1 * x)).collect();
        let base = eoc(&h, &e).unwrap();
        let hs: Vec<f64> = h.iter().map(|x| x * s).collect();
        let es: Vec<f64> = e.iter().map(|x| x * c).collect();
        let scaled = eoc(&hs, &es).unwrap();
        for (a, b) in base.pairwise.iter().zip(&scaled.pairwise) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((base.fit - scaled.fit).abs() < 1e-12);
    }

    #[test]
    fn polygon_rules_integrate_monomials(seed in any::<u64>(), n in 3usize..10, q in 0usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = random_star_polygon(&mut rng, n, Point::new(0.0, 0.0), 1.0);
        let lo = polygon_rule(&poly, q).unwrap();
        let hi = polygon_rule(&poly, q + 8).unwrap();
        for a in 0..=q {
            let f = |x: &Point| x.x.powi(a as i32) * x.y.powi((q - a) as i32);
            let il: f64 = lo.points.iter().zip(&lo.weights).map(|(x, w)| w * f(x)).sum();
            let ih: f64 = hi.points.iter().zip(&hi.weights).map(|(x, w)| w * f(x)).sum();
            prop_assert!((il - ih).abs() < 1e-12 * ih.abs().max(1.0));
        }
    }

    #[test]
    fn generated_meshes_are_valid(family in prop::sample::select(MeshFamily::ALL.to_vec()), n in 2usize..10, seed in any::<u64>()) {
        let m = generate(family, n, seed).unwrap();
        let r = validate(&m).unwrap();
        prop_assert!(r.min_rho_star() > 0.0);
        let area: f64 = m.cells.iter().map(|c| c.area).sum();
        prop_assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projector_reproduces_vector_polynomials(seed in any::<u64>(), n in 3usize..9, k in 0usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = single_cell_mesh(&random_star_polygon(&mut rng, n, Point::new(0.3, 0.1), 0.2));
        let e = ElementOps::new(&m, 0, k, &ElementOptions::default()).unwrap();
        let p = PolyField::random(&mut rng, k);
        let d = fortin_interpolate_cell(&m, &e, &p, 2 * k + 2);
        let c = e.project(&d);
        let scale = e.rule.points.iter().map(|x| p.value(x).norm()).fold(0.0, f64::max).max(1e-300);
        for x in &e.rule.points {
            prop_assert!((e.eval_vector(&c, x) - p.value(x)).norm() < 1e-10 * scale);
        }
        let nv = e.vector.len();
        prop_assert!((&e.projector * &e.basis_dofs - DMatrix::identity(nv, nv)).amax() < 1e-10);
    }

    #[test]
    fn local_mass_is_symmetric_positive_definite(seed in any::<u64>(), n in 3usize..9, k in 0usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = single_cell_mesh(&random_star_polygon(&mut rng, n, Point::new(0.0, 0.0), 1.0));
        let e = ElementOps::new(&m, 0, k, &ElementOptions::default()).unwrap();
        let mm = e.mass();
        prop_assert!((&mm - mm.transpose()).amax() < 1e-14 * mm.amax());
        let eig = mm.symmetric_eigenvalues();
        prop_assert!(eig.min() > 0.0);
        let v = DVector::from_fn(e.num_dofs(), |i, _| (i as f64 + 1.0).sin());
        prop_assert!(v.dot(&(&mm * &v)) > 0.0);
    }
}
