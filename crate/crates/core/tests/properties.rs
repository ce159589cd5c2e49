use detproj::estimates::{coercivity_check, grashof_from, gronwall_classical, smallest_n, young};
use detproj::operators::{ladyzhenskaya_bound, trilinear_b};
use detproj::projections::{grid_cell_averages, ProjectionOperator};
use detproj::{ScalarField, SpectralField, Spectrum};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 16;

fn sol(seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralField::random_solenoidal(
        N,
        Spectrum::Band {
            k_lo: 1.0,
            k_hi: 5.0,
        },
        1.0,
        &mut rng,
    )
    .unwrap()
}

fn vec_field(seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralField::random_vector(
        N,
        Spectrum::Band {
            k_lo: 1.0,
            k_hi: 7.0,
        },
        1.0,
        &mut rng,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leray_is_an_orthogonal_projection(a in any::<u64>(), b in any::<u64>()) {
        let (u, v) = (vec_field(a), vec_field(b));
        let pu = u.leray_project();
        prop_assert!(pu.leray_project().sub(&pu).unwrap().h_norm() <= 1e-12 * u.h_norm());
        let lhs = pu.inner(&v).unwrap();
        let rhs = u.inner(&v.leray_project()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
        prop_assert!(pu.is_solenoidal());
    }

    #[test]
    fn trilinear_symmetries(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (u, v, w) = (sol(a), sol(b), sol(c));
        let scale = u.v_norm() * v.v_norm() * w.v_norm();
        prop_assert!(trilinear_b(&u, &v, &v).unwrap().value.abs() <= 1e-10 * scale);
        let bvw = trilinear_b(&u, &v, &w).unwrap().value;
        let bwv = trilinear_b(&u, &w, &v).unwrap().value;
        prop_assert!((bvw + bwv).abs() <= 1e-10 * scale);
        // b(u,u,w) − b(v,v,w) = b(u−v,u,w) + b(v,u−v,w)
        let d = u.sub(&v).unwrap();
        let lhs = trilinear_b(&u, &u, &w).unwrap().value - trilinear_b(&v, &v, &w).unwrap().value;
        let rhs = trilinear_b(&d, &u, &w).unwrap().value + trilinear_b(&v, &d, &w).unwrap().value;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        prop_assert!(bvw.abs() <= ladyzhenskaya_bound(&u, &v, &w));
    }

    #[test]
    fn modal_projection_is_orthogonal_and_linear(a in any::<u64>(), b in any::<u64>(), k in 1usize..5, s in -3.0f64..3.0) {
        let op = ProjectionOperator::modal(N, k).unwrap();
        let (u, v) = (sol(a), sol(b));
        let ru = op.apply_spectral(&u).unwrap();
        prop_assert!(op.apply_spectral(&ru).unwrap().sub(&ru).unwrap().h_norm() <= 1e-12);
        let l = ru.inner(&v).unwrap();
        let r = u.inner(&op.apply_spectral(&v).unwrap()).unwrap();
        prop_assert!((l - r).abs() <= 1e-12);
        let comb = u.axpy(s, &v).unwrap();
        let lin = ru.axpy(s, &op.apply_spectral(&v).unwrap()).unwrap();
        prop_assert!(op.apply_spectral(&comb).unwrap().sub(&lin).unwrap().h_norm() <= 1e-12 * (1.0 + s.abs()));
    }

    #[test]
    fn modal_error_decreases_with_cutoff(a in any::<u64>()) {
        let u = sol(a);
        let errs: Vec<f64> = (1..5).map(|k| ProjectionOperator::modal(N, k).unwrap().error_norm(&u).unwrap()).collect();
        prop_assert!(errs.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(errs[0] <= u.h_norm());
    }

    #[test]
    fn volume_projection_is_idempotent_on_cell_data(a in any::<u64>(), cells in prop::sample::select(vec![2usize, 4, 8])) {
        let op = ProjectionOperator::volume(N, cells).unwrap();
        let u = vec_field(a);
        let avg = detproj::projections::cell_averages(&u, cells);
        let h = N / cells;
        for comp in &avg {
            // piecewise-constant grid data rebuilt from the averages
            let values: Vec<f64> = (0..N * N).map(|x| comp[(x / N / h) * cells + (x % N) / h]).collect();
            let again = grid_cell_averages(N, cells, &values);
            for (p, q) in comp.iter().zip(&again) {
                prop_assert!((p - q).abs() <= 1e-13);
            }
        }
        prop_assert!(op.error_norm(&u).unwrap() <= u.h_norm() * (1.0 + 1e-12));
        let mean: f64 = avg[0].iter().sum::<f64>() / (cells * cells) as f64;
        prop_assert!(mean.abs() <= 1e-12);
    }

    #[test]
    fn gronwall_bound_is_monotone(y0 in 0.0f64..5.0, dy in 0.0f64..5.0, bump in 0.0f64..2.0, a in 0.0f64..3.0) {
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let alpha: Vec<f64> = times.iter().map(|t| a * (1.0 + t.sin().abs())).collect();
        let beta: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
        let beta2: Vec<f64> = beta.iter().zip(&times).map(|(b, t)| b + bump * t.cos().powi(2)).collect();
        let base = gronwall_classical(y0, &alpha, &beta, &times).unwrap();
        let higher_y = gronwall_classical(y0 + dy, &alpha, &beta, &times).unwrap();
        let higher_b = gronwall_classical(y0, &alpha, &beta2, &times).unwrap();
        for i in 0..times.len() {
            prop_assert!(higher_y[i] >= base[i] - 1e-14);
            prop_assert!(higher_b[i] >= base[i] - 1e-12);
        }
    }

    #[test]
    fn young_inequality(a in 0.0f64..10.0, b in 0.0f64..10.0, p in 1.01f64..8.0) {
        let (l, r) = young(a, b, p).unwrap();
        prop_assert!(l <= r * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn grashof_scales_inverse_square(f in 0.01f64..100.0, nu in 0.01f64..10.0, s in 0.1f64..10.0) {
        let g = grashof_from(f, nu);
        prop_assert!((grashof_from(f, nu * s) * s * s - g).abs() <= 1e-12 * g);
    }

    #[test]
    fn smallest_n_is_minimal(x in 0.0f64..1e6, gamma in 0.1f64..2.0) {
        let n = smallest_n(x, gamma);
        if n == u64::MAX {
            prop_assert!(x.powf(1.0 / (2.0 * gamma)) >= 1e18);
            return Ok(());
        }
        prop_assert!((n as f64).powf(2.0 * gamma) > x);
        prop_assert!(n == 1 || ((n - 1) as f64).powf(2.0 * gamma) <= x);
    }

    #[test]
    fn constant_viscosity_coercivity_is_equality(a in any::<u64>(), nu in 0.05f64..5.0) {
        let u = sol(a);
        let field = ScalarField::constant(N, nu).unwrap();
        let rep = coercivity_check(&field, &u).unwrap();
        prop_assert!((rep.a_nu_uu - rep.lower).abs() <= 1e-12 * rep.lower);
        prop_assert!(rep.holds);
    }
}
