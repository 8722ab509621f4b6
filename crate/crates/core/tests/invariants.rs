use fractorus::bessel::ThetaProfile;
use fractorus::energy::Functional;
use fractorus::extension::{sharp_trace_gap, ModalCylinder, ProfileKind};
use fractorus::nonlinearity::{NonlinearityKind, NonlinearitySpec};
use fractorus::spectral::{
    apply_bessel_operator, apply_shifted_operator, forward_transform, hs_norm, inverse_transform,
    pad_spectrum, project_zero_mean, random_spectrum, read_spectrum, solve_linear, truncate_spectrum,
    write_spectrum, Field, FracParams, Spectrum, TorusGrid,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn grid_strategy() -> impl Strategy<Value = TorusGrid> {
    (1usize..=2, prop::sample::select(vec![8usize, 12, 16]), 1.0f64..8.0)
        .prop_map(|(dim, n, t)| TorusGrid::new(dim, t, n).unwrap())
}

fn frac_strategy() -> impl Strategy<Value = FracParams> {
    (0.05f64..0.95, 0.0f64..2.0).prop_map(|(s, m)| FracParams::new(s, m).unwrap())
}

fn field(grid: TorusGrid, seed: u64) -> Field {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Field::new(grid, (0..grid.len()).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transforms_are_isometric_inverses(grid in grid_strategy(), seed in any::<u64>()) {
        let f = field(grid, seed);
        let c = forward_transform(&f);
        let l2: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * grid.cell_volume();
        prop_assert!((c.norm_sq() - l2).abs() <= 1e-12 * l2);
        prop_assert!(c.hermitian_defect() <= 1e-12 * c.l2_norm());
        let back = inverse_transform(&c).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn operators_are_positive_and_kill_constants(grid in grid_strategy(), p in frac_strategy(), seed in any::<u64>()) {
        let u = forward_transform(&field(grid, seed));
        let bessel = apply_bessel_operator(&u, &p).dot(&u);
        let shifted = apply_shifted_operator(&u, &p).dot(&u);
        prop_assert!(bessel >= -1e-12);
        prop_assert!(shifted >= -1e-12 * bessel.max(1.0));
        prop_assert!((bessel - hs_norm(&u, &p).powi(2)).abs() <= 1e-10 * bessel.max(1.0));
        let constant = Spectrum::trig_mode(grid, [0, 0, 0], 1.7, false).unwrap();
        prop_assert_eq!(apply_shifted_operator(&constant, &p).l2_norm(), 0.0);
    }

    #[test]
    fn shifted_solve_inverts_on_zero_mean(grid in grid_strategy(), p in frac_strategy(), seed in any::<u64>()) {
        let u = project_zero_mean(&forward_transform(&field(grid, seed)));
        let back = solve_linear(&apply_shifted_operator(&u, &p), &p, true).unwrap();
        prop_assert!(back.lincomb(1.0, &u, -1.0).l2_norm() <= 1e-10 * u.l2_norm().max(1.0));
    }

    #[test]
    fn padding_is_adjoint_to_truncation(seed in any::<u64>(), extra in 1usize..3) {
        let grid = TorusGrid::new(1, 2.0 * PI, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_spectrum(&grid, 3, 0.0, &mut rng);
        let fine_n = 8 * (1 + extra);
        let v = random_spectrum(&grid.with_points(fine_n).unwrap(), fine_n / 2 - 1, 0.0, &mut rng);
        let lhs = pad_spectrum(&u, fine_n).dot(&v);
        let rhs = u.dot(&truncate_spectrum(&v, &grid));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn energy_is_translation_invariant(seed in any::<u64>(), shift in 0.0f64..16.0) {
        let grid = TorusGrid::new(1, 2.0 * PI, 16).unwrap();
        let p = FracParams::new(0.5, 1.0).unwrap();
        let spec = NonlinearitySpec::new(NonlinearityKind::PurePower, 3.0, &grid, &p).unwrap();
        let fun = Functional::new(p, spec);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_spectrum(&grid, 4, 1.0, &mut rng);
        let moved = u.translated(0, shift);
        prop_assert!((fun.value(&u) - fun.value(&moved)).abs() <= 1e-10 * fun.value(&u).abs().max(1.0));
        prop_assert!(fun.quad(&u) >= 0.0);
    }

    #[test]
    fn competitors_never_beat_the_extension(seed in any::<u64>(), s in 0.1f64..0.9, rate in 0.3f64..3.0) {
        let grid = TorusGrid::new(1, 2.0 * PI, 8).unwrap();
        let p = FracParams::new(s, 0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_spectrum(&grid, 3, 1.0, &mut rng);
        let cyl = ModalCylinder::uniform(&u, &p, ProfileKind::Exponential { rate }).unwrap().sample(192);
        let gap = sharp_trace_gap(&cyl, &p).unwrap();
        prop_assert!(gap >= -1e-8 * cyl.energy(&p).max(1.0));
    }

    #[test]
    fn spectrum_json_round_trips(grid in grid_strategy(), seed in any::<u64>()) {
        let u = forward_transform(&field(grid, seed));
        let text = serde_json::to_string(&write_spectrum(&u)).unwrap();
        let back = read_spectrum(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back, u);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn theta_is_positive_and_decreasing(s in 0.05f64..0.95, y in 1e-3f64..30.0, dy in 1e-3f64..1.0) {
        let theta = ThetaProfile::new(s).unwrap();
        let a = theta.theta(y).unwrap();
        let b = theta.theta(y + dy).unwrap();
        prop_assert!(a > 0.0 && b > 0.0 && b < a && a <= 1.0);
    }
}
