use corrlab_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn far_grid(r_max: f64) -> RadialGrid {
    RadialGrid::stretched(StretchedLayout {
        fine_step: 0.02,
        fine_extent: 6.0,
        growth: 1.03,
        max_step: 0.25,
        r_max,
    })
    .unwrap()
}

fn gaussian(grid: RadialGrid, w: f64, mu: f64) -> RadialField {
    RadialField::from_fn(grid, |r| Complex64::new((-r * r / w).exp(), 0.0), mu).unwrap()
}

#[test]
fn moller_defect_decreases_with_t0() {
    let f = gaussian(far_grid(1200.0), 25.0, 1.0);
    let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
    let d: Vec<f64> = [25.0, 50.0, 100.0]
        .iter()
        .map(|&t0| moller_transform(&f, &v, t0, MollerDirection::Adjoint).unwrap().cauchy_defect)
        .collect();
    assert!(d[1] < d[0] && d[2] < d[1], "{d:?}");
}

#[test]
fn intertwining_residual_shrinks_with_t0() {
    // e^{−iht}ψ against Ω e^{−iH₀t} Ω*ψ, both factors at finite t₀
    let f = gaussian(far_grid(1200.0), 25.0, 1.0);
    let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
    let zero = PotentialSpec::bump(0.0, 1.0).unwrap();
    let opts = EvolveOptions::conservative();
    let t = 5.0;
    let direct = evolve_radial_with(&f, &v, t, 0.02, &opts).unwrap().field;
    let residual = |t0: f64| {
        let back = moller_transform(&f, &v, t0, MollerDirection::Adjoint).unwrap().field;
        let moved = evolve_radial_with(&back, &zero, t, 0.02, &opts).unwrap().field;
        let there = moller_transform(&moved, &v, t0, MollerDirection::Forward).unwrap().field;
        there.difference_norm(&direct).unwrap() / f.norm()
    };
    let r: Vec<f64> = [25.0, 50.0, 100.0].iter().map(|&t0| residual(t0)).collect();
    assert!(r[1] < r[0] && r[2] < r[1], "{r:?}");
    assert!(r[2] < 0.05, "{r:?}");
}

#[test]
fn cartesian_agrees_with_radial_on_the_window() {
    let (w, mu, t) = (2.0, 2.0, 0.5);
    let v = PotentialSpec::bump(1.0, 1.5).unwrap();
    let n = 128;
    let side = 24.0;
    let cart = CartesianField::from_fn(n, side, mu, |x| {
        Complex64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / w).exp(), 0.0)
    })
    .unwrap();
    let (cart_t, rep) = evolve_cartesian(&cart, &v, t, 0.005).unwrap();
    assert!(!rep.wraparound_warning);
    let radial = gaussian(RadialGrid::uniform(0.005, 30.0).unwrap(), w, mu);
    let rad_t = evolve_radial_with(&radial, &v, t, 0.001, &EvolveOptions::conservative()).unwrap().field;
    let nodes = rad_t.grid().nodes();
    let at = |r: f64| {
        let i = rad_t.grid().locate(r).min(nodes.len() - 2);
        let s = (r - nodes[i]) / (nodes[i + 1] - nodes[i]);
        rad_t.samples()[i] * (1.0 - s) + rad_t.samples()[i + 1] * s
    };
    let mut err = 0.0f64;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let (x, y, z) = (cart_t.coordinate(i), cart_t.coordinate(j), cart_t.coordinate(k));
                let r = (x * x + y * y + z * z).sqrt();
                if r <= 4.0 {
                    err = err.max((cart_t.at(i, j, k) - at(r)).norm());
                }
            }
        }
    }
    assert!(err < 1e-4, "{err}");
}

#[test]
fn zero_time_is_identity_for_every_engine() {
    let f = gaussian(far_grid(50.0), 4.0, 2.0);
    let v = PotentialSpec::bump(5.0, 1.0).unwrap();
    assert_eq!(evolve_radial(&f, &v, 0.0, 0.01).unwrap().samples(), f.samples());
    let g = gaussian(RadialGrid::uniform(0.05, 50.0).unwrap(), 4.0, 1.0);
    // the spectral engine still round-trips through its transform
    let free = evolve_free(&g, 1.0, 0.0).unwrap().field;
    let err = free.samples().iter().zip(g.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-10, "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn crank_nicolson_is_unitary_and_reversible(
        w in 1.0f64..8.0,
        amplitude in 0.0f64..20.0,
        phase in -1.0f64..1.0,
        t in 0.1f64..3.0,
        mu in prop_oneof![Just(1.0), Just(2.0)],
    ) {
        let grid = far_grid(80.0);
        let f = RadialField::from_fn(grid, |r| Complex64::from_polar((-r * r / w).exp(), phase * r), mu).unwrap();
        let v = PotentialSpec::bump(amplitude, 1.0).unwrap();
        let opts = EvolveOptions::conservative();
        let out = evolve_radial_with(&f, &v, t, 0.01, &opts).unwrap();
        prop_assert!((out.report.final_norm / out.report.initial_norm - 1.0).abs() < 1e-10);
        let e0 = out.report.initial_energy;
        prop_assert!((out.report.final_energy - e0).abs() <= 1e-6 * e0.abs().max(1e-12));
        let back = evolve_radial_with(&out.field, &v, -t, 0.01, &opts).unwrap().field;
        prop_assert!(back.difference_norm(&f).unwrap() / f.norm() < 1e-7);
    }

    #[test]
    fn free_evolution_is_unitary_and_composes(w in 1.0f64..8.0, t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let f = gaussian(RadialGrid::uniform(0.05, 100.0).unwrap(), w, 1.0);
        let whole = evolve_free(&f, 1.0, t1 + t2).unwrap().field;
        let parts = evolve_free(&evolve_free(&f, 1.0, t1).unwrap().field, 1.0, t2).unwrap().field;
        prop_assert!((whole.norm() / f.norm() - 1.0).abs() < 1e-12);
        prop_assert!(whole.difference_norm(&parts).unwrap() / f.norm() < 1e-10);
    }
}
