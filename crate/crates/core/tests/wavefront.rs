use frontlab_core::spectral::{
    assemble_operator, eigenpairs, Boundary, Diffusion, KernelShape, KernelSpec, PotentialSpec,
};
use frontlab_core::wavefront::{
    critical_speed, default_half_width, solve_kpp_profile, solve_kpp_profile_from, steady_state,
    NewtonOptions,
};
use frontlab_core::{Error, SpaceGrid, TraitGrid};
use proptest::prelude::*;

fn basis(alpha: f64) -> frontlab_core::spectral::SpectralBasis {
    let y = TraitGrid::new(8.0, 161).unwrap();
    let op = assemble_operator(
        &y,
        &PotentialSpec::harmonic(),
        alpha,
        Boundary::Dirichlet,
        Diffusion::Standard,
    )
    .unwrap();
    eigenpairs(&op, 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn steady_identity_holds(alpha in 0.05f64..0.9, amplitude in 0.2f64..5.0, width in 0.5f64..6.0) {
        let b = basis(alpha);
        let k = KernelSpec::new(KernelShape::Gaussian { amplitude, width });
        let s = steady_state(&b, &k).unwrap();
        prop_assert!(s.identity_defect() <= 1e-10);
        prop_assert!(s.v.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn profiles_are_monotone(lambda0 in 0.05f64..0.9, excess in 1.0f64..1.5) {
        let c = excess * critical_speed(lambda0).unwrap();
        let l = default_half_width(c, lambda0).unwrap();
        let n = 2 * (l / 0.1).ceil() as usize + 1;
        let p = solve_kpp_profile(c, lambda0, l, n).unwrap();
        prop_assert!(p.residual.newton_residual < 1e-10);
        for w in p.v.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn subcritical_speeds_rejected(lambda0 in 0.05f64..0.9, frac in 0.0f64..0.999) {
        let c = frac * critical_speed(lambda0).unwrap();
        let err = solve_kpp_profile(c, lambda0, 40.0, 401).unwrap_err();
        let is_below = matches!(err, Error::BelowCriticalSpeed { .. });
        prop_assert!(is_below);
    }
}

#[test]
fn faster_fronts_have_flatter_tails() {
    let lambda0 = 0.5;
    let c_star = critical_speed(lambda0).unwrap();
    let mut rates = Vec::new();
    for k in [1.1, 1.3, 1.6, 2.0] {
        let c = k * c_star;
        let l = default_half_width(c, lambda0).unwrap();
        let p = solve_kpp_profile(c, lambda0, l, 2 * (l / 0.05).ceil() as usize + 1).unwrap();
        rates.push(p.fitted_tail_rate().unwrap());
    }
    assert!(rates.windows(2).all(|w| w[0] > w[1]), "{rates:?}");
}

#[test]
fn extinct_regime_has_no_speed() {
    let b = basis(2.5);
    let s = steady_state(&b, &KernelSpec::constant(1.0)).unwrap();
    assert!(s.is_extinct());
    assert!(matches!(
        critical_speed(s.lambda0),
        Err(Error::NoFiniteSpeed(_))
    ));
}

#[test]
fn different_newton_starts_agree() {
    let lambda0 = 0.5;
    let c = 1.2 * critical_speed(lambda0).unwrap();
    let grid = SpaceGrid::new(40.0, 801).unwrap();
    let guess = |width: f64| -> Vec<f64> {
        grid.nodes()
            .iter()
            .map(|x| 0.5 * (1.0 - (x / width).tanh()))
            .collect()
    };
    let opts = NewtonOptions::default();
    let a = solve_kpp_profile_from(c, lambda0, &grid, guess(1.0), &opts).unwrap();
    let b = solve_kpp_profile_from(c, lambda0, &grid, guess(6.0), &opts).unwrap();
    let diff =
        a.v.iter()
            .zip(&b.v)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    assert!(diff < 1e-8, "profiles differ by {diff}");
}
