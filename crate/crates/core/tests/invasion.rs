//! Properties of the long invasion run that sit beside the acceptance criteria.

use frontlab_core::harness::{prepare, simulate, Presets};
use frontlab_core::tracker::{emptiness_beyond, estimate_speed, FrontTrace, SlicePolicy};
use frontlab_core::wavefront::critical_speed;

#[test]
fn invasion_run_properties() {
    let presets = Presets::builtin().unwrap();
    let cfg = presets.get("invasion");
    let p = prepare(cfg).unwrap();
    let traj = simulate(cfg, &p).unwrap();
    let c_star = critical_speed(p.basis.lambda0()).unwrap();

    let speed = |theta: f64, policy: SlicePolicy| {
        let out = estimate_speed(&FrontTrace::from_trajectory(&traj, theta, policy), 0.5).unwrap();
        out.estimate().cloned().expect("front present")
    };
    let base = speed(traj.theta, SlicePolicy::Center);
    let doubled = speed(2.0 * traj.theta, SlicePolicy::Center);
    let max_y = speed(traj.theta, SlicePolicy::MaxOverY);
    assert!(
        (doubled.c_hat / base.c_hat - 1.0).abs() <= 0.02,
        "{doubled:?} vs {base:?}"
    );
    assert!(
        (max_y.c_hat / base.c_hat - 1.0).abs() <= 0.02,
        "{max_y:?} vs {base:?}"
    );
    // initial data are symmetric in x
    assert!(
        (base.c_right - base.c_left).abs() <= 0.02 * c_star,
        "{base:?}"
    );

    // modes with lambda_j > 1 carry almost no energy at the end
    let last = traj.diagnostics.last().unwrap();
    let tail: f64 = p
        .basis
        .eigenvalues
        .iter()
        .zip(&last.modes)
        .filter(|(lam, _)| **lam >= 1.0)
        .map(|(_, v)| v * v)
        .sum();
    assert!(tail < 1e-6, "tail energy {tail}");

    // emptiness holds for every speed above c*, not just 1.2 c*
    for k in [1.1, 1.3, 1.6] {
        let e = emptiness_beyond(&traj, k * c_star, c_star).unwrap();
        assert!(
            e.two_sided.last().unwrap() <= 1e-3 * p.steady.max_v(),
            "c = {k} c*"
        );
    }
    assert_eq!(traj.comparison_violations, 0);
    assert!(traj.violations.is_empty(), "{:?}", traj.violations);
}
