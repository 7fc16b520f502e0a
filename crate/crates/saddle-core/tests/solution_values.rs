//! Full-scale spot checks of solved fields: far-field values against the 1D
//! layer, the sandwich between monotone limits, and the certificate in the
//! next even dimension above 14.

use saddle_core::geometry::DimensionParams;
use saddle_core::grid::QuadrantGrid;
use saddle_core::linearized::{auto_b, certify_supersolution, SlackPolicy};
use saddle_core::nonlinearity::BistableNonlinearity;
use saddle_core::profile::Profile1D;
use saddle_core::solver::{
    initialize, monotone_iterate, newton_solve, InitKind, SolverConfig, SolverMode,
};

fn desk() -> (BistableNonlinearity, Profile1D, f64) {
    let nl = BistableNonlinearity::allen_cahn();
    let prof = Profile1D::build(&nl, 12.0, 0.01).unwrap();
    (nl, prof, 12.0 * 2.0f64.sqrt())
}

#[test]
fn planar_solution_tracks_the_layer_on_the_axis() {
    // At (s,t) = (6,0) the planar solution sits within 0.02 of tanh(3),
    // the layer value at z = 6/sqrt(2).
    let (nl, prof, s_max) = desk();
    let grid = QuadrantGrid::new(s_max, 0.1, DimensionParams::new(1));
    let init = initialize(&grid, &prof, InitKind::FromApproximant);
    let sol = newton_solve(&init, &SolverConfig::default(), &nl).unwrap();
    let i = (6.0 / grid.h()).round() as usize;
    let s = grid.coord(i); // nearest node to s = 6 (h is S/170, not exactly 0.1)
    let v = sol.field.get(i, 0);
    let layer = (s / 2.0).tanh(); // u0(s/sqrt(2)) for Allen-Cahn
    assert!(
        (v - layer).abs() <= 0.02,
        "u({s},0) = {v} vs layer value {layer}"
    );
}

#[test]
fn solution_is_sandwiched_between_start_and_zero() {
    // Monotone from the approximant start decreases pointwise, so the limit
    // sits below the sampled U and above 0 everywhere.
    let (nl, prof, s_max) = desk();
    let grid = QuadrantGrid::new(s_max, 0.15, DimensionParams::new(2));
    let init = initialize(&grid, &prof, InitKind::FromApproximant);
    let cfg = SolverConfig {
        mode: SolverMode::Monotone,
        ..Default::default()
    };
    let sol = monotone_iterate(&init, &cfg, &nl).unwrap();
    for i in 0..grid.n() {
        for j in 0..=i {
            let u = sol.field.get(i, j);
            let upper = init.get(i, j);
            assert!(
                u <= upper + 1e-10,
                "u({i},{j}) = {u} above the supersolution start {upper}"
            );
            assert!(u >= 0.0);
        }
    }
}

#[test]
fn certificate_holds_in_dimension_sixteen() {
    // 2m = 16: the admissible range is [3-sqrt(2), 3+sqrt(2)]; the midpoint
    // certificate passes just as in dimension 14.
    let (nl, prof, s_max) = desk();
    let d = DimensionParams::new(8);
    let grid = QuadrantGrid::new(s_max, 0.1, d);
    let init = initialize(&grid, &prof, InitKind::FromApproximant);
    let sol = newton_solve(&init, &SolverConfig::default(), &nl).unwrap();
    let b = auto_b(d).unwrap();
    assert!((b - 3.0).abs() < 1e-12);
    let cert = certify_supersolution(&sol, &nl, &prof, b, SlackPolicy::default()).unwrap();
    assert!(
        cert.verdict && cert.min_phi > 0.0,
        "2m=16 certificate: min_phi {:.3e}, worst {:?}",
        cert.min_phi,
        cert.worst
    );
}

#[test]
fn certificate_fails_without_an_admissible_exponent() {
    let (nl, prof, s_max) = desk();

    // 2m = 12: the exponent inequality has no positive root; the best-effort
    // override b = 2 is refuted numerically, worst at the cone itself.
    let grid = QuadrantGrid::new(s_max, 0.1, DimensionParams::new(6));
    let init = initialize(&grid, &prof, InitKind::FromApproximant);
    let sol = newton_solve(&init, &SolverConfig::default(), &nl).unwrap();
    let cert = certify_supersolution(&sol, &nl, &prof, 2.0, SlackPolicy::default()).unwrap();
    assert!(
        !cert.verdict,
        "2m=12 must not certify (max_Lphi {:.3e})",
        cert.max_l_phi
    );
    let (ws, wt, lphi, slack) = cert.worst;
    assert!(lphi > slack, "violation expected at ({ws:.2}, {wt:.2})");

    // 2m = 14 with b = 10, far outside [2, 3]: also refuted.
    let grid = QuadrantGrid::new(s_max, 0.1, DimensionParams::new(7));
    let init = initialize(&grid, &prof, InitKind::FromApproximant);
    let sol = newton_solve(&init, &SolverConfig::default(), &nl).unwrap();
    let cert = certify_supersolution(&sol, &nl, &prof, 10.0, SlackPolicy::default()).unwrap();
    assert!(!cert.verdict, "b = 10 must not certify at 2m=14");
}
