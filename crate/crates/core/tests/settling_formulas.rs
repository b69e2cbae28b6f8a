mod common;

use approx::assert_relative_eq;
use common::oracle::*;
use fbdyn::dynamics::{gain_kp, omega, settling_bounds, DynamicsParams};

#[test]
fn gain_matches_high_precision_oracle() {
    for row in GAIN_POINTS {
        let [b1, b2, b3, p1, p2, c, expected] = row;
        let k = gain_kp(b1, b2, b3, p1, p2, c).unwrap();
        assert_relative_eq!(k, expected, max_relative = 1e-12);
    }
    assert_relative_eq!(
        gain_kp(1.0, 1.0, 1.0, 0.5, 1.5, 0.0).unwrap(),
        GAIN_UNIT,
        max_relative = 1e-12
    );
}

#[test]
fn gain_at_zero_b3_is_the_limit() {
    let k = gain_kp(20.0, 200.0, 0.0, 0.99, 1.01, 0.5).unwrap();
    assert_relative_eq!(k, GAIN_B3_ZERO, max_relative = 1e-12);
}

#[test]
fn omega_matches_oracle() {
    let p = DynamicsParams::new(20.0, 200.0, 0.0, 0.99, 1.01, 0.0, 5.0, 1.0).unwrap();
    assert_relative_eq!(omega(&p, 4.0), OMEGA_R4, max_relative = 1e-12);
}

#[test]
fn gain_is_decreasing_in_b1_b2_b3() {
    for row in GAIN_POINTS {
        let [b1, b2, b3, p1, p2, c, _] = row;
        let k = gain_kp(b1, b2, b3, p1, p2, c).unwrap();
        assert!(gain_kp(b1 * 1.1, b2, b3, p1, p2, c).unwrap() < k);
        assert!(gain_kp(b1, b2 * 1.1, b3, p1, p2, c).unwrap() < k);
        assert!(gain_kp(b1, b2, b3 * 1.1, p1, p2, c).unwrap() < k);
    }
}

#[test]
fn gain_diverges_as_c_approaches_one() {
    let mut last = 0.0;
    for k in 1..=12 {
        let c = 1.0 - 10f64.powi(-k);
        let g = gain_kp(20.0, 200.0, 5.0, 0.99, 1.01, c).unwrap();
        assert!(g > last);
        last = g;
    }
    assert!(last > 1e9);
}

#[test]
fn settling_bound_is_t_p_times_a_fixed_fraction() {
    // M₁, M₂ scale with K_p/T_p, so the Lyapunov bound scales with T_p.
    let c = 0.6;
    let short = DynamicsParams::predefined_time(20.0, 200.0, 5.0, 0.99, 1.01, 1.0, c).unwrap();
    let long = DynamicsParams::predefined_time(20.0, 200.0, 5.0, 0.99, 1.01, 8.0, c).unwrap();
    let (bs, bl) = (
        settling_bounds(&short, c).unwrap(),
        settling_bounds(&long, c).unwrap(),
    );
    assert_relative_eq!(bl.t_max / bs.t_max, 8.0, max_relative = 1e-12);
    assert_relative_eq!(
        bl.bound_polyakov.unwrap() / bs.bound_polyakov.unwrap(),
        8.0,
        max_relative = 1e-12
    );
    // πζ/√(b₁b₂) does not depend on the gain at all
    assert_eq!(bl.bound_statement, bs.bound_statement);
}

#[test]
fn lyapunov_bound_never_exceeds_horizon_with_computed_gain() {
    // With K_p from the gain formula, ∫ dV / (M₁V^{r₁} + M₂V^{r₂}) over (0, ∞)
    // is at most T_p; T_max overestimates that integral.
    for row in GAIN_POINTS {
        let [b1, b2, b3, p1, p2, c, _] = row;
        for t_p in [0.5, 5.0] {
            let p = DynamicsParams::predefined_time(b1, b2, b3, p1, p2, t_p, c).unwrap();
            let s = settling_bounds(&p, c).unwrap();
            let a = 2.0 * b3 * (1.0 - c) * p.gain();
            let exact = 1.0 / (a * (1.0 - s.r1)) * (a / s.m1).ln_1p()
                + 1.0 / (a * (s.r2 - 1.0)) * (a / s.m2).ln_1p();
            assert_relative_eq!(exact, t_p, max_relative = 1e-10);
            assert!(s.t_max >= t_p * (1.0 - 1e-12));
        }
    }
}
