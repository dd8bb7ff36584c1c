//! Explosive predator-prey model `x' = x^2 (b/y - 1)`, `y' = -y^2 (d/x - 1)`.
//!
//! In the scaled reciprocal plane `X = sqrt(d/b)/x`, `Y = 1/y` the flow is a
//! rigid counterclockwise rotation with angular speed `sqrt(bd)` about
//! `(1/sqrt(bd), 1/b)`. Every orbit is a circle: it is a periodic orbit when
//! the circle stays in the open first quadrant, and otherwise the population
//! whose coordinate reaches zero first blows up at that moment.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{require_positive, LinearSystem2D, PopulationState};
use crate::ode::{integrate, Direction, EventSpec, IntegratorConfig, Termination, Trajectory};
use crate::Species;

/// Relative tolerance on `R - min(center)` below which an orbit is reported
/// as tangent to an axis.
pub const TANGENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitConstants {
    pub c1: f64,
    pub c2: f64,
    pub radius: f64,
    /// Rest point `(1/sqrt(bd), 1/b)` of the scaled reciprocal system.
    pub center: [f64; 2],
    /// Angle of the initial point about `center`, in `[0, 2 pi)`.
    pub start_angle: f64,
}

impl OrbitConstants {
    /// Point on the circle at angle `phi` about the center.
    pub fn point_at_angle(&self, phi: f64) -> [f64; 2] {
        [
            self.center[0] + self.radius * phi.cos(),
            self.center[1] + self.radius * phi.sin(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum OrbitClass {
    Periodic {
        period: f64,
        radius: f64,
        /// `(d/2, b/2)`; the orbit stays strictly above both.
        lower_bounds: [f64; 2],
    },
    BlowUp {
        species: Species,
        time: f64,
        /// Finite positive limit of the other population at `time`.
        other_limit: f64,
    },
    /// Circle tangent to an axis, or meeting both axes at a corner.
    Degenerate { margin: f64 },
}

fn frequency(b: f64, d: f64) -> f64 {
    (b * d).sqrt()
}

/// Scaled reciprocal coordinates `(sqrt(d/b)/x, 1/y)`.
pub fn scaled_reciprocal(b: f64, d: f64, s: PopulationState) -> [f64; 2] {
    [(d / b).sqrt() / s.x, 1.0 / s.y]
}

pub fn from_scaled_reciprocal(b: f64, d: f64, z: [f64; 2]) -> Result<PopulationState> {
    PopulationState::new((d / b).sqrt() / z[0], 1.0 / z[1])
}

/// `X' = -sqrt(bd) Y + sqrt(d/b)`, `Y' = sqrt(bd) X - 1`.
pub fn scaled_system(b: f64, d: f64) -> Result<LinearSystem2D> {
    require_positive(&[("b", b), ("d", d)])?;
    let w = frequency(b, d);
    Ok(LinearSystem2D::constant(
        [[0.0, -w], [w, 0.0]],
        [(d / b).sqrt(), -1.0],
    ))
}

pub fn period(b: f64, d: f64) -> f64 {
    TAU / frequency(b, d)
}

pub fn orbit_constants(b: f64, d: f64, x0: f64, y0: f64) -> Result<OrbitConstants> {
    require_positive(&[("b", b), ("d", d), ("x0", x0), ("y0", y0)])?;
    let w = frequency(b, d);
    let c1 = (d / b).sqrt() / x0 - 1.0 / w;
    let c2 = 1.0 / y0 - 1.0 / b;
    let radius = c1.hypot(c2);
    let start_angle = if radius == 0.0 {
        0.0
    } else {
        c2.atan2(c1).rem_euclid(TAU)
    };
    Ok(OrbitConstants {
        c1,
        c2,
        radius,
        center: [1.0 / w, 1.0 / b],
        start_angle,
    })
}

/// Closed-form scaled reciprocal state at time `t`.
pub fn closed_reciprocal(b: f64, d: f64, k: &OrbitConstants, t: f64) -> [f64; 2] {
    let (s, c) = (frequency(b, d) * t).sin_cos();
    [
        k.center[0] + k.c1 * c - k.c2 * s,
        k.center[1] + k.c1 * s + k.c2 * c,
    ]
}

/// Closed-form population state at `t >= 0`, valid until the first blow-up.
pub fn closed_solution(b: f64, d: f64, k: &OrbitConstants, t: f64) -> Result<PopulationState> {
    if let Some((_, hit_time, _)) = first_axis_hit(b, d, k) {
        if t >= hit_time {
            return Err(Error::BlowUpPassed { t: hit_time });
        }
    }
    let z = closed_reciprocal(b, d, k, t);
    if z[0] <= 0.0 || z[1] <= 0.0 {
        return Err(Error::BlowUpPassed { t });
    }
    from_scaled_reciprocal(b, d, z)
}

/// First counterclockwise crossing of an axis: (species that blows up,
/// time, angle of the crossing). `None` if the circle never reaches an axis.
fn first_axis_hit(b: f64, d: f64, k: &OrbitConstants) -> Option<(Species, f64, f64)> {
    let [xc, yc] = k.center;
    let r = k.radius;
    let mut best: Option<(Species, f64)> = None;
    let mut consider = |species: Species, phi: f64| {
        let delta = (phi - k.start_angle).rem_euclid(TAU);
        if best.is_none_or(|(_, bd)| delta < bd) {
            best = Some((species, delta));
        }
    };
    // X = 0 (the Y-axis) -> x blows up
    if r >= xc && r > 0.0 {
        let a = (-xc / r).clamp(-1.0, 1.0).acos();
        consider(Species::X, a);
        consider(Species::X, -a);
    }
    // Y = 0 (the X-axis) -> y blows up
    if r >= yc && r > 0.0 {
        let a = (-yc / r).clamp(-1.0, 1.0).asin();
        consider(Species::Y, a);
        consider(Species::Y, PI - a);
    }
    best.map(|(species, delta)| (species, delta / frequency(b, d), k.start_angle + delta))
}

pub fn classify_orbit(b: f64, d: f64, x0: f64, y0: f64) -> Result<OrbitClass> {
    let k = orbit_constants(b, d, x0, y0)?;
    classify_constants(b, d, &k)
}

pub fn classify_constants(b: f64, d: f64, k: &OrbitConstants) -> Result<OrbitClass> {
    let nearest = k.center[0].min(k.center[1]);
    let tol = TANGENCY_TOL * nearest;
    let margin = nearest - k.radius;
    if margin > tol {
        return Ok(OrbitClass::Periodic {
            period: period(b, d),
            radius: k.radius,
            lower_bounds: [d / 2.0, b / 2.0],
        });
    }
    if margin.abs() <= tol {
        return Ok(OrbitClass::Degenerate { margin });
    }
    let (species, time, phi) = first_axis_hit(b, d, k).ok_or_else(|| {
        Error::NumericalFailure("circle leaves quadrant without an axis hit".into())
    })?;
    let [hx, hy] = k.point_at_angle(phi);
    // the surviving coordinate at the crossing; zero means a corner hit
    let surviving = match species {
        Species::X => hy,
        Species::Y => hx,
    };
    let other_tol = TANGENCY_TOL * k.center[0].max(k.center[1]);
    if surviving <= other_tol {
        return Ok(OrbitClass::Degenerate { margin: surviving });
    }
    let other_limit = match species {
        Species::X => 1.0 / surviving,
        Species::Y => (d / b).sqrt() / surviving,
    };
    Ok(OrbitClass::BlowUp {
        species,
        time,
        other_limit,
    })
}

/// True iff the orbit is periodic and every sample satisfies
/// `x > d/2` and `y > b/2`.
pub fn period_bounds_check(
    b: f64,
    d: f64,
    orbit: &OrbitClass,
    samples: &[PopulationState],
) -> bool {
    match orbit {
        OrbitClass::Periodic { .. } => samples.iter().all(|s| s.x > d / 2.0 && s.y > b / 2.0),
        _ => false,
    }
}

/// Numeric integration of the scaled reciprocal system with terminal axis
/// events (index 0: `X = 0`, index 1: `Y = 0`).
pub fn integrate_scaled(
    b: f64,
    d: f64,
    init: PopulationState,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<2>> {
    let sys = scaled_system(b, d)?;
    sys.integrate_to_axes(scaled_reciprocal(b, d, init), (0.0, t_end), cfg)
}

/// Return time to the ray from the center through the initial point,
/// measured by a Poincare section on the numeric flow.
pub fn measure_return_time(
    b: f64,
    d: f64,
    init: PopulationState,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let k = orbit_constants(b, d, init.x, init.y)?;
    if k.radius == 0.0 {
        return Err(Error::Degenerate("rest point has no return section".into()));
    }
    let sys = scaled_system(b, d)?;
    let z0 = scaled_reciprocal(b, d, init);
    let [xc, yc] = k.center;
    let r0 = [z0[0] - xc, z0[1] - yc];
    let section = EventSpec::new(
        move |_, z: &[f64; 2]| r0[0] * (z[1] - yc) - r0[1] * (z[0] - xc),
        Direction::Increasing,
        true,
    );
    let horizon = 2.0 * period(b, d);
    let tr = integrate(|t, z| sys.rate(t, z), z0, (0.0, horizon), cfg, &[section])?;
    match tr.termination() {
        Termination::Event { .. } => Ok(tr.t_end()),
        other => Err(Error::NumericalFailure(format!(
            "no return within {horizon}: {other:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const B: f64 = 3.0;
    const D: f64 = 2.0;

    #[test]
    fn constants_at_rest_point() {
        let k = orbit_constants(B, D, 2.0, 3.0).unwrap();
        assert!(k.c1.abs() < 1e-15 && k.c2.abs() < 1e-15);
        assert!(k.radius < 1e-15);
    }

    #[test]
    fn constants_examples() {
        // frozen from a 30-digit evaluation
        let k = orbit_constants(B, D, 20.0, 30.0).unwrap();
        assert!((k.c1 - -0.3674234614174767).abs() < 1e-15);
        assert!((k.c2 - -0.3).abs() < 1e-15);
        assert!((k.radius - 0.4743416490252569).abs() < 1e-15);

        let k = orbit_constants(B, D, 10.0, 3.0).unwrap();
        assert!((k.c1 - -0.32659863237109044).abs() < 1e-15);
        assert_eq!(k.c2, 0.0);
        assert!((k.radius - 0.32659863237109044).abs() < 1e-15);
    }

    #[test]
    fn constants_reproduce_initial_point() {
        let k = orbit_constants(B, D, 20.0, 30.0).unwrap();
        let p = k.point_at_angle(k.start_angle);
        let z = closed_reciprocal(B, D, &k, 0.0);
        let s = scaled_reciprocal(B, D, PopulationState { x: 20.0, y: 30.0 });
        for i in 0..2 {
            assert!((p[i] - s[i]).abs() < 1e-15);
            assert!((z[i] - s[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn constants_reject_bad_input() {
        assert!(matches!(
            orbit_constants(B, D, 0.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(orbit_constants(-1.0, D, 1.0, 1.0).is_err());
    }

    #[test]
    fn closed_solution_period_return() {
        let k = orbit_constants(B, D, 10.0, 3.0).unwrap();
        let s = closed_solution(B, D, &k, period(B, D)).unwrap();
        assert!(
            (s.x - 10.0).abs() < 1e-12 && (s.y - 3.0).abs() < 1e-12,
            "{s:?}"
        );

        let rest = orbit_constants(B, D, 2.0, 3.0).unwrap();
        let s = closed_solution(B, D, &rest, 1.234).unwrap();
        assert!((s.x - 2.0).abs() < 1e-14 && (s.y - 3.0).abs() < 1e-14);
    }

    #[test]
    fn closed_solution_half_period_is_reflection() {
        let k = orbit_constants(B, D, 10.0, 3.0).unwrap();
        let z0 = closed_reciprocal(B, D, &k, 0.0);
        let zh = closed_reciprocal(B, D, &k, 0.5 * period(B, D));
        for i in 0..2 {
            assert!((zh[i] - (2.0 * k.center[i] - z0[i])).abs() < 1e-14);
        }
        // x at the reflected point: X = 2/sqrt6 - sqrt(2/3)/10
        let s = closed_solution(B, D, &k, 0.5 * period(B, D)).unwrap();
        let xr = (2.0f64 / 3.0).sqrt() / (2.0 / 6f64.sqrt() - (2.0f64 / 3.0).sqrt() / 10.0);
        assert!((s.x - xr).abs() < 1e-12);
        assert!((s.y - 3.0).abs() < 1e-12);
    }

    #[test]
    fn closed_solution_past_blowup() {
        let k = orbit_constants(B, D, 20.0, 30.0).unwrap();
        assert!(closed_solution(B, D, &k, 0.01).is_ok());
        assert!(matches!(
            closed_solution(B, D, &k, 0.05),
            Err(Error::BlowUpPassed { .. })
        ));
        // past the crossing the circle re-enters the quadrant; still an error
        assert!(closed_solution(B, D, &k, 2.0).is_err());
    }

    #[test]
    fn classify_periodic() {
        match classify_orbit(B, D, 10.0, 3.0).unwrap() {
            OrbitClass::Periodic {
                period: p,
                radius,
                lower_bounds,
            } => {
                assert!((p - 2.565099660323728).abs() < 1e-12);
                assert!((radius - 0.32660).abs() < 1e-5);
                assert_eq!(lower_bounds, [1.0, 1.5]);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            classify_orbit(B, D, 2.0, 3.0).unwrap(),
            OrbitClass::Periodic { radius, .. } if radius < 1e-15
        ));
    }

    #[test]
    fn classify_blowup_y_first() {
        match classify_orbit(B, D, 20.0, 30.0).unwrap() {
            OrbitClass::BlowUp {
                species,
                time,
                other_limit,
            } => {
                assert_eq!(species, Species::Y);
                // crossing-angle value frozen from a 30-digit evaluation
                assert!((time - 0.038_581_898_270_979_4).abs() < 1e-12, "{time}");
                assert!(
                    (other_limit - 11.536672323215682).abs() < 1e-9,
                    "{other_limit}"
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_blowup_other_cases() {
        // small x0 puts the start right of the center at angle 0; rotating
        // counterclockwise it travels up and over to the Y-axis
        let k = orbit_constants(B, D, 0.5, 3.0).unwrap();
        assert!(k.start_angle.abs() < 1e-15);
        match classify_constants(B, D, &k).unwrap() {
            OrbitClass::BlowUp {
                species,
                time,
                other_limit,
            } => {
                assert_eq!(species, Species::X);
                // hit angle acos(-1/3) since R = 3 Xc
                let expect = (-1.0f64 / 3.0).acos() / 6f64.sqrt();
                assert!((time - expect).abs() < 1e-14);
                assert!(other_limit > 0.0);
            }
            other => panic!("{other:?}"),
        }
        match classify_orbit(B, D, 5.0, 0.8).unwrap() {
            OrbitClass::BlowUp { species, .. } => assert_eq!(species, Species::X),
            other => panic!("{other:?}"),
        }
        // the circle only reaches the X-axis, after most of a revolution
        match classify_orbit(B, D, 1.5, 100.0).unwrap() {
            OrbitClass::BlowUp { species, time, .. } => {
                assert_eq!(species, Species::Y);
                assert!(time > 0.5 * period(B, D));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_tangency_is_degenerate() {
        // R exactly equal to 1/b with c1 = 0: y0 = 1/(2/b)
        let class = classify_orbit(B, D, 2.0, 1.5).unwrap();
        assert!(matches!(class, OrbitClass::Degenerate { .. }), "{class:?}");
    }

    #[test]
    fn bounds_check() {
        let orbit = classify_orbit(B, D, 2.0, 3.0).unwrap();
        assert!(period_bounds_check(
            B,
            D,
            &orbit,
            &[PopulationState { x: 2.0, y: 3.0 }]
        ));

        let orbit = classify_orbit(B, D, 10.0, 3.0).unwrap();
        let k = orbit_constants(B, D, 10.0, 3.0).unwrap();
        let p = period(B, D);
        let samples: Vec<_> = (0..10_000)
            .map(|i| closed_solution(B, D, &k, p * i as f64 / 10_000.0).unwrap())
            .collect();
        assert!(period_bounds_check(B, D, &orbit, &samples));

        let mut bad = samples.clone();
        bad[17].x = D / 2.0;
        assert!(!period_bounds_check(B, D, &orbit, &bad));

        let blow = classify_orbit(B, D, 20.0, 30.0).unwrap();
        assert!(!period_bounds_check(B, D, &blow, &samples));
    }

    #[test]
    fn numeric_event_matches_crossing_angle() {
        let tr = integrate_scaled(
            B,
            D,
            PopulationState { x: 20.0, y: 30.0 },
            1.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(tr.termination(), Termination::Event { index: 1 });
        assert!((tr.t_end() - 0.038_581_898_270_979_4).abs() < 1e-9);
    }

    #[test]
    fn rest_point_trajectory_is_constant() {
        let tr = integrate_scaled(
            B,
            D,
            PopulationState { x: 2.0, y: 3.0 },
            5.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let z0 = [1.0 / 6f64.sqrt(), 1.0 / 3.0];
        for s in tr.states() {
            assert!((s[0] - z0[0]).abs() < 1e-14 && (s[1] - z0[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn return_time_is_period() {
        let t = measure_return_time(
            B,
            D,
            PopulationState { x: 10.0, y: 3.0 },
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!((t / period(B, D) - 1.0).abs() < 1e-8);
    }
}
