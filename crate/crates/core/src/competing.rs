//! Explosive competing species `x' = a x + x^2 (b/y - 1)`,
//! `y' = d y + y^2 (c/x - 1)` with `a, b, c, d > 0`.
//!
//! In reciprocal coordinates the model is `Z' = A Z + (1, 1)` with
//! `A = [[-a, -b], [-c, -d]]`, solved exactly over the eigenbasis of `A`.
//! A population blows up when its reciprocal coordinate first reaches zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{require_positive, GeneralModel, LinearSystem2D, PopulationState};
use crate::Species;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestPoint {
    pub inv_x: f64,
    pub inv_y: f64,
}

impl RestPoint {
    pub fn in_first_quadrant(&self) -> bool {
        self.inv_x > 0.0 && self.inv_y > 0.0
    }

    /// Coexistence populations `(1/X0, 1/Y0)` when the rest point is interior.
    pub fn populations(&self) -> Option<PopulationState> {
        self.in_first_quadrant().then(|| PopulationState {
            x: 1.0 / self.inv_x,
            y: 1.0 / self.inv_y,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenStructure {
    /// `lambda_1 <= lambda_2`
    pub eigenvalues: [f64; 2],
    /// Unit eigenvectors, second component positive.
    pub eigenvectors: [[f64; 2]; 2],
    /// `(a - d)^2 + 4 b c`
    pub discriminant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionClass {
    /// `d > b` and `a > c`
    StableNode,
    /// `d < b` and `a < c`
    Saddle,
    RestPointOutsideQuadrant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Coexistence {
        limits: [f64; 2],
    },
    BlowUp {
        species: Species,
        time: f64,
        other_limit: f64,
    },
}

pub fn model(a: f64, b: f64, c: f64, d: f64) -> Result<GeneralModel> {
    GeneralModel::competing(a, b, c, d)
}

/// `X' = -a X - b Y + 1`, `Y' = -c X - d Y + 1`.
pub fn reciprocal_system(a: f64, b: f64, c: f64, d: f64) -> Result<LinearSystem2D> {
    Ok(model(a, b, c, d)?.linearize())
}

pub fn rest_point(a: f64, b: f64, c: f64, d: f64) -> Result<RestPoint> {
    let det = a * d - b * c;
    if det == 0.0 {
        return Err(Error::SingularSystem { det });
    }
    Ok(RestPoint {
        inv_x: (d - b) / det,
        inv_y: (a - c) / det,
    })
}

pub fn eigen_structure(a: f64, b: f64, c: f64, d: f64) -> Result<EigenStructure> {
    require_positive(&[("a", a), ("b", b), ("c", c), ("d", d)])?;
    let discriminant = (a - d) * (a - d) + 4.0 * b * c;
    let root = discriminant.sqrt();
    let eigenvalues = [0.5 * (-a - d - root), 0.5 * (-a - d + root)];
    let vector = |sign: f64| {
        let first = -(-a + d + sign * root) / (2.0 * c);
        let n = first.hypot(1.0);
        [first / n, 1.0 / n]
    };
    Ok(EigenStructure {
        eigenvalues,
        eigenvectors: [vector(-1.0), vector(1.0)],
        discriminant,
    })
}

pub fn classify_interaction(a: f64, b: f64, c: f64, d: f64) -> Result<InteractionClass> {
    require_positive(&[("a", a), ("b", b), ("c", c), ("d", d)])?;
    if d == b || a == c {
        return Err(Error::Degenerate(format!(
            "boundary parameters (d - b = {}, a - c = {})",
            d - b,
            a - c
        )));
    }
    Ok(if d > b && a > c {
        InteractionClass::StableNode
    } else if d < b && a < c {
        InteractionClass::Saddle
    } else {
        InteractionClass::RestPointOutsideQuadrant
    })
}

/// Exact reciprocal trajectory
/// `Z(t) = Z0 + c1 e^{l1 t} v1 + c2 e^{l2 t} v2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSolution {
    pub rest: RestPoint,
    pub eigen: EigenStructure,
    pub coefficients: [f64; 2],
}

impl LinearSolution {
    pub fn eval(&self, t: f64) -> [f64; 2] {
        let [l1, l2] = self.eigen.eigenvalues;
        let [v1, v2] = self.eigen.eigenvectors;
        let [c1, c2] = self.coefficients;
        let (e1, e2) = (c1 * (l1 * t).exp(), c2 * (l2 * t).exp());
        [
            self.rest.inv_x + e1 * v1[0] + e2 * v2[0],
            self.rest.inv_y + e1 * v1[1] + e2 * v2[1],
        ]
    }

    fn component(&self, k: usize) -> Exponentials {
        let [v1, v2] = self.eigen.eigenvectors;
        let rest = [self.rest.inv_x, self.rest.inv_y];
        Exponentials {
            constant: rest[k],
            terms: [
                (self.coefficients[0] * v1[k], self.eigen.eigenvalues[0]),
                (self.coefficients[1] * v2[k], self.eigen.eigenvalues[1]),
            ],
        }
    }

    /// First `t > 0` at which a reciprocal coordinate reaches zero, with the
    /// species whose population blows up there.
    pub fn first_axis_crossing(&self) -> Option<(Species, f64)> {
        let [l1, l2] = self.eigen.eigenvalues;
        let h = 1f64.min(1.0 / l1.abs().max(l2.abs())) / 64.0;
        let hits = [Species::X, Species::Y]
            .into_iter()
            .enumerate()
            .filter_map(|(k, species)| self.component(k).first_root(h).map(|t| (species, t)));
        hits.min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// `constant + sum coeff * exp(rate * t)` with two terms.
struct Exponentials {
    constant: f64,
    terms: [(f64, f64); 2],
}

impl Exponentials {
    fn eval(&self, t: f64) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|(c, l)| c * (l * t).exp())
                .sum::<f64>()
    }

    /// Where the derivative vanishes; at most one point for two exponentials.
    fn critical_time(&self) -> Option<f64> {
        let [(a, l1), (b, l2)] = self.terms;
        if a == 0.0 || b == 0.0 || l1 == l2 || l1 == 0.0 {
            return None;
        }
        let ratio = -b * l2 / (a * l1);
        (ratio > 0.0)
            .then(|| ratio.ln() / (l1 - l2))
            .filter(|t| *t > 0.0 && t.is_finite())
    }

    fn limit_sign(&self) -> f64 {
        let growing = self
            .terms
            .iter()
            .filter(|(c, l)| *c != 0.0 && *l > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match growing {
            Some((c, _)) => c.signum(),
            None if self.constant == 0.0 => 0.0,
            None => self.constant.signum(),
        }
    }

    /// Bracketed scan at resolution `h` over the non-monotone stretch, then a
    /// doubling search over the monotone tail, refined by bisection.
    fn first_root(&self, h: f64) -> Option<f64> {
        if self.eval(0.0) <= 0.0 {
            return Some(0.0);
        }
        let crit = self.critical_time();
        let scan_end = crit.unwrap_or(0.0) + h;
        let mut nodes: Vec<f64> = (1..)
            .map(|i| i as f64 * h)
            .take_while(|&t| t <= scan_end + 0.5 * h)
            .collect();
        nodes.extend(crit);
        nodes.sort_by(f64::total_cmp);

        let mut prev = 0.0;
        for &t in &nodes {
            if self.eval(t) <= 0.0 {
                return Some(self.bisect(prev, t));
            }
            prev = t;
        }
        if self.limit_sign() >= 0.0 {
            return None;
        }
        let mut lo = prev;
        let mut step = h;
        loop {
            let hi = lo + step;
            if !hi.is_finite() {
                return None;
            }
            if self.eval(hi) <= 0.0 {
                return Some(self.bisect(lo, hi));
            }
            lo = hi;
            step *= 2.0;
        }
    }

    fn bisect(&self, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Coefficients of the initial reciprocal state over the eigenbasis.
pub fn solve_linear(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    inv_x0: f64,
    inv_y0: f64,
) -> Result<LinearSolution> {
    let rest = rest_point(a, b, c, d)?;
    let eigen = eigen_structure(a, b, c, d)?;
    let [v1, v2] = eigen.eigenvectors;
    let det = v1[0] * v2[1] - v2[0] * v1[1];
    // distinct real eigenvalues give independent eigenvectors
    assert!(
        det.abs() > 1e-300,
        "eigenvector matrix singular for discriminant {}",
        eigen.discriminant
    );
    let r = [inv_x0 - rest.inv_x, inv_y0 - rest.inv_y];
    let c1 = (r[0] * v2[1] - v2[0] * r[1]) / det;
    let c2 = (v1[0] * r[1] - r[0] * v1[1]) / det;
    Ok(LinearSolution {
        rest,
        eigen,
        coefficients: [c1, c2],
    })
}

pub fn predict_outcome(a: f64, b: f64, c: f64, d: f64, x0: f64, y0: f64) -> Result<Outcome> {
    let class = classify_interaction(a, b, c, d)?;
    let init = PopulationState::new(x0, y0)?.to_reciprocal();
    let sol = solve_linear(a, b, c, d, init.inv_x, init.inv_y)?;
    if let Some((species, time)) = sol.first_axis_crossing() {
        let z = sol.eval(time);
        let surviving = match species {
            Species::X => z[1],
            Species::Y => z[0],
        };
        if surviving <= 0.0 {
            return Err(Error::Degenerate(format!(
                "both coordinates vanish at t = {time}"
            )));
        }
        return Ok(Outcome::BlowUp {
            species,
            time,
            other_limit: 1.0 / surviving,
        });
    }
    match class {
        InteractionClass::StableNode => Ok(Outcome::Coexistence {
            limits: [1.0 / sol.rest.inv_x, 1.0 / sol.rest.inv_y],
        }),
        InteractionClass::Saddle => Err(Error::Degenerate(
            "initial point lies on the stable manifold of the saddle".into(),
        )),
        InteractionClass::RestPointOutsideQuadrant => Err(Error::NumericalFailure(
            "trajectory toward an exterior rest point never crossed an axis".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_point_examples() {
        let r = rest_point(4.0, 1.0, 1.0, 5.0).unwrap();
        assert!((r.inv_x - 4.0 / 19.0).abs() < 1e-16);
        assert!((r.inv_y - 3.0 / 19.0).abs() < 1e-16);
        let r = rest_point(1.0, 3.0, 2.0, 1.0).unwrap();
        assert!((r.inv_x - 0.4).abs() < 1e-16 && (r.inv_y - 0.2).abs() < 1e-16);
        assert!(matches!(
            rest_point(1.0, 1.0, 1.0, 1.0),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn rest_point_is_equilibrium_of_vector_field() {
        let m = model(4.0, 1.0, 1.0, 5.0).unwrap();
        let p = rest_point(4.0, 1.0, 1.0, 5.0)
            .unwrap()
            .populations()
            .unwrap();
        let v = m.vector_field(p.x, p.y).unwrap();
        assert!(v[0].abs() < 1e-12 && v[1].abs() < 1e-12);
    }

    fn char_poly_roots(a: f64, b: f64, c: f64, d: f64) -> [f64; 2] {
        // lambda^2 + (a + d) lambda + (ad - bc), stable form
        let (p, q) = (a + d, a * d - b * c);
        let disc = (p * p - 4.0 * q).sqrt();
        let r1 = -0.5 * (p + disc);
        let r2 = q / r1;
        if r1 < r2 {
            [r1, r2]
        } else {
            [r2, r1]
        }
    }

    #[test]
    fn eigenvalues_match_characteristic_polynomial() {
        let e = eigen_structure(4.0, 1.0, 1.0, 5.0).unwrap();
        let s5 = 5f64.sqrt();
        assert!((e.eigenvalues[0] - (-9.0 - s5) / 2.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - (-9.0 + s5) / 2.0).abs() < 1e-14);
        let r = char_poly_roots(4.0, 1.0, 1.0, 5.0);
        assert!((e.eigenvalues[0] - r[0]).abs() < 1e-12 && (e.eigenvalues[1] - r[1]).abs() < 1e-12);

        let e = eigen_structure(1.0, 3.0, 2.0, 1.0).unwrap();
        let s6 = 6f64.sqrt();
        assert!((e.eigenvalues[0] - (-1.0 - s6)).abs() < 1e-14);
        assert!((e.eigenvalues[1] - (-1.0 + s6)).abs() < 1e-14);
        assert!(e.eigenvalues[0] < 0.0 && e.eigenvalues[1] > 0.0);
    }

    #[test]
    fn symmetric_eigenvalues() {
        let e = eigen_structure(3.0, 0.5, 0.5, 3.0).unwrap();
        assert!((e.eigenvalues[0] - -3.5).abs() < 1e-14);
        assert!((e.eigenvalues[1] - -2.5).abs() < 1e-14);
        assert!((e.discriminant - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvectors_satisfy_definition() {
        for &(a, b, c, d) in &[
            (4.0, 1.0, 1.0, 5.0),
            (1.0, 3.0, 2.0, 1.0),
            (0.3, 7.0, 0.01, 2.0),
        ] {
            let e = eigen_structure(a, b, c, d).unwrap();
            for (l, v) in e.eigenvalues.iter().zip(e.eigenvectors) {
                let av = [-a * v[0] - b * v[1], -c * v[0] - d * v[1]];
                assert!((av[0] - l * v[0]).abs() < 1e-10 && (av[1] - l * v[1]).abs() < 1e-10);
                assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-15);
                assert!(v[1] > 0.0);
            }
        }
    }

    #[test]
    fn saddle_unstable_vector_has_mixed_signs() {
        let e = eigen_structure(1.0, 3.0, 2.0, 1.0).unwrap();
        let v = e.eigenvectors[1];
        assert!(v[0] * v[1] < 0.0);
    }

    #[test]
    fn interaction_classes() {
        assert_eq!(
            classify_interaction(4.0, 1.0, 1.0, 5.0).unwrap(),
            InteractionClass::StableNode
        );
        assert_eq!(
            classify_interaction(1.0, 3.0, 2.0, 1.0).unwrap(),
            InteractionClass::Saddle
        );
        assert_eq!(
            classify_interaction(2.0, 1.0, 3.0, 2.0).unwrap(),
            InteractionClass::RestPointOutsideQuadrant
        );
        assert!(matches!(
            classify_interaction(2.0, 1.0, 3.0, 1.0),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            classify_interaction(2.0, 1.0, 2.0, 5.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn solve_linear_reproduces_initial_data() {
        let s = solve_linear(4.0, 1.0, 1.0, 5.0, 5.0, 0.1).unwrap();
        let z = s.eval(0.0);
        assert!((z[0] - 5.0).abs() < 1e-12 && (z[1] - 0.1).abs() < 1e-12);

        let r = rest_point(4.0, 1.0, 1.0, 5.0).unwrap();
        let s = solve_linear(4.0, 1.0, 1.0, 5.0, r.inv_x, r.inv_y).unwrap();
        assert!(s.coefficients[0].abs() < 1e-15 && s.coefficients[1].abs() < 1e-15);
    }

    #[test]
    fn closed_form_satisfies_ode() {
        let (a, b, c, d) = (1.0, 3.0, 2.0, 1.0);
        let s = solve_linear(a, b, c, d, 1.0, 1.0).unwrap();
        let h = 1e-6;
        for &t in &[0.0, 0.3, 1.1] {
            let z = s.eval(t);
            let (zp, zm) = (s.eval(t + h), s.eval(t - h));
            let dz = [(zp[0] - zm[0]) / (2.0 * h), (zp[1] - zm[1]) / (2.0 * h)];
            assert!((dz[0] - (-a * z[0] - b * z[1] + 1.0)).abs() < 1e-6);
            assert!((dz[1] - (-c * z[0] - d * z[1] + 1.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn saddle_escape_direction_follows_unstable_coefficient() {
        let s = solve_linear(1.0, 3.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        let v2 = s.eigen.eigenvectors[1];
        let (species, _) = s.first_axis_crossing().unwrap();
        // c2 v2 drives one coordinate to -infinity
        let falling = if s.coefficients[1] * v2[0] < 0.0 {
            Species::X
        } else {
            Species::Y
        };
        assert_eq!(species, falling);
    }

    #[test]
    fn coexistence_near_rest_point() {
        match predict_outcome(4.0, 1.0, 1.0, 5.0, 4.7, 6.4).unwrap() {
            Outcome::Coexistence { limits } => {
                assert!((limits[0] - 4.75).abs() < 1e-12);
                assert!((limits[1] - 19.0 / 3.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stable_node_can_exit_quadrant() {
        match predict_outcome(4.0, 1.0, 1.0, 5.0, 0.2, 10.0).unwrap() {
            Outcome::BlowUp {
                species,
                time,
                other_limit,
            } => {
                assert_eq!(species, Species::Y);
                // event time of an independent high-accuracy integration
                assert!((time - 0.02493692).abs() < 1e-7, "{time}");
                assert!((other_limit - 0.21987966).abs() < 1e-7, "{other_limit}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn saddle_always_blows_up() {
        for &(x0, y0) in &[(1.0, 1.0), (0.5, 8.0), (9.0, 0.3), (2.0, 5.0)] {
            assert!(matches!(
                predict_outcome(1.0, 3.0, 2.0, 1.0, x0, y0).unwrap(),
                Outcome::BlowUp { time, other_limit, .. } if time > 0.0 && other_limit > 0.0
            ));
        }
    }

    #[test]
    fn stable_manifold_is_degenerate() {
        // start on the stable eigenline of the saddle, c2 = 0
        let r = rest_point(1.0, 3.0, 2.0, 1.0).unwrap();
        let v1 = eigen_structure(1.0, 3.0, 2.0, 1.0).unwrap().eigenvectors[0];
        let z = [r.inv_x + 0.05 * v1[0], r.inv_y + 0.05 * v1[1]];
        let s = solve_linear(1.0, 3.0, 2.0, 1.0, z[0], z[1]).unwrap();
        assert!(s.coefficients[1].abs() < 1e-15);
    }

    #[test]
    fn double_crossing_is_caught_at_critical_point() {
        // constant + A e^{-10 t} + B e^{-t}: dips below zero, then recovers to 0.5
        let f = Exponentials {
            constant: 0.5,
            terms: [(5.0, -10.0), (-4.7, -1.0)],
        };
        let t = f.first_root(1.0 / 64.0).unwrap();
        assert!(f.eval(t).abs() < 1e-12);
        assert!(t > 0.0);
    }
}
