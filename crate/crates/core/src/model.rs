//! The two-species model family
//!
//! ```text
//! x' = a x + x^2 (b / y + e)
//! y' = d y + y^2 (c / x + f)
//! ```
//!
//! and its exact linearization under `X = 1/x`, `Y = 1/y`:
//!
//! ```text
//! X' = -a X - b Y - e
//! Y' = -c X - d Y - f
//! ```
//!
//! Analysis modules work in reciprocal coordinates, where the dynamics are
//! linear and blow-up of a population is a zero crossing. Conversion to
//! population coordinates happens only at the edges.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, EventSpec, IntegratorConfig, Termination, Trajectory};
use crate::Species;

/// Six-coefficient model. Any signs are accepted here; the named
/// constructors pin the sign conventions of the predator-prey and
/// competing-species specializations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl GeneralModel {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Result<Self> {
        let m = Self { a, b, c, d, e, f };
        if [a, b, c, d, e, f].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite coefficient in {m:?}"
            )));
        }
        Ok(m)
    }

    /// `x' = x^2 (b/y - 1)`, `y' = -y^2 (d/x - 1)`.
    ///
    /// `d` here is the predator's limitation coefficient, which lands in the
    /// general model's `c` slot with a negative sign.
    pub fn predator_prey(b: f64, d: f64) -> Result<Self> {
        require_positive(&[("b", b), ("d", d)])?;
        Self::new(0.0, b, -d, 0.0, -1.0, 1.0)
    }

    /// `x' = a x + x^2 (b/y - 1)`, `y' = d y + y^2 (c/x - 1)`.
    pub fn competing(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        require_positive(&[("a", a), ("b", b), ("c", c), ("d", d)])?;
        Self::new(a, b, c, d, -1.0, -1.0)
    }

    /// Right-hand side in population coordinates.
    pub fn vector_field(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        if x == 0.0 || y == 0.0 {
            return Err(Error::Domain(format!(
                "vector field undefined at ({x}, {y})"
            )));
        }
        Ok([
            self.a * x + x * x * (self.b / y + self.e),
            self.d * y + y * y * (self.c / x + self.f),
        ])
    }

    pub fn linearize(&self) -> LinearSystem2D {
        linearize(self)
    }
}

pub(crate) fn require_positive(values: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in values {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    Ok(())
}

/// A point in the open first quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub x: f64,
    pub y: f64,
}

impl PopulationState {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        require_positive(&[("x", x), ("y", y)])?;
        Ok(Self { x, y })
    }

    pub fn to_reciprocal(self) -> ReciprocalState {
        ReciprocalState {
            inv_x: 1.0 / self.x,
            inv_y: 1.0 / self.y,
        }
    }
}

/// `(1/x, 1/y)`. A coordinate reaching zero means the matching population
/// has blown up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalState {
    pub inv_x: f64,
    pub inv_y: f64,
}

impl ReciprocalState {
    pub fn to_population(self) -> Result<PopulationState> {
        PopulationState::new(1.0 / self.inv_x, 1.0 / self.inv_y)
    }

    pub fn as_array(self) -> [f64; 2] {
        [self.inv_x, self.inv_y]
    }
}

pub fn to_reciprocal(s: PopulationState) -> Result<ReciprocalState> {
    require_positive(&[("x", s.x), ("y", s.y)])?;
    Ok(s.to_reciprocal())
}

/// Truncated Fourier series
/// `mean + sum_k cos[k-1] cos(2 pi k t/p) + sin[k-1] sin(2 pi k t/p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PeriodicFunctionRepr", deny_unknown_fields)]
pub struct PeriodicFunction {
    period: f64,
    mean: f64,
    #[serde(default)]
    cos: Vec<f64>,
    #[serde(default)]
    sin: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PeriodicFunctionRepr {
    period: f64,
    #[serde(default)]
    mean: f64,
    #[serde(default)]
    cos: Vec<f64>,
    #[serde(default)]
    sin: Vec<f64>,
}

impl TryFrom<PeriodicFunctionRepr> for PeriodicFunction {
    type Error = Error;

    fn try_from(r: PeriodicFunctionRepr) -> Result<Self> {
        Self::new(r.period, r.mean, r.cos, r.sin)
    }
}

impl PeriodicFunction {
    pub fn new(period: f64, mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        require_positive(&[("period", period)])?;
        if !mean.is_finite() || cos.iter().chain(&sin).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite Fourier coefficient".into()));
        }
        Ok(Self {
            period,
            mean,
            cos,
            sin,
        })
    }

    pub fn constant(period: f64, value: f64) -> Result<Self> {
        Self::new(period, value, Vec::new(), Vec::new())
    }

    pub fn zero(period: f64) -> Result<Self> {
        Self::constant(period, 0.0)
    }

    /// `mean + amplitude * sin(2 pi t/p)`
    pub fn sine(period: f64, mean: f64, amplitude: f64) -> Result<Self> {
        Self::new(period, mean, vec![0.0], vec![amplitude])
    }

    /// `mean + amplitude * cos(2 pi t/p)`
    pub fn cosine(period: f64, mean: f64, amplitude: f64) -> Result<Self> {
        Self::new(period, mean, vec![amplitude], vec![0.0])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn cos_coefficients(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coefficients(&self) -> &[f64] {
        &self.sin
    }

    pub fn harmonics(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|&v| v == 0.0)
    }

    /// Argument is reduced modulo the period before the phase is formed, so
    /// `f(t + p)` and `f(t)` differ only by the rounding of that reduction.
    pub fn eval(&self, t: f64) -> f64 {
        let phase = TAU * t.rem_euclid(self.period) / self.period;
        let mut acc = self.mean;
        for k in 0..self.harmonics() {
            let arg = (k + 1) as f64 * phase;
            let (s, c) = arg.sin_cos();
            acc += self.cos.get(k).copied().unwrap_or(0.0) * c
                + self.sin.get(k).copied().unwrap_or(0.0) * s;
        }
        acc
    }

    /// `(sin, cos)` of the base harmonic at `t`, for [`Self::eval_at_phase`].
    pub fn base_phase(&self, t: f64) -> (f64, f64) {
        (TAU * t.rem_euclid(self.period) / self.period).sin_cos()
    }

    /// [`Self::eval`] from a precomputed base phase, with higher harmonics
    /// by angle addition. Lets series sharing a period share the trig work.
    pub fn eval_at_phase(&self, (s1, c1): (f64, f64)) -> f64 {
        let mut acc = self.mean;
        let (mut s, mut c) = (s1, c1);
        for k in 0..self.harmonics() {
            if k > 0 {
                (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
            }
            acc += self.cos.get(k).copied().unwrap_or(0.0) * c
                + self.sin.get(k).copied().unwrap_or(0.0) * s;
        }
        acc
    }

    /// Same series with `offset` added to the mean.
    pub fn offset(&self, offset: f64) -> Self {
        Self {
            mean: self.mean + offset,
            ..self.clone()
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            period: self.period,
            mean: self.mean * factor,
            cos: self.cos.iter().map(|v| v * factor).collect(),
            sin: self.sin.iter().map(|v| v * factor).collect(),
        }
    }

    /// Sup-norm bound `|mean| + sum |coefficients|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.mean.abs()
            + self
                .cos
                .iter()
                .chain(&self.sin)
                .map(|v| v.abs())
                .sum::<f64>()
    }

    /// Lower bound `mean - sum |harmonic coefficients|` of the function.
    pub fn lower_bound(&self) -> f64 {
        self.mean
            - self
                .cos
                .iter()
                .chain(&self.sin)
                .map(|v| v.abs())
                .sum::<f64>()
    }

    /// Upper bound `mean + sum |harmonic coefficients|` of the function.
    pub fn upper_bound(&self) -> f64 {
        self.mean
            + self
                .cos
                .iter()
                .chain(&self.sin)
                .map(|v| v.abs())
                .sum::<f64>()
    }
}

/// Matrix entry of a linear system: either a constant or periodic in time.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    Periodic(PeriodicFunction),
}

impl Coefficient {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::Periodic(f) => f.eval(t),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Coefficient::Constant(v)
    }
}

impl From<PeriodicFunction> for Coefficient {
    fn from(f: PeriodicFunction) -> Self {
        Coefficient::Periodic(f)
    }
}

/// `z' = M(t) z + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem2D {
    pub matrix: [[Coefficient; 2]; 2],
    pub offset: [f64; 2],
}

impl LinearSystem2D {
    pub fn constant(matrix: [[f64; 2]; 2], offset: [f64; 2]) -> Self {
        Self {
            matrix: matrix.map(|row| row.map(Coefficient::Constant)),
            offset,
        }
    }

    /// The constant matrix, or `None` if any entry varies in time.
    pub fn constant_matrix(&self) -> Option<[[f64; 2]; 2]> {
        let mut out = [[0.0; 2]; 2];
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                match entry {
                    Coefficient::Constant(v) => out[i][j] = *v,
                    Coefficient::Periodic(_) => return None,
                }
            }
        }
        Some(out)
    }

    pub fn matrix_at(&self, t: f64) -> [[f64; 2]; 2] {
        [
            [self.matrix[0][0].eval(t), self.matrix[0][1].eval(t)],
            [self.matrix[1][0].eval(t), self.matrix[1][1].eval(t)],
        ]
    }

    pub fn rate(&self, t: f64, z: &[f64; 2]) -> [f64; 2] {
        let m = self.matrix_at(t);
        [
            m[0][0] * z[0] + m[0][1] * z[1] + self.offset[0],
            m[1][0] * z[0] + m[1][1] * z[1] + self.offset[1],
        ]
    }

    /// Same matrix with the constant terms dropped.
    pub fn homogeneous(&self) -> Self {
        Self {
            matrix: self.matrix.clone(),
            offset: [0.0; 2],
        }
    }

    /// Integrate in reciprocal coordinates, stopping at the first axis
    /// crossing. Event index 0 is `X = 0` (x blows up), index 1 is `Y = 0`.
    pub fn integrate_to_axes(
        &self,
        init: [f64; 2],
        t_span: (f64, f64),
        cfg: &IntegratorConfig,
    ) -> Result<Trajectory<2>> {
        let events = [EventSpec::zero_crossing(0), EventSpec::zero_crossing(1)];
        Ok(integrate(
            |t, z| self.rate(t, z),
            init,
            t_span,
            cfg,
            &events,
        )?)
    }
}

/// Species whose population blew up when [`LinearSystem2D::integrate_to_axes`]
/// stopped on an axis.
pub fn blown_up_species(tr: &Trajectory<2>) -> Option<Species> {
    match tr.termination() {
        Termination::Event { index: 0 } => Some(Species::X),
        Termination::Event { index: 1 } => Some(Species::Y),
        _ => None,
    }
}

/// `X' = -a X - b Y - e`, `Y' = -c X - d Y - f`.
pub fn linearize(m: &GeneralModel) -> LinearSystem2D {
    LinearSystem2D::constant([[-m.a, -m.b], [-m.c, -m.d]], [-m.e, -m.f])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_examples() {
        let r = to_reciprocal(PopulationState::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(
            r,
            ReciprocalState {
                inv_x: 1.0,
                inv_y: 1.0
            }
        );

        let r = to_reciprocal(PopulationState { x: 2.0, y: 3.0 }).unwrap();
        assert_eq!(r.inv_x, 0.5);
        assert!((r.inv_y - 1.0 / 3.0).abs() < 1e-16);

        let s = PopulationState::new(20.0, 30.0).unwrap();
        let back = s.to_reciprocal().to_population().unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn reciprocal_rejects_nonpositive() {
        assert!(matches!(
            to_reciprocal(PopulationState { x: 0.0, y: 1.0 }),
            Err(Error::Domain(_))
        ));
        assert!(PopulationState::new(1.0, -2.0).is_err());
    }

    #[test]
    fn linearize_predator_prey() {
        let sys = GeneralModel::predator_prey(3.0, 2.0).unwrap().linearize();
        assert_eq!(sys.constant_matrix().unwrap(), [[0.0, -3.0], [2.0, 0.0]]);
        assert_eq!(sys.offset, [1.0, -1.0]);
    }

    #[test]
    fn linearize_competing() {
        let sys = GeneralModel::competing(4.0, 1.0, 1.0, 5.0)
            .unwrap()
            .linearize();
        assert_eq!(sys.constant_matrix().unwrap(), [[-4.0, -1.0], [-1.0, -5.0]]);
        assert_eq!(sys.offset, [1.0, 1.0]);
    }

    #[test]
    fn linearize_zero_model() {
        let sys = GeneralModel::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
            .unwrap()
            .linearize();
        assert_eq!(sys.rate(0.3, &[1.7, -2.0]), [0.0, 0.0]);
    }

    #[test]
    fn specializations_enforce_signs() {
        assert!(GeneralModel::predator_prey(0.0, 2.0).is_err());
        assert!(GeneralModel::competing(1.0, 1.0, -1.0, 1.0).is_err());
        assert!(GeneralModel::new(f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn vector_field_examples() {
        let pp = GeneralModel::predator_prey(3.0, 2.0).unwrap();
        assert_eq!(pp.vector_field(2.0, 3.0).unwrap(), [0.0, 0.0]);
        assert_eq!(pp.vector_field(1.0, 3.0).unwrap(), [0.0, -9.0]);

        let cs = GeneralModel::competing(4.0, 1.0, 1.0, 5.0).unwrap();
        let v = cs.vector_field(19.0 / 4.0, 19.0 / 3.0).unwrap();
        assert!(v[0].abs() < 1e-12 && v[1].abs() < 1e-12, "{v:?}");

        assert!(matches!(pp.vector_field(0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn vector_field_matches_short_trajectory() {
        // forward Euler with a tiny step approximates the derivative
        let pp = GeneralModel::predator_prey(3.0, 2.0).unwrap();
        let h = 1e-7;
        let v = pp.vector_field(1.0, 3.0).unwrap();
        let mut y = 3.0;
        let mut x = 1.0;
        for _ in 0..10 {
            let k = pp.vector_field(x, y).unwrap();
            x += h * k[0];
            y += h * k[1];
        }
        assert!(((y - 3.0) / (10.0 * h) - v[1]).abs() < 1e-4);
    }

    #[test]
    fn periodic_function_eval() {
        let f = PeriodicFunction::new(2.0, 1.0, vec![0.5], vec![0.0, 0.25]).unwrap();
        assert!((f.eval(0.0) - 1.5).abs() < 1e-15);
        // t = p/4: cos(pi/2)=0, sin(pi)=0
        assert!((f.eval(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(f.harmonics(), 2);
        assert!(PeriodicFunction::new(0.0, 1.0, vec![], vec![]).is_err());
    }

    #[test]
    fn shared_phase_matches_direct_eval() {
        let f = PeriodicFunction::new(0.7, 0.3, vec![1.0, -0.5, 0.25, 2.0], vec![0.1, 0.0, -1.5])
            .unwrap();
        for i in 0..100 {
            let t = -3.0 + 0.0731 * i as f64;
            assert!((f.eval_at_phase(f.base_phase(t)) - f.eval(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn periodic_function_rejects_unknown_keys() {
        let ok: PeriodicFunction =
            serde_json::from_str(r#"{"period":1,"mean":2,"cos":[1]}"#).unwrap();
        assert_eq!(ok.eval(0.0), 3.0);
        assert!(serde_json::from_str::<PeriodicFunction>(r#"{"period":1,"amp":2}"#).is_err());
        assert!(serde_json::from_str::<PeriodicFunction>(r#"{"period":-1}"#).is_err());
    }
}
