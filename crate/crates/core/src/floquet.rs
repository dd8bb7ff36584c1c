//! Periodically forced predator-prey model
//! `x' = x^2 ((b + beta(t))/y - 1)`, `y' = -y^2 ((d + delta(t))/x - 1)`.
//!
//! Its reciprocal form `X' = -(b + beta) Y + 1`, `Y' = (d + delta) X - 1` is
//! linear with `p`-periodic coefficients. Away from resonance
//! (`sqrt(bd) p != 2 pi m`) the monodromy matrix `F(p)` has no unit
//! multiplier and the forced system has exactly one `p`-periodic solution,
//! obtained from `(I - F(p)) z0 = z(p; 0)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{require_positive, Coefficient, LinearSystem2D, PeriodicFunction};
use crate::ode::{integrate, IntegratorConfig, Trajectory};
use crate::par::{self, Execution};

/// Absolute distance of `sqrt(bd) p` from `2 pi m` treated as resonant.
pub const RESONANCE_TOL: f64 = 1e-6;
/// Condition number of `I - F(p)` beyond which the solve is refused.
pub const MAX_CONDITION: f64 = 1e12;
pub const DEFAULT_SAMPLES: usize = 256;

pub type Matrix2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicModel {
    pub b: f64,
    pub d: f64,
    pub beta: PeriodicFunction,
    pub delta: PeriodicFunction,
}

impl PeriodicModel {
    pub fn new(b: f64, d: f64, beta: PeriodicFunction, delta: PeriodicFunction) -> Result<Self> {
        require_positive(&[("b", b), ("d", d)])?;
        let (p, q) = (beta.period(), delta.period());
        if (p - q).abs() > 1e-12 * p.max(q) {
            return Err(Error::InvalidInput(format!(
                "beta period {p} differs from delta period {q}"
            )));
        }
        Ok(Self { b, d, beta, delta })
    }

    pub fn unperturbed(b: f64, d: f64, period: f64) -> Result<Self> {
        Self::new(
            b,
            d,
            PeriodicFunction::zero(period)?,
            PeriodicFunction::zero(period)?,
        )
    }

    pub fn period(&self) -> f64 {
        self.beta.period()
    }

    /// `X' = -(b + beta) Y + 1`, `Y' = (d + delta) X - 1`.
    pub fn reciprocal_system(&self) -> LinearSystem2D {
        LinearSystem2D {
            matrix: [
                [
                    Coefficient::Constant(0.0),
                    self.beta.offset(self.b).scaled(-1.0).into(),
                ],
                [self.delta.offset(self.d).into(), Coefficient::Constant(0.0)],
            ],
            offset: [1.0, -1.0],
        }
    }
}

/// Distance from `sqrt(bd) p` to the nearest `2 pi m`, and that `m`.
pub fn resonance_distance(b: f64, d: f64, period: f64) -> (f64, i64) {
    let omega_p = (b * d).sqrt() * period;
    let m = (omega_p / TAU).round();
    ((omega_p - TAU * m).abs(), m as i64)
}

pub fn check_resonance(b: f64, d: f64, period: f64) -> Result<()> {
    let (distance, m) = resonance_distance(b, d, period);
    if distance <= RESONANCE_TOL {
        return Err(Error::Resonance {
            omega_p: (b * d).sqrt() * period,
            m,
            distance,
        });
    }
    Ok(())
}

/// Normalized fundamental matrix of `X' = -b Y`, `Y' = d X`.
pub fn analytic_f0(b: f64, d: f64, t: f64) -> Matrix2 {
    let (s, c) = ((b * d).sqrt() * t).sin_cos();
    [[c, -(b / d).sqrt() * s], [(d / b).sqrt() * s, c]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FundamentalMethod {
    Numeric,
    AnalyticUnperturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalMatrix {
    pub matrix: Matrix2,
    pub method: FundamentalMethod,
}

impl FundamentalMatrix {
    pub fn analytic(b: f64, d: f64, period: f64) -> Self {
        Self {
            matrix: analytic_f0(b, d, period),
            method: FundamentalMethod::AnalyticUnperturbed,
        }
    }

    pub fn trace(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    pub fn det(&self) -> f64 {
        det(&self.matrix)
    }
}

fn det(m: &Matrix2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `F(p)` from two column integrations of the homogeneous system, run
/// concurrently under [`Execution::Parallel`].
pub fn fundamental_matrix(
    m: &PeriodicModel,
    cfg: &IntegratorConfig,
    exec: Execution,
) -> Result<FundamentalMatrix> {
    let hom = m.reciprocal_system().homogeneous();
    let p = m.period();
    let column = |init: [f64; 2]| -> Result<[f64; 2]> {
        let tr = integrate(|t, z| hom.rate(t, z), init, (0.0, p), cfg, &[])?;
        Ok(tr.final_state())
    };
    let (c0, c1) = par::join(exec, || column([1.0, 0.0]), || column([0.0, 1.0]));
    let (c0, c1) = (c0?, c1?);
    Ok(FundamentalMatrix {
        matrix: [[c0[0], c1[0]], [c0[1], c1[1]]],
        method: FundamentalMethod::Numeric,
    })
}

/// Eigenvalues of `F(p)` from its trace and determinant.
pub fn floquet_multipliers(f: &FundamentalMatrix) -> [Complex64; 2] {
    let (tr, dt) = (f.trace(), f.det());
    let disc = tr * tr - 4.0 * dt;
    if disc >= 0.0 {
        let root = disc.sqrt();
        // larger-magnitude root first, the other from the product
        let big = 0.5 * (tr + tr.signum() * root);
        if big == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        let small = dt / big;
        let (lo, hi) = if big < small {
            (big, small)
        } else {
            (small, big)
        };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(0.5 * tr, im), Complex64::new(0.5 * tr, -im)]
    }
}

/// 2-norm condition number of a 2x2 matrix from its singular values.
pub fn condition_number(m: &Matrix2) -> f64 {
    let [[a, b], [c, d]] = *m;
    let s = a * a + b * b + c * c + d * d;
    let dt = (a * d - b * c).abs();
    let root = (s * s - 4.0 * dt * dt).max(0.0).sqrt();
    let smax = (0.5 * (s + root)).sqrt();
    if dt == 0.0 {
        return f64::INFINITY;
    }
    let smin = dt / smax;
    smax / smin
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSample {
    pub t: f64,
    /// `(X_p, Y_p)`
    pub reciprocal: [f64; 2],
    /// `(1/X_p, 1/Y_p)`; meaningful only where both are positive.
    pub population: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetReport {
    pub fundamental: FundamentalMatrix,
    pub multipliers: [Complex64; 2],
    pub product: f64,
    pub trace: f64,
    pub resonance_distance: f64,
    pub nearest_resonance: i64,
    pub condition_number: f64,
    /// Periodic initial condition `(X_p(0), Y_p(0))`.
    pub initial: [f64; 2],
    pub closure_residual: f64,
    pub samples: Vec<PeriodicSample>,
    /// Every sample and every accepted step has `X_p, Y_p > 0`.
    pub positive: bool,
}

impl FloquetReport {
    /// Largest deviation of the sampled populations from `target`.
    pub fn max_population_deviation(&self, target: [f64; 2]) -> f64 {
        self.samples
            .iter()
            .map(|s| {
                (s.population[0] - target[0])
                    .abs()
                    .max((s.population[1] - target[1]).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Integrate the forced reciprocal system from `init` over `t_span`.
pub fn forced_trajectory(
    m: &PeriodicModel,
    init: [f64; 2],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory<2>> {
    let sys = m.reciprocal_system();
    Ok(integrate(|t, z| sys.rate(t, z), init, t_span, cfg, &[])?)
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// The unique `p`-periodic solution of the forced system, sampled at
/// `n_samples` equally spaced times on `[0, p]`.
pub fn periodic_solution(
    m: &PeriodicModel,
    n_samples: usize,
    cfg: &IntegratorConfig,
    exec: Execution,
) -> Result<FloquetReport> {
    let p = m.period();
    check_resonance(m.b, m.d, p)?;
    let (resonance_distance, nearest_resonance) = resonance_distance(m.b, m.d, p);

    let fundamental = fundamental_matrix(m, cfg, exec)?;
    let multipliers = floquet_multipliers(&fundamental);
    let f = fundamental.matrix;
    let lhs = [[1.0 - f[0][0], -f[0][1]], [-f[1][0], 1.0 - f[1][1]]];
    let condition = condition_number(&lhs);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::NearResonance { condition });
    }

    let w = forced_trajectory(m, [0.0, 0.0], (0.0, p), cfg)?.final_state();
    let dl = det(&lhs);
    let z0 = [
        (lhs[1][1] * w[0] - lhs[0][1] * w[1]) / dl,
        (lhs[0][0] * w[1] - lhs[1][0] * w[0]) / dl,
    ];

    let tr = forced_trajectory(m, z0, (0.0, p), cfg)?;
    let end = tr.final_state();
    let closure_residual = norm([end[0] - z0[0], end[1] - z0[1]]);
    let closure_tol = 1e-8 * (1.0 + norm(z0));
    if closure_residual >= closure_tol {
        return Err(Error::NumericalFailure(format!(
            "periodic solution does not close: residual {closure_residual:e} >= {closure_tol:e}"
        )));
    }

    let samples: Vec<PeriodicSample> = tr
        .sample_uniform(n_samples.max(2))
        .into_iter()
        .map(|(t, z)| PeriodicSample {
            t,
            reciprocal: z,
            population: [1.0 / z[0], 1.0 / z[1]],
        })
        .collect();
    let positive = samples
        .iter()
        .all(|s| s.reciprocal[0] > 0.0 && s.reciprocal[1] > 0.0)
        && tr.states().iter().all(|z| z[0] > 0.0 && z[1] > 0.0);

    Ok(FloquetReport {
        product: fundamental.det(),
        trace: fundamental.trace(),
        fundamental,
        multipliers,
        resonance_distance,
        nearest_resonance,
        condition_number: condition,
        initial: z0,
        closure_residual,
        samples,
        positive,
    })
}
