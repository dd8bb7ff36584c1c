//! Periodic solutions of scalar equations `x' = f(t, x)` with
//! `f(t + p, x) = f(t, x)`.
//!
//! The Poincare map `P(x0) = x(p; x0)` has the `p`-periodic solutions as its
//! fixed points. When `f_xxx` has a fixed sign there are at most three of
//! them; two transforms drive that bound:
//!
//! - the reciprocal `y = 1/x`, under which `y' = -g(t, y)` with
//!   `g(t, y) = y^2 f(t, 1/y)` and `g_yy(t, y) = Q(t, 1/y)`, where
//!   `Q = 2 f - 2 x f_x + x^2 f_xx`;
//! - the shift `z = x - xi(t)` by a periodic solution `xi`, giving
//!   `g(t, z) = f(t, z + xi) - f(t, xi)` with `g(t, 0) = 0`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PeriodicFunction;
use crate::ode::{integrate, Direction, EventSpec, IntegratorConfig, Termination, Trajectory};
use crate::par::{self, Execution};

pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub const DEFAULT_GRID: usize = 512;
/// Two fixed points closer than `DEDUP_TOL * (1 + |x|)` are merged.
pub const DEDUP_TOL: f64 = 1e-7;
/// Sign threshold on sampled third derivatives taken by finite differences;
/// exact derivatives use a strict sign test.
pub const FD_SIGN_TOL: f64 = 1e-3;

/// Right-hand side of a scalar `p`-periodic equation.
///
/// [`eval`](Self::eval) is the function the convexity theory is stated for;
/// [`flow`](Self::flow) is the actual right-hand side, which differs by the
/// sign carried by [`Reciprocal`](Self::Reciprocal).
#[derive(Clone)]
pub enum ScalarPeriodicRhs {
    /// `a0(t) x^3 + a1(t) x^2 + a2(t) x + a3(t)`
    AbelPolynomial { coefficients: [PeriodicFunction; 4] },
    /// User callable, optionally with exact `f_x, f_xx, f_xxx`.
    Custom {
        period: f64,
        f: ScalarFn,
        derivatives: Option<[ScalarFn; 3]>,
    },
    /// `g(t, y) = y^2 f(t, 1/y)`, flowing as `y' = -g`.
    Reciprocal { inner: Box<ScalarPeriodicRhs> },
    /// `g(t, z) = f(t, z + xi(t)) - f(t, xi(t))` for a periodic solution `xi`
    /// sampled on `[0, p]`.
    Shifted {
        inner: Box<ScalarPeriodicRhs>,
        reference: Arc<Trajectory<1>>,
    },
}

impl fmt::Debug for ScalarPeriodicRhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AbelPolynomial { coefficients } => f
                .debug_struct("AbelPolynomial")
                .field("coefficients", coefficients)
                .finish(),
            Self::Custom {
                period,
                derivatives,
                ..
            } => f
                .debug_struct("Custom")
                .field("period", period)
                .field("exact_derivatives", &derivatives.is_some())
                .finish_non_exhaustive(),
            Self::Reciprocal { inner } => {
                f.debug_struct("Reciprocal").field("inner", inner).finish()
            }
            Self::Shifted { inner, reference } => f
                .debug_struct("Shifted")
                .field("inner", inner)
                .field("reference_start", &reference.initial_state()[0])
                .finish(),
        }
    }
}

impl ScalarPeriodicRhs {
    fn coefficients_at(c: &[PeriodicFunction; 4], t: f64) -> [f64; 4] {
        if c.iter().all(|f| f.period() == c[0].period()) {
            let phase = c[0].base_phase(t);
            c.each_ref().map(|f| f.eval_at_phase(phase))
        } else {
            c.each_ref().map(|f| f.eval(t))
        }
    }

    pub fn abel(
        a0: PeriodicFunction,
        a1: PeriodicFunction,
        a2: PeriodicFunction,
        a3: PeriodicFunction,
    ) -> Result<Self> {
        let p = a0.period();
        for (name, c) in [("a1", &a1), ("a2", &a2), ("a3", &a3)] {
            if (c.period() - p).abs() > 1e-12 * p {
                return Err(Error::InvalidInput(format!(
                    "{name} has period {} but a0 has period {p}",
                    c.period()
                )));
            }
        }
        Ok(Self::AbelPolynomial {
            coefficients: [a0, a1, a2, a3],
        })
    }

    /// Constant-coefficient cubic `c0 x^3 + c1 x^2 + c2 x + c3` with period `p`.
    pub fn cubic(period: f64, c: [f64; 4]) -> Result<Self> {
        Self::abel(
            PeriodicFunction::constant(period, c[0])?,
            PeriodicFunction::constant(period, c[1])?,
            PeriodicFunction::constant(period, c[2])?,
            PeriodicFunction::constant(period, c[3])?,
        )
    }

    pub fn custom(
        period: f64,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        crate::model::require_positive(&[("period", period)])?;
        Ok(Self::Custom {
            period,
            f: Arc::new(f),
            derivatives: None,
        })
    }

    pub fn custom_with_derivatives(
        period: f64,
        f: ScalarFn,
        derivatives: [ScalarFn; 3],
    ) -> Result<Self> {
        crate::model::require_positive(&[("period", period)])?;
        Ok(Self::Custom {
            period,
            f,
            derivatives: Some(derivatives),
        })
    }

    pub fn period(&self) -> f64 {
        match self {
            Self::AbelPolynomial { coefficients } => coefficients[0].period(),
            Self::Custom { period, .. } => *period,
            Self::Reciprocal { inner } | Self::Shifted { inner, .. } => inner.period(),
        }
    }

    /// `+1` or `-1`: `x' = sign * eval(t, x)`.
    pub fn sign(&self) -> f64 {
        match self {
            Self::AbelPolynomial { .. } | Self::Custom { .. } => 1.0,
            Self::Reciprocal { inner } => -inner.sign(),
            Self::Shifted { inner, .. } => inner.sign(),
        }
    }

    fn reference_at(reference: &Trajectory<1>, t: f64, period: f64) -> f64 {
        let tau = t
            .rem_euclid(period)
            .clamp(reference.t_start(), reference.t_end());
        reference.dense_eval(tau).map(|v| v[0]).unwrap_or(f64::NAN)
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match self {
            Self::AbelPolynomial { coefficients } => {
                let [a0, a1, a2, a3] = Self::coefficients_at(coefficients, t);
                ((a0 * x + a1) * x + a2) * x + a3
            }
            Self::Custom { f, .. } => f(t, x),
            Self::Reciprocal { inner } => x * x * inner.eval(t, 1.0 / x),
            Self::Shifted { inner, reference } => {
                let xi = Self::reference_at(reference, t, inner.period());
                inner.eval(t, x + xi) - inner.eval(t, xi)
            }
        }
    }

    /// `eval` with the reciprocal's pole at zero reported as a domain error.
    pub fn try_eval(&self, t: f64, x: f64) -> Result<f64> {
        if let Self::Reciprocal { .. } = self {
            if x == 0.0 {
                return Err(Error::Domain(
                    "reciprocal transform undefined at y = 0".into(),
                ));
            }
        }
        Ok(self.eval(t, x))
    }

    /// Right-hand side of the equation actually integrated.
    pub fn flow(&self, t: f64, x: f64) -> f64 {
        self.sign() * self.eval(t, x)
    }

    /// Exact `order`-th x-derivative (1 to 3) of `eval`, when available.
    pub fn exact_derivative(&self, t: f64, x: f64, order: usize) -> Option<f64> {
        match self {
            Self::AbelPolynomial {
                coefficients: [a0, a1, a2, _],
            } => {
                let (c0, c1, c2) = (a0.eval(t), a1.eval(t), a2.eval(t));
                match order {
                    1 => Some((3.0 * c0 * x + 2.0 * c1) * x + c2),
                    2 => Some(6.0 * c0 * x + 2.0 * c1),
                    3 => Some(6.0 * c0),
                    _ => None,
                }
            }
            Self::Custom { derivatives, .. } => {
                let ds = derivatives.as_ref()?;
                (1..=3).contains(&order).then(|| ds[order - 1](t, x))
            }
            Self::Reciprocal { inner } => {
                let u = 1.0 / x;
                match order {
                    1 => Some(2.0 * x * inner.eval(t, u) - inner.exact_derivative(t, u, 1)?),
                    2 => Some(
                        2.0 * inner.eval(t, u) - 2.0 * u * inner.exact_derivative(t, u, 1)?
                            + u * u * inner.exact_derivative(t, u, 2)?,
                    ),
                    3 => Some(-u.powi(4) * inner.exact_derivative(t, u, 3)?),
                    _ => None,
                }
            }
            Self::Shifted { inner, reference } => {
                let xi = Self::reference_at(reference, t, inner.period());
                inner.exact_derivative(t, x + xi, order)
            }
        }
    }

    /// Central finite difference of `eval` with step `max(1e-4, 1e-4 |x|)`.
    pub fn fd_derivative(&self, t: f64, x: f64, order: usize) -> f64 {
        let h = 1e-4f64.max(1e-4 * x.abs());
        let f = |dx: f64| self.eval(t, x + dx);
        match order {
            1 => (f(h) - f(-h)) / (2.0 * h),
            2 => (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h),
            3 => (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h),
            _ => f64::NAN,
        }
    }

    pub fn derivative(&self, t: f64, x: f64, order: usize) -> f64 {
        self.exact_derivative(t, x, order)
            .unwrap_or_else(|| self.fd_derivative(t, x, order))
    }

    pub fn has_exact_derivatives(&self) -> bool {
        self.exact_derivative(0.0, 1.0, 3).is_some()
    }
}

/// Outcome of one Poincare map evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoincareValue {
    Value {
        value: f64,
    },
    /// `time` is when the escape was detected; `upward` gives its sign.
    BlowUp {
        time: f64,
        upward: bool,
    },
}

impl PoincareValue {
    pub fn value(self) -> Option<f64> {
        match self {
            PoincareValue::Value { value } => Some(value),
            PoincareValue::BlowUp { .. } => None,
        }
    }

    /// `P(x0) - x0`, with a blow-up counted as `+inf` or `-inf`.
    pub fn signed_displacement(self, x0: f64) -> f64 {
        match self {
            PoincareValue::Value { value } => value - x0,
            PoincareValue::BlowUp { upward: true, .. } => f64::INFINITY,
            PoincareValue::BlowUp { upward: false, .. } => f64::NEG_INFINITY,
        }
    }
}

pub fn solution(
    rhs: &ScalarPeriodicRhs,
    x0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<1>> {
    Ok(integrate(
        |t, x: &[f64; 1]| [rhs.flow(t, x[0])],
        [x0],
        (0.0, t_end),
        cfg,
        &[],
    )?)
}

/// `x(p)` for `x(0) = x0`, or a blow-up signal if `|x|` exceeds the
/// configured threshold first.
pub fn poincare_map(
    rhs: &ScalarPeriodicRhs,
    x0: f64,
    cfg: &IntegratorConfig,
) -> Result<PoincareValue> {
    let tr = solution(rhs, x0, rhs.period(), cfg)?;
    Ok(match tr.termination() {
        Termination::BlowUp => PoincareValue::BlowUp {
            time: tr.t_end(),
            upward: tr.final_state()[0] > 0.0,
        },
        _ => PoincareValue::Value {
            value: tr.final_state()[0],
        },
    })
}

/// Escape region of an Abel polynomial with `a0 >= m > 0`.
///
/// With `A` bounding `|a1|, |a2|, |a3|` and `|x| >= r = max(1, 6A/m)`, the
/// lower-order terms are at most `(m/2)|x|^3`, so `sign(x) x' >= (m/2)|x|^3`.
/// Comparing with that equation, a solution at `|x| > 1/sqrt(m (p - t))`
/// blows up before `t = p`.
#[derive(Debug, Clone, Copy)]
struct Escape {
    m: f64,
    r: f64,
}

impl Escape {
    fn of(rhs: &ScalarPeriodicRhs) -> Option<Self> {
        let ScalarPeriodicRhs::AbelPolynomial {
            coefficients: [a0, rest @ ..],
        } = rhs
        else {
            return None;
        };
        let m = a0.lower_bound();
        if !(m > 0.0) {
            return None;
        }
        let a = rest
            .iter()
            .map(|f| f.lower_bound().abs().max(f.upper_bound().abs()))
            .fold(0.0, f64::max);
        Some(Self {
            m,
            r: (6.0 * a / m).max(1.0),
        })
    }

    /// Positive once blow-up before `p` is certain.
    fn margin(&self, t: f64, x: f64, p: f64) -> f64 {
        let left = p - t;
        if left <= 0.0 {
            return f64::NEG_INFINITY;
        }
        x.abs() - self.r.max(1.0 / (self.m * left).sqrt())
    }
}

/// [`poincare_map`], stopping early once an [`Escape`] certificate holds.
fn poincare_map_certified(
    rhs: &ScalarPeriodicRhs,
    x0: f64,
    cfg: &IntegratorConfig,
    escape: Option<Escape>,
) -> Result<PoincareValue> {
    let Some(esc) = escape else {
        return poincare_map(rhs, x0, cfg);
    };
    let p = rhs.period();
    if esc.margin(0.0, x0, p) > 0.0 {
        return Ok(PoincareValue::BlowUp {
            time: 0.0,
            upward: x0 > 0.0,
        });
    }
    let events = [EventSpec::new(
        move |t, x: &[f64; 1]| esc.margin(t, x[0], p),
        Direction::Increasing,
        true,
    )];
    let tr = integrate(
        |t, x: &[f64; 1]| [rhs.flow(t, x[0])],
        [x0],
        (0.0, p),
        cfg,
        &events,
    )?;
    Ok(match tr.termination() {
        Termination::BlowUp | Termination::Event { .. } => PoincareValue::BlowUp {
            time: tr.t_end(),
            upward: tr.final_state()[0] > 0.0,
        },
        _ => PoincareValue::Value {
            value: tr.final_state()[0],
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Positive,
    Negative,
    Indefinite,
    Unchecked,
}

/// Sign of `f_xxx` over an `n x n` grid of the box `t_range x x_range`.
pub fn check_hypothesis(
    rhs: &ScalarPeriodicRhs,
    t_range: [f64; 2],
    x_range: [f64; 2],
    n_samples: usize,
) -> Verdict {
    if n_samples == 0 {
        return Verdict::Unchecked;
    }
    let tol = if rhs.has_exact_derivatives() {
        0.0
    } else {
        FD_SIGN_TOL
    };
    let node = |r: [f64; 2], i: usize| {
        if n_samples == 1 {
            0.5 * (r[0] + r[1])
        } else {
            r[0] + (r[1] - r[0]) * i as f64 / (n_samples - 1) as f64
        }
    };
    let (mut pos, mut neg) = (true, true);
    for i in 0..n_samples {
        let t = node(t_range, i);
        for j in 0..n_samples {
            let v = rhs.derivative(t, node(x_range, j), 3);
            pos &= v > tol;
            neg &= v < -tol;
        }
    }
    match (pos, neg) {
        (true, _) => Verdict::Positive,
        (_, true) => Verdict::Negative,
        _ => Verdict::Indefinite,
    }
}

/// `Q(t, x) = 2 f - 2 x f_x + x^2 f_xx`.
pub fn lemma_q(rhs: &ScalarPeriodicRhs, t: f64, x: f64) -> f64 {
    2.0 * rhs.eval(t, x) - 2.0 * x * rhs.derivative(t, x, 1) + x * x * rhs.derivative(t, x, 2)
}

pub fn reciprocal_rhs(rhs: &ScalarPeriodicRhs) -> ScalarPeriodicRhs {
    ScalarPeriodicRhs::Reciprocal {
        inner: Box::new(rhs.clone()),
    }
}

/// Shift by the periodic solution `xi` given on `[0, p]`.
pub fn shift_rhs(
    rhs: &ScalarPeriodicRhs,
    xi: Trajectory<1>,
    cfg: &IntegratorConfig,
) -> Result<ScalarPeriodicRhs> {
    let p = rhs.period();
    if xi.t_start() != 0.0 || (xi.t_end() - p).abs() > 1e-12 * p {
        return Err(Error::Precondition(format!(
            "reference covers [{}, {}], expected [0, {p}]",
            xi.t_start(),
            xi.t_end()
        )));
    }
    let x0 = xi.initial_state()[0];
    let returned = poincare_map(rhs, x0, cfg)?
        .value()
        .ok_or_else(|| Error::Precondition("reference solution blows up".into()))?;
    if !((returned - x0).abs() < 1e-8) {
        return Err(Error::Precondition(format!(
            "reference is not periodic: |P(x0) - x0| = {:e}",
            (returned - x0).abs()
        )));
    }
    Ok(ScalarPeriodicRhs::Shifted {
        inner: Box::new(rhs.clone()),
        reference: Arc::new(xi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub x0: f64,
    /// `|P(x0) - x0|` at the refined point.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareAnalysis {
    pub fixed_points: Vec<FixedPoint>,
    pub bracket: [f64; 2],
    /// Grid size actually used, after any refinement.
    pub grid_n: usize,
    /// Maximal runs of grid values whose solution blew up before `t = p`.
    pub blow_up_intervals: Vec<[f64; 2]>,
    pub hypothesis: Verdict,
}

impl PoincareAnalysis {
    pub fn count(&self) -> usize {
        self.fixed_points.len()
    }

    /// Fixed points strictly above the dedup tolerance of zero.
    pub fn positive_count(&self) -> usize {
        self.fixed_points
            .iter()
            .filter(|p| p.x0 > DEDUP_TOL)
            .count()
    }

    pub fn values(&self) -> Vec<f64> {
        self.fixed_points.iter().map(|p| p.x0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountConfig {
    pub integrator: IntegratorConfig,
    pub execution: Execution,
    /// Per-axis sample count of the hypothesis check; 0 skips it.
    pub hypothesis_samples: usize,
    /// Double the grid once when sign changes cluster within 4 cells.
    pub refine: bool,
}

impl Default for CountConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            execution: Execution::default(),
            hypothesis_samples: 16,
            refine: true,
        }
    }
}

fn grid(bracket: [f64; 2], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == n - 1 {
                bracket[1]
            } else {
                bracket[0] + (bracket[1] - bracket[0]) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

enum Crossing {
    Exact(usize),
    Bracket(usize),
}

/// Sign changes of the displacement. With `signed` a blow-up counts as
/// `+-inf`, so a fixed point squeezed between blow-up grid points is still
/// bracketed. That is only sound where `P(x) -> +-inf` at the edge of the
/// surviving set, which is what an [`Escape`] certificate guarantees;
/// otherwise blow-ups are excluded. They are never fixed points themselves.
fn crossings(disp: &[f64], signed: bool) -> Vec<Crossing> {
    let mut out = Vec::new();
    for (i, d) in disp.iter().enumerate() {
        if *d == 0.0 {
            out.push(Crossing::Exact(i));
        }
    }
    for (i, w) in disp.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if !signed && !(a.is_finite() && b.is_finite()) {
            continue;
        }
        if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) {
            out.push(Crossing::Bracket(i));
        }
    }
    out
}

fn cell(c: &Crossing) -> usize {
    match *c {
        Crossing::Exact(i) | Crossing::Bracket(i) => i,
    }
}

/// Fixed points of the Poincare map inside `bracket`, from sign changes of
/// `P(x) - x` on a uniform grid refined by bisection.
pub fn count_periodic(
    rhs: &ScalarPeriodicRhs,
    bracket: [f64; 2],
    grid_n: usize,
    cfg: &CountConfig,
) -> Result<PoincareAnalysis> {
    if !(bracket[0] < bracket[1]) || !bracket.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "bracket {bracket:?} must be finite and increasing"
        )));
    }
    if grid_n < 2 {
        return Err(Error::InvalidInput(format!(
            "grid_n must be at least 2, got {grid_n}"
        )));
    }
    let escape = Escape::of(rhs);
    let displacement = |x: &f64| -> Result<f64> {
        Ok(poincare_map_certified(rhs, *x, &cfg.integrator, escape)?.signed_displacement(*x))
    };
    let evaluate = |n: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let xs = grid(bracket, n);
        let disp = par::map(cfg.execution, &xs, displacement)
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok((xs, disp))
    };

    let mut n = grid_n;
    let (mut xs, mut disp) = evaluate(n)?;
    let mut found = crossings(&disp, escape.is_some());
    let clustered = |found: &[Crossing]| {
        let mut cells: Vec<usize> = found.iter().map(cell).collect();
        cells.sort_unstable();
        cells.windows(2).any(|w| w[1] - w[0] < 4)
    };
    if cfg.refine && clustered(&found) {
        n = 2 * n - 1;
        (xs, disp) = evaluate(n)?;
        found = crossings(&disp, escape.is_some());
    }
    if found.is_empty() && disp.iter().all(|d| !d.is_finite()) {
        return Err(Error::NoData);
    }

    let refined = par::map(cfg.execution, &found, |c| -> Result<FixedPoint> {
        match *c {
            Crossing::Exact(i) => Ok(FixedPoint {
                x0: xs[i],
                residual: 0.0,
            }),
            Crossing::Bracket(i) => {
                bisect_fixed_point(xs[i], xs[i + 1], disp[i], escape.is_some(), |x| {
                    displacement(&x)
                })
            }
        }
    });
    let mut points = refined.into_iter().collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.x0.total_cmp(&b.x0));
    let mut fixed_points: Vec<FixedPoint> = Vec::with_capacity(points.len());
    for p in points {
        match fixed_points.last_mut() {
            Some(last) if (p.x0 - last.x0).abs() <= DEDUP_TOL * (1.0 + p.x0.abs()) => {
                if p.residual < last.residual {
                    *last = p;
                }
            }
            _ => fixed_points.push(p),
        }
    }

    let mut blow_up_intervals: Vec<[f64; 2]> = Vec::new();
    let mut run: Option<[f64; 2]> = None;
    for (x, d) in xs.iter().zip(&disp) {
        match (d.is_finite(), run.as_mut()) {
            (false, Some(r)) => r[1] = *x,
            (false, None) => run = Some([*x, *x]),
            (true, Some(_)) => blow_up_intervals.extend(run.take()),
            (true, None) => {}
        }
    }
    blow_up_intervals.extend(run);

    let hypothesis = check_hypothesis(rhs, [0.0, rhs.period()], bracket, cfg.hypothesis_samples);
    Ok(PoincareAnalysis {
        fixed_points,
        bracket,
        grid_n: n,
        blow_up_intervals,
        hypothesis,
    })
}

/// Bisection on the sign of the displacement.
fn bisect_fixed_point(
    mut lo: f64,
    mut hi: f64,
    mut d_lo: f64,
    signed: bool,
    displacement: impl Fn(f64) -> Result<f64>,
) -> Result<FixedPoint> {
    // stays at f64::MAX only if no midpoint ever survives
    let mut best = FixedPoint {
        x0: 0.5 * (lo + hi),
        residual: f64::MAX,
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let d = displacement(mid)?;
        if !signed && !d.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "blow-up at {mid} inside a bracket of surviving values"
            )));
        }
        if d.abs() < best.residual {
            best = FixedPoint {
                x0: mid,
                residual: d.abs(),
            };
        }
        if d.abs() < 1e-10 * (1.0 + mid.abs()) || hi - lo <= 4.0 * f64::EPSILON * (1.0 + mid.abs())
        {
            break;
        }
        if (d > 0.0) == (d_lo > 0.0) {
            lo = mid;
            d_lo = d;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}
