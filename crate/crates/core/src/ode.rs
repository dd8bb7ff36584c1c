//! Adaptive Dormand-Prince 5(4) integration with the free fourth-order dense
//! output, event location on the interpolant, and blow-up termination.
//!
//! The integrator works on fixed-size states `[f64; N]`; every model in this
//! crate is one- or two-dimensional.

use std::fmt;

use crate::error::Error;

/// Step-size, tolerance and termination settings.
///
/// A trajectory is terminated as blow-up when any component exceeds
/// `blowup_threshold` in magnitude, or when the step size collapses to
/// rounding level while a component already exceeds its square root.
/// Cubic growth `x' ~ x^3` reaches `1e8` only within `1e-16` of the blow-up
/// time, below the time resolution of `f64`, so the second rule is what
/// fires in practice for such equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub blowup_threshold: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_step: f64::INFINITY,
            blowup_threshold: 1e8,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return Err(format!("rtol must be positive, got {}", self.rtol));
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(format!("atol must be positive, got {}", self.atol));
        }
        if !(self.max_step > 0.0) {
            return Err(format!("max_step must be positive, got {}", self.max_step));
        }
        if !(self.blowup_threshold > 1.0) {
            return Err(format!(
                "blow-up threshold must exceed 1, got {}",
                self.blowup_threshold
            ));
        }
        if self.max_steps == 0 {
            return Err("max_steps must be at least 1".into());
        }
        Ok(())
    }
}

/// Which sign changes of an event function count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Any,
    /// positive to non-positive
    Decreasing,
    /// negative to non-negative
    Increasing,
}

type EventFn<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>;

/// Scalar event function `g(t, state)` whose zeros are located.
pub struct EventSpec<'a, const N: usize> {
    func: EventFn<'a, N>,
    pub direction: Direction,
    pub terminal: bool,
}

impl<'a, const N: usize> EventSpec<'a, N> {
    pub fn new(
        func: impl Fn(f64, &[f64; N]) -> f64 + 'a,
        direction: Direction,
        terminal: bool,
    ) -> Self {
        Self {
            func: Box::new(func),
            direction,
            terminal,
        }
    }

    /// Terminal event when component `index` decreases through zero.
    pub fn zero_crossing(index: usize) -> Self {
        Self::new(move |_, y: &[f64; N]| y[index], Direction::Decreasing, true)
    }

    pub fn eval(&self, t: f64, y: &[f64; N]) -> f64 {
        (self.func)(t, y)
    }

    fn triggered(&self, before: f64, after: f64) -> bool {
        let up = before < 0.0 && after >= 0.0;
        let down = before > 0.0 && after <= 0.0;
        match self.direction {
            Direction::Any => up || down,
            Direction::Increasing => up,
            Direction::Decreasing => down,
        }
    }
}

impl<const N: usize> fmt::Debug for EventSpec<'_, N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EventSpec")
            .field("direction", &self.direction)
            .field("terminal", &self.terminal)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    ReachedEnd,
    /// A terminal event fired; `index` refers to the event list passed in.
    Event {
        index: usize,
    },
    BlowUp,
    StepFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHit<const N: usize> {
    pub index: usize,
    pub t: f64,
    pub state: [f64; N],
}

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment<const N: usize> {
    t0: f64,
    h: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        std::array::from_fn(|i| {
            r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])))
        })
    }
}

/// Accepted steps of one integration plus the dense interpolant between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    times: Vec<f64>,
    states: Vec<[f64; N]>,
    segments: Vec<Segment<N>>,
    events: Vec<EventHit<N>>,
    termination: Termination,
}

impl<const N: usize> Trajectory<N> {
    fn start(t0: f64, y0: [f64; N]) -> Self {
        Self {
            times: vec![t0],
            states: vec![y0],
            segments: Vec::new(),
            events: Vec::new(),
            termination: Termination::StepFailure,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[[f64; N]] {
        &self.states
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// All located events in time order, terminal or not.
    pub fn events(&self) -> &[EventHit<N>] {
        &self.events
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory has an initial sample")
    }

    pub fn initial_state(&self) -> [f64; N] {
        self.states[0]
    }

    pub fn final_state(&self) -> [f64; N] {
        *self
            .states
            .last()
            .expect("trajectory has an initial sample")
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    pub fn dense_eval(&self, t: f64) -> Result<[f64; N], Error> {
        dense_eval(self, t)
    }

    /// `n` equally spaced samples over the covered interval, endpoints included.
    pub fn sample_uniform(&self, n: usize) -> Vec<(f64, [f64; N])> {
        let (t0, t1) = (self.t_start(), self.t_end());
        match n {
            0 => Vec::new(),
            1 => vec![(t0, self.initial_state())],
            _ => (0..n)
                .map(|i| {
                    let t = if i == n - 1 {
                        t1
                    } else {
                        t0 + (t1 - t0) * i as f64 / (n - 1) as f64
                    };
                    (t, self.eval_unchecked(t))
                })
                .collect(),
        }
    }

    fn eval_unchecked(&self, t: f64) -> [f64; N] {
        // exact at stored samples
        let idx = self.times.partition_point(|&s| s < t);
        if idx < self.times.len() && self.times[idx] == t {
            return self.states[idx];
        }
        let seg = idx
            .saturating_sub(1)
            .min(self.segments.len().saturating_sub(1));
        match self.segments.get(seg) {
            Some(s) => s.eval(t),
            None => self.states[0],
        }
    }
}

/// Continuous interpolant of `tr` at `t`.
pub fn dense_eval<const N: usize>(tr: &Trajectory<N>, t: f64) -> Result<[f64; N], Error> {
    let (start, end) = (tr.t_start(), tr.t_end());
    if !(t >= start && t <= end) {
        return Err(Error::OutOfRange { t, start, end });
    }
    Ok(tr.eval_unchecked(t))
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntegrationError<const N: usize> {
    InvalidInput(String),
    /// Step-size underflow, non-finite derivative, or step budget exhausted.
    StepFailure {
        t: f64,
        message: String,
        partial: Box<Trajectory<N>>,
    },
}

impl<const N: usize> fmt::Display for IntegrationError<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrationError::InvalidInput(m) => write!(f, "invalid integration input: {m}"),
            IntegrationError::StepFailure { t, message, .. } => {
                write!(f, "integration failed at t = {t}: {message}")
            }
        }
    }
}

impl<const N: usize> std::error::Error for IntegrationError<N> {}

impl<const N: usize> From<IntegrationError<N>> for Error {
    fn from(e: IntegrationError<N>) -> Self {
        match e {
            IntegrationError::InvalidInput(m) => Error::InvalidInput(m),
            other => Error::NumericalFailure(other.to_string()),
        }
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn all_finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn max_abs<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn scaled_rms<const N: usize>(v: &[f64; N], y: &[f64; N], cfg: &IntegratorConfig) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let s = cfg.atol + cfg.rtol * y[i].abs();
            (v[i] / s).powi(2)
        })
        .sum();
    (sum / N.max(1) as f64).sqrt()
}

fn initial_step<const N: usize, F>(
    field: &F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    cfg: &IntegratorConfig,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let d0 = scaled_rms(y0, y0, cfg);
    let d1 = scaled_rms(f0, y0, cfg);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span).min(cfg.max_step);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = field(t0 + h0, &y1);
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = scaled_rms(&diff, y0, cfg) / h0;
    let h1 = if !d2.is_finite() {
        h0 * 1e-3
    } else if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span).min(cfg.max_step)
}

/// Integrate `y' = field(t, y)` from `init` at `t_span.0` to `t_span.1`.
///
/// Terminal events and blow-up stop the integration early; the reason is in
/// [`Trajectory::termination`]. Event times are refined by bisection on the
/// dense output to `1e-12 * |t_span|`.
pub fn integrate<const N: usize, F>(
    field: F,
    init: [f64; N],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    events: &[EventSpec<'_, N>],
) -> Result<Trajectory<N>, IntegrationError<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    cfg.validate().map_err(IntegrationError::InvalidInput)?;
    let (t0, t_final) = t_span;
    if !(t0.is_finite() && t_final.is_finite() && t_final > t0) {
        return Err(IntegrationError::InvalidInput(format!(
            "time span ({t0}, {t_final}) must be finite and increasing"
        )));
    }
    if !all_finite(&init) {
        return Err(IntegrationError::InvalidInput(format!(
            "non-finite initial state {init:?}"
        )));
    }
    let span = t_final - t0;
    let event_tol = 1e-12 * span;

    let mut tr = Trajectory::start(t0, init);
    let fail = |tr: Trajectory<N>, t: f64, message: String| {
        let mut partial = tr;
        partial.termination = Termination::StepFailure;
        Err(IntegrationError::StepFailure {
            t,
            message,
            partial: Box::new(partial),
        })
    };

    let mut t = t0;
    let mut y = init;
    let mut k1 = field(t, &y);
    if !all_finite(&k1) {
        return fail(tr, t, "non-finite derivative at initial state".into());
    }
    let mut g_prev: Vec<f64> = events.iter().map(|e| e.eval(t, &y)).collect();
    let mut h = initial_step(&field, t, &y, &k1, span, cfg);
    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        if steps >= cfg.max_steps {
            return fail(tr, t, format!("step budget of {} exhausted", cfg.max_steps));
        }
        let remaining = t_final - t;
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        h = h.min(cfg.max_step);

        let min_step = 16.0 * f64::EPSILON * t.abs().max(span);
        if h < min_step && !last {
            if max_abs(&y) >= cfg.blowup_threshold.sqrt() {
                tr.termination = Termination::BlowUp;
                return Ok(tr);
            }
            return fail(tr, t, format!("step size {h:e} underflow"));
        }

        let k2 = field(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = field(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = field(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = field(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = field(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = field(t + h, &y_new);
        steps += 1;

        let err_vec: [f64; N] = std::array::from_fn(|i| {
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let err = {
            let sum: f64 = (0..N)
                .map(|i| {
                    let s = cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs());
                    (err_vec[i] / s).powi(2)
                })
                .sum();
            (sum / N.max(1) as f64).sqrt()
        };

        if !err.is_finite() || !all_finite(&y_new) || !all_finite(&k7) {
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }

        if err > 1.0 {
            h *= (SAFETY * err.powf(-0.2)).max(FAC_MIN);
            last_rejected = true;
            continue;
        }

        // accepted
        let r2: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
        let r3: [f64; N] = std::array::from_fn(|i| h * k1[i] - r2[i]);
        let r4: [f64; N] = std::array::from_fn(|i| r2[i] - h * k7[i] - r3[i]);
        let r5: [f64; N] = std::array::from_fn(|i| {
            h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
        });
        let segment = Segment {
            t0: t,
            h,
            coeffs: [y, r2, r3, r4, r5],
        };
        let t_new = if last { t_final } else { t + h };

        let mut hits: Vec<EventHit<N>> = Vec::new();
        let mut g_new = Vec::with_capacity(events.len());
        for (index, ev) in events.iter().enumerate() {
            let g1 = ev.eval(t_new, &y_new);
            if ev.triggered(g_prev[index], g1) {
                let te = locate_event(ev, &segment, t, t_new, g_prev[index], event_tol);
                hits.push(EventHit {
                    index,
                    t: te,
                    state: segment.eval(te),
                });
            }
            g_new.push(g1);
        }
        hits.sort_by(|a, b| a.t.total_cmp(&b.t));
        if let Some(stop) = hits.iter().position(|hit| events[hit.index].terminal) {
            let hit = hits[stop];
            hits.truncate(stop + 1);
            tr.events.extend(hits);
            tr.segments.push(segment);
            if hit.t > t {
                tr.times.push(hit.t);
                tr.states.push(hit.state);
            } else {
                tr.segments.pop();
            }
            tr.termination = Termination::Event { index: hit.index };
            return Ok(tr);
        }
        tr.events.extend(hits);
        tr.segments.push(segment);
        tr.times.push(t_new);
        tr.states.push(y_new);

        if max_abs(&y_new) > cfg.blowup_threshold {
            tr.termination = Termination::BlowUp;
            return Ok(tr);
        }
        if last {
            tr.termination = Termination::ReachedEnd;
            return Ok(tr);
        }

        let mut fac = (SAFETY * err.max(1e-10).powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        t = t_new;
        y = y_new;
        k1 = k7;
        g_prev = g_new;
        h *= fac;
    }
}

/// Bisection on the interpolant for the sign change of `ev` in `[lo, hi]`.
fn locate_event<const N: usize>(
    ev: &EventSpec<'_, N>,
    seg: &Segment<N>,
    mut lo: f64,
    mut hi: f64,
    mut g_lo: f64,
    tol: f64,
) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = ev.eval(mid, &seg.eval(mid));
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
