//! Seeded random Abel equations with sign-definite leading coefficient.

use popdyn::abel::{count_periodic, CountConfig, ScalarPeriodicRhs, DEFAULT_GRID};
use popdyn::{Error, PeriodicFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::SweepSummary;

pub const SWEEP_BRACKET: [f64; 2] = [-5.0, 5.0];

fn random_coefficient(rng: &mut impl Rng, period: f64, scale: f64) -> PeriodicFunction {
    let mean = rng.gen_range(-scale..scale);
    let c = rng.gen_range(-scale..scale) / 2.0;
    let s = rng.gen_range(-scale..scale) / 2.0;
    PeriodicFunction::new(period, mean, vec![c], vec![s]).expect("finite coefficients")
}

/// `a0 = sign (m + A cos + B sin)` with `|A| + |B| < m`, so `a0` never
/// vanishes; the other coefficients are arbitrary one-harmonic series.
pub fn random_abel(rng: &mut impl Rng, a3_zero: bool) -> ScalarPeriodicRhs {
    let period = 1.0;
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let m = rng.gen_range(0.5..1.5);
    let share = rng.gen_range(0.0..0.9);
    let amp = share * m;
    let split = rng.gen_range(0.0..1.0);
    let a0 = PeriodicFunction::new(
        period,
        sign * m,
        vec![sign * amp * split],
        vec![sign * amp * (1.0 - split)],
    )
    .expect("finite coefficients");
    let a1 = random_coefficient(rng, period, 2.0);
    let a2 = random_coefficient(rng, period, 2.0);
    let a3 = if a3_zero {
        PeriodicFunction::zero(period).expect("positive period")
    } else {
        random_coefficient(rng, period, 2.0)
    };
    ScalarPeriodicRhs::abel(a0, a1, a2, a3).expect("equal periods")
}

pub fn run_sweep(seed: u64, instances: usize, cfg: &CountConfig) -> Result<SweepSummary, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = SweepSummary {
        seed,
        instances,
        max_count: 0,
        max_positive_count_without_a3: 0,
        histogram: Vec::new(),
        no_data: 0,
    };
    for i in 0..instances {
        let a3_zero = i % 2 == 1;
        let rhs = random_abel(&mut rng, a3_zero);
        let analysis = match count_periodic(&rhs, SWEEP_BRACKET, DEFAULT_GRID, cfg) {
            Ok(a) => a,
            Err(Error::NoData) => {
                summary.no_data += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let n = analysis.count();
        if summary.histogram.len() <= n {
            summary.histogram.resize(n + 1, 0);
        }
        summary.histogram[n] += 1;
        summary.max_count = summary.max_count.max(n);
        if a3_zero {
            summary.max_positive_count_without_a3 = summary
                .max_positive_count_without_a3
                .max(analysis.positive_count());
        }
    }
    Ok(summary)
}
