//! Dormand–Prince 5(4) with step-size control and exact landing on requested
//! output times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Requests below this relative tolerance are refused: the embedded error
/// estimate is dominated by rounding there.
pub const RTOL_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Settings {
    pub fn new(rtol: f64) -> Self {
        Self { rtol, atol: rtol * 1e-2, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates y' = f(t, y) from t0 and returns the state at each time in
/// `stops` (ascending, all > t0).
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    stops: &[f64],
    settings: &Settings,
) -> Result<(Vec<[f64; N]>, Stats)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if settings.rtol.is_nan() || settings.rtol < RTOL_FLOOR {
        return Err(Error::Integrator(format!(
            "rtol {:e} is below the attainable floor {RTOL_FLOOR:e}",
            settings.rtol
        )));
    }
    if stops.windows(2).any(|w| w[1] <= w[0]) || stops.first().is_some_and(|&s| s <= t0) {
        return Err(Error::argument("output times must be ascending and after t0"));
    }
    let Some(&t_end) = stops.last() else {
        return Ok((Vec::new(), Stats::default()));
    };
    let span = t_end - t0;
    let mut out = Vec::with_capacity(stops.len());
    let mut stats = Stats { min_step: f64::INFINITY, ..Default::default() };
    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y);
    let mut h = 1e-3 * span.min(1.0);
    let mut next = 0;
    let h_min = 1e-13 * span.max(1.0);

    while next < stops.len() {
        if stats.accepted + stats.rejected >= settings.max_steps {
            return Err(Error::Integrator(format!(
                "step budget of {} exhausted at t = {t}",
                settings.max_steps
            )));
        }
        let target = stops[next];
        let h_prop = h;
        let landing = t + h >= target;
        if landing {
            h = target - t;
        }

        let mut k = [[0.0; N]; 7];
        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for (i, ysi) in ys.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                *ysi += h * acc;
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        // 5th-order solution is the last stage argument (FSAL)
        let mut y_new = y;
        for (i, yi) in y_new.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(6) {
                acc += A[6][j] * kj[i];
            }
            *yi += h * acc;
        }
        let mut err = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let sc = settings.atol + settings.rtol * y[i].abs().max(y_new[i].abs());
            err += (h * e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();

        if err <= 1.0 {
            stats.accepted += 1;
            stats.min_step = stats.min_step.min(h);
            stats.max_step = stats.max_step.max(h);
            t = if landing { target } else { t + h };
            y = y_new;
            k0 = k[6];
            if landing {
                out.push(y);
                next += 1;
            }
        } else {
            stats.rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        // a step shortened to land on an output time says little about the
        // next one
        h = if landing && err <= 1.0 { h_prop.max(h * fac) } else { h * fac };
        if h < h_min && next < stops.len() && stops[next] - t > h_min {
            return Err(Error::Integrator(format!("step size underflow at t = {t}")));
        }
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let stops: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let (ys, st) = integrate(f, 0.0, [1.0, 0.0], &stops, &Settings::new(1e-12)).unwrap();
        for (t, y) in stops.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-10);
            assert!((y[1] + t.sin()).abs() < 1e-10);
        }
        assert!(st.accepted > 0);
    }

    #[test]
    fn exponential_growth_relative_accuracy() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let (ys, _) = integrate(f, 0.0, [1.0], &[20.0], &Settings::new(1e-12)).unwrap();
        assert!((ys[0][0] / 20.0_f64.exp() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn refuses_unattainable_tolerance() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let r = integrate(f, 0.0, [1.0], &[1.0], &Settings::new(1e-15));
        assert!(matches!(r, Err(Error::Integrator(_))));
    }

    #[test]
    fn step_budget_is_enforced() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let s = Settings { rtol: 1e-12, atol: 1e-14, max_steps: 5 };
        assert!(matches!(integrate(f, 0.0, [1.0], &[10.0], &s), Err(Error::Integrator(_))));
    }

    #[test]
    fn rejects_bad_stops() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        assert!(integrate(f, 0.0, [1.0], &[2.0, 1.0], &Settings::new(1e-10)).is_err());
        assert!(integrate(f, 1.0, [1.0], &[0.5], &Settings::new(1e-10)).is_err());
    }
}
