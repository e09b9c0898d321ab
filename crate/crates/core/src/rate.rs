//! Decay rate ħΓ(T*) and its temperature scan.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{self, BounceState};
use crate::error::{Error, Result};
use crate::fluctuation::{self, DeterminantForm};
use crate::units::PotentialParams;

/// Minimum number of points a crossover fit accepts.
pub const MIN_FIT_POINTS: usize = 20;
/// Default fractional window below T_c used for the exponent fit.
pub const DEFAULT_FIT_WINDOW: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateOptions {
    pub form: DeterminantForm,
    /// Prefactor of the Arrhenius rate in meV; `None` means ħω/2π.
    pub arrhenius_prefactor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    /// K.
    pub t_star: f64,
    pub kappa: f64,
    /// meV.
    pub hbar_omega: f64,
    pub action_over_hbar: f64,
    /// M·N⁻²/ħ.
    pub norm_sq: f64,
    /// ω²·Det^R[Ô]/Det[ĥ].
    pub det_ratio: f64,
    /// ħΓ in meV.
    pub gamma: f64,
    /// −∞ at T_c, written as null in JSON.
    #[serde(with = "neg_inf_as_null")]
    pub ln_gamma: f64,
    /// meV.
    pub arrhenius: f64,
    /// ħΓ was below the smallest positive double and is reported as zero.
    pub underflow: bool,
}

mod neg_inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

impl RatePoint {
    /// ħΓ reassembled from the stored components.
    pub fn recompose_gamma(&self) -> f64 {
        if self.norm_sq == 0.0 {
            return 0.0;
        }
        self.hbar_omega * (self.norm_sq / (2.0 * PI)).sqrt() / self.det_ratio.abs().sqrt()
            * (-self.action_over_hbar).exp()
    }
}

pub fn arrhenius_rate(t_star: f64, params: &PotentialParams, prefactor: Option<f64>) -> f64 {
    let pre = prefactor.unwrap_or(params.hbar_omega / (2.0 * PI));
    pre * (-classical::thermal_action(t_star, params)).exp()
}

fn check_temperature(t_star: f64, params: &PotentialParams) -> Result<()> {
    if !(t_star.is_finite() && t_star > 0.0) {
        return Err(Error::domain(format!("temperature must be positive, got {t_star}")));
    }
    let tc = params.t_crit();
    if t_star > tc * (1.0 + 1e-12) {
        return Err(Error::QuantumRegimeExceeded { t_star, t_crit: tc });
    }
    Ok(())
}

pub fn decay_rate(t_star: f64, params: &PotentialParams, opts: &RateOptions) -> Result<RatePoint> {
    check_temperature(t_star, params)?;
    let s = classical::invert_temperature(t_star, params)?;
    point_from_state(&s, t_star, opts)
}

fn point_from_state(s: &BounceState, t_star: f64, opts: &RateOptions) -> Result<RatePoint> {
    let p = &s.params;
    let arrhenius = arrhenius_rate(t_star, p, opts.arrhenius_prefactor);
    if s.is_sphaleron() {
        // no bounce left: N⁻² = 0 and the rate vanishes
        return Ok(RatePoint {
            t_star,
            kappa: s.kappa,
            hbar_omega: p.hbar_omega,
            action_over_hbar: classical::classical_action(s),
            norm_sq: 0.0,
            det_ratio: 0.0,
            gamma: 0.0,
            ln_gamma: f64::NEG_INFINITY,
            arrhenius,
            underflow: false,
        });
    }
    let n2 = classical::norm_integral(s);
    let action = classical::action_from_norm(s, n2);
    let det = fluctuation::determinants_with_norm(s, n2, opts.form)?;
    let ratio = det.ratio_omega_sq(p);
    let norm_sq = p.mw_a2() * n2;
    let ln_gamma = p.hbar_omega.ln() + 0.5 * (norm_sq / (2.0 * PI)).ln()
        - 0.5 * (det.ratio.ln_abs + 2.0 * p.omega().ln())
        - action;
    let gamma = ln_gamma.exp();
    Ok(RatePoint {
        t_star,
        kappa: s.kappa,
        hbar_omega: p.hbar_omega,
        action_over_hbar: action,
        norm_sq,
        det_ratio: ratio,
        gamma,
        ln_gamma,
        arrhenius,
        underflow: gamma == 0.0 && ln_gamma.is_finite(),
    })
}

/// ln ħΓ without the squared norm: N⁻² cancels between the zero-mode factor
/// and Det^R, and the action's M·N⁻² term is taken from complete elliptic
/// integrals instead of quadrature.
pub fn ln_decay_rate_norm_free(t_star: f64, params: &PotentialParams, form: DeterminantForm) -> Result<f64> {
    check_temperature(t_star, params)?;
    let s = classical::invert_temperature(t_star, params)?;
    if s.is_sphaleron() {
        return Ok(f64::NEG_INFINITY);
    }
    let action = classical::action_from_norm(&s, classical::norm_integral_closed(&s));
    let ln_h = fluctuation::ln_abs_det_harmonic(s.omega_period());
    if s.kappa == 0.0 {
        return Err(Error::domain("zero temperature has no finite period"));
    }
    Ok(params.hbar_omega.ln()
        + 0.5 * (params.mw_a2() / (2.0 * PI)).ln()
        + fluctuation::ln_sqrt_norm_over_det_r(&s, form)?
        + 0.5 * ln_h
        - action)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub params: PotentialParams,
    pub options: RateOptions,
    pub points: Vec<RatePoint>,
    /// Peak temperature T_P* in K, refined between grid points.
    pub t_peak: Option<f64>,
    pub gamma_peak: Option<f64>,
    /// Temperature where ħΓ meets the Arrhenius rate above the peak, in K.
    pub t_arrhenius: Option<f64>,
    /// Power-law exponent of ħΓ against T_c* − T* in the default window.
    pub fitted_exponent: Option<f64>,
    pub warnings: Vec<String>,
}

impl RateCurve {
    pub fn t_crit(&self) -> f64 {
        self.params.t_crit()
    }

    /// Recomputes peak, crossing, exponent and warnings from the stored points.
    pub fn recompute_features(&mut self) -> Result<()> {
        let (t_peak, gamma_peak) = match locate_peak(self)? {
            Some((t, g)) => (Some(t), Some(g)),
            None => (None, None),
        };
        self.t_peak = t_peak;
        self.gamma_peak = gamma_peak;
        self.t_arrhenius = locate_arrhenius_crossing(self)?;
        self.fitted_exponent = fit_crossover_exponent(self, DEFAULT_FIT_WINDOW).ok();
        self.warnings = semiclassical_warnings(self);
        Ok(())
    }
}

/// 400 log-spaced temperatures in [T_c/100, T_c(1 − 10⁻⁴)], 80 more with
/// T_c − T* log-spaced in [10⁻⁴, 5·10⁻²]·T_c, and T_c itself.
pub fn default_grid(params: &PotentialParams) -> Vec<f64> {
    let tc = params.t_crit();
    let mut g = log_space(tc / 100.0, tc * (1.0 - 1e-4), 400);
    g.extend(log_space(1e-4, 5e-2, 80).into_iter().map(|d| tc * (1.0 - d)));
    g.push(tc);
    normalize_grid(g)
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn normalize_grid(mut g: Vec<f64>) -> Vec<f64> {
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

pub fn scan(params: &PotentialParams, grid: &[f64], opts: &RateOptions) -> Result<RateCurve> {
    if grid.is_empty() {
        return Err(Error::argument("temperature grid is empty"));
    }
    for &t in grid {
        check_temperature(t, params)?;
    }
    let grid = normalize_grid(grid.to_vec());
    let points = grid
        .par_iter()
        .map(|&t| decay_rate(t, params, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut curve = RateCurve {
        params: *params,
        options: *opts,
        points,
        t_peak: None,
        gamma_peak: None,
        t_arrhenius: None,
        fitted_exponent: None,
        warnings: Vec::new(),
    };
    curve.recompute_features()?;
    Ok(curve)
}

fn gamma_at(curve: &RateCurve, t: f64) -> Result<f64> {
    Ok(decay_rate(t, &curve.params, &curve.options)?.gamma)
}

/// Golden-section refinement of an interior grid maximum.
fn locate_peak(curve: &RateCurve) -> Result<Option<(f64, f64)>> {
    let pts = &curve.points;
    if pts.len() < 3 {
        return Ok(None);
    }
    let (imax, _) = pts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.gamma.total_cmp(&b.1.gamma))
        .expect("non-empty");
    if imax == 0 || imax == pts.len() - 1 {
        return Ok(None);
    }
    let tol = 1e-6 * curve.t_crit();
    let (mut a, mut b) = (pts[imax - 1].t_star, pts[imax + 1].t_star);
    let r = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = gamma_at(curve, c)?;
    let mut fd = gamma_at(curve, d)?;
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = gamma_at(curve, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = gamma_at(curve, d)?;
        }
    }
    let t = 0.5 * (a + b);
    let g = gamma_at(curve, t)?;
    // a refined value below the best grid point means the maximum was not bracketed
    let best = pts[imax];
    if g < best.gamma {
        return Ok(Some((best.t_star, best.gamma)));
    }
    Ok(Some((t, g)))
}

/// First crossing of ħΓ below the Arrhenius rate above the peak, by bisection.
fn locate_arrhenius_crossing(curve: &RateCurve) -> Result<Option<f64>> {
    let pts = &curve.points;
    let tc = curve.t_crit();
    let start = match curve.t_peak {
        Some(tp) => pts.iter().position(|p| p.t_star >= tp).unwrap_or(pts.len()),
        None => 0,
    };
    let diff = |t: f64| -> Result<f64> {
        if t >= tc {
            return Ok(-arrhenius_rate(t, &curve.params, curve.options.arrhenius_prefactor));
        }
        let p = decay_rate(t, &curve.params, &curve.options)?;
        Ok(p.gamma - p.arrhenius)
    };
    let mut bracket = None;
    for i in start..pts.len() {
        let above = pts[i].gamma > pts[i].arrhenius;
        if !above {
            if i > start && pts[i - 1].gamma > pts[i - 1].arrhenius {
                bracket = Some((pts[i - 1].t_star, pts[i].t_star));
            }
            break;
        }
        if i == pts.len() - 1 && pts[i].t_star < tc {
            bracket = Some((pts[i].t_star, tc));
        }
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(None);
    };
    for _ in 0..200 {
        if hi - lo <= 1e-13 * tc {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if diff(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Least-squares slope of ln y against ln x.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientPoints { needed: 2, found: xs.len().min(ys.len()) });
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::argument("degenerate abscissae in power-law fit"));
    }
    Ok(sxy / sxx)
}

/// Exponent of ħΓ ∝ (T_c* − T*)^ν over the last `window` fraction below T_c*,
/// restricted to the falling branch above the peak.
pub fn fit_crossover_exponent(curve: &RateCurve, window: f64) -> Result<f64> {
    if !(window > 0.0 && window < 1.0) {
        return Err(Error::argument(format!("fit window must lie in (0, 1), got {window}")));
    }
    let tc = curve.t_crit();
    let lo = tc * (1.0 - window);
    let tp = curve.t_peak.unwrap_or(0.0);
    let sel: Vec<&RatePoint> = curve
        .points
        .iter()
        .filter(|p| p.t_star >= lo && p.t_star < tc && p.t_star > tp && p.gamma > 0.0)
        .collect();
    if sel.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints { needed: MIN_FIT_POINTS, found: sel.len() });
    }
    let xs: Vec<f64> = sel.iter().map(|p| tc - p.t_star).collect();
    let ys: Vec<f64> = sel.iter().map(|p| p.gamma).collect();
    fit_power_law(&xs, &ys)
}

/// Flags A/ħ ≤ 1 anywhere on the curve and ħΓ(T_P*)/ħω ≥ 1.
pub fn semiclassical_warnings(curve: &RateCurve) -> Vec<String> {
    let mut w = Vec::new();
    let min_action = curve
        .points
        .iter()
        .map(|p| p.action_over_hbar)
        .fold(f64::INFINITY, f64::min);
    if min_action <= 1.0 {
        w.push(format!("action drops to {min_action:.4} ħ; semiclassical expansion unreliable"));
    }
    let peak = curve
        .gamma_peak
        .unwrap_or_else(|| curve.points.iter().map(|p| p.gamma).fold(0.0, f64::max));
    let rel = peak / curve.params.hbar_omega;
    if rel >= 1.0 {
        w.push(format!("peak rate ħΓ/ħω = {rel:.4} ≥ 1; semiclassical expansion unreliable"));
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bench() -> PotentialParams {
        PotentialParams::benchmark()
    }

    #[test]
    fn zero_temperature_value() {
        // ħω √60 √(A/2π) e^{−A} with A = (6/5)Mωa²/ħ, evaluated independently
        let p = bench();
        let a = p.action_scale;
        let expect = 20.0 * 60.0_f64.sqrt() * (a / (2.0 * PI)).sqrt() * (-a).exp();
        assert!((expect - 4.70).abs() < 0.01);
        let r = decay_rate(p.t_crit() / 100.0, &p, &RateOptions::default()).unwrap();
        assert!((r.gamma / expect - 1.0).abs() < 1e-6, "{} vs {expect}", r.gamma);
    }

    #[test]
    fn endpoint_and_errors() {
        let p = bench();
        let r = decay_rate(p.t_crit(), &p, &RateOptions::default()).unwrap();
        assert_eq!(r.gamma, 0.0);
        assert!(matches!(
            decay_rate(1.1 * p.t_crit(), &p, &RateOptions::default()),
            Err(Error::QuantumRegimeExceeded { .. })
        ));
        assert!(decay_rate(0.0, &p, &RateOptions::default()).is_err());
        assert!(scan(&p, &[], &RateOptions::default()).is_err());
    }

    #[test]
    fn arrhenius_exponent() {
        let p = bench();
        let tc = p.t_crit();
        let e = -(arrhenius_rate(tc, &p, Some(1.0))).ln();
        assert!((e - 2.0 * PI * p.barrier_height / p.hbar_omega).abs() < 1e-12);
        let e2 = -(arrhenius_rate(0.5 * tc, &p, Some(1.0))).ln();
        assert!((e2 / e - 2.0).abs() < 1e-12);
        let d = arrhenius_rate(tc, &p, None) / arrhenius_rate(tc, &p, Some(1.0));
        assert!((d - p.hbar_omega / (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn decomposition_reassembles() {
        let p = bench();
        for f in [0.05, 0.3, 0.7, 0.95, 0.9999] {
            for form in [DeterminantForm::Reduced, DeterminantForm::Exact] {
                let opts = RateOptions { form, ..Default::default() };
                let r = decay_rate(f * p.t_crit(), &p, &opts).unwrap();
                assert!((r.recompose_gamma() / r.gamma - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn norm_free_route_agrees() {
        let p = bench();
        for f in [0.01, 0.2, 0.5, 0.9, 0.999, 0.9999] {
            for form in [DeterminantForm::Reduced, DeterminantForm::Exact] {
                let opts = RateOptions { form, ..Default::default() };
                let r = decay_rate(f * p.t_crit(), &p, &opts).unwrap();
                let ln = ln_decay_rate_norm_free(f * p.t_crit(), &p, form).unwrap();
                assert!((ln.exp() / r.gamma - 1.0).abs() < 1e-8, "f={f} {form}");
            }
        }
    }

    #[test]
    fn single_point_scan_equals_decay_rate() {
        let p = bench();
        let t = 18.0;
        let c = scan(&p, &[t], &RateOptions::default()).unwrap();
        assert_eq!(c.points.len(), 1);
        assert_eq!(c.points[0], decay_rate(t, &p, &RateOptions::default()).unwrap());
    }

    #[test]
    fn synthetic_fit_recovers_half() {
        let p = bench();
        let tc = p.t_crit();
        let points: Vec<RatePoint> = log_space(1e-4, 0.02, 40)
            .into_iter()
            .rev()
            .map(|d| {
                let t = tc * (1.0 - d);
                RatePoint {
                    t_star: t,
                    kappa: 0.0,
                    hbar_omega: p.hbar_omega,
                    action_over_hbar: 1.0,
                    norm_sq: 1.0,
                    det_ratio: -1.0,
                    gamma: 3.7 * (tc - t).sqrt(),
                    ln_gamma: 0.0,
                    arrhenius: 0.0,
                    underflow: false,
                }
            })
            .collect();
        let curve = RateCurve {
            params: p,
            options: RateOptions::default(),
            points,
            t_peak: None,
            gamma_peak: None,
            t_arrhenius: None,
            fitted_exponent: None,
            warnings: vec![],
        };
        let nu = fit_crossover_exponent(&curve, 0.02).unwrap();
        assert!((nu - 0.5).abs() < 1e-12);
        assert!(matches!(
            fit_crossover_exponent(&curve, 0.001),
            Err(Error::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn default_grid_resolves_crossover() {
        let p = bench();
        let g = default_grid(&p);
        let tc = p.t_crit();
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*g.last().unwrap(), tc);
        let n = g.iter().filter(|&&t| t >= 0.98 * tc && t < tc).count();
        assert!(n >= MIN_FIT_POINTS);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn gamma_nonnegative_and_reproducible(f in 0.01_f64..1.0) {
            let p = bench();
            let r = decay_rate(f * p.t_crit(), &p, &RateOptions::default()).unwrap();
            prop_assert!(r.gamma >= 0.0);
            prop_assert!(r.det_ratio < 0.0);
            prop_assert!((r.recompose_gamma() / r.gamma - 1.0).abs() < 1e-12);
        }
    }
}
