//! Quadratic fluctuations about the periodic bounce.
//!
//! In the variable ϖ = ω̄(τ − τ₀) the fluctuation equation is the l = 3 Lamé
//! equation η'' = (12p² sn²ϖ + 𝒜)η. Eigenvalues are returned in units of
//! (meV/ħ)², so ε/ω² is dimensionless.
//!
//! Determinants are carried as sign + ln|·| because sinh²(ωL/2) overflows long
//! before the low-temperature end of a scan.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classical::{self, BounceState};
use crate::elliptic;
use crate::error::{Error, Result};

/// Which closed form is used for the regularized determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeterminantForm {
    /// (2/(ω√(χ₁−χ₃) p̄²)) · [(E − p̄²K)/p²] · N⁻²/W.
    #[default]
    Reduced,
    /// N⁻² (dL/dq)/W, the Gelfand–Yaglom value with the zero mode removed.
    Exact,
}

impl fmt::Display for DeterminantForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeterminantForm::Reduced => "reduced",
            DeterminantForm::Exact => "exact",
        })
    }
}

impl FromStr for DeterminantForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reduced" => Ok(DeterminantForm::Reduced),
            "exact" => Ok(DeterminantForm::Exact),
            _ => Err(Error::argument(format!("unknown determinant form '{s}' (reduced|exact)"))),
        }
    }
}

/// A real number stored as sign · exp(ln_abs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLog {
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub fn from_value(x: f64) -> Self {
        Self { sign: if x < 0.0 { -1.0 } else { 1.0 }, ln_abs: x.abs().ln() }
    }

    /// May overflow to ±∞ or underflow to zero.
    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LameSpectrum {
    /// 𝒜₁ = −(2 + 5p²) − 2√(4p⁴ − p² + 1).
    pub a_plus: f64,
    /// 𝒜₋₁ = −(2 + 5p²) + 2√(4p⁴ − p² + 1).
    pub a_minus: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub eps_minus1: f64,
    pub eps_0: f64,
    pub eps_1: f64,
}

pub fn lame_spectrum(s: &BounceState) -> LameSpectrum {
    let (u, v) = (s.gap12, s.gap23);
    let d13 = u + v;
    let q = s.modulus.p_sq();
    let sr = (4.0 * q * q - q + 1.0).sqrt();
    let w2 = s.params.omega() * s.params.omega();
    let shift = 0.25 * u + 0.5 * v;
    // ε₁ is a difference of two O(1) terms that vanishes like p⁴; the
    // rationalized form keeps it accurate near the sphaleron.
    let half = 0.5 * d13 * sr;
    LameSpectrum {
        a_plus: -(2.0 + 5.0 * q) - 2.0 * sr,
        a_minus: -(2.0 + 5.0 * q) + 2.0 * sr,
        alpha1: -(2.0 * u + v),
        alpha2: 0.25 * d13,
        eps_minus1: w2 * (-shift - half),
        eps_0: 0.0,
        eps_1: w2 * (15.0 / 16.0 * u * u / (half + shift)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LameMode {
    /// η₋₁, the negative mode.
    Negative,
    /// η₀ ∝ ẋ_cl.
    Zero,
    /// η₁, the soft mode.
    Soft,
}

impl LameMode {
    pub fn index(self) -> i32 {
        match self {
            LameMode::Negative => -1,
            LameMode::Zero => 0,
            LameMode::Soft => 1,
        }
    }
}

impl TryFrom<i32> for LameMode {
    type Error = Error;
    fn try_from(n: i32) -> Result<Self> {
        match n {
            -1 => Ok(LameMode::Negative),
            0 => Ok(LameMode::Zero),
            1 => Ok(LameMode::Soft),
            _ => Err(Error::argument(format!("Lamé mode index must be −1, 0 or 1, got {n}"))),
        }
    }
}

/// Characteristic value 𝒜 of a mode.
pub fn lame_characteristic(mode: LameMode, s: &BounceState) -> f64 {
    let q = s.modulus.p_sq();
    let sp = lame_spectrum(s);
    match mode {
        LameMode::Negative => sp.a_minus,
        LameMode::Zero => -4.0 * (1.0 + q),
        LameMode::Soft => sp.a_plus,
    }
}

/// Unnormalized eigenfunction at ϖ.
///
/// The η±₁ forms are rescaled by constants so that they stay finite as p → 0.
pub fn lame_mode(mode: LameMode, varpi: f64, s: &BounceState) -> Result<f64> {
    let j = elliptic::jacobi(varpi, &s.modulus)?;
    let q = s.modulus.p_sq();
    let c = 1.0 + 2.0 * q + (4.0 * q * q - q + 1.0).sqrt();
    let sn2 = j.sn * j.sn;
    Ok(match mode {
        LameMode::Zero => j.sn * j.cn * j.dn,
        LameMode::Soft => j.dn * (sn2 - 1.0 / c),
        LameMode::Negative => j.dn * (q * sn2 - c / 5.0),
    })
}

/// ∂χ₁/∂q from dχ₁/dκ ÷ dq/dκ.
pub fn dchi1_dq(s: &BounceState) -> f64 {
    let (u, v) = (s.gap12, s.gap23);
    let d13 = u + v;
    v * d13 * d13 / (2.0 * (u * u + u * v + v * v))
}

/// ∂χ₁/∂q by Richardson-extrapolated central differences in κ.
pub fn dchi1_dq_finite_difference(s: &BounceState) -> Result<f64> {
    let k = s.kappa;
    let room = (k - classical::KAPPA_SPHALERON).min(-k);
    if room <= 0.0 {
        return Err(Error::domain("finite difference needs an interior κ"));
    }
    let h = 1e-2 * room;
    let p = &s.params;
    let diff = |h: f64| -> Result<(f64, f64)> {
        let a = classical::bounce_state(k + h, p)?;
        let b = classical::bounce_state(k - h, p)?;
        Ok((
            (a.chi[0] - b.chi[0]) / (2.0 * h),
            (a.modulus.p_sq() - b.modulus.p_sq()) / (2.0 * h),
        ))
    };
    let (c1, q1) = diff(h)?;
    let (c2, q2) = diff(0.5 * h)?;
    let dc = (4.0 * c2 - c1) / 3.0;
    let dq = (4.0 * q2 - q1) / 3.0;
    Ok(dc / dq)
}

/// W/(a²ω²) = (9/8)(χ₁−χ₂)(χ₁−χ₃)∂χ₁/∂q, in the cancellation-free form
/// (9/16) u v (u+v)³ / (u² + uv + v²). ln of the same quantity is returned too.
fn wronskian_reduced(s: &BounceState) -> (f64, f64) {
    let (u, v) = (s.gap12, s.gap23);
    let d13 = u + v;
    let qsum = u * u + u * v + v * v;
    let val = 9.0 / 16.0 * u * v * d13.powi(3) / qsum;
    let ln = (9.0_f64 / 16.0).ln() + u.ln() + s.ln_gap23 + 3.0 * d13.ln() - qsum.ln();
    (val, ln)
}

/// W(f₀, f₁) in Å²·(meV/ħ)².
pub fn wronskian(s: &BounceState) -> f64 {
    let p = &s.params;
    p.a * p.a * p.omega() * p.omega() * wronskian_reduced(s).0
}

/// ln of the regularized determinant times ω², given n₂ = N⁻²/(a²ω).
fn ln_det_r_scaled(s: &BounceState, n2: f64, form: DeterminantForm) -> Result<f64> {
    let (u, v) = (s.gap12, s.gap23);
    let d13 = u + v;
    if u == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let m = &s.modulus;
    let b = elliptic::complete_b(m);
    let ln_w = wronskian_reduced(s).1;
    match form {
        DeterminantForm::Reduced => {
            Ok(std::f64::consts::LN_2 - 0.5 * d13.ln() - m.ln_p_bar_sq() + b.ln() + n2.ln() - ln_w)
        }
        DeterminantForm::Exact => {
            // dL/dq · ω = (4/√(u+v)) [B/(2p̄²) − K(v − u)(u + v)/(4(u² + uv + v²))];
            // the bracket is formed after multiplying through by p̄².
            let qsum = u * u + u * v + v * v;
            let pb = m.p_bar_sq();
            let bracket = 0.5 * b - s.k * (v - u) * d13 * pb / (4.0 * qsum);
            if bracket <= 0.0 {
                return Err(Error::domain(format!(
                    "dL/dq bracket lost to cancellation at κ = {}",
                    s.kappa
                )));
            }
            Ok(n2.ln() + 4.0_f64.ln() - 0.5 * d13.ln() + bracket.ln() - m.ln_p_bar_sq() - ln_w)
        }
    }
}

/// ln|Det[ĥ]| with Det[ĥ] = −4 sinh²(ωL/2).
pub fn ln_abs_det_harmonic(omega_l: f64) -> f64 {
    let y = 0.5 * omega_l;
    if y > 1.0 {
        // ln sinh y = y − ln 2 + ln(1 − e^{−2y})
        4.0_f64.ln() + 2.0 * (y - std::f64::consts::LN_2 + (-(-2.0 * y).exp()).ln_1p())
    } else {
        4.0_f64.ln() + 2.0 * y.sinh().ln()
    }
}

/// Det[ĥ] = −4 sinh²(ωL/2) for a period L in ħ/meV.
pub fn det_harmonic(period: f64, params: &crate::PotentialParams) -> SignedLog {
    SignedLog { sign: -1.0, ln_abs: ln_abs_det_harmonic(params.omega() * period) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminantData {
    pub form: DeterminantForm,
    /// W(f₀, f₁) in Å²·(meV/ħ)².
    pub wronskian: f64,
    /// Det^R[Ô] in (ħ/meV)².
    pub det_r: SignedLog,
    pub det_h: SignedLog,
    /// Det^R[Ô]/Det[ĥ] in (ħ/meV)².
    pub ratio: SignedLog,
}

impl DeterminantData {
    /// ω² · Det^R/Det[ĥ], dimensionless.
    pub fn ratio_omega_sq(&self, params: &crate::PotentialParams) -> f64 {
        let w = params.omega();
        self.ratio.sign * (self.ratio.ln_abs + 2.0 * w.ln()).exp()
    }
}

/// All determinant quantities, reusing an already computed n₂ = N⁻²/(a²ω).
pub fn determinants_with_norm(s: &BounceState, n2: f64, form: DeterminantForm) -> Result<DeterminantData> {
    let w = s.params.omega();
    let ln_w2 = 2.0 * w.ln();
    let det_h = det_harmonic(s.period, &s.params);
    if s.kappa == 0.0 {
        // p = 1: both determinants diverge like e^{ωL}; the ratio tends to −1/(60ω²)
        return Ok(DeterminantData {
            form,
            wronskian: 0.0,
            det_r: SignedLog { sign: 1.0, ln_abs: f64::INFINITY },
            det_h,
            ratio: SignedLog { sign: -1.0, ln_abs: -(60.0_f64).ln() - ln_w2 },
        });
    }
    let ln_r = ln_det_r_scaled(s, n2, form)?;
    let det_r = SignedLog { sign: 1.0, ln_abs: ln_r - ln_w2 };
    Ok(DeterminantData {
        form,
        wronskian: wronskian(s),
        det_r,
        det_h,
        ratio: SignedLog { sign: det_r.sign * det_h.sign, ln_abs: det_r.ln_abs - det_h.ln_abs },
    })
}

pub fn determinants(s: &BounceState, form: DeterminantForm) -> Result<DeterminantData> {
    determinants_with_norm(s, classical::norm_integral(s), form)
}

/// Det^R[Ô] in (ħ/meV)².
pub fn det_regularized(s: &BounceState, form: DeterminantForm) -> Result<SignedLog> {
    Ok(determinants(s, form)?.det_r)
}

/// Det^R[Ô]/Det[ĥ] in (ħ/meV)².
pub fn det_ratio(s: &BounceState, form: DeterminantForm) -> Result<SignedLog> {
    Ok(determinants(s, form)?.ratio)
}

/// ln of √(N⁻²/|Det^R|)·ω^{-1/2}·a^{-1}, with N⁻² cancelled analytically.
///
/// Both determinant forms are N⁻² times a closed expression, so the
/// combination that enters the rate never needs the norm.
pub(crate) fn ln_sqrt_norm_over_det_r(s: &BounceState, form: DeterminantForm) -> Result<f64> {
    // ln_det_r_scaled is linear in ln n₂; evaluate it at n₂ = 1.
    let ln_r_over_n2 = ln_det_r_scaled(s, 1.0, form)?;
    Ok(-0.5 * ln_r_over_n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{bounce_state, bounce_state_from_p_sq, invert_temperature};
    use crate::PotentialParams;
    use proptest::prelude::*;

    fn bench() -> PotentialParams {
        PotentialParams::benchmark()
    }

    fn w2() -> f64 {
        bench().omega().powi(2)
    }

    #[test]
    fn spectrum_endpoints() {
        let s = bounce_state(0.0, &bench()).unwrap();
        let sp = lame_spectrum(&s);
        assert!((sp.eps_minus1 / w2() + 1.25).abs() < 1e-12);
        assert!((sp.eps_1 / w2() - 0.75).abs() < 1e-12);
        assert!((sp.a_plus + 11.0).abs() < 1e-12);
        assert!((sp.alpha1 + 2.0).abs() < 1e-12);
        assert!((sp.alpha2 - 0.25).abs() < 1e-12);

        let s = bounce_state(classical::KAPPA_SPHALERON, &bench()).unwrap();
        let sp = lame_spectrum(&s);
        assert!((sp.eps_minus1 / w2() + 1.0).abs() < 1e-12);
        assert!((sp.eps_1 / w2()).abs() < 1e-12);
        assert_eq!(sp.eps_0, 0.0);
    }

    #[test]
    fn spectrum_matches_characteristic_values() {
        let s = bounce_state(-0.06, &bench()).unwrap();
        let sp = lame_spectrum(&s);
        let direct_1 = w2() * (sp.alpha1 - sp.alpha2 * sp.a_plus);
        let direct_m1 = w2() * (sp.alpha1 - sp.alpha2 * sp.a_minus);
        assert!((sp.eps_1 / direct_1 - 1.0).abs() < 1e-12);
        assert!((sp.eps_minus1 / direct_m1 - 1.0).abs() < 1e-12);
        // α₁ − α₂𝒜₀ = 0 is the zero mode
        let a0 = lame_characteristic(LameMode::Zero, &s);
        assert!((sp.alpha1 - sp.alpha2 * a0).abs() < 1e-14);
    }

    /// η'' − (12p² sn² + 𝒜)η with a five-point second difference.
    fn residual(f: &dyn Fn(f64) -> f64, a: f64, q: f64, s: &BounceState, x: f64) -> f64 {
        let h = 5e-3;
        let d2 = (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
            / (12.0 * h * h);
        let sn = elliptic::jacobi(x, &s.modulus).unwrap().sn;
        d2 - (12.0 * q * sn * sn + a) * f(x)
    }

    #[test]
    fn modes_solve_lame_and_are_periodic() {
        let mut rng = 0x2545_f491_u64;
        let mut next = || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        for kappa in [-0.14, -2.0 / 27.0, -0.01, -1e-5] {
            let s = bounce_state(kappa, &bench()).unwrap();
            let q = s.modulus.p_sq();
            for mode in [LameMode::Negative, LameMode::Zero, LameMode::Soft] {
                let a = lame_characteristic(mode, &s);
                let f = |x: f64| lame_mode(mode, x, &s).unwrap();
                for _ in 0..50 {
                    let x = 4.0 * s.k * (next() - 0.5);
                    let r = residual(&f, a, q, &s, x);
                    assert!(r.abs() < 1e-8, "κ={kappa} mode {} ϖ={x}: {r}", mode.index());
                    assert!((f(x + 2.0 * s.k) - f(x)).abs() < 1e-10);
                }
            }
        }
        let s = bounce_state(-0.05, &bench()).unwrap();
        assert_eq!(lame_mode(LameMode::Zero, 0.0, &s).unwrap(), 0.0);
        assert!(LameMode::try_from(2).is_err());
    }

    #[test]
    fn discarded_solutions_are_antiperiodic() {
        // The remaining four polynomial solutions: sn(sn² + b) and cn(sn² + b),
        // each with two characteristic values. They solve the same equation
        // but flip sign under ϖ → ϖ + 2K.
        let s = bounce_state(-0.05, &bench()).unwrap();
        let q = s.modulus.p_sq();
        let mut count = 0;
        for sign in [-1.0, 1.0] {
            let a_sn = -5.0 * q - 5.0 + sign * 2.0 * (4.0 * q * q - 7.0 * q + 4.0).sqrt();
            let b_sn = -(a_sn + 9.0 * q + 9.0) / (10.0 * q);
            let a_cn = -2.0 * q - 5.0 + sign * 2.0 * (q * q - q + 4.0).sqrt();
            let b_cn = -(a_cn + 4.0 * q + 9.0) / (10.0 * q);
            let f_sn = move |x: f64| {
                let j = elliptic::jacobi(x, &s.modulus).unwrap();
                j.sn * (j.sn * j.sn + b_sn)
            };
            let f_cn = move |x: f64| {
                let j = elliptic::jacobi(x, &s.modulus).unwrap();
                j.cn * (j.sn * j.sn + b_cn)
            };
            for (f, a) in [(&f_sn as &dyn Fn(f64) -> f64, a_sn), (&f_cn, a_cn)] {
                for x in [0.3, 1.1, 2.7] {
                    assert!(residual(f, a, q, &s, x).abs() < 1e-8);
                    let y0 = f(x);
                    let y1 = f(x + 2.0 * s.k);
                    assert!((y1 + y0).abs() < 1e-10);
                    assert!((y1 - y0).abs() > 1e-3, "should not be 2K-periodic");
                }
                count += 1;
            }
        }
        assert_eq!(count, 4);
    }

    #[test]
    fn zero_mode_tracks_velocity() {
        let s = bounce_state(-0.08, &bench()).unwrap();
        let mut ratio: Option<f64> = None;
        for i in 1..40 {
            let tau = 0.0123 * i as f64 * s.period;
            if ((tau / s.period) * 2.0).fract().abs() < 1e-3 {
                continue;
            }
            let varpi = s.omega_bar * tau;
            let eta = lame_mode(LameMode::Zero, varpi, &s).unwrap();
            let v = classical::bounce_velocity(tau, 0.0, &s).unwrap();
            let r = v / eta;
            if let Some(r0) = ratio {
                assert!((r / r0 - 1.0_f64).abs() < 1e-9);
            } else {
                ratio = Some(r);
            }
        }
    }

    #[test]
    fn wronskian_chain_rule_matches_finite_difference() {
        let s = bounce_state_from_p_sq(0.25, &bench()).unwrap();
        let a = dchi1_dq(&s);
        let b = dchi1_dq_finite_difference(&s).unwrap();
        assert!((a / b - 1.0).abs() < 1e-7, "{a} vs {b}");
        for kappa in [-0.12, -0.03, -1e-3] {
            let s = bounce_state(kappa, &bench()).unwrap();
            let b = dchi1_dq_finite_difference(&s).unwrap();
            assert!((dchi1_dq(&s) / b - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn wronskian_small_kappa_limit() {
        // W/(a²ω²) → (9/16) p̄² as κ → 0
        let p = bench();
        for kappa in [-1e-8, -1e-12] {
            let s = bounce_state(kappa, &p).unwrap();
            let w = wronskian(&s) / (p.a * p.a * w2());
            let pb = s.modulus.p_bar_sq();
            assert!((w / (9.0 / 16.0 * pb) - 1.0).abs() < 1e-3, "{}", w / pb);
        }
    }

    #[test]
    fn bracket_limit_at_sphaleron() {
        let s = bounce_state_from_p_sq(1e-9, &bench()).unwrap();
        let b = elliptic::complete_b(&s.modulus);
        assert!((b - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
    }

    fn loglog_slope(form: DeterminantForm) -> f64 {
        let ps: Vec<f64> = (0..6).map(|i| 1e-3 * 10f64.powf(i as f64 / 5.0)).collect();
        let pts: Vec<(f64, f64)> = ps
            .iter()
            .map(|&p| {
                let s = bounce_state_from_p_sq(p * p, &bench()).unwrap();
                (p.ln(), det_regularized(&s, form).unwrap().ln_abs)
            })
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn det_r_power_law_at_sphaleron() {
        assert!((loglog_slope(DeterminantForm::Reduced) - 2.0).abs() < 0.05);
        // the exact form vanishes faster, which keeps the rate finite at T_c
        assert!((loglog_slope(DeterminantForm::Exact) - 4.0).abs() < 0.05);
    }

    #[test]
    fn harmonic_determinant() {
        let v = ln_abs_det_harmonic(2.0 * std::f64::consts::PI);
        assert!((v - (4.0 * std::f64::consts::PI.sinh().powi(2)).ln()).abs() < 1e-14);
        // ωL = 40: ln 4 + 2 ln sinh 20
        let v = ln_abs_det_harmonic(40.0);
        let exact = 40.0 - 2.0 * (-40.0_f64).exp();
        assert!((v - exact).abs() < 1e-15);
        let x = 1e-3;
        let v = ln_abs_det_harmonic(x);
        assert!((v.exp() / (x * x) - 1.0).abs() < 1e-6);
        let d = det_harmonic(1.0, &bench());
        assert_eq!(d.sign, -1.0);
        assert!(ln_abs_det_harmonic(5000.0).is_finite());
    }

    #[test]
    fn ratio_low_temperature_limit() {
        let p = bench();
        for form in [DeterminantForm::Reduced, DeterminantForm::Exact] {
            for f in [1e-3, 0.01, 0.1] {
                let s = invert_temperature(f * p.t_crit(), &p).unwrap();
                let r = determinants(&s, form).unwrap().ratio_omega_sq(&p);
                assert!((r * 60.0 + 1.0).abs() < 1e-3, "{form} T={f}T_c: {}", r * 60.0);
            }
            let s = bounce_state(0.0, &p).unwrap();
            let r = determinants(&s, form).unwrap().ratio_omega_sq(&p);
            assert!((r * 60.0 + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn reduced_and_exact_coincide_only_at_one_point() {
        let p = bench();
        let s = bounce_state(-2.0 / 27.0, &p).unwrap();
        let a = det_regularized(&s, DeterminantForm::Reduced).unwrap().ln_abs;
        let b = det_regularized(&s, DeterminantForm::Exact).unwrap().ln_abs;
        assert!((a - b).abs() < 1e-12);
        let s = bounce_state(-0.1, &p).unwrap();
        let a = det_regularized(&s, DeterminantForm::Reduced).unwrap().ln_abs;
        let b = det_regularized(&s, DeterminantForm::Exact).unwrap().ln_abs;
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn form_parsing() {
        assert_eq!("exact".parse::<DeterminantForm>().unwrap(), DeterminantForm::Exact);
        assert!("fancy".parse::<DeterminantForm>().is_err());
        assert_eq!(DeterminantForm::default().to_string(), "reduced");
    }

    proptest! {
        #[test]
        fn spectrum_invariants(kappa in -0.148_f64..-1e-9) {
            let s = bounce_state(kappa, &bench()).unwrap();
            let sp = lame_spectrum(&s);
            let (em, e1) = (sp.eps_minus1 / w2(), sp.eps_1 / w2());
            prop_assert!(em < -1.0 && em > -1.25);
            prop_assert!(e1 > 0.0 && e1 < 0.75);
            prop_assert!(em <= sp.eps_0 && sp.eps_0 <= e1);
        }

        #[test]
        fn ratio_negative_below_crossover(f in 0.001_f64..0.9999) {
            let p = bench();
            let s = invert_temperature(f * p.t_crit(), &p).unwrap();
            for form in [DeterminantForm::Reduced, DeterminantForm::Exact] {
                let d = determinants(&s, form).unwrap();
                prop_assert_eq!(d.ratio.sign, -1.0);
                prop_assert!(d.ratio.ln_abs.is_finite());
            }
        }

        #[test]
        fn eps1_decreases_with_temperature(f in 0.02_f64..0.99, df in 1e-4_f64..1e-2) {
            let p = bench();
            let a = invert_temperature(f * p.t_crit(), &p).unwrap();
            let b = invert_temperature((f + df).min(0.9999) * p.t_crit(), &p).unwrap();
            let (ea, eb) = (lame_spectrum(&a).eps_1, lame_spectrum(&b).eps_1);
            // at low T the change is below rounding
            if f > 0.3 {
                prop_assert!(eb < ea);
            } else {
                prop_assert!(eb <= ea);
            }
        }
    }
}
