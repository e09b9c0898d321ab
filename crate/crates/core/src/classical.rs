//! Periodic bounce of the cubic potential.
//!
//! Positions are written as x = (3a/2)χ. The turning points χ₁ > χ₂ > χ₃ solve
//! χ²(1 − χ) = −κ with κ = 4E/(27 V(a)) ∈ [−4/27, 0].
//!
//! Everything downstream is expressed through the two gaps u = χ₁ − χ₂ and
//! v = χ₂ − χ₃, which are computed without cancellation at both ends of the
//! κ range. Near κ = 0 the gap v and p̄² = v/(u + v) underflow, so ln v is
//! carried separately.

use std::f64::consts::{FRAC_PI_3, LN_2, PI};

use crate::elliptic::{self, Modulus};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::units::{PotentialParams, BOLTZMANN_MEV_PER_K};

/// κ at the barrier top.
pub const KAPPA_SPHALERON: f64 = -4.0 / 27.0;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BounceState {
    pub params: PotentialParams,
    pub kappa: f64,
    /// ln(−κ); −∞ at κ = 0.
    pub ln_neg_kappa: f64,
    /// Euclidean energy E = 27 V(a) κ / 4 in meV.
    pub energy: f64,
    /// Turning points χ₁ > χ₂ > χ₃.
    pub chi: [f64; 3],
    /// u = χ₁ − χ₂.
    pub gap12: f64,
    /// v = χ₂ − χ₃.
    pub gap23: f64,
    pub ln_gap23: f64,
    pub modulus: Modulus,
    /// K(p); infinite at κ = 0.
    pub k: f64,
    /// Period L in ħ/meV.
    pub period: f64,
    /// Temperature T* = ħ/(k_B L) in K.
    pub t_star: f64,
    /// ω̄ = ω√(χ₁ − χ₃)/2.
    pub omega_bar: f64,
}

impl BounceState {
    /// χ₁ − χ₃.
    pub fn gap13(&self) -> f64 {
        self.gap12 + self.gap23
    }

    pub fn is_sphaleron(&self) -> bool {
        self.gap12 == 0.0
    }

    /// ωL, dimensionless.
    pub fn omega_period(&self) -> f64 {
        self.params.omega() * self.period
    }
}

/// κ for a Euclidean energy E in meV.
pub fn energy_to_kappa(energy: f64, params: &PotentialParams) -> f64 {
    4.0 * energy / (27.0 * params.barrier_height)
}

pub fn bounce_state(kappa: f64, params: &PotentialParams) -> Result<BounceState> {
    if !(KAPPA_SPHALERON * (1.0 + 1e-14)..=0.0).contains(&kappa) {
        return Err(Error::domain(format!("κ must lie in [−4/27, 0], got {kappa}")));
    }
    let kappa = kappa.max(KAPPA_SPHALERON);
    build(kappa, (-kappa).ln(), params)
}

/// Same as [`bounce_state`] but parametrized by ℓ = ln(−κ), which stays
/// meaningful after κ itself underflows.
pub fn bounce_state_from_log(ln_neg_kappa: f64, params: &PotentialParams) -> Result<BounceState> {
    let top = (4.0_f64 / 27.0).ln();
    if ln_neg_kappa.is_nan() || ln_neg_kappa > top + 1e-14 {
        return Err(Error::domain(format!("ln(−κ) must not exceed ln(4/27), got {ln_neg_kappa}")));
    }
    let l = ln_neg_kappa.min(top);
    let kappa = if l == top { KAPPA_SPHALERON } else { -l.exp() };
    build(kappa, l, params)
}

fn build(kappa: f64, l: f64, params: &PotentialParams) -> Result<BounceState> {
    let omega = params.omega();
    let energy = 27.0 * params.barrier_height * kappa / 4.0;
    if kappa == KAPPA_SPHALERON {
        let modulus = Modulus::new(0.0)?;
        let period = 2.0 * PI / omega;
        return Ok(BounceState {
            params: *params,
            kappa,
            ln_neg_kappa: l,
            energy,
            chi: [2.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0],
            gap12: 0.0,
            gap23: 1.0,
            ln_gap23: 0.0,
            modulus,
            k: 0.5 * PI,
            period,
            t_star: params.t_crit(),
            omega_bar: 0.5 * omega,
        });
    }

    // sin(3θ/2) = √(−27κ/4); the complementary angle δ = π/3 − θ is taken
    // from 1 + 27κ/4 near the sphaleron so that both stay accurate.
    let sqrt_x = (27.0_f64 / 4.0).sqrt() * (0.5 * l).exp();
    let (theta, delta) = if sqrt_x * sqrt_x < 0.5 {
        let th = 2.0 / 3.0 * sqrt_x.asin();
        (th, FRAC_PI_3 - th)
    } else {
        let y = (1.0 + 27.0 * kappa / 4.0).max(0.0);
        let de = 2.0 / 3.0 * y.sqrt().asin();
        (FRAC_PI_3 - de, de)
    };
    from_angles(theta, delta, kappa, l, energy, params)
}

/// State with a prescribed p² ∈ (0, 1).
///
/// Uses tan θ = √3 p̄²/(1 + p²) and tan δ = √3 p²/(2 − p²), which keep both
/// gaps accurate near the sphaleron where κ + 4/27 is lost to rounding.
pub fn bounce_state_from_p_sq(p_sq: f64, params: &PotentialParams) -> Result<BounceState> {
    if !(p_sq > 0.0 && p_sq < 1.0) {
        return Err(Error::domain(format!("p² must lie in (0, 1), got {p_sq}")));
    }
    let q_bar = 1.0 - p_sq;
    let theta = (SQRT3 * q_bar / (1.0 + p_sq)).atan();
    let delta = (SQRT3 * p_sq / (2.0 - p_sq)).atan();
    let sh = (1.5 * theta).sin();
    let kappa = KAPPA_SPHALERON * sh * sh;
    let l = (4.0_f64 / 27.0).ln() + 2.0 * sh.ln();
    let energy = 27.0 * params.barrier_height * kappa / 4.0;
    from_angles(theta, delta, kappa, l, energy, params)
}

fn from_angles(
    theta: f64,
    delta: f64,
    kappa: f64,
    l: f64,
    energy: f64,
    params: &PotentialParams,
) -> Result<BounceState> {
    let omega = params.omega();
    let u = 2.0 / SQRT3 * delta.sin();
    let v = 2.0 / SQRT3 * theta.sin();
    let ln_v = if v > 1e-290 { v.ln() } else { LN_2 + 0.5 * l };
    let chi1 = 1.0 / 3.0 + 2.0 / 3.0 * theta.cos();
    let half = 0.5 * theta;
    let chi2 = 4.0 / 3.0 * (0.5 * delta).cos() * half.sin();
    let chi3 = 4.0 / 3.0 * half.sin() * (5.0 * PI / 6.0 - half).cos();

    let d13 = u + v;
    let modulus = Modulus::from_parts(u / d13, v / d13, ln_v - d13.ln())?;
    let k = if l == f64::NEG_INFINITY { f64::INFINITY } else { elliptic::complete_k(&modulus)? };
    let sd = d13.sqrt();
    let period = 4.0 * k / (omega * sd);
    let t_star = 1.0 / (BOLTZMANN_MEV_PER_K * period);
    Ok(BounceState {
        params: *params,
        kappa,
        ln_neg_kappa: l,
        energy,
        chi: [chi1, chi2, chi3],
        gap12: u,
        gap23: v,
        ln_gap23: ln_v,
        modulus,
        k,
        period,
        t_star,
        omega_bar: 0.5 * omega * sd,
    })
}

pub fn temperature(s: &BounceState) -> f64 {
    s.t_star
}

/// Finds the bounce whose period is ħ/(k_B T*).
///
/// Bisects on ln(−κ) so that temperatures far below T_c, where κ underflows,
/// are still reachable.
pub fn invert_temperature(t_star: f64, params: &PotentialParams) -> Result<BounceState> {
    if !(t_star.is_finite() && t_star > 0.0) {
        return Err(Error::domain(format!("temperature must be positive, got {t_star}")));
    }
    let tc = params.t_crit();
    if t_star > tc * (1.0 + 1e-12) {
        return Err(Error::QuantumRegimeExceeded { t_star, t_crit: tc });
    }
    if t_star >= tc {
        return bounce_state(KAPPA_SPHALERON, params);
    }
    let top = (4.0_f64 / 27.0).ln();
    let k_guess = 0.25 * params.hbar_omega / (BOLTZMANN_MEV_PER_K * t_star);
    let guess = 2.0 * (4.0 * LN_2 - 2.0 * k_guess - LN_2);
    let mut lo = guess.min(top) - 20.0;
    while bounce_state_from_log(lo, params)?.t_star >= t_star {
        lo = 2.0 * lo - 10.0;
    }
    let mut hi = top;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if bounce_state_from_log(mid, params)?.t_star < t_star {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = bounce_state_from_log(lo, params)?;
    let b = bounce_state_from_log(hi, params)?;
    let s = if (a.t_star - t_star).abs() <= (b.t_star - t_star).abs() { a } else { b };
    if (s.t_star - t_star).abs() > 1e-10 * t_star {
        return Err(Error::domain(format!(
            "temperature inversion did not converge: target {t_star} K, reached {} K",
            s.t_star
        )));
    }
    Ok(s)
}

/// Dimensionless N⁻²/(a²ω) = 9u² ∫₀^{π/2} sin²φ cos²φ √(v + u sin²φ) dφ.
pub fn norm_integral(s: &BounceState) -> f64 {
    let (u, v) = (s.gap12, s.gap23);
    if u == 0.0 {
        return 0.0;
    }
    let f = |phi: f64| {
        let (sn, cs) = phi.sin_cos();
        sn * sn * cs * cs * (v + u * sn * sn).sqrt()
    };
    9.0 * u * u * quadrature::integrate(f, 0.0, 0.5 * PI, 1e-13)
}

/// The same integral from complete elliptic integrals,
/// (3/5)(u + v)^{5/2} [2(q² − q + 1)E − p̄²(1 + p̄²)K] with q = p².
///
/// Loses about log₁₀(1/q²) digits near the sphaleron; used as an independent
/// check on the quadrature.
pub fn norm_integral_closed(s: &BounceState) -> f64 {
    if s.gap12 == 0.0 {
        return 0.0;
    }
    let m = &s.modulus;
    let (q, qb) = (m.p_sq(), m.p_bar_sq());
    let e = elliptic::complete_e(m);
    let kp = if qb == 0.0 { 0.0 } else { qb * s.k };
    let bracket = 2.0 * (q * q - q + 1.0) * e - kp * (1.0 + qb);
    0.6 * s.gap13().powf(2.5) * bracket
}

/// N⁻² = ∫ ẋ² dτ over one period, in Å²·meV/ħ.
pub fn norm_squared(s: &BounceState) -> f64 {
    s.params.a * s.params.a * s.params.omega() * norm_integral(s)
}

/// A/ħ = (M N⁻² − E L)/ħ.
pub fn classical_action(s: &BounceState) -> f64 {
    action_from_norm(s, norm_integral(s))
}

pub(crate) fn action_from_norm(s: &BounceState, n2: f64) -> f64 {
    let el = if s.kappa == 0.0 { 0.0 } else { 1.125 * s.kappa * s.omega_period() };
    s.params.mw_a2() * (n2 - el)
}

/// A₀/ħ = V(a)/(k_B T*).
pub fn thermal_action(t_star: f64, params: &PotentialParams) -> f64 {
    params.barrier_height / (BOLTZMANN_MEV_PER_K * t_star)
}

fn phase(tau: f64, tau0: f64, s: &BounceState) -> f64 {
    0.5 * s.gap13().sqrt() * s.params.omega() * (tau - tau0)
}

/// x_cl(τ) in Å; the bounce sits at the exit point χ₁ at τ = τ₀.
pub fn bounce(tau: f64, tau0: f64, s: &BounceState) -> Result<f64> {
    let j = elliptic::jacobi(phase(tau, tau0, s), &s.modulus)?;
    Ok(1.5 * s.params.a * (s.chi[0] - s.gap12 * j.sn * j.sn))
}

/// dx_cl/dτ in Å·meV/ħ.
pub fn bounce_velocity(tau: f64, tau0: f64, s: &BounceState) -> Result<f64> {
    let j = elliptic::jacobi(phase(tau, tau0, s), &s.modulus)?;
    let f = -1.5 * s.params.a * s.gap12 * s.gap13().sqrt() * s.params.omega();
    Ok(f * j.sn * j.cn * j.dn)
}
