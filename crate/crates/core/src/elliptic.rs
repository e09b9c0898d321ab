//! Complete and incomplete elliptic integrals and Jacobi functions.
//!
//! The modulus is carried together with its complement p̄² = 1 − p² and ln p̄²,
//! because the physically interesting regime is p → 1 where p̄² can underflow
//! long before K(p) stops being representable.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this p̄² the logarithmic expansions are used.
pub const NEAR_ONE: f64 = 1e-8;
/// Below this p² the trigonometric expansions are used.
pub const NEAR_ZERO: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulus {
    p: f64,
    p_sq: f64,
    p_bar_sq: f64,
    ln_p_bar_sq: f64,
}

impl Modulus {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("modulus must lie in [0, 1], got {p}")));
        }
        let p_bar_sq = (1.0 - p) * (1.0 + p);
        Ok(Self { p, p_sq: p * p, p_bar_sq, ln_p_bar_sq: p_bar_sq.ln() })
    }

    /// Builds the modulus from independently accurate p² and p̄².
    ///
    /// `ln_p_bar_sq` must be supplied separately so that it stays finite after
    /// p̄² underflows.
    pub fn from_parts(p_sq: f64, p_bar_sq: f64, ln_p_bar_sq: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_sq) || !(0.0..=1.0).contains(&p_bar_sq) || ln_p_bar_sq > 0.0 {
            return Err(Error::domain(format!(
                "inconsistent modulus parts p²={p_sq}, p̄²={p_bar_sq}, ln p̄²={ln_p_bar_sq}"
            )));
        }
        if ((p_sq + p_bar_sq) - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("p² + p̄² = {} ≠ 1", p_sq + p_bar_sq)));
        }
        Ok(Self { p: p_sq.sqrt(), p_sq, p_bar_sq, ln_p_bar_sq })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn p_sq(&self) -> f64 {
        self.p_sq
    }
    pub fn p_bar_sq(&self) -> f64 {
        self.p_bar_sq
    }
    pub fn p_bar(&self) -> f64 {
        self.p_bar_sq.sqrt()
    }
    pub fn ln_p_bar_sq(&self) -> f64 {
        self.ln_p_bar_sq
    }

    fn is_singular(&self) -> bool {
        self.ln_p_bar_sq == f64::NEG_INFINITY
    }

    fn in_log_tail(&self) -> bool {
        self.p_bar_sq < NEAR_ONE
    }
}

/// Returns K and Σ_{n≥1} 2^{n−1} c_n²/p² from the AGM of (1, p̄).
///
/// The scaled sum avoids the 0/0 at small p; B = K(½ − S).
fn agm(m: &Modulus) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = m.p_bar();
    let mut r = m.p_sq / (4.0 * (1.0 + b) * (1.0 + b));
    let mut c_sq = r * m.p_sq;
    let mut pow = 1.0;
    let mut s = 0.0;
    for _ in 0..64 {
        s += pow * r;
        let a_next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = a_next;
        if pow * r <= 1e-17 * s || r == 0.0 {
            break;
        }
        let a2 = 0.5 * (a + b);
        let r_next = r * c_sq / (16.0 * a2 * a2);
        c_sq = r_next * m.p_sq;
        r = r_next;
        pow *= 2.0;
    }
    // one more step makes a and b agree to rounding
    let a_inf = 0.5 * (a + b);
    (FRAC_PI_2 / a_inf, s)
}

fn tail_log(m: &Modulus) -> f64 {
    2.0 * LN_2 - 0.5 * m.ln_p_bar_sq
}

/// Complete elliptic integral of the first kind K(p).
pub fn complete_k(m: &Modulus) -> Result<f64> {
    if m.is_singular() {
        return Err(Error::Divergent);
    }
    if m.in_log_tail() {
        let l0 = tail_log(m);
        let q = m.p_bar_sq;
        return Ok(l0 + 0.25 * q * (l0 - 1.0) + 9.0 / 64.0 * q * q * (l0 - 7.0 / 6.0));
    }
    Ok(agm(m).0)
}

/// Complete elliptic integral of the second kind E(p).
pub fn complete_e(m: &Modulus) -> f64 {
    if m.is_singular() {
        return 1.0;
    }
    if m.in_log_tail() {
        let l0 = tail_log(m);
        let q = m.p_bar_sq;
        return 1.0 + 0.5 * q * (l0 - 0.5) + 3.0 / 16.0 * q * q * (l0 - 13.0 / 12.0);
    }
    let (k, s) = agm(m);
    k * (m.p_bar_sq + m.p_sq * (0.5 - s))
}

/// B(p) = (E − p̄²K)/p², finite on the whole of [0, 1] with B(0) = π/4.
pub fn complete_b(m: &Modulus) -> f64 {
    if m.is_singular() {
        return 1.0;
    }
    if m.in_log_tail() {
        let k = complete_k(m).expect("finite in the tail");
        return (complete_e(m) - m.p_bar_sq * k) / m.p_sq;
    }
    if m.p_sq == 0.0 {
        return FRAC_PI_4;
    }
    let (k, s) = agm(m);
    k * (0.5 - s)
}

/// Carlson's symmetric integral R_F(x, y, z).
pub fn carlson_rf(x0: f64, y0: f64, z0: f64) -> f64 {
    let (mut x, mut y, mut z) = (x0, y0, z0);
    let a0 = (x + y + z) / 3.0;
    let q = (3.0 * f64::EPSILON).powf(-1.0 / 6.0)
        * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let mut a = a0;
    let mut scale = 1.0;
    for _ in 0..64 {
        if scale * q < a.abs() {
            break;
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        a = 0.25 * (a + lam);
        scale *= 0.25;
    }
    let dx = (a0 - x0) * scale / a;
    let dy = (a0 - y0) * scale / a;
    let dz = -(dx + dy);
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt()
}

/// Incomplete integral of the first kind F(λ, p) for λ ∈ [0, π/2].
pub fn incomplete_f(lambda: f64, m: &Modulus) -> Result<f64> {
    if !(0.0..=FRAC_PI_2 + 1e-15).contains(&lambda) {
        return Err(Error::domain(format!("amplitude must lie in [0, π/2], got {lambda}")));
    }
    let (s, c) = lambda.sin_cos();
    let c = c.max(0.0);
    if m.is_singular() && lambda >= FRAC_PI_2 {
        return Err(Error::Divergent);
    }
    let c2 = c * c;
    Ok(s * carlson_rf(c2, c2 + m.p_bar_sq * s * s, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Jacobi sn, cn, dn at real argument u.
pub fn jacobi(u: f64, m: &Modulus) -> Result<JacobiTriple> {
    if !u.is_finite() {
        return Err(Error::domain(format!("Jacobi argument must be finite, got {u}")));
    }
    if m.is_singular() {
        let sech = 1.0 / u.cosh();
        return Ok(JacobiTriple { sn: u.tanh(), cn: sech, dn: sech });
    }
    let k = complete_k(m)?;
    let sign = if u < 0.0 { -1.0 } else { 1.0 };
    let mut r = u.abs() % (4.0 * k);
    let mut sn_sign = sign;
    let mut cn_sign = 1.0;
    if r >= 2.0 * k {
        r -= 2.0 * k;
        sn_sign = -sn_sign;
        cn_sign = -cn_sign;
    }
    if r > k {
        r = 2.0 * k - r;
        cn_sign = -cn_sign;
    }
    let t = reduced(r, k, m);
    Ok(JacobiTriple { sn: sn_sign * t.sn, cn: cn_sign * t.cn, dn: t.dn })
}

/// u ∈ [0, K]; reflects the upper half onto [0, K/2].
fn reduced(u: f64, k: f64, m: &Modulus) -> JacobiTriple {
    if u <= 0.5 * k {
        return base(u, m);
    }
    let t = base(k - u, m);
    let pb = m.p_bar();
    JacobiTriple { sn: t.cn / t.dn, cn: pb * t.sn / t.dn, dn: pb / t.dn }
}

fn base(u: f64, m: &Modulus) -> JacobiTriple {
    if m.p_sq < NEAR_ZERO {
        let (s, c) = u.sin_cos();
        let w = 0.25 * m.p_sq * (u - s * c);
        return JacobiTriple { sn: s - w * c, cn: c + w * s, dn: 1.0 - 0.5 * m.p_sq * s * s };
    }
    if m.p_bar_sq < NEAR_ONE {
        let th = u.tanh();
        let sech = 1.0 / u.cosh();
        let sc = u.sinh() * u.cosh();
        let q = 0.25 * m.p_bar_sq;
        return JacobiTriple {
            sn: th + q * (sc - u) * sech * sech,
            cn: sech - q * (sc - u) * th * sech,
            dn: sech + q * (sc + u) * th * sech,
        };
    }
    // descending Landen
    let mut a = [0.0_f64; 32];
    let mut c = [0.0_f64; 32];
    a[0] = 1.0;
    c[0] = m.p;
    let mut b = m.p_bar();
    let mut n = 0;
    while n + 1 < a.len() {
        let a_next = 0.5 * (a[n] + b);
        let c_next = if n == 0 {
            m.p_sq / (2.0 * (1.0 + b))
        } else {
            c[n] * c[n] / (4.0 * a_next)
        };
        b = (a[n] * b).sqrt();
        n += 1;
        a[n] = a_next;
        c[n] = c_next;
        if c_next < 1e-17 * a_next {
            break;
        }
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    JacobiTriple { sn, cn, dn: (cn * cn + m.p_bar_sq * sn * sn).sqrt() }
}
