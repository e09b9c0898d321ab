//! C ABI over `metastab`.
//!
//! Objects are opaque handles created by `*_new`/`metastab_scan`/… and
//! released with the matching `*_free`. Every fallible call returns a
//! [`MetastabStatus`]; on failure the message is available through
//! [`metastab_last_error_message`] on the same thread. Panics are caught at the
//! boundary and reported as `METASTAB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use metastab::classical;
use metastab::fluctuation::{self, DeterminantForm};
use metastab::oracle::{self, OracleReport};
use metastab::rate::{self, RateCurve, RateOptions, RatePoint};
use metastab::{Error, PotentialParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetastabStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    QuantumRegimeExceeded = 3,
    Divergent = 4,
    InvalidArgument = 5,
    InsufficientPoints = 6,
    Integrator = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetastabDeterminantForm {
    Reduced = 0,
    Exact = 1,
}

impl From<MetastabDeterminantForm> for DeterminantForm {
    fn from(f: MetastabDeterminantForm) -> Self {
        match f {
            MetastabDeterminantForm::Reduced => DeterminantForm::Reduced,
            MetastabDeterminantForm::Exact => DeterminantForm::Exact,
        }
    }
}

/// Opaque potential parameters.
pub struct MetastabParams(PotentialParams);

/// Opaque rate curve.
pub struct MetastabCurve(RateCurve);

/// Opaque list of oracle reports.
pub struct MetastabReports(Vec<OracleReport>);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MetastabParamsInfo {
    pub mass_me: f64,
    pub hbar_omega: f64,
    pub a: f64,
    /// meV/Å³.
    pub gamma: f64,
    /// V(a) in meV.
    pub barrier_height: f64,
    /// (6/5)Mωa²/ħ.
    pub action_scale: f64,
    /// K.
    pub t_crit: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MetastabBounceInfo {
    pub kappa: f64,
    /// meV.
    pub energy: f64,
    pub chi: [f64; 3],
    pub p_sq: f64,
    /// ħ/meV; infinite at κ = 0.
    pub period: f64,
    /// K.
    pub t_star: f64,
    pub action_over_hbar: f64,
    /// M·N⁻²/ħ.
    pub norm_sq: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MetastabSpectrum {
    /// meV².
    pub eps_minus1: f64,
    pub eps_0: f64,
    pub eps_1: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MetastabRatePoint {
    pub t_star: f64,
    pub kappa: f64,
    pub hbar_omega: f64,
    pub action_over_hbar: f64,
    pub norm_sq: f64,
    pub det_ratio: f64,
    /// ħΓ in meV.
    pub gamma: f64,
    pub ln_gamma: f64,
    pub arrhenius: f64,
    pub underflow: bool,
}

impl From<&RatePoint> for MetastabRatePoint {
    fn from(p: &RatePoint) -> Self {
        Self {
            t_star: p.t_star,
            kappa: p.kappa,
            hbar_omega: p.hbar_omega,
            action_over_hbar: p.action_over_hbar,
            norm_sq: p.norm_sq,
            det_ratio: p.det_ratio,
            gamma: p.gamma,
            ln_gamma: p.ln_gamma,
            arrhenius: p.arrhenius,
            underflow: p.underflow,
        }
    }
}

/// Absent features are NaN with the matching `has_*` flag cleared.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MetastabCurveFeatures {
    pub has_peak: bool,
    pub t_peak: f64,
    pub gamma_peak: f64,
    pub has_arrhenius: bool,
    pub t_arrhenius: f64,
    pub has_exponent: bool,
    pub fitted_exponent: f64,
    pub warning_count: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MetastabOracleRow {
    /// NaN when the row is not tied to a κ.
    pub kappa: f64,
    pub analytic: f64,
    pub numeric: f64,
    pub discrepancy: f64,
    pub threshold: f64,
    pub converged: bool,
    pub pass: bool,
    pub gating: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> MetastabStatus {
    match e {
        Error::Domain(_) => MetastabStatus::Domain,
        Error::QuantumRegimeExceeded { .. } => MetastabStatus::QuantumRegimeExceeded,
        Error::Divergent => MetastabStatus::Divergent,
        Error::Argument(_) => MetastabStatus::InvalidArgument,
        Error::InsufficientPoints { .. } => MetastabStatus::InsufficientPoints,
        Error::Integrator(_) => MetastabStatus::Integrator,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), MetastabStatus>) -> MetastabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MetastabStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            MetastabStatus::Panic
        }
    }
}

trait IntoStatus<T> {
    fn st(self) -> Result<T, MetastabStatus>;
}

impl<T> IntoStatus<T> for metastab::Result<T> {
    fn st(self) -> Result<T, MetastabStatus> {
        self.map_err(|e| {
            set_error(e.to_string());
            status_of(&e)
        })
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, MetastabStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null pointer argument".into());
        MetastabStatus::NullPointer
    })
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), MetastabStatus> {
    if out.is_null() {
        set_error("null output pointer".into());
        return Err(MetastabStatus::NullPointer);
    }
    out.write(v);
    Ok(())
}

/// Copies `s` with a trailing NUL into `buf` (truncating to `len`) and
/// returns the length needed including the NUL.
unsafe fn copy_str(s: &str, buf: *mut c_char, len: usize) -> usize {
    let bytes = s.as_bytes();
    if !buf.is_null() && len > 0 {
        let n = bytes.len().min(len - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
    }
    bytes.len() + 1
}

/// Message of the last failed call on this thread.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn metastab_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| copy_str(&e.borrow(), buf, len))
}

/// # Safety
/// `out` must be a valid pointer; the handle is freed with [`metastab_params_free`].
#[no_mangle]
pub unsafe extern "C" fn metastab_params_new(
    mass_me: f64,
    hbar_omega_mev: f64,
    a_angstrom: f64,
    out: *mut *mut MetastabParams,
) -> MetastabStatus {
    guard(|| {
        let p = PotentialParams::new(mass_me, hbar_omega_mev, a_angstrom).st()?;
        write(out, Box::into_raw(Box::new(MetastabParams(p))))
    })
}

/// # Safety
/// `p` must be null or a handle from [`metastab_params_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn metastab_params_free(p: *mut MetastabParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_params_info(p: *const MetastabParams, out: *mut MetastabParamsInfo) -> MetastabStatus {
    guard(|| {
        let p = &deref(p)?.0;
        write(
            out,
            MetastabParamsInfo {
                mass_me: p.mass_me,
                hbar_omega: p.hbar_omega,
                a: p.a,
                gamma: p.gamma,
                barrier_height: p.barrier_height,
                action_scale: p.action_scale,
                t_crit: p.t_crit(),
            },
        )
    })
}

fn bounce_info(s: &classical::BounceState) -> MetastabBounceInfo {
    MetastabBounceInfo {
        kappa: s.kappa,
        energy: s.energy,
        chi: s.chi,
        p_sq: s.modulus.p_sq(),
        period: s.period,
        t_star: s.t_star,
        action_over_hbar: classical::classical_action(s),
        norm_sq: s.params.mw_a2() * classical::norm_integral(s),
    }
}

/// Bounce at κ ∈ [−4/27, 0].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_bounce_state(
    p: *const MetastabParams,
    kappa: f64,
    out: *mut MetastabBounceInfo,
) -> MetastabStatus {
    guard(|| {
        let s = classical::bounce_state(kappa, &deref(p)?.0).st()?;
        write(out, bounce_info(&s))
    })
}

/// Bounce whose period is ħ/(k_B T*).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_invert_temperature(
    p: *const MetastabParams,
    t_star: f64,
    out: *mut MetastabBounceInfo,
) -> MetastabStatus {
    guard(|| {
        let s = classical::invert_temperature(t_star, &deref(p)?.0).st()?;
        write(out, bounce_info(&s))
    })
}

/// x_cl(τ) in Å with the exit point at τ = 0.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_bounce_position(
    p: *const MetastabParams,
    kappa: f64,
    tau: f64,
    out: *mut f64,
) -> MetastabStatus {
    guard(|| {
        let s = classical::bounce_state(kappa, &deref(p)?.0).st()?;
        write(out, classical::bounce(tau, 0.0, &s).st()?)
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_lame_spectrum(
    p: *const MetastabParams,
    kappa: f64,
    out: *mut MetastabSpectrum,
) -> MetastabStatus {
    guard(|| {
        let s = classical::bounce_state(kappa, &deref(p)?.0).st()?;
        let sp = fluctuation::lame_spectrum(&s);
        write(out, MetastabSpectrum { eps_minus1: sp.eps_minus1, eps_0: sp.eps_0, eps_1: sp.eps_1 })
    })
}

/// ω²·Det^R[Ô]/Det[ĥ].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_det_ratio(
    p: *const MetastabParams,
    kappa: f64,
    form: MetastabDeterminantForm,
    out: *mut f64,
) -> MetastabStatus {
    guard(|| {
        let p = &deref(p)?.0;
        let s = classical::bounce_state(kappa, p).st()?;
        let d = fluctuation::determinants(&s, form.into()).st()?;
        write(out, d.ratio_omega_sq(p))
    })
}

/// ħΓ(T*) with the Arrhenius prefactor ħω/2π.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_decay_rate(
    p: *const MetastabParams,
    t_star: f64,
    form: MetastabDeterminantForm,
    out: *mut MetastabRatePoint,
) -> MetastabStatus {
    guard(|| {
        let opts = RateOptions { form: form.into(), arrhenius_prefactor: None };
        let r = rate::decay_rate(t_star, &deref(p)?.0, &opts).st()?;
        write(out, MetastabRatePoint::from(&r))
    })
}

/// Scans `temps` (or the default grid when `temps` is null or `n` is 0).
///
/// # Safety
/// `temps` must be null or point to `n` doubles; `out` must be valid. The
/// curve is freed with [`metastab_curve_free`].
#[no_mangle]
pub unsafe extern "C" fn metastab_scan(
    p: *const MetastabParams,
    temps: *const f64,
    n: usize,
    form: MetastabDeterminantForm,
    out: *mut *mut MetastabCurve,
) -> MetastabStatus {
    guard(|| {
        let p = &deref(p)?.0;
        let grid = if temps.is_null() || n == 0 {
            rate::default_grid(p)
        } else {
            std::slice::from_raw_parts(temps, n).to_vec()
        };
        let opts = RateOptions { form: form.into(), arrhenius_prefactor: None };
        let c = rate::scan(p, &grid, &opts).st()?;
        write(out, Box::into_raw(Box::new(MetastabCurve(c))))
    })
}

/// # Safety
/// `c` must be null or a handle from [`metastab_scan`], freed once.
#[no_mangle]
pub unsafe extern "C" fn metastab_curve_free(c: *mut MetastabCurve) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of points; 0 for a null handle.
///
/// # Safety
/// `c` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_curve_len(c: *const MetastabCurve) -> usize {
    c.as_ref().map_or(0, |c| c.0.points.len())
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_curve_point(
    c: *const MetastabCurve,
    i: usize,
    out: *mut MetastabRatePoint,
) -> MetastabStatus {
    guard(|| {
        let c = &deref(c)?.0;
        let Some(pt) = c.points.get(i) else {
            set_error(format!("index {i} out of range for {} points", c.points.len()));
            return Err(MetastabStatus::InvalidArgument);
        };
        write(out, MetastabRatePoint::from(pt))
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_curve_features(
    c: *const MetastabCurve,
    out: *mut MetastabCurveFeatures,
) -> MetastabStatus {
    guard(|| {
        let c = &deref(c)?.0;
        write(
            out,
            MetastabCurveFeatures {
                has_peak: c.t_peak.is_some(),
                t_peak: c.t_peak.unwrap_or(f64::NAN),
                gamma_peak: c.gamma_peak.unwrap_or(f64::NAN),
                has_arrhenius: c.t_arrhenius.is_some(),
                t_arrhenius: c.t_arrhenius.unwrap_or(f64::NAN),
                has_exponent: c.fitted_exponent.is_some(),
                fitted_exponent: c.fitted_exponent.unwrap_or(f64::NAN),
                warning_count: c.warnings.len(),
            },
        )
    })
}

/// Curve as JSON; same contract as [`metastab_last_error_message`].
///
/// # Safety
/// `c` must be valid; `buf` null or `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn metastab_curve_json(c: *const MetastabCurve, buf: *mut c_char, len: usize) -> usize {
    match c.as_ref() {
        Some(c) => copy_str(&serde_json::to_string(&c.0).unwrap_or_default(), buf, len),
        None => 0,
    }
}

/// Runs the oracle suite on the standard κ set.
///
/// # Safety
/// Pointers must be valid. The reports are freed with [`metastab_reports_free`].
#[no_mangle]
pub unsafe extern "C" fn metastab_verify(
    p: *const MetastabParams,
    rtol: f64,
    form: MetastabDeterminantForm,
    out: *mut *mut MetastabReports,
) -> MetastabStatus {
    guard(|| {
        let p = &deref(p)?.0;
        let r = oracle::run_suite(p, &oracle::STANDARD_KAPPAS, rtol, form.into());
        write(out, Box::into_raw(Box::new(MetastabReports(r))))
    })
}

/// # Safety
/// `r` must be null or a handle from [`metastab_verify`], freed once.
#[no_mangle]
pub unsafe extern "C" fn metastab_reports_free(r: *mut MetastabReports) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_reports_len(r: *const MetastabReports) -> usize {
    r.as_ref().map_or(0, |r| r.0.len())
}

/// True when every gating row passes; false for a null handle.
///
/// # Safety
/// `r` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_reports_all_pass(r: *const MetastabReports) -> bool {
    r.as_ref().is_some_and(|r| oracle::suite_passes(&r.0))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn metastab_reports_row(
    r: *const MetastabReports,
    i: usize,
    out: *mut MetastabOracleRow,
) -> MetastabStatus {
    guard(|| {
        let r = &deref(r)?.0;
        let Some(x) = r.get(i) else {
            set_error(format!("index {i} out of range for {} rows", r.len()));
            return Err(MetastabStatus::InvalidArgument);
        };
        write(
            out,
            MetastabOracleRow {
                kappa: x.kappa.unwrap_or(f64::NAN),
                analytic: x.analytic,
                numeric: x.numeric,
                discrepancy: x.discrepancy,
                threshold: x.threshold,
                converged: x.converged,
                pass: x.pass,
                gating: x.gating,
            },
        )
    })
}

/// Name of row `i`; returns 0 if out of range.
///
/// # Safety
/// `r` must be valid; `buf` null or `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn metastab_reports_quantity(
    r: *const MetastabReports,
    i: usize,
    buf: *mut c_char,
    len: usize,
) -> usize {
    match r.as_ref().and_then(|r| r.0.get(i)) {
        Some(x) => copy_str(&x.quantity, buf, len),
        None => 0,
    }
}
