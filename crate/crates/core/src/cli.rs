//! Command-line front end.
//!
//! Every subcommand produces a [`Table`] (or a list of curves / oracle
//! reports) and writes it as CSV or JSON. Parameters come from flags, then a
//! `key = value` config file, then the benchmark defaults.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::classical::{self, BounceState, KAPPA_SPHALERON};
use crate::error::{Error, Result};
use crate::fluctuation::{self, DeterminantForm};
use crate::oracle;
use crate::rate::{self, RateCurve, RateOptions};
use crate::units::PotentialParams;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::argument(format!("unknown format '{other}' (csv|json)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Lin,
    Log,
}

/// `min:max:count[:lin|log]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        if count < 2 {
            return Err(Error::argument(format!("grid needs at least 2 points, got {count}")));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::argument(format!("grid needs min < max, got {min}:{max}")));
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err(Error::argument("log grid needs min > 0"));
        }
        Ok(Self { min, max, count, spacing })
    }

    pub fn points(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Lin => rate::lin_space(self.min, self.max, self.count),
            Spacing::Log => rate::log_space(self.min, self.max, self.count),
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(Error::argument(format!("grid '{s}' is not min:max:count[:lin|log]")));
        }
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::argument(format!("bad number '{x}' in grid '{s}'")))
        };
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::argument(format!("bad count '{}' in grid '{s}'", parts[2])))?;
        let spacing = match parts.get(3).map(|x| x.trim()) {
            None | Some("lin") => Spacing::Lin,
            Some("log") => Spacing::Log,
            Some(o) => return Err(Error::argument(format!("unknown spacing '{o}' (lin|log)"))),
        };
        Self::new(num(parts[0])?, num(parts[1])?, count, spacing)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sp = match self.spacing {
            Spacing::Lin => "lin",
            Spacing::Log => "log",
        };
        write!(f, "{}:{}:{}:{sp}", self.min, self.max, self.count)
    }
}

#[derive(Debug, Parser)]
#[command(name = "metastab", version, about = "Finite-temperature decay rate in a cubic metastable potential")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// key = value file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Particle mass in electron masses.
    #[arg(long, global = true)]
    pub mass_me: Option<f64>,
    /// ħω in meV; `rate` accepts a comma-separated list.
    #[arg(long, visible_alias = "omega", global = true, value_delimiter = ',')]
    pub hbar_omega_mev: Vec<f64>,
    /// Barrier-top position in Å.
    #[arg(long, global = true)]
    pub a_angstrom: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// min:max:count[:lin|log].
    #[arg(long, global = true)]
    pub grid: Option<GridSpec>,
    /// Integrator tolerance for `verify`.
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    /// Closed form used for the regularized determinant.
    #[arg(long, global = true)]
    pub determinant: Option<DeterminantForm>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// One period of the bounce x_cl(τ).
    Bounce(BounceArgs),
    /// Temperature against |E|/V(a).
    Map,
    /// Classical action, M·N⁻²/ħ and the thermal action against T*.
    Action,
    /// ε₁/ω² and ε₋₁/ω² against |E|/V(a).
    Spectrum,
    /// ħΓ(T*) with peak, Arrhenius crossing and crossover exponent.
    Rate(RateArgs),
    /// Numerical oracle suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct BounceArgs {
    /// κ ∈ [−4/27, 0].
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["energy_ratio", "tstar"])]
    pub kappa: Option<f64>,
    /// |E|/V(a) ∈ [0, 1].
    #[arg(long, conflicts_with = "tstar")]
    pub energy_ratio: Option<f64>,
    /// Temperature in K.
    #[arg(long)]
    pub tstar: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RateArgs {
    /// Explicit temperatures in K, comma-separated; overrides --grid.
    #[arg(long, value_delimiter = ',')]
    pub temps: Vec<f64>,
    /// Report A/ħ ≤ 1 and ħΓ(T_P*)/ħω ≥ 1 on stderr.
    #[arg(long)]
    pub warn_semiclassical: bool,
    /// Arrhenius prefactor in meV (default ħω/2π).
    #[arg(long)]
    pub arrhenius_prefactor: Option<f64>,
    /// Where to write the feature summary as JSON; stderr if absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    /// κ values, comma-separated; the standard set if absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub kappas: Vec<f64>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: Vec<PotentialParams>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub grid: Option<GridSpec>,
    pub rtol: f64,
    pub determinant: DeterminantForm,
}

impl RunConfig {
    pub fn primary(&self) -> &PotentialParams {
        &self.params[0]
    }
}

/// Parses `key = value` lines. `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::argument(format!("config line {}: expected key = value", i + 1)));
        };
        let key = k.trim().replace('-', "_");
        const KEYS: [&str; 8] =
            ["mass_me", "hbar_omega_mev", "a_angstrom", "format", "out", "grid", "rtol", "determinant"];
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::argument(format!("config line {}: unknown key '{key}'", i + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn parse_num(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::argument(format!("{key}: bad number '{v}'")))
}

pub fn resolve(global: &GlobalArgs) -> Result<RunConfig> {
    let file = match &global.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::argument(format!("cannot read config {}: {e}", p.display())))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    let get_f = |key: &str, flag: Option<f64>, default: f64| -> Result<f64> {
        match (flag, file.get(key)) {
            (Some(x), _) => Ok(x),
            (None, Some(v)) => parse_num(key, v),
            (None, None) => Ok(default),
        }
    };
    let bench = PotentialParams::benchmark();
    let mass = get_f("mass_me", global.mass_me, bench.mass_me)?;
    let a = get_f("a_angstrom", global.a_angstrom, bench.a)?;
    let omegas = if !global.hbar_omega_mev.is_empty() {
        global.hbar_omega_mev.clone()
    } else if let Some(v) = file.get("hbar_omega_mev") {
        v.split(',').map(|x| parse_num("hbar_omega_mev", x.trim())).collect::<Result<_>>()?
    } else {
        vec![bench.hbar_omega]
    };
    let params = omegas
        .iter()
        .map(|&w| PotentialParams::new(mass, w, a))
        .collect::<Result<Vec<_>>>()?;
    let format = match (global.format, file.get("format")) {
        (Some(f), _) => f,
        (None, Some(v)) => v.parse()?,
        (None, None) => Format::Csv,
    };
    let grid = match (global.grid, file.get("grid")) {
        (Some(g), _) => Some(g),
        (None, Some(v)) => Some(v.parse()?),
        (None, None) => None,
    };
    let determinant = match (global.determinant, file.get("determinant")) {
        (Some(d), _) => d,
        (None, Some(v)) => v.parse()?,
        (None, None) => DeterminantForm::default(),
    };
    let rtol = get_f("rtol", global.rtol, oracle::DEFAULT_RTOL)?;
    if !(rtol > 0.0 && rtol < 1.0) {
        return Err(Error::argument(format!("rtol must lie in (0, 1), got {rtol}")));
    }
    let out = global.out.clone().or_else(|| file.get("out").map(PathBuf::from));
    Ok(RunConfig { params, format, out, grid, rtol, determinant })
}

/// C-style `%.12e`.
pub fn fmt_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // no negative zero in tables
    let x = if x == 0.0 { 0.0 } else { x };
    let s = format!("{x:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

/// A numeric table with unit-bearing column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&x| fmt_sci(x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn kappa_from_ratio(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(format!("energy ratio must lie in [0, 1], got {r}")));
    }
    Ok(KAPPA_SPHALERON * r)
}

fn state_at_temperature(t: f64, params: &PotentialParams) -> Result<BounceState> {
    if t == 0.0 {
        return classical::bounce_state(0.0, params);
    }
    classical::invert_temperature(t, params)
}

/// Samples one period starting at the exit point. At κ = 0 the period is
/// infinite and τ spans ±10/ω around the exit point instead.
pub fn cmd_bounce(args: &BounceArgs, params: &PotentialParams) -> Result<Table> {
    if args.samples < 2 {
        return Err(Error::argument("--samples must be at least 2"));
    }
    let s = match (args.kappa, args.energy_ratio, args.tstar) {
        (Some(k), None, None) => classical::bounce_state(k, params)?,
        (None, Some(r), None) => classical::bounce_state(kappa_from_ratio(r)?, params)?,
        (None, None, Some(t)) => classical::invert_temperature(t, params)?,
        (None, None, None) => return Err(Error::argument("bounce needs one of --kappa, --energy-ratio, --tstar")),
        _ => return Err(Error::argument("--kappa, --energy-ratio and --tstar are mutually exclusive")),
    };
    let (lo, hi) = if s.period.is_finite() {
        (0.0, s.period)
    } else {
        (-10.0 / params.omega(), 10.0 / params.omega())
    };
    let mut t = Table::new(&["tau_hbar_per_meV", "x_angstrom", "xdot_angstrom_meV_per_hbar"]);
    for tau in rate::lin_space(lo, hi, args.samples) {
        t.rows.push(vec![tau, classical::bounce(tau, 0.0, &s)?, classical::bounce_velocity(tau, 0.0, &s)?]);
    }
    Ok(t)
}

pub const DEFAULT_RATIO_GRID: GridSpec = GridSpec { min: 0.0, max: 1.0, count: 101, spacing: Spacing::Lin };

pub fn cmd_map(grid: Option<GridSpec>, params: &PotentialParams) -> Result<Table> {
    let mut t = Table::new(&["energy_ratio", "kappa", "T_star_K"]);
    for r in grid.unwrap_or(DEFAULT_RATIO_GRID).points() {
        let k = kappa_from_ratio(r)?;
        let s = classical::bounce_state(k, params)?;
        t.rows.push(vec![r, k, classical::temperature(&s)]);
    }
    Ok(t)
}

fn default_temperature_grid(params: &PotentialParams) -> GridSpec {
    let tc = params.t_crit();
    GridSpec { min: tc / 100.0, max: tc, count: 200, spacing: Spacing::Lin }
}

/// M·N⁻²/ħ is the dimensionless Mωa²/ħ · ∫χ̇²; the thermal action column is
/// V(a)/(k_B T*).
pub fn cmd_action(grid: Option<GridSpec>, params: &PotentialParams) -> Result<Table> {
    let mut t = Table::new(&["T_star_K", "kappa", "action_over_hbar", "norm_sq_M_over_hbar", "thermal_action_over_hbar"]);
    for ts in grid.unwrap_or_else(|| default_temperature_grid(params)).points() {
        let s = state_at_temperature(ts, params)?;
        let n2 = classical::norm_integral(&s);
        let thermal = if ts > 0.0 { classical::thermal_action(ts, params) } else { f64::INFINITY };
        t.rows.push(vec![ts, s.kappa, classical::classical_action(&s), params.mw_a2() * n2, thermal]);
    }
    Ok(t)
}

pub fn cmd_spectrum(grid: Option<GridSpec>, params: &PotentialParams) -> Result<Table> {
    let mut t = Table::new(&["energy_ratio", "kappa", "eps1_over_omega_sq", "eps_minus1_over_omega_sq"]);
    let w2 = params.omega() * params.omega();
    for r in grid.unwrap_or(DEFAULT_RATIO_GRID).points() {
        let k = kappa_from_ratio(r)?;
        let sp = fluctuation::lame_spectrum(&classical::bounce_state(k, params)?);
        t.rows.push(vec![r, k, sp.eps_1 / w2, sp.eps_minus1 / w2]);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub hbar_omega_mev: f64,
    pub t_crit_k: f64,
    pub t_peak_k: Option<f64>,
    pub hbar_gamma_peak_mev: Option<f64>,
    pub t_arrhenius_k: Option<f64>,
    pub fitted_exponent: Option<f64>,
    pub warnings: Vec<String>,
}

impl From<&RateCurve> for CurveSummary {
    fn from(c: &RateCurve) -> Self {
        Self {
            hbar_omega_mev: c.params.hbar_omega,
            t_crit_k: c.t_crit(),
            t_peak_k: c.t_peak,
            hbar_gamma_peak_mev: c.gamma_peak,
            t_arrhenius_k: c.t_arrhenius,
            fitted_exponent: c.fitted_exponent,
            warnings: c.warnings.clone(),
        }
    }
}

pub fn cmd_rate(args: &RateArgs, cfg: &RunConfig) -> Result<Vec<RateCurve>> {
    let opts = RateOptions { form: cfg.determinant, arrhenius_prefactor: args.arrhenius_prefactor };
    cfg.params
        .iter()
        .map(|p| {
            let grid = if !args.temps.is_empty() {
                args.temps.clone()
            } else if let Some(g) = cfg.grid {
                g.points()
            } else {
                rate::default_grid(p)
            };
            rate::scan(p, &grid, &opts)
        })
        .collect()
}

pub const RATE_COLUMNS: [&str; 9] = [
    "hbar_omega_meV",
    "T_star_K",
    "kappa",
    "action_over_hbar",
    "norm_sq_M_over_hbar",
    "det_ratio_omega_sq",
    "hbar_Gamma_meV",
    "ln_hbar_Gamma_meV",
    "arrhenius_meV",
];

pub fn rate_table(curves: &[RateCurve]) -> Table {
    let mut t = Table::new(&RATE_COLUMNS);
    for c in curves {
        for p in &c.points {
            t.rows.push(vec![
                p.hbar_omega,
                p.t_star,
                p.kappa,
                p.action_over_hbar,
                p.norm_sq,
                p.det_ratio,
                p.gamma,
                p.ln_gamma,
                p.arrhenius,
            ]);
        }
    }
    t
}

pub fn cmd_verify(args: &VerifyArgs, cfg: &RunConfig) -> Vec<oracle::OracleReport> {
    let kappas = if args.kappas.is_empty() { oracle::STANDARD_KAPPAS.to_vec() } else { args.kappas.clone() };
    oracle::run_suite(cfg.primary(), &kappas, cfg.rtol, cfg.determinant)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) => EXIT_USAGE,
        _ => EXIT_DOMAIN,
    }
}

fn emit(cfg: &RunConfig, body: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(p) => write_file(p, body),
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|e| Error::argument(format!("cannot write output: {e}"))),
    }
}

fn write_file(p: &Path, body: &str) -> Result<()> {
    std::fs::write(p, body).map_err(|e| Error::argument(format!("cannot write {}: {e}", p.display())))
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn table_body(t: &Table, f: Format) -> String {
    match f {
        Format::Csv => t.to_csv(),
        Format::Json => to_json(t),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let cfg = resolve(&cli.global)?;
    if cfg.params.len() > 1 && !matches!(cli.command, Command::Rate(_)) {
        return Err(Error::argument("only `rate` accepts several --hbar-omega-mev values"));
    }
    let p = *cfg.primary();
    match &cli.command {
        Command::Bounce(a) => emit(&cfg, &table_body(&cmd_bounce(a, &p)?, cfg.format), stdout)?,
        Command::Map => emit(&cfg, &table_body(&cmd_map(cfg.grid, &p)?, cfg.format), stdout)?,
        Command::Action => emit(&cfg, &table_body(&cmd_action(cfg.grid, &p)?, cfg.format), stdout)?,
        Command::Spectrum => emit(&cfg, &table_body(&cmd_spectrum(cfg.grid, &p)?, cfg.format), stdout)?,
        Command::Rate(a) => {
            let curves = cmd_rate(a, &cfg)?;
            let body = match cfg.format {
                Format::Csv => rate_table(&curves).to_csv(),
                Format::Json => to_json(&curves),
            };
            emit(&cfg, &body, stdout)?;
            let summary: Vec<CurveSummary> = curves.iter().map(CurveSummary::from).collect();
            match &a.summary {
                Some(path) => write_file(path, &to_json(&summary))?,
                None if cfg.format == Format::Csv => {
                    let _ = stderr.write_all(to_json(&summary).as_bytes());
                }
                None => {}
            }
            if a.warn_semiclassical {
                for s in &summary {
                    for w in &s.warnings {
                        let _ = writeln!(stderr, "warning: ħω = {} meV: {w}", s.hbar_omega_mev);
                    }
                }
            }
        }
        Command::Verify(a) => {
            let reports = cmd_verify(a, &cfg);
            let body = match cfg.format {
                Format::Json => to_json(&reports),
                Format::Csv => verify_table(&reports),
            };
            emit(&cfg, &body, stdout)?;
            if !oracle::suite_passes(&reports) {
                for r in reports.iter().filter(|r| r.gating && !r.pass) {
                    let _ = writeln!(
                        stderr,
                        "FAIL {}{}: discrepancy {:.3e} > {:.0e}{}",
                        r.quantity,
                        r.kappa.map(|k| format!(" at κ = {k:.6}")).unwrap_or_default(),
                        r.discrepancy,
                        r.threshold,
                        r.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
                    );
                }
                return Ok(EXIT_VERIFY);
            }
        }
    }
    Ok(EXIT_OK)
}

fn verify_table(reports: &[oracle::OracleReport]) -> String {
    let mut s = String::from("quantity,kappa,analytic,numeric,discrepancy,threshold,converged,pass,gating\n");
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.quantity,
            r.kappa.map(fmt_sci).unwrap_or_default(),
            fmt_sci(r.analytic),
            fmt_sci(r.numeric),
            fmt_sci(r.discrepancy),
            fmt_sci(r.threshold),
            r.converged,
            r.pass,
            r.gating
        ));
    }
    s
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run() -> i32 {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run_with(std::env::args_os(), &mut out, &mut err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut o = Vec::new();
        let mut e = Vec::new();
        let argv = std::iter::once("metastab").chain(args.iter().copied());
        let code = run_with(argv, &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn sci_format_matches_printf() {
        assert_eq!(fmt_sci(36.938), "3.693800000000e+01");
        assert_eq!(fmt_sci(-1.0 / 60.0), "-1.666666666667e-02");
        assert_eq!(fmt_sci(0.0), "0.000000000000e+00");
        assert_eq!(fmt_sci(1e-300), "1.000000000000e-300");
        assert_eq!(fmt_sci(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn grid_spec_parsing() {
        let g: GridSpec = "1:2:5".parse().unwrap();
        assert_eq!(g.spacing, Spacing::Lin);
        assert_eq!(g.points(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        let g: GridSpec = "1:100:3:log".parse().unwrap();
        assert!((g.points()[1] - 10.0).abs() < 1e-12);
        for bad in ["1:2", "2:1:5", "1:2:1", "0:1:5:log", "1:2:5:cubic", "a:2:5"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
        assert_eq!(g.to_string().parse::<GridSpec>().unwrap(), g);
    }

    #[test]
    fn config_parsing() {
        let m = parse_config("# c\nmass_me = 1000 # trailing\n\nhbar-omega-mev=10,20\n").unwrap();
        assert_eq!(m["mass_me"], "1000");
        assert_eq!(m["hbar_omega_mev"], "10,20");
        assert!(parse_config("bogus = 1").is_err());
        assert!(parse_config("mass_me 1").is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "hbar_omega_mev = 10\nmass_me = 2000\nformat = json\n").unwrap();
        let g = GlobalArgs { config: Some(path), hbar_omega_mev: vec![20.0], ..Default::default() };
        let cfg = resolve(&g).unwrap();
        assert_eq!(cfg.primary().hbar_omega, 20.0);
        assert_eq!(cfg.primary().mass_me, 2000.0);
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn bounce_at_sphaleron_is_constant() {
        let (code, out, _) = run_capture(&["bounce", "--kappa", "-0.148148148148148"]);
        assert_eq!(code, 0);
        for line in out.lines().skip(1) {
            let x: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert!((x - 1.0).abs() < 1e-6, "{line}");
        }
    }

    #[test]
    fn bounce_at_zero_energy_is_sech_squared() {
        let p = PotentialParams::benchmark();
        let a = BounceArgs { kappa: Some(0.0), energy_ratio: None, tstar: None, samples: 41 };
        let t = cmd_bounce(&a, &p).unwrap();
        for r in &t.rows {
            let c = (0.5 * p.omega() * r[0]).cosh();
            assert!((r[1] - 1.5 / (c * c)).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn bounce_from_temperature_round_trips() {
        let p = PotentialParams::benchmark();
        let a = BounceArgs { kappa: None, energy_ratio: None, tstar: Some(18.0), samples: 11 };
        let t = cmd_bounce(&a, &p).unwrap();
        let tau = t.column("tau_hbar_per_meV").unwrap();
        let period = tau.last().unwrap();
        let temp = 1.0 / (crate::units::BOLTZMANN_MEV_PER_K * period);
        assert!((temp / 18.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn conflicting_state_flags_are_usage_errors() {
        let (code, _, err) = run_capture(&["bounce", "--kappa", "-0.05", "--tstar", "10"]);
        assert_eq!(code, EXIT_USAGE, "{err}");
        let (code, _, _) = run_capture(&["bounce"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn domain_errors_exit_2() {
        let (code, _, _) = run_capture(&["bounce", "--kappa", "0.1"]);
        assert_eq!(code, EXIT_DOMAIN);
        let (code, _, _) = run_capture(&["rate", "--temps", "50"]);
        assert_eq!(code, EXIT_DOMAIN);
        let (code, _, _) = run_capture(&["map", "--mass-me=-1"]);
        assert_eq!(code, EXIT_DOMAIN);
    }

    #[test]
    fn map_ends_at_crossover() {
        let t = cmd_map(None, &PotentialParams::benchmark()).unwrap();
        let ts = t.column("T_star_K").unwrap();
        assert_eq!(ts[0], 0.0);
        assert!((ts.last().unwrap() - 36.938).abs() < 2e-3);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn map_midpoint_matches_period_quadrature() {
        let p = PotentialParams::benchmark();
        let g = GridSpec::new(0.0, 1.0, 3, Spacing::Lin).unwrap();
        let t = cmd_map(Some(g), &p).unwrap();
        let r = oracle::period_quadrature(t.rows[1][1], &p).unwrap();
        let temp = 1.0 / (crate::units::BOLTZMANN_MEV_PER_K * r.numeric);
        assert!((t.rows[1][2] / temp - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spectrum_endpoints() {
        let t = cmd_spectrum(None, &PotentialParams::benchmark()).unwrap();
        let first = &t.rows[0];
        let last = t.rows.last().unwrap();
        assert!((first[2] - 0.75).abs() < 1e-12 && (first[3] + 1.25).abs() < 1e-12);
        assert!(last[2].abs() < 1e-12 && (last[3] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn action_columns() {
        let p = PotentialParams::benchmark();
        let t = cmd_action(None, &p).unwrap();
        let a = t.column("action_over_hbar").unwrap();
        assert!((a[0] / p.action_scale - 1.0).abs() < 1e-6);
        // flat to machine precision on the low-temperature plateau
        assert!(a.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-13)));
        assert!(a.last().unwrap() < &a[0]);
        assert_eq!(*t.column("norm_sq_M_over_hbar").unwrap().last().unwrap(), 0.0);
    }

    #[test]
    fn single_point_rate_matches_decay_rate() {
        let (code, out, _) = run_capture(&["rate", "--temps", "18", "--format", "json"]);
        assert_eq!(code, 0);
        let curves: Vec<RateCurve> = serde_json::from_str(&out).unwrap();
        let p = rate::decay_rate(18.0, &PotentialParams::benchmark(), &RateOptions::default()).unwrap();
        assert_eq!(curves[0].points, vec![p]);
    }

    #[test]
    fn several_omegas_only_for_rate() {
        let (code, _, _) = run_capture(&["map", "--hbar-omega-mev", "10,20"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn csv_is_byte_stable() {
        let a = run_capture(&["spectrum", "--grid", "0:1:7"]).1;
        let b = run_capture(&["spectrum", "--grid", "0:1:7"]).1;
        assert_eq!(a, b);
        assert!(a.starts_with("energy_ratio,kappa,eps1_over_omega_sq,eps_minus1_over_omega_sq\n"));
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run_capture(&["--help"]).0, 0);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
    }
}
