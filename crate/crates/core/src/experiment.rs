//! Viscosity sweeps driven by a JSON configuration: sampled error fields,
//! `errors.csv` / `rates.json` summaries, acceptance gates and profile
//! tables. Every grid is fixed by the configuration, so reruns reproduce
//! their output byte for byte.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::approx::{
    cutoff_theta, residual_closed_form, residual_e_with_steps, residual_steps, u_app, u_app_parts, ApproxConfig,
};
use crate::data::{builtin_datum, inverse_on_window, normalize_gauge, InitialDatum, RawDatum, TableDatum};
use crate::error::{Error, Result};
use crate::inner::{inner_state, quartic_laplace, QuarticLaplaceIntegrand};
use crate::inviscid::{entropy_solution, entropy_state};
use crate::metrics::{
    fit_log_corrected, fit_rate, fmt_float, grid_norm, holder_seminorm_field, FieldSample, NormKind, Window,
};
use crate::outer::{u10_closed_form, u1_exact};
use crate::profile::eval_profile;
use crate::viscous::{colehopf_point, fv_colehopf_gap, min_half_width, reference_fv, FvConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormName {
    Linf,
    L1,
    L2,
    Holder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_halfwidth")]
    pub x_halfwidth: f64,
    #[serde(default = "default_points")]
    pub x_points: usize,
    #[serde(default = "default_slices")]
    pub t_slices: usize,
    /// Geometric points per octave in the cluster around `x = 0`.
    #[serde(default = "default_octave")]
    pub cluster_per_octave: usize,
}

fn default_halfwidth() -> f64 {
    6.0
}
fn default_points() -> usize {
    481
}
fn default_slices() -> usize {
    48
}
fn default_octave() -> usize {
    32
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            x_halfwidth: default_halfwidth(),
            x_points: default_points(),
            t_slices: default_slices(),
            cluster_per_octave: default_octave(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_eps_t")]
    pub eps_t: f64,
}

fn default_quad_tol() -> f64 {
    1e-10
}
fn default_eps_t() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { quad_tol: default_quad_tol(), eps_t: default_eps_t() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesConfig {
    pub fields: Vec<String>,
    /// Defaults to the first sweep viscosity.
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub xs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Built-in datum name, or a path to a two-column `x,u` CSV table.
    pub datum: String,
    #[serde(rename = "K", default)]
    pub k: u8,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub nus: Vec<f64>,
    #[serde(default = "default_norms")]
    pub norms: Vec<NormName>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Documentation only: nothing here is random.
    #[serde(default)]
    pub seed_irrelevant: Option<bool>,
    #[serde(default)]
    pub profiles: Option<ProfilesConfig>,
}

fn default_alpha() -> f64 {
    0.2
}
fn default_norms() -> Vec<NormName> {
    vec![NormName::Linf]
}

fn config_error(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nus.is_empty() {
            return Err(config_error("nus", "must list at least one viscosity"));
        }
        for (i, &nu) in self.nus.iter().enumerate() {
            if !(crate::viscous::MIN_NU..1.0).contains(&nu) {
                return Err(config_error(&format!("nus[{i}]"), format!("{nu} outside [1e-7, 1)")));
            }
        }
        if self.k > 1 {
            return Err(config_error("K", format!("{} not supported (0 or 1)", self.k)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(config_error("alpha", format!("{} outside (0, 1)", self.alpha)));
        }
        if self.norms.is_empty() {
            return Err(config_error("norms", "must list at least one norm"));
        }
        let g = &self.grid;
        if !(g.x_halfwidth > 0.0 && g.x_halfwidth.is_finite()) {
            return Err(config_error("grid.x_halfwidth", "must be positive"));
        }
        if g.x_points < 3 {
            return Err(config_error("grid.x_points", "must be at least 3"));
        }
        if g.t_slices < 2 {
            return Err(config_error("grid.t_slices", "must be at least 2"));
        }
        if g.cluster_per_octave == 0 {
            return Err(config_error("grid.cluster_per_octave", "must be positive"));
        }
        let tol = &self.tolerances;
        if !(1e-14..=1e-6).contains(&tol.quad_tol) {
            return Err(config_error("tolerances.quad_tol", format!("{} outside [1e-14, 1e-6]", tol.quad_tol)));
        }
        if !(tol.eps_t > 0.0 && tol.eps_t < 0.5) {
            return Err(config_error("tolerances.eps_t", format!("{} outside (0, 0.5)", tol.eps_t)));
        }
        if self.seed_irrelevant == Some(false) {
            return Err(config_error("seed_irrelevant", "must be true when given; runs are deterministic"));
        }
        if let Some(p) = &self.profiles {
            if p.fields.is_empty() {
                return Err(config_error("profiles.fields", "must list at least one field"));
            }
            for (i, f) in p.fields.iter().enumerate() {
                let field = ProfileField::parse(f).map_err(|_| {
                    config_error(&format!("profiles.fields[{i}]"), format!("unknown field '{f}'"))
                })?;
                if field == ProfileField::Residual && self.k != 0 {
                    return Err(config_error(&format!("profiles.fields[{i}]"), "E is only available for K = 0"));
                }
            }
            if let Some(nu) = p.nu {
                if !(crate::viscous::MIN_NU..1.0).contains(&nu) {
                    return Err(config_error("profiles.nu", format!("{nu} outside [1e-7, 1)")));
                }
            }
            for (name, list) in [("profiles.times", &p.times), ("profiles.xs", &p.xs)] {
                if matches!(list, Some(v) if v.is_empty() || v.iter().any(|a| !a.is_finite())) {
                    return Err(config_error(name, "must be a non-empty list of finite numbers"));
                }
            }
        }
        Ok(())
    }

    pub fn approx_config(&self, nu: f64) -> Result<ApproxConfig> {
        ApproxConfig { nu, k: self.k, alpha: self.alpha, eps_t: self.tolerances.eps_t, quad_tol: self.tolerances.quad_tol }
            .validated()
    }
}

/// Built-in datum name or CSV table path, in the normal frame.
pub fn resolve_datum(spec: &str) -> Result<InitialDatum> {
    let raw: Arc<dyn RawDatum> = if spec.ends_with(".csv") {
        Arc::new(TableDatum::from_csv(Path::new(spec)).map_err(|e| config_error("datum", e))?)
    } else {
        builtin_datum(spec).map_err(|e| config_error("datum", e))?
    };
    normalize_gauge(raw)
}

/// `t0` followed by a geometric ladder in `|t|` ending at `-eps_t`.
pub fn time_ladder(t0: f64, eps_t: f64, slices: usize) -> Vec<f64> {
    let n = slices.max(2);
    let ratio = eps_t / t0.abs();
    (0..n).map(|j| -t0.abs() * ratio.powf(j as f64 / (n - 1) as f64)).collect()
}

/// `{0}`, `+-nu^{3/4} 2^{j/q}` out to the half-width, and a uniform grid.
pub fn spatial_grid(nu: f64, grid: &GridConfig) -> Vec<f64> {
    let h = grid.x_halfwidth;
    let mut xs: Vec<f64> =
        (0..grid.x_points).map(|i| -h + 2.0 * h * i as f64 / (grid.x_points - 1) as f64).collect();
    xs.push(0.0);
    let base = nu.powf(0.75);
    let q = grid.cluster_per_octave as f64;
    let mut j = 0;
    loop {
        let r = base * (j as f64 / q).exp2();
        if r >= h {
            break;
        }
        xs.push(r);
        xs.push(-r);
        j += 1;
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * h);
    xs
}

/// Sampled fields for one viscosity: `u^nu`, `u^nu - u0` and
/// `u^nu - u_app` on the configured grid.
#[derive(Debug, Clone)]
pub struct SweepSample {
    pub nu: f64,
    pub u_nu: FieldSample,
    pub dev_inviscid: FieldSample,
    pub dev_app: FieldSample,
}

fn sample_point(d: &InitialDatum, cfg: &ApproxConfig, t: f64, x: f64) -> Result<[f64; 3]> {
    let u0 = entropy_solution(d, t, x)?;
    let app = u_app(cfg, d, t, x)?;
    if t <= d.t0() {
        return Ok([u0, 0.0, u0 - app]);
    }
    let dev = colehopf_point(d, cfg.nu, t, x, cfg.quad_tol)?.deviation;
    let u_nu = u0 + dev;
    Ok([u_nu, dev, u_nu - app])
}

pub fn sample_sweep_point(cfg: &SweepConfig, d: &InitialDatum, nu: f64) -> Result<SweepSample> {
    let app = cfg.approx_config(nu)?;
    let times = time_ladder(d.t0(), cfg.tolerances.eps_t, cfg.grid.t_slices);
    let xs = spatial_grid(nu, &cfg.grid);
    let nx = xs.len();
    let vals: Result<Vec<[f64; 3]>> =
        (0..times.len() * nx).into_par_iter().map(|k| sample_point(d, &app, times[k / nx], xs[k % nx])).collect();
    let vals = vals?;
    let pick = |i: usize| vals.iter().map(|v| v[i]).collect::<Vec<f64>>();
    Ok(SweepSample {
        nu,
        u_nu: FieldSample::new("u_nu", times.clone(), xs.clone(), pick(0))?,
        dev_inviscid: FieldSample::new("u_nu - u0", times.clone(), xs.clone(), pick(1))?,
        dev_app: FieldSample::new("u_nu - u_app", times, xs, pick(2))?,
    })
}

/// Column names produced by `norms`, in order.
pub fn error_keys(norms: &[NormName]) -> Vec<String> {
    let mut keys = Vec::new();
    for n in norms {
        let names: &[&str] = match n {
            NormName::Linf => &["linf", "linf_app"],
            NormName::L1 => &["l1", "l1_app"],
            NormName::L2 => &["l2", "l2_app"],
            NormName::Holder => &["holder_app", "holder_nu"],
        };
        for k in names {
            if !keys.iter().any(|e| e == k) {
                keys.push(k.to_string());
            }
        }
    }
    keys
}

/// Exponent of the Hölder seminorms reported by sweeps.
pub const HOLDER_EXPONENT: f64 = 0.5;

pub fn measure(sample: &SweepSample, key: &str) -> Result<f64> {
    let all = Window::everything();
    match key {
        "linf" => grid_norm(&sample.dev_inviscid, NormKind::Linf, &all),
        "linf_app" => grid_norm(&sample.dev_app, NormKind::Linf, &all),
        "l1" => grid_norm(&sample.dev_inviscid, NormKind::L1, &all),
        "l1_app" => grid_norm(&sample.dev_app, NormKind::L1, &all),
        "l2" => grid_norm(&sample.dev_inviscid, NormKind::L2, &all),
        "l2_app" => grid_norm(&sample.dev_app, NormKind::L2, &all),
        "holder_app" => holder_seminorm_field(&sample.dev_app, HOLDER_EXPONENT, &all),
        "holder_nu" => holder_seminorm_field(&sample.u_nu, HOLDER_EXPONENT, &all),
        other => Err(Error::InvalidArgument(format!("unknown error key '{other}'"))),
    }
}

/// One row per viscosity, in configuration order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub keys: Vec<String>,
    pub rows: Vec<(f64, Vec<f64>)>,
}

impl SweepTable {
    pub fn column(&self, key: &str) -> Option<Vec<(f64, f64)>> {
        let i = self.keys.iter().position(|k| k == key)?;
        Some(self.rows.iter().map(|(nu, v)| (*nu, v[i])).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["nu".to_string()];
        header.extend(self.keys.iter().cloned());
        out.write_record(&header)?;
        for (nu, vals) in &self.rows {
            let mut rec = vec![fmt_float(*nu)];
            rec.extend(vals.iter().map(|v| fmt_float(*v)));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.get(0) != Some("nu") {
            return Err(Error::Config("errors table must start with a 'nu' column".into()));
        }
        let keys: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| Error::Config(format!("errors table row {}: {e}", line + 2)))
            };
            let nu = parse(rec.get(0).unwrap_or(""))?;
            let vals: Result<Vec<f64>> = rec.iter().skip(1).map(parse).collect();
            rows.push((nu, vals?));
        }
        Ok(SweepTable { keys, rows })
    }
}

/// Samples and measures every viscosity of the sweep.
pub fn run_sweep(cfg: &SweepConfig, d: &InitialDatum) -> Result<SweepTable> {
    let keys = error_keys(&cfg.norms);
    let mut rows = Vec::with_capacity(cfg.nus.len());
    for &nu in &cfg.nus {
        let sample = sample_sweep_point(cfg, d, nu)?;
        let vals: Result<Vec<f64>> = keys.iter().map(|k| measure(&sample, k)).collect();
        rows.push((nu, vals?));
    }
    Ok(SweepTable { keys, rows })
}

/// Rate fits for every column; the `L1` columns also get the
/// `A nu ln(1/nu)` model. Fits that cannot be formed are `null`.
pub fn rates_summary(table: &SweepTable) -> Value {
    let mut rates = Map::new();
    for key in &table.keys {
        let col = table.column(key).unwrap_or_default();
        let fit = fit_rate(&col).ok().and_then(|f| serde_json::to_value(f).ok()).unwrap_or(Value::Null);
        rates.insert(key.clone(), fit);
        if key.starts_with("l1") {
            let lc = fit_log_corrected(&col).ok().and_then(|f| serde_json::to_value(f).ok()).unwrap_or(Value::Null);
            rates.insert(format!("{key}_log_corrected"), lc);
        }
    }
    let mut root = Map::new();
    root.insert("nus".into(), Value::from(table.rows.iter().map(|r| r.0).collect::<Vec<f64>>()));
    root.insert("rates".into(), Value::Object(rates));
    Value::Object(root)
}

/// `path in [lo, hi]` over a dotted JSON path.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub path: Vec<String>,
    pub lo: f64,
    pub hi: f64,
}

impl Gate {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("gate '{text}': expected 'path in [lo, hi]'"));
        let (path, range) = text.split_once(" in ").ok_or_else(bad)?;
        let range = range.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
        let (lo, hi) = range.split_once(',').ok_or_else(bad)?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let (lo, hi) = (num(lo)?, num(hi)?);
        let path: Vec<String> = path.trim().split('.').map(str::to_string).collect();
        if path.iter().any(String::is_empty) || !(lo <= hi) {
            return Err(bad());
        }
        Ok(Gate { path, lo, hi })
    }

    /// The looked-up value and whether it lies in the closed range.
    pub fn check(&self, summary: &Value) -> Result<(f64, bool)> {
        let mut v = summary;
        for seg in &self.path {
            v = match v {
                Value::Object(m) => m.get(seg),
                Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get(i)),
                _ => None,
            }
            .ok_or_else(|| Error::Config(format!("gate path '{}' not found", self.path.join("."))))?;
        }
        let x = v.as_f64().ok_or_else(|| Error::Config(format!("gate path '{}' is not a number", self.path.join("."))))?;
        Ok((x, x >= self.lo && x <= self.hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileField {
    Inviscid,
    Viscous,
    Approx,
    InnerU0,
    Theta,
    Residual,
    Corrector,
    CorrectorLead,
}

impl ProfileField {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "u0" => ProfileField::Inviscid,
            "u_nu" => ProfileField::Viscous,
            "u_app" => ProfileField::Approx,
            "U0" => ProfileField::InnerU0,
            "theta" => ProfileField::Theta,
            "E" => ProfileField::Residual,
            "u1" => ProfileField::Corrector,
            "u10" => ProfileField::CorrectorLead,
            other => return Err(Error::Config(format!("unknown profile field '{other}'"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ProfileField::Inviscid => "u0",
            ProfileField::Viscous => "u_nu",
            ProfileField::Approx => "u_app",
            ProfileField::InnerU0 => "U0",
            ProfileField::Theta => "theta",
            ProfileField::Residual => "E",
            ProfileField::Corrector => "u1",
            ProfileField::CorrectorLead => "u10",
        }
    }
}

fn roundoff(v: f64) -> f64 {
    16.0 * f64::EPSILON * v.abs().max(1.0)
}

/// Value and estimated absolute error of one profile entry. `U0` reads
/// `(t, x)` as inner coordinates `(T, X)`.
pub fn profile_value(field: ProfileField, cfg: &ApproxConfig, d: &InitialDatum, t: f64, x: f64) -> Result<(f64, f64)> {
    let q = cfg.nu.sqrt().sqrt();
    match field {
        ProfileField::Inviscid => entropy_solution(d, t, x).map(|v| (v, roundoff(v))),
        ProfileField::Viscous => {
            if t <= d.t0() {
                let v = entropy_solution(d, t, x)?;
                return Ok((v, roundoff(v)));
            }
            let p = colehopf_point(d, cfg.nu, t, x, cfg.quad_tol)?;
            let v = entropy_solution(d, t, x)? + p.deviation;
            Ok((v, cfg.quad_tol * v.abs().max(q) + roundoff(v)))
        }
        ProfileField::Approx => {
            let parts = u_app_parts(cfg, d, t, x)?;
            let tol = if parts.theta > 0.0 { cfg.quad_tol * parts.value.abs().max(q) } else { 0.0 };
            Ok((parts.value, tol + roundoff(parts.value)))
        }
        ProfileField::InnerU0 => {
            let v = inner_state(&d.profile_params(), t, x, cfg.quad_tol)?.u;
            Ok((v, cfg.quad_tol * v.abs().max(1.0)))
        }
        ProfileField::Theta => cutoff_theta(cfg, d, t, x).map(|v| (v, roundoff(v))),
        ProfileField::Corrector => u1_exact(d, t, x).map(|v| (v, 1e3 * roundoff(v))),
        ProfileField::CorrectorLead => u10_closed_form(&d.profile_params(), t, x).map(|v| (v, roundoff(v))),
        ProfileField::Residual => residual_with_tolerance(cfg, d, t, x),
    }
}

/// `E` with a tolerance made of a Richardson estimate (steps `h`, `2h`)
/// and the propagated evaluation error of `u_app`.
pub fn residual_with_tolerance(cfg: &ApproxConfig, d: &InitialDatum, t: f64, x: f64) -> Result<(f64, f64)> {
    let (ht, hx) = residual_steps(d, t, x)?;
    let fine = residual_e_with_steps(cfg, d, t, x, ht, hx)?;
    let coarse = residual_e_with_steps(cfg, d, t, x, 2.0 * ht, 2.0 * hx)?;
    let parts = u_app_parts(cfg, d, t, x)?;
    let u = parts.value;
    let q = cfg.nu.sqrt().sqrt();
    let eps = if parts.theta > 0.0 { cfg.quad_tol * u.abs().max(q) } else { 0.0 } + roundoff(u);
    let rounding = eps * (1.5 / ht + 1.5 * u.abs() / hx + 5.5 * cfg.nu / (hx * hx));
    Ok((fine, (fine - coarse).abs() + 4.0 * rounding))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub t: f64,
    pub x: f64,
    pub field: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

/// Profile table for the configured fields, rows ordered by field, `t`, `x`.
/// Points outside a field's domain of definition get `NaN`.
pub fn profile_rows(cfg: &SweepConfig, d: &InitialDatum) -> Result<Vec<ProfileRow>> {
    let p = cfg.profiles.as_ref().ok_or_else(|| config_error("profiles", "missing from configuration"))?;
    let nu = p.nu.unwrap_or(cfg.nus[0]);
    let app = cfg.approx_config(nu)?;
    let times = p.times.clone().unwrap_or_else(|| time_ladder(d.t0(), cfg.tolerances.eps_t, cfg.grid.t_slices));
    let xs = p.xs.clone().unwrap_or_else(|| spatial_grid(nu, &cfg.grid));
    let mut rows = Vec::new();
    for name in &p.fields {
        let field = ProfileField::parse(name)?;
        let pts: Vec<(f64, f64)> = times.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect();
        let vals: Result<Vec<(f64, f64)>> = pts
            .par_iter()
            .map(|&(t, x)| match profile_value(field, &app, d, t, x) {
                Err(Error::InvalidArgument(_) | Error::CharacteristicsCrossed(_)) => Ok((f64::NAN, f64::NAN)),
                other => other,
            })
            .collect();
        for ((t, x), (value, tolerance)) in pts.into_iter().zip(vals?) {
            rows.push(ProfileRow { t, x, field: field.name(), value, tolerance });
        }
    }
    Ok(rows)
}

/// CSV with columns `t,x,field,value,tolerance`.
pub fn write_profiles<W: Write>(rows: &[ProfileRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "x", "field", "value", "tolerance"])?;
    for r in rows {
        out.write_record([fmt_float(r.t), fmt_float(r.x), r.field.to_string(), fmt_float(r.value), fmt_float(r.tolerance)])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, run: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    match run() {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome { name, passed: false, detail: e.to_string() },
    }
}

/// Fast invariant suite on the odd Gaussian datum.
pub fn selftest() -> Vec<CheckOutcome> {
    let d = match resolve_datum("gaussian-odd") {
        Ok(d) => d,
        Err(e) => return vec![CheckOutcome { name: "datum", passed: false, detail: e.to_string() }],
    };
    let d = &d;
    let p = d.profile_params();
    vec![
        outcome("profile homogeneity", || {
            let mut worst = 0.0f64;
            for &(t, x) in &[(-0.3, 0.2), (-1.0, -2.0), (-0.01, 0.5)] {
                let a = eval_profile(&p, t, x)?;
                let lam = 1.7f64;
                let b = eval_profile(&p, lam * lam * t, lam.powi(3) * x)?;
                worst = worst.max(((b.u - lam * a.u) / a.u).abs()).max(((b.m * lam * lam - a.m) / a.m).abs());
            }
            Ok((worst <= 1e-11, format!("max relative defect {worst:.2e}")))
        }),
        outcome("hodograph roundtrip", || {
            let mut worst = 0.0f64;
            for i in 0..=20 {
                let y = d.window() * (-0.95 + 0.095 * i as f64);
                worst = worst.max((d.value(inverse_on_window(d, y)?) - y).abs());
            }
            Ok((worst <= 1e-10, format!("max defect {worst:.2e}")))
        }),
        outcome("steepest slope is 1/|t|", || {
            let mut worst = 0.0f64;
            for &t in &[-0.9, -0.1, -1e-3] {
                let at_origin = entropy_state(d, t, 0.0)?.ux;
                worst = worst.max((at_origin * t.abs() + 1.0).abs());
                for i in 0..=40 {
                    let x = -2.0 + 0.1 * i as f64;
                    if entropy_state(d, t, x)?.ux.abs() > 1.0 / t.abs() * (1.0 + 1e-12) {
                        return Ok((false, format!("slope exceeds 1/|t| at ({t}, {x})")));
                    }
                }
            }
            Ok((worst <= 1e-12, format!("defect at the origin {worst:.2e}")))
        }),
        outcome("corrector vanishes initially", || {
            let worst = (0..=40).map(|i| u1_exact(d, d.t0(), -4.0 + 0.2 * i as f64)).try_fold(0.0f64, |m, v| v.map(|v| m.max(v.abs())))?;
            Ok((worst <= 1e-9, format!("max |u1(t0)| {worst:.2e}")))
        }),
        outcome("residual closed forms", || {
            let cfg = ApproxConfig { quad_tol: 1e-13, ..ApproxConfig::new(1e-4, 0)? };
            let mut worst = 0.0f64;
            for &(t, x) in &[(-0.5, 0.3), (-0.2, -0.9)] {
                let exact = residual_closed_form(&cfg, d, t, x)?.unwrap_or(f64::NAN);
                let (fd, _) = residual_with_tolerance(&cfg, d, t, x)?;
                worst = worst.max(((fd - exact) / exact).abs());
            }
            Ok((worst <= 1e-6, format!("max relative gap {worst:.2e}")))
        }),
        outcome("quartic integral against Gamma(1/4)", || {
            let v = quartic_laplace(&QuarticLaplaceIntegrand { t: 0.0, x: 0.0, beta3: 1.0, moment: 0 }, 1e-13)?.value();
            let exact = statrs::function::gamma::gamma(0.25) / (2.0 * 0.125f64.powf(0.25));
            let rel = ((v - exact) / exact).abs();
            Ok((rel <= 1e-12, format!("relative gap {rel:.2e}")))
        }),
        outcome("viscous solution is odd and bounded", || {
            let (lo, hi) = d.range();
            let mut worst = 0.0f64;
            for i in 1..=10 {
                let x = 0.3 * i as f64;
                let a = colehopf_point(d, 1e-3, -0.2, x, 1e-12)?.u;
                let b = colehopf_point(d, 1e-3, -0.2, -x, 1e-12)?.u;
                if a < lo || a > hi {
                    return Ok((false, format!("value {a} leaves [{lo}, {hi}]")));
                }
                worst = worst.max((a + b).abs());
            }
            Ok((worst <= 1e-10, format!("max oddness defect {worst:.2e}")))
        }),
        outcome("finite volume against Cole-Hopf", || {
            let (nu, t) = (0.05, -0.1);
            let fv = reference_fv(d, nu, t, &FvConfig { cells: 512, half_width: min_half_width(d, nu, t), cfl: 0.4 })?;
            let gap = fv_colehopf_gap(d, nu, &fv, 1e-12)?;
            Ok((gap <= 1e-4, format!("max cell gap {gap:.2e}")))
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"datum": "gaussian-odd", "K": 0, "nus": [1e-2, 1e-3], "norms": ["linf"],
        "grid": {"x_points": 41, "t_slices": 4, "cluster_per_octave": 2}}"#;

    #[test]
    fn ladder_and_grid_shapes() {
        let t = time_ladder(-1.0, 1e-6, 7);
        assert_eq!(t.len(), 7);
        assert_eq!(t[0], -1.0);
        assert!((t[6] + 1e-6).abs() < 1e-20);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        let g = GridConfig { x_halfwidth: 3.0, x_points: 7, t_slices: 3, cluster_per_octave: 4 };
        let xs = spatial_grid(1e-4, &g);
        assert!(xs.contains(&0.0) && xs.contains(&1e-3) && xs.contains(&-1e-3));
        assert_eq!(xs[0], -3.0);
        assert_eq!(*xs.last().unwrap(), 3.0);
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        for i in 0..xs.len() {
            assert_eq!(xs[i], -xs[xs.len() - 1 - i]);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::from_json(MINIMAL).is_ok());
        let empty = MINIMAL.replace("[1e-2, 1e-3]", "[]");
        match SweepConfig::from_json(&empty) {
            Err(Error::Config(m)) => assert!(m.starts_with("nus")),
            other => panic!("{other:?}"),
        }
        match SweepConfig::from_json(&MINIMAL.replace("\"linf\"", "\"sup\"")) {
            Err(Error::Config(m)) => assert!(m.contains("line"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(SweepConfig::from_json(&MINIMAL.replace("\"K\": 0", "\"K\": 2")).is_err());
        assert!(SweepConfig::from_json(&MINIMAL.replace("\"K\": 0", "\"K\": 0, \"extra\": 1")).is_err());
        let prof = MINIMAL.replace("\"norms\"", "\"profiles\": {\"fields\": [\"U1\"]}, \"norms\"");
        assert!(matches!(SweepConfig::from_json(&prof), Err(Error::Config(m)) if m.contains("U1")));
    }

    #[test]
    fn gates() {
        let g = Gate::parse("rates.linf.exponent in [0.22, 0.28]").unwrap();
        assert_eq!(g.path, ["rates", "linf", "exponent"]);
        let v: Value = serde_json::json!({"rates": {"linf": {"exponent": 0.25}}});
        assert_eq!(g.check(&v).unwrap(), (0.25, true));
        let v: Value = serde_json::json!({"rates": {"linf": {"exponent": 0.3}}});
        assert!(!g.check(&v).unwrap().1);
        assert!(Gate::parse("rates.linf in 0.2").is_err());
        assert!(Gate::parse("x in [2, 1]").is_err());
        assert!(Gate::parse("rates.l2.exponent in [0, 1]").unwrap().check(&v).is_err());
    }

    #[test]
    fn minimal_sweep_has_one_row_per_viscosity() {
        let cfg = SweepConfig::from_json(MINIMAL).unwrap();
        let d = resolve_datum(&cfg.datum).unwrap();
        let table = run_sweep(&cfg, &d).unwrap();
        assert_eq!(table.keys, ["linf", "linf_app"]);
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows.iter().all(|(_, v)| v.iter().all(|e| *e > 0.0 && e.is_finite())));
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        assert_eq!(SweepTable::read_csv(buf.as_slice()).unwrap(), table);
        let summary = rates_summary(&table);
        assert!(summary["rates"]["linf"].is_null());
    }

    #[test]
    fn profile_rows_on_explicit_points() {
        let mut cfg = SweepConfig::from_json(MINIMAL).unwrap();
        cfg.profiles = Some(ProfilesConfig {
            fields: vec!["U0".into(), "theta".into()],
            nu: Some(1e-4),
            times: Some(vec![0.0, -0.5]),
            xs: Some(vec![0.0, 1.0]),
        });
        let d = resolve_datum(&cfg.datum).unwrap();
        let rows = profile_rows(&cfg, &d).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].field, "U0");
        assert_eq!(rows[0].value, 0.0);
        assert!(rows.iter().any(|r| r.field == "theta" && r.t == 0.0 && r.value.is_nan()));
        let theta_far = rows.iter().find(|r| r.field == "theta" && r.t == -0.5 && r.x == 1.0).unwrap();
        assert_eq!(theta_far.value, 0.0);
    }

    #[test]
    fn selftest_passes() {
        for c in selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
