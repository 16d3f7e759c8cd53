//! Reaction-ODE checks, the generation and propagation experiments, and
//! their configuration and reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acsolver::{extract_level_set, simulate_observed, write_field, write_points_csv, Grid, ScalarField, StepMode};
use crate::error::{Error, Result};
use crate::flow::{hausdorff, signed_distance_band, simulate_front, FrontCurve};
use crate::mobility::{tabulate_mobility, ConstantDMobility, Mobility};
use crate::model::{EDerivative, ModelConfig, ModelSpec};
use crate::profile::{solve_standing_wave, WaveProfile};
use crate::shape::{Shape, ShapeConfig};

/// Smallest order accepted by the propagation fit.
pub const MIN_ORDER: f64 = 0.8;
/// Tolerance used for model validation inside experiments.
pub const VALIDATION_TOL: f64 = 1e-8;
/// RK4 step for the reaction ODE.
pub const ODE_STEP: f64 = 1e-3;
/// Markers on the front-tracked reference curve.
pub const REFERENCE_MARKERS: usize = 512;

// ---------------------------------------------------------------------------
// reaction ODE

/// `Y`, `Y_xi` and `Y_xixi` of `Y_tau = f(Y)`, `Y(0) = xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeState {
    pub y: f64,
    pub y_xi: f64,
    pub y_xixi: f64,
}

/// RK4 on `Y` together with its first and second variational equations.
pub fn solve_reaction_ode(spec: &ModelSpec, xi: f64, tau: f64) -> Result<OdeState> {
    if !xi.is_finite() || !(tau >= 0.0) {
        return Err(Error::Config(format!("need finite xi and tau >= 0, got xi = {xi}, tau = {tau}")));
    }
    let r = &spec.reaction;
    let rhs = |s: [f64; 3]| {
        let (fp, fpp) = (r.f_prime(s[0]), r.f_second(s[0]));
        [r.f(s[0]), fp * s[1], fpp * s[1] * s[1] + fp * s[2]]
    };
    let steps = (tau / ODE_STEP).ceil().max(1.0) as usize;
    let h = tau / steps as f64;
    let mut s = [xi, 1.0, 0.0];
    for k in 0..steps {
        let k1 = rhs(s);
        let k2 = rhs(std::array::from_fn(|i| s[i] + 0.5 * h * k1[i]));
        let k3 = rhs(std::array::from_fn(|i| s[i] + 0.5 * h * k2[i]));
        let k4 = rhs(std::array::from_fn(|i| s[i] + h * k3[i]));
        for i in 0..3 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !s.iter().all(|v| v.is_finite() && v.abs() < 1e150) {
            return Err(Error::Blowup { t: (k + 1) as f64 * h });
        }
    }
    Ok(OdeState {
        y: s[0],
        y_xi: s[1],
        y_xixi: s[2],
    })
}

/// `Y(tau, xi)` for the cubic `u - u^3`.
pub fn cubic_ode_closed_form(xi: f64, tau: f64) -> f64 {
    xi * tau.exp() / (1.0 + xi * xi * ((2.0 * tau).exp() - 1.0)).sqrt()
}

/// `nu^{-1} eps^2 |ln eps|`.
pub fn generation_time(spec: &ModelSpec, eps: f64) -> f64 {
    eps * eps * eps.ln().abs() / spec.reaction.nu
}

/// Sampling for [`check_generation_lemma`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaSamples {
    pub tau_max: f64,
    pub n_tau: usize,
    pub xi_min: f64,
    pub xi_max: f64,
    pub n_xi: usize,
    pub eta: f64,
    pub eps: Vec<f64>,
}

impl Default for LemmaSamples {
    fn default() -> Self {
        LemmaSamples {
            tau_max: 5.0,
            n_tau: 50,
            xi_min: -1.5,
            xi_max: 1.5,
            n_xi: 50,
            eta: 0.1,
            eps: vec![0.04, 0.02, 0.01],
        }
    }
}

/// Thresholds at one `eps`: `Y(nu^{-1}|ln eps|, xi)` reaches
/// `alpha_+ - eta` for `xi >= alpha + c_plus eps`, and the mirror image.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdRow {
    pub eps: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    /// `alpha_- - eta <= Y <= alpha_+ + eta` on every sampled `xi`.
    pub bounded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    /// `max Y_xi e^{-nu tau}`.
    pub c_growth: f64,
    /// `max |Y_xixi / Y_xi| / (e^{nu tau} - 1)` over `tau > 0`.
    pub c_curvature: f64,
    pub thresholds: Vec<ThresholdRow>,
    pub min_y_xi: f64,
    /// Largest of all fitted constants.
    pub c_y: f64,
    pub pass: bool,
}

/// Fits the smallest constants in the three reaction-ODE estimates over
/// the sampled `(tau, xi)` grid.
pub fn check_generation_lemma(spec: &ModelSpec, samples: &LemmaSamples) -> Result<LemmaReport> {
    let r = &spec.reaction;
    let nu = r.nu;
    let grid: Vec<(f64, f64)> = (0..samples.n_tau)
        .flat_map(|i| {
            let tau = samples.tau_max * (i + 1) as f64 / samples.n_tau as f64;
            (0..samples.n_xi).map(move |j| {
                let w = if samples.n_xi > 1 { j as f64 / (samples.n_xi - 1) as f64 } else { 0.5 };
                (tau, samples.xi_min + w * (samples.xi_max - samples.xi_min))
            })
        })
        .collect();
    let states = grid
        .par_iter()
        .map(|&(tau, xi)| solve_reaction_ode(spec, xi, tau).map(|s| (tau, s)))
        .collect::<Result<Vec<_>>>()?;
    let mut c_growth: f64 = 0.0;
    let mut c_curvature: f64 = 0.0;
    let mut min_y_xi = f64::INFINITY;
    for (tau, s) in &states {
        min_y_xi = min_y_xi.min(s.y_xi);
        c_growth = c_growth.max(s.y_xi * (-nu * tau).exp());
        c_curvature = c_curvature.max((s.y_xixi / s.y_xi).abs() / (nu * tau).exp_m1());
    }

    let xis: Vec<f64> = (0..samples.n_xi.max(2))
        .map(|j| samples.xi_min + (samples.xi_max - samples.xi_min) * j as f64 / (samples.n_xi.max(2) - 1) as f64)
        .collect();
    let mut thresholds = Vec::new();
    for &eps in &samples.eps {
        let tau = eps.ln().abs() / nu;
        let y_at = |xi: f64| solve_reaction_ode(spec, xi, tau).map(|s| s.y);
        let mut bounded = true;
        for &xi in &xis {
            let y = y_at(xi)?;
            bounded &= y >= r.alpha_minus - samples.eta && y <= r.alpha_plus + samples.eta;
        }
        let hi = samples.xi_max.max(r.alpha_mid);
        let lo = samples.xi_min.min(r.alpha_mid);
        let c_plus = match bisect_level(&y_at, r.alpha_mid, hi, r.alpha_plus - samples.eta)? {
            Some(x) => (x - r.alpha_mid) / eps,
            None => f64::INFINITY,
        };
        let c_minus = match bisect_level(&y_at, lo, r.alpha_mid, r.alpha_minus + samples.eta)? {
            Some(x) => (r.alpha_mid - x) / eps,
            None => f64::INFINITY,
        };
        thresholds.push(ThresholdRow {
            eps,
            c_plus,
            c_minus,
            bounded,
        });
    }
    let c_y = thresholds
        .iter()
        .flat_map(|t| [t.c_plus, t.c_minus])
        .fold(c_growth.max(c_curvature), f64::max);
    let pass = c_y.is_finite() && min_y_xi > 0.0 && thresholds.iter().all(|t| t.bounded);
    Ok(LemmaReport {
        c_growth,
        c_curvature,
        thresholds,
        min_y_xi,
        c_y,
        pass,
    })
}

/// `xi` in `[lo, hi]` with `y(xi) = level` for increasing `y`; `None` if
/// the level is not crossed.
fn bisect_level(y: &impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, level: f64) -> Result<Option<f64>> {
    let (mut a, mut b) = (lo, hi);
    let (ya, yb) = (y(a)?, y(b)?);
    if ya >= level {
        return Ok(Some(a));
    }
    if yb < level {
        return Ok(None);
    }
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if y(m)? >= level {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(Some(b))
}

// ---------------------------------------------------------------------------
// configuration

/// Inline model or a path to a model file (relative to the config file).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ModelRef {
    Inline(ModelConfig),
    Path(PathBuf),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimesConfig {
    pub t_end: f64,
    #[serde(default)]
    pub checkpoints: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TolConfig {
    pub eta_g: f64,
    pub eta_p: f64,
    pub m0_ceiling: f64,
    /// Largest accepted band constant in the propagation check.
    #[serde(default = "default_cp_ceiling")]
    pub cp_ceiling: f64,
}

fn default_cp_ceiling() -> f64 {
    10.0
}

/// Experiment description as read from JSON.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelRef,
    pub grid: GridConfig,
    pub eps: Vec<f64>,
    pub shape: ShapeConfig,
    pub times: TimesConfig,
    pub tol: TolConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Checked configuration with the model built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub spec: ModelSpec,
    pub grid: Grid,
    pub shape: Shape,
}

impl ExperimentConfig {
    /// Reads a config file; a model given as a path is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
        if let ModelRef::Path(p) = &cfg.model {
            let p = if p.is_relative() {
                path.parent().unwrap_or(Path::new(".")).join(p)
            } else {
                p.clone()
            };
            let text = std::fs::read_to_string(&p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            cfg.model = ModelRef::Inline(ModelConfig::from_json(&text)?);
        }
        Ok(cfg)
    }

    pub fn model_config(&self) -> Result<&ModelConfig> {
        match &self.model {
            ModelRef::Inline(m) => Ok(m),
            ModelRef::Path(p) => Err(Error::Config(format!("model file {} was not loaded", p.display()))),
        }
    }

    pub fn validate(&self) -> Result<Experiment> {
        let spec = self.model_config()?.build()?;
        spec.validate(VALIDATION_TOL, self.seed)?.check()?;
        if spec.dim() != 2 {
            return Err(Error::Config("experiments run in two dimensions".into()));
        }
        if self.eps.is_empty() {
            return Err(Error::Config("eps list is empty".into()));
        }
        if self.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::Config(format!("eps values must lie in (0, 1): {:?}", self.eps)));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(format!("eps values must be strictly decreasing: {:?}", self.eps)));
        }
        let grid = Grid::new(self.grid.n)?;
        let eps_min = *self.eps.last().expect("non-empty");
        if grid.h() > eps_min / 4.0 {
            return Err(Error::Config(format!(
                "grid n = {} does not resolve eps = {eps_min} (need h <= eps/4)",
                self.grid.n
            )));
        }
        let eta0 = spec.reaction.eta0();
        for (name, v) in [("eta_g", self.tol.eta_g), ("eta_p", self.tol.eta_p)] {
            if !(v > 0.0 && v < eta0) {
                return Err(Error::Config(format!("{name} = {v} must lie in (0, {eta0})")));
            }
        }
        if !(self.tol.m0_ceiling > 0.0) || !(self.tol.cp_ceiling > 0.0) {
            return Err(Error::Config("ceilings must be positive".into()));
        }
        let t = &self.times;
        if !(t.t_end > 0.0) {
            return Err(Error::Config(format!("t_end must be positive, got {}", t.t_end)));
        }
        if t.checkpoints.iter().any(|c| !(*c > 0.0 && *c <= t.t_end)) {
            return Err(Error::Config(format!("checkpoints must lie in (0, t_end]: {:?}", t.checkpoints)));
        }
        let shape = self.shape.build()?;
        Ok(Experiment {
            config: self.clone(),
            spec,
            grid,
            shape,
        })
    }
}

// ---------------------------------------------------------------------------
// helpers

/// Mobility of the limit flow: closed form for constant diffusivity,
/// otherwise a 256-angle table.
pub fn front_mobility(spec: &ModelSpec, conv: EDerivative) -> Result<Box<dyn Mobility>> {
    if spec.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: spec.dim(),
        });
    }
    if spec.diffusivity.is_constant() {
        let d = spec.diffusivity.matrix(0.0);
        Ok(Box::new(ConstantDMobility::new(
            [[d[(0, 0)], d[(0, 1)]], [d[(1, 0)], d[(1, 1)]]],
            conv,
        )))
    } else {
        Ok(Box::new(tabulate_mobility(spec, 256, conv)?))
    }
}

/// Standing waves over normal directions for the composed initial data.
#[derive(Debug, Clone)]
pub struct ProfileBank {
    /// Angles in `[0, pi)`; profiles are even in the direction.
    pub angles: Vec<f64>,
    pub profiles: Vec<WaveProfile>,
}

impl ProfileBank {
    /// `m` directions, or one when `a_e` does not depend on `e`.
    pub fn new(spec: &ModelSpec, m: usize) -> Result<Self> {
        let isotropic = {
            let r = &spec.reaction;
            let (a, b) = (spec.direction(&[1.0, 0.0])?, spec.direction(&[0.6, 0.8])?);
            let c = spec.direction(&[0.0, 1.0])?;
            (0..=32).all(|k| {
                let s = r.alpha_minus + (r.alpha_plus - r.alpha_minus) * k as f64 / 32.0;
                let v = a.a(s);
                (b.a(s) - v).abs() <= 1e-14 * v.abs() && (c.a(s) - v).abs() <= 1e-14 * v.abs()
            })
        };
        let m = if isotropic { 1 } else { m.max(2) };
        let angles: Vec<f64> = (0..m).map(|k| std::f64::consts::PI * k as f64 / m as f64).collect();
        let profiles = angles
            .par_iter()
            .map(|t| solve_standing_wave(spec, &[t.cos(), t.sin()], 12.0, 1e-3))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProfileBank { angles, profiles })
    }

    /// `U_0(z; n)`, linear in the angle of `n`.
    pub fn eval(&self, z: f64, n: [f64; 2]) -> f64 {
        let m = self.profiles.len();
        if m == 1 {
            return self.profiles[0].eval(z);
        }
        let th = n[1].atan2(n[0]).rem_euclid(std::f64::consts::PI);
        let x = th / std::f64::consts::PI * m as f64;
        let k = (x.floor() as usize).min(m - 1);
        let w = x - k as f64;
        (1.0 - w) * self.profiles[k].eval(z) + w * self.profiles[(k + 1) % m].eval(z)
    }
}

/// Signed distance to `shape` (positive outside): closed form where one
/// exists, otherwise from a fine boundary polygon.
pub fn shape_distance(shape: &Shape, grid: Grid) -> Result<ScalarField> {
    if shape.signed_distance([0.5, 0.5]).is_some() {
        return Ok(ScalarField::from_fn(grid, |x, y| shape.signed_distance([x, y]).expect("closed form")));
    }
    let curve = FrontCurve::from_shape(shape, 4 * grid.n())?;
    Ok(signed_distance_band(&curve, grid, 0.25)?.field)
}

/// `U_0(d(x)/eps; grad d(x))` for a signed distance field `d`.
pub fn composed_ansatz(bank: &ProfileBank, d: &ScalarField, eps: f64) -> ScalarField {
    let g = d.grid;
    let n = g.n();
    let values = (0..g.cells())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % n, idx / n);
            let gx = d.at((i + 1) % n, j) - d.at((i + n - 1) % n, j);
            let gy = d.at(i, (j + 1) % n) - d.at(i, (j + n - 1) % n);
            let norm = gx.hypot(gy);
            let nrm = if norm > 0.0 { [gx / norm, gy / norm] } else { [1.0, 0.0] };
            bank.eval(d.values[idx] / eps, nrm)
        })
        .collect();
    ScalarField { grid: g, values, t: 0.0 }
}

/// Largest closed contour of `u` at `level`, by enclosed area.
pub fn main_contour(u: &ScalarField, level: f64) -> Result<Vec<[f64; 2]>> {
    extract_level_set(u, level)?
        .into_iter()
        .filter(|c| c.is_closed())
        .max_by(|a, b| a.signed_area().abs().total_cmp(&b.signed_area().abs()))
        .map(|c| c.points)
        .ok_or(Error::NoContour { level })
}

/// Least squares `ln dist = ln C + p ln eps`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerFit {
    pub p: f64,
    pub c: f64,
}

pub fn fit_power(eps: &[f64], dist: &[f64]) -> Option<PowerFit> {
    if eps.len() < 3 || eps.len() != dist.len() || dist.iter().any(|d| !(*d > 0.0)) {
        return None;
    }
    let n = eps.len() as f64;
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = dist.iter().map(|d| d.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let p = sxy / sxx;
    Some(PowerFit {
        p,
        c: (my - p * mx).exp(),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| x.to_string())
}

fn write_report<T: Serialize>(dir: &Path, report: &T, csv: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)? + "\n")?;
    std::fs::write(dir.join("report.csv"), csv)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// generation

/// Smooth generator `u_0` for the generation experiment.
pub fn generation_initial(grid: Grid) -> ScalarField {
    crate::acsolver::init::trigonometric(grid, 0.5, 1.0, 1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationRow {
    pub eps: f64,
    pub n: usize,
    pub t_eps: f64,
    pub min: f64,
    pub max: f64,
    /// `alpha_- - eta_g <= u <= alpha_+ + eta_g` everywhere at `t_eps`.
    pub bounds: bool,
    /// Smallest `M0` with `u >= alpha_+ - eta_g` wherever
    /// `u_0 >= alpha + M0 eps`, and the mirrored statement.
    pub m0_hat: f64,
    /// Cells where `u_0` is beyond the `m0_ceiling` threshold.
    pub cells_beyond: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationReport {
    pub eta_g: f64,
    pub m0_ceiling: f64,
    pub rows: Vec<GenerationRow>,
    pub pass: bool,
}

impl GenerationReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,n,t_eps,min,max,bounds,m0_hat,cells_beyond\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.eps, r.n, r.t_eps, r.min, r.max, r.bounds, r.m0_hat, r.cells_beyond
            );
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_report(dir, self, &self.to_csv())
    }

    /// `CeilingExceeded` for the first row whose `M0` is above the ceiling.
    pub fn check(&self) -> Result<()> {
        match self.rows.iter().find(|r| !(r.m0_hat <= self.m0_ceiling)) {
            Some(r) => Err(Error::CeilingExceeded {
                ceiling: self.m0_ceiling,
                needed: r.m0_hat,
            }),
            None => Ok(()),
        }
    }
}

/// One generation run from arbitrary initial data.
pub fn generation_row(spec: &ModelSpec, u0: &ScalarField, eps: f64, eta_g: f64, m0_ceiling: f64) -> Result<GenerationRow> {
    let r = &spec.reaction;
    let spec = spec.with_epsilon(eps);
    let t_eps = generation_time(&spec, eps);
    let u = simulate_observed(u0, &spec, t_eps, &[], StepMode::Full, |_| Ok(()))?
        .pop()
        .expect("final state");
    let (min, max) = (u.min(), u.max());
    let mut m0_hat: f64 = 0.0;
    let mut cells_beyond = 0;
    for (a, b) in u0.values.iter().zip(&u.values) {
        let excess = (a - r.alpha_mid).abs() / eps;
        if excess >= m0_ceiling {
            cells_beyond += 1;
        }
        let bad = if *a > r.alpha_mid {
            *b < r.alpha_plus - eta_g
        } else if *a < r.alpha_mid {
            *b > r.alpha_minus + eta_g
        } else {
            false
        };
        if bad {
            m0_hat = m0_hat.max(excess);
        }
    }
    Ok(GenerationRow {
        eps,
        n: u0.grid.n(),
        t_eps,
        min,
        max,
        bounds: min >= r.alpha_minus - eta_g && max <= r.alpha_plus + eta_g,
        m0_hat,
        cells_beyond,
    })
}

/// Runs every `eps` from [`generation_initial`] to `t_eps`; never fails on
/// the outcome, see [`GenerationReport::check`].
pub fn generation_run(exp: &Experiment) -> Result<GenerationReport> {
    let cfg = &exp.config;
    let u0 = generation_initial(exp.grid);
    let rows = cfg
        .eps
        .par_iter()
        .map(|&eps| generation_row(&exp.spec, &u0, eps, cfg.tol.eta_g, cfg.tol.m0_ceiling))
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.bounds && r.m0_hat <= cfg.tol.m0_ceiling);
    Ok(GenerationReport {
        eta_g: cfg.tol.eta_g,
        m0_ceiling: cfg.tol.m0_ceiling,
        rows,
        pass,
    })
}

/// [`generation_run`], failing with `CeilingExceeded` when no `M0` below
/// the ceiling works.
pub fn generation_experiment(exp: &Experiment) -> Result<GenerationReport> {
    let report = generation_run(exp)?;
    report.check()?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// propagation

#[derive(Debug, Clone, Serialize)]
pub struct CheckpointDistance {
    pub t: f64,
    pub hausdorff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub n: usize,
    pub h: f64,
    /// Distance at `t_end`.
    pub hausdorff: f64,
    pub checkpoints: Vec<CheckpointDistance>,
    /// Global bounds `alpha_- - eta_g <= u <= alpha_+ + eta_g` held at every
    /// step.
    pub generation: bool,
    /// Smallest `C` such that `u` is within `eta_p` of the root on its side
    /// of the reference curve wherever `|d| > C eps`.
    pub c_p_hat: f64,
    pub band_width: f64,
    /// Cells outside the band that miss the root; zero by construction of
    /// `c_p_hat`, kept as an audit.
    pub band_violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub t_end: f64,
    pub rows: Vec<ConvergenceRow>,
    pub fit: Option<PowerFit>,
    /// Distances strictly decrease with `eps`.
    pub monotone: bool,
    pub order_ok: Option<bool>,
    pub band_ok: bool,
    pub pass: bool,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,n,h,hausdorff,generation,c_p_hat,band_width,band_violations,p\n");
        let p = fmt_opt(self.fit.map(|f| f.p));
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.eps, r.n, r.h, r.hausdorff, r.generation, r.c_p_hat, r.band_width, r.band_violations, p
            );
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_report(dir, self, &self.to_csv())
    }
}

/// Front-tracked reference curves at `times` (ascending, last is `t_end`).
pub fn reference_fronts(exp: &Experiment, times: &[f64]) -> Result<Vec<FrontCurve>> {
    let mob = front_mobility(&exp.spec, EDerivative::Tangential)?;
    let c0 = FrontCurve::from_shape(&exp.shape, REFERENCE_MARKERS)?;
    let t_end = exp.config.times.t_end;
    let out = simulate_front(&c0, mob.as_ref(), t_end, t_end / 100.0, times, |_| Ok(())).map_err(|e| match e {
        Error::Extinction { t } => Error::ExtinctionBeforeEnd { t },
        e => e,
    })?;
    Ok(out.into_iter().skip(1).collect())
}

fn stop_times(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut t: Vec<f64> = cfg.times.checkpoints.clone();
    t.push(cfg.times.t_end);
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// One `eps` of the sweep. Dumps the final field, contour and reference
/// curve under `dir` when given.
pub fn propagation_row(
    exp: &Experiment,
    bank: &ProfileBank,
    fronts: &[FrontCurve],
    eps: f64,
    dir: Option<&Path>,
) -> Result<ConvergenceRow> {
    let cfg = &exp.config;
    let r = &exp.spec.reaction;
    let spec = exp.spec.with_epsilon(eps);
    let grid = exp.grid;
    let d0 = shape_distance(&exp.shape, grid)?;
    let u0 = composed_ansatz(bank, &d0, eps);
    let times = stop_times(cfg);
    let (lo, hi) = (r.alpha_minus - cfg.tol.eta_g, r.alpha_plus + cfg.tol.eta_g);
    let mut generation = u0.min() >= lo && u0.max() <= hi;
    let states = simulate_observed(&u0, &spec, cfg.times.t_end, &times, StepMode::Full, |u| {
        generation &= u.min() >= lo && u.max() <= hi;
        Ok(())
    })?;
    let mut checkpoints = Vec::new();
    for (u, front) in states.iter().skip(1).zip(fronts) {
        let contour = main_contour(u, r.alpha_mid)?;
        checkpoints.push(CheckpointDistance {
            t: u.t,
            hausdorff: hausdorff(&contour, &front.points),
        });
    }
    let u = states.last().expect("final state");
    let front = fronts.last().expect("final front");
    let d = signed_distance_band(front, grid, 8.0 * grid.h())?.field;
    let eta = cfg.tol.eta_p;
    let missed = |k: usize| {
        let target = if d.values[k] > 0.0 { r.alpha_plus } else { r.alpha_minus };
        (u.values[k] - target).abs() > eta
    };
    let c_p_hat = (0..grid.cells())
        .filter(|&k| missed(k))
        .map(|k| d.values[k].abs() / eps)
        .fold(0.0, f64::max);
    let band_width = c_p_hat * eps;
    let band_violations = (0..grid.cells()).filter(|&k| d.values[k].abs() > band_width && missed(k)).count();
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        let tag = format!("eps_{eps}");
        write_field(u, eps, &dir.join(format!("{tag}_field")))?;
        write_points_csv(&main_contour(u, r.alpha_mid)?, &dir.join(format!("{tag}_contour.csv")))?;
        write_points_csv(&front.points, &dir.join(format!("{tag}_front.csv")))?;
    }
    Ok(ConvergenceRow {
        eps,
        n: grid.n(),
        h: grid.h(),
        hausdorff: checkpoints.last().map_or(f64::NAN, |c| c.hausdorff),
        checkpoints,
        generation,
        c_p_hat,
        band_width,
        band_violations,
    })
}

/// Phase-field runs from the composed ansatz against the front-tracked
/// reference, one per `eps`, with the order fit and band check.
pub fn propagation_sweep(exp: &Experiment, dump: bool) -> Result<ConvergenceReport> {
    let cfg = &exp.config;
    let times = stop_times(cfg);
    let fronts = reference_fronts(exp, &times)?;
    let bank = ProfileBank::new(&exp.spec, 64)?;
    let dir = dump.then(|| cfg.out.clone());
    let rows = cfg
        .eps
        .par_iter()
        .map(|&eps| propagation_row(exp, &bank, &fronts, eps, dir.as_deref()))
        .collect::<Result<Vec<_>>>()?;
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let dist: Vec<f64> = rows.iter().map(|r| r.hausdorff).collect();
    let fit = fit_power(&eps, &dist);
    let monotone = dist.windows(2).all(|w| w[1] < w[0]);
    let order_ok = fit.map(|f| f.p >= MIN_ORDER);
    let band_ok = rows
        .iter()
        .all(|r| r.c_p_hat.is_finite() && r.c_p_hat <= cfg.tol.cp_ceiling && r.band_violations == 0);
    let pass = monotone && order_ok.unwrap_or(true) && band_ok;
    Ok(ConvergenceReport {
        t_end: cfg.times.t_end,
        rows,
        fit,
        monotone,
        order_ok,
        band_ok,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ode_matches_closed_form() {
        let spec = ModelSpec::cubic_identity(0.01);
        let s = solve_reaction_ode(&spec, 0.5, 1.0).unwrap();
        assert!((s.y - cubic_ode_closed_form(0.5, 1.0)).abs() < 1e-10);
        assert!((s.y - 0.843348).abs() < 1e-6);
        let mid = solve_reaction_ode(&spec, 0.0, 2.0).unwrap();
        assert_eq!(mid.y, 0.0);
        assert!((mid.y_xi - 2f64.exp()).abs() < 1e-9);
        let top = solve_reaction_ode(&spec, 1.0, 3.0).unwrap();
        assert_eq!(top.y, 1.0);
        assert!(top.y_xi < 1.0);
    }

    #[test]
    fn generation_time_hand_value() {
        let spec = ModelSpec::cubic_identity(0.01);
        assert!((generation_time(&spec, 0.01) - 4.60517e-4).abs() < 1e-9);
    }

    #[test]
    fn lemma_constants_are_finite_for_cubic() {
        let spec = ModelSpec::cubic_identity(0.01);
        let samples = LemmaSamples {
            n_tau: 10,
            n_xi: 11,
            eps: vec![0.01],
            ..Default::default()
        };
        let rep = check_generation_lemma(&spec, &samples).unwrap();
        assert!(rep.pass, "{rep:?}");
        let tau = 0.01f64.ln().abs();
        let y = cubic_ode_closed_form(rep.c_y * 0.01, tau);
        assert!(y >= 0.9);
    }

    #[test]
    fn power_fit() {
        let eps = [0.04, 0.02, 0.01];
        let d: Vec<f64> = eps.iter().map(|e| 3.0 * e * e).collect();
        let f = fit_power(&eps, &d).unwrap();
        assert!((f.p - 2.0).abs() < 1e-12 && (f.c - 3.0).abs() < 1e-10);
        assert!(fit_power(&eps[..1], &d[..1]).is_none());
    }

    fn base_config() -> ExperimentConfig {
        serde_json::from_str(
            r#"{"model": {"reaction": {"kind": "cubic"}, "diffusivity": {"kind": "identity"}, "epsilon": 0.02},
                "grid": {"n": 256}, "eps": [0.04, 0.02],
                "shape": {"kind": "circle", "params": {"R": 0.25}},
                "times": {"t_end": 0.01},
                "tol": {"eta_g": 0.1, "eta_p": 0.1, "m0_ceiling": 10}}"#,
        )
        .unwrap()
    }

    #[test]
    fn config_validation() {
        base_config().validate().unwrap();
        let mut c = base_config();
        c.eps = vec![0.02, 0.04];
        assert!(c.validate().is_err());
        let mut c = base_config();
        c.tol.eta_g = 1.0;
        assert!(c.validate().is_err());
        let mut c = base_config();
        c.grid.n = 128;
        assert!(c.validate().is_err());
    }

    #[test]
    fn trivial_generation_data() {
        let spec = ModelSpec::cubic_identity(0.04);
        let g = Grid::new(16).unwrap();
        let top = generation_row(&spec, &ScalarField::constant(g, 1.0), 0.04, 0.1, 10.0).unwrap();
        assert!(top.bounds && top.m0_hat == 0.0);
        let mid = generation_row(&spec, &ScalarField::constant(g, 0.0), 0.04, 0.1, 10.0).unwrap();
        assert!(mid.bounds && mid.m0_hat == 0.0 && mid.cells_beyond == 0);
    }
}
