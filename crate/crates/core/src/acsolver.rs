//! Explicit finite-difference solver for the anisotropic Allen–Cahn problem
//!
//! ```text
//! u_t = sum_ij d_i( D_ij(u) d_j u ) + eps^-2 f(u)
//! ```
//!
//! on the periodic unit square, plus marching-squares extraction of level sets.
//!
//! Diagonal fluxes live on faces with `D` evaluated at the mean of the two
//! neighbouring values. Cross fluxes `D_xy(u) d_y u` are formed at cell
//! centres with a centred difference and then differenced centrally, so the
//! whole operator telescopes and the reaction-free scheme conserves mass.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::poly::Poly;

/// Uniform periodic grid on `[0,1)^2` with `n` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Config(format!("grid size must be a power of two >= 4, got {n}")));
        }
        Ok(Grid { n, h: 1.0 / n as f64 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cells(&self) -> usize {
        self.n * self.n
    }

    /// Row-major index; `i` runs along x, `j` along y.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        [(i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h]
    }

    #[inline]
    fn wrap(&self, i: usize, di: isize) -> usize {
        (i as isize + di).rem_euclid(self.n as isize) as usize
    }
}

/// Order parameter on a [`Grid`] at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub t: f64,
}

impl ScalarField {
    pub fn constant(grid: Grid, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.cells()],
            t: 0.0,
        }
    }

    /// Samples `f(x, y)` at cell centres.
    pub fn from_fn<F: Fn(f64, f64) -> f64 + Sync>(grid: Grid, f: F) -> Self {
        let n = grid.n;
        let mut values = vec![0.0; grid.cells()];
        values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                let [x, y] = grid.center(i, j);
                *v = f(x, y);
            }
        });
        ScalarField { grid, values, t: 0.0 }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sum u h^2`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.h * self.grid.h
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// `min( h^2 / (4 N C_D), 0.2 eps^2 / F' )`, `F'` the largest `|f'|` on
/// `[alpha_- - eta0, alpha_+ + eta0]`.
pub fn stability_dt(spec: &ModelSpec, grid: &Grid) -> f64 {
    let n_dim = 2.0;
    let diff = grid.h * grid.h / (4.0 * n_dim * spec.c_upper);
    let fp = spec.reaction.max_abs_f_prime();
    let react = 0.2 * spec.epsilon * spec.epsilon / fp;
    diff.min(react)
}

/// Whether the reaction term is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepMode {
    #[default]
    Full,
    DiffusionOnly,
}

/// Diffusivity entry with a fast path for constants.
#[derive(Clone, Copy)]
enum Coef<'a> {
    Const(f64),
    Poly(&'a Poly),
}

impl<'a> Coef<'a> {
    fn of(p: &'a Poly) -> Self {
        if p.is_constant() {
            Coef::Const(p.eval(0.0))
        } else {
            Coef::Poly(p)
        }
    }

    #[inline(always)]
    fn eval(self, s: f64) -> f64 {
        match self {
            Coef::Const(c) => c,
            Coef::Poly(p) => p.eval(s),
        }
    }
}

/// Reusable stepping state: diffusivity entry polynomials and a scratch buffer.
#[derive(Debug, Clone)]
pub struct Stepper {
    dxx: Poly,
    dxy: Poly,
    dyy: Poly,
    f: Poly,
    eps: f64,
    dt_max: f64,
    mode: StepMode,
    next: Vec<f64>,
}

impl Stepper {
    pub fn new(spec: &ModelSpec, grid: &Grid, mode: StepMode) -> Result<Self> {
        if spec.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: spec.dim(),
            });
        }
        let d = &spec.diffusivity;
        let m = grid.cells();
        Ok(Stepper {
            dxx: d.entry_poly(0, 0),
            dxy: d.entry_poly(0, 1),
            dyy: d.entry_poly(1, 1),
            f: spec.reaction.poly().clone(),
            eps: spec.epsilon,
            dt_max: stability_dt(spec, grid),
            mode,
            next: vec![0.0; m],
        })
    }

    pub fn dt_max(&self) -> f64 {
        self.dt_max
    }

    /// One explicit Euler step of length `dt`, in place.
    pub fn advance(&mut self, field: &mut ScalarField, dt: f64) -> Result<()> {
        if !(dt > 0.0) || dt > self.dt_max * (1.0 + 1e-12) {
            return Err(Error::CflViolated {
                dt,
                limit: self.dt_max,
            });
        }
        let g = field.grid;
        let n = g.n;
        let ih = 1.0 / g.h;
        let ih2 = 0.5 * ih;
        let u = &field.values;
        let (dxx, dyy, dxy) = (Coef::of(&self.dxx), Coef::of(&self.dyy), Coef::of(&self.dxy));
        let cross = !self.dxy.is_zero();
        let up = |i: usize| if i + 1 == n { 0 } else { i + 1 };
        let down = |i: usize| if i == 0 { n - 1 } else { i - 1 };

        let (f, s_react) = match self.mode {
            StepMode::Full => (Some(&self.f), 1.0 / (self.eps * self.eps)),
            StepMode::DiffusionOnly => (None, 0.0),
        };
        let mut next = std::mem::take(&mut self.next);
        next.resize(g.cells(), 0.0);
        let blown = next
            .par_chunks_mut(n)
            .enumerate()
            .map(|(j, out)| {
                let row = &u[j * n..(j + 1) * n];
                let north = &u[up(j) * n..(up(j) + 1) * n];
                let south = &u[down(j) * n..(down(j) + 1) * n];
                let mut bad = false;
                // flux through the west face of cell i, carried along the row
                let mut west = {
                    let (w, c) = (row[n - 1], row[0]);
                    dxx.eval(0.5 * (w + c)) * (c - w)
                };
                for i in 0..n {
                    let (iw, ie) = (down(i), up(i));
                    let c = row[i];
                    let e = row[ie];
                    let east = dxx.eval(0.5 * (c + e)) * (e - c);
                    let (nn, ss) = (north[i], south[i]);
                    let fn_ = dyy.eval(0.5 * (c + nn)) * (nn - c);
                    let fs = dyy.eval(0.5 * (ss + c)) * (c - ss);
                    let mut div = (east - west + fn_ - fs) * ih * ih;
                    west = east;
                    if cross {
                        let gxe = dxy.eval(e) * (north[ie] - south[ie]);
                        let gxw = dxy.eval(row[iw]) * (north[iw] - south[iw]);
                        let gyn = dxy.eval(nn) * (north[ie] - north[iw]);
                        let gys = dxy.eval(ss) * (south[ie] - south[iw]);
                        div += (gxe - gxw + gyn - gys) * ih2 * ih2;
                    }
                    if let Some(f) = f {
                        div += s_react * f.eval(c);
                    }
                    let v = c + dt * div;
                    bad |= !v.is_finite();
                    out[i] = v;
                }
                bad
            })
            .reduce(|| false, |a, b| a || b);
        if blown {
            self.next = next;
            return Err(Error::Blowup { t: field.t + dt });
        }
        self.next = std::mem::replace(&mut field.values, next);
        field.t += dt;
        Ok(())
    }
}

/// One explicit Euler step.
pub fn step(field: &ScalarField, spec: &ModelSpec, dt: f64) -> Result<ScalarField> {
    let mut out = field.clone();
    Stepper::new(spec, &field.grid, StepMode::Full)?.advance(&mut out, dt)?;
    Ok(out)
}

/// Advances to `t_end` with the stable step, shortening steps to land on
/// each snapshot time. Returns `u0` followed by the snapshots in time order
/// (`t_end` always included).
pub fn simulate(u0: &ScalarField, spec: &ModelSpec, t_end: f64, snapshot_times: &[f64]) -> Result<Vec<ScalarField>> {
    simulate_observed(u0, spec, t_end, snapshot_times, StepMode::Full, |_| Ok(()))
}

/// [`simulate`] with a callback after every step.
pub fn simulate_observed<O>(
    u0: &ScalarField,
    spec: &ModelSpec,
    t_end: f64,
    snapshot_times: &[f64],
    mode: StepMode,
    mut observe: O,
) -> Result<Vec<ScalarField>>
where
    O: FnMut(&ScalarField) -> Result<()>,
{
    if !u0.is_finite() {
        return Err(Error::Blowup { t: u0.t });
    }
    if !(t_end >= 0.0) {
        return Err(Error::Config(format!("t_end must be >= 0, got {t_end}")));
    }
    let mut stops: Vec<f64> = snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > u0.t && t < u0.t + t_end)
        .collect();
    stops.push(u0.t + t_end);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut out = vec![u0.clone()];
    if t_end == 0.0 {
        return Ok(out);
    }
    let mut stepper = Stepper::new(spec, &u0.grid, mode)?;
    let dt = stepper.dt_max();
    let mut u = u0.clone();
    for stop in stops {
        while u.t < stop {
            let remaining = stop - u.t;
            if remaining <= 1e-14 * stop.abs().max(1.0) {
                break;
            }
            let this = if remaining <= dt * (1.0 + 1e-9) { remaining.min(dt) } else { dt };
            stepper.advance(&mut u, this)?;
            if remaining <= dt * (1.0 + 1e-9) {
                u.t = stop;
            }
            observe(&u)?;
        }
        out.push(u.clone());
    }
    Ok(out)
}

/// Max over time of `max(u_low - u_high)` for two trajectories.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrderingReport {
    pub max_violation: f64,
    pub steps: usize,
    pub pass: bool,
}

pub const ORDERING_TOL: f64 = 1e-8;

/// Runs both fields to `t_end` in lockstep and tracks the ordering defect.
pub fn ordering_check(u_low: &ScalarField, u_high: &ScalarField, spec: &ModelSpec, t_end: f64) -> Result<OrderingReport> {
    if u_low.grid != u_high.grid {
        return Err(Error::DimensionMismatch {
            expected: u_low.grid.n,
            got: u_high.grid.n,
        });
    }
    let defect = |a: &ScalarField, b: &ScalarField| {
        a.values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| x - y)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut lo = u_low.clone();
    let mut hi = u_high.clone();
    let mut s_lo = Stepper::new(spec, &lo.grid, StepMode::Full)?;
    let mut s_hi = s_lo.clone();
    let dt = s_lo.dt_max();
    let mut worst = defect(&lo, &hi).max(0.0);
    let mut steps = 0;
    while lo.t < t_end - 1e-15 {
        let this = dt.min(t_end - lo.t);
        s_lo.advance(&mut lo, this)?;
        s_hi.advance(&mut hi, this)?;
        worst = worst.max(defect(&lo, &hi));
        steps += 1;
    }
    Ok(OrderingReport {
        max_violation: worst,
        steps,
        pass: worst <= ORDERING_TOL,
    })
}

/// One connected component of a level set.
///
/// Points are unwrapped so consecutive vertices are nearest images; a
/// contour that winds around the torus has non-zero `winding` and is not
/// closed in the plane. Traversal keeps the side with values below the
/// level on the left, so closed contours around a low region run
/// counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub points: Vec<[f64; 2]>,
    pub winding: [i32; 2],
}

impl Contour {
    pub fn is_closed(&self) -> bool {
        self.winding == [0, 0]
    }

    /// Shoelace area (positive for counter-clockwise).
    pub fn signed_area(&self) -> f64 {
        let p = &self.points;
        let m = p.len();
        (0..m)
            .map(|k| {
                let (a, b) = (p[k], p[(k + 1) % m]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            * 0.5
    }
}

/// Marching squares on the periodic dual grid (squares joining four cell
/// centres), linear interpolation on edges, saddles resolved by the
/// average of the four corners.
pub fn extract_level_set(field: &ScalarField, level: f64) -> Result<Vec<Contour>> {
    let g = field.grid;
    let n = g.n;
    let h = g.h;
    let above = |i: usize, j: usize| field.at(i, j) > level;

    // Edge ids: horizontal edge from centre (i,j) to (i+1,j) is 2*idx,
    // vertical edge from (i,j) to (i,j+1) is 2*idx+1.
    let h_edge = |i: usize, j: usize| 2 * g.idx(i % n, j % n);
    let v_edge = |i: usize, j: usize| 2 * g.idx(i % n, j % n) + 1;
    let point = |edge: usize| -> [f64; 2] {
        let k = edge / 2;
        let (i, j) = (k % n, k / n);
        let a = field.at(i, j);
        if edge % 2 == 0 {
            let b = field.at(g.wrap(i, 1), j);
            let t = (level - a) / (b - a);
            [(i as f64 + 0.5 + t) * h, (j as f64 + 0.5) * h]
        } else {
            let b = field.at(i, g.wrap(j, 1));
            let t = (level - a) / (b - a);
            [(i as f64 + 0.5) * h, (j as f64 + 0.5 + t) * h]
        }
    };

    let mut next = vec![usize::MAX; 2 * g.cells()];
    let mut any = false;
    for j in 0..n {
        for i in 0..n {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let up: Vec<bool> = corners.iter().map(|&(a, b)| above(a % n, b % n)).collect();
            let edges = [h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1), v_edge(i, j)];
            let mut starts = Vec::with_capacity(2);
            let mut ends = Vec::with_capacity(2);
            for k in 0..4 {
                let (a, b) = (up[k], up[(k + 1) % 4]);
                if !a && b {
                    starts.push(k);
                } else if a && !b {
                    ends.push(k);
                }
            }
            match starts.len() {
                0 => {}
                1 => {
                    next[edges[starts[0]]] = edges[ends[0]];
                    any = true;
                }
                _ => {
                    let centre: f64 = corners.iter().map(|&(a, b)| field.at(a % n, b % n)).sum::<f64>() / 4.0;
                    let shift = if centre > level { 3 } else { 1 };
                    for &s in &starts {
                        next[edges[s]] = edges[(s + shift) % 4];
                    }
                    any = true;
                }
            }
        }
    }
    if !any {
        return Err(Error::NoContour { level });
    }

    let mut seen = vec![false; next.len()];
    let mut contours = Vec::new();
    for start in 0..next.len() {
        if next[start] == usize::MAX || seen[start] {
            continue;
        }
        let mut pts: Vec<[f64; 2]> = Vec::new();
        let mut e = start;
        loop {
            if seen[e] {
                if e != start {
                    return Err(Error::OpenContour);
                }
                break;
            }
            seen[e] = true;
            let mut p = point(e);
            if let Some(q) = pts.last() {
                for c in 0..2 {
                    p[c] -= (p[c] - q[c]).round();
                }
            }
            pts.push(p);
            e = next[e];
            if e == usize::MAX {
                return Err(Error::OpenContour);
            }
        }
        let first = point(start);
        let last = pts[pts.len() - 1];
        let mut winding = [0i32; 2];
        for c in 0..2 {
            let mut closing = first[c] - last[c];
            closing -= closing.round();
            winding[c] = (last[c] + closing - pts[0][c]).round() as i32;
        }
        contours.push(Contour { points: pts, winding });
    }
    Ok(contours)
}

/// Sidecar written next to a raw field dump.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldMeta {
    pub n: usize,
    pub h: f64,
    pub t: f64,
    pub epsilon: f64,
}

/// Writes `<prefix>.bin` (row-major little-endian f64) and `<prefix>.json`.
pub fn write_field(field: &ScalarField, epsilon: f64, prefix: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 * field.values.len());
    for v in &field.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(with_suffix(prefix, "bin"), bytes)?;
    let meta = FieldMeta {
        n: field.grid.n,
        h: field.grid.h,
        t: field.t,
        epsilon,
    };
    fs::write(with_suffix(prefix, "json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// `prefix.ext`, keeping any dots already in the prefix.
pub fn with_suffix(prefix: &Path, ext: &str) -> std::path::PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    s.into()
}

/// Reads a dump written by [`write_field`].
pub fn read_field(prefix: &Path) -> Result<(ScalarField, FieldMeta)> {
    let meta: FieldMeta = serde_json::from_str(&fs::read_to_string(with_suffix(prefix, "json"))?)?;
    let bytes = fs::read(with_suffix(prefix, "bin"))?;
    let grid = Grid::new(meta.n)?;
    if bytes.len() != 8 * grid.cells() {
        return Err(Error::Config(format!("field dump has {} bytes, expected {}", bytes.len(), 8 * grid.cells())));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((ScalarField { grid, values, t: meta.t }, meta))
}

/// `x,y` per vertex.
pub fn write_points_csv(points: &[[f64; 2]], path: &Path) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "x,y")?;
    for p in points {
        writeln!(f, "{:.12e},{:.12e}", p[0], p[1])?;
    }
    Ok(())
}

/// Smooth initial data.
pub mod init {
    use super::{Grid, ScalarField};
    use std::f64::consts::PI;

    /// Minimal-image distance on the unit torus.
    pub fn torus_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
        let dx = (a[0] - b[0]) - (a[0] - b[0]).round();
        let dy = (a[1] - b[1]) - (a[1] - b[1]).round();
        dx.hypot(dy)
    }

    /// `tanh((|x - c| - r0) / (sqrt 2 eps))`: the cubic standing wave
    /// composed with the distance to a circle, negative inside.
    pub fn radial_tanh(grid: Grid, center: [f64; 2], r0: f64, eps: f64) -> ScalarField {
        let w = std::f64::consts::SQRT_2 * eps;
        ScalarField::from_fn(grid, |x, y| ((torus_dist([x, y], center) - r0) / w).tanh())
    }

    /// `amp cos(2 pi kx x) cos(2 pi ky y)`.
    pub fn trigonometric(grid: Grid, amp: f64, kx: f64, ky: f64) -> ScalarField {
        ScalarField::from_fn(grid, |x, y| amp * (2.0 * PI * kx * x).cos() * (2.0 * PI * ky * y).cos())
    }

    /// `lo + (hi - lo) (1 + tanh(d / width)) / 2` for a signed distance `d`.
    pub fn softened<F: Fn(f64, f64) -> f64 + Sync>(grid: Grid, d: F, width: f64, lo: f64, hi: f64) -> ScalarField {
        ScalarField::from_fn(grid, |x, y| lo + (hi - lo) * 0.5 * (1.0 + (d(x, y) / width).tanh()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    #[test]
    fn grid_rules() {
        assert!(Grid::new(100).is_err());
        let g = Grid::new(256).unwrap();
        assert_eq!(g.h() * g.n() as f64, 1.0);
        assert_eq!(g.wrap(0, -1), 255);
        assert_eq!(g.wrap(255, 1), 0);
    }

    #[test]
    fn stability_dt_examples() {
        let spec = ModelSpec::cubic_identity(0.02);
        let g = Grid::new(256).unwrap();
        let dt = stability_dt(&spec, &g);
        assert!((dt - 1.0 / (8.0 * 65536.0)).abs() < 1e-18);
        assert!((dt - 1.9073e-6).abs() < 1e-10);
        let g2 = Grid::new(512).unwrap();
        assert!((dt / stability_dt(&spec, &g2) - 4.0).abs() < 1e-12);
        let big = ModelSpec::cubic_identity(1e3);
        assert_eq!(stability_dt(&big, &g), 1.0 / (8.0 * 65536.0));
    }

    #[test]
    fn constant_equilibria() {
        let spec = ModelSpec::cubic_identity(0.05);
        let g = Grid::new(16).unwrap();
        for c in [1.0, -1.0, 0.0] {
            let mut u = ScalarField::constant(g, c);
            let mut s = Stepper::new(&spec, &g, StepMode::Full).unwrap();
            for _ in 0..100 {
                s.advance(&mut u, s.dt_max()).unwrap();
            }
            assert!(u.values.iter().all(|&v| v == c));
        }
    }

    #[test]
    fn cfl_and_blowup() {
        let spec = ModelSpec::cubic_identity(0.05);
        let g = Grid::new(16).unwrap();
        let u = ScalarField::constant(g, 0.3);
        let dt = stability_dt(&spec, &g);
        assert!(matches!(step(&u, &spec, 2.0 * dt), Err(Error::CflViolated { .. })));
        let mut v = u.clone();
        v.values[3] = 1e200;
        assert!(matches!(step(&v, &spec, dt), Err(Error::Blowup { .. })));
    }

    #[test]
    fn simulate_lands_on_snapshots() {
        let spec = ModelSpec::cubic_identity(0.05);
        let g = Grid::new(16).unwrap();
        let u = init::trigonometric(g, 0.5, 1.0, 1.0);
        assert_eq!(simulate(&u, &spec, 0.0, &[]).unwrap().len(), 1);
        let out = simulate(&u, &spec, 1e-3, &[3e-4, 7e-4]).unwrap();
        let ts: Vec<f64> = out.iter().map(|f| f.t).collect();
        assert_eq!(ts, vec![0.0, 3e-4, 7e-4, 1e-3]);
        let again = simulate(&u, &spec, 1e-3, &[3e-4, 7e-4]).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn straight_line_contour_wraps() {
        let g = Grid::new(32).unwrap();
        let u = ScalarField::from_fn(g, |x, _| (2.0 * std::f64::consts::PI * (x - 0.25)).sin());
        let cs = extract_level_set(&u, 0.0).unwrap();
        assert_eq!(cs.len(), 2);
        for c in &cs {
            assert!(!c.is_closed());
            assert_eq!(c.winding[0], 0);
            assert_eq!(c.winding[1].abs(), 1);
            let x0 = c.points[0][0].rem_euclid(1.0);
            assert!((x0 - 0.25).abs() < 2e-3 || (x0 - 0.75).abs() < 2e-3, "{x0}");
        }
        assert!(matches!(
            extract_level_set(&ScalarField::constant(g, 1.0), 0.0),
            Err(Error::NoContour { .. })
        ));
    }

    #[test]
    fn circle_contour_is_ccw_and_accurate() {
        let g = Grid::new(128).unwrap();
        let u = init::radial_tanh(g, [0.5, 0.5], 0.25, 0.02);
        let cs = extract_level_set(&u, 0.0).unwrap();
        assert_eq!(cs.len(), 1);
        let c = &cs[0];
        assert!(c.is_closed());
        assert!(c.signed_area() > 0.0);
        let err = c
            .points
            .iter()
            .map(|p| ((p[0] - 0.5).hypot(p[1] - 0.5) - 0.25).abs())
            .fold(0.0, f64::max);
        assert!(err <= g.h(), "{err}");
    }

    #[test]
    fn circle_crossing_the_seam_stays_closed() {
        let g = Grid::new(64).unwrap();
        let u = init::radial_tanh(g, [0.02, 0.97], 0.2, 0.03);
        let cs = extract_level_set(&u, 0.0).unwrap();
        assert_eq!(cs.len(), 1);
        assert!(cs[0].is_closed());
        let area = cs[0].signed_area();
        assert!((area - std::f64::consts::PI * 0.04).abs() < 2e-3, "{area}");
    }

    #[test]
    fn field_dump_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(8).unwrap();
        let mut u = init::trigonometric(g, 0.5, 1.0, 2.0);
        u.t = 0.125;
        let p = dir.path().join("run_t0.125");
        write_field(&u, 0.05, &p).unwrap();
        let (v, meta) = read_field(&p).unwrap();
        assert_eq!(u, v);
        assert_eq!(meta.epsilon, 0.05);
        assert_eq!(std::fs::metadata(dir.path().join("run_t0.125.bin")).unwrap().len(), 512);
    }
}
