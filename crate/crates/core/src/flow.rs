//! Planar anisotropic curvature flow `V_n = -kappa tau^T mu(n) tau`, solved
//! by front tracking and, independently, by a level-set evolution of the
//! signed distance
//!
//! ```text
//! d_t = sum_ij mu_ij(grad d / |grad d|) d_ij d.
//! ```
//!
//! Curves are closed polylines in unwrapped coordinates, traversed with the
//! interior (`u < alpha`) on the left; the outward normal is the right-hand
//! normal of the tangent.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rayon::prelude::*;

use crate::acsolver::{Contour, Grid, ScalarField};
use crate::error::{Error, Result};
use crate::mobility::Mobility;
use crate::shape::Shape;
use crate::spline::PeriodicSpline;

/// Periodic cubic-spline parameterisation of a closed polyline by chord length.
#[derive(Debug, Clone)]
pub struct CurveSpline {
    x: PeriodicSpline,
    y: PeriodicSpline,
    knots: Vec<f64>,
    length: f64,
}

impl CurveSpline {
    pub fn new(points: &[[f64; 2]]) -> Result<Self> {
        let m = points.len();
        if m < 8 {
            return Err(Error::DegenerateCurve(format!("{m} vertices, need >= 8")));
        }
        let mut knots = Vec::with_capacity(m);
        let mut acc = 0.0;
        for k in 0..m {
            knots.push(acc);
            let (a, b) = (points[k], points[(k + 1) % m]);
            let l = (b[0] - a[0]).hypot(b[1] - a[1]);
            if !(l > 0.0) {
                return Err(Error::DegenerateCurve(format!("repeated vertex at index {k}")));
            }
            acc += l;
        }
        let x = PeriodicSpline::new(knots.clone(), points.iter().map(|p| p[0]).collect(), acc);
        let y = PeriodicSpline::new(knots.clone(), points.iter().map(|p| p[1]).collect(), acc);
        Ok(CurveSpline { x, y, knots, length: acc })
    }

    /// Parameter period (total chord length).
    pub fn period(&self) -> f64 {
        self.length
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Position, first and second derivative in the parameter.
    pub fn eval(&self, t: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let (x, x1, x2) = self.x.eval_all(t);
        let (y, y1, y2) = self.y.eval_all(t);
        ([x, y], [x1, y1], [x2, y2])
    }

    /// Outward unit normal and curvature at parameter `t`.
    pub fn normal_curvature(&self, t: f64) -> ([f64; 2], f64) {
        let (_, d1, d2) = self.eval(t);
        let speed = d1[0].hypot(d1[1]);
        let n = [d1[1] / speed, -d1[0] / speed];
        let kappa = (d1[0] * d2[1] - d1[1] * d2[0]) / (speed * speed * speed);
        (n, kappa)
    }
}

/// Closed front with per-vertex outward normals and curvature.
#[derive(Debug, Clone)]
pub struct FrontCurve {
    pub points: Vec<[f64; 2]>,
    pub normals: Vec<[f64; 2]>,
    pub curvature: Vec<f64>,
    /// Nominal vertex spacing kept by redistribution.
    pub h_target: f64,
    pub t: f64,
}

impl FrontCurve {
    /// Builds the curve and fills normals and curvature.
    pub fn new(points: Vec<[f64; 2]>, h_target: f64) -> Result<Self> {
        let mut c = FrontCurve {
            points,
            normals: Vec::new(),
            curvature: Vec::new(),
            h_target,
            t: 0.0,
        };
        geometry(&mut c)?;
        Ok(c)
    }

    pub fn from_shape(shape: &Shape, m: usize) -> Result<Self> {
        let pts = shape.boundary(m);
        let h = perimeter(&pts) / m as f64;
        Self::new(pts, h)
    }

    /// Closed marching-squares contour as a front; `h_target` is its mean spacing.
    pub fn from_contour(c: &Contour) -> Result<Self> {
        if !c.is_closed() {
            return Err(Error::DegenerateCurve("contour winds around the torus".into()));
        }
        let mut pts: Vec<[f64; 2]> = Vec::with_capacity(c.points.len());
        for p in &c.points {
            if pts.last().map_or(true, |q: &[f64; 2]| (q[0] - p[0]).hypot(q[1] - p[1]) > 1e-12) {
                pts.push(*p);
            }
        }
        while pts.len() > 1 && {
            let (a, b) = (pts[0], pts[pts.len() - 1]);
            (a[0] - b[0]).hypot(a[1] - b[1]) <= 1e-12
        } {
            pts.pop();
        }
        let h = perimeter(&pts) / pts.len().max(1) as f64;
        Self::new(pts, h)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        perimeter(&self.points)
    }

    /// Shoelace area, positive for counter-clockwise traversal.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn centroid(&self) -> [f64; 2] {
        let m = self.points.len() as f64;
        let s = self.points.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
        [s[0] / m, s[1] / m]
    }

    pub fn spacing(&self) -> (f64, f64) {
        let m = self.points.len();
        (0..m)
            .map(|k| seg_len(self.points[k], self.points[(k + 1) % m]))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), l| (lo.min(l), hi.max(l)))
    }

    /// Sum of exterior turning angles (`2 pi` for a simple counter-clockwise curve).
    pub fn total_turning(&self) -> f64 {
        let p = &self.points;
        let m = p.len();
        (0..m)
            .map(|k| {
                let a = p[(k + m - 1) % m];
                let b = p[k];
                let c = p[(k + 1) % m];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - b[0], c[1] - b[1]];
                (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1])
            })
            .sum()
    }

    /// Mean and max deviation of `|p - c|` from its mean.
    pub fn radius_stats(&self, c: [f64; 2]) -> (f64, f64) {
        let r: Vec<f64> = self.points.iter().map(|p| (p[0] - c[0]).hypot(p[1] - c[1])).collect();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let dev = r.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
        (mean, dev)
    }

    pub fn reversed(&self) -> Result<Self> {
        let mut p = self.points.clone();
        p.reverse();
        let mut c = Self::new(p, self.h_target)?;
        c.t = self.t;
        Ok(c)
    }

    pub fn translated(&self, v: [f64; 2]) -> Result<Self> {
        let p = self.points.iter().map(|q| [q[0] + v[0], q[1] + v[1]]).collect();
        let mut c = Self::new(p, self.h_target)?;
        c.t = self.t;
        Ok(c)
    }

    /// Counter-clockwise rotation by `pi/2` about `c`.
    pub fn rotated_quarter(&self, c: [f64; 2]) -> Result<Self> {
        let p = self
            .points
            .iter()
            .map(|q| [c[0] - (q[1] - c[1]), c[1] + (q[0] - c[0])])
            .collect();
        let mut out = Self::new(p, self.h_target)?;
        out.t = self.t;
        Ok(out)
    }

    /// True if no two non-adjacent segments intersect.
    pub fn is_simple(&self) -> bool {
        first_self_intersection(&self.points).is_none()
    }

    /// Vertices wrapped into `[0,1)^2`.
    pub fn wrapped_points(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|p| [p[0].rem_euclid(1.0), p[1].rem_euclid(1.0)]).collect()
    }
}

fn seg_len(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn perimeter(p: &[[f64; 2]]) -> f64 {
    let m = p.len();
    (0..m).map(|k| seg_len(p[k], p[(k + 1) % m])).sum()
}

fn signed_area(p: &[[f64; 2]]) -> f64 {
    let m = p.len();
    (0..m)
        .map(|k| {
            let (a, b) = (p[k], p[(k + 1) % m]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        * 0.5
}

/// Fills normals and curvature from a periodic cubic spline through the vertices.
pub fn geometry(curve: &mut FrontCurve) -> Result<()> {
    let s = CurveSpline::new(&curve.points)?;
    let (normals, curvature) = s.knots().iter().map(|&t| s.normal_curvature(t)).unzip();
    curve.normals = normals;
    curve.curvature = curvature;
    if curve.curvature.iter().any(|k| !k.is_finite()) {
        return Err(Error::DegenerateCurve("non-finite curvature".into()));
    }
    Ok(())
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// Segment-intersection test with a uniform hash grid.
fn first_self_intersection(p: &[[f64; 2]]) -> Option<(usize, usize)> {
    let m = p.len();
    let cell = (perimeter(p) / m as f64 * 2.0).max(1e-12);
    let key = |x: f64| (x / cell).floor() as i64;
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for k in 0..m {
        let (a, b) = (p[k], p[(k + 1) % m]);
        for i in key(a[0].min(b[0]))..=key(a[0].max(b[0])) {
            for j in key(a[1].min(b[1]))..=key(a[1].max(b[1])) {
                buckets.entry((i, j)).or_default().push(k);
            }
        }
    }
    let mut keys: Vec<_> = buckets.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let segs = &buckets[&key];
        for (x, &s) in segs.iter().enumerate() {
            for &t in &segs[x + 1..] {
                let adjacent = s == t || (s + 1) % m == t || (t + 1) % m == s;
                if !adjacent && segments_cross(p[s], p[(s + 1) % m], p[t], p[(t + 1) % m]) {
                    return Some((s.min(t), s.max(t)));
                }
            }
        }
    }
    None
}

/// Resamples the curve at `count` points uniformly spaced in the spline parameter.
pub fn redistribute(points: &[[f64; 2]], count: usize) -> Result<Vec<[f64; 2]>> {
    let s = CurveSpline::new(points)?;
    let period = s.period();
    Ok((0..count).map(|k| s.eval(period * k as f64 / count as f64).0).collect())
}

/// `0.125 (min spacing)^2 / max tau^T mu tau`. The spline second derivative
/// has eigenvalue `12/ds^2` on the sawtooth mode, so explicit Euler needs
/// `dt < ds^2 / (6 m)`.
pub fn front_dt_limit<M: Mobility + ?Sized>(curve: &FrontCurve, mob: &M) -> f64 {
    let (lo, _) = curve.spacing();
    let m = curve.normals.iter().map(|n| mob.tangential(*n)).fold(0.0, f64::max);
    0.125 * lo * lo / m.max(1e-300)
}

/// One explicit step: vertices move by `V_n dt n`, then the marker set is
/// redistributed if spacing became uneven or left `[0.5, 2] h_target`.
pub fn step_front<M: Mobility + ?Sized>(curve: &FrontCurve, mob: &M, dt: f64) -> Result<FrontCurve> {
    let limit = front_dt_limit(curve, mob);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolated { dt, limit });
    }
    let mut pts = Vec::with_capacity(curve.len());
    for ((p, n), k) in curve.points.iter().zip(&curve.normals).zip(&curve.curvature) {
        let m = mob.tangential(*n);
        if !(m > 0.0) {
            return Err(Error::NotElliptic { min_form: m, s: f64::NAN });
        }
        let v = -k * m;
        pts.push([p[0] + dt * v * n[0], p[1] + dt * v * n[1]]);
    }
    let t = curve.t + dt;
    if pts.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::Blowup { t });
    }
    if signed_area(&pts).abs() < 4.0 * curve.h_target * curve.h_target || pts.len() < 8 {
        return Err(Error::Extinction { t });
    }
    let m = pts.len();
    let (lo, hi) = (0..m)
        .map(|k| seg_len(pts[k], pts[(k + 1) % m]))
        .fold((f64::INFINITY, 0.0f64), |(a, b), l| (a.min(l), b.max(l)));
    let mean = perimeter(&pts) / m as f64;
    let h = curve.h_target;
    if mean < 0.5 * h || mean > 2.0 * h {
        let count = ((perimeter(&pts) / h).round() as usize).max(8);
        pts = redistribute(&pts, count)?;
    } else if hi > 1.5 * lo || lo < 0.5 * h || hi > 2.0 * h {
        pts = redistribute(&pts, m)?;
    }
    if first_self_intersection(&pts).is_some() {
        return Err(Error::SelfIntersection { t });
    }
    let mut out = FrontCurve::new(pts, h)?;
    out.t = t;
    Ok(out)
}

/// Advances to `t_end` in macro steps of `dt`, each split into sub-steps
/// below the stability limit. `observe` sees the curve after every
/// macro step; curves at `checkpoints` (and `t_end`) are returned after the
/// initial one.
pub fn simulate_front<M, O>(
    curve: &FrontCurve,
    mob: &M,
    t_end: f64,
    dt: f64,
    checkpoints: &[f64],
    mut observe: O,
) -> Result<Vec<FrontCurve>>
where
    M: Mobility + ?Sized,
    O: FnMut(&FrontCurve) -> Result<()>,
{
    if !(dt > 0.0) {
        return Err(Error::Config(format!("front dt must be positive, got {dt}")));
    }
    let t0 = curve.t;
    let mut stops: Vec<f64> = checkpoints.iter().copied().filter(|&t| t > t0 && t < t0 + t_end).collect();
    stops.push(t0 + t_end);
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut out = vec![curve.clone()];
    if t_end <= 0.0 {
        return Ok(out);
    }
    let mut c = curve.clone();
    for stop in stops {
        while stop - c.t > 1e-14 * stop.max(1.0) {
            let macro_dt = dt.min(stop - c.t);
            let target = c.t + macro_dt;
            while target - c.t > 1e-15 * target.max(1.0) {
                let limit = 0.9 * front_dt_limit(&c, mob);
                let remaining = target - c.t;
                let this = if remaining <= limit { remaining } else { remaining / (remaining / limit).ceil() };
                c = step_front(&c, mob, this)?;
            }
            c.t = target;
            observe(&c)?;
        }
        c.t = stop;
        out.push(c.clone());
    }
    Ok(out)
}

/// Signed distance on a grid, positive outside the front.
#[derive(Debug, Clone)]
pub struct SignedDistanceField {
    pub field: ScalarField,
    /// Level-set steps taken (drives periodic reinitialisation).
    pub steps: usize,
}

impl SignedDistanceField {
    pub fn grid(&self) -> Grid {
        self.field.grid
    }

    pub fn t(&self) -> f64 {
        self.field.t
    }

    /// Zero contour as a front (the single closed component).
    pub fn zero_front(&self) -> Result<FrontCurve> {
        let cs = crate::acsolver::extract_level_set(&self.field, 0.0)?;
        let c = cs
            .iter()
            .filter(|c| c.is_closed())
            .max_by(|a, b| a.signed_area().abs().total_cmp(&b.signed_area().abs()))
            .ok_or(Error::OpenContour)?;
        let mut f = FrontCurve::from_contour(c)?;
        f.t = self.field.t;
        Ok(f)
    }

    /// Max `| |grad d| - 1 |` over cells with `|d| <= width`.
    pub fn eikonal_defect(&self, width: f64) -> f64 {
        let g = self.field.grid;
        let n = g.n();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                if self.field.at(i, j).abs() <= width {
                    let (gx, gy) = central_gradient(&self.field, i, j);
                    worst = worst.max((gx.hypot(gy) - 1.0).abs());
                }
            }
        }
        worst
    }
}

#[inline]
fn nb(n: usize, i: usize, d: isize) -> usize {
    (i as isize + d).rem_euclid(n as isize) as usize
}

fn central_gradient(f: &ScalarField, i: usize, j: usize) -> (f64, f64) {
    let n = f.grid.n();
    let h = f.grid.h();
    (
        (f.at(nb(n, i, 1), j) - f.at(nb(n, i, -1), j)) / (2.0 * h),
        (f.at(i, nb(n, j, 1)) - f.at(i, nb(n, j, -1))) / (2.0 * h),
    )
}

fn hessian(f: &ScalarField, i: usize, j: usize) -> [f64; 3] {
    let n = f.grid.n();
    let h2 = f.grid.h() * f.grid.h();
    let c = f.at(i, j);
    let (ie, iw, jn, js) = (nb(n, i, 1), nb(n, i, -1), nb(n, j, 1), nb(n, j, -1));
    let dxx = (f.at(ie, j) - 2.0 * c + f.at(iw, j)) / h2;
    let dyy = (f.at(i, jn) - 2.0 * c + f.at(i, js)) / h2;
    let dxy = (f.at(ie, jn) - f.at(ie, js) - f.at(iw, jn) + f.at(iw, js)) / (4.0 * h2);
    [dxx, dxy, dyy]
}

#[derive(PartialEq)]
struct Trial(f64, usize);

impl Eq for Trial {}

impl PartialOrd for Trial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Trial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// First-order fast marching of `|d|` outward from the cells marked `known`.
fn fast_march(grid: Grid, dist: &mut [f64], known: &mut [bool]) {
    let n = grid.n();
    let h = grid.h();
    let solve = |dist: &[f64], known: &[bool], k: usize| -> f64 {
        let (i, j) = (k % n, k / n);
        let pick = |a: usize, b: usize| {
            let va = if known[a] { dist[a] } else { f64::INFINITY };
            let vb = if known[b] { dist[b] } else { f64::INFINITY };
            va.min(vb)
        };
        let a = pick(j * n + nb(n, i, -1), j * n + nb(n, i, 1));
        let b = pick(nb(n, j, -1) * n + i, nb(n, j, 1) * n + i);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if !hi.is_finite() || hi - lo >= h {
            lo + h
        } else {
            0.5 * (a + b + (2.0 * h * h - (a - b) * (a - b)).sqrt())
        }
    };
    let mut heap = BinaryHeap::new();
    for k in 0..dist.len() {
        if !known[k] {
            continue;
        }
        let (i, j) = (k % n, k / n);
        for q in [
            j * n + nb(n, i, -1),
            j * n + nb(n, i, 1),
            nb(n, j, -1) * n + i,
            nb(n, j, 1) * n + i,
        ] {
            if !known[q] {
                let v = solve(dist, known, q);
                if v < dist[q] {
                    dist[q] = v;
                    heap.push(Trial(v, q));
                }
            }
        }
    }
    while let Some(Trial(v, k)) = heap.pop() {
        if known[k] || v > dist[k] {
            continue;
        }
        known[k] = true;
        let (i, j) = (k % n, k / n);
        for q in [
            j * n + nb(n, i, -1),
            j * n + nb(n, i, 1),
            nb(n, j, -1) * n + i,
            nb(n, j, 1) * n + i,
        ] {
            if !known[q] {
                let w = solve(dist, known, q);
                if w < dist[q] {
                    dist[q] = w;
                    heap.push(Trial(w, q));
                }
            }
        }
    }
}

/// Inside test for every cell by horizontal scanlines against the curve and
/// its eight neighbouring periodic images.
fn inside_mask(points: &[[f64; 2]], grid: Grid) -> Vec<bool> {
    let n = grid.n();
    let h = grid.h();
    let m = points.len();
    let mut mask = vec![false; grid.cells()];
    mask.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        let y = (j as f64 + 0.5) * h;
        let mut xs = Vec::new();
        for sy in [-1.0, 0.0, 1.0] {
            for k in 0..m {
                let (a, b) = (points[k], points[(k + 1) % m]);
                let (ay, by) = (a[1] + sy, b[1] + sy);
                if (ay > y) != (by > y) {
                    let xc = a[0] + (y - ay) * (b[0] - a[0]) / (by - ay);
                    for sx in [-1.0, 0.0, 1.0] {
                        xs.push(xc + sx);
                    }
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        let mut left = 0;
        for (i, cell) in row.iter_mut().enumerate() {
            let x = (i as f64 + 0.5) * h;
            while left < xs.len() && xs[left] < x {
                left += 1;
            }
            *cell = left % 2 == 1;
        }
    });
    mask
}

/// Signed distance to `curve` with the default band of `8h`.
pub fn signed_distance(curve: &FrontCurve, grid: Grid) -> Result<SignedDistanceField> {
    signed_distance_band(curve, grid, 8.0 * grid.h())
}

/// Distances are computed directly (nearest segment, then refined to the
/// spline foot point) for cells within `band` of the curve and by fast
/// marching beyond it.
pub fn signed_distance_band(curve: &FrontCurve, grid: Grid, band: f64) -> Result<SignedDistanceField> {
    let n = grid.n();
    let h = grid.h();
    let c = curve.centroid();
    let shift = [c[0].floor(), c[1].floor()];
    let pts: Vec<[f64; 2]> = curve.points.iter().map(|p| [p[0] - shift[0], p[1] - shift[1]]).collect();
    let m = pts.len();
    let spline = CurveSpline::new(&pts)?;
    let knots = spline.knots().to_vec();

    // nearest segment per cell: (distance, segment, fraction, unwrapped cell position)
    let mut best: Vec<(f64, usize, f64, [f64; 2])> = vec![(f64::INFINITY, 0, 0.0, [0.0, 0.0]); grid.cells()];
    for k in 0..m {
        let (a, b) = (pts[k], pts[(k + 1) % m]);
        let ab = [b[0] - a[0], b[1] - a[1]];
        let l2 = ab[0] * ab[0] + ab[1] * ab[1];
        let lo_i = ((a[0].min(b[0]) - band) / h - 0.5).floor() as i64;
        let hi_i = ((a[0].max(b[0]) + band) / h - 0.5).ceil() as i64;
        let lo_j = ((a[1].min(b[1]) - band) / h - 0.5).floor() as i64;
        let hi_j = ((a[1].max(b[1]) + band) / h - 0.5).ceil() as i64;
        for j in lo_j..=hi_j {
            for i in lo_i..=hi_i {
                let p = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
                let ap = [p[0] - a[0], p[1] - a[1]];
                let s = ((ap[0] * ab[0] + ap[1] * ab[1]) / l2).clamp(0.0, 1.0);
                let d = (ap[0] - s * ab[0]).hypot(ap[1] - s * ab[1]);
                let idx = (j.rem_euclid(n as i64) as usize) * n + i.rem_euclid(n as i64) as usize;
                if d < best[idx].0 {
                    best[idx] = (d, k, s, p);
                }
            }
        }
    }

    let inside = inside_mask(&pts, grid);
    let mut dist = vec![f64::INFINITY; grid.cells()];
    let mut known = vec![false; grid.cells()];
    let mut sign = vec![0.0; grid.cells()];
    let period = spline.period();
    for idx in 0..grid.cells() {
        let (d_seg, k, s, p) = best[idx];
        sign[idx] = if inside[idx] { -1.0 } else { 1.0 };
        if d_seg > band {
            continue;
        }
        // Newton on (r(t) - p) . r'(t) = 0 from the segment foot point
        let seg = if k + 1 < m { knots[k + 1] - knots[k] } else { period - knots[k] };
        let t0 = knots[k] + s * seg;
        let mut t = t0;
        let mut converged = false;
        for _ in 0..12 {
            let (r, d1, d2) = spline.eval(t);
            let diff = [r[0] - p[0], r[1] - p[1]];
            let g = diff[0] * d1[0] + diff[1] * d1[1];
            let gp = d1[0] * d1[0] + d1[1] * d1[1] + diff[0] * d2[0] + diff[1] * d2[1];
            if !(gp > 0.0) {
                break;
            }
            let step = (g / gp).clamp(-seg, seg);
            t -= step;
            if step.abs() <= 1e-13 * period {
                converged = true;
                break;
            }
        }
        let (r, d1, _) = spline.eval(t);
        let d_spline = (r[0] - p[0]).hypot(r[1] - p[1]);
        let d = if converged && (t - t0).abs() <= 2.0 * seg && d_spline.is_finite() {
            // outward normal is (y', -x'); parity against the polygon can be
            // wrong between a chord and the curve
            let side = (p[0] - r[0]) * d1[1] - (p[1] - r[1]) * d1[0];
            if side != 0.0 {
                sign[idx] = side.signum();
            }
            d_spline
        } else {
            d_seg
        };
        dist[idx] = d;
        known[idx] = true;
    }
    if !known.iter().any(|&k| k) {
        return Err(Error::DegenerateCurve("curve does not come near any cell".into()));
    }
    fast_march(grid, &mut dist, &mut known);
    let values = dist.iter().zip(&sign).map(|(d, s)| d * s).collect();
    Ok(SignedDistanceField {
        field: ScalarField {
            grid,
            values,
            t: curve.t,
        },
        steps: 0,
    })
}

/// `0.9 h^2 / max_n (2 (mu11 + mu22) + |mu12 + mu21| / 2)` over 64 normals.
pub fn level_set_dt<M: Mobility + ?Sized>(mob: &M, grid: Grid) -> f64 {
    let worst = (0..64)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            let m = mob.mu([th.cos(), th.sin()]);
            2.0 * (m[0][0].abs() + m[1][1].abs()) + 0.5 * (m[0][1] + m[1][0]).abs()
        })
        .fold(0.0, f64::max);
    0.9 * grid.h() * grid.h() / worst.max(1e-300)
}

/// Level-set settings.
#[derive(Debug, Clone, Copy)]
pub struct LevelSetOptions {
    /// Cells with `|d|` above this are frozen (in units of `h`).
    pub band_cells: f64,
    /// Cells within this many `h` of the front must have `|grad d| >= 0.5`.
    pub guard_cells: f64,
    pub reinit_every: usize,
    pub reinit_iterations: usize,
}

impl Default for LevelSetOptions {
    fn default() -> Self {
        LevelSetOptions {
            band_cells: 12.0,
            guard_cells: 6.0,
            reinit_every: 25,
            reinit_iterations: 20,
        }
    }
}

/// One explicit step of `d_t = sum mu_ij(grad d/|grad d|) d_ij d`, with
/// reinitialisation every `reinit_every` steps.
pub fn step_level_set<M: Mobility + ?Sized>(
    d: &mut SignedDistanceField,
    mob: &M,
    dt: f64,
    reinit_every: usize,
) -> Result<()> {
    let opts = LevelSetOptions {
        reinit_every,
        ..Default::default()
    };
    step_level_set_with(d, mob, dt, &opts)
}

pub fn step_level_set_with<M: Mobility + ?Sized>(
    d: &mut SignedDistanceField,
    mob: &M,
    dt: f64,
    opts: &LevelSetOptions,
) -> Result<()> {
    let g = d.field.grid;
    let n = g.n();
    let h = g.h();
    let band = opts.band_cells * h;
    let guard = opts.guard_cells * h;
    let f = &d.field;
    let rows: Vec<(Vec<f64>, usize)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut row = f.values[j * n..(j + 1) * n].to_vec();
            let mut bad = 0;
            for (i, v) in row.iter_mut().enumerate() {
                let c = f.at(i, j);
                if c.abs() > band {
                    continue;
                }
                let (gx, gy) = central_gradient(f, i, j);
                let norm = gx.hypot(gy);
                if norm < 0.5 {
                    if c.abs() <= guard {
                        bad += 1;
                    }
                    continue;
                }
                let nrm = [gx / norm, gy / norm];
                let mu = mob.mu(nrm);
                *v = c + dt * projected_form(&mu, hessian(f, i, j), nrm);
            }
            (row, bad)
        })
        .collect();
    let bad: usize = rows.iter().map(|r| r.1).sum();
    if bad > 0 {
        return Err(Error::GradientDegeneracy { count: bad });
    }
    let values: Vec<f64> = rows.into_iter().flat_map(|r| r.0).collect();
    let t = d.field.t + dt;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Blowup { t });
    }
    d.field.values = values;
    d.field.t = t;
    d.steps += 1;
    if opts.reinit_every > 0 && d.steps % opts.reinit_every == 0 {
        reinitialize(&mut d.field, opts.reinit_iterations);
    }
    Ok(())
}

/// Evolves to `t_end` with the stable level-set step.
pub fn simulate_level_set<M: Mobility + ?Sized>(
    d0: &SignedDistanceField,
    mob: &M,
    t_end: f64,
    opts: &LevelSetOptions,
) -> Result<SignedDistanceField> {
    let dt = level_set_dt(mob, d0.grid());
    let mut d = d0.clone();
    let target = d.field.t + t_end;
    while target - d.field.t > 1e-14 {
        let this = dt.min(target - d.field.t);
        step_level_set_with(&mut d, mob, this, opts)?;
    }
    d.field.t = target;
    Ok(d)
}

/// Relaxation of `phi_tau + S(phi0)(|grad phi| - 1) = 0` with Godunov
/// upwinding and the subcell fix next to the zero set, pseudo-step `h/2`.
pub fn reinitialize(phi: &mut ScalarField, iterations: usize) {
    let g = phi.grid;
    let n = g.n();
    let h = g.h();
    let dtau = 0.5 * h;
    let phi0 = phi.values.clone();
    let at0 = |i: usize, j: usize| phi0[j * n + i];

    // subcell data for cells adjacent to a sign change
    let near: Vec<Option<f64>> = (0..g.cells())
        .map(|k| {
            let (i, j) = (k % n, k / n);
            let c = at0(i, j);
            let (e, w, no, so) = (at0(nb(n, i, 1), j), at0(nb(n, i, -1), j), at0(i, nb(n, j, 1)), at0(i, nb(n, j, -1)));
            let crosses = [e, w, no, so].iter().any(|&v| v * c <= 0.0) || c == 0.0;
            if !crosses {
                return None;
            }
            let grad = (0.5 * (e - w)).hypot(0.5 * (no - so));
            let delta = grad
                .max((e - c).abs())
                .max((c - w).abs())
                .max((no - c).abs())
                .max((c - so).abs())
                .max(1e-12 * h);
            Some(h * c / delta)
        })
        .collect();

    for _ in 0..iterations {
        let cur = phi.values.clone();
        let at = |i: usize, j: usize| cur[j * n + i];
        phi.values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                let k = j * n + i;
                let c = at(i, j);
                let s0 = phi0[k];
                if let Some(dist) = near[k] {
                    let sg = if s0 > 0.0 {
                        1.0
                    } else if s0 < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    *v = c - dtau / h * (sg * c.abs() - dist);
                    continue;
                }
                let a = (c - at(nb(n, i, -1), j)) / h;
                let b = (at(nb(n, i, 1), j) - c) / h;
                let cc = (c - at(i, nb(n, j, -1))) / h;
                let d = (at(i, nb(n, j, 1)) - c) / h;
                let grad = if s0 > 0.0 {
                    (a.max(0.0).powi(2).max(b.min(0.0).powi(2)) + cc.max(0.0).powi(2).max(d.min(0.0).powi(2))).sqrt()
                } else {
                    (a.min(0.0).powi(2).max(b.max(0.0).powi(2)) + cc.min(0.0).powi(2).max(d.max(0.0).powi(2))).sqrt()
                };
                let s = s0 / (s0 * s0 + h * h).sqrt();
                *v = c - dtau * s * (grad - 1.0);
            }
        });
    }
}

/// `sum_ij mu_ij (H P)_ij` with `P = I - n n^T`; equals `sum_ij mu_ij H_ij`
/// when `H` is the Hessian of a distance function (then `H n = 0`), and stays
/// geometric when `|grad d|` drifts from one.
#[inline]
fn projected_form(mu: &[[f64; 2]; 2], h: [f64; 3], n: [f64; 2]) -> f64 {
    let [hxx, hxy, hyy] = h;
    let hn = [hxx * n[0] + hxy * n[1], hxy * n[0] + hyy * n[1]];
    let hm = [[hxx, hxy], [hxy, hyy]];
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            acc += mu[i][j] * (hm[i][j] - hn[i] * n[j]);
        }
    }
    acc
}

/// Bilinear interpolation of a per-cell quantity at `p` (periodic).
fn bilinear<F: Fn(usize, usize) -> f64>(grid: Grid, p: [f64; 2], f: F) -> f64 {
    let n = grid.n();
    let h = grid.h();
    let x = p[0].rem_euclid(1.0) / h - 0.5;
    let y = p[1].rem_euclid(1.0) / h - 0.5;
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let i0 = (x0 as i64).rem_euclid(n as i64) as usize;
    let j0 = (y0 as i64).rem_euclid(n as i64) as usize;
    let (i1, j1) = ((i0 + 1) % n, (j0 + 1) % n);
    (1.0 - fx) * (1.0 - fy) * f(i0, j0) + fx * (1.0 - fy) * f(i1, j0) + (1.0 - fx) * fy * f(i0, j1) + fx * fy * f(i1, j1)
}

/// `-sum_ij mu_ij(n) d_i n_j` at `p`, with `n = grad d/|grad d|` and `d_i n_j`
/// taken from the grid Hessian of the signed distance (bilinearly interpolated).
pub fn raw_normal_velocity<M: Mobility + ?Sized>(d: &SignedDistanceField, mob: &M, p: [f64; 2]) -> f64 {
    let f = &d.field;
    let g = f.grid;
    let gx = bilinear(g, p, |i, j| central_gradient(f, i, j).0);
    let gy = bilinear(g, p, |i, j| central_gradient(f, i, j).1);
    let norm = gx.hypot(gy);
    let hs = [0, 1, 2].map(|c| bilinear(g, p, |i, j| hessian(f, i, j)[c]));
    let mu = mob.mu([gx / norm, gy / norm]);
    -(mu[0][0] * hs[0] + (mu[0][1] + mu[1][0]) * hs[1] + mu[1][1] * hs[2]) / norm
}

/// Distance from `p` to segment `[a, b]` using the minimal periodic image of `p - a`.
fn torus_point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let mut ap = [p[0] - a[0], p[1] - a[1]];
    ap[0] -= ap[0].round();
    ap[1] -= ap[1].round();
    let ab = [b[0] - a[0], b[1] - a[1]];
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    let s = if l2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (ap[0] - s * ab[0]).hypot(ap[1] - s * ab[1])
}

fn directed_hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let m = b.len();
    a.par_iter()
        .map(|p| {
            (0..m)
                .map(|k| torus_point_segment(*p, b[k], b[(k + 1) % m]))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Symmetric Hausdorff distance between closed polylines on the unit torus,
/// vertex-to-segment.
pub fn hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}
