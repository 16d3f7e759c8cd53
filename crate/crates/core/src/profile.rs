//! Standing-wave profile `U_0(z; e)` and the linearized problem around it.
//!
//! The profile solves `(a_e(U_0) U_0')' + f(U_0) = 0`, `U_0(0) = alpha`,
//! `U_0(+-inf) = alpha_+-`. Multiplying by `a_e(U_0) U_0'` gives the first
//! order reduction `a_e(U_0) U_0' = sqrt(W_e(U_0))`, which is what gets
//! integrated here.

use crate::error::{Error, Result};
use crate::model::{Directional, EDerivative, ModelSpec};
use crate::quadrature::{cumulative_trapezoid, integrate, trapezoid, QuadOptions};

/// Default half-width of the `z` grid.
pub const DEFAULT_Z_MAX: f64 = 12.0;
/// Default `z` step.
pub const DEFAULT_H_Z: f64 = 1e-3;
/// Below this `W_e` the slope is frozen to zero.
const W_FREEZE: f64 = 1e-16;
/// Largest residual accepted by [`solve_linearized`].
pub const SOLVABILITY_TOL: f64 = 1e-6;

/// Tabulated standing wave.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    pub e: Vec<f64>,
    pub h_z: f64,
    pub z: Vec<f64>,
    pub u0: Vec<f64>,
    pub u0z: Vec<f64>,
    /// `U_0''` from the equation: `-(f(U_0) + a_e'(U_0) U_0'^2) / a_e(U_0)`.
    pub u0zz: Vec<f64>,
    /// `a_e(U_0(z))`.
    pub a: Vec<f64>,
    /// `sqrt(W_e(U_0(z))) = (A_e(U_0))_z`.
    pub sqrt_w: Vec<f64>,
    /// `f'(U_0(z))`.
    pub f_prime: Vec<f64>,
    pub alpha_minus: f64,
    pub alpha_mid: f64,
    pub alpha_plus: f64,
    /// Fitted exponential decay rate of `alpha_+ - U_0` on `[Z/2, Z]`.
    pub decay_rate: f64,
    /// Coefficient of determination of that log-linear fit.
    pub decay_r2: f64,
    /// Same fit for `U_0 - alpha_-` on `[-Z, -Z/2]`.
    pub decay_rate_minus: f64,
    pub decay_r2_minus: f64,
}

impl WaveProfile {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn z_max(&self) -> f64 {
        *self.z.last().expect("non-empty")
    }

    /// `z,u0,u0z` per grid point.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut s = String::from("z,u0,u0z\n");
        for k in 0..self.len() {
            s.push_str(&format!("{},{},{}\n", self.z[k], self.u0[k], self.u0z[k]));
        }
        std::fs::write(path, s)?;
        Ok(())
    }

    /// Index of `z = 0`.
    pub fn center(&self) -> usize {
        self.z.len() / 2
    }

    /// `U_0(z)` by cubic Hermite interpolation, clamped to `alpha_+-`
    /// outside the grid.
    pub fn eval(&self, z: f64) -> f64 {
        let z0 = self.z[0];
        let zn = self.z_max();
        if z <= z0 {
            return if z < z0 - self.h_z { self.alpha_minus } else { self.u0[0] };
        }
        if z >= zn {
            return if z > zn + self.h_z { self.alpha_plus } else { self.u0[self.len() - 1] };
        }
        let x = (z - z0) / self.h_z;
        let i = (x.floor() as usize).min(self.len() - 2);
        let t = x - i as f64;
        let (p0, p1) = (self.u0[i], self.u0[i + 1]);
        let (m0, m1) = (self.u0z[i] * self.h_z, self.u0z[i + 1] * self.h_z);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * m1
    }

    /// Largest deviation of the stored slope from `sqrt(W_e(U_0))/a_e(U_0)`
    /// recomputed through `dir`.
    pub fn slope_residual(&self, dir: &Directional<'_>) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (u, uz) in self.u0.iter().zip(&self.u0z) {
            let w = dir.w_raw(*u)?.max(0.0);
            worst = worst.max((uz - w.sqrt() / dir.a(*u)).abs());
        }
        Ok(worst)
    }

    /// Checks the profile invariants: normalization, strict monotonicity
    /// and range.
    pub fn check_invariants(&self) -> Result<()> {
        let c = self.center();
        if (self.u0[c] - self.alpha_mid).abs() > 1e-10 {
            return Err(Error::ToleranceFailure(format!("U0(0) = {}", self.u0[c])));
        }
        for w in self.u0.windows(2) {
            if w[1] < w[0] {
                return Err(Error::ToleranceFailure("profile not monotone".into()));
            }
        }
        if self.u0[0] < self.alpha_minus || self.u0[self.len() - 1] > self.alpha_plus {
            return Err(Error::ToleranceFailure("profile leaves [alpha_-, alpha_+]".into()));
        }
        Ok(())
    }
}

fn slope(dir: &Directional<'_>, u: f64) -> Result<f64> {
    let w = dir.w_raw(u)?;
    if w < W_FREEZE {
        return Ok(0.0);
    }
    Ok(w.sqrt() / dir.a(u))
}

/// Integrates `U' = sqrt(W_e(U)) / a_e(U)` by RK4 from `U(0) = alpha` in both
/// directions over `[-z_max, z_max]` with step `h_z`.
pub fn solve_standing_wave(spec: &ModelSpec, e: &[f64], z_max: f64, h_z: f64) -> Result<WaveProfile> {
    if z_max < 10.0 || h_z > 1e-2 || h_z <= 0.0 {
        return Err(Error::Config(format!(
            "standing wave needs z_max >= 10 and 0 < h_z <= 1e-2 (got {z_max}, {h_z})"
        )));
    }
    let dir = spec.direction(e)?;
    let r = &spec.reaction;
    let half = (z_max / h_z).round() as usize;
    let n = 2 * half + 1;
    let mut u0 = vec![0.0; n];
    u0[half] = r.alpha_mid;

    for sign in [1.0f64, -1.0] {
        let h = sign * h_z;
        let target = if sign > 0.0 { r.alpha_plus } else { r.alpha_minus };
        let mut u = r.alpha_mid;
        for k in 1..=half {
            let k1 = slope(&dir, u)?;
            let k2 = slope(&dir, clamp_to(u + 0.5 * h * k1, target, sign))?;
            let k3 = slope(&dir, clamp_to(u + 0.5 * h * k2, target, sign))?;
            let k4 = slope(&dir, clamp_to(u + h * k3, target, sign))?;
            let next = clamp_to(u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), target, sign);
            if (next - u) * sign < 0.0 || !next.is_finite() {
                return Err(Error::StallNearRoot { z: sign * k as f64 * h_z });
            }
            u = next;
            let idx = if sign > 0.0 { half + k } else { half - k };
            u0[idx] = u;
        }
    }

    let z: Vec<f64> = (0..n).map(|k| (k as f64 - half as f64) * h_z).collect();
    let a_prime = spec.diffusivity.quad_form_poly(e).derivative();
    let mut u0z = Vec::with_capacity(n);
    let mut u0zz = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut sqrt_w = Vec::with_capacity(n);
    let mut f_prime = Vec::with_capacity(n);
    for &u in &u0 {
        let au = dir.a(u);
        let sw = dir.w_raw(u)?.max(0.0).sqrt();
        let uz = sw / au;
        u0z.push(uz);
        u0zz.push(-(r.f(u) + a_prime.eval(u) * uz * uz) / au);
        a.push(au);
        sqrt_w.push(sw);
        f_prime.push(r.f_prime(u));
    }

    let fit_plus = tail_fit(&z, &u0, half + half / 2, n, |u| r.alpha_plus - u);
    let fit_minus = tail_fit(&z, &u0, 0, half / 2 + 1, |u| u - r.alpha_minus);

    Ok(WaveProfile {
        e: e.to_vec(),
        h_z,
        z,
        u0,
        u0z,
        u0zz,
        a,
        sqrt_w,
        f_prime,
        alpha_minus: r.alpha_minus,
        alpha_mid: r.alpha_mid,
        alpha_plus: r.alpha_plus,
        decay_rate: -fit_plus.0,
        decay_r2: fit_plus.1,
        decay_rate_minus: fit_minus.0,
        decay_r2_minus: fit_minus.1,
    })
}

/// Default-resolution standing wave.
pub fn standing_wave(spec: &ModelSpec, e: &[f64]) -> Result<WaveProfile> {
    solve_standing_wave(spec, e, DEFAULT_Z_MAX, DEFAULT_H_Z)
}

fn clamp_to(u: f64, target: f64, sign: f64) -> f64 {
    if (u - target) * sign > 0.0 {
        target
    } else {
        u
    }
}

/// Least-squares fit of `ln(gap(u))` against `z` on `lo..hi`; returns
/// `(slope, r^2)`.
fn tail_fit(z: &[f64], u: &[f64], lo: usize, hi: usize, gap: impl Fn(f64) -> f64) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = (lo..hi)
        .filter_map(|k| {
            let g = gap(u[k]);
            (g > 0.0).then(|| (z[k], g.ln()))
        })
        .collect();
    if pts.len() < 3 {
        return (f64::NAN, 0.0);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// `int G(z) (A_e(U_0))_z dz` by the trapezoid rule on the profile grid.
pub fn solvability_residual(profile: &WaveProfile, g: &[f64]) -> f64 {
    assert_eq!(g.len(), profile.len(), "g must be tabulated on the profile grid");
    let prod: Vec<f64> = g.iter().zip(&profile.sqrt_w).map(|(a, b)| a * b).collect();
    trapezoid(&prod, profile.h_z)
}

/// Bounded solution of `(a_e(U_0) psi)'' + f'(U_0) psi = G`, `psi(0) = 0`,
/// through the reduction-of-order formula
/// `psi = U_0' int_0^z (A_z)^{-2} (int_{-inf}^xi G A_z) dxi`.
///
/// The inner integral is accumulated from whichever end of the grid is
/// nearer, which is exact when the solvability condition holds and keeps
/// its relative accuracy in the tails.
pub fn solve_linearized(profile: &WaveProfile, g: &[f64]) -> Result<Vec<f64>> {
    let residual = solvability_residual(profile, g);
    if residual.abs() > SOLVABILITY_TOL {
        return Err(Error::NotSolvable { residual });
    }
    let n = profile.len();
    let c = profile.center();
    let h = profile.h_z;
    let ga: Vec<f64> = g.iter().zip(&profile.sqrt_w).map(|(a, b)| a * b).collect();

    let from_left = cumulative_trapezoid(&ga, h);
    let rev: Vec<f64> = ga.iter().rev().copied().collect();
    let from_right = cumulative_trapezoid(&rev, h);
    let mut inner = vec![0.0; n];
    for k in 0..n {
        inner[k] = if k <= c { from_left[k] } else { -from_right[n - 1 - k] };
    }

    let mut j = vec![0.0; n];
    for k in 0..n {
        let az = profile.sqrt_w[k];
        let den = az * az;
        if den < 1e-290 {
            if inner[k].abs() > 0.0 {
                return Err(Error::InnerSingularity { z: profile.z[k] });
            }
            continue;
        }
        j[k] = inner[k] / den;
    }

    // outer integral from z = 0 in both directions
    let mut outer = vec![0.0; n];
    for k in c + 1..n {
        outer[k] = outer[k - 1] + 0.5 * h * (j[k - 1] + j[k]);
    }
    for k in (0..c).rev() {
        outer[k] = outer[k + 1] - 0.5 * h * (j[k + 1] + j[k]);
    }
    Ok(outer.iter().zip(&profile.u0z).map(|(o, uz)| o * uz).collect())
}

/// Finite-difference residual of `(a psi)'' + f'(U_0) psi - G` on the
/// interior of the grid restricted to `|z| <= z_cut`.
pub fn linearized_residual(profile: &WaveProfile, psi: &[f64], g: &[f64], z_cut: f64) -> f64 {
    let h2 = profile.h_z * profile.h_z;
    let mut worst: f64 = 0.0;
    for k in 1..profile.len() - 1 {
        if profile.z[k].abs() > z_cut {
            continue;
        }
        let v = |i: usize| profile.a[i] * psi[i];
        let lhs = (v(k + 1) - 2.0 * v(k) + v(k - 1)) / h2 + profile.f_prime[k] * psi[k];
        worst = worst.max((lhs - g[k]).abs());
    }
    worst
}

/// `U_{0 e_j}(z)` from
/// `-U_{0e_j} = U_0' int_alpha^{U_0} d_{e_j}(a_e / sqrt(W_e)) ds`.
///
/// The `s`-integral is accumulated panel by panel along the monotone profile
/// outwards from `z = 0`; each panel `[U_0(z_k), U_0(z_{k+1})]` stays away
/// from the roots, so the logarithmic growth of the integral near
/// `alpha_+-` is picked up without evaluating at a root.
pub fn direction_derivative_profile(
    spec: &ModelSpec,
    profile: &WaveProfile,
    j: usize,
    conv: EDerivative,
) -> Result<Vec<f64>> {
    if j >= spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: j + 1,
        });
    }
    let dir = spec.direction(&profile.e)?;
    let integrand = |s: f64| -> f64 {
        match dir.ratio_terms(s, conv) {
            Ok((_, Some((_, ratio)))) => ratio[j],
            _ => 0.0,
        }
    };
    let opts = QuadOptions {
        abs_tol: 1e-8,
        rel_tol: 1e-10,
        max_intervals: 200,
    };
    let n = profile.len();
    let c = profile.center();
    let mut cum = vec![0.0; n];
    for k in c + 1..n {
        let (lo, hi) = (profile.u0[k - 1], profile.u0[k]);
        let piece = if hi > lo { integrate(integrand, lo, hi, opts)?.value } else { 0.0 };
        cum[k] = cum[k - 1] + piece;
    }
    for k in (0..c).rev() {
        let (lo, hi) = (profile.u0[k], profile.u0[k + 1]);
        let piece = if hi > lo { integrate(integrand, lo, hi, opts)?.value } else { 0.0 };
        cum[k] = cum[k + 1] - piece;
    }
    Ok(cum.iter().zip(&profile.u0z).map(|(i, uz)| -uz * i).collect())
}

/// Right-hand side `-(d_{e_j} a_e(U_0) U_0')'` of the equation satisfied by
/// `U_{0e_j}`, evaluated analytically on the grid.
pub fn direction_derivative_rhs(
    spec: &ModelSpec,
    profile: &WaveProfile,
    j: usize,
    conv: EDerivative,
) -> Result<Vec<f64>> {
    let dir = spec.direction(&profile.e)?;
    let polys = spec.diffusivity.apply_poly(&profile.e);
    let e = &profile.e;
    let mut out = Vec::with_capacity(profile.len());
    for k in 0..profile.len() {
        let u = profile.u0[k];
        let mut ga = dir.grad_a(u);
        let mut ga_prime: Vec<f64> = polys.iter().map(|p| 2.0 * p.derivative().eval(u)).collect();
        conv.apply(e, &mut ga);
        conv.apply(e, &mut ga_prime);
        let uz = profile.u0z[k];
        out.push(-(ga_prime[j] * uz * uz + ga[j] * profile.u0zz[k]));
    }
    Ok(out)
}
