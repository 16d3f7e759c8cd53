//! Mobility tensor of the limit flow.
//!
//! For a unit direction `e`:
//!
//! ```text
//! lambda(e)          = int sqrt(W_e) ds
//! lambda mu1_ij(e)   = int D_ij(s) sqrt(W_e) ds
//! lambda mu2_ij(e)   = -1/2 int d_{e_i} W_e  d_{e_j}(a_e / sqrt(W_e)) ds
//! ```
//!
//! all over `[alpha_-, alpha_+]`. `d_{e_j}(a_e/sqrt(W_e))` is expanded as
//! `d_j a / sqrt(W) - a d_j W / (2 W^{3/2})`; both pieces blow up like
//! `1/(s - alpha_+-)` at the roots, but `d_{e_i} W_e` vanishes quadratically
//! there, so the product is bounded.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EDerivative, ModelSpec};
use crate::quadrature::{integrate, QuadOptions};
use crate::spline::PeriodicSpline;

const MU_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-12,
    rel_tol: 1e-12,
    max_intervals: 400,
};

/// `lambda(e) = int_{alpha_-}^{alpha_+} sqrt(W_e(s)) ds`.
pub fn lambda_e(spec: &ModelSpec, e: &[f64]) -> Result<f64> {
    let dir = spec.direction(e)?;
    let r = &spec.reaction;
    let v = integrate(
        |s| dir.w_raw(s).map(|w| w.max(0.0).sqrt()).unwrap_or(f64::NAN),
        r.alpha_minus,
        r.alpha_plus,
        MU_QUAD,
    )?
    .value;
    if !(v > 0.0) {
        return Err(Error::ToleranceFailure(format!("lambda(e) = {v} is not positive")));
    }
    Ok(v)
}

/// `lambda`, `mu1`, `mu2` and `mu = mu1 + mu2` at one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct MuTensor {
    pub lambda: f64,
    pub mu1: DMatrix<f64>,
    pub mu2: DMatrix<f64>,
    pub mu: DMatrix<f64>,
}

impl MuTensor {
    /// `max |mu_ij - mu_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.mu - self.mu.transpose()).amax()
    }

    /// `eta^T mu eta`.
    pub fn form(&self, eta: &[f64]) -> f64 {
        let n = eta.len();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.mu[(i, j)] * eta[i] * eta[j];
            }
        }
        acc
    }
}

/// Full mobility tensor at direction `e` using the `e`-derivative
/// convention `conv`.
pub fn mu_tensor(spec: &ModelSpec, e: &[f64], conv: EDerivative) -> Result<MuTensor> {
    let n = spec.dim();
    let dir = spec.direction(e)?;
    let r = &spec.reaction;
    let (lo, hi) = (r.alpha_minus, r.alpha_plus);
    let lambda = lambda_e(spec, e)?;

    let mut mu1 = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let d = spec.diffusivity.entry_poly(i, j);
            let v = integrate(
                |s| d.eval(s) * dir.w_raw(s).map(|w| w.max(0.0).sqrt()).unwrap_or(f64::NAN),
                lo,
                hi,
                MU_QUAD,
            )?
            .value
                / lambda;
            mu1[(i, j)] = v;
            mu1[(j, i)] = v;
        }
    }

    let mut mu2 = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let integrand = |s: f64| -> f64 {
                match dir.ratio_terms(s, conv) {
                    Ok((_, Some((gw, ratio)))) => gw[i] * ratio[j],
                    Ok((_, None)) => 0.0,
                    Err(_) => f64::NAN,
                }
            };
            let v = match integrate(integrand, lo, hi, MU_QUAD) {
                Ok(q) => q.value,
                Err(Error::QuadratureFailure { .. }) => {
                    let s = if integrand(lo + 1e-9).abs() > integrand(hi - 1e-9).abs() { lo } else { hi };
                    return Err(Error::SingularEndpoint { s });
                }
                Err(e) => return Err(e),
            };
            if !v.is_finite() {
                return Err(Error::SingularEndpoint { s: lo });
            }
            mu2[(i, j)] = -0.5 * v / lambda;
        }
    }
    let mu = &mu1 + &mu2;
    Ok(MuTensor { lambda, mu1, mu2, mu })
}

/// `D - d(sqrt a_e) (x) d(sqrt a_e)` for an `s`-independent diffusivity,
/// where `d(sqrt a_e) = D e / sqrt(a_e)` converted by `conv`.
pub fn constant_d_mobility(d: &DMatrix<f64>, e: &[f64], conv: EDerivative) -> DMatrix<f64> {
    let n = e.len();
    let de: Vec<f64> = (0..n).map(|i| (0..n).map(|k| d[(i, k)] * e[k]).sum()).collect();
    let a: f64 = (0..n).map(|i| e[i] * de[i]).sum();
    let mut g: Vec<f64> = de.iter().map(|v| v / a.sqrt()).collect();
    conv.apply(e, &mut g);
    DMatrix::from_fn(n, n, |i, j| d[(i, j)] - g[i] * g[j])
}

/// Tangential quadratic form `eta^T (lambda mu) eta` with its lower bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TangentialForm {
    pub value: f64,
    /// `int D_min(s) sqrt(W_e(s)) ds`, `D_min` the smallest eigenvalue of `D(s)`.
    pub lower_bound: f64,
}

/// `eta^T (lambda(e) mu(e)) eta` for a unit `eta` orthogonal to `e`.
pub fn tangential_form(spec: &ModelSpec, e: &[f64], eta: &[f64], conv: EDerivative) -> Result<TangentialForm> {
    let norm = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > crate::model::UNIT_TOL {
        return Err(Error::NotUnit { norm });
    }
    let dot: f64 = e.iter().zip(eta).map(|(a, b)| a * b).sum();
    if dot.abs() > 1e-9 {
        return Err(Error::NotTangential { dot: dot.abs() });
    }
    let t = mu_tensor(spec, e, conv)?;
    let dir = spec.direction(e)?;
    let r = &spec.reaction;
    let lower_bound = integrate(
        |s| {
            spec.diffusivity.min_eigenvalue(s) * dir.w_raw(s).map(|w| w.max(0.0).sqrt()).unwrap_or(f64::NAN)
        },
        r.alpha_minus,
        r.alpha_plus,
        MU_QUAD,
    )?
    .value;
    Ok(TangentialForm {
        value: t.lambda * t.form(eta),
        lower_bound,
    })
}

/// Mobility as seen by the planar flow solvers.
pub trait Mobility: Sync {
    /// `mu(n)` for a unit normal `n`, row-major 2x2.
    fn mu(&self, n: [f64; 2]) -> [[f64; 2]; 2];

    /// `tau^T mu(n) tau` with `tau = (-n_y, n_x)`.
    fn tangential(&self, n: [f64; 2]) -> f64 {
        let m = self.mu(n);
        let t = [-n[1], n[0]];
        m[0][0] * t[0] * t[0] + (m[0][1] + m[1][0]) * t[0] * t[1] + m[1][1] * t[1] * t[1]
    }
}

/// Direction-independent mobility matrix.
#[derive(Debug, Clone, Copy)]
pub struct ConstantMobility(pub [[f64; 2]; 2]);

impl ConstantMobility {
    pub fn isotropic(scale: f64) -> Self {
        ConstantMobility([[scale, 0.0], [0.0, scale]])
    }
}

impl Mobility for ConstantMobility {
    fn mu(&self, _n: [f64; 2]) -> [[f64; 2]; 2] {
        self.0
    }
}

/// Closed-form mobility of an `s`-independent two-dimensional diffusivity.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDMobility {
    pub d: [[f64; 2]; 2],
    pub conv: EDerivative,
}

impl ConstantDMobility {
    pub fn new(d: [[f64; 2]; 2], conv: EDerivative) -> Self {
        ConstantDMobility { d, conv }
    }
}

impl Mobility for ConstantDMobility {
    fn mu(&self, n: [f64; 2]) -> [[f64; 2]; 2] {
        let d = self.d;
        let de = [d[0][0] * n[0] + d[0][1] * n[1], d[1][0] * n[0] + d[1][1] * n[1]];
        let a = n[0] * de[0] + n[1] * de[1];
        let r = a.sqrt();
        let mut g = [de[0] / r, de[1] / r];
        if self.conv == EDerivative::Tangential {
            let gn = g[0] * n[0] + g[1] * n[1];
            g = [g[0] - gn * n[0], g[1] - gn * n[1]];
        }
        [
            [d[0][0] - g[0] * g[0], d[0][1] - g[0] * g[1]],
            [d[1][0] - g[1] * g[0], d[1][1] - g[1] * g[1]],
        ]
    }
}

/// Angular samples of the two-dimensional mobility with periodic cubic
/// interpolation in the angle.
#[derive(Debug, Clone)]
pub struct MobilityTable {
    pub theta: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Row-major `[mu11, mu12, mu21, mu22]` per angle.
    pub mu: Vec<[f64; 4]>,
    lambda_spline: PeriodicSpline,
    mu_splines: [PeriodicSpline; 4],
}

impl MobilityTable {
    /// `theta,lambda,mu11,mu12,mu21,mu22` per tabulated angle.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut s = String::from("theta,lambda,mu11,mu12,mu21,mu22\n");
        for (k, m) in self.mu.iter().enumerate() {
            s.push_str(&format!("{},{},{},{},{},{}\n", self.theta[k], self.lambda[k], m[0], m[1], m[2], m[3]));
        }
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn angles(&self) -> usize {
        self.theta.len()
    }

    pub fn lambda_at(&self, theta: f64) -> f64 {
        self.lambda_spline.eval(theta)
    }

    pub fn mu_at(&self, theta: f64) -> [[f64; 2]; 2] {
        let v: Vec<f64> = self.mu_splines.iter().map(|s| s.eval(theta)).collect();
        [[v[0], v[1]], [v[2], v[3]]]
    }

    fn from_samples(theta: Vec<f64>, lambda: Vec<f64>, mu: Vec<[f64; 4]>) -> Self {
        let lambda_spline = PeriodicSpline::uniform(lambda.clone(), 2.0 * PI);
        let comp = |c: usize| PeriodicSpline::uniform(mu.iter().map(|m| m[c]).collect(), 2.0 * PI);
        let mu_splines = [comp(0), comp(1), comp(2), comp(3)];
        MobilityTable {
            theta,
            lambda,
            mu,
            lambda_spline,
            mu_splines,
        }
    }
}

impl Mobility for MobilityTable {
    fn mu(&self, n: [f64; 2]) -> [[f64; 2]; 2] {
        self.mu_at(n[1].atan2(n[0]))
    }
}

/// Model plus derivative convention, optionally with an angular table.
#[derive(Debug, Clone)]
pub struct MobilityTensor {
    pub spec: ModelSpec,
    pub conv: EDerivative,
    pub table: Option<MobilityTable>,
}

impl MobilityTensor {
    pub fn new(spec: ModelSpec, conv: EDerivative) -> Self {
        MobilityTensor { spec, conv, table: None }
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn evaluate(&self, e: &[f64]) -> Result<MuTensor> {
        mu_tensor(&self.spec, e, self.conv)
    }

    pub fn table(&self) -> Option<&MobilityTable> {
        self.table.as_ref()
    }
}

impl Mobility for MobilityTensor {
    fn mu(&self, n: [f64; 2]) -> [[f64; 2]; 2] {
        match &self.table {
            Some(t) => t.mu(n),
            None => {
                let m = self.evaluate(&n).expect("mobility evaluation").mu;
                [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
            }
        }
    }
}

/// Samples `mu_tensor` at `theta_k = 2 pi k / m` and installs periodic cubic
/// interpolation. Two-dimensional models only.
pub fn tabulate_mobility(spec: &ModelSpec, m_angles: usize, conv: EDerivative) -> Result<MobilityTensor> {
    if spec.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: spec.dim(),
        });
    }
    if m_angles < 64 {
        return Err(Error::Config(format!("mobility table needs >= 64 angles, got {m_angles}")));
    }
    let theta: Vec<f64> = (0..m_angles).map(|k| 2.0 * PI * k as f64 / m_angles as f64).collect();
    let rows = theta
        .par_iter()
        .map(|t| {
            let e = [t.cos(), t.sin()];
            mu_tensor(spec, &e, conv).map(|m| {
                (
                    m.lambda,
                    [m.mu[(0, 0)], m.mu[(0, 1)], m.mu[(1, 0)], m.mu[(1, 1)]],
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (lambda, mu): (Vec<f64>, Vec<[f64; 4]>) = rows.into_iter().unzip();
    Ok(MobilityTensor {
        spec: spec.clone(),
        conv,
        table: Some(MobilityTable::from_samples(theta, lambda, mu)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Diffusivity, Reaction};

    const LAMBDA_CUBIC: f64 = 0.942_809_041_582_063_4; // 2 sqrt(2) / 3

    fn diag12() -> ModelSpec {
        ModelSpec::new(Reaction::cubic(), Diffusivity::diag(&[1.0, 2.0]), 0.1).unwrap()
    }

    #[test]
    fn lambda_examples() {
        let id = ModelSpec::cubic_identity(0.1);
        assert!((lambda_e(&id, &[1.0, 0.0]).unwrap() - LAMBDA_CUBIC).abs() < 1e-12);
        assert!((lambda_e(&diag12(), &[0.0, 1.0]).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        let four = ModelSpec::new(Reaction::cubic(), Diffusivity::diag(&[4.0, 4.0]), 0.1).unwrap();
        assert!((lambda_e(&four, &[0.6, 0.8]).unwrap() - 2.0 * LAMBDA_CUBIC).abs() < 1e-12);
    }

    #[test]
    fn identity_mobility() {
        let id = ModelSpec::cubic_identity(0.1);
        let t = mu_tensor(&id, &[0.6, 0.8], EDerivative::Tangential).unwrap();
        assert!((&t.mu - DMatrix::identity(2, 2)).amax() < 1e-10);
        assert!(t.mu2.amax() < 1e-10);
        // ambient derivatives see |e|^2 and remove the normal component
        let amb = mu_tensor(&id, &[0.6, 0.8], EDerivative::Ambient).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0 - 0.36, -0.48, -0.48, 1.0 - 0.64]);
        assert!((&amb.mu - expect).amax() < 1e-8);
    }

    #[test]
    fn constant_diag_closed_form() {
        let m = diag12();
        let amb = mu_tensor(&m, &[1.0, 0.0], EDerivative::Ambient).unwrap();
        assert!((&amb.mu - DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0])).amax() < 1e-8);
        let amb = mu_tensor(&m, &[0.0, 1.0], EDerivative::Ambient).unwrap();
        assert!((&amb.mu - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).amax() < 1e-8);
        let tan = mu_tensor(&m, &[1.0, 0.0], EDerivative::Tangential).unwrap();
        assert!((&tan.mu - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0])).amax() < 1e-8);
        let e = [0.28, 0.96];
        let d = m.diffusivity.matrix(0.0);
        for conv in [EDerivative::Tangential, EDerivative::Ambient] {
            let q = mu_tensor(&m, &e, conv).unwrap();
            let closed = constant_d_mobility(&d, &e, conv);
            assert!((&q.mu - &closed).amax() < 1e-8);
            let fast = ConstantDMobility::new([[1.0, 0.0], [0.0, 2.0]], conv).mu(e);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((fast[i][j] - closed[(i, j)]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn tangential_form_examples() {
        let id = ModelSpec::cubic_identity(0.1);
        let t = tangential_form(&id, &[0.6, 0.8], &[-0.8, 0.6], EDerivative::Tangential).unwrap();
        assert!((t.value - LAMBDA_CUBIC).abs() < 1e-10);
        assert!(t.value >= t.lower_bound - 1e-10);
        let m = diag12();
        for conv in [EDerivative::Tangential, EDerivative::Ambient] {
            let t = tangential_form(&m, &[1.0, 0.0], &[0.0, 1.0], conv).unwrap();
            assert!((t.value - 2.0 * LAMBDA_CUBIC).abs() < 1e-9);
            let t = tangential_form(&m, &[0.0, 1.0], &[1.0, 0.0], conv).unwrap();
            assert!((t.value - 4.0 / 3.0).abs() < 1e-9);
            assert!(t.value >= t.lower_bound);
        }
        assert!(matches!(
            tangential_form(&m, &[1.0, 0.0], &[0.6, 0.8], EDerivative::Tangential),
            Err(Error::NotTangential { .. })
        ));
    }

    #[test]
    fn table_of_isotropic_model_is_flat() {
        let id = ModelSpec::cubic_identity(0.1);
        let tab = tabulate_mobility(&id, 64, EDerivative::Tangential).unwrap();
        let t = tab.table().unwrap();
        for k in 0..100 {
            let m = t.mu_at(k as f64 * 0.0713);
            assert!((m[0][0] - 1.0).abs() < 1e-9 && m[0][1].abs() < 1e-9 && (m[1][1] - 1.0).abs() < 1e-9);
        }
        assert!(tabulate_mobility(&id, 32, EDerivative::Tangential).is_err());
    }
}
