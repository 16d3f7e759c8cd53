//! Reaction term, diffusivity tensor and the scalar functions derived from
//! them along a direction `e`.
//!
//! Every instance is polynomial in the order parameter `s`: the reaction is
//! a polynomial `f`, and the diffusivity is `D(s) = sum_k C_k s^k` with
//! symmetric coefficient matrices `C_k`. That keeps closed-form oracles
//! available for every built-in model while the derived quantities
//! (`A_e`, `W_e`, their gradients) are still computed by quadrature.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quadrature::{integrate, QuadOptions};

/// Tolerance used to decide whether a direction is a unit vector.
pub const UNIT_TOL: f64 = 1e-9;

/// Bistable reaction term with roots `alpha_minus < alpha_mid < alpha_plus`.
#[derive(Debug, Clone)]
pub struct Reaction {
    f: Poly,
    f_prime: Poly,
    f_second: Poly,
    pub alpha_minus: f64,
    pub alpha_mid: f64,
    pub alpha_plus: f64,
    /// `f'(alpha_mid)`.
    pub nu: f64,
}

impl Reaction {
    /// Builds the reaction from its polynomial, locating its three real roots.
    pub fn from_poly(f: Poly) -> Result<Self> {
        if f.degree() < 3 {
            return Err(Error::NonBistable(format!(
                "degree {} polynomial cannot have three simple roots",
                f.degree()
            )));
        }
        let bound = f.root_bound();
        let roots = f.real_roots_in(-bound, bound, 200_000);
        if roots.len() != 3 {
            return Err(Error::NonBistable(format!(
                "expected three real roots, found {} ({:?})",
                roots.len(),
                roots
            )));
        }
        let f_prime = f.derivative();
        let f_second = f_prime.derivative();
        let nu = f_prime.eval(roots[1]);
        Ok(Reaction {
            f,
            f_prime,
            f_second,
            alpha_minus: roots[0],
            alpha_mid: roots[1],
            alpha_plus: roots[2],
            nu,
        })
    }

    /// `f(u) = u - u^3`.
    pub fn cubic() -> Self {
        Self::from_poly(Poly::new(vec![0.0, 1.0, 0.0, -1.0])).expect("cubic is bistable")
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        self.f.eval(u)
    }

    #[inline]
    pub fn f_prime(&self, u: f64) -> f64 {
        self.f_prime.eval(u)
    }

    #[inline]
    pub fn f_second(&self, u: f64) -> f64 {
        self.f_second.eval(u)
    }

    pub fn poly(&self) -> &Poly {
        &self.f
    }

    /// `min(alpha_plus - alpha_mid, alpha_mid - alpha_minus)`.
    pub fn eta0(&self) -> f64 {
        (self.alpha_plus - self.alpha_mid).min(self.alpha_mid - self.alpha_minus)
    }

    /// `max |f'|` on `[alpha_minus - eta0, alpha_plus + eta0]`, sampled.
    pub fn max_abs_f_prime(&self) -> f64 {
        let lo = self.alpha_minus - self.eta0();
        let hi = self.alpha_plus + self.eta0();
        (0..=2048)
            .map(|k| self.f_prime(lo + (hi - lo) * k as f64 / 2048.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Symmetric diffusivity `D(s) = sum_k C_k s^k`.
#[derive(Debug, Clone)]
pub struct Diffusivity {
    dim: usize,
    coeffs: Vec<DMatrix<f64>>,
}

impl Diffusivity {
    pub fn from_coeffs(coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        let dim = coeffs
            .first()
            .map(|c| c.nrows())
            .ok_or_else(|| Error::Config("empty diffusivity".into()))?;
        if dim < 2 {
            return Err(Error::Config("diffusivity dimension must be >= 2".into()));
        }
        for c in &coeffs {
            if c.nrows() != dim || c.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.nrows().max(c.ncols()),
                });
            }
            if (c - c.transpose()).amax() > 1e-14 * c.amax().max(1.0) {
                return Err(Error::Config("diffusivity coefficients must be symmetric".into()));
            }
        }
        Ok(Diffusivity { dim, coeffs })
    }

    pub fn identity(dim: usize) -> Self {
        Diffusivity {
            dim,
            coeffs: vec![DMatrix::identity(dim, dim)],
        }
    }

    pub fn diag(d: &[f64]) -> Self {
        Diffusivity {
            dim: d.len(),
            coeffs: vec![DMatrix::from_diagonal(&DVector::from_column_slice(d))],
        }
    }

    /// `R(angle) diag(d1, d2) R(angle)^T` in two dimensions.
    pub fn rotated_diag(d: [f64; 2], angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let dm = DMatrix::from_diagonal(&DVector::from_column_slice(&d));
        let m = &r * dm * r.transpose();
        let m = 0.5 * (&m + m.transpose());
        Diffusivity { dim: 2, coeffs: vec![m] }
    }

    /// `phi'(s) I` with `phi'` given by ascending coefficients.
    pub fn isotropic_poly(dim: usize, phi_prime: &[f64]) -> Self {
        Diffusivity {
            dim,
            coeffs: phi_prime
                .iter()
                .map(|c| DMatrix::identity(dim, dim) * *c)
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.coeffs
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.amax() == 0.0)
    }

    pub fn matrix(&self, s: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        let mut p = 1.0;
        for c in &self.coeffs {
            out += c * p;
            p *= s;
        }
        out
    }

    pub fn matrix_prime(&self, s: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        let mut p = 1.0;
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            out += c * (k as f64 * p);
            p *= s;
        }
        out
    }

    /// Entry `D_ij` as a polynomial in `s`.
    pub fn entry_poly(&self, i: usize, j: usize) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c[(i, j)]).collect())
    }

    /// `e . D(s) e` as a polynomial in `s`.
    pub fn quad_form_poly(&self, e: &[f64]) -> Poly {
        let ev = DVector::from_column_slice(e);
        Poly::new(self.coeffs.iter().map(|c| ev.dot(&(c * &ev))).collect())
    }

    /// `(D(s) e)_i` for each `i`, as polynomials in `s`.
    pub fn apply_poly(&self, e: &[f64]) -> Vec<Poly> {
        let ev = DVector::from_column_slice(e);
        let prods: Vec<DVector<f64>> = self.coeffs.iter().map(|c| c * &ev).collect();
        (0..self.dim)
            .map(|i| Poly::new(prods.iter().map(|p| p[i]).collect()))
            .collect()
    }

    /// Smallest eigenvalue of `D(s)`.
    pub fn min_eigenvalue(&self, s: f64) -> f64 {
        SymmetricEigen::new(self.matrix(s)).eigenvalues.min()
    }

    pub fn max_eigenvalue(&self, s: f64) -> f64 {
        SymmetricEigen::new(self.matrix(s)).eigenvalues.max()
    }
}

/// Reaction plus diffusivity plus the interface-width parameter.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub reaction: Reaction,
    pub diffusivity: Diffusivity,
    pub epsilon: f64,
    /// Sampled lower ellipticity bound on `[alpha_- - 1, alpha_+ + 1]`.
    pub c_lower: f64,
    /// Sampled upper ellipticity bound on the same interval.
    pub c_upper: f64,
}

/// Number of `s` samples used when estimating ellipticity bounds.
pub const S_SAMPLES: usize = 1024;
/// Number of random unit vectors used by [`ModelSpec::validate`].
pub const ETA_SAMPLES: usize = 256;

impl ModelSpec {
    pub fn new(reaction: Reaction, diffusivity: Diffusivity, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        let lo = reaction.alpha_minus - 1.0;
        let hi = reaction.alpha_plus + 1.0;
        let mut c_lower = f64::INFINITY;
        let mut c_upper = f64::NEG_INFINITY;
        for k in 0..S_SAMPLES {
            let s = lo + (hi - lo) * k as f64 / (S_SAMPLES - 1) as f64;
            let eig = SymmetricEigen::new(diffusivity.matrix(s)).eigenvalues;
            c_lower = c_lower.min(eig.min());
            c_upper = c_upper.max(eig.max());
        }
        Ok(ModelSpec {
            reaction,
            diffusivity,
            epsilon,
            c_lower,
            c_upper,
        })
    }

    /// Cubic reaction with identity diffusivity in two dimensions.
    pub fn cubic_identity(epsilon: f64) -> Self {
        Self::new(Reaction::cubic(), Diffusivity::identity(2), epsilon).expect("valid")
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        ModelSpec {
            epsilon,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.diffusivity.dim()
    }

    /// `int_{alpha_-}^{alpha_+} D_ij(s) f(s) ds` for every `(i, j)`.
    pub fn equipotential_residuals(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let r = &self.reaction;
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let d = self.diffusivity.entry_poly(i, j);
                let v = integrate(
                    |s| d.eval(s) * r.f(s),
                    r.alpha_minus,
                    r.alpha_plus,
                    QuadOptions { abs_tol: 1e-14, rel_tol: 1e-14, max_intervals: 200 },
                )?
                .value;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }

    /// Checks the bistability, ellipticity and equipotential conditions.
    pub fn validate(&self, tol: f64, seed: u64) -> Result<ValidationReport> {
        let r = &self.reaction;
        let roots = [r.alpha_minus, r.alpha_mid, r.alpha_plus];
        let root_residuals: Vec<f64> = roots.iter().map(|a| r.f(*a).abs()).collect();
        let slopes: Vec<f64> = roots.iter().map(|a| r.f_prime(*a)).collect();
        let bistable = slopes[0] < 0.0 && slopes[1] > 0.0 && slopes[2] < 0.0
            && root_residuals.iter().all(|x| *x <= tol.max(1e-12));

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim();
        let etas: Vec<DVector<f64>> = (0..ETA_SAMPLES)
            .map(|_| random_unit(&mut rng, n))
            .collect();
        let lo = r.alpha_minus - 1.0;
        let hi = r.alpha_plus + 1.0;
        let mut min_form = f64::INFINITY;
        let mut min_at = lo;
        let mut max_form = f64::NEG_INFINITY;
        let mut asym: f64 = 0.0;
        for k in 0..S_SAMPLES {
            let s = lo + (hi - lo) * k as f64 / (S_SAMPLES - 1) as f64;
            let d = self.diffusivity.matrix(s);
            asym = asym.max((&d - d.transpose()).amax());
            for eta in &etas {
                let q = eta.dot(&(&d * eta));
                if q < min_form {
                    min_form = q;
                    min_at = s;
                }
                max_form = max_form.max(q);
            }
        }
        let elliptic = min_form > 0.0 && asym == 0.0;

        let equi = self.equipotential_residuals()?;
        let equi_max = equi.amax();
        let equipotential = equi_max <= tol;

        Ok(ValidationReport {
            roots,
            root_residuals,
            slopes,
            nu: r.nu,
            eta0: r.eta0(),
            bistable,
            min_form,
            min_form_at: min_at,
            max_form,
            c_lower: self.c_lower,
            c_upper: self.c_upper,
            elliptic,
            equipotential_residuals: (0..n)
                .map(|i| (0..n).map(|j| equi[(i, j)]).collect())
                .collect(),
            equipotential_max: equi_max,
            equipotential,
            tol,
            pass: bistable && elliptic && equipotential,
        })
    }

    /// Validates and converts the first failing condition into an error.
    pub fn validated(self, tol: f64) -> Result<Self> {
        self.validate(tol, 0)?.check()?;
        Ok(self)
    }

    /// Functions of `s` along the direction `e`.
    pub fn direction(&self, e: &[f64]) -> Result<Directional<'_>> {
        Directional::new(self, e)
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 1e-3 && norm <= 1.0 {
            return v / norm;
        }
    }
}

/// Outcome of [`ModelSpec::validate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub roots: [f64; 3],
    pub root_residuals: Vec<f64>,
    /// `f'` at the three roots.
    pub slopes: Vec<f64>,
    pub nu: f64,
    pub eta0: f64,
    pub bistable: bool,
    pub min_form: f64,
    pub min_form_at: f64,
    pub max_form: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub elliptic: bool,
    pub equipotential_residuals: Vec<Vec<f64>>,
    pub equipotential_max: f64,
    pub equipotential: bool,
    pub tol: f64,
    pub pass: bool,
}

impl ValidationReport {
    pub fn check(&self) -> Result<()> {
        if !self.bistable {
            return Err(Error::NonBistable(format!(
                "roots {:?}, f' at roots {:?}",
                self.roots, self.slopes
            )));
        }
        if !self.elliptic {
            return Err(Error::NotElliptic {
                min_form: self.min_form,
                s: self.min_form_at,
            });
        }
        if !self.equipotential {
            return Err(Error::EquipotentialViolated {
                residual: self.equipotential_max,
                tol: self.tol,
            });
        }
        Ok(())
    }
}

/// The scalar functions `a_e`, `A_e`, `W_e` and their `e`-gradients for a
/// fixed unit direction.
///
/// `W_e` is integrated from whichever root is closer to `s`, so it keeps
/// full relative accuracy where it vanishes quadratically.
#[derive(Debug, Clone)]
pub struct Directional<'a> {
    pub model: &'a ModelSpec,
    pub e: Vec<f64>,
    a: Poly,
    grad_a: Vec<Poly>,
    w_total: f64,
    grad_w_total: Vec<f64>,
}

/// Quadrature tolerance for the `s`-integrals.
pub const S_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-10,
    rel_tol: 1e-13,
    max_intervals: 400,
};

impl<'a> Directional<'a> {
    pub fn new(model: &'a ModelSpec, e: &[f64]) -> Result<Self> {
        if e.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: e.len(),
            });
        }
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        let a = model.diffusivity.quad_form_poly(e);
        let grad_a: Vec<Poly> = model
            .diffusivity
            .apply_poly(e)
            .into_iter()
            .map(|p| p.scale(2.0))
            .collect();
        let r = &model.reaction;
        let w_total = -2.0 * integrate(|s| a.eval(s) * r.f(s), r.alpha_minus, r.alpha_plus, S_QUAD)?.value;
        let grad_w_total = grad_a
            .iter()
            .map(|g| {
                integrate(|s| g.eval(s) * r.f(s), r.alpha_minus, r.alpha_plus, S_QUAD)
                    .map(|q| -2.0 * q.value)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Directional {
            model,
            e: e.to_vec(),
            a,
            grad_a,
            w_total,
            grad_w_total,
        })
    }

    fn reaction(&self) -> &Reaction {
        &self.model.reaction
    }

    /// `a_e(s) = e . D(s) e`.
    #[inline]
    pub fn a(&self, s: f64) -> f64 {
        self.a.eval(s)
    }

    /// `A_e(s) = int_{alpha_-}^s a_e`.
    pub fn big_a(&self, s: f64) -> Result<f64> {
        let lo = self.reaction().alpha_minus;
        integrate(|t| self.a.eval(t), lo, s, S_QUAD).map(|q| q.value)
    }

    /// `-2 int_{alpha_-}^s g(t) f(t) dt`, integrated from the nearer root.
    fn minus_two_int_gf(&self, g: &Poly, total: f64, s: f64) -> Result<f64> {
        let r = self.reaction();
        let mid = 0.5 * (r.alpha_minus + r.alpha_plus);
        if s <= mid {
            Ok(-2.0 * integrate(|t| g.eval(t) * r.f(t), r.alpha_minus, s, S_QUAD)?.value)
        } else {
            Ok(2.0 * integrate(|t| g.eval(t) * r.f(t), s, r.alpha_plus, S_QUAD)?.value + total)
        }
    }

    /// `W_e(s) = -2 int_{alpha_-}^s a_e f`, without the sign check.
    #[inline]
    pub fn w_raw(&self, s: f64) -> Result<f64> {
        self.minus_two_int_gf(&self.a, self.w_total, s)
    }

    /// `W_e(s)`; fails with `NegativeW` inside the well.
    pub fn w(&self, s: f64) -> Result<f64> {
        let v = self.w_raw(s)?;
        let r = self.reaction();
        if v < -1e-10 && s > r.alpha_minus && s < r.alpha_plus {
            return Err(Error::NegativeW { s, value: v });
        }
        Ok(v)
    }

    /// `W_e(alpha_+)`; zero for equipotential models.
    pub fn w_at_plus(&self) -> f64 {
        self.w_total
    }

    /// `dW_e/ds = -2 a_e(s) f(s)`.
    #[inline]
    pub fn w_prime(&self, s: f64) -> f64 {
        -2.0 * self.a(s) * self.reaction().f(s)
    }

    /// `d a_e / d e_i = 2 (D(s) e)_i`.
    pub fn grad_a(&self, s: f64) -> Vec<f64> {
        self.grad_a.iter().map(|p| p.eval(s)).collect()
    }

    #[inline]
    pub fn grad_a_i(&self, i: usize, s: f64) -> f64 {
        self.grad_a[i].eval(s)
    }

    /// `d W_e / d e_i = -2 int_{alpha_-}^s 2 (D e)_i f`.
    pub fn grad_w(&self, s: f64) -> Result<Vec<f64>> {
        (0..self.grad_a.len()).map(|i| self.grad_w_i(i, s)).collect()
    }

    pub fn grad_w_i(&self, i: usize, s: f64) -> Result<f64> {
        self.minus_two_int_gf(&self.grad_a[i], self.grad_w_total[i], s)
    }

    /// `W_e(s)`, `grad_e W_e(s)` and `grad_e (a_e / sqrt(W_e))(s)`, with the
    /// gradients converted by `conv`. Returns `None` for the gradients where
    /// `W_e(s) <= 0` (only at or beyond the roots).
    pub fn ratio_terms(&self, s: f64, conv: EDerivative) -> Result<(f64, Option<(Vec<f64>, Vec<f64>)>)> {
        let w = self.w_raw(s)?;
        if w <= 0.0 {
            return Ok((w, None));
        }
        let mut ga = self.grad_a(s);
        let mut gw = self.grad_w(s)?;
        conv.apply(&self.e, &mut ga);
        conv.apply(&self.e, &mut gw);
        let a = self.a(s);
        let sw = w.sqrt();
        let ratio: Vec<f64> = ga
            .iter()
            .zip(&gw)
            .map(|(dai, dwi)| dai / sw - a * dwi / (2.0 * w * sw))
            .collect();
        Ok((w, Some((gw, ratio))))
    }

    /// `d/ds` of `d W_e / d e_i`.
    #[inline]
    pub fn grad_w_prime_i(&self, i: usize, s: f64) -> f64 {
        -2.0 * self.grad_a[i].eval(s) * self.reaction().f(s)
    }
}

/// How `e`-derivatives of functions defined on the unit sphere are taken.
///
/// `Tangential` differentiates along the sphere: the ambient gradient is
/// projected with `I - e e^T`. `Ambient` uses the gradient of the formula
/// `e . D(s) e` extended to all of `R^N`. Both agree on every tangential
/// quadratic form, which is all the limit flow sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EDerivative {
    #[default]
    Tangential,
    Ambient,
}

impl EDerivative {
    /// Applies the convention to an ambient gradient `g` at direction `e`.
    pub fn apply(self, e: &[f64], g: &mut [f64]) {
        if self == EDerivative::Tangential {
            let dot: f64 = e.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
            for (gi, ei) in g.iter_mut().zip(e) {
                *gi -= dot * ei;
            }
        }
    }

    /// Component `j` of the converted gradient, given the ambient gradient.
    pub fn component(self, e: &[f64], g: &[f64], j: usize) -> f64 {
        match self {
            EDerivative::Ambient => g[j],
            EDerivative::Tangential => {
                let dot: f64 = e.iter().zip(g).map(|(a, b)| a * b).sum();
                g[j] - dot * e[j]
            }
        }
    }
}

/// `a_e(s)`.
pub fn a_e(spec: &ModelSpec, e: &[f64], s: f64) -> Result<f64> {
    Ok(spec.direction(e)?.a(s))
}

/// `A_e(s)`.
pub fn big_a_e(spec: &ModelSpec, e: &[f64], s: f64) -> Result<f64> {
    spec.direction(e)?.big_a(s)
}

/// `W_e(s)`.
pub fn w_e(spec: &ModelSpec, e: &[f64], s: f64) -> Result<f64> {
    spec.direction(e)?.w(s)
}

/// Gradient of `a_e(s)` with respect to `e` (ambient coordinates).
pub fn grad_e_a(spec: &ModelSpec, e: &[f64], s: f64) -> Result<Vec<f64>> {
    Ok(spec.direction(e)?.grad_a(s))
}

/// Gradient of `W_e(s)` with respect to `e` (ambient coordinates).
pub fn grad_e_w(spec: &ModelSpec, e: &[f64], s: f64) -> Result<Vec<f64>> {
    spec.direction(e)?.grad_w(s)
}

/// Random diffusivity `D(s) = C_0 + C_2 s^2` with `C_0` symmetric positive
/// definite and `C_2` symmetric positive semidefinite.
///
/// Even entries make `int D_ij f` vanish for every odd reaction term, so the
/// resulting model satisfies the equipotential condition with the cubic.
pub fn sample_even_spd_diffusivity<R: Rng>(rng: &mut R, dim: usize) -> Diffusivity {
    let spd = |rng: &mut R, shift: f64, scale: f64| {
        let b = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0) * scale);
        &b * b.transpose() + DMatrix::identity(dim, dim) * shift
    };
    let c0 = spd(rng, 0.2, 1.0);
    let c2 = spd(rng, 0.0, 0.7);
    Diffusivity::from_coeffs(vec![c0, DMatrix::zeros(dim, dim), c2]).expect("symmetric")
}

// ---------------------------------------------------------------------------
// JSON description

/// Reaction entry of a model file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReactionConfig {
    pub kind: ReactionKind,
    #[serde(default)]
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ReactionKind {
    /// `u - u^3`; `coeffs` must be empty.
    Cubic,
    /// `u - u^3 + c`; `coeffs = [c]`.
    ShiftedCubic,
    /// Ascending polynomial coefficients.
    Polynomial,
}

/// Diffusivity entry of a model file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DiffusivityConfig {
    pub kind: DiffusivityKind,
    #[serde(default)]
    pub params: DiffusivityParams,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusivityKind {
    /// `params.dim` (default 2).
    Identity,
    /// `params.diag`.
    Diag,
    /// `params.diag` (two entries) and `params.angle` in radians.
    RotatedDiag,
    /// `phi'(s) I`: `params.dim` and `params.coeffs` for `phi'`.
    IsotropicPolynomial,
    /// `params.entries[i][j]` = ascending coefficients of `D_ij(s)`.
    Polynomial,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DiffusivityParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<Vec<Vec<f64>>>>,
}

/// The `model` object of a configuration file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub reaction: ReactionConfig,
    pub diffusivity: DiffusivityConfig,
    pub epsilon: f64,
}

impl ReactionConfig {
    pub fn build(&self) -> Result<Reaction> {
        let poly = match self.kind {
            ReactionKind::Cubic => {
                if !self.coeffs.is_empty() {
                    return Err(Error::Config("cubic reaction takes no coeffs".into()));
                }
                Poly::new(vec![0.0, 1.0, 0.0, -1.0])
            }
            ReactionKind::ShiftedCubic => match self.coeffs.as_slice() {
                [c] => Poly::new(vec![*c, 1.0, 0.0, -1.0]),
                _ => return Err(Error::Config("shifted-cubic needs coeffs = [shift]".into())),
            },
            ReactionKind::Polynomial => {
                if self.coeffs.len() < 4 {
                    return Err(Error::Config("polynomial reaction needs degree >= 3".into()));
                }
                Poly::new(self.coeffs.clone())
            }
        };
        Reaction::from_poly(poly)
    }
}

impl DiffusivityConfig {
    pub fn build(&self) -> Result<Diffusivity> {
        let p = &self.params;
        let missing = |what: &str| Error::Config(format!("{:?} diffusivity needs params.{what}", self.kind));
        match self.kind {
            DiffusivityKind::Identity => Ok(Diffusivity::identity(p.dim.unwrap_or(2))),
            DiffusivityKind::Diag => {
                let d = p.diag.as_ref().ok_or_else(|| missing("diag"))?;
                if d.len() < 2 {
                    return Err(Error::Config("diag needs at least two entries".into()));
                }
                Ok(Diffusivity::diag(d))
            }
            DiffusivityKind::RotatedDiag => {
                let d = p.diag.as_ref().ok_or_else(|| missing("diag"))?;
                let angle = p.angle.ok_or_else(|| missing("angle"))?;
                match d.as_slice() {
                    [a, b] => Ok(Diffusivity::rotated_diag([*a, *b], angle)),
                    _ => Err(Error::Config("rotated-diag is two-dimensional".into())),
                }
            }
            DiffusivityKind::IsotropicPolynomial => {
                let c = p.coeffs.as_ref().ok_or_else(|| missing("coeffs"))?;
                Ok(Diffusivity::isotropic_poly(p.dim.unwrap_or(2), c))
            }
            DiffusivityKind::Polynomial => {
                let entries = p.entries.as_ref().ok_or_else(|| missing("entries"))?;
                let n = entries.len();
                if entries.iter().any(|row| row.len() != n) {
                    return Err(Error::Config("entries must be a square matrix".into()));
                }
                let degree = entries
                    .iter()
                    .flatten()
                    .map(|c| c.len())
                    .max()
                    .unwrap_or(0);
                let coeffs = (0..degree.max(1))
                    .map(|k| {
                        DMatrix::from_fn(n, n, |i, j| entries[i][j].get(k).copied().unwrap_or(0.0))
                    })
                    .collect();
                Diffusivity::from_coeffs(coeffs)
            }
        }
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec> {
        ModelSpec::new(self.reaction.build()?, self.diffusivity.build()?, self.epsilon)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn cubic_identity(epsilon: f64) -> Self {
        ModelConfig {
            reaction: ReactionConfig {
                kind: ReactionKind::Cubic,
                coeffs: vec![],
            },
            diffusivity: DiffusivityConfig {
                kind: DiffusivityKind::Identity,
                params: DiffusivityParams {
                    dim: Some(2),
                    ..Default::default()
                },
            },
            epsilon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag12() -> ModelSpec {
        ModelSpec::new(Reaction::cubic(), Diffusivity::diag(&[1.0, 2.0]), 0.02).unwrap()
    }

    #[test]
    fn cubic_identity_validates() {
        let m = ModelSpec::cubic_identity(0.02);
        let rep = m.validate(1e-10, 1).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.equipotential_max < 1e-12);
        assert_eq!(rep.roots, [-1.0, 0.0, 1.0]);
        assert_eq!(rep.nu, 1.0);
        assert_eq!(rep.eta0, 1.0);
    }

    #[test]
    fn shifted_cubic_moves_roots_and_breaks_balance() {
        let f = Poly::new(vec![0.1, 1.0, 0.0, -1.0]);
        let r = Reaction::from_poly(f.clone()).unwrap();
        // independent root location: Newton from the unshifted roots
        for (guess, found) in [(-1.0, r.alpha_minus), (0.0, r.alpha_mid), (1.0, r.alpha_plus)] {
            let mut x: f64 = guess;
            for _ in 0..50 {
                x -= (0.1 + x - x.powi(3)) / (1.0 - 3.0 * x * x);
            }
            assert!((x - found).abs() < 1e-12);
        }
        let m = ModelSpec::new(r, Diffusivity::identity(2), 0.02).unwrap();
        let rep = m.validate(1e-8, 0).unwrap();
        assert!(rep.bistable);
        assert!(!rep.equipotential);
        assert!(matches!(rep.check(), Err(Error::EquipotentialViolated { .. })));
    }

    #[test]
    fn non_bistable_quartic_rejected() {
        // f = u^3 - u has the stability pattern reversed
        let r = Reaction::from_poly(Poly::new(vec![0.0, -1.0, 0.0, 1.0])).unwrap();
        let m = ModelSpec::new(r, Diffusivity::identity(2), 0.1).unwrap();
        let rep = m.validate(1e-8, 0).unwrap();
        assert!(matches!(rep.check(), Err(Error::NonBistable(_))));
        // one real root only
        assert!(Reaction::from_poly(Poly::new(vec![0.0, 1.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn s_dependent_diag_violates_equipotential() {
        let d = Diffusivity::from_coeffs(vec![
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
        ])
        .unwrap();
        let m = ModelSpec::new(Reaction::cubic(), d, 0.1).unwrap();
        let res = m.equipotential_residuals().unwrap();
        // int_{-1}^{1} s (s - s^3) ds = 2/3 - 2/5
        assert!((res[(1, 1)] - 4.0 / 15.0).abs() < 1e-13);
        assert!(res[(0, 0)].abs() < 1e-14);
        let rep = m.validate(1e-8, 0).unwrap();
        assert!(matches!(rep.check(), Err(Error::EquipotentialViolated { .. })));
    }

    #[test]
    fn indefinite_diffusivity_not_elliptic() {
        let m = ModelSpec::new(Reaction::cubic(), Diffusivity::diag(&[1.0, -0.5]), 0.1).unwrap();
        let rep = m.validate(1e-8, 0).unwrap();
        assert!(matches!(rep.check(), Err(Error::NotElliptic { .. })));
    }

    #[test]
    fn a_e_examples() {
        let id = ModelSpec::cubic_identity(0.1);
        assert_eq!(a_e(&id, &[0.6, 0.8], 0.3).unwrap(), 1.0);
        let m = diag12();
        assert_eq!(a_e(&m, &[0.0, 1.0], 0.0).unwrap(), 2.0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a_e(&m, &[r, r], 0.7).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(a_e(&m, &[1.0, 0.1], 0.0), Err(Error::NotUnit { .. })));
    }

    #[test]
    fn w_and_big_a_examples() {
        let id = ModelSpec::cubic_identity(0.1);
        let dir = id.direction(&[1.0, 0.0]).unwrap();
        for s in [-1.0f64, -0.7, -0.2, 0.0, 0.4, 0.9, 1.0] {
            let exact = (1.0 - s * s).powi(2) / 2.0;
            assert!((dir.w(s).unwrap() - exact).abs() < 1e-14, "s={s}");
        }
        assert!((dir.w(0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((dir.big_a(1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((dir.big_a(0.25).unwrap() - 1.25).abs() < 1e-14);
        let m = diag12();
        assert!((w_e(&m, &[0.0, 1.0], 0.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grad_examples() {
        let id = ModelSpec::cubic_identity(0.1);
        let g = grad_e_a(&id, &[0.6, 0.8], 0.5).unwrap();
        assert!((g[0] - 1.2).abs() < 1e-15 && (g[1] - 1.6).abs() < 1e-15);
        let m = diag12();
        assert_eq!(grad_e_a(&m, &[1.0, 0.0], 0.1).unwrap(), vec![2.0, 0.0]);
        let gw = grad_e_w(&m, &[1.0, 0.0], 0.3).unwrap();
        assert_eq!(gw[1], 0.0);
    }

    #[test]
    fn config_round_trip_and_rejection() {
        let text = r#"{"reaction":{"kind":"cubic"},"diffusivity":{"kind":"rotated-diag","params":{"diag":[1,2],"angle":0.3}},"epsilon":0.02}"#;
        let cfg = ModelConfig::from_json(text).unwrap();
        let m = cfg.build().unwrap();
        let d = m.diffusivity.matrix(0.0);
        assert!((d[(0, 1)] - d[(1, 0)]).abs() < 1e-15);
        assert!((d.trace() - 3.0).abs() < 1e-14);
        let bad = r#"{"reaction":{"kind":"cubic"},"diffusivity":{"kind":"identity"},"epsilon":0.02,"extra":1}"#;
        assert!(ModelConfig::from_json(bad).is_err());
        let bad = r#"{"reaction":{"kind":"cubic"},"diffusivity":{"kind":"identity","params":{"dims":2}},"epsilon":0.02}"#;
        assert!(ModelConfig::from_json(bad).is_err());
        let poly = r#"{"reaction":{"kind":"polynomial","coeffs":[0,1,0,-1]},"diffusivity":{"kind":"polynomial","params":{"entries":[[[1,0,1],[0.1]],[[0.1],[2]]]}},"epsilon":0.05}"#;
        let m = ModelConfig::from_json(poly).unwrap().build().unwrap();
        assert!((m.diffusivity.matrix(2.0)[(0, 0)] - 5.0).abs() < 1e-15);
        assert!(m.validate(1e-10, 0).unwrap().pass);
    }

    #[test]
    fn sampled_even_models_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let d = sample_even_spd_diffusivity(&mut rng, 2);
            let m = ModelSpec::new(Reaction::cubic(), d, 0.1).unwrap();
            assert!(m.validate(1e-10, 3).unwrap().pass);
        }
    }
}
