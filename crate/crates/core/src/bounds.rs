//! Explicit super- and sub-solutions of the profile equation
//!
//! ```text
//! w'' - c w' + (B w)(1 - (1 - b) S B w) = 0,   w(-inf) = 0, w(+inf) = 1
//! ```
//!
//! and the grid residual used to certify them.
//!
//! The super-solution glues `a e^{lambda2 t}` (left) to `1 - e^{mu1 t}`
//! (right) with a continuous derivative at `zeta`. The sub-solution is
//! `a e^{lambda2 t} (1 - M e^{eps t})` for `t <= xi` and zero beyond; the
//! nonzero branch sits on the left, where the defining inequality is checked.

use crate::error::{Error, Result};
use crate::gridops::{op_f, GridProfile, OperatorConfig};
use crate::spectral::{chi0, ModelParams, SpectralRoots};

/// Lower bound on the sign tolerance of the residual certificates.
pub const SIGN_TOL_FLOOR: f64 = 1e-10;
/// Required value of `-chi0(lambda2 + eps)`.
pub const CHI0_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperSolution {
    pub a: f64,
    pub zeta: f64,
    pub lambda2: f64,
    pub lambda1: f64,
    pub mu1: f64,
}

impl SuperSolution {
    pub fn value(&self, t: f64) -> f64 {
        if t >= self.zeta {
            1.0 - (self.mu1 * t).exp()
        } else {
            self.a * (self.lambda2 * t).exp()
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t >= self.zeta {
            -self.mu1 * (self.mu1 * t).exp()
        } else {
            self.a * self.lambda2 * (self.lambda2 * t).exp()
        }
    }

    /// Residuals of the two C^1 matching conditions at `zeta`.
    pub fn matching_residuals(&self) -> (f64, f64) {
        let left = self.a * (self.lambda2 * self.zeta).exp();
        let right = (self.mu1 * self.zeta).exp();
        ((1.0 - right) - left, -self.mu1 * right - self.lambda2 * left)
    }

    /// `a e^{lambda2 t} - (1 - e^{mu1 t})`, positive for `t < zeta`.
    pub fn gap(&self, t: f64) -> f64 {
        self.a * (self.lambda2 * t).exp() - (1.0 - (self.mu1 * t).exp())
    }

    /// Bound on `|phi'''|` over both branches (each is maximal at `zeta`).
    pub fn third_derivative_bound(&self) -> f64 {
        let left = self.a * self.lambda2.powi(3) * (self.lambda2 * self.zeta).exp();
        let right = self.mu1.abs().powi(3) * (self.mu1 * self.zeta).exp();
        left.max(right)
    }

    pub fn render(&self, half_width: f64, ctau: f64, m: usize) -> Result<GridProfile> {
        let mut g = GridProfile::sample(half_width, ctau, m, self.lambda2, 0.0, |t| self.value(t))?;
        g.right_value = 1.0 - (self.mu1 * g.t_end()).exp();
        Ok(g)
    }
}

/// Super-solution for a noncritical point of the existence region.
///
/// The matching conditions give `e^{mu1 zeta} = lambda2 / (lambda2 - mu1)`
/// and `a = (1 - e^{mu1 zeta}) e^{-lambda2 zeta}`.
pub fn build_super(
    roots: &SpectralRoots,
    half_width: f64,
    ctau: f64,
    m: usize,
) -> Result<(SuperSolution, GridProfile)> {
    let (Some(lambda2), Some(lambda1), Some(mu1)) = (roots.lambda2, roots.lambda1, roots.mu1) else {
        return Err(Error::OutsideDomain("outside the existence region or critical: missing roots".into()));
    };
    if roots.critical_chi0 || !(lambda2 < lambda1) {
        return Err(Error::OutsideDomain(format!(
            "outside the existence region or critical: lambda2 = {lambda2}, lambda1 = {lambda1}"
        )));
    }
    let e = lambda2 / (lambda2 - mu1);
    let zeta = e.ln() / mu1;
    let a = (1.0 - e) * (-lambda2 * zeta).exp();
    let sup = SuperSolution { a, zeta, lambda2, lambda1, mu1 };
    let profile = sup.render(half_width, ctau, m)?;
    Ok((sup, profile))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubSolution {
    pub eps: f64,
    /// Amplitude `M > 1` of the correction term.
    pub big_m: f64,
    pub xi: f64,
    pub a: f64,
    pub lambda2: f64,
}

impl SubSolution {
    pub fn value(&self, t: f64) -> f64 {
        if t >= self.xi {
            0.0
        } else {
            let v = self.a * (self.lambda2 * t).exp() * (1.0 - self.big_m * (self.eps * t).exp());
            v.max(0.0)
        }
    }

    /// One-sided slopes `(phi'(xi-), phi'(xi+))`.
    pub fn corner_slopes(&self) -> (f64, f64) {
        let left = -self.a * self.eps * (self.lambda2 * self.xi).exp();
        (left, 0.0)
    }

    pub fn third_derivative_bound(&self) -> f64 {
        let l = self.lambda2;
        self.a * (l * self.xi).exp() * (l.powi(3) + (l + self.eps).powi(3))
    }

    pub fn render(&self, half_width: f64, ctau: f64, m: usize) -> Result<GridProfile> {
        GridProfile::sample(half_width, ctau, m, self.lambda2, 0.0, |t| self.value(t))
    }
}

/// Sub-solution matched to `sup`.
///
/// `eps = min(lambda2, lambda1 - lambda2) / 2`; `M` is the smallest power of
/// two for which
/// `a M^{-lambda2/eps} (1-b) e^{-lambda2 c tau} / (1 - b e^{-lambda2 c tau})^2`
/// is at most half of `-chi0(lambda2 + eps)`.
pub fn build_sub(
    sup: &SuperSolution,
    p: &ModelParams,
    half_width: f64,
    m: usize,
) -> Result<(SubSolution, GridProfile)> {
    let l2 = sup.lambda2;
    let eps = l2.min(sup.lambda1 - l2) / 2.0;
    let chi = chi0(l2 + eps, p)?;
    if !(chi <= -CHI0_MARGIN) {
        return Err(Error::OutsideDomain(format!(
            "chi0(lambda2 + eps) = {chi} is not below -{CHI0_MARGIN}: too close to the critical speed"
        )));
    }
    let q = (-l2 * p.ctau).exp();
    let k = (1.0 - p.b) * q / (1.0 - p.b * q).powi(2);
    // k_pow * ln 2 >= (eps / lambda2) * ln(a k / (-chi / 2))
    let need = (eps / l2) * (sup.a * k / (-chi / 2.0)).ln();
    let k_pow = ((need / std::f64::consts::LN_2).ceil().max(1.0)) as i32;
    if k_pow > 1000 {
        return Err(Error::OutsideDomain(format!("required M = 2^{k_pow} is not representable")));
    }
    let big_m = 2f64.powi(k_pow);
    let margin = -chi - sup.a * k * (-(l2 / eps) * big_m.ln()).exp();
    if !(margin > 0.0) {
        return Err(Error::OutsideDomain(format!("sub-solution margin {margin} is not positive")));
    }
    let xi = -big_m.ln() / eps;
    let sub = SubSolution { eps, big_m, xi, a: sup.a, lambda2: l2 };
    let profile = sub.render(half_width, p.ctau, m)?;
    Ok((sub, profile))
}

/// Finite-difference first and second derivatives on the grid.
///
/// Fourth-order five-point formulas where the stencil fits, the three-point
/// centred formulas next to the ends and second-order one-sided formulas at
/// the ends.
pub fn derivatives(g: &GridProfile) -> (Vec<f64>, Vec<f64>) {
    let v = &g.values;
    let n = v.len();
    let h = g.dt;
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        if i >= 2 && i + 2 < n {
            d1[i] = (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h);
            d2[i] = (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2]) / (12.0 * h * h);
        } else if i >= 1 && i + 1 < n {
            d1[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
            d2[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
        } else if n >= 4 {
            let (s, a, b, c, d) =
                if i == 0 { (1.0, v[0], v[1], v[2], v[3]) } else { (-1.0, v[n - 1], v[n - 2], v[n - 3], v[n - 4]) };
            d1[i] = s * (-3.0 * a + 4.0 * b - c) / (2.0 * h);
            d2[i] = (2.0 * a - 5.0 * b + 4.0 * c - d) / (h * h);
        } else {
            let j = i.clamp(1, n - 2);
            d1[i] = (v[j + 1] - v[j - 1]) / (2.0 * h);
            d2[i] = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (h * h);
        }
    }
    (d1, d2)
}

/// Pointwise residual `g'' - c g' + (B g)(1 - (1 - b) S B g)`.
pub fn residual_pew(g: &GridProfile, cfg: &OperatorConfig) -> Result<GridProfile> {
    let f = op_f(g, cfg)?;
    let (d1, d2) = derivatives(g);
    let values = (0..g.n()).map(|i| d2[i] - cfg.c * d1[i] + f.values[i]).collect();
    Ok(g.with_values(values))
}

/// `max(1e-10, 10 dt^2 max|phi'''|)`.
pub fn sign_tolerance(dt: f64, third_derivative_bound: f64) -> f64 {
    SIGN_TOL_FLOOR.max(10.0 * dt * dt * third_derivative_bound)
}

/// Outcome of a residual sign check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// Largest residual (super) or most negative residual (sub) seen.
    pub worst: f64,
    pub tol_sign: f64,
    pub checked_points: usize,
    pub passed: bool,
}

fn interior_points_away_from(g: &GridProfile, corner: f64) -> impl Iterator<Item = usize> + '_ {
    let n = g.n();
    (2..n.saturating_sub(2)).filter(move |&i| (g.t(i) - corner).abs() > 2.0 * g.dt)
}

/// Checks `residual_pew(phi_+) <= tol_sign` at interior points more than
/// two steps away from `zeta`.
pub fn certify_super(sup: &SuperSolution, g: &GridProfile, cfg: &OperatorConfig) -> Result<Certificate> {
    let r = residual_pew(g, cfg)?;
    let tol_sign = sign_tolerance(g.dt, sup.third_derivative_bound());
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for i in interior_points_away_from(g, sup.zeta) {
        worst = worst.max(r.values[i]);
        count += 1;
    }
    Ok(Certificate { worst, tol_sign, checked_points: count, passed: worst <= tol_sign })
}

/// Checks `residual_pew(phi_-) >= -tol_sign` at interior points more than
/// two steps away from `xi`.
pub fn certify_sub(sub: &SubSolution, g: &GridProfile, cfg: &OperatorConfig) -> Result<Certificate> {
    let r = residual_pew(g, cfg)?;
    let tol_sign = sign_tolerance(g.dt, sub.third_derivative_bound());
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for i in interior_points_away_from(g, sub.xi) {
        worst = worst.min(r.values[i]);
        count += 1;
    }
    Ok(Certificate { worst, tol_sign, checked_points: count, passed: worst >= -tol_sign })
}
