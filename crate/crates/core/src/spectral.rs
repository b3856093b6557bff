//! Characteristic functions of the linearised profile equation and their
//! real zeros.
//!
//! With `s = c tau`,
//!
//! ```text
//! chi0(z) = z^2 - c z + 1 / (1 - b e^{-z s})
//! chi1(z) = z^2 - c z - e^{-z s} / (1 - b e^{-z s})
//! ```
//!
//! both analytic for `z > ln b / s`. The positive zeros of `chi0` govern the
//! profile at `-inf`, the negative zeros of `chi1` the approach to 1 at `+inf`.

use crate::bracket::{bisect, golden_max};
use crate::error::{Error, Result};

/// Distance from the pole inside which evaluation is refused.
pub const POLE_GUARD: f64 = 1e-8;
/// Default residual tolerance for returned roots, relative to `1 + z^2`.
pub const ROOT_TOL: f64 = 1e-12;
/// Extremal values within this distance of zero are reported as double roots.
pub const CRITICAL_TOL: f64 = 1e-8;
/// Samples used to locate the maximum of `chi1` on the negative axis.
pub const CHI1_SAMPLES: usize = 2048;
/// Default truncation tolerance of the geometric series `sum b^j S^j`.
pub const TRUNC_TOL: f64 = 1e-14;

/// Neutral coefficient `b`, delay `tau` and speed `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub b: f64,
    pub tau: f64,
    pub c: f64,
    /// `c * tau`, the delay measured in the moving frame.
    pub ctau: f64,
    pub trunc_tol: f64,
}

impl ModelParams {
    pub fn new(b: f64, tau: f64, c: f64) -> Result<Self> {
        if !(b.is_finite() && (0.0..1.0).contains(&b)) {
            return Err(Error::InvalidParams(format!("b = {b} must satisfy 0 <= b < 1")));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParams(format!("tau = {tau} must be positive")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParams(format!("c = {c} must be positive")));
        }
        Ok(Self { b, tau, c, ctau: c * tau, trunc_tol: TRUNC_TOL })
    }

    pub fn with_trunc_tol(mut self, trunc_tol: f64) -> Result<Self> {
        if !(trunc_tol > 0.0 && trunc_tol < 1.0) {
            return Err(Error::InvalidParams(format!("trunc_tol = {trunc_tol} must lie in (0, 1)")));
        }
        self.trunc_tol = trunc_tol;
        Ok(self)
    }

    /// Same `(b, tau)` at another speed.
    pub fn with_speed(&self, c: f64) -> Result<Self> {
        Self::new(self.b, self.tau, c)?.with_trunc_tol(self.trunc_tol)
    }

    /// Smallest `J` with `b^(J+1) < trunc_tol` (zero when `b = 0`).
    pub fn series_depth(&self) -> usize {
        series_depth(self.b, self.trunc_tol)
    }

    /// Left edge `ln b / (c tau)` of the analyticity strip, `None` for `b = 0`.
    pub fn pole(&self) -> Option<f64> {
        (self.b > 0.0).then(|| self.b.ln() / self.ctau)
    }
}

pub(crate) fn series_depth(b: f64, trunc_tol: f64) -> usize {
    if b == 0.0 {
        return 0;
    }
    let mut j = 0usize;
    let mut pow = b;
    while pow >= trunc_tol {
        pow *= b;
        j += 1;
    }
    j
}

/// Value, first and second derivative at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// `r = e^{-z s}` together with `1 - b r`, after the strip check.
fn strip_terms(z: f64, p: &ModelParams) -> Result<(f64, f64)> {
    if let Some(pole) = p.pole() {
        if z - pole <= POLE_GUARD {
            return Err(Error::Domain { z, pole });
        }
    }
    let r = (-z * p.ctau).exp();
    let d = 1.0 - p.b * r;
    if !(d > f64::EPSILON) || !r.is_finite() {
        return Err(Error::Domain { z, pole: p.pole().unwrap_or(f64::NEG_INFINITY) });
    }
    Ok((r, d))
}

pub fn chi0(z: f64, p: &ModelParams) -> Result<f64> {
    let (_, d) = strip_terms(z, p)?;
    Ok(z * z - p.c * z + 1.0 / d)
}

pub fn chi1(z: f64, p: &ModelParams) -> Result<f64> {
    let (r, d) = strip_terms(z, p)?;
    Ok(z * z - p.c * z - r / d)
}

pub fn chi0_jet(z: f64, p: &ModelParams) -> Result<Jet> {
    let (r, d) = strip_terms(z, p)?;
    let s = p.ctau;
    let br = p.b * r;
    Ok(Jet {
        value: z * z - p.c * z + 1.0 / d,
        d1: 2.0 * z - p.c - s * br / (d * d),
        d2: 2.0 + s * s * br / (d * d) + 2.0 * s * s * br * br / (d * d * d),
    })
}

pub fn chi1_jet(z: f64, p: &ModelParams) -> Result<Jet> {
    let (r, d) = strip_terms(z, p)?;
    let s = p.ctau;
    let br = p.b * r;
    Ok(Jet {
        value: z * z - p.c * z - r / d,
        d1: 2.0 * z - p.c + s * r / (d * d),
        d2: 2.0 - s * s * r / (d * d) - 2.0 * s * s * br * r / (d * d * d),
    })
}

/// Location and value of an extremum of a characteristic function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub z: f64,
    pub value: f64,
}

/// Real zeros `lambda2 <= lambda1` of `chi0` and `mu2 <= mu1` of `chi1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRoots {
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub critical_chi0: bool,
    pub critical_chi1: bool,
    /// Minimum of `chi0` on `z > 0`.
    pub chi0_min: Extremum,
    /// Maximum of `chi1` on the clipped negative interval.
    pub chi1_max: Extremum,
}

impl SpectralRoots {
    pub fn compute(p: &ModelParams) -> Result<Self> {
        let (lambda, critical_chi0, chi0_min) = chi0_roots_detail(p)?;
        let (mu, critical_chi1, chi1_max) = chi1_roots_detail(p)?;
        Ok(Self {
            lambda1: lambda.map(|(_, l1)| l1),
            lambda2: lambda.map(|(l2, _)| l2),
            mu1: mu.map(|(_, m1)| m1),
            mu2: mu.map(|(m2, _)| m2),
            critical_chi0,
            critical_chi1,
            chi0_min,
            chi1_max,
        })
    }

    pub fn has_chi0_roots(&self) -> bool {
        self.lambda2.is_some()
    }

    pub fn has_chi1_roots(&self) -> bool {
        self.mu1.is_some()
    }
}

/// Minimiser of the convex function `chi0` on `z > 0`.
///
/// `chi0'(0) < 0` always, so the minimiser is interior. Convexity is checked
/// on a sample of second differences before the derivative is bisected.
pub fn chi0_minimum(p: &ModelParams) -> Result<Extremum> {
    let d1 = |z: f64| chi0_jet(z, p).map(|j| j.d1).unwrap_or(f64::NAN);
    let mut hi = p.c.max(1.0);
    let mut tries = 0;
    while !(d1(hi) > 0.0) {
        hi *= 2.0;
        tries += 1;
        if tries > 64 {
            return Err(Error::Bracket(format!("chi0' stays negative up to z = {hi}")));
        }
    }
    check_convexity(p, hi)?;
    let z = if d1(0.0) >= 0.0 { 0.0 } else { bisect(d1, 0.0, hi)? };
    Ok(Extremum { z, value: chi0(z, p)? })
}

fn check_convexity(p: &ModelParams, hi: f64) -> Result<()> {
    const N: usize = 64;
    let h = hi / N as f64;
    let vals: Vec<f64> = (0..=N).map(|i| chi0(i as f64 * h, p)).collect::<Result<_>>()?;
    for i in 1..N {
        let second = vals[i + 1] - 2.0 * vals[i] + vals[i - 1];
        let scale = vals[i - 1].abs() + 2.0 * vals[i].abs() + vals[i + 1].abs();
        if second < -64.0 * f64::EPSILON * scale {
            return Err(Error::Convexity(format!(
                "negative second difference {second:e} at z = {} for {p:?}",
                i as f64 * h
            )));
        }
    }
    Ok(())
}

type RootPair = Option<(f64, f64)>;

fn chi0_roots_detail(p: &ModelParams) -> Result<(RootPair, bool, Extremum)> {
    let ext = chi0_minimum(p)?;
    if ext.value > CRITICAL_TOL {
        return Ok((None, false, ext));
    }
    let critical = ext.value.abs() <= CRITICAL_TOL;
    if ext.value >= 0.0 {
        return Ok((Some((ext.z, ext.z)), critical, ext));
    }
    let f = |z: f64| chi0(z, p).unwrap_or(f64::NAN);
    // chi0(0) = 1/(1-b) > 0; find a positive value to the right of the minimum.
    let mut hi = 2.0 * ext.z.max(p.c);
    let mut tries = 0;
    while !(f(hi) > 0.0) {
        hi *= 2.0;
        tries += 1;
        if tries > 64 {
            return Err(Error::Bracket("chi0 stays negative on the right".into()));
        }
    }
    let l2 = bisect(f, 0.0, ext.z)?;
    let l1 = bisect(f, ext.z, hi)?;
    Ok((Some((l2, l1)), critical, ext))
}

/// Positive zeros `(lambda2, lambda1)` of `chi0`, or `None` when
/// `min_{z>0} chi0 > 0`. A double root is returned as a repeated pair.
pub fn chi0_positive_roots(p: &ModelParams) -> Result<Option<(f64, f64)>> {
    Ok(chi0_roots_detail(p)?.0)
}

/// Search interval for negative zeros of `chi1`.
///
/// On the left the interval is clipped just inside the pole (when `b > 0`)
/// and cut where `chi1` is negative, increasing and concave; `chi1''` is
/// increasing in `z`, so no zero lies further left.
pub fn chi1_search_interval(p: &ModelParams) -> Result<(f64, f64)> {
    let right = -1e-14;
    let clip = p.pole().map(|pole| pole + (1e-6 * pole.abs()).max(1e-7));
    let mut z = -1.0 / p.ctau.max(1e-300);
    z = z.max(-1.0);
    for _ in 0..2048 {
        if let Some(c) = clip {
            if z <= c {
                return Ok((c, right));
            }
        }
        if let Ok(j) = chi1_jet(z, p) {
            if j.value < 0.0 && j.d1 > 0.0 && j.d2 < 0.0 {
                return Ok((z, right));
            }
        }
        z *= 2.0;
        if !z.is_finite() {
            break;
        }
    }
    Err(Error::Bracket(format!("no left end found for the chi1 search at {p:?}")))
}

/// Maximum of `chi1` over the negative search interval: dense sampling
/// followed by golden-section refinement, polished by bisection on `chi1'`
/// when the refined cell brackets a critical point.
pub fn chi1_maximum(p: &ModelParams) -> Result<Extremum> {
    let (lo, hi) = chi1_search_interval(p)?;
    let n = CHI1_SAMPLES;
    let step = (hi - lo) / (n - 1) as f64;
    let f = |z: f64| chi1(z, p).unwrap_or(f64::NEG_INFINITY);
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..n {
        let z = if i == n - 1 { hi } else { lo + i as f64 * step };
        let v = f(z);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    if best == n - 1 || best == 0 {
        let z = if best == 0 { lo } else { hi };
        return Ok(Extremum { z, value: f(z) });
    }
    let a = lo + (best - 1) as f64 * step;
    let b = (lo + (best + 1) as f64 * step).min(hi);
    let mut z = golden_max(f, a, b);
    let d1 = |z: f64| chi1_jet(z, p).map(|j| j.d1).unwrap_or(f64::NAN);
    if d1(a) > 0.0 && d1(b) < 0.0 {
        z = bisect(d1, a, b)?;
    }
    Ok(Extremum { z, value: f(z) })
}

fn chi1_roots_detail(p: &ModelParams) -> Result<(RootPair, bool, Extremum)> {
    let ext = chi1_maximum(p)?;
    if ext.value < -CRITICAL_TOL {
        return Ok((None, false, ext));
    }
    let critical = ext.value.abs() <= CRITICAL_TOL;
    if ext.value <= 0.0 {
        return Ok((Some((ext.z, ext.z)), critical, ext));
    }
    let (lo, hi) = chi1_search_interval(p)?;
    let f = |z: f64| chi1(z, p).unwrap_or(f64::NEG_INFINITY);
    let m2 = bisect(f, lo, ext.z)?;
    let m1 = bisect(f, ext.z, hi)?;
    Ok((Some((m2, m1)), critical, ext))
}

/// Negative zeros `(mu2, mu1)` of `chi1`, or `None` when the maximum of
/// `chi1` on the negative interval is below zero.
pub fn chi1_negative_roots(p: &ModelParams) -> Result<Option<(f64, f64)>> {
    Ok(chi1_roots_detail(p)?.0)
}
