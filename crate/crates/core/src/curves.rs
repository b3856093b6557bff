//! Boundary curves of the existence region in the `(tau, c)` plane.
//!
//! `c_star(tau)` is the smallest speed at which `chi0` has positive zeros,
//! `c_hash(tau)` (defined for `tau > tau_critical(b)`) the largest speed at
//! which `chi1` keeps negative zeros. Both are traced by bisection on the
//! sign of the relevant extremum of the characteristic function, which is
//! monotone in `c`.

use crate::bracket::{bisect, bisect_predicate};
use crate::error::{Error, Result};
use crate::spectral::{chi0_minimum, chi1_maximum, ModelParams, SpectralRoots};

/// Guaranteed accuracy of the returned curve speeds. The bisections run until
/// the bracket collapses, which is tighter than this.
pub const CURVE_TOL: f64 = 1e-10;
/// Cap on doublings when searching a `tau` bracket.
pub const TAU_DOUBLINGS: usize = 16;
/// Cap on doublings when searching a `c` bracket for `c_hash`.
pub const SPEED_DOUBLINGS: usize = 64;

/// A point on one of the curves with the double root found there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub tau: f64,
    pub c: f64,
    /// `lambda` (for `c_star`) or `mu` (for `c_hash`) where the two real zeros merge.
    pub double_root: f64,
}

fn check_b(b: f64) -> Result<()> {
    if b.is_finite() && (0.0..1.0).contains(&b) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("b = {b} must satisfy 0 <= b < 1")))
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("tau = {tau} must be positive")))
    }
}

/// Below this a negative floor at `c = 2` is rounding noise.
const ROUNDING_FLOOR: f64 = 1e-12;

/// Minimum of `chi0` over `z > 0` at speed `c`; zeros exist iff it is `<= 0`.
fn chi0_floor(b: f64, tau: f64, c: f64) -> f64 {
    ModelParams::new(b, tau, c).and_then(|p| chi0_minimum(&p)).map(|e| e.value).unwrap_or(f64::NAN)
}

/// Maximum of `chi1` over the negative axis; zeros exist iff it is `>= 0`.
fn chi1_ceiling(b: f64, tau: f64, c: f64) -> f64 {
    ModelParams::new(b, tau, c).and_then(|p| chi1_maximum(&p)).map(|e| e.value).unwrap_or(f64::NAN)
}

/// Critical speed `c_star(tau)`: bisection over `[2, 2 (1-b)^{-1/2}]`.
pub fn c_star(tau: f64, b: f64) -> Result<CurveSample> {
    check_tau(tau)?;
    check_b(b)?;
    if b == 0.0 {
        return Ok(CurveSample { tau, c: 2.0, double_root: 1.0 });
    }
    let lo = 2.0;
    let mut hi = 2.0 / (1.0 - b).sqrt();
    let floor = chi0_floor(b, tau, lo);
    if floor <= 0.0 && floor > -ROUNDING_FLOOR {
        // c_star - 2 is about b e^{-2 tau}, below what a double can resolve at 2
        return Ok(CurveSample { tau, c: 2.0, double_root: 1.0 });
    }
    if !(floor > 0.0) {
        return Err(Error::Bracket(format!("chi0 already has zeros at c = 2 (b = {b}, tau = {tau})")));
    }
    let mut widen = 0;
    while !(chi0_floor(b, tau, hi) <= 0.0) {
        hi *= 1.0 + 1e-9;
        widen += 1;
        if widen > 8 {
            return Err(Error::Bracket(format!("chi0 has no zeros at c = 2 (1-b)^(-1/2) (b = {b}, tau = {tau})")));
        }
    }
    let (c, _) = bisect_predicate(|c| chi0_floor(b, tau, c) <= 0.0, hi, lo, 0.0);
    let p = ModelParams::new(b, tau, c)?;
    let ext = chi0_minimum(&p)?;
    Ok(CurveSample { tau, c, double_root: ext.z })
}

/// Threshold delay `tau(b)`: below it every speed keeps negative zeros of `chi1`.
///
/// Uses the parametrisation `tau = s^2 e^{-s}`, `b = (1 - s) e^{-s}`, `s in (0, 1)`.
pub fn tau_critical(b: f64) -> Result<f64> {
    check_b(b)?;
    if b == 0.0 {
        return Ok((-1.0f64).exp());
    }
    let sigma = bisect(|s| (1.0 - s) * (-s).exp() - b, 0.0, 1.0)?;
    Ok(sigma * sigma * (-sigma).exp())
}

/// Upper speed curve `c_hash(tau)`, `None` when `tau <= tau_critical(b)`.
///
/// Returns [`Error::Unbounded`] when the doubling search for an upper
/// bracket passes `2^64`, which happens just above the threshold delay.
pub fn c_hash(tau: f64, b: f64) -> Result<Option<CurveSample>> {
    check_tau(tau)?;
    check_b(b)?;
    if tau <= tau_critical(b)? {
        return Ok(None);
    }
    let holds = |c: f64| chi1_ceiling(b, tau, c) >= 0.0;
    let mut yes = 1.0 / 16.0;
    let mut no;
    if holds(yes) {
        no = 2.0 * yes;
        let mut k = 0;
        while holds(no) {
            yes = no;
            no *= 2.0;
            k += 1;
            if k > SPEED_DOUBLINGS {
                return Err(Error::Unbounded(format!(
                    "c_hash exceeds 2^64 at tau = {tau} (threshold {})",
                    tau_critical(b)?
                )));
            }
        }
    } else {
        no = yes;
        yes *= 0.5;
        let mut k = 0;
        while !holds(yes) {
            no = yes;
            yes *= 0.5;
            k += 1;
            if k > SPEED_DOUBLINGS {
                return Err(Error::Bracket(format!("c_hash below 2^-64 at tau = {tau}")));
            }
        }
    }
    let (c, _) = bisect_predicate(holds, yes, no, 0.0);
    let p = ModelParams::new(b, tau, c)?;
    let ext = chi1_maximum(&p)?;
    Ok(Some(CurveSample { tau, c, double_root: ext.z }))
}

/// Membership of `(tau, c)` in the existence region with supporting data.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainVerdict {
    pub in_domain: bool,
    pub roots: SpectralRoots,
    pub c_star_at_tau: f64,
    /// `None` below the threshold delay; `Some(inf)` when the curve is
    /// numerically unbounded just above it.
    pub c_hash_at_tau: Option<f64>,
    pub tau_critical: f64,
}

impl DomainVerdict {
    /// Strictly above the critical curve, where the explicit sub-solution exists.
    pub fn is_noncritical(&self) -> bool {
        self.in_domain && !self.roots.critical_chi0
    }
}

pub fn in_domain(p: &ModelParams) -> Result<DomainVerdict> {
    let roots = SpectralRoots::compute(p)?;
    let c_star_at_tau = c_star(p.tau, p.b)?.c;
    let c_hash_at_tau = match c_hash(p.tau, p.b) {
        Ok(s) => s.map(|s| s.c),
        Err(Error::Unbounded(_)) => Some(f64::INFINITY),
        Err(e) => return Err(e),
    };
    Ok(DomainVerdict {
        in_domain: roots.has_chi0_roots() && roots.has_chi1_roots(),
        roots,
        c_star_at_tau,
        c_hash_at_tau,
        tau_critical: tau_critical(p.b)?,
    })
}

/// `c_star(tau) - c_hash(tau)`, `-inf` where `c_hash` is unbounded.
fn curve_gap(tau: f64, b: f64) -> Result<f64> {
    let cs = c_star(tau, b)?.c;
    match c_hash(tau, b) {
        Ok(Some(s)) => Ok(cs - s.c),
        Ok(None) | Err(Error::Unbounded(_)) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// The unique crossing `(tau0, c0)` of `c_star` and `c_hash`.
pub fn intersection(b: f64) -> Result<(f64, f64)> {
    check_b(b)?;
    if b == 0.0 {
        return Err(Error::InvalidParams("intersection needs 0 < b < 1".into()));
    }
    let tc = tau_critical(b)?;
    let lo = tc * (1.0 + 1e-6);
    if !(curve_gap(lo, b)? < 0.0) {
        return Err(Error::Bracket(format!("c_star >= c_hash already at tau = {lo}")));
    }
    let mut hi = 2.0 * tc;
    let mut k = 0;
    while !(curve_gap(hi, b)? > 0.0) {
        hi *= 2.0;
        k += 1;
        if k > TAU_DOUBLINGS {
            return Err(Error::Bracket(format!("no sign change of c_star - c_hash up to tau = {hi}")));
        }
    }
    let (t_yes, t_no) = bisect_predicate(|t| curve_gap(t, b).map(|g| g < 0.0).unwrap_or(false), lo, hi, 0.0);
    let g_yes = curve_gap(t_yes, b)?;
    let g_no = curve_gap(t_no, b)?;
    let tau0 = if g_yes.abs() <= g_no.abs() { t_yes } else { t_no };
    Ok((tau0, c_star(tau0, b)?.c))
}

/// Defects of the curve differential identities
///
/// ```text
/// c_star'(tau) = -c_star/tau + c_star^2 / (2 lambda tau)
/// c_hash'(tau) = -c_hash/tau + c_hash^2 / (2 mu tau)
/// ```
///
/// with `lambda`, `mu` the double roots, measured against central differences
/// with step `1e-5 tau`. Each defect is relative to the right-hand side.
pub fn curve_ode_check(b: f64, tau: f64) -> Result<(f64, f64)> {
    let h = 1e-5 * tau;
    let rel = |fd: f64, rhs: f64| {
        let diff = (fd - rhs).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / rhs.abs().max(f64::MIN_POSITIVE)
        }
    };

    let s = c_star(tau, b)?;
    let fd = (c_star(tau + h, b)?.c - c_star(tau - h, b)?.c) / (2.0 * h);
    let rhs = -s.c / tau + s.c * s.c / (2.0 * s.double_root * tau);
    let defect_star = rel(fd, rhs);

    let missing = || Error::InvalidParams(format!("tau = {tau} must exceed tau_critical({b}) for c_hash"));
    let s = c_hash(tau, b)?.ok_or_else(missing)?;
    let up = c_hash(tau + h, b)?.ok_or_else(missing)?.c;
    let down = c_hash(tau - h, b)?.ok_or_else(missing)?.c;
    let fd = (up - down) / (2.0 * h);
    let rhs = -s.c / tau + s.c * s.c / (2.0 * s.double_root * tau);
    Ok((defect_star, rel(fd, rhs)))
}

/// Whether `c tau <= 1/e`, the range where the classical exponential-order
/// quasi-monotonicity argument applies.
pub fn wu_zou_bound(tau: f64, c: f64) -> bool {
    c * tau <= (-1.0f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{chi0_jet, chi1_jet};

    #[test]
    fn classical_c_star() {
        for &tau in &[0.01, 0.1, 1.0, 10.0] {
            assert_eq!(c_star(tau, 0.0).unwrap().c, 2.0);
        }
        assert_eq!(tau_critical(0.0).unwrap(), (-1.0f64).exp());
    }

    #[test]
    fn c_star_double_root_residuals() {
        for &(b, tau) in &[(0.3, 1.0), (0.5, 0.2), (0.8, 3.0)] {
            let s = c_star(tau, b).unwrap();
            let p = ModelParams::new(b, tau, s.c).unwrap();
            let j = chi0_jet(s.double_root, &p).unwrap();
            assert!(j.value.abs() <= 1e-8 && j.d1.abs() <= 1e-8, "{j:?}");
            assert!(s.c > 2.0 && s.c < 2.0 / (1.0 - b).sqrt());
        }
    }

    #[test]
    fn c_star_small_tau_limit() {
        let s = c_star(1e-6, 0.5).unwrap();
        assert!((s.c - 2.0 * 2f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn tau_critical_parametric() {
        let s: f64 = 0.5;
        let b = (1.0 - s) * (-s).exp();
        let t = tau_critical(b).unwrap();
        assert!((t - s * s * (-s).exp()).abs() < 1e-10);
        assert!(tau_critical(1e-12).unwrap() > 0.3678);
        assert!(tau_critical(1.0 - 1e-9).unwrap() < 1e-8);
    }

    #[test]
    fn c_hash_absent_below_threshold() {
        for &b in &[0.0, 0.2, 0.7] {
            let t = 0.9 * tau_critical(b).unwrap();
            assert_eq!(c_hash(t, b).unwrap(), None);
        }
    }

    #[test]
    fn c_hash_double_root_classical() {
        let s = c_hash(1.0, 0.0).unwrap().unwrap();
        let p = ModelParams::new(0.0, 1.0, s.c).unwrap();
        let j = chi1_jet(s.double_root, &p).unwrap();
        assert!(j.value.abs() <= 1e-8 && j.d1.abs() <= 1e-8, "{j:?}");
    }

    #[test]
    fn c_hash_decreases_to_zero() {
        let vals: Vec<f64> = [2.0, 4.0, 8.0, 16.0].iter().map(|&t| c_hash(t, 0.3).unwrap().unwrap().c).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
        assert!(vals[3] < 0.5 * vals[0]);
    }

    #[test]
    fn domain_membership_classical() {
        let v = in_domain(&ModelParams::new(0.0, 0.3, 2.1).unwrap()).unwrap();
        assert!(v.in_domain);
        let v = in_domain(&ModelParams::new(0.0, 0.3, 1.9).unwrap()).unwrap();
        assert!(!v.in_domain);
    }

    #[test]
    fn ode_identity_vanishes_classically() {
        let (ds, _) = curve_ode_check(0.0, 1.0).unwrap();
        assert_eq!(ds, 0.0);
    }

    #[test]
    fn wu_zou() {
        assert!(wu_zou_bound(0.1, 2.0));
        assert!(!wu_zou_bound(0.2, 2.0));
        assert!(wu_zou_bound((-1.0f64).exp(), 1.0));
    }
}
