//! Grid versions of the delay operators acting on profiles.
//!
//! On a grid with step `dt = c tau / m` the shift `(S g)(t) = g(t - c tau)`
//! is an exact index offset by `m`, so the resolvent
//! `B = (I - b S)^{-1} = sum_j b^j S^j`, the delayed operator `L = S B` and
//! the nonlinearity `F(g) = B g (1 - (1 - b) S B g)` need no interpolation.

use crate::error::{Error, Result};
use crate::spectral::{series_depth, ModelParams};

/// Values of a function on the uniform grid `t_start + i dt`, `i < n`.
///
/// Left of the grid the function continues as
/// `g(t_start) exp(left_rate (t - t_start))`; right of it as `right_value`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProfile {
    pub t_start: f64,
    pub dt: f64,
    /// Grid steps per delay, `dt * m = c tau`.
    pub m: usize,
    pub values: Vec<f64>,
    pub left_rate: f64,
    pub right_value: f64,
}

impl GridProfile {
    pub fn new(t_start: f64, dt: f64, m: usize, values: Vec<f64>, left_rate: f64, right_value: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        if !(dt.is_finite() && dt > 0.0) || !t_start.is_finite() {
            return Err(Error::InvalidParams(format!("bad grid: t_start = {t_start}, dt = {dt}")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidParams("a profile needs at least two points".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite value at index {i}")));
        }
        if !left_rate.is_finite() || !right_value.is_finite() {
            return Err(Error::InvalidParams("non-finite extension data".into()));
        }
        Ok(Self { t_start, dt, m, values, left_rate, right_value })
    }

    /// Samples `f` on `[-half_width, half_width]` with `dt = c tau / m`.
    pub fn sample<F>(half_width: f64, ctau: f64, m: usize, left_rate: f64, right_value: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        if !(half_width > 0.0) {
            return Err(Error::InvalidParams(format!("half width {half_width} must be positive")));
        }
        let dt = ctau / m as f64;
        let n = (2.0 * half_width / dt).floor() as usize + 1;
        let t_start = -half_width;
        let values = (0..n).map(|i| f(t_start + i as f64 * dt)).collect();
        Self::new(t_start, dt, m, values, left_rate, right_value)
    }

    /// Same grid and extension policy, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { values, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.n() - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n()).map(|i| self.t(i))
    }

    /// Value at a (possibly out-of-range) grid index.
    pub fn at_index(&self, k: isize) -> f64 {
        if k < 0 {
            self.values[0] * (self.left_rate * k as f64 * self.dt).exp()
        } else if (k as usize) < self.values.len() {
            self.values[k as usize]
        } else {
            self.right_value
        }
    }

    /// Value at an arbitrary time: linear interpolation on the grid, the
    /// extension policy outside it.
    pub fn value_at(&self, t: f64) -> f64 {
        let x = (t - self.t_start) / self.dt;
        if x < 0.0 {
            return self.values[0] * (self.left_rate * (t - self.t_start)).exp();
        }
        let last = self.n() - 1;
        if x > last as f64 {
            return self.right_value;
        }
        let i = (x.floor() as usize).min(last - 1);
        let w = x - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// `alpha * self + beta * other` on a shared grid.
    pub fn combine(&self, alpha: f64, other: &GridProfile, beta: f64) -> Result<GridProfile> {
        same_grid(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| alpha * a + beta * b).collect();
        Ok(GridProfile { values, right_value: alpha * self.right_value + beta * other.right_value, ..self.clone() })
    }

    /// Smallest forward difference `g[i+1] - g[i]`.
    pub fn min_forward_difference(&self) -> f64 {
        self.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Linear-interpolated time where the profile first reaches `level`.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        self.values.windows(2).enumerate().find_map(|(i, w)| {
            if w[0] < level && w[1] >= level {
                Some(self.t(i) + self.dt * (level - w[0]) / (w[1] - w[0]))
            } else if w[0] == level {
                Some(self.t(i))
            } else {
                None
            }
        })
    }
}

pub(crate) fn same_grid(a: &GridProfile, b: &GridProfile) -> Result<()> {
    let tol = 1e-12 * a.dt;
    if a.n() != b.n() || a.m != b.m || (a.dt - b.dt).abs() > tol || (a.t_start - b.t_start).abs() > tol {
        return Err(Error::InvalidParams("profiles live on different grids".into()));
    }
    Ok(())
}

/// Parameters of the grid operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorConfig {
    pub b: f64,
    /// Wave speed, used by the differential part of the profile equation.
    pub c: f64,
    pub ctau: f64,
    /// Grid steps per delay.
    pub m: usize,
    /// Truncation index of the geometric series, `b^(J+1) < trunc_tol`.
    pub depth: usize,
    pub trunc_tol: f64,
}

impl OperatorConfig {
    pub fn new(p: &ModelParams, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        Ok(Self { b: p.b, c: p.c, ctau: p.ctau, m, depth: series_depth(p.b, p.trunc_tol), trunc_tol: p.trunc_tol })
    }

    pub fn dt(&self) -> f64 {
        self.ctau / self.m as f64
    }

    /// `(1 - b^(J+1)) / (1 - b)`, the truncated value of `B 1`.
    pub fn series_sum(&self) -> f64 {
        (0..=self.depth).map(|j| self.b.powi(j as i32)).sum()
    }

    pub fn check_aligned(&self, g: &GridProfile) -> Result<()> {
        let dt_m = g.dt * self.m as f64;
        if g.m != self.m || (dt_m - self.ctau).abs() > 1e-12 * self.ctau {
            return Err(Error::Misaligned { dt_m: g.dt * g.m as f64, ctau: self.ctau });
        }
        Ok(())
    }
}

/// `(S g)_i = g_{i-m}`.
pub fn shift(g: &GridProfile, cfg: &OperatorConfig) -> Result<GridProfile> {
    cfg.check_aligned(g)?;
    let m = cfg.m as isize;
    let values = (0..g.n() as isize).map(|i| g.at_index(i - m)).collect();
    Ok(g.with_values(values))
}

/// `B g = sum_{j=0..J} b^j S^j g`.
pub fn resolvent_b(g: &GridProfile, cfg: &OperatorConfig) -> Result<GridProfile> {
    cfg.check_aligned(g)?;
    let m = cfg.m as isize;
    let mut values = g.values.clone();
    let mut weight = 1.0;
    for j in 1..=cfg.depth as isize {
        weight *= cfg.b;
        for (i, v) in values.iter_mut().enumerate() {
            *v += weight * g.at_index(i as isize - j * m);
        }
    }
    Ok(GridProfile { values, right_value: g.right_value * cfg.series_sum(), ..g.clone() })
}

/// `L g = S B g`.
pub fn op_l(g: &GridProfile, cfg: &OperatorConfig) -> Result<GridProfile> {
    shift(&resolvent_b(g, cfg)?, cfg)
}

/// `F(g) = B g (1 - (1 - b) S B g)`.
pub fn op_f(g: &GridProfile, cfg: &OperatorConfig) -> Result<GridProfile> {
    let bg = resolvent_b(g, cfg)?;
    let sbg = shift(&bg, cfg)?;
    let k = 1.0 - cfg.b;
    let values = bg.values.iter().zip(&sbg.values).map(|(x, y)| x * (1.0 - k * y)).collect();
    Ok(GridProfile { values, right_value: bg.right_value * (1.0 - k * bg.right_value), ..g.clone() })
}

/// `min_t [F(high) - F(low) + L(high - low)](t)` for `0 <= low <= high <= 1`.
pub fn qm_defect(low: &GridProfile, high: &GridProfile, cfg: &OperatorConfig) -> Result<f64> {
    same_grid(low, high)?;
    if low.left_rate != high.left_rate {
        return Err(Error::Order("profiles extend with different left rates".into()));
    }
    for (i, (l, h)) in low.values.iter().zip(&high.values).enumerate() {
        if !(0.0 <= *l && l <= h && *h <= 1.0) {
            return Err(Error::Order(format!("0 <= {l} <= {h} <= 1 fails at index {i}")));
        }
    }
    let fh = op_f(high, cfg)?;
    let fl = op_f(low, cfg)?;
    let lh = op_l(high, cfg)?;
    let ll = op_l(low, cfg)?;
    Ok((0..low.n()).map(|i| fh.values[i] - fl.values[i] + (lh.values[i] - ll.values[i])).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(b: f64, tau: f64, c: f64, m: usize) -> OperatorConfig {
        OperatorConfig::new(&ModelParams::new(b, tau, c).unwrap(), m).unwrap()
    }

    fn constant(cfg: &OperatorConfig, v: f64) -> GridProfile {
        GridProfile::sample(10.0, cfg.ctau, cfg.m, 0.0, v, |_| v).unwrap()
    }

    #[test]
    fn shift_by_index() {
        let c = cfg(0.0, 1.0, 1.0, 1);
        let g = GridProfile::new(0.0, 1.0, 1, vec![0.0, 1.0, 2.0, 3.0], 0.5, 3.0).unwrap();
        let s = shift(&g, &c).unwrap();
        assert_eq!(&s.values[1..], &[0.0, 1.0, 2.0]);
        assert_eq!(s.values[0], 0.0);

        let g = GridProfile::new(0.0, 1.0, 1, vec![2.0, 1.0, 2.0, 3.0], 0.5, 3.0).unwrap();
        let s = shift(&g, &c).unwrap();
        assert!((s.values[0] - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn shift_exponential_exact() {
        let c = cfg(0.3, 0.7, 2.0, 8);
        let lam = 0.45;
        let g = GridProfile::sample(5.0, c.ctau, c.m, lam, 0.0, |t| 0.8 * (lam * t).exp()).unwrap();
        let s = shift(&g, &c).unwrap();
        for (i, v) in s.values.iter().enumerate() {
            let want = 0.8 * (lam * (g.t(i) - c.ctau)).exp();
            assert!((v - want).abs() <= 1e-12 * want, "{i}: {v} vs {want}");
        }
    }

    #[test]
    fn misaligned_grid_rejected() {
        let c = cfg(0.3, 1.0, 2.0, 4);
        let g = GridProfile::new(0.0, 0.3, 4, vec![0.0; 10], 0.0, 0.0).unwrap();
        assert!(matches!(shift(&g, &c), Err(Error::Misaligned { .. })));
        assert!(matches!(op_f(&g, &c), Err(Error::Misaligned { .. })));
    }

    #[test]
    fn resolvent_of_constant() {
        let c = cfg(0.4, 0.5, 2.5, 4);
        let g = constant(&c, 1.0);
        let bg = resolvent_b(&g, &c).unwrap();
        let want = (1.0 - 0.4f64.powi(c.depth as i32 + 1)) / 0.6;
        assert!(bg.values.iter().all(|v| (v - want).abs() < 1e-14));
        assert!((want - 1.0 / 0.6).abs() < c.trunc_tol);
    }

    #[test]
    fn resolvent_identity_at_b_zero() {
        let c = cfg(0.0, 0.5, 2.5, 4);
        let g = GridProfile::sample(5.0, c.ctau, c.m, 0.3, 1.0, |t| t.sin()).unwrap();
        assert_eq!(resolvent_b(&g, &c).unwrap().values, g.values);
        assert_eq!(op_l(&g, &c).unwrap().values, shift(&g, &c).unwrap().values);
    }

    #[test]
    fn resolvent_and_l_of_exponential() {
        let c = cfg(0.25, 0.6, 3.0, 16);
        let lam = 0.4;
        let g = GridProfile::sample(8.0, c.ctau, c.m, lam, 0.0, |t| (lam * t).exp()).unwrap();
        let q = 1.0 - 0.25 * (-lam * c.ctau).exp();
        let bg = resolvent_b(&g, &c).unwrap();
        let lg = op_l(&g, &c).unwrap();
        for i in 0..g.n() {
            let t = g.t(i);
            let want_b = (lam * t).exp() / q;
            let want_l = (lam * (t - c.ctau)).exp() / q;
            assert!((bg.values[i] - want_b).abs() <= 1e-13 * want_b + c.trunc_tol);
            assert!((lg.values[i] - want_l).abs() <= 1e-13 * want_l + c.trunc_tol);
        }
    }

    #[test]
    fn f_at_equilibria() {
        let c = cfg(0.2, 0.2, 3.0, 16);
        let zero = constant(&c, 0.0);
        assert!(op_f(&zero, &c).unwrap().values.iter().all(|&v| v == 0.0));
        let one = constant(&c, 1.0);
        let tol = 2.0 * c.trunc_tol / (0.8f64 * 0.8);
        assert!(op_f(&one, &c).unwrap().values.iter().all(|v| v.abs() <= tol));
    }

    #[test]
    fn f_reduces_to_delayed_logistic() {
        let c = cfg(0.0, 0.3, 2.0, 6);
        let g = GridProfile::sample(4.0, c.ctau, c.m, 0.0, 1.0, |t| 0.5 + 0.4 * t.tanh()).unwrap();
        let f = op_f(&g, &c).unwrap();
        for i in c.m..g.n() {
            let want = g.values[i] * (1.0 - g.values[i - c.m]);
            assert!((f.values[i] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn qm_defect_basic() {
        let c = cfg(0.2, 0.2, 3.0, 16);
        let g = GridProfile::sample(10.0, c.ctau, c.m, 0.0, 1.0, |t| 0.5 + 0.5 * t.tanh()).unwrap();
        assert_eq!(qm_defect(&g, &g, &c).unwrap(), 0.0);

        let zero = constant(&c, 0.0);
        let one = constant(&c, 1.0);
        let d = qm_defect(&zero, &one, &c).unwrap();
        assert!(d >= -2.0 * c.trunc_tol);
        assert!((d - c.series_sum()).abs() < 1e-12);

        assert!(matches!(qm_defect(&one, &zero, &c), Err(Error::Order(_))));
    }

    #[test]
    fn crossing_interpolates() {
        let g = GridProfile::new(0.0, 1.0, 1, vec![0.0, 0.2, 0.6, 1.0], 0.0, 1.0).unwrap();
        assert!((g.crossing(0.5).unwrap() - 1.75).abs() < 1e-15);
        assert!((g.value_at(1.75) - 0.5).abs() < 1e-15);
    }
}
