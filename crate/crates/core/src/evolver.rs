//! Method-of-lines integration of the neutral equation
//!
//! ```text
//! d/dt v = d2/dx2 v + u (1 - u(t - tau)),   v = u - b u(t - tau)
//! ```
//!
//! Explicit Euler in time on `v`, with `u` recovered from the history ring
//! as `u^{n+1} = v^{n+1} + b u^{n+1-k}`, `k dt = tau`.

use crate::error::{Error, Result};
use crate::gridops::GridProfile;
use crate::spectral::ModelParams;

/// Smallest horizon accepted by [`evolve`].
pub const MIN_HORIZON: f64 = 5.0;
/// Required distance between the front and either boundary.
pub const BOUNDARY_CLEARANCE: f64 = 10.0;
/// Domain padding beyond the path of the front on each side.
pub const DOMAIN_PAD: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub dx: f64,
    pub horizon: f64,
    /// Time step; `None` picks the largest `tau / k` below `dx^2 / 2`.
    pub dt: Option<f64>,
}

impl EvolveConfig {
    pub fn new(dx: f64, horizon: f64) -> Self {
        Self { dx, horizon, dt: None }
    }

    /// `(dt, k)` with `k dt = tau` and `dt <= dx^2 / 2`.
    pub fn time_step(&self, tau: f64) -> Result<(f64, usize)> {
        if !(self.dx.is_finite() && self.dx > 0.0) {
            return Err(Error::Evolve(format!("dx = {} must be positive", self.dx)));
        }
        let limit = self.dx * self.dx / 2.0;
        match self.dt {
            None => {
                let k = (tau / limit).ceil().max(1.0) as usize;
                Ok((tau / k as f64, k))
            }
            Some(dt) => {
                if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
                    return Err(Error::Evolve(format!("dt = {dt} violates the stability limit dx^2/2 = {limit}")));
                }
                let k = (tau / dt).round();
                if k < 1.0 || (k * dt - tau).abs() > 1e-9 * tau {
                    return Err(Error::Evolve(format!("tau = {tau} is not a multiple of dt = {dt}")));
                }
                Ok((tau / k, k as usize))
            }
        }
    }
}

/// State of the scheme: a ring of the last `k + 1` slices of `u`.
#[derive(Debug, Clone)]
pub struct EvolveState {
    pub b: f64,
    pub dx: f64,
    pub dt: f64,
    pub k: usize,
    pub x_lo: f64,
    pub time: f64,
    pub left_value: f64,
    pub right_value: f64,
    ring: Vec<Vec<f64>>,
    /// Ring slot of the newest slice.
    head: usize,
    v: Vec<f64>,
    scratch: Vec<f64>,
}

impl EvolveState {
    /// Samples `history(s, x)` for `s = -k dt, ..., 0` on
    /// `x_lo + i dx`, `i < nx`; the end values of the newest slice become
    /// the Dirichlet data.
    pub fn new<H>(p: &ModelParams, dx: f64, dt: f64, k: usize, x_lo: f64, nx: usize, history: H) -> Result<Self>
    where
        H: Fn(f64, f64) -> f64,
    {
        if nx < 3 {
            return Err(Error::Evolve("need at least three spatial points".into()));
        }
        if dt > dx * dx / 2.0 * (1.0 + 1e-12) {
            return Err(Error::Evolve(format!("dt = {dt} violates the stability limit {}", dx * dx / 2.0)));
        }
        if k == 0 || ((k as f64) * dt - p.tau).abs() > 1e-9 * p.tau {
            return Err(Error::Evolve(format!("history misaligned: {k} * {dt} != tau = {}", p.tau)));
        }
        let ring: Vec<Vec<f64>> = (0..=k)
            .map(|j| {
                let s = -((k - j) as f64) * dt;
                (0..nx).map(|i| history(s, x_lo + i as f64 * dx)).collect()
            })
            .collect();
        let newest = &ring[k];
        let (left_value, right_value) = (newest[0], newest[nx - 1]);
        let v = newest.iter().zip(&ring[0]).map(|(u, d)| u - p.b * d).collect();
        Ok(Self {
            b: p.b,
            dx,
            dt,
            k,
            x_lo,
            time: 0.0,
            left_value,
            right_value,
            ring,
            head: k,
            v,
            scratch: vec![0.0; nx],
        })
    }

    pub fn nx(&self) -> usize {
        self.v.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.dx
    }

    /// Current slice of `u`.
    pub fn u(&self) -> &[f64] {
        &self.ring[self.head]
    }

    pub fn step(&mut self) {
        let nx = self.nx();
        let lap = self.dt / (self.dx * self.dx);
        {
            let u = &self.ring[self.head];
            let len = self.ring.len();
            let delayed = &self.ring[(self.head + len - self.k) % len];
            let v = &self.v;
            let out = &mut self.scratch;
            for i in 1..nx - 1 {
                out[i] = v[i] + lap * (v[i + 1] - 2.0 * v[i] + v[i - 1]) + self.dt * u[i] * (1.0 - delayed[i]);
            }
        }
        // u^{n-k} sits in the slot after the head and is overwritten;
        // u^{n+1-k} is the slot after that (the head itself when k = 1)
        let len = self.ring.len();
        let oldest = (self.head + 1) % len;
        let lag = (self.head + 2) % len;
        let mut next = std::mem::take(&mut self.ring[oldest]);
        let lagged = &self.ring[lag];
        for i in 1..nx - 1 {
            next[i] = self.scratch[i] + self.b * lagged[i];
        }
        next[0] = self.left_value;
        next[nx - 1] = self.right_value;
        for i in 0..nx {
            self.v[i] = next[i] - self.b * lagged[i];
        }
        self.ring[oldest] = next;
        self.head = oldest;
        self.time += self.dt;
    }

    /// Interpolated position of the first `level` crossing of `u`.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        let u = self.u();
        u.windows(2).enumerate().find_map(|(i, w)| {
            if w[0] < level && w[1] >= level {
                Some(self.x(i) + self.dx * (level - w[0]) / (w[1] - w[0]))
            } else {
                None
            }
        })
    }

    pub fn range(&self) -> (f64, f64) {
        self.u().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Slice `u(t - tau)`.
    pub fn delayed(&self) -> &[f64] {
        &self.ring[(self.head + 1) % self.ring.len()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveReport {
    /// Magnitude of the fitted front velocity.
    pub speed: f64,
    pub shape_error: f64,
    /// `(t, x)` of the `0.5` crossing, one row per time step.
    pub positions: Vec<(f64, f64)>,
    pub dx: f64,
    pub dt: f64,
    pub k: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    /// Extreme values of `u` over the whole run.
    pub u_min: f64,
    pub u_max: f64,
    /// `(x, u)` at the final time.
    pub final_slice: Vec<(f64, f64)>,
}

/// Runs the PDE from the travelling-wave history `u(s, x) = phi(x + c s)`.
///
/// The front `phi(x + c t)` moves left; the domain covers its path plus
/// [`DOMAIN_PAD`] on each side.
pub fn evolve(profile_u: &GridProfile, p: &ModelParams, cfg: &EvolveConfig) -> Result<EvolveReport> {
    if !(cfg.horizon >= MIN_HORIZON) {
        return Err(Error::Evolve(format!("horizon {} is below {MIN_HORIZON}", cfg.horizon)));
    }
    let (dt, k) = cfg.time_step(p.tau)?;
    let x0 = profile_u.crossing(0.5).ok_or_else(|| Error::Evolve("profile never crosses 0.5".into()))?;
    let x_lo = x0 - p.c * cfg.horizon - DOMAIN_PAD;
    let x_hi = x0 + DOMAIN_PAD;
    let nx = ((x_hi - x_lo) / cfg.dx).ceil() as usize + 1;
    let c = p.c;
    let mut state = EvolveState::new(p, cfg.dx, dt, k, x_lo, nx, |s, x| profile_u.value_at(x + c * s))?;
    state.left_value = 0.0;
    state.right_value = 1.0;
    let x_hi = state.x(nx - 1);

    let steps = (cfg.horizon / dt).round() as usize;
    let mut positions = Vec::with_capacity(steps + 1);
    let (mut u_min, mut u_max) = state.range();
    let record = |state: &EvolveState, positions: &mut Vec<(f64, f64)>| -> Result<()> {
        let x = state.crossing(0.5).ok_or_else(|| Error::Evolve(format!("front lost at t = {}", state.time)))?;
        if x - x_lo < BOUNDARY_CLEARANCE || x_hi - x < BOUNDARY_CLEARANCE {
            return Err(Error::Evolve(format!("front at x = {x} is within {BOUNDARY_CLEARANCE} of a boundary")));
        }
        positions.push((state.time, x));
        Ok(())
    };
    record(&state, &mut positions)?;
    for _ in 0..steps {
        state.step();
        let (lo, hi) = state.range();
        u_min = u_min.min(lo);
        u_max = u_max.max(hi);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Evolve(format!("solution blew up at t = {}", state.time)));
        }
        record(&state, &mut positions)?;
    }

    let t_end = state.time;
    let half = t_end / 2.0;
    let tail: Vec<&(f64, f64)> = positions.iter().filter(|(t, _)| *t >= half).collect();
    let speed = fit_slope(&tail).abs();
    let shape_error =
        (0..nx).map(|i| (state.u()[i] - profile_u.value_at(state.x(i) + c * t_end)).abs()).fold(0.0, f64::max);
    let final_slice = (0..nx).map(|i| (state.x(i), state.u()[i])).collect();
    Ok(EvolveReport { speed, shape_error, positions, dx: cfg.dx, dt, k, x_lo, x_hi, u_min, u_max, final_slice })
}

fn fit_slope(pts: &[&(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mx = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mx)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_step_rules() {
        let cfg = EvolveConfig::new(0.05, 10.0);
        let (dt, k) = cfg.time_step(0.2).unwrap();
        assert_eq!(k, 160);
        assert!((dt * k as f64 - 0.2).abs() < 1e-15 && dt <= 0.05 * 0.05 / 2.0);
        let bad = EvolveConfig { dt: Some(0.01), ..cfg };
        assert!(matches!(bad.time_step(0.2), Err(Error::Evolve(_))));
        let odd = EvolveConfig { dt: Some(0.0011), ..cfg };
        assert!(matches!(odd.time_step(0.2), Err(Error::Evolve(_))));
        let ok = EvolveConfig { dt: Some(0.001), ..cfg };
        assert_eq!(ok.time_step(0.2).unwrap().1, 200);
    }

    #[test]
    fn equilibrium_one_is_preserved() {
        let p = ModelParams::new(0.3, 0.1, 2.0).unwrap();
        let mut s = EvolveState::new(&p, 0.1, 0.005, 20, 0.0, 50, |_, _| 1.0).unwrap();
        for _ in 0..500 {
            s.step();
        }
        assert!(s.u().iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn ring_keeps_delay() {
        let p = ModelParams::new(0.5, 0.03, 1.0).unwrap();
        let mut s = EvolveState::new(&p, 0.5, 0.01, 3, 0.0, 5, |t, x| t + x).unwrap();
        let mut newest = Vec::new();
        for _ in 0..6 {
            newest.push(s.u().to_vec());
            s.step();
        }
        newest.push(s.u().to_vec());
        assert_eq!(s.delayed(), newest[3].as_slice());
    }

    #[test]
    fn misaligned_history_is_rejected() {
        let p = ModelParams::new(0.0, 0.1, 2.0).unwrap();
        assert!(EvolveState::new(&p, 0.1, 0.004, 20, 0.0, 10, |_, _| 0.0).is_err());
        assert!(EvolveState::new(&p, 0.1, 0.01, 10, 0.0, 10, |_, _| 0.0).is_err());
    }
}
