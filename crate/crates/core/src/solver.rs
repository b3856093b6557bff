//! Monotone iteration for the front profile.
//!
//! Each step solves the linear delayed boundary-value problem
//!
//! ```text
//! h'' - c h' - L h = -(F(g) + L g)   on [-T, T],   h(T) = 1
//! ```
//!
//! with centred differences. Left of `-T` (and at `-T` itself) every iterate
//! keeps the exponential tail of the starting super-solution; a zero left
//! boundary would let the decreasing iterates slide the front to the right
//! wall. The delayed terms `b^j h(t - (j+1) c tau)` are exact index
//! offsets, so the matrix is banded with one super-diagonal and `(J+1) m`
//! sub-diagonals; it is factored once and reused.

use crate::bounds::{build_sub, build_super, derivatives, residual_pew, SubSolution, SuperSolution};
use crate::curves::{c_star, in_domain};
use crate::error::{Error, Result};
use crate::gridops::{op_f, op_l, resolvent_b, same_grid, shift, GridProfile, OperatorConfig};
use crate::linalg::{BandLu, BandMatrix};
use crate::spectral::{ModelParams, SpectralRoots};

/// Slack allowed in the ordering checks of the iteration.
pub const ORDER_SLACK: f64 = 1e-9;
/// Values below this are treated as numerically zero by the tail fit.
pub const BOUNDARY_FLOOR: f64 = 1e-10;
/// Upper end of the tail-fit window.
pub const TAIL_WINDOW_TOP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Half-width `T` of the truncated domain; `None` picks
    /// `40 / min(lambda2, |mu1|)`.
    pub half_width: Option<f64>,
    /// Grid steps per delay `c tau`.
    pub m: usize,
    pub tol: f64,
    pub max_iters: usize,
    /// Start from the super-solution translated right by this many delays.
    pub start_shift: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { half_width: None, m: 16, tol: 1e-8, max_iters: 500, start_shift: 0.0 }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParams(format!("tol = {} must be positive", self.tol)));
        }
        if let Some(t) = self.half_width {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidParams(format!("T = {t} must be positive")));
            }
        }
        if !(self.start_shift.is_finite() && self.start_shift >= 0.0) {
            return Err(Error::InvalidParams("start shift must be non-negative".into()));
        }
        Ok(())
    }

    pub fn resolve_half_width(&self, roots: &SpectralRoots) -> Result<f64> {
        if let Some(t) = self.half_width {
            return Ok(t);
        }
        match (roots.lambda2, roots.mu1) {
            (Some(l2), Some(m1)) => Ok(40.0 / l2.min(m1.abs())),
            _ => Err(Error::OutsideDomain("no roots to size the domain".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub converged: bool,
    pub iters: usize,
    /// Sup-norm of successive differences.
    pub deltas: Vec<f64>,
    /// Largest positive part of `phi_{n+1} - phi_n`.
    pub monotone_defect: f64,
    /// Largest violation of `phi_- <= phi_n <= phi_+`.
    pub sandwich_defect: f64,
    /// Most negative forward difference over all iterates.
    pub min_forward_difference: f64,
    pub min_pivot_ratio: f64,
    pub half_width: f64,
    pub profile_w: GridProfile,
    pub profile_u: GridProfile,
    pub residual_pew_sup: f64,
    pub residual_pe_sup: f64,
    pub tail_slope: f64,
    pub n1_identity_defect: f64,
    pub lambda2: f64,
    pub mu1: f64,
}

impl IterationReport {
    /// Convergence plus all invariants of the monotone scheme.
    pub fn invariants_hold(&self) -> bool {
        self.converged
            && self.monotone_defect <= ORDER_SLACK
            && self.sandwich_defect <= ORDER_SLACK
            && self.min_forward_difference >= -ORDER_SLACK
    }
}

/// Factored matrix of the linear step on a fixed grid.
#[derive(Debug, Clone)]
pub struct LinearStep {
    cfg: OperatorConfig,
    lu: BandLu,
    n: usize,
}

impl LinearStep {
    pub fn new(template: &GridProfile, cfg: &OperatorConfig) -> Result<Self> {
        let cfg = *cfg;
        cfg.check_aligned(template)?;
        let n = template.n();
        if n < 3 {
            return Err(Error::InvalidParams("grid too short for the boundary-value problem".into()));
        }
        let m = cfg.m;
        let dt = template.dt;
        let kl = ((cfg.depth + 1) * m).max(1).min(n - 1);
        let mut a = BandMatrix::zeros(n, kl, 1);
        a.set(0, 0, 1.0);
        a.set(n - 1, n - 1, 1.0);
        let lower = 1.0 / (dt * dt) + cfg.c / (2.0 * dt);
        let upper = 1.0 / (dt * dt) - cfg.c / (2.0 * dt);
        for i in 1..n - 1 {
            a.add(i, i - 1, lower);
            a.add(i, i, -2.0 / (dt * dt));
            a.add(i, i + 1, upper);
            let mut w = 1.0;
            for j in 0..=cfg.depth {
                let off = (j + 1) * m;
                if off > i {
                    break;
                }
                a.add(i, i - off, -w);
                w *= cfg.b;
            }
        }
        let lu = a.factor()?;
        Ok(Self { cfg, lu, n })
    }

    pub fn min_pivot_ratio(&self) -> f64 {
        self.lu.min_pivot_ratio
    }

    /// One application of the iteration map with `h(T) = right`.
    ///
    /// Left of the grid `h` and `g` both follow the extension of `g`
    /// (`g[0] e^{left_rate (t - t0)}`), which also fixes `h(-T) = g[0]`.
    pub fn apply(&self, g: &GridProfile, right: f64) -> Result<GridProfile> {
        if g.n() != self.n {
            return Err(Error::InvalidParams("profile does not match the factored grid".into()));
        }
        let f = op_f(g, &self.cfg)?;
        let l = op_l(g, &self.cfg)?;
        let mut rhs: Vec<f64> = f.values.iter().zip(&l.values).map(|(a, b)| -(a + b)).collect();
        let m = self.cfg.m;
        for (i, r) in rhs.iter_mut().enumerate().take(self.n - 1).skip(1) {
            let mut w = 1.0;
            for j in 0..=self.cfg.depth {
                let k = i as isize - ((j + 1) * m) as isize;
                if k < 0 {
                    *r += w * g.at_index(k);
                }
                w *= self.cfg.b;
            }
        }
        rhs[0] = g.values[0];
        rhs[self.n - 1] = right;
        let values = self.lu.solve(&rhs);
        Ok(GridProfile { values, right_value: right, ..g.clone() })
    }
}

/// One step of the iteration map from `g`, with `h(T) = right`.
pub fn iterate_once(g: &GridProfile, cfg: &OperatorConfig, right: f64) -> Result<GridProfile> {
    LinearStep::new(g, cfg)?.apply(g, right)
}

/// Super- and sub-solution for noncritical parameters, rendered on the
/// solver grid.
pub fn bounds_for(
    p: &ModelParams,
    half_width: f64,
    m: usize,
) -> Result<(SuperSolution, GridProfile, SubSolution, GridProfile)> {
    let roots = SpectralRoots::compute(p)?;
    let (sup, gp) = build_super(&roots, half_width, p.ctau, m)?;
    let (sub, gm) = build_sub(&sup, p, half_width, m)?;
    Ok((sup, gp, sub, gm))
}

fn check_noncritical(p: &ModelParams) -> Result<SpectralRoots> {
    let verdict = in_domain(p)?;
    if !verdict.in_domain {
        return Err(Error::OutsideDomain(format!(
            "(tau, c) = ({}, {}) is not in the existence region (c*(tau) = {})",
            p.tau, p.c, verdict.c_star_at_tau
        )));
    }
    if !verdict.is_noncritical() {
        return Err(Error::OutsideDomain(format!("c = {} is critical for tau = {}", p.c, p.tau)));
    }
    Ok(verdict.roots)
}

/// Monotone iteration from the (possibly translated) super-solution.
pub fn solve_front(p: &ModelParams, opts: &SolveOptions) -> Result<IterationReport> {
    opts.validate()?;
    let roots = check_noncritical(p)?;
    let half_width = opts.resolve_half_width(&roots)?;
    let (sup, _, sub, _) = bounds_for(p, half_width, opts.m)?;
    let s = opts.start_shift * p.ctau;
    let upper = GridProfile::sample(half_width, p.ctau, opts.m, sup.lambda2, 1.0, |t| sup.value(t - s))?;
    let lower = upper.with_values(upper.times().map(|t| sub.value(t - s)).collect());
    let cfg = OperatorConfig::new(p, opts.m)?;
    let step = LinearStep::new(&upper, &cfg)?;

    let mut g = upper.clone();
    *g.values.last_mut().unwrap() = 1.0;
    let mut deltas = Vec::new();
    let mut monotone_defect: f64 = 0.0;
    let mut sandwich_defect: f64 = 0.0;
    let mut min_fd = g.min_forward_difference();
    let mut converged = false;
    for _ in 0..opts.max_iters {
        let h = step.apply(&g, 1.0)?;
        let mut delta: f64 = 0.0;
        for i in 0..h.n() {
            let d = h.values[i] - g.values[i];
            delta = delta.max(d.abs());
            monotone_defect = monotone_defect.max(d);
            sandwich_defect = sandwich_defect.max(lower.values[i] - h.values[i]).max(h.values[i] - upper.values[i]);
        }
        min_fd = min_fd.min(h.min_forward_difference());
        deltas.push(delta);
        g = h;
        if delta < opts.tol {
            converged = true;
            break;
        }
    }

    let lambda2 = sup.lambda2;
    let profile_w = GridProfile { left_rate: lambda2, right_value: 1.0, ..g };
    let profile_u = reconstruct_u(&profile_w, &cfg)?;
    let residual_pew_sup = residual_pew_sup(&profile_w, &cfg)?;
    let residual_pe_sup = residual_pe(&profile_u, &cfg)?;
    let n1_identity_defect = n1_identity_check(&profile_w, &cfg)?;
    let tail_slope = tail_slope(&profile_w).unwrap_or(f64::NAN);
    Ok(IterationReport {
        converged,
        iters: deltas.len(),
        deltas,
        monotone_defect,
        sandwich_defect,
        min_forward_difference: min_fd,
        min_pivot_ratio: step.min_pivot_ratio(),
        half_width,
        profile_w,
        profile_u,
        residual_pew_sup,
        residual_pe_sup,
        tail_slope,
        n1_identity_defect,
        lambda2,
        mu1: sup.mu1,
    })
}

/// `u = (1 - b) B w`.
pub fn reconstruct_u(w: &GridProfile, cfg: &OperatorConfig) -> Result<GridProfile> {
    let bw = resolvent_b(w, cfg)?;
    let k = 1.0 - cfg.b;
    Ok(GridProfile { values: bw.values.iter().map(|v| k * v).collect(), right_value: k * bw.right_value, ..bw })
}

/// Inverse of [`reconstruct_u`]: `w = (u - b S u) / (1 - b)`.
pub fn w_from_u(u: &GridProfile, cfg: &OperatorConfig) -> Result<GridProfile> {
    let su = shift(u, cfg)?;
    let k = 1.0 - cfg.b;
    Ok(GridProfile {
        values: u.values.iter().zip(&su.values).map(|(a, s)| (a - cfg.b * s) / k).collect(),
        right_value: u.right_value,
        ..u.clone()
    })
}

/// Sup of `|residual_pew|` over the interior points.
pub fn residual_pew_sup(w: &GridProfile, cfg: &OperatorConfig) -> Result<f64> {
    Ok(sup_interior(&residual_pew(w, cfg)?))
}

fn sup_interior(r: &GridProfile) -> f64 {
    let n = r.n();
    r.values[1..n - 1].iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Sup over interior points of `|v'' - c v' + u (1 - S u)|`, `v = u - b S u`.
pub fn residual_pe(u: &GridProfile, cfg: &OperatorConfig) -> Result<f64> {
    let su = shift(u, cfg)?;
    let v = u.with_values(u.values.iter().zip(&su.values).map(|(a, s)| a - cfg.b * s).collect());
    let (d1, d2) = derivatives(&v);
    let n = u.n();
    Ok((1..n - 1).map(|i| (d2[i] - cfg.c * d1[i] + u.values[i] * (1.0 - su.values[i])).abs()).fold(0.0, f64::max))
}

/// Roots `z1 < 0 < z2` of `z^2 - c z - 1` and the kernel weight
/// `alpha = 1 / (z2 - z1)`.
pub fn n1_kernel(c: f64) -> (f64, f64, f64) {
    let d = (c * c + 4.0).sqrt();
    // z1 = (c - d) / 2 computed without cancellation via z1 z2 = -1
    let z2 = (c + d) / 2.0;
    let z1 = -1.0 / z2;
    (z1, z2, 1.0 / d)
}

/// `int_0^h e^{z r} dr` and `int_0^h r e^{z r} dr`.
fn exp_moments(z: f64, h: f64) -> (f64, f64) {
    let i0 = (z * h).exp_m1() / z;
    let i1 = (h * (z * h).exp() - i0) / z;
    (i0, i1)
}

/// `sup |w - N1 * [w + F(w)]|` where `N1` is the Green kernel of
/// `d^2 - c d - 1` (`alpha e^{z1 r}` for `r >= 0`, `alpha e^{z2 r}` for
/// `r < 0`).
///
/// The convolution integrates the kernel exactly against the piecewise
/// linear interpolant of the data, closing the tails with the left
/// exponential and the right constant extension.
pub fn n1_identity_check(w: &GridProfile, cfg: &OperatorConfig) -> Result<f64> {
    let fw = op_f(w, cfg)?;
    let f: Vec<f64> = w.values.iter().zip(&fw.values).map(|(a, b)| a + b).collect();
    let f_right = w.right_value + fw.right_value;
    let conv = n1_convolve(&f, w.dt, w.left_rate, f_right, cfg.c);
    Ok(w.values.iter().zip(&conv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// `N1 * f` on the grid; `f` continues as `f[0] e^{left_rate (t - t0)}`
/// on the left and as `f_right` on the right.
pub fn n1_convolve(f: &[f64], h: f64, left_rate: f64, f_right: f64, c: f64) -> Vec<f64> {
    let (z1, z2, alpha) = n1_kernel(c);
    let n = f.len();
    let mut out = vec![0.0; n];

    let (i0, i1) = exp_moments(z1, h);
    let decay = (z1 * h).exp();
    let mut p = f[0] / (left_rate - z1);
    out[0] = p;
    for i in 0..n - 1 {
        p = decay * p + f[i + 1] * (i0 - i1 / h) + f[i] * (i1 / h);
        out[i + 1] = p;
    }

    let (i0, i1) = exp_moments(-z2, h);
    let decay = (-z2 * h).exp();
    let mut q = f_right / z2;
    out[n - 1] += q;
    for i in (0..n - 1).rev() {
        q = decay * q + f[i] * (i0 - i1 / h) + f[i + 1] * (i1 / h);
        out[i] += q;
    }
    out.iter_mut().for_each(|v| *v *= alpha);
    out
}

/// Least-squares slope of `ln g` over the points with
/// `10 BOUNDARY_FLOOR <= g <= TAIL_WINDOW_TOP` left of the first point
/// above the window.
pub fn tail_slope(g: &GridProfile) -> Result<f64> {
    let lo = 10.0 * BOUNDARY_FLOOR;
    let pts: Vec<(f64, f64)> = g
        .values
        .iter()
        .enumerate()
        .take_while(|(_, v)| **v <= TAIL_WINDOW_TOP)
        .filter(|(_, v)| **v >= lo)
        .map(|(i, v)| (g.t(i), v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "tail window [{lo:e}, {TAIL_WINDOW_TOP:e}] holds {} points; enlarge T",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Sup of `|a(t) - b(t + d)|` over the grid points of `a` where the shifted
/// point stays inside the grid of `b`, after translating both so their
/// `0.5` crossings coincide.
pub fn aligned_distance(a: &GridProfile, b: &GridProfile) -> Result<f64> {
    let (Some(ta), Some(tb)) = (a.crossing(0.5), b.crossing(0.5)) else {
        return Err(Error::InvalidParams("profile never crosses 0.5".into()));
    };
    let d = tb - ta;
    let mut sup: f64 = 0.0;
    if same_grid(a, b).is_ok() {
        // index arithmetic keeps identical profiles at distance exactly 0
        let shift = d / a.dt;
        let whole = shift.floor();
        let frac = shift - whole;
        for i in 0..a.n() as isize {
            let j = i + whole as isize;
            if j < 0 || j + 1 >= b.n() as isize + (frac == 0.0) as isize {
                continue;
            }
            let lo = b.values[j as usize];
            let v = if frac == 0.0 { lo } else { lo * (1.0 - frac) + b.values[j as usize + 1] * frac };
            sup = sup.max((a.values[i as usize] - v).abs());
        }
        return Ok(sup);
    }
    for (i, t) in a.times().enumerate() {
        let s = t + d;
        if s >= b.t_start && s <= b.t_end() {
            sup = sup.max((a.values[i] - b.value_at(s)).abs());
        }
    }
    Ok(sup)
}

/// Translate so the `0.5` crossing sits at `t = 0`.
pub fn normalize(g: &GridProfile) -> Result<GridProfile> {
    let t0 = g.crossing(0.5).ok_or_else(|| Error::InvalidParams("profile never crosses 0.5".into()))?;
    Ok(GridProfile { t_start: g.t_start - t0, ..g.clone() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub distance: f64,
    pub base: IterationReport,
    pub shifted: IterationReport,
}

/// Solves from the super-solution and from its translate by `shift_delays`
/// delays; returns the sup distance of the `u` profiles after alignment.
pub fn uniqueness_check(p: &ModelParams, opts: &SolveOptions, shift_delays: f64) -> Result<UniquenessReport> {
    let base = solve_front(p, &SolveOptions { start_shift: 0.0, ..*opts })?;
    let shifted = solve_front(p, &SolveOptions { start_shift: shift_delays, ..*opts })?;
    let distance = aligned_distance(&base.profile_u, &shifted.profile_u)?;
    Ok(UniquenessReport { distance, base, shifted })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalReport {
    pub c_star: f64,
    pub speeds: Vec<f64>,
    /// Normalised `u` profiles, one per speed.
    pub profiles: Vec<GridProfile>,
    pub reports: Vec<IterationReport>,
    /// Sup distance between consecutive normalised profiles.
    pub cauchy: Vec<f64>,
    /// First failure, if the sequence stopped early.
    pub failure: Option<Error>,
}

impl CriticalReport {
    pub fn cauchy_strictly_decreasing(&self) -> bool {
        self.cauchy.windows(2).all(|w| w[1] < w[0])
    }

    pub fn last_profile(&self) -> Option<&GridProfile> {
        self.profiles.last()
    }
}

/// Fronts at `c_k = c*(tau) (1 + 2^{-k})`, `k = k_min..=k_max`, normalised by
/// `u(0) = 0.5`, approach the critical front.
pub fn critical_solve(tau: f64, b: f64, k_min: u32, k_max: u32, opts: &SolveOptions) -> Result<CriticalReport> {
    if k_min > k_max || k_max > 52 {
        return Err(Error::InvalidParams(format!("bad exponent range {k_min}..={k_max}")));
    }
    let c_star = c_star(tau, b)?.c;
    let mut out = CriticalReport {
        c_star,
        speeds: Vec::new(),
        profiles: Vec::new(),
        reports: Vec::new(),
        cauchy: Vec::new(),
        failure: None,
    };
    for k in k_min..=k_max {
        let c = c_star * (1.0 + 2f64.powi(-(k as i32)));
        let step = ModelParams::new(b, tau, c).and_then(|p| solve_front(&p, opts)).and_then(|r| {
            if r.converged {
                Ok(r)
            } else {
                Err(Error::NoConvergence(format!("c = {c}: {} iterations", r.iters)))
            }
        });
        let report = match step {
            Ok(r) => r,
            Err(e) => {
                out.failure = Some(e);
                break;
            }
        };
        let profile = normalize(&report.profile_u)?;
        if let Some(prev) = out.profiles.last() {
            out.cauchy.push(sup_distance(prev, &profile));
        }
        out.speeds.push(c);
        out.profiles.push(profile);
        out.reports.push(report);
    }
    Ok(out)
}

/// Sup of `|a - b|` at the grid points of `a` inside the grid of `b`.
fn sup_distance(a: &GridProfile, b: &GridProfile) -> f64 {
    a.times()
        .zip(&a.values)
        .filter(|(t, _)| *t >= b.t_start && *t <= b.t_end())
        .map(|(t, v)| (v - b.value_at(t)).abs())
        .fold(0.0, f64::max)
}

/// Sup distance of two profiles on the same grid.
pub fn grid_distance(a: &GridProfile, b: &GridProfile) -> Result<f64> {
    same_grid(a, b)?;
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
