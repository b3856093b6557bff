//! `kppfront`: command-line front end for the wavefront toolkit.
//!
//! Exit codes: 0 success, 1 numeric failure, 2 invalid input.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use kppfront::curves::{c_hash, c_star, in_domain, tau_critical, CURVE_TOL};
use kppfront::evolver::{evolve, EvolveConfig};
use kppfront::profile_io::{fmt_f64, ProfileFile, ProfileKind};
use kppfront::report::Report;
use kppfront::solver::{
    n1_identity_check, reconstruct_u, residual_pe, residual_pew_sup, solve_front, tail_slope, w_from_u,
    IterationReport, SolveOptions, ORDER_SLACK,
};
use kppfront::spectral::{chi0, chi1, ModelParams, SpectralRoots};
use kppfront::{Error, OperatorConfig};

/// Thresholds used by `validate`.
const MAX_RESIDUAL_PEW: f64 = 1e-4;
const MAX_RESIDUAL_PE: f64 = 1e-3;
const MAX_N1_DEFECT: f64 = 5e-4;
const TAIL_SLOPE_REL: f64 = 0.02;

#[derive(Parser)]
#[command(name = "kppfront", version, about = "Monotone wavefronts of the neutral KPP-Fisher equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Real zeros of the characteristic functions
    Roots {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Format::Report)]
        format: Format,
    },
    /// Sweep the critical-speed curves over tau
    Curves {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        tau_min: f64,
        #[arg(long)]
        tau_max: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// CSV output path (stdout if absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for the front profile by monotone iteration
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        /// Half-width of the truncated domain
        #[arg(long = "T")]
        half_width: Option<f64>,
        #[arg(long, default_value_t = 16)]
        m: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        /// Output prefix: writes <out>_w.csv, <out>_u.csv and <out>_report.txt
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Report)]
        format: Format,
    },
    /// Recompute residuals and checks on a stored profile
    Validate {
        profile: PathBuf,
        /// Expected parameters; a mismatch with the file header is an error
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Report)]
        format: Format,
    },
    /// Integrate the PDE from a stored profile
    Evolve {
        profile: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.05)]
        dx: f64,
        /// Time step; must divide tau and respect dt <= dx^2/2
        #[arg(long)]
        dt: Option<f64>,
        /// CSV of (t, front_position)
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of the final slice (x, u)
        #[arg(long)]
        slice_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Report)]
        format: Format,
    },
}

#[derive(Args, Clone, Copy)]
struct ModelArgs {
    #[arg(long)]
    b: f64,
    #[arg(long)]
    tau: f64,
    #[arg(long)]
    c: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, Failure> {
        ModelParams::new(self.b, self.tau, self.c).map_err(Failure::from)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Report,
    Csv,
}

/// Error with its exit code and optional rendered output to print first.
struct Failure {
    code: u8,
    message: String,
    report: Option<String>,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into(), report: None }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParams(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Misaligned { .. }
            | Error::OutsideDomain(_)
            | Error::Domain { .. } => 2,
            _ => 1,
        };
        Self { code, message: e.to_string(), report: None }
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Report => report.to_string(),
        Format::Csv => {
            let keys: Vec<&str> = report.entries().iter().map(|(k, _)| k.as_str()).collect();
            let vals: Vec<&str> = report.entries().iter().map(|(_, v)| v.as_str()).collect();
            format!("{}\n{}\n", keys.join(","), vals.join(","))
        }
    }
}

fn params_report(r: &mut Report, p: &ModelParams) {
    r.num("b", p.b).num("tau", p.tau).num("c", p.c);
}

fn cmd_roots(model: ModelArgs, format: Format) -> Result<String, Failure> {
    let p = model.params()?;
    let roots = SpectralRoots::compute(&p)?;
    let mut r = Report::new();
    params_report(&mut r, &p);
    r.opt("lambda1", roots.lambda1)
        .opt("lambda2", roots.lambda2)
        .opt("mu1", roots.mu1)
        .opt("mu2", roots.mu2)
        .flag("chi0_has_roots", roots.has_chi0_roots())
        .flag("chi1_has_roots", roots.has_chi1_roots())
        .flag("critical_chi0", roots.critical_chi0)
        .flag("critical_chi1", roots.critical_chi1)
        .num("chi0_min_z", roots.chi0_min.z)
        .num("chi0_min", roots.chi0_min.value)
        .num("chi1_max_z", roots.chi1_max.z)
        .num("chi1_max", roots.chi1_max.value);
    let residual = |f: &dyn Fn(f64) -> kppfront::Result<f64>, z: Option<f64>| -> Result<Option<f64>, Failure> {
        z.map(|z| f(z).map(f64::abs)).transpose().map_err(Failure::from)
    };
    let c0 = |z| chi0(z, &p);
    let c1 = |z| chi1(z, &p);
    r.opt("chi0_residual_lambda1", residual(&c0, roots.lambda1)?)
        .opt("chi0_residual_lambda2", residual(&c0, roots.lambda2)?)
        .opt("chi1_residual_mu1", residual(&c1, roots.mu1)?)
        .opt("chi1_residual_mu2", residual(&c1, roots.mu2)?);
    let verdict = in_domain(&p)?;
    r.flag("in_domain", verdict.in_domain).flag("noncritical", verdict.is_noncritical());
    Ok(render(&r, format))
}

fn cmd_curves(b: f64, tau_min: f64, tau_max: f64, samples: usize, out: Option<&Path>) -> Result<String, Failure> {
    if !(tau_min > 0.0 && tau_max >= tau_min && tau_max.is_finite()) {
        return Err(Failure::invalid(format!("need 0 < tau_min <= tau_max, got [{tau_min}, {tau_max}]")));
    }
    if samples == 0 || (samples == 1 && tau_max != tau_min) {
        return Err(Failure::invalid("samples must be at least 2 for a range"));
    }
    let threshold = tau_critical(b)?;
    let taus: Vec<f64> = (0..samples)
        .map(|i| if samples == 1 { tau_min } else { tau_min + (tau_max - tau_min) * i as f64 / (samples - 1) as f64 })
        .collect();
    let rows: Vec<Result<String, Error>> = taus
        .par_iter()
        .map(|&tau| {
            let s = c_star(tau, b)?;
            let (ch, mu) = match c_hash(tau, b) {
                Ok(Some(h)) => (fmt_f64(h.c), fmt_f64(h.double_root)),
                Ok(None) => (String::new(), String::new()),
                Err(Error::Unbounded(_)) => ("inf".to_string(), String::new()),
                Err(e) => return Err(e),
            };
            Ok(format!("{},{},{},{},{}", fmt_f64(tau), fmt_f64(s.c), fmt_f64(s.double_root), ch, mu))
        })
        .collect();
    let mut text = String::new();
    let _ = writeln!(text, "# b={}", fmt_f64(b));
    let _ = writeln!(text, "# tau_critical={}", fmt_f64(threshold));
    let _ = writeln!(text, "# curve_tol={}", fmt_f64(CURVE_TOL));
    text.push_str("tau,c_star,lambda_double,c_hash,mu_double\n");
    for row in rows {
        text.push_str(&row?);
        text.push('\n');
    }
    match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Failure::from(Error::from(e)))?;
            Ok(format!("wrote {} rows to {}\n", samples, path.display()))
        }
        None => Ok(text),
    }
}

fn iteration_report(r: &mut Report, rep: &IterationReport) {
    r.flag("converged", rep.converged)
        .int("iters", rep.iters)
        .num("final_delta", rep.deltas.last().copied().unwrap_or(f64::NAN))
        .num("monotone_defect", rep.monotone_defect)
        .num("sandwich_defect", rep.sandwich_defect)
        .num("min_forward_difference", rep.min_forward_difference)
        .num("min_pivot_ratio", rep.min_pivot_ratio)
        .num("T", rep.half_width)
        .num("dt", rep.profile_w.dt)
        .int("n", rep.profile_w.n())
        .num("residual_pew_sup", rep.residual_pew_sup)
        .num("residual_pe_sup", rep.residual_pe_sup)
        .num("n1_identity_defect", rep.n1_identity_defect)
        .num("tail_slope", rep.tail_slope)
        .num("lambda2", rep.lambda2)
        .num("mu1", rep.mu1)
        .num("u_left", rep.profile_u.values[0])
        .num("u_right", *rep.profile_u.values.last().unwrap_or(&f64::NAN))
        .flag("invariants_hold", rep.invariants_hold());
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    model: ModelArgs,
    half_width: Option<f64>,
    m: usize,
    tol: f64,
    max_iters: usize,
    out: Option<&Path>,
    format: Format,
) -> Result<String, Failure> {
    let p = model.params()?;
    let verdict = in_domain(&p)?;
    if !verdict.is_noncritical() {
        let mut r = Report::new();
        params_report(&mut r, &p);
        r.flag("in_domain", verdict.in_domain)
            .flag("noncritical", false)
            .num("c_star", verdict.c_star_at_tau)
            .opt("c_hash", verdict.c_hash_at_tau)
            .num("tau_critical", verdict.tau_critical);
        return Err(Failure {
            code: 2,
            message: "parameters outside the existence region or critical".into(),
            report: Some(render(&r, format)),
        });
    }
    let opts = SolveOptions { half_width, m, tol, max_iters, start_shift: 0.0 };
    let rep = solve_front(&p, &opts)?;
    let mut r = Report::new();
    params_report(&mut r, &p);
    r.int("m", m).num("tol", tol);
    iteration_report(&mut r, &rep);
    if let Some(prefix) = out {
        let with = |suffix: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        };
        let file = |kind, profile| ProfileFile { b: p.b, tau: p.tau, c: p.c, kind, profile };
        file(ProfileKind::W, rep.profile_w.clone()).write(&with("_w.csv"))?;
        file(ProfileKind::U, rep.profile_u.clone()).write(&with("_u.csv"))?;
        std::fs::write(with("_report.txt"), r.to_string()).map_err(|e| Failure::from(Error::from(e)))?;
    }
    let text = render(&r, format);
    if rep.invariants_hold() {
        Ok(text)
    } else {
        Err(Failure {
            code: 1,
            message: "iteration did not converge or an invariant failed".into(),
            report: Some(text),
        })
    }
}

fn load_profile(path: &Path, b: Option<f64>, tau: Option<f64>, c: Option<f64>) -> Result<ProfileFile, Failure> {
    let file = ProfileFile::read(path)?;
    for (name, flag, header) in [("b", b, file.b), ("tau", tau, file.tau), ("c", c, file.c)] {
        if let Some(v) = flag {
            if v != header {
                return Err(Failure::invalid(format!(
                    "--{name} {v} does not match the profile header {name}={header}"
                )));
            }
        }
    }
    Ok(file)
}

fn cmd_validate(
    path: &Path,
    b: Option<f64>,
    tau: Option<f64>,
    c: Option<f64>,
    format: Format,
) -> Result<String, Failure> {
    let file = load_profile(path, b, tau, c)?;
    let p = ModelParams::new(file.b, file.tau, file.c)?;
    let cfg = OperatorConfig::new(&p, file.profile.m)?;
    cfg.check_aligned(&file.profile)?;
    let (w, u) = match file.kind {
        ProfileKind::W => {
            let u = reconstruct_u(&file.profile, &cfg)?;
            (file.profile, u)
        }
        ProfileKind::U => (w_from_u(&file.profile, &cfg)?, file.profile),
    };
    let roots = SpectralRoots::compute(&p)?;
    let pew = residual_pew_sup(&w, &cfg)?;
    let pe = residual_pe(&u, &cfg)?;
    let n1 = n1_identity_check(&w, &cfg)?;
    let slope = tail_slope(&w).ok();
    let fd = w.min_forward_difference();

    let mut r = Report::new();
    params_report(&mut r, &p);
    r.str("kind", file.kind.as_str()).int("m", w.m).int("n", w.n());
    let mut all = true;
    let mut check = |r: &mut Report, name: &str, value: Option<f64>, pass: bool| {
        all &= pass;
        r.opt(name, value).str(&format!("{name}_check"), if pass { "pass" } else { "fail" });
    };
    check(&mut r, "min_forward_difference", Some(fd), fd >= -ORDER_SLACK);
    check(&mut r, "residual_pew_sup", Some(pew), pew <= MAX_RESIDUAL_PEW);
    check(&mut r, "residual_pe_sup", Some(pe), pe <= MAX_RESIDUAL_PE);
    check(&mut r, "n1_identity_defect", Some(n1), n1 <= MAX_N1_DEFECT);
    let slope_ok = match (slope, roots.lambda2) {
        (Some(s), Some(l2)) => (s - l2).abs() <= TAIL_SLOPE_REL * l2,
        _ => false,
    };
    check(&mut r, "tail_slope", slope, slope_ok);
    r.opt("lambda2", roots.lambda2).flag("all_pass", all);
    let text = render(&r, format);
    if all {
        Ok(text)
    } else {
        Err(Failure { code: 1, message: "validation checks failed".into(), report: Some(text) })
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_evolve(
    path: &Path,
    horizon: f64,
    dx: f64,
    dt: Option<f64>,
    out: Option<&Path>,
    slice_out: Option<&Path>,
    format: Format,
) -> Result<String, Failure> {
    let file = ProfileFile::read(path)?;
    let p = ModelParams::new(file.b, file.tau, file.c)?;
    let cfg = EvolveConfig { dx, horizon, dt };
    cfg.time_step(p.tau).map_err(|e| Failure::invalid(e.to_string()))?;
    if horizon.is_nan() || horizon < kppfront::evolver::MIN_HORIZON {
        return Err(Failure::invalid(format!("horizon {horizon} is below {}", kppfront::evolver::MIN_HORIZON)));
    }
    let u = match file.kind {
        ProfileKind::U => file.profile,
        ProfileKind::W => {
            let ocfg = OperatorConfig::new(&p, file.profile.m)?;
            reconstruct_u(&file.profile, &ocfg)?
        }
    };
    let rep = evolve(&u, &p, &cfg)?;
    let mut r = Report::new();
    params_report(&mut r, &p);
    r.num("dx", rep.dx)
        .num("dt", rep.dt)
        .int("k", rep.k)
        .num("horizon", horizon)
        .num("x_lo", rep.x_lo)
        .num("x_hi", rep.x_hi)
        .num("speed", rep.speed)
        .num("speed_rel_error", (rep.speed - p.c).abs() / p.c)
        .num("shape_error", rep.shape_error)
        .num("u_min", rep.u_min)
        .num("u_max", rep.u_max);
    let write_csv = |path: &Path, header: &str, rows: &[(f64, f64)]| -> Result<(), Failure> {
        let mut text = String::from(header);
        for (a, b) in rows {
            let _ = writeln!(text, "{},{}", fmt_f64(*a), fmt_f64(*b));
        }
        std::fs::write(path, text).map_err(|e| Failure::from(Error::from(e)))
    };
    if let Some(path) = out {
        write_csv(path, "t,front_position\n", &rep.positions)?;
    }
    if let Some(path) = slice_out {
        write_csv(path, "x,u\n", &rep.final_slice)?;
    }
    Ok(render(&r, format))
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Roots { model, format } => cmd_roots(model, format),
        Command::Curves { b, tau_min, tau_max, samples, out } => {
            cmd_curves(b, tau_min, tau_max, samples, out.as_deref())
        }
        Command::Solve { model, half_width, m, tol, max_iters, out, format } => {
            cmd_solve(model, half_width, m, tol, max_iters, out.as_deref(), format)
        }
        Command::Validate { profile, b, tau, c, format } => cmd_validate(&profile, b, tau, c, format),
        Command::Evolve { profile, horizon, dx, dt, out, slice_out, format } => {
            cmd_evolve(&profile, horizon, dx, dt, out.as_deref(), slice_out.as_deref(), format)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            if let Some(r) = &f.report {
                print!("{r}");
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
