//! Verification suites with a `key=value` report.
//!
//! Hard failures (a measured gap above its threshold, or an error) set the
//! exit status; slow convergence and checks whose hypotheses are not met at
//! the configured parameters are warnings (failures under `--strict`).

use std::f64::consts::TAU;
use std::fmt::Display;

use anyhow::Result;
use henon_cocycle::cocycle::{degeneracy_error, CocycleEngine, Trivialization};
use henon_cocycle::deck_group::{compute_constants, growth_margin, separating_neighborhood, DeckTransform};
use henon_cocycle::henon_core::Point2;
use henon_cocycle::polynomial_dynamics::BoettcherContext;
use henon_cocycle::{Angle, Complex64 as C, Error, LeafLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{fmt_c, ExperimentConfig};
use crate::usage;

pub const SUITES: [&str; 7] = [
    "functional",
    "multiplier",
    "lyapunov",
    "degeneracy",
    "degree",
    "group",
    "identification",
];

const DEFAULT_SUITES: [&str; 5] = ["functional", "multiplier", "lyapunov", "degree", "group"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Warn => "warn",
            Status::Fail => "fail",
        }
    }
}

#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<(String, String)>,
    pub failures: usize,
    pub warnings: usize,
}

impl Report {
    pub fn kv(&mut self, key: impl Into<String>, value: impl Display) {
        self.lines.push((key.into(), value.to_string()));
    }

    fn status(&mut self, suite: &str, s: Status) {
        match s {
            Status::Fail => self.failures += 1,
            Status::Warn => self.warnings += 1,
            Status::Pass => {}
        }
        self.kv(format!("{suite}.status"), s.name());
    }

    fn gap(&mut self, suite: &str, name: &str, value: f64, threshold: f64) -> bool {
        self.kv(format!("{suite}.{name}"), format!("{value:.6e}"));
        self.kv(format!("{suite}.{name}_threshold"), format!("{threshold:e}"));
        value < threshold
    }

    /// An error inside a suite: slow convergence is soft, the rest hard.
    fn error(&mut self, suite: &str, e: &Error) {
        self.kv(format!("{suite}.error"), e);
        let soft = matches!(e, Error::SlowConvergence { .. });
        self.status(suite, if soft { Status::Warn } else { Status::Fail });
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.lines {
            s.push_str(k);
            s.push('=');
            s.push_str(v);
            s.push('\n');
        }
        s
    }

    /// Process exit status: 1 on hard failures (or warnings when strict).
    pub fn exit_code(&self, strict: bool) -> i32 {
        if self.failures > 0 || (strict && self.warnings > 0) {
            1
        } else {
            0
        }
    }
}

/// Expand a suite selector: a name, a comma list, `default` or `all`.
pub fn select_suites(selector: &str) -> Result<Vec<&'static str>> {
    let mut out: Vec<&'static str> = Vec::new();
    for part in selector.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let names: Vec<&'static str> = match part {
            "default" => DEFAULT_SUITES.to_vec(),
            "all" => SUITES.to_vec(),
            x => vec![*SUITES
                .iter()
                .find(|s| **s == x)
                .ok_or_else(|| usage(format!("unknown suite {x:?}; known: default, all, {}", SUITES.join(", "))))?],
        };
        for n in names {
            if !out.contains(&n) {
                out.push(n);
            }
        }
    }
    if out.is_empty() {
        return Err(usage("empty suite selection"));
    }
    Ok(out)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    if cfg.synthetic {
        return Err(usage("verify runs on the full computation; drop synthetic"));
    }
    let suites = select_suites(&cfg.suite)?;
    let mut rep = Report::default();
    for (k, v) in cfg.echo() {
        rep.kv(k, v);
    }
    let engine = CocycleEngine::with_settings(cfg.params(), cfg.settings);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for suite in &suites {
        let res = match *suite {
            "functional" => functional(cfg, &engine, &mut rng, &mut rep),
            "multiplier" => multiplier(cfg, &engine, &mut rep),
            "lyapunov" => lyapunov(cfg, &engine, &mut rep),
            "degeneracy" => degeneracy(cfg, &mut rep),
            "degree" => degree(cfg, &engine, &mut rep),
            "group" => group(cfg, &engine, &mut rng, &mut rep),
            "identification" => identification(cfg, &engine, &mut rep),
            _ => unreachable!("suite names are validated"),
        };
        if let Err(e) = res {
            rep.error(suite, &e);
        }
    }
    rep.kv("summary.suites", suites.join(","));
    rep.kv("summary.failures", rep.failures);
    rep.kv("summary.warnings", rep.warnings);
    Ok(rep)
}

type SuiteResult = std::result::Result<(), Error>;

fn pass_or_fail(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// phi(p z) = phi(z)^2, gamma(2 theta) = p(gamma(theta)), phi+(H q) = phi+(q)^2.
fn functional(cfg: &ExperimentConfig, e: &CocycleEngine, rng: &mut ChaCha8Rng, rep: &mut Report) -> SuiteResult {
    let ctx = BoettcherContext::new(cfg.c);
    let mut boettcher: f64 = 0.0;
    let mut n = 0;
    while n < 200 {
        let z = C::from_polar(1.2 + 2.8 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
        if ctx.escape_time(z).is_none() {
            continue;
        }
        n += 1;
        let lhs = ctx.boettcher_phi(ctx.poly.eval(z))?;
        boettcher = boettcher.max((lhs - ctx.boettcher_phi(z)?.powi(2)).norm());
    }
    let mut landing: f64 = 0.0;
    for _ in 0..64 {
        let t = Angle::dyadic(rng.gen_range(0..4096), 12);
        let g1 = e.gamma(&t)?;
        let g2 = e.gamma(&t.double())?;
        landing = landing.max((g2 - ctx.poly.eval(g1)).norm());
    }
    let h = e.h;
    let mut escape: f64 = 0.0;
    for _ in 0..200 {
        let x = C::from_polar(h.radius() * (1.0 + rng.gen::<f64>()), TAU * rng.gen::<f64>());
        let y = C::from_polar(x.norm() * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>());
        let q = Point2::new(x, y);
        escape = escape.max((h.phi_plus(h.apply(q))? - h.phi_plus(q)?.powi(2)).norm());
    }
    let ok = rep.gap("functional", "boettcher", boettcher, 1e-10)
        & rep.gap("functional", "caratheodory", landing, 1e-7)
        & rep.gap("functional", "escape_plus", escape, 1e-9);
    rep.status("functional", pass_or_fail(ok));
    Ok(())
}

fn multiplier(cfg: &ExperimentConfig, e: &CocycleEngine, rep: &mut Report) -> SuiteResult {
    let r = e.check_multiplier(&cfg.multiplier_theta)?;
    rep.kv("multiplier.theta", cfg.multiplier_theta.turns());
    rep.kv("multiplier.period", r.period);
    rep.kv("multiplier.product", fmt_c(r.product));
    rep.kv("multiplier.eigen_small", fmt_c(r.eigen_small));
    rep.kv("multiplier.det_error", format!("{:.3e}", r.det_error));
    let ok = rep.gap("multiplier", "rel_error", r.rel_error, 1e-2);
    rep.status("multiplier", pass_or_fail(ok));
    Ok(())
}

/// The dyadic grid needs about 1024 samples before quadrature error drops
/// well below the threshold.
fn lyapunov(cfg: &ExperimentConfig, e: &CocycleEngine, rep: &mut Report) -> SuiteResult {
    let r = e.lyapunov_integral(cfg.n.max(1024), None)?;
    rep.kv("lyapunov.n_samples", r.n_samples);
    rep.kv("lyapunov.n_failed", r.n_failed);
    rep.kv("lyapunov.mean_log_abs_alpha", format!("{:.9}", r.mean_log_abs_alpha));
    rep.kv("lyapunov.target", format!("{:.9}", r.target));
    let ok = rep.gap("lyapunov", "gap", r.gap, 5e-3);
    rep.status("lyapunov", pass_or_fail(ok));
    Ok(())
}

/// sup |alpha/a - limit| must shrink when a is divided by 100.
fn degeneracy(cfg: &ExperimentConfig, rep: &mut Report) -> SuiteResult {
    let rows = degeneracy_error(cfg.c, &[cfg.a, cfg.a / 100.0], 64, &cfg.settings)?;
    for (i, r) in rows.iter().enumerate() {
        rep.kv(format!("degeneracy.a{i}"), fmt_c(r.a));
        rep.kv(format!("degeneracy.sup_error{i}"), format!("{:.6e}", r.sup_error));
        rep.kv(format!("degeneracy.worst_theta{i}"), r.worst_theta);
    }
    let finite = rows.iter().all(|r| r.sup_error.is_finite());
    let ratio = rows[1].sup_error / rows[0].sup_error;
    let ok = rep.gap("degeneracy", "ratio", ratio, 0.2) && finite;
    rep.status("degeneracy", pass_or_fail(ok));
    Ok(())
}

fn degree(cfg: &ExperimentConfig, e: &CocycleEngine, rep: &mut Report) -> SuiteResult {
    let s = e.winding(cfg.n, Trivialization::Standard, None)?;
    let n = e.winding(cfg.n, Trivialization::BoettcherSquared, None)?;
    rep.kv("degree.standard", s.winding);
    rep.kv("degree.standard_raw", format!("{:.9}", s.raw));
    rep.kv("degree.standard_max_step", format!("{:.3e}", s.max_step));
    rep.kv("degree.normalized", n.winding);
    rep.kv("degree.normalized_raw", format!("{:.9}", n.raw));
    rep.kv("degree.normalized_max_step", format!("{:.3e}", n.max_step));
    // a step of a quarter turn or more between samples makes the count unsafe
    let resolved = s.max_step < 0.25 && n.max_step < 0.25;
    let ok = s.winding == -3 && n.winding == -1;
    let status = match (ok, resolved) {
        (true, true) => Status::Pass,
        (true, false) => Status::Warn,
        _ => Status::Fail,
    };
    rep.status("degree", status);
    Ok(())
}

fn group(cfg: &ExperimentConfig, e: &CocycleEngine, rng: &mut ChaCha8Rng, rep: &mut Report) -> SuiteResult {
    let consts = compute_constants(e, cfg.n.min(1024))?;
    rep.kv("group.delta", format!("{:.6}", consts.delta));
    rep.kv("group.a0", format!("{:.6e}", consts.a0));
    rep.kv("group.a0_formula", format!("{:.6e}", henon_cocycle::deck_group::a0_formula(consts.delta)));
    rep.kv("group.sup_ratio", format!("{:.6}", consts.sup_ratio));
    rep.kv("group.inf_antipodal", format!("{:.6}", consts.inf_antipodal));
    rep.kv("group.premise_met", consts.premise_met());
    // failures below are only violations of the growth bound when |a| <= a0
    let miss = if consts.premise_met() { Status::Fail } else { Status::Warn };

    let z = C::new(0.3, 0.0);
    let Some(k0) = consts.k0(z.norm()) else {
        rep.kv("group.growth", "no k0: growth factor <= 1");
        rep.status("group", miss);
        return Ok(());
    };
    let mut min_margin = f64::INFINITY;
    for k in k0..=k0 + 3 {
        for _ in 0..20 {
            let xi = LeafLabel::on_circle(Angle::dyadic(rng.gen_range(0..4096), 12));
            let r = growth_margin(e, &consts, &DeckTransform::new(1, k), &xi, z)?;
            min_margin = min_margin.min(r.margin / r.rhs.abs().max(1.0));
        }
    }
    rep.kv("group.k0", k0);
    rep.kv("group.min_relative_margin", format!("{min_margin:.6e}"));
    let mut status = if min_margin > 0.0 { Status::Pass } else { miss };

    match separating_neighborhood(e, &consts, &Angle::ZERO, C::new(0.0, 0.0), 1000, None) {
        Ok(cert) => {
            rep.kv("group.certificate", "pass");
            rep.kv("group.certificate_k0", cert.k0);
            rep.kv("group.certificate_elements", cert.elements);
            rep.kv("group.certificate_points", cert.sample_points);
            rep.kv("group.certificate_min_z_ratio", format!("{:.6e}", cert.min_z_ratio));
        }
        Err(err @ Error::CertificateFailure { .. }) => {
            rep.kv("group.certificate", err);
            if status == Status::Pass || miss == Status::Fail {
                status = miss;
            }
        }
        Err(err) => return Err(err),
    }
    rep.status("group", status);
    Ok(())
}

fn identification(cfg: &ExperimentConfig, e: &CocycleEngine, rep: &mut Report) -> SuiteResult {
    let (t1, t2) = cfg.ident;
    rep.kv("identification.theta1", t1.turns());
    rep.kv("identification.theta2", t2.turns());
    let r = e.identification_check(&t1, &t2)?;
    rep.kv("identification.alpha1", fmt_c(r.alpha1));
    rep.kv("identification.alpha2", fmt_c(r.alpha2));
    let ok = rep.gap("identification", "rel_diff", r.rel_diff, 1e-5);
    rep.status("identification", pass_or_fail(ok));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_selection() {
        assert_eq!(select_suites("default").unwrap(), DEFAULT_SUITES.to_vec());
        assert_eq!(select_suites("all").unwrap().len(), SUITES.len());
        assert_eq!(select_suites("lyapunov, degree,lyapunov").unwrap(), vec!["lyapunov", "degree"]);
        assert!(select_suites("nope").is_err());
        assert!(select_suites(" , ").is_err());
    }

    #[test]
    fn exit_codes() {
        let mut r = Report::default();
        assert_eq!(r.exit_code(true), 0);
        r.status("x", Status::Warn);
        assert_eq!(r.exit_code(false), 0);
        assert_eq!(r.exit_code(true), 1);
        r.status("y", Status::Fail);
        assert_eq!(r.exit_code(false), 1);
        assert!(r.render().contains("x.status=warn\n"));
    }
}
