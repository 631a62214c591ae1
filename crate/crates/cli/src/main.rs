use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use henon_cocycle::cocycle::{p_lambda_params, semiparabolic_alpha_check, semiparabolic_fixed_point, CocycleEngine};
use henon_cocycle::deck_group::compute_constants;
use henon_cocycle_cli::config::{fmt_c, parse_complex, parse_trivialization, ExperimentConfig};
use henon_cocycle_cli::curve::{compute_curve, winding_from_args, write_csv, CurveRow, Flag};
use henon_cocycle_cli::raster::{plot, PlotSpec};
use henon_cocycle_cli::{verify, UsageError};

#[derive(Parser, Debug)]
#[command(name = "henon-cocycle", version, about = "Render and verify the tangency cocycle of complex Henon maps")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Overrides applied on top of the config file, in this order.
#[derive(Args, Debug)]
struct Global {
    /// key = value config file
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    a: Option<String>,
    /// std | norm
    #[arg(long, global = true)]
    triv: Option<String>,
    /// number of angles (power of two)
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// worker threads, 0 = all cores
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// verification suite: default, all, or a comma list
    #[arg(long, global = true, value_name = "NAME")]
    suite: Option<String>,
    /// treat warnings as failures
    #[arg(long, global = true)]
    strict: bool,
    /// plot alpha / a
    #[arg(long, global = true)]
    over_a: bool,
    /// use the a -> 0 model instead of the critical-locus computation
    #[arg(long, global = true)]
    synthetic: bool,
    /// any config key, repeatable
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// alpha on the circle as a curve in C: alpha.csv, alpha.png
    RenderAlpha,
    /// |alpha| and arg alpha against theta: alpha.csv, abs.png, arg.png
    RenderModArg,
    /// run verification suites and print a key=value report
    Verify,
    /// print the growth constants of the deck group
    Constants,
    /// parameters on the curve P_lambda with a fixed point of eigenvalue lambda
    PLambda {
        /// eigenvalue on the unit circle, e.g. -0.5+0.8660254037844386i
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// also compare alpha(1) with the stable multiplier
        #[arg(long)]
        check: bool,
    },
}

fn build_config(g: &Global) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(p) = &g.config {
        cfg.apply_file(p)?;
    }
    let pairs = [
        ("c", g.c.clone()),
        ("a", g.a.clone()),
        ("n", g.n.map(|v| v.to_string())),
        ("workers", g.workers.map(|v| v.to_string())),
        ("seed", g.seed.map(|v| v.to_string())),
        ("suite", g.suite.clone()),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    if let Some(t) = &g.triv {
        cfg.trivialization = parse_trivialization(t)?;
    }
    if let Some(o) = &g.out {
        cfg.out = o.clone();
    }
    cfg.strict |= g.strict;
    cfg.over_a |= g.over_a;
    cfg.synthetic |= g.synthetic;
    for kv in &g.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| UsageError(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn curve_to_out(cfg: &ExperimentConfig) -> Result<Vec<CurveRow>> {
    let rows = compute_curve(cfg)?;
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let path = cfg.out.join("alpha.csv");
    let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(std::io::BufWriter::new(f), &rows)?;
    let failed = rows.iter().filter(|r| r.flag == Flag::Fail).count();
    let slow = rows.iter().filter(|r| r.flag == Flag::Slow).count();
    println!("wrote {} ({} angles, {failed} failed, {slow} slow)", path.display(), rows.len());
    if let Some(w) = winding_from_args(&rows) {
        println!("winding={w:.6}");
    }
    Ok(rows)
}

fn render_alpha(cfg: &ExperimentConfig) -> Result<i32> {
    let rows = curve_to_out(cfg)?;
    let pts: Vec<_> = rows.iter().map(|r| r.value().map(|z| (z.re, z.im))).collect();
    let spec = PlotSpec { equal_aspect: true, closed: true, max_jump: None };
    let path = cfg.out.join("alpha.png");
    plot(&pts, cfg.width, cfg.height, &spec).save(&path)?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn render_mod_arg(cfg: &ExperimentConfig) -> Result<i32> {
    let rows = curve_to_out(cfg)?;
    let ok = |r: &CurveRow| r.flag != Flag::Fail;
    let abs: Vec<_> = rows.iter().map(|r| ok(r).then_some((r.theta, r.abs))).collect();
    let arg: Vec<_> = rows.iter().map(|r| ok(r).then_some((r.theta, r.arg))).collect();
    let spec = PlotSpec { equal_aspect: false, closed: false, max_jump: None };
    let p = cfg.out.join("abs.png");
    plot(&abs, cfg.width, cfg.height, &spec).save(&p)?;
    println!("wrote {}", p.display());
    // arg is drawn wrapped: branch jumps are left open
    let spec = PlotSpec { max_jump: Some(0.5), ..spec };
    let p = cfg.out.join("arg.png");
    plot(&arg, cfg.width, cfg.height, &spec).save(&p)?;
    println!("wrote {}", p.display());
    Ok(0)
}

fn run_verify(cfg: &ExperimentConfig) -> Result<i32> {
    let rep = verify::run(cfg)?;
    print!("{}", rep.render());
    Ok(rep.exit_code(cfg.strict))
}

fn constants(cfg: &ExperimentConfig) -> Result<i32> {
    let engine = CocycleEngine::with_settings(cfg.params(), cfg.settings);
    let k = compute_constants(&engine, cfg.n)?;
    println!("c={}", fmt_c(cfg.c));
    println!("a={}", fmt_c(cfg.a));
    println!("delta={:.9}", k.delta);
    println!("delta_prime={:.6e}", k.delta_prime);
    println!("delta_dprime={:.6e}", k.delta_dprime);
    println!("a0={:.6e}", k.a0);
    println!("a_abs={:.6e}", k.a_abs);
    println!("premise_met={}", k.premise_met());
    println!("sup_ratio={:.9}", k.sup_ratio);
    println!("sup_ratio_bound={:.9}", 2.0 / (k.delta * k.delta));
    println!("inf_antipodal={:.9}", k.inf_antipodal);
    println!("inf_antipodal_bound={:.9}", k.delta / 8.0);
    println!("growth_factor={:.6e}", k.growth_factor());
    match k.k0(0.0) {
        Some(k0) => println!("k0_at_0={k0}"),
        None => println!("k0_at_0=none"),
    }
    println!("n_samples={}", k.n_samples);
    Ok(0)
}

fn p_lambda(cfg: &ExperimentConfig, lambda: &str, check: bool) -> Result<i32> {
    let lambda = parse_complex(lambda)?;
    if (lambda.norm() - 1.0).abs() > 1e-9 {
        return Err(UsageError(format!("|lambda| = {} must be 1", lambda.norm())).into());
    }
    let lambda = lambda / lambda.norm();
    let h = p_lambda_params(lambda, cfg.a);
    let q = semiparabolic_fixed_point(lambda, cfg.a);
    println!("lambda={}", fmt_c(lambda));
    println!("a={}", fmt_c(cfg.a));
    println!("c={}", fmt_c(h.c));
    println!("fixed_point={}", fmt_c(q.x));
    let (e1, e2) = h.derivative(q).eigenvalues();
    println!("eigenvalues={},{}", fmt_c(e1), fmt_c(e2));
    println!("mu={}", fmt_c(cfg.a / lambda));
    if check {
        if (lambda - 1.0).norm() > 1e-12 {
            // for other multipliers the angle-0 ray lands at the other fixed point
            println!("check_applies=false");
        }
        let r = semiparabolic_alpha_check(lambda, cfg.a)?;
        println!("pairing_error={:.3e}", r.pairing_error);
        match (r.alpha_1, r.rel_error) {
            (Some(al), Some(e)) => {
                println!("alpha_1={}", fmt_c(al));
                println!("rel_error={e:.6e}");
            }
            _ => println!("alpha_1=none"),
        }
        println!("converged={}", r.converged);
        println!("note={}", r.note);
        if !r.converged && cfg.strict {
            return Ok(1);
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<i32> {
    let cfg = build_config(&cli.global)?;
    // parameters on P_lambda are pure algebra and fine at a = 0
    if !matches!(cli.cmd, Cmd::PLambda { check: false, .. }) {
        cfg.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    pool.install(|| match cli.cmd {
        Cmd::RenderAlpha => render_alpha(&cfg),
        Cmd::RenderModArg => render_mod_arg(&cfg),
        Cmd::Verify => run_verify(&cfg),
        Cmd::Constants => constants(&cfg),
        Cmd::PLambda { lambda, check } => p_lambda(&cfg, &lambda, check),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.chain().any(|c| c.downcast_ref::<UsageError>().is_some());
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
