//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (no libtest harness) so the report reaches stdout
//! under `cargo test`; the process exits nonzero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use henon_cocycle::angle::LeafLabel;
use henon_cocycle::cocycle::*;
use henon_cocycle::critical_locus::{leaf_point, RatioOptions};
use henon_cocycle::deck_group::*;
use henon_cocycle::henon_core::{HenonParams, Point2};
use henon_cocycle::polynomial_dynamics::BoettcherContext;
use henon_cocycle::{Angle, Complex64 as C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn basilica() -> HenonParams {
    HenonParams::real(-1.0, 1e-3)
}

fn rabbit_like() -> HenonParams {
    HenonParams::new(c(0.0, 0.1), c(0.05, 0.0))
}

/// Random dyadic angle j / 2^12.
fn rand_angle(r: &mut ChaCha8Rng) -> Angle {
    Angle::dyadic(r.gen_range(0..4096), 12)
}

fn c1_boettcher() -> Outcome {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for cc in [c(0.0, 0.0), c(0.0, 0.1), c(-1.0, 0.0)] {
        let ctx = BoettcherContext::new(cc);
        let mut n = 0;
        while n < 1000 {
            let z = C::from_polar(1.2 + 2.8 * r.gen::<f64>(), std::f64::consts::TAU * r.gen::<f64>());
            if ctx.escape_time(z).is_none() {
                continue;
            }
            n += 1;
            let lhs = ctx.boettcher_phi(ctx.poly.eval(z)).map_err(|e| e.to_string())?;
            let rhs = ctx.boettcher_phi(z).map_err(|e| e.to_string())?.powi(2);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    check(worst < 1e-10, format!("max |phi(p z) - phi(z)^2| = {worst:.2e} (< 1e-10)"))
}

fn c2_caratheodory() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for cc in [c(0.0, 0.1), c(-1.0, 0.0)] {
        let ctx = BoettcherContext::new(cc);
        for _ in 0..256 {
            let t = Angle::from_turns(r.gen::<f64>());
            let g1 = ctx.caratheodory(&t).map_err(|e| e.to_string())?.value;
            let g2 = ctx.caratheodory(&t.double()).map_err(|e| e.to_string())?.value;
            worst = worst.max((g2 - ctx.poly.eval(g1)).norm());
        }
    }
    let ctx = BoettcherContext::new(c(0.0, 0.0));
    let mut id: f64 = 0.0;
    for _ in 0..256 {
        let t = Angle::from_turns(r.gen::<f64>());
        id = id.max((ctx.caratheodory(&t).map_err(|e| e.to_string())?.value - t.unit()).norm());
    }
    check(
        worst < 1e-7 && id < 1e-12,
        format!("max |gamma(2t) - p(gamma(t))| = {worst:.2e} (< 1e-7); c=0 identity error {id:.1e} (< 1e-12)"),
    )
}

fn c3_escape_function() -> Outcome {
    let h = rabbit_like();
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x = C::from_polar(h.radius() * (1.0 + r.gen::<f64>()), std::f64::consts::TAU * r.gen::<f64>());
        let y = C::from_polar(x.norm() * r.gen::<f64>().sqrt(), std::f64::consts::TAU * r.gen::<f64>());
        let q = Point2::new(x, y);
        let lhs = h.phi_plus(h.apply(q)).map_err(|e| e.to_string())?;
        let rhs = h.phi_plus(q).map_err(|e| e.to_string())?.powi(2);
        worst = worst.max((lhs - rhs).norm());
    }
    let h0 = HenonParams::new(h.c, c(0.0, 0.0));
    let ctx = h0.boettcher();
    let mut degenerate: f64 = 0.0;
    for _ in 0..200 {
        let x = C::from_polar(h0.radius() * (1.0 + r.gen::<f64>()), std::f64::consts::TAU * r.gen::<f64>());
        let q = Point2::new(x, C::from_polar(x.norm() * r.gen::<f64>(), std::f64::consts::TAU * r.gen::<f64>()));
        let a = h0.phi_plus(q).map_err(|e| e.to_string())?;
        let b = ctx.boettcher_phi(x).map_err(|e| e.to_string())?;
        degenerate = degenerate.max((a - b).norm());
    }
    check(
        worst < 1e-9 && degenerate < 1e-10,
        format!("max |phi+(Hq) - phi+(q)^2| = {worst:.2e} (< 1e-9); a=0 vs phi_p {degenerate:.2e} (< 1e-10)"),
    )
}

fn c4_eta_index() -> Outcome {
    let h = rabbit_like();
    let n = 64;
    let circle: Vec<Point2> = (0..n)
        .map(|i| Point2::new(C::from_polar(4.0, std::f64::consts::TAU * i as f64 / n as f64), c(0.0, 0.0)))
        .collect();
    let e1 = h.eta_index(&circle).map_err(|e| e.to_string())?;
    let pre = circle
        .iter()
        .map(|q| h.apply_inverse(*q))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let e2 = h.eta_index(&pre).map_err(|e| e.to_string())?;
    check(
        (e1.value - 1.0).abs() < 1e-8 && (e2.value - 0.5).abs() < 1e-8,
        format!("eta(loop) = {:.12}, eta(H^-1 loop) = {:.12}", e1.value, e2.value),
    )
}

fn c5_multipliers(rabbit: &CocycleEngine, bas: &CocycleEngine) -> Outcome {
    let r1 = rabbit.check_multiplier(&Angle::ZERO).map_err(|e| e.to_string())?;
    let r2 = bas.check_multiplier(&Angle::rational(1, 3)).map_err(|e| e.to_string())?;
    // independent oracle: eigenvalues of [[2x, -a], [1, 0]]^k from the
    // characteristic polynomial of the explicit matrix product
    let oracle = |h: &HenonParams, q: Point2, k: usize| {
        let mut p = q;
        let mut m = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        for _ in 0..k {
            let d = [[2.0 * p.x, -h.a], [c(1.0, 0.0), c(0.0, 0.0)]];
            m = [
                [d[0][0] * m[0][0] + d[0][1] * m[1][0], d[0][0] * m[0][1] + d[0][1] * m[1][1]],
                [d[1][0] * m[0][0] + d[1][1] * m[1][0], d[1][0] * m[0][1] + d[1][1] * m[1][1]],
            ];
            p = h.apply(p);
        }
        let tr = m[0][0] + m[1][1];
        let det = h.a.powi(k as i32);
        let disc = (tr * tr - 4.0 * det).sqrt();
        let (l1, l2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
        // the small root via det / large root avoids cancellation
        let large = if l1.norm() > l2.norm() { l1 } else { l2 };
        det / large
    };
    let s1 = oracle(&rabbit.h, r1.point, 1);
    let s2 = oracle(&bas.h, r2.point, 2);
    let e1 = (r1.product - s1).norm() / s1.norm();
    let e2 = (r2.product - s2).norm() / s2.norm();
    check(
        e1 < 1e-2 && e2 < 1e-2,
        format!("rel. error (0.1i, 0.05, theta=0) {e1:.2e}; (-1, 1e-3, theta=1/3) {e2:.2e} (< 1e-2)"),
    )
}

fn c6_lyapunov(bas: &CocycleEngine) -> Outcome {
    let rep = bas.lyapunov_integral(4096, None).map_err(|e| e.to_string())?;
    check(
        rep.gap < 5e-3,
        format!(
            "mean log|alpha| = {:.6}, target {:.6}, gap {:.2e} (< 5e-3), {} failed",
            rep.mean_log_abs_alpha, rep.target, rep.gap, rep.n_failed
        ),
    )
}

fn c7_degeneracy(bas: &CocycleEngine) -> Outcome {
    let coarse = bas.degeneracy_sup(64).map_err(|e| e.to_string())?;
    let fine = CocycleEngine::new(HenonParams::real(-1.0, 1e-5))
        .degeneracy_sup(64)
        .map_err(|e| e.to_string())?;
    check(
        coarse.sup_error.is_finite() && fine.sup_error.is_finite() && fine.sup_error < 0.2 * coarse.sup_error,
        format!(
            "sup error a=1e-3: {:.3e}, a=1e-5: {:.3e}, ratio {:.3} (< 0.2)",
            coarse.sup_error,
            fine.sup_error,
            fine.sup_error / coarse.sup_error
        ),
    )
}

fn c8_degree(rabbit: &CocycleEngine, bas: &CocycleEngine) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, e) in [("(-1, 1e-3)", bas), ("(0.1i, 0.05)", rabbit)] {
        let s = e.winding(512, Trivialization::Standard, None).map_err(|e| e.to_string())?;
        let n = e.winding(512, Trivialization::BoettcherSquared, None).map_err(|e| e.to_string())?;
        ok &= s.winding == -3 && n.winding == -1 && s.max_step < 0.25 && n.max_step < 0.25;
        parts.push(format!("{name}: std {} norm {}", s.winding, n.winding));
    }
    check(ok, parts.join("; "))
}

fn c9_group_algebra(bas: &CocycleEngine) -> Outcome {
    let mut r = rng(9);
    let mut intertwining: f64 = 0.0;
    let mut agreement: f64 = 0.0;
    for _ in 0..100 {
        let xi = LeafLabel::on_circle(rand_angle(&mut r));
        let z = C::from_polar(r.gen::<f64>(), std::f64::consts::TAU * r.gen::<f64>());
        let k = r.gen_range(1..=6u32);
        let j = 2 * r.gen_range(0..(1i64 << (k - 1))) + 1;
        let g = DeckTransform::new(j, k);
        let (p1, q1) = pq_closed_form(bas, &g, &xi).map_err(|e| e.to_string())?;
        let (p2, q2) = pq_recursive(bas, &g, &xi).map_err(|e| e.to_string())?;
        agreement = agreement
            .max((p1 - p2).norm() / p2.norm())
            .max((q1 - q2).norm() / q2.norm().max(1.0));
        // lift o g_{j/2^k} = g_{j/2^(k-1)} o lift
        let (x1, w1) = apply(bas, &g, &xi, z).map_err(|e| e.to_string())?;
        let (x1, w1) = lift_apply(bas, &x1, w1).map_err(|e| e.to_string())?;
        let (x2, w2) = lift_apply(bas, &xi, z).map_err(|e| e.to_string())?;
        let (x2, w2) = apply(bas, &DeckTransform::new(j, k - 1), &x2, w2).map_err(|e| e.to_string())?;
        if x1.angle.key() != x2.angle.key() {
            return Err(format!("angles differ: {} vs {}", x1.angle.turns(), x2.angle.turns()));
        }
        intertwining = intertwining.max((w1 - w2).norm() / w1.norm().max(1.0));
    }
    check(
        intertwining < 1e-8 && agreement < 1e-10,
        format!("intertwining residual {intertwining:.2e} (< 1e-8); closed form vs recursion {agreement:.2e} (< 1e-10)"),
    )
}

fn c10_growth(bas: &CocycleEngine, consts: &GroupConstants) -> Outcome {
    let mut r = rng(10);
    let z = c(0.3, 0.0);
    let k0 = consts.k0(z.norm()).ok_or("no k0")?;
    let mut min_margin = f64::INFINITY;
    for k in k0..=k0 + 3 {
        for _ in 0..20 {
            let xi = LeafLabel::on_circle(rand_angle(&mut r));
            let rep = growth_margin(bas, consts, &DeckTransform::new(1, k), &xi, z).map_err(|e| e.to_string())?;
            min_margin = min_margin.min(rep.margin / rep.rhs.abs().max(1.0));
        }
    }
    let premise = if consts.premise_met() {
        "|a| <= a0".to_string()
    } else {
        format!("note: a0 = {:.3e} < |a| = 1e-3 with delta = {:.4}", consts.a0, consts.delta)
    };
    check(
        min_margin > 0.0,
        format!("k0 = {k0}, min relative margin {min_margin:.3e} (> 0); {premise}"),
    )
}

fn c11_neighborhood(bas: &CocycleEngine, consts: &GroupConstants) -> Outcome {
    let cert = separating_neighborhood(bas, consts, &Angle::ZERO, c(0.0, 0.0), 1000, None).map_err(|e| e.to_string())?;
    Ok(format!(
        "k0 = {}, k <= {}, {} points x {} elements, min |gz - z0| / r = {:.3e}",
        cert.k0, cert.k_max, cert.sample_points, cert.elements, cert.min_z_ratio
    ))
}

fn c12_identification(bas: &CocycleEngine) -> Outcome {
    let rep = bas
        .identification_check(&Angle::rational(1, 3), &Angle::rational(2, 3))
        .map_err(|e| e.to_string())?;
    check(rep.pass, format!("relative difference {:.2e} (< 1e-5)", rep.rel_diff))
}

fn c13_semiconjugacy(rabbit: &CocycleEngine) -> Outcome {
    let h = rabbit.h;
    let mut r = rng(13);
    let m = 3;
    let opts = RatioOptions::default();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for i in 0..8 {
        let theta = Angle::dyadic(2 * i + 1, 4);
        let frame = rabbit.frame_level(&theta, m).map_err(|e| e.to_string())?;
        let image = rabbit.frame_level(&theta.double(), m - 1).map_err(|e| e.to_string())?;
        let alpha = rabbit.alpha_level(&theta, m).map_err(|e| e.to_string())?.value;
        let n = if i < 4 { 3 } else { 2 };
        for _ in 0..n {
            let y = frame.c0.y + C::from_polar(0.3 * r.gen::<f64>(), std::f64::consts::TAU * r.gen::<f64>());
            let q = leaf_point(&h, &frame.label, frame.c0, y, 4000).map_err(|e| e.to_string())?;
            let z = frame.coordinate(&h, q, &opts).map_err(|e| e.to_string())?.value;
            let z2 = image.coordinate(&h, h.apply(q), &opts).map_err(|e| e.to_string())?.value;
            worst = worst.max((z2 - (alpha * z - alpha)).norm());
            count += 1;
        }
    }
    check(
        worst < 1e-6,
        format!("{count} leaf points on 8 leaves (|xi| = e^{:.4}): max residual {worst:.2e} (< 1e-6)", rabbit.settings.locus.log_radius(m)),
    )
}

fn c14_p_lambda() -> Outcome {
    let one = c(1.0, 0.0);
    let c0 = p_lambda_params(one, c(0.0, 0.0)).c;
    let a = c(0.05, 0.0);
    let h = p_lambda_params(one, a);
    // fixed points from x^2 - (1 + a) x + c = 0, eigenvalues from
    // t^2 - 2x t + a = 0
    let b = 1.0 + a;
    let disc = (b * b - 4.0 * h.c).sqrt();
    let mut best = f64::INFINITY;
    for x in [(b + disc) / 2.0, (b - disc) / 2.0] {
        let d = (x * x - a).sqrt();
        for t in [x + d, x - d] {
            best = best.min((t - 1.0).norm());
        }
    }
    let hard = c0 == c(0.25, 0.0) && best < 1e-10;
    let soft = match semiparabolic_alpha_check(one, a) {
        Ok(rep) => match rep.rel_error {
            Some(e) if e < 5e-2 => format!("soft: alpha(1) vs mu rel. error {e:.2e} (< 5e-2)"),
            Some(e) => format!("WARN soft: alpha(1) vs mu rel. error {e:.2e} above 5e-2 ({})", rep.note),
            None => format!("WARN soft: alpha(1) unavailable ({})", rep.note),
        },
        Err(e) => format!("WARN soft: {e}"),
    };
    check(
        hard,
        format!("c(1, 0) = {}, |eigenvalue - 1| = {best:.1e} (< 1e-10); {soft}", c0),
    )
}

fn main() {
    let start = Instant::now();
    let bas = CocycleEngine::new(basilica());
    let rabbit = CocycleEngine::new(rabbit_like());
    let mut consts = None;
    let mut failed = 0;
    let mut run = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let out = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(d) => println!("PASS criterion {id:>2} {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {id:>2} {name}: {d} [{secs:.1}s]");
            }
        }
    };
    run(1, "boettcher functional equation", &mut c1_boettcher);
    run(2, "caratheodory equivariance", &mut c2_caratheodory);
    run(3, "henon escape function", &mut c3_escape_function);
    run(4, "eta index", &mut c4_eta_index);
    run(5, "stable multipliers", &mut || c5_multipliers(&rabbit, &bas));
    run(6, "lyapunov integral", &mut || c6_lyapunov(&bas));
    run(7, "degeneracy", &mut || c7_degeneracy(&bas));
    run(8, "degree", &mut || c8_degree(&rabbit, &bas));
    run(9, "group algebra", &mut || c9_group_algebra(&bas));
    run(10, "growth bound", &mut || {
        let k = compute_constants(&bas, 1024).map_err(|e| e.to_string())?;
        consts = Some(k);
        c10_growth(&bas, &k)
    });
    run(11, "separating neighborhood", &mut || {
        let k = match consts {
            Some(k) => k,
            None => compute_constants(&bas, 1024).map_err(|e| e.to_string())?,
        };
        c11_neighborhood(&bas, &k)
    });
    run(12, "identification", &mut || c12_identification(&bas));
    run(13, "leaf-coordinate semiconjugacy", &mut || c13_semiconjugacy(&rabbit));
    run(14, "semi-parabolic curve", &mut c14_p_lambda);
    println!("{} of 14 criteria passed in {:.1}s", 14 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
