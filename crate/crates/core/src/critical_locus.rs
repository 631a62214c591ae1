//! The primary component c0 of the critical locus: points where the leaf
//! of the U+ foliation labelled xi is tangent to the U- foliation.
//!
//! c0(xi) is found by Newton's method on the two equations
//!   log phi+(H^N q) = 2^N log xi     (leaf label, branch continued)
//!   det(d log phi+, d log phi-) = 0  (tangency)
//! continued in a from the degenerate solution (gamma(xi), 0) and then in
//! the radius of xi towards the unit circle. Leafwise affine ratios are
//! computed by propagating differences along forward orbits.

use crate::angle::{Angle, LeafLabel};
use crate::compensated::CDd;
use crate::error::{Error, Result};
use crate::extrapolate::LimitTracker;
use crate::henon_core::{wrap_pi, HenonParams, Point2};
use num_complex::Complex64;

type C = Complex64;

/// Tunables of the tangency solver and its continuations.
#[derive(Clone, Copy, Debug)]
pub struct LocusSettings {
    /// largest |a| for which the continuation from a = 0 is attempted
    pub ceiling: f64,
    /// continuation steps in a
    pub a_steps: usize,
    /// step halvings before a continuation stall is reported
    pub max_halvings: usize,
    pub newton_max: usize,
    /// acceptance threshold for both residuals
    pub accept: f64,
    /// largest allowed |x(c0) - gamma(xi)|
    pub trap: f64,
    /// escape iteration budget
    pub max_iter: usize,
    /// log-radius of the first circle-schedule entry; entry m is t0 * 2^-m
    pub t0: f64,
    pub schedule_len: usize,
    /// Cauchy gap for the radius -> 1 extrapolation
    pub circle_tol: f64,
}

impl Default for LocusSettings {
    fn default() -> Self {
        LocusSettings {
            ceiling: 0.3,
            a_steps: 8,
            max_halvings: 10,
            newton_max: 40,
            accept: 1e-9,
            trap: 0.5,
            max_iter: 4000,
            t0: 0.1,
            schedule_len: 13,
            circle_tol: 1e-7,
        }
    }
}

impl LocusSettings {
    /// Log-radius of schedule entry m (m may be negative).
    pub fn log_radius(&self, m: i32) -> f64 {
        self.t0 * 0.5f64.powi(m)
    }
}

/// A solved point of the primary critical-locus component.
#[derive(Clone, Copy, Debug)]
pub struct TangencyPoint {
    pub label: LeafLabel,
    pub q: Point2,
    /// |log phi+(H^N q) / 2^N - log xi| (on the circle: extrapolation gap)
    pub residual_leaf: f64,
    /// |det| of the two covectors over the product of their norms
    pub residual_tangency: f64,
    pub iterations: usize,
    /// forward steps used for the leaf equation
    pub n_forward: usize,
    pub converged: bool,
}

/// Leafwise affine ratio with convergence metadata.
#[derive(Clone, Copy, Debug)]
pub struct AffineRatioResult {
    pub value: C,
    pub iterations: usize,
    /// change between the last two estimates, relative to max(1, |value|)
    pub last_correction: f64,
    pub converged: bool,
}

fn normalize_direction(v: [C; 2]) -> [C; 2] {
    let n = v[0].norm().hypot(v[1].norm());
    let lead = if v[0].norm() > 1e-14 * n { v[0] } else { v[1] };
    let s = lead / lead.norm() * n;
    [v[0] / s, v[1] / s]
}

/// sin of the angle between two directions of C^2 (0 iff parallel).
pub fn projective_distance(u: [C; 2], v: [C; 2]) -> f64 {
    let nu = u[0].norm().hypot(u[1].norm());
    let nv = v[0].norm().hypot(v[1].norm());
    (u[0] * v[1] - u[1] * v[0]).norm() / (nu * nv)
}

/// Tangent direction of the U+ leaf through q (kernel of d log phi+ o H^N).
pub fn leaf_tangent_plus(h: &HenonParams, q: Point2, n: usize) -> Result<[C; 2]> {
    let g = h.escape_jet_plus(q, Some(n), n)?.grad;
    Ok(normalize_direction([-g[1], g[0]]))
}

/// Tangent direction of the U- leaf through q (kernel of d log phi- o H^-M).
pub fn leaf_tangent_minus(h: &HenonParams, q: Point2, m: usize) -> Result<[C; 2]> {
    let g = h.escape_jet_minus(q, Some(m), m)?.grad;
    Ok(normalize_direction([-g[1], g[0]]))
}

fn scaled_det(gp: [C; 2], gm: [C; 2]) -> C {
    let np = gp[0].norm().hypot(gp[1].norm());
    let nm = gm[0].norm().hypot(gm[1].norm());
    (gp[0] * gm[1] - gp[1] * gm[0]) / (np * nm)
}

/// det of the covectors d log phi+ o H^N and d log phi- o H^-M, divided by
/// the product of their norms.
pub fn tangency_residual(h: &HenonParams, q: Point2, n: usize, m: usize) -> Result<C> {
    let gp = h.escape_jet_plus(q, Some(n), n)?.grad;
    let gm = h.escape_jet_minus(q, Some(m), m)?.grad;
    Ok(scaled_det(gp, gm))
}

struct Residual {
    leaf: C,
    tangency: C,
    /// gradient of the leaf equation
    row: [C; 2],
    scaled_det: C,
    n: usize,
}

impl Residual {
    fn size(&self) -> f64 {
        self.leaf.norm() + self.tangency.norm()
    }
}

/// log-label equation value at forward depth n, divided by 2^n, with the
/// imaginary part reduced to the principal determination.
fn label_equation(log_value: C, label: &LeafLabel, n: usize) -> C {
    let target = label.power_of_two(n as u32).log();
    let d = log_value - target;
    C::new(d.re, wrap_pi(d.im)) / 2f64.powi(n as i32)
}

fn evaluate(h: &HenonParams, q: Point2, label: &LeafLabel, n_min: usize, max_iter: usize) -> Result<Residual> {
    if !q.is_finite() {
        return Err(Error::NotEscaping { max_iter });
    }
    let (n0, _) = h
        .first_entry_forward(q, max_iter)
        .ok_or(Error::NotEscaping { max_iter })?;
    let n = n0.max(n_min);
    let jp = h.escape_jet_plus(q, Some(n), n)?;
    let jm = h.escape_jet_minus(q, None, max_iter)?;
    let (gp, gm) = (jp.grad, jm.grad);
    let scale = 2f64.powi(n as i32);
    Ok(Residual {
        leaf: label_equation(jp.log_value, label, n),
        tangency: gm[1] / gm[0] - gp[1] / gp[0],
        row: [gp[0] / scale, gp[1] / scale],
        scaled_det: scaled_det(gp, gm),
        n,
    })
}

/// Newton's method on the leaf and tangency equations from a seed.
fn newton(h: &HenonParams, label: &LeafLabel, seed: Point2, s: &LocusSettings) -> Result<TangencyPoint> {
    let mut q = seed;
    let mut r = evaluate(h, q, label, 0, s.max_iter)?;
    let mut iterations = 0;
    while iterations < s.newton_max && r.size() > 1e-15 {
        iterations += 1;
        // close to J+ the step must stay inside the escaping region
        let step = 1e-7 * (1.0 + q.norm()) * (10.0 * label.log_radius).min(1.0);
        let col = match tangency_gradient(h, q, label, r.n, step, s.max_iter) {
            Some(col) => col,
            None => break,
        };
        let jac = crate::henon_core::Mat2([r.row, col]);
        let delta = match jac.solve(Point2::new(-r.leaf, -r.tangency)) {
            Some(d) if d.is_finite() => d,
            _ => break,
        };
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let trial = q + delta.scale(C::new(lambda, 0.0));
            if let Ok(rt) = evaluate(h, trial, label, r.n, s.max_iter) {
                if rt.size() < r.size() {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((qn, rn)) => {
                let moved = (qn - q).norm();
                q = qn;
                r = rn;
                if moved < 1e-15 * (1.0 + q.norm()) {
                    break;
                }
            }
            None => break,
        }
    }
    let point = TangencyPoint {
        label: *label,
        q,
        residual_leaf: r.leaf.norm(),
        residual_tangency: r.scaled_det.norm(),
        iterations,
        n_forward: r.n,
        converged: true,
    };
    if point.residual_leaf < s.accept && point.residual_tangency < s.accept {
        Ok(point)
    } else {
        Err(Error::NoConvergence {
            residual: point.residual_leaf.max(point.residual_tangency),
        })
    }
}

/// Central differences of the (holomorphic) tangency equation, shrinking
/// the step when a probe leaves the escaping region.
fn tangency_gradient(h: &HenonParams, q: Point2, label: &LeafLabel, n: usize, step: f64, max_iter: usize) -> Option<[C; 2]> {
    let mut step = step;
    for _ in 0..8 {
        let mut col = [C::new(0.0, 0.0); 2];
        let mut ok = true;
        for (i, e) in [Point2::real(1.0, 0.0), Point2::real(0.0, 1.0)].iter().enumerate() {
            let d = e.scale(C::new(step, 0.0));
            match (evaluate(h, q + d, label, n, max_iter), evaluate(h, q - d, label, n, max_iter)) {
                (Ok(fp), Ok(fm)) => col[i] = (fp.tangency - fm.tangency) / (2.0 * step),
                _ => ok = false,
            }
        }
        if ok {
            return Some(col);
        }
        step *= 0.125;
    }
    None
}

fn check_ceiling(h: &HenonParams, s: &LocusSettings) -> Result<()> {
    if h.a.norm() == 0.0 {
        return Err(Error::ZeroJacobian);
    }
    if h.a.norm() > s.ceiling {
        return Err(Error::PreconditionUnmet(format!(
            "|a| = {} above the continuation ceiling {}",
            h.a.norm(),
            s.ceiling
        )));
    }
    Ok(())
}

/// c0(xi) for |xi| > 1. Without a seed the solution is continued in a from
/// the degenerate point (gamma(xi), 0).
pub fn solve_c0(h: &HenonParams, label: &LeafLabel, seed: Option<Point2>, s: &LocusSettings) -> Result<TangencyPoint> {
    check_ceiling(h, s)?;
    if !(label.log_radius > 0.0) {
        return Err(Error::PreconditionUnmet("solve_c0 needs |xi| > 1".into()));
    }
    let g = h.boettcher().boettcher_inverse_label(label)?;
    let point = match seed {
        Some(seed) => newton(h, label, seed, s)?,
        None => continue_in_a(h, label, Point2::new(g, C::new(0.0, 0.0)), s)?,
    };
    let distance = (point.q.x - g).norm();
    if distance > s.trap {
        return Err(Error::WrongComponent { distance });
    }
    Ok(point)
}

fn continue_in_a(h: &HenonParams, label: &LeafLabel, start: Point2, s: &LocusSettings) -> Result<TangencyPoint> {
    let mut frac = 0.0;
    let mut step = 1.0 / s.a_steps as f64;
    let mut q = start;
    let mut halvings = 0;
    let mut last = None;
    while frac < 1.0 {
        let next = (frac + step).min(1.0);
        let hs = HenonParams::new(h.c, h.a * next);
        match newton(&hs, label, q, s) {
            Ok(p) => {
                q = p.q;
                frac = next;
                last = Some(p);
            }
            Err(_) if halvings < s.max_halvings => {
                step *= 0.5;
                halvings += 1;
            }
            Err(_) => {
                return Err(Error::ContinuationStall {
                    at_a: (h.a * next).norm(),
                })
            }
        }
    }
    Ok(last.expect("continuation made at least one step"))
}

/// c0 along one ray at the schedule entries m in [m_first, m_last], solved
/// at the coarsest radius by continuation in a and then followed inwards.
pub fn c0_track(h: &HenonParams, angle: &Angle, m_first: i32, m_last: i32, s: &LocusSettings) -> Vec<Result<TangencyPoint>> {
    let count = (m_last - m_first + 1).max(0) as usize;
    track_halving(h, angle, s.log_radius(m_first), count, s)
}

/// c0 at an arbitrary label |xi| > 1, followed in from a radius where the
/// continuation in a is reliable.
pub fn solve_c0_tracked(h: &HenonParams, label: &LeafLabel, s: &LocusSettings) -> Result<TangencyPoint> {
    let t = label.log_radius;
    if !(t > 0.0) {
        return Err(Error::PreconditionUnmet("solve_c0 needs |xi| > 1".into()));
    }
    let coarse = s.log_radius(-1);
    let mut levels = 0;
    while t * 2f64.powi(levels) < coarse {
        levels += 1;
    }
    let track = track_halving(h, &label.angle, t * 2f64.powi(levels), levels as usize + 1, s);
    track.into_iter().last().expect("nonempty track")
}

/// c0 at log-radii t_first * 2^-i, i < count.
fn track_halving(h: &HenonParams, angle: &Angle, t_first: f64, count: usize, s: &LocusSettings) -> Vec<Result<TangencyPoint>> {
    let gammas = match h.boettcher().ray_descent(angle, t_first, count) {
        Ok(g) => g,
        Err(e) => return vec![Err(e); count],
    };
    let mut out = Vec::with_capacity(count);
    // last good solution and the ray point it was predicted from
    let mut anchor: Option<(Point2, C)> = None;
    for i in 0..count {
        let label = LeafLabel::new(*angle, t_first * 0.5f64.powi(i as i32));
        let res = match anchor {
            None => solve_c0(h, &label, None, s),
            Some((q, g)) => {
                // predictor: move with the ray; back off if it overshoots
                // into the non-escaping set
                let shift = gammas[i] - g;
                let mut res = Err(Error::NoConvergence { residual: f64::INFINITY });
                for lambda in [1.0, 0.5, 0.25, 0.0] {
                    let seed = q + Point2::new(shift * lambda, C::new(0.0, 0.0));
                    res = solve_c0(h, &label, Some(seed), s);
                    if res.is_ok() {
                        break;
                    }
                }
                res
            }
        };
        if let Ok(p) = &res {
            anchor = Some((p.q, gammas[i]));
        }
        out.push(res);
    }
    out
}

/// c0 on the unit circle as the limit of c0 along the ray, with Aitken
/// extrapolation over the radius schedule.
pub fn c0_on_circle(h: &HenonParams, angle: &Angle, s: &LocusSettings) -> Result<TangencyPoint> {
    let track = c0_track(h, angle, 0, s.schedule_len as i32 - 1, s);
    let mut tracker = LimitTracker::new();
    let mut last = None;
    for p in track {
        let p = p?;
        tracker.push(&[p.q.x, p.q.y]);
        last = Some(p);
        if tracker.gap() < s.circle_tol {
            break;
        }
    }
    let last = last.ok_or(Error::InvalidInput("empty radius schedule".into()))?;
    let best = tracker.best().expect("nonempty");
    Ok(TangencyPoint {
        label: LeafLabel::on_circle(*angle),
        q: Point2::new(best[0], best[1]),
        residual_leaf: tracker.gap(),
        residual_tangency: last.residual_tangency,
        iterations: tracker.len(),
        n_forward: last.n_forward,
        converged: tracker.gap() < s.circle_tol,
    })
}

/// Two points of one leaf as a base point and the difference other - base.
#[derive(Clone, Copy, Debug)]
pub struct LeafPair {
    pub base: Point2,
    pub diff: Point2,
}

impl LeafPair {
    /// The pair (p, q) stored as base q, difference p - q.
    pub fn new(p: Point2, q: Point2) -> LeafPair {
        LeafPair { base: q, diff: p - q }
    }

    /// Image under H. The difference uses H(q + d) - H(q) = ((2x + dx) dx
    /// - a dy, dx), which involves no subtraction of nearby numbers.
    pub fn advance(&self, h: &HenonParams) -> LeafPair {
        let d = self.diff;
        let s = 2.0 * self.base.x + d.x;
        LeafPair {
            base: h.apply(self.base),
            diff: Point2::new(s * d.x - h.a * d.y, d.x),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RatioOptions {
    /// propagate the points and subtract (cross-checking only)
    pub naive: bool,
    /// double-double propagation
    pub compensated: bool,
    pub max_steps: usize,
    pub tol: f64,
}

impl Default for RatioOptions {
    fn default() -> Self {
        RatioOptions {
            naive: false,
            compensated: false,
            max_steps: 80,
            tol: 1e-10,
        }
    }
}

/// One step of a pair-propagation scheme: the y-differences of both pairs,
/// the difference sizes and the base size.
trait Stepper {
    fn step(&mut self, h: &HenonParams);
    fn state(&self) -> (C, C, f64, f64, f64);
}

struct Exact(LeafPair, LeafPair);

impl Stepper for Exact {
    fn step(&mut self, h: &HenonParams) {
        self.0 = self.0.advance(h);
        self.1 = self.1.advance(h);
    }
    fn state(&self) -> (C, C, f64, f64, f64) {
        let b = self.0.base.norm().max(self.1.base.norm());
        (self.0.diff.y, self.1.diff.y, self.0.diff.norm(), self.1.diff.norm(), b)
    }
}

struct Naive([Point2; 3]);

impl Stepper for Naive {
    fn step(&mut self, h: &HenonParams) {
        for p in self.0.iter_mut() {
            *p = h.apply(*p);
        }
    }
    fn state(&self) -> (C, C, f64, f64, f64) {
        let [a, b, c] = self.0;
        let b_norm = a.norm().max(b.norm()).max(c.norm());
        (a.y - b.y, b.y - c.y, (a - b).norm(), (b - c).norm(), b_norm)
    }
}

#[derive(Clone, Copy)]
struct DdPair {
    bx: CDd,
    by: CDd,
    dx: CDd,
    dy: CDd,
}

impl DdPair {
    fn new(p: &LeafPair) -> Self {
        DdPair {
            bx: p.base.x.into(),
            by: p.base.y.into(),
            dx: p.diff.x.into(),
            dy: p.diff.y.into(),
        }
    }

    fn advance(&mut self, c: CDd, a: CDd) {
        let two_bx = self.bx + self.bx;
        let dx = (two_bx + self.dx) * self.dx - a * self.dy;
        let bx = self.bx * self.bx + c - a * self.by;
        self.by = self.bx;
        self.bx = bx;
        self.dy = self.dx;
        self.dx = dx;
    }
}

struct Compensated(DdPair, DdPair);

impl Stepper for Compensated {
    fn step(&mut self, h: &HenonParams) {
        let (c, a) = (h.c.into(), h.a.into());
        self.0.advance(c, a);
        self.1.advance(c, a);
    }
    fn state(&self) -> (C, C, f64, f64, f64) {
        let n = |x: CDd, y: CDd| x.to_c64().norm().hypot(y.to_c64().norm());
        (
            self.0.dy.to_c64(),
            self.1.dy.to_c64(),
            n(self.0.dx, self.0.dy),
            n(self.1.dx, self.1.dy),
            n(self.0.bx, self.0.by).max(n(self.1.bx, self.1.by)),
        )
    }
}

/// lim (y_A - y_B) / (y_B - y_C) along forward orbits, for the pairs
/// ab = (A, B) and bc = (B, C) given at a common iterate.
///
/// Differences along a leaf contract while rounding noise transverse to the
/// leaves is expanded; once the differences stop contracting the estimates
/// only measure that noise. The iteration therefore stops at the first
/// non-contracting step (or at a change below `tol`) and returns the
/// estimate with the smallest change inside the trusted window. Points on
/// different leaves fail to contract within the first two steps.
pub fn ratio_of_pairs(h: &HenonParams, ab: LeafPair, bc: LeafPair, opts: &RatioOptions) -> Result<AffineRatioResult> {
    let mut stepper: Box<dyn Stepper> = if opts.naive {
        Box::new(Naive([ab.base + ab.diff, ab.base, bc.base]))
    } else if opts.compensated {
        Box::new(Compensated(DdPair::new(&ab), DdPair::new(&bc)))
    } else {
        Box::new(Exact(ab, bc))
    };
    let (dy_ab, dy_bc, mut n_ab, mut n_bc, _) = stepper.state();
    let mut prev = (dy_bc.norm() > 0.0).then(|| dy_ab / dy_bc);
    let mut best: Option<(C, f64, usize)> = None;
    let mut window = 0;
    let mut escaped = false;
    for n in 1..=opts.max_steps {
        stepper.step(h);
        let (dy_ab, dy_bc, a1, b1, base) = stepper.state();
        if !(base < 1e150) || !dy_ab.is_finite() || !dy_bc.is_finite() {
            escaped = true;
            break;
        }
        if a1 > 0.9 * n_ab || b1 > 0.9 * n_bc {
            break;
        }
        window = n;
        (n_ab, n_bc) = (a1, b1);
        if dy_bc.norm() == 0.0 {
            continue;
        }
        let r = dy_ab / dy_bc;
        if let Some(p) = prev {
            let change = (r - p).norm() / r.norm().max(1.0);
            if best.map_or(true, |(_, c, _)| change < c) {
                best = Some((r, change, n));
            }
            if change < opts.tol {
                break;
            }
        }
        prev = Some(r);
    }
    if window == 0 && !escaped {
        return Err(Error::NotSameLeaf { step: window + 1 });
    }
    let (value, change, n) = best.ok_or(Error::DegenerateTriple)?;
    Ok(AffineRatioResult {
        value,
        iterations: n,
        last_correction: change,
        converged: change < opts.tol,
    })
}

/// Affine ratio (A - B) / (B - C) of three points of one leaf.
pub fn affine_ratio(h: &HenonParams, a: Point2, b: Point2, c: Point2, opts: &RatioOptions) -> Result<AffineRatioResult> {
    let scale = a.norm().max(b.norm()).max(c.norm()).max(1.0);
    if (b - c).norm() < 1e-13 * scale {
        return Err(Error::DegenerateTriple);
    }
    if (a - b).norm() == 0.0 {
        return Ok(AffineRatioResult {
            value: C::new(0.0, 0.0),
            iterations: 0,
            last_correction: 0.0,
            converged: true,
        });
    }
    ratio_of_pairs(h, LeafPair::new(a, b), LeafPair::new(b, c), opts)
}

/// The standard affine coordinate on one leaf: 0 at c0(xi) and 1 at
/// c_{-1}(xi) = H^-1(c0(xi^2)).
#[derive(Clone, Copy, Debug)]
pub struct LeafFrame {
    pub label: LeafLabel,
    pub c0: Point2,
    /// c0(xi^2); c_{-1}(xi) is its preimage
    pub c0_square: Point2,
}

impl LeafFrame {
    pub fn new(c0: Point2, c0_square: Point2, label: LeafLabel) -> LeafFrame {
        LeafFrame { label, c0, c0_square }
    }

    /// Solve both tangency points (by continuation) for a label |xi| > 1.
    pub fn solve(h: &HenonParams, label: &LeafLabel, s: &LocusSettings) -> Result<LeafFrame> {
        let c0 = solve_c0(h, label, None, s)?;
        let c0_square = solve_c0(h, &label.square(), None, s)?;
        Ok(LeafFrame::new(c0.q, c0_square.q, *label))
    }

    pub fn c_minus_one(&self, h: &HenonParams) -> Result<Point2> {
        h.apply_inverse(self.c0_square)
    }

    /// z(q) = -ratio(q, c0, c_{-1}), evaluated one iterate ahead so that
    /// c_{-1} never has to be formed: H c_{-1} = c0(xi^2).
    pub fn coordinate(&self, h: &HenonParams, q: Point2, opts: &RatioOptions) -> Result<AffineRatioResult> {
        if (q - self.c0).norm() == 0.0 {
            return Ok(AffineRatioResult {
                value: C::new(0.0, 0.0),
                iterations: 0,
                last_correction: 0.0,
                converged: true,
            });
        }
        let ab = LeafPair::new(q, self.c0).advance(h);
        let bc = LeafPair::new(h.apply(self.c0), self.c0_square);
        let r = ratio_of_pairs(h, ab, bc, opts)?;
        Ok(AffineRatioResult { value: -r.value, ..r })
    }
}

/// leaf_coordinate(q) in the standard trivialization of `label`'s leaf.
pub fn leaf_coordinate(h: &HenonParams, q: Point2, label: &LeafLabel, s: &LocusSettings) -> Result<C> {
    let frame = LeafFrame::solve(h, label, s)?;
    Ok(frame.coordinate(h, q, &RatioOptions::default())?.value)
}

/// A point of the leaf `label` with second coordinate y, followed from a
/// point `start` of the same leaf by continuation in y.
pub fn leaf_point(h: &HenonParams, label: &LeafLabel, start: Point2, y: C, max_iter: usize) -> Result<Point2> {
    let pieces = ((y - start.y).norm() / 0.125).ceil().max(1.0) as usize;
    let mut q = start;
    for i in 1..=pieces {
        let yi = start.y + (y - start.y) * (i as f64 / pieces as f64);
        let jet = h.escape_jet_plus(q, None, max_iter)?;
        // predictor along the leaf tangent
        let mut x = q.x - jet.grad[1] / jet.grad[0] * (yi - q.y);
        let mut n_min = 0;
        let mut residual = f64::INFINITY;
        for _ in 0..40 {
            let p = Point2::new(x, yi);
            let (n0, _) = h
                .first_entry_forward(p, max_iter)
                .ok_or(Error::NotEscaping { max_iter })?;
            let n = n0.max(n_min);
            n_min = n;
            let j = h.escape_jet_plus(p, Some(n), n)?;
            let f = label_equation(j.log_value, label, n);
            residual = f.norm();
            if residual < 1e-15 {
                break;
            }
            let dx = f / (j.grad[0] / 2f64.powi(n as i32));
            x -= dx;
            if dx.norm() < 1e-16 * (1.0 + x.norm()) {
                break;
            }
        }
        if !(residual < 1e-12) {
            return Err(Error::NoConvergence { residual });
        }
        q = Point2::new(x, yi);
    }
    Ok(q)
}
