//! The Henon map H(x, y) = (x^2 + c - a y, x), its inverse and derivatives,
//! the filtration V / V+ / V-, the escape functions phi+ and phi-, the
//! winding index of loops in U+, and periodic points.

use crate::error::{Error, Result};
use crate::polynomial_dynamics::{BoettcherContext, QuadraticPoly};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// A point of C^2.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: C,
    pub y: C,
}

impl Point2 {
    pub const fn new(x: C, y: C) -> Self {
        Point2 { x, y }
    }

    pub fn real(x: f64, y: f64) -> Self {
        Point2::new(C::new(x, 0.0), C::new(y, 0.0))
    }

    /// Euclidean norm in C^2.
    pub fn norm(&self) -> f64 {
        self.x.norm().hypot(self.y.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn scale(&self, s: C) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

/// 2x2 complex matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn det(&self) -> C {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C {
        self.0[0][0] + self.0[1][1]
    }

    pub fn apply(&self, v: Point2) -> Point2 {
        let m = &self.0;
        Point2::new(m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y)
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, row: [C; 2]) -> [C; 2] {
        let m = &self.0;
        [row[0] * m[0][0] + row[1] * m[1][0], row[0] * m[0][1] + row[1] * m[1][1]]
    }

    /// Eigenvalues ordered (small, large) by modulus; the small one is
    /// recovered from the determinant to avoid cancellation.
    pub fn eigenvalues(&self) -> (C, C) {
        let half = self.trace() / 2.0;
        let disc = (half * half - self.det()).sqrt();
        let (l1, l2) = (half + disc, half - disc);
        let large = if l1.norm() >= l2.norm() { l1 } else { l2 };
        if large.norm() == 0.0 {
            return (ZERO, ZERO);
        }
        (self.det() / large, large)
    }

    /// Solve M v = b.
    pub fn solve(&self, b: Point2) -> Option<Point2> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Point2::new(
            (b.x * m[1][1] - m[0][1] * b.y) / d,
            (m[0][0] * b.y - m[1][0] * b.x) / d,
        ))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut r = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }
}

/// The pair (c, a) with the derived filtration radius R.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HenonParams {
    pub c: C,
    pub a: C,
    r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiltrationRegion {
    V,
    Vplus,
    Vminus,
}

/// Truncation radius of the telescoping products.
pub const BIG_RADIUS: f64 = 1e8;

/// Which end of the map an escape function refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Forward,
    Backward,
}

/// log of an escape function at an iterate, with the gradient of that value
/// with respect to the original point.
#[derive(Clone, Copy, Debug)]
pub struct EscapeJet {
    /// number of iterates used to reach V+ (or V-)
    pub n: usize,
    /// log phi+(H^n q) (or log phi-(H^-n q)); imaginary part mod 2 pi
    pub log_value: C,
    /// d/dq of log_value, i.e. the covector (grad log phi) o DH^n_q
    pub grad: [C; 2],
}

/// Nearest dyadic rational to a winding index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicIndex {
    pub value: f64,
    pub nearest_dyadic: (i64, u32),
    pub distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicPointRecord {
    pub point: Point2,
    pub period: usize,
    pub eigen_small: C,
    pub eigen_large: C,
    pub residual: f64,
}

/// Outcome of a seeded periodic-point search.
#[derive(Clone, Debug, Default)]
pub struct PeriodicSearch {
    pub records: Vec<PeriodicPointRecord>,
    /// seeds whose Newton iteration failed
    pub failures: Vec<(Point2, Error)>,
}

impl HenonParams {
    pub fn new(c: C, a: C) -> Self {
        let s = 1.0 + a.norm();
        let r = 3f64.max((s + (s * s + 4.0 * c.norm()).sqrt()) / 2.0 + 0.5);
        HenonParams { c, a, r }
    }

    pub fn real(c: f64, a: f64) -> Self {
        Self::new(C::new(c, 0.0), C::new(a, 0.0))
    }

    /// Filtration radius R.
    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn poly(&self) -> QuadraticPoly {
        QuadraticPoly::new(self.c)
    }

    pub fn boettcher(&self) -> BoettcherContext {
        BoettcherContext::new(self.c)
    }

    fn require_invertible(&self) -> Result<()> {
        if self.a.norm() == 0.0 {
            Err(Error::ZeroJacobian)
        } else {
            Ok(())
        }
    }

    #[inline]
    pub fn apply(&self, q: Point2) -> Point2 {
        Point2::new(q.x * q.x + self.c - self.a * q.y, q.x)
    }

    pub fn apply_inverse(&self, q: Point2) -> Result<Point2> {
        self.require_invertible()?;
        Ok(self.inv(q))
    }

    #[inline]
    fn inv(&self, q: Point2) -> Point2 {
        Point2::new(q.y, (q.y * q.y + self.c - q.x) / self.a)
    }

    pub fn iterate(&self, q: Point2, n: usize) -> Point2 {
        (0..n).fold(q, |q, _| self.apply(q))
    }

    pub fn iterate_inverse(&self, q: Point2, n: usize) -> Result<Point2> {
        self.require_invertible()?;
        Ok((0..n).fold(q, |q, _| self.inv(q)))
    }

    /// DH_q = [[2x, -a], [1, 0]].
    pub fn derivative(&self, q: Point2) -> Mat2 {
        Mat2([[2.0 * q.x, -self.a], [ONE, ZERO]])
    }

    /// D(H^-1)_q = [[0, 1], [-1/a, 2y/a]].
    pub fn inverse_derivative(&self, q: Point2) -> Result<Mat2> {
        self.require_invertible()?;
        Ok(Mat2([[ZERO, ONE], [-ONE / self.a, 2.0 * q.y / self.a]]))
    }

    /// D(H^k)_q as the ordered product along the forward orbit.
    pub fn orbit_derivative(&self, q: Point2, k: usize) -> Mat2 {
        let mut m = Mat2::IDENTITY;
        let mut p = q;
        for _ in 0..k {
            m = self.derivative(p) * m;
            p = self.apply(p);
        }
        m
    }

    /// Eigenvalues (small, large) of D(H^k)_q. The small one is a^k divided
    /// by the large one: the determinant is known exactly, whereas the
    /// determinant of the computed product suffers cancellation.
    pub fn orbit_eigenvalues(&self, q: Point2, k: usize) -> (C, C) {
        let m = self.orbit_derivative(q, k);
        let half = m.trace() / 2.0;
        let det = self.a.powi(k as i32);
        let disc = (half * half - det).sqrt();
        let (l1, l2) = (half + disc, half - disc);
        let large = if l1.norm() >= l2.norm() { l1 } else { l2 };
        (det / large, large)
    }

    pub fn classify(&self, q: Point2) -> FiltrationRegion {
        let (ax, ay) = (q.x.norm(), q.y.norm());
        if ax >= ay.max(self.r) {
            FiltrationRegion::Vplus
        } else if ay >= ax.max(self.r) {
            FiltrationRegion::Vminus
        } else {
            FiltrationRegion::V
        }
    }

    /// Smallest N <= max_iter with H^N(q) in V+.
    pub fn first_entry_forward(&self, q: Point2, max_iter: usize) -> Option<(usize, Point2)> {
        let mut p = q;
        for n in 0..=max_iter {
            if !p.is_finite() {
                return None;
            }
            if self.classify(p) == FiltrationRegion::Vplus {
                return Some((n, p));
            }
            p = self.apply(p);
        }
        None
    }

    /// Smallest M <= max_iter with H^-M(q) in V-.
    pub fn first_entry_backward(&self, q: Point2, max_iter: usize) -> Result<Option<(usize, Point2)>> {
        self.require_invertible()?;
        let mut p = q;
        for n in 0..=max_iter {
            if !p.is_finite() {
                return Ok(None);
            }
            if self.classify(p) == FiltrationRegion::Vminus {
                return Ok(Some((n, p)));
            }
            p = self.inv(p);
        }
        Ok(None)
    }

    /// Telescoping log of an escape function from an entry point (s, t),
    /// for the recursion s' = (s^2 + c - k t) / m, t' = s, together with the
    /// gradient given the derivatives ds, dt of the entry coordinates.
    fn telescope(&self, side: Side, s0: C, t0: C, ds: [C; 2], dt: [C; 2]) -> (C, [C; 2]) {
        let (k, m) = match side {
            Side::Forward => (self.a, ONE),
            Side::Backward => (ONE, self.a),
        };
        let c = self.c;
        let (mut s, mut t) = (s0, t0);
        let mut log_value = s.ln();
        let mut e = [ds[0] / s, ds[1] / s];
        let mut p = [dt[0] / s, dt[1] / s];
        let mut grad = e;
        let mut w = 0.5;
        while s.norm() <= BIG_RADIUS && w > 1e-30 {
            let u = s * s + c - k * t;
            let s_next = u / m;
            log_value += w * (u / (s * s)).ln();
            let mut e_next = [ZERO; 2];
            for i in 0..2 {
                let dterm = (2.0 * (k * t - c) * e[i] - k * s * p[i]) / u;
                grad[i] += w * dterm;
                e_next[i] = 2.0 * e[i] + dterm;
                p[i] = e[i] * s / s_next;
            }
            e = e_next;
            t = s;
            s = s_next;
            w *= 0.5;
        }
        (log_value, grad)
    }

    /// log phi+ at a point of V+ (principal telescoping).
    pub fn log_phi_plus(&self, q: Point2) -> Result<C> {
        if self.classify(q) != FiltrationRegion::Vplus {
            return Err(Error::NotEscaping { max_iter: 0 });
        }
        Ok(self.telescope(Side::Forward, q.x, q.y, [ONE, ZERO], [ZERO, ONE]).0)
    }

    /// phi+ on V+; satisfies phi+ o H = (phi+)^2 and phi+ ~ x.
    pub fn phi_plus(&self, q: Point2) -> Result<C> {
        Ok(self.log_phi_plus(q)?.exp())
    }

    /// (N, phi+(H^N q)) with N the first entry time into V+. The 2^N-th root
    /// is deliberately not taken.
    pub fn phi_plus_iterated(&self, q: Point2, max_iter: usize) -> Result<(usize, C)> {
        let (n, p) = self
            .first_entry_forward(q, max_iter)
            .ok_or(Error::NotEscaping { max_iter })?;
        Ok((n, self.phi_plus(p)?))
    }

    /// log phi- at a point of V-.
    pub fn log_phi_minus(&self, q: Point2) -> Result<C> {
        self.require_invertible()?;
        if self.classify(q) != FiltrationRegion::Vminus {
            return Err(Error::NotEscapingBackward { max_iter: 0 });
        }
        Ok(self.telescope(Side::Backward, q.y, q.x, [ZERO, ONE], [ONE, ZERO]).0)
    }

    /// phi- on V-; satisfies a phi- o H^-1 = (phi-)^2 and phi- ~ y.
    pub fn phi_minus(&self, q: Point2) -> Result<C> {
        Ok(self.log_phi_minus(q)?.exp())
    }

    /// log phi+(H^n q) and its gradient in q. With `n = None` the first entry
    /// time into V+ is used; an explicit n must land in V+.
    pub fn escape_jet_plus(&self, q: Point2, n: Option<usize>, max_iter: usize) -> Result<EscapeJet> {
        let mut p = q;
        let mut d = Mat2::IDENTITY;
        let mut steps = 0;
        loop {
            let inside = self.classify(p) == FiltrationRegion::Vplus;
            let done = match n {
                Some(n) => steps == n,
                None => inside,
            };
            if done {
                if !inside {
                    return Err(Error::NotEscaping { max_iter: steps });
                }
                break;
            }
            if steps >= max_iter || !p.is_finite() {
                return Err(Error::NotEscaping { max_iter });
            }
            d = self.derivative(p) * d;
            p = self.apply(p);
            steps += 1;
        }
        let (log_value, grad) = self.telescope(Side::Forward, p.x, p.y, d.0[0], d.0[1]);
        Ok(EscapeJet {
            n: steps,
            log_value,
            grad,
        })
    }

    /// log phi-(H^-m q) and its gradient in q (backward analogue).
    pub fn escape_jet_minus(&self, q: Point2, m: Option<usize>, max_iter: usize) -> Result<EscapeJet> {
        self.require_invertible()?;
        let mut p = q;
        let mut d = Mat2::IDENTITY;
        let mut steps = 0;
        loop {
            let inside = self.classify(p) == FiltrationRegion::Vminus;
            let done = match m {
                Some(m) => steps == m,
                None => inside,
            };
            if done {
                if !inside {
                    return Err(Error::NotEscapingBackward { max_iter: steps });
                }
                break;
            }
            if steps >= max_iter || !p.is_finite() {
                return Err(Error::NotEscapingBackward { max_iter });
            }
            d = self.inverse_derivative(p)? * d;
            p = self.inv(p);
            steps += 1;
        }
        let (log_value, grad) = self.telescope(Side::Backward, p.y, p.x, d.0[1], d.0[0]);
        Ok(EscapeJet {
            n: steps,
            log_value,
            grad,
        })
    }

    /// Winding index eta(C) = (1/2 pi i) \oint d log phi+ of a closed polyline
    /// in U+, computed on the forward image H^N(C) inside V+ and divided by 2^N.
    pub fn eta_index(&self, polyline: &[Point2]) -> Result<DyadicIndex> {
        const MAX_ITER: usize = 500;
        const SEGMENT_LIMIT: usize = 1 << 20;
        if polyline.is_empty() {
            return Err(Error::InvalidInput("empty loop".into()));
        }
        let mut n = 0;
        for (i, v) in polyline.iter().enumerate() {
            let (e, _) = self
                .first_entry_forward(*v, MAX_ITER)
                .ok_or(Error::NotInUplus { index: i })?;
            n = n.max(e);
        }
        // intermediate points may need a few more iterates than the vertices
        'retry: for extra in 0..12 {
            let nn = n + extra;
            let arg_at = |q: Point2| -> Option<f64> {
                let p = self.iterate(q, nn);
                if self.classify(p) != FiltrationRegion::Vplus {
                    return None;
                }
                self.log_phi_plus(p).ok().map(|l| l.im)
            };
            let mut total = 0.0;
            let mut segments = 0usize;
            let len = polyline.len();
            for i in 0..len {
                let a = polyline[i];
                let b = polyline[(i + 1) % len];
                let Some(arg_a) = arg_at(a) else { continue 'retry };
                let Some(arg_b) = arg_at(b) else { continue 'retry };
                // explicit stack of (t0, t1, arg0, arg1)
                let mut stack = vec![(0.0f64, 1.0f64, arg_a, arg_b)];
                while let Some((t0, t1, g0, g1)) = stack.pop() {
                    let d = wrap_pi(g1 - g0);
                    if d.abs() < PI / 2.0 {
                        total += d;
                        segments += 1;
                        if segments > SEGMENT_LIMIT {
                            return Err(Error::SubdivisionLimit { limit: SEGMENT_LIMIT });
                        }
                        continue;
                    }
                    let tm = 0.5 * (t0 + t1);
                    let qm = a + (b - a).scale(C::new(tm, 0.0));
                    let Some(gm) = arg_at(qm) else { continue 'retry };
                    if stack.len() > 64 {
                        return Err(Error::SubdivisionLimit { limit: SEGMENT_LIMIT });
                    }
                    stack.push((tm, t1, gm, g1));
                    stack.push((t0, tm, g0, gm));
                }
            }
            let value = total / TAU / 2f64.powi(nn as i32);
            let scaled = (value * 2f64.powi(nn as i32)).round() as i64;
            let (mut m, mut k) = (scaled, nn as u32);
            while k > 0 && m % 2 == 0 {
                m /= 2;
                k -= 1;
            }
            let distance = (value - m as f64 / 2f64.powi(k as i32)).abs();
            return Ok(DyadicIndex {
                value,
                nearest_dyadic: (m, k),
                distance,
            });
        }
        Err(Error::NotInUplus { index: 0 })
    }

    /// Newton's method for H^k(q) = q from one seed: residual tolerance
    /// 1e-12 (accepted below 1e-11), at most 50 steps, step halving whenever
    /// the residual grows.
    pub fn newton_periodic(&self, seed: Point2, k: usize) -> Result<PeriodicPointRecord> {
        let f = |q: Point2| self.iterate(q, k) - q;
        let mut q = seed;
        let mut fq = f(q);
        let mut res = fq.norm();
        for _ in 0..50 {
            if res < 1e-12 {
                break;
            }
            let mut jac = self.orbit_derivative(q, k);
            jac.0[0][0] -= ONE;
            jac.0[1][1] -= ONE;
            let Some(step) = jac.solve(fq) else { break };
            let mut lambda = 1.0;
            loop {
                let cand = q - step.scale(C::new(lambda, 0.0));
                let fc = f(cand);
                if fc.norm() < res || lambda < 1e-3 {
                    q = cand;
                    fq = fc;
                    res = fc.norm();
                    break;
                }
                lambda *= 0.5;
            }
            if !res.is_finite() {
                break;
            }
        }
        if !(res < 1e-11) {
            return Err(Error::NoConvergence { residual: res });
        }
        let (eigen_small, eigen_large) = self.orbit_eigenvalues(q, k);
        Ok(PeriodicPointRecord {
            point: q,
            period: k,
            eigen_small,
            eigen_large,
            residual: res,
        })
    }

    /// Newton from a seed valid at a = 0, continued in the Jacobian through
    /// a * m / steps.
    pub fn continue_periodic(&self, seed: Point2, k: usize, steps: usize) -> Result<PeriodicPointRecord> {
        let mut q = seed;
        let mut last = None;
        for m in 1..=steps {
            let h = HenonParams::new(self.c, self.a * (m as f64 / steps as f64));
            let rec = h.newton_periodic(q, k)?;
            q = rec.point;
            last = Some(rec);
        }
        let rec = last.ok_or(Error::InvalidInput("zero continuation steps".into()))?;
        Ok(rec)
    }

    /// Degenerate (a = 0) seeds (x_i, x_{i-1}) from the period-k points of p.
    pub fn degenerate_seeds(&self, k: usize) -> Vec<Point2> {
        let p = self.poly();
        p.periodic_points(k)
            .into_iter()
            .map(|x| Point2::new(x, p.iterate(x, k - 1)))
            .collect()
    }

    /// Periodic points of period dividing k, from the given seeds or the
    /// degenerate ones, deduplicated at distance 1e-6.
    pub fn periodic_points(&self, k: usize, seeds: Option<&[Point2]>) -> Result<PeriodicSearch> {
        self.require_invertible()?;
        let owned;
        let seeds = match seeds {
            Some(s) => s,
            None => {
                owned = self.degenerate_seeds(k);
                &owned
            }
        };
        let mut out = PeriodicSearch::default();
        for &s in seeds {
            match self.continue_periodic(s, k, 4) {
                Ok(rec) => {
                    if out.records.iter().all(|r| (r.point - rec.point).norm() > 1e-6) {
                        out.records.push(rec);
                    }
                }
                Err(e) => out.failures.push((s, e)),
            }
        }
        Ok(out)
    }
}

pub fn wrap_pi(d: f64) -> f64 {
    let mut d = d % TAU;
    if d > PI {
        d -= TAU;
    } else if d <= -PI {
        d += TAU;
    }
    d
}
