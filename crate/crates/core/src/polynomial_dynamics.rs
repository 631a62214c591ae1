//! One-dimensional dynamics of p(z) = z^2 + c: escape, Boettcher map,
//! external-ray pullback and the boundary (Caratheodory) loop.

use crate::angle::{Angle, LeafLabel};
use crate::error::{Error, Result};
use crate::extrapolate::LimitTracker;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// p(z) = z^2 + c.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticPoly {
    pub c: Complex64,
}

impl QuadraticPoly {
    pub fn new(c: Complex64) -> Self {
        QuadraticPoly { c }
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        z * z + self.c
    }

    pub fn iterate(&self, z: Complex64, n: usize) -> Complex64 {
        (0..n).fold(z, |z, _| self.eval(z))
    }

    /// Fixed points (1 +- sqrt(1 - 4c)) / 2.
    pub fn fixed_points(&self) -> [Complex64; 2] {
        let s = (Complex64::new(1.0, 0.0) - 4.0 * self.c).sqrt();
        [(1.0 + s) / 2.0, (1.0 - s) / 2.0]
    }

    /// Points of exact period k, found as roots of p^k(x) - x and polished by
    /// Newton on the iterate. Each cycle appears k times (once per point).
    pub fn periodic_points(&self, k: usize) -> Vec<Complex64> {
        assert!((1..=8).contains(&k), "period out of supported range");
        let mut coeffs = vec![self.c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        for _ in 1..k {
            coeffs = poly_square(&coeffs);
            coeffs[0] += self.c;
        }
        coeffs[1] -= 1.0;
        let roots = durand_kerner(&coeffs, 2000, 1e-14);
        let mut out: Vec<Complex64> = Vec::new();
        for r in roots {
            let r = self.polish_periodic(r, k);
            let exact = (1..k).filter(|j| k % j == 0).all(|j| (self.iterate(r, j) - r).norm() > 1e-7);
            if exact && out.iter().all(|q| (q - r).norm() > 1e-8) {
                out.push(r);
            }
        }
        out
    }

    fn polish_periodic(&self, mut x: Complex64, k: usize) -> Complex64 {
        for _ in 0..50 {
            let mut z = x;
            let mut d = Complex64::new(1.0, 0.0);
            for _ in 0..k {
                d *= 2.0 * z;
                z = self.eval(z);
            }
            let f = z - x;
            let df = d - 1.0;
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            x -= step;
            if step.norm() < 1e-16 * (1.0 + x.norm()) {
                break;
            }
        }
        x
    }
}

fn poly_square(a: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * a.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in a.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Simultaneous (Weierstrass) root iteration for a monic-leading polynomial
/// given by ascending coefficients.
fn durand_kerner(coeffs: &[Complex64], max_iter: usize, tol: f64) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let eval = |z: Complex64| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c) / lead;
    let bound = 1.0 + coeffs[..n].iter().map(|c| (c / lead).norm()).fold(0.0, f64::max);
    let radius = bound.min(3.0);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n)
        .map(|i| radius * seed.powu(i as u32) / seed.norm().powi(i as i32) * (1.0 + 0.01 * i as f64 / n as f64))
        .collect();
    for _ in 0..max_iter {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            worst = worst.max(step.norm());
        }
        if worst < tol {
            break;
        }
    }
    z
}

/// Parameters of the Boettcher computations for one polynomial.
#[derive(Clone, Copy, Debug)]
pub struct BoettcherContext {
    pub poly: QuadraticPoly,
    /// |z| above this escapes monotonically.
    pub escape_radius: f64,
    /// telescoping products are truncated once |z_n| exceeds this.
    pub big_radius: f64,
    pub max_iter: usize,
    /// Cauchy tolerance of the boundary-loop limit.
    pub tol: f64,
    /// first radius of the boundary-loop schedule is 1 + eps0.
    pub eps0: f64,
    /// number of radius steps before reporting slow convergence.
    pub radius_steps: usize,
}

/// Value of the boundary loop with convergence metadata.
#[derive(Clone, Copy, Debug)]
pub struct LandingPoint {
    pub value: Complex64,
    pub gap: f64,
    pub steps: usize,
    pub converged: bool,
}

impl BoettcherContext {
    pub fn new(c: Complex64) -> Self {
        BoettcherContext {
            poly: QuadraticPoly::new(c),
            escape_radius: 2f64.max(c.norm()) + 1.0,
            big_radius: 1e8,
            max_iter: 10_000,
            tol: 1e-10,
            eps0: 1e-2,
            radius_steps: 40,
        }
    }

    /// Enlarged budgets for parabolic parameters, where landing is slow.
    pub fn parabolic(c: Complex64) -> Self {
        let mut ctx = Self::new(c);
        ctx.max_iter *= 16;
        ctx.radius_steps *= 16;
        ctx.tol = 1e-8;
        ctx
    }

    pub fn c(&self) -> Complex64 {
        self.poly.c
    }

    /// Smallest n <= max_iter with |p^n(z)| > escape_radius.
    pub fn escape_time(&self, z: Complex64) -> Option<usize> {
        let mut z = z;
        for n in 0..=self.max_iter {
            if z.norm() > self.escape_radius {
                return Some(n);
            }
            z = self.poly.eval(z);
        }
        None
    }

    /// log phi(z) for |z| > escape_radius, where every telescoping factor is
    /// close to 1 and the principal branch is continuous.
    fn log_phi_outside(&self, z: Complex64) -> Complex64 {
        let c = self.c();
        let mut acc = z.ln();
        let mut z = z;
        let mut w = 0.5;
        while z.norm() <= self.big_radius && w > 1e-300 {
            acc += w * (1.0 + c / (z * z)).ln();
            z = self.poly.eval(z);
            w *= 0.5;
        }
        acc
    }

    /// log phi(z) for escaping z, with the branch continued from infinity.
    /// The imaginary part is only meaningful mod 2 pi.
    pub fn log_boettcher(&self, z: Complex64) -> Result<Complex64> {
        let n0 = self.escape_time(z).ok_or(Error::NonEscaping {
            max_iter: self.max_iter,
        })?;
        let mut orbit = Vec::with_capacity(n0 + 1);
        let mut zz = z;
        for _ in 0..n0 {
            orbit.push(zz);
            zz = self.poly.eval(zz);
        }
        let mut log_phi = self.log_phi_outside(zz);
        // pull back: phi(z_k) is one of the two square roots of phi(z_{k+1});
        // the right one is the root whose ray point is z_k rather than -z_k.
        for (level, &zk) in orbit.iter().enumerate().rev() {
            let cand = log_phi / 2.0;
            let label = LeafLabel::new(Angle::from_turns(cand.im / TAU), cand.re);
            let g = self.boettcher_inverse_label(&label)?;
            let d_keep = (g - zk).norm();
            let d_flip = (g + zk).norm();
            if (d_keep - d_flip).abs() < 1e-6 * (d_keep + d_flip) {
                return Err(Error::BranchFailure { level });
            }
            log_phi = if d_keep < d_flip {
                cand
            } else {
                cand + Complex64::new(0.0, PI)
            };
        }
        Ok(log_phi)
    }

    /// The Boettcher isomorphism phi_p(z) for z outside K_p.
    pub fn boettcher_phi(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.log_boettcher(z)?.exp())
    }

    /// Number of squarings after which a point of log-modulus `eps` is
    /// beyond the truncation radius.
    fn levels_for(&self, eps: f64) -> Result<usize> {
        let target = self.big_radius.ln();
        let mut n = 0;
        let mut e = eps;
        while e <= target {
            e *= 2.0;
            n += 1;
            if n > 1020 || e == 0.0 {
                return Err(Error::PrecisionLoss { max_iter: 1020 });
            }
        }
        Ok(n)
    }

    /// Ray pullback at log-radius `eps`: returns gamma(xi^(2^k)) for k = 0..=N,
    /// choosing square-root branches nearest to `refs` (same angles, larger
    /// radius) or to the asymptotic expansion where no reference exists.
    fn chain(&self, eps: f64, units: &[Complex64], refs: Option<&[Complex64]>) -> Result<Vec<Complex64>> {
        let c = self.c();
        let n = self.levels_for(eps)?;
        let top_w = units[n] * (eps * 2f64.powi(n as i32)).exp();
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        out[n] = top_w - c / (2.0 * top_w);
        for k in (0..n).rev() {
            let s = (out[k + 1] - c).sqrt();
            let reference = match refs {
                Some(r) if k < r.len() => r[k],
                _ => {
                    let w = units[k] * (eps * 2f64.powi(k as i32)).exp();
                    w - c / (2.0 * w)
                }
            };
            out[k] = if (s - reference).norm() <= (s + reference).norm() { s } else { -s };
        }
        Ok(out)
    }

    /// log-radius above which gamma is close enough to the identity to pick
    /// branches without a reference chain.
    fn asymptotic_eps(&self) -> f64 {
        (4.0 + 2.0 * self.c().norm()).ln()
    }

    fn units_for(&self, angle: &Angle, n: usize) -> Vec<Complex64> {
        let mut units = Vec::with_capacity(n + 1);
        let mut a = *angle;
        for _ in 0..=n {
            units.push(a.unit());
            a = a.double();
        }
        units
    }

    /// gamma along one ray at the log-radii eps_start * 2^-m, m = 0..count,
    /// reusing each chain as the branch reference for the next.
    pub fn ray_descent(&self, angle: &Angle, eps_start: f64, count: usize) -> Result<Vec<Complex64>> {
        let eps_min = eps_start * 0.5f64.powi(count as i32 - 1);
        let n_max = self.levels_for(eps_min)?;
        let units = self.units_for(angle, n_max + 1);
        let mut eps = eps_start;
        let mut ups = 0;
        let floor = self.asymptotic_eps();
        while eps < floor {
            eps *= 2.0;
            ups += 1;
        }
        let mut prev: Option<Vec<Complex64>> = None;
        for _ in 0..ups {
            let ch = self.chain(eps, &units, prev.as_deref())?;
            prev = Some(ch);
            eps *= 0.5;
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let ch = self.chain(eps, &units, prev.as_deref())?;
            out.push(ch[0]);
            prev = Some(ch);
            eps *= 0.5;
        }
        Ok(out)
    }

    /// gamma(xi) for a label with |xi| > 1.
    pub fn boettcher_inverse_label(&self, label: &LeafLabel) -> Result<Complex64> {
        if !(label.log_radius > 0.0) {
            return Err(Error::PrecisionLoss { max_iter: 1020 });
        }
        Ok(self.ray_descent(&label.angle, label.log_radius, 1)?[0])
    }

    /// The Boettcher coordinate gamma = phi^{-1} at |w| > 1.
    pub fn boettcher_inverse(&self, w: Complex64) -> Result<Complex64> {
        let eps = w.norm().ln();
        if !(eps > 0.0) {
            return Err(Error::PrecisionLoss { max_iter: 1020 });
        }
        self.boettcher_inverse_label(&LeafLabel::new(Angle::from_turns(w.arg() / TAU), eps))
    }

    /// gamma on the closed exterior: boundary loop for |xi| = 1, ray value
    /// otherwise.
    pub fn gamma(&self, label: &LeafLabel) -> Result<Complex64> {
        if label.log_radius > 0.0 {
            self.boettcher_inverse_label(label)
        } else {
            Ok(self.caratheodory(&label.angle)?.value)
        }
    }

    /// Boundary value gamma(e^{2 pi i theta}) as the radius -> 1 limit with
    /// Aitken extrapolation. Slow convergence is reported in the result.
    pub fn caratheodory(&self, theta: &Angle) -> Result<LandingPoint> {
        if self.c() == Complex64::new(0.0, 0.0) {
            return Ok(LandingPoint {
                value: theta.unit(),
                gap: 0.0,
                steps: 0,
                converged: true,
            });
        }
        let eps_start = self.eps0.ln_1p();
        let values = self.ray_descent(theta, eps_start, self.radius_steps)?;
        let mut tracker = LimitTracker::new();
        for (m, v) in values.iter().enumerate() {
            tracker.push(&[*v]);
            if m >= 4 && tracker.gap() < self.tol {
                return Ok(LandingPoint {
                    value: tracker.best().unwrap()[0],
                    gap: tracker.gap(),
                    steps: m + 1,
                    converged: true,
                });
            }
        }
        Ok(LandingPoint {
            value: tracker.best().unwrap()[0],
            gap: tracker.gap(),
            steps: values.len(),
            converged: false,
        })
    }

    /// inf |gamma| over the circle: grid minimum refined by golden-section
    /// search around the three smallest samples.
    pub fn delta_inf_gamma(&self, n_samples: usize) -> Result<f64> {
        const HARD_GAP: f64 = 1e-6;
        let eval = |t: f64| -> Result<f64> {
            let lp = self.caratheodory(&Angle::from_turns(t))?;
            if !lp.converged && lp.gap > HARD_GAP {
                return Err(Error::SlowConvergence {
                    gap: lp.gap,
                    steps: lp.steps,
                });
            }
            Ok(lp.value.norm())
        };
        let mut samples = Vec::with_capacity(n_samples);
        for i in 0..n_samples {
            let t = i as f64 / n_samples as f64;
            samples.push((eval(t)?, t));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let h = 1.0 / n_samples as f64;
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let mut best = samples[0].0;
        for &(v0, t0) in samples.iter().take(3) {
            best = best.min(v0);
            let (mut lo, mut hi) = (t0 - h, t0 + h);
            let mut x1 = hi - golden * (hi - lo);
            let mut x2 = lo + golden * (hi - lo);
            let mut f1 = eval(x1)?;
            let mut f2 = eval(x2)?;
            for _ in 0..40 {
                if f1 < f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - golden * (hi - lo);
                    f1 = eval(x1)?;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + golden * (hi - lo);
                    f2 = eval(x2)?;
                }
                if hi - lo < 1e-12 {
                    break;
                }
            }
            best = best.min(f1).min(f2);
        }
        Ok(best)
    }

    /// Whether the rays of angles t1, t2 land at the same point.
    pub fn landing_identified(&self, t1: &Angle, t2: &Angle, tol: f64) -> Result<bool> {
        if t1.key() == t2.key() {
            return Ok(true);
        }
        let g1 = self.caratheodory(t1)?;
        let g2 = self.caratheodory(t2)?;
        Ok((g1.value - g2.value).norm() < tol)
    }
}
