//! The cocycle of the lifted map (xi, z) -> (xi^2, alpha(xi) z + beta(xi)).
//!
//! In the standard trivialization (c0 -> 0, c_{-1} -> 1 on every leaf)
//!   alpha(xi) = -beta(xi) = (H c0(xi) - c0(xi^2)) / (c0(xi^2) - H^-1 c0(xi^4)),
//! an affine ratio of three points of the leaf of xi^2. On the unit circle
//! alpha is the limit of its values on the circles |xi| = exp(t_m), taken by
//! Aitken extrapolation over the radius schedule of [`LocusSettings`].

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::angle::{Angle, AngleKey, LeafLabel};
use crate::critical_locus::{
    c0_track, ratio_of_pairs, solve_c0_tracked, AffineRatioResult, LeafFrame, LeafPair, LocusSettings,
    RatioOptions, TangencyPoint,
};
use crate::error::{Error, Result};
use crate::extrapolate::LimitTracker;
use crate::henon_core::{HenonParams, Point2};
use crate::polynomial_dynamics::BoettcherContext;

type C = Complex64;

/// First schedule level stored in a track; alpha at level m needs c0(xi^4)
/// at level m - 2.
const FIRST_LEVEL: i32 = -2;

#[derive(Clone, Copy, Debug)]
pub struct AlphaSettings {
    pub locus: LocusSettings,
    /// deepest radius level of the extrapolation
    pub m_max: i32,
    /// trailing extrapolates averaged into the circle value
    pub window: usize,
    /// relative spread below which a circle value counts as converged
    pub tol: f64,
    /// relative Aitken gap that ends the radius sequence early
    pub fast_tol: f64,
    pub ratio: RatioOptions,
    /// largest Carathéodory gap accepted for gamma on the circle
    pub landing_tol: f64,
}

impl Default for AlphaSettings {
    fn default() -> Self {
        AlphaSettings {
            locus: LocusSettings::default(),
            m_max: 36,
            window: 6,
            tol: 1e-4,
            fast_tol: 1e-10,
            ratio: RatioOptions::default(),
            landing_tol: 1e-6,
        }
    }
}

impl AlphaSettings {
    /// Budgets for parameters near a parabolic one (x16 iterations).
    pub fn parabolic() -> Self {
        let mut s = Self::default();
        s.locus.max_iter *= 16;
        s.tol = 1e-3;
        s.landing_tol = 1e-4;
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trivialization {
    Standard,
    /// c_{-1}(xi) -> gamma(xi)^2
    BoettcherSquared,
    CustomGauge,
}

#[derive(Clone, Copy, Debug)]
pub struct AlphaDiagnostics {
    /// radius levels that entered the extrapolation
    pub levels: usize,
    /// relative spread of the final extrapolates (0 off the circle)
    pub gap: f64,
    pub converged: bool,
    /// affine ratio at the deepest level used
    pub ratio: AffineRatioResult,
}

#[derive(Clone, Copy, Debug)]
pub struct CocycleSample {
    pub theta: Angle,
    /// 0 on the unit circle
    pub log_radius: f64,
    pub alpha: C,
    pub beta: C,
    pub trivialization: Trivialization,
    pub diagnostics: AlphaDiagnostics,
}

/// A gauge u: angles -> C*, changing alpha by u(2 theta) / u(theta).
#[derive(Clone)]
pub struct GaugeFunction {
    u: Arc<dyn Fn(&Angle) -> Result<C> + Send + Sync>,
    /// estimate of sup |u'| / inf |u| (informational)
    pub modulus: f64,
}

impl fmt::Debug for GaugeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugeFunction").field("modulus", &self.modulus).finish()
    }
}

impl GaugeFunction {
    pub fn new(u: impl Fn(&Angle) -> Result<C> + Send + Sync + 'static, modulus: f64) -> Self {
        GaugeFunction { u: Arc::new(u), modulus }
    }

    pub fn constant(v: C) -> Self {
        Self::new(move |_| Ok(v), 0.0)
    }

    /// exp of a trigonometric polynomial sum_k c_k e^{2 pi i k theta}.
    pub fn exp_trig(coeffs: Vec<(i32, C)>) -> Self {
        let modulus = coeffs.iter().map(|(k, c)| (*k as f64).abs() * c.norm()).sum::<f64>() * std::f64::consts::TAU;
        Self::new(
            move |t| {
                let s: C = coeffs
                    .iter()
                    .map(|(k, c)| c * C::from_polar(1.0, std::f64::consts::TAU * *k as f64 * t.turns()))
                    .sum();
                Ok(s.exp())
            },
            modulus,
        )
    }

    pub fn eval(&self, theta: &Angle) -> Result<C> {
        let v = (self.u)(theta)?;
        if v.norm() == 0.0 || !v.is_finite() {
            return Err(Error::ZeroGauge { theta: theta.turns() });
        }
        Ok(v)
    }
}

#[derive(Clone, Debug)]
pub struct LyapunovReport {
    pub n_samples: usize,
    pub n_failed: usize,
    pub mean_log_abs_alpha: f64,
    /// log|a| - log 2
    pub target: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct MultiplierReport {
    pub period: usize,
    pub product: C,
    pub point: Point2,
    pub eigen_small: C,
    pub rel_error: f64,
    /// |det DH^k - a^k| / |a^k| at the matched point
    pub det_error: f64,
}

#[derive(Clone, Debug)]
pub struct IdentificationReport {
    pub alpha1: C,
    pub alpha2: C,
    pub rel_diff: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct DegeneracyRow {
    pub a: C,
    pub sup_error: f64,
    pub worst_theta: f64,
    pub n_failed: usize,
}

#[derive(Clone, Debug)]
pub struct WindingReport {
    pub winding: i64,
    /// sum of wrapped argument increments, in turns
    pub raw: f64,
    /// largest single increment, in turns
    pub max_step: f64,
}

/// sup |alpha / a| and inf |alpha(xi) / a - alpha(-xi) / a| over a grid.
#[derive(Clone, Copy, Debug)]
pub struct GridBounds {
    pub sup_ratio: f64,
    pub inf_antipodal: f64,
    pub n_failed: usize,
}

#[derive(Clone, Debug)]
pub struct SemiparabolicReport {
    pub params: HenonParams,
    pub fixed_point: Point2,
    pub mu: C,
    /// |mu * lambda - a| / |a| at the fixed point
    pub pairing_error: f64,
    pub alpha_1: Option<C>,
    pub rel_error: Option<f64>,
    pub converged: bool,
    pub note: String,
}

type Track = Vec<Result<TangencyPoint>>;

/// Evaluates alpha with write-once caches of c0 tracks, landing points and
/// circle values, keyed by exact angle. Shareable between threads.
pub struct CocycleEngine {
    pub h: HenonParams,
    pub settings: AlphaSettings,
    tracks: RwLock<HashMap<AngleKey, Arc<Track>>>,
    landings: RwLock<HashMap<AngleKey, Result<C>>>,
    alphas: RwLock<HashMap<AngleKey, Result<CocycleSample>>>,
    off_circle: RwLock<HashMap<(AngleKey, u64), Result<CocycleSample>>>,
}

fn lookup<V: Clone>(map: &RwLock<HashMap<AngleKey, V>>, key: AngleKey) -> Option<V> {
    map.read().unwrap().get(&key).cloned()
}

fn store<V: Clone>(map: &RwLock<HashMap<AngleKey, V>>, key: AngleKey, v: V) -> V {
    map.write().unwrap().entry(key).or_insert(v).clone()
}

impl CocycleEngine {
    pub fn new(h: HenonParams) -> Self {
        Self::with_settings(h, AlphaSettings::default())
    }

    pub fn with_settings(h: HenonParams, settings: AlphaSettings) -> Self {
        CocycleEngine {
            h,
            settings,
            tracks: RwLock::new(HashMap::new()),
            landings: RwLock::new(HashMap::new()),
            alphas: RwLock::new(HashMap::new()),
            off_circle: RwLock::new(HashMap::new()),
        }
    }

    pub fn boettcher(&self) -> BoettcherContext {
        self.h.boettcher()
    }

    /// c0 along the ray of theta at levels FIRST_LEVEL..=m_max.
    pub fn track(&self, theta: &Angle) -> Arc<Track> {
        if let Some(t) = lookup(&self.tracks, theta.key()) {
            return t;
        }
        let t = Arc::new(c0_track(&self.h, theta, FIRST_LEVEL, self.settings.m_max, &self.settings.locus));
        store(&self.tracks, theta.key(), t)
    }

    /// Solve the tracks needed for alpha at all `angles`, in parallel.
    pub fn prefetch(&self, angles: &[Angle]) {
        let mut need: HashMap<AngleKey, Angle> = HashMap::new();
        {
            let cached = self.tracks.read().unwrap();
            for t in angles {
                for a in [*t, t.double(), t.double_n(2)] {
                    if !cached.contains_key(&a.key()) {
                        need.insert(a.key(), a);
                    }
                }
            }
        }
        let need: Vec<Angle> = need.into_values().collect();
        need.par_iter().for_each(|a| {
            self.track(a);
        });
    }

    fn point(track: &Track, m: i32) -> Result<Point2> {
        let i = (m - FIRST_LEVEL) as usize;
        match track.get(i) {
            Some(Ok(p)) => Ok(p.q),
            Some(Err(e)) => Err(e.clone()),
            None => Err(Error::InvalidInput(format!("level {m} outside the radius schedule"))),
        }
    }

    /// The leaf frame of (theta, t_m): c0 at t_m and c0(xi^2) at 2 t_m.
    pub fn frame_level(&self, theta: &Angle, m: i32) -> Result<LeafFrame> {
        let t1 = self.track(theta);
        let t2 = self.track(&theta.double());
        let label = LeafLabel::new(*theta, self.settings.locus.log_radius(m));
        Ok(LeafFrame::new(Self::point(&t1, m)?, Self::point(&t2, m - 1)?, label))
    }

    /// alpha on the circle |xi| = exp(t_m).
    pub fn alpha_level(&self, theta: &Angle, m: i32) -> Result<AffineRatioResult> {
        let t1 = self.track(theta);
        let t2 = self.track(&theta.double());
        let t4 = self.track(&theta.double_n(2));
        let (p1, p2, p4) = (Self::point(&t1, m)?, Self::point(&t2, m - 1)?, Self::point(&t4, m - 2)?);
        self.ratio(p1, p2, p4)
    }

    fn ratio(&self, c0: Point2, c0_sq: Point2, c0_4: Point2) -> Result<AffineRatioResult> {
        let h = &self.h;
        // one iterate ahead: H c_{-1}(xi^2) = c0(xi^4)
        let ab = LeafPair::new(h.apply(c0), c0_sq).advance(h);
        let bc = LeafPair::new(h.apply(c0_sq), c0_4);
        ratio_of_pairs(h, ab, bc, &self.settings.ratio)
    }

    fn checked(&self, alpha: C) -> Result<C> {
        if !(alpha.norm() > 1e-14 * self.h.a.norm()) || !alpha.is_finite() {
            return Err(Error::PrecisionLoss {
                max_iter: self.settings.locus.max_iter,
            });
        }
        Ok(alpha)
    }

    /// alpha in the standard trivialization on the unit circle.
    pub fn alpha_std(&self, theta: &Angle) -> Result<CocycleSample> {
        if let Some(s) = lookup(&self.alphas, theta.key()) {
            return s;
        }
        let s = self.alpha_std_uncached(theta);
        store(&self.alphas, theta.key(), s)
    }

    fn alpha_std_uncached(&self, theta: &Angle) -> Result<CocycleSample> {
        let st = &self.settings;
        let mut tracker = LimitTracker::new();
        let mut extrapolates = Vec::new();
        let mut last_ratio = None;
        let mut first_error = None;
        let mut quiet = 0;
        for m in 0..=st.m_max {
            let r = match self.alpha_level(theta, m) {
                Ok(r) => r,
                Err(e) => {
                    first_error = Some(e);
                    break;
                }
            };
            last_ratio = Some(r);
            extrapolates.push(tracker.push(&[r.value])[0]);
            quiet = if tracker.relative_gap() < st.fast_tol { quiet + 1 } else { 0 };
            if quiet >= 2 {
                break;
            }
        }
        let Some(ratio) = last_ratio else {
            return Err(first_error.unwrap_or(Error::InvalidInput("empty radius schedule".into())));
        };
        let (alpha, gap) = if quiet >= 2 {
            (tracker.best().unwrap()[0], tracker.relative_gap())
        } else {
            let w = st.window.min(extrapolates.len()).max(1);
            let tail = &extrapolates[extrapolates.len() - w..];
            let mean = tail.iter().sum::<C>() / w as f64;
            let spread = tail.iter().map(|e| (e - mean).norm()).fold(0.0, f64::max) / mean.norm();
            (mean, spread)
        };
        let alpha = self.checked(alpha)?;
        Ok(CocycleSample {
            theta: *theta,
            log_radius: 0.0,
            alpha,
            beta: -alpha,
            trivialization: Trivialization::Standard,
            diagnostics: AlphaDiagnostics {
                levels: extrapolates.len(),
                gap,
                converged: gap < st.tol && extrapolates.len() >= st.window + 2,
                ratio,
            },
        })
    }

    /// alpha_std at any label: on the circle, or off it through c0 at the
    /// radii t, 2t, 4t.
    pub fn alpha_at(&self, label: &LeafLabel) -> Result<CocycleSample> {
        if label.log_radius == 0.0 {
            return self.alpha_std(&label.angle);
        }
        let key = (label.angle.key(), label.log_radius.to_bits());
        if let Some(s) = self.off_circle.read().unwrap().get(&key) {
            return s.clone();
        }
        let s = self.alpha_off_circle(label);
        self.off_circle.write().unwrap().entry(key).or_insert(s).clone()
    }

    fn alpha_off_circle(&self, label: &LeafLabel) -> Result<CocycleSample> {
        let s = &self.settings.locus;
        let c1 = solve_c0_tracked(&self.h, label, s)?.q;
        let c2 = solve_c0_tracked(&self.h, &label.square(), s)?.q;
        let c4 = solve_c0_tracked(&self.h, &label.power_of_two(2), s)?.q;
        let ratio = self.ratio(c1, c2, c4)?;
        let alpha = self.checked(ratio.value)?;
        Ok(CocycleSample {
            theta: label.angle,
            log_radius: label.log_radius,
            alpha,
            beta: -alpha,
            trivialization: Trivialization::Standard,
            diagnostics: AlphaDiagnostics {
                levels: 1,
                gap: 0.0,
                converged: ratio.converged,
                ratio,
            },
        })
    }

    /// alpha_std at many angles (tracks solved in parallel first).
    pub fn alpha_many(&self, angles: &[Angle]) -> Vec<Result<CocycleSample>> {
        self.prefetch(angles);
        angles.par_iter().map(|t| self.alpha_std(t)).collect()
    }

    /// gamma(e^{2 pi i theta}) from the Carathéodory extension.
    pub fn gamma(&self, theta: &Angle) -> Result<C> {
        if let Some(g) = lookup(&self.landings, theta.key()) {
            return g;
        }
        let g = self.boettcher().caratheodory(theta).and_then(|lp| {
            if !lp.converged && lp.gap > self.settings.landing_tol {
                Err(Error::SlowConvergence {
                    gap: lp.gap,
                    steps: lp.steps,
                })
            } else {
                Ok(lp.value)
            }
        });
        store(&self.landings, theta.key(), g)
    }

    /// alpha after the gauge change c_{-1}(xi) -> u(xi) (c0 stays at 0):
    /// alpha_u = alpha u(xi^2)/u(xi), beta_u = u(xi^2) beta.
    pub fn alpha_gauge(&self, theta: &Angle, u: &GaugeFunction) -> Result<CocycleSample> {
        let u1 = u.eval(theta)?;
        let u2 = u.eval(&theta.double())?;
        let s = self.alpha_std(theta)?;
        Ok(Self::regauge(s, u1, u2, Trivialization::CustomGauge))
    }

    fn regauge(s: CocycleSample, u1: C, u2: C, tag: Trivialization) -> CocycleSample {
        CocycleSample {
            alpha: s.alpha * u2 / u1,
            beta: s.beta * u2,
            trivialization: tag,
            ..s
        }
    }

    /// The normalized trivialization u = gamma^2, in which alpha / a tends
    /// to 1 / (2 gamma(xi)) as a -> 0.
    pub fn alpha_normalized(&self, theta: &Angle) -> Result<CocycleSample> {
        let g1 = self.gamma(theta)?;
        let g2 = self.gamma(&theta.double())?;
        if g1.norm() == 0.0 || g2.norm() == 0.0 {
            return Err(Error::ZeroGauge { theta: theta.turns() });
        }
        let s = self.alpha_std(theta)?;
        Ok(Self::regauge(s, g1 * g1, g2 * g2, Trivialization::BoettcherSquared))
    }

    fn alpha_in(&self, theta: &Angle, triv: Trivialization, gauge: Option<&GaugeFunction>) -> Result<CocycleSample> {
        match (triv, gauge) {
            (Trivialization::Standard, _) => self.alpha_std(theta),
            (Trivialization::BoettcherSquared, _) => self.alpha_normalized(theta),
            (Trivialization::CustomGauge, Some(u)) => self.alpha_gauge(theta, u),
            (Trivialization::CustomGauge, None) => Err(Error::InvalidInput("custom trivialization needs a gauge".into())),
        }
    }

    /// Product of alpha along the doubling cycle of theta, optionally in a
    /// gauge.
    pub fn periodic_product(&self, theta: &Angle, gauge: Option<&GaugeFunction>) -> Result<(usize, C)> {
        let k = match theta.as_rational() {
            Some((_, den)) if den % 2 == 1 => theta.doubling_period(64),
            _ => None,
        }
        .ok_or(Error::NotPeriodic { period: 0 })?;
        let triv = if gauge.is_some() {
            Trivialization::CustomGauge
        } else {
            Trivialization::Standard
        };
        let mut prod = C::new(1.0, 0.0);
        let mut t = *theta;
        for _ in 0..k {
            prod *= self.alpha_in(&t, triv, gauge)?.alpha;
            t = t.double();
        }
        Ok((k, prod))
    }

    /// The periodic point of H matched to the doubling cycle of theta:
    /// continued in a from (gamma(theta), gamma(2^{k-1} theta)).
    pub fn matched_periodic_point(&self, theta: &Angle, k: usize) -> Result<(Point2, C, C)> {
        let seed = Point2::new(self.gamma(theta)?, self.gamma(&theta.double_n(k as u32 - 1))?);
        let rec = self.h.continue_periodic(seed, k, 8)?;
        let distance = (rec.point - seed).norm();
        if distance > 0.5 {
            return Err(Error::MatchFailure {
                reason: format!("continued point at distance {distance:.3} from the seed"),
            });
        }
        // any other periodic point this close makes the match ambiguous
        let others = self.h.periodic_points(k, None)?;
        let close = others
            .records
            .iter()
            .filter(|r| (r.point - seed).norm() < 0.5 && (r.point - rec.point).norm() > 1e-6)
            .count();
        if close > 0 {
            return Err(Error::MatchFailure {
                reason: format!("{close} further periodic point(s) within 0.5 of the seed"),
            });
        }
        Ok((rec.point, rec.eigen_small, rec.eigen_large))
    }

    /// Compare the periodic product of alpha with the small eigenvalue of
    /// DH^k at the matched periodic point.
    pub fn check_multiplier(&self, theta: &Angle) -> Result<MultiplierReport> {
        let (k, product) = self.periodic_product(theta, None)?;
        let (point, eigen_small, _) = self.matched_periodic_point(theta, k)?;
        let ak = self.h.a.powi(k as i32);
        let det = self.h.orbit_derivative(point, k).det();
        Ok(MultiplierReport {
            period: k,
            product,
            point,
            eigen_small,
            rel_error: (product - eigen_small).norm() / eigen_small.norm(),
            det_error: (det - ak).norm() / ak.norm(),
        })
    }

    /// Uniform grid of n angles j / n (n a power of two).
    pub fn grid(n: usize) -> Result<Vec<Angle>> {
        if !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!("grid size {n} is not a power of two")));
        }
        let k = n.trailing_zeros();
        Ok((0..n).map(|j| Angle::dyadic(j as i64, k)).collect())
    }

    /// Grid mean of log|alpha| against log|a| - log 2. Up to 1% of the
    /// angles may fail; they are excluded and counted.
    pub fn lyapunov_integral(&self, n_samples: usize, gauge: Option<&GaugeFunction>) -> Result<LyapunovReport> {
        if n_samples < 256 || !n_samples.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "n_samples = {n_samples}: need a power of two >= 256"
            )));
        }
        let grid = Self::grid(n_samples)?;
        self.prefetch(&grid);
        let values: Vec<Result<C>> = grid
            .par_iter()
            .map(|t| match gauge {
                Some(u) => self.alpha_gauge(t, u).map(|s| s.alpha),
                None => self.alpha_std(t).map(|s| s.alpha),
            })
            .collect();
        let mut sum = 0.0;
        let mut ok = 0usize;
        let mut first_err = None;
        for v in values {
            match v {
                Ok(a) => {
                    sum += a.norm().ln();
                    ok += 1;
                }
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        let n_failed = n_samples - ok;
        if n_failed * 100 > n_samples {
            return Err(first_err.expect("failures were recorded"));
        }
        let mean = sum / ok as f64;
        let target = self.h.a.norm().ln() - 2f64.ln();
        Ok(LyapunovReport {
            n_samples,
            n_failed,
            mean_log_abs_alpha: mean,
            target,
            gap: (mean - target).abs(),
        })
    }

    /// Grid mean of log|alpha| on the circle |xi| = exp(t_m) plus 3 t_m:
    /// log|alpha| is harmonic outside the disk with a pole of order 3 at
    /// infinity, so this equals the circle mean for every m.
    pub fn harmonic_mean_level(&self, n_samples: usize, m: i32) -> Result<f64> {
        let grid = Self::grid(n_samples)?;
        self.prefetch(&grid);
        let logs: Vec<Result<f64>> = grid
            .par_iter()
            .map(|t| self.alpha_level(t, m).map(|r| r.value.norm().ln()))
            .collect();
        let mut sum = 0.0;
        for l in logs {
            sum += l?;
        }
        Ok(sum / n_samples as f64 + 3.0 * self.settings.locus.log_radius(m))
    }

    /// The a -> 0 limit of alpha / a: gamma(xi) / (2 gamma(xi^2)^2).
    pub fn limit_ratio(&self, theta: &Angle) -> Result<C> {
        let g1 = self.gamma(theta)?;
        let g2 = self.gamma(&theta.double())?;
        Ok(g1 / (2.0 * g2 * g2))
    }

    /// sup over the grid of |alpha / a - gamma(xi) / (2 gamma(xi^2)^2)|.
    pub fn degeneracy_sup(&self, n_grid: usize) -> Result<DegeneracyRow> {
        let grid = Self::grid(n_grid)?;
        let values = self.alpha_many(&grid);
        let mut row = DegeneracyRow {
            a: self.h.a,
            sup_error: 0.0,
            worst_theta: 0.0,
            n_failed: 0,
        };
        for (t, v) in grid.iter().zip(values) {
            match v {
                Ok(s) => {
                    let e = (s.alpha / self.h.a - self.limit_ratio(t)?).norm();
                    if e > row.sup_error {
                        row.sup_error = e;
                        row.worst_theta = t.turns();
                    }
                }
                Err(_) => row.n_failed += 1,
            }
        }
        if row.n_failed > 0 {
            row.sup_error = f64::INFINITY;
        }
        Ok(row)
    }

    /// alpha(theta1) against alpha(theta2) for co-landing rays.
    pub fn identification_check(&self, t1: &Angle, t2: &Angle) -> Result<IdentificationReport> {
        let g1 = self.gamma(t1)?;
        let g2 = self.gamma(t2)?;
        let tol = 1e-6;
        if t1.key() != t2.key() && !((g1 - g2).norm() < tol) {
            return Err(Error::NotIdentified { gap: (g1 - g2).norm() });
        }
        let a1 = self.alpha_std(t1)?.alpha;
        let a2 = self.alpha_std(t2)?.alpha;
        let rel_diff = (a1 - a2).norm() / a1.norm().max(a2.norm());
        Ok(IdentificationReport {
            alpha1: a1,
            alpha2: a2,
            rel_diff,
            pass: rel_diff < 1e-5,
        })
    }

    /// Winding number of theta -> alpha(theta) over the n-grid.
    pub fn winding(&self, n: usize, triv: Trivialization, gauge: Option<&GaugeFunction>) -> Result<WindingReport> {
        let grid = Self::grid(n)?;
        self.prefetch(&grid);
        let values: Vec<Result<C>> = grid
            .par_iter()
            .map(|t| self.alpha_in(t, triv, gauge).map(|s| s.alpha))
            .collect();
        let values = values.into_iter().collect::<Result<Vec<C>>>()?;
        Ok(winding_of(&values))
    }

    /// sup |alpha/a| and inf |alpha(xi)/a - alpha(-xi)/a| over the n-grid.
    pub fn grid_bounds(&self, n: usize) -> Result<GridBounds> {
        let grid = Self::grid(n)?;
        let values = self.alpha_many(&grid);
        let a = self.h.a;
        let mut b = GridBounds {
            sup_ratio: 0.0,
            inf_antipodal: f64::INFINITY,
            n_failed: 0,
        };
        for i in 0..n {
            match (&values[i], &values[(i + n / 2) % n]) {
                (Ok(s), Ok(t)) => {
                    b.sup_ratio = b.sup_ratio.max((s.alpha / a).norm());
                    b.inf_antipodal = b.inf_antipodal.min(((s.alpha - t.alpha) / a).norm());
                }
                (Err(_), _) => b.n_failed += 1,
                _ => {}
            }
        }
        Ok(b)
    }
}

/// Winding number of a closed sampled curve around 0 (samples in order,
/// the last joined back to the first).
pub fn winding_of(values: &[C]) -> WindingReport {
    let n = values.len();
    let mut raw = 0.0;
    let mut max_step: f64 = 0.0;
    for i in 0..n {
        let d = (values[(i + 1) % n] / values[i]).arg() / std::f64::consts::TAU;
        raw += d;
        max_step = max_step.max(d.abs());
    }
    WindingReport {
        winding: raw.round() as i64,
        raw,
        max_step,
    }
}

/// Parameters on the curve P_lambda, where H has a fixed point with
/// eigenvalues lambda and a / lambda.
pub fn p_lambda_params(lambda: C, a: C) -> HenonParams {
    let s = lambda / 2.0 + a / (2.0 * lambda);
    HenonParams::new((1.0 + a) * s - s * s, a)
}

/// The fixed point x = y = lambda/2 + a/(2 lambda) of p_lambda_params.
pub fn semiparabolic_fixed_point(lambda: C, a: C) -> Point2 {
    let x = lambda / 2.0 + a / (2.0 * lambda);
    Point2::new(x, x)
}

/// alpha(1) against the stable multiplier mu = a / lambda of the
/// semi-parabolic fixed point. Best effort: slow landing is reported in the
/// note and flag, never as a panic.
pub fn semiparabolic_alpha_check(lambda: C, a: C) -> Result<SemiparabolicReport> {
    if a.norm() == 0.0 {
        return Err(Error::ZeroJacobian);
    }
    if (lambda.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("lambda must lie on the unit circle".into()));
    }
    let h = p_lambda_params(lambda, a);
    let q = semiparabolic_fixed_point(lambda, a);
    let (e1, e2) = h.derivative(q).eigenvalues();
    let (mu, other) = if e1.norm() < e2.norm() { (e1, e2) } else { (e2, e1) };
    let pairing_error = (mu * other - a).norm() / a.norm();
    let engine = CocycleEngine::with_settings(h, AlphaSettings::parabolic());
    let (alpha_1, rel_error, converged, note) = match engine.alpha_std(&Angle::ZERO) {
        Ok(s) => {
            let rel = (s.alpha - mu).norm() / mu.norm();
            let note = if s.diagnostics.converged {
                "converged".to_string()
            } else {
                format!("radius extrapolation spread {:.2e}", s.diagnostics.gap)
            };
            (Some(s.alpha), Some(rel), s.diagnostics.converged, note)
        }
        Err(e) => (None, None, false, e.to_string()),
    };
    Ok(SemiparabolicReport {
        params: h,
        fixed_point: q,
        mu,
        pairing_error,
        alpha_1,
        rel_error,
        converged,
        note,
    })
}

/// sup error table of alpha / a against the a -> 0 limit, one row per a.
pub fn degeneracy_error(c: C, a_list: &[C], n_grid: usize, settings: &AlphaSettings) -> Result<Vec<DegeneracyRow>> {
    a_list
        .iter()
        .map(|a| CocycleEngine::with_settings(HenonParams::new(c, *a), *settings).degeneracy_sup(n_grid))
        .collect()
}

/// A source of cocycle values on labels |xi| >= 1, in the standard
/// trivialization (beta = -alpha) unless `beta` is overridden.
pub trait Cocycle: Sync {
    fn alpha(&self, xi: &LeafLabel) -> Result<C>;
    fn beta(&self, xi: &LeafLabel) -> Result<C> {
        Ok(-self.alpha(xi)?)
    }
    fn jacobian(&self) -> C;
    /// gamma on the unit circle
    fn landing(&self, theta: &Angle) -> Result<C>;
    fn boettcher(&self) -> BoettcherContext;
    /// Hint that alpha will be needed at these circle angles.
    fn prefetch(&self, _angles: &[Angle]) {}
}

impl Cocycle for CocycleEngine {
    fn alpha(&self, xi: &LeafLabel) -> Result<C> {
        Ok(self.alpha_at(xi)?.alpha)
    }
    fn jacobian(&self) -> C {
        self.h.a
    }
    fn landing(&self, theta: &Angle) -> Result<C> {
        self.gamma(theta)
    }
    fn boettcher(&self) -> BoettcherContext {
        self.h.boettcher()
    }
    fn prefetch(&self, angles: &[Angle]) {
        CocycleEngine::prefetch(self, angles)
    }
}

/// The a -> 0 model alpha(xi) = a gamma(xi) / (2 gamma(xi^2)^2); for c = 0
/// this is a / (2 xi^3).
#[derive(Clone, Copy, Debug)]
pub struct LimitCocycle {
    pub ctx: BoettcherContext,
    pub a: C,
}

impl LimitCocycle {
    pub fn new(c: C, a: C) -> Self {
        LimitCocycle {
            ctx: BoettcherContext::new(c),
            a,
        }
    }

    fn gamma(&self, xi: &LeafLabel) -> Result<C> {
        if self.ctx.c() == C::new(0.0, 0.0) {
            return Ok(xi.value());
        }
        self.ctx.gamma(xi)
    }
}

impl Cocycle for LimitCocycle {
    fn alpha(&self, xi: &LeafLabel) -> Result<C> {
        let g1 = self.gamma(xi)?;
        let g2 = self.gamma(&xi.square())?;
        Ok(self.a * g1 / (2.0 * g2 * g2))
    }
    fn jacobian(&self) -> C {
        self.a
    }
    fn landing(&self, theta: &Angle) -> Result<C> {
        self.gamma(&LeafLabel::on_circle(*theta))
    }
    fn boettcher(&self) -> BoettcherContext {
        self.ctx
    }
}
