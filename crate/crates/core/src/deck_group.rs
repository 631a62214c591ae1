//! The deck group of the trivialized cover of U+: elements
//!   g_{j/2^k}(xi, z) = (omega xi, p_{j,k}(xi) z + q_{j,k}(xi)),  omega = e^{2 pi i j/2^k},
//! determined by the intertwining relation lift o g_{j/2^(k+1)} = g_{j/2^k} o lift
//! with the lift (xi, z) -> (xi^2, alpha(xi) z + beta(xi)).
//!
//! With Pi_s(xi) = prod_{t=s}^{k-1} alpha(xi^(2^t)) (standard trivialization)
//!   p = Pi_0(xi) / Pi_0(omega xi),
//!   q = sum_{s<k} (Pi_s(omega xi) - Pi_s(xi)) / Pi_0(omega xi).
//! Products are carried as (log-modulus, phase) so that small |a| and large k
//! cannot under- or overflow.

use num_complex::Complex64;

use crate::angle::{Angle, LeafLabel};
use crate::cocycle::Cocycle;
use crate::error::{Error, Result};

type C = Complex64;

/// Element g_{j/2^k}, stored reduced: j odd with 0 < j < 2^k, or the
/// identity as j = 1, k = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeckTransform {
    pub j: i64,
    pub k: u32,
    pub omega: C,
}

impl DeckTransform {
    pub fn new(j: i64, k: u32) -> DeckTransform {
        assert!(k <= 62, "denominator too large");
        let mut j = j.rem_euclid(1i64 << k);
        let mut k = k;
        if j == 0 {
            return Self::identity();
        }
        while j % 2 == 0 {
            j /= 2;
            k -= 1;
        }
        DeckTransform {
            j,
            k,
            omega: Angle::dyadic(j, k).unit(),
        }
    }

    pub fn identity() -> DeckTransform {
        DeckTransform {
            j: 1,
            k: 0,
            omega: C::new(1.0, 0.0),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.k == 0
    }

    /// The rotation j/2^k as an exact angle.
    pub fn rotation(&self) -> Angle {
        Angle::dyadic(self.j, self.k)
    }

    /// All non-identity elements with denominator exactly 2^k.
    pub fn level(k: u32) -> Vec<DeckTransform> {
        if k == 0 {
            return Vec::new();
        }
        (1..(1i64 << k)).step_by(2).map(|j| DeckTransform::new(j, k)).collect()
    }
}

/// A nonzero complex number as (log |w|, w / |w|).
#[derive(Clone, Copy, Debug)]
struct LogProduct {
    log_mag: f64,
    phase: C,
}

impl LogProduct {
    const ONE: LogProduct = LogProduct {
        log_mag: 0.0,
        phase: C { re: 1.0, im: 0.0 },
    };

    fn mul(self, w: C) -> LogProduct {
        let n = w.norm();
        LogProduct {
            log_mag: self.log_mag + n.ln(),
            phase: self.phase * (w / n),
        }
    }

    /// self / other as an ordinary complex number.
    fn ratio(self, other: LogProduct) -> C {
        self.phase / other.phase * (self.log_mag - other.log_mag).exp()
    }
}

fn orbit_alphas<A: Cocycle + ?Sized>(src: &A, xi: &LeafLabel, k: u32) -> Result<Vec<C>> {
    let mut out = Vec::with_capacity(k as usize);
    let mut x = *xi;
    for _ in 0..k {
        let a = src.alpha(&x)?;
        if a.norm() == 0.0 || !a.is_finite() {
            return Err(Error::PrecisionLoss { max_iter: 0 });
        }
        out.push(a);
        x = x.square();
    }
    Ok(out)
}

/// Suffix products Pi_s for s = 0..=k (Pi_k = 1).
fn suffix_products(alphas: &[C]) -> Vec<LogProduct> {
    let mut out = vec![LogProduct::ONE; alphas.len() + 1];
    for s in (0..alphas.len()).rev() {
        out[s] = out[s + 1].mul(alphas[s]);
    }
    out
}

/// The lift: (xi, z) -> (xi^2, alpha(xi) z + beta(xi)).
pub fn lift_apply<A: Cocycle + ?Sized>(src: &A, xi: &LeafLabel, z: C) -> Result<(LeafLabel, C)> {
    Ok((xi.square(), src.alpha(xi)? * z + src.beta(xi)?))
}

/// (p_{j,k}(xi), q_{j,k}(xi)) from the product formulas (standard
/// trivialization).
pub fn pq_closed_form<A: Cocycle + ?Sized>(src: &A, g: &DeckTransform, xi: &LeafLabel) -> Result<(C, C)> {
    if g.is_identity() {
        return Ok((C::new(1.0, 0.0), C::new(0.0, 0.0)));
    }
    let eta = xi.rotate_dyadic(g.j, g.k);
    let pi_xi = suffix_products(&orbit_alphas(src, xi, g.k)?);
    let pi_eta = suffix_products(&orbit_alphas(src, &eta, g.k)?);
    let p = pi_xi[0].ratio(pi_eta[0]);
    let mut q = C::new(0.0, 0.0);
    for s in 0..g.k as usize {
        q += pi_eta[s].ratio(pi_eta[0]) - pi_xi[s].ratio(pi_eta[0]);
    }
    Ok((p, q))
}

/// (p, q) by the recursion from g_1 = id:
///   p_k(xi) = p_{k-1}(xi^2) alpha(xi) / alpha(omega xi),
///   q_k(xi) = (p_{k-1}(xi^2) beta(xi) + q_{k-1}(xi^2) - beta(omega xi)) / alpha(omega xi).
pub fn pq_recursive<A: Cocycle + ?Sized>(src: &A, g: &DeckTransform, xi: &LeafLabel) -> Result<(C, C)> {
    let (mut p, mut q) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
    let k = g.k;
    for s in (0..k).rev() {
        let x = xi.power_of_two(s);
        // element j/2^(k-s) acting at xi^(2^s)
        let y = x.rotate_dyadic(g.j, k - s);
        let (ax, ay) = (src.alpha(&x)?, src.alpha(&y)?);
        let (bx, by) = (src.beta(&x)?, src.beta(&y)?);
        q = (p * bx + q - by) / ay;
        p = p * ax / ay;
    }
    Ok((p, q))
}

/// g(xi, z) via the closed form.
pub fn apply<A: Cocycle + ?Sized>(src: &A, g: &DeckTransform, xi: &LeafLabel, z: C) -> Result<(LeafLabel, C)> {
    let (p, q) = pq_closed_form(src, g, xi)?;
    Ok((xi.rotate_dyadic(g.j, g.k), p * z + q))
}

/// Constants of the growth estimates. delta' and delta'' are only verified
/// at the working |a|: they are |a| when the corresponding bound holds on
/// the sample grid and 0 otherwise.
#[derive(Clone, Copy, Debug)]
pub struct GroupConstants {
    /// inf |gamma| on the circle
    pub delta: f64,
    pub delta_prime: f64,
    pub delta_dprime: f64,
    pub a0: f64,
    /// |a| the constants were computed at
    pub a_abs: f64,
    /// measured sup |alpha / a| (bound 2 / delta^2)
    pub sup_ratio: f64,
    /// measured inf |alpha(xi)/a - alpha(-xi)/a| (bound delta / 8)
    pub inf_antipodal: f64,
    pub n_samples: usize,
}

/// (delta^2 / 2) delta^3 / (delta^3 + 64).
pub fn a0_formula(delta: f64) -> f64 {
    let d3 = delta.powi(3);
    delta * delta / 2.0 * d3 / (d3 + 64.0)
}

impl GroupConstants {
    /// Assemble the constants from delta and the measured grid bounds.
    pub fn from_measurements(delta: f64, a_abs: f64, sup_ratio: f64, inf_antipodal: f64, n_samples: usize) -> Self {
        let delta_prime = if sup_ratio < 2.0 / (delta * delta) { a_abs } else { 0.0 };
        let delta_dprime = if inf_antipodal > delta / 8.0 { a_abs } else { 0.0 };
        GroupConstants {
            delta,
            delta_prime,
            delta_dprime,
            a0: delta_prime.min(delta_dprime).min(a0_formula(delta)),
            a_abs,
            sup_ratio,
            inf_antipodal,
            n_samples,
        }
    }

    pub fn sup_bound_holds(&self) -> bool {
        self.sup_ratio < 2.0 / (self.delta * self.delta)
    }

    pub fn antipodal_bound_holds(&self) -> bool {
        self.inf_antipodal > self.delta / 8.0
    }

    /// delta^2 / (2 |a|): the growth factor per level.
    pub fn growth_factor(&self) -> f64 {
        self.delta * self.delta / (2.0 * self.a_abs)
    }

    /// Smallest k >= 1 with (delta^2 / 2|a|)^(k-1) > bound.
    fn first_k_above(&self, bound: f64) -> Option<u32> {
        let r = self.growth_factor();
        let mut v = 1.0;
        for k in 1..=200u32 {
            if v > bound {
                return Some(k);
            }
            v *= r;
            if r <= 1.0 {
                break;
            }
        }
        None
    }

    /// k0(|z|): (delta^2 / 2|a|)^(k0-1) > 32 |z| / delta^3.
    pub fn k0(&self, z_abs: f64) -> Option<u32> {
        self.first_k_above(32.0 * z_abs / self.delta.powi(3))
    }

    /// The level beyond which every element moves z out of the disk of
    /// radius delta^3/32 around z0.
    pub fn k0_neighborhood(&self, z0_abs: f64) -> Option<u32> {
        let d3 = self.delta.powi(3);
        self.first_k_above(64.0 / d3 * (z0_abs + d3 / 32.0))
    }

    /// (delta^3 / 32) (delta^2 / 2|a|)^(k-1) - |z|.
    pub fn growth_rhs(&self, k: u32, z_abs: f64) -> f64 {
        self.delta.powi(3) / 32.0 * self.growth_factor().powi(k as i32 - 1) - z_abs
    }

    pub fn premise_met(&self) -> bool {
        self.a_abs <= self.a0 && self.a0 > 0.0
    }
}

/// delta from the Carathéodory loop and the sup and antipodal bounds on an
/// n-sample grid of the circle.
pub fn compute_constants<A: Cocycle + ?Sized>(src: &A, n_samples: usize) -> Result<GroupConstants> {
    if n_samples < 2 || !n_samples.is_power_of_two() {
        return Err(Error::InvalidInput(format!("n_samples = {n_samples}: need a power of two")));
    }
    let delta = src.boettcher().delta_inf_gamma(n_samples.min(1024))?;
    let k = n_samples.trailing_zeros();
    let grid: Vec<Angle> = (0..n_samples).map(|j| Angle::dyadic(j as i64, k)).collect();
    src.prefetch(&grid);
    let a = src.jacobian();
    let ratios = grid
        .iter()
        .map(|t| Ok(src.alpha(&LeafLabel::on_circle(*t))? / a))
        .collect::<Result<Vec<C>>>()?;
    let sup_ratio = ratios.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let half = n_samples / 2;
    let inf_antipodal = (0..n_samples)
        .map(|i| (ratios[i] - ratios[(i + half) % n_samples]).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(GroupConstants::from_measurements(delta, a.norm(), sup_ratio, inf_antipodal, n_samples))
}

#[derive(Clone, Copy, Debug)]
pub struct GrowthReport {
    pub j: i64,
    pub k: u32,
    pub xi: C,
    pub z: C,
    /// |p z + q|
    pub lhs: f64,
    /// (delta^3/32)(delta^2/(2|a|))^(k-1) - |z|
    pub rhs: f64,
    pub margin: f64,
}

/// The growth inequality evaluated without checking its hypotheses.
pub fn growth_margin<A: Cocycle + ?Sized>(
    src: &A,
    consts: &GroupConstants,
    g: &DeckTransform,
    xi: &LeafLabel,
    z: C,
) -> Result<GrowthReport> {
    let (p, q) = pq_closed_form(src, g, xi)?;
    let lhs = (p * z + q).norm();
    let rhs = consts.growth_rhs(g.k, z.norm());
    Ok(GrowthReport {
        j: g.j,
        k: g.k,
        xi: xi.value(),
        z,
        lhs,
        rhs,
        margin: lhs - rhs,
    })
}

/// The growth inequality under its hypotheses: j odd, |a| <= a0 and
/// k >= k0(|z|).
pub fn growth_check<A: Cocycle + ?Sized>(
    src: &A,
    consts: &GroupConstants,
    g: &DeckTransform,
    xi: &LeafLabel,
    z: C,
) -> Result<GrowthReport> {
    if g.is_identity() {
        return Err(Error::PreconditionUnmet("identity element".into()));
    }
    if !consts.premise_met() {
        return Err(Error::PreconditionUnmet(format!(
            "|a| = {:e} is not below a0 = {:e}",
            consts.a_abs, consts.a0
        )));
    }
    match consts.k0(z.norm()) {
        Some(k0) if g.k >= k0 => growth_margin(src, consts, g, xi, z),
        Some(k0) => Err(Error::PreconditionUnmet(format!("k = {} below k0 = {k0}", g.k))),
        None => Err(Error::PreconditionUnmet("no k0: growth factor <= 1".into())),
    }
}

/// Sampled evidence that U = V0 x U0 is disjoint from all its translates
/// by non-identity elements up to level k_max.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub k0: u32,
    pub k_max: u32,
    /// half-width of V0 in turns, 2^-k0
    pub half_width: f64,
    /// radius of U0, delta^3 / 32
    pub radius: f64,
    pub sample_points: usize,
    pub elements: usize,
    /// (element, point) pairs separated by the angle
    pub angle_exits: usize,
    /// pairs separated by the fibre coordinate
    pub z_exits: usize,
    /// smallest |p z + q - z0| / radius over pairs with k >= k0
    pub min_z_ratio: f64,
    /// whether |a| <= a0 held (the construction's hypothesis)
    pub premise_met: bool,
}

/// Build U around (xi0, z0) and check g(U) and U are disjoint on samples:
/// 16 angles of V0 times budget/16 points of U0 (centre, two rings).
pub fn separating_neighborhood<A: Cocycle + ?Sized>(
    src: &A,
    consts: &GroupConstants,
    xi0: &Angle,
    z0: C,
    sample_budget: usize,
    k_max: Option<u32>,
) -> Result<Certificate> {
    let k0 = consts
        .k0_neighborhood(z0.norm())
        .ok_or_else(|| Error::PreconditionUnmet("growth factor <= 1".into()))?;
    let k_max = k_max.unwrap_or(k0 + 4);
    let half_width = 0.5f64.powi(k0 as i32);
    let radius = consts.delta.powi(3) / 32.0;
    // angles xi0 + i / 2^(k0+3), |i| <= 7, all strictly inside V0
    let angles: Vec<Angle> = (-7..=7).map(|i| xi0.add_dyadic(i, k0 + 3)).collect();
    let per_angle = (sample_budget / angles.len()).max(1);
    let zs: Vec<C> = (0..per_angle)
        .map(|i| {
            if i == 0 {
                return z0;
            }
            let r = if i % 2 == 1 { 0.999 * radius } else { 0.5 * radius };
            z0 + C::from_polar(r, std::f64::consts::TAU * i as f64 / per_angle as f64)
        })
        .collect();
    let elements: Vec<DeckTransform> = (1..=k_max).flat_map(DeckTransform::level).collect();
    let mut cert = Certificate {
        k0,
        k_max,
        half_width,
        radius,
        sample_points: angles.len() * zs.len(),
        elements: elements.len(),
        angle_exits: 0,
        z_exits: 0,
        min_z_ratio: f64::INFINITY,
        premise_met: consts.premise_met(),
    };
    for xi in &angles {
        let label = LeafLabel::on_circle(*xi);
        for g in &elements {
            let image = xi.add_dyadic(g.j, g.k);
            let angle_out = xi0.distance_to(&image).abs() >= half_width;
            if angle_out && g.k < k0 {
                cert.angle_exits += zs.len();
                continue;
            }
            let (p, q) = pq_closed_form(src, g, &label)?;
            for z in &zs {
                let d = (p * z + q - z0).norm();
                cert.min_z_ratio = cert.min_z_ratio.min(d / radius);
                if d >= radius {
                    cert.z_exits += 1;
                } else if angle_out {
                    cert.angle_exits += 1;
                } else {
                    return Err(Error::CertificateFailure {
                        j: g.j,
                        k: g.k,
                        xi_arg: xi.turns(),
                        z_re: z.re,
                        z_im: z.im,
                    });
                }
            }
        }
    }
    Ok(cert)
}

/// Search g = g_{m/2^k}, k <= k_max, with g(theta2, z2) = (theta'', z'')
/// such that theta'' and theta1 land together and z'' = z1. Returns the
/// witness (m, k); the identity is (1, 0).
pub fn orbit_equivalent<A: Cocycle + ?Sized>(
    src: &A,
    p1: (Angle, C),
    p2: (Angle, C),
    k_max: u32,
) -> Result<Option<(i64, u32)>> {
    const LANDING_TOL: f64 = 1e-6;
    const Z_TOL: f64 = 1e-6;
    let g1 = src.landing(&p1.0)?;
    let candidates = std::iter::once(DeckTransform::identity()).chain((1..=k_max).flat_map(DeckTransform::level));
    for g in candidates {
        let image = p2.0.add_dyadic(g.j, g.k);
        if image.key() != p1.0.key() && (src.landing(&image)? - g1).norm() >= LANDING_TOL {
            continue;
        }
        let (_, z) = apply(src, &g, &LeafLabel::on_circle(p2.0), p2.1)?;
        if (z - p1.1).norm() < Z_TOL {
            return Ok(Some((g.j, g.k)));
        }
    }
    Ok(None)
}
