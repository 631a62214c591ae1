//! Angles in turns with optional exact forms, and log-polar labels on the
//! exterior of the unit disk.
//!
//! Doubling an `f64` angle is exact in binary arithmetic but exhausts the
//! mantissa after ~53 steps, so periodic angles should be given in rational
//! form (`Angle::rational(1, 3)`), which doubles exactly forever.

use num_complex::Complex64;
use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Exact {
    None,
    /// j / 2^k, j odd or (0, 0)
    Dyadic { j: u64, k: u32 },
    /// num / den, reduced, den > 0
    Rational { num: u64, den: u64 },
}

/// An angle theta in [0, 1) measured in turns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle {
    theta: f64,
    exact: Exact,
}

/// Hashable identity of an angle, used to key caches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AngleKey {
    Bits(u64),
    Rational(u64, u64),
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn wrap(t: f64) -> f64 {
    let r = t - t.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl Angle {
    pub const ZERO: Angle = Angle {
        theta: 0.0,
        exact: Exact::Dyadic { j: 0, k: 0 },
    };

    /// Angle from a real number of turns, reduced mod 1. Exact dyadic form is
    /// attached when the value is a dyadic rational with denominator <= 2^62.
    pub fn from_turns(t: f64) -> Angle {
        let theta = wrap(t);
        let mut exact = Exact::None;
        if theta == 0.0 {
            exact = Exact::Dyadic { j: 0, k: 0 };
        } else {
            let scaled = theta * (1u64 << 62) as f64;
            if scaled.fract() == 0.0 {
                let mut j = scaled as u64;
                let mut k = 62;
                while j % 2 == 0 {
                    j /= 2;
                    k -= 1;
                }
                exact = Exact::Dyadic { j, k };
            }
        }
        Angle { theta, exact }
    }

    /// The dyadic angle j / 2^k (reduced automatically).
    pub fn dyadic(j: i64, k: u32) -> Angle {
        assert!(k <= 62, "dyadic denominator too large");
        let den = 1i128 << k;
        let mut j = (j as i128).rem_euclid(den) as u64;
        let mut k = k;
        if j == 0 {
            return Angle::ZERO;
        }
        while j % 2 == 0 {
            j /= 2;
            k -= 1;
        }
        Angle {
            theta: j as f64 / (1u64 << k) as f64,
            exact: Exact::Dyadic { j, k },
        }
    }

    /// The rational angle num / den mod 1.
    pub fn rational(num: i64, den: u64) -> Angle {
        assert!(den > 0, "zero denominator");
        let mut n = (num as i128).rem_euclid(den as i128) as u64;
        let g = gcd(n, den).max(1);
        n /= g;
        let d = den / g;
        if n == 0 {
            return Angle::ZERO;
        }
        if d.is_power_of_two() {
            return Angle::dyadic(n as i64, d.trailing_zeros());
        }
        Angle {
            theta: n as f64 / d as f64,
            exact: Exact::Rational { num: n, den: d },
        }
    }

    pub fn turns(&self) -> f64 {
        self.theta
    }

    /// e^{2 pi i theta}
    pub fn unit(&self) -> Complex64 {
        match self.exact {
            Exact::Dyadic { j: 0, .. } => Complex64::new(1.0, 0.0),
            _ => Complex64::from_polar(1.0, TAU * self.theta),
        }
    }

    /// Reduced dyadic form (j, k), if the angle is dyadic.
    pub fn as_dyadic(&self) -> Option<(u64, u32)> {
        match self.exact {
            Exact::Dyadic { j, k } => Some((j, k)),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<(u64, u64)> {
        match self.exact {
            Exact::Rational { num, den } => Some((num, den)),
            Exact::Dyadic { j, k } => Some((j, 1u64 << k)),
            Exact::None => None,
        }
    }

    pub fn key(&self) -> AngleKey {
        match self.exact {
            Exact::Rational { num, den } => AngleKey::Rational(num, den),
            _ => AngleKey::Bits(self.theta.to_bits()),
        }
    }

    /// 2 theta mod 1.
    pub fn double(&self) -> Angle {
        match self.exact {
            Exact::Dyadic { j: 0, .. } => Angle::ZERO,
            Exact::Dyadic { j, k } => Angle::dyadic(2 * j as i64, k),
            Exact::Rational { num, den } => {
                let n = ((num as u128 * 2) % den as u128) as u64;
                Angle::rational(n as i64, den)
            }
            Exact::None => Angle::from_turns(2.0 * self.theta),
        }
    }

    /// 2^n theta mod 1.
    pub fn double_n(&self, n: u32) -> Angle {
        let mut a = *self;
        for _ in 0..n {
            a = a.double();
        }
        a
    }

    /// theta + j/2^k mod 1, exact whenever theta has an exact form.
    pub fn add_dyadic(&self, j: i64, k: u32) -> Angle {
        let step = Angle::dyadic(j, k);
        let (sj, sk) = step.as_dyadic().unwrap();
        match self.exact {
            Exact::Dyadic { j: aj, k: ak } => {
                let kk = ak.max(sk);
                let num = ((aj as i128) << (kk - ak)) + ((sj as i128) << (kk - sk));
                Angle::dyadic(num.rem_euclid(1i128 << kk) as i64, kk)
            }
            Exact::Rational { num, den } => {
                let d = den as u128 * (1u128 << sk);
                let n = num as u128 * (1u128 << sk) + sj as u128 * den as u128;
                if d < (1u128 << 62) {
                    Angle::rational((n % d) as i64, d as u64)
                } else {
                    Angle::from_turns(self.theta + step.theta)
                }
            }
            Exact::None => Angle::from_turns(self.theta + step.theta),
        }
    }

    /// theta + 1/2.
    pub fn antipode(&self) -> Angle {
        self.add_dyadic(1, 1)
    }

    /// Period of the angle under doubling, if it is rational with odd
    /// denominator (searched up to `max_period`).
    pub fn doubling_period(&self, max_period: usize) -> Option<usize> {
        let mut a = self.double();
        for n in 1..=max_period {
            if a.key() == self.key() {
                return Some(n);
            }
            a = a.double();
        }
        None
    }

    /// Signed distance to another angle, in (-1/2, 1/2].
    pub fn distance_to(&self, other: &Angle) -> f64 {
        let d = wrap(other.theta - self.theta);
        if d > 0.5 {
            d - 1.0
        } else {
            d
        }
    }
}

/// A point xi = exp(log_radius + 2 pi i theta) with |xi| >= 1, stored in
/// log-polar form so that xi^(2^n) is computed without accumulated rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeafLabel {
    pub angle: Angle,
    pub log_radius: f64,
}

impl LeafLabel {
    pub fn new(angle: Angle, log_radius: f64) -> LeafLabel {
        assert!(log_radius >= 0.0, "label must satisfy |xi| >= 1");
        LeafLabel { angle, log_radius }
    }

    pub fn on_circle(angle: Angle) -> LeafLabel {
        LeafLabel {
            angle,
            log_radius: 0.0,
        }
    }

    pub fn from_complex(xi: Complex64) -> LeafLabel {
        let lr = xi.norm().ln();
        LeafLabel::new(Angle::from_turns(xi.arg() / TAU), lr.max(0.0))
    }

    pub fn radius(&self) -> f64 {
        self.log_radius.exp()
    }

    pub fn value(&self) -> Complex64 {
        self.angle.unit() * self.radius()
    }

    /// log xi with imaginary part 2 pi theta.
    pub fn log(&self) -> Complex64 {
        Complex64::new(self.log_radius, TAU * self.angle.turns())
    }

    /// xi^2.
    pub fn square(&self) -> LeafLabel {
        LeafLabel {
            angle: self.angle.double(),
            log_radius: 2.0 * self.log_radius,
        }
    }

    pub fn power_of_two(&self, n: u32) -> LeafLabel {
        LeafLabel {
            angle: self.angle.double_n(n),
            log_radius: self.log_radius * 2f64.powi(n as i32),
        }
    }

    /// omega * xi with omega = e^{2 pi i j/2^k}.
    pub fn rotate_dyadic(&self, j: i64, k: u32) -> LeafLabel {
        LeafLabel {
            angle: self.angle.add_dyadic(j, k),
            log_radius: self.log_radius,
        }
    }

    pub fn negate(&self) -> LeafLabel {
        self.rotate_dyadic(1, 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_doubling_reduces() {
        let a = Angle::dyadic(3, 3);
        assert_eq!(a.double().as_dyadic(), Some((3, 2)));
        assert_eq!(a.double().double().as_dyadic(), Some((1, 1)));
        assert_eq!(a.double_n(3), Angle::ZERO);
    }

    #[test]
    fn rational_doubling_is_periodic() {
        let a = Angle::rational(1, 3);
        assert_eq!(a.double().as_rational(), Some((2, 3)));
        assert_eq!(a.double_n(2).key(), a.key());
        assert_eq!(a.doubling_period(10), Some(2));
        assert_eq!(Angle::rational(1, 7).doubling_period(10), Some(3));
        assert_eq!(Angle::ZERO.doubling_period(4), Some(1));
        assert_eq!(Angle::dyadic(1, 2).doubling_period(8), None);
    }

    #[test]
    fn from_turns_detects_dyadics() {
        assert_eq!(Angle::from_turns(0.375).as_dyadic(), Some((3, 3)));
        assert_eq!(Angle::from_turns(1.25).as_dyadic(), Some((1, 2)));
        assert_eq!(Angle::from_turns(-0.25).as_dyadic(), Some((3, 2)));
    }

    #[test]
    fn add_dyadic_wraps() {
        let a = Angle::dyadic(3, 2).add_dyadic(1, 1);
        assert_eq!(a.as_dyadic(), Some((1, 2)));
        let r = Angle::rational(1, 3).antipode();
        assert_eq!(r.as_rational(), Some((5, 6)));
    }

    #[test]
    fn label_powers() {
        let l = LeafLabel::new(Angle::rational(1, 3), 0.1);
        let l4 = l.power_of_two(2);
        assert!((l4.log_radius - 0.4).abs() < 1e-15);
        assert_eq!(l4.angle.key(), l.angle.key());
        let z = l.value();
        assert!((z * z - l.square().value()).norm() < 1e-14);
    }
}
