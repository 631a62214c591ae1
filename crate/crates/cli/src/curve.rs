//! alpha sampled on the circle, and its CSV form.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use anyhow::{anyhow, Result};
use henon_cocycle::cocycle::{Cocycle, CocycleEngine, LimitCocycle, Trivialization};
use henon_cocycle::{Complex64 as C, LeafLabel};
use rayon::prelude::*;

use crate::config::ExperimentConfig;

pub const HEADER: [&str; 6] = ["theta", "re", "im", "abs", "arg", "flag"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flag {
    Ok,
    /// radius extrapolation did not meet its tolerance
    Slow,
    /// no value at this angle
    Fail,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::Ok => "ok",
            Flag::Slow => "slow",
            Flag::Fail => "fail",
        })
    }
}

impl FromStr for Flag {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(Flag::Ok),
            "slow" => Ok(Flag::Slow),
            "fail" => Ok(Flag::Fail),
            x => Err(anyhow!("unknown flag {x:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub theta: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    /// turns in [-1/2, 1/2)
    pub arg: f64,
    pub flag: Flag,
}

/// arg z in turns, normalized to [-1/2, 1/2).
pub fn arg_turns(z: C) -> f64 {
    let t = z.im.atan2(z.re) / std::f64::consts::TAU;
    if t >= 0.5 {
        t - 1.0
    } else {
        t
    }
}

impl CurveRow {
    pub fn new(theta: f64, value: C, flag: Flag) -> CurveRow {
        CurveRow {
            theta,
            re: value.re,
            im: value.im,
            abs: value.norm(),
            arg: arg_turns(value),
            flag,
        }
    }

    pub fn failed(theta: f64) -> CurveRow {
        CurveRow {
            theta,
            re: f64::NAN,
            im: f64::NAN,
            abs: f64::NAN,
            arg: f64::NAN,
            flag: Flag::Fail,
        }
    }

    pub fn value(&self) -> Option<C> {
        (self.flag != Flag::Fail).then(|| C::new(self.re, self.im))
    }
}

/// alpha (or alpha / a) on the n-grid in the configured trivialization.
/// Angles are sharded over the current rayon pool; rows come back in theta
/// order.
pub fn compute_curve(cfg: &ExperimentConfig) -> Result<Vec<CurveRow>> {
    cfg.validate()?;
    let grid = CocycleEngine::grid(cfg.n)?;
    let scale = if cfg.over_a { 1.0 / cfg.a } else { C::new(1.0, 0.0) };
    let rows = if cfg.synthetic {
        let model = LimitCocycle::new(cfg.c, cfg.a);
        grid.par_iter()
            .map(|t| {
                let v = model.alpha(&LeafLabel::on_circle(*t)).and_then(|alpha| match cfg.trivialization {
                    Trivialization::BoettcherSquared => {
                        let g1 = model.landing(t)?;
                        let g2 = model.landing(&t.double())?;
                        Ok(alpha * g2 * g2 / (g1 * g1))
                    }
                    _ => Ok(alpha),
                });
                match v {
                    Ok(v) => CurveRow::new(t.turns(), v * scale, Flag::Ok),
                    Err(_) => CurveRow::failed(t.turns()),
                }
            })
            .collect()
    } else {
        let engine = CocycleEngine::with_settings(cfg.params(), cfg.settings);
        engine.prefetch(&grid);
        grid.par_iter()
            .map(|t| {
                let s = match cfg.trivialization {
                    Trivialization::BoettcherSquared => engine.alpha_normalized(t),
                    _ => engine.alpha_std(t),
                };
                match s {
                    Ok(s) => {
                        let flag = if s.diagnostics.converged { Flag::Ok } else { Flag::Slow };
                        CurveRow::new(t.turns(), s.alpha * scale, flag)
                    }
                    Err(_) => CurveRow::failed(t.turns()),
                }
            })
            .collect()
    };
    Ok(rows)
}

fn fmt_f(x: f64) -> String {
    // 17 significant digits: parses back to the same double
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(w: W, rows: &[CurveRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for r in rows {
        out.write_record([
            fmt_f(r.theta),
            fmt_f(r.re),
            fmt_f(r.im),
            fmt_f(r.abs),
            fmt_f(r.arg),
            r.flag.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<CurveRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(anyhow!("unexpected CSV header {header:?}"));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> { Ok(rec[i].parse::<f64>()?) };
        rows.push(CurveRow {
            theta: f(0)?,
            re: f(1)?,
            im: f(2)?,
            abs: f(3)?,
            arg: f(4)?,
            flag: rec[5].parse()?,
        });
    }
    Ok(rows)
}

/// Winding number from the argument column: the sum of the increments
/// wrapped to [-1/2, 1/2), including the closing step. None if a row failed.
pub fn winding_from_args(rows: &[CurveRow]) -> Option<f64> {
    if rows.iter().any(|r| r.flag == Flag::Fail) || rows.is_empty() {
        return None;
    }
    let n = rows.len();
    let total: f64 = (0..n)
        .map(|i| {
            let d = rows[(i + 1) % n].arg - rows[i].arg;
            d - (d + 0.5).floor()
        })
        .sum();
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use henon_cocycle::Angle;

    #[test]
    fn arg_is_half_open() {
        assert_eq!(arg_turns(C::new(-1.0, 0.0)), -0.5);
        assert_eq!(arg_turns(C::new(-1.0, -0.0)), -0.5);
        assert_eq!(arg_turns(C::new(0.0, 1.0)), 0.25);
        assert_eq!(arg_turns(C::new(1.0, 0.0)), 0.0);
    }

    #[test]
    fn synthetic_c_zero_is_the_half_circle() {
        // alpha / a = 1 / (2 xi^3): radius 1/2, winding -3 (and -1 after
        // the gauge gamma^2, which is xi^2 here)
        let mut cfg = ExperimentConfig {
            c: C::new(0.0, 0.0),
            a: C::new(1e-3, 0.0),
            n: 64,
            synthetic: true,
            over_a: true,
            ..ExperimentConfig::default()
        };
        let rows = compute_curve(&cfg).unwrap();
        for r in &rows {
            assert!((r.abs - 0.5).abs() < 1e-14);
            let expect = 0.5 / Angle::from_turns(r.theta).unit().powi(3);
            assert!((C::new(r.re, r.im) - expect).norm() < 1e-14);
        }
        assert!((winding_from_args(&rows).unwrap() + 3.0).abs() < 1e-12);
        cfg.trivialization = Trivialization::BoettcherSquared;
        let rows = compute_curve(&cfg).unwrap();
        assert!((winding_from_args(&rows).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn failed_rows_have_no_value() {
        let r = CurveRow::failed(0.25);
        assert!(r.value().is_none());
        assert!(winding_from_args(&[r]).is_none());
    }
}
