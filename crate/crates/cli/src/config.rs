//! Flat `key = value` configuration with command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use henon_cocycle::cocycle::{AlphaSettings, Trivialization};
use henon_cocycle::henon_core::HenonParams;
use henon_cocycle::{Angle, Complex64 as C};

use crate::usage;

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub c: C,
    pub a: C,
    pub trivialization: Trivialization,
    /// grid size, a power of two
    pub n: usize,
    pub out: PathBuf,
    /// 0 = rayon default
    pub workers: usize,
    pub seed: u64,
    pub suite: String,
    pub strict: bool,
    /// divide alpha by a in curves
    pub over_a: bool,
    /// use the a -> 0 model a gamma(xi) / (2 gamma(xi^2)^2) instead of the
    /// critical-locus computation
    pub synthetic: bool,
    pub width: u32,
    pub height: u32,
    /// angle of the multiplier check
    pub multiplier_theta: Angle,
    /// angle pair of the identification check
    pub ident: (Angle, Angle),
    pub settings: AlphaSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            c: C::new(0.0, 0.1),
            a: C::new(0.05, 0.0),
            trivialization: Trivialization::Standard,
            n: 1024,
            out: PathBuf::from("out"),
            workers: 0,
            seed: 0x5eed,
            suite: "default".into(),
            strict: false,
            over_a: false,
            synthetic: false,
            width: 800,
            height: 600,
            multiplier_theta: Angle::ZERO,
            ident: (Angle::rational(1, 3), Angle::rational(2, 3)),
            settings: AlphaSettings::default(),
        }
    }
}

/// Parse `x`, `yi`, `x+yi`, `x-yi` (exponents allowed, `j` accepted for `i`).
pub fn parse_complex(s: &str) -> Result<C> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || usage(format!("cannot parse complex number {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|x| C::new(x, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
    Ok(C::new(re, im))
}

/// `p/q` as an exact rational angle, otherwise turns.
pub fn parse_angle(s: &str) -> Result<Angle> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| usage(format!("bad angle {s:?}")))?;
        let q: u64 = q.trim().parse().map_err(|_| usage(format!("bad angle {s:?}")))?;
        if q == 0 {
            return Err(usage(format!("bad angle {s:?}")));
        }
        return Ok(Angle::rational(p, q));
    }
    s.parse::<f64>()
        .map(Angle::from_turns)
        .map_err(|_| usage(format!("bad angle {s:?}")))
}

pub fn parse_trivialization(s: &str) -> Result<Trivialization> {
    match s.trim() {
        "std" | "standard" => Ok(Trivialization::Standard),
        "norm" | "normalized" => Ok(Trivialization::BoettcherSquared),
        x => Err(usage(format!("unknown trivialization {x:?} (std|norm)"))),
    }
}

fn triv_name(t: Trivialization) -> &'static str {
    match t {
        Trivialization::Standard => "std",
        Trivialization::BoettcherSquared => "norm",
        Trivialization::CustomGauge => "custom",
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| usage(format!("bad value {v:?} for {key}")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        x => Err(usage(format!("bad boolean {x:?} for {key}"))),
    }
}

impl ExperimentConfig {
    /// Set one key. Unknown keys are usage errors.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let s = &mut self.settings;
        match key.trim() {
            "c" => self.c = parse_complex(v)?,
            "a" => self.a = parse_complex(v)?,
            "triv" => self.trivialization = parse_trivialization(v)?,
            "n" => self.n = num(key, v)?,
            "out" => self.out = PathBuf::from(v.trim()),
            "workers" => self.workers = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "suite" => self.suite = v.trim().to_string(),
            "strict" => self.strict = flag(key, v)?,
            "over_a" => self.over_a = flag(key, v)?,
            "synthetic" => self.synthetic = flag(key, v)?,
            "width" => self.width = num(key, v)?,
            "height" => self.height = num(key, v)?,
            "multiplier_theta" => self.multiplier_theta = parse_angle(v)?,
            "ident" => {
                let (x, y) = v
                    .split_once(',')
                    .ok_or_else(|| usage(format!("ident needs two angles, got {v:?}")))?;
                self.ident = (parse_angle(x)?, parse_angle(y)?);
            }
            "m_max" => s.m_max = num(key, v)?,
            "window" => s.window = num(key, v)?,
            "tol" => s.tol = num(key, v)?,
            "fast_tol" => s.fast_tol = num(key, v)?,
            "landing_tol" => s.landing_tol = num(key, v)?,
            "ratio_tol" => s.ratio.tol = num(key, v)?,
            "ratio_max_steps" => s.ratio.max_steps = num(key, v)?,
            "compensated" => s.ratio.compensated = flag(key, v)?,
            "ceiling" => s.locus.ceiling = num(key, v)?,
            "a_steps" => s.locus.a_steps = num(key, v)?,
            "max_halvings" => s.locus.max_halvings = num(key, v)?,
            "newton_max" => s.locus.newton_max = num(key, v)?,
            "accept" => s.locus.accept = num(key, v)?,
            "trap" => s.locus.trap = num(key, v)?,
            "max_iter" => s.locus.max_iter = num(key, v)?,
            "t0" => s.locus.t0 = num(key, v)?,
            "schedule_len" => s.locus.schedule_len = num(key, v)?,
            "circle_tol" => s.locus.circle_tol = num(key, v)?,
            other => return Err(usage(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Apply a `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("{origin}:{}: expected key = value", i + 1)))?;
            self.set(k, v)
                .with_context(|| format!("{origin}:{}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(usage(format!("n = {} must be a power of two >= 8", self.n)));
        }
        if !self.synthetic && self.a.norm() == 0.0 {
            return Err(usage("a = 0 is only allowed in synthetic mode"));
        }
        if self.width < 64 || self.height < 64 {
            return Err(usage("image size must be at least 64x64"));
        }
        if self.settings.window < 1 {
            return Err(usage("window must be positive"));
        }
        Ok(())
    }

    pub fn params(&self) -> HenonParams {
        HenonParams::new(self.c, self.a)
    }

    /// Every setting as `key=value`, in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let s = &self.settings;
        let l = &s.locus;
        let mut v: Vec<(&str, String)> = vec![
            ("c", fmt_c(self.c)),
            ("a", fmt_c(self.a)),
            ("triv", triv_name(self.trivialization).into()),
            ("n", self.n.to_string()),
            ("out", self.out.display().to_string()),
            ("workers", self.workers.to_string()),
            ("seed", self.seed.to_string()),
            ("suite", self.suite.clone()),
            ("strict", self.strict.to_string()),
            ("over_a", self.over_a.to_string()),
            ("synthetic", self.synthetic.to_string()),
            ("width", self.width.to_string()),
            ("height", self.height.to_string()),
            ("multiplier_theta", self.multiplier_theta.turns().to_string()),
            ("ident", format!("{},{}", self.ident.0.turns(), self.ident.1.turns())),
            ("m_max", s.m_max.to_string()),
            ("window", s.window.to_string()),
            ("tol", format!("{:e}", s.tol)),
            ("fast_tol", format!("{:e}", s.fast_tol)),
            ("landing_tol", format!("{:e}", s.landing_tol)),
            ("ratio_tol", format!("{:e}", s.ratio.tol)),
            ("ratio_max_steps", s.ratio.max_steps.to_string()),
            ("compensated", s.ratio.compensated.to_string()),
            ("ceiling", l.ceiling.to_string()),
            ("a_steps", l.a_steps.to_string()),
            ("max_halvings", l.max_halvings.to_string()),
            ("newton_max", l.newton_max.to_string()),
            ("accept", format!("{:e}", l.accept)),
            ("trap", l.trap.to_string()),
            ("max_iter", l.max_iter.to_string()),
            ("t0", l.t0.to_string()),
            ("schedule_len", l.schedule_len.to_string()),
            ("circle_tol", format!("{:e}", l.circle_tol)),
        ];
        v.drain(..).map(|(k, v)| (format!("config.{k}"), v)).collect()
    }
}

pub fn fmt_c(z: C) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.1i").unwrap(), C::new(0.0, 0.1));
        assert_eq!(parse_complex("-1").unwrap(), C::new(-1.0, 0.0));
        assert_eq!(parse_complex("1e-3").unwrap(), C::new(1e-3, 0.0));
        assert_eq!(parse_complex("0.3-2e-2i").unwrap(), C::new(0.3, -0.02));
        assert_eq!(parse_complex("-1e-3+4E+1j").unwrap(), C::new(-1e-3, 40.0));
        assert_eq!(parse_complex("-i").unwrap(), C::new(0.0, -1.0));
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn fmt_round_trips() {
        for z in [C::new(0.0, 0.1), C::new(-1.0, 0.0), C::new(0.25, -3e-7)] {
            assert_eq!(parse_complex(&fmt_c(z)).unwrap(), z);
        }
    }

    #[test]
    fn text_overrides_and_validation() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text("c = -1  # basilica\na=1e-3\n\ntriv = norm\nn = 64\nident = 1/3, 2/3\nm_max = 20\n", "t")
            .unwrap();
        assert_eq!(cfg.c, C::new(-1.0, 0.0));
        assert_eq!(cfg.trivialization, Trivialization::BoettcherSquared);
        assert_eq!(cfg.settings.m_max, 20);
        cfg.validate().unwrap();
        cfg.set("n", "1000").unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.downcast_ref::<crate::UsageError>().is_some());
        assert!(cfg.apply_text("bogus = 1", "t").is_err());
        assert!(cfg.apply_text("no equals sign", "t").is_err());
    }

    #[test]
    fn echo_lists_every_numeric_default() {
        let keys: Vec<String> = ExperimentConfig::default().echo().into_iter().map(|(k, _)| k).collect();
        for k in ["config.m_max", "config.tol", "config.t0", "config.ratio_tol", "config.max_iter"] {
            assert!(keys.iter().any(|x| x == k), "{k}");
        }
    }
}
