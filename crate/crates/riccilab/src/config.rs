//! Run configuration: a flat `key = value` file.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! an error so typos do not silently fall back to defaults.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::surgery::{cutoff_params, CutoffConfig, SurgeryParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Round,
    Dumbbell,
    Cylinder,
    HomogeneousConstK,
    HomogeneousProduct,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Round,
        Scenario::Dumbbell,
        Scenario::Cylinder,
        Scenario::HomogeneousConstK,
        Scenario::HomogeneousProduct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Round => "round",
            Scenario::Dumbbell => "dumbbell",
            Scenario::Cylinder => "cylinder",
            Scenario::HomogeneousConstK => "homogeneous-constK",
            Scenario::HomogeneousProduct => "homogeneous-product",
        }
    }

    pub fn is_homogeneous(self) -> bool {
        matches!(self, Scenario::HomogeneousConstK | Scenario::HomogeneousProduct)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Grid intervals for warped scenarios.
    pub n: usize,
    /// Horizon, in the units of the initial metric.
    pub t_end: f64,
    /// Round: sphere radius.
    pub radius: f64,
    pub waist: f64,
    pub lobe: f64,
    /// Dumbbell bar slope; see [`crate::warped::DumbbellShape`].
    pub taper: f64,
    pub cyl_radius: f64,
    pub cyl_length: f64,
    pub k0: f64,
    pub a0: f64,
    pub b0: f64,
    pub ref_volume: f64,
    /// Steps of the homogeneous scenarios.
    pub steps: usize,
    pub eps: f64,
    pub r: f64,
    pub delta: f64,
    pub d: f64,
    pub c_eq6: f64,
    pub c_cfl: f64,
    /// Constant of the width inequality.
    pub width_c: f64,
    /// Write every k-th step to `timeseries.csv`; surgery rows and the last
    /// row are always written.
    pub csv_every: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: Scenario::Round,
            n: 400,
            t_end: 1.0,
            radius: 1.0,
            waist: 0.15,
            lobe: 1.0,
            taper: crate::warped::DumbbellShape::new(0.15, 1.0).taper,
            cyl_radius: 1.0,
            cyl_length: 20.0,
            k0: -1.0,
            a0: 1.0,
            b0: 1.0,
            ref_volume: 1.0,
            steps: 1000,
            eps: 1e-2,
            r: 4.0,
            delta: 8e-3,
            d: 10.0,
            c_eq6: 1.0,
            c_cfl: 0.2,
            width_c: 1.0,
            csv_every: 50,
            seed: 0,
            out: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

impl RunConfig {
    pub fn for_scenario(scenario: Scenario) -> Self {
        let mut c = RunConfig {
            scenario,
            ..Default::default()
        };
        match scenario {
            Scenario::Dumbbell => c.n = 800,
            Scenario::Cylinder => c.t_end = 0.5,
            // Long-time behaviour is read off the rescaled metric, so the
            // horizon has to be long.
            Scenario::HomogeneousConstK | Scenario::HomogeneousProduct => {
                c.t_end = 1e3;
                c.csv_every = 1;
            }
            _ => {}
        }
        c
    }

    /// Set one key. Numeric keys are exactly the ones [`RunConfig::is_numeric`]
    /// accepts.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "scenario" => self.scenario = v.parse()?,
            "N" => self.n = parse(key, v)?,
            "steps" => self.steps = parse(key, v)?,
            "csv_every" => self.csv_every = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            _ => {
                let x: f64 = parse(key, v)?;
                *self.numeric_mut(key)? = x;
            }
        }
        Ok(())
    }

    fn numeric_mut(&mut self, key: &str) -> Result<&mut f64> {
        Ok(match key {
            "T" => &mut self.t_end,
            "radius" => &mut self.radius,
            "waist" => &mut self.waist,
            "lobe" => &mut self.lobe,
            "taper" => &mut self.taper,
            "cyl_radius" => &mut self.cyl_radius,
            "cyl_length" => &mut self.cyl_length,
            "k0" => &mut self.k0,
            "a0" => &mut self.a0,
            "b0" => &mut self.b0,
            "ref_volume" => &mut self.ref_volume,
            "eps" => &mut self.eps,
            "r" => &mut self.r,
            "delta" => &mut self.delta,
            "D" => &mut self.d,
            "c_eq6" => &mut self.c_eq6,
            "c_cfl" => &mut self.c_cfl,
            "width_C" => &mut self.width_c,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        })
    }

    /// Whether `key` names a numeric field (a valid sweep axis).
    pub fn is_numeric(key: &str) -> bool {
        matches!(key, "N" | "steps" | "csv_every" | "seed") || RunConfig::default().numeric_mut(key).is_ok()
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", k + 1)))?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        // The scenario picks the defaults, so it goes first.
        let scenario = match pairs.iter().find(|(k, _)| k == "scenario") {
            Some((_, v)) => v.parse()?,
            None => Scenario::Round,
        };
        let mut c = RunConfig::for_scenario(scenario);
        for (k, v) in &pairs {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        RunConfig::parse_text(&text)
    }

    /// Text form read back by [`RunConfig::parse_text`].
    pub fn to_text(&self) -> String {
        let f = crate::io::fmt_f64;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("scenario", self.scenario.to_string());
        kv("N", self.n.to_string());
        kv("T", f(self.t_end));
        kv("radius", f(self.radius));
        kv("waist", f(self.waist));
        kv("lobe", f(self.lobe));
        kv("taper", f(self.taper));
        kv("cyl_radius", f(self.cyl_radius));
        kv("cyl_length", f(self.cyl_length));
        kv("k0", f(self.k0));
        kv("a0", f(self.a0));
        kv("b0", f(self.b0));
        kv("ref_volume", f(self.ref_volume));
        kv("steps", self.steps.to_string());
        kv("eps", f(self.eps));
        kv("r", f(self.r));
        kv("delta", f(self.delta));
        kv("D", f(self.d));
        kv("c_eq6", f(self.c_eq6));
        kv("c_cfl", f(self.c_cfl));
        kv("width_C", f(self.width_c));
        kv("csv_every", self.csv_every.to_string());
        kv("seed", self.seed.to_string());
        if let Some(o) = &self.out {
            kv("out", o.display().to_string());
        }
        s
    }

    pub fn surgery_params(&self) -> Result<SurgeryParams> {
        let cfg = CutoffConfig {
            eps: self.eps,
            d_default: self.d,
            c_eq6: self.c_eq6,
        };
        cutoff_params(self.r, self.delta, &cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("`{name}` must be positive and finite, got {v}")))
            }
        };
        pos("T", self.t_end)?;
        pos("c_cfl", self.c_cfl)?;
        pos("width_C", self.width_c)?;
        pos("ref_volume", self.ref_volume)?;
        if self.n < 16 {
            return Err(Error::Config(format!("`N` must be at least 16, got {}", self.n)));
        }
        match self.scenario {
            Scenario::Round => pos("radius", self.radius)?,
            Scenario::Dumbbell => {
                pos("waist", self.waist)?;
                pos("lobe", self.lobe)?;
                pos("taper", self.taper)?;
                if self.waist >= self.lobe {
                    return Err(Error::Config("`waist` must be smaller than `lobe`".into()));
                }
            }
            Scenario::Cylinder => {
                pos("cyl_radius", self.cyl_radius)?;
                pos("cyl_length", self.cyl_length)?;
            }
            Scenario::HomogeneousConstK => {
                if !self.k0.is_finite() {
                    return Err(Error::Config("`k0` must be finite".into()));
                }
            }
            Scenario::HomogeneousProduct => {
                pos("a0", self.a0)?;
                pos("b0", self.b0)?;
            }
        }
        if self.csv_every == 0 {
            return Err(Error::Config("`csv_every` must be positive".into()));
        }
        if self.scenario.is_homogeneous() && self.steps == 0 {
            return Err(Error::Config("`steps` must be positive".into()));
        }
        self.surgery_params()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let mut c = RunConfig::for_scenario(Scenario::Dumbbell);
        c.delta = 5e-3;
        c.out = Some("runs/a".into());
        let back = RunConfig::parse_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn comments_and_blanks() {
        let c = RunConfig::parse_text("# hi\n\nscenario = cylinder\n  T=0.1 \n").unwrap();
        assert_eq!(c.scenario, Scenario::Cylinder);
        assert_eq!(c.t_end, 0.1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::parse_text("bogus = 1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse_text("T"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse_text("T = x"), Err(Error::Config(_))));
        // delta >= eps breaks the cutoff ledger.
        let e = RunConfig::parse_text("delta = 0.02").unwrap_err();
        assert!(matches!(e, Error::BadParameters(_)), "{e}");
    }

    #[test]
    fn numeric_axes() {
        assert!(RunConfig::is_numeric("N"));
        assert!(RunConfig::is_numeric("waist"));
        assert!(!RunConfig::is_numeric("scenario"));
        assert!(!RunConfig::is_numeric("out"));
    }
}
