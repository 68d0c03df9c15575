//! Line-oriented `key = value` run configuration with `#` comments.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::timestepping::{CouplingConfig, TimeGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Convergence,
    Simulate,
    ProjectCheck,
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convergence" => Ok(Self::Convergence),
            "simulate" => Ok(Self::Simulate),
            "project-check" => Ok(Self::ProjectCheck),
            _ => Err(Error::Config(format!("unknown command {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Example1,
    Example2,
}

impl ProblemKind {
    fn name(self) -> &'static str {
        match self {
            Self::Example1 => "example1",
            Self::Example2 => "example2",
        }
    }

    pub fn default_eps(self) -> f64 {
        match self {
            Self::Example1 => 0.1,
            Self::Example2 => 1e-2,
        }
    }
}

/// Time step rule. `Auto` is `h` for `k = 0` and `h^{3/2}` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtRule {
    Auto,
    H,
    H15,
    Fixed(f64),
}

impl DtRule {
    pub fn resolve(self, h: f64, k: usize) -> f64 {
        match self {
            Self::Auto if k == 0 => h,
            Self::Auto => h.powf(1.5),
            Self::H => h,
            Self::H15 => h.powf(1.5),
            Self::Fixed(dt) => dt,
        }
    }

    fn to_text(self) -> String {
        match self {
            Self::Auto => "auto".into(),
            Self::H => "h".into(),
            Self::H15 => "h^1.5".into(),
            Self::Fixed(dt) => format!("{dt}"),
        }
    }
}

impl FromStr for DtRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "h" => Ok(Self::H),
            "h^1.5" | "h^(3/2)" => Ok(Self::H15),
            _ => {
                let v = if let Some((a, b)) = s.split_once('/') {
                    parse_f64("dt", a.trim())? / parse_f64("dt", b.trim())?
                } else {
                    parse_f64("dt", s)?
                };
                Ok(Self::Fixed(v))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub problem: ProblemKind,
    pub k: usize,
    /// Refinement levels `ℓ` of the `2^ℓ × 2^ℓ` unit-square meshes.
    pub levels: Vec<usize>,
    /// Cells per side for a single-mesh run.
    pub n: usize,
    /// `None` uses the problem default.
    pub eps: Option<f64>,
    pub tau: f64,
    pub dt: DtRule,
    pub t_final: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_iter: usize,
    pub snapshots: Vec<f64>,
    pub out: PathBuf,
    pub threads: usize,
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|e| Error::Config(format!("{key}: bad number {v:?}: {e}")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|e| Error::Config(format!("{key}: bad integer {v:?}: {e}")))
}

fn parse_list<T>(key: &str, v: &str, item: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(key, s))
        .collect()
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        let base = Self {
            command,
            problem: ProblemKind::Example1,
            k: 0,
            levels: vec![1, 2, 3, 4, 5],
            n: 8,
            eps: None,
            tau: 1.0,
            dt: DtRule::Auto,
            t_final: 1.0,
            rtol: 1e-10,
            atol: 1e-12,
            max_iter: 50,
            snapshots: Vec::new(),
            out: PathBuf::from("out"),
            threads: 1,
        };
        match command {
            Command::Convergence => base,
            Command::Simulate => Self {
                problem: ProblemKind::Example2,
                n: 50,
                dt: DtRule::Fixed(1.0 / 500.0),
                snapshots: vec![0.01, 0.4, 0.7, 1.0],
                ..base
            },
            Command::ProjectCheck => Self {
                levels: vec![2, 3, 4, 5],
                t_final: 0.5,
                ..base
            },
        }
    }

    /// Defaults of `command` overridden by the keys in `text`.
    pub fn parse(command: Command, text: &str) -> Result<Self> {
        let mut c = Self::defaults(command);
        c.apply(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn apply(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key = value, got {raw:?}",
                    no + 1
                ))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "command" => self.command = v.parse()?,
            "problem" => {
                self.problem = match v {
                    "example1" => ProblemKind::Example1,
                    "example2" => ProblemKind::Example2,
                    _ => return Err(Error::Config(format!("unknown problem {v:?}"))),
                }
            }
            "k" => self.k = parse_usize(key, v)?,
            "levels" => self.levels = parse_list(key, v, parse_usize)?,
            "n" => self.n = parse_usize(key, v)?,
            "eps" => {
                self.eps = if v == "auto" {
                    None
                } else {
                    Some(parse_f64(key, v)?)
                }
            }
            "tau" => self.tau = parse_f64(key, v)?,
            "dt" => self.dt = v.parse()?,
            "t_final" => self.t_final = parse_f64(key, v)?,
            "rtol" => self.rtol = parse_f64(key, v)?,
            "atol" => self.atol = parse_f64(key, v)?,
            "max_iter" => self.max_iter = parse_usize(key, v)?,
            "snapshots" => self.snapshots = parse_list(key, v, parse_f64)?,
            "out" => self.out = PathBuf::from(v),
            "threads" => self.threads = parse_usize(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn eps(&self) -> f64 {
        self.eps.unwrap_or_else(|| self.problem.default_eps())
    }

    pub fn coupling(&self) -> CouplingConfig {
        CouplingConfig {
            rtol: self.rtol,
            atol: self.atol,
            max_iter: self.max_iter,
        }
    }

    /// Mesh size `√2 / n` of an `n × n` structured mesh.
    pub fn h_of(n: usize) -> f64 {
        std::f64::consts::SQRT_2 / n as f64
    }

    pub fn time_grid(&self, n: usize) -> Result<TimeGrid> {
        TimeGrid::new(self.t_final, self.dt.resolve(Self::h_of(n), self.k))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k > 2 {
            return bad(format!(
                "k = {} is outside the supported range 0..=2",
                self.k
            ));
        }
        if self.levels.is_empty() || self.levels.iter().any(|&l| l > 10) {
            return bad(format!(
                "levels must be a nonempty list within 0..=10, got {:?}",
                self.levels
            ));
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if let Some(e) = self.eps {
            if !(e > 0.0) {
                return bad(format!("eps must be positive, got {e}"));
            }
        }
        if !(self.tau > 0.0) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if let DtRule::Fixed(dt) = self.dt {
            if !(dt > 0.0) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.t_final > 0.0) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        self.coupling().validate()?;
        if self.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        if self.command == Command::Simulate {
            let grid = self.time_grid(self.n)?;
            for &t in &self.snapshots {
                if grid.step_of(t).is_none() {
                    return bad(format!(
                        "snapshot time {t} is not on the time grid (dt = {})",
                        grid.dt
                    ));
                }
            }
        }
        Ok(())
    }

    /// Canonical text form; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let cmd = match self.command {
            Command::Convergence => "convergence",
            Command::Simulate => "simulate",
            Command::ProjectCheck => "project-check",
        };
        writeln!(s, "command = {cmd}").unwrap();
        writeln!(s, "problem = {}", self.problem.name()).unwrap();
        writeln!(s, "k = {}", self.k).unwrap();
        writeln!(s, "levels = {}", join(&self.levels)).unwrap();
        writeln!(s, "n = {}", self.n).unwrap();
        match self.eps {
            Some(e) => writeln!(s, "eps = {e}").unwrap(),
            None => writeln!(s, "eps = auto").unwrap(),
        }
        writeln!(s, "tau = {}", self.tau).unwrap();
        writeln!(s, "dt = {}", self.dt.to_text()).unwrap();
        writeln!(s, "t_final = {}", self.t_final).unwrap();
        writeln!(s, "rtol = {}", self.rtol).unwrap();
        writeln!(s, "atol = {}", self.atol).unwrap();
        writeln!(s, "max_iter = {}", self.max_iter).unwrap();
        writeln!(s, "snapshots = {}", join(&self.snapshots)).unwrap();
        writeln!(s, "out = {}", self.out.display()).unwrap();
        writeln!(s, "threads = {}", self.threads).unwrap();
        s
    }
}
