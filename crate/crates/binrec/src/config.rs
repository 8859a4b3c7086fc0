//! Experiment configuration: flat `key = value` lines, `#` starts a comment.
//!
//! A config names a preset with `scenario = <id>` and may override any key.
//! Every field is echoed into the scenario report.

use std::path::{Path, PathBuf};

use binrec_core::solver::{Constraint, SolverConfig};
use serde::Serialize;

use crate::error::{input, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// One generate → measure → reconstruct → compare pass.
    Single,
    /// Miss counts over a grid of noise levels and mask sizes.
    Sweep,
    /// Solve time as the mask grows past the minimal size.
    Timing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseDomain {
    /// Added to the (blurred) samples.
    Spatial,
    /// Added to the Fourier measurements.
    Measurement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    /// Bregman iteration, stop on the data misfit.
    Exact,
    /// No add-back, stop when the projection stalls; blurred runs weight
    /// frequencies by `|K|²`.
    Noisy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSettings {
    pub mode: SolverMode,
    pub lambda: Option<f64>,
    pub tol: Option<f64>,
    /// Misfit tolerance relative to `max(1, ‖b‖²)`; `tol` wins when both are set.
    pub rel_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub step_tol: Option<f64>,
    #[serde(serialize_with = "ser_constraint")]
    pub constraint: Constraint,
}

fn ser_constraint<S: serde::Serializer>(c: &Constraint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(match c {
        Constraint::Box => "box",
        Constraint::NonNeg => "nonneg",
    })
}

impl SolverSettings {
    pub fn exact() -> Self {
        SolverSettings { mode: SolverMode::Exact, lambda: None, tol: None, rel_tol: None, max_iters: None, step_tol: None, constraint: Constraint::Box }
    }

    pub fn noisy() -> Self {
        SolverSettings { mode: SolverMode::Noisy, ..Self::exact() }
    }

    /// Mode defaults with the explicit overrides applied, for data of energy `‖b‖²`.
    pub fn for_problem(&self, data_energy: f64) -> SolverConfig {
        let mut c = self.to_config();
        if let (None, Some(r)) = (self.tol, self.rel_tol) {
            c.tol = Some(r * data_energy.max(1.0));
        }
        c
    }

    /// Mode defaults with the explicit overrides applied.
    pub fn to_config(&self) -> SolverConfig {
        let base = match self.mode {
            SolverMode::Exact => SolverConfig::default(),
            SolverMode::Noisy => SolverConfig::noisy(),
        };
        SolverConfig {
            lambda: self.lambda.unwrap_or(base.lambda),
            tol: self.tol.or(base.tol),
            max_iters: self.max_iters.unwrap_or(base.max_iters),
            step_tol: self.step_tol.or(base.step_tol),
            constraint: self.constraint,
            ..base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub kind: ScenarioKind,
    /// Source spec, see [`crate::source`].
    pub signal: String,
    pub dim: usize,
    pub n: usize,
    pub mask: String,
    /// Gaussian blur width in pixels; 0 means no blur.
    pub blur_sigma: f64,
    pub hsize: Option<usize>,
    pub noise_std: f64,
    pub noise_domain: NoiseDomain,
    pub seed: u64,
    pub trials: usize,
    /// Sweep rows.
    pub noise_levels: Vec<f64>,
    /// Sweep columns and timing steps: mask `low:m` (1D) or `disk:m` (2D).
    pub mask_sizes: Vec<usize>,
    pub solver: SolverSettings,
    pub out_dir: Option<PathBuf>,
}

/// Bars and spaces of module widths 1 to 4, 15 of each, 80 modules.
pub const BARCODE_PATTERN: &str = "11001110000101111000110011110000111100110011110100100010001111000011110000111100";

pub const PRESETS: &[&str] = &["barcode-exact", "shape-exact", "barcode-blur", "1d-noise-0.03", "fig5-sweep", "mask-timing"];

impl ExperimentConfig {
    fn base(id: &str) -> Self {
        ExperimentConfig {
            scenario: id.to_string(),
            kind: ScenarioKind::Single,
            signal: "intervals:5".into(),
            dim: 1,
            n: 100,
            mask: "full".into(),
            blur_sigma: 0.0,
            hsize: None,
            noise_std: 0.0,
            noise_domain: NoiseDomain::Spatial,
            seed: 1,
            trials: 1,
            noise_levels: Vec::new(),
            mask_sizes: Vec::new(),
            solver: SolverSettings::exact(),
            out_dir: None,
        }
    }

    pub fn preset(id: &str) -> Result<Self> {
        let mut c = Self::base(id);
        match id {
            "custom" => {}
            "barcode-exact" => {
                c.signal = format!("barcode:{BARCODE_PATTERN}");
                c.n = 400;
                c.mask = "low:16".into();
            }
            "shape-exact" => {
                c.signal = "disk:0.3".into();
                c.dim = 2;
                c.n = 200;
                c.mask = "disk:5".into();
            }
            "barcode-blur" => {
                c.signal = format!("barcode:{BARCODE_PATTERN}");
                c.n = 400;
                c.blur_sigma = 5.0;
            }
            "1d-noise-0.03" => {
                c.blur_sigma = 5.0;
                c.noise_std = 0.03;
                c.solver = SolverSettings::noisy();
            }
            "fig5-sweep" => {
                c.kind = ScenarioKind::Sweep;
                c.blur_sigma = 5.0;
                c.trials = 100;
                c.noise_levels = (1..=9).map(|i| i as f64 / 100.0).collect();
                c.mask_sizes = (5..=14).collect();
                c.solver = SolverSettings::noisy();
            }
            "mask-timing" => {
                c.kind = ScenarioKind::Timing;
                c.signal = "intervals:8".into();
                c.n = 256;
                c.trials = 20;
                c.mask_sizes = (8..=18).collect();
                c.solver.rel_tol = Some(1e-14);
            }
            _ => return Err(input(format!("unknown scenario {id:?} (presets: {}, custom)", PRESETS.join(", ")))),
        }
        Ok(c)
    }

    /// Applies one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("bad number {v:?}"))
        }
        fn list<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
            v.split(',').map(|x| num(x.trim())).collect()
        }
        fn opt<T: std::str::FromStr>(v: &str) -> std::result::Result<Option<T>, String> {
            if v == "default" {
                Ok(None)
            } else {
                num(v).map(Some)
            }
        }
        match key {
            "scenario" => return Err("scenario must be the first key".into()),
            "kind" => {
                self.kind = match value {
                    "single" => ScenarioKind::Single,
                    "sweep" => ScenarioKind::Sweep,
                    "timing" => ScenarioKind::Timing,
                    _ => return Err(format!("bad kind {value:?} (single, sweep, timing)")),
                }
            }
            "signal" => self.signal = value.to_string(),
            "dim" => self.dim = num(value)?,
            "n" => self.n = num(value)?,
            "mask" => self.mask = value.to_string(),
            "blur_sigma" => self.blur_sigma = num(value)?,
            "hsize" => self.hsize = opt(value)?,
            "noise_std" => self.noise_std = num(value)?,
            "noise_domain" => {
                self.noise_domain = match value {
                    "spatial" => NoiseDomain::Spatial,
                    "measurement" => NoiseDomain::Measurement,
                    _ => return Err(format!("bad noise_domain {value:?} (spatial, measurement)")),
                }
            }
            "seed" => self.seed = num(value)?,
            "trials" => self.trials = num(value)?,
            "noise_levels" => self.noise_levels = list(value)?,
            "mask_sizes" => self.mask_sizes = list(value)?,
            "solver" => {
                self.solver.mode = match value {
                    "exact" => SolverMode::Exact,
                    "noisy" => SolverMode::Noisy,
                    _ => return Err(format!("bad solver {value:?} (exact, noisy)")),
                }
            }
            "lambda" => self.solver.lambda = opt(value)?,
            "tol" => self.solver.tol = opt(value)?,
            "rel_tol" => self.solver.rel_tol = opt(value)?,
            "max_iters" => self.solver.max_iters = opt(value)?,
            "step_tol" => self.solver.step_tol = opt(value)?,
            "constraint" => self.solver.constraint = parse_constraint(value)?,
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Parses a config file body. The first key must be `scenario`.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg: Option<ExperimentConfig> = None;
        for (i, raw) in text.lines().enumerate() {
            let err = |msg: String| Error::Parse { path: path.to_path_buf(), line: i + 1, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let (k, v) = (k.trim(), v.trim());
            match (&mut cfg, k) {
                (None, "scenario") => cfg = Some(Self::preset(v).map_err(|e| err(e.to_string()))?),
                (None, _) => return Err(err("the first key must be scenario".into())),
                (Some(c), _) => c.set(k, v).map_err(err)?,
            }
        }
        let cfg = cfg.ok_or_else(|| Error::Parse { path: path.to_path_buf(), line: 0, msg: "no scenario key".into() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(input("dim must be 1 or 2"));
        }
        if !(self.blur_sigma >= 0.0) || !(self.noise_std >= 0.0) {
            return Err(input("blur_sigma and noise_std must be nonnegative"));
        }
        if self.solver.rel_tol.is_some_and(|r| !(r > 0.0)) {
            return Err(input("rel_tol must be positive"));
        }
        if self.trials == 0 {
            return Err(input("trials must be at least 1"));
        }
        match self.kind {
            ScenarioKind::Sweep if self.noise_levels.is_empty() || self.mask_sizes.is_empty() => {
                Err(input("a sweep needs noise_levels and mask_sizes"))
            }
            ScenarioKind::Sweep if self.noise_levels.iter().any(|s| !(*s >= 0.0)) => Err(input("noise levels must be nonnegative")),
            ScenarioKind::Timing if self.mask_sizes.len() < 2 => Err(input("a timing run needs at least two mask_sizes")),
            _ => Ok(self.solver.to_config().validate()?),
        }
    }
}

pub fn parse_constraint(s: &str) -> std::result::Result<Constraint, String> {
    match s {
        "box" => Ok(Constraint::Box),
        "nonneg" => Ok(Constraint::NonNeg),
        _ => Err(format!("bad constraint {s:?} (box, nonneg)")),
    }
}
