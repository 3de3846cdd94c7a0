//! Run configuration: strict JSON with field-path error reporting.

use std::path::{Path, PathBuf};

use invasionlab_core::{Component, Grid, Params, PerturbationEvent, SchemeConfig, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: Params,
    pub grid: Grid,
    pub scheme: SchemeConfig,
    pub init: InitSpec,
    #[serde(default)]
    pub events: Vec<PerturbationEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitSpec {
    Zero,
    /// `amplitude·exp(−((x − center)/width)²)` added to one component.
    Bump {
        center: f64,
        width: f64,
        amplitude: f64,
        #[serde(default = "default_component")]
        component: Component,
    },
    /// Uniform noise in `[−amplitude, amplitude]` on `u`, restricted to
    /// `window` when given.
    Noise {
        amplitude: f64,
        seed: u64,
        #[serde(default)]
        window: Option<[f64; 2]>,
    },
    /// Snapshot file written by `simulate`; relative paths resolve against
    /// the config's directory.
    File { path: PathBuf },
}

fn default_component() -> Component {
    Component::U
}

/// Parses JSON into `T`, reporting the path of the offending field.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(if path.is_empty() { ".".to_string() } else { path }, e.into_inner())
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(path.display().to_string(), e))?;
    parse_json(&text)
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let cfg: RunConfig = read_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let p = &self.params;
        for (name, v) in [("params.a", p.a), ("params.gamma", p.gamma), ("params.eps", p.eps)] {
            if !v.is_finite() {
                return Err(CliError::config(name, "must be finite"));
            }
        }
        p.validate().map_err(|e| CliError::config("params", e))?;
        let g = &self.grid;
        if g.n < 3 {
            return Err(CliError::config("grid.n", format!("needs n >= 3, got {}", g.n)));
        }
        g.validate().map_err(|e| CliError::config("grid", e))?;
        let s = &self.scheme;
        if !(s.dt > 0.0) || !s.dt.is_finite() {
            return Err(CliError::config("scheme.dt", format!("dt = {} must be positive", s.dt)));
        }
        if s.record_every == 0 {
            return Err(CliError::config("scheme.record_every", "must be >= 1"));
        }
        if !(s.t_end >= 0.0) || !s.t_end.is_finite() {
            return Err(CliError::config("scheme.t_end", "must be finite and >= 0"));
        }
        if !s.frame_speed.is_finite() {
            return Err(CliError::config("scheme.frame_speed", "must be finite"));
        }
        s.validate(p).map_err(|e| CliError::config("scheme.dt", e))?;
        match &self.init {
            InitSpec::Bump { width, .. } if !(*width > 0.0) => {
                return Err(CliError::config("init.width", "must be positive"));
            }
            InitSpec::Noise { amplitude, .. } if !(amplitude.is_finite() && *amplitude >= 0.0) => {
                return Err(CliError::config("init.amplitude", "must be finite and >= 0"));
            }
            _ => {}
        }
        for (i, e) in self.events.iter().enumerate() {
            if !(e.width > 0.0) {
                return Err(CliError::config(format!("events[{i}].width"), "must be positive"));
            }
            if !(e.t_fire >= 0.0) {
                return Err(CliError::config(format!("events[{i}].t_fire"), "must be >= 0"));
            }
            if i > 0 && e.t_fire < self.events[i - 1].t_fire {
                return Err(CliError::config(format!("events[{i}].t_fire"), "events must be sorted by t_fire"));
            }
        }
        Ok(())
    }

    /// Initial state; `seed` overrides the noise seed of the config.
    pub fn initial_state(&self, base_dir: &Path, seed: Option<u64>) -> CliResult<State> {
        let g = self.grid;
        match &self.init {
            InitSpec::Zero => Ok(State::zeros(g)),
            InitSpec::Bump { center, width, amplitude, component } => {
                let mut s = State::zeros(g);
                PerturbationEvent { t_fire: 0.0, center: *center, width: *width, amplitude: *amplitude, component: *component }
                    .apply(&mut s);
                Ok(s)
            }
            InitSpec::Noise { amplitude, seed: s0, window } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(*s0));
                let mut s = State::zeros(g);
                for i in 0..g.n {
                    let r: f64 = rng.random();
                    let inside = window.map_or(true, |[lo, hi]| g.x(i) >= lo && g.x(i) <= hi);
                    if inside {
                        s.u[i] = amplitude * (2.0 * r - 1.0);
                    }
                }
                Ok(s)
            }
            InitSpec::File { path } => {
                let p = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                let s = io::read_snapshot(&p).map_err(|e| match e {
                    CliError::Io { source, .. } => CliError::config("init.path", source),
                    other => other,
                })?;
                if s.grid != g {
                    return Err(CliError::config("init.path", "snapshot grid differs from config grid"));
                }
                Ok(State { t: 0.0, ..s })
            }
        }
    }
}
