//! TOML run configuration shared by the command-line subcommands.
//!
//! Every section is optional. Errors carry the line of the offending key when
//! it can be located in the source text.

use serde::{Deserialize, Serialize};

use crate::dmc::DmcConfig;
use crate::error::{CullError, Result};
use crate::model::{InteractionSpec, Method, ScheduleSpec, WellSpec};
use crate::scan::{Limit, PhaseOptions, DEFAULT_ETA};

/// Either an explicit list or `count` evenly spaced values from `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn range(start: f64, stop: f64, count: usize) -> Self {
        Grid::Range { start, stop, count }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                _ => (0..*count)
                    .map(|i| start + (stop - start) * i as f64 / (*count - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WellSection {
    pub depth: f64,
    pub width: f64,
    pub box_size: f64,
}

impl Default for WellSection {
    fn default() -> Self {
        WellSection {
            depth: 30.0,
            width: 1.0,
            box_size: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InteractionSection {
    pub g: Option<f64>,
    pub scattering_length: Option<f64>,
    pub transverse_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub method: Method,
    pub n_max: usize,
    /// Excited levels per particle number in addition to the ground level.
    pub excitations: usize,
    pub depths: Grid,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            method: Method::Tonks,
            n_max: 5,
            excitations: 0,
            depths: Grid::range(0.5, 100.0, 200),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationalSection {
    pub n: usize,
    pub depths: Grid,
}

impl Default for VariationalSection {
    fn default() -> Self {
        VariationalSection {
            n: 3,
            depths: Grid::range(1.5, 20.0, 20),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSection {
    pub method: Method,
    pub g: Grid,
    pub depths: Grid,
    pub options: PhaseOptions,
}

impl Default for PhaseSection {
    fn default() -> Self {
        PhaseSection {
            method: Method::Tonks,
            g: Grid::range(0.1, 10.0, 100),
            depths: Grid::range(0.0, 100.0, 401),
            options: PhaseOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CullSection {
    /// Backend for the staircase.
    pub method: Method,
    /// Descending depth path for the staircase.
    pub path: Grid,
    pub schedule: ScheduleSpec,
    pub n_target: usize,
    pub limit: Limit,
    pub eta: f64,
    pub samples: usize,
}

impl Default for CullSection {
    fn default() -> Self {
        CullSection {
            method: Method::Tonks,
            path: Grid::range(50.0, 0.5, 100),
            schedule: ScheduleSpec {
                initial_depth: 50.0,
                shape: crate::model::ScheduleShape::Exponential { tau: 100.0 },
            },
            n_target: 1,
            limit: Limit::Tonks,
            eta: DEFAULT_ETA,
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DmcSection {
    pub n: usize,
    pub run: DmcConfig,
}

impl Default for DmcSection {
    fn default() -> Self {
        DmcSection {
            n: 2,
            run: DmcConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagSection {
    pub modes: usize,
}

impl Default for DiagSection {
    fn default() -> Self {
        DiagSection {
            modes: crate::exact_diag::DEFAULT_MODES,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub well: WellSection,
    pub interaction: InteractionSection,
    pub spectrum: SpectrumSection,
    pub variational: VariationalSection,
    pub phase: PhaseSection,
    pub cull: CullSection,
    pub dmc: DmcSection,
    pub diag: DiagSection,
}

/// 1-based line of the first `key = ...` inside `[section]` (or a dotted
/// sub-table of it).
fn locate(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        let in_section = current == section || current.starts_with(&format!("{section}."));
        if in_section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn line_of_offset(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

impl RunConfig {
    /// Parses and validates a configuration file's contents.
    pub fn from_toml(source: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(source).map_err(|e| CullError::Config {
            line: e.span().map(|s| line_of_offset(source, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate(source)?;
        Ok(cfg)
    }

    fn validate(&self, source: &str) -> Result<()> {
        let fail = |section: &str, key: &str, err: CullError| {
            let message = match err {
                CullError::InvalidParameter { name, reason } => format!("{section}.{name}: {reason}"),
                other => other.to_string(),
            };
            Err(CullError::Config {
                line: locate(source, section, key),
                message,
            })
        };
        if let Err(e) = self.well_spec() {
            let key = match &e {
                CullError::InvalidParameter { name, .. } => *name,
                _ => "depth",
            };
            return fail("well", key, e);
        }
        if let Err(e) = self.interaction_spec() {
            return fail("interaction", "g", e);
        }
        if let Err(e) = self.dmc.run.validate() {
            let key = match &e {
                CullError::InvalidParameter { name, .. } => *name,
                _ => "walkers",
            };
            return fail("dmc", key, e);
        }
        if let Err(e) = self.cull.schedule.validate() {
            return fail("cull", "initial_depth", e);
        }
        let grids = [
            ("spectrum", "depths", &self.spectrum.depths),
            ("variational", "depths", &self.variational.depths),
            ("phase", "g", &self.phase.g),
            ("phase", "depths", &self.phase.depths),
            ("cull", "path", &self.cull.path),
        ];
        for (section, key, grid) in grids {
            let v = grid.values();
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return fail(section, key, CullError::param("grid", "need at least one finite value"));
            }
        }
        if !(self.cull.eta > 0.0) {
            return fail("cull", "eta", CullError::param("eta", "need eta > 0"));
        }
        if self.diag.modes == 0 {
            return fail("diag", "modes", CullError::param("modes", "need at least one mode"));
        }
        Ok(())
    }

    pub fn well_spec(&self) -> Result<WellSpec> {
        WellSpec::with_box(self.well.depth, self.well.width, self.well.box_size)
    }

    /// Coupling from `g`, or from the scattering length and transverse width.
    pub fn interaction_spec(&self) -> Result<InteractionSpec> {
        let i = &self.interaction;
        match (i.g, i.scattering_length, i.transverse_width) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(CullError::param(
                "g",
                "give either g or scattering_length with transverse_width, not both",
            )),
            (Some(g), None, None) => InteractionSpec::new(g),
            (None, Some(a), Some(w)) => InteractionSpec::from_scattering(a, w),
            (None, None, None) => InteractionSpec::new(1.0),
            _ => Err(CullError::param(
                "g",
                "scattering_length and transverse_width must be given together",
            )),
        }
    }
}
