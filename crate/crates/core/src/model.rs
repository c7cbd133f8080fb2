//! Shared domain types in the dimensionless system ħ = m = L = 1.
//!
//! Energies are measured from the top of the well: inside `|x| <= L/2` the
//! potential is `-V0`, outside it is zero, and a hard wall sits at `|x| = D/2`.

use serde::{Deserialize, Serialize};

use crate::error::{CullError, Result};

/// Default ratio of the enclosing hard-wall box to the well width.
pub const DEFAULT_BOX_RATIO: f64 = 10.0;

/// Smallest allowed ratio `D / L`.
pub const MIN_BOX_RATIO: f64 = 4.0;

/// Square well of depth `depth` and width `width`, centred in a hard-wall box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellSpec {
    pub depth: f64,
    #[serde(default = "unit_width")]
    pub width: f64,
    #[serde(default = "default_box")]
    pub box_size: f64,
}

fn unit_width() -> f64 {
    1.0
}

fn default_box() -> f64 {
    DEFAULT_BOX_RATIO
}

impl WellSpec {
    /// Unit-width well in the default `D = 10 L` box.
    pub fn new(depth: f64) -> Result<Self> {
        Self::with_box(depth, 1.0, DEFAULT_BOX_RATIO)
    }

    pub fn with_box(depth: f64, width: f64, box_size: f64) -> Result<Self> {
        let well = WellSpec { depth, width, box_size };
        well.validate()?;
        Ok(well)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.depth >= 0.0) || !self.depth.is_finite() {
            return Err(CullError::param("depth", format!("need V0 >= 0, got {}", self.depth)));
        }
        if !(self.width > 0.0) || !self.width.is_finite() {
            return Err(CullError::param("width", format!("need L > 0, got {}", self.width)));
        }
        if !(self.box_size >= MIN_BOX_RATIO * self.width) || !self.box_size.is_finite() {
            return Err(CullError::param(
                "box_size",
                format!(
                    "need D >= {MIN_BOX_RATIO} L, got D = {} with L = {}",
                    self.box_size, self.width
                ),
            ));
        }
        Ok(())
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.width
    }

    pub fn half_box(&self) -> f64 {
        0.5 * self.box_size
    }

    /// Potential energy at `x` (zero at the top of the well).
    pub fn potential(&self, x: f64) -> f64 {
        if x.abs() <= self.half_width() {
            -self.depth
        } else {
            0.0
        }
    }

    /// Same well, different depth.
    pub fn at_depth(&self, depth: f64) -> Self {
        WellSpec { depth, ..*self }
    }

    /// Same well, different box.
    pub fn with_box_size(&self, box_size: f64) -> Self {
        WellSpec { box_size, ..*self }
    }
}

/// Contact coupling `g` of the 1D delta interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub g: f64,
    /// 3D s-wave scattering length the coupling was derived from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scattering_length: Option<f64>,
    /// Transverse confinement width the coupling was derived from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transverse_width: Option<f64>,
}

impl InteractionSpec {
    pub fn new(g: f64) -> Result<Self> {
        let spec = InteractionSpec {
            g,
            scattering_length: None,
            transverse_width: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_scattering(a_s: f64, a_perp: f64) -> Result<Self> {
        Ok(InteractionSpec {
            g: g_from_scattering(a_s, a_perp)?,
            scattering_length: Some(a_s),
            transverse_width: Some(a_perp),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 0.0) || !self.g.is_finite() {
            return Err(CullError::param(
                "g",
                format!("only repulsive g >= 0 is supported, got {}", self.g),
            ));
        }
        Ok(())
    }
}

/// How the well depth is lowered in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum ScheduleShape {
    /// `V(t) = V0 exp(-t / tau)`.
    Exponential { tau: f64 },
    /// `V(t) = V0 - rate * t`.
    Linear { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub initial_depth: f64,
    #[serde(flatten)]
    pub shape: ScheduleShape,
}

impl ScheduleSpec {
    pub fn exponential(initial_depth: f64, tau: f64) -> Result<Self> {
        let s = ScheduleSpec {
            initial_depth,
            shape: ScheduleShape::Exponential { tau },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn linear(initial_depth: f64, rate: f64) -> Result<Self> {
        let s = ScheduleSpec {
            initial_depth,
            shape: ScheduleShape::Linear { rate },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.initial_depth > 0.0) {
            return Err(CullError::param("initial_depth", "must be positive"));
        }
        match self.shape {
            ScheduleShape::Exponential { tau } if !(tau > 0.0) => {
                Err(CullError::param("tau", format!("need tau > 0, got {tau}")))
            }
            ScheduleShape::Linear { rate } if !(rate > 0.0) => {
                Err(CullError::param("rate", format!("need rate > 0, got {rate}")))
            }
            _ => Ok(()),
        }
    }

    pub fn depth_at(&self, t: f64) -> f64 {
        match self.shape {
            ScheduleShape::Exponential { tau } => self.initial_depth * (-t / tau).exp(),
            ScheduleShape::Linear { rate } => (self.initial_depth - rate * t).max(0.0),
        }
    }

    /// Magnitude of dV/dt at time `t`.
    pub fn rate_at(&self, t: f64) -> f64 {
        match self.shape {
            ScheduleShape::Exponential { tau } => self.depth_at(t) / tau,
            ScheduleShape::Linear { rate } => rate,
        }
    }

    /// Time at which the depth first reaches `depth` (None if never).
    pub fn time_to_depth(&self, depth: f64) -> Option<f64> {
        if depth > self.initial_depth {
            return None;
        }
        match self.shape {
            ScheduleShape::Exponential { tau } if depth > 0.0 => Some(tau * (self.initial_depth / depth).ln()),
            ScheduleShape::Exponential { .. } => None,
            ScheduleShape::Linear { rate } => Some((self.initial_depth - depth) / rate),
        }
    }
}

/// Solver that produced a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tonks,
    Tf,
    Diag,
    Dmc,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Tonks => "tonks",
            Method::Tf => "tf",
            Method::Diag => "diag",
            Method::Dmc => "dmc",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = CullError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tonks" => Ok(Method::Tonks),
            "tf" => Ok(Method::Tf),
            "diag" => Ok(Method::Diag),
            "dmc" => Ok(Method::Dmc),
            other => Err(CullError::param("method", format!("unknown method `{other}`"))),
        }
    }
}

/// Smallest depth at which `n` particles are bound for coupling `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub g: f64,
    pub depth: f64,
    pub n: usize,
    pub method: Method,
    /// One-sigma style uncertainty; zero for closed forms.
    pub error: f64,
    /// Set when the method is outside its regime of validity at this point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// 1D coupling `g = 2 a_s / a_perp^2` (ħ = m = 1), valid for `a_perp >> a_s`.
pub fn g_from_scattering(a_s: f64, a_perp: f64) -> Result<f64> {
    if !(a_perp > 0.0) {
        return Err(CullError::param("a_perp", format!("must be positive, got {a_perp}")));
    }
    if a_s < 0.0 || !a_s.is_finite() {
        return Err(CullError::param("a_s", format!("must be non-negative, got {a_s}")));
    }
    if a_perp < 10.0 * a_s {
        return Err(CullError::param(
            "a_perp",
            format!("a_perp = {a_perp} is not >> a_s = {a_s} (need a_perp >= 10 a_s)"),
        ));
    }
    Ok(2.0 * a_s / (a_perp * a_perp))
}
