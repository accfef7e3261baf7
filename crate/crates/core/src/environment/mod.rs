//! Simulated concrete wall and the detach-probe-move search episode.
//!
//! Coordinates are millimetres in the wall plane, measured from the hole
//! center. Forces are newtons, moments newton-millimetres.
//!
//! Moment sign convention, shared with [`crate::strategies::moment`]:
//!
//! | peg offset | contact force | moment    | tilt toward |
//! |------------|---------------|-----------|-------------|
//! | `-y`       | `fy > 0`      | `mx > 0`  | `+Y`        |
//! | `+y`       | `fy < 0`      | `mx < 0`  | `-Y`        |
//! | `+x`       | `fx < 0`      | `my > 0`  | `-X`        |
//! | `-x`       | `fx > 0`      | `my < 0`  | `+X`        |
//!
//! so the tilt direction is `(-my, mx)`. `moment_bias_y` adds a constant
//! positive `mx`, i.e. a tilt toward `+Y` independent of the contact.

mod contact;
mod episode;
mod reward;
mod wall;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use contact::{
    contact_response, is_inserted, probe, ContactParams, ContactResult, PegKind, PegSpec,
    NOMINAL_CLEARANCE_MM,
};
pub use episode::{EpisodeState, Outcome, SearchEnv, StepResult};
pub use reward::compute_reward;
pub use wall::{make_wall, GeometryRanges, HoleSpec, WallModel, WALL_SCHEMA, WALL_SCHEMA_VERSION};

pub const OBS_DIM: usize = 6;
pub const N_ACTIONS: usize = 4;

/// Scale applied to forces before they enter the network.
pub const FORCE_SCALE_N: f64 = 30.0;
/// Scale applied to moments before they enter the network.
pub const MOMENT_SCALE_NMM: f64 = 50.0;
/// Scale applied to the displacement before it enters the network.
pub const DISPLACEMENT_SCALE_MM: f64 = 10.0;

/// Radius of the circle the eight named initial positions lie on.
pub const INIT_RADIUS_MM: f64 = 3.0;

/// Angle (degrees, counter-clockwise from `+X`) of each named initial
/// position, index 1 first. Positions 3 and 4 are bottom-left and
/// bottom-right; position 1 is held out of training.
pub const INIT_POSITION_ANGLES_DEG: [f64; 8] = [135.0, 45.0, 225.0, 315.0, 90.0, 270.0, 180.0, 0.0];

/// Offset of named initial position `index` (1..=8) from the hole center.
pub fn init_position(index: usize) -> Result<[f64; 2]> {
    if !(1..=INIT_POSITION_ANGLES_DEG.len()).contains(&index) {
        return Err(Error::config(format!(
            "initial position index {index} outside 1..=8"
        )));
    }
    let a = INIT_POSITION_ANGLES_DEG[index - 1].to_radians();
    Ok([INIT_RADIUS_MM * a.cos(), INIT_RADIUS_MM * a.sin()])
}

/// One detach-and-move step of `D_xy` along a wall axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
}

impl Action {
    pub const ALL: [Action; N_ACTIONS] = [Action::PlusX, Action::MinusX, Action::PlusY, Action::MinusY];

    /// Network output index.
    pub fn index(self) -> usize {
        match self {
            Action::PlusX => 0,
            Action::MinusX => 1,
            Action::PlusY => 2,
            Action::MinusY => 3,
        }
    }

    pub fn from_index(i: usize) -> Result<Action> {
        Action::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::usage(format!("action index {i} outside 0..{N_ACTIONS}")))
    }

    /// Unit lattice step.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Action::PlusX => (1, 0),
            Action::MinusX => (-1, 0),
            Action::PlusY => (0, 1),
            Action::MinusY => (0, -1),
        }
    }

    pub fn from_delta(delta: (i64, i64)) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.delta() == delta)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::PlusX => "+X",
            Action::MinusX => "-X",
            Action::PlusY => "+Y",
            Action::MinusY => "-Y",
        })
    }
}

/// Which six measurements the network sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateVariant {
    /// `[Fx, Fy, Fz, Mx, My, Dz]`
    S1,
    /// `[Fx, Fy, Fz, Mx, My, Mz]`
    S2,
}

impl StateVariant {
    pub fn input_labels(self) -> [&'static str; OBS_DIM] {
        match self {
            StateVariant::S1 => ["Fx", "Fy", "Fz", "Mx", "My", "Dz"],
            StateVariant::S2 => ["Fx", "Fy", "Fz", "Mx", "My", "Mz"],
        }
    }

    pub fn code(self) -> u8 {
        match self {
            StateVariant::S1 => 1,
            StateVariant::S2 => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<StateVariant> {
        match code {
            1 => Some(StateVariant::S1),
            2 => Some(StateVariant::S2),
            _ => None,
        }
    }
}

impl fmt::Display for StateVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateVariant::S1 => "s1",
            StateVariant::S2 => "s2",
        })
    }
}

impl FromStr for StateVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(StateVariant::S1),
            "s2" => Ok(StateVariant::S2),
            other => Err(Error::config(format!(
                "unknown state variant {other:?}, expected s1 or s2"
            ))),
        }
    }
}

/// Normalized network input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub values: [f64; OBS_DIM],
    pub variant: StateVariant,
}

impl Observation {
    pub fn from_contact(c: &ContactResult, variant: StateVariant) -> Observation {
        let f = |v: f64| (v / FORCE_SCALE_N).clamp(-1.0, 1.0);
        let m = |v: f64| (v / MOMENT_SCALE_NMM).clamp(-1.0, 1.0);
        let last = match variant {
            StateVariant::S1 => (c.dz / DISPLACEMENT_SCALE_MM).clamp(-1.0, 1.0),
            StateVariant::S2 => m(c.mz),
        };
        Observation {
            values: [f(c.fx), f(c.fy), f(c.fz), m(c.mx), m(c.my), last],
            variant,
        }
    }
}

/// Episode, probe and noise parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    /// Insertion force threshold `F_z,th`.
    pub fz_threshold_n: f64,
    /// Insertion displacement threshold `D_z,th`.
    pub dz_threshold_mm: f64,
    /// Lateral step `D_xy`.
    pub dxy_mm: f64,
    /// Boundary `D`: the episode ends once the peg is farther than this from the hole.
    pub distance_limit_mm: f64,
    /// Enforce the boundary; the blind spiral runs without it.
    pub boundary_exit: bool,
    pub k_max: usize,
    /// Detach offset `P_z,init`. Pressing from here onto the flat surface
    /// travels exactly this far, so it is also the off-chamfer displacement.
    pub pz_init_mm: f64,
    pub r_foundhole: f64,
    pub noise: bool,
    pub noise_sigma_force_n: f64,
    pub noise_sigma_moment_nmm: f64,
    pub moment_bias_y_nmm: f64,
    pub step_time_s: f64,
    pub contact: ContactParams,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            fz_threshold_n: 20.0,
            dz_threshold_mm: 6.0,
            dxy_mm: 1.0,
            distance_limit_mm: 4.0,
            boundary_exit: true,
            k_max: 100,
            pz_init_mm: 1.0,
            r_foundhole: 100.0,
            noise: true,
            noise_sigma_force_n: 3.0,
            noise_sigma_moment_nmm: 5.0,
            moment_bias_y_nmm: 25.0,
            step_time_s: 1.2,
            contact: ContactParams::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fz_threshold_n", self.fz_threshold_n),
            ("dz_threshold_mm", self.dz_threshold_mm),
            ("dxy_mm", self.dxy_mm),
            ("distance_limit_mm", self.distance_limit_mm),
            ("r_foundhole", self.r_foundhole),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("pz_init_mm", self.pz_init_mm),
            ("noise_sigma_force_n", self.noise_sigma_force_n),
            ("noise_sigma_moment_nmm", self.noise_sigma_moment_nmm),
            ("step_time_s", self.step_time_s),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !self.moment_bias_y_nmm.is_finite() {
            return Err(Error::config("moment_bias_y_nmm must be finite"));
        }
        if self.k_max == 0 {
            return Err(Error::config("k_max must be at least 1"));
        }
        self.contact.validate()
    }

    /// Simulated wall-clock time of an episode.
    pub fn sim_time_s(&self, steps: usize) -> f64 {
        steps as f64 * self.step_time_s
    }
}
