use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, tag};

pub const WALL_SCHEMA: &str = "pegsearch.wall";
pub const WALL_SCHEMA_VERSION: u32 = 1;

/// One drilled hole. Hole ids are 1-based and dense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleSpec {
    pub id: usize,
    pub center_xy_mm: [f64; 2],
    pub hole_radius_mm: f64,
    /// Radial width of the crumbled rim around the bore.
    pub chamfer_width_mm: f64,
    pub roughness_seed: u64,
    pub depth_available_mm: f64,
}

impl HoleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.hole_radius_mm.is_finite() && self.hole_radius_mm > 0.0) {
            return Err(Error::config(format!("hole {}: radius must be positive", self.id)));
        }
        if !(self.chamfer_width_mm.is_finite() && self.chamfer_width_mm >= 0.0) {
            return Err(Error::config(format!(
                "hole {}: chamfer width must be non-negative",
                self.id
            )));
        }
        if !(self.depth_available_mm.is_finite() && self.depth_available_mm > 0.0) {
            return Err(Error::config(format!("hole {}: depth must be positive", self.id)));
        }
        Ok(())
    }
}

/// Ranges the wall generator draws hole geometry from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryRanges {
    pub hole_radius_mm: f64,
    /// Inclusive `[min, max]` chamfer width.
    pub chamfer_width_mm: [f64; 2],
    pub depth_available_mm: f64,
    /// Center-to-center spacing of the generated hole grid.
    pub hole_pitch_mm: f64,
    pub holes_per_row: usize,
}

impl Default for GeometryRanges {
    fn default() -> Self {
        GeometryRanges {
            hole_radius_mm: 6.35,
            chamfer_width_mm: [2.5, 4.0],
            depth_available_mm: 60.0,
            hole_pitch_mm: 100.0,
            holes_per_row: 5,
        }
    }
}

impl GeometryRanges {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.chamfer_width_mm;
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
            return Err(Error::config(format!(
                "invalid chamfer width range [{lo}, {hi}]"
            )));
        }
        if !(self.hole_radius_mm.is_finite() && self.hole_radius_mm > 0.0) {
            return Err(Error::config("hole radius must be positive"));
        }
        if !(self.depth_available_mm.is_finite() && self.depth_available_mm > 0.0) {
            return Err(Error::config("available depth must be positive"));
        }
        if self.holes_per_row == 0 {
            return Err(Error::config("holes_per_row must be at least 1"));
        }
        Ok(())
    }
}

/// A set of holes with their geometry; serializes to the versioned wall file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallModel {
    pub schema: String,
    pub version: u32,
    pub seed: u64,
    pub geometry: GeometryRanges,
    pub holes: Vec<HoleSpec>,
}

/// Generates `n_holes` holes with chamfer widths drawn uniformly from the
/// configured range. The same `(n_holes, seed, ranges)` always yields the
/// same wall.
pub fn make_wall(n_holes: usize, seed: u64, ranges: &GeometryRanges) -> Result<WallModel> {
    if n_holes == 0 {
        return Err(Error::config("a wall needs at least one hole"));
    }
    ranges.validate()?;
    let mut rng = stream(seed, &[tag::WALL]);
    let [lo, hi] = ranges.chamfer_width_mm;
    let holes = (0..n_holes)
        .map(|i| {
            let u: f64 = rng.random();
            let chamfer = lo + (hi - lo) * u;
            let roughness_seed: u64 = rng.random();
            let (row, col) = (i / ranges.holes_per_row, i % ranges.holes_per_row);
            HoleSpec {
                id: i + 1,
                center_xy_mm: [
                    col as f64 * ranges.hole_pitch_mm,
                    row as f64 * ranges.hole_pitch_mm,
                ],
                hole_radius_mm: ranges.hole_radius_mm,
                chamfer_width_mm: chamfer,
                roughness_seed,
                depth_available_mm: ranges.depth_available_mm,
            }
        })
        .collect();
    Ok(WallModel {
        schema: WALL_SCHEMA.to_string(),
        version: WALL_SCHEMA_VERSION,
        seed,
        geometry: ranges.clone(),
        holes,
    })
}

impl WallModel {
    pub fn hole(&self, id: usize) -> Result<&HoleSpec> {
        id.checked_sub(1)
            .and_then(|i| self.holes.get(i))
            .filter(|h| h.id == id)
            .ok_or(Error::UnknownHole(id))
    }

    pub fn hole_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.holes.iter().map(|h| h.id)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != WALL_SCHEMA {
            return Err(Error::config(format!("not a wall file (schema {:?})", self.schema)));
        }
        if self.version != WALL_SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported wall schema version {}",
                self.version
            )));
        }
        if self.holes.is_empty() {
            return Err(Error::config("wall has no holes"));
        }
        for (i, h) in self.holes.iter().enumerate() {
            if h.id != i + 1 {
                return Err(Error::config(format!(
                    "hole ids must be 1..=n in order, found {} at position {}",
                    h.id,
                    i + 1
                )));
            }
            h.validate()?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("wall serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<WallModel> {
        let wall: WallModel =
            serde_json::from_str(text).map_err(|source| Error::Json { what: "wall file", source })?;
        wall.validate()?;
        Ok(wall)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<WallModel> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        WallModel::from_json(&text)
    }
}
