//! Probe response: what the force-torque sensor and the kinematic
//! displacement read when the peg is pressed toward the wall at one spot.
//!
//! Piecewise model in the radial offset `δ` from the hole center, with
//! funnel radius `δ_ins` and chamfer width `w`:
//!
//! - `δ ≤ δ_ins`: the peg drops in; `dz = D_z,th + margin`, small drag on `fz`.
//! - `δ_ins < δ ≤ δ_ins + w`: the peg rests on the chamfer. With engagement
//!   `e = 1 - (δ - δ_ins) / w`, `dz = P_z,init + dz_chamfer·e`, the lateral
//!   force `gain·e` points at the center and the tilt moments follow the
//!   table in the module docs.
//! - `δ > δ_ins + w`: flat concrete; `dz = P_z,init`, no lateral force.
//!
//! Outside the bore the probe stops when `|fz|` reaches `F_z,th`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::wall::{HoleSpec, WallModel};
use super::EnvConfig;
use crate::error::{Error, Result};
use crate::rng::{stream, tag, SimRng};

/// Radial clearance of the nominal 12 mm peg in a 12.7 mm hole.
pub const NOMINAL_CLEARANCE_MM: f64 = 0.35;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactParams {
    /// `δ_ins` for the nominal clearance.
    pub funnel_radius_mm: f64,
    pub dz_chamfer_mm: f64,
    /// How far past `D_z,th` the peg travels once it drops in.
    pub inserted_dz_margin_mm: f64,
    pub inserted_drag_n: f64,
    pub lateral_force_gain_n: f64,
    pub moment_gain_nmm: f64,
    /// Standard deviation of the per-spot surface perturbation on forces.
    pub roughness_force_n: f64,
    /// Standard deviation of the per-spot surface perturbation on moments.
    pub roughness_moment_nmm: f64,
    /// Spots closer than this share one roughness sample.
    pub roughness_cell_mm: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        ContactParams {
            funnel_radius_mm: 0.75,
            dz_chamfer_mm: 3.0,
            inserted_dz_margin_mm: 4.0,
            inserted_drag_n: 2.0,
            lateral_force_gain_n: 20.0,
            moment_gain_nmm: 30.0,
            roughness_force_n: 1.0,
            roughness_moment_nmm: 5.0,
            roughness_cell_mm: 0.05,
        }
    }
}

impl ContactParams {
    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("funnel_radius_mm", self.funnel_radius_mm),
            ("dz_chamfer_mm", self.dz_chamfer_mm),
            ("inserted_dz_margin_mm", self.inserted_dz_margin_mm),
            ("inserted_drag_n", self.inserted_drag_n),
            ("lateral_force_gain_n", self.lateral_force_gain_n),
            ("moment_gain_nmm", self.moment_gain_nmm),
            ("roughness_force_n", self.roughness_force_n),
            ("roughness_moment_nmm", self.roughness_moment_nmm),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.roughness_cell_mm.is_finite() && self.roughness_cell_mm > 0.0) {
            return Err(Error::config("roughness_cell_mm must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PegKind {
    Wedge,
    Pin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PegSpec {
    pub radius_mm: f64,
    pub kind: PegKind,
    /// Multiplier on the lateral force and moment response of the gripper.
    pub compliance: f64,
}

impl Default for PegSpec {
    fn default() -> Self {
        PegSpec::wedge()
    }
}

impl PegSpec {
    /// The anchor used for training.
    pub fn wedge() -> PegSpec {
        PegSpec {
            radius_mm: 6.0,
            kind: PegKind::Wedge,
            compliance: 1.0,
        }
    }

    /// Same diameter, softer sleeve: weaker lateral and tilt response.
    pub fn pin() -> PegSpec {
        PegSpec {
            radius_mm: 6.0,
            kind: PegKind::Pin,
            compliance: 0.8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius_mm.is_finite() && self.radius_mm > 0.0) {
            return Err(Error::config("peg radius must be positive"));
        }
        if !(self.compliance.is_finite() && self.compliance > 0.0) {
            return Err(Error::config("peg compliance must be positive"));
        }
        Ok(())
    }
}

/// One probe reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactResult {
    pub fx: f64,
    pub fy: f64,
    pub fz: f64,
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
    /// Displacement toward the wall from the detach offset; never negative.
    pub dz: f64,
    pub inserted: bool,
}

pub fn is_inserted(fz: f64, dz: f64, cfg: &EnvConfig) -> bool {
    fz.abs() < cfg.fz_threshold_n && dz > cfg.dz_threshold_mm
}

/// Probes hole `hole_id` of `wall`. `noise` of `None` gives the noise-free
/// core response.
pub fn contact_response(
    wall: &WallModel,
    hole_id: usize,
    peg: &PegSpec,
    peg_xy: [f64; 2],
    cfg: &EnvConfig,
    noise: Option<&mut SimRng>,
) -> Result<ContactResult> {
    let hole = wall.hole(hole_id)?;
    if !(peg_xy[0].is_finite() && peg_xy[1].is_finite()) {
        return Err(Error::usage("peg position must be finite"));
    }
    Ok(probe(hole, peg, peg_xy, cfg, noise))
}

/// Same as [`contact_response`] for an already resolved hole.
pub fn probe(
    hole: &HoleSpec,
    peg: &PegSpec,
    peg_xy: [f64; 2],
    cfg: &EnvConfig,
    noise: Option<&mut SimRng>,
) -> ContactResult {
    let p = &cfg.contact;
    let [x, y] = peg_xy;
    let delta = x.hypot(y);
    let clearance = hole.hole_radius_mm - peg.radius_mm;
    let funnel = (p.funnel_radius_mm + clearance - NOMINAL_CLEARANCE_MM).max(0.0);
    let w = hole.chamfer_width_mm;

    let mut c = ContactResult {
        fx: 0.0,
        fy: 0.0,
        fz: -cfg.fz_threshold_n,
        mx: 0.0,
        my: 0.0,
        mz: 0.0,
        dz: cfg.pz_init_mm,
        inserted: false,
    };

    if delta <= funnel {
        c.dz = cfg.dz_threshold_mm + p.inserted_dz_margin_mm;
        c.fz = -p.inserted_drag_n;
    } else {
        c.mx = cfg.moment_bias_y_nmm;
        if delta <= funnel + w {
            let engagement = 1.0 - (delta - funnel) / w;
            let (ux, uy) = (x / delta, y / delta);
            let force = p.lateral_force_gain_n * peg.compliance * engagement;
            let moment = p.moment_gain_nmm * peg.compliance * engagement;
            c.dz = cfg.pz_init_mm + p.dz_chamfer_mm * engagement;
            c.fx = -force * ux;
            c.fy = -force * uy;
            c.mx += -moment * uy;
            c.my = moment * ux;
        }
    }

    if let Some(rng) = noise {
        let rough = roughness(hole.roughness_seed, peg_xy, p.roughness_cell_mm);
        let sf = cfg.noise_sigma_force_n;
        let sm = cfg.noise_sigma_moment_nmm;
        let mut gauss = || -> f64 { rng.sample(StandardNormal) };
        c.fx += p.roughness_force_n * rough[0] + sf * gauss();
        c.fy += p.roughness_force_n * rough[1] + sf * gauss();
        c.fz += p.roughness_force_n * rough[2] + sf * gauss();
        c.mx += p.roughness_moment_nmm * rough[3] + sm * gauss();
        c.my += p.roughness_moment_nmm * rough[4] + sm * gauss();
        c.mz += p.roughness_moment_nmm * rough[5] + sm * gauss();
    }

    c.inserted = is_inserted(c.fz, c.dz, cfg);
    c
}

/// Unit-variance surface perturbation, a pure function of the hole's
/// roughness seed and the quantized spot.
fn roughness(seed: u64, xy: [f64; 2], cell: f64) -> [f64; 6] {
    let qx = (xy[0] / cell).round() as i64;
    let qy = (xy[1] / cell).round() as i64;
    let mut rng = stream(seed, &[tag::ROUGHNESS, qx as u64, qy as u64]);
    std::array::from_fn(|_| rng.sample(StandardNormal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{make_wall, GeometryRanges};
    use rand::SeedableRng;

    fn hole(w: f64) -> HoleSpec {
        HoleSpec {
            id: 1,
            center_xy_mm: [0.0, 0.0],
            hole_radius_mm: 6.35,
            chamfer_width_mm: w,
            roughness_seed: 11,
            depth_available_mm: 60.0,
        }
    }

    fn cfg_with_funnel(funnel: f64) -> EnvConfig {
        let mut cfg = EnvConfig::default();
        cfg.contact.funnel_radius_mm = funnel;
        cfg
    }

    #[test]
    fn flat_surface_far_from_hole() {
        let cfg = cfg_with_funnel(0.5);
        let c = probe(&hole(2.0), &PegSpec::wedge(), [3.0, 0.0], &cfg, None);
        assert_eq!(c.dz, 1.0);
        assert_eq!(c.fz, -20.0);
        assert_eq!((c.fx, c.fy), (0.0, 0.0));
        assert_eq!(c.mx, cfg.moment_bias_y_nmm);
        assert_eq!(c.my, 0.0);
        assert!(!c.inserted);
    }

    #[test]
    fn center_inserts() {
        let cfg = cfg_with_funnel(0.5);
        let c = probe(&hole(2.0), &PegSpec::wedge(), [0.0, 0.0], &cfg, None);
        assert!(c.inserted);
        assert!(c.dz > 6.0);
        assert!(c.fz.abs() < 20.0);
    }

    #[test]
    fn mid_chamfer_pulls_toward_center() {
        let cfg = cfg_with_funnel(0.5);
        let c = probe(&hole(2.0), &PegSpec::wedge(), [1.5, 0.0], &cfg, None);
        assert!((c.dz - 2.5).abs() < 1e-12);
        assert!(c.fx < 0.0);
        assert_eq!(c.fy, 0.0);
        assert_eq!(c.fz, -20.0);
        let below = probe(&hole(2.0), &PegSpec::wedge(), [0.0, -1.5], &cfg, None);
        assert!(below.fy > 0.0);
        assert!(below.mx > cfg.moment_bias_y_nmm);
    }

    #[test]
    fn moments_follow_sign_table() {
        let mut cfg = cfg_with_funnel(0.5);
        cfg.moment_bias_y_nmm = 0.0;
        let h = hole(3.0);
        let peg = PegSpec::wedge();
        let right = probe(&h, &peg, [2.0, 0.0], &cfg, None);
        let up = probe(&h, &peg, [0.0, 2.0], &cfg, None);
        assert!(right.my > 0.0 && right.mx == 0.0);
        assert!(up.mx < 0.0 && up.my == 0.0);
    }

    #[test]
    fn dz_monotone_in_radius_without_noise() {
        let cfg = EnvConfig::default();
        let h = hole(2.7);
        let peg = PegSpec::wedge();
        let mut prev = f64::INFINITY;
        for i in 0..600 {
            let d = i as f64 * 0.01;
            let c = probe(&h, &peg, [d * 0.6, -d * 0.8], &cfg, None);
            assert!(c.dz <= prev, "dz rose at δ={d}");
            assert!(c.dz >= 0.0);
            prev = c.dz;
        }
    }

    #[test]
    fn roughness_is_repeatable_per_spot() {
        let cfg = EnvConfig {
            noise_sigma_force_n: 0.0,
            noise_sigma_moment_nmm: 0.0,
            ..EnvConfig::default()
        };
        let h = hole(3.0);
        let peg = PegSpec::wedge();
        let mut r1 = SimRng::seed_from_u64(1);
        let mut r2 = SimRng::seed_from_u64(2);
        let a = probe(&h, &peg, [2.0, 1.0], &cfg, Some(&mut r1));
        let b = probe(&h, &peg, [2.0, 1.0], &cfg, Some(&mut r2));
        assert_eq!(a, b);
        let other = probe(&h, &peg, [1.0, 1.0], &cfg, Some(&mut r1));
        assert_ne!(a.mz, other.mz);
    }

    #[test]
    fn inserted_flag_matches_predicate_under_noise() {
        let cfg = EnvConfig::default();
        let h = hole(3.0);
        let peg = PegSpec::wedge();
        let mut rng = SimRng::seed_from_u64(5);
        for i in -40..=40 {
            for j in -40..=40 {
                let xy = [i as f64 * 0.1, j as f64 * 0.1];
                let c = probe(&h, &peg, xy, &cfg, Some(&mut rng));
                assert_eq!(c.inserted, is_inserted(c.fz, c.dz, &cfg));
            }
        }
    }

    #[test]
    fn insertion_predicate_truth_table() {
        let cfg = EnvConfig::default();
        assert!(is_inserted(-5.0, 7.0, &cfg));
        assert!(!is_inserted(-25.0, 7.0, &cfg));
        assert!(!is_inserted(-5.0, 5.0, &cfg));
        assert!(!is_inserted(-25.0, 5.0, &cfg));
    }

    #[test]
    fn lookup_errors() {
        let wall = make_wall(2, 1, &GeometryRanges::default()).unwrap();
        let cfg = EnvConfig::default();
        let peg = PegSpec::wedge();
        assert!(contact_response(&wall, 3, &peg, [0.0, 0.0], &cfg, None).is_err());
        assert!(contact_response(&wall, 1, &peg, [f64::NAN, 0.0], &cfg, None).is_err());
        assert!(contact_response(&wall, 2, &peg, [0.0, 0.0], &cfg, None).unwrap().inserted);
    }
}
