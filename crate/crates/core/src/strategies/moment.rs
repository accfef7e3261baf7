//! Model-based baseline: follow the lateral force while on the chamfer,
//! otherwise follow the peg tilt read from the moments.
//!
//! On-chamfer is judged against the displacement of the first probe. Tilt
//! direction is `(-my, mx)`, the sign table in [`crate::environment`].

use crate::environment::{Action, ContactResult};

pub const DEFAULT_CHAMFER_MARGIN_MM: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSearchState {
    pub baseline_dz: f64,
    pub margin_mm: f64,
    pub last: ContactResult,
}

impl MomentSearchState {
    pub fn new(first: &ContactResult, margin_mm: f64) -> MomentSearchState {
        MomentSearchState {
            baseline_dz: first.dz,
            margin_mm,
            last: *first,
        }
    }

    pub fn on_chamfer(&self, c: &ContactResult) -> bool {
        c.dz > self.baseline_dz + self.margin_mm
    }
}

/// Step along the dominant axis of `(vx, vy)`; exact ties go `+Y`.
fn dominant_axis(vx: f64, vy: f64) -> Action {
    if vx.abs() > vy.abs() {
        if vx > 0.0 {
            Action::PlusX
        } else {
            Action::MinusX
        }
    } else if vy.abs() > vx.abs() {
        if vy > 0.0 {
            Action::PlusY
        } else {
            Action::MinusY
        }
    } else {
        Action::PlusY
    }
}

pub fn moment_next(state: &mut MomentSearchState, c: &ContactResult) -> Action {
    state.last = *c;
    if state.on_chamfer(c) {
        dominant_axis(c.fx, c.fy)
    } else {
        dominant_axis(-c.my, c.mx)
    }
}
