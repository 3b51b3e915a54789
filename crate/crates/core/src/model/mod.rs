//! Drift specifications, sandwich bounds, assumption checks and the explicit
//! constants of the discrete sandwich bounds.

mod bounds;
mod ckls;
mod constants;
mod drift;
mod validate;

pub use bounds::{BoundFn, BoundFunctions};
pub use ckls::{ckls_transform, CklsPath};
pub use constants::{
    bound_constants, max_mesh, theoretical_envelope, BoundConstants, Envelope, MeshLimit,
    MeshTerm, MESH_SAFETY,
};
pub use drift::{eval_drift, Drift, DriftFamily, DriftSpec, RegularityConstants, SandwichKind};
pub use validate::{validate_assumptions, CheckEntry, CheckMethod, ValidationReport};

use crate::error::{invalid, Result};
use crate::noise::TimeGrid;

/// Initial value, drift and the uniform partition count `N`.
#[derive(Clone, Debug)]
pub struct SandwichConfig {
    y0: f64,
    drift: DriftSpec,
    grid_points: usize,
}

impl SandwichConfig {
    /// The initial value is not checked against the bounds here; that is
    /// the job of [`validate_assumptions`], which reports it as (A1)/(B1).
    pub fn new(y0: f64, drift: DriftSpec, grid_points: usize) -> Result<Self> {
        if grid_points == 0 {
            return Err(invalid("the partition needs at least one step"));
        }
        if !y0.is_finite() {
            return Err(invalid("Y(0) must be finite"));
        }
        Ok(SandwichConfig {
            y0,
            drift,
            grid_points,
        })
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn drift(&self) -> &DriftSpec {
        &self.drift
    }

    pub fn bounds(&self) -> &BoundFunctions {
        self.drift.bounds()
    }

    pub fn kind(&self) -> SandwichKind {
        self.drift.kind()
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points
    }

    pub fn horizon(&self) -> f64 {
        self.drift.bounds().horizon()
    }

    /// `Δ_N = T/N`
    pub fn mesh(&self) -> f64 {
        self.horizon() / self.grid_points as f64
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid::new(self.horizon(), self.grid_points).expect("validated horizon and N")
    }

    /// Same model on a different partition.
    pub fn with_grid_points(&self, grid_points: usize) -> Result<Self> {
        SandwichConfig::new(self.y0, self.drift.clone(), grid_points)
    }
}
