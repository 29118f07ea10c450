//! The model problems: Poisson with data Holder in one variable, heat with
//! data Holder in time, and the two half-space linearized fourth-order
//! problems with dynamic boundary conditions, each paired with an
//! independent oracle and a Schauder-ratio experiment.
//!
//! Boundary fields live on `(x', t)` grids with the time axis last; causal
//! data vanishes on the `t <= 0` half of the window (the guard band that
//! emulates the causal line on a periodic box).

mod cahn_hilliard;
mod heat;
mod poisson;

pub use cahn_hilliard::{
    ch_ode_collocation, ch_ode_oracle, ch_problem1_solve, ch_problem2_solve, ch_problem2_trace,
    reduction_remainder_profile, schauder_ratio_experiment, HalfSpaceSolution, InteriorOptions,
    OdeOracleResult, SchauderStats,
};
pub use heat::{
    causality_residual, example2_heat, heat_boundary_trace, heat_trace_convolution_oracle,
    Example2Report,
};
pub use poisson::{example1_counterexample, example1_poisson, CounterexampleRow};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SampledField;

/// Which dynamic boundary condition closes the half-space problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundaryVariant {
    /// `u_t - a Laplace_{x'} u = h1` on the boundary (local operator).
    LaplaceDynamic,
    /// `u_t - a du/dx_N = h2` on the boundary (nonlocal trace symbol).
    FluxDynamic,
}

/// A half-space problem instance: variant, coefficient, causal boundary
/// data on an `(x', t)` grid, and the base Holder exponent of interest.
#[derive(Clone, Debug)]
pub struct BoundaryTraceProblem {
    pub variant: BoundaryVariant,
    pub a: f64,
    pub data: SampledField,
    pub gamma: f64,
}

impl BoundaryTraceProblem {
    pub fn new(
        variant: BoundaryVariant,
        a: f64,
        data: SampledField,
        gamma: f64,
    ) -> Result<BoundaryTraceProblem> {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument(format!("coefficient a must be positive, got {a}")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("gamma must lie in (0,1), got {gamma}")));
        }
        let causal = causality_residual(&data)?;
        if causal > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "boundary data must vanish for t <= 0 (residual {causal:.3e} of peak)"
            )));
        }
        Ok(BoundaryTraceProblem { variant, a, data, gamma })
    }

    /// Boundary trace `rho(x', t)` of the solution.
    pub fn trace(&self) -> Result<SampledField> {
        match self.variant {
            BoundaryVariant::LaplaceDynamic => heat_boundary_trace(&self.data, self.a),
            BoundaryVariant::FluxDynamic => ch_problem2_trace(&self.data, self.a),
        }
    }

    /// Full half-space solution (interior reconstructed per frequency).
    pub fn solve(&self, opts: &InteriorOptions) -> Result<HalfSpaceSolution> {
        match self.variant {
            BoundaryVariant::LaplaceDynamic => {
                ch_problem1_solve(&self.data, None, None, self.a, opts)
            }
            BoundaryVariant::FluxDynamic => ch_problem2_solve(&self.data, self.a, opts),
        }
    }
}
