//! The heat-operator pieces: the boundary trace of the Laplace-type
//! dynamic condition (resolvent symbol vs. time-domain heat-kernel
//! convolution) and the heat-equation Holder-gain experiment.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{
    for_each_index, forward_transform, inverse_transform, sample, spectral_derivative, Grid,
    SampledField, Side,
};
use crate::holder::{gain_fit, partial_seminorm_with, WrapMode};
use crate::symbols;
use crate::synth::BoundaryAtom;

/// Multiply the spectrum of `u` by the symbol with the DC bin forced to
/// zero: the documented treatment of the degenerate frequency point for
/// solution operators (compactly supported causal data carries no mean).
pub(crate) fn apply_symbol_dc_zero(m: &symbols::Symbol, u: &SampledField) -> Result<SampledField> {
    if u.side() != Side::Physical {
        return Err(Error::SideMismatch { expected: "physical", found: u.side().name() });
    }
    let grid = u.grid().clone();
    let mut spec = forward_transform(u)?;
    let tables: Vec<Vec<f64>> = (0..grid.dims()).map(|a| grid.freq_table(a)).collect();
    let mut xi = vec![0.0f64; grid.dims()];
    let mut err: Option<Error> = None;
    {
        let slice = spec.values_mut().as_slice_mut().expect("contiguous");
        let mut flat = 0usize;
        for_each_index(grid.shape(), |idx| {
            if err.is_some() {
                flat += 1;
                return;
            }
            if idx.iter().all(|&i| i == 0) {
                slice[flat] = Complex64::new(0.0, 0.0);
                flat += 1;
                return;
            }
            for (a, &i) in idx.iter().enumerate() {
                xi[a] = tables[a][i];
            }
            match m.eval(&xi) {
                Ok(v) => slice[flat] *= v,
                Err(e) => err = Some(e),
            }
            flat += 1;
        });
    }
    if let Some(e) = err {
        return Err(e);
    }
    inverse_transform(&spec)
}

/// Max modulus over the `t <= 0` rows, relative to the peak over the whole
/// field (time axis last).
pub fn causality_residual(rho: &SampledField) -> Result<f64> {
    if rho.side() != Side::Physical {
        return Err(Error::SideMismatch { expected: "physical", found: rho.side().name() });
    }
    let grid = rho.grid();
    let t_axis = grid.dims() - 1;
    let peak = rho.sup_norm();
    if peak == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    let slice = rho.values().as_slice().expect("contiguous");
    let mut flat = 0usize;
    for_each_index(grid.shape(), |idx| {
        if grid.node_coord(t_axis, idx[t_axis]) <= 0.0 {
            worst = worst.max(slice[flat].norm());
        }
        flat += 1;
    });
    Ok(worst / peak)
}

/// Boundary trace of the Laplace-type dynamic condition: `rho~ = h1~ /
/// (i xi_0 + a xi^2)`, DC bin zero. Causal data in, causal trace out.
pub fn heat_boundary_trace(h1: &SampledField, a: f64) -> Result<SampledField> {
    let m = symbols::heat_resolvent(h1.grid().dims(), a)?;
    apply_symbol_dc_zero(&m, h1)
}

/// Composite-Simpson quadrature of a smooth integrand.
fn simpson(lo: f64, hi: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let n = panels.max(2) & !1usize; // even
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// Closed-form heat smoothing of one modulated-Gaussian axis factor:
/// convolution of the 1-D heat kernel at time `tau` with
/// `cos(c u + phi) exp(-u^2 / (2 s2))`, evaluated at `u = x - x0`.
fn smoothed_axis_factor(u: f64, tau: f64, a: f64, s2: f64, c: f64, phi: f64) -> f64 {
    let v1 = 2.0 * a * tau;
    let big_v = v1 + s2;
    let amp = (s2 / big_v).sqrt();
    let gauss = (-(u * u + c * c * v1 * s2) / (2.0 * big_v)).exp();
    amp * gauss * (c * u * s2 / big_v + phi).cos()
}

/// Time-domain convolution of the heat kernel with a sum of separable
/// atoms: the space convolution is closed-form (Gaussian algebra), the
/// remaining time integral is quadrature of a smooth integrand. This is
/// the fundamental-solution oracle for [`heat_boundary_trace`].
pub fn heat_trace_convolution_oracle(
    grid: &Grid,
    atoms: &[BoundaryAtom],
    a: f64,
) -> Result<SampledField> {
    let dims = grid.dims();
    let t_axis = dims - 1;
    sample(grid, move |coords| {
        let (x, t) = (&coords[..t_axis], coords[t_axis]);
        let mut total = 0.0f64;
        for atom in atoms {
            let lo = atom.t_center - 8.0 * atom.sigma_t;
            let hi = (atom.t_center + 8.0 * atom.sigma_t).min(t);
            if hi <= lo {
                continue;
            }
            // the trace is resolvent-damped well below the data scale, so
            // the quadrature must clear ~1e-8 of the data peak
            total += atom.amp
                * simpson(lo, hi, 1024, |s| {
                    let pulse =
                        (-(s - atom.t_center).powi(2) / (2.0 * atom.sigma_t * atom.sigma_t)).exp();
                    let tau = t - s;
                    let mut space = 1.0;
                    for (i, &xi) in x.iter().enumerate() {
                        space *= smoothed_axis_factor(
                            xi - atom.x_center[i],
                            tau,
                            a,
                            atom.sigma_x[i] * atom.sigma_x[i],
                            atom.carrier[i],
                            atom.phase[i],
                        );
                    }
                    pulse * space
                });
        }
        total
    })
}

/// Report of the heat-equation gain experiment: data Holder-gamma in time
/// only, `gamma > 1/2`; the time derivative of the solution gains `2
/// gamma` in space and its space gradient keeps `2 gamma - 1`.
#[derive(Clone, Debug, Serialize)]
pub struct Example2Report {
    pub gamma: f64,
    pub a: f64,
    /// `<f>_t^(gamma)` of the data.
    pub input_t_seminorm: f64,
    /// `<u_t>_t^(gamma)` and its fitted exponent.
    pub ut_t_seminorm: f64,
    pub ut_t_fitted: Option<f64>,
    /// Fitted space exponents of `u_t` per space axis (target `2 gamma`).
    pub ut_x_fitted: Vec<(usize, Option<f64>)>,
    /// Fitted space exponents of `d^2 u / dt dx_i` (target `2 gamma - 1`).
    pub utx_x_fitted: Vec<(usize, Option<f64>)>,
}

/// Apply `i xi_0 / (i xi_0 + a xi^2)` to `f` and measure the gain chain.
pub fn example2_heat(f: &SampledField, gamma: f64, a: f64) -> Result<Example2Report> {
    if !(gamma > 0.5 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "the heat example requires gamma in (1/2, 1), got {gamma}"
        )));
    }
    let dims = f.grid().dims();
    let t_axis = dims - 1;
    let m = symbols::heat_time_derivative(dims, a)?;
    let ut = crate::apply::apply_multiplier(&m, f)?;

    let wrap = WrapMode::ExcludeEdge;
    let input_t_seminorm = partial_seminorm_with(f, t_axis, gamma, 1, wrap)?;
    let ut_t_seminorm = partial_seminorm_with(&ut, t_axis, gamma, 1, wrap)?;
    let ut_t_fitted = gain_fit(&ut, t_axis, 1, wrap)?.slope;

    let mut ut_x_fitted = Vec::new();
    let mut utx_x_fitted = Vec::new();
    for axis in 0..t_axis {
        // target 2 gamma in (1, 2): second differences
        ut_x_fitted.push((axis, gain_fit(&ut, axis, 2, wrap)?.slope));
        let mut order = vec![0usize; dims];
        order[axis] = 1;
        let utx = spectral_derivative(&ut, &order)?;
        // target 2 gamma - 1 in (0, 1): first differences
        utx_x_fitted.push((axis, gain_fit(&utx, axis, 1, wrap)?.slope));
    }

    Ok(Example2Report {
        gamma,
        a,
        input_t_seminorm,
        ut_t_seminorm,
        ut_t_fitted,
        ut_x_fitted,
        utx_x_fitted,
    })
}
