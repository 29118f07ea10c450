//! The half-space fourth-order problems with dynamic boundary conditions:
//! per-frequency quartic-characteristic ODE oracle, boundary-symbol traces,
//! interior reconstruction, Schauder-ratio experiments, and the reduction
//! identity diagnostics.
//!
//! Interior ODE in the transformed variables, for each `(xi, xi_0)`:
//!
//! ```text
//!   i xi_0 u~ + (d^2/dx_N^2 - xi^2)^2 u~ = 0,   x_N > 0,
//!   d/dx_N (d^2/dx_N^2 - xi^2) u~ |_0 = 0,      u~ bounded,
//! ```
//!
//! whose decaying solution with unit Dirichlet data has
//! `du~/dx_N(0) = 2 r1 r2 / (r1 + r2)` for the two characteristic roots
//! `r1, r2` with negative real part of `(r^2 - xi^2)^2 = -i xi_0`.

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{
    for_each_index, forward_transform, inverse_transform, Grid, SampledField, Side,
};
use crate::holder::{parabolic_norm, seminorm_array, WrapMode};
use crate::symbols;

use super::heat::{apply_symbol_dc_zero, heat_boundary_trace};

/// Output of the per-frequency half-line oracle.
#[derive(Clone, Debug, Serialize)]
pub struct OdeOracleResult {
    /// `du~/dx_N(0)` with unit Dirichlet data.
    pub response_re: f64,
    pub response_im: f64,
    /// Reconstructed boundary-symbol denominator `i xi_0 - a * response`.
    pub denominator_re: f64,
    pub denominator_im: f64,
    /// The two decaying characteristic roots.
    pub roots: [(f64, f64); 2],
    /// A root hugged the imaginary axis: selection is ambiguous.
    pub flagged: bool,
}

impl OdeOracleResult {
    pub fn response(&self) -> Complex64 {
        Complex64::new(self.response_re, self.response_im)
    }

    pub fn denominator(&self) -> Complex64 {
        Complex64::new(self.denominator_re, self.denominator_im)
    }
}

/// Durand-Kerner iteration on the monic quartic
/// `z^4 - 2 q z^2 + (q^2 + i xi_0)`.
fn quartic_roots(q: f64, xi0: f64) -> [Complex64; 4] {
    let c0 = Complex64::new(q * q, xi0);
    let c2 = Complex64::new(-2.0 * q, 0.0);
    let poly = |z: Complex64| (z * z + c2) * (z * z) + c0;
    let scale = (q.sqrt()).max(xi0.abs().powf(0.25)).max(1e-8);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots = [Complex64::new(0.0, 0.0); 4];
    let mut acc = Complex64::new(1.0, 0.0);
    for r in roots.iter_mut() {
        acc *= seed;
        *r = acc * 1.7 * scale;
    }
    for _ in 0..300 {
        let mut moved = 0.0f64;
        for i in 0..4 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = poly(roots[i]) / denom;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * scale {
            break;
        }
    }
    roots
}

/// Solve the half-line problem at one frequency from its characteristic
/// roots (found numerically, independent of any closed form) and
/// reconstruct the boundary-symbol denominator with coefficient `a`.
pub fn ch_ode_oracle(xi: f64, xi0: f64, a: f64) -> Result<OdeOracleResult> {
    if xi == 0.0 && xi0 == 0.0 {
        return Err(Error::InvalidArgument(
            "the oracle is undefined at the degenerate frequency (0, 0)".into(),
        ));
    }
    let q = xi * xi;
    let roots = quartic_roots(q, xi0);
    let scale = (q.sqrt()).max(xi0.abs().powf(0.25)).max(1e-8);
    let mut decaying: Vec<Complex64> = roots.iter().copied().filter(|r| r.re < 0.0).collect();
    let flagged = roots.iter().any(|r| r.re.abs() < 1e-10 * scale);
    if decaying.len() != 2 {
        if flagged && decaying.len() > 2 {
            decaying.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
            decaying.truncate(2);
        } else {
            return Err(Error::NonFinite(format!(
                "expected 2 decaying roots at (xi, xi0) = ({xi}, {xi0}), found {}",
                decaying.len()
            )));
        }
    }
    let (r1, r2) = (decaying[0], decaying[1]);
    let response = 2.0 * r1 * r2 / (r1 + r2);
    let denominator = Complex64::new(0.0, xi0) - a * response;
    Ok(OdeOracleResult {
        response_re: response.re,
        response_im: response.im,
        denominator_re: denominator.re,
        denominator_im: denominator.im,
        roots: [(r1.re, r1.im), (r2.re, r2.im)],
        flagged,
    })
}

/// Complex banded system (kl sub-, ku super-diagonals), LU without
/// pivoting; the discretized operator is strongly diagonally dominant.
struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    a: Vec<Complex64>,
}

impl Banded {
    fn new(n: usize, kl: usize, ku: usize) -> Banded {
        Banded { n, kl, ku, a: vec![Complex64::new(0.0, 0.0); n * (kl + ku + 1)] }
    }

    fn idx(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= r && c <= r + self.ku);
        r * (self.kl + self.ku + 1) + (c + self.kl - r)
    }

    fn set(&mut self, r: usize, c: usize, v: Complex64) {
        let i = self.idx(r, c);
        self.a[i] = v;
    }

    fn get(&self, r: usize, c: usize) -> Complex64 {
        self.a[self.idx(r, c)]
    }

    fn solve(mut self, mut b: Vec<Complex64>) -> Result<Vec<Complex64>> {
        let n = self.n;
        for i in 0..n {
            let pivot = self.get(i, i);
            if pivot.norm() < 1e-300 {
                return Err(Error::NonFinite(format!("zero pivot at row {i}")));
            }
            let r_end = (i + self.kl).min(n - 1);
            for r in (i + 1)..=r_end {
                let factor = self.get(r, i) / pivot;
                if factor.norm() == 0.0 {
                    continue;
                }
                let c_end = (i + self.ku).min(n - 1);
                for c in i..=c_end {
                    let v = self.get(r, c) - factor * self.get(i, c);
                    self.set(r, c, v);
                }
                let bi = b[i];
                b[r] -= factor * bi;
            }
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            let c_end = (i + self.ku).min(n - 1);
            for c in (i + 1)..=c_end {
                acc -= self.get(i, c) * b[c];
            }
            b[i] = acc / self.get(i, i);
        }
        Ok(b)
    }
}

/// Independent finite-difference collocation of the half-line problem on a
/// truncated interval `[0, H]` with clamped far end; returns the boundary
/// response `du~/dx_N(0)`. Second-order accurate.
pub fn ch_ode_collocation(xi: f64, xi0: f64, n: usize) -> Result<Complex64> {
    if xi == 0.0 && xi0 == 0.0 {
        return Err(Error::InvalidArgument(
            "collocation undefined at the degenerate frequency".into(),
        ));
    }
    if n < 64 {
        return Err(Error::InvalidArgument("collocation needs at least 64 intervals".into()));
    }
    let oracle_roots = quartic_roots(xi * xi, xi0);
    let r_min = oracle_roots
        .iter()
        .filter(|r| r.re < 0.0)
        .map(|r| r.re.abs())
        .fold(f64::INFINITY, f64::min);
    if !r_min.is_finite() || r_min == 0.0 {
        return Err(Error::NonFinite("no decaying root to size the interval".into()));
    }
    let height = 10.0 / r_min;
    let h = height / n as f64;
    let q = xi * xi;
    let n_rows = n + 1;
    let mut sys = Banded::new(n_rows, 2, 3);
    let mut rhs = vec![Complex64::new(0.0, 0.0); n_rows];

    // row 0: Dirichlet u(0) = 1
    sys.set(0, 0, Complex64::new(1.0, 0.0));
    rhs[0] = Complex64::new(1.0, 0.0);

    // row 1: flux u''' (one-sided O(h^2)) - xi^2 u' (one-sided O(h^2)) = 0
    let h3 = h * h * h;
    let flux = [
        -2.5 / h3 + q * 1.5 / h,
        9.0 / h3 - q * 2.0 / h,
        -12.0 / h3 + q * 0.5 / h,
        7.0 / h3,
        -1.5 / h3,
    ];
    for (c, w) in flux.iter().enumerate() {
        sys.set(1, c, Complex64::new(*w, 0.0));
    }

    // interior rows
    let h2 = h * h;
    let h4 = h2 * h2;
    for j in 2..(n_rows - 2) {
        sys.set(j, j - 2, Complex64::new(1.0 / h4, 0.0));
        sys.set(j, j - 1, Complex64::new(-4.0 / h4 - 2.0 * q / h2, 0.0));
        sys.set(j, j, Complex64::new(6.0 / h4 + 4.0 * q / h2 + q * q, xi0));
        sys.set(j, j + 1, Complex64::new(-4.0 / h4 - 2.0 * q / h2, 0.0));
        sys.set(j, j + 2, Complex64::new(1.0 / h4, 0.0));
    }

    // far end clamped: u = u' = 0
    sys.set(n_rows - 2, n_rows - 2, Complex64::new(1.0, 0.0));
    sys.set(n_rows - 1, n_rows - 1, Complex64::new(1.0, 0.0));

    let u = sys.solve(rhs)?;
    Ok((-1.5 * u[0] + 2.0 * u[1] - 0.5 * u[2]) / h)
}

/// Boundary trace of the flux-type dynamic condition:
/// `rho~ = h~ / M(xi, xi_0)`, DC bin zero.
pub fn ch_problem2_trace(h: &SampledField, a: f64) -> Result<SampledField> {
    let m = symbols::ch_boundary_inverse(h.grid().dims(), a)?;
    apply_symbol_dc_zero(&m, h)
}

/// Interior reconstruction controls.
#[derive(Clone, Debug)]
pub struct InteriorOptions {
    /// Number of `x_N` levels including the boundary.
    pub levels: usize,
    /// Truncation height; `None` sizes it from the slowest decaying root
    /// weighted by the trace spectrum.
    pub height: Option<f64>,
}

impl Default for InteriorOptions {
    fn default() -> Self {
        InteriorOptions { levels: 17, height: None }
    }
}

/// A half-space solution: boundary trace plus the interior sampled on
/// uniform `x_N` levels, with the per-frequency representation retained
/// for exact derivative evaluation.
pub struct HalfSpaceSolution {
    trace: SampledField,
    trace_spectrum: SampledField,
    /// Decaying root pair per frequency bin (flat order).
    roots: Vec<(Complex64, Complex64)>,
    pub height: f64,
    pub levels: usize,
    /// Interior samples, axes `(x' .., t, x_N)`.
    pub interior: ArrayD<Complex64>,
}

fn closed_form_roots(xi_sq: f64, xi0: f64) -> (Complex64, Complex64) {
    let q = Complex64::new(xi_sq, 0.0);
    let s = Complex64::new(0.0, -xi0).sqrt();
    (-(q + s).sqrt(), -(q - s).sqrt())
}

impl HalfSpaceSolution {
    /// Build the interior from a boundary trace by the per-frequency
    /// half-line solve with flux-zero and decay conditions.
    pub fn from_trace(rho: &SampledField, opts: &InteriorOptions) -> Result<HalfSpaceSolution> {
        if rho.side() != Side::Physical {
            return Err(Error::SideMismatch { expected: "physical", found: rho.side().name() });
        }
        if opts.levels < 5 {
            return Err(Error::InvalidArgument("need at least 5 interior levels".into()));
        }
        let grid = rho.grid().clone();
        let dims = grid.dims();
        let t_axis = dims - 1;
        let spectrum = forward_transform(rho)?;
        let tables: Vec<Vec<f64>> = (0..dims).map(|a| grid.freq_table(a)).collect();

        let spec_slice = spectrum.values().as_slice().expect("contiguous");
        let peak = spectrum.sup_norm().max(1e-300);
        let mut roots = Vec::with_capacity(spec_slice.len());
        let mut r_eff = f64::INFINITY;
        {
            let mut flat = 0usize;
            for_each_index(grid.shape(), |idx| {
                let mut xi_sq = 0.0;
                for (a, &i) in idx.iter().enumerate() {
                    if a != t_axis {
                        xi_sq += tables[a][i] * tables[a][i];
                    }
                }
                let xi0 = tables[t_axis][idx[t_axis]];
                let pair = if xi_sq == 0.0 && xi0 == 0.0 {
                    (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
                } else {
                    closed_form_roots(xi_sq, xi0)
                };
                if spec_slice[flat].norm() >= 1e-9 * peak && (xi_sq != 0.0 || xi0 != 0.0) {
                    r_eff = r_eff.min(pair.0.re.abs().min(pair.1.re.abs()));
                }
                roots.push(pair);
                flat += 1;
            });
        }
        let height = match opts.height {
            Some(h) => h,
            None => {
                if r_eff.is_finite() && r_eff > 0.0 {
                    8.0 / r_eff
                } else {
                    1.0
                }
            }
        };

        let mut shape: Vec<usize> = grid.shape().to_vec();
        shape.push(opts.levels);
        let mut interior = ArrayD::<Complex64>::zeros(IxDyn(&shape));
        {
            let out = interior.as_slice_mut().expect("contiguous");
            for level in 0..opts.levels {
                let x_n = height * level as f64 / (opts.levels - 1) as f64;
                let mut level_spec = spectrum.clone();
                {
                    let ls = level_spec.values_mut().as_slice_mut().expect("contiguous");
                    for (flat, v) in ls.iter_mut().enumerate() {
                        let (r1, r2) = roots[flat];
                        if r1 == r2 && r1.norm() == 0.0 {
                            *v = Complex64::new(0.0, 0.0);
                            continue;
                        }
                        let w = (r2 * (r1 * x_n).exp() + r1 * (r2 * x_n).exp()) / (r1 + r2);
                        *v *= w;
                    }
                }
                let phys = inverse_transform(&level_spec)?;
                let ps = phys.values().as_slice().expect("contiguous");
                for (flat, v) in ps.iter().enumerate() {
                    // layout (boundary flat index, level): level is the
                    // fastest axis
                    out[flat * opts.levels + level] = *v;
                }
            }
        }
        Ok(HalfSpaceSolution {
            trace: rho.clone(),
            trace_spectrum: spectrum,
            roots,
            height,
            levels: opts.levels,
            interior,
        })
    }

    pub fn trace(&self) -> &SampledField {
        &self.trace
    }

    pub fn boundary_grid(&self) -> &Grid {
        self.trace.grid()
    }

    pub fn level_spacing(&self) -> f64 {
        self.height / (self.levels - 1) as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.interior.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Exact derivative samples `D^{alpha}_{x'} D^{m}_{x_N} D^{q}_t u` on
    /// the level stack (spectral in `(x', t)`, analytic in `x_N`).
    pub fn derivative_field(
        &self,
        x_prime_order: &[usize],
        x_n_order: usize,
        t_order: usize,
    ) -> Result<ArrayD<Complex64>> {
        let grid = self.boundary_grid().clone();
        let dims = grid.dims();
        let t_axis = dims - 1;
        if x_prime_order.len() != t_axis {
            return Err(Error::InvalidArgument(format!(
                "expected {} tangential orders, got {}",
                t_axis,
                x_prime_order.len()
            )));
        }
        let tables: Vec<Vec<f64>> = (0..dims).map(|a| grid.freq_table(a)).collect();
        // tangential spectral factor per bin
        let mut factors = vec![Complex64::new(1.0, 0.0); grid.total_points()];
        {
            let mut flat = 0usize;
            for_each_index(grid.shape(), |idx| {
                let mut f = Complex64::new(1.0, 0.0);
                for (slot, &d) in x_prime_order.iter().enumerate() {
                    if d > 0 {
                        f *= Complex64::new(0.0, tables[slot][idx[slot]]).powu(d as u32);
                    }
                }
                if t_order > 0 {
                    f *= Complex64::new(0.0, tables[t_axis][idx[t_axis]]).powu(t_order as u32);
                }
                factors[flat] = f;
                flat += 1;
            });
        }
        let mut shape: Vec<usize> = grid.shape().to_vec();
        shape.push(self.levels);
        let mut out_arr = ArrayD::<Complex64>::zeros(IxDyn(&shape));
        let out = out_arr.as_slice_mut().expect("contiguous");
        for level in 0..self.levels {
            let x_n = self.level_spacing() * level as f64;
            let mut level_spec = self.trace_spectrum.clone();
            {
                let ls = level_spec.values_mut().as_slice_mut().expect("contiguous");
                for (flat, v) in ls.iter_mut().enumerate() {
                    let (r1, r2) = self.roots[flat];
                    if r1 == r2 && r1.norm() == 0.0 {
                        *v = Complex64::new(0.0, 0.0);
                        continue;
                    }
                    let m = x_n_order as u32;
                    let w = (r2 * r1.powu(m) * (r1 * x_n).exp()
                        + r1 * r2.powu(m) * (r2 * x_n).exp())
                        / (r1 + r2);
                    *v *= w * factors[flat];
                }
            }
            let phys = inverse_transform(&level_spec)?;
            let ps = phys.values().as_slice().expect("contiguous");
            for (flat, v) in ps.iter().enumerate() {
                out[flat * self.levels + level] = *v;
            }
        }
        Ok(out_arr)
    }

    /// `max |u(., 0, .) - rho| / sup |rho|`.
    pub fn trace_residual(&self) -> f64 {
        let peak = self.trace.sup_norm().max(1e-300);
        let rho = self.trace.values().as_slice().expect("contiguous");
        let u = self.interior.as_slice().expect("contiguous");
        let mut worst = 0.0f64;
        for (flat, r) in rho.iter().enumerate() {
            worst = worst.max((u[flat * self.levels] - r).norm());
        }
        worst / peak
    }

    /// `max |u|` on the `t = 0` slice, relative to the solution peak.
    pub fn initial_residual(&self) -> f64 {
        let grid = self.boundary_grid();
        let t_axis = grid.dims() - 1;
        let t_zero_bin = grid.points(t_axis) / 2;
        let peak = self.sup_norm().max(1e-300);
        let u = self.interior.as_slice().expect("contiguous");
        let mut worst = 0.0f64;
        let mut flat = 0usize;
        for_each_index(grid.shape(), |idx| {
            if idx[t_axis] == t_zero_bin {
                for level in 0..self.levels {
                    worst = worst.max(u[flat * self.levels + level].norm());
                }
            }
            flat += 1;
        });
        worst / peak
    }

    /// `max |u(., H, .)|` relative to the trace peak: the truncation
    /// monitor for the interval height.
    pub fn decay_residual(&self) -> f64 {
        let peak = self.trace.sup_norm().max(1e-300);
        let u = self.interior.as_slice().expect("contiguous");
        let mut worst = 0.0f64;
        for flat in 0..self.trace.grid().total_points() {
            worst = worst.max(u[flat * self.levels + self.levels - 1].norm());
        }
        worst / peak
    }

    /// Parabolic-scale norm surrogate on the interior stack:
    /// `sup |u| + sum_{|alpha| = [l1]} <D^alpha u>^{(l1 - [l1])}_{x} +
    /// <D_t^{[l2]} u>^{(l2 - [l2])}_t`, with `x` running over the
    /// tangential axes and `x_N`.
    pub fn parabolic_report(&self, l1: f64, l2: f64) -> Result<InteriorNormReport> {
        for (name, l) in [("l1", l1), ("l2", l2)] {
            if !(l > 0.0) || l.fract() == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be a positive non-integer, got {l}"
                )));
            }
        }
        let grid = self.boundary_grid();
        let dims = grid.dims();
        let t_axis = dims - 1;
        let space_slots = t_axis + 1; // tangential axes plus x_N
        let l1_int = l1.floor() as usize;
        let l1_frac = l1 - l1_int as f64;
        let l2_int = l2.floor() as usize;
        let l2_frac = l2 - l2_int as f64;
        let level_spacing = self.level_spacing();

        let seminorm_all_space = |values: &ArrayD<Complex64>| -> f64 {
            let mut sum = 0.0;
            for axis in 0..t_axis {
                let n = values.shape()[axis];
                let max_step = n / 2;
                sum += seminorm_array(
                    values,
                    axis,
                    grid.spacing(axis),
                    l1_frac,
                    1,
                    max_step,
                    WrapMode::ExcludeEdge,
                );
            }
            // x_N axis is the last one of the stack
            let axis = values.ndim() - 1;
            let max_step = self.levels / 2;
            sum += seminorm_array(
                values,
                axis,
                level_spacing,
                l1_frac,
                1,
                max_step,
                WrapMode::ExcludeEdge,
            );
            sum
        };

        let mut spatial_terms = Vec::new();
        for alpha in crate::holder::multi_indices_up_to(space_slots, l1_int) {
            if alpha.iter().sum::<usize>() != l1_int {
                continue;
            }
            let (tangential, x_n_order) = alpha.split_at(space_slots - 1);
            let d = self.derivative_field(tangential, x_n_order[0], 0)?;
            let label = format!("{alpha:?}");
            spatial_terms.push((label, seminorm_all_space(&d)));
        }

        let dt = self.derivative_field(&vec![0; t_axis], 0, l2_int)?;
        let t_slot = dims - 1; // time axis position in the stack
        let n_t = grid.points(t_axis);
        let time_term = seminorm_array(
            &dt,
            t_slot,
            grid.spacing(t_axis),
            l2_frac,
            1,
            n_t / 2,
            WrapMode::ExcludeEdge,
        );

        let sup = self.sup_norm();
        let total = sup + spatial_terms.iter().map(|t| t.1).sum::<f64>() + time_term;
        Ok(InteriorNormReport { l1, l2, sup, spatial_terms, time_term, total })
    }
}

/// Norm pieces of the interior parabolic scale.
#[derive(Clone, Debug, Serialize)]
pub struct InteriorNormReport {
    pub l1: f64,
    pub l2: f64,
    pub sup: f64,
    pub spatial_terms: Vec<(String, f64)>,
    pub time_term: f64,
    pub total: f64,
}

/// Solve the Laplace-type dynamic problem (`u_t - a Lap_{x'} u = h1` on
/// the boundary). The v1 surface requires `f = g = 0`: the general case
/// reduces to this by a standard parabolic interior solve first.
pub fn ch_problem1_solve(
    h1: &SampledField,
    f: Option<&SampledField>,
    g: Option<&SampledField>,
    a: f64,
    opts: &InteriorOptions,
) -> Result<HalfSpaceSolution> {
    for (name, field) in [("f", f), ("g", g)] {
        if let Some(fv) = field {
            if fv.sup_norm() != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be zero: the general data case reduces to f = g = 0 first"
                )));
            }
        }
    }
    let rho = heat_boundary_trace(h1, a)?;
    HalfSpaceSolution::from_trace(&rho, opts)
}

/// Solve the flux-type dynamic problem (`u_t - a du/dx_N = h` on the
/// boundary) with `f = g = 0`.
pub fn ch_problem2_solve(
    h: &SampledField,
    a: f64,
    opts: &InteriorOptions,
) -> Result<HalfSpaceSolution> {
    let rho = ch_problem2_trace(h, a)?;
    HalfSpaceSolution::from_trace(&rho, opts)
}

/// Ensemble statistics of the Schauder-type ratios.
#[derive(Clone, Debug, Serialize)]
pub struct SchauderStats {
    pub variant: String,
    pub gamma: f64,
    pub a: f64,
    pub ensemble: usize,
    pub excluded: usize,
    /// `|u|^{(4+gamma)} / |h|^{(boundary scale)}` per member.
    pub interior_ratios: Vec<f64>,
    /// `|rho_t|^{(trace scale)} / |h|^{(trace scale)}` per member.
    pub boundary_ratios: Vec<f64>,
    /// `<rho_t>_t / <h>_t` seminorm ratios per member.
    pub trace_t_ratios: Vec<f64>,
    pub median_interior: f64,
    pub max_interior: f64,
    pub median_boundary: f64,
    pub max_boundary: f64,
    pub notes: String,
}

fn median_of(sorted: &[f64]) -> f64 {
    if sorted.is_empty() {
        f64::NAN
    } else {
        sorted[sorted.len() / 2]
    }
}

/// Run a seeded ensemble of random admissible boundary data through the
/// chosen problem and collect the norm-ratio distribution.
pub fn schauder_ratio_experiment(
    variant: super::BoundaryVariant,
    grid: &Grid,
    gamma: f64,
    a: f64,
    ensemble: usize,
    seed: u64,
    opts: &InteriorOptions,
) -> Result<SchauderStats> {
    use rand::SeedableRng;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must lie in (0,1), got {gamma}")));
    }
    let dims = grid.dims();
    let t_axis = dims - 1;
    let trace_scale = match variant {
        super::BoundaryVariant::LaplaceDynamic => 2.0 + gamma,
        super::BoundaryVariant::FluxDynamic => 3.0 + gamma,
    };
    let mut interior_ratios = Vec::new();
    let mut boundary_ratios = Vec::new();
    let mut trace_t_ratios = Vec::new();
    let mut excluded = 0usize;
    for member in 0..ensemble {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + member as u64);
        let atoms =
            crate::synth::random_atoms(t_axis, 2, &crate::synth::AtomRanges::default(), &mut rng);
        let h = crate::synth::sample_atoms(grid, &atoms)?;
        let h_norm = parabolic_norm(&h, t_axis, trace_scale, trace_scale / 4.0, WrapMode::ExcludeEdge)?;
        if h_norm.total < 1e-12 {
            excluded += 1;
            continue;
        }
        let problem = super::BoundaryTraceProblem::new(variant, a, h.clone(), gamma)?;
        let solution = problem.solve(opts)?;
        let interior_report = solution.parabolic_report(4.0 + gamma, (4.0 + gamma) / 4.0)?;
        interior_ratios.push(interior_report.total / h_norm.total);

        let mut dt_order = vec![0usize; dims];
        dt_order[t_axis] = 1;
        let rho_t = crate::field::spectral_derivative(solution.trace(), &dt_order)?;
        let rho_t_norm =
            parabolic_norm(&rho_t, t_axis, trace_scale, trace_scale / 4.0, WrapMode::ExcludeEdge)?;
        boundary_ratios.push(rho_t_norm.total / h_norm.total);

        let t_exp = trace_scale / 4.0 - (trace_scale / 4.0).floor();
        let rho_t_t = crate::holder::partial_seminorm_with(&rho_t, t_axis, t_exp, 1, WrapMode::ExcludeEdge)?;
        let h_t = crate::holder::partial_seminorm_with(&h, t_axis, t_exp, 1, WrapMode::ExcludeEdge)?;
        if h_t > 0.0 {
            trace_t_ratios.push(rho_t_t / h_t);
        }
    }
    let mut sorted = interior_ratios.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut sorted_b = boundary_ratios.clone();
    sorted_b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(SchauderStats {
        variant: format!("{variant:?}"),
        gamma,
        a,
        ensemble,
        excluded,
        median_interior: median_of(&sorted),
        max_interior: sorted.last().copied().unwrap_or(f64::NAN),
        median_boundary: median_of(&sorted_b),
        max_boundary: sorted_b.last().copied().unwrap_or(f64::NAN),
        interior_ratios,
        boundary_ratios,
        trace_t_ratios,
        notes: "flux-type data norm read at the (3+gamma) scale; with f = g = 0 the \
                alternative (1+gamma) reading of the g norm does not arise"
            .into(),
    })
}

/// Dyadic-annulus remainder profile of the reduction identity: per
/// parabolic annulus `|xi| + |xi_0|^{1/4} in [2^j, 2^{j+1})`, the L^2
/// ratio of `D^4 rho - reduction_symbol * D^3 h` to the principal term
/// (first tangential axis, coefficient a = 1).
pub fn reduction_remainder_profile(h: &SampledField, j_max: i32) -> Result<Vec<(i32, f64)>> {
    if h.side() != Side::Physical {
        return Err(Error::SideMismatch { expected: "physical", found: h.side().name() });
    }
    let grid = h.grid();
    let dims = grid.dims();
    let t_axis = dims - 1;
    let spec = forward_transform(h)?;
    let tables: Vec<Vec<f64>> = (0..dims).map(|a| grid.freq_table(a)).collect();
    let mut sums: std::collections::BTreeMap<i32, (f64, f64)> = std::collections::BTreeMap::new();
    let slice = spec.values().as_slice().expect("contiguous");
    let mut flat = 0usize;
    let mut err: Option<Error> = None;
    for_each_index(grid.shape(), |idx| {
        if err.is_some() {
            flat += 1;
            return;
        }
        let hv = slice[flat];
        flat += 1;
        let xi_l = tables[0][idx[0]];
        let mut xi_sq = 0.0;
        for a in 0..t_axis {
            xi_sq += tables[a][idx[a]] * tables[a][idx[a]];
        }
        let xi0 = tables[t_axis][idx[t_axis]];
        if xi_sq == 0.0 && xi0 == 0.0 {
            return;
        }
        let rho_par = xi_sq.sqrt() + xi0.abs().powf(0.25);
        if rho_par < 4.0 {
            return;
        }
        let j = rho_par.log2().floor() as i32;
        if j > j_max {
            return;
        }
        let ixil = Complex64::new(0.0, xi_l);
        let m_full = symbols::ch_denominator_value(
            &{
                let mut v: Vec<f64> = (0..t_axis).map(|a| tables[a][idx[a]]).collect();
                v.push(xi0);
                v
            },
            1.0,
        );
        if m_full.norm() == 0.0 {
            err = Some(Error::NonFinite("boundary symbol vanished off the origin".into()));
            return;
        }
        let true_term = ixil.powu(4) * hv / m_full;
        let principal = (ixil / Complex64::new(xi_sq.sqrt(), xi0)) * ixil.powu(3) * hv;
        let remainder = true_term - principal;
        let e = sums.entry(j).or_insert((0.0, 0.0));
        e.0 += remainder.norm_sqr();
        e.1 += principal.norm_sqr();
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(sums
        .into_iter()
        .filter(|(_, (_, p))| *p > 0.0)
        .map(|(j, (r, p))| (j, (r / p).sqrt()))
        .collect())
}

/// Random Hermitian broadband spectrum for the reduction diagnostics.
pub fn broadband_field(grid: &Grid, rng: &mut impl Rng) -> Result<SampledField> {
    let mut spec = SampledField::zeros(grid.clone(), Side::Frequency);
    let shape: Vec<usize> = grid.shape().to_vec();
    {
        let vals = spec.values_mut();
        let mut idx_list: Vec<Vec<usize>> = Vec::new();
        for_each_index(&shape, |idx| idx_list.push(idx.to_vec()));
        for idx in idx_list {
            let conj_idx: Vec<usize> =
                idx.iter().zip(shape.iter()).map(|(&i, &n)| (n - i) % n).collect();
            if conj_idx < idx {
                continue;
            }
            let re = rng.gen_range(-1.0..1.0);
            let im = if conj_idx == idx { 0.0 } else { rng.gen_range(-1.0..1.0) };
            let v = Complex64::new(re, im);
            vals[IxDyn(&idx)] = v;
            vals[IxDyn(&conj_idx)] = v.conj();
        }
        vals[IxDyn(&vec![0; shape.len()])] = Complex64::new(0.0, 0.0);
    }
    inverse_transform(&spec)
}
