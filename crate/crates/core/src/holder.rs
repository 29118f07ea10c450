//! Numerical estimation of anisotropic Holder seminorms and norms on
//! sampled fields: per-axis, with higher-order differences.
//!
//! All estimators are lower bounds of the continuum quantities, monotone
//! nondecreasing under nested grid refinement (a coarse grid's difference
//! pairs are a subset of the fine grid's).

use ndarray::{ArrayD, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{SampledField, Side};

/// Per-axis scaling exponents: alpha for the "smooth" group (where the
/// input is assumed Holder), beta for the "gained" group, plus the base
/// Holder exponent gamma.
#[derive(Clone, Debug, PartialEq)]
pub struct AnisotropyProfile {
    gamma: f64,
    smooth: Vec<(usize, f64)>,
    gained: Vec<(usize, f64)>,
}

impl AnisotropyProfile {
    /// `smooth` holds `(axis, alpha)` with `alpha in (0, 1]`, `gained` holds
    /// `(axis, beta)` with `beta > 0` (beta may exceed 1). Together the axes
    /// must partition `0..smooth.len()+gained.len()`.
    pub fn new(gamma: f64, smooth: &[(usize, f64)], gained: &[(usize, f64)]) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("gamma must lie in (0,1), got {gamma}")));
        }
        for &(axis, alpha) in smooth {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "smooth axis {axis}: alpha must lie in (0,1], got {alpha}"
                )));
            }
        }
        for &(axis, beta) in gained {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "gained axis {axis}: beta must be positive, got {beta}"
                )));
            }
        }
        let dims = smooth.len() + gained.len();
        let mut seen = vec![false; dims];
        for &(axis, _) in smooth.iter().chain(gained.iter()) {
            if axis >= dims || seen[axis] {
                return Err(Error::InvalidArgument(format!(
                    "axes must partition 0..{dims}; axis {axis} repeated or out of range"
                )));
            }
            seen[axis] = true;
        }
        Ok(AnisotropyProfile { gamma, smooth: smooth.to_vec(), gained: gained.to_vec() })
    }

    /// All axes smooth with alpha = 1 (the classical isotropic case is not
    /// representable: at least one gained axis is required by the theory,
    /// so this helper puts the last axis in the gained group with beta = 1).
    pub fn isotropic_split(gamma: f64, dims: usize, gained_from: usize) -> Result<Self> {
        let smooth: Vec<(usize, f64)> = (0..gained_from).map(|a| (a, 1.0)).collect();
        let gained: Vec<(usize, f64)> = (gained_from..dims).map(|a| (a, 1.0)).collect();
        AnisotropyProfile::new(gamma, &smooth, &gained)
    }

    pub fn dims(&self) -> usize {
        self.smooth.len() + self.gained.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn smooth_axes(&self) -> &[(usize, f64)] {
        &self.smooth
    }

    pub fn gained_axes(&self) -> &[(usize, f64)] {
        &self.gained
    }

    pub fn is_smooth(&self, axis: usize) -> bool {
        self.smooth.iter().any(|&(a, _)| a == axis)
    }

    /// Exponent of `|x_axis|` inside the anisotropic distance rho.
    pub fn rho_exponent(&self, axis: usize) -> f64 {
        self.smooth
            .iter()
            .chain(self.gained.iter())
            .find(|&&(a, _)| a == axis)
            .map(|&(_, e)| e)
            .expect("axis validated at construction")
    }

    /// Scaling weight: `A_lambda` multiplies axis `i` by `lambda^{w_i}` with
    /// `w_i = 1/alpha_i` (smooth) or `1/beta_k` (gained).
    pub fn scaling_weight(&self, axis: usize) -> f64 {
        1.0 / self.rho_exponent(axis)
    }

    pub fn scaling_weights(&self) -> Vec<f64> {
        (0..self.dims()).map(|a| self.scaling_weight(a)).collect()
    }

    /// Target Holder exponent on `axis`: `alpha_i gamma` or `beta_k gamma`.
    pub fn holder_target(&self, axis: usize) -> f64 {
        self.rho_exponent(axis) * self.gamma
    }

    /// Anisotropic distance `rho(x) = sum |x_i|^{alpha_i} + sum |x_k|^{beta_k}`.
    pub fn rho(&self, x: &[f64]) -> f64 {
        let mut r = 0.0;
        for &(axis, e) in self.smooth.iter().chain(self.gained.iter()) {
            r += x[axis].abs().powf(e);
        }
        r
    }
}

/// How difference stencils treat the box edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WrapMode {
    /// Stencil indices wrap modulo n (correct for periodic data).
    Periodic,
    /// Stencils that would cross the box edge are skipped (correct for
    /// compactly supported, non-periodic test functions).
    ExcludeEdge,
}

fn binomial_row(k: usize) -> Vec<f64> {
    let mut row = vec![1.0f64];
    for _ in 0..k {
        let mut next = vec![1.0; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

/// Signed k-th difference weights `(-1)^{k-i} C(k,i)`, i = 0..=k.
fn difference_weights(k: usize) -> Vec<f64> {
    let row = binomial_row(k);
    row.iter()
        .enumerate()
        .map(|(i, c)| if (k - i) % 2 == 0 { *c } else { -*c })
        .collect()
}

fn extract_lanes(values: &ArrayD<Complex64>, axis: usize) -> Vec<Vec<Complex64>> {
    values
        .lanes(Axis(axis))
        .into_iter()
        .map(|lane| lane.iter().copied().collect())
        .collect()
}

fn lane_sup_diff(lane: &[Complex64], weights: &[f64], step: usize, wrap: WrapMode) -> f64 {
    let n = lane.len();
    let k = weights.len() - 1;
    let reach = k * step;
    let base_end = match wrap {
        WrapMode::Periodic => n,
        WrapMode::ExcludeEdge => {
            if reach >= n {
                return 0.0;
            }
            n - reach
        }
    };
    let mut sup = 0.0f64;
    for base in 0..base_end {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, w) in weights.iter().enumerate() {
            let idx = match wrap {
                WrapMode::Periodic => (base + i * step) % n,
                WrapMode::ExcludeEdge => base + i * step,
            };
            acc += lane[idx] * *w;
        }
        let mag = acc.norm();
        if mag > sup {
            sup = mag;
        }
    }
    sup
}

/// `sup_x |Delta^k_{h,axis} u(x)|` at fixed step `h = step * spacing`.
pub(crate) fn sup_diff_array(
    values: &ArrayD<Complex64>,
    axis: usize,
    k: usize,
    step: usize,
    wrap: WrapMode,
) -> f64 {
    let weights = difference_weights(k);
    let lanes = extract_lanes(values, axis);
    lanes
        .par_iter()
        .map(|lane| lane_sup_diff(lane, &weights, step, wrap))
        .reduce(|| 0.0, f64::max)
}

/// Max over nodes and steps of `|Delta^k_h u| / h^l`, `h = m * spacing`,
/// `m = 1 ..= max_step`.
pub(crate) fn seminorm_array(
    values: &ArrayD<Complex64>,
    axis: usize,
    spacing: f64,
    l: f64,
    k: usize,
    max_step: usize,
    wrap: WrapMode,
) -> f64 {
    let weights = difference_weights(k);
    let lanes = extract_lanes(values, axis);
    lanes
        .par_iter()
        .map(|lane| {
            let mut best = 0.0f64;
            for m in 1..=max_step {
                let h = m as f64 * spacing;
                let sup = lane_sup_diff(lane, &weights, m, wrap);
                let ratio = sup / h.powf(l);
                if ratio > best {
                    best = ratio;
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

fn check_seminorm_args(u: &SampledField, axis: usize, l: f64, k: usize) -> Result<usize> {
    if u.side() != Side::Physical {
        return Err(Error::SideMismatch { expected: "physical", found: u.side().name() });
    }
    if axis >= u.grid().dims() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    if !(l > 0.0) {
        return Err(Error::InvalidArgument(format!("exponent l must be positive, got {l}")));
    }
    if (k as f64) <= l {
        return Err(Error::InvalidArgument(format!(
            "difference order k = {k} must exceed l = {l}"
        )));
    }
    let n = u.grid().points(axis);
    if n < k + 1 {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} has {n} points, need at least k+1 = {}",
            k + 1
        )));
    }
    let max_step = n / (2 * k);
    if max_step == 0 {
        return Err(Error::InvalidArgument(format!(
            "k * spacing exceeds extent on axis {axis} (n = {n}, k = {k})"
        )));
    }
    Ok(max_step)
}

/// Discrete partial Holder seminorm `sup |Delta^k_{h,x_i} u| / h^l` over all
/// nodes and steps `h = m * spacing`, `m <= n/(2k)`, with periodic wrap.
pub fn partial_seminorm(u: &SampledField, axis: usize, l: f64, k: usize) -> Result<f64> {
    partial_seminorm_with(u, axis, l, k, WrapMode::Periodic)
}

/// Same as [`partial_seminorm`] with an explicit edge policy.
pub fn partial_seminorm_with(
    u: &SampledField,
    axis: usize,
    l: f64,
    k: usize,
    wrap: WrapMode,
) -> Result<f64> {
    let max_step = check_seminorm_args(u, axis, l, k)?;
    Ok(seminorm_array(u.values(), axis, u.grid().spacing(axis), l, k, max_step, wrap))
}

/// One per-axis entry of a seminorm report.
#[derive(Clone, Debug, Serialize)]
pub struct AxisSeminorm {
    pub axis: usize,
    pub l: f64,
    pub k: usize,
    pub value: f64,
    pub fitted_exponent: Option<f64>,
}

/// Per-axis Holder seminorms plus the sup and quadrature L2 norms.
#[derive(Clone, Debug, Serialize)]
pub struct SeminormReport {
    pub per_axis: Vec<AxisSeminorm>,
    pub sup_norm: f64,
    pub l2_norm: f64,
}

impl SeminormReport {
    /// Norm of the C-scale: `|u|^(0) + sum_i <u>_i`.
    pub fn c_norm(&self) -> f64 {
        self.sup_norm + self.per_axis.iter().map(|e| e.value).sum::<f64>()
    }

    /// Norm of the H-scale: `||u||_2 + sum_i <u>_i`.
    pub fn h_norm(&self) -> f64 {
        self.l2_norm + self.per_axis.iter().map(|e| e.value).sum::<f64>()
    }

    /// CSV rows matching the header `axis,l,k,value,fitted_exponent`.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.per_axis
            .iter()
            .map(|e| {
                vec![
                    e.axis.to_string(),
                    crate::report::fmt_f64(e.l),
                    e.k.to_string(),
                    crate::report::fmt_f64(e.value),
                    e.fitted_exponent.map(crate::report::fmt_f64).unwrap_or_else(|| "flat".into()),
                ]
            })
            .collect()
    }

    pub const CSV_HEADER: [&'static str; 5] = ["axis", "l", "k", "value", "fitted_exponent"];
}

/// Anisotropic norm report at per-axis exponents `l_vec`, difference order
/// `floor(l_i) + 1` per axis.
pub fn aniso_norm(
    u: &SampledField,
    profile: &AnisotropyProfile,
    l_vec: &[f64],
    wrap: WrapMode,
) -> Result<SeminormReport> {
    let orders: Result<Vec<usize>> = l_vec
        .iter()
        .map(|&l| {
            if !(l > 0.0) {
                Err(Error::InvalidArgument(format!("exponent l must be positive, got {l}")))
            } else {
                Ok(l.floor() as usize + 1)
            }
        })
        .collect();
    aniso_norm_with_orders(u, profile, l_vec, &orders?, wrap)
}

/// [`aniso_norm`] with explicit difference orders (each `k_i > l_i`).
pub fn aniso_norm_with_orders(
    u: &SampledField,
    profile: &AnisotropyProfile,
    l_vec: &[f64],
    orders: &[usize],
    wrap: WrapMode,
) -> Result<SeminormReport> {
    if u.side() != Side::Physical {
        return Err(Error::SideMismatch { expected: "physical", found: u.side().name() });
    }
    let dims = u.grid().dims();
    if profile.dims() != dims || l_vec.len() != dims || orders.len() != dims {
        return Err(Error::InvalidArgument(format!(
            "profile/exponent/order lengths must match grid dims {dims}"
        )));
    }
    let mut per_axis = Vec::with_capacity(dims);
    for axis in 0..dims {
        let l = l_vec[axis];
        let k = orders[axis];
        let value = partial_seminorm_with(u, axis, l, k, wrap)?;
        let fitted = default_fit(u, axis, k, wrap).ok().and_then(|f| f.slope);
        per_axis.push(AxisSeminorm { axis, l, k, value, fitted_exponent: fitted });
    }
    Ok(SeminormReport { per_axis, sup_norm: u.sup_norm(), l2_norm: u.l2_norm() })
}

/// Least-squares modulus-of-continuity fit over a geometric step ladder.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentFit {
    /// `None` when the field is flat along the axis (all differences vanish).
    pub slope: Option<f64>,
    /// `(h, sup_x |Delta^k_h u|)` pairs actually used.
    pub ladder: Vec<(f64, f64)>,
}

/// Fit `log sup_x |Delta^k_h u|` against `log h` over a geometric ladder
/// (factor 2) inside `h_range`; the slope is clipped to `[0, k]`.
pub fn fit_exponent(
    u: &SampledField,
    axis: usize,
    k: usize,
    h_range: (f64, f64),
    wrap: WrapMode,
) -> Result<ExponentFit> {
    if u.side() != Side::Physical {
        return Err(Error::SideMismatch { expected: "physical", found: u.side().name() });
    }
    let grid = u.grid();
    if axis >= grid.dims() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    let spacing = grid.spacing(axis);
    let (h_min, h_max) = h_range;
    if h_min < spacing * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "h_min = {h_min} below grid spacing {spacing}"
        )));
    }
    let cap = grid.extent(axis) / (2.0 * k as f64);
    if h_max > cap * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "h_max = {h_max} above extent/(2k) = {cap}"
        )));
    }
    let mut steps = Vec::new();
    let mut m = (h_min / spacing).round().max(1.0) as usize;
    while m as f64 * spacing <= h_max * (1.0 + 1e-12) {
        steps.push(m);
        m *= 2;
    }
    if steps.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "degenerate ladder: only {} step values in [{h_min}, {h_max}]",
            steps.len()
        )));
    }
    let floor = 1e-14 * u.sup_norm().max(1e-300);
    let mut ladder = Vec::new();
    for &m in &steps {
        let h = m as f64 * spacing;
        let sup = sup_diff_array(u.values(), axis, k, m, wrap);
        ladder.push((h, sup));
    }
    let pts: Vec<(f64, f64)> =
        ladder.iter().filter(|&&(_, s)| s > floor).map(|&(h, s)| (h.ln(), s.ln())).collect();
    if pts.len() < 4 {
        return Ok(ExponentFit { slope: None, ladder });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok(ExponentFit { slope: Some(slope.clamp(0.0, k as f64)), ladder })
}

/// Default ladder for fitted exponents: `[spacing, extent/(2k)]`.
pub fn default_fit(u: &SampledField, axis: usize, k: usize, wrap: WrapMode) -> Result<ExponentFit> {
    let spacing = u.grid().spacing(axis);
    let cap = u.grid().extent(axis) / (2.0 * k as f64);
    fit_exponent(u, axis, k, (spacing, cap), wrap)
}

/// Ladder used by gain experiments: `[4 spacing, extent/8]`, which trades
/// away the most discretization-biased steps. Falls back to the full
/// `[spacing, extent/(2k)]` window when the grid is too coarse to fit
/// four rungs above `4 spacing`.
pub fn gain_fit(u: &SampledField, axis: usize, k: usize, wrap: WrapMode) -> Result<ExponentFit> {
    let spacing = u.grid().spacing(axis);
    let cap = u.grid().extent(axis) / (2.0 * k as f64);
    let mut lo = 4.0 * spacing;
    let mut hi = (u.grid().extent(axis) / 8.0).max(lo * 9.0).min(cap);
    if hi < lo * 8.0 {
        lo = spacing;
        hi = cap;
    }
    fit_exponent(u, axis, k, (lo, hi), wrap)
}

/// Parabolic-scale norm pieces: sup norm, the Holder-(l1 - [l1]) constants
/// in x of every spatial derivative of order [l1], and the
/// Holder-(l2 - [l2]) constant in t of the [l2]-th time derivative.
#[derive(Clone, Debug, Serialize)]
pub struct ParabolicReport {
    pub l1: f64,
    pub l2: f64,
    pub time_axis: usize,
    pub sup_norm: f64,
    /// `(spatial multi-index, sum over space axes of per-axis seminorms)`
    pub spatial_terms: Vec<(Vec<usize>, f64)>,
    pub time_term: f64,
    pub total: f64,
}

fn multi_indices(dims: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(dims: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if dims == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            rec(dims - 1, total - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dims == 0 {
        return out;
    }
    rec(dims, total, &mut Vec::new(), &mut out);
    out
}

/// All multi-indices over `dims` variables with total order `<= cap`
/// (including the zero index).
pub(crate) fn multi_indices_up_to(dims: usize, cap: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=cap {
        out.extend(multi_indices(dims, total));
    }
    out
}

/// Norm of the space `C^{l1, l2}`: derivatives are computed spectrally, so
/// the field must be well resolved (band-limited or smooth samples).
pub fn parabolic_norm(
    u: &SampledField,
    time_axis: usize,
    l1: f64,
    l2: f64,
    wrap: WrapMode,
) -> Result<ParabolicReport> {
    if u.side() != Side::Physical {
        return Err(Error::SideMismatch { expected: "physical", found: u.side().name() });
    }
    let dims = u.grid().dims();
    if time_axis >= dims {
        return Err(Error::InvalidArgument(format!("time axis {time_axis} out of range")));
    }
    for (name, l) in [("l1", l1), ("l2", l2)] {
        if !(l > 0.0) || l.fract() == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} must be a positive non-integer, got {l}"
            )));
        }
    }
    let space_axes: Vec<usize> = (0..dims).filter(|&a| a != time_axis).collect();
    let l1_int = l1.floor() as usize;
    let l1_frac = l1 - l1_int as f64;
    let l2_int = l2.floor() as usize;
    let l2_frac = l2 - l2_int as f64;

    let mut spatial_terms = Vec::new();
    for alpha in multi_indices(space_axes.len().max(1), l1_int) {
        let mut order = vec![0usize; dims];
        for (slot, &axis) in space_axes.iter().enumerate() {
            order[axis] = alpha[slot];
        }
        let d = crate::field::spectral_derivative(u, &order)?;
        let mut sum = 0.0;
        for &axis in &space_axes {
            sum += partial_seminorm_with(&d, axis, l1_frac, 1, wrap)?;
        }
        spatial_terms.push((order, sum));
    }

    let mut t_order = vec![0usize; dims];
    t_order[time_axis] = l2_int;
    let dt = if l2_int > 0 { crate::field::spectral_derivative(u, &t_order)? } else { u.clone() };
    let time_term = partial_seminorm_with(&dt, time_axis, l2_frac, 1, wrap)?;

    let sup_norm = u.sup_norm();
    let total = sup_norm + spatial_terms.iter().map(|t| t.1).sum::<f64>() + time_term;
    Ok(ParabolicReport { l1, l2, time_axis, sup_norm, spatial_terms, time_term, total })
}
