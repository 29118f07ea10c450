//! Anisotropic Littlewood-Paley machinery: the distance rho, the smooth
//! cutoffs psi/phi/omega, the dyadic partition of unity, block
//! decomposition of fields, localized kernels, and the weighted-integral
//! and zero-mean diagnostics behind the multiplier theorems.

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{inverse_transform, for_each_index, Grid, SampledField, Side};
use crate::holder::AnisotropyProfile;
use crate::symbols::Symbol;

/// Smooth monotone step: 0 for `t <= 0`, 1 for `t >= 1`, C-infinity in
/// between, built from the `exp(-1/t)` mollifier profile.
pub fn smooth_step(t: f64, sharpness: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let f = (-sharpness / t).exp();
    let g = (-sharpness / (1.0 - t)).exp();
    f / (f + g)
}

/// The cutoff triple of the dyadic construction:
/// `psi = 1` on `[0,1]`, `0` on `[2,inf)`; `phi(r) = psi(r) - psi(2r)`
/// (support `[1/2, 2]` by construction); `omega = 1` on `[1/2, 2]`,
/// `0` outside `(1/4, 4)`.
#[derive(Clone, Debug)]
pub struct CutoffPair {
    sharpness: f64,
}

impl CutoffPair {
    pub fn psi(&self, rho: f64) -> f64 {
        1.0 - smooth_step(rho - 1.0, self.sharpness)
    }

    pub fn phi(&self, rho: f64) -> f64 {
        self.psi(rho) - self.psi(2.0 * rho)
    }

    pub fn omega(&self, rho: f64) -> f64 {
        smooth_step((rho - 0.25) * 4.0, self.sharpness)
            * (1.0 - smooth_step((rho - 2.0) / 2.0, self.sharpness))
    }

    /// `phi(rho / 2^j)`.
    pub fn phi_level(&self, rho: f64, j: i32) -> f64 {
        self.phi(rho / 2f64.powi(j))
    }

    /// `chi(xi) = omega(rho(xi))` for a profile-induced distance.
    pub fn chi(&self, profile: &AnisotropyProfile, xi: &[f64]) -> f64 {
        self.omega(profile.rho(xi))
    }
}

/// Build the cutoff pair with the given transition sharpness (any positive
/// value yields valid plateaus; the default used across the crate is 1).
pub fn build_cutoffs(transition_sharpness: f64) -> CutoffPair {
    CutoffPair { sharpness: transition_sharpness.max(1e-6) }
}

/// Anisotropic distance `rho(x) = sum_smooth |x_i|^{alpha_i} +
/// sum_gained |x_k|^{beta_k}`.
pub fn aniso_distance(x: &[f64], profile: &AnisotropyProfile) -> f64 {
    profile.rho(x)
}

/// The dyadic scaling `A_j` at level `j`: axis `i` is multiplied by
/// `2^{j w_i}` with `w_i` the profile's scaling weight.
#[derive(Clone, Debug)]
pub struct DyadicScaler {
    weights: Vec<f64>,
    pub j: i32,
}

impl DyadicScaler {
    pub fn new(profile: &AnisotropyProfile, j: i32) -> DyadicScaler {
        DyadicScaler { weights: profile.scaling_weights(), j }
    }

    pub fn from_weights(weights: &[f64], j: i32) -> DyadicScaler {
        DyadicScaler { weights: weights.to_vec(), j }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.weights.iter())
            .map(|(&v, &w)| 2f64.powf(self.j as f64 * w) * v)
            .collect()
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.weights.iter())
            .map(|(&v, &w)| 2f64.powf(-(self.j as f64) * w) * v)
            .collect()
    }

    /// Determinant `a_j = 2^{j sum_i w_i}`, the Jacobian of `A_j`.
    pub fn determinant(&self) -> f64 {
        2f64.powf(self.j as f64 * self.weights.iter().sum::<f64>())
    }
}

/// Max over the samples of `|sum_j phi(rho(xi)/2^j) - 1|`. Rejects when
/// the level range cannot cover some sample's dyadic shell.
pub fn partition_residual(
    profile: &AnisotropyProfile,
    cutoffs: &CutoffPair,
    xi_samples: &[Vec<f64>],
    j_range: (i32, i32),
) -> Result<f64> {
    let (j_min, j_max) = j_range;
    if j_min > j_max {
        return Err(Error::InvalidArgument(format!("empty level range [{j_min}, {j_max}]")));
    }
    let mut max_residual = 0.0f64;
    for xi in xi_samples {
        let rho = profile.rho(xi);
        if rho == 0.0 {
            continue;
        }
        if 2f64.powi(j_min) > rho / 4.0 || 2f64.powi(j_max) < 4.0 * rho {
            return Err(Error::InvalidArgument(format!(
                "level range [{j_min}, {j_max}] too narrow for xi = {xi:?} with rho = {rho}"
            )));
        }
        let sum: f64 = (j_min..=j_max).map(|j| cutoffs.phi_level(rho, j)).sum();
        max_residual = max_residual.max((sum - 1.0).abs());
    }
    Ok(max_residual)
}

/// Dyadic levels resolved by the grid: from the finest nonzero `rho` on the
/// frequency lattice (rounded down, minus one) to the Nyquist `rho`
/// (rounded up, plus one).
pub fn default_j_range(grid: &Grid, profile: &AnisotropyProfile) -> (i32, i32) {
    let mut rho_min = f64::INFINITY;
    let mut corner = vec![0.0f64; grid.dims()];
    for axis in 0..grid.dims() {
        let mut xi = vec![0.0f64; grid.dims()];
        xi[axis] = grid.freq_spacing(axis);
        rho_min = rho_min.min(profile.rho(&xi));
        corner[axis] = grid.freq_spacing(axis) * (grid.points(axis) / 2) as f64;
    }
    let rho_max = profile.rho(&corner);
    (rho_min.log2().floor() as i32 - 1, rho_max.log2().ceil() as i32 + 1)
}

/// Frequency-side samples of `rho` over the whole grid, in bin order.
fn rho_grid(grid: &Grid, profile: &AnisotropyProfile) -> Vec<f64> {
    let tables: Vec<Vec<f64>> = (0..grid.dims()).map(|a| grid.freq_table(a)).collect();
    let mut out = Vec::with_capacity(grid.total_points());
    let mut xi = vec![0.0f64; grid.dims()];
    for_each_index(grid.shape(), |idx| {
        for (a, &i) in idx.iter().enumerate() {
            xi[a] = tables[a][i];
        }
        out.push(profile.rho(&xi));
    });
    out
}

/// Littlewood-Paley blocks `u_j = F^{-1}(u~ phi(rho/2^j))` for `j` in the
/// given range; the sum of all blocks reproduces `u` minus its DC bin.
pub fn block_decompose(
    u: &SampledField,
    profile: &AnisotropyProfile,
    cutoffs: &CutoffPair,
    j_range: (i32, i32),
) -> Result<Vec<SampledField>> {
    if u.side() != Side::Physical {
        return Err(Error::SideMismatch { expected: "physical", found: u.side().name() });
    }
    if profile.dims() != u.grid().dims() {
        return Err(Error::InvalidArgument("profile dims must match grid".into()));
    }
    let spec = crate::field::forward_transform(u)?;
    let rho = rho_grid(u.grid(), profile);
    let mut blocks = Vec::new();
    for j in j_range.0..=j_range.1 {
        let mut values = spec.values().clone();
        {
            let slice = values.as_slice_mut().expect("contiguous");
            for (v, &r) in slice.iter_mut().zip(rho.iter()) {
                *v *= cutoffs.phi_level(r, j);
            }
        }
        let block = SampledField::from_values(u.grid().clone(), Side::Frequency, values)?;
        blocks.push(inverse_transform(&block)?);
    }
    Ok(blocks)
}

/// Localized kernel at level `j` on the level-0 grid: by the rescaling
/// identity its spectrum is `m(A_j xi) chi(xi)` sampled on the frequency
/// lattice, so one grid serves every level.
pub fn localized_kernel(
    m: &Symbol,
    j: i32,
    grid: &Grid,
    cutoffs: &CutoffPair,
) -> Result<SampledField> {
    kernel_with_extra(m, j, grid, cutoffs, |_, _| 1.0)
}

/// Kernel `theta_j = n_j * Phi` (spectrum `m(A_j xi) chi(xi) phi(rho(xi))`).
pub fn theta_kernel(
    m: &Symbol,
    j: i32,
    grid: &Grid,
    cutoffs: &CutoffPair,
) -> Result<SampledField> {
    kernel_with_extra(m, j, grid, cutoffs, |c, rho| c.phi(rho))
}

fn kernel_with_extra(
    m: &Symbol,
    j: i32,
    grid: &Grid,
    cutoffs: &CutoffPair,
    extra: impl Fn(&CutoffPair, f64) -> f64,
) -> Result<SampledField> {
    if m.dims() != grid.dims() {
        return Err(Error::InvalidArgument(format!(
            "symbol dims {} do not match grid dims {}",
            m.dims(),
            grid.dims()
        )));
    }
    // chi is supported in rho <= 4; demand headroom so the annulus at
    // level 0 is inside the resolved lattice
    let mut corner = vec![0.0f64; grid.dims()];
    for axis in 0..grid.dims() {
        corner[axis] = grid.freq_spacing(axis) * (grid.points(axis) / 2) as f64;
    }
    let rho_nyquist: f64 =
        corner.iter().zip(m.weights().iter()).map(|(&c, &w)| c.abs().powf(1.0 / w)).sum();
    if rho_nyquist < 8.0 {
        return Err(Error::UnderResolved(format!(
            "grid resolves rho up to {rho_nyquist:.3}, need >= 8 for the level-0 annulus"
        )));
    }
    let scaler = DyadicScaler::from_weights(m.weights(), j);
    let tables: Vec<Vec<f64>> = (0..grid.dims()).map(|a| grid.freq_table(a)).collect();
    let mut values = ArrayD::<Complex64>::zeros(IxDyn(grid.shape()));
    let mut err: Option<Error> = None;
    {
        let slice = values.as_slice_mut().expect("contiguous");
        let mut xi = vec![0.0f64; grid.dims()];
        let mut flat = 0usize;
        for_each_index(grid.shape(), |idx| {
            for (a, &i) in idx.iter().enumerate() {
                xi[a] = tables[a][i];
            }
            let rho = m.rho(&xi);
            let weight = cutoffs.omega(rho) * extra(cutoffs, rho);
            if weight != 0.0 && err.is_none() {
                match m.eval(&scaler.apply(&xi)) {
                    Ok(v) => slice[flat] = v * weight,
                    Err(e) => err = Some(e),
                }
            }
            flat += 1;
        });
    }
    if let Some(e) = err {
        return Err(e);
    }
    let spec = SampledField::from_values(grid.clone(), Side::Frequency, values)?;
    inverse_transform(&spec)
}

/// Weighted moment integral of a localized kernel.
#[derive(Clone, Debug, Serialize)]
pub struct MomentIntegral {
    /// Quadrature value of `int (1 + sum_smooth |x_i|^{alpha_i gamma}) |n_j| dx`.
    pub value: f64,
    /// Fraction of the integrand mass outside the central half-box; should
    /// stay below ~1% or the box is too small for the decay of `n_j`.
    pub edge_fraction: f64,
}

/// The empirical `mu` contribution at one level: the weighted `L^1` mass
/// of `n_j` with the group-(1) moment weights.
pub fn moment_integral(
    n_j: &SampledField,
    profile: &AnisotropyProfile,
    gamma: f64,
) -> Result<MomentIntegral> {
    if n_j.side() != Side::Physical {
        return Err(Error::SideMismatch { expected: "physical", found: n_j.side().name() });
    }
    let grid = n_j.grid();
    if profile.dims() != grid.dims() {
        return Err(Error::InvalidArgument("profile dims must match grid".into()));
    }
    let tables: Vec<Vec<f64>> = (0..grid.dims()).map(|a| grid.node_table(a)).collect();
    let smooth = profile.smooth_axes().to_vec();
    let mut total = 0.0f64;
    let mut edge = 0.0f64;
    let slice = n_j.values().as_slice().expect("contiguous");
    let mut flat = 0usize;
    for_each_index(grid.shape(), |idx| {
        let mag = slice[flat].norm();
        flat += 1;
        if mag == 0.0 {
            return;
        }
        let mut weight = 1.0;
        let mut at_edge = false;
        for (a, &i) in idx.iter().enumerate() {
            let x = tables[a][i];
            if x.abs() > grid.extent(a) / 2.0 {
                at_edge = true;
            }
            if let Some(&(_, alpha)) = smooth.iter().find(|&&(ax, _)| ax == a) {
                weight += x.abs().powf(alpha * gamma);
            }
        }
        let contrib = weight * mag;
        total += contrib;
        if at_edge {
            edge += contrib;
        }
    });
    let value = total * grid.cell_volume();
    let edge_fraction = if total > 0.0 { edge / total } else { 0.0 };
    Ok(MomentIntegral { value, edge_fraction })
}

/// Max over the kept (slice) coordinates of the integral of `theta_j` over
/// the complementary axes, normalized by the L^1 mass of `theta_j`.
///
/// For a symbol with a vanishing group-(1) slice this is the discrete form
/// of the zero-mean property of the localized kernels.
pub fn zero_mean_slice_residual(theta_j: &SampledField, slice_axes: &[usize]) -> Result<f64> {
    if theta_j.side() != Side::Physical {
        return Err(Error::SideMismatch { expected: "physical", found: theta_j.side().name() });
    }
    let grid = theta_j.grid();
    for &a in slice_axes {
        if a >= grid.dims() {
            return Err(Error::InvalidArgument(format!("slice axis {a} out of range")));
        }
    }
    let integrate_axes: Vec<usize> =
        (0..grid.dims()).filter(|a| !slice_axes.contains(a)).collect();
    let measure: f64 = integrate_axes.iter().map(|&a| grid.spacing(a)).product();

    // accumulate the partial integrals indexed by the kept coordinates
    let kept_shape: Vec<usize> = slice_axes.iter().map(|&a| grid.points(a)).collect();
    let kept_total: usize = kept_shape.iter().product::<usize>().max(1);
    let mut sums = vec![Complex64::new(0.0, 0.0); kept_total];
    let slice = theta_j.values().as_slice().expect("contiguous");
    let mut l1 = 0.0f64;
    let mut flat = 0usize;
    for_each_index(grid.shape(), |idx| {
        let v = slice[flat];
        flat += 1;
        l1 += v.norm();
        let mut kept_flat = 0usize;
        for (slot, &a) in slice_axes.iter().enumerate() {
            kept_flat = kept_flat * kept_shape[slot] + idx[a];
        }
        sums[kept_flat] += v;
    });
    let l1_mass = l1 * grid.cell_volume();
    if l1_mass == 0.0 {
        return Ok(0.0);
    }
    let max_abs = sums.iter().map(|s| s.norm()).fold(0.0, f64::max) * measure;
    Ok(max_abs / l1_mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sample;
    use crate::symbols;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn profile_basic() -> AnisotropyProfile {
        AnisotropyProfile::new(0.5, &[(0, 1.0), (1, 0.5)], &[(2, 2.0)]).unwrap()
    }

    #[test]
    fn cutoff_plateaus() {
        let c = build_cutoffs(1.0);
        assert_eq!(c.omega(1.0), 1.0);
        assert_eq!(c.omega(0.5), 1.0);
        assert_eq!(c.omega(2.0), 1.0);
        assert_eq!(c.omega(0.1), 0.0);
        assert_eq!(c.omega(5.0), 0.0);
        assert_eq!(c.psi(0.5), 1.0);
        assert_eq!(c.psi(1.0), 1.0);
        assert_eq!(c.psi(3.0), 0.0);
        // phi(0.4) = psi(0.4) - psi(0.8) = 1 - 1 = 0
        assert_eq!(c.phi(0.4), 0.0);
        assert_eq!(c.phi(2.5), 0.0);
        for i in 0..=400 {
            let r = i as f64 * 0.01;
            for v in [c.psi(r), c.phi(r), c.omega(r)] {
                assert!((-1e-15..=1.0 + 1e-15).contains(&v), "value {v} at rho {r}");
            }
        }
        // derived support of phi is [1/2, 2]
        for i in 0..=50 {
            let r = i as f64 * 0.01;
            assert_eq!(c.phi(r), 0.0, "phi nonzero at {r}");
        }
    }

    #[test]
    fn psi_equals_truncated_tail_sum() {
        let c = build_cutoffs(1.0);
        for i in 1..=300 {
            let rho = i as f64 * 0.01;
            let sum: f64 = (-12..=0).map(|j| c.phi_level(rho, j)).sum();
            // telescoping: sum_{j<=0} phi(rho/2^j) = psi(rho) - psi(2^13 rho)
            if rho >= 2f64.powi(-11) {
                assert!((sum - c.psi(rho)).abs() < 1e-14, "rho {rho}");
            }
        }
    }

    #[test]
    fn distance_values() {
        let p = AnisotropyProfile::new(0.5, &[(0, 1.0), (1, 1.0), (2, 0.5)], &[(3, 2.0)]).unwrap();
        assert!((aniso_distance(&[1.0, 0.0, 0.0, 0.0], &p) - 1.0).abs() < 1e-15);
        assert!((aniso_distance(&[0.0, 0.0, 4.0, 0.0], &p) - 2.0).abs() < 1e-15);
        assert_eq!(aniso_distance(&[0.0; 4], &p), 0.0);
        assert!(aniso_distance(&[1e-3, 0.0, 0.0, 0.0], &p) > 0.0);
    }

    #[test]
    fn scaler_determinant_matches_product() {
        let p = profile_basic();
        for j in [-3, 0, 2, 5] {
            let s = DyadicScaler::new(&p, j);
            let image = s.apply(&[1.0, 1.0, 1.0]);
            let product: f64 = image.iter().product();
            assert!((s.determinant() - product).abs() < 1e-12 * product.abs().max(1.0));
        }
    }

    #[test]
    fn partition_of_unity_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = profile_basic();
        let c = build_cutoffs(1.0);
        let mut samples = Vec::new();
        while samples.len() < 2000 {
            let xi: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let rho = p.rho(&xi);
            if (0.125..=8.0).contains(&rho) {
                samples.push(xi);
            }
        }
        let res = partition_residual(&p, &c, &samples, (-6, 6)).unwrap();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn partition_rejects_narrow_range() {
        let p = profile_basic();
        let c = build_cutoffs(1.0);
        let samples = vec![vec![4.0, 0.0, 0.0]];
        assert!(partition_residual(&p, &c, &samples, (-1, 1)).is_err());
        assert!(partition_residual(&p, &c, &samples, (1, -1)).is_err());
    }

    #[test]
    fn single_point_telescoping_sum() {
        let p = profile_basic();
        let c = build_cutoffs(1.0);
        let xi = vec![1.0, 0.0, 0.0]; // rho = 1
        let res = partition_residual(&p, &c, &[xi], (-4, 4)).unwrap();
        assert!(res < 1e-15);
    }

    #[test]
    fn blocks_reconstruct_field() {
        let grid = Grid::cubic(2, std::f64::consts::PI, 32).unwrap();
        let p = AnisotropyProfile::new(0.5, &[(0, 1.0)], &[(1, 1.0)]).unwrap();
        let c = build_cutoffs(1.0);
        let u = sample(&grid, |x| {
            (3.0 * x[0]).sin() * (2.0 * x[1]).cos() + 0.4 * (7.0 * x[0] + x[1]).sin()
        })
        .unwrap();
        let j_range = default_j_range(&grid, &p);
        let blocks = block_decompose(&u, &p, &c, j_range).unwrap();

        // remove the DC bin from u for the comparison
        let mut spec = crate::field::forward_transform(&u).unwrap();
        let zero_idx = IxDyn(&vec![0; 2]);
        spec.values_mut()[zero_idx] = Complex64::new(0.0, 0.0);
        let u_ac = inverse_transform(&spec).unwrap();

        let mut sum = SampledField::zeros(grid.clone(), Side::Physical);
        for b in &blocks {
            sum = sum.combine(b, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        }
        let err = sum
            .values()
            .iter()
            .zip(u_ac.values().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "reconstruction residual {err}");
    }

    #[test]
    fn band_limited_field_occupies_few_blocks() {
        let grid = Grid::cubic(2, std::f64::consts::PI, 32).unwrap();
        let p = AnisotropyProfile::new(0.5, &[(0, 1.0)], &[(1, 1.0)]).unwrap();
        let c = build_cutoffs(1.0);
        // spectrum at (+-1, +-1): rho = 2
        let u = sample(&grid, |x| (x[0]).sin() * (x[1]).sin()).unwrap();
        let blocks = block_decompose(&u, &p, &c, (-4, 6)).unwrap();
        let nonzero: Vec<i32> = blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.sup_norm() > 1e-12)
            .map(|(i, _)| i as i32 - 4)
            .collect();
        assert!(!nonzero.is_empty());
        assert!(nonzero.len() <= 3, "nonzero blocks at levels {nonzero:?}");
        for j in &nonzero {
            assert!((0..=2).contains(j), "unexpected level {j}");
        }
    }

    #[test]
    fn zero_field_blocks_are_zero() {
        let grid = Grid::cubic(2, 3.0, 16).unwrap();
        let p = AnisotropyProfile::new(0.5, &[(0, 1.0)], &[(1, 1.0)]).unwrap();
        let c = build_cutoffs(1.0);
        let u = sample(&grid, |_| 0.0).unwrap();
        let blocks = block_decompose(&u, &p, &c, (-2, 2)).unwrap();
        for b in blocks {
            assert_eq!(b.sup_norm(), 0.0);
        }
    }

    #[test]
    fn block_support_orthogonality() {
        // blocks j and j' with |j - j'| >= 2 have disjoint spectral support
        let grid = Grid::cubic(2, std::f64::consts::PI, 32).unwrap();
        let p = AnisotropyProfile::new(0.5, &[(0, 1.0)], &[(1, 1.0)]).unwrap();
        let c = build_cutoffs(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = crate::synth::band_limited_noise(&grid, 1.0, 8.0, &mut rng).unwrap();
        let j_range = default_j_range(&grid, &p);
        let blocks = block_decompose(&u, &p, &c, j_range).unwrap();
        let spectra: Vec<Vec<bool>> = blocks
            .iter()
            .map(|b| {
                crate::field::forward_transform(b)
                    .unwrap()
                    .values()
                    .iter()
                    .map(|v| v.norm() > 1e-13)
                    .collect()
            })
            .collect();
        for i in 0..spectra.len() {
            for j in 0..spectra.len() {
                if i.abs_diff(j) >= 2 {
                    let overlap =
                        spectra[i].iter().zip(spectra[j].iter()).any(|(&a, &b)| a && b);
                    assert!(!overlap, "blocks {i} and {j} overlap");
                }
            }
        }
    }

    #[test]
    fn kernel_scaling_identity() {
        // forward transform of localized_kernel(m, j) equals m(A_j xi) chi(xi)
        let grid = Grid::cubic(2, std::f64::consts::PI, 64).unwrap();
        let c = build_cutoffs(1.0);
        let m = symbols::riesz_second_order(2, 1, 0).unwrap();
        let n1 = localized_kernel(&m, 1, &grid, &c).unwrap();
        let spec = crate::field::forward_transform(&n1).unwrap();
        let mut worst = 0.0f64;
        let mut xi = vec![0.0; 2];
        let scaler = DyadicScaler::from_weights(m.weights(), 1);
        for (idx, v) in spec.values().indexed_iter() {
            for a in 0..2 {
                xi[a] = grid.freq_coord(a, idx[a]);
            }
            let rho = m.rho(&xi);
            let want = if c.omega(rho) != 0.0 {
                m.eval(&scaler.apply(&xi)).unwrap() * c.omega(rho)
            } else {
                Complex64::new(0.0, 0.0)
            };
            worst = worst.max((v - want).norm());
        }
        assert!(worst < 1e-10, "identity residual {worst}");
    }

    #[test]
    fn homogeneous_kernels_are_level_independent() {
        let grid = Grid::cubic(2, std::f64::consts::PI, 64).unwrap();
        let c = build_cutoffs(1.0);
        for m in [
            symbols::riesz_second_order(2, 1, 0).unwrap(),
            symbols::heat_time_derivative(2, 1.0).unwrap(),
        ] {
            let k0 = localized_kernel(&m, 0, &grid, &c).unwrap();
            let k3 = localized_kernel(&m, 3, &grid, &c).unwrap();
            let err = k0
                .values()
                .iter()
                .zip(k3.values().iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "{}: kernels differ by {err}", m.name());
        }
    }

    #[test]
    fn kernel_requires_resolved_annulus() {
        let grid = Grid::cubic(2, 16.0, 16).unwrap(); // Nyquist rho ~ 3.1
        let c = build_cutoffs(1.0);
        let m = symbols::riesz_second_order(2, 1, 0).unwrap();
        assert!(matches!(
            localized_kernel(&m, 0, &grid, &c),
            Err(Error::UnderResolved(_))
        ));
    }

    #[test]
    fn moment_integral_properties() {
        let grid = Grid::cubic(2, std::f64::consts::PI * 4.0, 128).unwrap();
        let p = AnisotropyProfile::new(0.5, &[(0, 1.0)], &[(1, 1.0)]).unwrap();
        let c = build_cutoffs(1.0);
        let m = symbols::constant(2, Complex64::new(1.0, 0.0));
        // n_j for the constant symbol is the chi kernel itself
        let n = localized_kernel(&m, 0, &grid, &c).unwrap();
        let mi = moment_integral(&n, &p, 0.5).unwrap();
        assert!(mi.value.is_finite() && mi.value > 0.0);

        let doubled = n.scaled(Complex64::new(2.0, 0.0));
        let mi2 = moment_integral(&doubled, &p, 0.5).unwrap();
        assert!((mi2.value - 2.0 * mi.value).abs() < 1e-12 * mi.value);

        let zero = SampledField::zeros(grid, Side::Physical);
        assert_eq!(moment_integral(&zero, &p, 0.5).unwrap().value, 0.0);
    }

    #[test]
    fn moment_integral_level_independent_for_homogeneous_symbols() {
        let grid = Grid::cubic(2, std::f64::consts::PI * 48.0, 1024).unwrap();
        let p = AnisotropyProfile::new(0.5, &[(0, 1.0)], &[(1, 1.0)]).unwrap();
        let c = build_cutoffs(1.0);
        let m = symbols::riesz_second_order(2, 1, 0).unwrap();
        let mut values = Vec::new();
        for j in [-2, 0, 3] {
            let n = localized_kernel(&m, j, &grid, &c).unwrap();
            let mi = moment_integral(&n, &p, 0.5).unwrap();
            assert!(mi.edge_fraction < 0.02, "edge mass {}", mi.edge_fraction);
            values.push(mi.value);
        }
        let spread = (values.iter().cloned().fold(f64::MIN, f64::max)
            - values.iter().cloned().fold(f64::MAX, f64::min))
            / values[1];
        assert!(spread < 0.01, "moment integrals vary by {spread}");
    }

    #[test]
    fn edge_mass_drops_under_box_enlargement() {
        // the integrand tails are algebraic (the l1 distance has kinks on
        // coordinate hyperplanes), so the monitoring rule matters: the box
        // is grown until the edge fraction is below 1%
        let p = AnisotropyProfile::new(0.5, &[(0, 1.0)], &[(1, 1.0)]).unwrap();
        let c = build_cutoffs(1.0);
        let m = symbols::riesz_second_order(2, 1, 0).unwrap();
        let small = Grid::cubic(2, std::f64::consts::PI * 24.0, 512).unwrap();
        let big = Grid::cubic(2, std::f64::consts::PI * 96.0, 2048).unwrap();
        let mi_small = moment_integral(
            &localized_kernel(&m, 0, &small, &c).unwrap(),
            &p,
            0.5,
        )
        .unwrap();
        let mi_big =
            moment_integral(&localized_kernel(&m, 0, &big, &c).unwrap(), &p, 0.5).unwrap();
        assert!(mi_big.edge_fraction < 0.01, "large-box edge mass {}", mi_big.edge_fraction);
        assert!(mi_big.edge_fraction < 0.5 * mi_small.edge_fraction);
        // the value itself is converged to a few percent at this size
        assert!((mi_big.value - mi_small.value).abs() < 0.05 * mi_big.value);
    }

    #[test]
    fn zero_mean_slices() {
        let grid = Grid::cubic(2, std::f64::consts::PI * 4.0, 128).unwrap();
        let c = build_cutoffs(1.0);

        // vanishing slice holds for riesz: residual small
        let m = symbols::riesz_second_order(2, 1, 0).unwrap();
        let theta = theta_kernel(&m, 0, &grid, &c).unwrap();
        let res = zero_mean_slice_residual(&theta, &[1]).unwrap();
        assert!(res < 1e-8, "riesz residual {res}");

        // constant symbol violates the condition: residual O(1)
        let one = symbols::constant(2, Complex64::new(1.0, 0.0));
        let theta = theta_kernel(&one, 0, &grid, &c).unwrap();
        let res = zero_mean_slice_residual(&theta, &[1]).unwrap();
        assert!(res > 0.05, "constant-symbol residual unexpectedly small: {res}");

        let zero = SampledField::zeros(grid, Side::Physical);
        assert_eq!(zero_mean_slice_residual(&zero, &[1]).unwrap(), 0.0);
    }
}
