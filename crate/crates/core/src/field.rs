//! Uniform-grid sampled fields over a periodic box with forward/inverse
//! discrete Fourier transforms.
//!
//! The box on axis `i` is `[-L_i, L_i)` with `n_i` equispaced nodes, so the
//! transforms approximate the continuum pair
//!
//! ```text
//!   u~(xi) = Int e^{-i x.xi} u(x) dx,      u(x) = (2 pi)^{-N} Int e^{i x.xi} u~(xi) dxi
//! ```
//!
//! with frequency nodes `xi_m = pi m / L_i`, `m = -n_i/2 .. n_i/2 - 1`.
//! Frequency-side arrays are stored in FFT bin order (DC first).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use ndarray::{ArrayD, Axis, IxDyn};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Which side of the transform a field lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Physical,
    Frequency,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Physical => "physical",
            Side::Frequency => "frequency",
        }
    }
}

/// Uniform periodic grid over the box `prod_i [-L_i, L_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    extents: Vec<f64>,
    points: Vec<usize>,
}

impl Grid {
    /// `extents[i]` is the half-width `L_i`, `points[i]` the (even, >= 4)
    /// number of nodes on axis `i`.
    pub fn new(extents: &[f64], points: &[usize]) -> Result<Grid> {
        if extents.is_empty() || extents.len() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "grid needs matching non-empty extents/points, got {}/{}",
                extents.len(),
                points.len()
            )));
        }
        for (axis, (&l, &n)) in extents.iter().zip(points.iter()).enumerate() {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "axis {axis}: extent must be positive and finite, got {l}"
                )));
            }
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "axis {axis}: points must be even and >= 4, got {n}"
                )));
            }
        }
        Ok(Grid { extents: extents.to_vec(), points: points.to_vec() })
    }

    /// Isotropic shorthand: same extent and point count on every axis.
    pub fn cubic(dims: usize, extent: f64, points: usize) -> Result<Grid> {
        Grid::new(&vec![extent; dims], &vec![points; dims])
    }

    pub fn dims(&self) -> usize {
        self.extents.len()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extents[axis]
    }

    pub fn points(&self, axis: usize) -> usize {
        self.points[axis]
    }

    pub fn shape(&self) -> &[usize] {
        &self.points
    }

    /// Node spacing `2 L_i / n_i`; `spacing * points == 2 * extent` exactly.
    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.extents[axis] / self.points[axis] as f64
    }

    pub fn total_points(&self) -> usize {
        self.points.iter().product()
    }

    /// Volume of one grid cell, `prod_i spacing_i`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|a| self.spacing(a)).product()
    }

    /// Volume of the whole box, `prod_i 2 L_i`.
    pub fn box_volume(&self) -> f64 {
        self.extents.iter().map(|l| 2.0 * l).product()
    }

    /// Physical coordinate of node `idx` on `axis`.
    pub fn node_coord(&self, axis: usize, idx: usize) -> f64 {
        -self.extents[axis] + idx as f64 * self.spacing(axis)
    }

    /// Signed integer frequency index of FFT bin `bin` on `axis`.
    pub fn freq_index(&self, axis: usize, bin: usize) -> i64 {
        let n = self.points[axis];
        if bin < n / 2 {
            bin as i64
        } else {
            bin as i64 - n as i64
        }
    }

    /// Frequency coordinate `xi = pi m / L` of FFT bin `bin` on `axis`.
    pub fn freq_coord(&self, axis: usize, bin: usize) -> f64 {
        std::f64::consts::PI * self.freq_index(axis, bin) as f64 / self.extents[axis]
    }

    /// Per-axis table of frequency coordinates in bin order.
    pub fn freq_table(&self, axis: usize) -> Vec<f64> {
        (0..self.points[axis]).map(|b| self.freq_coord(axis, b)).collect()
    }

    /// Per-axis table of node coordinates.
    pub fn node_table(&self, axis: usize) -> Vec<f64> {
        (0..self.points[axis]).map(|b| self.node_coord(axis, b)).collect()
    }

    /// Frequency spacing `pi / L` on `axis`.
    pub fn freq_spacing(&self, axis: usize) -> f64 {
        std::f64::consts::PI / self.extents[axis]
    }
}

/// Visit every multi-index of `shape` in row-major order.
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; shape.len()];
    loop {
        f(&idx);
        let mut axis = shape.len();
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < shape[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Complex samples of a function on a [`Grid`], on either transform side.
#[derive(Clone, Debug)]
pub struct SampledField {
    grid: Grid,
    side: Side,
    values: ArrayD<Complex64>,
}

impl SampledField {
    pub fn from_values(grid: Grid, side: Side, values: ArrayD<Complex64>) -> Result<SampledField> {
        if values.shape() != grid.shape() {
            return Err(Error::InvalidArgument(format!(
                "value shape {:?} does not match grid shape {:?}",
                values.shape(),
                grid.shape()
            )));
        }
        Ok(SampledField { grid, side, values })
    }

    pub fn zeros(grid: Grid, side: Side) -> SampledField {
        let values = ArrayD::zeros(IxDyn(grid.shape()));
        SampledField { grid, side, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn values(&self) -> &ArrayD<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut ArrayD<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> ArrayD<Complex64> {
        self.values
    }

    fn expect_side(&self, side: Side) -> Result<()> {
        if self.side != side {
            return Err(Error::SideMismatch { expected: side.name(), found: self.side.name() });
        }
        Ok(())
    }

    /// Largest modulus over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Quadrature `L^2` norm: `sqrt(cell_volume * sum |u|^2)` on the physical
    /// side, the Plancherel-normalized analogue on the frequency side.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        match self.side {
            Side::Physical => (self.grid.cell_volume() * sum).sqrt(),
            Side::Frequency => {
                let dxi: f64 = (0..self.grid.dims()).map(|a| self.grid.freq_spacing(a)).product();
                let two_pi_n = (2.0 * std::f64::consts::PI).powi(self.grid.dims() as i32);
                (dxi / two_pi_n * sum).sqrt()
            }
        }
    }

    /// Quadrature `L^p` norm on the field's own side (physical uses `dx`,
    /// frequency uses `dxi` without the `2 pi` normalization).
    pub fn lp_norm(&self, p: f64) -> f64 {
        let cell = match self.side {
            Side::Physical => self.grid.cell_volume(),
            Side::Frequency => (0..self.grid.dims()).map(|a| self.grid.freq_spacing(a)).product(),
        };
        let sum: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (cell * sum).powf(1.0 / p)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    fn check_finite(&self, what: &str) -> Result<()> {
        if let Some((flat, v)) = self.values.iter().enumerate().find(|(_, v)| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(format!(
                "{what}: value {v} at flat index {flat}"
            )));
        }
        Ok(())
    }

    /// `a * self + b * other` on matching grids and sides.
    pub fn combine(&self, other: &SampledField, a: Complex64, b: Complex64) -> Result<SampledField> {
        if self.grid != other.grid || self.side != other.side {
            return Err(Error::InvalidArgument(
                "combine requires matching grids and sides".into(),
            ));
        }
        let values = &self.values * a + &other.values * b;
        Ok(SampledField { grid: self.grid.clone(), side: self.side, values })
    }

    pub fn scaled(&self, a: Complex64) -> SampledField {
        SampledField { grid: self.grid.clone(), side: self.side, values: &self.values * a }
    }
}

/// Sample a real-valued pointwise function on the physical grid.
pub fn sample(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<SampledField> {
    sample_complex(grid, |x| Complex64::new(f(x), 0.0))
}

/// Sample a complex-valued pointwise function on the physical grid.
pub fn sample_complex(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Result<SampledField> {
    let mut values = ArrayD::zeros(IxDyn(grid.shape()));
    let tables: Vec<Vec<f64>> = (0..grid.dims()).map(|a| grid.node_table(a)).collect();
    let mut coords = vec![0.0f64; grid.dims()];
    let mut bad: Option<(Vec<f64>, Complex64)> = None;
    {
        let slice = values.as_slice_mut().expect("freshly allocated array is contiguous");
        let shape = grid.shape().to_vec();
        let mut idx = vec![0usize; shape.len()];
        for v in slice.iter_mut() {
            for (a, &i) in idx.iter().enumerate() {
                coords[a] = tables[a][i];
            }
            let val = f(&coords);
            if !(val.re.is_finite() && val.im.is_finite()) {
                bad = Some((coords.clone(), val));
                break;
            }
            *v = val;
            // odometer increment, last axis fastest
            for axis in (0..shape.len()).rev() {
                idx[axis] += 1;
                if idx[axis] < shape[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
    }
    if let Some((coords, val)) = bad {
        return Err(Error::NonFinite(format!(
            "sample: f({coords:?}) = {val}"
        )));
    }
    SampledField::from_values(grid.clone(), Side::Physical, values)
}

fn fft_along_axes(values: &mut ArrayD<Complex64>, grid: &Grid, forward: bool) {
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..grid.dims() {
        let n = grid.points(axis);
        let fft: Arc<dyn rustfft::Fft<f64>> = if forward {
            planner.plan_fft_forward(n)
        } else {
            planner.plan_fft_inverse(n)
        };
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for mut lane in values.lanes_mut(Axis(axis)) {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process(&mut buf);
            for (v, b) in lane.iter_mut().zip(buf.iter()) {
                *v = *b;
            }
        }
    }
}

/// Negate entries whose multi-index has odd coordinate sum. This is the
/// phase `(-1)^{sum m_i}` relating box-centered nodes to FFT bin order.
fn apply_parity_sign(values: &mut ArrayD<Complex64>) {
    let shape = values.shape().to_vec();
    let slice = values.as_slice_mut().expect("transform buffers are contiguous");
    for (flat, v) in slice.iter_mut().enumerate() {
        let mut rem = flat;
        let mut parity = 0usize;
        for &n in shape.iter().rev() {
            parity += rem % n;
            rem /= n;
        }
        if parity % 2 == 1 {
            *v = -*v;
        }
    }
}

/// Discrete approximation of `u~(xi) = Int e^{-i x.xi} u(x) dx`.
pub fn forward_transform(u: &SampledField) -> Result<SampledField> {
    u.expect_side(Side::Physical)?;
    let grid = u.grid().clone();
    let mut values = u.values().clone();
    fft_along_axes(&mut values, &grid, true);
    apply_parity_sign(&mut values);
    let scale = Complex64::new(grid.cell_volume(), 0.0);
    values.mapv_inplace(|v| v * scale);
    let out = SampledField { grid, side: Side::Frequency, values };
    out.check_finite("forward_transform")?;
    Ok(out)
}

/// Discrete approximation of the inverse transform; exact inverse of
/// [`forward_transform`] up to rounding.
pub fn inverse_transform(s: &SampledField) -> Result<SampledField> {
    s.expect_side(Side::Frequency)?;
    let grid = s.grid().clone();
    let mut values = s.values().clone();
    apply_parity_sign(&mut values);
    fft_along_axes(&mut values, &grid, false);
    let scale = Complex64::new(1.0 / grid.box_volume(), 0.0);
    values.mapv_inplace(|v| v * scale);
    let out = SampledField { grid, side: Side::Physical, values };
    out.check_finite("inverse_transform")?;
    Ok(out)
}

/// Spectral partial derivative `D^order u`: multiplies the spectrum by
/// `prod_a (i xi_a)^{order_a}` and transforms back.
pub fn spectral_derivative(u: &SampledField, order: &[usize]) -> Result<SampledField> {
    if order.len() != u.grid().dims() {
        return Err(Error::InvalidArgument(format!(
            "derivative order length {} does not match grid dims {}",
            order.len(),
            u.grid().dims()
        )));
    }
    let mut spec = forward_transform(u)?;
    let grid = spec.grid().clone();
    let tables: Vec<Vec<f64>> = (0..grid.dims()).map(|a| grid.freq_table(a)).collect();
    let shape = grid.shape().to_vec();
    {
        let slice = spec.values_mut().as_slice_mut().expect("contiguous");
        for (flat, v) in slice.iter_mut().enumerate() {
            let mut rem = flat;
            let mut factor = Complex64::new(1.0, 0.0);
            for (axis, &n) in shape.iter().enumerate().rev() {
                let bin = rem % n;
                rem /= n;
                let k = order[axis];
                if k > 0 {
                    let ixi = Complex64::new(0.0, tables[axis][bin]);
                    factor *= ixi.powu(k as u32);
                }
            }
            *v *= factor;
        }
    }
    inverse_transform(&spec)
}

const MAGIC: &[u8; 4] = b"HLF1";

/// Write the flat binary container plus a JSON sidecar (`<path>.json`) with
/// the same header.
pub fn write_field(path: &Path, field: &SampledField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    let grid = field.grid();
    w.write_all(&(grid.dims() as u32).to_le_bytes())?;
    w.write_all(&[match field.side() {
        Side::Physical => 0u8,
        Side::Frequency => 1u8,
    }])?;
    for axis in 0..grid.dims() {
        w.write_all(&(grid.points(axis) as u64).to_le_bytes())?;
        w.write_all(&grid.extent(axis).to_le_bytes())?;
    }
    for v in field.values().as_slice().expect("contiguous") {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;

    let sidecar = serde_json::json!({
        "format": "HLF1",
        "dims": grid.dims(),
        "side": field.side().name(),
        "points": grid.shape(),
        "extents": (0..grid.dims()).map(|a| grid.extent(a)).collect::<Vec<_>>(),
        "payload": "little-endian f64 (re, im) pairs, row-major",
    });
    let json_path = sidecar_path(path);
    let mut jw = BufWriter::new(File::create(json_path)?);
    crate::report::write_json_sorted(&mut jw, &sidecar)?;
    Ok(())
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".json");
    std::path::PathBuf::from(os)
}

/// Read a field written by [`write_field`] (the sidecar is not consulted).
pub fn read_field(path: &Path) -> Result<SampledField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let dims = u32::from_le_bytes(u32buf) as usize;
    if dims == 0 || dims > 16 {
        return Err(Error::Format(format!("implausible dims {dims}")));
    }
    let mut side_byte = [0u8; 1];
    r.read_exact(&mut side_byte)?;
    let side = match side_byte[0] {
        0 => Side::Physical,
        1 => Side::Frequency,
        b => return Err(Error::Format(format!("bad side flag {b}"))),
    };
    let mut points = Vec::with_capacity(dims);
    let mut extents = Vec::with_capacity(dims);
    for _ in 0..dims {
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        points.push(u64::from_le_bytes(u64buf) as usize);
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut f64buf)?;
        extents.push(f64::from_le_bytes(f64buf));
    }
    let grid = Grid::new(&extents, &points)?;
    let total = grid.total_points();
    let mut data = Vec::with_capacity(total);
    let mut pair = [0u8; 16];
    for _ in 0..total {
        r.read_exact(&mut pair)?;
        let re = f64::from_le_bytes(pair[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(pair[8..16].try_into().unwrap());
        data.push(Complex64::new(re, im));
    }
    let values = ArrayD::from_shape_vec(IxDyn(grid.shape()), data)
        .map_err(|e| Error::Format(format!("shape error: {e}")))?;
    SampledField::from_values(grid, side, values)
}
