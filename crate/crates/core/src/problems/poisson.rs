//! The Poisson example: data Holder in one variable only, mixed second
//! derivatives containing that variable gain Holder continuity in all
//! variables; the log-singular counterexample shows the derivatives
//! outside the theorem stay unbounded.

use serde::Serialize;

use crate::apply::{gain_experiment, GainReport};
use crate::error::{Error, Result};
use crate::field::{Grid, SampledField, Side};
use crate::holder::{partial_seminorm_with, AnisotropyProfile, WrapMode};
use crate::symbols;

/// Apply every Riesz factor `xi_k xi_1 / xi^2` to data Holder-gamma in the
/// first axis and report the gain per mixed derivative `k`.
pub fn example1_poisson(f: &SampledField, gamma: f64) -> Result<Vec<GainReport>> {
    if f.side() != Side::Physical {
        return Err(Error::SideMismatch { expected: "physical", found: f.side().name() });
    }
    let grid = f.grid();
    let dims = grid.dims();
    if dims < 2 {
        return Err(Error::InvalidArgument("the Poisson example needs at least 2 axes".into()));
    }
    // compact support inside the central half-box keeps the periodization
    // away from the data
    let peak = f.sup_norm();
    if peak > 0.0 {
        let slice = f.values().as_slice().expect("contiguous");
        let mut flat = 0usize;
        let mut outside = 0.0f64;
        crate::field::for_each_index(grid.shape(), |idx| {
            let v = slice[flat].norm();
            flat += 1;
            if v == 0.0 {
                return;
            }
            for (a, &i) in idx.iter().enumerate() {
                if grid.node_coord(a, i).abs() > grid.extent(a) / 2.0 {
                    outside = outside.max(v);
                }
            }
        });
        if outside > 1e-12 * peak {
            return Err(Error::InvalidArgument(format!(
                "data must be supported in the central half-box (mass {outside:.3e} outside)"
            )));
        }
    }
    let smooth = [(0usize, 1.0f64)];
    let gained: Vec<(usize, f64)> = (1..dims).map(|a| (a, 1.0)).collect();
    let profile = AnisotropyProfile::new(gamma, &smooth, &gained)?;
    let mut reports = Vec::new();
    for k in 0..dims {
        let m = symbols::riesz_second_order(dims, k, 0)?;
        reports.push(gain_experiment(&m, &profile, f, WrapMode::ExcludeEdge)?);
    }
    Ok(reports)
}

/// Radial plateau bump with analytic gradient and Hessian, built from the
/// quintic step (C^2 at the seams, identically 1 inside `r_in`).
#[derive(Clone, Copy, Debug)]
pub(crate) struct RadialBump {
    pub r_in: f64,
    pub r_out: f64,
}

fn quintic(t: f64) -> (f64, f64, f64) {
    // s, s', s'' of the quintic smoothstep on [0, 1]
    let s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    let dds = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    (s, ds, dds)
}

impl RadialBump {
    pub fn value(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= self.r_in {
            1.0
        } else if r >= self.r_out {
            0.0
        } else {
            let t = (r - self.r_in) / (self.r_out - self.r_in);
            1.0 - quintic(t).0
        }
    }

    pub fn grad(&self, x: &[f64], axis: usize) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= self.r_in || r >= self.r_out {
            return 0.0;
        }
        let d = self.r_out - self.r_in;
        let t = (r - self.r_in) / d;
        -quintic(t).1 / d * x[axis] / r
    }

    pub fn hess(&self, x: &[f64], i: usize, j: usize) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= self.r_in || r >= self.r_out {
            return 0.0;
        }
        let d = self.r_out - self.r_in;
        let t = (r - self.r_in) / d;
        let (_, ds, dds) = quintic(t);
        let kron = if i == j { 1.0 } else { 0.0 };
        let ti = x[i] / (r * d);
        let tj = x[j] / (r * d);
        let tij = (kron / r - x[i] * x[j] / (r * r * r)) / d;
        -(dds * ti * tj + ds * tij)
    }
}

/// The log-singular field `u1 = (x2^2 - x3^2 + x2 x3) ln(x2^2 + x3^2) eta`
/// and its derivatives, evaluated in closed form (axes 0, 1, 2 carry
/// x1, x2, x3).
pub(crate) struct Counterexample {
    pub eta: RadialBump,
}

impl Counterexample {
    fn pieces(x: &[f64]) -> (f64, f64, f64, f64, f64) {
        let (x2, x3) = (x[1], x[2]);
        let r2 = x2 * x2 + x3 * x3;
        let p = x2 * x2 - x3 * x3 + x2 * x3;
        let p2 = 2.0 * x2 + x3;
        let p3 = -2.0 * x3 + x2;
        let logr2 = r2.ln();
        (r2, p, p2, p3, logr2)
    }

    /// `w = p ln(r^2)` (no cutoff), derivative helpers; singular at r = 0.
    /// On the symmetry line `r = 0` the continuous extensions of `w` and
    /// its first derivatives vanish and are used directly.
    fn w(x: &[f64]) -> f64 {
        let (r2, p, _, _, logr2) = Self::pieces(x);
        if r2 == 0.0 {
            return 0.0;
        }
        p * logr2
    }

    fn w2(x: &[f64]) -> f64 {
        let (r2, p, p2, _, logr2) = Self::pieces(x);
        if r2 == 0.0 {
            return 0.0;
        }
        p2 * logr2 + p * 2.0 * x[1] / r2
    }

    fn w3(x: &[f64]) -> f64 {
        let (r2, p, _, p3, logr2) = Self::pieces(x);
        if r2 == 0.0 {
            return 0.0;
        }
        p3 * logr2 + p * 2.0 * x[2] / r2
    }

    fn w22(x: &[f64]) -> f64 {
        let (r2, p, p2, _, logr2) = Self::pieces(x);
        let x2 = x[1];
        2.0 * logr2 + 4.0 * x2 * p2 / r2 + p * (2.0 / r2 - 4.0 * x2 * x2 / (r2 * r2))
    }

    pub fn u1(&self, x: &[f64]) -> f64 {
        let eta = self.eta.value(x);
        if eta == 0.0 {
            0.0
        } else {
            Self::w(x) * eta
        }
    }

    fn r2_23(x: &[f64]) -> f64 {
        x[1] * x[1] + x[2] * x[2]
    }

    /// `d^2 u1 / dx2^2`: unbounded like `2 ln r^2` near the origin.
    pub fn d2_x2x2(&self, x: &[f64]) -> f64 {
        let eta = self.eta.value(x);
        if eta == 0.0 {
            return 0.0;
        }
        Self::w22(x) * eta
            + 2.0 * Self::w2(x) * self.eta.grad(x, 1)
            + Self::w(x) * self.eta.hess(x, 1, 1)
    }

    /// `d^2 u1 / dx2 dx1`: hits only the cutoff in x1, stays bounded.
    pub fn d2_x2x1(&self, x: &[f64]) -> f64 {
        let eta = self.eta.value(x);
        if eta == 0.0 && self.eta.grad(x, 0) == 0.0 {
            return 0.0;
        }
        Self::w2(x) * self.eta.grad(x, 0) + Self::w(x) * self.eta.hess(x, 1, 0)
    }

    /// `Laplacian u1`: the singular part collapses to the bounded
    /// degree-zero function `8 p / r^2` (value 0 chosen on the `r = 0`
    /// line, where the limit is direction-dependent but bounded).
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        let eta = self.eta.value(x);
        let g2 = self.eta.grad(x, 1);
        let g3 = self.eta.grad(x, 2);
        let lap_eta = self.eta.hess(x, 0, 0) + self.eta.hess(x, 1, 1) + self.eta.hess(x, 2, 2);
        if Self::r2_23(x) == 0.0 {
            return 0.0;
        }
        if eta == 0.0 && g2 == 0.0 && g3 == 0.0 && lap_eta == 0.0 {
            return 0.0;
        }
        let (r2, p, _, _, _) = Self::pieces(x);
        let lap_w = 8.0 * p / r2;
        lap_w * eta + 2.0 * (Self::w2(x) * g2 + Self::w3(x) * g3) + Self::w(x) * lap_eta
    }
}

/// One resolution row of the counterexample growth table.
#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleRow {
    pub resolution: usize,
    /// `max |d^2 u1 / dx2^2|` over near-origin nodes: grows like `c log n`.
    pub max_d2_x2x2: f64,
    /// `max |d^2 u1 / dx2 dx1|`: bounded uniformly in the resolution.
    pub max_d2_x2x1: f64,
    /// `<Delta u1>_{x1}^{(gamma)}`: the data stays admissible.
    pub laplacian_x1_seminorm: f64,
}

/// Evaluate the growth table. The box is `[-2, 2)^3` with the cutoff
/// plateau on `r <= 0.5` and support `r <= 1`; "near the origin" means
/// `|x2|, |x3| <= 0.25` with the exact origin excluded.
pub fn example1_counterexample(resolutions: &[usize]) -> Result<Vec<CounterexampleRow>> {
    example1_counterexample_with(resolutions, 0.5)
}

pub(crate) fn example1_counterexample_with(
    resolutions: &[usize],
    gamma: f64,
) -> Result<Vec<CounterexampleRow>> {
    let ce = Counterexample { eta: RadialBump { r_in: 0.5, r_out: 1.0 } };
    let extent = 2.0f64;
    let mut rows = Vec::new();
    for &n in resolutions {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("resolution {n} must be even and >= 8")));
        }
        let spacing = 2.0 * extent / n as f64;
        // near-origin scan over the (x2, x3) plane; u1 does not depend on
        // x1 inside the plateau
        let window = (0.25 / spacing).ceil() as i64;
        let mut max_d2 = 0.0f64;
        let mut max_mixed = 0.0f64;
        for i in -window..=window {
            for j in -window..=window {
                let x2 = i as f64 * spacing;
                let x3 = j as f64 * spacing;
                if x2 == 0.0 && x3 == 0.0 {
                    continue;
                }
                let x = [0.0, x2, x3];
                max_d2 = max_d2.max(ce.d2_x2x2(&x).abs());
                max_mixed = max_mixed.max(ce.d2_x2x1(&x).abs());
            }
        }
        // the mixed derivative lives on the cutoff shell, not near 0
        let probe = (0.55f64, 0.95f64);
        let steps = 64usize;
        for i in 0..steps {
            for j in 0..steps {
                let r = probe.0 + (probe.1 - probe.0) * i as f64 / steps as f64;
                let th = std::f64::consts::TAU * j as f64 / steps as f64;
                let x = [0.3, r * th.cos(), r * th.sin()];
                max_mixed = max_mixed.max(ce.d2_x2x1(&x).abs());
            }
        }

        // seminorm of the Laplacian in x1 on a capped 3-D grid (the
        // quantity is resolution-stable; the cap keeps the scan cheap)
        let n_sem = n.min(128);
        let grid = Grid::cubic(3, extent, n_sem)?;
        let f1 = crate::field::sample(&grid, |x| ce.laplacian(x))?;
        let seminorm = partial_seminorm_with(&f1, 0, gamma, 1, WrapMode::ExcludeEdge)?;

        rows.push(CounterexampleRow {
            resolution: n,
            max_d2_x2x2: max_d2,
            max_d2_x2x1: max_mixed,
            laplacian_x1_seminorm: seminorm,
        });
    }
    Ok(rows)
}
