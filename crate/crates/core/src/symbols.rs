//! Frequency-domain multiplier symbols: evaluation, anisotropic scaling,
//! structural checks (vanishing slice, degree-zero homogeneity), and the
//! model-problem symbol library.
//!
//! Convention: for symbols that involve a time frequency `xi_0`, the time
//! axis is the LAST component of the frequency vector.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

type Evaluator = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// A frequency-domain multiplier with scaling metadata.
///
/// `weights[i]` is the exponent `w_i` of the anisotropic scaling
/// `A_lambda xi = (lambda^{w_0} xi_0, ..., lambda^{w_{N-1}} xi_{N-1})`;
/// for a profile with exponents `alpha_i`/`beta_k` it equals `1/alpha_i`
/// resp. `1/beta_k`, so that `rho(A_lambda xi) = lambda rho(xi)` for
/// `rho(xi) = sum_i |xi_i|^{1/w_i}`.
#[derive(Clone)]
pub struct Symbol {
    name: String,
    dims: usize,
    eval: Evaluator,
    weights: Vec<f64>,
    vanishing_axes: BTreeSet<usize>,
    singular_set: String,
    origin_value: Option<Complex64>,
    sup_bound: Option<f64>,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("dims", &self.dims)
            .field("weights", &self.weights)
            .field("vanishing_axes", &self.vanishing_axes)
            .field("singular_set", &self.singular_set)
            .finish()
    }
}

impl Symbol {
    pub fn from_fn(
        name: impl Into<String>,
        weights: &[f64],
        f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Symbol {
        Symbol {
            name: name.into(),
            dims: weights.len(),
            eval: Arc::new(f),
            weights: weights.to_vec(),
            vanishing_axes: BTreeSet::new(),
            singular_set: "none".into(),
            origin_value: None,
            sup_bound: None,
        }
    }

    pub fn with_vanishing_axes(mut self, axes: &[usize]) -> Symbol {
        self.vanishing_axes = axes.iter().copied().collect();
        self
    }

    pub fn with_singular(mut self, descriptor: &str, origin_value: Option<Complex64>) -> Symbol {
        self.singular_set = descriptor.into();
        self.origin_value = origin_value;
        self
    }

    pub fn with_sup_bound(mut self, bound: f64) -> Symbol {
        self.sup_bound = Some(bound);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vanishing_axes(&self) -> &BTreeSet<usize> {
        &self.vanishing_axes
    }

    pub fn singular_set(&self) -> &str {
        &self.singular_set
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    /// Declared value at the origin, when the singular point has one (the
    /// usual case: a vanishing slice passes through it, forcing 0).
    pub fn origin_value(&self) -> Option<Complex64> {
        self.origin_value
    }

    /// Evaluate at `xi`. At the exact origin the declared limit, when any,
    /// is returned; a non-finite value elsewhere is an error naming `xi`.
    pub fn eval(&self, xi: &[f64]) -> Result<Complex64> {
        if xi.len() != self.dims {
            return Err(Error::InvalidArgument(format!(
                "symbol {} expects {} components, got {}",
                self.name,
                self.dims,
                xi.len()
            )));
        }
        let at_origin = xi.iter().all(|&c| c == 0.0);
        if at_origin {
            if let Some(v) = self.origin_value {
                return Ok(v);
            }
        }
        let v = (self.eval)(xi);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else if at_origin {
            Err(Error::NonFinite(format!(
                "symbol {} undefined at the origin with no declared limit",
                self.name
            )))
        } else {
            Err(Error::NonFinite(format!("symbol {} at xi = {:?} gave {}", self.name, xi, v)))
        }
    }

    /// Apply the anisotropic scaling to a point: `(A_lambda xi)_i =
    /// lambda^{w_i} xi_i`.
    pub fn scale_point(&self, lambda: f64, xi: &[f64]) -> Vec<f64> {
        xi.iter().zip(self.weights.iter()).map(|(&x, &w)| lambda.powf(w) * x).collect()
    }

    /// The rescaled symbol `xi -> m(A_lambda xi)`.
    pub fn scale(&self, lambda: f64) -> Result<Symbol> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
        }
        let inner = self.eval.clone();
        let weights = self.weights.clone();
        let factors: Vec<f64> = weights.iter().map(|&w| lambda.powf(w)).collect();
        Ok(Symbol {
            name: format!("scale({}, {lambda})", self.name),
            dims: self.dims,
            eval: Arc::new(move |xi: &[f64]| {
                let scaled: Vec<f64> =
                    xi.iter().zip(factors.iter()).map(|(&x, &f)| f * x).collect();
                inner(&scaled)
            }),
            weights,
            vanishing_axes: self.vanishing_axes.clone(),
            singular_set: self.singular_set.clone(),
            origin_value: self.origin_value,
            sup_bound: self.sup_bound,
        })
    }

    /// Pointwise product; the factors must share dims and weights.
    pub fn product(name: impl Into<String>, a: &Symbol, b: &Symbol) -> Result<Symbol> {
        if a.dims != b.dims || a.weights != b.weights {
            return Err(Error::InvalidArgument(
                "product requires matching dims and scaling weights".into(),
            ));
        }
        let (fa, fb) = (a.eval.clone(), b.eval.clone());
        let vanishing: BTreeSet<usize> =
            a.vanishing_axes.union(&b.vanishing_axes).copied().collect();
        let origin = match (a.origin_value, b.origin_value) {
            (Some(x), Some(y)) => Some(x * y),
            _ => None,
        };
        let bound = match (a.sup_bound, b.sup_bound) {
            (Some(x), Some(y)) => Some(x * y),
            _ => None,
        };
        Ok(Symbol {
            name: name.into(),
            dims: a.dims,
            eval: Arc::new(move |xi: &[f64]| fa(xi) * fb(xi)),
            weights: a.weights.clone(),
            vanishing_axes: vanishing,
            singular_set: format!("{} | {}", a.singular_set, b.singular_set),
            origin_value: origin,
            sup_bound: bound,
        })
    }

    /// Anisotropic distance induced by the symbol's weights.
    pub fn rho(&self, xi: &[f64]) -> f64 {
        xi.iter().zip(self.weights.iter()).map(|(&x, &w)| x.abs().powf(1.0 / w)).sum()
    }
}

/// Result of a vanishing-slice sampling check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SliceCheck {
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub samples: usize,
}

/// Evaluate the symbol with the group-(1) coordinates (`axes`) zeroed at
/// random group-(2) frequencies; passes iff `max |m| <= tol`.
pub fn check_vanishing_slice(
    m: &Symbol,
    axes: &[usize],
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> Result<SliceCheck> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "vanishing-slice check needs at least 100 samples, got {samples}"
        )));
    }
    for &a in axes {
        if a >= m.dims() {
            return Err(Error::InvalidArgument(format!("axis {a} out of range")));
        }
    }
    let mut max_residual = 0.0f64;
    let mut xi = vec![0.0f64; m.dims()];
    for _ in 0..samples {
        for (a, c) in xi.iter_mut().enumerate() {
            if axes.contains(&a) {
                *c = 0.0;
            } else {
                // log-uniform magnitudes cover several dyadic scales
                let mag = 10f64.powf(rng.gen_range(-2.0..1.0));
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                *c = sign * mag;
            }
        }
        let v = m.eval(&xi)?;
        max_residual = max_residual.max(v.norm());
    }
    Ok(SliceCheck { max_residual, tol, pass: max_residual <= tol, samples })
}

/// Max over sampled `xi` in the unit annulus (`rho in [1/2, 2]`) and
/// `lambda` in the list of `|m(A_lambda xi) - m(xi)|`.
pub fn check_homogeneity(
    m: &Symbol,
    lambdas: &[f64],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    for &l in lambdas {
        if !(l > 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {l}")));
        }
    }
    let mut max_dev = 0.0f64;
    let mut produced = 0usize;
    while produced < samples {
        let xi: Vec<f64> = (0..m.dims()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = m.rho(&xi);
        if r < 1e-6 {
            continue;
        }
        produced += 1;
        // move the point onto rho = target in [1/2, 2] via the scaling group
        let target = rng.gen_range(0.5..2.0);
        let xi_unit = m.scale_point(target / r, &xi);
        let base = m.eval(&xi_unit)?;
        for &l in lambdas {
            let v = m.eval(&m.scale_point(l, &xi_unit))?;
            max_dev = max_dev.max((v - base).norm());
        }
    }
    Ok(max_dev)
}

fn space_norm_sqr(xi: &[f64]) -> f64 {
    let n = xi.len() - 1;
    xi[..n].iter().map(|x| x * x).sum()
}

/// Constant multiplier (violates the vanishing-slice condition unless 0).
pub fn constant(dims: usize, value: Complex64) -> Symbol {
    Symbol::from_fn(format!("constant{{value={value}}}"), &vec![1.0; dims], move |_| value)
        .with_sup_bound(value.norm())
}

/// Second-order Riesz symbol `xi_k xi_l / |xi|^2` (isotropic weights).
pub fn riesz_second_order(dims: usize, axis_k: usize, axis_l: usize) -> Result<Symbol> {
    if axis_k >= dims || axis_l >= dims {
        return Err(Error::InvalidArgument(format!(
            "riesz axes ({axis_k}, {axis_l}) out of range for dims {dims}"
        )));
    }
    Ok(Symbol::from_fn(
        format!("riesz{{k={},l={}}}", axis_k + 1, axis_l + 1),
        &vec![1.0; dims],
        move |xi: &[f64]| {
            let q: f64 = xi.iter().map(|x| x * x).sum();
            Complex64::new(xi[axis_k] * xi[axis_l] / q, 0.0)
        },
    )
    .with_vanishing_axes(&[axis_l])
    .with_singular("origin only", Some(Complex64::new(0.0, 0.0)))
    .with_sup_bound(1.0))
}

fn parabolic_weights(dims: usize) -> Vec<f64> {
    let mut w = vec![0.5; dims];
    w[dims - 1] = 1.0;
    w
}

/// `i xi_0 / (i xi_0 + a xi^2)`, time axis last; degree-zero homogeneous
/// under the parabolic scaling `(xi, xi_0) -> (lambda^{1/2} xi, lambda xi_0)`.
pub fn heat_time_derivative(dims: usize, a: f64) -> Result<Symbol> {
    if dims < 2 || !(a > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "heat_time_derivative needs dims >= 2 and a > 0, got dims {dims}, a {a}"
        )));
    }
    Ok(Symbol::from_fn(
        format!("heat_time_derivative{{a={a}}}"),
        &parabolic_weights(dims),
        move |xi: &[f64]| {
            let xi0 = xi[xi.len() - 1];
            let i_xi0 = Complex64::new(0.0, xi0);
            i_xi0 / (i_xi0 + a * space_norm_sqr(xi))
        },
    )
    .with_vanishing_axes(&[dims - 1])
    .with_singular("origin only", Some(Complex64::new(0.0, 0.0)))
    .with_sup_bound(1.0))
}

/// Heat resolvent `1 / (i xi_0 + a xi^2)`, time axis last. Unbounded near
/// the origin: a solution operator, not a degree-zero multiplier.
pub fn heat_resolvent(dims: usize, a: f64) -> Result<Symbol> {
    if dims < 2 || !(a > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "heat_resolvent needs dims >= 2 and a > 0, got dims {dims}, a {a}"
        )));
    }
    Ok(Symbol::from_fn(
        format!("heat_resolvent{{a={a}}}"),
        &parabolic_weights(dims),
        move |xi: &[f64]| {
            let xi0 = xi[xi.len() - 1];
            Complex64::new(a * space_norm_sqr(xi), xi0).inv()
        },
    )
    .with_singular("origin only", None))
}

/// The boundary-symbol denominator of the flux-type dynamic condition:
///
/// ```text
/// M(xi, xi_0) = i xi_0 + a * 2 sqrt(xi^2 + s) sqrt(xi^2 - s)
///                        / (sqrt(xi^2 + s) + sqrt(xi^2 - s)),
/// s = principal sqrt(-i xi_0),
/// ```
///
/// time axis last, principal branches throughout. The placement of the
/// coefficient `a` on the fraction is fixed by the half-line ODE oracle.
pub fn ch_boundary_denominator(dims: usize, a: f64) -> Result<Symbol> {
    if dims < 2 || !(a > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ch_boundary_denominator needs dims >= 2 and a > 0, got dims {dims}, a {a}"
        )));
    }
    Ok(Symbol::from_fn(
        format!("ch_boundary_denominator{{a={a}}}"),
        &ch_weights(dims),
        move |xi: &[f64]| ch_denominator_value(xi, a),
    )
    .with_singular("origin (zero of the symbol)", Some(Complex64::new(0.0, 0.0))))
}

/// `1 / M(xi, xi_0)`: the full boundary multiplier of the flux-type
/// problem. Not anisotropic-homogeneous; its main homogeneous part is
/// extracted implicitly by the reduction symbol.
pub fn ch_boundary_inverse(dims: usize, a: f64) -> Result<Symbol> {
    if dims < 2 || !(a > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ch_boundary_inverse needs dims >= 2 and a > 0, got dims {dims}, a {a}"
        )));
    }
    Ok(Symbol::from_fn(
        format!("ch_boundary_inverse{{a={a}}}"),
        &ch_weights(dims),
        move |xi: &[f64]| ch_denominator_value(xi, a).inv(),
    )
    .with_singular("origin only", None))
}

fn ch_weights(dims: usize) -> Vec<f64> {
    // fourth-order interior equation: x weight 1, t weight 4
    let mut w = vec![1.0; dims];
    w[dims - 1] = 4.0;
    w
}

pub(crate) fn ch_denominator_value(xi: &[f64], a: f64) -> Complex64 {
    let xi0 = xi[xi.len() - 1];
    let q = Complex64::new(space_norm_sqr(xi), 0.0);
    let s = Complex64::new(0.0, -xi0).sqrt();
    let rp = (q + s).sqrt();
    let rm = (q - s).sqrt();
    let fraction = 2.0 * rp * rm / (rp + rm);
    Complex64::new(0.0, xi0) + a * fraction
}

/// Reduction symbol `i xi_l / (i xi_0 + |xi|)`, time axis last, `axis_l`
/// a space axis; degree-zero homogeneous under isotropic scaling.
pub fn ch_reduction_symbol(dims: usize, axis_l: usize) -> Result<Symbol> {
    if dims < 2 || axis_l >= dims - 1 {
        return Err(Error::InvalidArgument(format!(
            "ch_reduction_symbol needs a space axis, got axis {axis_l} with dims {dims}"
        )));
    }
    Ok(Symbol::from_fn(
        format!("ch_reduction{{l={}}}", axis_l + 1),
        &vec![1.0; dims],
        move |xi: &[f64]| {
            let xi0 = xi[xi.len() - 1];
            let norm = space_norm_sqr(xi).sqrt();
            Complex64::new(0.0, xi[axis_l]) / Complex64::new(norm, xi0)
        },
    )
    .with_vanishing_axes(&[axis_l])
    .with_singular("origin only", Some(Complex64::new(0.0, 0.0)))
    .with_sup_bound(1.0))
}

/// `log rho(xi)` with isotropic weights: unbounded under scaling, the
/// standard control that must FAIL certification.
pub fn log_rho_control(dims: usize) -> Symbol {
    Symbol::from_fn("log_rho".to_string(), &vec![1.0; dims], move |xi: &[f64]| {
        let rho: f64 = xi.iter().map(|x| x.abs()).sum();
        Complex64::new(rho.ln(), 0.0)
    })
    .with_singular("origin only", None)
}

fn parse_params(body: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for part in body.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("expected key=value in symbol params, got '{part}'"))
        })?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad numeric value '{value}'")))?;
        out.push((key.trim().to_string(), v));
    }
    Ok(out)
}

fn get_param(params: &[(String, f64)], key: &str, default: Option<f64>) -> Result<f64> {
    params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .or(default)
        .ok_or_else(|| Error::InvalidArgument(format!("missing parameter '{key}'")))
}

/// Names accepted by [`build_symbol`].
pub const SYMBOL_NAMES: [&str; 8] = [
    "riesz",
    "heat_time_derivative",
    "heat_resolvent",
    "ch_boundary_denominator",
    "ch_boundary_inverse",
    "ch_reduction",
    "constant",
    "log_rho",
];

/// Build a library symbol from a registry string such as
/// `riesz{k=2,l=1}` or `heat_time_derivative{a=1.0}`. Axis parameters are
/// 1-based (matching the analytical notation); `dims` is the frequency
/// dimension including the time axis where one applies.
pub fn build_symbol(spec: &str, dims: usize) -> Result<Symbol> {
    let spec = spec.trim();
    let (name, params) = match spec.split_once('{') {
        Some((name, rest)) => {
            let body = rest.strip_suffix('}').ok_or_else(|| {
                Error::InvalidArgument(format!("unterminated parameter list in '{spec}'"))
            })?;
            (name.trim(), parse_params(body)?)
        }
        None => (spec, Vec::new()),
    };
    let axis_of = |v: f64| -> Result<usize> {
        if v < 1.0 || v.fract() != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "axis parameters are 1-based integers, got {v}"
            )));
        }
        Ok(v as usize - 1)
    };
    match name {
        "riesz" => {
            let k = axis_of(get_param(&params, "k", None)?)?;
            let l = axis_of(get_param(&params, "l", None)?)?;
            riesz_second_order(dims, k, l)
        }
        "heat_time_derivative" => heat_time_derivative(dims, get_param(&params, "a", Some(1.0))?),
        "heat_resolvent" => heat_resolvent(dims, get_param(&params, "a", Some(1.0))?),
        "ch_boundary_denominator" => {
            ch_boundary_denominator(dims, get_param(&params, "a", Some(1.0))?)
        }
        "ch_boundary_inverse" => ch_boundary_inverse(dims, get_param(&params, "a", Some(1.0))?),
        "ch_reduction" => ch_reduction_symbol(dims, axis_of(get_param(&params, "l", None)?)?),
        "constant" => {
            Ok(constant(dims, Complex64::new(get_param(&params, "value", Some(1.0))?, 0.0)))
        }
        "log_rho" => Ok(log_rho_control(dims)),
        other => Err(Error::InvalidArgument(format!(
            "unknown symbol '{other}'; valid names: {}",
            SYMBOL_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn riesz_pointwise_value() {
        let m = riesz_second_order(2, 1, 0).unwrap();
        let v = m.eval(&[1.0, 1.0]).unwrap();
        assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn heat_symbol_pointwise_value() {
        let m = heat_time_derivative(2, 1.0).unwrap();
        // (xi, xi0) = (1, 1): i/(i+1) = 0.5 + 0.5i
        let v = m.eval(&[1.0, 1.0]).unwrap();
        assert!((v - Complex64::new(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn vanishing_slice_values_are_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [
            riesz_second_order(3, 2, 0).unwrap(),
            heat_time_derivative(3, 1.0).unwrap(),
            ch_reduction_symbol(3, 0).unwrap(),
        ] {
            let axes: Vec<usize> = m.vanishing_axes().iter().copied().collect();
            let check = check_vanishing_slice(&m, &axes, 500, 1e-14, &mut rng).unwrap();
            assert!(check.pass, "{}: residual {}", m.name(), check.max_residual);
        }
    }

    #[test]
    fn constant_symbol_fails_slice_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = constant(3, Complex64::new(1.0, 0.0));
        let check = check_vanishing_slice(&m, &[0], 200, 1e-12, &mut rng).unwrap();
        assert!(!check.pass);
        assert!((check.max_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn slice_check_needs_enough_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = constant(2, Complex64::new(1.0, 0.0));
        assert!(check_vanishing_slice(&m, &[0], 50, 1e-12, &mut rng).is_err());
    }

    #[test]
    fn scaling_identity_and_group_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = heat_time_derivative(3, 2.0).unwrap();
        let id = m.scale(1.0).unwrap();
        for _ in 0..100 {
            let xi: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
            if xi.iter().all(|&x| x == 0.0) {
                continue;
            }
            let a = m.eval(&xi).unwrap();
            let b = id.eval(&xi).unwrap();
            assert!((a - b).norm() < 1e-15);
            // group action: scale(scale(m, l), u) = scale(m, l u)
            let lhs = m.scale(0.7).unwrap().scale(3.1).unwrap().eval(&xi).unwrap();
            let rhs = m.scale(0.7 * 3.1).unwrap().eval(&xi).unwrap();
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn heat_symbol_is_degree_zero_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = heat_time_derivative(3, 1.0).unwrap();
        let dev = check_homogeneity(&m, &[0.25, 4.0], 400, &mut rng).unwrap();
        assert!(dev < 1e-13, "deviation {dev}");
        // explicit parabolic identity m(l xi, l^2 xi0) = m(xi, xi0)
        for _ in 0..50 {
            let xi =
                [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0f64)];
            if xi.iter().all(|&x| x.abs() < 1e-3) {
                continue;
            }
            let l: f64 = rng.gen_range(0.3..3.0);
            let scaled = [l * xi[0], l * xi[1], l * l * xi[2]];
            let a = m.eval(&xi).unwrap();
            let b = m.eval(&scaled).unwrap();
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn riesz_is_degree_zero_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = riesz_second_order(3, 1, 0).unwrap();
        let dev = check_homogeneity(&m, &[0.5, 2.0], 400, &mut rng).unwrap();
        assert!(dev < 1e-13, "deviation {dev}");
    }

    #[test]
    fn ch_inverse_is_not_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = ch_boundary_inverse(2, 1.0).unwrap();
        let dev = check_homogeneity(&m, &[0.25, 4.0], 400, &mut rng).unwrap();
        assert!(dev > 1e-3, "expected O(1) deviation, got {dev}");
    }

    #[test]
    fn library_symbols_are_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let symbols = [
            riesz_second_order(3, 2, 0).unwrap(),
            heat_time_derivative(3, 1.0).unwrap(),
            ch_reduction_symbol(3, 0).unwrap(),
        ];
        for m in &symbols {
            let bound = m.sup_bound().unwrap();
            let mut sup = 0.0f64;
            for _ in 0..1_000_000 {
                let xi: Vec<f64> = (0..3)
                    .map(|_| {
                        let mag = 10f64.powf(rng.gen_range(-3.0..3.0));
                        if rng.gen_bool(0.5) {
                            mag
                        } else {
                            -mag
                        }
                    })
                    .collect();
                sup = sup.max(m.eval(&xi).unwrap().norm());
            }
            assert!(sup <= bound + 1e-12, "{}: sup {sup} exceeds bound {bound}", m.name());
        }
    }

    #[test]
    fn principal_branch_roots_decay() {
        // both characteristic roots used by the denominator have positive
        // real part before negation, for every nonzero frequency sampled
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let xi = rng.gen_range(-4.0..4.0f64);
            let xi0 = rng.gen_range(-4.0..4.0f64);
            if xi == 0.0 && xi0 == 0.0 {
                continue;
            }
            let q = Complex64::new(xi * xi, 0.0);
            let s = Complex64::new(0.0, -xi0).sqrt();
            for r in [(q + s).sqrt(), (q - s).sqrt()] {
                assert!(r.re >= 0.0, "principal sqrt left half-plane: {r}");
            }
        }
    }

    #[test]
    fn registry_builds_and_rejects() {
        assert!(build_symbol("riesz{k=2,l=1}", 3).is_ok());
        assert!(build_symbol("heat_time_derivative{a=1.0}", 2).is_ok());
        assert!(build_symbol("heat_time_derivative", 2).is_ok());
        assert!(build_symbol("ch_reduction{l=1}", 2).is_ok());
        assert!(build_symbol("nope{a=1}", 2).is_err());
        assert!(build_symbol("riesz{k=0,l=1}", 3).is_err());
        assert!(build_symbol("riesz{k=9,l=1}", 3).is_err());
    }

    #[test]
    fn eval_identifies_bad_points() {
        let m =
            Symbol::from_fn("bad", &[1.0], |xi: &[f64]| Complex64::new(1.0 / (xi[0] - 1.0), 0.0));
        assert!(m.eval(&[0.0]).is_ok());
        let err = m.eval(&[1.0]).unwrap_err();
        match err {
            Error::NonFinite(msg) => assert!(msg.contains("bad")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
