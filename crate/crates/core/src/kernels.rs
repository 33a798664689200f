//! Kernel functions, bandwidth scaling, convolution and the twicing recursion
//! that produces higher-order kernels.
//!
//! Gaussian kernels are handled symbolically: a [`KernelForm::SignedGaussianMixture`]
//! is a finite signed combination of centred normal densities, and convolution
//! adds variances term by term. Everything else is tabulated on a uniform grid
//! and convolved by trapezoid quadrature.
//!
//! The twicing recursion applied `r` times to a Gaussian expands into
//! `sum_k (-1)^(k+1) C(2^r, k) phi_sqrt(k)`, whose coefficients grow like
//! `2^(2^r)`. The expanded mixture is kept as the exact representation, but
//! point evaluation of such kernels goes through a table computed from the
//! Fourier transform `1 - (1 - g)^(2^r)`, which has no cancellation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian evaluation is truncated at this many standard deviations (of the
/// widest mixture component).
pub const GAUSSIAN_TRUNCATION: f64 = 8.0;

/// Default number of intervals used when a kernel is tabulated.
pub const DEFAULT_TABLE_INTERVALS: usize = 4096;

/// Tolerance for "integrates to one" checks on constructed kernels.
pub const UNIT_MASS_TOL: f64 = 1e-6;

const MERGE_REL_TOL: f64 = 1e-12;
const STEP_REL_TOL: f64 = 1e-9;
const SPECTRAL_NODES_PER_SD: f64 = 512.0;

/// The two supported base kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseKernel {
    Gaussian,
    Epanechnikov,
}

impl BaseKernel {
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            BaseKernel::Gaussian => {
                if u.abs() > GAUSSIAN_TRUNCATION {
                    0.0
                } else {
                    FRAC_1_SQRT_2PI * (-0.5 * u * u).exp()
                }
            }
            BaseKernel::Epanechnikov => {
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    0.75 * (1.0 - u * u)
                }
            }
        }
    }

    /// Half-width of the (effective) support.
    pub fn support_radius(self) -> f64 {
        match self {
            BaseKernel::Gaussian => GAUSSIAN_TRUNCATION,
            BaseKernel::Epanechnikov => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BaseKernel::Gaussian => "gaussian",
            BaseKernel::Epanechnikov => "epanechnikov",
        }
    }
}

impl fmt::Display for BaseKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(BaseKernel::Gaussian),
            "epanechnikov" => Ok(BaseKernel::Epanechnikov),
            other => Err(Error::UnknownKernel(other.to_string())),
        }
    }
}

/// One `coef * phi_sigma` component of a signed Gaussian mixture.
///
/// The scale is stored as a variance so that convolution (which adds
/// variances) stays exact for the integer variances of the twicing recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureTerm {
    pub coef: f64,
    pub variance: f64,
}

impl MixtureTerm {
    pub fn new(coef: f64, scale: f64) -> Self {
        MixtureTerm {
            coef,
            variance: scale * scale,
        }
    }

    pub fn from_variance(coef: f64, variance: f64) -> Self {
        MixtureTerm { coef, variance }
    }

    pub fn scale(&self) -> f64 {
        self.variance.sqrt()
    }

    #[inline]
    fn density(&self, u: f64) -> f64 {
        self.coef * (-0.5 * u * u / self.variance).exp() * FRAC_1_SQRT_2PI / self.variance.sqrt()
    }
}

/// A finite signed combination of centred normal densities with total mass 1.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    terms: Vec<MixtureTerm>,
    max_variance: f64,
    spectral: Option<Arc<SpectralTable>>,
}

impl GaussianMixture {
    pub fn new(terms: Vec<MixtureTerm>) -> Result<Self> {
        let terms = merge_terms(terms);
        if terms.is_empty() {
            return Err(Error::InvalidKernel("empty Gaussian mixture".into()));
        }
        for t in &terms {
            if !t.coef.is_finite() || !(t.variance.is_finite() && t.variance > 0.0) {
                return Err(Error::InvalidKernel(format!(
                    "mixture term needs finite coefficient and positive scale, got {t:?}"
                )));
            }
        }
        let total: f64 = neumaier_sum(terms.iter().map(|t| t.coef));
        let magnitude: f64 = terms.iter().map(|t| t.coef.abs()).sum();
        if (total - 1.0).abs() > 1e-9 * magnitude.max(1.0) {
            return Err(Error::InvalidKernel(format!(
                "mixture coefficients sum to {total}, expected 1"
            )));
        }
        let max_variance = terms.iter().map(|t| t.variance).fold(0.0, f64::max);
        Ok(GaussianMixture {
            terms,
            max_variance,
            spectral: None,
        })
    }

    pub fn terms(&self) -> &[MixtureTerm] {
        &self.terms
    }

    /// Largest component standard deviation.
    pub fn max_scale(&self) -> f64 {
        self.max_variance.sqrt()
    }

    /// Sum of `|coef|`; the cancellation factor of direct evaluation.
    pub fn condition(&self) -> f64 {
        self.terms.iter().map(|t| t.coef.abs()).sum()
    }

    /// Direct term-by-term evaluation, without the stable table.
    pub fn eval_direct(&self, u: f64) -> f64 {
        if u.abs() > GAUSSIAN_TRUNCATION * self.max_scale() {
            return 0.0;
        }
        neumaier_sum(self.terms.iter().map(|t| t.density(u)))
    }

    #[inline]
    fn eval(&self, u: f64) -> f64 {
        match &self.spectral {
            Some(table) => table.eval(u),
            None => self.eval_direct(u),
        }
    }
}

fn merge_terms(mut terms: Vec<MixtureTerm>) -> Vec<MixtureTerm> {
    terms.sort_by(|a, b| a.variance.total_cmp(&b.variance));
    let mut merged: Vec<MixtureTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match merged.last_mut() {
            Some(last) if (last.variance - t.variance).abs() <= MERGE_REL_TOL * t.variance => {
                last.coef += t.coef;
            }
            _ => merged.push(t),
        }
    }
    merged.retain(|t| t.coef != 0.0);
    merged
}

/// A symmetric kernel tabulated at `-half_width + i * step`, linearly
/// interpolated and zero outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    half_width: f64,
    step: f64,
    values: Vec<f64>,
}

impl TabulatedKernel {
    pub fn new(half_width: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidKernel("tabulated kernel needs at least 3 nodes".into()));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidKernel(format!("bad half width {half_width}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidKernel("non-finite tabulated value".into()));
        }
        let step = 2.0 * half_width / (values.len() - 1) as f64;
        let table = TabulatedKernel {
            half_width,
            step,
            values,
        };
        let mass = table.integral();
        if (mass - 1.0).abs() > UNIT_MASS_TOL {
            return Err(Error::InvalidKernel(format!("tabulated kernel integrates to {mass}")));
        }
        Ok(table)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.step
    }

    pub fn eval(&self, u: f64) -> f64 {
        let pos = (u + self.half_width) / self.step;
        if !(pos >= 0.0) || pos > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Composite trapezoid integral over the nodes.
    pub fn integral(&self) -> f64 {
        trapezoid_nodes(&self.values, self.step, |_| 1.0, self.half_width)
    }
}

fn trapezoid_nodes(values: &[f64], step: f64, weight: impl Fn(f64) -> f64, half_width: f64) -> f64 {
    let last = values.len() - 1;
    let inner = neumaier_sum(values.iter().enumerate().map(|(i, v)| {
        let u = -half_width + i as f64 * step;
        let w = if i == 0 || i == last { 0.5 } else { 1.0 };
        w * v * weight(u)
    }));
    inner * step
}

/// Representation of a kernel beyond its base.
#[derive(Debug, Clone)]
pub enum KernelForm {
    Plain,
    SignedGaussianMixture(GaussianMixture),
    Tabulated(TabulatedKernel),
}

/// A kernel: a base family plus its current representation.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    base: BaseKernel,
    form: KernelForm,
}

impl KernelSpec {
    pub fn plain(base: BaseKernel) -> Self {
        KernelSpec {
            base,
            form: KernelForm::Plain,
        }
    }

    pub fn gaussian() -> Self {
        Self::plain(BaseKernel::Gaussian)
    }

    pub fn epanechnikov() -> Self {
        Self::plain(BaseKernel::Epanechnikov)
    }

    /// A signed Gaussian mixture from `(coefficient, standard deviation)` pairs.
    pub fn mixture(pairs: &[(f64, f64)]) -> Result<Self> {
        if let Some(&(_, s)) = pairs.iter().find(|p| !(p.1.is_finite() && p.1 > 0.0)) {
            return Err(Error::InvalidKernel(format!("mixture scale must be positive, got {s}")));
        }
        let terms = pairs.iter().map(|&(c, s)| MixtureTerm::new(c, s)).collect();
        Ok(Self::from_mixture(GaussianMixture::new(terms)?))
    }

    pub fn from_mixture(mixture: GaussianMixture) -> Self {
        KernelSpec {
            base: BaseKernel::Gaussian,
            form: KernelForm::SignedGaussianMixture(mixture),
        }
    }

    pub fn from_table(base: BaseKernel, table: TabulatedKernel) -> Self {
        KernelSpec {
            base,
            form: KernelForm::Tabulated(table),
        }
    }

    pub fn base(&self) -> BaseKernel {
        self.base
    }

    pub fn form(&self) -> &KernelForm {
        &self.form
    }

    pub fn is_plain(&self) -> bool {
        matches!(self.form, KernelForm::Plain)
    }

    /// `K(u)`.
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match &self.form {
            KernelForm::Plain => self.base.eval(u),
            KernelForm::SignedGaussianMixture(m) => m.eval(u),
            KernelForm::Tabulated(t) => t.eval(u),
        }
    }

    /// Half-width beyond which `eval` returns 0.
    pub fn support_radius(&self) -> f64 {
        match &self.form {
            KernelForm::Plain => self.base.support_radius(),
            KernelForm::SignedGaussianMixture(m) => GAUSSIAN_TRUNCATION * m.max_scale(),
            KernelForm::Tabulated(t) => t.half_width,
        }
    }

    /// Whether the kernel is known to be nonnegative everywhere.
    pub fn is_nonnegative(&self) -> bool {
        match &self.form {
            KernelForm::Plain => true,
            KernelForm::SignedGaussianMixture(m) => m.terms.iter().all(|t| t.coef >= 0.0),
            KernelForm::Tabulated(t) => t.values.iter().all(|&v| v >= 0.0),
        }
    }

    /// Gaussian-mixture view, if the kernel has one (a plain Gaussian is the
    /// single term `(1, 1)`).
    pub fn mixture_terms(&self) -> Option<&[MixtureTerm]> {
        const UNIT: [MixtureTerm; 1] = [MixtureTerm {
            coef: 1.0,
            variance: 1.0,
        }];
        match (&self.form, self.base) {
            (KernelForm::Plain, BaseKernel::Gaussian) => Some(&UNIT),
            (KernelForm::SignedGaussianMixture(m), _) => Some(&m.terms),
            _ => None,
        }
    }

    /// Tabulate on `[-R, R]` (R the support radius) with `intervals` steps.
    pub fn tabulate(&self, intervals: usize) -> TabulatedKernel {
        let radius = self.support_radius();
        let step = 2.0 * radius / intervals as f64;
        self.tabulate_with_step(step)
    }

    fn tabulate_with_step(&self, step: f64) -> TabulatedKernel {
        if let KernelForm::Tabulated(t) = &self.form {
            return t.clone();
        }
        let radius = self.support_radius();
        let half_nodes = (radius / step - 1e-9).ceil() as usize;
        let half_width = half_nodes as f64 * step;
        let values: Vec<f64> = (0..=2 * half_nodes)
            .map(|i| self.eval(-half_width + i as f64 * step))
            .collect();
        TabulatedKernel {
            half_width,
            step,
            values,
        }
    }

    /// Bind a bandwidth.
    pub fn scaled(self, h: f64) -> Result<ScaledKernel> {
        ScaledKernel::new(self, h)
    }
}

impl From<BaseKernel> for KernelSpec {
    fn from(base: BaseKernel) -> Self {
        KernelSpec::plain(base)
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<BaseKernel>().map(KernelSpec::plain)
    }
}

/// `K_h(u) = K(u / h) / h`.
#[derive(Debug, Clone)]
pub struct ScaledKernel {
    spec: KernelSpec,
    h: f64,
}

impl ScaledKernel {
    pub fn new(spec: KernelSpec, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {h}")));
        }
        Ok(ScaledKernel { spec, h })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        self.spec.eval(u / self.h) / self.h
    }

    pub fn support_radius(&self) -> f64 {
        self.spec.support_radius() * self.h
    }
}

/// `a * b`.
///
/// Gaussian mixtures convolve in closed form; any other pair is tabulated on
/// a common step and convolved by trapezoid quadrature over the Minkowski sum
/// of the supports.
pub fn convolve(a: &KernelSpec, b: &KernelSpec) -> Result<KernelSpec> {
    if let (Some(ta), Some(tb)) = (a.mixture_terms(), b.mixture_terms()) {
        let mut terms = Vec::with_capacity(ta.len() * tb.len());
        for x in ta {
            for y in tb {
                terms.push(MixtureTerm::from_variance(x.coef * y.coef, x.variance + y.variance));
            }
        }
        return Ok(KernelSpec::from_mixture(GaussianMixture::new(terms)?));
    }

    let step = match (&a.form, &b.form) {
        (KernelForm::Tabulated(x), KernelForm::Tabulated(y)) => {
            if (x.step - y.step).abs() > STEP_REL_TOL * x.step.max(y.step) {
                return Err(Error::StepMismatch {
                    left: x.step,
                    right: y.step,
                });
            }
            x.step
        }
        (KernelForm::Tabulated(x), _) => x.step,
        (_, KernelForm::Tabulated(y)) => y.step,
        _ => {
            let width = 2.0 * a.support_radius().min(b.support_radius());
            width / DEFAULT_TABLE_INTERVALS as f64
        }
    };
    let ta = a.tabulate_with_step(step);
    let tb = b.tabulate_with_step(step);
    Ok(KernelSpec::from_table(a.base, convolve_tables(&ta, &tb)))
}

fn convolve_tables(a: &TabulatedKernel, b: &TabulatedKernel) -> TabulatedKernel {
    let (na, nb) = (a.values.len(), b.values.len());
    let step = a.step;
    let mut out = vec![0.0; na + nb - 1];
    for (k, slot) in out.iter_mut().enumerate() {
        let lo = k.saturating_sub(nb - 1);
        let hi = k.min(na - 1);
        if lo == hi {
            continue;
        }
        let mut acc = 0.0;
        for i in lo..=hi {
            let w = if i == lo || i == hi { 0.5 } else { 1.0 };
            acc += w * a.values[i] * b.values[k - i];
        }
        *slot = acc * step;
    }
    TabulatedKernel {
        half_width: a.half_width + b.half_width,
        step,
        values: out,
    }
}

/// The `r`-th twicing kernel `K(r) = 2 K(r-1) - K(r-1) * K(r-1)`, `K(0) = K`.
///
/// Its moments of order `1..=2r+1` vanish, so it is of order `2(r+1)`.
pub fn higher_order_kernel(base: &KernelSpec, r: usize) -> Result<KernelSpec> {
    if !base.is_plain() {
        return Err(Error::NotPlainKernel);
    }
    if r == 0 {
        return Ok(base.clone());
    }
    match base.base {
        BaseKernel::Gaussian => {
            let mut current = base.clone();
            for _ in 0..r {
                let conv = convolve(&current, &current)?;
                let own = current.mixture_terms().expect("gaussian mixture");
                let sq = conv.mixture_terms().expect("gaussian mixture");
                let terms = own
                    .iter()
                    .map(|t| MixtureTerm::from_variance(2.0 * t.coef, t.variance))
                    .chain(sq.iter().map(|t| MixtureTerm::from_variance(-t.coef, t.variance)))
                    .collect();
                current = KernelSpec::from_mixture(GaussianMixture::new(terms)?);
            }
            if let KernelForm::SignedGaussianMixture(m) = &mut current.form {
                m.spectral = Some(spectral_table(1.0, r as u32));
            }
            Ok(current)
        }
        BaseKernel::Epanechnikov => {
            let mut table = base.tabulate(DEFAULT_TABLE_INTERVALS);
            for _ in 0..r {
                let conv = convolve_tables(&table, &table);
                let offset = (conv.values.len() - table.values.len()) / 2;
                let mut twiced: Vec<f64> = conv.values.iter().map(|v| -v).collect();
                for (i, v) in table.values.iter().enumerate() {
                    twiced[offset + i] += 2.0 * v;
                }
                table = TabulatedKernel {
                    half_width: conv.half_width,
                    step: 2.0 * conv.step,
                    values: twiced.into_iter().step_by(2).collect(),
                };
                // downsampling leaves a few 1e-6 of quadrature error in the mass
                let mass = table.integral();
                table.values.iter_mut().for_each(|v| *v /= mass);
            }
            Ok(KernelSpec::from_table(base.base, table))
        }
    }
}

/// `int u^p K(u) du`.
///
/// Closed form for Gaussian mixtures (odd moments vanish, even moments are
/// `sum c sigma^p (p-1)!!`); adaptive trapezoid for the Epanechnikov kernel
/// and node trapezoid for tabulated kernels.
pub fn kernel_moment(k: &KernelSpec, p: u32) -> f64 {
    if let Some(terms) = k.mixture_terms() {
        if p % 2 == 1 {
            return 0.0;
        }
        let dfact: f64 = (1..p).step_by(2).map(f64::from).product();
        let half = (p / 2) as i32;
        return dfact * neumaier_sum(terms.iter().map(|t| t.coef * t.variance.powi(half)));
    }
    match &k.form {
        KernelForm::Tabulated(t) => {
            trapezoid_nodes(&t.values, t.step, |u| u.powi(p as i32), t.half_width)
        }
        _ => {
            let radius = k.support_radius();
            adaptive_trapezoid(|u| u.powi(p as i32) * k.eval(u), -radius, radius, 1e-13)
        }
    }
}

fn adaptive_trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut n = 64usize;
    let mut h = (b - a) / n as f64;
    let mut sum = 0.5 * (f(a) + f(b)) + (1..n).map(|i| f(a + i as f64 * h)).sum::<f64>();
    let mut estimate = sum * h;
    for _ in 0..20 {
        let mids: f64 = (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum();
        sum += mids;
        n *= 2;
        h *= 0.5;
        let refined = sum * h;
        if (refined - estimate).abs() <= tol * refined.abs().max(1.0) {
            return refined;
        }
        estimate = refined;
    }
    estimate
}

pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Values and slopes of a twicing kernel on `u = k * du`, `k >= 0`, from the
/// cosine transform of `1 - (1 - exp(-v t^2 / 2))^(2^depth)`.
#[derive(Debug)]
pub(crate) struct SpectralTable {
    du: f64,
    radius: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl SpectralTable {
    fn twicing(variance: f64, depth: u32) -> Self {
        let copies = 2f64.powi(depth as i32);
        let sd = variance.sqrt();
        let radius = GAUSSIAN_TRUNCATION * sd * copies.sqrt();
        let du = sd / SPECTRAL_NODES_PER_SD;
        let nodes = (radius / du).ceil() as usize + 2;

        // transform below 1e-18 beyond t_max; period 2*pi/dt = 4 * radius keeps aliasing negligible
        let t_max = (2.0 * (copies * 1e18).ln() / variance).sqrt() + 1.0;
        let dt = PI / (2.0 * radius);
        let nt = (t_max / dt).ceil() as usize;
        let spectrum: Vec<f64> = (0..=nt)
            .map(|j| {
                let t = j as f64 * dt;
                let mut q = -(-0.5 * variance * t * t).exp_m1();
                for _ in 0..depth {
                    q *= q;
                }
                let g = 1.0 - q;
                if j == 0 {
                    0.5 * g
                } else {
                    g
                }
            })
            .collect();

        let mut values = Vec::with_capacity(nodes);
        let mut slopes = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let u = k as f64 * du;
            let (s1, c1) = (dt * u).sin_cos();
            let (mut s, mut c) = (0.0f64, 1.0f64);
            let mut val = 0.0;
            let mut der = 0.0;
            for (j, g) in spectrum.iter().enumerate() {
                val += g * c;
                der -= j as f64 * dt * g * s;
                let cn = c * c1 - s * s1;
                s = s * c1 + c * s1;
                c = cn;
            }
            values.push(val * dt / PI);
            slopes.push(der * dt / PI);
        }
        SpectralTable {
            du,
            radius,
            values,
            slopes,
        }
    }

    #[inline]
    fn eval(&self, u: f64) -> f64 {
        let a = u.abs();
        if a > self.radius {
            return 0.0;
        }
        let pos = a / self.du;
        let i = (pos as usize).min(self.values.len() - 2);
        let t = pos - i as f64;
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.du, self.slopes[i + 1] * self.du);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * m1
    }
}

fn spectral_table(variance: f64, depth: u32) -> Arc<SpectralTable> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<SpectralTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (variance.to_bits(), depth);
    if let Some(t) = cache.lock().expect("kernel table cache").get(&key) {
        return Arc::clone(t);
    }
    let table = Arc::new(SpectralTable::twicing(variance, depth));
    cache
        .lock()
        .expect("kernel table cache")
        .entry(key)
        .or_insert(table)
        .clone()
}
