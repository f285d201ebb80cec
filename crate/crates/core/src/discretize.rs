//! Grids on `N × H`, test functions and `L^p(G)` norms.
//!
//! A function on `G` is sampled at `(n, t)` with `n` on a product of uniform
//! grids for `N = ℝ^d` and `t` on a uniform lattice in the `H` coordinate.
//! Integrals use the Riemann sum with the Haar density of
//! `dμ_G = dμ_N(n) Δ_G(h) dμ_H(h)`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, HywError, Result};
use crate::grid::Grid1D;
use crate::group::{GroupExtension, ModelKind};

pub use crate::grid::Grid1D as Grid;

/// Extents of the sampling box: one interval per `N` dimension and one for `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extents {
    pub n: Vec<(f64, f64)>,
    pub h: (f64, f64),
}

impl Extents {
    /// Default box per model; see the README for the reasoning on sizes.
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Axb => Self { n: vec![(-8.0, 8.0)], h: (-8.0, 8.0) },
            ModelKind::Heisenberg => Self { n: vec![(-6.0, 6.0), (-3.0, 3.0)], h: (-8.0, 8.0) },
        }
    }
}

/// Uniform grids for `N` (one per dimension) and the `H` lattice.
///
/// The `H` grid must consist of integer multiples of its spacing so that
/// `ξ − γ` for grid points stays on the grid.
pub fn make_grids(
    model: &dyn GroupExtension,
    n_points_n: usize,
    n_points_h: usize,
    extents: &Extents,
) -> Result<(Vec<Grid1D>, Grid1D)> {
    if n_points_n < 8 || n_points_h < 8 {
        return input_err(format!(
            "grids need at least 8 points per axis, got N: {n_points_n}, H: {n_points_h}"
        ));
    }
    if extents.n.len() != model.dim_n() {
        return Err(HywError::ModelMismatch(format!(
            "{} has dim N = {}, extents give {}",
            model.name(),
            model.dim_n(),
            extents.n.len()
        )));
    }
    let n_grids = extents
        .n
        .iter()
        .map(|(lo, hi)| Grid1D::uniform(*lo, *hi, n_points_n))
        .collect::<Result<Vec<_>>>()?;
    let h_grid = Grid1D::uniform(extents.h.0, extents.h.1, n_points_h)?;
    if h_grid.lattice_offset().is_none() {
        return input_err(format!(
            "H extent [{}, {}) with {} points is not aligned with its spacing",
            extents.h.0, extents.h.1, n_points_h
        ));
    }
    Ok((n_grids, h_grid))
}

/// One Gaussian wave packet
/// `c · Π_k exp(−(n_k − a_k)²/2s_k²) e^{2πi β_k (n_k − a_k)} · exp(−(t − t₀)²/2τ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub coeff: (f64, f64),
    pub center_n: Vec<f64>,
    pub width_n: Vec<f64>,
    pub freq_n: Vec<f64>,
    pub center_t: f64,
    pub width_t: f64,
}

impl Packet {
    pub fn eval(&self, n: &[f64], t: f64) -> Complex64 {
        let mut expo = -(t - self.center_t).powi(2) / (2.0 * self.width_t * self.width_t);
        let mut phase = 0.0;
        for k in 0..n.len() {
            let d = n[k] - self.center_n[k];
            expo -= d * d / (2.0 * self.width_n[k] * self.width_n[k]);
            phase += 2.0 * PI * self.freq_n[k] * d;
        }
        Complex64::new(self.coeff.0, self.coeff.1) * Complex64::from_polar(expo.exp(), phase)
    }

    /// Distance from the packet to the box boundary, in units of its widths.
    fn margin(&self, extents: &Extents) -> f64 {
        let mut m = f64::INFINITY;
        for k in 0..self.center_n.len() {
            let (lo, hi) = extents.n[k];
            m = m
                .min((self.center_n[k] - lo) / self.width_n[k])
                .min((hi - self.center_n[k]) / self.width_n[k]);
        }
        m.min((self.center_t - extents.h.0) / self.width_t)
            .min((extents.h.1 - self.center_t) / self.width_t)
    }
}

/// Parameter ranges for random band-limited test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketEnvelope {
    pub atoms: (usize, usize),
    pub width_n: Vec<(f64, f64)>,
    pub center_n: Vec<f64>,
    pub freq_n: Vec<f64>,
    pub width_t: (f64, f64),
    pub center_t: f64,
}

impl PacketEnvelope {
    /// Ranges that keep every packet at least six widths inside the default
    /// extents and its `N`-transform well inside the reciprocal band.
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Axb => Self {
                atoms: (1, 3),
                width_n: vec![(0.5, 1.0)],
                center_n: vec![1.5],
                freq_n: vec![1.0],
                width_t: (0.25, 0.5),
                center_t: 1.0,
            },
            ModelKind::Heisenberg => Self {
                atoms: (1, 3),
                width_n: vec![(0.6, 0.8), (0.3, 0.4)],
                center_n: vec![1.0, 0.5],
                freq_n: vec![0.5, 1.0],
                width_t: (0.6, 1.0),
                center_t: 1.0,
            },
        }
    }

    /// Deterministic packet list for `seed`.
    pub fn draw(&self, seed: u64) -> Vec<Packet> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = rng.gen_range(self.atoms.0..=self.atoms.1);
        (0..count)
            .map(|_| {
                let d = self.width_n.len();
                let modulus = rng.gen_range(0.3..1.0);
                let arg = rng.gen_range(-PI..PI);
                Packet {
                    coeff: (modulus * arg.cos(), modulus * arg.sin()),
                    center_n: (0..d).map(|k| sym(&mut rng, self.center_n[k])).collect(),
                    width_n: (0..d).map(|k| rng.gen_range(self.width_n[k].0..=self.width_n[k].1)).collect(),
                    freq_n: (0..d).map(|k| sym(&mut rng, self.freq_n[k])).collect(),
                    center_t: sym(&mut rng, self.center_t),
                    width_t: rng.gen_range(self.width_t.0..=self.width_t.1),
                }
            })
            .collect()
    }
}

fn sym(rng: &mut ChaCha8Rng, r: f64) -> f64 {
    if r > 0.0 {
        rng.gen_range(-r..=r)
    } else {
        0.0
    }
}

/// Smooth compactly supported bump `exp(1 − 1/(1 − r²))` on `r < 1`, peak 1.
fn bump1(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// How a test function is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunctionSpec {
    Gaussian { center_n: Vec<f64>, width_n: Vec<f64>, center_t: f64, width_t: f64 },
    Bump { center_n: Vec<f64>, radius_n: Vec<f64>, center_t: f64, radius_t: f64 },
    RandomBandlimited { seed: u64, envelope: PacketEnvelope },
}

impl TestFunctionSpec {
    pub fn gaussian(center_n: Vec<f64>, width_n: Vec<f64>, center_t: f64, width_t: f64) -> Self {
        Self::Gaussian { center_n, width_n, center_t, width_t }
    }

    pub fn random(kind: ModelKind, seed: u64) -> Self {
        Self::RandomBandlimited { seed, envelope: PacketEnvelope::default_for(kind) }
    }

    /// Centered Gaussian used as the default fixture of a model.
    pub fn default_gaussian(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Axb => Self::gaussian(vec![0.0], vec![0.8], 0.0, 0.4),
            ModelKind::Heisenberg => Self::gaussian(vec![0.0, 0.0], vec![0.7, 0.35], 0.0, 0.8),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Gaussian { width_n, width_t, .. } => *width_t > 0.0 && width_n.iter().all(|w| *w > 0.0),
            Self::Bump { radius_n, radius_t, .. } => *radius_t > 0.0 && radius_n.iter().all(|w| *w > 0.0),
            Self::RandomBandlimited { envelope, .. } => {
                envelope.width_t.0 > 0.0
                    && envelope.width_n.iter().all(|(a, b)| *a > 0.0 && b >= a)
                    && envelope.atoms.0 >= 1
                    && envelope.atoms.1 >= envelope.atoms.0
            }
        };
        if ok {
            Ok(())
        } else {
            input_err("test function widths must be positive")
        }
    }

    /// Packet decomposition (empty for bumps).
    pub fn packets(&self) -> Vec<Packet> {
        match self {
            Self::Gaussian { center_n, width_n, center_t, width_t } => vec![Packet {
                coeff: (1.0, 0.0),
                center_n: center_n.clone(),
                width_n: width_n.clone(),
                freq_n: vec![0.0; center_n.len()],
                center_t: *center_t,
                width_t: *width_t,
            }],
            Self::Bump { .. } => Vec::new(),
            Self::RandomBandlimited { seed, envelope } => envelope.draw(*seed),
        }
    }

    /// Pointwise evaluation at `(n, t)`, usable off the grid.
    pub fn evaluator(&self) -> impl Fn(&[f64], f64) -> Complex64 + Send + Sync + '_ {
        let packets = self.packets();
        move |n: &[f64], t: f64| match self {
            Self::Bump { center_n, radius_n, center_t, radius_t } => {
                let mut v = bump1((t - center_t) / radius_t);
                for k in 0..n.len() {
                    v *= bump1((n[k] - center_n[k]) / radius_n[k]);
                }
                Complex64::new(v, 0.0)
            }
            _ => packets.iter().map(|p| p.eval(n, t)).sum(),
        }
    }

    /// Smallest distance of a packet to the box edge, in widths (∞ for bumps
    /// fully inside the box, negative when a bump leaves it).
    pub fn decay_margin(&self, extents: &Extents) -> f64 {
        match self {
            Self::Bump { center_n, radius_n, center_t, radius_t } => {
                let mut inside = (center_t - radius_t >= extents.h.0) && (center_t + radius_t <= extents.h.1);
                for k in 0..center_n.len() {
                    inside &= center_n[k] - radius_n[k] >= extents.n[k].0 && center_n[k] + radius_n[k] <= extents.n[k].1;
                }
                if inside {
                    f64::INFINITY
                } else {
                    -1.0
                }
            }
            _ => self.packets().iter().map(|p| p.margin(extents)).fold(f64::INFINITY, f64::min),
        }
    }
}

/// Mass of the function near the edges of the sampling box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportInfo {
    /// Largest `|g|` on the boundary layer of the grid relative to `max |g|`.
    pub boundary_rel: f64,
}

/// A function on `G` sampled on `N-grid × H-grid`.
///
/// `values` has one row per `N` point (row-major over the `N` dimensions) and
/// one column per `H` point, so column `m` is the slice `g_{t_m} = g(·, t_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    model: ModelKind,
    n_grids: Vec<Grid1D>,
    h_grid: Grid1D,
    values: DMatrix<Complex64>,
    support: SupportInfo,
}

impl SampledFunction {
    pub fn new(model: ModelKind, n_grids: Vec<Grid1D>, h_grid: Grid1D, values: DMatrix<Complex64>) -> Result<Self> {
        if n_grids.len() != model.model().dim_n() {
            return Err(HywError::ModelMismatch(format!(
                "{} needs {} N grids, got {}",
                model,
                model.model().dim_n(),
                n_grids.len()
            )));
        }
        let n_len: usize = n_grids.iter().map(|g| g.len()).product();
        if values.shape() != (n_len, h_grid.len()) {
            return input_err(format!(
                "values have shape {:?}, grids need ({n_len}, {})",
                values.shape(),
                h_grid.len()
            ));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return input_err("sampled values must be finite");
        }
        let mut s = Self { model, n_grids, h_grid, values, support: SupportInfo { boundary_rel: 0.0 } };
        s.support = s.measure_support();
        Ok(s)
    }

    /// Samples `f(n, t)` on the grids.
    pub fn from_fn<F>(model: ModelKind, n_grids: Vec<Grid1D>, h_grid: Grid1D, f: F) -> Result<Self>
    where
        F: Fn(&[f64], f64) -> Complex64,
    {
        let shape: Vec<usize> = n_grids.iter().map(|g| g.len()).collect();
        let n_len: usize = shape.iter().product();
        let mut values = DMatrix::zeros(n_len, h_grid.len());
        let mut point = vec![0.0; n_grids.len()];
        for flat in 0..n_len {
            let idx = unflatten(flat, &shape);
            for (k, i) in idx.iter().enumerate() {
                point[k] = n_grids[k].points()[*i];
            }
            for (m, t) in h_grid.points().iter().enumerate() {
                values[(flat, m)] = f(&point, *t);
            }
        }
        Self::new(model, n_grids, h_grid, values)
    }

    fn measure_support(&self) -> SupportInfo {
        let max = self.values.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if max == 0.0 {
            return SupportInfo { boundary_rel: 0.0 };
        }
        let shape = self.n_shape();
        let last_h = self.h_grid.len() - 1;
        let mut edge = 0.0f64;
        for flat in 0..self.n_len() {
            let idx = unflatten(flat, &shape);
            let on_n_edge = idx.iter().zip(&shape).any(|(i, s)| *i == 0 || *i == s - 1);
            for m in 0..=last_h {
                if on_n_edge || m == 0 || m == last_h {
                    edge = edge.max(self.values[(flat, m)].norm());
                }
            }
        }
        SupportInfo { boundary_rel: edge / max }
    }

    pub fn model_kind(&self) -> ModelKind {
        self.model
    }

    pub fn model(&self) -> &'static dyn GroupExtension {
        self.model.model()
    }

    pub fn n_grids(&self) -> &[Grid1D] {
        &self.n_grids
    }

    pub fn h_grid(&self) -> &Grid1D {
        &self.h_grid
    }

    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    pub fn support(&self) -> SupportInfo {
        self.support
    }

    pub fn n_shape(&self) -> Vec<usize> {
        self.n_grids.iter().map(|g| g.len()).collect()
    }

    pub fn n_len(&self) -> usize {
        self.values.nrows()
    }

    /// Coordinates of the flattened `N` point.
    pub fn n_point(&self, flat: usize) -> Vec<f64> {
        unflatten(flat, &self.n_shape())
            .iter()
            .enumerate()
            .map(|(k, i)| self.n_grids[k].points()[*i])
            .collect()
    }

    /// Quadrature mass of the flattened `N` point.
    pub fn n_weight(&self, flat: usize) -> f64 {
        unflatten(flat, &self.n_shape())
            .iter()
            .enumerate()
            .map(|(k, i)| self.n_grids[k].weights()[*i])
            .product()
    }

    pub fn n_weights(&self) -> Vec<f64> {
        (0..self.n_len()).map(|f| self.n_weight(f)).collect()
    }

    /// `c · g`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self { values: self.values.map(|z| z * c), ..self.clone() }
    }

    /// `g + other` on identical grids.
    pub fn plus(&self, other: &SampledFunction) -> Result<Self> {
        if self.model != other.model || self.n_grids != other.n_grids || self.h_grid != other.h_grid {
            return input_err("functions live on different grids");
        }
        Self::new(self.model, self.n_grids.clone(), self.h_grid.clone(), &self.values + &other.values)
    }

    /// The same function resampled from `f` on grids with twice the points.
    pub fn refined_from<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&[f64], f64) -> Complex64,
    {
        let n_grids = self.n_grids.iter().map(|g| g.refined()).collect::<Result<Vec<_>>>()?;
        Self::from_fn(self.model, n_grids, self.h_grid.refined()?, f)
    }

    /// `‖g(·, t_m)‖_{L^p(N)}`.
    pub fn slice_lp_norm(&self, m: usize, p: f64) -> f64 {
        let w = self.n_weights();
        let col = self.values.column(m);
        let max = col.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if max == 0.0 {
            return 0.0;
        }
        let s: f64 = col.iter().zip(&w).map(|(z, w)| w * (z.norm() / max).powf(p)).sum();
        max * s.powf(1.0 / p)
    }
}

pub(crate) fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = flat % shape[k];
        flat /= shape[k];
    }
    idx
}

/// Samples `spec` on the grids.
pub fn sample(spec: &TestFunctionSpec, grids: &(Vec<Grid1D>, Grid1D), model: ModelKind) -> Result<SampledFunction> {
    spec.validate()?;
    let f = spec.evaluator();
    SampledFunction::from_fn(model, grids.0.clone(), grids.1.clone(), |n, t| f(n, t))
}

/// `‖g‖_{L^p(G)} = ( Σ |g(n,t)|^p w_N(n) Δ_G(t) w_H(t) )^{1/p}`.
pub fn lp_norm_g(g: &SampledFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return input_err(format!("L^p norm needs p >= 1, got {p}"));
    }
    let model = g.model();
    let wn = g.n_weights();
    let max = g.values.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if max == 0.0 {
        return Ok(0.0);
    }
    let mut s = 0.0;
    for (m, (t, wh)) in g.h_grid.points().iter().zip(g.h_grid.weights()).enumerate() {
        let col = g.values.column(m);
        let inner: f64 = col.iter().zip(&wn).map(|(z, w)| w * (z.norm() / max).powf(p)).sum();
        s += inner * model.haar_weight(&[], *t) * wh;
    }
    Ok(max * s.powf(1.0 / p))
}

fn fmt_extent(g: &Grid1D) -> String {
    format!("{}:{}", g.lo(), g.hi())
}

/// Writes `g` as `HYW1 <dims> <extents> <seed>\n` followed by little-endian
/// `f64` pairs `(re, im)` in row-major `(n_1, …, n_d, h)` order.
pub fn write_fixture<W: Write>(mut w: W, g: &SampledFunction, seed: u64) -> Result<()> {
    let mut dims: Vec<String> = g.n_shape().iter().map(|d| d.to_string()).collect();
    dims.push(g.h_grid.len().to_string());
    dims.push("2".to_string());
    let mut extents: Vec<String> = g.n_grids.iter().map(fmt_extent).collect();
    extents.push(fmt_extent(&g.h_grid));
    writeln!(w, "HYW1 {} {} {}", dims.join("x"), extents.join(","), seed)?;
    let mut buf = Vec::with_capacity(16 * g.values.len());
    for flat in 0..g.n_len() {
        for m in 0..g.h_grid.len() {
            let z = g.values[(flat, m)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a fixture written by [`write_fixture`]; returns the function and its seed.
pub fn read_fixture<R: Read>(mut r: R, model: ModelKind) -> Result<(SampledFunction, u64)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let nl = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| HywError::Input("fixture header line missing".into()))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| HywError::Input("fixture header is not UTF-8".into()))?;
    let parts: Vec<&str> = header.split(' ').collect();
    if parts.len() != 4 || parts[0] != "HYW1" {
        return input_err(format!("bad fixture header '{header}'"));
    }
    let bad = |what: &str| HywError::Input(format!("bad fixture {what} in '{header}'"));
    let dims: Vec<usize> = parts[1]
        .split('x')
        .map(|d| d.parse().map_err(|_| bad("dims")))
        .collect::<Result<_>>()?;
    let extents: Vec<(f64, f64)> = parts[2]
        .split(',')
        .map(|e| {
            let (a, b) = e.split_once(':').ok_or_else(|| bad("extents"))?;
            Ok((a.parse().map_err(|_| bad("extents"))?, b.parse().map_err(|_| bad("extents"))?))
        })
        .collect::<Result<_>>()?;
    let seed: u64 = parts[3].parse().map_err(|_| bad("seed"))?;
    let dim_n = model.model().dim_n();
    if dims.len() != dim_n + 2 || extents.len() != dim_n + 1 || dims[dim_n + 1] != 2 {
        return Err(HywError::ModelMismatch(format!("fixture '{header}' does not fit model {model}")));
    }
    let grids: Vec<Grid1D> = (0..=dim_n)
        .map(|k| Grid1D::uniform(extents[k].0, extents[k].1, dims[k]))
        .collect::<Result<_>>()?;
    let n_len: usize = dims[..dim_n].iter().product();
    let n_h = dims[dim_n];
    let payload = &bytes[nl + 1..];
    if payload.len() != 16 * n_len * n_h {
        return input_err(format!("fixture payload has {} bytes, expected {}", payload.len(), 16 * n_len * n_h));
    }
    let f = |i: usize| f64::from_le_bytes(payload[8 * i..8 * i + 8].try_into().expect("8 bytes"));
    let values = DMatrix::from_fn(n_len, n_h, |flat, m| {
        let k = flat * n_h + m;
        Complex64::new(f(2 * k), f(2 * k + 1))
    });
    let mut grids = grids;
    let h_grid = grids.pop().expect("H grid present");
    Ok((SampledFunction::new(model, grids, h_grid, values)?, seed))
}
