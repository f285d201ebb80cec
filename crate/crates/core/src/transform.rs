//! Fourier transform along `N`, operator kernels of the induced
//! representations, formal dimension operators and the `L^p` Fourier field.
//!
//! The representation attached to a transversal point `σ₀` acts on `L²(H)`
//! (identified with `L²(ℝ, dt)` through the `H` coordinate) by
//! `(σ(n, s) f)(ξ) = χ_{ξ.σ₀}(n) f(ξ − s)`, so `σ(g)` has kernel
//! `k(ξ, γ) = ⟨g_{ξ−γ}, ξ.σ₀⟩ Δ_G(ξ − γ)` where
//! `⟨g_s, ω⟩ = Σ_n g(n, s) e^{2πi⟨ω,n⟩} w_N(n) = ĝ_s(−ω)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::discretize::{unflatten, SampledFunction};
use crate::error::{input_err, HywError, Result};
use crate::grid::Grid1D;
use crate::group::{
    character, dual_orbit_model, FrequencyBand, GroupElement, GroupExtension, OrbitSample, TransversalOptions,
    WindowOptions,
};
use crate::schatten::{conjugate_exponent, frobenius_norm, lp_of_nonneg, singular_values, ComplexMatrix, WeightedKernel};

/// Tuning knobs of the discretized transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransformOptions {
    /// `|ĝ|` below this fraction of its maximum counts as outside the band.
    pub band_threshold: f64,
    /// Reciprocal-grid cells added to the detected band on each side.
    pub band_margin_cells: f64,
    /// `H` slices whose peak is below this fraction of `max |g|` are dropped.
    pub support_threshold: f64,
    /// Zero-padding factor for reciprocal-grid transforms.
    pub pad_factor: usize,
    /// Upper bound on the representation window length, in `H` grid cells.
    pub max_rows: usize,
    /// Window ends are rounded outward to multiples of this length whenever
    /// the `H` spacing divides it, so refined grids share the same window.
    pub window_snap: f64,
    pub window: WindowOptions,
    pub transversal: TransversalOptions,
}

impl Default for TransformOptions {
    fn default() -> Self {
        Self {
            band_threshold: 1e-10,
            band_margin_cells: 2.0,
            support_threshold: 1e-13,
            pad_factor: 2,
            max_rows: 4096,
            window_snap: 1.0,
            window: WindowOptions::default(),
            transversal: TransversalOptions::default(),
        }
    }
}

fn phase(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

/// In-place multidimensional FFT of a row-major array.
fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let total: usize = shape.iter().product();
    for axis in 0..shape.len() {
        let len = shape[axis];
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        let stride: usize = shape[axis + 1..].iter().product();
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for start in 0..total {
            // visit each line once: its first element has axis index 0
            if (start / stride) % len != 0 {
                continue;
            }
            for k in 0..len {
                buf[k] = data[start + k * stride];
            }
            fft.process(&mut buf);
            for k in 0..len {
                data[start + k * stride] = buf[k];
            }
        }
    }
}

/// The `N`-transform of one slice sampled on a (padded) reciprocal grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocalSlice {
    /// Frequencies per axis in FFT order (`k/(P·dn)` with `k ≥ P/2` wrapped negative).
    pub freqs: Vec<Vec<f64>>,
    /// `ĝ(ω)` flattened row-major over the axes.
    pub values: Vec<Complex64>,
    /// Product of the reciprocal spacings, the quadrature mass of one point.
    pub cell: f64,
}

impl ReciprocalSlice {
    pub fn shape(&self) -> Vec<usize> {
        self.freqs.iter().map(|f| f.len()).collect()
    }

    pub fn omega(&self, flat: usize) -> Vec<f64> {
        unflatten(flat, &self.shape()).iter().enumerate().map(|(k, i)| self.freqs[k][*i]).collect()
    }

    /// `‖ĝ‖_{L^q}` by the periodic Riemann sum.
    pub fn lq_norm(&self, q: f64) -> f64 {
        let mags: Vec<f64> = self.values.iter().map(|z| z.norm()).collect();
        self.cell.powf(1.0 / q) * lp_of_nonneg(&mags, q)
    }
}

/// `ĝ_h(ω)` for every `H` point of a sampled function, evaluable anywhere.
#[derive(Debug, Clone, Copy)]
pub struct CharacterSlice<'a> {
    g: &'a SampledFunction,
}

/// Wraps `g` for evaluation of its `N`-transform.
pub fn fourier_along_n(g: &SampledFunction) -> CharacterSlice<'_> {
    CharacterSlice { g }
}

impl<'a> CharacterSlice<'a> {
    pub fn function(&self) -> &'a SampledFunction {
        self.g
    }

    /// `ĝ_m(ω) = Σ_n g(n, t_m) e^{−2πi⟨ω,n⟩} w_N(n)` by direct summation.
    pub fn transform(&self, m: usize, omega: &[f64]) -> Complex64 {
        let neg: Vec<f64> = omega.iter().map(|w| -w).collect();
        self.pair(m, &neg)
    }

    /// `⟨g_m, ω⟩ = Σ_n g(n, t_m) e^{+2πi⟨ω,n⟩} w_N(n) = ĝ_m(−ω)`.
    pub fn pair(&self, m: usize, omega: &[f64]) -> Complex64 {
        let col = self.g.values().column(m);
        (0..self.g.n_len())
            .map(|f| col[f] * character(omega, &self.g.n_point(f)) * self.g.n_weight(f))
            .sum()
    }

    /// `P[i, c] = ⟨g_{cols[c]}, omegas[i]⟩`.
    ///
    /// When every character shares its last coordinate the sum over the last
    /// `N` axis is done once per slice, which makes the cost linear in the
    /// number of characters for the Heisenberg orbits.
    pub fn pair_matrix(&self, omegas: &[Vec<f64>], cols: &[usize]) -> DMatrix<Complex64> {
        let g = self.g;
        let grids = g.n_grids();
        let d = grids.len();
        let shape = g.n_shape();
        let n_len = g.n_len();
        let shared_last = d >= 2 && omegas.windows(2).all(|w| w[0][d - 1].to_bits() == w[1][d - 1].to_bits());
        let sub = DMatrix::from_fn(n_len, cols.len(), |f, c| g.values()[(f, cols[c])]);
        if omegas.is_empty() || cols.is_empty() {
            return DMatrix::zeros(omegas.len(), cols.len());
        }
        if shared_last {
            let last = &grids[d - 1];
            let l = last.len();
            let rest = n_len / l;
            let lam = omegas[0][d - 1];
            let e_last: Vec<Complex64> =
                (0..l).map(|k| phase(lam * last.points()[k]) * last.weights()[k]).collect();
            let a = DMatrix::from_fn(rest, cols.len(), |r, c| (0..l).map(|k| sub[(r * l + k, c)] * e_last[k]).sum());
            let rest_shape = &shape[..d - 1];
            let e = DMatrix::from_fn(omegas.len(), rest, |i, r| {
                let idx = unflatten(r, rest_shape);
                let mut z = Complex64::new(1.0, 0.0);
                for (k, ik) in idx.iter().enumerate() {
                    z *= phase(omegas[i][k] * grids[k].points()[*ik]) * grids[k].weights()[*ik];
                }
                z
            });
            e * a
        } else {
            let e = DMatrix::from_fn(omegas.len(), n_len, |i, f| {
                let idx = unflatten(f, &shape);
                let mut z = Complex64::new(1.0, 0.0);
                for (k, ik) in idx.iter().enumerate() {
                    z *= phase(omegas[i][k] * grids[k].points()[*ik]) * grids[k].weights()[*ik];
                }
                z
            });
            e * sub
        }
    }

    /// `ĝ_m` on the reciprocal grid of the zero-padded `N` box (FFT).
    pub fn reciprocal(&self, m: usize, pad: usize) -> Result<ReciprocalSlice> {
        let g = self.g;
        let grids = g.n_grids();
        let mut spacing = Vec::with_capacity(grids.len());
        for gr in grids {
            spacing.push(gr.spacing().ok_or_else(|| HywError::Input("reciprocal grid needs uniform N grids".into()))?);
        }
        let pad = pad.max(1);
        let shape = g.n_shape();
        let pshape: Vec<usize> = shape.iter().map(|s| s * pad).collect();
        let total: usize = pshape.iter().product();
        let mut data = vec![Complex64::new(0.0, 0.0); total];
        let w0 = g.n_weight(0);
        let col = g.values().column(m);
        for f in 0..g.n_len() {
            let idx = unflatten(f, &shape);
            let mut flat = 0;
            for (k, i) in idx.iter().enumerate() {
                flat = flat * pshape[k] + i;
            }
            data[flat] = col[f] * w0;
        }
        fft_nd(&mut data, &pshape, false);
        let freqs: Vec<Vec<f64>> = pshape
            .iter()
            .zip(&spacing)
            .map(|(p, h)| {
                (0..*p)
                    .map(|k| {
                        let kk = if k >= p / 2 { k as f64 - *p as f64 } else { k as f64 };
                        kk / (*p as f64 * h)
                    })
                    .collect()
            })
            .collect();
        // grid starts at lo, not 0: ĝ(ω) = e^{−2πi⟨ω,lo⟩} · DFT
        let los: Vec<f64> = grids.iter().map(|g| g.lo()).collect();
        for (f, z) in data.iter_mut().enumerate() {
            let idx = unflatten(f, &pshape);
            let shift: f64 = idx.iter().enumerate().map(|(k, i)| freqs[k][*i] * los[k]).sum();
            *z *= phase(-shift);
        }
        let cell = pshape.iter().zip(&spacing).map(|(p, h)| 1.0 / (*p as f64 * h)).product();
        Ok(ReciprocalSlice { freqs, values: data, cell })
    }
}

/// Inverse of [`CharacterSlice::reciprocal`] at padding 1: samples on the `N` grid.
pub fn inverse_on_grid(g: &SampledFunction, rec: &ReciprocalSlice) -> Result<Vec<Complex64>> {
    let shape = rec.shape();
    if shape != g.n_shape() {
        return input_err("inverse transform needs an unpadded reciprocal slice");
    }
    let los: Vec<f64> = g.n_grids().iter().map(|g| g.lo()).collect();
    let mut data: Vec<Complex64> = rec
        .values
        .iter()
        .enumerate()
        .map(|(f, z)| {
            let idx = unflatten(f, &shape);
            let shift: f64 = idx.iter().enumerate().map(|(k, i)| rec.freqs[k][*i] * los[k]).sum();
            z * phase(shift)
        })
        .collect();
    fft_nd(&mut data, &shape, true);
    let scale = 1.0 / (g.n_weight(0) * data.len() as f64);
    Ok(data.into_iter().map(|z| z * scale).collect())
}

/// Frequency band and `H` support of a sampled function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandInfo {
    pub half_width: Vec<f64>,
    pub nyquist: Vec<f64>,
    /// The detected band reaches the Nyquist frequency on some axis.
    pub near_alias: bool,
    /// Fraction of `Σ|ĝ|²` outside the band box.
    pub outside_mass: f64,
    /// First and last `H` column kept.
    pub support: Option<(usize, usize)>,
    /// Fraction of `‖g‖₁` in the dropped `H` slices.
    pub truncated_l1: f64,
}

impl BandInfo {
    pub fn band(&self) -> FrequencyBand {
        FrequencyBand { half_width: self.half_width.clone() }
    }
}

/// Detects the frequency band of `g` from its reciprocal-grid transforms.
pub fn detect_band(g: &SampledFunction, opts: &TransformOptions) -> Result<BandInfo> {
    let slices = fourier_along_n(g);
    let d = g.n_grids().len();
    let mut nyquist = Vec::with_capacity(d);
    for gr in g.n_grids() {
        nyquist.push(0.5 / gr.spacing().ok_or_else(|| HywError::Input("band detection needs uniform N grids".into()))?);
    }
    let peak = g.values().iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let h = g.h_grid();
    if peak == 0.0 {
        return Ok(BandInfo {
            half_width: vec![0.0; d],
            nyquist,
            near_alias: false,
            outside_mass: 0.0,
            support: None,
            truncated_l1: 0.0,
        });
    }
    let col_peak: Vec<f64> =
        (0..h.len()).map(|m| g.values().column(m).iter().fold(0.0f64, |a, z| a.max(z.norm()))).collect();
    let kept: Vec<usize> = (0..h.len()).filter(|m| col_peak[*m] >= opts.support_threshold * peak).collect();
    let support = Some((kept[0], *kept.last().expect("peak column is kept")));
    let model = g.model();
    let wn = g.n_weights();
    let l1_col = |m: usize| -> f64 {
        g.values().column(m).iter().zip(&wn).map(|(z, w)| z.norm() * w).sum::<f64>()
            * model.modular_at(h.points()[m])
            * h.weights()[m]
    };
    let total_l1: f64 = (0..h.len()).map(l1_col).sum();
    let dropped_l1: f64 = (0..h.len()).filter(|m| !kept.contains(m)).map(l1_col).sum();

    let recs: Vec<ReciprocalSlice> = kept.par_iter().map(|m| slices.reciprocal(*m, 1)).collect::<Result<_>>()?;
    let fpeak = recs.iter().flat_map(|r| r.values.iter()).fold(0.0f64, |a, z| a.max(z.norm()));
    let mut reach = vec![0.0f64; d];
    for r in &recs {
        for (f, z) in r.values.iter().enumerate() {
            if z.norm() >= opts.band_threshold * fpeak {
                for (k, w) in r.omega(f).iter().enumerate() {
                    reach[k] = reach[k].max(w.abs());
                }
            }
        }
    }
    let mut near_alias = false;
    let half_width: Vec<f64> = (0..d)
        .map(|k| {
            let cell = 2.0 * nyquist[k] / g.n_grids()[k].len() as f64;
            let b = reach[k] + opts.band_margin_cells * cell;
            if b >= nyquist[k] {
                near_alias = true;
            }
            b.min(nyquist[k])
        })
        .collect();
    let (mut inside, mut all) = (0.0, 0.0);
    for r in &recs {
        for (f, z) in r.values.iter().enumerate() {
            let e = z.norm_sqr();
            all += e;
            if r.omega(f).iter().zip(&half_width).all(|(w, b)| w.abs() <= *b) {
                inside += e;
            }
        }
    }
    Ok(BandInfo {
        half_width,
        nyquist,
        near_alias,
        outside_mass: if all > 0.0 { (all - inside) / all } else { 0.0 },
        support,
        truncated_l1: if total_l1 > 0.0 { dropped_l1 / total_l1 } else { 0.0 },
    })
}

/// `K_σ`: multiplication by `Δ_G` on an `H` lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalDimensionOperator {
    grid: Grid1D,
    diagonal: Vec<f64>,
}

impl FormalDimensionOperator {
    pub fn new(model: &dyn GroupExtension, grid: &Grid1D) -> Self {
        Self { grid: grid.clone(), diagonal: grid.points().iter().map(|t| model.modular_at(*t)).collect() }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Diagonal of `K^e`.
    pub fn power(&self, e: f64) -> Vec<f64> {
        self.diagonal.iter().map(|d| d.powf(e)).collect()
    }
}

/// `k′(ξ, γ) = k(ξ, γ) · Δ_G(γ)^e`, i.e. the kernel of `T K^e`.
pub fn apply_formal_dimension(k: &WeightedKernel, kop: &FormalDimensionOperator, e: f64) -> Result<WeightedKernel> {
    if kop.grid() != k.gamma_grid() {
        return input_err("formal dimension operator lives on a different grid than the kernel columns");
    }
    let col = kop.power(e);
    let mut out = k.clone();
    for (j, c) in col.iter().enumerate() {
        out.values_mut().column_mut(j).scale_mut(*c);
    }
    Ok(out)
}

fn lattice_index(t: f64, h: f64) -> Result<i64> {
    let r = t / h;
    let k = r.round();
    if (r - k).abs() > 1e-9 {
        return input_err(format!("H coordinate {t} is not a multiple of the grid spacing {h}"));
    }
    Ok(k as i64)
}

/// `H` points of `g` as lattice indices plus the lattice spacing.
fn h_lattice(g: &SampledFunction) -> Result<(f64, i64)> {
    let h = g.h_grid();
    match (h.spacing(), h.lattice_offset()) {
        (Some(dt), Some(off)) => Ok((dt, off)),
        _ => input_err("the H grid must be a uniform lattice"),
    }
}

/// Kernel of `σ(g)` for one orbit, before the formal dimension factor.
#[derive(Debug, Clone)]
pub struct KernelBlock {
    pub sample: OrbitSample,
    /// `k(ξ_i, γ_j)` on the representation window.
    pub kernel: WeightedKernel,
    /// `P[i, c] = ⟨g_{s_c}, ξ_i.σ₀⟩` for the kept slices `s_c`.
    pub profile: DMatrix<Complex64>,
    /// `H` column of `g` for each profile column.
    pub slices: Vec<usize>,
}

/// `k(ξ_i, γ_j) = ⟨g_{ξ_i−γ_j}, ξ_i.σ₀⟩ Δ_G(ξ_i − γ_j)` on explicit lattices.
///
/// Differences `ξ − γ` outside the kept slices of `g` give zero entries
/// (zero padding of `g` in the `H` coordinate).
pub fn assemble_kernel_on(
    g: &SampledFunction,
    sample: &OrbitSample,
    rows: &Grid1D,
    cols: &Grid1D,
    slices: &[usize],
) -> Result<KernelBlock> {
    let model = g.model();
    let (dt, h_off) = h_lattice(g)?;
    for gr in [rows, cols] {
        let ok = gr.spacing().map(|s| (s - dt).abs() <= 1e-12 * dt).unwrap_or(false) && gr.lattice_offset().is_some();
        if !ok {
            return input_err("kernel grids must be lattices with the H grid spacing");
        }
    }
    let r0 = rows.lattice_offset().expect("checked");
    let c0 = cols.lattice_offset().expect("checked");
    let omegas: Vec<Vec<f64>> =
        rows.points().iter().map(|xi| model.dual_action(model.h_from_coord(*xi), &sample.base)).collect();
    let profile = fourier_along_n(g).pair_matrix(&omegas, slices);
    let mut slot = vec![usize::MAX; g.h_grid().len()];
    for (c, m) in slices.iter().enumerate() {
        slot[*m] = c;
    }
    let hpts = g.h_grid().points();
    let values = ComplexMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        let m = (r0 + i as i64) - (c0 + j as i64) - h_off;
        if m < 0 || m as usize >= slot.len() || slot[m as usize] == usize::MAX {
            return Complex64::new(0.0, 0.0);
        }
        let m = m as usize;
        profile[(i, slot[m])] * model.modular_at(hpts[m])
    });
    Ok(KernelBlock { sample: sample.clone(), kernel: WeightedKernel::new(rows.clone(), cols.clone(), values)?, profile, slices: slices.to_vec() })
}

/// Representation window for `σ₀` and the matching column window.
pub fn kernel_windows(
    g: &SampledFunction,
    sample: &OrbitSample,
    band: &BandInfo,
    opts: &TransformOptions,
) -> Result<Option<(Grid1D, Grid1D)>> {
    let (dt, h_off) = h_lattice(g)?;
    let Some((s_first, s_last)) = band.support else { return Ok(None) };
    let Some((lo, hi)) = g.model().orbit_window(&sample.base, &band.band(), &opts.window) else { return Ok(None) };
    let ratio = opts.window_snap / dt;
    let unit = if ratio >= 1.0 && (ratio - ratio.round()).abs() < 1e-9 { opts.window_snap } else { dt };
    let (lo, hi) = ((lo / unit).floor() * unit, (hi / unit).ceil() * unit);
    let (mut r0, mut r1) = ((lo / dt).round() as i64, (hi / dt).round() as i64);
    // snapping must not carry rows past Nyquist, where the pairing aliases
    let model = g.model();
    let beyond = |r: i64| {
        let w = model.dual_action(model.h_from_coord(r as f64 * dt), &sample.base);
        w.iter().zip(&band.nyquist).any(|(x, n)| x.abs() > *n)
    };
    while r0 < r1 && beyond(r0) {
        r0 += 1;
    }
    while r1 > r0 && beyond(r1) {
        r1 -= 1;
    }
    let n_rows = (r1 - r0 + 1) as usize;
    if n_rows > opts.max_rows {
        return Err(HywError::Numerical(format!(
            "representation window for {:?} needs {n_rows} rows (limit {}); raise lambda_exclusion or max_rows",
            sample.base, opts.max_rows
        )));
    }
    let s_lo = h_off + s_first as i64;
    let s_hi = h_off + s_last as i64;
    let rows = Grid1D::lattice(dt, r0, n_rows)?;
    let cols = Grid1D::lattice(dt, r0 - s_hi, n_rows + (s_hi - s_lo) as usize)?;
    Ok(Some((rows, cols)))
}

/// Kernel of `σ(g)` on the window chosen for `σ₀` from the band of `g`.
pub fn assemble_kernel(
    g: &SampledFunction,
    sample: &OrbitSample,
    band: &BandInfo,
    opts: &TransformOptions,
) -> Result<Option<KernelBlock>> {
    let Some((rows, cols)) = kernel_windows(g, sample, band, opts)? else { return Ok(None) };
    let (a, b) = band.support.expect("window implies support");
    let slices: Vec<usize> = (a..=b).collect();
    assemble_kernel_on(g, sample, &rows, &cols, &slices).map(Some)
}

/// Behaviour of `f(ξ − s)` when `ξ − s` leaves the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Zero,
    Periodic,
}

/// `(σ(x) f)(ξ) = χ_{ξ.σ₀}(n) f(ξ − s)` for `x = (n, α(s))` on an `H` lattice.
pub fn induced_rep_apply(
    model: &dyn GroupExtension,
    base: &[f64],
    x: &GroupElement,
    grid: &Grid1D,
    f: &[Complex64],
    boundary: Boundary,
) -> Result<Vec<Complex64>> {
    model.check_element(x)?;
    if f.len() != grid.len() {
        return input_err("vector length does not match the grid");
    }
    let dt = grid.spacing().ok_or_else(|| HywError::Input("induced representation needs a uniform grid".into()))?;
    let shift = lattice_index(model.coord_from_h(x.h)?, dt)?;
    let len = grid.len() as i64;
    Ok(grid
        .points()
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            let mut src = i as i64 - shift;
            match boundary {
                Boundary::Zero if src < 0 || src >= len => return Complex64::new(0.0, 0.0),
                Boundary::Periodic => src = src.rem_euclid(len),
                _ => {}
            }
            let omega = model.dual_action(model.h_from_coord(*xi), base);
            character(&omega, &x.n) * f[src as usize]
        })
        .collect())
}

/// One `σ₀` of the field: `ν_G` weight and the kernel of `σ(g) K^{1/q}`.
#[derive(Debug, Clone)]
pub struct FourierBlock {
    pub sample: OrbitSample,
    pub kernel: WeightedKernel,
    pub profile: DMatrix<Complex64>,
    pub slices: Vec<usize>,
    singular: OnceLock<Vec<f64>>,
}

impl FourierBlock {
    pub fn operator_matrix(&self) -> ComplexMatrix {
        self.kernel.operator_matrix()
    }

    /// Singular values of the operator matrix, computed once.
    pub fn singular_values(&self) -> Result<&[f64]> {
        if let Some(s) = self.singular.get() {
            return Ok(s);
        }
        let s = singular_values(&self.operator_matrix())?;
        Ok(self.singular.get_or_init(|| s))
    }

    /// `‖M‖_q^q`.
    pub fn schatten_power(&self, q: f64) -> Result<f64> {
        if q == 2.0 {
            return Ok(frobenius_norm(&self.operator_matrix()).powi(2));
        }
        Ok(self.singular_values()?.iter().map(|s| s.powf(q)).sum())
    }
}

/// The discretized field `σ₀ ↦ σ(g) K_σ^{1/q}` with its `ν_G` weights.
#[derive(Debug, Clone)]
pub struct FourierField {
    p: f64,
    q: f64,
    blocks: Vec<FourierBlock>,
    band: BandInfo,
    unimodular: bool,
}

impl FourierField {
    pub fn from_blocks(p: f64, blocks: Vec<(OrbitSample, WeightedKernel)>) -> Result<Self> {
        let d = blocks.first().map(|b| b.0.base.len()).unwrap_or(0);
        if blocks.iter().any(|(s, _)| !(s.weight > 0.0)) {
            return input_err("field weights must be positive");
        }
        Ok(Self {
            p,
            q: conjugate_exponent(p),
            blocks: blocks
                .into_iter()
                .map(|(sample, kernel)| FourierBlock {
                    sample,
                    kernel,
                    profile: DMatrix::zeros(0, 0),
                    slices: Vec::new(),
                    singular: OnceLock::new(),
                })
                .collect(),
            band: BandInfo {
                half_width: vec![0.0; d],
                nyquist: vec![0.0; d],
                near_alias: false,
                outside_mass: 0.0,
                support: None,
                truncated_l1: 0.0,
            },
            unimodular: false,
        })
    }

    /// The field for another exponent without reassembly. Only possible when
    /// `K = I`, i.e. for unimodular groups.
    pub fn with_exponent(&self, p: f64) -> Option<Self> {
        if !self.unimodular || !(p > 1.0 && p <= 2.0) {
            return None;
        }
        Some(Self { p, q: conjugate_exponent(p), ..self.clone() })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn blocks(&self) -> &[FourierBlock] {
        &self.blocks
    }

    pub fn band(&self) -> &BandInfo {
        &self.band
    }

    /// `Σ_σ ν(σ) ‖M_σ‖_r^r` (blocks evaluated in parallel, summed in order).
    pub fn schatten_power_sum(&self, r: f64) -> Result<f64> {
        let parts: Vec<f64> = self
            .blocks
            .par_iter()
            .map(|b| b.schatten_power(r).map(|v| b.sample.weight * v))
            .collect::<Result<_>>()?;
        Ok(parts.iter().sum())
    }
}

/// `F^p(g)`: for each sampled `σ₀`, the kernel of `σ(g) K_σ^{1/q}` on its window.
pub fn fourier_transform_p(g: &SampledFunction, p: f64, opts: &TransformOptions) -> Result<FourierField> {
    if !(p > 1.0 && p <= 2.0) {
        return input_err(format!("the Fourier field needs 1 < p <= 2, got {p}"));
    }
    let q = conjugate_exponent(p);
    let band = detect_band(g, opts)?;
    let samples = if band.support.is_some() {
        dual_orbit_model(g.model()).sample(&band.band(), &opts.transversal)?
    } else {
        Vec::new()
    };
    let model = g.model();
    let blocks: Vec<Option<FourierBlock>> = samples
        .par_iter()
        .map(|s| {
            let Some(kb) = assemble_kernel(g, s, &band, opts)? else { return Ok(None) };
            let kop = FormalDimensionOperator::new(model, kb.kernel.gamma_grid());
            let kernel = apply_formal_dimension(&kb.kernel, &kop, 1.0 / q)?;
            Ok(Some(FourierBlock { sample: kb.sample, kernel, profile: kb.profile, slices: kb.slices, singular: OnceLock::new() }))
        })
        .collect::<Result<_>>()?;
    Ok(FourierField { p, q, blocks: blocks.into_iter().flatten().collect(), band, unimodular: model.unimodular() })
}

/// Layout of an exported field: one entry per block, in stream order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldManifest {
    pub p: f64,
    pub q: f64,
    pub blocks: Vec<BlockEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub base: Vec<f64>,
    pub weight: f64,
    pub rows: usize,
    pub cols: usize,
    /// First point and spacing of the row (`ξ`) and column (`γ`) windows.
    pub xi: (f64, f64),
    pub gamma: (f64, f64),
    /// Byte offset of the block header in the stream.
    pub offset: usize,
}

/// Writes every block as a `HYW1 <rows>x<cols>x2 <xi>,<gamma> <index>` section
/// followed by the kernel of `σ(g)K^{1/q}` in the fixture byte layout.
pub fn export_field<W: std::io::Write>(field: &FourierField, mut w: W) -> Result<FieldManifest> {
    let mut offset = 0;
    let mut blocks = Vec::with_capacity(field.blocks.len());
    for (idx, b) in field.blocks.iter().enumerate() {
        let (xi, gamma) = (b.kernel.xi_grid(), b.kernel.gamma_grid());
        let (rows, cols) = (xi.len(), gamma.len());
        let header = format!("HYW1 {rows}x{cols}x2 {}:{},{}:{} {idx}\n", xi.lo(), xi.hi(), gamma.lo(), gamma.hi());
        let mut buf = header.clone().into_bytes();
        buf.reserve(16 * rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = b.kernel.values()[(i, j)];
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        blocks.push(BlockEntry {
            base: b.sample.base.clone(),
            weight: b.sample.weight,
            rows,
            cols,
            xi: (xi.lo(), xi.weights()[0]),
            gamma: (gamma.lo(), gamma.weights()[0]),
            offset,
        });
        offset += buf.len();
    }
    Ok(FieldManifest { p: field.p, q: field.q, blocks })
}

/// `‖F‖_{B_q^⊕} = ( Σ_σ ν(σ) ‖M_σ‖_q^q )^{1/q}`.
pub fn bq_oplus_norm(field: &FourierField, q: f64) -> Result<f64> {
    if !(q >= 2.0) {
        return input_err(format!("B_q norm of a Fourier field needs q >= 2, got {q}"));
    }
    Ok(field.schatten_power_sum(q)?.powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{make_grids, sample, Extents, TestFunctionSpec};
    use crate::group::{AffineGroup, HeisenbergGroup, ModelKind};
    use crate::schatten::adjoint_kernel;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn axb(spec: &TestFunctionSpec, n: usize, h: usize) -> SampledFunction {
        let grids = make_grids(&AffineGroup, n, h, &Extents::default_for(ModelKind::Axb)).unwrap();
        sample(spec, &grids, ModelKind::Axb).unwrap()
    }

    fn heis(spec: &TestFunctionSpec, n: usize, h: usize) -> SampledFunction {
        let grids = make_grids(&HeisenbergGroup, n, h, &Extents::default_for(ModelKind::Heisenberg)).unwrap();
        sample(spec, &grids, ModelKind::Heisenberg).unwrap()
    }

    #[test]
    fn delta_transforms_to_constant() {
        let grids = make_grids(&AffineGroup, 32, 8, &Extents::default_for(ModelKind::Axb)).unwrap();
        let w = grids.0[0].weights()[0];
        let g = SampledFunction::from_fn(ModelKind::Axb, grids.0, grids.1, |n, _| {
            c(if n[0] == 0.0 { 1.0 / w } else { 0.0 }, 0.0)
        })
        .unwrap();
        let s = fourier_along_n(&g);
        for omega in [-3.3, -1.0, 0.0, 0.7, 2.9] {
            assert!((s.transform(2, &[omega]) - c(1.0, 0.0)).norm() < 1e-14);
        }
        let rec = s.reciprocal(2, 2).unwrap();
        assert!(rec.values.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-13));
    }

    #[test]
    fn shift_theorem_on_reciprocal_grid() {
        let base = TestFunctionSpec::gaussian(vec![0.0], vec![0.7], 0.0, 0.5);
        let n0 = 0.75; // six N cells
        let moved = TestFunctionSpec::gaussian(vec![n0], vec![0.7], 0.0, 0.5);
        let (g, h) = (axb(&base, 128, 16), axb(&moved, 128, 16));
        let (a, b) = (fourier_along_n(&g).reciprocal(8, 1).unwrap(), fourier_along_n(&h).reciprocal(8, 1).unwrap());
        let peak = a.values.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        for f in 0..a.values.len() {
            let expect = a.values[f] * phase(-a.omega(f)[0] * n0);
            assert!((b.values[f] - expect).norm() <= 1e-10 * peak);
        }
    }

    #[test]
    fn gaussian_transform_closed_form() {
        // ∫ e^{−n²/2s²} e^{−2πiωn} dn = s√(2π) e^{−2π²s²ω²}
        let s = 0.6;
        let g = axb(&TestFunctionSpec::gaussian(vec![0.0], vec![s], 0.0, 0.5), 128, 16);
        let cs = fourier_along_n(&g);
        let m = g.h_grid().nearest(0.0);
        for omega in [0.0, 0.3, -0.8, 1.37] {
            let exact = s * (2.0 * PI).sqrt() * (-2.0 * PI * PI * s * s * omega * omega).exp();
            assert!((cs.transform(m, &[omega]) - c(exact, 0.0)).norm() < 1e-6);
        }
        let rec = cs.reciprocal(m, 2).unwrap();
        for f in 0..rec.values.len() {
            let w = rec.omega(f)[0];
            let exact = s * (2.0 * PI).sqrt() * (-2.0 * PI * PI * s * s * w * w).exp();
            assert!((rec.values[f] - c(exact, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn fft_matches_direct_summation_and_inverts() {
        let g = heis(&TestFunctionSpec::random(ModelKind::Heisenberg, 5), 16, 16);
        let cs = fourier_along_n(&g);
        let m = g.h_grid().nearest(0.2);
        let rec = cs.reciprocal(m, 2).unwrap();
        for f in (0..rec.values.len()).step_by(37) {
            let direct = cs.transform(m, &rec.omega(f));
            assert!((rec.values[f] - direct).norm() < 1e-12);
        }
        let rec1 = cs.reciprocal(m, 1).unwrap();
        let back = inverse_on_grid(&g, &rec1).unwrap();
        for (f, z) in back.iter().enumerate() {
            assert!((z - g.values()[(f, m)]).norm() < 1e-8);
        }
    }

    #[test]
    fn parseval_on_reciprocal_grid() {
        let g = heis(&TestFunctionSpec::random(ModelKind::Heisenberg, 11), 32, 16);
        let cs = fourier_along_n(&g);
        for m in [3, 8, 12] {
            let lhs = cs.reciprocal(m, 2).unwrap().lq_norm(2.0).powi(2);
            let rhs = g.slice_lp_norm(m, 2.0).powi(2);
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300));
        }
    }

    #[test]
    fn pair_matrix_matches_pointwise_pairing() {
        let g = heis(&TestFunctionSpec::random(ModelKind::Heisenberg, 2), 16, 16);
        let cs = fourier_along_n(&g);
        let cols = [2usize, 7, 9];
        let shared: Vec<Vec<f64>> = (0..5).map(|i| vec![0.3 * i as f64 - 0.4, 1.7]).collect();
        let mixed: Vec<Vec<f64>> = (0..5).map(|i| vec![0.3 * i as f64 - 0.4, 0.2 * i as f64]).collect();
        for omegas in [shared, mixed] {
            let p = cs.pair_matrix(&omegas, &cols);
            for (i, w) in omegas.iter().enumerate() {
                for (ci, m) in cols.iter().enumerate() {
                    assert!((p[(i, ci)] - cs.pair(*m, w)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn band_detection_brackets_the_gaussian() {
        let s = 0.6;
        let g = axb(&TestFunctionSpec::gaussian(vec![0.0], vec![s], 0.0, 0.4), 128, 128);
        let band = detect_band(&g, &TransformOptions::default()).unwrap();
        // e^{−2π²s²B²} = 1e−10
        let expect = (10.0 * 10f64.ln() / (2.0 * PI * PI * s * s)).sqrt();
        assert!(band.half_width[0] >= expect && band.half_width[0] <= expect + 0.2, "{:?}", band);
        assert!(!band.near_alias);
        assert!(band.outside_mass < 1e-18);
        assert!(band.truncated_l1 < 1e-8);
    }

    #[test]
    fn formal_dimension_factors() {
        let grid = Grid1D::lattice(0.25, -8, 16).unwrap();
        let kop = FormalDimensionOperator::new(&AffineGroup, &grid);
        for (t, d) in grid.points().iter().zip(kop.diagonal()) {
            assert_eq!(*d, AffineGroup.modular_at(*t));
        }
        let k = WeightedKernel::new(grid.clone(), grid.clone(), ComplexMatrix::from_element(16, 16, c(1.0, -2.0))).unwrap();
        let half = apply_formal_dimension(&k, &kop, 0.5).unwrap();
        for j in 0..16 {
            let a = (-grid.points()[j]).exp().sqrt();
            assert!((half.values()[(3, j)] - c(1.0, -2.0) * a).norm() < 1e-14);
        }
        assert_eq!(apply_formal_dimension(&k, &kop, 0.0).unwrap(), k);
        let heis = FormalDimensionOperator::new(&HeisenbergGroup, &grid);
        assert_eq!(apply_formal_dimension(&k, &heis, 1.0 / 3.0).unwrap(), k);
        let other = Grid1D::lattice(0.25, -7, 16).unwrap();
        assert!(apply_formal_dimension(&k, &FormalDimensionOperator::new(&AffineGroup, &other), 0.5).is_err());
    }

    #[test]
    fn induced_rep_examples() {
        let grid = Grid1D::lattice(0.125, -32, 64).unwrap();
        let f: Vec<Complex64> = grid.points().iter().map(|t| c((-t * t).exp(), 0.3 * t)).collect();
        for model in [&AffineGroup as &dyn GroupExtension, &HeisenbergGroup] {
            let base = if model.dim_n() == 1 { vec![1.0] } else { vec![0.0, 0.8] };
            let id = model.identity();
            assert_eq!(induced_rep_apply(model, &base, &id, &grid, &f, Boundary::Zero).unwrap(), f);
            let n_only = GroupElement::new(vec![0.4; model.dim_n()], model.h_identity());
            let out = induced_rep_apply(model, &base, &n_only, &grid, &f, Boundary::Zero).unwrap();
            for (a, b) in out.iter().zip(&f) {
                assert!((a.norm() - b.norm()).abs() < 1e-15);
            }
            let off = GroupElement::new(vec![0.0; model.dim_n()], model.h_from_coord(0.1));
            assert!(induced_rep_apply(model, &base, &off, &grid, &f, Boundary::Zero).is_err());
        }
    }

    #[test]
    fn induced_rep_composition() {
        let grid = Grid1D::lattice(0.125, -64, 128).unwrap();
        let f: Vec<Complex64> = grid.points().iter().map(|t| c((-t * t).exp(), 0.0)).collect();
        for model in [&AffineGroup as &dyn GroupExtension, &HeisenbergGroup] {
            let base = if model.dim_n() == 1 { vec![-1.0] } else { vec![0.0, -1.3] };
            let x1 = GroupElement::new(vec![0.3; model.dim_n()], model.h_from_coord(0.5));
            let x2 = GroupElement::new(vec![-0.7; model.dim_n()], model.h_from_coord(-1.25));
            let x12 = model.multiply(&x1, &x2).unwrap();
            let two = induced_rep_apply(
                model,
                &base,
                &x1,
                &grid,
                &induced_rep_apply(model, &base, &x2, &grid, &f, Boundary::Zero).unwrap(),
                Boundary::Zero,
            )
            .unwrap();
            let one = induced_rep_apply(model, &base, &x12, &grid, &f, Boundary::Zero).unwrap();
            for (a, b) in two.iter().zip(&one) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn periodic_boundary_wraps() {
        let grid = Grid1D::lattice(1.0, 0, 4).unwrap();
        let f = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        let x = GroupElement::new(vec![0.0, 0.0], 1.0);
        let out = induced_rep_apply(&HeisenbergGroup, &[0.0, 1.0], &x, &grid, &f, Boundary::Periodic).unwrap();
        assert_eq!(out, vec![c(4.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let zero = induced_rep_apply(&HeisenbergGroup, &[0.0, 1.0], &x, &grid, &f, Boundary::Zero).unwrap();
        assert_eq!(zero[0], c(0.0, 0.0));
    }

    /// `Σ_x g(x) (σ(x) f) w(x)` by looping over the sample points of `g`.
    fn direct_quadrature(g: &SampledFunction, base: &[f64], grid: &Grid1D, f: &[Complex64]) -> Vec<Complex64> {
        let model = g.model();
        let mut out = vec![c(0.0, 0.0); grid.len()];
        for m in 0..g.h_grid().len() {
            let t = g.h_grid().points()[m];
            let wh = g.h_grid().weights()[m] * model.modular_at(t);
            for flat in 0..g.n_len() {
                let v = g.values()[(flat, m)];
                if v == c(0.0, 0.0) {
                    continue;
                }
                let x = GroupElement::new(g.n_point(flat), model.h_from_coord(t));
                let y = induced_rep_apply(model, base, &x, grid, f, Boundary::Zero).unwrap();
                let w = v * g.n_weight(flat) * wh;
                for (o, yi) in out.iter_mut().zip(&y) {
                    *o += w * yi;
                }
            }
        }
        out
    }

    #[test]
    fn kernel_agrees_with_direct_quadrature() {
        let ext_a = Extents { n: vec![(-4.0, 4.0)], h: (-2.0, 2.0) };
        let ext_h = Extents { n: vec![(-4.0, 4.0), (-2.0, 2.0)], h: (-2.0, 2.0) };
        let cases = [
            (ModelKind::Axb, make_grids(&AffineGroup, 32, 16, &ext_a).unwrap(), vec![1.0]),
            (ModelKind::Heisenberg, make_grids(&HeisenbergGroup, 16, 16, &ext_h).unwrap(), vec![0.0, 0.9]),
        ];
        for (kind, grids, base) in cases {
            let g = sample(&TestFunctionSpec::random(kind, 4), &grids, kind).unwrap();
            let grid = Grid1D::lattice(0.25, -20, 40).unwrap();
            let sample_pt = OrbitSample { base: base.clone(), weight: 1.0 };
            let all: Vec<usize> = (0..g.h_grid().len()).collect();
            let kb = assemble_kernel_on(&g, &sample_pt, &grid, &grid, &all).unwrap();
            let f: Vec<Complex64> = grid.points().iter().map(|t| c((-t * t / 4.0).exp(), (-t * t).exp())).collect();
            let via_kernel = kb.kernel.apply(&f).unwrap();
            let direct = direct_quadrature(&g, &base, &grid, &f);
            let scale = direct.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            for (a, b) in via_kernel.iter().zip(&direct) {
                assert!((a - b).norm() <= 1e-10 * scale, "{kind}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn heisenberg_kernel_has_no_modular_factor() {
        let g = heis(&TestFunctionSpec::random(ModelKind::Heisenberg, 9), 16, 16);
        let grid = Grid1D::lattice(g.h_grid().spacing().unwrap(), -10, 20).unwrap();
        let s = OrbitSample { base: vec![0.0, 1.1], weight: 1.0 };
        let all: Vec<usize> = (0..g.h_grid().len()).collect();
        let kb = assemble_kernel_on(&g, &s, &grid, &grid, &all).unwrap();
        let off = g.h_grid().lattice_offset().unwrap();
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                let m = (i as i64 - j as i64) - off;
                let want = if m >= 0 && (m as usize) < g.h_grid().len() {
                    let omega = HeisenbergGroup.dual_action(HeisenbergGroup.h_from_coord(grid.points()[i]), &s.base);
                    fourier_along_n(&g).pair(m as usize, &omega)
                } else {
                    c(0.0, 0.0)
                };
                assert!((kb.kernel.values()[(i, j)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_of_involution_is_adjoint() {
        // g*(x) = conj(g(x⁻¹)) Δ_G(x⁻¹)
        for kind in [ModelKind::Axb, ModelKind::Heisenberg] {
            let model = kind.model();
            let ext = if kind == ModelKind::Axb {
                Extents { n: vec![(-16.0, 16.0)], h: (-4.0, 4.0) }
            } else {
                Extents { n: vec![(-6.0, 6.0), (-6.0, 6.0)], h: (-4.0, 4.0) }
            };
            // g*_s has N-width s_N·e^{s} on ax+b: the box must hold the wide slices
            let n_pts = if kind == ModelKind::Axb { 256 } else { 64 };
            let grids = make_grids(model, n_pts, 32, &ext).unwrap();
            let spec = if kind == ModelKind::Axb {
                TestFunctionSpec::gaussian(vec![0.2], vec![0.5], 0.1, 0.25)
            } else {
                TestFunctionSpec::gaussian(vec![0.1, -0.1], vec![0.6, 0.6], 0.1, 0.25)
            };
            let f = spec.evaluator();
            let g = sample(&spec, &grids, kind).unwrap();
            let gstar = SampledFunction::from_fn(kind, grids.0.clone(), grids.1.clone(), |n, t| {
                let x = GroupElement::new(n.to_vec(), model.h_from_coord(t));
                let xi = model.inverse(&x);
                let ti = model.coord_from_h(xi.h).unwrap();
                f(&xi.n, ti).conj() * model.modular_at(ti)
            })
            .unwrap();
            let s = OrbitSample { base: if kind == ModelKind::Axb { vec![1.0] } else { vec![0.0, 1.0] }, weight: 1.0 };
            // keep ξ.σ₀ inside the N band so the sums do not alias
            let grid = if kind == ModelKind::Axb {
                Grid1D::lattice(0.25, -2, 24).unwrap()
            } else {
                Grid1D::lattice(0.25, -8, 16).unwrap()
            };
            let all: Vec<usize> = (0..32).collect();
            let k = assemble_kernel_on(&g, &s, &grid, &grid, &all).unwrap().kernel;
            let ks = assemble_kernel_on(&gstar, &s, &grid, &grid, &all).unwrap().kernel;
            let adj = adjoint_kernel(&k);
            let scale = k.values().iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let dev = (ks.values() - adj.values()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            assert!(dev <= 1e-8 * scale, "{kind}: {dev}");
        }
    }

    #[test]
    fn kernel_is_local_for_concentrated_g() {
        let g = axb(&TestFunctionSpec::gaussian(vec![0.0], vec![0.5], 0.0, 0.25), 128, 128);
        let opts = TransformOptions::default();
        let band = detect_band(&g, &opts).unwrap();
        let s = OrbitSample { base: vec![1.0], weight: 1.0 };
        let kb = assemble_kernel(&g, &s, &band, &opts).unwrap().unwrap();
        let (rows, cols) = (kb.kernel.xi_grid(), kb.kernel.gamma_grid());
        let (mut near, mut all) = (0.0, 0.0);
        for i in 0..rows.len() {
            for j in 0..cols.len() {
                let e = kb.kernel.values()[(i, j)].norm_sqr();
                all += e;
                if (rows.points()[i] - cols.points()[j]).abs() <= 1.5 {
                    near += e;
                }
            }
        }
        assert!(near / all > 1.0 - 1e-10);
    }

    #[test]
    fn field_is_linear() {
        let opts = TransformOptions::default();
        let a = axb(&TestFunctionSpec::random(ModelKind::Axb, 1), 64, 64);
        let b = axb(&TestFunctionSpec::random(ModelKind::Axb, 2), 64, 64);
        let sum = a.plus(&b).unwrap();
        // fix the windows through the sum's band so all three fields share grids
        let band = detect_band(&sum, &opts).unwrap();
        for s in dual_orbit_model(&AffineGroup).sample(&band.band(), &opts.transversal).unwrap() {
            let k = |g: &SampledFunction| {
                let (rows, cols) = kernel_windows(&sum, &s, &band, &opts).unwrap().unwrap();
                let all: Vec<usize> = (0..g.h_grid().len()).collect();
                assemble_kernel_on(g, &s, &rows, &cols, &all).unwrap().kernel
            };
            let (ka, kb, ks) = (k(&a), k(&b), k(&sum));
            let dev = (ka.values() + kb.values() - ks.values()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            assert!(dev < 1e-12);
        }
    }

    #[test]
    fn zero_function_gives_empty_field() {
        let grids = make_grids(&AffineGroup, 16, 16, &Extents::default_for(ModelKind::Axb)).unwrap();
        let g = SampledFunction::from_fn(ModelKind::Axb, grids.0, grids.1, |_, _| c(0.0, 0.0)).unwrap();
        let field = fourier_transform_p(&g, 1.5, &TransformOptions::default()).unwrap();
        assert!(field.blocks().is_empty());
        assert_eq!(bq_oplus_norm(&field, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn field_norm_examples() {
        let grid = Grid1D::lattice(1.0, 0, 1).unwrap();
        let k = WeightedKernel::new(grid.clone(), grid, ComplexMatrix::from_element(1, 1, c(1.0, 0.0))).unwrap();
        let field = FourierField::from_blocks(2.0, vec![(OrbitSample { base: vec![1.0], weight: 1.0 }, k)]).unwrap();
        assert_eq!(bq_oplus_norm(&field, 2.0).unwrap(), 1.0);
        assert!((bq_oplus_norm(&field, 4.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(bq_oplus_norm(&field, 1.5).is_err());
        let g = axb(&TestFunctionSpec::default_gaussian(ModelKind::Axb), 64, 64);
        let field = fourier_transform_p(&g, 1.5, &TransformOptions::default()).unwrap();
        let bases: Vec<f64> = field.blocks().iter().map(|b| b.sample.base[0]).collect();
        assert_eq!(bases, vec![-1.0, 1.0]);
        assert!(fourier_transform_p(&g, 2.5, &TransformOptions::default()).is_err());
    }

    #[test]
    fn n_translation_conjugates_the_field() {
        let opts = TransformOptions::default();
        for kind in [ModelKind::Axb, ModelKind::Heisenberg] {
            let (spec, moved, n0) = if kind == ModelKind::Axb {
                (
                    TestFunctionSpec::gaussian(vec![0.0], vec![0.7], 0.0, 0.4),
                    TestFunctionSpec::gaussian(vec![0.5], vec![0.7], 0.0, 0.4),
                    vec![0.5],
                )
            } else {
                (
                    TestFunctionSpec::gaussian(vec![0.0, 0.0], vec![0.7, 0.35], 0.0, 0.8),
                    TestFunctionSpec::gaussian(vec![0.375, 0.1875], vec![0.7, 0.35], 0.0, 0.8),
                    vec![0.375, 0.1875],
                )
            };
            let (g, h) = if kind == ModelKind::Axb {
                (axb(&spec, 128, 64), axb(&moved, 128, 64))
            } else {
                (heis(&spec, 64, 32), heis(&moved, 64, 32))
            };
            let band = detect_band(&g, &opts).unwrap();
            let mut tp = opts.transversal;
            tp.lambda_points = 4;
            for s in dual_orbit_model(kind.model()).sample(&band.band(), &tp).unwrap() {
                let (rows, cols) = kernel_windows(&g, &s, &band, &opts).unwrap().unwrap();
                let all: Vec<usize> = (0..g.h_grid().len()).collect();
                let kg = assemble_kernel_on(&g, &s, &rows, &cols, &all).unwrap().kernel;
                let kh = assemble_kernel_on(&h, &s, &rows, &cols, &all).unwrap().kernel;
                let scale = kg.values().iter().fold(0.0f64, |m, z| m.max(z.norm()));
                for i in 0..rows.len() {
                    let omega = kind.model().dual_action(kind.model().h_from_coord(rows.points()[i]), &s.base);
                    let chi = character(&omega, &n0);
                    for j in 0..cols.len() {
                        let e = (kh.values()[(i, j)] - chi * kg.values()[(i, j)]).norm(); // absolute floor: roundoff of the pairing sums, independent of the block size
                        assert!(e <= 1e-10 * scale + 1e-14, "{kind} {:?} i={i} j={j} e={e}", s.base);
                    }
                }
                for q in [2.0, 3.0] {
                    let a = crate::schatten::schatten_norm(&kg.operator_matrix(), crate::schatten::SchattenExponent::new(q).unwrap()).unwrap();
                    let b = crate::schatten::schatten_norm(&kh.operator_matrix(), crate::schatten::SchattenExponent::new(q).unwrap()).unwrap();
                    assert!((a - b).abs() <= 1e-10 * a + 1e-14);
                }
            }
        }
    }
}
