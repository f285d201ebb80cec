//! Group extensions `1 → N → G → H → 1` with abelian `N = ℝ^d` and `H ≅ ℝ`.
//!
//! Elements are written `g = n·α(h) ≡ (n, h)` through a cross-section
//! `α: H → G`. `h` is stored as the natural group parameter (the dilation `a`
//! for ax+b, the shift `x` for Heisenberg); grids live in the additive
//! *coordinate* `t` of `H`, in which Haar measure of `H` is Lebesgue measure.
//!
//! Characters of `N` are `χ_ω(n) = exp(2πi⟨ω, n⟩)`, so that Lebesgue measure on
//! the frequency space is the Plancherel measure of `N`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, HywError, Result};

/// `g = n·α(h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub n: Vec<f64>,
    pub h: f64,
}

impl GroupElement {
    pub fn new(n: Vec<f64>, h: f64) -> Self {
        Self { n, h }
    }

    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.n.iter().all(|v| v.is_finite())
    }

    /// Largest coordinate difference to `other`.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        self.n
            .iter()
            .zip(&other.n)
            .map(|(a, b)| (a - b).abs())
            .fold((self.h - other.h).abs(), f64::max)
    }
}

/// Character `n ↦ exp(2πi⟨ω, n⟩)` evaluated at `n`.
pub fn character(omega: &[f64], n: &[f64]) -> Complex64 {
    let phase: f64 = omega.iter().zip(n).map(|(w, x)| w * x).sum();
    Complex64::from_polar(1.0, 2.0 * PI * phase)
}

/// Half-widths of the box in frequency space outside which a function's
/// `N`-transform is negligible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBand {
    pub half_width: Vec<f64>,
}

impl FrequencyBand {
    pub fn contains(&self, omega: &[f64]) -> bool {
        omega.iter().zip(&self.half_width).all(|(w, b)| w.abs() <= *b)
    }
}

/// Controls how far the representation window extends along an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowOptions {
    /// Length (in `H` coordinates) kept beyond the band edge along orbits that
    /// never leave the band, as for ax+b where `ω = ε/a → 0`.
    pub tail_span: f64,
}

impl Default for WindowOptions {
    fn default() -> Self {
        Self { tail_span: 36.0 }
    }
}

/// One point of the transversal `U₀` with its `ν_G` quadrature mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub base: Vec<f64>,
    pub weight: f64,
}

/// How the transversal and the Plancherel measure of `G` are described.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Transversal {
    /// Finitely many base characters, each carrying its own `ν_G` mass.
    Atoms(Vec<OrbitSample>),
    /// `σ₀(λ) = λ·direction`, `λ ≠ 0`, with `ν_G = |λ|^density_power dλ`.
    Line { direction: Vec<f64>, density_power: f64 },
}

/// Parameters of the `λ` quadrature for [`Transversal::Line`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransversalOptions {
    /// Total number of `λ` nodes, split evenly between `λ < 0` and `λ > 0`.
    pub lambda_points: usize,
    /// Half-width of the excluded neighbourhood of `λ = 0`.
    pub lambda_exclusion: f64,
}

impl Default for TransversalOptions {
    fn default() -> Self {
        Self { lambda_points: 64, lambda_exclusion: 0.0 }
    }
}

/// The data of the free dual action: transversal, `ν_G` and `ψ = Δ_G`.
pub struct DualOrbitModel<'a> {
    model: &'a dyn GroupExtension,
    pub transversal: Transversal,
}

impl<'a> DualOrbitModel<'a> {
    pub fn dual_action(&self, h: f64, chi: &[f64]) -> Vec<f64> {
        self.model.dual_action(h, chi)
    }

    pub fn psi(&self, h: f64) -> Result<f64> {
        self.model.disintegration_weight(h)
    }

    /// Quadrature nodes of `ν_G` on the transversal.
    ///
    /// For a line transversal the `λ` range is `[exclusion, Λ]` on both sides,
    /// where `Λ` is the band half-width along the line, cut into equal cells
    /// whose midpoints carry mass `|λ|^power · cell`.
    pub fn sample(&self, band: &FrequencyBand, opts: &TransversalOptions) -> Result<Vec<OrbitSample>> {
        match &self.transversal {
            Transversal::Atoms(atoms) => Ok(atoms.clone()),
            Transversal::Line { direction, density_power } => {
                if opts.lambda_points < 2 || opts.lambda_points % 2 != 0 {
                    return input_err("lambda_points must be an even number >= 2");
                }
                let reach = direction
                    .iter()
                    .zip(&band.half_width)
                    .filter(|(d, _)| **d != 0.0)
                    .map(|(d, b)| b / d.abs())
                    .fold(f64::INFINITY, f64::min);
                if !reach.is_finite() || reach <= opts.lambda_exclusion {
                    return Ok(Vec::new());
                }
                let per_side = opts.lambda_points / 2;
                let cell = (reach - opts.lambda_exclusion) / per_side as f64;
                let mut out = Vec::with_capacity(opts.lambda_points);
                for sign in [-1.0, 1.0] {
                    for k in 0..per_side {
                        let lambda = sign * (opts.lambda_exclusion + (k as f64 + 0.5) * cell);
                        out.push(OrbitSample {
                            base: direction.iter().map(|d| d * lambda).collect(),
                            weight: lambda.abs().powf(*density_power) * cell,
                        });
                    }
                }
                Ok(out)
            }
        }
    }
}

/// A group extension with abelian `N = ℝ^d`, `H ≅ ℝ` and a homomorphic section.
pub trait GroupExtension: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn dim_n(&self) -> usize;
    /// Dimension of `G`.
    fn dim_g(&self) -> usize {
        self.dim_n() + 1
    }
    fn unimodular(&self) -> bool;

    /// Group parameter of `H` at coordinate `t`.
    fn h_from_coord(&self, t: f64) -> f64;
    fn coord_from_h(&self, h: f64) -> Result<f64>;
    /// Product in `H`.
    fn h_mul(&self, a: f64, b: f64) -> f64;
    fn h_inv(&self, a: f64) -> f64;
    fn h_identity(&self) -> f64;

    /// `α(h)·n·α(h)⁻¹`.
    fn conjugate(&self, h: f64, n: &[f64]) -> Vec<f64>;
    /// `Δ_G(α(h))`; `Δ_G` is trivial on `N`.
    fn modular(&self, h: f64) -> Result<f64>;
    /// Frequency of `h.χ_ω`, where `(h.χ)(n) = χ(α(h)⁻¹ n α(h))`.
    fn dual_action(&self, h: f64, chi: &[f64]) -> Vec<f64>;
    /// Representation window in `H` coordinates for the orbit of `base`:
    /// the coordinates `t` with `t.base` inside `band`, or `None` if the orbit
    /// misses the band.
    fn orbit_window(&self, base: &[f64], band: &FrequencyBand, opts: &WindowOptions) -> Option<(f64, f64)>;
    fn transversal(&self) -> Transversal;
    /// Short human-readable description recorded in report headers.
    fn describe(&self) -> String;

    fn identity(&self) -> GroupElement {
        GroupElement::new(vec![0.0; self.dim_n()], self.h_identity())
    }

    /// `α(h) = (0, h)`.
    fn section(&self, h: f64) -> GroupElement {
        GroupElement::new(vec![0.0; self.dim_n()], h)
    }

    fn check_element(&self, g: &GroupElement) -> Result<()> {
        if g.n.len() != self.dim_n() {
            return Err(HywError::ModelMismatch(format!(
                "{} expects N-coordinates of dimension {}, got {}",
                self.name(),
                self.dim_n(),
                g.n.len()
            )));
        }
        Ok(())
    }

    /// `(n₁, h₁)(n₂, h₂) = (n₁ + α(h₁) n₂ α(h₁)⁻¹, h₁h₂)`.
    fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check_element(a)?;
        self.check_element(b)?;
        let moved = self.conjugate(a.h, &b.n);
        Ok(GroupElement::new(
            a.n.iter().zip(&moved).map(|(x, y)| x + y).collect(),
            self.h_mul(a.h, b.h),
        ))
    }

    fn inverse(&self, g: &GroupElement) -> GroupElement {
        let h_inv = self.h_inv(g.h);
        let n: Vec<f64> = g.n.iter().map(|x| -x).collect();
        GroupElement::new(self.conjugate(h_inv, &n), h_inv)
    }

    /// `Λ(γ, ξ) = α(ξ)⁻¹ α(γ) α(γ⁻¹ξ)`, computed through the group law.
    fn cocycle(&self, gamma: f64, xi: f64) -> Result<Vec<f64>> {
        let inner = self.section(self.h_mul(self.h_inv(gamma), xi));
        let right = self.multiply(&self.section(gamma), &inner)?;
        let full = self.multiply(&self.inverse(&self.section(xi)), &right)?;
        Ok(full.n)
    }

    /// `Δ_G` at the `H` coordinate `t`.
    fn modular_at(&self, t: f64) -> f64 {
        self.modular(self.h_from_coord(t))
            .expect("coordinate maps into H")
    }

    /// Density of `dμ_G = dμ_N(n) Δ_G(h) dμ_H(h)` against `dn dt`.
    fn haar_weight(&self, _n: &[f64], t: f64) -> f64 {
        self.modular_at(t)
    }

    /// `ψ(h) = Δ_G(h)`, the density of `ν_N` along an orbit against `dμ_H`.
    fn disintegration_weight(&self, h: f64) -> Result<f64> {
        self.modular(h)
    }

    fn dual_orbit_model(&self) -> DualOrbitModel<'_>
    where
        Self: Sized,
    {
        DualOrbitModel { model: self, transversal: self.transversal() }
    }
}

/// Builds the dual-orbit data for a trait object.
pub fn dual_orbit_model(model: &dyn GroupExtension) -> DualOrbitModel<'_> {
    DualOrbitModel { model, transversal: model.transversal() }
}

/// The affine group of the line, `(b, a)(b', a') = (b + a b', a a')`.
///
/// `N = {(b, 1)} ≅ ℝ = ker Δ_G`, `H = ℝ₊` with coordinate `t = ln a`,
/// `Δ_G(b, a) = 1/a`, left Haar measure `db da / a²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AffineGroup;

impl GroupExtension for AffineGroup {
    fn name(&self) -> &'static str {
        "axb"
    }
    fn dim_n(&self) -> usize {
        1
    }
    fn unimodular(&self) -> bool {
        false
    }
    fn h_from_coord(&self, t: f64) -> f64 {
        t.exp()
    }
    fn coord_from_h(&self, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return input_err(format!("ax+b dilation must be positive, got {h}"));
        }
        Ok(h.ln())
    }
    fn h_mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }
    fn h_inv(&self, a: f64) -> f64 {
        1.0 / a
    }
    fn h_identity(&self) -> f64 {
        1.0
    }
    fn conjugate(&self, h: f64, n: &[f64]) -> Vec<f64> {
        vec![h * n[0]]
    }
    fn modular(&self, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return input_err(format!("ax+b dilation must be positive, got {h}"));
        }
        Ok(1.0 / h)
    }
    fn dual_action(&self, h: f64, chi: &[f64]) -> Vec<f64> {
        vec![chi[0] / h]
    }
    fn orbit_window(&self, base: &[f64], band: &FrequencyBand, opts: &WindowOptions) -> Option<(f64, f64)> {
        // |base| e^{-t} <= band  <=>  t >= ln(|base| / band)
        let b = band.half_width[0];
        if !(b > 0.0) || base[0] == 0.0 {
            return None;
        }
        let lo = (base[0].abs() / b).ln();
        Some((lo, lo + opts.tail_span))
    }
    fn transversal(&self) -> Transversal {
        Transversal::Atoms(vec![
            OrbitSample { base: vec![-1.0], weight: 1.0 },
            OrbitSample { base: vec![1.0], weight: 1.0 },
        ])
    }
    fn describe(&self) -> String {
        "ax+b: G = R x| R+, (b,a)(b',a') = (b+ab', aa'), N = R, H = R+ (t = ln a), \
         Delta_G(b,a) = 1/a, U0 = {-1, +1} with unit nu_G atoms"
            .to_string()
    }
}

/// The Heisenberg group in coordinates `(x, y, z)` with
/// `(x,y,z)(x',y',z') = (x+x', y+y', z+z'+xy')`.
///
/// `N = {(0, y, z)} ≅ ℝ²`, `H = ℝ` through `α(x) = (x, 0, 0)`; element
/// coordinates are `((y, z), x)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeisenbergGroup;

impl HeisenbergGroup {
    /// `(x, y, z) ↦ ((y, z), x)`.
    pub fn from_xyz(x: f64, y: f64, z: f64) -> GroupElement {
        GroupElement::new(vec![y, z], x)
    }

    pub fn to_xyz(g: &GroupElement) -> (f64, f64, f64) {
        (g.h, g.n[0], g.n[1])
    }
}

impl GroupExtension for HeisenbergGroup {
    fn name(&self) -> &'static str {
        "heisenberg"
    }
    fn dim_n(&self) -> usize {
        2
    }
    fn unimodular(&self) -> bool {
        true
    }
    fn h_from_coord(&self, t: f64) -> f64 {
        t
    }
    fn coord_from_h(&self, h: f64) -> Result<f64> {
        Ok(h)
    }
    fn h_mul(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    fn h_inv(&self, a: f64) -> f64 {
        -a
    }
    fn h_identity(&self) -> f64 {
        0.0
    }
    fn conjugate(&self, h: f64, n: &[f64]) -> Vec<f64> {
        vec![n[0], n[1] + h * n[0]]
    }
    fn modular(&self, _h: f64) -> Result<f64> {
        Ok(1.0)
    }
    fn dual_action(&self, h: f64, chi: &[f64]) -> Vec<f64> {
        vec![chi[0] - chi[1] * h, chi[1]]
    }
    fn orbit_window(&self, base: &[f64], band: &FrequencyBand, _opts: &WindowOptions) -> Option<(f64, f64)> {
        // orbit of (mu, lambda): (mu - lambda t, lambda)
        let (mu, lambda) = (base[0], base[1]);
        if lambda == 0.0 || lambda.abs() > band.half_width[1] {
            return None;
        }
        let b = band.half_width[0];
        let a = (mu - b) / lambda;
        let c = (mu + b) / lambda;
        Some((a.min(c), a.max(c)))
    }
    fn transversal(&self) -> Transversal {
        Transversal::Line { direction: vec![0.0, 1.0], density_power: 1.0 }
    }
    fn describe(&self) -> String {
        "heisenberg: (x,y,z)(x',y',z') = (x+x', y+y', z+z'+xy'), N = {(0,y,z)} = R^2, \
         H = R via alpha(x) = (x,0,0), Delta_G = 1, U0 = {(0, lambda) : lambda != 0} \
         with nu_G = |lambda| dlambda"
            .to_string()
    }
}

/// Selection of a shipped model by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "axb")]
    Axb,
    #[serde(rename = "heisenberg")]
    Heisenberg,
}

impl ModelKind {
    pub fn model(self) -> &'static dyn GroupExtension {
        match self {
            ModelKind::Axb => &AffineGroup,
            ModelKind::Heisenberg => &HeisenbergGroup,
        }
    }

    pub fn name(self) -> &'static str {
        self.model().name()
    }
}

impl FromStr for ModelKind {
    type Err = HywError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "axb" | "ax+b" => Ok(ModelKind::Axb),
            "heisenberg" => Ok(ModelKind::Heisenberg),
            other => Err(HywError::Config(format!(
                "unknown group '{other}' (expected 'axb' or 'heisenberg')"
            ))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Lebesgue measure of the image of an axis-aligned box under `χ ↦ h.χ`.
///
/// The dual actions are affine, so the image is spanned by the images of the
/// edge vectors; working with edges avoids cancellation against large corners.
pub fn image_measure(model: &dyn GroupExtension, h: f64, lo: &[f64], hi: &[f64]) -> Result<f64> {
    let d = model.dim_n();
    if d > 2 {
        return input_err(format!("image_measure supports dim N <= 2, got {d}"));
    }
    let origin = model.dual_action(h, &vec![0.0; d]);
    let edge = |k: usize| -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[k] = hi[k] - lo[k];
        model.dual_action(h, &v).iter().zip(&origin).map(|(a, b)| a - b).collect()
    };
    match d {
        1 => Ok(edge(0)[0].abs()),
        _ => {
            let (e1, e2) = (edge(0), edge(1));
            Ok((e1[0] * e2[1] - e1[1] * e2[0]).abs())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_element(model: &dyn GroupExtension, rng: &mut ChaCha8Rng) -> GroupElement {
        let n = (0..model.dim_n()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        GroupElement::new(n, model.h_from_coord(rng.gen_range(-2.0..2.0)))
    }

    fn models() -> [&'static dyn GroupExtension; 2] {
        [&AffineGroup, &HeisenbergGroup]
    }

    /// Direct 3-coordinate Heisenberg product.
    fn heis_xyz(a: (f64, f64, f64), b: (f64, f64, f64)) -> (f64, f64, f64) {
        (a.0 + b.0, a.1 + b.1, a.2 + b.2 + a.0 * b.1)
    }

    #[test]
    fn affine_product_example() {
        let g = AffineGroup
            .multiply(&GroupElement::new(vec![1.0], 2.0), &GroupElement::new(vec![3.0], 5.0))
            .unwrap();
        assert_eq!(g, GroupElement::new(vec![7.0], 10.0));
    }

    #[test]
    fn affine_inverse_example() {
        let g = AffineGroup.inverse(&GroupElement::new(vec![7.0], 10.0));
        assert!((g.n[0] + 0.7).abs() < 1e-15 && (g.h - 0.1).abs() < 1e-15);
    }

    #[test]
    fn heisenberg_matches_xyz_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a: (f64, f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let b: (f64, f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let ga = HeisenbergGroup::from_xyz(a.0, a.1, a.2);
            let gb = HeisenbergGroup::from_xyz(b.0, b.1, b.2);
            // (n, h) really is n·α(h): (0,y,z)(x,0,0) = (x, y, z)
            let (x, y, z) = heis_xyz((0.0, a.1, a.2), (a.0, 0.0, 0.0));
            assert_eq!((x, y, z), a);
            let prod = HeisenbergGroup::to_xyz(&HeisenbergGroup.multiply(&ga, &gb).unwrap());
            let expected = heis_xyz(a, b);
            assert!((prod.0 - expected.0).abs() < 1e-12);
            assert!((prod.1 - expected.1).abs() < 1e-12);
            assert!((prod.2 - expected.2).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_inverse_associativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for model in models() {
            let e = model.identity();
            for _ in 0..20 {
                let g = random_element(model, &mut rng);
                assert!(model.multiply(&e, &g).unwrap().distance(&g) < 1e-14);
                assert!(model.multiply(&g, &model.inverse(&g)).unwrap().distance(&e) < 1e-12);
                assert!(model.multiply(&model.inverse(&g), &g).unwrap().distance(&e) < 1e-12);
            }
            assert!(model.inverse(&e).distance(&e) < 1e-15);
            for _ in 0..100 {
                let (a, b, c) = (
                    random_element(model, &mut rng),
                    random_element(model, &mut rng),
                    random_element(model, &mut rng),
                );
                let l = model.multiply(&model.multiply(&a, &b).unwrap(), &c).unwrap();
                let r = model.multiply(&a, &model.multiply(&b, &c).unwrap()).unwrap();
                assert!(l.distance(&r) < 1e-10);
            }
        }
    }

    #[test]
    fn model_mismatch_is_rejected() {
        let a = GroupElement::new(vec![1.0], 1.0);
        let b = GroupElement::new(vec![1.0, 2.0], 0.0);
        assert!(matches!(AffineGroup.multiply(&a, &b), Err(HywError::ModelMismatch(_))));
        assert!(matches!(HeisenbergGroup.multiply(&b, &a), Err(HywError::ModelMismatch(_))));
    }

    #[test]
    fn modular_function() {
        assert_eq!(AffineGroup.modular(1.0).unwrap(), 1.0);
        assert!((AffineGroup.modular(4.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(AffineGroup.modular(0.0).is_err());
        assert!(AffineGroup.modular(-1.0).is_err());
        for h in [-3.0, 0.0, 2.5] {
            assert_eq!(HeisenbergGroup.modular(h).unwrap(), 1.0);
            assert_eq!(HeisenbergGroup.haar_weight(&[0.3, 0.1], h), 1.0);
            assert_eq!(HeisenbergGroup.disintegration_weight(h).unwrap(), 1.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for model in models() {
            assert_eq!(model.disintegration_weight(model.h_identity()).unwrap(), 1.0);
            let mut all_one = true;
            for _ in 0..50 {
                let a = model.h_from_coord(rng.gen_range(-3.0..3.0));
                let b = model.h_from_coord(rng.gen_range(-3.0..3.0));
                let lhs = model.modular(model.h_mul(a, b)).unwrap();
                let rhs = model.modular(a).unwrap() * model.modular(b).unwrap();
                assert!((lhs - rhs).abs() <= 1e-12 * rhs);
                all_one &= (model.modular(a).unwrap() - 1.0).abs() < 1e-15;
            }
            assert_eq!(all_one, model.unimodular());
        }
    }

    /// Δ_G restricted to N is trivial: the H-part of any element of N is the identity.
    #[test]
    fn modular_trivial_on_n() {
        for model in models() {
            let n = GroupElement::new(vec![1.5; model.dim_n()], model.h_identity());
            assert_eq!(model.modular(n.h).unwrap(), 1.0);
        }
    }

    #[test]
    fn dual_action_examples() {
        assert!((AffineGroup.dual_action(2.0, &[1.0])[0] - 0.5).abs() < 1e-15);
        assert_eq!(HeisenbergGroup.dual_action(1.0, &[0.0, 1.0]), vec![-1.0, 1.0]);
        for model in models() {
            let chi = vec![0.7; model.dim_n()];
            assert_eq!(model.dual_action(model.h_identity(), &chi), chi);
        }
    }

    /// (h.χ)(n) = χ(α(h)⁻¹ n α(h)) for sampled n, and (h₁h₂).χ = h₁.(h₂.χ).
    #[test]
    fn dual_action_is_conjugation_and_an_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for model in models() {
            for _ in 0..30 {
                let h = model.h_from_coord(rng.gen_range(-2.0..2.0));
                let chi: Vec<f64> = (0..model.dim_n()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let moved = model.dual_action(h, &chi);
                for _ in 0..5 {
                    let n: Vec<f64> = (0..model.dim_n()).map(|_| rng.gen_range(-3.0..3.0)).collect();
                    let conj = model.conjugate(model.h_inv(h), &n);
                    assert!((character(&moved, &n) - character(&chi, &conj)).norm() < 1e-12);
                }
                let h2 = model.h_from_coord(rng.gen_range(-2.0..2.0));
                let lhs = model.dual_action(model.h_mul(h, h2), &chi);
                let rhs = model.dual_action(h, &model.dual_action(h2, &chi));
                for (a, b) in lhs.iter().zip(&rhs) {
                    assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
                }
            }
        }
    }

    /// Oracle: the frequency of n ↦ χ(α(a)⁻¹ n α(a)), fitted from samples.
    #[test]
    fn affine_dual_action_frequency_fit() {
        let a = 2.0;
        let ns: Vec<f64> = (0..64).map(|k| k as f64 * 0.05).collect();
        let phases: Vec<f64> = ns
            .iter()
            .map(|n| character(&[1.0], &AffineGroup.conjugate(1.0 / a, &[*n])).arg())
            .collect();
        let mut unwrapped = vec![phases[0]];
        for w in phases.windows(2) {
            let mut d = w[1] - w[0];
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            unwrapped.push(unwrapped.last().unwrap() + d);
        }
        let slope = (unwrapped[63] - unwrapped[0]) / (ns[63] - ns[0]) / (2.0 * PI);
        assert!((slope - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cocycle_is_trivial_for_shipped_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for model in models() {
            let e = model.h_identity();
            assert!(model.cocycle(e, model.h_from_coord(0.7)).unwrap().iter().all(|v| *v == 0.0));
            for _ in 0..100 {
                let g = model.h_from_coord(rng.gen_range(-3.0..3.0));
                let x = model.h_from_coord(rng.gen_range(-3.0..3.0));
                let lam = model.cocycle(g, x).unwrap();
                assert!(lam.iter().all(|v| v.abs() < 1e-12), "{lam:?}");
            }
        }
    }

    #[test]
    fn measure_scaling_of_dual_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for model in models() {
            for _ in 0..100 {
                let h = model.h_from_coord(rng.gen_range(-2.0..2.0));
                let lo: Vec<f64> = (0..model.dim_n()).map(|_| rng.gen_range(-2.0..0.0)).collect();
                let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.1..2.0)).collect();
                let vol: f64 = lo.iter().zip(&hi).map(|(l, u)| u - l).product();
                let img = image_measure(model, h, &lo, &hi).unwrap();
                let expected = model.modular(h).unwrap() * vol;
                assert!((img - expected).abs() <= 1e-12 * expected.max(1.0));
            }
        }
    }

    #[test]
    fn freeness_on_transversal() {
        let band = FrequencyBand { half_width: vec![3.0, 3.0] };
        for model in models() {
            let orbit = dual_orbit_model(model);
            let bases: Vec<Vec<f64>> = match &orbit.transversal {
                Transversal::Atoms(a) => a.iter().map(|s| s.base.clone()).collect(),
                Transversal::Line { .. } => orbit
                    .sample(&FrequencyBand { half_width: band.half_width[..model.dim_n()].to_vec() }, &TransversalOptions::default())
                    .unwrap()
                    .into_iter()
                    .map(|s| s.base)
                    .collect(),
            };
            for base in bases {
                for k in -40..=40 {
                    if k == 0 {
                        continue;
                    }
                    let h = model.h_from_coord(k as f64 * 0.125);
                    let moved = model.dual_action(h, &base);
                    let diff: f64 = moved.iter().zip(&base).map(|(a, b)| (a - b).abs()).sum();
                    assert!(diff > 0.0);
                }
            }
        }
    }

    #[test]
    fn affine_orbit_change_of_variables() {
        // ω = ε/a with a = e^t: |dω| = ψ(a) dμ_H with dμ_H = dt and ψ(a) = 1/a.
        let h = 1e-6;
        for t in [-2.0, -0.5, 0.0, 1.3, 3.0] {
            let w = |t: f64| AffineGroup.dual_action(AffineGroup.h_from_coord(t), &[1.0])[0];
            let deriv = (w(t + h) - w(t - h)) / (2.0 * h);
            let psi = AffineGroup.disintegration_weight(AffineGroup.h_from_coord(t)).unwrap();
            assert!((deriv.abs() - psi).abs() < 1e-8 * psi);
        }
    }

    #[test]
    fn heisenberg_lambda_sample() {
        let orbit = dual_orbit_model(&HeisenbergGroup);
        let band = FrequencyBand { half_width: vec![2.0, 4.0] };
        let s = orbit.sample(&band, &TransversalOptions::default()).unwrap();
        assert_eq!(s.len(), 64);
        // weights are |λ| times the cell; total ≈ ∫_{-4}^{4} |λ| dλ = 16 (exact for midpoints)
        let total: f64 = s.iter().map(|o| o.weight).sum();
        assert!((total - 16.0).abs() < 1e-12);
        assert!(s.iter().all(|o| o.base[0] == 0.0 && o.base[1] != 0.0));
    }

    #[test]
    fn model_names() {
        assert_eq!("axb".parse::<ModelKind>().unwrap(), ModelKind::Axb);
        assert_eq!("heisenberg".parse::<ModelKind>().unwrap(), ModelKind::Heisenberg);
        assert!("sl2".parse::<ModelKind>().is_err());
        assert_eq!(ModelKind::Heisenberg.model().dim_n(), 2);
    }
}
