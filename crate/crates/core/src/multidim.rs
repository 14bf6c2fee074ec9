//! Energies in dimension `d` from one-dimensional sections and from direct
//! Monte Carlo sampling of the pair integral.
//!
//! Both estimators act on the segmented field `S_δ u`: sections of a
//! segmented field are exact step functions, so the inner one-dimensional
//! energies carry no discretisation error.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::constants::{ball_volume, sphere_area};
use crate::error::{Error, Result};
use crate::functional1d::{lambda_step_exact, EnergyParams};
use crate::quad::{gauss_legendre, integrate, QuadConfig, QuadResult};
use crate::rearrange::s_delta_value;
use crate::rng::CounterStream;
use crate::sum::CompensatedSum;
use crate::types::{ExtendedEnergy, Interval, StepFunction1D, TailMode};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_vec(field: &'static str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { field, index }),
        None => Ok(()),
    }
}

/// Catalogue of fields on `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    /// `offset + ⟨gradient, x⟩` on the box `[lo, hi]`, undefined outside.
    AffineRamp { gradient: Vec<f64>, offset: f64, lo: Vec<f64>, hi: Vec<f64> },
    /// `peak · max(0, 1 - |x - center| / radius)`.
    RadialTent { center: Vec<f64>, radius: f64, peak: f64 },
    /// `peak · Π_i max(0, 1 - |x_i - center_i| / half_widths_i)`.
    TensorTent { center: Vec<f64>, half_widths: Vec<f64>, peak: f64 },
}

impl ScalarField {
    pub fn affine_ramp(gradient: Vec<f64>, offset: f64, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_vec("gradient", &gradient)?;
        check_vec("lo", &lo)?;
        check_vec("hi", &hi)?;
        if gradient.is_empty() {
            return Err(Error::BadDimension(0));
        }
        if lo.len() != gradient.len() || hi.len() != gradient.len() {
            return Err(Error::LengthMismatch { expected: gradient.len(), got: lo.len().min(hi.len()) });
        }
        if let Some(i) = (0..lo.len()).find(|&i| lo[i] >= hi[i]) {
            return Err(Error::BadInterval { lo: lo[i], hi: hi[i] });
        }
        if !offset.is_finite() {
            return Err(Error::NonFinite { field: "offset", index: 0 });
        }
        Ok(ScalarField::AffineRamp { gradient, offset, lo, hi })
    }

    pub fn radial_tent(center: Vec<f64>, radius: f64, peak: f64) -> Result<Self> {
        check_vec("center", &center)?;
        if center.is_empty() {
            return Err(Error::BadDimension(0));
        }
        if !(radius.is_finite() && radius > 0.0 && peak.is_finite() && peak > 0.0) {
            return Err(Error::BadParameter("radius and peak must be positive".into()));
        }
        Ok(ScalarField::RadialTent { center, radius, peak })
    }

    pub fn tensor_tent(center: Vec<f64>, half_widths: Vec<f64>, peak: f64) -> Result<Self> {
        check_vec("center", &center)?;
        check_vec("half_widths", &half_widths)?;
        if center.is_empty() {
            return Err(Error::BadDimension(0));
        }
        if half_widths.len() != center.len() {
            return Err(Error::LengthMismatch { expected: center.len(), got: half_widths.len() });
        }
        if half_widths.iter().any(|&w| w <= 0.0) || !(peak.is_finite() && peak > 0.0) {
            return Err(Error::BadParameter("half widths and peak must be positive".into()));
        }
        Ok(ScalarField::TensorTent { center, half_widths, peak })
    }

    pub fn dim(&self) -> usize {
        match self {
            ScalarField::AffineRamp { gradient, .. } => gradient.len(),
            ScalarField::RadialTent { center, .. } | ScalarField::TensorTent { center, .. } => center.len(),
        }
    }

    /// Whether the field is zero outside its bounding box (as opposed to
    /// undefined there).
    pub fn compact_support(&self) -> bool {
        !matches!(self, ScalarField::AffineRamp { .. })
    }

    /// Value at `x`. For the ramp, points outside the box are evaluated by
    /// the affine formula; callers restrict to the box.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::AffineRamp { gradient, offset, .. } => offset + dot(gradient, x),
            ScalarField::RadialTent { center, radius, peak } => {
                let r = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                peak * (1.0 - r / radius).max(0.0)
            }
            ScalarField::TensorTent { center, half_widths, peak } => {
                let mut v = *peak;
                for i in 0..center.len() {
                    v *= (1.0 - (x[i] - center[i]).abs() / half_widths[i]).max(0.0);
                }
                v
            }
        }
    }

    /// `S_δ u (x)`.
    pub fn eval_segmented(&self, x: &[f64], delta: f64) -> f64 {
        s_delta_value(self.eval(x), delta)
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            ScalarField::AffineRamp { gradient, .. } => norm(gradient),
            ScalarField::RadialTent { radius, peak, .. } => peak / radius,
            ScalarField::TensorTent { half_widths, peak, .. } => {
                peak * half_widths.iter().map(|w| w.powi(-2)).sum::<f64>().sqrt()
            }
        }
    }

    /// Axis-aligned box containing the support (or the definition domain of
    /// the ramp).
    pub fn bounding_box(&self) -> SamplingBox {
        let (lo, hi): (Vec<f64>, Vec<f64>) = match self {
            ScalarField::AffineRamp { lo, hi, .. } => (lo.clone(), hi.clone()),
            ScalarField::RadialTent { center, radius, .. } => {
                (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
            ScalarField::TensorTent { center, half_widths, .. } => (
                center.iter().zip(half_widths).map(|(c, w)| c - w).collect(),
                center.iter().zip(half_widths).map(|(c, w)| c + w).collect(),
            ),
        };
        SamplingBox::axis_aligned(&lo, &hi).expect("field boxes are non-degenerate")
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d == self.dim() {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.dim(), got: d })
        }
    }

    /// `x ↦ u(origin(z) + σ x)` as an exact piecewise description.
    pub fn section(&self, dir: &Direction, z: &[f64]) -> Result<Section> {
        self.check_dim(dir.dim())?;
        if z.len() + 1 != dir.dim() {
            return Err(Error::LengthMismatch { expected: dir.dim() - 1, got: z.len() });
        }
        let origin = dir.point(z, 0.0);
        let sigma = dir.sigma();
        let pieces = match self {
            ScalarField::AffineRamp { gradient, offset, lo, hi } => {
                let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
                for i in 0..origin.len() {
                    if sigma[i] == 0.0 {
                        if origin[i] <= lo[i] || origin[i] >= hi[i] {
                            t1 = t0;
                        }
                    } else {
                        let a = (lo[i] - origin[i]) / sigma[i];
                        let b = (hi[i] - origin[i]) / sigma[i];
                        t0 = t0.max(a.min(b));
                        t1 = t1.min(a.max(b));
                    }
                }
                if t0 < t1 {
                    let c0 = offset + dot(gradient, &origin);
                    vec![Piece::Poly { lo: t0, hi: t1, coef: [c0, dot(gradient, sigma), 0.0] }]
                } else {
                    Vec::new()
                }
            }
            ScalarField::RadialTent { center, radius, peak } => {
                let rel: Vec<f64> = center.iter().zip(&origin).map(|(c, o)| c - o).collect();
                let t0 = dot(&rel, sigma);
                let rho2 = (dot(&rel, &rel) - t0 * t0).max(0.0);
                if rho2 >= radius * radius {
                    Vec::new()
                } else {
                    let w = (radius * radius - rho2).sqrt();
                    let arc = |lo, hi| Piece::Arc { lo, hi, t0, rho2, radius: *radius, peak: *peak };
                    vec![arc(t0 - w, t0), arc(t0, t0 + w)]
                }
            }
            ScalarField::TensorTent { center, half_widths, peak } => {
                if center.len() != 2 {
                    return Err(Error::UnsupportedDimension(center.len()));
                }
                tensor_pieces(center, half_widths, *peak, &origin, sigma)
            }
        };
        Ok(Section { pieces, lipschitz: self.lipschitz(), compact_support: self.compact_support() })
    }

    /// `Λ_0,p(u, ℝ^d) = ∫|∇u|^p`.
    pub fn lambda_zero(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::BadExponent(p));
        }
        let d = self.dim();
        match self {
            ScalarField::AffineRamp { gradient, lo, hi, .. } => {
                let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
                Ok(norm(gradient).powf(p) * vol)
            }
            ScalarField::RadialTent { radius, peak, .. } => {
                Ok((peak / radius).powf(p) * ball_volume(d)? * radius.powi(d as i32))
            }
            ScalarField::TensorTent { half_widths, peak, .. } => {
                if d != 2 {
                    return Err(Error::UnsupportedDimension(d));
                }
                // On each quadrant, in s = |x - c| / w ∈ [0,1]^2:
                // |∇u|^2 = peak^2 [(1 - s2)^2 / w1^2 + (1 - s1)^2 / w2^2].
                let (w1, w2) = (half_widths[0], half_widths[1]);
                let (nodes, weights) = gauss_legendre(64);
                let mut total = CompensatedSum::new();
                for (a, wa) in nodes.iter().zip(&weights) {
                    let s1 = 0.5 * (a + 1.0);
                    for (b, wb) in nodes.iter().zip(&weights) {
                        let s2 = 0.5 * (b + 1.0);
                        let g2 = ((1.0 - s2) / w1).powi(2) + ((1.0 - s1) / w2).powi(2);
                        total.add(0.25 * wa * wb * (peak * peak * g2).powf(0.5 * p));
                    }
                }
                Ok(4.0 * w1 * w2 * total.value())
            }
        }
    }
}

fn tensor_pieces(center: &[f64], w: &[f64], peak: f64, origin: &[f64], sigma: &[f64]) -> Vec<Piece> {
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut kinks = Vec::new();
    for i in 0..2 {
        if sigma[i] == 0.0 {
            if (origin[i] - center[i]).abs() >= w[i] {
                return Vec::new();
            }
        } else {
            let a = (center[i] - w[i] - origin[i]) / sigma[i];
            let b = (center[i] + w[i] - origin[i]) / sigma[i];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
            kinks.push((center[i] - origin[i]) / sigma[i]);
        }
    }
    if !(t0 < t1) {
        return Vec::new();
    }
    let mut cuts = vec![t0];
    kinks.sort_by(f64::total_cmp);
    cuts.extend(kinks.into_iter().filter(|&k| k > t0 && k < t1));
    cuts.push(t1);
    let mut pieces = Vec::new();
    for c in cuts.windows(2) {
        let mid = 0.5 * (c[0] + c[1]);
        // Each factor is affine on the piece: α + β t.
        let mut coef = [peak, 0.0, 0.0];
        for i in 0..2 {
            let x = origin[i] + mid * sigma[i];
            let sign = if x >= center[i] { -1.0 } else { 1.0 };
            let alpha = 1.0 + sign * (origin[i] - center[i]) / w[i];
            let beta = sign * sigma[i] / w[i];
            coef = [coef[0] * alpha, coef[0] * beta + coef[1] * alpha, coef[1] * beta + coef[2] * alpha];
        }
        let vertex = if coef[2] != 0.0 { -coef[1] / (2.0 * coef[2]) } else { f64::NAN };
        if vertex > c[0] && vertex < c[1] {
            pieces.push(Piece::Poly { lo: c[0], hi: vertex, coef });
            pieces.push(Piece::Poly { lo: vertex, hi: c[1], coef });
        } else {
            pieces.push(Piece::Poly { lo: c[0], hi: c[1], coef });
        }
    }
    pieces
}

/// Monotone piece of a section.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    /// `c0 + c1 t + c2 t^2`.
    Poly { lo: f64, hi: f64, coef: [f64; 3] },
    /// `peak (1 - sqrt(rho2 + (t - t0)^2) / radius)`.
    Arc { lo: f64, hi: f64, t0: f64, rho2: f64, radius: f64, peak: f64 },
}

impl Piece {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            Piece::Poly { lo, hi, .. } | Piece::Arc { lo, hi, .. } => (lo, hi),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        match *self {
            Piece::Poly { coef, .. } => coef[0] + t * (coef[1] + t * coef[2]),
            Piece::Arc { t0, rho2, radius, peak, .. } => {
                peak * (1.0 - (rho2 + (t - t0) * (t - t0)).sqrt() / radius).max(0.0)
            }
        }
    }

    fn slope(&self, t: f64) -> f64 {
        match *self {
            Piece::Poly { coef, .. } => coef[1] + 2.0 * coef[2] * t,
            Piece::Arc { t0, rho2, radius, peak, .. } => {
                let s = t - t0;
                let r = (rho2 + s * s).sqrt();
                if r == 0.0 {
                    0.0
                } else {
                    -peak / radius * s / r
                }
            }
        }
    }

    /// The solution of `u(t) = level` strictly inside the piece, if any.
    fn solve(&self, level: f64) -> Option<f64> {
        let (lo, hi) = self.bounds();
        let (a, b) = (self.eval(lo) - level, self.eval(hi) - level);
        if !(a * b < 0.0) {
            return None;
        }
        let t = match *self {
            Piece::Poly { coef, .. } => {
                let [c0, c1, c2] = [coef[0] - level, coef[1], coef[2]];
                if c2 == 0.0 {
                    -c0 / c1
                } else {
                    let disc = (c1 * c1 - 4.0 * c2 * c0).max(0.0).sqrt();
                    let q = -0.5 * (c1 + c1.signum() * disc);
                    let r1 = q / c2;
                    let r2 = if q != 0.0 { c0 / q } else { r1 };
                    if (lo..=hi).contains(&r1) {
                        r1
                    } else {
                        r2
                    }
                }
            }
            Piece::Arc { t0, rho2, radius, peak, .. } => {
                let r = radius * (1.0 - level / peak);
                let s = (r * r - rho2).max(0.0).sqrt();
                if (t0 - s - 0.5 * (lo + hi)).abs() < (t0 + s - 0.5 * (lo + hi)).abs() {
                    t0 - s
                } else {
                    t0 + s
                }
            }
        };
        Some(t.clamp(lo, hi))
    }
}

/// One-dimensional section of a field along a line.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pieces: Vec<Piece>,
    lipschitz: f64,
    compact_support: bool,
}

impl Section {
    /// `false` when the line misses the support (or the domain).
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Where the section is non-trivial: the support for compactly
    /// supported fields, the definition interval otherwise.
    pub fn span(&self) -> Option<Interval> {
        let lo = self.pieces.first()?.bounds().0;
        let hi = self.pieces.last()?.bounds().1;
        Interval::new(lo, hi).ok()
    }

    /// Value at `t`; zero outside the span for compact fields, `None` outside
    /// the domain otherwise.
    pub fn eval(&self, t: f64) -> Option<f64> {
        match self.pieces.iter().find(|p| (p.bounds().0..=p.bounds().1).contains(&t)) {
            Some(p) => Some(p.eval(t)),
            None => self.compact_support.then_some(0.0),
        }
    }

    /// Exact `S_δ` of the section. `None` for an empty section.
    pub fn segmented(&self, delta: f64) -> Option<StepFunction1D> {
        if self.pieces.is_empty() {
            return None;
        }
        let mut points = vec![self.pieces[0].bounds().0];
        let mut owners = Vec::new();
        for (idx, p) in self.pieces.iter().enumerate() {
            let (lo, hi) = p.bounds();
            let (va, vb) = (p.eval(lo), p.eval(hi));
            let (vmin, vmax) = (va.min(vb), va.max(vb));
            let mut roots: Vec<f64> = ((vmin / delta).floor() as i64..=(vmax / delta).ceil() as i64)
                .map(|k| k as f64 * delta)
                .filter(|&l| l > vmin && l < vmax)
                .filter_map(|l| p.solve(l))
                .collect();
            roots.sort_by(f64::total_cmp);
            roots.push(hi);
            for t in roots {
                if t > *points.last().unwrap() {
                    points.push(t);
                    owners.push(idx);
                }
            }
        }
        let values: Vec<f64> = points
            .windows(2)
            .zip(&owners)
            .map(|(w, &idx)| s_delta_value(self.pieces[idx].eval(0.5 * (w[0] + w[1])), delta))
            .collect();
        let tail = if self.compact_support { TailMode::CompactSupport } else { TailMode::DomainOnly };
        StepFunction1D::new(points, values, tail).ok().map(|s| s.merged())
    }

    /// `Λ_δ,p` of the segmented section over its natural domain.
    pub fn segmented_energy(&self, params: &EnergyParams) -> Result<ExtendedEnergy> {
        match self.segmented(params.delta()) {
            None => Ok(ExtendedEnergy::ZERO),
            Some(s) => lambda_step_exact(&s, &s.natural_domain(), params),
        }
    }

    /// `Λ_0,p` of the section: total variation for `p = 1`, otherwise
    /// `∫|u'|^p` by adaptive quadrature on curved pieces.
    pub fn lambda_zero(&self, p: f64) -> Result<f64> {
        let mut total = CompensatedSum::new();
        for piece in &self.pieces {
            let (lo, hi) = piece.bounds();
            if p == 1.0 {
                total.add((piece.eval(hi) - piece.eval(lo)).abs());
                continue;
            }
            match *piece {
                Piece::Poly { coef, .. } if coef[2] == 0.0 => total.add(coef[1].abs().powf(p) * (hi - lo)),
                _ => {
                    let cfg = QuadConfig { abs_tol: 1e-13, rel_tol: 1e-11, ..QuadConfig::default() };
                    total.add(integrate(|t| piece.slope(t).abs().powf(p), lo, hi, cfg)?.value);
                }
            }
        }
        Ok(total.value())
    }
}

/// Unit direction `σ` with an orthonormal frame of `⟨σ⟩^⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    sigma: Vec<f64>,
    frame: Vec<Vec<f64>>,
}

impl Direction {
    /// Normalises `v` and completes it to an orthonormal basis by
    /// Gram-Schmidt against the coordinate axes.
    pub fn new(v: &[f64]) -> Result<Self> {
        check_vec("direction", v)?;
        let n = norm(v);
        if v.is_empty() || n == 0.0 {
            return Err(Error::BadParameter("direction must be a non-zero vector".into()));
        }
        let sigma: Vec<f64> = v.iter().map(|x| x / n).collect();
        let d = sigma.len();
        let mut basis = vec![sigma.clone()];
        // Axes in order of least alignment with σ, for conditioning.
        let mut axes: Vec<usize> = (0..d).collect();
        axes.sort_by(|&a, &b| sigma[a].abs().total_cmp(&sigma[b].abs()));
        for &axis in &axes {
            if basis.len() == d {
                break;
            }
            let mut e = vec![0.0; d];
            e[axis] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&e, b);
                    e.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let n = norm(&e);
            if n > 1e-8 {
                basis.push(e.into_iter().map(|x| x / n).collect());
            }
        }
        let frame = basis.split_off(1);
        Ok(Self { sigma, frame })
    }

    /// `(cos θ, sin θ)` with frame `(-sin θ, cos θ)`.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { sigma: vec![c, s], frame: vec![vec![-s, c]] }
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    /// `Σ z_i f_i + t σ`.
    pub fn point(&self, z: &[f64], t: f64) -> Vec<f64> {
        let mut x: Vec<f64> = self.sigma.iter().map(|s| s * t).collect();
        for (zi, f) in z.iter().zip(&self.frame) {
            x.iter_mut().zip(f).for_each(|(a, b)| *a += zi * b);
        }
        x
    }
}

/// Possibly rotated box `center + Σ s_i a_i axes_i`, `s ∈ [-1, 1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingBox {
    center: Vec<f64>,
    half_widths: Vec<f64>,
    axes: Vec<Vec<f64>>,
}

impl SamplingBox {
    pub fn axis_aligned(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::DegenerateBox);
        }
        if lo.iter().zip(hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::DegenerateBox);
        }
        let d = lo.len();
        let axes = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect();
        Ok(Self {
            center: lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            half_widths: lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect(),
            axes,
        })
    }

    /// Planar box rotated by `theta` about its centre.
    pub fn rotated_2d(center: [f64; 2], half_widths: [f64; 2], theta: f64) -> Result<Self> {
        if half_widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::DegenerateBox);
        }
        let (s, c) = theta.sin_cos();
        Ok(Self { center: center.to_vec(), half_widths: half_widths.to_vec(), axes: vec![vec![c, s], vec![-s, c]] })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn volume(&self) -> f64 {
        self.half_widths.iter().map(|w| 2.0 * w).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let rel: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        self.axes.iter().zip(&self.half_widths).all(|(a, w)| dot(&rel, a).abs() <= *w)
    }

    /// Uniform point from the next `d` draws of `stream`.
    pub fn sample(&self, stream: &mut CounterStream) -> Vec<f64> {
        let mut x = self.center.clone();
        for (a, w) in self.axes.iter().zip(&self.half_widths) {
            let s = (2.0 * stream.next_f64() - 1.0) * w;
            x.iter_mut().zip(a).for_each(|(xi, ai)| *xi += s * ai);
        }
        x
    }

    fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                let mut x = self.center.clone();
                for (i, (a, w)) in self.axes.iter().zip(&self.half_widths).enumerate() {
                    let s = if mask >> i & 1 == 1 { *w } else { -w };
                    x.iter_mut().zip(a).for_each(|(xi, ai)| *xi += s * ai);
                }
                x
            })
            .collect()
    }
}

/// `∫_{S^1} ∫_{⟨σ⟩^⊥} Λ_0,p(u_{σ,z}) dz dσ` in the plane: midpoint rule in
/// the angle, adaptive quadrature in the offset.
pub fn lambda_zero_sectioning(u: &ScalarField, p: f64, n_dirs: usize) -> Result<QuadResult> {
    if u.dim() != 2 {
        return Err(Error::UnsupportedDimension(u.dim()));
    }
    if n_dirs == 0 {
        return Err(Error::BadParameter("need at least one direction".into()));
    }
    let bbox = u.bounding_box();
    let cfg = QuadConfig { abs_tol: 1e-10, rel_tol: 1e-8, max_segments: 50_000 };
    let per_dir: Vec<Result<QuadResult>> = (0..n_dirs)
        .into_par_iter()
        .map(|j| {
            let dir = Direction::from_angle((j as f64 + 0.5) * 2.0 * PI / n_dirs as f64);
            let (zlo, zhi) = offset_range(&bbox, &dir);
            let f = |z: f64| dir_section_l0(u, &dir, z, p);
            integrate(f, zlo, zhi, cfg)
        })
        .collect();
    let mut value = CompensatedSum::new();
    let mut error = 0.0;
    let w = 2.0 * PI / n_dirs as f64;
    for r in per_dir {
        let r = r?;
        value.add(w * r.value);
        error += w * r.error;
    }
    Ok(QuadResult { value: value.value(), error })
}

fn dir_section_l0(u: &ScalarField, dir: &Direction, z: f64, p: f64) -> f64 {
    u.section(dir, &[z]).and_then(|s| s.lambda_zero(p)).unwrap_or(f64::NAN)
}

fn offset_range(bbox: &SamplingBox, dir: &Direction) -> (f64, f64) {
    let f = &dir.frame()[0];
    bbox.corners().iter().map(|c| dot(c, f)).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

/// A numerical estimate with an error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Quadrature error estimate or Monte Carlo standard error.
    pub error: f64,
}

/// `Λ_δ,p(S_δ u, ℝ^2) = (1/2) ∫_{S^1} ∫_{⟨σ⟩^⊥} Λ_δ,p((S_δ u)_{σ,z}) dz dσ`.
///
/// Each inner energy is exact. The outer integrals use the midpoint rule
/// with `n_dirs` angles and `n_offsets` offsets across the bounding box; the
/// error estimate is the change when either count is halved.
pub fn lambda_ddim_sectioning(u: &ScalarField, params: &EnergyParams, n_dirs: usize, n_offsets: usize) -> Result<Estimate> {
    if u.dim() != 2 {
        return Err(Error::UnsupportedDimension(u.dim()));
    }
    if n_dirs < 2 || n_offsets < 2 {
        return Err(Error::BadParameter("need at least two directions and two offsets".into()));
    }
    let fine = sectioning_rule(u, params, n_dirs, n_offsets)?;
    let coarse_z = sectioning_rule(u, params, n_dirs, n_offsets / 2)?;
    let coarse_dir = sectioning_rule(u, params, n_dirs / 2, n_offsets)?;
    Ok(Estimate { value: fine, error: (fine - coarse_z).abs() + (fine - coarse_dir).abs() })
}

fn sectioning_rule(u: &ScalarField, params: &EnergyParams, n_dirs: usize, n_offsets: usize) -> Result<f64> {
    let bbox = u.bounding_box();
    let per_dir: Vec<Result<f64>> = (0..n_dirs)
        .into_par_iter()
        .map(|j| {
            let dir = Direction::from_angle((j as f64 + 0.5) * 2.0 * PI / n_dirs as f64);
            let (zlo, zhi) = offset_range(&bbox, &dir);
            let h = (zhi - zlo) / n_offsets as f64;
            let mut acc = CompensatedSum::new();
            for i in 0..n_offsets {
                let z = zlo + (i as f64 + 0.5) * h;
                let e = u.section(&dir, &[z])?.segmented_energy(params)?;
                let v = e.finite().ok_or_else(|| Error::BadParameter("segmented section has infinite energy".into()))?;
                acc.add(v);
            }
            Ok(h * acc.value())
        })
        .collect();
    let mut total = CompensatedSum::new();
    for r in per_dir {
        total.add(r?);
    }
    Ok(0.5 * (2.0 * PI / n_dirs as f64) * total.value())
}

/// Controls for [`lambda_ddim_montecarlo`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub n_samples: u64,
    pub seed: u64,
    /// Sample `S_δ u` instead of `u`.
    pub segmented: bool,
    /// Defaults to the field's bounding box.
    pub sampling_box: Option<SamplingBox>,
}

const MC_CHUNK: u64 = 1 << 16;

/// Monte Carlo estimate of `Λ_δ,p(u, ℝ^d)` (or of the field's domain for the
/// ramp), `d ∈ {2, 3}`.
///
/// Sample `i` draws `x` uniformly in the sampling box, a uniform direction
/// `σ`, and `r ≥ δ/L` with density `∝ r^(-1-p)`; then `y = x + r σ`. Pairs
/// closer than `δ/L` never interact. For compactly supported fields a pair
/// with `y` outside the box stands for both orderings and is counted twice.
/// Each sample uses its own counter stream, so the result does not depend on
/// the thread count.
pub fn lambda_ddim_montecarlo(u: &ScalarField, params: &EnergyParams, cfg: &MonteCarloConfig) -> Result<Estimate> {
    let d = u.dim();
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let bbox = cfg.sampling_box.clone().unwrap_or_else(|| u.bounding_box());
    if bbox.dim() != d {
        return Err(Error::LengthMismatch { expected: d, got: bbox.dim() });
    }
    if cfg.n_samples < 2 {
        return Err(Error::BadParameter("need at least two samples".into()));
    }
    let (delta, p) = (params.delta(), params.p());
    let lip = u.lipschitz();
    if lip == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let r0 = delta / lip;
    let scale = bbox.volume() * sphere_area(d)? * delta.powf(p) * r0.powf(-p) / p;
    let value_at = |x: &[f64]| if cfg.segmented { u.eval_segmented(x, delta) } else { u.eval(x) };
    let compact = u.compact_support();
    let n = cfg.n_samples;
    let chunks = n.div_ceil(MC_CHUNK);
    // Sample weights are 0, 1 or 2, so integer tallies are exact.
    let (s1, s2) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (mut s1, mut s2) = (0u64, 0u64);
            for i in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(n) {
                let mut rng = CounterStream::new(cfg.seed, i);
                let x = bbox.sample(&mut rng);
                let mut sigma: Vec<f64> = (0..d).map(|_| rng.next_normal()).collect();
                let len = norm(&sigma);
                sigma.iter_mut().for_each(|s| *s /= len);
                let r = r0 * rng.next_open_f64().powf(-1.0 / p);
                let y: Vec<f64> = x.iter().zip(&sigma).map(|(a, s)| a + r * s).collect();
                let inside = bbox.contains(&y);
                let w = if !inside && !compact {
                    0
                } else if params.interacts(value_at(&x), value_at(&y)) {
                    if inside {
                        1
                    } else {
                        2
                    }
                } else {
                    0
                };
                s1 += w;
                s2 += w * w;
            }
            (s1, s2)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = n as f64;
    let mean = s1 as f64 / nf;
    let var = (s2 as f64 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok(Estimate { value: scale * mean, error: scale * (var / nf).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> ScalarField {
        ScalarField::radial_tent(vec![0.0, 0.0], 1.0, 1.0).unwrap()
    }

    #[test]
    fn frames_are_orthonormal() {
        for v in [vec![1.0, 2.0, -0.5], vec![0.0, 0.0, 3.0], vec![0.3, -0.4]] {
            let dir = Direction::new(&v).unwrap();
            let mut all = vec![dir.sigma().to_vec()];
            all.extend(dir.frame().iter().cloned());
            for i in 0..all.len() {
                for j in 0..all.len() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(&all[i], &all[j]) - e).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn ramp_section_slope() {
        let u = ScalarField::affine_ramp(vec![3.0, 4.0], 0.5, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let dir = Direction::from_angle(0.3);
        let s = u.section(&dir, &[0.2]).unwrap();
        let span = s.span().unwrap();
        let (a, b) = (span.lo() + 0.1 * span.length(), span.lo() + 0.6 * span.length());
        let slope = (s.eval(b).unwrap() - s.eval(a).unwrap()) / (b - a);
        assert!((slope - dot(&[3.0, 4.0], dir.sigma())).abs() < 1e-12);
        assert!((u.lambda_zero(1.0).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn tent_section_through_center() {
        let s = tent().section(&Direction::from_angle(1.1), &[0.0]).unwrap();
        assert!((s.eval(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((s.eval(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(s.eval(1.5), Some(0.0));
        assert!((tent().lambda_zero(2.0).unwrap() - PI).abs() < 1e-14);
        assert!(tent().section(&Direction::from_angle(0.0), &[1.2]).unwrap().is_empty());
    }

    #[test]
    fn segmented_sections_match_pointwise_floor() {
        let fields = [
            tent(),
            ScalarField::tensor_tent(vec![0.1, -0.2], vec![0.8, 1.3], 1.7).unwrap(),
            ScalarField::affine_ramp(vec![1.0, -2.0], 0.1, vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(),
        ];
        for u in &fields {
            for (k, theta) in [0.0, 0.7, 2.0, 4.4].iter().enumerate() {
                let dir = Direction::from_angle(*theta);
                let z = [0.13 * k as f64 - 0.2];
                let s = u.section(&dir, &z).unwrap();
                let step = s.segmented(0.15).unwrap();
                let span = s.span().unwrap();
                for i in 0..1000 {
                    let t = span.lo() - 0.1 + (span.length() + 0.2) * (i as f64 + 0.37) / 1000.0;
                    let Some(got) = step.eval(t) else { continue };
                    let want = u.eval_segmented(&dir.point(&z, t), 0.15);
                    if (got - want).abs() > 1e-12 {
                        // Only tolerated within rounding distance of a crossing.
                        let near = step.breakpoints().iter().any(|b| (b - t).abs() < 1e-9);
                        assert!(near, "{u:?} θ={theta} t={t}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn montecarlo_trivial_cases() {
        let flat = ScalarField::affine_ramp(vec![0.0, 0.0], 1.0, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let cfg = MonteCarloConfig { n_samples: 1000, seed: 1, segmented: true, sampling_box: None };
        let pr = EnergyParams::new(0.2, 2.0).unwrap();
        assert_eq!(lambda_ddim_montecarlo(&flat, &pr, &cfg).unwrap(), Estimate { value: 0.0, error: 0.0 });
        let small = ScalarField::radial_tent(vec![0.0, 0.0], 1.0, 0.1).unwrap();
        let pr = EnergyParams::new(0.3, 2.0).unwrap();
        assert_eq!(lambda_ddim_montecarlo(&small, &pr, &cfg).unwrap().value, 0.0);
        let e = lambda_ddim_sectioning(&small, &pr, 8, 16).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn montecarlo_is_reproducible() {
        let cfg = MonteCarloConfig { n_samples: 200_000, seed: 42, segmented: true, sampling_box: None };
        let pr = EnergyParams::new(0.25, 1.5).unwrap();
        let a = lambda_ddim_montecarlo(&tent(), &pr, &cfg).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| lambda_ddim_montecarlo(&tent(), &pr, &cfg).unwrap());
        assert_eq!(a, b);
    }
}
