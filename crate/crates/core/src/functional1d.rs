//! The non-local energy `Λ_δ,p` and its local limit `Λ_0,p` in one dimension.
//!
//! For step functions everything is exact: the energy is a sum over pairs of
//! constancy cells whose values differ by more than `δ`, and each pair
//! contributes a closed-form double integral of the kernel
//! `δ^p |y - x|^(-1-p)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::QuadResult;
use crate::sum::CompensatedSum;
use crate::types::{Cell, ExtendedEnergy, Interval, PiecewiseAffine1D, StepFunction1D, TailMode};

/// Relative slack on the threshold `δ`: value differences up to
/// `δ (1 + THRESHOLD_SLACK)` count as equal to `δ` and do not interact.
pub const THRESHOLD_SLACK: f64 = 1e-12;

/// Relative breakpoint deviation under which a partition is treated as
/// uniform by the gap-aggregated evaluator.
pub const UNIFORM_TOLERANCE: f64 = 1e-10;

/// Threshold `δ` and exponent `p` of `Λ_δ,p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    delta: f64,
    p: f64,
}

impl EnergyParams {
    pub fn new(delta: f64, p: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::BadParameter(format!("delta must be positive, got {delta}")));
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::BadExponent(p));
        }
        Ok(Self { delta, p })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Whether two values interact, i.e. differ by more than `δ`.
    pub fn interacts(&self, a: f64, b: f64) -> bool {
        (a - b).abs() > self.delta * (1.0 + THRESHOLD_SLACK)
    }
}

/// `∬ δ^p |y-x|^(-1-p)` over `(0, l1) × (l1 + gap, l1 + gap + l2)`.
///
/// Lengths may be infinite; a zero gap diverges.
pub(crate) fn separated_pair_energy(gap: f64, l1: f64, l2: f64, delta: f64, p: f64) -> f64 {
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    let (l1_inf, l2_inf) = (l1.is_infinite(), l2.is_infinite());
    if p == 1.0 {
        // ln[(a2-a1)(b2-b1) / ((a2-b1)(b2-a1))] = ln(1 + l1 l2 / (g (g + l1 + l2)))
        let arg = match (l1_inf, l2_inf) {
            (true, true) => return f64::INFINITY,
            (true, false) => l2 / gap,
            (false, true) => l1 / gap,
            (false, false) => (l1 / gap) * (l2 / (gap + l1 + l2)),
        };
        return delta * arg.ln_1p();
    }
    // With F(t) = t^(1-p) the bracket is F(g) - F(g+l1) - F(g+l2) + F(g+l1+l2).
    // Writing phi(z) = (1+z)^(1-p) - 1, it equals g^(1-p) [phi(x+y) - phi(x) - phi(y)]
    // for x = l1/g, y = l2/g; phi(inf) = -1.
    let phi = |z: f64| {
        if z.is_infinite() {
            -1.0
        } else {
            ((1.0 - p) * z.ln_1p()).exp_m1()
        }
    };
    let x = l1 / gap;
    let y = l2 / gap;
    let bracket = phi(x + y) - phi(x) - phi(y);
    let scale = delta.powf(p) / (p * (p - 1.0));
    scale * gap.powf(1.0 - p) * bracket
}

/// Energy of the interaction between two cells with disjoint interiors.
pub fn pair_cell_energy(i1: &Interval, i2: &Interval, params: &EnergyParams) -> Result<ExtendedEnergy> {
    let (left, right) = if i1.lo() <= i2.lo() { (i1, i2) } else { (i2, i1) };
    if left.hi() > right.lo() {
        return Err(Error::OverlappingIntervals(i1.lo(), i1.hi(), i2.lo(), i2.hi()));
    }
    let gap = right.lo() - left.hi();
    Ok(ExtendedEnergy::from_value(separated_pair_energy(
        gap,
        left.length(),
        right.length(),
        params.delta,
        params.p,
    )))
}

fn cell_pair(a: &Cell, b: &Cell, params: &EnergyParams) -> f64 {
    separated_pair_energy(b.interval.lo() - a.interval.hi(), a.interval.length(), b.interval.length(), params.delta, params.p)
}

/// `Λ_δ,p(u, domain)` for a step function, exactly.
///
/// Returns `Infinite` iff two touching cells differ by more than `δ`.
/// Uniform partitions are evaluated by aggregating pairs with the same index
/// gap.
pub fn lambda_step_exact(u: &StepFunction1D, domain: &Interval, params: &EnergyParams) -> Result<ExtendedEnergy> {
    let cells = u.cells_in(domain)?;
    Ok(lambda_cells(&cells, params))
}

/// `Λ_δ,p` of the step function described by consecutive touching `cells`.
pub fn lambda_cells(cells: &[Cell], params: &EnergyParams) -> ExtendedEnergy {
    lambda_cells_by(cells, params, |a, b| params.interacts(a, b))
}

/// Like [`lambda_cells`] with an arbitrary symmetric interaction predicate on
/// cell values in place of `|a - b| > δ`.
pub fn lambda_cells_by<I>(cells: &[Cell], params: &EnergyParams, interacts: I) -> ExtendedEnergy
where
    I: Fn(f64, f64) -> bool + Sync,
{
    if cells.windows(2).any(|w| interacts(w[0].value, w[1].value)) {
        return ExtendedEnergy::Infinite;
    }
    let half = match UniformBlock::detect(cells) {
        Some(block) => block.half_energy(cells, params, &interacts),
        None => pairwise_half_energy(cells, params, &interacts),
    };
    ExtendedEnergy::from_value(2.0 * half)
}

/// Plain O(n^2) evaluation over unordered pairs, no fast path.
pub fn lambda_cells_direct(cells: &[Cell], params: &EnergyParams) -> ExtendedEnergy {
    if cells.windows(2).any(|w| params.interacts(w[0].value, w[1].value)) {
        return ExtendedEnergy::Infinite;
    }
    ExtendedEnergy::from_value(2.0 * pairwise_half_energy(cells, params, &|a, b| params.interacts(a, b)))
}

// Sum over unordered non-adjacent pairs. Rows are summed independently and
// combined in index order, so the result does not depend on scheduling.
fn pairwise_half_energy<I: Fn(f64, f64) -> bool + Sync>(cells: &[Cell], params: &EnergyParams, interacts: &I) -> f64 {
    let n = cells.len();
    let rows: Vec<CompensatedSum> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = CompensatedSum::new();
            for j in (i + 2)..n {
                if interacts(cells[i].value, cells[j].value) {
                    row.add(cell_pair(&cells[i], &cells[j], params));
                }
            }
            row
        })
        .collect();
    let mut total = CompensatedSum::new();
    for r in &rows {
        total.merge(r);
    }
    total.value()
}

/// Bounded cells `first..first+len` of equal width `h`, possibly flanked by
/// unbounded tails.
struct UniformBlock {
    first: usize,
    len: usize,
    width: f64,
}

impl UniformBlock {
    fn detect(cells: &[Cell]) -> Option<UniformBlock> {
        let first = usize::from(cells.first()?.interval.lo().is_infinite());
        let last = cells.len() - usize::from(cells.last()?.interval.hi().is_infinite());
        let len = last.checked_sub(first)?;
        if len < 16 {
            return None;
        }
        let x0 = cells[first].interval.lo();
        let xn = cells[last - 1].interval.hi();
        let width = (xn - x0) / len as f64;
        let uniform = cells[first..last]
            .iter()
            .enumerate()
            .all(|(i, c)| (c.interval.hi() - (x0 + width * (i + 1) as f64)).abs() <= UNIFORM_TOLERANCE * width);
        uniform.then_some(UniformBlock { first, len, width })
    }

    fn half_energy<I: Fn(f64, f64) -> bool + Sync>(&self, cells: &[Cell], params: &EnergyParams, interacts: &I) -> f64 {
        let block = &cells[self.first..self.first + self.len];
        let values: Vec<f64> = block.iter().map(|c| c.value).collect();
        let counts = gap_counts(&values, interacts);
        let mut total = CompensatedSum::new();
        for (m, &count) in counts.iter().enumerate().skip(2) {
            if count > 0 {
                let e = separated_pair_energy((m - 1) as f64 * self.width, self.width, self.width, params.delta, params.p);
                total.add(count as f64 * e);
            }
        }
        // Tails against everything else, exact geometry.
        let tails: Vec<usize> = (0..cells.len()).filter(|&i| i < self.first || i >= self.first + self.len).collect();
        for (ti, &t) in tails.iter().enumerate() {
            for (j, c) in cells.iter().enumerate() {
                let other_tail = tails[..ti].contains(&j);
                if j == t || other_tail || j + 1 == t || t + 1 == j {
                    continue;
                }
                if interacts(cells[t].value, c.value) {
                    let (a, b) = if t < j { (&cells[t], c) } else { (c, &cells[t]) };
                    total.add(cell_pair(a, b, params));
                }
            }
        }
        total.value()
    }
}

/// `counts[m]` = number of indices `i` with `values[i]` and `values[i+m]`
/// interacting.
fn gap_counts<I: Fn(f64, f64) -> bool + Sync>(values: &[f64], interacts: &I) -> Vec<u64> {
    let n = values.len();
    let nondecreasing = values.windows(2).all(|w| w[0] <= w[1]);
    let nonincreasing = values.windows(2).all(|w| w[0] >= w[1]);
    if nondecreasing || nonincreasing {
        let sorted: Vec<f64> = if nondecreasing { values.to_vec() } else { values.iter().rev().copied().collect() };
        // first[i] is nondecreasing in i; difference array over gaps.
        let mut diff = vec![0i64; n + 1];
        let mut j = 0;
        for i in 0..n {
            j = j.max(i + 1);
            while j < n && !interacts(sorted[i], sorted[j]) {
                j += 1;
            }
            if j < n {
                diff[j - i] += 1;
                diff[n - i] -= 1;
            }
        }
        let mut counts = vec![0u64; n];
        let mut run = 0i64;
        for m in 0..n {
            run += diff[m];
            counts[m] = run as u64;
        }
        return counts;
    }
    (0..n)
        .into_par_iter()
        .fold(
            || vec![0u64; n],
            |mut acc, i| {
                let vi = values[i];
                for (m, &vj) in values[i + 1..].iter().enumerate() {
                    if interacts(vi, vj) {
                        acc[m + 1] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Unordered index pairs of interacting cells of `u` restricted to `domain`.
pub fn interaction_pairs(u: &StepFunction1D, domain: &Interval, params: &EnergyParams) -> Result<Vec<(usize, usize)>> {
    let cells = u.cells_in(domain)?;
    let mut out = Vec::new();
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            if params.interacts(cells[i].value, cells[j].value) {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

/// Interaction energy between `left` and `right` (both orderings of the
/// pair), which must not overlap.
pub fn lambda_cross(u: &StepFunction1D, left: &Interval, right: &Interval, params: &EnergyParams) -> Result<ExtendedEnergy> {
    if left.hi() > right.lo() {
        return Err(Error::OverlappingIntervals(left.lo(), left.hi(), right.lo(), right.hi()));
    }
    let a = u.cells_in(left)?;
    let b = u.cells_in(right)?;
    let mut total = ExtendedEnergy::ZERO;
    for ca in &a {
        for cb in &b {
            if params.interacts(ca.value, cb.value) {
                total = total + ExtendedEnergy::from_value(2.0 * cell_pair(ca, cb, params));
            }
        }
    }
    Ok(total)
}

/// Refinement budget for [`lambda_quadrature`].
pub const QUADRATURE_MAX_CELLS: usize = 4_000_000;

#[derive(Clone, Copy)]
struct QCell {
    t0: f64,
    s0: f64,
    dt: f64,
    ds: f64,
    kids: [f64; 4],
    value: f64,
    error: f64,
}

const QUADRANTS: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];

impl PartialEq for QCell {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for QCell {}
impl PartialOrd for QCell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QCell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Numerical `Λ_δ,p(u, domain)` for an `L`-Lipschitz callable on a bounded
/// domain.
///
/// Only pairs with `|y - x| >= δ/L` can interact, so the integral runs over
/// `r = y - x` in `[δ/L, |domain|]` (both orderings via symmetry). The pair
/// region is mapped to a rectangle in `(t, ln r)` with `x = a + t (|domain| - r)`
/// and refined adaptively with a tensor Gauss rule; a cell's error estimate
/// is the difference between the rule on the cell and on its quadrants.
pub fn lambda_quadrature<F>(u: F, lipschitz: f64, domain: &Interval, params: &EnergyParams, tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    if !domain.is_bounded() {
        return Err(Error::DomainMismatch { lo: domain.lo(), hi: domain.hi() });
    }
    if !(tol > 0.0) || !(lipschitz >= 0.0) {
        return Err(Error::BadParameter("tolerance and Lipschitz bound must be positive".into()));
    }
    let (a, len) = (domain.lo(), domain.length());
    let (delta, p) = (params.delta, params.p);
    let r_min = if lipschitz == 0.0 { f64::INFINITY } else { delta / lipschitz };
    if r_min >= len {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    let (s_lo, s_hi) = (r_min.ln(), len.ln());
    let dp = delta.powf(p);
    let f = |t: f64, s: f64| {
        let r = s.exp();
        let span = len - r;
        if span <= 0.0 {
            return 0.0;
        }
        let x = a + t * span;
        if params.interacts(u(x + r), u(x)) {
            2.0 * dp * r.powf(-p) * span
        } else {
            0.0
        }
    };
    // 3x3 Gauss-Legendre on [0, 1]^2: interior nodes only, so the
    // measure-zero threshold on the cell boundary r = δ/L is never sampled.
    let g = (0.6f64).sqrt();
    let nodes = [0.5 * (1.0 - g), 0.5, 0.5 * (1.0 + g)];
    let weights = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    let rule = |t0: f64, s0: f64, dt: f64, ds: f64| -> f64 {
        let mut acc = 0.0;
        for (ti, wi) in nodes.iter().zip(&weights) {
            for (sj, wj) in nodes.iter().zip(&weights) {
                acc += wi * wj * f(t0 + ti * dt, s0 + sj * ds);
            }
        }
        acc * dt * ds
    };
    // A cell's value is the sum over its four quadrants; its error is the
    // change from the single-cell rule.
    let eval_cell = |t0: f64, s0: f64, dt: f64, ds: f64, whole: f64| -> QCell {
        let (hdt, hds) = (0.5 * dt, 0.5 * ds);
        let mut kids = [0.0; 4];
        for (k, (oi, oj)) in QUADRANTS.iter().enumerate() {
            kids[k] = rule(t0 + oi * hdt, s0 + oj * hds, hdt, hds);
        }
        let value = kids.iter().sum::<f64>();
        QCell { t0, s0, dt, ds, kids, value, error: (value - whole).abs() }
    };

    const SEED: usize = 64;
    let mut heap = BinaryHeap::with_capacity(SEED * SEED * 4);
    let (dt, ds) = (1.0 / SEED as f64, (s_hi - s_lo) / SEED as f64);
    let mut err_total = 0.0;
    for i in 0..SEED {
        for j in 0..SEED {
            let (t0, s0) = (i as f64 * dt, s_lo + j as f64 * ds);
            let c = eval_cell(t0, s0, dt, ds, rule(t0, s0, dt, ds));
            err_total += c.error;
            heap.push(c);
        }
    }
    while err_total > tol {
        if heap.len() + 3 > QUADRATURE_MAX_CELLS {
            return Err(Error::ToleranceNotReached { requested: tol, achieved: err_total });
        }
        let c = heap.pop().expect("non-empty");
        if c.error == 0.0 {
            heap.push(c);
            break;
        }
        err_total -= c.error;
        let (hdt, hds) = (0.5 * c.dt, 0.5 * c.ds);
        for (k, (oi, oj)) in QUADRANTS.iter().enumerate() {
            let child = eval_cell(c.t0 + oi * hdt, c.s0 + oj * hds, hdt, hds, c.kids[k]);
            err_total += child.error;
            heap.push(child);
        }
    }
    let value = heap.iter().map(|c| c.value).collect::<CompensatedSum>().value();
    let error = heap.iter().map(|c| c.error).sum();
    Ok(QuadResult { value, error })
}

/// The local energy `Λ_0,p(u, R)`: `∫|u'|^p` for `p > 1`, total variation
/// for `p = 1`.
pub trait LocalEnergy {
    fn lambda_zero(&self, p: f64) -> Result<f64>;

    /// Like [`LocalEnergy::lambda_zero`] but with `+inf` for functions
    /// outside `W^{1,p}`.
    fn lambda_zero_extended(&self, p: f64) -> Result<ExtendedEnergy>;
}

impl LocalEnergy for PiecewiseAffine1D {
    fn lambda_zero(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::BadExponent(p));
        }
        let mut total = CompensatedSum::new();
        for w in self.nodes().windows(2) {
            let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            total.add(if p == 1.0 { dy.abs() } else { (dy.abs() / dx).powf(p) * dx });
        }
        Ok(total.value())
    }

    fn lambda_zero_extended(&self, p: f64) -> Result<ExtendedEnergy> {
        self.lambda_zero(p).map(ExtendedEnergy::from_value)
    }
}

fn total_variation(u: &StepFunction1D) -> f64 {
    let v = u.values();
    let mut tv: CompensatedSum = v.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if u.tail_mode() == TailMode::CompactSupport {
        tv.add(v[0].abs());
        tv.add(v[v.len() - 1].abs());
    }
    tv.value()
}

impl LocalEnergy for StepFunction1D {
    fn lambda_zero(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::BadExponent(p));
        }
        if p > 1.0 {
            return Err(Error::UnsupportedCombination(p));
        }
        Ok(total_variation(self))
    }

    fn lambda_zero_extended(&self, p: f64) -> Result<ExtendedEnergy> {
        if !(p >= 1.0) {
            return Err(Error::BadExponent(p));
        }
        let tv = total_variation(self);
        if p > 1.0 {
            return Ok(if tv == 0.0 { ExtendedEnergy::ZERO } else { ExtendedEnergy::Infinite });
        }
        Ok(ExtendedEnergy::from_value(tv))
    }
}

/// Pointwise hostility `H_δ,p(x) = ∫_{|u(y)-u(x)|>δ} δ^p |y-x|^(-1-p) dy`
/// over the definition domain of `u`.
pub fn pointwise_hostility(u: &StepFunction1D, x: f64, params: &EnergyParams) -> Result<ExtendedEnergy> {
    if u.is_breakpoint(x) {
        return Err(Error::BreakpointQuery(x));
    }
    let ux = u.eval(x).ok_or(Error::DomainMismatch { lo: x, hi: x })?;
    let p = params.p;
    let scale = params.delta.powf(p) / p;
    // ∫_c^d (y - x)^(-1-p) dy for x <= c, in terms of distances.
    let tail = |near: f64, far: f64| {
        let far_term = if far.is_infinite() { 0.0 } else { far.powf(-p) };
        near.powf(-p) - far_term
    };
    let mut total = CompensatedSum::new();
    for c in u.cells() {
        if !params.interacts(c.value, ux) {
            continue;
        }
        let (lo, hi) = (c.interval.lo(), c.interval.hi());
        let part = if lo >= x { tail(lo - x, hi - x) } else { tail(x - hi, x - lo) };
        total.add(part);
    }
    Ok(ExtendedEnergy::from_value(scale * total.value()))
}

/// Energy `∫|v_k'|^p` of the piecewise-affine interpolant through samples on
/// a uniform grid of spacing `1/k`: `Σ |Δu|^p k^(p-1)`.
pub fn pwa_interpolation_energy(samples: &[(f64, f64)], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::BadExponent(p));
    }
    let h = uniform_spacing(samples)?;
    let k = 1.0 / h;
    Ok(samples.windows(2).map(|w| (w[1].1 - w[0].1).abs().powf(p)).collect::<CompensatedSum>().value() * k.powf(p - 1.0))
}

/// The interpolant itself.
pub fn pwa_interpolant(samples: &[(f64, f64)]) -> Result<PiecewiseAffine1D> {
    uniform_spacing(samples)?;
    PiecewiseAffine1D::new(samples.to_vec(), false)
}

fn uniform_spacing(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Empty { field: "samples" });
    }
    let x0 = samples[0].0;
    let h = (samples[samples.len() - 1].0 - x0) / (samples.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::NonUniformGrid { index: 1 });
    }
    for (i, s) in samples.iter().enumerate() {
        if (s.0 - (x0 + h * i as f64)).abs() > 1e-9 * h {
            return Err(Error::NonUniformGrid { index: i });
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn params(delta: f64, p: f64) -> EnergyParams {
        EnergyParams::new(delta, p).unwrap()
    }

    #[test]
    fn pair_energy_examples() {
        let e = pair_cell_energy(&iv(0.0, 1.0), &iv(2.0, 3.0), &params(1.0, 1.0)).unwrap();
        assert!((e.value() - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        let e = pair_cell_energy(&iv(0.0, 1.0), &iv(2.0, 3.0), &params(1.0, 2.0)).unwrap();
        assert!((e.value() - 1.0 / 6.0).abs() < 1e-15);
        let e = pair_cell_energy(&iv(0.0, 1.0), &iv(1.0, 2.0), &params(1.0, 1.0)).unwrap();
        assert_eq!(e, ExtendedEnergy::Infinite);
        let e = pair_cell_energy(&iv(0.0, 1.0), &iv(2.0, f64::INFINITY), &params(1.0, 2.0)).unwrap();
        assert!((e.value() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pair_energy_unbounded_limits() {
        let pr = params(1.0, 1.0);
        // ln((b2-b1)/(a2-b1)) for a1 = -inf
        let e = pair_cell_energy(&iv(f64::NEG_INFINITY, 0.0), &iv(1.0, 3.0), &pr).unwrap();
        assert!((e.value() - 3.0f64.ln()).abs() < 1e-15);
        let e = pair_cell_energy(&iv(f64::NEG_INFINITY, 0.0), &iv(1.0, f64::INFINITY), &pr).unwrap();
        assert_eq!(e, ExtendedEnergy::Infinite);
        let e = pair_cell_energy(&iv(f64::NEG_INFINITY, 0.0), &iv(2.0, f64::INFINITY), &params(1.0, 3.0)).unwrap();
        assert!((e.value() - 2.0f64.powi(-2) / 6.0).abs() < 1e-15);
    }

    #[test]
    fn overlapping_rejected_and_symmetric() {
        assert!(matches!(
            pair_cell_energy(&iv(0.0, 2.0), &iv(1.0, 3.0), &params(1.0, 1.0)),
            Err(Error::OverlappingIntervals(..))
        ));
        let a = pair_cell_energy(&iv(0.0, 0.3), &iv(1.1, 4.0), &params(0.7, 1.7)).unwrap();
        let b = pair_cell_energy(&iv(1.1, 4.0), &iv(0.0, 0.3), &params(0.7, 1.7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn staircase_of_three() {
        for delta in [0.1, 0.37, 2.0] {
            let u = StepFunction1D::uniform(0.0, 1.0, vec![0.0, delta, 2.0 * delta], TailMode::DomainOnly).unwrap();
            let e = lambda_step_exact(&u, &iv(0.0, 1.0), &params(delta, 2.0)).unwrap();
            assert!((e.value() - delta * delta).abs() < 1e-14 * delta * delta.max(1.0), "{e:?}");
        }
    }

    #[test]
    fn constant_and_divergent() {
        let c = StepFunction1D::uniform(0.0, 1.0, vec![5.0; 7], TailMode::DomainOnly).unwrap();
        assert_eq!(lambda_step_exact(&c, &iv(0.0, 1.0), &params(0.1, 1.5)).unwrap(), ExtendedEnergy::ZERO);
        let d = StepFunction1D::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.2], TailMode::DomainOnly).unwrap();
        assert_eq!(lambda_step_exact(&d, &iv(0.0, 2.0), &params(0.1, 1.0)).unwrap(), ExtendedEnergy::Infinite);
    }

    #[test]
    fn domain_must_fit() {
        let d = StepFunction1D::new(vec![0.0, 1.0], vec![0.0], TailMode::DomainOnly).unwrap();
        assert!(matches!(
            lambda_step_exact(&d, &Interval::real_line(), &params(0.1, 1.0)),
            Err(Error::DomainMismatch { .. })
        ));
    }

    #[test]
    fn threshold_is_strict() {
        let u = StepFunction1D::uniform(0.0, 3.0, vec![0.0, 0.5, 1.0], TailMode::DomainOnly).unwrap();
        // |1 - 0| = 2δ > δ interacts; equal-to-δ neighbours do not
        let e = lambda_step_exact(&u, &iv(0.0, 3.0), &params(0.5, 1.0)).unwrap();
        assert!(e.is_finite() && e.value() > 0.0);
        let e = lambda_step_exact(&u, &iv(0.0, 3.0), &params(1.0, 1.0)).unwrap();
        assert_eq!(e, ExtendedEnergy::ZERO);
    }

    #[test]
    fn uniform_fast_path_matches_direct() {
        let vals: Vec<f64> = (0..40).map(|i| ((i * 7) % 5) as f64 * 0.1 + (i / 10) as f64 * 0.1).collect();
        let mut smooth = vec![0.0];
        for i in 1..40 {
            let step = [0.0, 0.1, -0.1][(vals[i] * 10.0) as usize % 3];
            smooth.push(smooth[i - 1] + step);
        }
        for tail in [TailMode::DomainOnly, TailMode::CompactSupport] {
            let u = StepFunction1D::uniform(-1.0, 3.0, smooth.clone(), tail).unwrap();
            let pr = params(0.1, 1.3);
            let cells = u.cells();
            let fast = lambda_cells(&cells, &pr);
            let slow = lambda_cells_direct(&cells, &pr);
            assert_eq!(fast.is_finite(), slow.is_finite());
            if let (Some(f), Some(s)) = (fast.finite(), slow.finite()) {
                assert!((f - s).abs() <= 1e-12 * s.max(1e-300), "{f} vs {s}");
            }
        }
    }

    #[test]
    fn local_energies() {
        let tent = PiecewiseAffine1D::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)], true).unwrap();
        assert_eq!(tent.lambda_zero(2.0).unwrap(), 2.0);
        assert_eq!(tent.lambda_zero(1.0).unwrap(), 2.0);
        let s = StepFunction1D::uniform(0.0, 3.0, vec![0.0, 1.0, 0.0], TailMode::CompactSupport).unwrap();
        assert_eq!(s.lambda_zero(1.0).unwrap(), 2.0);
        assert_eq!(s.lambda_zero(2.0).unwrap_err(), Error::UnsupportedCombination(2.0));
        assert_eq!(s.lambda_zero_extended(2.0).unwrap(), ExtendedEnergy::Infinite);
        let bump = StepFunction1D::uniform(0.0, 1.0, vec![1.0], TailMode::CompactSupport).unwrap();
        assert_eq!(bump.lambda_zero(1.0).unwrap(), 2.0);
    }

    #[test]
    fn pointwise_hostility_examples() {
        let delta = 0.3;
        let u = StepFunction1D::new(vec![0.0, 1.0, 2.0], vec![0.0, 2.0 * delta], TailMode::DomainOnly).unwrap();
        let h = pointwise_hostility(&u, 0.5, &params(delta, 1.0)).unwrap();
        assert!((h.value() - 4.0 / 3.0 * delta).abs() < 1e-14);
        assert_eq!(pointwise_hostility(&u, 1.0, &params(delta, 1.0)).unwrap_err(), Error::BreakpointQuery(1.0));
        let c = StepFunction1D::uniform(0.0, 1.0, vec![2.0; 3], TailMode::CompactSupport).unwrap();
        assert_eq!(pointwise_hostility(&c, 0.5, &params(5.0, 1.0)).unwrap(), ExtendedEnergy::ZERO);
    }

    #[test]
    fn interpolation_energy() {
        let s: Vec<(f64, f64)> = (0..=4).map(|i| (i as f64 / 4.0, i as f64 / 4.0)).collect();
        assert!((pwa_interpolation_energy(&s, 2.0).unwrap() - 1.0).abs() < 1e-14);
        let s = [(0.0, 0.5), (0.5, 0.0), (1.0, 0.5)];
        assert!((pwa_interpolation_energy(&s, 2.0).unwrap() - 1.0).abs() < 1e-14);
        let bad = [(0.0, 0.0), (0.3, 0.0), (1.0, 0.0)];
        assert_eq!(pwa_interpolation_energy(&bad, 2.0).unwrap_err(), Error::NonUniformGrid { index: 1 });
    }

    #[test]
    fn quadrature_identity_ramp() {
        // Λ_{0.5,1}(x on (0,1)) = 2 * 0.5 * (1 - ln 2) by direct integration.
        let r = lambda_quadrature(|x| x, 1.0, &iv(0.0, 1.0), &params(0.5, 1.0), 1e-6).unwrap();
        assert!((r.value - (1.0 - 2f64.ln())).abs() < 1e-6, "{r:?}");
        let r = lambda_quadrature(|_| 3.0, 0.0, &iv(0.0, 1.0), &params(0.5, 1.0), 1e-6).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
