//! Segmentation, truncation and monotone rearrangement, together with the
//! discrete and semi-discrete hostility functionals and their brute-force
//! oracle.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functional1d::{lambda_cells_by, EnergyParams};
use crate::types::{DiscreteArrangement, EnemyList, ExtendedEnergy, HostilityWeights, Interval, PiecewiseAffine1D, StepFunction1D, TailMode};

/// Relative distance to the nearest integer under which `w / δ` is taken to
/// lie exactly on the grid `δℤ`.
pub const GRID_SNAP: f64 = 1e-9;

/// `floor(w / δ)`, with values within rounding distance of a grid point
/// snapped onto it (so `0.3 / 0.1` gives 3, not 2).
pub fn grid_level(w: f64, delta: f64) -> i64 {
    let q = w / delta;
    let r = q.round();
    if (q - r).abs() <= GRID_SNAP * r.abs().max(1.0) {
        r as i64
    } else {
        q.floor() as i64
    }
}

/// `S_δ w = δ floor(w / δ)`.
pub fn s_delta_value(w: f64, delta: f64) -> f64 {
    grid_level(w, delta) as f64 * delta
}

/// `S_δ` applied pointwise to a callable.
pub fn s_delta_fn<F: Fn(f64) -> f64>(u: F, delta: f64) -> impl Fn(f64) -> f64 {
    move |x| s_delta_value(u(x), delta)
}

/// `S_δ` of a step function: the same partition with segmented values.
pub fn s_delta_step(u: &StepFunction1D, delta: f64) -> StepFunction1D {
    u.map_values(|v| s_delta_value(v, delta))
}

/// Exact `S_δ u` of a piecewise-affine function.
///
/// Breakpoints are the nodes of `u` together with every solution of
/// `u(x) = kδ`; cells are not merged, so a node inside a level set stays a
/// breakpoint.
pub fn s_delta_pa(u: &PiecewiseAffine1D, delta: f64) -> Result<StepFunction1D> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::BadParameter(format!("delta must be positive, got {delta}")));
    }
    let nodes = u.nodes();
    let mut points = vec![nodes[0].0];
    for w in nodes.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 != y1 {
            let (lo, hi) = (y0.min(y1), y0.max(y1));
            let mut crossings: Vec<f64> = ((lo / delta).floor() as i64..=(hi / delta).ceil() as i64)
                .map(|k| k as f64 * delta)
                .filter(|&level| level > lo && level < hi)
                .map(|level| x0 + (level - y0) / (y1 - y0) * (x1 - x0))
                .collect();
            if y1 < y0 {
                crossings.reverse();
            }
            for t in crossings {
                if t > *points.last().unwrap() && t < x1 {
                    points.push(t);
                }
            }
        }
        points.push(x1);
    }
    let values = points
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            s_delta_value(u.eval(mid).expect("midpoint lies inside the nodes"), delta)
        })
        .collect();
    let tail = if u.compact_support() { TailMode::CompactSupport } else { TailMode::DomainOnly };
    StepFunction1D::new(points, values, tail)
}

/// `T_{A,B} u`: values clamped into `[a, b]`.
pub fn truncate(u: &StepFunction1D, a: f64, b: f64) -> Result<StepFunction1D> {
    if !(a <= b) {
        return Err(Error::BadBounds { lo: a, hi: b });
    }
    Ok(u.map_values(|v| v.clamp(a, b)))
}

/// Nondecreasing rearrangement `Mu` of an arrangement.
pub fn monotone_rearrangement_discrete(u: &DiscreteArrangement) -> DiscreteArrangement {
    let mut s = u.species().to_vec();
    s.sort_unstable();
    DiscreteArrangement::new(s).expect("sorting preserves length")
}

/// Nondecreasing rearrangement of `u` on a bounded domain: cells are sorted
/// stably by value and laid out left to right with their lengths, then equal
/// neighbours are merged.
pub fn monotone_rearrangement_step(u: &StepFunction1D, domain: &Interval) -> Result<StepFunction1D> {
    if !domain.is_bounded() {
        return Err(Error::DomainMismatch { lo: domain.lo(), hi: domain.hi() });
    }
    let mut cells = u.cells_in(domain)?;
    cells.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut bps = Vec::with_capacity(cells.len() + 1);
    let mut x = domain.lo();
    bps.push(x);
    for c in &cells {
        x += c.interval.length();
        bps.push(x);
    }
    *bps.last_mut().unwrap() = domain.hi();
    // Accumulated rounding may collapse a tiny cell; drop such cells.
    let mut keep_bps = vec![bps[0]];
    let mut keep_vals = Vec::with_capacity(cells.len());
    for (i, c) in cells.iter().enumerate() {
        if bps[i + 1] > *keep_bps.last().unwrap() {
            keep_bps.push(bps[i + 1]);
            keep_vals.push(c.value);
        }
    }
    Ok(StepFunction1D::new(keep_bps, keep_vals, TailMode::DomainOnly)?.merged())
}

/// Total hostility `ℋ(h, E, u) = Σ_{x <= y, (u(x), u(y)) ∈ E} h(y - x)`.
pub fn hostility_discrete(h: &HostilityWeights, e: &EnemyList, u: &DiscreteArrangement) -> Result<f64> {
    let n = u.len();
    if h.len() < n {
        return Err(Error::WeightsTooShort { needed: n - 1, available: h.len() - 1 });
    }
    Ok(hostility_unchecked(h.as_slice(), e, u.species()))
}

fn hostility_unchecked(h: &[f64], e: &EnemyList, s: &[i64]) -> f64 {
    let mut total = 0.0;
    for x in 0..s.len() {
        for y in x..s.len() {
            if e.contains(s[x], s[y]) {
                total += h[y - x];
            }
        }
    }
    total
}

/// Semi-discrete total hostility `ℱ(c, E_k, u/δ)` with
/// `c(σ) = δ^p σ^(-1-p)`, over both orderings of each pair.
///
/// For `k = 1` this is `Λ_δ,p(u, domain)`.
pub fn hostility_semidiscrete(u: &StepFunction1D, domain: &Interval, k: u32, params: &EnergyParams) -> Result<ExtendedEnergy> {
    if k == 0 {
        return Err(Error::BadBand(0));
    }
    let delta = params.delta();
    for (index, &v) in u.values().iter().enumerate() {
        let q = v / delta;
        if (q - q.round()).abs() > GRID_SNAP * q.round().abs().max(1.0) {
            return Err(Error::ValuesNotOnGrid { index, value: v });
        }
    }
    let levels = u.map_values(|v| (v / delta).round());
    let cells = levels.cells_in(domain)?;
    let reach = k as f64 + 0.5;
    Ok(lambda_cells_by(&cells, params, |a, b| (a - b).abs() > reach))
}

/// Removes the rightmost occurrence of the largest species. Returns the
/// shorter arrangement and the removed position, counted from 1.
pub fn reduction(u: &DiscreteArrangement) -> Result<(DiscreteArrangement, usize)> {
    let s = u.species();
    if s.len() < 2 {
        return Err(Error::TooShort(s.len()));
    }
    let m = rightmost_max(s);
    let mut rest = s.to_vec();
    rest.remove(m);
    Ok((DiscreteArrangement::new(rest)?, m + 1))
}

fn rightmost_max(s: &[i64]) -> usize {
    let mu = *s.iter().max().expect("non-empty");
    s.iter().rposition(|&v| v == mu).expect("maximum is attained")
}

/// Hostility gap `ℋ(u) - ℋ(Ru)` evaluated by the direct formula around the
/// removed position `m`.
pub fn hostility_gap(h: &HostilityWeights, e: &EnemyList, u: &DiscreteArrangement) -> Result<f64> {
    let s = u.species();
    let n = s.len();
    if n < 2 {
        return Err(Error::TooShort(n));
    }
    if h.len() < n {
        return Err(Error::WeightsTooShort { needed: n - 1, available: h.len() - 1 });
    }
    let h = h.as_slice();
    let m = rightmost_max(s);
    let mut gain = 0.0;
    for i in 0..n {
        if e.contains(s[i], s[m]) {
            gain += h[i.abs_diff(m)];
        }
    }
    let mut loss = 0.0;
    for i in 0..m {
        for j in m + 1..n {
            if e.contains(s[i], s[j]) {
                loss += h[j - i - 1] - h[j - i];
            }
        }
    }
    Ok(gain - loss)
}

/// Left-right gap `𝒢(L, R) = h(0) + Σ h(ℓ) + Σ h(r) - Σ_{L×R} [h(ℓ+r-1) - h(ℓ+r)]`.
pub fn left_right_gap(h: &HostilityWeights, left: &[usize], right: &[usize]) -> Result<f64> {
    if let Some(&z) = left.iter().chain(right).find(|&&v| v == 0) {
        return Err(Error::BadParameter(format!("left/right distances must be positive, got {z}")));
    }
    let mut total = h.get(0)?;
    for &l in left {
        total += h.get(l)?;
    }
    for &r in right {
        total += h.get(r)?;
    }
    for &l in left {
        for &r in right {
            total -= h.get(l + r - 1)? - h.get(l + r)?;
        }
    }
    Ok(total)
}

/// Upper limit on the number of distinct permutations enumerated by
/// [`brute_force_min_hostility`].
pub const MAX_PERMUTATIONS: u128 = 1_000_000;

/// Number of distinct permutations of a multiset, saturating at
/// `u128::MAX`.
pub fn distinct_permutations(multiset: &[i64]) -> u128 {
    let mut sorted = multiset.to_vec();
    sorted.sort_unstable();
    let mut count: u128 = 1;
    let mut placed: u128 = 0;
    let mut i = 0;
    while i < sorted.len() {
        let run = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        // multiply by C(placed + run, run) incrementally; each partial
        // product is itself a binomial coefficient, so division is exact
        for r in 1..=run as u128 {
            placed += 1;
            count = match count.checked_mul(placed) {
                Some(c) => c / r,
                None => return u128::MAX,
            };
        }
        i += run;
    }
    count
}

/// In-place lexicographic successor; `false` when `s` is the last
/// permutation.
fn next_permutation(s: &mut [i64]) -> bool {
    let Some(i) = s.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = s.iter().rposition(|&v| v > s[i]).expect("pivot has a successor");
    s.swap(i, j);
    s[i + 1..].reverse();
    true
}

/// Exact minimum of `ℋ(h, E, ·)` over all distinct permutations of
/// `multiset`, with the lexicographically first minimiser.
pub fn brute_force_min_hostility(
    h: &HostilityWeights,
    e: &EnemyList,
    multiset: &[i64],
) -> Result<(f64, DiscreteArrangement)> {
    if multiset.is_empty() {
        return Err(Error::Empty { field: "multiset" });
    }
    let count = distinct_permutations(multiset);
    if count > MAX_PERMUTATIONS {
        return Err(Error::TooManyPermutations { count, limit: MAX_PERMUTATIONS });
    }
    let n = multiset.len();
    if h.len() < n {
        return Err(Error::WeightsTooShort { needed: n - 1, available: h.len() - 1 });
    }
    let mut sorted = multiset.to_vec();
    sorted.sort_unstable();
    let mut firsts = sorted.clone();
    firsts.dedup();
    // One branch per distinct leading species; branches are independent and
    // combined in lexicographic order.
    let best = firsts
        .par_iter()
        .map(|&first| {
            let mut rest = sorted.clone();
            let pos = rest.iter().position(|&v| v == first).unwrap();
            rest.remove(pos);
            let mut perm = Vec::with_capacity(n);
            let mut best: Option<(f64, Vec<i64>)> = None;
            loop {
                perm.clear();
                perm.push(first);
                perm.extend_from_slice(&rest);
                let v = hostility_unchecked(h.as_slice(), e, &perm);
                if best.as_ref().map_or(true, |(b, _)| v < *b) {
                    best = Some((v, perm.clone()));
                }
                if !next_permutation(&mut rest) {
                    break;
                }
            }
            best.expect("at least one permutation")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("non-empty multiset");
    Ok((best.0, DiscreteArrangement::new(best.1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional1d::lambda_step_exact;

    fn arr(s: &[i64]) -> DiscreteArrangement {
        DiscreteArrangement::new(s.to_vec()).unwrap()
    }

    fn w(h: &[f64]) -> HostilityWeights {
        HostilityWeights::new(h.to_vec()).unwrap()
    }

    #[test]
    fn segmentation_values() {
        assert_eq!(s_delta_value(2.5, 1.0), 2.0);
        assert_eq!(s_delta_value(-0.3, 1.0), -1.0);
        assert_eq!(grid_level(0.3, 0.1), 3);
        assert_eq!(grid_level(-0.3, 0.1), -3);
        assert_eq!(grid_level(0.29, 0.1), 2);
    }

    #[test]
    fn tent_segmentation() {
        let tent = PiecewiseAffine1D::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)], true).unwrap();
        let delta = 1.0 / 3.0;
        let s = s_delta_pa(&tent, delta).unwrap();
        let levels: Vec<i64> = s.values().iter().map(|v| (v / delta).round() as i64).collect();
        assert_eq!(levels, vec![0, 1, 2, 2, 1, 0]);
        let expect = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 4.0 / 3.0, 5.0 / 3.0, 2.0];
        for (a, b) in s.breakpoints().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(s.tail_mode(), TailMode::CompactSupport);
    }

    #[test]
    fn truncation() {
        let u = StepFunction1D::uniform(0.0, 3.0, vec![-1.0, 0.5, 2.0], TailMode::DomainOnly).unwrap();
        assert_eq!(truncate(&u, 0.0, 1.0).unwrap().values(), &[0.0, 0.5, 1.0]);
        assert_eq!(truncate(&u, -1.0, 2.0).unwrap(), u);
        assert_eq!(truncate(&u, 1.0, 0.0).unwrap_err(), Error::BadBounds { lo: 1.0, hi: 0.0 });
    }

    #[test]
    fn discrete_rearrangement() {
        assert_eq!(monotone_rearrangement_discrete(&arr(&[3, 1, 2])).species(), &[1, 2, 3]);
        assert_eq!(monotone_rearrangement_discrete(&arr(&[2, 1, 2, 0])).species(), &[0, 1, 2, 2]);
    }

    #[test]
    fn step_rearrangement() {
        let u = StepFunction1D::new(vec![0.0, 0.3, 1.0], vec![1.0, 0.0], TailMode::DomainOnly).unwrap();
        let m = monotone_rearrangement_step(&u, &Interval::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(m.values(), &[0.0, 1.0]);
        assert!((m.breakpoints()[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn hostility_examples() {
        let e1 = EnemyList::band_complement(1).unwrap();
        assert_eq!(hostility_discrete(&w(&[1.0, 0.5]), &e1, &arr(&[0, 2])).unwrap(), 0.5);
        let h3 = w(&[1.0, 0.5, 1.0 / 3.0]);
        assert_eq!(hostility_discrete(&h3, &e1, &arr(&[0, 2, 0])).unwrap(), 1.0);
        assert_eq!(hostility_discrete(&h3, &e1, &arr(&[2, 0, 1])).unwrap(), 0.5);
        assert_eq!(hostility_discrete(&h3, &e1, &arr(&[0, 1, 2])).unwrap(), 1.0 / 3.0);
        assert!(matches!(hostility_discrete(&w(&[1.0]), &e1, &arr(&[0, 2])), Err(Error::WeightsTooShort { .. })));
    }

    #[test]
    fn reduction_examples() {
        let (r, m) = reduction(&arr(&[1, 3, 2, 3])).unwrap();
        assert_eq!((r.species(), m), (&[1, 3, 2][..], 4));
        assert_eq!(reduction(&arr(&[5])).unwrap_err(), Error::TooShort(1));
    }

    #[test]
    fn gap_two_positions() {
        let h = w(&[1.0, 0.25]);
        let e = EnemyList::BandSquareComplement { lo: 0, hi: 0 };
        // (0, 3) and (3, 3) both hostile
        assert_eq!(hostility_gap(&h, &e, &arr(&[0, 3])).unwrap(), 1.0 + 0.25);
        let e1 = EnemyList::band_complement(1).unwrap();
        assert_eq!(hostility_gap(&h, &e1, &arr(&[0, 3])).unwrap(), 0.25);
        assert_eq!(hostility_gap(&h, &e1, &arr(&[2, 2])).unwrap(), 0.0);
    }

    #[test]
    fn left_right_examples() {
        let h = w(&[1.0, 0.5, 1.0 / 3.0]);
        assert_eq!(left_right_gap(&h, &[], &[]).unwrap(), 1.0);
        assert!((left_right_gap(&h, &[1], &[1]).unwrap() - 11.0 / 6.0).abs() < 1e-15);
        assert!(matches!(left_right_gap(&h, &[3], &[]), Err(Error::WeightsTooShort { .. })));
    }

    #[test]
    fn permutation_counting() {
        assert_eq!(distinct_permutations(&[0, 1, 2]), 6);
        assert_eq!(distinct_permutations(&[1, 1, 2, 2]), 6);
        assert_eq!(distinct_permutations(&[7]), 1);
        let big: Vec<i64> = (0..12).collect();
        assert_eq!(distinct_permutations(&big), 479_001_600);
        let e = EnemyList::band_complement(1).unwrap();
        let h = w(&vec![1.0; 12]);
        assert!(matches!(brute_force_min_hostility(&h, &e, &big), Err(Error::TooManyPermutations { .. })));
    }

    #[test]
    fn brute_force_example() {
        let e = EnemyList::band_complement(1).unwrap();
        let (v, wit) = brute_force_min_hostility(&w(&[1.0, 0.5, 1.0 / 3.0]), &e, &[2, 0, 1]).unwrap();
        assert_eq!(v, 1.0 / 3.0);
        assert_eq!(wit.species(), &[0, 1, 2]);
        let (v, wit) = brute_force_min_hostility(&w(&[2.0]), &EnemyList::BandSquare { lo: 0, hi: 5 }, &[4]).unwrap();
        assert_eq!((v, wit.species()), (2.0, &[4][..]));
    }

    #[test]
    fn semidiscrete_two_levels() {
        let delta = 0.25;
        let pr = EnergyParams::new(delta, 2.0).unwrap();
        let u = StepFunction1D::uniform(0.0, 3.0, vec![0.0, 0.0, 3.0 * delta], TailMode::DomainOnly).unwrap();
        let dom = Interval::new(0.0, 3.0).unwrap();
        assert_eq!(hostility_semidiscrete(&u, &dom, 2, &pr).unwrap(), ExtendedEnergy::Infinite);
        let v = StepFunction1D::uniform(0.0, 3.0, vec![0.0, delta, 3.0 * delta], TailMode::DomainOnly).unwrap();
        let got = hostility_semidiscrete(&v, &dom, 2, &pr).unwrap().value();
        let pair = crate::functional1d::pair_cell_energy(
            &Interval::new(0.0, 1.0).unwrap(),
            &Interval::new(2.0, 3.0).unwrap(),
            &pr,
        )
        .unwrap()
        .value();
        assert!((got - 2.0 * pair).abs() < 1e-15);
        let k1 = hostility_semidiscrete(&v, &dom, 1, &pr).unwrap();
        assert_eq!(k1, lambda_step_exact(&v, &dom, &pr).unwrap());
        let off = StepFunction1D::uniform(0.0, 1.0, vec![0.1], TailMode::DomainOnly).unwrap();
        assert!(matches!(
            hostility_semidiscrete(&off, &Interval::new(0.0, 1.0).unwrap(), 1, &pr),
            Err(Error::ValuesNotOnGrid { index: 0, .. })
        ));
    }
}
