//! Exhaustive property suites for the discrete rearrangement toolbox.

use nlg_core::rearrange::{
    brute_force_min_hostility, hostility_discrete, hostility_gap, monotone_rearrangement_discrete, reduction,
};
use nlg_core::rng::CounterStream;
use nlg_core::{DiscreteArrangement, EnemyList, HostilityWeights, Result};
use rayon::prelude::*;

const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// Nonincreasing with random drops and occasional plateaus.
    Random,
    /// Constant weights; every arrangement of a multiset ties in pairs counted.
    Flat,
}

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub n_max: usize,
    /// Arrangements use species labels `0..species`.
    pub species: i64,
    pub k: i64,
    pub trials: usize,
    pub seed: u64,
    pub weights: WeightKind,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FuzzReport {
    pub checked: u64,
    pub violations: u64,
}

impl std::ops::Add for FuzzReport {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { checked: self.checked + o.checked, violations: self.violations + o.violations }
    }
}

/// Random nonincreasing nonnegative weights `h(0), ..., h(n-1)`.
pub fn random_weights(rng: &mut CounterStream, n: usize) -> HostilityWeights {
    let mut h = Vec::with_capacity(n);
    let mut v = 1.0 + rng.next_f64();
    for _ in 0..n {
        h.push(v);
        let drop = if rng.next_f64() < 0.3 { 0.0 } else { 0.5 * rng.next_f64() };
        v = (v - drop).max(0.0);
    }
    HostilityWeights::new(h).expect("nonincreasing by construction")
}

/// All sequences of length `n` over `0..species`, in lexicographic order.
pub fn all_arrangements(n: usize, species: i64) -> impl Iterator<Item = Vec<i64>> {
    let s = species as u64;
    let total = s.pow(n as u32);
    (0..total).map(move |code| {
        let mut c = code;
        let mut out = vec![0; n];
        for slot in out.iter_mut().rev() {
            *slot = (c % s) as i64;
            c /= s;
        }
        out
    })
}

fn below(a: f64, b: f64) -> bool {
    a < b - REL_TOL * b.abs().max(1.0)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// For every arrangement `u`: `ℋ(u) ≥ ℋ(Mu)`, the gap formula matches
/// `ℋ(u) - ℋ(Ru)`, and for every multiset the brute-force minimum equals
/// `ℋ(Mu)`.
pub fn fuzz_rearrangement(cfg: &FuzzConfig) -> Result<FuzzReport> {
    let e = EnemyList::band_complement(cfg.k)?;
    let species = cfg.species.max(1);
    let jobs: Vec<(usize, usize)> = (1..=cfg.n_max).flat_map(|n| (0..cfg.trials).map(move |t| (n, t))).collect();
    let reports = jobs
        .par_iter()
        .map(|&(n, t)| {
            let h = match cfg.weights {
                WeightKind::Random => random_weights(&mut CounterStream::new(cfg.seed, (n * cfg.trials + t) as u64), n),
                WeightKind::Flat => HostilityWeights::new(vec![1.0; n])?,
            };
            check_instance(&h, &e, n, species)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reports.into_iter().fold(FuzzReport::default(), |a, b| a + b))
}

fn check_instance(h: &HostilityWeights, e: &EnemyList, n: usize, species: i64) -> Result<FuzzReport> {
    let mut r = FuzzReport::default();
    let mut tally = |ok: bool| {
        r.checked += 1;
        r.violations += u64::from(!ok);
    };
    for s in all_arrangements(n, species) {
        let u = DiscreteArrangement::new(s.clone())?;
        let mu = monotone_rearrangement_discrete(&u);
        let hu = hostility_discrete(h, e, &u)?;
        let hm = hostility_discrete(h, e, &mu)?;
        tally(!below(hu, hm));
        if n >= 2 {
            let (ru, _) = reduction(&u)?;
            let direct = hu - hostility_discrete(h, e, &ru)?;
            tally(close(hostility_gap(h, e, &u)?, direct));
        }
        if s.windows(2).all(|w| w[0] <= w[1]) {
            let (min, _) = brute_force_min_hostility(h, e, &s)?;
            tally(close(min, hm));
        }
    }
    Ok(r)
}
