//! Validated domain types shared by every evaluator, with their JSON forms.
//!
//! All values are immutable once built. Constructors check the invariants
//! and report the first offending index.

use std::collections::BTreeSet;
use std::fmt;
use std::num::NonZeroU32;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open interval `(lo, hi)` of the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY || lo >= hi {
            return Err(Error::BadInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn real_line() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    /// Whether `other` is a subset of `self`.
    pub fn covers(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Intersection, or `None` when it has empty interior.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }
}

/// Value of an energy: a nonnegative real or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedEnergy {
    Finite(f64),
    Infinite,
}

impl ExtendedEnergy {
    pub const ZERO: ExtendedEnergy = ExtendedEnergy::Finite(0.0);

    /// Wraps a computed value; overflow maps to `Infinite` and negative
    /// round-off residue to zero.
    pub fn from_value(v: f64) -> Self {
        if v.is_nan() {
            panic!("energy evaluated to NaN");
        }
        if v == f64::INFINITY {
            ExtendedEnergy::Infinite
        } else {
            ExtendedEnergy::Finite(v.max(0.0))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedEnergy::Finite(_))
    }

    /// The energy as an `f64`, with `Infinite` mapped to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match *self {
            ExtendedEnergy::Finite(v) => v,
            ExtendedEnergy::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedEnergy::Finite(v) => Some(v),
            ExtendedEnergy::Infinite => None,
        }
    }
}

impl Add for ExtendedEnergy {
    type Output = ExtendedEnergy;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedEnergy::Finite(a), ExtendedEnergy::Finite(b)) => ExtendedEnergy::from_value(a + b),
            _ => ExtendedEnergy::Infinite,
        }
    }
}

impl PartialOrd for ExtendedEnergy {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl fmt::Display for ExtendedEnergy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedEnergy::Finite(v) => write!(f, "{v}"),
            ExtendedEnergy::Infinite => f.write_str("inf"),
        }
    }
}

/// Behaviour of a step function outside `(x_0, x_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// Zero on `(-inf, x_0)` and `(x_n, +inf)`.
    CompactSupport,
    /// Undefined outside `(x_0, x_n)`.
    DomainOnly,
}

/// One constancy interval of a step function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub interval: Interval,
    pub value: f64,
}

/// Piecewise-constant function on a finite partition. Values at the
/// breakpoints are not represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepFunction", into = "RawStepFunction")]
pub struct StepFunction1D {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    tail_mode: TailMode,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    tail_mode: TailMode,
}

impl TryFrom<RawStepFunction> for StepFunction1D {
    type Error = Error;

    fn try_from(raw: RawStepFunction) -> Result<Self> {
        StepFunction1D::new(raw.breakpoints, raw.values, raw.tail_mode)
    }
}

impl From<StepFunction1D> for RawStepFunction {
    fn from(s: StepFunction1D) -> Self {
        RawStepFunction { breakpoints: s.breakpoints, values: s.values, tail_mode: s.tail_mode }
    }
}

fn check_finite(field: &'static str, xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { field, index }),
        None => Ok(()),
    }
}

fn check_increasing(xs: &[f64]) -> Result<()> {
    match xs.windows(2).position(|w| w[0] >= w[1]) {
        Some(i) => Err(Error::NonMonotoneBreakpoints { index: i + 1 }),
        None => Ok(()),
    }
}

impl StepFunction1D {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, tail_mode: TailMode) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty { field: "values" });
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::LengthMismatch { expected: values.len() + 1, got: breakpoints.len() });
        }
        check_finite("breakpoints", &breakpoints)?;
        check_finite("values", &values)?;
        check_increasing(&breakpoints)?;
        Ok(Self { breakpoints, values, tail_mode })
    }

    /// Step function on `n` equal cells covering `(lo, hi)`.
    pub fn uniform(lo: f64, hi: f64, values: Vec<f64>, tail_mode: TailMode) -> Result<Self> {
        let n = values.len();
        let h = (hi - lo) / n as f64;
        let mut bps: Vec<f64> = (0..=n).map(|i| lo + h * i as f64).collect();
        if let Some(last) = bps.last_mut() {
            *last = hi;
        }
        Self::new(bps, values, tail_mode)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail_mode(&self) -> TailMode {
        self.tail_mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(x_0, x_n)`.
    pub fn support(&self) -> Interval {
        Interval { lo: self.breakpoints[0], hi: *self.breakpoints.last().unwrap() }
    }

    /// Where the function is defined: the whole line for compact support.
    pub fn natural_domain(&self) -> Interval {
        match self.tail_mode {
            TailMode::CompactSupport => Interval::real_line(),
            TailMode::DomainOnly => self.support(),
        }
    }

    pub fn is_breakpoint(&self, x: f64) -> bool {
        self.breakpoints.binary_search_by(|b| b.total_cmp(&x)).is_ok()
    }

    /// Value at `x`; `None` at a breakpoint or outside the definition domain.
    pub fn eval(&self, x: f64) -> Option<f64> {
        match self.breakpoints.binary_search_by(|b| b.total_cmp(&x)) {
            Ok(_) => None,
            Err(0) => (self.tail_mode == TailMode::CompactSupport).then_some(0.0),
            Err(i) if i > self.values.len() => (self.tail_mode == TailMode::CompactSupport).then_some(0.0),
            Err(i) => Some(self.values[i - 1]),
        }
    }

    /// Constancy cells clipped to `domain`, left to right, including zero
    /// tails for compact support.
    pub fn cells_in(&self, domain: &Interval) -> Result<Vec<Cell>> {
        if !self.natural_domain().covers(domain) {
            return Err(Error::DomainMismatch { lo: domain.lo, hi: domain.hi });
        }
        let n = self.values.len();
        let mut out = Vec::with_capacity(n + 2);
        let mut push = |lo: f64, hi: f64, value: f64| {
            if let Some(interval) = (Interval { lo, hi }).intersect(domain) {
                out.push(Cell { interval, value });
            }
        };
        if self.tail_mode == TailMode::CompactSupport {
            push(f64::NEG_INFINITY, self.breakpoints[0], 0.0);
        }
        for i in 0..n {
            push(self.breakpoints[i], self.breakpoints[i + 1], self.values[i]);
        }
        if self.tail_mode == TailMode::CompactSupport {
            push(self.breakpoints[n], f64::INFINITY, 0.0);
        }
        Ok(out)
    }

    /// All cells on the natural domain.
    pub fn cells(&self) -> Vec<Cell> {
        self.cells_in(&self.natural_domain()).expect("natural domain is always admissible")
    }

    /// Same partition, values mapped through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            tail_mode: self.tail_mode,
        }
    }

    /// Merges neighbouring cells that carry the same value.
    pub fn merged(&self) -> Self {
        let mut bps = vec![self.breakpoints[0]];
        let mut vals: Vec<f64> = Vec::with_capacity(self.values.len());
        for (i, &v) in self.values.iter().enumerate() {
            if vals.last() == Some(&v) {
                *bps.last_mut().unwrap() = self.breakpoints[i + 1];
            } else {
                vals.push(v);
                bps.push(self.breakpoints[i + 1]);
            }
        }
        Self { breakpoints: bps, values: vals, tail_mode: self.tail_mode }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        from_json(raw)
    }
}

/// Continuous piecewise-affine function given by its nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewiseAffine", into = "RawPiecewiseAffine")]
pub struct PiecewiseAffine1D {
    nodes: Vec<(f64, f64)>,
    compact_support: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPiecewiseAffine {
    nodes: Vec<[f64; 2]>,
    compact_support: bool,
}

impl TryFrom<RawPiecewiseAffine> for PiecewiseAffine1D {
    type Error = Error;

    fn try_from(raw: RawPiecewiseAffine) -> Result<Self> {
        PiecewiseAffine1D::new(raw.nodes.into_iter().map(|[x, y]| (x, y)).collect(), raw.compact_support)
    }
}

impl From<PiecewiseAffine1D> for RawPiecewiseAffine {
    fn from(u: PiecewiseAffine1D) -> Self {
        RawPiecewiseAffine { nodes: u.nodes.into_iter().map(|(x, y)| [x, y]).collect(), compact_support: u.compact_support }
    }
}

impl PiecewiseAffine1D {
    pub fn new(nodes: Vec<(f64, f64)>, compact_support: bool) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Empty { field: "nodes" });
        }
        let xs: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        let ys: Vec<f64> = nodes.iter().map(|n| n.1).collect();
        check_finite("nodes.x", &xs)?;
        check_finite("nodes.y", &ys)?;
        check_increasing(&xs)?;
        if compact_support && (ys[0] != 0.0 || *ys.last().unwrap() != 0.0) {
            return Err(Error::NonZeroBoundary);
        }
        Ok(Self { nodes, compact_support })
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn compact_support(&self) -> bool {
        self.compact_support
    }

    /// `(x_first, x_last)`.
    pub fn support(&self) -> Interval {
        Interval { lo: self.nodes[0].0, hi: self.nodes.last().unwrap().0 }
    }

    pub fn natural_domain(&self) -> Interval {
        if self.compact_support {
            Interval::real_line()
        } else {
            self.support()
        }
    }

    pub fn slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
    }

    pub fn lipschitz(&self) -> f64 {
        self.slopes().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Evaluation with linear interpolation; `None` outside the domain of a
    /// non-compact function.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let (x0, xn) = (self.nodes[0].0, self.nodes.last().unwrap().0);
        if x < x0 || x > xn {
            return self.compact_support.then_some(0.0);
        }
        let i = self.nodes.partition_point(|n| n.0 <= x).clamp(1, self.nodes.len() - 1);
        let (a, b) = (self.nodes[i - 1], self.nodes[i]);
        let t = (x - a.0) / (b.0 - a.0);
        Some(a.1 + t * (b.1 - a.1))
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        from_json(raw)
    }
}

/// Species sequence `u(1), ..., u(n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawArrangement", into = "RawArrangement")]
pub struct DiscreteArrangement {
    species: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArrangement {
    species: Vec<i64>,
}

impl TryFrom<RawArrangement> for DiscreteArrangement {
    type Error = Error;

    fn try_from(raw: RawArrangement) -> Result<Self> {
        DiscreteArrangement::new(raw.species)
    }
}

impl From<DiscreteArrangement> for RawArrangement {
    fn from(u: DiscreteArrangement) -> Self {
        RawArrangement { species: u.species }
    }
}

impl DiscreteArrangement {
    pub fn new(species: Vec<i64>) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::Empty { field: "species" });
        }
        Ok(Self { species })
    }

    pub fn species(&self) -> &[i64] {
        &self.species
    }

    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        from_json(raw)
    }
}

/// Finite symmetric set of species pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricPairs(BTreeSet<(i64, i64)>);

impl SymmetricPairs {
    pub fn new(pairs: Vec<(i64, i64)>) -> Result<Self> {
        let set: BTreeSet<(i64, i64)> = pairs.iter().copied().collect();
        if let Some(index) = pairs.iter().position(|&(i, j)| !set.contains(&(j, i))) {
            return Err(Error::NonSymmetricEnemyList { index });
        }
        Ok(Self(set))
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        self.0.contains(&(i, j))
    }

    pub fn iter(&self) -> impl Iterator<Item = &(i64, i64)> {
        self.0.iter()
    }
}

/// Symmetric set of hostile species pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawEnemyList", into = "RawEnemyList")]
pub enum EnemyList {
    /// `{(i, j) : |j - i| >= k + 1}`.
    BandComplement(NonZeroU32),
    /// Complement of `{lo..=hi}^2`.
    BandSquareComplement { lo: i64, hi: i64 },
    /// `{lo..=hi}^2`.
    BandSquare { lo: i64, hi: i64 },
    Explicit(SymmetricPairs),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawEnemyList {
    BandComplement(i64),
    BandSquareComplement([i64; 2]),
    BandSquare([i64; 2]),
    Explicit(Vec<[i64; 2]>),
}

impl TryFrom<RawEnemyList> for EnemyList {
    type Error = Error;

    fn try_from(raw: RawEnemyList) -> Result<Self> {
        Ok(match raw {
            RawEnemyList::BandComplement(k) => EnemyList::band_complement(k)?,
            RawEnemyList::BandSquareComplement([lo, hi]) => EnemyList::BandSquareComplement { lo, hi },
            RawEnemyList::BandSquare([lo, hi]) => EnemyList::BandSquare { lo, hi },
            RawEnemyList::Explicit(pairs) => {
                EnemyList::Explicit(SymmetricPairs::new(pairs.into_iter().map(|[i, j]| (i, j)).collect())?)
            }
        })
    }
}

impl From<EnemyList> for RawEnemyList {
    fn from(e: EnemyList) -> Self {
        match e {
            EnemyList::BandComplement(k) => RawEnemyList::BandComplement(k.get() as i64),
            EnemyList::BandSquareComplement { lo, hi } => RawEnemyList::BandSquareComplement([lo, hi]),
            EnemyList::BandSquare { lo, hi } => RawEnemyList::BandSquare([lo, hi]),
            EnemyList::Explicit(p) => RawEnemyList::Explicit(p.iter().map(|&(i, j)| [i, j]).collect()),
        }
    }
}

impl EnemyList {
    /// `E_k` for a positive `k`.
    pub fn band_complement(k: i64) -> Result<Self> {
        u32::try_from(k)
            .ok()
            .and_then(NonZeroU32::new)
            .map(EnemyList::BandComplement)
            .ok_or(Error::BadBand(k))
    }

    pub fn explicit(pairs: Vec<(i64, i64)>) -> Result<Self> {
        Ok(EnemyList::Explicit(SymmetricPairs::new(pairs)?))
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        match self {
            EnemyList::BandComplement(k) => (j - i).unsigned_abs() > k.get() as u64,
            EnemyList::BandSquareComplement { lo, hi } => !((*lo..=*hi).contains(&i) && (*lo..=*hi).contains(&j)),
            EnemyList::BandSquare { lo, hi } => (*lo..=*hi).contains(&i) && (*lo..=*hi).contains(&j),
            EnemyList::Explicit(p) => p.contains(i, j),
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        from_json(raw)
    }
}

/// Nonincreasing discrete hostility `h(0), ..., h(n-1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeights", into = "RawWeights")]
pub struct HostilityWeights {
    h: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    h: Vec<f64>,
}

impl TryFrom<RawWeights> for HostilityWeights {
    type Error = Error;

    fn try_from(raw: RawWeights) -> Result<Self> {
        HostilityWeights::new(raw.h)
    }
}

impl From<HostilityWeights> for RawWeights {
    fn from(w: HostilityWeights) -> Self {
        RawWeights { h: w.h }
    }
}

impl HostilityWeights {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::Empty { field: "h" });
        }
        check_finite("h", &h)?;
        if let Some(i) = h.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::NonMonotoneWeights { index: i + 1 });
        }
        Ok(Self { h })
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.h
    }

    pub fn get(&self, gap: usize) -> Result<f64> {
        self.h.get(gap).copied().ok_or(Error::WeightsTooShort { needed: gap, available: self.h.len().saturating_sub(1) })
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        from_json(raw)
    }
}

/// Any of the serializable domain objects.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainObject {
    Step(StepFunction1D),
    PiecewiseAffine(PiecewiseAffine1D),
    Arrangement(DiscreteArrangement),
    Enemies(EnemyList),
    Weights(HostilityWeights),
}

/// Parses a JSON document, recognising the object kind by its keys, and
/// validates it.
pub fn validate_and_build(raw: &str) -> Result<DomainObject> {
    let value: serde_json::Value = serde_json::from_str(raw).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| Error::Parse("expected a JSON object".into()))?;
    let has = |k: &str| obj.contains_key(k);
    if has("breakpoints") {
        Ok(DomainObject::Step(build::<StepFunction1D>(value)?))
    } else if has("nodes") {
        Ok(DomainObject::PiecewiseAffine(build::<PiecewiseAffine1D>(value)?))
    } else if has("species") {
        Ok(DomainObject::Arrangement(build::<DiscreteArrangement>(value)?))
    } else if has("h") {
        Ok(DomainObject::Weights(build::<HostilityWeights>(value)?))
    } else if ["band_complement", "band_square", "band_square_complement", "explicit"].iter().any(|k| has(k)) {
        Ok(DomainObject::Enemies(build::<EnemyList>(value)?))
    } else {
        Err(Error::Parse("unrecognised object".into()))
    }
}

/// Links a validated type to its unchecked wire form.
trait Validated: Sized + Serialize {
    type Raw: serde::de::DeserializeOwned + TryInto<Self, Error = Error>;
}

impl Validated for StepFunction1D {
    type Raw = RawStepFunction;
}
impl Validated for PiecewiseAffine1D {
    type Raw = RawPiecewiseAffine;
}
impl Validated for DiscreteArrangement {
    type Raw = RawArrangement;
}
impl Validated for EnemyList {
    type Raw = RawEnemyList;
}
impl Validated for HostilityWeights {
    type Raw = RawWeights;
}

// Shape errors come from serde; invariant violations keep their structure.
fn build<T: Validated>(v: serde_json::Value) -> Result<T> {
    let raw: T::Raw = serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
    raw.try_into()
}

fn from_json<T: Validated>(raw: &str) -> Result<T> {
    let raw: T::Raw = serde_json::from_str(raw).map_err(|e| Error::Parse(e.to_string()))?;
    raw.try_into()
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("domain objects always serialize")
}
