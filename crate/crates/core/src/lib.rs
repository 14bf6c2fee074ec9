//! Exact and numerical evaluation of the non-local functionals `Λ_δ,p`,
//! their rearrangement toolbox, and the Gamma-limit constants.

pub mod constants;
pub mod error;
pub mod extrapolate;
pub mod functional1d;
pub mod multidim;
pub mod quad;
pub mod rearrange;
pub mod rng;
pub mod sum;
pub mod types;

pub use error::{Error, Result};
pub use functional1d::{EnergyParams, LocalEnergy};
pub use types::{
    Cell, DiscreteArrangement, DomainObject, EnemyList, ExtendedEnergy, HostilityWeights, Interval, PiecewiseAffine1D,
    StepFunction1D, SymmetricPairs, TailMode,
};
