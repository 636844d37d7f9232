//! Exact set operations on finite product probability spaces: cylinder
//! sets, the classical disjoint-occurrence box, threshold-based lenient
//! boxes, cylindrical cores, and supporting verification oracles, plus a
//! floating-point continuum percolation module for Monte Carlo studies.

pub mod bitset;
pub mod boxalg;
pub mod error;
pub mod measure;
pub mod perc;
pub mod rational;
pub mod scenario;
pub mod space;
pub mod verify;

pub use bitset::BitSet;
pub use boxalg::{classical_box, core, cylinder_set, find_witness, BoxWitness};
pub use error::{BoxkitError, Result};
pub use measure::{
    cond_prob, eleven_box, ess_inf, inflate, st_box, st_box_complementary, thm21_sides,
    threshold_set, CondProbTable, RealFunction, ThresholdPair,
};
pub use rational::Rational;
pub use scenario::Scenario;
pub use space::{
    Alphabet, CylinderPattern, Event, OutcomeIndex, ProductSpace, SubsetMask, MAX_COORDINATES,
    MAX_OUTCOMES,
};
pub use verify::{
    check_bkr, check_core_bound, check_eleven, check_st_bounds, generate_instance,
    minimize_instance, oracle_core, oracle_st_box, InequalityReport, Instance, InstanceSpec,
    WeightProfile,
};
