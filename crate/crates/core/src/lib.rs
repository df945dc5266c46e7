//! Instantiation of abstract, configuration-independent functional tests
//! into executable tests for a concrete installation, plus a reference
//! interlocking simulator to run them against.

pub mod config;
pub mod coverage;
pub mod instantiate;
pub mod ixl;
pub mod mutation;
pub mod predicate;
pub mod runtime;
pub mod suite;
