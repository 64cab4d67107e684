//! Numerical laboratory for slow (polynomial) volume growth of homogeneous
//! Hamiltonian flows on cotangent bundles, polynomial growth of nilpotent
//! groups, and the homotopy invariant that bounds the former from below.

pub mod cli_report;
pub mod fit;
pub mod flow_models;
pub mod gamma_catalog;
pub mod group_growth;
pub mod volume_growth;
