//! Networks of agents running one-way quantum programs: measurement patterns,
//! communication events, and their operational and denotational semantics.

pub mod calculus;
pub mod dsl;
pub mod gen;
pub mod inputs;
pub mod library;
pub mod netmodel;
pub mod qnum;
pub mod report;
pub mod semantics;
