//! Finite-window workbench for forcing constructions over computable
//! approximations: a register machine with oracle use, limit and jump
//! approximations, low-basis paths, coded models, and the COH, EM, D² and
//! RT² constructions with replayable transcripts.

pub mod approx;
pub mod catalog;
pub mod classes;
pub mod coloring;
pub mod forcing;
pub mod harness;
pub mod machine;
pub mod omega_model;
pub mod pairing;
