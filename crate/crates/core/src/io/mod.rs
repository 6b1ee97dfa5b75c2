//! Text formats: game DSL, objectives, profiles and transducers, DOT, reports.

pub mod dot;
pub mod dsl;
pub mod profile;
pub mod report;
