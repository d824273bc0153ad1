//! Simulation and analysis toolkit for an electrovibration cloth display
//! worn over a thin insulating glove.
//!
//! - [`physics`]: electrostatic force model plus the current safety envelope.
//! - [`drivechain`]: the switched square wave on the cloth.
//! - [`device`]: line protocol and state machine of the simulated driver.
//! - [`experiment`]: randomized sessions over the condition grid with their
//!   questionnaire records.
//! - [`stats`]: Aligned Rank Transform with a two-way within-subject ANOVA.
//! - [`analysis`]: session files in, ANOVA report out.

pub mod analysis;
pub mod device;
pub mod drivechain;
pub mod experiment;
pub mod physics;
pub mod stats;
pub mod synthetic;
pub mod units;
