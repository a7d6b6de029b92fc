//! Person-by-person dynamic programming for finite decentralized POMDPs with
//! `T`-step delayed sharing of observations and actions.
//!
//! The numeric core is generic over [`Scalar`] (`f64` or `f32`); the aliases
//! at the crate root fix it to `f64`.

pub mod beliefs;
pub mod check;
pub mod dp;
pub mod info;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod strategy;

pub use info::{History, InfoError, InfoPattern, InfoRealization, PrivateComponent, SharedHistory, SharedStage};
pub use model::{build_paper_example, build_scenario, ModelError, ScenarioId};
pub use scalar::Scalar;
pub use strategy::StrategyProfile;

pub type Problem = model::ProblemSpec<f64>;
pub type PrivatePosterior = beliefs::PrivatePosterior<f64>;
pub type ThetaPosterior = beliefs::ThetaPosterior<f64>;
pub type PiPosterior = beliefs::PiPosterior<f64>;


pub type ValueTable = dp::ValueTable<f64>;
pub type EquilibriumReport = dp::EquilibriumReport<f64>;
