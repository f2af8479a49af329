//! Group movement pattern mining and group-aware compression of location
//! updates in a clustered tracking sensor network.

pub mod bench;
pub mod cipher;
pub mod codec;
pub mod error;
pub mod merge;
pub mod mining;
pub mod num;
pub mod replace;
pub mod symbol;
pub mod world;

pub use error::{Error, Result};
pub use num::Real;
pub use symbol::{GroupId, ObjectId, Symbol, Token};

/// Pattern tree over `f64` probabilities.
pub type PatternTree = mining::PatternTree<f64>;
/// Pattern tree over `f32` probabilities.
pub type PatternTreeF32 = mining::PatternTree<f32>;
pub type GroupModel = codec::GroupModel<f64>;
pub type MiningParams = mining::MiningParams<f64>;
pub type PstParams = mining::PstParams<f64>;
