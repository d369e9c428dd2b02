pub mod align;
pub mod channel;
pub mod corpus;
pub mod distance;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod lookup;
pub mod normalizer;
pub mod rules;
pub mod stemmer;
pub mod synthetic;

pub use error::{Error, Result};
