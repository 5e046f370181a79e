pub mod channels;
pub mod error;
pub mod field;
pub mod gates;
pub mod metrics;
pub mod noise;
pub mod operator;
pub mod udw;

pub use error::{Error, Result};
