pub mod cloud_io;
pub mod config;
pub mod control;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod motion;
pub mod phantom;
pub mod reconstruction;
pub mod registration;
pub mod segmentation;
pub mod sweep;

pub use error::{Error, Result};
