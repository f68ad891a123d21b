#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytics;
pub mod calculus;
pub mod error;
pub mod fft;
pub mod grid;
pub mod integration;
pub mod levy;
pub mod process;
pub mod quad;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
