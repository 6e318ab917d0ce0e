//! Kloosterman sums modulo primes and the experiments built on them: Fourier
//! and Voronoi transforms, Voronoi summation checks, bilinear and prime sums
//! with bound-ratio reports, and fourth moments of Dirichlet L-functions.

pub mod arith;
pub mod error;
pub mod weights;

pub use error::{Error, Result};
pub mod bilinear;
pub mod modforms;
pub mod moments;
pub mod primes;
pub mod report;
pub mod scans;
pub mod transforms;
