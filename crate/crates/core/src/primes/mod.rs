//! Sums of Kloosterman sums over primes.

pub mod eta;
pub mod hb;
pub mod sums;

pub use eta::{
    eta_case_certificate, eta_exponent, first_case_applies, predicted_exponent, EtaCertificate,
    ExponentTuple,
};
pub use hb::{hb_decompose, hb_lambda, hb_lambda_check, sigma_decomposition_check, HBTerm};
pub use sums::{prime_kloosterman_sharp, prime_kloosterman_smooth, SandwichWindow};
