//! Half-integral weight cusp forms in the Kohnen plus space and the sieve
//! machinery used to study sign changes of their coefficients over almost
//! primes.
//!
//! The crate is organised in five layers:
//!
//! - [`qseries`]: exact truncated power series in `q` with big-integer
//!   coefficients, theta and Eisenstein generators and eta products.
//! - [`forms`]: construction of the weight 13/2 plus-space eigenform, Hecke
//!   operators `T(p^2)` and certification against the Shimura lift.
//! - [`sieve`]: least-prime-factor sieves, generalized von Mangoldt functions
//!   `Λ_r` (floating and exact symbolic), the generalized Vaughan identity and
//!   its dyadic decomposition, almost-prime enumeration.
//! - [`experiments`]: partial sums, exponent fits, sign-change counting,
//!   second moments and growth probes.
//! - [`lcentral`]: central values of quadratic twists of the Shimura lift via
//!   a smoothed approximate functional equation.

pub mod arith;
pub mod error;
pub mod experiments;
pub mod forms;
pub mod kahan;
pub mod lcentral;
pub mod qseries;
pub mod sieve;

pub use error::{Error, Result};
