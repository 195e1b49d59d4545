//! Exact cyclotomic divisibility, vanishing-sum bounds, set-of-large-values
//! constructions and Favard-length estimates for rational product Cantor sets.
//!
//! ```
//! use cyclofav::multiset::Multiset;
//! use cyclofav::cyclo::{divides_by_cuboids, divides_by_remainder};
//!
//! // 1 + ζ^10 + ζ^20 = 0 for a primitive 30th root of unity ζ.
//! let a = Multiset::fiber(30, 3, 0).unwrap();
//! assert!(divides_by_remainder(&a, 30));
//! assert!(divides_by_cuboids(&a, 30).unwrap());
//! ```

pub mod arith;
pub mod bounds;
pub mod constructions;
pub mod cyclo;
mod error;
pub mod favard;
pub mod multiset;
pub mod slv;
pub mod sums;

pub use arith::Rational;
pub use error::Error;
