//! Certified 2-D cubature on rectangles.
//!
//! A one-parameter family of cubature rules `Q_lambda` on `[a,b] x [c,d]`
//! interpolates the midpoint-type (`lambda = 0`), Simpson-type
//! (`lambda = 1/3`) and trapezoid-type (`lambda = 1`) schemes. For functions
//! whose mixed partial `d2f/dxdy` has a coordinate-convex absolute value,
//! the rule's error is bounded a priori by closed-form expressions in the
//! four corner values of `|d2f/dxdy|`; the [`adaptive`] module turns those
//! bounds into per-panel certificates for rigorous integration.
//!
//! Modules:
//! - [`domain`]: validated value types (rectangles, rule parameters,
//!   exponent pairs, corner data)
//! - [`expr`]: expression parsing, evaluation and symbolic mixed partials
//! - [`quad`]: adaptive Gauss-Legendre reference integration
//! - [`cubature`]: the rule, its kernels and the identity residual
//! - [`bounds`]: the a-priori error bounds and their selector
//! - [`verify`]: coordinate-convexity checking and the Hadamard chain
//! - [`adaptive`]: certified adaptive integration
//! - [`cli`]: the command-line front end and its JSON report format
//!
//! The numeric core is generic over the scalar type via [`scalar::Scalar`];
//! the aliases below fix the common `f64` instantiation used by the CLI.

pub mod adaptive;
pub mod bounds;
pub mod cli;
pub mod cubature;
pub mod domain;
pub mod expr;
pub mod quad;
pub mod scalar;
pub mod verify;

/// Default scalar type of the command-line tool and tests.
pub type Real = f64;

pub type Rect = domain::Rectangle<Real>;
pub type Params = domain::RuleParams<Real>;
pub type Exponents = domain::HolderExponents<Real>;
pub type Corners = domain::CornerData<Real>;
pub type Model = expr::FunctionModel<Real>;
pub type Config = quad::QuadConfig<Real>;
pub type Bound = bounds::BoundReport<Real>;
pub type Certified = adaptive::CertifiedResult<Real>;
