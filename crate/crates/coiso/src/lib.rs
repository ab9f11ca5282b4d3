//! Exact exterior calculus over polynomial charts and the coisotropic
//! thickening of degenerate geometric structures.
//!
//! Layers, bottom up: [`expr`] (rational polynomials and the expression
//! grammar), [`exterior`] (forms and fields), [`pointwise`] (exact linear
//! algebra on one tangent space), [`structures`] (the eight structure kinds),
//! [`aps`] (almost-product projectors), [`thicken`] and [`moser`].

pub mod expr;
pub mod exterior;
pub mod pointwise;
pub mod structures;
pub mod aps;
pub mod thicken;
pub mod moser;
