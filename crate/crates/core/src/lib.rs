//! Exact rational cohomology of unordered configuration spaces `C_k(M)`.
//!
//! A manifold enters as a presentation of `H*(M; Q)` ([`ring`], [`presets`])
//! or, for even-dimensional manifolds that are open or non-orientable, as a
//! raw model ([`model::load_raw_model`]). Even dimensions go through the
//! bigraded algebra `Sym^k(V ⊕ W)` of [`dga`], whose cohomology is computed
//! slice by slice with the exact ranks of [`linalg`]; odd dimensions use the
//! symmetric-power formula. [`stability`] then inspects the resulting
//! sequence of two-variable Poincaré polynomials.

pub mod cohomology;
pub mod dga;
pub mod error;
pub mod golden;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod presets;
pub mod ring;
pub mod stability;

pub use cohomology::{betti_bigraded, euler_char, poincare2, truncate, BettiTable2, Engine, Source};
pub use error::{Error, Result};
pub use model::{build_closed_oriented_model, load_raw_model, odd_symmetric_power, KnudsenModel};
pub use poly::Poly2;
pub use presets::preset;
pub use ring::{parse_ring, CohomologyRing};
pub use stability::{analyze, PolySequence, StabilityReport};
