//! Exact arithmetic and Galois cohomology for étale Φ- and Φ-Γ-modules over
//! truncated Cohen rings.
//!
//! The ambient objects are finite modules over the ring O = W_n(F_q)((π)),
//! a truncated Laurent series ring over the coefficient ring W_n(F_q) =
//! (ℤ/pⁿ)[g]/(m(g)).  O carries two commuting semilinear ring endomorphisms,
//!
//!   φ: π ↦ (1+π)^p − 1 (σ on coefficients),
//!   γ: π ↦ (1+π)^a − 1 (coefficients fixed, a = χ(γ) a primitive root mod p²).
//!
//! A module M is given by a σ-semilinear matrix Φ with det Φ a unit mod p and
//! a γ-semilinear matrix G satisfying G·γ(Φ) = Φ·φ(G).  Its cohomology is the
//! cohomology of the complex
//!
//!   0 → M →^α M ⊕ M →^β M → 0,
//!      α(x) = ((φ−1)x, (γ−1)x),   β(y, z) = (γ−1)y − (φ−1)z,
//!
//! computed exactly by window stabilization ([`cohomology`]).  On top of the
//! engine sit the Euler characteristic check, the residue/trace realization of
//! the rank-one twist Ω = D(μ_{pⁿ}), cup products, and the duality pairing
//! H^i(M) × H^{2−i}(M̃) → ℤ/pⁿ ([`duality`]), as well as the two-generator
//! variant of the complex with γγ′ = (γ′)^a γ ([`c3`]).
//!
//! Ground truth for the characteristic-p theory comes from an independent
//! brute-force route: cohomology of procyclic groups on finite modules and the
//! fixed-space construction of D(V) over finite fields ([`oracle`]).
//!
//! All arithmetic is exact: residues mod pⁿ with explicit torsion exponents,
//! Laurent coefficients carried in `BTreeMap`s with explicit precision tags,
//! and elementary-divisor computations over ℤ/pⁿ.  No floating point is used
//! anywhere, and every randomized suite takes an explicit seed, so results are
//! reproducible byte for byte.

pub mod c3;
pub mod charp;
pub mod coeff;
pub mod cohomology;
pub mod duality;
pub mod error;
pub mod laurent;
pub mod module;
pub mod oracle;
pub mod snf;
pub mod textio;
pub mod witt;

pub use coeff::{CoeffElement, RingParams};
pub use cohomology::{cohomology, CohomologyResult, EngineOptions};
pub use error::Error;
pub use laurent::{ActionParams, DifferentialForm, LaurentElement};
pub use module::PhiGammaModule;
pub use textio::{parse_module, serialize_module};

/// Crate-wide result alias; every fallible operation reports an [`Error`].
pub type Result<T> = std::result::Result<T, Error>;
