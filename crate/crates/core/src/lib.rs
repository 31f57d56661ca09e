//! Coded caching with low subpacketization.
//!
//! The proposed scheme takes the `q^(k-1)` codewords of the `(k, k-1)` single
//! parity check code over `Z_q`, turns every row/symbol pair of the codeword
//! matrix into a block of a resolvable design, and binds `K = q*k` users to
//! those blocks. Each file is split into `q^(k-1)` subfiles (one per point),
//! users cache the subfiles of their block, and the server serves any demand
//! vector with `q^(k-1)(q-1)` XOR equations, i.e. at rate `q - 1`.
//!
//! The Maddah-Ali–Niesen scheme is implemented next to it as a baseline, both
//! as closed-form formulas ([`analysis`]) and as an executable scheme that
//! runs through the same [`simulator`].

pub mod analysis;
pub mod delivery;
pub mod design;
mod error;
pub mod format;
pub mod par;
pub mod scheme;
pub mod simulator;

pub use error::{Error, Result};

/// Exact rational used for cache ratios and rates.
pub type Rational = num_rational::Ratio<u64>;

pub use delivery::{
    schedule_mn, schedule_proposed, verify_schedule, CoverageReport, DeliverySchedule, Term,
    XorEquation,
};
pub use design::{build_design, enumerate_codewords, BlockId, ResolvableDesign, SchemeParams, SpcCodebook};
pub use scheme::{build_mn_scheme, build_proposed_scheme, CachingScheme, DemandVector, SchemeKind};
pub use simulator::{make_corpus, run_simulation, FileCorpus, SimulationRun, Simulator};
