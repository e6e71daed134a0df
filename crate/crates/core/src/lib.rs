//! Syndrome decoding of quantum LDPC (CSS) codes with belief propagation and
//! guided decimation.
//!
//! The crate is layered bottom-up:
//!
//! * [`gf2`]: bit-packed GF(2) vectors and matrices.
//! * [`css`] and [`alist`]: CSS codes, syndromes, outcome classification,
//!   hypergraph products and file formats.
//! * [`bp`]: binary sum-product / min-sum BP on the Tanner graph of `H1`.
//! * [`decimation`]: BPGD and its randomized variant BPGD-rd.
//! * [`quaternary`]: Q-BP and Q-BPGD for depolarizing noise.
//! * [`oracle`]: exhaustive decoders and exact error rates for small codes.
//! * [`montecarlo`]: noise sampling and the parallel trial runner.

pub mod alist;
pub mod bp;
pub mod css;
pub mod decimation;
pub mod error;
pub mod gf2;
pub mod montecarlo;
pub mod oracle;
pub mod quaternary;

pub use bp::{bp_run, channel_llr, BpConfig, BpRunResult, BpVariant, TannerGraph};
pub use decimation::{bpgd_decode, bpgd_rd_decode, Decimation, GdConfig, GdResult};
pub use css::{hypergraph_product, parse_code_file, validate_css, CssCode, DecodeOutcome, Pauli, PauliVector};

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector};
