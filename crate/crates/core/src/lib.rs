//! Construction and analysis toolkit for multi-dimensional spatially-coupled
//! (MD-SC) LDPC codes built from circulant permutation matrices.
//!
//! The crate covers the full pipeline:
//!
//! * [`code`] — circulant block codes, spatially-coupled chains, and the
//!   multi-dimensional coupling of several chain copies via circulant
//!   relocation maps.
//! * [`cycles`] — exact enumeration and counting of short cycles in the
//!   Tanner graph, working at the protograph level with a lifted-closure
//!   argument, plus a brute-force oracle on the expanded graph.
//! * [`optimize`] — scoring of relocation options by how they break or merge
//!   cycles across chains, a score-voting tree search that picks relocation
//!   sets of a given density, and random baselines.
//! * [`decode`] — quantized min-sum decoding: full-block, sliding-window over
//!   one chain, and multi-dimensional windowed decoding across chains, plus a
//!   latency model for windowed schedules.
//! * [`sim`] — reproducible AWGN Monte Carlo BER/FER measurement with
//!   adaptive stopping and checkpointed resume.
//! * [`registry`] — built-in code and relocation-map fixtures used by the
//!   CLI and the test-suite.

pub mod cli;
pub mod code;
pub mod cycles;
pub mod decode;
pub mod error;
pub mod formats;
pub mod matrix;
pub mod optimize;
pub mod registry;
pub mod sim;

pub use code::{BlockCodeSpec, MdMappingSet, ScCodeSpec};
pub use cycles::{brute_force_count, count_cycles, count_cycles_md, CycleCatalog, CycleSignature};
pub use decode::{latency_estimate, min_sum_decode, DecodeConfig, LatencyEstimate, MinSumDecoder, WindowPlan};
pub use error::Error;
pub use matrix::SparseBinaryMatrix;
pub use optimize::{construct_md, random_md, Construction, RelocationDecision, SolutionTree};
pub use sim::{emit_curve, simulate, BerRecord, DecoderMode, SimPlan};
