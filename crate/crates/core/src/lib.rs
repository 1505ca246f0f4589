//! Quantum quasi-cyclic LDPC codes under joint belief-propagation decoding.
//!
//! * [`gf2`]: bit vectors, sparse binary matrices, rank, row spaces, girth.
//! * [`code`]: circulant expansion of `(E_X, E_Z)` exponent pairs into
//!   validated CSS codes.
//! * [`channel`]: depolarizing noise and syndromes.
//! * [`decoder`]: the joint BP decoder.
//! * [`sim`]: Monte Carlo FER/BER points, floor statistics, hashing bound.

pub mod channel;
pub mod code;
pub mod decoder;
pub mod error;
pub mod gf2;
pub mod sim;

pub use channel::{
    depolarizing_prior, extract_syndrome, sample_error, JointPrior, Pauli, PauliError, Syndrome,
};
pub use code::{
    build_code, builtin_pair_j3_l8, code_report, design_rate, load_pair, measured_rate, parse_pair,
    scan_circulants, CodeReport, ExponentMatrix, ExponentPair, QuantumQcCode, ScanRow,
};
pub use decoder::{decode, DecodeOutcome, DecoderConfig, JointBpDecoder};
pub use error::{Error, Result};
pub use gf2::{BitVector, Girth, SparseBinaryMatrix};
pub use sim::{
    classify, floor_statistics, hashing_bound_threshold, run_point, run_sweep, FailureRecord, FloorFraction,
    PointResult, Simulator, StoppingRule, TrialRecord,
};
