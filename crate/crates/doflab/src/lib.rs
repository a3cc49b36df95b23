//! # doflab
//!
//! Simulator and analysis toolkit for a two-user, two-subband MISO broadcast
//! channel with imperfect transmitter-side channel knowledge.
//!
//! The crate builds the transmission schemes that arise in this setting
//! (zero-forcing beamforming, reused stale-CSIT retransmission, their hybrid
//! in both of its operating regimes, and superposition coding over a ZF
//! pair), evaluates per-symbol achievable rates by walking the matching
//! successive-interference-cancellation programs over Monte-Carlo channel
//! draws, estimates degrees of freedom as rate pre-log slopes, and checks
//! them against the exact-rational achievable region.
//!
//! ## Layout
//!
//! * [`channel`]: channel draws, imperfect CSIT with power-law error
//!   variances, precoder primitives.
//! * [`scheme`]: transmit plans (symbols, exact power ledgers, encoding
//!   prelogs, precoders) and their SIC decoding programs.
//! * [`sic`]: Monte-Carlo rate evaluation: deterministic, trial-parallel,
//!   reproducible for a fixed seed at any worker count.
//! * [`dof`]: achievable region geometry in exact rational arithmetic,
//!   analytic per-scheme DoF, and reconciliation of fitted slopes.
//! * [`cli`]: the `doflab` binary: `region`, `simulate`, `verify`, `sweep`.
//!
//! Start with the `examples/` directory; each example exercises one
//! capability end to end.

pub mod channel;
pub mod cli;
pub mod dof;
mod error;
pub mod rational;
pub mod scheme;
pub mod sic;

pub use channel::{
    draw_channel, leakage_moment, leakage_slope, orth_complement, ChannelDraw, CsitQuality, Cvec2,
    LeakageSide, SnrPoint,
};
pub use dof::{
    analytic_scheme_dof, contains, corner_points, region, reconcile, DofPoint, DofRegion,
    SchemeDof, Verdict,
};
pub use error::{Error, Result};
pub use rational::{fmt_rat, parse_rat, rat, rint, Rat};
pub use scheme::{
    build_hybrid_case_i, build_hybrid_case_ii, build_mat_reuse, build_sc_zf, build_zfbf,
    case_ii_block_count, sic_program_for, DecodeStep, PlanDocument, Precoder, Scheme, SchemePlan,
    SicProgram, SymbolId, SymbolOwner, SymbolSpec, User,
};
pub use sic::{
    decode_success_rate, evaluate_plan, evaluate_sweep, fit_user_slopes, stage_rate, EvalParams,
    RateReport, SnrSlice, StageSinr,
};
