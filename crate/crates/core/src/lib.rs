//! Variational calculus of second-order cone complementarity sets and
//! certification of sufficient conditions for local error bounds of
//! SOC complementarity systems.
//!
//! The crate is organised bottom-up:
//! [`soc_core`] (one cone), [`comp_set`] (one complementarity set),
//! [`problem_model`] (instances), [`cq_checker`] (verdicts) and
//! [`eb_probe`] (empirical error-bound estimates), with
//! [`report`] combining the last two.

pub mod block_cones;
pub mod comp_set;
pub mod cone_rep;
pub mod conic_lp;
pub mod corpus;
pub mod cq_checker;
pub mod eb_probe;
pub mod error;
pub mod linalg;
pub mod problem_model;
pub mod report;
pub mod sampling;
pub mod soc_core;

pub use comp_set::{CompCase, CompCaseTag, DistanceBracket};
pub use cone_rep::{ConePiece, ConeUnionRep, FamilyKind, ParametricFamily};
pub use cq_checker::{Certificate, CheckConfig, CqKind, CqStatus, CqVerdict, CriticalDirectionCone};
pub use eb_probe::{ProbeConfig, ProbeReport, Trend};
pub use error::{LoadError, Result, SoccpError};
pub use soc_core::{ConeRegion, SocPoint, SpectralDecomposition};
