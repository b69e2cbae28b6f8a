//! Single-valued operators, resolvents of set-valued operators, proximity
//! operators and projections.
//!
//! A set-valued `F` is never materialized: every algorithm touches it through
//! `J_{γF}`, so [`ResolventOp`] is a resolvent oracle plus the modulus `η_F`.
//! All operators are immutable and `Send + Sync`.

mod certificates;
mod forward;
mod prox;
mod resolvent;

pub use certificates::{
    spot_check_forward, spot_check_resolvent, ForwardCertificateCheck, ResolventCertificateCheck,
};
pub use forward::{spectral_norm, symmetric_min_eigenvalue, ForwardOp};
pub use prox::{
    project_box, prox_generic, prox_generic_with, prox_l1, resolvent_identity, ConvexFunction,
    ProxFunction, ProxSolverOptions,
};
pub use resolvent::ResolventOp;
