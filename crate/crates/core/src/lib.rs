//! Finite quantale-valued models of set theory.
//!
//! The crate builds finite commutative integral quantales ([`quantale`]),
//! the residuated first-order language of set theory ([`formula`]), the
//! quantale-valued universe and its atomic valuations ([`model`]), and the
//! constructible hierarchies obtained from weak and strong definability
//! ([`constructible`]).

pub mod constructible;
pub mod definable;
pub mod formula;
pub mod model;
pub mod quantale;
pub mod report;
