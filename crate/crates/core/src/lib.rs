//! Mining Git histories for the de-facto structure of an engineering
//! organization.

pub mod analytics;
pub mod features;
pub mod identity;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod seed;
pub mod synth;
pub mod topics;
