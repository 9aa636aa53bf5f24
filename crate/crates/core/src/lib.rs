//! Entity ranking from wiki-style corpora.
//!
//! The pipeline parses a MediaWiki-export dump subset into structured page
//! records, builds an immutable indexed corpus (links, redirects, pageviews,
//! entity kinds), computes ranking methods over it (incoming links,
//! incoming/outgoing ratio, pageviews, infobox attributes, citation mining
//! for journals), and evaluates rankings against benchmark lists with
//! rank-correlation statistics and optimizer-fitted component weights.

pub mod corpus;
pub mod diag;
pub mod io;
pub mod journals;
pub mod rankers;
pub mod stats;
pub mod wikitext;

pub use diag::Diagnostics;
