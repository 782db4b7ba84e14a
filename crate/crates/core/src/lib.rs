//! Geodesic persistent homology.
//!
//! Builds finite geodesic metric spaces (exact circles and flat tori, or
//! neighborhood-graph approximations of sampled surfaces), enumerates Rips and
//! witness-Čech filtrations, reduces them over Z/2, and interprets the
//! resulting barcodes: closed-form circle barcodes, explicit fan
//! null-homologies of sampled loops, tube 2-cycles, and detection of the
//! dim-1 / dim-2 / dim-3 traces that geodesic circles leave in a diagram.

// `!(x > 0.0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod filtration;
pub mod footprint;
pub mod metric;
pub mod nullhomology;
pub mod oracle;
pub mod persistence;
pub mod pipeline;
pub mod sampler;

pub use error::{Error, Result};
pub use filtration::{ComplexKind, Convention, FiltrationStream, Simplex};
pub use metric::FiniteMetric;
pub use persistence::{Barcode, Chain, Interval, Persistence};
