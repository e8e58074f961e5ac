//! Physical-layer key generation over a simulated reciprocal TDD OFDM link.
//!
//! The pipeline probes the channel (or reads a recorded CSI trace), cleans and
//! thins the estimates, quantizes magnitudes into Gray-coded bits, measures
//! bias and an LZW entropy bound, and hashes each node's stream into a
//! 256-bit key.
//!
//! ```no_run
//! use plkg::{run_pipeline, PipelineConfig};
//!
//! let report = run_pipeline(&PipelineConfig::default()).unwrap();
//! println!("{}", report.to_json());
//! ```

pub mod channel;
pub mod config;
pub mod csi;
pub mod entropy;
pub mod error;
pub mod keygen;
pub mod pipeline;
pub mod quantizer;
pub mod trace;

pub use channel::{DopplerMode, Node, SessionConfig};
pub use config::{PipelineConfig, Source};
pub use error::{Error, Result, Stage};
pub use pipeline::{run_pipeline, sweep, SessionReport, SweepGrid, SweepPoint};
