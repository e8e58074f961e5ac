//! Reciprocal TDD OFDM channel simulation.
//!
//! A tapped-delay-line Rayleigh channel evolves as a first-order
//! Gauss-Markov process. Alice and Bob observe the same taps, separated by the
//! configured probe timing offset; Eve observes a spatially decorrelated
//! blend of the legitimate taps and an independent channel.

mod bessel;
mod config;
mod link;
mod session;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bessel::bessel_j0;
pub use config::{
    exponential_profile, DopplerMode, EvePlacement, FadingConfig, ImpairmentConfig, OfdmConfig,
    SessionConfig, TddPattern,
};
pub use link::{
    channel_frequency_response, markov_correlation, FrequencyKernel, LinkState, STATIC_JITTER,
};
pub use session::{run_session, ProbeSession, ProbeTriple, RawObservation};

use crate::error::Error;

/// Radio node roles. Alice is the UE, Bob the gNB, Eve a passive listener.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Alice,
    Bob,
    Eve,
}

impl Node {
    pub const ALL: [Node; 3] = [Node::Alice, Node::Bob, Node::Eve];

    pub fn as_str(self) -> &'static str {
        match self {
            Node::Alice => "alice",
            Node::Bob => "bob",
            Node::Eve => "eve",
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Node {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "alice" => Ok(Node::Alice),
            "bob" => Ok(Node::Bob),
            "eve" => Ok(Node::Eve),
            other => Err(Error::InvalidConfig(format!("unknown node '{other}'"))),
        }
    }
}
