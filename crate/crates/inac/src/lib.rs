//! Link-level simulator and analytical toolkit for a superimposed
//! multi-/uni-cast spread-spectrum signal that carries navigation and
//! communication services on one shared PN sequence.
//!
//! The crate covers the full chain: waveform construction ([`phy_tx`]), the
//! free-space satellite channel ([`channel`]), a successive-interference-
//! cancellation receiver ([`phy_rx`]), closed-form error-rate and
//! code-tracking expressions ([`analytic`], [`ranging`]), a seeded Monte
//! Carlo engine ([`simkit`]), the time-slot and shift-keying baselines
//! ([`baselines`]), and independent brute-force validation routes
//! ([`oracle`]).
//!
//! A narrative guide with runnable examples lives in `book/`; its chapters
//! are compiled as doc-tests through the [`guide`] module, so the book and
//! the crate cannot drift apart.

pub mod analytic;
pub mod baselines;
pub mod channel;
pub mod config;
pub mod error;
pub mod model;
pub mod oracle;
pub mod phy_rx;
pub mod phy_tx;
pub mod pn;
pub mod ranging;
pub mod simkit;
pub mod util;

pub use error::{Error, Result};
pub use model::{Scenario, SystemConfig};

/// The book chapters, included so `cargo test --doc` runs every snippet.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/signal-model.md")]
    pub mod signal_model {}
    #[doc = include_str!("../../../book/src/spreading-sequences.md")]
    pub mod spreading_sequences {}
    #[doc = include_str!("../../../book/src/channel.md")]
    pub mod channel {}
    #[doc = include_str!("../../../book/src/sic-receiver.md")]
    pub mod sic_receiver {}
    #[doc = include_str!("../../../book/src/error-rates.md")]
    pub mod error_rates {}
    #[doc = include_str!("../../../book/src/ranging.md")]
    pub mod ranging {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    pub mod monte_carlo {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    pub mod baselines {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
}
