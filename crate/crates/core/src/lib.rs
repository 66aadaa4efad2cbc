pub mod error;
pub mod numerics;
pub mod specfun;

pub mod cosmology;
pub mod potential;
pub mod spectrum;
pub mod dynamics;
pub mod quantum;
pub mod asymptotics;
pub mod wkb;
pub mod semilinear;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The guide in `book/`, compiled here so its examples run as doctests.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/backgrounds.md")]
    pub mod backgrounds {}
    #[doc = include_str!("../../../book/src/potential.md")]
    pub mod potential {}
    #[doc = include_str!("../../../book/src/modes.md")]
    pub mod modes {}
    #[doc = include_str!("../../../book/src/pairs.md")]
    pub mod pairs {}
    #[doc = include_str!("../../../book/src/wkb.md")]
    pub mod wkb {}
    #[doc = include_str!("../../../book/src/riccati.md")]
    pub mod riccati {}
    #[doc = include_str!("../../../book/src/duffing.md")]
    pub mod duffing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    pub mod acceptance {}
}
