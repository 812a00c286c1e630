//! Numerics for Schottky-uniformized Riemann surfaces.
//!
//! - [`moebius`]: fractional-linear maps, fixed points, multipliers, isometric circles
//! - [`freegroup`]: reduced words and primitive conjugacy classes of free groups
//! - [`schottky`]: marked Schottky groups, fundamental circles, multiplier spectra
//! - [`zetaprod`]: truncated products over primitive classes (Zograf, McIntyre-Takhtajan,
//!   Ruelle, Mumford-form ratio)
//! - [`differentials`]: Poincare-series 1-forms, contour quadrature, Eichler pairing at k = 2
//! - [`tate`]: exact integer q-series of the Tate curve

pub mod differentials;
pub mod error;
pub mod freegroup;
pub mod moebius;
pub mod schottky;
pub mod tate;
pub mod zetaprod;

pub use error::{Error, Result};
pub use freegroup::{ConjClass, ReducedWord};
pub use moebius::{Circle, MoebiusMap, Orientation, Point};
pub use schottky::{GeneratorSpec, GroupSpec, SchottkyGroup};
pub use tate::IntegerPowerSeries;
pub use zetaprod::{ProductValue, TruncationPolicy};

pub use num_complex::Complex64;
