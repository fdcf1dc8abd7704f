//! Orders and group structures of the even K-groups K_{2m} of elliptic
//! curves over small prime fields, their growth along l-power towers, and a
//! checked atlas of the classical tables for F_3 through F_13.

pub mod atlas;
pub mod curve;
pub mod error;
pub mod field;
pub mod kgroup;
pub mod numeric;
pub mod tower;
pub mod zeta;

pub use error::{Error, Result};
