pub mod bundle;
pub mod construct;
pub mod data;
pub mod error;
pub mod groups;
pub mod incompat;
pub mod io;
pub mod mub;
pub mod numerics;
pub mod par;
pub mod radical;
pub mod steering;
pub mod tables;

pub use error::{Error, Result};
pub use numerics::{CMat, C64};
