//! Tate cohomology of finite groups over prime fields and the Tate-Hochschild
//! cohomology ring of group algebras.

pub mod cli;
pub mod cup;
pub mod decomp;
pub mod error;
pub mod groups;
pub mod identities;
pub mod kgmodules;
pub mod linalg;
pub mod maps;
pub mod resolutions;
pub mod ringpres;

pub use error::{Error, Result};
