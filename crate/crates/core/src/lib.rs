pub mod ambient;
pub mod error;
pub mod hodge;
pub mod imesh;
pub mod jacobi;
pub mod linalg;
pub mod mesh;
pub mod par;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
