//! Object languages and their encodings.

pub mod encode;
pub mod lambda;
pub mod pdts;
pub mod pts;
pub mod systems;
