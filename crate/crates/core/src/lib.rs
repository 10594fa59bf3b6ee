//! Affine intuitionistic calculus with regions: syntax, typing, an
//! abstract machine and the forgetful translation to a simpler target.

pub mod syntax;
pub mod surface;
pub mod usage;
pub mod typing;
pub mod machine;
pub mod translation;
pub mod harness;
