//! Oracles and scene generators shared by the integration tests and the
//! acceptance target.

#![allow(dead_code)]

pub mod constraints;
pub mod geometry;
pub mod render;
