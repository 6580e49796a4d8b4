//! Renormalization numerics for dissipative complex Hénon maps with
//! semi-Siegel fixed points.

pub mod afunc;
pub mod cli;
pub mod curve;
pub mod henon;
pub mod renorm1d;
pub mod renorm2d;
pub mod words;
