//! Illusory deformation of static pictures by projecting dynamic luminance.
//!
//! The crate covers the whole signal chain: deformation-map generation
//! ([`fields`]), inverse-mapping warps ([`warp`]), luminance-residual and
//! projection-signal synthesis ([`synth`]), simulation of the light that
//! reaches the observer ([`optics`]) and the stimulus grids and psychometric
//! fits used to characterise the effect ([`psycho`]).

pub mod error;
pub mod fields;
pub mod geometry;
pub mod io;
pub mod optics;
pub mod psycho;
pub mod raster;
pub mod synth;
pub mod warp;

pub use error::{Error, Result};
pub use geometry::{visual_angle_deg, SequenceSpec, ViewingGeometry};
pub use raster::{
    to_luminance, ColorRaster, DisplacementField, Raster, SignedColorFrame, SignedFrame, LUMA_WEIGHTS,
};
