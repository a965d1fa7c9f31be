//! Geometry, large-scale fading, estimation statistics and fading draws.

pub mod estimation;
pub mod fading;
pub mod geometry;
pub mod realization;

pub use estimation::{estimation_coefficients, mean_nmse, nmse, EstimateStats};
pub use fading::{large_scale_fading, LargeScaleGains};
pub use geometry::{generate_geometry, NetworkGeometry, Point};
pub use realization::{draw_realization, ArrayLayout, ChannelRealization, C64};
