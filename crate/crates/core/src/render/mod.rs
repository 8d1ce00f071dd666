//! Scene evaluation and rasterization.

pub mod evaluate;
pub mod raster;
pub mod stream;
pub mod transform;

pub use evaluate::{evaluate_scene, evaluate_scene_with, EvalOptions, Evaluation, Limits, Primitive};
pub use raster::{rasterize, PixelBuffer, RasterError};
pub use stream::{derive_stream, RandStream, VariationSeed};
pub use transform::{compose_adjustments, Adjustment, Transform2D};
