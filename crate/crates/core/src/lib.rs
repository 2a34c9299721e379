pub mod annotate;
pub mod dsp;
pub mod geometry;
pub mod ingest;
pub mod pipeline;
pub mod render;
pub mod rng;
pub mod validate;
