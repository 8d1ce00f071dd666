//! One render request: source or preset in, PNG bytes out.

use std::time::{Duration, Instant};

use juliart_core::gallery::{self, GalleryError};
use juliart_core::render::{evaluate_scene_with, rasterize, EvalOptions, PixelBuffer, RasterError, VariationSeed};
use juliart_core::scene::{load, SceneError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_SIZE: u32 = 1000;
pub const DEFAULT_BORDER: u32 = 0;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub border: Option<u32>,
    /// Falls back to the preset's own tag, or the empty tag for raw source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variation: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Timings {
    pub parse_ms: f64,
    pub evaluate_ms: f64,
    pub rasterize_ms: f64,
    pub encode_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub png: Vec<u8>,
    pub width: u32,
    pub height: u32,
    pub timings: Timings,
    pub primitives: usize,
    pub iterations: u64,
}

#[derive(Debug, Error)]
pub enum JobError {
    #[error("invalid request: {0}")]
    Request(String),
    #[error("{0}")]
    Scene(#[from] SceneError),
    #[error("png encoding failed: {0}")]
    Encode(#[from] png::EncodingError),
}

impl From<RasterError> for JobError {
    fn from(e: RasterError) -> Self {
        JobError::Request(e.to_string())
    }
}

/// Validated job parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub source: String,
    pub size: u32,
    pub border: u32,
    pub variation: String,
}

impl RenderRequest {
    pub fn into_job(self, max_size: u32) -> Result<Job, JobError> {
        let (source, preset_tag) = match (self.source, self.preset) {
            (Some(_), Some(_)) => return Err(JobError::Request("give either source or preset, not both".into())),
            (None, None) => return Err(JobError::Request("one of source or preset is required".into())),
            (Some(s), None) => (s, ""),
            (None, Some(name)) => {
                let p = gallery::preset(&name).map_err(|e: GalleryError| JobError::Request(e.to_string()))?;
                (p.source.to_string(), p.variation)
            }
        };
        let size = self.size.unwrap_or(DEFAULT_SIZE);
        let border = self.border.unwrap_or(DEFAULT_BORDER);
        if size < 2 {
            return Err(JobError::Request(format!("size must be at least 2, got {size}")));
        }
        if size > max_size {
            return Err(JobError::Request(format!("size {size} exceeds the limit of {max_size}")));
        }
        if size as u64 <= 2 * border as u64 {
            return Err(JobError::Request(format!("size {size} must exceed twice the border {border}")));
        }
        let variation = self.variation.unwrap_or_else(|| preset_tag.to_string());
        Ok(Job { source, size, border, variation })
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Parses, evaluates and rasterizes `job` on the current rayon pool.
pub fn render_buffer(job: &Job, opts: &EvalOptions) -> Result<(PixelBuffer, RenderOutput), JobError> {
    let t = Instant::now();
    let (_, scene) = load(&job.source)?;
    let parse_ms = ms(t.elapsed());

    let t = Instant::now();
    let ev = evaluate_scene_with(&scene, &VariationSeed::new(&job.variation), opts)?;
    let evaluate_ms = ms(t.elapsed());

    let t = Instant::now();
    let buf = rasterize(&ev.primitives, job.size, job.border)?;
    let rasterize_ms = ms(t.elapsed());

    let t = Instant::now();
    let png = encode_png(&buf)?;
    let encode_ms = ms(t.elapsed());

    let out = RenderOutput {
        png,
        width: buf.width(),
        height: buf.height(),
        timings: Timings { parse_ms, evaluate_ms, rasterize_ms, encode_ms },
        primitives: ev.primitives.len(),
        iterations: ev.iterations,
    };
    Ok((buf, out))
}

pub fn render(job: &Job) -> Result<RenderOutput, JobError> {
    render_buffer(job, &EvalOptions::default()).map(|(_, out)| out)
}

/// 8-bit RGB PNG with fixed filter and compression settings.
pub fn encode_png(buf: &PixelBuffer) -> Result<Vec<u8>, png::EncodingError> {
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, buf.width(), buf.height());
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    enc.set_compression(png::Compression::Balanced);
    enc.set_filter(png::Filter::Up);
    let mut writer = enc.write_header()?;
    writer.write_image_data(buf.data())?;
    writer.finish()?;
    Ok(out)
}
