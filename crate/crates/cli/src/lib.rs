//! Render jobs, PNG output and the HTTP service behind the `juliart` binary.

pub mod job;
pub mod service;

pub use job::{encode_png, render, render_buffer, Job, JobError, RenderOutput, RenderRequest, Timings};
pub use service::{router, serve, Diagnostic, ServiceConfig};
