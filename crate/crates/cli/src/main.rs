use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use juliart_core::gallery::{self, REFERENCE_SIZE};
use juliart_core::render::EvalOptions;
use juliart_cli::{render_buffer, Job, JobError, RenderRequest, ServiceConfig};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "juliart", version, about = "Render Julia-set scene files to PNG")]
struct Cli {
    /// Render worker threads (defaults to the available cores).
    #[arg(long, global = true, env = "JULIART_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene file to a PNG image.
    Render {
        #[arg(short = 's', long = "size", default_value_t = 1000)]
        size: u32,
        #[arg(short = 'b', long = "border", default_value_t = 0)]
        border: u32,
        #[arg(short = 'v', long = "variation", default_value = "")]
        variation: String,
        input: PathBuf,
        output: PathBuf,
    },
    /// Built-in artworks.
    Presets {
        #[command(subcommand)]
        command: PresetCommand,
    },
    /// Render a preset at the reference size and run its structural checks.
    Check {
        name: String,
        /// Also write the render here.
        #[arg(long)]
        png: Option<PathBuf>,
    },
    /// Serve the HTTP render API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Concurrent render jobs (defaults to the worker count).
        #[arg(long)]
        max_jobs: Option<usize>,
        #[arg(long, default_value_t = 4096)]
        max_size: u32,
    },
    /// Compare every preset's reference render with the recorded digests.
    Golden {
        /// Rewrite the digest file from the current renders.
        #[arg(long)]
        write: bool,
        #[arg(long, default_value = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/golden/digests.txt"))]
        file: PathBuf,
    },
}

#[derive(Subcommand)]
enum PresetCommand {
    List,
    /// Print a preset's scene source.
    Dump { name: String },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read '{path}': {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write '{path}': {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{file}:{line}:{col}: {kind} error: {message}")]
    Scene { file: String, line: u32, col: u32, kind: &'static str, message: String },
    #[error("{0}")]
    Encode(String),
    #[error("structural check failed for '{0}'")]
    Check(String),
    #[error("{0} digest(s) differ from the recorded renders")]
    Golden(usize),
    #[error("server error: {0}")]
    Serve(std::io::Error),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Read { .. } | CliError::Write { .. } => 3,
            CliError::Scene { .. } => 4,
            CliError::Check(_) => 5,
            CliError::Golden(_) => 6,
            CliError::Encode(_) | CliError::Serve(_) | CliError::Pool(_) => 1,
        }
    }

    fn from_job(e: JobError, file: &str) -> Self {
        match e {
            JobError::Request(m) => CliError::Usage(m),
            JobError::Scene(e) => {
                let span = e.span();
                CliError::Scene { file: file.into(), line: span.line, col: span.col, kind: e.kind(), message: e.message() }
            }
            JobError::Encode(e) => CliError::Encode(e.to_string()),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Write { path: path.into(), source })
}

fn preset_job(name: &str) -> Result<Job, CliError> {
    RenderRequest {
        preset: Some(name.into()),
        size: Some(REFERENCE_SIZE),
        border: Some(0),
        ..Default::default()
    }
    .into_job(u32::MAX)
    .map_err(|e| CliError::from_job(e, name))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    pool.build_global().map_err(|e| CliError::Pool(e.to_string()))?;

    match cli.command {
        Command::Render { size, border, variation, input, output } => {
            let source =
                std::fs::read_to_string(&input).map_err(|source| CliError::Read { path: input.clone(), source })?;
            let file = input.display().to_string();
            let job = RenderRequest {
                source: Some(source),
                size: Some(size),
                border: Some(border),
                variation: Some(variation),
                preset: None,
            }
            .into_job(u32::MAX)
            .map_err(|e| CliError::from_job(e, &file))?;
            let (_, out) = render_buffer(&job, &EvalOptions::default()).map_err(|e| CliError::from_job(e, &file))?;
            write_file(&output, &out.png)?;
            let t = out.timings;
            eprintln!(
                "{}: {}x{}, {} primitives, {} iterations, parse {:.1} ms, evaluate {:.1} ms, rasterize {:.1} ms, encode {:.1} ms",
                output.display(),
                out.width,
                out.height,
                out.primitives,
                out.iterations,
                t.parse_ms,
                t.evaluate_ms,
                t.rasterize_ms,
                t.encode_ms
            );
        }
        Command::Presets { command: PresetCommand::List } => {
            for p in gallery::presets() {
                println!("{:<10} {}", p.name, p.title);
            }
        }
        Command::Presets { command: PresetCommand::Dump { name } } => {
            let p = gallery::preset(&name).map_err(|e| CliError::Usage(e.to_string()))?;
            print!("{}", p.source);
        }
        Command::Check { name, png } => {
            let job = preset_job(&name)?;
            let (buf, out) = render_buffer(&job, &EvalOptions::default()).map_err(|e| CliError::from_job(e, &name))?;
            if let Some(path) = png {
                write_file(&path, &out.png)?;
            }
            let report = gallery::verify_structure(&name, &buf).map_err(|e| CliError::Usage(e.to_string()))?;
            print!("{report}");
            if !report.passed() {
                return Err(CliError::Check(name));
            }
        }
        Command::Serve { port, max_jobs, max_size } => {
            let config = ServiceConfig { max_jobs: max_jobs.unwrap_or_else(rayon::current_num_threads).max(1), max_size };
            let rt = tokio::runtime::Runtime::new().map_err(CliError::Serve)?;
            rt.block_on(juliart_cli::serve(port, config)).map_err(CliError::Serve)?;
        }
        Command::Golden { write, file } => {
            let recorded = if write {
                BTreeMap::new()
            } else {
                let text =
                    std::fs::read_to_string(&file).map_err(|source| CliError::Read { path: file.clone(), source })?;
                gallery::parse_golden(&text)
            };
            let mut current = BTreeMap::new();
            let mut differing = 0;
            for p in gallery::presets() {
                let job = preset_job(p.name)?;
                let (buf, _) =
                    render_buffer(&job, &EvalOptions::default()).map_err(|e| CliError::from_job(e, p.name))?;
                let d = gallery::digest(&buf);
                if !write {
                    let status = match recorded.get(p.name) {
                        Some(r) if *r == d => "same",
                        Some(_) => {
                            differing += 1;
                            "DIFFERENT"
                        }
                        None => {
                            differing += 1;
                            "MISSING"
                        }
                    };
                    println!("{status:<9} {} {d}", p.name);
                }
                current.insert(p.name.to_string(), d);
            }
            if write {
                write_file(&file, gallery::format_golden(&current).as_bytes())?;
                eprintln!("rewrote {} golden digests in {}", current.len(), file.display());
            } else if differing > 0 {
                return Err(CliError::Golden(differing));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("juliart: {e}");
            ExitCode::from(e.code())
        }
    }
}
