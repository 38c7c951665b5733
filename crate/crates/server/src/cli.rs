//! The `strata` command line.

use std::io::Read;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use strata_core::scene::{load_scene_dir, save_scene_dir};
use strata_core::vpdsl::{interpret_program, validate_program, InterpretOptions, Services};
use strata_core::SceneDocument;

use crate::api::{render_png, serve, ServeConfig};
use crate::pipeline::{ingest_image, run_pipeline, scene_id_for, PipelineOptions};
use crate::services::{ServiceBundle, ServiceSource};
use crate::store::atomic_write;

#[derive(Debug, Parser)]
#[command(name = "strata", version, about = "Depth-aware content anchoring from a single image")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Replay model responses from a fixture directory (or a directory of fixtures).
    #[arg(long, global = true, value_name = "DIR", conflicts_with = "remote")]
    pub fixtures: Option<PathBuf>,
    /// Call remote model endpoints described by a JSON config.
    #[arg(long, global = true, value_name = "CONFIG")]
    pub remote: Option<PathBuf>,
    /// Base seed for randomized fits.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate depth for an image and write a scene directory.
    Ingest {
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline on an image.
    Pipeline {
        image: PathBuf,
        /// Writes scene/, document.json and report.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = crate::pipeline::DEFAULT_WORKERS)]
        workers: usize,
    },
    /// Run one program file against a scene directory.
    Extract {
        program: PathBuf,
        #[arg(long)]
        scene: PathBuf,
    },
    /// Render a document over its scene to PNG.
    Render {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        document: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        supersample: u32,
    },
    /// Parse and type-check a program; exit status 0 iff it has no diagnostics.
    ValidateProgram {
        /// Program file, or `-` for stdin.
        program: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, default_value = "strata-store")]
        store: PathBuf,
    },
}

impl GlobalOpts {
    fn services(&self) -> anyhow::Result<ServiceBundle> {
        let source = match (&self.fixtures, &self.remote) {
            (Some(f), None) => ServiceSource::Fixtures(f.clone()),
            (None, Some(r)) => ServiceSource::Remote(r.clone()),
            _ => bail!("this command needs --fixtures DIR or --remote CONFIG"),
        };
        source.build()
    }
}

fn read_program(path: &Path) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn print_json(v: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

pub fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let g = &cli.global;
    match cli.command {
        Command::Ingest { image, out } => {
            let bytes = std::fs::read(&image).with_context(|| format!("reading {}", image.display()))?;
            let scene = ingest_image(&bytes, &g.services()?)?;
            save_scene_dir(&scene, &out)?;
            print_json(&json!({
                "scene_id": scene_id_for(&bytes),
                "width": scene.width(),
                "height": scene.height(),
                "out": out,
            }))?;
        }
        Command::Pipeline { image, out, workers } => {
            let bytes = std::fs::read(&image).with_context(|| format!("reading {}", image.display()))?;
            let options = PipelineOptions {
                workers,
                ..PipelineOptions::default()
            };
            let result = run_pipeline(&bytes, &g.services()?, g.seed, &options)?;
            if let Some(out) = &out {
                std::fs::create_dir_all(out)?;
                save_scene_dir(&result.scene, &out.join("scene"))?;
                atomic_write(&out.join("document.json"), result.document.to_json()?.as_bytes())?;
                atomic_write(&out.join("report.json"), serde_json::to_string_pretty(&result.report)?.as_bytes())?;
            }
            let anchors: Vec<_> = result
                .document
                .anchors
                .iter()
                .map(|a| json!({ "id": a.id, "kind": a.kind }))
                .collect();
            print_json(&json!({
                "scene_id": result.scene_id,
                "anchors": anchors,
                "report": result.report,
            }))?;
        }
        Command::Extract { program, scene } => {
            let text = read_program(&program)?;
            let scene = load_scene_dir(&scene)?;
            let services = g.services()?;
            let prog = match validate_program(&text) {
                Ok(p) => p,
                Err(diags) => {
                    print_json(&json!({ "diagnostics": diags }))?;
                    return Ok(ExitCode::FAILURE);
                }
            };
            let svc = Services {
                segmenter: services.segment.as_ref(),
                landmarks: services.landmarks.as_ref(),
            };
            match interpret_program(&prog, &scene, svc, g.seed, &InterpretOptions::default()) {
                Ok(ext) => print_json(&json!({ "anchor": ext.anchor, "provenance": ext.provenance }))?,
                Err(d) => {
                    print_json(&json!({ "diagnostics": [d] }))?;
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Command::Render {
            scene,
            document,
            out,
            supersample,
        } => {
            let scene = load_scene_dir(&scene)?;
            let text = std::fs::read_to_string(&document).with_context(|| format!("reading {}", document.display()))?;
            let doc = SceneDocument::from_json(&text)?;
            let png = render_png(&doc, &scene, supersample).map_err(anyhow::Error::msg)?;
            atomic_write(&out, &png)?;
        }
        Command::ValidateProgram { program } => {
            let text = read_program(&program)?;
            return Ok(match validate_program(&text) {
                Ok(p) => {
                    print_json(&json!({ "statements": p.statements.len(), "diagnostics": [] }))?;
                    ExitCode::SUCCESS
                }
                Err(diags) => {
                    for d in &diags {
                        eprintln!("{d}");
                    }
                    print_json(&json!({ "diagnostics": diags }))?;
                    ExitCode::FAILURE
                }
            });
        }
        Command::Serve { addr, store } => {
            let services = g.services()?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(
                ServeConfig {
                    addr,
                    store,
                    seed: g.seed,
                },
                services,
            ))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
