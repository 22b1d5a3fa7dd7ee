//! Argument parsing and command execution for the `ihvc` binary. Every
//! command returns the JSON document printed on stdout.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ihvc_core::body::template_tables;
use ihvc_core::{CodedSequence, QuantConfig, SequenceDocument};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::edits::parse_script;
use crate::metrics::sha256_hex;
use crate::rd::{rd_eval, write_csv};
use crate::synth::{synthesize, Preset, SynthConfig};
use crate::{
    decode_document, encode_document, parse_rd_steps, parse_steps, render_stream, EncodeReport,
    HarnessError,
};

#[derive(Debug, Parser)]
#[command(name = "ihvc", version, about = "Semantic human-video codec tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a semantics JSON document and key PNG into a .ihvc stream.
    Encode(EncodeArgs),
    /// Decode a stream back to a semantics JSON document.
    Decode(DecodeArgs),
    /// Decode, optionally edit, and write frame_NNNN.png files.
    Render(RenderArgs),
    /// Generate a procedural semantics document and key PNG.
    Synth(SynthArgs),
    /// Rate-distortion sweep over quantizer configurations.
    RdEval(RdEvalArgs),
    /// Print the body template tables.
    DumpTemplate(DumpTemplateArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Semantics JSON document.
    pub input: PathBuf,
    /// Key-reference frame PNG.
    pub key: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Quantizer steps `pose,trans,rot,loc`.
    #[arg(long)]
    pub steps: Option<String>,
    /// Overrides the document frame rate.
    #[arg(long)]
    pub fps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    pub input: PathBuf,
    /// Writes the document here instead of printing it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also writes the key-frame payload.
    #[arg(long)]
    pub key_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Edit script JSON.
    #[arg(long)]
    pub edits: Option<PathBuf>,
    /// Writes mesh_NNNN.obj with each posed body.
    #[arg(long)]
    pub dump_mesh: bool,
    /// Writes flow_NNNN.f32 and occlusion_NNNN.pgm for each frame.
    #[arg(long)]
    pub dump_motion: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// One of wave_arms, nod_head, walk_sway, random_smooth.
    pub preset: String,
    #[arg(long, default_value_t = 150)]
    pub frames: usize,
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 384)]
    pub width: u32,
    #[arg(long, default_value_t = 384)]
    pub height: u32,
    /// Angular amplitude scale in radians.
    #[arg(long, default_value_t = 0.3)]
    pub amplitude: f64,
    /// Highest random_smooth frequency in Hz.
    #[arg(long, default_value_t = 0.5)]
    pub fmax: f64,
    /// Directory receiving semantics.json and key.png.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RdEvalArgs {
    pub input: PathBuf,
    pub key: PathBuf,
    /// Repeat for each configuration.
    #[arg(long, required = true)]
    pub steps: Vec<String>,
    #[arg(long)]
    pub include_key: bool,
    /// Directory receiving rd.json and rd.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DumpTemplateArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<Vec<u8>, HarnessError> {
    fs::read(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, bytes).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_document(path: &Path) -> Result<SequenceDocument, HarnessError> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| HarnessError::Invalid(format!("{}: not UTF-8", path.display())))?;
    SequenceDocument::from_json(&text).map_err(|e| HarnessError::Invalid(e.to_string()))
}

fn read_stream(path: &Path) -> Result<CodedSequence, HarnessError> {
    Ok(CodedSequence::from_bytes(&read(path)?)?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

pub fn run(cli: Cli) -> Result<Value, HarnessError> {
    match cli.command {
        Command::Encode(a) => {
            let doc = read_document(&a.input)?;
            let key = read(&a.key)?;
            let cfg = match &a.steps {
                Some(s) => parse_steps(s)?,
                None => QuantConfig::default(),
            };
            let cs = encode_document(&doc, &key, cfg, a.fps)?;
            write(&a.out, &cs.to_bytes())?;
            Ok(to_value(&EncodeReport::new(&cs)))
        }
        Command::Decode(a) => {
            let cs = read_stream(&a.input)?;
            let doc = decode_document(&cs)?;
            if let Some(p) = &a.key_out {
                write(p, &cs.key_payload)?;
            }
            match &a.out {
                Some(p) => {
                    write(p, doc.to_json().as_bytes())?;
                    Ok(json!({
                        "width": doc.width,
                        "height": doc.height,
                        "fps": doc.fps,
                        "frame_count": doc.frames.len(),
                        "steps": cs.header.quant,
                        "out": p,
                    }))
                }
                None => Ok(to_value(&doc)),
            }
        }
        Command::Render(a) => {
            let cs = read_stream(&a.input)?;
            let script = match &a.edits {
                Some(p) => {
                    let text = String::from_utf8(read(p)?)
                        .map_err(|_| HarnessError::Invalid("edit script: not UTF-8".into()))?;
                    Some(parse_script(&text)?)
                }
                None => None,
            };
            let (renderer, frames, images) = render_stream(&cs, script.as_deref())?;
            create_dir(&a.out)?;
            let hashes = images
                .par_iter()
                .enumerate()
                .map(|(i, img)| {
                    let png = img
                        .encode_png()
                        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
                    write(&a.out.join(format!("frame_{i:04}.png")), &png)?;
                    Ok(sha256_hex(&png))
                })
                .collect::<Result<Vec<_>, HarnessError>>()?;
            for (i, sem) in frames.iter().enumerate() {
                if a.dump_mesh {
                    let obj = renderer.target_body(sem).to_obj();
                    write(&a.out.join(format!("mesh_{i:04}.obj")), obj.as_bytes())?;
                }
                if a.dump_motion {
                    let mf = renderer.motion(sem);
                    let mut flow = Vec::new();
                    let mut occ = Vec::new();
                    mf.write_flow_raw(&mut flow).expect("in-memory write");
                    mf.write_occlusion_pgm(&mut occ).expect("in-memory write");
                    write(&a.out.join(format!("flow_{i:04}.f32")), &flow)?;
                    write(&a.out.join(format!("occlusion_{i:04}.pgm")), &occ)?;
                }
            }
            Ok(json!({
                "frames": images.len(),
                "width": renderer.width(),
                "height": renderer.height(),
                "out": a.out,
                "png_sha256": hashes,
            }))
        }
        Command::Synth(a) => {
            let preset: Preset = a.preset.parse()?;
            let cfg = SynthConfig {
                preset,
                frames: a.frames,
                fps: a.fps,
                seed: a.seed,
                width: a.width,
                height: a.height,
                amplitude: a.amplitude,
                f_max: a.fmax,
            };
            let s = synthesize(&cfg)?;
            create_dir(&a.out)?;
            let doc_path = a.out.join("semantics.json");
            let key_path = a.out.join("key.png");
            write(&doc_path, s.document.to_json().as_bytes())?;
            let png = s
                .key_image
                .encode_png()
                .map_err(|e| HarnessError::Invalid(e.to_string()))?;
            write(&key_path, &png)?;
            Ok(json!({
                "preset": preset,
                "frames": cfg.frames,
                "fps": cfg.fps,
                "seed": cfg.seed,
                "width": cfg.width,
                "height": cfg.height,
                "amplitude": cfg.amplitude,
                "f_max": cfg.f_max,
                "smooth_step_bound": cfg.smooth_step_bound(),
                "semantics": doc_path,
                "key": key_path,
            }))
        }
        Command::RdEval(a) => {
            let doc = read_document(&a.input)?;
            let key = read(&a.key)?;
            let configs = a
                .steps
                .iter()
                .map(|s| parse_rd_steps(s))
                .collect::<Result<Vec<_>, _>>()?;
            let points = rd_eval(&doc, &key, &configs, a.include_key)?;
            let value = to_value(&points);
            if let Some(dir) = &a.out {
                create_dir(dir)?;
                let mut csv = Vec::new();
                write_csv(&points, &mut csv).map_err(|e| HarnessError::Invalid(e.to_string()))?;
                write(&dir.join("rd.csv"), &csv)?;
                let text = serde_json::to_string_pretty(&value).expect("json");
                write(&dir.join("rd.json"), text.as_bytes())?;
            }
            Ok(value)
        }
        Command::DumpTemplate(a) => {
            let value = to_value(&template_tables());
            if let Some(p) = &a.out {
                let text = serde_json::to_string_pretty(&value).expect("json");
                write(p, format!("{text}\n").as_bytes())?;
            }
            Ok(value)
        }
    }
}
