//! Golden bitstream sets under `tests/golden/<name>/`:
//!
//! - `manifest.json`: synthesis settings and quantizer steps
//! - `semantics.json`, `key.png`: encoder input
//! - `stream.ihvc`: expected bitstream
//! - `decoded.json`: expected decoded document
//! - `frames.json`: expected SHA-256 of each rendered frame's raw RGB

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use ihvc_core::{CodedSequence, SequenceDocument};
use ihvc_harness::metrics::image_hash;
use ihvc_harness::synth::{synthesize, Preset, SynthConfig};
use ihvc_harness::{decode_document, encode_document, parse_steps, render_stream};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub preset: String,
    pub frames: usize,
    pub fps: f64,
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    pub amplitude: f64,
    pub f_max: f64,
    pub steps: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameHashes {
    pub frame_count: usize,
    pub rgb_sha256: Vec<String>,
}

pub fn golden_sets() -> Vec<(&'static str, Manifest)> {
    let m = |preset: &str, frames, fps, seed, width, height, steps: &str| Manifest {
        preset: preset.into(),
        frames,
        fps,
        seed,
        width,
        height,
        amplitude: 0.3,
        f_max: 0.5,
        steps: steps.into(),
    };
    vec![
        ("nod_head_96", m("nod_head", 30, 30.0, 0, 96, 96, "0.005,0.002,0.005,0.001953125")),
        ("wave_arms_120x80", m("wave_arms", 20, 25.0, 0, 120, 80, "0.005,0.002,0.005,0.001953125")),
        (
            "random_smooth_coarse",
            m("random_smooth", 24, 30.0, 7, 112, 96, "0.02,0.008,0.02,0.0078125"),
        ),
    ]
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn synth_config(m: &Manifest) -> SynthConfig {
    let preset: Preset = m.preset.parse().expect("known preset");
    SynthConfig {
        preset,
        frames: m.frames,
        fps: m.fps,
        seed: m.seed,
        width: m.width,
        height: m.height,
        amplitude: m.amplitude,
        f_max: m.f_max,
    }
}

fn frame_hashes(cs: &CodedSequence) -> FrameHashes {
    let (_, _, images) = render_stream(cs, None).expect("golden stream renders");
    FrameHashes {
        frame_count: images.len(),
        rgb_sha256: images.iter().map(image_hash).collect(),
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).unwrap())
}

/// Rewrites every file of a golden set from its manifest.
pub fn regenerate(name: &str, m: &Manifest) {
    let dir = golden_dir().join(name);
    fs::create_dir_all(&dir).unwrap();
    let s = synthesize(&synth_config(m)).unwrap();
    let key_png = s.key_image.encode_png().unwrap();
    let cs = encode_document(&s.document, &key_png, parse_steps(&m.steps).unwrap(), None).unwrap();
    let decoded = decode_document(&cs).unwrap();
    fs::write(dir.join("manifest.json"), pretty(m)).unwrap();
    fs::write(dir.join("semantics.json"), s.document.to_json()).unwrap();
    fs::write(dir.join("key.png"), &key_png).unwrap();
    fs::write(dir.join("stream.ihvc"), cs.to_bytes()).unwrap();
    fs::write(dir.join("decoded.json"), decoded.to_json()).unwrap();
    fs::write(dir.join("frames.json"), pretty(&frame_hashes(&cs))).unwrap();
}

/// Re-encodes the checked-in input and compares stream bytes, decoded
/// document and frame hashes against the checked-in expectations.
pub fn verify(name: &str) -> Result<(), String> {
    let dir = golden_dir().join(name);
    let manifest: Manifest = serde_json::from_slice(&read(&dir.join("manifest.json"))?)
        .map_err(|e| format!("{name}: manifest: {e}"))?;
    let doc_text = String::from_utf8(read(&dir.join("semantics.json"))?).map_err(|e| e.to_string())?;
    let doc = SequenceDocument::from_json(&doc_text).map_err(|e| e.to_string())?;
    let key_png = read(&dir.join("key.png"))?;
    let expected = read(&dir.join("stream.ihvc"))?;
    let steps = parse_steps(&manifest.steps).map_err(|e| e.to_string())?;
    let cs = encode_document(&doc, &key_png, steps, None).map_err(|e| e.to_string())?;
    if cs.to_bytes() != expected {
        return Err(format!("{name}: re-encoded stream differs from stream.ihvc"));
    }
    let parsed = CodedSequence::from_bytes(&expected).map_err(|e| e.to_string())?;
    let decoded = decode_document(&parsed).map_err(|e| e.to_string())?;
    let expected_doc = String::from_utf8(read(&dir.join("decoded.json"))?).map_err(|e| e.to_string())?;
    if decoded.to_json() != expected_doc {
        return Err(format!("{name}: decoded semantics differ from decoded.json"));
    }
    if decoded.frames.len() != manifest.frames {
        return Err(format!("{name}: frame count {} != {}", decoded.frames.len(), manifest.frames));
    }
    let hashes: FrameHashes = serde_json::from_slice(&read(&dir.join("frames.json"))?)
        .map_err(|e| format!("{name}: frames.json: {e}"))?;
    let got = frame_hashes(&parsed);
    if got.rgb_sha256 != hashes.rgb_sha256 || got.frame_count != hashes.frame_count {
        let first = got
            .rgb_sha256
            .iter()
            .zip(&hashes.rgb_sha256)
            .position(|(a, b)| a != b);
        return Err(format!("{name}: rendered frames differ (first at {first:?})"));
    }
    Ok(())
}
