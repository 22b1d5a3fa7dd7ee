//! Procedural semantic trajectories and the flat-shaded key image.
//!
//! Every preset starts from [`key_params`] and moves a documented subset of
//! components as sums of sinusoids that are zero at `t = 0`:
//!
//! | preset          | varying components                                  |
//! |-----------------|-----------------------------------------------------|
//! | `nod_head`      | pose rows of joints 15-17                           |
//! | `wave_arms`     | pose rows of joints 18-21                           |
//! | `walk_sway`     | trans.x, rot.y, loc.cx, pose of joints 16, 18, 19   |
//! | `random_smooth` | all pose, trans, rot components and loc.cx, loc.cy  |
//!
//! For `random_smooth` each component is
//! `A_c * sum_k c_k (sin(2 pi f_k t + phi_k) - sin(phi_k))` with
//! `sum_k c_k = 1`, `f_k <= f_max` and `A_c <= a`, so consecutive frames
//! differ by at most `a * 2 pi * f_max / fps` in every component.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use ihvc_core::body::{build_template, pose_mesh, project};
use ihvc_core::codec::transmitted_key_params;
use ihvc_core::motion::rasterize;
use ihvc_core::semantics::{split_full_params, LOC_OFFSET, ROT_OFFSET, SEM_DIM, TRANS_OFFSET};
use ihvc_core::{FullParams, Image, Semantics, SequenceDocument};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    WaveArms,
    NodHead,
    WalkSway,
    RandomSmooth,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::WaveArms,
        Preset::NodHead,
        Preset::WalkSway,
        Preset::RandomSmooth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::WaveArms => "wave_arms",
            Preset::NodHead => "nod_head",
            Preset::WalkSway => "walk_sway",
            Preset::RandomSmooth => "random_smooth",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| HarnessError::Invalid(format!("unknown preset \"{s}\"")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub preset: Preset,
    pub frames: usize,
    pub fps: f64,
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    /// Angular amplitude scale `a` in radians.
    pub amplitude: f64,
    /// Highest frequency used by `random_smooth`, in Hz.
    pub f_max: f64,
}

pub const MAX_AMPLITUDE: f64 = 2.0;

impl SynthConfig {
    pub fn new(preset: Preset) -> Self {
        Self {
            preset,
            frames: 150,
            fps: 30.0,
            seed: 0,
            width: 384,
            height: 384,
            amplitude: 0.3,
            f_max: 0.5,
        }
    }

    /// Largest frame-to-frame change of any `random_smooth` component.
    pub fn smooth_step_bound(&self) -> f64 {
        self.amplitude * TAU * self.f_max / self.fps
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Invalid(m.to_string()));
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return bad("fps must be > 0");
        }
        if !(self.amplitude.is_finite() && (0.0..=MAX_AMPLITUDE).contains(&self.amplitude)) {
            return bad("amplitude must lie in [0, 2]");
        }
        if !(self.f_max.is_finite() && self.f_max > 0.0) {
            return bad("f_max must be > 0");
        }
        if self.width == 0 || self.height == 0 || self.width > 4096 || self.height > 4096 {
            return bad("width and height must lie in [1, 4096]");
        }
        Ok(())
    }
}

/// Key-frame parameters shared by all presets: rest pose, neutral shape,
/// body centred in a box of 0.8 x 0.8.
pub fn key_params() -> FullParams {
    let mut k = FullParams::zeros();
    k.loc = [0.5, 0.5, 0.8, 0.8];
    k
}

#[derive(Debug, Clone)]
pub struct Synthesized {
    pub document: SequenceDocument,
    pub key_image: Image,
}

pub fn synthesize(cfg: &SynthConfig) -> Result<Synthesized, HarnessError> {
    cfg.validate()?;
    let key = key_params();
    let (start, _) = split_full_params(&key).expect("valid key");
    let base = start.flatten();
    let a = cfg.amplitude;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let smooth = (cfg.preset == Preset::RandomSmooth).then(|| SmoothBank::new(&mut rng, cfg));
    let frames: Vec<Semantics> = (1..=cfg.frames)
        .map(|l| {
            let t = l as f64 / cfg.fps;
            let wave = |amp: f64, hz: f64| amp * (TAU * hz * t).sin();
            let mut v = base;
            match cfg.preset {
                Preset::NodHead => {
                    v[0] += wave(0.5 * a, 0.8);
                    v[2] += wave(0.1 * a, 0.4);
                    v[3] += wave(0.4 * a, 0.8);
                    v[4] += wave(0.2 * a, 0.5);
                    v[6] += 0.1 * a * (1.0 - (TAU * 1.2 * t).cos());
                }
                Preset::WaveArms => {
                    v[9 + 2] += wave(a, 1.0);
                    v[9 + 1] += wave(0.3 * a, 0.5);
                    v[12 + 2] -= wave(a, 0.8);
                    v[15 + 2] += wave(0.5 * a, 2.0);
                    v[18 + 2] -= wave(0.5 * a, 1.6);
                }
                Preset::WalkSway => {
                    v[TRANS_OFFSET] += wave(0.1 * a, 0.5);
                    v[ROT_OFFSET + 1] += wave(0.5 * a, 0.5);
                    v[LOC_OFFSET] += wave(0.05 * a, 0.25);
                    v[3 + 2] += wave(0.2 * a, 1.0);
                    v[9 + 1] += wave(0.5 * a, 1.0);
                    v[12 + 1] -= wave(0.5 * a, 1.0);
                }
                Preset::RandomSmooth => {
                    let bank = smooth.as_ref().expect("bank for random_smooth");
                    for (c, x) in v.iter_mut().enumerate() {
                        *x += bank.value(c, t);
                    }
                }
            }
            Semantics::from_flat(&v).expect("31 components")
        })
        .collect();
    let document = SequenceDocument::new(cfg.width, cfg.height, cfg.fps, &key, &frames);
    Ok(Synthesized {
        document,
        key_image: render_key_image(&key, cfg.width, cfg.height)?,
    })
}

const PARTIALS: usize = 4;

/// Per-component sinusoid bank for `random_smooth`.
struct SmoothBank {
    amp: [f64; SEM_DIM],
    weights: Vec<[f64; PARTIALS]>,
    freqs: Vec<[f64; PARTIALS]>,
    phases: Vec<[f64; PARTIALS]>,
}

impl SmoothBank {
    fn new(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Self {
        let a = cfg.amplitude;
        let amp = core::array::from_fn(|c| match c {
            c if c < TRANS_OFFSET => a,
            c if c < ROT_OFFSET => 0.2 * a,
            c if c < LOC_OFFSET => 0.5 * a,
            c if c < LOC_OFFSET + 2 => 0.05 * a,
            _ => 0.0,
        });
        let mut weights = Vec::with_capacity(SEM_DIM);
        let mut freqs = Vec::with_capacity(SEM_DIM);
        let mut phases = Vec::with_capacity(SEM_DIM);
        for _ in 0..SEM_DIM {
            let raw: [f64; PARTIALS] = core::array::from_fn(|_| rng.gen_range(0.05..1.0));
            let sum: f64 = raw.iter().sum();
            weights.push(raw.map(|w| w / sum));
            freqs.push(core::array::from_fn(|_| rng.gen_range(0.05 * cfg.f_max..=cfg.f_max)));
            phases.push(core::array::from_fn(|_| rng.gen_range(0.0..TAU)));
        }
        Self {
            amp,
            weights,
            freqs,
            phases,
        }
    }

    fn value(&self, c: usize, t: f64) -> f64 {
        let s: f64 = (0..PARTIALS)
            .map(|k| {
                let phi = self.phases[c][k];
                self.weights[c][k] * ((TAU * self.freqs[c][k] * t + phi).sin() - phi.sin())
            })
            .sum();
        self.amp[c] * s
    }
}

pub const BACKGROUND: [u8; 3] = [28, 32, 40];

/// Base colour per body node.
const PALETTE: [[u8; 3]; 22] = [
    [196, 150, 120],
    [70, 110, 170],
    [70, 110, 170],
    [200, 90, 80],
    [60, 95, 150],
    [60, 95, 150],
    [210, 100, 90],
    [50, 50, 60],
    [50, 50, 60],
    [215, 110, 95],
    [215, 110, 95],
    [225, 120, 100],
    [225, 120, 100],
    [230, 185, 150],
    [230, 185, 150],
    [225, 180, 145],
    [235, 195, 160],
    [200, 150, 130],
    [225, 180, 145],
    [225, 180, 145],
    [240, 200, 170],
    [240, 200, 170],
];

/// Flat-shaded raster of the posed template: bone colour scaled by the
/// facing ratio `0.45 + 0.55 |n_z|` of each face, over a flat background.
pub fn render_key_image(key: &FullParams, width: u32, height: u32) -> Result<Image, HarnessError> {
    let (_, key) = transmitted_key_params(key);
    let (template, rest) = build_template(&key.shape).map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let posed = pose_mesh(&key, &template, &rest);
    let mesh = project(&posed, &key.loc, width, height);
    let raster = rasterize(&mesh, width, height);
    let shade: Vec<[u8; 3]> = posed
        .faces
        .iter()
        .enumerate()
        .map(|(f, face)| {
            let [a, b, c] = face.map(|i| posed.vertices[i as usize]);
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let n = [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ];
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            let facing = if len > 0.0 { (n[2] / len).abs() } else { 0.0 };
            let k = 0.45 + 0.55 * facing;
            PALETTE[posed.bone_of_face(f)].map(|ch| (ch as f64 * k).round() as u8)
        })
        .collect();
    let mut img = Image::filled(width, height, BACKGROUND);
    for y in 0..height {
        for x in 0..width {
            if let Some(f) = raster.face_at(x, y) {
                img.set_pixel(x, y, shade[f as usize]);
            }
        }
    }
    Ok(img)
}
