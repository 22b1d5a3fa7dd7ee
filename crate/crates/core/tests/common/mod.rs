//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the code under test beyond
//! plain data types.

#![allow(dead_code)]

pub mod scenes;

use ihvc_core::body::{Mesh2D, SkeletonTemplate, NODE_COUNT};
use ihvc_core::semantics::SEM_DIM;
use ihvc_core::warp::Image;
use ihvc_core::{BodyMesh, FullBodyParams};
use nalgebra::{Matrix4, Point3, Rotation3, Translation3, Vector3};

// ---------------------------------------------------------------------------
// Kinematics

fn rot4(w: [f64; 3]) -> Matrix4<f64> {
    Rotation3::from_scaled_axis(Vector3::from(w)).to_homogeneous()
}

fn trans4(t: [f64; 3]) -> Matrix4<f64> {
    Translation3::from(Vector3::from(t)).to_homogeneous()
}

/// World 4x4 transform of every node by explicit matrix chaining.
pub fn fk_oracle(full: &FullBodyParams<f64>, t: &SkeletonTemplate<f64>) -> Vec<Matrix4<f64>> {
    let mut world: Vec<Matrix4<f64>> = Vec::with_capacity(NODE_COUNT);
    for i in 0..NODE_COUNT {
        let local = match t.parent[i] {
            None => trans4(full.trans) * trans4(t.rest_offset[i]) * rot4(full.rot),
            Some(p) => world[p] * trans4(t.rest_offset[i]) * rot4(full.body[i - 1]),
        };
        world.push(local);
    }
    world
}

pub fn joint_position(m: &Matrix4<f64>) -> [f64; 3] {
    [m[(0, 3)], m[(1, 3)], m[(2, 3)]]
}

/// Posed vertices: `M_b * M_b(rest)^-1 * v` for each vertex's bone `b`.
pub fn skin_oracle(
    full: &FullBodyParams<f64>,
    t: &SkeletonTemplate<f64>,
    rest: &BodyMesh<f64>,
) -> Vec<[f64; 3]> {
    let posed = fk_oracle(full, t);
    let bind = fk_oracle(&FullBodyParams::zeros(), t);
    rest.vertices
        .iter()
        .zip(&rest.bone_of_vertex)
        .map(|(v, &b)| {
            let m = posed[b as usize] * bind[b as usize].try_inverse().unwrap();
            let p = m.transform_point(&Point3::from(*v));
            [p.x, p.y, p.z]
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Rasterization and motion

/// Snap to the 1/256-pixel grid; `None` beyond 2^20 px.
pub fn snap(v: f64) -> Option<i64> {
    (v.is_finite() && v.abs() <= (1u64 << 20) as f64).then(|| (v * 256.0).round() as i64)
}

fn cross(a: [i64; 2], b: [i64; 2], p: [i64; 2]) -> i64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

/// Geometric top-left test for the edge `a -> b` of a triangle whose third
/// vertex is `c`, with y pointing down: a horizontal edge counts when the
/// triangle lies below it, any other edge when the triangle lies to its
/// right.
fn owns_edge(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> bool {
    if a[1] == b[1] {
        return c[1] > a[1];
    }
    let num = (c[0] - a[0]) * (b[1] - a[1]) - (c[1] - a[1]) * (b[0] - a[0]);
    (num > 0) == (b[1] - a[1] > 0)
}

/// Coverage of one snapped triangle at a fixed-point sample: positive edge
/// weights in the face's own vertex order plus twice the unsigned area.
pub fn oracle_cover(v: [[i64; 2]; 3], p: [i64; 2]) -> Option<([i64; 3], i64)> {
    let area = cross(v[0], v[1], v[2]);
    if area == 0 {
        return None;
    }
    let s = area.signum();
    let opposite = [(1, 2), (2, 0), (0, 1)];
    let mut w = [0i64; 3];
    for k in 0..3 {
        let (i, j) = opposite[k];
        let e = s * cross(v[i], v[j], p);
        if e < 0 || (e == 0 && !owns_edge(v[i], v[j], v[k])) {
            return None;
        }
        w[k] = e;
    }
    Some((w, s * area))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePixel {
    pub face: usize,
    pub w: [i64; 3],
    pub area: i64,
    pub bary: [f64; 3],
    pub depth: f64,
}

pub fn snapped_face(mesh: &Mesh2D<f64>, f: usize) -> Option<[[i64; 2]; 3]> {
    let face = mesh.faces[f];
    let mut v = [[0i64; 2]; 3];
    for k in 0..3 {
        let p = mesh.points[face[k] as usize];
        v[k] = [snap(p[0])?, snap(p[1])?];
    }
    Some(v)
}

/// Per pixel, every face is tested; the smallest depth wins and ties keep
/// the earliest face.
pub fn oracle_raster(mesh: &Mesh2D<f64>, width: u32, height: u32) -> Vec<Option<OraclePixel>> {
    let snapped: Vec<_> = (0..mesh.faces.len()).map(|f| snapped_face(mesh, f)).collect();
    let mut out = Vec::with_capacity((width * height) as usize);
    for y in 0..height as i64 {
        for x in 0..width as i64 {
            let p = [x * 256 + 128, y * 256 + 128];
            let mut best: Option<OraclePixel> = None;
            for (f, v) in snapped.iter().enumerate() {
                let Some(v) = v else { continue };
                let Some((w, area)) = oracle_cover(*v, p) else { continue };
                let bary = w.map(|wk| wk as f64 / area as f64);
                let d = mesh.faces[f].map(|i| mesh.depth[i as usize]);
                let depth = d[0] + bary[1] * (d[1] - d[0]) + bary[2] * (d[2] - d[0]);
                if best.map_or(true, |b| depth < b.depth) {
                    best = Some(OraclePixel { face: f, w, area, bary, depth });
                }
            }
            out.push(best);
        }
    }
    out
}

/// Number of faces covering each pixel centre.
pub fn coverage_counts(mesh: &Mesh2D<f64>, width: u32, height: u32) -> Vec<u32> {
    let snapped: Vec<_> = (0..mesh.faces.len()).map(|f| snapped_face(mesh, f)).collect();
    let mut counts = vec![0u32; (width * height) as usize];
    for y in 0..height as i64 {
        for x in 0..width as i64 {
            let p = [x * 256 + 128, y * 256 + 128];
            counts[(y * width as i64 + x) as usize] = snapped
                .iter()
                .flatten()
                .filter(|v| oracle_cover(**v, p).is_some())
                .count() as u32;
        }
    }
    counts
}

/// Exact weighted displacement `sum w_k d_k / area` (d in 1/256 px),
/// rounded half up to a multiple of 2^-30 px.
pub fn oracle_flow_component(w: [i64; 3], area: i64, d: [i64; 3]) -> f64 {
    let num: i128 = (0..3).map(|k| w[k] as i128 * d[k] as i128).sum::<i128>() * (1i128 << 22);
    let den = area as i128;
    // floor(num / den + 1/2)
    let q = (2 * num + den).div_euclid(2 * den);
    q as f64 / (1u64 << 30) as f64
}

pub struct OracleMotion {
    pub flow: Vec<[f64; 2]>,
    pub occlusion: Vec<f64>,
    pub target: Vec<Option<OraclePixel>>,
    pub reference: Vec<Option<OraclePixel>>,
}

pub fn oracle_motion(
    reference: &Mesh2D<f64>,
    target: &Mesh2D<f64>,
    width: u32,
    height: u32,
) -> OracleMotion {
    let ref_px = oracle_raster(reference, width, height);
    let tgt_px = oracle_raster(target, width, height);
    let n = (width * height) as usize;
    let mut flow = vec![[0.0; 2]; n];
    let mut occlusion = vec![1.0; n];
    for y in 0..height {
        for x in 0..width {
            let i = (y * width + x) as usize;
            let Some(px) = tgt_px[i] else { continue };
            let face = reference.faces[px.face];
            let r: Vec<[i64; 2]> = face
                .iter()
                .map(|&v| {
                    let p = reference.points[v as usize];
                    [snap(p[0]).unwrap(), snap(p[1]).unwrap()]
                })
                .collect();
            let t = snapped_face(target, px.face).unwrap();
            let fl = [0, 1].map(|c| {
                oracle_flow_component(px.w, px.area, [0, 1, 2].map(|k| r[k][c] - t[k][c]))
            });
            let rd = face.map(|v| reference.depth[v as usize]);
            let b = px.bary;
            let src_depth = rd[0] + b[1] * (rd[1] - rd[0]) + b[2] * (rd[2] - rd[0]);
            let sx = (x as f64 + 0.5 + fl[0]).floor();
            let sy = (y as f64 + 0.5 + fl[1]).floor();
            let visible = if sx < 0.0 || sy < 0.0 || sx >= width as f64 || sy >= height as f64 {
                false
            } else {
                match ref_px[(sy as u32 * width + sx as u32) as usize] {
                    None => true,
                    Some(q) => q.face == px.face || q.depth >= src_depth - 1e-4,
                }
            };
            flow[i] = fl;
            occlusion[i] = if visible { 1.0 } else { 0.0 };
        }
    }
    OracleMotion {
        flow,
        occlusion,
        target: tgt_px,
        reference: ref_px,
    }
}

// ---------------------------------------------------------------------------
// Warping

/// Masked, edge-clamped bilinear warp written against integer pixel
/// coordinates: pixel `(x, y)` reads the reference at `(x + fx, y + fy)`.
pub fn oracle_warp(reference: &Image, flow: &[[f64; 2]], occlusion: &[f64]) -> Image {
    let (w, h) = (reference.width, reference.height);
    let mut out = Image::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if occlusion[i] == 0.0 {
                continue;
            }
            let u = (x as f64 + flow[i][0]).clamp(0.0, (w - 1) as f64);
            let v = (y as f64 + flow[i][1]).clamp(0.0, (h - 1) as f64);
            let (u0, v0) = (u.floor() as u32, v.floor() as u32);
            let (a, b) = (u - u0 as f64, v - v0 as f64);
            let (u1, v1) = ((u0 + 1).min(w - 1), (v0 + 1).min(h - 1));
            let mut rgb = [0u8; 3];
            for (c, dst) in rgb.iter_mut().enumerate() {
                let at = |px: u32, py: u32| reference.pixel(px, py)[c] as f64;
                let val = (1.0 - b) * ((1.0 - a) * at(u0, v0) + a * at(u1, v0))
                    + b * ((1.0 - a) * at(u0, v1) + a * at(u1, v1));
                let val = occlusion[i] * val;
                // Half away from zero; values are non-negative.
                *dst = (val + 0.5).floor().clamp(0.0, 255.0) as u8;
            }
            out.set_pixel(x, y, rgb);
        }
    }
    out
}

/// `out(x, y) = ref(clamp(x + dx), clamp(y + dy))`.
pub fn array_shift(reference: &Image, dx: i64, dy: i64) -> Image {
    let (w, h) = (reference.width as i64, reference.height as i64);
    let mut out = Image::new(reference.width, reference.height);
    for y in 0..h {
        for x in 0..w {
            let sx = (x + dx).clamp(0, w - 1) as u32;
            let sy = (y + dy).clamp(0, h - 1) as u32;
            out.set_pixel(x as u32, y as u32, reference.pixel(sx, sy));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Entropy model

/// The adaptive probability model, simulated without any coder: returns
/// the summed ideal code length `-log2 P(bin)` of every bin.
#[derive(Debug, Clone)]
pub struct ModelCost {
    ctx: Vec<[i32; 16]>,
    pub bits: f64,
}

impl Default for ModelCost {
    fn default() -> Self {
        Self::new()
    }
}

impl ModelCost {
    pub fn new() -> Self {
        Self {
            ctx: vec![[2048; 16]; SEM_DIM],
            bits: 0.0,
        }
    }

    /// Ideal cost of one bit under probability state `p` (P(1) * 4096),
    /// followed by the model update.
    pub fn adaptive_bit(p: &mut i32, bit: bool) -> f64 {
        let p1 = *p as f64 / 4096.0;
        let cost = -(if bit { p1 } else { 1.0 - p1 }).log2();
        let target = if bit { 4096 } else { 0 };
        *p = (*p + (target - *p) / 32).clamp(1, 4095);
        cost
    }

    /// Zigzag, then order-0 Exp-Golomb with 16 adaptive prefix positions.
    pub fn index(&mut self, component: usize, k: i64) {
        let u = if k >= 0 { 2 * k as u64 } else { 2 * k.unsigned_abs() - 1 };
        let x = u + 1;
        let n = 63 - x.leading_zeros() as usize;
        for pos in 0..=n {
            let bit = pos < n;
            self.bits += match self.ctx[component].get_mut(pos) {
                Some(p) => Self::adaptive_bit(p, bit),
                None => 1.0,
            };
        }
        self.bits += n as f64;
    }

    pub fn frame(&mut self, frame: &[i64; SEM_DIM]) -> f64 {
        let before = self.bits;
        for (c, &k) in frame.iter().enumerate() {
            self.index(c, k);
        }
        self.bits - before
    }
}

/// Model cross-entropy of a whole index stream.
pub fn stream_cross_entropy(frames: &[[i64; SEM_DIM]]) -> f64 {
    let mut m = ModelCost::new();
    for f in frames {
        m.frame(f);
    }
    m.bits
}

/// Model cross-entropy of a bit sequence through one adaptive context.
pub fn single_context_cross_entropy(bits: &[bool]) -> f64 {
    let mut p = 2048;
    bits.iter().map(|&b| ModelCost::adaptive_bit(&mut p, b)).sum()
}
