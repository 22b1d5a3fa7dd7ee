//! Test scenes built from the public pipeline: random key frames, noise
//! reference images and rasterizer-derived coverage masks.

use ihvc_core::body::template::HEAD_NODES;
use ihvc_core::codec::transmitted_key_params;
use ihvc_core::motion::NO_FACE;
use ihvc_core::warp::Image;
use ihvc_core::{FullBodyParams, Renderer, SemanticVector};
use rand::Rng;

pub fn noise_image(rng: &mut impl Rng, width: u32, height: u32) -> Image {
    let data = (0..3 * width as usize * height as usize).map(|_| rng.gen()).collect();
    Image::from_raw(width, height, data).unwrap()
}

/// A centred body with random joint angles, exactly representable in the
/// `f32` key block so key semantics survive transmission unchanged.
pub fn random_key(rng: &mut impl Rng) -> FullBodyParams<f64> {
    let mut k = FullBodyParams::zeros();
    for j in k.body.iter_mut() {
        *j = [0; 3].map(|_| rng.gen_range(-0.4..0.4));
    }
    k.shape = [0; 10].map(|_| rng.gen_range(-0.15..0.15));
    k.rot = [0; 3].map(|_| rng.gen_range(-0.3..0.3));
    k.loc = [
        rng.gen_range(0.4..0.6),
        rng.gen_range(0.4..0.6),
        rng.gen_range(0.5..0.7),
        rng.gen_range(0.5..0.7),
    ];
    transmitted_key_params(&k).1
}

pub fn covered(r: &Renderer<f64>, sem: &SemanticVector<f64>) -> Vec<bool> {
    r.target_raster(sem).face.iter().map(|&f| f != NO_FACE).collect()
}

/// Pixels whose front-most face belongs to a head bone.
pub fn head_coverage(r: &Renderer<f64>, sem: &SemanticVector<f64>) -> Vec<bool> {
    let body = r.target_body(sem);
    r.target_raster(sem)
        .face
        .iter()
        .map(|&f| f != NO_FACE && HEAD_NODES.contains(&body.bone_of_face(f as usize)))
        .collect()
}

/// Inclusive `(x0, y0, x1, y1)` of covered pixels.
pub fn coverage_box(r: &Renderer<f64>, sem: &SemanticVector<f64>) -> (u32, u32, u32, u32) {
    r.target_raster(sem).bbox_where(|_| true).expect("body is on screen")
}

pub fn in_box(b: (u32, u32, u32, u32), x: u32, y: u32) -> bool {
    (b.0..=b.2).contains(&x) && (b.1..=b.3).contains(&y)
}
