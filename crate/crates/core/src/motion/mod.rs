//! Dense backward flow and occlusion derived from mesh correspondence.
//!
//! Each target pixel covered by face `f` maps to the point with the same
//! barycentrics on `f` in the reference mesh. Flow is evaluated exactly on
//! the rasterizer's fixed-point grid, so identical meshes give zero flow
//! and integer translations shift flow by exact integers. That point is visible in the
//! reference when the reference raster at its pixel belongs to `f`, is
//! background, or is no nearer than the point's own depth minus
//! [`DEPTH_EPSILON`].

pub mod raster;

use std::io::Write;

use thiserror::Error;

pub use raster::{rasterize, RasterMap, NO_FACE};

use raster::{pixel_centre_fixed, to_fixed, SnappedTriangle, SUBPIXEL_BITS};

use crate::body::Mesh2D;
use crate::Scalar;

/// Self-visibility depth tolerance in model units.
pub const DEPTH_EPSILON: f64 = 1e-4;

/// Flow is rounded to multiples of `2^-FLOW_FRAC_BITS` px.
pub const FLOW_FRAC_BITS: u32 = 30;

/// `sum_k w_k * delta_k / area2` in pixels, from integer edge weights and
/// fixed-point vertex displacements, rounded half up on the flow grid.
/// Rounding is exact, so shifting every `delta` by an integer number of
/// pixels shifts the result by exactly that amount.
pub fn fixed_flow<T: Scalar>(w: [i64; 3], area2: i64, delta: [i64; 3]) -> T {
    let n: i128 = (0..3).map(|k| w[k] as i128 * delta[k] as i128).sum();
    let num = n << (FLOW_FRAC_BITS - SUBPIXEL_BITS);
    let den = area2 as i128;
    let q = (2 * num + den).div_euclid(2 * den);
    T::from_index(q as i64) / T::from_index(1i64 << FLOW_FRAC_BITS)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MotionError {
    #[error("reference and target meshes have different face lists")]
    FaceMismatch,
    #[error("reference and target meshes have different vertex counts")]
    VertexCountMismatch,
    #[error("raster is {got:?}, expected {expected:?}")]
    RasterSize { expected: (u32, u32), got: (u32, u32) },
}

/// Backward flow (`source = target + flow`) and binary occlusion.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionField<T> {
    pub width: u32,
    pub height: u32,
    pub flow: Vec<[T; 2]>,
    pub occlusion: Vec<T>,
}

impl<T: Scalar> MotionField<T> {
    pub fn identity(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            flow: vec![[T::zero(); 2]; n],
            occlusion: vec![T::one(); n],
        }
    }

    /// Two planes (u then v), row-major little-endian `f32`.
    pub fn write_flow_raw(&self, mut w: impl Write) -> std::io::Result<()> {
        for k in 0..2 {
            for f in &self.flow {
                w.write_all(&(f[k].to_f64_lossy() as f32).to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Binary PGM (P5), 255 = visible.
    pub fn write_occlusion_pgm(&self, mut w: impl Write) -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self
            .occlusion
            .iter()
            .map(|o| (o.to_f64_lossy().clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        w.write_all(&bytes)
    }
}

fn check_pair<T: Scalar>(reference: &Mesh2D<T>, target: &Mesh2D<T>) -> Result<(), MotionError> {
    if reference.points.len() != target.points.len() || reference.depth.len() != target.depth.len() {
        return Err(MotionError::VertexCountMismatch);
    }
    if !std::sync::Arc::ptr_eq(&reference.faces, &target.faces) && reference.faces != target.faces {
        return Err(MotionError::FaceMismatch);
    }
    Ok(())
}

pub fn dense_motion<T: Scalar>(
    reference: &Mesh2D<T>,
    target: &Mesh2D<T>,
    width: u32,
    height: u32,
) -> Result<MotionField<T>, MotionError> {
    check_pair(reference, target)?;
    let ref_raster = rasterize(reference, width, height);
    let tgt_raster = rasterize(target, width, height);
    dense_motion_with_rasters(reference, &ref_raster, target, &tgt_raster)
}

/// As [`dense_motion`] with both rasters precomputed.
pub fn dense_motion_with_rasters<T: Scalar>(
    reference: &Mesh2D<T>,
    ref_raster: &RasterMap<T>,
    target: &Mesh2D<T>,
    tgt_raster: &RasterMap<T>,
) -> Result<MotionField<T>, MotionError> {
    check_pair(reference, target)?;
    let (width, height) = (tgt_raster.width, tgt_raster.height);
    if (ref_raster.width, ref_raster.height) != (width, height) {
        return Err(MotionError::RasterSize {
            expected: (width, height),
            got: (ref_raster.width, ref_raster.height),
        });
    }
    let eps = T::lit(DEPTH_EPSILON);
    let half = T::lit(0.5);
    let ref_fixed: Vec<Option<[i64; 2]>> = reference
        .points
        .iter()
        .map(|p| Some([to_fixed(p[0])?, to_fixed(p[1])?]))
        .collect();
    let tgt_tris: Vec<Option<SnappedTriangle>> = target
        .faces
        .iter()
        .map(|f| SnappedTriangle::new(f.map(|i| target.points[i as usize])))
        .collect();
    let mut field = MotionField::identity(width, height);
    for y in 0..height {
        for x in 0..width {
            let idx = tgt_raster.index(x, y);
            let f = tgt_raster.face[idx];
            if f == NO_FACE {
                continue;
            }
            let b = tgt_raster.bary[idx];
            let face = reference.faces[f as usize].map(|i| i as usize);
            let lerp = |v: [T; 3]| v[0] + b[1] * (v[1] - v[0]) + b[2] * (v[2] - v[0]);
            let flow = tgt_tris[f as usize]
                .and_then(|tri| {
                    let w = tri.cover([pixel_centre_fixed(x), pixel_centre_fixed(y)])?;
                    let mut delta = [0i64; 3];
                    for k in 0..3 {
                        let r = ref_fixed[face[tri.order[k]]]?;
                        delta[k] = r[0] - tri.v[k][0];
                    }
                    let fx = fixed_flow::<T>(w, tri.area2, delta);
                    for k in 0..3 {
                        let r = ref_fixed[face[tri.order[k]]]?;
                        delta[k] = r[1] - tri.v[k][1];
                    }
                    Some([fx, fixed_flow::<T>(w, tri.area2, delta)])
                })
                .unwrap_or_else(|| {
                    let d = |k: usize| {
                        face.map(|i| reference.points[i][k] - target.points[i][k])
                    };
                    [lerp(d(0)), lerp(d(1))]
                });
            let src_depth = lerp(face.map(|i| reference.depth[i]));
            let sx = (T::from_u32(x).unwrap() + half + flow[0]).floor();
            let sy = (T::from_u32(y).unwrap() + half + flow[1]).floor();
            let visible = match (sx.to_i64(), sy.to_i64()) {
                (Some(qx), Some(qy))
                    if qx >= 0 && qy >= 0 && qx < width as i64 && qy < height as i64 =>
                {
                    let q = ref_raster.index(qx as u32, qy as u32);
                    let owner = ref_raster.face[q];
                    owner == NO_FACE || owner == f || ref_raster.depth[q] >= src_depth - eps
                }
                _ => false,
            };
            field.flow[idx] = flow;
            field.occlusion[idx] = if visible { T::one() } else { T::zero() };
        }
    }
    Ok(field)
}
