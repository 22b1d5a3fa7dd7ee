use rayon::prelude::*;
use thiserror::Error;

use super::{warp, Image, ImageError};
use crate::body::{build_template, pose_mesh, project, BodyError, BodyMesh, Mesh2D, SkeletonTemplate};
use crate::codec::{decode_sequence, CodecError, CodedSequence};
use crate::motion::{dense_motion_with_rasters, rasterize, MotionField, RasterMap};
use crate::semantics::{
    merge_params, split_full_params, FullBodyParams, KeyDerivedParams, SemanticVector,
    SemanticsError,
};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("key frame dimensions mismatch: image is {image:?}, stream is {stream:?}")]
    KeyDimensionMismatch { image: (u32, u32), stream: (u32, u32) },
}

/// Decoder-side synthesis state for one sequence: the key image, its mesh
/// image and raster, and the parameters recovered from the key frame.
#[derive(Debug, Clone)]
pub struct Renderer<T> {
    width: u32,
    height: u32,
    key_image: Image,
    key_params: FullBodyParams<T>,
    key_semantics: SemanticVector<T>,
    derived: KeyDerivedParams<T>,
    template: SkeletonTemplate<T>,
    rest: BodyMesh<T>,
    key_mesh: Mesh2D<T>,
    key_raster: RasterMap<T>,
}

impl<T: Scalar> Renderer<T> {
    pub fn new(key_params: FullBodyParams<T>, key_image: Image) -> Result<Self, PipelineError> {
        let (key_semantics, derived) = split_full_params(&key_params)?;
        let (template, rest) = build_template(&derived.shape)?;
        let (width, height) = (key_image.width, key_image.height);
        let key_mesh = project(
            &pose_mesh(&key_params, &template, &rest),
            &key_params.loc,
            width,
            height,
        );
        let key_raster = rasterize(&key_mesh, width, height);
        Ok(Self {
            width,
            height,
            key_image,
            key_params,
            key_semantics,
            derived,
            template,
            rest,
            key_mesh,
            key_raster,
        })
    }

    /// Builds a renderer from a coded sequence's key payload and parameters.
    pub fn from_coded(cs: &CodedSequence) -> Result<(Self, Vec<SemanticVector<T>>), PipelineError> {
        let decoded = decode_sequence::<T>(cs)?;
        let key_image = Image::decode_png(&decoded.key_payload)?;
        let stream = (cs.header.width as u32, cs.header.height as u32);
        if (key_image.width, key_image.height) != stream {
            return Err(PipelineError::KeyDimensionMismatch {
                image: (key_image.width, key_image.height),
                stream,
            });
        }
        Ok((Self::new(decoded.key_params, key_image)?, decoded.frames))
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn key_image(&self) -> &Image {
        &self.key_image
    }

    pub fn key_params(&self) -> &FullBodyParams<T> {
        &self.key_params
    }

    pub fn key_semantics(&self) -> &SemanticVector<T> {
        &self.key_semantics
    }

    pub fn derived(&self) -> &KeyDerivedParams<T> {
        &self.derived
    }

    pub fn template(&self) -> &SkeletonTemplate<T> {
        &self.template
    }

    pub fn key_mesh(&self) -> &Mesh2D<T> {
        &self.key_mesh
    }

    pub fn key_raster(&self) -> &RasterMap<T> {
        &self.key_raster
    }

    /// Posed 3D mesh for an inter frame.
    pub fn target_body(&self, sem: &SemanticVector<T>) -> BodyMesh<T> {
        pose_mesh(&merge_params(sem, &self.derived), &self.template, &self.rest)
    }

    pub fn target_mesh(&self, sem: &SemanticVector<T>) -> Mesh2D<T> {
        project(&self.target_body(sem), &sem.loc, self.width, self.height)
    }

    pub fn target_raster(&self, sem: &SemanticVector<T>) -> RasterMap<T> {
        rasterize(&self.target_mesh(sem), self.width, self.height)
    }

    pub fn motion(&self, sem: &SemanticVector<T>) -> MotionField<T> {
        let target = self.target_mesh(sem);
        let raster = rasterize(&target, self.width, self.height);
        dense_motion_with_rasters(&self.key_mesh, &self.key_raster, &target, &raster)
            .expect("meshes share the template face list")
    }

    pub fn render(&self, sem: &SemanticVector<T>) -> Image {
        warp(&self.key_image, &self.motion(sem)).expect("motion field matches key image")
    }

    /// Renders frames in parallel; output order follows input order.
    pub fn render_all(&self, frames: &[SemanticVector<T>]) -> Vec<Image> {
        frames.par_iter().map(|f| self.render(f)).collect()
    }
}

/// Decodes a coded sequence and synthesizes every inter frame.
pub fn reconstruct_sequence<T: Scalar>(cs: &CodedSequence) -> Result<Vec<Image>, PipelineError> {
    let (renderer, frames) = Renderer::<T>::from_coded(cs)?;
    Ok(renderer.render_all(&frames))
}
