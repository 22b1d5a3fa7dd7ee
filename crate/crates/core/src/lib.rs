//! Interactive semantic human-video codec.
//!
//! Each inter frame is carried as 31 semantic parameters (7 signaled joint
//! rotations, global translation and rotation, and a location box). The
//! decoder rebuilds a parametric body mesh for the key frame and each inter
//! frame, derives dense backward flow and occlusion from the mesh
//! correspondence, and warps the key frame. Decoded semantics can be edited
//! before synthesis.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the `f64` instantiation used by the tools.

pub mod body;
pub mod codec;
pub mod motion;
mod scalar;
pub mod semantics;
pub mod warp;

pub use scalar::Scalar;

pub use body::{BodyError, BodyMesh, Mesh2D};
pub use codec::{CodecError, CodedSequence, QuantConfig};
pub use motion::{MotionError, MotionField, RasterMap};
pub use semantics::{
    apply_edit, merge_params, split_full_params, EditCommand, EditMode, EditTarget,
    FullBodyParams, KeyDerivedParams, SemanticVector, SemanticsError, SequenceDocument,
};
pub use warp::{Image, PipelineError, Renderer};

pub type Semantics = SemanticVector<f64>;
pub type FullParams = FullBodyParams<f64>;
pub type DerivedParams = KeyDerivedParams<f64>;
pub type Edit = EditCommand<f64>;
pub type Mesh = BodyMesh<f64>;
pub type Mesh2d = Mesh2D<f64>;
pub type Motion = MotionField<f64>;
pub type Raster = RasterMap<f64>;
pub type FrameRenderer = Renderer<f64>;

pub type Semantics32 = SemanticVector<f32>;
pub type FullParams32 = FullBodyParams<f32>;
pub type FrameRenderer32 = Renderer<f32>;
