//! Simplified parametric body: shape-blended skeleton, forward kinematics,
//! rigid single-bone skinning and orthographic projection to mesh images.

pub mod math;
pub mod template;

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

pub use math::{rodrigues, Rigid};
pub use template::{build_template, template_tables, SkeletonTemplate, NODE_COUNT};

use crate::semantics::FullBodyParams;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BodyError {
    #[error("degenerate shape")]
    DegenerateShape,
    #[error("shape coefficient {0} is not finite")]
    NonFiniteShape(usize),
    #[error("face {face} references vertex {vertex} of {count}")]
    BadFaceIndex { face: usize, vertex: u32, count: usize },
    #[error("face {0} is degenerate")]
    DegenerateFace(usize),
}

/// Posed 3D triangle mesh with rigid bone binding.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyMesh<T> {
    pub vertices: Vec<[T; 3]>,
    pub faces: Arc<[[u32; 3]]>,
    pub bone_of_vertex: Vec<u8>,
}

impl<T: Scalar> BodyMesh<T> {
    pub fn validate(&self) -> Result<(), BodyError> {
        let count = self.vertices.len();
        for (face, f) in self.faces.iter().enumerate() {
            if let Some(&vertex) = f.iter().find(|&&v| v as usize >= count) {
                return Err(BodyError::BadFaceIndex { face, vertex, count });
            }
            let [a, b, c] = f.map(|i| self.vertices[i as usize]);
            if !(template::triangle_area(a, b, c) > T::zero()) {
                return Err(BodyError::DegenerateFace(face));
            }
        }
        Ok(())
    }

    /// Bone that owns face `f` (all three vertices share it).
    pub fn bone_of_face(&self, f: usize) -> usize {
        self.bone_of_vertex[self.faces[f][0] as usize] as usize
    }

    /// Wavefront OBJ text (`v` and 1-based `f` lines).
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
        }
        for f in self.faces.iter() {
            let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        s
    }
}

/// Projected mesh: pixel coordinates plus camera-space depth.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D<T> {
    pub points: Vec<[T; 2]>,
    /// Larger is farther.
    pub depth: Vec<T>,
    pub faces: Arc<[[u32; 3]]>,
}

/// World transforms of all 22 nodes.
pub fn forward_kinematics<T: Scalar>(
    full: &FullBodyParams<T>,
    template: &SkeletonTemplate<T>,
) -> [Rigid<T>; NODE_COUNT] {
    let mut world = untranslated_kinematics(full, template);
    for w in world.iter_mut() {
        w.trans = math::add(w.trans, full.trans);
    }
    world
}

/// Kinematics with the global translation left out; it is added last so a
/// pure translation moves every point by exactly `trans`.
fn untranslated_kinematics<T: Scalar>(
    full: &FullBodyParams<T>,
    template: &SkeletonTemplate<T>,
) -> [Rigid<T>; NODE_COUNT] {
    let mut world = [Rigid::identity(); NODE_COUNT];
    world[0] = Rigid {
        rot: rodrigues(full.rot),
        trans: template.rest_offset[0],
    };
    for i in 1..NODE_COUNT {
        let parent = template.parent[i].expect("non-root node has a parent");
        let local = Rigid {
            rot: rodrigues(full.body[i - 1]),
            trans: template.rest_offset[i],
        };
        world[i] = world[parent].compose(&local);
    }
    world
}

/// Rigid skinning: each vertex follows its bone's world transform.
pub fn pose_mesh<T: Scalar>(
    full: &FullBodyParams<T>,
    template: &SkeletonTemplate<T>,
    rest: &BodyMesh<T>,
) -> BodyMesh<T> {
    let world = untranslated_kinematics(full, template);
    let rest_joints = template.rest_joints();
    let vertices = rest
        .vertices
        .iter()
        .zip(&rest.bone_of_vertex)
        .map(|(&v, &b)| {
            let b = b as usize;
            math::add(world[b].apply(math::sub(v, rest_joints[b])), full.trans)
        })
        .collect();
    BodyMesh {
        vertices,
        faces: rest.faces.clone(),
        bone_of_vertex: rest.bone_of_vertex.clone(),
    }
}

/// Orthographic projection through the location box:
/// `u = (cx + w_box * x / 2) * width`, `v = (cy + h_box * y / 2) * height`.
pub fn project<T: Scalar>(mesh: &BodyMesh<T>, loc: &[T; 4], width: u32, height: u32) -> Mesh2D<T> {
    let half = T::lit(0.5);
    let (w, h) = (T::lit(width as f64), T::lit(height as f64));
    let [cx, cy, bw, bh] = *loc;
    let points = mesh
        .vertices
        .iter()
        .map(|v| [(cx + half * bw * v[0]) * w, (cy + half * bh * v[1]) * h])
        .collect();
    Mesh2D {
        points,
        depth: mesh.vertices.iter().map(|v| v[2]).collect(),
        faces: mesh.faces.clone(),
    }
}
