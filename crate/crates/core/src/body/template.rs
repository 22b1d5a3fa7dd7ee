//! The fixed skeleton template and its shape blending.
//!
//! Model axes: x to the subject's left (image right), y down, z away from
//! the camera. The rest T-pose spans y in [-1, 1] with the pelvis at the
//! origin.

use std::sync::Arc;

use serde::Serialize;

use super::math::{add, cross, norm, scale, sub, Vec3};
use super::{BodyError, BodyMesh};
use crate::semantics::SHAPE_DIM;
use crate::Scalar;

pub const NODE_COUNT: usize = 22;
pub const RING_VERTICES: usize = 8;
pub const RING_FRACTIONS: [f64; 2] = [0.25, 0.75];
pub const VERTICES_PER_BONE: usize = 2 * RING_VERTICES + 2;
pub const FACES_PER_BONE: usize = 4 * RING_VERTICES;
pub const VERTEX_COUNT: usize = NODE_COUNT * VERTICES_PER_BONE;
pub const FACE_COUNT: usize = NODE_COUNT * FACES_PER_BONE;
/// Bone multipliers at or below this are rejected.
pub const MIN_MULTIPLIER: f64 = 0.05;

pub const JOINT_NAMES: [&str; NODE_COUNT] = [
    "pelvis", "l_hip", "r_hip", "spine", "l_knee", "r_knee", "chest", "l_ankle", "r_ankle",
    "l_collar", "r_collar", "l_shoulder", "r_shoulder", "l_elbow", "r_elbow", "neck", "head",
    "jaw", "l_wrist", "r_wrist", "l_hand", "r_hand",
];

pub const PARENTS: [i32; NODE_COUNT] = [
    -1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 6, 9, 10, 11, 12, 6, 15, 16, 13, 14, 18, 19,
];

/// Child position in the parent frame at rest, shape zero.
pub const REST_OFFSETS: [[f64; 3]; NODE_COUNT] = [
    [0.0, 0.0, 0.0],
    [0.09, 0.06, 0.0],
    [-0.09, 0.06, 0.0],
    [0.0, -0.20, 0.0],
    [0.0, 0.40, 0.0],
    [0.0, 0.40, 0.0],
    [0.0, -0.22, 0.0],
    [0.0, 0.42, 0.0],
    [0.0, 0.42, 0.0],
    [0.07, -0.10, 0.0],
    [-0.07, -0.10, 0.0],
    [0.12, 0.0, 0.0],
    [-0.12, 0.0, 0.0],
    [0.26, 0.0, 0.0],
    [-0.26, 0.0, 0.0],
    [0.0, -0.14, 0.0],
    [0.0, -0.12, 0.0],
    [0.0, 0.05, -0.05],
    [0.24, 0.0, 0.0],
    [-0.24, 0.0, 0.0],
    [0.08, 0.0, 0.0],
    [-0.08, 0.0, 0.0],
];

/// The segment of node `i` runs from joint `i` to joint `TIP_TARGET[i]`,
/// or, where the target is `i` itself, along `LEAF_TIPS[i]`.
pub const TIP_TARGET: [usize; NODE_COUNT] = [
    3, 4, 5, 6, 7, 8, 15, 7, 8, 11, 12, 13, 14, 18, 19, 16, 16, 17, 20, 21, 20, 21,
];

pub const LEAF_TIPS: [[f64; 3]; NODE_COUNT] = {
    let mut t = [[0.0; 3]; NODE_COUNT];
    t[7] = [0.0, 0.12, -0.10];
    t[8] = [0.0, 0.12, -0.10];
    t[16] = [0.0, -0.32, 0.0];
    t[17] = [0.0, 0.04, -0.04];
    t[20] = [0.10, 0.0, 0.0];
    t[21] = [-0.10, 0.0, 0.0];
    t
};

pub const BONE_RADII: [f64; NODE_COUNT] = [
    0.10, 0.065, 0.065, 0.09, 0.05, 0.05, 0.11, 0.04, 0.04, 0.045, 0.045, 0.045, 0.045, 0.038,
    0.038, 0.045, 0.10, 0.035, 0.03, 0.03, 0.035, 0.035,
];

/// Shape coefficient that scales bone radii instead of lengths.
pub const RADIUS_COEFF: usize = 9;

/// Length basis `B`: `m_b = 1 + (B * shape)_b`. Columns: 0 overall scale,
/// 1 legs, 2 arms, 3 spine, 4 neck/head, 5 hands, 6 hip width,
/// 7 shoulder width, 8 shins, 9 unused here (radii).
pub const SHAPE_BASIS: [[f64; SHAPE_DIM]; NODE_COUNT] = {
    let mut b = [[0.0; SHAPE_DIM]; NODE_COUNT];
    let mut i = 0;
    while i < NODE_COUNT {
        b[i][0] = 1.0;
        i += 1;
    }
    let groups: [(usize, &[usize]); 8] = [
        (1, &[4, 5, 7, 8]),
        (2, &[13, 14, 18, 19]),
        (3, &[3, 6]),
        (4, &[15, 16, 17]),
        (5, &[20, 21]),
        (6, &[1, 2]),
        (7, &[9, 10, 11, 12]),
        (8, &[7, 8]),
    ];
    let mut g = 0;
    while g < groups.len() {
        let (col, nodes) = groups[g];
        let mut k = 0;
        while k < nodes.len() {
            b[nodes[k]][col] = 1.0;
            k += 1;
        }
        g += 1;
    }
    b
};

/// Nodes whose subtree is driven by the head-pose semantics.
pub const HEAD_NODES: [usize; 3] = [15, 16, 17];

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonTemplate<T> {
    pub parent: [Option<usize>; NODE_COUNT],
    pub rest_offset: [Vec3<T>; NODE_COUNT],
    /// Segment end relative to the joint, in the joint frame.
    pub tip: [Vec3<T>; NODE_COUNT],
    pub radius: [T; NODE_COUNT],
}

impl<T: Scalar> SkeletonTemplate<T> {
    /// World joint positions at rest.
    pub fn rest_joints(&self) -> [Vec3<T>; NODE_COUNT] {
        let mut out = [[T::zero(); 3]; NODE_COUNT];
        for i in 0..NODE_COUNT {
            out[i] = match self.parent[i] {
                Some(p) => add(out[p], self.rest_offset[i]),
                None => self.rest_offset[i],
            };
        }
        out
    }

    /// True if `node` lies in the subtree rooted at `root`.
    pub fn in_subtree(&self, node: usize, root: usize) -> bool {
        let mut n = Some(node);
        while let Some(i) = n {
            if i == root {
                return true;
            }
            n = self.parent[i];
        }
        false
    }
}

/// Per-node length multipliers for a shape vector.
pub fn bone_multipliers<T: Scalar>(shape: &[T; SHAPE_DIM]) -> [T; NODE_COUNT] {
    core::array::from_fn(|b| {
        SHAPE_BASIS[b]
            .iter()
            .zip(shape)
            .fold(T::one(), |acc, (&w, &s)| acc + T::lit(w) * s)
    })
}

/// Builds the shaped skeleton and its rest mesh.
pub fn build_template<T: Scalar>(
    shape: &[T; SHAPE_DIM],
) -> Result<(SkeletonTemplate<T>, BodyMesh<T>), BodyError> {
    if let Some(i) = shape.iter().position(|s| !s.is_finite()) {
        return Err(BodyError::NonFiniteShape(i));
    }
    let m = bone_multipliers(shape);
    let radius_mul = T::one() + shape[RADIUS_COEFF];
    let floor = T::lit(MIN_MULTIPLIER);
    if m.iter().any(|&v| v <= floor) || radius_mul <= floor {
        return Err(BodyError::DegenerateShape);
    }
    let lit3 = |v: [f64; 3]| v.map(T::lit);
    let rest_offset: [Vec3<T>; NODE_COUNT] =
        core::array::from_fn(|i| scale(lit3(REST_OFFSETS[i]), m[i]));
    let tip = core::array::from_fn(|i| match TIP_TARGET[i] {
        t if t == i => scale(lit3(LEAF_TIPS[i]), m[i]),
        t => rest_offset[t],
    });
    let template = SkeletonTemplate {
        parent: core::array::from_fn(|i| usize::try_from(PARENTS[i]).ok()),
        rest_offset,
        tip,
        radius: core::array::from_fn(|i| T::lit(BONE_RADII[i]) * radius_mul),
    };
    let mesh = build_rest_mesh(&template);
    Ok((template, mesh))
}

fn ring_basis<T: Scalar>(axis: Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    let helper = if axis[2].abs() < T::lit(0.9) {
        [T::zero(), T::zero(), T::one()]
    } else {
        [T::one(), T::zero(), T::zero()]
    };
    let u = cross(axis, helper);
    let u = scale(u, T::one() / norm(u));
    let w = cross(axis, u);
    (u, w)
}

/// Shared face list of the procedural mesh (independent of shape).
pub fn template_faces() -> Vec<[u32; 3]> {
    let mut faces = Vec::with_capacity(FACE_COUNT);
    for b in 0..NODE_COUNT {
        let base = (b * VERTICES_PER_BONE) as u32;
        let start = base;
        let r0 = |k: usize| base + 1 + (k % RING_VERTICES) as u32;
        let r1 = |k: usize| base + 1 + (RING_VERTICES + k % RING_VERTICES) as u32;
        let end = base + VERTICES_PER_BONE as u32 - 1;
        for k in 0..RING_VERTICES {
            faces.push([start, r0(k + 1), r0(k)]);
        }
        for k in 0..RING_VERTICES {
            faces.push([r0(k), r0(k + 1), r1(k + 1)]);
            faces.push([r0(k), r1(k + 1), r1(k)]);
        }
        for k in 0..RING_VERTICES {
            faces.push([end, r1(k), r1(k + 1)]);
        }
    }
    faces
}

fn build_rest_mesh<T: Scalar>(template: &SkeletonTemplate<T>) -> BodyMesh<T> {
    let joints = template.rest_joints();
    let mut vertices = Vec::with_capacity(VERTEX_COUNT);
    let mut bone_of_vertex = Vec::with_capacity(VERTEX_COUNT);
    for b in 0..NODE_COUNT {
        let start = joints[b];
        let seg = template.tip[b];
        let len = norm(seg);
        let axis = scale(seg, T::one() / len);
        let (u, w) = ring_basis(axis);
        vertices.push(start);
        for f in RING_FRACTIONS {
            let centre = add(start, scale(seg, T::lit(f)));
            for k in 0..RING_VERTICES {
                let theta = T::lit(2.0 * core::f64::consts::PI * k as f64 / RING_VERTICES as f64);
                let (s, c) = theta.sin_cos();
                let off = add(scale(u, c * template.radius[b]), scale(w, s * template.radius[b]));
                vertices.push(add(centre, off));
            }
        }
        vertices.push(add(start, seg));
        bone_of_vertex.extend(std::iter::repeat(b as u8).take(VERTICES_PER_BONE));
    }
    BodyMesh {
        vertices,
        faces: Arc::from(template_faces()),
        bone_of_vertex,
    }
}

/// Published template tables.
#[derive(Debug, Clone, Serialize)]
pub struct TemplateTables {
    pub joint_names: Vec<&'static str>,
    pub parent: Vec<i32>,
    pub rest_offset: Vec<[f64; 3]>,
    pub tip_target: Vec<usize>,
    pub leaf_tip: Vec<[f64; 3]>,
    pub bone_radius: Vec<f64>,
    pub shape_basis: Vec<[f64; SHAPE_DIM]>,
    pub radius_coefficient: usize,
    pub ring_vertices: usize,
    pub ring_fractions: [f64; 2],
    pub vertex_count: usize,
    pub face_count: usize,
}

pub fn template_tables() -> TemplateTables {
    TemplateTables {
        joint_names: JOINT_NAMES.to_vec(),
        parent: PARENTS.to_vec(),
        rest_offset: REST_OFFSETS.to_vec(),
        tip_target: TIP_TARGET.to_vec(),
        leaf_tip: LEAF_TIPS.to_vec(),
        bone_radius: BONE_RADII.to_vec(),
        shape_basis: SHAPE_BASIS.to_vec(),
        radius_coefficient: RADIUS_COEFF,
        ring_vertices: RING_VERTICES,
        ring_fractions: RING_FRACTIONS,
        vertex_count: VERTEX_COUNT,
        face_count: FACE_COUNT,
    }
}

pub(crate) fn triangle_area<T: Scalar>(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> T {
    norm(cross(sub(b, a), sub(c, a))) / T::lit(2.0)
}
