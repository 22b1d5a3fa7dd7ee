//! Z-buffered triangle rasterization on pixel centres.
//!
//! Vertices are snapped to a 1/256-pixel fixed-point grid so edge functions
//! are exact integers; the top-left rule then assigns every pixel centre on
//! a shared edge to exactly one of the two triangles.

use crate::body::Mesh2D;
use crate::Scalar;

pub const SUBPIXEL_BITS: u32 = 8;
const SUBPIXEL: i64 = 1 << SUBPIXEL_BITS;
/// Triangles with a vertex farther than this from the origin (in pixels)
/// are skipped.
pub const MAX_COORD_PX: f64 = (1u64 << 20) as f64;
pub const NO_FACE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct RasterMap<T> {
    pub width: u32,
    pub height: u32,
    /// Owning face per pixel, [`NO_FACE`] for background.
    pub face: Vec<u32>,
    /// Barycentrics in the face's own vertex order.
    pub bary: Vec<[T; 3]>,
    pub depth: Vec<T>,
}

impl<T: Scalar> RasterMap<T> {
    pub fn empty(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            face: vec![NO_FACE; n],
            bary: vec![[T::zero(); 3]; n],
            depth: vec![T::infinity(); n],
        }
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub fn face_at(&self, x: u32, y: u32) -> Option<u32> {
        match self.face[self.index(x, y)] {
            NO_FACE => None,
            f => Some(f),
        }
    }

    /// Inclusive pixel bounding box `(x0, y0, x1, y1)` of pixels whose face
    /// satisfies `keep`.
    pub fn bbox_where(&self, keep: impl Fn(u32) -> bool) -> Option<(u32, u32, u32, u32)> {
        let mut bb: Option<(u32, u32, u32, u32)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                let f = self.face[self.index(x, y)];
                if f != NO_FACE && keep(f) {
                    bb = Some(match bb {
                        None => (x, y, x, y),
                        Some((a, b, c, d)) => (a.min(x), b.min(y), c.max(x), d.max(y)),
                    });
                }
            }
        }
        bb
    }
}

/// Fixed-point pixel coordinate, or `None` when non-finite or out of range.
#[inline]
pub fn to_fixed<T: Scalar>(v: T) -> Option<i64> {
    let v = v.to_f64_lossy();
    if v.is_finite() && v.abs() <= MAX_COORD_PX {
        Some((v * SUBPIXEL as f64).round() as i64)
    } else {
        None
    }
}

#[inline]
pub fn pixel_centre_fixed(i: u32) -> i64 {
    i as i64 * SUBPIXEL + SUBPIXEL / 2
}

/// `(b - a) x (c - a)`; positive when `a, b, c` wind the way the rasterizer
/// normalizes triangles to.
#[inline]
pub fn edge(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> i64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Top-left tie rule for a directed edge of a positively wound triangle
/// (y pointing down).
#[inline]
pub fn is_top_left(a: [i64; 2], b: [i64; 2]) -> bool {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    dy < 0 || (dy == 0 && dx > 0)
}

/// A triangle snapped to fixed point and wound positively. `order[k]` is
/// the position in the original face of the `k`-th stored vertex.
#[derive(Debug, Clone, Copy)]
pub struct SnappedTriangle {
    pub v: [[i64; 2]; 3],
    pub order: [usize; 3],
    pub area2: i64,
}

impl SnappedTriangle {
    pub fn new<T: Scalar>(pts: [[T; 2]; 3]) -> Option<Self> {
        let mut v = [[0i64; 2]; 3];
        for (dst, p) in v.iter_mut().zip(pts) {
            *dst = [to_fixed(p[0])?, to_fixed(p[1])?];
        }
        let mut order = [0, 1, 2];
        let mut area2 = edge(v[0], v[1], v[2]);
        if area2 == 0 {
            return None;
        }
        if area2 < 0 {
            v.swap(1, 2);
            order.swap(1, 2);
            area2 = -area2;
        }
        Some(Self { v, order, area2 })
    }

    /// Edge weights at a fixed-point sample when it is covered.
    #[inline]
    pub fn cover(&self, p: [i64; 2]) -> Option<[i64; 3]> {
        let [a, b, c] = self.v;
        let w = [edge(b, c, p), edge(c, a, p), edge(a, b, p)];
        let edges = [(b, c), (c, a), (a, b)];
        for k in 0..3 {
            if w[k] < 0 || (w[k] == 0 && !is_top_left(edges[k].0, edges[k].1)) {
                return None;
            }
        }
        Some(w)
    }

    /// Barycentrics in the original face vertex order.
    pub fn barycentric<T: Scalar>(&self, w: [i64; 3]) -> [T; 3] {
        let area = T::from_index(self.area2);
        let mut out = [T::zero(); 3];
        for k in 0..3 {
            out[self.order[k]] = T::from_index(w[k]) / area;
        }
        out
    }

    /// Inclusive pixel range possibly covered, clipped to the image.
    pub fn pixel_bounds(&self, width: u32, height: u32) -> Option<(u32, u32, u32, u32)> {
        let lo = |k: usize| self.v.iter().map(|p| p[k]).min().unwrap();
        let hi = |k: usize| self.v.iter().map(|p| p[k]).max().unwrap();
        // Pixel i has its centre at (i + 1/2) * SUBPIXEL.
        let first = |m: i64| (m - SUBPIXEL / 2).div_euclid(SUBPIXEL);
        let last = |m: i64| (m - SUBPIXEL / 2).div_euclid(SUBPIXEL) + 1;
        let x0 = first(lo(0)).max(0);
        let y0 = first(lo(1)).max(0);
        let x1 = last(hi(0)).min(width as i64 - 1);
        let y1 = last(hi(1)).min(height as i64 - 1);
        (x0 <= x1 && y0 <= y1).then_some((x0 as u32, y0 as u32, x1 as u32, y1 as u32))
    }
}

/// Rasterizes all faces; the nearest (smallest depth) face wins, ties keep
/// the lower face index.
pub fn rasterize<T: Scalar>(mesh: &Mesh2D<T>, width: u32, height: u32) -> RasterMap<T> {
    let mut map = RasterMap::empty(width, height);
    for (fi, face) in mesh.faces.iter().enumerate() {
        let pts = face.map(|i| mesh.points[i as usize]);
        let depths = face.map(|i| mesh.depth[i as usize]);
        let Some(tri) = SnappedTriangle::new(pts) else {
            continue;
        };
        let Some((x0, y0, x1, y1)) = tri.pixel_bounds(width, height) else {
            continue;
        };
        for y in y0..=y1 {
            let py = pixel_centre_fixed(y);
            for x in x0..=x1 {
                let Some(w) = tri.cover([pixel_centre_fixed(x), py]) else {
                    continue;
                };
                let b = tri.barycentric::<T>(w);
                let z = depths[0] + b[1] * (depths[1] - depths[0]) + b[2] * (depths[2] - depths[0]);
                let idx = map.index(x, y);
                if z < map.depth[idx] {
                    map.depth[idx] = z;
                    map.face[idx] = fi as u32;
                    map.bary[idx] = b;
                }
            }
        }
    }
    map
}
