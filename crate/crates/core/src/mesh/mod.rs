//! Closed triangulated PEC surfaces: ingestion, icosphere generation and the
//! RWG interior-edge basis built over them.

mod io;
mod rwg;
mod sphere;

pub use io::{load_mesh, parse_mesh};
pub use rwg::{build_rwg, RwgBasisSet, RwgEdge, TriangleEdgeRef};
pub use sphere::{generate_geodesic_sphere, generate_sphere};

use std::collections::BTreeMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Point3 = Vector3<f64>;

/// Triangles smaller than this are treated as collapsed.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// A closed, outward-oriented triangle surface.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Builds a mesh and checks every invariant (index range, area, closed
    /// orientable manifold).
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = TriangleMesh {
            vertices,
            triangles,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Point3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn centroid(&self, t: usize) -> Point3 {
        let [a, b, c] = self.corners(t);
        (a + b + c) / 3.0
    }

    /// Unit normal following the counterclockwise vertex order.
    pub fn normal(&self, t: usize) -> Point3 {
        let [a, b, c] = self.corners(t);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.area(t)).sum()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.edge_usage().len()
    }

    /// `N_n − E + N_p`; equals 2 for a closed genus-0 surface.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_triangles() as i64
    }

    /// Longest edge over all triangles.
    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(i, j)| (self.vertices[i] - self.vertices[j]).norm())
            .fold(0.0, f64::max)
    }

    /// Directed uses of every undirected edge, keyed by the sorted vertex pair.
    /// Each use records the triangle and whether it traverses the edge from the
    /// lower to the higher vertex index.
    pub(crate) fn edge_usage(&self) -> BTreeMap<(usize, usize), Vec<(usize, bool)>> {
        let mut map: BTreeMap<(usize, usize), Vec<(usize, bool)>> = BTreeMap::new();
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            for (i, j) in [(a, b), (b, c), (c, a)] {
                let key = (i.min(j), i.max(j));
                map.entry(key).or_default().push((t, i < j));
            }
        }
        map
    }

    fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if self.triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references vertex {bad}, only {n} vertices"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} repeats a vertex: {tri:?}"
                )));
            }
            let area = self.area(t);
            if !(area > MIN_TRIANGLE_AREA) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} is degenerate (area {area:e} m^2)"
                )));
            }
        }
        for (&(i, j), uses) in &self.edge_usage() {
            if uses.len() != 2 {
                return Err(Error::NonManifoldEdge(i, j, uses.len()));
            }
            if uses[0].1 == uses[1].1 {
                return Err(Error::InvalidMesh(format!(
                    "edge ({i}, {j}) traversed in the same direction by triangles {} and {}; \
                     inconsistent orientation",
                    uses[0].0, uses[1].0
                )));
            }
        }
        Ok(())
    }
}
