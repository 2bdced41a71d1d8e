use super::{Point3, TriangleMesh};
use crate::error::{Error, Result};

/// One RWG basis function: the interior edge plus its two supporting
/// triangles. The current flows out of the plus triangle, across the edge,
/// into the minus triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwgEdge {
    /// Edge endpoints, lower vertex index first.
    pub vertices: [usize; 2],
    pub length: f64,
    pub plus: usize,
    pub minus: usize,
    pub free_plus: usize,
    pub free_minus: usize,
    pub area_plus: f64,
    pub area_minus: f64,
}

/// Back-reference from a triangle to one of the basis functions it supports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleEdgeRef {
    pub edge: usize,
    /// +1 on the plus triangle, -1 on the minus triangle.
    pub sign: f64,
    pub free_vertex: usize,
}

/// RWG basis over every interior edge of a closed mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct RwgBasisSet {
    edges: Vec<RwgEdge>,
    by_triangle: Vec<Vec<TriangleEdgeRef>>,
}

impl RwgBasisSet {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[RwgEdge] {
        &self.edges
    }

    /// Basis functions supported on triangle `t` (three for a closed mesh).
    pub fn on_triangle(&self, t: usize) -> &[TriangleEdgeRef] {
        &self.by_triangle[t]
    }

    /// Evaluates `Σ I_b f_b(r)` at a point `r` inside triangle `t`.
    pub fn current_at<T>(&self, mesh: &TriangleMesh, coeffs: &[T], t: usize, r: &Point3) -> [T; 3]
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
    {
        let area = mesh.area(t);
        let mut j = [T::default(); 3];
        for e in &self.by_triangle[t] {
            let edge = &self.edges[e.edge];
            let rho = (r - mesh.vertices()[e.free_vertex]) * (e.sign * edge.length / (2.0 * area));
            for k in 0..3 {
                j[k] = j[k] + coeffs[e.edge] * rho[k];
            }
        }
        j
    }
}

/// One basis entry per interior edge, ordered by the sorted vertex pair;
/// the lower triangle index is the plus side.
pub fn build_rwg(mesh: &TriangleMesh) -> Result<RwgBasisSet> {
    let vertices = mesh.vertices();
    let mut edges = Vec::new();
    let mut by_triangle = vec![Vec::with_capacity(3); mesh.num_triangles()];
    let free_vertex = |t: usize, i: usize, j: usize| -> usize {
        *mesh.triangles()[t]
            .iter()
            .find(|&&v| v != i && v != j)
            .expect("triangle has a vertex off its own edge")
    };
    for ((i, j), uses) in mesh.edge_usage() {
        if uses.len() != 2 {
            return Err(Error::NonManifoldEdge(i, j, uses.len()));
        }
        let (plus, minus) = {
            let (a, b) = (uses[0].0, uses[1].0);
            (a.min(b), a.max(b))
        };
        if plus == minus {
            return Err(Error::InvalidMesh(format!(
                "edge ({i}, {j}) appears twice in triangle {plus}"
            )));
        }
        let edge = RwgEdge {
            vertices: [i, j],
            length: (vertices[i] - vertices[j]).norm(),
            plus,
            minus,
            free_plus: free_vertex(plus, i, j),
            free_minus: free_vertex(minus, i, j),
            area_plus: mesh.area(plus),
            area_minus: mesh.area(minus),
        };
        let index = edges.len();
        by_triangle[plus].push(TriangleEdgeRef {
            edge: index,
            sign: 1.0,
            free_vertex: edge.free_plus,
        });
        by_triangle[minus].push(TriangleEdgeRef {
            edge: index,
            sign: -1.0,
            free_vertex: edge.free_minus,
        });
        edges.push(edge);
    }
    Ok(RwgBasisSet { edges, by_triangle })
}
