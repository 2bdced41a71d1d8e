use std::collections::HashMap;

use super::{Point3, TriangleMesh};

const ICOSAHEDRON_FACES: [[usize; 3]; 20] = [
    [0, 11, 5],
    [0, 5, 1],
    [0, 1, 7],
    [0, 7, 10],
    [0, 10, 11],
    [1, 5, 9],
    [5, 11, 4],
    [11, 10, 2],
    [10, 7, 6],
    [7, 1, 8],
    [3, 9, 4],
    [3, 4, 2],
    [3, 2, 6],
    [3, 6, 8],
    [3, 8, 9],
    [4, 9, 5],
    [2, 4, 11],
    [6, 2, 10],
    [8, 6, 7],
    [9, 8, 1],
];

fn icosahedron_vertices() -> [Point3; 12] {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    [
        Point3::new(-1.0, t, 0.0),
        Point3::new(1.0, t, 0.0),
        Point3::new(-1.0, -t, 0.0),
        Point3::new(1.0, -t, 0.0),
        Point3::new(0.0, -1.0, t),
        Point3::new(0.0, 1.0, t),
        Point3::new(0.0, -1.0, -t),
        Point3::new(0.0, 1.0, -t),
        Point3::new(t, 0.0, -1.0),
        Point3::new(t, 0.0, 1.0),
        Point3::new(-t, 0.0, -1.0),
        Point3::new(-t, 0.0, 1.0),
    ]
}

/// Icosphere with `20·4^level` triangles: every triangle is split into four
/// at its edge midpoints `level` times, with new vertices pushed onto the
/// sphere after each pass.
pub fn generate_sphere(radius: f64, subdivision_level: u32) -> TriangleMesh {
    assert!(radius > 0.0, "sphere radius must be positive");
    let mut vertices: Vec<Point3> = icosahedron_vertices()
        .iter()
        .map(|v| v.normalize() * radius)
        .collect();
    let mut triangles: Vec<[usize; 3]> = ICOSAHEDRON_FACES.to_vec();
    for _ in 0..subdivision_level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for [a, b, c] in triangles {
            let mut mid = |i: usize, j: usize| -> usize {
                *midpoint.entry((i.min(j), i.max(j))).or_insert_with(|| {
                    vertices.push(((vertices[i] + vertices[j]) / 2.0).normalize() * radius);
                    vertices.len() - 1
                })
            };
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        triangles = next;
    }
    orient_outward(TriangleMesh {
        vertices,
        triangles,
    })
}

fn orient_outward(mut mesh: TriangleMesh) -> TriangleMesh {
    // the face table is not guaranteed outward; fix orientation once
    if mesh.normal(0).dot(&mesh.centroid(0)) < 0.0 {
        for t in &mut mesh.triangles {
            t.swap(1, 2);
        }
    }
    debug_assert!(mesh.validate().is_ok());
    mesh
}

/// Geodesic sphere with `20·frequency²` triangles. Vertices on shared
/// icosahedron edges are merged, so the result is a closed manifold with
/// `10·frequency² + 2` vertices.
pub fn generate_geodesic_sphere(radius: f64, frequency: usize) -> TriangleMesh {
    assert!(radius > 0.0, "sphere radius must be positive");
    assert!(frequency >= 1, "geodesic frequency must be at least 1");
    let n = frequency;
    let base = icosahedron_vertices();

    let mut vertices: Vec<Point3> = Vec::new();
    // canonical key: corner indices paired with integer barycentric weights,
    // sorted and with zero weights removed, so shared edges map to one vertex
    let mut index: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    let mut triangles = Vec::with_capacity(20 * n * n);

    for face in ICOSAHEDRON_FACES {
        let [a, b, c] = face;
        let mut vertex_at = |i: usize, j: usize| -> usize {
            // weight i on b, j on c, remainder on a
            let mut key: Vec<(usize, usize)> = [(a, n - i - j), (b, i), (c, j)]
                .into_iter()
                .filter(|&(_, w)| w > 0)
                .collect();
            key.sort_unstable();
            *index.entry(key).or_insert_with(|| {
                let p = (base[a] * (n - i - j) as f64 + base[b] * i as f64 + base[c] * j as f64)
                    / n as f64;
                vertices.push(p.normalize() * radius);
                vertices.len() - 1
            })
        };
        for i in 0..n {
            for j in 0..(n - i) {
                let v0 = vertex_at(i, j);
                let v1 = vertex_at(i + 1, j);
                let v2 = vertex_at(i, j + 1);
                triangles.push([v0, v1, v2]);
                if i + j + 1 < n {
                    let v3 = vertex_at(i + 1, j + 1);
                    triangles.push([v1, v3, v2]);
                }
            }
        }
    }

    orient_outward(TriangleMesh {
        vertices,
        triangles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn level_zero_is_icosahedron() {
        let m = generate_sphere(1.0, 0);
        assert_eq!(m.num_triangles(), 20);
        assert_eq!(m.num_vertices(), 12);
        assert_eq!(m.num_edges(), 30);
        assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn level_two_counts() {
        let m = generate_sphere(1.0, 2);
        assert_eq!(m.num_triangles(), 320);
        assert_eq!(m.num_vertices(), 162);
        assert_eq!(m.num_edges(), 480);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn all_faces_point_outward() {
        for level in 0..3 {
            let m = generate_sphere(2.0, level);
            for t in 0..m.num_triangles() {
                assert!(m.normal(t).dot(&m.centroid(t)) > 0.0);
            }
        }
    }

    #[test]
    fn chord_error_at_level_two() {
        // brute force: distance of every face centroid from the sphere
        let r = 0.25;
        let m = generate_sphere(r, 2);
        let worst = (0..m.num_triangles())
            .map(|t| r - m.centroid(t).norm())
            .fold(0.0, f64::max);
        assert!(worst < 0.02 * r, "max chord error {worst}");
        for v in m.vertices() {
            assert!((v.norm() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn area_converges_monotonically() {
        let r = 1.3;
        let exact = 4.0 * PI * r * r;
        let errors: Vec<f64> = (0..5)
            .map(|l| (generate_sphere(r, l).total_area() - exact).abs() / exact)
            .collect();
        assert!(errors[2] < 0.05, "level-2 area error {}", errors[2]);
        for w in errors.windows(2) {
            assert!(w[1] < w[0], "{errors:?}");
        }
    }

    #[test]
    fn geodesic_frequencies_are_closed() {
        for n in 1..7 {
            let m = generate_geodesic_sphere(1.0, n);
            assert_eq!(m.num_triangles(), 20 * n * n);
            assert_eq!(m.num_vertices(), 10 * n * n + 2);
            assert!(m.validate().is_ok());
        }
    }
}
