//! Run configuration: geometry, frequency, solver settings and experiment
//! options, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid::HybridConfig;
use crate::mesh::{generate_geodesic_sphere, generate_sphere, load_mesh, TriangleMesh};
use crate::mom::{BackgroundMedium, QuadratureOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Solve,
    Rcs,
    Mie,
    Bench,
    Compare,
    CaseTable,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::Rcs => "rcs",
            Experiment::Mie => "mie",
            Experiment::Bench => "bench",
            Experiment::Compare => "compare",
            Experiment::CaseTable => "case-table",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "solve" => Ok(Experiment::Solve),
            "rcs" => Ok(Experiment::Rcs),
            "mie" => Ok(Experiment::Mie),
            "bench" => Ok(Experiment::Bench),
            "compare" => Ok(Experiment::Compare),
            "case-table" => Ok(Experiment::CaseTable),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

/// Scatterer surface. The tag makes the source unique by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Geometry {
    /// Icosphere with `20·4^level` triangles.
    Sphere { radius: f64, level: u32 },
    /// Geodesic sphere with `20·frequency²` triangles.
    Geodesic { radius: f64, frequency: usize },
    /// Mesh file. A `radius` marks it as a sphere so the Mie reference
    /// applies.
    Mesh {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        let radius = match self {
            Geometry::Sphere { radius, .. } | Geometry::Geodesic { radius, .. } => Some(*radius),
            Geometry::Mesh { radius, .. } => *radius,
        };
        if let Some(r) = radius {
            if !(r > 0.0) {
                return Err(Error::Config(format!("sphere radius must be positive, got {r}")));
            }
        }
        if let Geometry::Geodesic { frequency: 0, .. } = self {
            return Err(Error::Config("geodesic frequency must be at least 1".into()));
        }
        Ok(())
    }

    /// Resolves relative mesh paths against `base`.
    pub fn build(&self, base: Option<&Path>) -> Result<TriangleMesh> {
        self.validate()?;
        match self {
            Geometry::Sphere { radius, level } => Ok(generate_sphere(*radius, *level)),
            Geometry::Geodesic { radius, frequency } => Ok(generate_geodesic_sphere(*radius, *frequency)),
            Geometry::Mesh { path, .. } => {
                let full = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                load_mesh(full)
            }
        }
    }

    /// Radius when the surface is a sphere.
    pub fn sphere_radius(&self) -> Option<f64> {
        match self {
            Geometry::Sphere { radius, .. } | Geometry::Geodesic { radius, .. } => Some(*radius),
            Geometry::Mesh { radius, .. } => *radius,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Geometry::Sphere { radius, level } => format!("icosphere(r={radius},level={level})"),
            Geometry::Geodesic { radius, frequency } => format!("geodesic(r={radius},f={frequency})"),
            Geometry::Mesh { path, .. } => format!("mesh({})", path.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub sizes: Vec<Geometry>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: (2..=5)
                .map(|frequency| Geometry::Geodesic { radius: 1.0, frequency })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaseTableConfig {
    /// Case numbers (1–12) to run; all when empty.
    pub cases: Vec<usize>,
    /// Exterior-step cap applied to every case.
    pub max_exterior: usize,
}

impl Default for CaseTableConfig {
    fn default() -> Self {
        Self {
            cases: Vec::new(),
            max_exterior: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_experiment")]
    pub experiment: Experiment,
    /// Hz.
    pub frequency: f64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Concurrent configurations for `bench` and `case-table`.
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub geometry: Geometry,
    #[serde(default)]
    pub medium: BackgroundMedium,
    #[serde(default)]
    pub quadrature: QuadratureOrder,
    #[serde(default)]
    pub solver: HybridConfig,
    #[serde(default)]
    pub bench: BenchConfig,
    #[serde(default)]
    pub case_table: CaseTableConfig,
    /// Directory that relative mesh paths refer to; set by [`RunConfig::load`].
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_experiment() -> Experiment {
    Experiment::Solve
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_workers() -> usize {
    1
}

impl RunConfig {
    /// Sphere of `radius` at `level` with default solver settings.
    pub fn sphere(radius: f64, level: u32, frequency: f64) -> Self {
        RunConfig {
            experiment: Experiment::Solve,
            frequency,
            output: default_output(),
            workers: 1,
            geometry: Geometry::Sphere { radius, level },
            medium: BackgroundMedium::default(),
            quadrature: QuadratureOrder::default(),
            solver: HybridConfig::default(),
            bench: BenchConfig::default(),
            case_table: CaseTableConfig::default(),
            base_dir: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::Config(format!("frequency must be positive, got {}", self.frequency)));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        BackgroundMedium::new(self.medium.permittivity, self.medium.permeability)?;
        self.geometry.validate()?;
        for g in &self.bench.sizes {
            g.validate()?;
        }
        if let Some(c) = self.case_table.cases.iter().find(|c| !(1..=12).contains(*c)) {
            return Err(Error::Config(format!("case {c} is not in 1..=12")));
        }
        if self.case_table.max_exterior == 0 {
            return Err(Error::Config("case-table max_exterior must be at least 1".into()));
        }
        self.solver.validate()
    }

    pub fn build_mesh(&self) -> Result<TriangleMesh> {
        self.geometry.build(self.base_dir.as_deref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::InnerSolver;
    use crate::precond::PreconditionerKind;

    #[test]
    fn parses_minimal_and_full_configs() {
        let cfg = RunConfig::from_toml(
            r#"
            frequency = 3e8
            [geometry]
            kind = "sphere"
            radius = 1.0
            level = 2
            "#,
        )
        .unwrap();
        assert_eq!(cfg.experiment, Experiment::Solve);
        assert_eq!(cfg.solver, HybridConfig::default());

        let cfg = RunConfig::from_toml(
            r#"
            experiment = "case-table"
            frequency = 1e8
            workers = 3
            quadrature = 7
            [geometry]
            kind = "mesh"
            path = "flower.mesh"
            [solver]
            inner = "hhl"
            n_sub = 4
            precond = { kind = "identity" }
            [solver.hhl]
            clock_qubits = 8
            [solver.noise]
            probability = 0.2
            "#,
        )
        .unwrap();
        assert_eq!(cfg.experiment, Experiment::CaseTable);
        assert_eq!(cfg.solver.inner, InnerSolver::Hhl);
        assert_eq!(cfg.solver.precond, PreconditionerKind::Identity);
        assert_eq!(cfg.solver.hhl.clock_qubits, 8);
        assert_eq!(cfg.quadrature, QuadratureOrder::P7);
        assert_eq!(cfg.geometry.sphere_radius(), None);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = RunConfig::sphere(0.5, 1, 2e8);
        cfg.solver.precond = PreconditionerKind::ilut(1e-2);
        cfg.case_table.cases = vec![1, 8];
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_invalid_configs() {
        let bad = [
            "frequency = 0\n[geometry]\nkind = \"sphere\"\nradius = 1.0\nlevel = 1",
            "frequency = 1e8\n[geometry]\nkind = \"sphere\"\nradius = -1.0\nlevel = 1",
            "frequency = 1e8\n[geometry]\nkind = \"sphere\"\nradius = 1.0\nlevel = 1\npath = \"x\"",
            "frequency = 1e8",
            "frequency = 1e8\nworkers = 0\n[geometry]\nkind = \"sphere\"\nradius = 1.0\nlevel = 1",
            "frequency = 1e8\n[geometry]\nkind = \"sphere\"\nradius = 1.0\nlevel = 1\n[solver]\nn_sub = 6",
            "frequency = 1e8\n[geometry]\nkind = \"sphere\"\nradius = 1.0\nlevel = 1\n[case_table]\ncases = [13]",
            "frequency = 1e8\nbogus = 1\n[geometry]\nkind = \"sphere\"\nradius = 1.0\nlevel = 1",
        ];
        for text in bad {
            assert!(RunConfig::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in [
            Experiment::Solve,
            Experiment::Rcs,
            Experiment::Mie,
            Experiment::Bench,
            Experiment::Compare,
            Experiment::CaseTable,
        ] {
            assert_eq!(e.as_str().parse::<Experiment>().unwrap(), e);
        }
    }
}
