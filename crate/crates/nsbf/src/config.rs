//! JSON run configurations for the `nsbf` command line tool.
//!
//! A config file describes the problem (order, domain, potential, mesh),
//! the method parameters (truncation orders, scan settings), the boundary
//! condition, optional per-subcommand blocks, and the output location.
//! Unknown keys are rejected everywhere so that typos fail loudly.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{NsbfError, Result};
use crate::grid::Grid;
use crate::particular::Problem;
use crate::potential::Potential;
use crate::spectral::BoundaryCondition;

/// Only supported config schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Truncation order: a fixed value or residual-driven selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Auto,
    Fixed(usize),
}

impl<'de> Deserialize<'de> for Truncation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            Number(usize),
        }
        match Raw::deserialize(d)? {
            Raw::Word(w) if w == "auto" => Ok(Truncation::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "truncation must be \"auto\" or a non-negative integer, got \"{w}\""
            ))),
            Raw::Number(n) => Ok(Truncation::Fixed(n)),
        }
    }
}

impl Truncation {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Truncation::Auto);
        }
        s.parse::<usize>().map(Truncation::Fixed).map_err(|_| {
            NsbfError::Config(format!(
                "truncation must be \"auto\" or a non-negative integer, got \"{s}\""
            ))
        })
    }
}

/// Potential descriptor: a named builtin or a two-column CSV of samples.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Power { c: f64, p: f64 },
    Ex1,
    Qm { m: u32 },
    Csv { path: String, q0: Option<f64> },
}

impl PotentialSpec {
    /// Resolves the descriptor against the problem mesh. CSV paths are
    /// taken relative to `base` (the config file's directory).
    pub fn resolve(&self, grid: &Arc<Grid>, base: &Path) -> Result<Potential> {
        match self {
            PotentialSpec::Zero => Ok(Potential::Zero),
            PotentialSpec::Power { c, p } => Ok(Potential::Power { c: *c, p: *p }),
            PotentialSpec::Ex1 => Ok(Potential::Ex1),
            PotentialSpec::Qm { m } => Potential::qm(*m),
            PotentialSpec::Csv { path, q0 } => {
                let full = base.join(path);
                let file = File::open(&full).map_err(|e| {
                    NsbfError::Config(format!("cannot open potential file {full:?}: {e}"))
                })?;
                Potential::from_csv(BufReader::new(file), grid, *q0)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub ell: f64,
    pub b: f64,
    pub potential: PotentialSpec,
    /// Mesh intervals (the mesh has `mesh + 1` nodes).
    #[serde(default = "default_mesh")]
    pub mesh: usize,
}

fn default_mesh() -> usize {
    5000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodBlock {
    #[serde(default = "default_truncation")]
    pub n1: Truncation,
    /// Derivative-side truncation; omit to skip the derivative series.
    #[serde(default)]
    pub n2: Option<Truncation>,
    /// Coefficients computed before selection when a truncation is "auto".
    #[serde(default = "default_max_order")]
    pub max_order: usize,
    pub omega_max: Option<f64>,
    /// Defaults to `pi / (8 b)`.
    pub scan_step: Option<f64>,
    /// Reference-solver tolerance for the `oracle` subcommand.
    #[serde(default = "default_oracle_tol")]
    pub oracle_tolerance: f64,
}

fn default_truncation() -> Truncation {
    Truncation::Auto
}

fn default_max_order() -> usize {
    40
}

fn default_oracle_tol() -> f64 {
    1e-12
}

impl Default for MethodBlock {
    fn default() -> Self {
        Self {
            n1: Truncation::Auto,
            n2: None,
            max_order: default_max_order(),
            omega_max: None,
            scan_step: None,
            oracle_tolerance: default_oracle_tol(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BoundarySpec {
    Dirichlet,
    Neumann,
    Robin { a: f64, c: f64 },
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec::Dirichlet
    }
}

impl BoundarySpec {
    pub fn to_condition(&self) -> Result<BoundaryCondition> {
        let bc = match self {
            BoundarySpec::Dirichlet => BoundaryCondition::Dirichlet,
            BoundarySpec::Neumann => BoundaryCondition::Neumann,
            BoundarySpec::Robin { a, c } => BoundaryCondition::Robin { a: *a, c: *c },
        };
        bc.validate()?;
        Ok(bc)
    }
}

/// Frequency sweep for the `solve` and `oracle` subcommands.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// Evaluation point; defaults to `b`.
    pub x: Option<f64>,
    pub omega_min: f64,
    pub omega_max: f64,
    pub count: usize,
}

impl SweepBlock {
    pub fn omegas(&self) -> Result<Vec<f64>> {
        if self.count < 1 || !(self.omega_min >= 0.0) || !(self.omega_max >= self.omega_min) {
            return Err(NsbfError::Config(format!(
                "sweep needs 0 <= omega_min <= omega_max and count >= 1, got [{}, {}] x {}",
                self.omega_min, self.omega_max, self.count
            )));
        }
        if self.count == 1 {
            return Ok(vec![self.omega_min]);
        }
        let h = (self.omega_max - self.omega_min) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| self.omega_min + h * i as f64)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKindSpec {
    K,
    K1,
    R,
}

/// Inputs for the `kernel` subcommand.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    pub x: f64,
    pub kind: KernelKindSpec,
    pub t_count: usize,
}

/// Inputs for the `decay` subcommand.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayBlock {
    /// "qm" (piecewise family, slope per m = 0..5) or
    /// "sqrt" (q = sqrt(x), slope per order in `ells`).
    pub family: String,
    #[serde(default = "default_decay_count")]
    pub count: usize,
    #[serde(default)]
    pub ells: Vec<f64>,
}

fn default_decay_count() -> usize {
    100
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// Output directory; defaults to the working directory.
    pub dir: Option<String>,
    /// File-name prefix; defaults to the subcommand name.
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub problem: ProblemBlock,
    #[serde(default)]
    pub method: MethodBlock,
    #[serde(default)]
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub kernel: Option<KernelBlock>,
    #[serde(default)]
    pub decay: Option<DecayBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let file = File::open(path)
            .map_err(|e| NsbfError::Config(format!("cannot open config {path:?}: {e}")))?;
        let cfg: RunConfig = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| NsbfError::Config(format!("invalid config {path:?}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(NsbfError::Config(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if !(self.problem.ell >= -0.5) {
            return Err(NsbfError::Config(format!(
                "problem.ell must satisfy ell >= -1/2, got {}",
                self.problem.ell
            )));
        }
        if !(self.problem.b > 0.0) {
            return Err(NsbfError::Config(format!(
                "problem.b must be positive, got {}",
                self.problem.b
            )));
        }
        self.boundary.to_condition().map_err(|e| {
            NsbfError::Config(format!("boundary: {e}"))
        })?;
        if let Some(step) = self.method.scan_step {
            if !(step > 0.0) {
                return Err(NsbfError::Config(format!(
                    "method.scan_step must be positive, got {step}"
                )));
            }
        }
        Ok(())
    }

    /// Builds the validated problem description (also checks mesh and
    /// potential constraints).
    pub fn build_problem(&self, base: &Path) -> Result<(Problem, Arc<Grid>)> {
        let grid = Arc::new(Grid::new(self.problem.b, self.problem.mesh)?);
        let potential = self.problem.potential.resolve(&grid, base)?;
        let problem = Problem::new(self.problem.ell, self.problem.b, potential)?;
        Ok((problem, grid))
    }
}
