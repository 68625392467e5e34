//! Potential descriptors: the builtin families used in the examples plus
//! file-based samples.

use std::io::BufRead;
use std::sync::Arc;

use crate::error::{NsbfError, Result};
use crate::grid::{Grid, GridFunction};

/// A potential `q` on `[0, b]`, as a closed-form builtin or a sampled table.
#[derive(Debug, Clone)]
pub enum Potential {
    /// `q = 0`.
    Zero,
    /// `q = c x^p`.
    Power { c: f64, p: f64 },
    /// `q = x^2`.
    Ex1,
    /// `q_m = 1` on `[0, pi/2]` and `1 + (x - pi/2)^m` beyond, `m = 0..=5`.
    Qm { m: u32 },
    /// Node samples read from a two-column CSV on the problem grid. The
    /// declared value at `x = 0` is kept separately so a singular limit can
    /// be flagged.
    Samples {
        values: Arc<Vec<f64>>,
        q0: Option<f64>,
    },
}

impl Potential {
    pub fn qm(m: u32) -> Result<Self> {
        if m > 5 {
            return Err(NsbfError::InvalidProblem(format!(
                "qm potential family is defined for m = 0..=5, got {m}"
            )));
        }
        Ok(Potential::Qm { m })
    }

    /// `q(0)` as a finite limit, or `None` when the limit is unbounded (or,
    /// for a jump like `q_0`, taken as the one-sided limit from the right).
    pub fn value_at_zero(&self) -> Option<f64> {
        match self {
            Potential::Zero => Some(0.0),
            Potential::Power { c, p } => {
                if *p > 0.0 {
                    Some(0.0)
                } else if *p == 0.0 {
                    Some(*c)
                } else {
                    None
                }
            }
            Potential::Ex1 => Some(0.0),
            Potential::Qm { .. } => Some(1.0),
            Potential::Samples { q0, .. } => *q0,
        }
    }

    /// Closed-form value at `x > 0`; meaningful for builtins. Sampled
    /// potentials answer only at their own nodes via [`Potential::sample`].
    pub fn eval(&self, x: f64) -> Option<f64> {
        match self {
            Potential::Zero => Some(0.0),
            Potential::Power { c, p } => Some(c * x.powf(*p)),
            Potential::Ex1 => Some(x * x),
            Potential::Qm { m } => {
                let half = std::f64::consts::FRAC_PI_2;
                Some(if x <= half {
                    1.0
                } else {
                    1.0 + (x - half).powi(*m as i32)
                })
            }
            Potential::Samples { .. } => None,
        }
    }

    /// Node samples on `grid`, with the node-0 entry replaced by the declared
    /// limit (or 0 when the limit is flagged unbounded — that node only ever
    /// multiplies factors vanishing at the origin).
    pub fn sample(&self, grid: &Arc<Grid>) -> Result<GridFunction> {
        if let Potential::Samples { values, .. } = self {
            if values.len() != grid.len() {
                return Err(NsbfError::InvalidProblem(format!(
                    "sampled potential has {} values, grid has {} nodes",
                    values.len(),
                    grid.len()
                )));
            }
            let mut v = values.as_ref().clone();
            v[0] = self.value_at_zero().unwrap_or(0.0);
            return GridFunction::new(Arc::clone(grid), v);
        }
        let q0 = self.value_at_zero().unwrap_or(0.0);
        let vals: Vec<f64> = (0..grid.len())
            .map(|i| {
                if i == 0 {
                    q0
                } else {
                    self.eval(grid.node(i)).unwrap()
                }
            })
            .collect();
        GridFunction::new(Arc::clone(grid), vals)
    }

    /// Reads a two-column CSV whose first column must match the nodes of
    /// `grid` (relative tolerance 1e-12).
    pub fn from_csv<R: BufRead>(reader: R, grid: &Arc<Grid>, q0: Option<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut cols = trimmed.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.map(str::trim)
                    .and_then(|t| t.parse::<f64>().ok())
                    .ok_or_else(|| {
                        NsbfError::InvalidProblem(format!("bad CSV row {}: {trimmed:?}", i + 1))
                    })
            };
            let x = parse(cols.next())?;
            let v = parse(cols.next())?;
            if values.len() >= grid.len() {
                return Err(NsbfError::InvalidProblem(
                    "sampled potential has more rows than grid nodes".into(),
                ));
            }
            let node = grid.node(values.len());
            if (x - node).abs() > 1e-12 * grid.b().max(1.0) {
                return Err(NsbfError::InvalidProblem(format!(
                    "CSV abscissa {x} does not match grid node {node}"
                )));
            }
            if !v.is_finite() && values.len() > 0 {
                return Err(NsbfError::InvalidProblem(format!(
                    "non-finite potential sample at x = {x}"
                )));
            }
            values.push(if v.is_finite() { v } else { 0.0 });
        }
        if values.len() != grid.len() {
            return Err(NsbfError::InvalidProblem(format!(
                "sampled potential has {} rows, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let q0 = q0.or_else(|| values.first().copied().filter(|v| v.is_finite()));
        Ok(Potential::Samples {
            values: Arc::new(values),
            q0,
        })
    }
}
