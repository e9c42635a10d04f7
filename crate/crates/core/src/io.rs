//! JSON forms of matrices, vectors and realizations.
//!
//! Real matrices are `{"d": n, "entries": [[...]]}` with `entries[i][j]` the
//! entry in row `i`, column `j` (so `P(i|j)` for stochastic matrices). Complex
//! matrices are `{"d": n, "re": [[...]], "im": [[...]]}`. Vectors use
//! `{"d": n, "entries": [...]}`. Floats are written in shortest round-trip form.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::cost::FunctionMap;
use crate::error::{invalid, Result};
use crate::qembed::{MarkovianRealization, Stage};
use crate::{CMatrix, DensityMatrix, Duration, GeneratorMatrix, ProbVector, StochasticMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub d: usize,
    pub entries: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorJson {
    pub d: usize,
    pub entries: Vec<f64>,
}

fn check_rows(d: usize, rows: &[Vec<f64>], what: &str) -> Result<()> {
    if d == 0 || rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(invalid(format!("{what} must be {d}×{d}")));
    }
    Ok(())
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Self {
            d: m.nrows(),
            entries: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        check_rows(self.d, &self.entries, "entries")?;
        Ok(DMatrix::from_fn(self.d, self.d, |i, j| self.entries[i][j]))
    }
}

impl ComplexMatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let part = |f: fn(&Complex<f64>) -> f64| {
            (0..m.nrows())
                .map(|i| m.row(i).iter().map(f).collect())
                .collect()
        };
        Self {
            d: Some(m.nrows()),
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let d = self.d.unwrap_or(self.re.len());
        check_rows(d, &self.re, "re")?;
        check_rows(d, &self.im, "im")?;
        Ok(CMatrix::from_fn(d, d, |i, j| Complex::new(self.re[i][j], self.im[i][j])))
    }
}

impl VectorJson {
    pub fn from_prob(p: &ProbVector) -> Self {
        Self {
            d: p.dim(),
            entries: p.to_vec(),
        }
    }

    pub fn to_prob(&self) -> Result<ProbVector> {
        if self.entries.len() != self.d {
            return Err(invalid(format!("vector has {} entries, expected {}", self.entries.len(), self.d)));
        }
        ProbVector::new(self.entries.clone())
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| invalid(format!("malformed JSON: {e}")))
}

pub fn stochastic_from_json(text: &str) -> Result<StochasticMatrix> {
    StochasticMatrix::new(parse::<MatrixJson>(text)?.to_matrix()?)
}

pub fn stochastic_to_json(p: &StochasticMatrix) -> MatrixJson {
    MatrixJson::from_matrix(p.as_matrix())
}

pub fn complex_from_json(text: &str) -> Result<CMatrix> {
    parse::<ComplexMatrixJson>(text)?.to_matrix()
}

pub fn density_from_json(text: &str) -> Result<DensityMatrix> {
    DensityMatrix::new(complex_from_json(text)?)
}

pub fn prob_from_json(text: &str) -> Result<ProbVector> {
    parse::<VectorJson>(text)?.to_prob()
}

/// A function given either as `{"d", "table"}` or as a 0/1 stochastic matrix.
pub fn function_from_json(text: &str) -> Result<FunctionMap> {
    #[derive(Deserialize)]
    struct Table {
        table: Vec<usize>,
    }
    if let Ok(t) = serde_json::from_str::<Table>(text) {
        return FunctionMap::new(t.table);
    }
    let p = stochastic_from_json(text)?;
    let d = p.dim();
    let table = (0..d)
        .map(|j| {
            let i = (0..d).find(|&i| p.get(i, j) == 1.0);
            i.ok_or_else(|| invalid(format!("column {j} is not deterministic")))
        })
        .collect::<Result<Vec<_>>>()?;
    FunctionMap::new(table)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DurationJson {
    Finite(f64),
    Limit(&'static str),
}

impl From<Duration> for DurationJson {
    fn from(d: Duration) -> Self {
        match d {
            Duration::Finite(t) => DurationJson::Finite(t),
            Duration::Limit => DurationJson::Limit("limit"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageJson {
    Lindblad {
        duration: DurationJson,
        hamiltonian: ComplexMatrixJson,
        jump_operators: Vec<ComplexMatrixJson>,
    },
    Classical {
        duration: DurationJson,
        generator: MatrixJson,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizationJson {
    pub target: MatrixJson,
    pub achieved_error: f64,
    pub t_trunc: f64,
    pub stages: Vec<StageJson>,
}

pub fn generator_to_json(l: &GeneratorMatrix) -> MatrixJson {
    MatrixJson::from_matrix(l.as_matrix())
}

pub fn realization_to_json(r: &MarkovianRealization) -> RealizationJson {
    let stages = r
        .stages
        .iter()
        .map(|s| match s {
            Stage::Lindblad { generator, duration } => StageJson::Lindblad {
                duration: (*duration).into(),
                hamiltonian: ComplexMatrixJson::from_matrix(generator.hamiltonian()),
                jump_operators: generator.cp_part().iter().map(ComplexMatrixJson::from_matrix).collect(),
            },
            Stage::Classical { generator, duration } => StageJson::Classical {
                duration: (*duration).into(),
                generator: generator_to_json(generator),
            },
        })
        .collect();
    RealizationJson {
        target: stochastic_to_json(&r.target),
        achieved_error: r.achieved_error,
        t_trunc: r.t_trunc,
        stages,
    }
}
