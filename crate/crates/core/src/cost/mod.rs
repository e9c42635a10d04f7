//! Space-time cost of implementing functions `f: Z_d -> Z_d`: functional-graph
//! statistics, the classical time cost with memory, and the two-stage quantum
//! construction.

mod decompose;
mod typicality;

use num_traits::{PrimInt, Unsigned};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::StochasticMatrix;

pub use decompose::{decompose_function, quantum_realization_of_function, reset_generator};
pub use typicality::{typicality_sample, TypicalityStats};

/// Total function on `0..d`, stored as its value table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunctionMap {
    table: Vec<usize>,
}

impl FunctionMap {
    pub fn new(table: Vec<usize>) -> Result<Self> {
        let d = table.len();
        if d == 0 {
            return Err(invalid("function on an empty domain"));
        }
        if let Some(&bad) = table.iter().find(|&&t| t >= d) {
            return Err(invalid(format!("function value {bad} outside 0..{d}")));
        }
        Ok(Self { table })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            table: (0..d).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    /// `self ∘ other`.
    pub fn after(&self, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            table: other.table.iter().map(|&x| self.table[x]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.table.iter().enumerate().all(|(i, &t)| i == t)
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.dim()];
        self.table.iter().all(|&t| !std::mem::replace(&mut seen[t], true))
    }

    pub fn is_idempotent(&self) -> bool {
        self.table.iter().all(|&t| self.table[t] == t)
    }

    pub fn to_stochastic(&self) -> StochasticMatrix {
        StochasticMatrix::from_function(&self.table).expect("values are in range")
    }
}

/// Fixed points, image size and number of cycles of a function's graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FunctionStats<N> {
    pub d: N,
    pub fix: N,
    pub img: N,
    pub cycles: N,
}

pub fn function_stats(f: &FunctionMap) -> FunctionStats<u64> {
    let d = f.dim();
    let fix = f.table.iter().enumerate().filter(|(i, &t)| *i == t).count();
    let mut hit = vec![false; d];
    for &t in &f.table {
        hit[t] = true;
    }
    let img = hit.iter().filter(|&&h| h).count();

    // 0 = unvisited, 1 = on the current walk, 2 = finished.
    let mut state = vec![0u8; d];
    let mut cycles = 0;
    let mut path = Vec::new();
    for start in 0..d {
        let mut x = start;
        while state[x] == 0 {
            state[x] = 1;
            path.push(x);
            x = f.table[x];
        }
        if state[x] == 1 {
            cycles += 1;
        }
        for &p in &path {
            state[p] = 2;
        }
        path.clear();
    }
    FunctionStats {
        d: d as u64,
        fix: fix as u64,
        img: img as u64,
        cycles: cycles as u64,
    }
}

/// The two clock-like functions on `s`-bit strings compared in the trade-off plots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NamedFunction {
    /// `f1(i) = i + 1 mod 2^s`.
    F1,
    /// `f2(i) = min(i + 2^{⌊s/2⌋}, 2^s − 1)`.
    F2,
}

impl NamedFunction {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "f1" => Some(Self::F1),
            "f2" => Some(Self::F2),
            _ => None,
        }
    }

    fn check_bits(s: u32) -> Result<()> {
        if s == 0 || s > 64 {
            return Err(invalid(format!("bit width must be in 1..=64, got {s}")));
        }
        Ok(())
    }

    /// Statistics in closed form, valid for any `s ≤ 64`.
    pub fn stats(self, s: u32) -> Result<FunctionStats<u128>> {
        Self::check_bits(s)?;
        let d = 1u128 << s;
        Ok(match self {
            NamedFunction::F1 => FunctionStats {
                d,
                fix: 0,
                img: d,
                cycles: 1,
            },
            NamedFunction::F2 => {
                let h = 1u128 << (s / 2);
                FunctionStats {
                    d,
                    fix: 1,
                    img: d - h,
                    cycles: 1,
                }
            }
        })
    }

    /// Explicit table; only for small `s`.
    pub fn table(self, s: u32) -> Result<FunctionMap> {
        Self::check_bits(s)?;
        if s > 24 {
            return Err(invalid(format!("refusing to tabulate 2^{s} values")));
        }
        let d = 1usize << s;
        let h = 1usize << (s / 2);
        let table = (0..d)
            .map(|i| match self {
                NamedFunction::F1 => (i + 1) % d,
                NamedFunction::F2 => (i + h).min(d - 1),
            })
            .collect();
        FunctionMap::new(table)
    }
}

/// Classical time cost with `m` memory states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalCost<N> {
    /// The identity needs no steps.
    Zero,
    /// `m + d = |img f|`: no finite memoryless implementation at this `m`.
    Infinite,
    /// `[lo, lo + 1]` from the unresolved `b_f(m) ∈ {0, 1}`, plus the simpler lower bound.
    Interval { lo: N, hi: N, lower_bound: N },
}

fn ceil_div<N: PrimInt + Unsigned>(a: N, b: N) -> N {
    let q = a / b;
    if q * b == a {
        q
    } else {
        q + N::one()
    }
}

fn overflow() -> Error {
    invalid("cost arithmetic overflowed; use a wider integer type")
}

/// `⌈(m + d + max(c − m, 0) − fix) / (m + d − |img|)⌉ + b_f(m)` and the bound
/// `⌈(m + d − fix) / (m + d − |img|)⌉`.
pub fn classical_time_cost<N: PrimInt + Unsigned>(
    stats: &FunctionStats<N>,
    m: N,
) -> Result<ClassicalCost<N>> {
    let FunctionStats { d, fix, img, cycles } = *stats;
    if img > d || fix > img || img.is_zero() {
        return Err(invalid("inconsistent function statistics"));
    }
    if fix == d {
        return Ok(ClassicalCost::Zero);
    }
    let md = m.checked_add(&d).ok_or_else(overflow)?;
    let den = md - img;
    if den.is_zero() {
        return Ok(ClassicalCost::Infinite);
    }
    let extra = if cycles > m { cycles - m } else { N::zero() };
    let num = md.checked_add(&extra).ok_or_else(overflow)? - fix;
    let lo = ceil_div(num, den);
    Ok(ClassicalCost::Interval {
        lo,
        hi: lo.checked_add(&N::one()).ok_or_else(overflow)?,
        lower_bound: ceil_div(md - fix, den),
    })
}

/// Upper bound on the quantum time cost of any function, achieved with no memory.
pub const QUANTUM_TIME_BOUND: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CostReport<N> {
    pub m: N,
    pub classical: ClassicalCost<N>,
    pub quantum_time: u32,
    pub quantum_memory: u32,
}

/// Classical and quantum costs for each memory size in `m_values`.
pub fn tradeoff_table<N: PrimInt + Unsigned + Send + Sync>(
    stats: &FunctionStats<N>,
    m_values: &[N],
) -> Result<Vec<CostReport<N>>> {
    m_values
        .iter()
        .map(|&m| {
            Ok(CostReport {
                m,
                classical: classical_time_cost(stats, m)?,
                quantum_time: QUANTUM_TIME_BOUND,
                quantum_memory: 0,
            })
        })
        .collect()
}

/// Widens table statistics for use alongside the closed-form ones.
pub fn widen(stats: FunctionStats<u64>) -> FunctionStats<u128> {
    FunctionStats {
        d: stats.d as u128,
        fix: stats.fix as u128,
        img: stats.img as u128,
        cycles: stats.cycles as u128,
    }
}
