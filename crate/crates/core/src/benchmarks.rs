//! The fourteen benchmark objectives and per-run evaluation budgets.
//!
//! All functions use their basic, unshifted and unrotated definitions and are
//! minimised. Expanded functions (F8, F9) wrap around from the last coordinate
//! to the first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Evaluations granted per dimension by the protocol budget.
pub const EVALS_PER_DIM: usize = 50;

/// Terms in the Weierstrass series (k = 0..=20).
pub const WEIERSTRASS_K_MAX: u32 = 20;

/// Terms in the Katsuura inner sum (j = 1..=32).
pub const KATSUURA_TERMS: i32 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("input point has a non-finite coordinate at index {0}")]
    NonFiniteInput(usize),
    #[error("input point is empty")]
    EmptyInput,
    #[error("evaluation budget exhausted ({cap} evaluations)")]
    BudgetExhausted { cap: usize },
}

/// Benchmark identifiers F1..F14.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
    F9,
    F10,
    F11,
    F12,
    F13,
    F14,
}

impl FunctionId {
    pub const ALL: [FunctionId; 14] = [
        FunctionId::F1,
        FunctionId::F2,
        FunctionId::F3,
        FunctionId::F4,
        FunctionId::F5,
        FunctionId::F6,
        FunctionId::F7,
        FunctionId::F8,
        FunctionId::F9,
        FunctionId::F10,
        FunctionId::F11,
        FunctionId::F12,
        FunctionId::F13,
        FunctionId::F14,
    ];

    /// 1-based index (F1 -> 1).
    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(index: usize) -> Result<Self, BenchError> {
        index
            .checked_sub(1)
            .and_then(|i| Self::ALL.get(i).copied())
            .ok_or_else(|| BenchError::UnknownFunction(format!("F{index}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            FunctionId::F1 => "Bent Cigar",
            FunctionId::F2 => "Discus",
            FunctionId::F3 => "Weierstrass",
            FunctionId::F4 => "Modified Schwefel",
            FunctionId::F5 => "Katsuura",
            FunctionId::F6 => "HappyCat",
            FunctionId::F7 => "HGBat",
            FunctionId::F8 => "Expanded Griewank plus Rosenbrock",
            FunctionId::F9 => "Expanded Scaffer's F6",
            FunctionId::F10 => "Rosenbrock's",
            FunctionId::F11 => "Griewank's",
            FunctionId::F12 => "Rastrigin's",
            FunctionId::F13 => "High Conditioned Elliptic",
            FunctionId::F14 => "Ackley",
        }
    }

    /// Location of the global minimum of the basic definition: every
    /// coordinate equals the returned value.
    pub fn optimum_coordinate(self) -> f64 {
        match self {
            FunctionId::F6 | FunctionId::F7 => -1.0,
            FunctionId::F8 | FunctionId::F10 => 1.0,
            _ => 0.0,
        }
    }

    pub fn optimum_point<T: Scalar>(self, dim: usize) -> Vec<T> {
        vec![T::lit(self.optimum_coordinate()); dim]
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.index())
    }
}

impl FromStr for FunctionId {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let digits = t.strip_prefix(['F', 'f']).unwrap_or(t);
        digits
            .parse::<usize>()
            .map_err(|_| BenchError::UnknownFunction(s.to_string()))
            .and_then(|i| Self::from_index(i).map_err(|_| BenchError::UnknownFunction(s.to_string())))
    }
}

impl Serialize for FunctionId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FunctionId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Anything the GA can minimise.
pub trait Objective<T: Scalar>: Sync {
    fn evaluate(&self, x: &[T]) -> T;
}

impl<T: Scalar> Objective<T> for FunctionId {
    fn evaluate(&self, x: &[T]) -> T {
        eval_unchecked(*self, x)
    }
}

/// Evaluates `fid` at `x` after checking the point is non-empty and finite.
pub fn evaluate<T: Scalar>(fid: FunctionId, x: &[T]) -> Result<T, BenchError> {
    if x.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(BenchError::NonFiniteInput(i));
    }
    Ok(eval_unchecked(fid, x))
}

fn eval_unchecked<T: Scalar>(fid: FunctionId, x: &[T]) -> T {
    match fid {
        FunctionId::F1 => bent_cigar(x),
        FunctionId::F2 => discus(x),
        FunctionId::F3 => weierstrass(x),
        FunctionId::F4 => modified_schwefel(x),
        FunctionId::F5 => katsuura(x),
        FunctionId::F6 => happy_cat(x),
        FunctionId::F7 => hgbat(x),
        FunctionId::F8 => expanded_griewank_rosenbrock(x),
        FunctionId::F9 => expanded_schaffer_f6(x),
        FunctionId::F10 => rosenbrock(x),
        FunctionId::F11 => griewank(x),
        FunctionId::F12 => rastrigin(x),
        FunctionId::F13 => high_conditioned_elliptic(x),
        FunctionId::F14 => ackley(x),
    }
}

fn sum_sq<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum()
}

pub fn bent_cigar<T: Scalar>(x: &[T]) -> T {
    x[0] * x[0] + T::lit(1e6) * sum_sq(&x[1..])
}

pub fn discus<T: Scalar>(x: &[T]) -> T {
    T::lit(1e6) * x[0] * x[0] + sum_sq(&x[1..])
}

pub fn weierstrass<T: Scalar>(x: &[T]) -> T {
    let a = T::lit(0.5);
    let b = T::lit(3.0);
    let two_pi = T::TAU();
    let half = T::lit(0.5);
    let series = |v: T| -> T {
        (0..=WEIERSTRASS_K_MAX)
            .map(|k| a.powi(k as i32) * (two_pi * b.powi(k as i32) * (v + half)).cos())
            .sum()
    };
    let total: T = x.iter().map(|&v| series(v)).sum();
    total - T::from_count(x.len()) * series(T::zero())
}

pub fn modified_schwefel<T: Scalar>(x: &[T]) -> T {
    let d = T::from_count(x.len());
    let five_hundred = T::lit(500.0);
    let denom = T::lit(10_000.0) * d;
    let g = |v: T| -> T {
        let z = v + T::lit(4.209687462275036e2);
        if z.abs() <= five_hundred {
            z * z.abs().sqrt().sin()
        } else if z > five_hundred {
            let r = five_hundred - z % five_hundred;
            let p = z - five_hundred;
            r * r.abs().sqrt().sin() - p * p / denom
        } else {
            let r = z.abs() % five_hundred - five_hundred;
            let p = z + five_hundred;
            r * r.abs().sqrt().sin() - p * p / denom
        }
    };
    let acc: T = x.iter().map(|&v| g(v)).sum();
    T::lit(418.9829) * d - acc
}

pub fn katsuura<T: Scalar>(x: &[T]) -> T {
    let d = T::from_count(x.len());
    let exponent = T::lit(10.0) / d.powf(T::lit(1.2));
    let two = T::lit(2.0);
    let prod = x.iter().enumerate().fold(T::one(), |acc, (i, &v)| {
        let s: T = (1..=KATSUURA_TERMS)
            .map(|j| {
                let p = two.powi(j);
                let t = p * v;
                (t - t.round()).abs() / p
            })
            .sum();
        acc * (T::one() + T::from_count(i + 1) * s).powf(exponent)
    });
    let c = T::lit(10.0) / (d * d);
    c * prod - c
}

pub fn happy_cat<T: Scalar>(x: &[T]) -> T {
    let d = T::from_count(x.len());
    let sq = sum_sq(x);
    let s: T = x.iter().copied().sum();
    let half = T::lit(0.5);
    (sq - d).abs().powf(T::lit(0.25)) + (half * sq + s) / d + half
}

pub fn hgbat<T: Scalar>(x: &[T]) -> T {
    let d = T::from_count(x.len());
    let sq = sum_sq(x);
    let s: T = x.iter().copied().sum();
    let half = T::lit(0.5);
    (sq * sq - s * s).abs().sqrt() + (half * sq + s) / d + half
}

fn griewank_1d<T: Scalar>(v: T) -> T {
    v * v / T::lit(4000.0) - v.cos() + T::one()
}

fn rosenbrock_2d<T: Scalar>(a: T, b: T) -> T {
    let t = a * a - b;
    let u = a - T::one();
    T::lit(100.0) * t * t + u * u
}

pub fn expanded_griewank_rosenbrock<T: Scalar>(x: &[T]) -> T {
    let d = x.len();
    (0..d)
        .map(|i| griewank_1d(rosenbrock_2d(x[i], x[(i + 1) % d])))
        .sum()
}

fn schaffer_f6<T: Scalar>(a: T, b: T) -> T {
    let r2 = a * a + b * b;
    let s = r2.sqrt().sin();
    let q = T::one() + T::lit(0.001) * r2;
    let half = T::lit(0.5);
    half + (s * s - half) / (q * q)
}

pub fn expanded_schaffer_f6<T: Scalar>(x: &[T]) -> T {
    let d = x.len();
    (0..d).map(|i| schaffer_f6(x[i], x[(i + 1) % d])).sum()
}

pub fn rosenbrock<T: Scalar>(x: &[T]) -> T {
    x.windows(2).map(|w| rosenbrock_2d(w[0], w[1])).sum()
}

/// `sum/4000 - prod + 1`, evaluated left to right: near the origin the
/// product rounds to exactly 1 and the result to exactly 0.
pub fn griewank<T: Scalar>(x: &[T]) -> T {
    let s = sum_sq(x) / T::lit(4000.0);
    let p = x
        .iter()
        .enumerate()
        .fold(T::one(), |acc, (i, &v)| acc * (v / T::from_count(i + 1).sqrt()).cos());
    s - p + T::one()
}

pub fn rastrigin<T: Scalar>(x: &[T]) -> T {
    let ten = T::lit(10.0);
    x.iter()
        .map(|&v| v * v - ten * (T::TAU() * v).cos() + ten)
        .sum()
}

pub fn high_conditioned_elliptic<T: Scalar>(x: &[T]) -> T {
    let d = x.len();
    if d == 1 {
        return x[0] * x[0];
    }
    let base = T::lit(1e6);
    let denom = T::from_count(d - 1);
    x.iter()
        .enumerate()
        .map(|(i, &v)| base.powf(T::from_count(i) / denom) * v * v)
        .sum()
}

pub fn ackley<T: Scalar>(x: &[T]) -> T {
    let d = T::from_count(x.len());
    let twenty = T::lit(20.0);
    let a = -twenty * (T::lit(-0.2) * (sum_sq(x) / d).sqrt()).exp();
    let cos_sum: T = x.iter().map(|&v| (T::TAU() * v).cos()).sum();
    let b = (cos_sum / d).exp();
    a - b + twenty + T::E()
}

/// Hard cap on objective evaluations for one GA run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationBudget {
    cap: usize,
    used: usize,
}

impl EvaluationBudget {
    pub fn with_cap(cap: usize) -> Self {
        Self { cap, used: 0 }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn remaining(&self) -> usize {
        self.cap - self.used
    }

    pub fn is_exhausted(&self) -> bool {
        self.used >= self.cap
    }

    /// Claims one evaluation slot.
    pub fn charge(&mut self) -> Result<(), BenchError> {
        if self.used >= self.cap {
            return Err(BenchError::BudgetExhausted { cap: self.cap });
        }
        self.used += 1;
        Ok(())
    }
}

/// Protocol budget: 50 evaluations per dimension.
pub fn make_budget(dim: usize) -> EvaluationBudget {
    make_budget_with(dim, EVALS_PER_DIM)
}

pub fn make_budget_with(dim: usize, per_dim: usize) -> EvaluationBudget {
    EvaluationBudget::with_cap(dim * per_dim)
}

/// Evaluates through the budget. When the cap is reached the evaluation is not performed.
pub fn budgeted_evaluate<T: Scalar>(
    budget: &mut EvaluationBudget,
    fid: FunctionId,
    x: &[T],
) -> Result<T, BenchError> {
    budgeted_evaluate_with(budget, &fid, x)
}

pub fn budgeted_evaluate_with<T: Scalar, O: Objective<T> + ?Sized>(
    budget: &mut EvaluationBudget,
    objective: &O,
    x: &[T],
) -> Result<T, BenchError> {
    budget.charge()?;
    Ok(objective.evaluate(x))
}
