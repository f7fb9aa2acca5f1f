//! Axis-aligned boxes: the search cube and every subcube derived from it.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("box bounds have different lengths ({lo} vs {hi})")]
    LengthMismatch { lo: usize, hi: usize },
    #[error("box has zero dimensions")]
    Empty,
    #[error("non-finite bound in dimension {0}")]
    NonFinite(usize),
    #[error("dimension {dim}: lower bound {lo} is not below upper bound {hi}")]
    Inverted { dim: usize, lo: String, hi: String },
    #[error("expected a {expected}-dimensional box, got {actual}")]
    WrongDimension { expected: usize, actual: usize },
    #[error("scaled box has zero width in dimension {0}")]
    DegenerateBox(usize),
    #[error("octant index {0} outside 1..=8")]
    OctantIndex(usize),
    #[error("invalid bound `{0}`")]
    BadBound(String),
}

/// Closed hyperrectangle `[lo_1, hi_1] x ... x [lo_d, hi_d]` with `lo_i < hi_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox<T> {
    lo: Vec<T>,
    hi: Vec<T>,
}

impl<T: Scalar> SearchBox<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Result<Self, GeometryError> {
        if lo.len() != hi.len() {
            return Err(GeometryError::LengthMismatch { lo: lo.len(), hi: hi.len() });
        }
        if lo.is_empty() {
            return Err(GeometryError::Empty);
        }
        for (i, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !l.is_finite() || !h.is_finite() {
                return Err(GeometryError::NonFinite(i));
            }
            if l >= h {
                return Err(GeometryError::Inverted { dim: i, lo: l.to_string(), hi: h.to_string() });
            }
        }
        Ok(Self { lo, hi })
    }

    /// `[lo, hi]^dim`.
    pub fn cube(lo: T, hi: T, dim: usize) -> Result<Self, GeometryError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn from_intervals(intervals: &[(T, T)]) -> Result<Self, GeometryError> {
        let (lo, hi) = intervals.iter().copied().unzip();
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[T] {
        &self.lo
    }

    pub fn hi(&self) -> &[T] {
        &self.hi
    }

    pub fn interval(&self, i: usize) -> (T, T) {
        (self.lo[i], self.hi[i])
    }

    pub fn widths(&self) -> impl Iterator<Item = T> + '_ {
        self.lo.iter().zip(&self.hi).map(|(&l, &h)| h - l)
    }

    pub fn midpoint(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.lo.iter().zip(&self.hi).map(|(&l, &h)| l + (h - l) * half).collect()
    }

    pub fn volume(&self) -> T {
        self.widths().fold(T::one(), |acc, w| acc * w)
    }

    /// Closed-box membership.
    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&l, &h))| l <= v && v <= h)
    }

    pub fn contains_interior(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&l, &h))| l < v && v < h)
    }

    pub fn contains_box(&self, other: &SearchBox<T>) -> bool {
        other.dim() == self.dim()
            && (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// Every corner of the box, `2^dim` points in binary order (bit `i` set selects `hi_i`).
    /// Only sensible for small `dim`.
    pub fn corners(&self) -> impl Iterator<Item = Vec<T>> + '_ {
        let d = self.dim();
        assert!(d < usize::BITS as usize, "too many corners");
        (0..1usize << d).map(move |mask| {
            (0..d)
                .map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] })
                .collect()
        })
    }
}

impl<T: Scalar> Serialize for SearchBox<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            lo: Vec<String>,
            hi: Vec<String>,
        }
        Wire {
            lo: self.lo.iter().map(ToString::to_string).collect(),
            hi: self.hi.iter().map(ToString::to_string).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for SearchBox<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            lo: Vec<String>,
            hi: Vec<String>,
        }
        let w = Wire::deserialize(deserializer)?;
        let lo = parse_bounds(&w.lo).map_err(serde::de::Error::custom)?;
        let hi = parse_bounds(&w.hi).map_err(serde::de::Error::custom)?;
        SearchBox::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

/// Parses decimal bound strings exactly (shortest round-trip decimal form).
pub fn parse_bounds<T: Scalar>(raw: &[String]) -> Result<Vec<T>, GeometryError> {
    raw.iter().map(|s| parse_bound(s)).collect()
}

pub fn parse_bound<T: Scalar>(s: &str) -> Result<T, GeometryError> {
    s.trim().parse::<T>().map_err(|_| GeometryError::BadBound(s.to_string()))
}
