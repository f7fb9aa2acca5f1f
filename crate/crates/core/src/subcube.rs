//! Subcube geometry for the local phase.
//!
//! A local-phase region is built in three steps: pick one of the eight octants
//! of the 3-D base cube, replicate its bounds cyclically across all
//! dimensions, then shrink every coordinate by `(1/2)^m`. Scaling is
//! multiplicative on the stored bounds (no incremental halving), so for
//! power-of-two factors the result is exact.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmarks::FunctionId;
use crate::geometry::{parse_bound, GeometryError, SearchBox};
use crate::scalar::Scalar;

/// Half-width of the protocol search cube `[-100, 100]^d`.
pub const CUBE_HALF_WIDTH: f64 = 100.0;

const BUILTIN_SUBCUBES: &str = include_str!("../fixtures/subcubes.json");

/// The protocol search cube `[-100, 100]^dim`.
pub fn search_cube<T: Scalar>(dim: usize) -> Result<SearchBox<T>, GeometryError> {
    SearchBox::cube(T::lit(-CUBE_HALF_WIDTH), T::lit(CUBE_HALF_WIDTH), dim)
}

/// The eight octants of a 3-D box, lower half (`-`) before upper half (`+`)
/// with the last axis varying fastest:
/// `(-,-,-), (-,-,+), (-,+,-), (-,+,+), (+,-,-), (+,-,+), (+,+,-), (+,+,+)`.
pub fn octant_sequence<T: Scalar>(box3: &SearchBox<T>) -> Result<Vec<SearchBox<T>>, GeometryError> {
    if box3.dim() != 3 {
        return Err(GeometryError::WrongDimension { expected: 3, actual: box3.dim() });
    }
    let mid = box3.midpoint();
    (0..8u8)
        .map(|n| {
            let intervals: Vec<(T, T)> = (0..3)
                .map(|axis| {
                    let upper = n >> (2 - axis) & 1 == 1;
                    let (lo, hi) = box3.interval(axis);
                    if upper {
                        (mid[axis], hi)
                    } else {
                        (lo, mid[axis])
                    }
                })
                .collect();
            SearchBox::from_intervals(&intervals)
        })
        .collect()
}

/// Replicates a 3-D box across `dim` dimensions: dimension `i` (0-based) takes component `i % 3`.
pub fn cyclic_extend<T: Scalar>(box3: &SearchBox<T>, dim: usize) -> Result<SearchBox<T>, GeometryError> {
    if box3.dim() != 3 {
        return Err(GeometryError::WrongDimension { expected: 3, actual: box3.dim() });
    }
    if dim < 3 {
        return Err(GeometryError::WrongDimension { expected: 3, actual: dim });
    }
    let lo = (0..dim).map(|i| box3.lo()[i % 3]).collect();
    let hi = (0..dim).map(|i| box3.hi()[i % 3]).collect();
    SearchBox::new(lo, hi)
}

/// Multiplies every bound by `(1/2)^scale_exponent`.
pub fn scale_box<T: Scalar>(b: &SearchBox<T>, scale_exponent: u32) -> Result<SearchBox<T>, GeometryError> {
    let factor = match i32::try_from(scale_exponent) {
        Ok(m) => T::lit(0.5).powi(m),
        Err(_) => T::zero(),
    };
    let lo: Vec<T> = b.lo().iter().map(|&v| v * factor).collect();
    let hi: Vec<T> = b.hi().iter().map(|&v| v * factor).collect();
    if let Some(i) = lo.iter().zip(&hi).position(|(&l, &h)| (h - l).is_nan() || h - l <= T::zero()) {
        return Err(GeometryError::DegenerateBox(i));
    }
    SearchBox::new(lo, hi)
}

/// 1-based position of `box3` in the octant sequence of the 3-D protocol cube, if it is one.
pub fn octant_index_of<T: Scalar>(box3: &SearchBox<T>) -> Option<usize> {
    let cube = search_cube::<T>(3).ok()?;
    octant_sequence(&cube).ok()?.iter().position(|o| o == box3).map(|i| i + 1)
}

/// Octant index, scale exponent and target dimension: everything that pins down a local region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubcubeSpec {
    pub octant_index: usize,
    pub scale_exponent: u32,
    pub dim: usize,
}

impl SubcubeSpec {
    pub fn new(octant_index: usize, scale_exponent: u32, dim: usize) -> Result<Self, GeometryError> {
        let spec = Self { octant_index, scale_exponent, dim };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(1..=8).contains(&self.octant_index) {
            return Err(GeometryError::OctantIndex(self.octant_index));
        }
        if self.dim < 3 {
            return Err(GeometryError::WrongDimension { expected: 3, actual: self.dim });
        }
        Ok(())
    }

    /// The 3-D octant of `[-100, 100]^3` this spec refers to.
    pub fn octant<T: Scalar>(&self) -> Result<SearchBox<T>, GeometryError> {
        self.validate()?;
        let octants = octant_sequence(&search_cube::<T>(3)?)?;
        Ok(octants[self.octant_index - 1].clone())
    }

    /// `scale_box(cyclic_extend(octant, dim), m)`.
    pub fn region<T: Scalar>(&self) -> Result<SearchBox<T>, GeometryError> {
        local_region(&self.octant::<T>()?, self.dim, self.scale_exponent)
    }
}

/// Extends a 3-D base box to `dim` and scales it.
pub fn local_region<T: Scalar>(
    box3: &SearchBox<T>,
    dim: usize,
    scale_exponent: u32,
) -> Result<SearchBox<T>, GeometryError> {
    scale_box(&cyclic_extend(box3, dim)?, scale_exponent)
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("malformed subcube fixture: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("fixture for {id}: {source}")]
    Geometry { id: FunctionId, source: GeometryError },
    #[error("no subcube fixture for {0}")]
    UnknownFunction(FunctionId),
}

/// One row of the selected-subcube / scaling-factor tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubcubeFixture {
    pub id: FunctionId,
    /// Printed 3-D subcube, `[[lo, hi]; 3]` as decimal strings.
    pub octant: Vec<[String; 2]>,
    /// `m` in `(1/2)^m`; 0 where no scaling was applied.
    pub scale_exponent: u32,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub suspected_typo: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected: Option<Vec<[String; 2]>>,
}

impl SubcubeFixture {
    fn to_box<T: Scalar>(&self, raw: &[[String; 2]]) -> Result<SearchBox<T>, FixtureError> {
        let geo = |source| FixtureError::Geometry { id: self.id, source };
        if raw.len() != 3 {
            return Err(geo(GeometryError::WrongDimension { expected: 3, actual: raw.len() }));
        }
        let intervals = raw
            .iter()
            .map(|[l, h]| Ok((parse_bound::<T>(l)?, parse_bound::<T>(h)?)))
            .collect::<Result<Vec<_>, GeometryError>>()
            .map_err(geo)?;
        SearchBox::from_intervals(&intervals).map_err(geo)
    }

    /// The subcube exactly as printed.
    pub fn printed_box<T: Scalar>(&self) -> Result<SearchBox<T>, FixtureError> {
        self.to_box(&self.octant)
    }

    /// The subcube used for runs: the corrected entry where the printed one is a suspected typo.
    pub fn effective_box<T: Scalar>(&self) -> Result<SearchBox<T>, FixtureError> {
        match &self.corrected {
            Some(c) => self.to_box(c),
            None => self.printed_box(),
        }
    }

    /// Local-phase region for `dim` dimensions.
    pub fn region<T: Scalar>(&self, dim: usize) -> Result<SearchBox<T>, FixtureError> {
        local_region(&self.effective_box::<T>()?, dim, self.scale_exponent)
            .map_err(|source| FixtureError::Geometry { id: self.id, source })
    }

    /// Equivalent [`SubcubeSpec`] when the effective box is one of the eight octants.
    pub fn spec(&self, dim: usize) -> Result<Option<SubcubeSpec>, FixtureError> {
        let b = self.effective_box::<f64>()?;
        Ok(octant_index_of(&b).map(|octant_index| SubcubeSpec {
            octant_index,
            scale_exponent: self.scale_exponent,
            dim,
        }))
    }
}

/// Parsed subcube fixture table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubcubeTable {
    rows: Vec<SubcubeFixture>,
}

impl SubcubeTable {
    pub fn from_json(json: &str) -> Result<Self, FixtureError> {
        let rows: Vec<SubcubeFixture> = serde_json::from_str(json)?;
        for r in &rows {
            r.printed_box::<f64>()?;
            r.effective_box::<f64>()?;
        }
        Ok(Self { rows })
    }

    /// The table shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_SUBCUBES).expect("bundled subcubes.json is valid")
    }

    pub fn rows(&self) -> &[SubcubeFixture] {
        &self.rows
    }

    pub fn get(&self, fid: FunctionId) -> Result<&SubcubeFixture, FixtureError> {
        self.rows.iter().find(|r| r.id == fid).ok_or(FixtureError::UnknownFunction(fid))
    }
}

/// Printed base subcube and scale exponent for `fid` from the bundled table.
pub fn subcube_for_function<T: Scalar>(fid: FunctionId) -> Result<(SearchBox<T>, u32), FixtureError> {
    let table = SubcubeTable::builtin();
    let row = table.get(fid)?;
    Ok((row.printed_box()?, row.scale_exponent))
}

/// Iterations a population of `per_iteration` distinct strings needs to sweep all
/// `base^length` strings: the positive integer nearest `base^length / per_iteration`,
/// ties rounding up.
///
/// # Panics
/// If `base < 2` or `per_iteration == 0`.
pub fn exhaustive_iteration_estimate(base: u32, length: u32, per_iteration: u64) -> BigUint {
    assert!(base >= 2, "representation base must be at least 2");
    assert!(per_iteration >= 1, "population size must be positive");
    let total = BigUint::from(base).pow(length);
    let n = BigUint::from(per_iteration);
    let two = BigUint::from(2u8);
    let rounded = (&total * &two + &n) / (&n * &two);
    if rounded < BigUint::one() {
        BigUint::one()
    } else {
        rounded
    }
}

/// [`exhaustive_iteration_estimate`] as a `u64` when it fits.
pub fn exhaustive_iteration_estimate_u64(base: u32, length: u32, per_iteration: u64) -> Option<u64> {
    exhaustive_iteration_estimate(base, length, per_iteration).to_u64()
}
