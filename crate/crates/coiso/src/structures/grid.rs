use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::StructureError;
use crate::expr::{Chart, Point, Rational};

/// How a grid was produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridProvenance {
    Explicit,
    /// Per-axis `(lo, hi, steps)`; one step means the single value `lo`.
    Lattice(Vec<(Rational, Rational, usize)>),
    Random { seed: u64, count: usize, bound: Rational },
}

/// A finite set of sample points on one chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleGrid {
    chart: Arc<Chart>,
    points: Vec<Vec<Rational>>,
    provenance: GridProvenance,
}

impl SampleGrid {
    pub fn explicit(chart: &Arc<Chart>, points: Vec<Vec<Rational>>) -> Result<SampleGrid, StructureError> {
        if let Some(p) = points.iter().find(|p| p.len() != chart.dim()) {
            return Err(StructureError::InvalidGrid(format!(
                "point has {} coordinates, chart {} has {}",
                p.len(),
                chart,
                chart.dim()
            )));
        }
        Ok(SampleGrid {
            chart: chart.clone(),
            points,
            provenance: GridProvenance::Explicit,
        })
    }

    pub fn from_points(points: &[Point]) -> Result<SampleGrid, StructureError> {
        let chart = points
            .first()
            .map(|p| p.chart().clone())
            .ok_or_else(|| StructureError::InvalidGrid("grid has no points".into()))?;
        for p in points {
            crate::expr::check_chart(&chart, p.chart())?;
        }
        SampleGrid::explicit(&chart, points.iter().map(|p| p.coords().to_vec()).collect())
    }

    /// Cartesian lattice with evenly spaced values `lo + i (hi − lo)/(steps − 1)` per axis.
    pub fn lattice(chart: &Arc<Chart>, axes: Vec<(Rational, Rational, usize)>) -> Result<SampleGrid, StructureError> {
        if axes.len() != chart.dim() {
            return Err(StructureError::InvalidGrid(format!(
                "lattice has {} axes, chart {} has {}",
                axes.len(),
                chart,
                chart.dim()
            )));
        }
        let mut values: Vec<Vec<Rational>> = Vec::new();
        for (lo, hi, steps) in &axes {
            if *steps == 0 {
                return Err(StructureError::InvalidGrid("lattice axis needs at least one step".into()));
            }
            if *steps == 1 {
                values.push(vec![lo.clone()]);
                continue;
            }
            let h = (hi - lo) / Rational::from_integer(BigInt::from(*steps - 1));
            values.push(
                (0..*steps)
                    .map(|i| lo + &h * Rational::from_integer(BigInt::from(i)))
                    .collect(),
            );
        }
        let mut points: Vec<Vec<Rational>> = vec![Vec::new()];
        for axis in &values {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(v.clone());
                        q
                    })
                })
                .collect();
        }
        Ok(SampleGrid {
            chart: chart.clone(),
            points,
            provenance: GridProvenance::Lattice(axes),
        })
    }

    /// `count` points with coordinates `bound·k/1000`, `k` uniform in `[−1000, 1000]`.
    pub fn random(chart: &Arc<Chart>, seed: u64, count: usize, bound: Rational) -> Result<SampleGrid, StructureError> {
        if bound < Rational::zero() {
            return Err(StructureError::InvalidGrid("random box must be nonnegative".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..count)
            .map(|_| {
                (0..chart.dim())
                    .map(|_| {
                        let k: i64 = rng.gen_range(-1000..=1000);
                        &bound * Rational::new(BigInt::from(k), BigInt::from(1000))
                    })
                    .collect()
            })
            .collect();
        Ok(SampleGrid {
            chart: chart.clone(),
            points,
            provenance: GridProvenance::Random { seed, count, bound },
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn points(&self) -> &[Vec<Rational>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        Point::new(&self.chart, self.points[i].clone()).expect("grid points match the chart")
    }

    pub fn provenance(&self) -> &GridProvenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
