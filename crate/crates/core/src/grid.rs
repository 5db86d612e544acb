//! Ordered time partitions.

use crate::error::{Error, Result};

/// Strictly increasing times `t_0 < t_1 < ... < t_N` with `N >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least two points, got {}",
                points.len()
            )));
        }
        if let Some(index) = points.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite {
                what: "grid",
                index,
            });
        }
        if let Some(k) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "points not strictly increasing at index {}: {} then {}",
                k + 1,
                points[k],
                points[k + 1]
            )));
        }
        Ok(Self { points })
    }

    /// `cells` equal cells on `[start, end]`. The last point is `end` exactly.
    pub fn uniform(start: f64, end: f64, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidGrid("zero cells".into()));
        }
        if !(end > start) {
            return Err(Error::InvalidGrid(format!("empty interval [{start}, {end}]")));
        }
        let span = end - start;
        let mut points: Vec<f64> = (0..=cells)
            .map(|k| start + span * (k as f64) / (cells as f64))
            .collect();
        points[cells] = end;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn cells(&self) -> usize {
        self.points.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn horizon(&self) -> f64 {
        self.end() - self.start()
    }

    /// Length of cell `k`.
    pub fn step(&self, k: usize) -> f64 {
        self.points[k + 1] - self.points[k]
    }

    pub fn mesh(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn is_uniform(&self, rel_tol: f64) -> bool {
        let nominal = self.horizon() / self.cells() as f64;
        self.points
            .windows(2)
            .all(|w| ((w[1] - w[0]) - nominal).abs() <= rel_tol * nominal)
    }

    /// Splits every cell into `factor` equal sub-cells. Original points keep
    /// their exact values at indices `k * factor`.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::param("fine_factor", "must be at least 1"));
        }
        let mut points = Vec::with_capacity(self.cells() * factor + 1);
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            points.push(a);
            for j in 1..factor {
                points.push(a + (b - a) * (j as f64) / (factor as f64));
            }
        }
        points.push(self.end());
        Self::new(points)
    }

    /// Keeps every `factor`-th point. The number of cells must be divisible by `factor`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.cells() % factor != 0 {
            return Err(Error::Mismatch(format!(
                "cannot coarsen {} cells by factor {factor}",
                self.cells()
            )));
        }
        Self::new(self.points.iter().step_by(factor).copied().collect())
    }

    /// Index of the cell containing `t` (clamped to the grid).
    pub fn locate(&self, t: f64) -> usize {
        match self.points.partition_point(|&p| p <= t) {
            0 => 0,
            k => (k - 1).min(self.cells() - 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_points() {
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.0, 0.5]).is_err());
        assert!(matches!(
            TimeGrid::new(vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn uniform_and_mesh() {
        let g = TimeGrid::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(g.cells(), 4);
        assert_eq!(g.points(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.mesh(), 0.25);
        assert!(g.is_uniform(1e-12));
    }

    #[test]
    fn refine_preserves_original_points() {
        let g = TimeGrid::new(vec![0.0, 0.3, 1.0]).unwrap();
        let f = g.refine(3).unwrap();
        assert_eq!(f.cells(), 6);
        assert_eq!(f.points()[0], 0.0);
        assert_eq!(f.points()[3], 0.3);
        assert_eq!(f.points()[6], 1.0);
        assert_eq!(f.coarsen(3).unwrap(), g);
        assert!(f.coarsen(4).is_err());
    }

    #[test]
    fn locate_cells() {
        let g = TimeGrid::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(g.locate(-1.0), 0);
        assert_eq!(g.locate(0.3), 1);
        assert_eq!(g.locate(0.5), 2);
        assert_eq!(g.locate(1.0), 3);
        assert_eq!(g.locate(5.0), 3);
    }
}
