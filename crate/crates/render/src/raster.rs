//! Scanline rasterization of sketch faces.

use sem_core::geom::{self, loop_outline};
use sem_core::quant::GRID;
use sem_core::Sketch;

use crate::error::RenderError;

/// Occupancy of the normalized sketch square `[0, 1)²`, row-major with cell
/// `(i, j)` centered at `((i + 0.5) / res, (j + 0.5) / res)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region2D {
    resolution: usize,
    cells: Vec<bool>,
}

impl Region2D {
    pub fn empty(resolution: usize) -> Self {
        Self { resolution, cells: vec![false; resolution * resolution] }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[j * self.resolution + i]
    }

    /// Occupancy at a normalized position; outside the square is empty.
    #[inline]
    pub fn sample(&self, u: f64, v: f64) -> bool {
        if !(0.0..1.0).contains(&u) || !(0.0..1.0).contains(&v) {
            return false;
        }
        let r = self.resolution as f64;
        self.get((u * r) as usize, (v * r) as usize)
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.cells.len() as f64
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    fn zip_with(&mut self, other: &Region2D, f: impl Fn(bool, bool) -> bool) {
        for (a, &b) in self.cells.iter_mut().zip(&other.cells) {
            *a = f(*a, b);
        }
    }
}

/// Even-odd fill of one closed polygon given in sketch grid units.
fn fill_polygon(poly: &[[f64; 2]], resolution: usize) -> Region2D {
    let mut region = Region2D::empty(resolution);
    let scale = resolution as f64 / GRID as f64;
    let pts: Vec<[f64; 2]> = poly.iter().map(|p| [p[0] * scale, p[1] * scale]).collect();
    let n = pts.len();
    if n < 3 {
        return region;
    }
    let mut xs = Vec::new();
    for j in 0..resolution {
        let y = j as f64 + 0.5;
        xs.clear();
        for k in 0..n {
            let a = pts[k];
            let b = pts[(k + 1) % n];
            if (a[1] > y) != (b[1] > y) {
                xs.push(a[0] + (y - a[1]) / (b[1] - a[1]) * (b[0] - a[0]));
            }
        }
        xs.sort_by(f64::total_cmp);
        for span in xs.chunks_exact(2) {
            // cells whose centers fall in [x0, x1)
            let first = (span[0] - 0.5).ceil().max(0.0) as usize;
            let last = ((span[1] - 0.5).ceil().min(resolution as f64)) as usize;
            for i in first..last {
                region.cells[j * resolution + i] = true;
            }
        }
    }
    region
}

pub(crate) fn rasterize_indexed(sketch: &Sketch, resolution: usize, pair: usize) -> Result<Region2D, RenderError> {
    if resolution < 8 {
        return Err(RenderError::InvalidResolution(resolution));
    }
    let mut out = Region2D::empty(resolution);
    for (f, face) in sketch.faces.iter().enumerate() {
        let outlines = face
            .loops
            .iter()
            .enumerate()
            .map(|(l, lp)| loop_outline(lp).map_err(|e| RenderError::from_geom(e, pair, f, l)))
            .collect::<Result<Vec<_>, _>>()?;
        let Some((outer, holes)) = outlines.split_first() else { continue };
        let mut filled = fill_polygon(outer, resolution);
        let nested = holes.iter().all(|h| h.iter().all(|&p| geom::contains(outer, p) || on_outline(outer, p)));
        for hole in holes {
            let mask = fill_polygon(hole, resolution);
            if nested {
                filled.zip_with(&mask, |a, b| a && !b);
            } else {
                filled.zip_with(&mask, |a, b| a ^ b);
            }
        }
        out.zip_with(&filled, |a, b| a || b);
    }
    Ok(out)
}

fn on_outline(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = poly.len();
    (0..n).any(|k| {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let within = (p[0] - a[0]) * (p[0] - b[0]) <= 1e-9 && (p[1] - a[1]) * (p[1] - b[1]) <= 1e-9;
        cross.abs() < 1e-9 && within
    })
}

/// Fills every face of a sketch: the first loop of a face is its boundary,
/// later loops are holes. Holes that leave the boundary fall back to an
/// even-odd fill of the whole face.
pub fn rasterize_sketch(sketch: &Sketch, resolution: usize) -> Result<Region2D, RenderError> {
    rasterize_indexed(sketch, resolution, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sem_core::model::build::{circle, rect, sketch_of};
    use sem_core::{Face, Loop, Point, Curve};

    #[test]
    fn square_area_fraction() {
        let r = rasterize_sketch(&sketch_of(rect(8, 8, 56, 56)), 64).unwrap();
        assert!((r.fraction() - 0.5625).abs() <= 0.02, "{}", r.fraction());
        // the grid-aligned square is exact
        assert_eq!(r.count(), 48 * 48);
    }

    #[test]
    fn full_grid_circle() {
        let lp = Loop::new(vec![Curve::Circle {
            points: [Point::new(32, 1), Point::new(63, 32), Point::new(32, 63), Point::new(1, 32)],
        }]);
        let r = rasterize_sketch(&sketch_of(lp), 64).unwrap();
        let expected = std::f64::consts::FRAC_PI_4 * (62.0f64 / 64.0).powi(2);
        assert!((r.fraction() - expected).abs() <= 0.03, "{} vs {expected}", r.fraction());
    }

    #[test]
    fn hole_equal_to_outer_is_empty() {
        let sketch = sem_core::Sketch::new(vec![Face::new(vec![rect(8, 8, 56, 56), rect(8, 8, 56, 56)])]);
        assert!(rasterize_sketch(&sketch, 64).unwrap().is_empty());
    }

    #[test]
    fn nested_hole_is_subtracted() {
        let sketch = sem_core::Sketch::new(vec![Face::new(vec![rect(8, 8, 56, 56), rect(24, 24, 40, 40)])]);
        let r = rasterize_sketch(&sketch, 64).unwrap();
        assert_eq!(r.count(), 48 * 48 - 16 * 16);
        assert!(!r.get(32, 32));
    }

    #[test]
    fn escaping_hole_uses_even_odd() {
        let sketch = sem_core::Sketch::new(vec![Face::new(vec![rect(8, 8, 40, 40), rect(32, 32, 56, 56)])]);
        let r = rasterize_sketch(&sketch, 64).unwrap();
        assert_eq!(r.count(), 32 * 32 + 24 * 24 - 2 * 8 * 8);
        assert!(r.get(50, 50));
    }

    #[test]
    fn faces_union() {
        let sketch = sem_core::Sketch::new(vec![
            Face::new(vec![rect(8, 8, 24, 24)]),
            Face::new(vec![circle(44, 44, 8)]),
        ]);
        let r = rasterize_sketch(&sketch, 128).unwrap();
        let disc = std::f64::consts::PI * 16.0 * 16.0;
        let expected = 32.0 * 32.0 + disc;
        assert!((r.count() as f64 - expected).abs() / expected < 0.02);
    }

    #[test]
    fn tiny_resolution_rejected() {
        assert_eq!(
            rasterize_sketch(&sketch_of(rect(8, 8, 56, 56)), 4),
            Err(RenderError::InvalidResolution(4))
        );
    }
}
