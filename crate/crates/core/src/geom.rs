//! Loop tessellation in sketch grid units.
//!
//! Arcs pass through their start, their stored midpoint, and the first point of
//! the following curve. Circles are fit to their four stored points.

use thiserror::Error;

use crate::model::{Curve, Loop, Point};

/// Circles whose stored points stray further than this from the fit are rejected.
pub const CIRCLE_FIT_TOLERANCE: f64 = 2.0;

/// Arcs with a larger circumradius are drawn as straight segments.
pub const MAX_ARC_RADIUS: f64 = 1e4;

/// Polygon vertices used for a full circle.
pub const CIRCLE_SEGMENTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("arc {curve} has a zero-length chord")]
    DegenerateArc { curve: usize },
    #[error("circle points deviate {residual:.3} grid units from the best fit")]
    CircleFitFailure { residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: [f64; 2],
    pub radius: f64,
    /// Largest distance of a stored point from the fitted circle.
    pub residual: f64,
}

/// Centroid / mean-radius fit through four points.
pub fn fit_circle(points: &[Point; 4]) -> CircleFit {
    let pts = points.map(Point::to_f64);
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / 4.0;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / 4.0;
    let dists = pts.map(|p| (p[0] - cx).hypot(p[1] - cy));
    let radius = dists.iter().sum::<f64>() / 4.0;
    let residual = dists.iter().map(|d| (d - radius).abs()).fold(0.0, f64::max);
    CircleFit { center: [cx, cy], radius, residual }
}

/// Closed outline of a loop as polygon vertices (the closing edge is implicit).
pub fn loop_outline(lp: &Loop) -> Result<Vec<[f64; 2]>, GeomError> {
    if let [Curve::Circle { points }] = lp.curves.as_slice() {
        let fit = fit_circle(points);
        if fit.residual > CIRCLE_FIT_TOLERANCE {
            return Err(GeomError::CircleFitFailure { residual: fit.residual });
        }
        return Ok((0..CIRCLE_SEGMENTS)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / CIRCLE_SEGMENTS as f64;
                [fit.center[0] + fit.radius * t.cos(), fit.center[1] + fit.radius * t.sin()]
            })
            .collect());
    }

    let n = lp.curves.len();
    let mut out = Vec::new();
    for (i, curve) in lp.curves.iter().enumerate() {
        let end = lp.curves[(i + 1) % n].first_point();
        match *curve {
            Curve::Line { start } => out.push(start.to_f64()),
            Curve::Arc { start, mid } => {
                if start == end {
                    return Err(GeomError::DegenerateArc { curve: i });
                }
                out.extend(arc_points(start.to_f64(), mid.to_f64(), end.to_f64()));
            }
            Curve::Circle { points } => {
                // Only reachable for hand-built loops that break the circle-only rule.
                out.push(points[0].to_f64());
            }
        }
    }
    Ok(out)
}

/// Points from `start` toward `end` (exclusive) along the arc through `mid`.
fn arc_points(start: [f64; 2], mid: [f64; 2], end: [f64; 2]) -> Vec<[f64; 2]> {
    let Some((center, radius)) = circumcircle(start, mid, end) else {
        return vec![start, mid];
    };
    if radius > MAX_ARC_RADIUS {
        return vec![start, mid];
    }
    let angle = |p: [f64; 2]| (p[1] - center[1]).atan2(p[0] - center[0]);
    let tau = std::f64::consts::TAU;
    let a0 = angle(start);
    let ccw_end = (angle(end) - a0).rem_euclid(tau);
    let ccw_mid = (angle(mid) - a0).rem_euclid(tau);
    let sweep = if ccw_mid < ccw_end { ccw_end } else { ccw_end - tau };
    let steps = ((sweep.abs() / tau * CIRCLE_SEGMENTS as f64).ceil() as usize).max(2);
    (0..steps)
        .map(|i| {
            let t = a0 + sweep * i as f64 / steps as f64;
            [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
        })
        .collect()
}

fn circumcircle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Option<([f64; 2], f64)> {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    if d.abs() < 1e-12 {
        return None;
    }
    let sq = |p: [f64; 2]| p[0] * p[0] + p[1] * p[1];
    let ux = (sq(a) * (b[1] - c[1]) + sq(b) * (c[1] - a[1]) + sq(c) * (a[1] - b[1])) / d;
    let uy = (sq(a) * (c[0] - b[0]) + sq(b) * (a[0] - c[0]) + sq(c) * (b[0] - a[0])) / d;
    let r = (a[0] - ux).hypot(a[1] - uy);
    Some(([ux, uy], r))
}

/// Signed shoelace area; positive for counter-clockwise outlines.
pub fn signed_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let p = poly[i];
            let q = poly[(i + 1) % n];
            p[0] * q[1] - q[0] * p[1]
        })
        .sum();
    twice / 2.0
}

/// Even-odd point-in-polygon test.
pub fn contains(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}
