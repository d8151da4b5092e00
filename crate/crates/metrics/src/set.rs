use rayon::prelude::*;
use render::PointCloud;
use serde::{Deserialize, Serialize};

use crate::chamfer::{chamfer_indexed, KdTree};
use crate::error::MetricsError;

/// Default occupancy grid size per axis for [`jsd`].
pub const JSD_GRID: usize = 28;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetMetrics {
    pub cov: f64,
    pub mmd: f64,
    pub jsd: f64,
}

fn check(set: &[PointCloud], name: &'static str) -> Result<(), MetricsError> {
    if set.is_empty() {
        return Err(MetricsError::EmptySet(name));
    }
    if set.iter().any(PointCloud::is_empty) {
        return Err(MetricsError::EmptyCloud);
    }
    Ok(())
}

/// Chamfer distances `[g][r]` between every generated and reference cloud.
pub fn chamfer_matrix(generated: &[PointCloud], reference: &[PointCloud]) -> Result<Vec<Vec<f64>>, MetricsError> {
    check(generated, "generated")?;
    check(reference, "reference")?;
    let gt: Vec<KdTree> = generated.par_iter().map(|c| KdTree::new(&c.points)).collect();
    let rt: Vec<KdTree> = reference.par_iter().map(|c| KdTree::new(&c.points)).collect();
    Ok((0..generated.len())
        .into_par_iter()
        .map(|g| {
            (0..reference.len())
                .map(|r| chamfer_indexed(&generated[g], &gt[g], &reference[r], &rt[r]))
                .collect()
        })
        .collect())
}

fn argmin(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v < row[best] {
            best = i;
        }
    }
    best
}

/// Share of references that are the nearest reference of some generation, in percent.
/// References tied at the minimum distance are all matched.
pub fn coverage_from_matrix(matrix: &[Vec<f64>], n_reference: usize) -> f64 {
    let mut hit = vec![false; n_reference];
    for row in matrix {
        let best = row[argmin(row)];
        for (h, &d) in hit.iter_mut().zip(row) {
            *h |= d == best;
        }
    }
    100.0 * hit.iter().filter(|&&h| h).count() as f64 / n_reference as f64
}

/// Mean over references of the distance to the closest generation.
pub fn mmd_from_matrix(matrix: &[Vec<f64>], n_reference: usize) -> f64 {
    (0..n_reference)
        .map(|r| matrix.iter().map(|row| row[r]).fold(f64::INFINITY, f64::min))
        .sum::<f64>()
        / n_reference as f64
}

pub fn coverage(generated: &[PointCloud], reference: &[PointCloud]) -> Result<f64, MetricsError> {
    let m = chamfer_matrix(generated, reference)?;
    Ok(coverage_from_matrix(&m, reference.len()))
}

pub fn mmd(generated: &[PointCloud], reference: &[PointCloud]) -> Result<f64, MetricsError> {
    let m = chamfer_matrix(generated, reference)?;
    Ok(mmd_from_matrix(&m, reference.len()))
}

/// Occupancy distribution of a set: each cloud marks the cells of a `grid³`
/// lattice over `[-1, 1]³` it touches, marks are summed over the set and
/// normalized to sum 1.
pub fn occupancy_distribution(set: &[PointCloud], grid: usize) -> Result<Vec<f64>, MetricsError> {
    if grid == 0 {
        return Err(MetricsError::InvalidGrid);
    }
    let mut counts = vec![0.0f64; grid.pow(3)];
    let mut seen = vec![false; grid.pow(3)];
    let cell = |v: f64| (((v + 1.0) / 2.0 * grid as f64).floor().max(0.0) as usize).min(grid - 1);
    for cloud in set {
        seen.iter_mut().for_each(|s| *s = false);
        for p in &cloud.points {
            let i = cell(p[0]) + grid * (cell(p[1]) + grid * cell(p[2]));
            if !seen[i] {
                seen[i] = true;
                counts[i] += 1.0;
            }
        }
    }
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        return Err(MetricsError::EmptyCloud);
    }
    Ok(counts.into_iter().map(|c| c / total).collect())
}

/// Base-2 Jensen-Shannon divergence of two discrete distributions.
pub fn js_divergence(p: &[f64], q: &[f64]) -> f64 {
    let kl_to_mid = |a: f64, m: f64| if a > 0.0 { a * (a / m).log2() } else { 0.0 };
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            let m = 0.5 * (a + b);
            0.5 * kl_to_mid(a, m) + 0.5 * kl_to_mid(b, m)
        })
        .sum()
}

pub fn jsd(generated: &[PointCloud], reference: &[PointCloud], grid: usize) -> Result<f64, MetricsError> {
    check(generated, "generated")?;
    check(reference, "reference")?;
    let p = occupancy_distribution(generated, grid)?;
    let q = occupancy_distribution(reference, grid)?;
    Ok(js_divergence(&p, &q))
}

pub fn set_metrics(generated: &[PointCloud], reference: &[PointCloud], grid: usize) -> Result<SetMetrics, MetricsError> {
    let m = chamfer_matrix(generated, reference)?;
    Ok(SetMetrics {
        cov: coverage_from_matrix(&m, reference.len()),
        mmd: mmd_from_matrix(&m, reference.len()),
        jsd: jsd(generated, reference, grid)?,
    })
}
