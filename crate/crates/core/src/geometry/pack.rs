use std::collections::HashMap;

use rayon::prelude::*;

use super::Ellipsoid;
use crate::error::{Error, Result};
use crate::sampling::sample_uniform_ellipsoid;
use crate::seed;

/// Largest dimension accepted by [`greedy_pack`].
pub const MAX_PACK_DIM: usize = 6;

/// Consecutive rejected candidates after which an attempt stops.
const PATIENCE: usize = 4_000;
const MAX_CANDIDATES: usize = 4_000_000;
const MAX_LATTICE_POINTS: usize = 2_000_000;
const SPACING_TOL: f64 = 1e-12;

type Cell = Vec<i64>;

struct Packing {
    dim: usize,
    cell: f64,
    min_d2: f64,
    centers: Vec<f64>,
    grid: HashMap<Cell, Vec<usize>>,
}

impl Packing {
    fn new(dim: usize, eps: f64) -> Self {
        Packing {
            dim,
            cell: 2.0 * eps,
            min_d2: 4.0 * eps * eps * (1.0 - SPACING_TOL),
            centers: Vec::new(),
            grid: HashMap::new(),
        }
    }

    fn len(&self) -> usize {
        self.centers.len() / self.dim
    }

    fn cell_of(&self, p: &[f64]) -> Cell {
        p.iter().map(|x| (x / self.cell).floor() as i64).collect()
    }

    fn fits(&self, p: &[f64]) -> bool {
        let base = self.cell_of(p);
        let mut offset = vec![-1i64; self.dim];
        loop {
            let key: Cell = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
            if let Some(ids) = self.grid.get(&key) {
                for &id in ids {
                    let c = &self.centers[id * self.dim..(id + 1) * self.dim];
                    let d2: f64 = c.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 < self.min_d2 {
                        return false;
                    }
                }
            }
            let mut k = 0;
            while k < self.dim {
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
            if k == self.dim {
                return true;
            }
        }
    }

    fn try_add(&mut self, p: &[f64]) -> bool {
        if !self.fits(p) {
            return false;
        }
        let id = self.len();
        self.centers.extend_from_slice(p);
        self.grid.entry(self.cell_of(p)).or_default().push(id);
        true
    }
}

fn lattice_candidates(ellipsoid: &Ellipsoid, spacing: f64) -> Option<Vec<Vec<f64>>> {
    let radii = ellipsoid.radii();
    let steps: Vec<usize> = radii
        .iter()
        .map(|r| (2.0 * r / spacing * (1.0 + SPACING_TOL)).floor() as usize + 1)
        .collect();
    let total = steps
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .filter(|&t| t <= MAX_LATTICE_POINTS)?;
    let mut out = Vec::new();
    let mut idx = vec![0usize; radii.len()];
    for _ in 0..total {
        let p: Vec<f64> = idx
            .iter()
            .zip(radii)
            .map(|(&i, r)| -r + spacing * i as f64)
            .collect();
        if ellipsoid.contains(&p, SPACING_TOL) {
            out.push(p);
        }
        for (k, i) in idx.iter_mut().enumerate() {
            *i += 1;
            if *i < steps[k] {
                break;
            }
            *i = 0;
        }
    }
    Some(out)
}

fn run_attempt(ellipsoid: &Ellipsoid, eps: f64, seed_value: u64, attempt: u64) -> usize {
    let mut packing = Packing::new(ellipsoid.dim(), eps);
    if attempt == 0 {
        if let Some(points) = lattice_candidates(ellipsoid, 2.0 * eps) {
            for p in points {
                packing.try_add(&p);
            }
        }
    }
    let mut rng = seed::rng(seed_value, &[0x7061_636b, attempt]);
    let mut misses = 0;
    for _ in 0..MAX_CANDIDATES {
        let p = sample_uniform_ellipsoid(ellipsoid.radii(), &mut rng);
        if packing.try_add(&p) {
            misses = 0;
        } else {
            misses += 1;
            if misses >= PATIENCE {
                break;
            }
        }
    }
    packing.len()
}

/// Random sequential addition of centres with pairwise distance at least
/// `2 eps` inside the ellipsoid; best count over `attempts` runs.
///
/// Attempt 0 first places the points of a cubic lattice of spacing `2 eps`
/// anchored at the ellipsoid's lower corner, then continues randomly.
pub fn greedy_pack(
    ellipsoid: &Ellipsoid,
    eps: f64,
    seed_value: u64,
    attempts: usize,
) -> Result<usize> {
    if ellipsoid.dim() > MAX_PACK_DIM {
        return Err(Error::config(format!(
            "greedy packing is limited to dimension {MAX_PACK_DIM}, got {}",
            ellipsoid.dim()
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("eps must be > 0, got {eps}")));
    }
    if attempts == 0 {
        return Err(Error::config("greedy packing needs at least one attempt"));
    }
    Ok((0..attempts as u64)
        .into_par_iter()
        .map(|a| run_attempt(ellipsoid, eps, seed_value, a))
        .max()
        .unwrap_or(1))
}
