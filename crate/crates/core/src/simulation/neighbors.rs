//! All pairs of points within a fixed distance.
//!
//! Large inputs are prefiltered in single precision with blocked matrix
//! products (`|a-b|^2 = |a|^2 + |b|^2 - 2 a.b`) over a window of points
//! sorted by their first coordinate; every candidate is confirmed exactly in
//! double precision.

use rayon::prelude::*;

const BRUTE_FORCE_LIMIT: usize = 2048;
const BLOCK_I: usize = 256;
const BLOCK_J: usize = 256;
const CHUNK: usize = 16;
/// Above this prefilter slack the single-precision path is abandoned.
const MAX_MARGIN: f32 = 0.25;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Pairs `(i, j)`, `i < j`, with `|p_i - p_j| <= radius`, sorted.
pub fn neighbor_pairs(points: &[f64], dim: usize, radius: f64) -> Vec<(u32, u32)> {
    assert!(dim > 0 && points.len().is_multiple_of(dim));
    let m = points.len() / dim;
    assert!(m <= u32::MAX as usize);
    let r2 = radius * radius;
    let mut pairs = if m <= BRUTE_FORCE_LIMIT {
        brute_force(points, dim, r2)
    } else {
        match gemm_pairs(points, dim, radius) {
            Some(p) => p,
            None => sweep(points, dim, radius),
        }
    };
    pairs.sort_unstable();
    pairs
}

/// Neighbour lists, one per point, in increasing index order.
pub fn neighbor_lists(points: &[f64], dim: usize, radius: f64) -> Vec<Vec<u32>> {
    let m = points.len() / dim;
    let mut lists = vec![Vec::new(); m];
    for (i, j) in neighbor_pairs(points, dim, radius) {
        lists[i as usize].push(j);
        lists[j as usize].push(i);
    }
    for l in &mut lists {
        l.sort_unstable();
    }
    lists
}

fn brute_force(points: &[f64], dim: usize, r2: f64) -> Vec<(u32, u32)> {
    let m = points.len() / dim;
    let mut out = Vec::new();
    for i in 0..m {
        let a = &points[i * dim..(i + 1) * dim];
        for j in i + 1..m {
            if dist2(a, &points[j * dim..(j + 1) * dim]) <= r2 {
                out.push((i as u32, j as u32));
            }
        }
    }
    out
}

fn order_by_first_coordinate(points: &[f64], dim: usize) -> Vec<u32> {
    let m = points.len() / dim;
    let mut order: Vec<u32> = (0..m as u32).collect();
    order.sort_by(|&a, &b| {
        points[a as usize * dim]
            .total_cmp(&points[b as usize * dim])
            .then(a.cmp(&b))
    });
    order
}

/// Exact double-precision scan over a sliding window in the first coordinate.
fn sweep(points: &[f64], dim: usize, radius: f64) -> Vec<(u32, u32)> {
    let order = order_by_first_coordinate(points, dim);
    let r2 = radius * radius;
    let mut out = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        let a = &points[i as usize * dim..(i as usize + 1) * dim];
        for &j in &order[k + 1..] {
            let b = &points[j as usize * dim..(j as usize + 1) * dim];
            if b[0] - a[0] > radius {
                break;
            }
            if dist2(a, b) <= r2 {
                out.push((i.min(j), i.max(j)));
            }
        }
    }
    out
}

fn gemm_pairs(points: &[f64], dim: usize, radius: f64) -> Option<Vec<(u32, u32)>> {
    let m = points.len() / dim;
    let order = order_by_first_coordinate(points, dim);
    let scale = 1.0 / radius;
    let mut p32 = vec![0f32; m * dim];
    for (k, &i) in order.iter().enumerate() {
        let src = &points[i as usize * dim..(i as usize + 1) * dim];
        for (d, &x) in p32[k * dim..(k + 1) * dim].iter_mut().zip(src) {
            *d = (x * scale) as f32;
        }
    }
    let norms: Vec<f32> = p32
        .chunks(dim)
        .map(|p| p.iter().map(|x| x * x).sum())
        .collect();
    let max_norm = norms.iter().cloned().fold(0f32, f32::max);
    let margin = 8.0 * (dim as f32 + 4.0) * f32::EPSILON * (1.0 + 2.0 * max_norm);
    if !(margin <= MAX_MARGIN) {
        return None;
    }
    let thr = 1.0 + margin;
    let half_norms: Vec<f32> = norms.iter().map(|n| 0.5 * n).collect();
    let first: Vec<f64> = order
        .iter()
        .map(|&i| points[i as usize * dim] * scale)
        .collect();
    let r2 = radius * radius;

    let blocks: Vec<usize> = (0..m).step_by(BLOCK_I).collect();
    let found: Vec<Vec<(u32, u32)>> = blocks
        .par_iter()
        .map(|&i0| {
            let ni = BLOCK_I.min(m - i0);
            let limit = first[i0 + ni - 1] + 1.0 + 1e-9;
            let j_end = i0 + first[i0..].partition_point(|&x| x <= limit);
            let mut c = vec![0f32; ni * BLOCK_J];
            let mut out = Vec::new();
            let mut j0 = i0;
            while j0 < j_end {
                let nj = BLOCK_J.min(j_end - j0);
                // SAFETY: the operands are row-major slices of `p32` holding
                // `ni x dim` and `nj x dim` values, read transposed via strides;
                // `c` holds `ni x BLOCK_J` values with row stride BLOCK_J >= nj.
                unsafe {
                    matrixmultiply::sgemm(
                        ni,
                        dim,
                        nj,
                        1.0,
                        p32.as_ptr().add(i0 * dim),
                        dim as isize,
                        1,
                        p32.as_ptr().add(j0 * dim),
                        1,
                        dim as isize,
                        0.0,
                        c.as_mut_ptr(),
                        BLOCK_J as isize,
                        1,
                    );
                }
                for a in 0..ni {
                    let ia = i0 + a;
                    let k = (norms[ia] - thr) * 0.5;
                    let row = &c[a * BLOCK_J..a * BLOCK_J + nj];
                    let hn = &half_norms[j0..j0 + nj];
                    for (cb, (rc, hc)) in row.chunks(CHUNK).zip(hn.chunks(CHUNK)).enumerate() {
                        let mut any = false;
                        for (&g, &h) in rc.iter().zip(hc) {
                            any |= g - h >= k;
                        }
                        if !any {
                            continue;
                        }
                        for (l, (&g, &h)) in rc.iter().zip(hc).enumerate() {
                            let jb = j0 + cb * CHUNK + l;
                            if jb <= ia || g - h < k {
                                continue;
                            }
                            let (oi, oj) = (order[ia], order[jb]);
                            let pa = &points[oi as usize * dim..(oi as usize + 1) * dim];
                            let pb = &points[oj as usize * dim..(oj as usize + 1) * dim];
                            if dist2(pa, pb) <= r2 {
                                out.push((oi.min(oj), oi.max(oj)));
                            }
                        }
                    }
                }
                j0 += nj;
            }
            out
        })
        .collect();
    Some(found.into_iter().flatten().collect())
}
