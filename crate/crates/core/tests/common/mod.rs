#![allow(dead_code)]

const TOL: f64 = 1e-9;

fn grid(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let n = ((hi - lo) / h + TOL).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * h).collect()
}

/// Largest set of grid points in `[-r, r]` with spacing at least `2 eps`, by DP.
pub fn brute_pack(r: f64, eps: f64, h: f64) -> u64 {
    let xs = grid(-r, r, h);
    let mut best = vec![1u64; xs.len()];
    for k in 0..xs.len() {
        for j in 0..k {
            if xs[k] - xs[j] >= 2.0 * eps - TOL {
                best[k] = best[k].max(best[j] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

/// Fewest radius-`eps` intervals with grid centres covering `[-r, r]`, by DP.
pub fn brute_cover(r: f64, eps: f64, h: f64) -> u64 {
    let cs = grid(-r - eps, r + eps, h);
    let mut need = vec![u64::MAX; cs.len()];
    let mut answer = u64::MAX;
    for c in 0..cs.len() {
        if cs[c] - eps <= -r + TOL {
            need[c] = 1;
        }
        for p in 0..c {
            if need[p] != u64::MAX && cs[p] + eps >= cs[c] - eps - TOL {
                need[c] = need[c].min(need[p] + 1);
            }
        }
        if need[c] != u64::MAX && cs[c] + eps >= r - TOL {
            answer = answer.min(need[c]);
        }
    }
    answer
}

/// `(sqrt(E), eps)` pairs with non-integer ratio, from a fixed LCG.
pub fn random_pairs(count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut s = seed;
    let mut next = move || {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let r = 0.2 + 4.8 * next();
        let eps = 0.1 + 1.9 * next();
        let q = r / eps;
        if (q - q.round()).abs() > 1e-6 {
            out.push((r, eps));
        }
    }
    out
}

/// Two-sided z for a 95% family-wise level over `k` intervals.
pub fn family_z(k: usize) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::standard().inverse_cdf(1.0 - 0.025 / k as f64)
}

pub fn wilson_with_z(s: u64, n: u64, z: f64) -> (f64, f64) {
    let (p, n) = (s as f64 / n as f64, n as f64);
    let c = (p + z * z / (2.0 * n)) / (1.0 + z * z / n);
    let h = z / (1.0 + z * z / n) * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    (c - h, c + h)
}
