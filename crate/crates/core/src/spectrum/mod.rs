//! Eigen-spectrum of the time-limited, band-limited (sinc) kernel.
//!
//! The integral operator on `[-T/2, T/2]` with kernel
//! `sin(Omega (t - s)) / (pi (t - s))` is discretised by Gauss-Legendre
//! Nystrom and diagonalised in its symmetrised form.

mod kernel;
mod record;

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::params::{ceil_snapped, floor_snapped};

pub use kernel::sinc_kernel;
pub use record::SpectrumRecord;

/// Eigenvalues are clipped into `[CLIP_FLOOR, 1 - CLIP_FLOOR]`.
pub const CLIP_FLOOR: f64 = 1e-15;

const EIGEN_TOL: f64 = f64::EPSILON;
const EIGEN_MAX_ITER: usize = 10_000;

/// Nystrom discretisation of the sinc kernel, already symmetrised with the
/// square roots of the quadrature weights.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub omega: f64,
    pub t_obs: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

impl KernelMatrix {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }
}

/// Smallest quadrature order accepted for a given time-bandwidth product.
pub fn min_quad_order(omega: f64, t_obs: f64) -> usize {
    4 * ceil_snapped(omega * t_obs / std::f64::consts::PI).max(1)
}

/// Order used when the caller does not choose one.
pub fn default_quad_order(omega: f64, t_obs: f64) -> usize {
    (2 * min_quad_order(omega, t_obs)).max(256)
}

pub fn build_kernel_matrix(omega: f64, t_obs: f64, quad_order: usize) -> Result<KernelMatrix> {
    if !(omega.is_finite() && omega > 0.0 && t_obs.is_finite() && t_obs > 0.0) {
        return Err(Error::config(format!(
            "omega and t_obs must be positive, got omega={omega}, t_obs={t_obs}"
        )));
    }
    let min = min_quad_order(omega, t_obs);
    if quad_order < min {
        return Err(Error::config(format!(
            "quadrature order {quad_order} too small; need at least {min} (4 * ceil(N0))"
        )));
    }
    let order = NonZeroUsize::new(quad_order).expect("order checked above");
    let rule = GaussLegendre::new(order);
    let half = 0.5 * t_obs;
    let mut pairs: Vec<(f64, f64)> = rule.iter().map(|&(x, w)| (x * half, w * half)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();

    let n = quad_order;
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let v = sw[i] * sw[j] * sinc_kernel(omega, nodes[i] - nodes[j]);
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    Ok(KernelMatrix {
        omega,
        t_obs,
        nodes,
        weights,
        matrix,
    })
}

/// Eigen-decomposition of the kernel, sorted by decreasing eigenvalue.
///
/// Column `n` of `eigvecs` holds `psi_n` sampled at `nodes`, scaled so that
/// `sum_i w_i psi_n(t_i)^2 = lambda_n`, i.e. unit energy over the whole line.
#[derive(Debug, Clone)]
pub struct EigenSpectrum {
    pub omega: f64,
    pub t_obs: f64,
    pub quad_order: usize,
    pub lambdas: Vec<f64>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub eigvecs: DMatrix<f64>,
    /// Number of eigenvalues moved by clipping.
    pub clipped: usize,
}

pub fn compute_spectrum(kernel: KernelMatrix) -> Result<EigenSpectrum> {
    let KernelMatrix {
        omega,
        t_obs,
        nodes,
        weights,
        matrix,
    } = kernel;
    let n = nodes.len();
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "kernel matrix has non-finite entries".into(),
        ));
    }
    let eig = SymmetricEigen::try_new(matrix, EIGEN_TOL, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut lambdas = Vec::with_capacity(n);
    let mut clipped = 0;
    let mut eigvecs = DMatrix::<f64>::zeros(n, n);
    for (col, &k) in idx.iter().enumerate() {
        let raw = eig.eigenvalues[k];
        if !raw.is_finite() {
            return Err(Error::Numerical(format!("eigenvalue {col} is not finite")));
        }
        let lam = raw.clamp(CLIP_FLOOR, 1.0 - CLIP_FLOOR);
        if lam != raw {
            clipped += 1;
        }
        lambdas.push(lam);

        let v = eig.eigenvectors.column(k);
        let pivot = (0..n)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        let scale = sign * lam.sqrt();
        for i in 0..n {
            eigvecs[(i, col)] = scale * v[i] / weights[i].sqrt();
        }
    }
    if clipped > 0 {
        log::debug!(
            "clipped {clipped} of {n} eigenvalues into [{CLIP_FLOOR:e}, 1 - {CLIP_FLOOR:e}]"
        );
    }
    Ok(EigenSpectrum {
        omega,
        t_obs,
        quad_order: n,
        lambdas,
        nodes,
        weights,
        eigvecs,
        clipped,
    })
}

impl EigenSpectrum {
    /// Build and diagonalise in one step. `None` selects [`default_quad_order`].
    pub fn compute(omega: f64, t_obs: f64, quad_order: Option<usize>) -> Result<Self> {
        let order = quad_order.unwrap_or_else(|| default_quad_order(omega, t_obs));
        compute_spectrum(build_kernel_matrix(omega, t_obs, order)?)
    }

    pub fn n0(&self) -> f64 {
        self.omega * self.t_obs / std::f64::consts::PI
    }

    pub fn trace(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    pub fn trace_error(&self) -> f64 {
        (self.trace() - self.n0()).abs()
    }

    /// Eigenvalues closer than this to 0 or 1 are not resolved by the solver.
    pub fn resolution(&self) -> f64 {
        resolution(self.quad_order)
    }

    /// Strict decrease, except between neighbours that both sit inside the
    /// unresolved bands next to 0 and 1.
    pub fn is_strictly_decreasing(&self) -> bool {
        strictly_decreasing(&self.lambdas, self.resolution())
    }

    pub fn zeta(&self, n: usize) -> Result<f64> {
        zeta(&self.lambdas, n)
    }

    pub fn n_width(&self, energy: f64, n: usize) -> Result<f64> {
        n_width(&self.lambdas, energy, n)
    }

    pub fn degrees_of_freedom(&self, query: DofQuery) -> Result<usize> {
        degrees_of_freedom(&self.lambdas, query, self.resolution())
    }

    pub fn phase_transition_residual(&self, k: f64) -> Result<f64> {
        phase_transition_residual(&self.lambdas, self.n0(), k)
    }

    /// Weighted Gram matrix of the sampled eigenfunctions, ideally `diag(lambda)`.
    pub fn gram(&self, count: usize) -> DMatrix<f64> {
        let count = count.min(self.quad_order);
        let mut g = DMatrix::zeros(count, count);
        for a in 0..count {
            for b in a..count {
                let s: f64 = (0..self.quad_order)
                    .map(|i| self.weights[i] * self.eigvecs[(i, a)] * self.eigvecs[(i, b)])
                    .sum();
                g[(a, b)] = s;
                g[(b, a)] = s;
            }
        }
        g
    }

    pub fn record(&self) -> SpectrumRecord {
        SpectrumRecord {
            omega: self.omega,
            t_obs: self.t_obs,
            quad_order: self.quad_order,
            lambdas: self.lambdas.clone(),
            trace_error: self.trace_error(),
        }
    }
}

pub(crate) fn resolution(quad_order: usize) -> f64 {
    (quad_order as f64 * f64::EPSILON).max(CLIP_FLOOR)
}

pub(crate) fn strictly_decreasing(lambdas: &[f64], resolution: f64) -> bool {
    lambdas.windows(2).all(|w| {
        let (a, b) = (w[0], w[1]);
        let top = 1.0 - a <= resolution && 1.0 - b <= resolution;
        let bottom = a <= resolution && b <= resolution;
        a > b || top || bottom
    })
}

/// Geometric mean of the square roots of the first `n` eigenvalues.
pub fn zeta(lambdas: &[f64], n: usize) -> Result<f64> {
    if n == 0 || n > lambdas.len() {
        return Err(Error::Range(format!(
            "zeta needs 1 <= N <= {}, got {n}",
            lambdas.len()
        )));
    }
    let mut log_sum = 0.0;
    for (i, &l) in lambdas[..n].iter().enumerate() {
        if !(l > 0.0) {
            return Err(Error::Numerical(format!(
                "eigenvalue {} is not positive: {l}",
                i + 1
            )));
        }
        log_sum += l.ln();
    }
    Ok((log_sum / (2.0 * n as f64)).exp())
}

/// Kolmogorov N-width of the energy ball: `sqrt(E * lambda_{N+1})`.
pub fn n_width(lambdas: &[f64], energy: f64, n: usize) -> Result<f64> {
    let l = lambdas.get(n).ok_or_else(|| {
        Error::Range(format!(
            "N-width for N={n} needs {} eigenvalues, have {}",
            n + 1,
            lambdas.len()
        ))
    })?;
    Ok((energy * l).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofQuery {
    pub energy: f64,
    pub mu: f64,
}

/// Smallest `N` with `sqrt(lambda_{N+1}) <= mu / sqrt(E)`.
pub fn degrees_of_freedom(lambdas: &[f64], query: DofQuery, resolution: f64) -> Result<usize> {
    let DofQuery { energy, mu } = query;
    if !(energy > 0.0 && mu > 0.0) {
        return Err(Error::domain(format!(
            "degrees of freedom need energy > 0 and mu > 0, got E={energy}, mu={mu}"
        )));
    }
    let threshold = mu * mu / energy;
    if threshold >= 1.0 {
        return Ok(0);
    }
    if threshold <= resolution {
        return Err(Error::InsufficientSpectrum(format!(
            "threshold mu^2/E = {threshold:e} is below the spectrum resolution {resolution:e}"
        )));
    }
    lambdas.iter().position(|&l| l <= threshold).ok_or_else(|| {
        Error::InsufficientSpectrum(format!(
            "no eigenvalue among {} falls below mu^2/E = {threshold:e}",
            lambdas.len()
        ))
    })
}

/// Large-`N0` approximation of [`degrees_of_freedom`], natural logarithms.
pub fn dof_asymptotic(n0: f64, energy: f64, mu: f64) -> Result<f64> {
    if !(n0 > 1.0) {
        return Err(Error::domain(format!(
            "asymptotic count needs N0 > 1, got {n0}"
        )));
    }
    if !(mu > 0.0 && mu * mu < energy) {
        return Err(Error::domain(format!(
            "asymptotic count needs 0 < mu^2 < E, got mu={mu}, E={energy}"
        )));
    }
    let pi = std::f64::consts::PI;
    Ok(n0 + (energy / (mu * mu) - 1.0).ln() * (n0 * pi / 2.0).ln() / (pi * pi))
}

/// `lambda_n - 1 / (1 + exp(k pi^2))` at `n = floor(N0 + k log2(N0 pi / 2))`,
/// `n` counted from one.
pub fn phase_transition_residual(lambdas: &[f64], n0: f64, k: f64) -> Result<f64> {
    if !(n0 > 2.0 / std::f64::consts::PI) {
        return Err(Error::domain(format!(
            "transition index needs N0 > 2/pi, got {n0}"
        )));
    }
    let pi = std::f64::consts::PI;
    let n = floor_snapped(n0 + k * (n0 * pi / 2.0).log2());
    if n < 1 || n as usize > lambdas.len() {
        return Err(Error::Range(format!(
            "transition index {n} outside 1..={}",
            lambdas.len()
        )));
    }
    let target = 1.0 / (1.0 + (k * pi * pi).exp());
    Ok(lambdas[n as usize - 1] - target)
}
