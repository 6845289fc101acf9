//! Correlated MIMO channel statistics and sampling.
//!
//! The channel follows the Kronecker/eigen-domain model `H = U_R H_v U_T^H`,
//! where `U_T`, `U_R` diagonalize the transmit and receive correlation
//! matrices and the virtual channel `H_v` has independent entries with
//! variance `lambda_tx[t] * lambda_rx[j]`.
//!
//! Vectorization is column-major everywhere: entry `(j, t)` of `H_v` maps to
//! index `k = t * n_rx + j` (0-based) of [`ChannelModel::r_v`].

use nalgebra::SymmetricEigen;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{complex_gaussian, hermitian_defect, rng_from_seed, CMatrix, C64};

const HERMITIAN_TOL: f64 = 1e-9;
const NEGATIVE_EIG_CLAMP: f64 = 1e-12;

/// Default reference admittance `Y_0 = 1 / 50 ohm`.
pub const DEFAULT_REF_ADMITTANCE: f64 = 1.0 / 50.0;

/// Antenna, RF-chain and power parameters of one point-to-point link.
///
/// The receive chain count is tied to the antenna count (`l_rx == n_rx`) and
/// training always spans `tau == n_tx` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub l_tx: usize,
    pub l_rx: usize,
    pub tau: usize,
    /// Total transmit power, watts.
    pub p_tx: f64,
    /// Noise power per receive antenna, watts.
    pub noise_power: f64,
    /// Reference admittance, siemens.
    pub ref_admittance: f64,
}

impl SystemConfig {
    pub fn new(n_tx: usize, n_rx: usize, l_tx: usize, p_tx: f64, noise_power: f64) -> Result<Self> {
        let cfg = Self {
            n_tx,
            n_rx,
            l_tx,
            l_rx: n_rx,
            tau: n_tx,
            p_tx,
            noise_power,
            ref_admittance: DEFAULT_REF_ADMITTANCE,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Unit transmit power, a single transmit RF chain and `noise_power = 10^(-snr_db/10)`.
    pub fn with_snr_db(n_tx: usize, n_rx: usize, snr_db: f64) -> Result<Self> {
        Self::new(n_tx, n_rx, 1, 1.0, 10f64.powf(-snr_db / 10.0))
    }

    pub fn with_ref_admittance(mut self, y0: f64) -> Result<Self> {
        self.ref_admittance = y0;
        self.validate()?;
        Ok(self)
    }

    /// Linear SNR `P_T / sigma^2`.
    pub fn snr(&self) -> f64 {
        self.p_tx / self.noise_power
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 {
            return Err(invalid("n_tx", "must be at least 1"));
        }
        if self.n_rx == 0 {
            return Err(invalid("n_rx", "must be at least 1"));
        }
        if self.l_tx == 0 || self.l_tx > self.n_tx {
            return Err(invalid("l_tx", format!("must lie in 1..={}", self.n_tx)));
        }
        if self.l_rx != self.n_rx {
            return Err(invalid("l_rx", "only l_rx == n_rx is supported"));
        }
        if self.tau != self.n_tx {
            return Err(invalid("tau", "training length must equal n_tx"));
        }
        for (name, v) in [
            ("p_tx", self.p_tx),
            ("noise_power", self.noise_power),
            ("ref_admittance", self.ref_admittance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(
                    name,
                    format!("must be finite and positive, got {v}"),
                ));
            }
        }
        Ok(())
    }
}

/// Eigenvectors (columns, unitary) and eigenvalues of a Hermitian PSD matrix,
/// sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub vectors: CMatrix,
    pub values: Vec<f64>,
}

/// `[R]_{ij} = eps^|i-j|`.
pub fn build_exponential_correlation(n: usize, eps: f64) -> Result<CMatrix> {
    if n == 0 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(invalid("eps", format!("must lie in [0, 1), got {eps}")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        C64::new(eps.powi(i.abs_diff(j) as i32), 0.0)
    }))
}

/// Hermitian eigendecomposition with a deterministic basis.
///
/// Eigenvalues are sorted in descending order. A matrix that is already
/// diagonal keeps the canonical axes (ties stay in index order). Each
/// eigenvector is rotated so that its largest-magnitude entry is real and
/// positive. Eigenvalues in `[-1e-12, 0)` are clamped to zero.
pub fn eigendecompose_correlation(r: &CMatrix) -> Result<Eigen> {
    let n = r.nrows();
    if n == 0 || r.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "eigendecompose_correlation",
            expected: "non-empty square matrix".into(),
            actual: format!("{}x{}", r.nrows(), r.ncols()),
        });
    }
    let defect = hermitian_defect(r);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry: defect });
    }

    let is_diagonal = (0..n).all(|c| (0..n).all(|row| row == c || r[(row, c)].norm() == 0.0));
    let (raw_values, raw_vectors): (Vec<f64>, CMatrix) = if is_diagonal {
        (
            (0..n).map(|i| r[(i, i)].re).collect(),
            CMatrix::identity(n, n),
        )
    } else {
        // symmetrize away the sub-tolerance defect before handing to the solver
        let sym = (r + r.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(sym);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_values[b].total_cmp(&raw_values[a]));

    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut lambda = raw_values[src];
        if lambda < 0.0 {
            if lambda < -NEGATIVE_EIG_CLAMP {
                return Err(invalid(
                    "r",
                    format!("not positive semidefinite (eigenvalue {lambda:.3e})"),
                ));
            }
            lambda = 0.0;
        }
        values.push(lambda);

        let mut col = raw_vectors.column(src).into_owned();
        let norm = col.norm();
        col.unscale_mut(norm);
        let pivot = largest_entry(col.as_slice());
        let phase = col[pivot].conj() / col[pivot].norm();
        for z in col.iter_mut() {
            *z *= phase;
        }
        col[pivot] = C64::new(col[pivot].re, 0.0);
        vectors.set_column(dst, &col);
    }
    Ok(Eigen { vectors, values })
}

// First index whose modulus is within a relative 1e-9 of the maximum, so that
// near-ties resolve the same way across platforms.
fn largest_entry(v: &[C64]) -> usize {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    v.iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0)
}

/// Channel statistics shared by every trial of an experiment.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub r_tx: CMatrix,
    pub r_rx: CMatrix,
    pub u_tx: CMatrix,
    pub u_rx: CMatrix,
    pub lambda_tx: Vec<f64>,
    pub lambda_rx: Vec<f64>,
    /// Diagonal of `Lambda_T (x) Lambda_R`, column-major order.
    pub r_v: Vec<f64>,
    pub eps_tx: f64,
    pub eps_rx: f64,
}

impl ChannelModel {
    pub fn n_tx(&self) -> usize {
        self.lambda_tx.len()
    }

    pub fn n_rx(&self) -> usize {
        self.lambda_rx.len()
    }

    /// Variance of virtual-channel entry `(j, t)`.
    pub fn virtual_variance(&self, j: usize, t: usize) -> f64 {
        self.r_v[t * self.n_rx() + j]
    }
}

/// Exponential-correlation channel model for the antenna counts of `config`.
pub fn build_channel_model(
    config: &SystemConfig,
    eps_tx: f64,
    eps_rx: f64,
) -> Result<ChannelModel> {
    config.validate()?;
    let r_tx = build_exponential_correlation(config.n_tx, eps_tx)?;
    let r_rx = build_exponential_correlation(config.n_rx, eps_rx)?;
    let tx = eigendecompose_correlation(&r_tx)?;
    let rx = eigendecompose_correlation(&r_rx)?;

    let mut r_v = Vec::with_capacity(config.n_tx * config.n_rx);
    for &lt in &tx.values {
        for &lr in &rx.values {
            r_v.push(lt * lr);
        }
    }
    if let Some(k) = r_v.iter().position(|&v| v <= 0.0) {
        return Err(invalid(
            "r_v",
            format!(
                "virtual correlation must be full rank (entry {k} is {})",
                r_v[k]
            ),
        ));
    }

    Ok(ChannelModel {
        r_tx,
        r_rx,
        u_tx: tx.vectors,
        u_rx: rx.vectors,
        lambda_tx: tx.values,
        lambda_rx: rx.values,
        r_v,
        eps_tx,
        eps_rx,
    })
}

/// One draw of the physical channel and its virtual-domain counterpart.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: CMatrix,
    pub h_v: CMatrix,
    pub seed: u64,
}

pub fn sample_channel(model: &ChannelModel, seed: u64) -> ChannelRealization {
    let mut rng = rng_from_seed(seed);
    let h_v = sample_virtual(model, &mut rng);
    ChannelRealization {
        h: to_physical(model, &h_v),
        h_v,
        seed,
    }
}

pub(crate) fn sample_virtual<R: Rng + ?Sized>(model: &ChannelModel, rng: &mut R) -> CMatrix {
    let (n_rx, n_tx) = (model.n_rx(), model.n_tx());
    let mut h_v = CMatrix::zeros(n_rx, n_tx);
    for t in 0..n_tx {
        for j in 0..n_rx {
            h_v[(j, t)] = complex_gaussian(rng, model.r_v[t * n_rx + j]);
        }
    }
    h_v
}

/// `U_R * m * U_T^H`.
pub fn to_physical(model: &ChannelModel, m: &CMatrix) -> CMatrix {
    &model.u_rx * m * model.u_tx.adjoint()
}

/// `U_R^H * m * U_T`.
pub fn to_virtual(model: &ChannelModel, m: &CMatrix) -> CMatrix {
    model.u_rx.adjoint() * m * &model.u_tx
}
