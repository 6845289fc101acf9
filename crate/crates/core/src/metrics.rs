//! NMSE, PAPR and real-operation accounting.
//!
//! Operation counts follow the usual convention of 2 real operations per
//! complex addition and 6 per complex multiplication. Matrix products are
//! additionally tallied under the `8 L M N` approximation used for reporting;
//! the exact count `L M (6N + 2(N - 1))` is kept alongside.

use std::fmt;
use std::str::FromStr;

use crate::channel_model::SystemConfig;
use crate::error::{shape_mismatch, Error, Result};
use crate::linalg::{frobenius_sq, CMatrix, C64};

pub const REAL_OPS_PER_CADD: u64 = 2;
pub const REAL_OPS_PER_CMUL: u64 = 6;

/// The four estimation schemes compared throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    MilacLs,
    DigitalLs,
    MilacMmse,
    DigitalMmse,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::MilacLs,
        Scheme::DigitalLs,
        Scheme::MilacMmse,
        Scheme::DigitalMmse,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::MilacLs => "milac-ls",
            Scheme::DigitalLs => "digital-ls",
            Scheme::MilacMmse => "milac-mmse",
            Scheme::DigitalMmse => "digital-mmse",
        }
    }

    pub fn is_milac(self) -> bool {
        matches!(self, Scheme::MilacLs | Scheme::MilacMmse)
    }

    pub fn is_mmse(self) -> bool {
        matches!(self, Scheme::MilacMmse | Scheme::DigitalMmse)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.label() == s.trim())
            .ok_or_else(|| Error::UnknownScheme(s.trim().to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Work performed per coherence block on received data.
    Online,
    /// Precomputation from channel statistics.
    Offline,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpTally {
    pub complex_mul: u64,
    pub complex_add: u64,
    /// Real operations under the `8 L M N` product convention.
    pub convention: u64,
}

impl OpTally {
    pub fn exact_real_ops(&self) -> u64 {
        REAL_OPS_PER_CMUL * self.complex_mul + REAL_OPS_PER_CADD * self.complex_add
    }

    pub fn is_zero(&self) -> bool {
        *self == OpTally::default()
    }

    fn add(&mut self, other: &OpTally) {
        self.complex_mul += other.complex_mul;
        self.complex_add += other.complex_add;
        self.convention += other.convention;
    }
}

/// Instrumented arithmetic: every counted operation is charged to the current phase.
#[derive(Debug, Clone)]
pub struct OpCounter {
    phase: Phase,
    online: OpTally,
    offline: OpTally,
}

impl Default for OpCounter {
    fn default() -> Self {
        Self::new(Phase::Online)
    }
}

impl OpCounter {
    pub fn new(phase: Phase) -> Self {
        Self {
            phase,
            online: OpTally::default(),
            offline: OpTally::default(),
        }
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn online(&self) -> OpTally {
        self.online
    }

    pub fn offline(&self) -> OpTally {
        self.offline
    }

    pub fn merge(&mut self, other: &OpCounter) {
        self.online.add(&other.online);
        self.offline.add(&other.offline);
    }

    fn tally(&mut self) -> &mut OpTally {
        match self.phase {
            Phase::Online => &mut self.online,
            Phase::Offline => &mut self.offline,
        }
    }

    /// `a * b` by the schoolbook algorithm.
    pub fn matmul(&mut self, a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
        let (m, n) = a.shape();
        let (n2, l) = b.shape();
        if n != n2 {
            return Err(shape_mismatch("OpCounter::matmul", (n, l), (n2, l)));
        }
        let mut out = CMatrix::zeros(m, l);
        for c in 0..l {
            for r in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += a[(r, k)] * b[(k, c)];
                }
                out[(r, c)] = acc;
            }
        }
        let t = self.tally();
        let (m, n, l) = (m as u64, n as u64, l as u64);
        t.complex_mul += m * n * l;
        t.complex_add += m * l * n.saturating_sub(1);
        t.convention += convention_matmul_ops(m, n, l);
        Ok(out)
    }

    /// Entrywise product with a real weight matrix of the same shape,
    /// charged as one complex multiplication per entry.
    pub fn weight_entries(&mut self, weights: &[f64], m: &CMatrix) -> Result<CMatrix> {
        if weights.len() != m.len() {
            return Err(shape_mismatch(
                "OpCounter::weight_entries",
                m.shape(),
                (weights.len(), 1),
            ));
        }
        // weights are column-major like the matrix storage
        let out = CMatrix::from_iterator(
            m.nrows(),
            m.ncols(),
            m.iter().zip(weights).map(|(z, &w)| z * w),
        );
        let t = self.tally();
        t.complex_mul += m.len() as u64;
        t.convention += REAL_OPS_PER_CMUL * m.len() as u64;
        Ok(out)
    }
}

/// `8 L M N` for an `M x N` by `N x L` product.
pub fn convention_matmul_ops(m: u64, n: u64, l: u64) -> u64 {
    8 * l * m * n
}

/// `L M (6N + 2(N - 1))` for an `M x N` by `N x L` product.
pub fn exact_matmul_ops(m: u64, n: u64, l: u64) -> u64 {
    l * m * (REAL_OPS_PER_CMUL * n + REAL_OPS_PER_CADD * n.saturating_sub(1))
}

/// Online real-operation count per coherence block.
///
/// Digital LS is dominated by `Y X^H` (`8 tau N_R N_T`), digital MMSE by the
/// per-slot products `G_t y_t` (`8 tau N_R^2`); both MiLAC schemes do no
/// digital work online.
pub fn complexity_report(config: &SystemConfig, scheme: Scheme) -> u64 {
    let (tau, n_rx, n_tx) = (config.tau as u64, config.n_rx as u64, config.n_tx as u64);
    match scheme {
        Scheme::MilacLs | Scheme::MilacMmse => 0,
        Scheme::DigitalLs => convention_matmul_ops(n_rx, tau, n_tx),
        Scheme::DigitalMmse => tau * convention_matmul_ops(n_rx, n_rx, 1),
    }
}

/// Same as [`complexity_report`] but with the exact product count.
pub fn complexity_report_exact(config: &SystemConfig, scheme: Scheme) -> u64 {
    let (tau, n_rx, n_tx) = (config.tau as u64, config.n_rx as u64, config.n_tx as u64);
    match scheme {
        Scheme::MilacLs | Scheme::MilacMmse => 0,
        Scheme::DigitalLs => exact_matmul_ops(n_rx, tau, n_tx),
        Scheme::DigitalMmse => tau * exact_matmul_ops(n_rx, n_rx, 1),
    }
}

/// `||H - H_hat||_F^2 / ||H||_F^2` for a single pair.
pub fn nmse(h_true: &CMatrix, h_est: &CMatrix) -> Result<f64> {
    let mut acc = NmseAccumulator::default();
    acc.push(h_true, h_est)?;
    acc.nmse()
}

/// Ratio-of-means NMSE over a trial set, with a delta-method standard error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NmseAccumulator {
    count: u64,
    err: f64,
    reference: f64,
    err_sq: f64,
    ref_sq: f64,
    cross: f64,
}

impl NmseAccumulator {
    pub fn push(&mut self, h_true: &CMatrix, h_est: &CMatrix) -> Result<()> {
        if h_true.shape() != h_est.shape() {
            return Err(shape_mismatch("nmse", h_true.shape(), h_est.shape()));
        }
        self.push_values(frobenius_sq(&(h_true - h_est)), frobenius_sq(h_true));
        Ok(())
    }

    /// Adds one trial given its squared error and squared reference norm.
    pub fn push_values(&mut self, err: f64, reference: f64) {
        self.count += 1;
        self.err += err;
        self.reference += reference;
        self.err_sq += err * err;
        self.ref_sq += reference * reference;
        self.cross += err * reference;
    }

    pub fn merge(&mut self, other: &NmseAccumulator) {
        self.count += other.count;
        self.err += other.err;
        self.reference += other.reference;
        self.err_sq += other.err_sq;
        self.ref_sq += other.ref_sq;
        self.cross += other.cross;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean_error(&self) -> f64 {
        self.err / self.count as f64
    }

    /// Standard error of [`Self::mean_error`].
    pub fn error_std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.err / n;
        ((self.err_sq / n - mean * mean).max(0.0) / (n - 1.0)).sqrt()
    }

    pub fn nmse(&self) -> Result<f64> {
        if self.count == 0 || self.reference <= 0.0 {
            return Err(Error::Degenerate("NMSE denominator is zero"));
        }
        Ok(self.err / self.reference)
    }

    pub fn std_error(&self) -> f64 {
        let Ok(ratio) = self.nmse() else { return 0.0 };
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        // sum of (e_i - R h_i)^2
        let resid = (self.err_sq - 2.0 * ratio * self.cross + ratio * ratio * self.ref_sq).max(0.0);
        let mean_ref = self.reference / n;
        (resid / (n * (n - 1.0))).sqrt() / mean_ref
    }
}

/// Peak-to-average power of a sequence; `None` when every sample is zero.
pub fn papr(samples: &[C64]) -> Option<f64> {
    let powers: Vec<f64> = samples.iter().map(|z| z.norm_sqr()).collect();
    let max = powers.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    let min = powers.iter().copied().fold(f64::INFINITY, f64::min);
    if min == max {
        return Some(1.0);
    }
    let mean = powers.iter().sum::<f64>() / powers.len() as f64;
    Some(max / mean)
}

/// Per-chain PAPR over the training slots.
#[derive(Debug, Clone, PartialEq)]
pub struct PaprReport {
    pub label: String,
    /// `None` marks an all-zero chain, for which PAPR is undefined.
    pub per_chain: Vec<Option<f64>>,
}

impl PaprReport {
    /// One chain per row of `signals`; columns are slots.
    pub fn from_rows(label: impl Into<String>, signals: &CMatrix) -> Self {
        let per_chain = (0..signals.nrows())
            .map(|r| {
                let row: Vec<C64> = signals.row(r).iter().copied().collect();
                papr(&row)
            })
            .collect();
        Self {
            label: label.into(),
            per_chain,
        }
    }

    pub fn max(&self) -> Option<f64> {
        self.per_chain.iter().flatten().copied().reduce(f64::max)
    }

    pub fn mean(&self) -> Option<f64> {
        let vals: Vec<f64> = self.per_chain.iter().flatten().copied().collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Chains excluded from the aggregates because they never transmit.
    pub fn zero_chains(&self) -> usize {
        self.per_chain.iter().filter(|p| p.is_none()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, max_abs_diff, rng_from_seed};

    #[test]
    fn scheme_labels_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.label().parse::<Scheme>().unwrap(), s);
        }
        assert!(matches!(
            "analog-ls".parse::<Scheme>(),
            Err(Error::UnknownScheme(_))
        ));
    }

    #[test]
    fn counted_matmul_matches_nalgebra_and_counts() {
        let mut rng = rng_from_seed(3);
        let a = gaussian_matrix(&mut rng, 3, 4, 1.0);
        let b = gaussian_matrix(&mut rng, 4, 5, 1.0);
        let mut ops = OpCounter::new(Phase::Online);
        let c = ops.matmul(&a, &b).unwrap();
        assert!(max_abs_diff(&c, &(&a * &b)) < 1e-12);
        let t = ops.online();
        assert_eq!(t.complex_mul, 60);
        assert_eq!(t.complex_add, 45);
        assert_eq!(t.exact_real_ops(), exact_matmul_ops(3, 4, 5));
        assert_eq!(t.convention, 8 * 60);
        assert!(ops.offline().is_zero());
        assert!(ops.matmul(&a, &a).is_err());
    }

    #[test]
    fn phases_are_tallied_separately() {
        let a = CMatrix::identity(2, 2);
        let mut ops = OpCounter::new(Phase::Offline);
        ops.matmul(&a, &a).unwrap();
        ops.set_phase(Phase::Online);
        ops.weight_entries(&[1.0; 4], &a).unwrap();
        assert_eq!(ops.offline().convention, 64);
        assert_eq!(ops.online().complex_mul, 4);
        let mut total = OpCounter::default();
        total.merge(&ops);
        total.merge(&ops);
        assert_eq!(total.offline().convention, 128);
    }

    #[test]
    fn complexity_examples() {
        let big = SystemConfig::new(64, 2048, 1, 1.0, 1.0).unwrap();
        assert_eq!(complexity_report(&big, Scheme::DigitalMmse), 2_147_483_648);
        let mid = SystemConfig::new(16, 256, 1, 1.0, 1.0).unwrap();
        assert_eq!(complexity_report(&mid, Scheme::DigitalLs), 524_288);
        for cfg in [&big, &mid] {
            assert_eq!(complexity_report(cfg, Scheme::MilacLs), 0);
            assert_eq!(complexity_report(cfg, Scheme::MilacMmse), 0);
            assert_eq!(complexity_report_exact(cfg, Scheme::MilacMmse), 0);
        }
        // exact count is slightly below the convention
        assert!(complexity_report_exact(&mid, Scheme::DigitalLs) < 524_288);
        assert_eq!(
            complexity_report_exact(&mid, Scheme::DigitalLs),
            16 * 256 * (6 * 16 + 2 * 15)
        );
    }

    #[test]
    fn nmse_basics() {
        let mut rng = rng_from_seed(1);
        let h = gaussian_matrix(&mut rng, 3, 3, 1.0);
        assert_eq!(nmse(&h, &h).unwrap(), 0.0);
        assert_eq!(nmse(&h, &CMatrix::zeros(3, 3)).unwrap(), 1.0);
        assert!(nmse(&CMatrix::zeros(2, 2), &CMatrix::zeros(2, 2)).is_err());
        assert!(nmse(&h, &CMatrix::zeros(2, 3)).is_err());
        assert!(NmseAccumulator::default().nmse().is_err());
    }

    #[test]
    fn nmse_is_ratio_of_means() {
        let mut acc = NmseAccumulator::default();
        acc.push_values(1.0, 1.0);
        acc.push_values(1.0, 3.0);
        // mean of ratios would be 2/3
        assert_eq!(acc.nmse().unwrap(), 0.5);
        assert!(acc.std_error() >= 0.0);
    }

    #[test]
    fn zero_estimate_nmse_is_one_in_expectation() {
        let mut rng = rng_from_seed(77);
        let mut acc = NmseAccumulator::default();
        for _ in 0..10_000 {
            let h = gaussian_matrix(&mut rng, 4, 4, 1.0);
            acc.push(&h, &CMatrix::zeros(4, 4)).unwrap();
        }
        assert!((acc.nmse().unwrap() - 1.0).abs() < 0.03);
    }

    #[test]
    fn papr_cases() {
        let flat = vec![C64::new(0.3, 0.4); 7];
        assert_eq!(papr(&flat), Some(1.0));
        let rot: Vec<C64> = (0..9)
            .map(|k| C64::from_polar(2.0, k as f64 * 0.7))
            .collect();
        assert!((papr(&rot).unwrap() - 1.0).abs() < 1e-12);
        let on_off = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ];
        assert_eq!(papr(&on_off), Some(4.0));
        assert_eq!(papr(&[C64::new(0.0, 0.0); 3]), None);
    }

    #[test]
    fn report_flags_zero_chains() {
        let mut x = CMatrix::zeros(3, 4);
        x[(0, 0)] = C64::new(1.0, 0.0);
        x.row_mut(1).fill(C64::new(0.0, 1.0));
        let rep = PaprReport::from_rows("test", &x);
        assert_eq!(rep.per_chain, vec![Some(4.0), Some(1.0), None]);
        assert_eq!(rep.zero_chains(), 1);
        assert_eq!(rep.max(), Some(4.0));
        assert_eq!(rep.mean(), Some(2.5));
    }
}
