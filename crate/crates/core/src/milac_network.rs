//! Admittance-matrix description of the transmit and receive MiLACs.
//!
//! A MiLAC with `m + n` ports realizes the linear map read off the
//! lower-left block of `(Y / Y_0 + I)^{-1}`: rows `m+1..=m+n`, columns
//! `1..=m` (1-based). On the transmit side `m = L_T`, `n = N_T` and the
//! block is the precoder; on the receive side `m = N_R`, `n = L_R` and the
//! block is the combiner.
//!
//! Synthesis picks `Q = [[I, 0], [B, I]]`, whose inverse is `2I - Q`, so the
//! admittance is `Y = Y_0 (Q^{-1} - I) = [[0, 0], [-Y_0 B, 0]]`.

use std::io::{BufRead, Write};

use crate::channel_model::SystemConfig;
use crate::error::{invalid, shape_mismatch, Error, Result};
use crate::linalg::{reciprocal_condition, CMatrix, C64};

/// Reciprocal condition below which `Y / Y_0 + I` is treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Transmit,
    Receive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapRole {
    Precoder,
    Combiner,
}

/// A precoder (`N_T x L_T`) or combiner (`L_R x N_R`).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    pub matrix: CMatrix,
    pub role: MapRole,
}

impl LinearMap {
    pub fn precoder(matrix: CMatrix) -> Self {
        Self {
            matrix,
            role: MapRole::Precoder,
        }
    }

    pub fn combiner(matrix: CMatrix) -> Self {
        Self {
            matrix,
            role: MapRole::Combiner,
        }
    }

    fn check_finite(&self) -> Result<()> {
        if self
            .matrix
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            Ok(())
        } else {
            Err(invalid("matrix", "linear map has non-finite entries"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilacNetwork {
    pub admittance: CMatrix,
    pub side: Side,
    /// Sizes of the input-port block and the output-port block.
    pub port_split: (usize, usize),
    pub ref_admittance: f64,
}

impl MilacNetwork {
    pub fn new(
        admittance: CMatrix,
        side: Side,
        port_split: (usize, usize),
        ref_admittance: f64,
    ) -> Result<Self> {
        let dim = port_split.0 + port_split.1;
        if admittance.shape() != (dim, dim) {
            return Err(shape_mismatch(
                "MilacNetwork::new",
                (dim, dim),
                admittance.shape(),
            ));
        }
        if !(ref_admittance.is_finite() && ref_admittance > 0.0) {
            return Err(invalid("ref_admittance", "must be finite and positive"));
        }
        Ok(Self {
            admittance,
            side,
            port_split,
            ref_admittance,
        })
    }

    pub fn dim(&self) -> usize {
        self.port_split.0 + self.port_split.1
    }

    /// `Y / Y_0 + I`.
    pub fn normalized_system(&self) -> CMatrix {
        let n = self.dim();
        self.admittance.unscale(self.ref_admittance) + CMatrix::identity(n, n)
    }

    /// Lower-left block of `(Y / Y_0 + I)^{-1}`, found by solving against the
    /// first `port_split.0` identity columns.
    pub fn realized_block(&self) -> Result<CMatrix> {
        let (m, n) = self.port_split;
        let system = self.normalized_system();
        let rcond = reciprocal_condition(&system);
        if rcond.is_nan() || rcond < SINGULAR_RCOND {
            return Err(Error::Singular { rcond });
        }
        let rhs = CMatrix::identity(m + n, m);
        let sol = system.lu().solve(&rhs).ok_or(Error::Singular { rcond })?;
        Ok(sol.rows(m, n).into_owned())
    }
}

/// Precoder realized by a transmit-side MiLAC.
pub fn precoder_from_admittance(net: &MilacNetwork, config: &SystemConfig) -> Result<LinearMap> {
    if net.side != Side::Transmit {
        return Err(invalid("side", "expected a transmit-side network"));
    }
    let want = (config.l_tx, config.n_tx);
    if net.port_split != want {
        return Err(shape_mismatch(
            "precoder_from_admittance",
            want,
            net.port_split,
        ));
    }
    Ok(LinearMap::precoder(net.realized_block()?))
}

/// Combiner realized by a receive-side MiLAC.
pub fn combiner_from_admittance(net: &MilacNetwork, config: &SystemConfig) -> Result<LinearMap> {
    if net.side != Side::Receive {
        return Err(invalid("side", "expected a receive-side network"));
    }
    let want = (config.n_rx, config.l_rx);
    if net.port_split != want {
        return Err(shape_mismatch(
            "combiner_from_admittance",
            want,
            net.port_split,
        ));
    }
    Ok(LinearMap::combiner(net.realized_block()?))
}

/// `Y = [[0, 0], [-Y_0 F, 0]]` with ports split `(L_T, N_T)`.
pub fn admittance_for_precoder(f: &LinearMap, y0: f64) -> Result<MilacNetwork> {
    if f.role != MapRole::Precoder {
        return Err(invalid("role", "expected a precoder"));
    }
    f.check_finite()?;
    let (n_tx, l_tx) = f.matrix.shape();
    MilacNetwork::new(
        lower_left_admittance(&f.matrix, y0),
        Side::Transmit,
        (l_tx, n_tx),
        y0,
    )
}

/// `Y = [[0, 0], [-Y_0 G, 0]]` with ports split `(N_R, L_R)`.
pub fn admittance_for_combiner(g: &LinearMap, y0: f64) -> Result<MilacNetwork> {
    if g.role != MapRole::Combiner {
        return Err(invalid("role", "expected a combiner"));
    }
    g.check_finite()?;
    let (l_rx, n_rx) = g.matrix.shape();
    MilacNetwork::new(
        lower_left_admittance(&g.matrix, y0),
        Side::Receive,
        (n_rx, l_rx),
        y0,
    )
}

fn lower_left_admittance(block: &CMatrix, y0: f64) -> CMatrix {
    let (n, m) = block.shape();
    let mut y = CMatrix::zeros(m + n, m + n);
    y.view_mut((m, 0), (n, m)).copy_from(&block.scale(-y0));
    y
}

/// `[[I_m, 0], [B, I_n]]` for an `n x m` block `B`.
pub fn unit_lower_block(block: &CMatrix) -> CMatrix {
    let (n, m) = block.shape();
    let mut q = CMatrix::identity(m + n, m + n);
    q.view_mut((m, 0), (n, m)).copy_from(block);
    q
}

/// Writes the admittance matrix as CSV: one row per port, each entry as a
/// `re,im` column pair. Ports are numbered from 1.
pub fn write_admittance_csv<W: Write>(net: &MilacNetwork, mut out: W) -> Result<()> {
    let n = net.dim();
    let mut header = String::from("port");
    for c in 1..=n {
        header.push_str(&format!(",{c}.re,{c}.im"));
    }
    writeln!(out, "{header}")?;
    for r in 0..n {
        let mut line = format!("{}", r + 1);
        for c in 0..n {
            let z = net.admittance[(r, c)];
            line.push_str(&format!(",{:.16e},{:.16e}", z.re, z.im));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Parses the layout produced by [`write_admittance_csv`].
pub fn read_admittance_csv<R: BufRead>(input: R) -> Result<CMatrix> {
    let bad = |reason: String| Error::Config {
        field: "admittance csv".into(),
        reason,
    };
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))??;
    let n = header.split(',').count().saturating_sub(1) / 2;
    let mut m = CMatrix::zeros(n, n);
    let mut row = 0;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if row >= n {
            return Err(bad(format!("more than {n} data rows")));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 * n + 1 {
            return Err(bad(format!("row {} has {} fields", row + 1, fields.len())));
        }
        for c in 0..n {
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("row {}: {e}", row + 1)))
            };
            m[(row, c)] = C64::new(parse(fields[1 + 2 * c])?, parse(fields[2 + 2 * c])?);
        }
        row += 1;
    }
    if row != n {
        return Err(bad(format!("expected {n} data rows, found {row}")));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        gaussian_matrix, max_abs_diff, max_abs_from_scaled_identity, rng_from_seed,
    };

    fn cfg(n_tx: usize, n_rx: usize, l_tx: usize) -> SystemConfig {
        SystemConfig::new(n_tx, n_rx, l_tx, 1.0, 0.1).unwrap()
    }

    #[test]
    fn zero_admittance_gives_zero_maps() {
        let c = cfg(4, 3, 2);
        let tx = MilacNetwork::new(CMatrix::zeros(6, 6), Side::Transmit, (2, 4), 0.02).unwrap();
        let f = precoder_from_admittance(&tx, &c).unwrap();
        assert_eq!(f.matrix.shape(), (4, 2));
        assert!(f.matrix.iter().all(|z| z.norm() == 0.0));

        let rx = MilacNetwork::new(CMatrix::zeros(6, 6), Side::Receive, (3, 3), 0.02).unwrap();
        let g = combiner_from_admittance(&rx, &c).unwrap();
        assert_eq!(g.matrix.shape(), (3, 3));
        assert!(g.matrix.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn scaled_identity_admittance_gives_zero_maps() {
        let c = cfg(4, 3, 2);
        let y0 = 0.02;
        let tx = MilacNetwork::new(
            CMatrix::identity(6, 6).scale(y0),
            Side::Transmit,
            (2, 4),
            y0,
        )
        .unwrap();
        assert!(precoder_from_admittance(&tx, &c)
            .unwrap()
            .matrix
            .iter()
            .all(|z| z.norm() < 1e-15));
        let rx = MilacNetwork::new(CMatrix::identity(6, 6).scale(y0), Side::Receive, (3, 3), y0)
            .unwrap();
        assert!(combiner_from_admittance(&rx, &c)
            .unwrap()
            .matrix
            .iter()
            .all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn singular_system_is_rejected() {
        let c = cfg(1, 1, 1);
        // Y / Y_0 = -I makes the system exactly zero
        let y0 = 0.02;
        let net = MilacNetwork::new(
            CMatrix::identity(2, 2).scale(-y0),
            Side::Transmit,
            (1, 1),
            y0,
        )
        .unwrap();
        assert!(matches!(
            precoder_from_admittance(&net, &c),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn wrong_side_or_split_is_rejected() {
        let c = cfg(4, 3, 1);
        let f = LinearMap::precoder(CMatrix::zeros(4, 1));
        let net = admittance_for_precoder(&f, 0.02).unwrap();
        assert!(combiner_from_admittance(&net, &c).is_err());
        let c2 = cfg(4, 3, 2);
        assert!(precoder_from_admittance(&net, &c2).is_err());
        assert!(admittance_for_combiner(&f, 0.02).is_err());
        assert!(MilacNetwork::new(CMatrix::zeros(3, 3), Side::Transmit, (1, 1), 0.02).is_err());
    }

    #[test]
    fn ls_precoder_example_block() {
        // N_T = 4, L_T = 1, slot t = 2 (1-based): F = (1/2) e_2
        let mut f = CMatrix::zeros(4, 1);
        f[(1, 0)] = C64::new(0.5, 0.0);
        let y0 = 1.0 / 50.0;
        let net = admittance_for_precoder(&LinearMap::precoder(f.clone()), y0).unwrap();
        assert_eq!(net.port_split, (1, 4));
        for r in 0..5 {
            for c in 0..5 {
                let expect = if r == 2 && c == 0 { -y0 * 0.5 } else { 0.0 };
                assert_eq!(net.admittance[(r, c)], C64::new(expect, 0.0));
            }
        }
        let back = precoder_from_admittance(&net, &cfg(4, 2, 1)).unwrap();
        assert!(max_abs_diff(&back.matrix, &f) < 1e-12);
    }

    #[test]
    fn ls_combiner_example_block() {
        let (n_tx, p_tx) = (16.0f64, 1.0f64);
        let scale = (n_tx / p_tx).sqrt();
        let g = CMatrix::identity(3, 3).scale(scale);
        let y0 = 1.0 / 50.0;
        let net = admittance_for_combiner(&LinearMap::combiner(g.clone()), y0).unwrap();
        let block = net.admittance.view((3, 0), (3, 3)).into_owned();
        assert!(max_abs_from_scaled_identity(&block, -y0 * scale) == 0.0);
        let c = SystemConfig::new(16, 3, 1, 1.0, 1.0).unwrap();
        let back = combiner_from_admittance(&net, &c).unwrap();
        assert!(max_abs_diff(&back.matrix, &g) < 1e-12);
    }

    #[test]
    fn zero_map_gives_zero_admittance() {
        let net =
            admittance_for_combiner(&LinearMap::combiner(CMatrix::zeros(2, 2)), 0.02).unwrap();
        assert!(net.admittance.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn random_round_trip_and_oracle() {
        let mut rng = rng_from_seed(5);
        let f = gaussian_matrix(&mut rng, 8, 2, 1.0);
        let net = admittance_for_precoder(&LinearMap::precoder(f.clone()), 0.02).unwrap();
        let back = precoder_from_admittance(&net, &cfg(8, 2, 2)).unwrap();
        assert!(max_abs_diff(&back.matrix, &f) < 1e-12);
        // dense explicit inverse as an independent route
        let inv = net.normalized_system().try_inverse().unwrap();
        assert!(max_abs_diff(&inv.view((2, 0), (8, 2)).into_owned(), &f) < 1e-12);

        let g = gaussian_matrix(&mut rng, 5, 5, 1.0);
        let net = admittance_for_combiner(&LinearMap::combiner(g.clone()), 0.02).unwrap();
        let back = combiner_from_admittance(&net, &cfg(3, 5, 1)).unwrap();
        assert!(max_abs_diff(&back.matrix, &g) < 1e-12);
    }

    #[test]
    fn q_inverse_identity() {
        let mut rng = rng_from_seed(9);
        let b = gaussian_matrix(&mut rng, 6, 3, 4.0);
        let q = unit_lower_block(&b);
        let n = q.nrows();
        let two_i_minus_q = CMatrix::identity(n, n).scale(2.0) - &q;
        assert!(max_abs_from_scaled_identity(&(&q * &two_i_minus_q), 1.0) < 1e-12);
        let net = admittance_for_precoder(&LinearMap::precoder(b), 1.0).unwrap();
        // Y / Y_0 = I - Q
        assert!(max_abs_diff(&net.admittance, &(CMatrix::identity(n, n) - &q)) < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = rng_from_seed(2);
        let g = gaussian_matrix(&mut rng, 2, 3, 1.0);
        let net = admittance_for_combiner(&LinearMap::combiner(g), 0.02).unwrap();
        let mut buf = Vec::new();
        write_admittance_csv(&net, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("port,1.re,1.im,2.re,2.im"));
        assert_eq!(text.lines().count(), 6);
        let back = read_admittance_csv(&buf[..]).unwrap();
        assert_eq!(back, net.admittance);
    }
}
