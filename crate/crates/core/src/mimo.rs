//! Transmit steering from a (possibly stale) channel snapshot and per-stream
//! SINR under CSI aging.
//!
//! Stations carry one antenna, so every user row is `1 x N_t` and the
//! received sample of user `n` is `h_n . W x`. Steering columns are tagged with
//! the user that owns them; the interference sum runs over every column other
//! than the evaluated one, which covers both cross-stream and cross-user
//! terms.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;

/// Default ceiling on the condition number of `H H^H` before zero-forcing is
/// refused.
pub const DEFAULT_MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Error, PartialEq)]
pub enum MimoError {
    #[error("ill-conditioned group channel at subcarrier {subcarrier} (condition number {condition:e})")]
    Singular { subcarrier: usize, condition: f64 },
    #[error("zero channel vector at subcarrier {subcarrier}")]
    DegenerateChannel { subcarrier: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("group ordering mismatch: steering built for {steering:?}, channel rows are {channel:?}")]
    GroupMismatch { steering: Vec<usize>, channel: Vec<usize> },
    #[error("invalid power allocation: {0}")]
    InvalidPower(String),
}

/// CSI captured at a sounding instant: per-subcarrier `N_u x N_t` channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSnapshot {
    time_s: f64,
    users: Vec<usize>,
    h: Vec<CMatrix>,
}

impl ChannelSnapshot {
    pub fn new(time_s: f64, users: Vec<usize>, h: Vec<CMatrix>) -> Result<Self, MimoError> {
        if h.is_empty() {
            return Err(MimoError::DimensionMismatch("snapshot has no subcarriers".into()));
        }
        let (rows, cols) = h[0].shape();
        if rows != users.len() || rows == 0 {
            return Err(MimoError::DimensionMismatch(format!("{rows} rows for {} users", users.len())));
        }
        if rows > cols {
            return Err(MimoError::DimensionMismatch(format!("group of {rows} exceeds {cols} transmit antennas")));
        }
        for m in &h {
            if m.shape() != (rows, cols) {
                return Err(MimoError::DimensionMismatch("subcarrier matrices differ in shape".into()));
            }
            if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(MimoError::DimensionMismatch("non-finite channel entry".into()));
            }
        }
        Ok(Self { time_s, users, h })
    }

    pub fn time_s(&self) -> f64 {
        self.time_s
    }

    pub fn users(&self) -> &[usize] {
        &self.users
    }

    pub fn h(&self) -> &[CMatrix] {
        &self.h
    }

    pub fn num_tx(&self) -> usize {
        self.h[0].ncols()
    }
}

/// Per-subcarrier `N_t x N_s` steering with unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringMatrix {
    computed_at_s: f64,
    users: Vec<usize>,
    /// Position in `users` owning each column.
    stream_owner: Vec<usize>,
    w: Vec<CMatrix>,
}

impl SteeringMatrix {
    /// Wraps raw steering matrices, normalizing every column to unit norm.
    pub fn from_columns(
        computed_at_s: f64,
        users: Vec<usize>,
        stream_owner: Vec<usize>,
        mut w: Vec<CMatrix>,
    ) -> Result<Self, MimoError> {
        for (sc, m) in w.iter_mut().enumerate() {
            if m.ncols() != stream_owner.len() {
                return Err(MimoError::DimensionMismatch("column count differs from stream map".into()));
            }
            for mut col in m.column_iter_mut() {
                let n = col.norm();
                if !(n > 0.0) || !n.is_finite() {
                    return Err(MimoError::DegenerateChannel { subcarrier: sc });
                }
                col.unscale_mut(n);
            }
        }
        if stream_owner.iter().any(|&o| o >= users.len()) {
            return Err(MimoError::DimensionMismatch("stream owner outside user list".into()));
        }
        Ok(Self { computed_at_s, users, stream_owner, w })
    }

    pub fn computed_at_s(&self) -> f64 {
        self.computed_at_s
    }

    pub fn users(&self) -> &[usize] {
        &self.users
    }

    pub fn stream_owner(&self) -> &[usize] {
        &self.stream_owner
    }

    pub fn num_streams(&self) -> usize {
        self.stream_owner.len()
    }

    pub fn w(&self) -> &[CMatrix] {
        &self.w
    }

    /// Columns belonging to the user at `user_pos`.
    pub fn streams_of(&self, user_pos: usize) -> impl Iterator<Item = usize> + '_ {
        self.stream_owner
            .iter()
            .enumerate()
            .filter(move |(_, &o)| o == user_pos)
            .map(|(c, _)| c)
    }
}

/// Per-stream transmit powers and receiver noise power, both linear.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    powers: Vec<f64>,
    noise: f64,
}

impl PowerAllocation {
    pub fn new(powers: Vec<f64>, noise: f64) -> Result<Self, MimoError> {
        if powers.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(MimoError::InvalidPower("stream powers must be finite and non-negative".into()));
        }
        if !(noise > 0.0) || !noise.is_finite() {
            return Err(MimoError::InvalidPower(format!("noise power must be positive, got {noise}")));
        }
        Ok(Self { powers, noise })
    }

    /// Splits `total` evenly over `num_streams`.
    pub fn equal(total: f64, num_streams: usize, noise: f64) -> Result<Self, MimoError> {
        if num_streams == 0 {
            return Err(MimoError::InvalidPower("no streams".into()));
        }
        Self::new(vec![total / num_streams as f64; num_streams], noise)
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Condition number of a Hermitian positive semi-definite matrix.
fn hermitian_condition(a: &CMatrix) -> f64 {
    let eig = a.clone().symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Zero-forcing steering `H^H (H H^H)^-1`, column-normalized, per subcarrier.
pub fn zf_precoder(snapshot: &ChannelSnapshot, max_condition: f64) -> Result<SteeringMatrix, MimoError> {
    let mut w = Vec::with_capacity(snapshot.h.len());
    for (sc, h) in snapshot.h.iter().enumerate() {
        let hh = h * h.adjoint();
        let condition = hermitian_condition(&hh);
        if !(condition <= max_condition) {
            return Err(MimoError::Singular { subcarrier: sc, condition });
        }
        let inv = hh
            .cholesky()
            .ok_or(MimoError::Singular { subcarrier: sc, condition })?
            .inverse();
        w.push(h.adjoint() * inv);
    }
    let n = snapshot.users.len();
    SteeringMatrix::from_columns(snapshot.time_s, snapshot.users.clone(), (0..n).collect(), w)
}

/// Dominant right singular vector of a single-antenna user's `1 x N_t`
/// channel, i.e. the matched filter `h^H / |h|`.
pub fn svd_precoder(h: &[Complex64]) -> Result<Vec<Complex64>, MimoError> {
    let norm = h.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(MimoError::DegenerateChannel { subcarrier: 0 });
    }
    Ok(h.iter().map(|c| c.conj() / norm).collect())
}

/// SVD steering across all subcarriers of a one-user snapshot.
pub fn svd_steering(snapshot: &ChannelSnapshot) -> Result<SteeringMatrix, MimoError> {
    if snapshot.users.len() != 1 {
        return Err(MimoError::DimensionMismatch(format!(
            "single-user steering needs one user, snapshot has {}",
            snapshot.users.len()
        )));
    }
    let nt = snapshot.num_tx();
    let w = snapshot
        .h
        .iter()
        .enumerate()
        .map(|(sc, h)| {
            let row: Vec<Complex64> = h.row(0).iter().cloned().collect();
            svd_precoder(&row)
                .map(|v| CMatrix::from_column_slice(nt, 1, &v))
                .map_err(|_| MimoError::DegenerateChannel { subcarrier: sc })
        })
        .collect::<Result<Vec<_>, _>>()?;
    SteeringMatrix::from_columns(snapshot.time_s, snapshot.users.clone(), vec![0], w)
}

/// `h . w_col` without conjugation.
fn gain(h: &[Complex64], w: &CMatrix, col: usize) -> Complex64 {
    h.iter().zip(w.column(col).iter()).map(|(a, b)| a * b).sum()
}

fn stream_sinr(h: &[Complex64], w: &CMatrix, stream: usize, alloc: &PowerAllocation) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, &p) in alloc.powers.iter().enumerate() {
        let g = gain(h, w, j).norm_sqr() * p;
        if j == stream {
            signal = g;
        } else {
            interference += g;
        }
    }
    signal / (alloc.noise + interference)
}

/// Single-user SINR of stream `stream` for channel row `h` (one subcarrier)
/// against steering `w` computed earlier.
pub fn sinr_su(h: &[Complex64], w: &CMatrix, stream: usize, alloc: &PowerAllocation) -> Result<f64, MimoError> {
    if h.len() != w.nrows() {
        return Err(MimoError::DimensionMismatch(format!("channel has {} antennas, steering {}", h.len(), w.nrows())));
    }
    if alloc.powers.len() != w.ncols() || stream >= w.ncols() {
        return Err(MimoError::DimensionMismatch("stream count differs from power allocation".into()));
    }
    Ok(stream_sinr(h, w, stream, alloc))
}

/// Multi-user SINR of steering column `stream` at its owner, one value per
/// subcarrier. `h_now` rows must be in the order the steering was built for.
pub fn sinr_mu(
    h_now: &[CMatrix],
    users: &[usize],
    steering: &SteeringMatrix,
    stream: usize,
    alloc: &PowerAllocation,
) -> Result<Vec<f64>, MimoError> {
    if users != steering.users() {
        return Err(MimoError::GroupMismatch { steering: steering.users.clone(), channel: users.to_vec() });
    }
    if h_now.len() != steering.w.len() {
        return Err(MimoError::DimensionMismatch(format!(
            "{} channel subcarriers, {} steering subcarriers",
            h_now.len(),
            steering.w.len()
        )));
    }
    if stream >= steering.num_streams() || alloc.powers.len() != steering.num_streams() {
        return Err(MimoError::DimensionMismatch("stream count differs from power allocation".into()));
    }
    let owner = steering.stream_owner[stream];
    let mut row = Vec::with_capacity(steering.w[0].nrows());
    h_now
        .iter()
        .zip(&steering.w)
        .map(|(h, w)| {
            if h.nrows() != users.len() || h.ncols() != w.nrows() {
                return Err(MimoError::DimensionMismatch("channel shape differs from steering".into()));
            }
            row.clear();
            row.extend(h.row(owner).iter().cloned());
            Ok(stream_sinr(&row, w, stream, alloc))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(r, cols, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn zf_on_orthonormal_rows_is_identity_columns() {
        let mut h = CMatrix::zeros(2, 4);
        h[(0, 0)] = c(1.0, 0.0);
        h[(1, 1)] = c(1.0, 0.0);
        let snap = ChannelSnapshot::new(0.0, vec![3, 7], vec![h]).unwrap();
        let w = zf_precoder(&snap, DEFAULT_MAX_CONDITION).unwrap();
        let mut want = CMatrix::zeros(4, 2);
        want[(0, 0)] = c(1.0, 0.0);
        want[(1, 1)] = c(1.0, 0.0);
        assert!((&w.w()[0] - want).norm() < 1e-15);
    }

    #[test]
    fn zf_single_user_is_matched_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_matrix(&mut rng, 1, 4);
        let snap = ChannelSnapshot::new(0.0, vec![0], vec![h.clone()]).unwrap();
        let zf = zf_precoder(&snap, DEFAULT_MAX_CONDITION).unwrap();
        let svd = svd_steering(&snap).unwrap();
        assert!((&zf.w()[0] - &svd.w()[0]).norm() < 1e-12);
        let mf = h.adjoint().unscale(h.norm());
        assert!((&zf.w()[0] - mf).norm() < 1e-12);
    }

    #[test]
    fn zf_rejects_rank_deficient_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let good = random_matrix(&mut rng, 2, 4);
        let mut bad = random_matrix(&mut rng, 2, 4);
        let r0 = bad.row(0).clone_owned();
        bad.set_row(1, &(r0 * c(2.0, 0.0)));
        let snap = ChannelSnapshot::new(0.0, vec![0, 1], vec![good, bad]).unwrap();
        match zf_precoder(&snap, DEFAULT_MAX_CONDITION) {
            Err(MimoError::Singular { subcarrier, .. }) => assert_eq!(subcarrier, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn svd_cases() {
        let w = svd_precoder(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(w, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = [c(s, 0.0), c(0.0, s), c(0.0, 0.0), c(0.0, 0.0)];
        let w = svd_precoder(&h).unwrap();
        let g: Complex64 = h.iter().zip(&w).map(|(a, b)| a * b).sum();
        assert!((g.norm() - 1.0).abs() < 1e-15);

        assert_eq!(svd_precoder(&[c(0.0, 0.0); 4]), Err(MimoError::DegenerateChannel { subcarrier: 0 }));
    }

    #[test]
    fn su_sinr_cases() {
        let h = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let mut w = CMatrix::zeros(4, 1);
        w[(0, 0)] = c(1.0, 0.0);
        let alloc = PowerAllocation::new(vec![1.0], 0.1).unwrap();
        assert!((sinr_su(&h, &w, 0, &alloc).unwrap() - 10.0).abs() < 1e-12);

        let mut w = CMatrix::zeros(4, 1);
        w[(2, 0)] = c(1.0, 0.0);
        assert_eq!(sinr_su(&h, &w, 0, &alloc).unwrap(), 0.0);

        assert!(sinr_su(&h[..3], &w, 0, &alloc).is_err());
    }

    #[test]
    fn mu_sinr_checks_group_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_matrix(&mut rng, 2, 4);
        let snap = ChannelSnapshot::new(0.0, vec![4, 9], vec![h.clone()]).unwrap();
        let w = zf_precoder(&snap, DEFAULT_MAX_CONDITION).unwrap();
        let alloc = PowerAllocation::equal(1.0, 2, 0.01).unwrap();
        assert!(matches!(sinr_mu(std::slice::from_ref(&h), &[9, 4], &w, 0, &alloc), Err(MimoError::GroupMismatch { .. })));
        assert!(sinr_mu(&[h], &[4, 9], &w, 1, &alloc).is_ok());
    }

    #[test]
    fn fresh_csi_has_no_cross_user_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_matrix(&mut rng, 3, 4);
        let snap = ChannelSnapshot::new(0.0, vec![0, 1, 2], vec![h.clone()]).unwrap();
        let w = zf_precoder(&snap, DEFAULT_MAX_CONDITION).unwrap();
        let alloc = PowerAllocation::equal(1.0, 3, 1e-3).unwrap();
        let hw = &h * &w.w()[0];
        for n in 0..3 {
            let got = sinr_mu(std::slice::from_ref(&h), &[0, 1, 2], &w, n, &alloc).unwrap()[0];
            let want = alloc.powers()[n] * hw[(n, n)].norm_sqr() / alloc.noise();
            assert!((got - want).abs() <= 1e-9 * want);
        }
    }

    #[test]
    fn power_allocation_validation() {
        assert!(PowerAllocation::new(vec![1.0], 0.0).is_err());
        assert!(PowerAllocation::new(vec![-1.0], 1.0).is_err());
        let a = PowerAllocation::equal(3.0, 3, 1.0).unwrap();
        assert!((a.total() - 3.0).abs() < 1e-12);
    }
}
