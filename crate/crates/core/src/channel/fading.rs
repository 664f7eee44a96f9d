use std::f64::consts::PI;
use std::time::Duration;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{bessel_j0, ChannelError, ChannelSource, PowerDelayProfile};

/// Lag-one correlation of a Clarke-spectrum tap sampled every `dt_s`.
pub fn lag_one_correlation(doppler_hz: f64, dt_s: f64) -> f64 {
    bessel_j0(2.0 * PI * doppler_hz * dt_s)
}

/// Tap gains of a single transmit-receive link, evolving as a first-order
/// Gauss-Markov process whose lag-one correlation matches the Clarke model.
///
/// Only the lag-one correlation is exact; at larger lags the process decays
/// geometrically (`rho^m`) rather than following `J0(2 pi f_d m dt)`.
#[derive(Debug, Clone)]
pub struct FadingProcess {
    pdp: PowerDelayProfile,
    sigma: Vec<f64>,
    doppler_hz: f64,
    dt_s: f64,
    gains: Vec<Complex64>,
    rng: ChaCha8Rng,
    seed: u64,
    steps: u64,
}

impl FadingProcess {
    /// Draws the initial state from the stationary distribution.
    pub fn new(
        pdp: PowerDelayProfile,
        doppler_hz: f64,
        dt_s: f64,
        seed: u64,
    ) -> Result<Self, ChannelError> {
        check_doppler(doppler_hz)?;
        if !(dt_s > 0.0) || !dt_s.is_finite() {
            return Err(ChannelError::InvalidConfig(format!("update step must be positive, got {dt_s}")));
        }
        let sigma: Vec<f64> = pdp.taps().iter().map(|t| t.power.sqrt()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gains = sigma.iter().map(|&s| s * complex_normal(&mut rng)).collect();
        Ok(Self { pdp, sigma, doppler_hz, dt_s, gains, rng, seed, steps: 0 })
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn pdp(&self) -> &PowerDelayProfile {
        &self.pdp
    }

    pub fn doppler_hz(&self) -> f64 {
        self.doppler_hz
    }

    pub fn dt_s(&self) -> f64 {
        self.dt_s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of steps taken since construction.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Advances one update step at the process's own Doppler.
    pub fn step(&mut self) {
        let rho = lag_one_correlation(self.doppler_hz, self.dt_s);
        self.step_with_correlation(rho);
    }

    /// Advances one step with an explicit lag-one correlation. The random
    /// stream is consumed identically regardless of `rho`, so two processes
    /// with the same seed stay aligned even under different Doppler schedules.
    pub fn step_with_correlation(&mut self, rho: f64) {
        let innovation = (1.0 - rho * rho).max(0.0).sqrt();
        for (g, &s) in self.gains.iter_mut().zip(&self.sigma) {
            let xi = complex_normal(&mut self.rng);
            *g = *g * rho + xi * (innovation * s);
        }
        self.steps += 1;
    }
}

fn check_doppler(doppler_hz: f64) -> Result<(), ChannelError> {
    if !(doppler_hz >= 0.0) || !doppler_hz.is_finite() {
        return Err(ChannelError::InvalidConfig(format!("Doppler must be non-negative, got {doppler_hz}")));
    }
    Ok(())
}

/// Circularly-symmetric unit-variance complex Gaussian.
fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// H(f) = sum_k a_k exp(-j 2 pi f tau_k) at each requested frequency.
pub fn freq_response(
    tap_gains: &[Complex64],
    pdp: &PowerDelayProfile,
    subcarrier_freqs: &[f64],
) -> Result<Vec<Complex64>, ChannelError> {
    if tap_gains.len() != pdp.len() {
        return Err(ChannelError::DimensionMismatch(format!(
            "{} tap gains for a {}-tap profile",
            tap_gains.len(),
            pdp.len()
        )));
    }
    Ok(subcarrier_freqs
        .iter()
        .map(|&f| {
            tap_gains
                .iter()
                .zip(pdp.taps())
                .map(|(&a, tap)| a * Complex64::from_polar(1.0, -2.0 * PI * f * tap.delay_s))
                .sum()
        })
        .collect())
}

/// Baseband offsets of `num_sc` subcarriers sampled evenly across a band of
/// `data_subcarriers` tones spaced `spacing_hz` apart.
pub fn subcarrier_frequencies(num_sc: usize, data_subcarriers: usize, spacing_hz: f64) -> Vec<f64> {
    let stride = data_subcarriers as f64 / num_sc as f64;
    let half = data_subcarriers as f64 / 2.0;
    (0..num_sc)
        .map(|i| ((i as f64 + 0.5) * stride - half) * spacing_hz)
        .collect()
}

/// How the Doppler frequency evolves over a session.
#[derive(Debug, Clone, PartialEq)]
pub enum DopplerSchedule {
    Constant(f64),
    /// Alternates between two Doppler levels every `period`.
    Alternating { high_hz: f64, low_hz: f64, period: Duration, start_high: bool },
}

impl DopplerSchedule {
    pub fn doppler_at(&self, t: Duration) -> f64 {
        match *self {
            DopplerSchedule::Constant(fd) => fd,
            DopplerSchedule::Alternating { high_hz, low_hz, .. } => {
                if self.is_high_at(t) {
                    high_hz
                } else {
                    low_hz
                }
            }
        }
    }

    /// Whether `t` falls in a high-Doppler segment. Constant schedules have
    /// no segments and report `false`.
    pub fn is_high_at(&self, t: Duration) -> bool {
        match *self {
            DopplerSchedule::Constant(_) => false,
            DopplerSchedule::Alternating { period, start_high, .. } => {
                let seg = t.as_nanos() / period.as_nanos().max(1);
                seg.is_multiple_of(2) == start_high
            }
        }
    }

    fn validate(&self) -> Result<(), ChannelError> {
        match *self {
            DopplerSchedule::Constant(fd) => check_doppler(fd),
            DopplerSchedule::Alternating { high_hz, low_hz, period, .. } => {
                check_doppler(high_hz)?;
                check_doppler(low_hz)?;
                if period.is_zero() {
                    return Err(ChannelError::InvalidConfig("alternation period must be positive".into()));
                }
                Ok(())
            }
        }
    }
}

/// Static description of the propagation environment shared by every link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub pdp: PowerDelayProfile,
    pub num_tx: usize,
    pub subcarrier_freqs: Vec<f64>,
    /// Block-fading update step.
    pub dt: Duration,
}

impl ChannelModel {
    pub fn num_subcarriers(&self) -> usize {
        self.subcarrier_freqs.len()
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.num_tx == 0 || self.subcarrier_freqs.is_empty() {
            return Err(ChannelError::InvalidConfig("antenna and subcarrier counts must be at least 1".into()));
        }
        if self.dt.is_zero() {
            return Err(ChannelError::InvalidConfig("update step must be positive".into()));
        }
        Ok(())
    }
}

/// Per-link seed derived from the session seed; independent of which other
/// users are simulated, so smaller groups see a subset of the same channels.
pub fn link_seed(seed: u64, user: usize, tx: usize) -> u64 {
    let mut z = seed
        ^ (user as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (tx as u64).wrapping_add(1).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent fading processes for every (user, transmit antenna) link of a
/// set of users, stepped together on a common block clock.
#[derive(Debug, Clone)]
pub struct FadingField {
    model: ChannelModel,
    schedule: DopplerSchedule,
    users: Vec<usize>,
    links: Vec<FadingProcess>,
    /// exp(-j 2 pi f tau_k), indexed [subcarrier][tap]
    phasors: Vec<Vec<Complex64>>,
    block: u64,
}

impl FadingField {
    pub fn new(
        model: ChannelModel,
        schedule: DopplerSchedule,
        users: &[usize],
        seed: u64,
    ) -> Result<Self, ChannelError> {
        model.validate()?;
        schedule.validate()?;
        if users.is_empty() {
            return Err(ChannelError::InvalidConfig("at least one user is required".into()));
        }
        let dt_s = model.dt.as_secs_f64();
        let mut links = Vec::with_capacity(users.len() * model.num_tx);
        for &u in users {
            for a in 0..model.num_tx {
                let fd = schedule.doppler_at(Duration::ZERO);
                links.push(FadingProcess::new(model.pdp.clone(), fd, dt_s, link_seed(seed, u, a))?);
            }
        }
        let phasors = model
            .subcarrier_freqs
            .iter()
            .map(|&f| {
                model
                    .pdp
                    .taps()
                    .iter()
                    .map(|t| Complex64::from_polar(1.0, -2.0 * PI * f * t.delay_s))
                    .collect()
            })
            .collect();
        Ok(Self { model, schedule, users: users.to_vec(), links, phasors, block: 0 })
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    pub fn schedule(&self) -> &DopplerSchedule {
        &self.schedule
    }

    pub fn users(&self) -> &[usize] {
        &self.users
    }

    pub fn block(&self) -> u64 {
        self.block
    }

    /// Steps all links forward to `block`. Blocks only move forward.
    pub fn advance_to(&mut self, block: u64) -> Result<(), ChannelError> {
        if block < self.block {
            return Err(ChannelError::TimeReversal { requested: block, current: self.block });
        }
        let dt_s = self.model.dt.as_secs_f64();
        let dt_ns = self.model.dt.as_nanos() as u64;
        while self.block < block {
            // The step from block b to b+1 uses the Doppler in force during b.
            let t = Duration::from_nanos(dt_ns.saturating_mul(self.block));
            let rho = lag_one_correlation(self.schedule.doppler_at(t), dt_s);
            for link in &mut self.links {
                link.step_with_correlation(rho);
            }
            self.block += 1;
        }
        Ok(())
    }

    fn link(&self, user_slot: usize, tx: usize) -> &FadingProcess {
        &self.links[user_slot * self.model.num_tx + tx]
    }

    /// Current tap gains for the link from antenna `tx` to user `user`.
    pub fn tap_gains(&self, user: usize, tx: usize) -> Option<&[Complex64]> {
        let slot = self.users.iter().position(|&u| u == user)?;
        Some(self.link(slot, tx).gains())
    }

    /// Response of the link (user slot, antenna) at one subcarrier.
    pub(crate) fn respond(&self, slot: usize, sc: usize, tx: usize) -> Complex64 {
        self.link(slot, tx)
            .gains()
            .iter()
            .zip(&self.phasors[sc])
            .map(|(a, p)| a * p)
            .sum()
    }

    /// Current per-subcarrier frequency response, `N_u x N_t` per subcarrier.
    pub fn current_response(&self, users: &[usize]) -> Result<Vec<DMatrix<Complex64>>, ChannelError> {
        let slots = users
            .iter()
            .map(|u| {
                self.users
                    .iter()
                    .position(|x| x == u)
                    .ok_or(ChannelError::UnknownUser(*u))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let nt = self.model.num_tx;
        Ok((0..self.model.num_subcarriers())
            .map(|sc| DMatrix::from_fn(slots.len(), nt, |r, a| self.respond(slots[r], sc, a)))
            .collect())
    }
}

impl ChannelSource for FadingField {
    fn num_tx(&self) -> usize {
        self.model.num_tx
    }

    fn num_subcarriers(&self) -> usize {
        self.model.num_subcarriers()
    }

    fn dt(&self) -> Duration {
        self.model.dt
    }

    fn response(&mut self, block: u64, users: &[usize]) -> Result<Vec<DMatrix<Complex64>>, ChannelError> {
        self.advance_to(block)?;
        self.current_response(users)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_process(fd: f64, seed: u64) -> FadingProcess {
        FadingProcess::new(PowerDelayProfile::flat(), fd, 1e-3, seed).unwrap()
    }

    #[test]
    fn zero_doppler_is_frozen() {
        let pdp = PowerDelayProfile::exponential(3, 3.0, 50e-9).unwrap();
        let mut p = FadingProcess::new(pdp, 0.0, 1e-3, 9).unwrap();
        let g0 = p.gains().to_vec();
        for _ in 0..500 {
            p.step();
        }
        assert_eq!(p.gains(), &g0[..]);
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = flat_process(15.0, 42);
        let mut b = flat_process(15.0, 42);
        for _ in 0..1000 {
            a.step();
            b.step();
            assert_eq!(a.gains()[0].re.to_bits(), b.gains()[0].re.to_bits());
            assert_eq!(a.gains()[0].im.to_bits(), b.gains()[0].im.to_bits());
        }
    }

    #[test]
    fn decorrelates_at_first_j0_root() {
        let dt = 1e-3;
        let fd = 2.404826 / (2.0 * PI * dt);
        let mut p = FadingProcess::new(PowerDelayProfile::flat(), fd, dt, 5).unwrap();
        let n = 100_000;
        let (mut num, mut den) = (0.0, 0.0);
        let mut prev = p.gains()[0];
        for _ in 0..n {
            p.step();
            let cur = p.gains()[0];
            num += (cur * prev.conj()).re;
            den += prev.norm_sqr();
            prev = cur;
        }
        assert!((num / den).abs() < 0.02, "corr {}", num / den);
    }

    #[test]
    fn freq_response_cases() {
        let g = Complex64::new(0.3, -0.7);
        let flat = PowerDelayProfile::flat();
        let h = freq_response(&[g], &flat, &[-1e6, 0.0, 2e6]).unwrap();
        assert!(h.iter().all(|&x| x == g));

        // equal taps pi out of phase at f cancel
        let pdp = PowerDelayProfile::exponential(2, 0.0, 50e-9).unwrap();
        let f = 1.0 / (2.0 * 50e-9);
        let h = freq_response(&[g, g], &pdp, &[f]).unwrap();
        assert!(h[0].norm() < 1e-12);

        assert!(freq_response(&[g], &pdp, &[0.0]).is_err());
    }

    #[test]
    fn alternating_schedule_segments() {
        let s = DopplerSchedule::Alternating {
            high_hz: 15.0,
            low_hz: 1.5,
            period: Duration::from_millis(50),
            start_high: true,
        };
        assert_eq!(s.doppler_at(Duration::ZERO), 15.0);
        assert_eq!(s.doppler_at(Duration::from_micros(49_999)), 15.0);
        assert_eq!(s.doppler_at(Duration::from_millis(50)), 1.5);
        assert_eq!(s.doppler_at(Duration::from_millis(100)), 15.0);
        assert!(!DopplerSchedule::Constant(15.0).is_high_at(Duration::ZERO));
    }

    #[test]
    fn field_is_subset_consistent() {
        let model = ChannelModel {
            pdp: PowerDelayProfile::exponential(3, 3.0, 50e-9).unwrap(),
            num_tx: 4,
            subcarrier_freqs: subcarrier_frequencies(8, 108, 312.5e3),
            dt: Duration::from_millis(1),
        };
        let sched = DopplerSchedule::Constant(15.0);
        let mut big = FadingField::new(model.clone(), sched.clone(), &[0, 1, 2], 7).unwrap();
        let mut small = FadingField::new(model, sched, &[0, 1], 7).unwrap();
        let hb = big.response(37, &[0, 1]).unwrap();
        let hs = small.response(37, &[0, 1]).unwrap();
        assert_eq!(hb, hs);
        assert!(big.response(3, &[0]).is_err());
        assert!(matches!(big.response(40, &[5]), Err(ChannelError::UnknownUser(5))));
    }
}
