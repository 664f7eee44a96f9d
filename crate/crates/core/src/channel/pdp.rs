use super::ChannelError;

/// One resolvable multipath component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay_s: f64,
    /// Mean-square gain, linear.
    pub power: f64,
}

/// Tap-delay profile normalized to unit total power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    taps: Vec<Tap>,
}

impl PowerDelayProfile {
    /// Builds a profile with `num_taps` taps spaced `tap_spacing_s` apart whose
    /// power falls by `decay_db_per_tap` per tap before renormalization.
    pub fn exponential(
        num_taps: usize,
        decay_db_per_tap: f64,
        tap_spacing_s: f64,
    ) -> Result<Self, ChannelError> {
        if num_taps == 0 {
            return Err(ChannelError::InvalidProfile("at least one tap is required".into()));
        }
        if !(tap_spacing_s > 0.0) || !tap_spacing_s.is_finite() {
            return Err(ChannelError::InvalidProfile(format!(
                "tap spacing must be positive, got {tap_spacing_s}"
            )));
        }
        if !(decay_db_per_tap >= 0.0) || !decay_db_per_tap.is_finite() {
            return Err(ChannelError::InvalidProfile(format!(
                "decay must be non-negative, got {decay_db_per_tap} dB"
            )));
        }
        let raw: Vec<f64> = (0..num_taps)
            .map(|k| 10f64.powf(-(k as f64) * decay_db_per_tap / 10.0))
            .collect();
        let total: f64 = raw.iter().sum();
        let taps = raw
            .into_iter()
            .enumerate()
            .map(|(k, p)| Tap { delay_s: k as f64 * tap_spacing_s, power: p / total })
            .collect();
        Ok(Self { taps })
    }

    /// Arbitrary profile; powers are rescaled to unit total.
    pub fn from_taps(taps: Vec<Tap>) -> Result<Self, ChannelError> {
        if taps.is_empty() {
            return Err(ChannelError::InvalidProfile("at least one tap is required".into()));
        }
        if let Some(t) = taps.iter().find(|t| !(t.delay_s >= 0.0) || !t.delay_s.is_finite() || !(t.power > 0.0) || !t.power.is_finite()) {
            return Err(ChannelError::InvalidProfile(format!("bad tap {t:?}")));
        }
        let total: f64 = taps.iter().map(|t| t.power).sum();
        Ok(Self { taps: taps.into_iter().map(|t| Tap { power: t.power / total, ..t }).collect() })
    }

    /// Single zero-delay tap (flat fading).
    pub fn flat() -> Self {
        Self { taps: vec![Tap { delay_s: 0.0, power: 1.0 }] }
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.taps.iter().map(|t| t.power).sum()
    }

    /// RMS delay spread in seconds.
    pub fn rms_delay_spread(&self) -> f64 {
        let mean: f64 = self.taps.iter().map(|t| t.power * t.delay_s).sum();
        let second: f64 = self.taps.iter().map(|t| t.power * t.delay_s * t.delay_s).sum();
        (second - mean * mean).max(0.0).sqrt()
    }
}
