//! mmWave link budget: path loss, received power, small-scale fading and
//! Shannon throughput for a user-UAV link.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Channel and radio parameters. The 73 GHz LoS path-loss exponents come
/// from the usual measurement fit (`alpha_db` 69.8, `beta` 2); bandwidth,
/// noise power and antenna gains are deployment choices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelParams {
    pub carrier_ghz: f64,
    /// Path-loss intercept alpha in dB.
    pub alpha_db: f64,
    /// Path-loss exponent beta (unitless).
    pub beta: f64,
    /// Transmit power P in dBm.
    pub tx_power_dbm: f64,
    /// Transmit antenna gain in dB.
    pub tx_gain_db: f64,
    /// Receive antenna gain in dB.
    pub rx_gain_db: f64,
    /// Noise power in dBm over the signal bandwidth.
    pub noise_power_dbm: f64,
    pub bandwidth_hz: f64,
    /// Rician K factor for LoS fading (K = 0 degenerates to Rayleigh).
    pub rician_k: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_ghz: 73.0,
            alpha_db: 69.8,
            beta: 2.0,
            tx_power_dbm: 30.0,
            tx_gain_db: 0.0,
            rx_gain_db: 0.0,
            noise_power_dbm: -85.0,
            bandwidth_hz: 1e8,
            rician_k: 2.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::invalid("bandwidth must be positive"));
        }
        if !(self.beta > 0.0) {
            return Err(Error::invalid("path-loss exponent must be positive"));
        }
        if !(self.rician_k >= 0.0) {
            return Err(Error::invalid("Rician K must be >= 0"));
        }
        Ok(())
    }
}

/// Log-distance path loss `alpha + 10 * beta * log10(d)` in dB.
pub fn path_loss_db(d: f64, params: &ChannelParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::invalid(format!("distance must be positive, got {d}")));
    }
    Ok(params.alpha_db + 10.0 * params.beta * d.log10())
}

/// Received power in dBm: transmit power plus antenna gains minus path loss.
pub fn received_power_dbm(d: f64, params: &ChannelParams) -> Result<f64> {
    Ok(params.tx_power_dbm + params.tx_gain_db + params.rx_gain_db - path_loss_db(d, params)?)
}

/// Squared channel gain `|g|^2` with unit mean power: Rician for LoS links,
/// Rayleigh (exponential power) for NLoS. A LoS draw with K = 0 is
/// bit-identical to the NLoS draw for the same rng state.
pub fn sample_gain_sq<R: Rng + ?Sized>(is_los: bool, rician_k: f64, rng: &mut R) -> f64 {
    assert!(rician_k >= 0.0, "Rician K must be >= 0");
    let k = if is_los { rician_k } else { 0.0 };
    let nu = (k / (k + 1.0)).sqrt();
    let sigma = (0.5 / (k + 1.0)).sqrt();
    let re: f64 = nu + sigma * rng.sample::<f64, _>(StandardNormal);
    let im: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
    re * re + im * im
}

/// Precomputed linear-unit link budget so per-link throughput stays off the
/// dB<->watt conversion path.
#[derive(Debug, Clone, Copy)]
pub struct LinkBudget {
    /// Received SNR at d = 1 m with unit channel gain (linear).
    snr_at_1m: f64,
    beta: f64,
    bandwidth_hz: f64,
}

impl LinkBudget {
    pub fn new(params: &ChannelParams) -> Self {
        let snr_db = params.tx_power_dbm + params.tx_gain_db + params.rx_gain_db
            - params.alpha_db
            - params.noise_power_dbm;
        Self {
            snr_at_1m: 10f64.powf(snr_db / 10.0),
            beta: params.beta,
            bandwidth_hz: params.bandwidth_hz,
        }
    }

    /// Linear SNR at distance `d` with unit channel gain.
    pub fn snr(&self, d: f64) -> f64 {
        self.snr_at_1m / d.powf(self.beta)
    }

    /// Shannon rate in bits/s for distance `d` and squared channel gain.
    pub fn throughput_bps(&self, d: f64, gain_sq: f64) -> f64 {
        self.bandwidth_hz * (1.0 + self.snr(d) * gain_sq).log2()
    }
}

/// Instantaneous throughput in bits/s at distance `d` for a given squared
/// channel gain.
pub fn throughput_bps(d: f64, gain_sq: f64, params: &ChannelParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::invalid(format!("distance must be positive, got {d}")));
    }
    if !(gain_sq >= 0.0) {
        return Err(Error::invalid("squared gain must be >= 0"));
    }
    Ok(LinkBudget::new(params).throughput_bps(d, gain_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Independently evaluated at 50-digit precision from the same closed
    // forms: B log2(1 + 10^((30 - 109.8 + 85) / 10)) with B = 1e8.
    const THROUGHPUT_100M_BPS: f64 = 210812670.81625092;

    #[test]
    fn path_loss_at_unit_distance_is_alpha() {
        let p = ChannelParams::default();
        assert_eq!(path_loss_db(1.0, &p).unwrap(), 69.8);
    }

    #[test]
    fn path_loss_hand_evaluations() {
        let p = ChannelParams::default();
        assert!((path_loss_db(10.0, &p).unwrap() - 89.8).abs() < 1e-12);
        assert!((path_loss_db(100.0, &p).unwrap() - 109.8).abs() < 1e-12);
    }

    #[test]
    fn path_loss_rejects_non_positive_distance() {
        let p = ChannelParams::default();
        assert!(path_loss_db(0.0, &p).is_err());
        assert!(path_loss_db(-3.0, &p).is_err());
    }

    #[test]
    fn received_power_examples() {
        let p = ChannelParams::default();
        assert!((received_power_dbm(1.0, &p).unwrap() - -39.8).abs() < 1e-12);
        assert!((received_power_dbm(100.0, &p).unwrap() - -79.8).abs() < 1e-12);
    }

    #[test]
    fn rx_gain_shifts_power_linearly() {
        let p = ChannelParams::default();
        let boosted = ChannelParams {
            rx_gain_db: p.rx_gain_db + 3.0,
            ..p
        };
        for d in [1.0, 7.3, 120.0] {
            let delta =
                received_power_dbm(d, &boosted).unwrap() - received_power_dbm(d, &p).unwrap();
            assert!((delta - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gain_with_k_zero_matches_rayleigh_draw() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let los = sample_gain_sq(true, 0.0, &mut a);
            let nlos = sample_gain_sq(false, 5.0, &mut b);
            assert_eq!(los.to_bits(), nlos.to_bits());
        }
    }

    #[test]
    fn gain_draws_are_deterministic() {
        let x = sample_gain_sq(true, 2.0, &mut ChaCha8Rng::seed_from_u64(9));
        let y = sample_gain_sq(true, 2.0, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(x.to_bits(), y.to_bits());
    }

    #[test]
    fn gain_mean_is_unit() {
        for (is_los, k) in [(true, 2.0), (false, 0.0), (true, 8.0)] {
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let n = 1_000_000;
            let mean: f64 =
                (0..n).map(|_| sample_gain_sq(is_los, k, &mut rng)).sum::<f64>() / n as f64;
            assert!((mean - 1.0).abs() < 0.01, "mean {mean} for K={k} los={is_los}");
        }
    }

    #[test]
    fn zero_gain_means_zero_throughput() {
        let p = ChannelParams::default();
        assert_eq!(throughput_bps(50.0, 0.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn doubling_bandwidth_doubles_rate() {
        let p = ChannelParams::default();
        let wide = ChannelParams {
            bandwidth_hz: 2.0 * p.bandwidth_hz,
            ..p
        };
        let r1 = throughput_bps(80.0, 1.0, &p).unwrap();
        let r2 = throughput_bps(80.0, 1.0, &wide).unwrap();
        assert!((r2 - 2.0 * r1).abs() / r2 < 1e-12);
    }

    #[test]
    fn throughput_matches_high_precision_oracle() {
        let p = ChannelParams::default();
        let r = throughput_bps(100.0, 1.0, &p).unwrap();
        assert!(
            (r - THROUGHPUT_100M_BPS).abs() / THROUGHPUT_100M_BPS < 1e-12,
            "got {r}"
        );
    }

    proptest! {
        #[test]
        fn throughput_strictly_decreasing_in_distance(
            d in 1.0..500.0f64, delta in 0.01..50.0f64
        ) {
            let p = ChannelParams::default();
            let near = throughput_bps(d, 1.0, &p).unwrap();
            let far = throughput_bps(d + delta, 1.0, &p).unwrap();
            prop_assert!(far < near);
        }

        #[test]
        fn throughput_nonnegative(d in 0.1..1000.0f64, g in 0.0..10.0f64) {
            let p = ChannelParams::default();
            let r = throughput_bps(d, g, &p).unwrap();
            prop_assert!(r >= 0.0);
            prop_assert_eq!(r == 0.0, g == 0.0);
        }

        #[test]
        fn path_loss_log_additivity(d1 in 1.0..100.0f64, d2 in 1.0..100.0f64) {
            let p = ChannelParams::default();
            let lhs = path_loss_db(d1 * d2, &p).unwrap();
            let rhs = path_loss_db(d1, &p).unwrap() + path_loss_db(d2, &p).unwrap() - p.alpha_db;
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }
}
