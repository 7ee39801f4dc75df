//! Link budget for the 5.8 GHz line-of-sight link.

use crate::error::{ensure_finite, invalid, Result};
use crate::Scalar;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// Radio parameters of the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams<T> {
    pub carrier_hz: T,
    pub tx_power_dbm: T,
    pub bit_rate_bps: T,
    pub bits_per_symbol: u32,
    pub noise_figure_db: T,
    pub rx_bandwidth_hz: T,
}

impl<T: Scalar> LinkParams<T> {
    pub const DEFAULT_NOISE_FIGURE_DB: f64 = 6.0;

    /// Validates the parameters. `rx_bandwidth_hz = None` selects the symbol
    /// rate (matched filter).
    pub fn new(
        carrier_hz: T,
        tx_power_dbm: T,
        bit_rate_bps: T,
        bits_per_symbol: u32,
        noise_figure_db: T,
        rx_bandwidth_hz: Option<T>,
    ) -> Result<Self> {
        ensure_finite("carrier_hz", carrier_hz)?;
        ensure_finite("tx_power_dbm", tx_power_dbm)?;
        ensure_finite("bit_rate_bps", bit_rate_bps)?;
        ensure_finite("noise_figure_db", noise_figure_db)?;
        if carrier_hz <= T::zero() {
            return Err(invalid("carrier_hz", "must be positive"));
        }
        if bit_rate_bps <= T::zero() {
            return Err(invalid("bit_rate_bps", "must be positive"));
        }
        if bits_per_symbol < 1 {
            return Err(invalid("bits_per_symbol", "must be at least 1"));
        }
        let symbol_rate = bit_rate_bps / T::lit(bits_per_symbol as f64);
        let rx_bandwidth_hz = rx_bandwidth_hz.unwrap_or(symbol_rate);
        ensure_finite("rx_bandwidth_hz", rx_bandwidth_hz)?;
        if rx_bandwidth_hz <= T::zero() {
            return Err(invalid("rx_bandwidth_hz", "must be positive"));
        }
        Ok(Self {
            carrier_hz,
            tx_power_dbm,
            bit_rate_bps,
            bits_per_symbol,
            noise_figure_db,
            rx_bandwidth_hz,
        })
    }

    /// 5.8 GHz, 10 dBm, 2 Mbps 16-QAM, 6 dB noise figure, 500 kHz bandwidth.
    pub fn prototype() -> Self {
        Self::new(
            T::lit(5.8e9),
            T::lit(10.0),
            T::lit(2e6),
            4,
            T::lit(Self::DEFAULT_NOISE_FIGURE_DB),
            None,
        )
        .expect("prototype link parameters are valid")
    }

    pub fn symbol_rate(&self) -> T {
        self.bit_rate_bps / T::lit(self.bits_per_symbol as f64)
    }
}

/// Propagation loss model. Free space is the default; the log-distance form
/// scales the free-space loss at a reference distance with a custom exponent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PathLoss<T> {
    #[default]
    FreeSpace,
    LogDistance { exponent: T, reference_m: T },
}

impl<T: Scalar> PathLoss<T> {
    pub fn loss_db(&self, carrier_hz: T, distance_m: T) -> Result<T> {
        match *self {
            PathLoss::FreeSpace => fspl_db(carrier_hz, distance_m),
            PathLoss::LogDistance {
                exponent,
                reference_m,
            } => {
                let at_ref = fspl_db(carrier_hz, reference_m)?;
                check_distance(distance_m)?;
                Ok(at_ref + T::lit(10.0) * exponent * (distance_m / reference_m).log10())
            }
        }
    }
}

fn check_distance<T: Scalar>(distance_m: T) -> Result<T> {
    ensure_finite("distance_m", distance_m)?;
    if distance_m <= T::zero() {
        return Err(invalid("distance_m", "must be positive"));
    }
    Ok(distance_m)
}

/// Friis free-space path loss `20 log10(4π d f / c)` in dB.
pub fn fspl_db<T: Scalar>(carrier_hz: T, distance_m: T) -> Result<T> {
    ensure_finite("carrier_hz", carrier_hz)?;
    if carrier_hz <= T::zero() {
        return Err(invalid("carrier_hz", "must be positive"));
    }
    check_distance(distance_m)?;
    let c = T::lit(SPEED_OF_LIGHT);
    Ok(T::lit(20.0) * (T::lit(4.0) * T::PI() * distance_m * carrier_hz / c).log10())
}

/// Additive link budget `P_tx + G_tx + G_rx − FSPL`, in dBm.
pub fn received_power_dbm<T: Scalar>(
    link: &LinkParams<T>,
    tx_gain_dbi: T,
    rx_gain_dbi: T,
    distance_m: T,
) -> Result<T> {
    let loss = fspl_db(link.carrier_hz, distance_m)?;
    Ok(link.tx_power_dbm + tx_gain_dbi + rx_gain_dbi - loss)
}

/// Thermal noise floor over the receiver bandwidth plus noise figure.
pub fn noise_floor_dbm<T: Scalar>(link: &LinkParams<T>) -> T {
    T::lit(THERMAL_NOISE_DBM_HZ) + T::lit(10.0) * link.rx_bandwidth_hz.log10() + link.noise_figure_db
}

pub fn snr_db<T: Scalar>(link: &LinkParams<T>, prx_dbm: T) -> T {
    prx_dbm - noise_floor_dbm(link)
}

/// `Eb/N0 = SNR + 10 log10(B / R_b)`.
pub fn ebn0_db<T: Scalar>(link: &LinkParams<T>, snr_db: T) -> T {
    snr_db + T::lit(10.0) * (link.rx_bandwidth_hz / link.bit_rate_bps).log10()
}

/// Gray-coded square 16-QAM bit error rate, `(3/8) erfc(sqrt(0.4 γ_b))`.
pub fn ber_16qam<T: Scalar>(ebn0_db: T) -> Result<T> {
    ensure_finite("ebn0_db", ebn0_db)?;
    Ok(ber_16qam_linear(T::lit(10.0).powf(ebn0_db / T::lit(10.0))))
}

/// Same as [`ber_16qam`] with linear `Eb/N0`.
pub fn ber_16qam_linear<T: Scalar>(gamma_b: T) -> T {
    let gamma = gamma_b.max(T::zero()).as_f64();
    T::lit(0.375 * libm::erfc((0.4 * gamma).sqrt()))
}
