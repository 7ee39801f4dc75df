//! Antenna gain models.
//!
//! The rotatable antenna is a 10 dBi directional element with a 60° half-power
//! beamwidth. Only those two numbers are known, so the main lobe is modelled
//! as a parabola in dB, `G(ψ) = peak − min(12 (ψ / hpbw)², floor)`, which puts
//! the −3 dB point exactly at `ψ = hpbw / 2` and flattens out at a fixed
//! out-of-beam attenuation. The pattern is rotationally symmetric about
//! boresight.

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::Scalar;

/// Anything that maps an off-boresight angle to a gain in dBi.
pub trait GainPattern<T: Scalar> {
    /// Gain at off-boresight angle `psi` (radians, `[0, π]`).
    fn gain_dbi(&self, psi: T) -> Result<T>;
}

fn check_psi<T: Scalar>(psi: T) -> Result<T> {
    ensure_finite("psi", psi)?;
    if psi < T::zero() || psi > T::PI() {
        return Err(Error::OutOfRange {
            name: "psi",
            value: psi.as_f64(),
            range: "[0, pi]",
        });
    }
    Ok(psi)
}

/// Parametric directional pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiationPattern<T> {
    peak_gain_dbi: T,
    hpbw: T,
    floor_attenuation_db: T,
}

impl<T: Scalar> RadiationPattern<T> {
    /// Default out-of-beam attenuation relative to peak.
    pub const DEFAULT_FLOOR_DB: f64 = 20.0;

    pub fn new(peak_gain_dbi: T, hpbw: T, floor_attenuation_db: T) -> Result<Self> {
        ensure_finite("peak_gain_dbi", peak_gain_dbi)?;
        ensure_finite("hpbw", hpbw)?;
        ensure_finite("floor_attenuation_db", floor_attenuation_db)?;
        if hpbw <= T::zero() || hpbw > T::PI() {
            return Err(invalid("hpbw", "must lie in (0, pi]"));
        }
        if floor_attenuation_db <= T::zero() {
            return Err(invalid("floor_attenuation_db", "must be positive"));
        }
        Ok(Self {
            peak_gain_dbi,
            hpbw,
            floor_attenuation_db,
        })
    }

    /// The prototype's antenna: 10 dBi, 60° beamwidth, 20 dB floor.
    pub fn prototype() -> Self {
        Self {
            peak_gain_dbi: T::lit(10.0),
            hpbw: T::lit(60f64.to_radians()),
            floor_attenuation_db: T::lit(Self::DEFAULT_FLOOR_DB),
        }
    }

    pub fn peak_gain_dbi(&self) -> T {
        self.peak_gain_dbi
    }

    pub fn hpbw(&self) -> T {
        self.hpbw
    }

    pub fn floor_attenuation_db(&self) -> T {
        self.floor_attenuation_db
    }

    /// Attenuation below peak at `psi`, before the floor is applied.
    fn lobe_loss_db(&self, psi: T) -> T {
        let x = psi / self.hpbw;
        T::lit(12.0) * x * x
    }
}

impl<T: Scalar> GainPattern<T> for RadiationPattern<T> {
    fn gain_dbi(&self, psi: T) -> Result<T> {
        let psi = check_psi(psi)?;
        Ok(self.peak_gain_dbi - self.lobe_loss_db(psi).min(self.floor_attenuation_db))
    }
}

/// Free-function form of [`GainPattern::gain_dbi`] for the directional pattern.
pub fn gain_dbi<T: Scalar>(p: &RadiationPattern<T>, psi: T) -> Result<T> {
    p.gain_dbi(psi)
}

/// Ideal isotropic element (the user's receive antenna).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IsotropicPattern;

impl<T: Scalar> GainPattern<T> for IsotropicPattern {
    fn gain_dbi(&self, psi: T) -> Result<T> {
        check_psi(psi)?;
        Ok(T::zero())
    }
}

/// Always 0 dBi.
pub fn isotropic_gain_dbi<T: Scalar>(psi: T) -> Result<T> {
    IsotropicPattern.gain_dbi(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn proto() -> RadiationPattern<f64> {
        RadiationPattern::new(10.0, 60f64.to_radians(), 20.0).unwrap()
    }

    // Independent evaluation of the model in degrees.
    fn brute(psi_deg: f64) -> f64 {
        let loss = 12.0 * (psi_deg / 60.0).powi(2);
        10.0 - if loss > 20.0 { 20.0 } else { loss }
    }

    #[test]
    fn anchor_examples() {
        let p = proto();
        assert_eq!(p.gain_dbi(0.0).unwrap(), 10.0);
        assert!((p.gain_dbi(30f64.to_radians()).unwrap() - 7.0).abs() < 1e-12);
        let g90 = p.gain_dbi(90f64.to_radians()).unwrap();
        assert!((g90 - (-10.0)).abs() < 1e-12);
        assert!((g90 - brute(90.0)).abs() < 1e-12);
        assert_eq!(RadiationPattern::<f64>::prototype(), p);
    }

    #[test]
    fn matches_degree_brute_force_on_grid() {
        let p = proto();
        for i in 0..=1800 {
            let deg = i as f64 * 0.1;
            let g = p.gain_dbi(deg.to_radians()).unwrap();
            assert!((g - brute(deg)).abs() < 1e-9, "psi={deg}");
        }
    }

    #[test]
    fn floor_reached_at_pi() {
        let p = proto();
        assert!((p.gain_dbi(PI).unwrap() - (10.0 - 20.0)).abs() < 1e-12);
    }

    #[test]
    fn psi_domain_enforced() {
        let p = proto();
        assert!(p.gain_dbi(-0.01).is_err());
        assert!(p.gain_dbi(PI + 0.01).is_err());
        assert!(p.gain_dbi(f64::NAN).is_err());
        assert!(isotropic_gain_dbi(4.0).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(RadiationPattern::new(10.0, 0.0, 20.0).is_err());
        assert!(RadiationPattern::new(10.0, PI + 0.1, 20.0).is_err());
        assert!(RadiationPattern::new(10.0, 1.0, 0.0).is_err());
        assert!(RadiationPattern::new(f64::NAN, 1.0, 20.0).is_err());
    }

    #[test]
    fn isotropic_is_flat() {
        for psi in [0.0, FRAC_PI_2, PI] {
            assert_eq!(isotropic_gain_dbi(psi).unwrap(), 0.0);
        }
    }

    #[test]
    fn continuity_on_grid() {
        let p = proto();
        let delta = 1e-6;
        for i in 0..1000 {
            let psi = i as f64 * (PI - delta) / 1000.0;
            let a = p.gain_dbi(psi).unwrap();
            let b = p.gain_dbi(psi + delta).unwrap();
            assert!((a - b).abs() < 1e-3, "jump at {psi}");
        }
    }
}
