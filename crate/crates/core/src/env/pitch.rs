use serde::{Deserialize, Serialize};

use crate::dsp::equal_tempered;

/// Pitch floor approached as the tip moves far from the antenna, Hz.
pub const PITCH_FLOOR: f64 = 180.0;
/// Extra pitch at zero distance, Hz.
pub const PITCH_SPAN: f64 = 1200.0;
/// Distance decay constant, meters.
pub const PITCH_DECAY: f64 = 0.18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PitchMap {
    /// `f(d) = 180 + 1200·exp(-d/0.18)`.
    Exponential,
    /// Straight line through the exponential map's A4 and Ab5 points.
    Linear,
}

fn exp_inverse(f: f64) -> Option<f64> {
    let x = (f - PITCH_FLOOR) / PITCH_SPAN;
    (x > 0.0).then(|| -PITCH_DECAY * x.ln())
}

/// (slope Hz/m, intercept Hz) of the linear map.
fn linear_coefficients() -> (f64, f64) {
    let (f_lo, f_hi) = (equal_tempered(0), equal_tempered(11));
    let d_lo = exp_inverse(f_lo).expect("A4 above floor");
    let d_hi = exp_inverse(f_hi).expect("Ab5 above floor");
    let slope = (f_hi - f_lo) / (d_hi - d_lo);
    (slope, f_lo - slope * d_lo)
}

/// Pitch of the theremin for a tip-to-antenna distance `d` in meters.
pub fn distance_to_pitch(d: f64, map: PitchMap) -> f64 {
    let d = d.max(0.0);
    match map {
        PitchMap::Exponential => PITCH_FLOOR + PITCH_SPAN * (-d / PITCH_DECAY).exp(),
        PitchMap::Linear => {
            let (slope, intercept) = linear_coefficients();
            intercept + slope * d
        }
    }
}

/// Inverse of [`distance_to_pitch`]; `None` when no non-negative distance
/// produces `f`.
pub fn pitch_to_distance(f: f64, map: PitchMap) -> Option<f64> {
    let d = match map {
        PitchMap::Exponential => exp_inverse(f)?,
        PitchMap::Linear => {
            let (slope, intercept) = linear_coefficients();
            (f - intercept) / slope
        }
    };
    (d >= 0.0 && d.is_finite()).then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_at_infinity() {
        assert!((distance_to_pitch(1e6, PitchMap::Exponential) - 180.0).abs() < 1e-9);
        assert_eq!(distance_to_pitch(0.0, PitchMap::Exponential), 1380.0);
    }

    #[test]
    fn strictly_decreasing() {
        for map in [PitchMap::Exponential, PitchMap::Linear] {
            let mut prev = f64::INFINITY;
            for i in 0..400 {
                let f = distance_to_pitch(i as f64 * 0.001, map);
                assert!(f < prev);
                prev = f;
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        for map in [PitchMap::Exponential, PitchMap::Linear] {
            for k in 0..12 {
                let f = equal_tempered(k);
                let d = pitch_to_distance(f, map).unwrap();
                assert!((distance_to_pitch(d, map) - f).abs() < 1e-9);
            }
        }
        assert_eq!(pitch_to_distance(150.0, PitchMap::Exponential), None);
    }

    #[test]
    fn linear_map_shares_endpoints() {
        for k in [0, 11] {
            let f = equal_tempered(k);
            let a = pitch_to_distance(f, PitchMap::Exponential).unwrap();
            let b = pitch_to_distance(f, PitchMap::Linear).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn note_band_location() {
        let d_hi = pitch_to_distance(equal_tempered(11), PitchMap::Exponential).unwrap();
        let d_lo = pitch_to_distance(440.0, PitchMap::Exponential).unwrap();
        assert!((0.10..0.12).contains(&d_hi), "{d_hi}");
        assert!((0.26..0.29).contains(&d_lo), "{d_lo}");
    }
}
