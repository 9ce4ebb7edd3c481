use thiserror::Error;

use crate::data::{DataError, LocationFeature};

/// Rough UK bounding box used for min-max normalisation.
pub const LAT_MIN: f64 = 49.9;
pub const LAT_MAX: f64 = 61.9;
pub const LON_MIN: f64 = -8.6;
pub const LON_MAX: f64 = 2.1;

#[derive(Debug, Error, PartialEq)]
pub enum LocationError {
    #[error("non-finite coordinate ({lat}, {lon})")]
    NonFiniteInput { lat: f64, lon: f64 },
    #[error(transparent)]
    Feature(#[from] DataError),
}

/// Unclamped min-max normalisation of `(lat, lon)` against the UK box.
pub fn normalize_raw(lat: f64, lon: f64) -> [f64; 2] {
    [
        (lat - LAT_MIN) / (LAT_MAX - LAT_MIN),
        (lon - LON_MIN) / (LON_MAX - LON_MIN),
    ]
}

/// Normalised location feature for WGS84 `(lat, lon)` in degrees.
///
/// Points outside the box map outside `[0, 1]`; only values beyond the
/// `[-0.1, 1.1]` sanity guard are rejected.
pub fn normalize_location(lat: f64, lon: f64) -> Result<LocationFeature, LocationError> {
    if !(lat.is_finite() && lon.is_finite()) {
        return Err(LocationError::NonFiniteInput { lat, lon });
    }
    Ok(LocationFeature::new(normalize_raw(lat, lon))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corners_and_midpoint() {
        assert_eq!(normalize_location(49.9, -8.6).unwrap().values(), [0.0, 0.0]);
        assert_eq!(normalize_location(61.9, 2.1).unwrap().values(), [1.0, 1.0]);
        let [a, b] = normalize_location(55.9, -3.25).unwrap().values();
        assert!((a - 0.5).abs() < 1e-12 && (b - 0.5).abs() < 1e-12);
    }

    #[test]
    fn slightly_outside_box_is_kept() {
        let [a, _] = normalize_location(49.7, 0.0).unwrap().values();
        assert!(a < 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            normalize_location(f64::NAN, 0.0),
            Err(LocationError::NonFiniteInput { .. })
        ));
        assert!(normalize_location(80.0, 0.0).is_err());
    }
}
