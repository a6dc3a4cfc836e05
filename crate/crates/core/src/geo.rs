//! WGS84 points and the local equirectangular projection used for snapping,
//! heuristics and radial sorting.

use std::fmt;

use thiserror::Error;

/// Meters per degree of latitude (and of longitude at the equator).
pub const METERS_PER_DEGREE: f64 = 111_320.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeoPointError {
    #[error("latitude {0} outside [-90, 90]")]
    Latitude(f64),
    #[error("longitude {0} outside [-180, 180]")]
    Longitude(f64),
}

/// A latitude/longitude pair in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoPointError> {
        // `contains` is false for NaN, so non-finite input is rejected here too.
        if !(-90.0..=90.0).contains(&lat) {
            return Err(GeoPointError::Latitude(lat));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(GeoPointError::Longitude(lon));
        }
        Ok(Self { lat, lon })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    /// Offset `(east, north)` in meters from `self` to `other`, projecting
    /// longitude with the cosine of the pair's mean latitude.
    pub fn projected_offset(&self, other: &GeoPoint) -> (f64, f64) {
        let mean_lat = 0.5 * (self.lat + other.lat);
        let dx = (other.lon - self.lon) * METERS_PER_DEGREE * mean_lat.to_radians().cos();
        let dy = (other.lat - self.lat) * METERS_PER_DEGREE;
        (dx, dy)
    }

    pub fn projected_distance(&self, other: &GeoPoint) -> f64 {
        let (dx, dy) = self.projected_offset(other);
        dx.hypot(dy)
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}, {:.6}", self.lat, self.lon)
    }
}

/// A fixed tangent-plane frame: every point is projected with the same
/// reference latitude, so distances in the frame form a true Euclidean metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarFrame {
    origin: GeoPoint,
    lon_scale: f64,
}

impl PlanarFrame {
    pub fn new(origin: GeoPoint) -> Self {
        Self {
            origin,
            lon_scale: METERS_PER_DEGREE * origin.lat.to_radians().cos(),
        }
    }

    /// Frame centered on the arithmetic mean of `points`.
    pub fn centered_on(points: &[GeoPoint]) -> Option<Self> {
        if points.is_empty() {
            return None;
        }
        let n = points.len() as f64;
        let lat = points.iter().map(|p| p.lat).sum::<f64>() / n;
        let lon = points.iter().map(|p| p.lon).sum::<f64>() / n;
        Some(Self::new(GeoPoint { lat, lon }))
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn project(&self, p: &GeoPoint) -> [f64; 2] {
        [
            (p.lon - self.origin.lon) * self.lon_scale,
            (p.lat - self.origin.lat) * METERS_PER_DEGREE,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(GeoPoint::new(90.0, 180.0).is_ok());
        assert!(GeoPoint::new(-90.0, -180.0).is_ok());
        assert_eq!(GeoPoint::new(90.5, 0.0), Err(GeoPointError::Latitude(90.5)));
        assert_eq!(GeoPoint::new(0.0, -181.0), Err(GeoPointError::Longitude(-181.0)));
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
        assert!(GeoPoint::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn one_degree_of_latitude() {
        let a = GeoPoint::new(6.0, -75.0).unwrap();
        let b = GeoPoint::new(7.0, -75.0).unwrap();
        assert!((a.projected_distance(&b) - METERS_PER_DEGREE).abs() < 1e-6);
    }

    #[test]
    fn longitude_shrinks_with_latitude() {
        let a = GeoPoint::new(60.0, 10.0).unwrap();
        let b = GeoPoint::new(60.0, 11.0).unwrap();
        assert!((a.projected_distance(&b) - 0.5 * METERS_PER_DEGREE).abs() < 1e-6);
    }

    #[test]
    fn frame_projects_origin_to_zero() {
        let pts = [
            GeoPoint::new(6.0, -75.0).unwrap(),
            GeoPoint::new(6.2, -75.4).unwrap(),
        ];
        let frame = PlanarFrame::centered_on(&pts).unwrap();
        let [x, y] = frame.project(&frame.origin());
        assert_eq!((x, y), (0.0, 0.0));
        let [x0, y0] = frame.project(&pts[0]);
        let [x1, y1] = frame.project(&pts[1]);
        assert!((x0 + x1).abs() < 1e-6 && (y0 + y1).abs() < 1e-6);
    }
}
