//! Google-Maps direction links: `.../maps/dir/lat,lon/lat,lon/.../`.
//!
//! Scheme and host are optional. Segments starting with `@` (viewport) or
//! `data=` are skipped; any other segment after `/dir/` must be a numeric
//! `lat,lon` pair. Query strings and fragments are not part of the path.

use thiserror::Error;

use crate::geo::GeoPoint;

pub const GMAPS_DIR_PREFIX: &str = "https://www.google.com/maps/dir/";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UrlError {
    #[error("Invalid URL! Try again")]
    InvalidUrl,
    #[error("the URL must contain at least two points, found {0}")]
    TooFewPoints(usize),
    #[error("coordinate out of range: {lat},{lon}")]
    CoordinateOutOfRange { lat: f64, lon: f64 },
}

/// Points requested by the user, in URL order.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointRequest {
    pub points: Vec<GeoPoint>,
    pub raw_url: String,
}

pub fn parse_gmaps_url(url: &str) -> Result<WaypointRequest, UrlError> {
    let raw_url = url.trim();
    let path_end = raw_url.find(['?', '#']).unwrap_or(raw_url.len());
    let path = &raw_url[..path_end];
    let (_, after_dir) = path.split_once("/dir/").ok_or(UrlError::InvalidUrl)?;

    let mut points = Vec::new();
    for segment in after_dir.split('/') {
        let segment = segment.trim();
        if segment.is_empty() || segment.starts_with('@') || segment.starts_with("data=") {
            continue;
        }
        points.push(parse_pair(segment)?);
    }
    match points.len() {
        0 => Err(UrlError::InvalidUrl),
        1 => Err(UrlError::TooFewPoints(1)),
        _ => Ok(WaypointRequest {
            points,
            raw_url: raw_url.to_string(),
        }),
    }
}

fn parse_pair(segment: &str) -> Result<GeoPoint, UrlError> {
    let (lat, lon) = segment.split_once(',').ok_or(UrlError::InvalidUrl)?;
    let number = |s: &str| -> Result<f64, UrlError> {
        let s = s.trim_matches(|c: char| c == '+' || c.is_whitespace());
        // Reject words such as "inf" or "NaN" that `f64::from_str` accepts.
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b)) {
            return Err(UrlError::InvalidUrl);
        }
        s.parse().map_err(|_| UrlError::InvalidUrl)
    };
    let (lat, lon) = (number(lat)?, number(lon)?);
    GeoPoint::new(lat, lon).map_err(|_| UrlError::CoordinateOutOfRange { lat, lon })
}

/// Direction link over `points` in order, 6 decimals each, trailing `/`.
pub fn emit_gmaps_url(points: &[GeoPoint]) -> Result<String, UrlError> {
    if points.len() < 2 {
        return Err(UrlError::TooFewPoints(points.len()));
    }
    let mut url = String::from(GMAPS_DIR_PREFIX);
    for p in points {
        url.push_str(&format!("{:.6},{:.6}/", p.lat(), p.lon()));
    }
    Ok(url)
}
