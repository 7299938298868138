use serde::{Deserialize, Serialize};

/// Equatorial radius used for the local tangent plane (WGS84 semi-major axis).
pub const EARTH_RADIUS: f64 = 6_378_137.0;

/// Equirectangular local tangent plane anchored at a geodetic reference
/// origin, which maps to local (0, 0).
///
/// `x = R·Δλ·cos(φ_ref)`, `y = R·Δφ`. Distortion grows with distance from
/// the reference latitude: at 1° of latitude away the east-west scale error
/// is roughly `tan(φ_ref)·1.7%`, so areas much larger than a degree should be
/// split or converted with a proper geodetic library.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFrame {
    pub ref_lat: f64,
    pub ref_lon: f64,
}

impl LocalFrame {
    pub fn new(ref_lat: f64, ref_lon: f64) -> Self {
        Self { ref_lat, ref_lon }
    }

    pub fn to_local(&self, lat: f64, lon: f64) -> (f64, f64) {
        let cos_ref = self.ref_lat.to_radians().cos();
        let x = EARTH_RADIUS * (lon - self.ref_lon).to_radians() * cos_ref;
        let y = EARTH_RADIUS * (lat - self.ref_lat).to_radians();
        (x, y)
    }

    pub fn to_geodetic(&self, x: f64, y: f64) -> (f64, f64) {
        let cos_ref = self.ref_lat.to_radians().cos();
        let lat = self.ref_lat + (y / EARTH_RADIUS).to_degrees();
        let lon = self.ref_lon + (x / (EARTH_RADIUS * cos_ref)).to_degrees();
        (lat, lon)
    }

    /// Re-expresses a local point of `other`'s frame in this frame.
    pub fn from_frame(&self, other: &LocalFrame, x: f64, y: f64) -> (f64, f64) {
        let (lat, lon) = other.to_geodetic(x, y);
        self.to_local(lat, lon)
    }
}
