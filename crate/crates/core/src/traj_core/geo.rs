use super::GeoPoint;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Great-circle distance in meters.
pub fn haversine(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let dphi = (b.lat - a.lat).to_radians();
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Planar distance treating `(lat, lon)` as Cartesian coordinates.
pub fn euclidean(a: &GeoPoint, b: &GeoPoint) -> f64 {
    (a.lat - b.lat).hypot(a.lon - b.lon)
}

pub fn meters_per_degree_lat() -> f64 {
    EARTH_RADIUS_M.to_radians() // R * pi / 180
}

/// Local equirectangular scale at latitude `lat`.
pub fn meters_per_degree_lon(lat: f64) -> f64 {
    meters_per_degree_lat() * lat.to_radians().cos()
}
