use crate::error::{ErrorKind, OpError};
use crate::num::Real;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

fn check<T: Real>(name: &str, v: T, limit: f64) -> Result<(), OpError> {
    let limit = T::lit(limit);
    if v >= -limit && v <= limit {
        Ok(())
    } else {
        Err(OpError::new(
            ErrorKind::Range,
            format!("{name} {v} is outside [-{limit}, {limit}]"),
        ))
    }
}

/// Great-circle distance in kilometres between two points in degrees.
pub fn haversine_km<T: Real>(lat1: T, lon1: T, lat2: T, lon2: T) -> Result<T, OpError> {
    check("latitude", lat1, 90.0)?;
    check("latitude", lat2, 90.0)?;
    check("longitude", lon1, 180.0)?;
    check("longitude", lon2, 180.0)?;
    let two = T::lit(2.0);
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let half_dphi = (phi2 - phi1) / two;
    let half_dlambda = (lon2 - lon1).to_radians() / two;
    let h = half_dphi.sin().powi(2) + phi1.cos() * phi2.cos() * half_dlambda.sin().powi(2);
    // Rounding can push h marginally past 1 for antipodal points.
    let h = h.min(T::one());
    Ok(two * T::lit(EARTH_RADIUS_KM) * h.sqrt().asin())
}
