use alloc::format;

use super::NonlinearitySpec;
use crate::error::{Error, Result};

/// Detector reading `r(P) = P (1 + c2 P + c3 P²)`.
///
/// A linear detector returns `power` unchanged, so negative inputs caused by
/// noise are passed through. With a nonlinear response the power must lie
/// in `[0, max_power_w]`.
pub fn detector_response(power: f64, nl: &NonlinearitySpec) -> Result<f64> {
    if nl.is_linear() {
        return Ok(power);
    }
    nl.validate()?;
    if !(power >= 0.0 && power <= nl.max_power_w) {
        return Err(Error::Domain(format!(
            "power {power} W outside the response range [0, {}] W",
            nl.max_power_w
        )));
    }
    Ok(power * (1.0 + nl.c2 * power + nl.c3 * power * power))
}

/// Inverts [`detector_response`] by safeguarded Newton iteration to `1e-12`
/// relative accuracy.
pub fn invert_response(reading: f64, nl: &NonlinearitySpec) -> Result<f64> {
    if nl.is_linear() {
        return Ok(reading);
    }
    nl.validate()?;
    let r = |p: f64| p * (1.0 + nl.c2 * p + nl.c3 * p * p);
    let (mut lo, mut hi) = (0.0, nl.max_power_w);
    if !(reading >= 0.0 && reading <= r(hi)) {
        return Err(Error::Domain(format!(
            "reading {reading} outside the invertible range [0, {}]",
            r(hi)
        )));
    }
    if reading == 0.0 {
        return Ok(0.0);
    }
    let mut p = reading.min(hi);
    for _ in 0..200 {
        let f = r(p) - reading;
        if f > 0.0 {
            hi = p;
        } else {
            lo = p;
        }
        let mut next = p - f / nl.slope(p);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - p).abs() <= 1e-13 * next.abs() {
            return Ok(next);
        }
        p = next;
    }
    Ok(p)
}
