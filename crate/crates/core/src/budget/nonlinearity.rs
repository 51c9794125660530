use alloc::format;

use crate::analysis::{analyze_log, group_cycles};
use crate::error::{Error, Result};
use crate::forward::{invert_response, MeasurementLog, NonlinearitySpec};

/// Maps every reading back to optical power and returns the corrected log
/// with `ΔF = ⟨F_corrected⟩ − ⟨F_raw⟩`.
///
/// Sample standard deviations are rescaled by the local inverse slope.
pub fn correct_nonlinearity(
    log: &MeasurementLog,
    nl: &NonlinearitySpec,
) -> Result<(MeasurementLog, f64)> {
    if nl.is_linear() {
        group_cycles(log)?;
        return Ok((log.clone(), 0.0));
    }
    nl.validate()?;
    let mut corrected = log.clone();
    for (index, r) in corrected.records.iter_mut().enumerate() {
        let p = invert_response(r.mean_power, nl).map_err(|e| Error::Record {
            index,
            reason: format!("cannot invert detector response: {e}"),
        })?;
        r.std_power /= nl.slope(p);
        r.mean_power = p;
    }
    let raw = analyze_log(log)?;
    let fixed = analyze_log(&corrected)?;
    Ok((corrected, fixed.mean_f - raw.mean_f))
}
