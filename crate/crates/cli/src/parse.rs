use std::f64::consts::PI;

use crate::CliError;

/// Sample sizes from `B^a..B^b` (every power in between), a comma list, or a
/// single integer.
pub fn parse_n_list(spec: &str) -> Result<Vec<usize>, CliError> {
    let spec = spec.trim();
    let bad = || CliError::Usage(format!("bad n range '{spec}': expected B^a..B^b or a comma list"));
    if let Some((lo, hi)) = spec.split_once("..") {
        let power = |s: &str| -> Result<(u64, u32), CliError> {
            let (b, e) = s.trim().split_once('^').ok_or_else(bad)?;
            Ok((b.trim().parse().map_err(|_| bad())?, e.trim().parse().map_err(|_| bad())?))
        };
        let (b0, e0) = power(lo)?;
        let (b1, e1) = power(hi)?;
        if b0 != b1 || b0 < 2 || e0 > e1 {
            return Err(bad());
        }
        return (e0..=e1)
            .map(|e| b0.checked_pow(e).and_then(|v| usize::try_from(v).ok()).ok_or_else(bad))
            .collect();
    }
    let list: Vec<usize> = spec.split(',').map(|s| s.trim().parse::<usize>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(bad());
    }
    Ok(list)
}

/// An angle as a float or in units of π: `pi`, `3pi/2`, `1.5pi`, `pi/3`.
pub fn parse_angle(spec: &str) -> Result<f64, CliError> {
    let s = spec.trim().to_lowercase().replace('π', "pi").replace(' ', "");
    let bad = || CliError::Usage(format!("bad angle '{spec}'"));
    if let Some((coef, rest)) = s.split_once("pi") {
        let c = match coef.trim_end_matches('*') {
            "" => 1.0,
            "-" => -1.0,
            v => v.parse::<f64>().map_err(|_| bad())?,
        };
        let denom = match rest {
            "" => 1.0,
            r => r.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
        };
        return Ok(c * PI / denom);
    }
    s.parse::<f64>().map_err(|_| bad())
}

/// `v` with 12 significant digits.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let e = v.abs().log10().floor() as i32;
    if (-5..12).contains(&e) {
        format!("{:.*}", (11 - e).max(0) as usize, v)
    } else {
        format!("{v:.11e}")
    }
}
