//! Numeric list flags: `start:stop:step` ranges or comma-separated values.

use anyhow::{bail, Context, Result};

/// Parse `start:stop:step`. The start is always included; the stop is
/// included when a step lands on it exactly.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        bail!("expected start:stop:step, got `{s}`");
    };
    let num = |v: &str, what: &str| -> Result<f64> {
        v.trim()
            .parse::<f64>()
            .with_context(|| format!("invalid {what} `{v}` in `{s}`"))
    };
    let (start, stop, step) = (num(start, "start")?, num(stop, "stop")?, num(step, "step")?);
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        bail!("range `{s}` must be finite");
    }
    if step == 0.0 || (stop - start) * step < 0.0 {
        bail!("step {step} does not move from {start} toward {stop}");
    }
    let span = (stop - start) / step;
    let mut n = span.floor() as usize;
    // accept a stop that is hit up to rounding
    if (span - span.round()).abs() < 1e-9 {
        n = span.round() as usize;
    }
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// A range, or one or more comma-separated numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.contains(':') {
        return parse_range(s);
    }
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid number `{v}`"))
        })
        .collect()
}

/// `low:high` pair.
pub fn parse_band(s: &str) -> Result<(f64, f64)> {
    let Some((lo, hi)) = s.split_once(':') else {
        bail!("expected low:high, got `{s}`");
    };
    let lo: f64 = lo
        .trim()
        .parse()
        .with_context(|| format!("invalid low edge in `{s}`"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .with_context(|| format!("invalid high edge in `{s}`"))?;
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_stop() {
        assert_eq!(
            parse_range("-10:0:2").unwrap(),
            vec![-10.0, -8.0, -6.0, -4.0, -2.0, 0.0]
        );
        assert_eq!(parse_range("-40:20:2").unwrap().len(), 31);
        assert_eq!(parse_range("1.5:11:0.5").unwrap().len(), 20);
    }

    #[test]
    fn stop_not_hit() {
        assert_eq!(parse_range("0:5:2").unwrap(), vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn descending() {
        assert_eq!(parse_range("20:16:-2").unwrap(), vec![20.0, 18.0, 16.0]);
    }

    #[test]
    fn single_point() {
        assert_eq!(parse_range("3:3:1").unwrap(), vec![3.0]);
    }

    #[test]
    fn bad_ranges() {
        assert!(parse_range("0:10:0").is_err());
        assert!(parse_range("0:10:-1").is_err());
        assert!(parse_range("0:10").is_err());
        assert!(parse_range("a:1:1").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("4").unwrap(), vec![4.0]);
        assert_eq!(parse_list("0.1, 0.02,0.5").unwrap(), vec![0.1, 0.02, 0.5]);
        assert_eq!(parse_list("2:4:1").unwrap(), vec![2.0, 3.0, 4.0]);
        assert!(parse_list("x").is_err());
    }

    #[test]
    fn band() {
        assert_eq!(parse_band("1.8:4.8").unwrap(), (1.8, 4.8));
        assert!(parse_band("1.8").is_err());
    }
}
