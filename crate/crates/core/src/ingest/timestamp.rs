use chrono::{DateTime, SecondsFormat, Utc};

/// Numeric epoch seconds, or an ISO-8601 / RFC 3339 datetime with zone.
///
/// Anything else is rejected rather than guessed.
pub fn parse_timestamp(text: &str) -> Option<f64> {
    let text = text.trim();
    if let Ok(v) = text.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let dt = DateTime::parse_from_rfc3339(text).ok()?;
    Some(dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9)
}

/// RFC 3339 UTC formatting of epoch seconds, to nanosecond resolution.
pub fn format_timestamp(seconds: f64) -> Option<String> {
    let whole = seconds.floor();
    let nanos = ((seconds - whole) * 1e9).round();
    let (whole, nanos) = if nanos >= 1e9 {
        (whole + 1.0, 0.0)
    } else {
        (whole, nanos)
    };
    if whole.abs() > i64::MAX as f64 / 2.0 {
        return None;
    }
    let dt = DateTime::<Utc>::from_timestamp(whole as i64, nanos as u32)?;
    Some(dt.to_rfc3339_opts(SecondsFormat::AutoSi, true))
}
