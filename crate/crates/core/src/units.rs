//! Time units used by the sampling ladder and by duration parsing.

use crate::error::{Error, Result};

pub const SECOND: f64 = 1.0;
pub const MINUTE: f64 = 60.0;
pub const HOUR: f64 = 3_600.0;
pub const DAY: f64 = 86_400.0;
/// Julian year of 365.25 days.
pub const YEAR: f64 = 365.25 * DAY;

/// Parses `"90"`, `"60s"`, `"5min"`, `"2h"`, `"13.66d"` or `"1y"` into seconds.
pub fn parse_duration(text: &str) -> Result<f64> {
    let bad = || Error::InvalidDuration(text.to_string());
    let trimmed = text.trim();
    let split = trimmed
        .find(|c: char| c.is_ascii_alphabetic())
        .unwrap_or(trimmed.len());
    let (number, unit) = trimmed.split_at(split);
    let value: f64 = number.trim().parse().map_err(|_| bad())?;
    let scale = match unit.trim() {
        "" | "s" | "sec" => SECOND,
        "m" | "min" => MINUTE,
        "h" => HOUR,
        "d" => DAY,
        "y" | "yr" => YEAR,
        _ => return Err(bad()),
    };
    let seconds = value * scale;
    if seconds.is_finite() && seconds > 0.0 {
        Ok(seconds)
    } else {
        Err(bad())
    }
}
