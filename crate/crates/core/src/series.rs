//! Event series and period lengths.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used when checking a period length against a series extent.
const EXTENT_SLACK: f64 = 1e-9;

/// A sorted sequence of event timestamps (seconds) with its temporal extent.
///
/// Numeric attributes can be aggregated per phase bin. String labels (station
/// ids and the like) are carried along for display only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSeries {
    events: Vec<f64>,
    t_start: f64,
    t_end: f64,
    #[serde(default)]
    attributes: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    labels: BTreeMap<String, Vec<String>>,
}

impl EventSeries {
    /// Builds a series from sorted timestamps and an explicit extent.
    pub fn new(events: Vec<f64>, t_start: f64, t_end: f64) -> Result<Self> {
        let series = Self {
            events,
            t_start,
            t_end,
            attributes: BTreeMap::new(),
            labels: BTreeMap::new(),
        };
        series.validate()?;
        Ok(series)
    }

    /// Builds a series whose extent is the span of the events.
    pub fn from_events(events: Vec<f64>) -> Result<Self> {
        let (lo, hi) = span(&events)?;
        Self::new(events, lo, hi)
    }

    /// Sorts the events (and every attribute column alongside) before building.
    ///
    /// When `extent` is `None` the extent is the span of the events.
    pub fn from_unsorted(
        events: Vec<f64>,
        extent: Option<(f64, f64)>,
        attributes: BTreeMap<String, Vec<f64>>,
        labels: BTreeMap<String, Vec<String>>,
    ) -> Result<Self> {
        let n = events.len();
        for (name, col) in &attributes {
            check_len(name, col.len(), n)?;
        }
        for (name, col) in &labels {
            check_len(name, col.len(), n)?;
        }
        if events.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidSeries("timestamps must be finite".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| events[a].total_cmp(&events[b]));
        let events: Vec<f64> = order.iter().map(|&i| events[i]).collect();
        let (t_start, t_end) = match extent {
            Some(e) => e,
            None => span(&events)?,
        };
        let attributes = attributes
            .into_iter()
            .map(|(k, col)| (k, order.iter().map(|&i| col[i]).collect()))
            .collect();
        let labels = labels
            .into_iter()
            .map(|(k, col)| (k, order.iter().map(|&i| col[i].clone()).collect()))
            .collect();
        let series = Self {
            events,
            t_start,
            t_end,
            attributes,
            labels,
        };
        series.validate()?;
        Ok(series)
    }

    /// Attaches a numeric attribute column.
    pub fn with_attribute(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        check_len(&name, values.len(), self.events.len())?;
        self.attributes.insert(name, values);
        Ok(self)
    }

    /// Attaches a string label column.
    pub fn with_label(mut self, name: impl Into<String>, values: Vec<String>) -> Result<Self> {
        let name = name.into();
        check_len(&name, values.len(), self.events.len())?;
        self.labels.insert(name, values);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.events.is_empty() {
            return Err(Error::InvalidSeries(
                "a series needs at least one event".into(),
            ));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite()) || self.t_start >= self.t_end {
            return Err(Error::InvalidSeries(format!(
                "extent [{}, {}] must satisfy t_start < t_end",
                self.t_start, self.t_end
            )));
        }
        if self.events.windows(2).any(|w| {
            matches!(
                w[0].partial_cmp(&w[1]),
                None | Some(std::cmp::Ordering::Greater)
            )
        }) {
            return Err(Error::InvalidSeries(
                "timestamps must be non-decreasing".into(),
            ));
        }
        let first = self.events[0];
        let last = self.events[self.events.len() - 1];
        if first < self.t_start || last > self.t_end {
            return Err(Error::InvalidSeries(format!(
                "events span [{first}, {last}] outside extent [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        for (name, col) in &self.attributes {
            check_len(name, col.len(), self.events.len())?;
        }
        for (name, col) in &self.labels {
            check_len(name, col.len(), self.events.len())?;
        }
        Ok(())
    }

    pub fn events(&self) -> &[f64] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// Always false for a validated series; provided for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn extent(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn attribute(&self, name: &str) -> Result<&[f64]> {
        self.attributes
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingAttribute(name.to_string()))
    }

    pub fn attributes(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.attributes
    }

    pub fn label(&self, name: &str) -> Option<&[String]> {
        self.labels.get(name).map(Vec::as_slice)
    }

    pub fn labels(&self) -> &BTreeMap<String, Vec<String>> {
        &self.labels
    }

    /// Checks that `tau` does not exceed the extent of this series.
    pub fn check_period(&self, tau: PeriodLength) -> Result<()> {
        let extent = self.extent();
        if tau.seconds() > extent * (1.0 + EXTENT_SLACK) {
            return Err(Error::PeriodOutOfRange {
                tau: tau.seconds(),
                lower: 0.0,
                upper: extent,
            });
        }
        Ok(())
    }
}

fn span(events: &[f64]) -> Result<(f64, f64)> {
    let lo = events.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = events.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if events.is_empty() {
        return Err(Error::InvalidSeries(
            "a series needs at least one event".into(),
        ));
    }
    Ok((lo, hi))
}

fn check_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::InvalidSeries(format!(
            "column `{name}` has {got} values for {want} events"
        )));
    }
    Ok(())
}

/// A candidate period length in seconds; always positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PeriodLength(f64);

impl PeriodLength {
    pub fn new(seconds: f64) -> Result<Self> {
        if seconds.is_finite() && seconds > 0.0 {
            Ok(Self(seconds))
        } else {
            Err(Error::InvalidPeriod(seconds))
        }
    }

    pub fn seconds(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PeriodLength {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<PeriodLength> for f64 {
    fn from(value: PeriodLength) -> Self {
        value.0
    }
}
