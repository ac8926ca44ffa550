//! Phase folding and phase-to-visual parameter assignment.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{EventSeries, PeriodLength};

/// Phase of `t` within its period, in radians in `[0, 2π)`.
///
/// The first period starts at `t_start`. Rounding can push the scaled value
/// onto `2π`; it is pulled back to the largest float below `2π`.
#[inline]
pub fn compute_phase(t: f64, tau: PeriodLength, t_start: f64) -> f64 {
    let tau = tau.seconds();
    let offset = (t - t_start).rem_euclid(tau);
    let phase = TAU * (offset / tau);
    if phase >= TAU {
        TAU.next_down()
    } else {
        phase
    }
}

/// Phases of every event of `series` for period length `tau`.
pub fn event_phases(series: &EventSeries, tau: PeriodLength) -> Vec<f64> {
    let t0 = series.t_start();
    series
        .events()
        .iter()
        .map(|&t| compute_phase(t, tau, t0))
        .collect()
}

/// How a phase is turned into a visual attribute by the renderer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingKind {
    /// Position on a cyclical color scale.
    CyclicColor,
    /// Position on a sequential color scale with a seam at `u = 0`.
    CutColor,
    /// Moon-phase glyph.
    MoonGlyph,
    /// Rectangle rotated by `u·π`, i.e. within `[0, π)`.
    RotatedRectangle,
    /// Star that morphs into a circle as `u` goes from 0 to 1.
    StarMorph,
}

impl MappingKind {
    pub const ALL: [MappingKind; 5] = [
        MappingKind::CyclicColor,
        MappingKind::CutColor,
        MappingKind::MoonGlyph,
        MappingKind::RotatedRectangle,
        MappingKind::StarMorph,
    ];

    /// Whether the mapped value at `u = 0` equals the value as `u → 1`.
    pub fn is_cyclic(self) -> bool {
        matches!(
            self,
            MappingKind::CyclicColor | MappingKind::MoonGlyph | MappingKind::RotatedRectangle
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MappingKind::CyclicColor => "cyclic-color",
            MappingKind::CutColor => "cut-color",
            MappingKind::MoonGlyph => "moon-glyph",
            MappingKind::RotatedRectangle => "rotated-rectangle",
            MappingKind::StarMorph => "star-morph",
        }
    }
}

impl fmt::Display for MappingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MappingKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        MappingKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown mapping `{s}`"))
    }
}

/// A phase mapping together with its legend offset in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMapping {
    kind: MappingKind,
    offset: f64,
}

impl PhaseMapping {
    /// Any finite offset is accepted and wrapped into `[0, 2π)`.
    pub fn new(kind: MappingKind, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::InvalidOffset(offset));
        }
        let mut offset = offset.rem_euclid(TAU);
        if offset >= TAU {
            offset = 0.0;
        }
        Ok(Self { kind, offset })
    }

    pub fn kind(&self) -> MappingKind {
        self.kind
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// The renderer parameter `u ∈ [0, 1)` for a phase.
    #[inline]
    pub fn parameter(&self, phase: f64) -> f64 {
        let u = (phase + self.offset).rem_euclid(TAU) / TAU;
        if u >= 1.0 {
            0.0
        } else {
            u
        }
    }
}

/// Per-event mapping parameters `u_j = ((φ_j + offset) mod 2π) / 2π`.
pub fn assign_phases(
    series: &EventSeries,
    tau: PeriodLength,
    mapping: &PhaseMapping,
) -> Result<Vec<f64>> {
    series.check_period(tau)?;
    let t0 = series.t_start();
    Ok(series
        .events()
        .iter()
        .map(|&t| mapping.parameter(compute_phase(t, tau, t0)))
        .collect())
}
