//! The two-stage excitation protocol: a slow linear detuning sweep that
//! captures the driven dimer into the nonlinear resonance, followed by an
//! instantaneous drive switch-off that starts the Josephson oscillation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One schedule segment: detuning affine in time, drive amplitude constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub delta_start: f64,
    pub delta_end: f64,
    pub omega: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn delta_at(&self, t: f64) -> f64 {
        let dur = self.duration();
        if dur == 0.0 {
            return self.delta_start;
        }
        let frac = ((t - self.t_start) / dur).clamp(0.0, 1.0);
        self.delta_start + (self.delta_end - self.delta_start) * frac
    }
}

/// Piecewise time dependence of `(delta, omega)` with the constants
/// `(j, u, gamma)` fixed over the whole run.
///
/// Segments are contiguous and non-overlapping; evaluation is pure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSchedule {
    pub j: f64,
    pub u: f64,
    pub gamma: f64,
    segments: Vec<Segment>,
}

impl ParameterSchedule {
    /// Single linear sweep `delta_in -> delta_f`, drive on.
    ///
    /// `rate` is in tunneling periods per unit interval of detuning, so the
    /// segment lasts `(delta_f - delta_in) * rate * T` with `T = 2 pi / j`.
    pub fn sweep(
        delta_in: f64,
        delta_f: f64,
        rate: f64,
        j: f64,
        u: f64,
        gamma: f64,
        omega: f64,
    ) -> Result<Self> {
        if delta_in >= delta_f {
            return Err(Error::InvalidSchedule(format!(
                "sweep requires delta_in < delta_f, got {delta_in} >= {delta_f}"
            )));
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "sweep rate must be positive and finite, got {rate}"
            )));
        }
        if !(j > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "coupling j must be positive, got {j}"
            )));
        }
        let period = 2.0 * std::f64::consts::PI / j;
        let duration = (delta_f - delta_in) * rate * period;
        Ok(ParameterSchedule {
            j,
            u,
            gamma,
            segments: vec![Segment {
                t_start: 0.0,
                t_end: duration,
                delta_start: delta_in,
                delta_end: delta_f,
                omega,
            }],
        })
    }

    /// Appends a constant-detuning segment with the drive still on.
    pub fn with_dwell(mut self, duration: f64) -> Result<Self> {
        if duration < 0.0 {
            return Err(Error::InvalidSchedule(format!(
                "dwell duration must be non-negative, got {duration}"
            )));
        }
        if duration == 0.0 {
            return Ok(self);
        }
        let last = *self.last_segment()?;
        self.segments.push(Segment {
            t_start: last.t_end,
            t_end: last.t_end + duration,
            delta_start: last.delta_end,
            delta_end: last.delta_end,
            omega: last.omega,
        });
        Ok(self)
    }

    /// Appends the switch-off segment: drive off, detuning held at its final
    /// sweep value.
    ///
    /// Holding the detuning (instead of resetting it to zero) is observably
    /// equivalent: with the drive off the number term commutes with the free
    /// dynamics, so currents, populations and sector probabilities do not
    /// depend on the held constant. That equivalence is covered by a
    /// regression test.
    pub fn with_switch_off(self, duration: f64) -> Result<Self> {
        let last = *self.last_segment()?;
        self.with_switch_off_held_at(duration, last.delta_end)
    }

    /// Switch-off segment with an explicit held detuning value.
    pub fn with_switch_off_held_at(mut self, duration: f64, delta_hold: f64) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "switch-off duration must be positive, got {duration}"
            )));
        }
        let last = *self.last_segment()?;
        self.segments.push(Segment {
            t_start: last.t_end,
            t_end: last.t_end + duration,
            delta_start: delta_hold,
            delta_end: delta_hold,
            omega: 0.0,
        });
        Ok(self)
    }

    fn last_segment(&self) -> Result<&Segment> {
        self.segments
            .last()
            .ok_or_else(|| Error::InvalidSchedule("schedule has no segments".into()))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn tunneling_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.j
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().map(|s| s.t_end).unwrap_or(0.0)
    }

    /// Detuning at time `t` (clamped to the schedule range).
    pub fn delta_at(&self, t: f64) -> f64 {
        match self.segment_at(t) {
            Some(seg) => seg.delta_at(t),
            None => self
                .segments
                .last()
                .map(|s| s.delta_end)
                .unwrap_or(0.0),
        }
    }

    /// Drive amplitude at time `t`. The jump at switch-off is intentional;
    /// segment starts take the new value.
    pub fn omega_at(&self, t: f64) -> f64 {
        match self.segment_at(t) {
            Some(seg) => seg.omega,
            None => self.segments.last().map(|s| s.omega).unwrap_or(0.0),
        }
    }

    fn segment_at(&self, t: f64) -> Option<&Segment> {
        if t < 0.0 {
            return self.segments.first();
        }
        self.segments
            .iter()
            .find(|s| t < s.t_end || (t == s.t_end && s.t_end == self.end_time()))
    }

    /// Rejects capture-breaking sweeps whose final detuning reaches the
    /// critical value where the resonance basin closes.
    pub fn validate(&self) -> Result<()> {
        let delta_f = self
            .segments
            .iter()
            .filter(|s| s.omega != 0.0)
            .map(|s| s.delta_end)
            .last();
        if let (Some(delta_f), Some(first)) = (delta_f, self.segments.first()) {
            if self.gamma > 0.0 && first.omega != 0.0 {
                let critical = critical_detuning(self.u, first.omega, self.gamma)?;
                if delta_f >= critical {
                    return Err(Error::InvalidSchedule(format!(
                        "final detuning {delta_f} reaches the critical detuning {critical:.3e}; \
                         the resonance basin is closed and capture fails"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Critical detuning `u (omega/gamma)^2` above which the resonance basin
/// shrinks to zero and the sweep cannot capture.
pub fn critical_detuning(u: f64, omega: f64, gamma: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "critical detuning is undefined for gamma = {gamma}"
        )));
    }
    Ok(u * (omega / gamma).powi(2))
}
