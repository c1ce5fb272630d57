//! Pulse-sequence representation, timing validation, and UDD generation.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SequenceError {
    #[error("duration must be positive, got {duration}")]
    NonPositiveDuration { duration: f64 },
    #[error("pulse times must be strictly increasing inside (0, T): violation at index {index}")]
    NonMonotone { index: usize },
    #[error("interval {index} is not positive ({value})")]
    NonPositiveInterval { index: usize, value: f64 },
    #[error("sequence file parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Report produced when a sequence violates the minimum-interval constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingViolation {
    /// Indices (0-based, into the n+1 intervals) shorter than `tau_min`.
    pub offending_intervals: Vec<usize>,
    pub min_interval: f64,
    pub tau_min: f64,
}

/// A train of instantaneous pi pulses over `[0, T]`.
///
/// Interior pulse times satisfy `0 < t_1 < ... < t_n < T`; `n = 0` is free
/// evolution. The endpoints `t_0 = 0` and `t_{n+1} = T` are implicit, so a
/// sequence of `n` pulses has `n + 1` intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    duration: f64,
    times: Vec<f64>,
}

impl PulseSequence {
    pub fn new(duration: f64, times: Vec<f64>) -> Result<Self, SequenceError> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(SequenceError::NonPositiveDuration { duration });
        }
        let mut prev = 0.0;
        for (i, &t) in times.iter().enumerate() {
            if !(t > prev) || !t.is_finite() {
                return Err(SequenceError::NonMonotone { index: i });
            }
            prev = t;
        }
        if !(prev < duration) {
            return Err(SequenceError::NonMonotone { index: times.len() });
        }
        Ok(Self { duration, times })
    }

    /// The `n = 0` sequence: no pulses, one interval of length `T`.
    pub fn free_evolution(duration: f64) -> Result<Self, SequenceError> {
        Self::new(duration, Vec::new())
    }

    /// Ideal UDD timings `t_j = T sin^2(pi j / (2n + 2))`. `n = 0` returns
    /// the free-evolution sequence.
    pub fn udd(n: usize, duration: f64) -> Result<Self, SequenceError> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(SequenceError::NonPositiveDuration { duration });
        }
        let times = (1..=n)
            .map(|j| {
                let phase = std::f64::consts::PI * j as f64 / (2 * n as u64 + 2) as f64;
                duration * phase.sin().powi(2)
            })
            .collect();
        Self::new(duration, times)
    }

    /// Rebuild a sequence from its `n + 1` inter-pulse intervals.
    pub fn from_intervals(intervals: &[f64]) -> Result<Self, SequenceError> {
        for (i, &v) in intervals.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SequenceError::NonPositiveInterval { index: i, value: v });
            }
        }
        if intervals.is_empty() {
            return Err(SequenceError::NonPositiveDuration { duration: 0.0 });
        }
        let duration: f64 = intervals.iter().sum();
        let mut times = Vec::with_capacity(intervals.len() - 1);
        let mut acc = 0.0;
        for &v in &intervals[..intervals.len() - 1] {
            acc += v;
            times.push(acc);
        }
        Self::new(duration, times)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Interior pulse times `t_1 .. t_n`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn num_pulses(&self) -> usize {
        self.times.len()
    }

    /// The `n + 1` intervals `t_{j+1} - t_j` including both endpoints.
    pub fn intervals(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.times.len() + 1);
        let mut prev = 0.0;
        for &t in &self.times {
            out.push(t - prev);
            prev = t;
        }
        out.push(self.duration - prev);
        out
    }

    /// Smallest inter-pulse interval (equals `T` for free evolution).
    pub fn min_interval(&self) -> f64 {
        self.intervals().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Check the minimum-switching-time constraint `min interval >= tau_min`,
    /// with a tolerance of `1e-9 * T` absorbing cumulative-sum roundoff.
    pub fn validate(&self, tau_min: f64) -> Result<(), TimingViolation> {
        let tol = 1e-9 * self.duration;
        let intervals = self.intervals();
        let offending: Vec<usize> = intervals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < tau_min - tol)
            .map(|(i, _)| i)
            .collect();
        if offending.is_empty() {
            Ok(())
        } else {
            Err(TimingViolation {
                offending_intervals: offending,
                min_interval: self.min_interval(),
                tau_min,
            })
        }
    }

    /// Plain-text form: `T <value>` on the first line, whitespace-separated
    /// pulse times on the second.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "T {:.17e}", self.duration).unwrap();
        let mut first = true;
        for t in &self.times {
            if !first {
                out.push(' ');
            }
            write!(out, "{t:.17e}").unwrap();
            first = false;
        }
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self, SequenceError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| SequenceError::Parse {
            line: 1,
            message: "empty file".into(),
        })?;
        let mut parts = header.split_whitespace();
        match parts.next() {
            Some("T") => {}
            _ => {
                return Err(SequenceError::Parse {
                    line: 1,
                    message: "expected header `T <duration>`".into(),
                })
            }
        }
        let duration: f64 = parts
            .next()
            .ok_or_else(|| SequenceError::Parse {
                line: 1,
                message: "missing duration value".into(),
            })?
            .parse()
            .map_err(|e| SequenceError::Parse {
                line: 1,
                message: format!("bad duration: {e}"),
            })?;
        if parts.next().is_some() {
            return Err(SequenceError::Parse {
                line: 1,
                message: "trailing tokens after duration".into(),
            });
        }
        let mut times = Vec::new();
        if let Some(body) = lines.next() {
            for tok in body.split_whitespace() {
                let t: f64 = tok.parse().map_err(|e| SequenceError::Parse {
                    line: 2,
                    message: format!("bad pulse time `{tok}`: {e}"),
                })?;
                times.push(t);
            }
        }
        if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
            return Err(SequenceError::Parse {
                line: 3,
                message: format!("unexpected extra line `{extra}`"),
            });
        }
        Self::new(duration, times)
    }
}

/// Pulse number tailored to the noise bandwidth, `n0 = 1/(e^2 omega_c tau)`
/// rounded to the nearest integer and clamped to at least one pulse.
pub fn tailored_udd_n(omega_c: f64, tau: f64) -> usize {
    let e2 = std::f64::consts::E * std::f64::consts::E;
    let raw = 1.0 / (e2 * omega_c * tau);
    (raw.round() as i64).max(1) as usize
}
