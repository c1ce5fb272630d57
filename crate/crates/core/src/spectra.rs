//! Spectral densities and spectral measures of the dephasing bath.
//!
//! A [`SpectralDensity`] models the bath coupling strength `I(omega)`; a
//! [`SpectralMeasure`] is the weight `lambda(omega)` that the squared filter
//! function is integrated against. Units follow the crate convention: time in
//! picoseconds, angular frequency in rad/ps, so that all magnitudes stay near
//! unity for quadrature stability.

use thiserror::Error;

use crate::quad::{quad_adaptive_panels, QuadError, QuadratureConfig};

/// Fraction of the cutoff below which the quantum `coth` kernel is replaced
/// by its Laurent expansion; the raw quotient is 0/0-prone in floating point.
const SMALL_OMEGA_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpectraError {
    #[error("frequency must be non-negative, got {omega}")]
    NegativeFrequency { omega: f64 },
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("supra-Ohmic exponent must be >= 1, got {exponent}")]
    ExponentTooSmall { exponent: f64 },
    #[error("tabulated grid needs at least two samples")]
    TableTooShort,
    #[error("tabulated grid must be strictly increasing at index {index}")]
    TableNotIncreasing { index: usize },
    #[error("tabulated values must be non-negative at index {index}")]
    TableNegativeValue { index: usize },
    #[error("inverse temperature must be positive, got {beta}")]
    NonPositiveBeta { beta: f64 },
    #[error("spectral measure vanishes inside (0, cutoff): moment integral diverges")]
    DivergentMeasure,
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
}

/// Parametric model of the bath coupling distribution `I(omega)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// `I(omega) = alpha * omega^exponent * exp(-omega^2 / omega_c^2)`.
    SupraOhmicGaussian {
        /// Coupling prefactor, ps^2 for the exciton convention.
        alpha: f64,
        /// Power-law exponent (>= 1).
        exponent: f64,
        /// Gaussian cutoff, rad/ps.
        omega_c: f64,
    },
    /// Constant `amplitude` up to a hard cutoff, zero beyond.
    FlatHardCutoff { amplitude: f64, omega_c: f64 },
    /// Piecewise-linear interpolation of `(omega, I)` samples; zero outside
    /// the sampled range.
    Tabulated { omegas: Vec<f64>, values: Vec<f64> },
}

impl SpectralDensity {
    pub fn supra_ohmic_gaussian(
        alpha: f64,
        exponent: f64,
        omega_c: f64,
    ) -> Result<Self, SpectraError> {
        if !(alpha > 0.0) {
            return Err(SpectraError::NonPositiveParameter {
                name: "alpha",
                value: alpha,
            });
        }
        if !(exponent >= 1.0) {
            return Err(SpectraError::ExponentTooSmall { exponent });
        }
        if !(omega_c > 0.0) {
            return Err(SpectraError::NonPositiveParameter {
                name: "omega_c",
                value: omega_c,
            });
        }
        Ok(Self::SupraOhmicGaussian {
            alpha,
            exponent,
            omega_c,
        })
    }

    pub fn flat_hard_cutoff(amplitude: f64, omega_c: f64) -> Result<Self, SpectraError> {
        if !(amplitude >= 0.0) {
            return Err(SpectraError::NonPositiveParameter {
                name: "amplitude",
                value: amplitude,
            });
        }
        if !(omega_c > 0.0) {
            return Err(SpectraError::NonPositiveParameter {
                name: "omega_c",
                value: omega_c,
            });
        }
        Ok(Self::FlatHardCutoff { amplitude, omega_c })
    }

    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self, SpectraError> {
        if samples.len() < 2 {
            return Err(SpectraError::TableTooShort);
        }
        if samples[0].0 < 0.0 {
            return Err(SpectraError::NegativeFrequency {
                omega: samples[0].0,
            });
        }
        for (i, pair) in samples.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(SpectraError::TableNotIncreasing { index: i + 1 });
            }
        }
        for (i, &(_, v)) in samples.iter().enumerate() {
            if !(v >= 0.0) {
                return Err(SpectraError::TableNegativeValue { index: i });
            }
        }
        Ok(Self::Tabulated {
            omegas: samples.iter().map(|&(w, _)| w).collect(),
            values: samples.iter().map(|&(_, v)| v).collect(),
        })
    }

    /// `I(omega)`; zero beyond a hard cutoff or outside the tabulated range.
    pub fn eval(&self, omega: f64) -> Result<f64, SpectraError> {
        if omega < 0.0 {
            return Err(SpectraError::NegativeFrequency { omega });
        }
        Ok(self.eval_positive(omega))
    }

    fn eval_positive(&self, omega: f64) -> f64 {
        match self {
            Self::SupraOhmicGaussian {
                alpha,
                exponent,
                omega_c,
            } => {
                let x = omega / omega_c;
                alpha * omega.powf(*exponent) * (-x * x).exp()
            }
            Self::FlatHardCutoff { amplitude, omega_c } => {
                if omega <= *omega_c {
                    *amplitude
                } else {
                    0.0
                }
            }
            Self::Tabulated { omegas, values } => interp_linear(omegas, values, omega),
        }
    }

    /// `I(omega) / omega^p` evaluated so that the `omega -> 0` limit comes
    /// out analytically instead of as 0/0.
    fn eval_over_pow(&self, omega: f64, p: i32) -> f64 {
        match self {
            Self::SupraOhmicGaussian {
                alpha,
                exponent,
                omega_c,
            } => {
                let x = omega / omega_c;
                // IEEE powf: 0^positive = 0, 0^0 = 1, 0^negative = +inf,
                // which is the analytic limit in each case.
                alpha * omega.powf(exponent - p as f64) * (-x * x).exp()
            }
            Self::FlatHardCutoff { amplitude, omega_c } => {
                if *amplitude == 0.0 || omega > *omega_c {
                    0.0
                } else if omega == 0.0 {
                    f64::INFINITY
                } else {
                    amplitude / omega.powi(p)
                }
            }
            Self::Tabulated { omegas, values } => {
                if omega > 0.0 {
                    interp_linear(omegas, values, omega) / omega.powi(p)
                } else {
                    // Limit from the leading linear behavior of the table.
                    let v0 = interp_linear(omegas, values, 0.0);
                    if v0 > 0.0 {
                        f64::INFINITY
                    } else {
                        let slope = leading_slope(omegas, values);
                        match (p, slope > 0.0) {
                            (1, _) => slope,
                            (_, true) => f64::INFINITY,
                            (_, false) => 0.0,
                        }
                    }
                }
            }
        }
    }

    /// Cutoff frequency associated with the model (last sample for tables).
    pub fn cutoff(&self) -> f64 {
        match self {
            Self::SupraOhmicGaussian { omega_c, .. } => *omega_c,
            Self::FlatHardCutoff { omega_c, .. } => *omega_c,
            Self::Tabulated { omegas, .. } => *omegas.last().expect("validated table"),
        }
    }

    /// The same model with its cutoff scaled by `ratio` (tables stretch
    /// their frequency axis). Models an actual bath whose bandwidth differs
    /// from the presumed one.
    pub fn with_scaled_cutoff(&self, ratio: f64) -> Result<Self, SpectraError> {
        if !(ratio > 0.0) {
            return Err(SpectraError::NonPositiveParameter {
                name: "ratio",
                value: ratio,
            });
        }
        Ok(match self {
            Self::SupraOhmicGaussian {
                alpha,
                exponent,
                omega_c,
            } => Self::SupraOhmicGaussian {
                alpha: *alpha,
                exponent: *exponent,
                omega_c: omega_c * ratio,
            },
            Self::FlatHardCutoff { amplitude, omega_c } => Self::FlatHardCutoff {
                amplitude: *amplitude,
                omega_c: omega_c * ratio,
            },
            Self::Tabulated { omegas, values } => Self::Tabulated {
                omegas: omegas.iter().map(|w| w * ratio).collect(),
                values: values.clone(),
            },
        })
    }

    /// Frequency beyond which the model is identically zero, if any.
    fn support_end(&self) -> f64 {
        match self {
            Self::SupraOhmicGaussian { .. } => f64::INFINITY,
            Self::FlatHardCutoff { omega_c, .. } => *omega_c,
            Self::Tabulated { omegas, .. } => *omegas.last().expect("validated table"),
        }
    }
}

fn interp_linear(omegas: &[f64], values: &[f64], omega: f64) -> f64 {
    let first = omegas[0];
    let last = *omegas.last().unwrap();
    if omega < first || omega > last {
        return 0.0;
    }
    let idx = match omegas.binary_search_by(|probe| probe.total_cmp(&omega)) {
        Ok(i) => return values[i],
        Err(i) => i,
    };
    // idx is the first grid point above omega; idx >= 1 here because
    // omega >= first was handled above.
    let (w0, w1) = (omegas[idx - 1], omegas[idx]);
    let (v0, v1) = (values[idx - 1], values[idx]);
    v0 + (v1 - v0) * (omega - w0) / (w1 - w0)
}

fn leading_slope(omegas: &[f64], values: &[f64]) -> f64 {
    if omegas[0] > 0.0 {
        // The table starts above zero; the density is zero below it.
        0.0
    } else {
        (values[1] - values[0]) / (omegas[1] - omegas[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
enum MeasureKind {
    /// Thermal bosonic bath: `lambda = 2 coth(beta omega / 2) I(omega) / omega^2`.
    Quantum { density: SpectralDensity, beta: f64 },
    /// Classical Gaussian noise: `lambda = S(omega) / (2 pi omega^2)`.
    Classical { power_spectrum: SpectralDensity },
    /// Indicator weight: 1 up to the cutoff, 0 beyond.
    Flat,
}

/// The weight `lambda(omega)` entering the decoupling error integral.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    kind: MeasureKind,
    cutoff: f64,
}

impl SpectralMeasure {
    /// Thermal bath measure from a spectral density and inverse temperature
    /// `beta` in time units (`hbar / (k_B T)` in ps).
    pub fn quantum(density: SpectralDensity, beta: f64) -> Result<Self, SpectraError> {
        if !(beta > 0.0) {
            return Err(SpectraError::NonPositiveBeta { beta });
        }
        let cutoff = density.cutoff();
        Ok(Self {
            kind: MeasureKind::Quantum { density, beta },
            cutoff,
        })
    }

    /// Classical-noise measure from a power spectrum `S(omega)`.
    pub fn classical(power_spectrum: SpectralDensity) -> Self {
        let cutoff = power_spectrum.cutoff();
        Self {
            kind: MeasureKind::Classical { power_spectrum },
            cutoff,
        }
    }

    /// Flat measure: `lambda = 1` below `omega_c`, 0 beyond.
    pub fn flat(omega_c: f64) -> Result<Self, SpectraError> {
        if !(omega_c > 0.0) {
            return Err(SpectraError::NonPositiveParameter {
                name: "omega_c",
                value: omega_c,
            });
        }
        Ok(Self {
            kind: MeasureKind::Flat,
            cutoff: omega_c,
        })
    }

    /// Override the cutoff used by bounds and L1 integrals.
    pub fn with_cutoff(mut self, omega_c: f64) -> Result<Self, SpectraError> {
        if !(omega_c > 0.0) {
            return Err(SpectraError::NonPositiveParameter {
                name: "omega_c",
                value: omega_c,
            });
        }
        self.cutoff = omega_c;
        Ok(self)
    }

    /// The same measure with its bandwidth scaled by `ratio`: the underlying
    /// model stretches its frequency axis and the cutoff follows.
    pub fn with_scaled_cutoff(&self, ratio: f64) -> Result<Self, SpectraError> {
        if !(ratio > 0.0) {
            return Err(SpectraError::NonPositiveParameter {
                name: "ratio",
                value: ratio,
            });
        }
        let kind = match &self.kind {
            MeasureKind::Flat => MeasureKind::Flat,
            MeasureKind::Quantum { density, beta } => MeasureKind::Quantum {
                density: density.with_scaled_cutoff(ratio)?,
                beta: *beta,
            },
            MeasureKind::Classical { power_spectrum } => MeasureKind::Classical {
                power_spectrum: power_spectrum.with_scaled_cutoff(ratio)?,
            },
        };
        Ok(Self {
            kind,
            cutoff: self.cutoff * ratio,
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, MeasureKind::Flat)
    }

    /// `lambda(omega)` for `omega >= 0`.
    pub fn eval(&self, omega: f64) -> Result<f64, SpectraError> {
        if omega < 0.0 {
            return Err(SpectraError::NegativeFrequency { omega });
        }
        Ok(self.lambda(omega))
    }

    pub(crate) fn lambda(&self, omega: f64) -> f64 {
        let switch = SMALL_OMEGA_FRACTION * self.cutoff;
        match &self.kind {
            MeasureKind::Flat => {
                // Closed at the cutoff so that quadrature nodes landing
                // exactly on omega_c see the smooth one-sided limit.
                if omega <= self.cutoff {
                    1.0
                } else {
                    0.0
                }
            }
            MeasureKind::Quantum { density, beta } => {
                if omega < switch {
                    // coth(x) = 1/x + x/3 + O(x^3) with x = beta omega / 2:
                    // lambda = 4/beta * I/omega^3 + beta/3 * I/omega.
                    4.0 / beta * density.eval_over_pow(omega, 3)
                        + beta / 3.0 * density.eval_over_pow(omega, 1)
                } else {
                    let x = 0.5 * beta * omega;
                    let coth = 1.0 / x.tanh();
                    2.0 * coth * density.eval_positive(omega) / (omega * omega)
                }
            }
            MeasureKind::Classical { power_spectrum } => {
                let two_pi = 2.0 * std::f64::consts::PI;
                if omega < switch {
                    power_spectrum.eval_over_pow(omega, 2) / two_pi
                } else {
                    power_spectrum.eval_positive(omega) / (two_pi * omega * omega)
                }
            }
        }
    }

    /// Last frequency that can contribute to integrals of `lambda`.
    pub(crate) fn support_end(&self) -> f64 {
        match &self.kind {
            MeasureKind::Flat => self.cutoff,
            MeasureKind::Quantum { density, .. } => density.support_end(),
            MeasureKind::Classical { power_spectrum } => power_spectrum.support_end(),
        }
    }

    /// Effective upper limit for truncated integrals of `lambda`.
    pub(crate) fn upper_limit(&self, quad: &QuadratureConfig) -> f64 {
        self.support_end().min(quad.omega_inf)
    }
}

/// `M = integral of 1/lambda over [0, cutoff]`, the moment entering the
/// Cauchy-inequality lower bound. Errors with [`SpectraError::DivergentMeasure`]
/// when `lambda` vanishes inside the window.
pub fn measure_capital_m(
    m: &SpectralMeasure,
    quad: &QuadratureConfig,
) -> Result<f64, SpectraError> {
    let hi = m.cutoff();
    let r = quad_adaptive_panels(|w| 1.0 / m.lambda(w), 0.0, hi, 16, quad);
    match r {
        Ok(res) => Ok(res.value),
        Err(QuadError::NonFinite { .. }) => Err(SpectraError::DivergentMeasure),
        Err(e) => Err(e.into()),
    }
}

/// `m = integral of lambda over [0, omega_inf]` (truncated at the support
/// end when the measure has one), the moment entering the trivial upper bound.
pub fn measure_small_m(m: &SpectralMeasure, quad: &QuadratureConfig) -> Result<f64, SpectraError> {
    let hi = m.upper_limit(quad);
    let r = quad_adaptive_panels(|w| m.lambda(w), 0.0, hi, 16, quad)?;
    Ok(r.value)
}
