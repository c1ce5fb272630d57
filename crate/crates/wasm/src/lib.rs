//! Browser demo bindings: interactive pulse-sequence design against a flat
//! spectral measure. Three operations are exposed to JavaScript: sequence
//! generation (UDD or uniform timings), dense filter-function sampling for
//! plotting, and a flat-measure evaluation that reports the decoupling error
//! together with the fast-control lower bound.

// Parameter checks are written `!(x > 0.0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use wasm_bindgen::prelude::*;

use ddopt::{
    bound_fast_control, chi, filter_magnitude_sq, purity_loss, tailored_udd_n, BoundParams,
    PulseSequence, QuadratureConfig, RegimeBound, SpectralMeasure,
};

fn sequence_from(times: &[f64], duration: f64) -> Result<PulseSequence, JsError> {
    PulseSequence::new(duration, times.to_vec()).map_err(|e| JsError::new(&e.to_string()))
}

/// Interior UDD pulse times `T sin^2(pi j / (2n + 2))`.
#[wasm_bindgen]
pub fn udd_times(n: usize, duration: f64) -> Result<Vec<f64>, JsError> {
    let seq = PulseSequence::udd(n, duration).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(seq.times().to_vec())
}

/// Interior times of an equidistant `n`-pulse sequence.
#[wasm_bindgen]
pub fn uniform_times(n: usize, duration: f64) -> Result<Vec<f64>, JsError> {
    if !(duration > 0.0) {
        return Err(JsError::new("duration must be positive"));
    }
    let step = duration / (n as f64 + 1.0);
    Ok((1..=n).map(|j| step * j as f64).collect())
}

/// `|f(omega)|^2` sampled on a uniform grid over `[0, omega_max]`.
#[wasm_bindgen]
pub fn filter_curve(
    times: &[f64],
    duration: f64,
    omega_max: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    if samples < 2 {
        return Err(JsError::new("need at least two samples"));
    }
    let seq = sequence_from(times, duration)?;
    Ok((0..samples)
        .map(|k| {
            let w = omega_max * k as f64 / (samples - 1) as f64;
            filter_magnitude_sq(&seq, w)
        })
        .collect())
}

/// Flat-measure evaluation of one sequence.
#[wasm_bindgen]
pub struct FlatEvaluation {
    chi: f64,
    purity_loss: f64,
    min_interval: f64,
    timing_ok: bool,
    tailored_n: usize,
    fast_bound: f64,
}

#[wasm_bindgen]
impl FlatEvaluation {
    #[wasm_bindgen(getter)]
    pub fn chi(&self) -> f64 {
        self.chi
    }
    #[wasm_bindgen(getter)]
    pub fn purity_loss(&self) -> f64 {
        self.purity_loss
    }
    #[wasm_bindgen(getter)]
    pub fn min_interval(&self) -> f64 {
        self.min_interval
    }
    #[wasm_bindgen(getter)]
    pub fn timing_ok(&self) -> bool {
        self.timing_ok
    }
    /// Bandwidth-tailored UDD pulse count for (omega_c, tau_min).
    #[wasm_bindgen(getter)]
    pub fn tailored_n(&self) -> usize {
        self.tailored_n
    }
    /// Fast-control lower bound on chi for any sequence with this minimum
    /// interval; NaN outside the fast-control regime.
    #[wasm_bindgen(getter)]
    pub fn fast_bound(&self) -> f64 {
        self.fast_bound
    }
}

/// Decoupling error of a sequence under the flat measure with cutoff
/// `omega_c`, plus the fast-control bound at the sequence's own minimum
/// interval and the timing check against `tau_min`.
#[wasm_bindgen]
pub fn evaluate_flat(
    times: &[f64],
    duration: f64,
    omega_c: f64,
    tau_min: f64,
) -> Result<FlatEvaluation, JsError> {
    let seq = sequence_from(times, duration)?;
    let measure = SpectralMeasure::flat(omega_c).map_err(|e| JsError::new(&e.to_string()))?;
    let quad = QuadratureConfig::for_cutoff(omega_c);
    let result = chi(&seq, &measure, &quad).map_err(|e| JsError::new(&e.to_string()))?;
    let min_interval = seq.min_interval();
    let bound = bound_fast_control(min_interval, omega_c, omega_c, &BoundParams::default())
        .map_err(|e| JsError::new(&e.to_string()))?;
    Ok(FlatEvaluation {
        chi: result.chi,
        purity_loss: purity_loss(result.chi),
        min_interval,
        timing_ok: seq.validate(tau_min).is_ok(),
        tailored_n: tailored_udd_n(omega_c, tau_min),
        fast_bound: match bound {
            RegimeBound::Applicable(v) => v,
            RegimeBound::NotApplicable => f64::NAN,
        },
    })
}
