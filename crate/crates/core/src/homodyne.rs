//! Synthetic balanced-homodyne data.
//!
//! Each analysis bin is modeled as white Gaussian noise: at local-oscillator
//! phase `theta` the photocurrent sample is drawn with variance
//! `cos^2(theta) v1 + sin^2(theta) v2 + dark` in vacuum units. Samples come
//! from ChaCha20 with one stream per segment, so every segment can be
//! regenerated independently of the others.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::{db_to_linear, Error, GaussianState, Result, VarianceConvention};

/// Name of the sample generator, recorded in every trace.
pub const GENERATOR: &str =
    "ChaCha20 (rand_chacha 0.9, stream per segment) + StandardNormal (rand_distr 0.5)";

/// Smallest window accepted by [`sweep_trace`].
pub const MIN_WINDOW: usize = 16;
/// Largest phase change allowed inside one sweep window, radians.
pub const MAX_WINDOW_ROTATION: f64 = 0.05;
const MIN_SAMPLES: usize = 2;
const REFERENCE_STREAM: u64 = 0;

/// Simulation input.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneConfig {
    state: GaussianState,
    phase_schedule: Vec<(f64, usize)>,
    dark_noise_db: Option<f64>,
    reference_samples: usize,
    seed: u64,
}

impl HomodyneConfig {
    /// `phase_schedule` lists `(theta, sample_count)` segments.
    /// `dark_noise_db` is the detector noise relative to vacuum noise; `None`
    /// means a noiseless detector. The state is converted to vacuum units.
    pub fn new(
        state: GaussianState,
        phase_schedule: Vec<(f64, usize)>,
        dark_noise_db: Option<f64>,
        reference_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if phase_schedule.is_empty() {
            return Err(Error::EmptyInput);
        }
        for &(theta, n) in &phase_schedule {
            if !theta.is_finite() {
                return Err(Error::NonFinite("phase"));
            }
            if n < MIN_SAMPLES {
                return Err(Error::TooFewSamples {
                    required: MIN_SAMPLES,
                    found: n,
                });
            }
        }
        if reference_samples < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                required: MIN_SAMPLES,
                found: reference_samples,
            });
        }
        if let Some(db) = dark_noise_db {
            db_to_linear(db)?;
        }
        Ok(Self {
            state: state.to_convention(VarianceConvention::Unity),
            phase_schedule,
            dark_noise_db,
            reference_samples,
            seed,
        })
    }

    pub fn state(&self) -> &GaussianState {
        &self.state
    }

    pub fn phase_schedule(&self) -> &[(f64, usize)] {
        &self.phase_schedule
    }

    pub fn dark_noise_db(&self) -> Option<f64> {
        self.dark_noise_db
    }

    /// Dark-noise variance in vacuum units.
    pub fn dark_variance(&self) -> f64 {
        dark_variance(self.dark_noise_db)
    }

    pub fn reference_samples(&self) -> usize {
        self.reference_samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn dark_variance(db: Option<f64>) -> f64 {
    db.map_or(0.0, |db| libm::pow(10.0, db / 10.0))
}

/// One block of samples at a fixed phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub theta: f64,
    pub samples: Vec<f64>,
}

/// Simulation output.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneTrace {
    pub segments: Vec<Segment>,
    /// Samples with the signal blocked.
    pub vacuum_reference: Vec<f64>,
    pub seed: u64,
    pub generator: &'static str,
}

fn draw(seed: u64, stream: u64, sigma: f64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..n)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Draws the vacuum reference and every segment.
pub fn simulate(config: &HomodyneConfig) -> HomodyneTrace {
    let dark = config.dark_variance();
    let vacuum_reference = draw(
        config.seed,
        REFERENCE_STREAM,
        libm::sqrt(1.0 + dark),
        config.reference_samples,
    );
    let segments = config
        .phase_schedule
        .iter()
        .enumerate()
        .map(|(i, &(theta, n))| {
            let v = config.state.quadrature_variance(theta) + dark;
            Segment {
                theta,
                samples: draw(config.seed, i as u64 + 1, libm::sqrt(v), n),
            }
        })
        .collect();
    HomodyneTrace {
        segments,
        vacuum_reference,
        seed: config.seed,
        generator: GENERATOR,
    }
}

/// Normalized variance with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate {
    pub value: f64,
    pub std_error: f64,
}

impl VarianceEstimate {
    /// Value in dB relative to vacuum noise.
    pub fn db(&self) -> f64 {
        crate::linear_to_db(self.value)
    }
}

/// Unbiased sample variance about the sample mean.
pub fn sample_variance(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

fn variance_std_error(variance: f64, n: usize) -> f64 {
    libm::sqrt(2.0 / (n as f64 - 1.0)) * variance
}

/// Ratio of the signal variance to the vacuum-reference variance, with the
/// dark-noise variance removed from both when `dark_noise_db` is given.
pub fn estimate_variance(
    samples: &[f64],
    vacuum_reference: &[f64],
    dark_noise_db: Option<f64>,
) -> Result<VarianceEstimate> {
    for n in [samples.len(), vacuum_reference.len()] {
        if n < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                required: MIN_SAMPLES,
                found: n,
            });
        }
    }
    if let Some(db) = dark_noise_db {
        db_to_linear(db)?;
    }
    let dark = dark_variance(dark_noise_db);
    let s = sample_variance(samples);
    let r = sample_variance(vacuum_reference);
    if !(r > dark) {
        return Err(Error::UnphysicalCalibration { reference: r, dark });
    }
    let (a, b) = (s - dark, r - dark);
    let se_a = variance_std_error(s, samples.len());
    let se_b = variance_std_error(r, vacuum_reference.len());
    let value = a / b;
    let std_error = libm::hypot(se_a / b, a * se_b / (b * b));
    Ok(VarianceEstimate { value, std_error })
}

/// One window of a phase sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// Phase at the middle of the window.
    pub theta: f64,
    /// Window variance in vacuum units.
    pub estimate: VarianceEstimate,
}

/// Simulates a linear phase ramp starting at zero and returns windowed
/// variance estimates. Samples past the last full window are dropped.
pub fn sweep_trace(
    state: &GaussianState,
    rotation_rate: f64,
    total_samples: usize,
    window: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if window < MIN_WINDOW {
        return Err(Error::TooFewSamples {
            required: MIN_WINDOW,
            found: window,
        });
    }
    if !rotation_rate.is_finite() {
        return Err(Error::NonFinite("rotation rate"));
    }
    let per_window = rotation_rate.abs() * window as f64;
    if per_window >= MAX_WINDOW_ROTATION {
        return Err(Error::RotationTooFast { per_window });
    }
    if total_samples < window {
        return Err(Error::TooFewSamples {
            required: window,
            found: total_samples,
        });
    }
    let state = state.to_convention(VarianceConvention::Unity);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut buffer = Vec::with_capacity(window);
    let points = (0..total_samples / window)
        .map(|w| {
            let start = w * window;
            buffer.clear();
            buffer.extend((start..start + window).map(|k| {
                let theta = rotation_rate * k as f64;
                libm::sqrt(state.quadrature_variance(theta)) * rng.sample::<f64, _>(StandardNormal)
            }));
            let v = sample_variance(&buffer);
            SweepPoint {
                theta: rotation_rate * (start as f64 + 0.5 * (window - 1) as f64),
                estimate: VarianceEstimate {
                    value: v,
                    std_error: variance_std_error(v, window),
                },
            }
        })
        .collect();
    Ok(points)
}
