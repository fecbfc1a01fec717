//! Published parameter sets and reference values for the 1064 nm OPO
//! squeezed-light source, with where each number comes from.

use crate::spectrum::{CavityGeometry, SpectrumModel, SPEED_OF_LIGHT};

/// Squeezed/anti-squeezed variance pairs in dB measured at 5 MHz for pump
/// powers of 30, 150 and 600 mW (dark noise included).
pub const MEASURED_PAIRS_DB: [(f64, f64); 3] = [(-2.9, 2.9), (-6.2, 6.7), (-11.5, 16.0)];

/// States used for the published Fock-basis matrices. The first replaces
/// (-2.9, 2.9) by a 3.05 dB pure state after 4.8 % loss.
pub const MATRIX_STATES_DB: [(f64, f64); 3] = [(-2.84, 2.94), (-6.2, 6.7), (-11.5, 16.0)];

/// Published vacuum admixture `1 - eta * gamma` and its uncertainty.
pub const VACUUM_ADMIXTURE: (f64, f64) = (0.048, 0.002);

/// Fitted pump power relative to threshold.
pub const PUMP_RATIO: f64 = 0.535;
/// Fitted total efficiency `eta * gamma`.
pub const ETA_GAMMA: f64 = 0.952;
/// Output coupler power transmittance.
pub const TRANSMITTANCE: f64 = 0.12;
/// Intra-cavity round-trip loss.
pub const ROUND_TRIP_LOSS: f64 = 0.001;
/// Cavity decay rate in rad/s. Not published: back-solved so that the
/// squeezing bandwidth `kappa (1 + sqrt(p)) / (4 pi)` comes out near 170 MHz.
pub const KAPPA: f64 = 1.25e9;
/// Round-trip optical length in metres implied by [`KAPPA`],
/// `(T + L) c / kappa`, about 29 mm.
pub const ROUND_TRIP_LENGTH: f64 = (TRANSMITTANCE + ROUND_TRIP_LOSS) * SPEED_OF_LIGHT / KAPPA;

/// Half free spectral range of the OPO cavity in Hz.
pub const HALF_FSR: f64 = 5.5e9;
/// Width of the spectral bins used to integrate the photon rate, in Hz.
pub const BIN_WIDTH: f64 = 1e5;

/// Reported squeezing bandwidth (HWHM) in Hz.
pub const SQUEEZING_BANDWIDTH: f64 = 170e6;
/// Reported squeezed variance at the bandwidth frequency, in dB.
pub const HALF_POINT_DB: f64 = -2.7;
/// Reported rate of down-converted photons per second in one cavity mode.
pub const PHOTON_RATE: f64 = 2.79e8;
/// Reported optical power of that photon flux, in watts.
pub const PHOTON_POWER: f64 = 52e-12;
/// Reported mean photon number given at least one photon.
pub const CONDITIONAL_MEAN: f64 = 5.93;

/// OPO spectrum model with the fitted parameters and back-solved cavity
/// length.
pub fn spectrum_model() -> SpectrumModel {
    SpectrumModel::with_cavity(
        PUMP_RATIO,
        ETA_GAMMA,
        CavityGeometry {
            transmittance: TRANSMITTANCE,
            round_trip_loss: ROUND_TRIP_LOSS,
            round_trip_length: ROUND_TRIP_LENGTH,
        },
    )
    .expect("preset parameters are valid")
}

/// Printed Fock-basis matrices (photon numbers 0..=10, four decimals) for the
/// states in [`MATRIX_STATES_DB`], in the same order.
pub const MATRICES: [[[f64; 11]; 11]; 3] = [
    [
        [
            0.9416, 0.0, -0.2137, 0.0, 0.0594, 0.0, -0.0174, 0.0, 0.0052, 0.0, -0.0016,
        ],
        [
            0.0, 0.0049, 0.0, -0.0019, 0.0, 0.0007, 0.0, -0.0002, 0.0, 0.0001, 0.0,
        ],
        [
            -0.2137, 0.0, 0.0485, 0.0, -0.0135, 0.0, 0.0040, 0.0, -0.0012, 0.0, 0.0004,
        ],
        [
            0.0, -0.0019, 0.0, 0.0008, 0.0, -0.0003, 0.0, 0.0001, 0.0, 0.0, 0.0,
        ],
        [
            0.0594, 0.0, -0.0135, 0.0, 0.0038, 0.0, -0.0011, 0.0, 0.0003, 0.0, -0.0001,
        ],
        [
            0.0, 0.0007, 0.0, -0.0003, 0.0, 0.0001, 0.0, 0.0, 0.0, 0.0, 0.0,
        ],
        [
            -0.0174, 0.0, 0.0040, 0.0, -0.0011, 0.0, 0.0003, 0.0, -0.0001, 0.0, 0.0,
        ],
        [0.0, -0.0002, 0.0, 0.0001, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [
            0.0052, 0.0, -0.0012, 0.0, 0.0003, 0.0, -0.0001, 0.0, 0.0, 0.0, 0.0,
        ],
        [0.0, 0.0001, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [
            -0.0016, 0.0, 0.0004, 0.0, -0.0001, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ],
    ],
    [
        [
            0.7538, 0.0, -0.3360, 0.0, 0.1834, 0.0, -0.1056, 0.0, 0.0622, 0.0, -0.0372,
        ],
        [
            0.0, 0.0131, 0.0, -0.0101, 0.0, 0.0071, 0.0, -0.0048, 0.0, 0.0032, 0.0,
        ],
        [
            -0.3360, 0.0, 0.1500, 0.0, -0.0820, 0.0, 0.0473, 0.0, -0.0279, 0.0, 0.0167,
        ],
        [
            0.0, -0.0101, 0.0, 0.0078, 0.0, -0.0055, 0.0, 0.0037, 0.0, -0.0025, 0.0,
        ],
        [
            0.1834, 0.0, -0.0820, 0.0, 0.0449, 0.0, -0.0259, 0.0, 0.0153, 0.0, -0.0092,
        ],
        [
            0.0, 0.0071, 0.0, -0.0055, 0.0, 0.0039, 0.0, -0.0026, 0.0, 0.0018, 0.0,
        ],
        [
            -0.1056, 0.0, 0.0473, 0.0, -0.0259, 0.0, 0.0150, 0.0, -0.0089, 0.0, 0.0053,
        ],
        [
            0.0, -0.0048, 0.0, 0.0037, 0.0, -0.0026, 0.0, 0.0018, 0.0, -0.0012, 0.0,
        ],
        [
            0.0622, 0.0, -0.0279, 0.0, 0.0153, 0.0, -0.0089, 0.0, 0.0053, 0.0, -0.0032,
        ],
        [
            0.0, 0.0032, 0.0, -0.0025, 0.0, 0.0018, 0.0, -0.0012, 0.0, 0.0008, 0.0,
        ],
        [
            -0.0372, 0.0, 0.0167, 0.0, -0.0092, 0.0, 0.0053, 0.0, -0.0032, 0.0, 0.0019,
        ],
    ],
    [
        [
            0.3026, 0.0, -0.1946, 0.0, 0.1532, 0.0, -0.1272, 0.0, 0.1082, 0.0, -0.0933,
        ],
        [
            0.0, 0.0126, 0.0, -0.0140, 0.0, 0.0143, 0.0, -0.0140, 0.0, 0.0135, 0.0,
        ],
        [
            -0.1946, 0.0, 0.1256, 0.0, -0.0993, 0.0, 0.0828, 0.0, -0.0707, 0.0, 0.0613,
        ],
        [
            0.0, -0.0140, 0.0, 0.0156, 0.0, -0.0159, 0.0, 0.0157, 0.0, -0.0151, 0.0,
        ],
        [
            0.1532, 0.0, -0.0993, 0.0, 0.0789, 0.0, -0.0660, 0.0, 0.0566, 0.0, -0.0493,
        ],
        [
            0.0, 0.0143, 0.0, -0.0159, 0.0, 0.0162, 0.0, -0.0160, 0.0, 0.0155, 0.0,
        ],
        [
            -0.1272, 0.0, 0.0828, 0.0, -0.0660, 0.0, 0.0555, 0.0, -0.0478, 0.0, 0.0417,
        ],
        [
            0.0, -0.0140, 0.0, 0.0157, 0.0, -0.0160, 0.0, 0.0158, 0.0, -0.0153, 0.0,
        ],
        [
            0.1082, 0.0, -0.0707, 0.0, 0.0566, 0.0, -0.0478, 0.0, 0.0413, 0.0, -0.0362,
        ],
        [
            0.0, 0.0135, 0.0, -0.0151, 0.0, 0.0155, 0.0, -0.0153, 0.0, 0.0148, 0.0,
        ],
        [
            -0.0933, 0.0, 0.0613, 0.0, -0.0493, 0.0, 0.0417, 0.0, -0.0362, 0.0, 0.0318,
        ],
    ],
];
