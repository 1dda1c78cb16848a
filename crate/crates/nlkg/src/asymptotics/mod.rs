//! Oscillation variables W±, the amplitude b(y), the limit profile a(y) and
//! the logarithmic phase correction.

mod profile;
mod record;

pub use profile::{high_frequency, low_freq_profile, m_quantity, w_minus, w_plus, HighFrequency, LowFreqProfile};
pub use record::{
    amplitude_b, asymptotic_reconstruction, extract_a, phase_fit, unwrap_phase, AmplitudeB, Analysis,
    AsymptoticsRecord, LimitProfile, PhaseFit, Reconstruction, RecordBuilder, B_THRESHOLD, B_VARIATION_LIMIT,
    UNWRAP_LIMIT,
};
