//! Cuts, fringe fits, stripe orientation and singles flatness.

mod cut;
mod fit;
mod marginal;
mod period;
mod tilt;

pub use cut::{analytic_cut, extract_cut, CutKind, CutProfile, CutSource, MIN_CUT_POINTS};
pub use fit::{
    fit_fringe, fit_with_envelope, FringeFit, ENVELOPE_FLOOR, MIN_PERIODS_SPANNED,
    MIN_SAMPLES_PER_PERIOD, MIN_VISIBILITY,
};
pub use marginal::{marginal_visibility, MarginalVisibility, MIN_SINGLES_PERIODS};
pub use period::{effective_frequency, predicted_period};
pub use tilt::{estimate_tilt, expected_tilt_degrees, Tilt, MIN_TILT_BINS};
