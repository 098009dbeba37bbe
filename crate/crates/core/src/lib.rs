//! PPG-assisted delineation of seismocardiogram (SCG) systole and diastole
//! profiles.
//!
//! The pipeline estimates six fiducial points per heartbeat (IM, AO, IC, AC,
//! pAC, MO) from a chest SCG with the help of a concurrent fingertip PPG:
//!
//! 1. PPG apices are found from the sum of the detrended PPG and its maximum
//!    relative wavelet energy (MRWE) series, passed through an exponential
//!    ratio envelope ([`envelope`]).
//! 2. pAC is the SCG maximum near each PPG apex; AC and MO follow from the
//!    amplitude-histogram decision rules ([`delineator::rules`]).
//! 3. Diastoles are masked, the 20-30 Hz band of the remaining SCG yields AO,
//!    and the same decision rules give IM and IC.
//!
//! The [`analysis`] module evaluates detections and classifies normal
//! breathing against breathlessness from per-beat features; [`synth`]
//! generates SCG/PPG records with exact ground truth.

pub mod analysis;
pub mod config;
pub mod delineator;
pub mod envelope;
pub mod error;
pub mod formats;
pub mod scalogram;
pub mod signal;
pub mod synth;

pub use analysis::{DetectionReport, FeatureMatrix};
pub use delineator::{BeatAnnotation, DecisionRuleConfig, DelineatorConfig};
pub use envelope::EnvelopeModel;
pub use error::{Error, ErrorKind, Result};
pub use scalogram::{CwtMatrix, MrweSeries, Scalogram};
pub use signal::{ExtremaKind, ExtremaList, SampledSignal};
pub use synth::{BreathMode, GroundTruth, SynthConfig};
