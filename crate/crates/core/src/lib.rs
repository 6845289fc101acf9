//! Channel estimation for MIMO links whose precoders and combiners are
//! realized by microwave linear analog computers (MiLACs).
//!
//! The crate covers:
//!
//! - [`channel_model`]: exponential-correlation Kronecker channels and their
//!   eigen-domain (virtual) representation;
//! - [`milac_network`]: admittance matrices and the linear maps they realize,
//!   in both directions;
//! - [`ls_estimation`]: LS training whose estimate appears directly at the
//!   receive RF chains, plus a DFT-trained digital LS baseline;
//! - [`mmse_estimation`]: eigen-domain MMSE training, the two-layer
//!   water-filling power allocation, and the digital MMSE baseline;
//! - [`metrics`]: NMSE, PAPR and real-operation counts;
//! - [`harness`]: Monte Carlo sweeps, the invariant checker and CSV/SVG output.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod channel_model;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod ls_estimation;
pub mod metrics;
pub mod milac_network;
pub mod mmse_estimation;

pub use channel_model::{
    build_channel_model, build_exponential_correlation, eigendecompose_correlation, sample_channel,
    ChannelModel, ChannelRealization, SystemConfig,
};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use ls_estimation::{
    design_ls_training, dft_training_matrix, digital_ls_baseline, run_milac_ls,
    simulate_training_slot, TrainingBatch, TrainingSchedule,
};
pub use metrics::{complexity_report, nmse, NmseAccumulator, OpCounter, PaprReport, Scheme};
pub use milac_network::{
    admittance_for_combiner, admittance_for_precoder, combiner_from_admittance,
    precoder_from_admittance, LinearMap, MilacNetwork,
};
pub use mmse_estimation::{
    allocate_training_power, design_mmse_training, digital_mmse_baseline, run_milac_mmse,
    theoretical_mmse, PowerAllocation,
};
