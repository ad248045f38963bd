//! Transfer functions, H2 error norms and frequency-response export.

mod augmented;
mod bode;
mod error;
mod norm;
mod quadrature;
mod transfer;

pub use augmented::{build_augmented, AugmentedSystem};
pub use bode::{freq_response_export, Channel, FrequencyGrid, FrequencyTable};
pub use error::H2Error;
pub use norm::{h2_norm_gramian, h2_norm_gramian_unchecked, h2_norm_system, H2Report};
pub use quadrature::{
    h2_norm_quadrature, h2_squared_quadrature, QuadratureEstimate, QuadratureSpec,
};
pub use transfer::{transfer_eval, transfer_eval_abcd, TransferSample};
