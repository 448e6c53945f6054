//! Reading integrals, integral derivatives and run configuration.

mod config;
mod derivatives;
mod fcidump;

pub use config::{Estimator, RunConfig, Shots};
pub use derivatives::{
    parse_derivatives, write_derivatives, CoordinateDerivative, IntegralDerivatives,
};
pub use fcidump::{parse_fcidump, parse_fcidump_with_warnings, write_fcidump};
