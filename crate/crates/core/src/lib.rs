#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod comparison;
pub mod elliptic;
pub mod error;
pub mod graph;
pub mod linear_dtn;
pub mod nonlinear_dtn;
pub mod ode;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{EdgeKind, MetricGraph};
