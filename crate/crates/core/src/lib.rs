//! Numerical toolkit for the fractional p(x,·)-Laplacian with a variable,
//! distance-dependent exponent `p(x, y) = Q(|x − y|)`.

pub mod config;
pub mod error;
pub mod exponents;
pub mod field;
pub mod lemmas;
pub mod max_principles;
pub mod moving_planes;
pub mod operator;
pub mod oracle;
pub mod pipeline;
pub mod plane;
pub mod quadrature;
pub mod report;
pub mod solver;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use exponents::{ExponentSpec, QFunction, ValidationReport};
pub use field::{AnalyticField, ExteriorRule, FarField, Field, Grid, SampledFunction};
pub use operator::{eval_plap, eval_plap_field, f_power, kernel, OperatorPlan, QuadratureConfig};
pub use plane::PlaneGeometry;
