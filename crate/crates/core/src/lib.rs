//! Exact exterior calculus over a symbolic coframe: connection and curvature
//! forms of twistor metrics, their Ricci tensors, and the ODE Ricci flow of
//! the two-parameter metric families.

pub mod coefficient;
pub mod error;
pub mod flow;
pub mod form;
pub mod frame;
pub mod matrix;
pub mod poly;
pub mod report;
pub mod round;
pub mod twistor;

pub use coefficient::{Coefficient, Var};
pub use error::{Error, Result};
pub use flow::{Family, FamilyPoint, FlowTrajectory};
pub use form::{Coframe, DerivationTable, Form, Generator, Monomial};
pub use matrix::{CoefficientMatrix, FormMatrix};
pub use report::{CheckRecord, Status, Summary, VerificationReport};
