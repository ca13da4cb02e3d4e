//! Structure, kernel and transforms for SL(3, F)/H with F ∈ {R, C, H}.

pub mod error;
pub mod field;
pub mod group;
pub mod lemma;
pub mod phi;
pub mod quadrature;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use field::{FieldTag, Mat3, Scalar};
pub use group::{DiagVec, ParabolicId, ParabolicSpec, RootIdx};
pub use lemma::{LemmaParams, LemmaPart};
pub use quadrature::{QuadConfig, QuadResult, ShellGrowth};
pub use transforms::{BoundForm, TestFunction, TransformResult};
pub use verify::{CheckReport, CheckSet, GridSpec, HarnessConfig, Report};
