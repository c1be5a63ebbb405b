//! Statistical convergence of order α, λ-statistical convergence of order α
//! and strong Cesàro / de la Vallée-Poussin summability of order α for real
//! sequences in partial metric spaces.
//!
//! Every notion is a statement about the limit of a finite-n *defect*
//! (an exceedance count or a deviation sum scaled by `n^α` or `λ_n^α`).
//! The [`analysis`] module evaluates those defects exactly on index grids and
//! turns the resulting traces into verdicts; [`theorems`] checks the
//! inclusion results between the sequence classes, both as exact finite-n
//! inequalities and as verdict-level implications.

pub mod analysis;
pub mod error;
pub mod lambda;
pub mod partial_metric;
pub mod sequences;
pub mod theorems;

pub use analysis::{Decision, DefectTrace, Functional, Verdict};
pub use error::{Error, Result};
pub use lambda::{LambdaSeq, LambdaSpec, WindowStat};
pub use partial_metric::{AxiomReport, PartialMetricSpec};
pub use sequences::{SequenceKind, SequenceSpec};
