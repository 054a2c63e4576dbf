//! Compiles every chapter of the guide in `book/src` as doc tests.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/estimator.md")]
pub mod estimator {}
#[doc = include_str!("../../../book/src/closed_forms.md")]
pub mod closed_forms {}
#[doc = include_str!("../../../book/src/cramer.md")]
pub mod cramer {}
#[doc = include_str!("../../../book/src/hard_instances.md")]
pub mod hard_instances {}
#[doc = include_str!("../../../book/src/convergence.md")]
pub mod convergence {}
#[doc = include_str!("../../../book/src/queueing.md")]
pub mod queueing {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
