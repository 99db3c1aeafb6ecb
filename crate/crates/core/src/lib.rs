pub mod catalog;
pub mod comass;
pub mod error;
pub mod exterior;
pub mod harness;
pub mod quaternionic;
pub mod subspaces;
