//! A workbench for finite presentations of abstract elementary classes.

pub mod axioms;
pub mod cli;
pub mod construct;
pub mod dsl;
pub mod elemset;
pub mod error;
pub mod fragment;
pub mod generate;
pub mod harness;
pub mod lang;
pub mod par;
pub mod structure;
pub mod theory;
pub mod types;
pub mod unionfind;

pub use elemset::ElemSet;
pub use error::{Error, Result};
pub use lang::{Language, LanguageMorphism, LanguagePushout, SymbolKind};
pub use structure::{Embedding, FinStructure};
pub use fragment::{AecFragment, KEmbedding, StrongPair, ValidationReport, Verdict, Violation};
