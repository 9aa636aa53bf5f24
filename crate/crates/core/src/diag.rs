//! Diagnostics sink shared by the pipeline stages.
//!
//! Warnings never abort processing; they are collected here and the caller
//! decides where to print them (the CLI writes them to stderr).

/// Collects non-fatal warnings raised while parsing, building or ranking.
#[derive(Debug, Default)]
pub struct Diagnostics {
    warnings: Vec<String>,
}

impl Diagnostics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_empty(&self) -> bool {
        self.warnings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.warnings.len()
    }
}
