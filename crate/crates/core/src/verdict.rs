//! Tri-state verdicts with attached numeric evidence.

use serde::Serialize;

use crate::numerics::Convergence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Yes,
    No,
    Inconclusive,
}

/// A labelled number recorded while reaching a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub label: String,
    pub value: f64,
}

impl Checkpoint {
    pub fn new(label: impl Into<String>, value: f64) -> Self {
        Checkpoint { label: label.into(), value }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Evidence {
    pub checkpoints: Vec<Checkpoint>,
    pub notes: Vec<String>,
}

impl Evidence {
    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with(mut self, label: impl Into<String>, value: f64) -> Self {
        self.checkpoints.push(Checkpoint::new(label, value));
        self
    }

    pub fn extend(&mut self, other: Evidence) {
        self.checkpoints.extend(other.checkpoints);
        self.notes.extend(other.notes);
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.checkpoints.iter().find(|c| c.label == label).map(|c| c.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub value: Decision,
    pub evidence: Evidence,
}

impl Verdict {
    /// Yes/No verdicts carry the decisive quantity; Inconclusive ones carry
    /// at least one checkpoint.
    pub fn yes(label: impl Into<String>, decisive: f64) -> Self {
        Verdict { value: Decision::Yes, evidence: Evidence::default().with(label, decisive) }
    }

    pub fn no(label: impl Into<String>, decisive: f64) -> Self {
        Verdict { value: Decision::No, evidence: Evidence::default().with(label, decisive) }
    }

    pub fn inconclusive(label: impl Into<String>, checkpoint: f64) -> Self {
        Verdict { value: Decision::Inconclusive, evidence: Evidence::default().with(label, checkpoint) }
    }

    pub fn from_parts(value: Decision, evidence: Evidence) -> Self {
        Verdict { value, evidence }
    }

    /// Maps an integral's convergence onto a verdict. `yes_when` says which
    /// outcome means Yes.
    pub fn from_convergence(c: Convergence, yes_when: Convergence, evidence: Evidence) -> Self {
        let value = match c {
            Convergence::Inconclusive => Decision::Inconclusive,
            c if c == yes_when => Decision::Yes,
            _ => Decision::No,
        };
        Verdict { value, evidence }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.evidence.notes.push(note.into());
        self
    }

    pub fn with(mut self, label: impl Into<String>, value: f64) -> Self {
        self.evidence.checkpoints.push(Checkpoint::new(label, value));
        self
    }

    pub fn is_yes(&self) -> bool {
        self.value == Decision::Yes
    }

    pub fn is_no(&self) -> bool {
        self.value == Decision::No
    }

    pub fn is_inconclusive(&self) -> bool {
        self.value == Decision::Inconclusive
    }
}
