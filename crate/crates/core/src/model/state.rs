use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const LC_LABEL: &str = "LC";
pub const RC_LABEL: &str = "RC";

/// Ordered event alphabet. The censor states are implicit: `LC` is row
/// `len()` of a transition matrix and `RC` is column `len()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new<I, L>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyStateSpace);
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || label == LC_LABEL || label == RC_LABEL {
                return Err(Error::InvalidLabel(label.clone()));
            }
            if labels[..i].contains(label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// The six provider types of the asthma case study.
    pub fn provider_types() -> Self {
        Self::new(["CL", "ER", "HO", "NP", "PO", "RX"]).expect("static labels are valid")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lc_index(&self) -> usize {
        self.labels.len()
    }

    pub fn rc_index(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    /// Label of a matrix row (`LC` for the last row).
    pub fn source_label(&self, row: usize) -> &str {
        if row == self.len() {
            LC_LABEL
        } else {
            &self.labels[row]
        }
    }

    /// Label of a matrix column (`RC` for the last column).
    pub fn dest_label(&self, col: usize) -> &str {
        if col == self.len() {
            RC_LABEL
        } else {
            &self.labels[col]
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

impl TryFrom<Vec<String>> for StateSpace {
    type Error = Error;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        Self::new(labels)
    }
}

impl From<StateSpace> for Vec<String> {
    fn from(space: StateSpace) -> Self {
        space.labels
    }
}
