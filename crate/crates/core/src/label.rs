use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Ground-truth class of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Bonafide,
    Spoof,
}

impl Label {
    /// SVM target: bona fide `+1`, spoof `-1`.
    pub fn sign(self) -> f64 {
        match self {
            Label::Bonafide => 1.0,
            Label::Spoof => -1.0,
        }
    }

    pub fn is_spoof(self) -> bool {
        self == Label::Spoof
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Bonafide => "bonafide",
            Label::Spoof => "spoof",
        }
    }

    pub fn swapped(self) -> Label {
        match self {
            Label::Bonafide => Label::Spoof,
            Label::Spoof => Label::Bonafide,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bonafide" => Ok(Label::Bonafide),
            "spoof" => Ok(Label::Spoof),
            other => Err(Error::InvalidInput(format!(
                "unknown label {other:?} (expected bonafide or spoof)"
            ))),
        }
    }
}

/// Returns `Ok` when both classes occur in `labels`.
pub fn require_both_classes(labels: &[Label], context: &str) -> crate::Result<()> {
    let spoof = labels.iter().filter(|l| l.is_spoof()).count();
    if spoof == 0 || spoof == labels.len() {
        return Err(Error::SingleClass(context.to_string()));
    }
    Ok(())
}
