use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A single chart variable: a name plus a flag marking it as a component
/// of the accumulated SNC divisor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarInfo {
    pub name: String,
    pub exceptional: bool,
}

/// An ordered list of variables shared by every value living in one chart.
///
/// Frames are immutable and cheap to clone; two frames are interchangeable
/// exactly when their variable lists (names and flags) agree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frame {
    vars: Arc<Vec<VarInfo>>,
}

impl Frame {
    pub fn new(vars: Vec<VarInfo>) -> Self {
        Frame { vars: Arc::new(vars) }
    }

    /// Builds a frame from plain names, none of them exceptional.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Self {
        Frame::new(
            names
                .iter()
                .map(|n| VarInfo { name: n.as_ref().to_string(), exceptional: false })
                .collect(),
        )
    }

    /// Builds a frame where names occurring in `exceptional` are flagged.
    pub fn with_exceptional<S: AsRef<str>>(names: &[S], exceptional: &[&str]) -> Self {
        Frame::new(
            names
                .iter()
                .map(|n| VarInfo {
                    name: n.as_ref().to_string(),
                    exceptional: exceptional.contains(&n.as_ref()),
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.vars[idx].name
    }

    pub fn is_exceptional(&self, idx: usize) -> bool {
        self.vars[idx].exceptional
    }

    pub fn exceptional_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.is_exceptional(i)).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Returns a copy of this frame with one variable flagged exceptional.
    pub fn mark_exceptional(&self, idx: usize) -> Frame {
        let mut vars = (*self.vars).clone();
        vars[idx].exceptional = true;
        Frame::new(vars)
    }

    /// Returns a copy of this frame with the variable at `idx` removed.
    pub fn without_var(&self, idx: usize) -> Frame {
        let mut vars = (*self.vars).clone();
        vars.remove(idx);
        Frame::new(vars)
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in self.vars.iter() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{}{}", v.name, if v.exceptional { "!" } else { "" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_lookup_and_flags() {
        let f = Frame::with_exceptional(&["x", "y", "z"], &["x"]);
        assert_eq!(f.dim(), 3);
        assert_eq!(f.index_of("z"), Some(2));
        assert!(f.is_exceptional(0));
        assert!(!f.is_exceptional(1));
        assert_eq!(f.exceptional_indices(), vec![0]);
    }

    #[test]
    fn equality_is_structural() {
        let a = Frame::from_names(&["x", "y"]);
        let b = Frame::from_names(&["x", "y"]);
        assert_eq!(a, b);
        let c = a.mark_exceptional(0);
        assert_ne!(a, c);
    }
}
