//! Classification of states that cannot reduce.

use crate::syntax::{decompose, Decomposition, Name};

use super::{enabled, MachineError, MachineState};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThreadStatus {
    Value,
    /// Waiting on `get(y)` with no store at `y`.
    BlockedRead(Name),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressReport {
    pub threads: Vec<ThreadStatus>,
    pub stores: usize,
}

impl ProgressReport {
    pub fn blocked(&self) -> impl Iterator<Item = &Name> {
        self.threads.iter().filter_map(|t| match t {
            ThreadStatus::BlockedRead(y) => Some(y),
            ThreadStatus::Value => None,
        })
    }
}

/// Every thread of a stuck state must be a value or a read from an
/// address that holds no store.
pub fn classify_stuck(s: &MachineState) -> Result<ProgressReport, MachineError> {
    if !enabled(s).is_empty() {
        return Err(MachineError::NotStuck);
    }
    let p = &s.program;
    let mut threads = Vec::new();
    for (i, t) in p.threads.iter().enumerate() {
        let fail = || MachineError::ClassificationFailure { thread: i, term: t.to_string() };
        match decompose(t).map_err(|_| fail())? {
            Decomposition::Value => threads.push(ThreadStatus::Value),
            Decomposition::BlockedRead(y) => {
                if p.stores.iter().any(|st| st.addr.name == y.name) {
                    return Err(fail());
                }
                threads.push(ThreadStatus::BlockedRead(y.name));
            }
            _ => return Err(fail()),
        }
    }
    Ok(ProgressReport { threads, stores: p.stores.len() })
}
