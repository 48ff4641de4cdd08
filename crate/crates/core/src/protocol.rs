//! Shared protocol vocabulary: roles, message kinds, instance configuration
//! and safety verdicts, used by both state encodings.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// A round (ballot) identifier. `-1` means "no round yet"; all dispensed
/// rounds are pairwise distinct nonnegative integers.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RoundId(pub i32);

impl RoundId {
    pub const UNSET: RoundId = RoundId(-1);

    pub fn is_unset(self) -> bool {
        self.0 < 0
    }
}

impl fmt::Display for RoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The four message kinds of the protocol.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum MessageKind {
    Prepare,
    Promise,
    Accept,
    Learn,
}

/// Which safety property was violated.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    /// Two distinct values have been chosen.
    MultipleChosen,
    /// A chosen value was never proposed by any proposer.
    NotProposed,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MultipleChosen => write!(f, "multiple_chosen"),
            Violation::NotProposed => write!(f, "not_proposed"),
        }
    }
}

/// Outcome of a safety check on a single state.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Safe,
    Unsafe(Violation),
}

impl Verdict {
    pub fn is_safe(self) -> bool {
        matches!(self, Verdict::Safe)
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum ConfigError {
    #[error("num_proposers must be at least 1")]
    ZeroProposers,
    #[error("num_acceptors must be at least 1")]
    ZeroAcceptors,
    #[error("maj must be at least 1")]
    ZeroMajority,
}

/// Smallest majority bound for which the protocol is guaranteed safe:
/// the least `maj` with `maj > num_acceptors / 2`.
pub fn majority_bound(num_acceptors: u32) -> u32 {
    num_acceptors / 2 + 1
}

/// Parameters of one protocol instance. `maj` is an independent input, so
/// deliberately unsafe instances (e.g. 3 proposers, 4 acceptors, maj 2)
/// can be explored.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct ProtocolConfig {
    pub num_proposers: u32,
    pub num_acceptors: u32,
    pub maj: u32,
}

impl ProtocolConfig {
    pub fn new(num_proposers: u32, num_acceptors: u32, maj: u32) -> Result<Self, ConfigError> {
        ProtocolConfig {
            num_proposers,
            num_acceptors,
            maj,
        }
        .validate()
    }

    pub fn validate(self) -> Result<Self, ConfigError> {
        if self.num_proposers == 0 {
            return Err(ConfigError::ZeroProposers);
        }
        if self.num_acceptors == 0 {
            return Err(ConfigError::ZeroAcceptors);
        }
        if self.maj == 0 {
            return Err(ConfigError::ZeroMajority);
        }
        Ok(self)
    }

    /// True iff `maj` meets the theoretical safe bound.
    pub fn is_theoretically_safe(&self) -> bool {
        self.maj >= majority_bound(self.num_acceptors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_bound_examples() {
        assert_eq!(majority_bound(3), 2);
        assert_eq!(majority_bound(1), 1);
        assert_eq!(majority_bound(4), 3);
    }

    #[test]
    fn majority_bound_exceeds_half() {
        for a in 1..=50u32 {
            assert!(majority_bound(a) * 2 > a, "bound for {a} acceptors");
        }
    }

    #[test]
    fn validate_examples() {
        let cfg = ProtocolConfig::new(3, 4, 2).unwrap();
        assert!(!cfg.is_theoretically_safe());

        let cfg = ProtocolConfig::new(1, 1, 1).unwrap();
        assert!(cfg.is_theoretically_safe());

        let cfg = ProtocolConfig::new(2, 3, 2).unwrap();
        assert!(cfg.is_theoretically_safe());
    }

    #[test]
    fn validate_rejects_zero_fields() {
        assert_eq!(
            ProtocolConfig::new(0, 3, 2).unwrap_err(),
            ConfigError::ZeroProposers
        );
        assert_eq!(
            ProtocolConfig::new(3, 0, 2).unwrap_err(),
            ConfigError::ZeroAcceptors
        );
        assert_eq!(
            ProtocolConfig::new(3, 4, 0).unwrap_err(),
            ConfigError::ZeroMajority
        );
    }

    #[test]
    fn safe_flag_matches_bound() {
        for a in 1..=8 {
            for maj in 1..=a + 2 {
                let cfg = ProtocolConfig::new(2, a, maj).unwrap();
                assert_eq!(cfg.is_theoretically_safe(), maj >= majority_bound(a));
            }
        }
    }
}
