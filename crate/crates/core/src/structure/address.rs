use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Atom address of the form `B6.ALA.CB`, `B6.CB` or `B6 CB`: chain id,
/// residue number, optional residue name, atom name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomAddress {
    pub chain: char,
    pub seq: i32,
    pub name: String,
}

impl AtomAddress {
    pub fn new(chain: char, seq: i32, name: &str) -> Self {
        Self {
            chain,
            seq,
            name: name.to_string(),
        }
    }
}

impl fmt::Display for AtomAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}.{}", self.chain, self.seq, self.name)
    }
}

impl FromStr for AtomAddress {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Argument(format!("malformed atom address {s:?}"));
        let parts: Vec<&str> = s
            .split(|c: char| c == '.' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .collect();
        let (head, name) = match parts.as_slice() {
            [head, name] => (*head, *name),
            [head, _resname, name] => (*head, *name),
            _ => return Err(bad()),
        };
        let mut chars = head.chars();
        let chain = chars.next().ok_or_else(bad)?;
        if !chain.is_ascii_alphanumeric() {
            return Err(bad());
        }
        let seq: i32 = chars.as_str().parse().map_err(|_| bad())?;
        if name.is_empty() || name.len() > 4 {
            return Err(bad());
        }
        Ok(Self::new(chain, seq, name))
    }
}

impl Serialize for AtomAddress {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AtomAddress {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_three_forms() {
        let want = AtomAddress::new('B', 6, "CB");
        assert_eq!("B6.ALA.CB".parse::<AtomAddress>().unwrap(), want);
        assert_eq!("B6.CB".parse::<AtomAddress>().unwrap(), want);
        assert_eq!("B6 CB".parse::<AtomAddress>().unwrap(), want);
        assert_eq!(want.to_string(), "B6.CB");
    }

    #[test]
    fn negative_residue_numbers() {
        let a: AtomAddress = "A-3.CA".parse().unwrap();
        assert_eq!(a.seq, -3);
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "B", "B.CB", "6.CB", "Bx.CB", "B6.ALA.CB.X", "B6.TOOLONG"] {
            assert!(s.parse::<AtomAddress>().is_err(), "{s}");
        }
    }
}
