use std::fmt;
use std::str::FromStr;

use crate::error::{NweError, Result};

/// An adaptive one-measurement-per-party protocol.
///
/// Internal nodes name a party and an index into that party's allowed
/// measurement list, with one child per outcome. Leaves name the guessed
/// state (0-based).
///
/// Text form: leaves print as `[k]` with the 1-based state number, nodes as
/// `(A:m child0 child1 …)` where `A` is the party letter and `m` the
/// 0-based measurement index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolTree {
    Leaf {
        guess: usize,
    },
    Node {
        party: usize,
        measurement: usize,
        children: Vec<ProtocolTree>,
    },
}

impl ProtocolTree {
    pub fn leaf(guess: usize) -> Self {
        Self::Leaf { guess }
    }

    pub fn node(party: usize, measurement: usize, children: Vec<ProtocolTree>) -> Self {
        Self::Node {
            party,
            measurement,
            children,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::Leaf { .. } => 0,
            Self::Node { children, .. } => {
                1 + children.iter().map(|c| c.depth()).max().unwrap_or(0)
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Self::Leaf { .. } => 1,
            Self::Node { children, .. } => children.iter().map(|c| c.leaf_count()).sum(),
        }
    }

    /// Party measured at the root, if any.
    pub fn root_party(&self) -> Option<usize> {
        match self {
            Self::Leaf { .. } => None,
            Self::Node { party, .. } => Some(*party),
        }
    }

    /// Checks that no party repeats on a root-to-leaf path and that every
    /// node has `outcomes(party, measurement)` children.
    pub fn validate(
        &self,
        arity: usize,
        n_states: usize,
        outcomes: &dyn Fn(usize, usize) -> Option<usize>,
    ) -> Result<()> {
        self.validate_inner(arity, n_states, outcomes, 0)
    }

    fn validate_inner(
        &self,
        arity: usize,
        n_states: usize,
        outcomes: &dyn Fn(usize, usize) -> Option<usize>,
        used: u64,
    ) -> Result<()> {
        match self {
            Self::Leaf { guess } => {
                if *guess >= n_states {
                    return Err(NweError::MalformedTree(format!(
                        "guess {} exceeds {} states",
                        guess + 1,
                        n_states
                    )));
                }
                Ok(())
            }
            Self::Node {
                party,
                measurement,
                children,
            } => {
                if *party >= arity {
                    return Err(NweError::MalformedTree(format!(
                        "party {party} out of range for arity {arity}"
                    )));
                }
                if used & (1 << party) != 0 {
                    return Err(NweError::MalformedTree(format!(
                        "party {} measures twice on one path",
                        party_letter(*party)
                    )));
                }
                let n_out = outcomes(*party, *measurement).ok_or_else(|| {
                    NweError::MalformedTree(format!(
                        "party {} has no measurement {measurement}",
                        party_letter(*party)
                    ))
                })?;
                if children.len() != n_out {
                    return Err(NweError::MalformedTree(format!(
                        "node {}:{measurement} has {} children for {n_out} outcomes",
                        party_letter(*party),
                        children.len()
                    )));
                }
                children.iter().try_for_each(|c| {
                    c.validate_inner(arity, n_states, outcomes, used | (1 << party))
                })
            }
        }
    }
}

/// `A`, `B`, `C`, … for parties 0, 1, 2, …
pub fn party_letter(party: usize) -> char {
    (b'A' + (party % 26) as u8) as char
}

impl fmt::Display for ProtocolTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Leaf { guess } => write!(f, "[{}]", guess + 1),
            Self::Node {
                party,
                measurement,
                children,
            } => {
                write!(f, "({}:{}", party_letter(*party), measurement)?;
                for c in children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for ProtocolTree {
    type Err = NweError;

    fn from_str(s: &str) -> Result<Self> {
        let mut parser = Parser {
            bytes: s.as_bytes(),
            pos: 0,
        };
        let tree = parser.tree()?;
        parser.skip_ws();
        if parser.pos != parser.bytes.len() {
            return Err(parser.err("trailing input"));
        }
        Ok(tree)
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> NweError {
        NweError::MalformedTree(format!("{what} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        self.skip_ws();
        if self.bytes.get(self.pos) == Some(&b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", b as char)))
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err("expected a number"))
    }

    fn tree(&mut self) -> Result<ProtocolTree> {
        self.skip_ws();
        match self.bytes.get(self.pos) {
            Some(b'[') => {
                self.pos += 1;
                let k = self.number()?;
                if k == 0 {
                    return Err(self.err("state numbers are 1-based"));
                }
                self.expect(b']')?;
                Ok(ProtocolTree::leaf(k - 1))
            }
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let letter = *self
                    .bytes
                    .get(self.pos)
                    .ok_or_else(|| self.err("expected party"))?;
                if !letter.is_ascii_uppercase() {
                    return Err(self.err("expected party letter"));
                }
                self.pos += 1;
                self.expect(b':')?;
                let measurement = self.number()?;
                let mut children = Vec::new();
                loop {
                    self.skip_ws();
                    match self.bytes.get(self.pos) {
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        Some(_) => children.push(self.tree()?),
                        None => return Err(self.err("unclosed node")),
                    }
                }
                if children.is_empty() {
                    return Err(self.err("node without children"));
                }
                Ok(ProtocolTree::node(
                    (letter - b'A') as usize,
                    measurement,
                    children,
                ))
            }
            _ => Err(self.err("expected `[` or `(`")),
        }
    }
}
