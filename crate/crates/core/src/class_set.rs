//! Unions of step classes containing the class of 0, stored as a bitset over
//! the ascending divisor order.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::zm_arith::Modulus;

#[derive(Clone)]
pub struct ClassSet {
    modulus: Arc<Modulus>,
    words: Vec<u64>,
}

impl PartialEq for ClassSet {
    fn eq(&self, other: &Self) -> bool {
        self.modulus.value() == other.modulus.value() && self.words == other.words
    }
}

impl Eq for ClassSet {}

impl Hash for ClassSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.modulus.value().hash(state);
        self.words.hash(state);
    }
}

impl fmt::Debug for ClassSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ClassSet(M={}, {:?})",
            self.modulus.value(),
            self.members()
        )
    }
}

fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

impl ClassSet {
    /// `members` must all divide `M` and must include `M` itself.
    pub fn new(modulus: Arc<Modulus>, members: &[u64]) -> Result<Self> {
        let mut words = vec![0u64; word_count(modulus.divisor_count())];
        for &m in members {
            let i = modulus.index_of(m).ok_or_else(|| {
                Error::invalid(format!("{m} does not divide {}", modulus.value()))
            })?;
            words[i / 64] |= 1 << (i % 64);
        }
        let set = ClassSet { modulus, words };
        ensure!(
            set.contains_index(set.modulus.top_index()),
            "class set must contain the class of 0 (divisor {})",
            set.modulus.value()
        );
        Ok(set)
    }

    /// Builds from membership flags in divisor order; the flag for `M` is forced on.
    pub fn from_flags(modulus: Arc<Modulus>, flags: impl IntoIterator<Item = bool>) -> Self {
        let mut words = vec![0u64; word_count(modulus.divisor_count())];
        for (i, f) in flags.into_iter().enumerate().take(modulus.divisor_count()) {
            if f {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        let top = modulus.top_index();
        words[top / 64] |= 1 << (top % 64);
        ClassSet { modulus, words }
    }

    /// `{M}`: only the class of 0.
    pub fn zero_only(modulus: Arc<Modulus>) -> Self {
        Self::from_flags(modulus, std::iter::empty())
    }

    /// Every class.
    pub fn full(modulus: Arc<Modulus>) -> Self {
        let n = modulus.divisor_count();
        Self::from_flags(modulus, std::iter::repeat_n(true, n))
    }

    pub fn modulus(&self) -> &Arc<Modulus> {
        &self.modulus
    }

    #[inline]
    pub fn contains_index(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn contains(&self, m: u64) -> bool {
        self.modulus
            .index_of(m)
            .is_some_and(|i| self.contains_index(i))
    }

    pub fn members(&self) -> Vec<u64> {
        self.member_indices()
            .map(|i| self.modulus.divisors()[i])
            .collect()
    }

    pub fn member_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.modulus.divisor_count()).filter(|&i| self.contains_index(i))
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The standard complement: classes outside `self`, plus the class of 0.
    pub fn standard_complement(&self) -> ClassSet {
        let n = self.modulus.divisor_count();
        ClassSet::from_flags(
            self.modulus.clone(),
            (0..n).map(|i| !self.contains_index(i)),
        )
    }

    /// True if `x - y` lies in a member class (the adjacency of the Cayley graph).
    pub fn contains_residue(&self, z: u64) -> bool {
        self.contains_index(self.modulus.class_index_of(z))
    }

    /// Hex bitmask, bit `i` set iff the `i`-th smallest divisor is a member.
    pub fn to_hex(&self) -> String {
        let mut s = String::from("0x");
        let mut started = false;
        for w in self.words.iter().rev() {
            if started {
                s.push_str(&format!("{w:016x}"));
            } else if *w != 0 {
                s.push_str(&format!("{w:x}"));
                started = true;
            }
        }
        s
    }

    pub fn from_hex(modulus: Arc<Modulus>, hex: &str) -> Result<Self> {
        let digits = hex
            .trim()
            .strip_prefix("0x")
            .or_else(|| hex.trim().strip_prefix("0X"))
            .unwrap_or(hex.trim());
        ensure!(!digits.is_empty(), "empty hex bitmask");
        let n = modulus.divisor_count();
        let mut words = vec![0u64; word_count(n)];
        for (pos, c) in digits.chars().rev().enumerate() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::invalid(format!("bad hex digit {c:?} in {hex:?}")))?
                as u64;
            for b in 0..4 {
                if v >> b & 1 == 1 {
                    let bit = pos * 4 + b;
                    ensure!(bit < n, "bitmask {hex} has bits beyond {n} divisors");
                    words[bit / 64] |= 1 << (bit % 64);
                }
            }
        }
        let top = modulus.top_index();
        let set = ClassSet { modulus, words };
        ensure!(
            set.contains_index(top),
            "bitmask {hex} omits the class of 0"
        );
        Ok(set)
    }

    /// Low 64 bits of the mask; exact when `M` has at most 64 divisors.
    pub fn mask_u64(&self) -> u64 {
        self.words[0]
    }

    /// Parses a comma-separated divisor list or a `0x` hex bitmask.
    pub fn parse(modulus: Arc<Modulus>, spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.starts_with("0x") || spec.starts_with("0X") {
            return Self::from_hex(modulus, spec);
        }
        let mut members = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            members.push(
                part.parse::<u64>()
                    .map_err(|_| Error::invalid(format!("bad divisor {part:?}")))?,
            );
        }
        Self::new(modulus, &members)
    }

    /// Comma-separated divisor list, the other accepted input form.
    pub fn to_list_string(&self) -> String {
        self.members()
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// JSON form: `{"M": int, "members": [...], "mask": "0x.."}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassSetJson {
    #[serde(rename = "M")]
    pub m: u64,
    pub members: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
}

impl From<&ClassSet> for ClassSetJson {
    fn from(h: &ClassSet) -> Self {
        ClassSetJson {
            m: h.modulus.value(),
            members: h.members(),
            mask: Some(h.to_hex()),
        }
    }
}

impl ClassSetJson {
    pub fn into_class_set(self) -> Result<ClassSet> {
        let modulus = Arc::new(Modulus::new(self.m)?);
        ClassSet::new(modulus, &self.members)
    }
}
