use std::fmt;

use crate::{Error, Result};

/// A total assignment of every feature of a model to selected (`true`) or
/// unselected (`false`).
///
/// Features are addressed with 1-based indices, as everywhere else in the
/// crate. Polarities are packed 64 to a word so that agreement counts reduce
/// to a popcount.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Product {
    len: usize,
    words: Vec<u64>,
}

impl Product {
    pub fn from_bools(signs: &[bool]) -> Self {
        let mut p = Product::all_unselected(signs.len());
        for (i, &s) in signs.iter().enumerate() {
            if s {
                p.words[i / 64] |= 1 << (i % 64);
            }
        }
        p
    }

    pub fn all_unselected(len: usize) -> Self {
        Product {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    /// Builds a product from exactly one signed literal per feature, in any
    /// order.
    pub fn from_literals(len: usize, literals: &[i32]) -> Result<Self> {
        if literals.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: literals.len(),
            });
        }
        let mut seen = vec![false; len];
        let mut p = Product::all_unselected(len);
        for &lit in literals {
            let f = lit.unsigned_abs() as usize;
            if lit == 0 || f > len {
                return Err(Error::LiteralOutOfRange {
                    literal: lit,
                    features: len,
                });
            }
            if std::mem::replace(&mut seen[f - 1], true) {
                return Err(Error::InvalidModel(format!(
                    "feature {f} assigned twice"
                )));
            }
            p.set(f, lit > 0);
        }
        Ok(p)
    }

    /// Number of features.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Polarity of a 1-based feature.
    pub fn is_selected(&self, feature: usize) -> bool {
        debug_assert!(feature >= 1 && feature <= self.len);
        let i = feature - 1;
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, feature: usize, selected: bool) {
        assert!(feature >= 1 && feature <= self.len, "feature out of range");
        let i = feature - 1;
        if selected {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    /// The signed literal this product assigns to a 1-based feature.
    pub fn literal(&self, feature: usize) -> i32 {
        if self.is_selected(feature) {
            feature as i32
        } else {
            -(feature as i32)
        }
    }

    /// True iff the product assigns the literal's polarity to its feature.
    pub fn satisfies(&self, literal: i32) -> bool {
        self.is_selected(literal.unsigned_abs() as usize) == (literal > 0)
    }

    pub fn signs(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.len).map(move |f| self.is_selected(f))
    }

    pub fn literals(&self) -> impl Iterator<Item = i32> + '_ {
        (1..=self.len).map(move |f| self.literal(f))
    }

    pub fn selected_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of features on which both products have the same polarity.
    pub fn agreement(&self, other: &Product) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        let differing: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum();
        Ok(self.len - differing as usize)
    }

    /// Every feature flipped.
    pub fn complement(&self) -> Product {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        let tail = self.len % 64;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        Product {
            len: self.len,
            words,
        }
    }
}

impl fmt::Debug for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Product(")?;
        for s in self.signs() {
            f.write_str(if s { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_across_word_boundary() {
        let signs: Vec<bool> = (0..130).map(|i| i % 3 == 0).collect();
        let p = Product::from_bools(&signs);
        assert_eq!(p.len(), 130);
        for (i, &s) in signs.iter().enumerate() {
            assert_eq!(p.is_selected(i + 1), s);
        }
        assert_eq!(p.selected_count(), signs.iter().filter(|s| **s).count());
        let c = p.complement();
        assert_eq!(p.agreement(&c).unwrap(), 0);
        assert_eq!(c.complement(), p);
    }

    #[test]
    fn literals_round_trip() {
        let p = Product::from_bools(&[true, false, true]);
        let lits: Vec<i32> = p.literals().collect();
        assert_eq!(lits, vec![1, -2, 3]);
        assert_eq!(Product::from_literals(3, &[3, 1, -2]).unwrap(), p);
        assert!(Product::from_literals(3, &[1, -1, 2]).is_err());
        assert!(Product::from_literals(3, &[1, 2]).is_err());
        assert!(Product::from_literals(2, &[1, 3]).is_err());
    }

    #[test]
    fn agreement_length_mismatch() {
        let a = Product::all_unselected(3);
        let b = Product::all_unselected(4);
        assert!(matches!(
            a.agreement(&b),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
