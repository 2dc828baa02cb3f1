//! Product sets offered within one category.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of offered products, stored as sorted, de-duplicated 1-based ids.
///
/// Index 0 is the no-purchase option and never appears in an assortment.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assortment(Vec<usize>);

impl Assortment {
    pub fn empty() -> Self {
        Assortment(Vec::new())
    }

    /// All products `1..=n`.
    pub fn full(n: usize) -> Self {
        Assortment((1..=n).collect())
    }

    pub fn new(mut products: Vec<usize>) -> Self {
        products.sort_unstable();
        products.dedup();
        Assortment(products)
    }

    /// Decodes bit `k` of `mask` as product `k + 1`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Assortment((0..n).filter(|k| mask >> k & 1 == 1).map(|k| k + 1).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &j| m | 1 << (j - 1))
    }

    pub fn products(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, product: usize) -> bool {
        self.0.binary_search(&product).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Checks every product lies in `1..=n`.
    pub fn check(&self, n: usize) -> Result<()> {
        match self.0.iter().find(|&&j| j == 0 || j > n) {
            Some(j) => Err(Error::domain(format!(
                "product {j} is outside 1..={n}"
            ))),
            None => Ok(()),
        }
    }

    /// Membership mask over options `0..=n`; entry 0 (no purchase) is always set.
    pub fn offered_mask(&self, n: usize) -> Result<Vec<bool>> {
        self.check(n)?;
        let mut mask = vec![false; n + 1];
        mask[0] = true;
        for &j in &self.0 {
            mask[j] = true;
        }
        Ok(mask)
    }
}

impl FromIterator<usize> for Assortment {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Assortment::new(iter.into_iter().collect())
    }
}

impl From<Vec<usize>> for Assortment {
    fn from(v: Vec<usize>) -> Self {
        Assortment::new(v)
    }
}

impl<const N: usize> From<[usize; N]> for Assortment {
    fn from(v: [usize; N]) -> Self {
        Assortment::new(v.to_vec())
    }
}

impl fmt::Display for Assortment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, j) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_round_trip() {
        let s = Assortment::from([3, 1, 3]);
        assert_eq!(s.products(), &[1, 3]);
        assert_eq!(Assortment::from_mask(s.to_mask(), 4), s);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Assortment::from([0]).check(3).is_err());
        assert!(Assortment::from([4]).check(3).is_err());
        assert!(Assortment::from([1, 3]).check(3).is_ok());
    }

    #[test]
    fn offered_mask_includes_no_purchase() {
        let m = Assortment::empty().offered_mask(2).unwrap();
        assert_eq!(m, vec![true, false, false]);
    }
}
