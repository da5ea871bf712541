use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::field::PrimeField;

/// Size limits applied by every constructor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Largest module dimension any operation may produce.
    pub max_dim: usize,
    /// Largest admissible group order p^r.
    pub max_order: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_dim: 4096,
            max_order: 3125,
        }
    }
}

/// The elementary abelian group E = (C_p)^r, written additively as F_p^r with
/// standard generators e_1, ..., e_r.
///
/// Group elements are indexed lexicographically by exponent vector, first
/// coordinate most significant. Equality ignores the caps.
#[derive(Clone, Copy, Debug)]
pub struct Group {
    field: PrimeField,
    rank: usize,
    caps: Caps,
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.rank == other.rank
    }
}

impl Eq for Group {}

impl Hash for Group {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.hash(state);
        self.rank.hash(state);
    }
}

impl Group {
    pub fn new(p: u64, rank: usize) -> Result<Self> {
        Self::with_caps(p, rank, Caps::default())
    }

    pub fn with_caps(p: u64, rank: usize, caps: Caps) -> Result<Self> {
        let field = PrimeField::new(p)?;
        if rank == 0 {
            return Err(Error::Malformed("group rank must be at least 1".into()));
        }
        let order = (p as u128)
            .checked_pow(rank as u32)
            .filter(|&o| o <= caps.max_order as u128)
            .ok_or(Error::CapExceeded {
                what: "group order",
                requested: (p as usize).saturating_pow(rank as u32),
                cap: caps.max_order,
            })?;
        debug_assert!(order >= 2);
        Ok(Group { field, rank, caps })
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.field.p()
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    /// |E| = p^r.
    pub fn order(&self) -> usize {
        (self.p() as usize).pow(self.rank as u32)
    }

    pub fn check_dim(&self, what: &'static str, dim: usize) -> Result<()> {
        if dim > self.caps.max_dim {
            return Err(Error::CapExceeded {
                what,
                requested: dim,
                cap: self.caps.max_dim,
            });
        }
        Ok(())
    }

    /// Exponent vector of the element with the given lexicographic index.
    pub fn element(&self, mut index: usize) -> Vec<u32> {
        let p = self.p() as usize;
        let mut v = vec![0u32; self.rank];
        for slot in v.iter_mut().rev() {
            *slot = (index % p) as u32;
            index /= p;
        }
        v
    }

    /// Lexicographic index of an exponent vector (entries reduced mod p).
    pub fn index_of(&self, v: &[u32]) -> usize {
        let p = self.p() as usize;
        v.iter().fold(0, |acc, &x| acc * p + x as usize)
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        (0..self.order()).map(|i| self.element(i))
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank == 1 {
            write!(f, "C_{}", self.p())
        } else {
            write!(f, "(C_{})^{}", self.p(), self.rank)
        }
    }
}
