//! Arbitrary-size natural numbers with a cheap small-value path.
//!
//! Numeral payloads and evaluation values stay in `u64` almost always; codes
//! produced by the numbering can exceed that, so the slow path wraps a shared
//! `BigUint`.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::rc::Rc;

#[derive(Clone)]
pub enum Nat {
    Small(u64),
    Big(Rc<BigUint>),
}

impl Nat {
    pub const ZERO: Nat = Nat::Small(0);
    pub const ONE: Nat = Nat::Small(1);

    pub fn from_big(b: BigUint) -> Nat {
        match b.to_u64() {
            Some(v) => Nat::Small(v),
            None => Nat::Big(Rc::new(b)),
        }
    }

    pub fn to_big(&self) -> BigUint {
        match self {
            Nat::Small(v) => BigUint::from(*v),
            Nat::Big(b) => (**b).clone(),
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self {
            Nat::Small(v) => Some(*v),
            Nat::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Nat::Small(0))
    }

    pub fn succ(&self) -> Nat {
        match self {
            Nat::Small(v) => match v.checked_add(1) {
                Some(r) => Nat::Small(r),
                None => Nat::from_big(BigUint::from(*v) + 1u32),
            },
            Nat::Big(b) => Nat::from_big((**b).clone() + 1u32),
        }
    }

    pub fn pred(&self) -> Option<Nat> {
        match self {
            Nat::Small(0) => None,
            Nat::Small(v) => Some(Nat::Small(v - 1)),
            Nat::Big(b) => Some(Nat::from_big((**b).clone() - 1u32)),
        }
    }

    pub fn add(&self, other: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            if let Some(r) = a.checked_add(*b) {
                return Nat::Small(r);
            }
        }
        Nat::from_big(self.to_big() + other.to_big())
    }

    pub fn mul(&self, other: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            if let Some(r) = a.checked_mul(*b) {
                return Nat::Small(r);
            }
        }
        Nat::from_big(self.to_big() * other.to_big())
    }

    /// Truncated subtraction; `None` when `other > self`.
    pub fn checked_sub(&self, other: &Nat) -> Option<Nat> {
        if other > self {
            return None;
        }
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            return Some(Nat::Small(a - b));
        }
        Some(Nat::from_big(self.to_big() - other.to_big()))
    }

    /// Exact division; `None` when `other` is zero or does not divide `self`.
    pub fn checked_div_exact(&self, other: &Nat) -> Option<Nat> {
        if other.is_zero() {
            return None;
        }
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            return if a % b == 0 { Some(Nat::Small(a / b)) } else { None };
        }
        let (a, b) = (self.to_big(), other.to_big());
        if (&a % &b).is_zero() {
            Some(Nat::from_big(a / b))
        } else {
            None
        }
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Nat {
        Nat::Small(v)
    }
}

impl From<usize> for Nat {
    fn from(v: usize) -> Nat {
        Nat::Small(v as u64)
    }
}

impl PartialEq for Nat {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a == b,
            // Constructors keep values <= u64::MAX in Small, so the mixed
            // cases are always unequal.
            (Nat::Small(_), Nat::Big(_)) | (Nat::Big(_), Nat::Small(_)) => false,
            (Nat::Big(a), Nat::Big(b)) => a == b,
        }
    }
}

impl Eq for Nat {}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Nat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a.cmp(b),
            (Nat::Small(_), Nat::Big(_)) => Ordering::Less,
            (Nat::Big(_), Nat::Small(_)) => Ordering::Greater,
            (Nat::Big(a), Nat::Big(b)) => a.cmp(b),
        }
    }
}

impl std::hash::Hash for Nat {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Nat::Small(v) => v.hash(state),
            Nat::Big(b) => b.to_u64_digits().hash(state),
        }
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nat::Small(v) => write!(f, "{v}"),
            Nat::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_big_boundary() {
        let m = Nat::Small(u64::MAX);
        let s = m.succ();
        assert!(s.as_u64().is_none());
        assert_eq!(s.pred().unwrap(), m);
        assert!(m < s);
    }

    #[test]
    fn arithmetic() {
        let a = Nat::from(6u64);
        let b = Nat::from(7u64);
        assert_eq!(a.mul(&b), Nat::from(42u64));
        assert_eq!(a.add(&b), Nat::from(13u64));
        assert_eq!(Nat::from(42u64).checked_div_exact(&b), Some(a.clone()));
        assert_eq!(Nat::from(43u64).checked_div_exact(&b), None);
        assert_eq!(a.checked_sub(&b), None);
        assert_eq!(b.checked_sub(&a), Some(Nat::ONE));
    }
}
