//! Small fixed-capacity spatial vectors (dimension 1 or 3).
//!
//! Flux and gradient quantities are either scalars (1D) or 3-vectors; a
//! stack-allocated array with an explicit dimension keeps states `Copy` and
//! cheap to shuffle through the identity checks.

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialVec<T = f64> {
    data: [T; 3],
    dim: usize,
}

impl<T: Scalar> SpatialVec<T> {
    /// One-dimensional vector (a signed scalar component).
    pub fn d1(x: T) -> Self {
        Self {
            data: [x, T::zero(), T::zero()],
            dim: 1,
        }
    }

    /// Three-dimensional vector.
    pub fn d3(x: T, y: T, z: T) -> Self {
        Self { data: [x, y, z], dim: 3 }
    }

    pub fn zero(dim: usize) -> Result<Self> {
        match dim {
            1 => Ok(Self::d1(T::zero())),
            3 => Ok(Self::d3(T::zero(), T::zero(), T::zero())),
            d => Err(Error::InvalidDimension(d)),
        }
    }

    pub fn from_slice(c: &[T]) -> Result<Self> {
        match c {
            [x] => Ok(Self::d1(*x)),
            [x, y, z] => Ok(Self::d3(*x, *y, *z)),
            s => Err(Error::InvalidDimension(s.len())),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn components(&self) -> &[T] {
        &self.data[..self.dim]
    }

    #[inline]
    pub fn get(&self, i: usize) -> T {
        debug_assert!(i < self.dim);
        self.data[i]
    }

    /// Returns a copy with component `i` replaced; used by the
    /// finite-difference gradient checks.
    pub fn with_component(&self, i: usize, v: T) -> Self {
        debug_assert!(i < self.dim);
        let mut out = *self;
        out.data[i] = v;
        out
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = T::zero();
        for i in 0..self.dim {
            acc += self.data[i] * other.data[i];
        }
        acc
    }

    #[inline]
    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        for i in 0..self.dim {
            out.data[i] = out.data[i] * s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for i in 0..self.dim {
            out.data[i] = out.data[i] + other.data[i];
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for i in 0..self.dim {
            out.data[i] = out.data[i] - other.data[i];
        }
        out
    }
}

impl<T: Scalar> Serialize for SpatialVec<T>
where
    T: Serialize,
{
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim))?;
        for c in self.components() {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

impl<'de, T: Scalar> Deserialize<'de> for SpatialVec<T>
where
    T: Deserialize<'de>,
{
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct VecVisitor<T>(std::marker::PhantomData<T>);

        impl<'de, T: Scalar + Deserialize<'de>> Visitor<'de> for VecVisitor<T> {
            type Value = SpatialVec<T>;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a sequence of 1 or 3 numbers")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut buf = Vec::with_capacity(3);
                while let Some(v) = seq.next_element::<T>()? {
                    if buf.len() == 3 {
                        return Err(serde::de::Error::invalid_length(4, &self));
                    }
                    buf.push(v);
                }
                SpatialVec::from_slice(&buf)
                    .map_err(|_| serde::de::Error::invalid_length(buf.len(), &self))
            }
        }

        deserializer.deserialize_seq(VecVisitor(std::marker::PhantomData))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_and_norm() {
        let a: SpatialVec = SpatialVec::d3(1.0, 2.0, 3.0);
        let b = SpatialVec::d3(4.0, -5.0, 6.0);
        assert_eq!(a.dot(&b), 4.0 - 10.0 + 18.0);
        assert_eq!(a.norm_sq(), 14.0);
    }

    #[test]
    fn serde_round_trip() {
        let a: SpatialVec = SpatialVec::d1(-2.5);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[-2.5]");
        let back: SpatialVec = serde_json::from_str(&s).unwrap();
        assert_eq!(a, back);

        let bad: std::result::Result<SpatialVec, _> = serde_json::from_str("[1.0,2.0]");
        assert!(bad.is_err());
    }
}
