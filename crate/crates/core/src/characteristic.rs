//! Half-integer theta characteristics `[a; b]` with `a, b in {0, 1/2}^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ThetaError};

/// A characteristic stored as bit vectors: bit `i` of `a_bits` set means `a_i = 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThetaCharacteristic {
    dim: usize,
    a_bits: u32,
    b_bits: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl ThetaCharacteristic {
    /// The zero characteristic; gives the Riemann theta function.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            a_bits: 0,
            b_bits: 0,
        }
    }

    pub fn from_bits(dim: usize, a_bits: u32, b_bits: u32) -> Result<Self> {
        if dim == 0 || dim > crate::MAX_DIMENSION {
            return Err(ThetaError::UnsupportedDimension(dim));
        }
        let mask = (1u32 << dim) - 1;
        if a_bits & !mask != 0 || b_bits & !mask != 0 {
            return Err(ThetaError::Precondition(
                "characteristic bits exceed the dimension".into(),
            ));
        }
        Ok(Self {
            dim,
            a_bits,
            b_bits,
        })
    }

    /// Builds a characteristic from explicit entries, each of which must be 0 or 1/2.
    pub fn new(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(ThetaError::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        let to_bits = |v: &[f64]| -> Result<u32> {
            let mut bits = 0;
            for (i, &x) in v.iter().enumerate() {
                if x == 0.5 {
                    bits |= 1 << i;
                } else if x != 0.0 {
                    return Err(ThetaError::Precondition(format!(
                        "characteristic entries must be 0 or 1/2, got {x}"
                    )));
                }
            }
            Ok(bits)
        };
        Self::from_bits(a.len(), to_bits(a)?, to_bits(b)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.a_bits == 0 && self.b_bits == 0
    }

    pub fn a(&self) -> Vec<f64> {
        Self::halves(self.dim, self.a_bits)
    }

    pub fn b(&self) -> Vec<f64> {
        Self::halves(self.dim, self.b_bits)
    }

    fn halves(dim: usize, bits: u32) -> Vec<f64> {
        (0..dim)
            .map(|i| if bits >> i & 1 == 1 { 0.5 } else { 0.0 })
            .collect()
    }

    /// Even iff `4 a.b` is even, i.e. the number of shared half entries is even.
    pub fn parity(&self) -> Parity {
        if (self.a_bits & self.b_bits).count_ones() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == Parity::Odd
    }

    /// All `4^n` characteristics in a fixed order (`a` bits major, `b` bits minor).
    pub fn all(dim: usize) -> Vec<Self> {
        let count = 1u32 << dim;
        (0..count)
            .flat_map(|a| (0..count).map(move |b| (a, b)))
            .map(|(a_bits, b_bits)| Self {
                dim,
                a_bits,
                b_bits,
            })
            .collect()
    }

    pub fn even(dim: usize) -> Vec<Self> {
        Self::all(dim)
            .into_iter()
            .filter(|c| c.parity() == Parity::Even)
            .collect()
    }

    pub fn odd(dim: usize) -> Vec<Self> {
        Self::all(dim).into_iter().filter(Self::is_odd).collect()
    }
}

impl std::fmt::Display for ThetaCharacteristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fmt_vec = |v: Vec<f64>| {
            v.iter()
                .map(|x| if *x == 0.5 { "1/2" } else { "0" })
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "[{};{}]", fmt_vec(self.a()), fmt_vec(self.b()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus_two_has_ten_even_and_six_odd() {
        assert_eq!(ThetaCharacteristic::even(2).len(), 10);
        assert_eq!(ThetaCharacteristic::odd(2).len(), 6);
    }

    #[test]
    fn genus_one_counts() {
        assert_eq!(ThetaCharacteristic::even(1).len(), 3);
        let odd = ThetaCharacteristic::odd(1);
        assert_eq!(odd.len(), 1);
        assert_eq!(odd[0].a(), vec![0.5]);
        assert_eq!(odd[0].b(), vec![0.5]);
    }

    #[test]
    fn parity_matches_four_a_dot_b() {
        for dim in 1..=3 {
            for ch in ThetaCharacteristic::all(dim) {
                let four_ab: f64 = ch.a().iter().zip(ch.b()).map(|(a, b)| 4.0 * a * b).sum();
                let even = (four_ab.round() as i64) % 2 == 0;
                assert_eq!(even, ch.parity() == Parity::Even, "{ch}");
            }
        }
    }

    #[test]
    fn rejects_non_half_entries() {
        assert!(ThetaCharacteristic::new(&[0.25], &[0.0]).is_err());
        assert!(ThetaCharacteristic::new(&[0.5, 0.0], &[0.0]).is_err());
        let ch = ThetaCharacteristic::new(&[0.5, 0.0], &[0.5, 0.5]).unwrap();
        assert!(ch.is_odd());
    }
}
