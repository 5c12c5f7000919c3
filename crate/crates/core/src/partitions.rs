//! Integer partitions, Young-diagram geometry and the quantities the loop
//! matrix needs from them: hook-length dimensions and content products.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A weakly decreasing sequence of positive parts. The empty sequence is the
/// partition of zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::invalid(format!("partition {parts:?} has a zero part")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!("partition {parts:?} is not weakly decreasing")));
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of rows, ℓ(λ).
    pub fn length(&self) -> usize {
        self.parts.len()
    }

    /// Longest row, λ₁ (zero for the empty partition).
    pub fn first_part(&self) -> usize {
        self.parts.first().copied().unwrap_or(0)
    }

    pub fn has_even_rows(&self) -> bool {
        self.parts.iter().all(|p| p % 2 == 0)
    }

    /// Boxes `(row, column)` in English convention, both 1-based.
    pub fn boxes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, &len)| (1..=len).map(move |j| (i + 1, j)))
    }

    pub fn transpose(&self) -> Partition {
        let cols = self.first_part();
        let parts = (1..=cols)
            .map(|j| self.parts.iter().filter(|&&p| p >= j).count())
            .collect();
        Partition { parts }
    }

    pub fn half(&self) -> Result<Partition> {
        if !self.has_even_rows() {
            return Err(Error::invalid(format!("{self} has an odd part")));
        }
        Ok(Partition {
            parts: self.parts.iter().map(|p| p / 2).collect(),
        })
    }

    pub fn doubled(&self) -> Partition {
        Partition {
            parts: self.parts.iter().map(|p| p * 2).collect(),
        }
    }

    /// Hook length of the box `(i, j)` (1-based).
    fn hook(&self, i: usize, j: usize, transposed: &Partition) -> usize {
        let arm = self.parts[i - 1] - j;
        let leg = transposed.parts[j - 1] - i;
        arm + leg + 1
    }

    /// Dimension of the irreducible symmetric-group representation ρ_λ,
    /// `weight! / ∏ hooks`.
    pub fn hook_dimension(&self) -> BigUint {
        let t = self.transpose();
        let mut num = BigUint::one();
        for k in 2..=self.weight() {
            num *= k;
        }
        let den = self
            .boxes()
            .fold(BigUint::one(), |acc, (i, j)| acc * self.hook(i, j, &t));
        num / den
    }

    /// `∏_{(i,j) ∈ ½λ} (x − i + 2j − 1)`: the eigenvalue of the loop matrix
    /// M(n, x) on the block M_λ.
    pub fn content_product(&self, x: &Rational) -> Result<Rational> {
        let half = self.half()?;
        Ok(half.boxes().fold(rational::int(1), |acc, (i, j)| {
            acc * (x - rational::int(i as i64) + rational::int(2 * j as i64 - 1))
        }))
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// All partitions of `m` in reverse-lexicographic order, `(m)` first.
pub fn partitions_of(m: usize) -> Vec<Partition> {
    fn go(rest: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition {
                parts: prefix.clone(),
            });
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            prefix.push(p);
            go(rest - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(m, m, &mut Vec::new(), &mut out);
    out
}

/// Partitions of `m` with every part even, reverse-lexicographic. These index
/// the blocks of the pairing representation.
pub fn even_row_partitions(m: usize) -> Result<Vec<Partition>> {
    if m == 0 || m % 2 == 1 {
        return Err(Error::invalid(format!(
            "even-row partitions need an even positive weight, got {m}"
        )));
    }
    Ok(partitions_of(m / 2).iter().map(Partition::doubled).collect())
}

/// (2n−1)!!, the number of n-pairings.
pub fn double_factorial_odd(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * (2 * k - 1))
}
