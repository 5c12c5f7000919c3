//! n-pairings (perfect matchings of {1..2n}): enumeration, crossings, loop
//! numbers and the action of the symmetric group S_2n.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::Partition;

/// A fixed-point-free involution on {1..2n}, stored in canonical form: each
/// pair sorted, pairs sorted by their smaller element.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<[usize; 2]>", into = "Vec<[usize; 2]>")]
pub struct Pairing {
    pairs: Vec<(usize, usize)>,
}

impl Pairing {
    /// Builds a pairing from arbitrary pairs, canonicalising the order.
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let n = pairs.len();
        if n == 0 {
            return Err(Error::invalid("a pairing needs at least one pair"));
        }
        let mut seen = vec![false; 2 * n + 1];
        let mut canon = Vec::with_capacity(n);
        for (a, b) in pairs {
            for v in [a, b] {
                if v == 0 || v > 2 * n {
                    return Err(Error::invalid(format!("entry {v} outside 1..={}", 2 * n)));
                }
                if seen[v] {
                    return Err(Error::invalid(format!("entry {v} appears twice")));
                }
                seen[v] = true;
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        Ok(Pairing { pairs: canon })
    }

    /// (1,2)(3,4)…(2n−1,2n).
    pub fn adjacent(n: usize) -> Result<Self> {
        Pairing::new((1..=n).map(|i| (2 * i - 1, 2 * i)).collect())
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Involution table indexed 1..=2n (index 0 unused).
    pub fn partner_table(&self) -> Vec<usize> {
        let mut t = vec![0; 2 * self.n() + 1];
        for &(a, b) in &self.pairs {
            t[a] = b;
            t[b] = a;
        }
        t
    }

    pub fn as_permutation(&self) -> Permutation {
        Permutation {
            images: self.partner_table()[1..].to_vec(),
        }
    }

    /// c(P): pairs of pairs (i,k), (j,l) with i < j < k < l.
    pub fn crossing_number(&self) -> usize {
        let p = &self.pairs;
        let mut count = 0;
        for (x, &(i, k)) in p.iter().enumerate() {
            for &(j, l) in &p[x + 1..] {
                if (i < j && j < k && k < l) || (j < i && i < l && l < k) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Stable identity string, e.g. `(1,4)(2,5)(3,7)(6,8)`.
    pub fn key(&self) -> String {
        self.pairs.iter().map(|(a, b)| format!("({a},{b})")).collect()
    }
}

impl TryFrom<Vec<[usize; 2]>> for Pairing {
    type Error = Error;
    fn try_from(v: Vec<[usize; 2]>) -> Result<Self> {
        Pairing::new(v.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl From<Pairing> for Vec<[usize; 2]> {
    fn from(p: Pairing) -> Self {
        p.pairs.into_iter().map(|(a, b)| [a, b]).collect()
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if 2 * self.n() <= 9 {
            for (a, b) in &self.pairs {
                write!(f, "({a}{b})")?;
            }
            Ok(())
        } else {
            f.write_str(&self.key())
        }
    }
}

impl fmt::Debug for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// All (2n−1)!! pairings, lexicographic on canonical form. This order is the
/// coordinate order of ℂ𝒫_n throughout the crate.
pub fn enumerate_pairings(n: usize) -> Result<Vec<Pairing>> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    fn go(free: &mut Vec<usize>, acc: &mut Vec<(usize, usize)>, out: &mut Vec<Pairing>) {
        if free.is_empty() {
            out.push(Pairing { pairs: acc.clone() });
            return;
        }
        let first = free.remove(0);
        for idx in 0..free.len() {
            let partner = free.remove(idx);
            acc.push((first, partner));
            go(free, acc, out);
            acc.pop();
            free.insert(idx, partner);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    go(&mut (1..=2 * n).collect(), &mut Vec::new(), &mut out);
    Ok(out)
}

/// The pairing basis of ℂ𝒫_n with a reverse index.
#[derive(Debug, Clone)]
pub struct PairingBasis {
    n: usize,
    pairings: Vec<Pairing>,
    index: HashMap<Pairing, usize>,
}

impl PairingBasis {
    pub fn new(n: usize) -> Result<Self> {
        let pairings = enumerate_pairings(n)?;
        let index = pairings.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        Ok(PairingBasis { n, pairings, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairings.is_empty()
    }

    pub fn pairings(&self) -> &[Pairing] {
        &self.pairings
    }

    pub fn index_of(&self, p: &Pairing) -> Option<usize> {
        self.index.get(p).copied()
    }
}

fn check_same_n(p1: &Pairing, p2: &Pairing) -> Result<()> {
    if p1.n() != p2.n() {
        return Err(Error::invalid(format!(
            "pairings on different sets: n = {} vs n = {}",
            p1.n(),
            p2.n()
        )));
    }
    Ok(())
}

/// L(P1, P2): loops in the glued arc diagrams, i.e. half the number of cycles
/// of the permutation P1∘P2.
pub fn loop_number(p1: &Pairing, p2: &Pairing) -> Result<usize> {
    check_same_n(p1, p2)?;
    let cycles = p1.as_permutation().compose(&p2.as_permutation())?.cycle_count();
    debug_assert_eq!(cycles % 2, 0);
    Ok(cycles / 2)
}

/// Half-lengths of the loops of the glued arc diagrams, as a partition of n.
/// Traced directly on the diagrams, independently of [`loop_number`].
pub fn loop_type(p1: &Pairing, p2: &Pairing) -> Result<Partition> {
    check_same_n(p1, p2)?;
    let (a, b) = (p1.partner_table(), p2.partner_table());
    let mut visited = vec![false; a.len()];
    let mut halves = Vec::new();
    for start in 1..a.len() {
        if visited[start] {
            continue;
        }
        let mut len = 0;
        let mut v = start;
        loop {
            visited[v] = true;
            let w = a[v];
            visited[w] = true;
            len += 2;
            v = b[w];
            if v == start {
                break;
            }
        }
        halves.push(len / 2);
    }
    halves.sort_unstable_by(|x, y| y.cmp(x));
    Partition::new(halves)
}

/// A permutation of {1..m}, stored as the image list `images[i-1] = g(i)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m + 1];
        for &v in &images {
            if v == 0 || v > m || seen[v] {
                return Err(Error::invalid(format!("{images:?} is not a bijection of 1..={m}")));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(m: usize) -> Self {
        Permutation {
            images: (1..=m).collect(),
        }
    }

    pub fn transposition(m: usize, i: usize, j: usize) -> Result<Self> {
        if i == 0 || j == 0 || i > m || j > m {
            return Err(Error::invalid(format!("transposition ({i} {j}) outside 1..={m}")));
        }
        let mut images: Vec<usize> = (1..=m).collect();
        images.swap(i - 1, j - 1);
        Ok(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::invalid("composing permutations of different degree"));
        }
        Ok(Permutation {
            images: other.images.iter().map(|&i| self.apply(i)).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.degree()];
        for (i, &g) in self.images.iter().enumerate() {
            images[g - 1] = i + 1;
        }
        Permutation { images }
    }

    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.degree() + 1];
        let mut count = 0;
        for start in 1..=self.degree() {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut v = start;
            while !seen[v] {
                seen[v] = true;
                v = self.apply(v);
            }
        }
        count
    }

    pub fn sign(&self) -> i8 {
        if (self.degree() - self.cycle_count()).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

/// How S_2n acts on pairings: plainly (ρ_n) or twisted by the sign
/// character (ρ_n ⊗ ε).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionFlavor {
    Plain,
    Signed,
}

/// g·P = {(g(a), g(b))}, recanonicalised, with the sign of the flavor.
pub fn act_permutation(g: &Permutation, p: &Pairing, flavor: ActionFlavor) -> Result<(Pairing, i8)> {
    if g.degree() != 2 * p.n() {
        return Err(Error::invalid(format!(
            "permutation of degree {} cannot act on an {}-pairing",
            g.degree(),
            p.n()
        )));
    }
    let moved = Pairing::new(p.pairs.iter().map(|&(a, b)| (g.apply(a), g.apply(b))).collect())?;
    let sign = match flavor {
        ActionFlavor::Plain => 1,
        ActionFlavor::Signed => g.sign(),
    };
    Ok((moved, sign))
}
