//! Enumerative inputs: genus-0 plane curve counts from the Kontsevich
//! recursion, reducible fibres of a pencil, and a table of quoted counts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummationOrder {
    Forward,
    Reverse,
}

/// N_1, …, N_d with the inner sum over d₁ taken in the given order.
pub fn kontsevich_sequence(d: usize, order: SummationOrder) -> Result<Vec<BigInt>> {
    if d == 0 {
        return Err(Error::invalid("degree must be positive"));
    }
    let mut n: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for deg in 2..=d {
        let top = BigInt::from(3 * deg - 4);
        let mut splits: Vec<usize> = (1..deg).collect();
        if order == SummationOrder::Reverse {
            splits.reverse();
        }
        let mut total = BigInt::zero();
        for d1 in splits {
            let d2 = deg - d1;
            let (b1, b2) = (BigInt::from(d1), BigInt::from(d2));
            let c_a = binomial(top.clone(), BigInt::from(3 * d1 - 2));
            let c_b = binomial(top.clone(), BigInt::from(3 * d1 - 1));
            total += &n[d1] * &n[d2] * &b1 * &b1 * &b2 * (&b2 * c_a - &b1 * c_b);
        }
        n.push(total);
    }
    n.remove(0);
    Ok(n)
}

/// Number of rational degree-d plane curves through 3d−1 general points.
pub fn kontsevich_nd(d: usize) -> Result<BigInt> {
    Ok(kontsevich_sequence(d, SummationOrder::Forward)?.pop().expect("nonempty"))
}

/// Reducible fibres of a pencil whose blow-up is a ℙ¹-fibration: each smooth
/// fibre contributes 2 to χ and each two-component fibre 3, so
/// χ(S) + basepoints = 4 + k.
pub fn pencil_reducible_count(chi_surface: i64, basepoints: i64) -> Result<i64> {
    if basepoints < 0 {
        return Err(Error::invalid("number of base points must be nonnegative"));
    }
    let k = chi_surface + basepoints - 4;
    if k < 0 {
        return Err(Error::InvalidModel(format!(
            "chi = {chi_surface} with {basepoints} base points gives {k} reducible fibres"
        )));
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleEntry {
    #[serde(with = "rational::as_string")]
    pub value: Rational,
    pub provenance: String,
}

/// Quoted enumerative counts keyed by scenario-scoped descriptors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OracleTable {
    entries: BTreeMap<String, OracleEntry>,
}

impl OracleTable {
    pub fn bundled() -> Self {
        Self::from_json(include_str!("../data/oracle_table.json")).expect("bundled oracle table parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: OracleTable =
            serde_json::from_str(text).map_err(|e| Error::InvalidModel(format!("oracle table: {e}")))?;
        if let Some((k, _)) = table.entries.iter().find(|(_, e)| e.provenance.trim().is_empty()) {
            return Err(Error::InvalidModel(format!("oracle entry {k} has no provenance")));
        }
        Ok(table)
    }

    pub fn lookup(&self, key: &str) -> Result<&OracleEntry> {
        self.entries.get(key).ok_or_else(|| Error::MissingData(key.to_string()))
    }

    pub fn value(&self, key: &str) -> Result<Rational> {
        Ok(self.lookup(key)?.value.clone())
    }

    /// Replaces or adds an entry.
    pub fn insert(&mut self, key: &str, value: Rational, provenance: &str) {
        self.entries.insert(
            key.to_string(),
            OracleEntry {
                value,
                provenance: provenance.to_string(),
            },
        );
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

pub fn lookup(key: &str, table: &OracleTable) -> Result<Rational> {
    table.value(key)
}
