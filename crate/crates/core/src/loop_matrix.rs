//! The loop matrix M(n,x), its eigenspace blocks M_λ, and the restricted
//! inverse on the blocks admitted by an orthogonal or symplectic flavor.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pairings::{loop_number, PairingBasis};
use crate::partitions::{even_row_partitions, Partition};
use crate::rational::{self, Rational};

/// A vector of ℂ𝒫_n in the coordinates of [`crate::pairings::enumerate_pairings`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingVector {
    pub n: usize,
    #[serde(with = "rational::vec_as_strings")]
    pub coords: Vec<Rational>,
}

impl PairingVector {
    pub fn new(n: usize, coords: Vec<Rational>) -> Result<Self> {
        let expected = pairing_count(n)?;
        if coords.len() != expected {
            return Err(Error::invalid(format!(
                "a vector of C P_{n} has {expected} coordinates, got {}",
                coords.len()
            )));
        }
        Ok(PairingVector { n, coords })
    }

    pub fn zero(n: usize) -> Result<Self> {
        PairingVector::new(n, vec![Rational::zero(); pairing_count(n)?])
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

fn pairing_count(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    Ok((1..=n).map(|i| 2 * i - 1).product())
}

/// Invariant-theory flavor. `k` is the dimension for orthogonal and half the
/// dimension for symplectic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "flavor", rename_all = "lowercase")]
pub enum Flavor {
    Orthogonal { k: usize },
    Symplectic { k: usize },
}

impl Flavor {
    pub fn orthogonal(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("orthogonal dimension k must be positive"));
        }
        Ok(Flavor::Orthogonal { k })
    }

    pub fn symplectic(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("symplectic half-dimension k must be positive"));
        }
        Ok(Flavor::Symplectic { k })
    }

    pub fn k(&self) -> usize {
        match *self {
            Flavor::Orthogonal { k } | Flavor::Symplectic { k } => k,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Flavor::Orthogonal { k } => k,
            Flavor::Symplectic { k } => 2 * k,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Flavor::Orthogonal { .. } => "orthogonal",
            Flavor::Symplectic { .. } => "symplectic",
        }
    }

    /// The value of x at which M(n,x) is the matrix of diagonal insertions.
    pub fn specialization(&self) -> Rational {
        match *self {
            Flavor::Orthogonal { k } => rational::int(k as i64),
            Flavor::Symplectic { k } => rational::int(-2 * k as i64),
        }
    }

    /// Whether M_λ survives in the invariants: ℓ(λ) ≤ k, resp. λ₁ ≤ 2k.
    pub fn admits(&self, lambda: &Partition) -> bool {
        match *self {
            Flavor::Orthogonal { k } => lambda.length() <= k,
            Flavor::Symplectic { k } => lambda.first_part() <= 2 * k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopMatrix {
    pub n: usize,
    pub x: Rational,
    pub matrix: Matrix,
}

impl LoopMatrix {
    pub fn apply(&self, v: &PairingVector) -> Result<PairingVector> {
        if v.n != self.n {
            return Err(Error::invalid("vector and matrix have different n"));
        }
        PairingVector::new(self.n, self.matrix.mul_vec(&v.coords)?)
    }
}

/// Table of L(P,P′) over the pairing basis.
pub fn loop_number_table(basis: &PairingBasis) -> Result<Vec<Vec<usize>>> {
    let ps = basis.pairings();
    let mut table = vec![vec![0; ps.len()]; ps.len()];
    for i in 0..ps.len() {
        for j in i..ps.len() {
            let l = loop_number(&ps[i], &ps[j])?;
            table[i][j] = l;
            table[j][i] = l;
        }
    }
    Ok(table)
}

fn matrix_from_table(table: &[Vec<usize>], n: usize, x: &Rational) -> Matrix {
    let powers: Vec<Rational> = (0..=n).map(|e| rational::pow(x, e)).collect();
    Matrix::from_fn(table.len(), table.len(), |i, j| powers[table[i][j]].clone())
}

pub fn build_loop_matrix(n: usize, x: &Rational) -> Result<LoopMatrix> {
    crate::check_desk_scale(n)?;
    let basis = PairingBasis::new(n)?;
    let table = loop_number_table(&basis)?;
    Ok(LoopMatrix {
        n,
        x: x.clone(),
        matrix: matrix_from_table(&table, n, x),
    })
}

/// One block M_λ with its eigenbasis computed at the decomposition point.
#[derive(Debug, Clone)]
pub struct EigenBlock {
    pub partition: Partition,
    pub eigenvalue_at_x0: Rational,
    pub basis: Vec<PairingVector>,
}

/// The decomposition ℂ𝒫_n = ⊕ M_λ, computed once as eigenspaces of M(n,x0).
/// The blocks do not depend on x, so the same bases serve every
/// specialization.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    n: usize,
    x0: Rational,
    blocks: Vec<EigenBlock>,
    offsets: Vec<usize>,
    // inverse of the matrix whose columns are all block vectors in order
    coordinates: Matrix,
}

impl SpectralDecomposition {
    /// Decomposes at a caller-chosen x0. Fails with a collision error when two
    /// blocks share an eigenvalue there.
    pub fn at(n: usize, x0: &Rational) -> Result<Self> {
        crate::check_desk_scale(n)?;
        let lambdas = even_row_partitions(2 * n)?;
        let values = lambdas
            .iter()
            .map(|l| l.content_product(x0))
            .collect::<Result<Vec<_>>>()?;
        if let Some((a, b)) = first_collision(&values) {
            return Err(Error::EigenvalueCollision {
                x0: rational::format(x0),
                first: lambdas[a].to_string(),
                second: lambdas[b].to_string(),
                value: rational::format(&values[a]),
            });
        }
        let m = build_loop_matrix(n, x0)?;
        let size = m.matrix.rows();
        let mut blocks = Vec::with_capacity(lambdas.len());
        let mut offsets = Vec::with_capacity(lambdas.len());
        let mut columns = Vec::with_capacity(size);
        for (lambda, value) in lambdas.into_iter().zip(values) {
            let kernel = m.matrix.shift(&value)?.kernel();
            let expected = lambda.hook_dimension();
            if BigUint::from(kernel.len()) != expected {
                return Err(Error::InternalConsistency(format!(
                    "block {lambda} has dimension {} at x0 = {}, hook formula gives {expected}",
                    kernel.len(),
                    rational::format(x0)
                )));
            }
            offsets.push(columns.len());
            columns.extend(kernel.iter().cloned());
            blocks.push(EigenBlock {
                partition: lambda,
                eigenvalue_at_x0: value,
                basis: kernel
                    .into_iter()
                    .map(|c| PairingVector { n, coords: c })
                    .collect(),
            });
        }
        if columns.len() != size {
            return Err(Error::InternalConsistency(format!(
                "blocks span {} of {size} dimensions",
                columns.len()
            )));
        }
        let coordinates = Matrix::from_columns(&columns, size)?
            .inverse()
            .map_err(|_| Error::InternalConsistency("eigenblocks are not independent".into()))?;
        Ok(SpectralDecomposition {
            n,
            x0: x0.clone(),
            blocks,
            offsets,
            coordinates,
        })
    }

    /// Decomposes at the first x0 ≥ 2n+1 where all block eigenvalues differ.
    pub fn auto(n: usize) -> Result<Self> {
        crate::check_desk_scale(n)?;
        Self::at(n, &generic_point(n)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x0(&self) -> &Rational {
        &self.x0
    }

    pub fn blocks(&self) -> &[EigenBlock] {
        &self.blocks
    }

    pub fn block(&self, lambda: &Partition) -> Option<&EigenBlock> {
        self.blocks.iter().find(|b| &b.partition == lambda)
    }

    fn check_vector(&self, v: &PairingVector) -> Result<()> {
        if v.n != self.n || v.coords.len() != self.coordinates.rows() {
            return Err(Error::invalid(format!(
                "expected a vector of C P_{}, got one with n = {} and {} coordinates",
                self.n,
                v.n,
                v.coords.len()
            )));
        }
        Ok(())
    }

    /// Splits v into its M_λ components, in block order.
    pub fn components(&self, v: &PairingVector) -> Result<Vec<PairingVector>> {
        self.check_vector(v)?;
        let coeffs = self.coordinates.mul_vec(&v.coords)?;
        Ok(self
            .blocks
            .iter()
            .zip(&self.offsets)
            .map(|(block, &off)| {
                let mut out = vec![Rational::zero(); v.coords.len()];
                for (i, b) in block.basis.iter().enumerate() {
                    let c = &coeffs[off + i];
                    if c.is_zero() {
                        continue;
                    }
                    for (o, x) in out.iter_mut().zip(&b.coords) {
                        *o += c * x;
                    }
                }
                PairingVector { n: self.n, coords: out }
            })
            .collect())
    }

    /// Concatenated bases of the admitted blocks.
    pub fn invariant_subspace(&self, flavor: Flavor) -> Vec<PairingVector> {
        self.blocks
            .iter()
            .filter(|b| flavor.admits(&b.partition))
            .flat_map(|b| b.basis.iter().cloned())
            .collect()
    }

    /// Partitions whose blocks carry a nonzero component of v but are not
    /// admitted by the flavor.
    pub fn inadmissible_support(&self, flavor: Flavor, v: &PairingVector) -> Result<Vec<Partition>> {
        Ok(self
            .components(v)?
            .iter()
            .zip(&self.blocks)
            .filter(|(c, b)| !flavor.admits(&b.partition) && !c.is_zero())
            .map(|(_, b)| b.partition.clone())
            .collect())
    }

    /// The unique w in the invariant subspace with M(n,x)·w = v, where x is
    /// the flavor's specialization.
    pub fn restricted_inverse_apply(&self, flavor: Flavor, v: &PairingVector) -> Result<PairingVector> {
        let comps = self.components(v)?;
        let x = flavor.specialization();
        let mut out = vec![Rational::zero(); v.coords.len()];
        for (comp, block) in comps.iter().zip(&self.blocks) {
            if !flavor.admits(&block.partition) {
                if !comp.is_zero() {
                    return Err(Error::Domain(format!(
                        "component in block {} is not admitted by the {} flavor with k = {}",
                        block.partition,
                        flavor.name(),
                        flavor.k()
                    )));
                }
                continue;
            }
            if comp.is_zero() {
                continue;
            }
            let value = block.partition.content_product(&x)?;
            if value.is_zero() {
                return Err(Error::InternalConsistency(format!(
                    "admitted block {} has eigenvalue 0 at x = {}",
                    block.partition,
                    rational::format(&x)
                )));
            }
            let inv = value.recip();
            for (o, c) in out.iter_mut().zip(&comp.coords) {
                *o += c * &inv;
            }
        }
        PairingVector::new(self.n, out)
    }
}

fn first_collision(values: &[Rational]) -> Option<(usize, usize)> {
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if values[i] == values[j] {
                return Some((i, j));
            }
        }
    }
    None
}

/// First integer x0 ≥ 2n+1 separating all block eigenvalues.
pub fn generic_point(n: usize) -> Result<Rational> {
    let lambdas = even_row_partitions(2 * n)?;
    let mut x0 = rational::int(2 * n as i64 + 1);
    loop {
        let values = lambdas
            .iter()
            .map(|l| l.content_product(&x0))
            .collect::<Result<Vec<_>>>()?;
        if first_collision(&values).is_none() {
            return Ok(x0);
        }
        x0 += Rational::one();
    }
}

pub fn eigenspace_decomposition(n: usize, x0: &Rational) -> Result<SpectralDecomposition> {
    SpectralDecomposition::at(n, x0)
}

pub fn invariant_subspace(n: usize, flavor: Flavor) -> Result<Vec<PairingVector>> {
    Ok(SpectralDecomposition::auto(n)?.invariant_subspace(flavor))
}

pub fn restricted_inverse_apply(n: usize, flavor: Flavor, v: &PairingVector) -> Result<PairingVector> {
    SpectralDecomposition::auto(n)?.restricted_inverse_apply(flavor, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn small_matrices() {
        let m = build_loop_matrix(2, &int(2)).unwrap();
        assert_eq!(m.matrix.to_rows(), vec![ints(&[4, 2, 2]), ints(&[2, 4, 2]), ints(&[2, 2, 4])]);
        assert_eq!(build_loop_matrix(1, &frac(3, 7)).unwrap().matrix.to_rows(), vec![vec![frac(3, 7)]]);
        let ones = build_loop_matrix(3, &int(1)).unwrap();
        assert!(ones.matrix.to_rows().iter().flatten().all(|v| *v == int(1)));
        assert!(ones.matrix.is_symmetric());
    }

    #[test]
    fn n2_blocks() {
        let d = SpectralDecomposition::auto(2).unwrap();
        let top = d.block(&Partition::new(vec![4]).unwrap()).unwrap();
        assert_eq!(top.basis.len(), 1);
        assert_eq!(top.basis[0].coords, ints(&[1, 1, 1]));
        let plane = d.block(&Partition::new(vec![2, 2]).unwrap()).unwrap();
        assert_eq!(plane.basis.len(), 2);
        for v in &plane.basis {
            assert!(v.coords.iter().fold(Rational::zero(), |a, b| a + b).is_zero());
        }
    }

    #[test]
    fn collision_is_reported() {
        // x(x+2) and x(x−1) both vanish at 0
        let err = SpectralDecomposition::at(2, &int(0)).unwrap_err();
        assert!(matches!(err, Error::EigenvalueCollision { .. }));
    }

    #[test]
    fn admissibility_counts() {
        let d = SpectralDecomposition::auto(2).unwrap();
        assert_eq!(d.invariant_subspace(Flavor::orthogonal(1).unwrap()).len(), 1);
        assert_eq!(d.invariant_subspace(Flavor::symplectic(1).unwrap()).len(), 2);
        assert_eq!(d.invariant_subspace(Flavor::orthogonal(4).unwrap()).len(), 3);
    }

    #[test]
    fn restricted_inverse_fixtures() {
        let d1 = SpectralDecomposition::auto(1).unwrap();
        let v = PairingVector::new(1, ints(&[1])).unwrap();
        let w = d1.restricted_inverse_apply(Flavor::orthogonal(3).unwrap(), &v).unwrap();
        assert_eq!(w.coords, vec![frac(1, 3)]);

        let d2 = SpectralDecomposition::auto(2).unwrap();
        let sp = Flavor::symplectic(1).unwrap();
        let v = PairingVector::new(2, ints(&[1, -1, 0])).unwrap();
        let w = d2.restricted_inverse_apply(sp, &v).unwrap();
        assert_eq!(w.coords, vec![frac(1, 6), frac(-1, 6), int(0)]);

        let o1 = Flavor::orthogonal(1).unwrap();
        let v = PairingVector::new(2, ints(&[1, 1, 1])).unwrap();
        let w = d2.restricted_inverse_apply(o1, &v).unwrap();
        assert_eq!(w.coords, vec![frac(1, 3); 3]);

        let outside = PairingVector::new(2, ints(&[1, 0, 0])).unwrap();
        assert!(matches!(d2.restricted_inverse_apply(o1, &outside), Err(Error::Domain(_))));
    }

    #[test]
    fn vector_length_is_checked() {
        assert!(PairingVector::new(2, ints(&[1, 2])).is_err());
        assert!(PairingVector::zero(3).unwrap().is_zero());
    }
}
