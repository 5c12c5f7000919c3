//! Recovering an invariant tensor Ω from its contractions Ω(Δ_P) by solving
//! M(n,x)·c = data on the admitted blocks.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::loop_matrix::{Flavor, PairingVector, SpectralDecomposition};
use crate::pairings::PairingBasis;
use crate::rational::{self, Rational};
use crate::tensor_oracle::{contract, diagonal_multivector, form_tensor, BilinearSpace, DenseTensor};

/// An invariant 2n-form together with its coordinates over the α_P / ω_P.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantTensor {
    pub n: usize,
    pub flavor: Flavor,
    pub coordinates: PairingVector,
    pub tensor: DenseTensor,
}

/// The sign in front of Ω(Δ_P) in the nodal splitting relation. It depends on
/// orientation conventions for odd classes, so callers must state it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodalSign {
    Plus,
    Minus,
}

impl NodalSign {
    pub fn value(self) -> Rational {
        match self {
            NodalSign::Plus => Rational::one(),
            NodalSign::Minus => -Rational::one(),
        }
    }
}

/// Solver for one (n, space). Builds the pairing tensors and the block
/// decomposition once.
#[derive(Debug, Clone)]
pub struct NodeTrader {
    n: usize,
    space: BilinearSpace,
    decomposition: SpectralDecomposition,
    forms: Vec<DenseTensor>,
    deltas: Vec<DenseTensor>,
}

impl NodeTrader {
    pub fn new(n: usize, space: BilinearSpace) -> Result<Self> {
        let basis = PairingBasis::new(n)?;
        let forms = basis
            .pairings()
            .iter()
            .map(|p| form_tensor(p, &space))
            .collect::<Result<Vec<_>>>()?;
        let deltas = basis
            .pairings()
            .iter()
            .map(|p| diagonal_multivector(p, &space))
            .collect::<Result<Vec<_>>>()?;
        let decomposition = SpectralDecomposition::auto(n)?;
        Ok(NodeTrader {
            n,
            space,
            decomposition,
            forms,
            deltas,
        })
    }

    /// Solver for a given number of primitive insertions. Odd counts are
    /// refused: there are no nonzero invariants in odd tensor degree.
    pub fn for_insertions(count: usize, space: BilinearSpace) -> Result<Self> {
        if count == 0 || count % 2 == 1 {
            return Err(Error::invalid(format!(
                "{count} primitive insertions: the invariant vanishes for odd counts and the trade needs at least two"
            )));
        }
        NodeTrader::new(count / 2, space)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> &BilinearSpace {
        &self.space
    }

    pub fn flavor(&self) -> Flavor {
        self.space.flavor()
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    /// Σ_P c_P α_P (or ω_P).
    pub fn expand(&self, coordinates: &PairingVector) -> Result<InvariantTensor> {
        if coordinates.n != self.n || coordinates.len() != self.forms.len() {
            return Err(Error::invalid("coordinate vector does not match the solver's n"));
        }
        let mut tensor = DenseTensor::zeros(self.space.dim(), 2 * self.n)?;
        for (c, f) in coordinates.coords.iter().zip(&self.forms) {
            tensor.add_scaled(f, c)?;
        }
        Ok(InvariantTensor {
            n: self.n,
            flavor: self.flavor(),
            coordinates: coordinates.clone(),
            tensor,
        })
    }

    fn check_tensor(&self, omega: &DenseTensor) -> Result<()> {
        if omega.dim != self.space.dim() || omega.order != 2 * self.n {
            return Err(Error::invalid(format!(
                "expected an order-{} tensor over dimension {}, got order {} over dimension {}",
                2 * self.n,
                self.space.dim(),
                omega.order,
                omega.dim
            )));
        }
        Ok(())
    }

    /// (Ω(Δ_P))_P in pairing order.
    pub fn contract_with_all_diagonals(&self, omega: &DenseTensor) -> Result<PairingVector> {
        self.check_tensor(omega)?;
        let coords = self
            .deltas
            .iter()
            .map(|d| contract(omega, d))
            .collect::<Result<Vec<_>>>()?;
        PairingVector::new(self.n, coords)
    }

    /// The unique invariant Ω whose diagonal contractions are `contractions`.
    pub fn recover(&self, contractions: &PairingVector) -> Result<InvariantTensor> {
        let flavor = self.flavor();
        let bad = self.decomposition.inadmissible_support(flavor, contractions)?;
        if !bad.is_empty() {
            let names: Vec<String> = bad.iter().map(ToString::to_string).collect();
            return Err(Error::Inconsistent(format!(
                "contractions have components in blocks {} that no {} invariant with k = {} can produce",
                names.join(", "),
                flavor.name(),
                flavor.k()
            )));
        }
        let coordinates = self.decomposition.restricted_inverse_apply(flavor, contractions)?;
        self.expand(&coordinates)
    }

    /// Componentwise recovery for vector-valued data.
    pub fn recover_batch(&self, batch: &[PairingVector]) -> Result<Vec<InvariantTensor>> {
        batch.iter().map(|v| self.recover(v)).collect()
    }

    /// Turns nodal invariants into contractions: Ω(Δ_P) = sign·(nodal_P − correction_P),
    /// where the correction collects the Künneth terms with a simple class.
    pub fn contractions_from_nodal(
        &self,
        nodal: &PairingVector,
        correction: &PairingVector,
        sign: NodalSign,
    ) -> Result<PairingVector> {
        if nodal.n != self.n || correction.n != self.n || nodal.len() != correction.len() {
            return Err(Error::invalid("nodal data and correction must both live in C P_n"));
        }
        let s = sign.value();
        let coords = nodal
            .coords
            .iter()
            .zip(&correction.coords)
            .map(|(a, b)| (a - b) * &s)
            .collect();
        PairingVector::new(self.n, coords)
    }

    pub fn recover_from_nodal(
        &self,
        nodal: &PairingVector,
        correction: &PairingVector,
        sign: NodalSign,
    ) -> Result<InvariantTensor> {
        self.recover(&self.contractions_from_nodal(nodal, correction, sign)?)
    }

    /// Checks Ω against a finite generating set of the group. Passing is
    /// evidence, not proof, of invariance.
    pub fn spot_check_invariance(&self, omega: &DenseTensor) -> Result<()> {
        self.check_tensor(omega)?;
        for (name, g) in spot_check_generators(&self.space)? {
            if omega.pullback(&g)? != *omega {
                return Err(Error::Inconsistent(format!(
                    "tensor is not invariant under {name}"
                )));
            }
        }
        Ok(())
    }
}

/// Named group elements used by [`NodeTrader::spot_check_invariance`]:
/// −Id plus reflections (orthogonal) or transvections (symplectic).
pub fn spot_check_generators(space: &BilinearSpace) -> Result<Vec<(String, Matrix)>> {
    let dim = space.dim();
    let unit = |i: usize| {
        let mut v = vec![Rational::zero(); dim];
        v[i] = Rational::one();
        v
    };
    let combo = |i: usize, a: i64, j: usize, b: i64| {
        let mut v = vec![Rational::zero(); dim];
        v[i] += rational::int(a);
        v[j] += rational::int(b);
        v
    };
    let mut directions = Vec::new();
    for i in 0..dim {
        directions.push((format!("e{i}"), unit(i)));
        for j in i + 1..dim {
            directions.push((format!("e{i}+e{j}"), combo(i, 1, j, 1)));
            directions.push((format!("e{i}-2e{j}"), combo(i, 1, j, -2)));
        }
    }
    let mut out = vec![(
        "-Id".to_string(),
        Matrix::identity(dim).scale(&-Rational::one()),
    )];
    for (label, v) in directions {
        let g = match space.flavor() {
            Flavor::Orthogonal { .. } => {
                let norm = space.pair(&v, &v)?;
                let mut cols = Vec::with_capacity(dim);
                for i in 0..dim {
                    let w = unit(i);
                    let c = space.pair(&w, &v)? * rational::int(2) / &norm;
                    cols.push(w.iter().zip(&v).map(|(a, b)| a - &c * b).collect());
                }
                (format!("reflection in {label}"), Matrix::from_columns(&cols, dim)?)
            }
            Flavor::Symplectic { .. } => {
                let mut cols = Vec::with_capacity(dim);
                for i in 0..dim {
                    let w = unit(i);
                    let c = space.pair(&w, &v)?;
                    cols.push(w.iter().zip(&v).map(|(a, b)| a + &c * b).collect());
                }
                (format!("transvection along {label}"), Matrix::from_columns(&cols, dim)?)
            }
        };
        out.push(g);
    }
    Ok(out)
}
