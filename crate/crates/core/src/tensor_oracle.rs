//! Brute-force multilinear oracle: the tensors α_P / ω_P and Δ_P on explicit
//! model spaces, full contraction, and the rank of P ↦ α_P.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Echelon, Matrix};
use crate::loop_matrix::{Flavor, PairingVector};
use crate::pairings::{Pairing, PairingBasis, Permutation};
use crate::rational::{self, Rational};

/// Largest coefficient count a dense tensor may have (6^6).
pub const TENSOR_CEILING: usize = 46_656;

/// V with its standard form. Orthogonal: identity on e_1..e_k. Symplectic:
/// basis (e_1, f_1, e_2, f_2, …) with ω(e_μ, f_μ) = 1 = −ω(f_μ, e_μ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilinearSpace {
    flavor: Flavor,
    form: Matrix,
}

impl BilinearSpace {
    pub fn new(flavor: Flavor) -> Self {
        let dim = flavor.dim();
        let form = Matrix::from_fn(dim, dim, |i, j| rational::int(standard_entry(flavor, i, j)));
        BilinearSpace { flavor, form }
    }

    pub fn orthogonal(k: usize) -> Result<Self> {
        Ok(Self::new(Flavor::orthogonal(k)?))
    }

    pub fn symplectic(k: usize) -> Result<Self> {
        Ok(Self::new(Flavor::symplectic(k)?))
    }

    /// Accepts an explicit form only if it is the standard one.
    pub fn with_form(flavor: Flavor, form: Matrix) -> Result<Self> {
        let space = Self::new(flavor);
        if form != space.form {
            return Err(Error::Unsupported(format!(
                "only the standard {} form in the standard basis is supported",
                flavor.name()
            )));
        }
        Ok(space)
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn dim(&self) -> usize {
        self.flavor.dim()
    }

    pub fn form(&self) -> &Matrix {
        &self.form
    }

    pub fn pair(&self, u: &[Rational], v: &[Rational]) -> Result<Rational> {
        let fv = self.form.mul_vec(v)?;
        if u.len() != fv.len() {
            return Err(Error::invalid("vector length does not match the space"));
        }
        Ok(u.iter().zip(&fv).map(|(a, b)| a * b).sum())
    }

    /// Nonzero (i, j, value) of the form.
    fn form_support(&self) -> Vec<(usize, usize, i64)> {
        support(self.dim(), |i, j| standard_entry(self.flavor, i, j))
    }

    /// Nonzero (i, j, value) of the inverse bivector placed in slots (a, b)
    /// with a < b. Orthogonal: Σ e_μ⊗e_μ. Symplectic: the decreasing-order
    /// bivector, whose matrix is −ω.
    fn bivector_support(&self) -> Vec<(usize, usize, i64)> {
        support(self.dim(), |i, j| match self.flavor {
            Flavor::Orthogonal { .. } => standard_entry(self.flavor, i, j),
            Flavor::Symplectic { .. } => -standard_entry(self.flavor, i, j),
        })
    }
}

fn standard_entry(flavor: Flavor, i: usize, j: usize) -> i64 {
    match flavor {
        Flavor::Orthogonal { .. } => i64::from(i == j),
        Flavor::Symplectic { .. } => {
            if i / 2 != j / 2 || i == j {
                0
            } else if i.is_multiple_of(2) {
                1
            } else {
                -1
            }
        }
    }
}

fn support(dim: usize, f: impl Fn(usize, usize) -> i64) -> Vec<(usize, usize, i64)> {
    let mut out = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            let v = f(i, j);
            if v != 0 {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Order-r coefficient array over a dim-dimensional space, slot-major
/// (slot 1 is the most significant digit of the flat index).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseTensor {
    pub dim: usize,
    pub order: usize,
    #[serde(with = "rational::vec_as_strings")]
    pub coeffs: Vec<Rational>,
}

impl DenseTensor {
    pub fn zeros(dim: usize, order: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("tensor dimension must be positive"));
        }
        let size = checked_size(dim, order)?;
        Ok(DenseTensor {
            dim,
            order,
            coeffs: vec![Rational::zero(); size],
        })
    }

    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<Rational>) -> Result<Self> {
        let size = checked_size(dim, order)?;
        if coeffs.len() != size {
            return Err(Error::invalid(format!(
                "order-{order} tensor over dimension {dim} needs {size} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(DenseTensor { dim, order, coeffs })
    }

    /// Number of slot pairs; only meaningful for even order.
    pub fn n(&self) -> usize {
        self.order / 2
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.order];
        for slot in (0..self.order).rev() {
            idx[slot] = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> &Rational {
        &self.coeffs[self.flat_index(idx)]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check_same_shape(&self, other: &DenseTensor) -> Result<()> {
        if self.dim != other.dim || self.order != other.order {
            return Err(Error::invalid(format!(
                "shape mismatch: (dim {}, order {}) vs (dim {}, order {})",
                self.dim, self.order, other.dim, other.order
            )));
        }
        Ok(())
    }

    pub fn add_scaled(&mut self, other: &DenseTensor, s: &Rational) -> Result<()> {
        self.check_same_shape(other)?;
        if s.is_zero() {
            return Ok(());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !b.is_zero() {
                *a += b * s;
            }
        }
        Ok(())
    }

    pub fn scale(&self, s: &Rational) -> DenseTensor {
        DenseTensor {
            dim: self.dim,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// (g·T)[i_1, …, i_r] = T[i_{g(1)}, …, i_{g(r)}].
    pub fn permute_slots(&self, g: &Permutation) -> Result<DenseTensor> {
        if g.degree() != self.order {
            return Err(Error::invalid("permutation degree differs from tensor order"));
        }
        let mut out = DenseTensor::zeros(self.dim, self.order)?;
        let mut src = vec![0; self.order];
        for flat in 0..self.coeffs.len() {
            let idx = self.multi_index(flat);
            for (s, slot) in src.iter_mut().enumerate() {
                *slot = idx[g.apply(s + 1) - 1];
            }
            out.coeffs[flat] = self.get(&src).clone();
        }
        Ok(out)
    }

    /// out[i_1..i_r] = Σ_j Π_s A[i_s][j_s] T[j_1..j_r], i.e. A applied to
    /// every slot. For a contravariant tensor this is the pushforward by A;
    /// for a covariant one, pass Aᵀ to get the pullback.
    pub fn transform(&self, a: &Matrix) -> Result<DenseTensor> {
        if a.rows() != self.dim || a.cols() != self.dim {
            return Err(Error::invalid("transformation matrix does not match the tensor dimension"));
        }
        let mut cur = self.coeffs.clone();
        let d = self.dim;
        for slot in 0..self.order {
            let stride = d.pow((self.order - 1 - slot) as u32);
            let mut next = vec![Rational::zero(); cur.len()];
            for (flat, value) in cur.iter().enumerate() {
                if value.is_zero() {
                    continue;
                }
                let j = (flat / stride) % d;
                let base = flat - j * stride;
                for i in 0..d {
                    let aij = &a[(i, j)];
                    if !aij.is_zero() {
                        next[base + i * stride] += aij * value;
                    }
                }
            }
            cur = next;
        }
        DenseTensor::from_coeffs(self.dim, self.order, cur)
    }

    /// Pullback T(A·, …, A·) of a covariant tensor.
    pub fn pullback(&self, a: &Matrix) -> Result<DenseTensor> {
        self.transform(&a.transpose())
    }
}

fn checked_size(dim: usize, order: usize) -> Result<usize> {
    let size = (0..order).try_fold(1usize, |acc, _| acc.checked_mul(dim).filter(|&s| s <= TENSOR_CEILING));
    size.ok_or_else(|| {
        Error::Resource(format!(
            "dense tensor of order {order} over dimension {dim} exceeds {TENSOR_CEILING} coefficients"
        ))
    })
}

/// Σ over support choices per pair: fills value·Π entries at the index
/// determined by the chosen (i, j) in slots (a, b).
fn product_tensor(
    p: &Pairing,
    dim: usize,
    entries: &[(usize, usize, i64)],
    sign: i64,
) -> Result<DenseTensor> {
    let mut t = DenseTensor::zeros(dim, 2 * p.n())?;
    let pairs = p.pairs();
    let mut choice = vec![0usize; pairs.len()];
    let mut idx = vec![0usize; 2 * p.n()];
    'outer: loop {
        let mut value = sign;
        for (&(a, b), &c) in pairs.iter().zip(&choice) {
            let (i, j, v) = entries[c];
            idx[a - 1] = i;
            idx[b - 1] = j;
            value *= v;
        }
        let flat = t.flat_index(&idx);
        t.coeffs[flat] = rational::int(value);
        for slot in (0..choice.len()).rev() {
            choice[slot] += 1;
            if choice[slot] < entries.len() {
                continue 'outer;
            }
            choice[slot] = 0;
        }
        break;
    }
    Ok(t)
}

fn crossing_sign(p: &Pairing, space: &BilinearSpace) -> i64 {
    match space.flavor {
        Flavor::Orthogonal { .. } => 1,
        Flavor::Symplectic { .. } => {
            if p.crossing_number().is_multiple_of(2) {
                1
            } else {
                -1
            }
        }
    }
}

/// α_P = Π α_p, or ω_P = (−1)^{c(P)} Π ω_p with each pair in increasing slot order.
pub fn form_tensor(p: &Pairing, space: &BilinearSpace) -> Result<DenseTensor> {
    product_tensor(p, space.dim(), &space.form_support(), crossing_sign(p, space))
}

/// Δ_P = ⊗ α_p^{-1}, or (−1)^{c(P)} ⊗ ω_p^{-1} with the bivector in decreasing order.
pub fn diagonal_multivector(p: &Pairing, space: &BilinearSpace) -> Result<DenseTensor> {
    product_tensor(p, space.dim(), &space.bivector_support(), crossing_sign(p, space))
}

/// Full slot-by-slot contraction of a covariant and a contravariant tensor.
pub fn contract(form: &DenseTensor, vec: &DenseTensor) -> Result<Rational> {
    form.check_same_shape(vec)?;
    let mut total = Rational::zero();
    for (a, b) in form.coeffs.iter().zip(&vec.coeffs) {
        if !a.is_zero() && !b.is_zero() {
            total += a * b;
        }
    }
    Ok(total)
}

fn check_oracle_scale(n: usize, space: &BilinearSpace) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    crate::check_desk_scale(n)?;
    checked_size(space.dim(), 2 * n).map(|_| ())
}

/// Entry (P, P′) = form_tensor(P)(diagonal_multivector(P′)).
pub fn diagonal_insertion_matrix(n: usize, space: &BilinearSpace) -> Result<Matrix> {
    check_oracle_scale(n, space)?;
    let basis = PairingBasis::new(n)?;
    let forms = basis
        .pairings()
        .iter()
        .map(|p| form_tensor(p, space))
        .collect::<Result<Vec<_>>>()?;
    let deltas = basis
        .pairings()
        .iter()
        .map(|p| diagonal_multivector(p, space))
        .collect::<Result<Vec<_>>>()?;
    let size = basis.len();
    let mut rows = vec![vec![Rational::zero(); size]; size];
    for (i, f) in forms.iter().enumerate() {
        for (j, d) in deltas.iter().enumerate() {
            rows[i][j] = contract(f, d)?;
        }
    }
    Matrix::from_rows(rows)
}

/// Checks the brute-force matrix against M(n, x) at the flavor's specialization.
pub fn verify_diagonal_insertion(n: usize, space: &BilinearSpace) -> Result<Matrix> {
    let brute = diagonal_insertion_matrix(n, space)?;
    let x = space.flavor().specialization();
    let expected = crate::loop_matrix::build_loop_matrix(n, &x)?.matrix;
    if brute != expected {
        let (r, c) = (0..brute.rows())
            .flat_map(|r| (0..brute.cols()).map(move |c| (r, c)))
            .find(|&(r, c)| brute[(r, c)] != expected[(r, c)])
            .unwrap_or((0, 0));
        return Err(Error::Verification {
            what: format!(
                "diagonal insertion matrix entry ({r},{c}) for n = {n}, {} k = {}",
                space.flavor().name(),
                space.flavor().k()
            ),
            expected: rational::format(&expected[(r, c)]),
            actual: rational::format(&brute[(r, c)]),
        });
    }
    Ok(brute)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantMapRank {
    pub rank: usize,
    pub kernel: Vec<PairingVector>,
}

/// Rank and kernel of the linear map ℂ𝒫_n → (V*)^{⊗2n}, P ↦ form_tensor(P).
pub fn invariant_map_rank(n: usize, space: &BilinearSpace) -> Result<InvariantMapRank> {
    check_oracle_scale(n, space)?;
    let basis = PairingBasis::new(n)?;
    let tensors = basis
        .pairings()
        .iter()
        .map(|p| form_tensor(p, space))
        .collect::<Result<Vec<_>>>()?;
    // only coordinates hit by some α_P matter
    let mut used: Vec<usize> = tensors
        .iter()
        .flat_map(|t| {
            t.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, _)| i)
        })
        .collect();
    used.sort_unstable();
    used.dedup();
    let a = Matrix::from_fn(used.len(), tensors.len(), |r, c| tensors[c].coeffs[used[r]].clone());
    let ech = Echelon::reduce(&a);
    let kernel = ech
        .kernel()
        .into_iter()
        .map(|coords| PairingVector { n, coords })
        .collect();
    Ok(InvariantMapRank {
        rank: ech.rank(),
        kernel,
    })
}

/// ½(T + (−Id)^*T), computed by actually pulling back along −Id.
pub fn average_over_minus_identity(t: &DenseTensor) -> Result<DenseTensor> {
    let minus = Matrix::identity(t.dim).scale(&-Rational::one());
    let mut out = t.pullback(&minus)?;
    out.add_scaled(t, &Rational::one())?;
    Ok(out.scale(&rational::frac(1, 2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn pr(pairs: &[(usize, usize)]) -> Pairing {
        Pairing::new(pairs.to_vec()).unwrap()
    }

    #[test]
    fn n1_tensors() {
        let o = BilinearSpace::orthogonal(1).unwrap();
        assert_eq!(form_tensor(&pr(&[(1, 2)]), &o).unwrap().coeffs, vec![int(1)]);
        let s = BilinearSpace::symplectic(1).unwrap();
        let w = form_tensor(&pr(&[(1, 2)]), &s).unwrap();
        assert_eq!(w.coeffs, vec![int(0), int(1), int(-1), int(0)]);
        let d = diagonal_multivector(&pr(&[(1, 2)]), &s).unwrap();
        assert_eq!(d.coeffs, vec![int(0), int(-1), int(1), int(0)]);
        let o2 = BilinearSpace::orthogonal(2).unwrap();
        let d = diagonal_multivector(&pr(&[(1, 2)]), &o2).unwrap();
        assert_eq!(d.coeffs, vec![int(1), int(0), int(0), int(1)]);
    }

    #[test]
    fn crossing_sign_on_symplectic() {
        let s = BilinearSpace::symplectic(1).unwrap();
        let crossed = form_tensor(&pr(&[(1, 3), (2, 4)]), &s).unwrap();
        // slots (e, e, f, f): ω(e,f)·ω(e,f) with global sign −1
        assert_eq!(*crossed.get(&[0, 0, 1, 1]), int(-1));
    }

    #[test]
    fn nested_delta_is_slotwise_product() {
        for space in [BilinearSpace::orthogonal(2).unwrap(), BilinearSpace::symplectic(1).unwrap()] {
            let one = diagonal_multivector(&pr(&[(1, 2)]), &space).unwrap();
            let two = diagonal_multivector(&pr(&[(1, 2), (3, 4)]), &space).unwrap();
            for flat in 0..two.coeffs.len() {
                let idx = two.multi_index(flat);
                let expected = one.get(&idx[..2]) * one.get(&idx[2..]);
                assert_eq!(two.coeffs[flat], expected);
            }
        }
    }

    #[test]
    fn single_pair_contractions() {
        for k in 1..=4 {
            let o = BilinearSpace::orthogonal(k).unwrap();
            let p = pr(&[(1, 2)]);
            let v = contract(&form_tensor(&p, &o).unwrap(), &diagonal_multivector(&p, &o).unwrap()).unwrap();
            assert_eq!(v, int(k as i64));
        }
        for k in 1..=3 {
            let s = BilinearSpace::symplectic(k).unwrap();
            let p = pr(&[(1, 2)]);
            let v = contract(&form_tensor(&p, &s).unwrap(), &diagonal_multivector(&p, &s).unwrap()).unwrap();
            assert_eq!(v, int(-2 * k as i64));
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = DenseTensor::zeros(2, 2).unwrap();
        let b = DenseTensor::zeros(3, 2).unwrap();
        assert!(contract(&a, &b).is_err());
        assert!(matches!(DenseTensor::zeros(7, 6), Err(Error::Resource(_))));
    }

    #[test]
    fn non_standard_form_is_rejected() {
        let f = Flavor::orthogonal(2).unwrap();
        let form = Matrix::identity(2).scale(&int(2));
        assert!(matches!(BilinearSpace::with_form(f, form), Err(Error::Unsupported(_))));
        assert!(BilinearSpace::with_form(f, Matrix::identity(2)).is_ok());
    }

    #[test]
    fn diagonal_matrix_fixtures() {
        let o3 = BilinearSpace::orthogonal(3).unwrap();
        let m = diagonal_insertion_matrix(2, &o3).unwrap();
        let ints = |v: [i64; 3]| v.iter().map(|&x| int(x)).collect::<Vec<_>>();
        assert_eq!(m.to_rows(), vec![ints([9, 3, 3]), ints([3, 9, 3]), ints([3, 3, 9])]);
        let s1 = BilinearSpace::symplectic(1).unwrap();
        let m = diagonal_insertion_matrix(2, &s1).unwrap();
        assert_eq!(m.to_rows(), vec![ints([4, -2, -2]), ints([-2, 4, -2]), ints([-2, -2, 4])]);
        let o1 = BilinearSpace::orthogonal(1).unwrap();
        assert_eq!(diagonal_insertion_matrix(1, &o1).unwrap().to_rows(), vec![vec![int(1)]]);
    }

    #[test]
    fn rank_fixtures() {
        let r = invariant_map_rank(2, &BilinearSpace::orthogonal(1).unwrap()).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.kernel.len(), 2);
        let r = invariant_map_rank(2, &BilinearSpace::symplectic(1).unwrap()).unwrap();
        assert_eq!(r.rank, 2);
        assert_eq!(r.kernel.len(), 1);
        assert_eq!(r.kernel[0].coords, vec![int(1); 3]);
        let r = invariant_map_rank(2, &BilinearSpace::orthogonal(4).unwrap()).unwrap();
        assert_eq!((r.rank, r.kernel.len()), (3, 0));
    }

    #[test]
    fn transform_by_identity_is_noop() {
        let s = BilinearSpace::symplectic(1).unwrap();
        let t = form_tensor(&pr(&[(1, 3), (2, 4)]), &s).unwrap();
        assert_eq!(t.transform(&Matrix::identity(2)).unwrap(), t);
    }
}
