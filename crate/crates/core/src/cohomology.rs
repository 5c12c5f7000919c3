//! Finite cohomology models with a Poincaré pairing, the Künneth diagonal,
//! node splitting and the divisor equation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisClass {
    pub label: String,
    /// Real cohomological degree.
    pub degree: u32,
}

/// On-disk form of a ring model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingModel {
    pub name: String,
    pub top_degree: u32,
    pub basis: Vec<BasisClass>,
    #[serde(with = "rational::matrix_as_strings")]
    pub pairing: Vec<Vec<Rational>>,
    #[serde(default)]
    pub curve_classes: Vec<String>,
    /// divisor label -> curve generator -> intersection number
    #[serde(default)]
    pub intersections: BTreeMap<String, BTreeMap<String, String>>,
}

const BUNDLED: &[(&str, &str)] = &[
    ("p2", include_str!("../data/rings/p2.json")),
    ("f1", include_str!("../data/rings/f1.json")),
    ("elliptic", include_str!("../data/rings/elliptic.json")),
    ("point", include_str!("../data/rings/point.json")),
    ("p1", include_str!("../data/rings/p1.json")),
];

/// A class as a rational combination of basis elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassExpr {
    pub coeffs: Vec<Rational>,
}

impl ClassExpr {
    pub fn zero(dim: usize) -> Self {
        ClassExpr {
            coeffs: vec![Rational::zero(); dim],
        }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut e = Self::zero(dim);
        e.coeffs[i] = Rational::one();
        e
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        ClassExpr {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &ClassExpr) -> Self {
        ClassExpr {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    /// Nonzero (basis index, coefficient) pairs.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }
}

/// A curve class as integer coordinates over the ring's curve generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CurveClass(pub Vec<i64>);

impl CurveClass {
    pub fn zero(gens: usize) -> Self {
        CurveClass(vec![0; gens])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &CurveClass) -> CurveClass {
        CurveClass(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn is_effective_coordinatewise(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohRing {
    name: String,
    top_degree: u32,
    basis: Vec<BasisClass>,
    pairing: Matrix,
    inverse: Matrix,
    curve_generators: Vec<String>,
    // basis index -> curve generator -> number; only divisor rows are nonzero
    intersections: Vec<Vec<Rational>>,
}

impl CohRing {
    pub fn from_model(model: RingModel) -> Result<Self> {
        let dim = model.basis.len();
        if dim == 0 {
            return Err(Error::InvalidModel(format!("ring {} has an empty basis", model.name)));
        }
        let mut labels: Vec<&str> = model.basis.iter().map(|b| b.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel(format!("ring {} repeats a basis label", model.name)));
        }
        let pairing = Matrix::from_rows(model.pairing.clone())
            .map_err(|e| Error::InvalidModel(format!("ring {}: {e}", model.name)))?;
        if pairing.rows() != dim || pairing.cols() != dim {
            return Err(Error::InvalidModel(format!(
                "ring {}: pairing must be {dim}x{dim}",
                model.name
            )));
        }
        for i in 0..dim {
            for j in 0..dim {
                let complementary = model.basis[i].degree + model.basis[j].degree == model.top_degree;
                if !pairing[(i, j)].is_zero() && !complementary {
                    return Err(Error::InvalidModel(format!(
                        "ring {}: pairing of {} and {} is nonzero but degrees are not complementary",
                        model.name, model.basis[i].label, model.basis[j].label
                    )));
                }
            }
        }
        let inverse = pairing
            .inverse()
            .map_err(|_| Error::InvalidModel(format!("ring {}: pairing is degenerate", model.name)))?;
        let gens = model.curve_classes.len();
        let mut intersections = vec![vec![Rational::zero(); gens]; dim];
        for (div, row) in &model.intersections {
            let i = model
                .basis
                .iter()
                .position(|b| &b.label == div)
                .ok_or_else(|| Error::InvalidModel(format!("ring {}: unknown divisor {div}", model.name)))?;
            if model.basis[i].degree != 2 {
                return Err(Error::InvalidModel(format!(
                    "ring {}: {div} has degree {}, divisor classes have degree 2",
                    model.name, model.basis[i].degree
                )));
            }
            for (gen, value) in row {
                let g = model.curve_classes.iter().position(|c| c == gen).ok_or_else(|| {
                    Error::InvalidModel(format!("ring {}: unknown curve generator {gen}", model.name))
                })?;
                intersections[i][g] = rational::parse(value)
                    .map_err(|e| Error::InvalidModel(format!("ring {}: {e}", model.name)))?;
            }
        }
        Ok(CohRing {
            name: model.name,
            top_degree: model.top_degree,
            basis: model.basis,
            pairing,
            inverse,
            curve_generators: model.curve_classes,
            intersections,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: RingModel =
            serde_json::from_str(text).map_err(|e| Error::InvalidModel(format!("ring JSON: {e}")))?;
        Self::from_model(model)
    }

    /// One of the shipped models: p2, f1, elliptic, point, p1.
    pub fn bundled(name: &str) -> Result<Self> {
        let (_, text) = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::MissingData(format!("ring model {name}")))?;
        Self::from_json(text)
    }

    pub fn bundled_names() -> Vec<&'static str> {
        BUNDLED.iter().map(|(n, _)| *n).collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn top_degree(&self) -> u32 {
        self.top_degree
    }

    pub fn basis(&self) -> &[BasisClass] {
        &self.basis
    }

    pub fn label(&self, i: usize) -> &str {
        &self.basis[i].label
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.basis[i].degree
    }

    pub fn pairing_matrix(&self) -> &Matrix {
        &self.pairing
    }

    pub fn curve_generators(&self) -> &[String] {
        &self.curve_generators
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.basis
            .iter()
            .position(|b| b.label == label)
            .ok_or_else(|| Error::invalid(format!("ring {} has no class {label}", self.name)))
    }

    pub fn unit(&self, label: &str) -> Result<ClassExpr> {
        Ok(ClassExpr::basis(self.dim(), self.index_of(label)?))
    }

    /// ⟨u, v⟩ = uᵀ G v.
    pub fn pair(&self, u: &ClassExpr, v: &ClassExpr) -> Result<Rational> {
        let gv = self.pairing.mul_vec(&v.coeffs)?;
        Ok(u.coeffs.iter().zip(&gv).map(|(a, b)| a * b).sum())
    }

    /// Parses a linear combination of basis labels such as `D0+3F` or `-b`.
    pub fn class(&self, text: &str) -> Result<ClassExpr> {
        let mut out = ClassExpr::zero(self.dim());
        for (coeff, label) in split_terms(text)? {
            match label {
                Some(l) => out.coeffs[self.index_of(l)?] += coeff,
                None if coeff.is_zero() => {}
                None => {
                    return Err(Error::invalid(format!("bare number in class expression `{text}`")));
                }
            }
        }
        Ok(out)
    }

    /// Parses a curve class over the curve generators, e.g. `D0+3F` or `2L`.
    pub fn curve_class(&self, text: &str) -> Result<CurveClass> {
        let mut out = CurveClass::zero(self.curve_generators.len());
        for (coeff, label) in split_terms(text)? {
            if !coeff.is_integer() {
                return Err(Error::invalid(format!("curve class `{text}` needs integer coefficients")));
            }
            let c = i64::try_from(coeff.to_integer())
                .map_err(|_| Error::invalid(format!("coefficient too large in `{text}`")))?;
            match label {
                Some(l) => {
                    let g = self
                        .curve_generators
                        .iter()
                        .position(|x| x == l)
                        .ok_or_else(|| Error::invalid(format!("ring {} has no curve generator {l}", self.name)))?;
                    out.0[g] += c;
                }
                None if c == 0 => {}
                None => return Err(Error::invalid(format!("bare number in curve class `{text}`"))),
            }
        }
        Ok(out)
    }

    pub fn format_class(&self, e: &ClassExpr) -> String {
        format_combination(e.terms().map(|(i, c)| (c.clone(), self.label(i))))
    }

    pub fn format_curve(&self, c: &CurveClass) -> String {
        format_combination(
            c.0.iter()
                .zip(&self.curve_generators)
                .filter(|(v, _)| **v != 0)
                .map(|(v, g)| (rational::int(*v), g.as_str())),
        )
    }

    /// D·β for a divisor class D.
    pub fn intersect(&self, divisor: &ClassExpr, curve: &CurveClass) -> Result<Rational> {
        if curve.0.len() != self.curve_generators.len() {
            return Err(Error::invalid("curve class does not belong to this ring"));
        }
        let mut total = Rational::zero();
        for (i, c) in divisor.terms() {
            if self.degree(i) != 2 {
                return Err(Error::invalid(format!(
                    "{} has degree {}, not a divisor class",
                    self.label(i),
                    self.degree(i)
                )));
            }
            for (g, &k) in curve.0.iter().enumerate() {
                if k != 0 {
                    total += c * &self.intersections[i][g] * rational::int(k);
                }
            }
        }
        Ok(total)
    }

    /// δ_j^∨ = Σ_k (G⁻¹)_{kj} δ_k, so that ⟨δ_i, δ_j^∨⟩ = δ_ij.
    pub fn dual_basis(&self) -> Vec<ClassExpr> {
        (0..self.dim())
            .map(|j| ClassExpr {
                coeffs: self.inverse.column(j),
            })
            .collect()
    }
}

fn split_terms(text: &str) -> Result<Vec<(Rational, Option<&str>)>> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::invalid("empty class expression"));
    }
    let mut pieces = Vec::new();
    let mut start = 0;
    for (i, ch) in trimmed.char_indices() {
        if (ch == '+' || ch == '-') && i > start {
            pieces.push(&trimmed[start..i]);
            start = i;
        }
    }
    pieces.push(&trimmed[start..]);
    pieces
        .into_iter()
        .map(|piece| {
            let piece = piece.trim();
            let (negative, body) = match piece.chars().next() {
                Some('-') => (true, piece[1..].trim()),
                Some('+') => (false, piece[1..].trim()),
                _ => (false, piece),
            };
            if body.is_empty() {
                return Err(Error::invalid(format!("dangling sign in `{text}`")));
            }
            let split = body
                .find(|c: char| !(c.is_ascii_digit() || c == '/'))
                .unwrap_or(body.len());
            let (num, rest) = body.split_at(split);
            let rest = rest.trim_start_matches('*').trim();
            let (coeff, label) = match (num.is_empty(), rest.is_empty()) {
                (true, _) => (Rational::one(), Some(rest)),
                (false, true) => {
                    // a purely numeric token is a label if the ring has one
                    // such as "1"; callers resolve it
                    if num == "1" {
                        (Rational::one(), Some(num))
                    } else {
                        (rational::parse(num)?, None)
                    }
                }
                (false, false) => (rational::parse(num)?, Some(rest)),
            };
            Ok((if negative { -coeff } else { coeff }, label))
        })
        .collect()
}

fn format_combination<'a>(terms: impl Iterator<Item = (Rational, &'a str)>) -> String {
    let mut out = String::new();
    for (c, label) in terms {
        let negative = c < Rational::zero();
        let mag = if negative { -c } else { c };
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        if mag.is_one() {
            out.push_str(label);
        } else {
            let _ = write!(out, "{}{}", rational::format(&mag), label);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// One summand δ_j ⊗ δ_j^∨ of the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KunnethTerm {
    pub class: usize,
    pub dual: ClassExpr,
}

/// [Δ] = Σ_j δ_j ⊗ δ_j^∨.
pub fn kunneth_diagonal(ring: &CohRing) -> Vec<KunnethTerm> {
    ring.dual_basis()
        .into_iter()
        .enumerate()
        .map(|(class, dual)| KunnethTerm { class, dual })
        .collect()
}

/// The diagonal as Σ c·δ_j⊗δ_k over basis pairs.
pub fn diagonal_monomials(ring: &CohRing) -> Vec<(Rational, usize, usize)> {
    kunneth_diagonal(ring)
        .into_iter()
        .flat_map(|t| {
            let j = t.class;
            t.dual
                .terms()
                .map(move |(k, c)| (c.clone(), j, k))
                .collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Insertion {
    pub class: ClassExpr,
    pub psi: u32,
}

/// Insertions τ_{k_i}(α_i) in a fixed genus and curve class, plus a count of
/// nodes not yet split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertionList {
    pub genus: u32,
    pub curve_class: CurveClass,
    pub insertions: Vec<Insertion>,
    pub nodes: usize,
}

/// A monomial in basis classes: (basis index, psi power) per insertion.
pub type Monomial = Vec<(usize, u32)>;

impl InsertionList {
    pub fn new(genus: u32, curve_class: CurveClass, insertions: Vec<Insertion>, nodes: usize) -> Self {
        InsertionList {
            genus,
            curve_class,
            insertions,
            nodes,
        }
    }

    /// Multilinear expansion into basis monomials, in insertion order.
    pub fn monomials(&self) -> Vec<(Rational, Monomial)> {
        let mut acc: Vec<(Rational, Monomial)> = vec![(Rational::one(), Vec::new())];
        for ins in &self.insertions {
            let mut next = Vec::new();
            for (c, m) in &acc {
                for (i, a) in ins.class.terms() {
                    let mut m2 = m.clone();
                    m2.push((i, ins.psi));
                    next.push((c * a, m2));
                }
            }
            acc = next;
        }
        acc
    }

    /// Monomials reordered canonically with Koszul signs and like terms merged.
    pub fn canonical_monomials(&self, ring: &CohRing) -> BTreeMap<Monomial, Rational> {
        let mut out: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (c, m) in self.monomials() {
            let (sign, sorted) = koszul_sort(ring, &m);
            *out.entry(sorted).or_insert_with(Rational::zero) += c * rational::int(sign);
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
}

/// Stable sort of a monomial by (basis index, psi), returning the sign from
/// swapping adjacent odd-degree classes.
pub fn koszul_sort(ring: &CohRing, monomial: &[(usize, u32)]) -> (i64, Monomial) {
    let mut m = monomial.to_vec();
    let mut sign = 1;
    for i in 1..m.len() {
        let mut j = i;
        while j > 0 && m[j - 1] > m[j] {
            if ring.degree(m[j - 1].0) % 2 == 1 && ring.degree(m[j].0) % 2 == 1 {
                sign = -sign;
            }
            m.swap(j - 1, j);
            j -= 1;
        }
    }
    (sign, m)
}

/// Splits one node: a child per Künneth summand with δ_j and δ_j^∨ appended
/// (psi power 0) and the node count lowered. No automorphism factor is
/// applied here.
pub fn split_node(parent: &InsertionList, ring: &CohRing) -> Result<Vec<(Rational, InsertionList)>> {
    if parent.nodes == 0 {
        return Err(Error::invalid("no node left to split"));
    }
    Ok(kunneth_diagonal(ring)
        .into_iter()
        .map(|t| {
            let mut child = parent.clone();
            child.nodes -= 1;
            child.insertions.push(Insertion {
                class: ClassExpr::basis(ring.dim(), t.class),
                psi: 0,
            });
            child.insertions.push(Insertion {
                class: t.dual,
                psi: 0,
            });
            (Rational::one(), child)
        })
        .collect())
}

/// Removes the divisor insertion at `position`, returning (β·D, reduced term).
pub fn divisor_reduce(term: &InsertionList, position: usize, ring: &CohRing) -> Result<(Rational, InsertionList)> {
    let ins = term
        .insertions
        .get(position)
        .ok_or_else(|| Error::invalid(format!("no insertion at position {position}")))?;
    if ins.psi != 0 {
        return Err(Error::Unsupported(format!(
            "divisor insertion carries psi power {}; string and dilaton corrections are not implemented",
            ins.psi
        )));
    }
    let factor = ring.intersect(&ins.class, &term.curve_class)?;
    let mut reduced = term.clone();
    reduced.insertions.remove(position);
    Ok((factor, reduced))
}
