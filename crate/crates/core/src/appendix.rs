//! The one-loop plane cubic through 8 points, computed by splitting the loop
//! directly and by degenerating ℙ² to ℙ² ∪ F₁, plus the genus-one warm-up on
//! an elliptic curve.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::cohomology::{divisor_reduce, split_node, ClassExpr, CohRing, CurveClass, Insertion, InsertionList};
use crate::error::{Error, Result};
use crate::gw_oracle::{kontsevich_nd, pencil_reducible_count, OracleTable};
use crate::linalg::Matrix;
use crate::loop_matrix::PairingVector;
use crate::node_trade::{NodalSign, NodeTrader};
use crate::rational::{self, Rational};
use crate::stable_graphs::{
    degeneration_sum, relative_key, DegenerationSum, PlacementKind, Scenario, Splitting, TabledRelativeOracle,
};
use crate::tensor_oracle::BilinearSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(into = "String")]
pub enum CaseId {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

impl CaseId {
    pub const ALL: [CaseId; 8] = [
        CaseId::I,
        CaseId::II,
        CaseId::III,
        CaseId::IV,
        CaseId::V,
        CaseId::VI,
        CaseId::VII,
        CaseId::VIII,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::I => "i",
            CaseId::II => "ii",
            CaseId::III => "iii",
            CaseId::IV => "iv",
            CaseId::V => "v",
            CaseId::VI => "vi",
            CaseId::VII => "vii",
            CaseId::VIII => "viii",
        }
    }

    /// (decomposition id, side carrying the parent loop, placement kind).
    fn shape(self) -> (&'static str, usize, PlacementKind) {
        use PlacementKind::{Bridge, Loop};
        match self {
            CaseId::I => ("A", 2, Bridge),
            CaseId::II => ("C", 1, Bridge),
            CaseId::III => ("B", 2, Loop),
            CaseId::IV => ("B", 1, Loop),
            CaseId::V => ("A", 2, Loop),
            CaseId::VI => ("A", 1, Loop),
            CaseId::VII => ("C", 1, Loop),
            CaseId::VIII => ("C", 2, Loop),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<CaseId> for String {
    fn from(c: CaseId) -> String {
        c.as_str().to_string()
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::invalid(format!("unknown case `{s}`; expected one of i..viii")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factor {
    pub name: String,
    #[serde(with = "rational::as_string")]
    pub value: Rational,
    /// per-vertex summands for divisor factors, e.g. "3+0"
    pub detail: String,
    pub provenance: String,
}

impl Factor {
    fn new(name: &str, value: Rational, detail: String, provenance: &str) -> Self {
        Factor {
            name: name.to_string(),
            value,
            detail,
            provenance: provenance.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Contribution {
    pub case: CaseId,
    pub splitting: String,
    pub factors: Vec<Factor>,
    #[serde(with = "rational::as_string")]
    pub value: Rational,
}

impl Contribution {
    pub fn factor(&self, name: &str) -> Option<&Factor> {
        self.factors.iter().find(|f| f.name == name)
    }

    /// "1 × 3 × 1/2 × 5 × 1 = 15/2"
    pub fn formula(&self) -> String {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|f| {
                if f.detail.contains('+') {
                    format!("({})", f.detail)
                } else {
                    rational::format(&f.value)
                }
            })
            .collect();
        format!("{} = {}", parts.join(" × "), rational::format(&self.value))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LhsTerm {
    pub kunneth: String,
    #[serde(with = "rational::as_string")]
    pub divisor_factor: Rational,
    #[serde(with = "rational::as_string")]
    pub invariant: Rational,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LhsReport {
    pub points: usize,
    pub nodes: usize,
    #[serde(with = "rational::as_string")]
    pub prefactor: Rational,
    pub terms: Vec<LhsTerm>,
    #[serde(with = "rational::as_string")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    #[serde(with = "rational::as_string")]
    pub lhs: Rational,
    pub contributions: Vec<Contribution>,
    #[serde(with = "rational::as_string")]
    pub rhs_total: Rational,
    pub degeneration: DegenerationSum,
    pub agreement: bool,
}

/// The worked example: scenario, enumerated splittings and the count table.
#[derive(Debug, Clone)]
pub struct AppendixCase {
    scenario: Scenario,
    splittings: Vec<Splitting>,
    table: OracleTable,
    p2: CohRing,
    f1: CohRing,
    d: CohRing,
}

impl AppendixCase {
    pub fn new() -> Result<Self> {
        Self::with_table(OracleTable::bundled())
    }

    pub fn with_table(table: OracleTable) -> Result<Self> {
        let scenario = Scenario::bundled_appendix();
        let splittings = scenario.enumerate()?;
        Ok(AppendixCase {
            scenario,
            splittings,
            table,
            p2: CohRing::bundled("p2")?,
            f1: CohRing::bundled("f1")?,
            d: CohRing::bundled("p1")?,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn splittings(&self) -> &[Splitting] {
        &self.splittings
    }

    pub fn table(&self) -> &OracleTable {
        &self.table
    }

    pub fn splitting(&self, case: CaseId) -> Result<&Splitting> {
        let (dec, side, kind) = case.shape();
        self.splittings
            .iter()
            .find(|s| s.decomposition == dec && s.placements.iter().all(|p| p.side == side && p.kind == kind))
            .ok_or_else(|| Error::InternalConsistency(format!("no enumerated splitting for case {case}")))
    }

    pub fn case_of(&self, splitting: &Splitting) -> Option<CaseId> {
        CaseId::ALL
            .into_iter()
            .find(|&c| self.splitting(c).is_ok_and(|s| s.label == splitting.label))
    }

    fn ring(&self, side: usize) -> &CohRing {
        if side == 1 {
            &self.f1
        } else {
            &self.p2
        }
    }

    fn table_factor(&self, name: &str, key: &str) -> Result<Factor> {
        let entry = self.table.lookup(key)?;
        Ok(Factor::new(name, entry.value.clone(), key.to_string(), &entry.provenance))
    }

    /// ⟨∏ τ₀(p)⟩ with the loop split by the Künneth diagonal of ℙ².
    pub fn compute_lhs(&self) -> Result<Rational> {
        Ok(self.lhs_report(8, 1)?.value)
    }

    /// Cubic class with `points` point insertions and `nodes` ∈ {0, 1} loops.
    pub fn lhs_report(&self, points: usize, nodes: usize) -> Result<LhsReport> {
        if nodes > 1 {
            return Err(Error::Unsupported("at most one imposed node".into()));
        }
        let ring = &self.p2;
        let pt = ring.unit("p")?;
        let base = InsertionList::new(
            0,
            ring.curve_class("3L")?,
            vec![Insertion { class: pt, psi: 0 }; points],
            nodes,
        );
        let (prefactor, children) = if nodes == 1 {
            (rational::frac(1, 2), split_node(&base, ring)?)
        } else {
            (Rational::one(), vec![(Rational::one(), base)])
        };
        let mut terms = Vec::new();
        let mut total = Rational::zero();
        for (coeff, child) in children {
            let appended: Vec<String> = child.insertions[points..]
                .iter()
                .map(|i| ring.format_class(&i.class))
                .collect();
            let (factor, invariant, source) = self.evaluate_p2(&child)?;
            total += &coeff * &factor * &invariant;
            terms.push(LhsTerm {
                kunneth: if appended.is_empty() {
                    "none".into()
                } else {
                    appended.join("⊗")
                },
                divisor_factor: coeff * factor,
                invariant,
                source,
            });
        }
        Ok(LhsReport {
            points,
            nodes,
            value: &prefactor * total,
            prefactor,
            terms,
        })
    }

    /// Genus-0 invariant of ℙ² with insertions from {1, H, p}: divisors are
    /// removed by the divisor equation, then points are counted.
    fn evaluate_p2(&self, term: &InsertionList) -> Result<(Rational, Rational, String)> {
        let ring = &self.p2;
        let mut factor = Rational::one();
        let mut current = term.clone();
        while let Some(pos) = current.insertions.iter().position(|i| {
            let t: Vec<_> = i.class.terms().collect();
            t.len() == 1 && ring.degree(t[0].0) == 2
        }) {
            let (f, reduced) = divisor_reduce(&current, pos, ring)?;
            factor *= f;
            current = reduced;
        }
        let mut units = 0usize;
        let mut points = 0usize;
        for ins in &current.insertions {
            let t: Vec<_> = ins.class.terms().collect();
            match t.as_slice() {
                [(i, c)] if c.is_one() && ring.degree(*i) == 0 => units += 1,
                [(i, c)] if c.is_one() && ring.degree(*i) == 4 => points += 1,
                _ => {
                    return Err(Error::Unsupported(format!(
                        "insertion {} is not a basis class",
                        ring.format_class(&ins.class)
                    )))
                }
            }
        }
        let d = usize::try_from(current.curve_class.0[0]).map_err(|_| Error::invalid("negative degree"))?;
        if units == 0 && points == 3 * d - 1 {
            let n = Rational::from_integer(kontsevich_nd(d)?);
            return Ok((factor, n, format!("kontsevich N_{d}")));
        }
        if points != 3 * d - 1 + units {
            return Ok((factor, Rational::zero(), "dimension".into()));
        }
        let name = match d {
            1 => "line",
            2 => "conic",
            3 => "cubic",
            _ => return Err(Error::Unsupported(format!("degree {d} with unit insertions"))),
        };
        let key = format!("p2.{name}.{points}pts");
        Ok((factor, self.table.value(&key)?, key))
    }

    /// Σ over the vertices of the loop's side of Σ_{δ⊗δ^∨ divisorial} (β·δ)(β·δ^∨).
    /// Künneth terms containing the unit class vanish.
    pub fn loop_divisor_factor(&self, splitting: &Splitting, side: usize) -> Result<(Rational, Vec<Rational>)> {
        let ring = self.ring(side);
        let mut per_vertex = Vec::new();
        for v in splitting.gamma(side).vertices() {
            per_vertex.push(divisor_factor_for_class(ring, &v.class)?);
        }
        let total = per_vertex.iter().fold(Rational::zero(), |a, b| a + b);
        Ok((total, per_vertex))
    }

    fn euler_characteristic(ring: &CohRing) -> i64 {
        (0..ring.dim()).map(|i| if ring.degree(i).is_multiple_of(2) { 1 } else { -1 }).sum()
    }

    /// Enumerative factors of the two sides before any loop treatment.
    fn side_counts(&self, decomposition: &str) -> Result<(Factor, Factor)> {
        match decomposition {
            "A" => {
                let chi = Self::euler_characteristic(&self.p2);
                let pairs = pencil_reducible_count(chi, 4)?;
                Ok((
                    self.table_factor("F1 count", "f1.D0+3F.6pts")?,
                    Factor::new(
                        "P2 count",
                        rational::int(pairs),
                        format!("chi(P2)={chi}, 4 base points"),
                        "line pairs in the pencil of conics through 4 points, from the Euler characteristic of the blow-up",
                    ),
                ))
            }
            "B" => Ok((
                self.table_factor("F1 count", "f1.D0+3F.4pts.tangentD0.fixedpt")?,
                self.table_factor("P2 count", "p2.conic.4pts.tangentL")?,
            )),
            "C" => {
                let chi = Self::euler_characteristic(&self.f1);
                let k = pencil_reducible_count(chi, 5)?;
                Ok((
                    Factor::new(
                        "F1 count",
                        rational::int(k),
                        format!("chi(F1)={chi}, 5 base points"),
                        "two-component members of the pencil of D0+3F curves through 5 points, from the Euler characteristic of the blow-up",
                    ),
                    Factor::new(
                        "P2 count",
                        Rational::from_integer(kontsevich_nd(2)?),
                        "N_2".into(),
                        "conics through 5 points (Kontsevich recursion)",
                    ),
                ))
            }
            other => Err(Error::InternalConsistency(format!("no counts for decomposition {other}"))),
        }
    }

    pub fn compute_contribution(&self, case: CaseId) -> Result<Contribution> {
        let s = self.splitting(case)?;
        let mut factors = vec![Factor::new(
            "m",
            rational::int(s.m as i64),
            format!("product of contact orders, aut = {}", s.aut),
            "splitting enumeration",
        )];
        if s.aut != 1 {
            factors.push(Factor::new(
                "1/aut",
                Rational::new(1.into(), s.aut.into()),
                String::new(),
                "splitting enumeration",
            ));
        }
        for p in &s.placements {
            if p.kind == PlacementKind::Loop {
                factors.push(Factor::new(
                    "branch",
                    rational::frac(1, 2),
                    String::new(),
                    "permutation of the two branches of the split node; correction term zero since the contact point is fixed",
                ));
                let (total, per_vertex) = self.loop_divisor_factor(s, p.side)?;
                let detail: Vec<String> = per_vertex.iter().map(rational::format).collect();
                factors.push(Factor::new(
                    "divisor",
                    total,
                    detail.join("+"),
                    &format!("divisor equation on the diagonal of {}", self.ring(p.side).name()),
                ));
            }
        }
        let (f1, p2) = self.side_counts(&s.decomposition)?;
        factors.push(p2);
        factors.push(f1);
        let value = factors.iter().fold(Rational::one(), |a, f| a * &f.value);
        Ok(Contribution {
            case,
            splitting: s.label.clone(),
            factors,
            value,
        })
    }

    /// Relative invariants of each side with classes of D = ℙ¹ at the
    /// contacts, built from the same enumerative inputs.
    pub fn relative_oracle(&self) -> Result<TabledRelativeOracle> {
        let one = self.d.index_of("1")?;
        let pt = self.d.index_of("pt")?;
        let mut entries = BTreeMap::new();
        for s in &self.splittings {
            let (f1_count, p2_count) = self.side_counts(&s.decomposition)?;
            let mut side_value = |side: usize, base: &dyn Fn(&[usize]) -> Result<Rational>| -> Result<()> {
                let mut scale = Rational::one();
                for p in s.placements.iter().filter(|p| p.side == side && p.kind == PlacementKind::Loop) {
                    scale *= rational::frac(1, 2) * self.loop_divisor_factor(s, p.side)?.0;
                }
                for tuple in tuples(self.d.dim(), s.ell) {
                    let v = base(&tuple)? * &scale;
                    entries.insert(relative_key(side, s, &tuple, &self.d), v);
                }
                Ok(())
            };
            match s.decomposition.as_str() {
                "A" => {
                    side_value(1, &|t| Ok(if t == [pt, pt] { f1_count.value.clone() } else { Rational::zero() }))?;
                    side_value(2, &|t| Ok(if t == [one, one] { p2_count.value.clone() } else { Rational::zero() }))?;
                }
                "B" => {
                    side_value(1, &|t| Ok(if t == [pt] { f1_count.value.clone() } else { Rational::zero() }))?;
                    side_value(2, &|t| Ok(if t == [one] { p2_count.value.clone() } else { Rational::zero() }))?;
                }
                "C" => {
                    // which relative leg sits on the fibre component
                    let fibre = self.f1.curve_class("F")?;
                    let legs = s.gamma1.relative_legs();
                    let on_fibre: Vec<bool> = legs
                        .iter()
                        .map(|&(v, _, _)| s.gamma1.vertices()[v].class == fibre)
                        .collect();
                    let through_boundary = self.table.value("f1.D0+3F.5pts.reducible.fibre-through-boundary")?;
                    let total = f1_count.value.clone();
                    side_value(1, &|t| {
                        let pinned: Vec<bool> = t.iter().map(|&x| x == pt).collect();
                        Ok(match pinned.iter().filter(|&&b| b).count() {
                            1 => {
                                let fibre_pinned = pinned.iter().zip(&on_fibre).any(|(&p, &f)| p && f);
                                if fibre_pinned {
                                    through_boundary.clone()
                                } else {
                                    &total - &through_boundary
                                }
                            }
                            _ => Rational::zero(),
                        })
                    })?;
                    side_value(2, &|t| {
                        let pinned = t.iter().filter(|&&x| x == pt).count();
                        Ok(if pinned == 1 { p2_count.value.clone() } else { Rational::zero() })
                    })?;
                }
                other => return Err(Error::InternalConsistency(format!("no relative data for {other}"))),
            }
        }
        Ok(TabledRelativeOracle {
            ring_d: self.d.clone(),
            entries,
        })
    }

    pub fn degeneration(&self) -> Result<DegenerationSum> {
        degeneration_sum(&self.splittings, &self.relative_oracle()?, &self.d)
    }

    /// All quantities, without failing on disagreement.
    pub fn report(&self) -> Result<CaseReport> {
        let lhs = self.compute_lhs()?;
        let contributions = CaseId::ALL
            .into_iter()
            .map(|c| self.compute_contribution(c))
            .collect::<Result<Vec<_>>>()?;
        let rhs_total = contributions.iter().fold(Rational::zero(), |a, c| a + &c.value);
        let degeneration = self.degeneration()?;
        let agreement = lhs == rhs_total && degeneration.total == rhs_total;
        Ok(CaseReport {
            lhs,
            contributions,
            rhs_total,
            degeneration,
            agreement,
        })
    }

    /// Like [`AppendixCase::report`] but a disagreement is an error.
    pub fn compute_rhs_total(&self) -> Result<CaseReport> {
        let report = self.report()?;
        if !report.agreement {
            return Err(Error::Verification {
                what: "nodal degeneration sum against the split-loop value".into(),
                expected: rational::format(&report.lhs),
                actual: format!(
                    "{} (case sum), {} (degeneration sum)",
                    rational::format(&report.rhs_total),
                    rational::format(&report.degeneration.total)
                ),
            });
        }
        Ok(report)
    }
}

fn tuples(dim: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..dim).map(move |i| {
                    let mut u = t.clone();
                    u.push(i);
                    u
                })
            })
            .collect();
    }
    out
}

/// Split one node on a vertex of class β and remove both divisor insertions.
pub fn divisor_factor_for_class(ring: &CohRing, class: &CurveClass) -> Result<Rational> {
    let node = InsertionList::new(0, class.clone(), Vec::new(), 1);
    let mut total = Rational::zero();
    for (coeff, child) in split_node(&node, ring)? {
        for (c, mono) in child.monomials() {
            if mono.iter().any(|&(i, _)| ring.degree(i) == 0) {
                // fundamental class insertion with β ≠ 0 and no psi: vanishes
                continue;
            }
            if mono.iter().any(|&(i, _)| ring.degree(i) != 2) {
                return Err(Error::Unsupported("loop Künneth term with a non-divisor class".into()));
            }
            let mut term = InsertionList::new(
                0,
                class.clone(),
                mono.iter()
                    .map(|&(i, psi)| Insertion {
                        class: ClassExpr::basis(ring.dim(), i),
                        psi,
                    })
                    .collect(),
                0,
            );
            let mut value = &coeff * &c;
            while !term.insertions.is_empty() {
                let (f, rest) = divisor_reduce(&term, 0, ring)?;
                value *= f;
                term = rest;
            }
            total += value;
        }
    }
    Ok(total)
}

pub fn compute_lhs() -> Result<Rational> {
    AppendixCase::new()?.compute_lhs()
}

pub fn compute_contribution(case: CaseId) -> Result<Contribution> {
    AppendixCase::new()?.compute_contribution(case)
}

pub fn compute_rhs_total() -> Result<CaseReport> {
    AppendixCase::new()?.compute_rhs_total()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EllipticReport {
    #[serde(with = "rational::vec_as_strings")]
    pub coefficients: Vec<Rational>,
    /// basis of the monodromy-invariant bilinear forms on span(a, b)
    #[serde(with = "rational::matrix_as_strings")]
    pub invariant_forms: Vec<Vec<Rational>>,
    #[serde(with = "rational::as_string")]
    pub determinant: Rational,
    pub coefficient: String,
    pub invariant: String,
    pub nodal_terms: Vec<(String, String)>,
    #[serde(with = "rational::as_string")]
    pub nodal_coefficient: Rational,
    #[serde(with = "rational::as_string")]
    pub trade_factor: Rational,
}

/// ⟨u₁a + v₁b, u₂a + v₂b⟩ on an elliptic curve: monodromy leaves one
/// constant ⟨a,b⟩, and the one-node invariant carries it with coefficient 2.
pub fn elliptic_demo(u1: &Rational, v1: &Rational, u2: &Rational, v2: &Rational) -> Result<EllipticReport> {
    let gens = [[[1, 1], [0, 1]], [[1, 0], [1, 1]]];
    // unknowns c_ij = ⟨x_i, x_j⟩; rows: entries of gᵀ C g − C
    let mut rows = Vec::new();
    for g in gens {
        for r in 0..2 {
            for s in 0..2 {
                let mut row = vec![Rational::zero(); 4];
                for i in 0..2 {
                    for j in 0..2 {
                        row[2 * i + j] += rational::int(g[i][r] * g[j][s]);
                    }
                }
                row[2 * r + s] -= Rational::one();
                rows.push(row);
            }
        }
    }
    let kernel = Matrix::from_rows(rows)?.kernel();
    if kernel.len() != 1 {
        return Err(Error::InternalConsistency(format!(
            "expected a one-dimensional space of invariant forms, got {}",
            kernel.len()
        )));
    }
    let scale = kernel[0][1].clone();
    if scale.is_zero() {
        return Err(Error::InternalConsistency("invariant form has no ⟨a,b⟩ entry".into()));
    }
    let form: Vec<Rational> = kernel[0].iter().map(|x| x / &scale).collect();
    let x = [u1.clone(), v1.clone()];
    let y = [u2.clone(), v2.clone()];
    let mut determinant = Rational::zero();
    for i in 0..2 {
        for j in 0..2 {
            determinant += &x[i] * &y[j] * &form[2 * i + j];
        }
    }

    let ring = CohRing::bundled("elliptic")?;
    let node = InsertionList::new(0, ring.curve_class("E")?, Vec::new(), 1);
    let mut combined: BTreeMap<Vec<(usize, u32)>, Rational> = BTreeMap::new();
    for (c, child) in split_node(&node, &ring)? {
        for (mono, v) in child.canonical_monomials(&ring) {
            *combined.entry(mono).or_insert_with(Rational::zero) += &c * v;
        }
    }
    combined.retain(|_, v| !v.is_zero());
    let (a, b) = (ring.index_of("a")?, ring.index_of("b")?);
    let nodal_coefficient = combined.get(&vec![(a, 0), (b, 0)]).cloned().unwrap_or_default();
    let nodal_terms = combined
        .iter()
        .map(|(m, v)| {
            let labels: Vec<&str> = m.iter().map(|&(i, _)| ring.label(i)).collect();
            (format!("<{}>", labels.join(",")), rational::format(v))
        })
        .collect();

    // ⟨a,b⟩ = t gives nodal = coefficient·t; the trade must return t.
    let trader = NodeTrader::new(1, BilinearSpace::symplectic(1)?)?;
    let t = Rational::one();
    let nodal = PairingVector::new(1, vec![&nodal_coefficient * &t])?;
    let recovered = trader.recover_from_nodal(&nodal, &PairingVector::zero(1)?, NodalSign::Minus)?;
    let got = recovered.tensor.get(&[0, 1]).clone();
    if got != t {
        return Err(Error::Verification {
            what: "node trade on the elliptic curve".into(),
            expected: rational::format(&t),
            actual: rational::format(&got),
        });
    }
    let trade_factor = got / nodal.coords[0].clone();

    let invariant = if determinant.is_zero() {
        "0".to_string()
    } else if determinant.is_one() {
        "<a,b>".to_string()
    } else {
        format!("{}·<a,b>", rational::format(&determinant))
    };
    Ok(EllipticReport {
        coefficients: vec![u1.clone(), v1.clone(), u2.clone(), v2.clone()],
        invariant_forms: vec![form[0..2].to_vec(), form[2..4].to_vec()],
        determinant,
        coefficient: "u1*v2 - u2*v1".into(),
        invariant,
        nodal_terms,
        nodal_coefficient,
        trade_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn lhs_is_54() {
        assert_eq!(compute_lhs().unwrap(), int(54));
    }

    #[test]
    fn lhs_variants() {
        let case = AppendixCase::new().unwrap();
        assert_eq!(case.lhs_report(9, 1).unwrap().value, int(0));
        assert_eq!(case.lhs_report(8, 0).unwrap().value, int(12));
    }

    #[test]
    fn contributions_match_cases() {
        let case = AppendixCase::new().unwrap();
        let got: Vec<Rational> = CaseId::ALL
            .iter()
            .map(|&c| case.compute_contribution(c).unwrap().value)
            .collect();
        let expected = [int(3), int(5), int(8), int(10), int(3), frac(15, 2), frac(15, 2), int(10)];
        assert_eq!(got, expected);
    }

    #[test]
    fn divisor_subfactors() {
        let case = AppendixCase::new().unwrap();
        let detail = |c: CaseId| case.compute_contribution(c).unwrap().factor("divisor").unwrap().detail.clone();
        assert_eq!(detail(CaseId::III), "4");
        assert_eq!(detail(CaseId::IV), "5");
        assert_eq!(detail(CaseId::V), "1+1");
        assert_eq!(detail(CaseId::VI), "5");
        assert_eq!(detail(CaseId::VII), "3+0");
        assert_eq!(detail(CaseId::VIII), "4");
    }

    #[test]
    fn degeneration_route_agrees() {
        let report = compute_rhs_total().unwrap();
        assert!(report.agreement);
        assert_eq!(report.degeneration.total, int(54));
        assert_eq!(report.rhs_total, int(54));
    }

    #[test]
    fn fault_injection_is_flagged() {
        let mut table = OracleTable::bundled();
        table.insert("p2.conic.4pts.tangentL", int(3), "perturbed");
        let case = AppendixCase::with_table(table).unwrap();
        let report = case.report().unwrap();
        assert!(!report.agreement);
        assert_eq!(report.rhs_total, int(63));
        assert!(case.compute_rhs_total().unwrap_err().is_verification_failure());
    }

    #[test]
    fn missing_key_is_missing_data() {
        let table = OracleTable::from_json("{}").unwrap();
        let case = AppendixCase::with_table(table).unwrap();
        assert!(matches!(case.compute_contribution(CaseId::I), Err(Error::MissingData(_))));
    }

    #[test]
    fn elliptic_demo_values() {
        let r = elliptic_demo(&int(1), &int(0), &int(0), &int(1)).unwrap();
        assert_eq!(r.determinant, int(1));
        assert_eq!(r.nodal_coefficient, int(2));
        assert_eq!(r.trade_factor, frac(1, 2));
        let r = elliptic_demo(&int(1), &int(0), &int(1), &int(0)).unwrap();
        assert_eq!(r.determinant, int(0));
        assert_eq!(r.invariant, "0");
    }

    #[test]
    fn case_ids_parse() {
        for c in CaseId::ALL {
            assert_eq!(c.as_str().parse::<CaseId>().unwrap(), c);
        }
        assert!("ix".parse::<CaseId>().is_err());
    }
}
