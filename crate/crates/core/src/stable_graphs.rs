//! Decorated stable graphs, edge contraction, splittings of a graph along a
//! degeneration W ⇝ Y₁ ∪_D Y₂, and the numerical degeneration sum.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cohomology::{CohRing, CurveClass};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LegKind {
    Interior,
    Relative { multiplicity: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub genus: u32,
    pub class: CurveClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Leg {
    pub marking: u32,
    #[serde(flatten)]
    pub kind: LegKind,
}

/// Half-edge graph: `vertex_of[h]` is the vertex of half-edge h, `involution`
/// pairs half-edges into edges, and its fixed points are the legs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableGraph {
    vertices: Vec<Vertex>,
    vertex_of: Vec<usize>,
    involution: Vec<usize>,
    legs: BTreeMap<usize, Leg>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<Vertex>,
    half_edges: Vec<usize>,
    #[serde(default)]
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    legs: Vec<LegJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LegJson {
    half_edge: usize,
    #[serde(flatten)]
    leg: Leg,
}

impl Serialize for StableGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphJson {
            vertices: self.vertices.clone(),
            half_edges: self.vertex_of.clone(),
            edges: self.edges().into_iter().map(|(a, b)| [a, b]).collect(),
            legs: self
                .legs
                .iter()
                .map(|(&h, &leg)| LegJson { half_edge: h, leg })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StableGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GraphJson::deserialize(d)?;
        let edges = raw.edges.iter().map(|e| (e[0], e[1])).collect();
        let legs = raw.legs.iter().map(|l| (l.half_edge, l.leg)).collect();
        StableGraph::new(raw.vertices, raw.half_edges, edges, legs).map_err(serde::de::Error::custom)
    }
}

/// Incremental construction that allocates half-edges as edges and legs are added.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    vertices: Vec<Vertex>,
    vertex_of: Vec<usize>,
    edges: Vec<(usize, usize)>,
    legs: Vec<(usize, Leg)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, genus: u32, class: CurveClass) -> usize {
        self.vertices.push(Vertex { genus, class });
        self.vertices.len() - 1
    }

    pub fn edge(&mut self, u: usize, v: usize) -> &mut Self {
        let h = self.vertex_of.len();
        self.vertex_of.push(u);
        self.vertex_of.push(v);
        self.edges.push((h, h + 1));
        self
    }

    pub fn leg(&mut self, v: usize, marking: u32, kind: LegKind) -> &mut Self {
        self.vertex_of.push(v);
        self.legs.push((self.vertex_of.len() - 1, Leg { marking, kind }));
        self
    }

    pub fn build(&self) -> Result<StableGraph> {
        let g = self.build_prestable()?;
        g.check_stability()?;
        Ok(g)
    }

    /// Builds without the stability check; used for intermediate gluings.
    pub fn build_prestable(&self) -> Result<StableGraph> {
        StableGraph::assemble(
            self.vertices.clone(),
            self.vertex_of.clone(),
            self.edges.clone(),
            self.legs.clone(),
        )
    }
}

impl StableGraph {
    pub fn new(
        vertices: Vec<Vertex>,
        vertex_of: Vec<usize>,
        edges: Vec<(usize, usize)>,
        legs: Vec<(usize, Leg)>,
    ) -> Result<Self> {
        let g = Self::assemble(vertices, vertex_of, edges, legs)?;
        g.check_stability()?;
        Ok(g)
    }

    fn assemble(
        vertices: Vec<Vertex>,
        vertex_of: Vec<usize>,
        edges: Vec<(usize, usize)>,
        legs: Vec<(usize, Leg)>,
    ) -> Result<Self> {
        let nh = vertex_of.len();
        if let Some(&v) = vertex_of.iter().find(|&&v| v >= vertices.len()) {
            return Err(Error::invalid(format!("half-edge attached to missing vertex {v}")));
        }
        let mut involution: Vec<Option<usize>> = vec![None; nh];
        for &(a, b) in &edges {
            if a >= nh || b >= nh || a == b || involution[a].is_some() || involution[b].is_some() {
                return Err(Error::invalid(format!("edge ({a},{b}) is not a valid pair of free half-edges")));
            }
            involution[a] = Some(b);
            involution[b] = Some(a);
        }
        let mut leg_map = BTreeMap::new();
        let mut markings = BTreeSet::new();
        for (h, leg) in legs {
            if h >= nh || involution[h].is_some() || leg_map.contains_key(&h) {
                return Err(Error::invalid(format!("leg on half-edge {h} clashes with an edge or another leg")));
            }
            if let LegKind::Relative { multiplicity: 0 } = leg.kind {
                return Err(Error::invalid("relative multiplicities must be positive"));
            }
            let tag = (matches!(leg.kind, LegKind::Relative { .. }), leg.marking);
            if !markings.insert(tag) {
                return Err(Error::invalid(format!("marking {} used twice", leg.marking)));
            }
            involution[h] = Some(h);
            leg_map.insert(h, leg);
        }
        let involution: Vec<usize> = involution
            .into_iter()
            .enumerate()
            .map(|(h, x)| x.ok_or_else(|| Error::invalid(format!("half-edge {h} is neither in an edge nor a leg"))))
            .collect::<Result<_>>()?;
        Ok(StableGraph {
            vertices,
            vertex_of,
            involution,
            legs: leg_map,
        })
    }

    pub fn check_stability(&self) -> Result<()> {
        for (v, vert) in self.vertices.iter().enumerate() {
            let n = self.valence(v) as i64;
            if vert.class.is_zero() && 2 * i64::from(vert.genus) - 2 + n <= 0 {
                return Err(Error::invalid(format!(
                    "vertex {v} (genus {}, class 0, valence {n}) is unstable",
                    vert.genus
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("graph JSON: {e}")))
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex_of(&self, h: usize) -> usize {
        self.vertex_of[h]
    }

    pub fn valence(&self, v: usize) -> usize {
        self.vertex_of.iter().filter(|&&x| x == v).count()
    }

    /// Edges as half-edge pairs (h, h′) with h < h′.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.involution
            .iter()
            .enumerate()
            .filter(|&(h, &g)| h < g)
            .map(|(h, &g)| (h, g))
            .collect()
    }

    /// Edges as vertex pairs.
    pub fn edge_endpoints(&self) -> Vec<(usize, usize)> {
        self.edges()
            .into_iter()
            .map(|(a, b)| (self.vertex_of[a], self.vertex_of[b]))
            .collect()
    }

    pub fn legs(&self) -> impl Iterator<Item = (usize, &Leg)> {
        self.legs.iter().map(|(&h, l)| (h, l))
    }

    /// Relative legs sorted by marking, as (vertex, marking, multiplicity).
    pub fn relative_legs(&self) -> Vec<(usize, u32, u32)> {
        let mut out: Vec<(usize, u32, u32)> = self
            .legs()
            .filter_map(|(h, l)| match l.kind {
                LegKind::Relative { multiplicity } => Some((self.vertex_of[h], l.marking, multiplicity)),
                LegKind::Interior => None,
            })
            .collect();
        out.sort_by_key(|&(_, m, _)| m);
        out
    }

    pub fn interior_markings(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .legs()
            .filter(|(_, l)| l.kind == LegKind::Interior)
            .map(|(_, l)| l.marking)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn component_count(&self) -> usize {
        let mut uf = UnionFind::new(self.vertices.len());
        for (u, v) in self.edge_endpoints() {
            uf.union(u, v);
        }
        uf.count()
    }

    /// h¹ = E − V + #components.
    pub fn first_betti(&self) -> usize {
        self.edges().len() + self.component_count() - self.vertices.len()
    }

    pub fn total_class(&self) -> Option<CurveClass> {
        let mut it = self.vertices.iter().map(|v| v.class.clone());
        let first = it.next()?;
        Some(it.fold(first, |acc, c| acc.add(&c)))
    }

    /// Contracts the edges whose index (in [`StableGraph::edges`] order) is
    /// selected. Each resulting vertex has genus Σg + h¹ of the contracted
    /// subgraph and the summed class; legs and other edges are kept.
    pub fn contract_edge_set(&self, selected: &BTreeSet<usize>) -> Result<StableGraph> {
        let edges = self.edges();
        let mut uf = UnionFind::new(self.vertices.len());
        for (i, &(a, b)) in edges.iter().enumerate() {
            if selected.contains(&i) {
                uf.union(self.vertex_of[a], self.vertex_of[b]);
            }
        }
        let mut root_index: BTreeMap<usize, usize> = BTreeMap::new();
        for v in 0..self.vertices.len() {
            let r = uf.find(v);
            let next = root_index.len();
            root_index.entry(r).or_insert(next);
        }
        let mut genus = vec![0u32; root_index.len()];
        let mut class: Vec<Option<CurveClass>> = vec![None; root_index.len()];
        let mut members = vec![0usize; root_index.len()];
        for (v, vert) in self.vertices.iter().enumerate() {
            let c = root_index[&uf.find(v)];
            genus[c] += vert.genus;
            members[c] += 1;
            class[c] = Some(match class[c].take() {
                Some(acc) => acc.add(&vert.class),
                None => vert.class.clone(),
            });
        }
        let mut contracted_edges = vec![0usize; root_index.len()];
        for (i, &(a, _)) in edges.iter().enumerate() {
            if selected.contains(&i) {
                contracted_edges[root_index[&uf.find(self.vertex_of[a])]] += 1;
            }
        }
        for c in 0..genus.len() {
            // each class is connected through selected edges, so h¹ = E − V + 1
            genus[c] += u32::try_from(contracted_edges[c] + 1 - members[c]).expect("small graph");
        }
        let mut b = GraphBuilder::new();
        for c in 0..genus.len() {
            b.vertex(genus[c], class[c].clone().expect("every component has a vertex"));
        }
        let image = |v: usize, uf: &mut UnionFind| root_index[&uf.find(v)];
        for (i, &(x, y)) in edges.iter().enumerate() {
            if !selected.contains(&i) {
                let (u, w) = (image(self.vertex_of[x], &mut uf), image(self.vertex_of[y], &mut uf));
                b.edge(u, w);
            }
        }
        for (h, leg) in self.legs() {
            let v = image(self.vertex_of[h], &mut uf);
            b.leg(v, leg.marking, leg.kind);
        }
        b.build()
    }

    /// One vertex per connected component, genus raised by the first Betti
    /// number of the component.
    pub fn contract_edges(&self) -> Result<StableGraph> {
        self.contract_edge_set(&(0..self.edges().len()).collect())
    }

    fn form_for(&self, order: &[usize]) -> String {
        let mut pos = vec![0; self.vertices.len()];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        let mut out = String::new();
        for &v in order {
            let vert = &self.vertices[v];
            let mut legs: Vec<&Leg> = self.legs().filter(|(h, _)| self.vertex_of[*h] == v).map(|(_, l)| l).collect();
            legs.sort();
            out.push_str(&format!("[g{} c{:?} {:?}]", vert.genus, vert.class.0, legs));
        }
        let mut es: Vec<(usize, usize)> = self
            .edge_endpoints()
            .into_iter()
            .map(|(u, w)| (pos[u].min(pos[w]), pos[u].max(pos[w])))
            .collect();
        es.sort_unstable();
        out.push_str(&format!("{es:?}"));
        out
    }

    /// Serialization with the vertices in their stored order.
    pub fn labeled_form(&self) -> String {
        self.form_for(&(0..self.vertices.len()).collect::<Vec<_>>())
    }

    /// Lexicographically least form over vertex orderings; equal for
    /// isomorphic graphs (markings are not permuted).
    pub fn canonical_form(&self) -> Result<String> {
        let n = self.vertices.len();
        if n > 8 {
            return Err(Error::Unsupported(format!(
                "canonical form by brute force is limited to 8 vertices, got {n}"
            )));
        }
        let mut best: Option<String> = None;
        for_each_permutation(n, &mut |perm| {
            let f = self.form_for(perm);
            if best.as_ref().is_none_or(|b| &f < b) {
                best = Some(f);
            }
        });
        Ok(best.unwrap_or_default())
    }

    pub fn is_isomorphic(&self, other: &StableGraph) -> Result<bool> {
        Ok(self.canonical_form()? == other.canonical_form()?)
    }

    /// Renames relative markings: marking i becomes `perm[i-1]`.
    pub fn relabel_relative(&self, perm: &[u32]) -> StableGraph {
        let mut g = self.clone();
        for leg in g.legs.values_mut() {
            if let LegKind::Relative { .. } = leg.kind {
                leg.marking = perm[leg.marking as usize - 1];
            }
        }
        g
    }

    /// Applies a linear map on class coordinates to every vertex.
    pub fn push_forward(&self, matrix: &[Vec<i64>]) -> StableGraph {
        let mut g = self.clone();
        for v in &mut g.vertices {
            v.class = push_class(&v.class, matrix);
        }
        g
    }
}

fn push_class(c: &CurveClass, matrix: &[Vec<i64>]) -> CurveClass {
    CurveClass(
        matrix
            .iter()
            .map(|row| row.iter().zip(&c.0).map(|(a, b)| a * b).sum())
            .collect(),
    )
}

fn for_each_permutation(n: usize, f: &mut impl FnMut(&[usize])) {
    fn go(k: usize, items: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            f(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            go(k + 1, items, f);
            items.swap(k, i);
        }
    }
    go(0, &mut (0..n).collect(), f);
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }

    fn count(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}

impl fmt::Display for StableGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labeled_form())
    }
}

/// One component of a degeneration: its ring model, curve-class
/// coordinates, the divisor D inside it and the push-forward to the parent
/// lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideSpec {
    pub name: String,
    pub ring: String,
    pub divisor: String,
    /// rows: parent generators, columns: this side's generators
    pub pushforward: Vec<Vec<i64>>,
    /// interior markings that specialise into this side
    pub interior_markings: Vec<u32>,
}

/// A vertex of a side graph proposed by the class splitter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidePiece {
    #[serde(default)]
    pub genus: u32,
    pub class: CurveClass,
    pub contacts: Vec<u32>,
}

/// How one parent vertex class may break into pieces on the two sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexDecomposition {
    pub id: String,
    pub side1: Vec<SidePiece>,
    pub side2: Vec<SidePiece>,
}

pub trait ClassSplitter {
    fn decompositions(&self, genus: u32, class: &CurveClass) -> Result<Vec<VertexDecomposition>>;
}

/// Splitter given as an explicit table from parent classes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TabledSplitter {
    pub entries: Vec<(CurveClass, Vec<VertexDecomposition>)>,
}

impl ClassSplitter for TabledSplitter {
    fn decompositions(&self, _genus: u32, class: &CurveClass) -> Result<Vec<VertexDecomposition>> {
        self.entries
            .iter()
            .find(|(c, _)| c == class)
            .map(|(_, d)| d.clone())
            .ok_or_else(|| Error::MissingData(format!("class splitter entry for class {:?}", class.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementKind {
    Loop,
    Bridge,
}

/// Where a parent edge lands: on which side, as a loop on one vertex or a
/// bridge between two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgePlacement {
    pub edge: usize,
    pub side: usize,
    pub kind: PlacementKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splitting {
    pub label: String,
    pub decomposition: String,
    pub placements: Vec<EdgePlacement>,
    pub gamma1: StableGraph,
    pub gamma2: StableGraph,
    pub ell: usize,
    pub m: u64,
    pub aut: u64,
}

impl Splitting {
    pub fn gamma(&self, side: usize) -> &StableGraph {
        if side == 1 {
            &self.gamma1
        } else {
            &self.gamma2
        }
    }

    /// m(σ)/|Aut(σ)|.
    pub fn weight(&self) -> Rational {
        Rational::new(self.m.into(), self.aut.into())
    }
}

/// A degeneration scenario: parent graph, the two sides and the splitter.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub parent: StableGraph,
    pub sides: [SideSpec; 2],
    pub rings: [CohRing; 2],
    pub splitter: TabledSplitter,
    pub shape_bound: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScenarioJson {
    name: String,
    parent_ring: String,
    parent: StableGraph,
    sides: [SideSpec; 2],
    shape_bound: usize,
    splitter: Vec<SplitterEntryJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SplitterEntryJson {
    parent_class: String,
    decompositions: Vec<DecompositionJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DecompositionJson {
    id: String,
    side1: Vec<PieceJson>,
    side2: Vec<PieceJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PieceJson {
    #[serde(default)]
    genus: u32,
    class: String,
    contacts: Vec<u32>,
}

impl Scenario {
    /// Parses a scenario whose classes are written in the side rings'
    /// notation, checking contact orders against D and push-forwards against
    /// the parent class.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ScenarioJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidModel(format!("scenario JSON: {e}")))?;
        let parent_ring = CohRing::bundled(&raw.parent_ring)?;
        let rings = [CohRing::bundled(&raw.sides[0].ring)?, CohRing::bundled(&raw.sides[1].ring)?];
        let mut entries = Vec::new();
        for entry in &raw.splitter {
            let parent_class = parent_ring.curve_class(&entry.parent_class)?;
            let mut decs = Vec::new();
            for d in &entry.decompositions {
                let mut sides: [Vec<SidePiece>; 2] = [Vec::new(), Vec::new()];
                let mut pushed = CurveClass::zero(parent_class.0.len());
                for (s, pieces) in [&d.side1, &d.side2].into_iter().enumerate() {
                    let ring = &rings[s];
                    let divisor = ring.class(&raw.sides[s].divisor)?;
                    for p in pieces {
                        let class = ring.curve_class(&p.class)?;
                        let contact = ring.intersect(&divisor, &class)?;
                        let total: u32 = p.contacts.iter().sum();
                        if contact != rational::int(i64::from(total)) || p.contacts.contains(&0) {
                            return Err(Error::InvalidModel(format!(
                                "decomposition {}: contacts {:?} of {} do not add up to {}·{} = {}",
                                d.id,
                                p.contacts,
                                p.class,
                                raw.sides[s].divisor,
                                p.class,
                                rational::format(&contact)
                            )));
                        }
                        pushed = pushed.add(&push_class(&class, &raw.sides[s].pushforward));
                        sides[s].push(SidePiece {
                            genus: p.genus,
                            class,
                            contacts: p.contacts.clone(),
                        });
                    }
                }
                if pushed != parent_class {
                    return Err(Error::InvalidModel(format!(
                        "decomposition {} pushes forward to {:?}, parent class is {:?}",
                        d.id, pushed.0, parent_class.0
                    )));
                }
                let [side1, side2] = sides;
                decs.push(VertexDecomposition {
                    id: d.id.clone(),
                    side1,
                    side2,
                });
            }
            entries.push((parent_class, decs));
        }
        Ok(Scenario {
            name: raw.name,
            parent: raw.parent,
            sides: raw.sides,
            rings,
            splitter: TabledSplitter { entries },
            shape_bound: raw.shape_bound,
        })
    }

    /// The worked degeneration of a one-loop plane cubic into ℙ² ∪ F₁.
    pub fn bundled_appendix() -> Self {
        Self::from_json(include_str!("../data/scenarios/p2_cubic_loop.json")).expect("bundled scenario parses")
    }

    pub fn enumerate(&self) -> Result<Vec<Splitting>> {
        enumerate_splittings(&self.parent, &self.splitter, &self.sides, self.shape_bound)
    }
}

struct PieceRef {
    parent_vertex: usize,
    piece: SidePiece,
}

/// All splittings of Γ allowed by the splitter, up to relabelling of the
/// relative legs, each with ℓ(σ), m(σ) and |Aut(σ)|. Interior legs and
/// parent edges are attached to the leading piece (or leading two pieces) of
/// their side; the identity of a splitting records the side and kind of each
/// parent edge.
pub fn enumerate_splittings(
    parent: &StableGraph,
    splitter: &dyn ClassSplitter,
    sides: &[SideSpec; 2],
    shape_bound: usize,
) -> Result<Vec<Splitting>> {
    let options: Vec<Vec<VertexDecomposition>> = parent
        .vertices()
        .iter()
        .map(|v| splitter.decompositions(v.genus, &v.class))
        .collect::<Result<_>>()?;
    let mut side_of_marking = BTreeMap::new();
    for (s, spec) in sides.iter().enumerate() {
        for &m in &spec.interior_markings {
            if side_of_marking.insert(m, s).is_some() {
                return Err(Error::InvalidModel(format!("marking {m} is assigned to both sides")));
            }
        }
    }
    for m in parent.interior_markings() {
        if !side_of_marking.contains_key(&m) {
            return Err(Error::InvalidModel(format!("marking {m} is not assigned to a side")));
        }
    }
    let mut found: BTreeMap<String, Splitting> = BTreeMap::new();
    let mut choice = vec![0usize; options.len()];
    if options.iter().any(Vec::is_empty) {
        return Ok(Vec::new());
    }
    loop {
        let picked: Vec<&VertexDecomposition> = choice.iter().zip(&options).map(|(&c, o)| &o[c]).collect();
        let mut pieces: [Vec<PieceRef>; 2] = [Vec::new(), Vec::new()];
        for (v, dec) in picked.iter().enumerate() {
            for (s, list) in [&dec.side1, &dec.side2].into_iter().enumerate() {
                for p in list {
                    pieces[s].push(PieceRef {
                        parent_vertex: v,
                        piece: p.clone(),
                    });
                }
            }
        }
        for (s, list) in pieces.iter().enumerate() {
            if list.len() > shape_bound {
                let ids: Vec<&str> = picked.iter().map(|d| d.id.as_str()).collect();
                return Err(Error::Resource(format!(
                    "side {} needs {} vertices, shape bound is {shape_bound}; frontier: [{}]",
                    s + 1,
                    list.len(),
                    ids.join(", ")
                )));
            }
        }
        let decomposition = picked.iter().map(|d| d.id.as_str()).collect::<Vec<_>>().join("+");
        for matching in contact_matchings(parent, &pieces) {
            if !glues_back(parent, &pieces, &matching) {
                continue;
            }
            for placement in edge_placements(parent, &pieces) {
                let Some((g1, g2)) = build_sides(parent, &pieces, &matching, &placement, &side_of_marking)? else {
                    continue;
                };
                let glued = glue_and_contract(&g1, &g2, sides)?;
                if !glued.is_isomorphic(parent)? {
                    return Err(Error::InternalConsistency(format!(
                        "splitting {decomposition} does not glue back to the parent graph"
                    )));
                }
                let ell = matching.len();
                let key = equivalence_key(&g1, &g2, ell)?;
                found.entry(key).or_insert_with(|| {
                    let m = matching.iter().map(|&(_, _, mu)| u64::from(mu)).product();
                    let aut = automorphism_count(&g1, &g2, ell);
                    Splitting {
                        label: String::new(),
                        decomposition: decomposition.clone(),
                        placements: placement.clone(),
                        gamma1: g1,
                        gamma2: g2,
                        ell,
                        m,
                        aut,
                    }
                });
            }
        }
        // next combination of per-vertex decompositions
        let mut i = 0;
        loop {
            if i == choice.len() {
                let mut out: Vec<Splitting> = found.into_values().collect();
                out.sort_by(|a, b| (&a.decomposition, &a.placements).cmp(&(&b.decomposition, &b.placements)));
                assign_labels(&mut out);
                return Ok(out);
            }
            choice[i] += 1;
            if choice[i] < options[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn assign_labels(list: &mut [Splitting]) {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for s in list.iter_mut() {
        let places: Vec<String> = s
            .placements
            .iter()
            .map(|p| {
                let kind = match p.kind {
                    PlacementKind::Loop => "loop",
                    PlacementKind::Bridge => "bridge",
                };
                format!("e{}:side{}:{kind}", p.edge, p.side)
            })
            .collect();
        let base = format!("{}/{}", s.decomposition, places.join(","));
        let count = seen.entry(base.clone()).or_insert(0);
        *count += 1;
        s.label = if *count == 1 { base } else { format!("{base}#{count}") };
    }
}

/// Bijections between side-1 and side-2 contact points of the same parent
/// vertex with equal multiplicities. Each entry: (side-1 piece, side-2
/// piece, multiplicity), in side-1 contact order.
fn contact_matchings(parent: &StableGraph, pieces: &[Vec<PieceRef>; 2]) -> Vec<Vec<(usize, usize, u32)>> {
    let slots = |s: usize| -> Vec<(usize, usize, u32)> {
        pieces[s]
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.piece.contacts.iter().map(move |&mu| (p.parent_vertex, i, mu)))
            .collect()
    };
    let (left, right) = (slots(0), slots(1));
    let mut out = Vec::new();
    if left.len() != right.len() {
        return out;
    }
    let _ = parent;
    let mut used = vec![false; right.len()];
    let mut acc = Vec::new();
    fn go(
        i: usize,
        left: &[(usize, usize, u32)],
        right: &[(usize, usize, u32)],
        used: &mut Vec<bool>,
        acc: &mut Vec<(usize, usize, u32)>,
        out: &mut Vec<Vec<(usize, usize, u32)>>,
    ) {
        if i == left.len() {
            out.push(acc.clone());
            return;
        }
        let (v, a, mu) = left[i];
        for j in 0..right.len() {
            let (w, b, nu) = right[j];
            if used[j] || v != w || mu != nu {
                continue;
            }
            used[j] = true;
            acc.push((a, b, mu));
            go(i + 1, left, right, used, acc, out);
            acc.pop();
            used[j] = false;
        }
    }
    go(0, &left, &right, &mut used, &mut acc, &mut out);
    out
}

/// Per parent vertex, the new edges must connect its pieces with
/// Σ g(pieces) + h¹(new edges) = g(v).
fn glues_back(parent: &StableGraph, pieces: &[Vec<PieceRef>; 2], matching: &[(usize, usize, u32)]) -> bool {
    let offset = pieces[0].len();
    let total = offset + pieces[1].len();
    let owner = |i: usize| {
        if i < offset {
            pieces[0][i].parent_vertex
        } else {
            pieces[1][i - offset].parent_vertex
        }
    };
    let genus = |i: usize| {
        if i < offset {
            pieces[0][i].piece.genus
        } else {
            pieces[1][i - offset].piece.genus
        }
    };
    let mut uf = UnionFind::new(total);
    let mut edges_per_vertex = vec![0usize; parent.vertices().len()];
    for &(a, b, _) in matching {
        uf.union(a, offset + b);
        edges_per_vertex[owner(a)] += 1;
    }
    for (v, vert) in parent.vertices().iter().enumerate() {
        let members: Vec<usize> = (0..total).filter(|&i| owner(i) == v).collect();
        if members.is_empty() {
            return false;
        }
        let root = uf.find(members[0]);
        if members.iter().any(|&i| uf.find(i) != root) {
            return false;
        }
        let h1 = edges_per_vertex[v] + 1 - members.len();
        let g: u32 = members.iter().map(|&i| genus(i)).sum();
        if g as usize + h1 != vert.genus as usize {
            return false;
        }
    }
    true
}

/// Per parent edge, the side and kind it may take, with representative
/// pieces: loops on the first piece of the vertex on that side, bridges
/// between the first two (or the first piece of each end).
fn edge_placements(parent: &StableGraph, pieces: &[Vec<PieceRef>; 2]) -> Vec<Vec<EdgePlacement>> {
    let per_edge: Vec<Vec<EdgePlacement>> = parent
        .edge_endpoints()
        .iter()
        .enumerate()
        .map(|(e, &(u, w))| {
            let mut opts = Vec::new();
            for s in 0..2 {
                let count = |v: usize| pieces[s].iter().filter(|p| p.parent_vertex == v).count();
                if u == w {
                    if count(u) >= 1 {
                        opts.push(EdgePlacement { edge: e, side: s + 1, kind: PlacementKind::Loop });
                    }
                    if count(u) >= 2 {
                        opts.push(EdgePlacement { edge: e, side: s + 1, kind: PlacementKind::Bridge });
                    }
                } else if count(u) >= 1 && count(w) >= 1 {
                    opts.push(EdgePlacement { edge: e, side: s + 1, kind: PlacementKind::Bridge });
                }
            }
            opts
        })
        .collect();
    let mut out = vec![Vec::new()];
    for opts in per_edge {
        let mut next = Vec::new();
        for prefix in &out {
            for o in &opts {
                let mut p: Vec<EdgePlacement> = prefix.clone();
                p.push(*o);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn build_sides(
    parent: &StableGraph,
    pieces: &[Vec<PieceRef>; 2],
    matching: &[(usize, usize, u32)],
    placement: &[EdgePlacement],
    side_of_marking: &BTreeMap<u32, usize>,
) -> Result<Option<(StableGraph, StableGraph)>> {
    let endpoints = parent.edge_endpoints();
    let mut graphs = Vec::with_capacity(2);
    for s in 0..2 {
        let mut b = GraphBuilder::new();
        for p in &pieces[s] {
            b.vertex(p.piece.genus, p.piece.class.clone());
        }
        let lead = |v: usize, nth: usize| {
            pieces[s]
                .iter()
                .enumerate()
                .filter(|(_, p)| p.parent_vertex == v)
                .nth(nth)
                .map(|(i, _)| i)
        };
        for (label, &(a, bb, mu)) in matching.iter().enumerate() {
            let at = if s == 0 { a } else { bb };
            b.leg(at, label as u32 + 1, LegKind::Relative { multiplicity: mu });
        }
        for (h, leg) in parent.legs() {
            if leg.kind != LegKind::Interior || side_of_marking[&leg.marking] != s {
                continue;
            }
            let Some(at) = lead(parent.vertex_of(h), 0) else {
                return Ok(None);
            };
            b.leg(at, leg.marking, LegKind::Interior);
        }
        for p in placement.iter().filter(|p| p.side == s + 1) {
            let (u, w) = endpoints[p.edge];
            let ends = match (p.kind, u == w) {
                (PlacementKind::Loop, _) => lead(u, 0).map(|x| (x, x)),
                (PlacementKind::Bridge, true) => lead(u, 0).zip(lead(u, 1)),
                (PlacementKind::Bridge, false) => lead(u, 0).zip(lead(w, 0)),
            };
            let Some((x, y)) = ends else {
                return Ok(None);
            };
            b.edge(x, y);
        }
        match b.build() {
            Ok(g) => graphs.push(g),
            Err(Error::InvalidInput(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    let g2 = graphs.pop().expect("two sides");
    let g1 = graphs.pop().expect("two sides");
    Ok(Some((g1, g2)))
}

/// Glues relative leg i of γ₁ to relative leg i of γ₂, pushes classes to the
/// parent lattice and contracts only the new edges.
pub fn glue_and_contract(g1: &StableGraph, g2: &StableGraph, sides: &[SideSpec; 2]) -> Result<StableGraph> {
    let (r1, r2) = (g1.relative_legs(), g2.relative_legs());
    if r1.len() != r2.len() {
        return Err(Error::invalid("sides have different numbers of relative legs"));
    }
    let p1 = g1.push_forward(&sides[0].pushforward);
    let p2 = g2.push_forward(&sides[1].pushforward);
    let mut b = GraphBuilder::new();
    for v in p1.vertices().iter().chain(p2.vertices()) {
        b.vertex(v.genus, v.class.clone());
    }
    let off = p1.vertices().len();
    for (u, w) in p1.edge_endpoints() {
        b.edge(u, w);
    }
    for (u, w) in p2.edge_endpoints() {
        b.edge(off + u, off + w);
    }
    let kept = p1.edges().len() + p2.edges().len();
    for (&(v1, m1, mu1), &(v2, m2, mu2)) in r1.iter().zip(&r2) {
        if m1 != m2 || mu1 != mu2 {
            return Err(Error::invalid(format!(
                "relative leg {m1} (multiplicity {mu1}) does not match leg {m2} (multiplicity {mu2})"
            )));
        }
        b.edge(v1, off + v2);
    }
    for (g, shift) in [(&p1, 0), (&p2, off)] {
        for (h, leg) in g.legs() {
            if leg.kind == LegKind::Interior {
                b.leg(shift + g.vertex_of(h), leg.marking, leg.kind);
            }
        }
    }
    let glued = b.build_prestable()?;
    glued.contract_edge_set(&(kept..kept + r1.len()).collect())
}

fn permutations_of(ell: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for_each_permutation(ell, &mut |p| out.push(p.iter().map(|&x| x as u32 + 1).collect()));
    out
}

fn equivalence_key(g1: &StableGraph, g2: &StableGraph, ell: usize) -> Result<String> {
    let mut best: Option<String> = None;
    for perm in permutations_of(ell) {
        let k = format!(
            "{}||{}",
            g1.relabel_relative(&perm).canonical_form()?,
            g2.relabel_relative(&perm).canonical_form()?
        );
        if best.as_ref().is_none_or(|b| &k < b) {
            best = Some(k);
        }
    }
    Ok(best.unwrap_or_default())
}

/// Relabellings of the relative legs that leave both sides unchanged, with
/// vertices held fixed.
fn automorphism_count(g1: &StableGraph, g2: &StableGraph, ell: usize) -> u64 {
    let (f1, f2) = (g1.labeled_form(), g2.labeled_form());
    permutations_of(ell)
        .into_iter()
        .filter(|perm| g1.relabel_relative(perm).labeled_form() == f1 && g2.relabel_relative(perm).labeled_form() == f2)
        .count() as u64
}

/// Source of relative invariants of one side of a splitting, with the
/// classes of D inserted at the relative legs in marking order.
pub trait RelativeOracle {
    fn side_value(&self, side: usize, splitting: &Splitting, insertions: &[usize]) -> Result<Rational>;
}

/// Key format used by [`TabledRelativeOracle`].
pub fn relative_key(side: usize, splitting: &Splitting, insertions: &[usize], ring_d: &CohRing) -> String {
    let labels: Vec<&str> = insertions.iter().map(|&i| ring_d.label(i)).collect();
    format!("side{side}|{}|({})", splitting.label, labels.join(","))
}

#[derive(Debug, Clone)]
pub struct TabledRelativeOracle {
    pub ring_d: CohRing,
    pub entries: BTreeMap<String, Rational>,
}

impl RelativeOracle for TabledRelativeOracle {
    fn side_value(&self, side: usize, splitting: &Splitting, insertions: &[usize]) -> Result<Rational> {
        let key = relative_key(side, splitting, insertions, &self.ring_d);
        self.entries.get(&key).cloned().ok_or(Error::MissingData(key))
    }
}

/// Monodromy caveat carried by degeneration sums: on a general fibre, the
/// formula computes sums over classes with the same image, which the shipped
/// scenarios reduce to single terms.
pub const MONODROMY_CAVEAT: &str =
    "sums over curve classes of the general fibre with equal push-forward; single-term in shipped scenarios";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegenerationSum {
    #[serde(with = "rational::as_string")]
    pub total: Rational,
    pub terms: Vec<DegenerationTerm>,
    pub caveat: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegenerationTerm {
    pub splitting: String,
    #[serde(with = "rational::as_string")]
    pub weight: Rational,
    #[serde(with = "rational::as_string")]
    pub value: Rational,
}

/// Σ_σ m(σ)/|Aut(σ)| Σ_j (−1)^ε ⟨γ₁ | δ_{j₁} … δ_{j_ℓ}⟩ ⟨δ^∨_{j₁} … δ^∨_{j_ℓ} | γ₂⟩,
/// with duals expanded in the basis of H*(D).
pub fn degeneration_sum(
    splittings: &[Splitting],
    oracle: &dyn RelativeOracle,
    ring_d: &CohRing,
) -> Result<DegenerationSum> {
    let duals = ring_d.dual_basis();
    let dim = ring_d.dim();
    let mut total = Rational::zero();
    let mut terms = Vec::new();
    for s in splittings {
        let mut inner = Rational::zero();
        let mut idx = vec![0usize; s.ell];
        loop {
            // side-2 insertions: expand Π δ^∨_{j_i}
            let mut expansions: Vec<(Rational, Vec<usize>)> = vec![(rational::int(1), Vec::new())];
            for &j in &idx {
                let mut next = Vec::new();
                for (c, tuple) in &expansions {
                    for (k, a) in duals[j].terms() {
                        let mut t = tuple.clone();
                        t.push(k);
                        next.push((c * a, t));
                    }
                }
                expansions = next;
            }
            let side1 = oracle.side_value(1, s, &idx)?;
            for (c, tuple) in expansions {
                let side2 = oracle.side_value(2, s, &tuple)?;
                let sign = interleave_sign(ring_d, &idx, &tuple);
                inner += c * &side1 * side2 * rational::int(sign);
            }
            let mut i = 0;
            while i < idx.len() {
                idx[i] += 1;
                if idx[i] < dim {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == idx.len() {
                break;
            }
        }
        let weight = s.weight();
        let value = &weight * &inner;
        total += &value;
        terms.push(DegenerationTerm {
            splitting: s.label.clone(),
            weight,
            value,
        });
    }
    Ok(DegenerationSum {
        total,
        terms,
        caveat: MONODROMY_CAVEAT.to_string(),
    })
}

pub fn degeneration_rhs(splittings: &[Splitting], oracle: &dyn RelativeOracle, ring_d: &CohRing) -> Result<Rational> {
    Ok(degeneration_sum(splittings, oracle, ring_d)?.total)
}

/// Sign of moving (a₁, b₁, a₂, b₂, …) to (a₁, …, a_ℓ, b₁, …, b_ℓ).
fn interleave_sign(ring: &CohRing, a: &[usize], b: &[usize]) -> i64 {
    let mut sign = 1;
    for i in 0..a.len() {
        for j in 0..i {
            // a_i passes b_j for j < i
            if ring.degree(a[i]) % 2 == 1 && ring.degree(b[j]) % 2 == 1 {
                sign = -sign;
            }
        }
    }
    sign
}


#[cfg(test)]
mod scenario_tests {
    use super::*;

    #[test]
    fn appendix_scenario_has_eight_splittings() {
        let sc = Scenario::bundled_appendix();
        let list = sc.enumerate().unwrap();
        let labels: Vec<&str> = list.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(list.len(), 8, "{labels:?}");
        assert!(list.iter().all(|s| s.aut == 1));
        assert!(!labels.iter().any(|l| l.starts_with('D') || l.starts_with('E')));
        for s in &list {
            assert!(glue_and_contract(&s.gamma1, &s.gamma2, &sc.sides).unwrap().is_isomorphic(&sc.parent).unwrap());
        }
    }

    #[test]
    fn shape_bound_overflow_is_a_resource_error() {
        let sc = Scenario::bundled_appendix();
        let err = enumerate_splittings(&sc.parent, &sc.splitter, &sc.sides, 1).unwrap_err();
        assert!(matches!(err, Error::Resource(_)), "{err}");
    }
}
