//! Weighted, signed, possibly non-uniform hypergraphs and the tensors built from them.
//!
//! Node ids are 0-based in memory and 1-based in the JSON file format:
//!
//! ```json
//! {"n": 4, "directed": true,
//!  "edges": [{"tail": 2, "members": [3, 1], "weight": 2.0}]}
//! ```
//!
//! A directed edge contributes the single tuple `(tail, members..)` to its
//! layer's adjacency tensor. An undirected edge is a vertex set; it contributes
//! every distinct ordering of its members. The order of an edge (and hence its
//! layer) is the length of that tuple.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::CubicalTensor;

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge {
    pub tail: Option<usize>,
    pub members: Vec<usize>,
    pub weight: f64,
}

impl Hyperedge {
    pub fn directed(tail: usize, heads: Vec<usize>, weight: f64) -> Self {
        Self {
            tail: Some(tail),
            members: heads,
            weight,
        }
    }

    pub fn undirected(members: Vec<usize>, weight: f64) -> Self {
        Self {
            tail: None,
            members,
            weight,
        }
    }

    /// Number of index slots the edge occupies in its adjacency tensor.
    pub fn order(&self) -> usize {
        self.members.len() + usize::from(self.tail.is_some())
    }

    /// `(tail, heads..)` for directed edges, the member list otherwise.
    pub fn tuple(&self) -> Vec<usize> {
        let mut t = Vec::with_capacity(self.order());
        t.extend(self.tail);
        t.extend_from_slice(&self.members);
        t
    }

    /// Index tuples this edge writes into an adjacency tensor.
    pub fn expanded_tuples(&self) -> Vec<Vec<usize>> {
        match self.tail {
            Some(_) => vec![self.tuple()],
            None => distinct_permutations(&self.members),
        }
    }

    fn dedup_key(&self) -> (Option<usize>, Vec<usize>) {
        let mut members = self.members.clone();
        if self.tail.is_none() {
            members.sort_unstable();
        }
        (self.tail, members)
    }
}

/// All distinct orderings of a multiset, in lexicographic order.
pub fn distinct_permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = items.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    loop {
        // next lexicographic permutation
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let pivot = i - 1;
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[pivot]).expect("pivot has a successor");
        cur.swap(pivot, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// The four Laplacian constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaplacianSpec {
    /// `A = 1/(k-1)!` on every ordering of an edge, `D = diag(d(i))`.
    #[serde(rename = "def1")]
    UnweightedSymmetric,
    /// `A = 1/(k-1)! * prod_j d(i_j)^{-1/k}`, `D = diag(1 if d(i) > 0)`.
    #[serde(rename = "def2")]
    DegreeNormalized,
    /// Nonnegative weights, `D = diag(row sums of A)`.
    #[serde(rename = "def3")]
    DirectedWeighted,
    /// Signed weights, `D = diag(row sums of |A|)`.
    #[serde(rename = "def4")]
    SignedDirected,
}

impl LaplacianSpec {
    pub fn name(self) -> &'static str {
        match self {
            LaplacianSpec::UnweightedSymmetric => "def1",
            LaplacianSpec::DegreeNormalized => "def2",
            LaplacianSpec::DirectedWeighted => "def3",
            LaplacianSpec::SignedDirected => "def4",
        }
    }
}

impl fmt::Display for LaplacianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LaplacianSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "def1" => Ok(LaplacianSpec::UnweightedSymmetric),
            "def2" => Ok(LaplacianSpec::DegreeNormalized),
            "def3" => Ok(LaplacianSpec::DirectedWeighted),
            "def4" => Ok(LaplacianSpec::SignedDirected),
            other => Err(Error::InvalidArgument(format!(
                "unknown Laplacian definition {other:?} (expected def1..def4)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    n: usize,
    directed: bool,
    edges: Vec<Hyperedge>,
}

impl Hypergraph {
    /// Validates the edges and merges duplicates, logging a warning for each merge.
    pub fn new(n: usize, directed: bool, edges: Vec<Hyperedge>) -> Result<Self> {
        let (g, warnings) = Self::with_warnings(n, directed, edges)?;
        for w in warnings {
            log::warn!("{w}");
        }
        Ok(g)
    }

    /// Like [`new`](Self::new) but hands the duplicate-merge warnings back to the caller.
    pub fn with_warnings(n: usize, directed: bool, edges: Vec<Hyperedge>) -> Result<(Self, Vec<String>)> {
        if n == 0 {
            return Err(Error::InvalidArgument("hypergraph needs at least one node".into()));
        }
        let mut warnings = Vec::new();
        let mut merged: Vec<Hyperedge> = Vec::with_capacity(edges.len());
        let mut seen: BTreeMap<(Option<usize>, Vec<usize>), usize> = BTreeMap::new();
        for (e, edge) in edges.into_iter().enumerate() {
            validate_edge(e, &edge, n, directed)?;
            match seen.get(&edge.dedup_key()) {
                Some(&slot) => {
                    warnings.push(format!(
                        "edge {e} duplicates edge tuple {:?}; weights summed",
                        one_based(&merged[slot].tuple())
                    ));
                    merged[slot].weight += edge.weight;
                }
                None => {
                    seen.insert(edge.dedup_key(), merged.len());
                    merged.push(edge);
                }
            }
        }
        let before = merged.len();
        merged.retain(|e| e.weight != 0.0);
        if merged.len() != before {
            warnings.push(format!(
                "{} merged edge(s) cancelled to zero weight and were dropped",
                before - merged.len()
            ));
        }
        Ok((
            Self {
                n,
                directed,
                edges: merged,
            },
            warnings,
        ))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    /// Edge positions grouped by order.
    pub fn layers(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut layers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (e, edge) in self.edges.iter().enumerate() {
            layers.entry(edge.order()).or_default().push(e);
        }
        layers
    }

    /// Orders with at least one edge, ascending.
    pub fn orders(&self) -> Vec<usize> {
        self.layers().into_keys().collect()
    }

    pub fn is_uniform(&self) -> bool {
        self.layers().len() == 1
    }

    pub fn is_signed(&self) -> bool {
        self.edges.iter().any(|e| e.weight < 0.0)
    }

    fn layer_edges(&self, order: usize) -> Result<Vec<(usize, &Hyperedge)>> {
        let layer: Vec<_> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.order() == order)
            .collect();
        if layer.is_empty() {
            return Err(Error::EmptyLayer(order));
        }
        Ok(layer)
    }

    /// The `order`-uniform sub-hypergraph.
    pub fn layer(&self, order: usize) -> Result<Hypergraph> {
        let edges = self.layer_edges(order)?.into_iter().map(|(_, e)| e.clone()).collect();
        Ok(Self {
            n: self.n,
            directed: self.directed,
            edges,
        })
    }

    fn require_unweighted_undirected(&self, order: usize) -> Result<Vec<(usize, &Hyperedge)>> {
        let layer = self.layer_edges(order)?;
        for &(e, edge) in &layer {
            if edge.tail.is_some() {
                return Err(Error::SpecViolation {
                    edge: e,
                    reason: "directed edge; this construction needs an undirected hypergraph".into(),
                });
            }
            if edge.weight != 1.0 {
                return Err(Error::SpecViolation {
                    edge: e,
                    reason: format!("weight {} but this construction needs unit weights", edge.weight),
                });
            }
            let mut sorted = edge.members.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::SpecViolation {
                    edge: e,
                    reason: "undirected edge repeats a vertex".into(),
                });
            }
        }
        Ok(layer)
    }

    /// `d(i)`: number of `order`-edges containing node `i`.
    pub fn vertex_degrees(&self, order: usize) -> Result<Vec<usize>> {
        let mut d = vec![0usize; self.n];
        for (_, edge) in self.layer_edges(order)? {
            let mut nodes = edge.tuple();
            nodes.sort_unstable();
            nodes.dedup();
            for i in nodes {
                d[i] += 1;
            }
        }
        Ok(d)
    }

    /// Supersymmetric adjacency with `1/(m-1)!` on every ordering of each edge.
    pub fn adjacency_unweighted(&self, order: usize) -> Result<CubicalTensor> {
        let layer = self.require_unweighted_undirected(order)?;
        let w = 1.0 / factorial(order - 1);
        let entries = layer
            .into_iter()
            .flat_map(|(_, e)| e.expanded_tuples())
            .map(|t| (t, w));
        CubicalTensor::from_entries(order, self.n, entries)
    }

    /// Degree-normalized supersymmetric adjacency,
    /// `1/(m-1)! * prod_j d(i_j)^{-1/m}` on every ordering of each edge.
    pub fn adjacency_normalized(&self, order: usize) -> Result<CubicalTensor> {
        let layer = self.require_unweighted_undirected(order)?;
        let d = self.vertex_degrees(order)?;
        let root: Vec<f64> = d.iter().map(|&di| (di as f64).powf(1.0 / order as f64)).collect();
        let base = 1.0 / factorial(order - 1);
        let mut entries = Vec::new();
        for (e, edge) in layer {
            if let Some(&z) = edge.members.iter().find(|&&i| d[i] == 0) {
                return Err(Error::SpecViolation {
                    edge: e,
                    reason: format!("member {} has zero degree", z + 1),
                });
            }
            let w = edge.members.iter().fold(base, |acc, &i| acc / root[i]);
            entries.extend(edge.expanded_tuples().into_iter().map(|t| (t, w)));
        }
        CubicalTensor::from_entries(order, self.n, entries)
    }

    /// Weighted adjacency: each edge writes its weight on its tuple(s), no symmetrization.
    pub fn adjacency_directed(&self, order: usize, allow_signed: bool) -> Result<CubicalTensor> {
        let layer = self.layer_edges(order)?;
        let mut entries = Vec::new();
        for (e, edge) in layer {
            if !allow_signed && edge.weight < 0.0 {
                return Err(Error::SpecViolation {
                    edge: e,
                    reason: format!("negative weight {} in a signless construction", edge.weight),
                });
            }
            entries.extend(edge.expanded_tuples().into_iter().map(|t| (t, edge.weight)));
        }
        CubicalTensor::from_entries(order, self.n, entries)
    }

    /// Adjacency tensor matching `spec`.
    pub fn adjacency(&self, order: usize, spec: LaplacianSpec) -> Result<CubicalTensor> {
        match spec {
            LaplacianSpec::UnweightedSymmetric => self.adjacency_unweighted(order),
            LaplacianSpec::DegreeNormalized => self.adjacency_normalized(order),
            LaplacianSpec::DirectedWeighted => self.adjacency_directed(order, false),
            LaplacianSpec::SignedDirected => self.adjacency_directed(order, true),
        }
    }

    /// Diagonal degree tensor matching `spec`.
    pub fn degree_tensor(&self, order: usize, spec: LaplacianSpec) -> Result<CubicalTensor> {
        let diag: Vec<f64> = match spec {
            LaplacianSpec::UnweightedSymmetric => {
                self.require_unweighted_undirected(order)?;
                self.vertex_degrees(order)?.into_iter().map(|d| d as f64).collect()
            }
            LaplacianSpec::DegreeNormalized => {
                self.require_unweighted_undirected(order)?;
                self.vertex_degrees(order)?
                    .into_iter()
                    .map(|d| if d > 0 { 1.0 } else { 0.0 })
                    .collect()
            }
            LaplacianSpec::DirectedWeighted => row_sums(&self.adjacency_directed(order, false)?),
            LaplacianSpec::SignedDirected => row_sums(&self.adjacency_directed(order, true)?.abs()),
        };
        CubicalTensor::from_entries(
            order,
            self.n,
            diag.into_iter().enumerate().map(|(i, d)| (vec![i; order], d)),
        )
    }

    /// `L = D - A` for the `order` layer.
    pub fn laplacian(&self, order: usize, spec: LaplacianSpec) -> Result<CubicalTensor> {
        let a = self.adjacency(order, spec)?;
        let d = self.degree_tensor(order, spec)?;
        d.add_scaled(-1.0, &a)
    }

    /// One Laplacian per nonempty layer, ascending by order.
    pub fn laplacian_layers(&self, spec: LaplacianSpec) -> Result<Vec<CubicalTensor>> {
        self.orders().into_iter().map(|m| self.laplacian(m, spec)).collect()
    }

    /// Weak irreducibility of the layer's adjacency pattern (absolute weights).
    pub fn layer_strong_connectivity(&self, order: usize) -> bool {
        match self.adjacency_directed(order, true) {
            Ok(a) => a.abs().weak_irreducibility(),
            Err(_) => false,
        }
    }

    pub fn to_json_string(&self) -> String {
        let file = HypergraphFile {
            n: self.n,
            directed: self.directed,
            edges: self
                .edges
                .iter()
                .map(|e| EdgeFile {
                    tail: e.tail.map(|t| t + 1),
                    members: e.members.iter().map(|&i| i + 1).collect(),
                    weight: e.weight,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("hypergraph json is always serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(parse_hypergraph(s)?.graph)
    }
}

fn row_sums(a: &CubicalTensor) -> Vec<f64> {
    let mut s = vec![0.0; a.dim()];
    for (idx, w) in a.entries() {
        s[idx[0]] += w;
    }
    s
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|v| v as f64).product()
}

fn one_based(t: &[usize]) -> Vec<usize> {
    t.iter().map(|i| i + 1).collect()
}

fn validate_edge(e: usize, edge: &Hyperedge, n: usize, directed: bool) -> Result<()> {
    let violation = |reason: String| Error::SpecViolation { edge: e, reason };
    if edge.members.is_empty() {
        return Err(violation("edge has no members".into()));
    }
    if directed != edge.tail.is_some() {
        return Err(violation(if directed {
            "directed hypergraph edge is missing its tail".into()
        } else {
            "undirected hypergraph edge has a tail".into()
        }));
    }
    if edge.order() < 2 {
        return Err(violation("edge must span at least two index slots".into()));
    }
    if let Some(&bad) = edge.tuple().iter().find(|&&i| i >= n) {
        return Err(violation(format!("node {} outside 1..={n}", bad + 1)));
    }
    if edge.weight == 0.0 || !edge.weight.is_finite() {
        return Err(violation(format!("weight must be finite and nonzero, got {}", edge.weight)));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HypergraphFile {
    n: usize,
    directed: bool,
    edges: Vec<EdgeFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<usize>,
    members: Vec<usize>,
    weight: f64,
}

/// A parsed hypergraph plus any non-fatal diagnostics (duplicate merges).
#[derive(Debug, Clone)]
pub struct ParsedHypergraph {
    pub graph: Hypergraph,
    pub warnings: Vec<String>,
}

pub fn parse_hypergraph(s: &str) -> Result<ParsedHypergraph> {
    let file: HypergraphFile = serde_json::from_str(s)?;
    let mut edges = Vec::with_capacity(file.edges.len());
    for (e, raw) in file.edges.into_iter().enumerate() {
        let node = |field: String, id: usize| -> Result<usize> {
            if id == 0 || id > file.n {
                Err(Error::schema(field, format!("node id {id} outside 1..={}", file.n)))
            } else {
                Ok(id - 1)
            }
        };
        let tail = raw
            .tail
            .map(|t| node(format!("edges[{e}].tail"), t))
            .transpose()?;
        let members = raw
            .members
            .iter()
            .enumerate()
            .map(|(p, &m)| node(format!("edges[{e}].members[{p}]"), m))
            .collect::<Result<Vec<_>>>()?;
        edges.push(Hyperedge {
            tail,
            members,
            weight: raw.weight,
        });
    }
    let (graph, warnings) = Hypergraph::with_warnings(file.n, file.directed, edges)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(ParsedHypergraph { graph, warnings })
}
