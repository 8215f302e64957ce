//! Structural balance of signed hypergraphs and the gauge transformation.
//!
//! A faction vector `sigma` in `{+1, -1}^n` balances a signed hypergraph when
//! every edge tuple `(i1, .., ik)` satisfies
//! `sgn(w) = sigma[i1] * .. * sigma[ik]`, counting repeated indices with
//! multiplicity. Writing `sigma_i = (-1)^{b_i}` turns each edge into a parity
//! equation over GF(2):
//!
//! ```text
//! sum_{j in tuple} b_j = (1 - sgn(w)) / 2   (mod 2)
//! ```
//!
//! which [`detect_balance`] solves by incremental Gaussian elimination.

use std::fmt;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::tensor::CubicalTensor;

/// A `{+1, -1}` vector; `G = Diag(sigma)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactionVector(Vec<i8>);

impl FactionVector {
    pub fn new(sigma: Vec<i8>) -> Result<Self> {
        if let Some(i) = sigma.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(format!(
                "faction entry {} is {}, expected +1 or -1",
                i + 1,
                sigma[i]
            )));
        }
        Ok(Self(sigma))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| f64::from(s)).collect()
    }

    /// `sigma ⊙ x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.0).map(|(v, &s)| f64::from(s) * v).collect()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    /// Product of the entries over a tuple, with multiplicity.
    pub fn tuple_sign(&self, tuple: &[usize]) -> i8 {
        tuple.iter().fold(1, |p, &i| p * self.0[i])
    }

    /// True iff every edge of `h` satisfies the sign constraint.
    pub fn balances(&self, h: &Hypergraph) -> bool {
        self.len() == h.n()
            && h
                .edges()
                .iter()
                .all(|e| self.tuple_sign(&e.tuple()) == if e.weight > 0.0 { 1 } else { -1 })
    }
}

impl fmt::Display for FactionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Edge taking part in an infeasible set of sign constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictEdge {
    /// Position in the hypergraph's edge list.
    pub edge: usize,
    /// 0-based index tuple.
    pub tuple: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Balanced {
    pub sigma: FactionVector,
    /// Component label per node of the sign-constraint hypergraph.
    pub components: Vec<usize>,
    /// Per component label: whether negating `sigma` on it preserves balance
    /// (true when every edge in the component has even tuple length).
    pub flippable: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Conflict {
    /// Edges whose parity equations sum to `0 = 1`. Inclusion-minimal.
    Edges(Vec<ConflictEdge>),
    /// Faction vectors from separate certificates that no component flip reconciles.
    Factions { certificate: usize, nodes: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BalanceCertificate {
    Balanced(Balanced),
    Unbalanced(Conflict),
}

impl BalanceCertificate {
    pub fn is_balanced(&self) -> bool {
        matches!(self, BalanceCertificate::Balanced(_))
    }

    pub fn sigma(&self) -> Option<&FactionVector> {
        match self {
            BalanceCertificate::Balanced(b) => Some(&b.sigma),
            BalanceCertificate::Unbalanced(_) => None,
        }
    }
}

/// Packed bit vector over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(len: usize) -> Self {
        Self(vec![0; len.div_ceil(64).max(1)])
    }

    fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn xor(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn highest(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * 64 + 63 - w.leading_zeros() as usize)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| k * 64 + b)
        })
    }
}

struct Row {
    vars: Bits,
    rhs: bool,
    origin: Bits,
}

/// Incremental GF(2) elimination; each row's pivot is its highest variable.
struct ParitySystem {
    n: usize,
    m: usize,
    rows: Vec<Row>,
    pivot_of: Vec<Option<usize>>,
}

impl ParitySystem {
    fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            rows: Vec::new(),
            pivot_of: vec![None; n],
        }
    }

    /// Adds equation `id`. Returns the origin set of a contradiction if one appears.
    fn push(&mut self, id: usize, tuple: &[usize], rhs: bool) -> Option<Bits> {
        let mut vars = Bits::zeros(self.n);
        for &j in tuple {
            vars.flip(j);
        }
        let mut origin = Bits::zeros(self.m);
        origin.set(id);
        let mut row = Row { vars, rhs, origin };
        // a row with pivot p only touches variables <= p, so one descending sweep reduces fully
        for p in (0..self.n).rev() {
            if row.vars.get(p) {
                if let Some(r) = self.pivot_of[p] {
                    let other = &self.rows[r];
                    row.vars.xor(&other.vars);
                    row.rhs ^= other.rhs;
                    row.origin.xor(&other.origin);
                }
            }
        }
        match row.vars.highest() {
            Some(p) => {
                self.pivot_of[p] = Some(self.rows.len());
                self.rows.push(row);
                None
            }
            None => row.rhs.then_some(row.origin),
        }
    }

    /// Back substitution with every free variable set to 0.
    fn solve(&self) -> Vec<bool> {
        let mut b = vec![false; self.n];
        for p in 0..self.n {
            if let Some(r) = self.pivot_of[p] {
                let row = &self.rows[r];
                b[p] = row.vars.ones().filter(|&v| v != p).fold(row.rhs, |acc, v| acc ^ b[v]);
            }
        }
        b
    }
}

struct Constraint {
    edge: usize,
    tuple: Vec<usize>,
    weight: f64,
}

fn constraints_of(h: &Hypergraph, order: Option<usize>) -> Result<Vec<Constraint>> {
    let mut out = Vec::new();
    for (e, edge) in h.edges().iter().enumerate() {
        if order.is_some_and(|m| edge.order() != m) {
            continue;
        }
        if edge.weight == 0.0 {
            return Err(Error::InvalidArgument(format!("edge {e} has zero weight")));
        }
        out.push(Constraint {
            edge: e,
            tuple: edge.tuple(),
            weight: edge.weight,
        });
    }
    Ok(out)
}

fn feasible(n: usize, cons: &[&Constraint]) -> bool {
    let mut sys = ParitySystem::new(n, cons.len());
    cons.iter()
        .enumerate()
        .all(|(id, c)| sys.push(id, &c.tuple, c.weight < 0.0).is_none())
}

fn solve_constraints(n: usize, cons: &[Constraint]) -> BalanceCertificate {
    let mut sys = ParitySystem::new(n, cons.len());
    for (id, c) in cons.iter().enumerate() {
        if let Some(origin) = sys.push(id, &c.tuple, c.weight < 0.0) {
            // shrink the merge-order certificate to an inclusion-minimal one
            let mut set: Vec<usize> = origin.ones().collect();
            let mut k = 0;
            while k < set.len() {
                let trial: Vec<&Constraint> = set
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &i)| &cons[i])
                    .collect();
                if feasible(n, &trial) {
                    k += 1;
                } else {
                    set.remove(k);
                }
            }
            let edges = set
                .into_iter()
                .map(|i| ConflictEdge {
                    edge: cons[i].edge,
                    tuple: cons[i].tuple.clone(),
                    weight: cons[i].weight,
                })
                .collect();
            return BalanceCertificate::Unbalanced(Conflict::Edges(edges));
        }
    }
    let bits = sys.solve();
    let mut sigma: Vec<i8> = bits.iter().map(|&b| if b { -1 } else { 1 }).collect();

    let mut uf = ParityUnionFind::new(n);
    for c in cons {
        for w in c.tuple.windows(2) {
            uf.union(w[0], w[1], false).expect("parity-free unions never conflict");
        }
    }
    let (components, count) = uf.labels(0..n);
    let mut flippable = vec![true; count];
    for c in cons {
        if c.tuple.len() % 2 == 1 {
            flippable[components[c.tuple[0]]] = false;
        }
    }
    // lowest node of every flippable component gets +1
    let mut seen = vec![false; count];
    for i in 0..n {
        let c = components[i];
        if !seen[c] {
            seen[c] = true;
            if flippable[c] && sigma[i] == -1 {
                for (j, s) in sigma.iter_mut().enumerate() {
                    if components[j] == c {
                        *s = -*s;
                    }
                }
            }
        }
    }
    BalanceCertificate::Balanced(Balanced {
        sigma: FactionVector(sigma),
        components,
        flippable,
    })
}

/// Balance of a uniform signed hypergraph.
pub fn detect_balance(h: &Hypergraph) -> Result<BalanceCertificate> {
    let orders = h.orders();
    if orders.len() > 1 {
        return Err(Error::InvalidArgument(format!(
            "hypergraph has layers of orders {orders:?}; test each layer or use detect_joint_balance"
        )));
    }
    Ok(solve_constraints(h.n(), &constraints_of(h, None)?))
}

/// Balance of a single layer.
pub fn detect_layer_balance(h: &Hypergraph, order: usize) -> Result<BalanceCertificate> {
    let cons = constraints_of(h, Some(order))?;
    if cons.is_empty() {
        return Err(Error::EmptyLayer(order));
    }
    Ok(solve_constraints(h.n(), &cons))
}

/// One faction vector balancing every layer at once.
pub fn detect_joint_balance(h: &Hypergraph) -> Result<BalanceCertificate> {
    Ok(solve_constraints(h.n(), &constraints_of(h, None)?))
}

/// Union-find over two-valued variables with parity-labelled edges.
#[derive(Debug, Clone)]
pub struct ParityUnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    // parity relative to parent
    parity: Vec<bool>,
}

impl ParityUnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
            parity: vec![false; n],
        }
    }

    /// Root and parity of `x` relative to it.
    pub fn find(&mut self, x: usize) -> (usize, bool) {
        let p = self.parent[x];
        if p == x {
            return (x, false);
        }
        let (root, up) = self.find(p);
        self.parity[x] ^= up;
        self.parent[x] = root;
        (root, self.parity[x])
    }

    /// Records `value(a) xor value(b) = parity`. Errors on contradiction.
    pub fn union(&mut self, a: usize, b: usize, parity: bool) -> std::result::Result<(), ()> {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return if pa ^ pb == parity { Ok(()) } else { Err(()) };
        }
        let (hi, lo) = if self.rank[ra] >= self.rank[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[lo] = hi;
        self.parity[lo] = pa ^ pb ^ parity;
        if self.rank[hi] == self.rank[lo] {
            self.rank[hi] += 1;
        }
        Ok(())
    }

    /// Dense class labels for `items`, numbered in order of first appearance.
    fn labels(&mut self, items: std::ops::Range<usize>) -> (Vec<usize>, usize) {
        let mut label_of_root = vec![usize::MAX; self.parent.len()];
        let mut out = Vec::with_capacity(items.len());
        let mut count = 0;
        for i in items {
            let (r, _) = self.find(i);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = count;
                count += 1;
            }
            out.push(label_of_root[r]);
        }
        (out, count)
    }
}

/// Reconciles balanced certificates computed on different layers over the same
/// node set, allowing a sign flip of any flippable component of any certificate.
pub fn combine_factions(certs: &[BalanceCertificate]) -> Result<BalanceCertificate> {
    let mut balanced = Vec::with_capacity(certs.len());
    for (c, cert) in certs.iter().enumerate() {
        match cert {
            BalanceCertificate::Balanced(b) => balanced.push(b),
            BalanceCertificate::Unbalanced(_) => {
                return Err(Error::InvalidArgument(format!("certificate {c} is not balanced")))
            }
        }
    }
    let Some(first) = balanced.first() else {
        return Err(Error::InvalidArgument("no certificates given".into()));
    };
    let n = first.sigma.len();
    if let Some(b) = balanced.iter().find(|b| b.sigma.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.sigma.len(),
        });
    }
    // variable 0 is the fixed anchor; then one flip variable per (certificate, component)
    let mut offsets = Vec::with_capacity(balanced.len());
    let mut total = 1;
    for b in &balanced {
        offsets.push(total);
        total += b.flippable.len();
    }
    let var = |c: usize, i: usize| offsets[c] + balanced[c].components[i];
    let mut uf = ParityUnionFind::new(total);
    for (c, b) in balanced.iter().enumerate() {
        for (comp, &flip) in b.flippable.iter().enumerate() {
            if !flip {
                uf.union(0, offsets[c] + comp, false).expect("fresh variable");
            }
        }
    }
    for (c, b) in balanced.iter().enumerate().skip(1) {
        for i in 0..n {
            let differ = first.sigma.0[i] != b.sigma.0[i];
            if uf.union(var(0, i), var(c, i), differ).is_err() {
                let comp = b.components[i];
                let nodes = (0..n).filter(|&j| b.components[j] == comp).collect();
                return Ok(BalanceCertificate::Unbalanced(Conflict::Factions { certificate: c, nodes }));
            }
        }
    }
    let anchor_root = uf.find(0).0;
    let anchor_parity = uf.find(0).1;
    let node_vars: Vec<usize> = (0..n).map(|i| var(0, i)).collect();
    let mut class_value: Vec<Option<bool>> = vec![None; total];
    class_value[anchor_root] = Some(anchor_parity);
    let mut sigma = vec![1i8; n];
    for i in 0..n {
        let (root, par) = uf.find(node_vars[i]);
        // flip value of the class root chosen so the class's lowest node keeps +1
        let root_value = *class_value[root].get_or_insert(par ^ (first.sigma.0[i] == -1));
        let flip = par ^ root_value;
        sigma[i] = if flip { -first.sigma.0[i] } else { first.sigma.0[i] };
    }
    let roots: Vec<usize> = node_vars.iter().map(|&v| uf.find(v).0).collect();
    let mut label = vec![usize::MAX; total];
    let mut components = Vec::with_capacity(n);
    let mut flippable = Vec::new();
    for &r in &roots {
        if label[r] == usize::MAX {
            label[r] = flippable.len();
            flippable.push(r != anchor_root);
        }
        components.push(label[r]);
    }
    Ok(BalanceCertificate::Balanced(Balanced {
        sigma: FactionVector(sigma),
        components,
        flippable,
    }))
}

/// `(L_D)[i, i2, .., ik] = sigma_i * L[i, i2, .., ik] * sigma_i2 * .. * sigma_ik`.
pub fn gauge_transform(l: &CubicalTensor, sigma: &FactionVector) -> Result<CubicalTensor> {
    if sigma.len() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            got: sigma.len(),
        });
    }
    Ok(l.map_values(|idx, w| w * f64::from(sigma.tuple_sign(idx))))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderAdvisory {
    Ok,
    Warning(String),
}

/// Signed dynamics only carry their bipartite-consensus guarantees for even orders.
pub fn even_order_guard(order: usize, signed: bool) -> OrderAdvisory {
    if signed && order % 2 == 1 {
        OrderAdvisory::Warning(format!(
            "order {order} is odd: the gauge transform is not a diagonal similarity and \
             bipartite consensus is not guaranteed"
        ))
    } else {
        OrderAdvisory::Ok
    }
}
