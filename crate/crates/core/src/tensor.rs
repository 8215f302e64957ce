//! Cubical tensors and the kernels built on them.
//!
//! A [`CubicalTensor`] of order `k` and dimension `n` is stored in coordinate
//! form: a lexicographically sorted list of 0-based index tuples with their
//! nonzero weights. The first index of a tuple is the tail; the remaining
//! `k - 1` indices are the heads, so that
//!
//! ```text
//! (T x^{k-1})_i = sum_{i2..ik} T[i, i2, .., ik] * x[i2] * .. * x[ik]
//! ```
//!
//! [`DenseTensor`] is the flat, tail-major (first index slowest) counterpart,
//! available when `n^k` is small enough to materialize.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Largest `n^k` for which [`CubicalTensor::to_dense`] will allocate.
pub const DENSE_LIMIT: usize = 10_000_000;

/// Largest dimension accepted by [`CubicalTensor::exact_reducibility`].
pub const EXACT_REDUCIBILITY_LIMIT: usize = 24;

/// Entries at or above this value count as nonnegative after construction arithmetic.
pub const NONNEG_TOL: f64 = -1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct CubicalTensor {
    order: usize,
    dim: usize,
    // flattened tuples, `order` indices per entry
    indices: Vec<usize>,
    values: Vec<f64>,
}

fn check_shape(order: usize, dim: usize) -> Result<()> {
    if order < 2 {
        return Err(Error::InvalidArgument(format!("order must be >= 2, got {order}")));
    }
    if dim < 1 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    Ok(())
}

fn is_diagonal(idx: &[usize]) -> bool {
    idx.iter().all(|&i| i == idx[0])
}

impl CubicalTensor {
    /// The zero tensor.
    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        check_shape(order, dim)?;
        Ok(Self {
            order,
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        })
    }

    /// Builds a tensor from 0-based index tuples. Repeated tuples are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_entries<I>(order: usize, dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        check_shape(order, dim)?;
        let mut acc: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (idx, w) in entries {
            if idx.len() != order {
                return Err(Error::InvalidArgument(format!(
                    "index tuple {idx:?} has length {}, expected {order}",
                    idx.len()
                )));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(Error::InvalidArgument(format!(
                    "index {bad} in tuple {idx:?} is out of range for dimension {dim}"
                )));
            }
            if !w.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite weight at {idx:?}")));
            }
            *acc.entry(idx).or_insert(0.0) += w;
        }
        Ok(Self::from_sorted_map(order, dim, acc))
    }

    fn from_sorted_map(order: usize, dim: usize, map: BTreeMap<Vec<usize>, f64>) -> Self {
        let mut indices = Vec::with_capacity(map.len() * order);
        let mut values = Vec::with_capacity(map.len());
        for (idx, w) in map {
            if w != 0.0 {
                indices.extend_from_slice(&idx);
                values.push(w);
            }
        }
        Self {
            order,
            dim,
            indices,
            values,
        }
    }

    /// The order-`k` identity: ones exactly on the fully diagonal positions.
    pub fn identity(order: usize, dim: usize) -> Result<Self> {
        Self::from_entries(order, dim, (0..dim).map(|i| (vec![i; order], 1.0)))
    }

    /// Every entry equal to `value`.
    pub fn filled(order: usize, dim: usize, value: f64) -> Result<Self> {
        check_shape(order, dim)?;
        let total = dim
            .checked_pow(order as u32)
            .filter(|&t| t <= DENSE_LIMIT)
            .ok_or_else(|| Error::InvalidArgument("filled tensor too large".into()))?;
        let mut entries = Vec::with_capacity(total);
        let mut idx = vec![0usize; order];
        for _ in 0..total {
            entries.push((idx.clone(), value));
            advance(&mut idx, dim);
        }
        Self::from_entries(order, dim, entries)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries in lexicographic order of their 0-based tuples.
    pub fn entries(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        self.indices
            .chunks_exact(self.order)
            .zip(self.values.iter().copied())
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        if idx.len() != self.order {
            return 0.0;
        }
        let (mut lo, mut hi) = (0usize, self.values.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            let probe = &self.indices[mid * self.order..(mid + 1) * self.order];
            match probe.cmp(idx) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return self.values[mid],
            }
        }
        0.0
    }

    /// Diagonal entries `T[i, i, .., i]`, including implicit zeros.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for (idx, w) in self.entries() {
            if is_diagonal(idx) {
                d[idx[0]] = w;
            }
        }
        d
    }

    /// Applies `f` to every stored value, keeping the sparsity pattern (zeros are dropped).
    pub fn map_values(&self, mut f: impl FnMut(&[usize], f64) -> f64) -> Self {
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for (idx, w) in self.entries() {
            let v = f(idx, w);
            if v != 0.0 {
                indices.extend_from_slice(idx);
                values.push(v);
            }
        }
        Self {
            order: self.order,
            dim: self.dim,
            indices,
            values,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_values(|_, w| c * w)
    }

    pub fn abs(&self) -> Self {
        self.map_values(|_, w| w.abs())
    }

    /// Entrywise `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut map: BTreeMap<Vec<usize>, f64> = self
            .entries()
            .map(|(idx, w)| (idx.to_vec(), w))
            .collect();
        for (idx, w) in other.entries() {
            *map.entry(idx.to_vec()).or_insert(0.0) += c * w;
        }
        Ok(Self::from_sorted_map(self.order, self.dim, map))
    }

    /// `self + s * identity`.
    pub fn shift_diagonal(&self, s: f64) -> Self {
        let id = Self::identity(self.order, self.dim).expect("shape already validated");
        self.add_scaled(s, &id).expect("same shape")
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return Err(Error::InvalidArgument(format!(
                "order mismatch: {} vs {}",
                self.order, other.order
            )));
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    /// `T x^{k-1}`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.dim];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked variant of [`apply`](Self::apply) that accumulates into `out`
    /// after zeroing it. Lengths must match `dim`.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (idx, w) in self.entries() {
            let mut p = w;
            for &j in &idx[1..] {
                p *= x[j];
            }
            out[idx[0]] += p;
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&w| w >= NONNEG_TOL)
    }

    /// First off-diagonal entry that is negative, if any (0-based tuple).
    pub fn first_metzler_violation(&self) -> Option<(Vec<usize>, f64)> {
        self.entries()
            .find(|(idx, w)| !is_diagonal(idx) && *w < NONNEG_TOL)
            .map(|(idx, w)| (idx.to_vec(), w))
    }

    pub fn is_metzler(&self) -> bool {
        self.first_metzler_violation().is_none()
    }

    /// `B = A * d[i1]^{1-k} * d[i2] * .. * d[ik]`, the diagonal similarity
    /// `Diag(d)^{1-k} A Diag(d)`.
    pub fn diagonal_similarity(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: d.len(),
            });
        }
        if let Some(i) = d.iter().position(|&v| v == 0.0 || !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "diagonal entry {} is {}; similarity needs nonzero finite entries",
                i + 1,
                d[i]
            )));
        }
        let tail_exp = 1 - self.order as i32;
        Ok(self.map_values(|idx, w| {
            let mut v = w * d[idx[0]].powi(tail_exp);
            for &j in &idx[1..] {
                v *= d[j];
            }
            v
        }))
    }

    /// Splits a Metzler tensor as `A = B - s * identity` with `B >= 0` and the
    /// smallest admissible shift `s = max(0, -min_i A[i, .., i])`.
    pub fn decompose_metzler(&self) -> Result<(Self, f64)> {
        if let Some((idx, value)) = self.first_metzler_violation() {
            return Err(Error::NotMetzler {
                index: idx.iter().map(|i| i + 1).collect(),
                value,
            });
        }
        let min_diag = self.diagonal().into_iter().fold(f64::INFINITY, f64::min);
        let s = (-min_diag).max(0.0);
        let b = if s > 0.0 { self.shift_diagonal(s) } else { self.clone() };
        // exact cancellation on the diagonal can leave a tiny negative residue
        let b = b.map_values(|idx, w| if is_diagonal(idx) && w < 0.0 && w >= NONNEG_TOL { 0.0 } else { w });
        Ok((b, s))
    }

    /// Adjacency lists of the digraph with an arc `i -> j` whenever a nonzero
    /// entry with tail `i` has `j` among its heads. Fully diagonal entries are ignored.
    pub fn influence_digraph(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.dim];
        for (idx, _) in self.entries() {
            if is_diagonal(idx) {
                continue;
            }
            let tail = idx[0];
            for &j in &idx[1..] {
                if j != tail {
                    adj[tail].push(j);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    /// True iff the influence digraph is strongly connected.
    ///
    /// Every irreducible tensor passes this check; the converse does not hold
    /// for `k >= 3`, so a `true` here does not imply
    /// [`exact_reducibility`](Self::exact_reducibility) returns `None`.
    pub fn weak_irreducibility(&self) -> bool {
        let adj = self.influence_digraph();
        let mut rev = vec![Vec::new(); self.dim];
        for (i, succ) in adj.iter().enumerate() {
            for &j in succ {
                rev[j].push(i);
            }
        }
        reaches_all(&adj) && reaches_all(&rev)
    }

    /// Searches for a nonempty proper subset `I` (0-based, sorted) with
    /// `T[i1, i2, .., ik] = 0` whenever `i1` is in `I` and no head lies in `I`.
    /// Subsets are enumerated in increasing bitmask order.
    pub fn exact_reducibility(&self) -> Result<Option<Vec<usize>>> {
        let n = self.dim;
        if n > EXACT_REDUCIBILITY_LIMIT {
            return Err(Error::UnsupportedSize {
                dim: n,
                limit: EXACT_REDUCIBILITY_LIMIT,
            });
        }
        if n == 1 {
            return Ok(None);
        }
        // per tail, the distinct head masks of nonzero entries
        let mut heads: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (idx, _) in self.entries() {
            let mask = idx[1..].iter().fold(0u32, |m, &j| m | (1 << j));
            heads[idx[0]].push(mask);
        }
        for h in &mut heads {
            h.sort_unstable();
            h.dedup();
        }
        let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        'subset: for set in 1..full {
            for (tail, masks) in heads.iter().enumerate() {
                if set & (1 << tail) == 0 {
                    continue;
                }
                if masks.iter().any(|&m| m & set == 0) {
                    continue 'subset;
                }
            }
            return Ok(Some((0..n).filter(|&i| set & (1 << i) != 0).collect()));
        }
        Ok(None)
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        let total = self
            .dim
            .checked_pow(self.order as u32)
            .filter(|&t| t <= DENSE_LIMIT)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "dense form of order {} dimension {} exceeds {DENSE_LIMIT} entries",
                    self.order, self.dim
                ))
            })?;
        let mut data = vec![0.0; total];
        for (idx, w) in self.entries() {
            data[dense_offset(idx, self.dim)] = w;
        }
        Ok(DenseTensor {
            order: self.order,
            dim: self.dim,
            data,
        })
    }

    /// Interchange form: `{"order": k, "dim": n, "entries": [[i1, .., ik, w], ..]}` with 1-based indices.
    pub fn to_json_value(&self) -> Value {
        let entries: Vec<Value> = self
            .entries()
            .map(|(idx, w)| {
                let mut row: Vec<Value> = idx.iter().map(|&i| json!(i + 1)).collect();
                row.push(json!(w));
                Value::Array(row)
            })
            .collect();
        json!({ "order": self.order, "dim": self.dim, "entries": entries })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("tensor json is always serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        Self::from_json_value(&v)
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let field = |name: &str| -> Result<usize> {
            v.get(name)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::schema(name, "missing or not a nonnegative integer"))
        };
        let order = field("order")?;
        let dim = field("dim")?;
        check_shape(order, dim)?;
        let rows = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::schema("entries", "missing or not an array"))?;
        let mut entries = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            let ctx = format!("entries[{r}]");
            let row = row
                .as_array()
                .ok_or_else(|| Error::schema(&ctx, "not an array"))?;
            if row.len() != order + 1 {
                return Err(Error::schema(
                    &ctx,
                    format!("expected {} values (indices then weight), got {}", order + 1, row.len()),
                ));
            }
            let mut idx = Vec::with_capacity(order);
            for (p, cell) in row[..order].iter().enumerate() {
                let i = cell
                    .as_u64()
                    .ok_or_else(|| Error::schema(format!("{ctx}[{p}]"), "index is not a positive integer"))?
                    as usize;
                if i == 0 || i > dim {
                    return Err(Error::schema(
                        format!("{ctx}[{p}]"),
                        format!("index {i} outside 1..={dim}"),
                    ));
                }
                idx.push(i - 1);
            }
            let w = row[order]
                .as_f64()
                .ok_or_else(|| Error::schema(format!("{ctx}[{order}]"), "weight is not a number"))?;
            entries.push((idx, w));
        }
        Self::from_entries(order, dim, entries)
    }
}

fn reaches_all(adj: &[Vec<usize>]) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

fn dense_offset(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |off, &i| off * dim + i)
}

// odometer increment, last index fastest
fn advance(idx: &mut [usize], dim: usize) {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < dim {
            return;
        }
        *slot = 0;
    }
}

/// Flat tail-major storage: entry `(i1, .., ik)` lives at
/// `((i1 * n + i2) * n + ..) * n + ik`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    order: usize,
    dim: usize,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(order: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(order, dim)?;
        let expected = dim.checked_pow(order as u32).unwrap_or(usize::MAX);
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(Self { order, dim, data })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[dense_offset(idx, self.dim)]
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let n = self.dim;
        let block = self.data.len() / n;
        let mut out = vec![0.0; n];
        let mut heads = vec![0usize; self.order - 1];
        for (i, o) in out.iter_mut().enumerate() {
            heads.iter_mut().for_each(|h| *h = 0);
            let row = &self.data[i * block..(i + 1) * block];
            for &w in row {
                if w != 0.0 {
                    *o += heads.iter().fold(w, |p, &j| p * x[j]);
                }
                advance(&mut heads, n);
            }
        }
        Ok(out)
    }

    pub fn to_sparse(&self) -> CubicalTensor {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut idx = vec![0usize; self.order];
        for &w in &self.data {
            if w != 0.0 {
                indices.extend_from_slice(&idx);
                values.push(w);
            }
            advance(&mut idx, self.dim);
        }
        CubicalTensor {
            order: self.order,
            dim: self.dim,
            indices,
            values,
        }
    }
}

/// Componentwise `x_i^p`.
pub fn hadamard_power(x: &[f64], p: u32) -> Vec<f64> {
    x.iter().map(|v| v.powi(p as i32)).collect()
}

/// Candidate solution of `A x^{k-1} = lambda x^{[k-1]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    pub x: Vec<f64>,
    /// `max_i |(A x^{k-1})_i - lambda x_i^{k-1}|`, computed on construction.
    pub residual: f64,
}

impl EigenPair {
    pub fn new(tensor: &CubicalTensor, lambda: f64, x: Vec<f64>) -> Result<Self> {
        let residual = eigen_residual(tensor, lambda, &x)?;
        Ok(Self { lambda, x, residual })
    }

    pub fn accepted(&self, tol: f64) -> bool {
        self.residual <= tol
    }

    /// Strictly positive eigenvector.
    pub fn is_h_plus_plus(&self) -> bool {
        self.x.iter().all(|&v| v > 0.0)
    }
}

pub fn eigen_residual(tensor: &CubicalTensor, lambda: f64, x: &[f64]) -> Result<f64> {
    let ax = tensor.apply(x)?;
    let p = tensor.order() as i32 - 1;
    Ok(ax
        .iter()
        .zip(x)
        .map(|(a, xi)| (a - lambda * xi.powi(p)).abs())
        .fold(0.0, f64::max))
}
