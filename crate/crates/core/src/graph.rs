//! Structural text network: cosine similarities, top-K neighbor graphs and
//! the symmetric normalized propagation operator `D^-1/2 (A + I) D^-1/2`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::nn::Real;

/// Undirected graph over `n` text nodes. Each edge is stored once as
/// `(i, j)` with `i < j`; self-loops are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextGraph {
    n: usize,
    k: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl TextGraph {
    /// Builds the symmetric closure of `edges`, dropping duplicates.
    /// Self-loops are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop on node {i}")));
            }
            set.insert((i.min(j), i.max(j)));
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        Ok(Self {
            n,
            k: 0,
            edges,
            neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Neighbors selected per node when built from similarities; 0 otherwise.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Undirected edges, `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Relabels nodes: node `i` becomes `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::Shape(format!("permutation of length {} for {} nodes", perm.len(), self.n)));
        }
        let mut g = Self::from_edges(self.n, self.edges.iter().map(|&(i, j)| (perm[i], perm[j])))?;
        g.k = self.k;
        Ok(g)
    }

    /// One `i j` line per undirected edge, sorted.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (i, j) in &self.edges {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }
}

fn unit_rows<T: Real>(x: ArrayView2<'_, T>) -> Result<Array2<f64>> {
    let mut out = x.mapv(|v| v.to_f64_lossy());
    for (i, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        let norm = row.dot(&row).sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroNorm(i));
        }
        row /= norm;
    }
    Ok(out)
}

fn similarity_row(unit: &Array2<f64>, i: usize) -> Array1<f64> {
    let mut s = unit.dot(&unit.row(i));
    s.mapv_inplace(|v| v.clamp(-1.0, 1.0));
    s[i] = 1.0;
    s
}

/// Dense `n x n` cosine similarity matrix.
pub fn cosine_similarity_matrix<T: Real>(x: ArrayView2<'_, T>) -> Result<Array2<f64>> {
    let unit = unit_rows(x)?;
    let n = unit.nrows();
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        s.row_mut(i).assign(&similarity_row(&unit, i));
    }
    // symmetrize exactly: the two dot products can differ in the last bit
    for i in 0..n {
        for j in 0..i {
            let v = s[[j, i]];
            s[[i, j]] = v;
        }
    }
    Ok(s)
}

/// The `k` most similar `j != i`; ties go to the lower index.
fn top_k(row: ArrayView1<'_, f64>, i: usize, k: usize) -> Vec<usize> {
    let mut cand: Vec<usize> = (0..row.len()).filter(|&j| j != i).collect();
    let cmp = |a: &usize, b: &usize| {
        row[*b]
            .partial_cmp(&row[*a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    };
    if k < cand.len() {
        cand.select_nth_unstable_by(k, cmp);
        cand.truncate(k);
    }
    cand.sort_unstable_by(cmp);
    cand
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= K < n, got K = {k} with n = {n}")));
    }
    Ok(())
}

/// Links every node to its `k` most similar others, then OR-symmetrizes.
pub fn build_knn_graph(s: ArrayView2<'_, f64>, k: usize) -> Result<TextGraph> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::Shape(format!("similarity matrix must be square, got {:?}", s.dim())));
    }
    check_k(k, n)?;
    let mut edges = Vec::with_capacity(n * k);
    for i in 0..n {
        edges.extend(top_k(s.row(i), i, k).into_iter().map(|j| (i, j)));
    }
    let mut g = TextGraph::from_edges(n, edges)?;
    g.k = k;
    Ok(g)
}

/// Same graph as `build_knn_graph(cosine_similarity_matrix(x), k)`, computed
/// one similarity row at a time so memory stays `O(n * d)`.
pub fn knn_graph_from_features<T: Real>(x: ArrayView2<'_, T>, k: usize) -> Result<TextGraph> {
    let unit = unit_rows(x)?;
    let n = unit.nrows();
    check_k(k, n)?;
    let mut edges = Vec::with_capacity(n * k);
    for i in 0..n {
        let row = similarity_row(&unit, i);
        edges.extend(top_k(row.view(), i, k).into_iter().map(|j| (i, j)));
    }
    let mut g = TextGraph::from_edges(n, edges)?;
    g.k = k;
    Ok(g)
}

/// `D^-1/2 (A + I) D^-1/2` in compressed sparse row form. Symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

pub fn normalize_adjacency(g: &TextGraph) -> NormalizedAdjacency {
    let n = g.n();
    let deg: Vec<f64> = (0..n).map(|i| 1.0 + g.degree(i) as f64).collect();
    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::with_capacity(n + 2 * g.num_edges());
    let mut values = Vec::with_capacity(n + 2 * g.num_edges());
    indptr.push(0);
    for i in 0..n {
        let mut row: Vec<usize> = g.neighbors(i).to_vec();
        row.push(i);
        row.sort_unstable();
        for j in row {
            indices.push(j);
            values.push(1.0 / (deg[i] * deg[j]).sqrt());
        }
        indptr.push(indices.len());
    }
    NormalizedAdjacency {
        n,
        indptr,
        indices,
        values,
    }
}

impl NormalizedAdjacency {
    /// Identity operator, i.e. the normalization of an edgeless graph.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.indices[self.indptr[i]..self.indptr[i + 1]];
        match row.binary_search(&j) {
            Ok(p) => self.values[self.indptr[i] + p],
            Err(_) => 0.0,
        }
    }

    /// Row `i` as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                a[[i, j]] = v;
            }
        }
        a
    }

    /// `self * h`, rows accumulated in column order.
    pub fn matmul<T: Real>(&self, h: ArrayView2<'_, T>) -> Result<Array2<T>> {
        if h.nrows() != self.n {
            return Err(Error::Shape(format!(
                "operator over {} nodes applied to {} rows",
                self.n,
                h.nrows()
            )));
        }
        let mut out = Array2::zeros((self.n, h.ncols()));
        for (i, mut out_row) in out.axis_iter_mut(Axis(0)).enumerate() {
            for (j, v) in self.row(i) {
                out_row.scaled_add(T::from_f64_lossy(v), &h.row(j));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn cosine_hand_values() {
        let s = cosine_similarity_matrix(array![[1.0f64, 0.0], [0.0, 1.0]].view()).unwrap();
        assert_eq!(s[[0, 1]], 0.0);
        let s = cosine_similarity_matrix(array![[1.0f32, 2.0], [1.0, 2.0]].view()).unwrap();
        assert_abs_diff_eq!(s[[0, 1]], 1.0, epsilon = 1e-12);
        let s = cosine_similarity_matrix(array![[1.0f64, 2.0], [2.0, 1.0]].view()).unwrap();
        assert_abs_diff_eq!(s[[0, 1]], 0.8, epsilon = 1e-12);
        assert_eq!(s[[0, 0]], 1.0);
        assert_eq!(s[[0, 1]], s[[1, 0]]);
    }

    #[test]
    fn zero_row_named() {
        let err = cosine_similarity_matrix(array![[1.0f64, 0.0], [0.0, 0.0]].view()).unwrap_err();
        assert!(matches!(err, Error::ZeroNorm(1)));
    }

    #[test]
    fn ties_go_to_lower_index() {
        let s = Array2::from_elem((3, 3), 0.5);
        let g = build_knn_graph(s.view(), 1).unwrap();
        // 0 -> 1, 1 -> 0, 2 -> 0
        assert_eq!(g.edges(), &[(0, 1), (0, 2)]);
    }

    #[test]
    fn two_nodes() {
        let s = array![[1.0, 0.3], [0.3, 1.0]];
        assert_eq!(build_knn_graph(s.view(), 1).unwrap().edges(), &[(0, 1)]);
        assert!(build_knn_graph(s.view(), 2).is_err());
        assert!(build_knn_graph(s.view(), 0).is_err());
    }

    #[test]
    fn separated_clusters_have_no_cross_edges() {
        let mut rows = Vec::new();
        for i in 0..10 {
            let jitter = 0.01 * i as f64;
            if i < 5 {
                rows.extend([1.0, jitter, 0.0]);
            } else {
                rows.extend([0.0, jitter, 1.0]);
            }
        }
        let x = Array2::from_shape_vec((10, 3), rows).unwrap();
        let g = build_knn_graph(cosine_similarity_matrix(x.view()).unwrap().view(), 2).unwrap();
        assert!(g.edges().iter().all(|&(i, j)| (i < 5) == (j < 5)));
        assert!((0..10).all(|i| g.degree(i) >= 1));
    }

    #[test]
    fn normalized_small_graphs() {
        let single = normalize_adjacency(&TextGraph::from_edges(1, []).unwrap());
        assert_eq!(single.to_dense(), array![[1.0]]);
        let pair = normalize_adjacency(&TextGraph::from_edges(2, [(0, 1)]).unwrap());
        assert_eq!(pair.to_dense(), array![[0.5, 0.5], [0.5, 0.5]]);
        let path = normalize_adjacency(&TextGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap());
        let d = [2.0f64, 3.0, 2.0];
        let expect = |i: usize, j: usize| 1.0 / (d[i] * d[j]).sqrt();
        assert_abs_diff_eq!(path.get(0, 0), 0.5);
        assert_abs_diff_eq!(path.get(0, 1), expect(0, 1));
        assert_abs_diff_eq!(path.get(1, 1), 1.0 / 3.0);
        assert_eq!(path.get(0, 2), 0.0);
    }

    #[test]
    fn self_loops_not_stored() {
        assert!(TextGraph::from_edges(3, [(1, 1)]).is_err());
        let g = TextGraph::from_edges(3, [(1, 0), (0, 1), (2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.to_edge_list(), "0 1\n1 2\n");
    }

    fn random_features(seed: u64, n: usize, d: usize) -> Array2<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((n, d), || rng.random_range(-1.0..1.0))
    }

    proptest! {
        #[test]
        fn knn_graph_invariants(seed in any::<u64>(), n in 3usize..25, k in 1usize..5, scale in 0.01f64..100.0) {
            prop_assume!(k < n);
            let x = random_features(seed, n, 4);
            let s = cosine_similarity_matrix(x.view()).unwrap();
            let g = build_knn_graph(s.view(), k).unwrap();
            for &(i, j) in g.edges() {
                prop_assert!(g.has_edge(i, j) && g.has_edge(j, i));
            }
            prop_assert!((0..n).all(|i| g.degree(i) >= k));
            let scaled = build_knn_graph((&s * scale).view(), k).unwrap();
            prop_assert_eq!(scaled.edges(), g.edges());
            let streamed = knn_graph_from_features(x.view(), k).unwrap();
            prop_assert_eq!(streamed.edges(), g.edges());
        }

        #[test]
        fn normalization_entrywise(seed in any::<u64>(), n in 1usize..15, p in 0.0f64..1.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random::<f64>() < p {
                        edges.push((i, j));
                    }
                }
            }
            let g = TextGraph::from_edges(n, edges).unwrap();
            let a = normalize_adjacency(&g).to_dense();
            for i in 0..n {
                for j in 0..n {
                    let aij = if i == j || g.has_edge(i, j) { 1.0 } else { 0.0 };
                    let di = 1.0 + g.degree(i) as f64;
                    let dj = 1.0 + g.degree(j) as f64;
                    prop_assert!((a[[i, j]] - aij / (di * dj).sqrt()).abs() < 1e-15);
                    prop_assert_eq!(a[[i, j]], a[[j, i]]);
                    prop_assert!(a[[i, j]] <= 1.0);
                }
            }
        }
    }
}
