//! Independence graphs and chordal-graph machinery: perfect elimination
//! orderings, maximal cliques, clique trees, boundary cliques and the
//! boundary-clique elimination order.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::varset::{VarSet, MAX_VARS};

/// Undirected simple graph on a subset of the labels `0..n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graph {
    vertices: VarSet,
    adj: Vec<VarSet>,
}

impl Graph {
    /// Edgeless graph on `0..n`.
    pub fn new(n: usize) -> Self {
        assert!(n <= MAX_VARS, "at most {MAX_VARS} vertices");
        Graph {
            vertices: VarSet::full(n),
            adj: alloc::vec![VarSet::empty(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Self loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(self.vertices.contains(u) && self.vertices.contains(v));
        if u != v {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        }
    }

    pub fn vertices(&self) -> VarSet {
        self.vertices
    }

    /// Size of the label space (`n`), not the vertex count.
    pub fn label_bound(&self) -> usize {
        self.adj.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.adj.len() && self.adj[u].contains(v)
    }

    pub fn neighbors(&self, v: usize) -> VarSet {
        self.adj[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in self.vertices {
            for v in self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_clique(&self, set: VarSet) -> bool {
        set.iter().all(|v| set.difference(VarSet::singleton(v)).is_subset(self.adj[v]))
    }

    /// The subgraph induced by `subset`, keeping the original labels.
    pub fn induced(&self, subset: VarSet) -> Graph {
        let keep = subset.intersection(self.vertices);
        let adj = self
            .adj
            .iter()
            .enumerate()
            .map(|(v, &a)| if keep.contains(v) { a.intersection(keep) } else { VarSet::empty() })
            .collect();
        Graph { vertices: keep, adj }
    }

    /// Connected components of the subgraph induced by `subset`, ordered
    /// by smallest vertex.
    pub fn components(&self, subset: VarSet) -> Vec<VarSet> {
        let mut left = subset.intersection(self.vertices);
        let mut out = Vec::new();
        while let Some(start) = left.min() {
            let mut comp = VarSet::singleton(start);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let mut next = VarSet::empty();
                for v in frontier {
                    next = next.union(self.adj[v]);
                }
                frontier = next.intersection(subset).difference(comp);
                comp = comp.union(frontier);
            }
            left = left.difference(comp);
            out.push(comp);
        }
        out
    }

    pub fn component_count(&self, subset: VarSet) -> usize {
        self.components(subset).len()
    }
}

/// `G^D`: an edge between two variables iff some facet contains both.
pub fn independence_graph(model: &ModelSpec) -> Graph {
    let mut g = Graph::new(model.num_vars());
    for &f in model.facets() {
        for u in f {
            for v in f {
                if u < v {
                    g.add_edge(u, v);
                }
            }
        }
    }
    g
}

/// A perfect elimination ordering found by maximum-cardinality search
/// (ties to the smallest label) and verified for zero fill-in, or `None`
/// when the graph is not chordal.
pub fn perfect_elimination_ordering(g: &Graph) -> Option<Vec<usize>> {
    let mut numbered = VarSet::empty();
    let mut visit = Vec::with_capacity(g.vertices.len());
    while numbered != g.vertices {
        let v = g
            .vertices
            .difference(numbered)
            .iter()
            .max_by(|&a, &b| {
                let wa = g.adj[a].intersection(numbered).len();
                let wb = g.adj[b].intersection(numbered).len();
                wa.cmp(&wb).then(b.cmp(&a))
            })
            .expect("unnumbered vertex");
        visit.push(v);
        numbered.insert(v);
    }
    visit.reverse();
    if is_perfect_elimination_ordering(g, &visit) {
        Some(visit)
    } else {
        None
    }
}

/// Zero fill-in check: the later neighbours of each vertex form a clique.
pub fn is_perfect_elimination_ordering(g: &Graph, order: &[usize]) -> bool {
    if order.len() != g.vertices.len() || order.iter().copied().collect::<VarSet>() != g.vertices {
        return false;
    }
    let mut later = g.vertices;
    for &v in order {
        later.remove(v);
        if !g.is_clique(g.adj[v].intersection(later)) {
            return false;
        }
    }
    true
}

pub fn is_chordal(g: &Graph) -> bool {
    perfect_elimination_ordering(g).is_some()
}

/// Maximal cliques of a chordal graph, sorted.
pub fn maximal_cliques(g: &Graph) -> Result<Vec<VarSet>> {
    let peo = perfect_elimination_ordering(g).ok_or(Error::NotChordal)?;
    let mut later = g.vertices;
    let mut candidates = Vec::with_capacity(peo.len());
    for &v in &peo {
        later.remove(v);
        candidates.push(g.adj[v].intersection(later).union(VarSet::singleton(v)));
    }
    let mut cliques: Vec<VarSet> = candidates
        .iter()
        .copied()
        .filter(|&c| !candidates.iter().any(|&d| d != c && c.is_subset(d)))
        .collect();
    cliques.sort();
    cliques.dedup();
    Ok(cliques)
}

/// Chordal independence graph whose maximal cliques are exactly the
/// facets.
pub fn is_decomposable(model: &ModelSpec) -> bool {
    let g = independence_graph(model);
    match maximal_cliques(&g) {
        Ok(cliques) => {
            let mut facets = model.facets().to_vec();
            facets.sort();
            facets == cliques
        }
        Err(_) => false,
    }
}

/// A tree on the maximal cliques satisfying the running-intersection
/// property.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CliqueTree {
    cliques: Vec<VarSet>,
    edges: Vec<(usize, usize)>,
}

impl CliqueTree {
    /// Builds a tree from cliques and edges, checking that it spans the
    /// nodes without cycles and has the running-intersection property.
    pub fn new(cliques: Vec<VarSet>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let k = cliques.len();
        if k == 0 || edges.len() + 1 != k {
            return Err(Error::InvalidModel("clique tree needs exactly k-1 edges".into()));
        }
        let mut uf = UnionFind::new(k);
        for &(a, b) in &edges {
            if a >= k || b >= k || !uf.union(a, b) {
                return Err(Error::InvalidModel("clique tree edges do not form a tree".into()));
            }
        }
        let mut edges: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort();
        let t = CliqueTree { cliques, edges };
        if !t.has_running_intersection() {
            return Err(Error::InvalidModel("running-intersection property fails".into()));
        }
        Ok(t)
    }

    pub fn cliques(&self) -> &[VarSet] {
        &self.cliques
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn separators(&self) -> Vec<VarSet> {
        self.edges
            .iter()
            .map(|&(a, b)| self.cliques[a].intersection(self.cliques[b]))
            .collect()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == node || b == node).count()
    }

    /// Degree-one nodes.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.cliques.len()).filter(|&n| self.degree(n) == 1).collect()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = alloc::vec![Vec::new(); self.cliques.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Node path from `s` to `t`.
    pub fn path(&self, s: usize, t: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut parent = alloc::vec![usize::MAX; self.cliques.len()];
        parent[s] = s;
        let mut stack = alloc::vec![s];
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if parent[w] == usize::MAX {
                    parent[w] = u;
                    stack.push(w);
                }
            }
        }
        let mut path = alloc::vec![t];
        let mut cur = t;
        while cur != s {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Removing edge `e` splits the tree in two; returns the unions of
    /// the cliques on each side `(V_e, V'_e)`, the first containing the
    /// edge's smaller endpoint.
    pub fn split(&self, e: usize) -> (VarSet, VarSet) {
        let (a, b) = self.edges[e];
        let adj = self.adjacency();
        let mut side = alloc::vec![false; self.cliques.len()];
        side[a] = true;
        let mut stack = alloc::vec![a];
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !side[w] && !(u == a && w == b) {
                    side[w] = true;
                    stack.push(w);
                }
            }
        }
        let mut va = VarSet::empty();
        let mut vb = VarSet::empty();
        for (k, &c) in self.cliques.iter().enumerate() {
            if side[k] {
                va = va.union(c);
            } else {
                vb = vb.union(c);
            }
        }
        (va, vb)
    }

    /// `D_s ∩ D_t ⊆ D_u` for every `D_u` on the path between them.
    pub fn has_running_intersection(&self) -> bool {
        let k = self.cliques.len();
        for s in 0..k {
            for t in (s + 1)..k {
                let inter = self.cliques[s].intersection(self.cliques[t]);
                if self.path(s, t).iter().any(|&u| !inter.is_subset(self.cliques[u])) {
                    return false;
                }
            }
        }
        true
    }

    /// Whether the nodes are exactly the maximal cliques of `g`.
    pub fn is_clique_tree_of(&self, g: &Graph) -> bool {
        let mut mine = self.cliques.clone();
        mine.sort();
        matches!(maximal_cliques(g), Ok(c) if c == mine) && self.has_running_intersection()
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

fn weighted_clique_pairs(cliques: &[VarSet]) -> Vec<(usize, usize, usize)> {
    let mut pairs = Vec::new();
    for a in 0..cliques.len() {
        for b in (a + 1)..cliques.len() {
            pairs.push((cliques[a].intersection(cliques[b]).len(), a, b));
        }
    }
    // heaviest first, then lexicographic clique-index pairs
    pairs.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    pairs
}

/// The canonical clique tree: Kruskal maximum-weight spanning tree on
/// clique-intersection sizes. Empty intersections join components.
pub fn clique_tree(g: &Graph) -> Result<CliqueTree> {
    let cliques = maximal_cliques(g)?;
    let mut uf = UnionFind::new(cliques.len());
    let mut edges = Vec::new();
    for (_, a, b) in weighted_clique_pairs(&cliques) {
        if uf.union(a, b) {
            edges.push((a, b));
        }
    }
    CliqueTree::new(cliques, edges)
}

/// Every clique tree of `g` (the maximum-weight spanning trees of the
/// clique intersection graph). Fails with `TooLarge` past `cap` trees.
pub fn enumerate_clique_trees(g: &Graph, cap: usize) -> Result<Vec<CliqueTree>> {
    let cliques = maximal_cliques(g)?;
    let k = cliques.len();
    if k == 1 {
        return Ok(alloc::vec![CliqueTree::new(cliques, Vec::new())?]);
    }
    let pairs = weighted_clique_pairs(&cliques);
    let best: usize = {
        let mut uf = UnionFind::new(k);
        pairs.iter().filter(|&&(_, a, b)| uf.union(a, b)).map(|p| p.0).sum()
    };
    let mut found = Vec::new();
    let mut chosen = Vec::new();
    search_trees(&pairs, 0, k - 1, 0, best, &mut UnionFind::new(k), &mut chosen, &mut found, cap)?;
    let mut trees = Vec::with_capacity(found.len());
    for edges in found {
        let t = CliqueTree::new(cliques.clone(), edges)?;
        if t.has_running_intersection() {
            trees.push(t);
        }
    }
    Ok(trees)
}

#[allow(clippy::too_many_arguments)]
fn search_trees(
    pairs: &[(usize, usize, usize)],
    idx: usize,
    needed: usize,
    weight: usize,
    best: usize,
    uf: &mut UnionFind,
    chosen: &mut Vec<(usize, usize)>,
    found: &mut Vec<Vec<(usize, usize)>>,
    cap: usize,
) -> Result<()> {
    if needed == 0 {
        if weight == best {
            if found.len() >= cap {
                return Err(Error::too_large("clique tree count", found.len() as u128 + 1, cap as u128));
            }
            found.push(chosen.clone());
        }
        return Ok(());
    }
    if pairs.len() - idx < needed {
        return Ok(());
    }
    // pairs are sorted by weight, so the next `needed` are the best case
    let bound: usize = pairs[idx..idx + needed].iter().map(|p| p.0).sum();
    if weight + bound < best {
        return Ok(());
    }
    let (w, a, b) = pairs[idx];
    let (ra, rb) = (uf.find(a), uf.find(b));
    if ra != rb {
        let saved = uf.parent.clone();
        uf.union(a, b);
        chosen.push((a, b));
        search_trees(pairs, idx + 1, needed - 1, weight + w, best, uf, chosen, found, cap)?;
        chosen.pop();
        uf.parent = saved;
    }
    search_trees(pairs, idx + 1, needed, weight, best, uf, chosen, found, cap)
}

/// A boundary clique with its simplicial (simply separated) vertices and
/// the remaining separator part.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BoundaryClique {
    pub clique: VarSet,
    pub simplicial: VarSet,
    pub separator: VarSet,
}

/// All boundary cliques, in clique order. A complete graph yields its
/// single clique with every vertex simplicial.
pub fn boundary_cliques(g: &Graph) -> Result<Vec<BoundaryClique>> {
    let cliques = maximal_cliques(g)?;
    let mut out = Vec::new();
    for &d in &cliques {
        let simplicial: VarSet = d
            .iter()
            .filter(|&v| g.neighbors(v).union(VarSet::singleton(v)).is_subset(d))
            .collect();
        if simplicial.is_empty() {
            continue;
        }
        let separator = d.difference(simplicial);
        let boundary =
            cliques.len() == 1 || cliques.iter().any(|&e| e != d && d.intersection(e) == separator);
        if boundary {
            out.push(BoundaryClique {
                clique: d,
                simplicial,
                separator,
            });
        }
    }
    Ok(out)
}

/// Variable order obtained by repeatedly taking the boundary clique whose
/// smallest simply separated vertex is minimal, emitting its simplicial
/// vertices in ascending order and deleting them. The result is a perfect
/// elimination ordering; the first vertex is the lowest variable.
pub fn elimination_variable_order(g: &Graph) -> Result<Vec<usize>> {
    let mut remaining = g.clone();
    let mut order = Vec::with_capacity(g.vertices.len());
    while !remaining.vertices.is_empty() {
        let bcs = boundary_cliques(&remaining)?;
        let pick = bcs
            .iter()
            .min_by_key(|bc| bc.simplicial.min())
            .ok_or(Error::NotChordal)?;
        order.extend(pick.simplicial.iter());
        remaining = remaining.induced(remaining.vertices.difference(pick.simplicial));
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn set(v: &[usize]) -> VarSet {
        v.iter().copied().collect()
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
    }

    fn complete(n: usize) -> Graph {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in (u + 1)..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    /// Cliques {0,3}, {1,3}, {2,3,4}: all intersections equal {3}.
    fn hub_graph() -> Graph {
        Graph::from_edges(5, &[(0, 3), (1, 3), (2, 3), (2, 4), (3, 4)])
    }

    /// Triangle {3,4,5} with pendant edges 0-3, 1-4, 2-5.
    fn net_graph() -> Graph {
        Graph::from_edges(6, &[(0, 3), (1, 4), (2, 5), (3, 4), (3, 5), (4, 5)])
    }

    #[test]
    fn independence_graph_examples() {
        let m = ModelSpec::new(vec![2; 3], &[vec![0], vec![1], vec![2]]).unwrap();
        assert!(independence_graph(&m).edges().is_empty());
        let m = ModelSpec::new(vec![2; 3], &[vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(independence_graph(&m).edges(), vec![(0, 1), (1, 2)]);
        // {1,2},{2,3},{3,4} for r = 3
        let m = ModelSpec::new(vec![2; 4], &[vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        assert_eq!(independence_graph(&m).edges(), vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn chordality() {
        assert!(!is_chordal(&cycle(4)));
        assert!(!is_chordal(&cycle(5)));
        assert!(is_chordal(&cycle(3)));
        assert!(is_chordal(&complete(5)));
        assert!(is_chordal(&Graph::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4)])));
        assert!(is_chordal(&hub_graph()));
        assert!(is_chordal(&net_graph()));
        assert!(is_chordal(&Graph::new(0)));
    }

    #[test]
    fn cliques_examples() {
        assert_eq!(
            maximal_cliques(&Graph::new(3)).unwrap(),
            vec![set(&[0]), set(&[1]), set(&[2])]
        );
        assert_eq!(
            maximal_cliques(&Graph::from_edges(3, &[(0, 1), (1, 2)])).unwrap(),
            vec![set(&[0, 1]), set(&[1, 2])]
        );
        assert_eq!(
            maximal_cliques(&hub_graph()).unwrap(),
            vec![set(&[0, 3]), set(&[1, 3]), set(&[2, 3, 4])]
        );
        assert_eq!(maximal_cliques(&cycle(4)).unwrap_err(), Error::NotChordal);
    }

    #[test]
    fn clique_tree_examples() {
        let t = clique_tree(&hub_graph()).unwrap();
        assert!(t.has_running_intersection());
        assert_eq!(t.edges(), &[(0, 1), (0, 2)]);

        // the hub {3,4,5} carries three leaves
        let t = clique_tree(&net_graph()).unwrap();
        assert_eq!(t.cliques()[3], set(&[3, 4, 5]));
        assert_eq!(t.edges(), &[(0, 3), (1, 3), (2, 3)]);
        assert_eq!(t.leaves(), vec![0, 1, 2]);

        let path = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let t = clique_tree(&path).unwrap();
        assert_eq!(t.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(t.separators(), vec![set(&[1]), set(&[2])]);
        assert_eq!(t.leaves(), vec![0, 2]);

        let t = clique_tree(&Graph::new(4)).unwrap();
        assert!(t.separators().iter().all(|s| s.is_empty()));
        assert_eq!(t.edges().len(), 3);
        assert_eq!(clique_tree(&cycle(4)).unwrap_err(), Error::NotChordal);
    }

    #[test]
    fn tree_enumeration() {
        assert_eq!(enumerate_clique_trees(&net_graph(), 100).unwrap().len(), 1);
        // every pairwise intersection is {3}, so any spanning tree works
        assert_eq!(enumerate_clique_trees(&hub_graph(), 100).unwrap().len(), 3);
        let chain = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(enumerate_clique_trees(&chain, 100).unwrap().len(), 1);
        assert_eq!(enumerate_clique_trees(&Graph::new(3), 100).unwrap().len(), 3);
        assert_eq!(enumerate_clique_trees(&Graph::new(4), 100).unwrap().len(), 16);
        assert!(matches!(
            enumerate_clique_trees(&Graph::new(4), 10),
            Err(Error::TooLarge { .. })
        ));
        assert_eq!(enumerate_clique_trees(&complete(3), 10).unwrap().len(), 1);
    }

    #[test]
    fn boundary_clique_examples() {
        let path = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let bcs = boundary_cliques(&path).unwrap();
        assert_eq!(bcs.len(), 2);
        assert_eq!((bcs[0].clique, bcs[0].simplicial), (set(&[0, 1]), set(&[0])));
        assert_eq!((bcs[1].clique, bcs[1].simplicial), (set(&[2, 3]), set(&[3])));

        let k = boundary_cliques(&complete(3)).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].simplicial, set(&[0, 1, 2]));
        assert!(k[0].separator.is_empty());

        let hub = boundary_cliques(&hub_graph()).unwrap();
        let cl: Vec<VarSet> = hub.iter().map(|b| b.clique).collect();
        assert_eq!(cl, vec![set(&[0, 3]), set(&[1, 3]), set(&[2, 3, 4])]);

        let net = boundary_cliques(&net_graph()).unwrap();
        let cl: Vec<VarSet> = net.iter().map(|b| b.clique).collect();
        assert_eq!(cl, vec![set(&[0, 3]), set(&[1, 4]), set(&[2, 5])]);
    }

    #[test]
    fn elimination_order_examples() {
        assert_eq!(elimination_variable_order(&complete(4)).unwrap(), vec![0, 1, 2, 3]);
        let path = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let order = elimination_variable_order(&path).unwrap();
        assert_eq!(order[0], 0);
        assert!(is_perfect_elimination_ordering(&path, &order));
        let order = elimination_variable_order(&hub_graph()).unwrap();
        assert!(is_perfect_elimination_ordering(&hub_graph(), &order));
        assert_eq!(elimination_variable_order(&cycle(4)).unwrap_err(), Error::NotChordal);
    }

    #[test]
    fn decomposability() {
        let chain = ModelSpec::new(vec![2; 3], &[vec![0, 1], vec![1, 2]]).unwrap();
        assert!(is_decomposable(&chain));
        let no3 = ModelSpec::new(vec![2; 3], &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert!(!is_decomposable(&no3));
        let c4 = ModelSpec::new(vec![2; 4], &[vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]).unwrap();
        assert!(!is_decomposable(&c4));
    }
}
