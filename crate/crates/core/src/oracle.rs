//! Brute-force ground truth: exhaustive fiber enumeration at any degree,
//! move-graph connectivity and induced-subgraph component scans.
//!
//! Internally a table of degree `d` is a sorted multiset of `d`
//! row-major cell indices.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::chordal::{Graph, UnionFind};
use crate::error::{Error, Result};
use crate::model::{apply_move, compute_b, Cell, DegreeTwoTable, Limits, MarginalVector, ModelSpec, Move, Table};
use crate::varset::VarSet;

/// `C(n + d - 1, d)`, saturating.
fn multiset_count(n: usize, d: u64) -> u128 {
    let mut acc: u128 = 1;
    for k in 0..d as u128 {
        acc = acc.saturating_mul(n as u128 + k) / (k + 1);
    }
    acc
}

/// Per-cell facet-marginal indices.
pub(crate) struct CellIndex {
    marg: Vec<Vec<u32>>,
}

impl CellIndex {
    pub(crate) fn new(model: &ModelSpec, limits: &Limits) -> Result<Self> {
        let n = limits.check_cells(model)?;
        let marg = (0..n)
            .map(|i| {
                let cell = model.cell_at(i);
                model
                    .facets()
                    .iter()
                    .map(|&f| model.marginal_index(&cell.0, f) as u32)
                    .collect()
            })
            .collect();
        Ok(CellIndex { marg })
    }

    fn len(&self) -> usize {
        self.marg.len()
    }

    fn key(&self, ms: &[u32]) -> Vec<u32> {
        let r = self.marg.first().map_or(0, Vec::len);
        let mut key = Vec::with_capacity(r * ms.len());
        for j in 0..r {
            let start = key.len();
            key.extend(ms.iter().map(|&c| self.marg[c as usize][j]));
            key[start..].sort_unstable();
        }
        key
    }
}

pub(crate) fn to_table(model: &ModelSpec, ms: &[u32]) -> Table {
    let mut t = Table::new();
    for &c in ms {
        t.add(model.cell_at(c as usize), 1);
    }
    t
}

pub(crate) fn to_flat(model: &ModelSpec, t: &Table) -> Vec<u32> {
    let mut ms = Vec::with_capacity(t.sample_size() as usize);
    for (c, k) in t.iter() {
        let idx = model.cell_index(c) as u32;
        ms.extend(core::iter::repeat_n(idx, k as usize));
    }
    ms.sort_unstable();
    ms
}

/// All tables of degree `d`, grouped into fibers. Groups are ordered by
/// an internal marginal key; members within a group are sorted.
pub(crate) fn flat_fibers(model: &ModelSpec, d: u64, limits: &Limits) -> Result<Vec<Vec<Vec<u32>>>> {
    let index = CellIndex::new(model, limits)?;
    let n = index.len();
    let count = multiset_count(n, d);
    if count > limits.max_tables as u128 {
        return Err(Error::too_large("tables of one degree", count, limits.max_tables as u128));
    }
    let mut groups: BTreeMap<Vec<u32>, Vec<Vec<u32>>> = BTreeMap::new();
    if d == 0 {
        groups.insert(Vec::new(), alloc::vec![Vec::new()]);
        return Ok(groups.into_values().collect());
    }
    let d = d as usize;
    let mut ms = alloc::vec![0u32; d];
    loop {
        groups.entry(index.key(&ms)).or_default().push(ms.clone());
        // advance the nondecreasing odometer
        let mut pos = d;
        while pos > 0 && ms[pos - 1] as usize == n - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        let next = ms[pos - 1] + 1;
        for x in &mut ms[pos - 1..] {
            *x = next;
        }
    }
    Ok(groups.into_values().collect())
}

/// All fibers of sample size `d`, each as a sorted member list.
pub fn fibers_of_degree(model: &ModelSpec, d: u64, limits: &Limits) -> Result<Vec<Vec<Table>>> {
    let mut out: Vec<Vec<Table>> = flat_fibers(model, d, limits)?
        .into_iter()
        .map(|g| {
            let mut ts: Vec<Table> = g.iter().map(|ms| to_table(model, ms)).collect();
            ts.sort();
            ts
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Every nonnegative integer table with marginal vector `b`, by
/// depth-first placement of unit masses at nondecreasing cells with
/// facet-marginal pruning.
pub fn enumerate_fiber_bruteforce(b: &MarginalVector, model: &ModelSpec, limits: &Limits) -> Result<Vec<Table>> {
    let index = CellIndex::new(model, limits)?;
    let d = b.degree();
    if d > limits.max_degree {
        return Err(Error::too_large("sample size", d as u128, limits.max_degree as u128));
    }
    let mut remaining: Vec<Vec<u64>> = Vec::with_capacity(model.facets().len());
    for (j, &f) in model.facets().iter().enumerate() {
        let size = model.marginal_size(f).ok_or(Error::too_large("marginal", u128::MAX, 0))?;
        let mut counts = alloc::vec![0u64; size];
        for (cell, &k) in &b.facet_marginals()[j] {
            let mut idx = 0usize;
            for (pos, v) in f.iter().enumerate() {
                idx = idx * model.levels()[v] as usize + cell.0[pos] as usize;
            }
            counts[idx] += k;
        }
        remaining.push(counts);
    }

    struct Dfs<'a> {
        index: &'a CellIndex,
        remaining: Vec<Vec<u64>>,
        stack: Vec<u32>,
        found: Vec<Vec<u32>>,
        depth: usize,
    }

    impl Dfs<'_> {
        fn fits(&self, c: usize) -> bool {
            self.index.marg[c]
                .iter()
                .enumerate()
                .all(|(j, &mi)| self.remaining[j][mi as usize] > 0)
        }

        fn shift(&mut self, c: usize, add: bool) {
            for (j, &mi) in self.index.marg[c].iter().enumerate() {
                let slot = &mut self.remaining[j][mi as usize];
                if add {
                    *slot += 1;
                } else {
                    *slot -= 1;
                }
            }
        }

        fn run(&mut self, start: usize) {
            if self.stack.len() == self.depth {
                self.found.push(self.stack.clone());
                return;
            }
            for c in start..self.index.len() {
                if self.fits(c) {
                    self.shift(c, false);
                    self.stack.push(c as u32);
                    self.run(c);
                    self.stack.pop();
                    self.shift(c, true);
                }
            }
        }
    }

    let mut dfs = Dfs {
        index: &index,
        remaining,
        stack: Vec::new(),
        found: Vec::new(),
        depth: d as usize,
    };
    dfs.run(0);
    let mut out: Vec<Table> = dfs
        .found
        .iter()
        .map(|ms| to_table(model, ms))
        .filter(|t| compute_b(t, model).is_ok_and(|tb| tb == *b))
        .collect();
    out.sort();
    Ok(out)
}

/// A flattened move direction: cells removed, cells added.
type FlatStep = (Vec<u32>, Vec<u32>);

/// Moves in flattened form, both signs, indexed by the smallest cell of
/// the part they remove.
pub(crate) struct FlatMoves {
    by_min_cell: BTreeMap<u32, Vec<FlatStep>>,
}

impl FlatMoves {
    pub(crate) fn new<'a, I: IntoIterator<Item = &'a Move>>(model: &ModelSpec, moves: I, max_degree: u64) -> Self {
        let mut by_min_cell: BTreeMap<u32, Vec<FlatStep>> = BTreeMap::new();
        for z in moves {
            if z.degree() > max_degree {
                continue;
            }
            let p = to_flat(model, z.pos());
            let n = to_flat(model, z.neg());
            by_min_cell.entry(n[0]).or_default().push((n.clone(), p.clone()));
            by_min_cell.entry(p[0]).or_default().push((p, n));
        }
        FlatMoves { by_min_cell }
    }
}

fn contains_multiset(big: &[u32], small: &[u32]) -> bool {
    let mut i = 0;
    for &x in small {
        while i < big.len() && big[i] < x {
            i += 1;
        }
        if i == big.len() || big[i] != x {
            return false;
        }
        i += 1;
    }
    true
}

fn apply_flat(t: &[u32], remove: &[u32], add: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(t.len());
    let mut r = remove.iter().peekable();
    for &x in t {
        if r.peek() == Some(&&x) {
            r.next();
        } else {
            out.push(x);
        }
    }
    out.extend_from_slice(add);
    out.sort_unstable();
    out
}

/// Component label (smallest member index) of each fiber member.
pub(crate) fn flat_components(members: &[Vec<u32>], moves: &FlatMoves) -> Vec<usize> {
    let index: BTreeMap<&[u32], usize> = members.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();
    let mut uf = UnionFind::new(members.len());
    for (a, m) in members.iter().enumerate() {
        let mut prev = None;
        for &c in m {
            if prev == Some(c) {
                continue;
            }
            prev = Some(c);
            let Some(cands) = moves.by_min_cell.get(&c) else { continue };
            for (remove, add) in cands {
                if contains_multiset(m, remove) {
                    if let Some(&b) = index.get(apply_flat(m, remove, add).as_slice()) {
                        uf.union(a, b);
                    }
                }
            }
        }
    }
    (0..members.len()).map(|i| uf.find(i)).collect()
}

/// Connected components of the graph on `members` whose edges are the
/// differences `±z`, `z ∈ moves`. Components are listed by smallest
/// member index.
pub fn fiber_graph_components(members: &[Table], moves: &[Move]) -> Vec<Vec<usize>> {
    let index: BTreeMap<&Table, usize> = members.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut uf = UnionFind::new(members.len());
    for (a, t) in members.iter().enumerate() {
        for z in moves {
            for sign in [1i8, -1] {
                if let Ok(u) = apply_move(t, z, sign) {
                    if let Some(&b) = index.get(&u) {
                        uf.union(a, b);
                    }
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..members.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    groups.into_values().collect()
}

pub fn fiber_graph_connected(members: &[Table], moves: &[Move]) -> bool {
    fiber_graph_components(members, moves).len() <= 1
}

/// Largest number of connected components over all nonempty induced
/// subgraphs, stopping early once `max_parts` is reached.
pub fn induced_component_scan(g: &Graph, max_parts: usize, limits: &Limits) -> Result<usize> {
    let vs: Vec<usize> = g.vertices().iter().collect();
    if vs.len() > limits.max_subset_vars {
        return Err(Error::too_large("vertex subsets", 1u128 << vs.len().min(127), 1u128 << limits.max_subset_vars));
    }
    let mut best = 0;
    for mask in 1u64..(1u64 << vs.len()) {
        let subset: VarSet = vs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &v)| v).collect();
        best = best.max(g.component_count(subset));
        if best >= max_parts {
            break;
        }
    }
    Ok(best)
}

/// All degree-two fibers, found by grouping every unordered cell pair by
/// its marginal vector.
pub fn degree_two_fibers_bruteforce(
    model: &ModelSpec,
    limits: &Limits,
) -> Result<BTreeMap<MarginalVector, Vec<DegreeTwoTable>>> {
    let n = limits.check_cells(model)?;
    let cells: Vec<Cell> = model.cells().collect();
    let mut groups: BTreeMap<MarginalVector, Vec<DegreeTwoTable>> = BTreeMap::new();
    for p in 0..n {
        for q in p..n {
            let t = Table::pair(cells[p].clone(), cells[q].clone());
            groups
                .entry(compute_b(&t, model)?)
                .or_default()
                .push(DegreeTwoTable::new(cells[p].clone(), cells[q].clone()));
        }
    }
    Ok(groups)
}

/// Size of the fiber of `(0…0)(1 on s, 0 elsewhere)`, counting subsets
/// `x ⊆ s` whose pair `{x, s∖x}` reproduces every facet marginal.
pub fn binary_pair_fiber_size(model: &ModelSpec, s: VarSet) -> u64 {
    let mut pairs = BTreeSet::new();
    let bits = s.bits();
    let mut x = bits;
    loop {
        let y = bits & !x;
        let ok = model.facets().iter().all(|f| {
            let (a, b) = (x & f.bits(), y & f.bits());
            (a == 0 && b == bits & f.bits()) || (b == 0 && a == bits & f.bits())
        });
        if ok {
            pairs.insert(x.min(y));
        }
        if x == 0 {
            break;
        }
        x = (x - 1) & bits;
    }
    pairs.len() as u64
}

/// Whether some induced subgraph on four or more vertices is a cycle.
/// Exponential; meant for graphs with at most about a dozen vertices.
pub fn has_chordless_cycle(g: &Graph) -> bool {
    let vs: Vec<usize> = g.vertices().iter().collect();
    for mask in 1u64..(1u64 << vs.len()) {
        if mask.count_ones() < 4 {
            continue;
        }
        let subset: VarSet = vs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &v)| v).collect();
        let all_degree_two = subset.iter().all(|v| g.neighbors(v).intersection(subset).len() == 2);
        if all_degree_two && g.component_count(subset) == 1 {
            return true;
        }
    }
    false
}
