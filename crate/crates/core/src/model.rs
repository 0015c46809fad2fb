//! Cells, sparse tables, marginal vectors and moves for an arbitrary
//! hierarchical model.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::varset::{VarSet, MAX_VARS};

/// Size caps for enumeration-heavy operations. Exceeding a cap is an
/// error, never a silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest table size `|I|` scanned by pair/brute-force enumeration.
    pub max_cells: usize,
    /// Largest sample size enumerated by brute force.
    pub max_degree: u64,
    /// Largest vertex count for exponential subset scans.
    pub max_subset_vars: usize,
    /// Largest number of clique trees enumerated.
    pub max_clique_trees: usize,
    /// Largest number of tables enumerated by brute force at one degree.
    pub max_tables: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_cells: 4096,
            max_degree: 4,
            max_subset_vars: 16,
            max_clique_trees: 100_000,
            max_tables: 5_000_000,
        }
    }
}

impl Limits {
    pub(crate) fn check_cells(&self, model: &ModelSpec) -> Result<usize> {
        match model.num_cells() {
            Some(n) if n <= self.max_cells => Ok(n),
            Some(n) => Err(Error::too_large("table", n as u128, self.max_cells as u128)),
            None => Err(Error::too_large("table", u128::MAX, self.max_cells as u128)),
        }
    }
}

/// Levels and generating class of a hierarchical log-linear model.
#[derive(Clone, PartialEq, Eq)]
pub struct ModelSpec {
    levels: Vec<u32>,
    facets: Vec<VarSet>,
    strides: Vec<usize>,
    num_cells: Option<usize>,
}

impl ModelSpec {
    /// Validates and builds a model. Facets containing another facet are
    /// rejected rather than reduced.
    pub fn new(levels: Vec<u32>, facets: &[Vec<usize>]) -> Result<Self> {
        let m = levels.len();
        if m == 0 {
            return Err(Error::InvalidModel("at least one variable is required".into()));
        }
        if m > MAX_VARS {
            return Err(Error::InvalidModel(format!("at most {MAX_VARS} variables supported")));
        }
        if let Some(d) = levels.iter().position(|&l| l < 2) {
            return Err(Error::InvalidModel(format!("variable {d} has fewer than two levels")));
        }
        let mut sets = Vec::with_capacity(facets.len());
        for f in facets {
            if f.is_empty() {
                return Err(Error::InvalidModel("empty facet".into()));
            }
            let mut s = VarSet::empty();
            for &v in f {
                if v >= m {
                    return Err(Error::VariableOutOfRange(v));
                }
                s.insert(v);
            }
            sets.push(s);
        }
        if sets.is_empty() {
            return Err(Error::InvalidModel("no facets".into()));
        }
        for (a, &fa) in sets.iter().enumerate() {
            for (b, &fb) in sets.iter().enumerate() {
                if a != b && fa.is_subset(fb) {
                    return Err(Error::InvalidModel(format!(
                        "facet {fa:?} is contained in facet {fb:?}"
                    )));
                }
            }
        }
        let union = sets.iter().fold(VarSet::empty(), |acc, &s| acc.union(s));
        if union != VarSet::full(m) {
            return Err(Error::InvalidModel("facets do not cover every variable".into()));
        }
        let mut strides = alloc::vec![0usize; m];
        let mut acc: Option<usize> = Some(1);
        for d in (0..m).rev() {
            strides[d] = acc.unwrap_or(0);
            acc = acc.and_then(|a| a.checked_mul(levels[d] as usize));
        }
        Ok(ModelSpec {
            levels,
            facets: sets,
            strides,
            num_cells: acc,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn facets(&self) -> &[VarSet] {
        &self.facets
    }

    pub fn all_vars(&self) -> VarSet {
        VarSet::full(self.num_vars())
    }

    /// `|I|`, or `None` on overflow.
    pub fn num_cells(&self) -> Option<usize> {
        self.num_cells
    }

    /// Number of marginal cells of the variable subset `vars`.
    pub fn marginal_size(&self, vars: VarSet) -> Option<usize> {
        vars.iter()
            .try_fold(1usize, |acc, v| acc.checked_mul(self.levels[v] as usize))
    }

    pub fn check_cell(&self, cell: &Cell) -> Result<()> {
        if cell.0.len() != self.num_vars() {
            return Err(Error::InvalidCell(format!(
                "cell {cell:?} has length {}, expected {}",
                cell.0.len(),
                self.num_vars()
            )));
        }
        for (d, (&i, &l)) in cell.0.iter().zip(&self.levels).enumerate() {
            if i >= l {
                return Err(Error::InvalidCell(format!(
                    "level {i} of variable {d} out of range in {cell:?}"
                )));
            }
        }
        Ok(())
    }

    /// Row-major linear index, variable 0 most significant.
    pub fn cell_index(&self, cell: &Cell) -> usize {
        cell.0.iter().zip(&self.strides).map(|(&i, &s)| i as usize * s).sum()
    }

    pub fn cell_at(&self, mut index: usize) -> Cell {
        let mut v = alloc::vec![0u32; self.num_vars()];
        for (d, slot) in v.iter_mut().enumerate() {
            let s = self.strides[d];
            *slot = (index / s) as u32;
            index %= s;
        }
        Cell(v)
    }

    /// All cells in row-major order. Panics if `|I|` overflows.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let n = self.num_cells.expect("table size overflows usize");
        (0..n).map(move |i| self.cell_at(i))
    }

    /// Linear index of the marginal cell of `cell` over `vars`, with the
    /// lowest variable most significant.
    pub fn marginal_index(&self, cell: &[u32], vars: VarSet) -> usize {
        let mut idx = 0usize;
        for v in vars {
            idx = idx * self.levels[v] as usize + cell[v] as usize;
        }
        idx
    }
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("levels", &self.levels)
            .field("facets", &self.facets)
            .finish()
    }
}

/// A cell `(i_1, .., i_m)` of the contingency table, or a marginal cell
/// over a variable subset (listed in ascending variable order).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell(pub Vec<u32>);

impl Cell {
    pub fn new(levels: Vec<u32>) -> Self {
        Cell(levels)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// The marginal cell over `vars`.
    pub fn project(&self, vars: VarSet) -> Cell {
        Cell(vars.iter().map(|v| self.0[v]).collect())
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 && self.0.len() > 1 && self.0.iter().any(|&x| x > 9) {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str(")")
    }
}

/// Sparse nonnegative integer table; only positive counts are stored.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Table(BTreeMap<Cell, u64>);

impl Table {
    pub fn new() -> Self {
        Table(BTreeMap::new())
    }

    pub fn from_counts<I: IntoIterator<Item = (Cell, u64)>>(items: I) -> Self {
        let mut t = Table::new();
        for (c, k) in items {
            t.add(c, k);
        }
        t
    }

    /// The degree-two table `(i)(j)`; `i == j` gives count two at `i`.
    pub fn pair(i: Cell, j: Cell) -> Self {
        let mut t = Table::new();
        t.add(i, 1);
        t.add(j, 1);
        t
    }

    pub fn get(&self, cell: &Cell) -> u64 {
        self.0.get(cell).copied().unwrap_or(0)
    }

    pub fn add(&mut self, cell: Cell, count: u64) {
        if count > 0 {
            *self.0.entry(cell).or_insert(0) += count;
        }
    }

    /// Subtracts `count`, failing with `NegativeCell` without modifying
    /// the table when not enough mass is present.
    pub fn sub(&mut self, cell: &Cell, count: u64) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        match self.0.get_mut(cell) {
            Some(c) if *c > count => {
                *c -= count;
                Ok(())
            }
            Some(c) if *c == count => {
                self.0.remove(cell);
                Ok(())
            }
            _ => Err(Error::NegativeCell),
        }
    }

    pub fn sample_size(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = &Cell> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Cell, u64)> {
        self.0.iter().map(|(c, &k)| (c, k))
    }

    pub fn support_len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Table) -> bool {
        self.iter().all(|(c, k)| other.get(c) >= k)
    }

    pub fn min_cell(&self) -> Option<&Cell> {
        self.0.keys().next()
    }

    pub fn check_cells(&self, model: &ModelSpec) -> Result<()> {
        self.support().try_for_each(|c| model.check_cell(c))
    }
}

impl fmt::Debug for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("()");
        }
        for (c, k) in self.iter() {
            for _ in 0..k {
                write!(f, "{c:?}")?;
            }
        }
        Ok(())
    }
}

/// The marginal vector `b = An`: one sparse marginal table per facet, in
/// model facet order, plus the common degree.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MarginalVector {
    degree: u64,
    facets: Vec<BTreeMap<Cell, u64>>,
}

impl MarginalVector {
    /// Builds a marginal vector from per-facet marginal tables, checking
    /// that every facet total equals the same degree.
    pub fn from_facet_marginals(model: &ModelSpec, facets: Vec<BTreeMap<Cell, u64>>) -> Result<Self> {
        if facets.len() != model.facets().len() {
            return Err(Error::Inconsistent(format!(
                "expected {} facet marginals, got {}",
                model.facets().len(),
                facets.len()
            )));
        }
        let mut facets = facets;
        for (map, &f) in facets.iter_mut().zip(model.facets()) {
            map.retain(|_, k| *k > 0);
            for cell in map.keys() {
                if cell.0.len() != f.len() {
                    return Err(Error::InvalidCell(format!("marginal cell {cell:?} over {f:?}")));
                }
                for (i, v) in cell.0.iter().zip(f.iter()) {
                    if *i >= model.levels()[v] {
                        return Err(Error::InvalidCell(format!("marginal cell {cell:?} over {f:?}")));
                    }
                }
            }
        }
        let totals: Vec<u64> = facets.iter().map(|m| m.values().sum()).collect();
        let degree = totals[0];
        if totals.iter().any(|&t| t != degree) {
            return Err(Error::Inconsistent("facet totals differ".into()));
        }
        Ok(MarginalVector { degree, facets })
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn facet_marginals(&self) -> &[BTreeMap<Cell, u64>] {
        &self.facets
    }

    /// The marginal of a variable subset `vars`, taken from any facet
    /// containing it.
    pub fn marginal_of(&self, model: &ModelSpec, vars: VarSet) -> Option<BTreeMap<Cell, u64>> {
        let (j, &f) = model.facets().iter().enumerate().find(|(_, f)| vars.is_subset(**f))?;
        Some(project_marginal(&self.facets[j], f, vars))
    }
}

impl fmt::Debug for MarginalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("b").field("degree", &self.degree).field("facets", &self.facets).finish()
    }
}

/// Marginalizes a marginal table over `over` down to `onto ⊆ over`.
pub(crate) fn project_marginal(map: &BTreeMap<Cell, u64>, over: VarSet, onto: VarSet) -> BTreeMap<Cell, u64> {
    let positions: Vec<usize> = over
        .iter()
        .enumerate()
        .filter(|(_, v)| onto.contains(*v))
        .map(|(k, _)| k)
        .collect();
    let mut out = BTreeMap::new();
    for (cell, &k) in map {
        let key = Cell(positions.iter().map(|&p| cell.0[p]).collect());
        *out.entry(key).or_insert(0) += k;
    }
    out
}

/// The `vars`-marginal of `t`.
pub fn marginalize(t: &Table, vars: VarSet, model: &ModelSpec) -> Result<BTreeMap<Cell, u64>> {
    if let Some(v) = vars.difference(model.all_vars()).min() {
        return Err(Error::VariableOutOfRange(v));
    }
    let mut out = BTreeMap::new();
    for (cell, k) in t.iter() {
        *out.entry(cell.project(vars)).or_insert(0) += k;
    }
    Ok(out)
}

/// `b = An` for the model's generating class.
pub fn compute_b(t: &Table, model: &ModelSpec) -> Result<MarginalVector> {
    t.check_cells(model)?;
    let facets = model
        .facets()
        .iter()
        .map(|&f| marginalize(t, f, model))
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginalVector {
        degree: t.sample_size(),
        facets,
    })
}

/// Whether every pair of facet marginals agrees on the marginal of the
/// facets' intersection.
pub fn is_consistent(b: &MarginalVector, model: &ModelSpec) -> bool {
    let fs = model.facets();
    if b.facets.len() != fs.len() {
        return false;
    }
    let totals_agree = b.facets.iter().all(|m| m.values().sum::<u64>() == b.degree);
    if !totals_agree {
        return false;
    }
    for a in 0..fs.len() {
        for c in (a + 1)..fs.len() {
            let inter = fs[a].intersection(fs[c]);
            if project_marginal(&b.facets[a], fs[a], inter) != project_marginal(&b.facets[c], fs[c], inter) {
                return false;
            }
        }
    }
    true
}

/// A move `z = z⁺ − z⁻` with `A z⁺ = A z⁻`, stored in canonical
/// orientation: the smallest cell of the joint support lies in `z⁺`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Move {
    pos: Table,
    neg: Table,
}

impl Move {
    /// Builds a move from its two parts, validating disjoint nonempty
    /// supports and equal marginals, then orienting canonically.
    pub fn new(pos: Table, neg: Table, model: &ModelSpec) -> Result<Self> {
        if pos.is_empty() || neg.is_empty() {
            return Err(Error::IdenticalTables);
        }
        if pos.support().any(|c| neg.get(c) > 0) {
            return Err(Error::InvalidCell("move parts share a cell".into()));
        }
        if compute_b(&pos, model)? != compute_b(&neg, model)? {
            return Err(Error::MarginalMismatch);
        }
        Ok(Move::canonical(pos, neg))
    }

    /// Orients without validation; callers guarantee the invariants.
    pub(crate) fn canonical(pos: Table, neg: Table) -> Self {
        let p = pos.min_cell();
        let n = neg.min_cell();
        if n < p && n.is_some() || p.is_none() {
            Move { pos: neg, neg: pos }
        } else {
            Move { pos, neg }
        }
    }

    pub fn pos(&self) -> &Table {
        &self.pos
    }

    pub fn neg(&self) -> &Table {
        &self.neg
    }

    /// `deg A z⁺`.
    pub fn degree(&self) -> u64 {
        self.pos.sample_size()
    }

    /// Whether `z⁺` and `z⁻` are both `(i)(j)` with distinct cells.
    pub fn is_primitive(&self) -> bool {
        self.degree() == 2 && self.pos.support_len() == 2 && self.neg.support_len() == 2
    }
}

impl fmt::Debug for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} - {:?}", self.pos, self.neg)
    }
}

/// `t + sign·z` when it stays nonnegative.
pub fn apply_move(t: &Table, z: &Move, sign: i8) -> Result<Table> {
    let (plus, minus) = if sign >= 0 { (&z.pos, &z.neg) } else { (&z.neg, &z.pos) };
    if !minus.le(t) {
        return Err(Error::NegativeCell);
    }
    let mut out = t.clone();
    for (c, k) in minus.iter() {
        out.sub(c, k)?;
    }
    for (c, k) in plus.iter() {
        out.add(c.clone(), k);
    }
    Ok(out)
}

/// The move `±(t1 − t2)` with common cells cancelled.
pub fn move_from_tables(t1: &Table, t2: &Table, model: &ModelSpec) -> Result<Move> {
    if t1 == t2 {
        return Err(Error::IdenticalTables);
    }
    if compute_b(t1, model)? != compute_b(t2, model)? {
        return Err(Error::MarginalMismatch);
    }
    Ok(difference_move(t1, t2))
}

/// `t1 − t2` split into parts; tables must be distinct and share `b`.
pub(crate) fn difference_move(t1: &Table, t2: &Table) -> Move {
    let mut pos = Table::new();
    let mut neg = Table::new();
    for (c, k) in t1.iter() {
        let j = t2.get(c);
        if k > j {
            pos.add(c.clone(), k - j);
        }
    }
    for (c, k) in t2.iter() {
        let j = t1.get(c);
        if k > j {
            neg.add(c.clone(), k - j);
        }
    }
    Move::canonical(pos, neg)
}

/// A table of sample size two written as an unordered cell pair.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DegreeTwoTable {
    a: Cell,
    b: Cell,
}

impl DegreeTwoTable {
    pub fn new(i: Cell, j: Cell) -> Self {
        if i <= j {
            DegreeTwoTable { a: i, b: j }
        } else {
            DegreeTwoTable { a: j, b: i }
        }
    }

    pub fn cells(&self) -> (&Cell, &Cell) {
        (&self.a, &self.b)
    }

    pub fn to_table(&self) -> Table {
        Table::pair(self.a.clone(), self.b.clone())
    }

    pub fn from_table(t: &Table) -> Result<Self> {
        if t.sample_size() != 2 {
            return Err(Error::NotDegreeTwo);
        }
        let mut cells = t.iter().flat_map(|(c, k)| core::iter::repeat_n(c.clone(), k as usize));
        let i = cells.next().ok_or(Error::NotDegreeTwo)?;
        let j = cells.next().ok_or(Error::NotDegreeTwo)?;
        Ok(DegreeTwoTable::new(i, j))
    }
}

impl fmt::Debug for DegreeTwoTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:?}", self.a, self.b)
    }
}
