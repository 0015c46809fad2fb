//! Fibers of sample size two: degenerate and non-degenerate variables,
//! connected components of the induced graph `G(Δ̄_b)`, component
//! patterns, explicit members and the `B_nd` / `B⁰_nd` fiber families.
//!
//! A member of a fiber with components `Γ_1..Γ_c` is addressed by an
//! *orientation*: bit `l-1` set means component `Γ_{l+1}` (0-based index
//! `l >= 1`) is flipped relative to the member `n⁰` whose first cell
//! carries side A of every component. Side A of a component is the
//! pattern holding the lower level of its smallest variable.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::chordal::{boundary_cliques, independence_graph, is_chordal, maximal_cliques, Graph};
use crate::error::{Error, Result};
use crate::model::{compute_b, is_consistent, Cell, DegreeTwoTable, Limits, MarginalVector, ModelSpec, Table};
use crate::varset::VarSet;

/// Degenerate / non-degenerate split of the variables for a degree-two
/// marginal vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub nondegenerate: VarSet,
    /// `Some(level)` for degenerate variables (mass two on one level).
    pub degenerate_levels: Vec<Option<u32>>,
    /// `Some((lo, hi))` for non-degenerate variables.
    pub level_pairs: Vec<Option<(u32, u32)>>,
}

/// A connected component `Γ` of `G(Δ̄_b)` with its two `Γ`-marginal cells
/// of count one, listed over `vars` in ascending variable order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub vars: VarSet,
    pub side_a: Vec<u32>,
    pub side_b: Vec<u32>,
}

fn check_degree_two(b: &MarginalVector, model: &ModelSpec) -> Result<()> {
    if b.degree() != 2 {
        return Err(Error::NotDegreeTwo);
    }
    if !is_consistent(b, model) {
        return Err(Error::Inconsistent("facet marginals disagree".into()));
    }
    Ok(())
}

pub fn classify_variables(b: &MarginalVector, model: &ModelSpec) -> Result<Classification> {
    check_degree_two(b, model)?;
    let m = model.num_vars();
    let mut out = Classification {
        nondegenerate: VarSet::empty(),
        degenerate_levels: alloc::vec![None; m],
        level_pairs: alloc::vec![None; m],
    };
    for v in 0..m {
        let marg = b
            .marginal_of(model, VarSet::singleton(v))
            .ok_or(Error::VariableOutOfRange(v))?;
        let levels: Vec<(u32, u64)> = marg.iter().map(|(c, &k)| (c.0[0], k)).collect();
        match levels.as_slice() {
            [(l, 2)] => out.degenerate_levels[v] = Some(*l),
            [(l1, 1), (l2, 1)] => {
                out.nondegenerate.insert(v);
                out.level_pairs[v] = Some((*l1.min(l2), *l1.max(l2)));
            }
            _ => return Err(Error::Inconsistent(format!("variable {v} marginal {levels:?}"))),
        }
    }
    Ok(out)
}

/// Components of `G(Δ̄_b)` and their patterns, by propagating the pairing
/// of facet marginal cells along shared variables.
pub fn component_patterns(b: &MarginalVector, model: &ModelSpec) -> Result<Vec<Component>> {
    let cls = classify_variables(b, model)?;
    patterns_for(b, model, &cls, &independence_graph(model))
}

fn patterns_for(
    b: &MarginalVector,
    model: &ModelSpec,
    cls: &Classification,
    g: &Graph,
) -> Result<Vec<Component>> {
    let m = model.num_vars();
    let mut side_a: Vec<Option<u32>> = alloc::vec![None; m];
    let mut side_b: Vec<Option<u32>> = alloc::vec![None; m];
    let mut comps = Vec::new();
    for gamma in g.components(cls.nondegenerate) {
        let start = gamma.min().expect("nonempty component");
        let (lo, hi) = cls.level_pairs[start].expect("non-degenerate");
        side_a[start] = Some(lo);
        side_b[start] = Some(hi);
        let mut queue = alloc::vec![start];
        while let Some(u) = queue.pop() {
            for (j, &f) in model.facets().iter().enumerate() {
                if !f.contains(u) {
                    continue;
                }
                let pos_u = f.iter().position(|v| v == u).expect("u in facet");
                let cells: Vec<(&Cell, u64)> = b.facet_marginals()[j].iter().map(|(c, &k)| (c, k)).collect();
                let (ca, cb) = match cells.as_slice() {
                    [(c1, 1), (c2, 1)] if c1.0[pos_u] == side_a[u].unwrap() && c2.0[pos_u] == side_b[u].unwrap() => (*c1, *c2),
                    [(c1, 1), (c2, 1)] if c2.0[pos_u] == side_a[u].unwrap() && c1.0[pos_u] == side_b[u].unwrap() => (*c2, *c1),
                    _ => return Err(Error::Inconsistent(format!("facet {f:?} cannot pair variable {u}"))),
                };
                for (k, w) in f.iter().enumerate() {
                    if let Some(level) = cls.degenerate_levels[w] {
                        if ca.0[k] != level || cb.0[k] != level {
                            return Err(Error::Inconsistent(format!("degenerate variable {w} in facet {f:?}")));
                        }
                        continue;
                    }
                    match (side_a[w], side_b[w]) {
                        (None, None) => {
                            side_a[w] = Some(ca.0[k]);
                            side_b[w] = Some(cb.0[k]);
                            queue.push(w);
                        }
                        (Some(a), Some(bb)) if a == ca.0[k] && bb == cb.0[k] => {}
                        _ => return Err(Error::Inconsistent(format!("pairing contradiction at variable {w}"))),
                    }
                }
            }
        }
        comps.push(Component {
            vars: gamma,
            side_a: gamma.iter().map(|v| side_a[v].expect("assigned")).collect(),
            side_b: gamma.iter().map(|v| side_b[v].expect("assigned")).collect(),
        });
    }
    Ok(comps)
}

/// A degree-two marginal vector together with its derived structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberKey {
    b: MarginalVector,
    classification: Classification,
    components: Vec<Component>,
}

impl FiberKey {
    pub fn analyze(b: MarginalVector, model: &ModelSpec) -> Result<Self> {
        let cls = classify_variables(&b, model)?;
        let components = patterns_for(&b, model, &cls, &independence_graph(model))?;
        let key = FiberKey {
            b,
            classification: cls,
            components,
        };
        // Realizability: the first member must reproduce b.
        if compute_b(&key.member(0).to_table(), model)? != key.b {
            return Err(Error::Inconsistent("component patterns do not realize b".into()));
        }
        Ok(key)
    }

    pub fn from_table(t: &Table, model: &ModelSpec) -> Result<Self> {
        FiberKey::analyze(compute_b(t, model)?, model)
    }

    pub fn b(&self) -> &MarginalVector {
        &self.b
    }

    pub fn classification(&self) -> &Classification {
        &self.classification
    }

    pub fn nondegenerate(&self) -> VarSet {
        self.classification.nondegenerate
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// `c(b)`; zero when every variable is degenerate.
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// `2^{c(b)-1}`, or 1 when `Δ̄_b = ∅`.
    pub fn fiber_size(&self) -> u64 {
        match self.components.len() {
            0 => 1,
            c => 1u64 << (c - 1),
        }
    }

    /// The member with the given orientation.
    pub fn member(&self, orientation: u64) -> DegreeTwoTable {
        let m = self.classification.degenerate_levels.len();
        let mut i = alloc::vec![0u32; m];
        let mut j = alloc::vec![0u32; m];
        for (v, lvl) in self.classification.degenerate_levels.iter().enumerate() {
            if let Some(l) = lvl {
                i[v] = *l;
                j[v] = *l;
            }
        }
        for (l, comp) in self.components.iter().enumerate() {
            let flipped = l > 0 && orientation >> (l - 1) & 1 == 1;
            let (a, b) = if flipped { (&comp.side_b, &comp.side_a) } else { (&comp.side_a, &comp.side_b) };
            for (k, v) in comp.vars.iter().enumerate() {
                i[v] = a[k];
                j[v] = b[k];
            }
        }
        DegreeTwoTable::new(Cell(i), Cell(j))
    }

    /// Orientation of a member, or `None` when `t` is not in the fiber.
    pub fn orientation_of(&self, t: &DegreeTwoTable) -> Option<u64> {
        if self.components.is_empty() {
            let (x, y) = t.cells();
            return (x == y && DegreeTwoTable::new(x.clone(), y.clone()) == self.member(0)).then_some(0);
        }
        let (x, y) = t.cells();
        let first = &self.components[0];
        let matches = |cell: &Cell, comp: &Component, side: &[u32]| comp.vars.iter().zip(side).all(|(v, &l)| cell.0[v] == l);
        let i = if matches(x, first, &first.side_a) { x } else if matches(y, first, &first.side_a) { y } else { return None };
        let mut bits = 0u64;
        for (l, comp) in self.components.iter().enumerate().skip(1) {
            if matches(i, comp, &comp.side_b) {
                bits |= 1 << (l - 1);
            } else if !matches(i, comp, &comp.side_a) {
                return None;
            }
        }
        (bits < self.fiber_size() && self.member(bits) == *t).then_some(bits)
    }

    /// Every member, indexed by orientation.
    pub fn members(&self) -> Vec<DegreeTwoTable> {
        (0..self.fiber_size()).map(|o| self.member(o)).collect()
    }

    /// Number of orientation bits, `κ(b) = c(b) - 1`.
    pub fn kappa(&self) -> usize {
        self.components.len().saturating_sub(1)
    }
}

/// A degree-two fiber with its members listed by orientation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fiber {
    pub key: FiberKey,
    pub members: Vec<DegreeTwoTable>,
}

impl Fiber {
    pub fn new(key: FiberKey) -> Self {
        let members = key.members();
        Fiber { key, members }
    }
}

/// `|F_b| = 2^{c(b)-1}`.
pub fn fiber_size(b: &MarginalVector, model: &ModelSpec) -> Result<u64> {
    Ok(FiberKey::analyze(b.clone(), model)?.fiber_size())
}

pub fn enumerate_fiber(b: &MarginalVector, model: &ModelSpec) -> Result<Fiber> {
    Ok(Fiber::new(FiberKey::analyze(b.clone(), model)?))
}

/// `B⁰_nd`: one standardized key per nonempty `Δ̄ ⊆ Δ` whose induced graph
/// has at least two components. Degenerate variables sit at level 0 and
/// each component is patterned all-0 / all-1.
pub fn enumerate_representative_fibers(model: &ModelSpec, limits: &Limits) -> Result<Vec<FiberKey>> {
    let m = model.num_vars();
    if m > limits.max_subset_vars.max(20) {
        return Err(Error::too_large("variable subsets", 1u128 << m.min(127), 1u128 << 20));
    }
    let g = independence_graph(model);
    let mut keys = Vec::new();
    for bits in 1u64..(1u64 << m) {
        let dbar = VarSet::from_bits(bits);
        if g.component_count(dbar) < 2 {
            continue;
        }
        let zero = Cell(alloc::vec![0; m]);
        let ones = Cell((0..m).map(|v| u32::from(dbar.contains(v))).collect());
        keys.push(FiberKey::from_table(&Table::pair(zero, ones), model)?);
    }
    keys.sort_by(|a, b| a.b.cmp(&b.b));
    Ok(keys)
}

/// `B_nd`: every degree-two fiber with at least two members.
///
/// Scans all unordered cell pairs and keeps the pair that is the
/// orientation-0 member of its fiber, so each fiber is reported once
/// without materializing the grouping. The plain group-by-`b` scan lives
/// in [`crate::oracle::degree_two_fibers_bruteforce`].
pub fn enumerate_all_degree2_fibers(model: &ModelSpec, limits: &Limits) -> Result<Vec<FiberKey>> {
    let n = limits.check_cells(model)?;
    let g = independence_graph(model);
    let cells: Vec<Cell> = model.cells().collect();
    let m = model.num_vars();
    let mut keys = Vec::new();
    let mut comp_cache: BTreeMap<u64, Vec<VarSet>> = BTreeMap::new();
    for p in 0..n {
        for q in (p + 1)..n {
            let (x, y) = (&cells[p].0, &cells[q].0);
            let mut diff = 0u64;
            for v in 0..m {
                if x[v] != y[v] {
                    diff |= 1 << v;
                }
            }
            let comps = comp_cache
                .entry(diff)
                .or_insert_with(|| g.components(VarSet::from_bits(diff)));
            if comps.len() < 2 {
                continue;
            }
            let first = comps[0].min().expect("nonempty");
            let (i, j) = if x[first] < y[first] { (x, y) } else { (y, x) };
            let canonical = comps.iter().all(|c| {
                let v = VarSet::min(*c).expect("nonempty");
                i[v] < j[v]
            });
            if canonical {
                keys.push(FiberKey::from_table(&Table::pair(cells[p].clone(), cells[q].clone()), model)?);
            }
        }
    }
    keys.sort_by(|a, b| a.b.cmp(&b.b));
    Ok(keys)
}

/// Three pairwise non-adjacent vertices, if any.
pub fn independent_triple(g: &Graph) -> Option<[usize; 3]> {
    let vs: Vec<usize> = g.vertices().iter().collect();
    for (a, &x) in vs.iter().enumerate() {
        for (b, &y) in vs.iter().enumerate().skip(a + 1) {
            if g.has_edge(x, y) {
                continue;
            }
            for &z in &vs[b + 1..] {
                if !g.has_edge(x, z) && !g.has_edge(y, z) {
                    return Some([x, y, z]);
                }
            }
        }
    }
    None
}

/// Boundary-clique criterion for a unique minimal Markov basis on a
/// chordal graph: a single clique, or exactly two boundary cliques whose
/// union contains every clique.
pub fn boundary_clique_unique(g: &Graph) -> Result<bool> {
    let cliques = maximal_cliques(g)?;
    if cliques.len() <= 1 {
        return Ok(true);
    }
    let bcs = boundary_cliques(g)?;
    if bcs.len() != 2 {
        return Ok(false);
    }
    let cover = bcs[0].clique.union(bcs[1].clique);
    Ok(cliques.iter().all(|c| c.is_subset(cover)))
}

/// Outcome of the uniqueness test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Uniqueness {
    pub nonunique: bool,
    /// Three mutually non-adjacent variables spanning a four-member fiber.
    pub witness: Option<[usize; 3]>,
}

/// Whether minimal Markov bases are non-unique: some induced subgraph of
/// `G^D` has three or more components. Chordal graphs use the
/// boundary-clique criterion; other graphs the independent-triple search.
pub fn minimal_bases_nonunique(model: &ModelSpec) -> Uniqueness {
    let g = independence_graph(model);
    let witness = independent_triple(&g);
    let nonunique = if is_chordal(&g) {
        let unique = boundary_clique_unique(&g).expect("chordal");
        debug_assert_eq!(unique, witness.is_none());
        !unique
    } else {
        witness.is_some()
    };
    Uniqueness { nonunique, witness }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(v: &[u32]) -> Cell {
        Cell(v.to_vec())
    }

    fn set(v: &[usize]) -> VarSet {
        v.iter().copied().collect()
    }

    fn indep(m: usize) -> ModelSpec {
        ModelSpec::new(vec![2; m], &(0..m).map(|v| vec![v]).collect::<Vec<_>>()).unwrap()
    }

    fn b_of(i: &[u32], j: &[u32], model: &ModelSpec) -> MarginalVector {
        compute_b(&Table::pair(c(i), c(j)), model).unwrap()
    }

    #[test]
    fn classify_examples() {
        let m = indep(3);
        let cls = classify_variables(&b_of(&[0, 0, 0], &[1, 1, 1], &m), &m).unwrap();
        assert_eq!(cls.nondegenerate, set(&[0, 1, 2]));
        assert!(cls.degenerate_levels.iter().all(|d| d.is_none()));

        let cls = classify_variables(&b_of(&[0, 0, 0], &[1, 1, 0], &m), &m).unwrap();
        assert_eq!(cls.nondegenerate, set(&[0, 1]));
        assert_eq!(cls.degenerate_levels[2], Some(0));

        let cls = classify_variables(&b_of(&[1, 0, 1], &[1, 0, 1], &m), &m).unwrap();
        assert!(cls.nondegenerate.is_empty());

        let b3 = compute_b(&Table::from_counts([(c(&[0, 0, 0]), 3)]), &m).unwrap();
        assert_eq!(classify_variables(&b3, &m).unwrap_err(), Error::NotDegreeTwo);
    }

    #[test]
    fn pattern_examples() {
        let m = indep(3);
        let comps = component_patterns(&b_of(&[0, 0, 0], &[1, 1, 1], &m), &m).unwrap();
        assert_eq!(comps.len(), 3);
        for comp in &comps {
            assert_eq!((comp.side_a.as_slice(), comp.side_b.as_slice()), (&[0][..], &[1][..]));
        }

        let sat = ModelSpec::new(vec![2, 2], &[vec![0, 1]]).unwrap();
        let comps = component_patterns(&b_of(&[0, 0], &[1, 1], &sat), &sat).unwrap();
        assert_eq!(comps, vec![Component { vars: set(&[0, 1]), side_a: vec![0, 0], side_b: vec![1, 1] }]);

        let chain = ModelSpec::new(vec![2; 3], &[vec![0, 1], vec![1, 2]]).unwrap();
        let comps = component_patterns(&b_of(&[0, 0, 0], &[1, 1, 1], &chain), &chain).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].side_a, vec![0, 0, 0]);
        assert_eq!(comps[0].side_b, vec![1, 1, 1]);
    }

    #[test]
    fn fiber_sizes() {
        let m3 = indep(3);
        assert_eq!(fiber_size(&b_of(&[0, 0, 0], &[1, 1, 1], &m3), &m3).unwrap(), 4);
        let m4 = indep(4);
        assert_eq!(fiber_size(&b_of(&[0, 0, 0, 0], &[1, 1, 1, 1], &m4), &m4).unwrap(), 8);
        let chain = ModelSpec::new(vec![2; 3], &[vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(fiber_size(&b_of(&[0, 0, 0], &[1, 1, 1], &chain), &chain).unwrap(), 1);
    }

    #[test]
    fn four_member_fiber_matches_listing() {
        // m = 4 with the last variable degenerate at level 1
        let m = indep(4);
        let f = enumerate_fiber(&b_of(&[0, 0, 0, 1], &[1, 1, 1, 1], &m), &m).unwrap();
        let expected: Vec<DegreeTwoTable> = [
            ([0, 0, 0, 1], [1, 1, 1, 1]),
            ([0, 1, 0, 1], [1, 0, 1, 1]),
            ([0, 0, 1, 1], [1, 1, 0, 1]),
            ([0, 1, 1, 1], [1, 0, 0, 1]),
        ]
        .iter()
        .map(|(i, j)| DegreeTwoTable::new(c(i), c(j)))
        .collect();
        assert_eq!(f.members, expected);
        for (o, t) in f.members.iter().enumerate() {
            assert_eq!(f.key.orientation_of(t), Some(o as u64));
        }
        let outsider = DegreeTwoTable::new(c(&[0, 0, 0, 0]), c(&[1, 1, 1, 1]));
        assert_eq!(f.key.orientation_of(&outsider), None);
    }

    #[test]
    fn larger_levels_use_realized_pairs() {
        let m = ModelSpec::new(vec![3, 4], &[vec![0], vec![1]]).unwrap();
        let f = enumerate_fiber(&b_of(&[2, 1], &[0, 3], &m), &m).unwrap();
        assert_eq!(f.key.classification().level_pairs[0], Some((0, 2)));
        assert_eq!(f.key.classification().level_pairs[1], Some((1, 3)));
        assert_eq!(f.members.len(), 2);
        assert!(f.members.contains(&DegreeTwoTable::new(c(&[0, 1]), c(&[2, 3]))));
        assert!(f.members.contains(&DegreeTwoTable::new(c(&[0, 3]), c(&[2, 1]))));
    }

    #[test]
    fn representative_fibers() {
        let keys = enumerate_representative_fibers(&indep(3), &Limits::default()).unwrap();
        let mut dbars: Vec<VarSet> = keys.iter().map(|k| k.nondegenerate()).collect();
        dbars.sort();
        assert_eq!(dbars, vec![set(&[0, 1]), set(&[0, 1, 2]), set(&[0, 2]), set(&[1, 2])]);

        let sat = ModelSpec::new(vec![2; 3], &[vec![0, 1, 2]]).unwrap();
        assert!(enumerate_representative_fibers(&sat, &Limits::default()).unwrap().is_empty());

        let chain = ModelSpec::new(vec![2; 3], &[vec![0, 1], vec![1, 2]]).unwrap();
        let keys = enumerate_representative_fibers(&chain, &Limits::default()).unwrap();
        assert_eq!(keys.len(), 1);
        assert_eq!(keys[0].nondegenerate(), set(&[0, 2]));
    }

    #[test]
    fn all_degree_two_fibers() {
        let keys = enumerate_all_degree2_fibers(&indep(3), &Limits::default()).unwrap();
        assert_eq!(keys.len(), 7);
        let sat = ModelSpec::new(vec![2; 3], &[vec![0, 1, 2]]).unwrap();
        assert!(enumerate_all_degree2_fibers(&sat, &Limits::default()).unwrap().is_empty());
        let big = ModelSpec::new(vec![10; 4], &[vec![0], vec![1], vec![2], vec![3]]).unwrap();
        assert!(matches!(
            enumerate_all_degree2_fibers(&big, &Limits::default()),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn uniqueness_examples() {
        let u = minimal_bases_nonunique(&indep(3));
        assert!(u.nonunique);
        assert_eq!(u.witness, Some([0, 1, 2]));
        // {1,2},{2,3},{3,4}
        let r3 = ModelSpec::new(vec![2; 4], &[vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        assert!(!minimal_bases_nonunique(&r3).nonunique);
        let two = ModelSpec::new(vec![2; 5], &[vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        assert!(!minimal_bases_nonunique(&two).nonunique);
        let disjoint = ModelSpec::new(vec![2; 3], &[vec![0, 1], vec![2]]).unwrap();
        assert!(!minimal_bases_nonunique(&disjoint).nonunique);
    }
}
