//! The boundary-clique term order, the reduced Gröbner basis `M^GB` and
//! a binomial reduction engine that checks Gröbner-ness empirically.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::bases::{minimal_basis, MarkovBasis, Provenance, TreePolicy};
use crate::chordal::{elimination_variable_order, independence_graph, is_decomposable};
use crate::error::{Error, Result};
use crate::model::{Cell, Limits, ModelSpec, Move, Table};
use crate::oracle::{flat_fibers, to_table};

/// How two tables of equal degree are compared once cells are ranked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Scan from the last cell; the smaller count there is the larger term.
    RevLex,
    /// Scan from the first cell; the larger count there is the larger term.
    Lex,
}

/// A total order on cells plus a comparison rule for tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermOrder {
    levels: Vec<u32>,
    variable_order: Vec<usize>,
    /// Rank of each cell, by row-major index; `None` means lexicographic
    /// in `variable_order`.
    explicit: Option<Vec<usize>>,
    rule: Rule,
}

impl TermOrder {
    /// The default order of a model: variables ranked by the
    /// boundary-clique elimination order, cells lexicographic, tables
    /// reverse lexicographic. Non-chordal models fall back to the
    /// identity variable order.
    pub fn for_model(model: &ModelSpec) -> Self {
        let g = independence_graph(model);
        let mut order = elimination_variable_order(&g).unwrap_or_else(|_| (0..model.num_vars()).collect());
        // the first eliminated variables are the least significant
        order.reverse();
        TermOrder::with_variable_order(model, &order, Rule::RevLex).expect("valid permutation")
    }

    /// Cells lexicographic with `order[0]` most significant and level 0
    /// lowest.
    pub fn with_variable_order(model: &ModelSpec, order: &[usize], rule: Rule) -> Result<Self> {
        let m = model.num_vars();
        let mut seen = alloc::vec![false; m];
        if order.len() != m {
            return Err(Error::InvalidConfig("variable order must list every variable once".into()));
        }
        for &v in order {
            if v >= m || core::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidConfig("variable order must list every variable once".into()));
            }
        }
        Ok(TermOrder {
            levels: model.levels().to_vec(),
            variable_order: order.to_vec(),
            explicit: None,
            rule,
        })
    }

    /// An arbitrary cell order: `ranks[i]` is the position of the cell
    /// with row-major index `i`.
    pub fn with_cell_ranks(model: &ModelSpec, ranks: Vec<usize>, rule: Rule) -> Result<Self> {
        let n = model.num_cells().ok_or(Error::too_large("table", u128::MAX, usize::MAX as u128))?;
        let mut seen = alloc::vec![false; n];
        if ranks.len() != n || ranks.iter().any(|&r| r >= n || core::mem::replace(&mut seen[r], true)) {
            return Err(Error::InvalidConfig("cell ranks must be a permutation".into()));
        }
        Ok(TermOrder {
            levels: model.levels().to_vec(),
            variable_order: (0..model.num_vars()).collect(),
            explicit: Some(ranks),
            rule,
        })
    }

    pub fn variable_order(&self) -> &[usize] {
        &self.variable_order
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn rank(&self, cell: &Cell) -> usize {
        match &self.explicit {
            Some(ranks) => {
                let mut idx = 0usize;
                for (v, &l) in cell.0.iter().enumerate() {
                    idx = idx * self.levels[v] as usize + l as usize;
                }
                ranks[idx]
            }
            None => {
                let mut idx = 0usize;
                for &v in &self.variable_order {
                    idx = idx * self.levels[v] as usize + cell.0[v] as usize;
                }
                idx
            }
        }
    }

    /// `Greater` means `t1 ≻ t2`.
    pub fn compare(&self, t1: &Table, t2: &Table) -> Result<Ordering> {
        if t1.sample_size() != t2.sample_size() {
            return Err(Error::DegreeMismatch);
        }
        let mut diff: BTreeMap<usize, i64> = BTreeMap::new();
        for (c, k) in t1.iter() {
            *diff.entry(self.rank(c)).or_default() += k as i64;
        }
        for (c, k) in t2.iter() {
            *diff.entry(self.rank(c)).or_default() -= k as i64;
        }
        let ord = match self.rule {
            Rule::RevLex => diff.iter().rev().find(|(_, &d)| d != 0).map(|(_, &d)| 0.cmp(&d)),
            Rule::Lex => diff.iter().find(|(_, &d)| d != 0).map(|(_, &d)| d.cmp(&0)),
        };
        Ok(ord.unwrap_or(Ordering::Equal))
    }

    /// Splits a move into its leading (`≻`-larger) and trailing parts.
    pub fn orient(&self, z: &Move) -> OrientedMove {
        match self.compare(z.pos(), z.neg()).expect("move parts share a degree") {
            Ordering::Less => OrientedMove {
                lead: z.neg().clone(),
                trail: z.pos().clone(),
            },
            _ => OrientedMove {
                lead: z.pos().clone(),
                trail: z.neg().clone(),
            },
        }
    }
}

/// A move written as `lead − trail` with `lead ≻ trail`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct OrientedMove {
    pub lead: Table,
    pub trail: Table,
}

/// The `≻`-minimal member, `n*_b`.
pub fn fiber_minimum<'a>(members: &'a [Table], ord: &TermOrder) -> Option<&'a Table> {
    members
        .iter()
        .min_by(|a, b| ord.compare(a, b).expect("fiber members share a degree"))
}

/// `M^GB`: per degree-two fiber, the star from every member to `n*_b`.
pub fn groebner_basis(model: &ModelSpec, limits: &Limits) -> Result<MarkovBasis> {
    if !is_decomposable(model) {
        return Err(Error::NotDecomposable);
    }
    let mut basis = minimal_basis(model, TreePolicy::StarAtMin, limits)?;
    basis.set_provenance(Provenance::Groebner);
    Ok(basis)
}

/// Leading parts indexed by their smallest cell for reduction lookups.
pub struct Reducer<'a> {
    moves: Vec<OrientedMove>,
    by_cell: BTreeMap<Cell, Vec<usize>>,
    ord: &'a TermOrder,
}

impl<'a> Reducer<'a> {
    pub fn new<'m, I: IntoIterator<Item = &'m Move>>(moves: I, ord: &'a TermOrder) -> Self {
        let moves: Vec<OrientedMove> = moves.into_iter().map(|z| ord.orient(z)).collect();
        let mut by_cell: BTreeMap<Cell, Vec<usize>> = BTreeMap::new();
        for (k, z) in moves.iter().enumerate() {
            let first = z.lead.min_cell().expect("nonempty lead").clone();
            by_cell.entry(first).or_default().push(k);
        }
        Reducer { moves, by_cell, ord }
    }

    pub fn moves(&self) -> &[OrientedMove] {
        &self.moves
    }

    /// One reduction step, if some leading part divides `t`.
    fn step(&self, t: &Table) -> Option<Table> {
        for c in t.support() {
            let Some(ks) = self.by_cell.get(c) else { continue };
            for &k in ks {
                let z = &self.moves[k];
                if z.lead.le(t) {
                    let mut out = t.clone();
                    for (cell, n) in z.lead.iter() {
                        out.sub(cell, n).expect("lead divides t");
                    }
                    for (cell, n) in z.trail.iter() {
                        out.add(cell.clone(), n);
                    }
                    return Some(out);
                }
            }
        }
        None
    }

    /// Reduces until no leading part divides the table.
    pub fn normal_form(&self, t: &Table) -> Table {
        let mut cur = t.clone();
        while let Some(next) = self.step(&cur) {
            debug_assert_eq!(self.ord.compare(&cur, &next), Ok(Ordering::Greater));
            cur = next;
        }
        cur
    }
}

/// Repeatedly replaces a leading part dividing `t` by its trailing part.
pub fn reduce_to_normal_form(t: &Table, moves: &[Move], ord: &TermOrder) -> Table {
    Reducer::new(moves, ord).normal_form(t)
}

/// Fibers and tables examined at one degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeReport {
    pub degree: u64,
    pub fibers: usize,
    pub tables: usize,
}

/// A table whose normal form is not its fiber minimum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub table: Table,
    pub normal_form: Table,
    pub minimum: Table,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerReport {
    pub per_degree: Vec<DegreeReport>,
    pub counterexample: Option<Counterexample>,
}

impl GroebnerReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks that every table of degree `2..=degree_cap` reduces to the
/// `≻`-minimum of its fiber, which characterizes a Gröbner basis up to
/// that degree.
pub fn is_groebner_empirically(
    moves: &[Move],
    model: &ModelSpec,
    ord: &TermOrder,
    degree_cap: u64,
    limits: &Limits,
) -> Result<GroebnerReport> {
    let reducer = Reducer::new(moves, ord);
    let mut per_degree = Vec::new();
    for d in 2..=degree_cap {
        let fibers = flat_fibers(model, d, limits)?;
        let mut report = DegreeReport {
            degree: d,
            fibers: 0,
            tables: 0,
        };
        for group in fibers {
            report.fibers += 1;
            report.tables += group.len();
            if group.len() < 2 {
                continue;
            }
            let members: Vec<Table> = group.iter().map(|ms| to_table(model, ms)).collect();
            let minimum = fiber_minimum(&members, ord).expect("nonempty fiber");
            for t in &members {
                let nf = reducer.normal_form(t);
                if nf != *minimum {
                    per_degree.push(report);
                    return Ok(GroebnerReport {
                        per_degree,
                        counterexample: Some(Counterexample {
                            table: t.clone(),
                            normal_form: nf,
                            minimum: minimum.clone(),
                        }),
                    });
                }
            }
        }
        per_degree.push(report);
    }
    Ok(GroebnerReport {
        per_degree,
        counterexample: None,
    })
}

/// No leading part of one move divides either part of another.
pub fn is_reduced(moves: &[Move], ord: &TermOrder) -> bool {
    let oriented: Vec<OrientedMove> = moves.iter().map(|z| ord.orient(z)).collect();
    oriented.iter().enumerate().all(|(a, z)| {
        oriented
            .iter()
            .enumerate()
            .all(|(b, w)| a == b || !(w.lead.le(&z.lead) || w.lead.le(&z.trail)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{compute_b, move_from_tables};
    use crate::oracle::fibers_of_degree;
    use alloc::vec;

    fn c(v: &[u32]) -> Cell {
        Cell(v.to_vec())
    }

    fn two_way(r: u32, s: u32) -> ModelSpec {
        ModelSpec::new(vec![r, s], &[vec![0], vec![1]]).unwrap()
    }

    #[test]
    fn antidiagonal_leads_in_two_by_two() {
        let m = two_way(2, 2);
        let ord = TermOrder::for_model(&m);
        let diag = Table::pair(c(&[0, 0]), c(&[1, 1]));
        let anti = Table::pair(c(&[0, 1]), c(&[1, 0]));
        assert_eq!(ord.compare(&anti, &diag), Ok(Ordering::Greater));
        assert_eq!(ord.compare(&diag, &diag), Ok(Ordering::Equal));
        assert_eq!(fiber_minimum(&[anti.clone(), diag.clone()], &ord), Some(&diag));
        let single = Table::from_counts([(c(&[0, 0]), 1)]);
        assert_eq!(ord.compare(&single, &diag), Err(Error::DegreeMismatch));
    }

    #[test]
    fn comparator_is_a_total_order_on_small_fibers() {
        let m = ModelSpec::new(vec![2, 3, 2], &[vec![0, 1], vec![1, 2]]).unwrap();
        let ord = TermOrder::for_model(&m);
        for fiber in fibers_of_degree(&m, 3, &Limits::default()).unwrap() {
            for a in &fiber {
                for b in &fiber {
                    let ab = ord.compare(a, b).unwrap();
                    assert_eq!(ab, ord.compare(b, a).unwrap().reverse());
                    assert_eq!(ab == Ordering::Equal, a == b);
                    for x in &fiber {
                        if ab == Ordering::Greater && ord.compare(b, x).unwrap() == Ordering::Greater {
                            assert_eq!(ord.compare(a, x).unwrap(), Ordering::Greater);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn three_by_three_reduced_basis() {
        let m = two_way(3, 3);
        let gb = groebner_basis(&m, &Limits::default()).unwrap();
        assert_eq!(gb.len(), 9);
        assert!(gb.moves().all(|z| z.is_primitive()));
        let moves: Vec<Move> = gb.moves().cloned().collect();
        let ord = TermOrder::for_model(&m);
        assert!(is_reduced(&moves, &ord));
        let report = is_groebner_empirically(&moves, &m, &ord, 4, &Limits::default()).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.per_degree.len(), 3);
    }

    #[test]
    fn redundant_move_breaks_reducedness() {
        let m = two_way(3, 3);
        let mut moves: Vec<Move> = groebner_basis(&m, &Limits::default()).unwrap().moves().cloned().collect();
        let ord = TermOrder::for_model(&m);
        let t1 = Table::pair(c(&[0, 1]), c(&[1, 2]));
        let t2 = Table::pair(c(&[0, 2]), c(&[1, 1]));
        let z = move_from_tables(&t1, &t2, &m).unwrap();
        if !moves.contains(&z) {
            moves.push(z);
        }
        // a degree-three move whose lead is divisible by a primitive lead
        let a = Table::from_counts([(c(&[0, 1]), 1), (c(&[1, 2]), 1), (c(&[2, 0]), 1)]);
        let b = Table::from_counts([(c(&[0, 2]), 1), (c(&[1, 0]), 1), (c(&[2, 1]), 1)]);
        moves.push(move_from_tables(&a, &b, &m).unwrap());
        assert!(!is_reduced(&moves, &ord));
        assert!(is_reduced(&moves[..1], &ord));
    }

    #[test]
    fn saturated_model_has_empty_basis() {
        let m = ModelSpec::new(vec![2, 3], &[vec![0, 1]]).unwrap();
        let gb = groebner_basis(&m, &Limits::default()).unwrap();
        assert!(gb.is_empty());
        let ord = TermOrder::for_model(&m);
        assert!(is_groebner_empirically(&[], &m, &ord, 3, &Limits::default()).unwrap().passed());
    }

    #[test]
    fn non_decomposable_is_rejected() {
        let m = ModelSpec::new(vec![2; 3], &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(groebner_basis(&m, &Limits::default()).unwrap_err(), Error::NotDecomposable);
    }

    #[test]
    fn normal_form_reaches_minimum() {
        let m = two_way(3, 3);
        let ord = TermOrder::for_model(&m);
        let moves: Vec<Move> = groebner_basis(&m, &Limits::default()).unwrap().moves().cloned().collect();
        let t = Table::from_counts([(c(&[0, 2]), 2), (c(&[2, 0]), 1), (c(&[1, 1]), 1)]);
        let b = compute_b(&t, &m).unwrap();
        let fiber = crate::oracle::enumerate_fiber_bruteforce(&b, &m, &Limits::default()).unwrap();
        let nf = reduce_to_normal_form(&t, &moves, &ord);
        assert_eq!(Some(&nf), fiber_minimum(&fiber, &ord));
        assert_eq!(reduce_to_normal_form(&nf, &moves, &ord), nf);
    }
}
