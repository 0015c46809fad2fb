//! Markov-basis constructions: minimal bases from spanning trees of the
//! degree-two fibers, Dobra's clique-tree basis, minimal invariant bases
//! from GF(2) bases and brute-force verification.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chordal::{clique_tree, independence_graph, is_decomposable, CliqueTree};
use crate::error::{Error, Result};
use crate::fiber2::{enumerate_all_degree2_fibers, enumerate_representative_fibers, independent_triple, FiberKey};
use crate::gf2::{default_basis, is_basis, Flavor, Gf2Vector};
use crate::groebner::{fiber_minimum, TermOrder};
use crate::model::{compute_b, difference_move, Cell, DegreeTwoTable, Limits, MarginalVector, ModelSpec, Move, Table};
use crate::oracle::{flat_components, flat_fibers, to_table, FlatMoves};
use crate::varset::VarSet;

/// Where a basis came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Minimal(TreePolicy),
    Dobra,
    Invariant(Flavor),
    Algorithm1(Flavor),
    Groebner,
    External,
}

/// Whether the basis is known to connect every fiber or only those of
/// degree two (non-decomposable models).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completeness {
    Full,
    DegreeTwoOnly,
}

/// How each degree-two fiber is spanned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TreePolicy {
    /// Star centred at the term-order minimum.
    #[default]
    StarAtMin,
    /// Members chained in orientation order.
    Path,
    /// Random recursive tree over a shuffled member list.
    Random(u64),
}

/// A move with the marginal vector of the fiber it lives in.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BasisEntry {
    pub fiber: MarginalVector,
    pub mv: Move,
}

/// A deduplicated set of moves sorted by fiber, then move.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovBasis {
    entries: Vec<BasisEntry>,
    provenance: Provenance,
    completeness: Completeness,
}

impl MarkovBasis {
    pub fn new<I: IntoIterator<Item = Move>>(model: &ModelSpec, moves: I, provenance: Provenance) -> Result<Self> {
        let entries = moves
            .into_iter()
            .map(|mv| Ok(BasisEntry { fiber: compute_b(mv.pos(), model)?, mv }))
            .collect::<Result<Vec<_>>>()?;
        Ok(MarkovBasis::from_entries(model, entries, provenance))
    }

    fn from_entries(model: &ModelSpec, mut entries: Vec<BasisEntry>, provenance: Provenance) -> Self {
        entries.sort();
        entries.dedup_by(|a, b| a.mv == b.mv);
        let completeness = if is_decomposable(model) { Completeness::Full } else { Completeness::DegreeTwoOnly };
        MarkovBasis {
            entries,
            provenance,
            completeness,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BasisEntry] {
        &self.entries
    }

    pub fn moves(&self) -> impl Iterator<Item = &Move> + '_ {
        self.entries.iter().map(|e| &e.mv)
    }

    pub fn to_moves(&self) -> Vec<Move> {
        self.moves().cloned().collect()
    }

    pub fn contains(&self, z: &Move) -> bool {
        self.entries.iter().any(|e| e.mv == *z)
    }

    /// Moves whose endpoints lie in the fiber of `b`.
    pub fn in_fiber<'a>(&'a self, b: &'a MarginalVector) -> impl Iterator<Item = &'a Move> + 'a {
        self.entries.iter().filter(move |e| e.fiber == *b).map(|e| &e.mv)
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub(crate) fn set_provenance(&mut self, p: Provenance) {
        self.provenance = p;
    }

    pub fn completeness(&self) -> Completeness {
        self.completeness
    }

    /// The basis with entry `k` removed.
    pub fn without(&self, k: usize) -> MarkovBasis {
        let mut out = self.clone();
        out.entries.remove(k);
        out
    }
}

fn member_tables(key: &FiberKey) -> Vec<Table> {
    key.members().iter().map(DegreeTwoTable::to_table).collect()
}

/// One spanning tree per degree-two fiber with at least two members.
pub fn minimal_basis(model: &ModelSpec, policy: TreePolicy, limits: &Limits) -> Result<MarkovBasis> {
    let keys = enumerate_all_degree2_fibers(model, limits)?;
    let ord = TermOrder::for_model(model);
    let mut rng = match policy {
        TreePolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut entries = Vec::new();
    for key in keys {
        let members = member_tables(&key);
        let mut push = |a: &Table, b: &Table| {
            entries.push(BasisEntry {
                fiber: key.b().clone(),
                mv: difference_move(a, b),
            })
        };
        match policy {
            TreePolicy::StarAtMin => {
                let min = fiber_minimum(&members, &ord).expect("nonempty fiber");
                for t in members.iter().filter(|t| *t != min) {
                    push(t, min);
                }
            }
            TreePolicy::Path => {
                for w in members.windows(2) {
                    push(&w[0], &w[1]);
                }
            }
            TreePolicy::Random(_) => {
                let rng = rng.as_mut().expect("seeded");
                let mut order: Vec<usize> = (0..members.len()).collect();
                order.shuffle(rng);
                for i in 1..order.len() {
                    let parent = order[rng.gen_range(0..i)];
                    push(&members[order[i]], &members[parent]);
                }
            }
        }
    }
    Ok(MarkovBasis::from_entries(model, entries, Provenance::Minimal(policy)))
}

/// Every level assignment of `vars`, ascending variable order, in
/// mixed-radix order.
fn assignments(model: &ModelSpec, vars: VarSet) -> Vec<Vec<u32>> {
    let mut out = alloc::vec![Vec::new()];
    for v in vars {
        let levels = model.levels()[v];
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..levels).map(move |l| {
                    let mut p = prefix.clone();
                    p.push(l);
                    p
                })
            })
            .collect();
    }
    out
}

fn assemble(m: usize, parts: &[(VarSet, &[u32])]) -> Cell {
    let mut cell = alloc::vec![0u32; m];
    for (vars, levels) in parts {
        for (v, &l) in vars.iter().zip(levels.iter()) {
            cell[v] = l;
        }
    }
    Cell(cell)
}

/// `M^T`: for every tree edge with separator `S` splitting the variables
/// into `V ∪ S | V' ∪ S`, all primitive moves of the two-clique model.
pub fn dobra_basis(model: &ModelSpec, tree: &CliqueTree, limits: &Limits) -> Result<MarkovBasis> {
    if !is_decomposable(model) {
        return Err(Error::NotDecomposable);
    }
    if !tree.is_clique_tree_of(&independence_graph(model)) {
        return Err(Error::InvalidModel("clique tree does not belong to the model".into()));
    }
    limits.check_cells(model)?;
    let m = model.num_vars();
    let mut moves = Vec::new();
    for (e, sep) in tree.separators().into_iter().enumerate() {
        let (side, other) = tree.split(e);
        let (v, w) = (side.difference(sep), other.difference(sep));
        let (av, aw) = (assignments(model, v), assignments(model, w));
        for s in assignments(model, sep) {
            for a in 0..av.len() {
                for b in (a + 1)..av.len() {
                    for c in 0..aw.len() {
                        for d in (c + 1)..aw.len() {
                            let cell = |x: &[u32], y: &[u32]| assemble(m, &[(v, x), (w, y), (sep, &s)]);
                            let pos = Table::pair(cell(&av[a], &aw[c]), cell(&av[b], &aw[d]));
                            let neg = Table::pair(cell(&av[a], &aw[d]), cell(&av[b], &aw[c]));
                            moves.push(Move::canonical(pos, neg));
                        }
                    }
                }
            }
        }
    }
    MarkovBasis::new(model, moves, Provenance::Dobra)
}

/// Evidence that a Dobra basis is not minimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DobraWitness {
    pub variables: [usize; 3],
    pub fiber: FiberKey,
    pub moves_in_fiber: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DobraMinimality {
    pub minimal: bool,
    pub witness: Option<DobraWitness>,
}

/// Whether some clique tree yields a minimal `M^T`, i.e. the minimal
/// basis is unique. The witness is the four-member fiber on three
/// mutually non-adjacent variables under the canonical clique tree.
pub fn dobra_is_minimal(model: &ModelSpec, limits: &Limits) -> Result<DobraMinimality> {
    if !is_decomposable(model) {
        return Err(Error::NotDecomposable);
    }
    let g = independence_graph(model);
    let Some(triple) = independent_triple(&g) else {
        return Ok(DobraMinimality {
            minimal: true,
            witness: None,
        });
    };
    let tree = clique_tree(&g)?;
    let basis = dobra_basis(model, &tree, limits)?;
    let m = model.num_vars();
    let ones = Cell((0..m).map(|v| u32::from(triple.contains(&v))).collect());
    let key = FiberKey::from_table(&Table::pair(Cell(alloc::vec![0; m]), ones), model)?;
    let moves_in_fiber = basis.in_fiber(key.b()).count();
    Ok(DobraMinimality {
        minimal: false,
        witness: Some(DobraWitness {
            variables: triple,
            fiber: key,
            moves_in_fiber,
        }),
    })
}

/// Whether every degree-two fiber carries exactly `|F_b| - 1` moves and
/// no move lies elsewhere. For a Markov basis of degree-two moves this
/// is minimality.
pub fn has_minimal_fiber_counts(model: &ModelSpec, basis: &MarkovBasis, limits: &Limits) -> Result<bool> {
    let keys = enumerate_all_degree2_fibers(model, limits)?;
    let mut expected: BTreeMap<&MarginalVector, u64> = keys.iter().map(|k| (k.b(), k.fiber_size() - 1)).collect();
    for e in basis.entries() {
        match expected.get_mut(&e.fiber) {
            Some(n) if *n > 0 => *n -= 1,
            _ => return Ok(false),
        }
    }
    Ok(expected.values().all(|&n| n == 0))
}

pub fn gf2_default_basis(c: usize, flavor: Flavor) -> Vec<Gf2Vector> {
    default_basis(c, flavor)
}

/// Maps every cell of a move through per-variable level permutations.
pub fn permute_levels(z: &Move, perms: &[Vec<u32>]) -> Move {
    let map = |t: &Table| {
        Table::from_counts(
            t.iter()
                .map(|(c, k)| (Cell(c.0.iter().enumerate().map(|(v, &l)| perms[v][l as usize]).collect()), k)),
        )
    };
    Move::canonical(map(z.pos()), map(z.neg()))
}

/// The orbit of `z` up to sign under all level relabelings, generated by
/// adjacent transpositions.
pub fn orbit(model: &ModelSpec, z: &Move, limits: &Limits) -> Result<Vec<Move>> {
    let identity: Vec<Vec<u32>> = model.levels().iter().map(|&k| (0..k).collect()).collect();
    let mut seen = BTreeSet::new();
    seen.insert(z.clone());
    let mut queue = alloc::vec![z.clone()];
    while let Some(cur) = queue.pop() {
        for (v, &k) in model.levels().iter().enumerate() {
            for a in 0..k - 1 {
                let mut perms = identity.clone();
                perms[v].swap(a as usize, a as usize + 1);
                let next = permute_levels(&cur, &perms);
                if seen.insert(next.clone()) {
                    if seen.len() as u64 > limits.max_tables {
                        return Err(Error::too_large("orbit", seen.len() as u128, limits.max_tables as u128));
                    }
                    queue.push(next);
                }
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// One orbit of an invariant basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub fiber: FiberKey,
    pub generator: Gf2Vector,
    pub representative: Move,
    pub members: Vec<Move>,
}

/// A minimal invariant Markov basis as a list of orbits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitAnnotatedBasis {
    pub flavor: Flavor,
    pub orbits: Vec<Orbit>,
}

impl OrbitAnnotatedBasis {
    /// Orbit count per representative fiber.
    pub fn orbits_per_fiber(&self) -> BTreeMap<&MarginalVector, usize> {
        let mut out = BTreeMap::new();
        for o in &self.orbits {
            *out.entry(o.fiber.b()).or_insert(0) += 1;
        }
        out
    }

    /// The union of all orbits.
    pub fn to_basis(&self, model: &ModelSpec) -> Result<MarkovBasis> {
        MarkovBasis::new(
            model,
            self.orbits.iter().flat_map(|o| o.members.iter().cloned()),
            Provenance::Invariant(self.flavor),
        )
    }
}

/// For each representative fiber, the moves `n⁰ − g(n⁰)` for the
/// component flips `g` given by a GF(2) basis, each expanded to its
/// orbit.
pub fn invariant_basis(model: &ModelSpec, flavor: Flavor, limits: &Limits) -> Result<OrbitAnnotatedBasis> {
    let mut orbits = Vec::new();
    for key in enumerate_representative_fibers(model, limits)? {
        let base = key.member(0).to_table();
        for v in default_basis(key.component_count(), flavor) {
            let z = difference_move(&base, &key.member(v.bits()).to_table());
            let members = orbit(model, &z, limits)?;
            orbits.push(Orbit {
                fiber: key.clone(),
                generator: v,
                representative: z,
                members,
            });
        }
    }
    Ok(OrbitAnnotatedBasis { flavor, orbits })
}

/// Orbits of `moves` inside one fiber under the component flips: two
/// moves are equivalent iff their endpoint orientations differ by the
/// same GF(2) vector.
pub fn orbit_count_in_fiber<'a, I: IntoIterator<Item = &'a Move>>(key: &FiberKey, moves: I) -> usize {
    let mut diffs = BTreeSet::new();
    for z in moves {
        let (Ok(p), Ok(n)) = (DegreeTwoTable::from_table(z.pos()), DegreeTwoTable::from_table(z.neg())) else {
            continue;
        };
        if let (Some(u), Some(w)) = (key.orientation_of(&p), key.orientation_of(&n)) {
            diffs.insert(u ^ w);
        }
    }
    diffs.len()
}

/// A representative fiber where `M^T` uses more orbits than `κ(b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitWitness {
    pub fiber: FiberKey,
    pub orbits: usize,
    pub kappa: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantMinimality {
    pub minimal: bool,
    pub witness: Option<OrbitWitness>,
}

/// `M^T` is minimal invariant iff the tree has at most two leaves.
pub fn dobra_is_minimal_invariant(model: &ModelSpec, tree: &CliqueTree, limits: &Limits) -> Result<InvariantMinimality> {
    let minimal = tree.leaves().len() <= 2;
    if minimal {
        return Ok(InvariantMinimality { minimal, witness: None });
    }
    let basis = dobra_basis(model, tree, limits)?;
    let mut witness = None;
    for key in enumerate_representative_fibers(model, limits)? {
        let orbits = orbit_count_in_fiber(&key, basis.in_fiber(key.b()));
        if orbits > key.kappa() {
            witness = Some(OrbitWitness {
                kappa: key.kappa(),
                fiber: key,
                orbits,
            });
            break;
        }
    }
    Ok(InvariantMinimality { minimal, witness })
}

/// Members in doubling order and the connecting moves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algorithm1Output {
    pub orientations: Vec<u64>,
    pub members: Vec<DegreeTwoTable>,
    pub moves: Vec<Move>,
}

/// Builds a spanning tree of a degree-two fiber from a GF(2) basis: for
/// `k = 2..c` and `l = 1..2^{k-2}`, `n_{l+2^{k-2}} = g^{k-1}(n_l)` with the
/// move `n_l − n_{l+2^{k-2}}`.
pub fn algorithm1(key: &FiberKey, h: &[Gf2Vector]) -> Result<Algorithm1Output> {
    let kappa = key.kappa();
    if h.len() != kappa || !is_basis(h, kappa) {
        return Err(Error::NotABasis);
    }
    let mut orientations = alloc::vec![0u64];
    let mut moves = Vec::new();
    for v in h {
        let half = orientations.len();
        for l in 0..half {
            let next = orientations[l] ^ v.bits();
            moves.push(difference_move(
                &key.member(orientations[l]).to_table(),
                &key.member(next).to_table(),
            ));
            orientations.push(next);
        }
    }
    let members = orientations.iter().map(|&o| key.member(o)).collect();
    Ok(Algorithm1Output {
        orientations,
        members,
        moves,
    })
}

/// `M*`: the GF(2) spanning-tree construction on every fiber of `B_nd` with the default GF(2)
/// basis of the given flavor.
pub fn minimal_basis_from_invariant(model: &ModelSpec, flavor: Flavor, limits: &Limits) -> Result<MarkovBasis> {
    let mut entries = Vec::new();
    for key in enumerate_all_degree2_fibers(model, limits)? {
        let out = algorithm1(&key, &default_basis(key.component_count(), flavor))?;
        entries.extend(out.moves.into_iter().map(|mv| BasisEntry {
            fiber: key.b().clone(),
            mv,
        }));
    }
    Ok(MarkovBasis::from_entries(model, entries, Provenance::Algorithm1(flavor)))
}

/// A fiber left disconnected by a candidate basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberWitness {
    pub degree: u64,
    pub b: MarginalVector,
    pub members: Vec<Table>,
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub degree: u64,
    pub fibers_checked: usize,
    pub witness: Option<FiberWitness>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Degree up to which [`is_markov_basis`] checks by default: two for
/// decomposable models, three otherwise.
pub fn default_verify_degree(model: &ModelSpec) -> u64 {
    if is_decomposable(model) {
        2
    } else {
        3
    }
}

/// Brute-force check that `moves` connects every fiber of sample size
/// `2..=degree`.
pub fn is_markov_basis(model: &ModelSpec, moves: &[Move], degree: u64, limits: &Limits) -> Result<Verification> {
    let mut fibers_checked = 0;
    for d in 2..=degree {
        let flat = FlatMoves::new(model, moves, d);
        for group in flat_fibers(model, d, limits)? {
            fibers_checked += 1;
            if group.len() < 2 {
                continue;
            }
            let labels = flat_components(&group, &flat);
            let components = labels.iter().collect::<BTreeSet<_>>().len();
            if components > 1 {
                let members: Vec<Table> = group.iter().map(|ms| to_table(model, ms)).collect();
                return Ok(Verification {
                    degree,
                    fibers_checked,
                    witness: Some(FiberWitness {
                        degree: d,
                        b: compute_b(&members[0], model)?,
                        members,
                        components,
                    }),
                });
            }
        }
    }
    Ok(Verification {
        degree,
        fibers_checked,
        witness: None,
    })
}
