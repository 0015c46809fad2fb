//! Metropolis–Hastings over a fiber with any Markov basis, closed-form
//! decomposable fits and a Monte Carlo exact test.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chordal::{independence_graph, is_decomposable, CliqueTree};
use crate::error::{Error, Result};
use crate::model::{apply_move, marginalize, Cell, ModelSpec, Move, Table};
use crate::varset::VarSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainConfig {
    pub steps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub seed: u64,
}

impl ChainConfig {
    pub fn new(steps: u64, burn_in: u64, thinning: u64, seed: u64) -> Result<Self> {
        if steps <= burn_in {
            return Err(Error::InvalidConfig("steps must exceed burn-in".into()));
        }
        if thinning == 0 {
            return Err(Error::InvalidConfig("thinning must be at least 1".into()));
        }
        Ok(ChainConfig {
            steps,
            burn_in,
            thinning,
            seed,
        })
    }
}

/// `ln(∏ n(i)! / ∏ n'(i)!)` for `n' = n + sign·z`, summed over the support
/// of `z` only.
fn log_acceptance(t: &Table, z: &Move, sign: i8) -> f64 {
    let (plus, minus) = if sign >= 0 { (z.pos(), z.neg()) } else { (z.neg(), z.pos()) };
    let mut acc = 0.0;
    for (c, r) in minus.iter() {
        let a = t.get(c);
        for q in (a - r + 1)..=a {
            acc += libm::log(q as f64);
        }
    }
    for (c, r) in plus.iter() {
        let a = t.get(c);
        for q in (a + 1)..=(a + r) {
            acc -= libm::log(q as f64);
        }
    }
    acc
}

/// One lazy Metropolis–Hastings step targeting `P(n) ∝ 1/∏ n(i)!`: a
/// uniformly drawn move and sign, accepted with probability
/// `min(1, ∏ n(i)! / ∏ n'(i)!)` when applicable.
pub fn mh_step<R: Rng + ?Sized>(t: &Table, moves: &[Move], rng: &mut R) -> Result<Table> {
    if moves.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let z = &moves[rng.gen_range(0..moves.len())];
    let sign: i8 = if rng.gen::<bool>() { 1 } else { -1 };
    let u: f64 = rng.gen();
    Ok(match apply_move(t, z, sign) {
        Ok(next) => {
            let lr = log_acceptance(t, z, sign);
            if lr >= 0.0 || u < libm::exp(lr) {
                next
            } else {
                t.clone()
            }
        }
        Err(_) => t.clone(),
    })
}

/// A seeded chain. Independent chains share a seed and differ by stream.
pub struct Chain<'a> {
    state: Table,
    moves: &'a [Move],
    rng: ChaCha8Rng,
}

impl<'a> Chain<'a> {
    pub fn new(start: Table, moves: &'a [Move], seed: u64) -> Self {
        Chain::with_stream(start, moves, seed, 0)
    }

    pub fn with_stream(start: Table, moves: &'a [Move], seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Chain {
            state: start,
            moves,
            rng,
        }
    }

    pub fn state(&self) -> &Table {
        &self.state
    }

    /// Advances one step; an empty basis leaves the state fixed.
    pub fn step(&mut self) -> &Table {
        if !self.moves.is_empty() {
            self.state = mh_step(&self.state, self.moves, &mut self.rng).expect("nonempty basis");
        }
        &self.state
    }
}

/// Closed-form maximum likelihood fit of a decomposable model.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    n: f64,
    cliques: Vec<(VarSet, BTreeMap<Cell, u64>)>,
    separators: Vec<(VarSet, BTreeMap<Cell, u64>)>,
    chi_square: f64,
}

impl FitResult {
    /// Product of clique marginals over product of separator marginals;
    /// an empty separator contributes `n`.
    pub fn fitted(&self, cell: &Cell) -> f64 {
        let mut num = 1.0;
        for (vars, marg) in &self.cliques {
            num *= marg.get(&cell.project(*vars)).copied().unwrap_or(0) as f64;
        }
        let mut den = 1.0;
        for (vars, marg) in &self.separators {
            den *= if vars.is_empty() {
                self.n
            } else {
                marg.get(&cell.project(*vars)).copied().unwrap_or(0) as f64
            };
        }
        if num == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// Pearson statistic of the observed table.
    pub fn chi_square(&self) -> f64 {
        self.chi_square
    }

    /// Pearson statistic of any table with the same marginals, using
    /// `Σ (t - m)² / m = Σ_{t > 0} t² / m - n`.
    pub fn chi_square_of(&self, t: &Table) -> f64 {
        let mut acc = 0.0;
        for (c, k) in t.iter() {
            let m = self.fitted(c);
            if m > 0.0 {
                acc += (k * k) as f64 / m;
            }
        }
        acc - self.n
    }

    /// Fitted means for every cell in row-major order.
    pub fn fitted_all(&self, model: &ModelSpec) -> Vec<f64> {
        model.cells().map(|c| self.fitted(&c)).collect()
    }
}

pub fn fit_decomposable(t: &Table, model: &ModelSpec, tree: &CliqueTree) -> Result<FitResult> {
    if !is_decomposable(model) {
        return Err(Error::NotDecomposable);
    }
    if !tree.is_clique_tree_of(&independence_graph(model)) {
        return Err(Error::InvalidModel("clique tree does not belong to the model".into()));
    }
    t.check_cells(model)?;
    let cliques = tree
        .cliques()
        .iter()
        .map(|&c| Ok((c, marginalize(t, c, model)?)))
        .collect::<Result<Vec<_>>>()?;
    let separators = tree
        .separators()
        .into_iter()
        .map(|s| Ok((s, marginalize(t, s, model)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut fit = FitResult {
        n: t.sample_size() as f64,
        cliques,
        separators,
        chi_square: 0.0,
    };
    fit.chi_square = fit.chi_square_of(t);
    Ok(fit)
}

/// Monte Carlo p-value with its batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactTestResult {
    pub p_value: f64,
    pub se: f64,
    pub steps: u64,
    pub chi2_observed: f64,
}

const BATCHES: usize = 30;

/// Standard error of the mean of `xs` by non-overlapping batch means.
pub fn batch_means_se(xs: &[f64]) -> f64 {
    let batches = BATCHES.min(xs.len());
    if batches < 2 {
        return 0.0;
    }
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (batches - 1) as f64;
    libm::sqrt(var / batches as f64)
}

/// Fraction of sampled tables whose Pearson statistic is at least the
/// observed one.
pub fn exact_test(t: &Table, model: &ModelSpec, moves: &[Move], tree: &CliqueTree, cfg: &ChainConfig) -> Result<ExactTestResult> {
    let fit = fit_decomposable(t, model, tree)?;
    let observed = fit.chi_square();
    let tol = 1e-9 * (1.0 + libm::fabs(observed));
    #[cfg(debug_assertions)]
    let b0 = crate::model::compute_b(t, model)?;
    let mut chain = Chain::new(t.clone(), moves, cfg.seed);
    let mut hits = Vec::new();
    for step in 1..=cfg.steps {
        let state = chain.step();
        #[cfg(debug_assertions)]
        debug_assert_eq!(crate::model::compute_b(state, model)?, b0);
        if step > cfg.burn_in && (step - cfg.burn_in).is_multiple_of(cfg.thinning) {
            hits.push(if fit.chi_square_of(state) >= observed - tol { 1.0 } else { 0.0 });
        }
    }
    let p_value = hits.iter().sum::<f64>() / hits.len().max(1) as f64;
    Ok(ExactTestResult {
        p_value,
        se: batch_means_se(&hits),
        steps: cfg.steps,
        chi2_observed: observed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordal::clique_tree;
    use crate::model::compute_b;
    use crate::oracle::enumerate_fiber_bruteforce;
    use crate::Limits;
    use alloc::vec;

    fn c(v: &[u32]) -> Cell {
        Cell(v.to_vec())
    }

    fn tree(model: &ModelSpec) -> CliqueTree {
        clique_tree(&independence_graph(model)).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ChainConfig::new(10, 10, 1, 0).is_err());
        assert!(ChainConfig::new(10, 0, 0, 0).is_err());
        assert!(ChainConfig::new(10, 2, 3, 0).is_ok());
    }

    #[test]
    fn empty_basis_is_an_error() {
        let t = Table::pair(c(&[0, 0]), c(&[1, 1]));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(mh_step(&t, &[], &mut rng).unwrap_err(), Error::EmptyBasis);
    }

    #[test]
    fn acceptance_ratio_matches_factorials() {
        let m = ModelSpec::new(vec![2, 2], &[vec![0], vec![1]]).unwrap();
        let t = Table::from_counts([(c(&[0, 0]), 3), (c(&[1, 1]), 2), (c(&[0, 1]), 1)]);
        let z = Move::new(Table::pair(c(&[0, 1]), c(&[1, 0])), Table::pair(c(&[0, 0]), c(&[1, 1])), &m).unwrap();
        // (3,2,1,0) -> (2,1,2,1): 3!2!1!0! / 2!1!2!1! = 12 / 4 = 3
        let sign = if z.pos().get(&c(&[0, 1])) == 1 { 1 } else { -1 };
        let lr = log_acceptance(&t, &z, sign);
        assert!((lr - libm::log(3.0)).abs() < 1e-12);
        assert!((log_acceptance(&apply_move(&t, &z, sign).unwrap(), &z, -sign) + lr).abs() < 1e-12);
    }

    #[test]
    fn fit_two_by_two() {
        let m = ModelSpec::new(vec![2, 2], &[vec![0], vec![1]]).unwrap();
        let t = Table::pair(c(&[0, 0]), c(&[1, 1]));
        let fit = fit_decomposable(&t, &m, &tree(&m)).unwrap();
        assert_eq!(fit.fitted_all(&m), vec![0.5; 4]);
        assert!((fit.chi_square() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_saturated_is_exact() {
        let m = ModelSpec::new(vec![2, 3], &[vec![0, 1]]).unwrap();
        let t = Table::from_counts([(c(&[0, 0]), 3), (c(&[1, 2]), 1)]);
        let fit = fit_decomposable(&t, &m, &tree(&m)).unwrap();
        assert_eq!(fit.fitted(&c(&[0, 0])), 3.0);
        assert_eq!(fit.chi_square(), 0.0);
    }

    #[test]
    fn fitted_marginals_match() {
        let m = ModelSpec::new(vec![2, 3, 2], &[vec![0, 1], vec![1, 2]]).unwrap();
        let t = Table::from_counts([(c(&[0, 0, 0]), 2), (c(&[1, 0, 1]), 1), (c(&[0, 2, 1]), 3), (c(&[1, 1, 0]), 1)]);
        let fit = fit_decomposable(&t, &m, &tree(&m)).unwrap();
        let fitted = fit.fitted_all(&m);
        for &f in m.facets() {
            let obs = marginalize(&t, f, &m).unwrap();
            let mut sums: BTreeMap<Cell, f64> = BTreeMap::new();
            for (i, cell) in m.cells().enumerate() {
                *sums.entry(cell.project(f)).or_default() += fitted[i];
            }
            for (cell, s) in sums {
                assert!((s - obs.get(&cell).copied().unwrap_or(0) as f64).abs() < 1e-9);
            }
        }
        let dense: f64 = m
            .cells()
            .enumerate()
            .filter(|(i, _)| fitted[*i] > 0.0)
            .map(|(i, cell)| {
                let d = t.get(&cell) as f64 - fitted[i];
                d * d / fitted[i]
            })
            .sum();
        assert!((dense - fit.chi_square()).abs() < 1e-9);
    }

    #[test]
    fn non_decomposable_fit_is_rejected() {
        let m = ModelSpec::new(vec![2; 3], &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let any_tree = CliqueTree::new(vec![VarSet::full(3)], vec![]).unwrap();
        let t = Table::pair(c(&[0, 0, 0]), c(&[1, 1, 1]));
        assert_eq!(fit_decomposable(&t, &m, &any_tree).unwrap_err(), Error::NotDecomposable);
    }

    #[test]
    fn two_member_fiber_occupancy() {
        let m = ModelSpec::new(vec![2, 2], &[vec![0], vec![1]]).unwrap();
        let a = Table::pair(c(&[0, 0]), c(&[1, 1]));
        let z = crate::model::move_from_tables(&a, &Table::pair(c(&[0, 1]), c(&[1, 0])), &m).unwrap();
        let moves = [z];
        let mut chain = Chain::new(a.clone(), &moves, 5);
        let steps = 100_000;
        let at_a = (0..steps).filter(|_| *chain.step() == a).count();
        assert!((at_a as f64 / steps as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn singleton_fiber_chain_is_constant() {
        let m = ModelSpec::new(vec![2, 2], &[vec![0], vec![1]]).unwrap();
        let t = Table::from_counts([(c(&[0, 0]), 2)]);
        let z = crate::model::move_from_tables(&Table::pair(c(&[0, 0]), c(&[1, 1])), &Table::pair(c(&[0, 1]), c(&[1, 0])), &m).unwrap();
        let moves = [z];
        let mut chain = Chain::new(t.clone(), &moves, 1);
        for _ in 0..100 {
            assert_eq!(*chain.step(), t);
        }
        let cfg = ChainConfig::new(200, 10, 1, 1).unwrap();
        let r = exact_test(&t, &m, &moves, &tree(&m), &cfg).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn exact_test_matches_enumeration() {
        let m = ModelSpec::new(vec![2, 2], &[vec![0], vec![1]]).unwrap();
        let a = Table::pair(c(&[0, 0]), c(&[1, 1]));
        let z = crate::model::move_from_tables(&a, &Table::pair(c(&[0, 1]), c(&[1, 0])), &m).unwrap();
        let b = compute_b(&a, &m).unwrap();
        let fiber = enumerate_fiber_bruteforce(&b, &m, &Limits::default()).unwrap();
        let fit = fit_decomposable(&a, &m, &tree(&m)).unwrap();
        // both members have weight 1/2 and chi-square 2
        let exact = fiber.iter().filter(|t| fit.chi_square_of(t) >= fit.chi_square() - 1e-9).count() as f64 / fiber.len() as f64;
        let cfg = ChainConfig::new(20_000, 1000, 1, 9).unwrap();
        let r = exact_test(&a, &m, &[z], &tree(&m), &cfg).unwrap();
        assert_eq!(exact, 1.0);
        assert_eq!(r.p_value, exact);
        assert!((r.chi2_observed - 2.0).abs() < 1e-12);
    }

    #[test]
    fn batch_means_of_constant_is_zero() {
        assert_eq!(batch_means_se(&[1.0; 300]), 0.0);
        assert_eq!(batch_means_se(&[1.0]), 0.0);
        assert!(batch_means_se(&(0..300).map(|i| (i % 2) as f64).collect::<Vec<_>>()) >= 0.0);
    }
}
