//! Test oracles shared by the integration suites.
//!
//! Nothing here calls the evolution engine: the brute-force enumerators walk
//! every outcome sequence explicitly, and the board oracle re-reads the
//! squares itself instead of using the game compiler.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umbral::chain::{Edge, WeightedMarkovChain};
use umbral::game::{GameSpec, Label};
use umbral::poly::{CappedPolynomial, Support};
use umbral::rational::{rat, Rational};
use umbral::stats::summarize;
use umbral::umbra::{umbra_step, AbsorptionRecord, StateVector};

/// `(round, absorbing state, capital) -> probability`
pub type AbsorbedCells = BTreeMap<(u32, String, i64), Rational>;
/// `(transient state, capital) -> probability` after the last round
pub type ResidualCells = BTreeMap<(String, i64), Rational>;

/// A random valid chain with at most five states.
pub fn random_chain(seed: u64) -> WeightedMarkovChain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_transient = rng.gen_range(1..=3);
    let n_absorbing = rng.gen_range(1..=2);
    let transient: Vec<String> = (0..n_transient).map(|k| format!("s{k}")).collect();
    let absorbing: Vec<String> = (0..n_absorbing).map(|k| format!("a{k}")).collect();
    let all: Vec<&String> = transient.iter().chain(&absorbing).collect();
    let support = Support { min: rng.gen_range(-2..=0), max: rng.gen_range(1..=5) };
    let mut edges = Vec::new();
    for src in &transient {
        let count = rng.gen_range(1..=3);
        let raw: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=4)).collect();
        let total: i64 = raw.iter().sum();
        for w in raw {
            edges.push(Edge {
                src: src.clone(),
                dst: all[rng.gen_range(0..all.len())].clone(),
                prob: rat(w, total).unwrap(),
                weight: rng.gen_range(-2..=3),
            });
        }
    }
    let initial = rng.gen_range(support.min..=support.max);
    WeightedMarkovChain {
        transient,
        absorbing,
        edges,
        support,
        start: Some("s0".into()),
        initial_capital: Some(initial),
    }
}

/// A random state vector over the chain's transient states.
pub fn random_state_vector(chain: &WeightedMarkovChain, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sv = StateVector::new();
    for state in &chain.transient {
        if rng.gen_bool(0.3) {
            continue;
        }
        let terms: Vec<(i64, Rational)> = (chain.support.min..=chain.support.max)
            .map(|e| (e, rat(rng.gen_range(0..5), rng.gen_range(1..9)).unwrap()))
            .collect();
        sv.insert(state.clone(), CappedPolynomial::from_terms(chain.support, terms).unwrap());
    }
    sv
}

/// Enumerates every edge sequence of length `depth` from `start`.
pub fn brute_force_chain(
    chain: &WeightedMarkovChain,
    start: &str,
    initial: i64,
    depth: u32,
) -> (AbsorbedCells, ResidualCells) {
    struct Walk<'a> {
        chain: &'a WeightedMarkovChain,
        depth: u32,
        absorbed: AbsorbedCells,
        residual: ResidualCells,
    }
    impl Walk<'_> {
        fn visit(&mut self, state: &str, capital: i64, prob: Rational, round: u32) {
            if round == self.depth {
                *self.residual.entry((state.to_string(), capital)).or_insert_with(Rational::zero) += prob;
                return;
            }
            let chain = self.chain;
            for edge in chain.edges.iter().filter(|e| e.src == state) {
                let next = (capital + edge.weight).clamp(chain.support.min, chain.support.max);
                let p = &prob * &edge.prob;
                if chain.absorbing.contains(&edge.dst) {
                    *self.absorbed.entry((round + 1, edge.dst.clone(), next)).or_insert_with(Rational::zero) += p;
                } else {
                    self.visit(&edge.dst, next, p, round + 1);
                }
            }
        }
    }
    let mut walk = Walk { chain, depth, absorbed: AbsorbedCells::new(), residual: ResidualCells::new() };
    walk.visit(start, initial, Rational::one(), 0);
    let Walk { absorbed, residual, .. } = walk;
    (absorbed, residual)
}

/// Enumerates every spinner sequence of length `depth` on a board, starting
/// at `square` with `chicks`, applying the rules directly to the labels.
pub fn brute_force_board(spec: &GameSpec, square: usize, chicks: i64, depth: u32) -> (AbsorbedCells, ResidualCells) {
    let n = spec.squares.len() as i64 - 1;
    let terminal = spec.squares.len();
    let spin = rat(1, spec.animals.len() as i64 + 1).unwrap();
    let landing = |from: usize, animal: &str| -> usize {
        (from + 1..=terminal)
            .find(|&j| match &spec.squares[j - 1] {
                Label::Terminal => true,
                Label::Animal(a) => a == animal,
                Label::Empty => false,
            })
            .unwrap()
    };

    let mut absorbed = AbsorbedCells::new();
    let mut residual = ResidualCells::new();
    let mut frontier: Vec<(usize, i64, Rational)> = vec![(square, chicks, Rational::one())];
    for round in 1..=depth {
        let mut next = Vec::new();
        for (sq, c, p) in frontier {
            let p = &p * &spin;
            next.push((sq, (c - 1).max(0), p.clone()));
            for animal in &spec.animals {
                let j = landing(sq, animal);
                let bonus = i64::from(spec.blue.contains(&j));
                let gained = (c + (j - sq) as i64 + bonus).min(n);
                if j == terminal {
                    *absorbed.entry((round, j.to_string(), gained)).or_insert_with(Rational::zero) += &p;
                } else {
                    next.push((j, gained, p.clone()));
                }
            }
        }
        frontier = next;
    }
    for (sq, c, p) in frontier {
        *residual.entry((sq.to_string(), c)).or_insert_with(Rational::zero) += p;
    }
    (absorbed, residual)
}

/// Flattens a record into the oracle's cell maps.
pub fn record_cells(rec: &AbsorptionRecord) -> (AbsorbedCells, ResidualCells) {
    let mut absorbed = AbsorbedCells::new();
    for ((round, state), poly) in &rec.absorbed {
        for (e, c) in poly.terms() {
            absorbed.insert((*round, state.clone(), e), c.clone());
        }
    }
    let mut residual = ResidualCells::new();
    for (state, poly) in rec.residual.iter() {
        for (e, c) in poly.terms() {
            residual.insert((state.clone(), e), c.clone());
        }
    }
    (absorbed, residual)
}

pub fn drop_zeros<K: Ord + Clone>(cells: &BTreeMap<K, Rational>) -> BTreeMap<K, Rational> {
    cells.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (k.clone(), v.clone())).collect()
}

// Property checks, shared by the standalone property suite and the
// acceptance suite. Each returns a description of the first failure.

/// umbra_step(sv1 + sv2) = umbra_step(sv1) + umbra_step(sv2), entry by entry.
pub fn check_linearity(chain_seed: u64, sv_seed: u64) -> Result<(), String> {
    let chain = random_chain(chain_seed);
    let a = random_state_vector(&chain, sv_seed);
    let b = random_state_vector(&chain, sv_seed.wrapping_add(1));
    let (next_sum, abs_sum) = umbra_step(&chain, &a.add(&b).unwrap()).unwrap();
    let (next_a, abs_a) = umbra_step(&chain, &a).unwrap();
    let (next_b, abs_b) = umbra_step(&chain, &b).unwrap();
    let dense = |sv: &StateVector| -> BTreeMap<String, CappedPolynomial> {
        chain
            .transient
            .iter()
            .map(|s| (s.clone(), sv.get(s).cloned().unwrap_or_else(|| CappedPolynomial::zero(chain.support))))
            .collect()
    };
    let next_ab = next_a.add(&next_b).unwrap();
    if dense(&next_sum) != dense(&next_ab) {
        return Err(format!("transient part not additive for chain seed {chain_seed}"));
    }
    for state in &chain.absorbing {
        let get = |m: &BTreeMap<String, CappedPolynomial>| {
            m.get(state).cloned().unwrap_or_else(|| CappedPolynomial::zero(chain.support))
        };
        if get(&abs_sum) != get(&abs_a).add(&get(&abs_b)).unwrap() {
            return Err(format!("absorbed part at {state} not additive for chain seed {chain_seed}"));
        }
    }
    // mass conservation for the same step
    let out: Rational = next_sum.mass() + abs_sum.values().map(CappedPolynomial::mass).sum::<Rational>();
    if out != a.add(&b).unwrap().mass() {
        return Err(format!("step lost mass for chain seed {chain_seed}"));
    }
    Ok(())
}

/// mass(clamp_shift(p, d)) = mass(p).
pub fn check_clamp_conservation(coeffs: &[(i64, i64)], min: i64, delta: i64) -> Result<(), String> {
    let support = Support { min, max: min + coeffs.len() as i64 - 1 };
    let poly = CappedPolynomial::from_terms(
        support,
        coeffs.iter().enumerate().map(|(k, &(n, d))| (min + k as i64, rat(n, d).unwrap())),
    )
    .unwrap();
    if poly.shift_clamped(delta).mass() == poly.mass() {
        Ok(())
    } else {
        Err(format!("shift by {delta} changed the mass of {poly}"))
    }
}

/// covariance² ≤ var(rounds)·var(capital), exactly.
pub fn check_cauchy_schwarz(chain_seed: u64) -> Result<(), String> {
    let chain = random_chain(chain_seed);
    let rec = umbral::umbra::run_absorption_from(&chain, "s0", chain.initial(), 12).unwrap();
    let Ok(stats) = summarize(&rec, chain.support.max) else {
        return Ok(()); // nothing absorbed: no statistics to check
    };
    let lhs = &stats.covariance * &stats.covariance;
    let rhs = &stats.rounds.variance * &stats.chicks.variance;
    if stats.chicks.variance.is_negative() || stats.rounds.variance.is_negative() || lhs > rhs {
        return Err(format!("Cauchy-Schwarz violated for chain seed {chain_seed}"));
    }
    Ok(())
}

/// Same configuration, same report; also under a single-threaded pool.
pub fn check_simulation_determinism(seed: u64, trials: u64) -> Result<(), String> {
    use umbral::simulate::{simulate, SimConfig};
    let spec = umbral::game::builtin_game("simplified").unwrap();
    let config = SimConfig { trials, seed, round_cap: 600 };
    let a = simulate(&spec, &config).unwrap();
    let b = simulate(&spec, &config).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = pool.install(|| simulate(&spec, &config).unwrap());
    if a == b && b == c {
        Ok(())
    } else {
        Err(format!("simulation with seed {seed} and {trials} trials is not reproducible"))
    }
}
