//! Seeded Monte Carlo play, used as an independent check on the exact engine.
//!
//! Trials are split into fixed-size streams. Stream `k` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` with stream number `k`, so the outcome
//! depends only on `(seed, trials)` and not on how many threads ran it.
//! Streams are reduced in index order and all accumulation is integral, so
//! the reported floats are bit-identical across runs and platforms.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::WeightedMarkovChain;
use crate::game::{chick_gain, next_location, GameSpec};
use crate::rational::to_f64;
use crate::umbra::UmbraError;

/// Trials per independent random stream.
pub const TRIALS_PER_STREAM: u64 = 1 << 16;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error("round cap must be at least one")]
    ZeroRoundCap,
    #[error(transparent)]
    Model(#[from] UmbraError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    /// Trials still running after this many rounds are censored.
    pub round_cap: u32,
}

/// Result of one play.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Finished { rounds: u32, capital: i64 },
    Censored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    pub round_cap: u32,
    pub completed: u64,
    pub censored: u64,
    /// Completed trials that finished at the win threshold.
    pub wins: u64,
    pub win_threshold: i64,
    pub win_rate: f64,
    pub chick_mean: f64,
    pub chick_variance: f64,
    pub rounds_mean: f64,
    pub rounds_variance: f64,
    pub correlation: Option<f64>,
    /// `[capital, count]` pairs over completed trials.
    pub chick_histogram: Vec<(i64, u64)>,
    /// `[rounds, count]` pairs over completed trials.
    pub rounds_histogram: Vec<(u32, u64)>,
}

/// Per-square move table for a board: `moves[i][a]` is `(destination, gain)`.
struct BoardTable {
    terminal: usize,
    cap: i64,
    moves: Vec<Vec<(usize, i64)>>,
}

impl BoardTable {
    fn new(spec: &GameSpec) -> Self {
        let moves = (1..spec.terminal())
            .map(|i| {
                spec.animals
                    .iter()
                    .map(|a| {
                        let j = next_location(spec, i, a).expect("non-terminal square and known animal");
                        (j, chick_gain(spec, i, j))
                    })
                    .collect()
            })
            .collect();
        BoardTable { terminal: spec.terminal(), cap: spec.win_threshold, moves }
    }

    /// `spin(n)` must return an outcome in `0..n`; outcome `K` is the fox.
    fn play(&self, round_cap: u32, mut spin: impl FnMut(u32) -> u32) -> Outcome {
        let outcomes = self.moves[0].len() as u32 + 1;
        let fox = outcomes - 1;
        let mut square = 1usize;
        let mut chicks = 0i64;
        for round in 1..=round_cap {
            let outcome = spin(outcomes);
            if outcome == fox {
                chicks = (chicks - 1).max(0);
                continue;
            }
            let (dest, gain) = self.moves[square - 1][outcome as usize];
            square = dest;
            chicks = (chicks + gain).min(self.cap);
            if square == self.terminal {
                return Outcome::Finished { rounds: round, capital: chicks };
            }
        }
        Outcome::Censored
    }
}

/// Plays one game with outcomes supplied by `spin`, which receives the number
/// of equally likely outcomes `K + 1` and returns one of them (`K` = fox).
pub fn play_with(spec: &GameSpec, round_cap: u32, spin: impl FnMut(u32) -> u32) -> Outcome {
    BoardTable::new(spec).play(round_cap, spin)
}

/// Plays one game with uniform spins from `rng`.
pub fn play_once<R: Rng>(spec: &GameSpec, rng: &mut R, round_cap: u32) -> Outcome {
    play_with(spec, round_cap, |n| rng.gen_range(0..n))
}

/// Sampling view of a chain: cumulative probabilities per transient state.
struct ChainTable {
    start: usize,
    initial: i64,
    min: i64,
    max: i64,
    absorbing_from: usize,
    // (cumulative probability, destination index, weight)
    out: Vec<Vec<(f64, usize, i64)>>,
}

impl ChainTable {
    fn new(chain: &WeightedMarkovChain, start: &str, initial: i64) -> Result<Self, UmbraError> {
        chain.ensure_valid()?;
        let ids: Vec<&String> = chain.transient.iter().chain(&chain.absorbing).collect();
        let find = |id: &str| ids.iter().position(|s| *s == id);
        let start_index = find(start)
            .filter(|&k| k < chain.transient.len())
            .ok_or_else(|| UmbraError::NotTransient(start.to_string()))?;
        if !chain.support.contains(initial) {
            return Err(crate::poly::PolyError::OutOfSupport { exponent: initial, support: chain.support }.into());
        }
        let mut out: Vec<Vec<(f64, usize, i64)>> = vec![Vec::new(); chain.transient.len()];
        for edge in &chain.edges {
            let src = find(&edge.src).expect("validated");
            let row = &mut out[src];
            let acc = row.last().map_or(0.0, |e| e.0) + to_f64(&edge.prob);
            row.push((acc, find(&edge.dst).expect("validated"), edge.weight));
        }
        Ok(ChainTable {
            start: start_index,
            initial,
            min: chain.support.min,
            max: chain.support.max,
            absorbing_from: chain.transient.len(),
            out,
        })
    }

    fn play<R: Rng>(&self, rng: &mut R, round_cap: u32) -> Outcome {
        let mut state = self.start;
        let mut capital = self.initial;
        for round in 1..=round_cap {
            let row = &self.out[state];
            let u: f64 = rng.gen::<f64>() * row.last().map_or(1.0, |e| e.0);
            let &(_, dest, weight) = row.iter().find(|e| u < e.0).unwrap_or_else(|| row.last().expect("nonempty row"));
            state = dest;
            capital = (capital + weight).clamp(self.min, self.max);
            if state >= self.absorbing_from {
                return Outcome::Finished { rounds: round, capital };
            }
        }
        Outcome::Censored
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    censored: u64,
    chicks: BTreeMap<i64, u64>,
    rounds: BTreeMap<u32, u64>,
    cross: i128,
}

impl Tally {
    fn record(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Censored => self.censored += 1,
            Outcome::Finished { rounds, capital } => {
                *self.chicks.entry(capital).or_default() += 1;
                *self.rounds.entry(rounds).or_default() += 1;
                self.cross += i128::from(rounds) * i128::from(capital);
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.censored += other.censored;
        for (k, v) in other.chicks {
            *self.chicks.entry(k).or_default() += v;
        }
        for (k, v) in other.rounds {
            *self.rounds.entry(k).or_default() += v;
        }
        self.cross += other.cross;
        self
    }

    fn report(self, config: &SimConfig, win_threshold: i64) -> SimulationReport {
        // Integer power sums, converted to floats once.
        fn sums<K: Copy + Into<i128>>(hist: &BTreeMap<K, u64>) -> (i128, i128, i128) {
            hist.iter().fold((0, 0, 0), |(n, s1, s2), (&k, &c)| {
                let k: i128 = k.into();
                let c = i128::from(c);
                (n + c, s1 + c * k, s2 + c * k * k)
            })
        }
        let (n, c1, c2) = sums(&self.chicks);
        let (_, r1, r2) = sums(&self.rounds);
        let nf = n as f64;
        let (chick_mean, chick_variance, rounds_mean, rounds_variance, correlation) = if n == 0 {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN, None)
        } else {
            let cm = c1 as f64 / nf;
            let rm = r1 as f64 / nf;
            // n^2 Var = n Σx² - (Σx)², exact in integers
            let cv = (n * c2 - c1 * c1) as f64 / (nf * nf);
            let rv = (n * r2 - r1 * r1) as f64 / (nf * nf);
            let cov = (n * self.cross - r1 * c1) as f64 / (nf * nf);
            let corr = (cv > 0.0 && rv > 0.0).then(|| cov / (cv * rv).sqrt());
            (cm, cv, rm, rv, corr)
        };
        let wins = self.chicks.get(&win_threshold).copied().unwrap_or(0);
        SimulationReport {
            trials: config.trials,
            seed: config.seed,
            round_cap: config.round_cap,
            completed: n as u64,
            censored: self.censored,
            wins,
            win_threshold,
            win_rate: if n == 0 { f64::NAN } else { wins as f64 / nf },
            chick_mean,
            chick_variance,
            rounds_mean,
            rounds_variance,
            correlation,
            chick_histogram: self.chicks.into_iter().collect(),
            rounds_histogram: self.rounds.into_iter().collect(),
        }
    }
}

fn run_streams(config: &SimConfig, play: impl Fn(&mut ChaCha8Rng) -> Outcome + Sync) -> Tally {
    let streams = config.trials.div_ceil(TRIALS_PER_STREAM);
    let tallies: Vec<Tally> = (0..streams)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k);
            let count = TRIALS_PER_STREAM.min(config.trials - k * TRIALS_PER_STREAM);
            let mut tally = Tally::default();
            for _ in 0..count {
                tally.record(play(&mut rng));
            }
            tally
        })
        .collect();
    tallies.into_iter().fold(Tally::default(), Tally::merge)
}

fn check(config: &SimConfig) -> Result<(), SimulationError> {
    if config.trials == 0 {
        return Err(SimulationError::NoTrials);
    }
    if config.round_cap == 0 {
        return Err(SimulationError::ZeroRoundCap);
    }
    Ok(())
}

/// Plays `config.trials` games of `spec`.
pub fn simulate(spec: &GameSpec, config: &SimConfig) -> Result<SimulationReport, SimulationError> {
    check(config)?;
    let table = BoardTable::new(spec);
    let tally = run_streams(config, |rng| table.play(config.round_cap, |n| rng.gen_range(0..n)));
    Ok(tally.report(config, spec.win_threshold))
}

/// Walks `chain` from `start` (capital `initial`) `config.trials` times. A
/// trial counts as a win when it ends at the top of the capital support.
pub fn simulate_chain(
    chain: &WeightedMarkovChain,
    start: &str,
    initial: i64,
    config: &SimConfig,
) -> Result<SimulationReport, SimulationError> {
    check(config)?;
    let table = ChainTable::new(chain, start, initial)?;
    let tally = run_streams(config, |rng| table.play(rng, config.round_cap));
    Ok(tally.report(config, chain.support.max))
}
