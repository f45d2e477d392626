//! Round-by-round evolution of capital distributions over a weighted chain.
//!
//! The state of the process after `i` rounds is a [`StateVector`]: for each
//! transient state, the capped generating polynomial of capital given that the
//! walker is there. One round pushes every polynomial along every outgoing
//! edge (scale by the edge probability, clamp-shift by the edge weight) and
//! sums what arrives. Whatever lands on an absorbing state leaves the vector
//! and is recorded under `(round, state)`; what remains after the horizon is
//! the residual mass `epsilon`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::chain::{ChainError, StateId, WeightedMarkovChain};
use crate::poly::{CappedPolynomial, PolyError, Support};
use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum UmbraError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("state {0:?} is not a transient state of the chain")]
    NotTransient(StateId),
    #[error("polynomial at state {state:?} has support {found}, chain uses {expected}")]
    SupportMismatch { state: StateId, found: Support, expected: Support },
    #[error("horizon must be at least one round")]
    ZeroRounds,
    #[error("nothing was absorbed within the horizon (epsilon = 1); cannot condition")]
    NothingAbsorbed,
}

/// Capital distribution per transient state. Absent entries are zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StateVector {
    entries: BTreeMap<StateId, CappedPolynomial>,
}

impl StateVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(state: impl Into<StateId>, exponent: i64, support: Support) -> Result<Self, PolyError> {
        let mut sv = Self::new();
        sv.insert(state, CappedPolynomial::monomial(exponent, Rational::one(), support)?);
        Ok(sv)
    }

    pub fn insert(&mut self, state: impl Into<StateId>, poly: CappedPolynomial) {
        self.entries.insert(state.into(), poly);
    }

    pub fn get(&self, state: &str) -> Option<&CappedPolynomial> {
        self.entries.get(state)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateId, &CappedPolynomial)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass(&self) -> Rational {
        self.entries.values().map(CappedPolynomial::mass).sum()
    }

    /// Entry-wise sum; states present in only one side are copied.
    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        let mut sum = self.clone();
        for (state, poly) in &other.entries {
            match sum.entries.get_mut(state) {
                Some(existing) => existing.add_assign(poly)?,
                None => {
                    sum.entries.insert(state.clone(), poly.clone());
                }
            }
        }
        Ok(sum)
    }
}

impl FromIterator<(StateId, CappedPolynomial)> for StateVector {
    fn from_iter<I: IntoIterator<Item = (StateId, CappedPolynomial)>>(iter: I) -> Self {
        StateVector { entries: iter.into_iter().collect() }
    }
}

/// A validated chain with edges resolved to dense state indices.
#[derive(Debug, Clone)]
pub struct Evolver {
    ids: Vec<StateId>,
    index: HashMap<StateId, usize>,
    transient_count: usize,
    // Outgoing (dst, prob, weight) for each transient index.
    out: Vec<Vec<(usize, Rational, i64)>>,
    support: Support,
}

impl Evolver {
    pub fn new(chain: &WeightedMarkovChain) -> Result<Self, UmbraError> {
        chain.ensure_valid()?;
        let ids: Vec<StateId> = chain.transient.iter().chain(&chain.absorbing).cloned().collect();
        let index: HashMap<StateId, usize> = ids.iter().enumerate().map(|(k, s)| (s.clone(), k)).collect();
        let mut out = vec![Vec::new(); chain.transient.len()];
        for edge in &chain.edges {
            out[index[&edge.src]].push((index[&edge.dst], edge.prob.clone(), edge.weight));
        }
        Ok(Evolver {
            ids,
            index,
            transient_count: chain.transient.len(),
            out,
            support: chain.support,
        })
    }

    pub fn support(&self) -> Support {
        self.support
    }

    fn dense(&self, sv: &StateVector) -> Result<Vec<Option<CappedPolynomial>>, UmbraError> {
        let mut dense = vec![None; self.transient_count];
        for (state, poly) in sv.iter() {
            let k = match self.index.get(state) {
                Some(&k) if k < self.transient_count => k,
                _ => return Err(UmbraError::NotTransient(state.clone())),
            };
            if poly.support() != self.support {
                return Err(UmbraError::SupportMismatch {
                    state: state.clone(),
                    found: poly.support(),
                    expected: self.support,
                });
            }
            dense[k] = Some(poly.clone());
        }
        Ok(dense)
    }

    fn sparse(&self, dense: Vec<Option<CappedPolynomial>>, offset: usize) -> BTreeMap<StateId, CappedPolynomial> {
        dense
            .into_iter()
            .enumerate()
            .filter_map(|(k, p)| p.map(|p| (self.ids[offset + k].clone(), p)))
            .collect()
    }

    /// One round over dense transient slots. Returns the next transient
    /// slots and the slots of mass that arrived at each absorbing state.
    fn step_dense(
        &self,
        current: &[Option<CappedPolynomial>],
    ) -> (Vec<Option<CappedPolynomial>>, Vec<Option<CappedPolynomial>>) {
        let mut acc: Vec<Option<CappedPolynomial>> = vec![None; self.ids.len()];
        for (src, poly) in current.iter().enumerate() {
            let Some(poly) = poly else { continue };
            if poly.is_zero() {
                continue;
            }
            for (dst, prob, weight) in &self.out[src] {
                acc[*dst]
                    .get_or_insert_with(|| CappedPolynomial::zero(self.support))
                    .add_scaled_shift(poly, prob, *weight);
            }
        }
        let absorbed = acc.split_off(self.transient_count);
        (acc, absorbed)
    }

    /// Applies one round of evolution to `sv`.
    pub fn step(
        &self,
        sv: &StateVector,
    ) -> Result<(StateVector, BTreeMap<StateId, CappedPolynomial>), UmbraError> {
        let (next, absorbed) = self.step_dense(&self.dense(sv)?);
        let next = StateVector { entries: self.sparse(next, 0) };
        Ok((next, self.sparse(absorbed, self.transient_count)))
    }

    /// Starts an evolution from unit mass at `start` with capital `t^exponent`.
    pub fn evolve(&self, start: &str, exponent: i64) -> Result<Evolution<'_>, UmbraError> {
        let k = match self.index.get(start) {
            Some(&k) if k < self.transient_count => k,
            _ => return Err(UmbraError::NotTransient(start.to_string())),
        };
        let mut current = vec![None; self.transient_count];
        current[k] = Some(CappedPolynomial::monomial(exponent, Rational::one(), self.support)?);
        Ok(Evolution { evolver: self, current, round: 0 })
    }
}

/// Mass absorbed in a single round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundAbsorption {
    pub round: u32,
    pub absorbed: BTreeMap<StateId, CappedPolynomial>,
}

/// An in-progress run; each call to `next` performs one round.
#[derive(Debug, Clone)]
pub struct Evolution<'a> {
    evolver: &'a Evolver,
    current: Vec<Option<CappedPolynomial>>,
    round: u32,
}

impl Evolution<'_> {
    pub fn rounds_done(&self) -> u32 {
        self.round
    }

    pub fn residual(&self) -> StateVector {
        StateVector { entries: self.evolver.sparse(self.current.clone(), 0) }
    }

    pub fn residual_mass(&self) -> Rational {
        self.current.iter().flatten().map(CappedPolynomial::mass).sum()
    }
}

impl Iterator for Evolution<'_> {
    type Item = RoundAbsorption;

    fn next(&mut self) -> Option<RoundAbsorption> {
        let (next, absorbed) = self.evolver.step_dense(&self.current);
        self.current = next;
        self.round += 1;
        let absorbed = self
            .evolver
            .sparse(absorbed, self.evolver.transient_count)
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .collect();
        Some(RoundAbsorption { round: self.round, absorbed })
    }
}

/// Absorbed capital per `(round, absorbing state)` plus the residual after
/// the horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsorptionRecord {
    pub absorbed: BTreeMap<(u32, StateId), CappedPolynomial>,
    pub rounds_run: u32,
    pub residual: StateVector,
    pub epsilon: Rational,
    pub support: Support,
}

/// Which absorbing states a marginal sums over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbsorbingFilter {
    All,
    Only(Vec<StateId>),
}

impl AbsorbingFilter {
    fn admits(&self, state: &str) -> bool {
        match self {
            AbsorbingFilter::All => true,
            AbsorbingFilter::Only(states) => states.iter().any(|s| s == state),
        }
    }
}

impl AbsorptionRecord {
    pub fn absorbed_mass(&self) -> Rational {
        self.absorbed.values().map(CappedPolynomial::mass).sum()
    }

    /// Rescales absorbed mass by `1 / (1 - epsilon)`, i.e. conditions on
    /// absorption within the horizon.
    pub fn conditional(&self) -> Result<AbsorptionRecord, UmbraError> {
        if self.epsilon.is_zero() {
            return Ok(self.clone());
        }
        let remaining = Rational::one() - &self.epsilon;
        if remaining.is_zero() {
            return Err(UmbraError::NothingAbsorbed);
        }
        let factor = remaining.recip();
        Ok(AbsorptionRecord {
            absorbed: self.absorbed.iter().map(|(k, p)| (k.clone(), p.scale(&factor))).collect(),
            rounds_run: self.rounds_run,
            residual: StateVector::new(),
            epsilon: Rational::zero(),
            support: self.support,
        })
    }

    /// Capital distribution at absorption, summed over rounds.
    pub fn marginal_capital(&self, which: &AbsorbingFilter) -> CappedPolynomial {
        let mut total = CappedPolynomial::zero(self.support);
        for ((_, state), poly) in &self.absorbed {
            if which.admits(state) {
                total.add_assign(poly).expect("record polynomials share the record support");
            }
        }
        total
    }

    /// Absorbed mass per round, summed over absorbing states.
    pub fn marginal_rounds(&self) -> BTreeMap<u32, Rational> {
        let mut rounds: BTreeMap<u32, Rational> = BTreeMap::new();
        for ((round, _), poly) in &self.absorbed {
            *rounds.entry(*round).or_insert_with(Rational::zero) += poly.mass();
        }
        rounds
    }

    /// Absorption probability per absorbing state.
    pub fn absorption_by_state(&self) -> BTreeMap<StateId, Rational> {
        let mut by_state: BTreeMap<StateId, Rational> = BTreeMap::new();
        for ((_, state), poly) in &self.absorbed {
            *by_state.entry(state.clone()).or_insert_with(Rational::zero) += poly.mass();
        }
        by_state
    }
}

/// One round of evolution of `sv` under `chain`.
pub fn umbra_step(
    chain: &WeightedMarkovChain,
    sv: &StateVector,
) -> Result<(StateVector, BTreeMap<StateId, CappedPolynomial>), UmbraError> {
    Evolver::new(chain)?.step(sv)
}

/// Runs `rounds` rounds from unit mass at `start` with zero capital.
pub fn run_absorption(
    chain: &WeightedMarkovChain,
    start: &str,
    rounds: u32,
) -> Result<AbsorptionRecord, UmbraError> {
    run_absorption_from(chain, start, 0, rounds)
}

/// Runs `rounds` rounds from unit mass at `start` with capital `t^initial`.
pub fn run_absorption_from(
    chain: &WeightedMarkovChain,
    start: &str,
    initial: i64,
    rounds: u32,
) -> Result<AbsorptionRecord, UmbraError> {
    if rounds == 0 {
        return Err(UmbraError::ZeroRounds);
    }
    let evolver = Evolver::new(chain)?;
    let mut evolution = evolver.evolve(start, initial)?;
    let mut absorbed = BTreeMap::new();
    for step in evolution.by_ref().take(rounds as usize) {
        for (state, poly) in step.absorbed {
            absorbed.insert((step.round, state), poly);
        }
    }
    Ok(AbsorptionRecord {
        absorbed,
        rounds_run: rounds,
        epsilon: evolution.residual_mass(),
        residual: evolution.residual(),
        support: evolver.support(),
    })
}

/// Conditions `rec` on absorption within its horizon.
pub fn conditional_record(rec: &AbsorptionRecord) -> Result<AbsorptionRecord, UmbraError> {
    rec.conditional()
}
