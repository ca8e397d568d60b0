//! Reinforced urn representation of the SBS process.
//!
//! States are pairs `(t, d)`. A walk starts at `(0, 0)`; at `(t, 0)` a ball
//! is drawn from that state's urn, `m` balls of the drawn color are added
//! back, and the walk moves to `(t+1, c)`. Drawing a color `c ≠ 0` ends a
//! patient block with event time `t+1` and cause `c`; the walk then returns
//! to `(0, 0)` for the next patient. The urn at `(t, 0)` starts with ball
//! masses `α_{t+1,0}, …, α_{t+1,k}` (real masses are allowed).
//!
//! With reinforcement `m`, the sequence of blocks is exchangeable and its de
//! Finetti measure is `SBS(α/m)`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::process::{CenteredSbs, SbsParameters};
use crate::subdist::SubdistributionFunction;

/// A state `(t, d)` of the urn chain.
pub type State = (usize, usize);

/// One patient: the event time and cause read off a block of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PatientBlock {
    pub time: usize,
    pub cause: usize,
}

impl PatientBlock {
    pub fn new(time: usize, cause: usize) -> Self {
        Self { time, cause }
    }
}

/// One urn draw, with the urn composition just before the draw.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    /// Index of the patient block the draw belongs to (0-based).
    pub block: usize,
    pub state: State,
    pub color: usize,
    pub composition: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrnSystem {
    initial: SbsParameters,
    reinforcement: f64,
    /// Urns at `(t, 0)` that have been reinforced at least once, keyed by `t`.
    visited: BTreeMap<usize, Vec<f64>>,
    blocks_drawn: usize,
}

impl UrnSystem {
    /// Urns initialized from `params`, adding `reinforcement` balls per draw.
    ///
    /// `reinforcement = 0` gives i.i.d. blocks from the prior mean.
    pub fn new(params: SbsParameters, reinforcement: f64) -> Result<Self> {
        if !(reinforcement.is_finite() && reinforcement >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reinforcement mass must be finite and nonnegative, got {reinforcement}"
            )));
        }
        Ok(Self {
            initial: params,
            reinforcement,
            visited: BTreeMap::new(),
            blocks_drawn: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.initial.k()
    }

    pub fn horizon(&self) -> usize {
        self.initial.horizon()
    }

    pub fn reinforcement(&self) -> f64 {
        self.reinforcement
    }

    pub fn initial_parameters(&self) -> &SbsParameters {
        &self.initial
    }

    pub fn blocks_drawn(&self) -> usize {
        self.blocks_drawn
    }

    /// Current ball masses in the urn at `(t, 0)`, `0 ≤ t < T`.
    pub fn composition(&self, t: usize) -> &[f64] {
        match self.visited.get(&t) {
            Some(c) => c,
            None => self.initial.row(t + 1),
        }
    }

    /// Times `t` whose urn `(t, 0)` has been reinforced.
    pub fn visited_urns(&self) -> impl Iterator<Item = usize> + '_ {
        self.visited.keys().copied()
    }

    /// The current urn contents read as SBS parameters. The law of the next
    /// block is the mean of this process (equivalently of its `1/m` scaling).
    pub fn current_parameters(&self) -> SbsParameters {
        let rows: Vec<Vec<f64>> = (0..self.horizon())
            .map(|t| self.composition(t).to_vec())
            .collect();
        SbsParameters::from_rows(self.initial.grid().clone(), &rows)
            .expect("reinforced urn contents are valid parameters")
    }

    /// Law of the next patient block given everything drawn so far.
    pub fn next_block_law(&self) -> SubdistributionFunction {
        self.current_parameters().mean_subdistribution()
    }

    /// Probability that the next block is `block`, without drawing it.
    pub fn block_probability(&self, block: PatientBlock) -> Result<f64> {
        self.check_block(block)?;
        let mut p = 1.0;
        for t in 0..block.time {
            let color = if t + 1 == block.time { block.cause } else { 0 };
            let urn = self.composition(t);
            p *= urn[color] / urn.iter().sum::<f64>();
        }
        Ok(p)
    }

    /// Adds `m` balls of each color drawn along the walk producing `block`.
    pub fn reinforce_block(&mut self, block: PatientBlock) -> Result<()> {
        self.check_block(block)?;
        for t in 0..block.time {
            let color = if t + 1 == block.time { block.cause } else { 0 };
            self.reinforce(t, color);
        }
        self.blocks_drawn += 1;
        Ok(())
    }

    fn reinforce(&mut self, t: usize, color: usize) {
        let m = self.reinforcement;
        let initial = &self.initial;
        self.visited
            .entry(t)
            .or_insert_with(|| initial.row(t + 1).to_vec())[color] += m;
    }

    fn check_block(&self, block: PatientBlock) -> Result<()> {
        if (1..=self.horizon()).contains(&block.time) && (1..=self.k()).contains(&block.cause) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                time: block.time,
                cause: block.cause,
                horizon: self.horizon(),
                k: self.k(),
            })
        }
    }

    /// Runs one block with colors chosen by `choose(t, composition)`,
    /// appending a record per draw to `trace` when given.
    ///
    /// Urns are reinforced once the block is complete; a walk visits each
    /// urn at most once, so this does not change any draw probability. A walk
    /// that survives the last urn fails with [`Error::HorizonExceeded`] and
    /// leaves the urns untouched.
    pub fn walk_with<F>(
        &mut self,
        mut choose: F,
        mut trace: Option<&mut Vec<TraceRecord>>,
    ) -> Result<PatientBlock>
    where
        F: FnMut(usize, &[f64]) -> usize,
    {
        let k = self.k();
        let mut records = Vec::new();
        for t in 0..self.horizon() {
            let composition = self.composition(t);
            let color = choose(t, composition);
            if color > k {
                return Err(Error::InvalidParameter(format!(
                    "color {color} drawn from an urn with {} colors",
                    k + 1
                )));
            }
            if trace.is_some() {
                records.push(TraceRecord {
                    block: self.blocks_drawn,
                    state: (t, 0),
                    color,
                    composition: composition.to_vec(),
                });
            }
            if color != 0 {
                let block = PatientBlock::new(t + 1, color);
                self.reinforce_block(block)?;
                if let Some(out) = trace.as_mut() {
                    out.append(&mut records);
                }
                return Ok(block);
            }
        }
        Err(Error::HorizonExceeded {
            horizon: self.horizon(),
        })
    }

    /// Draws the next patient block, reinforcing the urns it visits.
    pub fn draw_block<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<PatientBlock> {
        self.walk_with(|_, urn| draw_color(urn, rng), None)
    }

    /// As [`Self::draw_block`], also recording every draw.
    pub fn draw_block_traced<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        trace: &mut Vec<TraceRecord>,
    ) -> Result<PatientBlock> {
        self.walk_with(|_, urn| draw_color(urn, rng), Some(trace))
    }
}

/// Color index drawn with probability proportional to its ball mass.
fn draw_color<R: Rng + ?Sized>(urn: &[f64], rng: &mut R) -> usize {
    let total: f64 = urn.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (c, &n) in urn.iter().enumerate() {
        acc += n;
        if u < acc {
            return c;
        }
    }
    // u landed on the rounding gap at the top: take the last color with mass
    urn.iter().rposition(|&n| n > 0.0).unwrap_or(0)
}

/// Exact probability of observing `blocks` in order, starting from `urn`.
pub fn sequence_probability(urn: &UrnSystem, blocks: &[PatientBlock]) -> Result<f64> {
    let mut urn = urn.clone();
    let mut p = 1.0;
    for &b in blocks {
        p *= urn.block_probability(b)?;
        urn.reinforce_block(b)?;
    }
    Ok(p)
}

/// Exact probability of a full state path of the urn chain, which must start
/// at `(0, 0)` and follow the chain's transition structure.
pub fn path_probability(urn: &UrnSystem, path: &[State]) -> Result<f64> {
    if path.first() != Some(&(0, 0)) {
        return Err(Error::InvalidParameter("paths start at (0, 0)".into()));
    }
    let mut urn = urn.clone();
    let mut p = 1.0;
    // urns of a block are reinforced when it completes; a block never
    // revisits an urn, so in-block draws see the pre-block composition
    for pair in path.windows(2) {
        let ((t, d), (t_next, d_next)) = (pair[0], pair[1]);
        if d != 0 {
            if (t_next, d_next) != (0, 0) {
                return Err(Error::InvalidParameter(format!(
                    "({t},{d}) can only move to (0,0)"
                )));
            }
            urn.reinforce_block(PatientBlock::new(t, d))?;
            continue;
        }
        if t_next != t + 1 || t >= urn.horizon() || d_next > urn.k() {
            return Err(Error::InvalidParameter(format!(
                "({t},0) cannot move to ({t_next},{d_next})"
            )));
        }
        let composition = urn.composition(t);
        p *= composition[d_next] / composition.iter().sum::<f64>();
    }
    Ok(p)
}

/// `SBS(α/m)`: the process whose law equals the urn scheme with masses `α`
/// and reinforcement `m`.
pub fn scaled_reinforcement_equivalence(params: &SbsParameters, m: f64) -> Result<SbsParameters> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reinforcement mass must be positive, got {m}"
        )));
    }
    params.scaled(1.0 / m)
}

/// `SBS(ω/m, F0)` for an urn built on `SBS(ω, F0)` with reinforcement `m`.
pub fn scaled_centered_equivalence(prior: &CenteredSbs, m: f64) -> Result<CenteredSbs> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reinforcement mass must be positive, got {m}"
        )));
    }
    CenteredSbs::new(
        prior.centering().clone(),
        prior.omega().iter().map(|w| w / m).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ones(t: usize, k: usize) -> SbsParameters {
        SbsParameters::constant(TimeGrid::unit(t).unwrap(), k, 1.0).unwrap()
    }

    #[test]
    fn scripted_walk_reproduces_the_illustrated_trace() {
        let mut urn = UrnSystem::new(ones(4, 2), 1.0).unwrap();
        let mut script = [0, 0, 2].into_iter();
        let mut trace = Vec::new();
        let first = urn
            .walk_with(|_, _| script.next().unwrap(), Some(&mut trace))
            .unwrap();
        assert_eq!(first, PatientBlock::new(3, 2));
        let states: Vec<State> = trace.iter().map(|r| r.state).collect();
        assert_eq!(states, vec![(0, 0), (1, 0), (2, 0)]);
        assert_eq!(urn.composition(0), &[2.0, 1.0, 1.0]);
        assert_eq!(urn.composition(2), &[1.0, 1.0, 2.0]);

        let mut script = [0, 1].into_iter();
        let second = urn
            .walk_with(|_, _| script.next().unwrap(), Some(&mut trace))
            .unwrap();
        assert_eq!(second, PatientBlock::new(2, 1));
        assert_eq!(trace.len(), 5);
        assert_eq!(trace[3].composition, vec![2.0, 1.0, 1.0]);
        assert_eq!(urn.composition(1), &[2.0, 2.0, 1.0]);
    }

    #[test]
    fn nearly_empty_colors_are_never_drawn() {
        let params = SbsParameters::from_rows(
            TimeGrid::unit(2).unwrap(),
            &[vec![1e-300, 1.0, 1e-300], vec![1.0, 1.0, 1.0]],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let mut urn = UrnSystem::new(params.clone(), 1.0).unwrap();
            assert_eq!(urn.draw_block(&mut rng).unwrap(), PatientBlock::new(1, 1));
        }
    }

    #[test]
    fn walking_past_the_horizon_fails_without_side_effects() {
        let mut urn = UrnSystem::new(ones(2, 1), 1.0).unwrap();
        let before = urn.clone();
        let err = urn.walk_with(|_, _| 0, None).unwrap_err();
        assert!(matches!(err, Error::HorizonExceeded { horizon: 2 }));
        assert_eq!(urn, before);
    }

    #[test]
    fn single_block_probability_is_the_prior_mean() {
        let params = SbsParameters::from_rows(
            TimeGrid::unit(3).unwrap(),
            &[vec![1.5, 0.3, 0.7], vec![2.0, 1.0, 0.2], vec![0.4, 0.9, 1.1]],
        )
        .unwrap();
        for m in [0.0, 0.5, 1.0, 7.0] {
            let urn = UrnSystem::new(params.clone(), m).unwrap();
            for t in 1..=3 {
                for c in 1..=2 {
                    let p = sequence_probability(&urn, &[PatientBlock::new(t, c)]).unwrap();
                    assert!((p - params.prior_mean(t, c).unwrap()).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn swapped_pair_has_equal_probability() {
        let urn = UrnSystem::new(ones(3, 2), 1.0).unwrap();
        let (a, b) = (PatientBlock::new(2, 1), PatientBlock::new(3, 2));
        let p = sequence_probability(&urn, &[a, b]).unwrap();
        let q = sequence_probability(&urn, &[b, a]).unwrap();
        assert_eq!(p, q);
        assert!(p > 0.0);
    }

    #[test]
    fn no_reinforcement_factorizes() {
        let urn = UrnSystem::new(ones(3, 2), 0.0).unwrap();
        let blocks = [PatientBlock::new(2, 1), PatientBlock::new(3, 2), PatientBlock::new(2, 1)];
        let joint = sequence_probability(&urn, &blocks).unwrap();
        let product: f64 = blocks
            .iter()
            .map(|&b| sequence_probability(&urn, &[b]).unwrap())
            .product();
        assert!((joint - product).abs() < 1e-17);
    }

    #[test]
    fn sequence_probability_leaves_the_urn_alone() {
        let urn = UrnSystem::new(ones(3, 2), 1.0).unwrap();
        let before = urn.clone();
        sequence_probability(&urn, &[PatientBlock::new(1, 1), PatientBlock::new(3, 2)]).unwrap();
        assert_eq!(urn, before);
    }

    #[test]
    fn reinforcement_raises_the_chance_of_repeating() {
        let mut urn = UrnSystem::new(ones(3, 2), 0.5).unwrap();
        for b in [PatientBlock::new(1, 2), PatientBlock::new(3, 1), PatientBlock::new(2, 2)] {
            let before = urn.block_probability(b).unwrap();
            urn.reinforce_block(b).unwrap();
            assert!(urn.block_probability(b).unwrap() > before);
        }
    }

    #[test]
    fn unit_reinforcement_is_the_identity_scaling() {
        let p = ones(3, 2);
        assert_eq!(scaled_reinforcement_equivalence(&p, 1.0).unwrap(), p);
        let two = SbsParameters::constant(TimeGrid::unit(1).unwrap(), 2, 2.0).unwrap();
        assert_eq!(scaled_reinforcement_equivalence(&two, 2.0).unwrap().row(1), &[1.0, 1.0, 1.0]);
        assert!(scaled_reinforcement_equivalence(&p, 0.0).is_err());
    }

    #[test]
    fn scaled_centered_prior_matches_scaled_parameters() {
        let f0 = SubdistributionFunction::new(TimeGrid::unit(3).unwrap(), 2, vec![0.1, 0.2, 0.15, 0.05, 0.2, 0.1])
            .unwrap();
        let prior = CenteredSbs::new(f0, vec![2.0, 5.0, 0.5]).unwrap();
        let m = 4.0;
        let a = scaled_centered_equivalence(&prior, m).unwrap().to_parameters().unwrap();
        let b = scaled_reinforcement_equivalence(&prior.to_parameters().unwrap(), m).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn markov_exchangeable_paths_share_probability() {
        // same start and the same number of traversals of every transition
        let urn = UrnSystem::new(
            SbsParameters::from_rows(
                TimeGrid::unit(3).unwrap(),
                &[vec![1.3, 0.4, 0.8], vec![0.6, 1.7, 0.2], vec![0.9, 0.5, 1.2]],
            )
            .unwrap(),
            1.0,
        )
        .unwrap();
        let a = [(0, 0), (1, 0), (2, 1), (0, 0), (1, 1), (0, 0), (1, 0)];
        let b = [(0, 0), (1, 1), (0, 0), (1, 0), (2, 1), (0, 0), (1, 0)];
        let pa = path_probability(&urn, &a).unwrap();
        let pb = path_probability(&urn, &b).unwrap();
        assert!((pa - pb).abs() < 1e-16 * pa.max(1.0));
        assert!(pa > 0.0);
    }

    #[test]
    fn first_block_frequencies_match_the_prior_mean() {
        let params = SbsParameters::from_rows(
            TimeGrid::unit(3).unwrap(),
            &[vec![2.0, 0.5, 1.0], vec![1.0, 1.0, 0.5], vec![1e-9, 1.0, 1.0]],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let mut counts = [[0usize; 3]; 4];
        for _ in 0..n {
            let mut urn = UrnSystem::new(params.clone(), 1.0).unwrap();
            match urn.draw_block(&mut rng) {
                Ok(b) => counts[b.time][b.cause] += 1,
                Err(Error::HorizonExceeded { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
        for t in 1..=3 {
            for c in 1..=2 {
                let p = params.prior_mean(t, c).unwrap();
                let se = (p * (1.0 - p) / n as f64).sqrt();
                let freq = counts[t][c] as f64 / n as f64;
                assert!((freq - p).abs() < 4.5 * se, "t={t} c={c} {freq} vs {p}");
            }
        }
    }
}
