//! Seeded Monte Carlo simulation of `Z_n = X_1 ... X_n`.
//!
//! Trial `t` draws its steps from `ChaCha8Rng::seed_from_u64(seed)` with the
//! stream set to `t`, so every trial is a fixed function of `(seed, t)`.
//! Batches of trials run in parallel and are merged by integer addition,
//! which makes the statistics independent of scheduling.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::WalkMeasure;
use crate::error::{Error, Result};
use crate::group::{
    push_letter, Element, Family, Letter, MarkedGroup, WordMetric, DEFAULT_BALL_BUDGET,
};
use crate::subgroup::{Coset, CosetKey, SubgroupOracle};

const BATCH: u64 = 4096;

#[derive(Clone, Debug)]
pub struct WalkConfig {
    pub n_max: usize,
    pub trials: u64,
    pub seed: u64,
    /// recorded in addition to `0, 1, 2, 4, ..., n_max`
    pub extra_checkpoints: Vec<usize>,
    /// cosets whose hit counts are recorded at every checkpoint
    pub tracked: Vec<Coset>,
    /// also record distance sums at every `n`
    pub dense: bool,
    /// size cap for the distance table of groups without a closed form
    pub metric_budget: usize,
}

impl WalkConfig {
    pub fn new(n_max: usize, trials: u64, seed: u64) -> Self {
        WalkConfig {
            n_max,
            trials,
            seed,
            extra_checkpoints: Vec::new(),
            tracked: Vec::new(),
            dense: false,
            metric_budget: DEFAULT_BALL_BUDGET,
        }
    }
}

/// `{0} ∪ {2^k <= n_max} ∪ {n_max} ∪ extra`, sorted.
pub fn checkpoints(n_max: usize, extra: &[usize]) -> Vec<usize> {
    let mut v = vec![0, n_max];
    let mut p = 1;
    while p <= n_max {
        v.push(p);
        p *= 2;
    }
    v.extend(extra.iter().copied().filter(|&n| n <= n_max));
    v.sort_unstable();
    v.dedup();
    v
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckpointStats {
    pub n: usize,
    /// `histogram[k]` trials with `|Z_n|_S = k`
    pub histogram: Vec<u64>,
    pub distance_sum: u128,
    pub distance_sq_sum: u128,
    /// aligned with the tracked cosets
    pub hits: Vec<u64>,
}

impl CheckpointStats {
    fn empty(n: usize, tracked: usize) -> Self {
        CheckpointStats {
            n,
            histogram: Vec::new(),
            distance_sum: 0,
            distance_sq_sum: 0,
            hits: vec![0; tracked],
        }
    }

    fn merge(&mut self, other: &CheckpointStats) {
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        self.distance_sum += other.distance_sum;
        self.distance_sq_sum += other.distance_sq_sum;
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
    }

    /// Trials with `|Z_n|_S <= radius`.
    pub fn within(&self, radius: u64) -> u64 {
        self.histogram.iter().take(radius as usize + 1).sum()
    }
}

/// Sum and sum of squares of `|Z_n|_S` over trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Moments {
    pub sum: u128,
    pub sq_sum: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkStats {
    pub group: String,
    pub measure: String,
    pub trials: u64,
    pub seed: u64,
    pub checkpoints: Vec<CheckpointStats>,
    pub tracked: Vec<String>,
    /// per-`n` moments for `n = 0..=n_max`, when requested
    pub dense: Option<Vec<Moments>>,
}

impl WalkStats {
    pub fn at(&self, n: usize) -> Option<&CheckpointStats> {
        self.checkpoints.iter().find(|c| c.n == n)
    }

    fn moments(&self, n: usize) -> Option<Moments> {
        if let Some(c) = self.at(n) {
            return Some(Moments {
                sum: c.distance_sum,
                sq_sum: c.distance_sq_sum,
            });
        }
        self.dense.as_ref().and_then(|d| d.get(n).copied())
    }

    /// `L̂_S(n)`, the exact sample mean of `|Z_n|_S`.
    pub fn speed(&self, n: usize) -> Option<BigRational> {
        self.moments(n)
            .map(|m| BigRational::new(BigInt::from(m.sum), BigInt::from(self.trials)))
    }

    /// Standard error of `L̂_S(n)`.
    pub fn std_error(&self, n: usize) -> Option<f64> {
        self.moments(n).map(|m| {
            let t = self.trials as f64;
            let mean = m.sum as f64 / t;
            let var = (m.sq_sum as f64 / t - mean * mean).max(0.0);
            (var / t).sqrt()
        })
    }

    pub fn hit_frequency(&self, n: usize, tracked: usize) -> Option<f64> {
        self.at(n)
            .map(|c| c.hits[tracked] as f64 / self.trials as f64)
    }
}

/// Draws support indices with probabilities `weights / D`.
#[derive(Clone, Debug)]
enum Sampler {
    /// `D = 2^bits`: consume `bits` random bits per draw
    Bits {
        bits: u32,
        table: Vec<u16>,
    },
    Table {
        d: u64,
        table: Vec<u16>,
    },
    Cumulative {
        d: u64,
        cum: Vec<u64>,
    },
}

impl Sampler {
    fn new(mu: &WalkMeasure) -> Self {
        let d = mu.denominator();
        let expand = || {
            let mut table = Vec::with_capacity(d as usize);
            for (i, &w) in mu.weights().iter().enumerate() {
                table.extend(std::iter::repeat_n(i as u16, w as usize));
            }
            table
        };
        if d.is_power_of_two() && d <= 1 << 16 {
            Sampler::Bits {
                bits: d.trailing_zeros(),
                table: expand(),
            }
        } else if d <= 1 << 16 {
            Sampler::Table { d, table: expand() }
        } else {
            let cum = mu
                .weights()
                .iter()
                .scan(0u64, |acc, &w| {
                    *acc += w;
                    Some(*acc)
                })
                .collect();
            Sampler::Cumulative { d, cum }
        }
    }
}

struct Draw {
    rng: ChaCha8Rng,
    buf: u64,
    left: u32,
}

impl Draw {
    fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Draw {
            rng,
            buf: 0,
            left: 0,
        }
    }

    #[inline]
    fn next(&mut self, s: &Sampler) -> usize {
        match s {
            Sampler::Bits { bits: 0, .. } => 0,
            Sampler::Bits { bits, table } => {
                if self.left < *bits {
                    self.buf = self.rng.next_u64();
                    self.left = 64;
                }
                let v = self.buf & ((1u64 << bits) - 1);
                self.buf >>= bits;
                self.left -= bits;
                table[v as usize] as usize
            }
            Sampler::Table { d, table } => table[self.rng.random_range(0..*d) as usize] as usize,
            Sampler::Cumulative { d, cum } => {
                let u = self.rng.random_range(0..*d);
                cum.partition_point(|&c| c <= u)
            }
        }
    }
}

/// Fast state representations for the families with cheap products.
trait Walker: Sync {
    type State: Clone;
    fn start(&self) -> Self::State;
    fn step(&self, s: &mut Self::State, i: usize);
    fn distance(&self, s: &Self::State) -> u64;
    fn element(&self, s: &Self::State) -> Element;
}

fn table_distance(metric: &WordMetric, g: &Element) -> u64 {
    metric
        .distance(g)
        .unwrap_or_else(|| panic!("{g} lies outside the distance table"))
}

struct ZWalker<const D: usize> {
    steps: Vec<[i64; D]>,
    metric: WordMetric,
    closed: bool,
}

impl<const D: usize> Walker for ZWalker<D> {
    type State = [i64; D];
    fn start(&self) -> [i64; D] {
        [0; D]
    }
    #[inline]
    fn step(&self, s: &mut [i64; D], i: usize) {
        for (x, y) in s.iter_mut().zip(&self.steps[i]) {
            *x += y;
        }
    }
    #[inline]
    fn distance(&self, s: &[i64; D]) -> u64 {
        if self.closed {
            s.iter().map(|x| x.unsigned_abs()).sum()
        } else {
            table_distance(&self.metric, &self.element(s))
        }
    }
    fn element(&self, s: &[i64; D]) -> Element {
        Element::Vector(s.to_vec())
    }
}

struct HeisenbergWalker {
    steps: Vec<[i64; 3]>,
    metric: WordMetric,
}

impl Walker for HeisenbergWalker {
    type State = [i64; 3];
    fn start(&self) -> [i64; 3] {
        [0; 3]
    }
    #[inline]
    fn step(&self, x: &mut [i64; 3], i: usize) {
        let y = &self.steps[i];
        x[2] += y[2] - y[0] * x[1];
        x[0] += y[0];
        x[1] += y[1];
    }
    fn distance(&self, s: &[i64; 3]) -> u64 {
        table_distance(&self.metric, &self.element(s))
    }
    fn element(&self, s: &[i64; 3]) -> Element {
        Element::Heisenberg(*s)
    }
}

struct FreeWalker {
    steps: Vec<Vec<Letter>>,
    metric: WordMetric,
    closed: bool,
}

impl Walker for FreeWalker {
    type State = Vec<Letter>;
    fn start(&self) -> Vec<Letter> {
        Vec::new()
    }
    #[inline]
    fn step(&self, s: &mut Vec<Letter>, i: usize) {
        for &l in &self.steps[i] {
            push_letter(s, l);
        }
    }
    fn distance(&self, s: &Vec<Letter>) -> u64 {
        if self.closed {
            s.len() as u64
        } else {
            table_distance(&self.metric, &self.element(s))
        }
    }
    fn element(&self, s: &Vec<Letter>) -> Element {
        Element::Word(s.clone())
    }
}

struct GenericWalker {
    family: Family,
    steps: Vec<Element>,
    metric: WordMetric,
}

impl Walker for GenericWalker {
    type State = Element;
    fn start(&self) -> Element {
        self.family.identity()
    }
    fn step(&self, s: &mut Element, i: usize) {
        self.family.mul_assign(s, &self.steps[i]);
    }
    fn distance(&self, s: &Element) -> u64 {
        table_distance(&self.metric, s)
    }
    fn element(&self, s: &Element) -> Element {
        s.clone()
    }
}

#[derive(Clone)]
struct Partial {
    checkpoints: Vec<CheckpointStats>,
    dense: Vec<Moments>,
}

impl Partial {
    fn merge(mut self, other: Partial) -> Partial {
        for (a, b) in self.checkpoints.iter_mut().zip(&other.checkpoints) {
            a.merge(b);
        }
        for (a, b) in self.dense.iter_mut().zip(&other.dense) {
            a.sum += b.sum;
            a.sq_sum += b.sq_sum;
        }
        self
    }
}

struct Job<'a> {
    sampler: Sampler,
    cps: Vec<usize>,
    tracked: Vec<(&'a SubgroupOracle, CosetKey)>,
    cfg: &'a WalkConfig,
}

impl Job<'_> {
    fn empty(&self) -> Partial {
        Partial {
            checkpoints: self
                .cps
                .iter()
                .map(|&n| CheckpointStats::empty(n, self.tracked.len()))
                .collect(),
            dense: if self.cfg.dense {
                vec![Moments::default(); self.cfg.n_max + 1]
            } else {
                Vec::new()
            },
        }
    }

    fn record<W: Walker>(&self, w: &W, s: &W::State, cp: &mut CheckpointStats) {
        let d = w.distance(s);
        if cp.histogram.len() <= d as usize {
            cp.histogram.resize(d as usize + 1, 0);
        }
        cp.histogram[d as usize] += 1;
        cp.distance_sum += d as u128;
        cp.distance_sq_sum += (d as u128) * (d as u128);
        if !self.tracked.is_empty() {
            let g = w.element(s);
            for (i, (h, key)) in self.tracked.iter().enumerate() {
                if h.key_unchecked(&g) == *key {
                    cp.hits[i] += 1;
                }
            }
        }
    }

    fn batch<W: Walker>(&self, w: &W, trials: std::ops::Range<u64>) -> Partial {
        // resolve the sampler once so the step loop is monomorphic
        match &self.sampler {
            Sampler::Bits { bits: 0, .. } => self.batch_with(w, trials, |_| 0),
            Sampler::Bits { bits, table } => {
                let (bits, mask) = (*bits, (1u64 << bits) - 1);
                self.batch_with(w, trials, |d: &mut Draw| {
                    if d.left < bits {
                        d.buf = d.rng.next_u64();
                        d.left = 64;
                    }
                    let v = d.buf & mask;
                    d.buf >>= bits;
                    d.left -= bits;
                    table[v as usize] as usize
                })
            }
            s => self.batch_with(w, trials, |d: &mut Draw| d.next(s)),
        }
    }

    fn batch_with<W: Walker, F: Fn(&mut Draw) -> usize>(
        &self,
        w: &W,
        trials: std::ops::Range<u64>,
        draw_index: F,
    ) -> Partial {
        let mut out = self.empty();
        let n_max = self.cfg.n_max;
        for t in trials {
            let mut draw = Draw::new(self.cfg.seed, t);
            let mut s = w.start();
            if self.cfg.dense {
                for n in 0..=n_max {
                    if n > 0 {
                        w.step(&mut s, draw_index(&mut draw));
                    }
                    let d = w.distance(&s) as u128;
                    out.dense[n].sum += d;
                    out.dense[n].sq_sum += d * d;
                    if let Ok(k) = self.cps.binary_search(&n) {
                        self.record(w, &s, &mut out.checkpoints[k]);
                    }
                }
                continue;
            }
            let mut n = 0;
            for (k, &cp) in self.cps.iter().enumerate() {
                while n < cp {
                    w.step(&mut s, draw_index(&mut draw));
                    n += 1;
                }
                self.record(w, &s, &mut out.checkpoints[k]);
            }
        }
        out
    }

    fn run<W: Walker>(&self, w: &W) -> Partial {
        let trials = self.cfg.trials;
        let batches = trials.div_ceil(BATCH);
        (0..batches)
            .into_par_iter()
            .map(|b| self.batch(w, b * BATCH..((b + 1) * BATCH).min(trials)))
            .reduce(|| self.empty(), Partial::merge)
    }
}

/// Runs `cfg.trials` independent walks of length `cfg.n_max`.
pub fn simulate_walk(group: &MarkedGroup, mu: &WalkMeasure, cfg: &WalkConfig) -> Result<WalkStats> {
    if cfg.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let family = group.family();
    for c in &cfg.tracked {
        if c.subgroup.family() != family {
            return Err(Error::invalid(format!(
                "tracked coset of {} is not in {family}",
                c.subgroup.name()
            )));
        }
    }
    let tracked = cfg
        .tracked
        .iter()
        .map(|c| Ok((&*c.subgroup, c.key()?)))
        .collect::<Result<Vec<_>>>()?;
    let job = Job {
        sampler: Sampler::new(mu),
        cps: checkpoints(cfg.n_max, &cfg.extra_checkpoints),
        tracked,
        cfg,
    };
    // every Z_n lies in B_{n * max |supp|}; the table must reach that far
    let reach = {
        let probe = WordMetric::new(group, 1, cfg.metric_budget)?;
        match probe {
            WordMetric::Closed(_) => 1,
            WordMetric::Table { .. } => {
                let mut m = 0;
                for (g, _) in mu.support() {
                    m = m.max(crate::group::word_length_with_budget(
                        group,
                        g,
                        cfg.metric_budget,
                    )?);
                }
                m
            }
        }
    };
    let metric = WordMetric::new(group, cfg.n_max * reach, cfg.metric_budget)?;
    let closed = matches!(metric, WordMetric::Closed(_));
    let steps: Vec<&Element> = mu.support().iter().map(|(g, _)| g).collect();
    let partial = match family {
        Family::FreeAbelian { rank } => {
            fn z<const D: usize>(
                job: &Job,
                steps: &[&Element],
                metric: WordMetric,
                closed: bool,
            ) -> Partial {
                let steps = steps
                    .iter()
                    .map(|g| <[i64; D]>::try_from(g.as_vector().expect("vector")).expect("rank"))
                    .collect();
                job.run(&ZWalker::<D> {
                    steps,
                    metric,
                    closed,
                })
            }
            match rank {
                1 => z::<1>(&job, &steps, metric, closed),
                2 => z::<2>(&job, &steps, metric, closed),
                3 => z::<3>(&job, &steps, metric, closed),
                4 => z::<4>(&job, &steps, metric, closed),
                5 => z::<5>(&job, &steps, metric, closed),
                _ => z::<6>(&job, &steps, metric, closed),
            }
        }
        Family::Heisenberg => job.run(&HeisenbergWalker {
            steps: steps
                .iter()
                .map(|g| match g {
                    Element::Heisenberg(x) => *x,
                    _ => unreachable!("checked family"),
                })
                .collect(),
            metric,
        }),
        Family::Free { .. } => job.run(&FreeWalker {
            steps: steps
                .iter()
                .map(|g| g.as_word().expect("word").to_vec())
                .collect(),
            metric,
            closed,
        }),
        _ => job.run(&GenericWalker {
            family,
            steps: steps.into_iter().cloned().collect(),
            metric,
        }),
    };
    Ok(WalkStats {
        group: group.name(),
        measure: mu.id().to_string(),
        trials: cfg.trials,
        seed: cfg.seed,
        checkpoints: partial.checkpoints,
        tracked: cfg
            .tracked
            .iter()
            .map(|c| format!("{}*{}", c.subgroup.name(), c.rep))
            .collect(),
        dense: cfg.dense.then_some(partial.dense),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn zero_steps_stay_at_identity() {
        let g = MarkedGroup::from_registry("heisenberg").unwrap();
        let mu = WalkMeasure::uniform(&g).unwrap();
        let s = simulate_walk(&g, &mu, &WalkConfig::new(0, 50, 1)).unwrap();
        assert_eq!(s.at(0).unwrap().histogram, vec![50]);
    }

    #[test]
    fn histograms_sum_to_trials_and_stay_in_ball() {
        for name in ["Z^2", "free:2", "heisenberg", "lamplighter:2"] {
            let g = MarkedGroup::from_registry(name).unwrap();
            let mu = WalkMeasure::lazy(&g).unwrap();
            let s = simulate_walk(&g, &mu, &WalkConfig::new(8, 5000, 3)).unwrap();
            for c in &s.checkpoints {
                assert_eq!(c.histogram.iter().sum::<u64>(), 5000, "{name}");
                assert!(c.histogram.len() <= c.n + 1, "{name}");
            }
        }
    }

    #[test]
    fn fast_states_match_generic_products() {
        let g = MarkedGroup::from_registry("heisenberg").unwrap();
        let family = g.family();
        let mu = WalkMeasure::uniform(&g).unwrap();
        let sampler = Sampler::new(&mu);
        let fast = HeisenbergWalker {
            steps: mu
                .support()
                .iter()
                .map(|(e, _)| match e {
                    Element::Heisenberg(x) => *x,
                    _ => unreachable!(),
                })
                .collect(),
            metric: WordMetric::new(&g, 1, 100).unwrap(),
        };
        let mut draw = Draw::new(9, 0);
        let mut s = fast.start();
        let mut slow = family.identity();
        for _ in 0..200 {
            let i = draw.next(&sampler);
            fast.step(&mut s, i);
            family.mul_assign(&mut slow, &mu.support()[i].0);
        }
        assert_eq!(fast.element(&s), slow);
    }

    #[test]
    fn deterministic_under_thread_counts() {
        let g = MarkedGroup::from_registry("free:2").unwrap();
        let mu = WalkMeasure::uniform(&g).unwrap();
        let h = Arc::new(SubgroupOracle::parse(g.family(), "freegens:[a]").unwrap());
        let mut cfg = WalkConfig::new(20, 10_000, 42);
        cfg.tracked.push(Coset::new(h, g.identity()));
        cfg.dense = true;
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_walk(&g, &mu, &cfg).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn non_dyadic_denominators() {
        let g = MarkedGroup::from_registry("Z").unwrap();
        let mu = WalkMeasure::lazy(&g).unwrap();
        let s = simulate_walk(&g, &mu, &WalkConfig::new(1, 30_000, 5)).unwrap();
        let stay = s.at(1).unwrap().histogram[0] as f64 / 30_000.0;
        assert!((stay - 1.0 / 3.0).abs() < 0.02);
    }
}
