//! Multi-objective CMA evolution strategy: `mu` independently evolving
//! single-parent CMA strategies with success-rule step-size control,
//! Pareto-rank plus hypervolume-contribution selection, an external
//! non-dominated archive, front merging across runs, and knee-point
//! extraction.
//!
//! Determinism contract: every parent slot owns a counter-based ChaCha8
//! stream derived from the master seed with SplitMix64, so results do not
//! depend on evaluation order. Offspring success is defined as selection
//! into the next parent set.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Objective vectors are plain `f64` lists; labels travel with the
/// configuration and archives rather than with every vector.
pub type ObjectiveVector = Vec<f64>;

/// RNG stream derivation rule (recorded in run metadata): SplitMix64 of
/// `master XOR k`, where `k` numbers the stream.
pub fn stream_seed(master: u64, k: u64) -> u64 {
    let mut z = master ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Adaptive reference coordinate: 10% beyond the pool maximum, nudged so a
/// point exactly at the maximum still strictly dominates it.
fn adaptive_reference(max: f64) -> f64 {
    max + max.abs() * 0.1 + 1e-12
}

/// `true` iff `f1` strictly Pareto-dominates `f2`: no component worse and
/// at least one strictly better (minimization).
pub fn dominates(f1: &[f64], f2: &[f64]) -> bool {
    assert_eq!(f1.len(), f2.len(), "objective vectors must have equal length");
    let mut strict = false;
    for (a, b) in f1.iter().zip(f2) {
        if a > b {
            return false;
        }
        if a < b {
            strict = true;
        }
    }
    strict
}

/// Pareto ranks: rank 0 holds the minimal elements, rank `k` the minimal
/// elements once ranks `< k` are removed.
pub fn nondominated_sort(points: &[ObjectiveVector]) -> Vec<usize> {
    let n = points.len();
    // Deb-style: count dominators and peel level by level.
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&points[i], &points[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut ranks = vec![0usize; n];
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut rank = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            ranks[i] = rank;
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        current = next;
        rank += 1;
    }
    ranks
}

/// Exact two-objective hypervolume of a mutually non-dominated front with
/// respect to a reference point strictly dominated by every front point.
pub fn hypervolume_2d(front: &[[f64; 2]], reference: [f64; 2]) -> Result<f64> {
    if front.is_empty() {
        return Err(Error::EmptyFront);
    }
    for p in front {
        if !(p[0] < reference[0] && p[1] < reference[1]) {
            return Err(Error::RefNotDominated(reference.to_vec()));
        }
    }
    let mut sorted: Vec<[f64; 2]> = front.to_vec();
    sorted.sort_by(|a, b| b[0].total_cmp(&a[0]).then(b[1].total_cmp(&a[1])));
    let mut hv = 0.0;
    let mut x_next = reference[0];
    for p in &sorted {
        hv += (x_next - p[0]) * (reference[1] - p[1]);
        x_next = p[0];
    }
    Ok(hv)
}

/// Hypervolume contribution of front point `i`: `HV(front) - HV(front \ i)`.
pub fn hv_contribution(front: &[[f64; 2]], reference: [f64; 2], i: usize) -> Result<f64> {
    let total = hypervolume_2d(front, reference)?;
    if front.len() == 1 {
        return Ok(total);
    }
    let rest: Vec<[f64; 2]> = front
        .iter()
        .enumerate()
        .filter_map(|(j, p)| (j != i).then_some(*p))
        .collect();
    Ok(total - hypervolume_2d(&rest, reference)?)
}

/// All contributions in one sort: the contribution of a point on a sorted
/// 2-D front is the rectangle to its two neighbours (reference for the
/// extremes). Duplicate points contribute zero.
fn contributions_2d(front: &[[f64; 2]], reference: [f64; 2]) -> Vec<f64> {
    let n = front.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        front[a][0]
            .total_cmp(&front[b][0])
            .then(front[a][1].total_cmp(&front[b][1]))
    });
    let mut out = vec![0.0; n];
    for (pos, &idx) in order.iter().enumerate() {
        let right_x = if pos + 1 < n { front[order[pos + 1]][0] } else { reference[0] };
        let up_y = if pos > 0 { front[order[pos - 1]][1] } else { reference[1] };
        out[idx] = (right_x - front[idx][0]) * (up_y - front[idx][1]);
    }
    out
}

/// Strategy constants of the success-rule CMA update, published defaults
/// derived from the search-space dimension.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StrategyParams {
    /// Step-size damping `d = 1 + dim/2`.
    pub d: f64,
    /// Target success rate `1/(5 + sqrt(1/2))`.
    pub p_target: f64,
    /// Success-rate smoothing `c_p = p_target/(2 + p_target)`.
    pub c_p: f64,
    /// Evolution-path decay `c_c = 2/(dim + 2)`.
    pub c_c: f64,
    /// Rank-one learning rate `c_cov = 2/(dim^2 + 6)`.
    pub c_cov: f64,
    /// Smoothed success rate above which the path update is suppressed.
    pub p_thresh: f64,
}

impl StrategyParams {
    pub fn defaults(dim: usize) -> Self {
        let p_target = 1.0 / (5.0 + 0.5_f64.sqrt());
        Self {
            d: 1.0 + dim as f64 / 2.0,
            p_target,
            c_p: p_target / (2.0 + p_target),
            c_c: 2.0 / (dim as f64 + 2.0),
            c_cov: 2.0 / ((dim * dim) as f64 + 6.0),
            p_thresh: 0.44,
        }
    }
}

/// One single-parent CMA strategy: search point, step size, covariance,
/// smoothed success rate and evolution path, plus the last evaluation.
#[derive(Debug, Clone)]
pub struct Individual {
    pub x: DVector<f64>,
    pub sigma: f64,
    pub cov: DMatrix<f64>,
    pub p_succ: f64,
    pub path: DVector<f64>,
    pub f: ObjectiveVector,
}

impl Individual {
    fn new(x: DVector<f64>, sigma: f64, p_succ: f64) -> Self {
        let dim = x.len();
        Self {
            x,
            sigma,
            cov: DMatrix::identity(dim, dim),
            p_succ,
            path: DVector::zeros(dim),
            f: Vec::new(),
        }
    }
}

/// An offspring sample: the raw Gaussian draw, its box-repaired value and
/// the squared repair distance (added to each objective as a penalty).
#[derive(Debug, Clone)]
pub struct SampledPoint {
    pub repaired: DVector<f64>,
    pub penalty: f64,
    /// `(repaired - parent)/sigma`, the step used for the covariance update.
    pub step: DVector<f64>,
    /// Set when the covariance factorization failed and was reset.
    pub cov_reset: bool,
}

/// Draws `x' = x + sigma A z` with `A A^T = C` (symmetric square root),
/// repairs it to the box and records the penalty. A non-positive-definite
/// covariance is reset to the identity.
pub fn sample_offspring(
    ind: &mut Individual,
    rng: &mut ChaCha8Rng,
    lower: &[f64],
    upper: &[f64],
) -> SampledPoint {
    let dim = ind.x.len();
    let sym = (&ind.cov + ind.cov.transpose()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut cov_reset = false;
    let root = if eig.eigenvalues.iter().any(|&v| !v.is_finite() || v <= 0.0) {
        ind.cov = DMatrix::identity(dim, dim);
        ind.path = DVector::zeros(dim);
        cov_reset = true;
        DMatrix::identity(dim, dim)
    } else {
        let scaled = DMatrix::from_fn(dim, dim, |r, c| {
            eig.eigenvectors[(r, c)] * eig.eigenvalues[c].sqrt()
        });
        &scaled * eig.eigenvectors.transpose()
    };
    let z = DVector::from_fn(dim, |_, _| standard_normal(rng));
    let raw = &ind.x + (&root * z).scale(ind.sigma);
    let mut repaired = raw.clone();
    let mut penalty = 0.0;
    for i in 0..dim {
        let clamped = repaired[i].clamp(lower[i], upper[i]);
        penalty += (repaired[i] - clamped) * (repaired[i] - clamped);
        repaired[i] = clamped;
    }
    let step = (&repaired - &ind.x).scale(1.0 / ind.sigma);
    SampledPoint { repaired, penalty, step, cov_reset }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    use rand_distr::StandardNormal;
    rng.sample(StandardNormal)
}

/// Smoothed-success and step-size update:
/// `p <- (1-c_p) p + c_p [success]`, `sigma <- sigma exp((p - p_t)/(d (1-p_t)))`.
pub fn update_step_size(ind: &mut Individual, success: bool, params: &StrategyParams) {
    let hit = if success { 1.0 } else { 0.0 };
    ind.p_succ = (1.0 - params.c_p) * ind.p_succ + params.c_p * hit;
    ind.sigma *=
        ((ind.p_succ - params.p_target) / (params.d * (1.0 - params.p_target))).exp();
}

/// Rank-one covariance update applied to a successful offspring. The
/// evolution path absorbs the step unless the smoothed success rate is
/// above `p_thresh`, in which case the path only decays and the lost
/// variance is folded back into the covariance.
pub fn update_covariance(ind: &mut Individual, step: &DVector<f64>, params: &StrategyParams) {
    let c_c = params.c_c;
    if ind.p_succ < params.p_thresh {
        ind.path = ind.path.scale(1.0 - c_c) + step.scale((c_c * (2.0 - c_c)).sqrt());
        ind.cov = ind.cov.scale(1.0 - params.c_cov)
            + (&ind.path * ind.path.transpose()).scale(params.c_cov);
    } else {
        ind.path = ind.path.scale(1.0 - c_c);
        ind.cov = ind.cov.scale(1.0 - params.c_cov)
            + ((&ind.path * ind.path.transpose())
                + ind.cov.scale(c_c * (2.0 - c_c)))
            .scale(params.c_cov);
    }
    // keep the stored covariance exactly symmetric
    ind.cov = (&ind.cov + ind.cov.transpose()).scale(0.5);
}

/// A point of the non-dominated archive: objective values and pre-image.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub x: Vec<f64>,
    pub f: ObjectiveVector,
}

/// Mutually non-dominated set with its objective labels and a reference
/// point strictly dominated by every entry.
#[derive(Debug, Clone)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
    labels: Vec<String>,
    reference_point: Vec<f64>,
}

impl ParetoArchive {
    pub fn new(labels: Vec<String>) -> Self {
        Self { entries: Vec::new(), labels, reference_point: Vec::new() }
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn reference_point(&self) -> &[f64] {
        &self.reference_point
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts if not dominated; drops entries the new point dominates.
    /// Objective-space duplicates collapse to the first pre-image seen.
    /// Returns whether the point was added.
    pub fn insert(&mut self, x: Vec<f64>, f: ObjectiveVector) -> bool {
        if f.iter().any(|v| !v.is_finite()) {
            return false;
        }
        for e in &self.entries {
            if dominates(&e.f, &f) || e.f == f {
                return false;
            }
        }
        self.entries.retain(|e| !dominates(&f, &e.f));
        self.entries.push(ArchiveEntry { x, f });
        self.update_reference();
        true
    }

    fn update_reference(&mut self) {
        if self.entries.is_empty() {
            self.reference_point.clear();
            return;
        }
        let m = self.entries[0].f.len();
        let mut reference = vec![f64::NEG_INFINITY; m];
        for e in &self.entries {
            for (r, v) in reference.iter_mut().zip(&e.f) {
                *r = r.max(*v);
            }
        }
        for r in reference.iter_mut() {
            *r = adaptive_reference(*r);
        }
        self.reference_point = reference;
    }
}

/// Evolution-loop configuration. The decision dimension is fixed by the
/// bounds vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveConfig {
    /// Number of parents (and offspring per generation).
    pub mu: usize,
    pub generations: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Initial global step size.
    pub sigma0: f64,
    /// Weight of the squared box-repair distance added to each objective.
    pub penalty: f64,
    pub labels: Vec<String>,
    /// Optional fixed reference point for the per-generation hypervolume in
    /// the history; when absent an adaptive reference (pool maximum * 1.1)
    /// is used.
    pub reference: Option<[f64; 2]>,
    /// Strategy constants; `None` selects the published defaults for the
    /// dimension at hand.
    pub params: Option<StrategyParams>,
}

impl EvolveConfig {
    pub fn new(mu: usize, generations: usize, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self {
            mu,
            generations,
            lower,
            upper,
            sigma0: 0.6,
            penalty: 1.0,
            labels: vec!["f1".into(), "f2".into()],
            reference: None,
            params: None,
        }
    }

    fn validate(&self) -> Result<usize> {
        if self.mu < 2 {
            return Err(Error::InvalidConfig("population must be at least 2".into()));
        }
        if self.generations == 0 {
            return Err(Error::InvalidConfig("need at least one generation".into()));
        }
        let dim = self.lower.len();
        if dim == 0 || dim != self.upper.len() {
            return Err(Error::InvalidConfig("empty or mismatched box bounds".into()));
        }
        if self
            .lower
            .iter()
            .zip(&self.upper)
            .any(|(l, u)| !l.is_finite() || !u.is_finite() || l >= u)
        {
            return Err(Error::InvalidConfig("box bounds must be finite with lower < upper".into()));
        }
        if !self.sigma0.is_finite() || self.sigma0 <= 0.0 {
            return Err(Error::InvalidConfig("sigma0 must be positive".into()));
        }
        if self.labels.len() != 2 {
            return Err(Error::InvalidConfig("exactly two objectives are supported".into()));
        }
        Ok(dim)
    }
}

/// Per-generation progress record.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStat {
    pub generation: usize,
    pub hypervolume: f64,
    pub best_f1: f64,
    pub best_f2: f64,
}

/// Output of [`evolve`].
#[derive(Debug, Clone)]
pub struct EvolveResult {
    pub population: Vec<Individual>,
    pub archive: ParetoArchive,
    pub history: Vec<GenerationStat>,
    /// Logged irregularities (non-finite objectives, covariance resets).
    pub events: Vec<String>,
}

/// Runs the `mu + mu` evolution loop: each parent produces one offspring,
/// parents and offspring are ranked together by non-dominated sorting with
/// hypervolume contributions breaking ties inside the last accepted rank,
/// and an offspring counts as successful exactly when it is selected into
/// the next parent set. Deterministic for a fixed seed.
pub fn evolve<F>(mut problem: F, config: &EvolveConfig, seed: u64) -> Result<EvolveResult>
where
    F: FnMut(&[f64]) -> ObjectiveVector,
{
    let dim = config.validate()?;
    let params = config.params.unwrap_or_else(|| StrategyParams::defaults(dim));
    let mut events = Vec::new();
    let mut rngs: Vec<ChaCha8Rng> = (0..config.mu)
        .map(|k| ChaCha8Rng::seed_from_u64(stream_seed(seed, k as u64 + 1)))
        .collect();

    let mut archive = ParetoArchive::new(config.labels.clone());
    let mut evaluate = |x: &DVector<f64>, penalty: f64, events: &mut Vec<String>| -> ObjectiveVector {
        let raw = problem(x.as_slice());
        if raw.len() != 2 {
            // surfaced as a config error by the caller on the first call
            return vec![f64::NAN; 2];
        }
        if raw.iter().any(|v| !v.is_finite()) {
            events.push(format!("non-finite objective at x = {:?}", x.as_slice()));
            return vec![f64::INFINITY; 2];
        }
        raw.iter().map(|v| v + config.penalty * penalty).collect()
    };

    // parents, initialized uniformly in the box
    let mut parents: Vec<Individual> = Vec::with_capacity(config.mu);
    for rng in rngs.iter_mut() {
        let x = DVector::from_fn(dim, |i, _| {
            rng.random_range(config.lower[i]..=config.upper[i])
        });
        let mut ind = Individual::new(x, config.sigma0, params.p_target);
        ind.f = evaluate(&ind.x, 0.0, &mut events);
        if ind.f.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidConfig(
                "objective function must return exactly two values".into(),
            ));
        }
        archive.insert(ind.x.as_slice().to_vec(), ind.f.clone());
        parents.push(ind);
    }

    let mut history = Vec::with_capacity(config.generations);
    for generation in 0..config.generations {
        let mut offspring: Vec<Individual> = Vec::with_capacity(config.mu);
        let mut steps: Vec<DVector<f64>> = Vec::with_capacity(config.mu);
        for i in 0..config.mu {
            let sample = sample_offspring(&mut parents[i], &mut rngs[i], &config.lower, &config.upper);
            if sample.cov_reset {
                events.push(format!(
                    "covariance reset to identity (generation {generation}, slot {i})"
                ));
            }
            let mut child = parents[i].clone();
            child.x = sample.repaired;
            child.f = evaluate(&child.x, sample.penalty, &mut events);
            archive.insert(child.x.as_slice().to_vec(), child.f.clone());
            steps.push(sample.step);
            offspring.push(child);
        }

        // rank the pooled parents + offspring
        let pool_f: Vec<ObjectiveVector> = parents
            .iter()
            .chain(offspring.iter())
            .map(|ind| ind.f.clone())
            .collect();
        let selected = select(&pool_f, config.mu);

        // success rule: offspring selected into the next parent set
        for i in 0..config.mu {
            let success = selected.contains(&(config.mu + i));
            update_step_size(&mut parents[i], success, &params);
            update_step_size(&mut offspring[i], success, &params);
            if success {
                update_covariance(&mut offspring[i], &steps[i], &params);
            }
        }

        let pool: Vec<Individual> = parents.into_iter().chain(offspring).collect();
        let mut next: Vec<Individual> = Vec::with_capacity(config.mu);
        for &idx in &selected {
            next.push(pool[idx].clone());
        }
        parents = next;

        history.push(generation_stat(generation, &parents, config.reference));
    }

    Ok(EvolveResult { population: parents, archive, history, events })
}

/// Selects `mu` pool members: whole ranks while they fit, then the largest
/// hypervolume contributors of the first rank that does not. Ties break on
/// pool index, so selection is deterministic.
fn select(pool_f: &[ObjectiveVector], mu: usize) -> Vec<usize> {
    let ranks = nondominated_sort(pool_f);
    let finite: Vec<bool> = pool_f
        .iter()
        .map(|f| f.iter().all(|v| v.is_finite()))
        .collect();
    // adaptive reference: componentwise max over the finite pool * 1.1
    let mut reference = [f64::NEG_INFINITY; 2];
    for (f, ok) in pool_f.iter().zip(&finite) {
        if *ok {
            reference[0] = reference[0].max(f[0]);
            reference[1] = reference[1].max(f[1]);
        }
    }
    reference = [adaptive_reference(reference[0]), adaptive_reference(reference[1])];

    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    let mut selected = Vec::with_capacity(mu);
    for rank in 0..=max_rank {
        // non-finite members sort behind everything regardless of rank
        let members: Vec<usize> = (0..pool_f.len())
            .filter(|&i| ranks[i] == rank && finite[i])
            .collect();
        if members.is_empty() {
            continue;
        }
        if selected.len() + members.len() <= mu {
            selected.extend_from_slice(&members);
        } else {
            let need = mu - selected.len();
            let front: Vec<[f64; 2]> =
                members.iter().map(|&i| [pool_f[i][0], pool_f[i][1]]).collect();
            let contrib = contributions_2d(&front, reference);
            let mut order: Vec<usize> = (0..members.len()).collect();
            order.sort_by(|&a, &b| {
                contrib[b].total_cmp(&contrib[a]).then(members[a].cmp(&members[b]))
            });
            selected.extend(order[..need].iter().map(|&k| members[k]));
        }
        if selected.len() == mu {
            break;
        }
    }
    // pad with non-finite members only when the finite pool is too small
    if selected.len() < mu {
        for i in 0..pool_f.len() {
            if !selected.contains(&i) {
                selected.push(i);
                if selected.len() == mu {
                    break;
                }
            }
        }
    }
    selected.sort_unstable();
    selected
}

fn generation_stat(
    generation: usize,
    parents: &[Individual],
    reference: Option<[f64; 2]>,
) -> GenerationStat {
    let finite: Vec<&Individual> =
        parents.iter().filter(|p| p.f.iter().all(|v| v.is_finite())).collect();
    let best_f1 = finite.iter().map(|p| p.f[0]).fold(f64::INFINITY, f64::min);
    let best_f2 = finite.iter().map(|p| p.f[1]).fold(f64::INFINITY, f64::min);
    let reference = reference.unwrap_or_else(|| {
        let mut r = [f64::NEG_INFINITY; 2];
        for p in &finite {
            r[0] = r[0].max(p.f[0]);
            r[1] = r[1].max(p.f[1]);
        }
        [adaptive_reference(r[0]), adaptive_reference(r[1])]
    });
    // hypervolume of the non-dominated parents that dominate the reference
    let fs: Vec<ObjectiveVector> = finite.iter().map(|p| p.f.clone()).collect();
    let ranks = nondominated_sort(&fs);
    let front: Vec<[f64; 2]> = fs
        .iter()
        .zip(&ranks)
        .filter(|(f, &r)| r == 0 && f[0] < reference[0] && f[1] < reference[1])
        .map(|(f, _)| [f[0], f[1]])
        .collect();
    let hypervolume = hypervolume_2d(&front, reference).unwrap_or(0.0);
    GenerationStat { generation, hypervolume, best_f1, best_f2 }
}

/// Pools archives from independent runs and keeps the mutually
/// non-dominated, deduplicated subset.
pub fn merge_fronts(archives: &[ParetoArchive]) -> Result<ParetoArchive> {
    let first = archives.first().ok_or(Error::EmptyFront)?;
    for other in &archives[1..] {
        if other.labels != first.labels {
            return Err(Error::MixedLabels(first.labels.clone(), other.labels.clone()));
        }
    }
    let dim = archives
        .iter()
        .flat_map(|a| a.entries.first())
        .map(|e| e.x.len())
        .next();
    let mut merged = ParetoArchive::new(first.labels.clone());
    for archive in archives {
        for e in &archive.entries {
            if Some(e.x.len()) != dim {
                return Err(Error::InvalidConfig(
                    "fronts have inconsistent decision dimensions".into(),
                ));
            }
            merged.insert(e.x.clone(), e.f.clone());
        }
    }
    Ok(merged)
}

/// Among entries with `f1 < threshold`, the one minimizing `f2`.
pub fn knee_point(entries: &[ArchiveEntry], threshold_f1: f64) -> Result<&ArchiveEntry> {
    if entries.is_empty() {
        return Err(Error::EmptyFront);
    }
    entries
        .iter()
        .filter(|e| e.f[0] < threshold_f1)
        .min_by(|a, b| a.f[1].total_cmp(&b.f[1]).then(a.f[0].total_cmp(&b.f[0])))
        .ok_or(Error::ThresholdTooStrict(threshold_f1))
}

/// Writes a front CSV: `# schema=1`, header `label1,label2,x1..xd`, one row
/// per entry sorted by the first objective.
pub fn write_front_csv<W: Write>(archive: &ParetoArchive, w: &mut W) -> Result<()> {
    writeln!(w, "# schema=1")?;
    let dim = archive.entries.first().map_or(0, |e| e.x.len());
    let mut columns: Vec<String> = archive.labels.clone();
    columns.extend((1..=dim).map(|i| format!("x{i}")));
    writeln!(w, "{}", columns.join(","))?;
    let mut rows: Vec<&ArchiveEntry> = archive.entries.iter().collect();
    rows.sort_by(|a, b| a.f[0].total_cmp(&b.f[0]).then(a.f[1].total_cmp(&b.f[1])));
    for e in rows {
        let fields: Vec<String> =
            e.f.iter().chain(e.x.iter()).map(|v| v.to_string()).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Reads a front CSV written by [`write_front_csv`].
pub fn read_front_csv<R: BufRead>(r: R) -> Result<ParetoArchive> {
    let mut lines = r.lines();
    let mut header: Option<String> = None;
    for line in lines.by_ref() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        header = Some(line);
        break;
    }
    let header = header.ok_or_else(|| Error::MalformedFront("missing header".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 2 {
        return Err(Error::MalformedFront(format!("header has {} columns", columns.len())));
    }
    let labels: Vec<String> = columns[..2].iter().map(|s| s.to_string()).collect();
    let mut archive = ParetoArchive::new(labels);
    for line in lines {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let values: std::result::Result<Vec<f64>, _> =
            line.split(',').map(str::parse::<f64>).collect();
        let values =
            values.map_err(|e| Error::MalformedFront(format!("bad row {line:?}: {e}")))?;
        if values.len() != columns.len() {
            return Err(Error::MalformedFront(format!(
                "row has {} fields, header has {}",
                values.len(),
                columns.len()
            )));
        }
        archive.insert(values[2..].to_vec(), values[..2].to_vec());
    }
    Ok(archive)
}

/// Writes the run history CSV: `generation,hypervolume,best_f1,best_f2`.
pub fn write_history_csv<W: Write>(history: &[GenerationStat], w: &mut W) -> Result<()> {
    writeln!(w, "# schema=1")?;
    writeln!(w, "generation,hypervolume,best_f1,best_f2")?;
    for h in history {
        writeln!(w, "{},{},{},{}", h.generation, h.hypervolume, h.best_f1, h.best_f2)?;
    }
    Ok(())
}
