//! NSGA-II search and exhaustive enumeration over macro shapes.
//!
//! A genome encodes the free shape parameters as exponents and a divisor
//! index; the column count is derived from the capacity equality and a
//! repair walk keeps every individual feasible. Selection is binary
//! tournament on (rank, crowding), variation is uniform crossover plus
//! per-gene uniform reset mutation, survival is (mu + lambda) truncation,
//! and an unbounded external archive accumulates every non-dominated point
//! ever evaluated. Every stochastic decision draws from one sequential
//! [`SplitMix64`] stream, so a seed fixes the whole run; cost evaluation
//! draws nothing and may be parallelized freely by the caller.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use super::pareto::{crowding_distance, dominates, fast_nondominated_sort};
use super::rng::SplitMix64;
use super::{divisors, DcimSpec};
use crate::costmodel::{macro_cost, Arch, CostVector, DesignPoint};
use crate::techlib::TechLibrary;

pub const DEFAULT_GRID_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum DseError {
    InvalidSpec(&'static str),
    InvalidParams(&'static str),
    /// The bounds admit no design at all; carries the violated envelope.
    NoFeasibleDesign {
        weight_capacity: u64,
        weight_bits: u32,
        height_max: u32,
        share_max: u32,
        columns_min_exclusive: u32,
    },
    /// The enumeration lattice exceeds the configured cap.
    GridCapExceeded { grid: u64, cap: u64 },
}

impl fmt::Display for DseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DseError::InvalidSpec(what) => write!(f, "invalid exploration spec: {what}"),
            DseError::InvalidParams(what) => write!(f, "invalid search parameters: {what}"),
            DseError::NoFeasibleDesign {
                weight_capacity,
                weight_bits,
                height_max,
                share_max,
                columns_min_exclusive,
            } => write!(
                f,
                "no feasible design: capacity {weight_capacity} x {weight_bits}b within \
                 height <= {height_max}, share <= {share_max}, columns > {columns_min_exclusive}"
            ),
            DseError::GridCapExceeded { grid, cap } => {
                write!(f, "enumeration grid of {grid} points exceeds cap {cap}")
            }
        }
    }
}

impl core::error::Error for DseError {}

/// Search genome: shape exponents plus an index into the divisors of the
/// input width.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Genome {
    pub height_exp: u32,
    pub share_exp: u32,
    pub slice_idx: u32,
}

/// NSGA-II parameters.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct GaParams {
    /// Population size; even, at least 4.
    pub population: u32,
    pub generations: u32,
    /// Probability that a parent pair is crossed at all.
    pub crossover_prob: f64,
    /// Per-gene reset probability.
    pub mutation_prob: f64,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 100,
            generations: 100,
            crossover_prob: 0.9,
            mutation_prob: 0.2,
            seed: 0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), DseError> {
        if self.population < 4 || !self.population.is_multiple_of(2) {
            return Err(DseError::InvalidParams("population must be even and at least 4"));
        }
        if self.generations == 0 {
            return Err(DseError::InvalidParams("generation count must be at least 1"));
        }
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(self.crossover_prob) || !unit(self.mutation_prob) {
            return Err(DseError::InvalidParams("probabilities must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Batch cost evaluation. Implementations must be pure functions of the
/// design points and must return results in input order; under those rules
/// parallel implementations cannot perturb the search.
pub trait CostEvaluator {
    fn evaluate(&self, points: &[DesignPoint]) -> Vec<CostVector>;
}

/// In-process sequential evaluator.
pub struct SequentialEvaluator<'a> {
    pub lib: &'a TechLibrary,
    pub activity: f64,
}

impl CostEvaluator for SequentialEvaluator<'_> {
    fn evaluate(&self, points: &[DesignPoint]) -> Vec<CostVector> {
        points
            .iter()
            .map(|dp| {
                macro_cost(self.lib, dp)
                    .expect("search candidates are repaired to validity")
                    .objectives(self.activity)
            })
            .collect()
    }
}

/// One archived design with its objectives.
#[derive(Clone, PartialEq, Debug)]
pub struct ArchiveEntry {
    pub dp: DesignPoint,
    pub cost: CostVector,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct ArchiveMeta {
    pub spec_hash: u64,
    pub seed: u64,
    pub generations: u32,
}

/// Unbounded non-dominated store with a canonical total order.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
    pub meta: ArchiveMeta,
}

/// Canonical total order over archived designs: objectives first
/// (throughput descending), then the shape, so equal-cost designs appear in
/// a fixed order and ties anywhere break deterministically.
pub fn canonical_cmp(a: &ArchiveEntry, b: &ArchiveEntry) -> Ordering {
    let ka = a.cost.as_min_objectives();
    let kb = b.cost.as_min_objectives();
    for i in 0..4 {
        match ka[i].total_cmp(&kb[i]) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    let sa = (a.dp.columns, a.dp.column_height, a.dp.weights_per_unit, a.dp.bits_per_cycle);
    let sb = (b.dp.columns, b.dp.column_height, b.dp.weights_per_unit, b.dp.bits_per_cycle);
    sa.cmp(&sb).then(a.dp.cmp(&b.dp))
}

impl ParetoArchive {
    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn costs(&self) -> Vec<CostVector> {
        self.entries.iter().map(|e| e.cost).collect()
    }

    /// Inserts one design, keeping the no-entry-dominates-another invariant
    /// and dropping duplicate designs.
    pub fn insert(&mut self, dp: DesignPoint, cost: CostVector) {
        if self.entries.iter().any(|e| e.dp == dp || dominates(&e.cost, &cost)) {
            return;
        }
        self.entries.retain(|e| !dominates(&cost, &e.cost));
        let entry = ArchiveEntry { dp, cost };
        let at = self
            .entries
            .partition_point(|e| canonical_cmp(e, &entry) == Ordering::Less);
        self.entries.insert(at, entry);
    }
}

/// Derives the column count from the capacity equality and checks every
/// bound. Returns the feasible design point, or `None`.
fn try_point(
    spec: &DcimSpec,
    arch: Arch,
    height_exp: u32,
    share_exp: u32,
    slice: u32,
) -> Option<DesignPoint> {
    let height = 1u64 << height_exp;
    let share = 1u64 << share_exp;
    let wb = u64::from(spec.precision.weight_bits());
    let total_bits = spec.weight_capacity.checked_mul(wb)?;
    if total_bits % (height * share) != 0 {
        return None;
    }
    let columns = total_bits / (height * share);
    if !columns.is_multiple_of(wb) || columns <= u64::from(spec.columns_min_exclusive) {
        return None;
    }
    let columns: u32 = columns.try_into().ok()?;
    let dp = match arch {
        Arch::IntMultiply => DesignPoint::int(
            columns,
            height as u32,
            share as u32,
            slice,
            spec.precision.weight_bits(),
            spec.precision.input_bits(),
        ),
        Arch::FpPrealigned => {
            let (be, bm) = spec.precision.float_widths()?;
            DesignPoint::fp(columns, height as u32, share as u32, slice, be, bm)
        }
    };
    dp.validate().ok()?;
    debug_assert_eq!(dp.weight_capacity(), spec.weight_capacity);
    Some(dp)
}

/// Repairs a genome to a feasible design point: if the encoded shape
/// violates the column-count constraints, walk the height exponent down one
/// step at a time (shrinking the array makes more, wider columns), then the
/// share exponent, and return the first feasible shape. `None` when the walk
/// exhausts the lattice.
pub fn repair_to_feasible(spec: &DcimSpec, arch: Arch, genome: &Genome) -> Option<DesignPoint> {
    let slices = divisors(spec.precision.input_bits());
    let slice = slices[genome.slice_idx as usize];
    for share_exp in (0..=genome.share_exp).rev() {
        for height_exp in (1..=genome.height_exp).rev() {
            if let Some(dp) = try_point(spec, arch, height_exp, share_exp, slice) {
                return Some(dp);
            }
        }
    }
    None
}

struct SearchSpace {
    height_exp_max: u32,
    share_exp_max: u32,
    slices: Vec<u32>,
    /// Directly feasible (height_exp, share_exp) pairs, for resampling when
    /// the repair walk dead-ends.
    feasible_pairs: Vec<(u32, u32)>,
}

impl SearchSpace {
    fn build(spec: &DcimSpec, arch: Arch) -> Result<SearchSpace, DseError> {
        let height_exp_max = spec.height_max.ilog2();
        let share_exp_max = spec.share_max.ilog2();
        let slices = divisors(spec.precision.input_bits());
        let mut feasible_pairs = Vec::new();
        for h in 1..=height_exp_max {
            for l in 0..=share_exp_max {
                if try_point(spec, arch, h, l, slices[0]).is_some() {
                    feasible_pairs.push((h, l));
                }
            }
        }
        if feasible_pairs.is_empty() {
            return Err(DseError::NoFeasibleDesign {
                weight_capacity: spec.weight_capacity,
                weight_bits: spec.precision.weight_bits(),
                height_max: spec.height_max,
                share_max: spec.share_max,
                columns_min_exclusive: spec.columns_min_exclusive,
            });
        }
        Ok(SearchSpace {
            height_exp_max,
            share_exp_max,
            slices,
            feasible_pairs,
        })
    }

    fn sample_genome(&self, rng: &mut SplitMix64) -> Genome {
        Genome {
            height_exp: 1 + rng.below(u64::from(self.height_exp_max)) as u32,
            share_exp: rng.below(u64::from(self.share_exp_max) + 1) as u32,
            slice_idx: rng.below(self.slices.len() as u64) as u32,
        }
    }

    /// Repair, falling back to a uniformly drawn feasible shape (keeping the
    /// genome's slice gene) so the population never carries an infeasible
    /// individual.
    fn materialize(
        &self,
        spec: &DcimSpec,
        arch: Arch,
        genome: Genome,
        rng: &mut SplitMix64,
    ) -> (Genome, DesignPoint) {
        if let Some(dp) = repair_to_feasible(spec, arch, &genome) {
            let repaired = Genome {
                height_exp: dp.column_height.ilog2(),
                share_exp: dp.weights_per_unit.ilog2(),
                slice_idx: genome.slice_idx,
            };
            return (repaired, dp);
        }
        let pick = rng.below(self.feasible_pairs.len() as u64) as usize;
        let (h, l) = self.feasible_pairs[pick];
        let genome = Genome {
            height_exp: h,
            share_exp: l,
            slice_idx: genome.slice_idx,
        };
        let dp = try_point(spec, arch, h, l, self.slices[genome.slice_idx as usize])
            .expect("feasible pairs admit every slice width");
        (genome, dp)
    }
}

#[derive(Clone)]
struct Individual {
    genome: Genome,
    dp: DesignPoint,
    cost: CostVector,
}

fn entry(ind: &Individual) -> ArchiveEntry {
    ArchiveEntry { dp: ind.dp, cost: ind.cost }
}

// Rank and crowding for tournament selection, recomputed on each surviving
// population.
fn rank_and_crowd(pop: &[Individual]) -> (Vec<usize>, Vec<f64>) {
    let costs: Vec<CostVector> = pop.iter().map(|i| i.cost).collect();
    let fronts = fast_nondominated_sort(&costs);
    let mut rank = alloc::vec![0usize; pop.len()];
    let mut crowd = alloc::vec![0.0f64; pop.len()];
    for (r, front) in fronts.iter().enumerate() {
        let front_costs: Vec<CostVector> = front.iter().map(|&i| costs[i]).collect();
        let d = crowding_distance(&front_costs);
        for (slot, &i) in front.iter().enumerate() {
            rank[i] = r;
            crowd[i] = d[slot];
        }
    }
    (rank, crowd)
}

fn better(
    pop: &[Individual],
    rank: &[usize],
    crowd: &[f64],
    a: usize,
    b: usize,
) -> usize {
    match rank[a].cmp(&rank[b]) {
        Ordering::Less => return a,
        Ordering::Greater => return b,
        Ordering::Equal => {}
    }
    match crowd[b].total_cmp(&crowd[a]) {
        Ordering::Less => return a,
        Ordering::Greater => return b,
        Ordering::Equal => {}
    }
    match canonical_cmp(&entry(&pop[a]), &entry(&pop[b])) {
        Ordering::Greater => b,
        _ => a,
    }
}

fn clamp_gene(value: u32, lo: u32, hi: u32) -> u32 {
    value.max(lo).min(hi)
}

fn survive(mut combined: Vec<Individual>, target: usize) -> Vec<Individual> {
    let costs: Vec<CostVector> = combined.iter().map(|i| i.cost).collect();
    let fronts = fast_nondominated_sort(&costs);
    let mut keep: Vec<usize> = Vec::with_capacity(target);
    for front in fronts {
        if keep.len() + front.len() <= target {
            let mut ordered = front;
            ordered.sort_by(|&a, &b| canonical_cmp(&entry(&combined[a]), &entry(&combined[b])));
            keep.extend(ordered);
            if keep.len() == target {
                break;
            }
        } else {
            // Truncate the overflowing front by crowding, most isolated
            // first; canonical order settles exact ties.
            let front_costs: Vec<CostVector> = front.iter().map(|&i| costs[i]).collect();
            let d = crowding_distance(&front_costs);
            let mut ordered: Vec<(usize, f64)> =
                front.iter().copied().zip(d).collect();
            ordered.sort_by(|a, b| {
                b.1.total_cmp(&a.1)
                    .then_with(|| canonical_cmp(&entry(&combined[a.0]), &entry(&combined[b.0])))
            });
            keep.extend(ordered.into_iter().take(target - keep.len()).map(|(i, _)| i));
            break;
        }
    }
    let mut keep_flags = alloc::vec![false; combined.len()];
    let mut order = alloc::vec![usize::MAX; combined.len()];
    for (slot, &i) in keep.iter().enumerate() {
        keep_flags[i] = true;
        order[i] = slot;
    }
    let mut survivors: Vec<(usize, Individual)> = combined
        .drain(..)
        .enumerate()
        .filter(|(i, _)| keep_flags[*i])
        .map(|(i, ind)| (order[i], ind))
        .collect();
    survivors.sort_by_key(|(slot, _)| *slot);
    survivors.into_iter().map(|(_, ind)| ind).collect()
}

fn run_single_arch(
    spec: &DcimSpec,
    arch: Arch,
    params: &GaParams,
    eval: &dyn CostEvaluator,
    seed: u64,
    archive: &mut ParetoArchive,
    observer: &mut dyn FnMut(u32, &ParetoArchive),
) -> Result<(), DseError> {
    let space = SearchSpace::build(spec, arch)?;
    let mut rng = SplitMix64::new(seed);
    let pop_size = params.population as usize;

    let mut seeds: Vec<(Genome, DesignPoint)> = Vec::with_capacity(pop_size);
    for _ in 0..pop_size {
        let g = space.sample_genome(&mut rng);
        seeds.push(space.materialize(spec, arch, g, &mut rng));
    }
    let costs = eval.evaluate(&seeds.iter().map(|(_, dp)| *dp).collect::<Vec<_>>());
    let mut pop: Vec<Individual> = seeds
        .into_iter()
        .zip(costs)
        .map(|((genome, dp), cost)| Individual { genome, dp, cost })
        .collect();
    for ind in &pop {
        archive.insert(ind.dp, ind.cost);
    }
    observer(0, archive);

    for gen in 1..=params.generations {
        let (rank, crowd) = rank_and_crowd(&pop);
        let mut children: Vec<(Genome, DesignPoint)> = Vec::with_capacity(pop_size);
        while children.len() < pop_size {
            let pick = |rng: &mut SplitMix64| {
                let a = rng.below(pop_size as u64) as usize;
                let b = rng.below(pop_size as u64) as usize;
                better(&pop, &rank, &crowd, a, b)
            };
            let p1 = pop[pick(&mut rng)].genome;
            let p2 = pop[pick(&mut rng)].genome;
            let (mut c1, mut c2) = (p1, p2);
            if rng.unit_f64() < params.crossover_prob {
                if rng.coin() {
                    core::mem::swap(&mut c1.height_exp, &mut c2.height_exp);
                }
                if rng.coin() {
                    core::mem::swap(&mut c1.share_exp, &mut c2.share_exp);
                }
                if rng.coin() {
                    core::mem::swap(&mut c1.slice_idx, &mut c2.slice_idx);
                }
            }
            for child in [&mut c1, &mut c2] {
                if rng.unit_f64() < params.mutation_prob {
                    child.height_exp = 1 + rng.below(u64::from(space.height_exp_max)) as u32;
                }
                if rng.unit_f64() < params.mutation_prob {
                    child.share_exp = rng.below(u64::from(space.share_exp_max) + 1) as u32;
                }
                if rng.unit_f64() < params.mutation_prob {
                    child.slice_idx = rng.below(space.slices.len() as u64) as u32;
                }
                child.height_exp = clamp_gene(child.height_exp, 1, space.height_exp_max);
                child.share_exp = clamp_gene(child.share_exp, 0, space.share_exp_max);
                children.push(space.materialize(spec, arch, *child, &mut rng));
            }
        }
        children.truncate(pop_size);
        let child_costs =
            eval.evaluate(&children.iter().map(|(_, dp)| *dp).collect::<Vec<_>>());
        let offspring: Vec<Individual> = children
            .into_iter()
            .zip(child_costs)
            .map(|((genome, dp), cost)| Individual { genome, dp, cost })
            .collect();
        for ind in &offspring {
            archive.insert(ind.dp, ind.cost);
        }
        let mut combined = pop;
        combined.extend(offspring);
        pop = survive(combined, pop_size);
        observer(gen, archive);
    }
    Ok(())
}

/// Runs the evolutionary search for every architecture the spec admits and
/// merges the results into one dominance-filtered archive.
pub fn nsga2_evolve(
    spec: &DcimSpec,
    params: &GaParams,
    eval: &dyn CostEvaluator,
) -> Result<ParetoArchive, DseError> {
    nsga2_evolve_observed(spec, params, eval, &mut |_, _| {})
}

/// Same as [`nsga2_evolve`], invoking the observer with the archive after
/// initialization and after every generation (per architecture).
pub fn nsga2_evolve_observed(
    spec: &DcimSpec,
    params: &GaParams,
    eval: &dyn CostEvaluator,
    observer: &mut dyn FnMut(u32, &ParetoArchive),
) -> Result<ParetoArchive, DseError> {
    spec.validate()?;
    params.validate()?;
    let mut archive = ParetoArchive {
        entries: Vec::new(),
        meta: ArchiveMeta {
            spec_hash: spec.content_hash(),
            seed: params.seed,
            generations: params.generations,
        },
    };
    // Per-architecture sub-streams use consecutive seeds; SplitMix64 mixes
    // them into unrelated sequences.
    for (idx, arch) in spec.effective_archs().into_iter().enumerate() {
        run_single_arch(
            spec,
            arch,
            params,
            eval,
            params.seed.wrapping_add(idx as u64),
            &mut archive,
            observer,
        )?;
    }
    Ok(archive)
}

/// Evaluates every lattice point directly and returns the exact
/// non-dominated set in canonical order. The lattice is the same one the
/// genome encodes, so this is the ground truth the evolutionary search is
/// judged against.
pub fn enumerate_bruteforce(
    spec: &DcimSpec,
    grid_cap: u64,
    eval: &dyn CostEvaluator,
) -> Result<ParetoArchive, DseError> {
    spec.validate()?;
    let mut archive = ParetoArchive {
        entries: Vec::new(),
        meta: ArchiveMeta {
            spec_hash: spec.content_hash(),
            seed: 0,
            generations: 0,
        },
    };
    for arch in spec.effective_archs() {
        let space = SearchSpace::build(spec, arch)?;
        let grid = u64::from(space.height_exp_max)
            * (u64::from(space.share_exp_max) + 1)
            * space.slices.len() as u64;
        if grid > grid_cap {
            return Err(DseError::GridCapExceeded { grid, cap: grid_cap });
        }
        let mut points: Vec<DesignPoint> = Vec::new();
        for h in 1..=space.height_exp_max {
            for l in 0..=space.share_exp_max {
                for (slice_idx, _) in space.slices.iter().enumerate() {
                    let genome = Genome {
                        height_exp: h,
                        share_exp: l,
                        slice_idx: slice_idx as u32,
                    };
                    if let Some(dp) = repair_to_feasible(spec, arch, &genome) {
                        if !points.contains(&dp) {
                            points.push(dp);
                        }
                    }
                }
            }
        }
        let costs = eval.evaluate(&points);
        for (dp, cost) in points.into_iter().zip(costs) {
            archive.insert(dp, cost);
        }
    }
    Ok(archive)
}
