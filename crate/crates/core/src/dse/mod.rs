//! Design-space exploration.
//!
//! A [`DcimSpec`] fixes what the user cares about: total weight capacity,
//! operand precision, bound overrides, and the activity factor used for
//! energy. The search varies column height, weight sharing depth, and the
//! serial slice width; the column count is derived from the capacity
//! equality, so every candidate stores exactly the requested weights.

mod ga;
mod hypervolume;
mod pareto;
mod rng;

pub use ga::{
    enumerate_bruteforce, nsga2_evolve, nsga2_evolve_observed, repair_to_feasible, ArchiveEntry,
    ArchiveMeta, CostEvaluator, DseError, GaParams, Genome, ParetoArchive, SequentialEvaluator,
    DEFAULT_GRID_CAP,
};
pub use hypervolume::{hypervolume, hypervolume_min, nadir_reference};
pub use pareto::{
    crowding_distance, dominates, dominates_min, fast_nondominated_sort, nondominated_filter,
    OBJECTIVES,
};
pub use rng::SplitMix64;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::costmodel::{Arch, Precision};

/// Exploration problem statement.
#[derive(Clone, PartialEq, Debug)]
pub struct DcimSpec {
    /// Number of weight words the macro must store.
    pub weight_capacity: u64,
    pub precision: Precision,
    /// Requested datapath families; only the one consistent with the
    /// precision actually runs.
    pub archs: Vec<Arch>,
    /// Upper bound on column height (power of two).
    pub height_max: u32,
    /// Upper bound on weight sharing depth (power of two).
    pub share_max: u32,
    /// Exclusive lower bound on the column count. Defaults to four times the
    /// weight width.
    pub columns_min_exclusive: u32,
    /// Activity factor scaling energy, in (0, 1].
    pub activity: f64,
}

impl DcimSpec {
    pub const DEFAULT_HEIGHT_MAX: u32 = 2048;
    pub const DEFAULT_SHARE_MAX: u32 = 64;

    pub fn new(weight_capacity: u64, precision: Precision) -> DcimSpec {
        DcimSpec {
            weight_capacity,
            precision,
            archs: alloc::vec![precision.arch()],
            height_max: Self::DEFAULT_HEIGHT_MAX,
            share_max: Self::DEFAULT_SHARE_MAX,
            columns_min_exclusive: 4 * precision.weight_bits(),
            activity: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), DseError> {
        if self.weight_capacity == 0 {
            return Err(DseError::InvalidSpec("weight capacity must be at least 1"));
        }
        if self.height_max < 2 || !self.height_max.is_power_of_two() {
            return Err(DseError::InvalidSpec("height bound must be a power of two, at least 2"));
        }
        if self.share_max == 0 || !self.share_max.is_power_of_two() {
            return Err(DseError::InvalidSpec("share bound must be a power of two, at least 1"));
        }
        if !(self.activity > 0.0 && self.activity <= 1.0) {
            return Err(DseError::InvalidSpec("activity factor must be in (0, 1]"));
        }
        if self.effective_archs().is_empty() {
            return Err(DseError::InvalidSpec(
                "no requested architecture can realize the precision",
            ));
        }
        Ok(())
    }

    /// Architectures that can actually realize the precision, in canonical
    /// order. An integer datapath has no exponent handling and a float
    /// datapath insists on one, so this is always at most one entry.
    pub fn effective_archs(&self) -> Vec<Arch> {
        let mut archs: Vec<Arch> = self
            .archs
            .iter()
            .copied()
            .filter(|a| *a == self.precision.arch())
            .collect();
        archs.sort();
        archs.dedup();
        archs
    }

    /// Stable content hash (FNV-1a over a canonical rendering), recorded in
    /// archive metadata so artifacts can be traced to their spec.
    pub fn content_hash(&self) -> u64 {
        let mut text = String::new();
        let _ = write!(
            text,
            "w={};p={};archs={:?};hmax={};lmax={};nmin={};alpha={:016x}",
            self.weight_capacity,
            self.precision.name(),
            self.effective_archs(),
            self.height_max,
            self.share_max,
            self.columns_min_exclusive,
            self.activity.to_bits(),
        );
        fnv1a(text.as_bytes())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Divisors of `n` in increasing order; candidate serial slice widths.
pub fn divisors(n: u32) -> Vec<u32> {
    let mut out: Vec<u32> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    out.sort_unstable();
    out
}
