//! Cost evaluation on a worker pool.
//!
//! The search contract requires evaluators to be pure functions of the
//! design points with results in input order. `par_iter().map().collect()`
//! preserves input order, so every job count produces the same cost
//! sequence and therefore the same search trajectory and artifacts.

use dcim_core::costmodel::{macro_cost, CostVector, DesignPoint};
use dcim_core::dse::CostEvaluator;
use dcim_core::techlib::TechLibrary;
use rayon::prelude::*;

use crate::error::CliError;

pub struct PooledEvaluator {
    lib: TechLibrary,
    activity: f64,
    /// `None` evaluates on the calling thread (jobs = 1).
    pool: Option<rayon::ThreadPool>,
}

impl PooledEvaluator {
    pub fn new(lib: &TechLibrary, activity: f64, jobs: usize) -> Result<PooledEvaluator, CliError> {
        let pool = if jobs <= 1 {
            None
        } else {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .map_err(|e| CliError::internal(format!("cannot start worker pool: {e}")))?,
            )
        };
        Ok(PooledEvaluator { lib: lib.clone(), activity, pool })
    }

    fn cost(&self, dp: &DesignPoint) -> CostVector {
        macro_cost(&self.lib, dp)
            .expect("search candidates are repaired to validity")
            .objectives(self.activity)
    }
}

impl CostEvaluator for PooledEvaluator {
    fn evaluate(&self, points: &[DesignPoint]) -> Vec<CostVector> {
        match &self.pool {
            None => points.iter().map(|dp| self.cost(dp)).collect(),
            Some(pool) => pool.install(|| points.par_iter().map(|dp| self.cost(dp)).collect()),
        }
    }
}
