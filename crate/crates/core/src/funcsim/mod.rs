//! Bit-accurate functional simulation of the macro dataflow.
//!
//! The integer path is the ground truth the hardware must reproduce: weights
//! live in the array as bit planes (one column per weight bit), inputs are
//! streamed most-significant-slice first at `k` bits per cycle, each column
//! reduces its selected weight bits against the current slice, and a shift
//! accumulator folds the slices back together. Result fusion then recombines
//! the per-plane columns into full products. [`exact_int_mvm`] computes the
//! same contraction directly in wide integer arithmetic, so the two routes
//! check each other.
//!
//! The float path in [`fp`] reuses the identical bit-serial engine over
//! signed aligned mantissas; see that module for the sign conventions.

pub mod fp;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::costmodel::{Arch, DesignPoint};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SimError {
    /// Operand shapes disagree with each other or with the design point.
    Shape(&'static str),
    /// A magnitude does not fit its declared bit-width.
    Width(&'static str),
    /// The design point targets the other architecture.
    Arch(&'static str),
    /// The design point itself is malformed.
    InvalidDesign(&'static str),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Shape(what) => write!(f, "operand shape mismatch: {what}"),
            SimError::Width(what) => write!(f, "operand exceeds bit-width: {what}"),
            SimError::Arch(what) => write!(f, "architecture mismatch: {what}"),
            SimError::InvalidDesign(what) => write!(f, "invalid design point: {what}"),
        }
    }
}

impl core::error::Error for SimError {}

/// Unsigned operand set for the integer dataflow.
///
/// `weights[o][r][i]` is the weight for output `o`, storage row `r`, input
/// lane `i`; `row` selects which stored row the run contracts against.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntOperands {
    pub weights: Vec<Vec<Vec<u64>>>,
    pub inputs: Vec<u64>,
    pub row: u32,
}

impl IntOperands {
    /// Shape consistency independent of any design point: a nonempty weight
    /// cube with uniform row counts and lane counts matching the inputs.
    pub fn check_shape(&self) -> Result<(), SimError> {
        if self.weights.is_empty() {
            return Err(SimError::Shape("weights must cover at least one output"));
        }
        let rows = self.weights[0].len();
        if rows == 0 {
            return Err(SimError::Shape("weights must hold at least one row"));
        }
        for group in &self.weights {
            if group.len() != rows {
                return Err(SimError::Shape("ragged row counts across outputs"));
            }
            for row in group {
                if row.len() != self.inputs.len() {
                    return Err(SimError::Shape("weight row length differs from input length"));
                }
            }
        }
        if self.row as usize >= rows {
            return Err(SimError::Shape("selected row is out of range"));
        }
        Ok(())
    }

    /// Full validation against a design point: shapes and magnitudes.
    pub fn check_against(&self, dp: &DesignPoint) -> Result<(), SimError> {
        self.check_shape()?;
        if self.weights.len() != dp.outputs() as usize {
            return Err(SimError::Shape("output count differs from the design point"));
        }
        if self.weights[0].len() != dp.weights_per_unit as usize {
            return Err(SimError::Shape("row count differs from the sharing depth"));
        }
        if self.inputs.len() != dp.column_height as usize {
            return Err(SimError::Shape("input length differs from the column height"));
        }
        let w_limit = 1u64 << dp.weight_bits;
        if self.weights.iter().flatten().flatten().any(|&w| w >= w_limit) {
            return Err(SimError::Width("weight magnitude"));
        }
        let x_limit = 1u64 << dp.input_bits;
        if self.inputs.iter().any(|&x| x >= x_limit) {
            return Err(SimError::Width("input magnitude"));
        }
        Ok(())
    }
}

/// Direct wide-integer contraction: `y[o] = sum_i weights[o][row][i] *
/// inputs[i]`. This is the independent route the cycle-level simulator is
/// checked against.
pub fn exact_int_mvm(ops: &IntOperands) -> Result<Vec<u128>, SimError> {
    ops.check_shape()?;
    Ok(ops
        .weights
        .iter()
        .map(|group| {
            group[ops.row as usize]
                .iter()
                .zip(&ops.inputs)
                .map(|(&w, &x)| u128::from(w) * u128::from(x))
                .sum()
        })
        .collect())
}

/// One recorded cycle: the slice fed on every input lane, then per-column
/// partial sums and post-update accumulator values.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CycleRecord {
    pub cycle: u32,
    pub slices: Vec<u64>,
    pub partials: Vec<i128>,
    pub accumulators: Vec<i128>,
}

/// Execution record of one bit-serial run over all columns.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SimTrace {
    pub records: Vec<CycleRecord>,
    pub fused: Vec<u128>,
}

impl SimTrace {
    /// Line-oriented dump: one `cycle,column,partial,accumulator` line per
    /// column per cycle, in cycle-major order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for rec in &self.records {
            for (col, (p, a)) in rec.partials.iter().zip(&rec.accumulators).enumerate() {
                let _ = writeln!(out, "{},{},{},{}", rec.cycle, col, p, a);
            }
        }
        out
    }
}

/// Shared bit-serial engine. `planes[c][i]` is the weight bit column `c`
/// applies to lane `i`; `lanes` carries signed input values whose magnitudes
/// fit `input_bits`. Streams magnitudes most-significant-slice first,
/// `bits_per_cycle` at a time, applying each lane's sign to its slice;
/// accumulators shift left by the slice width then add the partial.
/// Returns final per-column accumulators plus the cycle records.
pub(crate) fn run_bit_serial(
    planes: &[Vec<u8>],
    lanes: &[i64],
    input_bits: u32,
    bits_per_cycle: u32,
) -> (Vec<i128>, Vec<CycleRecord>) {
    debug_assert!(input_bits.is_multiple_of(bits_per_cycle));
    let cycles = input_bits / bits_per_cycle;
    let mask = (1u64 << bits_per_cycle) - 1;
    let mut acc = alloc::vec![0i128; planes.len()];
    let mut records = Vec::with_capacity(cycles as usize);
    for t in 0..cycles {
        let shift = input_bits - bits_per_cycle * (t + 1);
        let slices: Vec<u64> =
            lanes.iter().map(|&v| (v.unsigned_abs() >> shift) & mask).collect();
        let mut partials = Vec::with_capacity(planes.len());
        for (c, plane) in planes.iter().enumerate() {
            let mut p = 0i128;
            for (i, &bit) in plane.iter().enumerate() {
                if bit != 0 {
                    let term = i128::from(slices[i]);
                    p += if lanes[i] < 0 { -term } else { term };
                }
            }
            acc[c] = (acc[c] << bits_per_cycle) + p;
            partials.push(p);
        }
        records.push(CycleRecord {
            cycle: t,
            slices,
            partials,
            accumulators: acc.clone(),
        });
    }
    (acc, records)
}

/// Cycle-level integer simulation: streams the inputs through the bit-plane
/// columns and fuses the per-plane accumulators into final products. The
/// final outputs equal [`exact_int_mvm`] for every valid operand set.
pub fn simulate_int_dcim(
    dp: &DesignPoint,
    ops: &IntOperands,
) -> Result<(Vec<u128>, SimTrace), SimError> {
    dp.validate().map_err(|_| SimError::InvalidDesign("design point fails validation"))?;
    if dp.arch != Arch::IntMultiply {
        return Err(SimError::Arch("integer simulation needs the integer architecture"));
    }
    ops.check_against(dp)?;

    // Column c = o * Bw + b holds bit b of output o's selected weights.
    let height = dp.column_height as usize;
    let mut planes: Vec<Vec<u8>> = Vec::with_capacity(dp.columns as usize);
    for group in &ops.weights {
        let row = &group[ops.row as usize];
        for b in 0..dp.weight_bits {
            planes.push((0..height).map(|i| ((row[i] >> b) & 1) as u8).collect());
        }
    }
    let lanes: Vec<i64> = ops.inputs.iter().map(|&x| x as i64).collect();
    let (acc, records) = run_bit_serial(&planes, &lanes, dp.input_bits, dp.bits_per_cycle);

    let fused: Vec<u128> = acc
        .chunks(dp.weight_bits as usize)
        .map(|cols| {
            cols.iter()
                .enumerate()
                .map(|(b, &a)| (a as u128) << b)
                .sum()
        })
        .collect();
    Ok((fused.clone(), SimTrace { records, fused }))
}
