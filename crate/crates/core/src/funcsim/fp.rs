//! Pre-aligned float dataflow over the shared bit-serial engine.
//!
//! Values are sign/exponent/mantissa triples with the hidden bit stored
//! explicitly; anything with a zero exponent is flushed to zero, and there
//! are no NaN or infinity encodings (the converter saturates and raises
//! flags instead). Weights are aligned offline per dot-product group to the
//! group's maximum exponent; inputs are aligned on the fly the same way.
//! Both alignments are arithmetic right shifts, so every discarded nonzero
//! bit raises a truncation flag.
//!
//! The aligned signed mantissas then run through the integer bit-serial
//! engine: weights as two's-complement bit planes (one extra sign plane,
//! fused with negative scale), inputs as sign-magnitude streams with the
//! sign applied to each partial. The cost model prices the unsigned plane
//! count only; the extra sign plane here is a simulation-side device for
//! defined signed semantics and is documented as such.

use alloc::vec::Vec;

use super::{run_bit_serial, SimError};
use crate::costmodel::{Arch, DesignPoint};

/// Storage format: exponent width and mantissa width, the latter counting
/// the explicit hidden bit.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FpFormat {
    pub exponent_bits: u32,
    pub mantissa_bits: u32,
}

impl FpFormat {
    pub fn new(exponent_bits: u32, mantissa_bits: u32) -> Result<FpFormat, SimError> {
        if !(1..=11).contains(&exponent_bits) {
            return Err(SimError::Width("exponent width out of range"));
        }
        if !(2..=24).contains(&mantissa_bits) {
            return Err(SimError::Width("mantissa width out of range"));
        }
        Ok(FpFormat { exponent_bits, mantissa_bits })
    }

    /// Format carried by a float design point.
    pub fn of(dp: &DesignPoint) -> Result<FpFormat, SimError> {
        match (dp.exponent_bits, dp.mantissa_bits) {
            (Some(be), Some(bm)) => FpFormat::new(be, bm),
            _ => Err(SimError::Arch("design point carries no float widths")),
        }
    }

    pub fn bias(&self) -> i64 {
        (1i64 << (self.exponent_bits - 1)) - 1
    }

    pub fn max_exponent(&self) -> u32 {
        (1u32 << self.exponent_bits) - 1
    }

    fn mantissa_range(&self) -> (u64, u64) {
        (1u64 << (self.mantissa_bits - 1), 1u64 << self.mantissa_bits)
    }
}

/// One float value. Zero is the canonical all-zero triple; any nonzero
/// value is normalized with the hidden bit set in `mantissa`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FpValue {
    pub negative: bool,
    pub exponent: u32,
    pub mantissa: u64,
}

impl FpValue {
    pub const ZERO: FpValue = FpValue { negative: false, exponent: 0, mantissa: 0 };

    /// Builds a value, flushing a zero exponent to canonical zero and
    /// rejecting out-of-range or denormalized fields.
    pub fn new(
        fmt: &FpFormat,
        negative: bool,
        exponent: u32,
        mantissa: u64,
    ) -> Result<FpValue, SimError> {
        if exponent == 0 {
            return Ok(FpValue::ZERO);
        }
        if exponent > fmt.max_exponent() {
            return Err(SimError::Width("exponent field"));
        }
        let (lo, hi) = fmt.mantissa_range();
        if mantissa < lo || mantissa >= hi {
            return Err(SimError::Width("mantissa must carry the hidden bit"));
        }
        Ok(FpValue { negative, exponent, mantissa })
    }

    pub fn is_zero(&self) -> bool {
        self.exponent == 0
    }

    pub fn signed_mantissa(&self) -> i64 {
        let m = self.mantissa as i64;
        if self.negative {
            -m
        } else {
            m
        }
    }

    fn check(&self, fmt: &FpFormat) -> Result<(), SimError> {
        if self.is_zero() {
            if self.mantissa != 0 || self.negative {
                return Err(SimError::Width("zero must be the canonical triple"));
            }
            return Ok(());
        }
        FpValue::new(fmt, self.negative, self.exponent, self.mantissa).map(|_| ())
    }

    /// Exact numeric value: `±mantissa · 2^(exponent − bias − (BM − 1))`.
    /// The represented range sits far inside f64, so this is lossless for
    /// every supported format.
    pub fn to_f64(&self, fmt: &FpFormat) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let scale = i64::from(self.exponent) - fmt.bias() - i64::from(fmt.mantissa_bits - 1);
        let v = self.mantissa as f64 * pow2(scale as i32);
        if self.negative {
            -v
        } else {
            v
        }
    }
}

/// 2^e for |e| within the normal f64 exponent range, built directly from
/// the exponent field (no math library in this crate).
pub(crate) fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Result of aligning a set of values to their maximum exponent.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Aligned {
    pub max_exponent: u32,
    /// Signed mantissas after the arithmetic right shift, width BM + sign.
    pub values: Vec<i64>,
    /// Per element: some nonzero bit was discarded by the shift.
    pub truncated: Vec<bool>,
}

/// Aligns every value's signed mantissa to the maximum exponent present,
/// arithmetic-shifting right by the exponent gap (floor semantics, so
/// negative values truncate toward negative infinity). Zeros contribute
/// zero and never truncate.
pub fn align_to_max(fmt: &FpFormat, values: &[FpValue]) -> Result<Aligned, SimError> {
    for v in values {
        v.check(fmt)?;
    }
    let max_exponent = values
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.exponent)
        .max()
        .unwrap_or(0);
    let mut aligned = Vec::with_capacity(values.len());
    let mut truncated = Vec::with_capacity(values.len());
    for v in values {
        if v.is_zero() {
            aligned.push(0);
            truncated.push(false);
            continue;
        }
        let gap = (max_exponent - v.exponent).min(127);
        let sm = i128::from(v.signed_mantissa());
        let shifted = sm >> gap;
        aligned.push(shifted as i64);
        truncated.push((shifted << gap) != sm);
    }
    Ok(Aligned { max_exponent, values: aligned, truncated })
}

/// On-the-fly input alignment: the comparison tree picks the maximum input
/// exponent and every mantissa is shifted into that frame.
pub fn prealign_inputs(fmt: &FpFormat, xs: &[FpValue]) -> Result<Aligned, SimError> {
    align_to_max(fmt, xs)
}

/// Converter outcome. `inexact` means the normalization shift discarded
/// nonzero bits; overflow saturates to the largest finite value; underflow
/// flushes to zero.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Converted {
    pub value: FpValue,
    pub overflow: bool,
    pub underflow: bool,
    pub inexact: bool,
}

/// Normalizes a raw signed integer into the target format. The result
/// exponent is `exponent_base` plus the leading-one position of the
/// magnitude; the mantissa keeps the top `mantissa_bits` bits, truncated
/// toward zero.
pub fn int_to_fp_convert(fmt: &FpFormat, raw: i128, exponent_base: i64) -> Converted {
    if raw == 0 {
        return Converted { value: FpValue::ZERO, overflow: false, underflow: false, inexact: false };
    }
    let negative = raw < 0;
    let mag = raw.unsigned_abs();
    let position = 127 - mag.leading_zeros();
    let keep = fmt.mantissa_bits - 1;
    let (mantissa, inexact) = if position >= keep {
        let drop = position - keep;
        let m = (mag >> drop) as u64;
        (m, (u128::from(m) << drop) != mag)
    } else {
        ((mag as u64) << (keep - position), false)
    };
    let exponent = exponent_base + i64::from(position);
    if exponent > i64::from(fmt.max_exponent()) {
        let value = FpValue {
            negative,
            exponent: fmt.max_exponent(),
            mantissa: (1u64 << fmt.mantissa_bits) - 1,
        };
        return Converted { value, overflow: true, underflow: false, inexact };
    }
    if exponent < 1 {
        return Converted { value: FpValue::ZERO, overflow: false, underflow: true, inexact };
    }
    let value = FpValue { negative, exponent: exponent as u32, mantissa };
    Converted { value, overflow: false, underflow: false, inexact }
}

/// Float operand set, mirroring the integer layout: `weights[o][r][i]`
/// with a selected row, plus the live input vector.
#[derive(Clone, PartialEq, Debug)]
pub struct FpOperands {
    pub weights: Vec<Vec<Vec<FpValue>>>,
    pub inputs: Vec<FpValue>,
    pub row: u32,
}

impl FpOperands {
    fn check_against(&self, dp: &DesignPoint, fmt: &FpFormat) -> Result<(), SimError> {
        if self.weights.len() != dp.outputs() as usize {
            return Err(SimError::Shape("output count differs from the design point"));
        }
        for group in &self.weights {
            if group.len() != dp.weights_per_unit as usize {
                return Err(SimError::Shape("row count differs from the sharing depth"));
            }
            for row in group {
                if row.len() != self.inputs.len() {
                    return Err(SimError::Shape("weight row length differs from input length"));
                }
                for w in row {
                    w.check(fmt)?;
                }
            }
        }
        if self.inputs.len() != dp.column_height as usize {
            return Err(SimError::Shape("input length differs from the column height"));
        }
        if self.row as usize >= dp.weights_per_unit as usize {
            return Err(SimError::Shape("selected row is out of range"));
        }
        for x in &self.inputs {
            x.check(fmt)?;
        }
        Ok(())
    }
}

/// One simulated float output with its event flags.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FpOutput {
    pub value: FpValue,
    pub overflow: bool,
    pub underflow: bool,
    pub convert_inexact: bool,
    /// Offline weight alignment discarded nonzero bits in this group.
    pub weight_truncated: bool,
    pub group_max_exponent: u32,
}

/// Simulation result: per-output values plus the shared input-alignment
/// record.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FpSimResult {
    pub outputs: Vec<FpOutput>,
    pub input_truncated: Vec<bool>,
    pub input_max_exponent: u32,
}

impl FpSimResult {
    /// True when no stage discarded information for output `o`: clean
    /// alignment on both sides, exact conversion, no range event.
    pub fn is_exact(&self, o: usize) -> bool {
        let out = &self.outputs[o];
        !out.overflow
            && !out.underflow
            && !out.convert_inexact
            && !out.weight_truncated
            && self.input_truncated.iter().all(|&t| !t)
    }
}

/// Runs the float dataflow: offline weight alignment per output group,
/// live input alignment, signed mantissa contraction on the bit-serial
/// engine, and integer-to-float conversion of each raw accumulator.
pub fn simulate_fp_dcim(dp: &DesignPoint, ops: &FpOperands) -> Result<FpSimResult, SimError> {
    dp.validate().map_err(|_| SimError::InvalidDesign("design point fails validation"))?;
    if dp.arch != Arch::FpPrealigned {
        return Err(SimError::Arch("float simulation needs the pre-aligned architecture"));
    }
    let fmt = FpFormat::of(dp)?;
    ops.check_against(dp, &fmt)?;

    let aligned_inputs = prealign_inputs(&fmt, &ops.inputs)?;
    let planes_per_output = dp.weight_bits + 1;
    let height = dp.column_height as usize;
    let mut outputs = Vec::with_capacity(ops.weights.len());
    for group in &ops.weights {
        let w = align_to_max(&fmt, &group[ops.row as usize])?;
        let weight_truncated = w.truncated.iter().any(|&t| t);

        // Two's-complement bit planes of the aligned weights; the top plane
        // is the sign plane and fuses with negative scale.
        let mask = (1i64 << planes_per_output) - 1;
        let planes: Vec<Vec<u8>> = (0..planes_per_output)
            .map(|b| (0..height).map(|i| (((w.values[i] & mask) >> b) & 1) as u8).collect())
            .collect();
        let (acc, _) = run_bit_serial(
            &planes,
            &aligned_inputs.values,
            dp.input_bits,
            dp.bits_per_cycle,
        );
        let mut raw = 0i128;
        for (b, &a) in acc.iter().enumerate() {
            if b as u32 == dp.weight_bits {
                raw -= a << b;
            } else {
                raw += a << b;
            }
        }

        let bm = i64::from(fmt.mantissa_bits - 1);
        let base = i64::from(aligned_inputs.max_exponent) + i64::from(w.max_exponent)
            - fmt.bias()
            - 2 * bm;
        let conv = int_to_fp_convert(&fmt, raw, base);
        outputs.push(FpOutput {
            value: conv.value,
            overflow: conv.overflow,
            underflow: conv.underflow,
            convert_inexact: conv.inexact,
            weight_truncated,
            group_max_exponent: w.max_exponent,
        });
    }
    Ok(FpSimResult {
        outputs,
        input_truncated: aligned_inputs.truncated,
        input_max_exponent: aligned_inputs.max_exponent,
    })
}
