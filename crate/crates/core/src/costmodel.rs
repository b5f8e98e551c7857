//! Macro-level cost model.
//!
//! A [`DesignPoint`] fixes the shape of one compute-in-memory macro: column
//! count, column height, weight sharing depth, serial slice width, and
//! operand bit widths. The model composes the closed-form logic module costs
//! from [`crate::techlib`] into per-component costs and a four-objective
//! [`CostVector`] (area, cycle delay, per-cycle energy, throughput).
//!
//! All area/delay/energy arithmetic stays in exact integer tenths, so the
//! totals here can be compared for exact equality against a cell tally of
//! the generated netlist.

use alloc::vec::Vec;
use core::fmt;

use crate::techlib::{module_cost, CellKind, Gates, ModuleCost, ModuleKind, TechLibrary, TechError};

/// Datapath family of a macro.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Arch {
    /// Plain integer bit-serial multiply-accumulate.
    IntMultiply,
    /// Floating point via offline weight alignment, input pre-alignment,
    /// and an integer-to-float converter behind the fusion tree.
    FpPrealigned,
}

impl Arch {
    pub const fn tag(self) -> &'static str {
        match self {
            Arch::IntMultiply => "int",
            Arch::FpPrealigned => "fp",
        }
    }
}

/// Supported operand precisions with their derived bit widths.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Precision {
    Int2,
    Int4,
    Int8,
    Int16,
    /// 8-bit float, 4-bit exponent, 3 stored mantissa bits plus hidden bit.
    Fp8,
    Fp16,
    Bf16,
    Fp32,
}

impl Precision {
    pub const ALL: [Precision; 8] = [
        Precision::Int2,
        Precision::Int4,
        Precision::Int8,
        Precision::Int16,
        Precision::Fp8,
        Precision::Fp16,
        Precision::Bf16,
        Precision::Fp32,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Precision::Int2 => "INT2",
            Precision::Int4 => "INT4",
            Precision::Int8 => "INT8",
            Precision::Int16 => "INT16",
            Precision::Fp8 => "FP8",
            Precision::Fp16 => "FP16",
            Precision::Bf16 => "BF16",
            Precision::Fp32 => "FP32",
        }
    }

    pub fn parse(name: &str) -> Option<Precision> {
        Precision::ALL.iter().copied().find(|p| p.name() == name)
    }

    pub const fn arch(self) -> Arch {
        match self {
            Precision::Int2 | Precision::Int4 | Precision::Int8 | Precision::Int16 => {
                Arch::IntMultiply
            }
            _ => Arch::FpPrealigned,
        }
    }

    /// Exponent and mantissa widths for float precisions. The mantissa width
    /// counts the hidden bit, because that is the width the datapath carries.
    pub const fn float_widths(self) -> Option<(u32, u32)> {
        match self {
            Precision::Fp8 => Some((4, 4)),
            Precision::Fp16 => Some((5, 11)),
            Precision::Bf16 => Some((8, 8)),
            Precision::Fp32 => Some((8, 24)),
            _ => None,
        }
    }

    /// Stored bits per weight; this is what the storage capacity constraint
    /// counts. Integer formats store the full word, float formats store the
    /// aligned mantissa.
    pub const fn weight_bits(self) -> u32 {
        match self {
            Precision::Int2 => 2,
            Precision::Int4 => 4,
            Precision::Int8 => 8,
            Precision::Int16 => 16,
            Precision::Fp8 => 4,
            Precision::Fp16 => 11,
            Precision::Bf16 => 8,
            Precision::Fp32 => 24,
        }
    }

    /// Serial input word width: the full word for integers, the mantissa
    /// (with hidden bit) for floats.
    pub const fn input_bits(self) -> u32 {
        match self {
            Precision::Int2 => 2,
            Precision::Int4 => 4,
            Precision::Int8 => 8,
            Precision::Int16 => 16,
            Precision::Fp8 => 4,
            Precision::Fp16 => 11,
            Precision::Bf16 => 8,
            Precision::Fp32 => 24,
        }
    }
}

/// Shape of one macro instance.
///
/// Invariants enforced by [`DesignPoint::validate`]:
/// - all dimensions at least 1, `column_height` at least 2;
/// - `column_height` and `weights_per_unit` are powers of two;
/// - `bits_per_cycle` divides `input_bits`;
/// - `weight_bits` divides `columns`;
/// - float points carry exponent/mantissa widths with
///   `input_bits == mantissa_bits` and `weight_bits == mantissa_bits`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DesignPoint {
    pub arch: Arch,
    /// Number of storage columns, one weight bit plane per column.
    pub columns: u32,
    /// Inputs summed by each column's adder tree.
    pub column_height: u32,
    /// Weights sharing one compute unit through a selector.
    pub weights_per_unit: u32,
    /// Input bits consumed per cycle.
    pub bits_per_cycle: u32,
    /// Bits per stored weight.
    pub weight_bits: u32,
    /// Bits per serial input word.
    pub input_bits: u32,
    /// Exponent width (float only).
    pub exponent_bits: Option<u32>,
    /// Mantissa width including the hidden bit (float only).
    pub mantissa_bits: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CostError {
    /// A dimension violates the shape invariants; the message names it.
    InvalidShape(&'static str),
    /// Underlying module cost failure (width zero).
    Module(TechError),
}

impl fmt::Display for CostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostError::InvalidShape(what) => write!(f, "invalid design point: {what}"),
            CostError::Module(e) => write!(f, "module cost: {e}"),
        }
    }
}

impl core::error::Error for CostError {}

impl From<TechError> for CostError {
    fn from(e: TechError) -> Self {
        CostError::Module(e)
    }
}

impl DesignPoint {
    pub fn int(
        columns: u32,
        column_height: u32,
        weights_per_unit: u32,
        bits_per_cycle: u32,
        weight_bits: u32,
        input_bits: u32,
    ) -> DesignPoint {
        DesignPoint {
            arch: Arch::IntMultiply,
            columns,
            column_height,
            weights_per_unit,
            bits_per_cycle,
            weight_bits,
            input_bits,
            exponent_bits: None,
            mantissa_bits: None,
        }
    }

    /// Float points derive both operand widths from the mantissa width: the
    /// stored weight is the aligned mantissa and the serial input word is the
    /// aligned mantissa.
    pub fn fp(
        columns: u32,
        column_height: u32,
        weights_per_unit: u32,
        bits_per_cycle: u32,
        exponent_bits: u32,
        mantissa_bits: u32,
    ) -> DesignPoint {
        DesignPoint {
            arch: Arch::FpPrealigned,
            columns,
            column_height,
            weights_per_unit,
            bits_per_cycle,
            weight_bits: mantissa_bits,
            input_bits: mantissa_bits,
            exponent_bits: Some(exponent_bits),
            mantissa_bits: Some(mantissa_bits),
        }
    }

    /// Point for a precision preset at the given array shape.
    pub fn with_precision(
        precision: Precision,
        columns: u32,
        column_height: u32,
        weights_per_unit: u32,
        bits_per_cycle: u32,
    ) -> DesignPoint {
        match precision.float_widths() {
            Some((be, bm)) => DesignPoint::fp(
                columns,
                column_height,
                weights_per_unit,
                bits_per_cycle,
                be,
                bm,
            ),
            None => DesignPoint::int(
                columns,
                column_height,
                weights_per_unit,
                bits_per_cycle,
                precision.weight_bits(),
                precision.input_bits(),
            ),
        }
    }

    pub fn validate(&self) -> Result<(), CostError> {
        let err = CostError::InvalidShape;
        if self.columns == 0 {
            return Err(err("columns must be at least 1"));
        }
        if self.column_height < 2 || !self.column_height.is_power_of_two() {
            return Err(err("column height must be a power of two, at least 2"));
        }
        if self.weights_per_unit == 0 || !self.weights_per_unit.is_power_of_two() {
            return Err(err("weights per unit must be a power of two, at least 1"));
        }
        if self.weight_bits == 0 || self.input_bits == 0 || self.bits_per_cycle == 0 {
            return Err(err("bit widths must be at least 1"));
        }
        if self.bits_per_cycle > self.input_bits || !self.input_bits.is_multiple_of(self.bits_per_cycle) {
            return Err(err("bits per cycle must divide the input width"));
        }
        if !self.columns.is_multiple_of(self.weight_bits) {
            return Err(err("weight width must divide the column count"));
        }
        match self.arch {
            Arch::IntMultiply => {
                if self.exponent_bits.is_some() || self.mantissa_bits.is_some() {
                    return Err(err("integer points carry no float widths"));
                }
            }
            Arch::FpPrealigned => {
                let be = self.exponent_bits.ok_or(err("float points need an exponent width"))?;
                let bm = self.mantissa_bits.ok_or(err("float points need a mantissa width"))?;
                if be < 1 {
                    return Err(err("exponent width must be at least 1"));
                }
                if bm < 2 {
                    return Err(err("mantissa width must be at least 2"));
                }
                if self.input_bits != bm || self.weight_bits != bm {
                    return Err(err("float operand widths must equal the mantissa width"));
                }
            }
        }
        Ok(())
    }

    /// log2 of the column height; exact because the height is a power of two.
    pub fn height_log2(&self) -> u32 {
        self.column_height.ilog2()
    }

    /// Accumulator width: serial input width plus tree growth.
    pub fn accumulator_bits(&self) -> u32 {
        self.input_bits + self.height_log2()
    }

    /// Fused output width: accumulator width plus the weight bit planes.
    pub fn fused_bits(&self) -> u32 {
        self.accumulator_bits() + self.weight_bits
    }

    /// Raw converter input width for float points.
    pub fn raw_bits(&self) -> u32 {
        self.weight_bits + self.mantissa_bits.unwrap_or(0) + self.height_log2()
    }

    pub fn outputs(&self) -> u32 {
        self.columns / self.weight_bits
    }

    pub fn cycles(&self) -> u32 {
        self.input_bits / self.bits_per_cycle
    }

    /// Stored weight words.
    pub fn weight_capacity(&self) -> u64 {
        u64::from(self.columns) * u64::from(self.column_height) * u64::from(self.weights_per_unit)
            / u64::from(self.weight_bits)
    }

    /// MAC operations completed per cycle, as an exact ratio
    /// (multiply-and-add counts as two operations).
    pub fn ops_per_cycle(&self) -> (u64, u64) {
        let num = 2 * u64::from(self.outputs()) * u64::from(self.column_height)
            * u64::from(self.bits_per_cycle);
        (num, u64::from(self.input_bits))
    }

    /// Stable, directory-friendly identifier for this point.
    pub fn tag(&self) -> alloc::string::String {
        alloc::format!(
            "{}_N{}_H{}_L{}_k{}_Bw{}_Bx{}",
            self.arch.tag(),
            self.columns,
            self.column_height,
            self.weights_per_unit,
            self.bits_per_cycle,
            self.weight_bits,
            self.input_bits
        )
    }
}

/// Architectural components reported in a cost breakdown.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ComponentKind {
    SramArray,
    ComputeUnits,
    AdderTree,
    ShiftAccumulator,
    ResultFusion,
    InputBuffer,
    Prealign,
    IntToFpConverter,
}

impl ComponentKind {
    pub const fn name(self) -> &'static str {
        match self {
            ComponentKind::SramArray => "sram_array",
            ComponentKind::ComputeUnits => "compute_units",
            ComponentKind::AdderTree => "adder_tree",
            ComponentKind::ShiftAccumulator => "shift_accumulator",
            ComponentKind::ResultFusion => "result_fusion",
            ComponentKind::InputBuffer => "input_buffer",
            ComponentKind::Prealign => "prealign",
            ComponentKind::IntToFpConverter => "int_to_fp_converter",
        }
    }
}

/// One component's contribution. Area and energy are totals across all
/// instances of the component; delay is the single-instance critical path.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ComponentCost {
    pub kind: ComponentKind,
    pub area: Gates,
    pub delay: Gates,
    pub energy: Gates,
}

/// Exact macro cost with per-component and per-stage detail.
/// Energy here is unscaled (activity factor 1).
#[derive(Clone, PartialEq, Debug)]
pub struct MacroCost {
    pub components: Vec<ComponentCost>,
    /// Pre-array path: input pre-alignment for float, slice selection for
    /// integer. Not part of the cycle-time maximum for integer macros.
    pub stage_pre_array: Gates,
    /// Selector through multiplier, adder tree, and shift accumulator.
    pub stage_array_to_accu: Gates,
    /// Fusion tree, plus the converter for float macros.
    pub stage_fusion_out: Gates,
    pub area: Gates,
    pub delay: Gates,
    pub energy: Gates,
    pub ops_per_cycle: (u64, u64),
}

impl MacroCost {
    pub fn component(&self, kind: ComponentKind) -> Option<&ComponentCost> {
        self.components.iter().find(|c| c.kind == kind)
    }

    /// Objective vector with the given activity factor scaling energy.
    pub fn objectives(&self, activity: f64) -> CostVector {
        let delay = self.delay.as_f64();
        let (num, den) = self.ops_per_cycle;
        CostVector {
            area: self.area.as_f64(),
            delay,
            energy: self.energy.as_f64() * activity,
            throughput: (num as f64 / den as f64) / delay,
        }
    }
}

/// The four optimization objectives. Area, delay, and energy are minimized;
/// throughput (operations per gate-delay) is maximized.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct CostVector {
    pub area: f64,
    pub delay: f64,
    pub energy: f64,
    pub throughput: f64,
}

impl CostVector {
    /// Minimization coordinates: throughput enters negated.
    pub fn as_min_objectives(&self) -> [f64; 4] {
        [self.area, self.delay, self.energy, -self.throughput]
    }
}

/// Adder tree summing `height` words of `slice_bits` bits: level `i`
/// (1-based) holds `height >> i` adders of operand width `slice_bits + i - 1`.
/// Delay is one adder per level.
pub fn adder_tree_cost(
    lib: &TechLibrary,
    height: u32,
    slice_bits: u32,
) -> Result<ModuleCost, CostError> {
    if height < 2 || !height.is_power_of_two() {
        return Err(CostError::InvalidShape(
            "adder tree height must be a power of two, at least 2",
        ));
    }
    if slice_bits == 0 {
        return Err(CostError::InvalidShape("adder tree slice width must be at least 1"));
    }
    let mut total = ModuleCost::ZERO;
    for level in 1..=height.ilog2() {
        let adders = u64::from(height >> level);
        let width = u64::from(slice_bits + level - 1);
        let one = module_cost(lib, ModuleKind::AdderN, width)?;
        total = total.plus(one.scaled(adders));
    }
    Ok(total)
}

/// Shift accumulator folding serial partial sums: `width` registers, a
/// `width`-bit barrel shifter, and a `width`-bit adder, where `width` is the
/// input width plus log2(height).
pub fn shift_accumulator_cost(
    lib: &TechLibrary,
    input_bits: u32,
    height: u32,
) -> Result<ModuleCost, CostError> {
    if height < 2 || !height.is_power_of_two() {
        return Err(CostError::InvalidShape(
            "accumulator height must be a power of two, at least 2",
        ));
    }
    if input_bits == 0 {
        return Err(CostError::InvalidShape("accumulator input width must be at least 1"));
    }
    let width = u64::from(input_bits + height.ilog2());
    let dff = lib.cell(CellKind::Dff);
    let shifter = module_cost(lib, ModuleKind::ShifterN, width)?;
    let adder = module_cost(lib, ModuleKind::AdderN, width)?;
    Ok(ModuleCost {
        area: dff.area * width + shifter.area + adder.area,
        delay: shifter.delay + adder.delay,
        energy: dff.energy * width + shifter.energy + adder.energy,
    })
}

/// Result fusion combining `weight_bits` per-plane accumulators into one
/// value: a balanced tree of `weight_bits - 1` adders, all at the
/// conservative fused width. Plane scaling is fixed-distance wiring and
/// costs nothing. A single plane needs no fusion.
pub fn result_fusion_cost(
    lib: &TechLibrary,
    weight_bits: u32,
    input_bits: u32,
    height: u32,
) -> Result<ModuleCost, CostError> {
    if height < 2 || !height.is_power_of_two() {
        return Err(CostError::InvalidShape(
            "fusion height must be a power of two, at least 2",
        ));
    }
    if weight_bits == 0 || input_bits == 0 {
        return Err(CostError::InvalidShape("fusion widths must be at least 1"));
    }
    if weight_bits == 1 {
        return Ok(ModuleCost::ZERO);
    }
    let width = u64::from(input_bits + height.ilog2() + weight_bits);
    let one = module_cost(lib, ModuleKind::AdderN, width)?;
    let levels = crate::techlib::select_levels(u64::from(weight_bits));
    Ok(ModuleCost {
        area: one.area * u64::from(weight_bits - 1),
        delay: one.delay * levels,
        energy: one.energy * u64::from(weight_bits - 1),
    })
}

/// Input pre-alignment for float macros: a max-exponent comparison tree
/// (one comparator and an exponent-wide mux column per node), then one
/// exponent subtractor and one mantissa shifter per input.
pub fn prealign_cost(
    lib: &TechLibrary,
    height: u32,
    exponent_bits: u32,
    mantissa_bits: u32,
) -> Result<ModuleCost, CostError> {
    if height < 2 || !height.is_power_of_two() {
        return Err(CostError::InvalidShape(
            "prealign height must be a power of two, at least 2",
        ));
    }
    if exponent_bits == 0 || mantissa_bits == 0 {
        return Err(CostError::InvalidShape("prealign widths must be at least 1"));
    }
    let cmp = module_cost(lib, ModuleKind::ComparatorN, u64::from(exponent_bits))?;
    let mux = lib.cell(CellKind::Mux2);
    let sub = module_cost(lib, ModuleKind::AdderN, u64::from(exponent_bits))?;
    let shift = module_cost(lib, ModuleKind::ShifterN, u64::from(mantissa_bits))?;
    let nodes = u64::from(height - 1);
    let levels = u64::from(height.ilog2());
    Ok(ModuleCost {
        area: (cmp.area + mux.area * u64::from(exponent_bits)) * nodes
            + (sub.area + shift.area) * u64::from(height),
        delay: (cmp.delay + lib.cell(CellKind::Mux2).delay.unwrap_or(Gates::ZERO)) * levels
            + sub.delay
            + shift.delay,
        energy: (cmp.energy + mux.energy * u64::from(exponent_bits)) * nodes
            + (sub.energy + shift.energy) * u64::from(height),
    })
}

/// Integer-to-float converter normalizing one fused raw value: a leading-one
/// detect chain of OR cells across the raw width, a raw-width normalization
/// shifter, and an exponent adder.
pub fn int_to_fp_converter_cost(
    lib: &TechLibrary,
    weight_bits: u32,
    mantissa_bits: u32,
    height: u32,
    exponent_bits: u32,
) -> Result<ModuleCost, CostError> {
    if height < 2 || !height.is_power_of_two() {
        return Err(CostError::InvalidShape(
            "converter height must be a power of two, at least 2",
        ));
    }
    if weight_bits == 0 || mantissa_bits == 0 || exponent_bits == 0 {
        return Err(CostError::InvalidShape("converter widths must be at least 1"));
    }
    let raw = u64::from(weight_bits + mantissa_bits + height.ilog2());
    let or = lib.cell(CellKind::Or);
    let shift = module_cost(lib, ModuleKind::ShifterN, raw)?;
    let add = module_cost(lib, ModuleKind::AdderN, u64::from(exponent_bits))?;
    Ok(ModuleCost {
        area: shift.area + add.area + or.area * raw,
        delay: or.delay.unwrap_or(Gates::ZERO) * raw + shift.delay + add.delay,
        energy: shift.energy + add.energy + or.energy * raw,
    })
}

/// Input buffer: registers for the full input block plus per-lane slice
/// selectors picking the active serial slice.
pub fn input_buffer_cost(
    lib: &TechLibrary,
    height: u32,
    input_bits: u32,
    bits_per_cycle: u32,
) -> Result<ModuleCost, CostError> {
    if height == 0 || input_bits == 0 || bits_per_cycle == 0 {
        return Err(CostError::InvalidShape("buffer dimensions must be at least 1"));
    }
    if !input_bits.is_multiple_of(bits_per_cycle) {
        return Err(CostError::InvalidShape(
            "buffer slice width must divide the input width",
        ));
    }
    let slices = u64::from(input_bits / bits_per_cycle);
    let dff = lib.cell(CellKind::Dff);
    let sel = module_cost(lib, ModuleKind::MuxN, slices)?;
    let bits = u64::from(height) * u64::from(input_bits);
    let lanes = u64::from(height) * u64::from(bits_per_cycle);
    Ok(ModuleCost {
        area: dff.area * bits + sel.area * lanes,
        delay: sel.delay,
        energy: dff.energy * bits + sel.energy * lanes,
    })
}

fn push(components: &mut Vec<ComponentCost>, kind: ComponentKind, cost: ModuleCost) {
    components.push(ComponentCost {
        kind,
        area: cost.area,
        delay: cost.delay,
        energy: cost.energy,
    });
}

/// Full-macro cost for a validated design point.
pub fn macro_cost(lib: &TechLibrary, dp: &DesignPoint) -> Result<MacroCost, CostError> {
    dp.validate()?;
    let columns = u64::from(dp.columns);
    let height = u64::from(dp.column_height);
    let share = u64::from(dp.weights_per_unit);
    let outputs = u64::from(dp.outputs());

    let mut components = Vec::new();

    let sram = lib.cell(CellKind::SramBit);
    let sram_bits = columns * height * share;
    push(
        &mut components,
        ComponentKind::SramArray,
        ModuleCost {
            area: sram.area * sram_bits,
            delay: sram.delay.unwrap_or(Gates::ZERO),
            energy: sram.energy * sram_bits,
        },
    );

    // Compute units: one weight selector and one slice-wide product row per
    // array position.
    let sel = module_cost(lib, ModuleKind::MuxN, share)?;
    let mul = module_cost(lib, ModuleKind::Multiplier1xN, u64::from(dp.bits_per_cycle))?;
    push(
        &mut components,
        ComponentKind::ComputeUnits,
        ModuleCost {
            area: (sel.area + mul.area) * (columns * height),
            delay: sel.delay + mul.delay,
            energy: (sel.energy + mul.energy) * (columns * height),
        },
    );

    let tree = adder_tree_cost(lib, dp.column_height, dp.bits_per_cycle)?;
    push(&mut components, ComponentKind::AdderTree, tree.scaled(columns));

    let accu = shift_accumulator_cost(lib, dp.input_bits, dp.column_height)?;
    push(&mut components, ComponentKind::ShiftAccumulator, accu.scaled(columns));

    let fusion = result_fusion_cost(lib, dp.weight_bits, dp.input_bits, dp.column_height)?;
    push(&mut components, ComponentKind::ResultFusion, fusion.scaled(outputs));

    let buffer = input_buffer_cost(lib, dp.column_height, dp.input_bits, dp.bits_per_cycle)?;
    push(&mut components, ComponentKind::InputBuffer, buffer);

    let mut stage_pre_array = buffer.delay;
    let mut convert_delay = Gates::ZERO;
    if dp.arch == Arch::FpPrealigned {
        let be = dp.exponent_bits.unwrap();
        let bm = dp.mantissa_bits.unwrap();
        let alig = prealign_cost(lib, dp.column_height, be, bm)?;
        push(&mut components, ComponentKind::Prealign, alig);
        let conv = int_to_fp_converter_cost(lib, dp.weight_bits, bm, dp.column_height, be)?;
        push(&mut components, ComponentKind::IntToFpConverter, conv.scaled(outputs));
        stage_pre_array = alig.delay;
        convert_delay = conv.delay;
    }

    let stage_array_to_accu = sel.delay + mul.delay + tree.delay + accu.delay;
    let stage_fusion_out = fusion.delay + convert_delay;

    // Integer cycle time is the worse of the two pipeline stages; the float
    // pre-array stage joins the maximum.
    let delay = match dp.arch {
        Arch::IntMultiply => stage_array_to_accu.max(stage_fusion_out),
        Arch::FpPrealigned => stage_pre_array
            .max(stage_array_to_accu)
            .max(stage_fusion_out),
    };

    let area = components.iter().map(|c| c.area).sum();
    let energy = components.iter().map(|c| c.energy).sum();

    Ok(MacroCost {
        components,
        stage_pre_array,
        stage_array_to_accu,
        stage_fusion_out,
        area,
        delay,
        energy,
        ops_per_cycle: dp.ops_per_cycle(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lib() -> TechLibrary {
        TechLibrary::default()
    }

    // Hand arithmetic oracle for ripple adders, straight from the cell
    // table, in exact tenths.
    fn adder(width: u64) -> (u64, u64, u64) {
        ((width - 1) * 57 + 43, (width - 1) * 33 + 25, (width - 1) * 84 + 69)
    }

    #[test]
    fn adder_tree_matches_per_level_hand_sum() {
        // Height 4, two-bit slices: two width-2 adders and one width-3 adder.
        let c = adder_tree_cost(&lib(), 4, 2).unwrap();
        assert_eq!(c.area.tenths(), 2 * adder(2).0 + adder(3).0);
        assert_eq!(c.area.as_f64(), 35.7);
        assert_eq!(c.delay.tenths(), adder(2).1 + adder(3).1);
    }

    #[test]
    fn minimal_adder_tree_is_one_half_adder() {
        let c = adder_tree_cost(&lib(), 2, 1).unwrap();
        assert_eq!(c.area.as_f64(), 4.3);
        assert_eq!(c.delay.as_f64(), 2.5);
        assert_eq!(c.energy.as_f64(), 6.9);
    }

    #[test]
    fn adder_tree_rejects_degenerate_heights() {
        assert!(adder_tree_cost(&lib(), 1, 1).is_err());
        assert!(adder_tree_cost(&lib(), 3, 1).is_err());
        assert!(adder_tree_cost(&lib(), 6, 1).is_err());
        assert!(adder_tree_cost(&lib(), 4, 0).is_err());
    }

    #[test]
    fn shift_accumulator_matches_hand_sum() {
        // Input width 8, height 16: accumulator width 12.
        let c = shift_accumulator_cost(&lib(), 8, 16).unwrap();
        let shifter_area = 12 * 11 * 22;
        let adder_area = adder(12).0;
        assert_eq!(c.area.tenths(), 12 * 66 + shifter_area + adder_area);
        assert_eq!(c.area.as_f64(), 436.6);
        // Width 12 pads to 16 for selection depth: 4 levels, squared for the
        // barrel composition.
        assert_eq!(c.delay.tenths(), 4 * (4 * 22) + adder(12).1);
    }

    #[test]
    fn fusion_of_single_plane_is_free() {
        assert_eq!(result_fusion_cost(&lib(), 1, 8, 16).unwrap(), ModuleCost::ZERO);
    }

    #[test]
    fn fusion_tree_counts_planes_minus_one_adders() {
        // Four planes over width 8 + 4 + 4 = 16.
        let c = result_fusion_cost(&lib(), 4, 8, 16).unwrap();
        assert_eq!(c.area.tenths(), 3 * adder(16).0);
        assert_eq!(c.delay.tenths(), 2 * adder(16).1);
        // Two planes over width 2 + 1 + 2 = 5.
        let c = result_fusion_cost(&lib(), 2, 2, 2).unwrap();
        assert_eq!(c.area.tenths(), adder(5).0);
        assert_eq!(c.delay.tenths(), adder(5).1);
    }

    #[test]
    fn prealign_matches_hand_sum() {
        // Two inputs: one tree node plus two subtract/shift lanes.
        let c = prealign_cost(&lib(), 2, 4, 4).unwrap();
        let node = adder(4).0 + 4 * 22;
        let lane = adder(4).0 + 4 * 3 * 22;
        assert_eq!(c.area.tenths(), node + 2 * lane);
        // Deep tree delay: log2(256) comparator+mux levels, then one
        // subtract and one mantissa shift.
        let c = prealign_cost(&lib(), 256, 8, 8).unwrap();
        let d_shift8 = 3 * (3 * 22);
        assert_eq!(c.delay.tenths(), 8 * (adder(8).1 + 22) + adder(8).1 + d_shift8);
    }

    #[test]
    fn converter_raw_width_tracks_mantissa_and_height() {
        // Raw width 8 + 8 + 8 = 24.
        let c = int_to_fp_converter_cost(&lib(), 8, 8, 256, 8).unwrap();
        let shift24 = (24 * 23 * 22, 5 * (5 * 22), 24 * 23 * 30);
        assert_eq!(c.area.tenths(), shift24.0 + adder(8).0 + 24 * 13);
        assert_eq!(c.delay.tenths(), 24 * 10 + shift24.1 + adder(8).1);
    }

    #[test]
    fn input_buffer_counts_registers_and_slice_muxes() {
        // Height 16, 8-bit inputs in 2-bit slices: 128 registers and 32
        // four-way selectors.
        let c = input_buffer_cost(&lib(), 16, 8, 2).unwrap();
        assert_eq!(c.area.tenths(), 128 * 66 + 32 * 3 * 22);
        assert_eq!(c.delay.tenths(), 2 * 22);
        // Full-width slices need no selection.
        let c = input_buffer_cost(&lib(), 4, 8, 8).unwrap();
        assert_eq!(c.area.tenths(), 32 * 66);
        assert_eq!(c.delay.tenths(), 0);
    }

    #[test]
    fn macro_area_equals_component_hand_sum() {
        let dp = DesignPoint::int(16, 4, 2, 2, 2, 4);
        let mc = macro_cost(&lib(), &dp).unwrap();
        // Independent composition from raw pieces, in tenths.
        let sram = 16 * 4 * 2 * 22;
        let units = 16 * 4 * (22 + 2 * 10);
        let tree = 16 * (2 * adder(2).0 + adder(3).0);
        let accu = {
            let w = 6;
            16 * (w * 66 + w * (w - 1) * 22 + adder(w).0)
        };
        let fusion = 8 * adder(2 + 4 + 2).0;
        let buffer = 4 * 4 * 66 + 4 * 2 * 22;
        let total = sram + units + tree + accu + fusion + buffer;
        assert_eq!(mc.area.tenths(), total);
        assert_eq!(mc.components.len(), 6);
    }

    #[test]
    fn integer_cycle_time_is_stage_maximum() {
        let dp = DesignPoint::int(16, 4, 2, 2, 2, 4);
        let mc = macro_cost(&lib(), &dp).unwrap();
        assert_eq!(mc.delay, mc.stage_array_to_accu.max(mc.stage_fusion_out));
        // Stage 1 hand value: selector, product gate, tree, accumulator.
        let sel = 22;
        let tree = adder(2).1 + adder(3).1;
        let accu = 3 * (3 * 22) + adder(6).1;
        assert_eq!(mc.stage_array_to_accu.tenths(), sel + 10 + tree + accu);
    }

    #[test]
    fn float_macro_reduces_to_integer_core_componentwise() {
        let fp = DesignPoint::fp(16, 8, 4, 2, 8, 8);
        let int = DesignPoint::int(16, 8, 4, 2, 8, 8);
        let f = macro_cost(&lib(), &fp).unwrap();
        let i = macro_cost(&lib(), &int).unwrap();
        for c in &i.components {
            let fc = f.component(c.kind).unwrap();
            assert_eq!((fc.area, fc.delay, fc.energy), (c.area, c.delay, c.energy), "{:?}", c.kind);
        }
        assert!(f.component(ComponentKind::Prealign).is_some());
        assert!(f.component(ComponentKind::IntToFpConverter).is_some());
        let extra: Gates = [ComponentKind::Prealign, ComponentKind::IntToFpConverter]
            .iter()
            .map(|k| f.component(*k).unwrap().area)
            .sum();
        assert_eq!(f.area, i.area + extra);
    }

    #[test]
    fn float_cycle_time_includes_converter_behind_fusion() {
        let fp = DesignPoint::fp(16, 8, 4, 2, 8, 8);
        let f = macro_cost(&lib(), &fp).unwrap();
        let conv = f.component(ComponentKind::IntToFpConverter).unwrap().delay;
        let fusion = result_fusion_cost(&lib(), 8, 8, 8).unwrap().delay;
        assert_eq!(f.stage_fusion_out, fusion + conv);
        assert_eq!(
            f.delay,
            f.stage_pre_array.max(f.stage_array_to_accu).max(f.stage_fusion_out)
        );
    }

    #[test]
    fn throughput_is_ops_per_cycle_over_delay() {
        let dp = DesignPoint::int(16, 4, 2, 2, 2, 4);
        let mc = macro_cost(&lib(), &dp).unwrap();
        let v = mc.objectives(1.0);
        let (num, den) = mc.ops_per_cycle;
        assert_eq!(num, 2 * 8 * 4 * 2);
        assert_eq!(den, 4);
        assert!((v.throughput - (num as f64 / den as f64) / v.delay).abs() < 1e-12);
    }

    #[test]
    fn activity_factor_scales_energy_only() {
        let dp = DesignPoint::int(16, 4, 2, 2, 2, 4);
        let mc = macro_cost(&lib(), &dp).unwrap();
        let dense = mc.objectives(1.0);
        let sparse = mc.objectives(0.9);
        assert_eq!(dense.area, sparse.area);
        assert_eq!(dense.delay, sparse.delay);
        assert_eq!(dense.throughput, sparse.throughput);
        assert!((sparse.energy - dense.energy * 0.9).abs() < 1e-9);
    }

    #[test]
    fn weight_capacity_identity() {
        let dp = DesignPoint::int(64, 1024, 16, 1, 8, 8);
        assert_eq!(dp.weight_capacity(), 131072);
    }

    #[test]
    fn validate_rejects_shape_violations() {
        assert!(DesignPoint::int(16, 4, 2, 2, 2, 4).validate().is_ok());
        // Height 1 has no adder tree.
        assert!(DesignPoint::int(16, 1, 2, 2, 2, 4).validate().is_err());
        // Non-power-of-two height and share.
        assert!(DesignPoint::int(16, 6, 2, 2, 2, 4).validate().is_err());
        assert!(DesignPoint::int(16, 4, 3, 2, 2, 4).validate().is_err());
        // Slice must divide the input width and not exceed it.
        assert!(DesignPoint::int(16, 4, 2, 3, 2, 4).validate().is_err());
        assert!(DesignPoint::int(16, 4, 2, 8, 2, 4).validate().is_err());
        // Weight width must divide columns.
        assert!(DesignPoint::int(15, 4, 2, 2, 2, 4).validate().is_err());
        // Float width coupling.
        assert!(DesignPoint::fp(16, 4, 2, 1, 8, 8).validate().is_ok());
        assert!(DesignPoint::fp(16, 4, 2, 1, 0, 8).validate().is_err());
        assert!(DesignPoint::fp(16, 4, 2, 1, 8, 1).validate().is_err());
        let mut bad = DesignPoint::fp(16, 4, 2, 1, 8, 8);
        bad.input_bits = 4;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn area_and_energy_are_monotone_in_each_dimension() {
        let base = DesignPoint::int(16, 8, 4, 2, 4, 8);
        let cost = |dp: &DesignPoint| {
            let mc = macro_cost(&lib(), dp).unwrap();
            (mc.area, mc.energy)
        };
        let (a0, e0) = cost(&base);
        let grow = [
            DesignPoint::int(32, 8, 4, 2, 4, 8),
            DesignPoint::int(16, 16, 4, 2, 4, 8),
            DesignPoint::int(16, 8, 8, 2, 4, 8),
            DesignPoint::int(16, 8, 4, 4, 4, 8),
            DesignPoint::int(16, 8, 4, 2, 8, 8),
        ];
        for dp in &grow {
            let (a, e) = cost(dp);
            assert!(a >= a0 && e >= e0, "{dp:?}");
        }
    }

    #[test]
    fn precision_presets_carry_reference_widths() {
        assert_eq!(Precision::Fp8.float_widths(), Some((4, 4)));
        assert_eq!(Precision::Fp16.float_widths(), Some((5, 11)));
        assert_eq!(Precision::Bf16.float_widths(), Some((8, 8)));
        assert_eq!(Precision::Fp32.float_widths(), Some((8, 24)));
        assert_eq!(Precision::Int8.weight_bits(), 8);
        assert_eq!(Precision::Int16.input_bits(), 16);
        assert_eq!(Precision::parse("BF16"), Some(Precision::Bf16));
        assert_eq!(Precision::parse("bf16"), None);
    }
}
