//! Gate-level structural netlists for validated design points.
//!
//! [`generate_structural_netlist`] expands a design point into a hierarchy of
//! module definitions whose primitive-cell inventory matches the analytic
//! cost model cell for cell: weighing the tally with a technology library
//! reproduces the macro area and per-cycle energy exactly, and
//! [`longest_path_delay`] reproduces the three pipeline-stage delays.
//!
//! The netlist is structural down to the seven primitive cells of the
//! technology library.  Storage cells expose both polarities (`Q`/`QB`), so
//! the NOR-based bit products read complemented operands without extra
//! inverters.  Integer netlists are simulation-faithful: the behavioral
//! evaluator in [`eval`] reproduces the bit-serial reference simulation.
//! Float netlists are inventory- and timing-faithful; their exponent
//! comparators and normalizer hookup mirror the adder-equivalent abstraction
//! the cost tables price rather than a signed-arithmetic gate mapping.
//!
//! Timing uses a block-level static analysis: each pipeline stage is a chain
//! of blocks, a block contributes the longest cell path inside its module
//! definition, and chained blocks add up.  Barrel shifters are the one
//! exception: their charge keeps the select-fanout term of the cost tables
//! (`levels² · mux delay`), which no mux-network path realizes cell by cell,
//! so the block charge comes from the library formula instead of the cells.

mod eval;
mod generate;
mod timing;
mod verilog;

pub use eval::{flatten, FlatCell, FlatNetlist, NetlistSim};
pub use generate::{
    accumulator_net, generate_structural_netlist, input_reg_path, output_port_name,
    sram_cell_path, tree_output_net,
};
pub use timing::longest_path_delay;
pub use verilog::{parse_netlist, serialize_verilog, CELL_DEFINITIONS_V};

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::costmodel::CostError;
use crate::techlib::{CellKind, Gates, TechLibrary};

/// Direction of a module port.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PortDir {
    Input,
    Output,
}

/// One scalar port of a module definition.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Port {
    pub name: String,
    pub dir: PortDir,
}

/// One internal scalar wire.  `init` pins the wire to a constant; such a
/// wire is driven by its declaration instead of an instance pin.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Net {
    pub name: String,
    pub init: Option<bool>,
}

/// What an instance instantiates: a primitive cell or another module
/// definition (by index into [`Netlist::modules`]).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InstKind {
    Cell(CellKind),
    Module(usize),
}

/// One instance inside a module definition.  Connections pair a pin (or
/// child port) name with a net of the enclosing module; output pins may be
/// left unlisted, input pins may not.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Instance {
    pub name: String,
    pub kind: InstKind,
    pub conns: Vec<(String, String)>,
}

/// One module definition: ports, internal wires, and instances (kept sorted
/// by instance name, which is also the serialization order).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModuleDef {
    pub name: String,
    pub ports: Vec<Port>,
    pub nets: Vec<Net>,
    pub instances: Vec<Instance>,
}

impl ModuleDef {
    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }
}

/// The three pipeline stages whose combinational delays bound the cycle.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Stage {
    /// Operand conditioning before the array: slice selection for integer
    /// points, exponent pre-alignment for float points.
    PreArray,
    /// Weight select, bit products, adder tree, and shifted accumulation.
    ArrayToAccu,
    /// Column fusion behind the accumulators, plus float normalization.
    FusionOut,
}

/// Functional role of a timing block.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BlockRole {
    /// Storage and register banks; never part of a combinational chain.
    WeightStore,
    InputRegs,
    AccumulatorRegs,
    /// Integer pre-array: picks the streamed slice bits out of the buffer.
    SliceSelect,
    /// Array chain: weight pick, bit products, tree levels, accumulation.
    WeightSelect,
    Multiply,
    SumStage,
    PartialShift,
    AccumulateAdd,
    /// Fusion chain: one block per adder level behind the accumulators.
    FuseLevel,
    /// Float pre-array chain: exponent compare tree, lane offsets, align.
    ExpCompare,
    LaneOffset,
    MantissaAlign,
    /// Float normalization chain behind fusion.
    LeadingOr,
    NormalizeShift,
    ExponentAdd,
}

impl BlockRole {
    /// Barrel-shifter roles charged by the library formula, not cell paths.
    pub fn is_barrel(self) -> bool {
        matches!(
            self,
            BlockRole::PartialShift | BlockRole::MantissaAlign | BlockRole::NormalizeShift
        )
    }
}

/// One node of the block-level timing view.  Blocks reference the module
/// definition realizing them; predecessors are other blocks of the same
/// stage whose outputs feed this block.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TimingBlock {
    pub role: BlockRole,
    pub stage: Option<Stage>,
    pub module: usize,
    /// Operand width the block works at; drives the barrel-shift charge.
    pub width: u64,
    pub preds: Vec<usize>,
}

/// A hierarchical structural netlist plus its block-level timing view.
///
/// Module definitions appear children-first; `modules[top]` is the top.
/// The timing view is derived state: it is rebuilt by generation and not
/// serialized, and structural equality ([`Netlist::same_structure`])
/// ignores it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Netlist {
    pub modules: Vec<ModuleDef>,
    pub top: usize,
    pub timing: Vec<TimingBlock>,
}

impl Netlist {
    pub fn top_module(&self) -> &ModuleDef {
        &self.modules[self.top]
    }

    /// Structural identity: same modules in the same order, same top.
    pub fn same_structure(&self, other: &Netlist) -> bool {
        self.top == other.top && self.modules == other.modules
    }
}

/// Errors from netlist generation, checking, analysis, or parsing.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RtlError {
    /// The design point itself is invalid.
    Design(CostError),
    /// A structural invariant does not hold.
    Structure {
        module: String,
        detail: &'static str,
    },
    /// A combinational cycle makes path analysis or evaluation impossible.
    CombinationalLoop { module: String },
    /// The text being parsed is not in the emitted structural subset.
    Parse {
        line: usize,
        detail: &'static str,
    },
    /// A storage, net, or port path does not exist in the design.
    UnknownPath(String),
}

impl fmt::Display for RtlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RtlError::Design(e) => write!(f, "invalid design point: {e}"),
            RtlError::Structure { module, detail } => {
                write!(f, "structural error in module `{module}`: {detail}")
            }
            RtlError::CombinationalLoop { module } => {
                write!(f, "combinational cycle in module `{module}`")
            }
            RtlError::Parse { line, detail } => write!(f, "parse error on line {line}: {detail}"),
            RtlError::UnknownPath(p) => write!(f, "unknown path `{p}`"),
        }
    }
}

impl core::error::Error for RtlError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            RtlError::Design(e) => Some(e),
            _ => None,
        }
    }
}

impl From<CostError> for RtlError {
    fn from(e: CostError) -> Self {
        RtlError::Design(e)
    }
}

/// All primitive cells, in library order.
pub const CELL_KINDS: [CellKind; 7] = [
    CellKind::Nor,
    CellKind::Or,
    CellKind::Mux2,
    CellKind::HalfAdder,
    CellKind::FullAdder,
    CellKind::Dff,
    CellKind::SramBit,
];

/// Input and output pin names of a primitive cell, in canonical order.
pub fn cell_pins(kind: CellKind) -> (&'static [&'static str], &'static [&'static str]) {
    match kind {
        CellKind::Nor | CellKind::Or => (&["A", "B"], &["Y"]),
        CellKind::Mux2 => (&["A", "B", "S"], &["Y"]),
        CellKind::HalfAdder => (&["A", "B"], &["S", "CO"]),
        CellKind::FullAdder => (&["A", "B", "CI"], &["S", "CO"]),
        CellKind::Dff => (&["D", "CLK"], &["Q", "QB"]),
        CellKind::SramBit => (&[], &["Q", "QB"]),
    }
}

/// Name a primitive cell carries in emitted Verilog.
pub fn cell_verilog_name(kind: CellKind) -> &'static str {
    match kind {
        CellKind::Nor => "NOR2",
        CellKind::Or => "OR2",
        CellKind::Mux2 => "MUX2",
        CellKind::HalfAdder => "HA",
        CellKind::FullAdder => "FA",
        CellKind::Dff => "DFF",
        CellKind::SramBit => "SRAM6T",
    }
}

/// Reverse of [`cell_verilog_name`].
pub fn cell_from_verilog(name: &str) -> Option<CellKind> {
    CELL_KINDS
        .iter()
        .copied()
        .find(|&k| cell_verilog_name(k) == name)
}

/// Primitive-cell census of a netlist, keyed by cell kind.
pub type CellTally = BTreeMap<CellKind, u64>;

/// Counts every primitive cell under one module definition, multiplying
/// through the hierarchy.  The count is additive over disjoint submodules.
pub fn tally_module(nl: &Netlist, index: usize) -> Result<CellTally, RtlError> {
    let mut memo: Vec<Option<CellTally>> = alloc::vec![None; nl.modules.len()];
    tally_rec(nl, index, &mut memo)
}

fn tally_rec(
    nl: &Netlist,
    index: usize,
    memo: &mut Vec<Option<CellTally>>,
) -> Result<CellTally, RtlError> {
    if let Some(t) = &memo[index] {
        return Ok(t.clone());
    }
    let def = &nl.modules[index];
    let mut tally = CellTally::new();
    for inst in &def.instances {
        match inst.kind {
            InstKind::Cell(kind) => *tally.entry(kind).or_insert(0) += 1,
            InstKind::Module(child) => {
                // Children precede their parents, which also rules out
                // instantiation cycles.
                if child >= index {
                    return Err(RtlError::Structure {
                        module: def.name.clone(),
                        detail: "module instantiated before its definition",
                    });
                }
                let sub = tally_rec(nl, child, memo)?;
                for (kind, count) in sub {
                    *tally.entry(kind).or_insert(0) += count;
                }
            }
        }
    }
    memo[index] = Some(tally.clone());
    Ok(tally)
}

/// Counts every primitive cell in the whole design (from the top module).
pub fn tally_cells(nl: &Netlist) -> Result<CellTally, RtlError> {
    tally_module(nl, nl.top)
}

/// Total area of a tally under a technology library.
pub fn tally_area(tally: &CellTally, lib: &TechLibrary) -> Gates {
    tally
        .iter()
        .map(|(&kind, &count)| lib.cell(kind).area * count)
        .sum()
}

/// Total per-cycle switching energy of a tally under a technology library
/// (full-activity charge; activity scaling happens at the objective layer).
pub fn tally_energy(tally: &CellTally, lib: &TechLibrary) -> Gates {
    tally
        .iter()
        .map(|(&kind, &count)| lib.cell(kind).energy * count)
        .sum()
}

/// Checks the structural invariants of a netlist:
///
/// * module references point at earlier definitions (so the hierarchy is
///   acyclic and children-first),
/// * port, net, and instance names are unique within a module,
/// * connections name real pins and real nets, at most once per pin,
/// * every net has exactly one driver (an input port, a constant
///   declaration, or one instance output pin),
/// * no cell input or child input port is left dangling,
/// * the timing view references real modules and earlier blocks.
pub fn check_netlist(nl: &Netlist) -> Result<(), RtlError> {
    if nl.top >= nl.modules.len() {
        return Err(RtlError::Structure {
            module: String::new(),
            detail: "top index out of range",
        });
    }
    for (index, def) in nl.modules.iter().enumerate() {
        check_module(nl, index, def)?;
    }
    for block in &nl.timing {
        if block.module >= nl.modules.len() {
            return Err(RtlError::Structure {
                module: String::new(),
                detail: "timing block references a missing module",
            });
        }
        if block.preds.iter().any(|&p| p >= nl.timing.len()) {
            return Err(RtlError::Structure {
                module: nl.modules[block.module].name.clone(),
                detail: "timing block references a missing predecessor",
            });
        }
    }
    Ok(())
}

fn check_module(nl: &Netlist, index: usize, def: &ModuleDef) -> Result<(), RtlError> {
    let err = |detail: &'static str| RtlError::Structure {
        module: def.name.clone(),
        detail,
    };

    // Name universes: ports and nets share the wire namespace.
    let mut wires: BTreeMap<&str, usize> = BTreeMap::new();
    let mut drivers: Vec<u32> = Vec::new();
    for p in &def.ports {
        if wires.insert(p.name.as_str(), drivers.len()).is_some() {
            return Err(err("duplicate port name"));
        }
        drivers.push(u32::from(p.dir == PortDir::Input));
    }
    for net in &def.nets {
        if wires.insert(net.name.as_str(), drivers.len()).is_some() {
            return Err(err("duplicate wire name"));
        }
        drivers.push(u32::from(net.init.is_some()));
    }

    let mut inst_names: BTreeSet<&str> = BTreeSet::new();
    for inst in &def.instances {
        if !inst_names.insert(inst.name.as_str()) {
            return Err(err("duplicate instance name"));
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut bound_inputs: BTreeSet<&str> = BTreeSet::new();
        for (pin, net) in &inst.conns {
            if !seen.insert(pin.as_str()) {
                return Err(err("pin connected twice"));
            }
            let Some(&wire) = wires.get(net.as_str()) else {
                return Err(err("connection references a missing wire"));
            };
            let is_output = match inst.kind {
                InstKind::Cell(kind) => {
                    let (ins, outs) = cell_pins(kind);
                    if ins.contains(&pin.as_str()) {
                        bound_inputs.insert(pin.as_str());
                        false
                    } else if outs.contains(&pin.as_str()) {
                        true
                    } else {
                        return Err(err("connection references a missing cell pin"));
                    }
                }
                InstKind::Module(child) => {
                    if child >= index {
                        return Err(err("module instantiated before its definition"));
                    }
                    match nl.modules[child].port(pin) {
                        Some(p) => {
                            if p.dir == PortDir::Input {
                                bound_inputs.insert(pin.as_str());
                            }
                            p.dir == PortDir::Output
                        }
                        None => return Err(err("connection references a missing child port")),
                    }
                }
            };
            if is_output {
                drivers[wire] += 1;
            }
        }
        // Every input pin / child input port must be bound.
        let inputs: Vec<&str> = match inst.kind {
            InstKind::Cell(kind) => cell_pins(kind).0.to_vec(),
            InstKind::Module(child) => nl.modules[child]
                .ports
                .iter()
                .filter(|p| p.dir == PortDir::Input)
                .map(|p| p.name.as_str())
                .collect(),
        };
        for pin in inputs {
            if !bound_inputs.contains(pin) {
                return Err(err("dangling instance input"));
            }
        }
    }

    for &wire in wires.values() {
        match drivers[wire] {
            0 => return Err(err("undriven wire")),
            1 => {}
            _ => return Err(err("wire driven more than once")),
        }
    }
    Ok(())
}
