//! Hierarchy flattening and cycle-accurate behavioral evaluation.
//!
//! [`flatten`] expands a checked netlist into one flat list of primitive
//! cells with dotted instance paths.  [`NetlistSim`] then evaluates the flat
//! design: storage state (flops and storage bits) is set explicitly or
//! captured on [`NetlistSim::clock`], combinational cells settle in
//! topological order, and any net can be read back by its flat name.  This
//! is the ground truth used to confirm that generated integer netlists
//! compute the same results as the bit-serial reference simulation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::techlib::CellKind;

use super::{check_netlist, InstKind, Netlist, PortDir, RtlError};

/// One primitive cell of a flattened design.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FlatCell {
    /// Dotted instance path from the top module (for example
    /// `c0.ws.b_1_0`); top-level cells carry their bare instance name.
    pub path: String,
    pub kind: CellKind,
    /// Bound pins as `(pin name, net index)`; unbound output pins are
    /// absent.
    pub pins: Vec<(String, usize)>,
}

impl FlatCell {
    /// Net index bound to `pin`, if bound.
    pub fn pin(&self, pin: &str) -> Option<usize> {
        self.pins.iter().find(|(p, _)| p == pin).map(|&(_, n)| n)
    }
}

/// A netlist expanded to primitive cells and scalar nets.
///
/// Net names are dotted paths: top-level wires and ports keep their bare
/// names, wires inside an instance are prefixed with its path, and an
/// unbound child output port becomes a net named after the port itself.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FlatNetlist {
    /// Name of the top module the flat design came from.
    pub top_name: String,
    /// Flat net names, in allocation order (parents before children).
    pub nets: Vec<String>,
    /// Constant value of each net, if pinned by its declaration.
    pub init: Vec<Option<bool>>,
    /// Every primitive cell, in hierarchical instance order.
    pub cells: Vec<FlatCell>,
    /// Top-level input ports as `(name, net index)`.
    pub inputs: Vec<(String, usize)>,
    /// Top-level output ports as `(name, net index)`.
    pub outputs: Vec<(String, usize)>,
    index: BTreeMap<String, usize>,
}

impl FlatNetlist {
    /// Index of the net with the given flat name.
    pub fn net_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    fn add_net(&mut self, name: String, init: Option<bool>) -> Result<usize, RtlError> {
        let idx = self.nets.len();
        if self.index.insert(name.clone(), idx).is_some() {
            return Err(RtlError::Structure {
                module: self.top_name.clone(),
                detail: "flattening produced a duplicate net name",
            });
        }
        self.nets.push(name);
        self.init.push(init);
        Ok(idx)
    }
}

/// Expands a netlist into its flat primitive-cell form.  The netlist is
/// checked first, so the result satisfies the structural invariants (one
/// driver per net, no dangling inputs).
pub fn flatten(nl: &Netlist) -> Result<FlatNetlist, RtlError> {
    check_netlist(nl)?;
    let top = nl.top_module();
    let mut flat = FlatNetlist {
        top_name: top.name.clone(),
        nets: Vec::new(),
        init: Vec::new(),
        cells: Vec::new(),
        inputs: Vec::new(),
        outputs: Vec::new(),
        index: BTreeMap::new(),
    };
    let mut bound: BTreeMap<&str, usize> = BTreeMap::new();
    for port in &top.ports {
        let idx = flat.add_net(port.name.clone(), None)?;
        bound.insert(port.name.as_str(), idx);
        match port.dir {
            PortDir::Input => flat.inputs.push((port.name.clone(), idx)),
            PortDir::Output => flat.outputs.push((port.name.clone(), idx)),
        }
    }
    expand(nl, nl.top, "", &bound, &mut flat)?;
    Ok(flat)
}

fn expand(
    nl: &Netlist,
    module: usize,
    prefix: &str,
    bound: &BTreeMap<&str, usize>,
    flat: &mut FlatNetlist,
) -> Result<(), RtlError> {
    let def = &nl.modules[module];
    // Wire namespace of this module instance: bound ports, then local nets,
    // then fresh nets for any output port the parent left unbound.
    let mut wires: BTreeMap<&str, usize> = bound.clone();
    for port in &def.ports {
        if !wires.contains_key(port.name.as_str()) {
            let idx = flat.add_net(format!("{prefix}{}", port.name), None)?;
            wires.insert(port.name.as_str(), idx);
        }
    }
    for net in &def.nets {
        let idx = flat.add_net(format!("{prefix}{}", net.name), net.init)?;
        wires.insert(net.name.as_str(), idx);
    }
    for inst in &def.instances {
        let path = format!("{prefix}{}", inst.name);
        match inst.kind {
            InstKind::Cell(kind) => {
                let pins = inst
                    .conns
                    .iter()
                    .map(|(pin, net)| (pin.clone(), wires[net.as_str()]))
                    .collect();
                flat.cells.push(FlatCell { path, kind, pins });
            }
            InstKind::Module(child) => {
                let child_bound: BTreeMap<&str, usize> = inst
                    .conns
                    .iter()
                    .map(|(pin, net)| (pin.as_str(), wires[net.as_str()]))
                    .collect();
                expand(nl, child, &format!("{path}."), &child_bound, flat)?;
            }
        }
    }
    Ok(())
}

/// Cycle-accurate evaluator over a flattened netlist.
///
/// Flops and storage bits are state elements: their state is written with
/// [`NetlistSim::set_storage`] (or captured from the data pin by
/// [`NetlistSim::clock`]) and appears on their `Q`/`QB` pins when the design
/// settles.  The clock port itself carries no meaning here — sequencing is
/// explicit through `settle` and `clock`.
pub struct NetlistSim {
    flat: FlatNetlist,
    /// Evaluation order over combinational cells.
    order: Vec<usize>,
    /// Current value of every net.
    values: Vec<bool>,
    /// Current state of every cell (meaningful for flops and storage bits).
    state: Vec<bool>,
    cell_index: BTreeMap<String, usize>,
}

impl NetlistSim {
    /// Flattens the netlist and prepares the evaluation order.
    pub fn new(nl: &Netlist) -> Result<NetlistSim, RtlError> {
        let flat = flatten(nl)?;
        let order = comb_order(&flat)?;
        let values = alloc::vec![false; flat.nets.len()];
        let state = alloc::vec![false; flat.cells.len()];
        let cell_index = flat
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| (c.path.clone(), i))
            .collect();
        Ok(NetlistSim { flat, order, values, state, cell_index })
    }

    /// The flattened design under evaluation.
    pub fn flat(&self) -> &FlatNetlist {
        &self.flat
    }

    /// Clears every net value and every storage state to zero.
    pub fn reset(&mut self) {
        self.values.iter_mut().for_each(|v| *v = false);
        self.state.iter_mut().for_each(|s| *s = false);
    }

    /// Drives a top-level input port.
    pub fn set_input(&mut self, port: &str, value: bool) -> Result<(), RtlError> {
        let net = self
            .flat
            .inputs
            .iter()
            .find(|(name, _)| name == port)
            .map(|&(_, net)| net)
            .ok_or_else(|| RtlError::UnknownPath(String::from(port)))?;
        self.values[net] = value;
        Ok(())
    }

    /// Sets the state of the flop or storage bit at `path`.
    pub fn set_storage(&mut self, path: &str, value: bool) -> Result<(), RtlError> {
        let &cell = self
            .cell_index
            .get(path)
            .ok_or_else(|| RtlError::UnknownPath(String::from(path)))?;
        match self.flat.cells[cell].kind {
            CellKind::Dff | CellKind::SramBit => {
                self.state[cell] = value;
                Ok(())
            }
            _ => Err(RtlError::UnknownPath(String::from(path))),
        }
    }

    /// Reads the settled value of a net by its flat name (top-level ports
    /// included).
    pub fn net(&self, name: &str) -> Result<bool, RtlError> {
        let net = self
            .flat
            .net_index(name)
            .ok_or_else(|| RtlError::UnknownPath(String::from(name)))?;
        Ok(self.values[net])
    }

    /// Assembles a little-endian word from the nets named by `bit_net`.
    pub fn read_word(
        &self,
        bits: u32,
        bit_net: impl Fn(u32) -> String,
    ) -> Result<u128, RtlError> {
        let mut word = 0u128;
        for bit in 0..bits {
            if self.net(&bit_net(bit))? {
                word |= 1u128 << bit;
            }
        }
        Ok(word)
    }

    /// Drives the input ports named by `bit_port` with a little-endian word.
    pub fn drive_word(
        &mut self,
        bits: u32,
        value: u128,
        bit_port: impl Fn(u32) -> String,
    ) -> Result<(), RtlError> {
        for bit in 0..bits {
            self.set_input(&bit_port(bit), (value >> bit) & 1 == 1)?;
        }
        Ok(())
    }

    /// Propagates constants, storage outputs, and combinational logic until
    /// every net holds its settled value.
    pub fn settle(&mut self) {
        for (net, init) in self.flat.init.iter().enumerate() {
            if let Some(v) = *init {
                self.values[net] = v;
            }
        }
        for (ci, cell) in self.flat.cells.iter().enumerate() {
            if matches!(cell.kind, CellKind::Dff | CellKind::SramBit) {
                if let Some(q) = cell.pin("Q") {
                    self.values[q] = self.state[ci];
                }
                if let Some(qb) = cell.pin("QB") {
                    self.values[qb] = !self.state[ci];
                }
            }
        }
        for idx in 0..self.order.len() {
            let ci = self.order[idx];
            match self.flat.cells[ci].kind {
                CellKind::Nor => {
                    let y = !(self.input(ci, "A") | self.input(ci, "B"));
                    self.write(ci, "Y", y);
                }
                CellKind::Or => {
                    let y = self.input(ci, "A") | self.input(ci, "B");
                    self.write(ci, "Y", y);
                }
                CellKind::Mux2 => {
                    let y = if self.input(ci, "S") {
                        self.input(ci, "B")
                    } else {
                        self.input(ci, "A")
                    };
                    self.write(ci, "Y", y);
                }
                CellKind::HalfAdder => {
                    let (a, b) = (self.input(ci, "A"), self.input(ci, "B"));
                    self.write(ci, "S", a ^ b);
                    self.write(ci, "CO", a & b);
                }
                CellKind::FullAdder => {
                    let (a, b, c) =
                        (self.input(ci, "A"), self.input(ci, "B"), self.input(ci, "CI"));
                    self.write(ci, "S", a ^ b ^ c);
                    self.write(ci, "CO", (a & b) | (a & c) | (b & c));
                }
                CellKind::Dff | CellKind::SramBit => unreachable!("storage is not scheduled"),
            }
        }
    }

    fn input(&self, ci: usize, pin: &str) -> bool {
        self.values[self.flat.cells[ci].pin(pin).expect("checked input pin")]
    }

    /// Captures every flop's data pin into its state.  Call after
    /// [`NetlistSim::settle`]; all flops capture the same settled values.
    pub fn clock(&mut self) {
        for ci in 0..self.flat.cells.len() {
            let cell = &self.flat.cells[ci];
            if cell.kind == CellKind::Dff {
                let d = cell.pin("D").expect("checked input pin");
                self.state[ci] = self.values[d];
            }
        }
    }

    fn write(&mut self, ci: usize, pin: &str, value: bool) {
        if let Some(net) = self.flat.cells[ci].pin(pin) {
            self.values[net] = value;
        }
    }
}

/// Topological order over combinational cells; storage outputs, constants,
/// and input ports are sources.
fn comb_order(flat: &FlatNetlist) -> Result<Vec<usize>, RtlError> {
    let is_comb =
        |kind: CellKind| !matches!(kind, CellKind::Dff | CellKind::SramBit);
    // Which combinational cell drives each net, if any.
    let mut driver: Vec<Option<usize>> = alloc::vec![None; flat.nets.len()];
    for (ci, cell) in flat.cells.iter().enumerate() {
        if !is_comb(cell.kind) {
            continue;
        }
        let (_, outs) = super::cell_pins(cell.kind);
        for &pin in outs {
            if let Some(net) = cell.pin(pin) {
                driver[net] = Some(ci);
            }
        }
    }
    // Readers of each net, counted once per input pin.
    let mut readers: Vec<Vec<usize>> = alloc::vec![Vec::new(); flat.nets.len()];
    let mut indeg: Vec<usize> = alloc::vec![0; flat.cells.len()];
    let mut comb_count = 0usize;
    for (ci, cell) in flat.cells.iter().enumerate() {
        if !is_comb(cell.kind) {
            continue;
        }
        comb_count += 1;
        let (ins, _) = super::cell_pins(cell.kind);
        for &pin in ins {
            let net = cell.pin(pin).expect("checked input pin");
            if driver[net].is_some() {
                readers[net].push(ci);
                indeg[ci] += 1;
            }
        }
    }
    let mut queue: Vec<usize> = flat
        .cells
        .iter()
        .enumerate()
        .filter(|(ci, c)| is_comb(c.kind) && indeg[*ci] == 0)
        .map(|(ci, _)| ci)
        .collect();
    let mut order = Vec::with_capacity(comb_count);
    let mut head = 0;
    while head < queue.len() {
        let ci = queue[head];
        head += 1;
        order.push(ci);
        let (_, outs) = super::cell_pins(flat.cells[ci].kind);
        for &pin in outs {
            if let Some(net) = flat.cells[ci].pin(pin) {
                for &reader in &readers[net] {
                    indeg[reader] -= 1;
                    if indeg[reader] == 0 {
                        queue.push(reader);
                    }
                }
            }
        }
    }
    if order.len() != comb_count {
        return Err(RtlError::CombinationalLoop { module: flat.top_name.clone() });
    }
    Ok(order)
}
