//! Block-level static timing over generated netlists.
//!
//! Each pipeline stage is a chain of timing blocks.  A block's own charge is
//! the longest combinational cell path inside its module definition (module
//! inputs, constants, and storage outputs start at zero; storage inputs end
//! paths), and chained blocks add up, mirroring how the analytic model
//! composes per-module worst cases.  Barrel-shifter blocks are the
//! exception: they carry the select-fanout charge of the library formula,
//! which exceeds any single mux-network path, so their charge comes from
//! the library, not their cells.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::techlib::{module_cost, Gates, ModuleKind, TechLibrary};

use super::{cell_pins, InstKind, ModuleDef, Netlist, RtlError, Stage, TimingBlock};

/// Longest combinational path of one pipeline stage, as the sum of block
/// charges along the worst chain of `stage`-assigned timing blocks.
///
/// Fails on a combinational cycle inside a block, or when a block's module
/// contains anything but primitive cells.
pub fn longest_path_delay(
    nl: &Netlist,
    lib: &TechLibrary,
    stage: Stage,
) -> Result<Gates, RtlError> {
    let mut arrival: Vec<Option<Gates>> = vec![None; nl.timing.len()];
    let mut worst = Gates::ZERO;
    for (index, block) in nl.timing.iter().enumerate() {
        if block.stage != Some(stage) {
            continue;
        }
        let own = block_charge(nl, lib, block)?;
        let mut base = Gates::ZERO;
        for &p in &block.preds {
            if p < index {
                if let Some(t) = arrival[p] {
                    base = base.max(t);
                }
            }
        }
        let total = base + own;
        arrival[index] = Some(total);
        worst = worst.max(total);
    }
    Ok(worst)
}

fn block_charge(nl: &Netlist, lib: &TechLibrary, block: &TimingBlock) -> Result<Gates, RtlError> {
    if block.role.is_barrel() {
        let cost = module_cost(lib, ModuleKind::ShifterN, block.width).map_err(|_| {
            RtlError::Structure {
                module: nl.modules[block.module].name.clone(),
                detail: "invalid barrel-shifter width",
            }
        })?;
        return Ok(cost.delay);
    }
    module_internal_worst(&nl.modules[block.module], lib)
}

/// Longest combinational cell path inside one module definition.
///
/// Sources (arrival zero): input ports, constant wires, and storage-cell
/// outputs.  Sinks: storage-cell inputs and any wire.  Combinational cells
/// add their library delay on top of their worst input arrival.
pub(super) fn module_internal_worst(
    def: &ModuleDef,
    lib: &TechLibrary,
) -> Result<Gates, RtlError> {
    // Map wires to the combinational cell driving them, if any.
    let mut driver: BTreeMap<&str, usize> = BTreeMap::new();
    let mut comb: Vec<usize> = Vec::new();
    for (ci, inst) in def.instances.iter().enumerate() {
        let InstKind::Cell(kind) = inst.kind else {
            return Err(RtlError::Structure {
                module: def.name.clone(),
                detail: "timing block module must contain primitive cells only",
            });
        };
        if lib.cell(kind).delay.is_none() {
            continue; // storage: outputs are sources, inputs are sinks
        }
        comb.push(ci);
        let (_, outs) = cell_pins(kind);
        for (pin, net) in &inst.conns {
            if outs.contains(&pin.as_str()) {
                driver.insert(net.as_str(), ci);
            }
        }
    }

    // Kahn ordering over combinational cells.
    let mut indegree: BTreeMap<usize, usize> = BTreeMap::new();
    let mut readers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &ci in &comb {
        let inst = &def.instances[ci];
        let InstKind::Cell(kind) = inst.kind else { unreachable!() };
        let (ins, _) = cell_pins(kind);
        let mut deg = 0;
        for (pin, net) in &inst.conns {
            if ins.contains(&pin.as_str()) {
                if let Some(&dc) = driver.get(net.as_str()) {
                    deg += 1;
                    readers.entry(dc).or_default().push(ci);
                }
            }
        }
        indegree.insert(ci, deg);
    }

    let mut ready: Vec<usize> = comb
        .iter()
        .copied()
        .filter(|ci| indegree[ci] == 0)
        .collect();
    let mut wire_time: BTreeMap<&str, Gates> = BTreeMap::new();
    let mut processed = 0usize;
    let mut worst = Gates::ZERO;
    while let Some(ci) = ready.pop() {
        processed += 1;
        let inst = &def.instances[ci];
        let InstKind::Cell(kind) = inst.kind else { unreachable!() };
        let delay = lib.cell(kind).delay.unwrap_or(Gates::ZERO);
        let (ins, outs) = cell_pins(kind);
        let mut start = Gates::ZERO;
        for (pin, net) in &inst.conns {
            if ins.contains(&pin.as_str()) {
                if let Some(&t) = wire_time.get(net.as_str()) {
                    start = start.max(t);
                }
            }
        }
        let out_time = start + delay;
        worst = worst.max(out_time);
        for (pin, net) in &inst.conns {
            if outs.contains(&pin.as_str()) {
                wire_time.insert(net.as_str(), out_time);
            }
        }
        for &reader in readers.get(&ci).map(Vec::as_slice).unwrap_or(&[]) {
            let deg = indegree.get_mut(&reader).unwrap();
            *deg -= 1;
            if *deg == 0 {
                ready.push(reader);
            }
        }
    }
    if processed != comb.len() {
        return Err(RtlError::CombinationalLoop {
            module: def.name.clone(),
        });
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costmodel::{macro_cost, DesignPoint};
    use crate::dse::SplitMix64;
    use crate::rtlgen::generate_structural_netlist;
    use crate::techlib::CellKind;
    use crate::rtlgen::{BlockRole, Instance, Net, Port, PortDir};
    use alloc::string::ToString;
    use crate::rtlgen::InstKind;

    fn lib() -> TechLibrary {
        TechLibrary::default()
    }

    #[test]
    fn a_single_full_adder_charges_its_cell_delay() {
        let def = ModuleDef {
            name: "one".to_string(),
            ports: vec![
                Port { name: "a".to_string(), dir: PortDir::Input },
                Port { name: "b".to_string(), dir: PortDir::Input },
                Port { name: "ci".to_string(), dir: PortDir::Input },
                Port { name: "s".to_string(), dir: PortDir::Output },
                Port { name: "co".to_string(), dir: PortDir::Output },
            ],
            nets: vec![],
            instances: vec![Instance {
                name: "f".to_string(),
                kind: InstKind::Cell(CellKind::FullAdder),
                conns: vec![
                    ("A".to_string(), "a".to_string()),
                    ("B".to_string(), "b".to_string()),
                    ("CI".to_string(), "ci".to_string()),
                    ("S".to_string(), "s".to_string()),
                    ("CO".to_string(), "co".to_string()),
                ],
            }],
        };
        let worst = module_internal_worst(&def, &lib()).unwrap();
        assert_eq!(worst.tenths(), 33);
    }

    #[test]
    fn a_combinational_cycle_is_detected() {
        // Two NORs feeding each other.
        let def = ModuleDef {
            name: "latch".to_string(),
            ports: vec![Port { name: "a".to_string(), dir: PortDir::Input }],
            nets: vec![
                Net { name: "x".to_string(), init: None },
                Net { name: "y".to_string(), init: None },
            ],
            instances: vec![
                Instance {
                    name: "g0".to_string(),
                    kind: InstKind::Cell(CellKind::Nor),
                    conns: vec![
                        ("A".to_string(), "a".to_string()),
                        ("B".to_string(), "y".to_string()),
                        ("Y".to_string(), "x".to_string()),
                    ],
                },
                Instance {
                    name: "g1".to_string(),
                    kind: InstKind::Cell(CellKind::Nor),
                    conns: vec![
                        ("A".to_string(), "a".to_string()),
                        ("B".to_string(), "x".to_string()),
                        ("Y".to_string(), "y".to_string()),
                    ],
                },
            ],
        };
        assert!(matches!(
            module_internal_worst(&def, &lib()),
            Err(RtlError::CombinationalLoop { .. })
        ));
        // And through the stage-level entry point.
        let nl = Netlist {
            modules: vec![def],
            top: 0,
            timing: vec![TimingBlock {
                role: BlockRole::Multiply,
                stage: Some(Stage::ArrayToAccu),
                module: 0,
                width: 1,
                preds: vec![],
            }],
        };
        assert!(matches!(
            longest_path_delay(&nl, &lib(), Stage::ArrayToAccu),
            Err(RtlError::CombinationalLoop { .. })
        ));
    }

    #[test]
    fn a_tree_only_stage_sums_its_level_worst_cases() {
        // H=4, k=2: levels are one pair of width-2 adders and one width-3
        // adder; the stage charge is the sum of the two ripple worst cases.
        let dp = DesignPoint::int(1, 4, 1, 2, 1, 2);
        let nl = generate_structural_netlist(&dp).unwrap();
        let adder = |w: u64| (w - 1) * 33 + 25;
        // Full chain: product NOR + tree + barrel + accumulate adder.
        let r = 2 + 2;
        let shifter = 2 * 2 * 22; // select_levels(4)^2 * mux
        let expect = 10 + adder(2) + adder(3) + shifter + adder(r);
        let got = longest_path_delay(&nl, &lib(), Stage::ArrayToAccu).unwrap();
        assert_eq!(got.tenths(), expect);
    }

    use crate::rtlgen::generate::test_points;

    #[test]
    fn stage_delays_match_the_analytic_model_for_integer_points() {
        let lib = lib();
        let mut rng = SplitMix64::new(0x7137);
        for _ in 0..20 {
            let dp = test_points::random_int(&mut rng);
            let nl = generate_structural_netlist(&dp).unwrap();
            let cost = macro_cost(&lib, &dp).unwrap();
            let pre = longest_path_delay(&nl, &lib, Stage::PreArray).unwrap();
            let arr = longest_path_delay(&nl, &lib, Stage::ArrayToAccu).unwrap();
            let fus = longest_path_delay(&nl, &lib, Stage::FusionOut).unwrap();
            assert_eq!(pre.tenths(), cost.stage_pre_array.tenths(), "{dp:?}");
            assert_eq!(arr.tenths(), cost.stage_array_to_accu.tenths(), "{dp:?}");
            assert_eq!(fus.tenths(), cost.stage_fusion_out.tenths(), "{dp:?}");
        }
    }

    #[test]
    fn stage_delays_match_the_analytic_model_for_float_points() {
        let lib = lib();
        let mut rng = SplitMix64::new(0xf7a9);
        for _ in 0..20 {
            let dp = test_points::random_fp(&mut rng);
            let nl = generate_structural_netlist(&dp).unwrap();
            let cost = macro_cost(&lib, &dp).unwrap();
            let pre = longest_path_delay(&nl, &lib, Stage::PreArray).unwrap();
            let arr = longest_path_delay(&nl, &lib, Stage::ArrayToAccu).unwrap();
            let fus = longest_path_delay(&nl, &lib, Stage::FusionOut).unwrap();
            assert_eq!(pre.tenths(), cost.stage_pre_array.tenths(), "{dp:?}");
            assert_eq!(arr.tenths(), cost.stage_array_to_accu.tenths(), "{dp:?}");
            assert_eq!(fus.tenths(), cost.stage_fusion_out.tenths(), "{dp:?}");
        }
    }
}
