//! Expansion of a design point into a structural netlist.
//!
//! The hierarchy mirrors the architecture: a `column` module per physical
//! column (weight storage, weight select, bit products, adder-tree levels,
//! shifted accumulation, result registers), a shared input buffer, one
//! fusion tree per output, and for float points a pre-alignment front end
//! plus one normalizer per output.  Every module definition either contains
//! primitive cells only (the timing blocks) or instantiates other modules
//! (the containers), and all instance identifiers are deterministic, so two
//! generations of the same point are identical.

// Index loops are deliberate here: the loop variable names both the wire
// (through its identifier) and the element, mirroring the hardware indexing.
#![allow(clippy::needless_range_loop)]

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::costmodel::{Arch, DesignPoint};
use crate::techlib::{select_levels, CellKind};

use super::{
    check_netlist, BlockRole, InstKind, Instance, ModuleDef, Net, Netlist, Port, PortDir,
    RtlError, Stage, TimingBlock,
};

/// Incremental builder for one module definition.
struct DefBuilder {
    name: String,
    ports: Vec<Port>,
    nets: Vec<Net>,
    instances: Vec<Instance>,
    has_const0: bool,
}

impl DefBuilder {
    fn new(name: String) -> Self {
        DefBuilder {
            name,
            ports: Vec::new(),
            nets: Vec::new(),
            instances: Vec::new(),
            has_const0: false,
        }
    }

    fn input(&mut self, name: String) -> String {
        self.ports.push(Port { name: name.clone(), dir: PortDir::Input });
        name
    }

    fn output(&mut self, name: String) -> String {
        self.ports.push(Port { name: name.clone(), dir: PortDir::Output });
        name
    }

    fn wire(&mut self, name: String) -> String {
        self.nets.push(Net { name: name.clone(), init: None });
        name
    }

    /// The module-local all-zero wire, declared on first use.
    fn const0(&mut self) -> String {
        if !self.has_const0 {
            self.nets.push(Net { name: String::from("const0"), init: Some(false) });
            self.has_const0 = true;
        }
        String::from("const0")
    }

    fn cell(&mut self, kind: CellKind, name: String, conns: Vec<(&'static str, String)>) {
        self.instances.push(Instance {
            name,
            kind: InstKind::Cell(kind),
            conns: conns.into_iter().map(|(p, n)| (String::from(p), n)).collect(),
        });
    }

    fn child(&mut self, module: usize, name: String, conns: Vec<(String, String)>) {
        self.instances.push(Instance { name, kind: InstKind::Module(module), conns });
    }

    fn finish(mut self) -> ModuleDef {
        self.instances.sort_by(|a, b| a.name.cmp(&b.name));
        ModuleDef {
            name: self.name,
            ports: self.ports,
            nets: self.nets,
            instances: self.instances,
        }
    }
}

fn clog2(n: usize) -> usize {
    select_levels(n as u64) as usize
}

/// Ripple adder over `a` and `b`: a half adder at bit 0 and full adders
/// above, carries chained.  `sums` (when given) and `carry` (when given)
/// bind the outputs; unbound output pins float.
fn ripple_adder(
    b: &mut DefBuilder,
    prefix: &str,
    a: &[String],
    bb: &[String],
    sums: Option<&[String]>,
    carry: Option<String>,
) {
    let w = a.len();
    let mut cin: Option<String> = None;
    for t in 0..w {
        let last = t + 1 == w;
        let co = if last {
            carry.clone()
        } else {
            Some(b.wire(format!("{prefix}_c{t}")))
        };
        let mut conns: Vec<(&'static str, String)> =
            vec![("A", a[t].clone()), ("B", bb[t].clone())];
        if let Some(ci) = cin.take() {
            conns.push(("CI", ci));
        }
        if let Some(s) = sums {
            conns.push(("S", s[t].clone()));
        }
        if let Some(c) = co.clone() {
            conns.push(("CO", c));
        }
        let kind = if t == 0 { CellKind::HalfAdder } else { CellKind::FullAdder };
        b.cell(kind, format!("{prefix}_b{t}"), conns);
        cin = co;
    }
}

/// Binary-select mux network over `cands` (select value i picks candidate
/// i).  Uses `cands.len() - 1` two-way muxes at depth `clog2(len)`.  `out`
/// (when given) names the final output net; candidates must then number at
/// least two.
fn mux_tree(
    b: &mut DefBuilder,
    prefix: &str,
    cands: &[String],
    sel: &[String],
    out: Option<String>,
) -> String {
    if cands.len() == 1 {
        return cands[0].clone();
    }
    let bits = clog2(cands.len());
    let half = 1usize << (bits - 1);
    let lo = mux_tree(b, &format!("{prefix}l"), &cands[..half], &sel[..bits - 1], None);
    let hi = mux_tree(b, &format!("{prefix}h"), &cands[half..], &sel[..bits - 1], None);
    let y = match out {
        Some(o) => o,
        None => b.wire(format!("{prefix}y")),
    };
    b.cell(
        CellKind::Mux2,
        format!("{prefix}m"),
        vec![("A", lo), ("B", hi), ("S", sel[bits - 1].clone()), ("Y", y.clone())],
    );
    y
}

/// `h * l` storage bits; only the complement read port is used downstream.
fn weight_store(h: usize, l: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("weight_store"));
    for i in 0..h {
        for r in 0..l {
            let q = b.output(format!("wqb_{i}_{r}"));
            b.cell(CellKind::SramBit, format!("b_{i}_{r}"), vec![("QB", q)]);
        }
    }
    b.finish()
}

/// Per array position, an `l:1` selector over the stored complement bits.
fn weight_select(h: usize, l: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("weight_select"));
    let mut cands: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        cands.push((0..l).map(|r| b.input(format!("wqb_{i}_{r}"))).collect());
    }
    let sel: Vec<String> = (0..clog2(l)).map(|s| b.input(format!("rs_{s}"))).collect();
    for i in 0..h {
        let out = b.output(format!("wb_{i}"));
        mux_tree(&mut b, &format!("w{i}"), &cands[i], &sel, Some(out));
    }
    b.finish()
}

/// The NOR array: one product bit per (lane, stream bit).  Both operands
/// arrive complemented, so each NOR computes the true AND.
fn bit_products(h: usize, k: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("bit_products"));
    let wb: Vec<String> = (0..h).map(|i| b.input(format!("wb_{i}"))).collect();
    let mut xb: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        xb.push((0..k).map(|j| b.input(format!("xb_{i}_{j}"))).collect());
    }
    for i in 0..h {
        for j in 0..k {
            let y = b.output(format!("p_{i}_{j}"));
            b.cell(
                CellKind::Nor,
                format!("m_{i}_{j}"),
                vec![("A", wb[i].clone()), ("B", xb[i][j].clone()), ("Y", y)],
            );
        }
    }
    b.finish()
}

/// One adder-tree level: `h >> level` ripple adders of width
/// `k + level - 1`, each emitting its carry as the new most significant bit.
fn sum_stage(level: usize, h: usize, k: usize) -> ModuleDef {
    let adders = h >> level;
    let w = k + level - 1;
    let mut b = DefBuilder::new(format!("sum_stage_{level}"));
    let mut a: Vec<Vec<String>> = Vec::new();
    let mut bv: Vec<Vec<String>> = Vec::new();
    for m in 0..adders {
        a.push((0..w).map(|t| b.input(format!("a_{m}_{t}"))).collect());
        bv.push((0..w).map(|t| b.input(format!("b_{m}_{t}"))).collect());
    }
    let mut s: Vec<Vec<String>> = Vec::new();
    for m in 0..adders {
        s.push((0..=w).map(|t| b.output(format!("s_{m}_{t}"))).collect());
    }
    for m in 0..adders {
        let carry = s[m][w].clone();
        ripple_adder(&mut b, &format!("a{m}"), &a[m], &bv[m], Some(&s[m][..w]), Some(carry));
    }
    b.finish()
}

/// Left barrel shifter: output bit `t` selects among `d[t - s]` over all
/// shift amounts `s`, zero-filling from below.
fn partial_shift(r: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("partial_shift"));
    let d: Vec<String> = (0..r).map(|t| b.input(format!("d_{t}"))).collect();
    let sel: Vec<String> = (0..clog2(r)).map(|s| b.input(format!("sh_{s}"))).collect();
    let zero = b.const0();
    for t in 0..r {
        let cands: Vec<String> = (0..r)
            .map(|s| if s <= t { d[t - s].clone() } else { zero.clone() })
            .collect();
        let out = b.output(format!("q_{t}"));
        mux_tree(&mut b, &format!("q{t}"), &cands, &sel, Some(out));
    }
    b.finish()
}

/// The accumulation adder: shifted partial plus held value, modulo the
/// accumulator width.
fn accumulate_add(r: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("accumulate_add"));
    let a: Vec<String> = (0..r).map(|t| b.input(format!("a_{t}"))).collect();
    let bv: Vec<String> = (0..r).map(|t| b.input(format!("b_{t}"))).collect();
    let s: Vec<String> = (0..r).map(|t| b.output(format!("s_{t}"))).collect();
    ripple_adder(&mut b, "a", &a, &bv, Some(&s), None);
    b.finish()
}

/// The accumulator register bank.
fn accumulator_regs(r: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("accumulator_regs"));
    let d: Vec<String> = (0..r).map(|t| b.input(format!("d_{t}"))).collect();
    let clk = b.input(String::from("clk"));
    for t in 0..r {
        let q = b.output(format!("q_{t}"));
        b.cell(
            CellKind::Dff,
            format!("r_{t}"),
            vec![("D", d[t].clone()), ("CLK", clk.clone()), ("Q", q)],
        );
    }
    b.finish()
}

/// The input register bank: one flop per (lane, operand bit), exposing both
/// polarities.
fn input_regs(h: usize, bx: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("input_regs"));
    let mut d: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        d.push((0..bx).map(|v| b.input(format!("d_{i}_{v}"))).collect());
    }
    let clk = b.input(String::from("clk"));
    let mut q: Vec<Vec<String>> = Vec::new();
    let mut qb: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        q.push((0..bx).map(|v| b.output(format!("q_{i}_{v}"))).collect());
        qb.push((0..bx).map(|v| b.output(format!("qb_{i}_{v}"))).collect());
    }
    for i in 0..h {
        for v in 0..bx {
            b.cell(
                CellKind::Dff,
                format!("x_{i}_{v}"),
                vec![
                    ("D", d[i][v].clone()),
                    ("CLK", clk.clone()),
                    ("Q", q[i][v].clone()),
                    ("QB", qb[i][v].clone()),
                ],
            );
        }
    }
    b.finish()
}

/// Per (lane, stream bit), a selector picking the complement bit of the
/// current slice out of the register bank.
fn slice_select(h: usize, bx: usize, k: usize) -> ModuleDef {
    let t = bx / k;
    let mut b = DefBuilder::new(String::from("slice_select"));
    let mut qb: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        qb.push((0..bx).map(|v| b.input(format!("xqb_{i}_{v}"))).collect());
    }
    let sel: Vec<String> = (0..clog2(t)).map(|s| b.input(format!("cyc_{s}"))).collect();
    for i in 0..h {
        for j in 0..k {
            let cands: Vec<String> = (0..t).map(|c| qb[i][k * c + j].clone()).collect();
            let out = b.output(format!("xb_{i}_{j}"));
            mux_tree(&mut b, &format!("s{i}_{j}"), &cands, &sel, Some(out));
        }
    }
    b.finish()
}

/// One fusion level: `adders` ripple adders at the fused width.
fn fuse_level(level: usize, adders: usize, w: usize) -> ModuleDef {
    let mut b = DefBuilder::new(format!("fuse_level_{level}"));
    let mut a: Vec<Vec<String>> = Vec::new();
    let mut bv: Vec<Vec<String>> = Vec::new();
    for m in 0..adders {
        a.push((0..w).map(|t| b.input(format!("a_{m}_{t}"))).collect());
        bv.push((0..w).map(|t| b.input(format!("b_{m}_{t}"))).collect());
    }
    let mut s: Vec<Vec<String>> = Vec::new();
    for m in 0..adders {
        s.push((0..w).map(|t| b.output(format!("s_{m}_{t}"))).collect());
    }
    for m in 0..adders {
        ripple_adder(&mut b, &format!("a{m}"), &a[m], &bv[m], Some(&s[m]), None);
    }
    b.finish()
}

/// The fusion tree for one output: pairs column accumulators level by level
/// until one fused word remains.
fn result_fuse(levels: &[(usize, usize)], bw: usize, w: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("result_fuse"));
    let mut ops: Vec<Vec<String>> = Vec::new();
    for p in 0..bw {
        ops.push((0..w).map(|t| b.input(format!("d_{p}_{t}"))).collect());
    }
    let y: Vec<String> = (0..w).map(|t| b.output(format!("y_{t}"))).collect();
    for (level, &(module, adders)) in levels.iter().enumerate() {
        let level = level + 1;
        let last = level == levels.len();
        let mut conns: Vec<(String, String)> = Vec::new();
        let mut next: Vec<Vec<String>> = Vec::new();
        for m in 0..adders {
            let sums: Vec<String> = if last {
                y.clone()
            } else {
                (0..w).map(|t| b.wire(format!("f{level}_{m}_{t}"))).collect()
            };
            for t in 0..w {
                conns.push((format!("a_{m}_{t}"), ops[2 * m][t].clone()));
                conns.push((format!("b_{m}_{t}"), ops[2 * m + 1][t].clone()));
                conns.push((format!("s_{m}_{t}"), sums[t].clone()));
            }
            next.push(sums);
        }
        if ops.len() > 2 * adders {
            next.push(ops[2 * adders].clone());
        }
        b.child(module, format!("l{level}"), conns);
        ops = next;
    }
    b.finish()
}

/// One column: storage, weight select, bit products, tree levels, shifted
/// accumulation, and the result registers.
#[allow(clippy::too_many_arguments)]
fn column(
    idx_ws: usize,
    idx_wsel: Option<usize>,
    idx_mul: usize,
    idx_stages: &[usize],
    idx_shf: usize,
    idx_add: usize,
    idx_regs: usize,
    h: usize,
    l: usize,
    k: usize,
    r: usize,
) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("column"));
    let mut xb: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        xb.push((0..k).map(|j| b.input(format!("xb_{i}_{j}"))).collect());
    }
    let rs: Vec<String> = (0..clog2(l)).map(|s| b.input(format!("rs_{s}"))).collect();
    let sh: Vec<String> = (0..clog2(r)).map(|s| b.input(format!("sh_{s}"))).collect();
    let clk = b.input(String::from("clk"));
    let acc: Vec<String> = (0..r).map(|t| b.output(format!("acc_{t}"))).collect();

    // Weight storage and selection.
    let mut wqb: Vec<Vec<String>> = Vec::new();
    let mut ws_conns: Vec<(String, String)> = Vec::new();
    for i in 0..h {
        let lane: Vec<String> = (0..l).map(|q| b.wire(format!("wqb_{i}_{q}"))).collect();
        for (q, net) in lane.iter().enumerate() {
            ws_conns.push((format!("wqb_{i}_{q}"), net.clone()));
        }
        wqb.push(lane);
    }
    b.child(idx_ws, String::from("ws"), ws_conns);

    let wb: Vec<String> = match idx_wsel {
        Some(idx) => {
            let wb: Vec<String> = (0..h).map(|i| b.wire(format!("wb_{i}"))).collect();
            let mut conns: Vec<(String, String)> = Vec::new();
            for i in 0..h {
                for q in 0..l {
                    conns.push((format!("wqb_{i}_{q}"), wqb[i][q].clone()));
                }
            }
            for (s, net) in rs.iter().enumerate() {
                conns.push((format!("rs_{s}"), net.clone()));
            }
            for (i, net) in wb.iter().enumerate() {
                conns.push((format!("wb_{i}"), net.clone()));
            }
            b.child(idx, String::from("wsel"), conns);
            wb
        }
        None => wqb.iter().map(|lane| lane[0].clone()).collect(),
    };

    // Bit products.
    let mut p: Vec<Vec<String>> = Vec::new();
    let mut mul_conns: Vec<(String, String)> = Vec::new();
    for (i, net) in wb.iter().enumerate() {
        mul_conns.push((format!("wb_{i}"), net.clone()));
    }
    for i in 0..h {
        for j in 0..k {
            mul_conns.push((format!("xb_{i}_{j}"), xb[i][j].clone()));
        }
    }
    for i in 0..h {
        let lane: Vec<String> = (0..k).map(|j| b.wire(format!("p_{i}_{j}"))).collect();
        for (j, net) in lane.iter().enumerate() {
            mul_conns.push((format!("p_{i}_{j}"), net.clone()));
        }
        p.push(lane);
    }
    b.child(idx_mul, String::from("mul"), mul_conns);

    // Adder-tree levels; each operand of level i is an output (with carry)
    // of level i - 1.
    let mut operands: Vec<Vec<String>> = p;
    for (lvl0, &idx) in idx_stages.iter().enumerate() {
        let level = lvl0 + 1;
        let adders = h >> level;
        let w = k + level - 1;
        let mut conns: Vec<(String, String)> = Vec::new();
        let mut next: Vec<Vec<String>> = Vec::new();
        for m in 0..adders {
            for t in 0..w {
                conns.push((format!("a_{m}_{t}"), operands[2 * m][t].clone()));
                conns.push((format!("b_{m}_{t}"), operands[2 * m + 1][t].clone()));
            }
            let sums: Vec<String> =
                (0..=w).map(|t| b.wire(format!("s{level}_{m}_{t}"))).collect();
            for (t, net) in sums.iter().enumerate() {
                conns.push((format!("s_{m}_{t}"), net.clone()));
            }
            next.push(sums);
        }
        b.child(idx, format!("t{level}"), conns);
        operands = next;
    }
    let tree_out = &operands[0]; // k + levels bits

    // Shift the partial into place, add, hold.
    let mut shf_conns: Vec<(String, String)> = Vec::new();
    for t in 0..r {
        let net = if t < tree_out.len() { tree_out[t].clone() } else { b.const0() };
        shf_conns.push((format!("d_{t}"), net));
    }
    for (s, net) in sh.iter().enumerate() {
        shf_conns.push((format!("sh_{s}"), net.clone()));
    }
    let shq: Vec<String> = (0..r).map(|t| b.wire(format!("shq_{t}"))).collect();
    for (t, net) in shq.iter().enumerate() {
        shf_conns.push((format!("q_{t}"), net.clone()));
    }
    b.child(idx_shf, String::from("shf"), shf_conns);

    let sum: Vec<String> = (0..r).map(|t| b.wire(format!("sum_{t}"))).collect();
    let mut add_conns: Vec<(String, String)> = Vec::new();
    for t in 0..r {
        add_conns.push((format!("a_{t}"), shq[t].clone()));
        add_conns.push((format!("b_{t}"), acc[t].clone()));
        add_conns.push((format!("s_{t}"), sum[t].clone()));
    }
    b.child(idx_add, String::from("add"), add_conns);

    let mut regs_conns: Vec<(String, String)> = Vec::new();
    for t in 0..r {
        regs_conns.push((format!("d_{t}"), sum[t].clone()));
    }
    regs_conns.push((String::from("clk"), clk));
    for t in 0..r {
        regs_conns.push((format!("q_{t}"), acc[t].clone()));
    }
    b.child(idx_regs, String::from("regs"), regs_conns);

    b.finish()
}

/// One exponent-compare level: per node, an adder-equivalent ripple
/// comparator whose final carry steers the per-bit exponent muxes.
fn exp_compare(level: usize, nodes: usize, be: usize) -> ModuleDef {
    let mut b = DefBuilder::new(format!("exp_compare_{level}"));
    let mut a: Vec<Vec<String>> = Vec::new();
    let mut bv: Vec<Vec<String>> = Vec::new();
    for m in 0..nodes {
        a.push((0..be).map(|s| b.input(format!("a_{m}_{s}"))).collect());
        bv.push((0..be).map(|s| b.input(format!("b_{m}_{s}"))).collect());
    }
    let mut o: Vec<Vec<String>> = Vec::new();
    for m in 0..nodes {
        o.push((0..be).map(|s| b.output(format!("o_{m}_{s}"))).collect());
    }
    for m in 0..nodes {
        let ge = b.wire(format!("ge_{m}"));
        ripple_adder(&mut b, &format!("c{m}"), &a[m], &bv[m], None, Some(ge.clone()));
        for s in 0..be {
            b.cell(
                CellKind::Mux2,
                format!("x_{m}_{s}"),
                vec![
                    ("A", a[m][s].clone()),
                    ("B", bv[m][s].clone()),
                    ("S", ge.clone()),
                    ("Y", o[m][s].clone()),
                ],
            );
        }
    }
    b.finish()
}

/// Per lane, the adder-equivalent offset unit against the group maximum.
fn exp_lane_sub(h: usize, be: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("exp_lane_sub"));
    let emax: Vec<String> = (0..be).map(|s| b.input(format!("emax_{s}"))).collect();
    let mut e: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        e.push((0..be).map(|s| b.input(format!("e_{i}_{s}"))).collect());
    }
    let mut off: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        off.push((0..be).map(|s| b.output(format!("off_{i}_{s}"))).collect());
    }
    for i in 0..h {
        ripple_adder(&mut b, &format!("l{i}"), &emax, &e[i], Some(&off[i]), None);
    }
    b.finish()
}

/// Per lane, a right barrel shifter applying the alignment offset to the
/// mantissa.
fn mantissa_align(h: usize, bm: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("mantissa_align"));
    let mut m: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        m.push((0..bm).map(|v| b.input(format!("m_{i}_{v}"))).collect());
    }
    let bits = clog2(bm);
    let mut off: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        off.push((0..bits).map(|s| b.input(format!("off_{i}_{s}"))).collect());
    }
    let zero = b.const0();
    for i in 0..h {
        for v in 0..bm {
            let cands: Vec<String> = (0..bm)
                .map(|s| if v + s < bm { m[i][v + s].clone() } else { zero.clone() })
                .collect();
            let out = b.output(format!("am_{i}_{v}"));
            mux_tree(&mut b, &format!("a{i}_{v}"), &cands, &off[i], Some(out));
        }
    }
    b.finish()
}

/// The pre-alignment front end: compare tree, lane offsets, mantissa align.
fn prealign(
    idx_cmp: &[usize],
    idx_sub: usize,
    idx_shl: usize,
    h: usize,
    be: usize,
    bm: usize,
) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("prealign"));
    let mut xe: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        xe.push((0..be).map(|s| b.input(format!("xe_{i}_{s}"))).collect());
    }
    let mut xm: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        xm.push((0..bm).map(|v| b.input(format!("xm_{i}_{v}"))).collect());
    }
    let mut am: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        am.push((0..bm).map(|v| b.output(format!("am_{i}_{v}"))).collect());
    }
    let emax: Vec<String> = (0..be).map(|s| b.output(format!("emax_{s}"))).collect();

    let mut exps: Vec<Vec<String>> = xe.clone();
    for (lvl0, &idx) in idx_cmp.iter().enumerate() {
        let level = lvl0 + 1;
        let nodes = exps.len() / 2;
        let last = level == idx_cmp.len();
        let mut conns: Vec<(String, String)> = Vec::new();
        let mut next: Vec<Vec<String>> = Vec::new();
        for m in 0..nodes {
            for s in 0..be {
                conns.push((format!("a_{m}_{s}"), exps[2 * m][s].clone()));
                conns.push((format!("b_{m}_{s}"), exps[2 * m + 1][s].clone()));
            }
            let outs: Vec<String> = if last {
                emax.clone()
            } else {
                (0..be).map(|s| b.wire(format!("e{level}_{m}_{s}"))).collect()
            };
            for (s, net) in outs.iter().enumerate() {
                conns.push((format!("o_{m}_{s}"), net.clone()));
            }
            next.push(outs);
        }
        b.child(idx, format!("ec{level}"), conns);
        exps = next;
    }

    let mut off: Vec<Vec<String>> = Vec::new();
    let mut sub_conns: Vec<(String, String)> = Vec::new();
    for (s, net) in emax.iter().enumerate() {
        sub_conns.push((format!("emax_{s}"), net.clone()));
    }
    for i in 0..h {
        for s in 0..be {
            sub_conns.push((format!("e_{i}_{s}"), xe[i][s].clone()));
        }
    }
    for i in 0..h {
        let lane: Vec<String> = (0..be).map(|s| b.wire(format!("off_{i}_{s}"))).collect();
        for (s, net) in lane.iter().enumerate() {
            sub_conns.push((format!("off_{i}_{s}"), net.clone()));
        }
        off.push(lane);
    }
    b.child(idx_sub, String::from("sub"), sub_conns);

    let bits = clog2(bm);
    let mut shl_conns: Vec<(String, String)> = Vec::new();
    for i in 0..h {
        for v in 0..bm {
            shl_conns.push((format!("m_{i}_{v}"), xm[i][v].clone()));
        }
    }
    for (i, lane) in off.iter().enumerate() {
        for (s, net) in lane.iter().take(bits).enumerate() {
            shl_conns.push((format!("off_{i}_{s}"), net.clone()));
        }
    }
    for i in 0..h {
        for v in 0..bm {
            shl_conns.push((format!("am_{i}_{v}"), am[i][v].clone()));
        }
    }
    b.child(idx_shl, String::from("shl"), shl_conns);

    b.finish()
}

/// Serial leading-bit scan: a chain of OR cells from the top bit down.
fn lead_or(br: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("lead_or"));
    let d: Vec<String> = (0..br).map(|t| b.input(format!("d_{t}"))).collect();
    let o: Vec<String> = (0..br).map(|t| b.output(format!("o_{t}"))).collect();
    let zero = b.const0();
    for t in (0..br).rev() {
        let upper = if t + 1 == br { zero.clone() } else { o[t + 1].clone() };
        b.cell(
            CellKind::Or,
            format!("g{t}"),
            vec![("A", d[t].clone()), ("B", upper), ("Y", o[t].clone())],
        );
    }
    b.finish()
}

/// Right barrel shifter bringing the leading bit down to the mantissa field.
fn norm_shift(br: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("norm_shift"));
    let d: Vec<String> = (0..br).map(|t| b.input(format!("d_{t}"))).collect();
    let sel: Vec<String> = (0..clog2(br)).map(|s| b.input(format!("sh_{s}"))).collect();
    let zero = b.const0();
    for v in 0..br {
        let cands: Vec<String> = (0..br)
            .map(|s| if v + s < br { d[v + s].clone() } else { zero.clone() })
            .collect();
        let out = b.output(format!("q_{v}"));
        mux_tree(&mut b, &format!("q{v}"), &cands, &sel, Some(out));
    }
    b.finish()
}

/// The exponent adjustment adder.
fn exp_adjust(be: usize) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("exp_adjust"));
    let a: Vec<String> = (0..be).map(|s| b.input(format!("a_{s}"))).collect();
    let bv: Vec<String> = (0..be).map(|s| b.input(format!("b_{s}"))).collect();
    let e: Vec<String> = (0..be).map(|s| b.output(format!("e_{s}"))).collect();
    ripple_adder(&mut b, "a", &a, &bv, Some(&e), None);
    b.finish()
}

/// The per-output normalizer: leading-bit scan, normalize shift, exponent
/// adjustment.
fn converter(
    idx_lor: usize,
    idx_nsh: usize,
    idx_eadj: usize,
    br: usize,
    be: usize,
    bm: usize,
) -> ModuleDef {
    let mut b = DefBuilder::new(String::from("converter"));
    let d: Vec<String> = (0..br).map(|t| b.input(format!("d_{t}"))).collect();
    let eb: Vec<String> = (0..be).map(|s| b.input(format!("eb_{s}"))).collect();
    let m: Vec<String> = (0..bm).map(|v| b.output(format!("m_{v}"))).collect();
    let e: Vec<String> = (0..be).map(|s| b.output(format!("e_{s}"))).collect();
    let o: Vec<String> = (0..br).map(|t| b.wire(format!("o_{t}"))).collect();

    let mut lor_conns: Vec<(String, String)> = Vec::new();
    for t in 0..br {
        lor_conns.push((format!("d_{t}"), d[t].clone()));
    }
    for (t, net) in o.iter().enumerate() {
        lor_conns.push((format!("o_{t}"), net.clone()));
    }
    b.child(idx_lor, String::from("lor"), lor_conns);

    let mut nsh_conns: Vec<(String, String)> = Vec::new();
    for t in 0..br {
        nsh_conns.push((format!("d_{t}"), d[t].clone()));
    }
    for s in 0..clog2(br) {
        nsh_conns.push((format!("sh_{s}"), o[s].clone()));
    }
    for (v, net) in m.iter().enumerate() {
        nsh_conns.push((format!("q_{v}"), net.clone()));
    }
    b.child(idx_nsh, String::from("nsh"), nsh_conns);

    let mut eadj_conns: Vec<(String, String)> = Vec::new();
    for s in 0..be {
        eadj_conns.push((format!("a_{s}"), o[s].clone()));
        eadj_conns.push((format!("b_{s}"), eb[s].clone()));
        eadj_conns.push((format!("e_{s}"), e[s].clone()));
    }
    b.child(idx_eadj, String::from("eadj"), eadj_conns);

    b.finish()
}

/// Expands a validated design point into its structural netlist, including
/// the block-level timing view.  The result passes [`check_netlist`].
pub fn generate_structural_netlist(dp: &DesignPoint) -> Result<Netlist, RtlError> {
    dp.validate()?;
    let n = dp.columns as usize;
    let h = dp.column_height as usize;
    let l = dp.weights_per_unit as usize;
    let k = dp.bits_per_cycle as usize;
    let bx = dp.input_bits as usize;
    let bw = dp.weight_bits as usize;
    let t = bx / k;
    let levels = dp.column_height.ilog2() as usize;
    let r = bx + levels;
    let w_out = bx + levels + bw;
    let outputs = n / bw;
    let fp = dp.arch == Arch::FpPrealigned;
    let be = dp.exponent_bits.unwrap_or(0) as usize;
    let bm = dp.mantissa_bits.unwrap_or(0) as usize;

    let mut modules: Vec<ModuleDef> = Vec::new();
    let mut timing: Vec<TimingBlock> = Vec::new();
    fn push(modules: &mut Vec<ModuleDef>, def: ModuleDef) -> usize {
        modules.push(def);
        modules.len() - 1
    }
    fn block(
        timing: &mut Vec<TimingBlock>,
        role: BlockRole,
        stage: Option<Stage>,
        module: usize,
        width: u64,
        preds: Vec<usize>,
    ) -> usize {
        timing.push(TimingBlock { role, stage, module, width, preds });
        timing.len() - 1
    }

    // Column building blocks.
    let idx_ws = push(&mut modules, weight_store(h, l));
    block(&mut timing, BlockRole::WeightStore, None, idx_ws, l as u64, vec![]);
    let idx_wsel = if l > 1 {
        let idx = push(&mut modules, weight_select(h, l));
        Some(idx)
    } else {
        None
    };
    let idx_mul = push(&mut modules, bit_products(h, k));
    let idx_stages: Vec<usize> = (1..=levels)
        .map(|lvl| push(&mut modules, sum_stage(lvl, h, k)))
        .collect();
    let idx_shf = push(&mut modules, partial_shift(r));
    let idx_add = push(&mut modules, accumulate_add(r));
    let idx_regs = push(&mut modules, accumulator_regs(r));
    let idx_col = push(
        &mut modules,
        column(idx_ws, idx_wsel, idx_mul, &idx_stages, idx_shf, idx_add, idx_regs, h, l, k, r),
    );
    block(&mut timing, BlockRole::AccumulatorRegs, None, idx_regs, r as u64, vec![]);

    // Array-to-accumulation chain.
    let mut prev = idx_wsel.map(|idx| {
        block(
            &mut timing,
            BlockRole::WeightSelect,
            Some(Stage::ArrayToAccu),
            idx,
            l as u64,
            vec![],
        )
    });
    let preds = prev.map(|p| vec![p]).unwrap_or_default();
    prev = Some(block(
        &mut timing,
        BlockRole::Multiply,
        Some(Stage::ArrayToAccu),
        idx_mul,
        k as u64,
        preds,
    ));
    for (lvl0, &idx) in idx_stages.iter().enumerate() {
        prev = Some(block(
            &mut timing,
            BlockRole::SumStage,
            Some(Stage::ArrayToAccu),
            idx,
            (k + lvl0) as u64,
            vec![prev.unwrap()],
        ));
    }
    let shf_block = block(
        &mut timing,
        BlockRole::PartialShift,
        Some(Stage::ArrayToAccu),
        idx_shf,
        r as u64,
        vec![prev.unwrap()],
    );
    block(
        &mut timing,
        BlockRole::AccumulateAdd,
        Some(Stage::ArrayToAccu),
        idx_add,
        r as u64,
        vec![shf_block],
    );

    // Input buffer.
    let idx_iregs = push(&mut modules, input_regs(h, bx));
    block(&mut timing, BlockRole::InputRegs, None, idx_iregs, bx as u64, vec![]);
    let idx_isel = if t > 1 {
        let idx = push(&mut modules, slice_select(h, bx, k));
        let stage = if fp { None } else { Some(Stage::PreArray) };
        block(&mut timing, BlockRole::SliceSelect, stage, idx, t as u64, vec![]);
        Some(idx)
    } else {
        None
    };

    // Fusion tree shared by every output group.
    let mut idx_fuse = None;
    let mut last_fuse_block = None;
    if bw > 1 {
        let mut level_shapes: Vec<(usize, usize)> = Vec::new();
        let mut count = bw;
        let mut level = 0;
        while count > 1 {
            level += 1;
            let adders = count / 2;
            let idx = push(&mut modules, fuse_level(level, adders, w_out));
            level_shapes.push((idx, adders));
            let preds = last_fuse_block.map(|p| vec![p]).unwrap_or_default();
            last_fuse_block = Some(block(
                &mut timing,
                BlockRole::FuseLevel,
                Some(Stage::FusionOut),
                idx,
                w_out as u64,
                preds,
            ));
            count -= adders;
        }
        idx_fuse = Some(push(&mut modules, result_fuse(&level_shapes, bw, w_out)));
    }

    // Float front end and normalizers.
    let mut idx_pal = None;
    let mut idx_conv = None;
    if fp {
        let idx_cmp: Vec<usize> = (1..=levels)
            .map(|lvl| push(&mut modules, exp_compare(lvl, h >> lvl, be)))
            .collect();
        let idx_sub = push(&mut modules, exp_lane_sub(h, be));
        let idx_shl = push(&mut modules, mantissa_align(h, bm));
        idx_pal = Some(push(&mut modules, prealign(&idx_cmp, idx_sub, idx_shl, h, be, bm)));
        let mut prev: Option<usize> = None;
        for &idx in &idx_cmp {
            let preds = prev.map(|p| vec![p]).unwrap_or_default();
            prev = Some(block(
                &mut timing,
                BlockRole::ExpCompare,
                Some(Stage::PreArray),
                idx,
                be as u64,
                preds,
            ));
        }
        let sub_block = block(
            &mut timing,
            BlockRole::LaneOffset,
            Some(Stage::PreArray),
            idx_sub,
            be as u64,
            vec![prev.unwrap()],
        );
        block(
            &mut timing,
            BlockRole::MantissaAlign,
            Some(Stage::PreArray),
            idx_shl,
            bm as u64,
            vec![sub_block],
        );

        let br = w_out;
        let idx_lor = push(&mut modules, lead_or(br));
        let idx_nsh = push(&mut modules, norm_shift(br));
        let idx_eadj = push(&mut modules, exp_adjust(be));
        idx_conv = Some(push(&mut modules, converter(idx_lor, idx_nsh, idx_eadj, br, be, bm)));
        let lor_block = block(
            &mut timing,
            BlockRole::LeadingOr,
            Some(Stage::FusionOut),
            idx_lor,
            br as u64,
            last_fuse_block.map(|p| vec![p]).unwrap_or_default(),
        );
        let nsh_block = block(
            &mut timing,
            BlockRole::NormalizeShift,
            Some(Stage::FusionOut),
            idx_nsh,
            br as u64,
            vec![lor_block],
        );
        block(
            &mut timing,
            BlockRole::ExponentAdd,
            Some(Stage::FusionOut),
            idx_eadj,
            be as u64,
            vec![nsh_block],
        );
    }

    // Top level.
    let mut b = DefBuilder::new(String::from("top"));
    let clk = b.input(String::from("clk"));
    let cyc: Vec<String> = if t > 1 {
        (0..clog2(t)).map(|s| b.input(format!("cyc_{s}"))).collect()
    } else {
        Vec::new()
    };
    let rs: Vec<String> = (0..clog2(l)).map(|s| b.input(format!("rs_{s}"))).collect();
    let sh: Vec<String> = (0..clog2(r)).map(|s| b.input(format!("sh_{s}"))).collect();

    let mut xe: Vec<Vec<String>> = Vec::new();
    let mut xm: Vec<Vec<String>> = Vec::new();
    let mut ebase: Vec<Vec<String>> = Vec::new();
    if fp {
        for i in 0..h {
            xe.push((0..be).map(|s| b.input(format!("xe_{i}_{s}"))).collect());
        }
        for i in 0..h {
            xm.push((0..bm).map(|v| b.input(format!("xm_{i}_{v}"))).collect());
        }
        for o in 0..outputs {
            ebase.push((0..be).map(|s| b.input(format!("eb_{o}_{s}"))).collect());
        }
    }

    let y_width = if bw > 1 { w_out } else { r };
    let mut y: Vec<Vec<String>> = Vec::new();
    let mut ym: Vec<Vec<String>> = Vec::new();
    let mut ye: Vec<Vec<String>> = Vec::new();
    let mut emax: Vec<String> = Vec::new();
    if fp {
        for o in 0..outputs {
            ym.push((0..bm).map(|v| b.output(format!("ym_{o}_{v}"))).collect());
        }
        for o in 0..outputs {
            ye.push((0..be).map(|s| b.output(format!("ye_{o}_{s}"))).collect());
        }
        emax = (0..be).map(|s| b.output(format!("emax_{s}"))).collect();
    } else {
        for o in 0..outputs {
            y.push((0..y_width).map(|w| b.output(format!("y_{o}_{w}"))).collect());
        }
    }

    // Input registers and, when slicing, the slice selectors.
    let mut am: Vec<Vec<String>> = Vec::new();
    if fp {
        for i in 0..h {
            am.push((0..bm).map(|v| b.wire(format!("am_{i}_{v}"))).collect());
        }
    }
    let mut xq: Vec<Vec<String>> = Vec::new();
    if !fp {
        for i in 0..h {
            xq.push((0..bx).map(|v| b.wire(format!("xq_{i}_{v}"))).collect());
        }
    }
    // Complement outputs of the register bank: selector inputs when slices
    // are streamed, the array feed itself otherwise.
    let slice_nets_name = if t > 1 { "xqb" } else { "xb" };
    let mut xqb: Vec<Vec<String>> = Vec::new();
    for i in 0..h {
        xqb.push(
            (0..bx)
                .map(|v| b.wire(format!("{slice_nets_name}_{i}_{v}")))
                .collect(),
        );
    }
    let mut iregs_conns: Vec<(String, String)> = Vec::new();
    for i in 0..h {
        for v in 0..bx {
            let d = if fp { am[i][v].clone() } else { xq[i][v].clone() };
            iregs_conns.push((format!("d_{i}_{v}"), d));
        }
    }
    iregs_conns.push((String::from("clk"), clk.clone()));
    if !fp {
        for i in 0..h {
            for v in 0..bx {
                iregs_conns.push((format!("q_{i}_{v}"), xq[i][v].clone()));
            }
        }
    }
    for i in 0..h {
        for v in 0..bx {
            iregs_conns.push((format!("qb_{i}_{v}"), xqb[i][v].clone()));
        }
    }
    b.child(idx_iregs, String::from("ib_regs"), iregs_conns);

    let xb: Vec<Vec<String>> = if let Some(idx) = idx_isel {
        let mut nets: Vec<Vec<String>> = Vec::new();
        for i in 0..h {
            nets.push((0..k).map(|j| b.wire(format!("xb_{i}_{j}"))).collect());
        }
        let mut conns: Vec<(String, String)> = Vec::new();
        for i in 0..h {
            for v in 0..bx {
                conns.push((format!("xqb_{i}_{v}"), xqb[i][v].clone()));
            }
        }
        for (s, net) in cyc.iter().enumerate() {
            conns.push((format!("cyc_{s}"), net.clone()));
        }
        for i in 0..h {
            for j in 0..k {
                conns.push((format!("xb_{i}_{j}"), nets[i][j].clone()));
            }
        }
        b.child(idx, String::from("ib_sel"), conns);
        nets
    } else {
        xqb.clone()
    };

    if let Some(idx) = idx_pal {
        let mut conns: Vec<(String, String)> = Vec::new();
        for i in 0..h {
            for s in 0..be {
                conns.push((format!("xe_{i}_{s}"), xe[i][s].clone()));
            }
        }
        for i in 0..h {
            for v in 0..bm {
                conns.push((format!("xm_{i}_{v}"), xm[i][v].clone()));
            }
        }
        for i in 0..h {
            for v in 0..bm {
                conns.push((format!("am_{i}_{v}"), am[i][v].clone()));
            }
        }
        for (s, net) in emax.iter().enumerate() {
            conns.push((format!("emax_{s}"), net.clone()));
        }
        b.child(idx, String::from("pal"), conns);
    }

    // Columns.
    let mut cacc: Vec<Vec<String>> = Vec::new();
    for c in 0..n {
        let acc_nets: Vec<String> = if bw > 1 || fp {
            (0..r).map(|w| b.wire(format!("cacc_{c}_{w}"))).collect()
        } else {
            y[c].clone()
        };
        let mut conns: Vec<(String, String)> = Vec::new();
        for i in 0..h {
            for j in 0..k {
                conns.push((format!("xb_{i}_{j}"), xb[i][j].clone()));
            }
        }
        for (s, net) in rs.iter().enumerate() {
            conns.push((format!("rs_{s}"), net.clone()));
        }
        for (s, net) in sh.iter().enumerate() {
            conns.push((format!("sh_{s}"), net.clone()));
        }
        conns.push((String::from("clk"), clk.clone()));
        for (w, net) in acc_nets.iter().enumerate() {
            conns.push((format!("acc_{w}"), net.clone()));
        }
        b.child(idx_col, format!("c{c}"), conns);
        cacc.push(acc_nets);
    }

    // Fusion trees and, for float points, the normalizers.
    if let Some(idx) = idx_fuse {
        let mut yf: Vec<Vec<String>> = Vec::new();
        for o in 0..outputs {
            let outs: Vec<String> = if fp {
                (0..w_out).map(|w| b.wire(format!("yf_{o}_{w}"))).collect()
            } else {
                y[o].clone()
            };
            let mut conns: Vec<(String, String)> = Vec::new();
            for p in 0..bw {
                for w in 0..w_out {
                    let net = if w >= p && w - p < r {
                        cacc[o * bw + p][w - p].clone()
                    } else {
                        b.const0()
                    };
                    conns.push((format!("d_{p}_{w}"), net));
                }
            }
            for (w, net) in outs.iter().enumerate() {
                conns.push((format!("y_{w}"), net.clone()));
            }
            b.child(idx, format!("f{o}"), conns);
            yf.push(outs);
        }
        if let Some(conv) = idx_conv {
            for o in 0..outputs {
                let mut conns: Vec<(String, String)> = Vec::new();
                for w in 0..w_out {
                    conns.push((format!("d_{w}"), yf[o][w].clone()));
                }
                for s in 0..be {
                    conns.push((format!("eb_{s}"), ebase[o][s].clone()));
                }
                for v in 0..bm {
                    conns.push((format!("m_{v}"), ym[o][v].clone()));
                }
                for s in 0..be {
                    conns.push((format!("e_{s}"), ye[o][s].clone()));
                }
                b.child(conv, format!("cv{o}"), conns);
            }
        }
    }

    let top = push(&mut modules, b.finish());
    let nl = Netlist { modules, top, timing };
    check_netlist(&nl)?;
    Ok(nl)
}

/// Flattened path of the storage cell holding one weight bit:
/// column `column`, lane `lane`, shared slot `row`.
pub fn sram_cell_path(column: u32, lane: u32, row: u32) -> String {
    format!("c{column}.ws.b_{lane}_{row}")
}

/// Flattened path of the input-buffer flop for `lane`, operand bit `bit`.
pub fn input_reg_path(lane: u32, bit: u32) -> String {
    format!("ib_regs.x_{lane}_{bit}")
}

/// Flattened net carrying bit `bit` of the adder-tree result in `column`.
pub fn tree_output_net(dp: &DesignPoint, column: u32, bit: u32) -> String {
    let levels = dp.column_height.ilog2();
    format!("c{column}.s{levels}_0_{bit}")
}

/// Flattened net carrying accumulator bit `bit` of `column`.
pub fn accumulator_net(dp: &DesignPoint, column: u32, bit: u32) -> String {
    if dp.weight_bits > 1 || dp.arch == Arch::FpPrealigned {
        format!("cacc_{column}_{bit}")
    } else {
        format!("y_{column}_{bit}")
    }
}

/// Top-level port carrying bit `bit` of integer output `output`.
pub fn output_port_name(output: u32, bit: u32) -> String {
    format!("y_{output}_{bit}")
}


#[cfg(test)]
mod tests {
    use super::test_points::{random_fp as random_fp_point, random_int as random_int_point};
    use super::*;
    use crate::costmodel::{macro_cost, ComponentKind, DesignPoint};
    use crate::dse::SplitMix64;
    use crate::rtlgen::{tally_area, tally_cells, tally_energy};
    use crate::techlib::TechLibrary;

    fn small() -> DesignPoint {
        DesignPoint::int(2, 2, 2, 1, 1, 1)
    }

    #[test]
    fn small_netlist_matches_the_component_inventory() {
        let nl = generate_structural_netlist(&small()).unwrap();
        let tally = tally_cells(&nl).unwrap();
        // 2 columns * 2 lanes * 2 shared weights.
        assert_eq!(tally.get(&CellKind::SramBit), Some(&8));
        // Per column: 2 product NOR cells; no fusion, no OR cells.
        assert_eq!(tally.get(&CellKind::Nor), Some(&4));
        assert_eq!(tally.get(&CellKind::Or), None);
        // Per column: 2 weight selectors (1 mux each) + barrel (R=2 -> 2).
        assert_eq!(tally.get(&CellKind::Mux2), Some(&(2 * (2 + 2))));
        // Per column: tree = one width-1 adder (HA); accumulate adder R=2 =
        // HA + FA.
        assert_eq!(tally.get(&CellKind::HalfAdder), Some(&4));
        assert_eq!(tally.get(&CellKind::FullAdder), Some(&2));
        // 2 accumulator flops per column + 2 lanes * 1 input bit.
        assert_eq!(tally.get(&CellKind::Dff), Some(&6));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_structural_netlist(&small()).unwrap();
        let b = generate_structural_netlist(&small()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_points_are_rejected() {
        let dp = DesignPoint::int(3, 2, 1, 1, 2, 2); // 2 does not divide 3
        assert!(matches!(
            generate_structural_netlist(&dp),
            Err(RtlError::Design(_))
        ));
    }

    #[test]
    fn tally_weighs_to_the_macro_area_and_energy_for_integer_points() {
        let lib = TechLibrary::default();
        let mut rng = SplitMix64::new(0x51ab);
        for _ in 0..20 {
            let dp = random_int_point(&mut rng);
            let nl = generate_structural_netlist(&dp).unwrap();
            let tally = tally_cells(&nl).unwrap();
            let cost = macro_cost(&lib, &dp).unwrap();
            assert_eq!(tally_area(&tally, &lib).tenths(), cost.area.tenths(), "{dp:?}");
            assert_eq!(tally_energy(&tally, &lib).tenths(), cost.energy.tenths(), "{dp:?}");
        }
    }

    #[test]
    fn tally_weighs_to_the_macro_area_and_energy_for_float_points() {
        let lib = TechLibrary::default();
        let mut rng = SplitMix64::new(0xf10a7);
        for _ in 0..20 {
            let dp = random_fp_point(&mut rng);
            let nl = generate_structural_netlist(&dp).unwrap();
            let tally = tally_cells(&nl).unwrap();
            let cost = macro_cost(&lib, &dp).unwrap();
            assert_eq!(tally_area(&tally, &lib).tenths(), cost.area.tenths(), "{dp:?}");
            assert_eq!(tally_energy(&tally, &lib).tenths(), cost.energy.tenths(), "{dp:?}");
        }
    }

    #[test]
    fn storage_count_tracks_every_component_row() {
        let dp = DesignPoint::int(8, 4, 4, 2, 2, 4);
        let nl = generate_structural_netlist(&dp).unwrap();
        let tally = tally_cells(&nl).unwrap();
        assert_eq!(tally.get(&CellKind::SramBit), Some(&(8 * 4 * 4)));
        // Input buffer flops + accumulator flops.
        let r = 4 + 2;
        assert_eq!(
            tally.get(&CellKind::Dff),
            Some(&((4 * 4) + 8 * r))
        );
        // The sum over priced components equals the tally-weighted area.
        let lib = TechLibrary::default();
        let cost = macro_cost(&lib, &dp).unwrap();
        let total: u64 = cost.components.iter().map(|c| c.area.tenths()).sum();
        assert_eq!(tally_area(&tally, &lib).tenths(), total);
        assert_eq!(cost.components.len(), 6);
        assert!(cost
            .components
            .iter()
            .any(|c| c.kind == ComponentKind::ResultFusion));
    }
}
