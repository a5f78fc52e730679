//! Greedy list scheduling of a circuit onto several STM tips.
//!
//! Gates are taken in circuit order. Each one waits for the earlier gates
//! that share a qubit, then goes to whichever tip can reach its first qubit
//! and start soonest. A gate occupies its qubits from the moment its tip
//! arrives until its last instruction ends; idle tips hover clear of the
//! surface. Every tip that worked is parked again at the end.

use std::fmt::Write as _;

use serde::Serialize;

use crate::compiler::{compile_gate, Circuit, Instruction};
use crate::config::MachineConfig;
use crate::error::{EndosError, Result};
use crate::layout::{RegisterLayout, TipPosition};
use crate::timing::instruction_duration;

/// Tip-independent shape of a compiled gate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateFootprint {
    pub qubits: Vec<usize>,
    /// Where the tip has to be when the gate begins.
    pub entry: TipPosition,
    /// Durations of every instruction after the arrival move.
    pub body: Vec<f64>,
    pub exit: TipPosition,
}

pub fn gate_footprints(circuit: &Circuit, layout: &RegisterLayout, cfg: &MachineConfig) -> Result<Vec<GateFootprint>> {
    circuit.validate(layout.num_qubits())?;
    circuit
        .gates
        .iter()
        .map(|gate| {
            let program = compile_gate(gate, layout, cfg)?;
            let mut instrs = program.instructions.iter().peekable();
            let entry = match instrs.peek() {
                Some(Instruction::MoveTip(pos)) => {
                    let pos = *pos;
                    instrs.next();
                    pos
                }
                _ => layout.tip(),
            };
            let mut tip = entry;
            let mut body = Vec::new();
            for instr in instrs {
                body.push(instruction_duration(instr, tip, layout, cfg));
                if let Instruction::MoveTip(to) = instr {
                    tip = *to;
                }
            }
            Ok(GateFootprint {
                qubits: gate.qubits(layout.num_qubits()),
                entry,
                body,
                exit: tip,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduledGate {
    pub gate: usize,
    pub label: String,
    pub tip: usize,
    /// Tip leaves its previous position.
    pub depart: f64,
    /// Tip arrives; the gate's qubits are busy from here.
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TipAssignment {
    pub tips: usize,
    /// In circuit order.
    pub gates: Vec<ScheduledGate>,
    /// Time each used tip is back in its parked position.
    pub park_times: Vec<Option<f64>>,
    pub makespan: f64,
}

impl TipAssignment {
    /// `tip start_s end_s gate` per scheduled gate, grouped by tip.
    pub fn timeline_text(&self) -> String {
        let mut rows: Vec<&ScheduledGate> = self.gates.iter().collect();
        rows.sort_by(|a, b| a.tip.cmp(&b.tip).then(a.depart.total_cmp(&b.depart)));
        let mut out = String::from("tip start_s end_s gate\n");
        for g in rows {
            let _ = writeln!(out, "{} {:e} {:e} {}", g.tip, g.depart, g.end, g.label);
        }
        out
    }
}

/// Indices of the earlier gates each gate must wait for.
pub fn dependencies(footprints: &[GateFootprint]) -> Vec<Vec<usize>> {
    footprints
        .iter()
        .enumerate()
        .map(|(g, fp)| {
            (0..g)
                .filter(|&h| footprints[h].qubits.iter().any(|q| fp.qubits.contains(q)))
                .collect()
        })
        .collect()
}

pub fn schedule_multi_tip(
    circuit: &Circuit,
    tips: usize,
    layout: &RegisterLayout,
    cfg: &MachineConfig,
) -> Result<TipAssignment> {
    if tips == 0 {
        return Err(EndosError::InvalidConfig("at least one tip is required".into()));
    }
    let footprints = gate_footprints(circuit, layout, cfg)?;
    let deps = dependencies(&footprints);
    let mut free = vec![0.0f64; tips];
    let mut pos = vec![TipPosition::Parked; tips];
    let mut used = vec![false; tips];
    let mut ends: Vec<f64> = Vec::with_capacity(footprints.len());
    let mut gates = Vec::with_capacity(footprints.len());

    for (g, fp) in footprints.iter().enumerate() {
        let ready = deps[g].iter().map(|&h| ends[h]).fold(0.0, f64::max);
        let mut best: Option<(f64, f64, usize)> = None;
        for t in 0..tips {
            let travel = layout.hops(pos[t], fp.entry) as f64 * cfg.tip_move_time;
            let start = ready.max(free[t] + travel);
            let better = match best {
                None => true,
                Some((bs, btravel, _)) => start < bs || (start == bs && travel < btravel),
            };
            if better {
                best = Some((start, travel, t));
            }
        }
        let (start, travel, t) = best.expect("at least one tip");
        let end = fp.body.iter().fold(start, |acc, d| acc + d);
        gates.push(ScheduledGate {
            gate: g,
            label: circuit.gates[g].to_string(),
            tip: t,
            depart: start - travel,
            start,
            end,
        });
        ends.push(end);
        free[t] = end;
        pos[t] = fp.exit;
        used[t] = true;
    }

    let park_times: Vec<Option<f64>> = (0..tips)
        .map(|t| {
            used[t].then(|| free[t] + layout.hops(pos[t], TipPosition::Parked) as f64 * cfg.tip_move_time)
        })
        .collect();
    let makespan = park_times.iter().flatten().fold(0.0, |a, &b| f64::max(a, b));
    Ok(TipAssignment {
        tips,
        gates,
        park_times,
        makespan,
    })
}

/// Re-checks a schedule from scratch: each tip handles one gate at a time
/// and has time to travel between them, gates sharing a qubit never
/// overlap and keep circuit order, and every gate lasts as long as its body.
pub fn validate_schedule(
    circuit: &Circuit,
    assignment: &TipAssignment,
    layout: &RegisterLayout,
    cfg: &MachineConfig,
) -> std::result::Result<(), String> {
    const EPS: f64 = 1e-12;
    let footprints = gate_footprints(circuit, layout, cfg).map_err(|e| e.to_string())?;
    if assignment.gates.len() != footprints.len() {
        return Err(format!(
            "{} gates scheduled, circuit has {}",
            assignment.gates.len(),
            footprints.len()
        ));
    }
    for (g, s) in assignment.gates.iter().enumerate() {
        if s.gate != g || s.tip >= assignment.tips {
            return Err(format!("bad entry {s:?}"));
        }
        let body: f64 = footprints[g].body.iter().sum();
        if (s.end - s.start - body).abs() > EPS || s.depart > s.start + EPS || s.depart < -EPS {
            return Err(format!("gate {g} has inconsistent times"));
        }
    }
    // per-tip sequencing and travel
    for t in 0..assignment.tips {
        let mut mine: Vec<&ScheduledGate> = assignment.gates.iter().filter(|s| s.tip == t).collect();
        mine.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut at = TipPosition::Parked;
        let mut free = 0.0;
        for s in &mine {
            let fp = &footprints[s.gate];
            let travel = layout.hops(at, fp.entry) as f64 * cfg.tip_move_time;
            if s.start + EPS < free + travel {
                return Err(format!("tip {t} cannot reach gate {} in time", s.gate));
            }
            at = fp.exit;
            free = s.end;
        }
        let park = free + layout.hops(at, TipPosition::Parked) as f64 * cfg.tip_move_time;
        if !mine.is_empty() && assignment.makespan + EPS < park {
            return Err(format!("tip {t} parks after the makespan"));
        }
    }
    // qubit exclusivity and dependency order
    for (g, a) in assignment.gates.iter().enumerate() {
        for h in 0..g {
            let b = &assignment.gates[h];
            let shared = footprints[g].qubits.iter().any(|q| footprints[h].qubits.contains(q));
            if shared && a.start + EPS < b.end {
                return Err(format!("gate {g} starts before gate {h} releases a shared qubit"));
            }
        }
    }
    Ok(())
}
