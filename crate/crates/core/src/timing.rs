//! Wall-clock cost model and decoherence budget.

use serde::Serialize;

use crate::compiler::{compile_cnot, Instruction, PulseProgram};
use crate::config::MachineConfig;
use crate::error::{EndosError, Result};
use crate::layout::{RegisterLayout, TipPosition};
use crate::state::Channel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Category {
    Move,
    NuclearPulse,
    ElectronPulse,
    Measurement,
    Barrier,
}

pub fn instruction_category(instr: &Instruction) -> Category {
    match instr {
        Instruction::MoveTip(_) => Category::Move,
        Instruction::ApplyPulse(p) | Instruction::ConditionalPulse(p) => match p.channel {
            Channel::ElectronRF => Category::ElectronPulse,
            _ => Category::NuclearPulse,
        },
        Instruction::MeasureViaCurrent(_) => Category::Measurement,
        Instruction::Barrier => Category::Barrier,
    }
}

/// Seconds taken by one instruction when the tip starts at `tip_before`.
pub fn instruction_duration(
    instr: &Instruction,
    tip_before: TipPosition,
    layout: &RegisterLayout,
    cfg: &MachineConfig,
) -> f64 {
    match instr {
        Instruction::MoveTip(to) => layout.hops(tip_before, *to) as f64 * cfg.tip_move_time,
        Instruction::ApplyPulse(p) | Instruction::ConditionalPulse(p) => p.duration,
        Instruction::MeasureViaCurrent(_) => cfg.measurement_dwell,
        Instruction::Barrier => 0.0,
    }
}

/// Per-instruction durations of a program whose tip starts at
/// `layout.tip()`.
pub fn program_durations(program: &PulseProgram, layout: &RegisterLayout, cfg: &MachineConfig) -> Vec<(Category, f64)> {
    let mut tip = layout.tip();
    program
        .instructions
        .iter()
        .map(|instr| {
            let d = instruction_duration(instr, tip, layout, cfg);
            if let Instruction::MoveTip(to) = instr {
                tip = *to;
            }
            (instruction_category(instr), d)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub per_instruction: Vec<f64>,
    pub moves: f64,
    pub nuclear_pulses: f64,
    pub electron_pulses: f64,
    pub measurements: f64,
    pub total_wall_time: f64,
    /// `floor(T2 / reference CNOT time)`.
    pub gate_capacity: u64,
    /// Whether the program fits inside T2.
    pub feasible: bool,
}

impl TimingReport {
    pub fn from_durations(durations: Vec<(Category, f64)>, cfg: &MachineConfig) -> Self {
        let sum = |cat: Category| durations.iter().filter(|d| d.0 == cat).map(|d| d.1).sum::<f64>();
        let per_instruction: Vec<f64> = durations.iter().map(|d| d.1).collect();
        let total_wall_time = per_instruction.iter().fold(0.0, |acc, d| acc + d);
        TimingReport {
            moves: sum(Category::Move),
            nuclear_pulses: sum(Category::NuclearPulse),
            electron_pulses: sum(Category::ElectronPulse),
            measurements: sum(Category::Measurement),
            total_wall_time,
            gate_capacity: decoherence_budget(cfg, reference_cnot_time(cfg)).unwrap_or(0),
            feasible: total_wall_time <= cfg.t2,
            per_instruction,
        }
    }

    pub fn for_program(program: &PulseProgram, layout: &RegisterLayout, cfg: &MachineConfig) -> Self {
        Self::from_durations(program_durations(program, layout, cfg), cfg)
    }
}

/// Number of gates of length `mean_gate_time` that fit in T2.
pub fn decoherence_budget(cfg: &MachineConfig, mean_gate_time: f64) -> Result<u64> {
    if !(mean_gate_time > 0.0 && mean_gate_time.is_finite()) {
        return Err(EndosError::InvalidConfig(format!(
            "mean gate time must be > 0, got {mean_gate_time}"
        )));
    }
    Ok((cfg.t2 / mean_gate_time).floor() as u64)
}

/// Wall time of a CNOT between neighbouring qubits, tip starting parked.
pub fn reference_cnot_time(cfg: &MachineConfig) -> f64 {
    let layout = RegisterLayout::line(2).expect("two-qubit register");
    let program = compile_cnot(0, 1, &layout, cfg).expect("valid pair");
    program_durations(&program, &layout, cfg)
        .iter()
        .fold(0.0, |acc, d| acc + d.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Pulse;

    #[test]
    fn move_costs() {
        let cfg = MachineConfig::default();
        let layout = RegisterLayout::line(3).unwrap();
        let m = Instruction::MoveTip(TipPosition::AtQubit(1));
        assert_eq!(instruction_duration(&m, TipPosition::AtQubit(0), &layout, &cfg), 15e-6);
        assert_eq!(instruction_duration(&m, TipPosition::AtQubit(1), &layout, &cfg), 0.0);
        assert_eq!(instruction_duration(&m, TipPosition::Parked, &layout, &cfg), 15e-6);
        let far = Instruction::MoveTip(TipPosition::AtQubit(2));
        assert_eq!(instruction_duration(&far, TipPosition::AtQubit(0), &layout, &cfg), 30e-6);
        let meas = Instruction::MeasureViaCurrent(0);
        assert_eq!(instruction_duration(&meas, TipPosition::AtQubit(0), &layout, &cfg), 15e-6);
        let p = Instruction::ApplyPulse(Pulse::pi(Channel::ElectronRF, 1e11, &cfg));
        assert_eq!(instruction_duration(&p, TipPosition::AtQubit(0), &layout, &cfg), 0.1e-6);
    }

    #[test]
    fn cnot_wall_time() {
        let cfg = MachineConfig::default();
        // oracle: 3 moves x 15 us + 3 nuclear x 10 us + 6 electron x 0.1 us
        let oracle = 3.0 * 15e-6 + 3.0 * 10e-6 + 6.0 * 0.1e-6;
        let t = reference_cnot_time(&cfg);
        assert!((t - oracle).abs() < 1e-15, "{t}");
        assert!((t - 75.6e-6).abs() < 1e-12);
        let layout = RegisterLayout::line(2).unwrap();
        let report = TimingReport::for_program(&compile_cnot(0, 1, &layout, &cfg).unwrap(), &layout, &cfg);
        assert_eq!(report.total_wall_time, t);
        assert_eq!(report.per_instruction.len(), 12);
        assert!((report.moves - 45e-6).abs() < 1e-15);
        assert!((report.nuclear_pulses - 30e-6).abs() < 1e-15);
        assert!((report.electron_pulses - 0.6e-6).abs() < 1e-15);
        assert!(report.feasible);
    }

    #[test]
    fn budgets() {
        let cfg = MachineConfig::default();
        assert_eq!(decoherence_budget(&cfg, 100e-6).unwrap(), 100_000);
        assert_eq!(decoherence_budget(&cfg, cfg.t2).unwrap(), 1);
        // 10 s / 75.6 us = 132275.13...
        assert_eq!(decoherence_budget(&cfg, reference_cnot_time(&cfg)).unwrap(), 132_275);
        assert!(decoherence_budget(&cfg, 0.0).is_err());
    }

    #[test]
    fn infeasible_program() {
        let cfg = MachineConfig { t2: 50e-6, ..Default::default() };
        let layout = RegisterLayout::line(2).unwrap();
        let report = TimingReport::for_program(&compile_cnot(0, 1, &layout, &cfg).unwrap(), &layout, &cfg);
        assert!(!report.feasible);
    }
}
