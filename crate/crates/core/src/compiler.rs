//! Gate-to-pulse compilation and program execution.
//!
//! Every pulse frequency is taken from the engine's conditional transition
//! frequencies, so a compiled program is resonant by construction with the
//! transitions it intends to drive.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::config::MachineConfig;
use crate::error::{EndosError, Result};
use crate::layout::{RegisterLayout, TipPosition};
use crate::physics::{transition_frequency, BasisConfiguration};
use crate::readout::{measure_via_current, MeasurementRecord};
use crate::state::{apply_selective_pulse, Channel, PulseOutcome, Pulse, PureState};
use crate::timing::{instruction_category, instruction_duration, TimingReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Gate {
    Init,
    Rot { qubit: usize, angle: f64, phase: f64 },
    Cnot { control: usize, target: usize },
    Measure(usize),
}

impl Gate {
    /// Qubits the gate touches.
    pub fn qubits(&self, num_qubits: usize) -> Vec<usize> {
        match *self {
            Gate::Init => (0..num_qubits).collect(),
            Gate::Rot { qubit, .. } | Gate::Measure(qubit) => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    fn max_qubit(&self) -> Option<usize> {
        match *self {
            Gate::Init => None,
            Gate::Rot { qubit, .. } | Gate::Measure(qubit) => Some(qubit),
            Gate::Cnot { control, target } => Some(control.max(target)),
        }
    }
}

impl std::fmt::Display for Gate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Gate::Init => f.write_str("INIT"),
            Gate::Rot { qubit, angle, phase } => write!(f, "ROT {qubit} {angle} {phase}"),
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Gate::Measure(q) => write!(f, "MEASURE {q}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    pub gates: Vec<Gate>,
    /// Source line of each gate, 1-based; 0 for gates built in code.
    pub lines: Vec<usize>,
}

fn column_of(line: &str, token: &str) -> usize {
    let start = token.as_ptr() as usize - line.as_ptr() as usize;
    start + 1
}

impl Circuit {
    pub fn new(gates: Vec<Gate>) -> Self {
        let lines = vec![0; gates.len()];
        Circuit { gates, lines }
    }

    /// Parses one gate per line: `INIT`, `ROT q angle phase`, `CNOT c t`,
    /// `MEASURE q`. `#` starts a comment; keywords are case-insensitive.
    pub fn parse(text: &str) -> Result<Self> {
        let mut circuit = Circuit::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let Some(&head) = tokens.first() else {
                continue;
            };
            let err = |tok: &str, msg: String| EndosError::parse(line_no, column_of(line, tok), msg);
            let arity = |n: usize| -> Result<()> {
                if tokens.len() != n + 1 {
                    let tok = tokens.get(n + 1).copied().unwrap_or(head);
                    return Err(err(
                        tok,
                        format!("{} takes {n} argument(s), got {}", head.to_uppercase(), tokens.len() - 1),
                    ));
                }
                Ok(())
            };
            let qubit = |tok: &str| -> Result<usize> {
                tok.parse::<usize>()
                    .map_err(|_| err(tok, format!("`{tok}` is not a qubit index")))
            };
            let real = |tok: &str| -> Result<f64> {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(tok, format!("`{tok}` is not a finite number")))
            };
            let gate = match head.to_ascii_uppercase().as_str() {
                "INIT" => {
                    arity(0)?;
                    Gate::Init
                }
                "ROT" => {
                    arity(3)?;
                    let angle = real(tokens[2])?;
                    if !(angle > 0.0 && angle <= 2.0 * PI) {
                        return Err(err(tokens[2], format!("angle {angle} outside (0, 2pi]")));
                    }
                    Gate::Rot {
                        qubit: qubit(tokens[1])?,
                        angle,
                        phase: real(tokens[3])?,
                    }
                }
                "CNOT" => {
                    arity(2)?;
                    let (control, target) = (qubit(tokens[1])?, qubit(tokens[2])?);
                    if control == target {
                        return Err(err(tokens[2], "CNOT control and target must differ".into()));
                    }
                    Gate::Cnot { control, target }
                }
                "MEASURE" => {
                    arity(1)?;
                    Gate::Measure(qubit(tokens[1])?)
                }
                _ => return Err(err(head, format!("unknown gate `{head}`"))),
            };
            circuit.gates.push(gate);
            circuit.lines.push(line_no);
        }
        Ok(circuit)
    }

    /// Smallest register that holds every referenced qubit (at least one).
    pub fn inferred_qubits(&self) -> usize {
        self.gates
            .iter()
            .filter_map(Gate::max_qubit)
            .max()
            .map_or(1, |m| m + 1)
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        for (k, gate) in self.gates.iter().enumerate() {
            if let Some(q) = gate.max_qubit() {
                if q >= num_qubits {
                    return Err(EndosError::parse(
                        self.lines.get(k).copied().unwrap_or(0),
                        1,
                        format!("qubit {q} out of range for a {num_qubits}-qubit register"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        self.gates.iter().map(|g| format!("{g}\n")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Instruction {
    MoveTip(TipPosition),
    ApplyPulse(Pulse),
    MeasureViaCurrent(usize),
    /// Fires only when the donor bit of the latest measurement is 1.
    ConditionalPulse(Pulse),
    Barrier,
}

impl std::fmt::Display for Instruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let pulse = |f: &mut std::fmt::Formatter<'_>, head: &str, p: &Pulse| {
            write!(f, "{head} {} {} {} {}", p.channel.name(), p.frequency, p.angle, p.phase)
        };
        match self {
            Instruction::MoveTip(pos) => write!(f, "MOVE {pos}"),
            Instruction::ApplyPulse(p) => pulse(f, "PULSE", p),
            Instruction::MeasureViaCurrent(q) => write!(f, "MEASURE {q}"),
            Instruction::ConditionalPulse(p) => pulse(f, "CONDPULSE", p),
            Instruction::Barrier => f.write_str("BARRIER"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PulseProgram {
    pub instructions: Vec<Instruction>,
}

impl PulseProgram {
    pub fn new(instructions: Vec<Instruction>) -> Self {
        PulseProgram { instructions }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn pulses(&self) -> impl Iterator<Item = &Pulse> {
        self.instructions.iter().filter_map(|i| match i {
            Instruction::ApplyPulse(p) | Instruction::ConditionalPulse(p) => Some(p),
            _ => None,
        })
    }

    pub fn moves(&self) -> impl Iterator<Item = TipPosition> + '_ {
        self.instructions.iter().filter_map(|i| match i {
            Instruction::MoveTip(t) => Some(*t),
            _ => None,
        })
    }

    pub fn extend(&mut self, other: PulseProgram) {
        self.instructions.extend(other.instructions);
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in &self.instructions {
            let _ = writeln!(out, "{i}");
        }
        out
    }

    /// Reads the text form back. Pulses get logical mode and a duration
    /// scaled from the channel's pi duration in `cfg`.
    pub fn parse(text: &str, cfg: &MachineConfig) -> Result<Self> {
        let mut instructions = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let Some(&head) = tokens.first() else {
                continue;
            };
            let err = |tok: &str, msg: String| EndosError::parse(line_no, column_of(line, tok), msg);
            let need = |n: usize| -> Result<()> {
                if tokens.len() != n + 1 {
                    return Err(err(head, format!("{head} takes {n} argument(s)")));
                }
                Ok(())
            };
            let num = |tok: &str| -> Result<f64> {
                tok.parse::<f64>().map_err(|_| err(tok, format!("`{tok}` is not a number")))
            };
            let qubit = |tok: &str| -> Result<usize> {
                tok.parse::<usize>().map_err(|_| err(tok, format!("`{tok}` is not a qubit index")))
            };
            let pulse = || -> Result<Pulse> {
                need(4)?;
                let channel = Channel::from_name(tokens[1])
                    .ok_or_else(|| err(tokens[1], format!("unknown channel `{}`", tokens[1])))?;
                Ok(Pulse::logical(channel, num(tokens[2])?, num(tokens[3])?, num(tokens[4])?, cfg))
            };
            let instr = match head {
                "MOVE" => {
                    need(1)?;
                    if tokens[1] == "PARK" {
                        Instruction::MoveTip(TipPosition::Parked)
                    } else {
                        Instruction::MoveTip(TipPosition::AtQubit(qubit(tokens[1])?))
                    }
                }
                "PULSE" => Instruction::ApplyPulse(pulse()?),
                "CONDPULSE" => Instruction::ConditionalPulse(pulse()?),
                "MEASURE" => {
                    need(1)?;
                    Instruction::MeasureViaCurrent(qubit(tokens[1])?)
                }
                "BARRIER" => {
                    need(0)?;
                    Instruction::Barrier
                }
                _ => return Err(err(head, format!("unknown instruction `{head}`"))),
            };
            instructions.push(instr);
        }
        Ok(PulseProgram { instructions })
    }

    /// Checks the structural contract: donor-channel pulses and
    /// measurements need the tip on a qubit, conditional pulses need an
    /// earlier measurement, moves stay on the register.
    pub fn validate(&self, layout: &RegisterLayout) -> Result<()> {
        let mut tip = layout.tip();
        let mut measured = false;
        for (index, instr) in self.instructions.iter().enumerate() {
            let bad = |reason: String| EndosError::IllFormedProgram { index, reason };
            match instr {
                Instruction::MoveTip(pos) => {
                    if let TipPosition::AtQubit(q) = pos {
                        layout.check_qubit(*q).map_err(|e| bad(e.to_string()))?;
                    }
                    tip = *pos;
                }
                Instruction::ApplyPulse(p) | Instruction::ConditionalPulse(p) => {
                    p.validate().map_err(|e| bad(e.to_string()))?;
                    if p.channel.needs_tip() && tip == TipPosition::Parked {
                        return Err(bad(format!("{} pulse with the tip parked", p.channel.name())));
                    }
                    if matches!(instr, Instruction::ConditionalPulse(_)) && !measured {
                        return Err(bad("conditional pulse before any measurement".into()));
                    }
                }
                Instruction::MeasureViaCurrent(q) => {
                    if tip != TipPosition::AtQubit(*q) {
                        return Err(bad(format!("measurement of qubit {q} with the tip at {tip}")));
                    }
                    measured = true;
                }
                Instruction::Barrier => {}
            }
        }
        Ok(())
    }
}

fn engine_frequency(
    layout: &RegisterLayout,
    tip_at: usize,
    site: usize,
    spectators: &[(usize, u8)],
    cfg: &MachineConfig,
) -> Result<f64> {
    let tipped = layout.with_tip(TipPosition::AtQubit(tip_at))?;
    let mut config = BasisConfiguration::ground(layout.size());
    for &(s, b) in spectators {
        config = config.with_bit(s, b);
    }
    transition_frequency(config, site, &tipped, cfg)
}

/// Nuclear resonance of `qubit` under the tip with its electron and the tip
/// nucleus in |0>.
pub fn addressing_frequency(qubit: usize, layout: &RegisterLayout, cfg: &MachineConfig) -> Result<f64> {
    layout.check_qubit(qubit)?;
    engine_frequency(layout, qubit, layout.nucleus_site(qubit), &[], cfg)
}

/// The five conditional frequencies of the CNOT sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CnotFrequencies {
    /// Control electron, iff control nucleus |1> and tip |0>.
    pub ec: f64,
    /// Tip nucleus, iff control electron |1>.
    pub a: f64,
    /// Target electron, iff tip |1> and target nucleus |1>.
    pub et1: f64,
    /// Target electron, iff tip |1> and target nucleus |0>.
    pub et0: f64,
    /// Target nucleus, iff target electron |1>.
    pub p: f64,
}

pub fn cnot_frequencies(
    control: usize,
    target: usize,
    layout: &RegisterLayout,
    cfg: &MachineConfig,
) -> Result<CnotFrequencies> {
    layout.check_qubit(control)?;
    layout.check_qubit(target)?;
    if control == target {
        return Err(EndosError::SameQubit(control));
    }
    let tip = layout.tip_site();
    let (nc, ec) = (layout.nucleus_site(control), layout.electron_site(control));
    let (nt, et) = (layout.nucleus_site(target), layout.electron_site(target));
    Ok(CnotFrequencies {
        ec: engine_frequency(layout, control, ec, &[(nc, 1), (tip, 0)], cfg)?,
        a: engine_frequency(layout, control, tip, &[(ec, 1)], cfg)?,
        et1: engine_frequency(layout, target, et, &[(nt, 1), (tip, 1)], cfg)?,
        et0: engine_frequency(layout, target, et, &[(nt, 0), (tip, 1)], cfg)?,
        p: engine_frequency(layout, target, nt, &[(et, 1)], cfg)?,
    })
}

pub fn compile_rotation(
    qubit: usize,
    angle: f64,
    phase: f64,
    layout: &RegisterLayout,
    cfg: &MachineConfig,
) -> Result<PulseProgram> {
    let f = addressing_frequency(qubit, layout, cfg)?;
    let pulse = Pulse::logical(Channel::PhosphorusNuclearRF, f, angle, phase, cfg);
    pulse.validate()?;
    Ok(PulseProgram::new(vec![
        Instruction::MoveTip(TipPosition::AtQubit(qubit)),
        Instruction::ApplyPulse(pulse),
    ]))
}

/// The seven-step tip-mediated CNOT: entangle the control donor with its
/// electron and the tip nucleus, carry the tip to the target, flip the
/// target conditionally, then undo the ancilla entanglement in reverse.
pub fn compile_cnot(
    control: usize,
    target: usize,
    layout: &RegisterLayout,
    cfg: &MachineConfig,
) -> Result<PulseProgram> {
    let f = cnot_frequencies(control, target, layout, cfg)?;
    let e = |freq| Instruction::ApplyPulse(Pulse::pi(Channel::ElectronRF, freq, cfg));
    let tip = Instruction::ApplyPulse(Pulse::pi(Channel::TipCarbonNuclearRF, f.a, cfg));
    let donor = Instruction::ApplyPulse(Pulse::pi(Channel::PhosphorusNuclearRF, f.p, cfg));
    let to = |q| Instruction::MoveTip(TipPosition::AtQubit(q));
    Ok(PulseProgram::new(vec![
        to(control),
        e(f.ec),
        tip,
        to(target),
        e(f.et1),
        e(f.et0),
        donor,
        e(f.et1),
        e(f.et0),
        to(control),
        tip,
        e(f.ec),
    ]))
}

/// Measure every donor and flip the ones found excited.
pub fn compile_init(layout: &RegisterLayout, cfg: &MachineConfig) -> Result<PulseProgram> {
    let mut program = PulseProgram::default();
    for q in 0..layout.num_qubits() {
        let f = addressing_frequency(q, layout, cfg)?;
        program.instructions.extend([
            Instruction::MoveTip(TipPosition::AtQubit(q)),
            Instruction::MeasureViaCurrent(q),
            Instruction::ConditionalPulse(Pulse::pi(Channel::PhosphorusNuclearRF, f, cfg)),
        ]);
    }
    Ok(program)
}

pub fn compile_measure(qubit: usize, layout: &RegisterLayout) -> Result<PulseProgram> {
    layout.check_qubit(qubit)?;
    Ok(PulseProgram::new(vec![
        Instruction::MoveTip(TipPosition::AtQubit(qubit)),
        Instruction::MeasureViaCurrent(qubit),
    ]))
}

pub fn compile_gate(gate: &Gate, layout: &RegisterLayout, cfg: &MachineConfig) -> Result<PulseProgram> {
    match *gate {
        Gate::Init => compile_init(layout, cfg),
        Gate::Rot { qubit, angle, phase } => compile_rotation(qubit, angle, phase, layout, cfg),
        Gate::Cnot { control, target } => compile_cnot(control, target, layout, cfg),
        Gate::Measure(q) => compile_measure(q, layout),
    }
}

/// Compiles a whole circuit and parks the tip at the end.
pub fn compile_circuit(circuit: &Circuit, layout: &RegisterLayout, cfg: &MachineConfig) -> Result<PulseProgram> {
    circuit.validate(layout.num_qubits())?;
    let mut program = PulseProgram::default();
    for gate in &circuit.gates {
        program.extend(compile_gate(gate, layout, cfg)?);
    }
    let last_tip = program.moves().last().unwrap_or(layout.tip());
    if last_tip != TipPosition::Parked {
        program.instructions.push(Instruction::MoveTip(TipPosition::Parked));
    }
    Ok(program)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FlagKind {
    /// The pulse frequency matches no transition anywhere in the register.
    NoResonantTransition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecutionFlag {
    pub instruction: usize,
    pub kind: FlagKind,
    pub frequency: f64,
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub state: PureState,
    pub records: Vec<MeasurementRecord>,
    pub timing: TimingReport,
    pub flags: Vec<ExecutionFlag>,
    pub conditional_pulses_fired: usize,
    pub final_tip: TipPosition,
    /// Outcome of every pulse that was applied, in order.
    pub pulse_outcomes: Vec<(usize, PulseOutcome)>,
}

/// Runs a program on `initial`. The tip starts where `layout` says; all
/// randomness is drawn from `rng` in instruction order. Conditional pulses
/// are charged their full duration whether or not they fire.
pub fn execute<R: Rng + ?Sized>(
    program: &PulseProgram,
    initial: PureState,
    layout: &RegisterLayout,
    cfg: &MachineConfig,
    rng: &mut R,
) -> Result<Execution> {
    program.validate(layout)?;
    if initial.num_sites() != layout.size() {
        return Err(EndosError::MismatchedRegister {
            expected: layout.size(),
            got: initial.num_sites(),
        });
    }
    let mut layout = layout.clone();
    let mut state = initial;
    let mut records: Vec<MeasurementRecord> = Vec::new();
    let mut flags = Vec::new();
    let mut fired = 0;
    let mut outcomes = Vec::new();
    let mut durations = Vec::with_capacity(program.len());

    for (index, instr) in program.instructions.iter().enumerate() {
        durations.push((
            instruction_category(instr),
            instruction_duration(instr, layout.tip(), &layout, cfg),
        ));
        let mut pulse_to_apply = None;
        match instr {
            Instruction::MoveTip(pos) => layout.set_tip(*pos)?,
            Instruction::ApplyPulse(p) => pulse_to_apply = Some(p),
            Instruction::ConditionalPulse(p) => {
                if records.last().is_some_and(|r| r.inferred_p_bit == 1) {
                    fired += 1;
                    pulse_to_apply = Some(p);
                }
            }
            Instruction::MeasureViaCurrent(q) => {
                records.push(measure_via_current(&mut state, *q, &layout, cfg, rng)?);
            }
            Instruction::Barrier => {}
        }
        if let Some(p) = pulse_to_apply {
            let outcome = apply_selective_pulse(&mut state, p, &layout, cfg)?;
            if outcome.no_resonant_transition() {
                flags.push(ExecutionFlag {
                    instruction: index,
                    kind: FlagKind::NoResonantTransition,
                    frequency: p.frequency,
                });
            }
            outcomes.push((index, outcome));
        }
    }
    Ok(Execution {
        state,
        records,
        timing: TimingReport::from_durations(durations, cfg),
        flags,
        conditional_pulses_fired: fired,
        final_tip: layout.tip(),
        pulse_outcomes: outcomes,
    })
}
