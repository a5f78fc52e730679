//! One simulated run, end to end, and the JSON report it produces.
//!
//! Report keys, in order:
//! `seed`, `config`, `config_warnings`, `num_qubits`, `circuit`,
//! `initial_configuration`, `program`, `measurements`, `conditional_pulses_fired`,
//! `flags`, `final_state`, `timing`, `schedule`, `verification`, `trace_readout`,
//! `exit_code`.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::compiler::{compile_circuit, compile_cnot, execute, Circuit, ExecutionFlag, Gate};
use crate::config::MachineConfig;
use crate::error::{EndosError, Result};
use crate::layout::{RegisterLayout, TipPosition};
use crate::physics::{frequency_audit, BasisConfiguration, FrequencyAudit};
use crate::readout::{classify_frequency, detect_peak, synth_trace, trace_tolerance, MeasurementRecord, TraceSettings};
use crate::schedule::{schedule_multi_tip, validate_schedule, TipAssignment};
use crate::state::{ancilla_diagnostics, cold_start_sample, seeded_rng, AncillaDiagnostics, PureState, SimRng};
use crate::timing::TimingReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PHYSICS: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: u64,
    pub tips: Option<usize>,
    pub verify_frequencies: bool,
    pub dump_state: Option<PathBuf>,
    pub trace_snr: Option<f64>,
    /// Directory receiving one trace file per measurement.
    pub trace_dir: Option<PathBuf>,
    pub enforce_budget: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FinalState {
    pub dump_path: Option<String>,
    pub norm: f64,
    pub tip: TipPosition,
    pub ancillas: AncillaDiagnostics,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleSummary {
    pub assignment: TipAssignment,
    pub valid: bool,
    pub timeline: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CnotCheck {
    pub control: usize,
    pub target: usize,
    /// Lowest fidelity with the ideal output over the four basis inputs.
    pub min_fidelity: f64,
    pub min_ancilla_population: f64,
    pub min_ancilla_purity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub cnot: Option<CnotCheck>,
    pub final_ancilla_purity: f64,
    pub frequency_audit: Option<FrequencyAudit>,
    pub audit_passed: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceReadout {
    pub qubit: usize,
    pub snr: f64,
    pub detected_frequency: f64,
    pub classified: Option<(u8, u8)>,
    pub agrees: bool,
    pub trace_path: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub config: MachineConfig,
    pub config_warnings: Vec<String>,
    pub num_qubits: usize,
    pub circuit: Vec<String>,
    pub initial_configuration: String,
    pub program: Vec<String>,
    pub measurements: Vec<MeasurementRecord>,
    pub conditional_pulses_fired: usize,
    pub flags: Vec<ExecutionFlag>,
    pub final_state: FinalState,
    pub timing: TimingReport,
    pub schedule: Option<ScheduleSummary>,
    pub verification: Verification,
    pub trace_readout: Option<Vec<TraceReadout>>,
    pub exit_code: i32,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }
}

/// Register implied by the config, or by the circuit when the config leaves
/// the size at 0.
pub fn layout_for(cfg: &MachineConfig, circuit: &Circuit) -> Result<RegisterLayout> {
    let n = if cfg.num_qubits > 0 {
        cfg.num_qubits
    } else {
        circuit.inferred_qubits()
    };
    if cfg.grid_columns > 0 {
        RegisterLayout::grid(n, cfg.grid_columns)
    } else {
        RegisterLayout::line(n)
    }
}

/// Runs the CNOT program for `(control, target)` on every basis input of the
/// pair, other qubits and ancillas in |0>.
pub fn check_cnot(control: usize, target: usize, layout: &RegisterLayout, cfg: &MachineConfig) -> Result<CnotCheck> {
    let program = compile_cnot(control, target, layout, cfg)?;
    let mut check = CnotCheck {
        control,
        target,
        min_fidelity: f64::INFINITY,
        min_ancilla_population: f64::INFINITY,
        min_ancilla_purity: f64::INFINITY,
    };
    let mut rng = seeded_rng(0);
    for (bc, bt) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        let input = BasisConfiguration::ground(layout.size())
            .with_bit(layout.nucleus_site(control), bc)
            .with_bit(layout.nucleus_site(target), bt);
        let expected = input.with_bit(layout.nucleus_site(target), bt ^ bc);
        let run = execute(&program, PureState::basis(input), layout, cfg, &mut rng)?;
        let diag = ancilla_diagnostics(&run.state, layout)?;
        check.min_fidelity = check.min_fidelity.min(run.state.fidelity(&PureState::basis(expected)));
        for (_, p) in &diag.populations {
            check.min_ancilla_population = check.min_ancilla_population.min(*p);
        }
        check.min_ancilla_purity = check.min_ancilla_purity.min(diag.purity);
    }
    Ok(check)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| EndosError::InvalidConfig(format!("cannot write {}: {e}", path.display())))
}

/// Compiles and executes `circuit`, then gathers every requested check.
/// The register starts in the cold-start state when the circuit opens with
/// `INIT`, otherwise in the all-|0> state.
pub fn run(cfg: &MachineConfig, circuit: &Circuit, opts: &RunOptions) -> Result<RunReport> {
    let warnings = cfg.validate()?;
    let layout = layout_for(cfg, circuit)?;
    let program = compile_circuit(circuit, &layout, cfg)?;
    let mut rng = seeded_rng(opts.seed);
    let initial = if circuit.gates.first() == Some(&Gate::Init) {
        cold_start_sample(&layout, cfg, &mut rng)
    } else {
        BasisConfiguration::ground(layout.size())
    };
    let exec = execute(&program, PureState::basis(initial), &layout, cfg, &mut rng)?;

    let dump_path = match &opts.dump_state {
        Some(path) => {
            write_file(path, &exec.state.dump())?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let ancillas = ancilla_diagnostics(&exec.state, &layout)?;

    let schedule = match opts.tips {
        Some(k) => {
            let assignment = schedule_multi_tip(circuit, k, &layout, cfg)?;
            let valid = validate_schedule(circuit, &assignment, &layout, cfg).is_ok();
            Some(ScheduleSummary {
                timeline: assignment.timeline_text(),
                assignment,
                valid,
            })
        }
        None => None,
    };

    let cnot = if layout.num_qubits() >= 2 {
        Some(check_cnot(0, 1, &layout, cfg)?)
    } else {
        None
    };
    let audit = if opts.verify_frequencies {
        Some(frequency_audit(cfg)?)
    } else {
        None
    };

    let trace_readout = match opts.trace_snr {
        Some(snr) => Some(trace_readouts(&exec.records, snr, cfg, opts.trace_dir.as_deref(), &mut rng)?),
        None => None,
    };

    let audit_passed = audit.as_ref().map(FrequencyAudit::passed);
    let physics_ok = exec.flags.is_empty() && audit_passed != Some(false);
    let exit_code = exit_code(physics_ok, opts.enforce_budget && !exec.timing.feasible);

    Ok(RunReport {
        seed: opts.seed,
        config: cfg.clone(),
        config_warnings: warnings.iter().map(ToString::to_string).collect(),
        num_qubits: layout.num_qubits(),
        circuit: circuit.gates.iter().map(ToString::to_string).collect(),
        initial_configuration: initial.to_bitstring(),
        program: program.instructions.iter().map(ToString::to_string).collect(),
        measurements: exec.records,
        conditional_pulses_fired: exec.conditional_pulses_fired,
        flags: exec.flags,
        final_state: FinalState {
            dump_path,
            norm: exec.state.norm_sqr().sqrt(),
            tip: exec.final_tip,
            ancillas: ancillas.clone(),
        },
        timing: exec.timing,
        schedule,
        verification: Verification {
            cnot,
            final_ancilla_purity: ancillas.purity,
            frequency_audit: audit,
            audit_passed,
        },
        trace_readout,
        exit_code,
    })
}

fn trace_readouts(
    records: &[MeasurementRecord],
    snr: f64,
    cfg: &MachineConfig,
    dir: Option<&Path>,
    rng: &mut SimRng,
) -> Result<Vec<TraceReadout>> {
    let settings = TraceSettings::for_config(cfg, snr);
    let tol = trace_tolerance(cfg);
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let trace = synth_trace(r.inferred_p_bit, r.inferred_a_bit, cfg, &settings, rng)?;
            let detected = detect_peak(&trace)?;
            let classified = classify_frequency(detected, cfg, tol).ok();
            let trace_path = match dir {
                Some(d) => {
                    let path = d.join(format!("trace_{i:03}_q{}.txt", r.qubit));
                    write_file(&path, &trace.to_text())?;
                    Some(path.display().to_string())
                }
                None => None,
            };
            Ok(TraceReadout {
                qubit: r.qubit,
                snr,
                detected_frequency: detected,
                classified,
                agrees: classified == Some((r.inferred_p_bit, r.inferred_a_bit)),
                trace_path,
            })
        })
        .collect()
}

/// Physics failures outrank a blown budget.
pub fn exit_code(physics_ok: bool, over_budget: bool) -> i32 {
    if !physics_ok {
        EXIT_PHYSICS
    } else if over_budget {
        EXIT_BUDGET
    } else {
        EXIT_OK
    }
}

/// One seed per batch entry, drawn in order from a generator seeded with
/// `seed`.
pub fn derive_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = SimRng::seed_from_u64(seed);
    (0..count).map(|_| rng.random()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_text(text: &str, seed: u64) -> RunReport {
        run(
            &MachineConfig::default(),
            &Circuit::parse(text).unwrap(),
            &RunOptions { seed, ..Default::default() },
        )
        .unwrap()
    }

    #[test]
    fn flip_then_cnot_reads_both_ones() {
        for seed in 0..5 {
            let r = run_text("INIT\nROT 0 3.14159265 0\nCNOT 0 1\nMEASURE 0\nMEASURE 1\n", seed);
            let bits: Vec<u8> = r.measurements.iter().rev().take(2).map(|m| m.inferred_p_bit).collect();
            assert_eq!(bits, vec![1, 1], "seed {seed}");
            assert_eq!(r.exit_code, EXIT_OK);
            assert!(r.flags.is_empty());
        }
    }

    #[test]
    fn empty_circuit() {
        let r = run_text("", 1);
        assert!(r.program.is_empty());
        assert_eq!(r.timing.total_wall_time, 0.0);
        assert_eq!(r.exit_code, EXIT_OK);
    }

    #[test]
    fn verification_block() {
        let r = run(
            &MachineConfig::default(),
            &Circuit::parse("CNOT 1 0\n").unwrap(),
            &RunOptions { verify_frequencies: true, tips: Some(2), ..Default::default() },
        )
        .unwrap();
        let cnot = r.verification.cnot.unwrap();
        assert!(cnot.min_fidelity > 1.0 - 1e-12);
        assert!(cnot.min_ancilla_purity > 1.0 - 1e-12);
        assert_eq!(r.verification.audit_passed, Some(true));
        assert!(r.schedule.unwrap().valid);
    }

    #[test]
    fn budget_exit_code() {
        let cfg = MachineConfig { t2: 1e-5, ..Default::default() };
        let circuit = Circuit::parse("CNOT 0 1\n").unwrap();
        let strict = RunOptions { enforce_budget: true, ..Default::default() };
        assert_eq!(run(&cfg, &circuit, &strict).unwrap().exit_code, EXIT_BUDGET);
        assert_eq!(run(&cfg, &circuit, &RunOptions::default()).unwrap().exit_code, EXIT_OK);
    }

    #[test]
    fn exit_code_precedence() {
        assert_eq!(exit_code(true, false), EXIT_OK);
        assert_eq!(exit_code(true, true), EXIT_BUDGET);
        assert_eq!(exit_code(false, true), EXIT_PHYSICS);
        assert_eq!(exit_code(false, false), EXIT_PHYSICS);
    }

    #[test]
    fn traces_agree_with_records() {
        let r = run(
            &MachineConfig::default(),
            &Circuit::parse("ROT 0 3.141592653589793 0\nMEASURE 0\n").unwrap(),
            &RunOptions { trace_snr: Some(10.0), seed: 3, ..Default::default() },
        )
        .unwrap();
        let t = r.trace_readout.unwrap();
        assert_eq!(t.len(), 1);
        assert!(t[0].agrees);
        assert_eq!(t[0].classified, Some((1, 0)));
    }

    #[test]
    fn seeds_are_derived_deterministically() {
        assert_eq!(derive_seeds(9, 3), derive_seeds(9, 3));
        let s = derive_seeds(9, 3);
        assert!(s[0] != s[1] && s[1] != s[2]);
    }
}
