use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use endos::compiler::{compile_circuit, Circuit, Gate, PulseProgram};
use endos::config::MachineConfig;
use endos::layout::{RegisterLayout, TipPosition};
use endos::physics::{configuration_energy, transition_frequency, BasisConfiguration};
use endos::schedule::{schedule_multi_tip, validate_schedule};
use endos::state::{apply_selective_pulse, Channel, Pulse, PulseMode, PureState};

fn state_strategy(dim: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map("zero vector", |pairs| {
        let amps = pairs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        let mut s = PureState::from_amplitudes(amps).ok()?;
        s.normalize().ok()?;
        Some(s)
    })
}

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    prop_oneof![
        1 => Just(Gate::Init),
        3 => (0..n, 0.01f64..=2.0 * PI, -PI..PI).prop_map(|(qubit, angle, phase)| Gate::Rot { qubit, angle, phase }),
        4 => (0..n, 1..n).prop_map(move |(c, d)| Gate::Cnot { control: c, target: (c + d) % n }),
        2 => (0..n).prop_map(Gate::Measure),
    ]
}

fn site_of(channel: Channel, layout: &RegisterLayout) -> usize {
    let q = layout.tip().qubit().expect("tip placed");
    match channel {
        Channel::ElectronRF => layout.electron_site(q),
        Channel::PhosphorusNuclearRF => layout.nucleus_site(q),
        Channel::TipCarbonNuclearRF => layout.tip_site(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// A resonant pulse changes only the addressed spin: the populations of
    /// every other site are untouched and the norm is kept.
    #[test]
    fn pulse_is_local_and_unitary(
        state in state_strategy(32),
        tip in 0usize..2,
        channel in prop::sample::select(vec![Channel::ElectronRF, Channel::PhosphorusNuclearRF, Channel::TipCarbonNuclearRF]),
        config in 0u64..32,
        angle in 0.01f64..=2.0 * PI,
        phase in -PI..PI,
        phased in any::<bool>(),
    ) {
        let cfg = MachineConfig::default();
        let layout = RegisterLayout::line(2).unwrap().with_tip(TipPosition::AtQubit(tip)).unwrap();
        let site = site_of(channel, &layout);
        let f = transition_frequency(BasisConfiguration::new(config, 5), site, &layout, &cfg).unwrap();
        let mut pulse = Pulse::logical(channel, f, angle, phase, &cfg);
        if phased {
            pulse.mode = PulseMode::PhasedRotation;
        }
        let mut after = state.clone();
        let outcome = apply_selective_pulse(&mut after, &pulse, &layout, &cfg).unwrap();
        prop_assert!(!outcome.no_resonant_transition());
        prop_assert!((after.norm_sqr() - 1.0).abs() < 1e-12);
        for other in (0..5).filter(|&s| s != site) {
            prop_assert!((after.probability_one(other) - state.probability_one(other)).abs() < 1e-12);
        }
    }

    /// Flipping one spin changes the energy by its transition frequency, and
    /// with the couplings off every line scales linearly with the field.
    #[test]
    fn flip_energy_and_field_scaling(
        config in 0u64..32,
        site in 0usize..5,
        tip in 0usize..2,
        lambda in 0.1f64..10.0,
    ) {
        let cfg = MachineConfig::default();
        let layout = RegisterLayout::line(2).unwrap().with_tip(TipPosition::AtQubit(tip)).unwrap();
        let c = BasisConfiguration::new(config, 5);
        let f = transition_frequency(c, site, &layout, &cfg).unwrap();
        let de = configuration_energy(c.flipped(site), &layout, &cfg).unwrap()
            - configuration_energy(c, &layout, &cfg).unwrap();
        prop_assert!((de.abs() - f).abs() <= 1e-6 * f.max(1.0));

        let flat = MachineConfig { a_z: 0.0, a_z_prime: 0.0, a_prime: 0.0, ..cfg.clone() };
        let scaled = MachineConfig { b_field: flat.b_field * lambda, ..flat.clone() };
        let f0 = transition_frequency(c, site, &layout, &flat).unwrap();
        let f1 = transition_frequency(c, site, &layout, &scaled).unwrap();
        prop_assert!((f1 - lambda * f0).abs() <= 1e-9 * f1);
    }

    #[test]
    fn circuit_text_round_trip(gates in prop::collection::vec(gate_strategy(4), 0..30)) {
        let circuit = Circuit::new(gates);
        let parsed = Circuit::parse(&circuit.to_text()).unwrap();
        prop_assert_eq!(parsed.gates, circuit.gates);
    }

    #[test]
    fn program_text_round_trip(gates in prop::collection::vec(gate_strategy(3), 0..12)) {
        let cfg = MachineConfig::default();
        let layout = RegisterLayout::line(3).unwrap();
        let program = compile_circuit(&Circuit::new(gates), &layout, &cfg).unwrap();
        let parsed = PulseProgram::parse(&program.to_text(), &cfg).unwrap();
        prop_assert_eq!(parsed.to_text(), program.to_text());
    }

    /// More tips never lengthen the schedule, and every schedule passes the
    /// independent validator.
    #[test]
    fn makespan_non_increasing_in_tips(gates in prop::collection::vec(gate_strategy(6), 1..25)) {
        let cfg = MachineConfig::default();
        let layout = RegisterLayout::grid(6, 3).unwrap();
        let circuit = Circuit::new(gates);
        let mut prev = f64::INFINITY;
        for k in 1..=5 {
            let a = schedule_multi_tip(&circuit, k, &layout, &cfg).unwrap();
            prop_assert!(validate_schedule(&circuit, &a, &layout, &cfg).is_ok());
            prop_assert!(a.makespan <= prev, "k={} {} > {}", k, a.makespan, prev);
            prev = a.makespan;
        }
    }
}
