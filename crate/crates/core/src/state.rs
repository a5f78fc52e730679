//! Dense pure-state engine: selective pulses, projective measurement,
//! thermal sampling and reduced-state diagnostics.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::MachineConfig;
use crate::error::{EndosError, Result};
use crate::layout::RegisterLayout;
use crate::physics::{transition_frequency_bits, BasisConfiguration, SpinSpecies};

/// Norm below which a state is treated as corrupted.
pub const DEGENERATE_NORM: f64 = 1e-9;

/// Amplitudes below this magnitude are omitted from text dumps.
pub const DUMP_THRESHOLD: f64 = 1e-12;

/// The generator behind every stochastic operation.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    num_sites: usize,
}

impl PureState {
    pub fn basis(config: BasisConfiguration) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1usize << config.len()];
        amplitudes[config.index()] = Complex64::new(1.0, 0.0);
        PureState {
            amplitudes,
            num_sites: config.len(),
        }
    }

    pub fn ground(layout: &RegisterLayout) -> Self {
        Self::basis(BasisConfiguration::ground(layout.size()))
    }

    /// Product state with qubit `i` in `a0|0> + a1|1>` and every ancilla in
    /// |0>. The input pairs are normalized individually.
    pub fn from_qubits(layout: &RegisterLayout, qubits: &[(Complex64, Complex64)]) -> Result<Self> {
        if qubits.len() != layout.num_qubits() {
            return Err(EndosError::MismatchedRegister {
                expected: layout.num_qubits(),
                got: qubits.len(),
            });
        }
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        // Kronecker product over the nuclei; electrons and tip stay |0>
        for &(a0, a1) in qubits {
            let n = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
            if n < DEGENERATE_NORM {
                return Err(EndosError::DegenerateState { norm: n });
            }
            let (a0, a1) = (a0 / n, a1 / n);
            let mut next = Vec::with_capacity(amps.len() * 2);
            next.extend(amps.iter().map(|a| a * a0));
            next.extend(amps.iter().map(|a| a * a1));
            amps = next;
        }
        let mut state = Self::ground(layout);
        state.amplitudes[0] = Complex64::new(0.0, 0.0);
        for (k, amp) in amps.into_iter().enumerate() {
            // bit j of k is qubit j's nucleus (site 2j)
            let mut index = 0usize;
            for q in 0..layout.num_qubits() {
                if (k >> q) & 1 == 1 {
                    index |= 1 << layout.nucleus_site(q);
                }
            }
            state.amplitudes[index] = amp;
        }
        Ok(state)
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = amplitudes.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(EndosError::InvalidConfig(format!(
                "amplitude vector length {n} is not a power of two"
            )));
        }
        Ok(PureState {
            amplitudes,
            num_sites: n.trailing_zeros() as usize,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, config: BasisConfiguration) -> Complex64 {
        self.amplitudes[config.index()]
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr().sqrt();
        if n < DEGENERATE_NORM {
            return Err(EndosError::DegenerateState { norm: n });
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Probability of finding `site` in |1>.
    pub fn probability_one(&self, site: usize) -> f64 {
        let mask = 1usize << site;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn population_zero(&self, site: usize) -> f64 {
        let mask = 1usize << site;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site < self.num_sites {
            Ok(())
        } else {
            Err(EndosError::InvalidSite {
                site,
                size: self.num_sites,
            })
        }
    }

    /// Text dump: `bitstring re im` for every amplitude above
    /// [`DUMP_THRESHOLD`], sorted by bitstring (site 0 first).
    pub fn dump(&self) -> String {
        let mut rows: Vec<(String, Complex64)> = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > DUMP_THRESHOLD)
            .map(|(i, a)| {
                let c = BasisConfiguration::new(i as u64, self.num_sites);
                (c.to_bitstring(), *a)
            })
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = String::new();
        for (bits, a) in rows {
            let _ = writeln!(out, "{bits} {:e} {:e}", a.re, a.im);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Channel {
    ElectronRF,
    PhosphorusNuclearRF,
    TipCarbonNuclearRF,
}

impl Channel {
    pub fn species(self) -> SpinSpecies {
        match self {
            Channel::ElectronRF => SpinSpecies::Electron,
            Channel::PhosphorusNuclearRF => SpinSpecies::PhosphorusNucleus,
            Channel::TipCarbonNuclearRF => SpinSpecies::CarbonTipNucleus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::ElectronRF => "electron",
            Channel::PhosphorusNuclearRF => "phosphorus",
            Channel::TipCarbonNuclearRF => "carbon",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "electron" => Some(Channel::ElectronRF),
            "phosphorus" => Some(Channel::PhosphorusNuclearRF),
            "carbon" => Some(Channel::TipCarbonNuclearRF),
            _ => None,
        }
    }

    /// Whether the channel drives a spin of the donor under the tip.
    pub fn needs_tip(self) -> bool {
        !matches!(self, Channel::TipCarbonNuclearRF)
    }

    /// Duration of a pi rotation on this channel.
    pub fn pi_duration(self, cfg: &MachineConfig) -> f64 {
        match self {
            Channel::ElectronRF => cfg.electron_pi_duration,
            _ => cfg.nuclear_pi_duration,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PulseMode {
    /// Phase-free bit flip: `n^(angle/pi)` for the axis `n` in the xy-plane,
    /// so a pi pulse swaps amplitudes and a 2*pi pulse is the identity.
    LogicalX,
    /// `exp(-i angle/2 (cos(phase) X + sin(phase) Y))`.
    PhasedRotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pulse {
    pub channel: Channel,
    pub frequency: f64,
    pub angle: f64,
    pub phase: f64,
    pub duration: f64,
    pub mode: PulseMode,
}

impl Pulse {
    /// A logical pulse whose duration scales with angle from the channel's
    /// pi duration.
    pub fn logical(channel: Channel, frequency: f64, angle: f64, phase: f64, cfg: &MachineConfig) -> Self {
        Pulse {
            channel,
            frequency,
            angle,
            phase,
            duration: channel.pi_duration(cfg) * (angle / PI),
            mode: PulseMode::LogicalX,
        }
    }

    pub fn pi(channel: Channel, frequency: f64, cfg: &MachineConfig) -> Self {
        Self::logical(channel, frequency, PI, 0.0, cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.angle > 0.0 && self.angle <= 2.0 * PI) {
            return Err(EndosError::InvalidPulse(format!(
                "angle {} outside (0, 2pi]",
                self.angle
            )));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(EndosError::InvalidPulse(format!(
                "frequency {} must be positive",
                self.frequency
            )));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(EndosError::InvalidPulse(format!(
                "duration {} must be positive",
                self.duration
            )));
        }
        if !self.phase.is_finite() {
            return Err(EndosError::InvalidPulse("phase must be finite".into()));
        }
        Ok(())
    }

    /// 2x2 matrix on (|..0..>, |..1..>) of the addressed spin.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let i = Complex64::new(0.0, 1.0);
        let e_minus = Complex64::from_polar(1.0, -self.phase);
        let e_plus = Complex64::from_polar(1.0, self.phase);
        match self.mode {
            PulseMode::LogicalX => {
                let w = Complex64::from_polar(1.0, self.angle);
                let diag = (Complex64::new(1.0, 0.0) + w) * 0.5;
                let off = (Complex64::new(1.0, 0.0) - w) * 0.5;
                [[diag, e_minus * off], [e_plus * off, diag]]
            }
            PulseMode::PhasedRotation => {
                let c = Complex64::new((self.angle / 2.0).cos(), 0.0);
                let s = (self.angle / 2.0).sin();
                [[c, -i * e_minus * s], [-i * e_plus * s, c]]
            }
        }
    }
}

/// What a pulse did to the register.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseOutcome {
    pub addressed_site: usize,
    /// Configuration pairs in the whole register whose transition lies
    /// within the selectivity window.
    pub resonant_transitions: usize,
    /// Probability weight carried by those pairs before the pulse.
    pub driven_population: f64,
}

impl PulseOutcome {
    /// No transition anywhere in the register matches the pulse: the
    /// frequency was mis-compiled.
    pub fn no_resonant_transition(&self) -> bool {
        self.resonant_transitions == 0
    }
}

pub fn addressed_site(channel: Channel, layout: &RegisterLayout) -> Result<usize> {
    match channel {
        Channel::TipCarbonNuclearRF => Ok(layout.tip_site()),
        Channel::ElectronRF | Channel::PhosphorusNuclearRF => {
            let q = layout.tip().qubit().ok_or(EndosError::TipParked {
                channel: channel.name(),
            })?;
            Ok(match channel {
                Channel::ElectronRF => layout.electron_site(q),
                _ => layout.nucleus_site(q),
            })
        }
    }
}

/// Applies a frequency-selective pulse in place. Every pair of
/// configurations that differ only in the addressed spin is rotated iff its
/// transition frequency is within `selectivity_tolerance` of the pulse.
pub fn apply_selective_pulse(
    state: &mut PureState,
    pulse: &Pulse,
    layout: &RegisterLayout,
    cfg: &MachineConfig,
) -> Result<PulseOutcome> {
    pulse.validate()?;
    if state.num_sites != layout.size() {
        return Err(EndosError::MismatchedRegister {
            expected: layout.size(),
            got: state.num_sites,
        });
    }
    let site = addressed_site(pulse.channel, layout)?;
    let mask = 1usize << site;
    let exact_swap = pulse.mode == PulseMode::LogicalX && pulse.angle == PI;
    let identity = pulse.mode == PulseMode::LogicalX && pulse.angle == 2.0 * PI;
    let m = pulse.matrix();
    let swap_phases = (
        Complex64::from_polar(1.0, -pulse.phase),
        Complex64::from_polar(1.0, pulse.phase),
    );

    let mut resonant = 0usize;
    let mut driven = 0.0;
    let amps = &mut state.amplitudes;
    for i0 in 0..amps.len() {
        if i0 & mask != 0 {
            continue;
        }
        let f = transition_frequency_bits(i0 as u64, site, layout, cfg);
        if (f - pulse.frequency).abs() > cfg.selectivity_tolerance {
            continue;
        }
        let i1 = i0 | mask;
        resonant += 1;
        let (a0, a1) = (amps[i0], amps[i1]);
        driven += a0.norm_sqr() + a1.norm_sqr();
        if identity {
            continue;
        }
        if exact_swap {
            if pulse.phase == 0.0 {
                amps.swap(i0, i1);
            } else {
                amps[i0] = swap_phases.0 * a1;
                amps[i1] = swap_phases.1 * a0;
            }
        } else {
            amps[i0] = m[0][0] * a0 + m[0][1] * a1;
            amps[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
    Ok(PulseOutcome {
        addressed_site: site,
        resonant_transitions: resonant,
        driven_population: driven,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinMeasurement {
    pub bit: u8,
    /// Born probability of the observed bit before collapse.
    pub probability: f64,
}

/// Projective measurement of one site; collapses and renormalizes `state`.
pub fn measure_spin<R: Rng + ?Sized>(state: &mut PureState, site: usize, rng: &mut R) -> Result<SpinMeasurement> {
    state.check_site(site)?;
    let norm = state.norm_sqr();
    if norm.sqrt() < DEGENERATE_NORM {
        return Err(EndosError::DegenerateState { norm: norm.sqrt() });
    }
    let p1 = state.probability_one(site) / norm;
    let u: f64 = rng.random();
    let bit = u8::from(u < p1);
    let probability = if bit == 1 { p1 } else { 1.0 - p1 };
    let mask = 1usize << site;
    for (i, a) in state.amplitudes.iter_mut().enumerate() {
        if ((i & mask != 0) as u8) != bit {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    state.normalize()?;
    Ok(SpinMeasurement { bit, probability })
}

/// [`measure_spin`] with a private generator built from `seed`.
pub fn measure_spin_seeded(state: &mut PureState, site: usize, seed: u64) -> Result<SpinMeasurement> {
    measure_spin(state, site, &mut seeded_rng(seed))
}

/// Boltzmann probability of the ground level for a bare Zeeman splitting.
pub fn ground_probability(species: SpinSpecies, cfg: &MachineConfig) -> f64 {
    let x = cfg.h * species.zeeman_frequency(cfg) / (cfg.k_b * cfg.temperature);
    1.0 / (1.0 + (-x).exp())
}

/// Samples every spin independently from its bare-Zeeman thermal
/// distribution.
pub fn thermal_sample<R: Rng + ?Sized>(layout: &RegisterLayout, cfg: &MachineConfig, rng: &mut R) -> BasisConfiguration {
    let mut bits = 0u64;
    for site in 0..layout.size() {
        let species = layout.species(site).expect("site in range");
        let u: f64 = rng.random();
        if u >= ground_probability(species, cfg) {
            bits |= 1 << site;
        }
    }
    BasisConfiguration::new(bits, layout.size())
}

/// Register before initialization: donor nuclei thermal, electrons and the
/// tip nucleus already polarized.
pub fn cold_start_sample<R: Rng + ?Sized>(layout: &RegisterLayout, cfg: &MachineConfig, rng: &mut R) -> BasisConfiguration {
    let p_ground = ground_probability(SpinSpecies::PhosphorusNucleus, cfg);
    let mut bits = 0u64;
    for q in 0..layout.num_qubits() {
        let u: f64 = rng.random();
        if u >= p_ground {
            bits |= 1 << layout.nucleus_site(q);
        }
    }
    BasisConfiguration::new(bits, layout.size())
}

/// Purity `Tr(rho^2)` of the reduced state on `sites`.
pub fn reduced_purity(state: &PureState, sites: &[usize]) -> Result<f64> {
    for &s in sites {
        state.check_site(s)?;
    }
    let keep_mask: usize = sites.iter().map(|s| 1usize << s).sum();
    let rest: Vec<usize> = (0..state.num_sites).filter(|s| keep_mask & (1 << s) == 0).collect();
    let kept: Vec<usize> = sites.to_vec();
    // matrix M[k][r]: k over kept-site patterns, r over the rest
    let scatter = |pattern: usize, positions: &[usize]| -> usize {
        positions
            .iter()
            .enumerate()
            .filter(|(j, _)| pattern >> j & 1 == 1)
            .map(|(_, &s)| 1usize << s)
            .sum()
    };
    let nk = 1usize << kept.len();
    let nr = 1usize << rest.len();
    let kept_idx: Vec<usize> = (0..nk).map(|k| scatter(k, &kept)).collect();
    let rest_idx: Vec<usize> = (0..nr).map(|r| scatter(r, &rest)).collect();
    let a = &state.amplitudes;
    // M[k][r] with all-zero rows and columns dropped; they add nothing to
    // Tr(rho^2) = ||M M^dagger||_F^2 = ||M^dagger M||_F^2
    let zero = Complex64::new(0.0, 0.0);
    let rows: Vec<usize> = kept_idx
        .iter()
        .copied()
        .filter(|&k| rest_idx.iter().any(|&r| a[k | r] != zero))
        .collect();
    let cols: Vec<usize> = rest_idx
        .iter()
        .copied()
        .filter(|&r| rows.iter().any(|&k| a[k | r] != zero))
        .collect();
    let (outer, inner) = if rows.len() <= cols.len() { (rows, cols) } else { (cols, rows) };
    let vectors: Vec<Vec<Complex64>> = outer
        .iter()
        .map(|&o| inner.iter().map(|&i| a[o | i]).collect())
        .collect();
    let mut purity = 0.0;
    for (x, vx) in vectors.iter().enumerate() {
        for (y, vy) in vectors.iter().enumerate().skip(x) {
            let g: Complex64 = vx.iter().zip(vy).map(|(p, q)| p * q.conj()).sum();
            let w = if x == y { 1.0 } else { 2.0 };
            purity += w * g.norm_sqr();
        }
    }
    Ok(purity)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AncillaDiagnostics {
    /// `(site, population of |0>)` for every ancilla.
    pub populations: Vec<(usize, f64)>,
    /// Purity of the reduced state of all ancillas together.
    pub purity: f64,
}

/// Populations and joint purity of the donor electrons and the tip nucleus.
pub fn ancilla_diagnostics(state: &PureState, layout: &RegisterLayout) -> Result<AncillaDiagnostics> {
    let sites = layout.ancilla_sites();
    let populations = sites.iter().map(|&s| (s, state.population_zero(s))).collect();
    Ok(AncillaDiagnostics {
        populations,
        purity: reduced_purity(state, &sites)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::TipPosition;
    use crate::physics::{closed_form_frequencies, transition_frequency};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tipped(n: usize, q: usize) -> RegisterLayout {
        RegisterLayout::line(n).unwrap().with_tip(TipPosition::AtQubit(q)).unwrap()
    }

    fn engine_f_ec(layout: &RegisterLayout, cfg: &MachineConfig) -> f64 {
        let q = layout.tip().qubit().unwrap();
        let conf = BasisConfiguration::ground(layout.size()).with_bit(layout.nucleus_site(q), 1);
        transition_frequency(conf, layout.electron_site(q), layout, cfg).unwrap()
    }

    #[test]
    fn from_qubits_places_nuclei() {
        let layout = RegisterLayout::line(2).unwrap();
        let s = PureState::from_qubits(&layout, &[(c(0.0, 0.0), c(1.0, 0.0)), (c(1.0, 0.0), c(0.0, 0.0))]).unwrap();
        // qubit 0 nucleus is site 0
        assert_eq!(s.amplitudes()[1], c(1.0, 0.0));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn f_ec_only_acts_on_excited_control() {
        let cfg = MachineConfig::default();
        let layout = tipped(1, 0);
        let mut s = PureState::ground(&layout);
        let before = s.clone();
        let pulse = Pulse::pi(Channel::ElectronRF, engine_f_ec(&layout, &cfg), &cfg);
        let out = apply_selective_pulse(&mut s, &pulse, &layout, &cfg).unwrap();
        assert_eq!(s, before);
        assert_eq!(out.driven_population, 0.0);
        assert!(!out.no_resonant_transition());

        // control nucleus in |1>: electron flips
        let mut s = PureState::basis(BasisConfiguration::new(0b001, 3));
        apply_selective_pulse(&mut s, &pulse, &layout, &cfg).unwrap();
        assert_eq!(s.amplitude(BasisConfiguration::new(0b011, 3)), c(1.0, 0.0));
    }

    #[test]
    fn detuned_pulse_flags_and_is_identity() {
        let cfg = MachineConfig::default();
        let layout = tipped(2, 1);
        let mut s = PureState::from_qubits(&layout, &[(c(0.6, 0.0), c(0.0, 0.8)), (c(1.0, 0.0), c(1.0, 0.0))]).unwrap();
        let before = s.clone();
        let pulse = Pulse::pi(Channel::PhosphorusNuclearRF, 1.234e8, &cfg);
        let out = apply_selective_pulse(&mut s, &pulse, &layout, &cfg).unwrap();
        assert!(out.no_resonant_transition());
        assert_eq!(s, before);
    }

    #[test]
    fn double_pi_restores_exactly() {
        let cfg = MachineConfig::default();
        let layout = tipped(1, 0);
        let s0 = PureState::from_amplitudes((0..8).map(|k| c(k as f64, 1.0 - k as f64)).collect()).unwrap();
        let mut s = s0.clone();
        let pulse = Pulse::pi(Channel::ElectronRF, engine_f_ec(&layout, &cfg), &cfg);
        apply_selective_pulse(&mut s, &pulse, &layout, &cfg).unwrap();
        assert_ne!(s, s0);
        apply_selective_pulse(&mut s, &pulse, &layout, &cfg).unwrap();
        assert_eq!(s, s0);
    }

    #[test]
    fn phased_two_pi_is_minus_one_on_resonant_branch() {
        let cfg = MachineConfig::default();
        let layout = tipped(1, 0);
        let f = engine_f_ec(&layout, &cfg);
        let amps: Vec<Complex64> = (0..8).map(|k| c(0.1 + k as f64, 0.3 * k as f64)).collect();
        let mut s = PureState::from_amplitudes(amps.clone()).unwrap();
        s.normalize().unwrap();
        let norm0 = s.clone();
        let mut pulse = Pulse::pi(Channel::ElectronRF, f, &cfg);
        pulse.mode = PulseMode::PhasedRotation;
        pulse.angle = 2.0 * PI;
        pulse.phase = 0.7;
        apply_selective_pulse(&mut s, &pulse, &layout, &cfg).unwrap();

        // oracle: product of two explicit pi rotations
        let half = std::f64::consts::FRAC_PI_2;
        let r = |phi: f64| {
            let (cs, sn) = (half.cos(), half.sin());
            let i = c(0.0, 1.0);
            [[c(cs, 0.0), -i * Complex64::from_polar(1.0, -phi) * sn], [-i * Complex64::from_polar(1.0, phi) * sn, c(cs, 0.0)]]
        };
        let a = r(0.7);
        let mut prod = [[c(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                prod[i][j] = a[i][0] * a[0][j] + a[i][1] * a[1][j];
            }
        }
        // resonant pair: nucleus=1 (bit0), tip=0; electron bit1
        let (i0, i1) = (0b001usize, 0b011usize);
        let a0 = norm0.amplitudes()[i0];
        let a1 = norm0.amplitudes()[i1];
        let e0 = prod[0][0] * a0 + prod[0][1] * a1;
        let e1 = prod[1][0] * a0 + prod[1][1] * a1;
        assert!((s.amplitudes()[i0] - e0).norm() < 1e-12);
        assert!((s.amplitudes()[i1] - e1).norm() < 1e-12);
        assert!((s.amplitudes()[i0] + a0).norm() < 1e-12);
        for k in [0usize, 2, 4, 5, 6, 7] {
            assert_eq!(s.amplitudes()[k], norm0.amplitudes()[k]);
        }
    }

    #[test]
    fn parked_tip_rejects_donor_channels() {
        let cfg = MachineConfig::default();
        let layout = RegisterLayout::line(1).unwrap();
        let mut s = PureState::ground(&layout);
        let p = Pulse::pi(Channel::ElectronRF, 1e11, &cfg);
        assert!(matches!(
            apply_selective_pulse(&mut s, &p, &layout, &cfg),
            Err(EndosError::TipParked { .. })
        ));
        // the tip channel still works with the tip lifted
        let bare = SpinSpecies::CarbonTipNucleus.zeeman_frequency(&cfg);
        let p = Pulse::pi(Channel::TipCarbonNuclearRF, bare, &cfg);
        apply_selective_pulse(&mut s, &p, &layout, &cfg).unwrap();
        assert_eq!(s.probability_one(layout.tip_site()), 1.0);
    }

    #[test]
    fn invalid_pulses() {
        let cfg = MachineConfig::default();
        let mut p = Pulse::pi(Channel::ElectronRF, 1e11, &cfg);
        p.angle = 0.0;
        assert!(p.validate().is_err());
        p.angle = 7.0;
        assert!(p.validate().is_err());
        let mut p = Pulse::pi(Channel::ElectronRF, -1.0, &cfg);
        assert!(p.validate().is_err());
        p.frequency = 1.0;
        p.duration = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn measuring_a_basis_state_is_certain() {
        let conf = BasisConfiguration::new(0b10110, 5);
        for site in 0..5 {
            let mut s = PureState::basis(conf);
            let m = measure_spin_seeded(&mut s, site, 99).unwrap();
            assert_eq!(m.bit, conf.bit(site));
            assert_eq!(m.probability, 1.0);
            assert_eq!(s, PureState::basis(conf));
        }
    }

    #[test]
    fn born_rule_statistics() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let n = 4000;
        let mut zeros = 0;
        for seed in 1..=n {
            let mut s = PureState::from_amplitudes(vec![c(h, 0.0), c(h, 0.0)]).unwrap();
            if measure_spin_seeded(&mut s, 0, seed).unwrap().bit == 0 {
                zeros += 1;
            }
        }
        let freq = zeros as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((freq - 0.5).abs() <= 3.0 * sigma, "{freq}");
    }

    #[test]
    fn collapse_of_entangled_control() {
        // a'|0 0_ec 0_a> + b'|1 1_ec 1_a> on a one-donor register
        let layout = RegisterLayout::line(1).unwrap();
        let mut amps = vec![c(0.0, 0.0); 8];
        amps[0] = c(0.6, 0.0);
        amps[0b111] = c(0.0, 0.8);
        for seed in 0..200 {
            let mut s = PureState::from_amplitudes(amps.clone()).unwrap();
            let m = measure_spin_seeded(&mut s, layout.nucleus_site(0), seed).unwrap();
            if m.bit == 1 {
                assert!((m.probability - 0.64).abs() < 1e-12);
                assert!((s.amplitudes()[0b111] - c(0.0, 1.0)).norm() < 1e-15);
                return;
            }
        }
        panic!("never observed |1>");
    }

    #[test]
    fn degenerate_state_guard() {
        let mut s = PureState::from_amplitudes(vec![c(0.0, 0.0); 4]).unwrap();
        assert!(matches!(measure_spin_seeded(&mut s, 0, 1), Err(EndosError::DegenerateState { .. })));
    }

    #[test]
    fn thermal_probabilities() {
        let cfg = MachineConfig::default();
        // oracle: 1/(1+exp(-h f / kT)) with f_e = 2 * 13.996 GHz/T * 5 T
        let oracle = |f: f64| 1.0 / (1.0 + (-6.62607015e-34 * f / (1.380649e-23 * 1.0)).exp());
        let pe = ground_probability(SpinSpecies::Electron, &cfg);
        let pp = ground_probability(SpinSpecies::PhosphorusNucleus, &cfg);
        assert!((pe - oracle(2.0 * 13.996e9 * 5.0)).abs() < 1e-5);
        assert!((pe - 0.9988).abs() < 1e-4, "{pe}");
        assert!((pp - oracle(86.1e6)).abs() < 1e-6);
        assert!((pp - 0.5010).abs() < 1e-4, "{pp}");

        let hot = MachineConfig { temperature: 1e9, ..Default::default() };
        assert!((ground_probability(SpinSpecies::Electron, &hot) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn thermal_sampling_is_seeded() {
        let cfg = MachineConfig::default();
        let layout = RegisterLayout::line(3).unwrap();
        let a = thermal_sample(&layout, &cfg, &mut seeded_rng(5));
        let b = thermal_sample(&layout, &cfg, &mut seeded_rng(5));
        assert_eq!(a, b);
        let hot = MachineConfig { temperature: 1e9, ..Default::default() };
        let mut rng = seeded_rng(11);
        let n = 2000;
        let zeros: usize = (0..n)
            .map(|_| thermal_sample(&layout, &hot, &mut rng))
            .map(|c| (0..c.len()).filter(|&s| c.bit(s) == 0).count())
            .sum();
        let frac = zeros as f64 / (n * layout.size()) as f64;
        assert!((frac - 0.5).abs() < 3.0 * (0.25 / (n * layout.size()) as f64).sqrt());
    }

    #[test]
    fn ancilla_product_state() {
        let layout = RegisterLayout::line(2).unwrap();
        let s = PureState::from_qubits(&layout, &[(c(0.6, 0.0), c(0.8, 0.0)), (c(1.0, 0.0), c(0.0, 1.0))]).unwrap();
        let d = ancilla_diagnostics(&s, &layout).unwrap();
        assert_eq!(d.populations.len(), 3);
        for (_, p) in d.populations {
            assert!((p - 1.0).abs() < 1e-15);
        }
        assert!((d.purity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ghz_on_ancillas_has_half_purity() {
        let layout = RegisterLayout::line(2).unwrap();
        let mut amps = vec![c(0.0, 0.0); 32];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // (|00>|000> + |11>|111>)/sqrt2 with nuclei on sites 0, 2 and ancillas on 1, 3, 4
        amps[0] = c(h, 0.0);
        amps[0b11111] = c(h, 0.0);
        let s = PureState::from_amplitudes(amps).unwrap();
        let d = ancilla_diagnostics(&s, &layout).unwrap();
        assert!((d.purity - 0.5).abs() < 1e-12);
        // oracle: rho = 1/2(|000><000| + |111><111|) -> Tr rho^2 = 1/4 + 1/4
        assert!((reduced_purity(&s, &[1, 3, 4]).unwrap() - (0.25 + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn dump_format() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![c(0.0, 0.0); 4];
        amps[1] = c(h, 0.0);
        amps[2] = c(0.0, -h);
        let s = PureState::from_amplitudes(amps).unwrap();
        let text = s.dump();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("01 0e0 -7.07"));
        assert!(lines[1].starts_with("10 7.07"));
    }

    #[test]
    fn closed_form_p_pulse_targets_excited_electron() {
        let cfg = MachineConfig::default();
        let layout = tipped(1, 0);
        let fp = closed_form_frequencies(&cfg).p;
        let mut s = PureState::basis(BasisConfiguration::new(0b010, 3));
        let p = Pulse::pi(Channel::PhosphorusNuclearRF, fp, &cfg);
        apply_selective_pulse(&mut s, &p, &layout, &cfg).unwrap();
        assert_eq!(s.probability_one(0), 1.0);
    }
}
