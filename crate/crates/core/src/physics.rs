//! Diagonal spin Hamiltonian of the register, its conditional transition
//! frequencies, and the closed-form frequency table they are audited
//! against.
//!
//! The Hamiltonian contains only S_z/I_z terms, so every basis
//! configuration is an eigenstate and a transition frequency is just the
//! energy difference of two configurations that differ in one bit.

use serde::Serialize;

use crate::config::MachineConfig;
use crate::error::{EndosError, Result};
use crate::layout::{RegisterLayout, SiteRole, TipPosition};

/// Residual allowed between a closed-form frequency and its engine match.
pub const AUDIT_TOLERANCE_HZ: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Magneton {
    Bohr,
    Nuclear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SpinSpecies {
    Electron,
    PhosphorusNucleus,
    CarbonTipNucleus,
}

impl SpinSpecies {
    /// Magnitude of the g-factor. The electron's sign is carried by its
    /// ground orientation instead.
    pub fn g_factor(self) -> f64 {
        match self {
            SpinSpecies::Electron => 2.0,
            SpinSpecies::PhosphorusNucleus => 2.26,
            SpinSpecies::CarbonTipNucleus => 1.4048,
        }
    }

    pub fn magneton(self) -> Magneton {
        match self {
            SpinSpecies::Electron => Magneton::Bohr,
            _ => Magneton::Nuclear,
        }
    }

    /// Orientation of the level labelled |0>.
    pub fn ground_orientation(self) -> Orientation {
        match self {
            SpinSpecies::Electron => Orientation::Down,
            _ => Orientation::Up,
        }
    }

    /// m_z quantum number of a bit.
    pub fn m(self, bit: u8) -> f64 {
        let ground = match self.ground_orientation() {
            Orientation::Up => 0.5,
            Orientation::Down => -0.5,
        };
        if bit == 0 {
            ground
        } else {
            -ground
        }
    }

    /// Bare Zeeman splitting `g * mu * B`, Hz.
    pub fn zeeman_frequency(self, cfg: &MachineConfig) -> f64 {
        let mu = match self.magneton() {
            Magneton::Bohr => cfg.mu_b,
            Magneton::Nuclear => cfg.mu_n,
        };
        self.g_factor() * mu * cfg.b_field
    }

    /// Coefficient of m_z in the energy: positive when the ground level has
    /// m = -1/2 (electron), negative for the nuclei.
    fn zeeman_coefficient(self, cfg: &MachineConfig) -> f64 {
        match self.ground_orientation() {
            Orientation::Down => self.zeeman_frequency(cfg),
            Orientation::Up => -self.zeeman_frequency(cfg),
        }
    }
}

/// One bit per site; bit `k` of `bits` belongs to site `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisConfiguration {
    bits: u64,
    len: usize,
}

impl BasisConfiguration {
    pub fn new(bits: u64, len: usize) -> Self {
        debug_assert!(len <= 64);
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        BasisConfiguration { bits: bits & mask, len }
    }

    pub fn ground(len: usize) -> Self {
        Self::new(0, len)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn index(self) -> usize {
        self.bits as usize
    }

    pub fn bit(self, site: usize) -> u8 {
        ((self.bits >> site) & 1) as u8
    }

    pub fn with_bit(self, site: usize, bit: u8) -> Self {
        let cleared = self.bits & !(1u64 << site);
        Self::new(cleared | ((bit as u64 & 1) << site), self.len)
    }

    pub fn flipped(self, site: usize) -> Self {
        Self::new(self.bits ^ (1u64 << site), self.len)
    }

    /// Site 0 first.
    pub fn to_bitstring(self) -> String {
        (0..self.len)
            .map(|s| if self.bit(s) == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(s: &str) -> Option<Self> {
        if s.len() > 64 {
            return None;
        }
        let mut bits = 0u64;
        for (k, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << k,
                _ => return None,
            }
        }
        Some(Self::new(bits, s.len()))
    }
}

fn bit_of(bits: u64, site: usize) -> u8 {
    ((bits >> site) & 1) as u8
}

fn donor_coupling(layout: &RegisterLayout, qubit: usize, cfg: &MachineConfig) -> f64 {
    if layout.tip() == TipPosition::AtQubit(qubit) {
        cfg.a_z_prime
    } else {
        cfg.a_z
    }
}

fn check_len(config: BasisConfiguration, layout: &RegisterLayout) -> Result<()> {
    if config.len() != layout.size() {
        return Err(EndosError::MismatchedRegister {
            expected: layout.size(),
            got: config.len(),
        });
    }
    Ok(())
}

/// Diagonal energy of a basis configuration, Hz.
///
/// Each donor contributes its electron and nuclear Zeeman terms plus the
/// S_z I_z contact term; the donor under the tip uses the tip-modified
/// coupling and its electron additionally couples to the tip nucleus. The
/// tip nucleus always carries its own Zeeman term.
pub fn configuration_energy(
    config: BasisConfiguration,
    layout: &RegisterLayout,
    cfg: &MachineConfig,
) -> Result<f64> {
    check_len(config, layout)?;
    let e = SpinSpecies::Electron;
    let p = SpinSpecies::PhosphorusNucleus;
    let c = SpinSpecies::CarbonTipNucleus;
    let m_tip = c.m(config.bit(layout.tip_site()));
    let mut energy = 0.0;
    for q in 0..layout.num_qubits() {
        let m_e = e.m(config.bit(layout.electron_site(q)));
        let m_p = p.m(config.bit(layout.nucleus_site(q)));
        energy += e.zeeman_coefficient(cfg) * m_e;
        energy += p.zeeman_coefficient(cfg) * m_p;
        energy += donor_coupling(layout, q, cfg) * m_e * m_p;
        if layout.tip() == TipPosition::AtQubit(q) {
            energy += cfg.a_prime * m_e * m_tip;
        }
    }
    energy += c.zeeman_coefficient(cfg) * m_tip;
    Ok(energy)
}

/// Frequency of flipping `site` from its value in `bits`, without bounds
/// checks. Only terms that involve the site are evaluated; the Zeeman part
/// is added last so that results line up bit-for-bit with the closed forms.
pub(crate) fn transition_frequency_bits(
    bits: u64,
    site: usize,
    layout: &RegisterLayout,
    cfg: &MachineConfig,
) -> f64 {
    let e = SpinSpecies::Electron;
    let p = SpinSpecies::PhosphorusNucleus;
    let c = SpinSpecies::CarbonTipNucleus;
    let tip_site = layout.tip_site();
    let coefficient = if site == tip_site {
        let hyperfine = match layout.tip() {
            TipPosition::AtQubit(q) => {
                cfg.a_prime * e.m(bit_of(bits, layout.electron_site(q)))
            }
            TipPosition::Parked => 0.0,
        };
        c.zeeman_coefficient(cfg) + hyperfine
    } else if site.is_multiple_of(2) {
        let q = site / 2;
        let hyperfine = donor_coupling(layout, q, cfg) * e.m(bit_of(bits, layout.electron_site(q)));
        p.zeeman_coefficient(cfg) + hyperfine
    } else {
        let q = site / 2;
        let mut hyperfine =
            donor_coupling(layout, q, cfg) * p.m(bit_of(bits, layout.nucleus_site(q)));
        if layout.tip() == TipPosition::AtQubit(q) {
            hyperfine += cfg.a_prime * c.m(bit_of(bits, tip_site));
        }
        e.zeeman_coefficient(cfg) + hyperfine
    };
    coefficient.abs()
}

/// `|E(config with site flipped) - E(config)|`, Hz.
pub fn transition_frequency(
    config: BasisConfiguration,
    site: usize,
    layout: &RegisterLayout,
    cfg: &MachineConfig,
) -> Result<f64> {
    check_len(config, layout)?;
    layout.check_site(site)?;
    Ok(transition_frequency_bits(config.bits(), site, layout, cfg))
}

/// Literal evaluations of the textbook frequency formulas, Hz. These are
/// reference values only; the compiler derives its frequencies from
/// [`transition_frequency`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormFrequencies {
    /// Addressed nuclear resonance with the tip in place.
    pub single_qubit: f64,
    /// The same resonance with the tip lifted.
    pub single_qubit_bare: f64,
    /// Control electron flip.
    pub ec: f64,
    /// Tip nucleus flip.
    pub a: f64,
    pub et1: f64,
    pub et0: f64,
    /// Target nucleus flip.
    pub p: f64,
}

impl ClosedFormFrequencies {
    pub fn named(&self) -> [(&'static str, f64); 7] {
        [
            ("f_single_qubit", self.single_qubit),
            ("f_single_qubit_bare", self.single_qubit_bare),
            ("f_ec", self.ec),
            ("f_a", self.a),
            ("f_et1", self.et1),
            ("f_et0", self.et0),
            ("f_p", self.p),
        ]
    }
}

pub fn closed_form_frequencies(cfg: &MachineConfig) -> ClosedFormFrequencies {
    let ze = SpinSpecies::Electron.zeeman_frequency(cfg);
    let zp = SpinSpecies::PhosphorusNucleus.zeeman_frequency(cfg);
    let za = SpinSpecies::CarbonTipNucleus.zeeman_frequency(cfg);
    ClosedFormFrequencies {
        single_qubit: zp - 0.5 * cfg.a_z_prime,
        single_qubit_bare: zp - 0.5 * cfg.a_z,
        ec: ze + (0.5 * cfg.a_prime - 0.5 * cfg.a_z_prime),
        a: (za - 0.5 * cfg.a_prime).abs(),
        et1: ze + (0.5 * cfg.a_z_prime + 0.5 * cfg.a_prime),
        et0: ze + (-0.5 * cfg.a_z_prime + 0.5 * cfg.a_prime),
        p: zp - 0.5 * cfg.a_z_prime,
    }
}

/// Tunneling-current modulation line for a donor nuclear bit and a tip
/// nuclear bit. A ground (|0>) bit shifts the line up by half its coupling.
pub fn modulation_frequency(p_bit: u8, a_bit: u8, cfg: &MachineConfig) -> f64 {
    let ze = SpinSpecies::Electron.zeeman_frequency(cfg);
    let p_shift = if p_bit == 0 { 0.5 } else { -0.5 } * cfg.a_z_prime;
    let a_shift = if a_bit == 0 { 0.5 } else { -0.5 } * cfg.a_prime;
    ze + (p_shift + a_shift)
}

/// The four readout lines in `(p, a)` order 00, 01, 10, 11.
pub fn modulation_lines(cfg: &MachineConfig) -> [((u8, u8), f64); 4] {
    [(0, 0), (0, 1), (1, 0), (1, 1)].map(|(p, a)| ((p, a), modulation_frequency(p, a, cfg)))
}

/// Which spin a closed-form entry is searched against.
fn audit_target(name: &str) -> (SiteRole, TipPosition) {
    match name {
        "f_single_qubit_bare" => (SiteRole::Nucleus(0), TipPosition::Parked),
        "f_single_qubit" | "f_p" => (SiteRole::Nucleus(0), TipPosition::AtQubit(0)),
        "f_a" => (SiteRole::Tip, TipPosition::AtQubit(0)),
        _ => (SiteRole::Electron(0), TipPosition::AtQubit(0)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub name: String,
    pub closed_form_hz: f64,
    pub engine_hz: f64,
    pub residual_hz: f64,
    pub addressed_spin: String,
    pub tip: String,
    /// Spectator bits of the best matching configuration, e.g.
    /// `nucleus=1 tip_nucleus=0`.
    pub spectators: String,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyAudit {
    pub entries: Vec<AuditEntry>,
}

impl FrequencyAudit {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.matched)
    }
}

fn site_label(role: SiteRole) -> &'static str {
    match role {
        SiteRole::Nucleus(_) => "nucleus",
        SiteRole::Electron(_) => "electron",
        SiteRole::Tip => "tip_nucleus",
    }
}

/// Matches every closed-form frequency against the engine by enumerating all
/// spectator configurations of a one-donor register and keeping the closest
/// transition of the relevant spin.
pub fn frequency_audit(cfg: &MachineConfig) -> Result<FrequencyAudit> {
    let base = RegisterLayout::line(1)?;
    let table = closed_form_frequencies(cfg);
    let mut entries = Vec::new();
    for (name, closed) in table.named() {
        let (role, tip) = audit_target(name);
        let layout = base.with_tip(tip)?;
        let site = match role {
            SiteRole::Nucleus(q) => layout.nucleus_site(q),
            SiteRole::Electron(q) => layout.electron_site(q),
            SiteRole::Tip => layout.tip_site(),
        };
        let mut best: Option<(f64, f64, u64)> = None;
        for bits in 0..layout.dimension() as u64 {
            if bit_of(bits, site) != 0 {
                continue;
            }
            let f = transition_frequency_bits(bits, site, &layout, cfg);
            let residual = (f - closed).abs();
            if best.is_none_or(|(r, _, _)| residual < r) {
                best = Some((residual, f, bits));
            }
        }
        let (residual, engine, bits) = best.expect("register has configurations");
        let spectators = (0..layout.size())
            .filter(|&s| s != site)
            .map(|s| format!("{}={}", site_label(layout.role(s).unwrap()), bit_of(bits, s)))
            .collect::<Vec<_>>()
            .join(" ");
        entries.push(AuditEntry {
            name: name.to_string(),
            closed_form_hz: closed,
            engine_hz: engine,
            residual_hz: residual,
            addressed_spin: site_label(role).to_string(),
            tip: tip.to_string(),
            spectators,
            matched: residual <= AUDIT_TOLERANCE_HZ,
        });
    }
    Ok(FrequencyAudit { entries })
}

/// Smallest separation between two distinct resonance lines of the same
/// spin in a one-donor register, tip on or off. `None` when every spin has a
/// single line.
pub fn min_spectral_gap(cfg: &MachineConfig) -> Option<f64> {
    const SAME_LINE_HZ: f64 = 1e-6;
    let base = RegisterLayout::line(1).ok()?;
    let mut gap: Option<f64> = None;
    for tip in [TipPosition::Parked, TipPosition::AtQubit(0)] {
        let layout = base.with_tip(tip).ok()?;
        for site in 0..layout.size() {
            let mut lines: Vec<f64> = (0..layout.dimension() as u64)
                .filter(|&b| bit_of(b, site) == 0)
                .map(|b| transition_frequency_bits(b, site, &layout, cfg))
                .collect();
            lines.sort_by(f64::total_cmp);
            for w in lines.windows(2) {
                let d = w[1] - w[0];
                if d > SAME_LINE_HZ {
                    gap = Some(gap.map_or(d, |g: f64| g.min(d)));
                }
            }
        }
    }
    gap
}
