//! Register layout: which spin lives at which bit of a basis index.
//!
//! Qubit `i` owns sites `2i` (its 31P nucleus) and `2i + 1` (its donor
//! electron). The tip 13C nucleus is the last site, `2 * num_qubits`.

use serde::Serialize;

use crate::error::{EndosError, Result};
use crate::physics::SpinSpecies;

/// Largest register the dense engine accepts.
pub const MAX_SITES: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TipPosition {
    Parked,
    AtQubit(usize),
}

impl TipPosition {
    pub fn qubit(self) -> Option<usize> {
        match self {
            TipPosition::Parked => None,
            TipPosition::AtQubit(q) => Some(q),
        }
    }
}

impl std::fmt::Display for TipPosition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TipPosition::Parked => f.write_str("PARK"),
            TipPosition::AtQubit(q) => write!(f, "{q}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteRole {
    Nucleus(usize),
    Electron(usize),
    Tip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    num_qubits: usize,
    coords: Vec<(i64, i64)>,
    tip: TipPosition,
}

impl RegisterLayout {
    /// All qubits on one row.
    pub fn line(num_qubits: usize) -> Result<Self> {
        Self::grid(num_qubits, 0)
    }

    /// Row-major grid with `columns` qubits per row (`0` = single row).
    pub fn grid(num_qubits: usize, columns: usize) -> Result<Self> {
        if num_qubits == 0 || 2 * num_qubits + 1 > MAX_SITES {
            return Err(EndosError::InvalidConfig(format!(
                "register of {num_qubits} qubits is outside 1..={}",
                (MAX_SITES - 1) / 2
            )));
        }
        let cols = if columns == 0 { num_qubits } else { columns };
        let coords = (0..num_qubits)
            .map(|i| ((i % cols) as i64, (i / cols) as i64))
            .collect();
        Ok(RegisterLayout {
            num_qubits,
            coords,
            tip: TipPosition::Parked,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of spin sites, `2 * num_qubits + 1`.
    pub fn size(&self) -> usize {
        2 * self.num_qubits + 1
    }

    pub fn dimension(&self) -> usize {
        1usize << self.size()
    }

    pub fn tip(&self) -> TipPosition {
        self.tip
    }

    pub fn set_tip(&mut self, tip: TipPosition) -> Result<()> {
        if let TipPosition::AtQubit(q) = tip {
            self.check_qubit(q)?;
        }
        self.tip = tip;
        Ok(())
    }

    pub fn with_tip(&self, tip: TipPosition) -> Result<Self> {
        let mut out = self.clone();
        out.set_tip(tip)?;
        Ok(out)
    }

    pub fn nucleus_site(&self, qubit: usize) -> usize {
        2 * qubit
    }

    pub fn electron_site(&self, qubit: usize) -> usize {
        2 * qubit + 1
    }

    pub fn tip_site(&self) -> usize {
        2 * self.num_qubits
    }

    pub fn role(&self, site: usize) -> Result<SiteRole> {
        self.check_site(site)?;
        Ok(if site == self.tip_site() {
            SiteRole::Tip
        } else if site.is_multiple_of(2) {
            SiteRole::Nucleus(site / 2)
        } else {
            SiteRole::Electron(site / 2)
        })
    }

    pub fn species(&self, site: usize) -> Result<SpinSpecies> {
        Ok(match self.role(site)? {
            SiteRole::Nucleus(_) => SpinSpecies::PhosphorusNucleus,
            SiteRole::Electron(_) => SpinSpecies::Electron,
            SiteRole::Tip => SpinSpecies::CarbonTipNucleus,
        })
    }

    pub fn coords(&self, qubit: usize) -> (i64, i64) {
        self.coords[qubit]
    }

    /// Tip hops between two positions: Manhattan distance on the grid, one
    /// hop to lower onto or lift off the surface, zero when staying put.
    pub fn hops(&self, from: TipPosition, to: TipPosition) -> u64 {
        match (from, to) {
            (TipPosition::Parked, TipPosition::Parked) => 0,
            (TipPosition::Parked, TipPosition::AtQubit(_))
            | (TipPosition::AtQubit(_), TipPosition::Parked) => 1,
            (TipPosition::AtQubit(a), TipPosition::AtQubit(b)) => {
                let (xa, ya) = self.coords[a];
                let (xb, yb) = self.coords[b];
                ((xa - xb).abs() + (ya - yb).abs()) as u64
            }
        }
    }

    pub fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit < self.num_qubits {
            Ok(())
        } else {
            Err(EndosError::InvalidQubit {
                qubit,
                num_qubits: self.num_qubits,
            })
        }
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site < self.size() {
            Ok(())
        } else {
            Err(EndosError::InvalidSite {
                site,
                size: self.size(),
            })
        }
    }

    /// Sites of the ancillas: every donor electron, then the tip nucleus.
    pub fn ancilla_sites(&self) -> Vec<usize> {
        (0..self.num_qubits)
            .map(|q| self.electron_site(q))
            .chain(std::iter::once(self.tip_site()))
            .collect()
    }
}
