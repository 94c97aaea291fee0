//! Transfer-function matrices with labelled field ports.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rational::RationalFunction;
use crate::error::{Error, Result};

/// Whether a port carries an annihilation or a creation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Annihilation,
    Creation,
}

impl Flavor {
    /// Sign carried by this flavor in the bosonic commutator bookkeeping.
    pub fn sign(self) -> f64 {
        match self {
            Flavor::Annihilation => 1.0,
            Flavor::Creation => -1.0,
        }
    }
}

/// A labelled field port, e.g. `b1` or `b2†`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Port {
    pub mode: String,
    pub flavor: Flavor,
}

impl Port {
    pub fn annihilation(mode: &str) -> Self {
        Port {
            mode: mode.to_owned(),
            flavor: Flavor::Annihilation,
        }
    }

    pub fn creation(mode: &str) -> Self {
        Port {
            mode: mode.to_owned(),
            flavor: Flavor::Creation,
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.flavor {
            Flavor::Annihilation => write!(f, "{}", self.mode),
            Flavor::Creation => write!(f, "{}†", self.mode),
        }
    }
}

/// Rows x columns grid of rational functions. Rows are output ports and
/// columns are input ports; the port tags are fixed at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalMatrix {
    row_ports: Vec<Port>,
    col_ports: Vec<Port>,
    entries: Vec<Vec<RationalFunction>>,
}

impl RationalMatrix {
    pub fn new(
        row_ports: Vec<Port>,
        col_ports: Vec<Port>,
        entries: Vec<Vec<RationalFunction>>,
    ) -> Result<Self> {
        if entries.len() != row_ports.len() {
            return Err(Error::Domain(format!(
                "{} rows of entries for {} row ports",
                entries.len(),
                row_ports.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|row| row.len() != col_ports.len()) {
            return Err(Error::Domain(format!(
                "row with {} entries for {} column ports",
                bad.len(),
                col_ports.len()
            )));
        }
        Ok(RationalMatrix {
            row_ports,
            col_ports,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.row_ports.len()
    }

    pub fn cols(&self) -> usize {
        self.col_ports.len()
    }

    pub fn row_ports(&self) -> &[Port] {
        &self.row_ports
    }

    pub fn col_ports(&self) -> &[Port] {
        &self.col_ports
    }

    /// Entry `(i, j)`, zero-based.
    pub fn get(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<RationalFunction>] {
        &self.entries
    }

    /// Replaces a single entry. Port tags are not affected.
    pub fn set(&mut self, i: usize, j: usize, value: RationalFunction) {
        self.entries[i][j] = value;
    }

    pub fn col_index(&self, mode: &str) -> Option<usize> {
        self.col_ports.iter().position(|p| p.mode == mode)
    }

    /// Numeric matrix at `s`.
    pub fn eval(&self, s: Complex64) -> Result<Vec<Vec<Complex64>>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|e| e.eval(s)).collect())
            .collect()
    }

    pub fn eval_iw(&self, omega: f64) -> Result<Vec<Vec<Complex64>>> {
        self.eval(Complex64::new(0.0, omega))
    }
}
