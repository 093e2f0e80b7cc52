//! Bayesian preposterior decision analysis for repair decisions.
//!
//! Every problem has two actions: do nothing (`a_0`, free) or repair
//! (`a_R`, cost `c_R`). A failure costs `c_F`. Exact ties between the two
//! expected costs go to `a_0`.

mod one_step;
mod report;
mod two_step;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{Interval, ScanGrid};

pub use one_step::*;
pub use report::*;
pub use two_step::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "a_0")]
    DoNothing,
    #[serde(rename = "a_R")]
    Repair,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::DoNothing, Action::Repair];

    pub fn label(self) -> &'static str {
        match self {
            Action::DoNothing => "a_0",
            Action::Repair => "a_R",
        }
    }

    /// Picks `a_R` only when it is strictly cheaper.
    pub fn cheaper(no_repair: f64, repair: f64) -> Action {
        if repair < no_repair {
            Action::Repair
        } else {
            Action::DoNothing
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Costs {
    pub repair: f64,
    pub failure: f64,
    /// Cost of running the inspection, subtracted for the net VoI.
    #[serde(default)]
    pub inspection: f64,
}

impl Costs {
    pub fn new(repair: f64, failure: f64) -> Result<Self> {
        let c = Costs { repair, failure, inspection: 0.0 };
        c.validate()?;
        Ok(c)
    }

    pub fn with_inspection(mut self, inspection: f64) -> Self {
        self.inspection = inspection;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c_R", self.repair), ("c_F", self.failure), ("nde_cost", self.inspection)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be a non-negative number, got {v}")));
            }
        }
        Ok(())
    }

    /// `c_A(a)`.
    pub fn action_cost(&self, a: Action) -> f64 {
        match a {
            Action::DoNothing => 0.0,
            Action::Repair => self.repair,
        }
    }
}

/// Where to look for signal-space boundaries: decision roots or sweep
/// thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSearch {
    pub bracket: Interval,
    pub grid: ScanGrid,
}

impl SignalSearch {
    pub fn new(bracket: Interval, grid: ScanGrid) -> Result<Self> {
        grid.nodes(bracket)?;
        Ok(SignalSearch { bracket, grid })
    }
}
