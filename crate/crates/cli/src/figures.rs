//! Canned configurations for the figure data bundles.

use std::str::FromStr;

use crate::scenario::{run_config_text, RunOptions, RunReport};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig4,
    Fig5,
    Fig6,
}

impl Figure {
    pub const ALL: [Figure; 3] = [Figure::Fig4, Figure::Fig5, Figure::Fig6];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }

    pub fn config(self) -> &'static str {
        match self {
            Figure::Fig4 => include_str!("../configs/fig4.toml"),
            Figure::Fig5 => include_str!("../configs/fig5.toml"),
            Figure::Fig6 => include_str!("../configs/fig6.toml"),
        }
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure {s:?} (expected fig4, fig5 or fig6)"))
    }
}

pub fn emit_figure_bundle(which: Figure, opts: &RunOptions) -> Result<RunReport, CliError> {
    run_config_text(which.config(), which.name(), opts)
}
