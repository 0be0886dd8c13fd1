//! Built-in experiments: the group-size sweep and the algorithm comparison
//! on a one-cluster to two-cluster echo-path change.
//!
//! Shared parameters: L = 1024, M = 8, mu = 0.01, delta = 0.01,
//! rho = q = 0.01, AR(1) excitation with pole 0.8, 30 dB SNR, path switch
//! at sample 30000, 60000 samples in total.

use std::fmt;
use std::str::FromStr;

use crate::bench::config::{ExcitationFile, ExperimentFile, PanelEntryFile, ScenarioFile, ScheduleEntryFile};
use crate::error::{Error, Result};
use crate::filter::Variant;

pub const PRESET_SEED: u64 = 1;
pub const FILTER_LENGTH: usize = 1024;
pub const SWITCH_AT: usize = 30_000;
pub const TOTAL_SAMPLES: usize = 60_000;
pub const FIG2_GROUP_SIZES: [usize; 6] = [1, 4, 16, 32, 64, 1024];
pub const BLOCK_GROUP_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// BS-PAPA for P in {1, 4, 16, 32, 64, 1024}.
    Fig2,
    /// APA, PAPA, MPAPA, BS-PAPA (P=32), BS-MPAPA (P=32).
    Fig3,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        }
    }

    pub fn file(self) -> ExperimentFile {
        let panel = match self {
            Preset::Fig2 => FIG2_GROUP_SIZES
                .iter()
                .map(|&p| PanelEntryFile::new(format!("P={p}"), Variant::BsPapa).with_group_size(p))
                .collect(),
            Preset::Fig3 => vec![
                PanelEntryFile::new("APA", Variant::Apa),
                PanelEntryFile::new("PAPA", Variant::Papa),
                PanelEntryFile::new("MPAPA", Variant::Mpapa),
                PanelEntryFile::new("BS-PAPA", Variant::BsPapa).with_group_size(BLOCK_GROUP_SIZE),
                PanelEntryFile::new("BS-MPAPA", Variant::BsMpapa).with_group_size(BLOCK_GROUP_SIZE),
            ],
        };
        let panel = panel
            .into_iter()
            .map(|mut e: PanelEntryFile| {
                e.projection_order = Some(8);
                e
            })
            .collect();
        ExperimentFile {
            scenario: ScenarioFile {
                filter_length: FILTER_LENGTH,
                total_samples: TOTAL_SAMPLES,
                seed: PRESET_SEED,
                snr_db: Some(30.0),
                excitation: ExcitationFile::Ar1 { pole: 0.8 },
                schedule: vec![
                    ScheduleEntryFile {
                        at: 0,
                        clusters: vec![[257, 288]],
                    },
                    ScheduleEntryFile {
                        at: SWITCH_AT,
                        clusters: vec![[257, 288], [769, 800]],
                    },
                ],
            },
            panel,
            trace_decimation: 10,
            output: Some(format!("{}.csv", self.name()).into()),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            other => Err(Error::invalid(format!("unknown preset {other:?} (expected fig2 or fig3)"))),
        }
    }
}
