//! Communication model for 2D/3D process-grid mappings of the
//! elimination tree: per-process accounting for SpLU and SpTRSV,
//! closed-form asymptotic volumes and `P_z` sweeps.

mod asymptotics;
mod grid;
mod mapping;
mod sim;
mod sweep;

pub use asymptotics::{eval_asymptotics, lower_bound, Asymptotics, Problem, SptrsvAsymptotics};
pub use grid::ProcessGrid3D;
pub use mapping::{build_3d_mapping, EtreeView, NodePlacement, TreeMapping};
pub use sim::{simulate_splu_comm, simulate_sptrsv_comm, Aggregate, CommReport, ProcessCounts, Reduction};
pub use sweep::{sweep_csv, sweep_pz, SweepRow, SWEEP_HEADER};
