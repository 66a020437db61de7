//! Level-set sparse triangular solve over the supernodal task DAG and
//! the critical-path cost model.

mod cost;
mod dag;
mod solve;

pub use cost::{critical_path_cost, CostMode, MachineModel};
pub use dag::{build_task_dag, level_sets, Edge, TaskDag};
pub use solve::{sequential_forward, sptrsv_levelwise, sptrsv_levelwise_with, TaskOrder};
