use super::dag::{level_sets, TaskDag};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Order in which tasks of one level are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TaskOrder {
    #[default]
    Ascending,
    Descending,
}

/// Column-oriented forward substitution, the reference solve.
pub fn sequential_forward(l: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = l.n_rows();
    if b.len() != n {
        return Err(Error::Dimension(format!("right-hand side of length {} for n = {n}", b.len())));
    }
    let mut x = b.to_vec();
    for j in 0..n {
        let (rows, vals) = l.col(j);
        let d = rows
            .binary_search(&j)
            .ok()
            .map(|k| vals[k])
            .filter(|&v| v != 0.0)
            .ok_or(Error::SingularPivot { column: j })?;
        x[j] /= d;
        let xj = x[j];
        for (&i, &v) in rows.iter().zip(vals) {
            if i > j {
                x[i] -= v * xj;
            }
        }
    }
    Ok(x)
}

/// Level-by-level solve of `L x = b` using the task DAG of `l`.
pub fn sptrsv_levelwise(l: &SparseMatrix, dag: &TaskDag, b: &[f64]) -> Result<Vec<f64>> {
    sptrsv_levelwise_with(l, dag, b, TaskOrder::Ascending)
}

/// As [`sptrsv_levelwise`] with an explicit task order inside levels.
/// Each row accumulates its products in ascending column order, so the
/// result does not depend on `order`.
pub fn sptrsv_levelwise_with(l: &SparseMatrix, dag: &TaskDag, b: &[f64], order: TaskOrder) -> Result<Vec<f64>> {
    let n = l.n_rows();
    if b.len() != n {
        return Err(Error::Dimension(format!("right-hand side of length {} for n = {n}", b.len())));
    }
    let rows = l.transpose();
    let mut x = vec![0.0; n];
    for mut level in level_sets(dag) {
        if order == TaskOrder::Descending {
            level.reverse();
        }
        for t in level {
            for i in dag.supernodes[t].clone() {
                let (cols, vals) = rows.col(i);
                let mut acc = b[i];
                let mut diag = 0.0;
                for (&j, &v) in cols.iter().zip(vals) {
                    if j < i {
                        acc -= v * x[j];
                    } else if j == i {
                        diag = v;
                    }
                }
                if diag == 0.0 {
                    return Err(Error::SingularPivot { column: i });
                }
                x[i] = acc / diag;
            }
        }
    }
    Ok(x)
}
