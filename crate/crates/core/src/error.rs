use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular: zero pivot in column {column}")]
    SingularPivot { column: usize },

    #[error("structurally singular: {0}")]
    StructurallySingular(String),

    #[error("singular front at assembly node {node}: {source}")]
    SingularFront {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("singular HODLR leaf {leaf}: zero pivot in local column {column}")]
    SingularLeaf { leaf: usize, column: usize },

    #[error("singular diagonal tile {tile}: zero pivot in local column {column}")]
    SingularTile { tile: usize, column: usize },

    #[error("structural inconsistency: {0}")]
    Structure(String),

    #[error("cycle detected in task graph at vertex {0}")]
    Cycle(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("problem size overflow: {0}")]
    SizeOverflow(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
