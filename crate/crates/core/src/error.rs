use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Permutation data does not describe a fat graph.
    #[error("malformed fat graph: {0}")]
    Structure(String),

    /// Euler characteristic and boundary count do not yield a nonnegative integer genus.
    #[error("inconsistent surface data: chi = {chi}, boundary components = {boundary}")]
    Orientability { chi: i64, boundary: usize },

    #[error("invalid input: {0}")]
    Input(String),

    /// The anti-alignment rule along Birkhoff annuli cannot be satisfied.
    #[error("orientation does not propagate in piece {piece}: odd cycle through vertices {cycle:?}")]
    Inconsistent { piece: String, cycle: Vec<usize> },

    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
