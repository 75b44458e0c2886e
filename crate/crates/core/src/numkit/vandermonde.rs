use super::{solve_square, Scalar, ToleranceContext};
use crate::error::{Error, Result};

/// Solves `sum_j rho_j * nodes_j^i = rhs_i` for `i = 0..m`.
pub fn solve_vandermonde<S: Scalar>(nodes: &[S], rhs: &[S], ctx: &ToleranceContext) -> Result<Vec<S>> {
    if nodes.len() != rhs.len() {
        return Err(Error::Dimension(format!("{} nodes but {} right-hand sides", nodes.len(), rhs.len())));
    }
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if ctx.approx_eq(&nodes[i], &nodes[j]) {
                return Err(Error::RepeatedNodes(i, j));
            }
        }
    }
    let m = nodes.len();
    let rows: Vec<Vec<S>> = (0..m).map(|i| nodes.iter().map(|x| x.powi(i as u32)).collect()).collect();
    solve_square(rows, rhs.to_vec())
        .ok_or_else(|| Error::Consistency("Vandermonde system with distinct nodes reported singular".into()))
}
