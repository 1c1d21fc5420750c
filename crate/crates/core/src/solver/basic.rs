use crate::network::Network;

use super::{Solution, SolveOptions, SolverError, SolverState};

/// Runs the basic preflow algorithm to completion.
pub fn run_basic(net: &Network) -> Result<Solution, SolverError> {
    run_basic_with(net, &SolveOptions::default())
}

pub fn run_basic_with(net: &Network, options: &SolveOptions) -> Result<Solution, SolverError> {
    let mut state = SolverState::initial_iteration_with(net, options)?;
    while state.step()? {
        state.stats.big_iterations += 1;
    }
    let mut solution = state.into_solution();
    solution.stats.updates_max_per_big_iteration = solution.stats.updates_total;
    Ok(solution)
}
