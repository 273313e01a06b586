//! Old-design group draw: one uniform permutation per pot, rejected until
//! no group carries an association clash.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DrawError, DrawInstance};

/// Retries before the rejection sampler gives up.
pub const DEFAULT_RETRY_BUDGET: u64 = 1_000_000;

/// Groups formed column-wise from the pot permutations: `groups[g][p]` is
/// the pot-`p` team of group `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAssignment {
    pub groups: Vec<Vec<usize>>,
}

/// Draws a group assignment uniformly over all assignments satisfying the
/// association constraint. Rejection keeps the accepted distribution
/// uniform because every raw assignment is equally likely.
pub fn draw_groups(inst: &DrawInstance, rng: &mut impl Rng) -> Result<GroupAssignment, DrawError> {
    draw_groups_with_budget(inst, rng, DEFAULT_RETRY_BUDGET)
}

pub fn draw_groups_with_budget(
    inst: &DrawInstance,
    rng: &mut impl Rng,
    budget: u64,
) -> Result<GroupAssignment, DrawError> {
    let n_groups = inst.pot_size();
    let mut shuffled: Vec<Vec<usize>> = inst.pots().to_vec();
    for _ in 0..budget {
        for pot in shuffled.iter_mut() {
            pot.shuffle(rng);
        }
        if (0..n_groups).all(|g| group_is_clash_free(inst, &shuffled, g)) {
            let groups = (0..n_groups)
                .map(|g| shuffled.iter().map(|pot| pot[g]).collect())
                .collect();
            return Ok(GroupAssignment { groups });
        }
    }
    Err(DrawError::RetryBudgetExhausted {
        budget,
        assoc_counts: inst.assoc_count_summary(),
    })
}

fn group_is_clash_free(inst: &DrawInstance, shuffled: &[Vec<usize>], g: usize) -> bool {
    let mut seen: u64 = 0;
    for pot in shuffled {
        let bit = 1u64 << inst.assoc_of(pot[g]);
        if seen & bit != 0 {
            return false;
        }
        seen |= bit;
    }
    true
}
