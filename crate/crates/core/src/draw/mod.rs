//! Draw engines for both designs: the group draw by rejection sampling and
//! the sequential league-phase draw with exact deadlock avoidance.

mod group;
mod league;

pub use group::{draw_groups, draw_groups_with_budget, GroupAssignment, DEFAULT_RETRY_BUDGET};
pub use league::{
    check_completion_feasible, draw_league, enumerate_candidate_pairs, DrawState, LeagueSchedule,
    OpponentPair,
};

use thiserror::Error;

use crate::model::{PotAssignment, Team};

/// Opponents a team may face from one association over the whole league
/// phase (counting both fixture directions).
pub const ASSOC_OPPONENT_CAP: u8 = 2;

#[derive(Debug, Error)]
pub enum DrawError {
    #[error(
        "group draw retry budget of {budget} exhausted; association counts: {assoc_counts}"
    )]
    RetryBudgetExhausted { budget: u64, assoc_counts: String },
    #[error("no valid schedule exists for this draw instance")]
    Infeasible,
    #[error("invalid draw instance: {0}")]
    BadInstance(String),
    #[error("fixture {home} vs {away} violates the draw constraints: {reason}")]
    InvalidFixture {
        home: String,
        away: String,
        reason: String,
    },
}

/// Static description of a draw instance: pot membership, association of
/// every team, and the association-opponent cap.
///
/// Teams are dense indices `0..n_teams`. The standard instances are
/// 4 pots x 8 (old design) and 4 pots x 9 (new design); smaller shapes are
/// accepted so reduced instances can be tested exhaustively.
#[derive(Debug, Clone)]
pub struct DrawInstance {
    n_teams: usize,
    n_pots: usize,
    pot_size: usize,
    pot_of: Vec<u8>,
    assoc_of: Vec<u8>,
    n_assocs: usize,
    pots: Vec<Vec<usize>>,
    assoc_members: Vec<Vec<usize>>,
    assoc_cap: u8,
    team_labels: Vec<String>,
    assoc_labels: Vec<String>,
}

impl DrawInstance {
    pub fn new(
        pots: Vec<Vec<usize>>,
        assoc_of: Vec<u8>,
        assoc_cap: u8,
    ) -> Result<Self, DrawError> {
        let n_teams = assoc_of.len();
        let team_labels = (0..n_teams).map(|i| format!("t{i}")).collect();
        let n_assocs = assoc_of.iter().map(|&a| a as usize + 1).max().unwrap_or(0);
        let assoc_labels = (0..n_assocs).map(|i| format!("a{i}")).collect();
        Self::with_labels(pots, assoc_of, assoc_cap, team_labels, assoc_labels)
    }

    pub fn with_labels(
        pots: Vec<Vec<usize>>,
        assoc_of: Vec<u8>,
        assoc_cap: u8,
        team_labels: Vec<String>,
        assoc_labels: Vec<String>,
    ) -> Result<Self, DrawError> {
        let n_teams = assoc_of.len();
        let n_pots = pots.len();
        if n_teams == 0 || n_teams > 64 {
            return Err(DrawError::BadInstance(format!(
                "supported team counts are 1..=64, got {n_teams}"
            )));
        }
        if n_pots == 0 || n_pots > 8 {
            return Err(DrawError::BadInstance(format!(
                "supported pot counts are 1..=8, got {n_pots}"
            )));
        }
        let pot_size = pots[0].len();
        if pots.iter().any(|p| p.len() != pot_size) || pot_size * n_pots != n_teams {
            return Err(DrawError::BadInstance(
                "pots must have equal sizes and partition the teams".into(),
            ));
        }
        let mut pot_of = vec![u8::MAX; n_teams];
        for (p, members) in pots.iter().enumerate() {
            for &t in members {
                if t >= n_teams || pot_of[t] != u8::MAX {
                    return Err(DrawError::BadInstance(format!(
                        "team {t} missing or assigned to several pots"
                    )));
                }
                pot_of[t] = p as u8;
            }
        }
        let n_assocs = assoc_of.iter().map(|&a| a as usize + 1).max().unwrap_or(0);
        let mut assoc_members = vec![Vec::new(); n_assocs];
        for (t, &a) in assoc_of.iter().enumerate() {
            assoc_members[a as usize].push(t);
        }
        if team_labels.len() != n_teams || assoc_labels.len() != n_assocs {
            return Err(DrawError::BadInstance("label arity mismatch".into()));
        }
        Ok(DrawInstance {
            n_teams,
            n_pots,
            pot_size,
            pot_of,
            assoc_of,
            n_assocs,
            pots,
            assoc_members,
            assoc_cap,
            team_labels,
            assoc_labels,
        })
    }

    /// Builds the instance for a seeded roster subset.
    pub fn from_pot_assignment(
        assignment: &PotAssignment,
        teams: &[Team],
    ) -> Result<Self, DrawError> {
        let assoc_of = crate::model::association_ids(teams);
        let n_assocs = assoc_of.iter().map(|&a| a as usize + 1).max().unwrap_or(0);
        let mut assoc_labels = vec![String::new(); n_assocs];
        for (t, &a) in assoc_of.iter().enumerate() {
            if assoc_labels[a as usize].is_empty() {
                assoc_labels[a as usize] = teams[t].association.clone();
            }
        }
        let team_labels = teams.iter().map(|t| t.id.clone()).collect();
        Self::with_labels(
            assignment.pots.clone(),
            assoc_of,
            ASSOC_OPPONENT_CAP,
            team_labels,
            assoc_labels,
        )
    }

    pub fn n_teams(&self) -> usize {
        self.n_teams
    }

    pub fn n_pots(&self) -> usize {
        self.n_pots
    }

    pub fn pot_size(&self) -> usize {
        self.pot_size
    }

    pub fn pots(&self) -> &[Vec<usize>] {
        &self.pots
    }

    pub fn pot_of(&self, team: usize) -> usize {
        self.pot_of[team] as usize
    }

    pub fn assoc_of(&self, team: usize) -> usize {
        self.assoc_of[team] as usize
    }

    pub fn assoc_cap(&self) -> u8 {
        self.assoc_cap
    }

    pub fn team_label(&self, team: usize) -> &str {
        &self.team_labels[team]
    }

    /// Association team counts formatted for diagnostics, largest first.
    pub fn assoc_count_summary(&self) -> String {
        let mut counts: Vec<(usize, &str)> = self
            .assoc_members
            .iter()
            .enumerate()
            .map(|(a, members)| (members.len(), self.assoc_labels[a].as_str()))
            .collect();
        counts.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(y.1)));
        counts
            .iter()
            .map(|(n, label)| format!("{label}={n}"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Checks every group-assignment invariant; returns human-readable
/// violations, empty when valid.
pub fn validate_group_assignment(inst: &DrawInstance, groups: &[Vec<usize>]) -> Vec<String> {
    let mut violations = Vec::new();
    if groups.len() != inst.pot_size {
        violations.push(format!(
            "expected {} groups, found {}",
            inst.pot_size,
            groups.len()
        ));
        return violations;
    }
    let mut seen = vec![false; inst.n_teams];
    for (g, group) in groups.iter().enumerate() {
        if group.len() != inst.n_pots {
            violations.push(format!(
                "group {g} has {} teams, expected {}",
                group.len(),
                inst.n_pots
            ));
            continue;
        }
        for (pot, &t) in group.iter().enumerate() {
            if t >= inst.n_teams {
                violations.push(format!("group {g} slot {pot} has unknown team index {t}"));
                continue;
            }
            if seen[t] {
                violations.push(format!(
                    "team {} appears more than once",
                    inst.team_labels[t]
                ));
            }
            seen[t] = true;
            if inst.pot_of[t] as usize != pot {
                violations.push(format!(
                    "group {g}: team {} sits in the pot-{} slot but belongs to pot {}",
                    inst.team_labels[t],
                    pot + 1,
                    inst.pot_of[t] + 1
                ));
            }
        }
        for i in 0..group.len() {
            for j in i + 1..group.len() {
                let (a, b) = (group[i], group[j]);
                if a < inst.n_teams && b < inst.n_teams && inst.assoc_of[a] == inst.assoc_of[b] {
                    violations.push(format!(
                        "group {g}: {} and {} share association {}",
                        inst.team_labels[a],
                        inst.team_labels[b],
                        inst.assoc_labels[inst.assoc_of[a] as usize]
                    ));
                }
            }
        }
    }
    if let Some(t) = seen.iter().position(|&s| !s) {
        violations.push(format!("team {} is missing", inst.team_labels[t]));
    }
    violations
}

/// Checks every league-schedule invariant; returns human-readable
/// violations, empty when valid.
pub fn validate_league_schedule(inst: &DrawInstance, fixtures: &[(usize, usize)]) -> Vec<String> {
    let mut violations = Vec::new();
    let expected = inst.n_teams * inst.n_pots;
    if fixtures.len() != expected {
        violations.push(format!(
            "expected {expected} fixtures, found {}",
            fixtures.len()
        ));
    }
    let mut home_per_pot = vec![0u32; inst.n_teams * inst.n_pots];
    let mut away_per_pot = vec![0u32; inst.n_teams * inst.n_pots];
    let mut assoc_opponents = vec![0u32; inst.n_teams * inst.n_assocs];
    let mut met = vec![0u64; inst.n_teams];
    for &(h, a) in fixtures {
        if h >= inst.n_teams || a >= inst.n_teams || h == a {
            violations.push(format!("fixture ({h}, {a}) is malformed"));
            continue;
        }
        if inst.assoc_of[h] == inst.assoc_of[a] {
            violations.push(format!(
                "{} vs {}: same-association fixture ({})",
                inst.team_labels[h],
                inst.team_labels[a],
                inst.assoc_labels[inst.assoc_of[h] as usize]
            ));
        }
        if met[h] & (1 << a) != 0 {
            violations.push(format!(
                "{} and {} meet more than once",
                inst.team_labels[h], inst.team_labels[a]
            ));
        }
        met[h] |= 1 << a;
        met[a] |= 1 << h;
        home_per_pot[h * inst.n_pots + inst.pot_of[a] as usize] += 1;
        away_per_pot[a * inst.n_pots + inst.pot_of[h] as usize] += 1;
        assoc_opponents[h * inst.n_assocs + inst.assoc_of[a] as usize] += 1;
        assoc_opponents[a * inst.n_assocs + inst.assoc_of[h] as usize] += 1;
    }
    for t in 0..inst.n_teams {
        for p in 0..inst.n_pots {
            let home = home_per_pot[t * inst.n_pots + p];
            let away = away_per_pot[t * inst.n_pots + p];
            if home != 1 {
                violations.push(format!(
                    "{} has {home} home fixtures against pot {} (expected 1)",
                    inst.team_labels[t],
                    p + 1
                ));
            }
            if away != 1 {
                violations.push(format!(
                    "{} has {away} away fixtures against pot {} (expected 1)",
                    inst.team_labels[t],
                    p + 1
                ));
            }
        }
        for a in 0..inst.n_assocs {
            let n = assoc_opponents[t * inst.n_assocs + a];
            if n > inst.assoc_cap as u32 {
                violations.push(format!(
                    "{} meets {n} opponents from {} (cap {})",
                    inst.team_labels[t], inst.assoc_labels[a], inst.assoc_cap
                ));
            }
        }
    }
    violations
}
